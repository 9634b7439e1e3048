//! Mann-Whitney U test and the summarizing-feature screen.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::corpus::{derive_label, Corpus};
use crate::vectorize::AGE_INTERVALS;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UTestMethod {
    Exact,
    NormalApprox,
}

#[derive(Debug, Clone, Serialize)]
pub struct UTestResult {
    /// U for the first sample: pairs won plus half the ties.
    pub u_statistic: f64,
    /// Two-sided p-value.
    pub p_value: f64,
    pub n_a: usize,
    pub n_b: usize,
    pub method: UTestMethod,
}

/// U statistic for sample `a`: sum over pairs of [a_i > b_j] + 0.5*[a_i = b_j],
/// computed via midranks.
fn u_statistic(a: &[f64], b: &[f64]) -> f64 {
    let n_a = a.len();
    let mut pooled: Vec<(f64, bool)> = a
        .iter()
        .map(|&v| (v, true))
        .chain(b.iter().map(|&v| (v, false)))
        .collect();
    pooled.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
    let mut rank_sum_a = 0.0f64;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[j].0 == pooled[i].0 {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0;
        for item in &pooled[i..j] {
            if item.1 {
                rank_sum_a += midrank;
            }
        }
        i = j;
    }
    rank_sum_a - (n_a * (n_a + 1)) as f64 / 2.0
}

/// Tie-corrected variance of U under the null.
fn u_variance(pooled: &mut Vec<f64>, n_a: usize, n_b: usize) -> f64 {
    let n = (n_a + n_b) as f64;
    pooled.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let mut j = i + 1;
        while j < pooled.len() && pooled[j] == pooled[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    (n_a * n_b) as f64 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)))
}

/// Exact two-sided p by enumerating every assignment of the pooled values
/// to the first sample: the fraction with |U' - mu| >= |U - mu|.
fn exact_p(pooled: &[f64], n_a: usize, u_observed: f64) -> f64 {
    let n = pooled.len();
    let mu = (n_a * (n - n_a)) as f64 / 2.0;
    let observed_dev = (u_observed - mu).abs();
    let mut total = 0u64;
    let mut extreme = 0u64;
    let mut picked = Vec::with_capacity(n_a);
    fn walk(
        pooled: &[f64],
        start: usize,
        remaining: usize,
        picked: &mut Vec<usize>,
        total: &mut u64,
        extreme: &mut u64,
        mu: f64,
        observed_dev: f64,
    ) {
        if remaining == 0 {
            let a: Vec<f64> = picked.iter().map(|&i| pooled[i]).collect();
            let b: Vec<f64> = (0..pooled.len())
                .filter(|i| !picked.contains(i))
                .map(|i| pooled[i])
                .collect();
            let u = u_statistic(&a, &b);
            *total += 1;
            if (u - mu).abs() >= observed_dev - 1e-12 {
                *extreme += 1;
            }
            return;
        }
        for i in start..=pooled.len() - remaining {
            picked.push(i);
            walk(
                pooled,
                i + 1,
                remaining - 1,
                picked,
                total,
                extreme,
                mu,
                observed_dev,
            );
            picked.pop();
        }
    }
    walk(
        pooled,
        0,
        n_a,
        &mut picked,
        &mut total,
        &mut extreme,
        mu,
        observed_dev,
    );
    extreme as f64 / total as f64
}

/// Exact p when the combined size is at most 12; otherwise the normal
/// approximation with tie-corrected variance and continuity correction.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<UTestResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument(
            "mann_whitney_u needs non-empty samples".into(),
        ));
    }
    let (n_a, n_b) = (a.len(), b.len());
    let u = u_statistic(a, b);
    let mut pooled: Vec<f64> = a.iter().chain(b.iter()).copied().collect();

    if n_a + n_b <= 12 {
        let p = exact_p(&pooled, n_a, u);
        return Ok(UTestResult {
            u_statistic: u,
            p_value: p.min(1.0),
            n_a,
            n_b,
            method: UTestMethod::Exact,
        });
    }

    let mu = (n_a * n_b) as f64 / 2.0;
    let var = u_variance(&mut pooled, n_a, n_b);
    let p = if var <= 0.0 {
        1.0
    } else {
        let diff = u - mu;
        let corrected = diff.abs() - 0.5;
        let z = corrected.max(0.0) / var.sqrt();
        let normal = Normal::new(0.0, 1.0).expect("unit normal");
        (2.0 * (1.0 - normal.cdf(z))).clamp(0.0, 1.0)
    };
    Ok(UTestResult {
        u_statistic: u,
        p_value: p,
        n_a,
        n_b,
        method: UTestMethod::NormalApprox,
    })
}

/// Summarizing feature to screen for class separation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreenFeature {
    /// Average consult text length in characters.
    AvgSocLength,
    ConsultCount,
}

impl ScreenFeature {
    pub fn parse(raw: &str) -> Result<ScreenFeature> {
        match raw {
            "avg_soc_length" => Ok(ScreenFeature::AvgSocLength),
            "consult_count" => Ok(ScreenFeature::ConsultCount),
            _ => Err(Error::InvalidArgument(format!(
                "unknown screen feature '{raw}'"
            ))),
        }
    }
}

/// Parse an age interval "0-1".."3-4" into its index.
pub fn parse_interval(raw: &str) -> Result<usize> {
    match raw {
        "0-1" => Ok(0),
        "1-2" => Ok(1),
        "2-3" => Ok(2),
        "3-4" => Ok(3),
        _ => Err(Error::InvalidArgument(format!(
            "unknown age interval '{raw}' (expected 0-1, 1-2, 2-3 or 3-4)"
        ))),
    }
}

/// Split children by derived label, compute the feature over consults in
/// the age interval, and run the U test (positive group first).
///
/// For average length, children without consults in the interval are
/// excluded; for consult count a missing interval counts as zero.
pub fn screen_feature(
    corpus: &Corpus,
    feature: ScreenFeature,
    interval: usize,
) -> Result<UTestResult> {
    let (lo, hi) = AGE_INTERVALS
        .get(interval)
        .copied()
        .ok_or_else(|| Error::InvalidArgument(format!("interval index {interval} out of range")))?;
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for child in &corpus.children {
        let in_interval: Vec<usize> = child
            .consults
            .iter()
            .filter(|c| {
                let age = child.age_at(c.observation_date);
                age >= lo && age < hi
            })
            .map(|c| c.text.chars().count())
            .collect();
        let value = match feature {
            ScreenFeature::ConsultCount => Some(in_interval.len() as f64),
            ScreenFeature::AvgSocLength => {
                if in_interval.is_empty() {
                    None
                } else {
                    Some(in_interval.iter().sum::<usize>() as f64 / in_interval.len() as f64)
                }
            }
        };
        if let Some(v) = value {
            if derive_label(child) {
                positive.push(v);
            } else {
                negative.push(v);
            }
        }
    }
    if positive.is_empty() || negative.is_empty() {
        return Err(Error::InvalidArgument(
            "screen_feature needs both a positive and a negative group".into(),
        ));
    }
    mann_whitney_u(&positive, &negative)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Direct pair-counting oracle.
    fn u_bruteforce(a: &[f64], b: &[f64]) -> f64 {
        let mut u = 0.0;
        for &x in a {
            for &y in b {
                if x > y {
                    u += 1.0;
                } else if x == y {
                    u += 0.5;
                }
            }
        }
        u
    }

    #[test]
    fn u_of_fully_dominated_sample_is_zero() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert_eq!(r.u_statistic, 0.0);
        assert_eq!(u_bruteforce(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]), 0.0);
        assert_eq!(r.method, UTestMethod::Exact);
    }

    #[test]
    fn ties_contribute_half() {
        let r = mann_whitney_u(&[1.0, 2.0], &[1.0, 2.0]).unwrap();
        assert_eq!(r.u_statistic, 2.0);
        assert_eq!(u_bruteforce(&[1.0, 2.0], &[1.0, 2.0]), 2.0);
        assert!((r.p_value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn u_matches_bruteforce_on_random_pairs() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let n_a = rng.random_range(1..20);
            let n_b = rng.random_range(1..20);
            // discrete values force ties
            let a: Vec<f64> = (0..n_a).map(|_| rng.random_range(0..8) as f64).collect();
            let b: Vec<f64> = (0..n_b).map(|_| rng.random_range(0..8) as f64).collect();
            let u = u_statistic(&a, &b);
            assert_eq!(u, u_bruteforce(&a, &b), "a={a:?} b={b:?}");
            // U(a,b) + U(b,a) = n_a * n_b
            assert_eq!(
                u + u_statistic(&b, &a),
                (n_a * n_b) as f64,
                "complement identity"
            );
        }
    }

    #[test]
    fn identical_large_samples_have_p_near_one() {
        let a: Vec<f64> = (0..60).map(|i| (i % 7) as f64).collect();
        let r = mann_whitney_u(&a, &a).unwrap();
        assert_eq!(r.method, UTestMethod::NormalApprox);
        assert!(r.p_value > 0.98, "p={}", r.p_value);
    }

    #[test]
    fn separated_large_samples_have_tiny_p() {
        let a: Vec<f64> = (0..40).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..40).map(|i| 100.0 + i as f64).collect();
        let r = mann_whitney_u(&a, &b).unwrap();
        assert!(r.p_value < 1e-9);
    }

    #[test]
    fn exact_p_is_a_valid_tail_probability() {
        // small separated samples: the most extreme table has p = 2/C(6,3)
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap();
        assert!((r.p_value - 2.0 / 20.0).abs() < 1e-12);
    }

    #[test]
    fn empty_sample_is_an_error() {
        assert!(mann_whitney_u(&[], &[1.0]).is_err());
    }

    #[test]
    fn screen_needs_both_groups() {
        use crate::corpus::{ChildRecord, ConsultNote, Corpus};
        let birth = chrono::NaiveDate::from_ymd_opt(2010, 1, 1).unwrap();
        let mut child = ChildRecord::new("1", birth);
        child.consults.push(ConsultNote {
            location: "A".into(),
            action_type: "consult".into(),
            observation_date: birth + chrono::Days::new(100),
            text: "tekst".into(),
        });
        // all-negative corpus: no positive group to compare against
        let corpus = Corpus::new(vec![child]);
        assert!(screen_feature(&corpus, ScreenFeature::AvgSocLength, 0).is_err());
    }

    #[test]
    fn screen_separates_longer_positive_notes() {
        use crate::corpus::{ChildRecord, ConsultNote, Corpus, ZslFinding};
        let birth = chrono::NaiveDate::from_ymd_opt(2010, 1, 1).unwrap();
        let mut children = Vec::new();
        for i in 0..60 {
            let positive = i < 20;
            let mut child = ChildRecord::new(&format!("{i}"), birth);
            let length = if positive { 220 + i } else { 60 + i };
            child.consults.push(ConsultNote {
                location: "A".into(),
                action_type: "consult".into(),
                observation_date: birth + chrono::Days::new(120),
                text: "x".repeat(length),
            });
            if positive {
                child.zsl_findings.push(ZslFinding {
                    finding_date: birth + chrono::Days::new(200),
                    finding_type: "zorgmelding".into(),
                    finding: "melding".into(),
                });
            }
            children.push(child);
        }
        let corpus = Corpus::new(children);
        let result = screen_feature(&corpus, ScreenFeature::AvgSocLength, 0).unwrap();
        assert!(result.p_value < 0.05, "p = {}", result.p_value);
        assert_eq!(result.n_a, 20);
    }
}
