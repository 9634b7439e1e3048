//! Soft-margin kernel SVM trained by pairwise dual updates (SMO), with a
//! two-parameter logistic link fitted on training margins so scores live
//! in [0, 1].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::vectorize::{FeatureMatrix, SparseVec};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    Linear,
    Poly,
    Rbf,
}

/// Kernel parameters resolved against the feature dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub kernel: Kernel,
    pub gamma: f64,
    pub degree: u32,
}

fn sparse_dot(a: &SparseVec, b: &SparseVec) -> f64 {
    let mut sum = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                sum += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    sum
}

fn norm_sq(a: &SparseVec) -> f64 {
    a.iter().map(|(_, w)| w * w).sum()
}

impl KernelParams {
    pub fn eval(&self, a: &SparseVec, b: &SparseVec) -> f64 {
        match self.kernel {
            Kernel::Linear => sparse_dot(a, b),
            Kernel::Poly => (self.gamma * sparse_dot(a, b) + 1.0).powi(self.degree as i32),
            Kernel::Rbf => {
                let d2 = norm_sq(a) - 2.0 * sparse_dot(a, b) + norm_sq(b);
                (-self.gamma * d2.max(0.0)).exp()
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SvmModel {
    pub params: KernelParams,
    pub support: Vec<SparseVec>,
    /// alpha_i * y_i per support vector.
    pub coef: Vec<f64>,
    pub bias: f64,
    /// Dense weight vector (linear kernel fast path).
    pub w: Option<Vec<f64>>,
    pub n_features: usize,
    /// Logistic link: p = 1 / (1 + exp(a * margin + b)).
    pub platt_a: f64,
    pub platt_b: f64,
}

impl SvmModel {
    pub fn margin(&self, x: &SparseVec) -> f64 {
        match &self.w {
            Some(w) => {
                let mut m = self.bias;
                for &(col, v) in x {
                    if (col as usize) < w.len() {
                        m += w[col as usize] * v;
                    }
                }
                m
            }
            None => {
                let mut m = self.bias;
                for (sv, c) in self.support.iter().zip(&self.coef) {
                    m += c * self.params.eval(sv, x);
                }
                m
            }
        }
    }

    /// Calibrated positive-class probability.
    pub fn score(&self, x: &SparseVec) -> f64 {
        sigmoid_link(self.margin(x), self.platt_a, self.platt_b)
    }
}

fn sigmoid_link(margin: f64, a: f64, b: f64) -> f64 {
    let f = a * margin + b;
    // numerically safe logistic
    if f >= 0.0 {
        (-f).exp() / (1.0 + (-f).exp())
    } else {
        1.0 / (1.0 + f.exp())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SvmDiagnostics {
    pub epochs: usize,
    pub steps: usize,
    /// Dual objective after each epoch (non-decreasing).
    pub objective_history: Vec<f64>,
    pub max_kkt_residual: f64,
}

const KKT_TOL: f64 = 1e-3;
const STEP_EPS: f64 = 1e-12;
const MAX_EPOCHS: usize = 2000;
const MAX_KERNEL_ROWS: usize = 6000;

struct Smo<'a> {
    k: Vec<f64>, // n x n kernel matrix
    y: &'a [f64],
    c: f64,
    n: usize,
    alpha: Vec<f64>,
    errors: Vec<f64>, // E_i = u_i - y_i
    b: f64,           // threshold (u = sum - b)
    steps: usize,
}

impl<'a> Smo<'a> {
    fn kij(&self, i: usize, j: usize) -> f64 {
        self.k[i * self.n + j]
    }

    fn take_step(&mut self, i1: usize, i2: usize) -> bool {
        if i1 == i2 {
            return false;
        }
        let (a1, a2) = (self.alpha[i1], self.alpha[i2]);
        let (y1, y2) = (self.y[i1], self.y[i2]);
        let (e1, e2) = (self.errors[i1], self.errors[i2]);
        let s = y1 * y2;
        let (low, high) = if (s - 1.0).abs() < 0.5 {
            // equal targets
            ((a1 + a2 - self.c).max(0.0), (a1 + a2).min(self.c))
        } else {
            ((a2 - a1).max(0.0), (self.c + a2 - a1).min(self.c))
        };
        if low >= high {
            return false;
        }
        let k11 = self.kij(i1, i1);
        let k12 = self.kij(i1, i2);
        let k22 = self.kij(i2, i2);
        let eta = k11 + k22 - 2.0 * k12;
        let mut a2_new = if eta > 0.0 {
            (a2 + y2 * (e1 - e2) / eta).clamp(low, high)
        } else {
            // degenerate curvature: pick the better endpoint
            let f1 = y1 * (e1 + self.b) - a1 * k11 - s * a2 * k12;
            let f2 = y2 * (e2 + self.b) - a2 * k22 - s * a1 * k12;
            let l1 = a1 + s * (a2 - low);
            let h1 = a1 + s * (a2 - high);
            let obj_low = l1 * f1 + low * f2
                + 0.5 * l1 * l1 * k11
                + 0.5 * low * low * k22
                + s * low * l1 * k12;
            let obj_high = h1 * f1 + high * f2
                + 0.5 * h1 * h1 * k11
                + 0.5 * high * high * k22
                + s * high * h1 * k12;
            if obj_low < obj_high - STEP_EPS {
                low
            } else if obj_low > obj_high + STEP_EPS {
                high
            } else {
                return false;
            }
        };
        // snap to the box so epsilon-sized alphas do not linger as
        // support vectors
        if a2_new < 1e-8 {
            a2_new = 0.0;
        } else if a2_new > self.c - 1e-8 {
            a2_new = self.c;
        }
        if (a2_new - a2).abs() < STEP_EPS * (a2_new + a2 + STEP_EPS) {
            return false;
        }
        let mut a1_new = a1 + s * (a2 - a2_new);
        if a1_new < 0.0 {
            a1_new = 0.0;
        } else if a1_new > self.c {
            a1_new = self.c;
        }

        let d1 = y1 * (a1_new - a1);
        let d2 = y2 * (a2_new - a2);
        let b1 = e1 + d1 * k11 + d2 * k12 + self.b;
        let b2 = e2 + d1 * k12 + d2 * k22 + self.b;
        let b_new = if a1_new > 0.0 && a1_new < self.c {
            b1
        } else if a2_new > 0.0 && a2_new < self.c {
            b2
        } else {
            (b1 + b2) / 2.0
        };

        for i in 0..self.n {
            self.errors[i] += d1 * self.kij(i1, i) + d2 * self.kij(i2, i) + self.b - b_new;
        }
        self.alpha[i1] = a1_new;
        self.alpha[i2] = a2_new;
        self.b = b_new;
        self.steps += 1;
        true
    }

    fn examine(&mut self, i2: usize, rng: &mut ChaCha12Rng) -> bool {
        let y2 = self.y[i2];
        let a2 = self.alpha[i2];
        let e2 = self.errors[i2];
        let r2 = e2 * y2;
        let violates = (r2 < -KKT_TOL && a2 < self.c) || (r2 > KKT_TOL && a2 > 0.0);
        if !violates {
            return false;
        }
        // best |E1 - E2| among non-bound points
        let mut best: Option<(f64, usize)> = None;
        for i in 0..self.n {
            if i != i2 && self.alpha[i] > 0.0 && self.alpha[i] < self.c {
                let gap = (self.errors[i] - e2).abs();
                if best.map_or(true, |(g, _)| gap > g) {
                    best = Some((gap, i));
                }
            }
        }
        if let Some((_, i1)) = best {
            if self.take_step(i1, i2) {
                return true;
            }
        }
        // sweep non-bound, then all, from a seeded offset
        let start = rng.random_range(0..self.n);
        for off in 0..self.n {
            let i1 = (start + off) % self.n;
            if self.alpha[i1] > 0.0 && self.alpha[i1] < self.c && self.take_step(i1, i2) {
                return true;
            }
        }
        let start = rng.random_range(0..self.n);
        for off in 0..self.n {
            let i1 = (start + off) % self.n;
            if self.take_step(i1, i2) {
                return true;
            }
        }
        false
    }

    /// Dual objective from the error cache:
    /// W = sum(alpha) - 1/2 * sum_i alpha_i y_i (E_i + y_i + b).
    fn objective(&self) -> f64 {
        let mut linear = 0.0;
        let mut quad = 0.0;
        for i in 0..self.n {
            linear += self.alpha[i];
            quad += self.alpha[i] * self.y[i] * (self.errors[i] + self.y[i] + self.b);
        }
        linear - 0.5 * quad
    }

    fn max_kkt_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let margin = self.y[i] * (self.errors[i] + self.y[i]);
            let r = if self.alpha[i] <= 0.0 {
                (1.0 - margin).max(0.0)
            } else if self.alpha[i] >= self.c {
                (margin - 1.0).max(0.0)
            } else {
                (margin - 1.0).abs()
            };
            worst = worst.max(r);
        }
        worst
    }
}

/// Train the dual with pairwise updates until every KKT residual is inside
/// the tolerance. Deterministic given the seed.
pub fn train_svm(
    x: &FeatureMatrix,
    y: &[bool],
    params: KernelParams,
    c: f64,
    seed: u64,
) -> Result<(SvmModel, SvmDiagnostics)> {
    assert_eq!(x.n_rows, y.len());
    if c <= 0.0 {
        return Err(Error::Config("svm penalty C must be positive".into()));
    }
    let n = x.n_rows;
    if n < 2 {
        return Err(Error::Training("svm needs at least two training rows".into()));
    }
    if n > MAX_KERNEL_ROWS {
        return Err(Error::Training(format!(
            "training set of {n} rows exceeds the kernel cache bound {MAX_KERNEL_ROWS}"
        )));
    }
    if y.iter().all(|l| *l) || y.iter().all(|l| !*l) {
        return Err(Error::Training(
            "training data must contain both classes".into(),
        ));
    }

    let targets: Vec<f64> = y.iter().map(|&l| if l { 1.0 } else { -1.0 }).collect();
    let mut kernel = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i..n {
            let v = params.eval(&x.rows[i], &x.rows[j]);
            kernel[i * n + j] = v;
            kernel[j * n + i] = v;
        }
    }

    let mut smo = Smo {
        k: kernel,
        y: &targets,
        c,
        n,
        alpha: vec![0.0; n],
        errors: targets.iter().map(|t| -t).collect(),
        b: 0.0,
        steps: 0,
    };

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut objective_history = Vec::new();
    let mut epochs = 0usize;
    let mut examine_all = true;
    let mut changed = 0usize;
    loop {
        if !(changed > 0 || examine_all) {
            break;
        }
        epochs += 1;
        if epochs > MAX_EPOCHS {
            let diag = SvmDiagnostics {
                epochs,
                steps: smo.steps,
                objective_history,
                max_kkt_residual: smo.max_kkt_residual(),
            };
            return Err(Error::Training(format!(
                "smo did not converge within {MAX_EPOCHS} epochs \
                 (best objective {:.6}, max KKT residual {:.3e}, {} steps)",
                diag.objective_history.last().copied().unwrap_or(0.0),
                diag.max_kkt_residual,
                diag.steps
            )));
        }
        changed = 0;
        if examine_all {
            for i in 0..n {
                changed += smo.examine(i, &mut rng) as usize;
            }
        } else {
            for i in 0..n {
                if smo.alpha[i] > 0.0 && smo.alpha[i] < c {
                    changed += smo.examine(i, &mut rng) as usize;
                }
            }
        }
        objective_history.push(smo.objective());
        if examine_all {
            examine_all = false;
        } else if changed == 0 {
            examine_all = true;
            changed = 1; // force one more full pass before stopping
        }
        if epochs > 2 && smo.max_kkt_residual() <= KKT_TOL {
            break;
        }
    }

    let diagnostics = SvmDiagnostics {
        epochs,
        steps: smo.steps,
        objective_history,
        max_kkt_residual: smo.max_kkt_residual(),
    };

    // margins under the final threshold (u = sum - b; bias = -b)
    let bias = -smo.b;
    let mut support = Vec::new();
    let mut coef = Vec::new();
    for i in 0..n {
        if smo.alpha[i] > 0.0 {
            support.push(x.rows[i].clone());
            coef.push(smo.alpha[i] * targets[i]);
        }
    }
    let w = if params.kernel == Kernel::Linear {
        let mut dense = vec![0.0f64; x.n_cols];
        for (sv, c) in support.iter().zip(&coef) {
            for &(col, v) in sv {
                dense[col as usize] += c * v;
            }
        }
        Some(dense)
    } else {
        None
    };

    let mut model = SvmModel {
        params,
        support,
        coef,
        bias,
        w,
        n_features: x.n_cols,
        platt_a: -1.0,
        platt_b: 0.0,
    };
    let margins: Vec<f64> = x.rows.iter().map(|r| model.margin(r)).collect();
    let (a, b) = fit_logistic_link(&margins, y);
    model.platt_a = a;
    model.platt_b = b;
    Ok((model, diagnostics))
}

/// Two-parameter maximum-likelihood logistic link on training margins
/// (Newton iterations with backtracking, regularized targets).
pub fn fit_logistic_link(margins: &[f64], y: &[bool]) -> (f64, f64) {
    let prior1 = y.iter().filter(|l| **l).count() as f64;
    let prior0 = y.len() as f64 - prior1;
    let hi = (prior1 + 1.0) / (prior1 + 2.0);
    let lo = 1.0 / (prior0 + 2.0);
    let targets: Vec<f64> = y.iter().map(|&l| if l { hi } else { lo }).collect();

    let mut a = 0.0f64;
    let mut b = ((prior0 + 1.0) / (prior1 + 1.0)).ln();
    let fval = |a: f64, b: f64| -> f64 {
        margins
            .iter()
            .zip(&targets)
            .map(|(&f, &t)| {
                let z = a * f + b;
                if z >= 0.0 {
                    t * z + (1.0 + (-z).exp()).ln()
                } else {
                    (t - 1.0) * z + (1.0 + z.exp()).ln()
                }
            })
            .sum()
    };
    let mut current = fval(a, b);
    for _ in 0..100 {
        // gradient and Hessian
        let (mut g1, mut g2, mut h11, mut h22, mut h21) = (0.0, 0.0, 1e-12, 1e-12, 0.0);
        for (&f, &t) in margins.iter().zip(&targets) {
            let z = a * f + b;
            let p = if z >= 0.0 {
                (-z).exp() / (1.0 + (-z).exp())
            } else {
                1.0 / (1.0 + z.exp())
            };
            let d1 = t - p;
            let d2 = p * (1.0 - p);
            g1 += f * d1;
            g2 += d1;
            h11 += f * f * d2;
            h22 += d2;
            h21 += f * d2;
        }
        if g1.abs() < 1e-10 && g2.abs() < 1e-10 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * g1 - h21 * g2) / det;
        let db = -(-h21 * g1 + h11 * g2) / det;
        let gd = g1 * da + g2 * db;
        let mut step = 1.0f64;
        loop {
            let (na, nb) = (a + step * da, b + step * db);
            let next = fval(na, nb);
            if next < current + 1e-4 * step * gd {
                a = na;
                b = nb;
                current = next;
                break;
            }
            step /= 2.0;
            if step < 1e-10 {
                return (a, b);
            }
        }
    }
    (a, b)
}
