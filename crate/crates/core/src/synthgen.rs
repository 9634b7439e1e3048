//! Deterministic synthetic corpora in the standard file layout.
//!
//! Children, consult notes, measurements and structured observations are
//! sampled from a template grammar over a generated lexicon. True
//! positives carry planted signal: reserved tokens in their notes (never
//! produced by the normal lexicon), longer notes, shifted structured-data
//! rates. Only a configurable fraction of true positives receives a
//! registration (a finding row), mirroring one-sided label noise; the
//! full truth goes to a separate ground-truth file the pipeline never
//! reads.

use std::path::Path;

use chrono::NaiveDate;
use rand::seq::{index::sample, IndexedRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::corpus::{
    export_corpus, BmiMeasurement, ChildRecord, ConsultNote, Corpus, FamilyRelation,
    ObservationValue, Sex, StructuredCategory, StructuredObservation, ZslAction, ZslFinding,
    FILE_GROUND_TRUTH,
};
use crate::{Error, Result};

/// Reserved tokens planted into positive children's notes. Disjoint from
/// the generated lexicon (content words never contain 'x') and stable
/// under stemming.
pub const SIGNAL_TOKENS: [&str; 25] = [
    "xbalx", "xdemx", "xfirx", "xgolx", "xhupx", "xjasx", "xkelx", "xlomx", "xmirx", "xnopx",
    "xpalx", "xremx", "xsilx", "xtogx", "xvulx", "xwepx", "xzonx", "xbrilx", "xdampx", "xflonx",
    "xgrepx", "xklemx", "xplofx", "xstagx", "xtrosx",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub n_children: usize,
    /// Fraction of children that are truly positive.
    pub positive_rate: f64,
    /// Fraction of true positives that carry a finding registration.
    pub registration_rate: f64,
    /// Per-consult probability of planted signal tokens for positives.
    pub signal_strength: f64,
    /// Note-length multiplier for positives (>= 1).
    pub length_boost: f64,
    pub consults_mean: f64,
    /// Content lexicon size.
    pub vocab_size: usize,
    /// Shift strength of structured observations for positives.
    pub structured_strength: f64,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            n_children: 13_170,
            positive_rate: 0.05,
            registration_rate: 0.30,
            signal_strength: 0.5,
            length_boost: 1.3,
            consults_mean: 14.8,
            vocab_size: 600,
            structured_strength: 0.5,
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("positive_rate", self.positive_rate),
            ("registration_rate", self.registration_rate),
            ("signal_strength", self.signal_strength),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must be in [0, 1]")));
            }
        }
        if self.length_boost < 1.0 {
            return Err(Error::Config("length_boost must be >= 1".into()));
        }
        if self.n_children == 0 {
            return Err(Error::Config("n_children must be positive".into()));
        }
        Ok(())
    }
}

const ONSETS: [&str; 20] = [
    "b", "d", "f", "g", "h", "j", "k", "l", "m", "n", "p", "r", "s", "t", "v", "w", "z", "br",
    "kl", "st",
];
const NUCLEI: [&str; 12] = [
    "a", "e", "i", "o", "u", "aa", "ee", "oo", "oe", "ei", "ui", "ie",
];
const CODAS: [&str; 10] = ["", "k", "l", "m", "n", "p", "r", "s", "t", "ng"];

const FUNCTION_WORDS: [&str; 18] = [
    "de", "het", "een", "en", "is", "met", "op", "in", "aan", "bij", "naar", "ook", "nog", "dat",
    "wat", "er", "als", "maar",
];
const DOMAIN_WORDS: [&str; 16] = [
    "kind", "groeit", "goed", "moeder", "papa", "slaapt", "eet", "drinkt", "speelt",
    "vaccinatie", "consult", "ontwikkeling", "gezond", "vrolijk", "rustig", "contact",
];
const ACRONYMS: [&str; 4] = ["zh", "kdv", "bv", "kv"];
const LOCATIONS: [&str; 12] = [
    "Noord", "Zuid", "Oost", "West", "Centrum", "Nieuw-West", "Zuidoost", "Westpoort",
    "Ommelanden", "Haven", "Rivierenbuurt", "Landelijk",
];
const ACTION_TYPES: [&str; 4] = ["consult", "huisbezoek", "telefonisch contact", "onderzoek"];
const COUNTRIES: [&str; 8] = ["NL", "MA", "TR", "SR", "PL", "DE", "SY", "GH"];
const RELATION_TYPES: [&str; 4] = ["moeder", "vader", "broer", "zus"];
const FINDING_TYPES: [&str; 3] = ["zorgmelding", "observatie", "signaal"];

/// Count-style structured categories with (base rate, positive boost).
fn count_category_rates() -> Vec<(StructuredCategory, f64, f64)> {
    use StructuredCategory::*;
    vec![
        (DramaticEvent, 0.05, 8.0),
        (MothersHealth, 0.10, 5.0),
        (BurdenVsCarryingFamily, 0.08, 6.0),
        (BurdenVsCarryingChild, 0.08, 4.0),
        (BurdenVsCarryingEnvironment, 0.06, 5.0),
        (BurdenVsCarryingParents, 0.08, 6.0),
        (DentalCare, 0.15, 1.5),
        (Overweight, 0.12, 1.5),
        (GeneralCareReceived, 0.40, 3.0),
        (GgdCareReceived, 0.25, 4.0),
        (SamenStartenWeging, 0.10, 6.0),
        (TriplePContact, 0.06, 5.0),
        (SkinIssues, 0.15, 1.2),
        (PermanentCondition, 0.08, 1.5),
        (GeneralHealth, 0.30, 2.0),
        (WomensGenitalia, 0.02, 4.0),
        (MicturitionDefecation, 0.10, 1.5),
    ]
}

fn build_lexicon(size: usize, rng: &mut ChaCha12Rng) -> Vec<String> {
    let mut seen = std::collections::BTreeSet::new();
    let mut words = Vec::with_capacity(size);
    while words.len() < size {
        let syllables = rng.random_range(2..=3);
        let mut word = String::new();
        for _ in 0..syllables {
            word.push_str(ONSETS.choose(rng).unwrap());
            word.push_str(NUCLEI.choose(rng).unwrap());
            word.push_str(CODAS.choose(rng).unwrap());
        }
        if seen.insert(word.clone()) {
            words.push(word);
        }
    }
    words
}

/// Zipf-flavored index: quadratic skew toward the head of the lexicon.
fn skewed_index(len: usize, rng: &mut ChaCha12Rng) -> usize {
    let u: f64 = rng.random();
    ((u * u) * len as f64) as usize % len
}

struct NoteGrammar {
    lexicon: Vec<String>,
}

impl NoteGrammar {
    fn note(
        &self,
        rng: &mut ChaCha12Rng,
        target_words: usize,
        signal: bool,
        signal_strength: f64,
    ) -> String {
        let mut words: Vec<String> = Vec::with_capacity(target_words + 4);
        while words.len() < target_words {
            let roll: f64 = rng.random();
            if roll < 0.38 {
                words.push(FUNCTION_WORDS.choose(rng).unwrap().to_string());
            } else if roll < 0.50 {
                words.push(DOMAIN_WORDS.choose(rng).unwrap().to_string());
            } else if roll < 0.53 {
                words.push(ACRONYMS.choose(rng).unwrap().to_string());
            } else if roll < 0.56 {
                // trivial noise the cleanup stages must strip
                match rng.random_range(0..3) {
                    0 => words.push(format!("{}ml", rng.random_range(60..240))),
                    1 => words.push(format!(
                        "om {}:{:02}",
                        rng.random_range(8..17),
                        rng.random_range(0..60)
                    )),
                    _ => words.push(format!(
                        "{:02}-{:02}-201{}",
                        rng.random_range(1..29),
                        rng.random_range(1..13),
                        rng.random_range(0..5)
                    )),
                }
            } else if roll < 0.60 {
                words.push(if rng.random_bool(0.5) { "niet" } else { "geen" }.to_string());
                words.push(self.lexicon[skewed_index(self.lexicon.len(), rng)].clone());
            } else {
                words.push(self.lexicon[skewed_index(self.lexicon.len(), rng)].clone());
            }
        }
        if signal && rng.random_bool(signal_strength) {
            let count = rng.random_range(1..=3);
            for _ in 0..count {
                let at = rng.random_range(0..=words.len());
                words.insert(at, SIGNAL_TOKENS.choose(rng).unwrap().to_string());
            }
        }
        words.join(" ")
    }
}

/// The content lexicon a config generates (head of the list is the most
/// frequently sampled). Useful for building realistic probe payloads.
pub fn lexicon_for(config: &GenConfig) -> Vec<String> {
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    build_lexicon(config.vocab_size, &mut rng)
}

/// Generate the corpus and its ground truth in memory.
pub fn generate(config: &GenConfig) -> Result<(Corpus, Vec<bool>)> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let grammar = NoteGrammar {
        lexicon: build_lexicon(config.vocab_size, &mut rng),
    };

    let n = config.n_children;
    let n_pos = ((n as f64) * config.positive_rate).round() as usize;
    let n_reg = (((n as f64) * config.positive_rate * config.registration_rate).round() as usize)
        .min(n_pos);

    let mut truth = vec![false; n];
    let positive_picks = sample(&mut rng, n, n_pos);
    let positives: Vec<usize> = positive_picks.into_iter().collect();
    for &i in &positives {
        truth[i] = true;
    }
    let registered: std::collections::BTreeSet<usize> =
        positives.iter().copied().take(n_reg).collect();

    let year_start = NaiveDate::from_ymd_opt(2010, 1, 1).expect("valid date");
    let note_words = Normal::new(38.0, 12.0).expect("normal params");
    let consult_counts = Poisson::new(config.consults_mean).expect("poisson params");

    let mut children = Vec::with_capacity(n);
    for child_idx in 0..n {
        let positive = truth[child_idx];
        let person = (child_idx + 1).to_string();
        let birth_date = year_start + chrono::Days::new(rng.random_range(0..365));
        let mut child = ChildRecord::new(&person, birth_date);
        child.sex = if rng.random_bool(0.51) {
            Sex::Male
        } else {
            Sex::Female
        };

        // home location; positives skew toward the first quarter
        let home = if positive && rng.random_bool(config.structured_strength) {
            rng.random_range(0..3)
        } else {
            rng.random_range(0..LOCATIONS.len())
        };

        // consults on unique days
        let mut count = consult_counts.sample(&mut rng) as usize;
        if positive {
            count = ((count as f64) * (1.0 + 0.15 * config.structured_strength)).round() as usize;
        }
        count = count.clamp(1, 60);
        let mut days = std::collections::BTreeSet::new();
        while days.len() < count {
            days.insert(rng.random_range(14u64..1460));
        }
        for day in days {
            let date = birth_date + chrono::Days::new(day);
            let base: f64 = note_words.sample(&mut rng);
            let base = base.clamp(6.0, 120.0);
            let target = if positive {
                (base * config.length_boost) as usize
            } else {
                base as usize
            };
            let location = if rng.random_bool(0.8) {
                LOCATIONS[home]
            } else {
                LOCATIONS[rng.random_range(0..LOCATIONS.len())]
            };
            child.consults.push(ConsultNote {
                location: location.to_string(),
                action_type: ACTION_TYPES.choose(&mut rng).unwrap().to_string(),
                observation_date: date,
                text: grammar.note(&mut rng, target, positive, config.signal_strength),
            });
        }

        // growth series
        for i in 0..child.consults.len() {
            if !rng.random_bool(0.8) {
                continue;
            }
            let date = child.consults[i].observation_date;
            let age = child.age_at(date);
            let length_cm = 50.0 + 20.0 * age.min(4.0) + rng.random_range(-2.0..2.0);
            let weight_kg =
                3.5 + 3.0 * age.min(4.0) + rng.random_range(-0.6..0.6) + length_cm * 0.02;
            let bmi = (weight_kg / (length_cm / 100.0).powi(2) * 100.0).round() / 100.0;
            child.bmi_series.push(BmiMeasurement {
                date,
                age_years: (age * 100.0).round() / 100.0,
                length_cm: (length_cm * 10.0).round() / 10.0,
                weight_kg: (weight_kg * 100.0).round() / 100.0,
                bmi,
            });
        }
        // keep bmi consistent after rounding length/weight
        for m in &mut child.bmi_series {
            m.bmi = (m.computed_bmi() * 100.0).round() / 100.0;
        }

        // relations; mother age carries part of the structured signal
        let mother_age_years: f64 = if positive && rng.random_bool(config.structured_strength) {
            rng.random_range(18.0..27.0)
        } else {
            rng.random_range(24.0..40.0)
        };
        let mother_birth = birth_date - chrono::Days::new((mother_age_years * 365.25) as u64);
        child.relations.push(FamilyRelation {
            relation_type: "moeder".into(),
            relative_birth_date: mother_birth,
        });
        if rng.random_bool(0.9) {
            child.relations.push(FamilyRelation {
                relation_type: "vader".into(),
                relative_birth_date: birth_date
                    - chrono::Days::new((rng.random_range(20.0..45.0) * 365.25) as u64),
            });
        }
        for _ in 0..rng.random_range(0..3) {
            child.relations.push(FamilyRelation {
                relation_type: RELATION_TYPES[rng.random_range(2..4)].into(),
                relative_birth_date: birth_date
                    + chrono::Days::new(rng.random_range(30..2000)),
            });
        }

        // structured observations
        child.structured_observations.push(StructuredObservation::new(
            StructuredCategory::MotherAgeAtBirth,
            ObservationValue::Number((mother_age_years * 10.0).round() / 10.0),
        ));
        for (category, country_rng) in [
            (StructuredCategory::BirthCountryChild, 0.85),
            (StructuredCategory::BirthCountryMother, 0.6),
            (StructuredCategory::BirthCountryFather, 0.6),
        ] {
            let country = if rng.random_bool(country_rng) {
                "NL"
            } else {
                COUNTRIES[rng.random_range(1..COUNTRIES.len())]
            };
            child.structured_observations.push(StructuredObservation::new(
                category,
                ObservationValue::Text(country.to_string()),
            ));
        }
        for (category, base, boost) in count_category_rates() {
            let lambda = base * (1.0 + boost * config.structured_strength * f64::from(positive));
            let occurrences = Poisson::new(lambda).map(|d| d.sample(&mut rng) as usize).unwrap_or(0);
            for _ in 0..occurrences.min(6) {
                child.structured_observations.push(StructuredObservation::new(
                    category.clone(),
                    ObservationValue::Text("melding".into()),
                ));
            }
        }

        child.attention = rng.random_bool(if positive { 0.55 } else { 0.15 });

        // registration: findings only for the registered subset
        if registered.contains(&child_idx) {
            let n_findings = rng.random_range(1..=3);
            for _ in 0..n_findings {
                let day = rng.random_range(100u64..1460);
                child.zsl_findings.push(ZslFinding {
                    finding_date: birth_date + chrono::Days::new(day),
                    finding_type: FINDING_TYPES.choose(&mut rng).unwrap().to_string(),
                    finding: format!(
                        "zorg over {}",
                        grammar.lexicon[skewed_index(grammar.lexicon.len(), &mut rng)]
                    ),
                });
            }
            child.zsl_actions.push(ZslAction {
                location: LOCATIONS[home].to_string(),
                action_type: "vervolg".into(),
                observation_type: "zorgtraject".into(),
                action: "gesprek gepland".into(),
            });
        }

        children.push(child);
    }

    let corpus = Corpus::new(children);
    let truth_sorted: Vec<bool> = corpus
        .children
        .iter()
        .map(|c| truth[c.child_id.parse::<usize>().expect("numeric id") - 1])
        .collect();
    Ok((corpus, truth_sorted))
}

/// Generate and write the file layout plus `ground_truth.csv`.
pub fn generate_to_dir(config: &GenConfig, dir: &Path) -> Result<(Corpus, Vec<bool>)> {
    let (corpus, truth) = generate(config)?;
    export_corpus(&corpus, dir)?;
    let mut out = String::from("Person number;True label\n");
    for (child, &label) in corpus.children.iter().zip(&truth) {
        out.push_str(&child.child_id);
        out.push(';');
        out.push_str(if label { "1" } else { "0" });
        out.push('\n');
    }
    std::fs::write(dir.join(FILE_GROUND_TRUTH), out)?;
    Ok((corpus, truth))
}
