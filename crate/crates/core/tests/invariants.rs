//! Property tests for weighting, preprocessing and assembly invariants.

use proptest::prelude::*;

use signaal_core::textprep::{PrepConfig, Preprocessor, TermSequence};
use signaal_core::vectorize::{
    assemble, build_vocabulary, weigh, AssembleInput, TopK, WeightScheme,
};

fn docs_strategy() -> impl Strategy<Value = Vec<Vec<String>>> {
    // 2..8 documents over a small shared alphabet
    prop::collection::vec(
        prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e"]), 0..12)
            .prop_map(|terms| terms.into_iter().map(str::to_string).collect::<Vec<_>>()),
        2..8,
    )
}

fn to_sequences(docs: &[Vec<String>]) -> Vec<TermSequence> {
    docs.iter()
        .map(|terms| TermSequence {
            terms: terms.clone(),
        })
        .collect()
}

proptest! {
    #[test]
    fn weight_ranges_hold(docs in docs_strategy(), labels in prop::collection::vec(any::<bool>(), 8)) {
        let sequences = to_sequences(&docs);
        let labels: Vec<bool> = labels.into_iter().take(sequences.len()).collect();
        prop_assume!(labels.len() == sequences.len());
        prop_assume!(labels.iter().any(|l| *l) && labels.iter().any(|l| !*l));
        let vocab = build_vocabulary(&sequences, &labels, TopK::All, 0);
        for seq in &sequences {
            for (_, w) in weigh(seq, &vocab, WeightScheme::Boolean).unwrap() {
                prop_assert_eq!(w, 1.0);
            }
            for (_, w) in weigh(seq, &vocab, WeightScheme::Count).unwrap() {
                prop_assert!(w >= 1.0 && w.fract() == 0.0);
            }
            for (_, w) in weigh(seq, &vocab, WeightScheme::TfidfAugmented).unwrap() {
                prop_assert!(w >= 0.0);
            }
            for (_, w) in weigh(seq, &vocab, WeightScheme::bm25()).unwrap() {
                prop_assert!(w >= 0.0);
            }
            // delta sign tracks the class-df imbalance of the term
            for (col, w) in weigh(seq, &vocab, WeightScheme::delta_tfidf()).unwrap() {
                let c = col as usize;
                let lhs = (vocab.df_neg[c] as f64 + 1.0) * vocab.n_pos as f64;
                let rhs = (vocab.df_pos[c] as f64 + 1.0) * vocab.n_neg as f64;
                prop_assert_eq!(w > 0.0, lhs > rhs);
                prop_assert_eq!(w < 0.0, lhs < rhs);
            }
        }
    }

    #[test]
    fn boolean_vector_is_invariant_under_count_scaling(
        doc in prop::collection::vec(prop::sample::select(vec!["a", "b", "c"]), 1..10),
        scale in 2usize..5,
    ) {
        let base: Vec<String> = doc.iter().map(|s| s.to_string()).collect();
        let mut scaled = Vec::new();
        for term in &base {
            for _ in 0..scale {
                scaled.push(term.clone());
            }
        }
        let sequences = vec![
            TermSequence { terms: base },
            TermSequence { terms: vec!["a".into()] },
        ];
        let labels = vec![true, false];
        let vocab = build_vocabulary(&sequences, &labels, TopK::All, 0);
        let seq_scaled = TermSequence { terms: scaled };
        let a = weigh(&sequences[0], &vocab, WeightScheme::Boolean).unwrap();
        let b = weigh(&seq_scaled, &vocab, WeightScheme::Boolean).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn assemble_is_permutation_stable(docs in docs_strategy(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let sequences = to_sequences(&docs);
        let labels: Vec<bool> = (0..sequences.len()).map(|i| i % 2 == 0).collect();
        let vocab = build_vocabulary(&sequences, &labels, TopK::All, 0);
        let vectors: Vec<_> = sequences
            .iter()
            .map(|s| weigh(s, &vocab, WeightScheme::Count).unwrap())
            .collect();
        let base = assemble(AssembleInput {
            vocab: &vocab,
            term_vectors: &vectors,
            selected_terms: None,
            meta: None,
            structured: None,
        });
        let mut order: Vec<usize> = (0..sequences.len()).collect();
        order.shuffle(&mut rand_chacha::ChaCha12Rng::seed_from_u64(seed));
        let permuted_vectors: Vec<_> = order.iter().map(|&i| vectors[i].clone()).collect();
        let permuted = assemble(AssembleInput {
            vocab: &vocab,
            term_vectors: &permuted_vectors,
            selected_terms: None,
            meta: None,
            structured: None,
        });
        for (new_row, &old_index) in permuted.rows.iter().zip(&order) {
            prop_assert_eq!(new_row, &base.rows[old_index]);
        }
    }

    #[test]
    fn dropping_a_never_matching_rule_changes_nothing(
        words in prop::collection::vec(prop::sample::select(vec!["kind", "groeit", "mooi", "samen", "thuis"]), 1..12),
    ) {
        let text = words.join(" ");
        let with_rule = {
            let mut config = PrepConfig::default();
            config.rules.push(signaal_core::textprep::ReplacementRule::new(
                r"\bnooitvoorkomendwoord\b",
                "vervanging",
            ));
            Preprocessor::new(config).unwrap().preprocess(&text)
        };
        let without_rule = Preprocessor::new(PrepConfig::default()).unwrap().preprocess(&text);
        prop_assert_eq!(with_rule, without_rule);
    }
}
