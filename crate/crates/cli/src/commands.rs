//! Command implementations: each maps onto the library operations and
//! writes machine-readable JSON next to a human-readable table.

use std::path::{Path, PathBuf};

use signaal_core::corpus::{
    corpus_stats, ingest_corpus, read_ground_truth, read_label_overrides, Corpus, CorpusPaths,
};
use signaal_core::explore::{
    elbow_curve_with, kmeans_with, parse_interval, screen_feature, top_terms, Distance,
    ScreenFeature, UTestResult,
};
use signaal_core::pipeline::{
    cross_validate, fit_pipeline, grid_search, prepare_corpus, GridAxes, PipelineConfig,
    PipelineModel, PreparedChild,
};
use signaal_core::synthgen::{generate_to_dir, GenConfig};
use signaal_core::textprep::{extract_abbreviation_candidates, Preprocessor, TermSequence};
use signaal_core::vectorize::{build_vocabulary, weigh, TopK, WeightScheme};
use signaal_core::{Error, Result};
use signaal_service::{PredictPayload, ServiceConfig, ServiceState};

fn write_json<T: serde::Serialize>(dir: Option<&Path>, name: &str, value: &T) -> Result<()> {
    if let Some(dir) = dir {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(name), serde_json::to_vec_pretty(value)?)?;
    }
    Ok(())
}

fn load_corpus(data: &Path) -> Result<(Corpus, Option<std::collections::BTreeMap<String, bool>>)> {
    let paths = CorpusPaths::in_dir(data);
    let overrides = match &paths.label_overrides {
        Some(path) => Some(read_label_overrides(path)?),
        None => None,
    };
    let (corpus, report) = ingest_corpus(&paths)?;
    if report.duplicate_conclusions + report.skeleton_children + report.bmi_recomputed > 0 {
        eprintln!(
            "ingest warnings: {} duplicate conclusions, {} skeleton children, {} bmi rows recomputed",
            report.duplicate_conclusions, report.skeleton_children, report.bmi_recomputed
        );
    }
    Ok((corpus, overrides))
}

fn load_truth(corpus: &Corpus, path: &Path) -> Result<Vec<bool>> {
    let map = read_ground_truth(path)?;
    corpus
        .children
        .iter()
        .map(|c| {
            map.get(&c.child_id).copied().ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "ground truth file misses person {}",
                    c.child_id
                ))
            })
        })
        .collect()
}

pub struct SynthArgs {
    pub out: PathBuf,
    pub seed: u64,
    pub children: usize,
    pub positive_rate: f64,
    pub registration_rate: f64,
    pub signal_strength: f64,
    pub length_boost: f64,
    pub consults_mean: f64,
    pub vocab_size: usize,
    pub structured_strength: f64,
}

pub fn synth(args: SynthArgs) -> Result<()> {
    let config = GenConfig {
        n_children: args.children,
        positive_rate: args.positive_rate,
        registration_rate: args.registration_rate,
        signal_strength: args.signal_strength,
        length_boost: args.length_boost,
        consults_mean: args.consults_mean,
        vocab_size: args.vocab_size,
        structured_strength: args.structured_strength,
        seed: args.seed,
    };
    let (corpus, truth) = generate_to_dir(&config, &args.out)?;
    let registered = corpus.labels(None).iter().filter(|l| **l).count();
    println!(
        "generated {} children ({} truly positive, {} registered) in {}",
        corpus.len(),
        truth.iter().filter(|t| **t).count(),
        registered,
        args.out.display()
    );
    Ok(())
}

pub fn ingest(data: &Path, abbreviations: Option<usize>, out: Option<&Path>) -> Result<()> {
    let paths = CorpusPaths::in_dir(data);
    let (corpus, report) = ingest_corpus(&paths)?;
    let labels = corpus.labels(None);
    let positives = labels.iter().filter(|l| **l).count();
    println!(
        "children: {}   consults: {}   registered positive: {}",
        corpus.len(),
        corpus.children.iter().map(|c| c.consults.len()).sum::<usize>(),
        positives
    );
    println!(
        "warnings: {} duplicate conclusions, {} skeleton children, {} bmi recomputed, {} date violations",
        report.duplicate_conclusions,
        report.skeleton_children,
        report.bmi_recomputed,
        report.date_violations
    );
    for message in report.messages.iter().take(10) {
        println!("  - {message}");
    }
    write_json(out, "ingest_report.json", &report)?;

    if let Some(top) = abbreviations {
        let texts = corpus
            .children
            .iter()
            .flat_map(|c| c.consults.iter().map(|n| n.text.as_str()));
        let found = extract_abbreviation_candidates(texts, 3);
        println!("\nabbreviation candidates (top {top}):");
        println!("candidate;frequency;context");
        for c in found.iter().take(top) {
            println!("{};{};{}", c.candidate, c.frequency, c.example_context);
        }
        write_json(out, "abbreviations.json", &found)?;
    }
    Ok(())
}

pub fn stats(data: &Path, sample_size: usize, seed: u64, out: Option<&Path>) -> Result<()> {
    let (corpus, _) = load_corpus(data)?;
    let stats = corpus_stats(&corpus, sample_size, seed);
    println!("n_children;{}", stats.n_children);
    println!("n_consults;{}", stats.n_consults);
    println!("avg_consults_per_child;{:.2}", stats.avg_consults_per_child);
    println!("avg_words_per_consult;{:.2}", stats.avg_words_per_consult);
    println!("lexical_diversity_sampled;{:.4}", stats.lexical_diversity_sampled);
    println!(
        "lexical_diversity_sampled_no_stopwords;{:.4}",
        stats.lexical_diversity_sampled_no_stopwords
    );
    write_json(out, "stats.json", &stats)?;
    Ok(())
}

pub struct ClusterArgs {
    pub data: PathBuf,
    pub k: usize,
    pub k_range: Option<String>,
    pub seed: u64,
    pub restarts: usize,
    pub top_terms: usize,
    pub vocab: usize,
    pub cosine: bool,
    pub out: Option<PathBuf>,
}

pub fn cluster(args: ClusterArgs) -> Result<()> {
    let (corpus, overrides) = load_corpus(&args.data)?;
    let prep = Preprocessor::new(Default::default())?;
    let prepared = prepare_corpus(&corpus, &prep, overrides.as_ref());
    let sequences: Vec<TermSequence> = prepared
        .children
        .iter()
        .map(|c| c.sequence.clone())
        .collect();
    let vocab = build_vocabulary(&sequences, &prepared.labels, TopK::K(args.vocab), 2);
    let vectors: Vec<_> = sequences
        .iter()
        .map(|s| weigh(s, &vocab, WeightScheme::TfidfAugmented))
        .collect::<Result<_>>()?;
    let matrix = signaal_core::vectorize::assemble(signaal_core::vectorize::AssembleInput {
        vocab: &vocab,
        term_vectors: &vectors,
        selected_terms: None,
        meta: None,
        structured: None,
    });
    let distance = if args.cosine {
        Distance::Cosine
    } else {
        Distance::Euclidean
    };

    if let Some(range) = &args.k_range {
        let (lo, hi) = range
            .split_once("..")
            .and_then(|(a, b)| Some((a.parse::<usize>().ok()?, b.parse::<usize>().ok()?)))
            .ok_or_else(|| Error::InvalidArgument(format!("bad k range '{range}'")))?;
        let ks: Vec<usize> = (lo..=hi).collect();
        let curve = elbow_curve_with(&matrix, &ks, args.seed, args.restarts, 100, distance)?;
        println!("k;sse");
        for (k, sse) in &curve {
            println!("{k};{sse:.4}");
        }
        if let Some(dir) = &args.out {
            std::fs::create_dir_all(dir)?;
            let mut csv = String::from("k;sse\n");
            for (k, sse) in &curve {
                csv.push_str(&format!("{k};{sse}\n"));
            }
            std::fs::write(dir.join("elbow.csv"), csv)?;
        }
        return Ok(());
    }

    let result = kmeans_with(&matrix, args.k, args.seed, args.restarts, 100, distance)?;
    let terms = top_terms(&result, &vocab, args.top_terms);
    let mut sizes = vec![0usize; args.k];
    for &a in &result.assignments {
        sizes[a] += 1;
    }
    println!("cluster;children;terms");
    let mut table = String::from("cluster;children;terms\n");
    for (i, cluster_terms) in terms.iter().enumerate() {
        let term_list = cluster_terms
            .iter()
            .map(|(t, _)| t.as_str())
            .collect::<Vec<_>>()
            .join(", ");
        println!("{i};{};{}", sizes[i], term_list);
        table.push_str(&format!("{i};{};{}\n", sizes[i], term_list));
    }
    println!("sse;{:.4}", result.sse);
    if let Some(dir) = &args.out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("clusters.csv"), table)?;
        write_json(Some(dir), "clusters.json", &result)?;
    }
    Ok(())
}

pub fn screen(data: &Path, feature: &str, interval: &str, out: Option<&Path>) -> Result<()> {
    let (corpus, _) = load_corpus(data)?;
    let feature = ScreenFeature::parse(feature)?;
    let intervals: Vec<(&str, usize)> = if interval == "all" {
        vec![("0-1", 0), ("1-2", 1), ("2-3", 2), ("3-4", 3)]
    } else {
        vec![(interval, parse_interval(interval)?)]
    };
    let mut results: Vec<(String, UTestResult)> = Vec::new();
    println!("interval;u_statistic;p_value;n_pos;n_neg;method");
    for (name, index) in intervals {
        let result = screen_feature(&corpus, feature, index)?;
        println!(
            "{name};{:.1};{:.3e};{};{};{:?}",
            result.u_statistic, result.p_value, result.n_a, result.n_b, result.method
        );
        results.push((name.to_string(), result));
    }
    write_json(out, "screen.json", &results)?;
    Ok(())
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<PipelineConfig> {
    let mut config = PipelineConfig::load(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

pub fn train(data: &Path, config_path: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let (corpus, overrides) = load_corpus(data)?;
    let config = load_config(config_path, seed)?;
    let prep_config = config.prep.build(config_path.parent())?;
    let prep = Preprocessor::new(prep_config.clone())?;
    let prepared = prepare_corpus(&corpus, &prep, overrides.as_ref());
    let model = fit_pipeline(&prepared, &prep_config, &config, None, 1)?;
    std::fs::create_dir_all(out)?;
    let path = out.join("model.json");
    model.save(&path)?;

    // training-set fit summary for the report
    let rows: Vec<&PreparedChild> = prepared.children.iter().collect();
    let scores = model.score_rows(&rows)?;
    let report = signaal_core::eval::evaluate(&prepared.labels, &scores, model.threshold)?;
    println!(
        "trained model v{} -> {}",
        model.model_version,
        path.display()
    );
    println!(
        "full-corpus fit: auc={:.4} recall={:.4} accuracy={:.4}",
        report.auc, report.recall, report.accuracy
    );
    write_json(Some(out), "train_report.json", &report)?;
    Ok(())
}

pub fn eval(
    data: &Path,
    config_path: &Path,
    folds: usize,
    truth: Option<&Path>,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<()> {
    let (corpus, overrides) = load_corpus(data)?;
    let config = load_config(config_path, seed)?;
    let prep_config = config.prep.build(config_path.parent())?;
    let prep = Preprocessor::new(prep_config.clone())?;
    let prepared = prepare_corpus(&corpus, &prep, overrides.as_ref());
    let truth_labels = truth.map(|p| load_truth(&corpus, p)).transpose()?;
    let report = cross_validate(
        &prepared,
        &prep_config,
        &config,
        folds,
        truth_labels.as_deref(),
    )?;
    println!("metric;mean;stdev");
    println!("precision;{:.4};{:.4}", report.mean.precision, report.stdev.precision);
    println!("recall;{:.4};{:.4}", report.mean.recall, report.stdev.recall);
    println!("accuracy;{:.4};{:.4}", report.mean.accuracy, report.stdev.accuracy);
    println!(
        "balanced_accuracy;{:.4};{:.4}",
        report.mean.balanced_accuracy, report.stdev.balanced_accuracy
    );
    println!("f1;{:.4};{:.4}", report.mean.f1, report.stdev.f1);
    println!("auc;{:.4};{:.4}", report.mean.auc, report.stdev.auc);
    write_json(out, "metrics.json", &report)?;
    if let Some(dir) = out {
        // two-column ROC of the first fold for external plotting
        if let Some(first) = report.folds.first() {
            let mut csv = String::from("fpr;tpr\n");
            for (fpr, tpr) in &first.roc {
                csv.push_str(&format!("{fpr};{tpr}\n"));
            }
            std::fs::write(dir.join("roc.csv"), csv)?;
        }
    }
    Ok(())
}

pub fn grid(
    data: &Path,
    config_path: &Path,
    folds: usize,
    truth: Option<&Path>,
    seed: Option<u64>,
    out: Option<&Path>,
) -> Result<()> {
    let (corpus, overrides) = load_corpus(data)?;
    let config = load_config(config_path, seed)?;
    let prep_config = config.prep.build(config_path.parent())?;

    #[derive(serde::Deserialize, Default)]
    #[serde(default)]
    struct GridFile {
        grid: GridAxes,
    }
    let text = std::fs::read_to_string(config_path)?;
    let axes = toml::from_str::<GridFile>(&text)
        .map_err(|e| Error::Config(format!("grid axes: {e}")))?
        .grid;

    let prep = Preprocessor::new(prep_config.clone())?;
    let prepared = prepare_corpus(&corpus, &prep, overrides.as_ref());
    let truth_labels = truth.map(|p| load_truth(&corpus, p)).transpose()?;
    let rows = grid_search(
        &prepared,
        &prep_config,
        &config,
        &axes,
        folds,
        truth_labels.as_deref(),
    )?;
    println!("algorithm;weighting;selector;k;svm_c;kernel;accuracy;recall;auc;auc_stdev");
    let mut csv = String::from("algorithm;weighting;selector;k;svm_c;kernel;accuracy;recall;auc;auc_stdev\n");
    for row in &rows {
        let line = format!(
            "{};{};{};{};{};{};{:.4};{:.4};{:.4};{:.4}",
            row.algorithm,
            row.weighting,
            row.selector,
            row.k_features.map_or(String::from("all"), |k| k.to_string()),
            row.svm_c.map_or(String::from("-"), |c| c.to_string()),
            row.kernel.clone().unwrap_or_else(|| "-".into()),
            row.accuracy,
            row.recall,
            row.auc,
            row.auc_stdev
        );
        println!("{line}");
        csv.push_str(&line);
        csv.push('\n');
    }
    write_json(out, "grid.json", &rows)?;
    if let Some(dir) = out {
        std::fs::write(dir.join("grid.csv"), csv)?;
    }
    Ok(())
}

pub struct ServeArgs {
    pub data: PathBuf,
    pub config: PathBuf,
    pub journal: Option<PathBuf>,
    pub bind: Option<String>,
    pub threshold: Option<f64>,
    pub retrain_interval: Option<u64>,
    pub bearer_token: Option<String>,
    pub allow_remote_plaintext: bool,
}

/// Optional [service] table in the pipeline config file.
#[derive(Debug, Default, serde::Deserialize)]
#[serde(default)]
struct ServiceFileConfig {
    bind: Option<String>,
    journal_dir: Option<PathBuf>,
    threshold: Option<f64>,
    retrain_interval: Option<u64>,
    bearer_token: Option<String>,
    allow_remote_plaintext: Option<bool>,
}

pub fn serve(args: ServeArgs) -> Result<()> {
    #[derive(Default, serde::Deserialize)]
    #[serde(default)]
    struct FileWrapper {
        service: ServiceFileConfig,
    }
    let text = std::fs::read_to_string(&args.config)?;
    let file = toml::from_str::<FileWrapper>(&text)
        .map_err(|e| Error::Config(format!("[service] section: {e}")))?
        .service;

    let bind_raw = args
        .bind
        .or(file.bind)
        .unwrap_or_else(|| "127.0.0.1:8080".to_string());
    let bind: std::net::SocketAddr = bind_raw
        .parse()
        .map_err(|e| Error::InvalidArgument(format!("bad bind address '{bind_raw}': {e}")))?;
    let journal_dir = args
        .journal
        .or(file.journal_dir)
        .ok_or_else(|| Error::Config("no journal directory (flag, env or [service])".into()))?;

    let state = ServiceState::initialize(ServiceConfig {
        data_dir: args.data,
        pipeline_config: args.config,
        journal_dir,
        threshold: args.threshold.or(file.threshold),
        retrain_interval_secs: args
            .retrain_interval
            .or(file.retrain_interval)
            .unwrap_or(0),
        bearer_token: args.bearer_token.or(file.bearer_token),
        allow_remote_plaintext: args.allow_remote_plaintext
            || file.allow_remote_plaintext.unwrap_or(false),
    })?;
    let runtime = tokio::runtime::Runtime::new().map_err(Error::Io)?;
    runtime.block_on(signaal_service::serve(state, bind))
}

pub fn predict_file(model_path: &Path, input: &Path, threshold: Option<f64>) -> Result<()> {
    let model = PipelineModel::load(model_path)?;
    let prep = model.preprocessor()?;
    let raw = std::fs::read_to_string(input)?;
    let payload: PredictPayload = serde_json::from_str(&raw)
        .map_err(|e| Error::InvalidArgument(format!("payload: {e}")))?;
    payload
        .validate()
        .map_err(Error::InvalidArgument)?;
    let prepared =
        signaal_core::pipeline::prepare_child(payload.to_child("predict-file"), &prep);
    let score = model.score_prepared(&prepared)?;
    let threshold = threshold.unwrap_or(model.threshold);
    let output = serde_json::json!({
        "score": score,
        "flagged": score >= threshold,
        "model_version": model.model_version,
    });
    println!("{}", serde_json::to_string_pretty(&output)?);
    Ok(())
}
