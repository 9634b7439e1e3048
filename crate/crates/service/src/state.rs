//! Service state: active model registry, journals, retraining.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use signaal_core::corpus::{ingest_corpus, read_label_overrides, CorpusPaths};
use signaal_core::pipeline::{
    fit_pipeline, prepare_child, prepare_corpus, PipelineConfig, PipelineModel, PreparedCorpus,
    TrainingExtras,
};
use signaal_core::textprep::{PrepConfig, Preprocessor};
use signaal_core::{Error, Result};

use crate::journal::Journal;
use crate::payload::{FeedbackPayload, PredictPayload, PredictResponse};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    /// Base training corpus in the standard file layout.
    pub data_dir: PathBuf,
    /// Pipeline config (TOML) used for initial training and retraining.
    pub pipeline_config: PathBuf,
    /// Journals and model artifacts live here.
    pub journal_dir: PathBuf,
    /// Overrides the model's flag threshold when set.
    pub threshold: Option<f64>,
    /// Retraining period in seconds; 0 disables the scheduler.
    pub retrain_interval_secs: u64,
    pub bearer_token: Option<String>,
    /// Acknowledge a fronting TLS terminator for non-loopback binds.
    pub allow_remote_plaintext: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub id: String,
    pub received_at: DateTime<Utc>,
    pub input: PredictPayload,
    pub score: f64,
    pub flagged: bool,
    pub model_version: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeedbackRecord {
    pub prediction_id: String,
    pub confirmed_label: bool,
    pub note: Option<String>,
    pub received_at: DateTime<Utc>,
}

/// The model plus its compiled preprocessor, swapped as one unit.
pub struct ActiveModel {
    pub model: PipelineModel,
    pub prep: Preprocessor,
}

impl ActiveModel {
    fn from_model(model: PipelineModel) -> Result<ActiveModel> {
        let prep = model.preprocessor()?;
        Ok(ActiveModel { model, prep })
    }
}

pub struct ServiceState {
    pub config: ServiceConfig,
    pipeline_config: PipelineConfig,
    prep_config: PrepConfig,
    base: PreparedCorpus,
    active: RwLock<Arc<ActiveModel>>,
    predictions: Mutex<BTreeMap<String, PredictionRecord>>,
    feedback: Mutex<BTreeMap<String, FeedbackRecord>>,
    prediction_journal: Mutex<Journal>,
    feedback_journal: Mutex<Journal>,
    retraining: AtomicBool,
}

impl ServiceState {
    /// Load the base corpus, replay journals and activate the newest
    /// persisted model (training version 1 when none exists yet).
    pub fn initialize(config: ServiceConfig) -> Result<Arc<ServiceState>> {
        let pipeline_config = PipelineConfig::load(&config.pipeline_config)?;
        let prep_config = pipeline_config
            .prep
            .build(config.pipeline_config.parent())?;
        let prep = Preprocessor::new(prep_config.clone())?;

        let paths = CorpusPaths::in_dir(&config.data_dir);
        let overrides = match &paths.label_overrides {
            Some(path) => Some(read_label_overrides(path)?),
            None => None,
        };
        let (corpus, report) = ingest_corpus(&paths)?;
        if !report.messages.is_empty() {
            tracing::warn!(
                "ingest warnings: {} duplicates, {} skeletons, {} bmi fixes",
                report.duplicate_conclusions,
                report.skeleton_children,
                report.bmi_recomputed
            );
        }
        let base = prepare_corpus(&corpus, &prep, overrides.as_ref());

        // replay journals; feedback with a dangling prediction id is dropped
        let predictions_path = config.journal_dir.join("predictions.jsonl");
        let feedback_path = config.journal_dir.join("feedback.jsonl");
        let (replayed_predictions, torn_p) =
            Journal::replay::<PredictionRecord>(&predictions_path)?;
        let (replayed_feedback, torn_f) = Journal::replay::<FeedbackRecord>(&feedback_path)?;
        if torn_p + torn_f > 0 {
            tracing::warn!("journal replay skipped {} corrupt lines", torn_p + torn_f);
        }
        let mut predictions = BTreeMap::new();
        for record in replayed_predictions {
            predictions.insert(record.id.clone(), record);
        }
        let mut feedback = BTreeMap::new();
        let mut dangling = 0usize;
        for record in replayed_feedback {
            if predictions.contains_key(&record.prediction_id) {
                feedback.insert(record.prediction_id.clone(), record);
            } else {
                dangling += 1;
            }
        }
        if dangling > 0 {
            tracing::warn!("dropped {dangling} feedback rows with dangling prediction ids");
        }

        let models_dir = config.journal_dir.join("models");
        std::fs::create_dir_all(&models_dir)?;
        let newest = newest_model(&models_dir)?;
        let active = match newest {
            Some(path) => ActiveModel::from_model(PipelineModel::load(&path)?)?,
            None => {
                tracing::info!("no persisted model; training version 1");
                let model = fit_pipeline(&base, &prep_config, &pipeline_config, None, 1)?;
                model.save(&models_dir.join("model_v1.json"))?;
                ActiveModel::from_model(model)?
            }
        };

        Ok(Arc::new(ServiceState {
            config,
            pipeline_config,
            prep_config,
            base,
            active: RwLock::new(Arc::new(active)),
            predictions: Mutex::new(predictions),
            feedback: Mutex::new(feedback),
            prediction_journal: Mutex::new(Journal::open(&predictions_path)?),
            feedback_journal: Mutex::new(Journal::open(&feedback_path)?),
            retraining: AtomicBool::new(false),
        }))
    }

    pub fn active(&self) -> Arc<ActiveModel> {
        self.active.read().expect("registry lock").clone()
    }

    pub fn active_version(&self) -> u64 {
        self.active().model.model_version
    }

    pub fn flag_threshold(&self, model: &PipelineModel) -> f64 {
        self.config.threshold.unwrap_or(model.threshold)
    }

    /// Score a payload and persist the record before returning.
    pub fn predict(&self, payload: PredictPayload) -> Result<PredictResponse> {
        let active = self.active();
        let id = uuid::Uuid::new_v4().to_string();
        let prepared = prepare_child(payload.to_child(&id), &active.prep);
        let score = active.model.score_prepared(&prepared)?;
        let flagged = score >= self.flag_threshold(&active.model);
        let record = PredictionRecord {
            id: id.clone(),
            received_at: Utc::now(),
            input: payload,
            score,
            flagged,
            model_version: active.model.model_version,
        };
        {
            let mut journal = self.prediction_journal.lock().expect("journal lock");
            journal.append(&record)?;
        }
        self.predictions
            .lock()
            .expect("prediction map lock")
            .insert(id.clone(), record);
        Ok(PredictResponse {
            prediction_id: id,
            score,
            flagged,
            model_version: active.model.model_version,
        })
    }

    pub fn prediction(&self, id: &str) -> Option<PredictionRecord> {
        self.predictions
            .lock()
            .expect("prediction map lock")
            .get(id)
            .cloned()
    }

    /// Attach feedback; repeated feedback for one prediction overwrites
    /// with the latest judgment.
    pub fn feedback(&self, payload: FeedbackPayload) -> Result<FeedbackRecord> {
        if self.prediction(&payload.prediction_id).is_none() {
            return Err(Error::InvalidArgument(format!(
                "unknown prediction id '{}'",
                payload.prediction_id
            )));
        }
        let record = FeedbackRecord {
            prediction_id: payload.prediction_id.clone(),
            confirmed_label: payload.confirmed_label,
            note: payload.note,
            received_at: Utc::now(),
        };
        {
            let mut journal = self.feedback_journal.lock().expect("journal lock");
            journal.append(&record)?;
        }
        self.feedback
            .lock()
            .expect("feedback map lock")
            .insert(record.prediction_id.clone(), record.clone());
        Ok(record)
    }

    pub fn feedback_count(&self) -> usize {
        self.feedback.lock().expect("feedback map lock").len()
    }

    /// Retrain on base corpus + feedbacked predictions (feedback label
    /// overrides the pipeline label), register the new version and swap
    /// the active pointer. Failures leave the old version active.
    pub fn retrain(&self) -> Result<u64> {
        if self.retraining.swap(true, Ordering::SeqCst) {
            return Err(Error::Training("a retrain cycle is already running".into()));
        }
        let result = self.retrain_inner();
        self.retraining.store(false, Ordering::SeqCst);
        result
    }

    fn retrain_inner(&self) -> Result<u64> {
        let old = self.active();
        let new_version = old.model.model_version + 1;

        // snapshot feedbacked predictions
        let snapshot: Vec<(PredictionRecord, bool)> = {
            let predictions = self.predictions.lock().expect("prediction map lock");
            let feedback = self.feedback.lock().expect("feedback map lock");
            feedback
                .values()
                .filter_map(|f| {
                    predictions
                        .get(&f.prediction_id)
                        .map(|p| (p.clone(), f.confirmed_label))
                })
                .collect()
        };

        let prep = Preprocessor::new(self.prep_config.clone())?;
        let mut extras = TrainingExtras {
            rows: Vec::with_capacity(snapshot.len()),
            labels: Vec::with_capacity(snapshot.len()),
        };
        for (record, label) in snapshot {
            let child = record.input.to_child(&record.id);
            extras.rows.push(prepare_child(child, &prep));
            extras.labels.push(label);
        }

        let mut config = self.pipeline_config.clone();
        config.seed = self.pipeline_config.seed + new_version;
        let model = fit_pipeline(
            &self.base,
            &self.prep_config,
            &config,
            Some(&extras),
            new_version,
        )
        .map_err(|e| {
            Error::Training(format!("retrain for version {new_version} failed: {e}"))
        })?;
        let path = self
            .config
            .journal_dir
            .join("models")
            .join(format!("model_v{new_version}.json"));
        model.save(&path)?;
        let active = ActiveModel::from_model(model)?;
        *self.active.write().expect("registry lock") = Arc::new(active);
        tracing::info!("activated model version {new_version}");
        Ok(new_version)
    }

    /// Periodic retraining; a cycle is skipped when one is running.
    pub fn spawn_scheduler(self: &Arc<Self>) {
        let interval = self.config.retrain_interval_secs;
        if interval == 0 {
            return;
        }
        let state = Arc::clone(self);
        tokio::spawn(async move {
            let mut ticker =
                tokio::time::interval(std::time::Duration::from_secs(interval.max(1)));
            ticker.set_missed_tick_behavior(tokio::time::MissedTickBehavior::Skip);
            ticker.tick().await; // first tick fires immediately; skip it
            loop {
                ticker.tick().await;
                let state = Arc::clone(&state);
                let outcome =
                    tokio::task::spawn_blocking(move || state.retrain()).await;
                match outcome {
                    Ok(Ok(version)) => tracing::info!("scheduled retrain -> v{version}"),
                    Ok(Err(e)) => tracing::warn!("scheduled retrain skipped: {e}"),
                    Err(e) => tracing::error!("retrain task panicked: {e}"),
                }
            }
        });
    }
}

fn newest_model(models_dir: &std::path::Path) -> Result<Option<PathBuf>> {
    let mut best: Option<(u64, PathBuf)> = None;
    for entry in std::fs::read_dir(models_dir)? {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().to_string();
        if let Some(version) = name
            .strip_prefix("model_v")
            .and_then(|s| s.strip_suffix(".json"))
            .and_then(|s| s.parse::<u64>().ok())
        {
            if best.as_ref().map_or(true, |(v, _)| version > *v) {
                best = Some((version, entry.path()));
            }
        }
    }
    Ok(best.map(|(_, path)| path))
}
