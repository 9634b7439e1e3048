//! End-to-end service behavior over real HTTP.

use std::net::SocketAddr;
use std::sync::Arc;

use signaal_core::synthgen::{generate_to_dir, GenConfig, SIGNAL_TOKENS};
use signaal_service::{router, PredictPayload, ServiceConfig, ServiceState};

fn write_pipeline_config(dir: &std::path::Path) -> std::path::PathBuf {
    let path = dir.join("pipeline.toml");
    std::fs::write(
        &path,
        r#"
seed = 11
threshold = 0.5

[model]
algorithm = "bernoulli_nb"

[model.features]
top_k = 400
weighting = "boolean"
"#,
    )
    .unwrap();
    path
}

fn test_state(root: &std::path::Path) -> Arc<ServiceState> {
    let data_dir = root.join("data");
    std::fs::create_dir_all(&data_dir).unwrap();
    let gen_config = GenConfig {
        n_children: 240,
        positive_rate: 0.25,
        registration_rate: 1.0,
        signal_strength: 0.9,
        length_boost: 1.2,
        consults_mean: 5.0,
        vocab_size: 120,
        structured_strength: 0.6,
        seed: 77,
    };
    generate_to_dir(&gen_config, &data_dir).unwrap();
    let pipeline_config = write_pipeline_config(root);
    ServiceState::initialize(ServiceConfig {
        data_dir,
        pipeline_config,
        journal_dir: root.join("journal"),
        threshold: None,
        retrain_interval_secs: 0,
        bearer_token: None,
        allow_remote_plaintext: false,
    })
    .unwrap()
}

async fn spawn_server(state: Arc<ServiceState>) -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        axum::serve(listener, router(state)).await.unwrap();
    });
    addr
}

fn signal_payload(i: usize) -> serde_json::Value {
    let tokens = format!(
        "{} {} {} zorgen om kind",
        SIGNAL_TOKENS[i % SIGNAL_TOKENS.len()],
        SIGNAL_TOKENS[(i + 1) % SIGNAL_TOKENS.len()],
        SIGNAL_TOKENS[(i + 2) % SIGNAL_TOKENS.len()],
    );
    serde_json::json!({
        "birth_date": "2010-03-01",
        "sex": "female",
        "socs": [tokens, "kind slaapt slecht en eet niet goed"],
        "consults": [
            {"location": "Noord", "action_type": "consult", "observation_date": "2010-09-01"},
            {"location": "Noord", "action_type": "consult", "observation_date": "2011-03-01"}
        ],
        "structured": [{"category": "dramatic_event", "value": "melding"}]
    })
}

#[tokio::test(flavor = "multi_thread")]
async fn predict_persists_resolvable_records() {
    let root = tempfile::tempdir().unwrap();
    let state = test_state(root.path());
    let addr = spawn_server(state.clone()).await;
    let client = reqwest::Client::new();

    let mut ids = std::collections::HashSet::new();
    for i in 0..25 {
        let response = client
            .post(format!("http://{addr}/predict"))
            .json(&signal_payload(i))
            .send()
            .await
            .unwrap();
        assert_eq!(response.status(), 200);
        let body: serde_json::Value = response.json().await.unwrap();
        let id = body["prediction_id"].as_str().unwrap().to_string();
        let score = body["score"].as_f64().unwrap();
        assert!(ids.insert(id.clone()), "duplicate id");
        // write-before-respond: the stored record matches the response
        let record = state.prediction(&id).expect("persisted record");
        assert_eq!(record.score, score);
        assert_eq!(record.model_version, body["model_version"].as_u64().unwrap());
    }

    // degenerate input is valid
    let response = client
        .post(format!("http://{addr}/predict"))
        .json(&serde_json::json!({"birth_date": "2010-01-01"}))
        .send()
        .await
        .unwrap();
    assert_eq!(response.status(), 200);
}

#[tokio::test(flavor = "multi_thread")]
async fn schema_and_identifier_violations_are_rejected() {
    let root = tempfile::tempdir().unwrap();
    let state = test_state(root.path());
    let addr = spawn_server(state).await;
    let client = reqwest::Client::new();

    // unknown field
    let response = client
        .post(format!("http://{addr}/predict"))
        .json(&serde_json::json!({"birth_date": "2010-01-01", "beroep": "x"}))
        .send()
        .await
        .unwrap();
    assert_eq!(response.status(), 400);

    // identifier field names the contract
    let response = client
        .post(format!("http://{addr}/predict"))
        .json(&serde_json::json!({"birth_date": "2010-01-01", "bsn": "123456"}))
        .send()
        .await
        .unwrap();
    assert_eq!(response.status(), 400);
    let body: serde_json::Value = response.json().await.unwrap();
    assert!(body["error"].as_str().unwrap().contains("de-identified"));

    // malformed nested field carries its path
    let response = client
        .post(format!("http://{addr}/predict"))
        .json(&serde_json::json!({
            "birth_date": "2010-01-01",
            "consults": [{"location": "Noord", "observation_date": "gisteren"}],
            "socs": ["x"]
        }))
        .send()
        .await
        .unwrap();
    assert_eq!(response.status(), 400);
    let body: serde_json::Value = response.json().await.unwrap();
    assert!(body["error"].as_str().unwrap().contains("consults"));
}

#[tokio::test(flavor = "multi_thread")]
async fn feedback_references_and_overwrites() {
    let root = tempfile::tempdir().unwrap();
    let state = test_state(root.path());
    let addr = spawn_server(state.clone()).await;
    let client = reqwest::Client::new();

    let response = client
        .post(format!("http://{addr}/predict"))
        .json(&signal_payload(0))
        .send()
        .await
        .unwrap();
    let id = response.json::<serde_json::Value>().await.unwrap()["prediction_id"]
        .as_str()
        .unwrap()
        .to_string();

    // unknown id -> 404
    let response = client
        .post(format!("http://{addr}/feedback"))
        .json(&serde_json::json!({"prediction_id": "nee", "confirmed_label": true}))
        .send()
        .await
        .unwrap();
    assert_eq!(response.status(), 404);

    // valid feedback acks with a timestamp
    let response = client
        .post(format!("http://{addr}/feedback"))
        .json(&serde_json::json!({"prediction_id": id, "confirmed_label": true}))
        .send()
        .await
        .unwrap();
    assert_eq!(response.status(), 200);
    let body: serde_json::Value = response.json().await.unwrap();
    assert!(body["received_at"].as_str().is_some());

    // repeated feedback flips to the latest label
    let response = client
        .post(format!("http://{addr}/feedback"))
        .json(&serde_json::json!({"prediction_id": id, "confirmed_label": false, "note": "geen zorg"}))
        .send()
        .await
        .unwrap();
    assert_eq!(response.status(), 200);
    assert_eq!(state.feedback_count(), 1);
}

#[tokio::test(flavor = "multi_thread")]
async fn healthz_reports_version_and_retrain_swaps_atomically() {
    let root = tempfile::tempdir().unwrap();
    let state = test_state(root.path());
    let addr = spawn_server(state.clone()).await;
    let client = reqwest::Client::new();

    let body: serde_json::Value = client
        .get(format!("http://{addr}/healthz"))
        .send()
        .await
        .unwrap()
        .json()
        .await
        .unwrap();
    assert_eq!(body["active_version"], 1);

    // hammer predict from 8 clients while retraining
    let mut workers = Vec::new();
    for worker in 0..8 {
        let client = client.clone();
        workers.push(tokio::spawn(async move {
            let mut versions = Vec::new();
            for i in 0..30 {
                let response = client
                    .post(format!("http://{addr}/predict"))
                    .json(&signal_payload(worker * 31 + i))
                    .send()
                    .await
                    .unwrap();
                assert_eq!(response.status(), 200);
                let body: serde_json::Value = response.json().await.unwrap();
                versions.push(body["model_version"].as_u64().unwrap());
            }
            versions
        }));
    }
    let retrain_state = state.clone();
    let retrain = tokio::task::spawn_blocking(move || retrain_state.retrain().unwrap());
    let mut observed = std::collections::BTreeSet::new();
    for worker in workers {
        for version in worker.await.unwrap() {
            observed.insert(version);
        }
    }
    let new_version = retrain.await.unwrap();
    assert_eq!(new_version, 2);
    assert!(observed.iter().all(|v| *v == 1 || *v == 2), "{observed:?}");
    assert_eq!(state.active_version(), 2);

    // overlapping retrain is refused while one runs; sequential is fine
    assert_eq!(state.retrain().unwrap(), 3);
}

#[tokio::test(flavor = "multi_thread")]
async fn scheduler_retrains_on_interval_and_skips_overlaps() {
    let root = tempfile::tempdir().unwrap();
    let data_dir = root.path().join("data");
    std::fs::create_dir_all(&data_dir).unwrap();
    generate_to_dir(
        &GenConfig {
            n_children: 160,
            positive_rate: 0.3,
            registration_rate: 1.0,
            signal_strength: 0.9,
            length_boost: 1.2,
            consults_mean: 3.0,
            vocab_size: 80,
            structured_strength: 0.5,
            seed: 5,
        },
        &data_dir,
    )
    .unwrap();
    let pipeline_config = write_pipeline_config(root.path());
    let state = ServiceState::initialize(ServiceConfig {
        data_dir,
        pipeline_config,
        journal_dir: root.path().join("journal"),
        threshold: None,
        retrain_interval_secs: 1,
        bearer_token: None,
        allow_remote_plaintext: false,
    })
    .unwrap();
    assert_eq!(state.active_version(), 1);
    state.spawn_scheduler();
    tokio::time::sleep(std::time::Duration::from_millis(2600)).await;
    let version = state.active_version();
    assert!(version >= 2, "scheduler never retrained (v{version})");

    // a second concurrent retrain is refused while one runs
    let a = state.clone();
    let b = state.clone();
    let first = std::thread::spawn(move || a.retrain());
    let second = std::thread::spawn(move || b.retrain());
    let outcomes = [first.join().unwrap(), second.join().unwrap()];
    let succeeded = outcomes.iter().filter(|o| o.is_ok()).count();
    // at least one runs; a true overlap makes the other refuse
    assert!(succeeded >= 1);
    if succeeded == 1 {
        let refusal = outcomes.iter().find(|o| o.is_err()).unwrap();
        assert!(refusal
            .as_ref()
            .unwrap_err()
            .to_string()
            .contains("already running"));
    }
}

#[test]
fn recovery_replays_journals_and_drops_dangling_feedback() {
    let root = tempfile::tempdir().unwrap();
    let journal_dir = root.path().join("journal");
    std::fs::create_dir_all(&journal_dir).unwrap();

    // one valid prediction + one feedback for it + one dangling feedback,
    // plus a torn prediction tail
    let prediction = serde_json::json!({
        "id": "p-1",
        "received_at": "2026-01-01T10:00:00Z",
        "input": {"birth_date": "2010-01-01", "socs": ["tekst"]},
        "score": 0.7,
        "flagged": true,
        "model_version": 1
    });
    std::fs::write(
        journal_dir.join("predictions.jsonl"),
        format!("{prediction}\n{{\"id\":\"p-2\",\"rec"),
    )
    .unwrap();
    std::fs::write(
        journal_dir.join("feedback.jsonl"),
        concat!(
            "{\"prediction_id\":\"p-1\",\"confirmed_label\":true,\"note\":null,\"received_at\":\"2026-01-01T11:00:00Z\"}\n",
            "{\"prediction_id\":\"p-404\",\"confirmed_label\":false,\"note\":null,\"received_at\":\"2026-01-01T12:00:00Z\"}\n",
        ),
    )
    .unwrap();

    let data_dir = root.path().join("data");
    std::fs::create_dir_all(&data_dir).unwrap();
    let gen_config = GenConfig {
        n_children: 200,
        positive_rate: 0.25,
        registration_rate: 1.0,
        signal_strength: 0.9,
        length_boost: 1.2,
        consults_mean: 4.0,
        vocab_size: 100,
        structured_strength: 0.5,
        seed: 3,
    };
    generate_to_dir(&gen_config, &data_dir).unwrap();
    let pipeline_config = write_pipeline_config(root.path());
    let state = ServiceState::initialize(ServiceConfig {
        data_dir,
        pipeline_config,
        journal_dir,
        threshold: None,
        retrain_interval_secs: 0,
        bearer_token: None,
        allow_remote_plaintext: false,
    })
    .unwrap();

    assert!(state.prediction("p-1").is_some());
    assert!(state.prediction("p-2").is_none());
    assert_eq!(state.feedback_count(), 1);
}

#[test]
fn payload_to_child_is_deterministic() {
    let payload: PredictPayload = serde_json::from_value(signal_payload(1)).unwrap();
    let a = payload.to_child("record");
    let b = payload.to_child("record");
    assert_eq!(a, b);
    assert_eq!(a.consults.len(), 2);
}
