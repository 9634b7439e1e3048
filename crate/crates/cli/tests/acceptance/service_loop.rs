//! Criterion 8: the service loop. 100 predictions persist resolvable
//! records; corrective feedback plus a retrain strictly reduces the false
//! positives on the fed-back payloads; concurrent clients during the swap
//! observe only versions {v, v+1}.

use std::net::SocketAddr;
use std::sync::Arc;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use signaal_core::synthgen::{generate_to_dir, lexicon_for, GenConfig, SIGNAL_TOKENS};
use signaal_service::{serve_listener, ServiceConfig, ServiceState};

/// Markers never produced by the generator lexicon; they enter the
/// vocabulary only through feedback rows at retrain time.
const BENIGN_MARKERS: [&str; 8] = [
    "qbenaq", "qbenbq", "qbencq", "qbendq", "qbeneq", "qbenfq", "qbengq", "qbenhq",
];

fn base_config() -> GenConfig {
    GenConfig {
        n_children: 4000,
        positive_rate: 0.18,
        registration_rate: 1.0,
        signal_strength: 0.9,
        length_boost: 1.2,
        consults_mean: 5.0,
        vocab_size: 250,
        structured_strength: 0.6,
        seed: 808,
    }
}

/// A realistic five-consult file: common lexicon words plus planted
/// signal tokens, so the base model treats it like a positive child.
fn note(lexicon: &[String], rng: &mut ChaCha12Rng, signal: usize, markers: bool) -> String {
    let mut words: Vec<String> = Vec::new();
    for _ in 0..30 {
        let head = rng.random_range(0..60.min(lexicon.len()));
        words.push(lexicon[head].clone());
        if rng.random_bool(0.3) {
            words.push(["de", "het", "en", "kind", "moeder", "goed"].choose(rng).unwrap().to_string());
        }
    }
    for _ in 0..signal {
        let at = rng.random_range(0..=words.len());
        words.insert(at, SIGNAL_TOKENS.choose(rng).unwrap().to_string());
    }
    if markers {
        for marker in BENIGN_MARKERS {
            for _ in 0..3 {
                let at = rng.random_range(0..=words.len());
                words.insert(at, marker.to_string());
            }
        }
    }
    words.join(" ")
}

fn payload(lexicon: &[String], seed: u64, markers: bool) -> serde_json::Value {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut socs = Vec::new();
    let mut consults = Vec::new();
    for c in 0..5 {
        socs.push(note(lexicon, &mut rng, 2, markers));
        consults.push(serde_json::json!({
            "location": "Zuid",
            "action_type": "consult",
            "observation_date": format!("201{}-0{}-15", c / 2, (c % 2) * 4 + 1),
        }));
    }
    serde_json::json!({
        "birth_date": "2010-01-01",
        "sex": "male",
        "socs": socs,
        "consults": consults,
    })
}

async fn spawn_server(state: Arc<ServiceState>) -> SocketAddr {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move {
        serve_listener(state, listener).await.unwrap();
    });
    addr
}

#[test]
fn acceptance_08_service_loop() {
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .worker_threads(4)
        .enable_all()
        .build()
        .unwrap();
    runtime.block_on(service_loop_inner());
}

async fn service_loop_inner() {
    let root = tempfile::tempdir().unwrap();
    let data_dir = root.path().join("data");
    let gen_config = base_config();
    generate_to_dir(&gen_config, &data_dir).unwrap();
    let lexicon = lexicon_for(&gen_config);
    std::fs::write(
        root.path().join("pipeline.toml"),
        r#"
seed = 80
threshold = 0.5

[model]
algorithm = "bernoulli_nb"

[model.features]
top_k = 800
weighting = "boolean"
"#,
    )
    .unwrap();

    let state = ServiceState::initialize(ServiceConfig {
        data_dir,
        pipeline_config: root.path().join("pipeline.toml"),
        journal_dir: root.path().join("journal"),
        threshold: None,
        retrain_interval_secs: 0,
        bearer_token: None,
        allow_remote_plaintext: false,
    })
    .unwrap();
    let addr = spawn_server(state.clone()).await;
    let client = reqwest::Client::new();
    let v1 = state.active_version();

    // --- 100 predictions persist resolvable records ---
    let mut ids = std::collections::HashSet::new();
    for i in 0..100u64 {
        let response = client
            .post(format!("http://{addr}/predict"))
            .json(&payload(&lexicon, 9000 + i, false))
            .send()
            .await
            .unwrap();
        assert_eq!(response.status(), 200);
        let body: serde_json::Value = response.json().await.unwrap();
        let id = body["prediction_id"].as_str().unwrap().to_string();
        let record = state.prediction(&id).expect("record persisted before response");
        assert_eq!(record.score, body["score"].as_f64().unwrap());
        assert!(ids.insert(id));
    }
    assert_eq!(ids.len(), 100);
    let journal = std::fs::read_to_string(root.path().join("journal/predictions.jsonl")).unwrap();
    assert_eq!(journal.lines().count(), 100);

    // --- 30 corrective feedbacks strictly reduce the FP count ---
    let mut corrective_ids = Vec::new();
    let mut flagged_before = 0usize;
    for i in 0..30u64 {
        let response = client
            .post(format!("http://{addr}/predict"))
            .json(&payload(&lexicon, 500 + i, true))
            .send()
            .await
            .unwrap();
        let body: serde_json::Value = response.json().await.unwrap();
        if body["flagged"].as_bool().unwrap() {
            flagged_before += 1;
        }
        corrective_ids.push(body["prediction_id"].as_str().unwrap().to_string());
    }
    assert!(
        flagged_before >= 20,
        "expected most corrective payloads to be flagged initially, got {flagged_before}"
    );
    for id in &corrective_ids {
        let response = client
            .post(format!("http://{addr}/feedback"))
            .json(&serde_json::json!({
                "prediction_id": id,
                "confirmed_label": false,
                "note": "beoordeeld: geen zorg"
            }))
            .send()
            .await
            .unwrap();
        assert_eq!(response.status(), 200);
    }

    // --- retrain while 8 clients keep predicting; versions form {v, v+1} ---
    let retrain_done = Arc::new(std::sync::atomic::AtomicBool::new(false));
    let retrain_state = state.clone();
    let done_flag = retrain_done.clone();
    let retrain = tokio::task::spawn_blocking(move || {
        let version = retrain_state.retrain().unwrap();
        done_flag.store(true, std::sync::atomic::Ordering::SeqCst);
        version
    });
    let mut workers = Vec::new();
    for worker in 0..8u64 {
        let client = client.clone();
        let lexicon = lexicon.clone();
        let done = retrain_done.clone();
        workers.push(tokio::spawn(async move {
            let mut versions = Vec::new();
            // keep predicting until the swap has happened (plus a few
            // requests beyond it), capped to stay bounded
            for i in 0..500u64 {
                let response = client
                    .post(format!("http://{addr}/predict"))
                    .json(&payload(&lexicon, 2000 + worker * 1000 + i, false))
                    .send()
                    .await
                    .unwrap();
                assert_eq!(response.status(), 200);
                let body: serde_json::Value = response.json().await.unwrap();
                versions.push(body["model_version"].as_u64().unwrap());
                if done.load(std::sync::atomic::Ordering::SeqCst) && i >= 10 {
                    break;
                }
            }
            versions
        }));
    }
    let mut observed = std::collections::BTreeSet::new();
    for worker in workers {
        observed.extend(worker.await.unwrap());
    }
    let v2 = retrain.await.unwrap();
    assert_eq!(v2, v1 + 1);
    assert!(
        observed.iter().all(|v| *v == v1 || *v == v2),
        "versions outside {{v, v+1}}: {observed:?}"
    );
    assert_eq!(state.active_version(), v2);

    // --- the fed-back payloads score lower under the new version ---
    let mut flagged_after = 0usize;
    for i in 0..30u64 {
        let response = client
            .post(format!("http://{addr}/predict"))
            .json(&payload(&lexicon, 500 + i, true))
            .send()
            .await
            .unwrap();
        let body: serde_json::Value = response.json().await.unwrap();
        assert_eq!(body["model_version"].as_u64().unwrap(), v2);
        if body["flagged"].as_bool().unwrap() {
            flagged_after += 1;
        }
    }
    assert!(
        flagged_after < flagged_before,
        "false positives did not decrease: {flagged_before} -> {flagged_after}"
    );

    super::pass(
        8,
        "service-loop",
        &format!(
            "100 records resolvable; FP on fed-back payloads {flagged_before} -> {flagged_after}; versions observed {observed:?}"
        ),
    );
}
