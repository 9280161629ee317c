//! Acceptance suite: one test per headline criterion, each printing a
//! single `[PASS]` or `[FAIL]` line before asserting.
//!
//! cargo test -p artemis-cli --test acceptance -- --nocapture

use std::fs;
use std::sync::Arc;
use std::time::{Duration, Instant};

use artemis_cli::stages::{self, ModelKind, TrainParams};
use artemis_cli::{run_pipeline, RunManifest, RunStatus};
use artemis_core::data::{preprocess, synthesize, Acuity, ClassMix, Feature, NoiseSigmas, RawRecord, RuleTable};
use artemis_core::eval::{compare_models, roc_auc, wilcoxon_one_tailed_with, ClassMetrics, PValueMethod};
use artemis_core::models::{Dense, Mlp};
use artemis_core::{seed, GeoPoint, VictimReport, VitalSigns};
use artemis_server::client::EventFeed;
use artemis_server::{EventKind, Store, VictimStatus};
use artemis_sim::{demo_scenario, run_mission, Collector, MissionConfig};
use rand::Rng;
use serde_json::{json, Value};

fn verdict(criterion: &str, ok: bool, detail: String) {
    println!("[{}] {criterion}: {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "{criterion}: {detail}");
}

#[test]
fn headline_accuracy_on_60k_synthetic_records() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest: RunManifest = serde_json::from_value(json!({
        "seed": 42,
        "output_dir": tmp.path(),
        "stages": ["synthesize", "train", "evaluate"],
        "synthesize": {"count": 60000},
        "train": {"models": ["mlp", "tree"], "split": 0.8}
    }))
    .unwrap();
    let started = Instant::now();
    let outcome = run_pipeline(&manifest).unwrap();
    let elapsed = started.elapsed();
    assert_eq!(outcome.record.status, RunStatus::Complete, "{:?}", outcome.record.error);
    let accuracy = |kind: &str| -> f64 {
        let text = fs::read_to_string(tmp.path().join(format!("metrics-{kind}.json"))).unwrap();
        serde_json::from_str::<Value>(&text).unwrap()["accuracy"].as_f64().unwrap()
    };
    let (net, tree) = (accuracy("mlp"), accuracy("tree"));
    let ok = net >= 0.90 && tree >= 0.88 && net > tree && elapsed < Duration::from_secs(600);
    verdict(
        "headline accuracy",
        ok,
        format!("network {net:.4} (>= 0.90), tree {tree:.4} (>= 0.88), {:.1} s (< 600 s)", elapsed.as_secs_f64()),
    );
}

#[test]
fn reference_metric_row_arithmetic() {
    // (class, tp, tn, fp, fn, printed precision, printed recall)
    let rows = [
        (1, 496, 56584, 10, 1146, 0.98, 0.30),
        (2, 623, 56259, 107, 1247, 0.85, 0.33),
        (3, 2987, 53758, 354, 1137, 0.89, 0.72),
        (4, 42292, 12122, 3596, 226, 0.92, 0.99),
        (5, 7081, 49464, 690, 1001, 0.91, 0.87),
    ];
    let mut misses = Vec::new();
    let mut detail = Vec::new();
    for (class, tp, tn, fp, fn_, precision, recall) in rows {
        let m = ClassMetrics::from_counts(Acuity::from_level(class).unwrap(), tp, tn, fp, fn_);
        // Independent recomputation of the same ratios.
        assert_eq!(m.precision, tp as f64 / (tp + fp) as f64);
        assert_eq!(m.recall, tp as f64 / (tp + fn_) as f64);
        detail.push(format!("c{class} P {:.4} R {:.4}", m.precision, m.recall));
        if (m.precision - precision).abs() > 0.005 {
            misses.push(format!("class {class} precision {:.4} vs printed {precision}", m.precision));
        }
        if (m.recall - recall).abs() > 0.005 {
            misses.push(format!("class {class} recall {:.4} vs printed {recall}", m.recall));
        }
    }
    let text = if misses.is_empty() {
        detail.join(", ")
    } else {
        format!("outside ±0.005: {}", misses.join("; "))
    };
    verdict("metric row arithmetic", misses.is_empty(), text);
}

fn random_corpus(rng: &mut impl Rng) -> Vec<RawRecord> {
    const POOL: [f64; 12] = [-200.0, -0.0, 0.0, 16.0, 60.0, 98.6, 100.0, 120.0, 135.0, 171.0, 195.0, 230.0];
    let n = rng.random_range(0..80);
    let mut rows: Vec<RawRecord> = Vec::with_capacity(n);
    for _ in 0..n {
        if !rows.is_empty() && rng.random_bool(0.15) {
            let copy = rows[rng.random_range(0..rows.len())].clone();
            rows.push(copy);
            continue;
        }
        let vitals = std::array::from_fn(|_| (!rng.random_bool(0.05)).then(|| POOL[rng.random_range(0..POOL.len())]));
        rows.push(RawRecord {
            vitals,
            pain: rng.random_bool(0.8).then(|| rng.random_range(0..=10)),
            acuity: if rng.random_bool(0.95) { Acuity::from_level(rng.random_range(1..=5)) } else { None },
            chief_complaint: None,
        });
    }
    rows
}

/// Quadratic recount by value equality, first occurrence kept.
fn recount(rows: &[RawRecord]) -> (usize, usize, usize) {
    let (mut dup, mut missing, mut outlier) = (0, 0, 0);
    for (i, r) in rows.iter().enumerate() {
        if rows[..i].contains(r) {
            dup += 1;
        } else if r.vitals.iter().any(Option::is_none) || r.acuity.is_none() {
            missing += 1;
        } else if Feature::ALL.iter().any(|&f| {
            let (lo, hi) = f.bounds();
            let v = r.vitals[f as usize].unwrap();
            v < lo || v > hi
        }) {
            outlier += 1;
        }
    }
    (dup, missing, outlier)
}

#[test]
fn preprocessing_counts_add_up() {
    let mut rng = seed::rng(425_087);
    let mut failures = 0;
    for _ in 0..1000 {
        let rows = random_corpus(&mut rng);
        let (clean, r) = preprocess(&rows);
        let expected = recount(&rows);
        let sums = r.output_count == r.input_count - r.duplicate_count - r.missing_count - r.outlier_count;
        if !(sums
            && r.is_consistent()
            && clean.len() == r.output_count
            && r.input_count == rows.len()
            && (r.duplicate_count, r.missing_count, r.outlier_count) == expected)
        {
            failures += 1;
        }
    }
    let (input, duplicates, missing, after_cleaning, after_outliers) = (425_087, 18_991, 13_248, 392_848, 385_818);
    let chain = input - duplicates - missing == after_cleaning && after_cleaning - after_outliers == 7_030;
    verdict(
        "preprocessing arithmetic",
        failures == 0 && chain,
        format!(
            "{failures}/1000 corpora inconsistent; {input} - {duplicates} - {missing} = {} (reported {after_cleaning}), {after_cleaning} -> {after_outliers} drops 7030 outliers",
            input - duplicates - missing
        ),
    );
}

/// Mean cross-entropy and the ReLU sign pattern, computed directly from the weights.
fn reference_loss(layers: &[Dense<f64>], xs: &[Vec<f64>], ys: &[Acuity]) -> (f64, Vec<bool>) {
    let mut total = 0.0;
    let mut signs = Vec::new();
    for (x, y) in xs.iter().zip(ys) {
        let mut act = x.clone();
        for (l, layer) in layers.iter().enumerate() {
            let z: Vec<f64> = (0..layer.outputs)
                .map(|j| layer.biases[j] + (0..layer.inputs).map(|i| act[i] * layer.weights[i * layer.outputs + j]).sum::<f64>())
                .collect();
            if l + 1 < layers.len() {
                signs.extend(z.iter().map(|&v| v > 0.0));
                act = z.into_iter().map(|v| v.max(0.0)).collect();
            } else {
                act = z;
            }
        }
        let m = act.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        total += m + act.iter().map(|v| (v - m).exp()).sum::<f64>().ln() - act[y.index()];
    }
    (total / xs.len() as f64, signs)
}

#[test]
fn backprop_matches_central_differences() {
    const STEP: f64 = 1e-5;
    const FLOOR: f64 = 1e-6;
    let started = Instant::now();
    let mut rng = seed::rng(10_000);
    let (mut checked, mut kinks, mut worst) = (0usize, 0usize, 0.0f64);
    for _ in 0..100 {
        let depth = rng.random_range(1..=4);
        let mut widths = vec![rng.random_range(1..=8)];
        for _ in 1..depth {
            widths.push(rng.random_range(1..=8));
        }
        widths.push(Acuity::COUNT);
        let layers = widths
            .windows(2)
            .map(|w| {
                let mut d = Dense::zeros(w[0], w[1]);
                d.weights.iter_mut().for_each(|v| *v = rng.random_range(-1.0..1.0));
                d.biases.iter_mut().for_each(|v| *v = rng.random_range(-0.5..0.5));
                d
            })
            .collect();
        let model = Mlp::from_layers(layers).unwrap();
        let batch = rng.random_range(1..=8);
        let xs: Vec<Vec<f64>> = (0..batch).map(|_| (0..widths[0]).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let ys: Vec<Acuity> = (0..batch).map(|_| Acuity::from_index(rng.random_range(0..5)).unwrap()).collect();

        let (_, grads) = model.loss_and_grad(&xs, &ys).unwrap();
        let (_, base) = reference_loss(&model.layers, &xs, &ys);
        for (k, analytic) in grads.flat().into_iter().enumerate() {
            let mut probe = model.clone();
            let theta = model.param(k);
            probe.set_param(k, theta + STEP);
            let (plus, s_plus) = reference_loss(&probe.layers, &xs, &ys);
            probe.set_param(k, theta - STEP);
            let (minus, s_minus) = reference_loss(&probe.layers, &xs, &ys);
            if s_plus != base || s_minus != base {
                // The loss is not differentiable across a ReLU switch.
                kinks += 1;
                continue;
            }
            let numeric = (plus - minus) / (2.0 * STEP);
            worst = worst.max((analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(FLOOR));
            checked += 1;
        }
    }
    let elapsed = started.elapsed();
    verdict(
        "gradient check",
        worst < 1e-4 && elapsed < Duration::from_secs(30) && checked > 1000,
        format!(
            "worst relative error {worst:.2e} (< 1e-4) over {checked} entries ({kinks} straddling a ReLU switch skipped), {:.2} s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn auc_equals_pairwise_probability() {
    let mut rng = seed::rng(200);
    let mut worst = 0.0f64;
    for set in 0..200 {
        let n = rng.random_range(2..=100);
        let mut truth: Vec<Acuity> = (0..n).map(|_| Acuity::from_index(rng.random_range(0..5)).unwrap()).collect();
        truth[0] = Acuity::Emergent;
        truth[1 % n] = Acuity::NonUrgent;
        let scores: Vec<f64> = (0..n)
            .map(|_| if set % 2 == 0 { rng.random_range(0..6) as f64 / 5.0 } else { rng.random::<f64>() })
            .collect();
        let positive = Acuity::Emergent;
        let (mut wins, mut pairs) = (0.0, 0.0);
        for (sp, tp) in scores.iter().zip(&truth) {
            for (sn, tn) in scores.iter().zip(&truth) {
                if *tp == positive && *tn != positive {
                    pairs += 1.0;
                    wins += if sp > sn { 1.0 } else if sp == sn { 0.5 } else { 0.0 };
                }
            }
        }
        let curve = roc_auc(&scores, &truth, positive).unwrap();
        worst = worst.max((curve.auc - wins / pairs).abs());
    }
    verdict("AUC oracle", worst < 1e-12, format!("max |trapezoid - pairwise| = {worst:e} over 200 sets"));
}

#[test]
fn wilcoxon_exact_and_normal_p_values() {
    let all_positive = wilcoxon_one_tailed_with(&[2.0, 3.0, 4.0, 5.0, 6.0], &[1.0; 5], PValueMethod::Exact).unwrap();
    let mut rng = seed::rng(25);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let n = 20 + i % 6;
        let shift = rng.random_range(-0.5..0.5);
        let a: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + shift).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let exact = wilcoxon_one_tailed_with(&a, &b, PValueMethod::Exact).unwrap().p_value;
        let normal = wilcoxon_one_tailed_with(&a, &b, PValueMethod::Normal).unwrap().p_value;
        worst = worst.max((exact - normal).abs());
    }
    verdict(
        "Wilcoxon exactness",
        all_positive.p_value == 0.03125 && worst < 0.01,
        format!("n=5 all positive p = {} (1/32), max |exact - normal| = {worst:.5} (< 0.01)", all_positive.p_value),
    );
}

#[test]
fn network_beats_tree_in_paired_comparison() {
    let run_seed = 77;
    let data = synthesize(30_000, &ClassMix::reference(), &NoiseSigmas::default(), &RuleTable::default(), run_seed).unwrap();
    let (train, test) = stages::split_dataset(&data, 0.8, run_seed).unwrap();
    let params = TrainParams {
        epochs: 60,
        ..TrainParams::default()
    };
    let classifier = |kind, params: &TrainParams| {
        stages::train_model(&train, kind, params, run_seed).unwrap().model.into_classifier().unwrap()
    };
    let net = classifier(ModelKind::Mlp, &params);
    let tree = classifier(ModelKind::Tree, &params);
    let stump = classifier(
        ModelKind::Tree,
        &TrainParams {
            max_depth: Some(1),
            ..params.clone()
        },
    );
    let full = compare_models(net.as_ref(), tree.as_ref(), &test, 50, 0.2, run_seed).unwrap();
    let crippled = compare_models(net.as_ref(), stump.as_ref(), &test, 50, 0.2, run_seed).unwrap();
    let full_p = full.test.as_ref().map(|t| t.p_value);
    let stump_p = crippled.test.as_ref().map_or(f64::NAN, |t| t.p_value);
    let ok = full_p.is_some_and(f64::is_finite) && stump_p < 0.001 && crippled.wins_a >= 45;
    verdict(
        "model comparison direction",
        ok,
        format!(
            "network vs tree p = {full_p:?} ({}/50 wins); network vs depth-1 tree p = {stump_p:.3e} (< 0.001), {}/50 wins (>= 45)",
            full.wins_a, crippled.wins_a
        ),
    );
}

#[test]
fn demo_mission_is_complete_and_reproducible() {
    let data = synthesize(5_000, &ClassMix::reference(), &NoiseSigmas::default(), &RuleTable::default(), 8).unwrap();
    let model = stages::train_model(&data, ModelKind::Tree, &TrainParams::default(), 8)
        .unwrap()
        .model
        .into_classifier()
        .unwrap();
    let scenario = demo_scenario();
    let started = Instant::now();
    let run = || {
        let mut sink = Collector::default();
        let log = run_mission(&scenario, model.as_ref(), &mut sink, &MissionConfig::default()).unwrap();
        (log, sink)
    };
    let (first, sink) = run();
    let (second, _) = run();
    let elapsed = started.elapsed();
    let mut ids: Vec<&str> = first.reports().map(|r| r.victim_id.as_str()).collect();
    let reports = ids.len();
    ids.sort_unstable();
    ids.dedup();
    let mut expected: Vec<&str> = scenario.victims.iter().map(|v| v.id.as_str()).collect();
    expected.sort_unstable();
    let identical = first.to_jsonl() == second.to_jsonl();
    let ok = scenario.victims.len() == 12
        && scenario.robots.len() == 3
        && reports == 12
        && ids == expected
        && sink.reports.len() == 12
        && first.complete
        && identical
        && elapsed < Duration::from_secs(10);
    verdict(
        "mission completeness",
        ok,
        format!(
            "{reports} reports, {} distinct victims, logs identical: {identical}, two runs in {:.2} s (< 10 s)",
            ids.len(),
            elapsed.as_secs_f64()
        ),
    );
}

fn report(rng: &mut impl Rng, robot: &str, victim: &str, timestamp: i64) -> VictimReport {
    let acuity = Acuity::from_index(rng.random_range(0..5)).unwrap();
    let mut probabilities = [0.05; 5];
    probabilities[acuity.index()] = 0.8;
    VictimReport {
        report_id: VictimReport::report_id_for(robot, victim),
        victim_id: victim.into(),
        robot_id: robot.into(),
        geotag: GeoPoint {
            lat: 39.1 + rng.random_range(0.0..0.002),
            lon: -84.51 + rng.random_range(0.0..0.002),
        },
        vitals: VitalSigns::normal(),
        acuity,
        probabilities,
        timestamp,
        sensor_fault: false,
    }
}

#[test]
fn server_state_survives_restart_and_torn_write() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("events.jsonl");
    let mut rng = seed::rng(100);
    let store = Store::open(&path).unwrap();
    // 100 reports over 60 victims: some victims are seen by two robots.
    for i in 0..100 {
        let victim = format!("v{:02}", i % 60);
        let robot = format!("r{}", i / 60 + 1);
        store.submit_report(&report(&mut rng, &robot, &victim, 1_000 + i as i64)).unwrap();
    }
    let mut updates = 0;
    'outer: for status in [VictimStatus::Acknowledged, VictimStatus::Treated] {
        for v in 0..30 {
            store.update_status(&format!("v{v:02}"), status, "medic").unwrap();
            updates += 1;
            if updates == 50 {
                break 'outer;
            }
        }
    }
    let before = store.list_victims(None, None);
    drop(store);

    let restarted = Store::open(&path).unwrap().list_victims(None, None);
    let complete_lines = fs::read_to_string(&path).unwrap().lines().count();
    let mut file = fs::OpenOptions::new().append(true).open(&path).unwrap();
    std::io::Write::write_all(&mut file, br#"{"id":99999,"kind":"report_added","payload":{"victim_"#).unwrap();
    drop(file);
    let torn = Store::open(&path).unwrap();
    let after_torn = torn.list_victims(None, None);
    let ok = updates == 50
        && before.len() == 60
        && restarted == before
        && after_torn == before
        && torn.last_event_id() as usize == complete_lines;
    verdict(
        "server durability",
        ok,
        format!(
            "{} victims after 100 reports + {updates} status updates; identical after restart: {}; identical after torn final line: {}",
            before.len(),
            restarted == before,
            after_torn == before
        ),
    );
}

#[test]
fn posted_report_reaches_event_stream_within_a_second() {
    let runtime = tokio::runtime::Runtime::new().unwrap();
    runtime.block_on(async {
        let store = Arc::new(Store::in_memory());
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}", listener.local_addr().unwrap());
        let (stop, stopped) = tokio::sync::oneshot::channel::<()>();
        let server = tokio::spawn(artemis_server::http::serve(listener, store, async {
            let _ = stopped.await;
        }));

        let mut feed = EventFeed::connect(&base, None).await.unwrap();
        let mut rng = seed::rng(1);
        let body = report(&mut rng, "r1", "v-latency", 1_760_000_000_000);
        let started = Instant::now();
        let response = reqwest::Client::new()
            .post(format!("{base}/api/reports"))
            .json(&body)
            .send()
            .await
            .unwrap();
        assert!(response.status().is_success());
        let event = tokio::time::timeout(Duration::from_secs(1), feed.next_event()).await;
        let elapsed = started.elapsed();
        let seen = matches!(
            &event,
            Ok(Some(Ok(e))) if e.kind == EventKind::ReportAdded && e.payload.victim_id == "v-latency"
        );
        verdict(
            "end-to-end latency",
            seen && elapsed < Duration::from_secs(1),
            format!("ReportAdded observed: {seen} after {:.1} ms (< 1000 ms)", elapsed.as_secs_f64() * 1e3),
        );
        stop.send(()).unwrap();
        drop(feed);
        server.await.unwrap().unwrap();
    });
}
