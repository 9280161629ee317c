//! Trains the acuity network and the decision tree on a synthetic dataset
//! and prints held-out accuracy for both.
//!
//! cargo run --release -p artemis-core --example headline -- [count] [epochs]

use std::time::Instant;

use artemis_core::data::{
    feature_matrix, fit_normalizer, labels, split, synthesize, ClassMix, NoiseSigmas, RuleTable, MAIN_FEATURES,
};
use artemis_core::eval::evaluate;
use artemis_core::models::{mlp_init, mlp_train, tree_fit, TrainConfig, TreeConfig, DEFAULT_HIDDEN};
use artemis_core::NormalizationParams;

fn main() -> artemis_core::Result<()> {
    let mut args = std::env::args().skip(1);
    let count: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(60_000);
    let epochs: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(100);
    let seed = 42;

    let data = synthesize(count, &ClassMix::reference(), &NoiseSigmas::default(), &RuleTable::default(), seed)?;
    let (train, test) = split(&data, 0.8, seed)?;
    let params: NormalizationParams = fit_normalizer(&train, &MAIN_FEATURES)?;
    let x_train = params.apply(&train)?;
    let x_test = params.apply(&test)?;
    let (y_train, y_test) = (labels(&train), labels(&test));

    let started = Instant::now();
    let init = mlp_init(MAIN_FEATURES.len(), &DEFAULT_HIDDEN, seed)?;
    let config = TrainConfig { epochs, seed, ..Default::default() };
    let (net, history) = mlp_train(&init, &x_train, &y_train, &config)?;
    let worst = (0..history.len().saturating_sub(10))
        .map(|i| history[i + 10] / history[i])
        .fold(0.0, f64::max);
    println!("worst 10-epoch loss ratio: {worst:.4}");
    if std::env::var_os("HEADLINE_HISTORY").is_some() {
        println!("{history:?}");
    }
    let preds: Vec<_> = x_test.iter().map(|x| net.forward(x).map(|l| l.acuity)).collect::<Result<_, _>>()?;
    let net_report = evaluate(&preds, &y_test)?;
    println!("network: {:.4} ({:.1?}, final loss {:.4})", net_report.accuracy, started.elapsed(), history.last().unwrap());
    print!("{}", net_report.to_table("network"));

    let started = Instant::now();
    let raw_train = feature_matrix(&train, &MAIN_FEATURES);
    let tree = tree_fit(&raw_train, &y_train, &TreeConfig::default())?;
    let preds: Vec<_> = feature_matrix(&test, &MAIN_FEATURES).iter().map(|x| tree.predict(x)).collect();
    let tree_report = evaluate(&preds, &y_test)?;
    println!("tree: {:.4} ({:.1?}, depth {}, {} leaves)", tree_report.accuracy, started.elapsed(), tree.depth(), tree.leaf_count());
    print!("{}", tree_report.to_table("decision tree"));
    Ok(())
}
