use rand::seq::index;
use rand::seq::SliceRandom;

use super::records::{Acuity, TriageRecord};
use crate::seed;
use crate::{Error, Result};

/// Down-samples every represented class to the size of the smallest one.
pub fn rebalance(records: &[TriageRecord], seed: u64) -> Vec<TriageRecord> {
    let mut by_class: [Vec<usize>; Acuity::COUNT] = Default::default();
    for (i, r) in records.iter().enumerate() {
        by_class[r.acuity.index()].push(i);
    }
    let Some(target) = by_class.iter().map(Vec::len).filter(|&n| n > 0).min() else {
        return Vec::new();
    };
    let mut rng = seed::rng(seed);
    let mut chosen = Vec::with_capacity(target * Acuity::COUNT);
    for members in by_class.iter().filter(|m| !m.is_empty()) {
        let mut picks: Vec<usize> = index::sample(&mut rng, members.len(), target)
            .into_iter()
            .map(|k| members[k])
            .collect();
        picks.sort_unstable();
        chosen.extend(picks);
    }
    chosen.shuffle(&mut rng);
    chosen.into_iter().map(|i| records[i].clone()).collect()
}

/// Seeded shuffle, then the first `⌊n·ratio⌋` rows go to train.
pub fn split<R: Clone>(records: &[R], ratio: f64, seed: u64) -> Result<(Vec<R>, Vec<R>)> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidConfig(format!("split ratio {ratio} not in (0, 1)")));
    }
    let n = records.len();
    let n_train = ((n as f64) * ratio + 1e-9).floor() as usize;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seed::rng(seed));
    let train = order[..n_train].iter().map(|&i| records[i].clone()).collect();
    let test = order[n_train..].iter().map(|&i| records[i].clone()).collect();
    Ok((train, test))
}
