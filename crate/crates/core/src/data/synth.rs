//! Rule-labeled synthetic triage records.
//!
//! Each class draws from weighted vital-sign templates plus Gaussian noise.
//! Draws are clamped to the outlier bounds and kept only when the rule
//! table assigns them the class they were drawn for.

use rand::Rng as _;
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::records::{Acuity, Feature, TriageRecord, VitalSigns};
use super::rules::RuleTable;
use crate::seed;
use crate::{Error, Result};

const MAX_ATTEMPTS_PER_RECORD: usize = 20_000;

/// Target class proportions, indexed by acuity level − 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMix(pub [f64; Acuity::COUNT]);

impl ClassMix {
    /// Class totals (TP + FN) of the reference held-out evaluation set.
    pub const REFERENCE_COUNTS: [u64; Acuity::COUNT] = [1642, 1870, 4124, 42518, 8082];

    pub fn reference() -> Self {
        let total: u64 = Self::REFERENCE_COUNTS.iter().sum();
        ClassMix(Self::REFERENCE_COUNTS.map(|c| c as f64 / total as f64))
    }

    pub fn single(acuity: Acuity) -> Self {
        let mut w = [0.0; Acuity::COUNT];
        w[acuity.index()] = 1.0;
        ClassMix(w)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some((k, w)) = self.0.iter().enumerate().find(|(_, w)| !(**w >= 0.0)) {
            return Err(Error::InvalidConfig(format!(
                "class mix entry for acuity {} is {w}",
                k + 1
            )));
        }
        let sum: f64 = self.0.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidConfig(format!("class mix sums to {sum}, not 1")));
        }
        Ok(())
    }

    /// Largest-remainder apportionment of `count` records; each class lands
    /// within one record of `count × share`.
    pub fn apportion(&self, count: usize) -> [usize; Acuity::COUNT] {
        let exact = self.0.map(|w| w * count as f64);
        let mut counts = exact.map(|x| x.floor() as usize);
        let assigned: usize = counts.iter().sum();
        let mut order: Vec<usize> = (0..Acuity::COUNT).collect();
        order.sort_by(|&a, &b| {
            let (ra, rb) = (exact[a] - exact[a].floor(), exact[b] - exact[b].floor());
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &k in order.iter().take(count.saturating_sub(assigned)) {
            counts[k] += 1;
        }
        counts
    }
}

impl Default for ClassMix {
    fn default() -> Self {
        Self::reference()
    }
}

/// Per-feature standard deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSigmas {
    pub temperature: f64,
    pub heart_rate: f64,
    pub resp_rate: f64,
    pub o2_sat: f64,
    pub sbp: f64,
    pub dbp: f64,
}

impl NoiseSigmas {
    pub fn zero() -> Self {
        NoiseSigmas {
            temperature: 0.0,
            heart_rate: 0.0,
            resp_rate: 0.0,
            o2_sat: 0.0,
            sbp: 0.0,
            dbp: 0.0,
        }
    }

    pub fn get(&self, feature: Feature) -> f64 {
        match feature {
            Feature::Temperature => self.temperature,
            Feature::HeartRate => self.heart_rate,
            Feature::RespRate => self.resp_rate,
            Feature::O2Sat => self.o2_sat,
            Feature::Sbp => self.sbp,
            Feature::Dbp => self.dbp,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match Feature::ALL.into_iter().find(|&f| !(self.get(f) >= 0.0)) {
            Some(f) => Err(Error::InvalidConfig(format!("noise sigma for {f} must be >= 0"))),
            None => Ok(()),
        }
    }
}

impl Default for NoiseSigmas {
    fn default() -> Self {
        NoiseSigmas {
            temperature: 0.8,
            heart_rate: 6.0,
            resp_rate: 1.2,
            o2_sat: 1.5,
            sbp: 6.0,
            dbp: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub weight: f64,
    pub center: VitalSigns,
}

/// Template lists indexed by acuity level − 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassTemplates(pub [Vec<Template>; Acuity::COUNT]);

fn template(weight: f64, v: [f64; 6]) -> Template {
    Template {
        weight,
        center: VitalSigns::from_values(v),
    }
}

impl Default for ClassTemplates {
    fn default() -> Self {
        // temperature, heart rate, resp rate, o2 sat, sbp, dbp
        ClassTemplates([
            vec![template(1.0, [100.2, 150.0, 28.0, 78.0, 75.0, 45.0])],
            vec![template(1.0, [102.0, 128.0, 22.0, 87.5, 100.0, 65.0])],
            vec![template(1.0, [101.0, 108.0, 20.0, 92.5, 118.0, 76.0])],
            vec![
                // tachycardic
                template(0.62, [98.6, 91.0, 16.0, 97.0, 120.0, 80.0]),
                // bradycardic
                template(0.30, [98.6, 60.0, 16.0, 97.0, 120.0, 80.0]),
                // tachypneic with otherwise normal vitals
                template(0.08, [98.6, 75.0, 20.5, 97.5, 120.0, 80.0]),
            ],
            vec![template(1.0, [98.6, 75.0, 16.0, 98.0, 120.0, 80.0])],
        ])
    }
}

/// Synthesizes `count` records with the default class templates.
pub fn synthesize(
    count: usize,
    mix: &ClassMix,
    noise: &NoiseSigmas,
    table: &RuleTable,
    seed: u64,
) -> Result<Vec<TriageRecord>> {
    synthesize_with_templates(count, mix, noise, table, &ClassTemplates::default(), seed)
}

pub fn synthesize_with_templates(
    count: usize,
    mix: &ClassMix,
    noise: &NoiseSigmas,
    table: &RuleTable,
    templates: &ClassTemplates,
    seed: u64,
) -> Result<Vec<TriageRecord>> {
    if count == 0 {
        return Err(Error::InvalidConfig("synthesis count must be > 0".into()));
    }
    mix.validate()?;
    noise.validate()?;

    let normals: Vec<Normal<f64>> = Feature::ALL
        .iter()
        .map(|&f| Normal::new(0.0, noise.get(f)).expect("validated sigma"))
        .collect();
    let mut rng = seed::rng(seed);
    let mut out = Vec::with_capacity(count);

    for (k, n) in mix.apportion(count).into_iter().enumerate() {
        if n == 0 {
            continue;
        }
        let acuity = Acuity::from_index(k).expect("class index");
        let candidates = &templates.0[k];
        let total_weight: f64 = candidates.iter().map(|t| t.weight).sum();
        if candidates.is_empty() || !(total_weight > 0.0) {
            return Err(Error::InvalidConfig(format!("no templates for acuity {acuity}")));
        }
        for _ in 0..n {
            let mut accepted = None;
            for _ in 0..MAX_ATTEMPTS_PER_RECORD {
                let mut pick = rng.random::<f64>() * total_weight;
                let t = candidates
                    .iter()
                    .find(|t| {
                        pick -= t.weight;
                        pick < 0.0
                    })
                    .unwrap_or(&candidates[candidates.len() - 1]);
                let mut v = t.center.clone();
                for (&f, dist) in Feature::ALL.iter().zip(&normals) {
                    v.set(f, f.clamp(v.get(f) + dist.sample(&mut rng)));
                }
                if table.classify(&v) == acuity {
                    accepted = Some(v);
                    break;
                }
            }
            let vitals = accepted.ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "templates for acuity {acuity} never satisfy the rule table"
                ))
            })?;
            out.push(TriageRecord::new(vitals, acuity));
        }
    }
    out.shuffle(&mut rng);
    Ok(out)
}
