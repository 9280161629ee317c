//! Configurable vital-sign rule table used to label synthesized records.

use serde::{Deserialize, Serialize};

use super::records::{Acuity, Feature, VitalSigns};
use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Condition {
    /// `value < threshold`
    Below { feature: Feature, threshold: f64 },
    /// `value > threshold`
    Above { feature: Feature, threshold: f64 },
    /// `value < low || value > high`
    Outside { feature: Feature, low: f64, high: f64 },
}

impl Condition {
    pub fn holds(&self, vitals: &VitalSigns) -> bool {
        match *self {
            Condition::Below { feature, threshold } => vitals.get(feature) < threshold,
            Condition::Above { feature, threshold } => vitals.get(feature) > threshold,
            Condition::Outside { feature, low, high } => {
                let v = vitals.get(feature);
                v < low || v > high
            }
        }
    }
}

/// Fires when any of its conditions holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub acuity: Acuity,
    pub any_of: Vec<Condition>,
}

/// Ordered clauses, first match wins; `default` covers everything else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuleTable {
    pub clauses: Vec<Clause>,
    pub default: Acuity,
}

impl Default for RuleTable {
    fn default() -> Self {
        use Condition::{Above, Below, Outside};
        use Feature::*;

        let normal = VitalSigns::normal();
        let within_ten_percent = Feature::ALL
            .iter()
            .map(|&feature| {
                let v = normal.get(feature);
                Outside {
                    feature,
                    low: v * 0.9,
                    high: v * 1.1,
                }
            })
            .collect();

        RuleTable {
            clauses: vec![
                Clause {
                    acuity: Acuity::Resuscitation,
                    any_of: vec![
                        Below { feature: O2Sat, threshold: 85.0 },
                        Above { feature: HeartRate, threshold: 140.0 },
                        Below { feature: HeartRate, threshold: 40.0 },
                        Below { feature: Sbp, threshold: 80.0 },
                    ],
                },
                Clause {
                    acuity: Acuity::Emergent,
                    any_of: vec![
                        Below { feature: O2Sat, threshold: 90.0 },
                        Above { feature: HeartRate, threshold: 120.0 },
                        Above { feature: Temperature, threshold: 103.0 },
                        Below { feature: Sbp, threshold: 90.0 },
                    ],
                },
                Clause {
                    acuity: Acuity::Urgent,
                    any_of: vec![
                        Below { feature: O2Sat, threshold: 94.0 },
                        Above { feature: HeartRate, threshold: 100.0 },
                        Above { feature: Temperature, threshold: 100.4 },
                        Above { feature: RespRate, threshold: 24.0 },
                    ],
                },
                Clause {
                    acuity: Acuity::LessUrgent,
                    any_of: within_ten_percent,
                },
            ],
            default: Acuity::NonUrgent,
        }
    }
}

impl RuleTable {
    /// Label for in-range vitals. Never fails.
    pub fn classify(&self, vitals: &VitalSigns) -> Acuity {
        self.clauses
            .iter()
            .find(|c| c.any_of.iter().any(|cond| cond.holds(vitals)))
            .map_or(self.default, |c| c.acuity)
    }
}

/// Applies `table` after checking the outlier bounds.
pub fn label_by_rule(vitals: &VitalSigns, table: &RuleTable) -> Result<Acuity> {
    vitals.check_bounds()?;
    Ok(table.classify(vitals))
}
