use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One of the six vital-sign columns of the triage table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feature {
    Temperature,
    #[serde(rename = "heartrate")]
    HeartRate,
    #[serde(rename = "resprate")]
    RespRate,
    #[serde(rename = "o2sat")]
    O2Sat,
    Sbp,
    Dbp,
}

impl Feature {
    pub const ALL: [Feature; 6] = [
        Feature::Temperature,
        Feature::HeartRate,
        Feature::RespRate,
        Feature::O2Sat,
        Feature::Sbp,
        Feature::Dbp,
    ];

    /// Column name in the tabular format.
    pub fn column(self) -> &'static str {
        match self {
            Feature::Temperature => "temperature",
            Feature::HeartRate => "heartrate",
            Feature::RespRate => "resprate",
            Feature::O2Sat => "o2sat",
            Feature::Sbp => "sbp",
            Feature::Dbp => "dbp",
        }
    }

    pub fn from_column(name: &str) -> Option<Feature> {
        let name = name.trim().to_ascii_lowercase();
        Feature::ALL.into_iter().find(|f| f.column() == name)
    }

    /// Inclusive accepted range; values strictly outside are outliers.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            Feature::Temperature => (-130.0, 135.0),
            Feature::HeartRate => (0.0, 220.0),
            Feature::RespRate => (f64::NEG_INFINITY, f64::INFINITY),
            Feature::O2Sat => (0.0, 100.0),
            Feature::Sbp => (f64::NEG_INFINITY, 190.0),
            Feature::Dbp => (f64::NEG_INFINITY, 170.0),
        }
    }

    pub fn in_bounds(self, value: f64) -> bool {
        let (lo, hi) = self.bounds();
        value >= lo && value <= hi
    }

    pub fn clamp(self, value: f64) -> f64 {
        let (lo, hi) = self.bounds();
        value.clamp(lo, hi)
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

/// Features fed to the main acuity network.
pub const MAIN_FEATURES: [Feature; 3] = [Feature::Temperature, Feature::HeartRate, Feature::O2Sat];

/// Features used for correlation analysis and the pairwise ensemble.
pub const ENSEMBLE_FEATURES: [Feature; 5] = [
    Feature::Temperature,
    Feature::HeartRate,
    Feature::RespRate,
    Feature::O2Sat,
    Feature::Sbp,
];

/// Emergency Severity Index level; 1 is the most severe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Acuity {
    Resuscitation = 1,
    Emergent = 2,
    Urgent = 3,
    LessUrgent = 4,
    NonUrgent = 5,
}

impl Acuity {
    pub const ALL: [Acuity; 5] = [
        Acuity::Resuscitation,
        Acuity::Emergent,
        Acuity::Urgent,
        Acuity::LessUrgent,
        Acuity::NonUrgent,
    ];
    pub const COUNT: usize = 5;

    pub fn level(self) -> u8 {
        self as u8
    }

    /// Zero-based class index (level − 1).
    pub fn index(self) -> usize {
        self as usize - 1
    }

    pub fn from_index(index: usize) -> Option<Acuity> {
        Acuity::ALL.get(index).copied()
    }

    pub fn from_level(level: u8) -> Option<Acuity> {
        (1..=5).contains(&level).then(|| Acuity::ALL[level as usize - 1])
    }
}

impl TryFrom<u8> for Acuity {
    type Error = Error;

    fn try_from(level: u8) -> Result<Self> {
        Acuity::from_level(level)
            .ok_or_else(|| Error::InvalidConfig(format!("acuity level {level} not in 1..=5")))
    }
}

impl fmt::Display for Acuity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.level())
    }
}

impl Serialize for Acuity {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u8(self.level())
    }
}

impl<'de> Deserialize<'de> for Acuity {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let level = u8::deserialize(d)?;
        Acuity::from_level(level)
            .ok_or_else(|| serde::de::Error::custom(format!("acuity {level} not in 1..=5")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VitalSigns {
    /// °F
    pub temperature: f64,
    pub heart_rate: f64,
    pub resp_rate: f64,
    /// percent
    pub o2_sat: f64,
    pub sbp: f64,
    pub dbp: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pain: Option<u8>,
}

impl VitalSigns {
    /// Textbook-normal adult vitals.
    pub fn normal() -> Self {
        VitalSigns {
            temperature: 98.6,
            heart_rate: 75.0,
            resp_rate: 16.0,
            o2_sat: 98.0,
            sbp: 120.0,
            dbp: 80.0,
            pain: None,
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

    pub fn set(&mut self, feature: Feature, value: f64) {
        let slot = match feature {
            Feature::Temperature => &mut self.temperature,
            Feature::HeartRate => &mut self.heart_rate,
            Feature::RespRate => &mut self.resp_rate,
            Feature::O2Sat => &mut self.o2_sat,
            Feature::Sbp => &mut self.sbp,
            Feature::Dbp => &mut self.dbp,
        };
        *slot = value;
    }

    pub fn from_values(values: [f64; 6]) -> Self {
        let mut v = VitalSigns::normal();
        for (f, x) in Feature::ALL.into_iter().zip(values) {
            v.set(f, x);
        }
        v
    }

    /// First vital outside the outlier bounds, if any. NaN counts as out of range.
    pub fn check_bounds(&self) -> Result<()> {
        for f in Feature::ALL {
            let value = self.get(f);
            if !f.in_bounds(value) {
                return Err(Error::OutOfRange { feature: f, value });
            }
        }
        Ok(())
    }

    pub fn clamped(&self) -> Self {
        let mut out = self.clone();
        for f in Feature::ALL {
            out.set(f, f.clamp(self.get(f)));
        }
        out
    }

    pub fn select(&self, features: &[Feature]) -> Vec<f64> {
        features.iter().map(|&f| self.get(f)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriageRecord {
    pub vitals: VitalSigns,
    pub acuity: Acuity,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chief_complaint: Option<String>,
}

impl TriageRecord {
    pub fn new(vitals: VitalSigns, acuity: Acuity) -> Self {
        TriageRecord {
            vitals,
            acuity,
            chief_complaint: None,
        }
    }
}

/// A parsed table row before cleaning; blank cells are `None`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RawRecord {
    pub vitals: [Option<f64>; 6],
    pub pain: Option<u8>,
    pub acuity: Option<Acuity>,
    pub chief_complaint: Option<String>,
}

impl RawRecord {
    pub fn vital(&self, feature: Feature) -> Option<f64> {
        self.vitals[feature as usize]
    }

    /// `None` when any vital or the acuity is absent.
    pub fn complete(&self) -> Option<TriageRecord> {
        let mut values = [0.0; 6];
        for (slot, v) in values.iter_mut().zip(self.vitals) {
            *slot = v?;
        }
        let mut vitals = VitalSigns::from_values(values);
        vitals.pain = self.pain;
        Some(TriageRecord {
            vitals,
            acuity: self.acuity?,
            chief_complaint: self.chief_complaint.clone(),
        })
    }
}

impl From<&TriageRecord> for RawRecord {
    fn from(r: &TriageRecord) -> Self {
        let mut vitals = [None; 6];
        for f in Feature::ALL {
            vitals[f as usize] = Some(r.vitals.get(f));
        }
        RawRecord {
            vitals,
            pain: r.vitals.pain,
            acuity: Some(r.acuity),
            chief_complaint: r.chief_complaint.clone(),
        }
    }
}

/// Raw (unnormalized) feature rows.
pub fn feature_matrix(records: &[TriageRecord], features: &[Feature]) -> Vec<Vec<f64>> {
    records.iter().map(|r| r.vitals.select(features)).collect()
}

pub fn labels(records: &[TriageRecord]) -> Vec<Acuity> {
    records.iter().map(|r| r.acuity).collect()
}
