use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::records::{Feature, RawRecord, TriageRecord};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessReport {
    pub input_count: usize,
    pub duplicate_count: usize,
    pub missing_count: usize,
    pub outlier_count: usize,
    pub output_count: usize,
}

impl PreprocessReport {
    /// `output = input − duplicates − missing − outliers`.
    pub fn is_consistent(&self) -> bool {
        self.duplicate_count + self.missing_count + self.outlier_count + self.output_count
            == self.input_count
    }
}

#[derive(PartialEq, Eq, Hash)]
struct RowKey {
    vitals: [Option<u64>; 6],
    pain: Option<u8>,
    acuity: Option<u8>,
    complaint: Option<String>,
}

impl From<&RawRecord> for RowKey {
    fn from(r: &RawRecord) -> Self {
        // +0.0 and -0.0 compare equal as values, so they must share a key.
        let bits = |v: f64| if v == 0.0 { 0 } else { v.to_bits() };
        RowKey {
            vitals: r.vitals.map(|v| v.map(bits)),
            pain: r.pain,
            acuity: r.acuity.map(|a| a.level()),
            complaint: r.chief_complaint.clone(),
        }
    }
}

/// Drops exact duplicates (first occurrence kept), then incomplete rows, then outliers.
pub fn preprocess(records: &[RawRecord]) -> (Vec<TriageRecord>, PreprocessReport) {
    let mut report = PreprocessReport {
        input_count: records.len(),
        ..Default::default()
    };
    let mut seen = HashSet::with_capacity(records.len());
    let mut kept = Vec::new();

    for raw in records {
        if !seen.insert(RowKey::from(raw)) {
            report.duplicate_count += 1;
            continue;
        }
        let Some(rec) = raw.complete() else {
            report.missing_count += 1;
            continue;
        };
        if Feature::ALL.iter().any(|&f| !f.in_bounds(rec.vitals.get(f))) {
            report.outlier_count += 1;
            continue;
        }
        kept.push(rec);
    }
    report.output_count = kept.len();
    (kept, report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Acuity, VitalSigns};

    fn raw(values: [Option<f64>; 6], acuity: Option<Acuity>) -> RawRecord {
        RawRecord {
            vitals: values,
            acuity,
            ..Default::default()
        }
    }

    fn normal() -> [Option<f64>; 6] {
        [Some(98.6), Some(75.0), Some(16.0), Some(98.0), Some(120.0), Some(80.0)]
    }

    #[test]
    fn empty_input() {
        let (kept, report) = preprocess(&[]);
        assert!(kept.is_empty());
        assert_eq!(report, PreprocessReport::default());
    }

    #[test]
    fn hand_traced_filters() {
        let a = raw(normal(), Some(Acuity::NonUrgent));
        let mut b_vals = normal();
        b_vals[1] = Some(120.0);
        let b = raw(b_vals, Some(Acuity::Urgent));
        let mut missing = normal();
        missing[Feature::Sbp as usize] = None;
        let mut hypoxic = normal();
        hypoxic[Feature::O2Sat as usize] = Some(101.0);
        let rows = vec![
            a.clone(),
            b,
            a,
            raw(missing, Some(Acuity::LessUrgent)),
            raw(hypoxic, Some(Acuity::Emergent)),
        ];
        let (kept, report) = preprocess(&rows);
        assert_eq!(kept.len(), 2);
        assert_eq!(
            (
                report.input_count,
                report.duplicate_count,
                report.missing_count,
                report.outlier_count,
                report.output_count
            ),
            (5, 1, 1, 1, 2)
        );
    }

    #[test]
    fn boundary_values_are_kept() {
        let rows: Vec<RawRecord> = [
            (Feature::O2Sat, 100.0),
            (Feature::O2Sat, 0.0),
            (Feature::HeartRate, 220.0),
            (Feature::Temperature, 135.0),
            (Feature::Temperature, -130.0),
            (Feature::Dbp, 170.0),
            (Feature::Sbp, 190.0),
        ]
        .into_iter()
        .map(|(f, v)| {
            let mut vitals = VitalSigns::normal();
            vitals.set(f, v);
            RawRecord::from(&TriageRecord::new(vitals, Acuity::LessUrgent))
        })
        .collect();
        let (kept, report) = preprocess(&rows);
        assert_eq!(kept.len(), rows.len());
        assert_eq!(report.outlier_count, 0);
    }

    #[test]
    fn just_past_each_bound_is_an_outlier() {
        for (f, v) in [
            (Feature::O2Sat, 100.01),
            (Feature::O2Sat, -0.1),
            (Feature::HeartRate, 220.5),
            (Feature::HeartRate, -1.0),
            (Feature::Temperature, 135.1),
            (Feature::Temperature, -130.1),
            (Feature::Dbp, 170.1),
            (Feature::Sbp, 190.1),
        ] {
            let mut vitals = VitalSigns::normal();
            vitals.set(f, v);
            let (_, report) = preprocess(&[RawRecord::from(&TriageRecord::new(vitals, Acuity::Urgent))]);
            assert_eq!(report.outlier_count, 1, "{f} = {v}");
        }
    }

    #[test]
    fn missing_acuity_counts_as_missing() {
        let (_, report) = preprocess(&[raw(normal(), None)]);
        assert_eq!(report.missing_count, 1);
    }
}
