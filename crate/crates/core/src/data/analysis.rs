use serde::{Deserialize, Serialize};

use super::records::{Acuity, Feature, TriageRecord};
use crate::{Error, Result, Scalar};

fn pearson<T: Scalar>(x: &[T], y: &[T], x_name: &str, y_name: &str) -> Result<T> {
    let n = T::from_usize_lossy(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy = sxy + da * db;
        sxx = sxx + da * da;
        syy = syy + db * db;
    }
    if !(sxx > T::zero()) {
        return Err(Error::ZeroVariance(x_name.to_owned()));
    }
    if !(syy > T::zero()) {
        return Err(Error::ZeroVariance(y_name.to_owned()));
    }
    let r = sxy / (sxx.sqrt() * syy.sqrt());
    Ok(r.max(-T::one()).min(T::one()))
}

/// Pearson r of every column against `target_column`, in column order with
/// the target itself omitted.
pub fn pearson_correlation<T: Scalar>(matrix: &[Vec<T>], target_column: usize) -> Result<Vec<T>> {
    if matrix.len() < 2 {
        return Err(Error::InsufficientData("correlation needs at least 2 rows".into()));
    }
    let width = matrix[0].len();
    if target_column >= width {
        return Err(Error::DimensionMismatch {
            expected: target_column + 1,
            actual: width,
        });
    }
    if let Some(row) = matrix.iter().find(|r| r.len() != width) {
        return Err(Error::DimensionMismatch {
            expected: width,
            actual: row.len(),
        });
    }
    let column = |j: usize| matrix.iter().map(|r| r[j]).collect::<Vec<T>>();
    let target = column(target_column);
    let target_name = format!("column {target_column}");
    (0..width)
        .filter(|&j| j != target_column)
        .map(|j| pearson(&column(j), &target, &format!("column {j}"), &target_name))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureCorrelation {
    pub feature: Feature,
    pub r: f64,
}

/// Correlation of each listed vital with the acuity level.
pub fn correlate_with_acuity(
    records: &[TriageRecord],
    features: &[Feature],
) -> Result<Vec<FeatureCorrelation>> {
    if records.len() < 2 {
        return Err(Error::InsufficientData("correlation needs at least 2 rows".into()));
    }
    let acuity: Vec<f64> = records.iter().map(|r| f64::from(r.acuity.level())).collect();
    features
        .iter()
        .map(|&f| {
            let x: Vec<f64> = records.iter().map(|r| r.vitals.get(f)).collect();
            let r = pearson(&x, &acuity, f.column(), "acuity")?;
            Ok(FeatureCorrelation { feature: f, r })
        })
        .collect()
}

/// Half-open interval `[lower, upper)` with per-acuity counts (index = level − 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lower: f64,
    pub upper: f64,
    pub counts: [usize; Acuity::COUNT],
}

impl Bin {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Contiguous `[k·w, (k+1)·w)` bins spanning the observed range of `feature`.
pub fn bin_distribution(records: &[TriageRecord], feature: Feature, bin_width: f64) -> Result<Vec<Bin>> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::InvalidConfig(format!("bin width {bin_width} must be > 0")));
    }
    let keys: Vec<i64> = records
        .iter()
        .map(|r| (r.vitals.get(feature) / bin_width).floor() as i64)
        .collect();
    let (Some(&lo), Some(&hi)) = (keys.iter().min(), keys.iter().max()) else {
        return Ok(Vec::new());
    };
    let mut bins: Vec<Bin> = (lo..=hi)
        .map(|k| Bin {
            lower: k as f64 * bin_width,
            upper: (k + 1) as f64 * bin_width,
            counts: [0; Acuity::COUNT],
        })
        .collect();
    for (r, k) in records.iter().zip(keys) {
        bins[(k - lo) as usize].counts[r.acuity.index()] += 1;
    }
    Ok(bins)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::VitalSigns;

    fn col(x: &[f64], y: &[f64]) -> Vec<Vec<f64>> {
        x.iter().zip(y).map(|(&a, &b)| vec![a, b]).collect()
    }

    #[test]
    fn perfect_and_inverse_correlation() {
        let r = pearson_correlation(&col(&[1., 2., 3.], &[2., 4., 6.]), 1).unwrap()[0];
        assert!((r - 1.0).abs() < 1e-15);
        let r = pearson_correlation(&col(&[1., 2., 3.], &[3., 2., 1.]), 1).unwrap()[0];
        assert!((r + 1.0).abs() < 1e-15);
    }

    #[test]
    fn hand_computed_correlation() {
        // Σdx·dy = 3, Σdx² = 2, Σdy² = 14/3, so r = sqrt(27/28).
        let expect = (27.0f64 / 28.0).sqrt();
        let r = pearson_correlation(&col(&[1., 2., 3.], &[1., 2., 4.]), 1).unwrap()[0];
        assert!((r - expect).abs() < 1e-15);
        assert!((r - 0.98198).abs() < 1e-5);
    }

    #[test]
    fn zero_variance_column_is_rejected() {
        let err = pearson_correlation(&col(&[5., 5., 5.], &[1., 2., 3.]), 1).unwrap_err();
        assert!(matches!(err, Error::ZeroVariance(_)));
    }

    fn temps(values: &[(f64, u8)]) -> Vec<TriageRecord> {
        values
            .iter()
            .map(|&(t, a)| {
                let mut v = VitalSigns::normal();
                v.temperature = t;
                TriageRecord::new(v, Acuity::from_level(a).unwrap())
            })
            .collect()
    }

    #[test]
    fn records_in_one_bin() {
        let bins = bin_distribution(&temps(&[(97.0, 3), (97.9, 2)]), Feature::Temperature, 2.0).unwrap();
        assert_eq!(bins.len(), 1);
        assert_eq!((bins[0].lower, bins[0].upper), (96.0, 98.0));
        assert_eq!(bins[0].counts, [0, 1, 1, 0, 0]);
    }

    #[test]
    fn boundary_value_goes_up() {
        let bins = bin_distribution(&temps(&[(98.0, 4)]), Feature::Temperature, 2.0).unwrap();
        assert_eq!((bins[0].lower, bins[0].upper), (98.0, 100.0));
    }

    #[test]
    fn bins_are_contiguous_and_conserve_counts() {
        let recs = temps(&[(95.1, 1), (101.7, 2), (98.0, 3), (99.99, 4), (104.0, 5), (96.5, 3)]);
        let bins = bin_distribution(&recs, Feature::Temperature, 3.0).unwrap();
        assert_eq!(bins.iter().map(Bin::total).sum::<usize>(), recs.len());
        for w in bins.windows(2) {
            assert_eq!(w[0].upper, w[1].lower);
        }
        assert!(bin_distribution(&recs, Feature::Temperature, 0.0).is_err());
    }
}
