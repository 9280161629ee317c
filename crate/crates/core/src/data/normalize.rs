use serde::{Deserialize, Serialize};

use super::records::{Feature, RawRecord, TriageRecord, VitalSigns};
use crate::{Error, Result, Scalar};

/// Anything a feature value can be read from.
pub trait FeatureSource {
    fn feature(&self, feature: Feature) -> Option<f64>;
}

impl FeatureSource for VitalSigns {
    fn feature(&self, feature: Feature) -> Option<f64> {
        Some(self.get(feature))
    }
}

impl FeatureSource for TriageRecord {
    fn feature(&self, feature: Feature) -> Option<f64> {
        Some(self.vitals.get(feature))
    }
}

impl FeatureSource for RawRecord {
    fn feature(&self, feature: Feature) -> Option<f64> {
        self.vital(feature)
    }
}

/// Per-feature z-score parameters (population standard deviation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct NormalizationParams<T> {
    pub features: Vec<Feature>,
    pub mean: Vec<T>,
    pub std: Vec<T>,
}

pub fn fit_normalizer<T: Scalar, R: FeatureSource>(
    records: &[R],
    features: &[Feature],
) -> Result<NormalizationParams<T>> {
    if records.is_empty() {
        return Err(Error::Empty("cannot fit a normalizer on zero records"));
    }
    let mut columns = vec![Vec::with_capacity(records.len()); features.len()];
    for (row, r) in records.iter().enumerate() {
        for (col, &f) in columns.iter_mut().zip(features) {
            let v = r.feature(f).ok_or(Error::MissingFeature { row, feature: f })?;
            col.push(T::lit(v));
        }
    }
    let names: Vec<String> = features.iter().map(|f| f.to_string()).collect();
    let (mean, std) = column_moments(&columns, &names)?;
    Ok(NormalizationParams {
        features: features.to_vec(),
        mean,
        std,
    })
}

/// Mean and population std of each column; errors on a zero-variance column.
pub(crate) fn column_moments<T: Scalar>(
    columns: &[Vec<T>],
    names: &[String],
) -> Result<(Vec<T>, Vec<T>)> {
    let mut mean = Vec::with_capacity(columns.len());
    let mut std = Vec::with_capacity(columns.len());
    for (col, name) in columns.iter().zip(names) {
        let n = T::from_usize_lossy(col.len());
        let m = col.iter().copied().sum::<T>() / n;
        let var = col.iter().map(|&x| (x - m) * (x - m)).sum::<T>() / n;
        let s = var.sqrt();
        if !(s > T::zero()) {
            return Err(Error::ZeroVariance(name.clone()));
        }
        mean.push(m);
        std.push(s);
    }
    Ok((mean, std))
}

impl<T: Scalar> NormalizationParams<T> {
    pub fn dim(&self) -> usize {
        self.features.len()
    }

    /// Fit directly on a row-major matrix whose columns are `features`.
    pub fn fit_matrix(rows: &[Vec<T>], features: &[Feature]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("cannot fit a normalizer on zero rows"));
        }
        let mut columns = vec![Vec::with_capacity(rows.len()); features.len()];
        for row in rows {
            if row.len() != features.len() {
                return Err(Error::DimensionMismatch {
                    expected: features.len(),
                    actual: row.len(),
                });
            }
            for (col, &v) in columns.iter_mut().zip(row) {
                col.push(v);
            }
        }
        let names: Vec<String> = features.iter().map(|f| f.to_string()).collect();
        let (mean, std) = column_moments(&columns, &names)?;
        Ok(NormalizationParams {
            features: features.to_vec(),
            mean,
            std,
        })
    }

    pub fn transform_value(&self, column: usize, value: T) -> T {
        (value - self.mean[column]) / self.std[column]
    }

    pub fn transform<R: FeatureSource>(&self, source: &R, row: usize) -> Result<Vec<T>> {
        self.features
            .iter()
            .enumerate()
            .map(|(j, &f)| {
                let v = source.feature(f).ok_or(Error::MissingFeature { row, feature: f })?;
                Ok(self.transform_value(j, T::lit(v)))
            })
            .collect()
    }

    pub fn transform_vitals(&self, vitals: &VitalSigns) -> Vec<T> {
        self.features
            .iter()
            .enumerate()
            .map(|(j, &f)| self.transform_value(j, T::lit(vitals.get(f))))
            .collect()
    }

    /// `(value − mean) / std` for every listed feature of every record.
    pub fn apply<R: FeatureSource>(&self, records: &[R]) -> Result<Vec<Vec<T>>> {
        records
            .iter()
            .enumerate()
            .map(|(row, r)| self.transform(r, row))
            .collect()
    }
}

/// Free-function form of [`NormalizationParams::apply`].
pub fn apply_normalizer<T: Scalar, R: FeatureSource>(
    params: &NormalizationParams<T>,
    records: &[R],
) -> Result<Vec<Vec<T>>> {
    params.apply(records)
}
