use serde::{Deserialize, Serialize};

use super::{Attribute, BalancedDataset, ChargeDegree, DefendantRecord, Group, Sex};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ColumnScaling {
    pub mean: f64,
    pub std: f64,
}

impl ColumnScaling {
    pub const IDENTITY: ColumnScaling = ColumnScaling { mean: 0.0, std: 1.0 };
}

/// Per-feature affine scaling fitted on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalization {
    pub feature_names: Vec<String>,
    pub columns: Vec<ColumnScaling>,
}

impl Normalization {
    pub fn identity(feature_names: Vec<String>) -> Self {
        let columns = vec![ColumnScaling::IDENTITY; feature_names.len()];
        Normalization {
            feature_names,
            columns,
        }
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn apply(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(&self.columns)
            .map(|(x, c)| (x - c.mean) / c.std)
            .collect()
    }
}

/// Encoded features for a dataset.
///
/// `raw` holds one-hot categoricals and unscaled numerics. Models carry
/// their own [`Normalization`] and apply it at prediction time; training
/// uses [`FeatureMatrix::normalized_rows`].
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub raw: Vec<Vec<f64>>,
    pub labels: Vec<bool>,
    pub groups: Vec<Group>,
    pub normalization: Normalization,
    /// Columns dropped during encoding, one message each.
    pub warnings: Vec<String>,
}

impl FeatureMatrix {
    /// Build from raw columns. The first `numeric` columns are z-scored with
    /// statistics over `fit_rows`; constant numeric columns are dropped. The
    /// remaining columns pass through unscaled.
    pub fn from_raw(
        raw: Vec<Vec<f64>>,
        labels: Vec<bool>,
        groups: Vec<Group>,
        feature_names: Vec<String>,
        numeric: usize,
        fit_rows: &[usize],
    ) -> Result<Self> {
        if raw.len() != labels.len() {
            return Err(Error::LengthMismatch {
                left: raw.len(),
                right: labels.len(),
            });
        }
        if raw.len() != groups.len() {
            return Err(Error::LengthMismatch {
                left: raw.len(),
                right: groups.len(),
            });
        }
        if raw.is_empty() {
            return Err(Error::InvalidArgument("cannot encode an empty dataset".into()));
        }
        if fit_rows.is_empty() {
            return Err(Error::InvalidArgument("fit split is empty".into()));
        }
        let dim = feature_names.len();
        if let Some(bad) = raw.iter().find(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        if raw.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("feature values"));
        }

        let mut keep = Vec::with_capacity(dim);
        let mut columns = Vec::with_capacity(dim);
        let mut names = Vec::with_capacity(dim);
        let mut warnings = Vec::new();
        let n = fit_rows.len() as f64;
        for (j, name) in feature_names.into_iter().enumerate() {
            let scaling = if j < numeric {
                let mean = fit_rows.iter().map(|&i| raw[i][j]).sum::<f64>() / n;
                let var = fit_rows
                    .iter()
                    .map(|&i| (raw[i][j] - mean).powi(2))
                    .sum::<f64>()
                    / n;
                let std = var.sqrt();
                if std <= 0.0 {
                    let msg = format!("dropped constant numeric column `{name}`");
                    log::warn!("{msg}");
                    warnings.push(msg);
                    continue;
                }
                ColumnScaling { mean, std }
            } else {
                ColumnScaling::IDENTITY
            };
            keep.push(j);
            columns.push(scaling);
            names.push(name);
        }

        let raw = if keep.len() == dim {
            raw
        } else {
            raw.into_iter()
                .map(|row| keep.iter().map(|&j| row[j]).collect())
                .collect()
        };
        Ok(FeatureMatrix {
            raw,
            labels,
            groups,
            normalization: Normalization {
                feature_names: names,
                columns,
            },
            warnings,
        })
    }

    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.normalization.dim()
    }

    pub fn normalized_rows(&self) -> Vec<Vec<f64>> {
        self.raw.iter().map(|r| self.normalization.apply(r)).collect()
    }

    /// Rows at `indices`, keeping this matrix's normalization.
    pub fn subset(&self, indices: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            raw: indices.iter().map(|&i| self.raw[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            groups: indices.iter().map(|&i| self.groups[i]).collect(),
            normalization: self.normalization.clone(),
            warnings: self.warnings.clone(),
        }
    }
}

const NUMERIC: [&str; 5] = [
    "age",
    "priors_count",
    "juv_fel_count",
    "juv_misd_count",
    "juv_other_count",
];

fn raw_features(record: &DefendantRecord, attribute: Attribute) -> Vec<f64> {
    let mut row = vec![
        record.age as f64,
        record.priors_count as f64,
        record.juv_fel_count as f64,
        record.juv_misd_count as f64,
        record.juv_other_count as f64,
    ];
    if attribute != Attribute::Gender {
        let male = record.sex == Sex::Male;
        row.extend([male as u8 as f64, !male as u8 as f64]);
    }
    let felony = record.charge_degree == ChargeDegree::Felony;
    row.extend([felony as u8 as f64, !felony as u8 as f64]);
    row
}

fn feature_names(attribute: Attribute) -> Vec<String> {
    let mut names: Vec<String> = NUMERIC.iter().map(|s| s.to_string()).collect();
    if attribute != Attribute::Gender {
        names.extend(["sex=male".to_string(), "sex=female".to_string()]);
    }
    names.extend([
        "charge_degree=felony".to_string(),
        "charge_degree=misdemeanor".to_string(),
    ]);
    names
}

/// Encode a balanced dataset with scaling fitted on `fit_split`.
///
/// The attribute the dataset is balanced over never enters the feature
/// vector; it is exposed only through `groups`. Race is never a feature.
pub fn encode(dataset: &BalancedDataset, fit_split: &[usize]) -> Result<FeatureMatrix> {
    if dataset.is_empty() {
        return Err(Error::InvalidArgument("cannot encode an empty dataset".into()));
    }
    if let Some(&bad) = fit_split.iter().find(|&&i| i >= dataset.len()) {
        return Err(Error::InvalidArgument(format!(
            "fit index {bad} out of range for {} records",
            dataset.len()
        )));
    }
    let raw = dataset
        .records
        .iter()
        .map(|r| raw_features(r, dataset.attribute))
        .collect();
    FeatureMatrix::from_raw(
        raw,
        dataset.labels(),
        dataset.groups(),
        feature_names(dataset.attribute),
        NUMERIC.len(),
        fit_split,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Race;

    fn rec(id: usize, age: u32, sex: Sex, race: Race, felony: bool) -> DefendantRecord {
        DefendantRecord {
            id: id.to_string(),
            age,
            sex,
            race,
            priors_count: id as u32,
            juv_fel_count: 0,
            juv_misd_count: 0,
            juv_other_count: 0,
            charge_degree: if felony {
                ChargeDegree::Felony
            } else {
                ChargeDegree::Misdemeanor
            },
            recidivated: id.is_multiple_of(2),
        }
    }

    fn dataset(attribute: Attribute) -> BalancedDataset {
        let records = vec![
            rec(0, 20, Sex::Male, Race::White, true),
            rec(1, 40, Sex::Female, Race::AfricanAmerican, false),
            rec(2, 30, Sex::Female, Race::White, true),
            rec(3, 30, Sex::Male, Race::AfricanAmerican, false),
        ];
        BalancedDataset::from_records(attribute, records, 0).unwrap()
    }

    #[test]
    fn z_score_arithmetic() {
        // column with mean 30, population std 10 over the fit rows
        let raw = vec![vec![20.0], vec![40.0], vec![40.0]];
        let m = FeatureMatrix::from_raw(
            raw,
            vec![false, true, true],
            vec![Group::A0, Group::A1, Group::A0],
            vec!["x".into()],
            1,
            &[0, 1],
        )
        .unwrap();
        assert_eq!(m.normalization.columns[0], ColumnScaling { mean: 30.0, std: 10.0 });
        assert_eq!(m.normalized_rows()[2], vec![1.0]);
    }

    #[test]
    fn one_hot_and_attribute_exclusion() {
        let race = encode(&dataset(Attribute::Race), &[0, 1, 2, 3]).unwrap();
        let names = &race.normalization.feature_names;
        // juvenile columns are constant here and dropped
        assert_eq!(race.warnings.len(), 3);
        assert!(names.contains(&"sex=male".to_string()));
        assert!(!names.iter().any(|n| n.contains("race")));
        let fel = names.iter().position(|n| n == "charge_degree=felony").unwrap();
        let mis = names.iter().position(|n| n == "charge_degree=misdemeanor").unwrap();
        assert_eq!((race.raw[0][fel], race.raw[0][mis]), (1.0, 0.0));
        assert_eq!((race.raw[1][fel], race.raw[1][mis]), (0.0, 1.0));
        assert_eq!(race.groups, vec![Group::A0, Group::A1, Group::A0, Group::A1]);

        let gender = encode(&dataset(Attribute::Gender), &[0, 1, 2, 3]).unwrap();
        assert!(!gender.normalization.feature_names.iter().any(|n| n.starts_with("sex")));
        assert_eq!(gender.groups, vec![Group::A0, Group::A1, Group::A1, Group::A0]);
    }

    #[test]
    fn scaling_uses_fit_rows_only() {
        let m = encode(&dataset(Attribute::Race), &[0, 2]).unwrap();
        // age over rows 0 and 2: mean 25, std 5
        assert_eq!(m.normalization.columns[0], ColumnScaling { mean: 25.0, std: 5.0 });
        assert_eq!(m.normalized_rows()[1][0], 3.0);
    }

    #[test]
    fn lengths_agree() {
        let m = encode(&dataset(Attribute::Race), &[0, 1]).unwrap();
        assert_eq!(m.raw.len(), m.labels.len());
        assert_eq!(m.raw.len(), m.groups.len());
        assert!(m.raw.iter().all(|r| r.len() == m.dim()));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(encode(&dataset(Attribute::Race), &[9]).is_err());
        assert!(FeatureMatrix::from_raw(vec![vec![f64::NAN]], vec![true], vec![Group::A0], vec!["x".into()], 1, &[0]).is_err());
    }
}
