//! Recidivism records: ingestion, filtering, balancing, splitting and
//! feature encoding.

mod balance;
mod encode;
mod parse;
mod split;

use serde::{Deserialize, Serialize};

pub use balance::{build_balanced, BalancedDataset};
pub use encode::{encode, ColumnScaling, FeatureMatrix, Normalization};
pub use parse::{filter_records, parse_raw, FilterReport, ParseOutput, RawCharge, RawRecord, Reject};
pub use split::{split, Split};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sex {
    Male,
    Female,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Race {
    AfricanAmerican,
    White,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChargeDegree {
    Felony,
    Misdemeanor,
}

/// One defendant that survived filtering.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefendantRecord {
    pub id: String,
    pub age: u32,
    pub sex: Sex,
    pub race: Race,
    pub priors_count: u32,
    pub juv_fel_count: u32,
    pub juv_misd_count: u32,
    pub juv_other_count: u32,
    pub charge_degree: ChargeDegree,
    /// Re-offended within two years.
    pub recidivated: bool,
}

/// The protected attribute a dataset is balanced over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Attribute {
    Race,
    Gender,
}

impl Attribute {
    pub const ALL: [Attribute; 2] = [Attribute::Race, Attribute::Gender];

    pub fn as_str(self) -> &'static str {
        match self {
            Attribute::Race => "race",
            Attribute::Gender => "gender",
        }
    }

    /// Race: White is a0, African-American a1. Gender: male is a0, female a1.
    pub fn group_of(self, record: &DefendantRecord) -> Group {
        match self {
            Attribute::Race => match record.race {
                Race::White => Group::A0,
                Race::AfricanAmerican => Group::A1,
            },
            Attribute::Gender => match record.sex {
                Sex::Male => Group::A0,
                Sex::Female => Group::A1,
            },
        }
    }

    pub fn group_names(self) -> [&'static str; 2] {
        match self {
            Attribute::Race => ["white", "african_american"],
            Attribute::Gender => ["male", "female"],
        }
    }

    /// Default per-group sample size of the balanced dataset.
    pub fn default_per_group_n(self) -> usize {
        match self {
            Attribute::Race => 1500,
            Attribute::Gender => 800,
        }
    }
}

impl std::fmt::Display for Attribute {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Attribute {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "race" => Ok(Attribute::Race),
            "gender" => Ok(Attribute::Gender),
            other => Err(crate::Error::InvalidArgument(format!(
                "unknown attribute `{other}` (expected race or gender)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Group {
    A0,
    A1,
}

impl Group {
    pub fn index(self) -> usize {
        match self {
            Group::A0 => 0,
            Group::A1 => 1,
        }
    }
}
