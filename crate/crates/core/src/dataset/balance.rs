use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Attribute, DefendantRecord, Group};
use crate::{Error, Result};

/// Equal-sized groups under one protected attribute.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalancedDataset {
    pub attribute: Attribute,
    pub per_group_n: usize,
    pub seed: u64,
    pub records: Vec<DefendantRecord>,
}

impl BalancedDataset {
    /// Wrap records that are already balanced; fails if the group sizes differ.
    pub fn from_records(
        attribute: Attribute,
        records: Vec<DefendantRecord>,
        seed: u64,
    ) -> Result<Self> {
        let a1 = records
            .iter()
            .filter(|r| attribute.group_of(r) == Group::A1)
            .count();
        let a0 = records.len() - a1;
        if a0 != a1 || a0 == 0 {
            return Err(Error::InvalidArgument(format!(
                "records are not balanced over {attribute}: {a0} vs {a1}"
            )));
        }
        Ok(BalancedDataset {
            attribute,
            per_group_n: a0,
            seed,
            records,
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn group_of(&self, record: &DefendantRecord) -> Group {
        self.attribute.group_of(record)
    }

    pub fn groups(&self) -> Vec<Group> {
        self.records.iter().map(|r| self.group_of(r)).collect()
    }

    pub fn labels(&self) -> Vec<bool> {
        self.records.iter().map(|r| r.recidivated).collect()
    }
}

/// Sample `per_group_n` records from each group uniformly without
/// replacement. The result keeps the input order of the chosen records.
pub fn build_balanced(
    records: &[DefendantRecord],
    attribute: Attribute,
    per_group_n: usize,
    seed: u64,
) -> Result<BalancedDataset> {
    if per_group_n == 0 {
        return Err(Error::InvalidArgument("per_group_n must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = Vec::with_capacity(2 * per_group_n);

    for group in [Group::A0, Group::A1] {
        let pool: Vec<usize> = records
            .iter()
            .enumerate()
            .filter(|(_, r)| attribute.group_of(r) == group)
            .map(|(i, _)| i)
            .collect();
        if pool.len() < per_group_n {
            return Err(Error::InsufficientGroup {
                group: attribute.group_names()[group.index()].to_string(),
                available: pool.len(),
                requested: per_group_n,
            });
        }
        chosen.extend(
            rand::seq::index::sample(&mut rng, pool.len(), per_group_n)
                .into_iter()
                .map(|k| pool[k]),
        );
    }
    chosen.sort_unstable();

    Ok(BalancedDataset {
        attribute,
        per_group_n,
        seed,
        records: chosen.into_iter().map(|i| records[i].clone()).collect(),
    })
}
