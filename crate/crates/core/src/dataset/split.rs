use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BalancedDataset, Group};
use crate::{Error, Result};

/// Disjoint, exhaustive train/test index sets, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

// Split shuffles draw from a separate ChaCha stream so the same seed can be
// used for sampling and splitting without correlating the two.
const SPLIT_STREAM: u64 = 1;

/// Random train/test split stratified by (group, label).
///
/// The overall train size is `round(train_fraction * n)`; it is apportioned
/// over the strata by largest remainder.
pub fn split(dataset: &BalancedDataset, train_fraction: f64, seed: u64) -> Result<Split> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }

    let mut strata: [Vec<usize>; 4] = Default::default();
    for (i, record) in dataset.records.iter().enumerate() {
        let g = dataset.group_of(record).index();
        strata[2 * g + record.recidivated as usize].push(i);
    }
    for (k, stratum) in strata.iter().enumerate() {
        if stratum.len() == 1 {
            let group = if k < 2 { Group::A0 } else { Group::A1 };
            return Err(Error::DegenerateStratum {
                stratum: format!(
                    "{}/label={}",
                    dataset.attribute.group_names()[group.index()],
                    k % 2
                ),
                size: 1,
            });
        }
    }

    let n = dataset.len();
    let target = (train_fraction * n as f64).round() as usize;
    let exact: Vec<f64> = strata
        .iter()
        .map(|s| train_fraction * s.len() as f64)
        .collect();
    let mut quota: Vec<usize> = exact.iter().map(|x| x.floor() as usize).collect();
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    let mut remaining = target.saturating_sub(quota.iter().sum());
    for &k in order.iter().cycle().take(4 * 4) {
        if remaining == 0 {
            break;
        }
        if quota[k] < strata[k].len() {
            quota[k] += 1;
            remaining -= 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SPLIT_STREAM);
    let mut train = Vec::with_capacity(target);
    let mut test = Vec::with_capacity(n - target);
    for (stratum, &q) in strata.iter_mut().zip(&quota) {
        stratum.shuffle(&mut rng);
        train.extend_from_slice(&stratum[..q]);
        test.extend_from_slice(&stratum[q..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Attribute, ChargeDegree, DefendantRecord, Race, Sex};

    fn dataset(n_per_group: usize) -> BalancedDataset {
        let records = (0..2 * n_per_group)
            .map(|i| DefendantRecord {
                id: i.to_string(),
                age: 30,
                sex: Sex::Male,
                race: if i % 2 == 0 { Race::White } else { Race::AfricanAmerican },
                priors_count: 0,
                juv_fel_count: 0,
                juv_misd_count: 0,
                juv_other_count: 0,
                charge_degree: ChargeDegree::Felony,
                recidivated: (i / 2) % 3 == 0,
            })
            .collect();
        BalancedDataset::from_records(Attribute::Race, records, 0).unwrap()
    }

    #[test]
    fn seventy_thirty_of_3000() {
        let d = dataset(1500);
        let s = split(&d, 0.7, 42).unwrap();
        assert_eq!(s.train.len(), 2100);
        assert_eq!(s.test.len(), 900);
        let mut all: Vec<usize> = s.train.iter().chain(&s.test).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..3000).collect::<Vec<_>>());
    }

    #[test]
    fn deterministic_per_seed() {
        let d = dataset(100);
        assert_eq!(split(&d, 0.7, 3).unwrap(), split(&d, 0.7, 3).unwrap());
        assert_ne!(split(&d, 0.7, 3).unwrap(), split(&d, 0.7, 4).unwrap());
    }

    #[test]
    fn strata_split_proportionally() {
        let d = dataset(300);
        let s = split(&d, 0.7, 11).unwrap();
        let count = |idx: &[usize], g: Race, y: bool| {
            idx.iter()
                .filter(|&&i| d.records[i].race == g && d.records[i].recidivated == y)
                .count()
        };
        for race in [Race::White, Race::AfricanAmerican] {
            for y in [false, true] {
                let tr = count(&s.train, race, y) as f64;
                let total = tr + count(&s.test, race, y) as f64;
                assert!((tr - 0.7 * total).abs() <= 1.0);
            }
        }
    }

    #[test]
    fn degenerate_strata() {
        // one record per (group, label) stratum
        let mut d = dataset(2);
        d.records[0].recidivated = true;
        d.records[1].recidivated = true;
        d.records[2].recidivated = false;
        d.records[3].recidivated = false;
        assert!(matches!(
            split(&d, 0.5, 0),
            Err(Error::DegenerateStratum { size: 1, .. })
        ));
    }

    #[test]
    fn fraction_bounds() {
        let d = dataset(10);
        assert!(split(&d, 0.0, 0).is_err());
        assert!(split(&d, 1.0, 0).is_err());
        assert!(split(&d, f64::NAN, 0).is_err());
    }
}
