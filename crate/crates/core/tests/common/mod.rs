#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tradeoff_core::dataset::{Attribute, BalancedDataset, ChargeDegree, DefendantRecord, Race, Sex};

/// A plausible defendant whose label depends on priors, age and (for a1) a
/// small offset, so group weighting has something to trade off.
fn draw(rng: &mut ChaCha8Rng, id: usize, race: Race) -> DefendantRecord {
    let age = rng.random_range(18..70u32);
    let priors = rng.random_range(0..12u32);
    let felony = rng.random_bool(0.6);
    let z = -0.8 + 0.25 * priors as f64 - 0.04 * (age as f64 - 30.0)
        + if felony { 0.2 } else { 0.0 }
        + if race == Race::AfricanAmerican { 0.3 } else { 0.0 }
        + rng.random_range(-1.5..1.5);
    DefendantRecord {
        id: format!("p{id}"),
        age,
        sex: if rng.random_bool(0.2) { Sex::Female } else { Sex::Male },
        race,
        priors_count: priors,
        juv_fel_count: u32::from(rng.random_bool(0.1)),
        juv_misd_count: u32::from(rng.random_bool(0.15)),
        juv_other_count: u32::from(rng.random_bool(0.1)),
        charge_degree: if felony { ChargeDegree::Felony } else { ChargeDegree::Misdemeanor },
        recidivated: z > 0.0,
    }
}

/// `per_group` White and `per_group` African-American records, interleaved.
pub fn synthetic_race(per_group: usize, seed: u64) -> BalancedDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(2 * per_group);
    for i in 0..per_group {
        records.push(draw(&mut rng, 2 * i, Race::White));
        records.push(draw(&mut rng, 2 * i + 1, Race::AfricanAmerican));
    }
    BalancedDataset::from_records(Attribute::Race, records, seed).unwrap()
}

/// Every White record has an African-American twin with the same features
/// and label.
pub fn mirrored_race(per_group: usize, seed: u64) -> BalancedDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(2 * per_group);
    for i in 0..per_group {
        let white = draw(&mut rng, 2 * i, Race::White);
        let twin = DefendantRecord {
            id: format!("p{}", 2 * i + 1),
            race: Race::AfricanAmerican,
            ..white.clone()
        };
        records.push(white);
        records.push(twin);
    }
    BalancedDataset::from_records(Attribute::Race, records, seed).unwrap()
}

pub fn data_path() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/compas-scores-two-years.csv")
}
