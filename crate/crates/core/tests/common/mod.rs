#![allow(dead_code)]

use fedalloc_core::{Organization64, Scenario64, Sensor64, SystemParams64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Reference parameters with `j` organizations and a 312.5 kHz subcarrier.
pub fn params(j: usize) -> SystemParams64 {
    SystemParams64 { num_orgs: j, mbs_total_bandwidth: 312_500.0 * j as f64, ..SystemParams64::reference() }
}

pub fn random_org(rng: &mut impl Rng, id: usize, j: usize, sensors: usize) -> Organization64 {
    Organization64 {
        id,
        sensors: (0..sensors)
            .map(|_| Sensor64::new(log_uniform(rng, 1e5, 1e7), log_uniform(rng, 1e-12, 1e-7)))
            .collect(),
        uplink_gains: (0..j).map(|_| log_uniform(rng, 1e-14, 1e-11)).collect(),
    }
}

/// Scenario with gains spread over the range the reference geometry produces.
pub fn random_scenario(seed: u64, j: usize) -> Scenario64 {
    let mut r = rng(seed);
    let orgs = (0..j)
        .map(|id| {
            let n = r.random_range(2..8);
            random_org(&mut r, id, j, n)
        })
        .collect();
    Scenario64::new(params(j), orgs).unwrap()
}
