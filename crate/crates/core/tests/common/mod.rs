//! Shared fixtures for the integration tests and the acceptance run.
#![allow(dead_code)]

use commonlines::model::{FrequencyModel, Line, Network};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const EPSILON: f64 = 1.0 / 999.0;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Two queue-family lines: t = (1/4, 1/2) h, mu = (16, 10) veh/h, K = 20.
pub fn queue_pair() -> Network {
    Network::new(vec![
        Line::new(0.25, FrequencyModel::queue(16.0, 20).unwrap()).unwrap(),
        Line::new(0.5, FrequencyModel::queue(10.0, 20).unwrap()).unwrap(),
    ])
    .unwrap()
}

/// The same two lines with the power family, beta = 0.2.
pub fn power_pair() -> Network {
    Network::new(vec![
        Line::new(
            0.25,
            FrequencyModel::power(16.0, 20.0, 0.2, EPSILON).unwrap(),
        )
        .unwrap(),
        Line::new(
            0.5,
            FrequencyModel::power(10.0, 20.0, 0.2, EPSILON).unwrap(),
        )
        .unwrap(),
    ])
    .unwrap()
}

pub fn random_model<R: Rng>(rng: &mut R) -> FrequencyModel {
    let mu = rng.gen_range(2.0..20.0);
    if rng.gen_bool(0.5) {
        FrequencyModel::queue(mu, rng.gen_range(3..25)).unwrap()
    } else {
        let capacity = rng.gen_range(3.0..25.0);
        FrequencyModel::power(mu, capacity, rng.gen_range(0.1..0.9), EPSILON).unwrap()
    }
}

/// `n` lines with distinct travel times in [0.05, 1] h and random families.
pub fn random_network<R: Rng>(rng: &mut R, n: usize) -> Network {
    let mut ts: Vec<f64> = Vec::with_capacity(n);
    while ts.len() < n {
        let t = rng.gen_range(0.05..1.0);
        if ts.iter().all(|&u: &f64| (u - t).abs() > 1e-3) {
            ts.push(t);
        }
    }
    Network::new(
        ts.into_iter()
            .map(|t| Line::new(t, random_model(rng)).unwrap())
            .collect(),
    )
    .unwrap()
}

/// Interior flows `v_i in [0, 0.95 v_sat_i)`.
pub fn random_flows<R: Rng>(rng: &mut R, network: &Network) -> Vec<f64> {
    network
        .lines()
        .iter()
        .map(|l| rng.gen_range(0.0..0.95) * l.saturation_flow())
        .collect()
}
