#![allow(dead_code)]

use std::f64::consts::TAU;

use graphene_friction::kinematics::{alpha, s_of_p, ModelParams, OnShellPair, PlanarVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn criterion_params() -> ModelParams {
    ModelParams::reduced(0.006, 0.003, 1.0).unwrap()
}

/// Pair with `chi = 0`: `|p|` log-uniform around the threshold momentum,
/// `theta_p` uniform, `theta_q` uniform inside the allowed branch.
pub fn random_constrained_pair<R: Rng>(rng: &mut R, params: &ModelParams) -> OnShellPair {
    let s_min = params.threshold_momentum().unwrap();
    let a = alpha(params).unwrap();
    loop {
        let p_mod = s_min * 10f64.powf(rng.random_range(-3.0..0.7));
        let p = PlanarVector::from_polar(p_mod, rng.random_range(0.0..TAU));
        let s = s_of_p(p, params);
        let u: f64 = rng.random_range(0.001..0.999);
        let theta_q = if s > 0.0 {
            a * (2.0 * u - 1.0)
        } else if s < 0.0 {
            a + (TAU - 2.0 * a) * u
        } else {
            continue;
        };
        if let Ok(pair) = OnShellPair::constrained(p, theta_q, params) {
            return pair;
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
