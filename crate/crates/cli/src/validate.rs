//! Invariant suite behind the `validate` command.

use std::f64::consts::{PI, TAU};
use std::fmt;

use graphene_friction::distributions::{power, prob_p, prob_theta, total_rate};
use graphene_friction::gamma::GammaBasis;
use graphene_friction::kinematics::{
    alpha, s_of_p, spacelike_norm, theta_p_zero, ModelParams, OnShellPair, PlanarVector,
};
use graphene_friction::matrix_element::{
    f_closed_form, f_closed_form_with, g_weight_shifted, oracle_ratio, trace_oracle_with, RontgenCoupling,
    VelocityConvention, TRACE_ORACLE_RATIO,
};
use graphene_friction::quadrature::Tolerance;
use graphene_friction::Scaled;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::CliError;

pub const ORACLE_SPREAD_LIMIT: f64 = 1e-8;
pub const SCALING_LIMIT: f64 = 1e-5;
pub const VANISHING_LIMIT: f64 = 1e-6;
/// `|p|` values, in units of `Ω / v_F`, probed for the vanishing direction.
pub const VANISHING_MOMENTA: [f64; 3] = [2.0, 10.0, 100.0];
/// Below this multiple of the threshold momentum the vanishing direction
/// merges with the forward peak and the check is skipped.
pub const VANISHING_MIN_OVER_THRESHOLD: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub outcome: Outcome,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, pass: bool, detail: String) -> Self {
        Check {
            name,
            outcome: if pass { Outcome::Pass } else { Outcome::Fail },
            detail,
        }
    }

    fn skip(name: &'static str, detail: &str) -> Self {
        Check {
            name,
            outcome: Outcome::Skip,
            detail: detail.to_string(),
        }
    }

    pub fn passed(&self) -> bool {
        self.outcome != Outcome::Fail
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skip => "SKIP",
        };
        write!(f, "{:<20} {tag}  {}", self.name, self.detail)
    }
}

/// On-shell pair with `chi = 0`, `|p|` log-uniform around the threshold
/// momentum and `theta_q` uniform inside its allowed branch.
pub fn random_constrained_pair<R: Rng>(rng: &mut R, params: &ModelParams) -> OnShellPair {
    let s_min = params.threshold_momentum().expect("above threshold");
    let a = alpha(params).expect("above threshold");
    loop {
        let p = PlanarVector::from_polar(s_min * 10f64.powf(rng.random_range(-3.0..0.7)), rng.random_range(0.0..TAU));
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

fn pairs(params: &ModelParams, seed: u64, n: usize) -> Vec<OnShellPair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_constrained_pair(&mut rng, params)).collect()
}

/// Relative spread of closed form over trace oracle on random pairs.
pub fn oracle_constancy(params: &ModelParams, convention: VelocityConvention, n: usize) -> Result<Check, CliError> {
    const NAME: &str = "oracle constancy";
    if !params.is_above_threshold() {
        return Ok(Check::skip(NAME, "no constrained pairs below threshold"));
    }
    let basis = GammaBasis::new(params.v_f());
    let mut ratios = Vec::with_capacity(n);
    for pair in pairs(params, 1, n) {
        let closed = f_closed_form(&pair, params)?;
        let oracle = trace_oracle_with(&pair, params, &basis, convention)?;
        ratios.push(oracle_ratio(&closed, &oracle, &pair, params)?);
    }
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = (max - min) / min.abs();
    let offset = (min / TRACE_ORACLE_RATIO - 1.0).abs();
    Ok(Check::new(
        NAME,
        spread < ORACLE_SPREAD_LIMIT && offset < ORACLE_SPREAD_LIMIT,
        format!("{n} pairs; spread {spread:.2e}; ratio/frozen constant - 1 = {offset:.2e}"),
    ))
}

/// `F >= 0` with and without the Röntgen coupling.
pub fn positivity(params: &ModelParams, n: usize) -> Result<Check, CliError> {
    const NAME: &str = "positivity";
    if !params.is_above_threshold() {
        return Ok(Check::skip(NAME, "no constrained pairs below threshold"));
    }
    let mut worst = f64::INFINITY;
    for pair in pairs(params, 2, n) {
        for coupling in [RontgenCoupling::Included, RontgenCoupling::Ignored] {
            worst = worst.min(f_closed_form_with(&pair, params, coupling)?.value());
        }
    }
    Ok(Check::new(NAME, worst >= 0.0, format!("{n} pairs x 2 couplings; min F = {worst:.3e}")))
}

/// Pointwise `p <-> q` symmetry of the joint weight.
pub fn exchange_symmetry(params: &ModelParams, n: usize) -> Result<Check, CliError> {
    const NAME: &str = "exchange symmetry";
    if !params.is_above_threshold() {
        return Ok(Check::skip(NAME, "no constrained pairs below threshold"));
    }
    let mut worst = 0.0f64;
    for pair in pairs(params, 3, n) {
        let shift = 2.0 * params.a() * spacelike_norm(&pair)?;
        let g = g_weight_shifted(&pair, params, shift)?;
        let h = g_weight_shifted(&pair.swapped(), params, shift)?;
        if g != 0.0 {
            worst = worst.max((g - h).abs() / g.abs());
        }
    }
    Ok(Check::new(NAME, worst <= 1e-12, format!("{n} pairs; max relative difference {worst:.2e}")))
}

/// Every observable is exactly zero at `v ∈ {0.5, 0.9, 1.0} v_F`.
pub fn threshold(params: &ModelParams, tol: Tolerance) -> Result<Check, CliError> {
    let mut nonzero = Vec::new();
    for ratio in [0.5, 0.9, 1.0] {
        let slow = params.with_velocity(ratio * params.v_f())?;
        let p_scale = params.omega() / params.v_f();
        let mut values = vec![
            ("prob_theta", prob_theta(0.0, &slow, tol)?),
            ("total_rate", total_rate(&slow, tol)?),
            ("power", power(&slow, tol)?),
        ];
        for m in [0.5, 2.0, 10.0] {
            values.push(("prob_p", prob_p(PlanarVector::from_polar(m * p_scale, 0.0), &slow, tol)?));
        }
        for (name, value) in values {
            if !value.is_zero() {
                nonzero.push(format!("{name} at v = {ratio} v_F"));
            }
        }
    }
    let detail = if nonzero.is_empty() {
        "all observables exactly zero at v/v_F = 0.5 0.9 1.0".to_string()
    } else {
        format!("nonzero: {}", nonzero.join("; "))
    };
    Ok(Check::new("threshold", nonzero.is_empty(), detail))
}

/// Largest `P(p)` over a uniform grid of `theta_p` in `[0, π]`, at fixed `|p|`.
pub fn angular_maximum(p_mod: f64, params: &ModelParams, tol: Tolerance, points: usize) -> Result<Scaled, CliError> {
    let values = (0..=points)
        .into_par_iter()
        .map(|k| prob_p(PlanarVector::from_polar(p_mod, PI * k as f64 / points as f64), params, tol))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(values.into_iter().fold(Scaled::ZERO, |best, d| {
        if !d.is_zero() && (best.is_zero() || d.ratio(&best) > 1.0) {
            d
        } else {
            best
        }
    }))
}

/// `P(p)` at the vanishing direction relative to the per-`|p|` maximum.
pub fn vanishing_ratio(p_mod: f64, params: &ModelParams, tol: Tolerance) -> Result<Option<f64>, CliError> {
    let Some(theta0) = theta_p_zero(p_mod, params) else {
        return Ok(None);
    };
    let at_zero = prob_p(PlanarVector::from_polar(p_mod, theta0), params, tol)?;
    let max = angular_maximum(p_mod, params, tol, 720)?;
    Ok(Some(if at_zero.is_zero() { 0.0 } else { at_zero.ratio(&max) }))
}

pub fn vanishing_angle(params: &ModelParams, tol: Tolerance) -> Result<Check, CliError> {
    const NAME: &str = "vanishing angle";
    if !params.is_above_threshold() {
        return Ok(Check::skip(NAME, "density identically zero below threshold"));
    }
    let s_min = params.threshold_momentum()?;
    let mut parts = Vec::new();
    let mut pass = true;
    let mut tested = 0;
    for m in VANISHING_MOMENTA {
        let p_mod = m * params.omega() / params.v_f();
        if p_mod < VANISHING_MIN_OVER_THRESHOLD * s_min {
            parts.push(format!("|p| = {m} Omega/v_F skipped (too close to threshold momentum)"));
            continue;
        }
        match vanishing_ratio(p_mod, params, tol)? {
            Some(r) => {
                tested += 1;
                pass &= r < VANISHING_LIMIT;
                if r == 0.0 {
                    parts.push(format!("|p| = {m} Omega/v_F: ratio underflows (< 1e-300)"));
                } else {
                    parts.push(format!("|p| = {m} Omega/v_F: ratio {r:.2e}"));
                }
            }
            None => parts.push(format!("|p| = {m} Omega/v_F has no vanishing direction")),
        }
    }
    if tested == 0 {
        return Ok(Check::skip(NAME, &parts.join("; ")));
    }
    Ok(Check::new(NAME, pass, parts.join("; ")))
}

/// Ratios `X(Ω) / X(1)` for the homogeneity laws at fixed `a Ω`, with their expected values.
pub fn scaling_ratios(params: &ModelParams, omega: f64, tol: Tolerance) -> Result<Vec<(&'static str, f64, f64)>, CliError> {
    let base = params.with_omega_at_fixed_a_omega(1.0)?;
    let scaled = params.with_omega_at_fixed_a_omega(omega)?;
    let p1 = PlanarVector::from_polar(1.5 * base.threshold_momentum()?, 0.05);
    let p = PlanarVector::new(omega * p1.px, omega * p1.py);
    Ok(vec![
        ("prob_p", prob_p(p, &scaled, tol)?.ratio(&prob_p(p1, &base, tol)?), 1.0),
        ("prob_theta", prob_theta(0.05, &scaled, tol)?.ratio(&prob_theta(0.05, &base, tol)?), omega * omega),
        ("total_rate", total_rate(&scaled, tol)?.ratio(&total_rate(&base, tol)?), omega * omega),
        ("power", power(&scaled, tol)?.ratio(&power(&base, tol)?), omega.powi(3)),
    ])
}

pub fn scaling(params: &ModelParams, tol: Tolerance) -> Result<Check, CliError> {
    const NAME: &str = "scaling laws";
    if !params.is_above_threshold() {
        return Ok(Check::skip(NAME, "all observables zero below threshold"));
    }
    let mut worst = 0.0f64;
    // 0.5 and 2 rescale every input exactly, so 3 is added as a non-trivial case
    for omega in [0.5, 2.0, 3.0] {
        for (_, ratio, want) in scaling_ratios(params, omega, tol)? {
            worst = worst.max((ratio / want - 1.0).abs());
        }
    }
    Ok(Check::new(
        NAME,
        worst < SCALING_LIMIT,
        format!("Omega in {{0.5, 2, 3}} at fixed a*Omega; max relative deviation {worst:.2e}"),
    ))
}

pub fn mirror_symmetry(params: &ModelParams, tol: Tolerance) -> Result<Check, CliError> {
    const NAME: &str = "mirror symmetry";
    if !params.is_above_threshold() {
        return Ok(Check::skip(NAME, "density identically zero below threshold"));
    }
    let mut worst = 0.0f64;
    for theta in [0.05, 0.5, 2.0] {
        let a = prob_theta(theta, params, tol)?;
        let b = prob_theta(TAU - theta, params, tol)?;
        if !(a.is_zero() && b.is_zero()) {
            worst = worst.max((a.ratio(&b) - 1.0).abs());
        }
    }
    Ok(Check::new(
        NAME,
        worst <= 10.0 * tol.rel,
        format!("P(theta) vs P(2 pi - theta); max relative deviation {worst:.2e}"),
    ))
}

pub fn run_suite(params: &ModelParams, tol: Tolerance, flip_velocity_sign: bool) -> Result<Vec<Check>, CliError> {
    let convention = if flip_velocity_sign {
        VelocityConvention::Flipped
    } else {
        VelocityConvention::Covariant
    };
    Ok(vec![
        oracle_constancy(params, convention, 200)?,
        positivity(params, 10_000)?,
        exchange_symmetry(params, 1000)?,
        threshold(params, tol)?,
        vanishing_angle(params, tol)?,
        mirror_symmetry(params, tol)?,
        scaling(params, tol)?,
    ])
}
