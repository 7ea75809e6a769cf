//! Pair kinematics on the graphene sheet.
//!
//! The atom velocity points along `+x`; every angle is measured from it and
//! normalised to `[0, 2π)`. Energies and momenta carry the units of `omega`.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Neg, Sub};

use log::warn;

use crate::error::{Error, Result};

/// Width of the excluded band around `v cos(theta_q) = v_F`.
pub const DEFAULT_ANGLE_GUARD: f64 = 1e-12;

/// Speeds above this value are outside the non-relativistic regime the
/// model assumes; they are accepted with a warning.
pub const NONRELATIVISTIC_LIMIT: f64 = 0.1;

/// Multiplier converting single two-component results to the full set of
/// flavours. Both conventions are in circulation; `TwoN` is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FlavourFactor {
    #[default]
    TwoN,
    FourN,
}

impl FlavourFactor {
    pub fn multiplier(self, n_flavours: u32) -> f64 {
        match self {
            FlavourFactor::TwoN => 2.0 * n_flavours as f64,
            FlavourFactor::FourN => 4.0 * n_flavours as f64,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FlavourFactor::TwoN => "2N",
            FlavourFactor::FourN => "4N",
        }
    }
}

impl std::str::FromStr for FlavourFactor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "2N" | "2n" => Ok(FlavourFactor::TwoN),
            "4N" | "4n" => Ok(FlavourFactor::FourN),
            other => Err(Error::InvalidParams(format!(
                "flavour factor must be 2N or 4N, got {other:?}"
            ))),
        }
    }
}

/// Physical configuration of the atom and the sheet.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    v: f64,
    v_f: f64,
    omega: f64,
    a: f64,
    n_flavours: u32,
    flavour_factor: FlavourFactor,
}

impl ModelParams {
    /// Validated constructor with one flavour and the `2N` convention.
    pub fn new(v: f64, v_f: f64, omega: f64, a: f64) -> Result<Self> {
        let params = ModelParams {
            v,
            v_f,
            omega,
            a,
            n_flavours: 1,
            flavour_factor: FlavourFactor::TwoN,
        };
        params.validate()?;
        if v > NONRELATIVISTIC_LIMIT {
            warn!("atom speed v = {v} exceeds {NONRELATIVISTIC_LIMIT}; the model is non-relativistic");
        }
        Ok(params)
    }

    /// Parameters in units where `omega = 1`, with the height given as `a * omega`.
    pub fn reduced(v: f64, v_f: f64, a_omega: f64) -> Result<Self> {
        Self::new(v, v_f, 1.0, a_omega)
    }

    pub fn with_flavours(mut self, n_flavours: u32, factor: FlavourFactor) -> Result<Self> {
        self.n_flavours = n_flavours;
        self.flavour_factor = factor;
        self.validate()?;
        Ok(self)
    }

    pub fn with_velocity(self, v: f64) -> Result<Self> {
        Self::new(v, self.v_f, self.omega, self.a)?.with_flavours(self.n_flavours, self.flavour_factor)
    }

    /// Same configuration at a different `omega`, keeping `a * omega` fixed.
    pub fn with_omega_at_fixed_a_omega(self, omega: f64) -> Result<Self> {
        Self::new(self.v, self.v_f, omega, self.a_omega() / omega)?
            .with_flavours(self.n_flavours, self.flavour_factor)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.v > 0.0 && self.v < 1.0) {
            return bad(format!("atom speed must lie in (0, 1), got {}", self.v));
        }
        if !(self.v_f > 0.0 && self.v_f < 1.0) {
            return bad(format!("Fermi speed must lie in (0, 1), got {}", self.v_f));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return bad(format!("omega must be positive, got {}", self.omega));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return bad(format!("atom height must be positive, got {}", self.a));
        }
        if self.n_flavours == 0 {
            return bad("flavour count must be at least 1".into());
        }
        Ok(())
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn v_f(&self) -> f64 {
        self.v_f
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn a_omega(&self) -> f64 {
        self.a * self.omega
    }

    pub fn n_flavours(&self) -> u32 {
        self.n_flavours
    }

    pub fn flavour_factor(&self) -> FlavourFactor {
        self.flavour_factor
    }

    pub fn flavour_multiplier(&self) -> f64 {
        self.flavour_factor.multiplier(self.n_flavours)
    }

    pub fn is_above_threshold(&self) -> bool {
        self.v > self.v_f
    }

    pub(crate) fn require_above_threshold(&self) -> Result<()> {
        if self.is_above_threshold() {
            Ok(())
        } else {
            Err(Error::BelowThreshold {
                v: self.v,
                v_f: self.v_f,
            })
        }
    }

    pub fn velocity(&self) -> PlanarVector {
        PlanarVector::new(self.v, 0.0)
    }

    /// Smallest total momentum modulus `|p|+|q|` compatible with `chi = 0`.
    pub fn threshold_momentum(&self) -> Result<f64> {
        self.require_above_threshold()?;
        Ok(self.omega / (self.v - self.v_f))
    }
}

/// In-plane momentum.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanarVector {
    pub px: f64,
    pub py: f64,
}

impl PlanarVector {
    pub const ZERO: PlanarVector = PlanarVector { px: 0.0, py: 0.0 };

    pub fn new(px: f64, py: f64) -> Self {
        PlanarVector { px, py }
    }

    pub fn from_polar(modulus: f64, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        PlanarVector::new(modulus * c, modulus * s)
    }

    pub fn modulus(&self) -> f64 {
        self.px.hypot(self.py)
    }

    pub fn modulus_sq(&self) -> f64 {
        self.px * self.px + self.py * self.py
    }

    /// Polar angle in `[0, 2π)`.
    pub fn angle(&self) -> f64 {
        normalize_angle(self.py.atan2(self.px))
    }

    pub fn dot(&self, other: PlanarVector) -> f64 {
        self.px * other.px + self.py * other.py
    }

    pub fn rotated(&self, angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        PlanarVector::new(c * self.px - s * self.py, s * self.px + c * self.py)
    }

    /// Mirror image through the velocity axis.
    pub fn reflected(&self) -> Self {
        PlanarVector::new(self.px, -self.py)
    }
}

impl Add for PlanarVector {
    type Output = PlanarVector;
    fn add(self, rhs: PlanarVector) -> PlanarVector {
        PlanarVector::new(self.px + rhs.px, self.py + rhs.py)
    }
}

impl Sub for PlanarVector {
    type Output = PlanarVector;
    fn sub(self, rhs: PlanarVector) -> PlanarVector {
        PlanarVector::new(self.px - rhs.px, self.py - rhs.py)
    }
}

impl Neg for PlanarVector {
    type Output = PlanarVector;
    fn neg(self) -> PlanarVector {
        PlanarVector::new(-self.px, -self.py)
    }
}

impl Mul<PlanarVector> for f64 {
    type Output = PlanarVector;
    fn mul(self, rhs: PlanarVector) -> PlanarVector {
        PlanarVector::new(self * rhs.px, self * rhs.py)
    }
}

/// Map any angle onto `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Fermion and antifermion momenta with massless on-shell energies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnShellPair {
    pub p: PlanarVector,
    pub q: PlanarVector,
    pub p0: f64,
    pub q0: f64,
}

impl OnShellPair {
    pub fn new(p: PlanarVector, q: PlanarVector, v_f: f64) -> Self {
        OnShellPair {
            p,
            q,
            p0: v_f * p.modulus(),
            q0: v_f * q.modulus(),
        }
    }

    /// Pair with `|q|` fixed by `chi = 0` at the given antifermion angle.
    pub fn constrained(p: PlanarVector, theta_q: f64, params: &ModelParams) -> Result<Self> {
        let q_mod = q0_of(p, theta_q, params)?;
        Ok(OnShellPair::new(
            p,
            PlanarVector::from_polar(q_mod, theta_q),
            params.v_f(),
        ))
    }

    pub fn total(&self) -> PlanarVector {
        self.p + self.q
    }

    pub fn swapped(&self) -> Self {
        OnShellPair {
            p: self.q,
            q: self.p,
            p0: self.q0,
            q0: self.p0,
        }
    }

    /// Fermion-pair energy deposited in the sheet.
    pub fn energy(&self) -> f64 {
        self.p0 + self.q0
    }
}

/// Energy-conservation argument `chi(p, q)`; its zeros are the physical pairs.
pub fn chi(pair: &OnShellPair, params: &ModelParams) -> f64 {
    chi_with_velocity(pair, params.velocity(), params.omega())
}

/// `chi` for an arbitrary in-plane atom velocity.
pub fn chi_with_velocity(pair: &OnShellPair, velocity: PlanarVector, omega: f64) -> f64 {
    omega + pair.p0 + pair.q0 - pair.total().dot(velocity)
}

/// `s(p) = omega + |p| (v_F - v cos(theta_p))`.
pub fn s_of_p(p: PlanarVector, params: &ModelParams) -> f64 {
    s_with_velocity(p, params.velocity(), params.v_f(), params.omega())
}

pub fn s_with_velocity(p: PlanarVector, velocity: PlanarVector, v_f: f64, omega: f64) -> f64 {
    omega + v_f * p.modulus() - p.dot(velocity)
}

/// Half-opening angle of the emission cone, `arccos(v_F / v)`.
pub fn alpha(params: &ModelParams) -> Result<f64> {
    params.require_above_threshold()?;
    Ok((params.v_f() / params.v()).acos())
}

/// Antifermion modulus solving `chi = 0` at fixed `p` and `theta_q`.
///
/// A negative result means `theta_q` is outside the allowed region for the
/// sign of `s(p)`.
pub fn q0_of(p: PlanarVector, theta_q: f64, params: &ModelParams) -> Result<f64> {
    q0_of_guarded(p, theta_q, params, DEFAULT_ANGLE_GUARD)
}

pub fn q0_of_guarded(p: PlanarVector, theta_q: f64, params: &ModelParams, guard: f64) -> Result<f64> {
    let w = params.v() * theta_q.cos() - params.v_f();
    if w.abs() < guard {
        return Err(Error::DegenerateAngle { theta_q, guard });
    }
    Ok(s_of_p(p, params) / w)
}

/// Sign of `s(p)`, selecting a branch of the allowed antifermion angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Zero,
    Negative,
}

impl Sign {
    pub fn of(x: f64) -> Sign {
        if x > 0.0 {
            Sign::Positive
        } else if x < 0.0 {
            Sign::Negative
        } else {
            Sign::Zero
        }
    }
}

/// Antifermion angles for which `q0_of` is positive, as open intervals in `[0, 2π)`.
pub fn allowed_region(sign: Sign, params: &ModelParams) -> Result<Vec<(f64, f64)>> {
    let alpha = alpha(params)?;
    Ok(match sign {
        Sign::Positive => vec![(0.0, alpha), (TAU - alpha, TAU)],
        Sign::Negative => vec![(alpha, TAU - alpha)],
        Sign::Zero => Vec::new(),
    })
}

/// Whether `theta_q` lies strictly inside the allowed region for this sign.
pub fn in_allowed_region(theta_q: f64, sign: Sign, params: &ModelParams) -> Result<bool> {
    let theta = normalize_angle(theta_q);
    Ok(allowed_region(sign, params)?.iter().any(|&(lo, hi)| {
        // the closed end at 0 belongs to the positive branch
        (theta > lo || (lo == 0.0 && theta == 0.0)) && theta < hi
    }))
}

/// `-(p+q)^2 = |p+q|^2 - (p0+q0)^2`, without any sign check.
pub fn spacelike_norm_sq(pair: &OnShellPair) -> f64 {
    let k0 = pair.p0 + pair.q0;
    pair.total().modulus_sq() - k0 * k0
}

/// `sqrt(-(p+q)^2)`.
pub fn spacelike_norm(pair: &OnShellPair) -> Result<f64> {
    let minus_k_sq = spacelike_norm_sq(pair);
    if minus_k_sq < 0.0 {
        return Err(Error::NotSpacelike { minus_k_sq });
    }
    Ok(minus_k_sq.sqrt())
}

/// Analytic lower bound on `spacelike_norm` over pairs with `chi = 0` and
/// total modulus `S = |p| + |q|`.
pub fn spacelike_norm_bound(total_modulus: f64, params: &ModelParams) -> f64 {
    let s = total_modulus;
    let along_v = (params.omega() + params.v_f() * s) / params.v();
    (along_v * along_v - params.v_f() * params.v_f() * s * s).max(0.0).sqrt()
}

/// Global minimum of `spacelike_norm` on the constraint surface, reached
/// for both momenta along the velocity with `|p| + |q|` at threshold.
pub fn min_spacelike_norm(params: &ModelParams) -> Result<f64> {
    let s_min = params.threshold_momentum()?;
    Ok(s_min * (1.0 - params.v_f() * params.v_f()).sqrt())
}

/// Minimum of `spacelike_norm` on the constraint surface at fixed `|p|`.
pub fn min_spacelike_norm_at(p_mod: f64, params: &ModelParams) -> Result<f64> {
    let s_min = params.threshold_momentum()?;
    if p_mod <= s_min {
        return min_spacelike_norm(params);
    }
    // p along v, q against it, with |p| - |q| exactly saturating chi = 0
    let (v, v_f) = (params.v(), params.v_f());
    let q_mod = (p_mod * (v - v_f) - params.omega()) / (v + v_f);
    Ok(spacelike_norm_bound(p_mod + q_mod, params))
}

/// Fermion angle at which `s(p)` vanishes, or `None` if `s > 0` in every direction.
pub fn theta_p_zero(p_mod: f64, params: &ModelParams) -> Option<f64> {
    let arg = (params.v_f() + params.omega() / p_mod) / params.v();
    // tolerate rounding right at the threshold momentum
    (arg <= 1.0 + 4.0 * f64::EPSILON).then(|| arg.min(1.0).acos())
}

/// Antifermion momentum on the constraint surface with a given transverse
/// component `q_y`, for a fermion with `s(p) = s`.
///
/// `chi = 0` is a single hyperbola branch in the `q` plane, so `q_x` is
/// unique; both signs of `s` are covered.
pub fn q_from_transverse(s: f64, q_y: f64, params: &ModelParams) -> PlanarVector {
    let (v, v_f) = (params.v(), params.v_f());
    let d = (s * s + (v * v - v_f * v_f) * q_y * q_y).sqrt();
    PlanarVector::new((v * s + v_f * d) / (v * v - v_f * v_f), q_y)
}

/// `|q|` for [`q_from_transverse`], without the cancellation of `hypot(q_x, q_y)`.
pub fn q_mod_from_transverse(s: f64, q_y: f64, params: &ModelParams) -> f64 {
    let (v, v_f) = (params.v(), params.v_f());
    let d = (s * s + (v * v - v_f * v_f) * q_y * q_y).sqrt();
    (v * d + v_f * s) / (v * v - v_f * v_f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn transverse_parametrization_solves_chi() {
        let prm = params(0.0045);
        for (px, py, qy) in [(30.0, 4.0, -7.0), (900.0, 2.0, 0.5), (5.0, -60.0, 300.0)] {
            let p = PlanarVector::new(px, py);
            let s = s_of_p(p, &prm);
            let q = q_from_transverse(s, qy, &prm);
            let q_mod = q_mod_from_transverse(s, qy, &prm);
            assert!((q.modulus() - q_mod).abs() < 1e-12 * q_mod);
            let pair = OnShellPair::new(p, q, prm.v_f());
            assert!(chi(&pair, &prm).abs() < 1e-12 * (1.0 + prm.v() * (px.abs() + q_mod)));
            // and the same point is reached through the angle of q
            let back = q0_of(p, q.angle(), &prm).unwrap();
            assert!((back - q_mod).abs() < 1e-9 * q_mod);
        }
    }

    fn params(v: f64) -> ModelParams {
        ModelParams::reduced(v, 0.003, 1.0).unwrap()
    }

    #[test]
    fn chi_at_rest_is_omega() {
        let p = params(0.006);
        let pair = OnShellPair::new(PlanarVector::ZERO, PlanarVector::ZERO, p.v_f());
        assert_eq!(chi(&pair, &p), 1.0);
    }

    #[test]
    fn chi_direct_arithmetic() {
        let p = params(0.006);
        let pair = OnShellPair::new(PlanarVector::new(1.0, 0.0), PlanarVector::ZERO, p.v_f());
        assert!((chi(&pair, &p) - (1.0 - 0.003)).abs() < 1e-15);
    }

    #[test]
    fn s_examples() {
        let p = params(0.006);
        assert_eq!(s_of_p(PlanarVector::ZERO, &p), 1.0);
        let s = s_of_p(PlanarVector::new(10.0, 0.0), &p);
        assert!((s - 0.97).abs() < 1e-14);
    }

    #[test]
    fn alpha_values() {
        assert!((alpha(&params(0.006)).unwrap() - PI / 3.0).abs() < 1e-14);
        // arccos(2/3) = 0.8410686705679303
        assert!((alpha(&params(0.0045)).unwrap() - 0.841_068_670_567_930_3).abs() < 1e-14);
        assert!(alpha(&params(0.003 * (1.0 + 1e-12))).unwrap() < 1e-5);
        assert!(matches!(alpha(&params(0.003)), Err(Error::BelowThreshold { .. })));
    }

    #[test]
    fn q0_sign_and_guard() {
        let p = params(0.006);
        let mom = PlanarVector::new(10.0, 0.0);
        let forward = q0_of(mom, 0.0, &p).unwrap();
        assert!((forward - 0.97 / 0.003).abs() < 1e-10);
        let backward = q0_of(mom, PI, &p).unwrap();
        assert!((backward - 0.97 / -0.009).abs() < 1e-12);
        assert!(backward < 0.0);
        let a = alpha(&p).unwrap();
        assert!(matches!(
            q0_of(mom, a, &p),
            Err(Error::DegenerateAngle { .. })
        ));
    }

    #[test]
    fn q0_vanishes_on_zero_angle() {
        let p = params(0.006);
        let pm = 500.0;
        let th = theta_p_zero(pm, &p).unwrap();
        let mom = PlanarVector::from_polar(pm, th);
        assert!(s_of_p(mom, &p).abs() < 1e-12);
        for theta_q in [0.1, 0.5, 2.0, 3.0] {
            assert!(q0_of(mom, theta_q, &p).unwrap().abs() < 1e-9);
        }
    }

    #[test]
    fn regions() {
        let p = params(0.006);
        let a = PI / 3.0;
        let pos = allowed_region(Sign::Positive, &p).unwrap();
        assert!((pos[0].1 - a).abs() < 1e-14 && (pos[1].0 - (TAU - a)).abs() < 1e-14);
        let neg = allowed_region(Sign::Negative, &p).unwrap();
        assert!((neg[0].0 - a).abs() < 1e-14 && (neg[0].1 - (TAU - a)).abs() < 1e-14);
        assert!(allowed_region(Sign::Zero, &p).unwrap().is_empty());
        assert!(matches!(
            allowed_region(Sign::Positive, &params(0.002)),
            Err(Error::BelowThreshold { .. })
        ));
        // union covers the circle minus the two boundary points
        for i in 0..1000 {
            let th = (i as f64 + 0.5) * TAU / 1000.0;
            let in_pos = in_allowed_region(th, Sign::Positive, &p).unwrap();
            let in_neg = in_allowed_region(th, Sign::Negative, &p).unwrap();
            assert!(in_pos ^ in_neg, "theta = {th}");
        }
        assert!(in_allowed_region(0.0, Sign::Positive, &p).unwrap());
        let a = alpha(&p).unwrap();
        assert!(!in_allowed_region(a, Sign::Positive, &p).unwrap());
        assert!(!in_allowed_region(a, Sign::Negative, &p).unwrap());
    }

    #[test]
    fn spacelike_examples() {
        let vf = 0.003;
        let k = 7.0;
        let pair = OnShellPair::new(PlanarVector::new(k, 0.0), PlanarVector::new(k, 0.0), vf);
        let expect = 2.0 * k * (1.0 - vf * vf).sqrt();
        assert!((spacelike_norm(&pair).unwrap() - expect).abs() < 1e-13);
        let zero = OnShellPair::new(PlanarVector::ZERO, PlanarVector::ZERO, vf);
        assert_eq!(spacelike_norm(&zero).unwrap(), 0.0);
        // back-to-back with equal moduli is time-like
        let bb = OnShellPair::new(PlanarVector::new(1.0, 0.0), PlanarVector::new(-1.0, 0.0), vf);
        assert!(matches!(spacelike_norm(&bb), Err(Error::NotSpacelike { .. })));
    }

    #[test]
    fn theta_zero_examples() {
        let p = params(0.006);
        // (v_F + 1/|p|)/v = 1 at |p| = 1/(v - v_F)
        let edge = 1.0 / (0.006 - 0.003);
        assert!(theta_p_zero(edge, &p).unwrap() < 1e-6);
        assert!(theta_p_zero(0.5 * edge, &p).is_none());
        let big = theta_p_zero(1000.0, &p).unwrap();
        assert!((big - (2.0f64 / 3.0).acos()).abs() < 1e-14);
        let huge = theta_p_zero(1e12, &p).unwrap();
        assert!((huge - alpha(&p).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn min_norm_matches_collinear_configuration() {
        let p = params(0.0045);
        let s_min = p.threshold_momentum().unwrap();
        let x = 0.3 * s_min;
        let pair = OnShellPair::new(
            PlanarVector::new(x, 0.0),
            PlanarVector::new(s_min - x, 0.0),
            p.v_f(),
        );
        assert!(chi(&pair, &p).abs() < 1e-9);
        let n = spacelike_norm(&pair).unwrap();
        assert!((n - min_spacelike_norm(&p).unwrap()).abs() < 1e-9 * n);
        // beyond threshold the optimum is back-to-back
        let x = 3.0 * s_min;
        let q = (x * (p.v() - p.v_f()) - 1.0) / (p.v() + p.v_f());
        let pair = OnShellPair::new(PlanarVector::new(x, 0.0), PlanarVector::new(-q, 0.0), p.v_f());
        assert!(chi(&pair, &p).abs() < 1e-9);
        let n = spacelike_norm(&pair).unwrap();
        assert!((n - min_spacelike_norm_at(x, &p).unwrap()).abs() < 1e-9 * n);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ModelParams::new(0.0, 0.003, 1.0, 1.0).is_err());
        assert!(ModelParams::new(0.004, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::new(0.004, 0.003, -1.0, 1.0).is_err());
        assert!(ModelParams::new(0.004, 0.003, 1.0, 0.0).is_err());
        assert!(params(0.004).with_flavours(0, FlavourFactor::TwoN).is_err());
        assert_eq!("4N".parse::<FlavourFactor>().unwrap(), FlavourFactor::FourN);
        assert!("3N".parse::<FlavourFactor>().is_err());
    }
}
