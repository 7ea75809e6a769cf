//! Spin- and polarisation-summed squared matrix element.
//!
//! Two independent routes are provided: the closed form `F(p, q; omega)` and
//! a brute-force trace over explicit 2×2 Dirac matrices built from the
//! amplitude ingredients. They agree up to the frozen constant
//! [`TRACE_ORACLE_RATIO`].

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gamma::{GammaBasis, Mat2, ETA};
use crate::kinematics::{spacelike_norm_sq, ModelParams, OnShellPair, PlanarVector};

/// `F e^{-2an} / (p0 q0 · trace_oracle)`; the trace carries `|π|²` from the
/// polarisation-tensor prefactor.
pub const TRACE_ORACLE_RATIO: f64 = 1.0 / (PI * PI);

/// Moduli below this are treated as zero in `f_reduced`.
pub const ZERO_MOMENTUM: f64 = 1e-30;

/// Whether the velocity-dependent (Röntgen) part of the dipole coupling is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RontgenCoupling {
    #[default]
    Included,
    Ignored,
}

/// Component convention for `v_sigma` in `eta_{sigma 0} + v_sigma`.
///
/// `Covariant` lowers the index with the metric, `v_sigma = (0, -v)`; it is
/// the one that reproduces the closed form. `Flipped` is kept as a negative
/// control and `Off` drops the Röntgen part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VelocityConvention {
    #[default]
    Covariant,
    Flipped,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    ClosedForm,
    TraceOracle,
}

/// Non-negative squared element stored as `mantissa * exp(ln_scale)` so that
/// the exponential suppression does not underflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquaredElement {
    pub mantissa: f64,
    pub ln_scale: f64,
    pub provenance: Provenance,
}

impl SquaredElement {
    pub fn value(&self) -> f64 {
        self.mantissa * self.ln_scale.exp()
    }
}

fn minus_k_sq_checked(pair: &OnShellPair) -> Result<f64> {
    let minus_k_sq = spacelike_norm_sq(pair);
    if minus_k_sq > 0.0 {
        Ok(minus_k_sq)
    } else {
        Err(Error::NotSpacelike { minus_k_sq })
    }
}

/// Closed-form `F(p, q; omega)` with the Röntgen term included.
pub fn f_closed_form(pair: &OnShellPair, params: &ModelParams) -> Result<SquaredElement> {
    f_closed_form_with(pair, params, RontgenCoupling::Included)
}

pub fn f_closed_form_with(
    pair: &OnShellPair,
    params: &ModelParams,
    coupling: RontgenCoupling,
) -> Result<SquaredElement> {
    let minus_k_sq = minus_k_sq_checked(pair)?;
    let value = closed_form_value(pair, params, coupling, minus_k_sq);
    Ok(SquaredElement {
        mantissa: value,
        ln_scale: 0.0,
        provenance: Provenance::ClosedForm,
    })
}

/// Unchecked evaluation; `minus_k_sq` must be positive.
pub(crate) fn closed_form_value(
    pair: &OnShellPair,
    params: &ModelParams,
    coupling: RontgenCoupling,
    minus_k_sq: f64,
) -> f64 {
    let vel = match coupling {
        RontgenCoupling::Included => params.velocity(),
        RontgenCoupling::Ignored => PlanarVector::ZERO,
    };
    let (p, q, p0, q0) = (pair.p, pair.q, pair.p0, pair.q0);
    let omega = params.omega();
    let vf2 = params.v_f() * params.v_f();
    let k = p + q;

    let pv = p0 - vf2 * p.dot(vel);
    let qv = q0 - vf2 * q.dot(vel);
    let pq = p0 * q0 - vf2 * p.dot(q);
    let vv = 1.0 - vf2 * vel.modulus_sq();

    let dipole = (k.modulus_sq() + minus_k_sq) * (pv * qv - 0.5 * vv * pq);
    let oscillator = omega * omega * vf2 * p0 * q0;
    let cross = omega * vf2 * k.dot(qv * p + pv * q - pq * vel);
    let value = (dipole + oscillator + cross) / minus_k_sq;

    debug_assert!(
        value >= -1e-9 * (dipole.abs() + oscillator.abs() + cross.abs()) / minus_k_sq,
        "negative F = {value} for {pair:?}"
    );
    value
}

/// `f = F / (v_F² |p| |q|)`.
pub fn f_reduced(pair: &OnShellPair, params: &ModelParams) -> Result<f64> {
    let (pm, qm) = (pair.p.modulus(), pair.q.modulus());
    for modulus in [pm, qm] {
        if modulus < ZERO_MOMENTUM {
            return Err(Error::ZeroMomentum { modulus });
        }
    }
    let f = f_closed_form(pair, params)?.mantissa;
    Ok(f / (params.v_f() * params.v_f() * pm * qm))
}

/// `g = exp(-2a sqrt(-(p+q)^2)) f`.
pub fn g_weight(pair: &OnShellPair, params: &ModelParams) -> Result<f64> {
    g_weight_shifted(pair, params, 0.0)
}

/// `g` multiplied by `exp(ln_shift)`, for use far below the underflow limit.
pub fn g_weight_shifted(pair: &OnShellPair, params: &ModelParams, ln_shift: f64) -> Result<f64> {
    let f = f_reduced(pair, params)?;
    let norm = minus_k_sq_checked(pair)?.sqrt();
    Ok((ln_shift - 2.0 * params.a() * norm).exp() * f)
}

/// `I_{sigma i}(p+q)` for `sigma` in `0..4` and oscillator direction `i` in `1..=3`.
///
/// Entries are stored without the common factor `π exp(-a sqrt(-(p+q)^2))`,
/// which is kept as its logarithm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationTensor {
    reduced: [[Complex64; 3]; 4],
    pub ln_prefactor: f64,
}

impl PolarizationTensor {
    pub fn reduced_entry(&self, sigma: usize, i: usize) -> Complex64 {
        self.reduced[sigma][i - 1]
    }

    pub fn entry(&self, sigma: usize, i: usize) -> Complex64 {
        self.reduced_entry(sigma, i) * self.ln_prefactor.exp()
    }

    pub fn prefactor(&self) -> f64 {
        self.ln_prefactor.exp()
    }
}

pub fn polarization_tensor(pair: &OnShellPair, params: &ModelParams) -> Result<PolarizationTensor> {
    polarization_tensor_with(pair, params, VelocityConvention::Covariant)
}

pub fn polarization_tensor_with(
    pair: &OnShellPair,
    params: &ModelParams,
    convention: VelocityConvention,
) -> Result<PolarizationTensor> {
    let norm = minus_k_sq_checked(pair)?.sqrt();
    let vel = params.velocity();
    let v_lower = match convention {
        VelocityConvention::Covariant => [0.0, -vel.px, -vel.py, 0.0],
        VelocityConvention::Flipped => [0.0, vel.px, vel.py, 0.0],
        VelocityConvention::Off => [0.0; 4],
    };
    let k = pair.total();
    // covariant in-plane components of p+q
    let k_lower = [-k.px, -k.py];
    let omega = params.omega();

    let mut reduced = [[Complex64::new(0.0, 0.0); 3]; 4];
    for (sigma, row) in reduced.iter_mut().enumerate() {
        let c = (if sigma == 0 { 1.0 } else { 0.0 }) + v_lower[sigma];
        for i in 1..=2 {
            let eta_si = if sigma == i { ETA[i] } else { 0.0 };
            row[i - 1] = Complex64::from((omega * eta_si + k_lower[i - 1] * c) / norm);
        }
        row[2] = Complex64::new(0.0, c);
    }
    Ok(PolarizationTensor {
        reduced,
        ln_prefactor: PI.ln() - params.a() * norm,
    })
}

/// Brute-force spin and oscillator sum of `|K^sigma I_{sigma i}|^2` with the
/// covariant velocity convention.
pub fn trace_oracle(pair: &OnShellPair, params: &ModelParams, basis: &GammaBasis) -> Result<SquaredElement> {
    trace_oracle_with(pair, params, basis, VelocityConvention::Covariant)
}

/// Spin sums are taken in the massless limit, where
/// `sum |u-bar Γ v|^2 -> Tr[Γ (ρ·γ·q) Γ-bar (ρ·γ·p)] / (4 p0 q0)`
/// after the `m^2 / (2m)^2` cancellation against the amplitude normalisation.
pub fn trace_oracle_with(
    pair: &OnShellPair,
    params: &ModelParams,
    basis: &GammaBasis,
    convention: VelocityConvention,
) -> Result<SquaredElement> {
    let (p0, q0) = (pair.p0, pair.q0);
    for (e, v) in [(p0, pair.p), (q0, pair.q)] {
        if e <= 0.0 {
            return Err(Error::ZeroMomentum { modulus: v.modulus() });
        }
    }
    let tensor = polarization_tensor_with(pair, params, convention)?;
    let v_f = params.v_f();
    let lower = |e: f64, m: PlanarVector| {
        [e, -v_f * m.px, -v_f * m.py].map(Complex64::from)
    };
    let p_slash = basis.slash(lower(p0, pair.p));
    let q_slash = basis.slash(lower(q0, pair.q));

    let mut total = Complex64::new(0.0, 0.0);
    for i in 1..=3 {
        let vertex = (0..3).fold(Mat2::ZERO, |acc, sigma| {
            acc + basis.gamma[sigma].scale(basis.rho[sigma] * tensor.reduced_entry(sigma, i))
        });
        total += (vertex * q_slash * basis.bar(&vertex) * p_slash).trace();
    }
    debug_assert!(total.im.abs() <= 1e-9 * total.norm().max(f64::MIN_POSITIVE));
    Ok(SquaredElement {
        mantissa: total.re / (4.0 * p0 * q0),
        ln_scale: 2.0 * tensor.ln_prefactor,
        provenance: Provenance::TraceOracle,
    })
}

/// `F e^{-2an} / (p0 q0 · trace)`, evaluated without underflow.
pub fn oracle_ratio(closed: &SquaredElement, oracle: &SquaredElement, pair: &OnShellPair, params: &ModelParams) -> Result<f64> {
    let norm = minus_k_sq_checked(pair)?.sqrt();
    let ln_ratio = closed.ln_scale - 2.0 * params.a() * norm - oracle.ln_scale;
    Ok(closed.mantissa / (pair.p0 * pair.q0 * oracle.mantissa) * ln_ratio.exp())
}
