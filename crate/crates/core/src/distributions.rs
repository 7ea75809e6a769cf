//! Pair-creation observables.
//!
//! The joint density of the pair is `Ω⁻¹ g(p, q) δ(chi)` per unit `d²p d²q`.
//! Every observable is returned as a [`Scaled`] whose exponent absorbs the
//! smallest value of `exp(-2a sqrt(-(p+q)^2))` on the relevant part of the
//! constraint surface. Below threshold all observables are exactly zero.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kinematics::{
    alpha, min_spacelike_norm, min_spacelike_norm_at, q_from_transverse, q_mod_from_transverse, s_of_p,
    spacelike_norm_sq, theta_p_zero, ModelParams, OnShellPair, PlanarVector, DEFAULT_ANGLE_GUARD,
};
use crate::matrix_element::{g_weight_shifted, ZERO_MOMENTUM};
use crate::quadrature::{try_integrate_indexed, try_integrate_spans, QuadResult, Span, Tolerance, NESTED_TIGHTENING};
use crate::scaled::Scaled;

/// Mantissas below this trigger a recomputation with a direction-specific exponent.
const SMALL_MANTISSA: f64 = 1e-200;

/// Which power of the pair momentum weights the density.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Moment {
    Count,
    /// `|p| + |q|`
    Modulus,
}

impl Moment {
    #[inline]
    fn factor(self, p_mod: f64, q_mod: f64) -> f64 {
        match self {
            Moment::Count => 1.0,
            Moment::Modulus => p_mod + q_mod,
        }
    }
}

/// Physics integrands have arbitrary overall scale; only relative accuracy is meaningful.
fn relative_only(tol: Tolerance) -> Tolerance {
    tol.with_abs(f64::MIN_POSITIVE)
}

fn with_inner_budget(mut r: QuadResult, inner: Tolerance) -> QuadResult {
    r.abs_error_estimate += inner.rel * r.value.abs();
    r
}

/// `2a` times the smallest space-like norm on the whole constraint surface.
pub fn global_ln_shift(params: &ModelParams) -> Result<f64> {
    Ok(2.0 * params.a() * min_spacelike_norm(params)?)
}

/// Joint density in `(p, theta_q)` after the delta function has fixed `|q|`:
/// `Ω⁻¹ |s| g / (v cos(theta_q) - v_F)²`. Zero outside the allowed region.
pub fn density_p_thetaq(p: PlanarVector, theta_q: f64, params: &ModelParams) -> Result<f64> {
    density_p_thetaq_shifted(p, theta_q, params, 0.0)
}

/// [`density_p_thetaq`] multiplied by `exp(ln_shift)`.
pub fn density_p_thetaq_shifted(p: PlanarVector, theta_q: f64, params: &ModelParams, ln_shift: f64) -> Result<f64> {
    params.require_above_threshold()?;
    let s = s_of_p(p, params);
    let w = params.v() * theta_q.cos() - params.v_f();
    if w.abs() < DEFAULT_ANGLE_GUARD || s * w <= 0.0 {
        return Ok(0.0);
    }
    let q_mod = s / w;
    if q_mod < ZERO_MOMENTUM {
        return Ok(0.0);
    }
    let pair = OnShellPair::new(p, PlanarVector::from_polar(q_mod, theta_q), params.v_f());
    let g = g_weight_shifted(&pair, params, ln_shift)?;
    Ok(s.abs() * g / (params.omega() * w * w))
}

/// The same density near the cone edge, per unit `|q|` instead of per unit angle.
fn density_p_qmod_shifted(p: PlanarVector, s: f64, q_mod: f64, upper: bool, params: &ModelParams, ln_shift: f64) -> Result<f64> {
    let v = params.v();
    let cos = ((params.v_f() + s / q_mod) / v).clamp(-1.0, 1.0);
    let sin = (1.0 - cos * cos).sqrt();
    if sin == 0.0 {
        return Ok(0.0);
    }
    let q_y = if upper { q_mod * sin } else { -q_mod * sin };
    let pair = OnShellPair::new(p, PlanarVector::new(q_mod * cos, q_y), params.v_f());
    let g = g_weight_shifted(&pair, params, ln_shift)?;
    Ok(g / (params.omega() * v * sin))
}

/// Integral over the allowed antifermion angles at fixed `p`.
///
/// Each branch is cut halfway between its centre and the cone edge; beyond
/// the cut the angle is traded for `|q|`, which runs to infinity as the
/// angle approaches `alpha`.
fn thetaq_integral(p: PlanarVector, params: &ModelParams, ln_shift: f64, moment: Moment, tol: Tolerance) -> Result<QuadResult> {
    let s = s_of_p(p, params);
    if s == 0.0 {
        return Ok(QuadResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        });
    }
    let alpha = alpha(params)?;
    let (v, v_f) = (params.v(), params.v_f());
    let x = p.modulus();
    let (theta_m, centre) = if s > 0.0 { (0.5 * alpha, 0.0) } else { (0.5 * (alpha + PI), PI) };
    let q_m = s / (v * theta_m.cos() - v_f);
    let tail = 1.0 / (2.0 * params.a());
    let spans = if s > 0.0 {
        [
            Span::finite(centre, theta_m),
            Span::finite(-theta_m, centre),
            Span::semi_infinite(q_m, tail),
            Span::semi_infinite(q_m, tail),
        ]
    } else {
        [
            Span::finite(theta_m, centre),
            Span::finite(centre, TAU - theta_m),
            Span::semi_infinite(q_m, tail),
            Span::semi_infinite(q_m, tail),
        ]
    };
    try_integrate_indexed(
        |index, y| match index {
            0 | 1 => {
                let d = density_p_thetaq_shifted(p, y, params, ln_shift)?;
                if d == 0.0 {
                    return Ok(0.0);
                }
                Ok(d * moment.factor(x, s / (v * y.cos() - v_f)))
            }
            _ => Ok(density_p_qmod_shifted(p, s, y, index == 2, params, ln_shift)? * moment.factor(x, y)),
        },
        &spans,
        tol,
    )
}

/// Single-particle momentum density `P(p)`, flavour factor included.
pub fn prob_p(p: PlanarVector, params: &ModelParams, tol: Tolerance) -> Result<Scaled> {
    if !params.is_above_threshold() {
        return Ok(Scaled::ZERO);
    }
    let x = p.modulus();
    if x < ZERO_MOMENTUM {
        return Err(Error::ZeroMomentum { modulus: x });
    }
    let shift = 2.0 * params.a() * min_spacelike_norm_at(x, params)?;
    let r = thetaq_integral(p, params, shift, Moment::Count, relative_only(tol))?;
    let flavour = params.flavour_multiplier();
    Ok(Scaled::new(flavour * r.value, flavour * r.abs_error_estimate, -shift))
}

/// `P(p)` computed by integrating over the transverse antifermion momentum
/// `q_y` instead of its angle. Independent of the angular branch structure.
pub fn prob_p_transverse(p: PlanarVector, params: &ModelParams, tol: Tolerance) -> Result<Scaled> {
    if !params.is_above_threshold() {
        return Ok(Scaled::ZERO);
    }
    let x = p.modulus();
    if x < ZERO_MOMENTUM {
        return Err(Error::ZeroMomentum { modulus: x });
    }
    let n_ref = min_spacelike_norm_at(x, params)?;
    let shift = 2.0 * params.a() * n_ref;
    let s = s_of_p(p, params);
    let width = (n_ref / (2.0 * params.a())).sqrt();
    let span = Span::semi_infinite(0.0, width);
    let r = try_integrate_indexed(
        |index, t| {
            let q_y = if index == 0 { t } else { -t };
            transverse_weight(p, s, q_y, params, shift)
        },
        &[span, span],
        relative_only(tol),
    )?;
    let flavour = params.flavour_multiplier();
    Ok(Scaled::new(flavour * r.value, flavour * r.abs_error_estimate, -shift))
}

/// `Ω⁻¹ g / |∂chi/∂q_x|` at the antifermion with transverse momentum `q_y`.
pub(crate) fn transverse_weight(p: PlanarVector, s: f64, q_y: f64, params: &ModelParams, ln_shift: f64) -> Result<f64> {
    let q = q_from_transverse(s, q_y, params);
    let q_mod = q_mod_from_transverse(s, q_y, params);
    if q_mod < ZERO_MOMENTUM {
        return Ok(0.0);
    }
    let pair = OnShellPair {
        p,
        q,
        p0: params.v_f() * p.modulus(),
        q0: params.v_f() * q_mod,
    };
    let g = g_weight_shifted(&pair, params, ln_shift)?;
    let slope = params.v() - params.v_f() * q.px / q_mod;
    Ok(g / (params.omega() * slope.abs()))
}

/// Radial integration domain at fixed `theta_p`, cut where `s` changes sign.
fn radial_spans(theta_p: f64, params: &ModelParams) -> Result<Vec<Span>> {
    let s_min = params.threshold_momentum()?;
    let decay = 1.0 / (2.0 * params.a() * (1.0 - params.v_f() / params.v()));
    let c = params.v() * theta_p.cos() - params.v_f();
    let x_s = if c > 0.0 { params.omega() / c } else { f64::INFINITY };
    Ok(if x_s.is_finite() {
        let mut spans = Span::split(0.0, x_s, &[s_min]);
        spans.push(Span::semi_infinite(x_s, decay));
        spans
    } else {
        vec![Span::finite(0.0, s_min), Span::semi_infinite(s_min, decay)]
    })
}

/// `∫ d|p| |p| ∫ dθ_q (moment) density` at fixed `theta_p`, unflavoured.
fn radial_integral(theta_p: f64, params: &ModelParams, ln_shift: f64, moment: Moment, tol: Tolerance) -> Result<QuadResult> {
    let inner = tol.tightened(NESTED_TIGHTENING);
    let (c, s) = (theta_p.cos(), theta_p.sin());
    let r = try_integrate_spans(
        |x| {
            let p = PlanarVector::new(x * c, x * s);
            Ok(x * thetaq_integral(p, params, ln_shift, moment, inner)?.value)
        },
        &radial_spans(theta_p, params)?,
        tol,
    )?;
    Ok(with_inner_budget(r, inner))
}

/// Smallest space-like norm among constrained pairs with the fermion moving
/// along `theta_p`. Approximate (grid search plus refinement); used only to
/// choose a numerically safe exponent.
pub fn min_norm_in_direction(theta_p: f64, params: &ModelParams) -> Result<f64> {
    let s_min = params.threshold_momentum()?;
    let (c, sn) = (theta_p.cos(), theta_p.sin());
    let norm = |x: f64, q_y: f64| {
        let p = PlanarVector::new(x * c, x * sn);
        let s = s_of_p(p, params);
        let q = q_from_transverse(s, q_y, params);
        let pair = OnShellPair {
            p,
            q,
            p0: params.v_f() * x,
            q0: params.v_f() * q_mod_from_transverse(s, q_y, params),
        };
        spacelike_norm_sq(&pair).max(0.0).sqrt()
    };
    let best_over_qy = |x: f64| {
        let scale = s_min.max(x);
        let (mut best_y, mut best) = (0.0, norm(x, 0.0));
        for k in 1..=60 {
            let y = scale * 1e-3 * 1.2f64.powi(k);
            for q_y in [y, -y] {
                let n = norm(x, q_y);
                if n < best {
                    best = n;
                    best_y = q_y;
                }
            }
        }
        let h = best_y.abs().max(scale * 1e-3);
        let refined = golden_min(|q_y| norm(x, q_y), best_y - h, best_y + h);
        best.min(refined.1)
    };
    let xs: Vec<f64> = (0..=160).map(|k| s_min * 1e-3 * 10f64.powf(k as f64 * 4.0 / 160.0)).collect();
    let (mut best_k, mut best) = (0, f64::INFINITY);
    for (k, &x) in xs.iter().enumerate() {
        let n = best_over_qy(x);
        if n < best {
            best = n;
            best_k = k;
        }
    }
    let lo = xs[best_k.saturating_sub(1)];
    let hi = xs[(best_k + 1).min(xs.len() - 1)];
    Ok(best.min(golden_min(best_over_qy, lo, hi).1))
}

fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut a = hi - ratio * (hi - lo);
    let mut b = lo + ratio * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..80 {
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - ratio * (hi - lo);
            fa = f(a);
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + ratio * (hi - lo);
            fb = f(b);
        }
    }
    if fa < fb {
        (a, fa)
    } else {
        (b, fb)
    }
}

/// Angular density `P(theta_p) = ∫ d|p| |p| P(p)`, flavour factor included.
///
/// The exponent is the global one unless the direction is so strongly
/// suppressed that the mantissa would underflow.
pub fn prob_theta(theta_p: f64, params: &ModelParams, tol: Tolerance) -> Result<Scaled> {
    if !params.is_above_threshold() {
        return Ok(Scaled::ZERO);
    }
    let tol = relative_only(tol);
    let flavour = params.flavour_multiplier();
    let global = global_ln_shift(params)?;
    let r = radial_integral(theta_p, params, global, Moment::Count, tol)?;
    if r.value.abs() >= SMALL_MANTISSA {
        return Ok(Scaled::new(flavour * r.value, flavour * r.abs_error_estimate, -global));
    }
    let local = 2.0 * params.a() * min_norm_in_direction(theta_p, params)?;
    if local <= global {
        return Ok(Scaled::new(flavour * r.value, flavour * r.abs_error_estimate, -global));
    }
    let r = radial_integral(theta_p, params, local, Moment::Count, tol)?;
    Ok(Scaled::new(flavour * r.value, flavour * r.abs_error_estimate, -local))
}

/// `P(theta_p)` with a caller-chosen exponent, unflavoured.
fn prob_theta_shifted(theta_p: f64, params: &ModelParams, ln_shift: f64, tol: Tolerance) -> Result<QuadResult> {
    radial_integral(theta_p, params, ln_shift, Moment::Count, tol)
}

/// Integral over all emission angles, using the mirror symmetry about the
/// velocity axis to fold `[π, 2π)` onto `[0, π)`.
fn full_angle_integral(params: &ModelParams, moment: Moment, tol: Tolerance) -> Result<Scaled> {
    if !params.is_above_threshold() {
        return Ok(Scaled::ZERO);
    }
    let tol = relative_only(tol);
    let inner = tol.tightened(NESTED_TIGHTENING);
    let shift = global_ln_shift(params)?;
    let alpha = alpha(params)?;
    let r = try_integrate_spans(
        |theta| Ok(radial_integral(theta, params, shift, moment, inner)?.value),
        &Span::split(0.0, PI, &[alpha]),
        tol,
    )?;
    let r = with_inner_budget(r, inner);
    let factor = 2.0 * params.flavour_multiplier();
    Ok(Scaled::new(factor * r.value, factor * r.abs_error_estimate, -shift))
}

/// Total pair-creation probability per unit time, `∫ dθ_p P(theta_p)`.
pub fn total_rate(params: &ModelParams, tol: Tolerance) -> Result<Scaled> {
    full_angle_integral(params, Moment::Count, tol)
}

/// Energy per unit time deposited in the sheet: the rate weighted by the
/// pair energy `v_F (|p| + |q|)`.
pub fn power(params: &ModelParams, tol: Tolerance) -> Result<Scaled> {
    Ok(full_angle_integral(params, Moment::Modulus, tol)?.scale(params.v_f()))
}

/// Friction force `power / v`.
pub fn friction_force(params: &ModelParams, tol: Tolerance) -> Result<Scaled> {
    Ok(power(params, tol)?.scale(1.0 / params.v()))
}

/// Marginal density of `|p|`, `|p| ∫ dθ_p P(p)`, flavour factor included.
pub fn marginal_p_mod(p_mod: f64, params: &ModelParams, tol: Tolerance) -> Result<Scaled> {
    if !params.is_above_threshold() {
        return Ok(Scaled::ZERO);
    }
    let shift = global_ln_shift(params)?;
    let r = p_mod_marginal_shifted(p_mod, params, shift, relative_only(tol))?;
    let factor = params.flavour_multiplier();
    Ok(Scaled::new(factor * r.value, factor * r.abs_error_estimate, -shift))
}

fn p_mod_marginal_shifted(p_mod: f64, params: &ModelParams, ln_shift: f64, tol: Tolerance) -> Result<QuadResult> {
    let inner = tol.tightened(NESTED_TIGHTENING);
    let breaks: Vec<f64> = theta_p_zero(p_mod, params).into_iter().collect();
    let r = try_integrate_spans(
        |theta| {
            let p = PlanarVector::from_polar(p_mod, theta);
            Ok(thetaq_integral(p, params, ln_shift, Moment::Count, inner)?.value)
        },
        &Span::split(0.0, PI, &breaks),
        tol,
    )?;
    let mut r = with_inner_budget(r, inner);
    r.value *= 2.0 * p_mod;
    r.abs_error_estimate *= 2.0 * p_mod;
    Ok(r)
}

/// Marginal density of the antifermion angle, integrating the fermion
/// momentum at fixed `theta_q`. Equal to [`prob_theta`] by exchange symmetry.
pub fn marginal_theta_q(theta_q: f64, params: &ModelParams, tol: Tolerance) -> Result<Scaled> {
    if !params.is_above_threshold() {
        return Ok(Scaled::ZERO);
    }
    let tol = relative_only(tol);
    let inner = tol.tightened(NESTED_TIGHTENING);
    let shift = global_ln_shift(params)?;
    let alpha = alpha(params)?;
    let (v, v_f) = (params.v(), params.v_f());
    let w = v * theta_q.cos() - v_f;
    if w.abs() < DEFAULT_ANGLE_GUARD {
        return Ok(Scaled::new(0.0, 0.0, -shift));
    }
    let s_min = params.threshold_momentum()?;
    let decay = 1.0 / (2.0 * params.a() * (1.0 - v_f / v));
    let r = try_integrate_spans(
        |theta_p| {
            let c = v * theta_p.cos() - v_f;
            let x_s = if c > 0.0 { params.omega() / c } else { f64::INFINITY };
            let spans = match (w > 0.0, x_s.is_finite()) {
                (true, true) => Span::split(0.0, x_s, &[s_min]),
                (true, false) => vec![Span::finite(0.0, s_min), Span::semi_infinite(s_min, decay)],
                (false, true) => vec![Span::semi_infinite(x_s, decay)],
                (false, false) => return Ok(0.0),
            };
            let (cp, sp) = (theta_p.cos(), theta_p.sin());
            let r = try_integrate_spans(
                |x| Ok(x * density_p_thetaq_shifted(PlanarVector::new(x * cp, x * sp), theta_q, params, shift)?),
                &spans,
                inner,
            )?;
            Ok(r.value)
        },
        &Span::split(-PI, PI, &[-alpha, 0.0, alpha]),
        tol,
    )?;
    let r = with_inner_budget(r, inner);
    let factor = params.flavour_multiplier();
    Ok(Scaled::new(factor * r.value, factor * r.abs_error_estimate, -shift))
}

/// One row of an angular table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularSample {
    pub theta_p: f64,
    pub density: Scaled,
}

/// `theta_p -> P(theta_p)` on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularDistribution {
    pub params: ModelParams,
    pub samples: Vec<AngularSample>,
    pub flavour_multiplier: f64,
}

/// `n` equally spaced angles in `[0, 2π)`, starting at zero.
pub fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

pub fn angular_distribution(params: &ModelParams, thetas: &[f64], tol: Tolerance) -> Result<AngularDistribution> {
    let samples = thetas
        .par_iter()
        .map(|&theta_p| {
            Ok(AngularSample {
                theta_p,
                density: prob_theta(theta_p, params, tol)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AngularDistribution {
        params: *params,
        samples,
        flavour_multiplier: params.flavour_multiplier(),
    })
}

impl AngularDistribution {
    /// Index of the largest density, `None` if all vanish.
    pub fn peak_index(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (i, s) in self.samples.iter().enumerate() {
            if s.density.is_zero() {
                continue;
            }
            match best {
                Some(b) if self.samples[b].density.ratio(&s.density) >= 1.0 => {}
                _ => best = Some(i),
            }
        }
        best
    }

    /// Densities relative to the peak.
    pub fn normalized(&self) -> Vec<f64> {
        match self.peak_index() {
            None => vec![0.0; self.samples.len()],
            Some(k) => {
                let peak = self.samples[k].density;
                self.samples
                    .iter()
                    .map(|s| if s.density.is_zero() { 0.0 } else { s.density.ratio(&peak) })
                    .collect()
            }
        }
    }
}

/// Full width at half maximum of `P(theta_p)` around the forward direction.
pub fn angular_fwhm(params: &ModelParams, tol: Tolerance) -> Result<f64> {
    params.require_above_threshold()?;
    let peak = prob_theta(0.0, params, tol)?;
    let below_half = |theta: f64| -> Result<bool> { Ok(prob_theta(theta, params, tol)?.ratio(&peak) < 0.5) };
    let (mut lo, mut hi) = (0.0, 1e-4);
    while !below_half(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > PI {
            return Err(Error::InvalidParams(
                "angular density does not fall to half its forward value".into(),
            ));
        }
    }
    while hi - lo > 1e-9 * hi {
        let mid = 0.5 * (lo + hi);
        if below_half(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(lo + hi)
}

/// One velocity of a [`PowerCurve`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPoint {
    pub v: f64,
    pub power: Scaled,
    pub friction_force: Scaled,
}

/// Dissipated power against atom speed at fixed `v_F` and `a Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerCurve {
    pub v_f: f64,
    pub a_omega: f64,
    pub points: Vec<PowerPoint>,
}

pub fn power_curve(base: &ModelParams, velocities: &[f64], tol: Tolerance) -> Result<PowerCurve> {
    let points = velocities
        .par_iter()
        .map(|&v| {
            let params = base.with_velocity(v)?;
            let power = power(&params, tol)?;
            Ok(PowerPoint {
                v,
                power,
                friction_force: power.scale(1.0 / v),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PowerCurve {
        v_f: base.v_f(),
        a_omega: base.a_omega(),
        points,
    })
}

/// Integrals of a shifted density over consecutive segments, turned into a
/// normalised cumulative distribution at the interior cut points.
fn cumulative<F>(segments: &[Span], density: F, tol: Tolerance) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let pieces = segments
        .par_iter()
        .map(|span| Ok(try_integrate_spans(&density, std::slice::from_ref(span), tol)?.value))
        .collect::<Result<Vec<f64>>>()?;
    let total: f64 = pieces.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidParams("distribution has no mass".into()));
    }
    let mut acc = 0.0;
    Ok(pieces[..pieces.len() - 1]
        .iter()
        .map(|x| {
            acc += x;
            acc / total
        })
        .collect())
}

/// Cumulative distribution of `theta_p` on `[-π, π)` at the sorted `points`.
pub fn theta_p_cdf(params: &ModelParams, points: &[f64], tol: Tolerance) -> Result<Vec<f64>> {
    params.require_above_threshold()?;
    let tol = relative_only(tol);
    let inner = tol.tightened(NESTED_TIGHTENING);
    let shift = global_ln_shift(params)?;
    let mut edges = vec![-PI];
    edges.extend_from_slice(points);
    edges.push(PI);
    let segments: Vec<Span> = edges.windows(2).map(|w| Span::finite(w[0], w[1])).collect();
    cumulative(&segments, |theta| Ok(prob_theta_shifted(theta, params, shift, inner)?.value), tol)
}

/// Cumulative distribution of `|p|` at the sorted positive `points`.
pub fn p_mod_cdf(params: &ModelParams, points: &[f64], tol: Tolerance) -> Result<Vec<f64>> {
    params.require_above_threshold()?;
    let tol = relative_only(tol);
    let inner = tol.tightened(NESTED_TIGHTENING);
    let shift = global_ln_shift(params)?;
    let decay = 1.0 / (2.0 * params.a() * (1.0 - params.v_f() / params.v()));
    let mut edges = vec![0.0];
    edges.extend_from_slice(points);
    let mut segments: Vec<Span> = edges.windows(2).map(|w| Span::finite(w[0], w[1])).collect();
    segments.push(Span::semi_infinite(*edges.last().unwrap_or(&0.0), decay));
    cumulative(&segments, |x| Ok(p_mod_marginal_shifted(x, params, shift, inner)?.value), tol)
}
