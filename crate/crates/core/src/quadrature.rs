//! Adaptive Gauss–Kronrod quadrature.
//!
//! The 10/21-point pair is open: endpoints are never sampled, so integrable
//! endpoint singularities and `0 * inf` limits at interval edges are safe.
//! Panels are bisected largest-error first; the procedure is sequential and
//! therefore bit-for-bit reproducible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_578,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the odd-indexed Kronrod nodes
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const NODES_PER_PANEL: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
    pub max_subdivisions: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rel: 1e-6,
            abs: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        if !(rel > 0.0 && abs > 0.0) {
            return Err(Error::InvalidParams(format!(
                "tolerances must be positive, got rel = {rel}, abs = {abs}"
            )));
        }
        Ok(Tolerance {
            rel,
            abs,
            ..Tolerance::default()
        })
    }

    pub fn with_rel(self, rel: f64) -> Self {
        Tolerance { rel, ..self }
    }

    pub fn with_abs(self, abs: f64) -> Self {
        Tolerance { abs, ..self }
    }

    /// Tolerance for an inner integral nested inside this one.
    pub fn tightened(self, factor: f64) -> Self {
        Tolerance {
            rel: self.rel / factor,
            abs: self.abs / factor,
            ..self
        }
    }

    pub fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadResult {
    /// Turn an unconverged result into [`Error::NotConverged`].
    pub fn require_converged(self) -> Result<QuadResult> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NotConverged {
                value: self.value,
                abs_error: self.abs_error_estimate,
                evaluations: self.evaluations,
            })
        }
    }
}

/// One piece of an integration domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Span {
    Finite { lo: f64, hi: f64 },
    /// `[start, inf)` mapped onto `t` in `(0, 1)` by `x = start + L t / (1 - t)`.
    SemiInfinite { start: f64, decay_scale: f64 },
}

impl Span {
    pub fn finite(lo: f64, hi: f64) -> Span {
        Span::Finite { lo, hi }
    }

    pub fn semi_infinite(start: f64, decay_scale: f64) -> Span {
        Span::SemiInfinite { start, decay_scale }
    }

    /// Splits `[lo, hi]` at the given interior breakpoints.
    pub fn split(lo: f64, hi: f64, breaks: &[f64]) -> Vec<Span> {
        let mut edges = vec![lo];
        edges.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
        edges.push(hi);
        edges.windows(2).map(|w| Span::finite(w[0], w[1])).collect()
    }

    fn parameter_range(&self) -> (f64, f64) {
        match *self {
            Span::Finite { lo, hi } => (lo, hi),
            Span::SemiInfinite { .. } => (0.0, 1.0),
        }
    }

    /// Physical point and Jacobian at parameter `t`.
    #[inline]
    fn map(&self, t: f64) -> (f64, f64) {
        match *self {
            Span::Finite { .. } => (t, 1.0),
            Span::SemiInfinite { start, decay_scale } => {
                let u = 1.0 - t;
                (start + decay_scale * t / u, decay_scale / (u * u))
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Span::Finite { lo, hi } if lo < hi && lo.is_finite() && hi.is_finite() => Ok(()),
            Span::SemiInfinite { start, decay_scale } if start.is_finite() && decay_scale > 0.0 => Ok(()),
            bad => Err(Error::InvalidParams(format!("invalid integration span {bad:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    span: usize,
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            // deterministic tie-break: leftmost panel first
            .then_with(|| other.span.cmp(&self.span))
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

fn kronrod_panel<F>(f: &mut F, index: usize, span: &Span, lo: f64, hi: f64) -> Result<(f64, f64)>
where
    F: FnMut(usize, f64) -> Result<f64>,
{
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut values = [0.0f64; NODES_PER_PANEL];
    let mut eval = |t: f64| -> Result<f64> {
        let (x, jac) = span.map(t);
        let y = f(index, x)?;
        if !y.is_finite() {
            return Err(Error::NonFiniteIntegrand { x });
        }
        Ok(y * jac)
    };
    values[10] = eval(center)?;
    for j in 0..10 {
        let dx = half * XGK[j];
        values[j] = eval(center - dx)?;
        values[20 - j] = eval(center + dx)?;
    }

    let mut res_k = WGK[10] * values[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    for j in 0..10 {
        let pair = values[j] + values[20 - j];
        res_k += WGK[j] * pair;
        res_abs += WGK[j] * (values[j].abs() + values[20 - j].abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * pair;
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (values[10] - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((values[j] - mean).abs() + (values[20 - j] - mean).abs());
    }

    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((value, error))
}

/// Adaptive integration over the union of `spans` with a single global
/// error budget. The integrand also receives the index of the span being
/// sampled, so each span may use its own change of variables.
/// Never fails on non-convergence; check `converged`.
pub fn try_integrate_indexed_best_effort<F>(mut f: F, spans: &[Span], tol: Tolerance) -> Result<QuadResult>
where
    F: FnMut(usize, f64) -> Result<f64>,
{
    for span in spans {
        span.validate()?;
    }
    let mut heap = BinaryHeap::with_capacity(tol.max_subdivisions + spans.len());
    let mut frozen: Vec<Panel> = Vec::new();
    let mut evaluations = 0usize;
    let (mut total, mut total_err) = (0.0, 0.0);

    for (index, span) in spans.iter().enumerate() {
        let (lo, hi) = span.parameter_range();
        let (value, error) = kronrod_panel(&mut f, index, span, lo, hi)?;
        evaluations += NODES_PER_PANEL;
        total += value;
        total_err += error;
        heap.push(Panel { span: index, lo, hi, value, error });
    }

    let mut converged = false;
    loop {
        if total_err <= tol.target(total) {
            converged = true;
            break;
        }
        if heap.len() + frozen.len() >= tol.max_subdivisions {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.lo + worst.hi);
        let scale = worst.lo.abs().max(worst.hi.abs()).max(f64::MIN_POSITIVE);
        if worst.hi - worst.lo <= 1e3 * f64::EPSILON * scale || mid <= worst.lo || mid >= worst.hi {
            // too narrow to bisect meaningfully
            frozen.push(worst);
            continue;
        }
        let span = &spans[worst.span];
        let (v1, e1) = kronrod_panel(&mut f, worst.span, span, worst.lo, mid)?;
        let (v2, e2) = kronrod_panel(&mut f, worst.span, span, mid, worst.hi)?;
        evaluations += 2 * NODES_PER_PANEL;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Panel { span: worst.span, lo: worst.lo, hi: mid, value: v1, error: e1 });
        heap.push(Panel { span: worst.span, lo: mid, hi: worst.hi, value: v2, error: e2 });
    }

    // re-sum in a fixed order to shed the drift of the running totals
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(frozen);
    panels.sort_by(|a, b| a.span.cmp(&b.span).then(a.lo.total_cmp(&b.lo)));
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let abs_error_estimate: f64 = panels.iter().map(|p| p.error).sum();
    Ok(QuadResult {
        value,
        abs_error_estimate,
        evaluations,
        converged: converged || abs_error_estimate <= tol.target(value),
    })
}

pub fn try_integrate_indexed<F>(f: F, spans: &[Span], tol: Tolerance) -> Result<QuadResult>
where
    F: FnMut(usize, f64) -> Result<f64>,
{
    try_integrate_indexed_best_effort(f, spans, tol)?.require_converged()
}

pub fn try_integrate_spans<F>(mut f: F, spans: &[Span], tol: Tolerance) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    try_integrate_indexed(|_, x| f(x), spans, tol)
}

pub fn integrate_spans<F>(mut f: F, spans: &[Span], tol: Tolerance) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_spans(|x| Ok(f(x)), spans, tol)
}

/// `∫_a^b f(x) dx`.
pub fn integrate_1d<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    integrate_spans(f, &[Span::finite(a, b)], tol)
}

pub fn try_integrate_1d<F>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    try_integrate_spans(f, &[Span::finite(a, b)], tol)
}

/// `∫_a^inf f(x) dx` through `x = a + L t / (1 - t)`.
pub fn integrate_semi_infinite<F>(f: F, a: f64, decay_scale: f64, tol: Tolerance) -> Result<QuadResult>
where
    F: FnMut(f64) -> f64,
{
    integrate_spans(f, &[Span::semi_infinite(a, decay_scale)], tol)
}

pub fn try_integrate_semi_infinite<F>(f: F, a: f64, decay_scale: f64, tol: Tolerance) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    try_integrate_spans(f, &[Span::semi_infinite(a, decay_scale)], tol)
}

/// Factor by which each nested level tightens the tolerance of its parent.
pub const NESTED_TIGHTENING: f64 = 10.0;

/// `∫ dx ∫ dy f(x, y)` with the inner domain given as a function of `x`.
///
/// The reported error adds the inner budget `rel_inner * |value|` to the
/// outer estimate; `evaluations` counts calls of `f`.
pub fn integrate_nested_2d<F, R>(mut f: F, outer: &[Span], inner: R, tol: Tolerance) -> Result<QuadResult>
where
    F: FnMut(f64, f64) -> f64,
    R: Fn(f64) -> Vec<Span>,
{
    let inner_tol = tol.tightened(NESTED_TIGHTENING);
    let mut calls = 0usize;
    let mut res = try_integrate_spans(
        |x| {
            let spans = inner(x);
            if spans.is_empty() {
                return Ok(0.0);
            }
            let r = integrate_spans(|y| f(x, y), &spans, inner_tol)?;
            calls += r.evaluations;
            Ok(r.value)
        },
        outer,
        tol,
    )?;
    res.evaluations = calls;
    res.abs_error_estimate += inner_tol.rel * res.value.abs();
    Ok(res)
}

/// Three-level version of [`integrate_nested_2d`].
pub fn integrate_nested_3d<F, M, R>(
    mut f: F,
    outer: &[Span],
    middle: M,
    inner: R,
    tol: Tolerance,
) -> Result<QuadResult>
where
    F: FnMut(f64, f64, f64) -> f64,
    M: Fn(f64) -> Vec<Span>,
    R: Fn(f64, f64) -> Vec<Span>,
{
    let middle_tol = tol.tightened(NESTED_TIGHTENING);
    let mut calls = 0usize;
    let mut res = try_integrate_spans(
        |x| {
            let spans = middle(x);
            if spans.is_empty() {
                return Ok(0.0);
            }
            let r = integrate_nested_2d(|y, z| f(x, y, z), &spans, |y| inner(x, y), middle_tol)?;
            calls += r.evaluations;
            Ok(r.value)
        },
        outer,
        tol,
    )?;
    res.evaluations = calls;
    res.abs_error_estimate += middle_tol.rel * res.value.abs();
    Ok(res)
}
