//! Rejection sampling of pair events from the joint density.
//!
//! Proposals live in `(theta_p, ln|p|, t)` where `q_y = L t / (1 - t²)` is the
//! transverse antifermion momentum; `q_x` then follows from `chi = 0`, so
//! every event sits on the constraint surface by construction. The envelope
//! is a piecewise-constant bound on an adaptively refined k-d partition of
//! that box.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::distributions::{global_ln_shift, transverse_weight};
use crate::error::{Error, Result};
use crate::kinematics::{
    min_spacelike_norm, min_spacelike_norm_at, q_from_transverse, q_mod_from_transverse, s_of_p, ModelParams,
    PlanarVector,
};
use crate::scaled::Scaled;

/// Fraction of the threshold momentum below which `|p|` is not proposed.
/// The density vanishes like `|p|³` there.
const P_MOD_FLOOR: f64 = 1e-4;

/// e-folds of suppression, relative to the global minimum, at which the
/// radial proposal range ends.
const RADIAL_EFOLDS: f64 = 60.0;

/// Cap on `ln(max/min)` inside a cell when widening its bound.
const MAX_CELL_LOG_RANGE: f64 = 30.0;

const SPOT_CHECKS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub n_events: u64,
    /// Multiplier applied to every cell bound, at least 1.
    pub envelope_inflation: f64,
    /// Initial cells along `(theta_p, ln|p|, t)`.
    pub grid: [usize; 3],
    pub max_cells: usize,
    /// Refinement stops once the expected acceptance reaches this value.
    pub target_efficiency: f64,
    pub max_attempts: u64,
    /// Envelope rebuilds, each doubling the inflation, after a violation.
    pub max_rebuilds: u32,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 0,
            n_events: 1000,
            envelope_inflation: 1.2,
            grid: [32, 24, 24],
            max_cells: 60_000,
            target_efficiency: 0.5,
            max_attempts: 1_000_000,
            max_rebuilds: 4,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.n_events < 1 {
            return bad("at least one event must be requested".into());
        }
        if self.envelope_inflation.is_nan() || self.envelope_inflation < 1.0 {
            return bad(format!("envelope inflation must be >= 1, got {}", self.envelope_inflation));
        }
        if self.grid.contains(&0) || self.max_cells == 0 {
            return bad("proposal grid must be non-empty".into());
        }
        if !(self.target_efficiency > 0.0 && self.target_efficiency < 1.0) {
            return bad(format!("target efficiency must lie in (0, 1), got {}", self.target_efficiency));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairEvent {
    pub p: PlanarVector,
    pub q: PlanarVector,
    pub pair_energy: f64,
    pub weight: f64,
}

impl PairEvent {
    pub fn theta_p(&self) -> f64 {
        self.p.angle()
    }

    pub fn theta_q(&self) -> f64 {
        self.q.angle()
    }
}

/// Map from the proposal box to momenta, shared by the envelope and the sampler.
#[derive(Debug, Clone, Copy)]
struct Proposal {
    params: ModelParams,
    ln_shift: f64,
    transverse_scale: f64,
    lo: [f64; 3],
    hi: [f64; 3],
}

impl Proposal {
    fn new(params: &ModelParams) -> Result<Self> {
        let s_min = params.threshold_momentum()?;
        let n_min = min_spacelike_norm(params)?;
        let two_a = 2.0 * params.a();
        // radial end: bisection on the per-|p| minimum norm, which grows past s_min
        let excess = |x: f64| -> Result<f64> { Ok(two_a * (min_spacelike_norm_at(x, params)? - n_min) - RADIAL_EFOLDS) };
        let (mut lo, mut hi) = (s_min, 2.0 * s_min);
        while excess(hi)? < 0.0 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if excess(mid)? < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Proposal {
            params: *params,
            ln_shift: global_ln_shift(params)?,
            transverse_scale: (n_min / two_a).sqrt(),
            lo: [-PI, (P_MOD_FLOOR * s_min).ln(), -1.0],
            hi: [PI, hi.ln(), 1.0],
        })
    }

    fn volume(&self) -> f64 {
        (0..3).map(|k| self.hi[k] - self.lo[k]).product()
    }

    /// Momenta at a point of the box.
    fn momenta(&self, z: [f64; 3]) -> (PlanarVector, f64, f64) {
        let x = z[1].exp();
        let p = PlanarVector::new(x * z[0].cos(), x * z[0].sin());
        let t = z[2];
        let q_y = self.transverse_scale * t / (1.0 - t * t);
        (p, s_of_p(p, &self.params), q_y)
    }

    /// Shifted, unflavoured density per unit `dθ_p d(ln|p|) dt`.
    fn density(&self, z: [f64; 3]) -> Result<f64> {
        let t = z[2];
        if t.abs() >= 1.0 {
            return Ok(0.0);
        }
        let (p, s, q_y) = self.momenta(z);
        let x_sq = p.modulus_sq();
        let jac = self.transverse_scale * (1.0 + t * t) / ((1.0 - t * t) * (1.0 - t * t));
        Ok(x_sq * jac * transverse_weight(p, s, q_y, &self.params, self.ln_shift)?)
    }

    fn event(&self, z: [f64; 3]) -> PairEvent {
        let (p, s, q_y) = self.momenta(z);
        let q = q_from_transverse(s, q_y, &self.params);
        let q_mod = q_mod_from_transverse(s, q_y, &self.params);
        PairEvent {
            p,
            q,
            pair_energy: self.params.v_f() * (p.modulus() + q_mod),
            weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    lo: [f64; 3],
    hi: [f64; 3],
    bound: f64,
    mean: f64,
    split_axis: usize,
    node: usize,
}

impl Cell {
    fn volume(&self) -> f64 {
        (0..3).map(|k| self.hi[k] - self.lo[k]).product()
    }

    fn waste(&self) -> f64 {
        (self.bound - self.mean) * self.volume()
    }
}

struct ByWaste(Cell);

impl PartialEq for ByWaste {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for ByWaste {}

impl PartialOrd for ByWaste {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ByWaste {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .waste()
            .total_cmp(&other.0.waste())
            .then_with(|| other.0.node.cmp(&self.0.node))
    }
}

#[derive(Debug, Clone, Copy)]
enum Node {
    Leaf(usize),
    Split { axis: usize, at: f64, below: usize, above: usize },
}

/// Piecewise-constant majorant of the proposal density.
#[derive(Debug, Clone)]
pub struct Envelope {
    proposal: Proposal,
    cells: Vec<Cell>,
    nodes: Vec<Node>,
    cdf: Vec<f64>,
    mass: f64,
    mean_mass: f64,
    inflation: f64,
}

fn evaluate_cell(proposal: &Proposal, lo: [f64; 3], hi: [f64; 3], inflation: f64, node: usize) -> Result<Cell> {
    let mut values = [[[0.0f64; 3]; 3]; 3];
    for (i, plane) in values.iter_mut().enumerate() {
        for (j, line) in plane.iter_mut().enumerate() {
            for (k, value) in line.iter_mut().enumerate() {
                let at = |axis: usize, f: usize| lo[axis] + 0.5 * f as f64 * (hi[axis] - lo[axis]);
                *value = proposal.density([at(0, i), at(1, j), at(2, k)])?;
            }
        }
    }
    let flat = values.iter().flatten().flatten();
    let max = flat.clone().copied().fold(0.0, f64::max);
    let min = flat.clone().copied().fold(f64::INFINITY, f64::min);
    // Simpson weights along each axis
    let w = [1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0];
    let mut mean = 0.0;
    let mut variation = [0.0f64; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                mean += w[i] * w[j] * w[k] * values[i][j][k];
            }
            variation[0] += (values[0][i][j] - values[1][i][j]).abs() + (values[1][i][j] - values[2][i][j]).abs();
            variation[1] += (values[i][0][j] - values[i][1][j]).abs() + (values[i][1][j] - values[i][2][j]).abs();
            variation[2] += (values[i][j][0] - values[i][j][1]).abs() + (values[i][j][1] - values[i][j][2]).abs();
        }
    }
    let bound = if max == 0.0 {
        0.0
    } else {
        let log_range = if min > 0.0 { (max / min).ln().min(MAX_CELL_LOG_RANGE) } else { MAX_CELL_LOG_RANGE };
        // a log-quadratic peak between grid points exceeds the sampled
        // maximum by at most a third of the sampled log range
        inflation * max * (log_range / 3.0).exp()
    };
    let split_axis = (0..3).max_by(|&a, &b| variation[a].total_cmp(&variation[b])).unwrap_or(0);
    Ok(Cell {
        lo,
        hi,
        bound,
        mean: mean.clamp(0.0, bound),
        split_axis,
        node,
    })
}

/// Builds the envelope without validating it.
fn build_unchecked(params: &ModelParams, config: &SamplerConfig, inflation: f64) -> Result<Envelope> {
    let proposal = Proposal::new(params)?;
    let [n0, n1, n2] = config.grid;
    let mut nodes: Vec<Node> = Vec::new();
    let mut boxes = Vec::with_capacity(n0 * n1 * n2);
    // the initial grid is itself a k-d tree of balanced splits
    fn grid_tree(
        nodes: &mut Vec<Node>,
        boxes: &mut Vec<([f64; 3], [f64; 3], usize)>,
        lo: [f64; 3],
        hi: [f64; 3],
        counts: [usize; 3],
    ) -> usize {
        let index = nodes.len();
        match (0..3).filter(|&k| counts[k] > 1).max_by_key(|&k| counts[k]) {
            None => {
                nodes.push(Node::Leaf(boxes.len()));
                boxes.push((lo, hi, index));
            }
            Some(axis) => {
                nodes.push(Node::Leaf(usize::MAX));
                let left = counts[axis] / 2;
                let at = lo[axis] + (hi[axis] - lo[axis]) * left as f64 / counts[axis] as f64;
                let (mut c_lo, mut c_hi) = (counts, counts);
                c_lo[axis] = left;
                c_hi[axis] = counts[axis] - left;
                let (mut hi_lo, mut lo_hi) = (hi, lo);
                hi_lo[axis] = at;
                lo_hi[axis] = at;
                let below = grid_tree(nodes, boxes, lo, hi_lo, c_lo);
                let above = grid_tree(nodes, boxes, lo_hi, hi, c_hi);
                nodes[index] = Node::Split { axis, at, below, above };
            }
        }
        index
    }
    grid_tree(&mut nodes, &mut boxes, proposal.lo, proposal.hi, [n0, n1, n2]);

    let cells = boxes
        .par_iter()
        .map(|&(lo, hi, node)| evaluate_cell(&proposal, lo, hi, inflation, node))
        .collect::<Result<Vec<_>>>()?;
    let mut mass: f64 = cells.iter().map(|c| c.bound * c.volume()).sum();
    let mut mean_mass: f64 = cells.iter().map(|c| c.mean * c.volume()).sum();
    let mut heap: BinaryHeap<ByWaste> = cells.into_iter().map(ByWaste).collect();

    while heap.len() < config.max_cells && mean_mass < config.target_efficiency * mass {
        let Some(ByWaste(cell)) = heap.pop() else { break };
        let axis = cell.split_axis;
        let at = 0.5 * (cell.lo[axis] + cell.hi[axis]);
        let (mut hi_lo, mut lo_hi) = (cell.hi, cell.lo);
        hi_lo[axis] = at;
        lo_hi[axis] = at;
        let below_node = nodes.len();
        let above_node = below_node + 1;
        nodes.push(Node::Leaf(usize::MAX));
        nodes.push(Node::Leaf(usize::MAX));
        nodes[cell.node] = Node::Split {
            axis,
            at,
            below: below_node,
            above: above_node,
        };
        let below = evaluate_cell(&proposal, cell.lo, hi_lo, inflation, below_node)?;
        let above = evaluate_cell(&proposal, lo_hi, cell.hi, inflation, above_node)?;
        mass += (below.bound * below.volume() + above.bound * above.volume()) - cell.bound * cell.volume();
        mean_mass += (below.mean * below.volume() + above.mean * above.volume()) - cell.mean * cell.volume();
        heap.push(ByWaste(below));
        heap.push(ByWaste(above));
    }

    // fixed order for reproducible cell selection
    let mut cells: Vec<Cell> = heap.into_iter().map(|c| c.0).collect();
    cells.sort_by_key(|c| c.node);
    for (i, c) in cells.iter().enumerate() {
        nodes[c.node] = Node::Leaf(i);
    }
    let mut acc = 0.0;
    let cdf: Vec<f64> = cells
        .iter()
        .map(|c| {
            acc += c.bound * c.volume();
            acc
        })
        .collect();
    let mass = acc;
    let mean_mass = cells.iter().map(|c| c.mean * c.volume()).sum();
    debug!(
        "envelope: {} cells, expected efficiency {:.3}",
        cells.len(),
        mean_mass / mass
    );
    Ok(Envelope {
        proposal,
        cells,
        nodes,
        cdf,
        mass,
        mean_mass,
        inflation,
    })
}

impl Envelope {
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn inflation(&self) -> f64 {
        self.inflation
    }

    /// Expected acceptance probability of a proposal.
    pub fn expected_efficiency(&self) -> f64 {
        self.mean_mass / self.mass
    }

    /// Total mass of the envelope in the units of [`crate::distributions::total_rate`],
    /// flavour factor included.
    pub fn integral(&self) -> Scaled {
        Scaled::new(
            self.mass * self.proposal.params.flavour_multiplier(),
            0.0,
            -self.proposal.ln_shift,
        )
    }

    pub fn proposal_volume(&self) -> f64 {
        self.proposal.volume()
    }

    fn locate(&self, z: [f64; 3]) -> Option<usize> {
        if (0..3).any(|k| z[k] < self.proposal.lo[k] || z[k] > self.proposal.hi[k]) {
            return None;
        }
        let mut node = 0;
        loop {
            match self.nodes[node] {
                Node::Leaf(i) => return Some(i),
                Node::Split { axis, at, below, above } => node = if z[axis] < at { below } else { above },
            }
        }
    }

    fn draw_in_cell<R: Rng>(&self, rng: &mut R) -> (usize, [f64; 3]) {
        let target = rng.random::<f64>() * self.mass;
        let index = self.cdf.partition_point(|&c| c <= target).min(self.cells.len() - 1);
        let cell = &self.cells[index];
        let mut z = [0.0; 3];
        for (k, value) in z.iter_mut().enumerate() {
            *value = cell.lo[k] + rng.random::<f64>() * (cell.hi[k] - cell.lo[k]);
        }
        (index, z)
    }

    fn check_point(&self, index: usize, z: [f64; 3]) -> Result<f64> {
        let density = self.proposal.density(z)?;
        let bound = self.cells[index].bound;
        if density > bound {
            return Err(Error::EnvelopeViolation {
                ratio: if bound > 0.0 { density / bound } else { f64::INFINITY },
                point: z,
            });
        }
        Ok(density)
    }

    /// Spot-checks the bound at points drawn both from the envelope itself and
    /// uniformly over the proposal box.
    pub fn validate(&self, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::MAX);
        for _ in 0..SPOT_CHECKS / 2 {
            let (index, z) = self.draw_in_cell(&mut rng);
            self.check_point(index, z)?;
        }
        for _ in 0..SPOT_CHECKS / 2 {
            let mut z = [0.0; 3];
            for (k, value) in z.iter_mut().enumerate() {
                *value = self.proposal.lo[k] + rng.random::<f64>() * (self.proposal.hi[k] - self.proposal.lo[k]);
            }
            if let Some(index) = self.locate(z) {
                self.check_point(index, z)?;
            }
        }
        Ok(())
    }

    /// One accepted event from the stream keyed by `(seed, index)`, with the
    /// number of proposals it took.
    fn sample_one(&self, seed: u64, index: u64, max_attempts: u64) -> Result<(PairEvent, u64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        for attempt in 1..=max_attempts {
            let (cell, z) = self.draw_in_cell(&mut rng);
            let density = self.check_point(cell, z)?;
            if rng.random::<f64>() * self.cells[cell].bound < density {
                return Ok((self.proposal.event(z), attempt));
            }
        }
        Err(Error::MaxRejectionsExceeded {
            index,
            attempts: max_attempts,
        })
    }
}

/// Builds and validates an envelope at the configured inflation.
pub fn build_envelope(params: &ModelParams, config: &SamplerConfig) -> Result<Envelope> {
    config.validate()?;
    params.require_above_threshold()?;
    let envelope = build_unchecked(params, config, config.envelope_inflation)?;
    envelope.validate(config.seed)?;
    Ok(envelope)
}

#[derive(Debug, Clone)]
pub struct SampleReport {
    pub events: Vec<PairEvent>,
    pub proposals: u64,
    pub envelope_cells: usize,
    pub inflation: f64,
}

impl SampleReport {
    pub fn efficiency(&self) -> f64 {
        self.events.len() as f64 / self.proposals as f64
    }
}

fn sample_with(envelope: &Envelope, config: &SamplerConfig) -> Result<SampleReport> {
    let draws = (0..config.n_events)
        .into_par_iter()
        .map(|i| envelope.sample_one(config.seed, i, config.max_attempts))
        .collect::<Result<Vec<_>>>()?;
    let proposals = draws.iter().map(|d| d.1).sum();
    Ok(SampleReport {
        events: draws.into_iter().map(|d| d.0).collect(),
        proposals,
        envelope_cells: envelope.cell_count(),
        inflation: envelope.inflation(),
    })
}

/// Rejection-samples `config.n_events` events. A bound violation, found
/// either by the spot checks or during sampling, triggers a rebuild with
/// doubled inflation and a fresh run over all event indices.
pub fn sample_events_with_report(params: &ModelParams, config: &SamplerConfig) -> Result<SampleReport> {
    config.validate()?;
    params.require_above_threshold()?;
    let mut inflation = config.envelope_inflation;
    let mut rebuilds = 0;
    loop {
        let attempt = build_unchecked(params, config, inflation).and_then(|envelope| {
            envelope.validate(config.seed)?;
            sample_with(&envelope, config)
        });
        match attempt {
            Err(Error::EnvelopeViolation { ratio, point }) if rebuilds < config.max_rebuilds => {
                warn!("envelope exceeded by {ratio:.3} at {point:?}; rebuilding with inflation {}", 2.0 * inflation);
                inflation *= 2.0;
                rebuilds += 1;
            }
            other => return other,
        }
    }
}

pub fn sample_events(params: &ModelParams, config: &SamplerConfig) -> Result<Vec<PairEvent>> {
    Ok(sample_events_with_report(params, config)?.events)
}

/// Kolmogorov–Smirnov distance between a sample and a reference CDF known
/// only at `checkpoints`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsDistance {
    /// Largest deviation at the checkpoints.
    pub at_checkpoints: f64,
    /// Upper bound on the deviation over the whole line, using monotonicity
    /// of both CDFs between checkpoints.
    pub upper_bound: f64,
}

/// Every `sorted.len() / n`-th sample value, a convenient checkpoint set.
pub fn quantile_checkpoints(sorted: &[f64], n: usize) -> Vec<f64> {
    let mut points: Vec<f64> = (1..n).map(|k| sorted[k * sorted.len() / n]).collect();
    points.dedup();
    points
}

/// `sorted` must be ascending; `reference[i]` is the reference CDF at `checkpoints[i]`.
pub fn ks_distance(sorted: &[f64], checkpoints: &[f64], reference: &[f64]) -> KsDistance {
    assert_eq!(checkpoints.len(), reference.len());
    let n = sorted.len() as f64;
    let below = |c: f64| sorted.partition_point(|&x| x < c) as f64 / n;
    let at_or_below = |c: f64| sorted.partition_point(|&x| x <= c) as f64 / n;
    let mut at_checkpoints = 0.0f64;
    let mut upper = 0.0f64;
    // previous checkpoint: empirical CDF at it and reference CDF at it
    let (mut emp_prev, mut ref_prev) = (0.0, 0.0);
    for (&c, &r) in checkpoints.iter().zip(reference) {
        let (lo, hi) = (below(c), at_or_below(c));
        at_checkpoints = at_checkpoints.max((lo - r).abs()).max((hi - r).abs());
        upper = upper.max(lo - ref_prev).max(r - emp_prev);
        upper = upper.max((hi - r).abs());
        emp_prev = hi;
        ref_prev = r;
    }
    upper = upper.max(1.0 - ref_prev).max(1.0 - emp_prev);
    KsDistance {
        at_checkpoints,
        upper_bound: upper.max(at_checkpoints),
    }
}
