use std::f64::consts::TAU;
use std::fs;
use std::path::Path;

use graphene_friction::distributions::{angular_distribution, angular_fwhm, power_curve, prob_p};
use graphene_friction::kinematics::{chi, theta_p_zero, FlavourFactor, ModelParams, OnShellPair, PlanarVector};
use graphene_friction::sampler::{sample_events_with_report, PairEvent, SamplerConfig};
use graphene_friction::Scaled;
use log::warn;
use rayon::prelude::*;

use crate::args::RunConfig;
use crate::error::CliError;
use crate::output::{number, Table};

/// Digits written for densities and their error estimates.
const DENSITY_DIGITS: usize = 12;
const ERROR_DIGITS: usize = 3;

/// Successful outcomes; below-threshold runs still produce a (zero) table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    BelowThreshold,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::BelowThreshold => 2,
        }
    }
}

pub fn metadata(table: &mut Table, command: &str, cfg: &RunConfig) {
    let prm = &cfg.params;
    table.meta("tool", format!("graphene-friction {}", env!("CARGO_PKG_VERSION")));
    table.meta("command", command);
    table.meta("v", number(prm.v()));
    table.meta("v_f", number(prm.v_f()));
    table.meta("omega", number(prm.omega()));
    table.meta("a", number(prm.a()));
    table.meta("a_omega", number(prm.a_omega()));
    table.meta(
        "units",
        "hbar = c = 1; speeds in units of c; results depend on omega only through a*omega and the scaling laws, so omega = 1 gives reduced units",
    );
    table.meta("normalisation", "densities per unit time with the overall constant set to 1");
    table.meta("flavour_factor", prm.flavour_factor().label());
    table.meta("n_flavours", prm.n_flavours());
    table.meta("flavour_multiplier", number(prm.flavour_multiplier()));
    table.meta("tol_rel", number(cfg.tol.rel));
    table.meta("angles", "radians");
}

fn density_cells(d: &Scaled) -> [String; 2] {
    [d.to_decimal(DENSITY_DIGITS), d.error_to_decimal(ERROR_DIGITS)]
}

fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
}

fn below_threshold_warning(prm: &ModelParams) {
    warn!(
        "v = {} does not exceed v_F = {}: no pairs can be created, all densities are zero",
        prm.v(),
        prm.v_f()
    );
}

pub fn cmd_angular(cfg: &RunConfig, theta_min: Option<f64>, theta_max: Option<f64>) -> Result<(Table, Status), CliError> {
    let (lo, hi) = cfg.angle_range(theta_min, theta_max)?;
    let thetas = uniform_grid(lo, hi, cfg.grid.unwrap_or(720));
    let mut table = Table::new(&["theta_p_rad", "density", "error"]);
    metadata(&mut table, "angular", cfg);
    let prm = &cfg.params;
    if !prm.is_above_threshold() {
        below_threshold_warning(prm);
        table.rows = thetas.iter().map(|&t| vec![number(t), "0".into(), "0".into()]).collect();
        return Ok((table, Status::BelowThreshold));
    }
    let dist = angular_distribution(prm, &thetas, cfg.tol)?;
    table.meta("fwhm_rad", number(angular_fwhm(prm, cfg.tol)?));
    if let Some(k) = dist.peak_index() {
        table.meta("peak_theta_p_rad", number(dist.samples[k].theta_p));
    }
    table.rows = dist
        .samples
        .iter()
        .map(|s| {
            let [d, e] = density_cells(&s.density);
            vec![number(s.theta_p), d, e]
        })
        .collect();
    Ok((table, Status::Ok))
}

pub fn cmd_momentum_map(
    cfg: &RunConfig,
    p_points: usize,
    p_min: Option<f64>,
    p_max: Option<f64>,
) -> Result<(Table, Status), CliError> {
    let prm = &cfg.params;
    if p_points == 0 {
        return Err(CliError::Usage("--p-points must be positive".into()));
    }
    let scale = prm.threshold_momentum().unwrap_or(prm.omega() / prm.v_f());
    let (lo, hi) = (p_min.unwrap_or(0.1 * scale), p_max.unwrap_or(10.0 * scale));
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(CliError::Usage(format!("bad momentum range [{lo}, {hi}]")));
    }
    let thetas = uniform_grid(0.0, TAU, cfg.grid.unwrap_or(180));
    let mut points: Vec<(f64, f64, bool)> = Vec::new();
    for x in log_grid(lo, hi, p_points) {
        let mut row: Vec<(f64, f64, bool)> = thetas.iter().map(|&t| (x, t, false)).collect();
        if let Some(t0) = theta_p_zero(x, prm) {
            row.push((x, t0, true));
            if t0 > 0.0 {
                row.push((x, TAU - t0, true));
            }
        }
        row.sort_by(|a, b| a.1.total_cmp(&b.1));
        points.extend(row);
    }
    let mut table = Table::new(&["p_mod", "theta_p_rad", "density", "error", "zero_contour"]);
    metadata(&mut table, "momentum-map", cfg);
    let status = if prm.is_above_threshold() {
        Status::Ok
    } else {
        below_threshold_warning(prm);
        Status::BelowThreshold
    };
    let densities = points
        .par_iter()
        .map(|&(x, t, _)| prob_p(PlanarVector::from_polar(x, t), prm, cfg.tol))
        .collect::<Result<Vec<_>, _>>()?;
    table.rows = points
        .iter()
        .zip(&densities)
        .map(|(&(x, t, zero), d)| {
            let [d, e] = density_cells(d);
            vec![number(x), number(t), d, e, (zero as u8).to_string()]
        })
        .collect();
    Ok((table, status))
}

pub fn cmd_power(cfg: &RunConfig, v_min: Option<f64>, v_max: Option<f64>) -> Result<(Table, Status), CliError> {
    let prm = &cfg.params;
    let (lo, hi) = (v_min.unwrap_or(0.5 * prm.v_f()), v_max.unwrap_or(3.0 * prm.v_f()));
    if !(lo > 0.0 && lo <= hi && hi < 1.0) {
        return Err(CliError::Usage(format!("bad speed range [{lo}, {hi}]")));
    }
    let n = cfg.grid.unwrap_or(26);
    let speeds: Vec<f64> = if n == 1 {
        vec![lo]
    } else {
        (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
    };
    let curve = power_curve(prm, &speeds, cfg.tol)?;
    let mut table = Table::new(&["v", "power", "friction_force", "error"]);
    metadata(&mut table, "power", cfg);
    table.rows = curve
        .points
        .iter()
        .map(|pt| {
            vec![
                number(pt.v),
                pt.power.to_decimal(DENSITY_DIGITS),
                pt.friction_force.to_decimal(DENSITY_DIGITS),
                pt.power.error_to_decimal(ERROR_DIGITS),
            ]
        })
        .collect();
    Ok((table, Status::Ok))
}

pub fn cmd_events(cfg: &RunConfig) -> Result<(Table, Status), CliError> {
    let prm = &cfg.params;
    let mut table = Table::new(&["px", "py", "qx", "qy", "pair_energy"]);
    metadata(&mut table, "events", cfg);
    table.meta("seed", cfg.seed);
    table.meta("events", cfg.events);
    if !prm.is_above_threshold() {
        below_threshold_warning(prm);
        return Ok((table, Status::BelowThreshold));
    }
    let config = SamplerConfig {
        seed: cfg.seed,
        n_events: cfg.events,
        ..SamplerConfig::default()
    };
    let report = sample_events_with_report(prm, &config)?;
    table.meta("envelope_cells", report.envelope_cells);
    table.meta("envelope_inflation", number(report.inflation));
    table.meta("acceptance_efficiency", number(report.efficiency()));
    table.rows = report
        .events
        .iter()
        .map(|e| vec![number(e.p.px), number(e.p.py), number(e.q.px), number(e.q.py), number(e.pair_energy)])
        .collect();
    Ok((table, Status::Ok))
}

/// Events read back from a file, with the parameters they were drawn at.
#[derive(Debug, Clone)]
pub struct EventFile {
    pub params: ModelParams,
    pub seed: Option<u64>,
    pub events: Vec<PairEvent>,
}

/// Relative size of `chi` accepted when reading events.
pub const CHI_TOLERANCE: f64 = 1e-10;

pub fn read_events(path: &Path) -> Result<EventFile, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let bad = |reason: String| CliError::BadFile {
        path: path.display().to_string(),
        reason,
    };
    let table = Table::parse(&text).map_err(bad)?;
    let meta = |key: &str| -> Result<f64, CliError> {
        table
            .get_meta(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| bad(format!("missing or unreadable metadata `{key}`")))
    };
    let factor = match table.get_meta("flavour_factor") {
        Some("4N") => FlavourFactor::FourN,
        _ => FlavourFactor::TwoN,
    };
    let n_flavours = meta("n_flavours")? as u32;
    let params = ModelParams::new(meta("v")?, meta("v_f")?, meta("omega")?, meta("a")?)?.with_flavours(n_flavours, factor)?;
    let index = |name: &str| table.column(name).ok_or_else(|| bad(format!("missing column `{name}`")));
    let cols = [index("px")?, index("py")?, index("qx")?, index("qy")?, index("pair_energy")?];
    let mut events = Vec::with_capacity(table.rows.len());
    for (line, row) in table.rows.iter().enumerate() {
        let mut v = [0.0; 5];
        for (slot, &c) in v.iter_mut().zip(&cols) {
            *slot = row[c].parse().map_err(|_| bad(format!("event {line}: unreadable value `{}`", row[c])))?;
        }
        let (p, q) = (PlanarVector::new(v[0], v[1]), PlanarVector::new(v[2], v[3]));
        let pair = OnShellPair::new(p, q, params.v_f());
        let scale = params.omega() + (params.v() + params.v_f()) * (p.modulus() + q.modulus());
        let residual = chi(&pair, &params);
        if residual.is_nan() || residual.abs() > CHI_TOLERANCE * scale {
            return Err(bad(format!("event {line} violates the constraint: chi = {residual:e}")));
        }
        events.push(PairEvent {
            p,
            q,
            pair_energy: v[4],
            weight: 1.0,
        });
    }
    Ok(EventFile {
        params,
        seed: table.get_meta("seed").and_then(|s| s.parse().ok()),
        events,
    })
}
