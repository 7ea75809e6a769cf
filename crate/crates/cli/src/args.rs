use std::f64::consts::TAU;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use graphene_friction::kinematics::{FlavourFactor, ModelParams};
use graphene_friction::quadrature::Tolerance;

use crate::error::CliError;

#[derive(Debug, Clone, Parser)]
#[command(name = "graphene-friction", version, about = "Pair creation in graphene by a sliding neutral atom")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Defaults to `angular`.
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Atom speed in units of c.
    #[arg(long = "v", global = true, default_value_t = 4.5e-3)]
    pub v: f64,
    /// Fermi velocity in units of c.
    #[arg(long = "vf", global = true, default_value_t = 3e-3)]
    pub v_f: f64,
    /// Atom height times the oscillator frequency.
    #[arg(long = "aomega", global = true, default_value_t = 1.0)]
    pub a_omega: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long = "n-flavours", global = true, default_value_t = 1)]
    pub n_flavours: u32,
    #[arg(long = "flavour-factor", global = true, value_enum, default_value_t = FlavourArg::TwoN)]
    pub flavour_factor: FlavourArg,
    /// Grid size; the meaning depends on the command.
    #[arg(long, global = true)]
    pub grid: Option<usize>,
    #[arg(long = "tol-rel", global = true, default_value_t = 1e-6)]
    pub tol_rel: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, default_value_t = 10_000)]
    pub events: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Output file; standard output if absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Read input angles in degrees. Files always use radians.
    #[arg(long, global = true)]
    pub degrees: bool,
    /// Flip the sign of the velocity coupling in the trace oracle (negative control for `validate`).
    #[arg(long = "flip-velocity-sign", global = true)]
    pub flip_velocity_sign: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlavourArg {
    #[value(name = "2N")]
    TwoN,
    #[value(name = "4N")]
    FourN,
}

impl From<FlavourArg> for FlavourFactor {
    fn from(f: FlavourArg) -> Self {
        match f {
            FlavourArg::TwoN => FlavourFactor::TwoN,
            FlavourArg::FourN => FlavourFactor::FourN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Angular density of the emitted fermion on a uniform grid (default 720 points).
    Angular {
        #[arg(long = "theta-min")]
        theta_min: Option<f64>,
        #[arg(long = "theta-max")]
        theta_max: Option<f64>,
    },
    /// Momentum density over (|p|, theta_p), including the vanishing-angle contour.
    MomentumMap {
        /// Radial points (log spaced); `--grid` sets the angular points (default 180).
        #[arg(long = "p-points", default_value_t = 60)]
        p_points: usize,
        #[arg(long = "p-min")]
        p_min: Option<f64>,
        #[arg(long = "p-max")]
        p_max: Option<f64>,
    },
    /// Power and friction force against atom speed (default 26 speeds).
    Power {
        #[arg(long = "v-min")]
        v_min: Option<f64>,
        #[arg(long = "v-max")]
        v_max: Option<f64>,
    },
    /// Rejection-sampled pair events.
    Events,
    /// Runs the invariant suite and prints a pass/fail table.
    Validate,
    /// Reads an event file and checks every event against the constraint.
    CheckEvents { path: PathBuf },
}

/// Validated run settings shared by all commands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: ModelParams,
    pub tol: Tolerance,
    pub grid: Option<usize>,
    pub seed: u64,
    pub events: u64,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub degrees: bool,
    pub flip_velocity_sign: bool,
}

impl RunConfig {
    pub fn from_args(args: &CommonArgs) -> Result<Self, CliError> {
        if !(args.tol_rel > 0.0 && args.tol_rel < 0.1) {
            return Err(CliError::Usage(format!("--tol-rel must lie in (0, 0.1), got {}", args.tol_rel)));
        }
        if !(args.a_omega > 0.0 && args.a_omega.is_finite()) {
            return Err(CliError::Usage(format!("--aomega must be positive, got {}", args.a_omega)));
        }
        if args.grid == Some(0) {
            return Err(CliError::Usage("--grid must be positive".into()));
        }
        let params = ModelParams::new(args.v, args.v_f, args.omega, args.a_omega / args.omega)?
            .with_flavours(args.n_flavours, args.flavour_factor.into())?;
        Ok(RunConfig {
            params,
            tol: Tolerance::default().with_rel(args.tol_rel),
            grid: args.grid,
            seed: args.seed,
            events: args.events,
            format: args.format,
            out: args.out.clone(),
            degrees: args.degrees,
            flip_velocity_sign: args.flip_velocity_sign,
        })
    }

    /// Input angle in radians.
    pub fn angle(&self, value: f64) -> f64 {
        if self.degrees {
            value.to_radians()
        } else {
            value
        }
    }

    pub fn angle_range(&self, lo: Option<f64>, hi: Option<f64>) -> Result<(f64, f64), CliError> {
        let lo = lo.map_or(0.0, |x| self.angle(x));
        let hi = hi.map_or(TAU, |x| self.angle(x));
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(CliError::Usage(format!("empty angle range [{lo}, {hi})")));
        }
        Ok((lo, hi))
    }
}
