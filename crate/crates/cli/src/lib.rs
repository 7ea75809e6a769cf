//! Command-line front end for the `graphene-friction` library.
//!
//! Exit codes: 0 success, 1 usage or file error, 2 atom below threshold,
//! 3 numerical failure, 4 failed validation.

use std::io::{self, Write};

pub mod args;
pub mod commands;
pub mod error;
pub mod output;
pub mod validate;

pub use args::{Cli, Command, RunConfig};
pub use commands::Status;
pub use error::CliError;

pub fn run(cli: &Cli) -> Result<Status, CliError> {
    let cfg = RunConfig::from_args(&cli.common)?;
    let command = cli.command.clone().unwrap_or(Command::Angular {
        theta_min: None,
        theta_max: None,
    });
    let (table, status) = match command {
        Command::Angular { theta_min, theta_max } => commands::cmd_angular(&cfg, theta_min, theta_max)?,
        Command::MomentumMap { p_points, p_min, p_max } => commands::cmd_momentum_map(&cfg, p_points, p_min, p_max)?,
        Command::Power { v_min, v_max } => commands::cmd_power(&cfg, v_min, v_max)?,
        Command::Events => commands::cmd_events(&cfg)?,
        Command::Validate => {
            let checks = validate::run_suite(&cfg.params, cfg.tol, cfg.flip_velocity_sign)?;
            let mut stdout = io::stdout().lock();
            for check in &checks {
                let _ = writeln!(stdout, "{check}");
            }
            let failed = checks.iter().filter(|c| !c.passed()).count();
            if failed > 0 {
                return Err(CliError::ValidationFailed { failed });
            }
            return Ok(Status::Ok);
        }
        Command::CheckEvents { path } => {
            let file = commands::read_events(&path)?;
            let _ = writeln!(
                io::stdout(),
                "{}: {} events satisfy the constraint at v = {}, v_F = {}",
                path.display(),
                file.events.len(),
                file.params.v(),
                file.params.v_f()
            );
            return Ok(Status::Ok);
        }
    };
    table.write_to(cfg.format, cfg.out.as_deref())?;
    Ok(status)
}
