//! Dispatch from a resolved configuration to the experiment runners.

use std::fmt::Write as _;

use rotordyn::control::{gain_sweep, run_tracking};
use rotordyn::integrator::simulate_model;
use rotordyn::lab::{
    check_relations, run_model_comparison, run_oracle_comparison, ComparisonConfig,
};
use rotordyn::{GenState, Outcome};

use crate::config::{Command, RunConfig};
use crate::output;

/// Result of one run: the CSV body and a human-readable summary.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub csv: String,
    pub summary: String,
    /// False only when `verify` finds a residual above tolerance.
    pub passed: bool,
}

fn comparison(cfg: &RunConfig) -> ComparisonConfig {
    ComparisonConfig {
        params: cfg.params,
        dt: cfg.dt,
        duration: cfg.duration,
        method: cfg.method,
        input: cfg.input,
        initial: GenState::default(),
    }
}

fn outcome_line(outcome: &Outcome) -> String {
    match outcome {
        Outcome::Completed => "completed".into(),
        Outcome::Diverged { t, reason } => format!("diverged at t = {t} s ({reason})"),
    }
}

pub fn execute(cfg: &RunConfig) -> rotordyn::Result<RunOutput> {
    let mut summary = String::new();
    let mut passed = true;
    let csv = match cfg.command {
        Command::Simulate => {
            let input = cfg.input;
            let traj = simulate_model(
                cfg.model,
                &cfg.params,
                |t| input.at(t),
                &GenState::default(),
                cfg.duration,
                cfg.dt,
                cfg.method,
            )?;
            let _ = writeln!(
                summary,
                "{} model, {} samples, {}",
                cfg.model.label(),
                traj.len(),
                outcome_line(&traj.outcome)
            );
            output::trajectory_csv(&traj)
        }
        Command::Compare | Command::Oracle => {
            let c = comparison(cfg);
            let table = if cfg.command == Command::Compare {
                run_model_comparison(&c)?
            } else {
                run_oracle_comparison(&c)?
            };
            let _ = write!(summary, "{table}");
            output::rmse_csv(&table)
        }
        Command::Verify => {
            let report = check_relations(
                cfg.verify.samples,
                cfg.seed,
                cfg.verify.tolerance,
                cfg.verify.partials,
            )?;
            passed = report.all_passed();
            let _ = writeln!(summary, "{report}");
            output::relations_csv(&report)
        }
        Command::Track => {
            let r = run_tracking(cfg.compensator, &cfg.helix, &cfg.gains, &cfg.params, cfg.dt)?;
            let _ = writeln!(
                summary,
                "{} compensation: max |e_eta| = {:.6} rad, {}",
                r.compensator,
                r.max_error,
                outcome_line(&r.trajectory.outcome)
            );
            output::tracking_csv(&r)
        }
        Command::Sweep => {
            let report = gain_sweep(
                &cfg.sweep_compensators,
                &cfg.ki_grid,
                &cfg.gains,
                &cfg.helix,
                &cfg.params,
                cfg.dt,
            )?;
            for comp in &cfg.sweep_compensators {
                match report.min_destabilizing(*comp) {
                    Some(ki) => {
                        let _ = writeln!(
                            summary,
                            "{comp}: smallest destabilizing Ki = {}",
                            output::num(ki)
                        );
                    }
                    None => {
                        let _ = writeln!(summary, "{comp}: stable over the whole grid");
                    }
                }
            }
            output::sweep_csv(&report)
        }
    };
    Ok(RunOutput {
        csv,
        summary,
        passed,
    })
}
