use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use l1ofc::design::performance_bounds;
use l1ofc::runtime::AdaptationGains;
use l1ofc_harness::experiments::sweep_metrics;
use l1ofc_harness::output::{write_csv, write_design_report, write_plot_script};
use l1ofc_harness::{delay_margin_search, gamma_sweep, run_closed_loop, HarnessError, Mode, Result, RunOptions, Scenario};

#[derive(Parser)]
#[command(name = "l1ofc", version, about = "L1 adaptive output-feedback design and simulation")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the design pipeline and print the feasibility report.
    Verify { scenario: PathBuf },
    /// Simulate one closed-loop run.
    Simulate {
        scenario: PathBuf,
        /// Uniform adaptation gain overriding the scenario's.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run the scenario's static baseline instead of the adaptive loop.
        #[arg(long)]
        baseline: bool,
        /// Simulate even when the filter condition fails.
        #[arg(long)]
        allow_infeasible: bool,
    },
    /// Runs for several uniform adaptation gains.
    Sweep {
        scenario: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "50,500,5000")]
        gammas: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        allow_infeasible: bool,
    },
    /// Bisect the smallest destabilizing input delay.
    DelayMargin {
        scenario: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        allow_infeasible: bool,
    },
    /// Print the full constant table.
    Bounds {
        scenario: PathBuf,
        #[arg(long)]
        gamma: Option<f64>,
    },
}

fn out_dir(dir: &Option<PathBuf>) -> Result<Option<&Path>> {
    if let Some(d) = dir {
        fs::create_dir_all(d).map_err(|source| HarnessError::Io {
            path: d.display().to_string(),
            source,
        })?;
        write_plot_script(d)?;
    }
    Ok(dir.as_deref())
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Verify { scenario } => {
            let sc = Scenario::from_path(&scenario)?;
            print!("{}", sc.design.report_text());
            sc.design.require_feasible()?;
        }
        Cmd::Simulate {
            scenario,
            gamma,
            out,
            baseline,
            allow_infeasible,
        } => {
            let sc = Scenario::from_path(&scenario)?;
            let opts = RunOptions {
                mode: if baseline { Mode::Baseline } else { Mode::Adaptive },
                gains: gamma.map(AdaptationGains::uniform),
                allow_infeasible,
                ..RunOptions::default()
            };
            let trace = run_closed_loop(&sc, &opts)?;
            let m = sweep_metrics(&sc, &trace);
            println!(
                "{}: max|x| {:.4e}, max|u| {:.4e}, steady |xref-x| {:.4e}, steady |ytilde| {:.4e}",
                sc.file.name,
                trace.max_state_norm(),
                trace.max_input_norm(),
                m.steady_tracking,
                m.steady_estimation
            );
            if let Some(dir) = out_dir(&out)? {
                let tag = if baseline { "baseline" } else { "adaptive" };
                write_csv(&trace, &dir.join(format!("{}_{tag}.csv", sc.file.name)))?;
                write_design_report(&sc.design, &dir.join(format!("{}_design.json", sc.file.name)))?;
            }
        }
        Cmd::Sweep {
            scenario,
            gammas,
            out,
            allow_infeasible,
        } => {
            let sc = Scenario::from_path(&scenario)?;
            let base = RunOptions {
                allow_infeasible,
                ..RunOptions::default()
            };
            let rows = gamma_sweep(&sc, &gammas, &base);
            let dir = out_dir(&out)?;
            let mut table = String::from("gamma,steady_tracking,steady_estimation,envelope_steady,under_envelope,certified\n");
            for row in &rows {
                match &row.result {
                    Ok((m, trace)) => {
                        println!(
                            "gamma {:>8}: steady |xref-x| {:.4e}, steady |ytilde| {:.4e}{}",
                            row.gamma,
                            m.steady_tracking,
                            m.steady_estimation,
                            row.gamma_too_small.as_ref().map_or(String::new(), |e| format!(" [{e}]"))
                        );
                        table.push_str(&format!(
                            "{},{},{},{},{},{}\n",
                            row.gamma,
                            m.steady_tracking,
                            m.steady_estimation,
                            m.envelope_steady,
                            m.under_envelope,
                            row.gamma_too_small.is_none()
                        ));
                        if let Some(d) = dir {
                            write_csv(trace, &d.join(format!("{}_gamma{}.csv", sc.file.name, row.gamma)))?;
                        }
                    }
                    Err(e) => println!("gamma {:>8}: {e}", row.gamma),
                }
            }
            if let Some(d) = dir {
                write_text(&d.join("sweep.csv"), &table)?;
            }
            if let Some(e) = rows.into_iter().find_map(|r| r.result.err()) {
                return Err(e);
            }
        }
        Cmd::DelayMargin {
            scenario,
            max,
            out,
            allow_infeasible,
        } => {
            let sc = Scenario::from_path(&scenario)?;
            let base = RunOptions {
                allow_infeasible,
                ..RunOptions::default()
            };
            let dm = delay_margin_search(&sc, max, &base)?;
            if dm.unbounded {
                println!("no instability up to {max} s; margin ≥ {max} s");
            } else {
                println!(
                    "delay margin {:.4} s (stable {:.4}, unstable {:.4}, {} runs)",
                    dm.margin, dm.stable, dm.unstable, dm.runs
                );
            }
            if let Some(d) = out_dir(&out)? {
                write_text(
                    &d.join("delay_margin.csv"),
                    &format!(
                        "margin,stable,unstable,unbounded\n{},{},{},{}\n",
                        dm.margin, dm.stable, dm.unstable, dm.unbounded
                    ),
                )?;
            }
        }
        Cmd::Bounds { scenario, gamma } => {
            let sc = Scenario::from_path(&scenario)?;
            print!("{}", sc.design.report_text());
            let g = gamma.unwrap_or(sc.gains.min());
            match performance_bounds(&sc.design, g) {
                Ok(_) => println!("gamma {g}: certified"),
                Err(e) => println!("gamma {g}: {e}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
