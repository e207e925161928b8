use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Fourier pseudospectral solvers for periodic nonlinear Schrödinger /
/// Gross-Pitaevskii equations.
#[derive(Parser)]
#[command(name = "expnls", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON configuration file.
    #[arg(long, global = true, default_value = "config.json")]
    config: PathBuf,

    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads (0 = automatic).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one (problem, method, h) and write per-step observables.
    Run,
    /// Sweep (method, h) cells and estimate convergence orders.
    Converge,
    /// Dump the per-mode coefficient tables for inspection.
    Coeffs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    #[cfg(feature = "parallel")]
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
        {
            eprintln!("error: failed to configure the thread pool: {e}");
            return ExitCode::from(3);
        }
    }
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: &Cli) -> expnls::Result<()> {
    let text = std::fs::read_to_string(&cli.config).map_err(|e| {
        expnls::Error::Config(format!("cannot read {}: {e}", cli.config.display()))
    })?;
    match cli.command {
        Command::Run => {
            let cfg = expnls::config::parse_run_config(&text)?;
            let artifacts = expnls::driver::cmd_run(&cfg, &cli.out)?;
            let r = &artifacts.report;
            println!(
                "{} h={} steps={} E_P={} E_M={:.3e} E_E={} wall={:.3}s",
                r.method,
                r.h,
                r.steps,
                r.e_p.map_or("n/a".into(), |v| format!("{v:.6e}")),
                r.e_m,
                r.e_e.map_or("n/a".into(), |v| format!("{v:.6e}")),
                r.wall_seconds,
            );
            Ok(())
        }
        Command::Converge => {
            let cfg = expnls::config::parse_run_config(&text)?;
            let artifacts = expnls::driver::cmd_converge(&cfg, &cli.out)?;
            for cell in &artifacts.cells {
                match cell {
                    expnls::driver::CellOutcome::Ok(r) => println!(
                        "{} h={:.6e} E_P={} E_M={:.3e}",
                        r.method,
                        r.h,
                        r.e_p.map_or("n/a".into(), |v| format!("{v:.6e}")),
                        r.e_m,
                    ),
                    expnls::driver::CellOutcome::Failed { method, h, error } => {
                        println!("{method} h={h:.6e} FAILED: {error}")
                    }
                }
            }
            for (label, est) in &artifacts.orders {
                match est {
                    Ok(e) => println!(
                        "order {label}: {:.3} (residual {:.2e}, {} points)",
                        e.slope, e.residual, e.points_used
                    ),
                    Err(e) => println!("order {label}: unavailable ({e})"),
                }
            }
            Ok(())
        }
        Command::Coeffs => {
            let cfg = expnls::config::parse_coeffs_config(&text)?;
            let dump = expnls::driver::cmd_coeffs(&cfg, &cli.out)?;
            // echo the header block
            for line in dump.lines().take_while(|l| l.starts_with('#')) {
                println!("{line}");
            }
            Ok(())
        }
    }
}
