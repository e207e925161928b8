//! CLI command implementations: single runs, convergence sweeps and the
//! coefficient-table inspection dump.
//!
//! Artifact formats (all versioned by a leading comment/magic line):
//!
//! * `series.csv` — per-step observables, one header row, numbers printed
//!   with 17 significant digits (bit round-trip exact for f64).
//! * `summary.json` — the [`ErrorReport`] of the run.
//! * `converge.csv` — one `run` row per `(method, h)` cell plus final
//!   `order` rows; byte-identical across runs and worker counts.
//! * `timings.csv` — wall-clock per cell, reported separately so that
//!   `converge.csv` stays deterministic.
//! * `snap_NNN.f64` / `snap_NNN.txt` — raw little-endian `|ψ|²` grid dumps
//!   with a plain-text sidecar header.

use crate::config::{
    CoeffsConfig, MethodConfig, NodeFamily, ObserverKind, ProblemConfig, RunConfig,
};
use crate::diagnostics::{self, ErrorReport, OrderEstimate};
use crate::integrators::{integrate_with, MethodSpec, Observers, SplittingScheme, StepperConfig};
use crate::problems::{self, Problem, RotatingTrap};
use crate::spectral::Grid;
use crate::tableau::ButcherTableau;
use crate::{coefficients, par, Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// 17 significant digits: exact round trip for f64.
fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn build_nodes(s: usize, family: NodeFamily) -> Result<coefficients::CollocationNodes> {
    match family {
        NodeFamily::Gauss => coefficients::gauss_nodes(s),
        NodeFamily::Equispaced => coefficients::equispaced_nodes(s),
    }
}

fn build_tableau(s: usize, family: NodeFamily) -> Result<ButcherTableau> {
    match family {
        NodeFamily::Gauss => coefficients::gauss_tableau(s),
        NodeFamily::Equispaced => {
            Ok(coefficients::collocation_tableau(&coefficients::equispaced_nodes(s)?))
        }
    }
}

pub fn build_method(cfg: &MethodConfig) -> Result<MethodSpec> {
    Ok(match cfg {
        MethodConfig::Erk { s, nodes } => MethodSpec::Erk {
            nodes: build_nodes(*s, *nodes)?,
        },
        MethodConfig::Lawson { s, nodes } => MethodSpec::Lawson {
            tableau: build_tableau(*s, *nodes)?,
        },
        MethodConfig::Splitting { order } => MethodSpec::Splitting {
            scheme: SplittingScheme::of_order(*order)?,
        },
    })
}

/// Materialize the configured problem on the configured grid.
pub fn build_problem(cfg: &RunConfig) -> Result<Problem> {
    let grid = cfg.grid.build()?;
    match &cfg.problem {
        ProblemConfig::Soliton1d { q, a, c, x0 } => {
            problems::cubic_soliton_1d(*q, *a, *c, *x0, &grid)
        }
        ProblemConfig::CubicQuintic1d {
            g1,
            g2,
            omega,
            e_c,
            beta0,
        } => problems::cubic_quintic_1d(*g1, *g2, *omega, *e_c, *beta0, &grid),
        ProblemConfig::SinAbs1d { q } => problems::sin_abs_1d(*q, &grid),
        ProblemConfig::Plane2d { shooting_tolerance } => {
            let profile = problems::ground_profile_2d(*shooting_tolerance)?;
            problems::cubic_plane_2d(&grid, &profile)
        }
        ProblemConfig::RotatingBec {
            beta,
            omega,
            gamma_x,
            gamma_y,
        } => {
            if grid.dims() != 2 {
                return Err(Error::Config(
                    "rotating_bec requires a 2-D grid".into(),
                ));
            }
            let delta = grid.axis(0).extent();
            if delta < 4.0 {
                eprintln!(
                    "warning: truncation size delta = {delta} is small; the cutoff \
                     plateau shrinks to [{:.2}, {:.2}]",
                    1.0 - delta / 2.0,
                    delta / 2.0 - 1.0
                );
            }
            let trap = RotatingTrap {
                gamma_x: *gamma_x,
                gamma_y: *gamma_y,
                omega: *omega,
                delta,
            };
            let tf = problems::thomas_fermi_initial(&trap, *beta, &grid)?;
            problems::rotating_gpe_2d(&trap, *beta, tf.into_values(), &grid)
        }
    }
}

fn observers_for(cfg: &RunConfig, problem: &Problem) -> Observers {
    if cfg.observers.is_empty() {
        return Observers {
            mass: true,
            energy: true,
            phase_error: problem.has_exact(),
            angular_momentum: false,
        };
    }
    let mut obs = Observers::default();
    for o in &cfg.observers {
        match o {
            ObserverKind::Mass => obs.mass = true,
            ObserverKind::Energy => obs.energy = true,
            ObserverKind::PhaseError => obs.phase_error = true,
            ObserverKind::AngularMomentum => obs.angular_momentum = true,
        }
    }
    obs
}

fn stepper_config(cfg: &RunConfig) -> StepperConfig {
    cfg.solver
        .as_ref()
        .map(|s| s.stepper_config())
        .unwrap_or_default()
}

/// Snapshot schedule: map configured times onto step indices.
fn snapshot_steps(cfg: &RunConfig, h: f64, n_steps: usize) -> Result<Vec<(usize, f64)>> {
    let Some(snap) = &cfg.snapshots else {
        return Ok(Vec::new());
    };
    if cfg.grid.axes.len() != 2 {
        return Err(Error::Config(
            "density snapshots are only supported on 2-D grids".into(),
        ));
    }
    let mut times = snap.times.clone();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out = Vec::with_capacity(times.len());
    for &t in &times {
        let n = (t / h).round() as isize;
        if n < 0 || n as usize > n_steps || (n as f64 * h - t).abs() > 1e-9 * t.abs().max(1.0) {
            return Err(Error::Config(format!(
                "snapshot time {t} does not align with the step grid (h = {h})"
            )));
        }
        out.push((n as usize, t));
    }
    Ok(out)
}

fn write_snapshot(
    out_dir: &Path,
    index: usize,
    grid: &Grid,
    t: f64,
    state: &[num_complex::Complex64],
) -> Result<()> {
    let mut bytes = Vec::with_capacity(state.len() * 8);
    for v in state {
        bytes.extend_from_slice(&v.norm_sqr().to_le_bytes());
    }
    std::fs::write(out_dir.join(format!("snap_{index:03}.f64")), bytes)?;
    let mut header = String::from("expnls-snapshot-v1\n");
    let _ = writeln!(header, "dims {}", grid.dims());
    let _ = writeln!(
        header,
        "nx {} ny {}",
        grid.axis(0).modes(),
        grid.axis(1).modes()
    );
    let _ = writeln!(
        header,
        "x_left {} x_right {}",
        fmt_f64(grid.axis(0).x_left),
        fmt_f64(grid.axis(0).x_right)
    );
    let _ = writeln!(
        header,
        "y_left {} y_right {}",
        fmt_f64(grid.axis(1).x_left),
        fmt_f64(grid.axis(1).x_right)
    );
    let _ = writeln!(header, "t {}", fmt_f64(t));
    header.push_str("format float64-le density row-major x-fastest\n");
    std::fs::write(out_dir.join(format!("snap_{index:03}.txt")), header)?;
    Ok(())
}

/// Summary of a completed `run` invocation.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RunArtifacts {
    pub report: ErrorReport,
    /// Sup-in-time relative drift of the discrete energy against its initial
    /// value (defined with or without an exact solution).
    pub energy_drift: Option<f64>,
    pub max_iterations: usize,
    pub snapshots: usize,
}

/// `run`: integrate one (problem, method, h), write `series.csv`,
/// `summary.json` and any snapshots into `out_dir`.
pub fn cmd_run(cfg: &RunConfig, out_dir: &Path) -> Result<RunArtifacts> {
    let method_cfg = cfg
        .method
        .clone()
        .ok_or_else(|| Error::Config("`run` requires the `method` field".into()))?;
    let h = cfg.time.single_h()?;
    let problem = build_problem(cfg)?;
    let method = build_method(&method_cfg)?;
    let observers = observers_for(cfg, &problem);
    let n_steps = (cfg.time.t_final / h).round() as usize;
    let snaps = snapshot_steps(cfg, h, n_steps)?;

    std::fs::create_dir_all(out_dir)?;
    let grid = problem.grid().clone();
    let mut snap_written = 0usize;
    let run = integrate_with(
        &problem,
        &method,
        cfg.time.t_final,
        h,
        observers,
        stepper_config(cfg),
        |step, _t, state| {
            for (i, &(snap_step, snap_t)) in snaps.iter().enumerate() {
                if snap_step == step && write_snapshot(out_dir, i, &grid, snap_t, state).is_ok() {
                    snap_written += 1;
                }
            }
        },
    )?;

    // per-step CSV
    let mut csv = String::from("# expnls-series-v1\n");
    let mut cols = vec!["step", "t"];
    if observers.mass {
        cols.push("mass");
    }
    if observers.energy {
        cols.push("energy");
    }
    if observers.phase_error {
        cols.push("phase_error");
    }
    if observers.angular_momentum {
        cols.push("angular_momentum");
    }
    csv.push_str(&cols.join(","));
    csv.push('\n');
    for i in 0..run.series.t.len() {
        let mut row = vec![i.to_string(), fmt_f64(run.series.t[i])];
        if observers.mass {
            row.push(fmt_f64(run.series.mass[i]));
        }
        if observers.energy {
            row.push(fmt_f64(run.series.energy[i]));
        }
        if observers.phase_error {
            row.push(fmt_f64(run.series.phase_error[i]));
        }
        if observers.angular_momentum {
            row.push(fmt_f64(run.series.angular_momentum[i]));
        }
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    std::fs::write(out_dir.join("series.csv"), csv)?;

    let report = diagnostics::error_report(
        method_cfg.label(),
        h,
        &run.series,
        run.steps,
        run.wall_seconds,
        run.setup_seconds,
    );
    let energy_drift = run.series.energy.first().map(|&e0| {
        run.series
            .energy
            .iter()
            .fold(0.0f64, |m, &e| m.max((e - e0).abs()))
            / e0.abs().max(f64::MIN_POSITIVE)
    });
    let artifacts = RunArtifacts {
        report,
        energy_drift,
        max_iterations: run.max_iterations,
        snapshots: snap_written,
    };
    std::fs::write(
        out_dir.join("summary.json"),
        serde_json::to_string_pretty(&artifacts).expect("serializable"),
    )?;
    Ok(artifacts)
}

/// One convergence-sweep cell result.
#[derive(Debug, Clone)]
pub enum CellOutcome {
    Ok(ErrorReport),
    Failed { method: String, h: f64, error: String },
}

/// Sweep results plus per-method order estimates.
#[derive(Debug)]
pub struct ConvergeArtifacts {
    pub cells: Vec<CellOutcome>,
    pub orders: Vec<(String, Result<OrderEstimate>)>,
}

/// `converge`: run every `(method, h)` cell (in parallel with the default
/// feature set), then estimate per-method orders from the phase errors.
pub fn cmd_converge(cfg: &RunConfig, out_dir: &Path) -> Result<ConvergeArtifacts> {
    if cfg.methods.is_empty() {
        return Err(Error::Config(
            "`converge` requires a non-empty `methods` list".into(),
        ));
    }
    // snap each requested step onto the time grid: h' = T / round(T/h)
    let h_list: Vec<f64> = cfg
        .time
        .step_list()?
        .into_iter()
        .map(|h| {
            let n = (cfg.time.t_final / h).round().max(1.0);
            cfg.time.t_final / n
        })
        .collect();
    let problem = build_problem(cfg)?;
    let observers = observers_for(cfg, &problem);
    let solver = stepper_config(cfg);
    let window = cfg
        .order_window
        .map(|w| (w[0], w[1]))
        .unwrap_or(diagnostics::ORDER_WINDOW);

    struct Job {
        method: MethodConfig,
        h: f64,
    }
    let jobs: Vec<Job> = cfg
        .methods
        .iter()
        .flat_map(|m| {
            h_list.iter().map(move |&h| Job {
                method: m.clone(),
                h,
            })
        })
        .collect();

    let cells: Vec<CellOutcome> = par::collect_indexed(jobs.len(), |i| {
        let job = &jobs[i];
        let label = job.method.label();
        let run = build_method(&job.method).and_then(|m| {
            crate::integrators::integrate(
                &problem,
                &m,
                cfg.time.t_final,
                job.h,
                observers,
                solver,
            )
        });
        match run {
            Ok(run) => CellOutcome::Ok(diagnostics::error_report(
                label,
                job.h,
                &run.series,
                run.steps,
                run.wall_seconds,
                run.setup_seconds,
            )),
            Err(e) => CellOutcome::Failed {
                method: label,
                h: job.h,
                error: e.to_string(),
            },
        }
    });

    let mut orders = Vec::new();
    for m in &cfg.methods {
        let label = m.label();
        let points: Vec<(f64, f64)> = cells
            .iter()
            .filter_map(|c| match c {
                CellOutcome::Ok(r) if r.method == label => r.e_p.map(|e| (r.h, e)),
                _ => None,
            })
            .collect();
        orders.push((label, diagnostics::order_estimate(&points, window)));
    }

    std::fs::create_dir_all(out_dir)?;
    let mut csv = String::from("# expnls-converge-v1\n");
    csv.push_str("kind,method,h,status,e_p,e_m,e_e,order_slope,order_residual,points_used\n");
    let mut timings = String::from("# expnls-timings-v1\nmethod,h,wall_seconds,setup_seconds\n");
    for cell in &cells {
        match cell {
            CellOutcome::Ok(r) => {
                csv.push_str(&format!(
                    "run,{},{},ok,{},{},{},,,\n",
                    r.method,
                    fmt_f64(r.h),
                    fmt_opt(r.e_p),
                    fmt_f64(r.e_m),
                    fmt_opt(r.e_e),
                ));
                timings.push_str(&format!(
                    "{},{},{},{}\n",
                    r.method,
                    fmt_f64(r.h),
                    fmt_f64(r.wall_seconds),
                    fmt_f64(r.setup_seconds),
                ));
            }
            CellOutcome::Failed { method, h, error } => {
                csv.push_str(&format!(
                    "run,{},{},failed: {},,,,,,\n",
                    method,
                    fmt_f64(*h),
                    error.replace(',', ";"),
                ));
            }
        }
    }
    for (label, est) in &orders {
        match est {
            Ok(e) => csv.push_str(&format!(
                "order,{label},,ok,,,,{},{},{}\n",
                fmt_f64(e.slope),
                fmt_f64(e.residual),
                e.points_used
            )),
            Err(err) => csv.push_str(&format!(
                "order,{label},,failed: {},,,,,,\n",
                err.to_string().replace(',', ";")
            )),
        }
    }
    std::fs::write(out_dir.join("converge.csv"), csv)?;
    std::fs::write(out_dir.join("timings.csv"), timings)?;
    Ok(ConvergeArtifacts { cells, orders })
}

/// `coeffs`: dump the per-mode coefficient tables, the evaluation regime per
/// mode, the mode-0 tableau cross-check and the regime threshold crossing.
pub fn cmd_coeffs(cfg: &CoeffsConfig, out_dir: &Path) -> Result<String> {
    let grid = cfg.grid.build()?;
    let nodes = build_nodes(cfg.s, cfg.nodes)?;
    let tableau = build_tableau(cfg.s, cfg.nodes)?;
    let alphas = coefficients::erk_alpha_set(&nodes);
    let tables = coefficients::precompute_tables(&grid, cfg.h, &nodes, cfg.nu, &alphas)?;
    let omega = grid.laplacian_symbol();
    let s = cfg.s;

    let mut out = String::from("# expnls-coeffs-v1\n");
    let _ = writeln!(
        out,
        "# s {} h {} nu {} modes {}",
        s,
        fmt_f64(cfg.h),
        fmt_f64(cfg.nu),
        grid.len()
    );

    // mode-0 cross-check against the underlying tableau
    let mut worst = 0.0f64;
    for k in 0..s {
        for l in 0..s {
            worst = worst.max((tables.a(k, l)[0].re - tableau.a[k][l]).abs());
            worst = worst.max(tables.a(k, l)[0].im.abs());
        }
        worst = worst.max((tables.b(k)[0].re - tableau.b[k]).abs());
        worst = worst.max(tables.b(k)[0].im.abs());
    }
    let _ = writeln!(
        out,
        "# mode0-tableau-check max-defect {} {}",
        fmt_f64(worst),
        if worst < 1e-13 { "pass" } else { "FAIL" }
    );
    let threshold = tables
        .regimes()
        .iter()
        .position(|r| *r == coefficients::Regime::Direct);
    let _ = writeln!(
        out,
        "# first-direct-mode {}",
        threshold.map_or("none".into(), |i| i.to_string())
    );

    let mut header = vec!["mode".to_string(), "omega".into(), "regime".into()];
    for k in 0..s {
        for l in 0..s {
            header.push(format!("a{}{}_re", k + 1, l + 1));
            header.push(format!("a{}{}_im", k + 1, l + 1));
        }
    }
    for k in 0..s {
        header.push(format!("b{}_re", k + 1));
        header.push(format!("b{}_im", k + 1));
    }
    out.push_str(&header.join(","));
    out.push('\n');
    for m in 0..grid.len() {
        let mut row = vec![
            m.to_string(),
            fmt_f64(omega[m]),
            match tables.regimes()[m] {
                coefficients::Regime::Contour => "contour".to_string(),
                coefficients::Regime::Direct => "direct".to_string(),
            },
        ];
        for k in 0..s {
            for l in 0..s {
                row.push(fmt_f64(tables.a(k, l)[m].re));
                row.push(fmt_f64(tables.a(k, l)[m].im));
            }
        }
        for k in 0..s {
            row.push(fmt_f64(tables.b(k)[m].re));
            row.push(fmt_f64(tables.b(k)[m].im));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::create_dir_all(out_dir)?;
    std::fs::write(out_dir.join("coeffs.csv"), &out)?;
    Ok(out)
}
