//! Time-stepping engines: exponential Runge-Kutta collocation, Lawson
//! methods over any Butcher tableau, and splitting methods of orders
//! 1, 2, 4 and 6, plus the fixed-point stage solver and the reverse-step
//! facility used by the symmetry tests.
//!
//! All steppers advance `∂_t ψ = iνΔψ + N_w(t,ψ)` with
//! `N_w(t,ψ) = −i(w(t,x) + g(|ψ|²))ψ`; the linear part is applied exactly in
//! spectral space. A reverse step evaluates the same formulas with
//! `t_n ↔ t_{n+1}` and `h ↔ −h`, which for tables built at `+h` amounts to
//! conjugating the per-mode symbols.

use crate::coefficients::{
    self, CoefficientTables, CollocationNodes, Propagators,
};
use crate::diagnostics::{self, StepSeries};
use crate::problems::Problem;
use crate::spectral::{forward_in_place, inverse_in_place, Grid};
pub use crate::tableau::ButcherTableau;
use crate::{Error, Result};
use num_complex::Complex64;
use std::time::Instant;

/// Fixed-point solver parameters for the implicit stage systems.
#[derive(Debug, Clone, Copy)]
pub struct StepperConfig {
    /// Relative ℓ² tolerance on the stage updates.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Abort when an iterate grows beyond this factor times the input norm.
    pub divergence_factor: f64,
}

impl Default for StepperConfig {
    fn default() -> Self {
        StepperConfig {
            tolerance: 1e-14,
            max_iterations: 200,
            divergence_factor: 1e6,
        }
    }
}

/// Composition coefficients of a splitting scheme,
/// `S_{N_w}(a_1 h) S_L(b_1 h) ⋯ S_{N_w}(a_r h) S_L(b_r h) S_{N_w}(a_{r+1} h)`
/// (the rightmost factor acts first).
#[derive(Debug, Clone, PartialEq)]
pub struct SplittingScheme {
    pub order: u32,
    /// `r + 1` nonlinear-substep fractions.
    pub a: Vec<f64>,
    /// `r` linear-substep fractions.
    pub b: Vec<f64>,
}

impl SplittingScheme {
    /// Lie splitting `S_{N_w}(h) S_L(h)`.
    pub fn lie() -> Self {
        SplittingScheme {
            order: 1,
            a: vec![1.0, 0.0],
            b: vec![1.0],
        }
    }

    /// Strang splitting.
    pub fn strang() -> Self {
        SplittingScheme {
            order: 2,
            a: vec![0.5, 0.5],
            b: vec![1.0],
        }
    }

    /// Fourth-order triple-jump coefficients, `θ = (2+2^{1/3}+2^{−1/3})/6`.
    pub fn order4() -> Self {
        let theta = (2.0 + 2.0f64.powf(1.0 / 3.0) + 2.0f64.powf(-1.0 / 3.0)) / 6.0;
        SplittingScheme {
            order: 4,
            a: vec![theta, 0.5 - theta, 0.5 - theta, theta],
            b: vec![2.0 * theta, 1.0 - 4.0 * theta, 2.0 * theta],
        }
    }

    /// Sixth-order palindromic coefficients.
    pub fn order6() -> Self {
        let a1 = 0.0502627644003922;
        let a2 = 0.413514300428344;
        let a3 = 0.0450798897943977;
        let a4 = -0.188054853819569;
        let a5 = 0.541960678450780;
        let a6 = 1.0 - 2.0 * (a1 + a2 + a3 + a4 + a5);
        let b1 = 0.148816447901042;
        let b2 = -0.132385865767784;
        let b3 = 0.067307604692185;
        let b4 = 0.432666402578175;
        let b5 = 0.5 - (b1 + b2 + b3 + b4);
        SplittingScheme {
            order: 6,
            a: vec![a1, a2, a3, a4, a5, a6, a5, a4, a3, a2, a1],
            b: vec![b1, b2, b3, b4, b5, b5, b4, b3, b2, b1],
        }
    }

    pub fn of_order(order: u32) -> Result<Self> {
        match order {
            1 => Ok(Self::lie()),
            2 => Ok(Self::strang()),
            4 => Ok(Self::order4()),
            6 => Ok(Self::order6()),
            _ => Err(Error::InvalidParameter(format!(
                "no splitting scheme of order {order}; available: 1, 2, 4, 6"
            ))),
        }
    }

    /// Largest defect of the palindromic symmetry
    /// `a_{r+2−ℓ} = a_ℓ`, `b_{r+1−ℓ} = b_ℓ`.
    pub fn palindromy_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        let n = self.a.len();
        for l in 0..n {
            worst = worst.max((self.a[l] - self.a[n - 1 - l]).abs());
        }
        let m = self.b.len();
        for l in 0..m {
            worst = worst.max((self.b[l] - self.b[m - 1 - l]).abs());
        }
        worst
    }
}

/// Method selector consumed by [`integrate`].
#[derive(Debug, Clone)]
pub enum MethodSpec {
    Erk { nodes: CollocationNodes },
    Lawson { tableau: ButcherTableau },
    Splitting { scheme: SplittingScheme },
}

/// Result of one step.
#[derive(Debug, Clone)]
pub struct StepResult {
    pub state: Vec<Complex64>,
    /// Fixed-point iterations used (0 for splitting).
    pub iterations: usize,
}

fn plain_l2(values: &[Complex64]) -> f64 {
    values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// mode-wise `out[m] = sym[m]·x[m]` with optional conjugation of `sym`.
fn apply_symbol(out: &mut [Complex64], sym: &[Complex64], x: &[Complex64], conj: bool) {
    if conj {
        for i in 0..out.len() {
            out[i] = sym[i].conj() * x[i];
        }
    } else {
        for i in 0..out.len() {
            out[i] = sym[i] * x[i];
        }
    }
}

/// mode-wise `out[m] += scale·sym[m]·x[m]` with optional conjugation.
fn axpy_symbol(
    out: &mut [Complex64],
    scale: Complex64,
    sym: &[Complex64],
    x: &[Complex64],
    conj: bool,
) {
    if conj {
        for i in 0..out.len() {
            out[i] += scale * sym[i].conj() * x[i];
        }
    } else {
        for i in 0..out.len() {
            out[i] += scale * sym[i] * x[i];
        }
    }
}

struct FixedPointOutcome {
    iterations: usize,
}

/// Shared fixed-point driver for the implicit stage systems. `update`
/// recomputes all stages from the current ones into `new_stages` and is fed
/// the latest nonlinearity transforms.
#[allow(clippy::too_many_arguments)]
fn solve_stages(
    problem: &Problem,
    w_stage: &[Option<Vec<f64>>],
    stages: &mut [Vec<Complex64>],
    n_hat: &mut [Vec<Complex64>],
    config: &StepperConfig,
    step: usize,
    input_norm: f64,
    mut rebuild: impl FnMut(&[Vec<Complex64>], &mut [Vec<Complex64>]),
) -> Result<FixedPointOutcome> {
    let grid = problem.grid();
    let s = stages.len();
    let mut scratch = vec![Complex64::ZERO; grid.len()];
    let mut new_stages = vec![vec![Complex64::ZERO; grid.len()]; s];
    for iter in 1..=config.max_iterations {
        for l in 0..s {
            problem.nw_with(w_stage[l].as_deref(), &stages[l], &mut scratch);
            n_hat[l].copy_from_slice(&scratch);
            forward_in_place(grid, &mut n_hat[l]);
        }
        rebuild(n_hat, &mut new_stages);
        let mut worst = 0.0f64;
        for k in 0..s {
            inverse_in_place(grid, &mut new_stages[k]);
            let mut diff2 = 0.0;
            let mut norm2 = 0.0;
            for (a, b) in new_stages[k].iter().zip(&stages[k]) {
                diff2 += (a - b).norm_sqr();
                norm2 += a.norm_sqr();
            }
            worst = worst.max((diff2.sqrt()) / norm2.sqrt().max(f64::MIN_POSITIVE));
            std::mem::swap(&mut stages[k], &mut new_stages[k]);
            if norm2.sqrt() > config.divergence_factor * input_norm.max(f64::MIN_POSITIVE) {
                return Err(Error::DivergenceGuard { step });
            }
        }
        if worst < config.tolerance {
            // transforms of the converged stages for the final combination
            for l in 0..s {
                problem.nw_with(w_stage[l].as_deref(), &stages[l], &mut scratch);
                n_hat[l].copy_from_slice(&scratch);
                forward_in_place(grid, &mut n_hat[l]);
            }
            return Ok(FixedPointOutcome { iterations: iter });
        }
    }
    Err(Error::NoConvergence {
        step,
        iterations: config.max_iterations,
    })
}

fn check_step_size(h: f64, tables_h: f64) -> Result<f64> {
    if (h.abs() - tables_h).abs() > 1e-14 * tables_h {
        return Err(Error::InvalidParameter(format!(
            "step size {h} does not match the precomputed tables (h = {tables_h})"
        )));
    }
    Ok(h.signum())
}

/// One exponential Runge-Kutta collocation step.
///
/// Solves `ψ_{n,k} = e^{c_k hL}ψ_n + h Σ_ℓ a_{k,ℓ}(hL) N_w(t_n+c_ℓ h, ψ_{n,ℓ})`
/// by fixed-point iteration, then combines
/// `ψ_{n+1} = e^{hL}ψ_n + h Σ_k b_k(hL) N_w(t_n+c_k h, ψ_{n,k})`.
/// A negative `h` performs the reverse step from `t_n` (tables stay those of
/// `|h|`).
pub fn erk_step(
    psi: &[Complex64],
    t_n: f64,
    h: f64,
    tables: &CoefficientTables,
    problem: &Problem,
    config: &StepperConfig,
) -> Result<StepResult> {
    erk_step_indexed(psi, t_n, h, tables, problem, config, 0)
}

fn erk_step_indexed(
    psi: &[Complex64],
    t_n: f64,
    h: f64,
    tables: &CoefficientTables,
    problem: &Problem,
    config: &StepperConfig,
    step: usize,
) -> Result<StepResult> {
    check_step_size(h, tables.h())?;
    let conj = h < 0.0;
    let grid = problem.grid();
    let n = grid.len();
    let s = tables.s();
    let c = tables.nodes_c();
    let props = tables.propagators();
    let idx_c: Vec<usize> = c.iter().map(|&ck| props.index_of(ck)).collect();
    let idx_one = props.index_of(1.0);

    let mut psi_hat = psi.to_vec();
    forward_in_place(grid, &mut psi_hat);

    // initial guess: the linear part of the stage equations
    let mut stages = vec![vec![Complex64::ZERO; n]; s];
    for k in 0..s {
        apply_symbol(&mut stages[k], props.symbols(idx_c[k]), &psi_hat, conj);
        inverse_in_place(grid, &mut stages[k]);
    }
    let w_stage: Vec<Option<Vec<f64>>> = c
        .iter()
        .map(|&ck| problem.potential_grid(t_n + ck * h))
        .collect();

    let mut n_hat = vec![vec![Complex64::ZERO; n]; s];
    let hc = Complex64::new(h, 0.0);
    let outcome = solve_stages(
        problem,
        &w_stage,
        &mut stages,
        &mut n_hat,
        config,
        step,
        plain_l2(psi),
        |n_hat, new_stages| {
            for k in 0..s {
                apply_symbol(&mut new_stages[k], props.symbols(idx_c[k]), &psi_hat, conj);
                for l in 0..s {
                    axpy_symbol(&mut new_stages[k], hc, tables.a(k, l), &n_hat[l], conj);
                }
            }
        },
    )?;

    let mut out = vec![Complex64::ZERO; n];
    apply_symbol(&mut out, props.symbols(idx_one), &psi_hat, conj);
    for k in 0..s {
        axpy_symbol(&mut out, hc, tables.b(k), &n_hat[k], conj);
    }
    inverse_in_place(grid, &mut out);
    Ok(StepResult {
        state: out,
        iterations: outcome.iterations,
    })
}

/// One Lawson step over the tableau `(a, b)`:
/// `ψ_{n,k} = e^{c_k hL}ψ_n + h Σ_ℓ a_{k,ℓ} e^{(c_k−c_ℓ)hL} N_w(t_n+c_ℓ h, ψ_{n,ℓ})`,
/// `ψ_{n+1} = e^{hL}ψ_n + h Σ_k b_k e^{(1−c_k)hL} N_w(t_n+c_k h, ψ_{n,k})`.
/// A negative `h` performs the reverse step from `t_n`.
pub fn lawson_step(
    psi: &[Complex64],
    t_n: f64,
    h: f64,
    tableau: &ButcherTableau,
    props: &Propagators,
    problem: &Problem,
    config: &StepperConfig,
) -> Result<StepResult> {
    lawson_step_indexed(psi, t_n, h, tableau, props, problem, config, 0)
}

#[allow(clippy::too_many_arguments)]
fn lawson_step_indexed(
    psi: &[Complex64],
    t_n: f64,
    h: f64,
    tableau: &ButcherTableau,
    props: &Propagators,
    problem: &Problem,
    config: &StepperConfig,
    step: usize,
) -> Result<StepResult> {
    let conj = h < 0.0;
    let grid = problem.grid();
    let n = grid.len();
    let s = tableau.s;
    let c = &tableau.c;
    let idx_c: Vec<usize> = c.iter().map(|&ck| props.index_of(ck)).collect();
    let idx_diff: Vec<Vec<usize>> = c
        .iter()
        .map(|&ck| c.iter().map(|&cl| props.index_of(ck - cl)).collect())
        .collect();
    let idx_tail: Vec<usize> = c.iter().map(|&ck| props.index_of(1.0 - ck)).collect();
    let idx_one = props.index_of(1.0);

    let mut psi_hat = psi.to_vec();
    forward_in_place(grid, &mut psi_hat);

    let mut stages = vec![vec![Complex64::ZERO; n]; s];
    for k in 0..s {
        apply_symbol(&mut stages[k], props.symbols(idx_c[k]), &psi_hat, conj);
        inverse_in_place(grid, &mut stages[k]);
    }
    let w_stage: Vec<Option<Vec<f64>>> = c
        .iter()
        .map(|&ck| problem.potential_grid(t_n + ck * h))
        .collect();

    let mut n_hat = vec![vec![Complex64::ZERO; n]; s];
    let outcome = solve_stages(
        problem,
        &w_stage,
        &mut stages,
        &mut n_hat,
        config,
        step,
        plain_l2(psi),
        |n_hat, new_stages| {
            for k in 0..s {
                apply_symbol(&mut new_stages[k], props.symbols(idx_c[k]), &psi_hat, conj);
                for l in 0..s {
                    if tableau.a[k][l] != 0.0 {
                        let scale = Complex64::new(h * tableau.a[k][l], 0.0);
                        axpy_symbol(
                            &mut new_stages[k],
                            scale,
                            props.symbols(idx_diff[k][l]),
                            &n_hat[l],
                            conj,
                        );
                    }
                }
            }
        },
    )?;

    let mut out = vec![Complex64::ZERO; n];
    apply_symbol(&mut out, props.symbols(idx_one), &psi_hat, conj);
    for k in 0..s {
        if tableau.b[k] != 0.0 {
            let scale = Complex64::new(h * tableau.b[k], 0.0);
            axpy_symbol(&mut out, scale, props.symbols(idx_tail[k]), &n_hat[k], conj);
        }
    }
    inverse_in_place(grid, &mut out);
    Ok(StepResult {
        state: out,
        iterations: outcome.iterations,
    })
}

/// Linear-substep phase tables `e^{b_j h iνω}` for a splitting scheme.
#[derive(Debug, Clone)]
pub struct SplitPhases {
    /// distinct linear coefficients and their spectral phases at `+h`
    coeffs: Vec<f64>,
    phases: Vec<Vec<Complex64>>,
}

impl SplitPhases {
    pub fn build(grid: &Grid, h: f64, nu: f64, scheme: &SplittingScheme) -> Self {
        let coeffs = coefficients::dedup_alphas(&scheme.b);
        let omega = grid.laplacian_symbol();
        let phases = coeffs
            .iter()
            .map(|&bj| {
                omega
                    .iter()
                    .map(|&w| Complex64::from_polar(1.0, bj * h * nu * w))
                    .collect()
            })
            .collect();
        SplitPhases { coeffs, phases }
    }

    fn index_of(&self, b: f64) -> usize {
        self.coeffs
            .iter()
            .position(|&v| (v - b).abs() <= 1e-14)
            .expect("phase table missing a coefficient")
    }
}

/// One splitting step. The linear flows are exact spectral phase
/// multiplications; the nonlinear flows are exact pointwise phase rotations
/// using the problem's closed-form potential time integral. A negative `h`
/// performs the reverse step from `t_n`.
pub fn splitting_step(
    psi: &[Complex64],
    t_n: f64,
    h: f64,
    scheme: &SplittingScheme,
    problem: &Problem,
    phases: &SplitPhases,
) -> Result<StepResult> {
    let conj = h < 0.0;
    let grid = problem.grid();
    let mut state = psi.to_vec();
    let mut scratch = vec![0.0; grid.len()];
    let r = scheme.b.len();
    let mut tau = t_n;
    // rightmost factor of the composition first
    let mut apply_n = |state: &mut Vec<Complex64>, tau: &mut f64, frac: f64| {
        if frac != 0.0 {
            problem.nw_flow(*tau, frac * h, state, &mut scratch);
            *tau += frac * h;
        }
    };
    apply_n(&mut state, &mut tau, scheme.a[r]);
    for j in (0..r).rev() {
        if scheme.b[j] != 0.0 {
            forward_in_place(grid, &mut state);
            let phase = &phases.phases[phases.index_of(scheme.b[j])];
            if conj {
                for (v, p) in state.iter_mut().zip(phase) {
                    *v *= p.conj();
                }
            } else {
                for (v, p) in state.iter_mut().zip(phase) {
                    *v *= p;
                }
            }
            inverse_in_place(grid, &mut state);
        }
        apply_n(&mut state, &mut tau, scheme.a[j]);
    }
    Ok(StepResult {
        state,
        iterations: 0,
    })
}

/// Prepared stepper for a fixed `(problem, method, h)`.
pub struct Engine<'p> {
    problem: &'p Problem,
    h: f64,
    config: StepperConfig,
    kind: EngineKind,
    /// Seconds spent in coefficient precomputation.
    pub setup_seconds: f64,
}

enum EngineKind {
    Erk(CoefficientTables),
    Lawson {
        tableau: ButcherTableau,
        props: Propagators,
    },
    Splitting {
        scheme: SplittingScheme,
        phases: SplitPhases,
    },
}

impl<'p> Engine<'p> {
    pub fn new(
        problem: &'p Problem,
        method: &MethodSpec,
        h: f64,
        config: StepperConfig,
    ) -> Result<Self> {
        if h <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "step size must be positive, got {h}"
            )));
        }
        let grid = problem.grid();
        let nu = problem.nu();
        let start = Instant::now();
        let kind = match method {
            MethodSpec::Erk { nodes } => {
                let alphas = coefficients::erk_alpha_set(nodes);
                let tables = coefficients::cache::precompute_tables_env_cached(
                    grid, h, nodes, nu, &alphas,
                )?;
                EngineKind::Erk(tables)
            }
            MethodSpec::Lawson { tableau } => {
                let alphas = coefficients::lawson_alpha_set(&tableau.c);
                let props = Propagators::build(grid, h, nu, &alphas);
                EngineKind::Lawson {
                    tableau: tableau.clone(),
                    props,
                }
            }
            MethodSpec::Splitting { scheme } => {
                let phases = SplitPhases::build(grid, h, nu, scheme);
                EngineKind::Splitting {
                    scheme: scheme.clone(),
                    phases,
                }
            }
        };
        Ok(Engine {
            problem,
            h,
            config,
            kind,
            setup_seconds: start.elapsed().as_secs_f64(),
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    fn step_signed(
        &self,
        psi: &[Complex64],
        t_base: f64,
        h: f64,
        step: usize,
    ) -> Result<StepResult> {
        match &self.kind {
            EngineKind::Erk(tables) => {
                erk_step_indexed(psi, t_base, h, tables, self.problem, &self.config, step)
            }
            EngineKind::Lawson { tableau, props } => lawson_step_indexed(
                psi,
                t_base,
                h,
                tableau,
                props,
                self.problem,
                &self.config,
                step,
            ),
            EngineKind::Splitting { scheme, phases } => {
                splitting_step(psi, t_base, h, scheme, self.problem, phases)
            }
        }
    }

    /// Forward step `Φ_{t_n → t_n + h}`.
    pub fn step(&self, psi: &[Complex64], t_n: f64) -> Result<StepResult> {
        self.step_signed(psi, t_n, self.h, 0)
    }

    /// Reverse step `Φ_{t_{n+1} → t_{n+1} − h}`: the forward formulas with
    /// `t_n ↔ t_{n+1}` and `h ↔ −h`.
    pub fn reverse_step(&self, psi: &[Complex64], t_next: f64) -> Result<StepResult> {
        self.step_signed(psi, t_next, -self.h, 0)
    }
}

/// Reverse step through an engine; for symmetric methods composed with the
/// forward step it reproduces the input up to the solver tolerance.
pub fn reverse_step(
    engine: &Engine<'_>,
    psi_next: &[Complex64],
    t_next: f64,
) -> Result<StepResult> {
    engine.reverse_step(psi_next, t_next)
}

/// Observer switches for [`integrate`].
#[derive(Debug, Clone, Copy, Default)]
pub struct Observers {
    pub mass: bool,
    pub energy: bool,
    pub phase_error: bool,
    pub angular_momentum: bool,
}

impl Observers {
    pub fn all_for(problem: &Problem) -> Self {
        Observers {
            mass: true,
            energy: true,
            phase_error: problem.has_exact(),
            angular_momentum: problem.grid().dims() == 2,
        }
    }
}

/// Outcome of an [`integrate`] run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_state: Vec<Complex64>,
    pub series: StepSeries,
    pub steps: usize,
    /// Stepping-loop wall clock (precomputation excluded).
    pub wall_seconds: f64,
    pub setup_seconds: f64,
    pub max_iterations: usize,
}

/// Integrate from `t = 0` to `T = N_T·h`, recording the requested observers
/// at every step (including the initial state). Deterministic.
pub fn integrate(
    problem: &Problem,
    method: &MethodSpec,
    t_final: f64,
    h: f64,
    observers: Observers,
    config: StepperConfig,
) -> Result<RunSummary> {
    integrate_with(problem, method, t_final, h, observers, config, |_, _, _| {})
}

/// [`integrate`] with a per-step hook `(step, t, ψ)` (used for snapshots).
pub fn integrate_with(
    problem: &Problem,
    method: &MethodSpec,
    t_final: f64,
    h: f64,
    observers: Observers,
    config: StepperConfig,
    mut hook: impl FnMut(usize, f64, &[Complex64]),
) -> Result<RunSummary> {
    if h <= 0.0 || t_final < 0.0 {
        return Err(Error::InvalidParameter(
            "integrate requires h > 0 and T >= 0".into(),
        ));
    }
    let steps_f = t_final / h;
    let n_t = steps_f.round() as usize;
    if (n_t as f64 * h - t_final).abs() > 1e-12 * t_final.abs().max(1.0) {
        return Err(Error::TimeStepMismatch { t_final, h });
    }
    if observers.phase_error && !problem.has_exact() {
        return Err(Error::InvalidParameter(
            "phase error observer requires an exact solution".into(),
        ));
    }
    if observers.angular_momentum && problem.grid().dims() != 2 {
        return Err(Error::InvalidDimension(problem.grid().dims()));
    }

    let engine = Engine::new(problem, method, h, config)?;
    let grid = problem.grid();
    let kvol = grid.cell_volume();
    let l2 = |v: &[Complex64]| (kvol * v.iter().map(|x| x.norm_sqr()).sum::<f64>()).sqrt();

    let mut series = StepSeries::default();
    let record = |series: &mut StepSeries, t: f64, state: &[Complex64]| -> Result<()> {
        series.t.push(t);
        let needs_exact =
            observers.phase_error || ((observers.mass || observers.energy) && problem.has_exact());
        let exact = if needs_exact {
            problem.exact_at(t)
        } else {
            None
        };
        if observers.mass {
            series.mass.push(l2(state));
            series
                .mass_ref
                .push(exact.as_ref().map_or_else(|| series.mass[0], |e| l2(e)));
        }
        if observers.energy {
            series
                .energy
                .push(diagnostics::discrete_energy(state, problem, t));
            if let Some(e) = &exact {
                series
                    .energy_ref
                    .push(diagnostics::discrete_energy(e, problem, t));
            }
        }
        if observers.phase_error {
            let e = exact.as_ref().expect("checked above");
            let diff2: f64 = state
                .iter()
                .zip(e.iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum();
            series.phase_error.push((kvol * diff2).sqrt());
        }
        if observers.angular_momentum {
            series
                .angular_momentum
                .push(diagnostics::angular_momentum(state, grid)?);
        }
        Ok(())
    };

    let mut state = problem.initial_state().into_values();
    record(&mut series, 0.0, &state)?;
    hook(0, 0.0, &state);
    let mut max_iterations = 0usize;
    let started = Instant::now();
    for nstep in 0..n_t {
        let t_n = nstep as f64 * h;
        let result = engine.step_signed(&state, t_n, h, nstep)?;
        state = result.state;
        max_iterations = max_iterations.max(result.iterations);
        let t_next = (nstep + 1) as f64 * h;
        record(&mut series, t_next, &state)?;
        hook(nstep + 1, t_next, &state);
    }
    let wall_seconds = started.elapsed().as_secs_f64();
    Ok(RunSummary {
        final_state: state,
        series,
        steps: n_t,
        wall_seconds,
        setup_seconds: engine.setup_seconds,
        max_iterations,
    })
}
