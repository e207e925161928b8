//! Error functionals, conserved-quantity diagnostics and convergence-order
//! estimation.
//!
//! A time stepper records a [`StepSeries`] while it runs; the functionals
//! here reduce that series to the sup-in-time phase, mass and energy errors
//! and assemble an [`ErrorReport`].

use crate::problems::Problem;
use crate::spectral::Grid;
use crate::{Error, Result};
use num_complex::Complex64;

/// Per-step observables of one run. Vectors are empty when the observer was
/// disabled; otherwise their length is `N_T + 1`.
#[derive(Debug, Clone, Default)]
pub struct StepSeries {
    pub t: Vec<f64>,
    pub mass: Vec<f64>,
    /// Mass of the projected exact solution; falls back to the initial mass
    /// when there is no reference solution.
    pub mass_ref: Vec<f64>,
    pub energy: Vec<f64>,
    pub energy_ref: Vec<f64>,
    pub phase_error: Vec<f64>,
    pub angular_momentum: Vec<f64>,
}

/// Sup-in-time errors of one `(method, h)` run.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ErrorReport {
    pub method: String,
    pub h: f64,
    /// Sup-in-time ℓ² phase error (needs an exact solution).
    pub e_p: Option<f64>,
    /// Sup-in-time relative mass error.
    pub e_m: f64,
    /// Sup-in-time relative energy error (needs an exact solution).
    pub e_e: Option<f64>,
    pub steps: usize,
    /// Wall-clock of the stepping loop only.
    pub wall_seconds: f64,
    /// Wall-clock of the coefficient precomputation, reported separately.
    pub setup_seconds: f64,
}

/// `𝓔_P = sup_n ‖Π(ψ_ex(t_n)) − ψ^n‖_{ℓ²}` from the recorded series.
pub fn phase_error(series: &StepSeries) -> Result<f64> {
    if series.phase_error.is_empty() {
        return Err(Error::InvalidParameter(
            "phase error requires an exact solution".into(),
        ));
    }
    Ok(series.phase_error.iter().fold(0.0f64, |m, &v| m.max(v)))
}

/// `𝓔_M = sup_n |‖Πψ_ex(t_n)‖ − ‖ψ^n‖| / ‖Πψ_ex(0)‖`; with no exact
/// solution the reference is the initial mass (relative drift).
pub fn mass_error(series: &StepSeries) -> f64 {
    let denom = series.mass_ref.first().copied().unwrap_or(1.0);
    series
        .mass
        .iter()
        .zip(&series.mass_ref)
        .fold(0.0f64, |m, (&a, &r)| m.max((a - r).abs()))
        / denom
}

/// `𝓔_E = sup_n |E(Πψ_ex(t_n)) − E(ψ^n)| / |E(Πψ_ex(0))|`.
pub fn energy_error(series: &StepSeries) -> Result<f64> {
    if series.energy_ref.is_empty() || series.energy.is_empty() {
        return Err(Error::InvalidParameter(
            "energy error requires energy observers and an exact solution".into(),
        ));
    }
    let denom = series.energy_ref[0].abs().max(f64::MIN_POSITIVE);
    Ok(series
        .energy
        .iter()
        .zip(&series.energy_ref)
        .fold(0.0f64, |m, (&a, &r)| m.max((a - r).abs()))
        / denom)
}

/// Assemble the report for one run.
pub fn error_report(
    method: impl Into<String>,
    h: f64,
    series: &StepSeries,
    steps: usize,
    wall_seconds: f64,
    setup_seconds: f64,
) -> ErrorReport {
    ErrorReport {
        method: method.into(),
        h,
        e_p: phase_error(series).ok(),
        e_m: mass_error(series),
        e_e: energy_error(series).ok(),
        steps,
        wall_seconds,
        setup_seconds,
    }
}

/// Discrete energy of a physical-space state.
///
/// `E(v) = ½‖∇_k v‖² + (1/2ν)[k Σ w(t,x_j)|v_j|² + k Σ G(|v_j|²)]`,
/// plus `(Ω/2ν)⟨R⟩(v)` for the rotating problem: with the rotating-frame
/// potential built from `A(+t)`, the fixed-frame reconstruction solves the
/// condensate equation at angular speed `−Ω`, so its conserved energy
/// carries `+Ω⟨R⟩`. For the 1-D cubic benchmark the expression reduces to
/// `½‖∇_k v‖² − (q/4)‖v‖⁴_{ℓ⁴}`.
pub fn discrete_energy(values: &[Complex64], problem: &Problem, t: f64) -> f64 {
    let grid = problem.grid();
    let kvol = grid.cell_volume();
    // kinetic part via Parseval: ½ (k/M) Σ_m (−ω_m)|ψ̂_m|²
    let mut hat = values.to_vec();
    crate::spectral::forward_in_place(grid, &mut hat);
    let omega = grid.laplacian_symbol();
    let kin: f64 = hat
        .iter()
        .zip(&omega)
        .map(|(v, &w)| -w * v.norm_sqr())
        .sum::<f64>()
        * 0.5
        * kvol
        / grid.len() as f64;

    let mut rest = 0.0;
    if let Some(w) = problem.potential_grid(t) {
        rest += kvol
            * values
                .iter()
                .zip(&w)
                .map(|(v, &wj)| wj * v.norm_sqr())
                .sum::<f64>();
    }
    rest += kvol
        * values
            .iter()
            .map(|v| problem.nonlinearity().primitive(v.norm_sqr()))
            .sum::<f64>();
    let mut e = kin + rest / (2.0 * problem.nu());
    if let Some(omega_rot) = problem.rotation() {
        let r = angular_momentum(values, grid).expect("rotating problems are 2-D");
        e += omega_rot / (2.0 * problem.nu()) * r;
    }
    e
}

/// Angular momentum expectation `⟨R⟩ = k Σ_j v̄_j (Rv)_j` with
/// `Rv = −i(x ∂_y v − y ∂_x v)` computed spectrally (one forward transform,
/// two inverse transforms).
pub fn angular_momentum(values: &[Complex64], grid: &Grid) -> Result<f64> {
    if grid.dims() != 2 {
        return Err(Error::InvalidDimension(grid.dims()));
    }
    let mx = grid.axis(0).modes();
    let mut hat = values.to_vec();
    crate::spectral::forward_in_place(grid, &mut hat);
    let mut dx = hat.clone();
    for (idx, v) in dx.iter_mut().enumerate() {
        *v *= Complex64::new(0.0, grid.axis(0).wavenumber(idx % mx));
    }
    crate::spectral::inverse_in_place(grid, &mut dx);
    let mut dy = hat;
    for (idx, v) in dy.iter_mut().enumerate() {
        *v *= Complex64::new(0.0, grid.axis(1).wavenumber(idx / mx));
    }
    crate::spectral::inverse_in_place(grid, &mut dy);
    let mut acc = Complex64::ZERO;
    for idx in 0..grid.len() {
        let x = grid.axis(0).node(idx % mx);
        let y = grid.axis(1).node(idx / mx);
        let r = Complex64::new(0.0, -1.0) * (x * dy[idx] - y * dx[idx]);
        acc += values[idx].conj() * r;
    }
    acc *= grid.cell_volume();
    let scale = values.iter().map(|v| v.norm_sqr()).sum::<f64>() * grid.cell_volume();
    debug_assert!(
        acc.im.abs() <= 1e-10 * scale.max(1.0),
        "angular momentum has imaginary part {}",
        acc.im
    );
    Ok(acc.re)
}

/// Least-squares convergence order from `(h, error)` samples.
#[derive(Debug, Clone, serde::Serialize)]
pub struct OrderEstimate {
    pub slope: f64,
    pub residual: f64,
    pub points_used: usize,
}

/// Fit `log error ~ slope · log h` over the samples whose error lies inside
/// `window` (the unsaturated range); needs at least 3 usable points.
pub fn order_estimate(points: &[(f64, f64)], window: (f64, f64)) -> Result<OrderEstimate> {
    let usable: Vec<(f64, f64)> = points
        .iter()
        .filter(|&&(_, e)| e > window.0 && e < window.1)
        .map(|&(h, e)| (h.ln(), e.ln()))
        .collect();
    if usable.len() < 3 {
        return Err(Error::TooFewPoints(usable.len()));
    }
    let n = usable.len() as f64;
    let mx = usable.iter().map(|p| p.0).sum::<f64>() / n;
    let my = usable.iter().map(|p| p.1).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for &(x, y) in &usable {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (usable
        .iter()
        .map(|&(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(OrderEstimate {
        slope,
        residual,
        points_used: usable.len(),
    })
}

/// Default saturation window for order estimation.
pub const ORDER_WINDOW: (f64, f64) = (1e-10, 1e-1);
