//! Catalog of concrete Cauchy problems: the 1-D cubic soliton benchmark, the
//! cubic-quintic equation with an oscillating linear potential, the 2-D cubic
//! equation with a stationary ground-profile solution, and the rotating-frame
//! Gross-Pitaevskii condensate with smooth potential truncation.
//!
//! All problems fit the common form
//! `∂_t ψ = iν Δψ − i (w(t,x) + g(|ψ|²)) ψ`
//! with a real potential `w` and a real nonlinearity `g`, so the nonlinear
//! part only ever multiplies `ψ` by `−i·(real)`.

use crate::spectral::{Grid, Repr, SpectralField};
use crate::{Error, Result};
use num_complex::Complex64;

/// Power or cubic-quintic nonlinearity `g(ρ)` acting through `−i g(|ψ|²) ψ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    /// `g(ρ) = β ρ^κ`
    Power { beta: f64, kappa: u32 },
    /// `g(ρ) = G₁ ρ + G₂ ρ²`
    CubicQuintic { g1: f64, g2: f64 },
}

impl Nonlinearity {
    pub fn g(&self, rho: f64) -> f64 {
        match *self {
            Nonlinearity::Power { beta, kappa } => beta * rho.powi(kappa as i32),
            Nonlinearity::CubicQuintic { g1, g2 } => g1 * rho + g2 * rho * rho,
        }
    }

    /// `G(ρ) = ∫_0^ρ g`, the nonlinear energy density.
    pub fn primitive(&self, rho: f64) -> f64 {
        match *self {
            Nonlinearity::Power { beta, kappa } => {
                beta * rho.powi(kappa as i32 + 1) / (kappa as f64 + 1.0)
            }
            Nonlinearity::CubicQuintic { g1, g2 } => {
                0.5 * g1 * rho * rho + g2 * rho * rho * rho / 3.0
            }
        }
    }
}

/// Harmonic trap parameters of the rotating condensate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RotatingTrap {
    pub gamma_x: f64,
    pub gamma_y: f64,
    /// Angular speed Ω of the rotating frame.
    pub omega: f64,
    /// Truncation size δ of the smooth cutoff (also the grid period).
    pub delta: f64,
}

impl RotatingTrap {
    /// Confining potential `V_c(x) = ½(γ_x² x² + γ_y² y²)`.
    pub fn confining(&self, x: f64, y: f64) -> f64 {
        0.5 * (self.gamma_x.powi(2) * x * x + self.gamma_y.powi(2) * y * y)
    }
}

/// Rotation matrix `A(t) = [[cos Ωt, −sin Ωt], [sin Ωt, cos Ωt]]`.
pub fn rotation_matrix(t: f64, omega: f64) -> [[f64; 2]; 2] {
    let (s, c) = (omega * t).sin_cos();
    [[c, -s], [s, c]]
}

fn mollifier_half(u: f64) -> f64 {
    if u > 0.0 {
        (-1.0 / u).exp()
    } else {
        0.0
    }
}

/// Smooth step `S(u) = f(u)/(f(u)+f(1−u))`, `f(u) = e^{−1/u}` for `u > 0`:
/// identically 0 for `u ≤ 0`, identically 1 for `u ≥ 1`, `S(1/2) = 1/2`.
fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        let a = mollifier_half(u);
        let b = mollifier_half(1.0 - u);
        a / (a + b)
    }
}

/// Smooth cutoff `χ(x)`: 1 on `[1−δ/2, δ/2−1]`, 0 outside `(−δ/2, δ/2)`,
/// monotone on each transition band of width 1. Requires `δ > 2`.
pub fn cutoff_chi(x: f64, delta: f64) -> Result<f64> {
    if delta <= 2.0 {
        return Err(Error::InvalidParameter(format!(
            "cutoff requires delta > 2, got {delta}"
        )));
    }
    Ok(smooth_step(delta / 2.0 - x.abs()))
}

/// Time-dependent linear part `w(t, x)` of the right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    None,
    /// `V(t,x) = (x/2) ω² cos(ωt)`, sampled on the grid.
    Oscillating { omega: f64, half_x: Vec<f64> },
    /// `V_c(A(t)x) χ(x)χ(y)`, stored through the quadratic-form node arrays.
    Rotating {
        trap: RotatingTrap,
        cx2: Vec<f64>,
        cy2: Vec<f64>,
        cxy: Vec<f64>,
    },
}

impl Potential {
    pub fn is_present(&self) -> bool {
        !matches!(self, Potential::None)
    }

    /// Quadratic-form coefficients of the rotating potential:
    /// `V(t,x,y) = ½(P x² + Q y² + S xy)`.
    fn rotating_coeffs(trap: &RotatingTrap, t: f64) -> (f64, f64, f64) {
        let gx2 = trap.gamma_x.powi(2);
        let gy2 = trap.gamma_y.powi(2);
        let (s2, c2) = (2.0 * trap.omega * t).sin_cos();
        let p = 0.5 * (gx2 + gy2) + 0.5 * (gx2 - gy2) * c2;
        let q = 0.5 * (gx2 + gy2) - 0.5 * (gx2 - gy2) * c2;
        let s = (gy2 - gx2) * s2;
        (p, q, s)
    }

    /// `∫_{t0}^{t1}` of the quadratic-form coefficients.
    fn rotating_coeff_integrals(trap: &RotatingTrap, t0: f64, t1: f64) -> (f64, f64, f64) {
        let gx2 = trap.gamma_x.powi(2);
        let gy2 = trap.gamma_y.powi(2);
        let om = trap.omega;
        let dt = t1 - t0;
        if om == 0.0 {
            return (gx2 * dt, gy2 * dt, 0.0);
        }
        let ds = (2.0 * om * t1).sin() - (2.0 * om * t0).sin();
        let dc = (2.0 * om * t1).cos() - (2.0 * om * t0).cos();
        let p = 0.5 * (gx2 + gy2) * dt + 0.25 * (gx2 - gy2) / om * ds;
        let q = 0.5 * (gx2 + gy2) * dt - 0.25 * (gx2 - gy2) / om * ds;
        let s = -0.5 * (gy2 - gx2) / om * dc;
        (p, q, s)
    }

    /// Write `w(t, x_j)` into `out`; returns false when there is no potential.
    pub fn eval_into(&self, t: f64, out: &mut [f64]) -> bool {
        match self {
            Potential::None => false,
            Potential::Oscillating { omega, half_x } => {
                let amp = omega * omega * (omega * t).cos();
                for (o, &hx) in out.iter_mut().zip(half_x) {
                    *o = amp * hx;
                }
                true
            }
            Potential::Rotating {
                trap,
                cx2,
                cy2,
                cxy,
            } => {
                let (p, q, s) = Self::rotating_coeffs(trap, t);
                for i in 0..out.len() {
                    out[i] = p * cx2[i] + q * cy2[i] + s * cxy[i];
                }
                true
            }
        }
    }

    /// Write the exact time integral `∫_{t0}^{t1} w(σ, x_j) dσ` into `out`.
    pub fn integral_into(&self, t0: f64, t1: f64, out: &mut [f64]) -> bool {
        match self {
            Potential::None => false,
            Potential::Oscillating { omega, half_x } => {
                let amp = omega * ((omega * t1).sin() - (omega * t0).sin());
                for (o, &hx) in out.iter_mut().zip(half_x) {
                    *o = amp * hx;
                }
                true
            }
            Potential::Rotating {
                trap,
                cx2,
                cy2,
                cxy,
            } => {
                let (p, q, s) = Self::rotating_coeff_integrals(trap, t0, t1);
                for i in 0..out.len() {
                    out[i] = p * cx2[i] + q * cy2[i] + s * cxy[i];
                }
                true
            }
        }
    }
}

/// Exact reference solutions attached to the benchmark problems.
#[derive(Debug, Clone)]
pub enum Exact {
    /// `(2a/q) sech(√a ξ) e^{icξ/2} e^{i(a+c²/4)t}`, `ξ = (x−x₀)−ct`.
    Soliton { q: f64, a: f64, c: f64, x0: f64 },
    /// Bright soliton of the cubic-quintic equation with the oscillating
    /// linear potential.
    CubicQuinticBright {
        omega: f64,
        e_c: f64,
        beta0: f64,
        eta: f64,
        b: f64,
    },
    /// `ψ(t,x) = e^{it} Θ(x)` with a sampled stationary profile.
    StationaryPhase { profile: Vec<Complex64> },
}

impl Exact {
    /// Sample the solution at time `t` on `grid`.
    pub fn sample(&self, grid: &Grid, t: f64) -> Vec<Complex64> {
        match self {
            Exact::Soliton { q, a, c, x0 } => {
                let ax = grid.axis(0);
                let amp = 2.0 * a / q;
                let width = a.sqrt();
                let phase_t = (a + c * c / 4.0) * t;
                (0..grid.len())
                    .map(|j| {
                        let xi = (ax.node(j) - x0) - c * t;
                        let m = amp / (width * xi).cosh();
                        m * Complex64::new(0.0, 0.5 * c * xi + phase_t).exp()
                    })
                    .collect()
            }
            Exact::CubicQuinticBright {
                omega,
                e_c,
                beta0,
                eta,
                b,
            } => {
                let ax = grid.axis(0);
                let root = (1.0 - b).sqrt();
                let decay = 2.0 * (-e_c).sqrt();
                let center = (omega * t).cos();
                let phase_t = -omega * omega / 8.0 * t
                    + omega / 16.0 * (2.0 * omega * t + 2.0 * beta0).sin()
                    - e_c * t;
                let slope = -0.5 * omega * (omega * t + beta0).sin();
                (0..grid.len())
                    .map(|j| {
                        let x = ax.node(j);
                        let m = eta / (root * (decay * (x - center)).cosh() + 1.0).sqrt();
                        m * Complex64::new(0.0, slope * x + phase_t).exp()
                    })
                    .collect()
            }
            Exact::StationaryPhase { profile } => {
                let phase = Complex64::new(0.0, t).exp();
                profile.iter().map(|&v| v * phase).collect()
            }
        }
    }
}

/// A Cauchy problem `∂_t ψ = iν Δψ − i(w + g(|ψ|²))ψ` on a periodic grid.
#[derive(Debug, Clone)]
pub struct Problem {
    name: String,
    grid: Grid,
    /// Laplacian coefficient ν in `L = iνΔ`.
    nu: f64,
    nonlinearity: Nonlinearity,
    potential: Potential,
    psi0: Vec<Complex64>,
    exact: Option<Exact>,
    /// Angular speed of the rotating-frame problem (energy diagnostics add
    /// the `−Ω⟨R⟩` term in the original frame).
    rotation: Option<f64>,
}

impl Problem {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn rotation(&self) -> Option<f64> {
        self.rotation
    }

    pub fn initial_state(&self) -> SpectralField {
        SpectralField::from_values(self.grid.clone(), self.psi0.clone(), Repr::Physical)
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    /// Exact solution sampled at the grid nodes, when available.
    pub fn exact_at(&self, t: f64) -> Option<Vec<Complex64>> {
        self.exact.as_ref().map(|e| e.sample(&self.grid, t))
    }

    /// `w(t, ·)` on the grid nodes, when a potential is present.
    pub fn potential_grid(&self, t: f64) -> Option<Vec<f64>> {
        let mut out = vec![0.0; self.grid.len()];
        self.potential.eval_into(t, &mut out).then_some(out)
    }

    /// Nonlinear right-hand side `N_w(t,ψ) = −i(w + g(|ψ|²))ψ` with the
    /// potential values `w` supplied by the caller (they only depend on `t`).
    pub fn nw_with(&self, w: Option<&[f64]>, psi: &[Complex64], out: &mut [Complex64]) {
        match w {
            Some(w) => {
                for i in 0..psi.len() {
                    let g = self.nonlinearity.g(psi[i].norm_sqr());
                    out[i] = Complex64::new(0.0, -(w[i] + g)) * psi[i];
                }
            }
            None => {
                for i in 0..psi.len() {
                    let g = self.nonlinearity.g(psi[i].norm_sqr());
                    out[i] = Complex64::new(0.0, -g) * psi[i];
                }
            }
        }
    }

    /// Exact flow of `∂_t ψ = N_w(t, ψ)` over `[t0, t0+tau]`, in place.
    ///
    /// `|ψ|` is pointwise invariant along this flow, so the update is the
    /// phase `exp(−i[∫_{t0}^{t0+tau} w dσ + τ g(|ψ|²)])`.
    pub fn nw_flow(&self, t0: f64, tau: f64, psi: &mut [Complex64], scratch: &mut [f64]) {
        let has_w = self.potential.integral_into(t0, t0 + tau, scratch);
        for (i, v) in psi.iter_mut().enumerate() {
            let mut phase = -tau * self.nonlinearity.g(v.norm_sqr());
            if has_w {
                phase -= scratch[i];
            }
            *v *= Complex64::from_polar(1.0, phase);
        }
    }
}

/// 1-D cubic benchmark `∂_t ψ = i∂_x²ψ + iq|ψ|²ψ` with the travelling
/// soliton reference solution.
pub fn cubic_soliton_1d(q: f64, a: f64, c: f64, x0: f64, grid: &Grid) -> Result<Problem> {
    if grid.dims() != 1 {
        return Err(Error::InvalidDimension(grid.dims()));
    }
    if q == 0.0 || a <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "soliton requires q != 0 and a > 0, got q={q}, a={a}"
        )));
    }
    let exact = Exact::Soliton { q, a, c, x0 };
    Ok(Problem {
        name: format!("soliton1d(q={q},a={a},c={c})"),
        grid: grid.clone(),
        nu: 1.0,
        nonlinearity: Nonlinearity::Power {
            beta: -q,
            kappa: 1,
        },
        potential: Potential::None,
        psi0: exact.sample(grid, 0.0),
        exact: Some(exact),
        rotation: None,
    })
}

/// 1-D cubic-quintic equation
/// `i∂_tψ = −∂_x²ψ + Vψ + G₁|ψ|²ψ + G₂|ψ|⁴ψ`, `V(t,x) = (x/2)ω²cos(ωt)`,
/// with the bright-soliton reference solution.
pub fn cubic_quintic_1d(
    g1: f64,
    g2: f64,
    omega: f64,
    e_c: f64,
    beta0: f64,
    grid: &Grid,
) -> Result<Problem> {
    if grid.dims() != 1 {
        return Err(Error::InvalidDimension(grid.dims()));
    }
    if e_c >= 0.0 || g1 >= 0.0 {
        return Err(Error::InvalidParameter(
            "cubic-quintic soliton requires E_c < 0 and G1 < 0".into(),
        ));
    }
    let eta = (4.0 * e_c / g1).sqrt();
    let b = -16.0 * e_c * g2 / (3.0 * g1 * g1);
    if 1.0 - b <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "cubic-quintic soliton requires 1 - b > 0, got b={b}"
        )));
    }
    let ax = grid.axis(0);
    let half_x = (0..grid.len()).map(|j| 0.5 * ax.node(j)).collect();
    let exact = Exact::CubicQuinticBright {
        omega,
        e_c,
        beta0,
        eta,
        b,
    };
    Ok(Problem {
        name: format!("cubic-quintic(G1={g1},G2={g2},omega={omega})"),
        grid: grid.clone(),
        nu: 1.0,
        nonlinearity: Nonlinearity::CubicQuintic { g1, g2 },
        potential: Potential::Oscillating { omega, half_x },
        psi0: exact.sample(grid, 0.0),
        exact: Some(exact),
        rotation: None,
    })
}

/// Free linear problem (`w ≡ 0`, `g ≡ 0`) with a caller-supplied initial
/// state; every stepper is exact on it.
pub fn linear_free(grid: &Grid, nu: f64, psi0: Vec<Complex64>) -> Result<Problem> {
    if psi0.len() != grid.len() {
        return Err(Error::InvalidParameter(
            "initial datum length does not match the grid".into(),
        ));
    }
    Ok(Problem {
        name: "free".into(),
        grid: grid.clone(),
        nu,
        nonlinearity: Nonlinearity::Power {
            beta: 0.0,
            kappa: 1,
        },
        potential: Potential::None,
        psi0,
        exact: None,
        rotation: None,
    })
}

/// 1-D cubic problem with `ψ₀(x) = |sin x|` and no reference solution,
/// used for long-time conservation studies.
pub fn sin_abs_1d(q: f64, grid: &Grid) -> Result<Problem> {
    if grid.dims() != 1 {
        return Err(Error::InvalidDimension(grid.dims()));
    }
    let psi0 = (0..grid.len())
        .map(|j| Complex64::new(grid.axis(0).node(j).sin().abs(), 0.0))
        .collect();
    Ok(Problem {
        name: format!("sin-abs(q={q})"),
        grid: grid.clone(),
        nu: 1.0,
        nonlinearity: Nonlinearity::Power {
            beta: -q,
            kappa: 1,
        },
        potential: Potential::None,
        psi0,
        exact: None,
        rotation: None,
    })
}

/// 2-D cubic equation `∂_t ψ = iΔψ + i|ψ|²ψ` with the stationary solution
/// `e^{it}Θ(‖x‖)` built from a shooting profile.
pub fn cubic_plane_2d(grid: &Grid, profile: &RadialProfile) -> Result<Problem> {
    if grid.dims() != 2 {
        return Err(Error::InvalidDimension(grid.dims()));
    }
    let mx = grid.axis(0).modes();
    let theta: Vec<Complex64> = (0..grid.len())
        .map(|idx| {
            let x = grid.axis(0).node(idx % mx);
            let y = grid.axis(1).node(idx / mx);
            Complex64::new(profile.eval(x.hypot(y)), 0.0)
        })
        .collect();
    Ok(Problem {
        name: "plane2d".into(),
        grid: grid.clone(),
        nu: 1.0,
        nonlinearity: Nonlinearity::Power {
            beta: -1.0,
            kappa: 1,
        },
        potential: Potential::None,
        psi0: theta.clone(),
        exact: Some(Exact::StationaryPhase { profile: theta }),
        rotation: None,
    })
}

/// Rotating-frame Gross-Pitaevskii problem
/// `∂_t ψ = (i/2)Δψ − i w(t,x)ψ − iβ|ψ|²ψ` with
/// `w(t,x) = V_c(A(t)x) χ(x)χ(y)` on a periodic cell matching the trap.
pub fn rotating_gpe_2d(
    trap: &RotatingTrap,
    beta: f64,
    psi0: Vec<Complex64>,
    grid: &Grid,
) -> Result<Problem> {
    if grid.dims() != 2 {
        return Err(Error::InvalidDimension(grid.dims()));
    }
    for d in 0..2 {
        let ext = grid.axis(d).extent();
        if (ext - trap.delta).abs() > 1e-12 * trap.delta.abs().max(1.0) {
            return Err(Error::GridTrapMismatch {
                grid: ext,
                trap: trap.delta,
                axis: d,
            });
        }
        if (grid.axis(d).x_left + grid.axis(d).x_right).abs() > 1e-12 * trap.delta {
            return Err(Error::InvalidParameter(
                "rotating problem requires a cell centered at the origin".into(),
            ));
        }
    }
    if trap.delta <= 2.0 {
        return Err(Error::InvalidParameter(format!(
            "cutoff requires delta > 2, got {}",
            trap.delta
        )));
    }
    if psi0.len() != grid.len() {
        return Err(Error::InvalidParameter(
            "initial datum length does not match the grid".into(),
        ));
    }
    let mx = grid.axis(0).modes();
    let mut cx2 = vec![0.0; grid.len()];
    let mut cy2 = vec![0.0; grid.len()];
    let mut cxy = vec![0.0; grid.len()];
    for idx in 0..grid.len() {
        let x = grid.axis(0).node(idx % mx);
        let y = grid.axis(1).node(idx / mx);
        let chi = smooth_step(trap.delta / 2.0 - x.abs()) * smooth_step(trap.delta / 2.0 - y.abs());
        cx2[idx] = 0.5 * x * x * chi;
        cy2[idx] = 0.5 * y * y * chi;
        cxy[idx] = 0.5 * x * y * chi;
    }
    Ok(Problem {
        name: format!(
            "rotating-bec(beta={beta},omega={},gx={},gy={})",
            trap.omega, trap.gamma_x, trap.gamma_y
        ),
        grid: grid.clone(),
        nu: 0.5,
        nonlinearity: Nonlinearity::Power { beta, kappa: 1 },
        potential: Potential::Rotating {
            trap: *trap,
            cx2,
            cy2,
            cxy,
        },
        psi0,
        exact: None,
        rotation: Some(trap.omega),
    })
}

/// Thomas-Fermi initial datum `ψ₀ = √(max(0, (μ − V_c)/β))` with the chemical
/// potential fixed by unit mass, then normalized exactly.
pub fn thomas_fermi_initial(trap: &RotatingTrap, beta: f64, grid: &Grid) -> Result<SpectralField> {
    if grid.dims() != 2 {
        return Err(Error::InvalidDimension(grid.dims()));
    }
    if beta <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Thomas-Fermi requires beta > 0, got {beta}"
        )));
    }
    let mx = grid.axis(0).modes();
    let vc: Vec<f64> = (0..grid.len())
        .map(|idx| {
            trap.confining(
                grid.axis(0).node(idx % mx),
                grid.axis(1).node(idx / mx),
            )
        })
        .collect();
    let kvol = grid.cell_volume();
    let mass = |mu: f64| -> f64 {
        kvol * vc.iter().map(|&v| (mu - v).max(0.0) / beta).sum::<f64>()
    };
    // continuum estimate brackets the discrete root comfortably
    let mu_star = (trap.gamma_x * trap.gamma_y * beta / std::f64::consts::PI).sqrt();
    let (mut lo, mut hi) = (0.0, 4.0 * mu_star + 1.0);
    if mass(hi) < 1.0 {
        return Err(Error::InvalidParameter(
            "Thomas-Fermi bracket failed; trap too weak for unit mass".into(),
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if (mass(0.5 * (lo + hi)) - 1.0).abs() <= 1e-12 {
            break;
        }
    }
    let mu = 0.5 * (lo + hi);
    let mut values: Vec<Complex64> = vc
        .iter()
        .map(|&v| Complex64::new(((mu - v).max(0.0) / beta).sqrt(), 0.0))
        .collect();
    // support must stay inside the cutoff plateau
    for (idx, v) in values.iter().enumerate() {
        if v.re > 0.0 {
            let x = grid.axis(0).node(idx % mx);
            let y = grid.axis(1).node(idx / mx);
            let chi = smooth_step(trap.delta / 2.0 - x.abs())
                * smooth_step(trap.delta / 2.0 - y.abs());
            if chi < 1.0 - 1e-12 {
                return Err(Error::SupportExceedsPlateau);
            }
        }
    }
    let norm = (kvol * values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
    for v in &mut values {
        *v /= norm;
    }
    Ok(SpectralField::from_values(grid.clone(), values, Repr::Physical))
}

// ---------------------------------------------------------------------------
// Radial ground profile via shooting
// ---------------------------------------------------------------------------

/// Monotone radial profile `Θ(r)` of the 2-D ground state, with first
/// derivatives stored for Hermite interpolation.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    r: Vec<f64>,
    theta: Vec<f64>,
    dtheta: Vec<f64>,
    /// series start: Θ ≈ θ0 + a2 r² + a4 r⁴ below r[0]
    theta0: f64,
    a2: f64,
    a4: f64,
}

impl RadialProfile {
    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn r_max(&self) -> f64 {
        *self.r.last().unwrap()
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.r.iter().copied().zip(self.theta.iter().copied())
    }

    /// Cubic Hermite evaluation; exponential continuation beyond the last
    /// stored radius.
    pub fn eval(&self, r: f64) -> f64 {
        if r < self.r[0] {
            let r2 = r * r;
            return self.theta0 + self.a2 * r2 + self.a4 * r2 * r2;
        }
        let n = self.r.len();
        if r >= self.r[n - 1] {
            // K₀-type tail: Θ ∝ e^{−r}/√r
            let (rl, tl) = (self.r[n - 1], self.theta[n - 1]);
            return tl * (rl / r).sqrt() * (-(r - rl)).exp();
        }
        let mut lo = 0usize;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.r[mid] <= r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (r0, r1) = (self.r[lo], self.r[lo + 1]);
        let w = r1 - r0;
        let u = (r - r0) / w;
        let (y0, y1) = (self.theta[lo], self.theta[lo + 1]);
        let (d0, d1) = (self.dtheta[lo] * w, self.dtheta[lo + 1] * w);
        let u2 = u * u;
        let u3 = u2 * u;
        y0 * (2.0 * u3 - 3.0 * u2 + 1.0)
            + d0 * (u3 - 2.0 * u2 + u)
            + y1 * (-2.0 * u3 + 3.0 * u2)
            + d1 * (u3 - u2)
    }

    /// Plain-text serialization: two columns `r Θ(r)` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (r, t) in self.samples() {
            out.push_str(&format!("{:.17e} {:.17e}\n", r, t));
        }
        out
    }

    /// Rebuild a profile from the two-column text format. Derivatives are
    /// reconstructed by centered finite differences on the stored grid, so
    /// a round trip through text is accurate to the sample density rather
    /// than bit-exact.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut r = Vec::new();
        let mut theta = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut cols = line.split_whitespace();
            let (Some(a), Some(b)) = (cols.next(), cols.next()) else {
                return Err(Error::InvalidParameter(format!(
                    "profile text line {} is not two columns",
                    lineno + 1
                )));
            };
            let rv: f64 = a.parse().map_err(|_| {
                Error::InvalidParameter(format!("bad radius on line {}", lineno + 1))
            })?;
            let tv: f64 = b.parse().map_err(|_| {
                Error::InvalidParameter(format!("bad value on line {}", lineno + 1))
            })?;
            r.push(rv);
            theta.push(tv);
        }
        if r.len() < 8 {
            return Err(Error::InvalidParameter(
                "profile text needs at least 8 samples".into(),
            ));
        }
        let n = r.len();
        let mut dtheta = vec![0.0; n];
        for i in 0..n {
            let (lo, hi) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            dtheta[i] = (theta[hi] - theta[lo]) / (r[hi] - r[lo]);
        }
        let theta0 = theta[0];
        let a2 = (theta0 - theta0.powi(3)) / 4.0;
        let a4 = -(3.0 * theta0 * theta0 - 1.0) * a2 / 16.0;
        Ok(RadialProfile {
            r,
            theta,
            dtheta,
            theta0,
            a2,
            a4,
        })
    }
}

/// Right-hand side of the radial ODE `Θ'' + Θ'/r + Θ³ − Θ = 0`.
fn radial_rhs(r: f64, y: [f64; 2]) -> [f64; 2] {
    [y[1], -y[1] / r - y[0] * y[0] * y[0] + y[0]]
}

/// Decaying linear far-field equation `ρ'' + ρ'/r − ρ = 0`.
fn tail_rhs(r: f64, y: [f64; 2]) -> [f64; 2] {
    [y[1], -y[1] / r + y[0]]
}

/// One adaptive Dormand-Prince 5(4) step controller.
struct Dopri5 {
    rtol: f64,
    atol: f64,
    h_max: f64,
}

impl Dopri5 {
    /// Integrate from `(t0, y0)` towards `t_end` (monotone in either
    /// direction). `record` sees every accepted node including the first;
    /// `stop` can halt integration after an accepted step.
    fn run(
        &self,
        f: impl Fn(f64, [f64; 2]) -> [f64; 2],
        t0: f64,
        y0: [f64; 2],
        t_end: f64,
        mut record: impl FnMut(f64, [f64; 2]),
        mut stop: impl FnMut(f64, [f64; 2]) -> bool,
    ) -> (f64, [f64; 2]) {
        const A: [[f64; 6]; 6] = [
            [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
            [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
            [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
            [
                19372.0 / 6561.0,
                -25360.0 / 2187.0,
                64448.0 / 6561.0,
                -212.0 / 729.0,
                0.0,
                0.0,
            ],
            [
                9017.0 / 3168.0,
                -355.0 / 33.0,
                46732.0 / 5247.0,
                49.0 / 176.0,
                -5103.0 / 18656.0,
                0.0,
            ],
            [
                35.0 / 384.0,
                0.0,
                500.0 / 1113.0,
                125.0 / 192.0,
                -2187.0 / 6784.0,
                11.0 / 84.0,
            ],
        ];
        const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
        const E: [f64; 7] = [
            71.0 / 57600.0,
            0.0,
            -71.0 / 16695.0,
            71.0 / 1920.0,
            -17253.0 / 339200.0,
            22.0 / 525.0,
            -1.0 / 40.0,
        ];
        let dir = (t_end - t0).signum();
        let mut t = t0;
        let mut y = y0;
        let mut h = (self.h_max * 0.1).min((t_end - t0).abs()) * dir;
        record(t, y);
        let mut k = [[0.0f64; 2]; 7];
        while (t_end - t) * dir > 1e-14 {
            if (t + h - t_end) * dir > 0.0 {
                h = t_end - t;
            }
            k[0] = f(t, y);
            for stage in 0..6 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(stage + 1) {
                    ys[0] += h * A[stage][j] * kj[0];
                    ys[1] += h * A[stage][j] * kj[1];
                }
                k[stage + 1] = f(t + C[stage] * h, ys);
            }
            // 5th-order solution is the last stage evaluation point
            let mut y5 = y;
            for (j, kj) in k.iter().enumerate().take(6) {
                y5[0] += h * A[5][j] * kj[0];
                y5[1] += h * A[5][j] * kj[1];
            }
            let mut err = 0.0f64;
            for d in 0..2 {
                let e: f64 = (0..7).map(|j| E[j] * k[j][d]).sum();
                let sc = self.atol + self.rtol * y[d].abs().max(y5[d].abs());
                err = err.max((h * e / sc).abs());
            }
            if err <= 1.0 {
                t += h;
                y = y5;
                record(t, y);
                if stop(t, y) {
                    break;
                }
            }
            let factor = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            h = (h * factor).clamp(-self.h_max, self.h_max);
            if h.abs() < 1e-13 {
                h = 1e-13 * dir;
            }
        }
        (t, y)
    }
}

/// Outward-trajectory classes of the radial equation. Amplitudes above the
/// ground state plunge through zero; amplitudes below fail to decay and turn
/// back toward the `Θ ≡ 1` equilibrium (no finite-radius blow-up occurs in
/// this direction).
enum Classification {
    /// Θ crossed zero: the starting amplitude is too large.
    CrossedZero,
    /// Θ stopped decaying while still positive: amplitude too small.
    TurnedBack,
}

fn classify(theta0: f64, r_max: f64) -> Classification {
    let stepper = Dopri5 {
        rtol: 1e-12,
        atol: 1e-14,
        h_max: 0.1,
    };
    let r0 = 1e-3;
    let a2 = (theta0 - theta0.powi(3)) / 4.0;
    let a4 = -(3.0 * theta0 * theta0 - 1.0) * a2 / 16.0;
    let y0 = [
        theta0 + a2 * r0 * r0 + a4 * r0.powi(4),
        2.0 * a2 * r0 + 4.0 * a4 * r0.powi(3),
    ];
    let mut crossed = false;
    let mut turned = false;
    let (_, y) = stepper.run(
        radial_rhs,
        r0,
        y0,
        r_max,
        |_, _| {},
        |_, y| {
            if y[0] < 0.0 {
                crossed = true;
                true
            } else if y[1] > 0.0 {
                turned = true;
                true
            } else {
                false
            }
        },
    );
    if crossed {
        Classification::CrossedZero
    } else if turned || y[0] > 1e-3 {
        Classification::TurnedBack
    } else {
        // reached r_max still decaying and already tiny: effectively on the
        // separatrix; treat as the too-small side to keep bisection moving
        Classification::TurnedBack
    }
}

/// Ground-state amplitude and radial profile of `ΔΘ + Θ³ = Θ` in 2-D,
/// computed by bisection shooting on `Θ(0)` over the bracket `[1, 3]`.
///
/// The returned profile is strictly decreasing with `Θ(r_max) < 10⁻⁶`; past
/// the radius where the shooting trajectory leaves the stable regime, the
/// decaying solution of the linear far-field equation (integrated inward,
/// which is stable) continues the profile.
pub fn ground_profile_2d(tolerance: f64) -> Result<RadialProfile> {
    if tolerance <= 0.0 {
        return Err(Error::InvalidParameter(
            "shooting tolerance must be positive".into(),
        ));
    }
    let r_max = 20.0;
    let (mut lo, mut hi) = (1.0, 3.0);
    if !matches!(classify(lo, r_max), Classification::TurnedBack)
        || !matches!(classify(hi, r_max), Classification::CrossedZero)
    {
        return Err(Error::BracketNotFound { lo, hi });
    }
    while hi - lo > tolerance.max(4.0 * f64::EPSILON) {
        let mid = 0.5 * (lo + hi);
        match classify(mid, r_max) {
            Classification::CrossedZero => hi = mid,
            Classification::TurnedBack => lo = mid,
        }
        if hi - lo <= 4.0 * f64::EPSILON && hi - lo > tolerance {
            return Err(Error::ToleranceNotReached(tolerance));
        }
    }
    let theta0 = 0.5 * (lo + hi);

    // dense outward integration of the bisected trajectory
    let stepper = Dopri5 {
        rtol: 1e-12,
        atol: 1e-16,
        h_max: 0.01,
    };
    let r0 = 1e-3;
    let a2 = (theta0 - theta0.powi(3)) / 4.0;
    let a4 = -(3.0 * theta0 * theta0 - 1.0) * a2 / 16.0;
    let y0 = [
        theta0 + a2 * r0 * r0 + a4 * r0.powi(4),
        2.0 * a2 * r0 + 4.0 * a4 * r0.powi(3),
    ];
    let switch_amp = 1e-5 * theta0;
    let mut r_s = Vec::new();
    let mut th = Vec::new();
    let mut dth = Vec::new();
    stepper.run(
        radial_rhs,
        r0,
        y0,
        r_max,
        |r, y| {
            r_s.push(r);
            th.push(y[0]);
            dth.push(y[1]);
        },
        |_, y| y[0] <= switch_amp || y[1] > 0.0 || y[0] < 0.0,
    );
    // drop any corrupted tail samples (growth or sign loss)
    while let (Some(&t), Some(&d)) = (th.last(), dth.last()) {
        if t <= 0.0 || d > 0.0 || t > switch_amp * 1.5 && th.len() > 1 && t >= th[th.len() - 2] {
            r_s.pop();
            th.pop();
            dth.pop();
        } else {
            break;
        }
    }
    let r_star = *r_s.last().unwrap();
    let theta_star = *th.last().unwrap();

    // decaying far-field solution, integrated inward from far away (stable
    // direction), then scaled to match at r_star
    let far = 2.0 * r_max;
    let mut tail: Vec<(f64, [f64; 2])> = Vec::new();
    let tail_stepper = Dopri5 {
        rtol: 1e-12,
        atol: 1e-300,
        h_max: 0.01,
    };
    tail_stepper.run(
        tail_rhs,
        far,
        [1.0, -(1.0 + 0.5 / far)],
        r_star,
        |r, y| tail.push((r, y)),
        |_, _| false,
    );
    let scale = theta_star / tail.last().unwrap().1[0];
    for (r, y) in tail.iter().rev().skip(1) {
        if *r > r_star {
            r_s.push(*r);
            th.push(scale * y[0]);
            dth.push(scale * y[1]);
        }
    }

    let profile = RadialProfile {
        r: r_s,
        theta: th,
        dtheta: dth,
        theta0,
        a2,
        a4,
    };
    // the profile must reach the far boundary already negligible
    let at_rmax = profile.eval(r_max);
    if !at_rmax.is_finite() || at_rmax.abs() >= 1e-6 {
        return Err(Error::ToleranceNotReached(tolerance));
    }
    Ok(profile)
}
