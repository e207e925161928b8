//! Collocation nodes, Lagrange polynomial algebra and numerically stable
//! evaluation of the entire functions `a_{k,ℓ}(z)`, `b_k(z)` over all Fourier
//! symbols, plus the per-mode precomputation tables used by the exponential
//! steppers.
//!
//! The coefficient functions are assembled from φ-functions,
//!
//! `a_{k,ℓ}(z) = c_k Σ_j β_{ℓ,j} c_k^j j! φ_{j+1}(c_k z)`,
//! `b_k(z) = Σ_j β_{k,j} j! φ_{j+1}(z)`,
//!
//! where `β_{ℓ,j}` are the monomial coefficients of the Lagrange basis. Small
//! arguments are evaluated through a trapezoidal discretization of the Cauchy
//! integral on the unit circle; large arguments through series / closed forms.

pub mod cache;

use crate::spectral::Grid;
use crate::tableau::ButcherTableau;
use crate::{par, Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Largest supported stage count.
pub const MAX_STAGES: usize = 8;

/// Number of trapezoidal quadrature points on the unit circle.
pub const CONTOUR_POINTS: usize = 64;

/// Contour/direct switching radius for a single φ argument. The per-mode
/// regime threshold `h|ω_p| = 1/2` corresponds to `|z| = 1/4` after the
/// `ω/2` scaling of the spectral symbol.
pub const PHI_SWITCH_RADIUS: f64 = 0.25;

const FACTORIALS: [f64; 21] = {
    let mut f = [1.0; 21];
    let mut i = 1;
    while i < 21 {
        f[i] = f[i - 1] * i as f64;
        i += 1;
    }
    f
};

/// Collocation nodes `c_1 < … < c_s` in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CollocationNodes {
    c: Vec<f64>,
}

impl CollocationNodes {
    /// Wrap explicit nodes; they must be pairwise distinct and lie in `[0,1]`.
    pub fn from_nodes(c: Vec<f64>) -> Result<Self> {
        if c.is_empty() || c.len() > MAX_STAGES {
            return Err(Error::InvalidParameter(format!(
                "stage count must be in 1..={MAX_STAGES}, got {}",
                c.len()
            )));
        }
        for (i, &ci) in c.iter().enumerate() {
            if !(0.0..=1.0).contains(&ci) {
                return Err(Error::InvalidParameter(format!("node {ci} outside [0,1]")));
            }
            for &cj in &c[..i] {
                if (ci - cj).abs() < 1e-12 {
                    return Err(Error::InvalidParameter(
                        "collocation nodes must be pairwise distinct".into(),
                    ));
                }
            }
        }
        Ok(CollocationNodes { c })
    }

    pub fn s(&self) -> usize {
        self.c.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.c
    }
}

/// Legendre polynomial `P_s` and its derivative at `x ∈ [−1, 1]`.
fn legendre(s: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if s == 0 {
        return (1.0, 0.0);
    }
    for k in 1..s {
        let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = if x.abs() < 1.0 {
        s as f64 * (x * p1 - p0) / (x * x - 1.0)
    } else {
        0.0
    };
    (p1, dp)
}

/// Roots of the degree-`s` shifted Legendre polynomial on `[0, 1]`, ascending.
///
/// These are the Gauss collocation points; they are symmetric about 1/2.
pub fn gauss_nodes(s: usize) -> Result<CollocationNodes> {
    if !(1..=MAX_STAGES).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "gauss_nodes requires 1 <= s <= {MAX_STAGES}, got {s}"
        )));
    }
    let mut roots = Vec::with_capacity(s);
    for i in 1..=s {
        // classical initial guess, then Newton on P_s
        let mut x = (PI * (i as f64 - 0.25) / (s as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(s, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        roots.push(x);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut c: Vec<f64> = roots.iter().map(|x| 0.5 * (1.0 + x)).collect();
    // enforce the c_k + c_{s+1-k} = 1 symmetry exactly
    for k in 0..s / 2 {
        let m = 0.5 * (c[k] + 1.0 - c[s - 1 - k]);
        c[k] = m;
        c[s - 1 - k] = 1.0 - m;
    }
    if s % 2 == 1 {
        c[s / 2] = 0.5;
    }
    CollocationNodes::from_nodes(c)
}

/// Equispaced nodes `c_k = k/s`, the canonical non-superconvergent choice.
pub fn equispaced_nodes(s: usize) -> Result<CollocationNodes> {
    if !(1..=MAX_STAGES).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "equispaced_nodes requires 1 <= s <= {MAX_STAGES}, got {s}"
        )));
    }
    CollocationNodes::from_nodes((1..=s).map(|k| k as f64 / s as f64).collect())
}

/// Lagrange basis over a node set, expanded in monomials of the scaled
/// variable `v = τ/h`: `𝓛_ℓ(v) = Σ_j β_{ℓ,j} v^j`.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    nodes: CollocationNodes,
    /// `beta[l][j]` is the coefficient of `v^j` in `𝓛_{l+1}`.
    beta: Vec<Vec<f64>>,
}

impl LagrangeBasis {
    pub fn new(nodes: CollocationNodes) -> Self {
        let c = nodes.values();
        let s = c.len();
        let mut beta = Vec::with_capacity(s);
        for l in 0..s {
            // product of (v - c_j) over j != l
            let mut poly = vec![1.0];
            let mut denom = 1.0;
            for (j, &cj) in c.iter().enumerate() {
                if j == l {
                    continue;
                }
                denom *= c[l] - cj;
                let mut next = vec![0.0; poly.len() + 1];
                for (d, &coef) in poly.iter().enumerate() {
                    next[d + 1] += coef;
                    next[d] -= coef * cj;
                }
                poly = next;
            }
            for coef in &mut poly {
                *coef /= denom;
            }
            poly.resize(s, 0.0);
            beta.push(poly);
        }
        LagrangeBasis { nodes, beta }
    }

    pub fn nodes(&self) -> &CollocationNodes {
        &self.nodes
    }

    pub fn s(&self) -> usize {
        self.nodes.s()
    }

    /// Monomial coefficients of `𝓛_{l+1}` (`l` zero-based).
    pub fn monomial_coefficients(&self, l: usize) -> &[f64] {
        &self.beta[l]
    }

    /// Evaluate `𝓛_{l+1}(v)`.
    pub fn eval(&self, l: usize, v: f64) -> f64 {
        let mut acc = 0.0;
        for &b in self.beta[l].iter().rev() {
            acc = acc * v + b;
        }
        acc
    }

    /// `∫_0^{upper} 𝓛_{l+1}(v) dv`, exact from the monomial expansion.
    pub fn integral(&self, l: usize, upper: f64) -> f64 {
        let mut acc = 0.0;
        let mut pow = 1.0;
        for (j, &b) in self.beta[l].iter().enumerate() {
            pow *= upper;
            acc += b * pow / (j + 1) as f64;
        }
        acc
    }
}

/// Gauss collocation Butcher tableau: `a_{k,ℓ} = ∫_0^{c_k} 𝓛_ℓ`,
/// `b_k = ∫_0^1 𝓛_k` (evaluated through the Gauss-Legendre weight formula).
pub fn gauss_tableau(s: usize) -> Result<ButcherTableau> {
    let nodes = gauss_nodes(s)?;
    let basis = LagrangeBasis::new(nodes.clone());
    let c = nodes.values();
    let mut a = vec![vec![0.0; s]; s];
    for k in 0..s {
        for l in 0..s {
            a[k][l] = basis.integral(l, c[k]);
        }
    }
    let b = c
        .iter()
        .map(|&ck| {
            let x = 2.0 * ck - 1.0;
            let (_, dp) = legendre(s, x);
            1.0 / ((1.0 - x * x) * dp * dp)
        })
        .collect();
    Ok(ButcherTableau::new(a, b))
}

/// Collocation tableau over arbitrary distinct nodes (used for the
/// equispaced reference methods).
pub fn collocation_tableau(nodes: &CollocationNodes) -> ButcherTableau {
    let basis = LagrangeBasis::new(nodes.clone());
    let s = nodes.s();
    let c = nodes.values();
    let mut a = vec![vec![0.0; s]; s];
    let mut b = vec![0.0; s];
    for k in 0..s {
        for l in 0..s {
            a[k][l] = basis.integral(l, c[k]);
        }
        b[k] = basis.integral(k, 1.0);
    }
    ButcherTableau::new(a, b)
}

/// Trapezoidal discretization of the Cauchy integral
/// `f(z) = (1/2πi) ∮ f(ω)/(ω−z) dω` on the positively oriented unit circle.
///
/// Converges geometrically in `q`; requires `|z| < 1`.
pub fn contour_eval(
    f: impl Fn(Complex64) -> Complex64,
    z: Complex64,
    q: usize,
) -> Result<Complex64> {
    if z.norm() >= 1.0 {
        return Err(Error::OutsideContour(z.norm(), 1.0));
    }
    let mut acc = Complex64::ZERO;
    for i in 0..q {
        let w = Complex64::from_polar(1.0, 2.0 * PI * i as f64 / q as f64);
        acc += f(w) * w / (w - z);
    }
    Ok(acc / q as f64)
}

/// φ-function values `φ_0 … φ_{jmax}` at `z`, by the upward recurrence
/// `φ_{j+1}(z) = (φ_j(z) − 1/j!)/z`. Stable away from the origin.
fn phi_recurrence(jmax: usize, z: Complex64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(jmax + 1);
    out.push(z.exp());
    for j in 0..jmax {
        let prev = out[j];
        out.push((prev - 1.0 / FACTORIALS[j]) / z);
    }
    out
}

/// Taylor series `φ_j(z) = Σ_k z^k/(k+j)!`, accurate for moderate `|z|`.
fn phi_taylor(j: usize, z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0 / FACTORIALS[j], 0.0);
    let mut sum = term;
    for k in 1..200 {
        term *= z / (j + k) as f64;
        sum += term;
        if term.norm() <= 1e-20 * sum.norm() {
            break;
        }
    }
    sum
}

/// Contour evaluation of `φ_j(z)` for `|z| < 1`: the circle values are taken
/// by the recurrence (stable at `|ω| = 1`).
fn phi_contour(j: usize, z: Complex64) -> Complex64 {
    contour_eval(|w| phi_recurrence(j, w)[j], z, CONTOUR_POINTS)
        .expect("|z| < 1 checked by caller")
}

/// `φ_j(z)`: `φ_0 = exp`, `φ_{j+1}(z) = (φ_j(z) − 1/j!)/z`, `φ_j(0) = 1/j!`.
///
/// Below [`PHI_SWITCH_RADIUS`] the value comes from the contour quadrature to
/// avoid the cancellation of the recurrence; above it from the series / the
/// closed form, whichever is stable for the magnitude.
pub fn phi(j: usize, z: Complex64) -> Complex64 {
    assert!(j <= 20, "phi order out of tabulated range");
    if j == 0 {
        return z.exp();
    }
    let r = z.norm();
    if r == 0.0 {
        return Complex64::new(1.0 / FACTORIALS[j], 0.0);
    }
    if r <= PHI_SWITCH_RADIUS {
        phi_contour(j, z)
    } else {
        phi_direct(j, z)
    }
}

/// Series / closed-form evaluation, valid for any `z` bounded away from 0.
fn phi_direct(j: usize, z: Complex64) -> Complex64 {
    if j == 0 {
        return z.exp();
    }
    if z.norm() < j as f64 + 4.0 {
        phi_taylor(j, z)
    } else {
        // (e^z - Σ_{k<j} z^k/k!) / z^j; the partial sum dominates here
        let mut partial = Complex64::ZERO;
        let mut term = Complex64::ONE;
        for k in 0..j {
            partial += term;
            term *= z / (k + 1) as f64;
        }
        (z.exp() - partial) / z.powu(j as u32)
    }
}

/// Evaluation route for the coefficient functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    /// Pick per φ argument (contour below the switching radius).
    Auto,
    /// Force the Cauchy-integral quadrature (requires all arguments inside
    /// the unit circle).
    Contour,
    /// Force series / closed-form evaluation.
    Direct,
}

fn phi_routed(j: usize, z: Complex64, route: Route) -> Complex64 {
    match route {
        Route::Auto => phi(j, z),
        Route::Contour => {
            if z.norm() == 0.0 {
                Complex64::new(1.0 / FACTORIALS[j], 0.0)
            } else {
                phi_contour(j, z)
            }
        }
        Route::Direct => {
            if z.norm() == 0.0 {
                Complex64::new(1.0 / FACTORIALS[j], 0.0)
            } else {
                phi_direct(j, z)
            }
        }
    }
}

/// `a_{k,ℓ}(z)` for zero-based stage indices `k, ℓ`.
///
/// Equals `(1/h)∫_0^{c_k h} e^{(c_k h−σ)L} 𝓛_ℓ(σ) dσ` evaluated at the scalar
/// symbol `z = hL`; at `z = 0` this reduces to the underlying collocation
/// tableau entry.
pub fn erk_a(k: usize, l: usize, z: Complex64, basis: &LagrangeBasis) -> Complex64 {
    erk_a_routed(k, l, z, basis, Route::Auto)
}

/// `b_k(z)` for a zero-based stage index `k`.
pub fn erk_b(k: usize, z: Complex64, basis: &LagrangeBasis) -> Complex64 {
    erk_b_routed(k, z, basis, Route::Auto)
}

pub fn erk_a_routed(
    k: usize,
    l: usize,
    z: Complex64,
    basis: &LagrangeBasis,
    route: Route,
) -> Complex64 {
    let ck = basis.nodes().values()[k];
    let beta = basis.monomial_coefficients(l);
    let mut acc = Complex64::ZERO;
    let mut ck_pow = 1.0;
    for (j, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            acc += b * ck_pow * FACTORIALS[j] * phi_routed(j + 1, ck * z, route);
        }
        ck_pow *= ck;
    }
    ck * acc
}

pub fn erk_b_routed(k: usize, z: Complex64, basis: &LagrangeBasis, route: Route) -> Complex64 {
    let beta = basis.monomial_coefficients(k);
    let mut acc = Complex64::ZERO;
    for (j, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            acc += b * FACTORIALS[j] * phi_routed(j + 1, z, route);
        }
    }
    acc
}

/// Which evaluation regime a table entry used, following the threshold
/// `h|ω_p| ≤ 1/2` on the Laplacian eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Contour,
    Direct,
}

/// Per-mode propagator symbols `e^{α·ihνω}` for a fixed set of exponents `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagators {
    alphas: Vec<f64>,
    /// `symbols[i][mode] = exp(alphas[i] · i h ν ω_mode)`
    symbols: Vec<Vec<Complex64>>,
}

impl Propagators {
    /// Build propagator symbols on a grid for step `h` and Laplacian
    /// coefficient `ν` (the operator is `L = iνΔ`).
    pub fn build(grid: &Grid, h: f64, nu: f64, alphas: &[f64]) -> Self {
        let alphas = dedup_alphas(alphas);
        let omega = grid.laplacian_symbol();
        let symbols = alphas
            .iter()
            .map(|&alpha| {
                let theta: Vec<f64> = omega.iter().map(|&w| alpha * h * nu * w).collect();
                par::collect_indexed(theta.len(), |m| Complex64::from_polar(1.0, theta[m]))
            })
            .collect();
        Propagators { alphas, symbols }
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Index of exponent `alpha` (within dedup tolerance). Panics if the set
    /// was built without it.
    pub fn index_of(&self, alpha: f64) -> usize {
        self.alphas
            .iter()
            .position(|&a| (a - alpha).abs() <= 1e-14)
            .unwrap_or_else(|| panic!("propagator for alpha = {alpha} was not precomputed"))
    }

    pub fn symbols(&self, idx: usize) -> &[Complex64] {
        &self.symbols[idx]
    }
}

/// Sorted, deduplicated exponent set (tolerance 1e-15).
pub fn dedup_alphas(alphas: &[f64]) -> Vec<f64> {
    let mut set: Vec<f64> = alphas.to_vec();
    set.sort_by(|a, b| a.partial_cmp(b).unwrap());
    set.dedup_by(|a, b| (*a - *b).abs() <= 1e-15);
    set
}

/// Exponent set needed by the ERK stepping equations.
pub fn erk_alpha_set(nodes: &CollocationNodes) -> Vec<f64> {
    let mut set = vec![0.0, 1.0];
    set.extend_from_slice(nodes.values());
    dedup_alphas(&set)
}

/// Exponent set needed by the Lawson stepping equations:
/// `{c_k} ∪ {c_k − c_ℓ} ∪ {1 − c_k} ∪ {1}`.
pub fn lawson_alpha_set(c: &[f64]) -> Vec<f64> {
    let mut set = vec![0.0, 1.0];
    for &ck in c {
        set.push(ck);
        set.push(1.0 - ck);
        for &cl in c {
            set.push(ck - cl);
        }
    }
    dedup_alphas(&set)
}

/// Precomputed diagonal operators `a_{k,ℓ}(ihνω_p)`, `b_k(ihνω_p)` and the
/// propagator symbols, for a fixed `(grid, h, ν, nodes)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTables {
    s: usize,
    h: f64,
    nu: f64,
    /// collocation nodes the tables were built for
    c: Vec<f64>,
    /// `a[k*s + l][mode]`
    a: Vec<Vec<Complex64>>,
    /// `b[k][mode]`
    b: Vec<Vec<Complex64>>,
    props: Propagators,
    regimes: Vec<Regime>,
}

impl CoefficientTables {
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn nodes_c(&self) -> &[f64] {
        &self.c
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn a(&self, k: usize, l: usize) -> &[Complex64] {
        &self.a[k * self.s + l]
    }

    pub fn b(&self, k: usize) -> &[Complex64] {
        &self.b[k]
    }

    pub fn propagators(&self) -> &Propagators {
        &self.props
    }

    pub fn regimes(&self) -> &[Regime] {
        &self.regimes
    }
}

/// Build the coefficient tables for every Fourier mode of `grid`.
///
/// Data-parallel over modes; the result is deterministic and independent of
/// the worker count. `alphas` lists the propagator exponents to precompute
/// alongside (the stepping code resolves them by value).
pub fn precompute_tables(
    grid: &Grid,
    h: f64,
    nodes: &CollocationNodes,
    nu: f64,
    alphas: &[f64],
) -> Result<CoefficientTables> {
    if h <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "step size must be positive, got {h}"
        )));
    }
    let basis = LagrangeBasis::new(nodes.clone());
    let s = nodes.s();
    let omega = grid.laplacian_symbol();
    let n = omega.len();

    // φ_j values on the contour circle, shared across modes
    let circle: Vec<Complex64> = (0..CONTOUR_POINTS)
        .map(|i| Complex64::from_polar(1.0, 2.0 * PI * i as f64 / CONTOUR_POINTS as f64))
        .collect();
    let circle_phi: Vec<Vec<Complex64>> = {
        // circle_phi[j][q] = φ_{j+1}(ω_q)
        let mut by_q: Vec<Vec<Complex64>> = circle
            .iter()
            .map(|&w| phi_recurrence(s + 1, w))
            .collect();
        (1..=s)
            .map(|j| by_q.iter_mut().map(|v| v[j]).collect())
            .collect()
    };
    // φ_{j+1}(u) for u inside the circle via the cached circle values
    let phi_cached = |j1: usize, u: Complex64| -> Complex64 {
        let mut acc = Complex64::ZERO;
        for (q, &w) in circle.iter().enumerate() {
            acc += circle_phi[j1 - 1][q] * w / (w - u);
        }
        acc / CONTOUR_POINTS as f64
    };

    let c = nodes.values().to_vec();
    let stride = s * s + s;
    let mut flat = vec![Complex64::ZERO; n * stride];
    let mut regimes = vec![Regime::Direct; n];
    {
        let regime_flags: Vec<Regime> = par::collect_indexed(n, |m| {
            if h * omega[m].abs() <= 0.5 {
                Regime::Contour
            } else {
                Regime::Direct
            }
        });
        regimes.copy_from_slice(&regime_flags);
    }

    par::for_each_chunk_mut(&mut flat, stride, |m, out| {
        let z = Complex64::new(0.0, h * nu * omega[m]);
        let contour = regimes[m] == Regime::Contour;
        // φ_{j+1} at the s+1 distinct arguments {c_k z} ∪ {z}
        let mut phis = vec![Complex64::ZERO; (s + 1) * s];
        for (ai, arg) in c
            .iter()
            .map(|&ck| ck * z)
            .chain(std::iter::once(z))
            .enumerate()
        {
            for j in 0..s {
                phis[ai * s + j] = if arg.norm() == 0.0 {
                    Complex64::new(1.0 / FACTORIALS[j + 1], 0.0)
                } else if contour {
                    phi_cached(j + 1, arg)
                } else {
                    phi_direct(j + 1, arg)
                };
            }
        }
        for k in 0..s {
            let ck = c[k];
            for l in 0..s {
                let beta = basis.monomial_coefficients(l);
                let mut acc = Complex64::ZERO;
                let mut ck_pow = 1.0;
                for (j, &bcoef) in beta.iter().enumerate() {
                    if bcoef != 0.0 {
                        acc += bcoef * ck_pow * FACTORIALS[j] * phis[k * s + j];
                    }
                    ck_pow *= ck;
                }
                out[k * s + l] = ck * acc;
            }
            let beta = basis.monomial_coefficients(k);
            let mut acc = Complex64::ZERO;
            for (j, &bcoef) in beta.iter().enumerate() {
                if bcoef != 0.0 {
                    acc += bcoef * FACTORIALS[j] * phis[s * s + j];
                }
            }
            out[s * s + k] = acc;
        }
    });

    let mut a = vec![vec![Complex64::ZERO; n]; s * s];
    let mut b = vec![vec![Complex64::ZERO; n]; s];
    for m in 0..n {
        let chunk = &flat[m * stride..(m + 1) * stride];
        for kl in 0..s * s {
            a[kl][m] = chunk[kl];
        }
        for k in 0..s {
            b[k][m] = chunk[s * s + k];
        }
    }

    let props = Propagators::build(grid, h, nu, alphas);
    Ok(CoefficientTables {
        s,
        h,
        nu,
        c,
        a,
        b,
        props,
        regimes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn taylor_oracle(j: usize, z: Complex64) -> Complex64 {
        // independent series oracle, summed to machine precision; valid
        // while the terms stay comparable to the result (|z| small)
        let mut term = Complex64::new(1.0, 0.0);
        for d in 1..=j {
            term /= d as f64;
        }
        let mut sum = term;
        for k in 1..300 {
            term *= z / (j + k) as f64;
            sum += term;
            if term.norm() < 1e-22 * sum.norm() {
                break;
            }
        }
        sum
    }

    /// Quadrature oracle of `φ_j(z) = ∫_0^1 e^{(1−θ)z} θ^{j−1}/(j−1)! dθ`
    /// (composite Gauss-Legendre), accurate for any magnitude.
    fn integral_phi_oracle(j: usize, z: Complex64) -> Complex64 {
        if j == 0 {
            return z.exp();
        }
        let nodes = gauss_nodes(8).unwrap();
        let weights = gauss_tableau(8).unwrap().b;
        let panels = 128;
        let dth = 1.0 / panels as f64;
        let mut fact = 1.0;
        for d in 1..j {
            fact *= d as f64;
        }
        let mut acc = Complex64::ZERO;
        for p in 0..panels {
            let t0 = p as f64 * dth;
            for (x, w) in nodes.values().iter().zip(&weights) {
                let th: f64 = t0 + x * dth;
                acc += w * dth * ((1.0 - th) * z).exp() * th.powi(j as i32 - 1) / fact;
            }
        }
        acc
    }

    #[test]
    fn gauss_nodes_match_analytic_roots() {
        let n1 = gauss_nodes(1).unwrap();
        assert_eq!(n1.values(), &[0.5]);

        let n2 = gauss_nodes(2).unwrap();
        let r = 3.0f64.sqrt() / 6.0;
        assert!((n2.values()[0] - (0.5 - r)).abs() < 1e-15);
        assert!((n2.values()[1] - (0.5 + r)).abs() < 1e-15);

        let n3 = gauss_nodes(3).unwrap();
        let q = 15.0f64.sqrt() / 10.0;
        assert!((n3.values()[0] - (0.5 - q)).abs() < 1e-15);
        assert!((n3.values()[1] - 0.5).abs() < 1e-15);
        assert!((n3.values()[2] - (0.5 + q)).abs() < 1e-15);
    }

    #[test]
    fn gauss_nodes_are_symmetric_roots_for_all_s() {
        for s in 1..=MAX_STAGES {
            let nodes = gauss_nodes(s).unwrap();
            let c = nodes.values();
            for k in 0..s {
                assert!((c[k] + c[s - 1 - k] - 1.0).abs() < 1e-14, "s={s}");
                assert!(c[k] > 0.0 && c[k] < 1.0);
                // residual of the shifted Legendre polynomial at the root
                let (p, _) = legendre(s, 2.0 * c[k] - 1.0);
                assert!(p.abs() < 1e-14, "s={s} k={k} residual {p}");
            }
            for k in 1..s {
                assert!(c[k] > c[k - 1]);
            }
        }
        assert!(gauss_nodes(0).is_err());
        assert!(gauss_nodes(9).is_err());
    }

    #[test]
    fn lagrange_basis_kronecker_and_partition_of_unity() {
        for nodes in [gauss_nodes(4).unwrap(), equispaced_nodes(3).unwrap()] {
            let basis = LagrangeBasis::new(nodes.clone());
            let c = nodes.values();
            for l in 0..c.len() {
                for (j, &cj) in c.iter().enumerate() {
                    let expect = if j == l { 1.0 } else { 0.0 };
                    assert!((basis.eval(l, cj) - expect).abs() < 1e-13);
                }
            }
            // coefficient-level partition of unity: Σ_l β_{l,j} = δ_{j0}
            for j in 0..c.len() {
                let sum: f64 = (0..c.len())
                    .map(|l| basis.monomial_coefficients(l)[j])
                    .sum();
                let expect = if j == 0 { 1.0 } else { 0.0 };
                assert!((sum - expect).abs() < 1e-12, "j={j} sum={sum}");
            }
        }
    }

    #[test]
    fn phi_special_values() {
        assert!((phi(1, Complex64::ZERO) - Complex64::ONE).norm() < 1e-15);
        let e_ipi = phi(0, Complex64::new(0.0, PI));
        assert!((e_ipi - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        // φ_2(10⁻⁴ i) ≈ 1/2 + i·10⁻⁴/6
        let z = Complex64::new(0.0, 1e-4);
        let v = phi(2, z);
        let oracle = taylor_oracle(2, z);
        assert!((v - oracle).norm() < 1e-12 * oracle.norm());
        assert!((v.re - 0.5).abs() < 1e-8);
        assert!((v.im - 1e-4 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn phi_accuracy_on_test_annuli() {
        // relative accuracy 1e-12 across orders and magnitudes, both regimes;
        // the series oracle covers small |z|, the quadrature oracle the rest
        for j in 0..=6 {
            for &r in &[1e-8, 1e-4, 1e-2, 0.12, 0.2499, 0.26, 0.5, 1.0, 3.0, 20.0] {
                for &angle in &[0.0, PI / 2.0, 2.1, -PI / 2.0] {
                    let z = Complex64::from_polar(r, angle);
                    let v = phi(j, z);
                    let oracle = if r <= 1.0 {
                        taylor_oracle(j, z)
                    } else {
                        integral_phi_oracle(j, z)
                    };
                    let rel = (v - oracle).norm() / oracle.norm();
                    assert!(rel < 1e-12, "j={j} r={r} angle={angle} rel={rel}");
                }
            }
        }
    }

    #[test]
    fn phi_recurrence_identity_holds() {
        let z = Complex64::new(0.3, 1.7);
        for j in 0..5 {
            let lhs = phi(j + 1, z);
            let rhs = (phi(j, z) - 1.0 / FACTORIALS[j]) / z;
            assert!((lhs - rhs).norm() < 1e-13 * lhs.norm().max(1e-3));
        }
    }

    #[test]
    fn contour_eval_examples() {
        // Cauchy formula is exact for polynomials up to aliasing
        let v = contour_eval(|w| w, Complex64::new(0.3, 0.0), 64).unwrap();
        assert!((v - Complex64::new(0.3, 0.0)).norm() < 1e-14);

        let e0 = contour_eval(|w| w.exp(), Complex64::ZERO, 64).unwrap();
        assert!((e0 - Complex64::ONE).norm() < 1e-14);

        let z = Complex64::new(0.0, 0.25);
        let v = contour_eval(|w| (w.exp() - 1.0) / w, z, 64).unwrap();
        let oracle = taylor_oracle(1, z);
        assert!((v - oracle).norm() < 1e-13);

        assert!(matches!(
            contour_eval(|w| w, Complex64::new(1.0, 0.0), 64),
            Err(Error::OutsideContour(..))
        ));
    }

    #[test]
    fn erk_coefficients_reduce_to_tableau_at_zero() {
        for s in 1..=5 {
            let nodes = gauss_nodes(s).unwrap();
            let basis = LagrangeBasis::new(nodes.clone());
            let tab = gauss_tableau(s).unwrap();
            for k in 0..s {
                for l in 0..s {
                    let v = erk_a(k, l, Complex64::ZERO, &basis);
                    assert!((v.re - tab.a[k][l]).abs() < 1e-13, "s={s}");
                    assert!(v.im.abs() < 1e-14);
                }
                let v = erk_b(k, Complex64::ZERO, &basis);
                assert!((v.re - tab.b[k]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn erk_a11_matches_printed_closed_form_for_s2() {
        // a_{1,1}(z) = c1²[e^{c1 z}(1−c2 z) − 1 + z(c2−c1)] / ((c1−c2)(c1 z)²)
        let nodes = gauss_nodes(2).unwrap();
        let basis = LagrangeBasis::new(nodes.clone());
        let (c1, c2) = (nodes.values()[0], nodes.values()[1]);
        for i in 0..20 {
            let z = Complex64::new(0.0, 0.05 + 0.35 * i as f64); // up to 6.7i
            let closed = c1 * c1 * ((c1 * z).exp() * (1.0 - c2 * z) - 1.0 + z * (c2 - c1))
                / ((c1 - c2) * (c1 * z) * (c1 * z));
            let v = erk_a(0, 0, z, &basis);
            assert!(
                (v - closed).norm() < 1e-12,
                "z={z} diff={}",
                (v - closed).norm()
            );
        }
        // the z=2i sample called out explicitly
        let z = Complex64::new(0.0, 2.0);
        let closed = c1 * c1 * ((c1 * z).exp() * (1.0 - c2 * z) - 1.0 + z * (c2 - c1))
            / ((c1 - c2) * (c1 * z) * (c1 * z));
        assert!((erk_a(0, 0, z, &basis) - closed).norm() < 1e-12);
    }

    #[test]
    fn erk_s1_reduces_to_phi1() {
        let nodes = gauss_nodes(1).unwrap();
        let basis = LagrangeBasis::new(nodes);
        for &t in &[0.01, 0.3, 1.0, 4.0] {
            let z = Complex64::new(0.0, t);
            let a = erk_a(0, 0, z, &basis);
            assert!((a - 0.5 * phi(1, 0.5 * z)).norm() < 1e-13);
            let b = erk_b(0, z, &basis);
            assert!((b - phi(1, z)).norm() < 1e-13);
        }
    }

    /// Gauss-Legendre quadrature oracle of the defining integral
    /// `∫_0^{c_k} e^{(c_k − v) z} 𝓛_ℓ(v) dv` (h scaled out).
    fn integral_oracle(k: usize, l: usize, z: Complex64, basis: &LagrangeBasis) -> Complex64 {
        let ck = basis.nodes().values()[k];
        let gl = gauss_nodes(8).unwrap();
        let gt = gauss_tableau(8).unwrap();
        let panels = 64;
        let dv = ck / panels as f64;
        let mut acc = Complex64::ZERO;
        for p in 0..panels {
            let v0 = p as f64 * dv;
            for (node, w) in gl.values().iter().zip(&gt.b) {
                let v = v0 + node * dv;
                acc += w * dv * ((ck - v) * z).exp() * basis.eval(l, v);
            }
        }
        acc
    }

    #[test]
    fn erk_a_matches_defining_integral_oracle() {
        for s in [1, 3] {
            let nodes = gauss_nodes(s).unwrap();
            let basis = LagrangeBasis::new(nodes);
            for &t in &[0.05, 0.7, 2.3] {
                let z = Complex64::new(0.0, t);
                for k in 0..s {
                    for l in 0..s {
                        let oracle = integral_oracle(k, l, z, &basis);
                        let v = erk_a(k, l, z, &basis);
                        assert!(
                            (v - oracle).norm() < 1e-12,
                            "s={s} k={k} l={l} t={t} diff={}",
                            (v - oracle).norm()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn underlying_method_limit() {
        let nodes = gauss_nodes(3).unwrap();
        let basis = LagrangeBasis::new(nodes);
        let tab = gauss_tableau(3).unwrap();
        let z = Complex64::new(0.0, 1e-8);
        for k in 0..3 {
            for l in 0..3 {
                assert!((erk_a(k, l, z, &basis) - tab.a[k][l]).norm() < 1e-7);
            }
        }
    }

    #[test]
    fn regime_switch_continuity() {
        // both routes valid on |z| in [0.4, 0.6]; they must agree
        for s in [1, 2, 3] {
            let nodes = gauss_nodes(s).unwrap();
            let basis = LagrangeBasis::new(nodes);
            for i in 0..9 {
                let r = 0.4 + 0.025 * i as f64;
                let z = Complex64::new(0.0, r);
                for k in 0..s {
                    for l in 0..s {
                        let via_contour = erk_a_routed(k, l, z, &basis, Route::Contour);
                        let via_direct = erk_a_routed(k, l, z, &basis, Route::Direct);
                        assert!(
                            (via_contour - via_direct).norm() < 1e-11,
                            "s={s} r={r} diff={}",
                            (via_contour - via_direct).norm()
                        );
                    }
                    let bc = erk_b_routed(k, z, &basis, Route::Contour);
                    let bd = erk_b_routed(k, z, &basis, Route::Direct);
                    assert!((bc - bd).norm() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn row_sum_identities() {
        let nodes = gauss_nodes(3).unwrap();
        let basis = LagrangeBasis::new(nodes.clone());
        let mut next = crate::spectral::tests_support::lcg(42);
        for _ in 0..20 {
            let z = Complex64::new(0.0, 8.0 * next());
            for k in 0..3 {
                let ck = nodes.values()[k];
                let sum: Complex64 = (0..3).map(|l| erk_a(k, l, z, &basis)).sum();
                let expect = ck * phi(1, ck * z);
                assert!((sum - expect).norm() < 1e-12);
            }
            let bsum: Complex64 = (0..3).map(|k| erk_b(k, z, &basis)).sum();
            assert!((bsum - phi(1, z)).norm() < 1e-12);
        }
    }

    #[test]
    fn tables_mode_zero_recovers_tableau_and_unimodular_propagators() {
        let grid = Grid::line(-1.0, 1.0, 1).unwrap(); // M = 2: modes {0, ω₁}
        let nodes = gauss_nodes(1).unwrap();
        let tables =
            precompute_tables(&grid, 0.1, &nodes, 0.5, &erk_alpha_set(&nodes)).unwrap();
        assert!((tables.a(0, 0)[0].re - 0.5).abs() < 1e-13);
        assert!((tables.b(0)[0].re - 1.0).abs() < 1e-13);
        assert_eq!(tables.a(0, 0).len(), 2);

        let grid = Grid::line(-15.0, 15.0, 6).unwrap();
        let nodes = gauss_nodes(2).unwrap();
        let tab = gauss_tableau(2).unwrap();
        let tables =
            precompute_tables(&grid, 0.01, &nodes, 1.0, &erk_alpha_set(&nodes)).unwrap();
        for k in 0..2 {
            for l in 0..2 {
                assert!((tables.a(k, l)[0].re - tab.a[k][l]).abs() < 1e-13);
                assert!(tables.a(k, l)[0].im.abs() < 1e-13);
            }
            assert!((tables.b(k)[0].re - tab.b[k]).abs() < 1e-13);
        }
        // Σ_ℓ a_{k,ℓ}(0) = c_k and Σ_k b_k(0) = 1
        for k in 0..2 {
            let sum: Complex64 = (0..2).map(|l| tables.a(k, l)[0]).sum();
            assert!((sum.re - tab.c[k]).abs() < 1e-13);
        }
        let bsum: Complex64 = (0..2).map(|k| tables.b(k)[0]).sum();
        assert!((bsum.re - 1.0).abs() < 1e-13);

        for i in 0..tables.propagators().alphas().len() {
            for v in tables.propagators().symbols(i) {
                assert!((v.norm() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn tables_are_deterministic() {
        let grid = Grid::line(-15.0, 15.0, 7).unwrap();
        let nodes = gauss_nodes(3).unwrap();
        let alphas = erk_alpha_set(&nodes);
        let t1 = precompute_tables(&grid, 0.05, &nodes, 0.5, &alphas).unwrap();
        let t2 = precompute_tables(&grid, 0.05, &nodes, 0.5, &alphas).unwrap();
        assert_eq!(t1, t2);
    }

    #[test]
    fn b_values_bounded_by_lagrange_sup() {
        let grid = Grid::line(-15.0, 15.0, 10).unwrap();
        let nodes = gauss_nodes(3).unwrap();
        let basis = LagrangeBasis::new(nodes.clone());
        let tables =
            precompute_tables(&grid, 0.01, &nodes, 1.0, &erk_alpha_set(&nodes)).unwrap();
        for k in 0..3 {
            let sup = (0..=1000)
                .map(|i| basis.eval(k, i as f64 / 1000.0).abs())
                .fold(0.0, f64::max);
            for v in tables.b(k) {
                assert!(v.norm() <= sup + 1e-12);
            }
        }
    }

    #[test]
    fn regime_threshold_at_half() {
        let grid = Grid::line(-15.0, 15.0, 8).unwrap();
        let nodes = gauss_nodes(1).unwrap();
        let h = 0.01;
        let tables = precompute_tables(&grid, h, &nodes, 0.5, &[1.0]).unwrap();
        let omega = grid.laplacian_symbol();
        for (m, &w) in omega.iter().enumerate() {
            let expect = if h * w.abs() <= 0.5 {
                Regime::Contour
            } else {
                Regime::Direct
            };
            assert_eq!(tables.regimes()[m], expect, "mode {m}");
        }
        // both regimes must actually occur on this grid
        assert!(tables.regimes().contains(&Regime::Contour));
        assert!(tables.regimes().contains(&Regime::Direct));
    }

    #[test]
    fn lawson_alpha_set_contents() {
        let tab = gauss_tableau(2).unwrap();
        let set = lawson_alpha_set(&tab.c);
        // contains 0, 1, c_k, 1-c_k, c_k - c_l
        for &needed in &[
            0.0,
            1.0,
            tab.c[0],
            tab.c[1],
            tab.c[0] - tab.c[1],
            tab.c[1] - tab.c[0],
        ] {
            assert!(
                set.iter().any(|&a| (a - needed).abs() < 1e-14),
                "missing {needed}"
            );
        }
        // sorted and deduplicated
        for w in set.windows(2) {
            assert!(w[1] > w[0] + 1e-15);
        }
    }
}
