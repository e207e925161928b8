//! Periodic tensor-product grids, discrete Fourier transforms and the
//! discrete calculus built on them.
//!
//! Conventions: the forward transform is the plain unnormalized sum
//! `ψ̂_m = Σ_j ψ_j e^{−iμ_m(x_j−x_ℓ)}` and the inverse carries the `1/M`
//! factor. Spectral coefficients are stored in transform order
//! `m = 0, 1, …, M/2−1, −M/2, …, −1` (index `i` maps to mode `i` for
//! `i < M/2` and `i − M` otherwise); formulas written for the symmetric
//! range `−M/2 … M/2−1` apply after this permutation.

use crate::{par, Error, Result};
use num_complex::Complex64;
use once_cell::sync::Lazy;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

/// One periodic axis: interval `[x_left, x_right)` with `2^p` grid points.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub x_left: f64,
    pub x_right: f64,
    pub p: u32,
}

impl Axis {
    /// Number of grid points / Fourier modes on this axis.
    pub fn modes(&self) -> usize {
        1usize << self.p
    }

    /// Period of the axis.
    pub fn extent(&self) -> f64 {
        self.x_right - self.x_left
    }

    /// Mesh spacing `k = (x_right − x_left) / M`.
    pub fn spacing(&self) -> f64 {
        self.extent() / self.modes() as f64
    }

    /// Node position `x_j = x_left + j·k`.
    pub fn node(&self, j: usize) -> f64 {
        self.x_left + j as f64 * self.spacing()
    }

    /// Signed integer mode of storage index `i` (transform order).
    pub fn mode_number(&self, i: usize) -> i64 {
        let m = self.modes();
        if i < m / 2 {
            i as i64
        } else {
            i as i64 - m as i64
        }
    }

    /// Wavenumber `μ_m = 2πm/(x_right − x_left)` of storage index `i`.
    pub fn wavenumber(&self, i: usize) -> f64 {
        2.0 * PI * self.mode_number(i) as f64 / self.extent()
    }
}

/// Periodic tensor-product grid in one or two dimensions.
///
/// In 2-D, node values are stored row-major with the first axis fastest:
/// index `ix + mx·iy`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    /// Build a grid from per-axis `(x_left, x_right, p)` descriptions.
    pub fn new(axes: &[Axis]) -> Result<Self> {
        if axes.is_empty() || axes.len() > 2 {
            return Err(Error::InvalidDimension(axes.len()));
        }
        for ax in axes {
            if ax.p < 1 {
                return Err(Error::InvalidParameter(format!(
                    "mode exponent p must be >= 1, got {}",
                    ax.p
                )));
            }
            if ax.x_right <= ax.x_left {
                return Err(Error::NonPositiveExtent {
                    xl: ax.x_left,
                    xr: ax.x_right,
                });
            }
        }
        Ok(Grid {
            axes: axes.to_vec(),
        })
    }

    /// Convenience constructor for a 1-D grid.
    pub fn line(x_left: f64, x_right: f64, p: u32) -> Result<Self> {
        Grid::new(&[Axis { x_left, x_right, p }])
    }

    /// Convenience constructor for a 2-D grid.
    pub fn plane(x: Axis, y: Axis) -> Result<Self> {
        Grid::new(&[x, y])
    }

    /// Square 2-D grid with identical axes.
    pub fn square(x_left: f64, x_right: f64, p: u32) -> Result<Self> {
        let ax = Axis { x_left, x_right, p };
        Grid::new(&[ax, ax])
    }

    pub fn dims(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, d: usize) -> &Axis {
        &self.axes[d]
    }

    /// Total number of nodes (`M` in 1-D, `Mx·My` in 2-D).
    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::modes).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Product of the per-axis mesh spacings (the quadrature weight).
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    /// Physical coordinates of the node with flat index `idx`.
    pub fn node(&self, idx: usize) -> Vec<f64> {
        match self.axes.len() {
            1 => vec![self.axes[0].node(idx)],
            _ => {
                let mx = self.axes[0].modes();
                vec![self.axes[0].node(idx % mx), self.axes[1].node(idx / mx)]
            }
        }
    }

    /// Evaluate `f` on every node, producing a physical-space field.
    pub fn sample(&self, f: impl Fn(&[f64]) -> Complex64) -> SpectralField {
        let values = match self.axes.len() {
            1 => (0..self.len())
                .map(|j| f(&[self.axes[0].node(j)]))
                .collect(),
            _ => {
                let mx = self.axes[0].modes();
                (0..self.len())
                    .map(|idx| f(&[self.axes[0].node(idx % mx), self.axes[1].node(idx / mx)]))
                    .collect()
            }
        };
        SpectralField {
            grid: self.clone(),
            values,
            repr: Repr::Physical,
        }
    }

    /// Evaluate a real function on every node.
    pub fn sample_real(&self, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        match self.axes.len() {
            1 => (0..self.len()).map(|j| f(&[self.axes[0].node(j)])).collect(),
            _ => {
                let mx = self.axes[0].modes();
                (0..self.len())
                    .map(|idx| f(&[self.axes[0].node(idx % mx), self.axes[1].node(idx / mx)]))
                    .collect()
            }
        }
    }

    /// Laplacian symbol `ω_p = −Σ_axis μ_{p_axis}²`, aligned with the
    /// spectral coefficient layout. All entries are ≤ 0 and the DC entry is 0.
    pub fn laplacian_symbol(&self) -> Vec<f64> {
        match self.axes.len() {
            1 => (0..self.len())
                .map(|i| {
                    let mu = self.axes[0].wavenumber(i);
                    -mu * mu
                })
                .collect(),
            _ => {
                let mx = self.axes[0].modes();
                (0..self.len())
                    .map(|idx| {
                        let mux = self.axes[0].wavenumber(idx % mx);
                        let muy = self.axes[1].wavenumber(idx / mx);
                        -(mux * mux + muy * muy)
                    })
                    .collect()
            }
        }
    }

    /// Byte digest of the grid parameters, used to key the coefficient cache.
    pub fn param_bytes(&self) -> Vec<u8> {
        let mut b = Vec::new();
        b.push(self.axes.len() as u8);
        for ax in &self.axes {
            b.extend_from_slice(&ax.x_left.to_bits().to_le_bytes());
            b.extend_from_slice(&ax.x_right.to_bits().to_le_bytes());
            b.extend_from_slice(&(ax.p as u64).to_le_bytes());
        }
        b
    }
}

/// Representation of a [`SpectralField`]'s stored values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Repr {
    Physical,
    Spectral,
}

/// Complex field over a [`Grid`], in either physical or spectral representation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    values: Vec<Complex64>,
    repr: Repr,
}

impl SpectralField {
    pub fn from_values(grid: Grid, values: Vec<Complex64>, repr: Repr) -> Self {
        assert_eq!(values.len(), grid.len(), "value count must match the grid");
        SpectralField { grid, values, repr }
    }

    /// All-zero physical field.
    pub fn zeros(grid: &Grid) -> Self {
        SpectralField {
            values: vec![Complex64::ZERO; grid.len()],
            grid: grid.clone(),
            repr: Repr::Physical,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn repr(&self) -> Repr {
        self.repr
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Forward transform (physical → spectral), unnormalized sum.
    pub fn to_spectral(&self) -> Result<SpectralField> {
        if self.repr != Repr::Physical {
            return Err(Error::RepresentationMismatch);
        }
        let mut values = self.values.clone();
        fft_nd(&self.grid, &mut values, Direction::Forward);
        Ok(SpectralField {
            grid: self.grid.clone(),
            values,
            repr: Repr::Spectral,
        })
    }

    /// Inverse transform (spectral → physical), carries the `1/M` factor.
    pub fn to_physical(&self) -> Result<SpectralField> {
        if self.repr != Repr::Spectral {
            return Err(Error::RepresentationMismatch);
        }
        let mut values = self.values.clone();
        fft_nd(&self.grid, &mut values, Direction::Inverse);
        let scale = 1.0 / self.grid.len() as f64;
        for v in &mut values {
            *v *= scale;
        }
        Ok(SpectralField {
            grid: self.grid.clone(),
            values,
            repr: Repr::Physical,
        })
    }

    /// Discrete `ℓ^r` norm `(k Σ_j |v_j|^r)^{1/r}` including the mesh factor.
    ///
    /// Only meaningful in physical representation; `r ≥ 1`.
    pub fn lp_norm(&self, r: f64) -> Result<f64> {
        if r < 1.0 {
            return Err(Error::InvalidParameter(format!(
                "lp_norm requires r >= 1, got {r}"
            )));
        }
        let k = self.grid.cell_volume();
        let sum: f64 = if (r - 2.0).abs() < 1e-15 {
            self.values.iter().map(|v| v.norm_sqr()).sum()
        } else {
            self.values.iter().map(|v| v.norm().powf(r)).sum()
        };
        Ok((k * sum).powf(1.0 / r))
    }

    /// `ℓ²` norm shortcut.
    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(2.0).expect("r = 2 is always valid")
    }

    /// Spectral derivative along `axis`: multiplication by `iμ_m`.
    ///
    /// The result is returned in the same representation as the input.
    pub fn gradient(&self, axis: usize) -> Result<SpectralField> {
        assert!(axis < self.grid.dims(), "axis out of range");
        let mut hat = match self.repr {
            Repr::Physical => self.to_spectral()?,
            Repr::Spectral => self.clone(),
        };
        apply_gradient_symbol(&self.grid, hat.values_mut(), axis);
        match self.repr {
            Repr::Physical => hat.to_physical(),
            Repr::Spectral => Ok(hat),
        }
    }
}

fn apply_gradient_symbol(grid: &Grid, hat: &mut [Complex64], axis: usize) {
    match grid.dims() {
        1 => {
            let ax = grid.axis(0);
            for (i, v) in hat.iter_mut().enumerate() {
                *v *= Complex64::new(0.0, ax.wavenumber(i));
            }
        }
        _ => {
            let mx = grid.axis(0).modes();
            let ax = grid.axis(axis);
            for (idx, v) in hat.iter_mut().enumerate() {
                let i = if axis == 0 { idx % mx } else { idx / mx };
                *v *= Complex64::new(0.0, ax.wavenumber(i));
            }
        }
    }
}

/// Unnormalized in-place forward transform on raw storage.
pub(crate) fn forward_in_place(grid: &Grid, values: &mut [Complex64]) {
    fft_nd(grid, values, Direction::Forward);
}

/// In-place inverse transform on raw storage, including the `1/M` factor.
pub(crate) fn inverse_in_place(grid: &Grid, values: &mut [Complex64]) {
    fft_nd(grid, values, Direction::Inverse);
    let scale = 1.0 / grid.len() as f64;
    for v in values {
        *v *= scale;
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

struct PlanCache {
    planner: FftPlanner<f64>,
    plans: HashMap<(usize, bool), Arc<dyn Fft<f64>>>,
}

static PLANS: Lazy<Mutex<PlanCache>> = Lazy::new(|| {
    Mutex::new(PlanCache {
        planner: FftPlanner::new(),
        plans: HashMap::new(),
    })
});

thread_local! {
    static TRANSPOSE_BUF: std::cell::Cell<Vec<Complex64>> = const { std::cell::Cell::new(Vec::new()) };
}

fn plan(len: usize, dir: Direction) -> Arc<dyn Fft<f64>> {
    let mut cache = PLANS.lock().expect("fft plan cache poisoned");
    let fwd = dir == Direction::Forward;
    if let Some(p) = cache.plans.get(&(len, fwd)) {
        return p.clone();
    }
    let p = if fwd {
        cache.planner.plan_fft_forward(len)
    } else {
        cache.planner.plan_fft_inverse(len)
    };
    cache.plans.insert((len, fwd), p.clone());
    p
}

/// Batched row transforms with one scratch buffer per task.
fn fft_rows(fft: &Arc<dyn Fft<f64>>, data: &mut [Complex64], row_len: usize) {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        let rows = data.len() / row_len;
        let per_task = rows
            .div_ceil(4 * rayon::current_num_threads().max(1))
            .max(1);
        data.par_chunks_mut(row_len * per_task).for_each(|block| {
            let mut scratch = vec![Complex64::ZERO; fft.get_inplace_scratch_len()];
            for row in block.chunks_mut(row_len) {
                fft.process_with_scratch(row, &mut scratch);
            }
        });
    }
    #[cfg(not(feature = "parallel"))]
    {
        let mut scratch = vec![Complex64::ZERO; fft.get_inplace_scratch_len()];
        for row in data.chunks_mut(row_len) {
            fft.process_with_scratch(row, &mut scratch);
        }
    }
}

/// In-place unnormalized transform over all grid axes.
fn fft_nd(grid: &Grid, values: &mut [Complex64], dir: Direction) {
    match grid.dims() {
        1 => {
            let fft = plan(grid.axis(0).modes(), dir);
            let mut scratch = vec![Complex64::ZERO; fft.get_inplace_scratch_len()];
            fft.process_with_scratch(values, &mut scratch);
        }
        _ => {
            let mx = grid.axis(0).modes();
            let my = grid.axis(1).modes();
            let fx = plan(mx, dir);
            fft_rows(&fx, values, mx);
            // columns along y via transpose, reusing a per-thread buffer
            TRANSPOSE_BUF.with(|cell| {
                let mut t = cell.take();
                t.resize(values.len(), Complex64::ZERO);
                transpose(values, mx, my, &mut t);
                let fy = plan(my, dir);
                fft_rows(&fy, &mut t, my);
                transpose(&t, my, mx, values);
                cell.replace(t);
            });
        }
    }
}

/// `dst[j + cols_dst*i] = src[i + cols_src*j]` for an `cols_src × rows` matrix.
fn transpose(src: &[Complex64], cols: usize, rows: usize, dst: &mut [Complex64]) {
    par::for_each_chunk_mut(dst, rows, |i, out| {
        for (j, o) in out.iter_mut().enumerate() {
            *o = src[i + cols * j];
        }
    });
}

/// Deterministic pseudo-random helpers shared by unit tests.
#[cfg(test)]
pub(crate) mod tests_support {
    /// Linear-congruential stream of values in (−0.5, 0.5).
    pub fn lcg(seed: u64) -> impl FnMut() -> f64 {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        }
    }
}

#[cfg(test)]
mod tests {
    use super::tests_support::lcg;
    use super::*;

    fn random_field(grid: &Grid, seed: u64) -> SpectralField {
        let mut next = lcg(seed);
        let values = (0..grid.len())
            .map(|_| Complex64::new(next(), next()))
            .collect();
        SpectralField::from_values(grid.clone(), values, Repr::Physical)
    }

    #[test]
    fn benchmark_grid_dimensions() {
        let g = Grid::line(-15.0, 15.0, 10).unwrap();
        assert_eq!(g.axis(0).modes(), 1024);
        assert_eq!(g.axis(0).extent(), 30.0);
        assert!((g.axis(0).spacing() - 30.0 / 1024.0).abs() < 1e-15);

        let g2 = Grid::square(-38.0, 38.0, 9).unwrap();
        assert_eq!(g2.len(), 512 * 512);
    }

    #[test]
    fn two_point_grid_nodes_and_modes() {
        let g = Grid::line(0.0, 2.0 * PI, 1).unwrap();
        assert_eq!(g.len(), 2);
        assert!((g.axis(0).node(0) - 0.0).abs() < 1e-15);
        assert!((g.axis(0).node(1) - PI).abs() < 1e-15);
        // transform order: modes {0, -1}
        assert_eq!(g.axis(0).mode_number(0), 0);
        assert_eq!(g.axis(0).mode_number(1), -1);
        assert!((g.axis(0).wavenumber(1) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn grid_construction_errors() {
        assert!(matches!(
            Grid::new(&[]),
            Err(Error::InvalidDimension(0))
        ));
        let ax = Axis {
            x_left: 0.0,
            x_right: 1.0,
            p: 3,
        };
        assert!(matches!(
            Grid::new(&[ax, ax, ax]),
            Err(Error::InvalidDimension(3))
        ));
        assert!(matches!(
            Grid::line(1.0, 1.0, 3),
            Err(Error::NonPositiveExtent { .. })
        ));
        assert!(Grid::line(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn constant_field_transforms_to_dc_mode() {
        let g = Grid::line(-1.0, 1.0, 4).unwrap();
        let one = g.sample(|_| Complex64::ONE);
        let hat = one.to_spectral().unwrap();
        let m = g.len() as f64;
        assert!((hat.values()[0] - Complex64::new(m, 0.0)).norm() < 1e-12);
        for v in &hat.values()[1..] {
            assert!(v.norm() < 1e-12);
        }
    }

    #[test]
    fn pure_mode_transforms_to_single_coefficient() {
        let g = Grid::line(-3.0, 7.0, 5).unwrap();
        let ax = *g.axis(0);
        let mu1 = 2.0 * PI / ax.extent();
        let f = g.sample(|x| Complex64::new(0.0, mu1 * (x[0] - ax.x_left)).exp());
        let hat = f.to_spectral().unwrap();
        let m = g.len() as f64;
        for (i, v) in hat.values().iter().enumerate() {
            if i == 1 {
                assert!((v - Complex64::new(m, 0.0)).norm() < 1e-9 * m);
            } else {
                assert!(v.norm() < 1e-9 * m);
            }
        }
    }

    /// Direct O(M²) evaluation of the defining transform sums.
    fn dft_oracle(grid: &Grid, values: &[Complex64]) -> Vec<Complex64> {
        let ax = grid.axis(0);
        let m = ax.modes();
        (0..m)
            .map(|i| {
                let mu = ax.wavenumber(i);
                (0..m)
                    .map(|j| {
                        let phase = -mu * (ax.node(j) - ax.x_left);
                        values[j] * Complex64::new(0.0, phase).exp()
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn transform_matches_direct_summation_oracle() {
        let g = Grid::line(-2.0, 3.0, 6).unwrap(); // M = 64
        let f = random_field(&g, 7);
        let hat = f.to_spectral().unwrap();
        let oracle = dft_oracle(&g, f.values());
        let err: f64 = hat
            .values()
            .iter()
            .zip(&oracle)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let scale: f64 = oracle.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(err / scale < 1e-13, "relative error {}", err / scale);
    }

    #[test]
    fn round_trip_is_identity() {
        for grid in [
            Grid::line(-15.0, 15.0, 8).unwrap(),
            Grid::square(-4.0, 4.0, 5).unwrap(),
        ] {
            let f = random_field(&grid, 11);
            let back = f.to_spectral().unwrap().to_physical().unwrap();
            let err: f64 = f
                .values()
                .iter()
                .zip(back.values())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            let scale = f.l2_norm() / grid.cell_volume().sqrt();
            assert!(err / scale < 1e-13);
        }
    }

    #[test]
    fn representation_mismatch_is_rejected() {
        let g = Grid::line(0.0, 1.0, 3).unwrap();
        let f = g.sample(|_| Complex64::ONE);
        let hat = f.to_spectral().unwrap();
        assert!(matches!(
            hat.to_spectral(),
            Err(Error::RepresentationMismatch)
        ));
        assert!(matches!(f.to_physical(), Err(Error::RepresentationMismatch)));
    }

    #[test]
    fn real_field_has_conjugate_symmetric_spectrum() {
        let g = Grid::line(-1.0, 1.0, 6).unwrap();
        let mut next = lcg(3);
        let vals: Vec<Complex64> = (0..g.len()).map(|_| Complex64::new(next(), 0.0)).collect();
        let f = SpectralField::from_values(g.clone(), vals, Repr::Physical);
        let hat = f.to_spectral().unwrap();
        let m = g.len();
        let scale: f64 = hat.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        for i in 1..m {
            let a = hat.values()[i];
            let b = hat.values()[m - i].conj();
            assert!((a - b).norm() < 1e-13 * scale);
        }
    }

    #[test]
    fn gradient_of_sine_is_scaled_cosine() {
        let g = Grid::line(-15.0, 15.0, 7).unwrap();
        let ax = *g.axis(0);
        let mu1 = 2.0 * PI / ax.extent();
        let f = g.sample(|x| Complex64::new((mu1 * (x[0] - ax.x_left)).sin(), 0.0));
        let df = f.gradient(0).unwrap();
        for (j, v) in df.values().iter().enumerate() {
            let expect = mu1 * (mu1 * (ax.node(j) - ax.x_left)).cos();
            assert!((v.re - expect).abs() < 1e-12, "node {j}");
            assert!(v.im.abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_constant_vanishes() {
        let g = Grid::line(0.0, 5.0, 5).unwrap();
        let f = g.sample(|_| Complex64::new(2.5, -1.0));
        let df = f.gradient(0).unwrap();
        assert!(df.values().iter().all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn gradient_matches_analytic_derivative_of_pure_mode() {
        let g = Grid::line(-2.0, 2.0, 6).unwrap();
        let ax = *g.axis(0);
        let mu1 = 2.0 * PI / ax.extent();
        let f = g.sample(|x| Complex64::new(0.0, 2.0 * mu1 * (x[0] - ax.x_left)).exp());
        let df = f.gradient(0).unwrap();
        for (j, v) in df.values().iter().enumerate() {
            let z = Complex64::new(0.0, 2.0 * mu1 * (ax.node(j) - ax.x_left)).exp();
            let expect = Complex64::new(0.0, 2.0 * mu1) * z;
            assert!((v - expect).norm() < 1e-11);
        }
    }

    #[test]
    fn gradient_along_second_axis() {
        let g = Grid::plane(
            Axis {
                x_left: 0.0,
                x_right: 2.0 * PI,
                p: 4,
            },
            Axis {
                x_left: 0.0,
                x_right: 2.0 * PI,
                p: 5,
            },
        )
        .unwrap();
        let f = g.sample(|x| Complex64::new((3.0 * x[1]).sin(), 0.0));
        let dfy = f.gradient(1).unwrap();
        let oracle = g.sample(|x| Complex64::new(3.0 * (3.0 * x[1]).cos(), 0.0));
        for (a, b) in dfy.values().iter().zip(oracle.values()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn l2_norm_of_constant_matches_domain_size() {
        for p in [4, 7] {
            let g = Grid::line(-15.0, 15.0, p).unwrap();
            let one = g.sample(|_| Complex64::ONE);
            assert!((one.l2_norm() - 30.0_f64.sqrt()).abs() < 1e-13);
        }
        let z = SpectralField::zeros(&Grid::line(0.0, 1.0, 4).unwrap());
        assert_eq!(z.l2_norm(), 0.0);
    }

    #[test]
    fn lp_norm_rejects_r_below_one() {
        let g = Grid::line(0.0, 1.0, 3).unwrap();
        let f = g.sample(|_| Complex64::ONE);
        assert!(f.lp_norm(0.5).is_err());
    }

    #[test]
    fn soliton_mass_matches_quadrature_oracle() {
        // |ψ(0,x)|² = sech²(2x) for the q=8, a=4 benchmark profile; its
        // integral over the line is 1. A fine trapezoid on the truncated
        // domain doubles as the oracle.
        let g = Grid::line(-15.0, 15.0, 10).unwrap();
        let f = g.sample(|x| {
            let s = 1.0 / (2.0 * x[0]).cosh();
            Complex64::new(s, 0.0)
        });
        let n = 400_000;
        let dx = 30.0 / n as f64;
        let oracle: f64 = (0..n)
            .map(|i| {
                let x = -15.0 + (i as f64 + 0.5) * dx;
                (1.0 / (2.0 * x).cosh()).powi(2) * dx
            })
            .sum();
        let norm2 = f.l2_norm().powi(2);
        assert!((norm2 - oracle).abs() < 1e-9, "{norm2} vs {oracle}");
        assert!((norm2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn laplacian_symbol_values() {
        // 1-D, δ = 2π: symbol of mode 3 is −9, DC is 0.
        let g = Grid::line(0.0, 2.0 * PI, 4).unwrap();
        let om = g.laplacian_symbol();
        assert!((om[3] + 9.0).abs() < 1e-12);
        assert_eq!(om[0], 0.0);
        assert!(om.iter().all(|&w| w <= 0.0));

        // 2-D isotropic δ = 76, p = (1,2): −(2π/76)²·5.
        let g2 = Grid::square(-38.0, 38.0, 4).unwrap();
        let om2 = g2.laplacian_symbol();
        let mx = g2.axis(0).modes();
        let idx = 1 + mx * 2;
        let unit = (2.0 * PI / 76.0).powi(2);
        assert!((om2[idx] + 5.0 * unit).abs() < 1e-13);
    }

    #[test]
    fn laplacian_symbol_matches_discrete_laplacian_on_pure_mode() {
        let g = Grid::square(-38.0, 38.0, 4).unwrap();
        let (mx, my) = (g.axis(0).modes(), g.axis(1).modes());
        let mux = g.axis(0).wavenumber(1);
        let muy = g.axis(1).wavenumber(2);
        let f = g.sample(|x| {
            Complex64::new(
                0.0,
                mux * (x[0] - g.axis(0).x_left) + muy * (x[1] - g.axis(1).x_left),
            )
            .exp()
        });
        // Δf via two spectral second derivatives
        let dxx = f.gradient(0).unwrap().gradient(0).unwrap();
        let dyy = f.gradient(1).unwrap().gradient(1).unwrap();
        let om = g.laplacian_symbol()[1 + mx * 2];
        for ((a, b), v) in dxx.values().iter().zip(dyy.values()).zip(f.values()) {
            assert!(((a + b) - om * v).norm() < 1e-9);
        }
        assert_eq!(my, 16);
    }

    #[test]
    fn parseval_identity_both_dims() {
        for grid in [
            Grid::line(-5.0, 9.0, 7).unwrap(),
            Grid::plane(
                Axis {
                    x_left: -1.0,
                    x_right: 1.0,
                    p: 4,
                },
                Axis {
                    x_left: 0.0,
                    x_right: 3.0,
                    p: 5,
                },
            )
            .unwrap(),
        ] {
            let f = random_field(&grid, 123);
            let hat = f.to_spectral().unwrap();
            let phys2 = f.l2_norm().powi(2);
            let spec2 = grid.cell_volume() / grid.len() as f64
                * hat.values().iter().map(|v| v.norm_sqr()).sum::<f64>();
            assert!((phys2 - spec2).abs() < 1e-12 * phys2.max(1.0));
        }
    }

    #[test]
    fn gradient_commutes_with_round_trip() {
        let g = Grid::line(-3.0, 3.0, 6).unwrap();
        let f = random_field(&g, 99);
        let a = f
            .gradient(0)
            .unwrap()
            .to_spectral()
            .unwrap()
            .to_physical()
            .unwrap();
        let b = f
            .to_spectral()
            .unwrap()
            .to_physical()
            .unwrap()
            .gradient(0)
            .unwrap();
        let scale = a.l2_norm().max(1.0);
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).norm() < 1e-12 * scale);
        }
    }

    #[test]
    fn double_gradient_equals_squared_symbol() {
        let g = Grid::line(-2.0, 2.0, 5).unwrap();
        let f = random_field(&g, 5);
        let hat = f.to_spectral().unwrap();
        let twice = hat.gradient(0).unwrap().gradient(0).unwrap();
        for (i, (a, b)) in twice.values().iter().zip(hat.values()).enumerate() {
            let mu = g.axis(0).wavenumber(i);
            assert!((a - b * (-mu * mu)).norm() < 1e-10 * b.norm().max(1.0));
        }
    }
}
