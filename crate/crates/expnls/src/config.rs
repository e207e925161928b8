//! JSON run configuration: strict parsing (unknown keys rejected) and a
//! canonical serialization that round-trips.

use crate::spectral::{Axis, Grid};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub grid: GridConfig,
    pub time: TimeConfig,
    /// Method for `run`; `converge` uses `methods`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<MethodConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub methods: Vec<MethodConfig>,
    /// Observer list; empty means mass + energy, plus the phase error when
    /// an exact solution exists.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub observers: Vec<ObserverKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshots: Option<SnapshotConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverConfig>,
    /// Saturation window `(low, high)` for order estimation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_window: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    /// 1-D cubic benchmark with the travelling soliton solution.
    Soliton1d { q: f64, a: f64, c: f64, x0: f64 },
    /// 1-D cubic-quintic equation with the oscillating linear potential.
    CubicQuintic1d {
        g1: f64,
        g2: f64,
        omega: f64,
        e_c: f64,
        beta0: f64,
    },
    /// 1-D cubic problem with `ψ₀ = |sin x|` (long-time studies).
    SinAbs1d { q: f64 },
    /// 2-D cubic equation with the shooting ground profile.
    Plane2d {
        #[serde(default = "default_shooting_tolerance")]
        shooting_tolerance: f64,
    },
    /// Rotating condensate with a Thomas-Fermi initial datum; the cutoff
    /// size is the grid period.
    RotatingBec {
        beta: f64,
        omega: f64,
        gamma_x: f64,
        gamma_y: f64,
    },
}

fn default_shooting_tolerance() -> f64 {
    1e-12
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub axes: Vec<Axis>,
}

impl GridConfig {
    pub fn build(&self) -> Result<Grid> {
        Grid::new(&self.axes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_final: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_list: Option<Vec<f64>>,
    /// Geometric grid `start … stop` with `points` samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_geometric: Option<GeometricSteps>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricSteps {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl TimeConfig {
    /// The single step size required by `run`.
    pub fn single_h(&self) -> Result<f64> {
        match (self.h, &self.h_list, &self.h_geometric) {
            (Some(h), None, None) => Ok(h),
            _ => Err(Error::Config(
                "`run` requires exactly the `time.h` field (no h_list / h_geometric)".into(),
            )),
        }
    }

    /// The step list required by `converge`.
    pub fn step_list(&self) -> Result<Vec<f64>> {
        match (self.h, &self.h_list, &self.h_geometric) {
            (None, Some(list), None) if !list.is_empty() => Ok(list.clone()),
            (None, None, Some(g)) => {
                if g.points < 2 || g.start <= 0.0 || g.stop <= 0.0 {
                    return Err(Error::Config(
                        "h_geometric requires positive start/stop and at least 2 points".into(),
                    ));
                }
                let ratio = (g.stop / g.start).ln() / (g.points - 1) as f64;
                Ok((0..g.points)
                    .map(|i| g.start * (ratio * i as f64).exp())
                    .collect())
            }
            (Some(h), None, None) => Ok(vec![h]),
            _ => Err(Error::Config(
                "`converge` requires exactly one of time.h, time.h_list, time.h_geometric".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeFamily {
    #[default]
    Gauss,
    Equispaced,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodConfig {
    Erk {
        s: usize,
        #[serde(default)]
        nodes: NodeFamily,
    },
    Lawson {
        s: usize,
        #[serde(default)]
        nodes: NodeFamily,
    },
    Splitting { order: u32 },
}

impl MethodConfig {
    pub fn label(&self) -> String {
        let family = |n: &NodeFamily| match n {
            NodeFamily::Gauss => "gauss",
            NodeFamily::Equispaced => "equi",
        };
        match self {
            MethodConfig::Erk { s, nodes } => format!("{}-erk-s{s}", family(nodes)),
            MethodConfig::Lawson { s, nodes } => format!("{}-lawson-s{s}", family(nodes)),
            MethodConfig::Splitting { order } => format!("splitting-{order}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObserverKind {
    Mass,
    Energy,
    PhaseError,
    AngularMomentum,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotConfig {
    /// Times at which `|ψ|²` is dumped; must align with integration steps.
    pub times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
    #[serde(default = "default_divergence_factor")]
    pub divergence_factor: f64,
}

fn default_tolerance() -> f64 {
    1e-14
}
fn default_max_iterations() -> usize {
    200
}
fn default_divergence_factor() -> f64 {
    1e6
}

impl SolverConfig {
    pub fn stepper_config(&self) -> crate::integrators::StepperConfig {
        crate::integrators::StepperConfig {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
            divergence_factor: self.divergence_factor,
        }
    }
}

/// Configuration of the `coeffs` inspection command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoeffsConfig {
    pub grid: GridConfig,
    pub h: f64,
    pub s: usize,
    #[serde(default)]
    pub nodes: NodeFamily,
    /// Laplacian coefficient ν in `L = iνΔ`.
    #[serde(default = "default_nu")]
    pub nu: f64,
}

fn default_nu() -> f64 {
    0.5
}

/// Strictly parse a JSON config document.
pub fn parse_run_config(text: &str) -> Result<RunConfig> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

pub fn parse_coeffs_config(text: &str) -> Result<CoeffsConfig> {
    serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

/// Canonical serialization: stable field order, pretty-printed.
pub fn canonical_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("config serialization cannot fail")
}
