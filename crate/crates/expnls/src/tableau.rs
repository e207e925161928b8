//! Butcher tableaux of the underlying Runge-Kutta methods and their
//! algebraic property predicates.

/// Nodes `c`, matrix `a` and weights `b` of an `s`-stage Runge-Kutta method,
/// with `c_k = Σ_ℓ a_{k,ℓ}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    pub s: usize,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

impl ButcherTableau {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>) -> Self {
        let s = b.len();
        assert!(a.len() == s && a.iter().all(|row| row.len() == s));
        let c = a.iter().map(|row| row.iter().sum()).collect();
        ButcherTableau { s, a, b, c }
    }

    /// Explicit Euler, the canonical non-symmetric reference tableau.
    pub fn explicit_euler() -> Self {
        ButcherTableau::new(vec![vec![0.0]], vec![1.0])
    }

    /// Consistency defect `|Σ b_k − 1|`.
    pub fn consistency_defect(&self) -> f64 {
        (self.b.iter().sum::<f64>() - 1.0).abs()
    }

    /// Largest defect of the symmetry condition
    /// `a_{s+1−k, s+1−ℓ} + a_{k,ℓ} = b_ℓ`.
    pub fn symmetry_defect(&self) -> f64 {
        let s = self.s;
        let mut worst = 0.0f64;
        for k in 0..s {
            for l in 0..s {
                let d = (self.a[s - 1 - k][s - 1 - l] + self.a[k][l] - self.b[l]).abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Largest defect of the Cooper condition
    /// `b_k a_{k,ℓ} + b_ℓ a_{ℓ,k} = b_k b_ℓ` (preservation of quadratic
    /// invariants).
    pub fn cooper_defect(&self) -> f64 {
        let s = self.s;
        let mut worst = 0.0f64;
        for k in 0..s {
            for l in 0..s {
                let d = (self.b[k] * self.a[k][l] + self.b[l] * self.a[l][k]
                    - self.b[k] * self.b[l])
                    .abs();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_consistent(&self, tol: f64) -> bool {
        self.consistency_defect() <= tol
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.symmetry_defect() <= tol
    }

    pub fn is_cooper(&self, tol: f64) -> bool {
        self.cooper_defect() <= tol
    }
}
