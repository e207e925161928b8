//! Property tests over randomized inputs.

use expnls::coefficients::{erk_a, erk_b, gauss_nodes, phi, LagrangeBasis};
use expnls::problems;
use expnls::spectral::{Grid, Repr, SpectralField};
use num_complex::Complex64;
use proptest::prelude::*;

fn field_strategy(p: u32) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1usize << p)
        .prop_map(|v| v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn transform_round_trip_and_parseval(p in 2u32..8, values in (2u32..8).prop_flat_map(field_strategy)) {
        let p = p.min(values.len().trailing_zeros());
        let values = values[..1 << p].to_vec();
        let grid = Grid::line(-4.0, 4.0, p).unwrap();
        let field = SpectralField::from_values(grid.clone(), values, Repr::Physical);
        let hat = field.to_spectral().unwrap();
        let back = hat.to_physical().unwrap();
        let scale = field.l2_norm().max(1e-6);
        let err: f64 = field
            .values()
            .iter()
            .zip(back.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
            * grid.cell_volume().sqrt();
        prop_assert!(err < 1e-13 * scale);

        let phys2 = field.l2_norm().powi(2);
        let spec2 = grid.cell_volume() / grid.len() as f64
            * hat.values().iter().map(|v| v.norm_sqr()).sum::<f64>();
        prop_assert!((phys2 - spec2).abs() <= 1e-12 * phys2.max(1e-9));
    }

    #[test]
    fn phi_recurrence_identity(re in -2.0f64..2.0, im in -2.0f64..2.0, j in 0usize..6) {
        let z = Complex64::new(re, im);
        prop_assume!(z.norm() > 1e-3);
        let lhs = phi(j + 1, z);
        let rhs = (phi(j, z) - 1.0 / (1..=j).product::<usize>() as f64) / z;
        prop_assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1e-6));
    }

    #[test]
    fn erk_row_sums_follow_phi1(s in 1usize..4, t in -6.0f64..6.0) {
        // Σ_ℓ a_{k,ℓ}(z) = c_k φ₁(c_k z) and Σ_k b_k(z) = φ₁(z)
        let z = Complex64::new(0.0, t);
        let nodes = gauss_nodes(s).unwrap();
        let basis = LagrangeBasis::new(nodes.clone());
        for k in 0..s {
            let ck = nodes.values()[k];
            let sum: Complex64 = (0..s).map(|l| erk_a(k, l, z, &basis)).sum();
            prop_assert!((sum - ck * phi(1, ck * z)).norm() < 1e-12);
        }
        let bsum: Complex64 = (0..s).map(|k| erk_b(k, z, &basis)).sum();
        prop_assert!((bsum - phi(1, z)).norm() < 1e-12);
    }

    #[test]
    fn nonlinear_flow_is_pointwise_unitary(tau in -0.5f64..0.5, t0 in 0.0f64..3.0) {
        let grid = Grid::line(-32.0, 32.0, 6).unwrap();
        let problem = problems::cubic_quintic_1d(-2.0, 0.5, 2.0, -1.0, 0.0, &grid).unwrap();
        let mut psi = problem.initial_state().into_values();
        let before: Vec<f64> = psi.iter().map(|v| v.norm()).collect();
        let mut scratch = vec![0.0; psi.len()];
        problem.nw_flow(t0, tau, &mut psi, &mut scratch);
        for (v, b) in psi.iter().zip(&before) {
            prop_assert!((v.norm() - b).abs() <= 1e-13 * b.max(1e-9));
        }
    }
}
