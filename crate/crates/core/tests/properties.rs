use proptest::prelude::*;

use bdf3_core::bdf3_kernels::{
    consistency_identities, d_coeffs, dgs_residual, f_functional, g_functional, monotone_violations, re,
};
use bdf3_core::doc_kernels::DocKernelTable;
use bdf3_core::experiments::{emit, order_of, parse_csv, ConvergenceRow, Format};
use bdf3_core::heat_solver::SpectralGrid;
use bdf3_core::quad_forms::{
    bdf3_quadratic_form, doc_quadratic_form, min_eigenvalue, min_eigenvalue_banded, rescaled_matrix, EIG_TOL,
};
use bdf3_core::rng::SeededRng;
use bdf3_core::TimeMesh;

fn admissible(n: usize, lo: f64, seed: u64) -> TimeMesh {
    TimeMesh::random_ratios(1.0, n, lo, re(), seed).unwrap()
}

fn values(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = SeededRng::new(seed);
    (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect()
}

proptest! {
    #[test]
    fn kernels_are_consistent(x in 1e-3f64..4.0, y in 1e-3f64..4.0) {
        for r in consistency_identities(x, y).unwrap() {
            prop_assert!(r.abs() < 1e-11);
        }
        let d = d_coeffs(x, y).unwrap();
        prop_assert!(d.d0 > 1.0 && d.d1 < 0.0 && d.d2 >= 0.0);
    }

    #[test]
    fn kernels_are_monotone_below_limit(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0, e in 0.0f64..1.0) {
        let r = re();
        let (x, x2) = (r * a.min(b), r * a.max(b));
        let (y, y2) = (r * c.min(e), r * c.max(e));
        prop_assert_eq!(monotone_violations(x, x2, y, y2), 0);
    }

    #[test]
    fn periodic_mesh_alternates(half in 2usize..60, mu in 1.0f64..6.0) {
        let n = 2 * half;
        let mesh = TimeMesh::periodic_ratio(2.0, n, mu).unwrap();
        prop_assert!((mesh.nodes()[n] - 2.0).abs() < 1e-12);
        let stats = mesh.ratio_stats(re());
        let expect = if mu >= re() { n / 2 } else { 0 };
        prop_assert_eq!(stats.count_ge, expect);
    }

    #[test]
    fn random_mesh_is_normalized(n in 4usize..300, seed in any::<u64>()) {
        let mesh = TimeMesh::random(1.5, n, seed).unwrap();
        prop_assert!((mesh.nodes()[n] - 1.5).abs() < 1e-12);
        prop_assert!(mesh.steps().iter().all(|&t| t > 0.0));
    }

    #[test]
    fn gradient_structure_identity(n in 5usize..50, seed in any::<u64>()) {
        let mesh = admissible(n, 0.05, seed);
        let mut v = values(n + 1, seed ^ 1);
        v[1] = 0.0;
        v[2] = 0.0;
        for k in 3..n {
            prop_assert!(dgs_residual(&mesh, &v, k).unwrap() < 1e-11);
        }
    }

    #[test]
    fn lyapunov_terms_are_nonnegative(n in 5usize..40, seed in any::<u64>()) {
        let mesh = admissible(n, 0.05, seed);
        let v = values(n + 1, seed ^ 2);
        for k in 3..n {
            prop_assert!(g_functional(&mesh, k, v[k], v[k - 1]).unwrap() >= 0.0);
            let f = f_functional(&mesh, k, v[k], v[k - 1], v[k - 2]).unwrap();
            prop_assert!(f >= mesh.tau(k) * v[k] * v[k] / 50.0 - 1e-15);
        }
    }

    #[test]
    fn doc_orthogonality_on_admissible_meshes(n in 4usize..120, seed in any::<u64>()) {
        let mesh = admissible(n, 0.05, seed);
        let table = DocKernelTable::build(&mesh, n).unwrap();
        for k in 3..=n {
            prop_assert!(table.orthogonality_residual(k).unwrap() < 1e-11);
            prop_assert!(table.mutual_orthogonality_residual(k).unwrap() < 1e-11);
            prop_assert!(table.theta(k, k) > 3.0 / 11.0);
        }
    }

    #[test]
    fn doc_orthogonality_on_periodic_meshes(half in 2usize..100, mu in 0.2f64..6.0) {
        let mesh = TimeMesh::periodic_ratio(1.0, 2 * half, mu).unwrap();
        let table = DocKernelTable::build(&mesh, 2 * half).unwrap();
        for k in 3..=2 * half {
            prop_assert!(table.orthogonality_residual(k).unwrap() < 1e-11);
        }
    }

    #[test]
    fn quadratic_forms_are_positive(n in 3usize..60, seed in any::<u64>()) {
        let mesh = admissible(n.max(4), 0.05, seed);
        let xi = values(n - 2, seed ^ 3);
        let (value, bound) = bdf3_quadratic_form(&mesh, &xi).unwrap();
        prop_assert!(value >= bound - 1e-12);
        let table = DocKernelTable::build(&mesh, n).unwrap();
        prop_assert!(doc_quadratic_form(&mesh, &table, &xi).unwrap() > 0.0);
    }

    #[test]
    fn doc_form_equals_transformed_bdf3_form(n in 3usize..40, seed in any::<u64>()) {
        let mesh = admissible(n.max(4), 0.2, seed);
        let table = DocKernelTable::build(&mesh, n).unwrap();
        let xi = values(n - 2, seed ^ 4);
        let eta: Vec<f64> = (3..=n)
            .map(|k| table.row(k).iter().zip(&xi).map(|(t, x)| t * x).sum())
            .collect();
        let (via_eta, _) = bdf3_quadratic_form(&mesh, &eta).unwrap();
        let direct = doc_quadratic_form(&mesh, &table, &xi).unwrap();
        prop_assert!((via_eta - direct).abs() < 1e-11);
    }

    #[test]
    fn rescaled_matrix_depends_on_ratios_only(n in 4usize..60, seed in any::<u64>()) {
        let mesh = TimeMesh::random(1.0, n, seed).unwrap();
        let dilate = |f: f64| TimeMesh::from_steps(mesh.steps().iter().map(|t| f * t).collect()).unwrap();
        let a = rescaled_matrix(&mesh.ratios()).unwrap();
        // power-of-two scaling is exact, so the entries agree bitwise
        prop_assert_eq!(&a, &rescaled_matrix(&dilate(8.0).ratios()).unwrap());
        let b = rescaled_matrix(&dilate(10.0).ratios()).unwrap();
        for i in 0..a.order() {
            for j in 0..a.order() {
                prop_assert!((a.get(i, j) - b.get(i, j)).abs() <= 1e-14 * a.get(i, j).abs().max(1.0));
            }
        }
    }

    #[test]
    fn eigen_routes_agree(m in 1usize..9, seed in any::<u64>()) {
        let mut rng = SeededRng::new(seed);
        let ratios: Vec<f64> = (0..m + 1).map(|_| rng.uniform_in(0.01, 3.0)).collect();
        let ratios = if ratios.len() < 3 { vec![ratios[0], 1.0, 1.0] } else { ratios };
        let a = rescaled_matrix(&ratios).unwrap();
        let jacobi = min_eigenvalue(&a, EIG_TOL).unwrap();
        let banded = min_eigenvalue_banded(&a, EIG_TOL);
        prop_assert!((jacobi - banded).abs() < 1e-9 * jacobi.abs().max(1.0));
    }

    #[test]
    fn eigenvalue_positive_below_limit(n in 4usize..80, seed in any::<u64>()) {
        let mut rng = SeededRng::new(seed);
        let ratios: Vec<f64> = (2..=n).map(|_| rng.uniform_in(0.0, re())).collect();
        let a = rescaled_matrix(&ratios).unwrap();
        prop_assert!(min_eigenvalue_banded(&a, EIG_TOL) > 0.0);
    }

    #[test]
    fn spectral_round_trip(log_m in 2u32..6, seed in any::<u64>()) {
        let m = 1usize << log_m;
        let grid = SpectralGrid::new(m).unwrap();
        let v = values(m * m, seed);
        let field = grid.forward(&v).unwrap();
        let back = grid.inverse_complex(&field);
        for (a, b) in v.iter().zip(&back) {
            prop_assert!((a - b.re).abs() < 1e-13 && b.im.abs() < 1e-13);
        }
        let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
        let quad = grid.integrate(&sq);
        prop_assert!((field.l2_norm_sq() - quad).abs() <= 1e-12 * quad);
    }

    #[test]
    fn csv_round_trip(es in proptest::collection::vec(1e-12f64..1.0, 1..6)) {
        let rows: Vec<ConvergenceRow> = es
            .iter()
            .enumerate()
            .map(|(i, &e)| ConvergenceRow {
                n: 80 << i,
                tau: 1.0 / (80 << i) as f64,
                e_n: e,
                order: (i > 0).then(|| e.ln()),
                r_max: 1.0 + e,
                n1: i,
            })
            .collect();
        prop_assert_eq!(parse_csv(&emit(&rows, Format::Csv)).unwrap(), rows);
    }

    #[test]
    fn order_of_exact_power(p in 0.5f64..5.0, tau in 1e-4f64..1e-1, c in 1e-3f64..10.0) {
        let order = order_of(c * tau.powf(p), c * (tau / 2.0).powf(p), tau, tau / 2.0).unwrap();
        prop_assert!((order - p).abs() < 1e-9);
    }
}
