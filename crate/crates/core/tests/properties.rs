mod common;

use std::path::PathBuf;

use cq_scatter::assembly::Scheme;
use cq_scatter::cq::{
    apply_convolution, modified_weights_fft, scalar_weights_fft, MultistepRule, TimeGrid, WeightSequence,
    DEFAULT_EPS,
};
use cq_scatter::geometry::{mfs_points, panel_mesh, shift_index, MfsShape, ParametricBoundary, Point, Shape};
use cq_scatter::kernels::{bessel_k0_scaled, laplace_kernel, KernelFamily};
use cq_scatter::linalg::least_squares;
use cq_scatter::scenarios::{Geometry, IncidentSpec, Scenario, Spatial};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use common::*;

fn rule() -> impl Strategy<Value = MultistepRule> {
    prop_oneof![Just(MultistepRule::Bdf2), Just(MultistepRule::Trapezoidal)]
}

fn right_half_plane() -> impl Strategy<Value = Complex64> {
    (-3.0f64..3.0, -std::f64::consts::FRAC_PI_2..=std::f64::consts::FRAC_PI_2)
        .prop_map(|(lg, arg)| Complex64::from_polar(10f64.powf(lg), arg))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn k0_is_conjugation_symmetric(z in right_half_plane()) {
        let a = bessel_k0_scaled(z).unwrap();
        let b = bessel_k0_scaled(z.conj()).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-15 * a.norm());
    }

    #[test]
    fn k0_matches_the_laplace_representation(z in right_half_plane()) {
        let lib = bessel_k0_scaled(z).unwrap();
        let oracle = k0_scaled_oracle(z);
        prop_assert!((lib - oracle).norm() <= 1e-10 * oracle.norm(), "z = {}", z);
    }

    #[test]
    fn contour_points_come_in_conjugate_pairs(n in 1usize..300, t in 0.1f64..20.0) {
        let grid = TimeGrid::new(n, t, DEFAULT_EPS).unwrap();
        let z = grid.contour_points();
        let lambda = grid.lambda();
        for k in 1..z.len() {
            prop_assert!((z[k] - z[z.len() - k].conj()).norm() <= 1e-14);
            prop_assert!((z[k].norm() - lambda).abs() <= 1e-14);
        }
        prop_assert!((lambda.powi(2 * (n as i32 + 1)) / DEFAULT_EPS - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fft_weights_are_linear(rule in rule(), a in -2.0f64..2.0, b in -2.0f64..2.0, n in 8usize..96) {
        let grid = TimeGrid::new(n, 2.0, DEFAULT_EPS).unwrap();
        let w1 = scalar_weights_fft(|s| Ok(1.0 / s), rule, &grid).unwrap();
        let w2 = scalar_weights_fft(|s| Ok((-0.5 * s).exp()), rule, &grid).unwrap();
        let w = scalar_weights_fft(|s| Ok(a / s + b * (-0.5 * s).exp()), rule, &grid).unwrap();
        let scale = w1.max_abs() + w2.max_abs();
        for j in 0..w.len() {
            let lin = w1.weights()[j] * a + w2.weights()[j] * b;
            // rounding is amplified by lambda^{-j} <= eps^{-1/2} in the inverse transform
            prop_assert!((w.weights()[j] - lin).norm() <= 10.0 * 1.49e-8 * scale);
        }
    }

    #[test]
    fn impulse_response_is_the_weight_sequence(values in prop::collection::vec(-1.0f64..1.0, 1..40), shift in 0usize..5) {
        let w = WeightSequence::new(values.iter().map(|v| c(*v, 0.0)).collect(), shift);
        let mut g = vec![vec![c(0.0, 0.0)]; values.len()];
        g[0][0] = c(1.0, 0.0);
        let y = apply_convolution(&w, &g).unwrap();
        for (n, v) in y.iter().enumerate() {
            let expected = if n < shift { 0.0 } else { values[n] };
            prop_assert_eq!(v[0], c(expected, 0.0));
        }
    }

    #[test]
    fn modified_fft_weights_are_causal(rule in rule(), m in 1usize..20, frac in 0.0f64..0.99, n in 32usize..128) {
        let grid = TimeGrid::new(n, 3.0, DEFAULT_EPS).unwrap();
        let r = (m as f64 + frac) * grid.dt();
        let w = modified_weights_fft(|s| laplace_kernel(KernelFamily::D2, s, r), m, rule, &grid).unwrap();
        let scale = w.max_abs();
        for j in 0..m.min(w.len()) {
            prop_assert!(w.weights()[j].norm() <= 100.0 * 1.49e-8 * scale);
        }
    }

    #[test]
    fn least_squares_residual_is_orthogonal(
        rows in 3usize..12,
        seed in prop::collection::vec(-1.0f64..1.0, 288),
    ) {
        let cols = rows - 2;
        let a = DMatrix::from_fn(rows, cols, |i, j| c(seed[2 * (i * 12 + j)], seed[2 * (i * 12 + j) + 1]))
            + DMatrix::from_fn(rows, cols, |i, j| if i == j { c(3.0, 0.0) } else { c(0.0, 0.0) });
        let b = DVector::from_fn(rows, |i, _| c(seed[i], -seed[rows + i]));
        let x = least_squares(&a, &b, 1e-12).unwrap();
        let r = &b - &a * &x;
        let g = a.adjoint() * r;
        prop_assert!(g.norm() <= 1e-12 * (a.norm() * b.norm()));
    }

    #[test]
    fn mfs_points_lie_on_their_curves(k in 1usize..60, extra in 0usize..60, radius in 0.2f64..0.95) {
        let layout = mfs_points(MfsShape::Disk, k + extra, k, radius).unwrap();
        prop_assert!(layout.collocation.iter().all(|x| (x.norm() - 1.0).abs() < 1e-14));
        prop_assert!(layout.sources.iter().all(|y| (y.norm() - radius).abs() < 1e-14));
    }

    #[test]
    fn shift_index_brackets_the_ratio(r in 0.0f64..20.0, dt in 1e-3f64..3.0) {
        let m = shift_index(r, dt);
        prop_assert!(m as f64 * dt <= r * (1.0 + 1e-12));
        prop_assert!(r < (m as f64 + 1.0) * dt * (1.0 + 1e-11));
        prop_assert!(shift_index(r, dt * 0.5) >= m);
    }

    #[test]
    fn panel_lengths_add_up(m in 4usize..200, which in 0usize..3) {
        let shape = [Shape::Disk, Shape::TwoEllipses, Shape::Semicircles][which];
        let boundary = ParametricBoundary::shape(shape);
        let mesh = panel_mesh(&boundary, m).unwrap();
        prop_assert_eq!(mesh.len(), m);
        prop_assert!((mesh.total_length() - boundary.length()).abs() < 1e-10 * boundary.length());
    }

    #[test]
    fn plane_wave_data_is_bounded(t in 0.0f64..10.0, x in -3.0f64..3.0, y in -3.0f64..3.0, omega in 0.1f64..8.0) {
        let spec = IncidentSpec::plane_wave(omega, [0.6, -0.8]);
        let p = Point::new(x, y);
        let g = spec.dirichlet_data(t, &p);
        prop_assert!(g.abs() <= 1.0);
        prop_assert_eq!(g, -spec.incident(t, &p));
    }

    #[test]
    fn config_round_trips(
        which in 0usize..4,
        steps in 1usize..5000,
        final_time in 0.1f64..50.0,
        omega in 0.1f64..10.0,
        angle in 0.0f64..std::f64::consts::TAU,
        m in 2usize..400,
        workers in prop::option::of(1usize..16),
        scheme in prop_oneof![Just(Scheme::Standard), Just(Scheme::Modified)],
        rule in rule(),
        galerkin in any::<bool>(),
    ) {
        let geometry = [Geometry::Disk, Geometry::TwoEllipses, Geometry::Semicircles, Geometry::DiskInterior][which];
        let mut sc = Scenario::preset(geometry);
        sc.steps = steps;
        sc.final_time = final_time;
        sc.scheme = scheme;
        sc.rule = rule;
        sc.workers = workers;
        sc.output = Some(PathBuf::from(format!("runs/{steps}")));
        if let IncidentSpec::WindowedPlaneWave { .. } = sc.incident {
            sc.incident = IncidentSpec::plane_wave(omega, [angle.cos(), angle.sin()]);
        }
        sc.spatial = if galerkin {
            Spatial::Galerkin { m }
        } else {
            Spatial::Mfs { m: 2 * m, k: m, radius: final_time / 51.0 + 0.01 }
        };
        let text = sc.to_config();
        let back = Scenario::from_config(&text).unwrap();
        prop_assert_eq!(back, sc);
    }
}
