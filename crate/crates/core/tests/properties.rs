use std::f64::consts::FRAC_PI_2;

use approx::relative_eq;
use nalgebra::DMatrix;
use num::complex::Complex;
use proptest::prelude::*;
use rand::Rng;
use rand_distr::StandardNormal;

use pinchflow_core::convergence::*;
use pinchflow_core::curvature::*;
use pinchflow_core::mcf::*;
use pinchflow_core::pinching::*;
use pinchflow_core::report::*;
use pinchflow_core::rng::seeded;

type CMat = DMatrix<Complex<f64>>;

fn random_tangent_matrix(n: usize, m: usize, seed: u64) -> TangentMatrix<f64> {
    let mut rng = seeded(seed);
    let e = (0..n * m).map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    TangentMatrix::new(n, m, e).unwrap()
}

fn cmat(t: &TangentMatrix<f64>) -> CMat {
    CMat::from_row_slice(t.rows(), t.cols(), t.entries())
}

/// R(X,Y,X,Y) from the curvature operator of G(n, n+m) written on matrices:
/// R(X,Y)Z = XY*Z + ZY*X − YX*Z − ZX*Y.
fn wolf_sectional(x: &CMat, y: &CMat) -> f64 {
    let adj = |a: &CMat| a.adjoint();
    let ryy = x * adj(y) * y + y * adj(y) * x - y * adj(x) * y - y * adj(x) * y;
    (ryy * adj(x)).trace().re
}

fn unimodular() -> impl Strategy<Value = [[i64; 2]; 2]> {
    prop_oneof![
        (-3i64..=3).prop_map(|k| [[1, k], [0, 1]]),
        (-3i64..=3).prop_map(|k| [[1, 0], [k, 1]]),
        (-2i64..=2, -2i64..=2).prop_map(|(a, b)| {
            // [[1, a], [0, 1]] · [[1, 0], [b, 1]]
            [[1 + a * b, a], [b, 1]]
        }),
        Just([[0, -1], [1, 0]]),
        Just([[2, 1], [1, 1]]),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn g_positive_with_single_peak(u in 0.001f64..0.999) {
        let x = critical_x();
        let a = x + u * (FRAC_PI_2 - x);
        let peak = maximize_g();
        prop_assert!(g_alpha(a).unwrap() > 0.0);
        prop_assert!(g_alpha(a).unwrap() <= peak.g0 + 1e-15);
        let d1 = g_alpha_d1(a).unwrap();
        if a < peak.alpha0 - 1e-9 {
            prop_assert!(d1 > 0.0);
        } else if a > peak.alpha0 + 1e-9 {
            prop_assert!(d1 < 0.0);
        }
    }

    #[test]
    fn djokovic_bounds_hold(alpha in 0.05f64..1.55, frac in 0.01f64..0.99) {
        let r = djokovic_check(frac * alpha, alpha).unwrap();
        prop_assert!(r.lower_ok, "{r:?}");
        prop_assert!(r.upper_ok, "{r:?}");
    }

    #[test]
    fn feasible_kl_has_positive_margins(delta in 0.05f64..1.0, frac in 0.05f64..0.95, n in 1u32..3) {
        let alpha = maximize_g().alpha0;
        let hat = lambda_hat(delta, n).unwrap().exact;
        let big = 1.0 + frac * (hat - 1.0);
        match select_kl(big, delta, n, alpha).unwrap() {
            KLSelection::Feasible(kl) => {
                prop_assert!(kl.margins.all_positive(), "{:?}", kl.margins);
                let w = verify_pinch_window(&kl, 2000);
                prop_assert!(w.window_ok && w.k1 < 0.0, "{w:?}");
            }
            KLSelection::Infeasible { reason, .. } => prop_assert!(false, "infeasible below lambda_hat: {reason}"),
        }
    }

    #[test]
    fn lambda_hat_increases_with_delta(d1 in 0.01f64..2.0, d2 in 0.01f64..2.0, n in 1u32..4) {
        let (lo, hi) = if d1 < d2 { (d1, d2) } else { (d2, d1) };
        prop_assume!(hi - lo > 1e-6);
        let a = lambda_hat(lo, n).unwrap().exact;
        let b = lambda_hat(hi, n).unwrap().exact;
        prop_assert!(a > 1.0 && a < b);
    }

    #[test]
    fn simple_riccati_decays(k1 in -5.0f64..-0.01, y0 in 0.01f64..=1.0, s in 0.0f64..1.0) {
        // y(T) = y0/1001 at this horizon, so the 1e-3 bound needs y0 <= 1
        let p = RiccatiParams::Simple { k1, y0 };
        let horizon = 1e3 / (k1.abs() * y0);
        let t = s * horizon;
        let y = riccati_solution(&p, t).unwrap();
        let later = riccati_solution(&p, t + 1.0).unwrap();
        prop_assert!(later < y && y <= y0);
        prop_assert!(riccati_solution(&p, horizon).unwrap() < 1e-3);
    }

    #[test]
    fn shears_are_area_preserving(eps in 0.0f64..0.3, harmonics in 1usize..4, l in prop_oneof![Just(32usize), Just(64)]) {
        let kind = MapKind::ComposedShears { eps, harmonics };
        prop_assert!(analytic_det_error(&kind, l).unwrap() <= 1e-10);
    }

    #[test]
    fn star_omega_two_routes(eps in 0.0f64..0.3, harmonics in 1usize..3, i in 0usize..32, j in 0usize..32) {
        let map = make_map(&MapKind::ComposedShears { eps, harmonics }, 32).unwrap();
        for stencil in [Stencil::Second, Stencil::Fourth] {
            let p = map.point_geometry(i, j, stencil);
            let via_sv = 1.0 / ((1.0 + p.lambda_max.powi(2)) * (1.0 + p.lambda_min.powi(2))).sqrt();
            prop_assert!((p.star_omega - via_sv).abs() <= 1e-12, "{} vs {via_sv}", p.star_omega);
        }
    }

    #[test]
    fn linear_maps_are_fixed_and_balanced(a in unimodular(), l in prop_oneof![Just(32usize), Just(64)]) {
        let map = make_map(&MapKind::Linear { a }, l).unwrap();
        let rec = monitors(&map, Stencil::Second);
        prop_assert!(rec.max_star_omega <= 0.5 + 1e-12);
        prop_assert!(rec.max_ii2 == 0.0);
        let dt = 0.2 / (l * l) as f64;
        prop_assert!(flow_step(&map, dt, Stencil::Second).unwrap() == map);
        prop_assert!(flow_step(&map, 0.75 * dt, Stencil::Fourth).unwrap() == map);
    }

    #[test]
    fn engine_matches_wolf_operator(n in 1usize..4, m in 1usize..4, seed in any::<u64>()) {
        let eng = CurvatureEngine::new(SpaceKind::GrassmannI { n, m }).unwrap();
        let x = random_tangent_matrix(n, m, seed);
        let y = random_tangent_matrix(n, m, seed ^ 0x9e37_79b9);
        let r = eng.real([&x, &y, &x, &y]).unwrap();
        let w = wolf_sectional(&cmat(&x), &cmat(&y));
        prop_assert!(relative_eq!(r, w, epsilon = 1e-10, max_relative = 1e-10), "{r} vs {w}");
    }

    #[test]
    fn holomorphic_curvature_in_range(n in 1usize..4, m in 1usize..4, seed in any::<u64>()) {
        let space = SpaceKind::GrassmannI { n, m };
        let mut rng = seeded(seed);
        let t = random_tangent(&space, &mut rng);
        let norm = t.norm_sqr().sqrt();
        let t = t.scale(&Complex::new(1.0 / norm, 0.0));
        let h = holomorphic_sectional(&space, &t).unwrap();
        let lo = 4.0 / n.min(m) as f64;
        prop_assert!(h >= lo - 1e-9 && h <= 4.0 + 1e-9, "H = {h}");
    }

    #[test]
    fn record_round_trips(eps in 0.0f64..1.0, t_end in 0.001f64..10.0, x in -1e300f64..1e300, wall in 0.0f64..100.0) {
        let config = RunConfig {
            command: Command::Simulate {
                map: MapKind::ComposedShears { eps, harmonics: 2 },
                initial_grid: None,
                grid_size: 32,
                flow: FlowConfig { t_end, ..Default::default() },
                riccati_lambda1: Some(1.0 + eps),
            },
            out: None,
            format: Format::Json,
        };
        let payload = serde_json::json!({ "value": x, "series": [x, eps, t_end] });
        let rec = RunRecord::new(config, &payload, wall, vec!["w".into()]).unwrap();
        let back = RunRecord::from_json(&rec.to_json()).unwrap();
        prop_assert_eq!(back, rec);
    }

    #[test]
    fn csv_is_deterministic(xs in proptest::collection::vec(-1e10f64..1e10, 1..20)) {
        let config = RunConfig { command: Command::Appendix, out: None, format: Format::Csv };
        let rows: Vec<Vec<String>> = xs.iter().map(|&x| vec![fmt_num(x), fmt_num(x * x)]).collect();
        let a = write_csv(&config, &["x", "x2"], &rows);
        prop_assert_eq!(&a, &write_csv(&config, &["x", "x2"], &rows));
        for (line, x) in a.lines().skip(3).zip(&xs) {
            let first: f64 = line.split(',').next().unwrap().parse().unwrap();
            prop_assert_eq!(first.to_bits(), x.to_bits());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn delta_is_a_lower_bound_on_the_box(big in 1.05f64..3.0, n_pairs in 1usize..3, seed in any::<u64>()) {
        let est = delta_big_lambda(big, n_pairs, &SearchOptions::default()).unwrap();
        let mut rng = seeded(seed);
        for _ in 0..20 {
            let spec = PinchSpectrum::random_symplectic(n_pairs, big, &mut rng);
            let d = delta_lambda(&spec, SymmetryMode::FullSymmetric).unwrap();
            prop_assert!(d >= est.value - 1e-9, "sample {d} below estimate {}", est.value);
        }
    }

    #[test]
    fn delta_nonincreasing_in_pinch(a in 1.05f64..4.0, b in 1.05f64..4.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let r = constants_report(2, &SearchOptions::default(), &[lo, hi], 1, 4.0, 1e-2).unwrap();
        prop_assert!(r.rows[1].delta <= r.rows[0].delta);
        prop_assert!(r.rows[1].raw <= r.rows[0].raw + 1e-9, "{:?}", r.rows);
    }
}
