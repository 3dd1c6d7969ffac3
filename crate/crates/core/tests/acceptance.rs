//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num::complex::Complex;
use num::rational::Rational64;
use num::Zero;
use rand::Rng;
use rand_distr::StandardNormal;

use pinchflow_core::convergence::*;
use pinchflow_core::curvature::*;
use pinchflow_core::mcf::*;
use pinchflow_core::pinching::*;
use pinchflow_core::rng::seeded;

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit_s: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit_s, format!("took {:.2?}, limit {limit_s} s", elapsed))
}

// 1 ---------------------------------------------------------------------

fn appendix_constants() -> Check {
    let start = Instant::now();
    let a = appendix();
    let elapsed = start.elapsed();
    ensure((a.alpha0 - 1.238756).abs() <= 1e-5, format!("alpha0 = {}", a.alpha0))?;
    ensure((a.g0 - 0.141446).abs() <= 1e-5, format!("g0 = {}", a.g0))?;
    ensure((a.x_star - 0.8895436175241).abs() <= 1e-12, format!("x* = {}", a.x_star))?;
    let x = a.x_star;
    let quartic = x.powi(4) + 3.0 * x * x - 3.0;
    ensure(quartic.abs() <= 1e-12, format!("x*^4 + 3x*^2 - 3 = {quartic:e}"))?;
    within(elapsed, 1.0)?;
    Ok(format!("alpha0 = {:.7}, g0 = {:.7}, x* = {:.13}, {:.2?}", a.alpha0, a.g0, a.x_star, elapsed))
}

// 2 ---------------------------------------------------------------------

/// Table value of R(X_kl, X_st, X_kl, X_μν) or, with `y`, R(X_kl, Y_st, X_kl, Y_μν);
/// all indices 1-based.
fn table_value(k: usize, l: usize, s: usize, t: usize, mu: usize, nu: usize, y: bool) -> i64 {
    if mu == s && s != k && l == t && t == nu {
        1
    } else if mu == s && s == k && l != t && t == nu {
        1
    } else if y && mu == s && s == k && l == t && t == nu {
        4
    } else {
        0
    }
}

fn curvature_identities() -> Check {
    let start = Instant::now();
    let mut checked = 0usize;
    for (n, m) in [(1, 1), (1, 2), (2, 2), (2, 3)] {
        let space = SpaceKind::GrassmannI { n, m };
        let eng = CurvatureEngine::new(space).map_err(|e| e.to_string())?;
        let x = |a: usize, b: usize| TangentMatrix::<Rational64>::unit(n, m, a - 1, b - 1);
        let y = |a: usize, b: usize| x(a, b).times_i();
        let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|a| (1..=m).map(move |b| (a, b))).collect();
        for &(k, l) in &pairs {
            for &(s, t) in &pairs {
                for &(mu, nu) in &pairs {
                    let xx = eng.real([&x(k, l), &x(s, t), &x(k, l), &x(mu, nu)]).map_err(|e| e.to_string())?;
                    let yy = eng.real([&x(k, l), &y(s, t), &x(k, l), &y(mu, nu)]).map_err(|e| e.to_string())?;
                    let xy = eng.real([&x(k, l), &x(s, t), &x(k, l), &y(mu, nu)]).map_err(|e| e.to_string())?;
                    let want_xx = Rational64::from_integer(table_value(k, l, s, t, mu, nu, false));
                    let want_yy = Rational64::from_integer(table_value(k, l, s, t, mu, nu, true));
                    ensure(
                        xx == want_xx && yy == want_yy && xy.is_zero(),
                        format!("G({n},{m}) ({k}{l},{s}{t},{mu}{nu}): XX {xx} YY {yy} XY {xy}"),
                    )?;
                    checked += 3;
                }
            }
        }
        for i in 1..=n * m {
            for j in 1..=n * m {
                let gap = curvature_gap(&space, i, j).map_err(|e| e.to_string())?;
                let want = Rational64::from_integer(if i == j { 4 } else { 0 });
                ensure(gap == want, format!("G({n},{m}) gap({i},{j}) = {gap}"))?;
                checked += 1;
            }
        }
    }
    let quadric = SpaceKind::QuadricIV { n: 4 };
    for i in 1..=4 {
        for j in 1..=4 {
            let c = curvature_component(
                &quadric,
                &[Slot::holo(1, i), Slot::anti(1, j), Slot::holo(1, i), Slot::anti(1, j)],
            )
            .map_err(|e| e.to_string())?;
            let want = Rational64::from_integer(if i == j { -2 } else { 2 });
            ensure(c == want, format!("quadric R({i},{j},{i},{j}) = {c}"))?;
            checked += 1;
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, 10.0)?;
    Ok(format!("{checked} exact values, {:.2?}", elapsed))
}

// 3 ---------------------------------------------------------------------

fn holomorphic_range() -> Check {
    let (n, m) = (2, 3);
    let space = SpaceKind::GrassmannI { n, m };
    let eng = CurvatureEngine::new(space).map_err(|e| e.to_string())?;
    let mut rng = seeded(3);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..10_000 {
        let entries: Vec<Complex<f64>> =
            (0..n * m).map(|_| Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        let t = TangentMatrix::new(n, m, entries).map_err(|e| e.to_string())?;
        let norm = t.norm_sqr().sqrt();
        let t = t.scale(&Complex::new(1.0 / norm, 0.0));
        let h = eng.holomorphic_sectional(&t).map_err(|e| e.to_string())?;
        lo = lo.min(h);
        hi = hi.max(h);
    }
    let bound_lo = 4.0 / n.min(m) as f64;
    ensure(lo >= bound_lo - 1e-9, format!("min H = {lo}"))?;
    ensure(hi <= 4.0 + 1e-9, format!("max H = {hi}"))?;
    let rank_one = TangentMatrix::<f64>::unit(n, m, 0, 0);
    let h1 = eng.holomorphic_sectional(&rank_one).map_err(|e| e.to_string())?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let iso = TangentMatrix::<f64>::unit(n, m, 0, 0).add(&TangentMatrix::unit(n, m, 1, 1)).scale(&Complex::new(r, 0.0));
    let h2 = eng.holomorphic_sectional(&iso).map_err(|e| e.to_string())?;
    ensure((h1 - 4.0).abs() < 1e-6, format!("rank-one H = {h1}"))?;
    ensure((h2 - bound_lo).abs() < 1e-6, format!("isotropic H = {h2}"))?;
    Ok(format!("sampled H in [{lo:.6}, {hi:.6}], extremes {h2} and {h1}"))
}

// 4 ---------------------------------------------------------------------

fn q_form_oracle() -> Check {
    let mut rng = seeded(4);
    let mut worst: f64 = 0.0;
    for n_pairs in [1usize, 2] {
        for mode in [SymmetryMode::Unconstrained, SymmetryMode::FullSymmetric] {
            for _ in 0..250 {
                let lam = PinchSpectrum::random_symplectic(n_pairs, 3.0, &mut rng);
                let h = HTensor::random(2 * n_pairs, mode, &mut rng);
                let q = q_form(&lam, &h).map_err(|e| e.to_string())?;
                let qm = q_matrix(&lam, mode).map_err(|e| e.to_string())?;
                worst = worst.max((q - qm.eval(&h.coordinates(mode))).abs());
            }
        }
    }
    ensure(worst <= 1e-12, format!("max |q_form - h'Mh| = {worst:e}"))?;

    // λ = (1,1), symmetric h with a = h000, b = h001, c = h011, e = h111:
    // Q = a² + 5b² + 5c² + e² − 2ac − 2be, i.e. two copies of the block
    // [[1, −1/√3], [−1/√3, 5/3]] in orthonormal coordinates.
    let (p, s, r) = (1.0, 5.0 / 3.0, -1.0 / 3f64.sqrt());
    let (tr, det) = (p + s, p * s - r * r);
    let oracle = (tr - (tr * tr - 4.0 * det).sqrt()) / 2.0;
    let delta = delta_lambda(&PinchSpectrum::ones(1), SymmetryMode::FullSymmetric).map_err(|e| e.to_string())?;
    ensure(
        (delta - oracle).abs() <= 1e-10 && (oracle - 2.0 / 3.0).abs() <= 1e-10,
        format!("delta = {delta}, oracle {oracle}"),
    )?;
    let bound = (3.0 - 5f64.sqrt()) / 6.0;
    ensure(delta >= bound, format!("delta = {delta} below {bound}"))?;
    Ok(format!("1000 samples, max deviation {worst:.1e}; delta(1,1) = {delta:.15}"))
}

// 5 ---------------------------------------------------------------------

fn pinching_pipeline() -> Check {
    let opts = SearchOptions::default();
    let grid = [1.0, 1.5, 2.0, 3.0, 4.0];
    let mut notes = Vec::new();
    let mut n2_time = Duration::ZERO;
    for n_pairs in [1usize, 2] {
        let start = Instant::now();
        let vals: Vec<f64> = grid
            .iter()
            .map(|&l| delta_big_lambda(l, n_pairs, &opts).map(|d| d.value))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        if n_pairs == 2 {
            n2_time = start.elapsed();
        }
        for w in vals.windows(2) {
            ensure(w[1] <= w[0] + 1e-12, format!("N = {n_pairs}: delta not nonincreasing {vals:?}"))?;
        }
        notes.push(format!("N={n_pairs}: {:?}", vals.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>()));
    }
    for l in [1.5, 2.0, 4.0, 7.0, 10.0] {
        let d = delta_big_lambda(l, 1, &opts).map_err(|e| e.to_string())?.value;
        ensure(d > 0.0, format!("N = 1, Lambda = {l}: delta = {d}"))?;
    }
    for l in [1.0, 1.1, 1.5, 2.0, 3.0, 10.0] {
        let lp = lambda_prime(l, 1).map_err(|e| e.to_string())?;
        ensure((lp - l).abs() <= 1e-12, format!("Lambda'_1({l}) = {lp}"))?;
        for mn in [1u32, 2, 4] {
            let rt = pinch_of_eps(mn, eps_of_pinch(mn, l).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
            let want = lambda_prime(l, mn).map_err(|e| e.to_string())?;
            ensure(
                (rt - want).abs() <= 1e-12 * want.max(1.0),
                format!("round trip mn={mn}, Lambda={l}: {rt} vs {want}"),
            )?;
        }
    }
    for l0 in [1.2, 2.0, 5.0] {
        for n in [1u32, 2, 3] {
            let Extended::Finite(l1) = lambda1(n, Extended::Finite(l0)).map_err(|e| e.to_string())? else {
                return Err("Lambda1 of a finite value is infinite".into());
            };
            let back = lambda_prime(l1, n).map_err(|e| e.to_string())?;
            ensure((back - l0).abs() <= 1e-10, format!("Lambda'_{n}(Lambda1({n}, {l0})) = {back}"))?;
        }
    }
    within(n2_time, 300.0)?;
    Ok(format!("{}; N=2 scan {:.2?}", notes.join(", "), n2_time))
}

// 6 ---------------------------------------------------------------------

fn flow_term_identity() -> Check {
    let mut rng = seeded(6);
    let mut worst: f64 = 0.0;
    for (n, m) in [(1, 1), (1, 2), (2, 2)] {
        let space = SpaceKind::GrassmannI { n, m };
        for _ in 0..100 {
            let lam = PinchSpectrum::random_symplectic(n * m, 4.0, &mut rng);
            let engine = flow_curvature_term(&lam, &CurvatureSource::Engine { space }).map_err(|e| e.to_string())?;
            let closed: f64 = lam
                .lambdas()
                .chunks(2)
                .map(|p| {
                    let q = (p[1] * p[1] - 1.0) / (1.0 + p[1] * p[1]);
                    4.0 * q * q
                })
                .sum();
            worst = worst.max((engine - closed).abs());
        }
    }
    ensure(worst <= 1e-10, format!("max deviation {worst:e}"))?;
    Ok(format!("300 spectra, max deviation {worst:.1e}"))
}

// 7 ---------------------------------------------------------------------

fn s_tensor_equivalence() -> Check {
    let mut rng = seeded(7);
    let mut mismatches = 0;
    let mut positives = 0;
    for k in 0..100 {
        let n_pairs = 1 + k % 3;
        let lam = PinchSpectrum::random_symplectic(n_pairs, 3.0, &mut rng);
        let big = rng.random_range(1.01..3.0);
        let r = pinch_tensor_positivity(&lam, big, 0.5).map_err(|e| e.to_string())?;
        let max = lam.lambdas().iter().cloned().fold(0.0, f64::max);
        if r.a_positive != (max < big) {
            mismatches += 1;
        }
        positives += r.a_positive as usize;
    }
    ensure(mismatches == 0, format!("{mismatches} mismatches"))?;
    ensure(positives > 0 && positives < 100, format!("degenerate sample: {positives} positive"))?;
    Ok(format!("100 spectra ({positives} inside the pinch), 0 mismatches"))
}

// 8 ---------------------------------------------------------------------

fn simulator_properties() -> Check {
    for kind in [MapKind::Identity, MapKind::Linear { a: [[1, 1], [0, 1]] }, MapKind::Linear { a: [[2, 1], [1, 1]] }] {
        let map = make_map(&kind, 32).map_err(|e| e.to_string())?;
        let mut state = map.clone();
        for _ in 0..20 {
            state = flow_step(&state, 0.2 / 1024.0, Stencil::Second).map_err(|e| e.to_string())?;
        }
        ensure(state == map, format!("{kind:?} moved under the flow"))?;
    }

    let start = Instant::now();
    let map = make_map(&MapKind::ComposedShears { eps: 0.1, harmonics: 1 }, 64).map_err(|e| e.to_string())?;
    let delta = delta_big_lambda(1.2, 1, &SearchOptions::default()).map_err(|e| e.to_string())?.value;
    let config = FlowConfig { t_end: 2.0, record_every: 50, ..Default::default() };
    let (run, kl, cmp) = riccati_check(&map, &config, delta, maximize_g().alpha0, 10_000).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let first = run.records[0];
    let last = *run.records.last().expect("records");
    let drift = run.records.windows(2).map(|w| w[1].min_star_omega - w[0].min_star_omega).fold(0.0, f64::min);
    let lambda_excess = run.records.iter().map(|r| r.max_lambda - first.max_lambda).fold(f64::NEG_INFINITY, f64::max);
    let det = run.records.iter().map(|r| r.det_drift).fold(0.0, f64::max);
    ensure(drift >= -1e-6, format!("min star omega drift {drift:e}"))?;
    ensure(lambda_excess <= 1e-4, format!("max lambda rose by {lambda_excess:e}"))?;
    ensure(det <= 1e-3, format!("det drift {det:e}"))?;
    ensure(
        last.t == 2.0 && last.max_ii2 <= first.max_ii2 / 10.0,
        format!("|II|^2 {} -> {}", first.max_ii2, last.max_ii2),
    )?;
    ensure(
        cmp.k1 < 0.0 && cmp.holds,
        format!("Riccati envelope: K1 = {}, worst margin {:e}", cmp.k1, cmp.worst_margin),
    )?;
    within(elapsed, 120.0)?;
    Ok(format!(
        "{} records, drift {drift:.1e}, max lambda {:.6} -> {:.6}, det drift {det:.1e}, |II|^2 {:.3e} -> {:.3e}, K1 = {:.3}, l = {:.2}, {:.2?}",
        run.records.len(),
        first.max_lambda,
        last.max_lambda,
        first.max_ii2,
        last.max_ii2,
        cmp.k1,
        kl.l,
        elapsed
    ))
}

// 9 ---------------------------------------------------------------------

fn sig3(x: f64) -> String {
    format!("{x:.2e}")
}

fn convergence_constants() -> Check {
    let delta = delta_big_lambda(1.2, 1, &SearchOptions::default()).map_err(|e| e.to_string())?.value;
    let alpha = maximize_g().alpha0;
    let kl = match select_kl(1.05, delta, 1, alpha).map_err(|e| e.to_string())? {
        KLSelection::Feasible(kl) => kl,
        KLSelection::Infeasible { reason, .. } => return Err(format!("infeasible: {reason}")),
    };
    ensure(kl.margins.all_positive(), format!("margins {:?}", kl.margins))?;
    let w = verify_pinch_window(&kl, 10_000);
    ensure(w.window_ok && w.k1 < 0.0, format!("window report {w:?}"))?;
    let lh = lambda_hat(delta, 1).map_err(|e| e.to_string())?;
    ensure(lh.exact > 1.0, format!("lambda_hat = {}", lh.exact))?;
    ensure(sig3(lh.exact) == sig3(lh.truncated), format!("lambda_hat {} vs truncated {}", lh.exact, lh.truncated))?;
    Ok(format!(
        "delta = {delta:.6}, l = {:.3}, k = e^{:.3}, K1 = {:.4}, lambda_hat = {:.8} (truncated {:.8})",
        kl.l, kl.ln_k, w.k1, lh.exact, lh.truncated
    ))
}

// 10 --------------------------------------------------------------------

fn rk4(p: &RiccatiParams, t_end: f64, dt: f64) -> f64 {
    let mut y = p.y0();
    let steps = (t_end / dt).round() as usize;
    for _ in 0..steps {
        let k1 = p.rhs(y);
        let k2 = p.rhs(y + 0.5 * dt * k1);
        let k3 = p.rhs(y + 0.5 * dt * k2);
        let k4 = p.rhs(y + dt * k3);
        y += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    y
}

fn upper_root(k1: f64, k3: f64, k4: f64) -> f64 {
    (-k1 - (k1 * k1 - 4.0 * k3 * k4).sqrt()) / (2.0 * k3)
}

fn riccati_oracle() -> Check {
    let mut rng = seeded(10);
    let mut cases: Vec<(&str, RiccatiParams)> = Vec::new();
    for branch in ["above", "at", "below"] {
        let mut made = 0;
        while made < 10 {
            let k1 = rng.random_range(-2.0..2.0);
            let k3 = rng.random_range(-2.0..-0.1);
            let k4 = rng.random_range(0.1..2.0);
            let r = upper_root(k1, k3, k4);
            let y0 = match branch {
                "above" => r + rng.random_range(0.1..2.0),
                "at" => r,
                _ => rng.random_range(0.0..r),
            };
            cases.push((branch, RiccatiParams::General { k1, k3, k4, y0 }));
            made += 1;
        }
    }
    for _ in 0..10 {
        cases.push((
            "simple",
            RiccatiParams::Simple { k1: rng.random_range(-2.0..-0.1), y0: rng.random_range(0.0..2.0) },
        ));
    }

    // five-point derivative; rounding stays near 1e-11 at this step
    let h = 1e-4;
    let (mut worst_ode, mut worst_lim): (f64, f64) = (0.0, 0.0);
    for (branch, p) in &cases {
        for s in 0..20 {
            let t = 0.01 + 0.25 * s as f64;
            let y = |t| riccati_solution(p, t).map_err(|e| e.to_string());
            let fd = (y(t - 2.0 * h)? - 8.0 * y(t - h)? + 8.0 * y(t + h)? - y(t + 2.0 * h)?) / (12.0 * h);
            let err = (fd - p.rhs(y(t)?)).abs();
            worst_ode = worst_ode.max(err);
            ensure(err <= 1e-8, format!("{branch} {p:?} at t = {t}: residual {err:e}"))?;
        }
        if *branch != "simple" {
            let lim = riccati_limit(p).map_err(|e| e.to_string())?;
            let num = rk4(p, 1000.0, 0.01);
            worst_lim = worst_lim.max((lim - num).abs());
            ensure((lim - num).abs() <= 1e-6, format!("{branch} {p:?}: limit {lim} vs RK4 {num}"))?;
        }
    }
    Ok(format!("{} parameter sets, max ODE residual {worst_ode:.1e}, max limit error {worst_lim:.1e}", cases.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("appendix constants", appendix_constants),
        ("curvature identities", curvature_identities),
        ("holomorphic sectional range", holomorphic_range),
        ("Q-form oracle", q_form_oracle),
        ("pinching constants", pinching_pipeline),
        ("flow curvature term", flow_term_identity),
        ("S-tensor positivity", s_tensor_equivalence),
        ("simulator properties", simulator_properties),
        ("convergence constants", convergence_constants),
        ("Riccati oracle", riccati_oracle),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} {name}: FAIL ({why})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
