//! Constants of the convergence argument: the g(α) optimization, the
//! Djokovic tangent bounds, the (k, l) feasibility system, K₁, Λ̂₁ and the
//! Riccati comparison solutions.

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Truncated value of max g used in the printed bound for Λ̂₁.
pub const G0_TRUNCATED: f64 = 0.141446;

/// x* = √((√21 − 3)/2), the positive root of x⁴ + 3x² − 3.
pub fn critical_x() -> f64 {
    ((21f64.sqrt() - 3.0) / 2.0).sqrt()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > critical_x() && alpha < FRAC_PI_2 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfWindow(alpha))
    }
}

/// g(α) = α ln(α/x*) / tan α.
pub fn g_alpha(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(alpha * (alpha / critical_x()).ln() / alpha.tan())
}

pub fn g_alpha_d1(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let (s, c) = alpha.sin_cos();
    let ln = (alpha / critical_x()).ln();
    Ok((s * c * ln + s * c - alpha * ln) / (s * s))
}

pub fn g_alpha_d2(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let (s, c) = alpha.sin_cos();
    let ln = (alpha / critical_x()).ln();
    Ok((s * s * c / alpha + 2.0 * alpha * c * ln - 2.0 * s - 2.0 * s * ln) / (s * s * s))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GMax {
    pub alpha0: f64,
    pub g0: f64,
    pub g_d1: f64,
    pub g_d2: f64,
}

/// The unique interior maximum of g: bisection of g′ to a 1e-10 bracket,
/// then at most five Newton steps.
pub fn maximize_g() -> GMax {
    let x = critical_x();
    let (mut lo, mut hi) = (x + 1e-9, FRAC_PI_2 - 1e-9);
    let d1 = |a: f64| g_alpha_d1(a).expect("inside window");
    debug_assert!(d1(lo) > 0.0 && d1(hi) < 0.0);
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if d1(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut a = 0.5 * (lo + hi);
    for _ in 0..5 {
        let f = d1(a);
        if f.abs() < 1e-14 {
            break;
        }
        let step = f / g_alpha_d2(a).expect("inside window");
        let next = a - step;
        if !(next > lo - 1e-9 && next < hi + 1e-9) {
            break;
        }
        a = next;
    }
    let g_d2 = g_alpha_d2(a).expect("inside window");
    assert!(g_d2 < 0.0, "critical point of g is not a maximum");
    GMax { alpha0: a, g0: g_alpha(a).expect("inside window"), g_d1: d1(a), g_d2 }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Appendix {
    pub alpha0: f64,
    pub g0: f64,
    pub x_star: f64,
}

pub fn appendix() -> Appendix {
    let m = maximize_g();
    Appendix { alpha0: m.alpha0, g0: m.g0, x_star: critical_x() }
}

/// f(α) = (tan α − α)/α³.
pub fn f_alpha(alpha: f64) -> f64 {
    (alpha.tan() - alpha) / alpha.powi(3)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DjokovicReport {
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// tan x − x − x³/3
    pub lower_margin: f64,
    /// x + f(α)x³ − tan x
    pub upper_margin: f64,
    pub f_alpha: f64,
}

/// tan x > x + x³/3 and tan x < x + f(α)x³ for 0 < x < α < π/2.
pub fn djokovic_check(x: f64, alpha: f64) -> Result<DjokovicReport> {
    if !(0.0 < x && x < alpha && alpha < FRAC_PI_2) {
        return Err(Error::DomainError(format!("need 0 < x < alpha < pi/2, got x = {x}, alpha = {alpha}")));
    }
    let f = f_alpha(alpha);
    let t = x.tan();
    let lower_margin = t - x - x.powi(3) / 3.0;
    let upper_margin = x + f * x.powi(3) - t;
    Ok(DjokovicReport {
        lower_ok: lower_margin > 0.0,
        upper_ok: upper_margin > 0.0,
        lower_margin,
        upper_margin,
        f_alpha: f,
    })
}

/// A (k, l) pair. k can be astronomically large, so it is carried as
/// κ = k·2^{−nl} together with ln k.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KLParams {
    pub kappa: f64,
    pub ln_k: f64,
    pub l: f64,
    pub big_lambda: f64,
    pub delta: f64,
    pub n: u32,
    pub alpha: f64,
    /// Margins of the feasibility conditions on (k, l).
    pub margins: KLMargins,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KLMargins {
    /// ln(π/2) + nl ln 2 − ln x* − nl ln τ
    pub half_pi_vs_tau: f64,
    /// lδ/10 − tan(κ)/κ
    pub tangent_ratio: f64,
    /// π/2 − κ
    pub below_half_pi: f64,
    /// κ − k τ^{−nl}
    pub two_vs_tau: f64,
    /// k τ^{−nl} − x*
    pub above_x_star: f64,
}

impl KLMargins {
    pub fn all_positive(&self) -> bool {
        self.half_pi_vs_tau > 0.0
            && self.tangent_ratio > 0.0
            && self.below_half_pi > 0.0
            && self.two_vs_tau > 0.0
            && self.above_x_star > 0.0
    }

    /// The conditions with the non-strict last inequality allowed to touch.
    pub fn holds(&self, tol: f64) -> bool {
        self.half_pi_vs_tau > -tol
            && self.tangent_ratio >= -tol
            && self.below_half_pi > 0.0
            && self.two_vs_tau > -tol
            && self.above_x_star >= -tol
    }
}

impl KLParams {
    /// Builds a pair from explicit k and l without checking feasibility.
    pub fn manual(k: f64, l: f64, big_lambda: f64, delta: f64, n: u32, alpha: f64) -> Self {
        let nl = n as f64 * l;
        let kappa = (k.ln() - nl * std::f64::consts::LN_2).exp();
        Self::from_kappa(kappa, l, big_lambda, delta, n, alpha)
    }

    fn from_kappa(kappa: f64, l: f64, big_lambda: f64, delta: f64, n: u32, alpha: f64) -> Self {
        let nl = n as f64 * l;
        let tau = big_lambda + 1.0 / big_lambda;
        let ln_half_tau = (tau / 2.0).ln();
        let k_over_tau = kappa * (-nl * ln_half_tau).exp();
        let x = critical_x();
        let margins = KLMargins {
            half_pi_vs_tau: (FRAC_PI_2 / x).ln() - nl * ln_half_tau,
            tangent_ratio: l * delta / 10.0 - kappa.tan() / kappa,
            below_half_pi: FRAC_PI_2 - kappa,
            two_vs_tau: kappa - k_over_tau,
            above_x_star: k_over_tau - x,
        };
        Self { kappa, ln_k: kappa.ln() + nl * std::f64::consts::LN_2, l, big_lambda, delta, n, alpha, margins }
    }

    pub fn k(&self) -> f64 {
        self.ln_k.exp()
    }

    pub fn tau(&self) -> f64 {
        self.big_lambda + 1.0 / self.big_lambda
    }

    /// k·(★Ω)^l evaluated without forming k.
    pub fn phase(&self, star_omega: f64) -> f64 {
        let n = self.n as f64;
        self.kappa * (self.l * (star_omega.ln() + n * std::f64::consts::LN_2)).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum KLSelection {
    Feasible(KLParams),
    Infeasible { reason: String, l_min: f64, l_max: f64 },
}

/// Midpoints of the feasible l and k intervals.
pub fn select_kl(big_lambda: f64, delta: f64, n: u32, alpha: f64) -> Result<KLSelection> {
    check_alpha(alpha)?;
    if !(big_lambda > 1.0) {
        return Err(Error::InvalidPinch(format!("Lambda = {big_lambda} must exceed 1")));
    }
    if n == 0 {
        return Err(Error::DomainError("n must be at least 1".into()));
    }
    let x = critical_x();
    let tau = big_lambda + 1.0 / big_lambda;
    let ln_half_tau = (tau / 2.0).ln();
    let nf = n as f64;
    let l_max = (alpha / x).ln() / (nf * ln_half_tau);
    if !(delta > 0.0) {
        return Ok(KLSelection::Infeasible {
            reason: format!("delta = {delta} is not positive"),
            l_min: f64::INFINITY,
            l_max,
        });
    }
    let l_min = 10.0 / delta * (1.0 + f_alpha(alpha) * alpha * alpha);
    if l_min > l_max * (1.0 + 1e-12) {
        return Ok(KLSelection::Infeasible {
            reason: format!("ln(tau/2) = {ln_half_tau} exceeds delta*g(alpha)/(10n)"),
            l_min,
            l_max,
        });
    }
    let l = if l_min >= l_max { l_min.min(l_max) } else { 0.5 * (l_min + l_max) };
    // κ ∈ [x*(τ/2)^{nl}, α]
    let kappa_lo = x * (nf * l * ln_half_tau).exp();
    let kappa = 0.5 * (kappa_lo.min(alpha) + alpha);
    Ok(KLSelection::Feasible(KLParams::from_kappa(kappa, l, big_lambda, delta, n, alpha)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaHat {
    pub exact: f64,
    pub truncated: f64,
}

fn lambda_hat_with(g0: f64, delta: f64, n: u32) -> f64 {
    let a = g0 * delta / (10.0 * n as f64);
    let e = a.exp();
    let e2 = (2.0 * a).exp();
    (2.0 * e2 + 2.0 * e * (e2 - 1.0).max(0.0).sqrt() - 1.0).sqrt()
}

/// Λ̂₁ with the computed g₀ and with the truncated constant.
pub fn lambda_hat(delta: f64, n: u32) -> Result<LambdaHat> {
    if !(delta >= 0.0) || n == 0 {
        return Err(Error::DomainError(format!("need delta >= 0 and n >= 1, got {delta}, {n}")));
    }
    Ok(LambdaHat {
        exact: lambda_hat_with(maximize_g().g0, delta, n),
        truncated: lambda_hat_with(G0_TRUNCATED, delta, n),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinchWindowReport {
    pub window_ok: bool,
    pub lower_violations: usize,
    pub upper_violations: usize,
    pub endpoint_ok: bool,
    /// max over the ★Ω grid of 10 sin(x) − lδ x cos(x), x = k(★Ω)^l.
    pub k1: f64,
    pub samples: usize,
}

/// Checks (l−1)/(l x) < tan x < lδx/10 on a uniform ★Ω grid of
/// [τ^{−n}, 2^{−n}] and computes K₁ on the same grid.
pub fn verify_pinch_window(kl: &KLParams, samples: usize) -> PinchWindowReport {
    let samples = samples.max(2);
    let n = kl.n as i32;
    let lo = kl.tau().powi(-n);
    let hi = 0.5f64.powi(n);
    let (mut lower_v, mut upper_v) = (0, 0);
    let mut k1 = f64::NEG_INFINITY;
    for s in 0..samples {
        let w = lo + (hi - lo) * s as f64 / (samples - 1) as f64;
        let x = kl.phase(w);
        let t = x.tan();
        let ok_range = x > 0.0 && x < FRAC_PI_2;
        if !(ok_range && (kl.l - 1.0) / (kl.l * x) < t) {
            lower_v += 1;
        }
        if !(ok_range && t < kl.l * kl.delta * x / 10.0) {
            upper_v += 1;
        }
        k1 = k1.max(10.0 * x.sin() - kl.l * kl.delta * x * x.cos());
    }
    let end = kl.phase(hi);
    let endpoint_ok = end < FRAC_PI_2 && end >= critical_x() - 1e-12;
    PinchWindowReport {
        window_ok: lower_v == 0 && upper_v == 0 && endpoint_ok && k1 < 0.0,
        lower_violations: lower_v,
        upper_violations: upper_v,
        endpoint_ok,
        k1,
        samples,
    }
}

/// y′ = K₁y² (simple) or y′ = K₃y² + K₁y + K₄ (general), y(0) = y0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RiccatiParams {
    Simple { k1: f64, y0: f64 },
    General { k1: f64, k3: f64, k4: f64, y0: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiccatiBranch {
    Simple,
    AboveEquilibrium,
    AtEquilibrium,
    BelowEquilibrium,
    DoubleRoot,
    LowerRestPoint,
}

struct Roots {
    sqrt_d: f64,
    upper: f64,
    lower: f64,
}

fn roots(k1: f64, k3: f64, k4: f64) -> Result<Roots> {
    if !(k3 < 0.0) {
        return Err(Error::DomainError(format!("K3 = {k3} must be negative")));
    }
    let d = k1 * k1 - 4.0 * k3 * k4;
    if d < 0.0 {
        return Err(Error::NegativeDiscriminant(d));
    }
    let sqrt_d = d.sqrt();
    Ok(Roots { sqrt_d, upper: (-k1 - sqrt_d) / (2.0 * k3), lower: (-k1 + sqrt_d) / (2.0 * k3) })
}

impl RiccatiParams {
    pub fn rhs(&self, y: f64) -> f64 {
        match *self {
            RiccatiParams::Simple { k1, .. } => k1 * y * y,
            RiccatiParams::General { k1, k3, k4, .. } => k3 * y * y + k1 * y + k4,
        }
    }

    pub fn y0(&self) -> f64 {
        match *self {
            RiccatiParams::Simple { y0, .. } | RiccatiParams::General { y0, .. } => y0,
        }
    }

    pub fn branch(&self) -> Result<RiccatiBranch> {
        match *self {
            RiccatiParams::Simple { .. } => Ok(RiccatiBranch::Simple),
            RiccatiParams::General { k1, k3, k4, y0 } => {
                let r = roots(k1, k3, k4)?;
                if r.sqrt_d == 0.0 {
                    return Ok(RiccatiBranch::DoubleRoot);
                }
                if y0 < r.lower {
                    return Err(Error::DomainError(format!(
                        "y0 = {y0} below the lower rest point {}: solution leaves in finite time",
                        r.lower
                    )));
                }
                Ok(if y0 == r.lower {
                    RiccatiBranch::LowerRestPoint
                } else if y0 > r.upper {
                    RiccatiBranch::AboveEquilibrium
                } else if y0 == r.upper {
                    RiccatiBranch::AtEquilibrium
                } else {
                    RiccatiBranch::BelowEquilibrium
                })
            }
        }
    }
}

/// Closed-form y(t).
pub fn riccati_solution(p: &RiccatiParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::DomainError(format!("t = {t} must be nonnegative")));
    }
    match *p {
        RiccatiParams::Simple { k1, y0 } => {
            let den = 1.0 - y0 * k1 * t;
            if den <= 0.0 {
                return Err(Error::DomainError(format!("solution blows up before t = {t}")));
            }
            Ok(y0 / den)
        }
        RiccatiParams::General { k1, k3, k4, y0 } => {
            let r = roots(k1, k3, k4)?;
            let sd = r.sqrt_d;
            match p.branch()? {
                RiccatiBranch::DoubleRoot => {
                    let w0 = y0 - r.upper;
                    Ok(r.upper + w0 / (1.0 - k3 * w0 * t))
                }
                RiccatiBranch::AtEquilibrium => Ok(r.upper),
                RiccatiBranch::LowerRestPoint => Ok(r.lower),
                RiccatiBranch::AboveEquilibrium | RiccatiBranch::BelowEquilibrium => {
                    // w = y − r₊ solves w' = K₃ w (w + Δ) with Δ = r₊ − r₋ = √D/|K₃|.
                    // Same solution as the logarithmic K₅ form, written so that
                    // small t does not cancel.
                    let gap = r.upper - r.lower;
                    let w0 = y0 - r.upper;
                    let decay = (-sd * t).exp();
                    let spent = -(-sd * t).exp_m1();
                    Ok(r.upper + w0 * decay / (1.0 + w0 / gap * spent))
                }
                RiccatiBranch::Simple => unreachable!(),
            }
        }
    }
}

/// lim_{t→∞} y(t).
pub fn riccati_limit(p: &RiccatiParams) -> Result<f64> {
    match *p {
        RiccatiParams::Simple { k1, y0 } => Ok(if y0 == 0.0 || k1 < 0.0 {
            0.0
        } else if k1 == 0.0 {
            y0
        } else {
            f64::INFINITY
        }),
        RiccatiParams::General { k1, k3, k4, .. } => {
            let r = roots(k1, k3, k4)?;
            Ok(match p.branch()? {
                RiccatiBranch::LowerRestPoint => r.lower,
                _ => r.upper,
            })
        }
    }
}

/// sup_{t≥0} y(t): solutions move monotonically toward the stable rest
/// point, so this is max(y0, limit).
pub fn riccati_envelope(p: &RiccatiParams) -> Result<f64> {
    Ok(p.y0().max(riccati_limit(p)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_x_examples() {
        let x = critical_x();
        assert!((x - 0.8895436175241).abs() < 1e-12);
        assert!((x * (x + x.powi(3) / 3.0) - 1.0).abs() < 1e-12);
        assert!(std::f64::consts::PI / 3.5317 < x && x < std::f64::consts::PI / 3.5316);
    }

    #[test]
    fn g_window() {
        let x = critical_x();
        assert!(g_alpha(x + 1e-9).unwrap().abs() < 1e-8);
        assert!(g_alpha(FRAC_PI_2 - 1e-9).unwrap().abs() < 1e-8);
        assert!(matches!(g_alpha(0.5), Err(Error::AlphaOutOfWindow(_))));
        assert!(matches!(g_alpha_d1(FRAC_PI_2), Err(Error::AlphaOutOfWindow(_))));
        let h = 1e-6;
        let fd = (g_alpha(1.1 + h).unwrap() - g_alpha(1.1 - h).unwrap()) / (2.0 * h);
        assert!((fd - g_alpha_d1(1.1).unwrap()).abs() < 1e-6);
        let fd2 = (g_alpha_d1(1.1 + h).unwrap() - g_alpha_d1(1.1 - h).unwrap()) / (2.0 * h);
        assert!((fd2 - g_alpha_d2(1.1).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn maximum_of_g() {
        let m = maximize_g();
        assert!((m.alpha0 - 1.238756).abs() < 1e-5);
        assert!((m.g0 - 0.141446).abs() < 1e-5);
        assert!(m.g_d1.abs() < 1e-12);
        let alt = m.alpha0.cos().powi(2) * (1.0 + (m.alpha0 / critical_x()).ln());
        assert!((m.g0 - alt).abs() < 1e-10);
    }

    #[test]
    fn djokovic_examples() {
        assert!(f_alpha(std::f64::consts::FRAC_PI_6) < 4.0 / 9.0);
        let r = djokovic_check(0.5, 1.0).unwrap();
        assert!(r.lower_ok && r.upper_ok);
        let r = djokovic_check(1e-3, 1.0).unwrap();
        assert!(r.lower_margin > 0.0 && r.lower_margin < 1e-9);
        assert!(r.upper_margin > 0.0 && r.upper_margin < 1e-9);
        assert!(matches!(djokovic_check(1.0, 0.5), Err(Error::DomainError(_))));
    }

    #[test]
    fn kl_infeasible_when_pinch_too_large() {
        let a = maximize_g().alpha0;
        let sel = select_kl(2.0, 0.5, 1, a).unwrap();
        assert!(matches!(sel, KLSelection::Infeasible { .. }));
    }

    #[test]
    fn kl_degenerate_at_threshold() {
        let m = maximize_g();
        let delta = 0.5;
        let lh = lambda_hat(delta, 1).unwrap().exact;
        match select_kl(lh, delta, 1, m.alpha0).unwrap() {
            KLSelection::Feasible(kl) => assert!(kl.margins.holds(1e-9)),
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn lambda_hat_examples() {
        assert_eq!(lambda_hat(0.0, 1).unwrap().exact, 1.0);
        let g0 = maximize_g().g0;
        for d in [0.1, 0.5, 2.0 / 3.0] {
            let lh = lambda_hat(d, 2).unwrap().exact;
            let lhs = (lh + 1.0 / lh).ln() - 2f64.ln();
            assert!((lhs - d * g0 / 20.0).abs() < 1e-10);
        }
    }

    #[test]
    fn riccati_examples() {
        let p = RiccatiParams::Simple { k1: -1.0, y0: 1.0 };
        assert!((riccati_solution(&p, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let p = RiccatiParams::General { k1: 1.0, k3: -1.0, k4: 0.0, y0: 0.0 };
        for t in [0.0, 1.0, 10.0] {
            assert_eq!(riccati_solution(&p, t).unwrap(), 0.0);
        }
        assert_eq!(riccati_limit(&p).unwrap(), 0.0);
        let p = RiccatiParams::General { k1: 0.0, k3: 0.0, k4: 1.0, y0: 0.0 };
        assert!(matches!(riccati_solution(&p, 1.0), Err(Error::DomainError(_))));
        let p = RiccatiParams::General { k1: 0.0, k3: -1.0, k4: -1.0, y0: 0.0 };
        assert!(matches!(riccati_solution(&p, 1.0), Err(Error::NegativeDiscriminant(_))));
    }
}
