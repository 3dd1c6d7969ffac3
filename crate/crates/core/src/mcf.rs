//! Graphical mean curvature flow of area-preserving maps of the flat 2-torus.
//!
//! A map is stored as u(x) = A x + v(x) with A ∈ SL(2, ℤ) and v periodic on
//! an L×L grid of [0,1)². The graph x ↦ (x, u(x)) evolves by
//! ∂ₜv = g^{ij} ∂ᵢⱼv with g = I + DuᵀDu.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::convergence::{select_kl, verify_pinch_window, KLParams, KLSelection};
use crate::error::{Error, Result};

/// Runs whose minimum ★Ω falls below this have left the graphical regime.
pub const NON_GRAPHICAL_STAR_OMEGA: f64 = 1e-3;
pub const MONOTONICITY_TOL: f64 = 1e-6;
pub const PINCHING_TOL: f64 = 1e-4;
pub const DET_DRIFT_LIMIT: f64 = 1e-3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    #[default]
    Second,
    Fourth,
}

impl Stencil {
    pub fn order(self) -> u32 {
        match self {
            Stencil::Second => 2,
            Stencil::Fourth => 4,
        }
    }

    pub fn from_order(order: u32) -> Result<Self> {
        match order {
            2 => Ok(Stencil::Second),
            4 => Ok(Stencil::Fourth),
            _ => Err(Error::InvalidConfig(format!("stencil order must be 2 or 4, got {order}"))),
        }
    }

    /// Largest stable dt/Δx² for Heun's method with this stencil.
    pub fn max_dt_factor(self) -> f64 {
        match self {
            Stencil::Second => 0.25,
            Stencil::Fourth => 0.1875,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapKind {
    Identity,
    Linear { a: [[i64; 2]; 2] },
    ComposedShears { eps: f64, harmonics: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TorusMap {
    l: usize,
    a: [[i64; 2]; 2],
    v1: Vec<f64>,
    v2: Vec<f64>,
}

fn check_size(l: usize) -> Result<()> {
    if l < 32 || !l.is_power_of_two() {
        return Err(Error::InvalidConfig(format!("grid size must be a power of two >= 32, got {l}")));
    }
    Ok(())
}

fn check_unimodular(a: &[[i64; 2]; 2]) -> Result<()> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det != 1 {
        return Err(Error::NotUnimodular(format!("det = {det}")));
    }
    Ok(())
}

// f(x) = Σ sin(2πhx)/(2πh) and g(y) = Σ cos(2πhy)/(2πh) with derivatives.
fn shear_f(x: f64, harmonics: usize) -> (f64, f64) {
    (1..=harmonics).fold((0.0, 0.0), |(f, df), h| {
        let w = TAU * h as f64;
        let (s, c) = (w * x).sin_cos();
        (f + s / w, df + c)
    })
}

fn shear_g(y: f64, harmonics: usize) -> (f64, f64) {
    (1..=harmonics).fold((0.0, 0.0), |(g, dg), h| {
        let w = TAU * h as f64;
        let (s, c) = (w * y).sin_cos();
        (g + c / w, dg - s)
    })
}

pub fn make_map(kind: &MapKind, l: usize) -> Result<TorusMap> {
    check_size(l)?;
    let n = l * l;
    match *kind {
        MapKind::Identity => TorusMap::from_parts(l, [[1, 0], [0, 1]], vec![0.0; n], vec![0.0; n]),
        MapKind::Linear { a } => TorusMap::from_parts(l, a, vec![0.0; n], vec![0.0; n]),
        MapKind::ComposedShears { eps, harmonics } => {
            if !(eps >= 0.0 && eps.is_finite()) {
                return Err(Error::EpsOutOfRange(format!("eps = {eps}")));
            }
            if harmonics == 0 {
                return Err(Error::InvalidConfig("harmonics must be at least 1".into()));
            }
            let h = 1.0 / l as f64;
            let (mut v1, mut v2) = (vec![0.0; n], vec![0.0; n]);
            for i in 0..l {
                let (f, _) = shear_f(i as f64 * h, harmonics);
                for j in 0..l {
                    let (g, _) = shear_g(j as f64 * h + eps * f, harmonics);
                    v1[i * l + j] = eps * g;
                    v2[i * l + j] = eps * f;
                }
            }
            TorusMap::from_parts(l, [[1, 0], [0, 1]], v1, v2)
        }
    }
}

/// max |det Du − 1| over the grid using the exact Jacobian of the generator.
pub fn analytic_det_error(kind: &MapKind, l: usize) -> Result<f64> {
    check_size(l)?;
    match *kind {
        MapKind::Identity => Ok(0.0),
        MapKind::Linear { a } => {
            check_unimodular(&a)?;
            Ok(0.0)
        }
        MapKind::ComposedShears { eps, harmonics } => {
            let h = 1.0 / l as f64;
            let mut worst: f64 = 0.0;
            for i in 0..l {
                let (f, df) = shear_f(i as f64 * h, harmonics);
                for j in 0..l {
                    let (_, dg) = shear_g(j as f64 * h + eps * f, harmonics);
                    let du = [[1.0 + eps * eps * dg * df, eps * dg], [eps * df, 1.0]];
                    worst = worst.max((du[0][0] * du[1][1] - du[0][1] * du[1][0] - 1.0).abs());
                }
            }
            Ok(worst)
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct Jet {
    // d[a][m] = ∂ₘvᵃ; dd[a] = (∂xx, ∂xy, ∂yy)
    d: [[f64; 2]; 2],
    dd: [[f64; 3]; 2],
}

impl TorusMap {
    pub fn from_parts(l: usize, a: [[i64; 2]; 2], v1: Vec<f64>, v2: Vec<f64>) -> Result<Self> {
        check_size(l)?;
        check_unimodular(&a)?;
        if v1.len() != l * l || v2.len() != l * l {
            return Err(Error::ShapeMismatch(format!("expected {} samples per component", l * l)));
        }
        Ok(Self { l, a, v1, v2 })
    }

    pub fn size(&self) -> usize {
        self.l
    }

    pub fn linear_part(&self) -> [[i64; 2]; 2] {
        self.a
    }

    /// v at grid point (i, j), i indexing x and j indexing y.
    pub fn displacement(&self, i: usize, j: usize) -> [f64; 2] {
        let k = i * self.l + j;
        [self.v1[k], self.v2[k]]
    }

    pub fn components(&self) -> (&[f64], &[f64]) {
        (&self.v1, &self.v2)
    }

    fn spacing(&self) -> f64 {
        1.0 / self.l as f64
    }

    fn jet(&self, i: usize, j: usize, stencil: Stencil) -> Jet {
        let l = self.l;
        let m = l - 1;
        let h = self.spacing();
        let at = |f: &[f64], di: isize, dj: isize| {
            let ii = (i as isize + di) as usize & m;
            let jj = (j as isize + dj) as usize & m;
            f[ii * l + jj]
        };
        let mut jet = Jet::default();
        for (a, f) in [&self.v1, &self.v2].into_iter().enumerate() {
            let f = f.as_slice();
            let c = at(f, 0, 0);
            match stencil {
                Stencil::Second => {
                    let (xp, xm, yp, ym) = (at(f, 1, 0), at(f, -1, 0), at(f, 0, 1), at(f, 0, -1));
                    jet.d[a] = [(xp - xm) / (2.0 * h), (yp - ym) / (2.0 * h)];
                    let xy = at(f, 1, 1) - at(f, 1, -1) - at(f, -1, 1) + at(f, -1, -1);
                    jet.dd[a] = [(xp - 2.0 * c + xm) / (h * h), xy / (4.0 * h * h), (yp - 2.0 * c + ym) / (h * h)];
                }
                Stencil::Fourth => {
                    const W1: [(isize, f64); 4] = [(-2, 1.0), (-1, -8.0), (1, 8.0), (2, -1.0)];
                    const W2: [(isize, f64); 5] = [(-2, -1.0), (-1, 16.0), (0, -30.0), (1, 16.0), (2, -1.0)];
                    let dx = W1.iter().map(|&(s, w)| w * at(f, s, 0)).sum::<f64>() / (12.0 * h);
                    let dy = W1.iter().map(|&(s, w)| w * at(f, 0, s)).sum::<f64>() / (12.0 * h);
                    let dxx = W2.iter().map(|&(s, w)| w * at(f, s, 0)).sum::<f64>() / (12.0 * h * h);
                    let dyy = W2.iter().map(|&(s, w)| w * at(f, 0, s)).sum::<f64>() / (12.0 * h * h);
                    let mut dxy = 0.0;
                    for &(si, wi) in &W1 {
                        for &(sj, wj) in &W1 {
                            dxy += wi * wj * at(f, si, sj);
                        }
                    }
                    jet.d[a] = [dx, dy];
                    jet.dd[a] = [dxx, dxy / (144.0 * h * h), dyy];
                }
            }
        }
        jet
    }

    fn du(&self, jet: &Jet) -> [[f64; 2]; 2] {
        let a = self.a;
        [
            [a[0][0] as f64 + jet.d[0][0], a[0][1] as f64 + jet.d[0][1]],
            [a[1][0] as f64 + jet.d[1][0], a[1][1] as f64 + jet.d[1][1]],
        ]
    }

    /// Writes the grid file format: "L <int>", an "A" line when the linear
    /// part is not the identity, then "i j v1 v2" lines in row-major order.
    pub fn to_grid_string(&self) -> String {
        let mut s = format!("L {}\n", self.l);
        if self.a != [[1, 0], [0, 1]] {
            let a = self.a;
            let _ = writeln!(s, "A {} {} {} {}", a[0][0], a[0][1], a[1][0], a[1][1]);
        }
        for i in 0..self.l {
            for j in 0..self.l {
                let [p, q] = self.displacement(i, j);
                let _ = writeln!(s, "{i} {j} {p:.16e} {q:.16e}");
            }
        }
        s
    }

    pub fn parse_grid(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|s| !s.is_empty() && !s.starts_with('#'));
        let bad = |m: String| Error::Parse(m);
        let header = lines.next().ok_or_else(|| bad("empty grid file".into()))?;
        let l: usize = header
            .strip_prefix("L ")
            .and_then(|r| r.trim().parse().ok())
            .ok_or_else(|| bad(format!("bad header {header:?}")))?;
        check_size(l)?;
        let mut a = [[1, 0], [0, 1]];
        let (mut v1, mut v2) = (vec![f64::NAN; l * l], vec![f64::NAN; l * l]);
        let mut count = 0;
        for (no, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.first() == Some(&"A") && no == 0 {
                let vals: Vec<i64> = fields[1..]
                    .iter()
                    .map(|x| x.parse().map_err(|_| bad(format!("bad linear part {line:?}"))))
                    .collect::<Result<_>>()?;
                if vals.len() != 4 {
                    return Err(bad(format!("bad linear part {line:?}")));
                }
                a = [[vals[0], vals[1]], [vals[2], vals[3]]];
                continue;
            }
            if fields.len() != 4 {
                return Err(bad(format!("expected 'i j v1 v2', got {line:?}")));
            }
            let i: usize = fields[0].parse().map_err(|_| bad(format!("bad index in {line:?}")))?;
            let j: usize = fields[1].parse().map_err(|_| bad(format!("bad index in {line:?}")))?;
            let p: f64 = fields[2].parse().map_err(|_| bad(format!("bad value in {line:?}")))?;
            let q: f64 = fields[3].parse().map_err(|_| bad(format!("bad value in {line:?}")))?;
            if i >= l || j >= l {
                return Err(Error::IndexOutOfRange(format!("({i}, {j}) outside {l}x{l}")));
            }
            v1[i * l + j] = p;
            v2[i * l + j] = q;
            count += 1;
        }
        if count != l * l || v1.iter().chain(&v2).any(|x| x.is_nan()) {
            return Err(bad(format!("expected {} grid lines, got {count}", l * l)));
        }
        Self::from_parts(l, a, v1, v2)
    }

    pub fn read_grid(path: &Path) -> Result<Self> {
        Self::parse_grid(&std::fs::read_to_string(path)?)
    }

    pub fn write_grid(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_grid_string())?;
        Ok(())
    }
}

/// Pointwise geometric quantities of the graph.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointGeometry {
    pub star_omega: f64,
    pub lambda_max: f64,
    pub lambda_min: f64,
    pub det: f64,
    pub ii2: f64,
}

fn inv2(g: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    [[g[1][1] / det, -g[0][1] / det], [-g[1][0] / det, g[0][0] / det]]
}

fn metric(du: &[[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut g = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            g[i][j] = if i == j { 1.0 } else { 0.0 } + du[0][i] * du[0][j] + du[1][i] * du[1][j];
        }
    }
    g
}

/// Singular values (max, min) of a 2×2 matrix.
pub fn singular_values(m: &[[f64; 2]; 2]) -> (f64, f64) {
    let t = m[0][0] * m[0][0] + m[0][1] * m[0][1] + m[1][0] * m[1][0] + m[1][1] * m[1][1];
    let d = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (t * t - 4.0 * d * d).max(0.0).sqrt();
    let hi = ((t + disc) / 2.0).sqrt();
    let lo = if hi > 0.0 { d.abs() / hi } else { 0.0 };
    (hi, lo)
}

fn geometry(du: &[[f64; 2]; 2], jet: &Jet) -> PointGeometry {
    let g = metric(du);
    let gi = inv2(g);
    let det = du[0][0] * du[1][1] - du[0][1] * du[1][0];
    let star_omega = 1.0 / (g[0][0] * g[1][1] - g[0][1] * g[1][0]).sqrt();
    let (lambda_max, lambda_min) = singular_values(du);

    // hess[p] = ∂ᵢⱼv for p = (i,j) in row-major 2×2 order
    let pair = |i: usize, j: usize| {
        if i + j == 0 {
            0
        } else if i + j == 1 {
            1
        } else {
            2
        }
    };
    let hess = |i: usize, j: usize| [jet.dd[0][pair(i, j)], jet.dd[1][pair(i, j)]];
    // Γ_{ij,m} = ⟨∂ᵢⱼv, ∂ₘu⟩
    let gamma = |i: usize, j: usize, m: usize| {
        let h = hess(i, j);
        h[0] * du[0][m] + h[1] * du[1][m]
    };
    let inner = |i: usize, j: usize, k: usize, l: usize| {
        let (a, b) = (hess(i, j), hess(k, l));
        let mut s = a[0] * b[0] + a[1] * b[1];
        for m in 0..2 {
            for n in 0..2 {
                s -= gamma(i, j, m) * gi[m][n] * gamma(k, l, n);
            }
        }
        s
    };
    let mut ii2 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    ii2 += gi[i][k] * gi[j][l] * inner(i, j, k, l);
                }
            }
        }
    }
    PointGeometry { star_omega, lambda_max, lambda_min, det, ii2: ii2.max(0.0) }
}

impl TorusMap {
    pub fn point_geometry(&self, i: usize, j: usize, stencil: Stencil) -> PointGeometry {
        let jet = self.jet(i, j, stencil);
        geometry(&self.du(&jet), &jet)
    }

    fn for_each_point(&self, stencil: Stencil, mut f: impl FnMut(PointGeometry)) {
        for i in 0..self.l {
            for j in 0..self.l {
                f(self.point_geometry(i, j, stencil));
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowRecord {
    pub t: f64,
    pub min_star_omega: f64,
    pub max_star_omega: f64,
    pub max_lambda: f64,
    pub max_ii2: f64,
    pub det_drift: f64,
}

pub fn monitors(map: &TorusMap, stencil: Stencil) -> FlowRecord {
    let mut r = FlowRecord {
        t: 0.0,
        min_star_omega: f64::INFINITY,
        max_star_omega: f64::NEG_INFINITY,
        max_lambda: 0.0,
        max_ii2: 0.0,
        det_drift: 0.0,
    };
    map.for_each_point(stencil, |p| {
        r.min_star_omega = r.min_star_omega.min(p.star_omega);
        r.max_star_omega = r.max_star_omega.max(p.star_omega);
        r.max_lambda = r.max_lambda.max(p.lambda_max);
        r.max_ii2 = r.max_ii2.max(p.ii2);
        r.det_drift = r.det_drift.max((p.det - 1.0).abs());
    });
    r
}

fn velocity(map: &TorusMap, stencil: Stencil) -> (Vec<f64>, Vec<f64>) {
    let n = map.l * map.l;
    let (mut w1, mut w2) = (vec![0.0; n], vec![0.0; n]);
    for i in 0..map.l {
        for j in 0..map.l {
            let jet = map.jet(i, j, stencil);
            let gi = inv2(metric(&map.du(&jet)));
            let k = i * map.l + j;
            let rate = |dd: &[f64; 3]| gi[0][0] * dd[0] + 2.0 * gi[0][1] * dd[1] + gi[1][1] * dd[2];
            w1[k] = rate(&jet.dd[0]);
            w2[k] = rate(&jet.dd[1]);
        }
    }
    (w1, w2)
}

/// One Heun (RK2) step.
pub fn flow_step(map: &TorusMap, dt: f64, stencil: Stencil) -> Result<TorusMap> {
    let h = map.spacing();
    if !(dt > 0.0) || dt > stencil.max_dt_factor() * h * h * (1.0 + 1e-12) {
        return Err(Error::UnstableStep(format!(
            "dt = {dt} outside (0, {}·dx²] for order-{} stencil",
            stencil.max_dt_factor(),
            stencil.order()
        )));
    }
    let (k1a, k1b) = velocity(map, stencil);
    let mut mid = map.clone();
    for k in 0..mid.v1.len() {
        mid.v1[k] += dt * k1a[k];
        mid.v2[k] += dt * k1b[k];
    }
    let (k2a, k2b) = velocity(&mid, stencil);
    let mut out = map.clone();
    for k in 0..out.v1.len() {
        out.v1[k] += 0.5 * dt * (k1a[k] + k2a[k]);
        out.v2[k] += 0.5 * dt * (k1b[k] + k2b[k]);
    }
    if out.v1.iter().chain(&out.v2).any(|x| !x.is_finite()) {
        return Err(Error::UnstableStep("state became non-finite".into()));
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub dt_factor: f64,
    pub t_end: f64,
    pub stencil: Stencil,
    pub record_every: usize,
    pub stop_ii2: f64,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self { dt_factor: 0.2, t_end: 1.0, stencil: Stencil::Second, record_every: 100, stop_ii2: 0.0 }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_factor > 0.0 && self.dt_factor <= 0.25) {
            return Err(Error::InvalidConfig(format!("dt_factor = {} not in (0, 0.25]", self.dt_factor)));
        }
        if self.dt_factor > self.stencil.max_dt_factor() {
            return Err(Error::UnstableStep(format!(
                "dt_factor = {} exceeds {} for order-{} stencil",
                self.dt_factor,
                self.stencil.max_dt_factor(),
                self.stencil.order()
            )));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!("t_end = {} must be positive", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidConfig("record_every must be at least 1".into()));
        }
        if !(self.stop_ii2 >= 0.0) {
            return Err(Error::InvalidConfig(format!("stop_ii2 = {} must be nonnegative", self.stop_ii2)));
        }
        Ok(())
    }

    /// Step size dt ≤ dt_factor·Δx² that lands exactly on t_end, and the
    /// number of steps.
    pub fn schedule(&self, l: usize) -> (f64, usize) {
        let h = 1.0 / l as f64;
        let dt_max = self.dt_factor * h * h;
        let steps = (self.t_end / dt_max).ceil().max(1.0) as usize;
        (self.t_end / steps as f64, steps)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowFlags {
    /// Consecutive records where min ★Ω dropped by more than 1e-6.
    pub monotonicity_violations: usize,
    /// Smallest change of min ★Ω between consecutive records.
    pub worst_star_omega_drift: f64,
    /// Records with max λ above its initial value plus 1e-4.
    pub pinching_violations: usize,
    pub max_det_drift: f64,
    pub det_drift_ok: bool,
    pub stopped_early: bool,
    pub steps: usize,
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowRun {
    pub records: Vec<FlowRecord>,
    pub flags: FlowFlags,
    pub final_map: TorusMap,
}

fn flags_for(records: &[FlowRecord], stopped_early: bool, steps: usize, dt: f64) -> FlowFlags {
    let first = records[0];
    let mut f = FlowFlags {
        monotonicity_violations: 0,
        worst_star_omega_drift: 0.0,
        pinching_violations: 0,
        max_det_drift: 0.0,
        det_drift_ok: true,
        stopped_early,
        steps,
        dt,
    };
    for w in records.windows(2) {
        let d = w[1].min_star_omega - w[0].min_star_omega;
        f.worst_star_omega_drift = f.worst_star_omega_drift.min(d);
        if d < -MONOTONICITY_TOL {
            f.monotonicity_violations += 1;
        }
    }
    for r in records {
        if r.max_lambda > first.max_lambda + PINCHING_TOL {
            f.pinching_violations += 1;
        }
        f.max_det_drift = f.max_det_drift.max(r.det_drift);
    }
    f.det_drift_ok = f.max_det_drift <= DET_DRIFT_LIMIT;
    f
}

/// Integrates to t_end (or until max |II|² < stop_ii2), calling `observe`
/// with the map at every recorded time.
pub fn run_flow_observed(
    map: &TorusMap,
    config: &FlowConfig,
    mut observe: impl FnMut(&TorusMap, &FlowRecord),
) -> Result<FlowRun> {
    config.validate()?;
    let (dt, steps) = config.schedule(map.size());
    let mut state = map.clone();
    let mut records = Vec::new();
    let mut record = |state: &TorusMap, t: f64, records: &mut Vec<FlowRecord>| -> Result<FlowRecord> {
        let mut r = monitors(state, config.stencil);
        r.t = t;
        if !(r.min_star_omega >= NON_GRAPHICAL_STAR_OMEGA) {
            return Err(Error::NonGraphical(format!("min star omega = {} at t = {t}", r.min_star_omega)));
        }
        observe(state, &r);
        records.push(r);
        Ok(r)
    };
    let first = record(&state, 0.0, &mut records)?;
    let mut stopped_early = first.max_ii2 < config.stop_ii2;
    let mut taken = 0;
    while !stopped_early && taken < steps {
        state = flow_step(&state, dt, config.stencil)?;
        taken += 1;
        if taken % config.record_every == 0 || taken == steps {
            let t = if taken == steps { config.t_end } else { taken as f64 * dt };
            let r = record(&state, t, &mut records)?;
            stopped_early = r.max_ii2 < config.stop_ii2 && taken < steps;
        }
    }
    let flags = flags_for(&records, stopped_early, taken, dt);
    Ok(FlowRun { records, flags, final_map: state })
}

pub fn run_flow(map: &TorusMap, config: &FlowConfig) -> Result<FlowRun> {
    run_flow_observed(map, config, |_, _| {})
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GSample {
    pub t: f64,
    /// max over the grid of |II|² / sin(k (★Ω)^l)
    pub g: f64,
}

pub fn g_value(map: &TorusMap, stencil: Stencil, kl: &KLParams) -> f64 {
    let mut g: f64 = 0.0;
    map.for_each_point(stencil, |p| {
        g = g.max(p.ii2 / kl.phase(p.star_omega).sin());
    });
    g
}

/// (k, l) for a run whose initial data is pinched by `max_lambda0`, using
/// δ at the pinch Λ₁. The pinch is padded by the pinching tolerance.
pub fn kl_for_pinch(max_lambda0: f64, delta: f64, n: u32, alpha: f64) -> Result<KLParams> {
    let big_lambda = max_lambda0.max(1.0) + PINCHING_TOL;
    match select_kl(big_lambda, delta, n, alpha)? {
        KLSelection::Feasible(kl) => Ok(kl),
        KLSelection::Infeasible { reason, .. } => Err(Error::InfeasibleKL(format!("Lambda = {big_lambda}: {reason}"))),
    }
}

/// Runs the flow and records the g-series alongside the monitors.
pub fn riccati_track(map: &TorusMap, config: &FlowConfig, kl: &KLParams) -> Result<(FlowRun, Vec<GSample>)> {
    let mut samples = Vec::new();
    let run = run_flow_observed(map, config, |m, r| {
        samples.push(GSample { t: r.t, g: g_value(m, config.stencil, kl) });
    })?;
    Ok((run, samples))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiccatiComparison {
    pub y0: f64,
    pub k1: f64,
    /// min over records of y(t) − g(t)
    pub worst_margin: f64,
    pub holds: bool,
    /// K₁ ≥ 0: the bound does not decay and proves nothing.
    pub vacuous: bool,
    pub measured: Vec<GSample>,
    pub envelope: Vec<GSample>,
}

/// Checks g(t) ≤ y(t) = y(0)/(1 − y(0)K₁t) with y(0) = g(0).
pub fn compare_to_riccati(series: &[GSample], k1: f64) -> Result<RiccatiComparison> {
    let first = series.first().ok_or(Error::EmptySeries)?;
    let y0 = first.g;
    let mut worst = f64::INFINITY;
    let mut envelope = Vec::with_capacity(series.len());
    for s in series {
        let den = 1.0 - y0 * k1 * s.t;
        let y = if den > 0.0 { y0 / den } else { f64::INFINITY };
        envelope.push(GSample { t: s.t, g: y });
        worst = worst.min(y - s.g);
    }
    let tol = 1e-12 * y0.abs().max(f64::MIN_POSITIVE);
    Ok(RiccatiComparison {
        y0,
        k1,
        worst_margin: worst,
        holds: worst >= -tol,
        vacuous: k1 >= 0.0,
        measured: series.to_vec(),
        envelope,
    })
}

/// The full comparison for a run: (k, l) from the measured initial pinch,
/// K₁ from the pinch-window grid, then the g-series against the envelope.
pub fn riccati_check(
    map: &TorusMap,
    config: &FlowConfig,
    delta: f64,
    alpha: f64,
    window_samples: usize,
) -> Result<(FlowRun, KLParams, RiccatiComparison)> {
    let r0 = monitors(map, config.stencil);
    let kl = kl_for_pinch(r0.max_lambda, delta, 1, alpha)?;
    let k1 = verify_pinch_window(&kl, window_samples).k1;
    let (run, series) = riccati_track(map, config, &kl)?;
    let cmp = compare_to_riccati(&series, k1)?;
    Ok((run, kl, cmp))
}
