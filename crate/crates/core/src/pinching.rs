//! The quadratic form Q(λ, h), its smallest eigenvalue over pinched boxes,
//! and the closed-form pinching constants built from it.

use nalgebra::{DMatrix, SymmetricEigen};
use num::rational::Rational64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curvature::{frame_sectional_table, Scalar, SpaceKind};
use crate::error::{Error, Result};

/// Eigenvalues closer to zero than this are reported as zero.
pub const EIGEN_ZERO_TOL: f64 = 1e-10;
const PAIRING_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairingMode {
    Symplectic,
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryMode {
    FullSymmetric,
    Unconstrained,
}

/// Singular values λ_1..λ_{2N}. In symplectic mode consecutive entries pair
/// as λ_{2i-1} λ_{2i} = 1 with λ_{2i-1} <= 1 <= λ_{2i}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinchSpectrum {
    lambdas: Vec<f64>,
    mode: PairingMode,
}

impl PinchSpectrum {
    pub fn new(lambdas: Vec<f64>, mode: PairingMode) -> Result<Self> {
        if lambdas.is_empty() || lambdas.len() % 2 != 0 {
            return Err(Error::InvalidSpectrum(format!("length {} is not 2N with N >= 1", lambdas.len())));
        }
        if let Some(x) = lambdas.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return Err(Error::InvalidSpectrum(format!("entry {x} is not positive")));
        }
        if mode == PairingMode::Symplectic {
            for p in lambdas.chunks(2) {
                let (a, b) = (p[0], p[1]);
                if (a * b - 1.0).abs() > PAIRING_TOL || a > 1.0 + PAIRING_TOL || b < 1.0 - PAIRING_TOL {
                    return Err(Error::InvalidSpectrum(format!("pair ({a}, {b}) is not symplectic")));
                }
            }
        }
        Ok(Self { lambdas, mode })
    }

    /// Symplectic spectrum (1/μ_1, μ_1, ..., 1/μ_N, μ_N) from μ_i >= 1.
    pub fn symplectic(mus: &[f64]) -> Result<Self> {
        let mut l = Vec::with_capacity(2 * mus.len());
        for &m in mus {
            l.push(1.0 / m);
            l.push(m);
        }
        Self::new(l, PairingMode::Symplectic)
    }

    pub fn ones(n_pairs: usize) -> Self {
        Self { lambdas: vec![1.0; 2 * n_pairs], mode: PairingMode::Symplectic }
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn mode(&self) -> PairingMode {
        self.mode
    }

    pub fn n_pairs(&self) -> usize {
        self.lambdas.len() / 2
    }

    /// Random symplectic spectrum with every μ_i in [1, max_mu].
    pub fn random_symplectic<R: Rng>(n_pairs: usize, max_mu: f64, rng: &mut R) -> Self {
        let mus: Vec<f64> = (0..n_pairs).map(|_| rng.random_range(1.0..=max_mu)).collect();
        Self::symplectic(&mus).expect("valid by construction")
    }
}

/// Partner index i' in 0-based form: 0<->1, 2<->3, ...
fn partner(i: usize) -> usize {
    i ^ 1
}

fn parity_sign(i: usize, j: usize) -> f64 {
    if (i + j) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Real 3-tensor h_{ijk}, 0 <= i,j,k < 2N.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HTensor {
    dim: usize,
    values: Vec<f64>,
    mode: SymmetryMode,
}

impl HTensor {
    pub fn zeros(dim: usize, mode: SymmetryMode) -> Self {
        Self { dim, values: vec![0.0; dim * dim * dim], mode }
    }

    pub fn unconstrained(dim: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch(format!("{} values for dimension {dim}", values.len())));
        }
        Ok(Self { dim, values, mode: SymmetryMode::Unconstrained })
    }

    /// Fully symmetric tensor whose value on a sorted index triple is f(i,j,k).
    pub fn symmetric(dim: usize, f: impl Fn(usize, usize, usize) -> f64) -> Self {
        let mut h = Self::zeros(dim, SymmetryMode::FullSymmetric);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let mut s = [i, j, k];
                    s.sort_unstable();
                    h.values[(i * dim + j) * dim + k] = f(s[0], s[1], s[2]);
                }
            }
        }
        h
    }

    pub fn random<R: Rng>(dim: usize, mode: SymmetryMode, rng: &mut R) -> Self {
        match mode {
            SymmetryMode::Unconstrained => {
                let values = (0..dim * dim * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                Self { dim, values, mode }
            }
            SymmetryMode::FullSymmetric => {
                let mut draws = std::collections::HashMap::new();
                for t in sorted_triples(dim) {
                    draws.insert(t, rng.random_range(-1.0..1.0));
                }
                Self::symmetric(dim, |i, j, k| draws[&[i, j, k]])
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn mode(&self) -> SymmetryMode {
        self.mode
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[(i * self.dim + j) * self.dim + k]
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { dim: self.dim, values: self.values.iter().map(|v| v * t).collect(), mode: self.mode }
    }

    /// Frobenius norm squared with full multiplicity.
    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Coordinates in the orthonormal basis used by [`q_matrix`] for `mode`.
    pub fn coordinates(&self, mode: SymmetryMode) -> Vec<f64> {
        match mode {
            SymmetryMode::Unconstrained => self.values.clone(),
            SymmetryMode::FullSymmetric => sorted_triples(self.dim)
                .into_iter()
                .map(|[i, j, k]| self.get(i, j, k) * (multiplicity([i, j, k]) as f64).sqrt())
                .collect(),
        }
    }
}

fn sorted_triples(dim: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for i in 0..dim {
        for j in i..dim {
            for k in j..dim {
                out.push([i, j, k]);
            }
        }
    }
    out
}

fn multiplicity(t: [usize; 3]) -> usize {
    match (t[0] == t[1], t[1] == t[2]) {
        (true, true) => 1,
        (false, false) if t[0] != t[2] => 6,
        _ => 3,
    }
}

fn permutations(t: [usize; 3]) -> Vec<[usize; 3]> {
    let [a, b, c] = t;
    let mut p = vec![[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]];
    p.sort_unstable();
    p.dedup();
    p
}

fn check_dims(lambda: &PinchSpectrum, h: &HTensor) -> Result<()> {
    if lambda.lambdas.len() != h.dim {
        return Err(Error::DimensionMismatch(format!(
            "spectrum of length {} with tensor of dimension {}",
            lambda.lambdas.len(),
            h.dim
        )));
    }
    Ok(())
}

/// Q(λ, h) = Σ h²_{ijk} − 2 Σ_k Σ_{i<j} (−1)^{i+j} λ_i λ_j (h_{i'ik} h_{j'jk} − h_{i'jk} h_{j'ik}).
pub fn q_form(lambda: &PinchSpectrum, h: &HTensor) -> Result<f64> {
    check_dims(lambda, h)?;
    let d = h.dim;
    let l = &lambda.lambdas;
    let mut cross = 0.0;
    for k in 0..d {
        for i in 0..d {
            for j in i + 1..d {
                let (ip, jp) = (partner(i), partner(j));
                let t = h.get(ip, i, k) * h.get(jp, j, k) - h.get(ip, j, k) * h.get(jp, i, k);
                cross += parity_sign(i, j) * l[i] * l[j] * t;
            }
        }
    }
    Ok(h.norm_sqr() - 2.0 * cross)
}

/// Symmetric matrix of Q in the orthonormal basis of the chosen h-space.
#[derive(Clone, Debug, PartialEq)]
pub struct QMatrix {
    pub dim: usize,
    pub mode: SymmetryMode,
    pub matrix: DMatrix<f64>,
}

impl QMatrix {
    /// xᵀ M x for coordinates x from [`HTensor::coordinates`].
    pub fn eval(&self, x: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(x);
        (v.transpose() * &self.matrix * &v)[(0, 0)]
    }
}

fn full_q_matrix(lambda: &PinchSpectrum) -> DMatrix<f64> {
    let d = lambda.lambdas.len();
    let l = &lambda.lambdas;
    let idx = |i: usize, j: usize, k: usize| (i * d + j) * d + k;
    let size = d * d * d;
    let mut m = DMatrix::<f64>::identity(size, size);
    let mut add = |a: usize, b: usize, c: f64| {
        m[(a, b)] += 0.5 * c;
        m[(b, a)] += 0.5 * c;
    };
    for k in 0..d {
        for i in 0..d {
            for j in i + 1..d {
                let (ip, jp) = (partner(i), partner(j));
                let c = -2.0 * parity_sign(i, j) * l[i] * l[j];
                add(idx(ip, i, k), idx(jp, j, k), c);
                add(idx(ip, j, k), idx(jp, i, k), -c);
            }
        }
    }
    m
}

fn mirror_upper(m: &mut DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..i {
            m[(i, j)] = m[(j, i)];
        }
    }
}

pub fn q_matrix(lambda: &PinchSpectrum, mode: SymmetryMode) -> Result<QMatrix> {
    let n = lambda.n_pairs();
    let limit = match mode {
        SymmetryMode::Unconstrained => 4,
        SymmetryMode::FullSymmetric => 6,
    };
    if n > limit {
        return Err(Error::DimensionTooLarge(format!("N = {n} exceeds {limit} for {mode:?}")));
    }
    let d = lambda.lambdas.len();
    let full = full_q_matrix(lambda);
    let mut matrix = match mode {
        SymmetryMode::Unconstrained => full,
        SymmetryMode::FullSymmetric => {
            let idx = |t: [usize; 3]| (t[0] * d + t[1]) * d + t[2];
            let cols: Vec<Vec<usize>> =
                sorted_triples(d).into_iter().map(|t| permutations(t).into_iter().map(idx).collect()).collect();
            let c = cols.len();
            let mut m = DMatrix::<f64>::zeros(c, c);
            for p in 0..c {
                for q in p..c {
                    let mut s = 0.0;
                    for &a in &cols[p] {
                        for &b in &cols[q] {
                            s += full[(a, b)];
                        }
                    }
                    m[(p, q)] = s / ((cols[p].len() * cols[q].len()) as f64).sqrt();
                }
            }
            m
        }
    };
    mirror_upper(&mut matrix);
    Ok(QMatrix { dim: d, mode, matrix })
}

/// Smallest eigenvalue δ_λ of Q at λ.
pub fn delta_lambda(lambda: &PinchSpectrum, mode: SymmetryMode) -> Result<f64> {
    let q = q_matrix(lambda, mode)?;
    let min = SymmetricEigen::new(q.matrix).eigenvalues.min();
    Ok(if min.abs() < EIGEN_ZERO_TOL { 0.0 } else { min })
}

/// Options for the box infimum search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub pairing: PairingMode,
    pub symmetry: SymmetryMode,
    pub grid_per_axis: usize,
    pub refine_iters: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            pairing: PairingMode::Symplectic,
            symmetry: SymmetryMode::FullSymmetric,
            grid_per_axis: 9,
            refine_iters: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub lambda_pinch: f64,
    pub value: f64,
    pub argmin: Vec<f64>,
    /// Grid spacing in log λ, a proxy for the estimate's uncertainty.
    pub grid_step: f64,
    pub evaluations: usize,
}

/// Infimum of δ_λ over the pinched box, parameterized by s = ln λ.
/// Symplectic mode searches s_i ∈ [0, ln Λ] with λ = (e^{-s_i}, e^{s_i}),
/// free mode searches every s_i ∈ [−ln Λ, ln Λ].
pub fn delta_big_lambda(big_lambda: f64, n_pairs: usize, opts: &SearchOptions) -> Result<DeltaEstimate> {
    if !(big_lambda >= 1.0) || !big_lambda.is_finite() {
        return Err(Error::InvalidPinch(format!("Lambda = {big_lambda} < 1")));
    }
    if n_pairs == 0 {
        return Err(Error::DimensionMismatch("N must be at least 1".into()));
    }
    let top = big_lambda.ln();
    let (axes, lo) = match opts.pairing {
        PairingMode::Symplectic => (n_pairs, 0.0),
        PairingMode::Free => (2 * n_pairs, -top),
    };
    let spectrum = |s: &[f64]| -> PinchSpectrum {
        let lambdas = match opts.pairing {
            PairingMode::Symplectic => s.iter().flat_map(|&x| [(-x).exp(), x.exp()]).collect(),
            PairingMode::Free => s.iter().map(|x| x.exp()).collect(),
        };
        PinchSpectrum { lambdas, mode: opts.pairing }
    };
    let mut evaluations = 0usize;
    let mut objective = |s: &[f64]| -> Result<f64> {
        evaluations += 1;
        delta_lambda(&spectrum(s), opts.symmetry)
    };

    if big_lambda == 1.0 {
        let s = vec![0.0; axes];
        let v = objective(&s)?;
        return Ok(DeltaEstimate {
            lambda_pinch: 1.0,
            value: v,
            argmin: spectrum(&s).lambdas,
            grid_step: 0.0,
            evaluations,
        });
    }

    let g = opts.grid_per_axis.max(2);
    let step = (top - lo) / (g - 1) as f64;
    let mut best = (f64::INFINITY, vec![lo; axes]);
    let mut counter = vec![0usize; axes];
    loop {
        let s: Vec<f64> = counter.iter().map(|&c| lo + c as f64 * step).collect();
        let v = objective(&s)?;
        if v < best.0 {
            best = (v, s);
        }
        let mut a = 0;
        while a < axes {
            counter[a] += 1;
            if counter[a] < g {
                break;
            }
            counter[a] = 0;
            a += 1;
        }
        if a == axes {
            break;
        }
    }

    if opts.refine_iters > 0 {
        let clamp = |s: &mut Vec<f64>| {
            for x in s.iter_mut() {
                *x = x.clamp(lo, top);
            }
        };
        let (v, s) = nelder_mead(&mut objective, &best.1, step / 2.0, opts.refine_iters, clamp)?;
        if v < best.0 {
            best = (v, s);
        }
    }
    Ok(DeltaEstimate {
        lambda_pinch: big_lambda,
        value: best.0,
        argmin: spectrum(&best.1).lambdas,
        grid_step: step,
        evaluations,
    })
}

/// Box-clamped Nelder–Mead, deterministic. Returns the best vertex.
fn nelder_mead(
    f: &mut impl FnMut(&[f64]) -> Result<f64>,
    start: &[f64],
    scale: f64,
    iters: usize,
    clamp: impl Fn(&mut Vec<f64>),
) -> Result<(f64, Vec<f64>)> {
    let d = start.len();
    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(d + 1);
    let mut x0 = start.to_vec();
    clamp(&mut x0);
    simplex.push((f(&x0)?, x0.clone()));
    for i in 0..d {
        let mut x = x0.clone();
        x[i] += scale;
        clamp(&mut x);
        if x == x0 {
            x[i] -= scale;
            clamp(&mut x);
        }
        simplex.push((f(&x)?, x));
    }
    let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect() };
    for _ in 0..iters {
        simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
        let spread = simplex[d].0 - simplex[0].0;
        if spread.abs() < 1e-13 {
            break;
        }
        let mut centroid = vec![0.0; d];
        for (_, x) in &simplex[..d] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / d as f64;
            }
        }
        let worst = simplex[d].clone();
        let mut xr = lerp(&centroid, &worst.1, -1.0);
        clamp(&mut xr);
        let fr = f(&xr)?;
        if fr < simplex[0].0 {
            let mut xe = lerp(&centroid, &worst.1, -2.0);
            clamp(&mut xe);
            let fe = f(&xe)?;
            simplex[d] = if fe < fr { (fe, xe) } else { (fr, xr) };
        } else if fr < simplex[d - 1].0 {
            simplex[d] = (fr, xr);
        } else {
            let mut xc = lerp(&centroid, &worst.1, 0.5);
            clamp(&mut xc);
            let fc = f(&xc)?;
            if fc < worst.0 {
                simplex[d] = (fc, xc);
            } else {
                let best = simplex[0].1.clone();
                for v in simplex.iter_mut().skip(1) {
                    let mut x = lerp(&best, &v.1, 0.5);
                    clamp(&mut x);
                    *v = (f(&x)?, x);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(simplex.swap_remove(0))
}

/// A value on [1, ∞] with an explicit unbounded sentinel.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Extended {
    Finite(f64),
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Lambda0 {
    /// δ stayed positive up to the probe value.
    AtLeast { probe: f64 },
    /// δ changes sign inside [lower, upper].
    Bracket { lower: f64, upper: f64 },
}

impl Lambda0 {
    pub fn as_extended(&self) -> Extended {
        match *self {
            Lambda0::AtLeast { .. } => Extended::Infinite,
            Lambda0::Bracket { lower, upper } => Extended::Finite(0.5 * (lower + upper)),
        }
    }
}

/// sup{Λ : δ_Λ > 0} by bisection of the sign change.
pub fn lambda0(n_pairs: usize, opts: &SearchOptions, probe: f64, bisect_tol: f64) -> Result<Lambda0> {
    if !(probe > 1.0) {
        return Err(Error::InvalidPinch(format!("probe {probe} must exceed 1")));
    }
    let positive = |l: f64| -> Result<bool> { Ok(delta_big_lambda(l, n_pairs, opts)?.value > EIGEN_ZERO_TOL) };
    if positive(probe)? {
        return Ok(Lambda0::AtLeast { probe });
    }
    let (mut lo, mut hi) = (1.0, probe);
    if !positive(lo)? {
        return Ok(Lambda0::Bracket { lower: 1.0, upper: 1.0 });
    }
    while hi - lo > bisect_tol {
        let mid = 0.5 * (lo + hi);
        if positive(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Lambda0::Bracket { lower: lo, upper: hi })
}

/// Λ₁(n, Λ₀) = a^{1/n} + √(a^{2/n} − 1) with a = ½(Λ₀ + 1/Λ₀).
pub fn lambda1(n: u32, lambda0: Extended) -> Result<Extended> {
    match lambda0 {
        Extended::Infinite => Ok(Extended::Infinite),
        Extended::Finite(l) => {
            if !(l >= 1.0) {
                return Err(Error::InvalidPinch(format!("Lambda0 = {l} < 1")));
            }
            let a = 0.5 * (l + 1.0 / l);
            let b = a.powf(1.0 / n as f64);
            Ok(Extended::Finite(b + (b * b - 1.0).max(0.0).sqrt()))
        }
    }
}

/// Λ′_n(Λ) = b^n + √(b^{2n} − 1) with b = ½(Λ + 1/Λ).
pub fn lambda_prime(big_lambda: f64, n: u32) -> Result<f64> {
    if !(big_lambda >= 1.0) {
        return Err(Error::InvalidPinch(format!("Lambda = {big_lambda} < 1")));
    }
    let b = (0.5 * (big_lambda + 1.0 / big_lambda)).powi(n as i32);
    Ok(b + (b * b - 1.0).max(0.0).sqrt())
}

/// ε(mn, Λ) = 2^{−mn} − (Λ + 1/Λ)^{−mn}.
pub fn eps_of_pinch(mn: u32, big_lambda: f64) -> Result<f64> {
    if !(big_lambda >= 1.0) {
        return Err(Error::InvalidPinch(format!("Lambda = {big_lambda} < 1")));
    }
    Ok(0.5f64.powi(mn as i32) - (big_lambda + 1.0 / big_lambda).powi(-(mn as i32)))
}

/// Λ(mn, ε) = q + √(q² − 1) with q = 2^{−mn}/(2^{−mn} − ε).
pub fn pinch_of_eps(mn: u32, eps: f64) -> Result<f64> {
    let top = 0.5f64.powi(mn as i32);
    if !(0.0..top).contains(&eps) {
        return Err(Error::EpsOutOfRange(format!("epsilon {eps} outside [0, 2^-{mn})")));
    }
    let q = top / (top - eps);
    Ok(q + (q * q - 1.0).max(0.0).sqrt())
}

/// Lower bound 2^{1−mn} Λ/(Λ² + 1) on the initial ★Ω.
pub fn star_omega_threshold(big_lambda: f64, mn: u32) -> Result<f64> {
    if !(big_lambda >= 1.0) {
        return Err(Error::InvalidPinch(format!("Lambda = {big_lambda} < 1")));
    }
    Ok(2f64.powi(1 - mn as i32) * big_lambda / (big_lambda * big_lambda + 1.0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PinchTensorReport {
    /// Row-major 4N×4N block matrix [[A, B], [Bᵀ, D]].
    pub s_matrix: Vec<Vec<f64>>,
    /// A is positive definite, decided by its eigenvalues.
    pub a_positive: bool,
    /// min_i(Λ² − λ_i²) > 0.
    pub predicate: bool,
}

/// The parallel two-tensor S in the graph frame and the positivity of its
/// tangential block.
pub fn pinch_tensor_positivity(lambda: &PinchSpectrum, big_lambda: f64, xi: f64) -> Result<PinchTensorReport> {
    if !(xi > 0.0) {
        return Err(Error::InvalidXi(format!("Xi = {xi} must be positive")));
    }
    let l = &lambda.lambdas;
    let d = l.len();
    let scale = big_lambda.powf(2.0 + xi);
    let ll = big_lambda * big_lambda;
    let mut s = DMatrix::<f64>::zeros(2 * d, 2 * d);
    for i in 0..d {
        let diag = (ll - l[i] * l[i]) / (scale * (1.0 + l[i] * l[i]));
        s[(i, i)] = diag;
        s[(d + i, d + i)] = diag;
    }
    for r in 0..d {
        let j = partner(r);
        // (−1)^{j+1} with 1-based j
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let b = (ll + l[r] * l[j]) * sign / (scale * ((1.0 + l[r] * l[r]) * (1.0 + l[j] * l[j])).sqrt());
        s[(r, d + j)] = b;
        s[(d + j, r)] = b;
    }
    let a = s.view((0, 0), (d, d)).into_owned();
    let a_positive = SymmetricEigen::new(a).eigenvalues.min() > 0.0;
    let predicate = l.iter().all(|x| ll - x * x > 0.0);
    let s_matrix = (0..2 * d).map(|i| (0..2 * d).map(|j| s[(i, j)]).collect()).collect();
    Ok(PinchTensorReport { s_matrix, a_positive, predicate })
}

/// Where the ambient curvature in the λ-evolution comes from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CurvatureSource {
    GrassmannClosedForm,
    Flat { c: f64 },
    Engine { space: SpaceKind },
}

/// Curvature term of the λ-evolution for a symplectic spectrum.
pub fn flow_curvature_term(lambda: &PinchSpectrum, source: &CurvatureSource) -> Result<f64> {
    if lambda.mode != PairingMode::Symplectic {
        return Err(Error::InvalidSpectrum("flow term needs a symplectic spectrum".into()));
    }
    let l = &lambda.lambdas;
    match source {
        CurvatureSource::GrassmannClosedForm => Ok(l
            .chunks(2)
            .map(|p| {
                let x = (p[1] * p[1] - 1.0) / (1.0 + p[1] * p[1]);
                4.0 * x * x
            })
            .sum()),
        CurvatureSource::Flat { c } => Ok(c * l
            .iter()
            .step_by(2)
            .map(|x| {
                let y = (1.0 - x * x) / (1.0 + x * x);
                y * y
            })
            .sum::<f64>()),
        CurvatureSource::Engine { space } => {
            let SpaceKind::GrassmannI { n, m } = *space else {
                return Err(Error::UnsupportedSpace(format!("engine flow term needs GrassmannI, got {space}")));
            };
            if l.len() != 2 * n * m {
                return Err(Error::DimensionMismatch(format!(
                    "spectrum of length {} for {space} (needs {})",
                    l.len(),
                    2 * n * m
                )));
            }
            let table: Vec<Vec<Rational64>> = frame_sectional_table(space)?;
            let mut acc = 0.0;
            for k in 0..l.len() {
                for i in 0..l.len() {
                    if i == k {
                        continue;
                    }
                    let r = table[i][k].to_f64();
                    acc += l[i] * (r - l[k] * l[k] * r) / ((1.0 + l[k] * l[k]) * (l[i] + l[partner(i)]));
                }
            }
            Ok(acc)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRow {
    pub big_lambda: f64,
    /// Search result on this box alone.
    pub raw: f64,
    /// min over this and all smaller boxes of the grid. Boxes are nested, so
    /// every point seen for a smaller Λ is admissible here too.
    pub delta: f64,
    pub lambda_prime: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub n_pairs: usize,
    pub options: SearchOptions,
    pub rows: Vec<ConstantsRow>,
    pub lambda0: Lambda0,
    pub lambda1: Extended,
    /// Exponent n used for Λ′_n and Λ₁(n).
    pub n: u32,
}

/// δ_Λ along an increasing grid, Λ₀ by bisection, Λ₁(n, Λ₀) and Λ′_n.
pub fn constants_report(
    n_pairs: usize,
    opts: &SearchOptions,
    grid: &[f64],
    n: u32,
    probe: f64,
    bisect_tol: f64,
) -> Result<ConstantsReport> {
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    let mut rows = Vec::with_capacity(grid.len());
    let mut running = f64::INFINITY;
    for &l in &grid {
        let raw = delta_big_lambda(l, n_pairs, opts)?.value;
        running = running.min(raw);
        rows.push(ConstantsRow { big_lambda: l, raw, delta: running, lambda_prime: lambda_prime(l, n)? });
    }
    let l0 = lambda0(n_pairs, opts, probe, bisect_tol)?;
    let l1 = lambda1(n, l0.as_extended())?;
    Ok(ConstantsReport { n_pairs, options: *opts, rows, lambda0: l0, lambda1: l1, n })
}
