//! Random frames and the three curvature conditions (A), (B), (C).

use nalgebra::DMatrix;
use num::complex::Complex;
use num::rational::Rational64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{CurvatureEngine, Scalar, SpaceKind, TangentMatrix};
use crate::error::Result;
use crate::rng::seeded;

const FRAME_TOL: f64 = 1e-10;

type CMat = DMatrix<Complex<f64>>;

fn gaussian<R: Rng>(rng: &mut R) -> Complex<f64> {
    Complex::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn random_unitary<R: Rng>(k: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(k, k, |_, _| gaussian(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    // fix column phases so the distribution is Haar
    let mut q = q;
    for j in 0..k {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex::new(1.0, 0.0) };
        for i in 0..k {
            q[(i, j)] *= ph;
        }
    }
    q
}

fn random_rotation<R: Rng>(k: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(k, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut q = g.qr().q();
    if q.determinant() < 0.0 {
        for i in 0..k {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    q
}

fn to_mat(t: &TangentMatrix<f64>) -> CMat {
    DMatrix::from_row_slice(t.rows(), t.cols(), t.entries())
}

fn from_mat(m: &CMat) -> TangentMatrix<f64> {
    let mut t = TangentMatrix::zeros(m.nrows(), m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            t.set(i, j, m[(i, j)]);
        }
    }
    t
}

/// Gaussian random tangent vector with the structure of `space`, scaled to
/// unit length in the origin metric.
pub fn random_tangent<R: Rng>(space: &SpaceKind, rng: &mut R) -> TangentMatrix<f64> {
    let (r, c) = space.shape();
    let g = CMat::from_fn(r, c, |_, _| gaussian(rng));
    let m = match space {
        SpaceKind::SkewII { .. } => &g - g.transpose(),
        SpaceKind::SymIII { .. } => &g + g.transpose(),
        _ => g,
    };
    let t = from_mat(&m);
    let w = match space {
        SpaceKind::QuadricIV { .. } => 2.0,
        _ => 1.0,
    };
    let norm = (w * t.norm_sqr()).sqrt();
    t.scale(&Complex::new(1.0 / norm, 0.0))
}

/// Orthonormal unitary frame u_{2k-1} = a_k, u_{2k} = i a_k built from the
/// normalized chart coordinate vectors.
pub fn unitary_frame(space: &SpaceKind) -> Vec<TangentMatrix<f64>> {
    let eng_w = match space {
        SpaceKind::QuadricIV { .. } => 2.0,
        _ => 1.0,
    };
    let mut out = Vec::new();
    for a in space.coordinate_vectors::<Rational64>() {
        let a = TangentMatrix::from_rational(&a);
        let s = 1.0 / (eng_w * a.norm_sqr()).sqrt();
        let a = a.scale(&Complex::new(s, 0.0));
        let b = a.times_i();
        out.push(a);
        out.push(b);
    }
    out
}

/// The unitary frame moved by a random element of the isotropy group at
/// the origin: T -> U T V for type I, U T U' for types II and III, and
/// e^{iθ} T O' with O in SO(n) for the quadric.
pub fn isotropy_frame<R: Rng>(space: &SpaceKind, rng: &mut R) -> Vec<TangentMatrix<f64>> {
    let (r, c) = space.shape();
    let base = unitary_frame(space);
    let act: Box<dyn Fn(&CMat) -> CMat> = match space {
        SpaceKind::GrassmannI { .. } => {
            let u = random_unitary(r, rng);
            let v = random_unitary(c, rng);
            Box::new(move |t| &u * t * &v)
        }
        SpaceKind::SkewII { .. } | SpaceKind::SymIII { .. } => {
            let u = random_unitary(r, rng);
            Box::new(move |t| &u * t * u.transpose())
        }
        SpaceKind::QuadricIV { .. } => {
            let o = random_rotation(c, rng).map(|x| Complex::new(x, 0.0));
            let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let ph = Complex::from_polar(1.0, theta);
            Box::new(move |t| t * o.transpose() * ph)
        }
    };
    base.iter().map(|t| from_mat(&act(&to_mat(t)))).collect()
}

/// A frame from an arbitrary unitary change of the holomorphic basis. Not
/// induced by an isometry in general.
fn general_unitary_frame<R: Rng>(space: &SpaceKind, rng: &mut R) -> Vec<TangentMatrix<f64>> {
    let base: Vec<_> = unitary_frame(space).into_iter().step_by(2).collect();
    let d = base.len();
    let w = random_unitary(d, rng);
    let mut out = Vec::with_capacity(2 * d);
    for j in 0..d {
        let mut a = TangentMatrix::zeros(base[0].rows(), base[0].cols());
        for (k, b) in base.iter().enumerate() {
            a = a.add(&b.scale(&w[(k, j)]));
        }
        out.push(a.clone());
        out.push(a.times_i());
    }
    out
}

fn sectional_table(eng: &CurvatureEngine, frame: &[TangentMatrix<f64>]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(frame.len() * frame.len());
    for a in frame {
        for b in frame {
            out.push(eng.real([a, b, a, b])?);
        }
    }
    Ok(out)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub space: SpaceKind,
    /// (A) holds on frames moved by isotropy elements.
    pub a_ok: bool,
    pub a_max_deviation: f64,
    /// Same table comparison for arbitrary unitary frames, for contrast.
    pub general_frame_deviation: f64,
    /// (B): every Re R_{r s̄ r s̄} in chart coordinates is nonpositive.
    pub b_ok: bool,
    pub b_max_component: f64,
    /// (C): sampled minimum of H and, for GrassmannI, the value 4/min(n,m).
    pub c_sample_min: f64,
    pub c_analytic: Option<f64>,
    pub c_lower_bound: f64,
}

pub fn condition_report(space: &SpaceKind, sample_count: usize, seed: u64) -> Result<ConditionReport> {
    let eng = CurvatureEngine::new(*space)?;
    let samples = sample_count.max(1);
    let mut rng = seeded(seed);

    let base = sectional_table(&eng, &unitary_frame(space))?;
    let mut a_dev: f64 = 0.0;
    let mut gen_dev: f64 = 0.0;
    for _ in 0..samples {
        let t = sectional_table(&eng, &isotropy_frame(space, &mut rng))?;
        a_dev = a_dev.max(max_diff(&base, &t));
        let t = sectional_table(&eng, &general_unitary_frame(space, &mut rng))?;
        gen_dev = gen_dev.max(max_diff(&base, &t));
    }

    let coords = space.coordinate_vectors::<Rational64>();
    let mut b_max = f64::NEG_INFINITY;
    for xr in &coords {
        for xs in &coords {
            let v = eng.holomorphic_contraction(xr, xs, xr, xs).re;
            b_max = b_max.max(v.to_f64());
        }
    }

    let mut c_min = f64::INFINITY;
    for _ in 0..samples {
        let t = random_tangent(space, &mut rng);
        c_min = c_min.min(eng.holomorphic_sectional(&t)?);
    }
    let c_analytic = match *space {
        SpaceKind::GrassmannI { n, m } => Some(4.0 / n.min(m) as f64),
        _ => None,
    };
    Ok(ConditionReport {
        space: *space,
        a_ok: a_dev <= FRAME_TOL,
        a_max_deviation: a_dev,
        general_frame_deviation: gen_dev,
        b_ok: b_max <= 0.0,
        b_max_component: b_max,
        c_sample_min: c_min,
        c_analytic,
        c_lower_bound: c_analytic.unwrap_or(c_min),
    })
}
