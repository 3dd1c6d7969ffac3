//! Curvature of the compact irreducible Hermitian symmetric spaces of
//! classical type at the origin of their standard charts.
//!
//! Component queries are exact ([`Rational64`]). Real four-tensors are
//! evaluated by expanding each real tangent vector into holomorphic and
//! antiholomorphic coordinate slots and contracting against the component
//! table, generically over [`Scalar`] so that rational inputs give exact
//! results.

mod conditions;
mod display;

use std::fmt;
use std::ops::Neg;

use num::complex::Complex;
use num::rational::Rational64;
use num::traits::{Num, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use conditions::{condition_report, isotropy_frame, random_tangent, unitary_frame, ConditionReport};
pub use display::{hol_sect_general, metric_real};

/// Field of scalars a curvature contraction can run over.
pub trait Scalar: Clone + fmt::Debug + PartialEq + Num + Neg<Output = Self> {
    fn ratio(num: i64, den: i64) -> Self;
    fn to_f64(&self) -> f64;
}

impl Scalar for f64 {
    fn ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for Rational64 {
    fn ratio(num: i64, den: i64) -> Self {
        Rational64::new(num, den)
    }
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// The four classical families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum SpaceKind {
    /// Complex Grassmannian of n-planes in C^{n+m}.
    GrassmannI { n: usize, m: usize },
    /// Skew-symmetric type, a totally geodesic subspace of G(n, 2n).
    SkewII { n: usize },
    /// Symmetric type, a totally geodesic subspace of G(n, 2n).
    SymIII { n: usize },
    /// Complex quadric of dimension n.
    QuadricIV { n: usize },
}

impl fmt::Display for SpaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceKind::GrassmannI { n, m } => write!(f, "GrassmannI({n},{m})"),
            SpaceKind::SkewII { n } => write!(f, "SkewII({n})"),
            SpaceKind::SymIII { n } => write!(f, "SymIII({n})"),
            SpaceKind::QuadricIV { n } => write!(f, "QuadricIV({n})"),
        }
    }
}

impl SpaceKind {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SpaceKind::GrassmannI { n, m } => n >= 1 && m >= 1,
            SpaceKind::SkewII { n } | SpaceKind::SymIII { n } => n >= 2,
            SpaceKind::QuadricIV { n } => n >= 3,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidSpace(self.to_string()))
        }
    }

    /// Shape of a tangent matrix. The quadric uses a 1×n row vector.
    pub fn shape(&self) -> (usize, usize) {
        match *self {
            SpaceKind::GrassmannI { n, m } => (n, m),
            SpaceKind::SkewII { n } | SpaceKind::SymIII { n } => (n, n),
            SpaceKind::QuadricIV { n } => (1, n),
        }
    }

    /// Complex dimension.
    pub fn complex_dim(&self) -> usize {
        match *self {
            SpaceKind::GrassmannI { n, m } => n * m,
            SpaceKind::SkewII { n } => n * (n - 1) / 2,
            SpaceKind::SymIII { n } => n * (n + 1) / 2,
            SpaceKind::QuadricIV { n } => n,
        }
    }

    /// The space whose component table the real contractions use. Types II
    /// and III sit inside G(n, 2n) and inherit its curvature.
    fn ambient(&self) -> SpaceKind {
        match *self {
            SpaceKind::SkewII { n } | SpaceKind::SymIII { n } => SpaceKind::GrassmannI { n, m: n },
            other => other,
        }
    }

    fn metric_weight(&self) -> i64 {
        match self {
            SpaceKind::QuadricIV { .. } => 2,
            _ => 1,
        }
    }

    /// Checks shape and skew/symmetric structure. Exact for rational
    /// entries, 1e-12 for floating point.
    pub fn check<F: Scalar>(&self, t: &TangentMatrix<F>) -> Result<()> {
        let (r, c) = self.shape();
        if t.rows != r || t.cols != c {
            return Err(Error::ShapeMismatch(format!("{self} needs {r}x{c}, got {}x{}", t.rows, t.cols)));
        }
        let sign = match self {
            SpaceKind::SkewII { .. } => -1,
            SpaceKind::SymIII { .. } => 1,
            _ => return Ok(()),
        };
        for i in 0..r {
            for j in 0..r {
                let a = t.get(i, j);
                let b = t.get(j, i);
                let d = if sign > 0 { a.clone() - b.clone() } else { a.clone() + b.clone() };
                if d.re.to_f64().abs() > 1e-12 || d.im.to_f64().abs() > 1e-12 {
                    return Err(Error::StructureViolation(format!(
                        "{self}: entries ({i},{j}) and ({j},{i}) break the required symmetry"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Holomorphic coordinate vectors d/dZ of the standard chart, as tangent
    /// matrices. For types II and III a coordinate moves both mirrored
    /// entries.
    pub fn coordinate_vectors<F: Scalar>(&self) -> Vec<TangentMatrix<F>> {
        let (r, c) = self.shape();
        let one = || Complex::new(F::one(), F::zero());
        let mut out = Vec::new();
        match *self {
            SpaceKind::GrassmannI { .. } | SpaceKind::QuadricIV { .. } => {
                for i in 0..r {
                    for j in 0..c {
                        out.push(TangentMatrix::unit(r, c, i, j));
                    }
                }
            }
            SpaceKind::SkewII { n } => {
                for i in 0..n {
                    for j in i + 1..n {
                        let mut t = TangentMatrix::zeros(n, n);
                        t.set(i, j, one());
                        t.set(j, i, -one());
                        out.push(t);
                    }
                }
            }
            SpaceKind::SymIII { n } => {
                for i in 0..n {
                    for j in i..n {
                        let mut t = TangentMatrix::zeros(n, n);
                        t.set(i, j, one());
                        t.set(j, i, one());
                        out.push(t);
                    }
                }
            }
        }
        out
    }
}

/// Complex matrix encoding the real tangent vector
/// sum Re(T^{kl}) d/dX^{kl} + Im(T^{kl}) d/dY^{kl}.
#[derive(Clone, Debug, PartialEq)]
pub struct TangentMatrix<F = f64> {
    rows: usize,
    cols: usize,
    entries: Vec<Complex<F>>,
}

impl<F: Scalar> TangentMatrix<F> {
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex<F>>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!("{} entries for a {rows}x{cols} matrix", entries.len())));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![Complex::new(F::zero(), F::zero()); rows * cols] }
    }

    /// The matrix unit E_{rc} (0-based).
    pub fn unit(rows: usize, cols: usize, r: usize, c: usize) -> Self {
        let mut t = Self::zeros(rows, cols);
        t.set(r, c, Complex::new(F::one(), F::zero()));
        t
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Complex<F>] {
        &self.entries
    }

    pub fn get(&self, r: usize, c: usize) -> &Complex<F> {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex<F>) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn scale(&self, s: &Complex<F>) -> Self {
        let entries = self.entries.iter().map(|e| e.clone() * s.clone()).collect();
        Self { rows: self.rows, cols: self.cols, entries }
    }

    /// The complex structure J, i.e. multiplication by i.
    pub fn times_i(&self) -> Self {
        self.scale(&Complex::new(F::zero(), F::one()))
    }

    pub fn add(&self, other: &Self) -> Self {
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a.clone() + b.clone()).collect();
        Self { rows: self.rows, cols: self.cols, entries }
    }
}

impl TangentMatrix<f64> {
    pub fn from_rational(t: &TangentMatrix<Rational64>) -> Self {
        let entries = t.entries.iter().map(|z| Complex::new(z.re.to_f64(), z.im.to_f64())).collect();
        Self { rows: t.rows, cols: t.cols, entries }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }
}

/// One slot of a component query: a 1-based entry position of the tangent
/// matrix and whether the slot is antiholomorphic. Quadric entries use
/// `row = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slot {
    pub row: usize,
    pub col: usize,
    pub conj: bool,
}

impl Slot {
    pub fn holo(row: usize, col: usize) -> Self {
        Self { row, col, conj: false }
    }
    pub fn anti(row: usize, col: usize) -> Self {
        Self { row, col, conj: true }
    }
}

/// Four slots of a curvature component R(slot1, slot2, slot3, slot4).
pub type IndexQuad = [Slot; 4];

fn delta(a: usize, b: usize) -> i64 {
    (a == b) as i64
}

/// R_{A B̄ C D̄} with A, B, C, D entry positions, no validation.
fn holo_component(space: &SpaceKind, a: Slot, b: Slot, c: Slot, d: Slot) -> Rational64 {
    match space {
        SpaceKind::QuadricIV { .. } => {
            let (i, j, k, l) = (a.col, b.col, c.col, d.col);
            let v = delta(i, k) * delta(j, l) - delta(i, j) * delta(k, l) - delta(i, l) * delta(j, k);
            Rational64::from_integer(2 * v)
        }
        _ => {
            let (i, al) = (a.row, a.col);
            let (j, be) = (b.row, b.col);
            let (k, ga) = (c.row, c.col);
            let (h, de) = (d.row, d.col);
            let t1 = delta(i, j) * delta(k, h) * delta(al, de) * delta(be, ga);
            let t2 = delta(i, h) * delta(k, j) * delta(al, be) * delta(ga, de);
            Rational64::new(-(t1 + t2), 2)
        }
    }
}

/// Exact curvature component at the chart origin.
///
/// Slots (1,2) and (3,4) must each pair one holomorphic with one
/// antiholomorphic index, otherwise the component vanishes. Each pair is
/// brought to (holomorphic, antiholomorphic) order, one sign flip per swap.
pub fn curvature_component(space: &SpaceKind, quad: &IndexQuad) -> Result<Rational64> {
    space.validate()?;
    let (rows, cols) = space.shape();
    for s in quad {
        if s.row < 1 || s.row > rows || s.col < 1 || s.col > cols {
            return Err(Error::IndexOutOfRange(format!("({}, {}) outside {rows}x{cols} for {space}", s.row, s.col)));
        }
        let legal = match space {
            SpaceKind::SkewII { .. } => s.row < s.col,
            SpaceKind::SymIII { .. } => s.row <= s.col,
            _ => true,
        };
        if !legal {
            return Err(Error::StructureViolation(format!(
                "index pair ({}, {}) is not a chart coordinate of {space}",
                s.row, s.col
            )));
        }
    }
    if quad[0].conj == quad[1].conj || quad[2].conj == quad[3].conj {
        return Ok(Rational64::zero());
    }
    let mut sign = 1;
    let (a, b) = if quad[0].conj {
        sign = -sign;
        (quad[1], quad[0])
    } else {
        (quad[0], quad[1])
    };
    let (c, d) = if quad[2].conj {
        sign = -sign;
        (quad[3], quad[2])
    } else {
        (quad[2], quad[3])
    };
    Ok(holo_component(space, a, b, c, d) * Rational64::from_integer(sign))
}

/// Precomputed nonzero components of a space, used for repeated
/// contractions.
#[derive(Clone, Debug)]
pub struct CurvatureEngine {
    space: SpaceKind,
    table: Vec<([usize; 4], Rational64)>,
}

impl CurvatureEngine {
    pub fn new(space: SpaceKind) -> Result<Self> {
        space.validate()?;
        let amb = space.ambient();
        let (rows, cols) = amb.shape();
        let dim = rows * cols;
        let slot = |f: usize, conj: bool| Slot { row: f / cols + 1, col: f % cols + 1, conj };
        let mut table = Vec::new();
        for a in 0..dim {
            for b in 0..dim {
                for c in 0..dim {
                    for d in 0..dim {
                        let quad = [slot(a, false), slot(b, true), slot(c, false), slot(d, true)];
                        let v = curvature_component(&amb, &quad)?;
                        if !v.is_zero() {
                            table.push(([a, b, c, d], v));
                        }
                    }
                }
            }
        }
        Ok(Self { space, table })
    }

    pub fn space(&self) -> SpaceKind {
        self.space
    }

    /// sum R_{A B̄ C D̄} a^A conj(b^B) c^C conj(d^D)
    pub fn holomorphic_contraction<F: Scalar>(
        &self,
        a: &TangentMatrix<F>,
        b: &TangentMatrix<F>,
        c: &TangentMatrix<F>,
        d: &TangentMatrix<F>,
    ) -> Complex<F> {
        let (a, b, c, d) = (&a.entries, &b.entries, &c.entries, &d.entries);
        let mut acc = Complex::new(F::zero(), F::zero());
        for ([i, j, k, h], v) in &self.table {
            let w = F::ratio(*v.numer(), *v.denom());
            acc = acc + a[*i].clone() * b[*j].conj() * c[*k].clone() * d[*h].conj() * w;
        }
        acc
    }

    /// R(X1, X2, X3, X4) for the real vectors encoded by the tangent
    /// matrices. The four slot patterns with one holomorphic and one
    /// antiholomorphic index in each pair contribute.
    pub fn real<F: Scalar>(&self, t: [&TangentMatrix<F>; 4]) -> Result<F> {
        for m in t {
            self.space.check(m)?;
        }
        let [t1, t2, t3, t4] = t;
        let r = self.holomorphic_contraction(t1, t2, t3, t4)
            - self.holomorphic_contraction(t1, t2, t4, t3)
            - self.holomorphic_contraction(t2, t1, t3, t4)
            + self.holomorphic_contraction(t2, t1, t4, t3);
        Ok(r.re)
    }

    /// g(T1, T2) at the chart origin.
    pub fn metric<F: Scalar>(&self, t1: &TangentMatrix<F>, t2: &TangentMatrix<F>) -> F {
        let mut acc = F::zero();
        for (a, b) in t1.entries.iter().zip(&t2.entries) {
            acc = acc + (a.clone() * b.conj()).re;
        }
        acc * F::ratio(self.space.metric_weight(), 1)
    }

    /// R(X, JX, X, JX) / g(X, X)^2.
    pub fn holomorphic_sectional<F: Scalar>(&self, t: &TangentMatrix<F>) -> Result<F> {
        self.space.check(t)?;
        let g = self.metric(t, t);
        if g.is_zero() {
            return Err(Error::ZeroVector);
        }
        let jt = t.times_i();
        let r = self.real([t, &jt, t, &jt])?;
        Ok(r / (g.clone() * g))
    }
}

pub fn curvature_real<F: Scalar>(
    space: &SpaceKind,
    t1: &TangentMatrix<F>,
    t2: &TangentMatrix<F>,
    t3: &TangentMatrix<F>,
    t4: &TangentMatrix<F>,
) -> Result<F> {
    CurvatureEngine::new(*space)?.real([t1, t2, t3, t4])
}

pub fn holomorphic_sectional<F: Scalar>(space: &SpaceKind, t: &TangentMatrix<F>) -> Result<F> {
    CurvatureEngine::new(*space)?.holomorphic_sectional(t)
}

/// Matrix-basis frame of GrassmannI(n, m): a^{2k-1} = E_{kl}, a^{2k} = iE_{kl},
/// with (k, l) flattened row-major.
pub fn matrix_frame(n: usize, m: usize) -> Vec<TangentMatrix<Rational64>> {
    let mut out = Vec::with_capacity(2 * n * m);
    for k in 0..n {
        for l in 0..m {
            let e = TangentMatrix::unit(n, m, k, l);
            let f = e.times_i();
            out.push(e);
            out.push(f);
        }
    }
    out
}

/// R(e_i, f_j, e_i, f_j) - R(e_i, e_j, e_i, e_j) on the matrix-basis frame,
/// 1-based frame indices.
pub fn curvature_gap(space: &SpaceKind, i: usize, j: usize) -> Result<Rational64> {
    let SpaceKind::GrassmannI { n, m } = *space else {
        return Err(Error::UnsupportedSpace(format!("curvature_gap needs GrassmannI, got {space}")));
    };
    space.validate()?;
    let dim = n * m;
    if i < 1 || j < 1 || i > dim || j > dim {
        return Err(Error::IndexOutOfRange(format!("({i}, {j}) outside 1..={dim}")));
    }
    let eng = CurvatureEngine::new(*space)?;
    let frame = matrix_frame(n, m);
    let ei = &frame[2 * (i - 1)];
    let ej = &frame[2 * (j - 1)];
    let fj = &frame[2 * (j - 1) + 1];
    Ok(eng.real([ei, fj, ei, fj])? - eng.real([ei, ej, ei, ej])?)
}

/// R(a^i, a^k, a^i, a^k) for all pairs of the matrix-basis frame.
pub fn frame_sectional_table(space: &SpaceKind) -> Result<Vec<Vec<Rational64>>> {
    let SpaceKind::GrassmannI { n, m } = *space else {
        return Err(Error::UnsupportedSpace(format!("matrix-basis frame needs GrassmannI, got {space}")));
    };
    let eng = CurvatureEngine::new(*space)?;
    let frame = matrix_frame(n, m);
    frame.iter().map(|a| frame.iter().map(|b| eng.real([a, b, a, b])).collect()).collect()
}

/// Both sides of R(dx^s, dy^r, dx^s, dy^r) - R(dx^s, dx^r, dx^s, dx^r) =
/// -4 Re R_{r s̄ r s̄} in the chart coordinates of `space` (0-based r, s).
pub fn coordinate_gap_identity(space: &SpaceKind, r: usize, s: usize) -> Result<(Rational64, Rational64)> {
    let eng = CurvatureEngine::new(*space)?;
    let coords = space.coordinate_vectors::<Rational64>();
    let d = coords.len();
    if r >= d || s >= d {
        return Err(Error::IndexOutOfRange(format!("({r}, {s}) outside 0..{d}")));
    }
    let xs = &coords[s];
    let xr = &coords[r];
    let yr = xr.times_i();
    let lhs = eng.real([xs, &yr, xs, &yr])? - eng.real([xs, xr, xs, xr])?;
    let rsrs = eng.holomorphic_contraction(xr, xs, xr, xs);
    Ok((lhs, Rational64::from_integer(-4) * rsrs.re))
}
