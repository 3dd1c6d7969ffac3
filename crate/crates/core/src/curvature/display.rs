//! Closed-form trace expressions at a general chart point.

use nalgebra::DMatrix;
use num::complex::Complex;

use super::{SpaceKind, TangentMatrix};
use crate::error::{Error, Result};

type CMat = DMatrix<Complex<f64>>;

fn mat(t: &TangentMatrix<f64>) -> CMat {
    DMatrix::from_row_slice(t.rows(), t.cols(), t.entries())
}

fn conj(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

fn inverse(m: CMat) -> Result<CMat> {
    m.try_inverse().ok_or_else(|| Error::UnsupportedPoint("chart factor is singular".into()))
}

fn identity(k: usize) -> CMat {
    CMat::identity(k, k)
}

/// g_Z(T1, T2) at the chart point Z.
///
/// Types I, II and III use Re Tr[(I+ZZ̄')^{-1} T1 (I+Z̄'Z)^{-1} T̄2'], the
/// quadric uses the Levi form of ln(1 + |ZZ'|^2 + 2ZZ̄').
pub fn metric_real(
    space: &SpaceKind,
    z: &TangentMatrix<f64>,
    t1: &TangentMatrix<f64>,
    t2: &TangentMatrix<f64>,
) -> Result<f64> {
    space.validate()?;
    space.check(z)?;
    space.check(t1)?;
    space.check(t2)?;
    if let SpaceKind::QuadricIV { n } = *space {
        let zs = z.entries();
        let s: Complex<f64> = zs.iter().map(|w| w * w).sum();
        let q: f64 = zs.iter().map(|w| w.norm_sqr()).sum();
        let phi = 1.0 + s.norm_sqr() + 2.0 * q;
        // d_i phi and dbar_j phi
        let d: Vec<Complex<f64>> = zs.iter().map(|w| 2.0 * w * s.conj() + 2.0 * w.conj()).collect();
        let mut acc = Complex::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let ddbar = 4.0 * zs[i] * zs[j].conj() + if i == j { 2.0 } else { 0.0 };
                let h = ddbar / phi - d[i] * d[j].conj() / (phi * phi);
                acc += h * t1.entries()[i] * t2.entries()[j].conj();
            }
        }
        return Ok(acc.re);
    }
    let zm = mat(z);
    let (r, c) = space.shape();
    let zh = zm.adjoint();
    let p = inverse(identity(r) + &zm * &zh)?;
    let q = inverse(identity(c) + &zh * &zm)?;
    let m = p * mat(t1) * q * mat(t2).adjoint();
    Ok(m.trace().re)
}

/// Trace-ratio holomorphic sectional curvature 2Tr(M²)/Tr(M)² as displayed
/// for the classical families; the quadric formula is only available at
/// Z = 0. These are half of [`super::holomorphic_sectional`].
pub fn hol_sect_general(space: &SpaceKind, z: &TangentMatrix<f64>, t: &TangentMatrix<f64>) -> Result<f64> {
    space.validate()?;
    space.check(z)?;
    space.check(t)?;
    if t.norm_sqr() == 0.0 {
        return Err(Error::ZeroVector);
    }
    let zm = mat(z);
    let tm = mat(t);
    let (r, c) = space.shape();
    let m = match space {
        SpaceKind::GrassmannI { .. } => {
            let zh = zm.adjoint();
            let p = inverse(identity(r) + &zm * &zh)?;
            let q = inverse(identity(c) + &zh * &zm)?;
            p * &tm * q * tm.adjoint()
        }
        SpaceKind::SkewII { .. } => {
            let zb = conj(&zm);
            let p = inverse(identity(r) - &zm * &zb)?;
            let q = inverse(identity(r) - &zb * &zm)?;
            p * &tm * q * conj(&tm)
        }
        SpaceKind::SymIII { .. } => {
            let zb = conj(&zm);
            let p = inverse(identity(r) + &zm * &zb)?;
            let q = inverse(identity(r) + &zb * &zm)?;
            p * &tm * q * conj(&tm)
        }
        SpaceKind::QuadricIV { .. } => {
            if z.norm_sqr() != 0.0 {
                return Err(Error::UnsupportedPoint("quadric formula is given at Z = 0 only".into()));
            }
            let tt: f64 = t.entries().iter().map(|w| w.norm_sqr()).sum();
            let ttp: Complex<f64> = t.entries().iter().map(|w| w * w).sum();
            return Ok((2.0 * tt * tt - ttp.norm_sqr()) / (tt * tt));
        }
    };
    let tr = m.trace();
    let num = (&m * &m).trace();
    Ok((2.0 * num / (tr * tr)).re)
}
