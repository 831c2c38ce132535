//! Dense complex linear algebra helpers shared by the modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .cloned()
        .fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    frobenius(&(m - m.adjoint()))
}

/// Max-entry distance between two matrices.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `S†S - I` and `SS† - I` in Frobenius norm, whichever is larger.
pub fn unitarity_defect(s: &CMatrix) -> f64 {
    let id = identity(s.nrows());
    let a = frobenius(&(s.adjoint() * s - &id));
    let b = frobenius(&(s * s.adjoint() - &id));
    a.max(b)
}

/// Inverse via LU with partial pivoting. Fails when a pivot is numerically zero.
pub fn inverse(m: &CMatrix, what: &str) -> Result<CMatrix> {
    let n = m.nrows();
    let lu = m.clone().lu();
    let u = lu.u();
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let min_pivot = (0..n).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if n > 0 && min_pivot <= 1e-14 * scale {
        return Err(Error::Singular(format!("{what}: pivot {min_pivot:e}")));
    }
    lu.try_inverse()
        .ok_or_else(|| Error::Singular(what.to_string()))
}

/// Solves `X A = B` for `X`.
pub fn solve_right(a: &CMatrix, b: &CMatrix, what: &str) -> Result<CMatrix> {
    // X A = B  <=>  A^T X^T = B^T
    let at = a.transpose();
    let lu = at.clone().lu();
    let u = lu.u();
    let n = a.nrows();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let min_pivot = (0..n).map(|i| u[(i, i)].norm()).fold(f64::INFINITY, f64::min);
    if n > 0 && min_pivot <= 1e-14 * scale {
        return Err(Error::Singular(format!("{what}: pivot {min_pivot:e}")));
    }
    let xt = lu
        .solve(&b.transpose())
        .ok_or_else(|| Error::Singular(what.to_string()))?;
    Ok(xt.transpose())
}

pub fn ensure_square(m: &CMatrix, d: usize) -> Result<()> {
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: if m.nrows() != d { m.nrows() } else { m.ncols() },
        });
    }
    Ok(())
}

/// Weighted Euclidean norm `sqrt(w * Σ|z|²)`.
pub fn weighted_norm(values: &[C64], weight: f64) -> f64 {
    (weight * values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

/// Parses complex literals such as `2`, `-1.5i`, `0.5-0.25i`, `1e-3+2e-1i`.
pub fn parse_complex(text: &str) -> Result<C64> {
    let s: String = text.chars().filter(|ch| !ch.is_whitespace()).collect();
    let bad = || Error::InvalidArgument(format!("invalid complex literal '{text}'"));
    if s.is_empty() {
        return Err(bad());
    }
    if let Some(body) = s.strip_suffix('i').or_else(|| s.strip_suffix('j')) {
        // find the split between real and imaginary parts: last +/- not after an exponent
        let bytes = body.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            let ch = bytes[idx];
            if (ch == b'+' || ch == b'-') && !matches!(bytes[idx - 1], b'e' | b'E') {
                split = Some(idx);
                break;
            }
        }
        let parse_imag = |t: &str| -> Result<f64> {
            match t {
                "" | "+" => Ok(1.0),
                "-" => Ok(-1.0),
                _ => t.parse::<f64>().map_err(|_| bad()),
            }
        };
        match split {
            Some(idx) => {
                let re = body[..idx].parse::<f64>().map_err(|_| bad())?;
                let im = parse_imag(&body[idx..])?;
                Ok(c(re, im))
            }
            None => Ok(c(0.0, parse_imag(body)?)),
        }
    } else {
        Ok(real(s.parse::<f64>().map_err(|_| bad())?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("2").unwrap(), c(2.0, 0.0));
        assert_eq!(parse_complex("-1.5i").unwrap(), c(0.0, -1.5));
        assert_eq!(parse_complex("0.5-0.25i").unwrap(), c(0.5, -0.25));
        assert_eq!(parse_complex("1e-3+2e-1i").unwrap(), c(1e-3, 0.2));
        assert_eq!(parse_complex("i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-1-i").unwrap(), c(-1.0, -1.0));
        assert_eq!(parse_complex(" 3 + 4i ").unwrap(), c(3.0, 4.0));
        assert!(parse_complex("abc").is_err());
        assert!(parse_complex("").is_err());
    }

    #[test]
    fn singular_inverse_is_reported() {
        let m = CMatrix::from_element(2, 2, real(1.0));
        assert!(matches!(inverse(&m, "test"), Err(Error::Singular(_))));
    }

    #[test]
    fn solve_right_matches_inverse() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.5), c(1.0, 1.0)]);
        let b = CMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, -1.0), c(0.0, -2.0)]);
        let x = solve_right(&a, &b, "t").unwrap();
        let y = &b * inverse(&a, "t").unwrap();
        assert!(max_abs_diff(&x, &y) < 1e-14);
    }
}
