//! Matrix exponential by scaling and squaring with a degree-13 Padé approximant.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::operator::Operator;
use crate::error::{Error, Result};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn norm1(a: &DMatrix<C64>) -> f64 {
    (0..a.ncols()).map(|c| a.column(c).iter().map(|v| v.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `exp(A)` for a dense complex matrix.
pub fn expm_dense(a: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    if a.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::InvalidDimension(format!("expm needs a square matrix, got {}x{}", n, a.ncols())));
    }
    let nrm = norm1(a);
    let s = if nrm > THETA13 { (nrm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = a * C64::new(2f64.powi(-s), 0.0);
    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let ident = DMatrix::<C64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9)) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &ident * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8)) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &ident * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).ok_or(Error::NonFinite)?;
    for _ in 0..s {
        r = &r * &r;
    }
    if r.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(r)
}

/// Matrix exponential of an operator; storage follows the usual size rule.
pub fn expm(op: &Operator) -> Result<Operator> {
    Operator::from_dense(op.space().clone(), expm_dense(&op.to_dense())?)
}
