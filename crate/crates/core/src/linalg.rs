//! Small helpers over `nalgebra` complex matrices.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub type CMat = DMatrix<C64>;

pub fn zeros(r: usize, c: usize) -> CMat {
    CMat::zeros(r, c)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn norm(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::PeriodSolveFailure("singular matrix".into()))
}

pub fn conj(m: &CMat) -> CMat {
    m.map(|c| c.conj())
}

/// Relative Frobenius distance ‖a − b‖ / max(‖b‖, tiny).
pub fn rel_diff(a: &CMat, b: &CMat) -> f64 {
    norm(&(a - b)) / norm(b).max(1e-300)
}

/// Eigenvalues of a general complex matrix.
pub fn eigenvalues(m: &CMat) -> Vec<C64> {
    m.clone()
        .schur()
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .unwrap_or_default()
}

/// Row-major nested `[re, im]` representation used in JSON output.
pub fn to_rows(m: &CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

pub fn from_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMat> {
    let r = rows.len();
    let c = rows.first().map_or(0, |x| x.len());
    if rows.iter().any(|row| row.len() != c) {
        return Err(Error::Validation("ragged matrix".into()));
    }
    Ok(CMat::from_fn(r, c, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}
