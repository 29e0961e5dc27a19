//! Dense complex polynomials, coefficients in ascending order.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

pub fn eval(p: &[C64], x: C64) -> C64 {
    p.iter().rev().fold(C64::new(0.0, 0.0), |acc, &c| acc * x + c)
}

pub fn derivative(p: &[C64]) -> Vec<C64> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &c)| c * k as f64)
        .collect()
}

pub fn mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| a.get(k).copied().unwrap_or_default() - b.get(k).copied().unwrap_or_default())
        .collect()
}

/// Drops leading coefficients that are negligible relative to the largest one.
pub fn trim(p: &[C64], rel: f64) -> Vec<C64> {
    let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut out = p.to_vec();
    while let Some(last) = out.last() {
        if last.norm() <= rel * scale {
            out.pop();
        } else {
            break;
        }
    }
    out
}

pub fn degree(p: &[C64]) -> Option<usize> {
    let t = trim(p, 0.0);
    if t.is_empty() {
        None
    } else {
        Some(t.len() - 1)
    }
}

/// Monic polynomial with the given roots.
pub fn from_roots(roots: &[C64]) -> Vec<C64> {
    roots
        .iter()
        .fold(vec![C64::new(1.0, 0.0)], |acc, &r| mul(&acc, &[-r, C64::new(1.0, 0.0)]))
}

/// Roots via companion-matrix eigenvalues, polished by Newton steps.
pub fn roots(p: &[C64], rel_trim: f64) -> Vec<C64> {
    let p = trim(p, rel_trim);
    if p.len() < 2 {
        return Vec::new();
    }
    let n = p.len() - 1;
    let lead = p[n];
    let mut comp = DMatrix::<C64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    for i in 0..n {
        comp[(i, n - 1)] = -p[i] / lead;
    }
    let eig = comp
        .clone()
        .schur()
        .eigenvalues()
        .map(|v| v.iter().copied().collect::<Vec<_>>())
        .unwrap_or_default();
    let dp = derivative(&p);
    eig.into_iter()
        .map(|mut r| {
            for _ in 0..8 {
                let d = eval(&dp, r);
                if d.norm() == 0.0 {
                    break;
                }
                let step = eval(&p, r) / d;
                r -= step;
                if step.norm() <= 1e-16 * (1.0 + r.norm()) {
                    break;
                }
            }
            r
        })
        .collect()
}

/// Taylor re-expansion: coefficients of p(x0 + u) in powers of u.
pub fn shift(p: &[C64], x0: C64) -> Vec<C64> {
    let mut c = p.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let t = c[j + 1] * x0;
            c[j] += t;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn roots_of_product_recovered() {
        let rs = [c(2.0, 0.0), c(-1.0, 0.5), c(0.0, -3.0)];
        let p = from_roots(&rs);
        let mut found = roots(&p, 1e-14);
        found.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        let mut want = rs.to_vec();
        want.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (a, b) in found.iter().zip(&want) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn shift_matches_evaluation() {
        let p = vec![c(1.0, 0.0), c(-2.0, 1.0), c(0.5, 0.0), c(3.0, -1.0)];
        let x0 = c(0.3, -0.7);
        let q = shift(&p, x0);
        for u in [c(0.1, 0.2), c(-1.0, 0.5)] {
            assert!((eval(&q, u) - eval(&p, x0 + u)).norm() < 1e-12);
        }
    }
}
