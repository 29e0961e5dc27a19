//! Gauss–Legendre rules and adaptive integration of vector-valued integrands.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Fixed rule on [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(m + h * x))
            .sum::<f64>()
            * h
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

fn panel_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(16))
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_depth: u32,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self { abs: 1e-13, rel: 1e-11, max_depth: 40 }
    }
}

#[derive(Debug, Clone)]
pub struct VecIntegral {
    pub value: Vec<C64>,
    pub error: f64,
}

fn panel<F: FnMut(f64) -> Vec<C64>>(f: &mut F, a: f64, b: f64, dim: usize) -> Vec<C64> {
    let rule = panel_rule();
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    let mut acc = vec![C64::new(0.0, 0.0); dim];
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let v = f(m + h * x);
        for (s, fv) in acc.iter_mut().zip(v) {
            *s += fv * (w * h);
        }
    }
    acc
}

fn max_norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Adaptive bisection on [a, b] starting from `initial` equal panels; each panel
/// is accepted when the one-panel and two-half-panel estimates agree.
pub fn adaptive<F: FnMut(f64) -> Vec<C64>>(
    mut f: F,
    a: f64,
    b: f64,
    dim: usize,
    initial: usize,
    tol: Tolerance,
) -> VecIntegral {
    let n0 = initial.max(1);
    let width = (b - a) / n0 as f64;
    let mut stack: Vec<(f64, f64, Vec<C64>, u32)> = (0..n0)
        .map(|k| {
            let (lo, hi) = (a + k as f64 * width, a + (k + 1) as f64 * width);
            let est = panel(&mut f, lo, hi, dim);
            (lo, hi, est, 0)
        })
        .collect();
    let scale = stack
        .iter()
        .fold(vec![C64::new(0.0, 0.0); dim], |mut s, p| {
            for (x, y) in s.iter_mut().zip(&p.2) {
                *x += y;
            }
            s
        });
    let target = tol.abs.max(tol.rel * max_norm(&scale));
    let total_len = (b - a).abs().max(f64::MIN_POSITIVE);
    let mut value = vec![C64::new(0.0, 0.0); dim];
    let mut error = 0.0;
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = panel(&mut f, lo, mid, dim);
        let right = panel(&mut f, mid, hi, dim);
        let diff = whole
            .iter()
            .zip(left.iter().zip(&right))
            .map(|(w, (l, r))| (w - l - r).norm())
            .fold(0.0, f64::max);
        let allowed = target * ((hi - lo).abs() / total_len).max(1e-3);
        if diff <= allowed || depth >= tol.max_depth {
            for (v, (l, r)) in value.iter_mut().zip(left.iter().zip(&right)) {
                *v += l + r;
            }
            error += diff;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
    }
    VecIntegral { value, error }
}

/// Trapezoid rule over one period of `f(θ)`, θ ∈ [0, 2π).
pub fn periodic<F: FnMut(f64) -> Vec<C64>>(mut f: F, nodes: usize, dim: usize) -> Vec<C64> {
    let mut acc = vec![C64::new(0.0, 0.0); dim];
    let h = 2.0 * PI / nodes as f64;
    for k in 0..nodes {
        for (s, v) in acc.iter_mut().zip(f(k as f64 * h)) {
            *s += v * h;
        }
    }
    acc
}
