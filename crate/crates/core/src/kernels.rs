//! Canonical bidifferential W and its relatives W_q, Ω (Schiffer) and B (Bergman),
//! normalized holomorphic differentials, the Riemann matrix, rotation coefficients
//! and the diagonal coefficient S^W.

use crate::covering::{cis, segments_intersect, Covering, CoveringKind, SurfacePoint};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::monodromy::predicted_spectrum;
use crate::poly;
use crate::quad::{self, GaussLegendre};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn c0() -> C64 {
    C64::new(0.0, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum KernelKind {
    #[default]
    W,
    Wq,
    Schiffer,
    Bergman,
}

/// Period data of a hyperelliptic surface of genus ≥ 1.
#[derive(Debug, Clone)]
pub struct Periods {
    /// `A_{km} = ∮_{a_k} ω̂_m`
    pub a: CMat,
    /// `B̂_{km} = ∮_{b_k} ω̂_m`
    pub b: CMat,
    /// Normalization `ω_j = Σ_m ω̂_m X_{mj}`.
    pub normalization: CMat,
    /// Riemann matrix 𝔹.
    pub riemann: CMat,
    /// Coefficients of the holomorphic correction `W = W₀ + Σ c_{kl} ω̂_k ω̂_l`.
    pub correction: CMat,
    /// `(Im 𝔹)⁻¹`
    pub im_inv: CMat,
    /// Whether the b-cycles were reversed to make Im 𝔹 positive definite.
    pub b_flipped: bool,
}

/// Frame data of a point on a hyperelliptic surface: `dλ = u·d(frame)`,
/// `dλ/y = v·d(frame)`.
#[derive(Debug, Clone, Copy)]
struct CurveFrame {
    lambda: C64,
    u: C64,
    v: C64,
    /// Ramification index of the chart (`Some(k)` for `x_k` charts).
    chart: Option<usize>,
    x: C64,
}

/// Evaluator of the canonical bidifferential and holomorphic differentials on a
/// fixed covering. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Surface {
    pub cov: Covering,
    pub periods: Option<Periods>,
    /// `f(λ) = Π(λ − λ_k)` for the hyperelliptic kind.
    f: Vec<C64>,
    /// Coefficients in `u` of `F(λ_i, λ_i + u)/u` for each i.
    f_shifted: Vec<Vec<C64>>,
}

impl Surface {
    pub fn new(cov: &Covering) -> Result<Self> {
        Self::with_nodes(cov, 256)
    }

    pub fn with_nodes(cov: &Covering, period_nodes: usize) -> Result<Self> {
        match cov.kind {
            CoveringKind::Hyperelliptic => {
                let f = cov.curve_poly();
                let mut s = Surface { cov: cov.clone(), periods: None, f, f_shifted: Vec::new() };
                s.f_shifted = (0..cov.n()).map(|i| s.shifted_f(i)).collect();
                if cov.genus > 0 {
                    s.periods = Some(s.compute_periods(period_nodes)?);
                }
                Ok(s)
            }
            CoveringKind::Rational => {
                if cov.genus != 0 {
                    return Err(Error::Unsupported("rational covering with genus > 0".into()));
                }
                Ok(Surface { cov: cov.clone(), periods: None, f: Vec::new(), f_shifted: Vec::new() })
            }
            CoveringKind::DiagramOnly => Err(Error::Unsupported(
                "kernels need an explicit algebraic covering, not a sheet diagram".into(),
            )),
        }
    }

    pub fn genus(&self) -> usize {
        self.cov.genus
    }

    /// `F(x₁, x₂) = Σ x₁^i x₂^i (2 f_{2i} + f_{2i+1}(x₁ + x₂))`.
    pub fn big_f(&self, x1: C64, x2: C64) -> C64 {
        let g1 = self.cov.genus + 1;
        let coef = |k: usize| self.f.get(k).copied().unwrap_or_default();
        let mut acc = c0();
        let mut p = C64::new(1.0, 0.0);
        let prod = x1 * x2;
        for i in 0..=g1 {
            acc += p * (coef(2 * i) * 2.0 + coef(2 * i + 1) * (x1 + x2));
            p *= prod;
        }
        acc
    }

    fn shifted_f(&self, i: usize) -> Vec<C64> {
        let li = self.cov.branch_points[i];
        let g1 = self.cov.genus + 1;
        let coef = |k: usize| self.f.get(k).copied().unwrap_or_default();
        // F(λ_i, x₂) as a polynomial in x₂
        let mut p = vec![c0(); 2 * g1 + 3];
        for k in 0..=g1 {
            let lk = li.powu(k as u32);
            p[k] += lk * (coef(2 * k) * 2.0 + coef(2 * k + 1) * li);
            p[k + 1] += lk * coef(2 * k + 1);
        }
        let s = poly::shift(&p, li);
        s[1..].to_vec()
    }

    /// `F(λ_i, λ_i + u)/u`, exact in floating point up to the polynomial shift.
    pub fn f_over_u(&self, i: usize, u: C64) -> C64 {
        poly::eval(&self.f_shifted[i], u)
    }

    fn frame(&self, p: SurfacePoint) -> Result<CurveFrame> {
        let cov = &self.cov;
        Ok(match p {
            SurfacePoint::Curve { lambda, y } => {
                if y.norm() == 0.0 {
                    return Err(Error::Validation("λ-frame is singular at a ramification point".into()));
                }
                CurveFrame { lambda, u: C64::new(1.0, 0.0), v: 1.0 / y, chart: None, x: c0() }
            }
            SurfacePoint::Ram(k) => {
                let lambda = cov.branch_points[k];
                CurveFrame { lambda, u: c0(), v: 2.0 / cov.frame[k], chart: Some(k), x: c0() }
            }
            SurfacePoint::Local { k, x } => {
                let lambda = cov.branch_points[k] + x * x;
                let h = cov.local_factor(k, lambda);
                CurveFrame { lambda, u: 2.0 * x, v: 2.0 / h, chart: Some(k), x }
            }
            _ => return Err(Error::Validation("point kind does not match a hyperelliptic covering".into())),
        })
    }

    /// Holomorphic differentials `ω̂_m = λ^{m−1} dλ/y`, m = 1..g, in the point's frame.
    pub fn omega_hat(&self, p: SurfacePoint) -> Result<Vec<C64>> {
        if self.cov.kind != CoveringKind::Hyperelliptic {
            return Ok(Vec::new());
        }
        let fr = self.frame(p)?;
        let mut out = Vec::with_capacity(self.genus());
        let mut pw = C64::new(1.0, 0.0);
        for _ in 0..self.genus() {
            out.push(pw * fr.v);
            pw *= fr.lambda;
        }
        Ok(out)
    }

    /// Normalized holomorphic differentials `ω_j`.
    pub fn omega(&self, p: SurfacePoint) -> Result<Vec<C64>> {
        let hat = self.omega_hat(p)?;
        Ok(match &self.periods {
            None => Vec::new(),
            Some(per) => (0..self.genus())
                .map(|j| (0..self.genus()).map(|m| hat[m] * per.normalization[(m, j)]).sum())
                .collect(),
        })
    }

    /// `ω_j(P_i)` in the `x_i` frame, as an n×g matrix.
    pub fn omega_at_ram(&self) -> Result<CMat> {
        let n = self.cov.n();
        let g = self.genus();
        let mut m = CMat::zeros(n, g);
        for i in 0..n {
            let w = self.omega(SurfacePoint::Ram(i))?;
            for j in 0..g {
                m[(i, j)] = w[j];
            }
        }
        Ok(m)
    }

    fn same_point(a: SurfacePoint, b: SurfacePoint) -> bool {
        match (a, b) {
            (SurfacePoint::Ram(i), SurfacePoint::Ram(j)) => i == j,
            (SurfacePoint::Ram(i), SurfacePoint::Local { k, x }) | (SurfacePoint::Local { k, x }, SurfacePoint::Ram(i)) => {
                i == k && x.norm() == 0.0
            }
            _ => a == b,
        }
    }

    /// The canonical bidifferential `W(P,Q)` as a coefficient in the frames of P and Q.
    pub fn w(&self, p: SurfacePoint, q: SurfacePoint) -> Result<C64> {
        if Self::same_point(p, q) {
            return Err(Error::DiagonalSingularity);
        }
        match self.cov.kind {
            CoveringKind::Rational => self.w_rational(p, q),
            _ => self.w_hyperelliptic(p, q),
        }
    }

    fn w_hyperelliptic(&self, p: SurfacePoint, q: SurfacePoint) -> Result<C64> {
        let a = self.frame(p)?;
        let b = self.frame(q)?;
        let w0 = self.w0(&a, &b)?;
        let mut acc = w0;
        if let Some(per) = &self.periods {
            let ha = self.omega_hat(p)?;
            let hb = self.omega_hat(q)?;
            for k in 0..self.genus() {
                for l in 0..self.genus() {
                    acc += per.correction[(k, l)] * ha[k] * hb[l];
                }
            }
        }
        Ok(acc)
    }

    fn w0(&self, a: &CurveFrame, b: &CurveFrame) -> Result<C64> {
        // both points in the same x_k chart around a ramification point: use the
        // shifted form of F to avoid the cancellation F(λ_k, λ_k) = 0
        if let (Some(i), Some(j)) = (a.chart, b.chart) {
            if i == j && (a.x.norm() == 0.0 || b.x.norm() == 0.0) {
                let (at, other) = if a.x.norm() == 0.0 { (a, b) } else { (b, a) };
                let du = other.x * other.x;
                if du.norm() == 0.0 {
                    return Err(Error::DiagonalSingularity);
                }
                // u-term vanishes since u = 0 at the ramification point
                return Ok(self.f_over_u(i, du) * at.v * other.v / (4.0 * du));
            }
        }
        let d = a.lambda - b.lambda;
        if d.norm() == 0.0 {
            return Err(Error::DiagonalSingularity);
        }
        let d2 = d * d;
        Ok(a.u * b.u / (2.0 * d2) + self.big_f(a.lambda, b.lambda) * a.v * b.v / (4.0 * d2))
    }

    fn rational_frame(&self, p: SurfacePoint) -> Result<(Option<C64>, C64)> {
        // returns (x, dx/dframe); None = the point x = ∞ in the frame ξ = 1/x
        let cov = &self.cov;
        Ok(match p {
            SurfacePoint::X(x) => (Some(x), C64::new(1.0, 0.0)),
            SurfacePoint::XInfinity => (None, C64::new(1.0, 0.0)),
            SurfacePoint::Ram(k) => (Some(cov.critical_points[k]), cov.frame[k]),
            SurfacePoint::Local { k, x } => {
                let map = cov.map.as_ref().expect("rational covering has a map");
                let xc = cov.critical_points[k];
                let target = cov.branch_points[k] + x * x;
                let mut xx = xc + cov.frame[k] * x;
                for _ in 0..50 {
                    let step = (map.eval(xx) - target) / map.derivative(xx);
                    xx -= step;
                    if step.norm() < 1e-16 * (1.0 + xx.norm()) {
                        break;
                    }
                }
                (Some(xx), 2.0 * x / map.derivative(xx))
            }
            SurfacePoint::Curve { .. } => {
                return Err(Error::Validation("(λ, y) point given for a rational covering".into()))
            }
        })
    }

    fn w_rational(&self, p: SurfacePoint, q: SurfacePoint) -> Result<C64> {
        let (xp, up) = self.rational_frame(p)?;
        let (xq, uq) = self.rational_frame(q)?;
        match (xp, xq) {
            (Some(a), Some(b)) => {
                let d = a - b;
                if d.norm() == 0.0 {
                    return Err(Error::DiagonalSingularity);
                }
                Ok(up * uq / (d * d))
            }
            (None, Some(_)) | (Some(_), None) => Ok(-(up * uq)),
            (None, None) => Err(Error::DiagonalSingularity),
        }
    }

    /// Matrix `W(P_i, P_j)` in `x_i`, `x_j` frames, zero diagonal.
    pub fn w_at_ram(&self) -> Result<CMat> {
        let n = self.cov.n();
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..i {
                let v = self.w(SurfacePoint::Ram(i), SurfacePoint::Ram(j))?;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(m)
    }

    /// `S^W_k`: constant term of `W(Q, P_k)` in the `x_k` chart, as the mean of the
    /// kernel over a circle in the `x_k` plane.
    pub fn sw_at_ram(&self, k: usize) -> Result<C64> {
        let r = 0.4 * self.cov.min_spacing().sqrt();
        let coarse = self.sw_circle(k, r, 64)?;
        let fine = self.sw_circle(k, r, 128)?;
        let err = (coarse - fine).norm();
        if err > 1e-9 * (1.0 + fine.norm()) {
            return Err(Error::ExpansionFailure(format!("S^W_{} extraction residual {err:.2e}", k + 1)));
        }
        Ok(fine)
    }

    fn sw_circle(&self, k: usize, r: f64, nodes: usize) -> Result<C64> {
        let mut acc = c0();
        for s in 0..nodes {
            let x = cis(2.0 * PI * (s as f64 + 0.5) / nodes as f64) * r;
            acc += self.w(SurfacePoint::Local { k, x }, SurfacePoint::Ram(k))?;
        }
        Ok(acc / nodes as f64)
    }

    // ---- periods ----

    /// `∮_{a_k}` of `λ^{m-1}/Π_{j≠k} s_j` over the Joukowski parametrization of cut k;
    /// `extra` multiplies the integrand (as a function of λ).
    fn a_loop<F: Fn(C64) -> Vec<C64>>(&self, k: usize, nodes: usize, dim: usize, extra: F) -> Vec<C64> {
        let (e1, e2) = (self.cov.branch_points[2 * k], self.cov.branch_points[2 * k + 1]);
        let mid = 0.5 * (e1 + e2);
        let half = 0.5 * (e1 - e2);
        let cuts = self.cov.n() / 2;
        quad::periodic(
            |t| {
                let w = cis(t);
                let lam = mid + half * 0.5 * (w + 1.0 / w);
                let others: C64 = (0..cuts).filter(|&j| j != k).map(|j| self.cov.cut_factor(j, lam)).product();
                let scale = I / others;
                extra(lam).into_iter().map(|v| v * scale).collect()
            },
            nodes,
            dim,
        )
    }

    fn compute_periods(&self, nodes: usize) -> Result<Periods> {
        let g = self.genus();
        let cov = &self.cov;
        let cuts = cov.n() / 2;
        let powers = |lam: C64| -> Vec<C64> {
            let mut v = Vec::with_capacity(g);
            let mut p = C64::new(1.0, 0.0);
            for _ in 0..g {
                v.push(p);
                p *= lam;
            }
            v
        };
        let mut a = CMat::zeros(g, g);
        for k in 0..g {
            let row = self.a_loop(k, nodes, g, powers);
            let check = self.a_loop(k, 2 * nodes, g, powers);
            for m in 0..g {
                if (row[m] - check[m]).norm() > 1e-10 * (1.0 + check[m].norm()) {
                    return Err(Error::PeriodSolveFailure(format!("a-period {k} not converged")));
                }
                a[(k, m)] = check[m];
            }
        }
        // gap integrals c_j = 2∫ from the end of cut j to the start of cut j+1
        let segs: Vec<(C64, C64)> =
            (0..cuts).map(|c| (cov.branch_points[2 * c], cov.branch_points[2 * c + 1])).collect();
        let gl = GaussLegendre::new(96);
        let gl2 = GaussLegendre::new(192);
        let mut gaps = Vec::with_capacity(g);
        for j in 0..g {
            let (s, e) = (cov.branch_points[2 * j + 1], cov.branch_points[2 * j + 2]);
            for (c, seg) in segs.iter().enumerate() {
                if c != j && c != j + 1 && segments_intersect((s, e), *seg) {
                    return Err(Error::PeriodSolveFailure(format!(
                        "gap between cuts {} and {} crosses cut {}",
                        j + 1,
                        j + 2,
                        c + 1
                    )));
                }
            }
            let eval = |rule: &GaussLegendre, m: usize| -> C64 {
                let re = rule.integrate(0.0, PI, |t| self.gap_integrand(s, e, t, m).re);
                let im = rule.integrate(0.0, PI, |t| self.gap_integrand(s, e, t, m).im);
                2.0 * C64::new(re, im)
            };
            let mut row = Vec::with_capacity(g);
            for m in 0..g {
                let v1 = eval(&gl, m);
                let v2 = eval(&gl2, m);
                if (v1 - v2).norm() > 1e-9 * (1.0 + v2.norm()) {
                    return Err(Error::PeriodSolveFailure(format!("gap integral {} not converged", j + 1)));
                }
                row.push(v2);
            }
            gaps.push(row);
        }
        let mut b = CMat::zeros(g, g);
        for k in 0..g {
            for j in k..g {
                for m in 0..g {
                    b[(k, m)] += gaps[j][m];
                }
            }
        }
        let x = linalg::inverse(&a).map_err(|_| Error::PeriodSolveFailure("a-period matrix is singular".into()))?;
        let mut riemann = &b * &x;
        let mut b_flipped = false;
        let asym = linalg::norm(&(&riemann - riemann.transpose()));
        if asym > 1e-8 * (1.0 + linalg::norm(&riemann)) {
            return Err(Error::PeriodSolveFailure(format!("Riemann matrix not symmetric ({asym:.2e})")));
        }
        let im = riemann.map(|c| C64::new(c.im, 0.0));
        if !positive_definite(&im) {
            riemann = -riemann;
            b = -b;
            b_flipped = true;
            if !positive_definite(&riemann.map(|c| C64::new(c.im, 0.0))) {
                return Err(Error::PeriodSolveFailure("Im 𝔹 is not definite".into()));
            }
        }
        let riemann = (&riemann + riemann.transpose()) * C64::new(0.5, 0.0);
        let im_inv = linalg::inverse(&riemann.map(|c| C64::new(c.im, 0.0)))?;
        let correction = self.correction(&a, nodes)?;
        Ok(Periods { a, b, normalization: x, riemann, correction, im_inv, b_flipped })
    }

    fn gap_integrand(&self, s: C64, e: C64, t: f64, m: usize) -> C64 {
        let d = e - s;
        let lam = s + d * (0.5 * t).sin().powi(2);
        let dl = d * 0.5 * t.sin();
        lam.powu(m as u32) * dl / self.cov.y_upper(lam)
    }

    /// Solves for `c` so that every a-period of `W` vanishes.
    fn correction(&self, a: &CMat, nodes: usize) -> Result<CMat> {
        let g = self.genus();
        let scale = self.cov.branch_points.iter().map(|p| p.norm()).fold(0.0, f64::max);
        let radius = 2.0 * scale + 1.0;
        let samples = g + 4;
        let mus: Vec<C64> = (0..samples).map(|p| cis(2.0 * PI * p as f64 / samples as f64) * radius).collect();
        let mut k = CMat::zeros(g, g);
        for i in 0..g {
            let vals = self.a_loop(i, nodes, samples, |lam| {
                mus.iter().map(|&mu| self.big_f(lam, mu) / (4.0 * (lam - mu) * (lam - mu))).collect()
            });
            let mut coeffs = vec![c0(); samples];
            for (d, cd) in coeffs.iter_mut().enumerate() {
                *cd = (0..samples).map(|p| vals[p] * mus[p].powi(-(d as i32))).sum::<C64>() / samples as f64;
            }
            let size = coeffs.iter().map(|c| c.norm() * radius.powi(0)).fold(1e-300, f64::max);
            for (d, cd) in coeffs.iter().enumerate().skip(g) {
                if cd.norm() * radius.powi(d as i32) > 1e-8 * size * radius.powi(g as i32) {
                    return Err(Error::PeriodSolveFailure(format!(
                        "a-period of W₀ is not a polynomial of degree < g (coefficient {d})"
                    )));
                }
            }
            for l in 0..g {
                k[(i, l)] = coeffs[l];
            }
        }
        let c = -(linalg::inverse(a)? * k);
        let asym = linalg::norm(&(&c - c.transpose()));
        if asym > 1e-7 * (1.0 + linalg::norm(&c)) {
            return Err(Error::PeriodSolveFailure(format!("correction matrix not symmetric ({asym:.2e})")));
        }
        Ok((&c + c.transpose()) * C64::new(0.5, 0.0))
    }

    /// `∮_{a_k} W(·, Q)` by the Joukowski loop, for testing the normalization.
    pub fn a_period_of_w(&self, k: usize, q: SurfacePoint, nodes: usize) -> Result<C64> {
        let cov = &self.cov;
        let (e1, e2) = (cov.branch_points[2 * k], cov.branch_points[2 * k + 1]);
        let mid = 0.5 * (e1 + e2);
        let half = 0.5 * (e1 - e2);
        let h = 2.0 * PI / nodes as f64;
        let mut acc = c0();
        for s in 0..nodes {
            // loop slightly outside the cut on the upper sheet
            let w = cis(s as f64 * h) * 1.05;
            let lam = mid + half * 0.5 * (w + 1.0 / w);
            let dlam = half * 0.5 * (1.0 - 1.0 / (w * w)) * I * w;
            let p = cov.point_upper(lam);
            acc += self.w(p, q)? * dlam * h;
        }
        Ok(acc)
    }

    /// Covering with branch point `k` moved by `delta` (same indexing).
    pub fn perturbed(&self, k: usize, delta: C64) -> Result<Surface> {
        let mut pts = self.cov.branch_points.clone();
        pts[k] += delta;
        let cov = Covering::hyperelliptic_ordered(&pts, self.cov.line.phi)?;
        let mut s = Surface::new(&cov)?;
        self.align_homology(&mut s);
        Ok(s)
    }

    /// Covering with all branch points transformed by `f` (same indexing).
    pub fn transformed<F: Fn(C64) -> C64>(&self, f: F) -> Result<Surface> {
        let pts: Vec<C64> = self.cov.branch_points.iter().map(|&p| f(p)).collect();
        let cov = Covering::hyperelliptic_ordered(&pts, self.cov.line.phi)?;
        let mut s = Surface::new(&cov)?;
        self.align_homology(&mut s);
        Ok(s)
    }

    /// Keeps the b-cycle orientation of `self` on a nearby surface.
    fn align_homology(&self, other: &mut Surface) {
        if let (Some(a), Some(b)) = (&self.periods, &mut other.periods) {
            if a.b_flipped != b.b_flipped {
                b.b = -b.b.clone();
                b.riemann = -b.riemann.clone();
                b.im_inv = -b.im_inv.clone();
                b.b_flipped = a.b_flipped;
            }
        }
    }
}

fn positive_definite(m: &CMat) -> bool {
    let re = m.map(|c| c.re);
    re.cholesky().is_some()
}

/// Which bidifferential an evaluator reports.
#[derive(Debug, Clone)]
pub struct KernelEvaluator {
    pub surface: Surface,
    pub kind: KernelKind,
    pub q: Option<CMat>,
    /// `(𝔹 + q)⁻¹`
    bq_inv: Option<CMat>,
}

/// Relative size of det(𝔹+q) below which the surface is treated as lying on the divisor.
pub const DIVISOR_TOL: f64 = 1e-10;

impl KernelEvaluator {
    pub fn new(surface: Surface, kind: KernelKind, q: Option<CMat>) -> Result<Self> {
        let mut bq_inv = None;
        if kind == KernelKind::Wq {
            if let Some(per) = &surface.periods {
                let q = q.clone().ok_or_else(|| Error::Validation("W_q requires the matrix q".into()))?;
                let g = surface.genus();
                if q.nrows() != g || q.ncols() != g {
                    return Err(Error::Validation(format!("q must be {g}×{g}")));
                }
                if linalg::norm(&(&q - q.transpose())) > 1e-12 * (1.0 + linalg::norm(&q)) {
                    return Err(Error::Validation("q must be symmetric".into()));
                }
                let bq = &per.riemann + &q;
                let det = bq.determinant();
                let scale = linalg::norm(&per.riemann).max(linalg::norm(&q)).powi(g as i32).max(1.0);
                if det.norm() <= DIVISOR_TOL * scale {
                    return Err(Error::OnDeformationDivisor { det: det.norm() });
                }
                bq_inv = Some(linalg::inverse(&bq).map_err(|_| Error::OnDeformationDivisor { det: det.norm() })?);
            }
        }
        Ok(Self { surface, kind, q, bq_inv })
    }

    pub fn w(surface: Surface) -> Self {
        Self { surface, kind: KernelKind::W, q: None, bq_inv: None }
    }

    pub fn cov(&self) -> &Covering {
        &self.surface.cov
    }

    fn quad_form(m: &CMat, a: &[C64], b: &[C64]) -> C64 {
        let mut acc = c0();
        for k in 0..a.len() {
            for l in 0..b.len() {
                acc += m[(k, l)] * a[k] * b[l];
            }
        }
        acc
    }

    /// Holomorphic part subtracted from W: returns `(matrix, factor)` such that the
    /// kernel is `W − factor·ω(P)ᵀ M ω(Q)`.
    fn correction(&self) -> Option<(&CMat, C64)> {
        let per = self.surface.periods.as_ref()?;
        match self.kind {
            KernelKind::W => None,
            KernelKind::Wq => self.bq_inv.as_ref().map(|m| (m, 2.0 * PI * I)),
            KernelKind::Schiffer => Some((&per.im_inv, C64::new(PI, 0.0))),
            KernelKind::Bergman => None,
        }
    }

    /// Kernel value; for the Bergman kind this is `B(P, Q̄)` with the conjugate frame at Q.
    pub fn eval(&self, p: SurfacePoint, q: SurfacePoint) -> Result<C64> {
        if self.kind == KernelKind::Bergman {
            return self.bergman(p, q);
        }
        let w = self.surface.w(p, q)?;
        Ok(match self.correction() {
            None => w,
            Some((m, factor)) => w - factor * Self::quad_form(m, &self.surface.omega(p)?, &self.surface.omega(q)?),
        })
    }

    /// `B(P, Q̄) = π Σ (Im 𝔹)⁻¹_{kl} ω_k(P) conj(ω_l(Q))`.
    pub fn bergman(&self, p: SurfacePoint, q: SurfacePoint) -> Result<C64> {
        let Some(per) = &self.surface.periods else { return Ok(c0()) };
        let wq: Vec<C64> = self.surface.omega(q)?.iter().map(|c| c.conj()).collect();
        Ok(PI * Self::quad_form(&per.im_inv, &self.surface.omega(p)?, &wq))
    }

    /// Weights `(M, factor)` of the holomorphic correction, exposed for the quadrature code.
    pub fn holomorphic_correction(&self) -> Option<(CMat, C64)> {
        self.correction().map(|(m, f)| (m.clone(), f))
    }

    /// Same kind of kernel on a perturbed covering (q held fixed).
    pub fn rebuilt(&self, surface: Surface) -> Result<Self> {
        Self::new(surface, self.kind, self.q.clone())
    }
}

/// Rotation coefficients and the matrices of the linear system.
#[derive(Debug, Clone)]
pub struct RotationData {
    pub beta: CMat,
    pub gamma: CMat,
    pub v: CMat,
    pub u: Vec<C64>,
}

impl RotationData {
    pub fn from_beta(beta: CMat, u: Vec<C64>) -> Self {
        let n = u.len();
        let mut gamma = beta.clone();
        for i in 0..n {
            gamma[(i, i)] = c0();
        }
        let v = CMat::from_fn(n, n, |i, j| gamma[(i, j)] * (u[j] - u[i]));
        Self { beta, gamma, v, u }
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }
}

/// β_ij = ½·kernel(P_i, P_j). For the Bergman kind the 2n×2n real-double structure is
/// returned with indices (1..n, 1̄..n̄) and U = diag(λ, λ̄).
pub fn rotation_data(k: &KernelEvaluator) -> Result<RotationData> {
    let n = k.cov().n();
    let lam = k.cov().branch_points.clone();
    if k.kind == KernelKind::Bergman {
        return Err(Error::Validation("Bergman rotation data lives on the real double; use doubles_rotation_data".into()));
    }
    let mut beta = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let b = 0.5 * k.eval(SurfacePoint::Ram(i), SurfacePoint::Ram(j))?;
            beta[(i, j)] = b;
            beta[(j, i)] = b;
        }
    }
    Ok(RotationData::from_beta(beta, lam))
}

/// Rotation data of the real double: Γ = ½[[Ω, B], [B̄, Ω̄]].
pub fn doubles_rotation_data(surface: &Surface) -> Result<RotationData> {
    let n = surface.cov.n();
    let omega = KernelEvaluator::new(surface.clone(), KernelKind::Schiffer, None)?;
    let berg = KernelEvaluator::new(surface.clone(), KernelKind::Bergman, None)?;
    let mut beta = CMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let o = 0.5 * omega.eval(SurfacePoint::Ram(i), SurfacePoint::Ram(j))?;
                beta[(i, j)] = o;
                beta[(n + i, n + j)] = o.conj();
            }
            let b = 0.5 * berg.eval(SurfacePoint::Ram(i), SurfacePoint::Ram(j))?;
            beta[(i, n + j)] = b;
            beta[(n + j, i)] = b;
        }
    }
    let mut u = surface.cov.branch_points.clone();
    u.extend(surface.cov.branch_points.iter().map(|c| c.conj()));
    Ok(RotationData::from_beta(beta, u))
}

/// Eigenvalues of V matched against the predicted multiset; returns the sorted
/// numerical spectrum.
pub fn spectrum(rot: &RotationData, cov: &Covering, doubled: bool, tol: f64) -> Result<Vec<C64>> {
    let mut eig = linalg::eigenvalues(&rot.v);
    let mut predicted: Vec<f64> = predicted_spectrum(cov.genus, &cov.infinity_ramification())
        .iter()
        .map(|r| *r.numer() as f64 / *r.denom() as f64)
        .collect();
    if doubled {
        predicted = predicted.iter().flat_map(|&x| [x, x]).collect();
    }
    if eig.len() != predicted.len() {
        return Err(Error::SpectrumMismatch(format!(
            "V has {} eigenvalues, predicted {}",
            eig.len(),
            predicted.len()
        )));
    }
    eig.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap_or(std::cmp::Ordering::Equal));
    predicted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let worst = eig.iter().zip(&predicted).map(|(e, p)| (e - p).norm()).fold(0.0, f64::max);
    if worst > tol {
        return Err(Error::SpectrumMismatch(format!("eigenvalue deviation {worst:.3e} exceeds {tol:.1e}")));
    }
    Ok(eig)
}

/// `(T_q)_{ij} = πi Σ (𝔹+q)⁻¹_{kl} ω_k(P_i) ω_l(P_j)`.
pub fn t_q(k: &KernelEvaluator) -> Result<CMat> {
    let n = k.cov().n();
    match (&k.surface.periods, &k.bq_inv) {
        (Some(_), Some(m)) => {
            let om = k.surface.omega_at_ram()?;
            Ok(&om * m * om.transpose() * (PI * I))
        }
        (None, _) => Ok(CMat::zeros(n, n)),
        (Some(_), None) => Err(Error::Validation("T_q needs a W_q evaluator".into())),
    }
}

/// Generator of the doubles transform, `T = (π/2)[[M, −M̃], [−M̃*, M̄]]`.
pub fn t_doubles(surface: &Surface) -> Result<CMat> {
    let n = surface.cov.n();
    let mut t = CMat::zeros(2 * n, 2 * n);
    let Some(per) = &surface.periods else { return Ok(t) };
    let om = surface.omega_at_ram()?;
    let omc = linalg::conj(&om);
    let m = &om * &per.im_inv * om.transpose();
    let mt = &om * &per.im_inv * omc.transpose();
    let h = C64::new(PI / 2.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            t[(i, j)] = h * m[(i, j)];
            t[(i, n + j)] = -h * mt[(i, j)];
            t[(n + i, j)] = -h * mt[(j, i)];
            t[(n + i, n + j)] = h * m[(i, j)].conj();
        }
    }
    Ok(t)
}
