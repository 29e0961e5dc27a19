//! Branched coverings of the Riemann sphere: branch data, Stokes rays, admissible
//! lines and the ordering / sheet conventions used by every other module.

use crate::error::{Error, Result};
use crate::poly;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Principal square root with the cut along the negative real axis.
pub fn sqrt_p(z: C64) -> C64 {
    z.sqrt()
}

pub fn cis(t: f64) -> C64 {
    C64::from_polar(1.0, t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoveringKind {
    Rational,
    Hyperelliptic,
    DiagramOnly,
}

/// A branch cut joining `P_{2c+1}` and `P_{2c+2}`, gluing two sheets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cut {
    pub lower: usize,
    pub upper: usize,
}

impl Cut {
    pub fn new(a: usize, b: usize) -> Self {
        Self { lower: a.min(b), upper: a.max(b) }
    }
}

/// The oriented line `l = {t e^{iφ}}` and the half-planes it bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineConfig {
    pub phi: f64,
}

impl LineConfig {
    pub fn new(phi: f64) -> Self {
        Self { phi }
    }

    /// Unit direction of `l_+`.
    pub fn plus(&self) -> C64 {
        cis(self.phi)
    }

    pub fn minus(&self) -> C64 {
        -cis(self.phi)
    }

    /// Argument of `z` measured from `l_+`, in (-π, π].
    pub fn relative_arg(&self, z: C64) -> f64 {
        (z * cis(-self.phi)).arg()
    }

    /// `Π^r`: the half-plane clockwise of `l_+`.
    pub fn in_right(&self, z: C64) -> bool {
        let a = self.relative_arg(z);
        a > -PI && a < 0.0
    }

    pub fn in_left(&self, z: C64) -> bool {
        let a = self.relative_arg(z);
        a > 0.0 && a < PI
    }
}

/// A point of the covering surface together with the frame used to report
/// differentials there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfacePoint {
    /// Rational covering, uniformizing coordinate `x` (frame `dx`).
    X(C64),
    /// Rational covering, the point `x = ∞`.
    XInfinity,
    /// Hyperelliptic point `(λ, y)` with frame `dλ`.
    Curve { lambda: C64, y: C64 },
    /// Ramification point `P_k` with frame `dx_k`.
    Ram(usize),
    /// Point with local parameter `x_k = x` near `P_k`, frame `dx_k`.
    Local { k: usize, x: C64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RationalMap {
    pub num: Vec<C64>,
    pub den: Vec<C64>,
}

impl RationalMap {
    pub fn eval(&self, x: C64) -> C64 {
        poly::eval(&self.num, x) / poly::eval(&self.den, x)
    }

    pub fn derivative(&self, x: C64) -> C64 {
        let (n, d) = (poly::eval(&self.num, x), poly::eval(&self.den, x));
        let (dn, dd) = (
            poly::eval(&poly::derivative(&self.num), x),
            poly::eval(&poly::derivative(&self.den), x),
        );
        (dn * d - n * dd) / (d * d)
    }

    fn critical_numerator(&self) -> Vec<C64> {
        poly::sub(
            &poly::mul(&poly::derivative(&self.num), &self.den),
            &poly::mul(&self.num, &poly::derivative(&self.den)),
        )
    }
}

/// A point over λ = ∞ with ramification index `n_i` (pole of order `n_i + 1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfinityPoint {
    /// Location in the uniformizing coordinate (`None` for `x = ∞` or for
    /// non-rational kinds).
    pub x: Option<C64>,
    pub ramification: usize,
}

#[derive(Debug, Clone)]
pub struct StokesRay {
    pub i: usize,
    pub j: usize,
    pub direction: C64,
}

#[derive(Debug, Clone)]
pub struct Covering {
    pub kind: CoveringKind,
    pub degree: usize,
    pub genus: usize,
    pub branch_points: Vec<C64>,
    pub ramification_points: Vec<SurfacePoint>,
    pub infinity: Vec<InfinityPoint>,
    /// Sheet labels of each cut; `None` when the sheet diagram is unknown.
    pub cuts: Option<Vec<Cut>>,
    pub line: LineConfig,
    /// Sign-fixed local frame at each ramification point: `h_k(λ_k)` with
    /// `y = x_k h_k(λ)` (hyperelliptic), or `dx/dx_k` at `P_k` (rational).
    pub frame: Vec<C64>,
    pub map: Option<RationalMap>,
    pub critical_points: Vec<C64>,
}

const DISTINCT_TOL: f64 = 1e-12;

fn projections(points: &[C64], phi: f64) -> Vec<f64> {
    points.iter().map(|&l| (cis(phi) * l).re).collect()
}

fn scale_of(points: &[C64]) -> f64 {
    points.iter().map(|p| p.norm()).fold(1.0, f64::max)
}

/// Permutation sorting points by descending `Re(e^{iφ} λ)`.
pub fn a1_order(points: &[C64], phi: f64) -> Result<Vec<usize>> {
    let proj = projections(points, phi);
    let mut idx: Vec<usize> = (0..points.len()).collect();
    idx.sort_by(|&a, &b| proj[b].partial_cmp(&proj[a]).unwrap_or(std::cmp::Ordering::Equal));
    let tol = DISTINCT_TOL * scale_of(points);
    for w in idx.windows(2) {
        if (proj[w[0]] - proj[w[1]]).abs() <= tol {
            return Err(Error::NotAdmissible(format!(
                "branch points {} and {} have equal projections at φ = {phi}",
                points[w[0]], points[w[1]]
            )));
        }
    }
    Ok(idx)
}

fn check_distinct(points: &[C64]) -> Result<()> {
    let tol = 1e-10 * scale_of(points);
    for i in 0..points.len() {
        for j in 0..i {
            if (points[i] - points[j]).norm() <= tol {
                return Err(Error::DegenerateCovering(format!(
                    "branch points {} and {} coincide",
                    points[i], points[j]
                )));
            }
        }
    }
    Ok(())
}

impl Covering {
    /// Two-fold covering `y² = Π(λ - λ_k)`, re-indexed per the A1 ordering at `phi`.
    pub fn hyperelliptic(points: &[C64], phi: f64) -> Result<Self> {
        if points.len() < 2 || !points.len().is_multiple_of(2) {
            return Err(Error::Validation(format!(
                "hyperelliptic covering needs an even number ≥ 2 of branch points, got {}",
                points.len()
            )));
        }
        check_distinct(points)?;
        let order = a1_order(points, phi)?;
        let sorted: Vec<C64> = order.iter().map(|&i| points[i]).collect();
        Self::hyperelliptic_ordered(&sorted, phi)
    }

    /// As [`Covering::hyperelliptic`] but keeps the given indexing, which must
    /// already satisfy A1 (used for finite differences in the branch points).
    pub fn hyperelliptic_ordered(points: &[C64], phi: f64) -> Result<Self> {
        check_distinct(points)?;
        let order = a1_order(points, phi)?;
        if order.iter().enumerate().any(|(i, &j)| i != j) {
            return Err(Error::AssumptionViolated("branch points are not in A1 order".into()));
        }
        let n = points.len();
        let genus = n / 2 - 1;
        let mut cov = Covering {
            kind: CoveringKind::Hyperelliptic,
            degree: 2,
            genus,
            branch_points: points.to_vec(),
            ramification_points: (0..n).map(SurfacePoint::Ram).collect(),
            infinity: vec![InfinityPoint { x: None, ramification: 0 }; 2],
            cuts: Some(vec![Cut::new(0, 1); n / 2]),
            line: LineConfig::new(phi),
            frame: vec![C64::new(1.0, 0.0); n],
            map: None,
            critical_points: Vec::new(),
        };
        cov.check_cuts_disjoint()?;
        cov.frame = (0..n).map(|k| cov.fix_hyperelliptic_frame(k)).collect();
        Ok(cov)
    }

    /// Rational covering `λ = N(x)/D(x)`.
    pub fn rational(num: &[C64], den: &[C64], phi: f64) -> Result<Self> {
        let num = poly::trim(num, 0.0);
        let den = poly::trim(den, 0.0);
        let (dn, dd) = match (poly::degree(&num), poly::degree(&den)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(Error::Validation("numerator and denominator must be nonzero".into())),
        };
        let degree = dn.max(dd);
        if degree < 2 {
            return Err(Error::Validation("covering degree must be at least 2".into()));
        }
        let map = RationalMap { num: num.clone(), den: den.clone() };
        let den_roots = poly::roots(&den, 1e-14);
        let num_roots = poly::roots(&num, 1e-14);
        for r in &den_roots {
            if num_roots.iter().any(|s| (r - s).norm() < 1e-8 * (1.0 + r.norm())) {
                return Err(Error::Validation("numerator and denominator share a root".into()));
            }
        }
        // points over ∞: poles with multiplicities, plus x = ∞ when deg N > deg D
        let mut infinity: Vec<InfinityPoint> = Vec::new();
        let mut poles: Vec<(C64, usize)> = Vec::new();
        for r in den_roots {
            match poles.iter_mut().find(|(p, _)| (p - r).norm() < 1e-6 * (1.0 + p.norm())) {
                Some(entry) => entry.1 += 1,
                None => poles.push((r, 1)),
            }
        }
        poles.sort_by(|a, b| {
            (a.0.re, a.0.im).partial_cmp(&(b.0.re, b.0.im)).unwrap_or(std::cmp::Ordering::Equal)
        });
        for (p, mult) in &poles {
            infinity.push(InfinityPoint { x: Some(*p), ramification: mult - 1 });
        }
        if dn > dd {
            infinity.push(InfinityPoint { x: None, ramification: dn - dd - 1 });
        }
        // finite critical points: roots of N'D - ND' away from poles
        let k = map.critical_numerator();
        let kd = poly::derivative(&k);
        let mut crit: Vec<C64> = poly::roots(&k, 1e-14)
            .into_iter()
            .filter(|&x| {
                let d = poly::eval(&den, x).norm();
                let scale = den.iter().map(|c| c.norm()).sum::<f64>() * (1.0 + x.norm()).powi(dd as i32);
                d > 1e-8 * scale
            })
            .collect();
        for i in 0..crit.len() {
            for j in 0..i {
                if (crit[i] - crit[j]).norm() < 1e-7 * (1.0 + crit[i].norm()) {
                    return Err(Error::DegenerateCovering(format!(
                        "non-simple critical point near x = {}",
                        crit[i]
                    )));
                }
            }
        }
        let values: Vec<C64> = crit.iter().map(|&x| map.eval(x)).collect();
        check_distinct(&values)?;
        let sum_n: usize = infinity.iter().map(|p| p.ramification).sum();
        let m = infinity.len() - 1;
        // Riemann–Hurwitz in genus zero: n = 2m + Σ n_i
        if crit.len() != 2 * m + sum_n {
            return Err(Error::DegenerateCovering(format!(
                "found {} finite simple critical points, Riemann–Hurwitz requires {} (critical point at x = ∞?)",
                crit.len(),
                2 * m + sum_n
            )));
        }
        let order = a1_order(&values, phi)?;
        crit = order.iter().map(|&i| crit[i]).collect();
        let branch_points: Vec<C64> = order.iter().map(|&i| values[i]).collect();
        let n = branch_points.len();
        let cuts = if degree == 2 && n == 2 { Some(vec![Cut::new(0, 1)]) } else if n == 1 { Some(Vec::new()) } else { None };
        let mut cov = Covering {
            kind: CoveringKind::Rational,
            degree,
            genus: 0,
            branch_points,
            ramification_points: (0..n).map(SurfacePoint::Ram).collect(),
            infinity,
            cuts,
            line: LineConfig::new(phi),
            frame: vec![C64::new(1.0, 0.0); n],
            map: Some(map),
            critical_points: crit,
        };
        let second: Vec<C64> = cov
            .critical_points
            .iter()
            .map(|&x| poly::eval(&kd, x) / poly::eval(&den, x).powi(2))
            .collect();
        cov.frame = (0..n).map(|i| cov.fix_rational_frame(i, second[i])).collect();
        Ok(cov)
    }

    /// Combinatorial covering given only by its sheet diagram: `cuts[c]` lists
    /// the two sheets glued along the cut `[P_{2c+1}, P_{2c+2}]`. Branch points
    /// are synthetic real numbers in A1 order for the line `φ = 0`.
    pub fn from_diagram(cuts: &[(usize, usize)]) -> Result<Self> {
        if cuts.is_empty() {
            return Err(Error::Validation("sheet diagram has no cuts".into()));
        }
        if cuts.iter().any(|&(a, b)| a == b) {
            return Err(Error::Validation("a cut must join two different sheets".into()));
        }
        let sheets = cuts.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0) + 1;
        let cut_list: Vec<Cut> = cuts.iter().map(|&(a, b)| Cut::new(a, b)).collect();
        // connectivity of the sheet graph
        let mut seen = vec![false; sheets];
        let mut stack = vec![0usize];
        while let Some(s) = stack.pop() {
            if std::mem::replace(&mut seen[s], true) {
                continue;
            }
            for c in &cut_list {
                if c.lower == s && !seen[c.upper] {
                    stack.push(c.upper);
                }
                if c.upper == s && !seen[c.lower] {
                    stack.push(c.lower);
                }
            }
        }
        if seen.iter().any(|v| !v) {
            return Err(Error::Validation("sheet diagram is not connected".into()));
        }
        let n = 2 * cuts.len();
        let genus = (cuts.len() + 1).checked_sub(sheets).ok_or_else(|| {
            Error::Validation("sheet diagram has fewer cuts than needed to connect sheets".into())
        })?;
        Ok(Covering {
            kind: CoveringKind::DiagramOnly,
            degree: sheets,
            genus,
            branch_points: (0..n).map(|k| C64::new((n - 1) as f64 - 2.0 * k as f64, 0.0)).collect(),
            ramification_points: (0..n).map(SurfacePoint::Ram).collect(),
            infinity: vec![InfinityPoint { x: None, ramification: 0 }; sheets],
            cuts: Some(cut_list),
            line: LineConfig::new(0.0),
            frame: vec![C64::new(1.0, 0.0); n],
            map: None,
            critical_points: Vec::new(),
        })
    }

    /// Attaches an explicit sheet diagram to a covering whose diagram is unknown.
    pub fn with_diagram(mut self, cuts: &[(usize, usize)]) -> Result<Self> {
        if 2 * cuts.len() != self.n() {
            return Err(Error::Validation(format!(
                "diagram has {} cuts but the covering has {} branch points",
                cuts.len(),
                self.n()
            )));
        }
        self.cuts = Some(cuts.iter().map(|&(a, b)| Cut::new(a, b)).collect());
        Ok(self)
    }

    /// Number of finite branch points.
    pub fn n(&self) -> usize {
        self.branch_points.len()
    }

    /// Number of points over ∞, minus one.
    pub fn m(&self) -> usize {
        self.infinity.len() - 1
    }

    pub fn infinity_ramification(&self) -> Vec<usize> {
        self.infinity.iter().map(|p| p.ramification).collect()
    }

    pub fn riemann_hurwitz_holds(&self) -> bool {
        let sum_n: usize = self.infinity.iter().map(|p| p.ramification).sum();
        self.n() == 2 * self.genus + 2 * self.m() + sum_n
    }

    pub fn order_branch_points(&self, phi: f64) -> Result<Vec<usize>> {
        a1_order(&self.branch_points, phi)
    }

    pub fn is_admissible(&self, phi: f64) -> bool {
        a1_order(&self.branch_points, phi).is_ok()
    }

    /// Rebuilds the covering for another line angle.
    pub fn reordered(&self, phi: f64) -> Result<Self> {
        match self.kind {
            CoveringKind::Hyperelliptic => Self::hyperelliptic(&self.branch_points, phi),
            CoveringKind::Rational => {
                let map = self.map.as_ref().expect("rational covering keeps its map");
                Self::rational(&map.num, &map.den, phi)
            }
            CoveringKind::DiagramOnly => {
                a1_order(&self.branch_points, phi)?;
                Ok(self.clone())
            }
        }
    }

    pub fn stokes_rays(&self) -> Vec<StokesRay> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            for j in 0..self.n() {
                if i != j {
                    let c = self.branch_points[i] - self.branch_points[j];
                    out.push(StokesRay { i, j, direction: C64::new(0.0, -1.0) * c.conj() / c.norm() });
                }
            }
        }
        out
    }

    /// Minimum distance between finite branch points.
    pub fn min_spacing(&self) -> f64 {
        let mut d = f64::INFINITY;
        for i in 0..self.n() {
            for j in 0..i {
                d = d.min((self.branch_points[i] - self.branch_points[j]).norm());
            }
        }
        if d.is_finite() {
            d
        } else {
            1.0
        }
    }

    /// Canonical x-plane angle of the r-contour ray at every ramification point.
    pub fn theta_r(&self) -> f64 {
        0.75 * PI - 0.5 * self.line.phi
    }

    pub fn theta_l(&self) -> f64 {
        0.25 * PI - 0.5 * self.line.phi
    }

    // ---- hyperelliptic helpers ----

    /// Coefficients of `f(λ) = Π(λ - λ_k)`.
    pub fn curve_poly(&self) -> Vec<C64> {
        poly::from_roots(&self.branch_points)
    }

    /// Factor `s_c(λ)` with `s_c² = (λ - e_{2c+1})(λ - e_{2c+2})`, continuous off the cut
    /// and `s_c ~ λ` at infinity.
    pub fn cut_factor(&self, c: usize, lambda: C64) -> C64 {
        let (e1, e2) = (self.branch_points[2 * c], self.branch_points[2 * c + 1]);
        let mid = 0.5 * (e1 + e2);
        let w = lambda - mid;
        w * sqrt_p((lambda - e1) * (lambda - e2) / (w * w))
    }

    /// `y` on the upper sheet (the sheet where `y ~ λ^{g+1}` at infinity).
    pub fn y_upper(&self, lambda: C64) -> C64 {
        (0..self.n() / 2).map(|c| self.cut_factor(c, lambda)).product()
    }

    /// Unsigned analytic factor `Π_{j≠k} √((λ - λ_j)/(λ_k - λ_j))`, equal to one at λ_k.
    fn local_ratio(&self, k: usize, lambda: C64) -> C64 {
        let lk = self.branch_points[k];
        self.branch_points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, &lj)| sqrt_p((lambda - lj) / (lk - lj)))
            .product()
    }

    /// `h_k(λ)` with `y = x_k h_k(λ)` near `P_k`; analytic along every ray from λ_k
    /// that avoids the other branch points.
    pub fn local_factor(&self, k: usize, lambda: C64) -> C64 {
        self.frame[k] * self.local_ratio(k, lambda)
    }

    /// Point with local parameter `x` near `P_k` (hyperelliptic kind).
    pub fn point_near(&self, k: usize, x: C64) -> SurfacePoint {
        let lambda = self.branch_points[k] + x * x;
        SurfacePoint::Curve { lambda, y: x * self.local_factor(k, lambda) }
    }

    pub fn point_upper(&self, lambda: C64) -> SurfacePoint {
        SurfacePoint::Curve { lambda, y: self.y_upper(lambda) }
    }

    pub fn point_lower(&self, lambda: C64) -> SurfacePoint {
        SurfacePoint::Curve { lambda, y: -self.y_upper(lambda) }
    }

    /// Sheet rule: the ray `arg x_k = θ_r` leaves `P_k` on the upper (`y_upper`) sheet.
    fn fix_hyperelliptic_frame(&self, k: usize) -> C64 {
        let lk = self.branch_points[k];
        let base: C64 = sqrt_p(
            self.branch_points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, &lj)| lk - lj)
                .product(),
        );
        let eps = 1e-3 * self.min_spacing().sqrt();
        let x = cis(self.theta_r()) * eps;
        let lambda = lk + x * x;
        let y = x * base * self.local_ratio(k, lambda);
        let up = self.y_upper(lambda);
        if (y - up).norm() <= (y + up).norm() {
            base
        } else {
            -base
        }
    }

    fn check_cuts_disjoint(&self) -> Result<()> {
        let segs: Vec<(C64, C64)> =
            (0..self.n() / 2).map(|c| (self.branch_points[2 * c], self.branch_points[2 * c + 1])).collect();
        for i in 0..segs.len() {
            for j in 0..i {
                if segments_intersect(segs[i], segs[j]) {
                    return Err(Error::AssumptionViolated(format!("cuts {} and {} intersect", j + 1, i + 1)));
                }
            }
        }
        Ok(())
    }

    // ---- rational helpers ----

    /// Sign-fixed `dx/dx_k` at `P_k`: the ray `arg x_k = θ_r` lands on the point over
    /// ∞ with the larger label.
    fn fix_rational_frame(&self, k: usize, second: C64) -> C64 {
        let base = C64::new(1.0, 0.0) / sqrt_p(second / 2.0);
        let theta = self.theta_r();
        let forward = self.landing_pole(k, base, theta);
        let backward = self.landing_pole(k, base, theta + PI);
        match (forward, backward) {
            (Some(f), Some(b)) if f < b => -base,
            _ => base,
        }
    }

    /// Follows the lift of the ray `λ_k + s e^{2iθ}` starting on the branch `x ≈ x_c +
    /// frame·ε e^{iθ}` and returns the index of the point over ∞ where it ends.
    fn landing_pole(&self, k: usize, frame: C64, theta: f64) -> Option<usize> {
        let map = self.map.as_ref()?;
        let xc = self.critical_points[k];
        let lk = self.branch_points[k];
        let dir = cis(2.0 * theta);
        let scale = scale_of(&self.branch_points).max(scale_of(&self.critical_points));
        let mut s = 1e-6 * self.min_spacing();
        let mut x = xc + frame * cis(theta) * s.sqrt();
        let newton = |x0: C64, target: C64| -> C64 {
            let mut x = x0;
            for _ in 0..30 {
                let d = map.derivative(x);
                if d.norm() == 0.0 {
                    break;
                }
                let step = (map.eval(x) - target) / d;
                x -= step;
                if step.norm() < 1e-15 * (1.0 + x.norm()) {
                    break;
                }
            }
            x
        };
        x = newton(x, lk + dir * s);
        let far = 1e7 * scale;
        while s < far {
            let next = s * 1.15;
            let predicted = x + dir * (next - s) / map.derivative(x);
            x = newton(predicted, lk + dir * next);
            s = next;
            if !x.re.is_finite() {
                return None;
            }
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.infinity.iter().enumerate() {
            let d = match p.x {
                Some(px) => (x - px).norm(),
                None => 1.0 / x.norm(),
            };
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        best.map(|(i, _)| i)
    }
}

fn cross(a: C64, b: C64) -> f64 {
    a.re * b.im - a.im * b.re
}

/// Proper intersection test for closed segments.
pub fn segments_intersect(s: (C64, C64), t: (C64, C64)) -> bool {
    let d1 = cross(t.1 - t.0, s.0 - t.0);
    let d2 = cross(t.1 - t.0, s.1 - t.0);
    let d3 = cross(s.1 - s.0, t.0 - s.0);
    let d4 = cross(s.1 - s.0, t.1 - s.0);
    (d1 * d2 < 0.0) && (d3 * d4 < 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn x_plus_inverse_x() {
        // λ = (x² + 1)/x
        let cov = Covering::rational(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], &[c(0.0, 0.0), c(1.0, 0.0)], 0.0).unwrap();
        assert_eq!(cov.n(), 2);
        assert_eq!(cov.m(), 1);
        assert_eq!(cov.genus, 0);
        assert!((cov.branch_points[0] - c(2.0, 0.0)).norm() < 1e-12);
        assert!((cov.branch_points[1] - c(-2.0, 0.0)).norm() < 1e-12);
        assert!((cov.critical_points[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!((cov.critical_points[1] - c(-1.0, 0.0)).norm() < 1e-12);
        assert_eq!(cov.infinity_ramification(), vec![0, 0]);
        assert!(cov.riemann_hurwitz_holds());
    }

    #[test]
    fn x_squared_is_ramified_at_infinity() {
        let cov = Covering::rational(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0)], 0.0).unwrap();
        assert_eq!(cov.n(), 1);
        assert_eq!(cov.m(), 0);
        assert_eq!(cov.infinity_ramification(), vec![1]);
        assert!(cov.branch_points[0].norm() < 1e-12);
    }

    #[test]
    fn degree_one_rejected() {
        let err = Covering::rational(&[c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0)], 0.0).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn hyperelliptic_counts() {
        let cov = Covering::hyperelliptic(&[c(-2.0, 0.0), c(2.0, 0.0)], 0.0).unwrap();
        assert_eq!((cov.genus, cov.n()), (0, 2));
        assert_eq!(cov.branch_points, vec![c(2.0, 0.0), c(-2.0, 0.0)]);
        let cov = Covering::hyperelliptic(&[c(3.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(-3.0, 0.0)], 0.0).unwrap();
        assert_eq!((cov.genus, cov.n()), (1, 4));
        assert_eq!(cov.cuts.as_ref().unwrap().len(), 2);
        assert!(matches!(
            Covering::hyperelliptic(&[c(1.0, 0.0), c(1.0, 0.0)], 0.0),
            Err(Error::DegenerateCovering(_))
        ));
    }

    #[test]
    fn stokes_ray_directions() {
        let cov = Covering::hyperelliptic(&[c(2.0, 0.0), c(-2.0, 0.0)], 0.0).unwrap();
        let rays = cov.stokes_rays();
        assert!((rays[0].direction - c(0.0, -1.0)).norm() < 1e-15);
        assert!((rays[1].direction - c(0.0, 1.0)).norm() < 1e-15);
        let cov = Covering::hyperelliptic(&[c(0.0, 1.0), c(0.0, -1.0)], 0.3).unwrap();
        let top = cov.branch_points.iter().position(|&l| (l - c(0.0, 1.0)).norm() < 1e-15).unwrap();
        let r = cov.stokes_rays().into_iter().find(|r| r.i == top).unwrap();
        assert!((r.direction - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn admissibility_and_ordering() {
        let cov = Covering::hyperelliptic(&[c(2.0, 0.0), c(-2.0, 0.0)], 0.0).unwrap();
        assert!(cov.is_admissible(0.0));
        assert!(!cov.is_admissible(PI / 2.0));
        assert!(matches!(cov.order_branch_points(PI / 2.0), Err(Error::NotAdmissible(_))));
        assert_eq!(a1_order(&[c(-2.0, 0.0), c(2.0, 0.0)], 0.0).unwrap(), vec![1, 0]);
        let single = Covering::rational(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], &[c(1.0, 0.0)], 0.0).unwrap();
        assert!(single.is_admissible(1.234));
    }

    #[test]
    fn upper_sheet_satisfies_curve_equation() {
        let cov = Covering::hyperelliptic(&[c(3.0, 0.2), c(1.0, -0.5), c(-1.0, 0.4), c(-3.0, 0.0)], 0.0).unwrap();
        let f = cov.curve_poly();
        for lam in [c(0.3, 2.0), c(-5.0, -1.0), c(2.0, 0.01)] {
            let y = cov.y_upper(lam);
            assert!((y * y - poly::eval(&f, lam)).norm() < 1e-12 * (1.0 + y.norm_sqr()));
        }
        // local parametrization is on the curve too
        for k in 0..4 {
            if let SurfacePoint::Curve { lambda, y } = cov.point_near(k, c(0.05, 0.02)) {
                assert!((y * y - poly::eval(&f, lambda)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn diagram_genus() {
        let cov = Covering::from_diagram(&[(1, 2), (3, 4), (1, 2), (1, 3), (0, 1)]).unwrap();
        assert_eq!((cov.degree, cov.genus, cov.n(), cov.m()), (5, 1, 10, 4));
        assert!(cov.riemann_hurwitz_holds());
    }
}
