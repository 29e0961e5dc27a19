//! Integration contours on the covering: the rays `C_k^{r/l}` through the
//! ramification points, their ε-rotations, and the γ / Jordan bases expressed as
//! exact chains over `{C_k^r}`.

use crate::covering::{cis, Covering, CoveringKind, SurfacePoint};
use crate::error::{Error, Result};
use crate::monodromy::{self, GammaLabel, JordanLabel, Q};
use num_complex::Complex64 as C64;
use num_traits::One;
use serde::Serialize;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

/// Which half-plane a solution lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    R,
    L,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ContourLabel {
    Cr(usize),
    Cl(usize),
    A(usize),
    Bcyc(usize),
    Vinf(usize),
    W0i(usize),
    Tia(usize, usize),
    Jordan(usize),
    Deformed(Box<ContourLabel>, f64),
    /// Complex-conjugate image of a contour (used by the real doubles).
    Mirrored(Box<ContourLabel>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SegmentKind {
    RayToTruncation,
    Arc,
    StraightJoin,
}

/// Parameter interval of one piece of a contour; the geometry is shared by the
/// whole contour (see [`Contour::point`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathSegment {
    pub kind: SegmentKind,
    pub t0: f64,
    pub t1: f64,
}

/// A complex number together with the branch of its argument, which fixes `√z`
/// and the direction in which the contours are continued.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZLift {
    pub z: C64,
    pub arg: f64,
}

impl ZLift {
    /// Argument taken in `(φ − π, φ + π]`, i.e. `√z` with its cut along `l_−`.
    pub fn new(z: C64, phi: f64) -> Self {
        let mut arg = z.arg();
        while arg <= phi - PI {
            arg += 2.0 * PI;
        }
        while arg > phi + PI {
            arg -= 2.0 * PI;
        }
        Self { z, arg }
    }

    pub fn polar(modulus: f64, arg: f64) -> Self {
        Self { z: C64::from_polar(modulus, arg), arg }
    }

    pub fn sqrt(&self) -> C64 {
        C64::from_polar(self.z.norm().sqrt(), 0.5 * self.arg)
    }

    pub fn conj(&self) -> Self {
        Self { z: self.z.conj(), arg: -self.arg }
    }

    pub fn shifted(&self, h: C64) -> Self {
        let z = self.z + h;
        let mut arg = z.arg();
        while arg - self.arg > PI {
            arg -= 2.0 * PI;
        }
        while arg - self.arg < -PI {
            arg += 2.0 * PI;
        }
        Self { z, arg }
    }
}

/// Exponent at which contours are truncated: `|e^{z(λ − λ_k)}| ≤ e^{−60}` beyond.
pub const TAIL_EXPONENT: f64 = 60.0;
/// Angular clearance kept from branch directions when rotating a ray.
pub const CLEARANCE: f64 = 0.2;
/// Minimal decay rate `−Re(z e^{id})/|z|` accepted for a truncated contour.
pub const MIN_DECAY: f64 = 0.02;

#[derive(Debug, Clone)]
struct Track {
    /// Sorted samples `(|t|, x)` of the positive and negative halves.
    halves: [Vec<(f64, C64)>; 2],
    r0: f64,
}

/// Lift of the ray `λ = λ_k + t² e^{id}`, `t ∈ [−T, T]`, passing through `P_k`
/// with `x_k = t e^{iθ}`, `θ = d/2`.
#[derive(Debug, Clone)]
pub struct Contour {
    pub label: ContourLabel,
    pub k: usize,
    pub side: Side,
    /// Direction of the projection ray before any rotation.
    pub canonical_direction: f64,
    pub direction: f64,
    pub theta: f64,
    pub t_max: f64,
    pub rho: f64,
    /// Interval of `arg z` for which the end parts decay.
    pub sector: (f64, f64),
    pub segments: Vec<PathSegment>,
    track: Option<Arc<Track>>,
}

fn branch_directions(cov: &Covering, k: usize) -> Vec<(f64, f64)> {
    let lk = cov.branch_points[k];
    cov.branch_points
        .iter()
        .enumerate()
        .filter(|&(l, _)| l != k)
        .map(|(_, &ll)| ((ll - lk).arg(), (ll - lk).norm()))
        .collect()
}

/// First branch direction met when sweeping from `from` towards `to`, as the
/// signed sweep angle.
fn first_obstruction(cov: &Covering, k: usize, from: f64, to: f64) -> Option<f64> {
    let sweep = to - from;
    let mut best: Option<f64> = None;
    for (beta, _) in branch_directions(cov, k) {
        // representative of β − from in the sweep direction
        let mut delta = (beta - from).rem_euclid(2.0 * PI);
        if sweep < 0.0 {
            delta -= 2.0 * PI;
        }
        if delta.abs() <= sweep.abs() && delta != 0.0 && best.is_none_or(|b: f64| delta.abs() < b.abs()) {
            best = Some(delta);
        }
    }
    best
}

fn canonical(cov: &Covering, side: Side) -> (f64, (f64, f64)) {
    let phi = cov.line.phi;
    match side {
        Side::R => (1.5 * PI - phi, (phi - PI, phi)),
        Side::L => (0.5 * PI - phi, (phi, phi + PI)),
    }
}

/// `C_k^{r/l}`: the canonical ray out of `λ_k` (direction `3π/2 − φ` or `π/2 − φ`)
/// lifted through `P_k` from the lower to the upper sheet; truncated for `|z| = 1`.
pub fn build_c_side(cov: &Covering, k: usize, side: Side) -> Result<Contour> {
    if cov.kind == CoveringKind::DiagramOnly {
        return Err(Error::Unsupported("contours need an explicit covering".into()));
    }
    if k >= cov.n() {
        return Err(Error::Validation(format!("no ramification point {k}")));
    }
    let (d, sector) = canonical(cov, side);
    let scale = cov.branch_points.iter().map(|c| c.norm()).fold(1.0, f64::max);
    for (beta, dist) in branch_directions(cov, k) {
        let off = (beta - d).sin().abs() * dist;
        if (beta - d).cos() > 0.0 && off <= 1e-9 * scale {
            return Err(Error::ContourCollision(format!(
                "the ray out of λ_{} in direction {d:.6} passes through another branch point",
                k + 1
            )));
        }
    }
    let label = match side {
        Side::R => ContourLabel::Cr(k),
        Side::L => ContourLabel::Cl(k),
    };
    let theta = 0.5 * d;
    let rho = 0.1 * cov.min_spacing().sqrt();
    let mut c = Contour {
        label,
        k,
        side,
        canonical_direction: d,
        direction: d,
        theta,
        t_max: TAIL_EXPONENT.sqrt(),
        rho,
        sector,
        segments: Vec::new(),
        track: None,
    };
    c.set_segments();
    if cov.kind == CoveringKind::Rational {
        c.track = Some(Arc::new(c.build_track(cov)?));
    }
    Ok(c)
}

/// Clockwise ε-turn of the projection about `λ_k` (negative ε turns counterclockwise).
pub fn deform_for_ray(contour: &Contour, cov: &Covering, eps: f64) -> Result<Contour> {
    if eps == 0.0 {
        return Ok(contour.clone());
    }
    let target = contour.direction - eps;
    if let Some(hit) = first_obstruction(cov, contour.k, contour.canonical_direction, target) {
        return Err(Error::StokesRayCrossed(format!(
            "rotating C_{} by {eps:.4} crosses a branch direction after {:.4} rad",
            contour.k + 1,
            hit.abs()
        )));
    }
    let mut c = contour.clone();
    c.direction = target;
    c.theta = contour.theta - 0.5 * eps;
    c.label = ContourLabel::Deformed(Box::new(contour.label.clone()), eps);
    c.sector = (contour.sector.0 + eps, contour.sector.1 + eps);
    c.rebuild_track(cov)?;
    Ok(c)
}

/// Largest clockwise (`clockwise = true`) or counterclockwise turn of the
/// canonical ray before it meets a branch direction.
pub fn max_rotation(cov: &Covering, k: usize, side: Side, clockwise: bool) -> f64 {
    let (d, _) = canonical(cov, side);
    let to = if clockwise { d - 2.0 * PI } else { d + 2.0 * PI };
    first_obstruction(cov, k, d, to).map_or(2.0 * PI, f64::abs)
}

impl Contour {
    fn set_segments(&mut self) {
        let (t, r) = (self.t_max, self.rho.min(0.5 * self.t_max));
        self.segments = vec![
            PathSegment { kind: SegmentKind::RayToTruncation, t0: -t, t1: -r },
            PathSegment { kind: SegmentKind::Arc, t0: -r, t1: r },
            PathSegment { kind: SegmentKind::RayToTruncation, t0: r, t1: t },
        ];
    }

    /// Decay rate `−Re(z e^{id})`; positive when the ends of the contour decay.
    pub fn decay_rate(&self, z: C64) -> f64 {
        -(z * cis(self.direction)).re
    }

    /// `|e^{z(λ(Q) − λ_k)}|` at the truncation point.
    pub fn tail_bound(&self, z: C64) -> f64 {
        (-self.decay_rate(z) * self.t_max * self.t_max).exp()
    }

    /// Same geometry, truncated so that the tail for `z` is below `e^{−60}`.
    pub fn truncated(&self, cov: &Covering, z: &ZLift) -> Result<Contour> {
        let rate = self.decay_rate(z.z);
        if rate <= MIN_DECAY * z.z.norm() {
            return Err(Error::TailBoundViolated(format!(
                "Re(z e^{{id}}) = {:.3e} on C_{}: the ends do not decay at arg z = {:.4}",
                -rate,
                self.k + 1,
                z.arg
            )));
        }
        let mut c = self.clone();
        c.t_max = (TAIL_EXPONENT / rate).sqrt();
        c.set_segments();
        c.rebuild_track(cov)?;
        Ok(c)
    }

    /// Rotates the ray towards the steepest-descent direction `π − arg z`, keeping
    /// clear of the branch directions, then truncates.
    pub fn adapted(&self, cov: &Covering, z: &ZLift) -> Result<Contour> {
        let from = self.canonical_direction;
        let target = PI - z.arg;
        let mut d = target;
        if let Some(hit) = first_obstruction(cov, self.k, from, target + CLEARANCE * (target - from).signum()) {
            let room = (hit.abs() - CLEARANCE).max(0.5 * hit.abs());
            d = from + hit.signum() * room;
            if (d - from).abs() > (target - from).abs() {
                d = target;
            }
        }
        let mut c = self.clone();
        c.theta = self.theta + 0.5 * (d - self.direction);
        c.direction = d;
        c.truncated(cov, z).map_err(|e| match e {
            Error::TailBoundViolated(msg) => Error::StokesRayCrossed(format!(
                "z cannot be reached from the canonical C_{} without crossing a branch direction ({msg})",
                self.k + 1
            )),
            other => other,
        })
    }

    /// Complex-conjugate image: projection direction `−d`, `θ' = π − θ`.
    pub fn mirrored(&self, cov: &Covering) -> Result<Contour> {
        let mut c = self.clone();
        c.direction = -self.direction;
        c.canonical_direction = -self.canonical_direction;
        c.theta = PI - self.theta;
        c.sector = (-self.sector.1, -self.sector.0);
        c.label = ContourLabel::Mirrored(Box::new(self.label.clone()));
        c.rebuild_track(cov)?;
        Ok(c)
    }

    /// Projection `λ(t) = λ_k + t² e^{id}`.
    pub fn lambda(&self, cov: &Covering, t: f64) -> C64 {
        cov.branch_points[self.k] + t * t * cis(self.direction)
    }

    /// Local parameter `x_k(t) = t e^{iθ}`.
    pub fn local(&self, t: f64) -> C64 {
        t * cis(self.theta)
    }

    /// Point of the contour and `dQ/dt` expressed in that point's frame.
    pub fn point(&self, cov: &Covering, t: f64) -> Result<(SurfacePoint, C64)> {
        let e = cis(self.theta);
        match (&self.track, cov.kind) {
            (Some(track), CoveringKind::Rational) if t.abs() > track.r0 => {
                let x = self.tracked_x(cov, track, t)?;
                let map = cov.map.as_ref().expect("rational covering has a map");
                let dxdt = 2.0 * t * cis(self.direction) / map.derivative(x);
                Ok((SurfacePoint::X(x), dxdt))
            }
            _ => Ok((SurfacePoint::Local { k: self.k, x: t * e }, e)),
        }
    }

    /// Radius of the arc around `P_k` in the `x_k` plane.
    pub fn arc_radius(&self) -> f64 {
        self.segments.iter().find(|s| s.kind == SegmentKind::Arc).map_or(self.rho, |s| s.t1)
    }

    /// Point of the arc `x_k = ρ e^{i(θ + π − s)}`, `s ∈ [0, π]`, joining the two rays
    /// around `P_k`; returns the point, `dQ/ds` in its frame and `λ`.
    pub fn arc_point(&self, cov: &Covering, s: f64) -> (SurfacePoint, C64, C64) {
        let x = self.arc_radius() * cis(self.theta + PI - s);
        (SurfacePoint::Local { k: self.k, x }, -C64::new(0.0, 1.0) * x, cov.branch_points[self.k] + x * x)
    }

    /// +1 on the upper sheet (hyperelliptic) or on the outgoing half (rational).
    pub fn sheet(&self, cov: &Covering, t: f64) -> i8 {
        match cov.kind {
            CoveringKind::Hyperelliptic => {
                let lam = self.lambda(cov, t);
                let y = self.local(t) * cov.local_factor(self.k, lam);
                let yu = cov.y_upper(lam);
                if (y - yu).norm() <= (y + yu).norm() {
                    1
                } else {
                    -1
                }
            }
            _ => {
                if t >= 0.0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    /// Polyline export with columns `t, re_lambda, im_lambda, sheet`.
    pub fn to_csv(&self, cov: &Covering, samples: usize) -> String {
        let mut out = String::from("t,re_lambda,im_lambda,sheet\n");
        let m = samples.max(2);
        for s in 0..m {
            let t = -self.t_max + 2.0 * self.t_max * s as f64 / (m - 1) as f64;
            let l = self.lambda(cov, t);
            let _ = writeln!(out, "{t:.12e},{:.12e},{:.12e},{}", l.re, l.im, self.sheet(cov, t));
        }
        out
    }

    fn rebuild_track(&mut self, cov: &Covering) -> Result<()> {
        if self.track.is_some() {
            self.track = Some(Arc::new(self.build_track(cov)?));
        }
        Ok(())
    }

    fn newton(cov: &Covering, target: C64, mut x: C64) -> Option<C64> {
        let map = cov.map.as_ref()?;
        for _ in 0..40 {
            let d = map.derivative(x);
            if d.norm() == 0.0 {
                return None;
            }
            let step = (map.eval(x) - target) / d;
            x -= step;
            if step.norm() <= 1e-15 * (1.0 + x.norm()) {
                return Some(x);
            }
        }
        let resid = (map.eval(x) - target).norm();
        (resid <= 1e-12 * (1.0 + target.norm())).then_some(x)
    }

    /// Continuation of the preimage of the ray on both halves, from `|t| = r0`
    /// outwards, in steps small against the distance to the critical points.
    fn build_track(&self, cov: &Covering) -> Result<Track> {
        let map = cov.map.as_ref().ok_or_else(|| Error::Unsupported("path tracking needs a rational map".into()))?;
        let xc = cov.critical_points[self.k];
        let r0 = 0.25 * cov.min_spacing().sqrt();
        let lost = || Error::AssumptionViolated(format!("path tracking along C_{} lost the preimage", self.k + 1));
        let mut halves: [Vec<(f64, C64)>; 2] = [Vec::new(), Vec::new()];
        for (h, sign) in [1.0f64, -1.0].into_iter().enumerate() {
            let t0 = sign * r0;
            let mut x = xc + cov.frame[self.k] * self.local(t0);
            let target = self.lambda(cov, t0);
            // refine the seed through small steps of the local parameter
            for s in 1..=8 {
                let ts = t0 * s as f64 / 8.0;
                let guess = xc + cov.frame[self.k] * self.local(ts);
                x = Self::newton(cov, self.lambda(cov, ts), if s == 1 { guess } else { x }).ok_or_else(lost)?;
            }
            debug_assert!((map.eval(x) - target).norm() < 1e-8 * (1.0 + target.norm()));
            let mut t = r0;
            halves[h].push((t, x));
            while t < self.t_max * (1.0 + 1e-12) {
                let dxdt = 2.0 * sign * t * cis(self.direction) / map.derivative(x);
                let near = cov
                    .critical_points
                    .iter()
                    .chain(cov.infinity.iter().filter_map(|p| p.x.as_ref()))
                    .map(|c| (c - x).norm())
                    .fold(f64::INFINITY, f64::min)
                    .max(1e-6);
                let mut dt = (0.05 * near / dxdt.norm().max(1e-300)).min(0.02 * self.t_max).max(1e-9);
                loop {
                    let tn = (t + dt).min(self.t_max);
                    let guess = x + dxdt * (tn - t);
                    match Self::newton(cov, self.lambda(cov, sign * tn), guess) {
                        Some(xn) if (xn - guess).norm() <= 0.1 * near => {
                            t = tn;
                            x = xn;
                            break;
                        }
                        _ => {
                            dt *= 0.5;
                            if dt < 1e-12 {
                                return Err(lost());
                            }
                        }
                    }
                }
                halves[h].push((t, x));
                if t >= self.t_max {
                    break;
                }
            }
        }
        Ok(Track { halves, r0 })
    }

    fn tracked_x(&self, cov: &Covering, track: &Track, t: f64) -> Result<C64> {
        let half = &track.halves[usize::from(t < 0.0)];
        let a = t.abs();
        let idx = half.partition_point(|&(s, _)| s <= a).saturating_sub(1);
        let (s0, x0) = half[idx];
        let map = cov.map.as_ref().expect("rational covering has a map");
        let sign = t.signum();
        let dxdt = 2.0 * sign * s0 * cis(self.direction) / map.derivative(x0);
        Self::newton(cov, self.lambda(cov, t), x0 + dxdt * (a - s0))
            .ok_or_else(|| Error::AssumptionViolated(format!("path tracking along C_{} lost the preimage", self.k + 1)))
    }
}

/// All `n` contours of one side.
pub fn build_side(cov: &Covering, side: Side) -> Result<Vec<Contour>> {
    (0..cov.n()).map(|k| build_c_side(cov, k, side)).collect()
}

/// Integer (or rational) combination of the contours `C_k^r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourChain {
    pub label: ContourLabel,
    #[serde(serialize_with = "ser_q")]
    pub coeffs: Vec<Q>,
}

fn ser_q<S: serde::Serializer>(v: &[Q], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for q in v {
        seq.serialize_element(&format!("{q}"))?;
    }
    seq.end()
}

impl ContourChain {
    pub fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(|q| *q.numer() as f64 / *q.denom() as f64).collect()
    }
}

fn gamma_label(l: GammaLabel) -> ContourLabel {
    match l {
        GammaLabel::A(i) => ContourLabel::A(i),
        GammaLabel::B(i) => ContourLabel::Bcyc(i),
        GammaLabel::V(i) => ContourLabel::Vinf(i),
        GammaLabel::W0(i) => ContourLabel::W0i(i),
        GammaLabel::T(i, a) => ContourLabel::Tia(i, a),
    }
}

fn chains(m: &monodromy::QMat, labels: Vec<ContourLabel>) -> Vec<ContourChain> {
    labels
        .into_iter()
        .enumerate()
        .map(|(j, label)| ContourChain { label, coeffs: (0..m.rows).map(|i| m[(i, j)]).collect() })
        .collect()
}

fn decomposition(cov: &Covering) -> Result<monodromy::ChainDecomposition> {
    let cuts = cov
        .cuts
        .clone()
        .ok_or_else(|| Error::BasisDecompositionUnavailable("the covering has no sheet diagram".into()))?;
    monodromy::decompose(&cuts, cov.degree)
}

/// The γ basis `{a, b, V, W₀}` (or `{T_{0;1}}` for a single branch point).
pub fn build_gamma_basis(cov: &Covering) -> Result<Vec<ContourChain>> {
    if cov.n() == 1 {
        return Ok(vec![ContourChain { label: ContourLabel::Tia(0, 1), coeffs: vec![Q::one()] }]);
    }
    let dec = decomposition(cov)?;
    let labels = dec.gamma_labels.iter().map(|&l| gamma_label(l)).collect();
    Ok(chains(&dec.gamma, labels))
}

/// The Jordan basis `{a, b, Υ}`; its coordinate matrix is the connection matrix.
pub fn build_jordan_basis(cov: &Covering) -> Result<Vec<ContourChain>> {
    if cov.n() == 1 {
        return Ok(vec![ContourChain { label: ContourLabel::Jordan(0), coeffs: vec![Q::one()] }]);
    }
    let dec = decomposition(cov)?;
    let labels = (0..dec.jordan_labels.len()).map(ContourLabel::Jordan).collect();
    Ok(chains(&dec.jordan, labels))
}

/// Human-readable names of the Jordan contours.
pub fn jordan_names(cov: &Covering) -> Result<Vec<String>> {
    if cov.n() == 1 {
        return Ok(vec!["T_{0;1}".into()]);
    }
    Ok(decomposition(cov)?
        .jordan_labels
        .iter()
        .map(|l| match l {
            JordanLabel::A(i) => format!("a_{}", i + 1),
            JordanLabel::B(i) => format!("b_{}", i + 1),
            JordanLabel::Upsilon1(i) => format!("Upsilon_{}", 2 * i + 1),
            JordanLabel::Upsilon2(i) => format!("Upsilon_{}", 2 * i + 2),
            JordanLabel::Delta(i, a) => format!("Delta_{{{};{}}}", i, a),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn zlift_branch() {
        let z = ZLift::new(c(-1.0, -1e-9), 0.0);
        assert!(z.arg < -3.0);
        let w = ZLift::new(c(-1.0, 0.0), 0.0);
        assert!((w.sqrt() - c(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(z.conj().arg, -z.arg);
    }

    #[test]
    fn canonical_sectors_decay() {
        let cov = Covering::hyperelliptic(&[c(2.0, 0.0), c(-2.0, 0.0)], 0.4).unwrap();
        for side in [Side::R, Side::L] {
            let ct = build_c_side(&cov, 0, side).unwrap();
            let mid = 0.5 * (ct.sector.0 + ct.sector.1);
            assert!(ct.decay_rate(cis(mid)) > 0.99);
        }
    }
}
