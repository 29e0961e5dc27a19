//! Contour-integral solutions of `dΨ/dz = (U + V/z)Ψ`:
//! `Ψ_ij(z) = (2i√π √z)⁻¹ ∫_{C_j} e^{zλ(Q)} W(Q, P_i)`, evaluated by adaptive
//! quadrature along the rays of [`crate::contours`], plus the numerical checks of
//! the differential equations, determinant, Stokes relations and asymptotics.

pub use crate::contours::{Side, ZLift};

use crate::contours::{build_c_side, build_gamma_basis, build_jordan_basis, deform_for_ray, max_rotation, Contour};
use crate::covering::{cis, Covering, CoveringKind, SurfacePoint};
use crate::error::{Error, Result};
use crate::kernels::{rotation_data, KernelEvaluator, Surface};
use crate::linalg::{self, CMat};
use crate::monodromy::{MonodromyData, QMat};
use crate::quad::{adaptive, Tolerance};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;
use std::cell::RefCell;
use std::f64::consts::PI;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub tol: Tolerance,
    pub initial_panels: usize,
    /// Largest accepted quadrature error estimate relative to the column scale.
    pub max_error: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: Tolerance { abs: 1e-14, rel: 1e-12, max_depth: 30 }, initial_panels: 12, max_error: 1e-8 }
    }
}

impl SolverOptions {
    /// Looser schedule (nodes roughly halved) used for resolution-doubling checks.
    pub fn coarse() -> Self {
        Self { tol: Tolerance { abs: 1e-11, rel: 1e-9, max_depth: 30 }, initial_panels: 6, max_error: 1e-6 }
    }
}

/// What the rows of a column integral are.
#[derive(Clone, Copy)]
pub enum Rows<'a> {
    /// `K(Q, P_i)` (or `B(Q, P̄_i)` for the Bergman kind).
    Kernel(&'a KernelEvaluator),
    /// The normalized holomorphic differentials `ω_l(Q)`.
    Omega(&'a Surface),
}

impl Rows<'_> {
    fn cov(&self) -> &Covering {
        match self {
            Rows::Kernel(k) => k.cov(),
            Rows::Omega(s) => &s.cov,
        }
    }

    fn dim(&self) -> usize {
        match self {
            Rows::Kernel(k) => k.cov().n(),
            Rows::Omega(s) => s.genus(),
        }
    }

    fn eval(&self, q: SurfacePoint) -> Result<Vec<C64>> {
        match self {
            Rows::Kernel(k) => (0..k.cov().n()).map(|i| k.eval(q, SurfacePoint::Ram(i))).collect(),
            Rows::Omega(s) => s.omega(q),
        }
    }
}

/// `∫_C e^{z(λ − λ_k)} λ^m row_i(Q)` over one contour, with its error estimate.
#[derive(Debug, Clone)]
pub struct ColumnIntegral {
    pub value: Vec<C64>,
    pub error: f64,
}

pub fn column_integral(
    rows: Rows<'_>,
    contour: &Contour,
    z: &ZLift,
    moment: u32,
    opts: &SolverOptions,
) -> Result<ColumnIntegral> {
    let cov = rows.cov();
    let dim = rows.dim();
    let lk = cov.branch_points[contour.k];
    let e_id = cis(contour.direction);
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let accumulate = |acc: &mut [C64], q: Result<(SurfacePoint, C64)>, lam: C64| {
        if failure.borrow().is_some() {
            return;
        }
        let ex = (z.z * (lam - lk)).exp();
        let weight = if moment == 0 { ex } else { ex * lam };
        match q.and_then(|(q, dq)| Ok((rows.eval(q)?, dq))) {
            Ok((vals, dq)) => {
                for (a, v) in acc.iter_mut().zip(vals) {
                    *a += weight * v * dq;
                }
            }
            Err(e) => *failure.borrow_mut() = Some(e),
        }
    };
    // the two rays |t| ∈ [ρ, T]
    let rays = |t: f64| -> Vec<C64> {
        let mut acc = vec![C64::new(0.0, 0.0); dim];
        for s in [t, -t] {
            accumulate(&mut acc, contour.point(cov, s), lk + s * s * e_id);
        }
        acc
    };
    let rho = contour.arc_radius();
    let a = adaptive(rays, rho, contour.t_max, dim, opts.initial_panels, opts.tol);
    // the arc around P_k
    let arc = |s: f64| -> Vec<C64> {
        let mut acc = vec![C64::new(0.0, 0.0); dim];
        let (q, dq, lam) = contour.arc_point(cov, s);
        accumulate(&mut acc, Ok((q, dq)), lam);
        acc
    };
    let b = adaptive(arc, 0.0, PI, dim, 4, opts.tol);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let value: Vec<C64> = a.value.iter().zip(&b.value).map(|(x, y)| x + y).collect();
    let error = a.error + b.error;
    let scale = value.iter().map(|c| c.norm()).fold(1.0, f64::max);
    if !error.is_finite() || error > opts.max_error * scale {
        return Err(Error::QuadratureFailure { estimate: error, tolerance: opts.max_error * scale });
    }
    Ok(ColumnIntegral { value, error })
}

/// Matrix of column integrals over a contour system (columns in parallel).
pub fn integrals(
    rows: Rows<'_>,
    contours: &[Contour],
    z: &ZLift,
    moment: u32,
    opts: &SolverOptions,
) -> Result<(CMat, Vec<f64>)> {
    let cols: Vec<ColumnIntegral> = contours
        .par_iter()
        .map(|c| column_integral(rows, c, z, moment, opts))
        .collect::<Result<_>>()?;
    let dim = rows.dim();
    let m = CMat::from_fn(dim, contours.len(), |i, j| cols[j].value[i]);
    Ok((m, cols.iter().map(|c| c.error).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameKind {
    R,
    L,
    /// `Ψ̃₀`, columns over the γ basis.
    Zero,
    /// `Ψ₀`, columns over the Jordan basis.
    Jordan,
    /// Explicit (e.g. ε-deformed) contours.
    Custom,
}

#[derive(Debug, Clone)]
pub struct SolutionFrame {
    pub z: C64,
    pub arg: f64,
    pub side: FrameKind,
    /// `Ψ(z)`.
    pub matrix: CMat,
    /// `Ψ(z) e^{−zU}` for the sectorial solutions.
    pub normalized: CMat,
    /// Per-entry error estimates of `Ψ`.
    pub err: DMatrix<f64>,
    /// Branch of `√z` used in the prefactor.
    pub sqrt_z: C64,
    pub directions: Vec<f64>,
}

impl SolutionFrame {
    pub fn det_residual(&self) -> f64 {
        (self.normalized.determinant() - 1.0).norm()
    }
}

fn prefactor(z: &ZLift) -> C64 {
    1.0 / (2.0 * I * PI.sqrt() * z.sqrt())
}

fn validate_z(z: &ZLift) -> Result<()> {
    if !z.z.re.is_finite() || !z.z.im.is_finite() || z.z.norm() == 0.0 {
        return Err(Error::Validation("z must be finite and non-zero".into()));
    }
    Ok(())
}

/// Canonical contours of one side, rotated towards the steepest-descent
/// direction for `z` and truncated.
pub fn contours_for(cov: &Covering, side: Side, z: &ZLift) -> Result<Vec<Contour>> {
    (0..cov.n()).map(|k| build_c_side(cov, k, side)?.adapted(cov, z)).collect()
}

/// Ψ over explicit contours (truncated for `z`, geometry kept).
pub fn psi_on_contours(k: &KernelEvaluator, z: ZLift, contours: &[Contour], opts: &SolverOptions) -> Result<SolutionFrame> {
    validate_z(&z)?;
    let cov = k.cov();
    let cs: Vec<Contour> = contours.iter().map(|c| c.truncated(cov, &z)).collect::<Result<_>>()?;
    frame_from(k, z, &cs, FrameKind::Custom, opts)
}

fn frame_from(k: &KernelEvaluator, z: ZLift, cs: &[Contour], side: FrameKind, opts: &SolverOptions) -> Result<SolutionFrame> {
    let cov = k.cov();
    let (m, errs) = integrals(Rows::Kernel(k), cs, &z, 0, opts)?;
    let pref = prefactor(&z);
    let normalized = m * pref;
    let n = cs.len();
    let matrix = CMat::from_fn(n, n, |i, j| normalized[(i, j)] * (z.z * cov.branch_points[cs[j].k]).exp());
    let err = DMatrix::from_fn(n, n, |_, j| errs[j] * pref.norm() * (z.z * cov.branch_points[cs[j].k]).exp().norm());
    Ok(SolutionFrame {
        z: z.z,
        arg: z.arg,
        side,
        matrix,
        normalized,
        err,
        sqrt_z: z.sqrt(),
        directions: cs.iter().map(|c| c.direction).collect(),
    })
}

/// `Ψ^{r/l}(z)`, `Ψ̃₀(z) = Ψ^r G` or `Ψ₀(z) = Ψ^r C`.
pub fn psi_matrix(k: &KernelEvaluator, z: ZLift, side: FrameKind, opts: &SolverOptions) -> Result<SolutionFrame> {
    validate_z(&z)?;
    let cov = k.cov();
    match side {
        FrameKind::R | FrameKind::L => {
            let s = if side == FrameKind::R { Side::R } else { Side::L };
            let cs = contours_for(cov, s, &z)?;
            frame_from(k, z, &cs, side, opts)
        }
        FrameKind::Zero | FrameKind::Jordan => {
            let base = psi_matrix(k, z, FrameKind::R, opts)?;
            let chains = if side == FrameKind::Zero { build_gamma_basis(cov)? } else { build_jordan_basis(cov)? };
            let n = cov.n();
            let g = CMat::from_fn(n, n, |i, j| C64::new(chains[j].coeffs_f64()[i], 0.0));
            let matrix = &base.matrix * &g;
            let absg = g.map(|c| c.norm());
            let err = &base.err * absg;
            Ok(SolutionFrame { side, normalized: matrix.clone(), matrix, err, ..base })
        }
        FrameKind::Custom => Err(Error::Validation("custom frames need explicit contours".into())),
    }
}

/// Residual of a numerical check against its tolerance.
#[derive(Debug, Clone, Serialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Residual {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self { name: name.into(), value, tolerance, pass: value.is_finite() && value <= tolerance }
    }
}

fn column_scaled(m: &CMat, z: C64, u: &[C64]) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * (-z * u[j]).exp())
}

/// Central-difference check of `dΨ/dz = (U + V/z)Ψ`, measured column-wise after
/// removing `e^{zU}`.
pub fn verify_ode_z(k: &KernelEvaluator, z: ZLift, side: Side, h: f64, opts: &SolverOptions) -> Result<f64> {
    let cov = k.cov();
    let cs = contours_for(cov, side, &z)?;
    let at = |w: ZLift| -> Result<CMat> {
        let c: Vec<Contour> = cs.iter().map(|c| c.truncated(cov, &w)).collect::<Result<_>>()?;
        Ok(frame_from(k, w, &c, FrameKind::Custom, opts)?.matrix)
    };
    let psi = at(z)?;
    let hc = C64::new(h, 0.0);
    let dpsi = (at(z.shifted(hc))? - at(z.shifted(-hc))?) / (2.0 * hc);
    let rot = rotation_data(k)?;
    let n = cov.n();
    let a = CMat::from_fn(n, n, |i, j| {
        let u = if i == j { rot.u[i] } else { C64::new(0.0, 0.0) };
        u + rot.v[(i, j)] / z.z
    });
    let rhs = &a * &psi;
    let u = &cov.branch_points;
    Ok(linalg::norm(&column_scaled(&(dpsi - &rhs), z.z, u)) / linalg::norm(&column_scaled(&rhs, z.z, u)))
}

fn require_hyperelliptic(cov: &Covering) -> Result<()> {
    if cov.kind != CoveringKind::Hyperelliptic {
        return Err(Error::Unsupported("λ-derivatives are computed on the hyperelliptic family only".into()));
    }
    Ok(())
}

/// Finite-difference check of `∂Ψ/∂λ_i = (zE_i − [E_i, Γ])Ψ`, rebuilding the covering
/// at `λ_i ± h`.
pub fn verify_ode_lambda(k: &KernelEvaluator, z: ZLift, side: Side, i: usize, h: f64, opts: &SolverOptions) -> Result<f64> {
    let cov = k.cov();
    require_hyperelliptic(cov)?;
    let solve = |s: Surface| -> Result<CMat> {
        let kk = k.rebuilt(s)?;
        let cs = contours_for(kk.cov(), side, &z)?;
        Ok(frame_from(&kk, z, &cs, FrameKind::Custom, opts)?.matrix)
    };
    let hc = C64::new(h, 0.0);
    let plus = solve(k.surface.perturbed(i, hc)?)?;
    let minus = solve(k.surface.perturbed(i, -hc)?)?;
    let psi = psi_matrix(k, z, if side == Side::R { FrameKind::R } else { FrameKind::L }, opts)?.matrix;
    let d = (plus - minus) / (2.0 * hc);
    let gamma = rotation_data(k)?.gamma;
    let n = cov.n();
    // (zE_i − [E_i, Γ])_{ab} = z δ_ai δ_bi − δ_ai Γ_ib + Γ_ai δ_bi
    let a = CMat::from_fn(n, n, |r, c| {
        let mut v = C64::new(0.0, 0.0);
        if r == i && c == i {
            v += z.z;
        }
        if r == i {
            v -= gamma[(i, c)];
        }
        if c == i {
            v += gamma[(r, i)];
        }
        v
    });
    let rhs = &a * &psi;
    let u = &cov.branch_points;
    Ok(linalg::norm(&column_scaled(&(d - &rhs), z.z, u)) / linalg::norm(&column_scaled(&psi, z.z, u)).max(1e-300))
}

fn raw_integrals(rows: Rows<'_>, cov: &Covering, side: Side, z: &ZLift, moment: u32, opts: &SolverOptions) -> Result<CMat> {
    let cs = contours_for(cov, side, z)?;
    let (m, _) = integrals(rows, &cs, z, moment, opts)?;
    // undo the e^{−zλ_j} normalization
    Ok(CMat::from_fn(m.nrows(), m.ncols(), |r, j| m[(r, j)] * (z.z * cov.branch_points[cs[j].k]).exp()))
}

fn shift_and_scale_residual(lhs: &CMat, rhs: &CMat, z: C64, cov: &Covering) -> f64 {
    let u = &cov.branch_points;
    linalg::norm(&column_scaled(&(lhs - rhs), z, u)) / linalg::norm(&column_scaled(rhs, z, u)).max(1e-300)
}

/// Euler-field identity `Σ_k λ_k ∂_k ∫ e^{zλ}W(Q,P_i) = z∫λe^{zλ}W(Q,P_i) − ½∫e^{zλ}W(Q,P_i)`
/// by scaling the branch points.
pub fn verify_euler(k: &KernelEvaluator, z: ZLift, side: Side, h: f64, opts: &SolverOptions) -> Result<f64> {
    let cov = k.cov();
    require_hyperelliptic(cov)?;
    let at = |f: f64| -> Result<CMat> {
        let kk = k.rebuilt(k.surface.transformed(|l| l * f)?)?;
        raw_integrals(Rows::Kernel(&kk), kk.cov(), side, &z, 0, opts)
    };
    let lhs = (at(1.0 + h)? - at(1.0 - h)?) / C64::new(2.0 * h, 0.0);
    let i0 = raw_integrals(Rows::Kernel(k), cov, side, &z, 0, opts)?;
    let i1 = raw_integrals(Rows::Kernel(k), cov, side, &z, 1, opts)?;
    let rhs = i1 * z.z - i0 * C64::new(0.5, 0.0);
    Ok(shift_and_scale_residual(&lhs, &rhs, z.z, cov))
}

/// Shift identity `Σ_j ∂_j ∫ e^{zλ} row = z ∫ e^{zλ} row` for kernel or ω rows.
pub fn verify_shift(rows: Rows<'_>, z: ZLift, side: Side, h: f64, opts: &SolverOptions) -> Result<f64> {
    let cov = rows.cov();
    require_hyperelliptic(cov)?;
    let hc = C64::new(h, 0.0);
    let (plus, minus) = match rows {
        Rows::Kernel(k) => {
            let p = k.rebuilt(k.surface.transformed(|l| l + hc)?)?;
            let m = k.rebuilt(k.surface.transformed(|l| l - hc)?)?;
            (
                raw_integrals(Rows::Kernel(&p), p.cov(), side, &z, 0, opts)?,
                raw_integrals(Rows::Kernel(&m), m.cov(), side, &z, 0, opts)?,
            )
        }
        Rows::Omega(s) => {
            let p = s.transformed(|l| l + hc)?;
            let m = s.transformed(|l| l - hc)?;
            (
                raw_integrals(Rows::Omega(&p), &p.cov, side, &z, 0, opts)?,
                raw_integrals(Rows::Omega(&m), &m.cov, side, &z, 0, opts)?,
            )
        }
    };
    let lhs = (plus - minus) / (2.0 * hc);
    let rhs = raw_integrals(rows, cov, side, &z, 0, opts)? * z.z;
    Ok(shift_and_scale_residual(&lhs, &rhs, z.z, cov))
}

/// `|det Ψ − e^{zΣλ}| / |e^{zΣλ}|`.
pub fn verify_det(frame: &SolutionFrame) -> f64 {
    frame.det_residual()
}

/// Rotation angle used for the Stokes checks: half the smallest gap to a branch
/// direction over all contours and both boundary rays, capped at 1.
pub fn stokes_epsilon(cov: &Covering) -> f64 {
    let mut gap = f64::INFINITY;
    for k in 0..cov.n() {
        for side in [Side::R, Side::L] {
            for cw in [true, false] {
                gap = gap.min(max_rotation(cov, k, side, cw));
            }
        }
    }
    (0.5 * gap).min(1.0)
}

/// `Ψ^r` and `Ψ^l` at a point of `l_+` (`minus = false`) or `l_−`, each computed on
/// contours rotated by `eps` into its own decay region.
pub fn boundary_pair(
    k: &KernelEvaluator,
    modulus: f64,
    minus: bool,
    eps: f64,
    opts: &SolverOptions,
) -> Result<(SolutionFrame, SolutionFrame)> {
    let cov = k.cov();
    let phi = cov.line.phi;
    let (arg_r, arg_l, eps_r, eps_l) = if minus { (phi - PI, phi + PI, -eps, eps) } else { (phi, phi, eps, -eps) };
    let build = |side: Side, e: f64| -> Result<Vec<Contour>> {
        (0..cov.n()).map(|j| deform_for_ray(&build_c_side(cov, j, side)?, cov, e)).collect()
    };
    let zr = ZLift::polar(modulus, arg_r);
    let zl = ZLift::polar(modulus, arg_l);
    let r = psi_on_contours(k, zr, &build(Side::R, eps_r)?, opts)?;
    let l = psi_on_contours(k, zl, &build(Side::L, eps_l)?, opts)?;
    Ok((r, l))
}

#[derive(Debug, Clone, Serialize)]
pub struct StokesCheck {
    /// `‖Ψ^l − Ψ^r S‖ / ‖Ψ^r‖` on `l_+`.
    pub plus: f64,
    /// `‖Ψ^l − Ψ^r Sᵀ‖ / ‖Ψ^r‖` on `l_−`.
    pub minus: f64,
    pub eps: f64,
    pub modulus: f64,
}

pub fn verify_stokes_numeric(k: &KernelEvaluator, modulus: f64, s: &CMat, eps: Option<f64>, opts: &SolverOptions) -> Result<StokesCheck> {
    let eps = eps.unwrap_or_else(|| stokes_epsilon(k.cov()));
    let (rp, lp) = boundary_pair(k, modulus, false, eps, opts)?;
    let (rm, lm) = boundary_pair(k, modulus, true, eps, opts)?;
    let plus = linalg::norm(&(&lp.matrix - &rp.matrix * s)) / linalg::norm(&rp.matrix);
    let minus = linalg::norm(&(&lm.matrix - &rm.matrix * s.transpose())) / linalg::norm(&rm.matrix);
    Ok(StokesCheck { plus, minus, eps, modulus })
}

/// Numerical Stokes matrices `(Ψ^r)⁻¹Ψ^l` on `l_+` and `l_−`.
pub fn numeric_stokes(k: &KernelEvaluator, modulus: f64, eps: Option<f64>, opts: &SolverOptions) -> Result<(CMat, CMat)> {
    let eps = eps.unwrap_or_else(|| stokes_epsilon(k.cov()));
    let (rp, lp) = boundary_pair(k, modulus, false, eps, opts)?;
    let (rm, lm) = boundary_pair(k, modulus, true, eps, opts)?;
    Ok((linalg::inverse(&rp.matrix)? * lp.matrix, linalg::inverse(&rm.matrix)? * lm.matrix))
}

/// Monodromy of `Ψ̃₀` around the origin assembled from the numerical Stokes
/// matrices, `G⁻¹ X₋ X₊⁻¹ G`, compared with the exact `M̃₀`.
pub fn verify_monodromy_numeric(
    k: &KernelEvaluator,
    data: &MonodromyData,
    modulus: f64,
    opts: &SolverOptions,
) -> Result<(CMat, f64)> {
    let (xp, xm) = numeric_stokes(k, modulus, None, opts)?;
    let mr = &xm * linalg::inverse(&xp)?;
    let g = match &data.decomposition {
        Some(d) => d.gamma.to_complex(),
        None => QMat::identity(k.cov().n()).to_complex(),
    };
    let m = linalg::inverse(&g)? * mr * &g;
    let exact = data.m0_tilde.to_complex();
    Ok((m.clone(), linalg::rel_diff(&m, &exact)))
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticReport {
    pub arg: f64,
    pub moduli: Vec<f64>,
    /// `‖Ψ e^{−zU} − 1‖·|z|` at each modulus.
    pub scaled_deviation: Vec<f64>,
    /// Fitted `1/z` coefficient, row-major `[re, im]`.
    pub fitted: Vec<Vec<[f64; 2]>>,
    /// Largest off-diagonal `|fitted − Γ|`.
    pub gamma_error: f64,
}

/// Samples `Ψ^r e^{−zU}` along the ray `arg z = arg` and fits
/// `1 + A/z + B/z² + C/z³` by least squares.
pub fn asymptotics(k: &KernelEvaluator, arg: f64, moduli: &[f64], opts: &SolverOptions) -> Result<AsymptoticReport> {
    let n = k.cov().n();
    let mut samples = Vec::new();
    for &r in moduli {
        let z = ZLift::polar(r, arg);
        let f = psi_matrix(k, z, FrameKind::R, opts)?;
        samples.push((z.z, f.normalized - CMat::identity(n, n)));
    }
    let scaled_deviation = samples.iter().map(|(z, d)| linalg::norm(d) * z.norm()).collect();
    let terms = samples.len().min(3);
    let design = CMat::from_fn(samples.len(), terms, |s, p| samples[s].0.powi(-(p as i32 + 1)));
    let pinv = design.clone().pseudo_inverse(1e-14).map_err(|e| Error::ExpansionFailure(e.to_string()))?;
    let mut fitted = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let rhs = CMat::from_fn(samples.len(), 1, |s, _| samples[s].1[(i, j)]);
            fitted[(i, j)] = (&pinv * rhs)[(0, 0)];
        }
    }
    let gamma = rotation_data(k)?.gamma;
    let mut gamma_error: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                gamma_error = gamma_error.max((fitted[(i, j)] - gamma[(i, j)]).norm());
            }
        }
    }
    Ok(AsymptoticReport { arg, moduli: moduli.to_vec(), scaled_deviation, fitted: linalg::to_rows(&fitted), gamma_error })
}

/// Admissible ray in the middle of `Π^r`.
pub fn central_arg(cov: &Covering) -> f64 {
    cov.line.phi - 0.5 * PI
}
