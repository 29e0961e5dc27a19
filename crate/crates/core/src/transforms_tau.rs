//! Schlesinger transforms `Ψ ↦ (1 − T/z)Ψ` to the deformed (`W_q`) and real-double
//! (`Ω`, `B`) problems, and the tau-function identities at gradient level.

use crate::contours::{build_c_side, deform_for_ray, Contour, Side, ZLift};
use crate::covering::Covering;
use crate::error::{Error, Result};
use crate::kernels::{doubles_rotation_data, rotation_data, t_doubles, t_q, KernelEvaluator, KernelKind, Surface};
use crate::linalg::{self, CMat};
use crate::rh_solver::{contours_for, integrals, psi_on_contours, stokes_epsilon, Rows, SolverOptions};
use num_complex::Complex64 as C64;
use serde::Serialize;
use std::f64::consts::PI;

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GeneratorKind {
    Tq,
    Tdouble,
}

/// Nilpotent symmetric generator `T` of a dressing transform `G(z) = 1 − T/z`.
#[derive(Debug, Clone)]
pub struct SchlesingerGenerator {
    pub kind: GeneratorKind,
    pub matrix: CMat,
}

impl SchlesingerGenerator {
    pub fn g(&self, z: C64) -> CMat {
        let n = self.matrix.nrows();
        CMat::identity(n, n) - &self.matrix / z
    }

    /// `‖T²‖`.
    pub fn nilpotency(&self) -> f64 {
        linalg::norm(&(&self.matrix * &self.matrix))
    }

    /// `|det G(z) − 1|`.
    pub fn det_defect(&self, z: C64) -> f64 {
        (self.g(z).determinant() - 1.0).norm()
    }

    /// `‖G(−z)ᵀ G(z) − 1‖`.
    pub fn orthogonality_defect(&self, z: C64) -> f64 {
        let n = self.matrix.nrows();
        linalg::norm(&(self.g(-z).transpose() * self.g(z) - CMat::identity(n, n)))
    }
}

/// `(T_q)_{ij} = πi Σ (𝔹+q)⁻¹_{kl} ω_k(P_i) ω_l(P_j)`.
pub fn build_tq(kq: &KernelEvaluator) -> Result<SchlesingerGenerator> {
    if kq.kind != KernelKind::Wq {
        return Err(Error::Validation("T_q is built from a W_q evaluator".into()));
    }
    Ok(SchlesingerGenerator { kind: GeneratorKind::Tq, matrix: t_q(kq)? })
}

pub fn build_t_doubles(surface: &Surface) -> Result<SchlesingerGenerator> {
    Ok(SchlesingerGenerator { kind: GeneratorKind::Tdouble, matrix: t_doubles(surface)? })
}

fn prefactor(z: &ZLift) -> C64 {
    1.0 / (2.0 * I * PI.sqrt() * z.sqrt())
}

/// `Ψ e^{−zU}` for one kernel over given (already truncated) contours.
fn normalized(rows: Rows<'_>, cs: &[Contour], z: &ZLift, opts: &SolverOptions) -> Result<CMat> {
    Ok(integrals(rows, cs, z, 0, opts)?.0 * prefactor(z))
}

/// Relative residual of `Ψ_q = (1 − T_q/z)Ψ`, both sides on the same contours.
pub fn verify_deformed_transform(kq: &KernelEvaluator, z: ZLift, side: Side, opts: &SolverOptions) -> Result<f64> {
    let cov = kq.cov();
    let kw = KernelEvaluator::w(kq.surface.clone());
    let cs = contours_for(cov, side, &z)?;
    let psi = normalized(Rows::Kernel(&kw), &cs, &z, opts)?;
    let psi_q = normalized(Rows::Kernel(kq), &cs, &z, opts)?;
    let t = t_q(kq)?;
    let n = cov.n();
    let pred = (CMat::identity(n, n) - t / z.z) * &psi;
    Ok(linalg::rel_diff(&psi_q, &pred))
}

/// `Ψ_ΩB e^{−zU}` (U = diag(λ, λ̄)) on the contours `cs` and, for the antiholomorphic
/// columns, on their mirror images at `z̄`; also returns blockdiag(Ψ(z), conj Ψ(z̄))
/// on the same contours.
pub fn doubles_psi_on(surface: &Surface, z: ZLift, cs: &[Contour], opts: &SolverOptions) -> Result<(CMat, CMat)> {
    let cov = &surface.cov;
    let n = cov.n();
    let zb = z.conj();
    let cs: Vec<Contour> = cs.iter().map(|c| c.truncated(cov, &z)).collect::<Result<_>>()?;
    let mirrored: Vec<Contour> =
        cs.iter().map(|c| c.mirrored(cov)?.truncated(cov, &zb)).collect::<Result<_>>()?;
    let om = KernelEvaluator::new(surface.clone(), KernelKind::Schiffer, None)?;
    let bg = KernelEvaluator::new(surface.clone(), KernelKind::Bergman, None)?;
    let w = KernelEvaluator::w(surface.clone());
    let lt = normalized(Rows::Kernel(&om), &cs, &z, opts)?;
    let lb = normalized(Rows::Kernel(&bg), &cs, &z, opts)?;
    let rt = linalg::conj(&normalized(Rows::Kernel(&bg), &mirrored, &zb, opts)?);
    let rb = linalg::conj(&normalized(Rows::Kernel(&om), &mirrored, &zb, opts)?);
    let pw = normalized(Rows::Kernel(&w), &cs, &z, opts)?;
    let pwb = linalg::conj(&normalized(Rows::Kernel(&w), &mirrored, &zb, opts)?);
    let mut full = CMat::zeros(2 * n, 2 * n);
    let mut diag = CMat::zeros(2 * n, 2 * n);
    full.view_mut((0, 0), (n, n)).copy_from(&lt);
    full.view_mut((n, 0), (n, n)).copy_from(&lb);
    full.view_mut((0, n), (n, n)).copy_from(&rt);
    full.view_mut((n, n), (n, n)).copy_from(&rb);
    diag.view_mut((0, 0), (n, n)).copy_from(&pw);
    diag.view_mut((n, n), (n, n)).copy_from(&pwb);
    Ok((full, diag))
}

#[derive(Debug, Clone, Serialize)]
pub struct DoublesReport {
    /// `‖Ψ_ΩB − (1 − T/z) blockdiag(Ψ, conj Ψ(z̄))‖ / ‖Ψ_ΩB‖`.
    pub transform: f64,
    /// `|det(Ψ_ΩB e^{−zU}) − 1|`.
    pub det: f64,
    /// `‖Ψ_ΩB e^{−zU} − 1‖`.
    pub deviation: f64,
}

pub fn verify_doubles(surface: &Surface, z: ZLift, side: Side, opts: &SolverOptions) -> Result<DoublesReport> {
    let cs = contours_for(&surface.cov, side, &z)?;
    let (full, diag) = doubles_psi_on(surface, z, &cs, opts)?;
    let n2 = full.nrows();
    let t = t_doubles(surface)?;
    let pred = (CMat::identity(n2, n2) - t / z.z) * diag;
    Ok(DoublesReport {
        transform: linalg::rel_diff(&full, &pred),
        det: (full.determinant() - 1.0).norm(),
        deviation: linalg::norm(&(full - CMat::identity(n2, n2))),
    })
}

/// Numerical Stokes matrix of the doubles on `l_+`: `(Ψ^r_ΩB)⁻¹ Ψ^l_ΩB` with both
/// sides on ε-rotated contours.
pub fn doubles_stokes(surface: &Surface, modulus: f64, opts: &SolverOptions) -> Result<CMat> {
    let cov = &surface.cov;
    let eps = stokes_epsilon(cov);
    let z = ZLift::polar(modulus, cov.line.phi);
    let build = |side: Side, e: f64| -> Result<Vec<Contour>> {
        (0..cov.n()).map(|j| deform_for_ray(&build_c_side(cov, j, side)?, cov, e)).collect()
    };
    let (r, _) = doubles_psi_on(surface, z, &build(Side::R, eps)?, opts)?;
    let (l, _) = doubles_psi_on(surface, z, &build(Side::L, -eps)?, opts)?;
    // undo the normalization: Ψ = Φ e^{zU}
    let n = cov.n();
    let u: Vec<C64> = cov.branch_points.iter().copied().chain(cov.branch_points.iter().map(|c| c.conj())).collect();
    let scale = |m: CMat| CMat::from_fn(2 * n, 2 * n, |i, j| m[(i, j)] * (z.z * u[j]).exp());
    Ok(linalg::inverse(&scale(r))? * scale(l))
}

/// `Ψ_q` on ε-rotated contours at a point of `l_+`, to check that the deformed
/// problem has the same Stokes matrix.
pub fn deformed_stokes_residual(kq: &KernelEvaluator, modulus: f64, s: &CMat, opts: &SolverOptions) -> Result<f64> {
    let cov = kq.cov();
    let eps = stokes_epsilon(cov);
    let build = |side: Side, e: f64| -> Result<Vec<Contour>> {
        (0..cov.n()).map(|j| deform_for_ray(&build_c_side(cov, j, side)?, cov, e)).collect()
    };
    let z = ZLift::polar(modulus, cov.line.phi);
    let r = psi_on_contours(kq, z, &build(Side::R, eps)?, opts)?;
    let l = psi_on_contours(kq, z, &build(Side::L, -eps)?, opts)?;
    Ok(linalg::norm(&(&l.matrix - &r.matrix * s)) / linalg::norm(&r.matrix))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TauKind {
    /// Isomonodromic, from the rotation coefficients.
    I,
    /// Bergman, `−½ S^W_i`.
    W,
    /// Isomonodromic for the deformed coefficients.
    Iq,
    /// Isomonodromic for the real double (∂/∂λ_i then ∂/∂λ̄_i).
    OmegaB,
}

#[derive(Debug, Clone, Serialize)]
pub struct TauGradient {
    pub kind: TauKind,
    #[serde(serialize_with = "ser_c")]
    pub gradient: Vec<C64>,
}

fn ser_c<S: serde::Serializer>(v: &[C64], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for c in v {
        seq.serialize_element(&[c.re, c.im])?;
    }
    seq.end()
}

/// `∂_a log τ = −Σ_{b≠a} β_ab² (u_a − u_b)`.
pub fn isomonodromic_gradient(beta: &CMat, u: &[C64]) -> Vec<C64> {
    (0..u.len())
        .map(|a| -(0..u.len()).filter(|&b| b != a).map(|b| beta[(a, b)] * beta[(a, b)] * (u[a] - u[b])).sum::<C64>())
        .collect()
}

pub fn tau_i(k: &KernelEvaluator) -> Result<TauGradient> {
    let rot = rotation_data(k)?;
    let kind = if k.kind == KernelKind::Wq { TauKind::Iq } else { TauKind::I };
    Ok(TauGradient { kind, gradient: isomonodromic_gradient(&rot.beta, &rot.u) })
}

pub fn tau_w(surface: &Surface) -> Result<TauGradient> {
    let g = (0..surface.cov.n()).map(|i| Ok(-0.5 * surface.sw_at_ram(i)?)).collect::<Result<_>>()?;
    Ok(TauGradient { kind: TauKind::W, gradient: g })
}

pub fn tau_doubles(surface: &Surface) -> Result<TauGradient> {
    let rot = doubles_rotation_data(surface)?;
    Ok(TauGradient { kind: TauKind::OmegaB, gradient: isomonodromic_gradient(&rot.beta, &rot.u) })
}

/// `tr((𝔹+q)⁻¹ ∂_i𝔹)` with `∂_i𝔹 = πi ω(P_i)ω(P_i)ᵀ`.
pub fn det_bq_gradient(kq: &KernelEvaluator) -> Result<Vec<C64>> {
    let s = &kq.surface;
    let n = s.cov.n();
    let Some(per) = &s.periods else { return Ok(vec![C64::new(0.0, 0.0); n]) };
    let q = kq.q.clone().ok_or_else(|| Error::Validation("deformed kernel without q".into()))?;
    let inv = linalg::inverse(&(&per.riemann + q))?;
    let om = s.omega_at_ram()?;
    Ok((0..n)
        .map(|i| {
            let w = om.row(i).transpose();
            (w.transpose() * &inv * &w)[(0, 0)] * (PI * I)
        })
        .collect())
}

/// `∂_{λ_i} log det Im𝔹` by Wirtinger central differences.
pub fn log_det_im_b_gradient(surface: &Surface, h: f64) -> Result<Vec<C64>> {
    let f = |s: &Surface| -> f64 {
        s.periods.as_ref().map_or(0.0, |p| p.riemann.map(|c| c.im).determinant().ln())
    };
    (0..surface.cov.n())
        .map(|i| {
            let d = |dir: C64| -> Result<f64> {
                Ok((f(&surface.perturbed(i, dir * h)?) - f(&surface.perturbed(i, -dir * h)?)) / (2.0 * h))
            };
            let dx = d(C64::new(1.0, 0.0))?;
            let dy = d(I)?;
            Ok(0.5 * C64::new(dx, -dy))
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct TauReport {
    /// `max_i |∂_i log τ_I + ½ S^W_i|`.
    pub tau_i_vs_w: f64,
    /// `max_i |∂_i log τ_Iq − ∂_i log τ_W − tr((𝔹+q)⁻¹∂_i𝔹)|` (if q given).
    pub deformed: Option<f64>,
    /// Least-squares factor c in `∂ log τ_Iq − ∂ log τ_W = c·tr((𝔹+q)⁻¹∂𝔹)`.
    #[serde(serialize_with = "ser_opt_c")]
    pub deformed_factor: Option<C64>,
    /// `max |∂ log τ_ΩB − ∂(log|τ_W|² + log det Im𝔹)|` over λ and λ̄.
    pub doubles: f64,
    /// Largest asymmetry of the finite-difference Hessian of `log τ_I`.
    pub cross_partials: Option<f64>,
}

fn ser_opt_c<S: serde::Serializer>(v: &Option<C64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(c) => s.serialize_some(&[c.re, c.im]),
        None => s.serialize_none(),
    }
}

fn max_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Cross-partial symmetry `∂_j ∂_i log τ_I = ∂_i ∂_j log τ_I` by central differences.
pub fn tau_cross_partials(surface: &Surface, h: f64) -> Result<f64> {
    let n = surface.cov.n();
    let grad = |s: &Surface| -> Result<Vec<C64>> { Ok(tau_i(&KernelEvaluator::w(s.clone()))?.gradient) };
    let mut hess = CMat::zeros(n, n);
    for j in 0..n {
        let p = grad(&surface.perturbed(j, C64::new(h, 0.0))?)?;
        let m = grad(&surface.perturbed(j, C64::new(-h, 0.0))?)?;
        for i in 0..n {
            hess[(i, j)] = (p[i] - m[i]) / (2.0 * h);
        }
    }
    Ok(linalg::max_abs(&(&hess - hess.transpose())))
}

pub fn tau_gradients(surface: &Surface, q: Option<&CMat>, cross_h: Option<f64>) -> Result<TauReport> {
    let ti = tau_i(&KernelEvaluator::w(surface.clone()))?;
    let tw = tau_w(surface)?;
    let tau_i_vs_w = max_diff(&ti.gradient, &tw.gradient);
    let (deformed, deformed_factor) = match q {
        Some(q) if surface.genus() > 0 => {
            let kq = KernelEvaluator::new(surface.clone(), KernelKind::Wq, Some(q.clone()))?;
            let tq = tau_i(&kq)?;
            let tr = det_bq_gradient(&kq)?;
            let lhs: Vec<C64> = tq.gradient.iter().zip(&tw.gradient).map(|(a, b)| a - b).collect();
            let num: C64 = lhs.iter().zip(&tr).map(|(l, t)| l * t.conj()).sum();
            let den: f64 = tr.iter().map(|t| t.norm_sqr()).sum();
            let factor = if den > 0.0 { num / den } else { C64::new(0.0, 0.0) };
            (Some(max_diff(&lhs, &tr)), Some(factor))
        }
        _ => (None, None),
    };
    let td = tau_doubles(surface)?;
    let dl = log_det_im_b_gradient(surface, 1e-5)?;
    let holo: Vec<C64> = tw.gradient.iter().zip(&dl).map(|(a, b)| a + b).collect();
    let rhs: Vec<C64> = holo.iter().copied().chain(holo.iter().map(|c| c.conj())).collect();
    let doubles = max_diff(&td.gradient, &rhs);
    let cross_partials = cross_h.map(|h| tau_cross_partials(surface, h)).transpose()?;
    Ok(TauReport { tau_i_vs_w, deformed, deformed_factor, doubles, cross_partials })
}

/// Rauch variational checks by finite differences: `∂W`, `∂𝔹`, `∂Ω`, `∂̄B` at sample
/// points, returning the largest absolute deviation of each.
#[derive(Debug, Clone, Serialize)]
pub struct RauchReport {
    pub w: f64,
    pub riemann: f64,
    pub schiffer: f64,
    pub bergman_bar: f64,
    /// `max |Σ_j ω_k(P_j) ω_l(P_j)|`.
    pub sum_rule: f64,
}

pub fn rauch_suite(surface: &Surface, h: f64) -> Result<RauchReport> {
    let cov = &surface.cov;
    let n = cov.n();
    let (lp, lq) = sample_points(cov);
    let up = |s: &Surface, l: C64| s.cov.point_upper(l);
    let d = |k: usize, dir: C64, f: &dyn Fn(&Surface) -> Result<C64>| -> Result<C64> {
        Ok((f(&surface.perturbed(k, dir * h)?)? - f(&surface.perturbed(k, -dir * h)?)?) / (2.0 * h))
    };
    let wirt = |k: usize, bar: bool, f: &dyn Fn(&Surface) -> Result<C64>| -> Result<C64> {
        let dx = d(k, C64::new(1.0, 0.0), f)?;
        let dy = d(k, I, f)?;
        Ok(if bar { 0.5 * (dx + I * dy) } else { 0.5 * (dx - I * dy) })
    };
    let om = |s: &Surface| KernelEvaluator::new(s.clone(), KernelKind::Schiffer, None);
    let bg = |s: &Surface| KernelEvaluator::new(s.clone(), KernelKind::Bergman, None);
    let (o0, b0) = (om(surface)?, bg(surface)?);
    let (p, q) = (up(surface, lp), up(surface, lq));
    let mut rep = RauchReport { w: 0.0, riemann: 0.0, schiffer: 0.0, bergman_bar: 0.0, sum_rule: 0.0 };
    for k in 0..n {
        let pk = crate::covering::SurfacePoint::Ram(k);
        let fd = d(k, C64::new(1.0, 0.0), &|s| s.w(up(s, lp), up(s, lq)))?;
        let want = 0.5 * surface.w(p, pk)? * surface.w(pk, q)?;
        rep.w = rep.w.max((fd - want).norm());
        if surface.genus() > 0 {
            let g = surface.genus();
            let omk = surface.omega(pk)?;
            for a in 0..g {
                for b in 0..g {
                    let fd = d(k, C64::new(1.0, 0.0), &|s| Ok(s.periods.as_ref().map_or(C64::new(0.0, 0.0), |p| p.riemann[(a, b)])))?;
                    rep.riemann = rep.riemann.max((fd - PI * I * omk[a] * omk[b]).norm());
                }
            }
            let fd = wirt(k, false, &|s| om(s)?.eval(up(s, lp), up(s, lq)))?;
            let want = 0.5 * o0.eval(p, pk)? * o0.eval(pk, q)?;
            rep.schiffer = rep.schiffer.max((fd - want).norm());
            let fd = wirt(k, true, &|s| bg(s)?.eval(up(s, lp), up(s, lq)))?;
            let want = 0.5 * b0.eval(p, pk)? * o0.eval(pk, q)?.conj();
            rep.bergman_bar = rep.bergman_bar.max((fd - want).norm());
        }
    }
    if surface.genus() > 0 {
        let om = surface.omega_at_ram()?;
        rep.sum_rule = linalg::max_abs(&(om.transpose() * om));
    }
    Ok(rep)
}

/// Two generic points away from the branch points and cuts.
fn sample_points(cov: &Covering) -> (C64, C64) {
    let scale = cov.branch_points.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let centre: C64 = cov.branch_points.iter().sum::<C64>() / cov.n() as f64;
    (centre + scale * C64::new(0.13, 0.61), centre + scale * C64::new(-0.21, -0.53))
}

pub fn rotation_coefficients_antisymmetry(k: &KernelEvaluator) -> Result<f64> {
    let rot = rotation_data(k)?;
    // r_ij = β_ij(λ_j − λ_i) is antisymmetric
    Ok(linalg::max_abs(&(&rot.v + rot.v.transpose())))
}
