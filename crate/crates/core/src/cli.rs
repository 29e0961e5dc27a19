//! Batch front end: JSON run configs in, JSON/CSV reports out.

use crate::contours::{build_c_side, Side, ZLift};
use crate::covering::{Covering, Cut};
use crate::error::{Error, Result};
use crate::kernels::{doubles_rotation_data, rotation_data, spectrum, KernelEvaluator, KernelKind, RotationData, Surface};
use crate::linalg::{self, CMat};
use crate::monodromy::{block_annotation, check_consistency, monodromy_data, MonodromyData};
use crate::rh_solver::{
    asymptotics, central_arg, psi_matrix, verify_det, verify_euler, verify_monodromy_numeric, verify_ode_lambda,
    verify_ode_z, verify_shift, verify_stokes_numeric, FrameKind, Residual, Rows, SolverOptions,
};
use crate::transforms_tau::{
    build_t_doubles, build_tq, deformed_stokes_residual, doubles_stokes, rauch_suite, tau_gradients,
    verify_deformed_transform, verify_doubles,
};
use crate::C64;
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_TOLERANCE: i32 = 2;
pub const EXIT_DIVISOR: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "hurwitz-rh", version, about = "Riemann–Hilbert problems on Hurwitz spaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for reports and CSV exports.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Multiplies every tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tol_scale: f64,
    /// Worker threads (advisory).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Eigenvalues of V against the predicted spectrum.
    Spectrum,
    /// Exact Stokes, connection and monodromy matrices.
    Stokes,
    /// Ψ at the configured z samples.
    Solve,
    /// Numerical verification suites.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Contour polylines as CSV.
    ExportContours,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Ode,
    Stokes,
    Tau,
    Transform,
    Doubles,
    Rauch,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoveringSpec {
    Hyperelliptic,
    Rational,
    Diagram,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub spectrum: f64,
    pub ode_z: f64,
    pub ode_lambda: f64,
    pub det: f64,
    pub stokes: f64,
    pub monodromy: f64,
    pub asymptotic: f64,
    pub nilpotency: f64,
    pub transform: f64,
    pub tau: f64,
    pub tau_deformed: f64,
    pub tau_doubles: f64,
    pub cross_partials: f64,
    pub rauch: f64,
    pub sum_rule: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            spectrum: 1e-10,
            ode_z: 1e-5,
            ode_lambda: 1e-4,
            det: 1e-5,
            stokes: 1e-4,
            monodromy: 1e-4,
            asymptotic: 1e-3,
            nilpotency: 1e-10,
            transform: 1e-4,
            tau: 1e-8,
            tau_deformed: 1e-6,
            tau_doubles: 1e-6,
            cross_partials: 1e-6,
            rauch: 1e-6,
            sum_rule: 1e-10,
        }
    }
}

impl Tolerances {
    fn scaled(&self, s: f64) -> Self {
        Self {
            spectrum: self.spectrum * s,
            ode_z: self.ode_z * s,
            ode_lambda: self.ode_lambda * s,
            det: self.det * s,
            stokes: self.stokes * s,
            monodromy: self.monodromy * s,
            asymptotic: self.asymptotic * s,
            nilpotency: self.nilpotency * s,
            transform: self.transform * s,
            tau: self.tau * s,
            tau_deformed: self.tau_deformed * s,
            tau_doubles: self.tau_doubles * s,
            cross_partials: self.cross_partials * s,
            rauch: self.rauch * s,
            sum_rule: self.sum_rule * s,
        }
    }

    fn all_positive(&self) -> bool {
        [
            self.spectrum,
            self.ode_z,
            self.ode_lambda,
            self.det,
            self.stokes,
            self.monodromy,
            self.asymptotic,
            self.nilpotency,
            self.transform,
            self.tau,
            self.tau_deformed,
            self.tau_doubles,
            self.cross_partials,
            self.rauch,
            self.sum_rule,
        ]
        .iter()
        .all(|t| t.is_finite() && *t > 0.0)
    }
}

/// Complex numbers are `[re, im]`, matrices row-major.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub kind: CoveringSpec,
    pub branch_points: Vec<[f64; 2]>,
    /// Ascending coefficients of `N` and `D` in `λ = N(x)/D(x)`.
    pub numerator: Vec<[f64; 2]>,
    pub denominator: Vec<[f64; 2]>,
    /// Sheet pairs of the cuts (diagram-only coverings, or an explicit diagram
    /// for a rational covering).
    pub cuts: Vec<[usize; 2]>,
    pub phi: f64,
    pub kernel: KernelKind,
    pub q: Option<Vec<Vec<[f64; 2]>>>,
    pub period_nodes: usize,
    pub z: Vec<[f64; 2]>,
    /// `|z|` on the boundary rays for the Stokes checks.
    pub stokes_modulus: f64,
    /// Rotation of the contours in the Stokes checks (default: half the gap).
    pub epsilon: Option<f64>,
    pub asymptotic_moduli: Vec<f64>,
    /// Step of the finite-difference checks in `z` and `λ`.
    pub fd_step: f64,
    /// Step of the Rauch / tau finite differences.
    pub rauch_step: f64,
    pub contour_samples: usize,
    pub tolerances: Tolerances,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            kind: CoveringSpec::Hyperelliptic,
            branch_points: Vec::new(),
            numerator: Vec::new(),
            denominator: Vec::new(),
            cuts: Vec::new(),
            phi: 0.0,
            kernel: KernelKind::W,
            q: None,
            period_nodes: 256,
            z: vec![[1.0, 0.0], [2.0, 1.0], [5.0, 0.0]],
            stokes_modulus: 3.0,
            epsilon: None,
            asymptotic_moduli: vec![10.0, 20.0, 40.0, 80.0],
            fd_step: 1e-4,
            rauch_step: 1e-5,
            contour_samples: 201,
            tolerances: Tolerances::default(),
        }
    }
}

fn complex(v: &[[f64; 2]]) -> Vec<C64> {
    v.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

fn c_json(c: C64) -> Value {
    json!([c.re, c.im])
}

fn m_json(m: &CMat) -> Value {
    json!(linalg::to_rows(m))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Validation(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.tolerances.all_positive() {
            return Err(Error::Validation("tolerances must be positive".into()));
        }
        if self.z.iter().any(|&[re, im]| !(re.is_finite() && im.is_finite()) || re.hypot(im) == 0.0) {
            return Err(Error::Validation("z samples must be finite and non-zero".into()));
        }
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if !positive(self.stokes_modulus) || !self.asymptotic_moduli.iter().all(|&r| positive(r)) {
            return Err(Error::Validation("moduli must be positive".into()));
        }
        if !(self.fd_step > 0.0 && self.rauch_step > 0.0) {
            return Err(Error::Validation("finite-difference steps must be positive".into()));
        }
        if self.kernel == KernelKind::Wq && self.q.is_none() {
            return Err(Error::Validation("kernel Wq needs q".into()));
        }
        Ok(())
    }

    pub fn covering(&self) -> Result<Covering> {
        let cuts: Vec<(usize, usize)> = self.cuts.iter().map(|&[a, b]| (a, b)).collect();
        match self.kind {
            CoveringSpec::Hyperelliptic => Covering::hyperelliptic(&complex(&self.branch_points), self.phi),
            CoveringSpec::Rational => {
                let cov = Covering::rational(&complex(&self.numerator), &complex(&self.denominator), self.phi)?;
                if cuts.is_empty() {
                    Ok(cov)
                } else {
                    cov.with_diagram(&cuts)
                }
            }
            CoveringSpec::Diagram => Covering::from_diagram(&cuts),
        }
    }

    pub fn q_matrix(&self) -> Result<Option<CMat>> {
        self.q.as_ref().map(|rows| linalg::from_rows(rows)).transpose()
    }

    pub fn z_lifts(&self) -> Vec<ZLift> {
        complex(&self.z).into_iter().map(|z| ZLift::new(z, self.phi)).collect()
    }
}

/// Report and exit code of one command.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub code: i32,
    pub report: Value,
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::OnDeformationDivisor { .. } => EXIT_DIVISOR,
        Error::SpectrumMismatch(_) | Error::ConsistencyFailure(_) | Error::QuadratureFailure { .. } => EXIT_TOLERANCE,
        _ => EXIT_VALIDATION,
    }
}

fn error_report(e: &Error) -> Value {
    json!({ "error": e.to_string(), "exit_code": exit_code(e) })
}

fn from_residuals(mut report: Value, residuals: &[Residual]) -> Outcome {
    let pass = residuals.iter().all(|r| r.pass);
    report["residuals"] = json!(residuals);
    report["pass"] = json!(pass);
    Outcome { code: if pass { EXIT_OK } else { EXIT_TOLERANCE }, report }
}

fn side_of(cov: &Covering, z: &ZLift) -> Side {
    if cov.line.relative_arg(z.z) <= 0.0 {
        Side::R
    } else {
        Side::L
    }
}

struct Context {
    cfg: RunConfig,
    tol: Tolerances,
    cov: Covering,
    opts: SolverOptions,
}

impl Context {
    fn new(cfg: &RunConfig, tol_scale: f64) -> Result<Self> {
        if !(tol_scale > 0.0 && tol_scale.is_finite()) {
            return Err(Error::Validation("--tol-scale must be positive".into()));
        }
        cfg.validate()?;
        Ok(Self { cfg: cfg.clone(), tol: cfg.tolerances.scaled(tol_scale), cov: cfg.covering()?, opts: SolverOptions::default() })
    }

    fn surface(&self) -> Result<Surface> {
        Surface::with_nodes(&self.cov, self.cfg.period_nodes)
    }

    /// The evaluator defining Ψ: W, or W_q when configured.
    fn psi_kernel(&self, s: &Surface) -> Result<KernelEvaluator> {
        match self.cfg.kernel {
            KernelKind::W => Ok(KernelEvaluator::w(s.clone())),
            KernelKind::Wq => KernelEvaluator::new(s.clone(), KernelKind::Wq, self.cfg.q_matrix()?),
            k => Err(Error::Validation(format!("Ψ is defined for the W and Wq kernels, not {k:?}"))),
        }
    }
}

pub fn cmd_spectrum(cfg: &RunConfig, tol_scale: f64) -> Result<Outcome> {
    let ctx = Context::new(cfg, tol_scale)?;
    let s = ctx.surface()?;
    let rot = match ctx.cfg.kernel {
        KernelKind::Schiffer | KernelKind::Bergman => doubles_rotation_data(&s)?,
        _ => rotation_data(&ctx.psi_kernel(&s)?)?,
    };
    let doubled = rot.dim() == 2 * ctx.cov.n();
    Ok(spectrum_report(&rot, &ctx.cov, doubled, ctx.tol.spectrum))
}

/// Spectrum of a given `V` against the prediction; a mismatch gives exit code 2.
pub fn spectrum_report(rot: &RotationData, cov: &Covering, doubled: bool, tol: f64) -> Outcome {
    let predicted: Vec<String> = crate::monodromy::predicted_spectrum(cov.genus, &cov.infinity_ramification())
        .iter()
        .flat_map(|m| std::iter::repeat_n(m.to_string(), if doubled { 2 } else { 1 }))
        .collect();
    match spectrum(rot, cov, doubled, tol) {
        Ok(eig) => Outcome {
            code: EXIT_OK,
            report: json!({
                "spectrum": eig.iter().map(|&c| c_json(c)).collect::<Vec<_>>(),
                "predicted": predicted,
                "doubled": doubled,
                "match": true,
            }),
        },
        Err(e) => {
            let eig = linalg::eigenvalues(&rot.v);
            let mut report = error_report(&e);
            report["spectrum"] = json!(eig.iter().map(|&c| c_json(c)).collect::<Vec<_>>());
            report["predicted"] = json!(predicted);
            report["match"] = json!(false);
            Outcome { code: exit_code(&e), report }
        }
    }
}

fn q_json(m: &crate::monodromy::QMat) -> Value {
    match m.to_i64() {
        Some(rows) => json!(rows),
        None => json!((0..m.rows).map(|i| (0..m.cols).map(|j| m[(i, j)].to_string()).collect::<Vec<_>>()).collect::<Vec<_>>()),
    }
}

pub fn stokes_report(data: &MonodromyData, cuts: Option<&[Cut]>, cov: Option<&Covering>) -> Outcome {
    let mut report = json!({
        "S": q_json(&data.s),
        "C": q_json(&data.c),
        "M0_tilde": q_json(&data.m0_tilde),
        "M0": data.m0.as_ref().map(q_json),
        "M0_blocks": data.m0_blocks.iter().map(|b| json!({
            "eigenvalue_turn": [b.eigenvalue.num, b.eigenvalue.den], "size": b.size
        })).collect::<Vec<_>>(),
        "mu": data.mu.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
        "S_blocks": cuts.map(block_annotation),
    });
    match check_consistency(data, cov) {
        Ok(c) => {
            report["consistency"] = json!(c);
            Outcome { code: EXIT_OK, report }
        }
        Err(e) => {
            report["error"] = json!(e.to_string());
            Outcome { code: exit_code(&e), report }
        }
    }
}

pub fn cmd_stokes(cfg: &RunConfig) -> Result<Outcome> {
    let ctx = Context::new(cfg, 1.0)?;
    let data = monodromy_data(&ctx.cov)?;
    Ok(stokes_report(&data, ctx.cov.cuts.as_deref(), Some(&ctx.cov)))
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<Outcome> {
    let ctx = Context::new(cfg, 1.0)?;
    let s = ctx.surface()?;
    let k = ctx.psi_kernel(&s)?;
    let mut frames = Vec::new();
    for z in ctx.cfg.z_lifts() {
        for kind in [FrameKind::R, FrameKind::L] {
            let f = psi_matrix(&k, z, kind, &ctx.opts)?;
            frames.push(json!({
                "z": c_json(z.z),
                "arg": z.arg,
                "side": if kind == FrameKind::R { "r" } else { "l" },
                "sqrt_z": c_json(f.sqrt_z),
                "psi": m_json(&f.matrix),
                "psi_normalized": m_json(&f.normalized),
                "max_error": f.err.max(),
                "det_residual": verify_det(&f),
                "directions": f.directions,
            }));
        }
    }
    Ok(Outcome { code: EXIT_OK, report: json!({ "frames": frames }) })
}

fn suite_ode(ctx: &Context, out: &mut Vec<Residual>) -> Result<()> {
    let s = ctx.surface()?;
    let k = ctx.psi_kernel(&s)?;
    let h = ctx.cfg.fd_step;
    let n = ctx.cov.n();
    for z in ctx.cfg.z_lifts() {
        let side = side_of(&ctx.cov, &z);
        let tag = format!("z=({:.6},{:.6})", z.z.re, z.z.im);
        out.push(Residual::new(format!("ode_z {tag}"), verify_ode_z(&k, z, side, h, &ctx.opts)?, ctx.tol.ode_z));
        for i in 0..n {
            let v = verify_ode_lambda(&k, z, side, i, h, &ctx.opts)?;
            out.push(Residual::new(format!("ode_lambda_{} {tag}", i + 1), v, ctx.tol.ode_lambda));
        }
        out.push(Residual::new(format!("euler {tag}"), verify_euler(&k, z, side, h, &ctx.opts)?, ctx.tol.ode_lambda));
        out.push(Residual::new(format!("shift {tag}"), verify_shift(Rows::Kernel(&k), z, side, h, &ctx.opts)?, ctx.tol.ode_lambda));
        let f = psi_matrix(&k, z, if side == Side::R { FrameKind::R } else { FrameKind::L }, &ctx.opts)?;
        out.push(Residual::new(format!("det {tag}"), verify_det(&f), ctx.tol.det));
    }
    Ok(())
}

fn suite_stokes(ctx: &Context, out: &mut Vec<Residual>) -> Result<()> {
    let s = ctx.surface()?;
    let k = ctx.psi_kernel(&s)?;
    let data = monodromy_data(&ctx.cov)?;
    let sm = data.s.to_complex();
    let chk = verify_stokes_numeric(&k, ctx.cfg.stokes_modulus, &sm, ctx.cfg.epsilon, &ctx.opts)?;
    out.push(Residual::new("stokes l+ (S)", chk.plus, ctx.tol.stokes));
    out.push(Residual::new("stokes l- (S^T)", chk.minus, ctx.tol.stokes));
    let (_, rel) = verify_monodromy_numeric(&k, &data, ctx.cfg.stokes_modulus, &ctx.opts)?;
    out.push(Residual::new("monodromy at 0", rel, ctx.tol.monodromy));
    if ctx.cfg.kernel == KernelKind::W {
        let a = asymptotics(&k, central_arg(&ctx.cov), &ctx.cfg.asymptotic_moduli, &ctx.opts)?;
        out.push(Residual::new("asymptotic 1/z coefficient vs Gamma", a.gamma_error, ctx.tol.asymptotic));
        let lo = a.scaled_deviation.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = a.scaled_deviation.iter().copied().fold(0.0, f64::max);
        // |z|·‖Ψe^{−zU} − 1‖ stays bounded: its spread over the moduli is small
        out.push(Residual::new("asymptotic |z|-scaled deviation spread", (hi - lo) / hi.max(1e-300), 0.1));
    }
    Ok(())
}

fn suite_transform(ctx: &Context, out: &mut Vec<Residual>) -> Result<()> {
    let s = ctx.surface()?;
    let Some(q) = ctx.cfg.q_matrix()? else {
        return Err(Error::Validation("transform suite needs q".into()));
    };
    if s.genus() == 0 {
        return Ok(());
    }
    let kq = KernelEvaluator::new(s.clone(), KernelKind::Wq, Some(q))?;
    let t = build_tq(&kq)?;
    out.push(Residual::new("T_q nilpotency", t.nilpotency(), ctx.tol.nilpotency));
    for z in ctx.cfg.z_lifts() {
        let tag = format!("z=({:.6},{:.6})", z.z.re, z.z.im);
        out.push(Residual::new(format!("det G_q {tag}"), t.det_defect(z.z), ctx.tol.nilpotency));
        out.push(Residual::new(format!("G_q(-z)^T G_q(z) {tag}"), t.orthogonality_defect(z.z), ctx.tol.nilpotency));
        let side = side_of(&ctx.cov, &z);
        out.push(Residual::new(format!("Psi_q transform {tag}"), verify_deformed_transform(&kq, z, side, &ctx.opts)?, ctx.tol.transform));
    }
    let sm = monodromy_data(&ctx.cov)?.s.to_complex();
    out.push(Residual::new("Psi_q Stokes l+", deformed_stokes_residual(&kq, ctx.cfg.stokes_modulus, &sm, &ctx.opts)?, ctx.tol.stokes));
    Ok(())
}

fn suite_doubles(ctx: &Context, out: &mut Vec<Residual>) -> Result<()> {
    let s = ctx.surface()?;
    let t = build_t_doubles(&s)?;
    out.push(Residual::new("T nilpotency", t.nilpotency(), ctx.tol.nilpotency));
    for z in ctx.cfg.z_lifts() {
        let tag = format!("z=({:.6},{:.6})", z.z.re, z.z.im);
        out.push(Residual::new(format!("det G {tag}"), t.det_defect(z.z), ctx.tol.nilpotency));
        let rep = verify_doubles(&s, z, side_of(&ctx.cov, &z), &ctx.opts)?;
        out.push(Residual::new(format!("Psi_OmegaB transform {tag}"), rep.transform, ctx.tol.transform));
        out.push(Residual::new(format!("Psi_OmegaB det {tag}"), rep.det, ctx.tol.det));
    }
    let n = ctx.cov.n();
    let sm = monodromy_data(&ctx.cov)?.s.to_complex();
    let mut want = CMat::zeros(2 * n, 2 * n);
    want.view_mut((0, 0), (n, n)).copy_from(&sm);
    want.view_mut((n, n), (n, n)).copy_from(&linalg::inverse(&sm)?);
    let x = doubles_stokes(&s, ctx.cfg.stokes_modulus, &ctx.opts)?;
    out.push(Residual::new("doubles Stokes blockdiag(S, S^-1)", linalg::max_abs(&(x - want)), ctx.tol.stokes));
    Ok(())
}

fn suite_tau(ctx: &Context, out: &mut Vec<Residual>) -> Result<Value> {
    let s = ctx.surface()?;
    let q = ctx.cfg.q_matrix()?;
    let rep = tau_gradients(&s, q.as_ref(), Some(ctx.cfg.fd_step))?;
    out.push(Residual::new("tau_I vs tau_W", rep.tau_i_vs_w, ctx.tol.tau));
    if let Some(d) = rep.deformed {
        out.push(Residual::new("tau_Iq vs tau_W det(B+q)", d, ctx.tol.tau_deformed));
    }
    out.push(Residual::new("tau_OmegaB vs |tau_W|^2 det Im B", rep.doubles, ctx.tol.tau_doubles));
    if let Some(c) = rep.cross_partials {
        out.push(Residual::new("tau_I cross partials", c, ctx.tol.cross_partials));
    }
    Ok(json!(rep))
}

fn suite_rauch(ctx: &Context, out: &mut Vec<Residual>) -> Result<()> {
    let s = ctx.surface()?;
    let r = rauch_suite(&s, ctx.cfg.rauch_step)?;
    out.push(Residual::new("Rauch W", r.w, ctx.tol.rauch));
    if s.genus() > 0 {
        out.push(Residual::new("Rauch B (period matrix)", r.riemann, ctx.tol.rauch));
        out.push(Residual::new("Rauch Omega", r.schiffer, ctx.tol.rauch));
        out.push(Residual::new("Rauch dB/d(lambda bar)", r.bergman_bar, ctx.tol.rauch));
        out.push(Residual::new("sum rule", r.sum_rule, ctx.tol.sum_rule));
    }
    Ok(())
}

pub fn cmd_verify(cfg: &RunConfig, suite: Suite, tol_scale: f64) -> Result<Outcome> {
    let ctx = Context::new(cfg, tol_scale)?;
    let mut res = Vec::new();
    let mut report = json!({ "suite": suite });
    let all = suite == Suite::All;
    if all || suite == Suite::Ode {
        suite_ode(&ctx, &mut res)?;
    }
    if all || suite == Suite::Stokes {
        suite_stokes(&ctx, &mut res)?;
    }
    if (all && ctx.cfg.q.is_some()) || suite == Suite::Transform {
        suite_transform(&ctx, &mut res)?;
    }
    if all || suite == Suite::Doubles {
        suite_doubles(&ctx, &mut res)?;
    }
    if all || suite == Suite::Tau {
        report["tau"] = suite_tau(&ctx, &mut res)?;
    }
    if all || suite == Suite::Rauch {
        suite_rauch(&ctx, &mut res)?;
    }
    Ok(from_residuals(report, &res))
}

/// Writes one CSV per contour `C_k^{r/l}` into `dir`.
pub fn cmd_export_contours(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let ctx = Context::new(cfg, 1.0)?;
    std::fs::create_dir_all(dir).map_err(|e| Error::Validation(format!("cannot create {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for side in [Side::R, Side::L] {
        for k in 0..ctx.cov.n() {
            let c = build_c_side(&ctx.cov, k, side)?;
            let name = format!("C{}_{}.csv", k + 1, if side == Side::R { "r" } else { "l" });
            let path = dir.join(&name);
            std::fs::write(&path, c.to_csv(&ctx.cov, ctx.cfg.contour_samples))
                .map_err(|e| Error::Validation(format!("cannot write {}: {e}", path.display())))?;
            files.push(name);
        }
    }
    Ok(Outcome { code: EXIT_OK, report: json!({ "files": files }) })
}

/// Runs a parsed command line; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    if let Some(t) = cli.threads {
        // advisory: ignored if a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global();
    }
    let outcome = (|| -> Result<Outcome> {
        let cfg = match &cli.config {
            Some(p) => RunConfig::load(p)?,
            None => return Err(Error::Validation("--config is required".into())),
        };
        match &cli.command {
            Command::Spectrum => cmd_spectrum(&cfg, cli.tol_scale),
            Command::Stokes => cmd_stokes(&cfg),
            Command::Solve => cmd_solve(&cfg),
            Command::Verify { suite } => cmd_verify(&cfg, *suite, cli.tol_scale),
            Command::ExportContours => {
                let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
                cmd_export_contours(&cfg, &dir)
            }
        }
    })();
    let outcome = outcome.unwrap_or_else(|e| Outcome { code: exit_code(&e), report: error_report(&e) });
    let text = serde_json::to_string_pretty(&outcome.report).unwrap_or_else(|_| "{}".into());
    // a closed pipe is not an error of the computation
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    if let Some(dir) = &cli.out {
        let name = match &cli.command {
            Command::Verify { suite } => format!("verify_{}.json", serde_json::to_value(suite).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()),
            Command::Spectrum => "spectrum.json".into(),
            Command::Stokes => "stokes.json".into(),
            Command::Solve => "solve.json".into(),
            Command::ExportContours => "contours.json".into(),
        };
        if std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join(name), format!("{text}\n"))).is_err() {
            eprintln!("cannot write report to {}", dir.display());
            return EXIT_VALIDATION;
        }
    }
    outcome.code
}
