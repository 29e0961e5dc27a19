use hurwitz_rh::contours::{Side, ZLift};
use hurwitz_rh::covering::Covering;
use hurwitz_rh::kernels::{KernelEvaluator, Surface};
use hurwitz_rh::linalg::{self, CMat};
use hurwitz_rh::monodromy::monodromy_data;
use hurwitz_rh::rh_solver::*;
use hurwitz_rh::{Error, C64};

fn real(pts: &[f64]) -> Covering {
    let pts: Vec<C64> = pts.iter().map(|&x| C64::new(x, 0.0)).collect();
    Covering::hyperelliptic(&pts, 0.0).unwrap()
}

fn kernel(pts: &[f64]) -> KernelEvaluator {
    KernelEvaluator::w(Surface::new(&real(pts)).unwrap())
}

fn ints(rows: &[&[i64]]) -> CMat {
    CMat::from_fn(rows.len(), rows.len(), |i, j| C64::new(rows[i][j] as f64, 0.0))
}

const G0: [f64; 2] = [2.0, -2.0];
const G1: [f64; 4] = [3.0, 1.0, -1.0, -3.0];

#[test]
fn determinant_is_exponential_of_trace() {
    let o = SolverOptions::default();
    for pts in [&G0[..], &G1[..]] {
        let k = kernel(pts);
        let sum: C64 = k.cov().branch_points.iter().sum();
        for z in [C64::new(1.0, -0.5), C64::new(0.3, -4.0), C64::new(2.0, 1.0)] {
            let f = psi_matrix(&k, ZLift::new(z, 0.0), FrameKind::R, &o).unwrap();
            let want = (z * sum).exp();
            assert!((f.matrix.determinant() - want).norm() / want.norm() < 1e-10);
        }
    }
}

#[test]
fn linear_system_in_z_and_lambda() {
    let o = SolverOptions::default();
    let k = kernel(&G0);
    let z = ZLift::new(C64::new(1.0, -0.5), 0.0);
    assert!(verify_ode_z(&k, z, Side::R, 1e-4, &o).unwrap() < 1e-6);
    assert!(verify_ode_z(&k, z, Side::L, 1e-4, &o).unwrap() < 1e-6);
    for i in 0..2 {
        assert!(verify_ode_lambda(&k, z, Side::R, i, 1e-4, &o).unwrap() < 1e-6);
    }
    assert!(verify_euler(&k, z, Side::R, 1e-4, &o).unwrap() < 1e-6);
    assert!(verify_shift(Rows::Kernel(&k), z, Side::R, 1e-4, &o).unwrap() < 1e-6);
}

#[test]
fn genus_one_shift_with_holomorphic_rows() {
    let o = SolverOptions::default();
    let k = kernel(&G1);
    let z = ZLift::new(C64::new(1.0, -0.5), 0.0);
    assert!(verify_shift(Rows::Omega(&k.surface), z, Side::R, 1e-4, &o).unwrap() < 1e-6);
    assert!(verify_ode_z(&k, z, Side::R, 1e-4, &o).unwrap() < 1e-5);
}

#[test]
fn stokes_matrices_from_boundary_values() {
    let o = SolverOptions::default();
    let s0 = ints(&[&[1, 0], &[-2, 1]]);
    let s1 = ints(&[&[1, 0, 0, 0], &[-2, 1, 0, 0], &[2, -2, 1, 0], &[-2, 2, -2, 1]]);
    for (pts, s) in [(&G0[..], s0), (&G1[..], s1)] {
        let k = kernel(pts);
        let chk = verify_stokes_numeric(&k, 3.0, &s, None, &o).unwrap();
        assert!(chk.plus < 1e-10 && chk.minus < 1e-10, "{chk:?}");
        let (xp, xm) = numeric_stokes(&k, 3.0, None, &o).unwrap();
        let (dp, dm) = (linalg::rel_diff(&xp, &s), linalg::rel_diff(&xm, &s.transpose()));
        assert!(dp < 1e-9 && dm < 1e-9, "{dp:e} {dm:e}");
    }
}

#[test]
fn numerical_monodromy_at_origin() {
    let o = SolverOptions::default();
    for pts in [&G0[..], &G1[..]] {
        let k = kernel(pts);
        let data = monodromy_data(k.cov()).unwrap();
        let (_, rel) = verify_monodromy_numeric(&k, &data, 3.0, &o).unwrap();
        assert!(rel < 1e-8, "{rel}");
    }
}

#[test]
fn leading_coefficient_is_rotation_matrix() {
    // For λ = ±2 the off-diagonal entries of Γ are β₁₂ = W(P₁,P₂)/2 = −i/8.
    let k = kernel(&G0);
    let a = asymptotics(&k, central_arg(k.cov()), &[10.0, 20.0, 40.0, 80.0], &SolverOptions::default()).unwrap();
    let fitted = linalg::from_rows(&a.fitted).unwrap();
    for (i, j) in [(0, 1), (1, 0)] {
        assert!((fitted[(i, j)] - C64::new(0.0, -0.125)).norm() < 1e-4, "{}", fitted[(i, j)]);
    }
    assert!(a.gamma_error < 1e-4);
    let spread = a.scaled_deviation.iter().fold(0.0f64, |m, &v| m.max(v)) / a.scaled_deviation[0];
    assert!(spread < 1.01);
}

#[test]
fn rational_and_hyperelliptic_models_agree() {
    // λ = x + 1/x branches over ±2, the same covering as y² = λ² − 4
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let rat = Covering::rational(&[one, zero, one], &[zero, one], 0.0).unwrap();
    let o = SolverOptions::default();
    let z = ZLift::new(C64::new(1.0, -0.5), 0.0);
    let a = psi_matrix(&KernelEvaluator::w(Surface::new(&rat).unwrap()), z, FrameKind::R, &o).unwrap();
    let b = psi_matrix(&kernel(&G0), z, FrameKind::R, &o).unwrap();
    assert!(linalg::rel_diff(&a.normalized, &b.normalized) < 1e-10);
}

#[test]
fn coarse_and_default_resolution_agree() {
    let k = kernel(&G1);
    let z = ZLift::new(C64::new(0.5, -1.5), 0.0);
    let a = psi_matrix(&k, z, FrameKind::R, &SolverOptions::default()).unwrap();
    let b = psi_matrix(&k, z, FrameKind::R, &SolverOptions::coarse()).unwrap();
    assert!(linalg::rel_diff(&a.normalized, &b.normalized) < 1e-8);
    assert!(a.err.max() < 1e-8);
}

#[test]
fn jordan_frame_is_sectorial_frame_times_connection() {
    let k = kernel(&G1);
    let o = SolverOptions::default();
    let z = ZLift::new(C64::new(1.0, -1.0), 0.0);
    let r = psi_matrix(&k, z, FrameKind::R, &o).unwrap();
    let j = psi_matrix(&k, z, FrameKind::Jordan, &o).unwrap();
    let c = hurwitz_rh::monodromy::connection_matrix(k.cov()).unwrap().to_complex();
    assert!(linalg::rel_diff(&j.matrix, &(&r.matrix * c)) < 1e-14);
}

#[test]
fn zero_z_is_rejected() {
    let k = kernel(&G0);
    let z = ZLift::new(C64::new(0.0, 0.0), 0.0);
    assert!(matches!(psi_matrix(&k, z, FrameKind::R, &SolverOptions::default()), Err(Error::Validation(_))));
}
