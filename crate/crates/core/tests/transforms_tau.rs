use hurwitz_rh::contours::{Side, ZLift};
use hurwitz_rh::covering::Covering;
use hurwitz_rh::kernels::{rotation_data, KernelEvaluator, KernelKind, Surface};
use hurwitz_rh::linalg::{self, CMat};
use hurwitz_rh::rh_solver::SolverOptions;
use hurwitz_rh::transforms_tau::*;
use hurwitz_rh::C64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn surface(pts: &[f64]) -> Surface {
    let pts: Vec<C64> = pts.iter().map(|&x| C64::new(x, 0.0)).collect();
    Surface::new(&Covering::hyperelliptic(&pts, 0.0).unwrap()).unwrap()
}

const G0: [f64; 2] = [2.0, -2.0];
const G1: [f64; 4] = [3.0, 1.0, -1.0, -3.0];
const G2: [f64; 6] = [5.0, 3.0, 1.0, -1.0, -3.0, -5.0];

fn q1() -> CMat {
    CMat::from_element(1, 1, C64::new(0.3, 0.2))
}

fn ints(rows: &[&[i64]]) -> CMat {
    CMat::from_fn(rows.len(), rows.len(), |i, j| C64::new(rows[i][j] as f64, 0.0))
}

#[test]
fn tq_from_holomorphic_differentials() {
    let s = surface(&G1);
    let kq = KernelEvaluator::new(s.clone(), KernelKind::Wq, Some(q1())).unwrap();
    let t = build_tq(&kq).unwrap();
    // independent assembly: πi ω(P)(𝔹+q)⁻¹ω(P)ᵀ
    let om = s.omega_at_ram().unwrap();
    let b = s.periods.as_ref().unwrap().riemann.clone();
    let inv = linalg::inverse(&(b + q1())).unwrap();
    let want = &om * inv * om.transpose() * C64::new(0.0, PI);
    assert!(linalg::rel_diff(&t.matrix, &want) < 1e-13);
    assert!(linalg::max_abs(&(&t.matrix - t.matrix.transpose())) < 1e-14);
    let z = C64::new(0.7, -1.1);
    assert!(t.nilpotency() < 1e-10 && t.det_defect(z) < 1e-10);
    assert!(t.orthogonality_defect(z) < 1e-10);
}

#[test]
fn generators_vanish_in_genus_zero() {
    let s = surface(&G0);
    let t = build_t_doubles(&s).unwrap();
    assert_eq!(linalg::max_abs(&t.matrix), 0.0);
    assert!(build_tq(&KernelEvaluator::w(s)).is_err());
}

#[test]
fn deformed_solution_is_dressed() {
    let s = surface(&G1);
    let kq = KernelEvaluator::new(s, KernelKind::Wq, Some(q1())).unwrap();
    let o = SolverOptions::default();
    for z in [C64::new(1.0, -0.5), C64::new(0.2, -3.0)] {
        let r = verify_deformed_transform(&kq, ZLift::new(z, 0.0), Side::R, &o).unwrap();
        assert!(r < 1e-10, "{r}");
    }
    // the dressing is z-rational, so the Stokes data is unchanged
    let st = ints(&[&[1, 0, 0, 0], &[-2, 1, 0, 0], &[2, -2, 1, 0], &[-2, 2, -2, 1]]);
    assert!(deformed_stokes_residual(&kq, 3.0, &st, &o).unwrap() < 1e-10);
}

#[test]
fn real_double_dressing_and_determinant() {
    let o = SolverOptions::default();
    for pts in [&G0[..], &G1[..]] {
        let s = surface(pts);
        let rep = verify_doubles(&s, ZLift::new(C64::new(1.0, -0.5), 0.0), Side::R, &o).unwrap();
        assert!(rep.transform < 1e-10 && rep.det < 1e-10, "{rep:?}");
    }
}

#[test]
fn real_double_stokes_is_block_diagonal() {
    let s = surface(&G1);
    let x = doubles_stokes(&s, 3.0, &SolverOptions::default()).unwrap();
    let st = ints(&[&[1, 0, 0, 0], &[-2, 1, 0, 0], &[2, -2, 1, 0], &[-2, 2, -2, 1]]);
    let inv = ints(&[&[1, 0, 0, 0], &[2, 1, 0, 0], &[2, 2, 1, 0], &[2, 2, 2, 1]]);
    assert_eq!(linalg::inverse(&st).unwrap().map(|c| c.re.round()), inv.map(|c| c.re));
    let mut want = CMat::zeros(8, 8);
    want.view_mut((0, 0), (4, 4)).copy_from(&st);
    want.view_mut((4, 4), (4, 4)).copy_from(&inv);
    assert!(linalg::max_abs(&(x - want)) < 1e-8);
}

#[test]
fn tau_gradient_identities() {
    let s = surface(&G1);
    let rep = tau_gradients(&s, Some(&q1()), Some(1e-4)).unwrap();
    assert!(rep.tau_i_vs_w < 1e-8);
    assert!(rep.deformed.unwrap() < 1e-6);
    assert!((rep.deformed_factor.unwrap() - 1.0).norm() < 1e-8);
    assert!(rep.doubles < 1e-6);
    assert!(rep.cross_partials.unwrap() < 1e-6);
}

#[test]
fn genus_zero_bergman_tau_is_explicit() {
    // λ = ±2: S^W = ∓1/8, so ∂ log τ_W = ±1/16
    let s = surface(&G0);
    let tw = tau_w(&s).unwrap();
    assert!((tw.gradient[0] - C64::new(1.0 / 16.0, 0.0)).norm() < 1e-12, "{:?}", tw.gradient);
    assert!((tw.gradient[1] + C64::new(1.0 / 16.0, 0.0)).norm() < 1e-12);
    let ti = tau_i(&KernelEvaluator::w(s)).unwrap();
    assert!((ti.gradient[0] - tw.gradient[0]).norm() < 1e-12);
}

#[test]
fn rauch_formulas() {
    let r = rauch_suite(&surface(&G1), 1e-5).unwrap();
    assert!(r.w < 1e-6 && r.riemann < 1e-6 && r.schiffer < 1e-6 && r.bergman_bar < 1e-6, "{r:?}");
    assert!(r.sum_rule < 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn random_q_generators_are_unimodular(a in -1.0..1.0f64, b in 0.1..1.0f64, c in -0.3..0.3f64,
                                          zr in 0.2..3.0f64, zi in -3.0..3.0f64) {
        let z = C64::new(zr, zi);
        let s1 = surface(&G1);
        let k1 = KernelEvaluator::new(s1, KernelKind::Wq, Some(CMat::from_element(1, 1, C64::new(a, b)))).unwrap();
        let t = build_tq(&k1).unwrap();
        prop_assert!(t.nilpotency() < 1e-10 && t.det_defect(z) < 1e-10);
        let s2 = surface(&G2);
        let q = CMat::from_fn(2, 2, |i, j| if i == j { C64::new(a, b) } else { C64::new(c, 0.0) });
        let k2 = KernelEvaluator::new(s2.clone(), KernelKind::Wq, Some(q)).unwrap();
        let t = build_tq(&k2).unwrap();
        prop_assert!(t.nilpotency() < 1e-10 && t.det_defect(z) < 1e-10);
        let t = build_t_doubles(&s2).unwrap();
        prop_assert!(t.nilpotency() < 1e-10 && t.det_defect(z) < 1e-10);
    }

    #[test]
    fn rotation_coefficients_antisymmetric(x in prop::collection::vec(-4.0..4.0f64, 4), y in prop::collection::vec(-1.0..1.0f64, 4)) {
        let pts: Vec<C64> = x.iter().zip(&y).map(|(&a, &b)| C64::new(a, b)).collect();
        for i in 0..4 {
            for j in 0..i {
                prop_assume!((pts[i] - pts[j]).norm() > 0.3);
            }
        }
        let Ok(cov) = Covering::hyperelliptic(&pts, 0.3) else { return Ok(()) };
        let k = KernelEvaluator::w(Surface::new(&cov).unwrap());
        prop_assert!(rotation_coefficients_antisymmetry(&k).unwrap() < 1e-12);
        let rot = rotation_data(&k).unwrap();
        prop_assert!(linalg::max_abs(&(&rot.beta - rot.beta.transpose())) < 1e-12);
    }

    #[test]
    fn branch_point_ordering_is_idempotent(x in prop::collection::vec(-4.0..4.0f64, 4), y in prop::collection::vec(-1.0..1.0f64, 4), phi in -1.0..1.0f64) {
        let pts: Vec<C64> = x.iter().zip(&y).map(|(&a, &b)| C64::new(a, b)).collect();
        let Ok(cov) = Covering::hyperelliptic(&pts, phi) else { return Ok(()) };
        let again = cov.reordered(phi).unwrap();
        prop_assert_eq!(&again.branch_points, &cov.branch_points);
    }
}
