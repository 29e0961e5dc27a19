use hurwitz_rh::covering::Covering;
use hurwitz_rh::kernels::{
    doubles_rotation_data, rotation_data, spectrum, t_doubles, t_q, KernelEvaluator, KernelKind, Surface,
};
use hurwitz_rh::linalg::{self, CMat};
use hurwitz_rh::{Error, SurfacePoint, C64};
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn genus_one() -> Surface {
    let cov = Covering::hyperelliptic(&[c(3.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(-3.0, 0.0)], 0.0).unwrap();
    Surface::new(&cov).unwrap()
}

/// A genus-one surface with generic complex branch points.
fn generic_genus_one() -> Surface {
    let cov =
        Covering::hyperelliptic(&[c(3.1, 0.4), c(1.2, -0.3), c(-0.9, 0.5), c(-2.8, -0.2)], 0.0).unwrap();
    Surface::new(&cov).unwrap()
}

fn genus_two() -> Surface {
    let pts = [c(5.0, 0.3), c(3.1, -0.2), c(1.0, 0.4), c(-1.2, -0.3), c(-3.0, 0.1), c(-4.9, 0.2)];
    Surface::new(&Covering::hyperelliptic(&pts, 0.0).unwrap()).unwrap()
}

const H: f64 = 1e-5;

/// Central difference in λ_k with the projections of curve points held fixed.
fn d_lambda<F: Fn(&Surface) -> C64>(s: &Surface, k: usize, dir: C64, f: F) -> C64 {
    let plus = s.perturbed(k, dir * H).unwrap();
    let minus = s.perturbed(k, -dir * H).unwrap();
    (f(&plus) - f(&minus)) / (2.0 * H)
}

fn wirtinger_bar<F: Fn(&Surface) -> C64>(s: &Surface, k: usize, f: F) -> C64 {
    let dx = d_lambda(s, k, c(1.0, 0.0), &f);
    let dy = d_lambda(s, k, c(0.0, 1.0), &f);
    0.5 * (dx + c(0.0, 1.0) * dy)
}

fn wirtinger<F: Fn(&Surface) -> C64>(s: &Surface, k: usize, f: F) -> C64 {
    let dx = d_lambda(s, k, c(1.0, 0.0), &f);
    let dy = d_lambda(s, k, c(0.0, 1.0), &f);
    0.5 * (dx - c(0.0, 1.0) * dy)
}

fn upper(s: &Surface, lam: C64) -> SurfacePoint {
    s.cov.point_upper(lam)
}

#[test]
fn genus_zero_matches_rational_representation() {
    let hyper = Surface::new(&Covering::hyperelliptic(&[c(2.0, 0.0), c(-2.0, 0.0)], 0.0).unwrap()).unwrap();
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    let rat = Surface::new(&Covering::rational(&[one, zero, one], &[zero, one], 0.0).unwrap()).unwrap();
    // x = (λ + y)/2 identifies the two models; compare in λ/x frames via dx = dλ (1 + λ/y)/2
    for (lp, lq) in [(c(0.3, 1.1), c(-1.5, 0.7)), (c(4.0, -2.0), c(0.1, 0.2))] {
        let (yp, yq) = (hyper.cov.y_upper(lp), hyper.cov.y_upper(lq));
        let (xp, xq) = (0.5 * (lp + yp), 0.5 * (lq + yq));
        let jac = |l: C64, y: C64| 0.5 * (1.0 + l / y);
        let from_rat = rat.w(SurfacePoint::X(xp), SurfacePoint::X(xq)).unwrap() * jac(lp, yp) * jac(lq, yq);
        let from_hyp = hyper.w(upper(&hyper, lp), upper(&hyper, lq)).unwrap();
        assert!((from_rat - from_hyp).norm() < 1e-10, "{from_rat} vs {from_hyp}");
    }
    let w12 = hyper.w(SurfacePoint::Ram(0), SurfacePoint::Ram(1)).unwrap();
    let r12 = rat.w(SurfacePoint::Ram(0), SurfacePoint::Ram(1)).unwrap();
    assert!((w12 - r12).norm() < 1e-12);
    // |W(P₁,P₂)| = 1/4 for x + 1/x (the phase is fixed by the sheet convention)
    assert!((w12.norm() - 0.25).abs() < 1e-12);
}

#[test]
fn rational_frame_at_ramification_point() {
    // λ = x + 1/x: x₁ = (x − 1)/√x so |dx/dx₁| = 1 at P₁ and W(Q, P₁) = ±1/(x − 1)²
    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    let rat = Surface::new(&Covering::rational(&[one, zero, one], &[zero, one], 0.0).unwrap()).unwrap();
    let x = c(0.4, 0.9);
    let w = rat.w(SurfacePoint::X(x), SurfacePoint::Ram(0)).unwrap();
    assert!((w.norm() - (1.0 / ((x - 1.0) * (x - 1.0))).norm()).abs() < 1e-13);
}

#[test]
fn sw_genus_zero_symbolic() {
    // x(x₁) solves x + 1/x = 2 + x₁²; Schwarzian {x; x₁}/6 at x₁ = 0 equals −1/8
    let s = Surface::new(&Covering::hyperelliptic(&[c(2.0, 0.0), c(-2.0, 0.0)], 0.0).unwrap()).unwrap();
    assert!((s.sw_at_ram(0).unwrap() - c(-0.125, 0.0)).norm() < 1e-10);
    assert!((s.sw_at_ram(1).unwrap() - c(0.125, 0.0)).norm() < 1e-10);
}

#[test]
fn a_periods_vanish_at_two_resolutions() {
    for s in [genus_one(), generic_genus_one(), genus_two()] {
        let q = upper(&s, c(0.37, 1.9));
        for k in 0..s.genus() {
            let v1 = s.a_period_of_w(k, q, 200).unwrap();
            let v2 = s.a_period_of_w(k, q, 400).unwrap();
            assert!(v1.norm() < 1e-8 && v2.norm() < 1e-8, "{v1} {v2}");
            let r = s.a_period_of_w(k, SurfacePoint::Ram(s.cov.n() - 1), 400).unwrap();
            assert!(r.norm() < 1e-8);
        }
    }
}

#[test]
fn riemann_matrix_symmetric_positive() {
    for s in [genus_one(), generic_genus_one(), genus_two()] {
        let p = s.periods.as_ref().unwrap();
        let b = &p.riemann;
        assert!(linalg::norm(&(b - b.transpose())) < 1e-10);
        let im = b.map(|z| z.im);
        assert!(im.cholesky().is_some());
        // normalized a-periods
        let eye = &p.a * &p.normalization;
        assert!(linalg::norm(&(eye - CMat::identity(s.genus(), s.genus()))) < 1e-12);
    }
}

#[test]
fn biresidue_is_one() {
    let s = generic_genus_one();
    let k = 2;
    let x0 = c(0.05, 0.03);
    for d in [1e-3, 1e-4] {
        let x1 = x0 + c(d, 0.0);
        let w = s.w(SurfacePoint::Local { k, x: x0 }, SurfacePoint::Local { k, x: x1 }).unwrap();
        let lead = w * (x0 - x1) * (x0 - x1);
        assert!((lead - 1.0).norm() < 10.0 * d * d + 1e-7, "{lead}");
    }
}

#[test]
fn rauch_w_and_riemann_matrix() {
    let s = generic_genus_one();
    let (lp, lq) = (c(0.3, 1.7), c(-0.6, -1.4));
    for k in 0..s.cov.n() {
        let fd = d_lambda(&s, k, c(1.0, 0.0), |t| t.w(upper(t, lp), upper(t, lq)).unwrap());
        let wp = s.w(upper(&s, lp), SurfacePoint::Ram(k)).unwrap();
        let wq = s.w(SurfacePoint::Ram(k), upper(&s, lq)).unwrap();
        assert!((fd - 0.5 * wp * wq).norm() < 1e-6, "k={k}: {fd} vs {}", 0.5 * wp * wq);

        let fd_b = d_lambda(&s, k, c(1.0, 0.0), |t| t.periods.as_ref().unwrap().riemann[(0, 0)]);
        let om = s.omega(SurfacePoint::Ram(k)).unwrap();
        let want = PI * c(0.0, 1.0) * om[0] * om[0];
        assert!((fd_b - want).norm() < 1e-6, "k={k}: {fd_b} vs {want}");

        let fd_w = d_lambda(&s, k, c(1.0, 0.0), |t| t.omega(upper(t, lp)).unwrap()[0]);
        let want = 0.5 * om[0] * wp;
        assert!((fd_w - want).norm() < 1e-6);
    }
}

#[test]
fn rauch_deformed_kernel() {
    let s = generic_genus_one();
    let q = CMat::from_element(1, 1, c(0.7, 0.2));
    let ev = |t: &Surface| KernelEvaluator::new(t.clone(), KernelKind::Wq, Some(q.clone())).unwrap();
    let (lp, lq) = (c(0.3, 1.7), c(-0.6, -1.4));
    let base = ev(&s);
    for k in [0, 3] {
        let fd = d_lambda(&s, k, c(1.0, 0.0), |t| ev(t).eval(upper(t, lp), upper(t, lq)).unwrap());
        let want = 0.5
            * base.eval(upper(&s, lp), SurfacePoint::Ram(k)).unwrap()
            * base.eval(SurfacePoint::Ram(k), upper(&s, lq)).unwrap();
        assert!((fd - want).norm() < 1e-6);
    }
}

#[test]
fn rauch_schiffer_bergman() {
    let s = generic_genus_one();
    let om = |t: &Surface| KernelEvaluator::new(t.clone(), KernelKind::Schiffer, None).unwrap();
    let bg = |t: &Surface| KernelEvaluator::new(t.clone(), KernelKind::Bergman, None).unwrap();
    let (lp, lq) = (c(0.3, 1.7), c(-0.6, -1.4));
    let (o, b) = (om(&s), bg(&s));
    let (p, q) = (upper(&s, lp), upper(&s, lq));
    for k in [1, 2] {
        let pk = SurfacePoint::Ram(k);
        let d = wirtinger(&s, k, |t| om(t).eval(upper(t, lp), upper(t, lq)).unwrap());
        let want = 0.5 * o.eval(p, pk).unwrap() * o.eval(pk, q).unwrap();
        assert!((d - want).norm() < 1e-6, "∂Ω: {d} vs {want}");

        let d = wirtinger_bar(&s, k, |t| om(t).eval(upper(t, lp), upper(t, lq)).unwrap());
        let want = 0.5 * b.eval(p, pk).unwrap() * b.eval(q, pk).unwrap();
        assert!((d - want).norm() < 1e-6, "∂̄Ω: {d} vs {want}");

        let d = wirtinger(&s, k, |t| bg(t).eval(upper(t, lp), upper(t, lq)).unwrap());
        let want = 0.5 * o.eval(p, pk).unwrap() * b.eval(pk, q).unwrap();
        assert!((d - want).norm() < 1e-6, "∂B: {d} vs {want}");

        let d = wirtinger_bar(&s, k, |t| bg(t).eval(upper(t, lp), upper(t, lq)).unwrap());
        let want = 0.5 * b.eval(p, pk).unwrap() * o.eval(pk, q).unwrap().conj();
        assert!((d - want).norm() < 1e-6, "∂̄B: {d} vs {want}");
    }
}

#[test]
fn sum_rule_for_holomorphic_differentials() {
    for s in [genus_one(), generic_genus_one(), genus_two()] {
        let om = s.omega_at_ram().unwrap();
        let m = om.transpose() * &om;
        assert!(linalg::max_abs(&m) < 1e-10, "{m}");
    }
}

#[test]
fn rotation_coefficient_system() {
    let s = generic_genus_one();
    let beta = |t: &Surface| rotation_data(&KernelEvaluator::w(t.clone())).unwrap().beta;
    let b0 = beta(&s);
    let n = s.cov.n();
    let grads: Vec<CMat> = (0..n)
        .map(|k| {
            let p = beta(&s.perturbed(k, c(H, 0.0)).unwrap());
            let m = beta(&s.perturbed(k, c(-H, 0.0)).unwrap());
            (p - m) / c(2.0 * H, 0.0)
        })
        .collect();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for k in 0..n {
                if k != i && k != j {
                    assert!((grads[k][(i, j)] - b0[(i, k)] * b0[(k, j)]).norm() < 1e-6);
                }
            }
            let sum: C64 = (0..n).map(|k| grads[k][(i, j)]).sum();
            assert!(sum.norm() < 1e-6);
            let euler: C64 = (0..n).map(|k| s.cov.branch_points[k] * grads[k][(i, j)]).sum();
            assert!((euler + b0[(i, j)]).norm() < 1e-6);
        }
    }
}

#[test]
fn sw_variation_and_cross_symmetry() {
    let s = generic_genus_one();
    let w = s.w_at_ram().unwrap();
    let n = s.cov.n();
    let mut d = CMat::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            if i != j {
                d[(i, j)] = d_lambda(&s, j, c(1.0, 0.0), |t| t.sw_at_ram(i).unwrap());
                assert!((d[(i, j)] - 0.5 * w[(i, j)] * w[(i, j)]).norm() < 1e-6);
            }
        }
    }
    assert!(linalg::norm(&(&d - d.transpose())) < 1e-6);
}

#[test]
fn deformed_kernel_limits_and_divisor() {
    let s = genus_one();
    let big = CMat::from_element(1, 1, c(1e10, 0.0));
    let wq = KernelEvaluator::new(s.clone(), KernelKind::Wq, Some(big)).unwrap();
    let (p, q) = (upper(&s, c(0.3, 1.7)), upper(&s, c(-0.6, -1.4)));
    assert!((wq.eval(p, q).unwrap() - s.w(p, q).unwrap()).norm() < 1e-8);
    let minus_b = -s.periods.as_ref().unwrap().riemann.clone();
    assert!(matches!(
        KernelEvaluator::new(s.clone(), KernelKind::Wq, Some(minus_b)),
        Err(Error::OnDeformationDivisor { .. })
    ));
    // genus zero: W_q = W, Ω = W, B = 0
    let s0 = Surface::new(&Covering::hyperelliptic(&[c(2.0, 0.0), c(-2.0, 0.0)], 0.0).unwrap()).unwrap();
    let p0 = upper(&s0, c(0.3, 1.0));
    let q0 = upper(&s0, c(-1.0, 0.5));
    let w = s0.w(p0, q0).unwrap();
    for kind in [KernelKind::Wq, KernelKind::Schiffer] {
        let ev = KernelEvaluator::new(s0.clone(), kind, None).unwrap();
        assert_eq!(ev.eval(p0, q0).unwrap(), w);
    }
    let b = KernelEvaluator::new(s0.clone(), KernelKind::Bergman, None).unwrap();
    assert_eq!(b.eval(p0, q0).unwrap(), c(0.0, 0.0));
}

#[test]
fn schiffer_reconstruction() {
    let s = generic_genus_one();
    let o = KernelEvaluator::new(s.clone(), KernelKind::Schiffer, None).unwrap();
    let (p, q) = (upper(&s, c(0.3, 1.7)), upper(&s, c(-0.6, -1.4)));
    let per = s.periods.as_ref().unwrap();
    let (wp, wq) = (s.omega(p).unwrap(), s.omega(q).unwrap());
    let hol = PI * per.im_inv[(0, 0)] * wp[0] * wq[0];
    assert!((o.eval(p, q).unwrap() - s.w(p, q).unwrap() + hol).norm() < 1e-12);
    assert!((o.eval(p, q).unwrap() - o.eval(q, p).unwrap()).norm() < 1e-10);
}

#[test]
fn spectra_of_two_fold_family() {
    for (pts, g) in [(vec![c(2.0, 0.0), c(-2.0, 0.0)], 0usize), (vec![c(3.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(-3.0, 0.0)], 1)] {
        let cov = Covering::hyperelliptic(&pts, 0.0).unwrap();
        let s = Surface::new(&cov).unwrap();
        let rot = rotation_data(&KernelEvaluator::w(s.clone())).unwrap();
        let eig = spectrum(&rot, &cov, false, 1e-10).unwrap();
        assert_eq!(eig.len(), 2 * g + 2);
        assert!(linalg::norm(&(&rot.v + rot.v.transpose())) == 0.0);
    }
    // the doubles contain each value twice
    let s = generic_genus_one();
    let rot = doubles_rotation_data(&s).unwrap();
    spectrum(&rot, &s.cov, true, 1e-9).unwrap();
}

#[test]
fn rational_spectra() {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    // λ = x²: single branch point, V = 0, μ = {0}
    let cov = Covering::rational(&[z, z, one], &[one], 0.0).unwrap();
    let s = Surface::new(&cov).unwrap();
    let rot = rotation_data(&KernelEvaluator::w(s)).unwrap();
    spectrum(&rot, &cov, false, 1e-12).unwrap();
    // three-sheeted x + 1/x + 1/(x − 2)
    let num = hurwitz_rh::poly::sub(
        &hurwitz_rh::poly::mul(&[one, z, one], &[c(-2.0, 0.0), one]),
        &[z, c(-1.0, 0.0)],
    );
    let den = hurwitz_rh::poly::mul(&[z, one], &[c(-2.0, 0.0), one]);
    let cov = Covering::rational(&num, &den, 0.3).unwrap();
    assert_eq!((cov.n(), cov.m()), (4, 2));
    let s = Surface::new(&cov).unwrap();
    let rot = rotation_data(&KernelEvaluator::w(s)).unwrap();
    spectrum(&rot, &cov, false, 1e-9).unwrap();
}

#[test]
fn nilpotent_generators() {
    for s in [generic_genus_one(), genus_two()] {
        let g = s.genus();
        let q = CMat::from_fn(g, g, |i, j| c(0.3 + (i + j) as f64 * 0.1, 0.2 - 0.05 * (i * j) as f64));
        let ev = KernelEvaluator::new(s.clone(), KernelKind::Wq, Some(q)).unwrap();
        let t = t_q(&ev).unwrap();
        assert!(linalg::max_abs(&(&t * &t)) < 1e-10);
        let td = t_doubles(&s).unwrap();
        assert!(linalg::max_abs(&(&td * &td)) < 1e-10);
        assert!(linalg::norm(&(&td - td.transpose())) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn w_is_symmetric(a in -3.0f64..3.0, b in 0.2f64..3.0, c2 in -3.0f64..3.0, d in -3.0f64..-0.2) {
        let cov = Covering::hyperelliptic(&[c(2.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(-2.0, 0.0)], 0.0).unwrap();
        let s = Surface::new(&cov).unwrap();
        let p = s.cov.point_upper(c(a, b));
        let q = s.cov.point_lower(c(c2, d));
        let (x, y) = (s.w(p, q).unwrap(), s.w(q, p).unwrap());
        prop_assert!((x - y).norm() <= 1e-12 * (1.0 + x.norm()));
    }
}
