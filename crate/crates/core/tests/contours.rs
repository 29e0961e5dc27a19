use hurwitz_rh::contours::*;
use hurwitz_rh::covering::{Covering, LineConfig};
use hurwitz_rh::monodromy::connection_matrix;
use hurwitz_rh::{Error, C64};
use proptest::prelude::*;
use std::f64::consts::PI;

fn real(pts: &[f64]) -> Covering {
    let pts: Vec<C64> = pts.iter().map(|&x| C64::new(x, 0.0)).collect();
    Covering::hyperelliptic(&pts, 0.0).unwrap()
}

fn unit(d: f64) -> C64 {
    C64::from_polar(1.0, d)
}

#[test]
fn two_point_rays_point_down_and_up() {
    let cov = real(&[2.0, -2.0]);
    for k in 0..2 {
        let r = build_c_side(&cov, k, Side::R).unwrap();
        let l = build_c_side(&cov, k, Side::L).unwrap();
        assert!((unit(r.direction) - C64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((unit(l.direction) - C64::new(0.0, 1.0)).norm() < 1e-14);
        // the ray itself: λ(t) − λ_k = t² e^{id}
        let lam = r.lambda(&cov, 1.5);
        assert!((lam - cov.branch_points[k] - C64::new(0.0, -2.25)).norm() < 1e-12);
    }
}

#[test]
fn ray_through_branch_point_is_a_collision() {
    let mut cov = real(&[2.0, -2.0]);
    cov.line = LineConfig::new(0.5 * PI);
    // r-direction is now π: the ray from λ = 2 runs into λ = −2
    assert!(matches!(build_c_side(&cov, 0, Side::R), Err(Error::ContourCollision(_))));
    assert!(build_c_side(&cov, 1, Side::R).is_ok());
}

#[test]
fn rotation_room() {
    let cov = real(&[2.0, -2.0]);
    assert!((max_rotation(&cov, 0, Side::R, true) - 0.5 * PI).abs() < 1e-12);
    assert!((max_rotation(&cov, 1, Side::R, false) - 0.5 * PI).abs() < 1e-12);
    assert!((max_rotation(&cov, 1, Side::R, true) - 1.5 * PI).abs() < 1e-12);
    let c = build_c_side(&cov, 0, Side::R).unwrap();
    let same = deform_for_ray(&c, &cov, 0.0).unwrap();
    assert_eq!(same.direction, c.direction);
    let turned = deform_for_ray(&c, &cov, 0.3).unwrap();
    assert!((turned.direction - (c.direction - 0.3)).abs() < 1e-15);
    assert!((turned.theta - 0.5 * turned.direction).abs() < 1e-15);
    assert!(matches!(deform_for_ray(&c, &cov, 0.6 * PI), Err(Error::StokesRayCrossed(_))));
}

#[test]
fn contour_changes_sheet_at_ramification_point() {
    let cov = real(&[3.0, 1.0, -1.0, -3.0]);
    for k in 0..4 {
        for side in [Side::R, Side::L] {
            let c = build_c_side(&cov, k, side).unwrap();
            if side == Side::R {
                assert_eq!(c.sheet(&cov, 2.0), 1);
            }
            assert_eq!(c.sheet(&cov, -2.0), -c.sheet(&cov, 2.0));
            assert_eq!(c.sheet(&cov, -0.5), -c.sheet(&cov, 0.5));
        }
    }
}

#[test]
fn truncation_meets_tail_bound() {
    let cov = real(&[3.0, 1.0, -1.0, -3.0]);
    let z = ZLift::new(C64::new(0.7, -2.0), 0.0);
    for c in build_side(&cov, Side::R).unwrap() {
        let t = c.truncated(&cov, &z).unwrap();
        let bound = t.tail_bound(z.z);
        assert!((bound.ln() + TAIL_EXPONENT).abs() < 1e-9, "{bound}");
        // outside the sector the tails grow
        let bad = ZLift::new(C64::new(0.0, 1.0), 0.0);
        assert!(matches!(c.truncated(&cov, &bad), Err(Error::TailBoundViolated(_))));
    }
}

#[test]
fn adapted_contour_reaches_left_half_plane() {
    let cov = real(&[2.0, -2.0]);
    // arg z = π/4 lies outside Π^r; the r-contours rotate to follow it
    let z = ZLift::new(C64::new(1.0, 1.0), 0.0);
    for c in build_side(&cov, Side::R).unwrap() {
        let a = c.adapted(&cov, &z).unwrap();
        assert!(a.decay_rate(z.z) > MIN_DECAY * z.z.norm());
    }
}

#[test]
fn mirrored_contour_is_complex_conjugate() {
    let cov = real(&[3.0, 1.0, -1.0, -3.0]);
    let c = build_c_side(&cov, 2, Side::R).unwrap().deform_ok(&cov);
    let m = c.mirrored(&cov).unwrap();
    for t in [-1.3, -0.2, 0.4, 2.0] {
        assert!((m.lambda(&cov, t) - c.lambda(&cov, t).conj()).norm() < 1e-12);
    }
}

trait DeformOk {
    fn deform_ok(self, cov: &Covering) -> Contour;
}

impl DeformOk for Contour {
    fn deform_ok(self, cov: &Covering) -> Contour {
        deform_for_ray(&self, cov, 0.2).unwrap()
    }
}

#[test]
fn csv_export_has_header_and_samples() {
    let cov = real(&[2.0, -2.0]);
    let c = build_c_side(&cov, 0, Side::R).unwrap();
    let csv = c.to_csv(&cov, 11);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,re_lambda,im_lambda,sheet");
    assert_eq!(lines.len(), 12);
    assert!(lines[1].ends_with(",-1") && lines[11].ends_with(",1"));
}

#[test]
fn jordan_chains_are_connection_columns() {
    for pts in [vec![2.0, -2.0], vec![3.0, 1.0, -1.0, -3.0]] {
        let cov = real(&pts);
        let chains = build_jordan_basis(&cov).unwrap();
        let c = connection_matrix(&cov).unwrap();
        for (j, ch) in chains.iter().enumerate() {
            for (i, q) in ch.coeffs.iter().enumerate() {
                assert_eq!(*q, c[(i, j)]);
            }
        }
        assert_eq!(build_gamma_basis(&cov).unwrap().len(), cov.n());
        assert_eq!(jordan_names(&cov).unwrap().len(), cov.n());
    }
}

#[test]
fn diagram_only_covering_has_no_contours() {
    let cov = Covering::from_diagram(&[(0, 1), (0, 1)]).unwrap();
    assert!(matches!(build_c_side(&cov, 0, Side::R), Err(Error::Unsupported(_))));
}

proptest! {
    #[test]
    fn zlift_square_root_squares_back(re in -5.0..5.0f64, im in -5.0..5.0f64, phi in -3.0..3.0f64) {
        prop_assume!(re.hypot(im) > 1e-3);
        let z = C64::new(re, im);
        let l = ZLift::new(z, phi);
        prop_assert!(l.arg > phi - PI - 1e-12 && l.arg <= phi + PI + 1e-12);
        prop_assert!((l.sqrt() * l.sqrt() - z).norm() < 1e-12 * (1.0 + z.norm()));
        prop_assert!((l.conj().sqrt() - l.sqrt().conj()).norm() < 1e-12 * (1.0 + z.norm()));
    }

    #[test]
    fn canonical_sector_tails_decay(a in 0.05..0.95f64) {
        let cov = real(&[2.0, -2.0]);
        let z = ZLift::polar(2.0, -PI * a);
        for c in build_side(&cov, Side::R).unwrap() {
            prop_assert!(c.decay_rate(z.z) > 0.0);
        }
    }
}
