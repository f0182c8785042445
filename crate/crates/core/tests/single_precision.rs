//! Smoke tests of the f32 instantiation: every public code path is
//! generic over the scalar, so exercise the low-precision side with
//! tolerances matched to f32 epsilon.

use gamma3_core::certify::{self, BatteryConfig, UnitaryRoute, Verdict};
use gamma3_core::decomp::split_triple;
use gamma3_core::gen;
use gamma3_core::numerics::Tolerances;
use gamma3_core::points::{in_gamma3_fibered, in_gamma3_roots, sym3};
use gamma3_core::Cx32;

fn c(re: f32, im: f32) -> Cx32 {
    Cx32::new(re, im)
}

#[test]
fn default_tolerances_clear_f32_epsilon() {
    let tol = Tolerances::<f32>::default();
    assert!(tol.eq_tol >= 100.0 * f32::EPSILON);
    assert!(tol.rank_tol >= 10.0 * f32::EPSILON);
    let tol64 = Tolerances::<f64>::default();
    assert_eq!(tol64.rank_tol, 1e-9);
    assert_eq!(tol64.eq_tol, 1e-8);
}

#[test]
fn scalar_membership_in_single_precision() {
    let t = sym3(c(0.5, 0.0), c(0.3, 0.2), c(-0.4, 0.1));
    assert!(in_gamma3_roots(&t, 1e-4).inside);

    let outside = sym3(c(2.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
    assert!(!in_gamma3_roots(&outside, 1e-4).inside);

    let (v, witness) = in_gamma3_fibered(&t, 1e-4);
    assert!(v.inside);
    let w = witness.unwrap();
    let s1 = w.c1 + w.c2.conj() * t.p;
    assert!((s1 - t.s1).norm() < 1e-5);
}

#[test]
fn generators_battery_and_split_in_single_precision() {
    let tol = Tolerances::<f32>::default();

    let (t, _) = gen::gen_normal_gamma3::<f32>(3, 17, 0.8).unwrap();
    let config = BatteryConfig::<f32>::fast(4);
    let report = certify::battery_gamma3_contraction(&t, &config);
    assert_eq!(report.verdict, Verdict::Pass, "checks: {:?}", report.checks);

    let (u, _) = gen::gen_gamma3_unitary::<f32>(3, 17).unwrap();
    for route in [UnitaryRoute::Spectral, UnitaryRoute::Algebraic] {
        let r = certify::is_gamma3_unitary(&u, route, &tol).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "route {route:?}: {:?}", r.checks);
    }

    let (m, spec) = gen::gen_mixed::<f32>(2, 3, 17).unwrap();
    let (split, identities) = split_triple(&m, &tol).unwrap();
    assert_eq!(split.h1.dim(), spec.true_dim_h1.unwrap());
    assert!(!split.theorem_violation);
    assert!(identities.max_residual() < 1e-4);
}
