//! Scalar geometry of Γ₂, Γ₃, 𝔾₃ and the distinguished boundary bΓ₃:
//! symmetrization maps and membership tests.
//!
//! Γ₃ is the image of the closed unit tridisc under the elementary
//! symmetric polynomials; a point is inside iff the roots of its monic
//! cubic lie in the closed disc, and on bΓ₃ iff they lie on the circle.
//! The fibered test goes through the Γ₂ witness pair instead of roots.

use num_traits::Float;

use crate::error::{Gamma3Error, Result};
use crate::numerics::{fmax, fmin};
use crate::{re, ComplexMatrix, Cx, Real};

/// A point (s₁, s₂, p) ∈ ℂ³ in symmetrized coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointTriple<T> {
    pub s1: Cx<T>,
    pub s2: Cx<T>,
    pub p: Cx<T>,
}

/// A point (c₁, c₂) ∈ ℂ² in symmetrized bidisc coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointPair<T> {
    pub c1: Cx<T>,
    pub c2: Cx<T>,
}

/// Membership verdict with root witnesses.
#[derive(Debug, Clone)]
pub struct MembershipVerdict<T> {
    pub inside: bool,
    pub on_distinguished_boundary: bool,
    pub max_root_modulus: T,
    pub witnesses: Vec<Cx<T>>,
}

/// Default tolerance on root moduli for membership tests.
pub fn default_membership_tol<T: Real>() -> T {
    re(1e-9)
}

/// Elementary symmetric polynomials of three complex numbers.
pub fn sym3<T: Real>(z1: Cx<T>, z2: Cx<T>, z3: Cx<T>) -> PointTriple<T> {
    PointTriple {
        s1: z1 + z2 + z3,
        s2: z1 * z2 + z2 * z3 + z3 * z1,
        p: z1 * z2 * z3,
    }
}

/// Elementary symmetric polynomials of two complex numbers.
pub fn sym2<T: Real>(z1: Cx<T>, z2: Cx<T>) -> PointPair<T> {
    PointPair {
        c1: z1 + z2,
        c2: z1 * z2,
    }
}

/// Roots of z² - c₁z + c₂ by the quadratic formula.
pub fn quadratic_roots<T: Real>(c: &PointPair<T>) -> [Cx<T>; 2] {
    let half = re::<T>(0.5);
    let four = re::<T>(4.0);
    let disc = c.c1 * c.c1 - c.c2 * Cx::new(four, T::zero());
    let sq = disc.sqrt();
    [
        (c.c1 + sq) * Cx::new(half, T::zero()),
        (c.c1 - sq) * Cx::new(half, T::zero()),
    ]
}

/// Roots of z³ - s₁z² + s₂z - p as eigenvalues of the companion matrix.
pub fn cubic_roots<T: Real>(t: &PointTriple<T>) -> [Cx<T>; 3] {
    let zero = Cx::new(T::zero(), T::zero());
    let one = Cx::new(T::one(), T::zero());
    let companion: ComplexMatrix<T> = ComplexMatrix::from_row_slice(
        3,
        3,
        &[zero, zero, t.p, one, zero, -t.s2, zero, one, t.s1],
    );
    let schur = companion
        .try_schur(Float::epsilon(), 10_000)
        .expect("3x3 complex Schur converges");
    let (_, tri) = schur.unpack();
    let mut r = [tri[(0, 0)], tri[(1, 1)], tri[(2, 2)]];

    // Multiple roots perturb eigenvalues by O(eps^(1/m)) but leave the
    // cluster mean accurate to O(eps), so collapse tight clusters onto
    // their centroid. The triple threshold is wider than the pair one
    // because the cube-root blowup is larger.
    let scale = T::one() + r.iter().map(|z| z.norm()).fold(T::zero(), fmax);
    let d01 = (r[0] - r[1]).norm();
    let d02 = (r[0] - r[2]).norm();
    let d12 = (r[1] - r[2]).norm();
    let triple = re::<T>(1e-4) * scale;
    let pair = re::<T>(1e-6) * scale;
    if d01 < triple && d02 < triple && d12 < triple {
        let third = Cx::new(re::<T>(3.0), T::zero());
        let mean = (r[0] + r[1] + r[2]) / third;
        r = [mean, mean, mean];
    } else {
        let half = Cx::new(re::<T>(2.0), T::zero());
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if (r[i] - r[j]).norm() < pair {
                let mean = (r[i] + r[j]) / half;
                r[i] = mean;
                r[j] = mean;
            }
        }
    }
    r
}

fn verdict_from_roots<T: Real>(roots: &[Cx<T>], tol: T) -> MembershipVerdict<T> {
    let moduli: Vec<T> = roots.iter().map(|z| z.norm()).collect();
    let max_mod = moduli.iter().copied().fold(T::zero(), fmax);
    let min_mod = moduli.iter().copied().fold(T::infinity(), fmin);
    let inside = max_mod <= T::one() + tol;
    let on_boundary = inside && min_mod >= T::one() - tol;
    MembershipVerdict {
        inside,
        on_distinguished_boundary: on_boundary,
        max_root_modulus: max_mod,
        witnesses: roots.to_vec(),
    }
}

/// Γ₂ membership: both roots of z² - c₁z + c₂ in the closed disc.
pub fn in_gamma2<T: Real>(c: &PointPair<T>, tol: T) -> MembershipVerdict<T> {
    verdict_from_roots(&quadratic_roots(c), tol)
}

/// Γ₃ membership through companion-matrix roots; the boundary flag is
/// bΓ₃ membership (all root moduli 1).
pub fn in_gamma3_roots<T: Real>(t: &PointTriple<T>, tol: T) -> MembershipVerdict<T> {
    verdict_from_roots(&cubic_roots(t), tol)
}

/// Γ₃ membership through the Γ₂ fibering: for |p| < 1 the witness pair
/// (c₁, c₂) with s₁ = c₁ + c̄₂p and s₂ = c₂ + c̄₁p is unique, and the
/// point is in Γ₃ iff the pair is in Γ₂.
///
/// Near |p| = 1 the linear system degenerates, so the test hands off to
/// the root test (and returns no witness).
pub fn in_gamma3_fibered<T: Real>(
    t: &PointTriple<T>,
    tol: T,
) -> (MembershipVerdict<T>, Option<PointPair<T>>) {
    let pm = t.p.norm();
    if pm > T::one() + tol {
        // |p| <= 1 is necessary; report the roots as witnesses anyway
        return (verdict_from_roots(&cubic_roots(t), tol), None);
    }
    if pm > T::one() - re::<T>(1e-6) {
        return (in_gamma3_roots(t, tol), None);
    }
    let c = fiber_witness(t);
    let verdict = in_gamma2(&c, tol);
    (
        MembershipVerdict {
            inside: verdict.inside,
            // interior in p, hence never on the distinguished boundary
            on_distinguished_boundary: false,
            max_root_modulus: verdict.max_root_modulus,
            witnesses: verdict.witnesses,
        },
        Some(c),
    )
}

/// Closed-form solution of the ℝ-linear system s₁ = c₁ + c̄₂p,
/// s₂ = c₂ + c̄₁p (valid for |p| < 1).
pub fn fiber_witness<T: Real>(t: &PointTriple<T>) -> PointPair<T> {
    let denom = T::one() - t.p.norm_sqr();
    let scale = Cx::new(T::one() / denom, T::zero());
    PointPair {
        c1: (t.s1 - t.s2.conj() * t.p) * scale,
        c2: (t.s2 - t.s1.conj() * t.p) * scale,
    }
}

/// The Γ₃-preserving rotation (ωs₁, ω²s₂, ω³p) for unimodular ω.
pub fn rotate_point<T: Real>(t: &PointTriple<T>, omega: Cx<T>) -> Result<PointTriple<T>> {
    if Float::abs(omega.norm() - T::one()) > re(1e-12) {
        return Err(Gamma3Error::Input(format!(
            "rotation factor must be unimodular, |omega| = {}",
            omega.norm().to_report()
        )));
    }
    Ok(PointTriple {
        s1: omega * t.s1,
        s2: omega * omega * t.s2,
        p: omega * omega * omega * t.p,
    })
}

/// Scalar bΓ₃ test without root extraction: |p| = 1, s₁ = s̄₂p, and
/// ((2/3)s₁, (1/3)s₂) ∈ Γ₂.
pub fn in_b_gamma3_scalar<T: Real>(t: &PointTriple<T>, tol: T) -> bool {
    let pm = t.p.norm();
    if pm < T::one() - tol || pm > T::one() + tol {
        return false;
    }
    let defect = (t.s1 - t.s2.conj() * t.p).norm();
    if defect > tol * (T::one() + t.s2.norm()) {
        return false;
    }
    let third = re::<T>(1.0 / 3.0);
    let pair = PointPair {
        c1: t.s1 * Cx::new(third + third, T::zero()),
        c2: t.s2 * Cx::new(third, T::zero()),
    };
    in_gamma2(&pair, tol).inside
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Cx64;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Cx64 {
        Cx64::new(re, im)
    }

    const TOL: f64 = 1e-9;

    #[test]
    fn sym3_values() {
        let z = sym3(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        assert_eq!(z, PointTriple { s1: c(0.0, 0.0), s2: c(0.0, 0.0), p: c(0.0, 0.0) });
        let o = sym3(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0));
        assert_eq!(o, PointTriple { s1: c(3.0, 0.0), s2: c(3.0, 0.0), p: c(1.0, 0.0) });
        // hand expansion: s2 = i - i - 1 = -1
        let m = sym3(c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0));
        assert!((m.s1 - c(0.0, 1.0)).norm() < 1e-15);
        assert!((m.s2 - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((m.p - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn sym2_values() {
        assert_eq!(sym2(c(0.0, 0.0), c(0.0, 0.0)), PointPair { c1: c(0.0, 0.0), c2: c(0.0, 0.0) });
        assert_eq!(sym2(c(1.0, 0.0), c(1.0, 0.0)), PointPair { c1: c(2.0, 0.0), c2: c(1.0, 0.0) });
        assert_eq!(
            sym2(c(0.5, 0.0), c(-0.5, 0.0)),
            PointPair { c1: c(0.0, 0.0), c2: c(-0.25, 0.0) }
        );
    }

    #[test]
    fn gamma2_membership() {
        let v = in_gamma2(&PointPair { c1: c(2.0, 0.0), c2: c(1.0, 0.0) }, TOL);
        assert!(v.inside && v.on_distinguished_boundary);

        let v = in_gamma2(&PointPair { c1: c(3.0, 0.0), c2: c(0.0, 0.0) }, TOL);
        assert!(!v.inside);

        // quadratic formula: discriminant (10/7)^2 - 16/7 = -12/49, root
        // modulus sqrt(4/7)
        let v = in_gamma2(&PointPair { c1: c(10.0 / 7.0, 0.0), c2: c(4.0 / 7.0, 0.0) }, TOL);
        assert!(v.inside);
        assert!((v.max_root_modulus - (4.0f64 / 7.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gamma3_root_membership() {
        let v = in_gamma3_roots(&PointTriple { s1: c(3.0, 0.0), s2: c(3.0, 0.0), p: c(1.0, 0.0) }, 1e-6);
        assert!(v.inside && v.on_distinguished_boundary);

        // z^2 (z - 4)
        let v = in_gamma3_roots(&PointTriple { s1: c(4.0, 0.0), s2: c(0.0, 0.0), p: c(0.0, 0.0) }, TOL);
        assert!(!v.inside);
        assert!((v.max_root_modulus - 4.0).abs() < 1e-9);

        let t = sym3(c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0));
        assert!((t.s1 - c(1.5, 0.0)).norm() < 1e-15);
        assert!((t.s2 - c(0.75, 0.0)).norm() < 1e-15);
        assert!((t.p - c(0.125, 0.0)).norm() < 1e-15);
        let v = in_gamma3_roots(&t, TOL);
        assert!(v.inside && !v.on_distinguished_boundary);
    }

    #[test]
    fn fibered_at_p_zero_reduces_to_gamma2() {
        let t = PointTriple { s1: c(0.3, 0.4), s2: c(-0.2, 0.1), p: c(0.0, 0.0) };
        let (v, pair) = in_gamma3_fibered(&t, TOL);
        let pair = pair.unwrap();
        assert!((pair.c1 - t.s1).norm() < 1e-15);
        assert!((pair.c2 - t.s2).norm() < 1e-15);
        assert_eq!(v.inside, in_gamma2(&PointPair { c1: t.s1, c2: t.s2 }, TOL).inside);
    }

    /// Independent oracle: solve the 4x4 real linear system for
    /// (Re c1, Im c1, Re c2, Im c2) by Gaussian elimination.
    fn fiber_witness_oracle(t: &PointTriple<f64>) -> PointPair<f64> {
        let (pr, pi) = (t.p.re, t.p.im);
        // s1 = c1 + conj(c2) p ; s2 = c2 + conj(c1) p, split into re/im:
        // rows: Re s1, Im s1, Re s2, Im s2; cols: x1, y1, x2, y2
        let mut a = [
            [1.0, 0.0, pr, pi],
            [0.0, 1.0, pi, -pr],
            [pr, pi, 1.0, 0.0],
            [pi, -pr, 0.0, 1.0],
        ];
        let mut b = [t.s1.re, t.s1.im, t.s2.re, t.s2.im];
        for col in 0..4 {
            let piv = (col..4)
                .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                .unwrap();
            a.swap(col, piv);
            b.swap(col, piv);
            for row in 0..4 {
                if row != col {
                    let f = a[row][col] / a[col][col];
                    for k in 0..4 {
                        a[row][k] -= f * a[col][k];
                    }
                    b[row] -= f * b[col];
                }
            }
        }
        PointPair {
            c1: c(b[0] / a[0][0], b[1] / a[1][1]),
            c2: c(b[2] / a[2][2], b[3] / a[3][3]),
        }
    }

    #[test]
    fn fibered_witness_matches_linear_system_oracle() {
        let t = PointTriple { s1: c(1.5, 0.0), s2: c(0.75, 0.0), p: c(0.125, 0.0) };
        let (v, pair) = in_gamma3_fibered(&t, TOL);
        let pair = pair.unwrap();
        assert!((pair.c1 - c(10.0 / 7.0, 0.0)).norm() < 1e-12);
        assert!((pair.c2 - c(4.0 / 7.0, 0.0)).norm() < 1e-12);
        let oracle = fiber_witness_oracle(&t);
        assert!((pair.c1 - oracle.c1).norm() < 1e-12);
        assert!((pair.c2 - oracle.c2).norm() < 1e-12);
        assert!(v.inside);

        // complex-valued case against the oracle
        let t = PointTriple { s1: c(0.4, -0.9), s2: c(-0.3, 0.2), p: c(0.35, 0.55) };
        let (_, pair) = in_gamma3_fibered(&t, TOL);
        let pair = pair.unwrap();
        let oracle = fiber_witness_oracle(&t);
        assert!((pair.c1 - oracle.c1).norm() < 1e-12);
        assert!((pair.c2 - oracle.c2).norm() < 1e-12);
    }

    #[test]
    fn fibered_agrees_with_roots_on_exterior_point() {
        // c = (2, 2): z^2 - 2z + 2 has roots 1 +- i, modulus sqrt(2)
        let t = PointTriple { s1: c(3.0, 0.0), s2: c(3.0, 0.0), p: c(0.5, 0.0) };
        let (vf, pair) = in_gamma3_fibered(&t, TOL);
        let pair = pair.unwrap();
        assert!((pair.c1 - c(2.0, 0.0)).norm() < 1e-12);
        assert!((pair.c2 - c(2.0, 0.0)).norm() < 1e-12);
        assert!(!vf.inside);
        assert!(!in_gamma3_roots(&t, TOL).inside);
    }

    #[test]
    fn rotation_cases() {
        let t = PointTriple { s1: c(3.0, 0.0), s2: c(3.0, 0.0), p: c(1.0, 0.0) };
        let same = rotate_point(&t, c(1.0, 0.0)).unwrap();
        assert_eq!(same, t);

        // roots are negated, moduli preserved
        let neg = rotate_point(&t, c(-1.0, 0.0)).unwrap();
        assert_eq!(neg, PointTriple { s1: c(-3.0, 0.0), s2: c(3.0, 0.0), p: c(-1.0, 0.0) });
        assert!(in_gamma3_roots(&neg, 1e-6).inside);

        let zero = PointTriple { s1: c(0.0, 0.0), s2: c(0.0, 0.0), p: c(0.0, 0.0) };
        assert_eq!(rotate_point(&zero, c(0.0, 1.0)).unwrap(), zero);

        assert!(rotate_point(&t, c(0.5, 0.0)).is_err());
    }

    #[test]
    fn b_gamma3_scalar_cases() {
        // sym3(1, i, -1): s2bar * p = (-1)(-i) = i = s1
        let t = sym3(c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0));
        assert!(in_b_gamma3_scalar(&t, 1e-9));
        assert!(in_b_gamma3_scalar(
            &PointTriple { s1: c(3.0, 0.0), s2: c(3.0, 0.0), p: c(1.0, 0.0) },
            1e-9
        ));
        assert!(!in_b_gamma3_scalar(
            &PointTriple { s1: c(0.0, 0.0), s2: c(0.0, 0.0), p: c(0.5, 0.0) },
            1e-9
        ));
    }

    fn unimodular() -> impl Strategy<Value = Cx64> {
        (0.0..std::f64::consts::TAU).prop_map(|t| c(t.cos(), t.sin()))
    }

    fn disc_point() -> impl Strategy<Value = Cx64> {
        ((0.0..1.0f64), (0.0..std::f64::consts::TAU))
            .prop_map(|(r, t)| c(r.sqrt() * t.cos(), r.sqrt() * t.sin()))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn closure_under_symmetrization(z1 in disc_point(), z2 in disc_point(), z3 in disc_point()) {
            let t = sym3(z1, z2, z3);
            prop_assert!(in_gamma3_roots(&t, 1e-10).inside);
        }

        #[test]
        fn root_and_fibered_tests_agree(z1 in disc_point(), z2 in disc_point(), z3 in disc_point()) {
            let t = sym3(z1, z2, z3);
            if t.p.norm() <= 0.99 {
                let vr = in_gamma3_roots(&t, TOL);
                // skip the tolerance band around the boundary
                if (vr.max_root_modulus - 1.0).abs() > 1e-6 {
                    let (vf, _) = in_gamma3_fibered(&t, TOL);
                    prop_assert_eq!(vr.inside, vf.inside);
                }
            }
        }

        #[test]
        fn fiber_witness_plugs_back(z1 in disc_point(), z2 in disc_point(), z3 in disc_point()) {
            let t = sym3(z1, z2, z3);
            if t.p.norm() <= 0.99 {
                if let (_, Some(cw)) = in_gamma3_fibered(&t, TOL) {
                    let s1 = cw.c1 + cw.c2.conj() * t.p;
                    let s2 = cw.c2 + cw.c1.conj() * t.p;
                    prop_assert!((s1 - t.s1).norm() <= 1e-12);
                    prop_assert!((s2 - t.s2).norm() <= 1e-12);
                }
            }
        }

        #[test]
        fn rotation_invariance_on_grid(z1 in disc_point(), z2 in disc_point(), z3 in disc_point(), scale in 0.5..1.5f64) {
            // scaled points roam inside and outside the set
            let t = sym3(z1 * scale, z2 * scale, z3 * scale);
            let base = in_gamma3_roots(&t, TOL).inside;
            for k in 0..16 {
                let theta = std::f64::consts::TAU * k as f64 / 16.0;
                let rot = rotate_point(&t, c(theta.cos(), theta.sin())).unwrap();
                prop_assert_eq!(in_gamma3_roots(&rot, TOL).inside, base);
            }
        }

        #[test]
        fn boundary_flag_matches_scalar_test(a in unimodular(), b in unimodular(), w in unimodular(),
                                             i1 in disc_point(), i2 in disc_point(), i3 in disc_point()) {
            let on = sym3(a, b, w);
            prop_assert!(in_gamma3_roots(&on, 1e-8).on_distinguished_boundary);
            prop_assert!(in_b_gamma3_scalar(&on, 1e-8));

            let off = sym3(i1 * 0.99, i2 * 0.99, i3 * 0.99);
            prop_assert!(!in_gamma3_roots(&off, 1e-8).on_distinguished_boundary);
            prop_assert!(!in_b_gamma3_scalar(&off, 1e-8));
        }
    }
}
