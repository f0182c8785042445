//! Operator triples, the pencils Φ₁/Φ₂ with the rotated-scaled
//! positivity scan, and polynomial functional calculus with Γ₃ sup-norm
//! estimation.

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{Gamma3Error, Result};
use crate::numerics::{self, fmax, Tolerances};
use crate::points::sym3;
use crate::{re, ComplexMatrix, Cx, Real};

/// Commuting triple (S₁, S₂, P) of same-size square matrices.
///
/// Pairwise commutation is checked at construction; the defects are
/// cached for reporting.
#[derive(Debug, Clone)]
pub struct OperatorTriple<T: Real> {
    s1: ComplexMatrix<T>,
    s2: ComplexMatrix<T>,
    p: ComplexMatrix<T>,
    commutation_defects: [T; 3],
}

impl<T: Real> OperatorTriple<T> {
    /// Build a triple, rejecting non-square, mismatched or non-commuting
    /// inputs.
    pub fn new(
        s1: ComplexMatrix<T>,
        s2: ComplexMatrix<T>,
        p: ComplexMatrix<T>,
        tol: &Tolerances<T>,
    ) -> Result<Self> {
        for (name, m) in [("S1", &s1), ("S2", &s2), ("P", &p)] {
            if m.nrows() != m.ncols() {
                return Err(Gamma3Error::Input(format!("{name} is not square")));
            }
        }
        if s1.shape() != s2.shape() || s1.shape() != p.shape() {
            return Err(Gamma3Error::Input("operators differ in size".into()));
        }
        let defects = [
            numerics::commutation_defect(&s1, &s2)?,
            numerics::commutation_defect(&s1, &p)?,
            numerics::commutation_defect(&s2, &p)?,
        ];
        let worst = defects.iter().copied().fold(T::zero(), fmax);
        if worst > tol.eq_tol {
            return Err(Gamma3Error::Contract(format!(
                "triple does not commute (worst defect {:e})",
                worst.to_report()
            )));
        }
        Ok(Self {
            s1,
            s2,
            p,
            commutation_defects: defects,
        })
    }

    /// Scalar triple (s₁, s₂, p) · I of a given dimension.
    pub fn scalar(s1: Cx<T>, s2: Cx<T>, p: Cx<T>, n: usize) -> Self {
        let eye = ComplexMatrix::<T>::identity(n, n);
        Self {
            s1: &eye * s1,
            s2: &eye * s2,
            p: eye * p,
            commutation_defects: [T::zero(); 3],
        }
    }

    pub fn s1(&self) -> &ComplexMatrix<T> {
        &self.s1
    }

    pub fn s2(&self) -> &ComplexMatrix<T> {
        &self.s2
    }

    pub fn p(&self) -> &ComplexMatrix<T> {
        &self.p
    }

    pub fn dim(&self) -> usize {
        self.s1.nrows()
    }

    /// Cached defects for (S₁,S₂), (S₁,P), (S₂,P).
    pub fn commutation_defects(&self) -> [T; 3] {
        self.commutation_defects
    }
}

/// Holomorphic polynomial in three variables as a sparse coefficient map
/// from exponent triples (i, j, k).
#[derive(Debug, Clone, PartialEq)]
pub struct Poly3<T: Real> {
    terms: BTreeMap<(u32, u32, u32), Cx<T>>,
}

impl<T: Real> Poly3<T> {
    pub fn zero() -> Self {
        Self {
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(c: Cx<T>) -> Self {
        Self::from_terms([((0, 0, 0), c)])
    }

    pub fn monomial(exps: (u32, u32, u32), coef: Cx<T>) -> Self {
        Self::from_terms([(exps, coef)])
    }

    /// Build from (exponents, coefficient) pairs; repeated exponents are
    /// summed, zero coefficients dropped.
    pub fn from_terms(terms: impl IntoIterator<Item = ((u32, u32, u32), Cx<T>)>) -> Self {
        let mut map: BTreeMap<(u32, u32, u32), Cx<T>> = BTreeMap::new();
        for (e, c) in terms {
            let entry = map.entry(e).or_insert_with(|| Cx::new(T::zero(), T::zero()));
            *entry = *entry + c;
        }
        map.retain(|_, c| c.norm() > T::zero());
        Self { terms: map }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(u32, u32, u32), &Cx<T>)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|(i, j, k)| i + j + k)
            .max()
            .unwrap_or(0)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Self) -> Self {
        let mut products = Vec::new();
        for ((i1, j1, k1), c1) in &self.terms {
            for ((i2, j2, k2), c2) in &other.terms {
                products.push(((i1 + i2, j1 + j2, k1 + k2), c1 * c2));
            }
        }
        Self::from_terms(products)
    }

    /// Evaluate at a scalar point.
    pub fn eval_scalar(&self, s1: Cx<T>, s2: Cx<T>, p: Cx<T>) -> Cx<T> {
        let mut acc = Cx::new(T::zero(), T::zero());
        for ((i, j, k), c) in &self.terms {
            acc += c * powu(s1, *i) * powu(s2, *j) * powu(p, *k);
        }
        acc
    }
}

fn powu<T: Real>(base: Cx<T>, exp: u32) -> Cx<T> {
    let mut acc = Cx::new(T::one(), T::zero());
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// Samples of the pencil scan over the closed disc.
#[derive(Debug, Clone)]
pub struct PencilScanResult<T> {
    pub grid: Vec<Cx<T>>,
    pub min_eigs_phi1: Vec<T>,
    pub min_eigs_phi2: Vec<T>,
    pub global_min: T,
}

fn pencil<T: Real>(
    a: &ComplexMatrix<T>,
    b: &ComplexMatrix<T>,
    p: &ComplexMatrix<T>,
) -> ComplexMatrix<T> {
    let n = p.nrows();
    let eye = DMatrix::identity(n, n);
    let nine = Cx::new(re::<T>(9.0), T::zero());
    let three = Cx::new(re::<T>(3.0), T::zero());
    let x = a - b.adjoint() * p;
    (eye - p.adjoint() * p) * nine + (a.adjoint() * a - b.adjoint() * b)
        - (&x + x.adjoint()) * three
}

/// The pencil Φ₁ = 9(I - P*P) + (S₁*S₁ - S₂*S₂) - 6 Re(S₁ - S₂*P);
/// Hermitian by construction.
pub fn phi1<T: Real>(t: &OperatorTriple<T>) -> ComplexMatrix<T> {
    pencil(&t.s1, &t.s2, &t.p)
}

/// The pencil Φ₂, the mirror of Φ₁ with S₁ and S₂ exchanged.
pub fn phi2<T: Real>(t: &OperatorTriple<T>) -> ComplexMatrix<T> {
    pencil(&t.s2, &t.s1, &t.p)
}

/// The Γ₃-compatible scaling (αS₁, α²S₂, α³P) for |α| ≤ 1; commutation
/// is preserved exactly.
pub fn scale_rotate_triple<T: Real>(t: &OperatorTriple<T>, alpha: Cx<T>) -> Result<OperatorTriple<T>> {
    if alpha.norm() > T::one() + re(1e-12) {
        return Err(Gamma3Error::Input(format!(
            "scaling factor must satisfy |alpha| <= 1, got {}",
            alpha.norm().to_report()
        )));
    }
    Ok(OperatorTriple {
        s1: &t.s1 * alpha,
        s2: &t.s2 * (alpha * alpha),
        p: &t.p * (alpha * alpha * alpha),
        commutation_defects: t.commutation_defects,
    })
}

/// Evaluate the smallest eigenvalue of both pencils over the polar grid
/// α = r·e^{iθ}, r ∈ {0, 1/R, …, 1}, θ ∈ {2πk/A}.
pub fn pencil_scan<T: Real>(
    t: &OperatorTriple<T>,
    radial_steps: usize,
    angular_steps: usize,
    tol: &Tolerances<T>,
) -> Result<PencilScanResult<T>> {
    if radial_steps == 0 || angular_steps == 0 {
        return Err(Gamma3Error::Input("scan grid must be non-empty".into()));
    }
    let mut grid = Vec::new();
    let mut e1 = Vec::new();
    let mut e2 = Vec::new();
    let mut global = T::infinity();
    for ri in 0..=radial_steps {
        let r = re::<T>(ri as f64 / radial_steps as f64);
        for ai in 0..angular_steps {
            let theta = std::f64::consts::TAU * ai as f64 / angular_steps as f64;
            let alpha = Cx::new(r * re(theta.cos()), r * re(theta.sin()));
            let scaled = scale_rotate_triple(t, alpha)?;
            let m1 = numerics::min_eig_hermitian(&phi1(&scaled), tol)?;
            let m2 = numerics::min_eig_hermitian(&phi2(&scaled), tol)?;
            global = crate::numerics::fmin(global, crate::numerics::fmin(m1, m2));
            grid.push(alpha);
            e1.push(m1);
            e2.push(m2);
            if ri == 0 {
                // alpha = 0 regardless of angle
                break;
            }
        }
    }
    Ok(PencilScanResult {
        grid,
        min_eigs_phi1: e1,
        min_eigs_phi2: e2,
        global_min: global,
    })
}

/// Default scan grid: 8 radial and 24 angular steps.
pub const DEFAULT_RADIAL_STEPS: usize = 8;
pub const DEFAULT_ANGULAR_STEPS: usize = 24;

/// Polynomial functional calculus Σ c(i,j,k) S₁ⁱ S₂ʲ Pᵏ; powers are
/// cached up to the maximal exponent per variable.
pub fn eval_poly<T: Real>(f: &Poly3<T>, t: &OperatorTriple<T>) -> ComplexMatrix<T> {
    let n = t.dim();
    let (mut mi, mut mj, mut mk) = (0, 0, 0);
    for ((i, j, k), _) in f.terms() {
        mi = mi.max(*i);
        mj = mj.max(*j);
        mk = mk.max(*k);
    }
    let pow1 = matrix_powers(&t.s1, mi);
    let pow2 = matrix_powers(&t.s2, mj);
    let pow3 = matrix_powers(&t.p, mk);
    let mut acc: ComplexMatrix<T> = DMatrix::zeros(n, n);
    for ((i, j, k), c) in f.terms() {
        acc += &pow1[*i as usize] * &pow2[*j as usize] * &pow3[*k as usize] * *c;
    }
    acc
}

fn matrix_powers<T: Real>(a: &ComplexMatrix<T>, max_exp: u32) -> Vec<ComplexMatrix<T>> {
    let n = a.nrows();
    let mut pows = vec![DMatrix::identity(n, n)];
    for e in 1..=max_exp as usize {
        let next = &pows[e - 1] * a;
        pows.push(next);
    }
    pows
}

/// Lower bound for sup |f| over Γ₃, sampled on the symmetrized torus
/// grid of `grid_per_dim` points per angle.
///
/// By the maximum principle the sup over Γ₃ is attained on bΓ₃, the
/// symmetrization of 𝕋³, so the grid converges to the true value from
/// below as it is refined.
pub fn sup_norm_gamma3<T: Real>(f: &Poly3<T>, grid_per_dim: usize) -> Result<T> {
    if grid_per_dim < 8 {
        return Err(Gamma3Error::Input(
            "sup-norm grid must have at least 8 points per dimension".into(),
        ));
    }
    let roots: Vec<Cx<T>> = (0..grid_per_dim)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / grid_per_dim as f64;
            Cx::new(re(theta.cos()), re(theta.sin()))
        })
        .collect();
    let mut best = T::zero();
    for z1 in &roots {
        for z2 in &roots {
            for z3 in &roots {
                let pt = sym3(*z1, *z2, *z3);
                let v = f.eval_scalar(pt.s1, pt.s2, pt.p).norm();
                best = fmax(best, v);
            }
        }
    }
    // Grid points carry up to an ulp of modulus excess from cos/sin
    // rounding; shave a few ulps so the estimate stays a lower bound
    // for the true supremum.
    Ok(best * (T::one() - re::<T>(16.0) * num_traits::Float::epsilon()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{ComplexMatrix64, Cx64};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Cx64 {
        Cx64::new(re, im)
    }

    fn tol() -> Tolerances<f64> {
        Tolerances::default()
    }

    fn zero_triple(n: usize) -> OperatorTriple<f64> {
        OperatorTriple::scalar(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), n)
    }

    #[test]
    fn phi_at_zero_triple_is_nine_identity() {
        let t = zero_triple(2);
        let expected = ComplexMatrix64::identity(2, 2) * c(9.0, 0.0);
        assert!((phi1(&t) - &expected).norm() < 1e-14);
        assert!((phi2(&t) - expected).norm() < 1e-14);
    }

    #[test]
    fn phi_vanishes_on_scalar_boundary_points() {
        // 9(1-1) + (9-9) - 6 Re(3-3) = 0
        let t = OperatorTriple::scalar(c(3.0, 0.0), c(3.0, 0.0), c(1.0, 0.0), 1);
        assert!(phi1(&t).norm() < 1e-13);
        assert!(phi2(&t).norm() < 1e-13);

        // 9(1-1) + 0 - 0 = 0 for (0, 0, omega)
        let w = c(0.6, 0.8);
        let t = OperatorTriple::scalar(c(0.0, 0.0), c(0.0, 0.0), w, 1);
        assert!(phi1(&t).norm() < 1e-13);
    }

    #[test]
    fn phi2_is_phi1_with_arguments_swapped() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d: Vec<Cx64> = (0..3).map(|_| c(rng.gen(), rng.gen())).collect();
        let s1 = ComplexMatrix64::from_diagonal(&nalgebra::DVector::from_vec(d.clone()));
        let s2 = &s1 * c(0.5, 0.1);
        let p = &s1 * &s1 * c(0.1, 0.0);
        let t = OperatorTriple::new(s1.clone(), s2.clone(), p.clone(), &tol()).unwrap();
        let swapped = OperatorTriple::new(s2, s1, p, &tol()).unwrap();
        assert_eq!(phi2(&t), phi1(&swapped));
    }

    #[test]
    fn phi_outputs_are_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = ComplexMatrix64::from_fn(3, 3, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let t = OperatorTriple::new(a.clone(), &a * &a, &a * &a * &a, &tol()).unwrap();
        for m in [phi1(&t), phi2(&t)] {
            let defect = (&m - m.adjoint()).norm();
            assert!(defect <= 1e-13 * (1.0 + m.norm()));
        }
    }

    #[test]
    fn scale_rotate_cases() {
        let t = OperatorTriple::scalar(c(1.0, 0.0), c(0.5, 0.0), c(0.25, 0.0), 2);
        let same = scale_rotate_triple(&t, c(1.0, 0.0)).unwrap();
        assert_eq!(same.s1(), t.s1());
        let zero = scale_rotate_triple(&t, c(0.0, 0.0)).unwrap();
        assert_eq!(zero.p().norm(), 0.0);
        assert!(scale_rotate_triple(&t, c(1.5, 0.0)).is_err());
    }

    #[test]
    fn pencil_scan_zero_triple() {
        let scan = pencil_scan(&zero_triple(2), 4, 8, &tol()).unwrap();
        assert!((scan.global_min - 9.0).abs() < 1e-12);
        let all: Vec<f64> = scan
            .min_eigs_phi1
            .iter()
            .chain(&scan.min_eigs_phi2)
            .copied()
            .collect();
        let m = all.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(m, scan.global_min);
    }

    #[test]
    fn pencil_scan_flags_non_contraction() {
        // phi1 at alpha = 1 is 9(1 - 4) = -27
        let t = OperatorTriple::scalar(c(0.0, 0.0), c(0.0, 0.0), c(2.0, 0.0), 1);
        let scan = pencil_scan(&t, 8, 24, &tol()).unwrap();
        assert!(scan.global_min <= -27.0 + 1e-9);
    }

    #[test]
    fn scan_grid_is_rotation_closed() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let d: Vec<Cx64> = (0..3)
            .map(|_| {
                let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
                c(theta.cos(), theta.sin()) * 0.7
            })
            .collect();
        let diag = ComplexMatrix64::from_diagonal(&nalgebra::DVector::from_vec(d));
        let t =
            OperatorTriple::new(diag.clone(), &diag * c(0.5, 0.0), &diag * &diag * c(0.3, 0.0), &tol())
                .unwrap();
        let base = pencil_scan(&t, 4, 8, &tol()).unwrap();
        let theta = std::f64::consts::TAU / 8.0;
        let rotated = scale_rotate_triple(&t, c(theta.cos(), theta.sin())).unwrap();
        let rot = pencil_scan(&rotated, 4, 8, &tol()).unwrap();
        assert!((base.global_min - rot.global_min).abs() < 1e-10);
    }

    #[test]
    fn eval_poly_constant_and_coordinate() {
        let t = OperatorTriple::scalar(c(3.0, 0.0), c(3.0, 0.0), c(1.0, 0.0), 1);
        let one = Poly3::constant(c(1.0, 0.0));
        assert_eq!(eval_poly(&one, &zero_triple(2)), ComplexMatrix64::identity(2, 2));
        let s1 = Poly3::monomial((1, 0, 0), c(1.0, 0.0));
        let out = eval_poly(&s1, &t);
        assert_eq!(out.nrows(), 1);
        assert!((out[(0, 0)] - c(3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_poly_diagonal_matches_scalar_evaluation() {
        // f = s1 * p - s2 acts pointwise on a diagonal triple
        let f = Poly3::from_terms([
            ((1, 0, 1), c(1.0, 0.0)),
            ((0, 1, 0), c(-1.0, 0.0)),
        ]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<(Cx64, Cx64, Cx64)> = (0..4)
            .map(|_| (c(rng.gen(), rng.gen()), c(rng.gen(), rng.gen()), c(rng.gen(), rng.gen())))
            .collect();
        let dv = |sel: fn(&(Cx64, Cx64, Cx64)) -> Cx64| {
            ComplexMatrix64::from_diagonal(&nalgebra::DVector::from_vec(
                pts.iter().map(sel).collect::<Vec<_>>(),
            ))
        };
        let t = OperatorTriple::new(dv(|p| p.0), dv(|p| p.1), dv(|p| p.2), &tol()).unwrap();
        let out = eval_poly(&f, &t);
        for (i, (s1, s2, p)) in pts.iter().enumerate() {
            assert!((out[(i, i)] - f.eval_scalar(*s1, *s2, *p)).norm() < 1e-12);
        }
    }

    #[test]
    fn eval_poly_is_an_algebra_map() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let a = ComplexMatrix64::from_fn(4, 4, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            * c(0.4, 0.0);
        let t = OperatorTriple::new(a.clone(), &a * &a, &a * &a * &a, &tol()).unwrap();
        for _ in 0..5 {
            let rand_poly = |rng: &mut ChaCha8Rng| {
                Poly3::from_terms((0..4).map(|_| {
                    (
                        (rng.gen_range(0..3u32), rng.gen_range(0..2u32), rng.gen_range(0..2u32)),
                        c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5),
                    )
                }))
            };
            let f = rand_poly(&mut rng);
            let g = rand_poly(&mut rng);
            let lhs = eval_poly(&f.mul(&g), &t);
            let rhs = eval_poly(&f, &t) * eval_poly(&g, &t);
            assert!((&lhs - &rhs).norm() <= 1e-9 * (1.0 + lhs.norm()));
        }
    }

    #[test]
    fn sup_norm_reference_values() {
        let p = Poly3::monomial((0, 0, 1), c(1.0, 0.0));
        assert!((sup_norm_gamma3(&p, 8).unwrap() - 1.0).abs() < 1e-9);
        let one = Poly3::constant(c(1.0, 0.0));
        assert!((sup_norm_gamma3(&one, 8).unwrap() - 1.0).abs() < 1e-12);
        // attained at z1 = z2 = z3 = 1
        let s1 = Poly3::monomial((1, 0, 0), c(1.0, 0.0));
        let v = sup_norm_gamma3(&s1, 64).unwrap();
        assert!(v <= 3.0 + 1e-12 && v > 3.0 - 1e-2);
    }

    #[test]
    fn sup_norm_monotone_under_grid_refinement() {
        let f = Poly3::from_terms([
            ((1, 0, 0), c(0.3, 0.7)),
            ((0, 2, 0), c(-0.4, 0.1)),
            ((1, 1, 1), c(0.2, -0.9)),
        ]);
        let mut prev = 0.0;
        for g in [8, 16, 32, 64] {
            let v = sup_norm_gamma3(&f, g).unwrap();
            assert!(v >= prev - 1e-14);
            prev = v;
        }
    }

    #[test]
    fn sup_norm_rejects_tiny_grid() {
        let f = Poly3::constant(c(1.0, 0.0));
        assert!(sup_norm_gamma3(&f, 4).is_err());
    }
}
