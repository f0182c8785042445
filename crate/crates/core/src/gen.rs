//! Reproducible generators of certified test instances: Γ₃-unitaries,
//! normal Γ₃-contractions, cnu triples, mixed direct sums, and unproven
//! non-normal candidates.
//!
//! Every generator owns a ChaCha stream seeded from the caller's seed,
//! so identical parameters produce bit-identical triples.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Gamma3Error, Result};
use crate::numerics::Tolerances;
use crate::opcore::OperatorTriple;
use crate::points::{in_gamma2, sym3, PointPair, PointTriple};
use crate::{re, ComplexMatrix, Cx, Real};

/// What a generator produced and the ground truth it knows about it.
#[derive(Debug, Clone, PartialEq)]
pub enum GenKind {
    /// Joint spectrum on bΓ₃; a Γ₃-unitary by the spectral theorem.
    Unitary,
    /// Symmetrized points of a closed tridisc of the given radius.
    Normal { radius: f64 },
    /// Direct sum of a unitary block and an interior normal block.
    Mixed,
    /// Operator lift of the scalar fibering; NOT certified by
    /// construction and must be run through the battery before use.
    CandidateFibered,
}

/// Generation record: seed, dimensions and stored ground truth.
#[derive(Debug, Clone)]
pub struct GenSpec<T> {
    pub kind: GenKind,
    pub dims: Vec<usize>,
    pub seed: u64,
    /// Joint eigenvalue triples placed on the diagonal (empty for
    /// candidates, whose spectrum is not prescribed pointwise).
    pub ground_truth_points: Vec<PointTriple<T>>,
    /// True dimension of the unitary part, when the construction fixes it.
    pub true_dim_h1: Option<usize>,
    /// Quarantine flag: theorem-level tests must not consume candidates.
    pub candidate: bool,
}

/// Haar-like random unitary: orthonormalized complex Gaussian with the
/// phase convention that makes the triangular factor's diagonal real
/// positive (reproducible across platforms).
pub fn random_unitary<T: Real>(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix<T> {
    let g: ComplexMatrix<T> = DMatrix::from_fn(n, n, |_, _| gaussian(rng));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases: Vec<Cx<T>> = (0..n)
        .map(|i| {
            let d = r[(i, i)];
            let m = d.norm();
            if m > T::zero() {
                d / m
            } else {
                Cx::new(T::one(), T::zero())
            }
        })
        .collect();
    q * DMatrix::from_diagonal(&DVector::from_vec(phases))
}

fn gaussian<T: Real>(rng: &mut ChaCha8Rng) -> Cx<T> {
    // Box-Muller, sampled in f64 for cross-type determinism of the stream
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    let mag = (-2.0 * u1.ln()).sqrt();
    let phase = std::f64::consts::TAU * u2;
    Cx::new(re(mag * phase.cos()), re(mag * phase.sin()))
}

fn unimodular<T: Real>(rng: &mut ChaCha8Rng) -> Cx<T> {
    let theta = std::f64::consts::TAU * rng.gen::<f64>();
    Cx::new(re(theta.cos()), re(theta.sin()))
}

fn disc_point<T: Real>(radius: f64, rng: &mut ChaCha8Rng) -> Cx<T> {
    let r = radius * rng.gen::<f64>().sqrt();
    unimodular::<T>(rng) * re::<T>(r)
}

fn boundary_triples<T: Real>(n: usize, rng: &mut ChaCha8Rng) -> Vec<PointTriple<T>> {
    (0..n)
        .map(|_| sym3(unimodular(rng), unimodular(rng), unimodular(rng)))
        .collect()
}

fn interior_triples<T: Real>(n: usize, radius: f64, rng: &mut ChaCha8Rng) -> Vec<PointTriple<T>> {
    (0..n)
        .map(|_| {
            sym3(
                disc_point(radius, rng),
                disc_point(radius, rng),
                disc_point(radius, rng),
            )
        })
        .collect()
}

fn diagonal_triple_conjugated<T: Real>(
    points: &[PointTriple<T>],
    rng: &mut ChaCha8Rng,
) -> OperatorTriple<T> {
    let n = points.len();
    let diag = |sel: fn(&PointTriple<T>) -> Cx<T>| {
        DMatrix::from_diagonal(&DVector::from_vec(points.iter().map(sel).collect::<Vec<_>>()))
    };
    let w = random_unitary::<T>(n, rng);
    let conj = |d: ComplexMatrix<T>| &w * d * w.adjoint();
    let s1 = conj(diag(|p| p.s1));
    let s2 = conj(diag(|p| p.s2));
    let p = conj(diag(|p| p.p));
    OperatorTriple::new(s1, s2, p, &Tolerances::default())
        .expect("conjugated diagonal triples commute to machine precision")
}

/// Random n-dimensional Γ₃-unitary with stored joint spectrum on bΓ₃.
pub fn gen_gamma3_unitary<T: Real>(n: usize, seed: u64) -> Result<(OperatorTriple<T>, GenSpec<T>)> {
    if n == 0 {
        return Err(Gamma3Error::Input("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = boundary_triples(n, &mut rng);
    let triple = diagonal_triple_conjugated(&points, &mut rng);
    Ok((
        triple,
        GenSpec {
            kind: GenKind::Unitary,
            dims: vec![n],
            seed,
            ground_truth_points: points,
            true_dim_h1: Some(n),
            candidate: false,
        },
    ))
}

/// Random n-dimensional normal Γ₃-contraction from symmetrized tridisc
/// points of the given radius; cnu when radius < 1.
pub fn gen_normal_gamma3<T: Real>(
    n: usize,
    seed: u64,
    radius: f64,
) -> Result<(OperatorTriple<T>, GenSpec<T>)> {
    if n == 0 {
        return Err(Gamma3Error::Input("dimension must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&radius) {
        return Err(Gamma3Error::Input(format!(
            "radius must lie in [0, 1], got {radius}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = interior_triples(n, radius, &mut rng);
    let triple = diagonal_triple_conjugated(&points, &mut rng);
    Ok((
        triple,
        GenSpec {
            kind: GenKind::Normal { radius },
            dims: vec![n],
            seed,
            ground_truth_points: points,
            true_dim_h1: if radius < 1.0 { Some(0) } else { None },
            candidate: false,
        },
    ))
}

/// Direct sum of a Γ₃-unitary block and an interior (radius 0.9) normal
/// block, mixed by one random unitary; ground truth dim H₁ = n_unitary.
pub fn gen_mixed<T: Real>(
    n_unitary: usize,
    n_cnu: usize,
    seed: u64,
) -> Result<(OperatorTriple<T>, GenSpec<T>)> {
    let n = n_unitary + n_cnu;
    if n == 0 {
        return Err(Gamma3Error::Input(
            "n_unitary + n_cnu must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = boundary_triples(n_unitary, &mut rng);
    points.extend(interior_triples(n_cnu, 0.9, &mut rng));
    let triple = diagonal_triple_conjugated(&points, &mut rng);
    Ok((
        triple,
        GenSpec {
            kind: GenKind::Mixed,
            dims: vec![n_unitary, n_cnu],
            seed,
            ground_truth_points: points,
            true_dim_h1: Some(n_unitary),
            candidate: false,
        },
    ))
}

/// Operator lift of the scalar fibering: S₁ = c₁I + c̄₂T, S₂ = c₂I + c̄₁T,
/// P = T for a Γ₂ point (c₁, c₂) and a contraction T.
///
/// The lift is a commuting triple by construction, but nothing here
/// certifies it as a Γ₃-contraction: the output is quarantined as a
/// candidate and must face the battery first.
pub fn gen_candidate_fibered<T: Real>(
    c: &PointPair<T>,
    t_cnu: &ComplexMatrix<T>,
    seed: u64,
) -> Result<(OperatorTriple<T>, GenSpec<T>)> {
    if !in_gamma2(c, re(1e-9)).inside {
        return Err(Gamma3Error::Input(
            "fibering base point is not in the symmetrized bidisc".into(),
        ));
    }
    let norm = crate::numerics::op_norm(t_cnu)?;
    if norm > T::one() + re(1e-9) {
        return Err(Gamma3Error::Input(format!(
            "lift operator is not a contraction (norm {})",
            norm.to_report()
        )));
    }
    let n = t_cnu.nrows();
    let eye: ComplexMatrix<T> = DMatrix::identity(n, n);
    let s1 = &eye * c.c1 + t_cnu * c.c2.conj();
    let s2 = &eye * c.c2 + t_cnu * c.c1.conj();
    let triple = OperatorTriple::new(s1, s2, t_cnu.clone(), &Tolerances::default())?;
    Ok((
        triple,
        GenSpec {
            kind: GenKind::CandidateFibered,
            dims: vec![n],
            seed,
            ground_truth_points: Vec::new(),
            true_dim_h1: None,
            candidate: true,
        },
    ))
}
