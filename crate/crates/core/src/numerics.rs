//! Dense complex-matrix primitives with explicit tolerance semantics.
//!
//! Everything downstream (pencils, batteries, the canonical decomposition)
//! goes through these operations, so the tolerance conventions live here:
//! absolute tolerances are scaled by `(1 + operand norm)` at call sites.

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Gamma3Error, Result};
use crate::{re, ComplexMatrix, Real};

/// Singular-value cutoff, eigenvalue floor and operator-equality bound
/// used throughout.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances<T> {
    /// Singular values at or below `rank_tol * max(1, ||A||)` count as zero.
    pub rank_tol: T,
    /// Eigenvalues above `-psd_tol` count as non-negative.
    pub psd_tol: T,
    /// Operators within `eq_tol` (scaled by operand size) count as equal.
    pub eq_tol: T,
}

impl<T: Real> Default for Tolerances<T> {
    fn default() -> Self {
        // Floored at a multiple of the scalar's epsilon so the f32
        // instantiation gets usable defaults; for f64 the literals win.
        let eps: T = Float::epsilon();
        Self {
            rank_tol: fmax(re(1e-9), eps * re(100.0)),
            psd_tol: fmax(re(1e-8), eps * re(1000.0)),
            eq_tol: fmax(re(1e-8), eps * re(1000.0)),
        }
    }
}

impl<T: Real> Tolerances<T> {
    /// Uniformly rescale all three tolerances (CLI override hook).
    pub fn scaled(self, factor: T) -> Self {
        Self {
            rank_tol: self.rank_tol * factor,
            psd_tol: self.psd_tol * factor,
            eq_tol: self.eq_tol * factor,
        }
    }
}

/// Orthonormal column frame representing a subspace of ℂⁿ.
#[derive(Debug, Clone)]
pub struct SubspaceBasis<T: Real> {
    ambient_dim: usize,
    frame: ComplexMatrix<T>,
}

impl<T: Real> SubspaceBasis<T> {
    /// Wrap an `ambient_dim x k` frame, checking orthonormality of the
    /// columns within 1e-10.
    pub fn from_frame(frame: ComplexMatrix<T>) -> Result<Self> {
        ensure_finite(&frame)?;
        let k = frame.ncols();
        let gram = frame.adjoint() * &frame;
        let defect = (gram - DMatrix::identity(k, k)).norm();
        if defect > re(1e-10) {
            return Err(Gamma3Error::Input(format!(
                "frame columns not orthonormal (defect {:e})",
                defect.to_report()
            )));
        }
        Ok(Self::from_frame_unchecked(frame))
    }

    pub(crate) fn from_frame_unchecked(frame: ComplexMatrix<T>) -> Self {
        Self {
            ambient_dim: frame.nrows(),
            frame,
        }
    }

    /// The zero subspace of ℂⁿ.
    pub fn empty(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            frame: DMatrix::zeros(ambient_dim, 0),
        }
    }

    /// All of ℂⁿ, with the standard basis as frame.
    pub fn full(ambient_dim: usize) -> Self {
        Self {
            ambient_dim,
            frame: DMatrix::identity(ambient_dim, ambient_dim),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.frame.ncols()
    }

    pub fn frame(&self) -> &ComplexMatrix<T> {
        &self.frame
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> ComplexMatrix<T> {
        &self.frame * self.frame.adjoint()
    }

    /// Orthonormal basis of the orthogonal complement.
    pub fn complement(&self, tol: &Tolerances<T>) -> Self {
        // ker(F F^H) is exactly the orthocomplement of the column span.
        let kernel = kernel_columns(&self.projector(), tol.rank_tol);
        Self::from_frame_unchecked(kernel)
    }
}

fn ensure_finite<T: Real>(a: &ComplexMatrix<T>) -> Result<()> {
    if a.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(())
    } else {
        Err(Gamma3Error::Input(
            "matrix has non-finite entries".into(),
        ))
    }
}

fn ensure_square<T: Real>(a: &ComplexMatrix<T>) -> Result<()> {
    if a.nrows() == a.ncols() {
        Ok(())
    } else {
        Err(Gamma3Error::Input(format!(
            "expected square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )))
    }
}

/// Largest singular value.
pub fn op_norm<T: Real>(a: &ComplexMatrix<T>) -> Result<T> {
    ensure_finite(a)?;
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(T::zero());
    }
    let sv = a.clone().singular_values();
    Ok(sv.iter().copied().fold(T::zero(), fmax))
}

/// Smallest eigenvalue of the Hermitian part `(A + A*)/2`.
///
/// Inputs are symmetrized, never trusted; grossly non-Hermitian input
/// (defect above `10 * eq_tol * (1 + ||A||)`) is a contract violation.
pub fn min_eig_hermitian<T: Real>(a: &ComplexMatrix<T>, tol: &Tolerances<T>) -> Result<T> {
    ensure_square(a)?;
    ensure_finite(a)?;
    if a.nrows() == 0 {
        return Err(Gamma3Error::Input("empty matrix has no eigenvalues".into()));
    }
    let norm = op_norm(a)?;
    let defect = op_norm(&(a - a.adjoint()))?;
    if defect > re::<T>(10.0) * tol.eq_tol * (T::one() + norm) {
        return Err(Gamma3Error::Contract(format!(
            "matrix is grossly non-Hermitian (defect {:e})",
            defect.to_report()
        )));
    }
    let half = Complex::new(re::<T>(0.5), T::zero());
    let sym = (a + a.adjoint()) * half;
    let eig = sym
        .try_symmetric_eigen(Float::epsilon(), 10_000)
        .ok_or_else(|| Gamma3Error::Numerical {
            message: "Hermitian eigensolver did not converge".into(),
            residual: f64::NAN,
        })?;
    Ok(eig.eigenvalues.iter().copied().fold(T::infinity(), fmin))
}

/// Orthonormal basis of the numerical kernel: right singular vectors with
/// singular value at or below `rank_tol * max(1, ||A||)`.
pub fn kernel_basis<T: Real>(a: &ComplexMatrix<T>, tol: &Tolerances<T>) -> Result<SubspaceBasis<T>> {
    ensure_square(a)?;
    ensure_finite(a)?;
    Ok(SubspaceBasis::from_frame_unchecked(kernel_columns(
        a,
        tol.rank_tol,
    )))
}

/// Kernel of an arbitrary (possibly rectangular) matrix as an orthonormal
/// frame in the column space ℂ^(ncols).
pub(crate) fn kernel_columns<T: Real>(a: &ComplexMatrix<T>, rank_tol: T) -> ComplexMatrix<T> {
    let n = a.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad with zero rows so the thin SVD carries all n right singular vectors.
    let work = if a.nrows() < n {
        let mut padded = DMatrix::zeros(n, n);
        padded.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
        padded
    } else {
        a.clone()
    };
    let svd = work.svd(false, true);
    let v = svd.v_t.expect("requested V^H").adjoint();
    let smax = svd.singular_values.iter().copied().fold(T::zero(), fmax);
    let cutoff = rank_tol * fmax(T::one(), smax);
    let cols: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| **s <= cutoff)
        .map(|(i, _)| i)
        .collect();
    let mut frame = DMatrix::zeros(n, cols.len());
    for (j, &i) in cols.iter().enumerate() {
        frame.set_column(j, &v.column(i));
    }
    frame
}

/// Orthonormal basis of the intersection of two subspaces, computed as
/// the kernel of the stacked projector complements.
pub fn intersect<T: Real>(
    u: &SubspaceBasis<T>,
    v: &SubspaceBasis<T>,
    tol: &Tolerances<T>,
) -> Result<SubspaceBasis<T>> {
    if u.ambient_dim() != v.ambient_dim() {
        return Err(Gamma3Error::Input(format!(
            "ambient dimension mismatch: {} vs {}",
            u.ambient_dim(),
            v.ambient_dim()
        )));
    }
    let n = u.ambient_dim();
    if u.dim() == 0 || v.dim() == 0 {
        return Ok(SubspaceBasis::empty(n));
    }
    let eye = DMatrix::identity(n, n);
    let cu = &eye - u.projector();
    let cv = &eye - v.projector();
    let mut stacked = DMatrix::zeros(2 * n, n);
    stacked.view_mut((0, 0), (n, n)).copy_from(&cu);
    stacked.view_mut((n, 0), (n, n)).copy_from(&cv);
    Ok(SubspaceBasis::from_frame_unchecked(kernel_columns(
        &stacked,
        tol.rank_tol,
    )))
}

/// True iff `||A*A - I|| <= eq_tol` and `||AA* - I|| <= eq_tol`.
pub fn is_unitary<T: Real>(a: &ComplexMatrix<T>, tol: &Tolerances<T>) -> bool {
    if a.nrows() != a.ncols() {
        return false;
    }
    if a.nrows() == 0 {
        return true;
    }
    let eye = DMatrix::identity(a.nrows(), a.ncols());
    let left = op_norm(&(a.adjoint() * a - &eye)).unwrap_or(T::infinity());
    let right = op_norm(&(a * a.adjoint() - &eye)).unwrap_or(T::infinity());
    left <= tol.eq_tol && right <= tol.eq_tol
}

/// Relative commutator size `||AB - BA|| / (1 + ||A|| ||B||)`.
pub fn commutation_defect<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<T> {
    if a.shape() != b.shape() {
        return Err(Gamma3Error::Input(format!(
            "shape mismatch: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let num = op_norm(&(a * b - b * a))?;
    Ok(num / (T::one() + op_norm(a)? * op_norm(b)?))
}

/// Simultaneous unitary triangularization of a commuting family.
///
/// Takes the Schur form of a random generic linear combination of the
/// family and applies its unitary to every member; retries with a fresh
/// combination (up to 5 times) if the off-triangular residual exceeds
/// tolerance. The diagonal tuples of the outputs are the joint
/// eigenvalues.
pub fn simultaneous_triangularize<T: Real>(
    family: &[ComplexMatrix<T>],
    tol: &Tolerances<T>,
) -> Result<(ComplexMatrix<T>, Vec<ComplexMatrix<T>>)> {
    if family.is_empty() {
        return Err(Gamma3Error::Input("empty matrix family".into()));
    }
    let n = family[0].nrows();
    for a in family {
        ensure_square(a)?;
        ensure_finite(a)?;
        if a.nrows() != n {
            return Err(Gamma3Error::Input("family members differ in size".into()));
        }
    }
    for (i, a) in family.iter().enumerate() {
        for b in family.iter().skip(i + 1) {
            let d = commutation_defect(a, b)?;
            if d > tol.eq_tol {
                return Err(Gamma3Error::Contract(format!(
                    "family does not commute (defect {:e})",
                    d.to_report()
                )));
            }
        }
    }
    if n == 0 {
        return Ok((DMatrix::zeros(0, 0), family.to_vec()));
    }

    let norms: Vec<T> = family
        .iter()
        .map(|a| op_norm(a))
        .collect::<Result<_>>()?;
    let mut worst = T::infinity();
    for attempt in 0u64..5 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x517c_c1b7_2722_0a95 ^ attempt);
        let mut combo: ComplexMatrix<T> = DMatrix::zeros(n, n);
        for a in family {
            let c = Complex::new(
                re::<T>(rng.gen::<f64>() * 2.0 - 1.0),
                re::<T>(rng.gen::<f64>() * 2.0 - 1.0),
            );
            combo += a * c;
        }
        let Some(schur) = combo.try_schur(Float::epsilon(), 50_000) else {
            continue;
        };
        let (q, _) = schur.unpack();
        let triangulars: Vec<ComplexMatrix<T>> =
            family.iter().map(|a| q.adjoint() * a * &q).collect();
        let resid = triangulars
            .iter()
            .zip(&norms)
            .map(|(t, norm)| strict_lower_norm(t) / (T::one() + *norm))
            .fold(T::zero(), fmax);
        if resid <= tol.eq_tol {
            let cleaned = triangulars
                .into_iter()
                .map(|mut t| {
                    for r in 0..n {
                        for c in 0..r {
                            t[(r, c)] = Complex::new(T::zero(), T::zero());
                        }
                    }
                    t
                })
                .collect();
            return Ok((q, cleaned));
        }
        worst = fmin(worst, resid);
    }
    Err(Gamma3Error::Numerical {
        message: "simultaneous triangularization did not reach tolerance".into(),
        residual: worst.to_report(),
    })
}

fn strict_lower_norm<T: Real>(t: &ComplexMatrix<T>) -> T {
    let mut acc = T::zero();
    for r in 0..t.nrows() {
        for c in 0..r {
            acc = acc + t[(r, c)].norm_sqr();
        }
    }
    Float::sqrt(acc)
}

pub(crate) fn fmax<T: Real>(a: T, b: T) -> T {
    if a > b {
        a
    } else {
        b
    }
}

pub(crate) fn fmin<T: Real>(a: T, b: T) -> T {
    if a < b {
        a
    } else {
        b
    }
}
