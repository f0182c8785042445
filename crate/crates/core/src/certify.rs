//! Certification batteries: Γ₃-contraction necessary conditions,
//! Γ₃-unitary checks along two equivalent routes, cnu and pure
//! predicates, and joint spectrum location.
//!
//! A passing battery verdict means "no necessary condition violated";
//! it is never a sufficiency certificate, and every report says so.

use std::collections::BTreeMap;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decomp::unitary_part;
use crate::error::{Gamma3Error, Result};
use crate::numerics::{self, fmax, Tolerances};
use crate::opcore::{
    self, eval_poly, pencil_scan, scale_rotate_triple, sup_norm_gamma3, OperatorTriple, Poly3,
};
use crate::points::{in_gamma2, in_gamma3_roots, PointPair, PointTriple};
use crate::{re, ComplexMatrix, Cx, Real};

/// Battery outcome. `Indeterminate` is only produced when configuration
/// skipped a check and nothing that did run failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

/// One named measurement with its threshold and outcome.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Structured verdicts and witnesses from a test battery.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificationReport {
    pub verdict: Verdict,
    pub checks: Vec<Check>,
    pub witnesses: BTreeMap<String, String>,
    pub seed: u64,
    pub note: String,
}

const NECESSARY_ONLY: &str =
    "necessary conditions only: a pass is not a certificate of Gamma_3-spectral-set membership";

impl CertificationReport {
    fn finish(checks: Vec<Check>, witnesses: BTreeMap<String, String>, seed: u64, complete: bool) -> Self {
        let verdict = if checks.iter().any(|c| !c.pass) {
            Verdict::Fail
        } else if complete {
            Verdict::Pass
        } else {
            Verdict::Indeterminate
        };
        Self {
            verdict,
            checks,
            witnesses,
            seed,
            note: NECESSARY_ONLY.to_string(),
        }
    }
}

/// Battery configuration; the defaults match the documented desk-scale
/// grids (8 radial / 24 angular pencil samples, 20 polynomials of total
/// degree 3 against a 64-per-dimension torus grid, 1% sup-norm slack).
#[derive(Debug, Clone)]
pub struct BatteryConfig<T: Real> {
    pub tol: Tolerances<T>,
    /// Tolerance on root moduli for spectrum-membership checks.
    pub membership_tol: T,
    pub radial_steps: usize,
    pub angular_steps: usize,
    pub vn_polys: usize,
    pub vn_degree: u32,
    /// Multiplicative slack compensating the grid's underestimate of the
    /// true sup.
    pub vn_slack: f64,
    pub sup_grid: usize,
    pub seed: u64,
    pub run_spectrum: bool,
    pub run_pencil: bool,
    pub run_von_neumann: bool,
}

impl<T: Real> BatteryConfig<T> {
    pub fn new(seed: u64) -> Self {
        Self {
            tol: Tolerances::default(),
            membership_tol: fmax(re(1e-8), <T as Float>::epsilon() * re(100.0)),
            radial_steps: opcore::DEFAULT_RADIAL_STEPS,
            angular_steps: opcore::DEFAULT_ANGULAR_STEPS,
            vn_polys: 20,
            vn_degree: 3,
            vn_slack: 0.01,
            sup_grid: 64,
            seed,
            run_spectrum: true,
            run_pencil: true,
            run_von_neumann: true,
        }
    }

    /// Smaller grids for test suites; same checks, same thresholds.
    pub fn fast(seed: u64) -> Self {
        Self {
            radial_steps: 4,
            angular_steps: 8,
            vn_polys: 6,
            sup_grid: 16,
            ..Self::new(seed)
        }
    }

    pub fn only_pencil(seed: u64) -> Self {
        Self {
            run_spectrum: false,
            run_von_neumann: false,
            ..Self::new(seed)
        }
    }

    pub fn only_von_neumann(seed: u64) -> Self {
        Self {
            run_spectrum: false,
            run_pencil: false,
            ..Self::new(seed)
        }
    }
}

/// Joint eigenvalue triples (diagonal tuples of a simultaneous
/// triangularization); for commuting matrices this is the Taylor joint
/// spectrum.
pub fn joint_spectrum<T: Real>(
    t: &OperatorTriple<T>,
    tol: &Tolerances<T>,
) -> Result<Vec<PointTriple<T>>> {
    let (_, tris) =
        numerics::simultaneous_triangularize(&[t.s1().clone(), t.s2().clone(), t.p().clone()], tol)?;
    Ok((0..t.dim())
        .map(|i| PointTriple {
            s1: tris[0][(i, i)],
            s2: tris[1][(i, i)],
            p: tris[2][(i, i)],
        })
        .collect())
}

fn fmt_cx<T: Real>(z: Cx<T>) -> String {
    format!("[{}, {}]", z.re.to_report(), z.im.to_report())
}

fn fmt_point<T: Real>(p: &PointTriple<T>) -> String {
    format!("({}, {}, {})", fmt_cx(p.s1), fmt_cx(p.s2), fmt_cx(p.p))
}

/// Necessary-condition battery for being a Γ₃-contraction: commutation,
/// norm bounds, joint-spectrum containment, pencil positivity over the
/// scaled-rotated disc grid, and sampled von Neumann inequalities.
pub fn battery_gamma3_contraction<T: Real>(
    t: &OperatorTriple<T>,
    config: &BatteryConfig<T>,
) -> CertificationReport {
    let mut checks = Vec::new();
    let mut witnesses = BTreeMap::new();
    let tol = &config.tol;

    // (a) commutation
    let worst_defect = t.commutation_defects().iter().copied().fold(T::zero(), fmax);
    checks.push(Check {
        name: "commutation_defect".into(),
        value: worst_defect.to_report(),
        threshold: tol.eq_tol.to_report(),
        pass: worst_defect <= tol.eq_tol,
    });

    // (b) norm bounds
    let norm_bounds: [(&str, &ComplexMatrix<T>, f64); 3] = [
        ("norm_s1", t.s1(), 3.0),
        ("norm_s2", t.s2(), 3.0),
        ("norm_p", t.p(), 1.0),
    ];
    for (name, m, bound) in norm_bounds {
        let value = numerics::op_norm(m).map(|v| v.to_report()).unwrap_or(f64::INFINITY);
        let threshold = bound + tol.eq_tol.to_report();
        checks.push(Check {
            name: name.into(),
            value,
            threshold,
            pass: value <= threshold,
        });
    }

    // (c) joint spectrum inside Gamma_3
    if config.run_spectrum {
        let threshold = (T::one() + config.membership_tol).to_report();
        match joint_spectrum(t, tol) {
            Ok(points) => {
                let mut worst = 0.0f64;
                for pt in &points {
                    let v = in_gamma3_roots(pt, config.membership_tol);
                    let m = v.max_root_modulus.to_report();
                    if m > worst {
                        worst = m;
                        if !v.inside {
                            witnesses.insert("joint_eigenvalue".into(), fmt_point(pt));
                        }
                    }
                }
                checks.push(Check {
                    name: "joint_spectrum_max_root_modulus".into(),
                    value: worst,
                    threshold,
                    pass: worst <= threshold,
                });
            }
            Err(e) => {
                witnesses.insert("joint_spectrum_error".into(), e.to_string());
                checks.push(Check {
                    name: "joint_spectrum_max_root_modulus".into(),
                    value: f64::INFINITY,
                    threshold,
                    pass: false,
                });
            }
        }
    }

    // (d) pencil positivity over the scaled-rotated grid
    if config.run_pencil {
        let threshold = -config.tol.psd_tol.to_report();
        match pencil_scan(t, config.radial_steps, config.angular_steps, tol) {
            Ok(scan) => {
                if scan.global_min.to_report() < threshold {
                    let idx = scan
                        .min_eigs_phi1
                        .iter()
                        .chain(&scan.min_eigs_phi2)
                        .position(|e| *e == scan.global_min)
                        .map(|i| i % scan.grid.len())
                        .unwrap_or(0);
                    witnesses.insert("pencil_alpha".into(), fmt_cx(scan.grid[idx]));
                }
                checks.push(Check {
                    name: "pencil_global_min".into(),
                    value: scan.global_min.to_report(),
                    threshold,
                    pass: scan.global_min.to_report() >= threshold,
                });
            }
            Err(e) => {
                witnesses.insert("pencil_error".into(), e.to_string());
                checks.push(Check {
                    name: "pencil_global_min".into(),
                    value: f64::NEG_INFINITY,
                    threshold,
                    pass: false,
                });
            }
        }
    }

    // (e) sampled von Neumann inequalities
    if config.run_von_neumann {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut worst_excess = f64::NEG_INFINITY;
        let mut ok = true;
        for _ in 0..config.vn_polys {
            let f = random_poly::<T>(config.vn_degree, &mut rng);
            let lhs = numerics::op_norm(&eval_poly(&f, t))
                .map(|v| v.to_report())
                .unwrap_or(f64::INFINITY);
            let sup = match sup_norm_gamma3(&f, config.sup_grid) {
                Ok(s) => s.to_report(),
                Err(e) => {
                    witnesses.insert("von_neumann_error".into(), e.to_string());
                    ok = false;
                    break;
                }
            };
            let rhs = sup * (1.0 + config.vn_slack) + tol.psd_tol.to_report();
            let excess = lhs - rhs;
            if excess > worst_excess {
                worst_excess = excess;
                if excess > 0.0 {
                    witnesses.insert("von_neumann_poly".into(), fmt_poly(&f));
                }
            }
        }
        checks.push(Check {
            name: "von_neumann_excess".into(),
            value: if ok { worst_excess } else { f64::INFINITY },
            threshold: 0.0,
            pass: ok && worst_excess <= 0.0,
        });
    }

    let complete = config.run_spectrum && config.run_pencil && config.run_von_neumann;
    CertificationReport::finish(checks, witnesses, config.seed, complete)
}

/// Random polynomial of the given total degree with coefficients uniform
/// on the closed complex unit disc.
pub fn random_poly<T: Real>(total_degree: u32, rng: &mut ChaCha8Rng) -> Poly3<T> {
    let mut terms = Vec::new();
    for i in 0..=total_degree {
        for j in 0..=(total_degree - i) {
            for k in 0..=(total_degree - i - j) {
                let r = rng.gen::<f64>().sqrt();
                let theta = std::f64::consts::TAU * rng.gen::<f64>();
                terms.push((
                    (i, j, k),
                    Cx::new(re::<T>(r * theta.cos()), re::<T>(r * theta.sin())),
                ));
            }
        }
    }
    Poly3::from_terms(terms)
}

fn fmt_poly<T: Real>(f: &Poly3<T>) -> String {
    let terms: Vec<String> = f
        .terms()
        .map(|((i, j, k), c)| {
            format!(
                "{{\"e\":[{i},{j},{k}],\"c\":[{},{}]}}",
                c.re.to_report(),
                c.im.to_report()
            )
        })
        .collect();
    format!("[{}]", terms.join(","))
}

/// Which characterization of a Γ₃-unitary to test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitaryRoute {
    /// Normal operators with joint spectrum on bΓ₃.
    Spectral,
    /// P unitary, S₁ = S₂*P, and the Γ₂ pair ((2/3)S₁, (1/3)S₂)
    /// spectrally inside Γ₂.
    Algebraic,
}

/// Γ₃-unitary test along one of the two equivalent routes; the routes
/// agree on every input (checked as a cross-route property).
pub fn is_gamma3_unitary<T: Real>(
    t: &OperatorTriple<T>,
    route: UnitaryRoute,
    tol: &Tolerances<T>,
) -> Result<CertificationReport> {
    let mut checks = Vec::new();
    let mut witnesses = BTreeMap::new();
    let membership_tol: T = fmax(re(1e-8), <T as Float>::epsilon() * re(100.0));

    match route {
        UnitaryRoute::Spectral => {
            for (name, m) in [("normal_s1", t.s1()), ("normal_s2", t.s2()), ("normal_p", t.p())] {
                let defect = numerics::op_norm(&(m.adjoint() * m - m * m.adjoint()))?;
                checks.push(Check {
                    name: name.into(),
                    value: defect.to_report(),
                    threshold: tol.eq_tol.to_report(),
                    pass: defect <= tol.eq_tol,
                });
            }
            let points = joint_spectrum(t, tol)?;
            let mut worst = 0.0f64;
            for pt in &points {
                let v = in_gamma3_roots(pt, membership_tol);
                let deviation: f64 = v
                    .witnesses
                    .iter()
                    .map(|z| Float::abs(z.norm() - T::one()).to_report())
                    .fold(0.0, f64::max);
                if deviation > worst {
                    worst = deviation;
                    if !v.on_distinguished_boundary {
                        witnesses.insert("joint_eigenvalue".into(), fmt_point(pt));
                    }
                }
            }
            checks.push(Check {
                name: "spectrum_on_b_gamma3".into(),
                value: worst,
                threshold: membership_tol.to_report(),
                pass: worst <= membership_tol.to_report(),
            });
        }
        UnitaryRoute::Algebraic => {
            let eye = ComplexMatrix::<T>::identity(t.dim(), t.dim());
            let u_defect = fmax(
                numerics::op_norm(&(t.p().adjoint() * t.p() - &eye))?,
                numerics::op_norm(&(t.p() * t.p().adjoint() - &eye))?,
            );
            checks.push(Check {
                name: "p_unitary".into(),
                value: u_defect.to_report(),
                threshold: tol.eq_tol.to_report(),
                pass: u_defect <= tol.eq_tol,
            });

            let rel = numerics::op_norm(&(t.s1() - t.s2().adjoint() * t.p()))?
                / (T::one() + numerics::op_norm(t.s2())?);
            checks.push(Check {
                name: "s1_eq_s2_adj_p".into(),
                value: rel.to_report(),
                threshold: tol.eq_tol.to_report(),
                pass: rel <= tol.eq_tol,
            });

            // Gamma_2-contraction condition for ((2/3)S1, (1/3)S2),
            // evaluated spectrally (equivalent under the normality this
            // route certifies alongside)
            let points = joint_spectrum(t, tol)?;
            let two_thirds = re::<T>(2.0 / 3.0);
            let third = re::<T>(1.0 / 3.0);
            let mut worst = 0.0f64;
            for pt in &points {
                let pair = PointPair {
                    c1: pt.s1 * Cx::new(two_thirds, T::zero()),
                    c2: pt.s2 * Cx::new(third, T::zero()),
                };
                let v = in_gamma2(&pair, membership_tol);
                let m = v.max_root_modulus.to_report();
                if m > worst {
                    worst = m;
                    if !v.inside {
                        witnesses.insert("gamma2_pair".into(), fmt_point(pt));
                    }
                }
            }
            let threshold = 1.0 + membership_tol.to_report();
            checks.push(Check {
                name: "gamma2_pair_max_root_modulus".into(),
                value: worst,
                threshold,
                pass: worst <= threshold,
            });
        }
    }

    Ok(CertificationReport::finish(checks, witnesses, 0, true))
}

/// True iff the unitary part of P is trivial (the triple is a
/// completely non-unitary contraction in P).
pub fn is_cnu<T: Real>(t: &OperatorTriple<T>, tol: &Tolerances<T>) -> Result<bool> {
    Ok(unitary_part(t.p(), tol)?.dim() == 0)
}

/// Finite-dimensional pure-contraction test: spectral radius strictly
/// below 1 (equivalently, powers of P* tend to zero).
pub fn is_pure_contraction<T: Real>(p: &ComplexMatrix<T>, tol: &Tolerances<T>) -> Result<bool> {
    let norm = numerics::op_norm(p)?;
    if norm > T::one() + tol.eq_tol {
        return Err(Gamma3Error::Input(format!(
            "P is not a contraction (||P|| = {})",
            norm.to_report()
        )));
    }
    if p.nrows() == 0 {
        return Ok(true);
    }
    let schur = p
        .clone()
        .try_schur(Float::epsilon(), 50_000)
        .ok_or_else(|| Gamma3Error::Numerical {
            message: "Schur iteration did not converge".into(),
            residual: f64::NAN,
        })?;
    let (_, tri) = schur.unpack();
    let radius = (0..p.nrows())
        .map(|i| tri[(i, i)].norm())
        .fold(T::zero(), fmax);
    Ok(radius <= T::one() - tol.rank_tol)
}

/// Run the contraction battery along a rotation orbit and report
/// verdict agreement.
pub fn rotate_triple_battery<T: Real>(
    t: &OperatorTriple<T>,
    omegas: &[Cx<T>],
    config: &BatteryConfig<T>,
) -> CertificationReport {
    let mut checks = Vec::new();
    let mut witnesses = BTreeMap::new();
    let mut verdicts = Vec::new();
    for (k, omega) in omegas.iter().enumerate() {
        let outcome = match scale_rotate_triple(t, *omega) {
            Ok(rotated) => battery_gamma3_contraction(&rotated, config).verdict,
            Err(e) => {
                witnesses.insert(format!("omega_{k}_error"), e.to_string());
                Verdict::Fail
            }
        };
        verdicts.push(outcome);
        checks.push(Check {
            name: format!("battery_omega_{k}"),
            value: if outcome == Verdict::Pass { 1.0 } else { 0.0 },
            threshold: 0.5,
            pass: outcome == Verdict::Pass,
        });
        if outcome != Verdict::Pass {
            witnesses.insert(format!("omega_{k}"), fmt_cx(*omega));
        }
    }
    let agree = verdicts.windows(2).all(|w| w[0] == w[1]);
    checks.push(Check {
        name: "orbit_agreement".into(),
        value: if agree { 1.0 } else { 0.0 },
        threshold: 0.5,
        pass: agree,
    });
    CertificationReport::finish(checks, witnesses, config.seed, true)
}
