//! JSON command-line front end for the symmetrized-tridisc toolkit.
//!
//! Exit codes: 0 = inside/pass/consistent, 1 = outside/fail/violation,
//! 2 = input or usage error. Stdout is valid JSON on every 0/1 path.

use std::collections::BTreeMap;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use serde_json::json;

use gamma3_core::certify::{
    self, BatteryConfig, CertificationReport, UnitaryRoute, Verdict,
};
use gamma3_core::decomp;
use gamma3_core::gen;
use gamma3_core::numerics::Tolerances;
use gamma3_core::opcore::{self, OperatorTriple, Poly3};
use gamma3_core::points::{
    in_gamma3_fibered, in_gamma3_roots, MembershipVerdict, PointTriple,
};
use gamma3_core::{ComplexMatrix64, Cx64};

#[derive(Parser)]
#[command(name = "gamma3", about = "Symmetrized tridisc membership, certification, and decomposition", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum PointMethod {
    Roots,
    Fibered,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Battery {
    Full,
    Pencil,
    Vn,
    Unitary,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Unitary,
    Normal,
    Mixed,
}

#[derive(Subcommand)]
enum Command {
    /// Test a scalar point (s1, s2, p) for membership in the closed
    /// symmetrized tridisc
    Point {
        s1_re: f64,
        s1_im: f64,
        s2_re: f64,
        s2_im: f64,
        p_re: f64,
        p_im: f64,
        #[arg(long, value_enum, default_value = "both")]
        method: PointMethod,
    },
    /// Run a certification battery on an operator triple read from a
    /// JSON file
    Certify {
        /// Path to a triple JSON file
        input: String,
        #[arg(long, value_enum, default_value = "full")]
        battery: Battery,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Split a triple into its unitary and completely-non-unitary parts
    /// and report the block identities
    Decompose {
        input: String,
        /// Also write the split blocks to this file
        #[arg(long)]
        out: Option<String>,
    },
    /// Generate a seeded instance and print it (with its ground truth)
    Generate {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Dimension, or `k,m` (unitary,cnu) for --kind mixed
        #[arg(long)]
        dims: String,
        #[arg(long)]
        seed: u64,
        /// Spectral radius bound for --kind normal
        #[arg(long, default_value_t = 0.9)]
        radius: f64,
        #[arg(long)]
        out: Option<String>,
    },
    /// Joint eigenvalue triples of a commuting triple
    Spectrum { input: String },
    /// Minimum pencil eigenvalues over the scaled-rotation grid
    Pencil {
        input: String,
        #[arg(long, default_value_t = opcore::DEFAULT_RADIAL_STEPS)]
        radial: usize,
        #[arg(long, default_value_t = opcore::DEFAULT_ANGULAR_STEPS)]
        angular: usize,
    },
    /// Grid estimate of the sup norm of a polynomial over the tridisc
    /// symmetrization
    Supnorm {
        /// Polynomial as JSON: [{"e":[i,j,k],"c":[re,im]}, ...]
        #[arg(long)]
        poly: String,
        #[arg(long, default_value_t = 64)]
        grid: usize,
    },
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    rows: usize,
    cols: usize,
    /// Row-major [re, im] pairs.
    data: Vec<[f64; 2]>,
}

#[derive(Serialize, Deserialize)]
struct TripleFile {
    #[serde(rename = "S1")]
    s1: MatrixFile,
    #[serde(rename = "S2")]
    s2: MatrixFile,
    #[serde(rename = "P")]
    p: MatrixFile,
}

/// Wrapper emitted by `generate`; `certify`/`decompose` accept either
/// this or a bare TripleFile.
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    kind: String,
    dims: Vec<usize>,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    true_dim_h1: Option<usize>,
    ground_truth_points: Vec<[[f64; 2]; 3]>,
    triple: TripleFile,
}

impl MatrixFile {
    fn to_matrix(&self) -> Result<ComplexMatrix64> {
        if self.data.len() != self.rows * self.cols {
            bail!(
                "matrix data length {} does not match {}x{}",
                self.data.len(),
                self.rows,
                self.cols
            );
        }
        if self.data.iter().flatten().any(|x| !x.is_finite()) {
            bail!("matrix contains non-finite entries");
        }
        Ok(ComplexMatrix64::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i * self.cols + j];
            Complex::new(re, im)
        }))
    }

    fn from_matrix(m: &ComplexMatrix64) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                data.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        Self { rows: m.nrows(), cols: m.ncols(), data }
    }
}

fn tolerances() -> Result<Tolerances<f64>> {
    let mut tol = Tolerances::default();
    if let Ok(raw) = std::env::var("GAMMA3_TOL") {
        let scale: f64 = raw
            .parse()
            .with_context(|| format!("GAMMA3_TOL must be a number, got {raw:?}"))?;
        if !(scale.is_finite() && scale > 0.0) {
            bail!("GAMMA3_TOL must be finite and positive, got {raw:?}");
        }
        tol = tol.scaled(scale);
    }
    Ok(tol)
}

fn load_triple(path: &str) -> Result<OperatorTriple<f64>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
    let file: TripleFile = match serde_json::from_str(&text) {
        Ok(t) => t,
        Err(_) => {
            serde_json::from_str::<InstanceFile>(&text)
                .with_context(|| format!("{path} is neither a triple file nor an instance file"))?
                .triple
        }
    };
    let triple = OperatorTriple::new(
        file.s1.to_matrix()?,
        file.s2.to_matrix()?,
        file.p.to_matrix()?,
        &tolerances()?,
    )?;
    Ok(triple)
}

fn cx(v: Cx64) -> serde_json::Value {
    json!([v.re, v.im])
}

fn verdict_json(v: &MembershipVerdict<f64>) -> serde_json::Value {
    json!({
        "inside": v.inside,
        "on_distinguished_boundary": v.on_distinguished_boundary,
        "max_root_modulus": v.max_root_modulus,
        "roots": v.witnesses.iter().map(|z| cx(*z)).collect::<Vec<_>>(),
    })
}

fn point_json(p: &PointTriple<f64>) -> [[f64; 2]; 3] {
    [[p.s1.re, p.s1.im], [p.s2.re, p.s2.im], [p.p.re, p.p.im]]
}

fn parse_poly(raw: &str) -> Result<Poly3<f64>> {
    #[derive(Deserialize)]
    struct Term {
        e: [u32; 3],
        c: [f64; 2],
    }
    let terms: Vec<Term> = serde_json::from_str(raw).context("parsing polynomial JSON")?;
    Ok(Poly3::from_terms(terms.into_iter().map(|t| {
        ((t.e[0], t.e[1], t.e[2]), Complex::new(t.c[0], t.c[1]))
    })))
}

/// Both characterizations of a Γ₃-unitary, merged into one report.
fn unitary_report(t: &OperatorTriple<f64>, tol: &Tolerances<f64>) -> Result<CertificationReport> {
    let spectral = certify::is_gamma3_unitary(t, UnitaryRoute::Spectral, tol)?;
    let algebraic = certify::is_gamma3_unitary(t, UnitaryRoute::Algebraic, tol)?;
    let mut checks = Vec::new();
    let mut witnesses = BTreeMap::new();
    for (prefix, report) in [("spectral", &spectral), ("algebraic", &algebraic)] {
        for c in &report.checks {
            let mut c = c.clone();
            c.name = format!("{prefix}_{}", c.name);
            checks.push(c);
        }
        for (k, v) in &report.witnesses {
            witnesses.insert(format!("{prefix}_{k}"), v.clone());
        }
    }
    let verdict = if spectral.verdict == Verdict::Pass && algebraic.verdict == Verdict::Pass {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(CertificationReport {
        verdict,
        checks,
        witnesses,
        seed: 0,
        note: spectral.note,
    })
}

fn run() -> Result<u8> {
    let cli = Cli::parse();
    match cli.command {
        Command::Point { s1_re, s1_im, s2_re, s2_im, p_re, p_im, method } => {
            let t = PointTriple {
                s1: Complex::new(s1_re, s1_im),
                s2: Complex::new(s2_re, s2_im),
                p: Complex::new(p_re, p_im),
            };
            if [t.s1, t.s2, t.p].iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                bail!("point coordinates must be finite");
            }
            let tol = tolerances()?.rank_tol;
            let mut out = serde_json::Map::new();
            let mut inside = true;
            if matches!(method, PointMethod::Roots | PointMethod::Both) {
                let v = in_gamma3_roots(&t, tol);
                inside = v.inside;
                out.insert("roots".into(), verdict_json(&v));
            }
            if matches!(method, PointMethod::Fibered | PointMethod::Both) {
                let (v, witness) = in_gamma3_fibered(&t, tol);
                if matches!(method, PointMethod::Fibered) {
                    inside = v.inside;
                }
                let mut fj = verdict_json(&v);
                if let Some(w) = witness {
                    fj["witness"] = json!({ "c1": cx(w.c1), "c2": cx(w.c2) });
                }
                out.insert("fibered".into(), fj);
            }
            out.insert("inside".into(), json!(inside));
            println!("{}", serde_json::to_string_pretty(&serde_json::Value::Object(out))?);
            Ok(if inside { 0 } else { 1 })
        }

        Command::Certify { input, battery, seed } => {
            let t = load_triple(&input)?;
            let tol = tolerances()?;
            let mut config = BatteryConfig::new(seed);
            config.tol = tol;
            let report = match battery {
                Battery::Full => certify::battery_gamma3_contraction(&t, &config),
                Battery::Pencil => {
                    config.run_von_neumann = false;
                    config.run_spectrum = false;
                    certify::battery_gamma3_contraction(&t, &config)
                }
                Battery::Vn => {
                    config.run_pencil = false;
                    config.run_spectrum = false;
                    certify::battery_gamma3_contraction(&t, &config)
                }
                Battery::Unitary => unitary_report(&t, &tol)?,
            };
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(if report.verdict == Verdict::Fail { 1 } else { 0 })
        }

        Command::Decompose { input, out } => {
            let t = load_triple(&input)?;
            let tol = tolerances()?;
            let (split, identities) = decomp::split_triple(&t, &tol)?;
            let blocks: BTreeMap<&str, MatrixFile> = [
                ("s1_11", &split.s1_11),
                ("s1_22", &split.s1_22),
                ("s2_11", &split.s2_11),
                ("s2_22", &split.s2_22),
                ("p1", &split.p1),
                ("p2", &split.p2),
            ]
            .into_iter()
            .map(|(k, m)| (k, MatrixFile::from_matrix(m)))
            .collect();
            let residuals: BTreeMap<&String, f64> =
                identities.residuals.iter().map(|(k, v)| (k, *v)).collect();
            let payload = json!({
                "dim_h1": split.h1.dim(),
                "dim_h2": split.h2.dim(),
                "off_diag_residual": split.off_diag_residual,
                "theorem_violation": split.theorem_violation,
                "blocks": serde_json::to_value(&blocks)?,
                "identity_residuals": serde_json::to_value(&residuals)?,
                "max_identity_residual": identities.max_residual(),
            });
            let text = serde_json::to_string_pretty(&payload)?;
            if let Some(path) = out {
                std::fs::write(&path, &text).with_context(|| format!("writing {path}"))?;
            }
            println!("{text}");
            Ok(if split.theorem_violation { 1 } else { 0 })
        }

        Command::Generate { kind, dims, seed, radius, out } => {
            let parts: Vec<usize> = dims
                .split(',')
                .map(|d| d.trim().parse().with_context(|| format!("bad dimension {d:?}")))
                .collect::<Result<_>>()?;
            let (triple, spec) = match (kind, parts.as_slice()) {
                (Kind::Unitary, [n]) => gen::gen_gamma3_unitary::<f64>(*n, seed)?,
                (Kind::Normal, [n]) => gen::gen_normal_gamma3::<f64>(*n, seed, radius)?,
                (Kind::Mixed, [k, m]) => gen::gen_mixed::<f64>(*k, *m, seed)?,
                (Kind::Mixed, _) => bail!("--kind mixed needs --dims k,m"),
                (_, _) => bail!("--kind unitary/normal needs a single --dims value"),
            };
            let instance = InstanceFile {
                kind: format!("{:?}", spec.kind).to_lowercase(),
                dims: spec.dims,
                seed: spec.seed,
                true_dim_h1: spec.true_dim_h1,
                ground_truth_points: spec.ground_truth_points.iter().map(point_json).collect(),
                triple: TripleFile {
                    s1: MatrixFile::from_matrix(triple.s1()),
                    s2: MatrixFile::from_matrix(triple.s2()),
                    p: MatrixFile::from_matrix(triple.p()),
                },
            };
            let text = serde_json::to_string_pretty(&instance)?;
            if let Some(path) = out {
                std::fs::write(&path, &text).with_context(|| format!("writing {path}"))?;
            }
            println!("{text}");
            Ok(0)
        }

        Command::Spectrum { input } => {
            let t = load_triple(&input)?;
            let points = certify::joint_spectrum(&t, &tolerances()?)?;
            let payload = json!({
                "points": points.iter().map(point_json).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&payload)?);
            Ok(0)
        }

        Command::Pencil { input, radial, angular } => {
            let t = load_triple(&input)?;
            let tol = tolerances()?;
            let scan = opcore::pencil_scan(&t, radial, angular, &tol)?;
            let pass = scan.global_min >= -tol.psd_tol;
            let payload = json!({
                "grid": scan.grid.iter().map(|z| cx(*z)).collect::<Vec<_>>(),
                "min_eigs_phi1": scan.min_eigs_phi1,
                "min_eigs_phi2": scan.min_eigs_phi2,
                "global_min": scan.global_min,
                "pass": pass,
            });
            println!("{}", serde_json::to_string_pretty(&payload)?);
            Ok(if pass { 0 } else { 1 })
        }

        Command::Supnorm { poly, grid } => {
            let f = parse_poly(&poly)?;
            let sup = opcore::sup_norm_gamma3(&f, grid)?;
            println!("{}", serde_json::to_string_pretty(&json!({ "sup_norm": sup, "grid": grid }))?);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
