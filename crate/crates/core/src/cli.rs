//! Batch driver behind the `spectral-time` binary.
//!
//! Every subcommand prints a JSON summary `{command, params, metrics,
//! status}` with `--json` and writes its data table as CSV with `--out`.
//! A JSON config file holding the same keys as the flags can be given with
//! `--config`. Exit codes: 0 success, 2 invalid input, 3 solver failure or a
//! verification that ran but did not hold.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Error;
use crate::field::{Field, Rational};
use crate::gbp::{gbp_zeros, jacobi_matrix_field, pasquini_f, CrescentRegion};
use crate::io::{ErrorRecord, Summary, Table};
use crate::ldpg::perturbation::{
    breve_difference, instability_demo, loglog_slope, refine_eigenvalues, second_order_perturbation,
    third_order_perturbation,
};
use crate::ldpg::{
    change_of_basis_pencil, collocation_d, exact_solution, mass_matrix_m1, mass_matrix_m2, mass_matrix_m3,
    random_orthogonal, solve_ivp, IvpStrategy, SecondOrderVariant,
};
use crate::linalg::{eigenvalues, matched_max_deviation, Matrix};
use crate::models::kdv::soliton;
use crate::models::{conditioning, solve_kdv, solve_wave, Domain, KdvProblem, NewtonSettings, WaveProblem};
use crate::timesolver::{DiagSolver, Strategy};
use crate::Complex64;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "SPECTRAL_TIME_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "spectral-time",
    version,
    about = "Dual-Petrov-Galerkin spectral methods in time"
)]
pub struct Cli {
    /// Print the JSON summary on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the data table of the command to this CSV file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Read the command and its parameters from a JSON file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Zeros of the generalised Bessel polynomial B_n^(alpha, beta).
    GbpZeros(GbpZerosArgs),
    /// Eigenvalues of a mass matrix against the polynomial-zero formula.
    EigMass(EigMassArgs),
    /// Eigenvalues of the Legendre-Gauss collocation matrix.
    CollocationEig(CollocationArgs),
    /// Check one of the exact matrix identities.
    VerifyIdentities(VerifyArgs),
    /// Eigenvalue deviation of perturbed mass matrices over N.
    PerturbationStudy(PerturbationArgs),
    /// Solve u^(m) = sigma u on [-1, 1].
    SolveIvp(IvpArgs),
    /// Solve the linear wave-type equation.
    SolveWave(WaveArgs),
    /// Solve the KdV-type equation.
    SolveKdv(KdvArgs),
    /// Conditioning and eigenvalue moduli of I + M_x.
    Conditioning(ConditioningArgs),
    /// Double-precision eigenvalues of the Legendre-test mass matrix.
    InstabilityDemo(InstabilityArgs),
    /// Diagonalisation against QZ on the wave problem.
    DiagVsQz(DiagVsQzArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GbpZeros(_) => "gbp-zeros",
            Command::EigMass(_) => "eig-mass",
            Command::CollocationEig(_) => "collocation-eig",
            Command::VerifyIdentities(_) => "verify-identities",
            Command::PerturbationStudy(_) => "perturbation-study",
            Command::SolveIvp(_) => "solve-ivp",
            Command::SolveWave(_) => "solve-wave",
            Command::SolveKdv(_) => "solve-kdv",
            Command::Conditioning(_) => "conditioning",
            Command::InstabilityDemo(_) => "instability-demo",
            Command::DiagVsQz(_) => "diag-vs-qz",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GbpZerosArgs {
    #[arg(long, default_value_t = 51)]
    pub n: usize,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    pub beta: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantArg {
    Pseudospectral,
    Spectral,
}

impl From<VariantArg> for SecondOrderVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Pseudospectral => SecondOrderVariant::Pseudospectral,
            VariantArg::Spectral => SecondOrderVariant::Spectral,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EigMassArgs {
    /// Order of the scheme (1, 2 or 3).
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = VariantArg::Pseudospectral)]
    pub variant: VariantArg,
    /// Refine the eigenvalues on the exact rational matrix instead of a
    /// dense double-precision solve.
    #[arg(long)]
    pub rational: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CollocationArgs {
    #[arg(long, default_value_t = 10)]
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
pub enum Identity {
    /// Second-order pseudospectral matrix equals the squared Jacobi matrix.
    #[value(name = "thm4.1")]
    #[serde(rename = "thm4.1")]
    SquaredJacobi,
    /// Third-order matrix differs from the cubed breve matrix in 3 entries.
    #[value(name = "prop5.1")]
    #[serde(rename = "prop5.1")]
    BreveSupport,
    /// Eigenvalues of M³ are the cubes of those of M.
    #[value(name = "cor5.1")]
    #[serde(rename = "cor5.1")]
    CubedSpectrum,
    /// The pencil spectrum does not depend on the choice of bases.
    #[value(name = "pencil-invariance")]
    #[serde(rename = "pencil-invariance")]
    PencilInvariance,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(value_enum)]
    pub identity: Identity,
    /// Sizes to check (defaults depend on the identity).
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PerturbationArgs {
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [16, 32, 64])]
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IvpStrategyArg {
    Direct,
    FirstOrderSystem,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct IvpArgs {
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    pub sigma: f64,
    /// Initial values u(-1), u'(-1), ... (one per order).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub inits: Vec<f64>,
    #[arg(long, default_value_t = 24)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = IvpStrategyArg::Direct)]
    pub strategy: IvpStrategyArg,
    #[arg(long, default_value_t = 201)]
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyArg {
    Diag,
    Qz,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Diag => Strategy::Diag,
            StrategyArg::Qz => Strategy::Qz,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WaveArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub sigma: f64,
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [-50.0, 50.0], allow_hyphen_values = true)]
    pub domain: Vec<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 160)]
    pub nx: usize,
    #[arg(long, default_value_t = 10)]
    pub nt: usize,
    #[arg(long, default_value_t = 10)]
    pub slabs: usize,
    #[arg(long, value_enum, default_value_t = StrategyArg::Qz)]
    pub strategy: StrategyArg,
    /// Points of the output grid in x.
    #[arg(long, default_value_t = 201)]
    pub grid_x: usize,
    /// Points of the output grid in t.
    #[arg(long, default_value_t = 11)]
    pub grid_t: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KdvArgs {
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub sigma: f64,
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [-50.0, 50.0], allow_hyphen_values = true)]
    pub domain: Vec<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 160)]
    pub nx: usize,
    #[arg(long, default_value_t = 40)]
    pub nt: usize,
    /// Slab count; when absent N_t is split to keep N_x·N_t ≤ 8000 per slab.
    #[arg(long)]
    pub slabs: Option<usize>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 30)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 201)]
    pub grid_x: usize,
    #[arg(long, default_value_t = 11)]
    pub grid_t: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ConditioningArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [20, 30, 40, 50, 100, 200])]
    pub nx: Vec<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InstabilityArgs {
    #[arg(long, default_value_t = 56)]
    pub n: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DiagVsQzArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20])]
    pub nt: Vec<usize>,
    #[arg(long, default_value_t = 160)]
    pub nx: usize,
    #[arg(long, default_value_t = 10)]
    pub slabs: usize,
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub sigma: f64,
    /// Slabs and modes per slab of the QZ reference run.
    #[arg(long, default_value_t = 40)]
    pub ref_slabs: usize,
    #[arg(long, default_value_t = 20)]
    pub ref_nt: usize,
}

/// Result of one command before it is written out.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub params: Value,
    pub metrics: Value,
    pub table: Option<Table>,
    /// `false` when a verification ran to completion but did not hold.
    pub holds: bool,
}

impl Outcome {
    fn new(params: impl Serialize, metrics: Value, table: Option<Table>) -> Self {
        Self {
            params: serde_json::to_value(params).unwrap_or(Value::Null),
            metrics,
            table,
            holds: true,
        }
    }
}

/// Failure of a run with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub exit_code: i32,
    pub kind: String,
    pub message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            exit_code: 2,
            kind: "validation".into(),
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let validation = matches!(
            e,
            Error::Domain { .. }
                | Error::InvalidParameter(_)
                | Error::DimensionMismatch { .. }
                | Error::Admissibility(_)
                | Error::Incompatible { .. }
        );
        let kind = format!("{e:?}");
        let kind = kind.split([' ', '(', '{']).next().unwrap_or("error").to_string();
        Self {
            exit_code: if validation { 2 } else { 3 },
            kind,
            message: e.to_string(),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn complex_json(z: &[Complex64]) -> Value {
    Value::Array(z.iter().map(|z| json!([z.re, z.im])).collect())
}

fn require(cond: bool, message: &str) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::validation(message))
    }
}

fn domain_of(v: &[f64]) -> CliResult<Domain> {
    require(v.len() == 2, "domain takes two values x_L,x_R")?;
    let d = Domain::new(v[0], v[1]);
    d.validate()?;
    Ok(d)
}

/// Reference eigenvalues of the order-`m` mass matrix from polynomial
/// zeros: `-z^{(3)}` for `m = 1`, `(-z^{(4)})²` for `m = 2` (exact for the
/// pseudospectral variant) and `(-z^{(5)})³` for `m = 3` (approximate).
pub fn mass_reference_eigenvalues(m: usize, n: usize) -> crate::Result<Vec<Complex64>> {
    let alpha = (m + 2) as f64;
    Ok(gbp_zeros(n, alpha, 1e-12)?
        .zeros
        .iter()
        .map(|z| (-z).powu(m as u32))
        .collect())
}

fn mass_rational(m: usize, n: usize, variant: SecondOrderVariant) -> crate::banded::BandedMatrix<Rational> {
    match m {
        1 => mass_matrix_m1::<Rational>(n),
        2 => mass_matrix_m2::<Rational>(n, variant),
        _ => mass_matrix_m3::<Rational>(n),
    }
}

pub fn execute(cmd: &Command) -> CliResult<Outcome> {
    match cmd {
        Command::GbpZeros(a) => gbp_zeros_cmd(a),
        Command::EigMass(a) => eig_mass_cmd(a),
        Command::CollocationEig(a) => collocation_cmd(a),
        Command::VerifyIdentities(a) => verify_cmd(a),
        Command::PerturbationStudy(a) => perturbation_cmd(a),
        Command::SolveIvp(a) => ivp_cmd(a),
        Command::SolveWave(a) => wave_cmd(a),
        Command::SolveKdv(a) => kdv_cmd(a),
        Command::Conditioning(a) => conditioning_cmd(a),
        Command::InstabilityDemo(a) => instability_cmd(a),
        Command::DiagVsQz(a) => diag_vs_qz_cmd(a),
    }
}

fn gbp_zeros_cmd(a: &GbpZerosArgs) -> CliResult<Outcome> {
    let set = gbp_zeros(a.n, a.alpha, a.tol)?;
    let residuals = if a.n >= 2 {
        pasquini_f(a.alpha, &set.zeros)?
    } else {
        vec![Complex64::new(set.residual_inf, 0.0)]
    };
    let region = CrescentRegion::new(a.n, a.alpha);
    let in_region = a.n < 2 || set.zeros.iter().all(|&z| region.contains(z));
    let scaled = set.with_beta(a.beta)?;
    let mut table = Table::new(&["index", "re", "im", "modulus", "residual"]);
    for (i, (z, r)) in scaled.zeros.iter().zip(&residuals).enumerate() {
        table.push(vec![i as f64, z.re, z.im, z.norm(), r.norm()]);
    }
    let metrics = json!({
        "residual_inf": set.residual_inf,
        "newton_steps": set.newton_steps,
        "strategy": set.strategy,
        "in_crescent": in_region,
        "min_modulus": scaled.zeros.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min),
        "max_modulus": scaled.zeros.iter().map(|z| z.norm()).fold(0.0, f64::max),
    });
    Ok(Outcome::new(a, metrics, Some(table)))
}

fn eig_mass_cmd(a: &EigMassArgs) -> CliResult<Outcome> {
    require((1..=3).contains(&a.m), "m must be 1, 2 or 3")?;
    require(a.n >= a.m, "N must be at least m")?;
    let reference = mass_reference_eigenvalues(a.m, a.n)?;
    let exact = mass_rational(a.m, a.n, a.variant.into());
    let computed = if a.rational {
        crate::ldpg::perturbation::to_c64(&refine_eigenvalues(&exact, &reference)?)
    } else {
        eigenvalues(&exact.map_f64().to_dense())?
    };
    let mut table = Table::new(&["index", "computed_re", "computed_im", "reference_re", "reference_im"]);
    for (i, (c, r)) in computed.iter().zip(&reference).enumerate() {
        table.push(vec![i as f64, c.re, c.im, r.re, r.im]);
    }
    let metrics = json!({
        "max_deviation": matched_max_deviation(&computed, &reference),
        "spectral_radius": computed.iter().map(|z| z.norm()).fold(0.0, f64::max),
    });
    Ok(Outcome::new(a, metrics, Some(table)))
}

fn collocation_cmd(a: &CollocationArgs) -> CliResult<Outcome> {
    require(a.n >= 1, "N must be at least 1")?;
    let ev = eigenvalues(&collocation_d(a.n))?;
    let recip: Vec<Complex64> = gbp_zeros(a.n, 2.0, 1e-12)?.zeros.iter().map(|z| -1.0 / z).collect();
    let scale = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut table = Table::new(&["index", "re", "im", "reference_re", "reference_im"]);
    for (i, (z, r)) in ev.iter().zip(&recip).enumerate() {
        table.push(vec![i as f64, z.re, z.im, r.re, r.im]);
    }
    let deviation = matched_max_deviation(&ev, &recip);
    let mut metrics = json!({
        "max_deviation_from_reciprocals": deviation,
        "relative_deviation": deviation / scale,
    });
    if a.n % 2 == 1 {
        let real_eigenvalue = collocation_real_eigenvalue(a.n)?;
        // Rounding leaves the dense solve's real eigenvalue a tiny imaginary part.
        let dense = ev.iter().min_by(|x, y| x.im.abs().total_cmp(&y.im.abs())).map(|z| z.re);
        metrics["real_eigenvalue"] = json!(real_eigenvalue);
        metrics["real_eigenvalue_times_nu_over_n"] = json!(real_eigenvalue * 1.50888 / a.n as f64);
        metrics["dense_real_eigenvalue"] = json!(dense);
    }
    Ok(Outcome::new(a, metrics, Some(table)))
}

/// Real eigenvalue of the collocation matrix for odd `n`, as the reciprocal
/// of the real eigenvalue of the similar-inverse mass matrix, refined on its
/// exact rational entries. Dense double-precision solves on either matrix
/// lose this eigenvalue to rounding well before `n = 50`.
pub fn collocation_real_eigenvalue(n: usize) -> crate::Result<f64> {
    if n % 2 == 0 {
        return Err(Error::InvalidParameter(format!(
            "N = {n} is even; there is no real eigenvalue"
        )));
    }
    let starts: Vec<Complex64> = gbp_zeros(n, 2.0, 1e-12)?.zeros.iter().map(|z| -z).collect();
    let refined = crate::ldpg::perturbation::to_c64(&refine_eigenvalues(
        &crate::ldpg::mass_matrix_legendre_test::<Rational>(n),
        &starts,
    )?);
    let mu = refined
        .iter()
        .min_by(|x, y| x.im.abs().total_cmp(&y.im.abs()))
        .ok_or_else(|| Error::InvalidParameter("empty spectrum".into()))?;
    Ok(1.0 / mu.re)
}

fn verify_cmd(a: &VerifyArgs) -> CliResult<Outcome> {
    let sizes = |default: &[usize]| if a.n.is_empty() { default.to_vec() } else { a.n.clone() };
    let mut table = Table::new(&["n", "holds", "measure"]);
    let mut details = Vec::new();
    match a.identity {
        Identity::SquaredJacobi => {
            for n in sizes(&[4, 16, 40]) {
                require(n >= 2, "N must be at least 2")?;
                let diff = mass_matrix_m2::<Rational>(n, SecondOrderVariant::Pseudospectral)
                    .sub(&jacobi_matrix_field(n, &Rational::from_ratio(4, 1)).pow(2));
                let nonzero = diff.support().len();
                table.push(vec![n as f64, f64::from(u8::from(nonzero == 0)), nonzero as f64]);
                details.push(json!({"n": n, "nonzero_entries": nonzero}));
            }
        }
        Identity::BreveSupport => {
            let mut prev: Option<f64> = None;
            for n in sizes(&[8, 16, 32]) {
                let d = breve_difference(n)?;
                let want = vec![(n - 2, n - 1), (n - 1, n - 2), (n - 1, n - 1)];
                let mut got = d.support.clone();
                got.sort_unstable();
                let holds = got == want;
                table.push(vec![n as f64, f64::from(u8::from(holds)), d.max_entry]);
                details.push(json!({
                    "n": n,
                    "support": d.support,
                    "max_entry": d.max_entry,
                    "ratio_to_previous": prev.map(|p| d.max_entry / p),
                }));
                prev = Some(d.max_entry);
            }
        }
        Identity::CubedSpectrum => {
            for n in sizes(&[10]) {
                require(n >= 1, "N must be at least 1")?;
                let m = mass_matrix_m1::<f64>(n);
                let cubes: Vec<Complex64> = eigenvalues(&m.to_dense())?.iter().map(|z| z.powu(3)).collect();
                let direct = eigenvalues(&m.pow(3).to_dense())?;
                let dev = matched_max_deviation(&direct, &cubes);
                table.push(vec![n as f64, f64::from(u8::from(dev < 1e-8)), dev]);
                details.push(json!({"n": n, "max_deviation": dev}));
            }
        }
        Identity::PencilInvariance => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            for n in sizes(&[6]) {
                require(n >= 1, "N must be at least 1")?;
                let eye = Matrix::identity(n);
                let base = change_of_basis_pencil(n, &eye, &eye)?.eigenvalues()?;
                let p = random_orthogonal(n, &mut rng);
                let q = random_orthogonal(n, &mut rng);
                let dev = matched_max_deviation(&change_of_basis_pencil(n, &p, &q)?.eigenvalues()?, &base);
                let d = Matrix::from_fn(n, n, |i, j| if i == j { (i + 1) as f64 } else { 0.0 });
                let dev_diag = matched_max_deviation(&change_of_basis_pencil(n, &d, &eye)?.eigenvalues()?, &base);
                let recip: Vec<Complex64> = eigenvalues(&mass_matrix_m1::<f64>(n).to_dense())?
                    .iter()
                    .map(|z| 1.0 / z)
                    .collect();
                let dev_recip = matched_max_deviation(&base, &recip);
                let worst = dev.max(dev_diag);
                table.push(vec![n as f64, f64::from(u8::from(worst < 1e-9)), worst]);
                details.push(json!({
                    "n": n,
                    "orthogonal_deviation": dev,
                    "diagonal_deviation": dev_diag,
                    "identity_vs_reciprocal_mass_eigenvalues": dev_recip,
                }));
            }
        }
    }
    let holds = table.rows.iter().all(|r| r[1] == 1.0);
    let mut out = Outcome::new(a, json!({"holds": holds, "cases": details}), Some(table));
    out.holds = holds;
    Ok(out)
}

fn perturbation_cmd(a: &PerturbationArgs) -> CliResult<Outcome> {
    require(a.m == 2 || a.m == 3, "m must be 2 or 3")?;
    require(!a.n.is_empty(), "at least one N is needed")?;
    let mut table = Table::new(&["n", "max_deviation", "spectral_radius"]);
    let mut points = Vec::new();
    for &n in &a.n {
        let p = if a.m == 2 {
            second_order_perturbation(n)?
        } else {
            third_order_perturbation(n)?
        };
        table.push(vec![n as f64, p.max_deviation, p.spectral_radius]);
        points.push(p);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.max_deviation).collect();
    let slope = if xs.len() >= 2 {
        Some(loglog_slope(&xs, &ys))
    } else {
        None
    };
    let mut metrics = json!({"points": points, "loglog_slope": slope});
    if a.m == 3 {
        let diffs =
            a.n.iter()
                .map(|&n| breve_difference(n))
                .collect::<crate::Result<Vec<_>>>()?;
        metrics["breve_difference"] = json!(diffs
            .iter()
            .map(|d| json!({"n": d.n, "max_entry": d.max_entry, "norm_inf": d.norm_inf}))
            .collect::<Vec<_>>());
    }
    Ok(Outcome::new(a, metrics, Some(table)))
}

fn ivp_cmd(a: &IvpArgs) -> CliResult<Outcome> {
    require(a.samples >= 2, "samples must be at least 2")?;
    let inits = if a.inits.is_empty() {
        vec![1.0; a.m]
    } else {
        a.inits.clone()
    };
    let strategy = match a.strategy {
        IvpStrategyArg::Direct => IvpStrategy::Direct,
        IvpStrategyArg::FirstOrderSystem => IvpStrategy::FirstOrderSystem,
    };
    let sol = solve_ivp(a.m, a.sigma, &inits, a.n, strategy)?;
    let exact = exact_solution(a.sigma, &inits)?;
    let mut table = Table::new(&["t", "u", "exact"]);
    let mut worst = 0.0f64;
    for i in 0..a.samples {
        let t = -1.0 + 2.0 * i as f64 / (a.samples - 1) as f64;
        let (u, e) = (sol.eval(t), exact(t));
        worst = worst.max((u - e).abs());
        table.push(vec![t, u, e]);
    }
    let metrics = json!({"max_error": worst, "u_at_1": sol.eval(1.0)});
    let mut params = serde_json::to_value(a).unwrap_or(Value::Null);
    params["inits"] = json!(inits);
    Ok(Outcome {
        params,
        metrics,
        table: Some(table),
        holds: true,
    })
}

fn time_grid(horizon: f64, n: usize) -> Vec<f64> {
    Domain::new(0.0, horizon).grid(n)
}

fn wave_cmd(a: &WaveArgs) -> CliResult<Outcome> {
    require(
        a.grid_x >= 2 && a.grid_t >= 1,
        "output grid needs at least 2 x points and 1 t point",
    )?;
    let mut p = WaveProblem::pulse(a.nx, a.nt, a.slabs, a.horizon);
    p.sigma = a.sigma;
    p.domain = domain_of(&a.domain)?;
    let sol = solve_wave(&p, a.strategy.into())?;
    let xs = p.domain.grid(a.grid_x);
    let mut table = Table::new(&["x", "t", "u"]);
    let mut max_abs = 0.0f64;
    for t in time_grid(a.horizon, a.grid_t) {
        for (x, u) in xs.iter().zip(sol.values(&xs, t)) {
            max_abs = max_abs.max(u.abs());
            table.push(vec![*x, t, u]);
        }
    }
    let metrics = json!({
        "sigma_hat_per_slab": p.sigma_hat(),
        "max_abs_u": max_abs,
        "diag": sol.time.diagnostics,
    });
    Ok(Outcome::new(a, metrics, Some(table)))
}

fn kdv_cmd(a: &KdvArgs) -> CliResult<Outcome> {
    require(
        a.grid_x >= 2 && a.grid_t >= 1,
        "output grid needs at least 2 x points and 1 t point",
    )?;
    let mut p = KdvProblem::soliton(a.alpha, a.epsilon, a.sigma, a.nx, a.nt, a.horizon);
    p.domain = domain_of(&a.domain)?;
    p.slabs = a.slabs;
    p.newton = NewtonSettings {
        tol: a.tol,
        max_iter: a.max_iter,
    };
    let sol = solve_kdv(&p)?;
    let xs = p.domain.grid(a.grid_x);
    let soliton_case = a.alpha == 1.0 && a.epsilon == 1.0 && a.sigma == 0.0;
    let mut table = Table::new(&["x", "t", "u"]);
    let (mut max_abs, mut err) = (0.0f64, 0.0f64);
    for t in time_grid(a.horizon, a.grid_t) {
        for (x, u) in xs.iter().zip(sol.values(&xs, t)) {
            max_abs = max_abs.max(u.abs());
            if soliton_case {
                err = err.max((u - soliton(*x, t)).abs());
            }
            table.push(vec![*x, t, u]);
        }
    }
    let (slabs, modes) = p.slab_layout();
    let metrics = json!({
        "slabs": slabs,
        "modes_per_slab": modes,
        "max_abs_u": max_abs,
        "soliton_max_error": if soliton_case { json!(err) } else { Value::Null },
        "newton": sol.newton,
        "converged": sol.converged(),
    });
    let mut out = Outcome::new(a, metrics, Some(table));
    out.holds = sol.converged();
    Ok(out)
}

fn conditioning_cmd(a: &ConditioningArgs) -> CliResult<Outcome> {
    require(!a.nx.is_empty(), "at least one N_x is needed")?;
    let rows =
        a.nx.iter()
            .map(|&n| conditioning(n))
            .collect::<crate::Result<Vec<_>>>()?;
    let mut table = Table::new(&[
        "nx",
        "cond2",
        "min_modulus",
        "max_modulus",
        "dense_min_modulus",
        "dense_max_modulus",
    ]);
    for r in &rows {
        table.push(vec![
            r.nx as f64,
            r.cond2,
            r.min_modulus,
            r.max_modulus,
            r.dense_min_modulus,
            r.dense_max_modulus,
        ]);
    }
    Ok(Outcome::new(a, json!({"rows": rows}), Some(table)))
}

fn instability_cmd(a: &InstabilityArgs) -> CliResult<Outcome> {
    let r = instability_demo(a.n)?;
    let mut table = Table::new(&["index", "naive_re", "naive_im", "reference_re", "reference_im"]);
    for (i, (x, y)) in r.naive.iter().zip(&r.reference).enumerate() {
        table.push(vec![i as f64, x.re, x.im, y.re, y.im]);
    }
    let metrics = json!({
        "naive_max_deviation": r.max_deviation,
        "reference_residual": r.reference_residual,
        "naive": complex_json(&r.naive),
        "reference": complex_json(&r.reference),
    });
    Ok(Outcome::new(a, metrics, Some(table)))
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn diag_vs_qz_cmd(a: &DiagVsQzArgs) -> CliResult<Outcome> {
    require(!a.nt.is_empty(), "at least one N_t is needed")?;
    let xs = Domain::new(-50.0, 50.0).grid(201);
    let ts = time_grid(a.horizon, 5);
    let sample = |nt: usize, slabs: usize, s: Strategy| -> CliResult<Vec<Vec<f64>>> {
        let mut p = WaveProblem::pulse(a.nx, nt, slabs, a.horizon);
        p.sigma = a.sigma;
        let sol = solve_wave(&p, s)?;
        Ok(ts.iter().map(|&t| sol.values(&xs, t)).collect())
    };
    let reference = sample(a.ref_nt, a.ref_slabs, Strategy::Qz)?;
    let mut table = Table::new(&["nt", "cond2_e", "diag_error", "qz_error", "diag_qz_difference"]);
    let zero = Matrix::zeros(1, 1);
    for &nt in &a.nt {
        let cond = DiagSolver::with_cap(nt, &zero, usize::MAX)?.diagnostics.cond2_e;
        let d = sample(nt, a.slabs, Strategy::Diag)?;
        let q = sample(nt, a.slabs, Strategy::Qz)?;
        table.push(vec![
            nt as f64,
            cond,
            max_diff(&d, &reference),
            max_diff(&q, &reference),
            max_diff(&d, &q),
        ]);
    }
    let metrics = json!({
        "rows": table.rows.iter().map(|r| json!({
            "nt": r[0] as usize, "cond2_e": r[1], "diag_error": r[2], "qz_error": r[3], "diag_qz_difference": r[4]
        })).collect::<Vec<_>>(),
    });
    Ok(Outcome::new(a, metrics, Some(table)))
}

/// Turns a config object into command-line arguments. Keys are flag names
/// (snake or kebab case); `identity` is positional.
pub fn config_to_args(text: &str) -> CliResult<Vec<String>> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::validation(format!("config: {e}")))?;
    let Value::Object(map) = value else {
        return Err(CliError::validation("config must be a JSON object"));
    };
    let command = map
        .get("command")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::validation("config needs a string \"command\""))?;
    let mut args = vec!["spectral-time".to_string(), command.to_string()];
    for (key, v) in &map {
        if key == "command" {
            continue;
        }
        let flag = format!("--{}", key.replace('_', "-"));
        let scalar = |v: &Value| match v {
            Value::String(s) => Ok(s.clone()),
            Value::Number(n) => Ok(n.to_string()),
            _ => Err(CliError::validation(format!("config key {key}: unsupported value {v}"))),
        };
        match v {
            Value::Bool(true) => args.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let joined = items.iter().map(scalar).collect::<CliResult<Vec<_>>>()?.join(",");
                args.push(flag);
                args.push(joined);
            }
            other if key == "identity" => args.push(scalar(other)?),
            other => {
                args.push(flag);
                args.push(scalar(other)?);
            }
        }
    }
    Ok(args)
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn report_error(command: &str, e: &CliError) {
    let record = ErrorRecord {
        command: command.to_string(),
        status: "error".into(),
        exit_code: e.exit_code,
        kind: e.kind.clone(),
        message: e.message.clone(),
    };
    eprintln!("{}", serde_json::to_string(&record).unwrap_or_default());
}

fn parse(args: Vec<String>) -> CliResult<Cli> {
    Cli::try_parse_from(args).map_err(|e| {
        use clap::error::ErrorKind;
        if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
            let _ = e.print();
            CliError {
                exit_code: 0,
                kind: "help".into(),
                message: String::new(),
            }
        } else {
            CliError::validation(e.to_string().trim().to_string())
        }
    })
}

fn write_table(path: &Path, table: &Table) -> CliResult<()> {
    table.write(path).map_err(|e| CliError {
        exit_code: 3,
        kind: "io".into(),
        message: format!("writing {}: {e}", path.display()),
    })
}

/// Runs the driver on `args` (program name first) and returns the exit code.
pub fn run(args: Vec<String>) -> i32 {
    configure_threads();
    let mut cli = match parse(args) {
        Ok(c) => c,
        Err(e) if e.exit_code == 0 => return 0,
        Err(e) => {
            report_error("", &e);
            return e.exit_code;
        }
    };
    if let Some(path) = cli.config.take() {
        let loaded = std::fs::read_to_string(&path)
            .map_err(|e| CliError::validation(format!("reading {}: {e}", path.display())))
            .and_then(|text| config_to_args(&text))
            .and_then(parse);
        match loaded {
            Ok(c) => {
                cli.command = c.command;
                cli.json |= c.json;
                cli.out = cli.out.or(c.out);
            }
            Err(e) => {
                report_error("", &e);
                return e.exit_code;
            }
        }
    }
    let Some(command) = cli.command else {
        let e = CliError::validation("no subcommand given (see --help)");
        report_error("", &e);
        return e.exit_code;
    };
    let name = command.name();
    let outcome = match execute(&command) {
        Ok(o) => o,
        Err(e) => {
            report_error(name, &e);
            return e.exit_code;
        }
    };
    if let (Some(path), Some(table)) = (&cli.out, &outcome.table) {
        if let Err(e) = write_table(path, table) {
            report_error(name, &e);
            return e.exit_code;
        }
    }
    let summary = Summary {
        command: name.to_string(),
        params: outcome.params,
        metrics: outcome.metrics,
        status: if outcome.holds { "ok" } else { "failed" }.into(),
    };
    let text = if cli.json {
        serde_json::to_string(&summary)
    } else {
        serde_json::to_string_pretty(&summary)
    };
    // A closed pipe (e.g. `| head`) is not an error of the run.
    let _ = writeln!(std::io::stdout(), "{}", text.unwrap_or_default());
    if outcome.holds {
        0
    } else {
        let e = CliError {
            exit_code: 3,
            kind: "failed".into(),
            message: format!("{name} finished but did not meet its criterion"),
        };
        report_error(name, &e);
        e.exit_code
    }
}
