//! jetbound: command-line driver for explicit point-count bounds, Frobenius
//! matrices on H^1_dR of odd hyperelliptic curves, Coleman slope analysis at
//! residue discs, and mod-p vanishing tables of differential subspaces.
//!
//! Exit codes: 0 success, 1 input or parse error, 2 mathematical hypothesis
//! violation, 3 precision exhaustion. Every run emits a manifest (stderr as a
//! single JSON line, or `manifest.json` under `--out-dir`) recording the
//! command, an input digest, and versions; primary outputs are byte-identical
//! across repeated runs of the same command.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::Serialize;
use sha2::{Digest, Sha256};

use jetbound_core::bounds::{
    buium_mm_report, coleman_chabauty_report, mordell_lang_point_report,
    mordell_lang_reduction_report, stoll_vanishing_sum, BoundReport, BoundsError, StollPointClass,
};
use jetbound_core::coleman::{
    candidate_slopes, unramified_test, ColemanError, ColemanSequence, ExclusionBranch,
    K0Convention, Verdict,
};
use jetbound_core::derham::{
    frobenius_matrix, to_digit_string, CohomologyClass, CurvePointBar, CurveSpec, DerhamError,
    DifferentialModP, FrobeniusData, HyperellipticCurve,
};
use jetbound_core::fp::{is_prime, FpPoly};
use jetbound_core::padic::{PadicContext, PadicError, PadicNumber};

const PRECISION_ENV: &str = "JETBOUND_PRECISION";

#[derive(Parser)]
#[command(
    name = "jetbound",
    version,
    about = "Point-count bounds and p-adic cohomology for odd hyperelliptic curves"
)]
struct Cli {
    /// Output format for the primary report.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Directory to write the primary output and manifest.json into.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    /// Worker threads for commands that process several curve files.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Working p-adic precision, overriding the curve file and JETBOUND_PRECISION.
    #[arg(long, global = true)]
    precision: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form point-count bounds.
    Bound {
        #[command(subcommand)]
        kind: BoundKind,
    },
    /// Frobenius and Verschiebung matrices on H^1_dR with a zeta cross-check.
    Frobenius(FrobeniusArgs),
    /// Coleman vanishing-order sequence and unramified-value exclusion.
    Coleman(ColemanArgs),
    /// Mod-p vanishing table of a subspace of holomorphic differentials.
    Stoll(StollArgs),
}

#[derive(Subcommand)]
enum BoundKind {
    /// Torsion-point count p^(2g) 3^g [p(2g-2)+6g] g!.
    Mm {
        #[arg(long)]
        g: u64,
        #[arg(long)]
        p: u64,
    },
    /// Reduction-image count p^(3g+r) 3^g [p(2g-2)+6g] g!.
    MlRed {
        #[arg(long)]
        g: u64,
        #[arg(long, default_value_t = 0)]
        r: u64,
        #[arg(long)]
        p: u64,
    },
    /// Rational-point count: the reduction bound plus 2r.
    MlPoints {
        #[arg(long)]
        g: u64,
        #[arg(long, default_value_t = 0)]
        r: u64,
        #[arg(long)]
        p: u64,
    },
    /// Chabauty-style count: residue points plus 2g - 2.
    Chabauty {
        #[arg(long)]
        residue_points: u64,
        #[arg(long)]
        g: u64,
    },
}

#[derive(Args)]
struct FrobeniusArgs {
    /// Curve file(s): JSON {"p", "genus", "f_coeffs", "precision"}. Repeatable.
    #[arg(long = "curve", required = true)]
    curves: Vec<PathBuf>,
}

#[derive(Args)]
struct ColemanArgs {
    /// Curve file.
    #[arg(long)]
    curve: PathBuf,

    /// Residue point: "a,b" (finite), "w:a" (Weierstrass), or "inf".
    #[arg(long)]
    point: String,

    /// Differential: a basis index (0..2g-1) or comma-separated coordinates.
    #[arg(long, default_value = "0")]
    omega: String,

    /// Number of sequence terms; also caps the depth of the exclusion search.
    #[arg(long, default_value_t = 5)]
    length: usize,

    /// Candidate valuation "c/d" to test for exclusion.
    #[arg(long)]
    lambda: Option<String>,
}

#[derive(Args)]
struct StollArgs {
    /// Curve file.
    #[arg(long)]
    curve: PathBuf,

    /// Basis of the subspace: rows "c0,c1,..." separated by ';', each row the
    /// mod-p coefficients of h(x) in h(x) dx / y, deg h <= g - 1.
    #[arg(long)]
    basis: String,
}

// ---------------------------------------------------------------------------
// Errors and exit codes.

struct CliError {
    code: u8,
    msg: String,
}

fn input_err(msg: impl Into<String>) -> CliError {
    CliError { code: 1, msg: msg.into() }
}

fn hyp_err(msg: impl Into<String>) -> CliError {
    CliError { code: 2, msg: msg.into() }
}

fn prec_err(msg: impl Into<String>) -> CliError {
    CliError { code: 3, msg: msg.into() }
}

impl From<PadicError> for CliError {
    fn from(e: PadicError) -> Self {
        hyp_err(e.to_string())
    }
}

impl From<DerhamError> for CliError {
    fn from(e: DerhamError) -> Self {
        match e {
            DerhamError::BadModel => input_err(e.to_string()),
            DerhamError::PrecisionExhausted(_) => prec_err(e.to_string()),
            other => hyp_err(other.to_string()),
        }
    }
}

impl From<ColemanError> for CliError {
    fn from(e: ColemanError) -> Self {
        match e {
            ColemanError::PrecisionExhausted(_) | ColemanError::RangeNotCertified(_) => {
                prec_err(e.to_string())
            }
            ColemanError::Derham(inner) => inner.into(),
            ColemanError::Padic(inner) => inner.into(),
            other => hyp_err(other.to_string()),
        }
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        hyp_err(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Curve loading.

struct LoadedCurve {
    curve: HyperellipticCurve,
    label: String,
    raw: Vec<u8>,
}

/// Resolved working precision: flag beats the environment beats the file.
fn effective_precision(flag: Option<usize>, file: usize) -> Result<usize, CliError> {
    if let Some(n) = flag {
        return Ok(n);
    }
    match std::env::var(PRECISION_ENV) {
        Ok(s) => s
            .trim()
            .parse::<usize>()
            .map_err(|_| input_err(format!("{PRECISION_ENV} must be a positive integer, got {s:?}"))),
        Err(_) => Ok(file),
    }
}

fn load_curve(path: &Path, precision_flag: Option<usize>) -> Result<LoadedCurve, CliError> {
    let raw = std::fs::read(path)
        .map_err(|e| input_err(format!("cannot read {}: {e}", path.display())))?;
    let spec: CurveSpec = serde_json::from_slice(&raw)
        .map_err(|e| input_err(format!("malformed curve file {}: {e}", path.display())))?;

    let expect_len = 2 * spec.genus as usize + 2;
    if spec.f_coeffs.len() != expect_len {
        return Err(input_err(format!(
            "{}: f_coeffs must list the 2g+2 = {expect_len} coefficients of a monic degree-(2g+1) \
             polynomial, got {}",
            path.display(),
            spec.f_coeffs.len()
        )));
    }
    if spec.f_coeffs.last() != Some(&1) {
        return Err(input_err(format!(
            "{}: f must be monic (last coefficient 1)",
            path.display()
        )));
    }
    if spec.precision == 0 {
        return Err(input_err(format!("{}: precision must be at least 1", path.display())));
    }
    if !is_prime(spec.p) {
        return Err(hyp_err(format!("{}: p = {} is not prime", path.display(), spec.p)));
    }

    let precision = effective_precision(precision_flag, spec.precision)?;
    let spec = CurveSpec { precision, ..spec };
    let curve = HyperellipticCurve::from_spec(&spec).map_err(|e| match e {
        DerhamError::BadReduction => {
            let detail = match disc_valuation(&spec) {
                Some(v) => format!("disc(f) has p-adic valuation {v}"),
                None => "disc(f) = 0, the model is singular over the integers".to_string(),
            };
            hyp_err(format!(
                "{}: bad reduction at p = {}: {detail}",
                path.display(),
                spec.p
            ))
        }
        other => other.into(),
    })?;

    let label = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string());
    Ok(LoadedCurve { curve, label, raw })
}

/// p-adic valuation of disc(f) for the exact integer model, None if disc = 0.
fn disc_valuation(spec: &CurveSpec) -> Option<u64> {
    let f: Vec<BigRational> =
        spec.f_coeffs.iter().map(|&c| BigRational::from(BigInt::from(c))).collect();
    let mut fp = Vec::new();
    for (i, c) in f.iter().enumerate().skip(1) {
        fp.push(c * BigRational::from(BigInt::from(i as u64)));
    }
    let res = resultant(f, fp);
    if res.is_zero() {
        return None;
    }
    // For monic integer f the resultant is an integer; valuation of numerator
    // minus denominator guards against a non-reduced representation.
    let p = BigInt::from(spec.p);
    let count = |mut n: BigInt| {
        let mut v = 0u64;
        while !n.is_zero() && (&n % &p).is_zero() {
            n /= &p;
            v += 1;
        }
        v
    };
    let num = count(res.numer().abs());
    let den = count(res.denom().abs());
    Some(num - den)
}

fn trim(mut a: Vec<BigRational>) -> Vec<BigRational> {
    while a.last().is_some_and(|c| c.is_zero()) {
        a.pop();
    }
    a
}

/// Resultant of two rational polynomials (low-to-high coefficients) by the
/// Euclidean recurrence res(a, b) = (-1)^(deg a deg b) lc(b)^(deg a - deg r) res(b, r).
fn resultant(a: Vec<BigRational>, b: Vec<BigRational>) -> BigRational {
    let a = trim(a);
    let b = trim(b);
    if a.is_empty() || b.is_empty() {
        return BigRational::zero();
    }
    let (m, n) = (a.len() - 1, b.len() - 1);
    if n == 0 {
        return pow_rat(&b[0], m as u32);
    }
    // r = a mod b.
    let mut r = a.clone();
    let lead = b[n].clone();
    while r.len() > n {
        let d = r.len() - 1;
        let q = &r[d] / &lead;
        for i in 0..n {
            let t = &q * &b[i];
            r[d - n + i] = &r[d - n + i] - &t;
        }
        r.pop();
        r = trim(r);
        if r.is_empty() {
            break;
        }
    }
    let dr = if r.is_empty() { 0 } else { r.len() - 1 };
    if r.is_empty() {
        return BigRational::zero();
    }
    let sign = if (m * n) % 2 == 1 {
        -BigRational::from(BigInt::from(1))
    } else {
        BigRational::from(BigInt::from(1))
    };
    sign * pow_rat(&lead, (m - dr) as u32) * resultant(b, r)
}

fn pow_rat(b: &BigRational, e: u32) -> BigRational {
    let mut acc = BigRational::from(BigInt::from(1));
    for _ in 0..e {
        acc = &acc * b;
    }
    acc
}

// ---------------------------------------------------------------------------
// Output shapes.

#[derive(Serialize)]
struct FrobeniusOut {
    label: String,
    p: u64,
    genus: u64,
    /// Certified output precision of the Frobenius matrix entries.
    precision: usize,
    /// 2g x 2g matrix of base-p digit strings at that precision.
    matrix: Vec<Vec<String>>,
    /// Verschiebung matrix, one digit tier lower.
    v_matrix: Vec<Vec<String>>,
    v_precision: usize,
    /// Characteristic polynomial of Frobenius, low-to-high digit strings.
    charpoly: Vec<String>,
    /// Exact zeta numerator coefficients, low-to-high, decimal.
    zeta_numerator: Vec<String>,
    /// charpoly == zeta numerator mod p^precision.
    zeta_consistent: bool,
    /// F V == p on H^1 at the Verschiebung precision.
    fv_identity: bool,
}

#[derive(Serialize)]
struct ColemanOut {
    label: String,
    point: String,
    omega: String,
    n: Vec<u64>,
    k: Vec<u64>,
    /// Polygon vertex abscissas k_i p^(n_i).
    abscissas: Vec<u64>,
    /// Candidate integral valuations as exact rationals.
    slopes: Vec<String>,
    /// "excluded", "not-excluded", or "not-tested" when no lambda was given.
    verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    certificate: Option<CertificateOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessOut>,
    /// Certified p-adic precision of the sequence computation.
    precision: usize,
}

#[derive(Serialize)]
struct CertificateOut {
    branch: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    basis_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    /// The non-integer valuation the integral would have to take.
    valuation: String,
    /// (n_i, k_i, i) at the bracketing polygon vertex.
    vertex: (u64, u64, usize),
    /// Digit strings of the witness differential's coordinates.
    differential: Vec<String>,
}

#[derive(Serialize)]
struct WitnessOut {
    #[serde(skip_serializing_if = "Option::is_none")]
    common: Option<(u64, u64)>,
    note: String,
}

#[derive(Serialize)]
struct StollOut {
    label: String,
    p: u64,
    genus: u64,
    /// Dimension of the differential subspace.
    dim: u64,
    /// r = g - dim, the rank the table is calibrated against.
    r: u64,
    entries: Vec<StollEntryOut>,
    /// Sum of n(s) over all listed closed points; bounded by 2r.
    total: u64,
    bound: u64,
}

#[derive(Serialize)]
struct StollEntryOut {
    /// Minimal polynomial of the x-coordinate class, or "infinity".
    point: String,
    weierstrass: bool,
    /// Number of geometric points in the class.
    points: u64,
    /// Common vanishing order n(s) at each of them.
    n: u64,
}

// ---------------------------------------------------------------------------
// TSV renderers. One record per line, tab-separated, stable order.

fn bound_tsv(r: &BoundReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "formula\t{}", r.formula);
    let _ = writeln!(s, "genus\t{}", r.genus);
    if let Some(rank) = r.rank {
        let _ = writeln!(s, "rank\t{rank}");
    }
    if let Some(p) = r.p {
        let _ = writeln!(s, "p\t{p}");
    }
    for (k, v) in &r.auxiliary {
        let _ = writeln!(s, "{k}\t{v}");
    }
    let _ = writeln!(s, "value\t{}", r.value);
    for h in &r.hypotheses {
        let _ = writeln!(s, "hypothesis\t{h}");
    }
    s
}

fn frobenius_tsv(outs: &[FrobeniusOut]) -> String {
    let mut s = String::new();
    for (idx, o) in outs.iter().enumerate() {
        if idx > 0 {
            s.push('\n');
        }
        let _ = writeln!(s, "label\t{}", o.label);
        let _ = writeln!(s, "p\t{}", o.p);
        let _ = writeln!(s, "genus\t{}", o.genus);
        let _ = writeln!(s, "precision\t{}", o.precision);
        for (i, row) in o.matrix.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let _ = writeln!(s, "F\t{i}\t{j}\t{e}");
            }
        }
        let _ = writeln!(s, "v_precision\t{}", o.v_precision);
        for (i, row) in o.v_matrix.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                let _ = writeln!(s, "V\t{i}\t{j}\t{e}");
            }
        }
        for (i, c) in o.charpoly.iter().enumerate() {
            let _ = writeln!(s, "charpoly\t{i}\t{c}");
        }
        for (i, c) in o.zeta_numerator.iter().enumerate() {
            let _ = writeln!(s, "zeta_numerator\t{i}\t{c}");
        }
        let _ = writeln!(s, "zeta_consistent\t{}", o.zeta_consistent);
        let _ = writeln!(s, "fv_identity\t{}", o.fv_identity);
    }
    s
}

fn coleman_tsv(o: &ColemanOut) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "label\t{}", o.label);
    let _ = writeln!(s, "point\t{}", o.point);
    let _ = writeln!(s, "omega\t{}", o.omega);
    let _ = writeln!(s, "i\tn\tk\tabscissa");
    for i in 0..o.n.len() {
        let _ = writeln!(s, "{i}\t{}\t{}\t{}", o.n[i], o.k[i], o.abscissas[i]);
    }
    for sl in &o.slopes {
        let _ = writeln!(s, "slope\t{sl}");
    }
    if let Some(l) = &o.lambda {
        let _ = writeln!(s, "lambda\t{l}");
    }
    let _ = writeln!(s, "verdict\t{}", o.verdict);
    let _ = writeln!(s, "precision\t{}", o.precision);
    s
}

fn stoll_tsv(o: &StollOut) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "label\t{}", o.label);
    let _ = writeln!(s, "p\t{}", o.p);
    let _ = writeln!(s, "genus\t{}", o.genus);
    let _ = writeln!(s, "dim\t{}", o.dim);
    let _ = writeln!(s, "r\t{}", o.r);
    let _ = writeln!(s, "point\tweierstrass\tpoints\tn");
    for e in &o.entries {
        let _ = writeln!(s, "{}\t{}\t{}\t{}", e.point, e.weierstrass, e.points, e.n);
    }
    let _ = writeln!(s, "total\t{}", o.total);
    let _ = writeln!(s, "bound\t{}", o.bound);
    s
}

// ---------------------------------------------------------------------------
// Command runners.

fn run_bound(kind: &BoundKind) -> Result<(BoundReport, String), CliError> {
    let (report, canon) = match kind {
        BoundKind::Mm { g, p } => (buium_mm_report(*g, *p)?, format!("bound mm g={g} p={p}")),
        BoundKind::MlRed { g, r, p } => (
            mordell_lang_reduction_report(*g, *r, *p)?,
            format!("bound ml-red g={g} r={r} p={p}"),
        ),
        BoundKind::MlPoints { g, r, p } => (
            mordell_lang_point_report(*g, *r, *p)?,
            format!("bound ml-points g={g} r={r} p={p}"),
        ),
        BoundKind::Chabauty { residue_points, g } => (
            coleman_chabauty_report(*residue_points, *g)?,
            format!("bound chabauty residue-points={residue_points} g={g}"),
        ),
    };
    Ok((report, canon))
}

fn frobenius_one(loaded: &LoadedCurve) -> Result<FrobeniusOut, CliError> {
    let fd = frobenius_matrix(&loaded.curve, None)?;
    let digits = |m: &[Vec<PadicNumber>]| -> Vec<Vec<String>> {
        m.iter().map(|row| row.iter().map(to_digit_string).collect()).collect()
    };
    Ok(FrobeniusOut {
        label: loaded.label.clone(),
        p: loaded.curve.p(),
        genus: loaded.curve.genus(),
        precision: fd.n_out(),
        matrix: digits(fd.f_matrix()),
        v_matrix: digits(fd.v_matrix()),
        v_precision: fd.n_v(),
        charpoly: fd.charpoly().iter().map(to_digit_string).collect(),
        zeta_numerator: fd.zeta_numerator().iter().map(|c| c.to_string()).collect(),
        zeta_consistent: zeta_consistent(&fd),
        fv_identity: fv_identity(&fd),
    })
}

/// charpoly(F) matches the zeta numerator mod p^n_out. The two are reciprocal
/// polynomials of each other, so the coefficient lists align in reverse.
fn zeta_consistent(fd: &FrobeniusData) -> bool {
    let ctx = fd.curve().context();
    let n = fd.n_out();
    fd.charpoly().iter().zip(fd.zeta_numerator().iter().rev()).all(|(c, z)| {
        let lhs = c.reduce_precision(n);
        let rhs = ctx.from_bigint(z).reduce_precision(n);
        lhs.sub(&rhs).is_zero()
    })
}

/// F V == p * Id on H^1, checked at the Verschiebung precision.
fn fv_identity(fd: &FrobeniusData) -> bool {
    let ctx = fd.curve().context();
    let nv = fd.n_v();
    let dim = fd.f_matrix().len();
    let p_entry = ctx.from_u64(fd.curve().p()).reduce_precision(nv);
    for i in 0..dim {
        for j in 0..dim {
            let mut acc = ctx.zero().reduce_precision(nv);
            for k in 0..dim {
                let a = fd.f_matrix()[i][k].reduce_precision(nv);
                let b = fd.v_matrix()[k][j].reduce_precision(nv);
                acc = acc.add(&a.mul(&b));
            }
            let expect = if i == j { p_entry.clone() } else { ctx.zero().reduce_precision(nv) };
            if !acc.sub(&expect).is_zero() {
                return false;
            }
        }
    }
    true
}

fn run_frobenius(
    args: &FrobeniusArgs,
    precision: Option<usize>,
    jobs: usize,
) -> Result<(Vec<FrobeniusOut>, Vec<u8>), CliError> {
    let mut loaded = Vec::new();
    let mut hash_input = Vec::new();
    for path in &args.curves {
        let lc = load_curve(path, precision)?;
        hash_input.extend_from_slice(&lc.raw);
        loaded.push(lc);
    }

    let jobs = jobs.max(1).min(loaded.len().max(1));
    let results: Mutex<Vec<Option<Result<FrobeniusOut, CliError>>>> =
        Mutex::new((0..loaded.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for w in 0..jobs {
            let loaded = &loaded;
            let results = &results;
            scope.spawn(move || {
                let mut i = w;
                while i < loaded.len() {
                    let out = frobenius_one(&loaded[i]);
                    results.lock().unwrap()[i] = Some(out);
                    i += jobs;
                }
            });
        }
    });

    let mut outs = Vec::with_capacity(loaded.len());
    for slot in results.into_inner().unwrap() {
        outs.push(slot.expect("worker filled every slot")?);
    }
    Ok((outs, hash_input))
}

fn parse_point(text: &str, p: u64) -> Result<CurvePointBar, CliError> {
    let ctx1 = PadicContext::new(p, 1, 1).map_err(CliError::from)?;
    let t = text.trim();
    if t.eq_ignore_ascii_case("inf") || t.eq_ignore_ascii_case("infinity") {
        return Ok(CurvePointBar::Infinity);
    }
    let coord = |s: &str| -> Result<u64, CliError> {
        s.trim()
            .parse::<u64>()
            .map_err(|_| input_err(format!("bad residue coordinate {s:?}: expected an integer")))
    };
    if let Some(rest) = t.strip_prefix("w:").or_else(|| t.strip_prefix("W:")) {
        let a = coord(rest)?;
        return Ok(CurvePointBar::Weierstrass { a: ctx1.from_u64(a) });
    }
    let parts: Vec<&str> = t.split(',').collect();
    if parts.len() != 2 {
        return Err(input_err(format!(
            "bad point {text:?}: expected \"a,b\", \"w:a\", or \"inf\""
        )));
    }
    Ok(CurvePointBar::FiniteNonWeierstrass {
        a: ctx1.from_u64(coord(parts[0])?),
        b: ctx1.from_u64(coord(parts[1])?),
    })
}

fn parse_omega(text: &str, curve: &HyperellipticCurve) -> Result<CohomologyClass, CliError> {
    let dim = 2 * curve.genus() as usize;
    let t = text.trim();
    if !t.contains(',') {
        let i = t
            .parse::<usize>()
            .map_err(|_| input_err(format!("bad omega {text:?}: expected an index or coordinates")))?;
        if i >= dim {
            return Err(input_err(format!("omega index {i} out of range 0..{dim}")));
        }
        return Ok(curve.basis_class(i, curve.context()));
    }
    let mut coords = Vec::new();
    for part in t.split(',') {
        let c = part
            .trim()
            .parse::<u64>()
            .map_err(|_| input_err(format!("bad omega coordinate {part:?}")))?;
        coords.push(curve.context().from_u64(c));
    }
    if coords.len() > dim {
        return Err(input_err(format!(
            "omega has {} coordinates but H^1 has dimension {dim}",
            coords.len()
        )));
    }
    while coords.len() < dim {
        coords.push(curve.context().zero());
    }
    Ok(CohomologyClass::new(curve, coords))
}

fn parse_rational(text: &str) -> Result<BigRational, CliError> {
    let t = text.trim();
    let bad = || input_err(format!("bad lambda {text:?}: expected \"c/d\" or an integer"));
    match t.split_once('/') {
        Some((num, den)) => {
            let n: BigInt = num.trim().parse().map_err(|_| bad())?;
            let d: BigInt = den.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            let n: BigInt = t.parse().map_err(|_| bad())?;
            Ok(BigRational::from(n))
        }
    }
}

fn run_coleman(
    args: &ColemanArgs,
    precision: Option<usize>,
) -> Result<(ColemanOut, Vec<u8>), CliError> {
    let loaded = load_curve(&args.curve, precision)?;
    let curve = &loaded.curve;
    let zbar = parse_point(&args.point, curve.p())?;
    if !zbar.validate(curve) {
        let hint = match &zbar {
            CurvePointBar::FiniteNonWeierstrass { b, .. } if b.is_zero() => {
                " (for a point with y = 0 use \"w:a\")"
            }
            _ => "",
        };
        return Err(hyp_err(format!(
            "point {} does not lie on the reduced curve{hint}",
            args.point.trim()
        )));
    }
    let omega = parse_omega(&args.omega, curve)?;
    if args.length == 0 {
        return Err(input_err("length must be at least 1"));
    }
    let lambda = args.lambda.as_deref().map(parse_rational).transpose()?;

    let fd = frobenius_matrix(curve, None)?;
    let seq =
        ColemanSequence::compute(&fd, &omega, &zbar, args.length, K0Convention::UniformPlusOne)?;
    let slopes = candidate_slopes(&seq);

    let (verdict, certificate, witness) = match &lambda {
        None => ("not-tested".to_string(), None, None),
        Some(lam) => match unramified_test(&fd, &zbar, lam, args.length)? {
            Verdict::Excluded(cert) => {
                let (branch, basis_index, description) = match &cert.branch {
                    ExclusionBranch::NonVanishingDifferential { basis_index } => {
                        ("non-vanishing-differential".to_string(), Some(*basis_index), None)
                    }
                    ExclusionBranch::BasisDifferential { basis_index } => {
                        ("basis-differential".to_string(), Some(*basis_index), None)
                    }
                    ExclusionBranch::Combination { description } => {
                        ("combination".to_string(), None, Some(description.clone()))
                    }
                };
                (
                    "excluded".to_string(),
                    Some(CertificateOut {
                        branch,
                        basis_index,
                        description,
                        valuation: cert.valuation.to_string(),
                        vertex: cert.vertex,
                        differential: cert.differential.clone(),
                    }),
                    None,
                )
            }
            Verdict::NotExcluded(w) => (
                "not-excluded".to_string(),
                None,
                Some(WitnessOut { common: w.common, note: w.note.clone() }),
            ),
        },
    };

    let out = ColemanOut {
        label: loaded.label.clone(),
        point: args.point.trim().to_string(),
        omega: args.omega.trim().to_string(),
        n: seq.n_list().to_vec(),
        k: seq.k_list().to_vec(),
        abscissas: seq.abscissas(),
        slopes: slopes.iter().map(|s| s.to_string()).collect(),
        verdict,
        lambda: lambda.map(|l| l.to_string()),
        certificate,
        witness,
        precision: seq.certified_precision(),
    };

    let mut hash_input = loaded.raw.clone();
    hash_input.extend_from_slice(
        format!(
            "coleman point={} omega={} length={} lambda={}",
            out.point,
            out.omega,
            args.length,
            out.lambda.as_deref().unwrap_or("-")
        )
        .as_bytes(),
    );
    Ok((out, hash_input))
}

/// Render an FpPoly as a readable polynomial in x, high degree first.
fn poly_string(q: &FpPoly) -> String {
    let Some(d) = q.deg() else {
        return "0".to_string();
    };
    let mut s = String::new();
    for i in (0..=d).rev() {
        let c = q.coeff(i);
        if c == 0 {
            continue;
        }
        if !s.is_empty() {
            s.push_str(" + ");
        }
        match (i, c) {
            (0, _) => {
                let _ = write!(s, "{c}");
            }
            (1, 1) => s.push('x'),
            (1, _) => {
                let _ = write!(s, "{c}*x");
            }
            (_, 1) => {
                let _ = write!(s, "x^{i}");
            }
            _ => {
                let _ = write!(s, "{c}*x^{i}");
            }
        }
    }
    if s.is_empty() {
        s.push('0');
    }
    s
}

fn run_stoll(args: &StollArgs, precision: Option<usize>) -> Result<(StollOut, Vec<u8>), CliError> {
    let loaded = load_curve(&args.curve, precision)?;
    let curve = &loaded.curve;
    let p = curve.p();
    let g = curve.genus();

    let mut diffs = Vec::new();
    for row in args.basis.split(';') {
        let mut coeffs = Vec::new();
        for part in row.split(',') {
            let c = part
                .trim()
                .parse::<u64>()
                .map_err(|_| input_err(format!("bad basis coefficient {part:?}")))?;
            coeffs.push(c % p);
        }
        if coeffs.len() > g as usize {
            return Err(input_err(format!(
                "basis row {row:?} has {} coefficients; holomorphic differentials have degree \
                 at most g - 1 = {}",
                coeffs.len(),
                g - 1
            )));
        }
        let poly = FpPoly::new(p, coeffs);
        diffs.push(DifferentialModP::from_fp_poly(curve.context(), &poly));
    }

    let table = stoll_vanishing_sum(curve, &diffs)?;
    let entries = table
        .entries
        .iter()
        .map(|e| match &e.class {
            StollPointClass::Finite { min_poly, weierstrass } => StollEntryOut {
                point: poly_string(min_poly),
                weierstrass: *weierstrass,
                points: e.points,
                n: e.n,
            },
            StollPointClass::Infinity => StollEntryOut {
                point: "infinity".to_string(),
                weierstrass: false,
                points: e.points,
                n: e.n,
            },
        })
        .collect();

    let out = StollOut {
        label: loaded.label.clone(),
        p,
        genus: g,
        dim: table.dim,
        r: table.r,
        entries,
        total: table.total,
        bound: 2 * table.r,
    };
    let mut hash_input = loaded.raw.clone();
    hash_input.extend_from_slice(format!("stoll basis={}", args.basis.trim()).as_bytes());
    Ok((out, hash_input))
}

// ---------------------------------------------------------------------------
// Manifest and output plumbing.

#[derive(Serialize)]
struct Versions {
    jetbound: &'static str,
}

#[derive(Serialize)]
struct RunManifest {
    /// Argument vector after the program name.
    command: Vec<String>,
    /// SHA-256 over the input files' bytes followed by the canonical argument line.
    input_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    precision: Option<usize>,
    versions: Versions,
    /// Where the primary report went.
    outputs: Vec<String>,
    wall_time_ms: u128,
}

struct Rendered {
    json: String,
    tsv: String,
}

fn render<T: Serialize>(value: &T, tsv: String) -> Result<Rendered, CliError> {
    let json = serde_json::to_string_pretty(value)
        .map_err(|e| input_err(format!("cannot serialize report: {e}")))?;
    Ok(Rendered { json, tsv })
}

fn finish(
    cli: &Cli,
    subname: &str,
    rendered: Rendered,
    hash_input: &[u8],
    precision: Option<usize>,
    argv: &[String],
    started: Instant,
) -> Result<(), CliError> {
    let mut primary = match cli.format {
        Format::Json => rendered.json,
        Format::Tsv => rendered.tsv,
    };
    if !primary.ends_with('\n') {
        primary.push('\n');
    }

    let mut outputs = Vec::new();
    let manifest_path = if let Some(dir) = &cli.out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| input_err(format!("cannot create {}: {e}", dir.display())))?;
        let ext = match cli.format {
            Format::Json => "json",
            Format::Tsv => "tsv",
        };
        let path = dir.join(format!("{subname}.{ext}"));
        std::fs::write(&path, &primary)
            .map_err(|e| input_err(format!("cannot write {}: {e}", path.display())))?;
        outputs.push(path.display().to_string());
        Some(dir.join("manifest.json"))
    } else {
        None
    };
    outputs.push("stdout".to_string());
    print!("{primary}");

    let manifest = RunManifest {
        command: argv.iter().skip(1).cloned().collect(),
        input_sha256: hex::encode(Sha256::digest(hash_input)),
        precision,
        versions: Versions { jetbound: env!("CARGO_PKG_VERSION") },
        outputs,
        wall_time_ms: started.elapsed().as_millis(),
    };
    let line = serde_json::to_string(&manifest)
        .map_err(|e| input_err(format!("cannot serialize manifest: {e}")))?;
    match manifest_path {
        Some(path) => {
            std::fs::write(&path, format!("{line}\n"))
                .map_err(|e| input_err(format!("cannot write {}: {e}", path.display())))?;
        }
        None => eprintln!("{line}"),
    }
    Ok(())
}

fn run(cli: &Cli, argv: &[String], started: Instant) -> Result<(), CliError> {
    match &cli.command {
        Command::Bound { kind } => {
            let (report, canon) = run_bound(kind)?;
            let rendered = render(&report, bound_tsv(&report))?;
            finish(cli, "bound", rendered, canon.as_bytes(), None, argv, started)
        }
        Command::Frobenius(args) => {
            let (outs, hash_input) = run_frobenius(args, cli.precision, cli.jobs)?;
            let precision = outs.iter().map(|o| o.precision).min();
            let tsv = frobenius_tsv(&outs);
            let rendered = render(&outs, tsv)?;
            finish(cli, "frobenius", rendered, &hash_input, precision, argv, started)
        }
        Command::Coleman(args) => {
            let (out, hash_input) = run_coleman(args, cli.precision)?;
            let precision = Some(out.precision);
            let tsv = coleman_tsv(&out);
            let rendered = render(&out, tsv)?;
            finish(cli, "coleman", rendered, &hash_input, precision, argv, started)
        }
        Command::Stoll(args) => {
            let (out, hash_input) = run_stoll(args, cli.precision)?;
            let tsv = stoll_tsv(&out);
            let rendered = render(&out, tsv)?;
            finish(cli, "stoll", rendered, &hash_input, None, argv, started)
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    let started = Instant::now();
    match run(&cli, &argv, started) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.msg);
            ExitCode::from(e.code)
        }
    }
}
