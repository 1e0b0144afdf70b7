//! Command-line front end: figure data, tables, thresholds and bound reports.
//!
//! Every artifact starts with a header that records the resolved invocation,
//! so re-running the recorded command reproduces the output byte for byte.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Map, Value};

use qdep::bounds::{bound_report, ExponentPair};
use qdep::copula::{fgm_upper_mixture, frechet_mixture};
use qdep::dependence::{
    classify_qd, classify_qde, kappa_constant, qd_qde_thresholds, qde_curve, sign_surface,
    zero_curve_analysis, DEFAULT_GRID, DEFAULT_TOL,
};
use qdep::extremal::{central_moment_bound, solve_extremum, write_kp_table, MeanInfo};
use qdep::models::{construct_pqde_marginal, threshold_cov};
use qdep::numerics::linspace;
use qdep::oracle::{covariance_estimate, estimate_cov, sample, SampleSpec};
use qdep::{Copula, Distortion, JointModel, Marginal};

const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Monte Carlo sample size used by `example3`.
const EXAMPLE3_SAMPLES: usize = 200_000;

#[derive(Debug, Parser)]
#[command(
    name = "qdep",
    version,
    about = "Quadrant dependence in expectation and covariance bounds"
)]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sign lattice of C(u,v) - uv as CSV or PGM.
    Surface(SurfaceArgs),
    /// The curve v -> ∫ (C(u,v) - uv) du as CSV.
    QdeCurve(QdeCurveArgs),
    /// QD and QDE verdicts with witnesses.
    Classify(ClassifyArgs),
    /// Mixing-weight thresholds m <= m' <= M' <= M.
    Thresholds(ThresholdArgs),
    /// Exact covariance next to the classical, QDE and regression bounds.
    Bounds(BoundsArgs),
    /// Maximizer and maximum of κ_p for a range of integer p.
    KpTable(KpTableArgs),
    /// Sharp bound on E|X - EX|^p for X supported in [a, A].
    MomentBound(MomentArgs),
    /// Discrete marginal making U PQDE on Y under a non-QD Archimedean copula.
    Example3(Example3Args),
    /// Monte Carlo estimate of Cov[X, β(Y)] against quadrature.
    McCheck(McCheckArgs),
}

#[derive(Debug, Clone, Args)]
struct FamilyArgs {
    /// frechet-lower, frechet-upper, independence, fgm, gg-archimedean (or gg),
    /// mix:frechet, mix:fgm-fu
    #[arg(long)]
    family: String,
    #[arg(long)]
    alpha: Option<f64>,
    /// FGM parameter; falls back to --alpha when omitted.
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct SurfaceArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value_t = 400)]
    grid: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct QdeCurveArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value_t = 201)]
    points: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct ClassifyArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    grid: usize,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct ThresholdArgs {
    /// mix:frechet or mix:fgm-fu
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct BoundsArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// identity, power:K or piecewise:x0:y0,x1:y1,...
    #[arg(long, default_value = "identity")]
    beta: String,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct KpTableArgs {
    /// Inclusive integer range LO..HI, or a single value.
    #[arg(long)]
    p: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
#[command(group(ArgGroup::new("mean").required(true).args(["mu", "mu_lo", "unknown_mean", "symmetric"])))]
struct MomentArgs {
    #[arg(long = "a")]
    lower: f64,
    #[arg(long = "A")]
    upper: f64,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long, requires = "mu_hi")]
    mu_lo: Option<f64>,
    #[arg(long, requires = "mu_lo")]
    mu_hi: Option<f64>,
    #[arg(long)]
    unknown_mean: bool,
    #[arg(long)]
    symmetric: bool,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct Example3Args {
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
struct McCheckArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, default_value = "identity")]
    beta: String,
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

/// Malformed input that clap cannot catch, reported with exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Runs the CLI on `argv` (program name first) and returns the exit code:
/// 0 on success, 1 on domain or I/O errors, 2 on usage errors.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match execute(cli.command, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                2
            } else {
                1
            }
        }
    }
}

/// Resolved flags in invocation order.
struct Header {
    command: &'static str,
    flags: Vec<(&'static str, Option<String>)>,
}

impl Header {
    fn new(command: &'static str) -> Self {
        Self {
            command,
            flags: Vec::new(),
        }
    }

    fn flag(mut self, name: &'static str, value: impl ToString) -> Self {
        self.flags.push((name, Some(value.to_string())));
        self
    }

    fn switch(mut self, name: &'static str) -> Self {
        self.flags.push((name, None));
        self
    }

    fn family(mut self, f: &ResolvedFamily) -> Self {
        self.flags.push(("family", Some(f.id.clone())));
        if let Some(a) = f.alpha {
            self.flags.push(("alpha", Some(a.to_string())));
        }
        if let Some(t) = f.theta {
            self.flags.push(("theta", Some(t.to_string())));
        }
        self
    }

    fn invocation(&self) -> String {
        let mut s = format!("qdep {}", self.command);
        for (k, v) in &self.flags {
            s.push_str(&format!(" --{k}"));
            if let Some(v) = v {
                s.push_str(&format!(" {v}"));
            }
        }
        s
    }

    fn comment(&self) -> String {
        format!("qdep {VERSION} | {}", self.invocation())
    }

    fn to_json(&self) -> Value {
        let mut flags = Map::new();
        for (k, v) in &self.flags {
            flags.insert(
                (*k).to_string(),
                v.as_ref()
                    .map_or(Value::Bool(true), |s| Value::String(s.clone())),
            );
        }
        let seed = self
            .flags
            .iter()
            .find(|(k, _)| *k == "seed")
            .and_then(|(_, v)| v.as_ref()?.parse::<u64>().ok());
        json!({
            "command": self.command,
            "version": VERSION,
            "flags": flags,
            "seed": seed,
            "invocation": self.invocation(),
        })
    }
}

#[derive(Debug)]
struct ResolvedFamily {
    id: String,
    alpha: Option<f64>,
    theta: Option<f64>,
    copula: Copula,
}

fn require_alpha(f: &FamilyArgs) -> Result<f64> {
    f.alpha
        .ok_or_else(|| usage(format!("--alpha is required for family '{}'", f.family)))
}

fn resolve_family(f: &FamilyArgs) -> Result<ResolvedFamily> {
    let plain = |copula| ResolvedFamily {
        id: f.family.clone(),
        alpha: None,
        theta: None,
        copula,
    };
    let with_alpha = |copula: qdep::Result<Copula>, alpha| -> Result<ResolvedFamily> {
        Ok(ResolvedFamily {
            id: f.family.clone(),
            alpha: Some(alpha),
            theta: None,
            copula: copula?,
        })
    };
    match f.family.as_str() {
        "frechet-lower" => Ok(plain(Copula::frechet_lower())),
        "frechet-upper" => Ok(plain(Copula::frechet_upper())),
        "independence" => Ok(plain(Copula::independence())),
        "fgm" => {
            let theta = f
                .theta
                .or(f.alpha)
                .ok_or_else(|| usage("--theta is required for family 'fgm'"))?;
            Ok(ResolvedFamily {
                id: f.family.clone(),
                alpha: None,
                theta: Some(theta),
                copula: Copula::fgm(theta)?,
            })
        }
        "gg" | "gg-archimedean" => {
            let a = require_alpha(f)?;
            with_alpha(Copula::gg_archimedean(a), a)
        }
        "mix:frechet" => {
            let a = require_alpha(f)?;
            with_alpha(frechet_mixture(a), a)
        }
        "mix:fgm-fu" => {
            let a = require_alpha(f)?;
            with_alpha(fgm_upper_mixture(a), a)
        }
        other => Err(usage(format!("unknown family '{other}'"))),
    }
}

fn parse_beta(spec: &str) -> Result<Distortion> {
    spec.parse::<Distortion>().map_err(|e| usage(e.to_string()))
}

fn emit_json<W: Write>(out: &mut W, header: &Header, body: Value) -> Result<()> {
    let mut doc = Map::new();
    doc.insert("header".into(), header.to_json());
    match body {
        Value::Object(m) => doc.extend(m),
        other => {
            doc.insert("result".into(), other);
        }
    }
    serde_json::to_writer_pretty(&mut *out, &Value::Object(doc))?;
    writeln!(out)?;
    Ok(())
}

fn to_object<T: Serialize>(v: &T) -> Result<Map<String, Value>> {
    match serde_json::to_value(v)? {
        Value::Object(m) => Ok(m),
        _ => unreachable!("reports serialize to objects"),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn execute<W: Write>(cmd: Command, out: &mut W) -> Result<()> {
    match cmd {
        Command::Surface(a) => cmd_surface(a, out),
        Command::QdeCurve(a) => cmd_qde_curve(a, out),
        Command::Classify(a) => cmd_classify(a, out),
        Command::Thresholds(a) => cmd_thresholds(a, out),
        Command::Bounds(a) => cmd_bounds(a, out),
        Command::KpTable(a) => cmd_kp_table(a, out),
        Command::MomentBound(a) => cmd_moment_bound(a, out),
        Command::Example3(a) => cmd_example3(a, out),
        Command::McCheck(a) => cmd_mc_check(a, out),
    }
}

fn cmd_surface<W: Write>(a: SurfaceArgs, out: &mut W) -> Result<()> {
    let fam = resolve_family(&a.family)?;
    let header = Header::new("surface")
        .family(&fam)
        .flag("grid", a.grid)
        .flag("tol", a.tol)
        .flag("out", a.out.display());
    let pgm = match a.out.extension().and_then(|e| e.to_str()) {
        Some("csv") => false,
        Some("pgm") => true,
        _ => return Err(usage("--out must end in .csv or .pgm")),
    };
    let grid = sign_surface(&fam.copula, a.grid, a.tol)?;
    let mut file = create(&a.out)?;
    if pgm {
        grid.write_pgm(&mut file, Some(&header.comment()))?;
    } else {
        writeln!(file, "# {}", header.comment())?;
        grid.write_csv(&mut file)?;
    }
    file.flush()?;
    let [neg, zero, pos] = grid.counts();
    emit_json(
        out,
        &header,
        json!({ "negative": neg, "zero": zero, "positive": pos }),
    )
}

fn cmd_qde_curve<W: Write>(a: QdeCurveArgs, out: &mut W) -> Result<()> {
    if a.points < 2 {
        return Err(usage("--points must be at least 2"));
    }
    let fam = resolve_family(&a.family)?;
    let header = Header::new("qde-curve")
        .family(&fam)
        .flag("points", a.points)
        .flag("out", a.out.display());
    let curve = qde_curve(&fam.copula, &linspace(0.0, 1.0, a.points))?;
    let mut file = create(&a.out)?;
    writeln!(file, "# {}", header.comment())?;
    writeln!(file, "v,qde")?;
    for (v, c) in &curve {
        writeln!(file, "{v:.16e},{c:.16e}")?;
    }
    file.flush()?;
    let (lo, hi) = curve
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), (_, c)| {
            (l.min(*c), h.max(*c))
        });
    emit_json(
        out,
        &header,
        json!({ "points": curve.len(), "min": lo, "max": hi }),
    )
}

fn cmd_classify<W: Write>(a: ClassifyArgs, out: &mut W) -> Result<()> {
    let fam = resolve_family(&a.family)?;
    let header = Header::new("classify")
        .family(&fam)
        .flag("grid", a.grid)
        .flag("tol", a.tol);
    let qd = classify_qd(&fam.copula, a.grid, a.tol)?;
    let qde = classify_qde(&fam.copula, a.grid + 1, a.tol)?;
    let mut body = Map::new();
    body.insert("copula".into(), Value::String(fam.copula.label()));
    body.insert("qd".into(), serde_json::to_value(&qd)?);
    body.insert("qde".into(), serde_json::to_value(&qde)?);
    if fam.id == "mix:fgm-fu" {
        let zc = zero_curve_analysis(fam.alpha.expect("mixture has alpha"))?;
        body.insert("zero_curves".into(), serde_json::to_value(zc)?);
    }
    emit_json(out, &header, Value::Object(body))
}

fn cmd_thresholds<W: Write>(a: ThresholdArgs, out: &mut W) -> Result<()> {
    let (c0, c1) = match a.family.as_str() {
        "mix:frechet" => (Copula::frechet_lower(), Copula::frechet_upper()),
        "mix:fgm-fu" => (Copula::fgm(-1.0)?, Copula::frechet_upper()),
        other => {
            return Err(usage(format!(
                "thresholds needs mix:frechet or mix:fgm-fu, got '{other}'"
            )))
        }
    };
    let header = Header::new("thresholds")
        .flag("family", &a.family)
        .flag("tol", a.tol);
    let report = qd_qde_thresholds(&c0, &c1, a.tol)?;
    let kappa = kappa_constant(&c0, &c1, 99, 1e-8)?;
    let mut body = to_object(&report)?;
    body.insert("kappa".into(), serde_json::to_value(kappa)?);
    body.insert(
        "note".into(),
        Value::String(
            "m and M are extremes of (uv - C0)/(C1 - C0) over a refined lattice; \
             m_prime and M_prime are extremes of the QDE-curve ratio"
                .into(),
        ),
    );
    emit_json(out, &header, Value::Object(body))
}

fn cmd_bounds<W: Write>(a: BoundsArgs, out: &mut W) -> Result<()> {
    let fam = resolve_family(&a.family)?;
    let beta = parse_beta(&a.beta)?;
    let pq = ExponentPair::new(a.p).map_err(|e| usage(e.to_string()))?;
    let header = Header::new("bounds")
        .family(&fam)
        .flag("p", a.p)
        .flag("beta", &beta);
    let report = bound_report(&JointModel::uniform(fam.copula), &beta, pq, None)?;
    let mut body = to_object(&report)?;
    body.insert(
        "notes".into(),
        json!({ "corr_form": "valid only when X has a linear regression on Y" }),
    );
    emit_json(out, &header, Value::Object(body))
}

fn parse_p_range(spec: &str) -> Result<(u32, u32)> {
    let parse = |s: &str| {
        s.trim()
            .parse::<u32>()
            .map_err(|_| usage(format!("bad p bound '{s}' in '{spec}'")))
    };
    let (lo, hi) = match spec.split_once("..") {
        Some((l, h)) => (parse(l)?, parse(h)?),
        None => {
            let v = parse(spec)?;
            (v, v)
        }
    };
    if lo < 1 || lo > hi {
        return Err(usage(format!(
            "p range must satisfy 1 <= LO <= HI, got '{spec}'"
        )));
    }
    Ok((lo, hi))
}

fn cmd_kp_table<W: Write>(a: KpTableArgs, out: &mut W) -> Result<()> {
    let (lo, hi) = parse_p_range(&a.p)?;
    let mut header = Header::new("kp-table").flag("p", format!("{lo}..{hi}"));
    if let Some(path) = &a.out {
        header = header.flag("out", path.display());
    }
    let rows = (lo..=hi)
        .map(|p| solve_extremum(p as f64))
        .collect::<qdep::Result<Vec<_>>>()?;
    let mut buf = Vec::new();
    writeln!(buf, "# {}", header.comment())?;
    write_kp_table(&mut buf, &rows)?;
    match &a.out {
        Some(path) => {
            let mut f = create(path)?;
            f.write_all(&buf)?;
            f.flush()?;
        }
        None => out.write_all(&buf)?,
    }
    Ok(())
}

fn cmd_moment_bound<W: Write>(a: MomentArgs, out: &mut W) -> Result<()> {
    let header = Header::new("moment-bound")
        .flag("a", a.lower)
        .flag("A", a.upper)
        .flag("p", a.p);
    let (info, header, label) = if let Some(mu) = a.mu {
        (
            MeanInfo::Exact(mu),
            header.flag("mu", mu),
            json!({ "exact": mu }),
        )
    } else if let (Some(l), Some(h)) = (a.mu_lo, a.mu_hi) {
        (
            MeanInfo::Interval(l, h),
            header.flag("mu-lo", l).flag("mu-hi", h),
            json!({ "interval": [l, h] }),
        )
    } else if a.symmetric {
        (
            MeanInfo::Symmetric,
            header.switch("symmetric"),
            json!("symmetric"),
        )
    } else {
        (
            MeanInfo::Unknown,
            header.switch("unknown-mean"),
            json!("unknown"),
        )
    };
    let bound = central_moment_bound(a.lower, a.upper, a.p, info)?;
    emit_json(out, &header, json!({ "mean_info": label, "bound": bound }))
}

#[derive(Serialize)]
struct AtomReport {
    y: f64,
    level: f64,
    threshold_cov: f64,
    mc_estimate: f64,
    mc_std_error: f64,
    z_score: f64,
    /// Extremes of C(u, G(y)) - u G(y) over u, showing the pair is not QD.
    min_surface: f64,
    max_surface: f64,
}

fn cmd_example3<W: Write>(a: Example3Args, out: &mut W) -> Result<()> {
    let header = Header::new("example3")
        .flag("alpha", a.alpha)
        .flag("k", a.k)
        .flag("seed", a.seed);
    let copula = Copula::gg_archimedean(a.alpha)?;
    let qd = classify_qd(&copula, DEFAULT_GRID, DEFAULT_TOL)?;
    let qde = classify_qde(&copula, DEFAULT_GRID + 1, DEFAULT_TOL)?;
    let built = construct_pqde_marginal(a.alpha, a.k)?;
    let jm = JointModel::new(
        copula.clone(),
        Marginal::UniformUnit,
        Marginal::FiniteDiscrete(built.marginal.clone()),
    );

    let samples = sample(&jm, SampleSpec::new(EXAMPLE3_SAMPLES, a.seed))?;
    let xs: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let levels = built.marginal.cumulative();
    let us = linspace(0.0, 1.0, 2001);
    let mut atoms = Vec::new();
    for (&y, &g) in built.marginal.points().iter().zip(&levels) {
        let exact = threshold_cov(&jm, y)?;
        let ind: Vec<f64> = samples
            .iter()
            .map(|s| if s.1 > y { 1.0 } else { 0.0 })
            .collect();
        let est = covariance_estimate(&xs, &ind);
        let surface: Vec<f64> = us.iter().map(|&u| copula.value(u, g) - u * g).collect();
        atoms.push(AtomReport {
            y,
            level: g,
            threshold_cov: exact,
            mc_estimate: est.estimate,
            mc_std_error: est.std_error,
            z_score: if est.std_error > 0.0 {
                est.z_score(exact)
            } else {
                0.0
            },
            min_surface: surface.iter().copied().fold(f64::INFINITY, f64::min),
            max_surface: surface.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        });
    }
    let pqde = atoms.iter().all(|r| r.threshold_cov >= 0.0);
    let pair_not_qd = atoms.iter().any(|r| r.min_surface < -DEFAULT_TOL);
    let body = json!({
        "copula": copula.label(),
        "copula_qd": qd,
        "copula_qde": qde,
        "marginal": built.marginal,
        "interval": [built.interval.0, built.interval.1],
        "partial_sums": built.partial_sums,
        "mc_samples": EXAMPLE3_SAMPLES,
        "atoms": atoms,
        "pair_pqde": pqde,
        "pair_not_pqd": pair_not_qd,
    });
    emit_json(out, &header, body)
}

fn cmd_mc_check<W: Write>(a: McCheckArgs, out: &mut W) -> Result<()> {
    let fam = resolve_family(&a.family)?;
    let beta = parse_beta(&a.beta)?;
    if a.n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    let header = Header::new("mc-check")
        .family(&fam)
        .flag("beta", &beta)
        .flag("n", a.n)
        .flag("seed", a.seed);
    let jm = JointModel::uniform(fam.copula);
    let est = estimate_cov(&jm, &beta, SampleSpec::new(a.n, a.seed))?;
    let quad = qdep::bounds::hoeffding_cov(&jm, &beta)?;
    emit_json(
        out,
        &header,
        json!({
            "estimate": est.estimate,
            "std_error": est.std_error,
            "quadrature": quad,
            "z_score": est.z_score(quad),
        }),
    )
}
