//! Command-line experiment runner.
//!
//! Every subcommand produces one artifact, printed to stdout or written to
//! `--out`, as JSON (default) or CSV. Failures print a one-line JSON error to
//! stderr and exit with 2 (invalid configuration), 3 (capacity guard) or 4
//! (consistency failure).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::abelian::{abelian_row, moments, success_probability, SubsetSumTable};
use crate::error::{Error, Result};
use crate::group::Group;
use crate::iso::{find_isomorphism, find_shift_bruteforce, is_rigid, make_shift_oracles, states_from_oracles, Graph};
use crate::linalg::CMat;
use crate::measure::{
    adversarial_povms, indistinguishability_sweep, random_povm, single_register_distributions, tv_distance,
    weak_sample_distribution, weighted_variance_sum, Povm,
};
use crate::par;
use crate::rep::cache::{default_cache_dir, irreps_cached};
use crate::rep::{irreps, plancherel, tensor_rep, trivial_multiplicity, Irrep};
use crate::report::{blocks_json, clusters_json, spectrum_rows, CsvTable, SPECTRUM_COLUMNS};
use crate::shift::{
    averaged_single_block, block_sweep, gamma1_blocks, gamma1_dense, gamma2, square_block_check,
    sweep_spectrum, Form, Variant,
};
use crate::verify::{failures, verify_all};

/// Largest group order for which `weak-sample` lists every shift.
pub const WEAK_SAMPLE_ORDER_LIMIT: usize = 720;
/// Largest irrep dimension used by `variance-bound`.
pub const VARIANCE_DIM_LIMIT: usize = 8;
/// Largest `η` table printed in full by `subset-sum`.
pub const ETA_TABLE_ROWS: usize = 1024;

#[derive(Debug, Parser)]
#[command(name = "hslab", version, about = "Hidden-shift state laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Group descriptor: Sn, Zm or a product such as Z2xZ4.
    #[arg(long, global = true, default_value = "S3")]
    pub group: String,
    /// Number of copies.
    #[arg(long, global = true, default_value_t = 1)]
    pub k: usize,
    /// Base seed; trial t uses seed + t.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of random trials.
    #[arg(long, global = true, default_value_t = 100)]
    pub trials: usize,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Irrep cache directory; defaults to $HSLAB_CACHE, else a temp subdirectory.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Block spectra of the averaged (or fixed-shift) state.
    Spectrum {
        /// Fixed shift index instead of the average over shifts.
        #[arg(long)]
        shift: Option<usize>,
    },
    /// Numeric rank against the closed form.
    Rank,
    /// Subset-sum counts, moments and success probability (abelian groups).
    SubsetSum,
    /// Optimal success probability against the maximally mixed state.
    Helstrom,
    /// Irrep-label distribution under weak Fourier sampling (k = 1).
    WeakSample,
    /// Weighted outcome variance against 1/d² for random and adversarial POVMs.
    VarianceBound,
    /// Distance statistics for random irreps, shifts and POVMs.
    Sweep,
    /// Oracle construction and shift recovery for two graphs.
    Iso {
        /// First graph: a file path or inline `n:u-v,...[:c1,c2,...]`.
        #[arg(long)]
        a: String,
        /// Second graph, same formats.
        #[arg(long)]
        b: String,
    },
    /// Full invariant suite for the group.
    VerifyAll,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum { .. } => "spectrum",
            Command::Rank => "rank",
            Command::SubsetSum => "subset-sum",
            Command::Helstrom => "helstrom",
            Command::WeakSample => "weak-sample",
            Command::VarianceBound => "variance-bound",
            Command::Sweep => "sweep",
            Command::Iso { .. } => "iso",
            Command::VerifyAll => "verify-all",
        }
    }
}

/// Validated configuration. Output path, cache directory and thread count do
/// not change results and are left out of the artifact header.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub command: Command,
    pub group: Group,
    pub k: usize,
    pub seed: u64,
    pub trials: usize,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub cache_dir: PathBuf,
    pub threads: Option<usize>,
}

#[derive(Serialize)]
struct HeaderConfig<'a> {
    command: &'a Command,
    group: String,
    k: usize,
    seed: u64,
    trials: usize,
    format: Format,
}

impl ExperimentConfig {
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let c = cli.common;
        let group = Group::parse(&c.group)?;
        if c.k == 0 {
            return Err(Error::domain("--k must be at least 1"));
        }
        if c.trials == 0 {
            return Err(Error::domain("--trials must be at least 1"));
        }
        if c.threads == Some(0) {
            return Err(Error::domain("--threads must be at least 1"));
        }
        if let Command::Spectrum { shift: Some(s) } = cli.command {
            if s >= group.order() {
                return Err(Error::domain(format!("--shift {s} is not an element of {}", group.descriptor())));
            }
        }
        Ok(ExperimentConfig {
            command: cli.command,
            group,
            k: c.k,
            seed: c.seed,
            trials: c.trials,
            out: c.out,
            format: c.format,
            cache_dir: c.cache_dir.unwrap_or_else(default_cache_dir),
            threads: c.threads,
        })
    }

    fn header(&self) -> String {
        serde_json::to_string(&HeaderConfig {
            command: &self.command,
            group: self.group.descriptor().to_string(),
            k: self.k,
            seed: self.seed,
            trials: self.trials,
            format: self.format,
        })
        .unwrap_or_default()
    }

    fn irreps(&self) -> Result<Vec<Irrep>> {
        match irreps_cached(&self.group, &self.cache_dir) {
            Err(Error::Io(_)) => irreps(&self.group),
            r => r,
        }
    }
}

/// What a subcommand produced.
pub struct Artifact {
    pub summary: String,
    pub json: Value,
    pub table: CsvTable,
    /// Set when the artifact records failed checks.
    pub failed: Option<String>,
}

impl Artifact {
    fn render(&self, config: &ExperimentConfig) -> Result<String> {
        match config.format {
            Format::Json => {
                let doc = json!({
                    "tool": "hslab",
                    "version": crate::report::TOOL_VERSION,
                    "config": serde_json::from_str::<Value>(&config.header()).unwrap_or(Value::Null),
                    "summary": self.summary,
                    "result": self.json,
                });
                let mut s = serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(std::io::Error::other(e)))?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => {
                let mut s = format!("# summary: {}\n", self.summary);
                s.push_str(&self.table.render(&config.header()));
                Ok(s)
            }
        }
    }
}

/// Runs one validated configuration and writes its artifact.
pub fn run(config: &ExperimentConfig) -> Result<()> {
    let artifact = compute(config)?;
    let text = artifact.render(config)?;
    match &config.out {
        Some(path) => std::fs::write(path, text)?,
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    match artifact.failed {
        Some(msg) => Err(Error::consistency(msg)),
        None => Ok(()),
    }
}

pub fn compute(config: &ExperimentConfig) -> Result<Artifact> {
    match &config.command {
        Command::Spectrum { shift } => spectrum(config, *shift),
        Command::Rank => rank(config),
        Command::SubsetSum => subset_sum(config),
        Command::Helstrom => helstrom_cmd(config),
        Command::WeakSample => weak_sample(config),
        Command::VarianceBound => variance_bound(config),
        Command::Sweep => sweep(config),
        Command::Iso { a, b } => iso(config, a, b),
        Command::VerifyAll => verify(config),
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity(_) => 3,
        Error::Consistency(_) => 4,
        Error::Domain(_) | Error::Parse(_) | Error::Io(_) => 2,
    }
}

pub fn error_json(kind: &str, code: i32, message: &str) -> String {
    json!({"error": {"kind": kind, "exit_code": code, "message": message}}).to_string()
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let msg = e.kind().to_string();
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or(&msg).trim_start_matches("error: ");
            eprintln!("{}", error_json("invalid-config", 2, first));
            return 2;
        }
    };
    let result = ExperimentConfig::from_cli(cli).and_then(|config| {
        configure_threads(config.threads)?;
        run(&config)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("{}", error_json(e.kind(), code, &e.to_string()));
            code
        }
    }
}

#[cfg(feature = "parallel")]
fn configure_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        // a pool built earlier in the same process keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

#[cfg(not(feature = "parallel"))]
fn configure_threads(_threads: Option<usize>) -> Result<()> {
    Ok(())
}

fn yes_no(b: Option<bool>) -> &'static str {
    match b {
        Some(true) => "yes",
        Some(false) => "no",
        None => "n/a",
    }
}

fn ratio_f64(n: u128, d: u128) -> f64 {
    n as f64 / d as f64
}

fn spectrum(config: &ExperimentConfig, shift: Option<usize>) -> Result<Artifact> {
    let (g, k) = (&config.group, config.k);
    let reps = config.irreps()?;
    let variant = shift.map_or(Variant::Averaged, Variant::Fixed);
    let sweep = block_sweep(g, &reps, k, variant)?;
    let state = sweep_spectrum(g, k, &sweep);
    let dimension = (2 * g.order()).pow(k as u32);
    let mut result = json!({
        "group": g.descriptor().to_string(),
        "k": k,
        "variant": variant.to_string(),
        "dimension": dimension,
        "rank": state.rank,
        "state_spectrum": clusters_json(&state),
        "blocks": blocks_json(&reps, &sweep),
    });
    if variant == Variant::Averaged && k == 1 {
        let rows = reps
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let b = averaged_single_block(g, &reps, i)?;
                let deviation = if r.is_trivial() {
                    let v = crate::linalg::eigvalsh(&b);
                    (v[0] - 2.0).abs().max(v[1].abs())
                } else {
                    b.max_abs_diff(&CMat::identity(2 * r.dim))
                };
                Ok(json!({
                    "irrep": r.label.to_string(),
                    "expected": if r.is_trivial() { "spectrum {2, 0}" } else { "identity" },
                    "max_deviation": deviation,
                    "holds": deviation <= 1e-10,
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        result["single_blocks"] = Value::Array(rows);
    }
    if variant == Variant::Averaged && k == 2 {
        let rows = reps
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.is_trivial())
            .map(|(i, r)| {
                let c = square_block_check(g, &reps, i)?;
                let predicted = trivial_multiplicity(&tensor_rep(r, r)) == 1;
                Ok(json!({
                    "irrep": r.label.to_string(),
                    "trivial_in_square": c.trivial_multiplicity,
                    "pattern": if predicted { "{2, 1±1/d, 1, 0}" } else { "{1±1/d, 1}" },
                    "max_deviation": c.max_deviation,
                    "matches": c.matches(1e-8),
                }))
            })
            .collect::<Result<Vec<_>>>()?;
        result["square_blocks"] = Value::Array(rows);
    }
    let rows = spectrum_rows(g, &reps, k, &sweep);
    Ok(Artifact {
        summary: format!(
            "{} k={k} {variant}: rank {} of {dimension}, {} blocks",
            g.descriptor(),
            state.rank,
            sweep.len()
        ),
        json: result,
        table: CsvTable::from_rows(SPECTRUM_COLUMNS.to_vec(), &rows)?,
        failed: None,
    })
}

#[derive(Serialize)]
struct RankRow {
    group: String,
    k: usize,
    rank: u64,
    closed_form: Option<u64>,
    matches_closed_form: &'static str,
    counted_rank: Option<u64>,
}

fn rank(config: &ExperimentConfig) -> Result<Artifact> {
    let (g, k) = (&config.group, config.k);
    let reps = config.irreps()?;
    let report = crate::shift::rank_gamma1(g, &reps, k)?;
    let counted = if g.is_abelian() {
        match crate::abelian::rank_tilde_gamma1(g, k) {
            Ok(r) => Some(r),
            Err(Error::Capacity(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let row = RankRow {
        group: g.descriptor().to_string(),
        k,
        rank: report.numeric,
        closed_form: report.closed_form,
        matches_closed_form: yes_no(report.matches()),
        counted_rank: counted,
    };
    let json = serde_json::to_value(&row).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let failed = match (report.matches(), counted) {
        (Some(false), _) => Some("numeric rank differs from the closed form".to_string()),
        (_, Some(c)) if c != report.numeric => Some("numeric rank differs from the subset-sum count".to_string()),
        _ => None,
    };
    Ok(Artifact {
        summary: format!(
            "rank {}; matches closed form: {}",
            report.numeric,
            yes_no(report.matches())
        ),
        json,
        table: CsvTable::from_rows(
            vec![
                ("group", "group descriptor"),
                ("k", "number of copies"),
                ("rank", "numeric rank of the averaged state (rank_gamma1)"),
                ("closed_form", "closed-form rank for k <= 2 (closed_form_rank)"),
                ("matches_closed_form", "rank == closed_form"),
                ("counted_rank", "rank from subset-sum counts, abelian only (rank_tilde_gamma1)"),
            ],
            &[row],
        )?,
        failed,
    })
}

fn subset_sum(config: &ExperimentConfig) -> Result<Artifact> {
    let (g, k) = (&config.group, config.k);
    let row = abelian_row(g, k)?;
    let m = moments(g, k)?;
    let s = success_probability(g, k)?;
    let mut result = json!({
        "group": row.group,
        "k": k,
        "rank": s.rank,
        "moments": {
            "mu": m.mu.to_string(),
            "second": m.second.to_string(),
            "variance": m.variance.to_string(),
            "counted_mu": m.counted_mu.to_string(),
            "counted_second": m.counted_second.to_string(),
            "method": m.method,
            "matches": m.matches(),
        },
        "success": {
            "probability": s.probability.to_string(),
            "probability_f64": ratio_f64(*s.probability.numer(), *s.probability.denom()),
            "bound_half_one_plus_order_over_2k": s.bound.to_string(),
            "within_bound": s.within_bound(),
            "second_moment_bound": s.moment_bound.to_string(),
            "within_second_moment_bound": s.within_moment_bound(),
        },
    });
    let rows = (g.order() as u128).checked_pow(k as u32);
    if rows.is_some_and(|r| r <= ETA_TABLE_ROWS as u128) {
        let table = SubsetSumTable::new(g, k)?;
        let eta: Vec<Value> = (0..table.rows()).map(|x| json!(table.row(x))).collect();
        result["eta"] = Value::Array(eta);
    }
    let failed = (!m.matches()).then(|| "counted moments differ from the closed forms".to_string());
    Ok(Artifact {
        summary: format!(
            "{} k={k}: rank {}, E[eta] = {}, E[eta^2] = {}, success {}",
            g.descriptor(),
            s.rank,
            m.counted_mu,
            m.counted_second,
            s.probability
        ),
        json: result,
        table: CsvTable::from_rows(
            vec![
                ("group", "group descriptor"),
                ("k", "number of copies"),
                ("rank", "support size of the subset-sum table (rank_tilde_gamma1)"),
                ("mu_num", "numerator of E[eta] (moments)"),
                ("mu_den", "denominator of E[eta] (moments)"),
                ("m2_num", "numerator of E[eta^2] (moments)"),
                ("m2_den", "denominator of E[eta^2] (moments)"),
                ("success_num", "numerator of 1 - rank/(2(2|G|)^k) (success_probability)"),
                ("success_den", "denominator of the success probability"),
            ],
            &[row],
        )?,
        failed,
    })
}

/// Largest dimension for the dense cross-check in `helstrom`.
const HELSTROM_DENSE_DIM: usize = 512;

#[derive(Serialize)]
struct HelstromRow {
    group: String,
    k: usize,
    success: f64,
    trace_norm: f64,
    dense_success: Option<f64>,
    rank_formula: Option<String>,
}

fn helstrom_cmd(config: &ExperimentConfig) -> Result<Artifact> {
    let (g, k) = (&config.group, config.k);
    let reps = config.irreps()?;
    // both states are block diagonal in the Fourier basis and the mixed
    // state is the identity there, so the trace norm splits over blocks
    let sweep = block_sweep(g, &reps, k, Variant::Averaged)?;
    let scale = (2.0 * g.order() as f64).powi(-(k as i32));
    let trace_norm: f64 = sweep
        .iter()
        .map(|b| b.multiplicity as f64 * b.eigenvalues.iter().map(|v| (v - 1.0).abs()).sum::<f64>())
        .sum::<f64>()
        * scale;
    let success = 0.5 + 0.25 * trace_norm;
    let dim = (2 * g.order()).checked_pow(k as u32).unwrap_or(usize::MAX);
    let dense_success = if dim <= HELSTROM_DENSE_DIM {
        let a = crate::shift::gamma1_averaged(g, &reps, k, Form::Dense)?;
        let b = gamma2(g, &reps, k, Form::Dense)?;
        match (a.dense(), b.dense()) {
            (Some(a), Some(b)) => Some(crate::measure::helstrom(a, b)?.success),
            _ => None,
        }
    } else {
        None
    };
    let rank_formula = if g.is_abelian() {
        match success_probability(g, k) {
            Ok(s) => Some(s.probability.to_string()),
            Err(Error::Capacity(_)) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };
    let failed = dense_success
        .filter(|d| (d - success).abs() > 1e-9)
        .map(|d| format!("dense success {d} differs from the block value {success}"));
    let row = HelstromRow {
        group: g.descriptor().to_string(),
        k,
        success,
        trace_norm,
        dense_success,
        rank_formula,
    };
    let json = serde_json::to_value(&row).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    Ok(Artifact {
        summary: format!("{} k={k}: optimal success {success:.12}", g.descriptor()),
        json,
        table: CsvTable::from_rows(
            vec![
                ("group", "group descriptor"),
                ("k", "number of copies"),
                ("success", "1/2 + trace norm/4 from block spectra (block_sweep)"),
                ("trace_norm", "trace norm of averaged minus mixed state (block_sweep)"),
                ("dense_success", "Helstrom measurement on dense states, small dimensions (helstrom)"),
                ("rank_formula", "1 - rank/(2(2|G|)^k), abelian only (success_probability)"),
            ],
            &[row],
        )?,
        failed,
    })
}

#[derive(Serialize)]
struct WeakRow {
    state: String,
    irrep_label: String,
    d_rho: usize,
    probability: f64,
    plancherel: String,
}

fn weak_sample(config: &ExperimentConfig) -> Result<Artifact> {
    let g = &config.group;
    if config.k != 1 {
        return Err(Error::domain("weak-sample uses one copy; pass --k 1"));
    }
    if g.order() > WEAK_SAMPLE_ORDER_LIMIT {
        return Err(Error::capacity(format!(
            "weak-sample lists every shift; order {} exceeds {WEAK_SAMPLE_ORDER_LIMIT}",
            g.order()
        )));
    }
    let reps = config.irreps()?;
    let plan = plancherel(g, &reps);
    let target: Vec<f64> = plan
        .iter()
        .map(|p| *p.probability.numer() as f64 / *p.probability.denom() as f64)
        .collect();
    let mut states = vec![("mixed".to_string(), gamma2(g, &reps, 1, Form::Blocks)?)];
    for s in g.elements() {
        states.push((format!("shift {s}"), gamma1_blocks(g, &reps, s, 1)?));
    }
    let mut rows = Vec::new();
    let mut max_tv: f64 = 0.0;
    for (name, state) in &states {
        let d = weak_sample_distribution(state, &reps)?;
        max_tv = max_tv.max(tv_distance(&d.probabilities, &target)?.tv);
        for ((p, r), entry) in d.probabilities.iter().zip(&reps).zip(&plan) {
            rows.push(WeakRow {
                state: name.clone(),
                irrep_label: r.label.to_string(),
                d_rho: r.dim,
                probability: *p,
                plancherel: entry.probability.to_string(),
            });
        }
    }
    let failed = (max_tv > 1e-12).then(|| format!("label distribution is {max_tv:e} from Plancherel"));
    Ok(Artifact {
        summary: format!("{}: {} states, max TV to Plancherel {max_tv:.3e}", g.descriptor(), states.len()),
        json: json!({
            "group": g.descriptor().to_string(),
            "max_tv_to_plancherel": max_tv,
            "rows": serde_json::to_value(&rows).map_err(|e| Error::Io(std::io::Error::other(e)))?,
        }),
        table: CsvTable::from_rows(
            vec![
                ("state", "mixed state or fixed shift index"),
                ("irrep_label", "irrep"),
                ("d_rho", "irrep dimension"),
                ("probability", "label probability (weak_sample_distribution)"),
                ("plancherel", "exact d^2/|G| (plancherel)"),
            ],
            &rows,
        )?,
        failed,
    })
}

#[derive(Serialize)]
struct VarianceRow {
    irrep_label: String,
    d_rho: usize,
    povm: String,
    povm_seed: u64,
    outcomes: usize,
    weighted_variance: f64,
    bound: f64,
    holds: bool,
    averaged_tv: f64,
}

fn variance_bound(config: &ExperimentConfig) -> Result<Artifact> {
    let g = &config.group;
    let reps = config.irreps()?;
    let mut rows = Vec::new();
    for (i, r) in reps.iter().enumerate() {
        if r.is_trivial() || r.dim > VARIANCE_DIM_LIMIT {
            continue;
        }
        let dim = 2 * r.dim;
        let bound = 1.0 / (r.dim * r.dim) as f64;
        let measure = |name: String, seed: u64, povm: &Povm| -> Result<VarianceRow> {
            let v = weighted_variance_sum(g, &reps, i, povm)?;
            let d = single_register_distributions(g, &reps, i, povm)?;
            Ok(VarianceRow {
                irrep_label: r.label.to_string(),
                d_rho: r.dim,
                povm: name,
                povm_seed: seed,
                outcomes: povm.len(),
                weighted_variance: v,
                bound,
                holds: v <= bound + 1e-9,
                averaged_tv: tv_distance(&d.p1, &d.p2)?.tv,
            })
        };
        let random = par::map_indexed(config.trials, |t| {
            let seed = config.seed.wrapping_add(t as u64);
            let outcomes = dim + t % (dim + 1);
            random_povm(dim, outcomes, seed).and_then(|p| measure("random".into(), seed, &p))
        });
        for row in random {
            rows.push(row?);
        }
        for (name, povm) in adversarial_povms(dim, config.seed)? {
            rows.push(measure(name, config.seed, &povm)?);
        }
    }
    let violations = rows.iter().filter(|r| !r.holds).count();
    let max_ratio = rows.iter().map(|r| r.weighted_variance / r.bound).fold(0.0, f64::max);
    let failed = (violations > 0).then(|| format!("{violations} POVMs exceed 1/d^2"));
    Ok(Artifact {
        summary: format!(
            "{}: {} POVMs, {violations} violations, max variance/bound {max_ratio:.6}",
            g.descriptor(),
            rows.len()
        ),
        json: json!({
            "group": g.descriptor().to_string(),
            "violations": violations,
            "max_ratio_to_bound": max_ratio,
            "rows": serde_json::to_value(&rows).map_err(|e| Error::Io(std::io::Error::other(e)))?,
        }),
        table: CsvTable::from_rows(
            vec![
                ("irrep_label", "nontrivial irrep"),
                ("d_rho", "irrep dimension"),
                ("povm", "random, basis, rotated-basis, near-singular or refined"),
                ("povm_seed", "seed of the random POVM (random_povm)"),
                ("outcomes", "number of rank-one outcomes"),
                ("weighted_variance", "sum of outcome variance over weight (weighted_variance_sum)"),
                ("bound", "1/d^2"),
                ("holds", "weighted_variance <= bound + 1e-9"),
                ("averaged_tv", "TV between averaged and mixed distributions (single_register_distributions)"),
            ],
            &rows,
        )?,
        failed,
    })
}

fn sweep(config: &ExperimentConfig) -> Result<Artifact> {
    let g = &config.group;
    let reps = config.irreps()?;
    let report = indistinguishability_sweep(g, &reps, config.trials, config.seed)?;
    let s = &report.summary;
    let median = s.tv_quantiles.iter().find(|q| q.level == 0.5).map_or(0.0, |q| q.value);
    let failed = (s.max_averaged_tv_nontrivial > 1e-12)
        .then(|| "averaged distribution differs from the mixed one on a nontrivial irrep".to_string());
    Ok(Artifact {
        summary: format!(
            "{} trials={} seed={}: median TV {median:.6}, max averaged TV nontrivial {:.3e}",
            s.group, s.trials, s.seed, s.max_averaged_tv_nontrivial
        ),
        json: json!({
            "summary": s,
            "rows": serde_json::to_value(&report.rows).map_err(|e| Error::Io(std::io::Error::other(e)))?,
        }),
        table: CsvTable::from_rows(
            vec![
                ("trial", "trial index t"),
                ("irrep_label", "Plancherel-sampled irrep (indistinguishability_sweep)"),
                ("d_rho", "irrep dimension"),
                ("shift_index", "uniform shift"),
                ("tv", "TV between fixed-shift and mixed distributions"),
                ("l1", "l1 distance, twice tv"),
                ("povm_outcomes", "outcomes of the random POVM"),
                ("seed", "trial seed, base seed + t"),
            ],
            &report.rows,
        )?,
        failed,
    })
}

fn load_graph(arg: &str) -> Result<Graph> {
    let path = Path::new(arg);
    if path.is_file() {
        std::fs::read_to_string(path)?.parse()
    } else {
        Graph::parse_inline(arg)
    }
}

#[derive(Serialize)]
struct IsoRow {
    vertices: usize,
    shift: Option<String>,
    isomorphic_by_search: bool,
    consistent: bool,
    state_residual: Option<f64>,
}

fn iso(config: &ExperimentConfig, a: &str, b: &str) -> Result<Artifact> {
    let (ga, gb) = (load_graph(a)?, load_graph(b)?);
    if ga.vertices() != gb.vertices() {
        return Err(Error::domain("graphs have different vertex counts"));
    }
    for (name, g) in [("first", &ga), ("second", &gb)] {
        if !is_rigid(g)? {
            // make_shift_oracles names the automorphism
            make_shift_oracles(g, g).map_err(|e| Error::domain(format!("{name} graph: {e}")))?;
        }
    }
    let pair = make_shift_oracles(&ga, &gb)?;
    let shift = find_shift_bruteforce(&pair)?;
    let search = find_isomorphism(&ga, &gb);
    let state_residual = match states_from_oracles(&pair, config.k) {
        Ok(state) => {
            let direct = match shift {
                Some(s) => gamma1_dense(&pair.group, s, config.k)?,
                None => gamma2(&pair.group, &[], config.k, Form::Dense)?,
            };
            match (state.dense(), direct.dense()) {
                (Some(x), Some(y)) => Some(x.max_abs_diff(y)),
                _ => None,
            }
        }
        Err(Error::Capacity(_)) => None,
        Err(e) => return Err(e),
    };
    let shift_text = shift.and_then(|s| pair.group.perm(s).map(|p| p.to_string()));
    let consistent = shift.is_some() == search.is_some() && state_residual.is_none_or(|r| r <= 1e-12);
    let row = IsoRow {
        vertices: ga.vertices(),
        shift: shift_text.clone(),
        isomorphic_by_search: search.is_some(),
        consistent,
        state_residual,
    };
    let json = serde_json::to_value(&row).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    Ok(Artifact {
        summary: match &shift_text {
            Some(p) => format!("shift {p}; isomorphic by search: {}", search.is_some()),
            None => format!("no shift; isomorphic by search: {}", search.is_some()),
        },
        json,
        table: CsvTable::from_rows(
            vec![
                ("vertices", "vertex count"),
                ("shift", "recovered shift in one-line notation (find_shift_bruteforce)"),
                ("isomorphic_by_search", "independent backtracking search (find_isomorphism)"),
                ("consistent", "shift found iff isomorphic, and states agree"),
                ("state_residual", "oracle state minus direct state, max entry (states_from_oracles)"),
            ],
            &[row],
        )?,
        failed: (!consistent).then(|| "oracle reduction disagrees with the isomorphism search".to_string()),
    })
}

fn verify(config: &ExperimentConfig) -> Result<Artifact> {
    let g = &config.group;
    let reps = config.irreps()?;
    let checks = verify_all(g, &reps)?;
    let failed = failures(&checks);
    let count = |s| checks.iter().filter(|c| c.status == s).count();
    use crate::verify::Status;
    let summary = format!(
        "{}: {} passed, {failed} failed, {} skipped, {} informational",
        g.descriptor(),
        count(Status::Pass),
        count(Status::Skipped),
        count(Status::Info)
    );
    Ok(Artifact {
        json: json!({
            "group": g.descriptor().to_string(),
            "failures": failed,
            "checks": serde_json::to_value(&checks).map_err(|e| Error::Io(std::io::Error::other(e)))?,
        }),
        table: CsvTable::from_rows(
            vec![
                ("name", "invariant"),
                ("status", "pass, fail, skipped or info (verify_all)"),
                ("detail", "measured residual or count"),
            ],
            &checks,
        )?,
        failed: (failed > 0).then(|| format!("{failed} checks failed")),
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(args: &[&str]) -> ExperimentConfig {
        let mut full = vec!["hslab"];
        full.extend_from_slice(args);
        ExperimentConfig::from_cli(Cli::try_parse_from(full).unwrap()).unwrap()
    }

    #[test]
    fn rank_reports_closed_form() {
        let c = config(&["rank", "--group", "S3", "--k", "2"]);
        let a = compute(&c).unwrap();
        assert_eq!(a.summary, "rank 115; matches closed form: yes");
        assert_eq!(a.json["rank"], 115);
        let text = a.render(&c).unwrap();
        assert!(text.contains("matches closed form: yes"));
    }

    #[test]
    fn validation_errors() {
        let parse = |args: &[&str]| {
            let mut full = vec!["hslab"];
            full.extend_from_slice(args);
            ExperimentConfig::from_cli(Cli::try_parse_from(full).unwrap())
        };
        assert_eq!(exit_code(&parse(&["rank", "--group", "Q8"]).unwrap_err()), 2);
        assert_eq!(exit_code(&parse(&["rank", "--k", "0"]).unwrap_err()), 2);
        assert_eq!(exit_code(&parse(&["spectrum", "--shift", "6"]).unwrap_err()), 2);
        let c = config(&["subset-sum", "--group", "S3"]);
        assert_eq!(exit_code(&compute(&c).err().unwrap()), 2);
        let c = config(&["rank", "--group", "S8", "--k", "3"]);
        assert_eq!(exit_code(&compute(&c).err().unwrap()), 3);
    }

    #[test]
    fn csv_artifacts_carry_provenance() {
        let c = config(&["subset-sum", "--group", "Z4", "--k", "2", "--format", "csv"]);
        let text = compute(&c).unwrap().render(&c).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("# summary: Z4 k=2"));
        assert!(lines[1].starts_with("# hslab "));
        assert!(lines[1].contains("\"command\":\"subset-sum\""));
        assert!(lines.iter().any(|l| l.starts_with("# column rank: ")));
        assert_eq!(lines.last().unwrap(), &"Z4,2,43,1,1,7,4,85,128");
    }

    #[test]
    fn helstrom_blocks_agree_with_dense() {
        for (group, k) in [("Z3", 2), ("S3", 1), ("Z2", 3)] {
            let c = config(&["helstrom", "--group", group, "--k", &k.to_string()]);
            let a = compute(&c).unwrap();
            assert!(a.failed.is_none(), "{group}");
            assert!(a.json["dense_success"].is_number());
        }
    }

    #[test]
    fn iso_recovers_shift() {
        let a = crate::iso::rigid_six_vertex_classes().remove(0);
        let p = crate::group::Perm::from_one_line(&[2, 3, 1, 5, 6, 4]).unwrap();
        let b = crate::iso::graph_act(&p, &a).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let (fa, fb) = (dir.path().join("a.txt"), dir.path().join("b.txt"));
        std::fs::write(&fa, a.to_string()).unwrap();
        std::fs::write(&fb, b.to_string()).unwrap();
        let c = config(&["iso", "--a", fa.to_str().unwrap(), "--b", fb.to_str().unwrap()]);
        let art = compute(&c).unwrap();
        assert_eq!(art.json["consistent"], true);
        assert!(art.json["shift"].is_string());
        assert!(art.json["state_residual"].as_f64().unwrap() <= 1e-12);
        // a path on three vertices has the reversal automorphism
        let c = config(&["iso", "--a", "3:1-2,2-3", "--b", "3:1-2,2-3"]);
        let e = compute(&c).err().unwrap();
        assert_eq!(exit_code(&e), 2);
        assert!(e.to_string().contains("first graph"));
    }
}
