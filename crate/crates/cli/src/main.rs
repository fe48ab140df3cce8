//! `lcc`: compile constant matrix-vector products into shift-and-add graphs.
//!
//! Exit codes: 0 success, 1 usage error, 2 input or schema error,
//! 3 target SQNR not reached (`decompose` only).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lcc::decompose::csd_matrix_baseline;
use lcc::harness::{gen_gaussian_matrix, run_sweep, ExperimentSpec, Grid, SweepTable, CSD_MAX_DIGITS};
use lcc::serial::{dag_from_json_in, dag_to_dot, dag_to_json, parse_matrix};
use lcc::{
    compute_depths, decompose, evaluate_dag, total_cost, Algorithm, ComputationDag, CostModel, DecomposeConfig,
    DecompositionResult, ExponentRange, LccError, Schedule, Solver, TargetMatrix,
};

#[derive(Parser)]
#[command(name = "lcc", version, about = "Linear computation coding: matrices to shift-and-add graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose one matrix and write the graph.
    Decompose(DecomposeArgs),
    /// Monte Carlo sweep over Gaussian matrices, written as CSV.
    Sweep(SweepArgs),
    /// Cost, SQNR and outputs of an existing graph.
    Eval(EvalArgs),
    /// Re-validate a graph and convert it to JSON or DOT.
    Export(ExportArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlgorithmArg {
    Fs,
    Fp,
    Ma,
    Sliced,
    Csd,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(a: AlgorithmArg) -> Self {
        match a {
            AlgorithmArg::Fs => Algorithm::Fs,
            AlgorithmArg::Fp => Algorithm::Fp,
            AlgorithmArg::Ma => Algorithm::Ma,
            AlgorithmArg::Sliced => Algorithm::Sliced,
            AlgorithmArg::Csd => Algorithm::Csd,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Dot,
}

#[derive(Args)]
struct SourceArgs {
    /// Matrix file: JSON array of rows, or one row per line.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Rows of a generated Gaussian matrix.
    #[arg(long, default_value_t = 16)]
    rows: usize,
    /// Columns of a generated Gaussian matrix.
    #[arg(long, default_value_t = 4)]
    cols: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

#[derive(Args)]
struct SolverArgs {
    /// Fixed fan-in for the whole run.
    #[arg(long)]
    s: Option<usize>,
    /// Phased fan-in, e.g. `2:dmp,3:rs16@gain<0.05`.
    #[arg(long = "s-schedule")]
    s_schedule: Option<String>,
    /// Beam width; with `--s` selects the beam solver.
    #[arg(long)]
    q: Option<usize>,
    #[arg(long, default_value_t = ExponentRange::DEFAULT.min(), allow_negative_numbers = true)]
    emin: i32,
    #[arg(long, default_value_t = ExponentRange::DEFAULT.max(), allow_negative_numbers = true)]
    emax: i32,
    /// Column block width for `sliced`.
    #[arg(long = "slice-width", default_value_t = 4)]
    slice_width: usize,
    /// Algorithm applied to each block by `sliced`.
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Ma)]
    inner: AlgorithmArg,
    /// Vertex cap, default 64 per row.
    #[arg(long = "max-vertices")]
    max_vertices: Option<usize>,
    /// Use weight 1 instead of `1 + depth` in the `ma` row choice.
    #[arg(long = "no-depth-penalty")]
    no_depth_penalty: bool,
}

#[derive(Args)]
struct CostArgs {
    #[arg(long = "cost-add", default_value_t = 20.0)]
    cost_add: f64,
    #[arg(long = "cost-delay", default_value_t = 20.0)]
    cost_delay: f64,
    #[arg(long = "cost-inv", default_value_t = 2.0)]
    cost_inv: f64,
}

#[derive(Args)]
struct DecomposeArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, value_enum, default_value_t = AlgorithmArg::Ma)]
    algorithm: AlgorithmArg,
    /// Depth span limit for `ma`: an integer or `inf`.
    #[arg(long, default_value = "inf")]
    dmax: String,
    #[arg(long = "target-sqnr-db", default_value_t = 30.0, allow_negative_numbers = true)]
    target_sqnr_db: f64,
    /// CSD digits per entry; by default the fewest meeting the target.
    #[arg(long)]
    digits: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    cost: CostArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    /// Experiment spec (JSON); replaces the matrix, algorithm and grid flags.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    rows: usize,
    #[arg(long, default_value_t = 4)]
    cols: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Algorithms to compare, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [AlgorithmArg::Fs, AlgorithmArg::Fp, AlgorithmArg::Ma])]
    algorithm: Vec<AlgorithmArg>,
    /// Depth span limits for `ma`, one configuration each.
    #[arg(long, value_delimiter = ',', default_values_t = ["0".to_string()])]
    dmax: Vec<String>,
    /// SQNR grid in dB.
    #[arg(long = "target-sqnr-db", value_delimiter = ',', default_values_t = [10.0, 15.0, 20.0, 25.0, 30.0], allow_negative_numbers = true)]
    target_sqnr_db: Vec<f64>,
    /// Internal-vertex budget grid; replaces the SQNR grid.
    #[arg(long, value_delimiter = ',')]
    budget: Vec<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    cost: CostArgs,
    /// Fill the wall_ms column (makes the output run dependent).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct EvalArgs {
    /// Graph in the JSON schema.
    #[arg(long)]
    dag: PathBuf,
    /// Target to measure the SQNR against.
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// Input vector, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x: Option<Vec<f64>>,
    #[arg(long, default_value_t = ExponentRange::DEFAULT.min(), allow_negative_numbers = true)]
    emin: i32,
    #[arg(long, default_value_t = ExponentRange::DEFAULT.max(), allow_negative_numbers = true)]
    emax: i32,
    #[command(flatten)]
    cost: CostArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    dag: PathBuf,
    #[arg(long, default_value_t = ExponentRange::DEFAULT.min(), allow_negative_numbers = true)]
    emin: i32,
    #[arg(long, default_value_t = ExponentRange::DEFAULT.max(), allow_negative_numbers = true)]
    emax: i32,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Dot)]
    format: Format,
}

enum Failure {
    Usage(String),
    Input(String),
    NotConverged,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::NotConverged => 3,
        }
    }
}

type CliResult<T> = Result<T, Failure>;

/// Configuration problems are usage errors; everything else comes from input.
fn classify(e: LccError) -> Failure {
    match e {
        LccError::Config(_) | LccError::InvalidExponentRange { .. } | LccError::InvalidDimension(_) => {
            Failure::Usage(e.to_string())
        }
        other => Failure::Input(other.to_string()),
    }
}

fn usage(e: LccError) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cost_model(c: &CostArgs) -> CliResult<CostModel> {
    CostModel::new(c.cost_add, c.cost_delay, c.cost_inv)
        .ok_or_else(|| Failure::Usage("costs must be finite and nonnegative".into()))
}

fn parse_dmax(s: &str) -> CliResult<Option<usize>> {
    match s.trim() {
        "inf" | "∞" => Ok(None),
        v => v
            .parse::<usize>()
            .map(Some)
            .map_err(|_| Failure::Usage(format!("--dmax expects an integer or inf, got '{v}'"))),
    }
}

fn load_matrix(src: &SourceArgs) -> CliResult<TargetMatrix> {
    match &src.matrix {
        Some(p) => parse_matrix(&read(p)?).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => gen_gaussian_matrix(src.rows, src.cols, src.seed).map_err(usage),
    }
}

fn sqnr_value(x: f64) -> Value {
    if x.is_infinite() {
        json!(if x > 0.0 { "inf" } else { "-inf" })
    } else {
        json!(x)
    }
}

/// Applies the solver flags to a configuration built for `algorithm`.
fn build_config(algorithm: Algorithm, target: f64, dmax: Option<usize>, a: &SolverArgs) -> CliResult<DecomposeConfig> {
    let inner: Algorithm = a.inner.into();
    let base = if algorithm == Algorithm::Sliced { inner } else { algorithm };
    let mut cfg = DecomposeConfig::new(base, target);
    cfg.schedule = match (&a.s_schedule, a.s, a.q) {
        (Some(text), _, _) => text.parse::<Schedule>().map_err(usage)?,
        (None, Some(s), q) => Schedule::fixed(s, q.map_or(Solver::Dmp, |q| Solver::Rs { q })),
        (None, None, Some(q)) => {
            let phases = cfg
                .schedule
                .phases()
                .iter()
                .map(|p| match p.solver {
                    Solver::Rs { .. } => lcc::Phase {
                        solver: Solver::Rs { q },
                        ..*p
                    },
                    _ => *p,
                })
                .collect();
            Schedule::new(phases).map_err(usage)?
        }
        (None, None, None) => cfg.schedule,
    };
    cfg.exponents = ExponentRange::new(a.emin, a.emax).map_err(usage)?;
    cfg.delta_mu_max = dmax;
    cfg.depth_penalty = !a.no_depth_penalty;
    cfg.max_vertices = a.max_vertices;
    cfg.slice_width = a.slice_width;
    if algorithm == Algorithm::Sliced {
        cfg.algorithm = Algorithm::Sliced;
        cfg.inner = inner;
    }
    Ok(cfg)
}

fn csd_auto(t: &TargetMatrix, cfg: &DecomposeConfig) -> CliResult<DecompositionResult> {
    let mut last = None;
    for d in 1..=CSD_MAX_DIGITS {
        let r = csd_matrix_baseline(t, d, cfg.exponents).map_err(classify)?;
        if r.sqnr_db > cfg.target_sqnr_db {
            return Ok(r);
        }
        last = Some(r);
    }
    let mut r = last.expect("at least one digit count");
    r.stop = lcc::StopReason::NoImprovement;
    Ok(r)
}

fn cmd_decompose(a: DecomposeArgs) -> CliResult<()> {
    let algorithm: Algorithm = a.algorithm.into();
    let model = cost_model(&a.cost)?;
    let mut cfg = build_config(algorithm, a.target_sqnr_db, parse_dmax(&a.dmax)?, &a.solver)?;
    let t = load_matrix(&a.source)?;
    let res = match (algorithm, a.digits) {
        (Algorithm::Csd, None) => {
            cfg.validate(t.cols()).map_err(usage)?;
            csd_auto(&t, &cfg)?
        }
        (Algorithm::Csd, Some(d)) => {
            cfg.csd_digits = d;
            decompose(&t, &cfg).map_err(classify)?
        }
        _ => decompose(&t, &cfg).map_err(classify)?,
    };
    let report = total_cost(&res.dag, &model);
    let text = match a.format {
        Format::Json => dag_to_json(&res.dag) + "\n",
        Format::Dot => dag_to_dot(&res.dag),
        Format::Csv => {
            let (alg, s, dmax, q) = lcc::harness::describe(&cfg);
            let sqnr = if res.sqnr_db.is_infinite() {
                "inf".to_string()
            } else {
                format!("{:.6}", res.sqnr_db)
            };
            format!(
                "{}\n{alg},{s},{dmax},{q},{},0,{sqnr},{},{},{},{},{},0,{}\n",
                lcc::harness::CSV_HEADER.join(","),
                a.target_sqnr_db,
                report.n_add,
                report.n_delay,
                report.n_inv,
                report.n_add,
                report.total,
                res.stop.label()
            )
        }
    };
    emit(a.out.as_deref(), &text)?;
    eprintln!(
        "sqnr_db={} n_add={} n_delay={} n_inv={} cost_total={} depth={} stop={:?}",
        sqnr_value(res.sqnr_db),
        report.n_add,
        report.n_delay,
        report.n_inv,
        report.total,
        report.depths.max_depth(),
        res.stop
    );
    let met = res.sqnr_db > a.target_sqnr_db || (algorithm == Algorithm::Csd && a.digits.is_some());
    if met {
        Ok(())
    } else {
        Err(Failure::NotConverged)
    }
}

fn sweep_spec(a: &SweepArgs) -> CliResult<ExperimentSpec> {
    if let Some(p) = &a.spec {
        return serde_json::from_str(&read(p)?).map_err(|e| Failure::Input(format!("{}: {e}", p.display())));
    }
    let mut algorithms = Vec::new();
    for &alg in &a.algorithm {
        let alg: Algorithm = alg.into();
        let takes_dmax = alg == Algorithm::Ma || (alg == Algorithm::Sliced && a.solver.inner == AlgorithmArg::Ma);
        if takes_dmax {
            for d in &a.dmax {
                algorithms.push(build_config(alg, 0.0, parse_dmax(d)?, &a.solver)?);
            }
        } else {
            algorithms.push(build_config(alg, 0.0, None, &a.solver)?);
        }
    }
    let grid = if a.budget.is_empty() {
        Grid::TargetSqnr(a.target_sqnr_db.clone())
    } else {
        Grid::VertexBudget(a.budget.clone())
    };
    Ok(ExperimentSpec {
        rows: a.rows,
        cols: a.cols,
        trials: a.trials,
        seed: a.seed,
        algorithms,
        cost: cost_model(&a.cost)?,
        grid,
        record_timing: a.timing,
        output: None,
    })
}

fn table_json(table: &SweepTable) -> CliResult<String> {
    let csv = table.to_csv().map_err(classify)?;
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
    let rows: Vec<Value> = lines
        .map(|l| {
            let obj = header
                .iter()
                .zip(l.split(','))
                .map(|(k, v)| (k.to_string(), Value::String(v.to_string())))
                .collect::<serde_json::Map<_, _>>();
            Value::Object(obj)
        })
        .collect();
    Ok(serde_json::to_string_pretty(&rows).expect("strings serialise") + "\n")
}

fn cmd_sweep(a: SweepArgs) -> CliResult<()> {
    let spec = sweep_spec(&a)?;
    let table = run_sweep(&spec).map_err(classify)?;
    let text = match a.format {
        Format::Csv => table.to_csv().map_err(classify)?,
        Format::Json => table_json(&table)?,
        Format::Dot => return Err(Failure::Usage("sweep writes csv or json".into())),
    };
    let out = a.out.clone().or(spec.output.map(PathBuf::from));
    emit(out.as_deref(), &text)
}

fn load_dag(path: &Path, emin: i32, emax: i32) -> CliResult<ComputationDag> {
    let range = ExponentRange::new(emin, emax).map_err(usage)?;
    dag_from_json_in(&read(path)?, range).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn cmd_eval(a: EvalArgs) -> CliResult<()> {
    let dag = load_dag(&a.dag, a.emin, a.emax)?;
    let model = cost_model(&a.cost)?;
    let report = total_cost(&dag, &model);
    let mut doc = json!({
        "k": dag.num_inputs(),
        "n": dag.num_outputs(),
        "vertices": dag.len(),
        "n_add": report.n_add,
        "n_delay": report.n_delay,
        "n_inv": report.n_inv,
        "cost_adders": model.c_add * report.n_add as f64,
        "cost_total": report.total,
        "max_depth": compute_depths(&dag).max_depth(),
    });
    if let Some(p) = &a.matrix {
        let t = parse_matrix(&read(p)?).map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
        let out = lcc::eval::output_sqnr_db(&t, &dag).map_err(|e| Failure::Input(e.to_string()))?;
        let book = lcc::eval::sqnr_db_in(&t, &dag, ExponentRange::new(a.emin, a.emax).map_err(usage)?)
            .map_err(|e| Failure::Input(e.to_string()))?;
        doc["sqnr_db"] = sqnr_value(out);
        doc["codebook_sqnr_db"] = sqnr_value(book);
    }
    if let Some(x) = &a.x {
        let y = evaluate_dag(&dag, x).map_err(|e| Failure::Input(e.to_string()))?;
        doc["y"] = json!(y);
    }
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&doc).expect("values serialise") + "\n",
        Format::Csv => {
            let obj = doc.as_object().expect("object");
            let keys: Vec<&String> = obj.keys().filter(|k| *k != "y").collect();
            let vals: Vec<String> = keys
                .iter()
                .map(|k| match &obj[k.as_str()] {
                    Value::String(s) => s.clone(),
                    v => v.to_string(),
                })
                .collect();
            format!(
                "{}\n{}\n",
                keys.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(","),
                vals.join(",")
            )
        }
        Format::Dot => return Err(Failure::Usage("eval writes json or csv".into())),
    };
    emit(a.out.as_deref(), &text)
}

fn cmd_export(a: ExportArgs) -> CliResult<()> {
    let dag = load_dag(&a.dag, a.emin, a.emax)?;
    let text = match a.format {
        Format::Json => dag_to_json(&dag) + "\n",
        Format::Dot => dag_to_dot(&dag),
        Format::Csv => return Err(Failure::Usage("export writes json or dot".into())),
    };
    emit(a.out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let informational = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return ExitCode::from(if informational { 0 } else { 1 });
        }
    };
    let result = match cli.command {
        Command::Decompose(a) => cmd_decompose(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Export(a) => cmd_export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Input(m) => eprintln!("error: {m}"),
                Failure::NotConverged => eprintln!("error: target SQNR not reached"),
            }
            ExitCode::from(f.code())
        }
    }
}
