mod plot;
mod run;

use clap::{Args, Parser, Subcommand, ValueEnum};
use plot::{Chart, Series};
use run::{CmdResult, Run};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use yoked::gapstore::{round_sig, smooth, CalibrationModel, GapDistribution, MemoryExperiment};
use yoked::gf2::{BitMatrix, BitVec};
use yoked::outersim::{build_block_code, run_gap_simulation, simulate_concatenated_single_round, BlockShape, FailureStats, SimConfig};
use yoked::planner::{csv_row, estimate_footprint, fit_scaling, optimize_layout, CostModel, FitPoint, Layout, ScalingFit, Storage, CSV_HEADER};
use yoked::qpcc::{anticommuting_pairs, build_qpcc, code_parameters, logical_count, ParityCheckCode, Pauli};
use yoked::stabsim::{apply_si1000, generate_surface_memory_circuit, EffectTable};
use yoked::Error;

#[derive(Parser)]
#[command(name = "yoked", version, about = "Yoked surface-code construction, simulation and planning")]
struct Cli {
    /// Seed for every random stream of the run.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for shot-parallel work; results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory receiving all outputs and manifest.json.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    /// Print the result as JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    /// Record wall-clock time in the manifest and result records.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Outer parity check codes.
    #[command(subcommand)]
    Code(CodeCmd),
    /// Memory experiment circuits.
    #[command(subcommand)]
    Circuit(CircuitCmd),
    /// Complementary-gap distributions.
    #[command(subcommand)]
    Gaps(GapsCmd),
    /// Outer-code and full concatenated simulations.
    #[command(subcommand)]
    Sim(SimCmd),
    /// Fit a scaling law to rate data.
    Fit(FitArgs),
    /// Footprint estimates and layout search.
    #[command(subcommand)]
    Plan(PlanCmd),
    /// Compare gap simulation against full simulation.
    Validate(ValidateArgs),
    /// Render a chart as SVG plus CSV.
    Plot(PlotArgs),
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum CodeCmd {
    Build(CodeBuild),
    Verify(CodeVerify),
    Params(CodeParams),
}

#[derive(Args, Serialize)]
struct CodeBuild {
    #[arg(long, value_delimiter = ',', required = true)]
    sides: Vec<usize>,
    #[arg(long, default_value = "code.json")]
    out: String,
    /// Also write dense and sparse check-matrix text files.
    #[arg(long)]
    text: bool,
}

#[derive(Args, Serialize)]
struct CodeVerify {
    /// Code file written by `code build`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "verify.json")]
    out: String,
}

#[derive(Args, Serialize)]
struct CodeParams {
    #[arg(long, value_delimiter = ',', required = true)]
    sides: Vec<usize>,
    /// Largest logical weight searched.
    #[arg(long, default_value_t = 8)]
    cap: usize,
    #[arg(long, default_value = "params.json")]
    out: String,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum CircuitCmd {
    Gen(CircuitGen),
}

#[derive(Args, Serialize)]
struct CircuitGen {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    rounds: usize,
    #[arg(long, default_value_t = 1e-3)]
    p: f64,
    /// Also sample this many shots of detection data.
    #[arg(long)]
    sample: Option<usize>,
    #[arg(long, default_value = "circuit.txt")]
    out: String,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum GapsCmd {
    Collect(GapsCollect),
    Smooth(GapsSmooth),
    Extrapolate(GapsExtrapolate),
}

#[derive(Args, Serialize)]
struct GapsCollect {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    rounds: usize,
    #[arg(long, default_value_t = 1e-3)]
    p: f64,
    #[arg(long)]
    shots: usize,
}

#[derive(Args, Serialize)]
struct GapsSmooth {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 2)]
    halfwidth: usize,
}

#[derive(Args, Serialize)]
struct GapsExtrapolate {
    #[arg(long)]
    input: PathBuf,
    /// Number of independent draws whose minimum is taken.
    #[arg(long)]
    m: f64,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum SimCmd {
    Outer(SimOuter),
    Full(SimFull),
}

#[derive(Args, Serialize)]
struct SimOuter {
    /// Gap distribution file.
    #[arg(long)]
    gaps: PathBuf,
    /// `line:N` or `square:W`.
    #[arg(long, value_parser = parse_shape)]
    shape: BlockShape,
    #[arg(long)]
    r_i: usize,
    #[arg(long, default_value_t = 10)]
    r_o: usize,
    /// Rounds-equivalent of one yoke measurement; defaults to 100 d.
    #[arg(long)]
    n_t: Option<f64>,
    #[arg(long)]
    shots: usize,
    #[arg(long, default_value = "outer.json")]
    out: String,
}

#[derive(Args, Serialize)]
struct SimFull {
    #[arg(long)]
    d: usize,
    #[arg(long, value_parser = parse_shape)]
    shape: BlockShape,
    #[arg(long)]
    rounds: usize,
    #[arg(long, default_value_t = 1e-3)]
    p: f64,
    #[arg(long)]
    shots: usize,
    #[arg(long, default_value = "full.json")]
    out: String,
}

#[derive(Args, Serialize)]
struct FitArgs {
    /// CSV with columns d,r_i,r_o,n,rate,weight.
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    dimension: usize,
    #[arg(long, default_value = "fit.json")]
    out: String,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum PlanCmd {
    Estimate(PlanEstimate),
    Optimize(PlanOptimize),
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum StorageArg {
    Cold,
    Hot,
}

impl From<StorageArg> for Storage {
    fn from(s: StorageArg) -> Self {
        match s {
            StorageArg::Cold => Storage::Cold,
            StorageArg::Hot => Storage::Hot,
        }
    }
}

#[derive(Args, Serialize)]
struct FitOverride {
    /// Replace the default error-suppression base.
    #[arg(long)]
    lambda: Option<f64>,
    /// Replace the default prefactor.
    #[arg(long)]
    prefactor: Option<f64>,
}

impl FitOverride {
    fn fit(&self, dimension: usize) -> yoked::Result<ScalingFit> {
        let base = ScalingFit::default_for(dimension)?;
        ScalingFit::new(dimension, self.lambda.unwrap_or(base.lambda), self.prefactor.unwrap_or(base.prefactor))
    }
}

#[derive(Args, Serialize)]
struct PlanEstimate {
    #[arg(long)]
    dimension: usize,
    #[arg(long, value_enum, default_value = "cold")]
    storage: StorageArg,
    #[arg(long)]
    d: usize,
    /// Block side: n in 1D, w in 2D; ignored when unyoked.
    #[arg(long, default_value_t = 1)]
    side: usize,
    #[arg(long, default_value_t = 1)]
    blocks: usize,
    #[command(flatten)]
    fit: FitOverride,
    #[arg(long, default_value = "plan.json")]
    out: String,
}

#[derive(Args, Serialize)]
struct PlanOptimize {
    /// One or more per-logical-per-round targets.
    #[arg(long, value_delimiter = ',', required = true)]
    target: Vec<f64>,
    #[arg(long)]
    dimension: usize,
    #[arg(long, value_enum, default_value = "cold")]
    storage: StorageArg,
    #[command(flatten)]
    fit: FitOverride,
    /// Base name of the JSON and CSV outputs.
    #[arg(long, default_value = "plans")]
    out: String,
}

#[derive(Args, Serialize)]
struct ValidateArgs {
    /// JSON file with d, n, r_i, p, shots, bound and optional gap_shots,
    /// outer_shots, gap_rounds.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "validation.json")]
    out: String,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum PlotKind {
    /// Histogram of a gap distribution.
    Gaps,
    /// Optimized qubits per logical against target rate.
    Footprint,
}

#[derive(Args, Serialize)]
struct PlotArgs {
    #[arg(long, value_enum)]
    kind: PlotKind,
    /// Gap distribution file, for `--kind gaps`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Targets for `--kind footprint`.
    #[arg(long, value_delimiter = ',')]
    targets: Vec<f64>,
    /// Base name of the SVG and CSV outputs.
    #[arg(long)]
    out: Option<String>,
}

fn parse_shape(s: &str) -> Result<BlockShape, String> {
    let (kind, size) = s.split_once(':').ok_or_else(|| format!("expected line:N or square:W, got {s:?}"))?;
    let size: usize = size.parse().map_err(|_| format!("bad block size in {s:?}"))?;
    match kind {
        "line" => Ok(BlockShape::Line(size)),
        "square" => Ok(BlockShape::Square(size)),
        _ => Err(format!("unknown block kind {kind:?}; use line or square")),
    }
}

fn r12(x: f64) -> f64 {
    round_sig(x, 12)
}

#[derive(Serialize, Deserialize)]
struct CodeFile {
    sides: Vec<usize>,
    n: usize,
    k: usize,
    d: usize,
    rank_x: usize,
    rank_z: usize,
    redundant_x: usize,
    redundant_z: usize,
    commuting: bool,
    /// `forward[q]`: position whose line holds patch `q` in the Z checks.
    permutation: Vec<usize>,
    x_checks: Vec<Vec<usize>>,
    z_checks: Vec<Vec<usize>>,
}

fn rows_of(m: &BitMatrix) -> Vec<Vec<usize>> {
    m.rows().iter().map(|r| r.ones().collect()).collect()
}

fn matrix_of(n: usize, rows: &[Vec<usize>]) -> CmdResult<BitMatrix> {
    if rows.iter().flatten().any(|&q| q >= n) {
        return Err(Error::Structure(format!("check index outside 0..{n}")).into());
    }
    Ok(BitMatrix::from_rows(n, rows.iter().map(|r| BitVec::from_indices(n, r.iter().copied())).collect()))
}

fn code_file(code: &ParityCheckCode) -> CodeFile {
    CodeFile {
        sides: code.side_lengths().to_vec(),
        n: code.n(),
        k: code.k(),
        d: code.d(),
        rank_x: code.rank(Pauli::X),
        rank_z: code.rank(Pauli::Z),
        redundant_x: code.redundant_checks(Pauli::X),
        redundant_z: code.redundant_checks(Pauli::Z),
        commuting: anticommuting_pairs(code.x_checks(), code.z_checks()).is_empty(),
        permutation: code.permutation().forward.clone(),
        x_checks: rows_of(code.x_checks()),
        z_checks: rows_of(code.z_checks()),
    }
}

fn stats_record(config: Value, s: &FailureStats, wall: Option<f64>) -> Value {
    json!({
        "config": config,
        "shots": s.shots,
        "failures_x": s.failures_x,
        "failures_z": s.failures_z,
        "failures_any": s.failures_any,
        "rate": r12(s.rate),
        "ci_low": r12(s.ci_low),
        "ci_high": r12(s.ci_high),
        "wall_seconds": wall,
    })
}

fn stem(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "input".into())
}

fn load_gaps(run: &mut Run, path: &Path) -> CmdResult<GapDistribution> {
    let text = run.read_input(path)?;
    Ok(GapDistribution::from_json(&text)?)
}

/// Executes one command; returns the value echoed on stdout.
fn execute(cli: &Cli, run: &mut Run) -> CmdResult<Value> {
    let timer = std::time::Instant::now();
    let wall = |t: std::time::Instant| if cli.timing { Some(t.elapsed().as_secs_f64()) } else { None };
    let seed = run.seed();
    match &cli.command {
        Command::Code(CodeCmd::Build(a)) => {
            let code = build_qpcc(&a.sides)?;
            let f = code_file(&code);
            run.write_json(&a.out, &f)?;
            if a.text {
                run.write("checks_x.txt", code.to_dense_text(Pauli::X).as_bytes())?;
                run.write("checks_z.txt", code.to_dense_text(Pauli::Z).as_bytes())?;
                run.write("checks.sparse.txt", code.to_sparse_text().as_bytes())?;
            }
            Ok(json!({ "sides": f.sides, "n": f.n, "k": f.k, "d": f.d, "redundant_x": f.redundant_x, "redundant_z": f.redundant_z, "commuting": f.commuting }))
        }
        Command::Code(CodeCmd::Verify(a)) => {
            let text = run.read_input(&a.input)?;
            let f: CodeFile = serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
            let x = matrix_of(f.n, &f.x_checks)?;
            let z = matrix_of(f.n, &f.z_checks)?;
            let anti = anticommuting_pairs(&x, &z);
            let rank_k = f.n - x.rank() - z.rank();
            let rebuilt = build_qpcc(&f.sides)?;
            let matches = rows_of(rebuilt.x_checks()) == f.x_checks && rows_of(rebuilt.z_checks()) == f.z_checks;
            let report = json!({
                "n": f.n,
                "commuting": anti.is_empty(),
                "anticommuting_pairs": anti.len(),
                "rank_k": rank_k,
                "formula_k": logical_count(&f.sides),
                "declared_k": f.k,
                "matches_construction": matches,
            });
            run.write_json(&a.out, &report)?;
            if !anti.is_empty() || rank_k != f.k || !matches {
                return Err(Error::Structure(format!("code file fails verification: {report}")).into());
            }
            Ok(report)
        }
        Command::Code(CodeCmd::Params(a)) => {
            let code = build_qpcc(&a.sides)?;
            let p = code_parameters(&code, a.cap)?;
            let v = json!({ "sides": a.sides, "n": p.n, "k": p.k, "d": p.d.to_string(), "cap": a.cap });
            run.write_json(&a.out, &v)?;
            Ok(v)
        }
        Command::Circuit(CircuitCmd::Gen(a)) => {
            let c = apply_si1000(&generate_surface_memory_circuit(a.d, a.rounds)?, a.p)?;
            run.write(&a.out, c.to_text().as_bytes())?;
            let mut v = json!({ "qubits": c.num_qubits, "detectors": c.num_detectors(), "observables": c.num_observables(), "channels": c.num_channels() });
            if let Some(shots) = a.sample {
                let data = EffectTable::new(&c)?.sample(seed, 0, shots);
                run.write("detections.bin", &data.to_packed_bytes())?;
                let side = json!({ "shots": shots, "detectors": c.num_detectors(), "observables": c.num_observables(), "seed": seed });
                run.write_json("detections.json", &side)?;
                v["shots"] = json!(shots);
            }
            Ok(v)
        }
        Command::Gaps(GapsCmd::Collect(a)) => {
            let dist = MemoryExperiment::new(a.d, a.rounds, a.p)?.distribution(a.shots, seed)?;
            let name = dist.file_name();
            run.write(&name, dist.to_json().as_bytes())?;
            let failures: u64 = dist.bins.iter().map(|b| b.failures).sum();
            Ok(json!({ "file": name, "shots": dist.total, "failures": failures, "bins": dist.bins.len() }))
        }
        Command::Gaps(GapsCmd::Smooth(a)) => {
            let dist = load_gaps(run, &a.input)?;
            let curve = smooth(&dist, a.halfwidth)?;
            let mut csv = String::from("db,mass\n");
            for (db, m) in &curve {
                csv.push_str(&format!("{db},{}\n", r12(*m)));
            }
            let name = format!("{}_smooth_h{}.csv", stem(&a.input), a.halfwidth);
            run.write(&name, csv.as_bytes())?;
            Ok(json!({ "file": name, "points": curve.len() }))
        }
        Command::Gaps(GapsCmd::Extrapolate(a)) => {
            let dist = load_gaps(run, &a.input)?;
            let out = dist.extrapolate_min_of_m(a.m)?;
            let name = format!("{}_min{}.json", stem(&a.input), a.m);
            run.write(&name, out.to_json().as_bytes())?;
            Ok(json!({ "file": name, "effective_rounds": r12(out.effective_rounds()) }))
        }
        Command::Sim(SimCmd::Outer(a)) => {
            let dist = load_gaps(run, &a.gaps)?;
            let mut cfg = SimConfig::new(dist.d, a.r_i, a.shape);
            cfg.r_o = a.r_o;
            cfg.n_t = a.n_t.unwrap_or(cfg.n_t);
            cfg.seed = seed;
            cfg.shots = a.shots;
            let code = build_block_code(a.shape)?;
            let s = run_gap_simulation(&cfg, &code, &dist, &CalibrationModel::default())?;
            let rec = stats_record(serde_json::to_value(cfg).unwrap(), &s, wall(timer));
            run.write_json(&a.out, &rec)?;
            Ok(rec)
        }
        Command::Sim(SimCmd::Full(a)) => {
            let s = simulate_concatenated_single_round(a.d, a.shape, a.rounds, a.p, a.shots, seed)?;
            let config = json!({ "d": a.d, "shape": a.shape, "inner_rounds": a.rounds, "p": a.p, "seed": seed, "shots": a.shots });
            let rec = stats_record(config, &s, wall(timer));
            run.write_json(&a.out, &rec)?;
            Ok(rec)
        }
        Command::Fit(a) => {
            let text = run.read_input(&a.data)?;
            let mut rdr = csv::Reader::from_reader(text.as_bytes());
            let mut pts = Vec::new();
            for (i, row) in rdr.deserialize::<FitPoint>().enumerate() {
                pts.push(row.map_err(|e| Error::Parse { line: i + 2, msg: e.to_string() })?);
            }
            let f = fit_scaling(&pts, a.dimension)?;
            let v = json!({ "dimension": f.dimension, "lambda": r12(f.lambda), "prefactor": r12(f.prefactor), "points": pts.len() });
            run.write_json(&a.out, &v)?;
            Ok(v)
        }
        Command::Plan(PlanCmd::Estimate(a)) => {
            let layout = Layout { dimension: a.dimension, storage: a.storage.into(), d: a.d, side: a.side, blocks: a.blocks };
            let plan = estimate_footprint(&layout, &a.fit.fit(a.dimension)?, &CostModel::default())?;
            let v = plan_json(&plan);
            run.write_json(&a.out, &v)?;
            Ok(v)
        }
        Command::Plan(PlanCmd::Optimize(a)) => {
            let fit = a.fit.fit(a.dimension)?;
            let mut plans = Vec::new();
            let mut csv = format!("{CSV_HEADER}\n");
            for &t in &a.target {
                let plan = optimize_layout(t, a.dimension, a.storage.into(), &fit, &CostModel::default())?;
                csv.push_str(&csv_row(t, &plan));
                csv.push('\n');
                let mut v = plan_json(&plan);
                v["target"] = json!(t);
                plans.push(v);
            }
            run.write_json(&format!("{}.json", a.out), &plans)?;
            run.write(&format!("{}.csv", a.out), csv.as_bytes())?;
            Ok(Value::Array(plans))
        }
        Command::Validate(a) => {
            let text = run.read_input(&a.config)?;
            let cfg: ValidateConfig = serde_json::from_str(&text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })?;
            let v = validate(&cfg, seed)?;
            run.write_json(&a.out, &v)?;
            Ok(v)
        }
        Command::Plot(a) => plot(a, run),
    }
}

fn plan_json(p: &yoked::planner::LayoutPlan) -> Value {
    let mut v = serde_json::to_value(p).unwrap();
    v["qubits_per_logical"] = json!(r12(p.qubits_per_logical));
    v["predicted_rate"] = json!(r12(p.predicted_rate));
    v
}

#[derive(Serialize, Deserialize)]
struct ValidateConfig {
    d: usize,
    n: usize,
    r_i: usize,
    p: f64,
    /// Full-simulation shots.
    shots: usize,
    bound: f64,
    #[serde(default)]
    gap_shots: Option<usize>,
    #[serde(default)]
    outer_shots: Option<usize>,
    /// Rounds of the collected gap distribution; defaults to 10 d.
    #[serde(default)]
    gap_rounds: Option<usize>,
}

/// Full and gap simulation of one 1D block with a single perfect yoke
/// round. Passes when the whole 95% interval of the X-failure ratio lies
/// within `[1/bound, bound]`; two zero rates count as ratio 1.
fn validate(cfg: &ValidateConfig, seed: u64) -> CmdResult<Value> {
    if !(cfg.bound >= 1.0) {
        return Err(Error::Parameter(format!("bound {} must be at least 1", cfg.bound)).into());
    }
    let shape = BlockShape::Line(cfg.n);
    let full = simulate_concatenated_single_round(cfg.d, shape, cfg.r_i, cfg.p, cfg.shots, seed)?;
    let gap_rounds = cfg.gap_rounds.unwrap_or(10 * cfg.d);
    let outer_shots = cfg.outer_shots.unwrap_or(10 * cfg.shots);
    let gap = if cfg.p == 0.0 {
        // No fault can occur, so no outer edge can error.
        FailureStats::new(outer_shots as u64, 0, 0, 0, cfg.n, cfg.r_i as u64)
    } else {
        let dist = MemoryExperiment::new(cfg.d, gap_rounds, cfg.p)?.distribution(cfg.gap_shots.unwrap_or(200_000), seed ^ 0x5eed)?;
        let mut sc = SimConfig::new(cfg.d, cfg.r_i, shape);
        sc.r_o = 1;
        sc.seed = seed.wrapping_add(1);
        sc.shots = outer_shots;
        run_gap_simulation(&sc, &build_block_code(shape)?, &dist, &CalibrationModel::default())?
    };
    let (g, g_lo, g_hi) = gap.rate_of(Pauli::X);
    let (f, f_lo, f_hi) = full.rate_of(Pauli::X);
    let (ratio, lo, hi) = if g == 0.0 && f == 0.0 { (1.0, 1.0, 1.0) } else { (g / f, g_lo / f_hi, g_hi / f_lo) };
    let pass = lo >= 1.0 / cfg.bound && hi <= cfg.bound;
    Ok(json!({
        "config": cfg,
        "full": { "shots": full.shots, "failures": full.failures_x, "rate": r12(f), "ci_low": r12(f_lo), "ci_high": r12(f_hi) },
        "gap": { "shots": gap.shots, "failures": gap.failures_x, "rate": r12(g), "ci_low": r12(g_lo), "ci_high": r12(g_hi) },
        "ratio": r12(ratio),
        "ratio_ci": [r12(lo), r12(hi)],
        "bound": cfg.bound,
        "pass": pass,
    }))
}

fn plot(a: &PlotArgs, run: &mut Run) -> CmdResult<Value> {
    match a.kind {
        PlotKind::Gaps => {
            let path = a.input.as_ref().ok_or_else(|| Error::Parameter("--kind gaps needs --input".into()))?;
            let dist = load_gaps(run, path)?;
            let base = a.out.clone().unwrap_or_else(|| stem(path));
            let mut csv = String::from("db,count,failures,mass\n");
            for b in &dist.bins {
                csv.push_str(&format!("{},{},{},{}\n", b.db, b.count, b.failures, r12(b.mass)));
            }
            let chart = Chart {
                title: format!("Signed gaps, d={} r={}", dist.d, dist.effective_rounds()),
                x_label: "signed gap (dB)".into(),
                y_label: "probability".into(),
                log_x: false,
                log_y: true,
                series: vec![Series { label: dist.noise_label.clone(), points: dist.bins.iter().map(|b| (b.db as f64, b.mass)).collect() }],
            };
            run.write(&format!("{base}.svg"), chart.to_svg().as_bytes())?;
            run.write(&format!("{base}.csv"), csv.as_bytes())?;
            Ok(json!({ "svg": format!("{base}.svg"), "csv": format!("{base}.csv") }))
        }
        PlotKind::Footprint => {
            let targets = if a.targets.is_empty() { (9..=18).map(|e| 10f64.powi(-e)).collect() } else { a.targets.clone() };
            let base = a.out.clone().unwrap_or_else(|| "footprint".into());
            let cost = CostModel::default();
            let modes = [(0, Storage::Cold, "unyoked cold"), (1, Storage::Cold, "1D cold"), (2, Storage::Cold, "2D cold"), (0, Storage::Hot, "unyoked hot"), (1, Storage::Hot, "1D hot")];
            let mut csv = format!("{CSV_HEADER}\n");
            let mut series = Vec::new();
            for (k, s, label) in modes {
                let fit = ScalingFit::default_for(k)?;
                let mut pts = Vec::new();
                for &t in &targets {
                    let p = optimize_layout(t, k, s, &fit, &cost)?;
                    csv.push_str(&csv_row(t, &p));
                    csv.push('\n');
                    pts.push((t, p.qubits_per_logical));
                }
                series.push(Series { label: label.into(), points: pts });
            }
            let chart = Chart {
                title: "Physical qubits per logical qubit".into(),
                x_label: "target error per logical qubit per round".into(),
                y_label: "qubits per logical".into(),
                log_x: true,
                log_y: false,
                series,
            };
            run.write(&format!("{base}.svg"), chart.to_svg().as_bytes())?;
            run.write(&format!("{base}.csv"), csv.as_bytes())?;
            Ok(json!({ "svg": format!("{base}.svg"), "csv": format!("{base}.csv") }))
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Code(CodeCmd::Build(_)) => "code build",
        Command::Code(CodeCmd::Verify(_)) => "code verify",
        Command::Code(CodeCmd::Params(_)) => "code params",
        Command::Circuit(CircuitCmd::Gen(_)) => "circuit gen",
        Command::Gaps(GapsCmd::Collect(_)) => "gaps collect",
        Command::Gaps(GapsCmd::Smooth(_)) => "gaps smooth",
        Command::Gaps(GapsCmd::Extrapolate(_)) => "gaps extrapolate",
        Command::Sim(SimCmd::Outer(_)) => "sim outer",
        Command::Sim(SimCmd::Full(_)) => "sim full",
        Command::Fit(_) => "fit",
        Command::Plan(PlanCmd::Estimate(_)) => "plan estimate",
        Command::Plan(PlanCmd::Optimize(_)) => "plan optimize",
        Command::Validate(_) => "validate",
        Command::Plot(_) => "plot",
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    let params = serde_json::to_value(&cli.command).expect("arguments serialize");
    let outcome = Run::new(&cli.out_dir, command_name(&cli.command), params, cli.seed, cli.timing).and_then(|mut run| {
        let v = execute(&cli, &mut run)?;
        run.finish()?;
        Ok(v)
    });
    match outcome {
        Ok(v) => {
            // A closed stdout is not a failure of the command.
            let mut out = std::io::stdout().lock();
            if cli.json {
                let _ = writeln!(out, "{}", serde_json::to_string_pretty(&v).unwrap());
            } else {
                let _ = writeln!(out, "{}: ok", command_name(&cli.command));
                if let Value::Object(m) = &v {
                    for (k, x) in m {
                        let _ = writeln!(out, "  {k}: {x}");
                    }
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(1)
        }
    }
}
