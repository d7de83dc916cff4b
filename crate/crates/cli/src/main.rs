//! `entbench`: layouts, embeddings, simulated experiments, mitigation and
//! reports from the command line.
//!
//! Exit codes: 0 success, 2 usage, 3 validation, 4 runtime failure.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use entbench::analyze::{CoherenceEstimator, Reducer};
use entbench::circuit::DdScheme;
use entbench::embed::{embed_ghz, embed_ghz_best, plan_qst_batches, schedule_graph_state, EdgeWeight};
use entbench::mitigate::{mitigate, ConfusionSpec, SolverOptions};
use entbench::protocol::{
    run_experiment, CalibrationSource, ExperimentKind, ExperimentPlan, ExperimentRecord, ProtocolError, Qrem, RawResult,
};
use entbench::sim::{Counts, NoiseChannels, NoiseModel, Simulator};
use entbench::topology::{
    heavy_hex, heavy_hex_trimmed, line, load_layout, presets, save_layout, DeviceGraph, Edge, Layout, LayoutError,
    QubitId,
};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "entbench", version, about = "Entanglement benchmarking on heavy-hex style devices")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a device layout file.
    Layout(LayoutArgs),
    /// Plan a GHZ embedding or a graph-state schedule.
    #[command(subcommand)]
    Embed(EmbedCommand),
    /// Pack pair-tomography sets into batches.
    Batches {
        layout: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run an experiment on the simulator and store the record.
    Run(RunArgs),
    /// Mitigate readout errors in a counts file.
    Mitigate(MitigateArgs),
    /// Re-analyse a stored record and check it against its derived results.
    Analyze {
        record: PathBuf,
        /// Overwrite the stored derived results with the recomputed ones.
        #[arg(long)]
        write: bool,
    },
    /// Write tables, charts and maps for a stored record.
    Report {
        record: PathBuf,
        /// Output directory (default: `<record>/report`).
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct LayoutArgs {
    /// heavy-hex, heavy-hex-trimmed, line, or a preset name.
    kind: String,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    /// Qubit count for `line`.
    #[arg(long)]
    n: Option<usize>,
    /// Comma-separated qubits to mark inactive.
    #[arg(long, value_delimiter = ',')]
    inactive: Vec<usize>,
    /// Symmetric readout flip probability on every qubit.
    #[arg(long)]
    readout_flip: Option<f64>,
    #[arg(long, requires = "t2")]
    t1: Option<f64>,
    #[arg(long, requires = "t1")]
    t2: Option<f64>,
    /// Residual ZZ rate on every edge, MHz.
    #[arg(long)]
    zz: Option<f64>,
    #[arg(long, requires = "cx_error")]
    sx_error: Option<f64>,
    #[arg(long, requires = "sx_error")]
    cx_error: Option<f64>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Subcommand, Debug)]
enum EmbedCommand {
    /// Layer-greedy GHZ embedding.
    Ghz {
        layout: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, conflicts_with = "trial_all_sources")]
        source: Option<usize>,
        /// Try every active qubit as the source (the default without --source).
        #[arg(long)]
        trial_all_sources: bool,
        /// cx-error, unit or t1-aware.
        #[arg(long, default_value = "cx-error")]
        weight: EdgeWeight,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// CZ-layer schedule of the device graph state.
    Graph {
        layout: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also write the schedule as Graphviz DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum RunKind {
    GhzFidelity,
    GhzDecay,
    GraphCharacterise,
    GraphDecay,
}

#[derive(Args, Debug)]
struct RunArgs {
    kind: RunKind,
    layout: PathBuf,
    #[arg(long, conflicts_with = "exact")]
    shots: Option<u64>,
    /// Use exact outcome distributions instead of sampling.
    #[arg(long)]
    exact: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "both")]
    qrem: Qrem,
    /// Decoupling scheme(s): none, hahn, double-pi, pdd:<rate>, spdd:<rate>.
    /// graph-decay accepts a comma-separated list.
    #[arg(long, value_delimiter = ',')]
    dd: Vec<DdScheme>,
    /// Delay grid `start:stop:step` in µs, stop included.
    #[arg(long, value_parser = parse_grid)]
    delay_grid: Option<DelayGrid>,
    /// Single idle delay in µs for graph-characterise.
    #[arg(long)]
    delay: Option<f64>,
    /// GHZ size for ghz-fidelity.
    #[arg(long)]
    n: Option<usize>,
    /// GHZ sizes for ghz-decay.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    replicates: usize,
    /// Simulated noise: none, all, or a comma list of gate, relaxation, zz, readout.
    #[arg(long, default_value = "none", value_parser = parse_noise)]
    noise: NoiseChannels,
    /// Readout calibration used for mitigation: estimated from calibration
    /// circuits, or stored in the layout.
    #[arg(long, default_value = "estimated")]
    calibration: CalibrationSource,
    /// overlap or linear (default depends on the experiment).
    #[arg(long)]
    estimator: Option<CoherenceEstimator>,
    /// max or mean over ring projections.
    #[arg(long)]
    reducer: Option<Reducer>,
    /// Minimum conditioned shots for a ring projection.
    #[arg(long)]
    min_shots: Option<u64>,
    /// Edges `a-b` left out of graph-state preparation.
    #[arg(long, value_delimiter = ',', value_parser = parse_edge)]
    fault: Vec<Edge>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct MitigateArgs {
    /// `{bitstring: count}` JSON, or a stored record counts file.
    counts: PathBuf,
    layout: PathBuf,
    /// Measured qubits; the rightmost bit belongs to the first qubit.
    #[arg(long, value_delimiter = ',', required = true)]
    qubits: Vec<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    hamming: Option<u32>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Delays in ns.
#[derive(Clone, Debug)]
struct DelayGrid(Vec<u64>);

fn parse_grid(s: &str) -> Result<DelayGrid, String> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let [a, b, step] = parts[..] else {
        return Err("expected start:stop:step".into());
    };
    if !(step > 0.0) || !(a >= 0.0) || b < a || !b.is_finite() {
        return Err("need 0 <= start <= stop and step > 0".into());
    }
    let k = ((b - a) / step + 1e-9).floor() as u64;
    if k > 100_000 {
        return Err("grid too long".into());
    }
    Ok(DelayGrid((0..=k).map(|i| ((a + i as f64 * step) * 1000.0).round() as u64).collect()))
}

fn parse_noise(s: &str) -> Result<NoiseChannels, String> {
    match s {
        "none" => return Ok(NoiseChannels::NONE),
        "all" => return Ok(NoiseChannels::ALL),
        _ => {}
    }
    let mut c = NoiseChannels::NONE;
    for part in s.split(',') {
        match part.trim() {
            "gate" => c.gate = true,
            "relaxation" => c.relaxation = true,
            "zz" => c.zz = true,
            "readout" => c.readout = true,
            other => return Err(format!("unknown noise channel {other:?}")),
        }
    }
    Ok(c)
}

fn parse_edge(s: &str) -> Result<Edge, String> {
    let (a, b) = s.split_once('-').ok_or("expected a-b")?;
    let q = |x: &str| x.trim().parse::<usize>().map_err(|e| e.to_string());
    Edge::new(q(a)?, q(b)?).ok_or_else(|| format!("{s}: not an edge"))
}

/// An error and the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn validation(e: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 3, error: e.into() }
}

fn runtime(e: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 4, error: e.into() }
}

fn from_protocol(e: ProtocolError) -> Failure {
    if e.is_validation() {
        validation(e)
    } else {
        runtime(e)
    }
}

fn from_layout(e: LayoutError) -> Failure {
    match e {
        LayoutError::Io(_) => runtime(e),
        _ => validation(e),
    }
}

type Outcome = Result<(), Failure>;

fn write_file(path: &Path, contents: &str) -> Outcome {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(runtime)?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display())).map_err(runtime)
}

fn json_string<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("outputs serialize");
    s.push('\n');
    s
}

fn emit<T: serde::Serialize>(v: &T, output: Option<&Path>) -> Outcome {
    match output {
        Some(p) => write_file(p, &json_string(v)),
        None => {
            print!("{}", json_string(v));
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<Layout, Failure> {
    load_layout(path).map_err(|e| {
        let message = anyhow!("{}: {e}", path.display());
        Failure { error: message, ..from_layout(e) }
    })
}

fn device_name(path: &Path) -> String {
    path.file_stem().and_then(|s| s.to_str()).unwrap_or("device").to_string()
}

fn cmd_layout(a: LayoutArgs) -> Outcome {
    let need = |v: Option<usize>, flag: &str| v.ok_or_else(|| validation(anyhow!("{} needs --{flag}", a.kind)));
    let graph: DeviceGraph = match a.kind.as_str() {
        "heavy-hex" => heavy_hex(need(a.rows, "rows")?, need(a.cols, "cols")?).map_err(validation)?,
        "heavy-hex-trimmed" => heavy_hex_trimmed(need(a.rows, "rows")?, need(a.cols, "cols")?).map_err(validation)?,
        "line" => line(need(a.n, "n")?).map_err(validation)?,
        name => presets::by_name(name).ok_or_else(|| {
            validation(anyhow!("unknown layout {name:?}; expected heavy-hex, heavy-hex-trimmed, line or one of {:?}", presets::NAMES))
        })?,
    };
    let graph = if a.inactive.is_empty() {
        graph
    } else {
        let extra: Vec<QubitId> = a.inactive.iter().map(|&q| QubitId(q)).collect();
        graph.with_inactive(&extra).map_err(validation)?
    };
    let mut layout = Layout::with_defaults(graph);
    let mut cal = layout.calibration;
    if let Some(p) = a.readout_flip {
        cal = cal.with_readout_flip(p);
    }
    if let (Some(t1), Some(t2)) = (a.t1, a.t2) {
        cal = cal.with_t2(t1, t2);
    }
    if let Some(z) = a.zz {
        cal = cal.with_zz(z);
    }
    if let (Some(sx), Some(cx)) = (a.sx_error, a.cx_error) {
        cal = cal.with_gate_errors(sx, cx);
    }
    layout.calibration = cal;
    layout.validate().map_err(validation)?;
    save_layout(&layout, &a.output).map_err(from_layout)?;
    println!(
        "{} qubits ({} active), {} edges, max degree {} -> {}",
        layout.graph.n_qubits(),
        layout.graph.n_active(),
        layout.graph.edge_count(),
        layout.graph.max_degree(),
        a.output.display()
    );
    Ok(())
}

fn cmd_embed(c: EmbedCommand) -> Outcome {
    match c {
        EmbedCommand::Ghz { layout, n, source, trial_all_sources: _, weight, output } => {
            let l = load(&layout)?;
            let e = match source {
                Some(s) => embed_ghz(&l.graph, &l.calibration, QubitId(s), n, weight),
                None => {
                    let candidates: Vec<QubitId> = l.graph.active_qubits().collect();
                    embed_ghz_best(&l.graph, &l.calibration, n, &candidates, weight)
                }
            }
            .map_err(validation)?;
            emit(&e, output.as_deref())?;
            eprintln!("GHZ-{n} from qubit {} at CNOT depth {} (cost {:.4})", e.source, e.depth, e.total_cost);
            Ok(())
        }
        EmbedCommand::Graph { layout, output, dot } => {
            let l = load(&layout)?;
            let s = schedule_graph_state(&l.graph);
            emit(&s, output.as_deref())?;
            if let Some(p) = dot {
                write_file(&p, &s.to_dot(l.graph.n_qubits()))?;
            }
            eprintln!("{} CZ gates in {} layers", s.edges().count(), s.depth());
            Ok(())
        }
    }
}

fn cmd_batches(layout: PathBuf, output: Option<PathBuf>) -> Outcome {
    let l = load(&layout)?;
    let plan = plan_qst_batches(&l.graph);
    emit(&plan, output.as_deref())?;
    eprintln!(
        "{} tomography sets in {} batches, {} circuits",
        plan.sets().count(),
        plan.n_batches(),
        entbench::embed::circuits_per_plan(&plan)
    );
    Ok(())
}

fn build_plan(a: &RunArgs, device: String) -> Result<ExperimentPlan, Failure> {
    let usage = |m: &str| Failure { code: 2, error: anyhow!("{m}") };
    let grid = || a.delay_grid.clone().map(|g| g.0).ok_or_else(|| usage("this experiment needs --delay-grid"));
    let one_dd = || match a.dd.as_slice() {
        [] => Ok(DdScheme::None),
        [d] => Ok(*d),
        _ => Err(usage("this experiment takes a single --dd scheme")),
    };
    let mut plan = match a.kind {
        RunKind::GhzFidelity => ExperimentPlan::ghz_fidelity(a.n.ok_or_else(|| usage("ghz-fidelity needs --n"))?, a.replicates),
        RunKind::GhzDecay => {
            if a.sizes.is_empty() {
                return Err(usage("ghz-decay needs --sizes"));
            }
            ExperimentPlan::ghz_decay(a.sizes.clone(), grid()?, one_dd()?, a.replicates)
        }
        RunKind::GraphCharacterise => {
            let mut p = ExperimentPlan::graph_characterisation(a.replicates);
            let delay_ns = a.delay.map(|d| (d * 1000.0).round() as u64).unwrap_or(0);
            p.kind = ExperimentKind::GraphCharacterisation { replicates: a.replicates, delay_ns, dd: one_dd()? };
            p
        }
        RunKind::GraphDecay => {
            let dd = if a.dd.is_empty() { vec![DdScheme::None] } else { a.dd.clone() };
            ExperimentPlan::graph_decay(grid()?, dd, a.replicates)
        }
    };
    plan.device = device;
    plan.seed = a.seed;
    plan.qrem = a.qrem;
    plan.calibration = a.calibration;
    if a.exact {
        plan.shots = None;
    } else if let Some(s) = a.shots {
        plan.shots = Some(s);
    }
    if let Some(e) = a.estimator {
        plan.estimator = e;
    }
    if let Some(r) = a.reducer {
        plan.reducer = r;
    }
    if let Some(m) = a.min_shots {
        plan.min_shots = m;
    }
    if let Some(t) = a.tol {
        plan.solver.tol = t;
    }
    if let Some(m) = a.max_iter {
        plan.solver.max_iter = m;
    }
    plan.faults = a.fault.clone();
    plan.validate().map_err(from_protocol)?;
    Ok(plan)
}

fn cmd_run(a: RunArgs) -> Outcome {
    let layout = load(&a.layout)?;
    let plan = build_plan(&a, device_name(&a.layout))?;
    let backend = if a.noise == NoiseChannels::NONE {
        Simulator::noiseless()
    } else {
        Simulator::new(NoiseModel::new(layout.calibration.clone(), a.noise))
    };
    let start = Instant::now();
    let record = run_experiment(&layout, &plan, &backend).map_err(from_protocol)?;
    record.save(&a.output).map_err(runtime)?;
    let (text, _) = report::build(&record);
    print!("{text}");
    println!("{} circuits in {:.1?} -> {}", record.raw.len(), start.elapsed(), a.output.display());
    Ok(())
}

fn read_counts(path: &Path) -> Result<RawResult, Failure> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display())).map_err(runtime)?;
    if let Ok(r) = serde_json::from_str::<RawResult>(&text) {
        return Ok(r);
    }
    let c: Counts = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display())).map_err(validation)?;
    Ok(RawResult::Counts(c))
}

fn cmd_mitigate(a: MitigateArgs) -> Outcome {
    let layout = load(&a.layout)?;
    let raw = read_counts(&a.counts)?;
    let qubits: Vec<QubitId> = a.qubits.iter().map(|&q| QubitId(q)).collect();
    if let Some(q) = qubits.iter().find(|q| !layout.graph.contains(**q)) {
        return Err(validation(anyhow!("qubit {q} is not on the device")));
    }
    if raw.n_bits() != qubits.len() {
        return Err(validation(anyhow!("counts have {} bits but {} qubits were given", raw.n_bits(), qubits.len())));
    }
    let mut opts = SolverOptions { hamming_limit: a.hamming, ..SolverOptions::default() };
    if let Some(t) = a.tol {
        opts.tol = t;
    }
    if let Some(m) = a.max_iter {
        opts.max_iter = m;
    }
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return Err(validation(anyhow!("--tol and --max-iter must be positive")));
    }
    let spec = ConfusionSpec::from_calibration(&layout.calibration, &qubits);
    let q = mitigate(&raw.dist(), raw.shots(), &spec, opts).map_err(runtime)?;
    let out = json!({
        "qubits": a.qubits,
        "quasi": q.probs,
        "nearest": q.nearest_physical(),
        "overhead": q.overhead,
        "sigma_bound": q.sigma_bound(),
        "iterations": q.iterations,
        "residual": q.residual,
        "converged": q.converged,
    });
    emit(&out, a.output.as_deref())?;
    eprintln!(
        "{} outcomes, overhead {:.4}, residual {:.2e} after {} iterations{}",
        q.probs.len(),
        q.overhead,
        q.residual,
        q.iterations,
        if q.converged { "" } else { " (not converged)" }
    );
    Ok(())
}

fn cmd_analyze(dir: PathBuf, write: bool) -> Outcome {
    let mut record = ExperimentRecord::load(&dir).map_err(from_protocol)?;
    let fresh = record.recompute().map_err(from_protocol)?;
    let same = json_string(&fresh) == json_string(&record.derived);
    if same {
        println!("derived results reproduce exactly");
    } else if write {
        record.derived = fresh;
        record.save(&dir).map_err(runtime)?;
        println!("derived results differed and were rewritten");
    } else {
        return Err(runtime(anyhow!("stored derived results do not match re-analysis of the counts")));
    }
    print!("{}", report::build(&record).0);
    Ok(())
}

fn cmd_report(dir: PathBuf, output: Option<PathBuf>) -> Outcome {
    let record = ExperimentRecord::load(&dir).map_err(from_protocol)?;
    let out = output.unwrap_or_else(|| dir.join("report"));
    let (text, files) = report::build(&record);
    for (name, contents) in &files {
        write_file(&out.join(name), contents)?;
    }
    print!("{text}");
    println!("{} files -> {}", files.len(), out.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::Layout(a) => cmd_layout(a),
        Command::Embed(c) => cmd_embed(c),
        Command::Batches { layout, output } => cmd_batches(layout, output),
        Command::Run(a) => cmd_run(a),
        Command::Mitigate(a) => cmd_mitigate(a),
        Command::Analyze { record, write } => cmd_analyze(record, write),
        Command::Report { record, output } => cmd_report(record, output),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ENTBENCH_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(4);
        }
    }
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
