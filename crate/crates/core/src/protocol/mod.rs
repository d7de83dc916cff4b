//! End-to-end experiments: plans, execution on a [`Backend`], analysis and
//! persisted records.
//!
//! Every derived number is a pure function of the plan, the layout, the
//! design (embeddings, schedules, batches) and the raw counts, so a stored
//! record can be re-analysed and compared bit for bit
//! ([`ExperimentRecord::verify`]).

mod ghz;
mod graph;
mod record;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analyze::{AnalysisError, CoherenceEstimator, Reducer, DEFAULT_MIN_SHOTS};
use crate::circuit::{Circuit, CircuitError, DdScheme};
use crate::embed::EmbedError;
use crate::mitigate::{calibration_circuits, mitigate, ConfusionSpec, MitigationError, SolverOptions};
use crate::seed;
use crate::sim::{Backend, ProbDist, SimError};
use crate::topology::{Edge, Layout, LayoutError, QubitId};

pub use ghz::{DecayAnalysis, DecaySeries, GhzDecayResult, GhzFidelityResult, MqcSummary};
pub use graph::{CharacterisationResult, CurvePoint, GraphDecayPoint, GraphDecayResult, GraphResult, SetDesign};
pub use record::{ExperimentRecord, Metadata, RawResult};

#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Mitigation(#[from] MitigationError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("no counts for circuit {0}")]
    MissingCounts(String),
    #[error(transparent)]
    Layout(#[from] LayoutError),
    #[error("record i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed record: {0}")]
    Parse(#[from] serde_json::Error),
}

impl ProtocolError {
    /// Whether the error comes from bad input rather than a failure while
    /// running.
    pub fn is_validation(&self) -> bool {
        matches!(self, ProtocolError::InvalidPlan(_) | ProtocolError::Embed(_) | ProtocolError::Parse(_))
            || matches!(self, ProtocolError::Layout(e) if !matches!(e, LayoutError::Io(_)))
    }
}

/// Which readout treatments are analysed.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Qrem {
    On,
    Off,
    #[default]
    Both,
}

impl Qrem {
    pub fn raw(self) -> bool {
        self != Qrem::On
    }

    pub fn mitigated(self) -> bool {
        self != Qrem::Off
    }
}

impl FromStr for Qrem {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "on" => Ok(Qrem::On),
            "off" => Ok(Qrem::Off),
            "both" => Ok(Qrem::Both),
            _ => Err(format!("unknown readout mitigation mode {s:?} (on|off|both)")),
        }
    }
}

/// Where the readout confusion matrices used for mitigation come from.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationSource {
    /// The layout's stored calibration.
    #[default]
    Stored,
    /// All-zeros / all-ones runs on the backend, with the plan's shots.
    Estimated,
}

impl FromStr for CalibrationSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "stored" => Ok(CalibrationSource::Stored),
            "estimated" => Ok(CalibrationSource::Estimated),
            _ => Err(format!("unknown calibration source {s:?} (stored|estimated)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExperimentKind {
    /// MQC fidelity of an `n`-qubit GHZ state.
    GhzFidelity { n: usize, replicates: usize },
    /// MQC coherence of each GHZ size over a delay grid.
    GhzDecay { sizes: Vec<usize>, delays_ns: Vec<u64>, dd: DdScheme, replicates: usize },
    /// Pair tomography of the native graph state on every edge.
    GraphCharacterisation {
        replicates: usize,
        #[serde(default)]
        delay_ns: u64,
        #[serde(default)]
        dd: DdScheme,
    },
    /// Characterisation repeated over a delay grid for each scheme.
    GraphDecay { delays_ns: Vec<u64>, dd: Vec<DdScheme>, replicates: usize },
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::GhzFidelity { .. } => "ghz-fidelity",
            ExperimentKind::GhzDecay { .. } => "ghz-decay",
            ExperimentKind::GraphCharacterisation { .. } => "graph-characterise",
            ExperimentKind::GraphDecay { .. } => "graph-decay",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub device: String,
    pub kind: ExperimentKind,
    /// `None` runs on exact output distributions.
    pub shots: Option<u64>,
    pub seed: u64,
    pub qrem: Qrem,
    pub calibration: CalibrationSource,
    pub solver: SolverOptions,
    pub estimator: CoherenceEstimator,
    pub reducer: Reducer,
    pub min_shots: u64,
    /// Edges whose CZ is left out of graph-state preparation.
    #[serde(default)]
    pub faults: Vec<Edge>,
}

impl ExperimentPlan {
    fn with_kind(kind: ExperimentKind, shots: u64, estimator: CoherenceEstimator) -> Self {
        ExperimentPlan {
            device: "device".into(),
            kind,
            shots: Some(shots),
            seed: 0,
            qrem: Qrem::Both,
            calibration: CalibrationSource::Stored,
            solver: SolverOptions::default(),
            estimator,
            reducer: Reducer::Max,
            min_shots: DEFAULT_MIN_SHOTS,
            faults: vec![],
        }
    }

    pub fn ghz_fidelity(n: usize, replicates: usize) -> Self {
        Self::with_kind(ExperimentKind::GhzFidelity { n, replicates }, 4096, CoherenceEstimator::Overlap)
    }

    /// Decay fits use the linear estimator so the fitted rate is that of
    /// the off-diagonal GHZ element.
    pub fn ghz_decay(sizes: Vec<usize>, delays_ns: Vec<u64>, dd: DdScheme, replicates: usize) -> Self {
        Self::with_kind(ExperimentKind::GhzDecay { sizes, delays_ns, dd, replicates }, 4096, CoherenceEstimator::Linear)
    }

    pub fn graph_characterisation(replicates: usize) -> Self {
        Self::with_kind(
            ExperimentKind::GraphCharacterisation { replicates, delay_ns: 0, dd: DdScheme::None },
            8192,
            CoherenceEstimator::Overlap,
        )
    }

    pub fn graph_decay(delays_ns: Vec<u64>, dd: Vec<DdScheme>, replicates: usize) -> Self {
        Self::with_kind(ExperimentKind::GraphDecay { delays_ns, dd, replicates }, 4096, CoherenceEstimator::Overlap)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |m: String| Err(ProtocolError::InvalidPlan(m));
        let increasing = |g: &[u64]| g.windows(2).all(|w| w[0] < w[1]);
        let replicates = match &self.kind {
            ExperimentKind::GhzFidelity { n, replicates } => {
                if *n == 0 {
                    return bad("GHZ size must be at least 1".into());
                }
                *replicates
            }
            ExperimentKind::GhzDecay { sizes, delays_ns, replicates, .. } => {
                if sizes.is_empty() || sizes.contains(&0) {
                    return bad("GHZ sizes must be non-empty and positive".into());
                }
                if delays_ns.is_empty() || !increasing(delays_ns) {
                    return bad("delay grid must be non-empty and strictly increasing".into());
                }
                *replicates
            }
            ExperimentKind::GraphCharacterisation { replicates, .. } => *replicates,
            ExperimentKind::GraphDecay { delays_ns, dd, replicates } => {
                if delays_ns.is_empty() || !increasing(delays_ns) {
                    return bad("delay grid must be non-empty and strictly increasing".into());
                }
                if dd.is_empty() {
                    return bad("at least one decoupling scheme is required".into());
                }
                *replicates
            }
        };
        if replicates == 0 {
            return bad("replicates must be at least 1".into());
        }
        if self.shots == Some(0) {
            return bad("shots must be positive".into());
        }
        if !(self.solver.tol > 0.0) || self.solver.max_iter == 0 {
            return bad("solver tolerance and iteration cap must be positive".into());
        }
        Ok(())
    }
}

/// Everything fixed before execution: embeddings, schedules, batches.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Design {
    Ghz { embeddings: Vec<crate::embed::GhzEmbedding> },
    Graph {
        schedule: crate::embed::GraphStateSchedule,
        n_batches: usize,
        device_circuits: usize,
        sets: Vec<SetDesign>,
    },
}

/// Analysis output, one variant per experiment kind.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Derived {
    GhzFidelity(GhzFidelityResult),
    GhzDecay(GhzDecayResult),
    GraphCharacterisation(CharacterisationResult),
    GraphDecay(GraphDecayResult),
}

pub(crate) struct Job {
    pub id: String,
    pub circuit: Circuit,
}

/// Raw results keyed by circuit id.
pub(crate) type RawMap = BTreeMap<String, RawResult>;

pub(crate) fn fetch<'a>(raw: &'a RawMap, id: &str) -> Result<&'a RawResult, ProtocolError> {
    raw.get(id).ok_or_else(|| ProtocolError::MissingCounts(id.to_string()))
}

fn calibration_id(k: usize) -> String {
    format!("cal-{:03}-{}", k / 2, if k % 2 == 0 { "zeros" } else { "ones" })
}

/// Readout confusion of every active qubit, indexed by qubit.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Readout {
    matrices: BTreeMap<QubitId, [[f64; 2]; 2]>,
}

impl Readout {
    fn resolve(layout: &Layout, plan: &ExperimentPlan, raw: &RawMap) -> Result<Readout, ProtocolError> {
        let qubits: Vec<QubitId> = layout.graph.active_qubits().collect();
        let spec = match plan.calibration {
            CalibrationSource::Stored => ConfusionSpec::from_calibration(&layout.calibration, &qubits),
            CalibrationSource::Estimated => {
                let runs = (0..calibration_circuits(&qubits).len())
                    .map(|k| Ok(fetch(raw, &calibration_id(k))?.dist()))
                    .collect::<Result<Vec<ProbDist>, ProtocolError>>()?;
                ConfusionSpec::from_calibration_runs(&runs)?
            }
        };
        Ok(Readout { matrices: qubits.into_iter().zip(spec.matrices).collect() })
    }

    pub(crate) fn spec(&self, qubits: &[QubitId]) -> ConfusionSpec {
        ConfusionSpec { matrices: qubits.iter().map(|q| self.matrices[q]).collect() }
    }
}

/// Mitigates `dist` over the measured qubits `qubits` and projects onto the
/// nearest probability distribution.
pub(crate) fn mitigated(
    raw: &RawResult,
    qubits: &[QubitId],
    readout: &Readout,
    opts: SolverOptions,
) -> Result<ProbDist, ProtocolError> {
    let q = mitigate(&raw.dist(), raw.shots(), &readout.spec(qubits), opts)?;
    if !q.converged {
        log::warn!("mitigation stopped at residual {:.2e} after {} iterations", q.residual, q.iterations);
    }
    Ok(q.nearest_physical())
}

fn jobs(layout: &Layout, plan: &ExperimentPlan, design: &Design) -> Result<Vec<Job>, ProtocolError> {
    let mut jobs = match (&plan.kind, design) {
        (ExperimentKind::GhzFidelity { .. } | ExperimentKind::GhzDecay { .. }, Design::Ghz { embeddings }) => {
            ghz::jobs(layout, plan, embeddings)?
        }
        (_, Design::Graph { schedule, sets, .. }) => graph::jobs(layout, plan, schedule, sets)?,
        _ => return Err(ProtocolError::InvalidPlan("design does not match the experiment kind".into())),
    };
    if plan.calibration == CalibrationSource::Estimated {
        let qubits: Vec<QubitId> = layout.graph.active_qubits().collect();
        jobs.extend(
            calibration_circuits(&qubits).into_iter().enumerate().map(|(k, circuit)| Job { id: calibration_id(k), circuit }),
        );
    }
    Ok(jobs)
}

/// Embeddings, schedules and light-cone choices for `plan`.
pub fn design(layout: &Layout, plan: &ExperimentPlan, backend: &dyn Backend) -> Result<Design, ProtocolError> {
    plan.validate()?;
    layout.validate().map_err(LayoutError::from)?;
    match &plan.kind {
        ExperimentKind::GhzFidelity { n, .. } => ghz::design(layout, std::slice::from_ref(n)),
        ExperimentKind::GhzDecay { sizes, .. } => ghz::design(layout, sizes),
        ExperimentKind::GraphCharacterisation { .. } | ExperimentKind::GraphDecay { .. } => {
            graph::design(layout, plan, backend)
        }
    }
}

/// Analyses raw results against a stored design.
pub fn analyze(layout: &Layout, plan: &ExperimentPlan, design: &Design, raw: &RawMap) -> Result<Derived, ProtocolError> {
    let readout = Readout::resolve(layout, plan, raw)?;
    match (&plan.kind, design) {
        (ExperimentKind::GhzFidelity { n, replicates }, Design::Ghz { embeddings }) => {
            Ok(Derived::GhzFidelity(ghz::analyze_fidelity(plan, &embeddings[0], *n, *replicates, &readout, raw)?))
        }
        (ExperimentKind::GhzDecay { delays_ns, dd, replicates, .. }, Design::Ghz { embeddings }) => Ok(Derived::GhzDecay(
            ghz::analyze_decay(plan, embeddings, delays_ns, *dd, *replicates, &readout, raw)?,
        )),
        (ExperimentKind::GraphCharacterisation { replicates, .. }, Design::Graph { n_batches, device_circuits, sets, .. }) => {
            let (raw_g, mit_g) = graph::analyze_point(layout, plan, sets, "", *replicates, &readout, raw)?;
            Ok(Derived::GraphCharacterisation(CharacterisationResult {
                n_batches: *n_batches,
                device_circuits: *device_circuits,
                simulated_circuits: sets.len() * 9 * replicates,
                raw: raw_g,
                mitigated: mit_g,
            }))
        }
        (ExperimentKind::GraphDecay { delays_ns, dd, replicates }, Design::Graph { sets, .. }) => {
            Ok(Derived::GraphDecay(graph::analyze_decay(layout, plan, sets, delays_ns, dd, *replicates, &readout, raw)?))
        }
        _ => Err(ProtocolError::InvalidPlan("design does not match the experiment kind".into())),
    }
}

/// Designs, runs and analyses `plan` on `backend`. Circuit `i` of the job
/// list is sampled with `seed::split(seed::split(plan.seed, 0), i)`.
pub fn run_experiment(layout: &Layout, plan: &ExperimentPlan, backend: &dyn Backend) -> Result<ExperimentRecord, ProtocolError> {
    let started = std::time::Instant::now();
    let design = design(layout, plan, backend)?;
    let jobs = jobs(layout, plan, &design)?;
    log::info!("{}: running {} circuits", plan.kind, jobs.len());
    let circuits: Vec<Circuit> = jobs.iter().map(|j| j.circuit.clone()).collect();
    let results = backend.run(&circuits, plan.shots, seed::split(plan.seed, 0))?;
    let raw: RawMap = jobs.into_iter().zip(results).map(|(j, r)| (j.id, RawResult::from(r))).collect();
    let derived = analyze(layout, plan, &design, &raw)?;
    Ok(ExperimentRecord {
        plan: plan.clone(),
        layout: layout.clone(),
        design,
        raw,
        derived,
        metadata: Metadata::now(started.elapsed()),
    })
}
