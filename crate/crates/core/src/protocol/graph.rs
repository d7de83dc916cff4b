//! Whole-device graph-state characterisation and its delay sweeps.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fetch, mitigated, Design, ExperimentKind, ExperimentPlan, Job, ProtocolError, RawMap, Readout};
use crate::analyze::{
    build_entanglement_graph, negativity, reconstruct_pair_state, summary_row, AnalysisError, EntanglementGraph,
    SummaryRow,
};
use crate::circuit::{DdScheme, Idle, Pauli};
use crate::embed::{circuits_per_plan, plan_qst_batches, schedule_graph_state, GraphStateSchedule, TomographySet};
use crate::sim::{light_cone_reduce, Backend, LightConeMode, ProbDist};
use crate::topology::{Edge, Layout};

/// A tomography set, its batch, and how its light cone is simulated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SetDesign {
    pub batch: usize,
    pub set: TomographySet,
    pub mode: LightConeMode,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphResult {
    pub graph: EntanglementGraph,
    pub summary: SummaryRow,
    /// Ring projections dropped for having too few conditioned shots.
    pub skipped_projections: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacterisationResult {
    pub n_batches: usize,
    /// Circuits a device would run: nine settings per batch and replicate.
    pub device_circuits: usize,
    /// Light-cone circuits actually simulated.
    pub simulated_circuits: usize,
    pub raw: Option<GraphResult>,
    pub mitigated: Option<GraphResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub mean: f64,
    pub sd: f64,
    /// Negativity per edge, keyed `"a-b"`.
    pub edges: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDecayPoint {
    pub dd: DdScheme,
    pub delay_ns: u64,
    pub raw: Option<CurvePoint>,
    pub mitigated: Option<CurvePoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphDecayResult {
    pub points: Vec<GraphDecayPoint>,
}

fn setting_label((a, b): (Pauli, Pauli)) -> String {
    format!("{}{}", a.label(), b.label())
}

fn idles(plan: &ExperimentPlan, x_ns: u64) -> Vec<(String, Idle)> {
    match &plan.kind {
        ExperimentKind::GraphCharacterisation { delay_ns, dd, .. } => {
            vec![(String::new(), Idle { delay_ns: *delay_ns, dd: *dd, x_ns })]
        }
        ExperimentKind::GraphDecay { delays_ns, dd, .. } => dd
            .iter()
            .enumerate()
            .flat_map(|(d, &scheme)| {
                delays_ns.iter().enumerate().map(move |(k, &delay_ns)| (point_prefix(d, k), Idle { delay_ns, dd: scheme, x_ns }))
            })
            .collect(),
        _ => unreachable!("graph idles for a GHZ plan"),
    }
}

fn point_prefix(d: usize, k: usize) -> String {
    format!("d{d}-t{k:02}-")
}

fn job_id(point: &str, r: usize, s: &SetDesign, setting: (Pauli, Pauli)) -> String {
    format!("{point}r{r:02}-b{:02}-{}-{}", s.batch, s.set.pair.key(), setting_label(setting))
}

fn replicates(plan: &ExperimentPlan) -> usize {
    match &plan.kind {
        ExperimentKind::GraphCharacterisation { replicates, .. } | ExperimentKind::GraphDecay { replicates, .. } => *replicates,
        _ => unreachable!(),
    }
}

fn max_x_ns(layout: &Layout) -> u64 {
    layout.graph.active_qubits().map(|q| layout.calibration.qubit(q).x_ns).max().unwrap_or(0)
}

fn prepared_schedule(layout: &Layout, plan: &ExperimentPlan) -> Result<GraphStateSchedule, ProtocolError> {
    let mut s = schedule_graph_state(&layout.graph);
    for &e in &plan.faults {
        if !layout.graph.has_edge(e.lo(), e.hi()) {
            return Err(ProtocolError::InvalidPlan(format!("fault edge {} is not a device edge", e.key())));
        }
        s = s.without_edge(e);
    }
    Ok(s)
}

pub(super) fn design(layout: &Layout, plan: &ExperimentPlan, backend: &dyn Backend) -> Result<Design, ProtocolError> {
    let schedule = prepared_schedule(layout, plan)?;
    let batches = plan_qst_batches(&layout.graph);
    let idle = idles(plan, max_x_ns(layout)).into_iter().map(|(_, i)| i).max_by_key(|i| i.delay_ns).unwrap_or_default();
    let probe = (Pauli::Z, Pauli::Z);
    let mut sets = Vec::new();
    for (b, batch) in batches.batches.iter().enumerate() {
        for set in batch {
            let lc = light_cone_reduce(&layout.graph, set);
            let explicit = lc.circuit(&schedule, probe, idle, LightConeMode::Explicit)?;
            let mode = if explicit.used_qubits().len() <= backend.cap_for(&explicit) {
                LightConeMode::Explicit
            } else {
                log::info!("pair {}: light cone too large, simulating the core with dephasing marks", set.pair.key());
                LightConeMode::Marks
            };
            sets.push(SetDesign { batch: b, set: set.clone(), mode });
        }
    }
    let device_circuits = circuits_per_plan(&batches) * replicates(plan) * idles(plan, 0).len();
    Ok(Design::Graph { schedule, n_batches: batches.n_batches(), device_circuits, sets })
}

pub(super) fn jobs(
    layout: &Layout,
    plan: &ExperimentPlan,
    schedule: &GraphStateSchedule,
    sets: &[SetDesign],
) -> Result<Vec<Job>, ProtocolError> {
    let mut out = Vec::new();
    for (point, idle) in idles(plan, max_x_ns(layout)) {
        for r in 0..replicates(plan) {
            for s in sets {
                let lc = light_cone_reduce(&layout.graph, &s.set);
                for setting in Pauli::settings() {
                    let circuit = lc.circuit(schedule, setting, idle, s.mode)?;
                    out.push(Job { id: job_id(&point, r, s, setting), circuit });
                }
            }
        }
    }
    Ok(out)
}

/// Negativity of every usable ring projection of one set in one replicate.
/// Returns the values and the number of skipped projections.
fn projections(
    plan: &ExperimentPlan,
    s: &SetDesign,
    point: &str,
    r: usize,
    mitigate: bool,
    readout: &Readout,
    raw: &RawMap,
) -> Result<(Vec<f64>, usize), ProtocolError> {
    let support = s.set.support();
    let mut shots = None;
    let settings = Pauli::settings()
        .into_iter()
        .map(|setting| {
            let res = fetch(raw, &job_id(point, r, s, setting))?;
            shots = res.shots();
            let d: ProbDist = if mitigate { mitigated(res, &support, readout, plan.solver)? } else { res.dist() };
            Ok((setting, d))
        })
        .collect::<Result<Vec<_>, ProtocolError>>()?;
    let (mut values, mut skipped) = (Vec::new(), 0);
    for ring in 0..1u64 << s.set.ring.len() {
        match reconstruct_pair_state(&settings, &s.set, Some(ring), shots, plan.min_shots) {
            Ok(est) => values.push(negativity(&est.rho, &[1])?),
            Err(AnalysisError::InsufficientShots { .. }) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    Ok((values, skipped))
}

pub(super) fn analyze_point(
    layout: &Layout,
    plan: &ExperimentPlan,
    sets: &[SetDesign],
    point: &str,
    replicates: usize,
    readout: &Readout,
    raw: &RawMap,
) -> Result<(Option<GraphResult>, Option<GraphResult>), ProtocolError> {
    let mut out = [None, None];
    for (slot, (mitigate, wanted)) in [(false, plan.qrem.raw()), (true, plan.qrem.mitigated())].into_iter().enumerate() {
        if !wanted {
            continue;
        }
        let per_set = sets
            .par_iter()
            .map(|s| {
                let mut reps = Vec::with_capacity(replicates);
                let mut skipped = 0;
                for r in 0..replicates {
                    let (v, k) = projections(plan, s, point, r, mitigate, readout, raw)?;
                    reps.push(v);
                    skipped += k;
                }
                Ok((s.set.pair, reps, skipped))
            })
            .collect::<Result<Vec<(Edge, Vec<Vec<f64>>, usize)>, ProtocolError>>()?;
        let skipped_projections = per_set.iter().map(|p| p.2).sum();
        let table: BTreeMap<Edge, Vec<Vec<f64>>> = per_set.into_iter().map(|(e, reps, _)| (e, reps)).collect();
        let graph = build_entanglement_graph(&table, plan.reducer, mitigate);
        let summary = summary_row(&plan.device, &layout.graph, &graph);
        out[slot] = Some(GraphResult { graph, summary, skipped_projections });
    }
    let [a, b] = out;
    Ok((a, b))
}

fn curve(g: Option<GraphResult>) -> Option<CurvePoint> {
    g.map(|g| CurvePoint {
        mean: g.summary.mean_negativity,
        sd: g.summary.sd_negativity,
        edges: g.graph.edges.iter().map(|e| (e.edge.key(), e.negativity)).collect(),
    })
}

#[allow(clippy::too_many_arguments)]
pub(super) fn analyze_decay(
    layout: &Layout,
    plan: &ExperimentPlan,
    sets: &[SetDesign],
    delays_ns: &[u64],
    dd: &[DdScheme],
    replicates: usize,
    readout: &Readout,
    raw: &RawMap,
) -> Result<GraphDecayResult, ProtocolError> {
    let mut points = Vec::new();
    for (d, &scheme) in dd.iter().enumerate() {
        for (k, &delay_ns) in delays_ns.iter().enumerate() {
            let (r, m) = analyze_point(layout, plan, sets, &point_prefix(d, k), replicates, readout, raw)?;
            points.push(GraphDecayPoint { dd: scheme, delay_ns, raw: curve(r), mitigated: curve(m) });
        }
    }
    Ok(GraphDecayResult { points })
}
