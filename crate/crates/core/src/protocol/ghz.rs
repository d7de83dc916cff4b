//! GHZ fidelity and GHZ decay experiments.

use serde::{Deserialize, Serialize};

use super::{fetch, mitigated, Design, ExperimentPlan, Job, ProtocolError, RawMap, Readout};
use crate::analyze::{analyze_mqc, fit_decay, fit_scaling, DecayFit, LinearFit, MqcResult, Stat};
use crate::circuit::{build_ghz_population, build_mqc, mqc_phase_grid, DdScheme, Idle};
use crate::embed::{embed_ghz_best, EdgeWeight, GhzEmbedding};
use crate::sim::ProbDist;
use crate::topology::{Layout, QubitId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MqcSummary {
    pub population: Stat,
    pub coherence: Stat,
    pub fidelity: Stat,
    pub replicates: Vec<MqcResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhzFidelityResult {
    pub n: usize,
    pub source: QubitId,
    pub depth: usize,
    /// Phase-swept MQC circuits per replicate.
    pub mqc_circuits: usize,
    /// Population circuits per replicate.
    pub population_circuits: usize,
    pub raw: Option<MqcSummary>,
    pub mitigated: Option<MqcSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySeries {
    pub n: usize,
    pub delays_ns: Vec<u64>,
    pub coherence: Vec<Stat>,
    pub fit: DecayFit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayAnalysis {
    pub series: Vec<DecaySeries>,
    /// Decay rate against GHZ size, when more than one size was run.
    pub scaling: Option<LinearFit>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhzDecayResult {
    pub dd: DdScheme,
    pub raw: Option<DecayAnalysis>,
    pub mitigated: Option<DecayAnalysis>,
}

pub(super) fn design(layout: &Layout, sizes: &[usize]) -> Result<Design, ProtocolError> {
    let candidates: Vec<QubitId> = layout.graph.active_qubits().collect();
    let embeddings = sizes
        .iter()
        .map(|&n| embed_ghz_best(&layout.graph, &layout.calibration, n, &candidates, EdgeWeight::CxError))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Design::Ghz { embeddings })
}

fn prefix(n: usize, k: usize, r: usize, decay: bool) -> String {
    if decay {
        format!("n{n:02}-t{k:02}-r{r:02}")
    } else {
        format!("r{r:02}")
    }
}

fn x_ns(layout: &Layout, e: &GhzEmbedding) -> u64 {
    e.included.iter().map(|&q| layout.calibration.qubit(q).x_ns).max().unwrap_or(0)
}

fn mqc_jobs(e: &GhzEmbedding, prefix: &str, idle: Idle, out: &mut Vec<Job>) -> Result<(), ProtocolError> {
    out.push(Job { id: format!("{prefix}-pop"), circuit: build_ghz_population(e, idle)? });
    for (j, phi) in mqc_phase_grid(e.size()).into_iter().enumerate() {
        out.push(Job { id: format!("{prefix}-phi{j:02}"), circuit: build_mqc(e, phi, false, idle)? });
    }
    Ok(())
}

pub(super) fn jobs(layout: &Layout, plan: &ExperimentPlan, embeddings: &[GhzEmbedding]) -> Result<Vec<Job>, ProtocolError> {
    let mut out = Vec::new();
    match &plan.kind {
        super::ExperimentKind::GhzFidelity { replicates, .. } => {
            let e = &embeddings[0];
            for r in 0..*replicates {
                mqc_jobs(e, &prefix(e.size(), 0, r, false), Idle::none(), &mut out)?;
            }
        }
        super::ExperimentKind::GhzDecay { delays_ns, dd, replicates, .. } => {
            for e in embeddings {
                for (k, &delay_ns) in delays_ns.iter().enumerate() {
                    let idle = Idle { delay_ns, dd: *dd, x_ns: x_ns(layout, e) };
                    for r in 0..*replicates {
                        mqc_jobs(e, &prefix(e.size(), k, r, true), idle, &mut out)?;
                    }
                }
            }
        }
        _ => unreachable!("GHZ jobs for a graph-state plan"),
    }
    Ok(out)
}

fn replicate(
    plan: &ExperimentPlan,
    e: &GhzEmbedding,
    prefix: &str,
    readout: &Readout,
    raw: &RawMap,
    mitigate: bool,
) -> Result<MqcResult, ProtocolError> {
    let qubits = e.qubits_sorted();
    let dist = |id: String| -> Result<ProbDist, ProtocolError> {
        let r = fetch(raw, &id)?;
        if mitigate {
            mitigated(r, &qubits, readout, plan.solver)
        } else {
            Ok(r.dist())
        }
    };
    let pop = dist(format!("{prefix}-pop"))?;
    let phases = mqc_phase_grid(e.size())
        .into_iter()
        .enumerate()
        .map(|(j, phi)| Ok((phi, dist(format!("{prefix}-phi{j:02}"))?)))
        .collect::<Result<Vec<_>, ProtocolError>>()?;
    Ok(analyze_mqc(&pop, &phases, e.size(), plan.estimator)?)
}

fn summarize(results: Vec<MqcResult>) -> MqcSummary {
    let pick = |f: fn(&MqcResult) -> f64| Stat::of(&results.iter().map(f).collect::<Vec<_>>());
    MqcSummary {
        population: pick(|m| m.population),
        coherence: pick(|m| m.coherence),
        fidelity: pick(|m| m.fidelity),
        replicates: results,
    }
}

fn modes(plan: &ExperimentPlan) -> [(bool, bool); 2] {
    [(false, plan.qrem.raw()), (true, plan.qrem.mitigated())]
}

pub(super) fn analyze_fidelity(
    plan: &ExperimentPlan,
    e: &GhzEmbedding,
    n: usize,
    replicates: usize,
    readout: &Readout,
    raw: &RawMap,
) -> Result<GhzFidelityResult, ProtocolError> {
    let mut out = [None, None];
    for (slot, (mitigate, wanted)) in modes(plan).into_iter().enumerate() {
        if wanted {
            let reps = (0..replicates)
                .map(|r| replicate(plan, e, &prefix(n, 0, r, false), readout, raw, mitigate))
                .collect::<Result<Vec<_>, _>>()?;
            out[slot] = Some(summarize(reps));
        }
    }
    let [raw_s, mit_s] = out;
    Ok(GhzFidelityResult {
        n,
        source: e.source,
        depth: e.depth,
        mqc_circuits: 2 * n + 2,
        population_circuits: 1,
        raw: raw_s,
        mitigated: mit_s,
    })
}

pub(super) fn analyze_decay(
    plan: &ExperimentPlan,
    embeddings: &[GhzEmbedding],
    delays_ns: &[u64],
    dd: DdScheme,
    replicates: usize,
    readout: &Readout,
    raw: &RawMap,
) -> Result<GhzDecayResult, ProtocolError> {
    let mut out = [None, None];
    for (slot, (mitigate, wanted)) in modes(plan).into_iter().enumerate() {
        if !wanted {
            continue;
        }
        let mut series = Vec::new();
        for e in embeddings {
            let n = e.size();
            let coherence = (0..delays_ns.len())
                .map(|k| {
                    let c = (0..replicates)
                        .map(|r| Ok(replicate(plan, e, &prefix(n, k, r, true), readout, raw, mitigate)?.coherence))
                        .collect::<Result<Vec<f64>, ProtocolError>>()?;
                    Ok(Stat::of(&c))
                })
                .collect::<Result<Vec<Stat>, ProtocolError>>()?;
            let samples: Vec<(f64, f64)> =
                delays_ns.iter().zip(&coherence).map(|(&t, s)| (t as f64 / 1000.0, s.mean)).collect();
            let fit = fit_decay(&samples)?;
            series.push(DecaySeries { n, delays_ns: delays_ns.to_vec(), coherence, fit });
        }
        let scaling = if series.len() >= 2 {
            Some(fit_scaling(&series.iter().map(|s| (s.n as f64, s.fit.alpha)).collect::<Vec<_>>())?)
        } else {
            None
        };
        out[slot] = Some(DecayAnalysis { series, scaling });
    }
    let [raw_a, mit_a] = out;
    Ok(GhzDecayResult { dd, raw: raw_a, mitigated: mit_a })
}
