//! Experiment records and their on-disk form.
//!
//! ```text
//! <dir>/plan.json           the ExperimentPlan
//! <dir>/layout.json         device graph and calibration
//! <dir>/metadata.json       version, wall time, thread count (not reproducible)
//! <dir>/counts/<id>.json    one file per simulated circuit
//! <dir>/derived/design.json embeddings, schedule, batches
//! <dir>/derived/result.json analysis output
//! ```
//!
//! Every file except `metadata.json` is a deterministic function of the plan,
//! the layout and the backend.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{analyze, Derived, Design, ExperimentPlan, ProtocolError, RawMap};
use crate::sim::{Counts, ProbDist, RunResult};
use crate::topology::Layout;

/// Outcome of one circuit as stored in a record.
#[derive(Clone, Debug, PartialEq)]
pub enum RawResult {
    Counts(Counts),
    Exact(ProbDist),
}

impl RawResult {
    pub fn dist(&self) -> ProbDist {
        match self {
            RawResult::Counts(c) => c.to_dist(),
            RawResult::Exact(p) => p.clone(),
        }
    }

    pub fn shots(&self) -> Option<u64> {
        match self {
            RawResult::Counts(c) => Some(c.shots()),
            RawResult::Exact(_) => None,
        }
    }

    pub fn n_bits(&self) -> usize {
        match self {
            RawResult::Counts(c) => c.n_bits(),
            RawResult::Exact(p) => p.n_bits(),
        }
    }
}

impl From<RunResult> for RawResult {
    fn from(r: RunResult) -> Self {
        match r {
            RunResult::Sampled(c) => RawResult::Counts(c),
            RunResult::Exact(p) => RawResult::Exact(p),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    n_bits: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shots: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<Counts>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probabilities: Option<ProbDist>,
}

impl Serialize for RawResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let file = match self {
            RawResult::Counts(c) => {
                RawFile { n_bits: c.n_bits(), shots: Some(c.shots()), counts: Some(c.clone()), probabilities: None }
            }
            RawResult::Exact(p) => RawFile { n_bits: p.n_bits(), shots: None, counts: None, probabilities: Some(p.clone()) },
        };
        file.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RawResult {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let f = RawFile::deserialize(d)?;
        match (f.counts, f.probabilities) {
            (Some(c), None) => {
                let c = Counts::from_map(f.n_bits, c.iter().collect());
                if f.shots.is_some_and(|s| s != c.shots()) {
                    return Err(D::Error::custom("shots do not match the counts"));
                }
                Ok(RawResult::Counts(c))
            }
            (None, Some(p)) => Ok(RawResult::Exact(ProbDist::from_map(f.n_bits, p.as_map().clone()))),
            _ => Err(D::Error::custom("expected exactly one of counts or probabilities")),
        }
    }
}

/// Run facts that differ between otherwise identical runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub version: String,
    pub created_unix_s: u64,
    pub elapsed_ms: u64,
    pub threads: usize,
}

impl Metadata {
    pub(crate) fn now(elapsed: Duration) -> Self {
        Metadata {
            version: env!("CARGO_PKG_VERSION").to_string(),
            created_unix_s: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            elapsed_ms: elapsed.as_millis() as u64,
            threads: rayon::current_num_threads(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub plan: ExperimentPlan,
    pub layout: Layout,
    pub design: Design,
    /// Circuit outcomes keyed by circuit id.
    pub raw: BTreeMap<String, RawResult>,
    pub derived: Derived,
    pub metadata: Metadata,
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("records serialize");
    s.push('\n');
    s
}

impl ExperimentRecord {
    /// Re-analyses the stored counts.
    pub fn recompute(&self) -> Result<Derived, ProtocolError> {
        analyze(&self.layout, &self.plan, &self.design, &self.raw as &RawMap)
    }

    /// Whether re-analysis reproduces the stored results byte for byte.
    pub fn verify(&self) -> Result<bool, ProtocolError> {
        Ok(to_json(&self.recompute()?) == to_json(&self.derived))
    }

    pub fn save(&self, dir: impl AsRef<Path>) -> Result<(), ProtocolError> {
        let dir = dir.as_ref();
        let counts = dir.join("counts");
        let derived = dir.join("derived");
        if counts.exists() {
            fs::remove_dir_all(&counts)?;
        }
        fs::create_dir_all(&counts)?;
        fs::create_dir_all(&derived)?;
        fs::write(dir.join("plan.json"), to_json(&self.plan))?;
        fs::write(dir.join("layout.json"), self.layout.to_json())?;
        fs::write(dir.join("metadata.json"), to_json(&self.metadata))?;
        fs::write(derived.join("design.json"), to_json(&self.design))?;
        fs::write(derived.join("result.json"), to_json(&self.derived))?;
        for (id, r) in &self.raw {
            fs::write(counts.join(format!("{id}.json")), to_json(r))?;
        }
        Ok(())
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self, ProtocolError> {
        let dir = dir.as_ref();
        let read = |p: &Path| fs::read_to_string(p);
        let plan: ExperimentPlan = serde_json::from_str(&read(&dir.join("plan.json"))?)?;
        let layout = Layout::from_json(&read(&dir.join("layout.json"))?)?;
        let metadata: Metadata = serde_json::from_str(&read(&dir.join("metadata.json"))?)?;
        let design: Design = serde_json::from_str(&read(&dir.join("derived/design.json"))?)?;
        let derived: Derived = serde_json::from_str(&read(&dir.join("derived/result.json"))?)?;
        let mut raw = BTreeMap::new();
        for entry in fs::read_dir(dir.join("counts"))? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
                raw.insert(id, serde_json::from_str(&read(&path)?)?);
            }
        }
        Ok(ExperimentRecord { plan, layout, design, raw, derived, metadata })
    }
}
