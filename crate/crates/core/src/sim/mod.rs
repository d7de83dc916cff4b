//! Execution backends.
//!
//! [`Simulator`] evolves a pure state when the noise model is unitary apart
//! from readout, and a density matrix otherwise. Only the qubits a circuit
//! touches are allocated, in ascending device order.

mod counts;
mod density;
mod kernel;
mod lightcone;

use std::collections::BTreeMap;

use num_complex::Complex64 as C;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Gate};
use crate::seed;
use crate::topology::{Calibration, QubitId};
use kernel::{apply_1q, apply_cx, Dm, Mat2};

pub use counts::{bitstring, parse_bitstring, sample_multinomial, sample_with_flips, Counts, ProbDist};
pub use density::{fidelity, hermitian_eigenvalues, DensityMatrix};
pub use lightcone::{light_cone_reduce, LightCone, LightConeMode};

/// Above this many measured bits, shots are drawn one at a time.
pub const MULTINOMIAL_MAX_BITS: usize = 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("circuit uses {used} qubits; the {kind} simulator is capped at {cap}")]
    TooManyQubits { used: usize, cap: usize, kind: &'static str },
    #[error("no calibration for qubit {0}")]
    UncalibratedQubit(QubitId),
    #[error("no calibration for the pair {0}-{1}")]
    UncalibratedEdge(QubitId, QubitId),
    #[error("qubit {0} is used after being measured")]
    MidCircuitMeasurement(QubitId),
    #[error("qubit {0} is not touched by the circuit")]
    QubitNotInCircuit(QubitId),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
}

/// Which physical effects a [`NoiseModel`] applies.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoiseChannels {
    /// Depolarizing after H, X (single-qubit) and CX, CZ (two-qubit).
    pub gate: bool,
    /// Amplitude and phase damping during delays.
    pub relaxation: bool,
    /// Residual ZZ between idle neighbours during delays.
    pub zz: bool,
    /// Classical readout confusion.
    pub readout: bool,
}

impl NoiseChannels {
    pub const ALL: Self = NoiseChannels { gate: true, relaxation: true, zz: true, readout: true };
    pub const NONE: Self = NoiseChannels { gate: false, relaxation: false, zz: false, readout: false };
    pub const READOUT: Self = NoiseChannels { readout: true, ..Self::NONE };
    pub const ZZ: Self = NoiseChannels { zz: true, ..Self::NONE };
    pub const RELAXATION: Self = NoiseChannels { relaxation: true, ..Self::NONE };
}

/// Slowly varying Z detuning, constant within a shot. Simulated as the
/// average over `realizations` draws of a Gaussian detuning per qubit.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiStatic {
    /// Standard deviation of the detuning in rad/µs.
    pub sigma: f64,
    pub realizations: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    pub calibration: Calibration,
    pub channels: NoiseChannels,
    pub quasi_static: Option<QuasiStatic>,
}

impl NoiseModel {
    pub fn new(calibration: Calibration, channels: NoiseChannels) -> Self {
        NoiseModel { calibration, channels, quasi_static: None }
    }

    pub fn with_quasi_static(mut self, q: QuasiStatic) -> Self {
        self.quasi_static = Some(q);
        self
    }

    fn needs_density(&self) -> bool {
        self.channels.gate || self.channels.relaxation || self.quasi_static.is_some()
    }

    fn qubit(&self, q: QubitId) -> Result<&crate::topology::QubitCalibration, SimError> {
        self.calibration.qubits.get(q.0).ok_or(SimError::UncalibratedQubit(q))
    }

    fn edge(&self, a: QubitId, b: QubitId) -> Result<&crate::topology::EdgeCalibration, SimError> {
        crate::topology::Edge::new(a, b)
            .and_then(|e| self.calibration.edges.get(&e))
            .ok_or(SimError::UncalibratedEdge(a, b))
    }
}

/// Result of running one circuit.
#[derive(Clone, Debug, PartialEq)]
pub enum RunResult {
    Sampled(Counts),
    /// Exact outcome distribution (no shot noise).
    Exact(ProbDist),
}

impl RunResult {
    pub fn dist(&self) -> ProbDist {
        match self {
            RunResult::Sampled(c) => c.to_dist(),
            RunResult::Exact(p) => p.clone(),
        }
    }

    pub fn shots(&self) -> Option<u64> {
        match self {
            RunResult::Sampled(c) => Some(c.shots()),
            RunResult::Exact(_) => None,
        }
    }

    pub fn n_bits(&self) -> usize {
        match self {
            RunResult::Sampled(c) => c.n_bits(),
            RunResult::Exact(p) => p.n_bits(),
        }
    }
}

/// Something that executes circuits. `shots = None` asks for exact
/// distributions. Circuit `i` uses the seed `seed::split(seed, i)`.
pub trait Backend: Sync {
    fn run(&self, circuits: &[Circuit], shots: Option<u64>, seed: u64) -> Result<Vec<RunResult>, SimError>;

    /// Largest circuit (in touched qubits) the backend accepts.
    fn max_qubits(&self) -> usize;

    /// Largest size accepted for circuits like `c`.
    fn cap_for(&self, c: &Circuit) -> usize {
        let _ = c;
        self.max_qubits()
    }
}

/// Built-in statevector / density-matrix simulator.
#[derive(Clone, Debug)]
pub struct Simulator {
    pub noise: Option<NoiseModel>,
    pub max_dm_qubits: usize,
    pub max_sv_qubits: usize,
}

impl Simulator {
    pub fn noiseless() -> Self {
        Simulator { noise: None, max_dm_qubits: 14, max_sv_qubits: 24 }
    }

    pub fn new(noise: NoiseModel) -> Self {
        Simulator { noise: Some(noise), ..Self::noiseless() }
    }

    fn channels(&self) -> NoiseChannels {
        self.noise.as_ref().map(|n| n.channels).unwrap_or(NoiseChannels::NONE)
    }

    fn uses_density(&self, c: &Circuit) -> bool {
        self.noise.as_ref().is_some_and(NoiseModel::needs_density)
            || c.ops().iter().any(|g| matches!(g, Gate::ZDephase { .. }))
    }

    /// Cap that applies to `c`.
    pub fn cap_for(&self, c: &Circuit) -> usize {
        if self.uses_density(c) {
            self.max_dm_qubits
        } else {
            self.max_sv_qubits
        }
    }

    fn engine(&self, c: &Circuit) -> Result<Engine<'_>, SimError> {
        let qubits = c.used_qubits();
        let density = self.uses_density(c);
        let (cap, kind) = if density { (self.max_dm_qubits, "density-matrix") } else { (self.max_sv_qubits, "statevector") };
        if qubits.len() > cap {
            return Err(SimError::TooManyQubits { used: qubits.len(), cap, kind });
        }
        check_terminal_measurements(c)?;
        Engine::new(qubits, density, self.noise.as_ref())
    }

    /// Output state before measurement, over the touched qubits in ascending
    /// device order.
    pub fn exact_state(&self, c: &Circuit) -> Result<DensityMatrix, SimError> {
        let mut e = self.engine(c)?;
        e.evolve(c.ops())?;
        Ok(e.density())
    }

    /// Reduced output state of `keep` (qubit `keep[i]` becomes qubit `i`),
    /// without forming the full density matrix.
    pub fn exact_reduced_state(&self, c: &Circuit, keep: &[QubitId]) -> Result<DensityMatrix, SimError> {
        let mut e = self.engine(c)?;
        e.evolve(c.ops())?;
        let local: Vec<usize> = keep
            .iter()
            .map(|q| e.local.get(q).copied().ok_or(SimError::QubitNotInCircuit(*q)))
            .collect::<Result<_, _>>()?;
        Ok(e.reduced(&local))
    }

    /// Exact outcome distribution over the circuit's classical bits,
    /// including readout confusion.
    pub fn exact_distribution(&self, c: &Circuit) -> Result<ProbDist, SimError> {
        let mut e = self.engine(c)?;
        e.evolve(c.ops())?;
        let ideal = e.clbit_probabilities(c);
        Ok(ProbDist::from_dense(c.n_clbits(), &self.confuse(c, ideal)?))
    }

    fn confuse(&self, c: &Circuit, mut p: Vec<f64>) -> Result<Vec<f64>, SimError> {
        let Some(noise) = self.noise.as_ref().filter(|n| n.channels.readout) else {
            return Ok(p);
        };
        for (q, clbit) in c.measurements() {
            let r = noise.qubit(q)?.readout;
            let stride = 1usize << clbit;
            for chunk in p.chunks_mut(2 * stride) {
                let (lo, hi) = chunk.split_at_mut(stride);
                for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                    let (p0, p1) = (*a, *b);
                    *a = r[0][0] * p0 + r[1][0] * p1;
                    *b = r[0][1] * p0 + r[1][1] * p1;
                }
            }
        }
        Ok(p)
    }

    fn finish(&self, c: &Circuit, e: &Engine<'_>, shots: Option<u64>, seed: u64) -> Result<RunResult, SimError> {
        let ideal = e.clbit_probabilities(c);
        let m = c.n_clbits();
        let Some(shots) = shots else {
            return Ok(RunResult::Exact(ProbDist::from_dense(m, &self.confuse(c, ideal)?)));
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        if m <= MULTINOMIAL_MAX_BITS || !self.channels().readout {
            let noisy = ProbDist::from_dense(m, &self.confuse(c, ideal)?);
            return Ok(RunResult::Sampled(sample_multinomial(&noisy, shots, &mut rng)));
        }
        let noise = self.noise.as_ref().expect("readout channel implies a noise model");
        let mut flips = vec![[0.0; 2]; m];
        for (q, clbit) in c.measurements() {
            let r = noise.qubit(q)?.readout;
            flips[clbit] = [r[0][1], r[1][0]];
        }
        let ideal = ProbDist::from_dense(m, &ideal);
        Ok(RunResult::Sampled(sample_with_flips(&ideal, shots, |b, v| flips[b][v as usize], &mut rng)))
    }
}

impl Backend for Simulator {
    fn run(&self, circuits: &[Circuit], shots: Option<u64>, seed: u64) -> Result<Vec<RunResult>, SimError> {
        // circuits on the same qubits share the evolution of their common prefix
        let mut groups: BTreeMap<Vec<QubitId>, Vec<usize>> = BTreeMap::new();
        for (i, c) in circuits.iter().enumerate() {
            groups.entry(c.used_qubits()).or_default().push(i);
        }
        let mut out: Vec<Option<RunResult>> = vec![None; circuits.len()];
        for members in groups.values() {
            let first = &circuits[members[0]];
            let prefix = members.iter().skip(1).fold(first.ops().len(), |len, &i| {
                let ops = circuits[i].ops();
                first.ops()[..len].iter().zip(ops).take_while(|(a, b)| a == b).count()
            });
            let prefix = if members.len() == 1 { 0 } else { prefix };
            let mut base = self.engine(first)?;
            // density evolution must agree for every member
            if members.iter().any(|&i| self.uses_density(&circuits[i]) != base.density) {
                for &i in members {
                    let mut e = self.engine(&circuits[i])?;
                    e.evolve(circuits[i].ops())?;
                    out[i] = Some(self.finish(&circuits[i], &e, shots, seed::split(seed, i as u64))?);
                }
                continue;
            }
            base.evolve(&first.ops()[..prefix])?;
            let results: Vec<(usize, Result<RunResult, SimError>)> = members
                .par_iter()
                .map(|&i| {
                    let c = &circuits[i];
                    let r = check_terminal_measurements(c).and_then(|_| {
                        let mut e = base.clone();
                        e.evolve(&c.ops()[prefix..])?;
                        self.finish(c, &e, shots, seed::split(seed, i as u64))
                    });
                    (i, r)
                })
                .collect();
            for (i, r) in results {
                out[i] = Some(r?);
            }
        }
        Ok(out.into_iter().map(|r| r.expect("every circuit ran")).collect())
    }

    fn max_qubits(&self) -> usize {
        self.max_dm_qubits.max(self.max_sv_qubits)
    }

    fn cap_for(&self, c: &Circuit) -> usize {
        Simulator::cap_for(self, c)
    }
}

fn check_terminal_measurements(c: &Circuit) -> Result<(), SimError> {
    let mut measured = std::collections::BTreeSet::new();
    for g in c.ops() {
        match g {
            Gate::Measure { q, .. } => {
                measured.insert(*q);
            }
            Gate::Barrier { .. } => {}
            other => {
                if let Some(q) = other.qubits().into_iter().find(|q| measured.contains(q)) {
                    return Err(SimError::MidCircuitMeasurement(q));
                }
            }
        }
    }
    Ok(())
}

const SQ: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn h_matrix() -> Mat2 {
    [[C::new(SQ, 0.0), C::new(SQ, 0.0)], [C::new(SQ, 0.0), C::new(-SQ, 0.0)]]
}

fn x_matrix() -> Mat2 {
    [[C::new(0.0, 0.0), C::new(1.0, 0.0)], [C::new(1.0, 0.0), C::new(0.0, 0.0)]]
}

fn phase_matrix(angle: f64) -> Mat2 {
    [[C::new(1.0, 0.0), C::new(0.0, 0.0)], [C::new(0.0, 0.0), C::from_polar(1.0, -angle)]]
}

/// Evolving state of one circuit: one vector per detuning realization.
#[derive(Clone)]
struct Engine<'a> {
    qubits: Vec<QubitId>,
    local: BTreeMap<QubitId, usize>,
    density: bool,
    noise: Option<&'a NoiseModel>,
    states: Vec<Vec<C>>,
    detunings: Vec<Vec<f64>>,
}

impl<'a> Engine<'a> {
    fn new(qubits: Vec<QubitId>, density: bool, noise: Option<&'a NoiseModel>) -> Result<Self, SimError> {
        let n = qubits.len();
        let len = if density { 1usize << (2 * n) } else { 1usize << n };
        let mut psi = vec![C::new(0.0, 0.0); len];
        psi[0] = C::new(1.0, 0.0);
        let detunings = match noise.and_then(|m| m.quasi_static) {
            Some(qs) if qs.realizations > 0 && qs.sigma > 0.0 => {
                let normal = Normal::new(0.0, qs.sigma).expect("finite sigma");
                (0..qs.realizations)
                    .map(|k| {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed::split(qs.seed, k as u64));
                        // one draw per device qubit so that values do not depend on the circuit
                        let all: Vec<f64> =
                            (0..=qubits.last().map_or(0, |q| q.0)).map(|_| normal.sample(&mut rng)).collect();
                        qubits.iter().map(|q| all[q.0]).collect()
                    })
                    .collect()
            }
            _ => vec![vec![0.0; n]],
        };
        let local = qubits.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        if let Some(m) = noise {
            for &q in &qubits {
                if m.channels != NoiseChannels::NONE {
                    m.qubit(q)?;
                }
            }
        }
        Ok(Engine { states: vec![psi; detunings.len()], detunings, qubits, local, density, noise })
    }

    fn n(&self) -> usize {
        self.qubits.len()
    }

    fn channels(&self) -> NoiseChannels {
        self.noise.map(|m| m.channels).unwrap_or(NoiseChannels::NONE)
    }

    fn unitary_1q(&mut self, q: QubitId, m: &Mat2) {
        let (n, k, dm) = (self.n(), self.local[&q], self.density);
        for s in &mut self.states {
            if dm {
                Dm::unitary_1q(s, n, k, m);
            } else {
                apply_1q(s, k, m);
            }
        }
    }

    fn gate_noise_1q(&mut self, q: QubitId) -> Result<(), SimError> {
        if !self.channels().gate {
            return Ok(());
        }
        let p = self.noise.unwrap().qubit(q)?.sx_error;
        let (n, k) = (self.n(), self.local[&q]);
        for s in &mut self.states {
            Dm::depolarize_1q(s, n, k, p);
        }
        Ok(())
    }

    fn gate_noise_2q(&mut self, a: QubitId, b: QubitId) -> Result<(), SimError> {
        if !self.channels().gate {
            return Ok(());
        }
        let p = self.noise.unwrap().edge(a, b)?.cx_error;
        let (n, ka, kb) = (self.n(), self.local[&a], self.local[&b]);
        for s in &mut self.states {
            Dm::depolarize_2q(s, n, ka, kb, p);
        }
        Ok(())
    }

    fn delay(&mut self, qubits: &[QubitId], ns: u64) -> Result<(), SimError> {
        let Some(noise) = self.noise else { return Ok(()) };
        let t_us = ns as f64 * 1e-3;
        let n = self.n();
        let ch = noise.channels;
        // diagonal phase: ZZ on idle pairs plus detuning
        let mut zz_terms: Vec<(usize, usize, f64)> = Vec::new();
        if ch.zz {
            for (i, &a) in qubits.iter().enumerate() {
                for &b in &qubits[i + 1..] {
                    if let Some(e) = crate::topology::Edge::new(a, b).and_then(|e| noise.calibration.edges.get(&e)) {
                        if e.zz_rate_mhz != 0.0 {
                            zz_terms.push((self.local[&a], self.local[&b], e.zz_rate_mhz * t_us / 4.0));
                        }
                    }
                }
            }
        }
        let idle: Vec<usize> = qubits.iter().map(|q| self.local[q]).collect();
        let dm = self.density;
        for (s, det) in self.states.iter_mut().zip(&self.detunings) {
            let has_detuning = det.iter().any(|&d| d != 0.0);
            if zz_terms.is_empty() && !has_detuning {
                continue;
            }
            let z = |x: usize, k: usize| if x >> k & 1 == 0 { 1.0 } else { -1.0 };
            let theta: Vec<f64> = (0..1usize << n)
                .map(|x| {
                    let zz: f64 = zz_terms.iter().map(|&(a, b, th)| th * z(x, a) * z(x, b)).sum();
                    let dz: f64 = idle.iter().map(|&k| det[k] * t_us / 2.0 * z(x, k)).sum();
                    zz + dz
                })
                .collect();
            if dm {
                Dm::diagonal_phase(s, n, &theta);
            } else {
                kernel::apply_diagonal(s, |i| C::from_polar(1.0, -theta[i]));
            }
        }
        if ch.relaxation {
            for &q in qubits {
                let cal = noise.qubit(q)?;
                let gamma = 1.0 - (-t_us / cal.t1_us).exp();
                let coherence = (-t_us / cal.t2_us).exp();
                let k = self.local[&q];
                for s in &mut self.states {
                    Dm::relax(s, n, k, gamma, coherence);
                }
            }
        }
        Ok(())
    }

    fn evolve(&mut self, ops: &[Gate]) -> Result<(), SimError> {
        let n = self.n();
        for g in ops {
            match g {
                Gate::H { q } => {
                    self.unitary_1q(*q, &h_matrix());
                    self.gate_noise_1q(*q)?;
                }
                Gate::X { q } => {
                    self.unitary_1q(*q, &x_matrix());
                    self.gate_noise_1q(*q)?;
                }
                Gate::Phase { q, angle } => self.unitary_1q(*q, &phase_matrix(*angle)),
                Gate::Cx { control, target } => {
                    let (c, t) = (self.local[control], self.local[target]);
                    for s in &mut self.states {
                        if self.density {
                            Dm::cx(s, n, c, t);
                        } else {
                            apply_cx(s, c, t);
                        }
                    }
                    self.gate_noise_2q(*control, *target)?;
                }
                Gate::Cz { a, b } => {
                    let (ka, kb) = (self.local[a], self.local[b]);
                    let mask = 1usize << ka | 1usize << kb;
                    for s in &mut self.states {
                        if self.density {
                            Dm::cz(s, n, ka, kb);
                        } else {
                            kernel::scale(s, |i| if i & mask == mask { -1.0 } else { 1.0 });
                        }
                    }
                    self.gate_noise_2q(*a, *b)?;
                }
                Gate::Delay { qubits, ns } => self.delay(qubits, *ns)?,
                Gate::ZDephase { qubits } => {
                    let mask = qubits.iter().fold(0usize, |m, q| m | 1 << self.local[q]);
                    for s in &mut self.states {
                        Dm::z_dephase(s, n, mask);
                    }
                }
                Gate::Measure { .. } | Gate::Barrier { .. } => {}
            }
        }
        Ok(())
    }

    /// Basis-state probabilities averaged over realizations.
    fn probabilities(&self) -> Vec<f64> {
        let n = self.n();
        let k = self.states.len() as f64;
        let mut p = vec![0.0; 1 << n];
        for s in &self.states {
            let d = if self.density { Dm::diagonal(s, n) } else { s.iter().map(|a| a.norm_sqr()).collect() };
            for (acc, v) in p.iter_mut().zip(d) {
                *acc += v / k;
            }
        }
        p
    }

    fn clbit_probabilities(&self, c: &Circuit) -> Vec<f64> {
        let probs = self.probabilities();
        let meas: Vec<(usize, usize)> = c.measurements().into_iter().map(|(q, b)| (self.local[&q], b)).collect();
        let mut out = vec![0.0; 1usize << c.n_clbits()];
        for (x, p) in probs.into_iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let y = meas.iter().fold(0usize, |acc, &(k, b)| acc | ((x >> k) & 1) << b);
            out[y] += p.max(0.0);
        }
        out
    }

    fn reduced(&self, keep: &[usize]) -> DensityMatrix {
        let n = self.n();
        let traced: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();
        let spread = |x: usize, bits: &[usize]| bits.iter().enumerate().fold(0usize, |a, (i, &b)| a | ((x >> i) & 1) << b);
        let d = 1usize << keep.len();
        let w = 1.0 / self.states.len() as f64;
        let mut m = nalgebra::DMatrix::<C>::zeros(d, d);
        for s in &self.states {
            for r in 0..d {
                for c in 0..d {
                    let (rr, cc) = (spread(r, keep), spread(c, keep));
                    let mut acc = C::new(0.0, 0.0);
                    for t in 0..1usize << traced.len() {
                        let e = spread(t, &traced);
                        acc += if self.density { s[(rr | e) | (cc | e) << n] } else { s[rr | e] * s[cc | e].conj() };
                    }
                    m[(r, c)] += acc * w;
                }
            }
        }
        DensityMatrix::from_matrix(keep.len(), m).expect("square")
    }

    fn density(&self) -> DensityMatrix {
        let n = self.n();
        let k = self.states.len() as f64;
        let mut acc: Option<nalgebra::DMatrix<C>> = None;
        for s in &self.states {
            let m = if self.density {
                DensityMatrix::from_vectorised(n, s)
            } else {
                DensityMatrix::from_pure(s)
            };
            let m = m.matrix() / C::new(k, 0.0);
            acc = Some(match acc {
                None => m,
                Some(a) => a + m,
            });
        }
        DensityMatrix::from_matrix(n, acc.expect("at least one realization")).expect("square")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::line;

    fn q(i: usize) -> QubitId {
        QubitId(i)
    }

    #[test]
    fn empty_circuit_on_one_qubit_is_ground_state() {
        let mut c = Circuit::new(1, 0);
        c.push(Gate::Barrier { qubits: vec![q(0)] }).unwrap();
        let rho = Simulator::noiseless().exact_state(&c).unwrap();
        assert_eq!(rho, DensityMatrix::zero_state(1));
    }

    #[test]
    fn readout_confusion_on_excited_state() {
        let g = line(1).unwrap();
        let mut cal = Calibration::uniform(&g);
        cal.qubits[0].readout = [[1.0, 0.0], [0.1, 0.9]];
        let sim = Simulator::new(NoiseModel::new(cal, NoiseChannels::READOUT));
        let mut c = Circuit::new(1, 1);
        c.extend([Gate::X { q: q(0) }, Gate::Measure { q: q(0), clbit: 0 }]).unwrap();
        let p = sim.exact_distribution(&c).unwrap();
        assert!((p.get(0) - 0.1).abs() < 1e-15);
        let counts = sim.run(&[c], Some(20_000), 3).unwrap();
        let f = counts[0].dist().get(0);
        assert!((f - 0.1).abs() < 4.0 * (0.09f64 / 20_000.0).sqrt());
    }

    #[test]
    fn mid_circuit_measurement_rejected() {
        let mut c = Circuit::new(1, 1);
        c.extend([Gate::Measure { q: q(0), clbit: 0 }, Gate::H { q: q(0) }]).unwrap();
        assert_eq!(
            Simulator::noiseless().exact_state(&c).unwrap_err(),
            SimError::MidCircuitMeasurement(q(0))
        );
    }

    #[test]
    fn too_many_qubits_rejected() {
        let mut c = Circuit::new(30, 0);
        c.extend((0..30).map(|i| Gate::H { q: q(i) })).unwrap();
        assert!(matches!(Simulator::noiseless().exact_state(&c), Err(SimError::TooManyQubits { .. })));
    }

    #[test]
    fn relaxation_decays_excited_population() {
        let g = line(1).unwrap();
        let cal = Calibration::uniform(&g).with_t2(100.0, 100.0);
        let sim = Simulator::new(NoiseModel::new(cal, NoiseChannels::RELAXATION));
        let mut c = Circuit::new(1, 0);
        c.extend([Gate::X { q: q(0) }, Gate::Delay { qubits: vec![q(0)], ns: 50_000 }]).unwrap();
        let rho = sim.exact_state(&c).unwrap();
        assert!((rho.get(1, 1).re - (-0.5f64).exp()).abs() < 1e-12);
    }
}
