use std::f64::consts::PI;

use entbench::circuit::*;
use entbench::embed::*;
use entbench::sim::*;
use entbench::topology::*;
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn q(i: usize) -> QubitId {
    QubitId(i)
}

/// Graph state by its closed form `2^{-n/2} (-1)^{sum over edges x_a x_b}`.
fn graph_state_oracle(n: usize, edges: &[(usize, usize)]) -> Vec<C> {
    let amp = (1u64 << n) as f64;
    (0..1usize << n)
        .map(|x| {
            let parity = edges.iter().filter(|&&(a, b)| x >> a & 1 == 1 && x >> b & 1 == 1).count();
            C::new(if parity % 2 == 0 { 1.0 } else { -1.0 } / amp.sqrt(), 0.0)
        })
        .collect()
}

fn pauli_string(n: usize, ops: &[(usize, char)]) -> DMatrix<C> {
    let one = C::new(1.0, 0.0);
    let zero = C::new(0.0, 0.0);
    let single = |c: char| match c {
        'X' => DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]),
        'Z' => DMatrix::from_row_slice(2, 2, &[one, zero, zero, -one]),
        'Y' => DMatrix::from_row_slice(2, 2, &[zero, C::new(0.0, -1.0), C::new(0.0, 1.0), zero]),
        _ => DMatrix::identity(2, 2),
    };
    // qubit 0 is the least significant bit, so it is the rightmost factor
    let mut m = DMatrix::<C>::identity(1, 1);
    for k in (0..n).rev() {
        let c = ops.iter().find(|(i, _)| *i == k).map_or('I', |&(_, c)| c);
        m = m.kronecker(&single(c));
    }
    m
}

fn negativity_of(rho: &DensityMatrix) -> f64 {
    hermitian_eigenvalues(&rho.partial_transpose(&[1])).iter().filter(|&&e| e < 0.0).map(|e| -e).sum()
}

fn assert_close(a: &DensityMatrix, b: &DensityMatrix, tol: f64) {
    let d = (a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    assert!(d < tol, "states differ by {d}");
}

#[test]
fn ghz_three_noiseless_counts() {
    let g = line(3).unwrap();
    let cal = Calibration::uniform(&g);
    let e = embed_ghz(&g, &cal, q(1), 3, EdgeWeight::CxError).unwrap();
    let c = build_ghz_population(&e, Idle::none()).unwrap();
    let out = Simulator::noiseless().run(&[c], Some(4096), 11).unwrap();
    let RunResult::Sampled(counts) = &out[0] else { panic!("expected counts") };
    assert_eq!(counts.shots(), 4096);
    assert_eq!(counts.get(0) + counts.get(0b111), 4096);
    let sigma = (4096.0f64 * 0.25).sqrt();
    assert!((counts.get(0) as f64 - 2048.0).abs() < 4.0 * sigma);
}

#[test]
fn noiseless_ghz_has_unit_fidelity() {
    let g = presets::falcon_7();
    let cal = Calibration::uniform(&g);
    let e = embed_ghz(&g, &cal, q(1), 7, EdgeWeight::CxError).unwrap();
    let rho = Simulator::noiseless().exact_state(&build_ghz(&e)).unwrap();
    let mut psi = vec![C::new(0.0, 0.0); 128];
    psi[0] = C::new(0.5f64.sqrt(), 0.0);
    psi[127] = psi[0];
    assert!((fidelity(&rho, &DensityMatrix::from_pure(&psi)).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn ghz_seven_free_decay_matches_product_of_dephasing_factors() {
    let g = presets::falcon_7();
    let mut cal = Calibration::uniform(&g);
    let t2: Vec<f64> = (0..7).map(|i| 40.0 + 10.0 * i as f64).collect();
    for (qc, &t) in cal.qubits.iter_mut().zip(&t2) {
        qc.t1_us = 1000.0;
        qc.t2_us = t;
    }
    let sim = Simulator::new(NoiseModel::new(cal.clone(), NoiseChannels::RELAXATION));
    let e = embed_ghz(&g, &cal, q(1), 7, EdgeWeight::CxError).unwrap();
    let t_us = 15.0;
    let c = build_ghz_population(&e, Idle { delay_ns: 15_000, ..Idle::none() }).unwrap();
    let rho = sim.exact_state(&c).unwrap();
    let expect = 0.5 * t2.iter().map(|t| (-t_us / t).exp()).product::<f64>();
    assert!((rho.get(0, 127).norm() - expect).abs() < 1e-12);
}

#[test]
fn path_three_stabilizers() {
    let g = line(3).unwrap();
    let s = schedule_graph_state(&g);
    let rho = Simulator::noiseless().exact_state(&build_graph_state(&s)).unwrap();
    let stabilizers = [
        vec![(0, 'X'), (1, 'Z')],
        vec![(0, 'Z'), (1, 'X'), (2, 'Z')],
        vec![(1, 'Z'), (2, 'X')],
    ];
    for k in &stabilizers {
        let v = (rho.matrix() * pauli_string(3, k)).trace();
        assert!((v.re - 1.0).abs() < 1e-12 && v.im.abs() < 1e-12);
    }
}

#[test]
fn cz_on_plus_plus_has_negativity_half() {
    let s = schedule_graph_state(&line(2).unwrap());
    let rho = Simulator::noiseless().exact_state(&build_graph_state(&s)).unwrap();
    assert!((negativity_of(&rho) - 0.5).abs() < 1e-12);
}

fn zz_pair_negativity(zeta: f64, t_ns: u64, dd: DdScheme) -> f64 {
    let g = line(2).unwrap();
    let cal = Calibration::uniform(&g).with_zz(zeta);
    let sim = Simulator::new(NoiseModel::new(cal, NoiseChannels::ZZ));
    let s = schedule_graph_state(&g);
    let set = TomographySet::new(&g, Edge::new(0, 1).unwrap());
    let c = build_qst_batch(&s, &[set], (Pauli::Z, Pauli::Z), Idle { delay_ns: t_ns, dd, x_ns: 0 }).unwrap();
    negativity_of(&sim.exact_state(&c).unwrap())
}

#[test]
fn zz_negativity_is_abs_cosine() {
    let zeta = 2.0 * PI * 0.05;
    for t_ns in (0..=40_000).step_by(2_500) {
        let t = t_ns as f64 * 1e-3;
        let n = zz_pair_negativity(zeta, t_ns, DdScheme::None);
        assert!((n - 0.5 * (zeta * t / 2.0).cos().abs()).abs() < 1e-9, "t = {t}");
    }
    // vanishes at pi / zeta = 10 µs and revives at 20 µs
    assert!(zz_pair_negativity(zeta, 10_000, DdScheme::None) < 1e-9);
    assert!((zz_pair_negativity(zeta, 20_000, DdScheme::None) - 0.5).abs() < 1e-9);
}

#[test]
fn staggered_decoupling_refocuses_zz() {
    let zeta = 2.0 * PI * 0.05;
    let n = zz_pair_negativity(zeta, 10_000, DdScheme::StaggeredPdd { rate: 1.0 });
    assert!((n - 0.5).abs() < 1e-9, "{n}");
}

fn toy_device() -> DeviceGraph {
    let mut edges: Vec<(usize, usize)> = (0..12).map(|i| (i, (i + 1) % 12)).collect();
    edges.extend([(0, 6), (3, 9)]);
    DeviceGraph::new(12, edges, []).unwrap()
}

#[test]
fn light_cone_matches_full_device_on_toy_device() {
    let g = toy_device();
    let s = schedule_graph_state(&g);
    let edges: Vec<(usize, usize)> = g.edges().map(|e| (e.lo().0, e.hi().0)).collect();
    let full = DensityMatrix::from_pure(&graph_state_oracle(12, &edges));
    let sim = Simulator::noiseless();
    let full_circuit = build_graph_state(&s);
    for e in g.edges() {
        let set = TomographySet::new(&g, e);
        let support = set.support();
        let keep: Vec<usize> = support.iter().map(|q| q.0).collect();
        let truth = full.reduced(&keep);
        assert_close(&sim.exact_reduced_state(&full_circuit, &support).unwrap(), &truth, 1e-10);
        let lc = light_cone_reduce(&g, &set);
        for mode in [LightConeMode::Explicit, LightConeMode::Marks] {
            let c = lc.circuit(&s, (Pauli::Z, Pauli::Z), Idle::none(), mode).unwrap();
            assert_eq!(c.used_qubits().len(), lc.size(mode));
            let reduced = sim.exact_reduced_state(&c, &support).unwrap();
            assert_close(&reduced, &truth, 1e-10);
        }
    }
}

fn cone_vs_full(channels: NoiseChannels) -> f64 {
    let g = DeviceGraph::new(8, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 6)], []).unwrap();
    let cal = Calibration::uniform(&g).with_zz(0.3).with_gate_errors(1e-3, 2e-2).with_t2(60.0, 40.0);
    let sim = Simulator::new(NoiseModel::new(cal, channels));
    let s = schedule_graph_state(&g);
    let idle = Idle { delay_ns: 3_000, dd: DdScheme::HahnEcho, x_ns: 35 };
    let set = TomographySet::new(&g, Edge::new(3, 4).unwrap());
    let support = set.support();
    let full = build_qst_batch(&s, std::slice::from_ref(&set), (Pauli::X, Pauli::Y), idle).unwrap();
    let lc = light_cone_reduce(&g, &set);
    assert!(lc.qubits.len() < 8);
    let reduced = lc.circuit(&s, (Pauli::X, Pauli::Y), idle, LightConeMode::Explicit).unwrap();
    let a = sim.exact_reduced_state(&reduced, &support).unwrap();
    let b = sim.exact_reduced_state(&full, &support).unwrap();
    (a.matrix() - b.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[test]
fn explicit_light_cone_is_exact_under_idle_noise() {
    let idle_noise = NoiseChannels { gate: false, ..NoiseChannels::ALL };
    assert!(cone_vs_full(idle_noise) < 1e-10);
    // gate errors on CZs leaving the cone are dropped
    let d = cone_vs_full(NoiseChannels::ALL);
    assert!(d > 1e-6 && d < 1e-2, "{d}");
}

#[test]
fn counts_do_not_depend_on_thread_count() {
    let g = presets::falcon_7();
    let cal = Calibration::uniform(&g).with_readout_flip(0.03);
    let sim = Simulator::new(NoiseModel::new(cal, NoiseChannels::ALL));
    let s = schedule_graph_state(&g);
    let plan = plan_qst_batches(&g);
    let circuits: Vec<Circuit> = Pauli::settings()
        .into_iter()
        .map(|st| build_qst_batch(&s, &plan.batches[0], st, Idle::none()).unwrap())
        .collect();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| sim.run(&circuits, Some(2000), 99).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(1));
    assert_ne!(one, sim.run(&circuits, Some(2000), 100).unwrap());
}

#[test]
fn prefix_sharing_matches_separate_runs() {
    let g = presets::falcon_7();
    let cal = Calibration::uniform(&g).with_readout_flip(0.02).with_gate_errors(1e-3, 1e-2);
    let sim = Simulator::new(NoiseModel::new(cal.clone(), NoiseChannels::ALL));
    let e = embed_ghz(&g, &cal, q(1), 5, EdgeWeight::CxError).unwrap();
    let circuits: Vec<Circuit> = mqc_phase_grid(5)
        .into_iter()
        .map(|phi| build_mqc(&e, phi, true, Idle { delay_ns: 2_000, dd: DdScheme::None, x_ns: 35 }).unwrap())
        .collect();
    let together = sim.run(&circuits, None, 0).unwrap();
    for (c, r) in circuits.iter().zip(&together) {
        let alone = sim.exact_distribution(c).unwrap();
        for (x, p) in alone.iter() {
            assert!((r.dist().get(x) - p).abs() < 1e-12);
        }
    }
}

#[test]
fn quasi_static_detuning_dephases_superposition() {
    let g = line(1).unwrap();
    let cal = Calibration::uniform(&g);
    let qs = QuasiStatic { sigma: 0.2, realizations: 400, seed: 5 };
    let sim = Simulator::new(NoiseModel::new(cal, NoiseChannels::NONE).with_quasi_static(qs));
    let mut c = Circuit::new(1, 0);
    c.extend([Gate::H { q: q(0) }, Gate::Delay { qubits: vec![q(0)], ns: 5_000 }]).unwrap();
    let rho = sim.exact_state(&c).unwrap();
    // Gaussian average of e^{-i delta t}: e^{-(sigma t)^2 / 2}
    let expect = 0.5 * (-(0.2f64 * 5.0).powi(2) / 2.0).exp();
    assert!((rho.get(0, 1).norm() - expect).abs() < 0.03);
}

fn random_noisy_circuit(seed: &[(u8, usize, usize)]) -> Circuit {
    let mut c = Circuit::new(4, 0);
    for &(kind, a, b) in seed {
        let (a, b) = (a % 4, b % 4);
        let adjacent = a.abs_diff(b) == 1;
        let g = match kind % 5 {
            0 => Gate::H { q: q(a) },
            1 => Gate::X { q: q(a) },
            2 if adjacent => Gate::Cx { control: q(a), target: q(b) },
            3 if adjacent => Gate::Cz { a: q(a), b: q(b) },
            4 => Gate::Delay { qubits: vec![q(a), q(b)].into_iter().collect::<std::collections::BTreeSet<_>>().into_iter().collect(), ns: 1_500 },
            _ => Gate::Phase { q: q(b), angle: 0.7 },
        };
        c.push(g).unwrap();
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn noisy_output_is_a_density_matrix(ops in proptest::collection::vec((0u8..5, 0usize..4, 0usize..4), 1..30)) {
        let g = line(4).unwrap();
        let cal = Calibration::uniform(&g).with_zz(0.4).with_gate_errors(5e-3, 3e-2).with_t2(30.0, 20.0);
        let sim = Simulator::new(NoiseModel::new(cal, NoiseChannels::ALL));
        let mut c = random_noisy_circuit(&ops);
        c.push(Gate::H { q: q(0) }).unwrap();
        let rho = sim.exact_state(&c).unwrap();
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(rho.trace().im.abs() < 1e-10);
        prop_assert!(rho.is_hermitian(1e-10));
        prop_assert!(rho.eigenvalues()[0] > -1e-10);
    }

    #[test]
    fn same_seed_same_counts(seed in any::<u64>()) {
        let g = line(3).unwrap();
        let cal = Calibration::uniform(&g).with_readout_flip(0.05);
        let e = embed_ghz(&g, &cal, q(1), 3, EdgeWeight::CxError).unwrap();
        let sim = Simulator::new(NoiseModel::new(cal, NoiseChannels::ALL));
        let c = build_ghz_population(&e, Idle::none()).unwrap();
        let a = sim.run(std::slice::from_ref(&c), Some(500), seed).unwrap();
        let b = sim.run(std::slice::from_ref(&c), Some(500), seed).unwrap();
        prop_assert_eq!(a, b);
    }
}
