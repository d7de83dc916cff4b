use std::collections::BTreeMap;

use entbench::mitigate::*;
use entbench::sim::*;
use entbench::topology::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Full `2^n` calibration matrix as an explicit Kronecker product.
fn dense_matrix(spec: &ConfusionSpec) -> DMatrix<f64> {
    let mut m = DMatrix::<f64>::identity(1, 1);
    for a in spec.matrices.iter().rev() {
        m = m.kronecker(&DMatrix::from_row_slice(2, 2, &[a[0][0], a[0][1], a[1][0], a[1][1]]));
    }
    m
}

fn random_spec(n: usize, max_flip: f64, rng: &mut ChaCha8Rng) -> ConfusionSpec {
    let matrices = (0..n)
        .map(|_| {
            let (p10, p01) = (rng.random::<f64>() * max_flip, rng.random::<f64>() * max_flip);
            [[1.0 - p10, p01], [p10, 1.0 - p01]]
        })
        .collect();
    ConfusionSpec::new(matrices).unwrap()
}

fn sparse_ideal(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut p = vec![0.0; 1 << n];
    for _ in 0..k {
        p[rng.random_range(0..1usize << n)] += rng.random::<f64>() + 0.05;
    }
    let s: f64 = p.iter().sum();
    p.iter().map(|x| x / s).collect()
}

/// Brute-force L² projection onto the simplex: try every active set.
fn brute_projection(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & 1 << i != 0).collect();
        let shift = (1.0 - idx.iter().map(|&i| v[i]).sum::<f64>()) / idx.len() as f64;
        let mut x = vec![0.0; n];
        for &i in &idx {
            x[i] = v[i] + shift;
        }
        if x.iter().any(|&y| y < -1e-15) {
            continue;
        }
        let d: f64 = x.iter().zip(v).map(|(a, b)| (a - b).powi(2)).sum();
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, x));
        }
    }
    best.unwrap().1
}

#[test]
fn exact_inverse_problem_on_three_bits() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let spec = random_spec(3, 0.1, &mut rng);
    let ideal = sparse_ideal(3, 3, &mut rng);
    let noisy = &dense_matrix(&spec) * DVector::from_vec(ideal.clone());
    let opts = SolverOptions { tol: 1e-12, ..SolverOptions::default() };
    let q = mitigate(&ProbDist::from_dense(3, noisy.as_slice()), None, &spec, opts).unwrap();
    for (x, p) in ideal.iter().enumerate() {
        assert!((q.probs.get(x as u64) - p).abs() < 1e-8);
    }
}

#[test]
fn dense_oracle_recovery_on_up_to_ten_bits() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..100 {
        let n = 1 + trial % 10;
        let spec = random_spec(n, 0.05, &mut rng);
        let ideal = sparse_ideal(n, 1 + trial % 5, &mut rng);
        let a = dense_matrix(&spec);
        let noisy = &a * DVector::from_vec(ideal.clone());
        let dist = ProbDist::from_dense(n, noisy.as_slice());
        let oracle = a.clone().lu().solve(&noisy).unwrap();
        let error = |q: &QuasiDistribution| -> f64 { oracle.iter().enumerate().map(|(x, p)| (q.probs.get(x as u64) - p).abs()).sum() };

        let q = mitigate(&dist, None, &spec, SolverOptions::default()).unwrap();
        assert!(q.converged && q.residual < DEFAULT_TOL);
        assert!((q.probs.total() - 1.0).abs() < DEFAULT_TOL);
        assert!(q.overhead >= 1.0);
        // |x - x*|_1 <= |A^-1|_1 |r|_1
        assert!(error(&q) <= q.overhead.sqrt() * q.residual * (1.0 + 1e-9));

        let tight = mitigate(&dist, None, &spec, SolverOptions { tol: 1e-10, max_iter: 60, ..SolverOptions::default() }).unwrap();
        assert!(error(&tight) < 1e-6, "trial {trial}: {}", error(&tight));
    }
}

#[test]
fn ghz_masses_grow_after_mitigation() {
    let n = 10;
    let spec = ConfusionSpec::symmetric(n, 0.02);
    let mut ideal = vec![0.0; 1 << n];
    ideal[0] = 0.5;
    ideal[(1 << n) - 1] = 0.5;
    let noisy = &dense_matrix(&spec) * DVector::from_vec(ideal);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let counts = sample_multinomial(&ProbDist::from_dense(n, noisy.as_slice()), 4096, &mut rng);
    let raw = counts.to_dist();
    let q = mitigate(&raw, Some(4096), &spec, SolverOptions::default()).unwrap();
    let ends = |d: &ProbDist| d.get(0) + d.get((1 << n) - 1);
    assert!(ends(&q.probs) > ends(&raw));
    assert!(ends(&q.nearest_physical()) > ends(&raw));
    assert!(q.sigma_bound().unwrap() >= (1.0f64 / 4096.0).sqrt());
}

#[test]
fn overhead_grows_with_flip_rate() {
    let mut last = 1.0;
    for k in 0..=40 {
        let m = overhead(&ConfusionSpec::symmetric(1, k as f64 * 0.01), &[0, 1]).unwrap();
        assert!(m >= last);
        last = m;
    }
}

#[test]
fn subspace_overhead_uses_explicit_inverse() {
    let spec = ConfusionSpec::symmetric(3, 0.05);
    let support = [0u64, 1, 6];
    let a = dense_matrix(&spec);
    let sub = DMatrix::from_fn(3, 3, |i, j| a[(support[i] as usize, support[j] as usize)]);
    let norms: Vec<f64> = (0..3).map(|j| sub.column(j).sum()).collect();
    let sub = DMatrix::from_fn(3, 3, |i, j| sub[(i, j)] / norms[j]);
    let inv = sub.try_inverse().unwrap();
    let one_norm = (0..3).map(|j| inv.column(j).abs().sum()).fold(0.0, f64::max);
    assert!((overhead(&spec, &support).unwrap() - one_norm * one_norm).abs() < 1e-12);
}

#[test]
fn estimated_calibration_matches_stored() {
    let g = line(3).unwrap();
    let mut cal = Calibration::uniform(&g);
    cal.qubits[0].readout = [[0.97, 0.03], [0.05, 0.95]];
    cal.qubits[2].readout = [[0.99, 0.01], [0.02, 0.98]];
    let qubits: Vec<QubitId> = (0..3).map(QubitId).collect();
    let sim = Simulator::new(NoiseModel::new(cal.clone(), NoiseChannels::READOUT));
    let est = ConfusionSpec::estimate(&sim, &qubits, None, 0).unwrap();
    let stored = ConfusionSpec::from_calibration(&cal, &qubits);
    for (a, b) in est.matrices.iter().zip(&stored.matrices) {
        for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

#[test]
fn hamming_limit_truncates_couplings() {
    let spec = ConfusionSpec::symmetric(4, 0.04);
    let noisy = ProbDist::from_map(4, BTreeMap::from([(0, 0.6), (0b1111, 0.3), (0b0001, 0.1)]));
    let opts = SolverOptions { hamming_limit: Some(1), ..SolverOptions::default() };
    let q = mitigate(&noisy, Some(1000), &spec, opts).unwrap();
    // 1111 is far from the other two, so it only couples to itself
    assert!((q.probs.get(0b1111) - 0.3).abs() < 1e-6);
    assert!((q.probs.total() - 1.0).abs() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn projection_matches_brute_force(v in proptest::collection::vec(-1.0f64..1.0, 1..=8)) {
        let shift = (1.0 - v.iter().sum::<f64>()) / v.len() as f64;
        let v: Vec<f64> = v.iter().map(|x| x + shift).collect();
        let quasi = ProbDist::from_map(3, v.iter().enumerate().map(|(i, &x)| (i as u64, x)).collect());
        let p = nearest_physical(&quasi);
        let oracle = brute_projection(&v);
        for (i, o) in oracle.iter().enumerate() {
            prop_assert!((p.get(i as u64) - o).abs() < 1e-9);
        }
        prop_assert_eq!(nearest_physical(&p), p.clone());
        prop_assert!(p.iter().all(|(_, x)| x >= 0.0));
        prop_assert!((p.total() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn matrix_element_matches_kronecker(seed in any::<u64>(), row in 0u64..8, col in 0u64..8) {
        let spec = random_spec(3, 0.3, &mut ChaCha8Rng::seed_from_u64(seed));
        let a = dense_matrix(&spec);
        prop_assert!((spec.element(row, col) - a[(row as usize, col as usize)]).abs() < 1e-15);
    }
}
