use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seqst_core::channels::{choi_state, kraus_to_chi, random_channel, zoo_instances, KrausChannel};
use seqst_core::estimation::{chernoff_plan, chi_square_gof, RandomStream};
use seqst_core::pauli::{basis_size, pauli_matrix, PauliLabel};
use seqst_core::qpt::{
    aapt_full_chi, dcqd_diagonal, dcqd_diagonal_sample, dcqd_distribution, seqpt_estimate, seqpt_exact_average,
    seqpt_expected_average, seqpt_single_shot_plan, seqpt_single_state, seqst_qpt_exact, seqst_qpt_sample,
    ChoiBasisR, EntanglerCircuit,
};
use seqst_core::quantum::{haar_random_state, maximally_entangled_state, Operator, PureState, C64};
use seqst_core::{Error, SizeLimits};

fn zoo(n: usize) -> Vec<KrausChannel> {
    zoo_instances(n).iter().map(|s| s.build().unwrap()).collect()
}

#[test]
fn protocols_agree_with_the_chi_matrix() {
    let limits = SizeLimits::default();
    for n in 1..=2 {
        for ch in zoo(n) {
            let chi = kraus_to_chi(&ch);
            let full = aapt_full_chi(&ch, &limits).unwrap();
            assert!(full.max_abs_diff(&chi) < 1e-10);
            for a in 0..basis_size(n) {
                assert!((dcqd_diagonal(&ch, a).unwrap() - chi.get(a, a).re).abs() < 1e-10);
                for b in 0..basis_size(n) {
                    assert!((seqst_qpt_exact(&ch, a, b, &limits).unwrap() - chi.get(a, b)).norm() < 1e-10);
                }
            }
            let probs = dcqd_distribution(&ch);
            assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn selective_protocol_scales_past_full_limit() {
    let limits = SizeLimits::default();
    let ch = zoo_instances(3)[5].build().unwrap();
    assert!(matches!(aapt_full_chi(&ch, &limits), Err(Error::SizeLimitExceeded { .. })));
    let chi = kraus_to_chi(&ch);
    assert!((seqst_qpt_exact(&ch, 0, 0, &limits).unwrap() - chi.get(0, 0)).norm() < 1e-10);
}

/// `<psi| E(E_a |psi><psi| E_b) |psi>` from the Kraus operators directly.
fn cross_term(ch: &KrausChannel, a: &Operator, b: &Operator, psi: &PureState) -> C64 {
    let v = psi.vector();
    ch.kraus_ops()
        .iter()
        .map(|k| {
            let left = v.dotc(&(k.matrix() * a.matrix() * v));
            let right = v.dotc(&(b.matrix() * k.matrix().adjoint() * v));
            left * right
        })
        .sum()
}

#[test]
fn single_state_readout_is_the_cross_term() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ch = random_channel(1, 3, &mut rng);
    for a in 0..4 {
        for b in 0..4 {
            let psi = haar_random_state(2, &mut rng);
            let (x, y) = seqpt_single_state(&ch, a, b, &psi).unwrap();
            let ea = pauli_matrix(&PauliLabel::from_index(1, a).unwrap());
            let eb = pauli_matrix(&PauliLabel::from_index(1, b).unwrap());
            assert!((C64::new(x, y) - cross_term(&ch, &ea, &eb, &psi)).norm() < 1e-12);
        }
    }
}

#[test]
fn haar_average_matches_chi() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let check = |ch: &KrausChannel, a: usize, b: usize| {
        let chi = kraus_to_chi(ch);
        let (x, y) = seqpt_exact_average(ch, a, b).unwrap();
        let (wx, wy) = seqpt_expected_average(chi.get(a, b), ch.dim(), a == b);
        assert!((x - wx).abs() < 1e-10 && (y - wy).abs() < 1e-10, "{a} {b}");
    };
    let one = random_channel(1, 2, &mut rng);
    for a in 0..4 {
        for b in 0..4 {
            check(&one, a, b);
        }
    }
    let two = random_channel(2, 3, &mut rng);
    for _ in 0..50 {
        let (a, b) = (rng.random_range(0..16), rng.random_range(0..16));
        check(&two, a, b);
    }
}

#[test]
fn haar_average_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let ch = random_channel(1, 2, &mut rng);
    let (a, b) = (1, 2);
    let samples: Vec<(f64, f64)> = (0..20_000)
        .map(|_| seqpt_single_state(&ch, a, b, &haar_random_state(2, &mut rng)).unwrap())
        .collect();
    let (want_x, want_y) = seqpt_exact_average(&ch, a, b).unwrap();
    let k = samples.len() as f64;
    for (vals, want) in [
        (samples.iter().map(|s| s.0).collect::<Vec<_>>(), want_x),
        (samples.iter().map(|s| s.1).collect(), want_y),
    ] {
        let mean = vals.iter().sum::<f64>() / k;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0)).sqrt();
        assert!((mean - want).abs() < 4.0 * sd / k.sqrt(), "{mean} vs {want}");
    }
}

fn coverage(hits: usize, runs: usize, delta: f64) -> bool {
    hits as f64 >= (1.0 - delta - 0.03) * runs as f64
}

#[test]
fn seqst_qpt_coverage() {
    let (eps, delta) = (0.2, 0.1);
    let plan = chernoff_plan(eps, delta).unwrap();
    let ch = zoo(1)[7].clone();
    let want = kraus_to_chi(&ch).get(0, 3);
    let runs = 250;
    let hits = (0..runs)
        .filter(|&s| {
            let est = seqst_qpt_sample(&ch, 0, 3, &plan, &RandomStream::new(s), &SizeLimits::default()).unwrap();
            (est.value.re - want.re).abs() <= eps && (est.value.im - want.im).abs() <= eps
        })
        .count();
    // each component is covered with 1 - delta, so both together with 1 - 2 delta
    assert!(coverage(hits, runs as usize, 2.0 * delta), "{hits}");
}

#[test]
fn dcqd_coverage_and_fit() {
    let (eps, delta) = (0.1, 0.1);
    let plan = chernoff_plan(eps, delta).unwrap();
    let ch = zoo(1)[5].clone();
    let probs = dcqd_distribution(&ch);
    let runs = 250;
    let mut hits = 0;
    for s in 0..runs {
        let est = dcqd_diagonal_sample(&ch, &plan, &RandomStream::new(s)).unwrap();
        hits += ((est[0].frequency - probs[0]).abs() <= eps) as usize;
    }
    assert!(coverage(hits, runs as usize, delta), "{hits}");

    let big = seqst_core::ShotPlan::with_shots(0.1, 0.05, 10_000).unwrap();
    let est = dcqd_diagonal_sample(&ch, &big, &RandomStream::new(99)).unwrap();
    let counts: Vec<u64> = est.iter().map(|e| e.count).collect();
    assert!(chi_square_gof(&counts, &probs).unwrap().p_value > 0.001);
}

#[test]
fn seqpt_coverage() {
    let (eps, delta) = (0.25, 0.1);
    let ch = zoo(1)[6].clone();
    let (a, b) = (0, 3);
    let want = kraus_to_chi(&ch).get(a, b);
    let (n_states, plan) = seqpt_single_shot_plan(eps, delta, ch.dim()).unwrap();
    let runs = 200;
    let mut hits = (0, 0);
    for s in 0..runs {
        let est = seqpt_estimate(&ch, a, b, n_states, &plan, &RandomStream::new(s)).unwrap();
        hits.0 += ((est.value.re - want.re).abs() <= eps) as usize;
        hits.1 += ((est.value.im - want.im).abs() <= eps) as usize;
    }
    assert!(coverage(hits.0, runs as usize, delta) && coverage(hits.1, runs as usize, delta), "{hits:?}");
}

#[test]
fn seqpt_worker_invariance() {
    let ch = zoo(2)[4].clone();
    let plan = seqst_core::ShotPlan::with_shots(0.1, 0.05, 3).unwrap();
    let one = seqpt_estimate(&ch, 1, 5, 40, &plan, &RandomStream::new(7)).unwrap();
    let many = seqpt_estimate(&ch, 1, 5, 40, &plan, &RandomStream::new(7).with_workers(3)).unwrap();
    assert_eq!(one, many);
}

#[test]
fn choi_basis_is_orthonormal() {
    for n in 1..=2 {
        let r = ChoiBasisR::new(n);
        assert_eq!(r.len(), basis_size(n));
        assert!(r.gram().max_abs_diff(&Operator::identity(r.len())) < 1e-12);
        let rho = choi_state(&zoo(n)[3]);
        let total: f64 = r.elements().iter().map(|v| rho.matrix_element(v, v).re).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}

#[test]
fn entangler_gate_counts_and_output() {
    for n in 1..=4 {
        let circuit = EntanglerCircuit::new(n);
        assert_eq!(circuit.single_qubit_gates(), n);
        assert_eq!(circuit.two_qubit_gates(), n);
        let out = circuit.prepare();
        let want = maximally_entangled_state(n);
        let diff = (out.vector() - want.vector()).camax();
        assert!(diff < 1e-12);
        let back = circuit.inverse().run(&out).unwrap();
        assert!((back.amplitudes()[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
    }
}
