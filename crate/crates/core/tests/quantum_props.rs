use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use seqst_core::quantum::{
    apply_unitary, haar_random_state, partial_trace, random_density_matrix, random_unitary, Keep,
    PureState,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unitary_composition(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 1 << n;
        let (u, v) = (random_unitary(d, &mut rng), random_unitary(d, &mut rng));
        let rho = random_density_matrix(d, &mut rng);
        let stepwise = apply_unitary(&u, &apply_unitary(&v, &rho).unwrap()).unwrap();
        let joint = apply_unitary(&(&u * &v), &rho).unwrap();
        prop_assert!(stepwise.max_abs_diff(&joint) < 1e-9);
        prop_assert!((stepwise.trace().re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tensor_is_associative(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_unitary(2, &mut rng);
        let b = random_unitary(4, &mut rng);
        let c = random_unitary(2, &mut rng);
        let left = a.tensor(&b).tensor(&c);
        let right = a.tensor(&b.tensor(&c));
        prop_assert!(left.max_abs_diff(&right) < 1e-12);
    }

    #[test]
    fn partial_trace_factorizes(seed in any::<u64>(), na in 1usize..=2, nb in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (da, db) = (1 << na, 1 << nb);
        let ra = random_density_matrix(da, &mut rng);
        let rb = random_density_matrix(db, &mut rng);
        let joint = ra.tensor(&rb);
        prop_assert!(partial_trace(&joint, (da, db), Keep::A).unwrap().max_abs_diff(&ra) < 1e-12);
        prop_assert!(partial_trace(&joint, (da, db), Keep::B).unwrap().max_abs_diff(&rb) < 1e-12);
    }
}

/// Mean and standard error of a sample.
fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[test]
fn haar_moments() {
    let d = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let samples: Vec<f64> = (0..100_000)
        .map(|_| haar_random_state(d, &mut rng).amplitudes()[0].norm_sqr())
        .collect();
    let (m2, se2) = mean_se(&samples);
    let fourth: Vec<f64> = samples.iter().map(|p| p * p).collect();
    let (m4, se4) = mean_se(&fourth);

    // E|<0|psi>|^2 = 1/d, E|<0|psi>|^4 = 2/(d(d+1))
    let want4 = 2.0 / (d as f64 * (d as f64 + 1.0));
    assert!((m2 - 0.25).abs() <= 0.01 && (m2 - 0.25).abs() <= 3.0 * se2, "{m2} ± {se2}");
    assert!((m4 - want4).abs() <= 0.01 && (m4 - want4).abs() <= 3.0 * se4, "{m4} ± {se4}");
}

#[test]
fn haar_distribution_is_unitarily_invariant() {
    // Overlap with a fixed state must have the same law before and after a fixed unitary.
    let d = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let u = random_unitary(d, &mut rng);
    let probe = PureState::basis(d, 2).unwrap();
    let n = 40_000;
    let plain: Vec<f64> = (0..n)
        .map(|_| probe.inner(&haar_random_state(d, &mut rng)).norm_sqr())
        .collect();
    let rotated: Vec<f64> = (0..n)
        .map(|_| {
            let psi = haar_random_state(d, &mut rng);
            let v = u.apply(&psi);
            probe.vector().dotc(&v).norm_sqr()
        })
        .collect();
    let (m1, s1) = mean_se(&plain);
    let (m2, s2) = mean_se(&rotated);
    assert!((m1 - m2).abs() < 3.0 * (s1 * s1 + s2 * s2).sqrt(), "{m1} vs {m2}");
    // compare a tail probability too
    let tail = |xs: &[f64]| xs.iter().filter(|&&x| x > 0.5).count() as f64 / xs.len() as f64;
    let (t1, t2) = (tail(&plain), tail(&rotated));
    let se = (t1 * (1.0 - t1) / n as f64).sqrt() * 2f64.sqrt();
    assert!((t1 - t2).abs() < 4.0 * se, "{t1} vs {t2}");
}
