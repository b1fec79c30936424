use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seqst_core::estimation::{chernoff_plan, chi_square_gof, RandomStream, ShotPlan};
use seqst_core::quantum::{random_density_matrix, random_unitary, C64};
use seqst_core::seqst::{seqst_exact, seqst_outcome_distribution, seqst_sample, Axis, PreparationBasis};

/// `<psi_a| rho |psi_b>` with `psi_a` read straight off column `a` of `u`.
fn oracle(rho: &seqst_core::DensityMatrix, u: &seqst_core::Operator, a: usize, b: usize) -> C64 {
    let col = |k: usize| u.matrix().column(k).clone_owned();
    col(a).dotc(&(rho.matrix() * col(b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn recovers_matrix_elements(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 1 << n;
        let rho = random_density_matrix(d, &mut rng);
        let u = random_unitary(d, &mut rng);
        let basis = PreparationBasis::from_unitary(u.clone()).unwrap();
        let (a, b) = (rng.random_range(0..d), rng.random_range(0..d));
        let got = seqst_exact(&rho, &basis, a, b).unwrap();
        prop_assert!((got - oracle(&rho, &u, a, b)).norm() < 1e-10);
    }

    #[test]
    fn hermitian_symmetry(seed in any::<u64>(), n in 1usize..=2) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = 1 << n;
        let rho = random_density_matrix(d, &mut rng);
        let basis = PreparationBasis::random_unitary(n, &mut rng);
        let (a, b) = (rng.random_range(0..d), rng.random_range(0..d));
        let ab = seqst_exact(&rho, &basis, a, b).unwrap();
        let ba = seqst_exact(&rho, &basis, b, a).unwrap();
        prop_assert!((ab - ba.conj()).norm() < 1e-12);
        let aa = seqst_exact(&rho, &basis, a, a).unwrap();
        prop_assert!(aa.im.abs() < 1e-12 && aa.re >= -1e-12);
    }
}

#[test]
fn diagonal_sums_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for n in 1..=2 {
        let d = 1 << n;
        for _ in 0..10 {
            let rho = random_density_matrix(d, &mut rng);
            let basis = PreparationBasis::random_unitary(n, &mut rng);
            let total: f64 = (0..d).map(|a| seqst_exact(&rho, &basis, a, a).unwrap().re).sum();
            assert!((total - 1.0).abs() < 1e-10);
            // the full reconstruction reproduces rho in that basis
            for a in 0..d {
                for b in 0..d {
                    let want = basis.state(a).unwrap().vector().dotc(&(rho.matrix() * basis.state(b).unwrap().vector()));
                    assert!((seqst_exact(&rho, &basis, a, b).unwrap() - want).norm() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn sampled_counts_fit_the_distribution() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let plan = ShotPlan::with_shots(0.1, 0.05, 10_000).unwrap();
    for (i, n) in [1, 2, 1, 2].into_iter().enumerate() {
        let d = 1 << n;
        let rho = random_density_matrix(d, &mut rng);
        let basis = PreparationBasis::random_unitary(n, &mut rng);
        let (a, b) = (i % d, (i + 1) % d);
        let stream = RandomStream::new(500 + i as u64);
        let report = seqst_sample(&rho, &basis, a, b, &plan, &stream).unwrap();
        for (axis, counts) in [(Axis::X, report.tallies.x), (Axis::Y, report.tallies.y)] {
            let probs = seqst_outcome_distribution(&rho, &basis, a, b, axis).unwrap().as_array();
            let fit = chi_square_gof(&counts, &probs).unwrap();
            assert!(fit.p_value > 0.001, "{axis:?}: {fit:?}");
        }
    }
}

#[test]
fn estimator_is_unbiased() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let rho = random_density_matrix(2, &mut rng);
    let basis = PreparationBasis::random_unitary(1, &mut rng);
    let exact = seqst_exact(&rho, &basis, 0, 1).unwrap();
    let plan = ShotPlan::with_shots(0.1, 0.05, 100).unwrap();
    let seeds = 500;
    let (mut re, mut im) = (Vec::new(), Vec::new());
    for s in 0..seeds {
        let r = seqst_sample(&rho, &basis, 0, 1, &plan, &RandomStream::new(s)).unwrap();
        re.push(r.re);
        im.push(r.im);
    }
    for (xs, want) in [(re, exact.re), (im, exact.im)] {
        let k = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / k;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1.0);
        assert!((mean - want).abs() < 3.0 * (var / k).sqrt(), "{mean} vs {want}");
    }
}

#[test]
fn chernoff_coverage() {
    let (eps, delta) = (0.2, 0.1);
    let plan = chernoff_plan(eps, delta).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let rho = random_density_matrix(4, &mut rng);
    let basis = PreparationBasis::random_unitary(2, &mut rng);
    let exact = seqst_exact(&rho, &basis, 1, 3).unwrap();
    let seeds = 300;
    let (mut ok_re, mut ok_im) = (0, 0);
    for s in 0..seeds {
        let r = seqst_sample(&rho, &basis, 1, 3, &plan, &RandomStream::new(s)).unwrap();
        ok_re += ((r.re - exact.re).abs() <= eps) as usize;
        ok_im += ((r.im - exact.im).abs() <= eps) as usize;
    }
    let floor = (1.0 - delta - 0.03) * seeds as f64;
    assert!(ok_re as f64 >= floor && ok_im as f64 >= floor, "{ok_re} {ok_im}");
}

#[test]
fn sampling_is_seed_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let rho = random_density_matrix(4, &mut rng);
    let basis = PreparationBasis::random_unitary(2, &mut rng);
    let plan = ShotPlan::with_shots(0.1, 0.05, 20_000).unwrap();
    let one = seqst_sample(&rho, &basis, 0, 2, &plan, &RandomStream::new(4)).unwrap();
    let four = seqst_sample(&rho, &basis, 0, 2, &plan, &RandomStream::new(4).with_workers(4)).unwrap();
    assert_eq!(one, four);
    let other = seqst_sample(&rho, &basis, 0, 2, &plan, &RandomStream::new(5)).unwrap();
    assert_ne!(one.tallies, other.tallies);
}
