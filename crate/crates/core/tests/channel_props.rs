use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use seqst_core::channels::{
    apply_chi, apply_kraus, chi_to_kraus, choi_state, kraus_to_chi, random_channel, validate_channel,
    zoo_instances, ChiMatrix, KrausChannel,
};
use seqst_core::pauli::{pauli_basis, basis_size};
use seqst_core::quantum::{maximally_entangled_state, partial_trace, random_density_matrix, Keep, Operator, C64};

fn zoo(n: usize) -> Vec<(String, KrausChannel)> {
    zoo_instances(n)
        .into_iter()
        .map(|s| (format!("{s:?}"), s.build().unwrap()))
        .collect()
}

#[test]
fn chi_and_kraus_paths_agree_on_zoo() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in 1..=2 {
        for (name, ch) in zoo(n) {
            let chi = kraus_to_chi(&ch);
            for _ in 0..20 {
                let rho = random_density_matrix(1 << n, &mut rng);
                let via_chi = apply_chi(&chi, &rho).unwrap();
                let via_kraus = apply_kraus(&ch, &rho).unwrap();
                assert!(via_chi.max_abs_diff(&via_kraus) < 1e-8, "{name}");
                via_kraus.validate().unwrap();
            }
        }
    }
}

#[test]
fn zoo_channels_are_valid() {
    for n in 1..=2 {
        for (name, ch) in zoo(n) {
            let report = validate_channel(&kraus_to_chi(&ch));
            assert!(report.all_hold(), "{name}: {report:?}");
        }
    }
}

#[test]
fn choi_state_is_chi_in_pauli_frame() {
    for n in 1..=2 {
        let d = 1 << n;
        let omega = maximally_entangled_state(n).projector().to_operator();
        let lifted: Vec<Operator> = pauli_basis(n).iter().map(|e| e.tensor(&Operator::identity(d))).collect();
        for (name, ch) in zoo(n) {
            let chi = kraus_to_chi(&ch);
            let mut sum = Operator::zeros(d * d);
            for m in 0..basis_size(n) {
                for k in 0..basis_size(n) {
                    let term = (&lifted[m] * &omega) * lifted[k].dagger();
                    sum = &sum + &term.scale(chi.get(m, k));
                }
            }
            let choi = choi_state(&ch);
            assert!(choi.to_operator().max_abs_diff(&sum) < 1e-8, "{name}");
            choi.validate().unwrap();
            let marginal = partial_trace(&choi, (d, d), Keep::B).unwrap();
            assert!(marginal.max_abs_diff(&seqst_core::DensityMatrix::maximally_mixed(d)) < 1e-12);
        }
    }
}

#[test]
fn chi_kraus_round_trip_random() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=2 {
        for rank in [1, 2, 4] {
            let ch = random_channel(n, rank, &mut rng);
            let chi = kraus_to_chi(&ch);
            let back = chi_to_kraus(&chi).unwrap();
            assert!(kraus_to_chi(&back).max_abs_diff(&chi) < 1e-8);
            assert!(back.completeness_residual() < 1e-8);
            let rho = random_density_matrix(1 << n, &mut rng);
            assert!(apply_chi(&chi, &rho).unwrap().max_abs_diff(&apply_kraus(&back, &rho).unwrap()) < 1e-8);
        }
    }
}

#[test]
fn corrupting_a_kraus_operator_breaks_validity() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in 1..=2 {
        let d = 1 << n;
        for (name, ch) in zoo(n) {
            for which in 0..ch.kraus_ops().len() {
                let noise = DMatrix::from_fn(d, d, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
                let mut ops = ch.kraus_ops().to_vec();
                let perturbed = ops[which].matrix() + noise * C64::new(0.1, 0.0);
                ops[which] = Operator::from_matrix(perturbed).unwrap();
                let mutant = KrausChannel::new_unchecked(ops).unwrap();
                assert!(KrausChannel::new(mutant.kraus_ops().to_vec()).is_err());
                let report = validate_channel(&kraus_to_chi(&mutant));
                assert!(!report.all_hold(), "{name} op {which}: {report:?}");
            }
        }
    }
}

#[test]
fn mutants_fail_their_predicate() {
    let id = ChiMatrix::unit(1, 0, 0).unwrap();
    let mut m = id.as_operator().matrix().clone();
    m[(0, 1)] = C64::new(0.1, 0.0);
    m[(1, 0)] = C64::new(-0.1, 0.0);
    let r = validate_channel(&ChiMatrix::new(1, m).unwrap());
    assert!(!r.hermitian.holds && r.trace_preserving.holds && r.completely_positive.holds);

    let r = validate_channel(&id.scaled(0.5));
    assert!(r.hermitian.holds && !r.trace_preserving.holds && r.completely_positive.holds);

    let mut m = DMatrix::zeros(4, 4);
    m[(0, 0)] = C64::new(1.1, 0.0);
    m[(1, 1)] = C64::new(-0.1, 0.0);
    let r = validate_channel(&ChiMatrix::new(1, m).unwrap());
    assert!(r.hermitian.holds && r.trace_preserving.holds && !r.completely_positive.holds);
}
