//! Shared fixtures for the criterion benchmarks.

use seqst_core::channels::{random_channel, KrausChannel};
use seqst_core::quantum::random_density_matrix;
use seqst_core::{DensityMatrix, PreparationBasis};

use seqst_core::RandomStream;

/// A random state and random-unitary basis on `n` qubits.
pub fn state_fixture(n: usize, seed: u64) -> (DensityMatrix, PreparationBasis) {
    let mut rng = RandomStream::new(seed).rng();
    let rho = random_density_matrix(1 << n, &mut rng);
    let basis = PreparationBasis::random_unitary(n, &mut rng);
    (rho, basis)
}

/// A random rank-`2^n` channel on `n` qubits.
pub fn channel_fixture(n: usize, seed: u64) -> KrausChannel {
    let mut rng = RandomStream::new(seed).rng();
    random_channel(n, 1 << n, &mut rng)
}
