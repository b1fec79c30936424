//! Shot planning, reproducible random streams, and categorical sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{param_err, Error, Result};

/// Number of shots drawn from one derived stream. Worker count never changes
/// how shots map onto streams, so tallies are identical for any `workers`.
pub const SHOTS_PER_CHUNK: u64 = 4096;

/// Shot budget `M` for a target precision `epsilon` with failure probability `delta`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub epsilon: f64,
    pub delta: f64,
    pub m: u64,
}

impl ShotPlan {
    /// A plan with an explicit shot count, keeping `(epsilon, delta)` for echoing.
    pub fn with_shots(epsilon: f64, delta: f64, m: u64) -> Result<Self> {
        if m == 0 {
            return Err(param_err("m", "shot count must be at least 1"));
        }
        Ok(Self { epsilon, delta, m })
    }
}

/// `M = ceil(2 ln(2/delta) / epsilon^2)`: Hoeffding's bound for averages of
/// variables in `[-1, 1]`. Independent of the system size.
pub fn chernoff_plan(epsilon: f64, delta: f64) -> Result<ShotPlan> {
    if !(epsilon > 0.0 && epsilon <= 2.0) {
        return Err(param_err("epsilon", format!("{epsilon} not in (0, 2]")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(param_err("delta", format!("{delta} not in (0, 1)")));
    }
    let bound = 2.0 * (2.0 / delta).ln() / (epsilon * epsilon);
    // guard against 3.9999999999 style rounding at exact integers
    let m = (bound - 1e-9).ceil().max(1.0) as u64;
    Ok(ShotPlan { epsilon, delta, m })
}

/// A reproducible stream of pseudorandom numbers identified by `(seed, stream)`.
///
/// Backed by ChaCha8, whose 64-bit stream parameter gives independent,
/// counter-based sequences per stream without shared state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream: u64,
    /// Execution hint for chunked sampling; never affects the draws.
    #[serde(skip, default = "one")]
    pub workers: usize,
}

fn one() -> usize {
    1
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            stream: 0,
            workers: 1,
        }
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        Self {
            seed,
            stream,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers.max(1);
        self
    }

    /// Deterministically derived sub-stream.
    pub fn child(&self, index: u64) -> Self {
        Self {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(index.wrapping_add(1))),
            workers: self.workers,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn clamp_distribution(probs: &[f64]) -> Result<Vec<f64>> {
    if probs.is_empty() {
        return Err(Error::InvalidDistribution("no categories".into()));
    }
    let mut out = Vec::with_capacity(probs.len());
    for (k, &p) in probs.iter().enumerate() {
        if !p.is_finite() || p < -1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "probability {p} for category {k}"
            )));
        }
        out.push(p.max(0.0));
    }
    let total: f64 = out.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!(
            "probabilities sum to {total}"
        )));
    }
    Ok(out)
}

fn draw_chunk(cumulative: &[f64], last_positive: usize, shots: u64, stream: &RandomStream) -> Vec<u64> {
    let mut rng = stream.rng();
    let mut tally = vec![0u64; cumulative.len()];
    for _ in 0..shots {
        let u: f64 = rng.random();
        let k = cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(last_positive);
        tally[k] += 1;
    }
    tally
}

/// Draws `m` independent outcomes from `probs`, returning the count per category.
///
/// Shots are split into fixed chunks of [`SHOTS_PER_CHUNK`], chunk `c` drawing
/// from `stream.child(c)`; chunks are spread over `stream.workers` threads.
pub fn sample_categorical(probs: &[f64], m: u64, stream: &RandomStream) -> Result<Vec<u64>> {
    let probs = clamp_distribution(probs)?;
    let mut cumulative = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for &p in &probs {
        acc += p;
        cumulative.push(acc);
    }
    let last_positive = probs.iter().rposition(|&p| p > 0.0).unwrap_or(0);
    // zero-probability categories must never be selected
    for (k, c) in cumulative.iter_mut().enumerate() {
        if probs[k] == 0.0 {
            *c = f64::NEG_INFINITY;
        }
    }

    let chunks = m.div_ceil(SHOTS_PER_CHUNK);
    let chunk_len = |c: u64| SHOTS_PER_CHUNK.min(m - c * SHOTS_PER_CHUNK);
    let workers = (stream.workers as u64).clamp(1, chunks.max(1));

    let mut total = vec![0u64; probs.len()];
    if workers == 1 {
        for c in 0..chunks {
            let t = draw_chunk(&cumulative, last_positive, chunk_len(c), &stream.child(c));
            total.iter_mut().zip(t).for_each(|(a, b)| *a += b);
        }
        return Ok(total);
    }

    let partials: Vec<Vec<u64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let cumulative = &cumulative;
                scope.spawn(move || {
                    let mut local = vec![0u64; cumulative.len()];
                    let mut c = w;
                    while c < chunks {
                        let t = draw_chunk(cumulative, last_positive, chunk_len(c), &stream.child(c));
                        local.iter_mut().zip(t).for_each(|(a, b)| *a += b);
                        c += workers;
                    }
                    local
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sampling worker panicked"))
            .collect()
    });
    for t in partials {
        total.iter_mut().zip(t).for_each(|(a, b)| *a += b);
    }
    Ok(total)
}

/// Counts of the `+1`, `-1` and `0` outcomes of a three-valued measurement.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThreeOutcomeTally {
    pub plus: u64,
    pub minus: u64,
    pub zero: u64,
}

impl ThreeOutcomeTally {
    pub fn from_counts(counts: &[u64]) -> Self {
        Self {
            plus: counts[0],
            minus: counts[1],
            zero: counts[2],
        }
    }

    pub fn shots(&self) -> u64 {
        self.plus + self.minus + self.zero
    }

    pub fn as_array(&self) -> [u64; 3] {
        [self.plus, self.minus, self.zero]
    }

    pub fn mean(&self) -> f64 {
        (self.plus as f64 - self.minus as f64) / self.shots() as f64
    }

    /// Plug-in variance of a single outcome.
    pub fn variance(&self) -> f64 {
        let m = self.shots() as f64;
        let second = (self.plus + self.minus) as f64 / m;
        (second - self.mean().powi(2)).max(0.0)
    }

    /// `sqrt(v / M)`
    pub fn standard_error(&self) -> f64 {
        (self.variance() / self.shots() as f64).sqrt()
    }

    pub fn add(&mut self, other: &ThreeOutcomeTally) {
        self.plus += other.plus;
        self.minus += other.minus;
        self.zero += other.zero;
    }
}

/// Probabilities of the `+1`, `-1` and `0` outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub plus: f64,
    pub minus: f64,
    pub zero: f64,
}

impl OutcomeDistribution {
    /// Builds the distribution from `p+` and `p-`, with `p0 = 1 - p+ - p-`.
    /// Round-off below `1e-12` is clamped to zero.
    pub fn from_plus_minus(plus: f64, minus: f64) -> Self {
        let clean = |p: f64| if p.abs() < 1e-12 { 0.0 } else { p };
        let (plus, minus) = (clean(plus), clean(minus));
        Self {
            plus,
            minus,
            zero: clean(1.0 - plus - minus),
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.plus, self.minus, self.zero]
    }

    /// Expected outcome value `p+ - p-`.
    pub fn mean(&self) -> f64 {
        self.plus - self.minus
    }

    pub fn sample(&self, m: u64, stream: &RandomStream) -> Result<ThreeOutcomeTally> {
        let counts = sample_categorical(&self.as_array(), m, stream)?;
        Ok(ThreeOutcomeTally::from_counts(&counts))
    }
}

/// Outcome of a chi-square goodness-of-fit test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GoodnessOfFit {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson's chi-square test of observed counts against expected probabilities.
///
/// Categories with zero expected probability are dropped when unobserved and
/// reject outright when observed.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<GoodnessOfFit> {
    if observed.len() != probs.len() {
        return Err(Error::DimensionMismatch {
            expected: probs.len(),
            actual: observed.len(),
        });
    }
    let probs = clamp_distribution(probs)?;
    let n: u64 = observed.iter().sum();
    let mut statistic = 0.0;
    let mut used = 0usize;
    for (&o, &p) in observed.iter().zip(&probs) {
        let expected = p * n as f64;
        if expected <= 1e-12 {
            if o > 0 {
                return Ok(GoodnessOfFit {
                    statistic: f64::INFINITY,
                    dof: used,
                    p_value: 0.0,
                });
            }
            continue;
        }
        used += 1;
        statistic += (o as f64 - expected).powi(2) / expected;
    }
    let dof = used.saturating_sub(1);
    let p_value = if dof == 0 {
        1.0
    } else {
        ChiSquared::new(dof as f64)
            .expect("positive degrees of freedom")
            .sf(statistic)
    };
    Ok(GoodnessOfFit {
        statistic,
        dof,
        p_value,
    })
}
