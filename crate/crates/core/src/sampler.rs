//! Drawing configurations from a pairwise binary Markov network: by a
//! single thinned Gibbs chain, by independent fixed-depth chains (one per
//! row), or, for small node counts, by exact enumeration of the joint
//! distribution.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BinaryDataset, IsingModel};
use crate::numeric::sigmoid;

/// Exact enumeration builds a table of 2^p probabilities; sixteen nodes
/// (65536 configurations) is where that stops being cheap.
pub const MAX_EXACT_NODES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SampleMethod {
    /// Sequential-scan Gibbs sampler (heat bath), one site at a time: a
    /// single running chain, thinned.
    Gibbs,
    /// One fresh chain per row: a uniform random initial state evolved by
    /// `burn_in_sweeps` sequential-scan heat-bath sweeps, then recorded.
    /// Rows are mutually independent draws from the fixed-depth chain law,
    /// which approaches the model's joint law only as the depth grows; at
    /// small depths it deliberately captures partially equilibrated
    /// configurations, the regime where strongly coupled networks still
    /// show diverse rows instead of collapsing onto their global modes.
    Independent,
    /// Independent draws from the exactly enumerated joint distribution.
    Exact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub method: SampleMethod,
    /// Full sweeps discarded before the first retained configuration
    /// (Gibbs only).
    pub burn_in_sweeps: usize,
    /// Full sweeps between retained configurations (Gibbs only, at least 1).
    pub thinning_sweeps: usize,
    pub rng_seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { method: SampleMethod::Gibbs, burn_in_sweeps: 1000, thinning_sweeps: 10, rng_seed: 0 }
    }
}

/// Probability that node s equals 1 given the other coordinates of x.
///
/// This is `sigmoid(log_odds(s, x))`; the value of `x[s]` itself is
/// ignored.
pub fn conditional_prob(model: &IsingModel, s: usize, x: &[u8]) -> f64 {
    sigmoid(model.log_odds(s, x))
}

/// One full sweep: update sites 0..p in order from their conditionals.
fn gibbs_sweep(model: &IsingModel, state: &mut [u8], rng: &mut ChaCha8Rng) {
    for s in 0..model.p() {
        let pi = conditional_prob(model, s, state);
        let u: f64 = rng.random();
        state[s] = u8::from(u < pi);
    }
}

/// Probability of every configuration, indexed by bitmask with node s at
/// bit s (so index 5 = 0b101 sets nodes 0 and 2).
///
/// Unnormalised log-weights are shifted by their maximum before
/// exponentiating, so models with large fields or weights stay in range.
/// Fails with [`Error::TooManyNodes`] above [`MAX_EXACT_NODES`] nodes.
pub fn exact_pmf(model: &IsingModel) -> Result<Vec<f64>> {
    let p = model.p();
    if p > MAX_EXACT_NODES {
        return Err(Error::TooManyNodes { got: p, max: MAX_EXACT_NODES });
    }
    let size = 1usize << p;
    let mut log_w = vec![0.0f64; size];
    for (mask, lw) in log_w.iter_mut().enumerate() {
        let mut e = 0.0;
        for s in 0..p {
            if (mask >> s) & 1 == 1 {
                e += model.field(s);
                for t in (s + 1)..p {
                    if (mask >> t) & 1 == 1 {
                        e += model.interaction(s, t);
                    }
                }
            }
        }
        *lw = e;
    }
    let shift = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut pmf: Vec<f64> = log_w.iter().map(|lw| (lw - shift).exp()).collect();
    let total: f64 = pmf.iter().sum();
    for q in &mut pmf {
        *q /= total;
    }
    Ok(pmf)
}

/// Draws n configurations from the model.
///
/// Gibbs starts from the all-zeros state, discards `burn_in_sweeps` full
/// sweeps, then records one row every `thinning_sweeps` sweeps. Independent
/// runs one fresh chain per row (uniform random start, `burn_in_sweeps`
/// sweeps, record; `thinning_sweeps` is ignored). Exact sampling draws
/// independent rows by inverting the enumerated CDF. All paths are pure
/// functions of (model, n, config).
pub fn sample(model: &IsingModel, n: usize, config: &SamplerConfig) -> Result<BinaryDataset> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample size must be at least 1".into()));
    }
    let p = model.p();
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let mut x = ndarray::Array2::<u8>::zeros((n, p));

    match config.method {
        SampleMethod::Gibbs => {
            if config.thinning_sweeps == 0 {
                return Err(Error::InvalidParameter("thinning_sweeps must be at least 1".into()));
            }
            let mut state = vec![0u8; p];
            for _ in 0..config.burn_in_sweeps {
                gibbs_sweep(model, &mut state, &mut rng);
            }
            for i in 0..n {
                for _ in 0..config.thinning_sweeps {
                    gibbs_sweep(model, &mut state, &mut rng);
                }
                for s in 0..p {
                    x[[i, s]] = state[s];
                }
            }
        }
        SampleMethod::Independent => {
            let mut state = vec![0u8; p];
            for i in 0..n {
                for v in state.iter_mut() {
                    let u: f64 = rng.random();
                    *v = u8::from(u < 0.5);
                }
                for _ in 0..config.burn_in_sweeps {
                    gibbs_sweep(model, &mut state, &mut rng);
                }
                for s in 0..p {
                    x[[i, s]] = state[s];
                }
            }
        }
        SampleMethod::Exact => {
            let pmf = exact_pmf(model)?;
            let mut cdf = pmf.clone();
            for k in 1..cdf.len() {
                cdf[k] += cdf[k - 1];
            }
            for i in 0..n {
                let u: f64 = rng.random();
                let raw = cdf.partition_point(|&c| c <= u);
                let mask = raw.min(cdf.len() - 1);
                for s in 0..p {
                    x[[i, s]] = ((mask >> s) & 1) as u8;
                }
            }
        }
    }

    BinaryDataset::new(x)
}
