//! Monte Carlo validation of synthesized policies: seeded rollouts of an
//! induced Markov chain, scored against the accepting set.
//!
//! A rollout counts as satisfying when its first visit to the accepting set
//! happens within the horizon and the rollout never leaves the set for the
//! remaining steps. Accepting sets computed by the product analysis are
//! defender-closed, so under the synthesized policy the stay-check never
//! trips; it exists to avoid overcounting for hand-built sets or foreign
//! policies that merely brush the set.
//!
//! Randomness comes from ChaCha8, seeded explicitly; rollout `i` draws from
//! stream `i` of the seed, so results are reproducible bit-for-bit and do not
//! depend on how rollouts are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::{AcceptingSet, InducedMarkovChain};

/// 97.5% normal quantile, for two-sided 95% intervals.
const Z_95: f64 = 1.959963984540054;

/// Outcome of a batch of seeded rollouts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RolloutReport {
    pub rollouts: usize,
    pub horizon: usize,
    /// Rollouts that reached the accepting set and stayed.
    pub successes: u64,
    /// `successes / rollouts`.
    pub estimate: f64,
    /// 95% binomial half-width via the normal approximation.
    pub half_width: f64,
}

fn rng_for(seed: u64, rollout: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(rollout);
    rng
}

/// Draw a successor of `s` in the chain. Row masses sum to one within the
/// model tolerance; any residual rounding mass falls to the last successor.
fn step(chain: &InducedMarkovChain, s: usize, rng: &mut ChaCha8Rng) -> usize {
    let row = chain.successors(s);
    let mut r: f64 = rng.random();
    for &(t, p) in row {
        r -= p;
        if r <= 0.0 {
            return t;
        }
    }
    row.last().expect("chain rows are non-empty distributions").0
}

/// Sample one trajectory of `horizon` steps starting at `start`; the result
/// has `horizon + 1` states including the start.
pub fn rollout(
    chain: &InducedMarkovChain,
    start: usize,
    horizon: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    let mut path = Vec::with_capacity(horizon + 1);
    path.push(start);
    let mut current = start;
    for _ in 0..horizon {
        current = step(chain, current, rng);
        path.push(current);
    }
    path
}

/// Deterministic reference path: the rollout drawn from stream 0 of `seed`.
/// Used when a single reproducible trajectory is needed rather than a batch.
pub fn sample_path(
    chain: &InducedMarkovChain,
    start: usize,
    horizon: usize,
    seed: u64,
) -> Vec<usize> {
    rollout(chain, start, horizon, &mut rng_for(seed, 0))
}

/// Whether a trajectory satisfies the proxy: it visits `e` at some position
/// and stays inside `e` from that first visit to the end.
fn satisfies(path: &[usize], e: &AcceptingSet) -> bool {
    match path.iter().position(|&x| e.contains(x)) {
        Some(first) => path[first..].iter().all(|&x| e.contains(x)),
        None => false,
    }
}

/// Estimate the probability that the chain, started at `start`, reaches the
/// accepting set within `horizon` steps and stays there. Rollouts run in
/// parallel; the seed fixes every draw.
pub fn simulate_satisfaction(
    chain: &InducedMarkovChain,
    start: usize,
    e: &AcceptingSet,
    rollouts: usize,
    horizon: usize,
    seed: u64,
) -> RolloutReport {
    let successes: u64 = (0..rollouts as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_for(seed, i);
            let path = rollout(chain, start, horizon, &mut rng);
            u64::from(satisfies(&path, e))
        })
        .sum();
    let n = rollouts.max(1) as f64;
    let estimate = successes as f64 / n;
    RolloutReport {
        rollouts,
        horizon,
        successes,
        estimate,
        half_width: Z_95 * (estimate * (1.0 - estimate) / n).sqrt(),
    }
}
