//! Defender policy synthesis on product games. Satisfying the Rabin
//! objective reduces to reaching the accepting set, so the defender's
//! optimal satisfaction probability against a worst-case adversary is the
//! value of a reachability game: each sweep of value iteration solves one
//! zero-sum matrix game per state, with the accepting set pinned at value 1.
//!
//! Iteration starts from 0 and increases monotonically (rewards sit only on
//! the absorbing accepting set and there is no discounting), so convergence
//! is by monotone boundedness; slow instances surface through the
//! convergence flag rather than an error.

use crate::lp::solve_matrix_game;
use crate::model::{AcceptingSet, LabeledMdp, MixedPolicy, ProductGame};
use rayon::prelude::*;

/// Per-state values in `[0, 1]`, indexed by product state.
pub type ValueTable = Vec<f64>;

/// Default sup-norm convergence tolerance for all value iterations here.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Default sweep cap.
pub const DEFAULT_MAX_ITER: usize = 100_000;

/// Result of [`stackelberg_value_iteration`]: the value table, the
/// defender's optimal mixed policy, and how the iteration ended.
#[derive(Debug, Clone)]
pub struct SynthesisOutcome {
    pub values: ValueTable,
    pub policy: MixedPolicy,
    pub converged: bool,
    pub iterations: usize,
}

/// Result of a plain value iteration: values plus termination information.
#[derive(Debug, Clone)]
pub struct ValueIterationOutcome {
    pub values: ValueTable,
    pub converged: bool,
    pub iterations: usize,
}

/// Normalize an LP-produced strategy into a clean distribution: clamp tiny
/// negative noise, rescale to sum 1.
fn sanitize_strategy(mut row: Vec<f64>) -> Vec<f64> {
    for p in row.iter_mut() {
        if !p.is_finite() || *p < 0.0 {
            *p = 0.0;
        }
    }
    let sum: f64 = row.iter().sum();
    debug_assert!(sum > 0.5, "matrix-game strategy collapsed to zero mass");
    for p in row.iter_mut() {
        *p /= sum;
    }
    row
}

/// Whether defender action `ud` at `x` is a certain self-loop: the state
/// transitions to itself with probability 1 under every adversary action.
fn certain_self_loop(product: &ProductGame, x: usize, ud: usize) -> bool {
    (0..product.n_adv_actions())
        .all(|ua| matches!(product.successors(x, ud, ua), &[(y, _)] if y == x))
}

/// Solve the local matrix game at `x` with continuation payoffs taken from
/// `values`, dropping certain self-loop rows while any other row exists.
/// Returns the game value and the defender's optimal row over all actions.
fn local_game(product: &ProductGame, x: usize, values: &[f64]) -> (f64, Vec<f64>) {
    let nd = product.n_def_actions();
    let na = product.n_adv_actions();
    let mut kept: Vec<usize> = (0..nd)
        .filter(|&ud| !certain_self_loop(product, x, ud))
        .collect();
    if kept.is_empty() {
        kept = (0..nd).collect();
    }
    let payoff: Vec<Vec<f64>> = kept
        .iter()
        .map(|&ud| {
            (0..na)
                .map(|ua| {
                    product
                        .successors(x, ud, ua)
                        .iter()
                        .map(|&(y, p)| p * values[y])
                        .sum::<f64>()
                })
                .collect()
        })
        .collect();
    let sol = solve_matrix_game(&payoff).expect("payoff entries are finite by construction");
    let mut strategy = vec![0.0; nd];
    for (slot, &ud) in kept.iter().enumerate() {
        strategy[ud] = sol.row_strategy[slot];
    }
    (sol.value.clamp(0.0, 1.0), sanitize_strategy(strategy))
}

/// Bound on strategy-improvement rounds in the extraction repair.
const REPAIR_ROUNDS: usize = 32;
/// A state's strategy is only switched during repair when the local game
/// over the policy's current worst-case values beats them by this much.
const REPAIR_MARGIN: f64 = 1e-7;

/// Repair value-preserving but non-reaching strategies.
///
/// At a degenerate fixed point several defender mixtures satisfy the value
/// equation with the same optimum, and not all of them make progress: a
/// mixture can cycle below the accepting set forever while the equation
/// still balances, because its own continuation value is what it passes
/// through. Dropping certain self-loop rows removes the single-state version
/// of the problem, but longer cycles survive it. Evaluate the extracted
/// policy against a best-responding adversary; wherever re-solving the local
/// game over the policy's own worst-case values strictly improves on them,
/// switch to the improving mixture. Rounds repeat until stable, rolling back
/// any round that regresses somewhere instead of improving.
fn repair_policy(
    product: &ProductGame,
    e: &AcceptingSet,
    strategies: Vec<Vec<f64>>,
    tol: f64,
    max_iter: usize,
) -> MixedPolicy {
    let mut policy = MixedPolicy::new(strategies).expect("sanitized strategies are distributions");
    let mut worst = reach_probability(product, &policy, e, tol, max_iter).values;
    for _ in 0..REPAIR_ROUNDS {
        let mut rows = policy.rows().to_vec();
        let mut switched = false;
        for x in 0..product.n_states() {
            if e.contains(x) {
                continue;
            }
            let (value, strategy) = local_game(product, x, &worst);
            if value > worst[x] + REPAIR_MARGIN {
                rows[x] = strategy;
                switched = true;
            }
        }
        if !switched {
            break;
        }
        let candidate = MixedPolicy::new(rows).expect("sanitized strategies are distributions");
        let improved = reach_probability(product, &candidate, e, tol, max_iter).values;
        if (0..product.n_states()).any(|x| improved[x] < worst[x] - REPAIR_MARGIN) {
            break;
        }
        policy = candidate;
        worst = improved;
    }
    policy
}

/// Maximize, over defender mixtures, the worst-case (over adversary actions)
/// probability of reaching `e`.
///
/// Every sweep solves, per non-accepting state `x`, the matrix game with
/// payoff `M[u_d][u_a] = Σ_y T(y|x,u_d,u_a)·V(y)`, keeping `V = 1` on `e`.
/// Stops when the sup-norm change drops below `tol` or after `max_iter`
/// sweeps; the returned policy is the per-state optimal mixed row strategy
/// of the final sweep. On accepting states the policy plays the closure
/// witness when one is known, otherwise the first action.
///
/// Rows that are certain self-loops are dropped from the matrix game while
/// any other row exists. Starting from 0, a self-loop row passes the
/// state's previous value through, which never exceeds the re-evaluated
/// moving rows, so the game value is unchanged; but at the fixed point such
/// a row ties the optimum exactly, and a policy that parks on it would
/// preserve the value equation while never actually reaching `e`. Cycles of
/// several states can tie the optimum the same way, so before returning, the
/// extracted policy is evaluated against a best-responding adversary and
/// locally re-optimized wherever that evaluation falls short; see
/// [`repair_policy`] above.
pub fn stackelberg_value_iteration(
    product: &ProductGame,
    e: &AcceptingSet,
    tol: f64,
    max_iter: usize,
) -> SynthesisOutcome {
    assert!(tol > 0.0, "tolerance must be positive");
    let n = product.n_states();
    let nd = product.n_def_actions();

    let mut values: Vec<f64> = (0..n)
        .map(|x| if e.contains(x) { 1.0 } else { 0.0 })
        .collect();
    let mut strategies: Vec<Vec<f64>> = (0..n)
        .map(|x| {
            let pick = e.witness_action(x).unwrap_or(0);
            let mut row = vec![0.0; nd];
            row[pick] = 1.0;
            row
        })
        .collect();

    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let sweep: Vec<Option<(f64, Vec<f64>)>> = (0..n)
            .into_par_iter()
            .map(|x| {
                if e.contains(x) {
                    return None;
                }
                Some(local_game(product, x, &values))
            })
            .collect();

        let mut delta = 0.0f64;
        for (x, cell) in sweep.into_iter().enumerate() {
            if let Some((v, strat)) = cell {
                delta = delta.max((v - values[x]).abs());
                values[x] = v;
                strategies[x] = strat;
            }
        }
        if delta < tol {
            converged = true;
            break;
        }
    }

    let policy = repair_policy(product, e, strategies, tol, max_iter);
    SynthesisOutcome {
        values,
        policy,
        converged,
        iterations,
    }
}

/// With the defender fixed to `mu`, the adversary faces an ordinary MDP;
/// value-iterate the adversary's minimization of the probability of reaching
/// `e`, from below.
pub fn reach_probability(
    product: &ProductGame,
    mu: &MixedPolicy,
    e: &AcceptingSet,
    tol: f64,
    max_iter: usize,
) -> ValueIterationOutcome {
    assert!(tol > 0.0, "tolerance must be positive");
    mu.check_covers(product.n_states(), product.n_def_actions())
        .expect("policy must cover the product");
    let n = product.n_states();
    let mut values: Vec<f64> = (0..n)
        .map(|x| if e.contains(x) { 1.0 } else { 0.0 })
        .collect();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut delta = 0.0f64;
        let next: Vec<f64> = (0..n)
            .map(|x| {
                if e.contains(x) {
                    return 1.0;
                }
                adversary_action_values(product, mu, &values, x)
                    .into_iter()
                    .fold(f64::INFINITY, f64::min)
                    .clamp(0.0, 1.0)
            })
            .collect();
        for x in 0..n {
            delta = delta.max((next[x] - values[x]).abs());
        }
        values = next;
        if delta < tol {
            converged = true;
            break;
        }
    }
    ValueIterationOutcome {
        values,
        converged,
        iterations,
    }
}

/// Expected continuation value per adversary action at `x`, with the
/// defender mixing according to `mu`.
fn adversary_action_values(
    product: &ProductGame,
    mu: &MixedPolicy,
    values: &[f64],
    x: usize,
) -> Vec<f64> {
    (0..product.n_adv_actions())
        .map(|ua| {
            mu.row(x)
                .iter()
                .enumerate()
                .filter(|&(_, &pd)| pd > 0.0)
                .map(|(ud, &pd)| {
                    pd * product
                        .successors(x, ud, ua)
                        .iter()
                        .map(|&(y, p)| p * values[y])
                        .sum::<f64>()
                })
                .sum()
        })
        .collect()
}

/// Deterministic adversary best response to `mu`: in every state, the action
/// minimizing the continuation value of the converged reachability
/// minimization, ties broken by lowest action index.
pub fn best_response_adversary(
    product: &ProductGame,
    mu: &MixedPolicy,
    e: &AcceptingSet,
) -> MixedPolicy {
    let vi = reach_probability(product, mu, e, DEFAULT_TOL, DEFAULT_MAX_ITER);
    let picks: Vec<usize> = (0..product.n_states())
        .map(|x| {
            let action_values = adversary_action_values(product, mu, &vi.values, x);
            let mut best = 0usize;
            for (ua, &v) in action_values.iter().enumerate() {
                if v < action_values[best] {
                    best = ua;
                }
            }
            best
        })
        .collect();
    MixedPolicy::point_mass(product.n_states(), product.n_adv_actions(), &picks)
        .expect("picks are valid adversary actions")
}

fn bellman_core(
    mdp: &LabeledMdp,
    e: &AcceptingSet,
    tol: Option<f64>,
    max_iter: usize,
) -> (ValueTable, bool, usize) {
    let n = mdp.n_states();
    // Lemma-style initialization: identically zero, accepting states jump to
    // their absorbing reward on the first sweep and stay there.
    let mut values = vec![0.0f64; n];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let next: Vec<f64> = (0..n)
            .map(|x| {
                if e.contains(x) {
                    return 1.0;
                }
                mdp.menu(x)
                    .iter()
                    .map(|(_, row)| row.iter().map(|&(y, p)| p * values[y]).sum::<f64>())
                    .fold(0.0f64, f64::max)
                    .clamp(0.0, 1.0)
            })
            .collect();
        let delta = (0..n)
            .map(|x| (next[x] - values[x]).abs())
            .fold(0.0f64, f64::max);
        values = next;
        if let Some(tol) = tol {
            if delta < tol {
                converged = true;
                break;
            }
        }
    }
    (values, converged, iterations)
}

/// Optimal reach-`e` values of a labeled MDP (typically the product
/// restricted to the support of a synthesized policy): undiscounted value
/// iteration from zero, maximizing over each state's available actions, with
/// accepting states absorbing at value 1.
pub fn bellman_values_under_policy(
    mdp: &LabeledMdp,
    e: &AcceptingSet,
    tol: f64,
    max_iter: usize,
) -> ValueIterationOutcome {
    assert!(tol > 0.0, "tolerance must be positive");
    let (values, converged, iterations) = bellman_core(mdp, e, Some(tol), max_iter);
    ValueIterationOutcome {
        values,
        converged,
        iterations,
    }
}

/// Exactly `n` Bellman sweeps from the all-zero table: the truncated value
/// sequence whose gaps the privacy fixed-point distances must dominate.
pub fn bellman_values_truncated(mdp: &LabeledMdp, e: &AcceptingSet, n: usize) -> ValueTable {
    bellman_core(mdp, e, None, n).0
}
