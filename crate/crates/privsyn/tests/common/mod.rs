//! Shared helpers for integration tests: seeded random model generators and
//! independent brute-force oracles. The oracles are written with plain
//! linear algebra and exhaustive enumeration, deliberately sharing no code
//! with the library's algorithms.

#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use privsyn::gridworld::{build_grid, demo_ten_by_ten};
use privsyn::ltl::{dra_from_template, parse_ltl};
use privsyn::model::{
    accepting_states, build_product, AcceptingSet, InducedMarkovChain, LabeledMdp, ProductGame,
    RabinAutomaton, RabinPair, StochasticGame,
};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The bundled 10x10 surveillance instance: product, accepting set, and the
/// product index of the start cell after the initial letter moves the
/// automaton.
pub fn grid_instance() -> (ProductGame, AcceptingSet, usize) {
    let game = build_grid(&demo_ten_by_ten()).unwrap();
    let aut = dra_from_template(&parse_ltl("GF tar & G !obs").unwrap()).unwrap();
    let product = build_product(&game, &aut).unwrap();
    let e = accepting_states(&product);
    let q0 = aut.step_named(aut.initial(), "free").unwrap();
    let x0 = product.state_index(0, q0);
    (product, e, x0)
}

/// Single-action MDP with the same labels and rows as a chain.
pub fn mdp_of_chain(chain: &InducedMarkovChain) -> LabeledMdp {
    LabeledMdp::new(
        vec!["u".to_string()],
        chain.props().to_vec(),
        chain.labels().to_vec(),
        (0..chain.n_states())
            .map(|s| vec![(0, chain.successors(s).to_vec())])
            .collect(),
    )
    .unwrap()
}

/// Random sparse distribution over `n` states: non-empty support, positive
/// normalized weights.
pub fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, f64)> {
    let support_size = rng.random_range(1..=n);
    let mut states: Vec<usize> = (0..n).collect();
    for i in 0..support_size {
        let j = rng.random_range(i..n);
        states.swap(i, j);
    }
    let mut row: Vec<(usize, f64)> = states[..support_size]
        .iter()
        .map(|&t| (t, rng.random_range(0.05..1.0)))
        .collect();
    row.sort_by_key(|&(t, _)| t);
    let total: f64 = row.iter().map(|&(_, w)| w).sum();
    for (_, w) in &mut row {
        *w /= total;
    }
    row
}

/// Random labeled MDP in which every state offers the same action menu,
/// the shape induced games always have. One action count is drawn for the
/// whole system and each state gets a fresh random row per action.
pub fn random_uniform_mdp(
    rng: &mut ChaCha8Rng,
    max_states: usize,
    max_actions: usize,
) -> LabeledMdp {
    let n = rng.random_range(2..=max_states);
    let n_props = rng.random_range(2..=3);
    let props: Vec<String> = (0..n_props).map(|i| format!("l{i}")).collect();
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..n_props)).collect();
    let k = rng.random_range(1..=max_actions);
    let choices: Vec<Vec<(usize, Vec<(usize, f64)>)>> = (0..n)
        .map(|_| (0..k).map(|a| (a, random_distribution(rng, n))).collect())
        .collect();
    let action_names: Vec<String> = (0..max_actions).map(|i| format!("u{i}")).collect();
    LabeledMdp::new(action_names, props, labels, choices).unwrap()
}

/// Random labeled Markov chain with up to `max_states` states.
pub fn random_chain(rng: &mut ChaCha8Rng, max_states: usize) -> InducedMarkovChain {
    let n = rng.random_range(2..=max_states);
    let n_props = rng.random_range(2..=3);
    let props: Vec<String> = (0..n_props).map(|i| format!("l{i}")).collect();
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..n_props)).collect();
    let rows: Vec<Vec<(usize, f64)>> = (0..n).map(|_| random_distribution(rng, n)).collect();
    InducedMarkovChain::from_rows(props, labels, rows).unwrap()
}

/// Random two-player game with 2x2 actions, up to `max_states` states, and
/// two propositions.
pub fn random_game_2x2(rng: &mut ChaCha8Rng, max_states: usize) -> StochasticGame {
    let n = rng.random_range(2..=max_states);
    let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..2)).collect();
    let mut entries = Vec::new();
    for s in 0..n {
        for ud in 0..2 {
            for ua in 0..2 {
                for (t, p) in random_distribution(rng, n) {
                    entries.push((s, ud, ua, t, p));
                }
            }
        }
    }
    StochasticGame::from_entries(
        vec!["d0".into(), "d1".into()],
        vec!["a0".into(), "a1".into()],
        vec!["p".into(), "q".into()],
        labels,
        &entries,
    )
    .unwrap()
}

/// Wrap a game as a product with a single-state automaton (wildcard
/// self-loop), so product states coincide with game states.
pub fn trivial_product(game: &StochasticGame) -> ProductGame {
    let aut = RabinAutomaton::new(
        1,
        0,
        vec![],
        vec![vec![]],
        vec![Some(0)],
        vec![RabinPair::new(vec![], vec![0])],
    )
    .unwrap();
    build_product(game, &aut).unwrap()
}

/// Random payoff matrix with entries in [0, 1).
pub fn random_payoff(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| (0..n).map(|_| rng.random_range(0.0..1.0)).collect())
        .collect()
}

/// Membership mask of an accepting set.
pub fn membership_mask(e: &AcceptingSet) -> Vec<bool> {
    (0..e.n_states()).map(|x| e.contains(x)).collect()
}

/// Gaussian elimination with partial pivoting; `None` for singular systems.
pub fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .expect("finite pivots")
        })?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            if factor != 0.0 {
                for k in col..n {
                    a[row][k] -= factor * a[col][k];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for k in (row + 1)..n {
            acc -= a[row][k] * x[k];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Brute-force value of a 2-row matrix game on the 0.001 grid of row mixes:
/// the maximizer scans mixes, the minimizer answers with the worst column.
pub fn grid_value_rows2(payoff: &[Vec<f64>]) -> f64 {
    assert_eq!(payoff.len(), 2);
    let mut best = f64::NEG_INFINITY;
    for step in 0..=1000 {
        let p = step as f64 / 1000.0;
        let worst = (0..payoff[0].len())
            .map(|j| p * payoff[0][j] + (1.0 - p) * payoff[1][j])
            .fold(f64::INFINITY, f64::min);
        best = best.max(worst);
    }
    best
}

/// Brute-force value of a 2-column matrix game on the 0.001 grid of column
/// mixes: the minimizer scans mixes, the maximizer answers with the best row.
pub fn grid_value_cols2(payoff: &[Vec<f64>]) -> f64 {
    assert!(payoff.iter().all(|r| r.len() == 2));
    let mut best = f64::INFINITY;
    for step in 0..=1000 {
        let q = step as f64 / 1000.0;
        let most = payoff
            .iter()
            .map(|row| q * row[0] + (1.0 - q) * row[1])
            .fold(f64::NEG_INFINITY, f64::max);
        best = best.min(most);
    }
    best
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Exact matrix-game value by support enumeration: for every square support
/// pair, solve the equalization systems for both players and keep a solution
/// passing feasibility and no-profitable-deviation checks. Some pair always
/// works for a finite zero-sum game.
pub fn support_value(payoff: &[Vec<f64>]) -> Option<f64> {
    let m = payoff.len();
    let n = payoff[0].len();
    let slack = 1e-6;
    for size in 1..=m.min(n) {
        for rows in subsets(m, size) {
            for cols in subsets(n, size) {
                // Unknowns: support weights then the value.
                let dim = size + 1;
                let mut a = vec![vec![0.0; dim]; dim];
                let mut b = vec![0.0; dim];
                for (eq, &j) in cols.iter().enumerate() {
                    for (k, &i) in rows.iter().enumerate() {
                        a[eq][k] = payoff[i][j];
                    }
                    a[eq][size] = -1.0;
                }
                for k in 0..size {
                    a[size][k] = 1.0;
                }
                b[size] = 1.0;
                let Some(p_sol) = solve_linear(a, b) else {
                    continue;
                };
                if p_sol[..size].iter().any(|&w| w < -slack) {
                    continue;
                }
                let v = p_sol[size];

                let mut a2 = vec![vec![0.0; dim]; dim];
                let mut b2 = vec![0.0; dim];
                for (eq, &i) in rows.iter().enumerate() {
                    for (k, &j) in cols.iter().enumerate() {
                        a2[eq][k] = payoff[i][j];
                    }
                    a2[eq][size] = -1.0;
                }
                for k in 0..size {
                    a2[size][k] = 1.0;
                }
                b2[size] = 1.0;
                let Some(q_sol) = solve_linear(a2, b2) else {
                    continue;
                };
                if q_sol[..size].iter().any(|&w| w < -slack) {
                    continue;
                }
                if (v - q_sol[size]).abs() > slack {
                    continue;
                }

                let mut p_full = vec![0.0; m];
                for (k, &i) in rows.iter().enumerate() {
                    p_full[i] = p_sol[k].max(0.0);
                }
                let mut q_full = vec![0.0; n];
                for (k, &j) in cols.iter().enumerate() {
                    q_full[j] = q_sol[k].max(0.0);
                }
                let no_row_gain = (0..m).all(|i| {
                    (0..n).map(|j| payoff[i][j] * q_full[j]).sum::<f64>() <= v + slack
                });
                let no_col_gain = (0..n).all(|j| {
                    (0..m).map(|i| payoff[i][j] * p_full[i]).sum::<f64>() >= v - slack
                });
                if no_row_gain && no_col_gain {
                    return Some(v);
                }
            }
        }
    }
    None
}

/// Exact probability of reaching `target` in a finite chain, one value per
/// state: backward graph pruning finds the zero-probability states, a linear
/// solve handles the rest. Target states count one and act absorbing.
pub fn exact_reach(rows: &[Vec<(usize, f64)>], target: &[bool]) -> Vec<f64> {
    let n = rows.len();
    let mut can = target.to_vec();
    loop {
        let mut changed = false;
        for s in 0..n {
            if !can[s] && rows[s].iter().any(|&(t, p)| p > 0.0 && can[t]) {
                can[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let free: Vec<usize> = (0..n).filter(|&s| can[s] && !target[s]).collect();
    let index: HashMap<usize, usize> = free.iter().enumerate().map(|(k, &s)| (s, k)).collect();
    let k = free.len();
    let mut a = vec![vec![0.0; k]; k];
    let mut b = vec![0.0; k];
    for (eq, &s) in free.iter().enumerate() {
        a[eq][eq] += 1.0;
        for &(t, p) in &rows[s] {
            if target[t] {
                b[eq] += p;
            } else if let Some(&col) = index.get(&t) {
                a[eq][col] -= p;
            }
        }
    }
    let x = if k > 0 {
        solve_linear(a, b).expect("reachability system is non-singular after pruning")
    } else {
        Vec::new()
    };
    let mut out = vec![0.0; n];
    for s in 0..n {
        if target[s] {
            out[s] = 1.0;
        }
    }
    for (slot, &s) in free.iter().enumerate() {
        out[s] = x[slot].clamp(0.0, 1.0);
    }
    out
}

/// Chain rows of a product under a mixed defender row per state and a
/// deterministic adversary choice per state.
pub fn induced_rows(
    product: &ProductGame,
    mu: &[Vec<f64>],
    tau: &[usize],
) -> Vec<Vec<(usize, f64)>> {
    let n = product.n_states();
    (0..n)
        .map(|x| {
            let mut dense = vec![0.0; n];
            for (ud, &w) in mu[x].iter().enumerate() {
                if w > 0.0 {
                    for &(y, p) in product.successors(x, ud, tau[x]) {
                        dense[y] += w * p;
                    }
                }
            }
            dense
                .iter()
                .enumerate()
                .filter(|&(_, &p)| p > 0.0)
                .map(|(y, &p)| (y, p))
                .collect()
        })
        .collect()
}

/// Componentwise-minimal reach probabilities over every deterministic
/// stationary adversary. Fixing the defender hands the adversary a finite
/// MDP, where one stationary deterministic policy is optimal at every state
/// simultaneously, so the componentwise minimum over the enumeration equals
/// the true worst case.
pub fn worst_case_reach(product: &ProductGame, mu: &[Vec<f64>], target: &[bool]) -> Vec<f64> {
    let n = product.n_states();
    let na = product.n_adv_actions();
    let total = na.pow(n as u32);
    let mut best: Option<Vec<f64>> = None;
    for code in 0..total {
        let mut c = code;
        let tau: Vec<usize> = (0..n)
            .map(|_| {
                let a = c % na;
                c /= na;
                a
            })
            .collect();
        let reach = exact_reach(&induced_rows(product, mu, &tau), target);
        best = Some(match best {
            None => reach,
            Some(prev) => prev.iter().zip(&reach).map(|(a, b)| a.min(*b)).collect(),
        });
    }
    best.expect("at least one adversary policy")
}
