//! The indistinguishability relation over state pairs and what it buys:
//! (ε, δ) certificates for trajectory privacy and counting of
//! differentially private alternative trajectories.
//!
//! A pair belongs to the relation when the two states carry the same label,
//! the synthesized policy treats them almost identically (total variation
//! at most M), terminal pairs are indistinguishable up to a tolerance, and
//! non-terminal pairs can step into some related successor pair. The last
//! condition is coinductive, so membership is computed as a greatest fixed
//! point: start from everything passing the local conditions and delete
//! pairs that lost their successor witness until stable.

use super::{DistanceTable, PrivacyError};
use crate::model::{AcceptingSet, InducedMarkovChain, LabeledMdp, MixedPolicy};
use std::collections::BTreeMap;

/// Symmetric relation over state pairs, stored as ordered `(s ≤ s')` keys
/// mapped to their fixed-point distance, together with the policy-closeness
/// threshold M and skew α it was built under.
#[derive(Debug, Clone)]
pub struct Relation {
    pairs: BTreeMap<(usize, usize), f64>,
    alpha: f64,
    m: f64,
    n_states: usize,
}

fn ordered(s: usize, t: usize) -> (usize, usize) {
    if s <= t {
        (s, t)
    } else {
        (t, s)
    }
}

impl Relation {
    pub fn contains(&self, s: usize, s_prime: usize) -> bool {
        self.pairs.contains_key(&ordered(s, s_prime))
    }

    /// Fixed-point distance recorded for a member pair.
    pub fn distance(&self, s: usize, s_prime: usize) -> Option<f64> {
        self.pairs.get(&ordered(s, s_prime)).copied()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Member pairs as `(s, s', distance)` with `s ≤ s'`, in key order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.pairs.iter().map(|(&(s, t), &d)| (s, t, d))
    }

    /// Number of member pairs with two distinct states.
    pub fn off_diagonal(&self) -> usize {
        self.pairs.keys().filter(|&&(s, t)| s != t).count()
    }

    /// Largest recorded distance over member pairs.
    pub fn max_distance(&self) -> Option<f64> {
        self.pairs.values().copied().fold(None, |acc, d| {
            Some(acc.map_or(d, |a: f64| a.max(d)))
        })
    }

    /// Sorted states related to `s`, including `s` itself when the diagonal
    /// pair is present.
    pub fn partners(&self, s: usize) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        for &(a, b) in self.pairs.keys() {
            if a == s {
                out.push(b);
            } else if b == s {
                out.push(a);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Sorted union of successor supports over a state's available actions.
fn successor_sets(mdp: &LabeledMdp) -> Vec<Vec<usize>> {
    (0..mdp.n_states())
        .map(|s| {
            let mut succ: Vec<usize> = mdp
                .menu(s)
                .iter()
                .flat_map(|(_, row)| row.iter().map(|&(t, _)| t))
                .collect();
            succ.sort_unstable();
            succ.dedup();
            succ
        })
        .collect()
}

/// Delete non-terminal pairs without a successor witness until stable. A
/// witness for `(s, s')` is any related pair `(u, u')` with `u` reachable
/// in one step from `s` and `u'` from `s'` under available actions.
/// Both-terminal pairs are absorbing and never deleted.
fn close_under_witnesses(
    pairs: &mut BTreeMap<(usize, usize), f64>,
    succ: &[Vec<usize>],
    e: &AcceptingSet,
) {
    loop {
        let doomed: Vec<(usize, usize)> = pairs
            .keys()
            .filter(|&&(s, t)| {
                if e.contains(s) && e.contains(t) {
                    return false;
                }
                !succ[s].iter().any(|&u| {
                    succ[t]
                        .iter()
                        .any(|&u_prime| pairs.contains_key(&ordered(u, u_prime)))
                })
            })
            .copied()
            .collect();
        if doomed.is_empty() {
            break;
        }
        for key in doomed {
            pairs.remove(&key);
        }
    }
}

/// Build the greatest relation satisfying all four membership conditions.
///
/// Pairs mixing a terminal with a non-terminal state are excluded outright:
/// the terminal side stops producing observations while the other keeps
/// going, so no successor-matching argument applies to them.
pub fn build_relation(
    mdp: &LabeledMdp,
    mu_star: &MixedPolicy,
    e: &AcceptingSet,
    alpha: f64,
    m: f64,
    dstar: &DistanceTable,
    term_tol: f64,
) -> Result<Relation, PrivacyError> {
    if !(alpha >= 1.0) {
        return Err(PrivacyError::BadAlpha { alpha });
    }
    if (alpha - dstar.alpha()).abs() > 1e-12 {
        return Err(PrivacyError::AlphaMismatch {
            expected: dstar.alpha(),
            found: alpha,
        });
    }
    if !(0.0..1.0).contains(&m) {
        return Err(PrivacyError::OutOfRange {
            what: "policy threshold M",
            value: m,
            range: "[0, 1)",
        });
    }
    if term_tol < 0.0 {
        return Err(PrivacyError::OutOfRange {
            what: "terminal tolerance",
            value: term_tol,
            range: "[0, ∞)",
        });
    }
    let n = mdp.n_states();
    if dstar.n_states() != n {
        return Err(PrivacyError::DimensionMismatch {
            what: "distance table",
            expected: n,
            found: dstar.n_states(),
        });
    }
    if mu_star.n_states() != n {
        return Err(PrivacyError::DimensionMismatch {
            what: "policy",
            expected: n,
            found: mu_star.n_states(),
        });
    }

    let labels = mdp.labels();
    let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for s in 0..n {
        for t in s..n {
            if labels[s] != labels[t] {
                continue;
            }
            if mu_star.state_tv(s, t) > m {
                continue;
            }
            let terminal = (e.contains(s), e.contains(t));
            match terminal {
                (true, true) => {
                    if dstar.get(s, t) <= term_tol {
                        pairs.insert((s, t), dstar.get(s, t));
                    }
                }
                (false, false) => {
                    pairs.insert((s, t), dstar.get(s, t));
                }
                // Mixed pairs are excluded at initialization.
                _ => {}
            }
        }
    }

    let succ = successor_sets(mdp);
    close_under_witnesses(&mut pairs, &succ, e);
    Ok(Relation {
        pairs,
        alpha,
        m,
        n_states: n,
    })
}

/// Restrict a relation to pairs whose pairwise certificate
/// `αM + d*(s, s')` meets the target δ, then re-close the successor
/// condition (pruning can strip a surviving pair of its witnesses).
///
/// Every pair of the result is certifiable at δ, so the certificate of the
/// pruned relation has `δ_min ≤ δ` whenever the relation is non-empty.
pub fn prune_to_budget(
    relation: &Relation,
    mdp: &LabeledMdp,
    e: &AcceptingSet,
    delta: f64,
) -> Relation {
    let base = relation.alpha * relation.m;
    let mut pairs: BTreeMap<(usize, usize), f64> = relation
        .pairs
        .iter()
        .filter(|&(_, &d)| base + d <= delta + 1e-15)
        .map(|(&k, &d)| (k, d))
        .collect();
    let succ = successor_sets(mdp);
    close_under_witnesses(&mut pairs, &succ, e);
    Relation {
        pairs,
        alpha: relation.alpha,
        m: relation.m,
        n_states: relation.n_states,
    }
}

/// An (ε, δ) certificate: trajectories from related start states are
/// (ε, δ)-indistinguishable for every δ at or above `delta_min`.
#[derive(Debug, Clone)]
pub struct DpCertificate {
    pub epsilon: f64,
    pub alpha: f64,
    pub m: f64,
    /// `αM` plus the largest fixed-point distance over related pairs;
    /// `None` when the relation is empty and certifies nothing.
    pub delta_min: Option<f64>,
    pub pairs: usize,
}

impl DpCertificate {
    /// Whether the certificate covers the privacy budget δ.
    pub fn valid_for(&self, delta: f64) -> bool {
        self.delta_min
            .map(|dm| delta >= dm - 1e-15)
            .unwrap_or(false)
    }
}

/// Summarize a relation into its certificate: ε = ln α and
/// `δ_min = αM + max d*` over member pairs.
pub fn dp_certificate(relation: &Relation) -> DpCertificate {
    DpCertificate {
        epsilon: relation.alpha.ln(),
        alpha: relation.alpha,
        m: relation.m,
        delta_min: relation
            .max_distance()
            .map(|d| relation.alpha * relation.m + d),
        pairs: relation.len(),
    }
}

/// Result of [`count_dp_trajectories`]: when `truncated` is set the count
/// is a lower bound reached within the node budget.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryCount {
    pub count: u64,
    pub truncated: bool,
    pub nodes: u64,
}

struct TrajectorySearch<'a> {
    chain: &'a InducedMarkovChain,
    reference: &'a [usize],
    relation: &'a Relation,
    budget: u64,
    nodes: u64,
    count: u64,
    truncated: bool,
}

impl TrajectorySearch<'_> {
    fn descend(&mut self, position: usize, state: usize) {
        if self.truncated {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.truncated = true;
            return;
        }
        if position + 1 == self.reference.len() {
            self.count += 1;
            return;
        }
        let target = self.reference[position + 1];
        for &(next, _) in self.chain.successors(state) {
            if self.relation.contains(target, next) {
                self.descend(position + 1, next);
            }
        }
    }
}

/// Count positive-probability trajectories of the reference's length whose
/// state at every position is related to the reference's state there.
/// Depth-first enumeration, pruned on relation membership and guarded by a
/// node budget.
pub fn count_dp_trajectories(
    chain: &InducedMarkovChain,
    reference: &[usize],
    relation: &Relation,
    node_budget: u64,
) -> Result<TrajectoryCount, PrivacyError> {
    if reference.is_empty() {
        return Err(PrivacyError::EmptyReference);
    }
    let n = chain.n_states();
    if relation.n_states() != n {
        return Err(PrivacyError::DimensionMismatch {
            what: "relation",
            expected: n,
            found: relation.n_states(),
        });
    }
    for &state in reference {
        if state >= n {
            return Err(PrivacyError::StateOutOfRange { state, n });
        }
    }
    for position in 1..reference.len() {
        if chain.prob(reference[position - 1], reference[position]) <= 0.0 {
            return Err(PrivacyError::ImpossibleReference { position });
        }
    }

    let mut search = TrajectorySearch {
        chain,
        reference,
        relation,
        budget: node_budget,
        nodes: 0,
        count: 0,
        truncated: false,
    };
    for start in relation.partners(reference[0]) {
        search.descend(0, start);
    }
    Ok(TrajectoryCount {
        count: search.count,
        truncated: search.truncated,
        nodes: search.nodes,
    })
}
