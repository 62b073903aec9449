//! Labeled Markov chains induced by fixing both players' policies, the path
//! and word measures over them, and transient/recurrent classification.

use super::policy::MixedPolicy;
use super::product::ProductGame;
use super::scc::strongly_connected_components;
use super::{ModelError, ROW_SUM_TOL};

/// Finite labeled Markov chain. Every state carries one proposition; rows are
/// sparse and sorted by successor index.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedMarkovChain {
    props: Vec<String>,
    labels: Vec<usize>,
    rows: Vec<Vec<(usize, f64)>>,
}

impl InducedMarkovChain {
    /// Build a chain from explicit rows, validating that each row is a
    /// probability distribution (sum 1 within 1e-9, no negative entries).
    pub fn from_rows(
        props: Vec<String>,
        labels: Vec<usize>,
        rows: Vec<Vec<(usize, f64)>>,
    ) -> Result<Self, ModelError> {
        let n = labels.len();
        if n == 0 {
            return Err(ModelError::EmptyModel("chain has no states".into()));
        }
        if rows.len() != n {
            return Err(ModelError::EmptyModel(
                "chain row count differs from state count".into(),
            ));
        }
        for (s, &p) in labels.iter().enumerate() {
            if p >= props.len() {
                return Err(ModelError::IndexOutOfRange {
                    what: format!("label of state {s}"),
                    index: p,
                    limit: props.len(),
                });
            }
        }
        let mut sorted_rows = Vec::with_capacity(n);
        for (s, row) in rows.into_iter().enumerate() {
            let mut row: Vec<(usize, f64)> = row.into_iter().filter(|&(_, p)| p != 0.0).collect();
            for &(t, p) in &row {
                if t >= n {
                    return Err(ModelError::IndexOutOfRange {
                        what: format!("successor of state {s}"),
                        index: t,
                        limit: n,
                    });
                }
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(ModelError::NegativeProbability {
                        context: format!("chain row of state {s}"),
                        value: p,
                    });
                }
            }
            row.sort_unstable_by_key(|&(t, _)| t);
            if row.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(ModelError::DuplicateTransition {
                    context: format!("chain row of state {s}"),
                });
            }
            let sum: f64 = row.iter().map(|&(_, p)| p).sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(ModelError::BadDistribution {
                    context: format!("chain row of state {s}"),
                    sum,
                });
            }
            sorted_rows.push(row);
        }
        Ok(InducedMarkovChain {
            props,
            labels,
            rows: sorted_rows,
        })
    }

    pub fn n_states(&self) -> usize {
        self.labels.len()
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn label(&self, s: usize) -> usize {
        self.labels[s]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn successors(&self, s: usize) -> &[(usize, f64)] {
        &self.rows[s]
    }

    pub fn prob(&self, s: usize, t: usize) -> f64 {
        self.rows[s]
            .iter()
            .find(|&&(u, _)| u == t)
            .map_or(0.0, |&(_, p)| p)
    }
}

/// Fix a defender policy and an adversary policy on a product game, yielding
/// the Markov chain `P(x'|x) = Σ_{u_d,u_a} μ(u_d|x)·τ(u_a|x)·T(x'|x,u_d,u_a)`.
pub fn induce_chain(
    product: &ProductGame,
    mu: &MixedPolicy,
    tau: &MixedPolicy,
) -> Result<InducedMarkovChain, ModelError> {
    let n = product.n_states();
    mu.check_covers(n, product.n_def_actions())?;
    tau.check_covers(n, product.n_adv_actions())?;

    let mut rows = Vec::with_capacity(n);
    let mut dense = vec![0.0f64; n];
    for x in 0..n {
        for v in dense.iter_mut() {
            *v = 0.0;
        }
        for (ud, &pd) in mu.row(x).iter().enumerate() {
            if pd == 0.0 {
                continue;
            }
            for (ua, &pa) in tau.row(x).iter().enumerate() {
                if pa == 0.0 {
                    continue;
                }
                for &(y, p) in product.successors(x, ud, ua) {
                    dense[y] += pd * pa * p;
                }
            }
        }
        rows.push(
            dense
                .iter()
                .enumerate()
                .filter(|&(_, &p)| p > 0.0)
                .map(|(y, &p)| (y, p))
                .collect(),
        );
    }
    InducedMarkovChain::from_rows(product.props().to_vec(), product.labels().to_vec(), rows)
}

/// Probability of following `path` step by step from its first state:
/// the product of the one-step probabilities. A single-state path has
/// probability 1.
///
/// Panics when the path is empty or mentions an invalid state.
pub fn path_measure(chain: &InducedMarkovChain, path: &[usize]) -> f64 {
    assert!(!path.is_empty(), "path measure of an empty path");
    assert!(
        path.iter().all(|&s| s < chain.n_states()),
        "path mentions an out-of-range state"
    );
    path.windows(2).map(|w| chain.prob(w[0], w[1])).product()
}

/// Probability that the first `word.len()` states visited from `start` carry
/// exactly the given label sequence. The first letter is compared against
/// `start`'s own label.
///
/// Panics when the word is empty or mentions an invalid letter.
pub fn word_measure(chain: &InducedMarkovChain, start: usize, word: &[usize]) -> f64 {
    assert!(!word.is_empty(), "word measure of an empty word");
    assert!(
        word.iter().all(|&l| l < chain.props().len()),
        "word mentions an out-of-range letter"
    );
    if chain.label(start) != word[0] {
        return 0.0;
    }
    let mut weight = vec![0.0f64; chain.n_states()];
    weight[start] = 1.0;
    for &letter in &word[1..] {
        let mut next = vec![0.0f64; chain.n_states()];
        for (s, &w) in weight.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for &(t, p) in chain.successors(s) {
                if chain.label(t) == letter {
                    next[t] += w * p;
                }
            }
        }
        weight = next;
    }
    weight.iter().sum()
}

/// One communicating class of a chain: a maximal set of mutually reachable
/// states. The class is recurrent exactly when it is closed (no positive
/// probability of leaving); otherwise it is transient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommunicatingClass {
    pub states: Vec<usize>,
    pub recurrent: bool,
}

/// Partition the chain into communicating classes and tag each as transient
/// or (positive) recurrent. Classes are ordered by smallest member.
pub fn classify_states(chain: &InducedMarkovChain) -> Vec<CommunicatingClass> {
    let n = chain.n_states();
    let comps = strongly_connected_components(n, |s| {
        chain.successors(s).iter().map(|&(t, _)| t).collect()
    });
    comps
        .into_iter()
        .map(|states| {
            let inside: Vec<bool> = {
                let mut m = vec![false; n];
                for &s in &states {
                    m[s] = true;
                }
                m
            };
            let closed = states
                .iter()
                .all(|&s| chain.successors(s).iter().all(|&(t, _)| inside[t]));
            CommunicatingClass {
                states,
                recurrent: closed,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::automaton::{RabinAutomaton, RabinPair};
    use super::super::game::StochasticGame;
    use super::super::product::build_product;
    use super::*;

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn chain_of(rows: Vec<Vec<(usize, f64)>>, labels: Vec<usize>) -> InducedMarkovChain {
        let n_props = labels.iter().max().unwrap() + 1;
        let props = (0..n_props).map(|i| format!("p{i}")).collect();
        InducedMarkovChain::from_rows(props, labels, rows).unwrap()
    }

    fn small_product() -> ProductGame {
        let game = StochasticGame::from_entries(
            names(&["a", "b"]),
            names(&["x", "y"]),
            names(&["p", "q"]),
            vec![0, 1],
            &[
                (0, 0, 0, 0, 1.0),
                (0, 0, 1, 1, 1.0),
                (0, 1, 0, 0, 0.5),
                (0, 1, 0, 1, 0.5),
                (0, 1, 1, 1, 1.0),
                (1, 0, 0, 1, 1.0),
                (1, 0, 1, 1, 1.0),
                (1, 1, 0, 0, 1.0),
                (1, 1, 1, 0, 1.0),
            ],
        )
        .unwrap();
        let aut = RabinAutomaton::new(
            1,
            0,
            names(&[]),
            vec![vec![]],
            vec![Some(0)],
            vec![RabinPair::new(vec![], vec![0])],
        )
        .unwrap();
        build_product(&game, &aut).unwrap()
    }

    #[test]
    fn point_mass_policies_select_kernel_rows() {
        let prod = small_product();
        let mu = MixedPolicy::point_mass(2, 2, &[1, 0]).unwrap();
        let tau = MixedPolicy::point_mass(2, 2, &[0, 1]).unwrap();
        let chain = induce_chain(&prod, &mu, &tau).unwrap();
        assert_eq!(chain.successors(0), prod.successors(0, 1, 0));
        assert_eq!(chain.successors(1), prod.successors(1, 0, 1));
    }

    #[test]
    fn uniform_policies_average_the_four_rows() {
        let prod = small_product();
        let mu = MixedPolicy::uniform(2, 2);
        let tau = MixedPolicy::uniform(2, 2);
        let chain = induce_chain(&prod, &mu, &tau).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                let avg: f64 = (0..2)
                    .flat_map(|ud| (0..2).map(move |ua| (ud, ua)))
                    .map(|(ud, ua)| prod.prob(x, ud, ua, y))
                    .sum::<f64>()
                    / 4.0;
                assert!((chain.prob(x, y) - avg).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn mixed_policies_match_triple_loop_summation() {
        let prod = small_product();
        let mu = MixedPolicy::new(vec![vec![0.3, 0.7], vec![0.9, 0.1]]).unwrap();
        let tau = MixedPolicy::new(vec![vec![0.25, 0.75], vec![0.6, 0.4]]).unwrap();
        let chain = induce_chain(&prod, &mu, &tau).unwrap();
        for x in 0..2 {
            for y in 0..2 {
                let mut expected = 0.0;
                for ud in 0..2 {
                    for ua in 0..2 {
                        expected += mu.row(x)[ud] * tau.row(x)[ua] * prod.prob(x, ud, ua, y);
                    }
                }
                assert!((chain.prob(x, y) - expected).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn policy_not_covering_every_state_names_the_state() {
        let prod = small_product();
        let mu = MixedPolicy::new(vec![vec![1.0, 0.0]]).unwrap();
        let tau = MixedPolicy::uniform(2, 2);
        let err = induce_chain(&prod, &mu, &tau).unwrap_err();
        assert!(matches!(err, ModelError::PolicyMissingState { state: 1 }));
    }

    #[test]
    fn path_measure_multiplies_steps() {
        let chain = chain_of(
            vec![vec![(0, 0.25), (1, 0.75)], vec![(0, 1.0)]],
            vec![0, 1],
        );
        assert_eq!(path_measure(&chain, &[0]), 1.0);
        assert_eq!(path_measure(&chain, &[1, 0, 1]), 0.75);
        assert_eq!(path_measure(&chain, &[0, 0, 1, 0]), 0.25 * 0.75 * 1.0);
        // A zero-probability edge kills the whole path.
        assert_eq!(path_measure(&chain, &[1, 1, 0]), 0.0);
    }

    #[test]
    fn word_measure_trivial_cases() {
        let chain = chain_of(
            vec![vec![(0, 0.25), (1, 0.75)], vec![(0, 1.0)]],
            vec![0, 1],
        );
        assert_eq!(word_measure(&chain, 0, &[0]), 1.0);
        assert_eq!(word_measure(&chain, 0, &[1]), 0.0);
    }

    #[test]
    fn word_measure_matches_path_enumeration() {
        // 4-state chain, labels p0 p0 p1 p1.
        let chain = chain_of(
            vec![
                vec![(1, 0.5), (2, 0.5)],
                vec![(0, 0.2), (3, 0.8)],
                vec![(2, 1.0)],
                vec![(1, 0.4), (2, 0.6)],
            ],
            vec![0, 0, 1, 1],
        );
        for word in [[0, 0, 1], [0, 1, 1], [0, 1, 0], [1, 1, 1]] {
            let mut expected = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    let path = [0usize, a, b];
                    let matches = chain.label(0) == word[0]
                        && chain.label(a) == word[1]
                        && chain.label(b) == word[2];
                    if matches {
                        expected += path_measure(&chain, &path);
                    }
                }
            }
            assert!((word_measure(&chain, 0, &word) - expected).abs() <= 1e-15);
        }
    }

    #[test]
    fn word_measure_partitions_probability_by_length() {
        let chain = chain_of(
            vec![
                vec![(1, 0.5), (2, 0.5)],
                vec![(0, 0.2), (3, 0.8)],
                vec![(2, 1.0)],
                vec![(1, 0.4), (2, 0.6)],
            ],
            vec![0, 0, 1, 1],
        );
        for h in 1..=4 {
            let mut total = 0.0;
            let n_words = 2usize.pow(h as u32);
            for code in 0..n_words {
                let word: Vec<usize> = (0..h).map(|i| (code >> i) & 1).collect();
                total += word_measure(&chain, 0, &word);
            }
            assert!((total - 1.0).abs() <= 1e-12, "h={h} total={total}");
        }
    }

    #[test]
    fn identity_chain_classifies_as_singleton_recurrent() {
        let chain = chain_of(vec![vec![(0, 1.0)], vec![(1, 1.0)]], vec![0, 0]);
        let classes = classify_states(&chain);
        assert_eq!(classes.len(), 2);
        assert!(classes.iter().all(|c| c.recurrent && c.states.len() == 1));
    }

    #[test]
    fn transient_state_feeds_recurrent_sink() {
        let chain = chain_of(vec![vec![(1, 1.0)], vec![(1, 1.0)]], vec![0, 0]);
        let classes = classify_states(&chain);
        assert_eq!(
            classes,
            vec![
                CommunicatingClass { states: vec![0], recurrent: false },
                CommunicatingClass { states: vec![1], recurrent: true },
            ]
        );
    }

    #[test]
    fn cycle_with_escape_is_transient() {
        // 0 <-> 1 but 1 leaks to absorbing 2.
        let chain = chain_of(
            vec![
                vec![(1, 1.0)],
                vec![(0, 0.9), (2, 0.1)],
                vec![(2, 1.0)],
            ],
            vec![0, 0, 1],
        );
        let classes = classify_states(&chain);
        assert_eq!(classes.len(), 2);
        assert_eq!(classes[0].states, vec![0, 1]);
        assert!(!classes[0].recurrent);
        assert!(classes[1].recurrent);
    }

    #[test]
    fn classes_partition_the_state_space() {
        let chain = chain_of(
            vec![
                vec![(1, 0.5), (3, 0.5)],
                vec![(0, 1.0)],
                vec![(2, 1.0)],
                vec![(3, 0.5), (2, 0.5)],
            ],
            vec![0, 0, 0, 0],
        );
        let classes = classify_states(&chain);
        let mut seen: Vec<usize> = classes.iter().flat_map(|c| c.states.clone()).collect();
        seen.sort_unstable();
        assert_eq!(seen, vec![0, 1, 2, 3]);
    }

    #[test]
    fn bad_rows_rejected() {
        let props = names(&["p"]);
        assert!(matches!(
            InducedMarkovChain::from_rows(props.clone(), vec![0], vec![vec![(0, 0.9)]]),
            Err(ModelError::BadDistribution { .. })
        ));
        assert!(matches!(
            InducedMarkovChain::from_rows(props, vec![0], vec![vec![(0, 1.5), (0, -0.5)]]),
            Err(ModelError::NegativeProbability { .. })
        ));
    }
}
