//! Labeled Markov decision process with per-state action menus. This is the
//! eavesdropper-side view of a synthesized system: the defender's surviving
//! action choices remain visible, the adversary is folded into the kernel.

use super::chain::InducedMarkovChain;
use super::policy::MixedPolicy;
use super::product::ProductGame;
use super::{ModelError, ROW_SUM_TOL};

/// Labeled MDP. Actions have global identities (indices into a shared name
/// list) but each state offers only a subset `A(s)`; kernels are stored per
/// available action as sparse sorted rows.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMdp {
    action_names: Vec<String>,
    props: Vec<String>,
    labels: Vec<usize>,
    /// Per state: `(action id, successor row)` entries sorted by action id.
    choices: Vec<Vec<(usize, Vec<(usize, f64)>)>>,
}

impl LabeledMdp {
    /// Build and validate an MDP from explicit per-state action menus. Every
    /// state needs at least one action; every row must be a distribution.
    pub fn new(
        action_names: Vec<String>,
        props: Vec<String>,
        labels: Vec<usize>,
        choices: Vec<Vec<(usize, Vec<(usize, f64)>)>>,
    ) -> Result<Self, ModelError> {
        let n = labels.len();
        if n == 0 {
            return Err(ModelError::EmptyModel("mdp has no states".into()));
        }
        if choices.len() != n {
            return Err(ModelError::EmptyModel(
                "mdp action table does not cover every state".into(),
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
        let mut sorted = Vec::with_capacity(n);
        for (s, menu) in choices.into_iter().enumerate() {
            if menu.is_empty() {
                return Err(ModelError::EmptyModel(format!(
                    "state {s} has an empty action menu"
                )));
            }
            let mut menu = menu;
            menu.sort_by_key(|&(a, _)| a);
            if menu.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(ModelError::DuplicateTransition {
                    context: format!("action menu of state {s}"),
                });
            }
            let mut checked = Vec::with_capacity(menu.len());
            for (a, mut row) in menu {
                if a >= action_names.len() {
                    return Err(ModelError::IndexOutOfRange {
                        what: format!("action id in state {s}"),
                        index: a,
                        limit: action_names.len(),
                    });
                }
                row.retain(|&(_, p)| p != 0.0);
                for &(t, p) in &row {
                    if t >= n {
                        return Err(ModelError::IndexOutOfRange {
                            what: format!("successor of state {s} under action {a}"),
                            index: t,
                            limit: n,
                        });
                    }
                    if !(p >= 0.0) || !p.is_finite() {
                        return Err(ModelError::NegativeProbability {
                            context: format!("kernel row ({s}, action {a})"),
                            value: p,
                        });
                    }
                }
                row.sort_unstable_by_key(|&(t, _)| t);
                if row.windows(2).any(|w| w[0].0 == w[1].0) {
                    return Err(ModelError::DuplicateTransition {
                        context: format!("kernel row ({s}, action {a})"),
                    });
                }
                let sum: f64 = row.iter().map(|&(_, p)| p).sum();
                if (sum - 1.0).abs() > ROW_SUM_TOL {
                    return Err(ModelError::BadDistribution {
                        context: format!("kernel row ({s}, action {a})"),
                        sum,
                    });
                }
                checked.push((a, row));
            }
            sorted.push(checked);
        }
        Ok(LabeledMdp {
            action_names,
            props,
            labels,
            choices: sorted,
        })
    }

    /// Eavesdropper-side MDP of a synthesized product: each state offers the
    /// support of the defender policy, and each kernel row marginalizes the
    /// adversary out under `tau`:
    /// `P(x'|x, u_d) = Σ_{u_a} τ(u_a|x)·T(x'|x, u_d, u_a)`.
    pub fn from_product_policy(
        product: &ProductGame,
        mu: &MixedPolicy,
        tau: &MixedPolicy,
    ) -> Result<Self, ModelError> {
        let n = product.n_states();
        mu.check_covers(n, product.n_def_actions())?;
        tau.check_covers(n, product.n_adv_actions())?;
        let mut choices = Vec::with_capacity(n);
        let mut dense = vec![0.0f64; n];
        for x in 0..n {
            let mut menu = Vec::new();
            for ud in mu.support(x) {
                for v in dense.iter_mut() {
                    *v = 0.0;
                }
                for (ua, &pa) in tau.row(x).iter().enumerate() {
                    if pa == 0.0 {
                        continue;
                    }
                    for &(y, p) in product.successors(x, ud, ua) {
                        dense[y] += pa * p;
                    }
                }
                let row: Vec<(usize, f64)> = dense
                    .iter()
                    .enumerate()
                    .filter(|&(_, &p)| p > 0.0)
                    .map(|(y, &p)| (y, p))
                    .collect();
                menu.push((ud, row));
            }
            choices.push(menu);
        }
        LabeledMdp::new(
            product.def_actions().to_vec(),
            product.props().to_vec(),
            product.labels().to_vec(),
            choices,
        )
    }

    /// View a Markov chain as a one-action MDP (action id 0 everywhere).
    pub fn from_chain(chain: &InducedMarkovChain) -> Self {
        let choices = (0..chain.n_states())
            .map(|s| vec![(0usize, chain.successors(s).to_vec())])
            .collect();
        LabeledMdp::new(
            vec!["step".to_string()],
            chain.props().to_vec(),
            chain.labels().to_vec(),
            choices,
        )
        .expect("a valid chain always forms a valid one-action mdp")
    }

    pub fn n_states(&self) -> usize {
        self.labels.len()
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn action_names(&self) -> &[String] {
        &self.action_names
    }

    pub fn label(&self, s: usize) -> usize {
        self.labels[s]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Available actions at `s`, ascending.
    pub fn available(&self, s: usize) -> Vec<usize> {
        self.choices[s].iter().map(|&(a, _)| a).collect()
    }

    /// Menu of `(action id, kernel row)` pairs at `s`.
    pub fn menu(&self, s: usize) -> &[(usize, Vec<(usize, f64)>)] {
        &self.choices[s]
    }

    /// Kernel row for an action id, when that action is available at `s`.
    pub fn row(&self, s: usize, action: usize) -> Option<&[(usize, f64)]> {
        self.choices[s]
            .iter()
            .find(|&&(a, _)| a == action)
            .map(|(_, row)| row.as_slice())
    }

    pub fn prob(&self, s: usize, action: usize, t: usize) -> f64 {
        self.row(s, action)
            .and_then(|row| row.iter().find(|&&(u, _)| u == t))
            .map_or(0.0, |&(_, p)| p)
    }
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

    fn product_2x2() -> ProductGame {
        let game = StochasticGame::from_entries(
            names(&["a", "b"]),
            names(&["x", "y"]),
            names(&["p", "q"]),
            vec![0, 1],
            &[
                (0, 0, 0, 0, 0.5),
                (0, 0, 0, 1, 0.5),
                (0, 0, 1, 1, 1.0),
                (0, 1, 0, 0, 1.0),
                (0, 1, 1, 0, 1.0),
                (1, 0, 0, 1, 1.0),
                (1, 0, 1, 0, 1.0),
                (1, 1, 0, 1, 1.0),
                (1, 1, 1, 1, 1.0),
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
    fn restriction_keeps_only_supported_actions() {
        let prod = product_2x2();
        let mu = MixedPolicy::new(vec![vec![1.0, 0.0], vec![0.4, 0.6]]).unwrap();
        let tau = MixedPolicy::point_mass(2, 2, &[0, 0]).unwrap();
        let mdp = LabeledMdp::from_product_policy(&prod, &mu, &tau).unwrap();
        assert_eq!(mdp.available(0), vec![0]);
        assert_eq!(mdp.available(1), vec![0, 1]);
        assert_eq!(mdp.row(0, 1), None);
    }

    #[test]
    fn adversary_is_marginalized_per_action() {
        let prod = product_2x2();
        let mu = MixedPolicy::uniform(2, 2);
        let tau = MixedPolicy::new(vec![vec![0.3, 0.7], vec![1.0, 0.0]]).unwrap();
        let mdp = LabeledMdp::from_product_policy(&prod, &mu, &tau).unwrap();
        // State 0, defender action a: 0.3·(0.5, 0.5) + 0.7·(0, 1).
        assert!((mdp.prob(0, 0, 0) - 0.15).abs() < 1e-15);
        assert!((mdp.prob(0, 0, 1) - 0.85).abs() < 1e-15);
        // State 1, adversary plays x deterministically.
        assert_eq!(mdp.row(1, 0).unwrap(), &[(1, 1.0)]);
    }

    #[test]
    fn chain_view_has_single_action() {
        let chain = InducedMarkovChain::from_rows(
            names(&["p"]),
            vec![0, 0],
            vec![vec![(1, 1.0)], vec![(0, 0.5), (1, 0.5)]],
        )
        .unwrap();
        let mdp = LabeledMdp::from_chain(&chain);
        assert_eq!(mdp.available(0), vec![0]);
        assert_eq!(mdp.row(1, 0).unwrap(), chain.successors(1));
    }

    #[test]
    fn empty_menu_rejected() {
        let err = LabeledMdp::new(
            names(&["a"]),
            names(&["p"]),
            vec![0, 0],
            vec![vec![(0, vec![(0, 1.0)])], vec![]],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::EmptyModel(_)));
    }

    #[test]
    fn bad_kernel_row_rejected() {
        let err = LabeledMdp::new(
            names(&["a"]),
            names(&["p"]),
            vec![0],
            vec![vec![(0, vec![(0, 0.7)])]],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::BadDistribution { .. }));
    }

    #[test]
    fn duplicate_action_rejected() {
        let err = LabeledMdp::new(
            names(&["a"]),
            names(&["p"]),
            vec![0],
            vec![vec![(0, vec![(0, 1.0)]), (0, vec![(0, 1.0)])]],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::DuplicateTransition { .. }));
    }
}
