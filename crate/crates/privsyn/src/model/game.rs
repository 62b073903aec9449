//! Two-player stochastic game with simultaneous moves: a defender and an
//! adversary pick actions, and the pair determines a probability distribution
//! over successor states. Every state carries exactly one atomic proposition.

use super::{ModelError, ROW_SUM_TOL};

/// Finite two-player stochastic game. States, actions, and propositions are
/// index-based; the name vectors are metadata for printing and file exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticGame {
    n_states: usize,
    def_actions: Vec<String>,
    adv_actions: Vec<String>,
    props: Vec<String>,
    labels: Vec<usize>,
    /// One sparse row per (state, defender action, adversary action), sorted
    /// by successor index.
    rows: Vec<Vec<(usize, f64)>>,
}

impl StochasticGame {
    /// Assemble a game from explicit transition entries
    /// `(s, u_def, u_adv, s', prob)`. Omitted entries are probability zero.
    ///
    /// Rejects out-of-range indices, negative probabilities, duplicate
    /// entries, and any (state, action pair) row whose total mass is not 1
    /// within 1e-9. Rows are never renormalized.
    pub fn from_entries(
        def_actions: Vec<String>,
        adv_actions: Vec<String>,
        props: Vec<String>,
        labels: Vec<usize>,
        entries: &[(usize, usize, usize, usize, f64)],
    ) -> Result<Self, ModelError> {
        let n_states = labels.len();
        if n_states == 0 {
            return Err(ModelError::EmptyModel("game has no states".into()));
        }
        if def_actions.is_empty() || adv_actions.is_empty() {
            return Err(ModelError::EmptyModel("game has an empty action set".into()));
        }
        if props.is_empty() {
            return Err(ModelError::EmptyModel("game has no propositions".into()));
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

        let nd = def_actions.len();
        let na = adv_actions.len();
        let mut rows = vec![Vec::<(usize, f64)>::new(); n_states * nd * na];
        for &(s, ud, ua, t, p) in entries {
            if s >= n_states || t >= n_states {
                return Err(ModelError::IndexOutOfRange {
                    what: format!("state in transition ({s}, {ud}, {ua}, {t})"),
                    index: s.max(t),
                    limit: n_states,
                });
            }
            if ud >= nd {
                return Err(ModelError::IndexOutOfRange {
                    what: format!("defender action in transition from state {s}"),
                    index: ud,
                    limit: nd,
                });
            }
            if ua >= na {
                return Err(ModelError::IndexOutOfRange {
                    what: format!("adversary action in transition from state {s}"),
                    index: ua,
                    limit: na,
                });
            }
            if !(p >= 0.0) || !p.is_finite() {
                return Err(ModelError::NegativeProbability {
                    context: format!("transition ({s}, {ud}, {ua}, {t})"),
                    value: p,
                });
            }
            let row = &mut rows[(s * nd + ud) * na + ua];
            if row.iter().any(|&(u, _)| u == t) {
                return Err(ModelError::DuplicateTransition {
                    context: format!("({s}, {ud}, {ua}, {t})"),
                });
            }
            if p > 0.0 {
                row.push((t, p));
            }
        }

        for s in 0..n_states {
            for ud in 0..nd {
                for ua in 0..na {
                    let row = &mut rows[(s * nd + ud) * na + ua];
                    row.sort_unstable_by_key(|&(t, _)| t);
                    let sum: f64 = row.iter().map(|&(_, p)| p).sum();
                    if (sum - 1.0).abs() > ROW_SUM_TOL {
                        return Err(ModelError::BadDistribution {
                            context: format!(
                                "transition row (state {s}, defender {ud}, adversary {ua})"
                            ),
                            sum,
                        });
                    }
                }
            }
        }

        Ok(StochasticGame {
            n_states,
            def_actions,
            adv_actions,
            props,
            labels,
            rows,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_def_actions(&self) -> usize {
        self.def_actions.len()
    }

    pub fn n_adv_actions(&self) -> usize {
        self.adv_actions.len()
    }

    pub fn def_actions(&self) -> &[String] {
        &self.def_actions
    }

    pub fn adv_actions(&self) -> &[String] {
        &self.adv_actions
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    /// Proposition index of state `s`.
    pub fn label(&self, s: usize) -> usize {
        self.labels[s]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Sparse successor row for `(s, u_def, u_adv)`, sorted by successor.
    pub fn successors(&self, s: usize, ud: usize, ua: usize) -> &[(usize, f64)] {
        &self.rows[(s * self.def_actions.len() + ud) * self.adv_actions.len() + ua]
    }

    /// Probability of moving to `t` under `(s, u_def, u_adv)`.
    pub fn prob(&self, s: usize, ud: usize, ua: usize, t: usize) -> f64 {
        self.successors(s, ud, ua)
            .iter()
            .find(|&&(u, _)| u == t)
            .map_or(0.0, |&(_, p)| p)
    }

    /// All transition entries in `(s, u_def, u_adv, s', prob)` order, suitable
    /// for serialization.
    pub fn entries(&self) -> Vec<(usize, usize, usize, usize, f64)> {
        let mut out = Vec::new();
        for s in 0..self.n_states {
            for ud in 0..self.def_actions.len() {
                for ua in 0..self.adv_actions.len() {
                    for &(t, p) in self.successors(s, ud, ua) {
                        out.push((s, ud, ua, t, p));
                    }
                }
            }
        }
        out
    }
}
