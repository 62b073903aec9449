//! Stationary mixed policies: one probability vector over the acting
//! player's actions per state.

use super::{ModelError, ROW_SUM_TOL};

/// Probability mass below this threshold is treated as numerically zero when
/// extracting a policy's support.
pub const SUPPORT_EPS: f64 = 1e-12;

/// Stationary mixed policy. Row `s` is the action distribution played in
/// state `s`; every row must have the same length (the player's action
/// count).
#[derive(Debug, Clone, PartialEq)]
pub struct MixedPolicy {
    rows: Vec<Vec<f64>>,
}

impl MixedPolicy {
    /// Validate and wrap per-state action distributions: equal lengths,
    /// non-negative entries, each row summing to 1 within 1e-9.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        if rows.is_empty() {
            return Err(ModelError::EmptyModel("policy has no states".into()));
        }
        let width = rows[0].len();
        for (s, row) in rows.iter().enumerate() {
            if row.is_empty() || row.len() != width {
                return Err(ModelError::PolicyMissingState { state: s });
            }
            for &p in row {
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(ModelError::NegativeProbability {
                        context: format!("policy row of state {s}"),
                        value: p,
                    });
                }
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(ModelError::BadDistribution {
                    context: format!("policy row of state {s}"),
                    sum,
                });
            }
        }
        Ok(MixedPolicy { rows })
    }

    /// Deterministic policy choosing `picks[s]` in state `s`.
    pub fn point_mass(
        n_states: usize,
        n_actions: usize,
        picks: &[usize],
    ) -> Result<Self, ModelError> {
        if picks.len() != n_states {
            return Err(ModelError::PolicyMissingState {
                state: picks.len().min(n_states),
            });
        }
        let mut rows = vec![vec![0.0; n_actions]; n_states];
        for (s, &a) in picks.iter().enumerate() {
            if a >= n_actions {
                return Err(ModelError::IndexOutOfRange {
                    what: format!("action picked in state {s}"),
                    index: a,
                    limit: n_actions,
                });
            }
            rows[s][a] = 1.0;
        }
        Ok(MixedPolicy { rows })
    }

    /// Uniform mixing over all actions in every state.
    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        assert!(n_states > 0 && n_actions > 0, "empty uniform policy");
        MixedPolicy {
            rows: vec![vec![1.0 / n_actions as f64; n_actions]; n_states],
        }
    }

    pub fn n_states(&self) -> usize {
        self.rows.len()
    }

    pub fn n_actions(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.rows[s]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Actions carrying more than [`SUPPORT_EPS`] mass in state `s`.
    pub fn support(&self, s: usize) -> Vec<usize> {
        self.rows[s]
            .iter()
            .enumerate()
            .filter(|&(_, &p)| p > SUPPORT_EPS)
            .map(|(a, _)| a)
            .collect()
    }

    /// Check the policy covers exactly `n_states` states with `n_actions`
    /// actions each, naming the first uncovered state otherwise.
    pub fn check_covers(&self, n_states: usize, n_actions: usize) -> Result<(), ModelError> {
        if self.rows.len() < n_states {
            return Err(ModelError::PolicyMissingState {
                state: self.rows.len(),
            });
        }
        if self.rows.len() > n_states || self.n_actions() != n_actions {
            return Err(ModelError::EmptyModel(format!(
                "policy shape {}x{} does not match model shape {}x{}",
                self.rows.len(),
                self.n_actions(),
                n_states,
                n_actions
            )));
        }
        Ok(())
    }

    /// Total variation distance between the action distributions at `s` in
    /// `self` and `other`: half the L1 difference over the shared action
    /// index.
    pub fn action_tv(&self, other: &MixedPolicy, s: usize) -> f64 {
        0.5 * self
            .row(s)
            .iter()
            .zip(other.row(s))
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }

    /// Total variation distance between this policy's action distributions
    /// at two states, over the shared action index.
    pub fn state_tv(&self, s: usize, s_prime: usize) -> f64 {
        0.5 * self
            .row(s)
            .iter()
            .zip(self.row(s_prime))
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}
