//! Deterministic Rabin automaton over proposition letters, with acceptance
//! pairs (L, K): a run is accepting when it visits every state of some pair's
//! L only finitely often and some state of that pair's K infinitely often.

use super::ModelError;

/// One Rabin acceptance pair. State lists are kept sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RabinPair {
    pub l_states: Vec<usize>,
    pub k_states: Vec<usize>,
}

impl RabinPair {
    pub fn new(mut l_states: Vec<usize>, mut k_states: Vec<usize>) -> Self {
        l_states.sort_unstable();
        l_states.dedup();
        k_states.sort_unstable();
        k_states.dedup();
        RabinPair { l_states, k_states }
    }
}

/// Deterministic Rabin automaton. Letters are named; each automaton state may
/// additionally carry a wildcard successor used for any letter without an
/// explicit step, which lets a small automaton run over a larger proposition
/// set than it names (extra letters behave like "anything else").
#[derive(Debug, Clone, PartialEq)]
pub struct RabinAutomaton {
    n_states: usize,
    initial: usize,
    letters: Vec<String>,
    /// `delta[q][letter]` explicit successor, if declared.
    delta: Vec<Vec<Option<usize>>>,
    /// Per-state wildcard successor.
    fallback: Vec<Option<usize>>,
    pairs: Vec<RabinPair>,
}

impl RabinAutomaton {
    /// Build and validate an automaton. The step relation must be total:
    /// every `(state, letter)` needs an explicit successor or a wildcard on
    /// that state. The pair list must be non-empty.
    pub fn new(
        n_states: usize,
        initial: usize,
        letters: Vec<String>,
        delta: Vec<Vec<Option<usize>>>,
        fallback: Vec<Option<usize>>,
        pairs: Vec<RabinPair>,
    ) -> Result<Self, ModelError> {
        if n_states == 0 {
            return Err(ModelError::EmptyModel("automaton has no states".into()));
        }
        if initial >= n_states {
            return Err(ModelError::IndexOutOfRange {
                what: "automaton initial state".into(),
                index: initial,
                limit: n_states,
            });
        }
        if delta.len() != n_states || fallback.len() != n_states {
            return Err(ModelError::EmptyModel(
                "automaton step table does not cover every state".into(),
            ));
        }
        for (q, row) in delta.iter().enumerate() {
            if row.len() != letters.len() {
                return Err(ModelError::EmptyModel(format!(
                    "automaton step row for state {q} does not cover every letter"
                )));
            }
            for (l, target) in row.iter().enumerate() {
                match target.or(fallback[q]) {
                    None => {
                        return Err(ModelError::NonTotalStep {
                            state: q,
                            letter: letters[l].clone(),
                        })
                    }
                    Some(t) if t >= n_states => {
                        return Err(ModelError::IndexOutOfRange {
                            what: format!("automaton step from state {q} on `{}`", letters[l]),
                            index: t,
                            limit: n_states,
                        })
                    }
                    Some(_) => {}
                }
            }
        }
        for (q, target) in fallback.iter().enumerate() {
            if let Some(t) = target {
                if *t >= n_states {
                    return Err(ModelError::IndexOutOfRange {
                        what: format!("automaton wildcard step from state {q}"),
                        index: *t,
                        limit: n_states,
                    });
                }
            }
        }
        if pairs.is_empty() {
            return Err(ModelError::EmptyPairs);
        }
        for (i, pair) in pairs.iter().enumerate() {
            for &q in pair.l_states.iter().chain(&pair.k_states) {
                if q >= n_states {
                    return Err(ModelError::IndexOutOfRange {
                        what: format!("state in acceptance pair {i}"),
                        index: q,
                        limit: n_states,
                    });
                }
            }
        }
        Ok(RabinAutomaton {
            n_states,
            initial,
            letters,
            delta,
            fallback,
            pairs,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn letters(&self) -> &[String] {
        &self.letters
    }

    pub fn pairs(&self) -> &[RabinPair] {
        &self.pairs
    }

    pub fn letter_index(&self, name: &str) -> Option<usize> {
        self.letters.iter().position(|l| l == name)
    }

    /// Explicit successor for a named letter, if declared (wildcard excluded).
    pub fn explicit_step(&self, q: usize, letter: usize) -> Option<usize> {
        self.delta[q][letter]
    }

    pub fn wildcard(&self, q: usize) -> Option<usize> {
        self.fallback[q]
    }

    /// Successor of `q` on a letter named by the automaton. Totality is
    /// checked at construction, so this cannot fail for valid indices.
    pub fn step(&self, q: usize, letter: usize) -> usize {
        self.delta[q][letter]
            .or(self.fallback[q])
            .expect("step totality violated despite construction-time check")
    }

    /// Successor of `q` on an external letter name, using the wildcard for
    /// names the automaton does not declare. Errors when the name is unknown
    /// and `q` has no wildcard.
    pub fn step_named(&self, q: usize, name: &str) -> Result<usize, ModelError> {
        match self.letter_index(name) {
            Some(l) => Ok(self.step(q, l)),
            None => self.fallback[q].ok_or_else(|| ModelError::AlphabetMismatch {
                label: name.to_string(),
            }),
        }
    }

    /// Run the automaton from its initial state over a word of letter names,
    /// returning the visited states including the initial one.
    pub fn run_named(&self, word: &[&str]) -> Result<Vec<usize>, ModelError> {
        let mut states = Vec::with_capacity(word.len() + 1);
        let mut q = self.initial;
        states.push(q);
        for name in word {
            q = self.step_named(q, name)?;
            states.push(q);
        }
        Ok(states)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(xs: &[&str]) -> Vec<String> {
        xs.iter().map(|s| s.to_string()).collect()
    }

    fn two_state() -> RabinAutomaton {
        // On `a` go to state 1, anything else back to 0; state 1 mirrors.
        RabinAutomaton::new(
            2,
            0,
            names(&["a"]),
            vec![vec![Some(1)], vec![Some(1)]],
            vec![Some(0), Some(0)],
            vec![RabinPair::new(vec![], vec![1])],
        )
        .unwrap()
    }

    #[test]
    fn step_prefers_explicit_over_wildcard() {
        let aut = two_state();
        assert_eq!(aut.step(0, 0), 1);
        assert_eq!(aut.step_named(0, "a").unwrap(), 1);
        assert_eq!(aut.step_named(0, "anything").unwrap(), 0);
    }

    #[test]
    fn run_collects_visited_states() {
        let aut = two_state();
        let run = aut.run_named(&["b", "a", "a", "b"]).unwrap();
        assert_eq!(run, vec![0, 0, 1, 1, 0]);
    }

    #[test]
    fn unknown_letter_without_wildcard_is_an_error() {
        let aut = RabinAutomaton::new(
            1,
            0,
            names(&["a"]),
            vec![vec![Some(0)]],
            vec![None],
            vec![RabinPair::new(vec![], vec![0])],
        )
        .unwrap();
        let err = aut.step_named(0, "b").unwrap_err();
        assert!(matches!(err, ModelError::AlphabetMismatch { label } if label == "b"));
    }

    #[test]
    fn missing_step_without_wildcard_rejected() {
        let err = RabinAutomaton::new(
            2,
            0,
            names(&["a", "b"]),
            vec![vec![Some(1), None], vec![Some(1), Some(0)]],
            vec![None, None],
            vec![RabinPair::new(vec![], vec![1])],
        )
        .unwrap_err();
        assert!(
            matches!(err, ModelError::NonTotalStep { state: 0, ref letter } if letter == "b"),
            "{err:?}"
        );
    }

    #[test]
    fn empty_pair_list_rejected() {
        let err = RabinAutomaton::new(
            1,
            0,
            names(&["a"]),
            vec![vec![Some(0)]],
            vec![None],
            vec![],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::EmptyPairs));
    }

    #[test]
    fn pair_lists_are_sorted_and_deduplicated() {
        let pair = RabinPair::new(vec![3, 1, 3], vec![2, 2, 0]);
        assert_eq!(pair.l_states, vec![1, 3]);
        assert_eq!(pair.k_states, vec![0, 2]);
    }

    #[test]
    fn out_of_range_pair_state_rejected() {
        let err = RabinAutomaton::new(
            1,
            0,
            names(&["a"]),
            vec![vec![Some(0)]],
            vec![None],
            vec![RabinPair::new(vec![5], vec![0])],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::IndexOutOfRange { .. }));
    }
}
