//! Domain types for attack-resilient synthesis: stochastic games, Rabin
//! automata, their product, induced Markov chains, labeled MDPs, and mixed
//! policies, plus the structural operations connecting them (product
//! construction, chain induction, state classification, accepting-set
//! detection, path and word measures).
//!
//! All types are immutable after construction and all operations are pure,
//! so everything here is safe to share across threads.

mod automaton;
mod chain;
mod game;
mod mdp;
mod policy;
mod product;
mod scc;

pub use automaton::{RabinAutomaton, RabinPair};
pub use chain::{
    classify_states, induce_chain, path_measure, word_measure, CommunicatingClass,
    InducedMarkovChain,
};
pub use game::StochasticGame;
pub use mdp::LabeledMdp;
pub use policy::{MixedPolicy, SUPPORT_EPS};
pub use product::{accepting_states, build_product, AcceptingSet, ProductGame};

use thiserror::Error;

/// Tolerance for probability-row sums; rows outside it are rejected, never
/// renormalized, because silent renormalization hides modeling bugs.
pub const ROW_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("{context} sums to {sum}, expected 1 within 1e-9")]
    BadDistribution { context: String, sum: f64 },
    #[error("{context} has invalid probability {value}")]
    NegativeProbability { context: String, value: f64 },
    #[error("{what} is {index}, outside 0..{limit}")]
    IndexOutOfRange {
        what: String,
        index: usize,
        limit: usize,
    },
    #[error("duplicate transition entry {context}")]
    DuplicateTransition { context: String },
    #[error("state label `{label}` is not in the automaton alphabet and no wildcard step covers it")]
    AlphabetMismatch { label: String },
    #[error("automaton step is not total: state {state} has no step on `{letter}`")]
    NonTotalStep { state: usize, letter: String },
    #[error("automaton has an empty acceptance-pair list")]
    EmptyPairs,
    #[error("policy does not cover state {state}")]
    PolicyMissingState { state: usize },
    #[error("{0}")]
    EmptyModel(String),
}
