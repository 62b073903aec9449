//! Defender policy synthesis on stochastic games with LTL objectives, and
//! differential-privacy certification of the trajectories the synthesized
//! policy produces.
//!
//! The pipeline: build a two-player stochastic game (or a grid world),
//! compose it with a Rabin automaton for the objective, compute the
//! accepting set, run Stackelberg value iteration for the defender policy
//! maximizing the satisfaction probability against any adversary, then
//! measure how distinguishable same-labeled states remain to a
//! label-observing eavesdropper via skewed Kantorovich distances, and turn
//! the resulting relation into (ε, δ) certificates and counts of private
//! alternative trajectories.

pub mod cli;
pub mod formats;
pub mod gridworld;
pub mod lp;
pub mod ltl;
pub mod model;
pub mod privacy;
pub mod sim;
pub mod synthesis;

pub use formats::{load_dra, FormatError, SweepRow};
pub use gridworld::{build_grid, demo_ten_by_ten, GridError, GridSpec};
pub use lp::{solve, solve_matrix_game, LinearProgram, LpSolution, LpStatus, MatrixGameSolution};
pub use model::{
    accepting_states, build_product, classify_states, induce_chain, path_measure, word_measure,
    AcceptingSet, InducedMarkovChain, LabeledMdp, MixedPolicy, ModelError, ProductGame,
    RabinAutomaton, RabinPair, StochasticGame,
};
pub use ltl::{
    dra_accepts_lasso, dra_from_template, eval_ltl_on_lasso, parse_ltl, LassoWord, LtlError,
    LtlFormula,
};
pub use privacy::{
    build_relation, count_dp_trajectories, delta_alpha, dp_certificate, empirical_tv_alpha,
    f_tv_fixpoint, f_tv_fixpoint_with, f_tv_step, f_tv_step_with_mode, prune_to_budget,
    skewed_kantorovich, value_gap_check, DistanceTable, DpCertificate, FixpointOptions,
    FixpointOutcome, GapReport, KantorovichMode, PrivacyError, Relation, TrajectoryCount,
};
pub use sim::{rollout, sample_path, simulate_satisfaction, RolloutReport};
pub use synthesis::{
    bellman_values_truncated, bellman_values_under_policy, best_response_adversary,
    reach_probability, stackelberg_value_iteration, SynthesisOutcome, ValueIterationOutcome,
    ValueTable,
};
