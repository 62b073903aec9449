//! Command-line front end: argument parsing for the `synth`, `privacy`,
//! `sweep`, `simulate`, and `validate-formats` subcommands, the files each
//! command writes, and the exit-code policy.
//!
//! Exit codes: 0 on success, 2 on any input or configuration error, 3 when a
//! node budget truncated a trajectory count (outputs are still written; the
//! affected counts are lower bounds).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::formats::{
    check_policy_syntax, load_accepting, load_certificate, load_dra, load_game, load_grid_spec,
    load_relation_pairs, load_sweep, load_values, save_accepting, save_certificate,
    save_distances, save_policy, save_relation, save_sweep, save_values, FormatError, SweepRow,
};
use crate::gridworld::{build_grid, GridError};
use crate::ltl::{dra_from_template, parse_ltl, LtlError};
use crate::model::{
    accepting_states, build_product, induce_chain, AcceptingSet, LabeledMdp, ModelError,
    ProductGame, RabinAutomaton, StochasticGame,
};
use crate::privacy::{
    build_relation, count_dp_trajectories, dp_certificate, f_tv_fixpoint_with, prune_to_budget,
    FixpointOptions, KantorovichMode, PrivacyError,
};
use crate::sim::{sample_path, simulate_satisfaction};
use crate::synthesis::{best_response_adversary, stackelberg_value_iteration, SynthesisOutcome};

/// Simulation estimates this far below the synthesized value trigger a
/// horizon warning.
const SIM_GAP_WARN: f64 = 0.05;

/// Everything the tool reads from the command line.
#[derive(Debug, Parser)]
#[command(
    name = "privsyn",
    version,
    about = "Defender policy synthesis on stochastic games with trajectory-privacy certification"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize the defender policy maximizing objective satisfaction.
    Synth(SynthArgs),
    /// Build distance tables, relations, and (epsilon, delta) certificates.
    Privacy(PrivacyArgs),
    /// Count private trajectories over an (epsilon, delta) grid.
    Sweep(SweepArgs),
    /// Monte Carlo cross-check of the synthesized value.
    Simulate(SimulateArgs),
    /// Parse and validate artifact files without running anything.
    ValidateFormats(ValidateArgs),
}

/// Model and objective inputs shared by every analysis subcommand.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// Grid spec file; the game is built from it.
    #[arg(long, value_name = "FILE", conflicts_with = "game")]
    pub grid: Option<PathBuf>,
    /// Game file.
    #[arg(long, value_name = "FILE")]
    pub game: Option<PathBuf>,
    /// Objective formula for a template automaton, e.g. "GF tar & G !obs".
    #[arg(long, value_name = "LTL", conflicts_with = "automaton")]
    pub formula: Option<String>,
    /// Rabin automaton file for the objective.
    #[arg(long, value_name = "FILE")]
    pub automaton: Option<PathBuf>,
    /// Start state index (for grids: cell x + width*y).
    #[arg(long, default_value_t = 0)]
    pub start: usize,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Convergence tolerance for value and distance iterations.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Iteration cap for value and distance iterations.
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Directory for output files (created if absent).
    #[arg(long, value_name = "DIR", default_value = "out")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct PrivacyArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[command(flatten)]
    pub out: OutArgs,
    /// Privacy levels to certify; one certificate per value.
    #[arg(long = "epsilon", value_delimiter = ',', default_values_t = [1.0])]
    pub epsilon: Vec<f64>,
    /// Optional budget: prune the relation to pairs certifiable within it.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Policy-closeness bound M; defaults to delta / (2 alpha) when --delta
    /// is given, else 0.01 / alpha.
    #[arg(long, value_name = "M")]
    pub policy_closeness: Option<f64>,
    /// Distance cap: entries proven to exceed it are reported as 1, which
    /// keeps certificates sound and skips work on pairs beyond any budget.
    /// Defaults to the distance budget delta - alpha*M when --delta is
    /// given, else 0.5. Pass 1 to disable.
    #[arg(long)]
    pub cap: Option<f64>,
    /// Distance tolerance for pairs of terminal states.
    #[arg(long, default_value_t = 1e-9)]
    pub term_tol: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    #[command(flatten)]
    pub out: OutArgs,
    /// Epsilon axis of the sweep.
    #[arg(long = "epsilon", value_delimiter = ',', default_values_t = [0.1, 0.5, 1.0, 2.0])]
    pub epsilon: Vec<f64>,
    /// Delta axis of the sweep.
    #[arg(long = "delta", value_delimiter = ',', default_values_t = [1e-5, 1e-4, 1e-3, 1e-2])]
    pub delta: Vec<f64>,
    /// Fixed policy-closeness bound M; defaults to delta / (2 alpha) per cell.
    #[arg(long, value_name = "M")]
    pub policy_closeness: Option<f64>,
    /// Distance tolerance for pairs of terminal states.
    #[arg(long, default_value_t = 1e-9)]
    pub term_tol: f64,
    /// Length of the reference trajectory, in steps.
    #[arg(long, default_value_t = 200)]
    pub horizon: usize,
    /// Search-node budget per trajectory count.
    #[arg(long, default_value_t = 1_000_000)]
    pub node_budget: u64,
    /// Seed for the reference trajectory.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub solve: SolveArgs,
    /// Number of Monte Carlo rollouts.
    #[arg(long, default_value_t = 10_000)]
    pub rollouts: usize,
    /// Rollout length, in steps.
    #[arg(long, default_value_t = 200)]
    pub horizon: usize,
    /// Seed for the rollouts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Game files.
    #[arg(long, value_name = "FILE")]
    pub game: Vec<PathBuf>,
    /// Grid spec files.
    #[arg(long, value_name = "FILE")]
    pub grid: Vec<PathBuf>,
    /// Automaton files.
    #[arg(long, value_name = "FILE")]
    pub automaton: Vec<PathBuf>,
    /// Value CSVs.
    #[arg(long, value_name = "FILE")]
    pub values: Vec<PathBuf>,
    /// Policy files (syntax only; coverage needs the model).
    #[arg(long, value_name = "FILE")]
    pub policy: Vec<PathBuf>,
    /// Accepting-set listings.
    #[arg(long, value_name = "FILE")]
    pub accepting: Vec<PathBuf>,
    /// Relation or distance-table files.
    #[arg(long, value_name = "FILE")]
    pub relation: Vec<PathBuf>,
    /// Certificate files.
    #[arg(long, value_name = "FILE")]
    pub certificate: Vec<PathBuf>,
    /// Sweep CSVs.
    #[arg(long, value_name = "FILE")]
    pub sweep: Vec<PathBuf>,
}

/// Errors any subcommand can surface; all map to exit code 2.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Privacy(#[from] PrivacyError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

fn usage<T>(message: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(message.into()))
}

/// A loaded model-and-objective instance, ready for analysis.
struct Instance {
    game: StochasticGame,
    product: ProductGame,
    e: AcceptingSet,
    /// Product start: the game start paired with the automaton state reached
    /// on the start state's label.
    x0: usize,
}

fn load_instance(input: &InputArgs) -> Result<Instance, CliError> {
    let game = match (&input.grid, &input.game) {
        (Some(path), None) => build_grid(&load_grid_spec(path)?)?,
        (None, Some(path)) => load_game(path)?,
        _ => return usage("exactly one of --grid or --game is required"),
    };
    let aut: RabinAutomaton = match (&input.formula, &input.automaton) {
        (Some(text), None) => dra_from_template(&parse_ltl(text)?)?,
        (None, Some(path)) => load_dra(path)?,
        _ => return usage("exactly one of --formula or --automaton is required"),
    };
    if input.start >= game.n_states() {
        return usage(format!(
            "start state {} out of range ({} game states)",
            input.start,
            game.n_states()
        ));
    }
    let product = build_product(&game, &aut)?;
    let e = accepting_states(&product);
    let q = aut.step_named(aut.initial(), &game.props()[game.label(input.start)])?;
    let x0 = product.state_index(input.start, q);
    Ok(Instance {
        game,
        product,
        e,
        x0,
    })
}

fn synthesize(input: &InputArgs, solve: &SolveArgs) -> Result<(Instance, SynthesisOutcome), CliError> {
    if !(solve.tol > 0.0) {
        return usage(format!("tolerance must be positive, got {}", solve.tol));
    }
    let instance = load_instance(input)?;
    let outcome =
        stackelberg_value_iteration(&instance.product, &instance.e, solve.tol, solve.max_iter);
    if !outcome.converged {
        eprintln!("warning: value iteration hit the iteration cap before reaching tolerance");
    }
    Ok((instance, outcome))
}

/// The eavesdropper-side view of a synthesized instance: adversary best
/// response, marginalized MDP, and induced chain.
fn eavesdropper_view(
    instance: &Instance,
    outcome: &SynthesisOutcome,
) -> Result<(LabeledMdp, crate::model::InducedMarkovChain), CliError> {
    let tau = best_response_adversary(&instance.product, &outcome.policy, &instance.e);
    let mdp = LabeledMdp::from_product_policy(&instance.product, &outcome.policy, &tau)?;
    let chain = induce_chain(&instance.product, &outcome.policy, &tau)?;
    Ok((mdp, chain))
}

fn cmd_synth(args: &SynthArgs) -> Result<ExitCode, CliError> {
    let (instance, outcome) = synthesize(&args.input, &args.solve)?;
    fs::create_dir_all(&args.out.out_dir)?;
    save_values(args.out.out_dir.join("values.csv"), &outcome.values)?;
    save_policy(
        args.out.out_dir.join("policy.txt"),
        &outcome.policy,
        instance.game.def_actions(),
    )?;
    save_accepting(args.out.out_dir.join("accepting.txt"), &instance.e)?;
    if instance.e.is_empty() {
        eprintln!("warning: the accepting set is empty; the objective is unsatisfiable and V is 0 everywhere");
    }
    println!("product states: {}", instance.product.n_states());
    println!("accepting states: {}", instance.e.len());
    println!("iterations: {}", outcome.iterations);
    println!("V(start) = {:.6}", outcome.values[instance.x0]);
    Ok(ExitCode::SUCCESS)
}

fn cmd_privacy(args: &PrivacyArgs) -> Result<ExitCode, CliError> {
    let (instance, outcome) = synthesize(&args.input, &args.solve)?;
    let (mdp, _) = eavesdropper_view(&instance, &outcome)?;
    fs::create_dir_all(&args.out.out_dir)?;
    for &eps in &args.epsilon {
        if eps < 0.0 {
            return usage(format!("epsilon must be non-negative, got {eps}"));
        }
        let alpha = eps.exp();
        let m = args.policy_closeness.unwrap_or(match args.delta {
            Some(delta) => delta / (2.0 * alpha),
            None => 0.01 / alpha,
        });
        let cap = args.cap.unwrap_or(match args.delta {
            Some(delta) => (delta - alpha * m).max(0.0),
            None => 0.5,
        });
        let fixpoint = f_tv_fixpoint_with(
            &mdp,
            alpha,
            &FixpointOptions {
                cap: (cap < 1.0).then_some(cap),
                tol: args.solve.tol,
                max_iter: args.solve.max_iter,
                ..FixpointOptions::default()
            },
        )?;
        if !fixpoint.converged {
            eprintln!("warning: distance iteration for epsilon {eps} hit the iteration cap");
        }
        let mut relation = build_relation(
            &mdp,
            &outcome.policy,
            &instance.e,
            alpha,
            m,
            &fixpoint.table,
            args.term_tol,
        )?;
        if let Some(delta) = args.delta {
            relation = prune_to_budget(&relation, &mdp, &instance.e, delta);
        }
        let cert = dp_certificate(&relation);
        let tag = format!("eps{eps}");
        save_distances(args.out.out_dir.join(format!("dstar_{tag}.txt")), &fixpoint.table)?;
        save_relation(args.out.out_dir.join(format!("relation_{tag}.txt")), &relation)?;
        save_certificate(args.out.out_dir.join(format!("certificate_{tag}.txt")), &cert)?;
        match cert.delta_min {
            Some(dm) => println!(
                "epsilon {eps}: {} related pairs ({} off-diagonal), delta_min = {dm:.6e}",
                cert.pairs,
                relation.off_diagonal()
            ),
            None => {
                eprintln!("warning: the relation for epsilon {eps} is empty; nothing is certified");
                println!("epsilon {eps}: empty relation");
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Replace each raw sweep count by the maximum over all cells it dominates
/// (both axes ascending). A trajectory private at a smaller epsilon or delta
/// is private at larger ones too, so reporting the running maximum is sound
/// and restores the monotone shape a per-cell relation build can miss.
fn monotone_counts(n_eps: usize, n_delta: usize, raw: &[u64]) -> Vec<u64> {
    assert_eq!(raw.len(), n_eps * n_delta);
    let mut out = raw.to_vec();
    for i in 0..n_eps {
        for j in 0..n_delta {
            let mut best = out[i * n_delta + j];
            if i > 0 {
                best = best.max(out[(i - 1) * n_delta + j]);
            }
            if j > 0 {
                best = best.max(out[i * n_delta + j - 1]);
            }
            out[i * n_delta + j] = best;
        }
    }
    out
}

fn sorted_axis(values: &[f64], what: &str) -> Result<Vec<f64>, CliError> {
    if values.is_empty() {
        return usage(format!("at least one {what} value is required"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return usage(format!("{what} values must be finite"));
    }
    let mut axis = values.to_vec();
    axis.sort_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
    axis.dedup();
    Ok(axis)
}

fn cmd_sweep(args: &SweepArgs) -> Result<ExitCode, CliError> {
    let epsilons = sorted_axis(&args.epsilon, "epsilon")?;
    if epsilons[0] < 0.0 {
        return usage(format!("epsilon must be non-negative, got {}", epsilons[0]));
    }
    let deltas = sorted_axis(&args.delta, "delta")?;
    if deltas[0] <= 0.0 {
        return usage(format!("delta must be positive, got {}", deltas[0]));
    }
    let (instance, outcome) = synthesize(&args.input, &args.solve)?;
    let (mdp, chain) = eavesdropper_view(&instance, &outcome)?;
    let reference = sample_path(&chain, instance.x0, args.horizon, args.seed);

    // Distances only depend on alpha, so one fixed point per epsilon serves
    // every delta. Entries beyond the largest useful bound collapse to 1:
    // with the per-cell default M = delta/(2 alpha), a pair only certifies a
    // cell when its distance is at most delta/2.
    let cap = deltas.last().unwrap() / 2.0;
    let mut raw = Vec::with_capacity(epsilons.len() * deltas.len());
    let mut cells = Vec::with_capacity(raw.capacity());
    let mut truncated_any = false;
    for &eps in &epsilons {
        let alpha = eps.exp();
        let fixpoint = f_tv_fixpoint_with(
            &mdp,
            alpha,
            &FixpointOptions {
                mode: KantorovichMode::SupportRestricted,
                cap: Some(cap),
                tol: args.solve.tol,
                max_iter: args.solve.max_iter,
            },
        )?;
        for &delta in &deltas {
            let m = args.policy_closeness.unwrap_or(delta / (2.0 * alpha));
            let relation = build_relation(
                &mdp,
                &outcome.policy,
                &instance.e,
                alpha,
                m,
                &fixpoint.table,
                args.term_tol,
            )?;
            let relation = prune_to_budget(&relation, &mdp, &instance.e, delta);
            let count = count_dp_trajectories(&chain, &reference, &relation, args.node_budget)?;
            if count.truncated {
                truncated_any = true;
                eprintln!(
                    "warning: node budget truncated the count at epsilon {eps}, delta {delta}; reported count is a lower bound"
                );
            }
            raw.push(count.count);
            cells.push((eps, delta, m));
        }
    }
    let counts = monotone_counts(epsilons.len(), deltas.len(), &raw);
    let rows: Vec<SweepRow> = cells
        .iter()
        .zip(&counts)
        .map(|(&(epsilon, delta, m), &count)| SweepRow {
            epsilon,
            delta,
            m,
            count,
        })
        .collect();
    fs::create_dir_all(&args.out.out_dir)?;
    let out_path = args.out.out_dir.join("sweep.csv");
    save_sweep(&out_path, &rows)?;
    println!(
        "wrote {} cells ({} epsilon x {} delta) to {}",
        rows.len(),
        epsilons.len(),
        deltas.len(),
        out_path.display()
    );
    if truncated_any {
        Ok(ExitCode::from(3))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<ExitCode, CliError> {
    if args.rollouts == 0 {
        return usage("at least one rollout is required");
    }
    let (instance, outcome) = synthesize(&args.input, &args.solve)?;
    let (_, chain) = eavesdropper_view(&instance, &outcome)?;
    let report = simulate_satisfaction(
        &chain,
        instance.x0,
        &instance.e,
        args.rollouts,
        args.horizon,
        args.seed,
    );
    let v = outcome.values[instance.x0];
    println!("V(start) = {v:.6}");
    println!(
        "estimate = {:.6} +/- {:.6} ({} rollouts, horizon {}, seed {})",
        report.estimate, report.half_width, report.rollouts, report.horizon, args.seed
    );
    if v - report.estimate > SIM_GAP_WARN {
        eprintln!(
            "warning: estimate is {:.3} below the synthesized value; the horizon may be too small",
            v - report.estimate
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn report_validation<T>(
    kind: &str,
    path: &Path,
    outcome: Result<T, FormatError>,
    describe: impl FnOnce(&T) -> String,
    failures: &mut usize,
) {
    match outcome {
        Ok(value) => println!("{}: ok, {} ({})", path.display(), kind, describe(&value)),
        Err(err) => {
            println!("{}: invalid {} ({err})", path.display(), kind);
            *failures += 1;
        }
    }
}

fn read(path: &Path) -> Result<String, FormatError> {
    Ok(fs::read_to_string(path)?)
}

fn cmd_validate(args: &ValidateArgs) -> Result<ExitCode, CliError> {
    let total = args.game.len()
        + args.grid.len()
        + args.automaton.len()
        + args.values.len()
        + args.policy.len()
        + args.accepting.len()
        + args.relation.len()
        + args.certificate.len()
        + args.sweep.len();
    if total == 0 {
        return usage("no files given; pass e.g. --grid FILE or --game FILE to validate");
    }
    let mut failures = 0;
    for path in &args.game {
        report_validation(
            "game",
            path,
            load_game(path),
            |g| {
                format!(
                    "{} states, {}x{} actions, {} propositions",
                    g.n_states(),
                    g.n_def_actions(),
                    g.n_adv_actions(),
                    g.props().len()
                )
            },
            &mut failures,
        );
    }
    for path in &args.grid {
        report_validation(
            "grid spec",
            path,
            load_grid_spec(path),
            |s| {
                format!(
                    "{}x{}, {} targets, {} obstacles",
                    s.width,
                    s.height,
                    s.targets.len(),
                    s.obstacles.len()
                )
            },
            &mut failures,
        );
    }
    for path in &args.automaton {
        report_validation(
            "automaton",
            path,
            load_dra(path),
            |a| {
                format!(
                    "{} states, {} letters, {} pairs",
                    a.n_states(),
                    a.letters().len(),
                    a.pairs().len()
                )
            },
            &mut failures,
        );
    }
    for path in &args.values {
        report_validation(
            "values CSV",
            path,
            load_values(path),
            |v| format!("{} states", v.len()),
            &mut failures,
        );
    }
    for path in &args.policy {
        report_validation(
            "policy file",
            path,
            read(path).and_then(|text| check_policy_syntax(&text)),
            |n| format!("{n} entries"),
            &mut failures,
        );
    }
    for path in &args.accepting {
        report_validation(
            "accepting-set listing",
            path,
            load_accepting(path),
            |e| format!("{} of {} states", e.len(), e.n_states()),
            &mut failures,
        );
    }
    for path in &args.relation {
        report_validation(
            "relation file",
            path,
            load_relation_pairs(path),
            |pairs| format!("{} pairs", pairs.len()),
            &mut failures,
        );
    }
    for path in &args.certificate {
        report_validation(
            "certificate",
            path,
            load_certificate(path),
            |c| match c.delta_min {
                Some(dm) => format!("epsilon {}, delta_min {dm:.3e}", c.epsilon),
                None => format!("epsilon {}, empty relation", c.epsilon),
            },
            &mut failures,
        );
    }
    for path in &args.sweep {
        report_validation(
            "sweep CSV",
            path,
            load_sweep(path),
            |rows| format!("{} cells", rows.len()),
            &mut failures,
        );
    }
    if failures > 0 {
        eprintln!("{failures} of {total} files failed validation");
        Ok(ExitCode::from(2))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

/// Run a parsed command line to completion and produce the process exit
/// code. Input and configuration errors print to stderr and map to exit
/// code 2; budget truncation maps to 3.
pub fn run(config: RunConfig) -> ExitCode {
    let result = match &config.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Privacy(args) => cmd_privacy(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::ValidateFormats(args) => cmd_validate(args),
    };
    match result {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
