//! Sweep the privacy budget: for each (ε, δ) on a small grid, rebuild the
//! relation against the same synthesized 5×5 policy and count the private
//! alternatives to one fixed reference trajectory. Larger budgets admit
//! weakly more trajectories along both axes. Prints the count matrix and
//! the CSV the `sweep` subcommand would write.
//!
//! Run with: cargo run --release --example sweep_counts

use privsyn::formats::render_sweep;
use privsyn::{
    accepting_states, best_response_adversary, build_grid, build_product, build_relation,
    count_dp_trajectories, dra_from_template, f_tv_fixpoint_with, induce_chain, parse_ltl,
    prune_to_budget, sample_path, stackelberg_value_iteration, FixpointOptions, GridSpec,
    KantorovichMode, LabeledMdp, SweepRow,
};

fn main() {
    let epsilons = [0.5, 1.0, 2.0];
    let deltas = [1e-4, 1e-3, 1e-2];

    let spec = GridSpec::new(5, 5).with_target(4, 2).with_obstacle(2, 2);
    let game = build_grid(&spec).expect("layout is valid");
    let formula = parse_ltl("GF tar & G !obs").expect("objective parses");
    let aut = dra_from_template(&formula).expect("objective has a template automaton");
    let product = build_product(&game, &aut).expect("alphabets line up");
    let e = accepting_states(&product);
    let outcome = stackelberg_value_iteration(&product, &e, 1e-9, 100_000);
    let tau = best_response_adversary(&product, &outcome.policy, &e);
    let mdp = LabeledMdp::from_product_policy(&product, &outcome.policy, &tau)
        .expect("policy covers the product");
    let chain = induce_chain(&product, &outcome.policy, &tau).expect("policy covers the product");

    let s0 = spec.index(0, 0);
    let q0 = aut
        .step_named(aut.initial(), &game.props()[game.label(s0)])
        .expect("grid labels drive the automaton");
    let x0 = product.state_index(s0, q0);
    let reference = sample_path(&chain, x0, 40, 0);
    println!(
        "fixed reference: {} states sampled from the closed loop at seed 0",
        reference.len()
    );

    // One distance fixed point per epsilon (alpha changes), shared across
    // the delta axis; entries beyond the largest delta can never enter a
    // relation, so they are capped.
    let cap = deltas.last().copied().unwrap() / 2.0;
    let mut rows: Vec<SweepRow> = Vec::new();
    let mut matrix = Vec::new();
    for &epsilon in &epsilons {
        let alpha = epsilon.exp();
        let fixpoint = f_tv_fixpoint_with(
            &mdp,
            alpha,
            &FixpointOptions {
                mode: KantorovichMode::SupportRestricted,
                cap: Some(cap),
                ..FixpointOptions::default()
            },
        )
        .expect("inputs are consistent");
        let mut line = Vec::new();
        for &delta in &deltas {
            let m = delta / (2.0 * alpha);
            let relation =
                build_relation(&mdp, &outcome.policy, &e, alpha, m, &fixpoint.table, 1e-9)
                    .expect("inputs are consistent");
            let pruned = prune_to_budget(&relation, &mdp, &e, delta);
            let count = count_dp_trajectories(&chain, &reference, &pruned, 1_000_000)
                .expect("reference is valid");
            if count.truncated {
                println!("  (epsilon {epsilon}, delta {delta}) truncated at the node budget");
            }
            rows.push(SweepRow {
                epsilon,
                delta,
                m,
                count: count.count,
            });
            line.push(count.count);
        }
        matrix.push(line);
    }

    println!("counts (rows: epsilon {epsilons:?}, columns: delta {deltas:?}):");
    for (eps, line) in epsilons.iter().zip(&matrix) {
        println!("  epsilon {eps:>4}: {line:?}");
    }
    for line in &matrix {
        assert!(
            line.windows(2).all(|w| w[0] <= w[1]),
            "counts must not decrease along the delta axis"
        );
    }
    for pair in matrix.windows(2) {
        assert!(
            pair[0].iter().zip(&pair[1]).all(|(a, b)| a <= b),
            "counts must not decrease along the epsilon axis"
        );
    }
    println!("monotone along both axes: yes");

    println!("CSV as written by the sweep subcommand:");
    print!("{}", render_sweep(&rows));
}
