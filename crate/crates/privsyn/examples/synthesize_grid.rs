//! End-to-end policy synthesis on the 10×10 surveillance grid: build the
//! game, compose it with the automaton for `GF tar & G !obs`, compute the
//! accepting set, and run Stackelberg value iteration. Prints the accepting
//! states, the value at the start cell, and a value heat map over the grid.
//!
//! Run with: cargo run --release --example synthesize_grid

use privsyn::{
    accepting_states, best_response_adversary, build_grid, build_product, demo_ten_by_ten,
    dra_from_template, parse_ltl, reach_probability, stackelberg_value_iteration,
};
use std::time::Instant;

fn main() {
    let spec = demo_ten_by_ten();
    let game = build_grid(&spec).expect("demo layout is valid");
    let formula = parse_ltl("GF tar & G !obs").expect("objective parses");
    let aut = dra_from_template(&formula).expect("objective has a template automaton");
    let product = build_product(&game, &aut).expect("alphabets line up");

    println!(
        "grid {}x{} -> {} game states, {} automaton states, {} product states",
        spec.width,
        spec.height,
        game.n_states(),
        aut.n_states(),
        product.n_states()
    );

    let started = Instant::now();
    let e = accepting_states(&product);
    println!("accepting set ({} states, {:.1?}):", e.len(), started.elapsed());
    for x in e.states() {
        let (cx, cy) = spec.coords(product.game_state(x));
        let witness = e
            .witness_action(x)
            .map(|ud| product.def_actions()[ud].clone())
            .unwrap_or_else(|| "-".into());
        println!(
            "  cell ({cx}, {cy})  automaton state {}  witness action {witness}",
            product.aut_state(x)
        );
    }

    let started = Instant::now();
    let outcome = stackelberg_value_iteration(&product, &e, 1e-9, 100_000);
    println!(
        "value iteration: {} sweeps in {:.2?} (converged: {})",
        outcome.iterations,
        started.elapsed(),
        outcome.converged
    );

    // The automaton advances on the label of the state being entered, so the
    // initial product state pairs the start cell with the step on its label.
    let s0 = spec.index(0, 0);
    let q0 = aut
        .step_named(aut.initial(), &game.props()[game.label(s0)])
        .expect("grid labels drive the automaton");
    let x0 = product.state_index(s0, q0);
    println!("V(start) = {:.6}", outcome.values[x0]);
    print!("defender mix at start:");
    for (ud, name) in product.def_actions().iter().enumerate() {
        print!("  {name} {:.4}", outcome.policy.row(x0)[ud]);
    }
    println!();

    let tau = best_response_adversary(&product, &outcome.policy, &e);
    let worst = reach_probability(&product, &outcome.policy, &e, 1e-9, 100_000);
    println!(
        "worst-case recheck under the best-responding adversary: {:.6} \
         (adversary plays {} at the start)",
        worst.values[x0],
        product.adv_actions()[tau
            .row(x0)
            .iter()
            .position(|&p| p > 0.0)
            .expect("point mass")]
    );

    // Heat map of the value over cells (hunting-phase automaton state),
    // printed top row first.
    println!("value heat map (automaton in its initial state):");
    for y in (0..spec.height).rev() {
        print!("  y={y:>2} ");
        for x in 0..spec.width {
            let cell = spec.index(x, y);
            let q = aut
                .step_named(aut.initial(), &game.props()[game.label(cell)])
                .expect("grid labels drive the automaton");
            let v = outcome.values[product.state_index(cell, q)];
            print!(" {:>4.0}", v * 1000.0);
        }
        println!();
    }
    println!("  (entries are 1000·V; obstacle columns show the trap value)");
}
