//! Monte Carlo validation of a synthesized policy: close the loop on the
//! 10×10 grid with the best-responding adversary, roll out the induced
//! chain, and compare the satisfaction estimate against the synthesized
//! value. Also inspects the chain's communicating classes: the play should
//! settle into a recurrent class inside the accepting set.
//!
//! Run with: cargo run --release --example simulate_policy

use privsyn::{
    accepting_states, best_response_adversary, build_grid, build_product, classify_states,
    demo_ten_by_ten, dra_from_template, induce_chain, parse_ltl, sample_path,
    simulate_satisfaction, stackelberg_value_iteration,
};

fn main() {
    let spec = demo_ten_by_ten();
    let game = build_grid(&spec).expect("demo layout is valid");
    let formula = parse_ltl("GF tar & G !obs").expect("objective parses");
    let aut = dra_from_template(&formula).expect("objective has a template automaton");
    let product = build_product(&game, &aut).expect("alphabets line up");
    let e = accepting_states(&product);
    let outcome = stackelberg_value_iteration(&product, &e, 1e-9, 100_000);

    let s0 = spec.index(0, 0);
    let q0 = aut
        .step_named(aut.initial(), &game.props()[game.label(s0)])
        .expect("grid labels drive the automaton");
    let x0 = product.state_index(s0, q0);
    println!("synthesized value at the start: {:.6}", outcome.values[x0]);

    let tau = best_response_adversary(&product, &outcome.policy, &e);
    let chain = induce_chain(&product, &outcome.policy, &tau).expect("policy covers the product");

    let report = simulate_satisfaction(&chain, x0, &e, 10_000, 200, 0);
    println!(
        "simulation: {} rollouts x {} steps -> estimate {:.4} +/- {:.4} \
         ({} successes)",
        report.rollouts, report.horizon, report.estimate, report.half_width, report.successes
    );
    let gap = (report.estimate - outcome.values[x0]).abs();
    println!(
        "gap to the synthesized value: {:.4} ({})",
        gap,
        if gap <= report.half_width + 0.01 {
            "within the confidence band"
        } else {
            "outside the band; raise the horizon"
        }
    );

    // Where the closed loop settles: recurrent classes of the induced chain.
    let classes = classify_states(&chain);
    let recurrent: Vec<_> = classes.iter().filter(|c| c.recurrent).collect();
    println!(
        "induced chain: {} states, {} communicating classes, {} recurrent",
        chain.n_states(),
        classes.len(),
        recurrent.len()
    );
    for class in &recurrent {
        let inside = class.states.iter().filter(|&&x| e.contains(x)).count();
        let cells: Vec<String> = class
            .states
            .iter()
            .take(6)
            .map(|&x| {
                let (cx, cy) = spec.coords(product.game_state(x));
                format!("({cx}, {cy})/q{}", product.aut_state(x))
            })
            .collect();
        println!(
            "  recurrent class of {} states, {} inside the accepting set: {}{}",
            class.states.len(),
            inside,
            cells.join(", "),
            if class.states.len() > 6 { ", ..." } else { "" }
        );
    }

    // One concrete trajectory, printed until it first enters the accepting
    // set (or 15 steps, whichever is first).
    let path = sample_path(&chain, x0, 200, 1);
    let first_hit = path.iter().position(|&x| e.contains(x));
    let show = first_hit.map(|i| i + 1).unwrap_or(15).min(15);
    print!("one rollout (seed 1):");
    for &x in &path[..show] {
        let (cx, cy) = spec.coords(product.game_state(x));
        print!(" ({cx},{cy})");
    }
    match first_hit {
        Some(i) if i < 15 => println!("  <- enters the accepting set at step {i}"),
        _ => println!(" ..."),
    }
}
