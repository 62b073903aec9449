//! Differential-privacy certification of a synthesized policy: build a 5×5
//! patrol grid, synthesize the defender policy, marginalize the adversary's
//! best response into the eavesdropper-side MDP, iterate the skewed
//! Kantorovich distances to their fixed point, assemble the relation of
//! indistinguishable state pairs, and read off the (ε, δ) certificate and
//! the number of private alternatives to a reference trajectory.
//!
//! Run with: cargo run --release --example privacy_certificate

use privsyn::{
    accepting_states, best_response_adversary, build_grid, build_product, build_relation,
    count_dp_trajectories, dp_certificate, dra_from_template, f_tv_fixpoint_with, induce_chain,
    parse_ltl, prune_to_budget, sample_path, stackelberg_value_iteration, FixpointOptions,
    GridSpec, LabeledMdp,
};

fn main() {
    let epsilon = 1.0;
    let delta = 0.001;
    let alpha = epsilon.exp();
    // Policy-closeness budget and distance cap, split so that
    // alpha·M + d* ≤ delta can still be met by pairs under the cap.
    let m = delta / (2.0 * alpha);
    let cap = delta - alpha * m;

    let spec = GridSpec::new(5, 5).with_target(4, 2).with_obstacle(2, 2);
    let game = build_grid(&spec).expect("layout is valid");
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
    println!(
        "5x5 grid, {} product states, V(start) = {:.6}",
        product.n_states(),
        outcome.values[x0]
    );

    // What the eavesdropper models: the defender's action menu restricted to
    // the policy support, with the best-responding adversary marginalized
    // into the kernel rows.
    let tau = best_response_adversary(&product, &outcome.policy, &e);
    let mdp = LabeledMdp::from_product_policy(&product, &outcome.policy, &tau)
        .expect("policy covers the product");
    let chain = induce_chain(&product, &outcome.policy, &tau).expect("policy covers the product");

    let fixpoint = f_tv_fixpoint_with(
        &mdp,
        alpha,
        &FixpointOptions {
            cap: Some(cap),
            ..FixpointOptions::default()
        },
    )
    .expect("inputs are consistent");
    println!(
        "distance fixed point: {} sweeps (converged: {}), entries above {cap:.0e} rounded to 1",
        fixpoint.iterations, fixpoint.converged
    );

    let relation = build_relation(&mdp, &outcome.policy, &e, alpha, m, &fixpoint.table, 1e-9)
        .expect("inputs are consistent");
    let pruned = prune_to_budget(&relation, &mdp, &e, delta);
    println!(
        "relation: {} pairs ({} off-diagonal) before the budget, {} ({}) after",
        relation.len(),
        relation.off_diagonal(),
        pruned.len(),
        pruned.off_diagonal()
    );

    let cert = dp_certificate(&pruned);
    println!(
        "certificate: epsilon = {:.3}, delta_min = {}, {} pairs",
        cert.epsilon,
        cert.delta_min
            .map(|d| format!("{d:.3e}"))
            .unwrap_or_else(|| "-".into()),
        cert.pairs
    );
    println!(
        "  valid for the requested delta {delta}: {}",
        cert.valid_for(delta)
    );

    // Show a few indistinguishable pairs as grid cells.
    println!("sample off-diagonal pairs (cell/automaton state on each side, d*):");
    for (s, t, d) in pruned.pairs().filter(|&(s, t, _)| s != t).take(5) {
        let (sx, sy) = spec.coords(product.game_state(s));
        let (tx, ty) = spec.coords(product.game_state(t));
        println!(
            "  ({sx}, {sy})/q{}  ~  ({tx}, {ty})/q{}   d* = {d:.3e}",
            product.aut_state(s),
            product.aut_state(t)
        );
    }

    // How many equally-labeled trajectories the relation admits alongside a
    // reference drawn from the synthesized closed loop.
    let reference = sample_path(&chain, x0, 30, 0);
    let count =
        count_dp_trajectories(&chain, &reference, &pruned, 1_000_000).expect("reference is valid");
    println!(
        "reference trajectory of {} states admits {} private alternatives \
         (truncated: {}, {} nodes explored)",
        reference.len(),
        count.count,
        count.truncated,
        count.nodes
    );
}
