//! Privacy layer checked on hand-built instances where every quantity is
//! derivable by hand: relation membership under each of the four conditions,
//! certificate arithmetic, trajectory counts, and the empirical bound.

mod common;

use privsyn::model::{AcceptingSet, InducedMarkovChain, LabeledMdp, MixedPolicy};
use privsyn::privacy::{
    build_relation, count_dp_trajectories, dp_certificate, empirical_tv_alpha, f_tv_fixpoint,
    prune_to_budget, value_gap_check,
};

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

/// Start state 0 (label p) branches evenly into absorbing twins 1 and 2
/// (both label q); the twins emit identical label streams forever.
fn twin_branch() -> (LabeledMdp, InducedMarkovChain, MixedPolicy) {
    let rows = vec![
        vec![(1, 0.5), (2, 0.5)],
        vec![(1, 1.0)],
        vec![(2, 1.0)],
    ];
    let mdp = LabeledMdp::new(
        names(&["u"]),
        names(&["p", "q"]),
        vec![0, 1, 1],
        rows.iter().map(|row| vec![(0, row.clone())]).collect(),
    )
    .unwrap();
    let chain =
        InducedMarkovChain::from_rows(names(&["p", "q"]), vec![0, 1, 1], rows).unwrap();
    let policy = MixedPolicy::new(vec![vec![1.0]; 3]).unwrap();
    (mdp, chain, policy)
}

#[test]
fn twin_branch_relation_certificate_and_count() {
    let (mdp, chain, policy) = twin_branch();
    let e = AcceptingSet::from_states(3, &[]);
    let fix = f_tv_fixpoint(&mdp, 1.0, 1e-9, 1000).unwrap();
    assert!(fix.converged);
    // The twins have the same label and identical continuations.
    assert_eq!(fix.table.get(1, 2), 0.0);

    let relation = build_relation(&mdp, &policy, &e, 1.0, 0.01, &fix.table, 1e-9).unwrap();
    // Three diagonal pairs plus the twin pair; 0 pairs with nobody else
    // because its label is unique.
    assert_eq!(relation.len(), 4);
    assert_eq!(relation.off_diagonal(), 1);
    assert!(relation.contains(1, 2));
    assert_eq!(relation.distance(1, 2), Some(0.0));
    assert_eq!(relation.partners(0), vec![0]);

    let cert = dp_certificate(&relation);
    assert_eq!(cert.epsilon, 0.0);
    assert_eq!(cert.delta_min, Some(0.01));
    assert_eq!(cert.pairs, 4);
    assert!(cert.valid_for(0.02));
    assert!(!cert.valid_for(0.005));

    // Reference sits on the left twin; the right twin shadows it step for
    // step, so exactly two trajectories match.
    let reference = [0, 1, 1, 1];
    let count = count_dp_trajectories(&chain, &reference, &relation, 1_000).unwrap();
    assert_eq!(count.count, 2);
    assert!(!count.truncated);
    assert_eq!(count.nodes, 7);

    // A tiny node budget cuts the search short and reports it.
    let cut = count_dp_trajectories(&chain, &reference, &relation, 3).unwrap();
    assert!(cut.truncated);
    assert!(cut.count < 2);

    // Pruning below the pairwise certificate level empties the relation.
    let pruned = prune_to_budget(&relation, &mdp, &e, 0.005);
    assert!(pruned.is_empty());
    assert_eq!(dp_certificate(&pruned).delta_min, None);
    let kept = prune_to_budget(&relation, &mdp, &e, 0.01);
    assert_eq!(kept.len(), 4);
}

/// Two-action MDP exercising the policy-closeness and terminal conditions:
/// 0 and 1 (label p) step into absorbing 2 and 3 (label q); 4 (label q,
/// non-terminal) also steps into 2.
fn gated_pairs(policy_rows: Vec<Vec<f64>>) -> (LabeledMdp, MixedPolicy, AcceptingSet) {
    let rows: Vec<Vec<(usize, f64)>> = vec![
        vec![(2, 1.0)],
        vec![(3, 1.0)],
        vec![(2, 1.0)],
        vec![(3, 1.0)],
        vec![(2, 1.0)],
    ];
    let mdp = LabeledMdp::new(
        names(&["u0", "u1"]),
        names(&["p", "q"]),
        vec![0, 0, 1, 1, 1],
        rows.iter()
            .map(|row| vec![(0, row.clone()), (1, row.clone())])
            .collect(),
    )
    .unwrap();
    let policy = MixedPolicy::new(policy_rows).unwrap();
    let e = AcceptingSet::from_states(5, &[2, 3]);
    (mdp, policy, e)
}

#[test]
fn relation_conditions_gate_membership_one_by_one() {
    let near = vec![
        vec![0.6, 0.4],
        vec![0.4, 0.6],
        vec![1.0, 0.0],
        vec![1.0, 0.0],
        vec![0.6, 0.4],
    ];
    let (mdp, policy, e) = gated_pairs(near);
    let fix = f_tv_fixpoint(&mdp, 1.0, 1e-9, 1000).unwrap();
    // Terminal twins 2 and 3 absorb under the same label: distance zero.
    assert_eq!(fix.table.get(2, 3), 0.0);

    // Policy rows at 0 and 1 differ by 0.2 in total variation.
    assert!((policy.state_tv(0, 1) - 0.2).abs() < 1e-15);

    // Generous closeness: the (0, 1) pair enters, witnessed by (2, 3).
    let wide = build_relation(&mdp, &policy, &e, 1.0, 0.25, &fix.table, 1e-9).unwrap();
    assert!(wide.contains(0, 1));
    assert!(wide.contains(2, 3));
    // Mixing a terminal with a non-terminal state is never allowed, even
    // with matching labels and policies.
    assert!(!wide.contains(2, 4));
    assert!(!wide.contains(3, 4));

    // Tight closeness cuts exactly the policy-distant pair.
    let tight = build_relation(&mdp, &policy, &e, 1.0, 0.1, &fix.table, 1e-9).unwrap();
    assert!(!tight.contains(0, 1));
    assert!(tight.contains(2, 3));
}

#[test]
fn terminal_pairs_with_distant_continuations_are_rejected() {
    // Same layout, but terminal state 3 leaks back to the label-p start:
    // its label stream diverges from 2's, so d*(2, 3) is large and the
    // terminal pair must fall to the terminal tolerance.
    let rows: Vec<Vec<(usize, f64)>> = vec![
        vec![(2, 1.0)],
        vec![(3, 1.0)],
        vec![(2, 1.0)],
        vec![(0, 1.0)],
    ];
    let mdp = LabeledMdp::new(
        names(&["u"]),
        names(&["p", "q"]),
        vec![0, 0, 1, 1],
        rows.iter().map(|row| vec![(0, row.clone())]).collect(),
    )
    .unwrap();
    let policy = MixedPolicy::new(vec![vec![1.0]; 4]).unwrap();
    let e = AcceptingSet::from_states(4, &[2, 3]);
    let fix = f_tv_fixpoint(&mdp, 1.0, 1e-9, 1000).unwrap();
    assert!(fix.table.get(2, 3) > 0.5);
    let relation = build_relation(&mdp, &policy, &e, 1.0, 0.25, &fix.table, 1e-9).unwrap();
    assert!(!relation.contains(2, 3));
    // Without the terminal witness, the feeder pair loses its closure
    // support as well.
    assert!(!relation.contains(0, 1));
    for s in 0..4 {
        assert!(relation.contains(s, s));
    }
}

#[test]
fn empirical_tv_is_monotone_and_bounded_by_the_fixed_point() {
    // 1 and 2 share a label but diverge afterwards: 1 parks on the absorbing
    // p-state while 2 returns to the branching start.
    let rows = vec![
        vec![(1, 0.5), (2, 0.5)],
        vec![(3, 1.0)],
        vec![(0, 1.0)],
        vec![(3, 1.0)],
    ];
    let labels = vec![0, 1, 1, 0];
    let mdp = LabeledMdp::new(
        names(&["u"]),
        names(&["p", "q"]),
        labels.clone(),
        rows.iter().map(|row| vec![(0, row.clone())]).collect(),
    )
    .unwrap();
    let chain = InducedMarkovChain::from_rows(names(&["p", "q"]), labels, rows).unwrap();
    for alpha in [1.0, std::f64::consts::E] {
        let fix = f_tv_fixpoint(&mdp, alpha, 1e-9, 1000).unwrap();
        let bound = fix.table.get(1, 2);
        let mut previous = 0.0;
        for horizon in 1..=6 {
            let emp = empirical_tv_alpha(&chain, 1, 2, alpha, horizon).unwrap();
            assert!(
                emp <= bound + 1e-7,
                "alpha {alpha} horizon {horizon}: {emp} > {bound}"
            );
            assert!(emp >= previous - 1e-12);
            previous = emp;
        }
        // The divergence is real: by horizon 3 the gap is visible.
        assert!(empirical_tv_alpha(&chain, 1, 2, alpha, 3).unwrap() > 0.0);
    }
}

#[test]
fn value_gap_never_violated_on_the_hand_instances() {
    let (mdp, _, _) = twin_branch();
    let e = AcceptingSet::from_states(3, &[1, 2]);
    for alpha in [1.0, std::f64::consts::E] {
        let report = value_gap_check(&mdp, &e, alpha, 15).unwrap();
        assert!(report.max_violation <= 1e-9, "violation {}", report.max_violation);
        assert_eq!(report.levels_checked, 16);
    }
}

/// The domination needs every state to offer the same menu: here state 2
/// owns a private escape action into the target that state 0 lacks, so its
/// value jumps to 1 while the only shared action keeps both states on
/// identical self-loops and the distance at 0. The check is expected to
/// surface that unit violation rather than mask it.
#[test]
fn state_dependent_menus_fall_outside_the_domination_guarantee() {
    let mdp = LabeledMdp::new(
        names(&["u0", "u1"]),
        names(&["p", "q"]),
        vec![0, 1, 0],
        vec![
            vec![(0, vec![(0, 1.0)])],
            vec![(0, vec![(1, 1.0)])],
            vec![(0, vec![(2, 1.0)]), (1, vec![(1, 1.0)])],
        ],
    )
    .unwrap();
    let e = AcceptingSet::from_states(3, &[1]);
    let report = value_gap_check(&mdp, &e, 1.0, 5).unwrap();
    assert!(report.max_violation > 0.9, "violation {}", report.max_violation);
    assert_eq!(report.worst_pair, Some((0, 2)));
}
