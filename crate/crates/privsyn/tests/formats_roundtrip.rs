//! File-level round trips through real temporary files, on full-size
//! artifacts from the bundled 10x10 grid instance.

mod common;

use privsyn::formats::{
    load_accepting, load_certificate, load_dra, load_game, load_grid_spec, load_policy,
    load_relation_pairs, load_sweep, load_values, render_dra, render_game, save_accepting,
    save_certificate, save_dra, save_game, save_grid_spec, save_policy, save_relation,
    save_sweep, save_values, FormatError, SweepRow,
};
use privsyn::gridworld::{build_grid, demo_ten_by_ten};
use privsyn::ltl::{dra_from_template, parse_ltl};
use privsyn::model::{accepting_states, build_product, MixedPolicy};
use privsyn::privacy::{build_relation, dp_certificate};
use privsyn::synthesis::{stackelberg_value_iteration, DEFAULT_MAX_ITER, DEFAULT_TOL};

#[test]
fn grid_game_and_spec_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let spec = demo_ten_by_ten();
    let game = build_grid(&spec).unwrap();

    let spec_path = dir.path().join("grid.txt");
    save_grid_spec(&spec_path, &spec).unwrap();
    assert_eq!(load_grid_spec(&spec_path).unwrap(), spec);

    let game_path = dir.path().join("game.txt");
    save_game(&game_path, &game).unwrap();
    let back = load_game(&game_path).unwrap();
    assert_eq!(render_game(&back).unwrap(), render_game(&game).unwrap());
}

#[test]
fn template_dra_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let aut = dra_from_template(&parse_ltl("GF tar & G !obs").unwrap()).unwrap();
    let path = dir.path().join("dra.txt");
    save_dra(&path, &aut).unwrap();
    let back = load_dra(&path).unwrap();
    assert_eq!(render_dra(&back).unwrap(), render_dra(&aut).unwrap());
}

#[test]
fn synthesis_artifacts_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let game = build_grid(&demo_ten_by_ten()).unwrap();
    let aut = dra_from_template(&parse_ltl("GF tar & G !obs").unwrap()).unwrap();
    let product = build_product(&game, &aut).unwrap();
    let e = accepting_states(&product);
    let outcome = stackelberg_value_iteration(&product, &e, DEFAULT_TOL, DEFAULT_MAX_ITER);

    let values_path = dir.path().join("values.csv");
    save_values(&values_path, &outcome.values).unwrap();
    // Bit-exact restore across a full 300-state table.
    assert_eq!(load_values(&values_path).unwrap(), outcome.values);

    let policy_path = dir.path().join("policy.txt");
    let action_names: Vec<String> =
        ["R", "L", "U", "D"].iter().map(|s| s.to_string()).collect();
    save_policy(&policy_path, &outcome.policy, &action_names).unwrap();
    let policy: MixedPolicy =
        load_policy(&policy_path, product.n_states(), &action_names).unwrap();
    assert_eq!(policy, outcome.policy);

    let accepting_path = dir.path().join("accepting.txt");
    save_accepting(&accepting_path, &e).unwrap();
    let e_back = load_accepting(&accepting_path).unwrap();
    assert_eq!(e_back.states(), e.states());
    assert_eq!(e_back.n_states(), e.n_states());
}

#[test]
fn relation_and_certificate_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let game = build_grid(&demo_ten_by_ten()).unwrap();
    let aut = dra_from_template(&parse_ltl("GF tar & G !obs").unwrap()).unwrap();
    let product = build_product(&game, &aut).unwrap();
    let e = accepting_states(&product);
    let outcome = stackelberg_value_iteration(&product, &e, DEFAULT_TOL, DEFAULT_MAX_ITER);

    // A cheap capped fixed point is plenty for the format check.
    let mdp = {
        use privsyn::model::LabeledMdp;
        use privsyn::synthesis::best_response_adversary;
        let tau = best_response_adversary(&product, &outcome.policy, &e);
        LabeledMdp::from_product_policy(&product, &outcome.policy, &tau).unwrap()
    };
    let options = privsyn::privacy::FixpointOptions {
        cap: Some(0.0005),
        ..Default::default()
    };
    let fix = privsyn::privacy::f_tv_fixpoint_with(&mdp, 1.0, &options).unwrap();
    let relation =
        build_relation(&mdp, &outcome.policy, &e, 1.0, 1e-4, &fix.table, 1e-9).unwrap();
    assert!(!relation.is_empty());

    let relation_path = dir.path().join("relation.txt");
    save_relation(&relation_path, &relation).unwrap();
    let pairs = load_relation_pairs(&relation_path).unwrap();
    let expected: Vec<(usize, usize, f64)> = relation.pairs().collect();
    assert_eq!(pairs, expected);

    let cert = dp_certificate(&relation);
    let cert_path = dir.path().join("certificate.txt");
    save_certificate(&cert_path, &cert).unwrap();
    let cert_back = load_certificate(&cert_path).unwrap();
    assert_eq!(cert_back.epsilon, cert.epsilon);
    assert_eq!(cert_back.alpha, cert.alpha);
    assert_eq!(cert_back.m, cert.m);
    assert_eq!(cert_back.delta_min, cert.delta_min);
    assert_eq!(cert_back.pairs, cert.pairs);
}

#[test]
fn sweep_rows_round_trip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let rows = vec![
        SweepRow {
            epsilon: 0.1,
            delta: 1e-5,
            m: 1e-5 / (2.0 * 0.1f64.exp()),
            count: 1,
        },
        SweepRow {
            epsilon: 1.0,
            delta: 1e-3,
            m: 5e-4 / 1.0f64.exp(),
            count: 2,
        },
    ];
    let path = dir.path().join("sweep.csv");
    save_sweep(&path, &rows).unwrap();
    assert_eq!(load_sweep(&path).unwrap(), rows);
}

#[test]
fn missing_files_surface_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("absent.txt");
    assert!(matches!(load_game(&path), Err(FormatError::Io(_))));
    assert!(matches!(load_values(&path), Err(FormatError::Io(_))));
    assert!(matches!(load_sweep(&path), Err(FormatError::Io(_))));
}
