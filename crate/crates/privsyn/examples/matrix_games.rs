//! The zero-sum core that drives every value-iteration sweep: solve a few
//! matrix games, verify the saddle-point property of the returned mixed
//! strategies, and use the underlying simplex solver directly on a small
//! linear program.
//!
//! Run with: cargo run --release --example matrix_games

use privsyn::lp::Sense;
use privsyn::{solve, solve_matrix_game, LinearProgram};

/// Worst case for the row player mixing `p` over the rows of `payoff`.
fn row_guarantee(payoff: &[Vec<f64>], p: &[f64]) -> f64 {
    (0..payoff[0].len())
        .map(|j| (0..payoff.len()).map(|i| p[i] * payoff[i][j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

/// Worst case for the column player mixing `q` over the columns.
fn col_guarantee(payoff: &[Vec<f64>], q: &[f64]) -> f64 {
    payoff
        .iter()
        .map(|row| row.iter().zip(q).map(|(a, b)| a * b).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

fn show(name: &str, payoff: &[Vec<f64>]) {
    let sol = solve_matrix_game(payoff).expect("finite payoffs");
    println!("{name}:");
    for row in payoff {
        println!("  {row:?}");
    }
    println!(
        "  value {:.4}, row mix {:?}, column mix {:?}",
        sol.value,
        sol.row_strategy
            .iter()
            .map(|p| (p * 1e4).round() / 1e4)
            .collect::<Vec<_>>(),
        sol.col_strategy
            .iter()
            .map(|p| (p * 1e4).round() / 1e4)
            .collect::<Vec<_>>()
    );
    // Saddle point: the row mix guarantees at least the value against any
    // column, the column mix concedes at most the value against any row.
    let low = row_guarantee(payoff, &sol.row_strategy);
    let high = col_guarantee(payoff, &sol.col_strategy);
    println!(
        "  saddle check: row guarantee {:.6} <= value <= column concession {:.6}",
        low, high
    );
    assert!(low <= sol.value + 1e-9 && sol.value <= high + 1e-9);
}

fn main() {
    // Matching pennies, shifted into [0, 1]: no pure equilibrium, both
    // players mix evenly, value one half.
    show("matching pennies", &[vec![1.0, 0.0], vec![0.0, 1.0]]);

    // A game with a dominant row: the solver should put all mass on it and
    // the column player best-responds to that row alone.
    show(
        "dominated rows",
        &[vec![0.6, 0.8], vec![0.3, 0.1], vec![0.5, 0.5]],
    );

    // Rock-paper-scissors in [0, 1]: uniform mixes, value one half.
    show(
        "rock paper scissors",
        &[
            vec![0.5, 1.0, 0.0],
            vec![0.0, 0.5, 1.0],
            vec![1.0, 0.0, 0.5],
        ],
    );

    // The same machinery, used directly: maximize 3x + 2y subject to
    // x + 2y <= 4 and 3x + y <= 6 with x, y >= 0. The optimum sits at the
    // intersection of the two constraints, (8/5, 6/5), objective 36/5.
    let mut lp = LinearProgram::new(vec![3.0, 2.0]);
    lp.push(vec![1.0, 2.0], Sense::Le, 4.0);
    lp.push(vec![3.0, 1.0], Sense::Le, 6.0);
    let sol = solve(&lp).expect("feasible and bounded");
    println!(
        "direct LP: status {:?}, objective {:.4} at ({:.4}, {:.4})",
        sol.status, sol.value, sol.point[0], sol.point[1]
    );
    assert!((sol.value - 36.0 / 5.0).abs() < 1e-9);
}
