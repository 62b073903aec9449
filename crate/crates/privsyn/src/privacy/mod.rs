//! Privacy analysis of labeled trajectories: skewed distances, the skewed
//! Kantorovich lifting, and the fixed-point distance that upper-bounds how
//! well an eavesdropper watching label sequences can distinguish two start
//! states.
//!
//! The central object is the operator that maps a state distance table to a
//! new one: differently labeled states sit at distance 1, and equally
//! labeled states get the worst-case (over shared actions) Kantorovich
//! distance between their one-step successor distributions, skewed by
//! α = e^ε. Iterating from the bottom element (the label discrete metric)
//! converges to the least fixed point d*, which dominates the skewed total
//! variation between the label processes and therefore certifies
//! differential privacy budgets.

mod relation;

pub use relation::{
    build_relation, count_dp_trajectories, dp_certificate, prune_to_budget, DpCertificate,
    Relation, TrajectoryCount,
};

use crate::lp::{self, LinearProgram, LpStatus, Sense};
use crate::model::{AcceptingSet, InducedMarkovChain, LabeledMdp, ModelError};
use crate::synthesis::bellman_values_truncated;
use rayon::prelude::*;
use thiserror::Error;

/// Systems with at most this many states get the exact Kantorovich LP under
/// [`KantorovichMode::Auto`]; larger ones fall back to the support-restricted
/// upper bound, whose LPs stay small regardless of system size.
pub const AUTO_EXACT_MAX_STATES: usize = 32;

/// Hard ceiling on the horizon of [`empirical_tv_alpha`]: the word tree has
/// one branch per letter and depth equal to the horizon.
pub const EMPIRICAL_HORIZON_CAP: usize = 12;

/// Errors from privacy computations.
#[derive(Debug, Error)]
pub enum PrivacyError {
    #[error("skew parameter must be at least 1, got {alpha}")]
    BadAlpha { alpha: f64 },
    #[error("skew parameter {found} does not match the distance table's {expected}")]
    AlphaMismatch { expected: f64, found: f64 },
    #[error("{what} must be a probability distribution, got sum {sum}")]
    BadDistribution { what: &'static str, sum: f64 },
    #[error("{what} has a negative entry {value}")]
    NegativeMass { what: &'static str, value: f64 },
    #[error("distance entry ({s}, {s_prime}) = {value} is outside [0, 1] or breaks symmetry")]
    BadDistanceEntry { s: usize, s_prime: usize, value: f64 },
    #[error("{what}: expected {expected} states, got {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{what} = {value} must lie in {range}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("state index {state} out of range for {n} states")]
    StateOutOfRange { state: usize, n: usize },
    #[error("horizon {horizon} not in 1..={cap}")]
    BadHorizon { horizon: usize, cap: usize },
    #[error("reference trajectory is empty")]
    EmptyReference,
    #[error("reference trajectory has a zero-probability step into position {position}")]
    ImpossibleReference { position: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The skewed distance between two non-negative reals:
/// `max(x − αy, y − αx, 0)`. At α = 1 this is the absolute difference;
/// larger α forgives multiplicative deviations up to the factor α.
pub fn delta_alpha(x: f64, y: f64, alpha: f64) -> Result<f64, PrivacyError> {
    if !(alpha >= 1.0) {
        return Err(PrivacyError::BadAlpha { alpha });
    }
    Ok((x - alpha * y).max(y - alpha * x).max(0.0))
}

/// Symmetric per-pair state distances in `[0, 1]` together with the skew α
/// they were computed under.
#[derive(Debug, Clone)]
pub struct DistanceTable {
    alpha: f64,
    n: usize,
    values: Vec<f64>,
}

impl DistanceTable {
    /// The bottom element of the distance lattice for the given labeling:
    /// 1 across label classes, 0 within them.
    pub fn discrete(labels: &[usize], alpha: f64) -> Result<Self, PrivacyError> {
        if !(alpha >= 1.0) {
            return Err(PrivacyError::BadAlpha { alpha });
        }
        let n = labels.len();
        let mut values = vec![0.0; n * n];
        for s in 0..n {
            for t in 0..n {
                if labels[s] != labels[t] {
                    values[s * n + t] = 1.0;
                }
            }
        }
        Ok(DistanceTable { alpha, n, values })
    }

    /// Wrap a full `n × n` matrix, validating symmetry and the `[0, 1]`
    /// range.
    pub fn from_values(alpha: f64, n: usize, values: Vec<f64>) -> Result<Self, PrivacyError> {
        if !(alpha >= 1.0) {
            return Err(PrivacyError::BadAlpha { alpha });
        }
        if values.len() != n * n {
            return Err(PrivacyError::DimensionMismatch {
                what: "distance matrix",
                expected: n * n,
                found: values.len(),
            });
        }
        for s in 0..n {
            for t in 0..n {
                let v = values[s * n + t];
                if !v.is_finite() || !(0.0..=1.0).contains(&v) || v != values[t * n + s] {
                    return Err(PrivacyError::BadDistanceEntry {
                        s,
                        s_prime: t,
                        value: v,
                    });
                }
            }
        }
        Ok(DistanceTable { alpha, n, values })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn get(&self, s: usize, s_prime: usize) -> f64 {
        self.values[s * self.n + s_prime]
    }

    fn set_sym(&mut self, s: usize, s_prime: usize, value: f64) {
        self.values[s * self.n + s_prime] = value;
        self.values[s_prime * self.n + s] = value;
    }

    /// Largest absolute entry-wise difference to another table of the same
    /// size.
    pub fn sup_distance(&self, other: &DistanceTable) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// How the Kantorovich LP treats states outside the two supports.
///
/// `Exact` includes every state of each label class touched by the supports,
/// so zero-mass states can still relay slack between constraints.
/// `SupportRestricted` keeps only the support states; dropping constraints
/// can only enlarge the feasible region, so the result is a sound upper
/// bound on the exact distance (and the certificates built from it remain
/// valid, merely conservative). `Auto` picks `Exact` up to
/// [`AUTO_EXACT_MAX_STATES`] states and the restriction beyond.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KantorovichMode {
    Exact,
    SupportRestricted,
    Auto,
}

impl KantorovichMode {
    fn restricted_for(self, n_states: usize) -> bool {
        match self {
            KantorovichMode::Exact => false,
            KantorovichMode::SupportRestricted => true,
            KantorovichMode::Auto => n_states > AUTO_EXACT_MAX_STATES,
        }
    }
}

/// Maximize `Σ c_s x_s` subject to `x_s − αx_t ≤ d(s, t)` for ordered pairs
/// of `vars` and `0 ≤ x ≤ 1`. Constraints with `d ≥ 1` are skipped: they
/// are implied by the box bounds once α ≥ 1.
fn kantorovich_direction(vars: &[usize], coeff: &[f64], d: &DistanceTable, alpha: f64) -> f64 {
    if coeff.iter().all(|&c| c <= 0.0) {
        return 0.0;
    }
    let k = vars.len();
    let mut program = LinearProgram::new(coeff.to_vec());
    for i in 0..k {
        program.set_bounds(i, 0.0, 1.0);
    }
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let bound = d.get(vars[i], vars[j]);
            if bound >= 1.0 {
                continue;
            }
            let mut row = vec![0.0; k];
            row[i] = 1.0;
            row[j] = -alpha;
            program.push(row, Sense::Le, bound);
        }
    }
    let solution = lp::solve(&program).expect("Kantorovich LP is well-formed");
    assert_eq!(
        solution.status,
        LpStatus::Optimal,
        "Kantorovich LP is feasible at the origin and bounded by the box"
    );
    solution.value
}

/// Exact skewed Kantorovich distance between two dense distributions under
/// the state distances `d`: the larger of the two LP directions, clamped to
/// `[0, 1]`.
pub fn skewed_kantorovich(
    omega: &[f64],
    omega_prime: &[f64],
    d: &DistanceTable,
    alpha: f64,
) -> Result<f64, PrivacyError> {
    if !(alpha >= 1.0) {
        return Err(PrivacyError::BadAlpha { alpha });
    }
    if (alpha - d.alpha()).abs() > 1e-12 {
        return Err(PrivacyError::AlphaMismatch {
            expected: d.alpha(),
            found: alpha,
        });
    }
    for (what, dist) in [("omega", omega), ("omega_prime", omega_prime)] {
        if dist.len() != d.n_states() {
            return Err(PrivacyError::DimensionMismatch {
                what,
                expected: d.n_states(),
                found: dist.len(),
            });
        }
        if let Some(&bad) = dist.iter().find(|&&p| p < 0.0 || !p.is_finite()) {
            return Err(PrivacyError::NegativeMass { what, value: bad });
        }
        let sum: f64 = dist.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(PrivacyError::BadDistribution { what, sum });
        }
    }
    if omega == omega_prime {
        return Ok(0.0);
    }
    let vars: Vec<usize> = (0..d.n_states()).collect();
    let forward: Vec<f64> = (0..vars.len())
        .map(|s| omega[s] - alpha * omega_prime[s])
        .collect();
    let backward: Vec<f64> = (0..vars.len())
        .map(|s| omega_prime[s] - alpha * omega[s])
        .collect();
    let value = kantorovich_direction(&vars, &forward, d, alpha)
        .max(kantorovich_direction(&vars, &backward, d, alpha));
    Ok(value.clamp(0.0, 1.0))
}

/// Skewed Kantorovich distance between two sparse successor rows.
///
/// Cross-class constraints are vacuous (distance 1 across label classes),
/// so the LP decomposes into one independent program per label class and
/// the class optima add up. In exact mode each touched class contributes
/// all its member states; in restricted mode only the supports.
fn kantorovich_rows(
    row_a: &[(usize, f64)],
    row_b: &[(usize, f64)],
    d: &DistanceTable,
    alpha: f64,
    labels: &[usize],
    class_members: &[Vec<usize>],
    restricted: bool,
) -> f64 {
    if row_a == row_b {
        return 0.0;
    }
    let mut support: Vec<usize> = row_a.iter().chain(row_b).map(|&(t, _)| t).collect();
    support.sort_unstable();
    support.dedup();

    let mut touched_classes: Vec<usize> = support.iter().map(|&t| labels[t]).collect();
    touched_classes.sort_unstable();
    touched_classes.dedup();

    let n = d.n_states();
    let mut weight_a = vec![0.0; n];
    for &(t, p) in row_a {
        weight_a[t] += p;
    }
    let mut weight_b = vec![0.0; n];
    for &(t, p) in row_b {
        weight_b[t] += p;
    }

    let mut forward = 0.0;
    let mut backward = 0.0;
    for &class in &touched_classes {
        let vars: Vec<usize> = if restricted {
            support
                .iter()
                .copied()
                .filter(|&t| labels[t] == class)
                .collect()
        } else {
            class_members[class].clone()
        };
        let cf: Vec<f64> = vars
            .iter()
            .map(|&t| weight_a[t] - alpha * weight_b[t])
            .collect();
        let cb: Vec<f64> = vars
            .iter()
            .map(|&t| weight_b[t] - alpha * weight_a[t])
            .collect();
        forward += kantorovich_direction(&vars, &cf, d, alpha);
        backward += kantorovich_direction(&vars, &cb, d, alpha);
    }
    forward.max(backward).clamp(0.0, 1.0)
}

/// States with each label, indexed by label id.
fn label_classes(labels: &[usize], n_props: usize) -> Vec<Vec<usize>> {
    let mut classes = vec![Vec::new(); n_props];
    for (s, &l) in labels.iter().enumerate() {
        classes[l].push(s);
    }
    classes
}

/// One application of the distance operator to `(s, s')`: 1 across labels
/// or with no shared action, otherwise the worst shared-action Kantorovich
/// distance between the two successor rows.
fn pair_distance(
    mdp: &LabeledMdp,
    d: &DistanceTable,
    alpha: f64,
    class_members: &[Vec<usize>],
    restricted: bool,
    s: usize,
    s_prime: usize,
) -> f64 {
    let labels = mdp.labels();
    if labels[s] != labels[s_prime] {
        return 1.0;
    }
    let menu_a = mdp.menu(s);
    let menu_b = mdp.menu(s_prime);
    let mut best: Option<f64> = None;
    let (mut i, mut j) = (0, 0);
    while i < menu_a.len() && j < menu_b.len() {
        let (action_a, row_a) = &menu_a[i];
        let (action_b, row_b) = &menu_b[j];
        match action_a.cmp(action_b) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let value =
                    kantorovich_rows(row_a, row_b, d, alpha, labels, class_members, restricted);
                best = Some(best.map_or(value, |b: f64| b.max(value)));
                i += 1;
                j += 1;
            }
        }
    }
    best.unwrap_or(1.0)
}

fn check_step_inputs(
    d: &DistanceTable,
    mdp: &LabeledMdp,
    alpha: f64,
) -> Result<(), PrivacyError> {
    if !(alpha >= 1.0) {
        return Err(PrivacyError::BadAlpha { alpha });
    }
    if (alpha - d.alpha()).abs() > 1e-12 {
        return Err(PrivacyError::AlphaMismatch {
            expected: d.alpha(),
            found: alpha,
        });
    }
    if d.n_states() != mdp.n_states() {
        return Err(PrivacyError::DimensionMismatch {
            what: "distance table",
            expected: mdp.n_states(),
            found: d.n_states(),
        });
    }
    Ok(())
}

/// One sweep of the distance operator over all state pairs, with the mode
/// chosen automatically from the system size.
pub fn f_tv_step(
    d: &DistanceTable,
    mdp: &LabeledMdp,
    alpha: f64,
) -> Result<DistanceTable, PrivacyError> {
    f_tv_step_with_mode(d, mdp, alpha, KantorovichMode::Auto)
}

/// One sweep of the distance operator with an explicit Kantorovich mode.
/// Pairwise LPs are independent and run in parallel against the frozen
/// input table.
pub fn f_tv_step_with_mode(
    d: &DistanceTable,
    mdp: &LabeledMdp,
    alpha: f64,
    mode: KantorovichMode,
) -> Result<DistanceTable, PrivacyError> {
    check_step_inputs(d, mdp, alpha)?;
    let n = mdp.n_states();
    let restricted = mode.restricted_for(n);
    let classes = label_classes(mdp.labels(), mdp.props().len());
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|s| ((s + 1)..n).map(move |t| (s, t)))
        .collect();
    let computed: Vec<f64> = pairs
        .par_iter()
        .map(|&(s, t)| pair_distance(mdp, d, alpha, &classes, restricted, s, t))
        .collect();
    let mut out = DistanceTable {
        alpha,
        n,
        values: vec![0.0; n * n],
    };
    for (&(s, t), &v) in pairs.iter().zip(&computed) {
        out.set_sym(s, t, v);
    }
    Ok(out)
}

/// Converged fixed-point distances plus termination information.
#[derive(Debug, Clone)]
pub struct FixpointOutcome {
    pub table: DistanceTable,
    pub converged: bool,
    pub iterations: usize,
}

/// Controls for [`f_tv_fixpoint_with`].
///
/// `cap`: entries proven to exceed the cap are rounded up to 1. Raising
/// entries keeps every subsequent sweep an upper bound (the operator is
/// monotone), so certificates stay sound; it only coarsens pairs that were
/// already beyond any budget of interest, while the pairs below the cap
/// keep converging exactly and the sweep cost collapses onto them.
#[derive(Debug, Clone)]
pub struct FixpointOptions {
    pub mode: KantorovichMode,
    pub cap: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FixpointOptions {
    fn default() -> Self {
        FixpointOptions {
            mode: KantorovichMode::Auto,
            cap: None,
            tol: 1e-9,
            max_iter: 1000,
        }
    }
}

/// Least-fixed-point distances: iterate the operator from the label
/// discrete metric until the sup-norm change drops below `tol`.
pub fn f_tv_fixpoint(
    mdp: &LabeledMdp,
    alpha: f64,
    tol: f64,
    max_iter: usize,
) -> Result<FixpointOutcome, PrivacyError> {
    f_tv_fixpoint_with(
        mdp,
        alpha,
        &FixpointOptions {
            tol,
            max_iter,
            ..FixpointOptions::default()
        },
    )
}

/// Least-fixed-point distances with explicit mode, cap, and tolerances.
pub fn f_tv_fixpoint_with(
    mdp: &LabeledMdp,
    alpha: f64,
    options: &FixpointOptions,
) -> Result<FixpointOutcome, PrivacyError> {
    assert!(options.tol > 0.0, "tolerance must be positive");
    let n = mdp.n_states();
    let mut current = DistanceTable::discrete(mdp.labels(), alpha)?;
    check_step_inputs(&current, mdp, alpha)?;
    let restricted = options.mode.restricted_for(n);
    let classes = label_classes(mdp.labels(), mdp.props().len());
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|s| ((s + 1)..n).map(move |t| (s, t)))
        .collect();

    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iter {
        iterations += 1;
        let computed: Vec<f64> = pairs
            .par_iter()
            .map(|&(s, t)| {
                let old = current.get(s, t);
                if old >= 1.0 {
                    // The chain from the bottom element is non-decreasing
                    // and capped at 1, so saturated entries are final.
                    return 1.0;
                }
                let mut v =
                    pair_distance(mdp, &current, alpha, &classes, restricted, s, t);
                // Enforce the theoretical monotonicity of the chain against
                // LP roundoff.
                v = v.max(old);
                if let Some(cap) = options.cap {
                    if v > cap {
                        v = 1.0;
                    }
                }
                v
            })
            .collect();
        let mut delta = 0.0f64;
        for (&(s, t), &v) in pairs.iter().zip(&computed) {
            delta = delta.max((v - current.get(s, t)).abs());
            current.set_sym(s, t, v);
        }
        if delta < options.tol {
            converged = true;
            break;
        }
    }
    Ok(FixpointOutcome {
        table: current,
        converged,
        iterations,
    })
}

/// Result of [`value_gap_check`]: the largest signed excess of the value
/// gap over the iterated distance, which a correct implementation keeps at
/// or below zero.
#[derive(Debug, Clone)]
pub struct GapReport {
    pub max_violation: f64,
    pub worst_pair: Option<(usize, usize)>,
    pub worst_level: usize,
    pub levels_checked: usize,
}

/// Verify, for every pair and every truncation level `k ≤ n`, that the
/// skewed gap between the k-sweep Bellman values is dominated by the
/// k-fold application of the distance operator to the bottom element.
///
/// The domination is guaranteed when every state offers the same action
/// menu and the target set is a union of label classes, the shape in which
/// the result is stated. The operator couples equal actions across the
/// pair, so an action available on only one side can raise that side's
/// value while leaving the distance untouched; likewise a target state
/// sharing its label with a non-target state can hide a unit value gap
/// behind a small distance. On inputs outside that shape a positive report
/// is a property of the input, not of the implementation.
pub fn value_gap_check(
    mdp: &LabeledMdp,
    e: &AcceptingSet,
    alpha: f64,
    n: usize,
) -> Result<GapReport, PrivacyError> {
    let states = mdp.n_states();
    let mut table = DistanceTable::discrete(mdp.labels(), alpha)?;
    let mut max_violation = f64::NEG_INFINITY;
    let mut worst_pair = None;
    let mut worst_level = 0;
    for level in 0..=n {
        let values = bellman_values_truncated(mdp, e, level);
        for s in 0..states {
            for t in (s + 1)..states {
                let gap = delta_alpha(values[s], values[t], alpha)?;
                let violation = gap - table.get(s, t);
                if violation > max_violation {
                    max_violation = violation;
                    worst_pair = Some((s, t));
                    worst_level = level;
                }
            }
        }
        if level < n {
            table = f_tv_step(&table, mdp, alpha)?;
        }
    }
    if !max_violation.is_finite() {
        max_violation = 0.0;
        worst_pair = None;
    }
    Ok(GapReport {
        max_violation,
        worst_pair,
        worst_level,
        levels_checked: n + 1,
    })
}

/// Exact skewed total variation between the two label-word distributions up
/// to the given horizon: the sum over words of the positive skewed excess,
/// maximized over the two directions. Non-decreasing in the horizon and a
/// lower bound on the limiting trajectory distance.
pub fn empirical_tv_alpha(
    chain: &InducedMarkovChain,
    s: usize,
    s_prime: usize,
    alpha: f64,
    horizon: usize,
) -> Result<f64, PrivacyError> {
    if !(alpha >= 1.0) {
        return Err(PrivacyError::BadAlpha { alpha });
    }
    let n = chain.n_states();
    for state in [s, s_prime] {
        if state >= n {
            return Err(PrivacyError::StateOutOfRange { state, n });
        }
    }
    if horizon == 0 || horizon > EMPIRICAL_HORIZON_CAP {
        return Err(PrivacyError::BadHorizon {
            horizon,
            cap: EMPIRICAL_HORIZON_CAP,
        });
    }
    if s == s_prime {
        return Ok(0.0);
    }

    let letters = chain.props().len();
    let mut forward = 0.0f64;
    let mut backward = 0.0f64;

    // Depth-first over label words, propagating the mass vectors of both
    // start states and pruning branches both have left.
    fn descend(
        chain: &InducedMarkovChain,
        letters: usize,
        alpha: f64,
        depth_left: usize,
        mass_a: &[f64],
        mass_b: &[f64],
        forward: &mut f64,
        backward: &mut f64,
    ) {
        if depth_left == 0 {
            let total_a: f64 = mass_a.iter().sum();
            let total_b: f64 = mass_b.iter().sum();
            *forward += (total_a - alpha * total_b).max(0.0);
            *backward += (total_b - alpha * total_a).max(0.0);
            return;
        }
        let n = chain.n_states();
        for letter in 0..letters {
            let mut next_a = vec![0.0; n];
            let mut next_b = vec![0.0; n];
            let mut any = false;
            for u in 0..n {
                if mass_a[u] > 0.0 {
                    for &(t, p) in chain.successors(u) {
                        if chain.label(t) == letter {
                            next_a[t] += mass_a[u] * p;
                            any = true;
                        }
                    }
                }
                if mass_b[u] > 0.0 {
                    for &(t, p) in chain.successors(u) {
                        if chain.label(t) == letter {
                            next_b[t] += mass_b[u] * p;
                            any = true;
                        }
                    }
                }
            }
            if any {
                descend(
                    chain, letters, alpha, depth_left - 1, &next_a, &next_b, forward, backward,
                );
            }
        }
    }

    // The first letter of a word from a state is that state's own label.
    for letter in 0..letters {
        let mut seed_a = vec![0.0; n];
        let mut seed_b = vec![0.0; n];
        if chain.label(s) == letter {
            seed_a[s] = 1.0;
        }
        if chain.label(s_prime) == letter {
            seed_b[s_prime] = 1.0;
        }
        if seed_a[s] > 0.0 || seed_b[s_prime] > 0.0 {
            descend(
                chain,
                letters,
                alpha,
                horizon - 1,
                &seed_a,
                &seed_b,
                &mut forward,
                &mut backward,
            );
        }
    }
    Ok(forward.max(backward).clamp(0.0, 1.0))
}
