//! Dense two-phase simplex solver with Bland's rule, plus a front-end for
//! zero-sum matrix games.
//!
//! The solver targets the small programs that arise elsewhere in this crate
//! (per-state matrix games during value iteration and the skewed Kantorovich
//! programs of the privacy analysis). Everything is deterministic: entering
//! columns are chosen by lowest index among improving columns, leaving rows by
//! minimum ratio with ties broken by lowest basic-variable index, so identical
//! inputs produce bit-identical solutions.

use thiserror::Error;

/// Tolerance used when deciding whether a pivot candidate is acceptable.
pub const PIVOT_TOL: f64 = 1e-9;
/// Tolerance used when verifying a claimed solution against the constraints.
pub const VERIFY_TOL: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("objective has {objective} coefficients but constraint {index} has {found}")]
    DimensionMismatch {
        objective: usize,
        index: usize,
        found: usize,
    },
    #[error("bounds for variable {index} are invalid: [{lo}, {hi}]")]
    BadBounds { index: usize, lo: f64, hi: f64 },
    #[error("non-finite coefficient in {place}")]
    NonFinite { place: String },
    #[error("matrix game payoff must be rectangular and non-empty")]
    BadMatrix,
}

/// Direction of a single linear constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

/// One row `coeffs · x (sense) rhs` of a linear program.
#[derive(Debug, Clone)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A linear program `maximize objective · x` subject to constraint rows and
/// per-variable bounds. Bounds default to `[0, +inf)`; a lower bound of
/// `f64::NEG_INFINITY` makes the variable free below, an upper bound of
/// `f64::INFINITY` free above.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
    pub bounds: Vec<(f64, f64)>,
}

impl LinearProgram {
    /// Program maximizing `objective` with default bounds `[0, +inf)` and no
    /// constraints yet.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            objective,
            constraints: Vec::new(),
            bounds: vec![(0.0, f64::INFINITY); n],
        }
    }

    pub fn push(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint { coeffs, sense, rhs });
    }

    pub fn set_bounds(&mut self, var: usize, lo: f64, hi: f64) {
        self.bounds[var] = (lo, hi);
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::NonFinite {
                place: "objective".into(),
            });
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::DimensionMismatch {
                    objective: n,
                    index: i,
                    found: c.coeffs.len(),
                });
            }
            if c.coeffs.iter().any(|v| !v.is_finite()) || !c.rhs.is_finite() {
                return Err(LpError::NonFinite {
                    place: format!("constraint {i}"),
                });
            }
        }
        if self.bounds.len() != n {
            return Err(LpError::DimensionMismatch {
                objective: n,
                index: usize::MAX,
                found: self.bounds.len(),
            });
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY
            {
                return Err(LpError::BadBounds { index: i, lo, hi });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Result of [`solve`]. `value` and `point` are meaningful only when the
/// status is [`LpStatus::Optimal`]; otherwise `value` is NaN and `point` is
/// empty.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub status: LpStatus,
    pub value: f64,
    pub point: Vec<f64>,
}

impl LpSolution {
    fn non_optimal(status: LpStatus) -> Self {
        LpSolution {
            status,
            value: f64::NAN,
            point: Vec::new(),
        }
    }
}

/// How each original variable was rewritten into non-negative columns.
enum VarMap {
    /// `x = lo + y`, `y >= 0`.
    Shift { col: usize, lo: f64 },
    /// `x = hi - y`, `y >= 0` (used when only an upper bound is finite).
    Mirror { col: usize, hi: f64 },
    /// `x = y_pos - y_neg`, both non-negative (fully free variable).
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    n_cols: usize,
    maps: Vec<VarMap>,
    obj: Vec<f64>,
    rows: Vec<Constraint>,
}

/// Rewrite general bounds into non-negative columns plus extra `<=` rows.
fn standardize(lp: &LinearProgram) -> StandardForm {
    let n = lp.objective.len();
    let mut maps = Vec::with_capacity(n);
    let mut n_cols = 0usize;
    for &(lo, hi) in &lp.bounds {
        if lo.is_finite() {
            maps.push(VarMap::Shift { col: n_cols, lo });
            n_cols += 1;
        } else if hi.is_finite() {
            maps.push(VarMap::Mirror { col: n_cols, hi });
            n_cols += 1;
        } else {
            maps.push(VarMap::Split {
                pos: n_cols,
                neg: n_cols + 1,
            });
            n_cols += 2;
        }
    }

    let mut obj = vec![0.0; n_cols];
    for j in 0..n {
        let c = lp.objective[j];
        match maps[j] {
            VarMap::Shift { col, .. } => obj[col] = c,
            VarMap::Mirror { col, .. } => obj[col] = -c,
            VarMap::Split { pos, neg } => {
                obj[pos] = c;
                obj[neg] = -c;
            }
        }
    }

    let mut rows = Vec::with_capacity(lp.constraints.len() + n);
    let convert_row = |coeffs: &[f64], sense: Sense, rhs: f64| {
        let mut out = vec![0.0; n_cols];
        let mut shift = 0.0;
        for j in 0..n {
            let a = coeffs[j];
            if a == 0.0 {
                continue;
            }
            match maps[j] {
                VarMap::Shift { col, lo } => {
                    out[col] = a;
                    shift += a * lo;
                }
                VarMap::Mirror { col, hi } => {
                    out[col] = -a;
                    shift += a * hi;
                }
                VarMap::Split { pos, neg } => {
                    out[pos] = a;
                    out[neg] = -a;
                }
            }
        }
        Constraint {
            coeffs: out,
            sense,
            rhs: rhs - shift,
        }
    };

    for c in &lp.constraints {
        rows.push(convert_row(&c.coeffs, c.sense, c.rhs));
    }
    // Finite upper bounds on shifted variables become explicit rows.
    for j in 0..n {
        let (lo, hi) = lp.bounds[j];
        if lo.is_finite() && hi.is_finite() {
            let mut unit = vec![0.0; n];
            unit[j] = 1.0;
            rows.push(convert_row(&unit, Sense::Le, hi));
        }
    }

    StandardForm {
        n_cols,
        maps,
        obj,
        rows,
    }
}

enum CoreStatus {
    Optimal,
    Unbounded,
}

struct Tableau {
    /// `m` rows of `width` entries; the last entry of each row is the rhs.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width - 1]
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let piv = self.rows[pr][pc];
        for v in self.rows[pr].iter_mut() {
            *v /= piv;
        }
        for i in 0..self.rows.len() {
            if i == pr {
                continue;
            }
            let factor = self.rows[i][pc];
            if factor == 0.0 {
                continue;
            }
            for j in 0..self.width {
                let delta = factor * self.rows[pr][j];
                self.rows[i][j] -= delta;
            }
        }
        self.basis[pr] = pc;
    }

    /// Bland-rule simplex on the current tableau, maximizing `cost · columns`.
    /// Columns flagged in `banned` never enter the basis.
    fn run(&mut self, cost: &[f64], banned: &[bool]) -> CoreStatus {
        loop {
            let mut entering = None;
            for j in 0..self.width - 1 {
                if banned[j] {
                    continue;
                }
                let mut rc = cost[j];
                for i in 0..self.rows.len() {
                    let cb = cost[self.basis[i]];
                    if cb != 0.0 {
                        rc -= cb * self.rows[i][j];
                    }
                }
                if rc > PIVOT_TOL {
                    entering = Some(j);
                    break;
                }
            }
            let Some(pc) = entering else {
                return CoreStatus::Optimal;
            };

            let mut leaving: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][pc];
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i) / a;
                    let better = match leaving {
                        None => true,
                        Some((best_i, best_r)) => {
                            ratio < best_r - PIVOT_TOL
                                || (ratio <= best_r + PIVOT_TOL
                                    && self.basis[i] < self.basis[best_i])
                        }
                    };
                    if better {
                        leaving = Some((i, ratio));
                    }
                }
            }
            let Some((pr, _)) = leaving else {
                return CoreStatus::Unbounded;
            };
            self.pivot(pr, pc);
        }
    }
}

/// Solve a linear program by two-phase dense simplex.
///
/// Returns an error only for malformed input (dimension mismatches,
/// non-finite data, inverted bounds); infeasibility and unboundedness are
/// reported through the solution status.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let sf = standardize(lp);
    let m = sf.rows.len();
    let n = sf.n_cols;

    // Rows with negative rhs are negated up front so every rhs is
    // non-negative; the effective sense is the flipped one.
    let senses: Vec<Sense> = sf
        .rows
        .iter()
        .map(|r| {
            if r.rhs < 0.0 {
                match r.sense {
                    Sense::Le => Sense::Ge,
                    Sense::Ge => Sense::Le,
                    Sense::Eq => Sense::Eq,
                }
            } else {
                r.sense
            }
        })
        .collect();

    // Column layout: structural | slack/surplus | artificial | rhs.
    let mut n_slack = 0usize;
    let mut n_art = 0usize;
    for s in &senses {
        match s {
            Sense::Le => n_slack += 1,
            Sense::Ge => {
                n_slack += 1;
                n_art += 1;
            }
            Sense::Eq => n_art += 1,
        }
    }
    let width = n + n_slack + n_art + 1;
    let art_start = n + n_slack;

    let mut tab = Tableau {
        rows: vec![vec![0.0; width]; m],
        basis: vec![0; m],
        width,
    };
    let mut slack_at = n;
    let mut art_at = art_start;
    for (i, r) in sf.rows.iter().enumerate() {
        let sgn = if r.rhs < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            tab.rows[i][j] = sgn * r.coeffs[j];
        }
        tab.rows[i][width - 1] = sgn * r.rhs;
        match senses[i] {
            Sense::Le => {
                tab.rows[i][slack_at] = 1.0;
                tab.basis[i] = slack_at;
                slack_at += 1;
            }
            Sense::Ge => {
                tab.rows[i][slack_at] = -1.0;
                slack_at += 1;
                tab.rows[i][art_at] = 1.0;
                tab.basis[i] = art_at;
                art_at += 1;
            }
            Sense::Eq => {
                tab.rows[i][art_at] = 1.0;
                tab.basis[i] = art_at;
                art_at += 1;
            }
        }
    }

    // Phase 1: drive the artificial variables to zero.
    if art_at > art_start {
        let mut cost1 = vec![0.0; width - 1];
        for j in art_start..art_at {
            cost1[j] = -1.0;
        }
        let banned = vec![false; width - 1];
        match tab.run(&cost1, &banned) {
            CoreStatus::Optimal => {}
            CoreStatus::Unbounded => unreachable!("phase-1 objective is bounded above by 0"),
        }
        let infeas: f64 = (0..m)
            .filter(|&i| tab.basis[i] >= art_start)
            .map(|i| tab.rhs(i))
            .sum();
        if infeas > VERIFY_TOL {
            return Ok(LpSolution::non_optimal(LpStatus::Infeasible));
        }
        // Pivot basic artificials (stuck at zero) out where possible.
        for i in 0..m {
            if tab.basis[i] >= art_start {
                if let Some(j) = (0..art_start).find(|&j| tab.rows[i][j].abs() > PIVOT_TOL) {
                    tab.pivot(i, j);
                }
            }
        }
    }

    // Phase 2 with artificial columns banned from entering.
    let mut cost2 = vec![0.0; width - 1];
    cost2[..n].copy_from_slice(&sf.obj);
    let mut banned = vec![false; width - 1];
    for b in banned.iter_mut().take(art_at).skip(art_start) {
        *b = true;
    }
    if let CoreStatus::Unbounded = tab.run(&cost2, &banned) {
        return Ok(LpSolution::non_optimal(LpStatus::Unbounded));
    }

    let mut cols = vec![0.0; n];
    for i in 0..m {
        if tab.basis[i] < n {
            cols[tab.basis[i]] = tab.rhs(i);
        }
    }
    let mut point = vec![0.0; lp.objective.len()];
    for (j, map) in sf.maps.iter().enumerate() {
        point[j] = match *map {
            VarMap::Shift { col, lo } => lo + cols[col],
            VarMap::Mirror { col, hi } => hi - cols[col],
            VarMap::Split { pos, neg } => cols[pos] - cols[neg],
        };
    }
    let value = lp
        .objective
        .iter()
        .zip(&point)
        .map(|(c, x)| c * x)
        .sum::<f64>();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        value,
        point,
    })
}

/// Check a candidate point against every constraint and bound of `lp`.
/// Used by tests and by debug assertions on solver output.
pub fn satisfies(lp: &LinearProgram, point: &[f64], tol: f64) -> bool {
    if point.len() != lp.objective.len() {
        return false;
    }
    for c in &lp.constraints {
        let lhs: f64 = c.coeffs.iter().zip(point).map(|(a, x)| a * x).sum();
        let ok = match c.sense {
            Sense::Le => lhs <= c.rhs + tol,
            Sense::Ge => lhs >= c.rhs - tol,
            Sense::Eq => (lhs - c.rhs).abs() <= tol,
        };
        if !ok {
            return false;
        }
    }
    lp.bounds
        .iter()
        .zip(point)
        .all(|(&(lo, hi), &x)| x >= lo - tol && x <= hi + tol)
}

/// Solution of a zero-sum matrix game: the game value and a mixed strategy
/// for each side. Rows maximize, columns minimize.
#[derive(Debug, Clone)]
pub struct MatrixGameSolution {
    pub value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
}

/// Solve the zero-sum game `payoff[row][col]` by the standard LP formulation
/// with a free value variable: the row player maximizes `v` subject to
/// `p · A_col >= v` for every column and `p` a distribution; the column
/// player's strategy comes from the symmetric minimization program.
///
/// For degenerate games with several optimal strategies the returned vertex
/// is whatever Bland's rule lands on, deterministically.
pub fn solve_matrix_game(payoff: &[Vec<f64>]) -> Result<MatrixGameSolution, LpError> {
    let m = payoff.len();
    if m == 0 {
        return Err(LpError::BadMatrix);
    }
    let n = payoff[0].len();
    if n == 0 || payoff.iter().any(|r| r.len() != n) {
        return Err(LpError::BadMatrix);
    }
    if payoff.iter().flatten().any(|v| !v.is_finite()) {
        return Err(LpError::BadMatrix);
    }

    // Row program: variables (p_1..p_m, v), maximize v.
    let mut obj = vec![0.0; m + 1];
    obj[m] = 1.0;
    let mut row_lp = LinearProgram::new(obj);
    row_lp.set_bounds(m, f64::NEG_INFINITY, f64::INFINITY);
    for j in 0..n {
        let mut coeffs = vec![0.0; m + 1];
        for i in 0..m {
            coeffs[i] = payoff[i][j];
        }
        coeffs[m] = -1.0;
        row_lp.push(coeffs, Sense::Ge, 0.0);
    }
    row_lp.push(
        (0..m + 1).map(|i| if i < m { 1.0 } else { 0.0 }).collect(),
        Sense::Eq,
        1.0,
    );
    let row_sol = solve(&row_lp)?;
    debug_assert_eq!(row_sol.status, LpStatus::Optimal);

    // Column program: variables (q_1..q_n, w), maximize -w.
    let mut obj = vec![0.0; n + 1];
    obj[n] = -1.0;
    let mut col_lp = LinearProgram::new(obj);
    col_lp.set_bounds(n, f64::NEG_INFINITY, f64::INFINITY);
    for (i, row) in payoff.iter().enumerate() {
        let _ = i;
        let mut coeffs = vec![0.0; n + 1];
        coeffs[..n].copy_from_slice(row);
        coeffs[n] = -1.0;
        col_lp.push(coeffs, Sense::Le, 0.0);
    }
    col_lp.push(
        (0..n + 1).map(|j| if j < n { 1.0 } else { 0.0 }).collect(),
        Sense::Eq,
        1.0,
    );
    let col_sol = solve(&col_lp)?;
    debug_assert_eq!(col_sol.status, LpStatus::Optimal);

    let value = row_sol.point[m];
    debug_assert!(
        (value - col_sol.point[n]).abs() <= VERIFY_TOL * (1.0 + value.abs()),
        "primal and dual game values disagree"
    );
    Ok(MatrixGameSolution {
        value,
        row_strategy: row_sol.point[..m].to_vec(),
        col_strategy: col_sol.point[..n].to_vec(),
    })
}
