//! Plain-text file formats for every artifact the tool reads or writes:
//! games, Rabin automata, grid specs, policies, value tables, accepting-set
//! listings, relations, certificates, and sweep CSVs.
//!
//! The line-oriented formats are whitespace-delimited and allow `#` comments
//! and blank lines anywhere; parse errors carry 1-based line numbers. CSV
//! outputs always start with a header row. Floating-point fields are written
//! with 17 significant digits so that parsing them back reproduces the exact
//! bit pattern.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::gridworld::{GridError, GridSpec};
use crate::model::{
    AcceptingSet, MixedPolicy, ModelError, RabinAutomaton, RabinPair, StochasticGame,
};
use crate::privacy::{DpCertificate, Relation};

/// Errors raised while reading or writing artifact files.
#[derive(Debug, Error)]
pub enum FormatError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    /// A malformed line, with its 1-based line number.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    /// The file ended without providing a required element.
    #[error("incomplete file: {0}")]
    Incomplete(String),
    /// A name that cannot survive a whitespace-delimited file.
    #[error("name `{0}` cannot appear in a whitespace-delimited file")]
    UnwritableName(String),
    /// Arguments supplied alongside the file contents do not fit them.
    #[error("inconsistent arguments: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

fn fail<T>(line: usize, message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError::Parse {
        line,
        message: message.into(),
    })
}

/// Full-precision rendering of a float: 17 significant digits, enough for the
/// exact bit pattern to survive a round trip through text.
fn full(v: f64) -> String {
    format!("{v:.16e}")
}

/// Lines with content, as `(1-based line number, trimmed body)`, after
/// stripping `#` comments and skipping blanks.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(idx, raw)| {
        let body = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let body = body.trim();
        if body.is_empty() {
            None
        } else {
            Some((idx + 1, body))
        }
    })
}

fn parse_num<T: std::str::FromStr>(line: usize, what: &str, token: &str) -> Result<T, FormatError> {
    token.parse::<T>().map_err(|_| FormatError::Parse {
        line,
        message: format!("cannot parse {what} from `{token}`"),
    })
}

/// Resolve a token naming an entry of `names`, accepting either the name
/// itself or a numeric index. Names win over indices, so an entry literally
/// named `1` still round-trips.
fn resolve(line: usize, what: &str, names: &[String], token: &str) -> Result<usize, FormatError> {
    if let Some(i) = names.iter().position(|n| n == token) {
        return Ok(i);
    }
    match token.parse::<usize>() {
        Ok(i) if i < names.len() => Ok(i),
        _ => fail(line, format!("unknown {what} `{token}`")),
    }
}

fn check_token(name: &str) -> Result<(), FormatError> {
    if name.is_empty() || name.contains(char::is_whitespace) || name.contains('#') {
        Err(FormatError::UnwritableName(name.to_string()))
    } else {
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Game files
// ---------------------------------------------------------------------------

/// Parse a game file: header lines `states N`, `def_actions ...`,
/// `adv_actions ...`, `props ...` (each exactly once, any order), one
/// `label s prop` line per state, and `t s u_def u_adv s' prob` transition
/// lines. Omitted probabilities are zero. Actions and propositions may be
/// referred to by name or by index.
pub fn parse_game(text: &str) -> Result<StochasticGame, FormatError> {
    let lines: Vec<(usize, Vec<&str>)> = content_lines(text)
        .map(|(n, body)| (n, body.split_whitespace().collect()))
        .collect();

    let mut n_states: Option<usize> = None;
    let mut def_actions: Option<Vec<String>> = None;
    let mut adv_actions: Option<Vec<String>> = None;
    let mut props: Option<Vec<String>> = None;
    for (n, toks) in &lines {
        match toks[0] {
            "states" => {
                if n_states.is_some() {
                    return fail(*n, "duplicate `states` line");
                }
                if toks.len() != 2 {
                    return fail(*n, "expected `states N`");
                }
                n_states = Some(parse_num::<usize>(*n, "state count", toks[1])?);
            }
            key @ ("def_actions" | "adv_actions" | "props") => {
                let names: Vec<String> = toks[1..].iter().map(|t| t.to_string()).collect();
                if names.is_empty() {
                    return fail(*n, format!("`{key}` needs at least one name"));
                }
                let slot = match key {
                    "def_actions" => &mut def_actions,
                    "adv_actions" => &mut adv_actions,
                    _ => &mut props,
                };
                if slot.is_some() {
                    return fail(*n, format!("duplicate `{key}` line"));
                }
                *slot = Some(names);
            }
            "label" | "t" => {}
            other => return fail(*n, format!("unknown keyword `{other}`")),
        }
    }
    let n_states =
        n_states.ok_or_else(|| FormatError::Incomplete("missing `states` line".into()))?;
    let def_actions =
        def_actions.ok_or_else(|| FormatError::Incomplete("missing `def_actions` line".into()))?;
    let adv_actions =
        adv_actions.ok_or_else(|| FormatError::Incomplete("missing `adv_actions` line".into()))?;
    let props = props.ok_or_else(|| FormatError::Incomplete("missing `props` line".into()))?;

    let mut labels: Vec<Option<usize>> = vec![None; n_states];
    let mut entries = Vec::new();
    for (n, toks) in &lines {
        match toks[0] {
            "label" => {
                if toks.len() != 3 {
                    return fail(*n, "expected `label s prop`");
                }
                let s = parse_num::<usize>(*n, "state index", toks[1])?;
                if s >= n_states {
                    return fail(*n, format!("state {s} out of range (states {n_states})"));
                }
                let p = resolve(*n, "proposition", &props, toks[2])?;
                if labels[s].is_some() {
                    return fail(*n, format!("duplicate label for state {s}"));
                }
                labels[s] = Some(p);
            }
            "t" => {
                if toks.len() != 6 {
                    return fail(*n, "expected `t s u_def u_adv s' prob`");
                }
                let s = parse_num::<usize>(*n, "state index", toks[1])?;
                let ud = resolve(*n, "defender action", &def_actions, toks[2])?;
                let ua = resolve(*n, "adversary action", &adv_actions, toks[3])?;
                let t = parse_num::<usize>(*n, "successor index", toks[4])?;
                let p = parse_num::<f64>(*n, "probability", toks[5])?;
                entries.push((s, ud, ua, t, p));
            }
            _ => {}
        }
    }
    let labels = labels
        .into_iter()
        .enumerate()
        .map(|(s, l)| l.ok_or_else(|| FormatError::Incomplete(format!("state {s} has no label line"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(StochasticGame::from_entries(
        def_actions,
        adv_actions,
        props,
        labels,
        &entries,
    )?)
}

/// Render a game in the format accepted by [`parse_game`]. Fails if any
/// action or proposition name would not survive a whitespace-delimited file.
pub fn render_game(game: &StochasticGame) -> Result<String, FormatError> {
    for name in game
        .def_actions()
        .iter()
        .chain(game.adv_actions())
        .chain(game.props())
    {
        check_token(name)?;
    }
    let mut out = String::new();
    writeln!(out, "states {}", game.n_states()).unwrap();
    writeln!(out, "def_actions {}", game.def_actions().join(" ")).unwrap();
    writeln!(out, "adv_actions {}", game.adv_actions().join(" ")).unwrap();
    writeln!(out, "props {}", game.props().join(" ")).unwrap();
    for s in 0..game.n_states() {
        writeln!(out, "label {} {}", s, game.props()[game.label(s)]).unwrap();
    }
    for (s, ud, ua, t, p) in game.entries() {
        writeln!(
            out,
            "t {} {} {} {} {}",
            s,
            game.def_actions()[ud],
            game.adv_actions()[ua],
            t,
            full(p)
        )
        .unwrap();
    }
    Ok(out)
}

pub fn load_game(path: impl AsRef<Path>) -> Result<StochasticGame, FormatError> {
    parse_game(&fs::read_to_string(path)?)
}

pub fn save_game(path: impl AsRef<Path>, game: &StochasticGame) -> Result<(), FormatError> {
    fs::write(path, render_game(game)?)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Automaton files
// ---------------------------------------------------------------------------

/// Parse an automaton file: `aut_states N`, `initial q0`, `step q letter q'`
/// lines, and `pair i L: q.. K: q..` acceptance lines. The letter position
/// may be `*`, declaring a wildcard successor for any letter the state has no
/// explicit step for. Letters are numbered in order of first appearance. Pair
/// indices must cover `0..n_pairs` exactly once each.
pub fn parse_dra(text: &str) -> Result<RabinAutomaton, FormatError> {
    let lines: Vec<(usize, Vec<&str>)> = content_lines(text)
        .map(|(n, body)| (n, body.split_whitespace().collect()))
        .collect();

    let mut n_states: Option<usize> = None;
    let mut initial: Option<usize> = None;
    let mut letters: Vec<String> = Vec::new();
    let mut steps: Vec<(usize, usize, Option<usize>, usize)> = Vec::new();
    let mut pairs_raw: Vec<(usize, usize, RabinPair)> = Vec::new();
    for (n, toks) in &lines {
        match toks[0] {
            "aut_states" => {
                if n_states.is_some() {
                    return fail(*n, "duplicate `aut_states` line");
                }
                if toks.len() != 2 {
                    return fail(*n, "expected `aut_states N`");
                }
                n_states = Some(parse_num::<usize>(*n, "state count", toks[1])?);
            }
            "initial" => {
                if initial.is_some() {
                    return fail(*n, "duplicate `initial` line");
                }
                if toks.len() != 2 {
                    return fail(*n, "expected `initial q0`");
                }
                initial = Some(parse_num::<usize>(*n, "initial state", toks[1])?);
            }
            "step" => {
                if toks.len() != 4 {
                    return fail(*n, "expected `step q letter q'`");
                }
                let q = parse_num::<usize>(*n, "source state", toks[1])?;
                let target = parse_num::<usize>(*n, "target state", toks[3])?;
                let letter = if toks[2] == "*" {
                    None
                } else {
                    Some(match letters.iter().position(|l| l == toks[2]) {
                        Some(i) => i,
                        None => {
                            letters.push(toks[2].to_string());
                            letters.len() - 1
                        }
                    })
                };
                steps.push((*n, q, letter, target));
            }
            "pair" => {
                if toks.len() < 4 {
                    return fail(*n, "expected `pair i L: .. K: ..`");
                }
                let idx = parse_num::<usize>(*n, "pair index", toks[1])?;
                if toks[2] != "L:" {
                    return fail(*n, "expected `L:` after the pair index");
                }
                let mut l_states = Vec::new();
                let mut k_states = Vec::new();
                let mut in_k = false;
                for tok in &toks[3..] {
                    if *tok == "K:" {
                        if in_k {
                            return fail(*n, "duplicate `K:` marker");
                        }
                        in_k = true;
                    } else {
                        let q = parse_num::<usize>(*n, "pair state", tok)?;
                        if in_k {
                            k_states.push(q);
                        } else {
                            l_states.push(q);
                        }
                    }
                }
                if !in_k {
                    return fail(*n, "missing `K:` marker");
                }
                pairs_raw.push((*n, idx, RabinPair::new(l_states, k_states)));
            }
            other => return fail(*n, format!("unknown keyword `{other}`")),
        }
    }
    let n_states =
        n_states.ok_or_else(|| FormatError::Incomplete("missing `aut_states` line".into()))?;
    let initial =
        initial.ok_or_else(|| FormatError::Incomplete("missing `initial` line".into()))?;

    let mut delta = vec![vec![None; letters.len()]; n_states];
    let mut fallback = vec![None; n_states];
    for (n, q, letter, target) in steps {
        if q >= n_states || target >= n_states {
            return fail(n, format!("step state out of range (aut_states {n_states})"));
        }
        let slot = match letter {
            Some(l) => &mut delta[q][l],
            None => &mut fallback[q],
        };
        if slot.is_some() {
            return fail(n, "duplicate step for this state and letter");
        }
        *slot = Some(target);
    }

    pairs_raw.sort_by_key(|&(_, idx, _)| idx);
    for (slot, &(n, idx, _)) in pairs_raw.iter().enumerate() {
        if idx != slot {
            return fail(
                n,
                format!("pair indices must cover 0..{} exactly once", pairs_raw.len()),
            );
        }
    }
    let pairs = pairs_raw.into_iter().map(|(_, _, p)| p).collect();
    Ok(RabinAutomaton::new(
        n_states, initial, letters, delta, fallback, pairs,
    )?)
}

/// Render an automaton in the format accepted by [`parse_dra`]. Explicit
/// steps come first in letter order, then any wildcard steps.
pub fn render_dra(aut: &RabinAutomaton) -> Result<String, FormatError> {
    for letter in aut.letters() {
        check_token(letter)?;
        if letter == "*" {
            return Err(FormatError::UnwritableName("*".into()));
        }
    }
    let mut out = String::new();
    writeln!(out, "aut_states {}", aut.n_states()).unwrap();
    writeln!(out, "initial {}", aut.initial()).unwrap();
    for q in 0..aut.n_states() {
        for (l, letter) in aut.letters().iter().enumerate() {
            if let Some(target) = aut.explicit_step(q, l) {
                writeln!(out, "step {} {} {}", q, letter, target).unwrap();
            }
        }
        if let Some(target) = aut.wildcard(q) {
            writeln!(out, "step {} * {}", q, target).unwrap();
        }
    }
    for (i, pair) in aut.pairs().iter().enumerate() {
        let l_list: Vec<String> = pair.l_states.iter().map(|q| q.to_string()).collect();
        let k_list: Vec<String> = pair.k_states.iter().map(|q| q.to_string()).collect();
        writeln!(
            out,
            "pair {} L: {} K: {}",
            i,
            l_list.join(" "),
            k_list.join(" ")
        )
        .unwrap();
    }
    // Collapse double spaces left by empty L or K lists so the output stays
    // tidy; the parser does not care either way.
    Ok(out.replace("  ", " ").replace(" \n", "\n"))
}

pub fn load_dra(path: impl AsRef<Path>) -> Result<RabinAutomaton, FormatError> {
    parse_dra(&fs::read_to_string(path)?)
}

pub fn save_dra(path: impl AsRef<Path>, aut: &RabinAutomaton) -> Result<(), FormatError> {
    fs::write(path, render_dra(aut)?)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Grid spec files
// ---------------------------------------------------------------------------

/// Parse a grid spec file: a leading `grid M N` line declaring an M-wide,
/// N-tall grid, then any number of `target x y` and `obstacle x y` lines and
/// optional `p_nominal v` / `p_attack v` overrides.
pub fn parse_grid_spec(text: &str) -> Result<GridSpec, FormatError> {
    let mut spec: Option<GridSpec> = None;
    for (n, body) in content_lines(text) {
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks[0] {
            "grid" => {
                if spec.is_some() {
                    return fail(n, "duplicate `grid` line");
                }
                if toks.len() != 3 {
                    return fail(n, "expected `grid M N`");
                }
                let width = parse_num::<usize>(n, "grid width", toks[1])?;
                let height = parse_num::<usize>(n, "grid height", toks[2])?;
                spec = Some(GridSpec::new(width, height));
            }
            key @ ("target" | "obstacle") => {
                let Some(spec) = spec.as_mut() else {
                    return fail(n, "`grid M N` must come before cell lines");
                };
                if toks.len() != 3 {
                    return fail(n, format!("expected `{key} x y`"));
                }
                let x = parse_num::<usize>(n, "cell x", toks[1])?;
                let y = parse_num::<usize>(n, "cell y", toks[2])?;
                if key == "target" {
                    spec.targets.push((x, y));
                } else {
                    spec.obstacles.push((x, y));
                }
            }
            key @ ("p_nominal" | "p_attack") => {
                let Some(spec) = spec.as_mut() else {
                    return fail(n, "`grid M N` must come before probability lines");
                };
                if toks.len() != 2 {
                    return fail(n, format!("expected `{key} v`"));
                }
                let v = parse_num::<f64>(n, "probability", toks[1])?;
                if key == "p_nominal" {
                    spec.p_nominal = v;
                } else {
                    spec.p_attack = v;
                }
            }
            other => return fail(n, format!("unknown keyword `{other}`")),
        }
    }
    let spec = spec.ok_or_else(|| FormatError::Incomplete("missing `grid M N` line".into()))?;
    spec.validate()?;
    Ok(spec)
}

/// Render a grid spec in the format accepted by [`parse_grid_spec`].
pub fn render_grid_spec(spec: &GridSpec) -> String {
    let mut out = String::new();
    writeln!(out, "grid {} {}", spec.width, spec.height).unwrap();
    for &(x, y) in &spec.targets {
        writeln!(out, "target {} {}", x, y).unwrap();
    }
    for &(x, y) in &spec.obstacles {
        writeln!(out, "obstacle {} {}", x, y).unwrap();
    }
    writeln!(out, "p_nominal {}", full(spec.p_nominal)).unwrap();
    writeln!(out, "p_attack {}", full(spec.p_attack)).unwrap();
    out
}

pub fn load_grid_spec(path: impl AsRef<Path>) -> Result<GridSpec, FormatError> {
    parse_grid_spec(&fs::read_to_string(path)?)
}

pub fn save_grid_spec(path: impl AsRef<Path>, spec: &GridSpec) -> Result<(), FormatError> {
    fs::write(path, render_grid_spec(spec))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Policy files
// ---------------------------------------------------------------------------

/// Render a policy as `policy s action prob` lines, one per positive-weight
/// action, using the supplied action names.
pub fn render_policy(policy: &MixedPolicy, action_names: &[String]) -> Result<String, FormatError> {
    if action_names.len() != policy.n_actions() {
        return Err(FormatError::Mismatch(format!(
            "{} action names supplied for a {}-action policy",
            action_names.len(),
            policy.n_actions()
        )));
    }
    for name in action_names {
        check_token(name)?;
    }
    let mut out = String::new();
    for s in 0..policy.n_states() {
        for (a, &p) in policy.row(s).iter().enumerate() {
            if p > 0.0 {
                writeln!(out, "policy {} {} {}", s, action_names[a], full(p)).unwrap();
            }
        }
    }
    Ok(out)
}

/// Parse a policy file against a known state count and action list. Omitted
/// `(state, action)` weights are zero; every state still needs total weight
/// one, so a state with no lines at all is rejected.
pub fn parse_policy(
    text: &str,
    n_states: usize,
    action_names: &[String],
) -> Result<MixedPolicy, FormatError> {
    let mut rows = vec![vec![0.0; action_names.len()]; n_states];
    let mut seen = vec![vec![false; action_names.len()]; n_states];
    for (n, body) in content_lines(text) {
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks[0] != "policy" {
            return fail(n, format!("unknown keyword `{}`", toks[0]));
        }
        if toks.len() != 4 {
            return fail(n, "expected `policy s action prob`");
        }
        let s = parse_num::<usize>(n, "state index", toks[1])?;
        if s >= n_states {
            return fail(n, format!("state {s} out of range (states {n_states})"));
        }
        let a = resolve(n, "action", action_names, toks[2])?;
        if seen[s][a] {
            return fail(n, format!("duplicate entry for state {s}"));
        }
        seen[s][a] = true;
        rows[s][a] = parse_num::<f64>(n, "probability", toks[3])?;
    }
    Ok(MixedPolicy::new(rows)?)
}

/// Syntax-check a policy file without model context: every line must read
/// `policy s action prob` with a numeric state and probability. Returns the
/// number of entries. Coverage and row sums need the model and are checked
/// by [`parse_policy`].
pub fn check_policy_syntax(text: &str) -> Result<usize, FormatError> {
    let mut count = 0;
    for (n, body) in content_lines(text) {
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks[0] != "policy" {
            return fail(n, format!("unknown keyword `{}`", toks[0]));
        }
        if toks.len() != 4 {
            return fail(n, "expected `policy s action prob`");
        }
        parse_num::<usize>(n, "state index", toks[1])?;
        parse_num::<f64>(n, "probability", toks[3])?;
        count += 1;
    }
    Ok(count)
}

pub fn load_policy(
    path: impl AsRef<Path>,
    n_states: usize,
    action_names: &[String],
) -> Result<MixedPolicy, FormatError> {
    parse_policy(&fs::read_to_string(path)?, n_states, action_names)
}

pub fn save_policy(
    path: impl AsRef<Path>,
    policy: &MixedPolicy,
    action_names: &[String],
) -> Result<(), FormatError> {
    fs::write(path, render_policy(policy, action_names)?)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Value CSVs
// ---------------------------------------------------------------------------

/// Render a value table as CSV with header `state,value`.
pub fn render_values(values: &[f64]) -> String {
    let mut out = String::from("state,value\n");
    for (s, v) in values.iter().enumerate() {
        writeln!(out, "{},{}", s, full(*v)).unwrap();
    }
    out
}

/// Parse a `state,value` CSV. Rows must appear in state order starting at 0.
pub fn parse_values(text: &str) -> Result<Vec<f64>, FormatError> {
    let mut rows = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (idx0, header) = rows
        .next()
        .ok_or_else(|| FormatError::Incomplete("empty values file".into()))?;
    if header.trim() != "state,value" {
        return fail(idx0 + 1, "expected header `state,value`");
    }
    let mut values = Vec::new();
    for (idx, line) in rows {
        let n = idx + 1;
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 2 {
            return fail(n, "expected `state,value` row");
        }
        let s = parse_num::<usize>(n, "state index", fields[0])?;
        if s != values.len() {
            return fail(n, format!("expected row for state {}, found {s}", values.len()));
        }
        values.push(parse_num::<f64>(n, "value", fields[1])?);
    }
    Ok(values)
}

pub fn load_values(path: impl AsRef<Path>) -> Result<Vec<f64>, FormatError> {
    parse_values(&fs::read_to_string(path)?)
}

pub fn save_values(path: impl AsRef<Path>, values: &[f64]) -> Result<(), FormatError> {
    fs::write(path, render_values(values))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Accepting-set listings
// ---------------------------------------------------------------------------

/// Render an accepting-set listing: `product_states N` then one `e x w` line
/// per member, where `w` is the closing defender action index or `-` when no
/// witness is recorded.
pub fn render_accepting(e: &AcceptingSet) -> String {
    let mut out = String::new();
    writeln!(out, "product_states {}", e.n_states()).unwrap();
    for x in e.states() {
        match e.witness_action(x) {
            Some(w) => writeln!(out, "e {} {}", x, w).unwrap(),
            None => writeln!(out, "e {} -", x).unwrap(),
        }
    }
    out
}

/// Parse an accepting-set listing. The witness column is informational and is
/// not reconstructed into the returned set.
pub fn parse_accepting(text: &str) -> Result<AcceptingSet, FormatError> {
    let mut n_states: Option<usize> = None;
    let mut states = Vec::new();
    for (n, body) in content_lines(text) {
        let toks: Vec<&str> = body.split_whitespace().collect();
        match toks[0] {
            "product_states" => {
                if n_states.is_some() {
                    return fail(n, "duplicate `product_states` line");
                }
                if toks.len() != 2 {
                    return fail(n, "expected `product_states N`");
                }
                n_states = Some(parse_num::<usize>(n, "state count", toks[1])?);
            }
            "e" => {
                let Some(limit) = n_states else {
                    return fail(n, "`product_states N` must come before member lines");
                };
                if toks.len() != 3 {
                    return fail(n, "expected `e x witness`");
                }
                let x = parse_num::<usize>(n, "member state", toks[1])?;
                if x >= limit {
                    return fail(n, format!("state {x} out of range (product_states {limit})"));
                }
                if toks[2] != "-" {
                    parse_num::<usize>(n, "witness action", toks[2])?;
                }
                states.push(x);
            }
            other => return fail(n, format!("unknown keyword `{other}`")),
        }
    }
    let n_states = n_states
        .ok_or_else(|| FormatError::Incomplete("missing `product_states` line".into()))?;
    Ok(AcceptingSet::from_states(n_states, &states))
}

pub fn load_accepting(path: impl AsRef<Path>) -> Result<AcceptingSet, FormatError> {
    parse_accepting(&fs::read_to_string(path)?)
}

pub fn save_accepting(path: impl AsRef<Path>, e: &AcceptingSet) -> Result<(), FormatError> {
    fs::write(path, render_accepting(e))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Relation files
// ---------------------------------------------------------------------------

/// Render a relation as `pair s s' dstar` lines, preceded by a comment noting
/// the skew and policy-closeness parameters it was built under.
pub fn render_relation(rel: &Relation) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "# alpha {} m {} states {}",
        full(rel.alpha()),
        full(rel.m()),
        rel.n_states()
    )
    .unwrap();
    for (s, t, d) in rel.pairs() {
        writeln!(out, "pair {} {} {}", s, t, full(d)).unwrap();
    }
    out
}

/// Render the informative part of a distance table: `pair s s' d` lines for
/// off-diagonal pairs with distance below one. Diagonal entries are zero and
/// differently-labeled pairs sit at one, so listing the rest loses nothing.
pub fn render_distances(d: &crate::privacy::DistanceTable) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "# alpha {} states {}; off-diagonal pairs with distance below one",
        full(d.alpha()),
        d.n_states()
    )
    .unwrap();
    for s in 0..d.n_states() {
        for t in (s + 1)..d.n_states() {
            let v = d.get(s, t);
            if v < 1.0 {
                writeln!(out, "pair {} {} {}", s, t, full(v)).unwrap();
            }
        }
    }
    out
}

pub fn save_distances(
    path: impl AsRef<Path>,
    d: &crate::privacy::DistanceTable,
) -> Result<(), FormatError> {
    fs::write(path, render_distances(d))?;
    Ok(())
}

/// Parse the `pair s s' dstar` lines of a relation file.
pub fn parse_relation_pairs(text: &str) -> Result<Vec<(usize, usize, f64)>, FormatError> {
    let mut pairs = Vec::new();
    for (n, body) in content_lines(text) {
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks[0] != "pair" {
            return fail(n, format!("unknown keyword `{}`", toks[0]));
        }
        if toks.len() != 4 {
            return fail(n, "expected `pair s s' dstar`");
        }
        let s = parse_num::<usize>(n, "state index", toks[1])?;
        let t = parse_num::<usize>(n, "state index", toks[2])?;
        let d = parse_num::<f64>(n, "distance", toks[3])?;
        pairs.push((s, t, d));
    }
    Ok(pairs)
}

pub fn load_relation_pairs(path: impl AsRef<Path>) -> Result<Vec<(usize, usize, f64)>, FormatError> {
    parse_relation_pairs(&fs::read_to_string(path)?)
}

pub fn save_relation(path: impl AsRef<Path>, rel: &Relation) -> Result<(), FormatError> {
    fs::write(path, render_relation(rel))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Certificate files
// ---------------------------------------------------------------------------

/// Render a certificate as key-value lines: `epsilon`, `delta_min` (`none`
/// when the relation was empty), `alpha`, `M`, `pairs`.
pub fn render_certificate(cert: &DpCertificate) -> String {
    let mut out = String::new();
    writeln!(out, "epsilon {}", full(cert.epsilon)).unwrap();
    match cert.delta_min {
        Some(d) => writeln!(out, "delta_min {}", full(d)).unwrap(),
        None => writeln!(out, "delta_min none").unwrap(),
    }
    writeln!(out, "alpha {}", full(cert.alpha)).unwrap();
    writeln!(out, "M {}", full(cert.m)).unwrap();
    writeln!(out, "pairs {}", cert.pairs).unwrap();
    out
}

/// Parse a certificate file written by [`render_certificate`].
pub fn parse_certificate(text: &str) -> Result<DpCertificate, FormatError> {
    let mut epsilon: Option<f64> = None;
    let mut delta_min: Option<Option<f64>> = None;
    let mut alpha: Option<f64> = None;
    let mut m: Option<f64> = None;
    let mut pairs: Option<usize> = None;
    for (n, body) in content_lines(text) {
        let toks: Vec<&str> = body.split_whitespace().collect();
        if toks.len() != 2 {
            return fail(n, "expected `key value`");
        }
        match toks[0] {
            "epsilon" => {
                if epsilon.is_some() {
                    return fail(n, "duplicate `epsilon` line");
                }
                epsilon = Some(parse_num::<f64>(n, "epsilon", toks[1])?);
            }
            "delta_min" => {
                if delta_min.is_some() {
                    return fail(n, "duplicate `delta_min` line");
                }
                delta_min = Some(if toks[1] == "none" {
                    None
                } else {
                    Some(parse_num::<f64>(n, "delta_min", toks[1])?)
                });
            }
            "alpha" => {
                if alpha.is_some() {
                    return fail(n, "duplicate `alpha` line");
                }
                alpha = Some(parse_num::<f64>(n, "alpha", toks[1])?);
            }
            "M" => {
                if m.is_some() {
                    return fail(n, "duplicate `M` line");
                }
                m = Some(parse_num::<f64>(n, "M", toks[1])?);
            }
            "pairs" => {
                if pairs.is_some() {
                    return fail(n, "duplicate `pairs` line");
                }
                pairs = Some(parse_num::<usize>(n, "pair count", toks[1])?);
            }
            other => return fail(n, format!("unknown key `{other}`")),
        }
    }
    let missing = |what: &str| FormatError::Incomplete(format!("missing `{what}` line"));
    Ok(DpCertificate {
        epsilon: epsilon.ok_or_else(|| missing("epsilon"))?,
        alpha: alpha.ok_or_else(|| missing("alpha"))?,
        m: m.ok_or_else(|| missing("M"))?,
        delta_min: delta_min.ok_or_else(|| missing("delta_min"))?,
        pairs: pairs.ok_or_else(|| missing("pairs"))?,
    })
}

pub fn load_certificate(path: impl AsRef<Path>) -> Result<DpCertificate, FormatError> {
    parse_certificate(&fs::read_to_string(path)?)
}

pub fn save_certificate(path: impl AsRef<Path>, cert: &DpCertificate) -> Result<(), FormatError> {
    fs::write(path, render_certificate(cert))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Sweep CSVs
// ---------------------------------------------------------------------------

/// One cell of an `(epsilon, delta)` sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub delta: f64,
    pub m: f64,
    pub count: u64,
}

pub const SWEEP_HEADER: &str = "epsilon,delta,M,num_dp_trajectories";

/// Render sweep rows as CSV with header [`SWEEP_HEADER`].
pub fn render_sweep(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            full(row.epsilon),
            full(row.delta),
            full(row.m),
            row.count
        )
        .unwrap();
    }
    out
}

/// Parse a sweep CSV written by [`render_sweep`].
pub fn parse_sweep(text: &str) -> Result<Vec<SweepRow>, FormatError> {
    let mut rows = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (idx0, header) = rows
        .next()
        .ok_or_else(|| FormatError::Incomplete("empty sweep file".into()))?;
    if header.trim() != SWEEP_HEADER {
        return fail(idx0 + 1, format!("expected header `{SWEEP_HEADER}`"));
    }
    let mut out = Vec::new();
    for (idx, line) in rows {
        let n = idx + 1;
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 4 {
            return fail(n, "expected `epsilon,delta,M,count` row");
        }
        out.push(SweepRow {
            epsilon: parse_num::<f64>(n, "epsilon", fields[0])?,
            delta: parse_num::<f64>(n, "delta", fields[1])?,
            m: parse_num::<f64>(n, "M", fields[2])?,
            count: parse_num::<u64>(n, "trajectory count", fields[3])?,
        });
    }
    Ok(out)
}

pub fn load_sweep(path: impl AsRef<Path>) -> Result<Vec<SweepRow>, FormatError> {
    parse_sweep(&fs::read_to_string(path)?)
}

pub fn save_sweep(path: impl AsRef<Path>, rows: &[SweepRow]) -> Result<(), FormatError> {
    fs::write(path, render_sweep(rows))?;
    Ok(())
}
