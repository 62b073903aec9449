//! A small LTL fragment: parsing, evaluation on lasso words, hand-verified
//! template automata for the supported objective shapes, and Rabin
//! acceptance of lasso words (the oracle used to validate the templates).
//!
//! Derived operators are rewritten into primitives at parse time
//! (`F p == T U p`, `G p == !(T U !p)`), so downstream code only ever sees
//! truth, atoms, negation, conjunction, disjunction, next, and until.

use crate::model::{RabinAutomaton, RabinPair};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LtlError {
    #[error("syntax error at offset {pos}: {message}")]
    Syntax { pos: usize, message: String },
    #[error(
        "formula `{formula}` does not match a built-in automaton template \
         (supported shapes: GF a & G !b, F a & G !b, G !b with distinct atoms); \
         supply an explicit Rabin automaton file instead"
    )]
    UnsupportedTemplate { formula: String },
    #[error("lasso cycle must be non-empty")]
    EmptyCycle,
}

/// LTL formula over atomic propositions, in primitive form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LtlFormula {
    True,
    Atom(String),
    Not(Box<LtlFormula>),
    And(Box<LtlFormula>, Box<LtlFormula>),
    Or(Box<LtlFormula>, Box<LtlFormula>),
    Next(Box<LtlFormula>),
    Until(Box<LtlFormula>, Box<LtlFormula>),
}

impl LtlFormula {
    /// Negation with double-negation elimination, so `!!p` and `p` are
    /// structurally identical.
    pub fn not(phi: LtlFormula) -> LtlFormula {
        match phi {
            LtlFormula::Not(inner) => *inner,
            other => LtlFormula::Not(Box::new(other)),
        }
    }

    /// `F phi` in primitive form: `T U phi`.
    pub fn finally(phi: LtlFormula) -> LtlFormula {
        LtlFormula::Until(Box::new(LtlFormula::True), Box::new(phi))
    }

    /// `G phi` in primitive form: `!(T U !phi)`.
    pub fn globally(phi: LtlFormula) -> LtlFormula {
        LtlFormula::not(Self::finally(LtlFormula::not(phi)))
    }

    /// Atom names appearing in the formula, sorted and deduplicated.
    pub fn atoms(&self) -> Vec<String> {
        fn walk(f: &LtlFormula, out: &mut Vec<String>) {
            match f {
                LtlFormula::True => {}
                LtlFormula::Atom(a) => out.push(a.clone()),
                LtlFormula::Not(x) | LtlFormula::Next(x) => walk(x, out),
                LtlFormula::And(x, y) | LtlFormula::Or(x, y) | LtlFormula::Until(x, y) => {
                    walk(x, out);
                    walk(y, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for LtlFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LtlFormula::True => write!(f, "T"),
            LtlFormula::Atom(a) => write!(f, "{a}"),
            LtlFormula::Not(x) => write!(f, "!({x})"),
            LtlFormula::And(x, y) => write!(f, "({x} & {y})"),
            LtlFormula::Or(x, y) => write!(f, "({x} | {y})"),
            LtlFormula::Next(x) => write!(f, "X ({x})"),
            LtlFormula::Until(x, y) => write!(f, "({x} U {y})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Bang,
    Amp,
    Pipe,
    LParen,
    RParen,
    OpX,
    OpU,
    OpF,
    OpG,
    OpT,
}

fn lex(text: &str) -> Result<Vec<(Token, usize)>, LtlError> {
    let mut tokens = Vec::new();
    let bytes: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
            }
            '!' => {
                tokens.push((Token::Bang, start));
                i += 1;
            }
            '&' => {
                tokens.push((Token::Amp, start));
                i += 1;
            }
            '|' => {
                tokens.push((Token::Pipe, start));
                i += 1;
            }
            '(' => {
                tokens.push((Token::LParen, start));
                i += 1;
            }
            ')' => {
                tokens.push((Token::RParen, start));
                i += 1;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut word = String::new();
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_') {
                    word.push(bytes[i]);
                    i += 1;
                }
                // The operator letters are reserved, so a run of them (like
                // `GF`) is a stack of operators, not an identifier.
                let operator = |c: char| {
                    Some(match c {
                        'X' => Token::OpX,
                        'U' => Token::OpU,
                        'F' => Token::OpF,
                        'G' => Token::OpG,
                        'T' => Token::OpT,
                        _ => return None,
                    })
                };
                if word.chars().all(|c| operator(c).is_some()) {
                    for (k, c) in word.chars().enumerate() {
                        tokens.push((operator(c).expect("checked above"), start + k));
                    }
                } else {
                    tokens.push((Token::Ident(word), start));
                }
            }
            other => {
                return Err(LtlError::Syntax {
                    pos: start,
                    message: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn here(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |&(_, p)| p)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).map(|(t, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect_rparen(&mut self) -> Result<(), LtlError> {
        match self.bump() {
            Some(Token::RParen) => Ok(()),
            _ => Err(LtlError::Syntax {
                pos: self.here(),
                message: "expected `)`".into(),
            }),
        }
    }

    // Grammar, loosest first: or := and (`|` and)*; and := until (`&` until)*;
    // until := unary (`U` until)?  (right-associative); unary := !/X/F/G
    // applied to unary, or an atom, `T`, or a parenthesized formula.
    fn or_expr(&mut self) -> Result<LtlFormula, LtlError> {
        let mut lhs = self.and_expr()?;
        while self.peek() == Some(&Token::Pipe) {
            self.bump();
            let rhs = self.and_expr()?;
            lhs = LtlFormula::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<LtlFormula, LtlError> {
        let mut lhs = self.until_expr()?;
        while self.peek() == Some(&Token::Amp) {
            self.bump();
            let rhs = self.until_expr()?;
            lhs = LtlFormula::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn until_expr(&mut self) -> Result<LtlFormula, LtlError> {
        let lhs = self.unary_expr()?;
        if self.peek() == Some(&Token::OpU) {
            self.bump();
            let rhs = self.until_expr()?;
            return Ok(LtlFormula::Until(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> Result<LtlFormula, LtlError> {
        let pos = self.here();
        match self.bump() {
            Some(Token::Bang) => Ok(LtlFormula::not(self.unary_expr()?)),
            Some(Token::OpX) => Ok(LtlFormula::Next(Box::new(self.unary_expr()?))),
            Some(Token::OpF) => Ok(LtlFormula::finally(self.unary_expr()?)),
            Some(Token::OpG) => Ok(LtlFormula::globally(self.unary_expr()?)),
            Some(Token::OpT) => Ok(LtlFormula::True),
            Some(Token::Ident(name)) => Ok(LtlFormula::Atom(name)),
            Some(Token::LParen) => {
                let inner = self.or_expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Some(tok) => Err(LtlError::Syntax {
                pos,
                message: format!("unexpected token {tok:?}"),
            }),
            None => Err(LtlError::Syntax {
                pos,
                message: "unexpected end of input".into(),
            }),
        }
    }
}

/// Parse an LTL formula. Operator precedence from tightest to loosest:
/// unary (`!`, `X`, `F`, `G`), then `U` (right-associative), then `&`, then
/// `|`; parentheses override. Atoms are identifiers; `T` is truth.
pub fn parse_ltl(text: &str) -> Result<LtlFormula, LtlError> {
    let tokens = lex(text)?;
    if tokens.is_empty() {
        return Err(LtlError::Syntax {
            pos: 0,
            message: "empty formula".into(),
        });
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let formula = parser.or_expr()?;
    if parser.peek().is_some() {
        return Err(LtlError::Syntax {
            pos: parser.here(),
            message: "trailing input after formula".into(),
        });
    }
    Ok(formula)
}

/// Eventually periodic infinite word: `prefix` followed by `cycle` repeated
/// forever. Letters are proposition names (one per position, single-label
/// convention).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoWord {
    prefix: Vec<String>,
    cycle: Vec<String>,
}

impl LassoWord {
    pub fn new(prefix: Vec<String>, cycle: Vec<String>) -> Result<Self, LtlError> {
        if cycle.is_empty() {
            return Err(LtlError::EmptyCycle);
        }
        Ok(LassoWord { prefix, cycle })
    }

    pub fn prefix(&self) -> &[String] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[String] {
        &self.cycle
    }

    /// Letter at any position of the infinite unrolling.
    pub fn letter(&self, i: usize) -> &str {
        if i < self.prefix.len() {
            &self.prefix[i]
        } else {
            &self.cycle[(i - self.prefix.len()) % self.cycle.len()]
        }
    }

    /// Number of canonical positions: prefix length plus cycle length. Every
    /// position of the infinite word is equivalent to one of these.
    fn span(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    /// Canonical successor position.
    fn next_pos(&self, i: usize) -> usize {
        let p = self.prefix.len();
        if i + 1 < self.span() {
            i + 1
        } else {
            p
        }
    }
}

/// Evaluate a formula at position 0 of the lasso's infinite unrolling.
///
/// Works bottom-up: each subformula gets a truth vector over the canonical
/// positions (prefix positions plus one period of the cycle). Until on the
/// cycle needs only witnesses within one period: a farther witness would
/// imply the left operand holds on a full period, so a wrapped, nearer
/// witness exists too.
pub fn eval_ltl_on_lasso(formula: &LtlFormula, word: &LassoWord) -> bool {
    truth_vector(formula, word)[0]
}

fn truth_vector(formula: &LtlFormula, word: &LassoWord) -> Vec<bool> {
    let n = word.span();
    let p = word.prefix.len();
    let c = word.cycle.len();
    match formula {
        LtlFormula::True => vec![true; n],
        LtlFormula::Atom(a) => (0..n).map(|i| word.letter(i) == a).collect(),
        LtlFormula::Not(x) => truth_vector(x, word).into_iter().map(|b| !b).collect(),
        LtlFormula::And(x, y) => truth_vector(x, word)
            .into_iter()
            .zip(truth_vector(y, word))
            .map(|(a, b)| a && b)
            .collect(),
        LtlFormula::Or(x, y) => truth_vector(x, word)
            .into_iter()
            .zip(truth_vector(y, word))
            .map(|(a, b)| a || b)
            .collect(),
        LtlFormula::Next(x) => {
            let v = truth_vector(x, word);
            (0..n).map(|i| v[word.next_pos(i)]).collect()
        }
        LtlFormula::Until(x, y) => {
            let vx = truth_vector(x, word);
            let vy = truth_vector(y, word);
            let mut out = vec![false; n];
            // Cycle positions: scan up to one full period.
            for start in 0..c {
                let mut holds = false;
                for k in 0..c {
                    let pos = p + (start + k) % c;
                    if vy[pos] {
                        holds = true;
                        break;
                    }
                    if !vx[pos] {
                        break;
                    }
                }
                out[p + start] = holds;
            }
            // Prefix positions: fold backward into the cycle verdicts.
            for i in (0..p).rev() {
                out[i] = vy[i] || (vx[i] && out[word.next_pos(i)]);
            }
            out
        }
    }
}

/// Decide Rabin acceptance of a lasso word: run the prefix, then repeat the
/// cycle until the automaton state at a cycle boundary recurs (at most
/// |Q|+1 repetitions). The states visited between the two occurrences are
/// exactly those visited infinitely often; the word is accepted when some
/// pair's L avoids them all and its K meets them.
pub fn dra_accepts_lasso(
    aut: &RabinAutomaton,
    word: &LassoWord,
) -> Result<bool, crate::model::ModelError> {
    let mut q = aut.initial();
    for letter in word.prefix() {
        q = aut.step_named(q, letter)?;
    }
    // One entry per cycle boundary: the automaton state there.
    let mut boundary_states = vec![q];
    // Visited sets per cycle run.
    let mut run_visits: Vec<Vec<usize>> = Vec::new();
    loop {
        let mut visited = Vec::new();
        for letter in word.cycle() {
            q = aut.step_named(q, letter)?;
            visited.push(q);
        }
        run_visits.push(visited);
        if let Some(first) = boundary_states.iter().position(|&b| b == q) {
            // Runs first..end form the period.
            let mut infinite: Vec<usize> = run_visits[first..].concat();
            infinite.sort_unstable();
            infinite.dedup();
            let accepted = aut.pairs().iter().any(|pair| {
                pair.l_states.iter().all(|l| !infinite.contains(l))
                    && pair.k_states.iter().any(|k| infinite.contains(k))
            });
            return Ok(accepted);
        }
        boundary_states.push(q);
    }
}

fn as_atom(f: &LtlFormula) -> Option<&str> {
    match f {
        LtlFormula::Atom(a) => Some(a),
        _ => None,
    }
}

/// Matches `F a` in primitive form: `T U a`.
fn as_f_atom(f: &LtlFormula) -> Option<&str> {
    match f {
        LtlFormula::Until(lhs, rhs) if **lhs == LtlFormula::True => as_atom(rhs),
        _ => None,
    }
}

/// Matches `G !b` in primitive form: `!(T U b)`.
fn as_g_not_atom(f: &LtlFormula) -> Option<&str> {
    match f {
        LtlFormula::Not(inner) => as_f_atom(inner),
        _ => None,
    }
}

/// Matches `G F a` in primitive form: `!(T U !(T U a))`.
fn as_gf_atom(f: &LtlFormula) -> Option<&str> {
    match f {
        LtlFormula::Not(inner) => match &**inner {
            LtlFormula::Until(lhs, rhs) if **lhs == LtlFormula::True => match &**rhs {
                LtlFormula::Not(again) => as_f_atom(again),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    }
}

fn template_error(formula: &LtlFormula) -> LtlError {
    LtlError::UnsupportedTemplate {
        formula: formula.to_string(),
    }
}

/// Hand-verified template automaton for the supported objective shapes:
///
/// * `GF a & G !b` — surveil `a` forever while avoiding `b`: three states
///   (waiting, just-saw-`a`, trap), pair (L = {}, K = {just-saw-`a`}).
/// * `F a & G !b` — reach `a` while avoiding `b`: three states (searching,
///   found, trap), pair (L = {}, K = {found}).
/// * `G !b` — pure safety: two states, pair (L = {trap}, K = {good}).
///
/// Every state falls back to a wildcard step, so the automata run over any
/// proposition set containing their named letters. Unsupported shapes are
/// reported with a pointer to explicit automaton files.
pub fn dra_from_template(formula: &LtlFormula) -> Result<RabinAutomaton, LtlError> {
    // G !b alone.
    if let Some(b) = as_g_not_atom(formula) {
        return safety_dra(b).map_err(|_| template_error(formula));
    }
    if let LtlFormula::And(lhs, rhs) = formula {
        for (x, y) in [(lhs, rhs), (rhs, lhs)] {
            if let (Some(a), Some(b)) = (as_gf_atom(x), as_g_not_atom(y)) {
                if a != b {
                    return surveil_avoid_dra(a, b).map_err(|_| template_error(formula));
                }
            }
            if let (Some(a), Some(b)) = (as_f_atom(x), as_g_not_atom(y)) {
                if a != b {
                    return reach_avoid_dra(a, b).map_err(|_| template_error(formula));
                }
            }
        }
    }
    Err(template_error(formula))
}

fn surveil_avoid_dra(a: &str, b: &str) -> Result<RabinAutomaton, crate::model::ModelError> {
    // States: 0 = waiting, 1 = just saw `a`, 2 = trap after `b`.
    let letters = vec![a.to_string(), b.to_string()];
    let delta = vec![
        vec![Some(1), Some(2)],
        vec![Some(1), Some(2)],
        vec![Some(2), Some(2)],
    ];
    let fallback = vec![Some(0), Some(0), Some(2)];
    RabinAutomaton::new(3, 0, letters, delta, fallback, vec![RabinPair::new(vec![], vec![1])])
}

fn reach_avoid_dra(a: &str, b: &str) -> Result<RabinAutomaton, crate::model::ModelError> {
    // States: 0 = searching, 1 = found, 2 = trap after `b`.
    let letters = vec![a.to_string(), b.to_string()];
    let delta = vec![
        vec![Some(1), Some(2)],
        vec![Some(1), Some(2)],
        vec![Some(2), Some(2)],
    ];
    let fallback = vec![Some(0), Some(1), Some(2)];
    RabinAutomaton::new(3, 0, letters, delta, fallback, vec![RabinPair::new(vec![], vec![1])])
}

fn safety_dra(b: &str) -> Result<RabinAutomaton, crate::model::ModelError> {
    // States: 0 = good, 1 = trap.
    let letters = vec![b.to_string()];
    let delta = vec![vec![Some(1)], vec![Some(1)]];
    let fallback = vec![Some(0), Some(1)];
    RabinAutomaton::new(2, 0, letters, delta, fallback, vec![RabinPair::new(vec![1], vec![0])])
}
