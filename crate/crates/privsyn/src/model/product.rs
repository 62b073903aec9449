//! Product of a stochastic game and a Rabin automaton, and detection of the
//! accepting set: the product states from which the defender can keep play
//! inside a Rabin-good component forever, no matter what the adversary does.

use super::automaton::{RabinAutomaton, RabinPair};
use super::game::StochasticGame;
use super::scc::strongly_connected_components;
use super::ModelError;

/// Synchronized composition of a game and an automaton. Product state
/// `x = s·|Q| + q` pairs game state `s` with automaton state `q`; the
/// automaton advances on the label of the game state being entered.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductGame {
    n_game_states: usize,
    n_aut_states: usize,
    def_actions: Vec<String>,
    adv_actions: Vec<String>,
    props: Vec<String>,
    /// Label of the game component, lifted to product states.
    labels: Vec<usize>,
    rows: Vec<Vec<(usize, f64)>>,
    /// Acceptance pairs lifted to product-state indices.
    pairs: Vec<RabinPair>,
}

/// Build the product: `T((s',q') | (s,q), u_d, u_a)` equals the game's
/// `T(s'|s,u_d,u_a)` when `q'` is the automaton step from `q` on the label of
/// `s'`, and zero otherwise.
///
/// Fails when some game proposition cannot drive the automaton (the name is
/// not declared and a state lacks a wildcard).
pub fn build_product(
    game: &StochasticGame,
    aut: &RabinAutomaton,
) -> Result<ProductGame, ModelError> {
    let nq = aut.n_states();
    // Resolve every (proposition, automaton state) step up front so a missing
    // letter is reported once, by name.
    let mut resolved = vec![vec![0usize; nq]; game.props().len()];
    for (p, name) in game.props().iter().enumerate() {
        for q in 0..nq {
            resolved[p][q] = aut.step_named(q, name)?;
        }
    }

    let ns = game.n_states();
    let nd = game.n_def_actions();
    let na = game.n_adv_actions();
    let n_product = ns * nq;
    let mut labels = vec![0usize; n_product];
    for s in 0..ns {
        for q in 0..nq {
            labels[s * nq + q] = game.label(s);
        }
    }

    let mut rows = vec![Vec::new(); n_product * nd * na];
    for s in 0..ns {
        for q in 0..nq {
            let x = s * nq + q;
            for ud in 0..nd {
                for ua in 0..na {
                    let row: Vec<(usize, f64)> = game
                        .successors(s, ud, ua)
                        .iter()
                        .map(|&(t, p)| (t * nq + resolved[game.label(t)][q], p))
                        .collect();
                    rows[(x * nd + ud) * na + ua] = row;
                }
            }
        }
    }

    let pairs = aut
        .pairs()
        .iter()
        .map(|pair| {
            let lift = |qs: &[usize]| -> Vec<usize> {
                let mut out = Vec::with_capacity(qs.len() * ns);
                for s in 0..ns {
                    for &q in qs {
                        out.push(s * nq + q);
                    }
                }
                out
            };
            RabinPair::new(lift(&pair.l_states), lift(&pair.k_states))
        })
        .collect();

    Ok(ProductGame {
        n_game_states: ns,
        n_aut_states: nq,
        def_actions: game.def_actions().to_vec(),
        adv_actions: game.adv_actions().to_vec(),
        props: game.props().to_vec(),
        labels,
        rows,
        pairs,
    })
}

impl ProductGame {
    pub fn n_states(&self) -> usize {
        self.labels.len()
    }

    pub fn n_game_states(&self) -> usize {
        self.n_game_states
    }

    pub fn n_aut_states(&self) -> usize {
        self.n_aut_states
    }

    pub fn n_def_actions(&self) -> usize {
        self.def_actions.len()
    }

    pub fn n_adv_actions(&self) -> usize {
        self.adv_actions.len()
    }

    pub fn def_actions(&self) -> &[String] {
        &self.def_actions
    }

    pub fn adv_actions(&self) -> &[String] {
        &self.adv_actions
    }

    pub fn props(&self) -> &[String] {
        &self.props
    }

    pub fn label(&self, x: usize) -> usize {
        self.labels[x]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn pairs(&self) -> &[RabinPair] {
        &self.pairs
    }

    pub fn state_index(&self, s: usize, q: usize) -> usize {
        s * self.n_aut_states + q
    }

    pub fn game_state(&self, x: usize) -> usize {
        x / self.n_aut_states
    }

    pub fn aut_state(&self, x: usize) -> usize {
        x % self.n_aut_states
    }

    pub fn successors(&self, x: usize, ud: usize, ua: usize) -> &[(usize, f64)] {
        &self.rows[(x * self.def_actions.len() + ud) * self.adv_actions.len() + ua]
    }

    pub fn prob(&self, x: usize, ud: usize, ua: usize, y: usize) -> f64 {
        self.successors(x, ud, ua)
            .iter()
            .find(|&&(u, _)| u == y)
            .map_or(0.0, |&(_, p)| p)
    }
}

/// Accepting set of a product game, with the defender action that witnesses
/// closure for each member: playing the witness keeps every adversary
/// response inside the member's component.
#[derive(Debug, Clone, PartialEq)]
pub struct AcceptingSet {
    members: Vec<bool>,
    witness: Vec<Option<usize>>,
}

impl AcceptingSet {
    /// Wrap an explicit state set without closure witnesses. Intended for
    /// constructing synthetic reachability targets; sets produced by
    /// [`accepting_states`] always carry witnesses.
    pub fn from_states(n_states: usize, states: &[usize]) -> Self {
        let mut members = vec![false; n_states];
        for &x in states {
            members[x] = true;
        }
        AcceptingSet {
            members,
            witness: vec![None; n_states],
        }
    }

    pub fn contains(&self, x: usize) -> bool {
        self.members[x]
    }

    pub fn n_states(&self) -> usize {
        self.members.len()
    }

    pub fn len(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.members.iter().any(|&m| m)
    }

    /// Member states in ascending order.
    pub fn states(&self) -> Vec<usize> {
        (0..self.members.len()).filter(|&x| self.members[x]).collect()
    }

    /// Defender action keeping `x`'s component closed, when known.
    pub fn witness_action(&self, x: usize) -> Option<usize> {
        self.witness[x]
    }
}

/// Lowest-index defender action at `x` whose successors stay inside `inside`
/// for every adversary action, or `None` when no action closes.
fn closing_action(product: &ProductGame, x: usize, inside: &[bool]) -> Option<usize> {
    (0..product.n_def_actions()).find(|&ud| {
        (0..product.n_adv_actions()).all(|ua| {
            product
                .successors(x, ud, ua)
                .iter()
                .all(|&(y, _)| inside[y])
        })
    })
}

/// Shrink `set` (a membership mask) to the states that keep a closing action,
/// iterating until stable. Returns true when anything was removed.
fn closability_fixpoint(product: &ProductGame, set: &mut [bool]) -> bool {
    let mut removed_any = false;
    loop {
        let mut changed = false;
        for x in 0..set.len() {
            if set[x] && closing_action(product, x, set).is_none() {
                set[x] = false;
                changed = true;
                removed_any = true;
            }
        }
        if !changed {
            return removed_any;
        }
    }
}

/// Robust out-edges of `x` within `inside`: successors reached with positive
/// probability under **every** adversary response to some closing defender
/// action. These are the moves the defender can force to happen eventually.
fn robust_edges(product: &ProductGame, x: usize, inside: &[bool]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    for ud in 0..product.n_def_actions() {
        let closes = (0..product.n_adv_actions()).all(|ua| {
            product
                .successors(x, ud, ua)
                .iter()
                .all(|&(y, _)| inside[y])
        });
        if !closes {
            continue;
        }
        for y in 0..inside.len() {
            if !inside[y] || out.contains(&y) {
                continue;
            }
            let guaranteed = (0..product.n_adv_actions())
                .all(|ua| product.prob(x, ud, ua, y) > 0.0);
            if guaranteed {
                out.push(y);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Compute the accepting set: the union over Rabin pairs of maximal
/// components that avoid the pair's L-states, contain one of its K-states,
/// are defender-closable (every member has an action confining all adversary
/// responses to the component), and are strongly connected under robust
/// edges, so the defender can revisit the K-state forever.
///
/// The algorithm starts from the complement of the lifted L-set, alternates
/// closability pruning with decomposition into robust strongly connected
/// components, and recurses into the pieces until each surviving set is a
/// single closable robust component.
pub fn accepting_states(product: &ProductGame) -> AcceptingSet {
    let n = product.n_states();
    let mut members = vec![false; n];
    let mut witness: Vec<Option<usize>> = vec![None; n];

    for pair in product.pairs() {
        let mut in_k = vec![false; n];
        for &x in &pair.k_states {
            in_k[x] = true;
        }
        let mut candidate = vec![true; n];
        for &x in &pair.l_states {
            candidate[x] = false;
        }

        let mut stack = vec![candidate];
        while let Some(mut set) = stack.pop() {
            closability_fixpoint(product, &mut set);
            let live: Vec<usize> = (0..n).filter(|&x| set[x]).collect();
            if live.is_empty() {
                continue;
            }
            // SCCs of the robust-edge graph restricted to the surviving set,
            // expressed over compact indices.
            let pos: std::collections::HashMap<usize, usize> =
                live.iter().enumerate().map(|(i, &x)| (x, i)).collect();
            let comps = strongly_connected_components(live.len(), |i| {
                robust_edges(product, live[i], &set)
                    .into_iter()
                    .map(|y| pos[&y])
                    .collect()
            });
            if comps.len() == 1 {
                // A single closable robust component: accept when it can
                // touch K; otherwise no subset can, since subsets only lose
                // states.
                if live.iter().any(|&x| in_k[x]) {
                    for &x in &live {
                        if !members[x] {
                            members[x] = true;
                            witness[x] = closing_action(product, x, &set);
                        }
                    }
                }
            } else {
                for comp in comps {
                    let mut sub = vec![false; n];
                    for &i in &comp {
                        sub[live[i]] = true;
                    }
                    stack.push(sub);
                }
            }
        }
    }

    AcceptingSet { members, witness }
}
