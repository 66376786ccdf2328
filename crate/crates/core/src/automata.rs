//! Finite-word monitors for safety formulas.
//!
//! [`construct_fine_nfa`] compiles a safety formula into a nondeterministic
//! automaton over letters `2^P` that is *fine* for the formula: every word
//! it accepts is a bad prefix (no infinite extension satisfies the formula),
//! and every violating infinite word has at least one accepted prefix. The
//! automaton is built backwards from the accepting valuation by computing,
//! for each state and letter, the unique predecessor valuation of the
//! negated formula's closure. [`subset_construction`] determinizes the
//! result into a total-transition DFA suitable for synchronous products.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use crate::ltl::{Alphabet, FiniteWord, Formula, Letter, LtlError};
use crate::ltl::{index_closure, SubNode};

/// Nondeterministic finite-word automaton recognizing bad prefixes.
///
/// States are valuations (bitmasks) over the closure of the negated
/// normalized formula, indexed in construction (enqueue) order; index 0 is
/// the empty valuation, the unique final state. Transitions run forward:
/// `successors(s, σ)` are the states reachable from `s` reading `σ`.
#[derive(Debug, Clone)]
pub struct Nfa {
    alphabet: Alphabet,
    closure: Vec<Formula>,
    states: Vec<u128>,
    /// `succ[s][letter]` sorted ascending.
    succ: Vec<Vec<Vec<u32>>>,
    initial: Vec<u32>,
    finals: Vec<u32>,
}

impl Nfa {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Number of constructed predecessor valuations (the enqueued states).
    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn initial_states(&self) -> &[u32] {
        &self.initial
    }

    pub fn final_states(&self) -> &[u32] {
        &self.finals
    }

    pub fn successors(&self, state: u32, letter: Letter) -> &[u32] {
        &self.succ[state as usize][letter as usize]
    }

    /// Closure of the negated formula whose valuations form the state space.
    pub fn closure(&self) -> &[Formula] {
        &self.closure
    }

    /// Formulas held true in a state's valuation.
    pub fn state_valuation(&self, state: u32) -> Vec<&Formula> {
        let mask = self.states[state as usize];
        self.closure
            .iter()
            .enumerate()
            .filter(|(i, _)| (mask >> i) & 1 == 1)
            .map(|(_, f)| f)
            .collect()
    }

    /// Existence of an accepting run on `w` (stuck runs die).
    pub fn accepts(&self, w: &FiniteWord) -> bool {
        let mut cur = vec![false; self.states.len()];
        for &q in &self.initial {
            cur[q as usize] = true;
        }
        for &letter in w {
            let mut next = vec![false; self.states.len()];
            for (q, _) in cur.iter().enumerate().filter(|(_, v)| **v) {
                for &r in &self.succ[q][letter as usize] {
                    next[r as usize] = true;
                }
            }
            cur = next;
        }
        self.finals.iter().any(|&q| cur[q as usize])
    }

    /// States both reachable from an initial state and co-reachable to a
    /// final state; the gap to [`Nfa::state_count`] measures dead valuations
    /// produced by the backward construction.
    pub fn trimmed_state_count(&self) -> usize {
        let n = self.states.len();
        let mut fwd = vec![false; n];
        let mut queue: VecDeque<u32> = self.initial.iter().copied().collect();
        for &q in &self.initial {
            fwd[q as usize] = true;
        }
        while let Some(q) = queue.pop_front() {
            for per_letter in &self.succ[q as usize] {
                for &r in per_letter {
                    if !fwd[r as usize] {
                        fwd[r as usize] = true;
                        queue.push_back(r);
                    }
                }
            }
        }
        let mut pred: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (q, per_state) in self.succ.iter().enumerate() {
            for per_letter in per_state {
                for &r in per_letter {
                    pred[r as usize].push(q as u32);
                }
            }
        }
        let mut bwd = vec![false; n];
        let mut queue: VecDeque<u32> = self.finals.iter().copied().collect();
        for &q in &self.finals {
            bwd[q as usize] = true;
        }
        while let Some(q) = queue.pop_front() {
            for &p in &pred[q as usize] {
                if !bwd[p as usize] {
                    bwd[p as usize] = true;
                    queue.push_back(p);
                }
            }
        }
        (0..n).filter(|&i| fwd[i] && bwd[i]).count()
    }

    /// Deterministic text rendering: one `node` line per state (construction
    /// order, marked `initial`/`final`) and one `edge` line per transition,
    /// sorted by source, letter, target.
    pub fn export_graph(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "nfa states={} letters={}",
            self.states.len(),
            self.alphabet.letter_count()
        );
        let finals: Vec<bool> = {
            let mut v = vec![false; self.states.len()];
            for &q in &self.finals {
                v[q as usize] = true;
            }
            v
        };
        let initials: Vec<bool> = {
            let mut v = vec![false; self.states.len()];
            for &q in &self.initial {
                v[q as usize] = true;
            }
            v
        };
        for i in 0..self.states.len() {
            let mut line = format!("node {i}");
            if initials[i] {
                line.push_str(" initial");
            }
            if finals[i] {
                line.push_str(" final");
            }
            let _ = writeln!(out, "{line}");
        }
        for (q, per_state) in self.succ.iter().enumerate() {
            for (letter, targets) in per_state.iter().enumerate() {
                for &r in targets {
                    let _ = writeln!(
                        out,
                        "edge {q} {} {r}",
                        self.alphabet.format_letter(letter as Letter)
                    );
                }
            }
        }
        out
    }
}

/// Builds the fine NFA for a safety formula by the backward worklist
/// construction over the closure of the normalized negation.
///
/// Seeded with the empty valuation as the only final state, the worklist
/// pops a state `s` and, for every letter `σ`, fills the unique predecessor
/// valuation `s'` bottom-up: a literal holds iff `σ` satisfies it,
/// conjunction and disjunction follow their children within `s'`, a next
/// holds iff its child holds in `s`, and an until holds iff its goal holds
/// in `s'` or its hold-condition does and the until itself holds in `s`.
/// The edge `(s', σ, s)` is recorded forward, `s'` becomes initial when it
/// contains the negated formula itself, and unseen valuations are enqueued.
pub fn construct_fine_nfa(phi_safe: &Formula, alphabet: &Alphabet) -> Result<Nfa, LtlError> {
    if !phi_safe.is_safe_ltl() {
        return Err(LtlError::NotSafe);
    }
    let psi = phi_safe.negated_nnf();
    let (closure, nodes) = index_closure(&psi, alphabet)?;
    let root = closure.len() - 1;
    let letter_count = alphabet.letter_count();

    let mut states: Vec<u128> = vec![0];
    let mut index: HashMap<u128, u32> = HashMap::new();
    index.insert(0, 0);
    let mut queue: VecDeque<u32> = VecDeque::new();
    queue.push_back(0);
    let mut edges: Vec<(u32, Letter, u32)> = Vec::new();
    let mut initial: Vec<bool> = vec![false];

    while let Some(si) = queue.pop_front() {
        let s = states[si as usize];
        for sigma in 0..letter_count as Letter {
            let mut sp: u128 = 0;
            for (ci, node) in nodes.iter().enumerate() {
                let holds = match *node {
                    SubNode::Lit { bit, neg } => ((sigma >> bit) & 1 == 1) != neg,
                    SubNode::And(a, b) => (sp >> a) & 1 == 1 && (sp >> b) & 1 == 1,
                    SubNode::Or(a, b) => (sp >> a) & 1 == 1 || (sp >> b) & 1 == 1,
                    SubNode::Next(a) => (s >> a) & 1 == 1,
                    SubNode::Until(a, b) | SubNode::WeakUntil(a, b) => {
                        (sp >> b) & 1 == 1 || ((sp >> a) & 1 == 1 && (s >> ci) & 1 == 1)
                    }
                };
                if holds {
                    sp |= 1 << ci;
                }
            }
            let spi = match index.get(&sp) {
                Some(&id) => id,
                None => {
                    let id = states.len() as u32;
                    states.push(sp);
                    initial.push(false);
                    index.insert(sp, id);
                    queue.push_back(id);
                    id
                }
            };
            edges.push((spi, sigma, si));
            if (sp >> root) & 1 == 1 {
                initial[spi as usize] = true;
            }
        }
    }

    let mut succ = vec![vec![Vec::new(); letter_count]; states.len()];
    for (p, sigma, q) in edges {
        succ[p as usize][sigma as usize].push(q);
    }
    for per_state in &mut succ {
        for targets in per_state {
            targets.sort_unstable();
            targets.dedup();
        }
    }
    let initial: Vec<u32> = (0..states.len() as u32).filter(|&q| initial[q as usize]).collect();
    Ok(Nfa {
        alphabet: alphabet.clone(),
        closure,
        states,
        succ,
        initial,
        finals: vec![0],
    })
}

/// Deterministic finite-word automaton with a total transition function.
///
/// Produced from an [`Nfa`] by subset construction; each state keeps the
/// sorted set of NFA states it stands for. State 0 is initial; the empty
/// subset, when reachable, acts as the rejecting sink.
#[derive(Debug, Clone)]
pub struct Dfa {
    alphabet: Alphabet,
    subsets: Vec<Vec<u32>>,
    /// `delta[q][letter]`, total.
    delta: Vec<Vec<u32>>,
    finals: Vec<bool>,
    sink: Option<u32>,
}

impl Dfa {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.subsets.len()
    }

    pub fn initial(&self) -> u32 {
        0
    }

    pub fn is_final(&self, q: u32) -> bool {
        self.finals[q as usize]
    }

    /// Rejecting sink (the empty subset) if it was reached.
    pub fn sink(&self) -> Option<u32> {
        self.sink
    }

    /// NFA states represented by a DFA state, sorted ascending.
    pub fn subset(&self, q: u32) -> &[u32] {
        &self.subsets[q as usize]
    }

    /// Total transition function.
    pub fn step(&self, q: u32, letter: Letter) -> u32 {
        self.delta[q as usize][letter as usize]
    }

    pub fn accepts(&self, w: &FiniteWord) -> bool {
        let mut q = self.initial();
        for &letter in w {
            q = self.step(q, letter);
        }
        self.is_final(q)
    }

    /// For each state, the least number of steps to reach a final state
    /// (`0` on finals, `None` where unreachable). Useful for pruning word
    /// searches.
    pub fn distances_to_final(&self) -> Vec<Option<u32>> {
        let n = self.subsets.len();
        let mut pred: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (q, row) in self.delta.iter().enumerate() {
            for &r in row {
                pred[r as usize].push(q as u32);
            }
        }
        let mut dist: Vec<Option<u32>> = vec![None; n];
        let mut queue = VecDeque::new();
        for (q, d) in dist.iter_mut().enumerate() {
            if self.finals[q] {
                *d = Some(0);
                queue.push_back(q as u32);
            }
        }
        while let Some(q) = queue.pop_front() {
            let d = dist[q as usize].unwrap();
            for &p in &pred[q as usize] {
                if dist[p as usize].is_none() {
                    dist[p as usize] = Some(d + 1);
                    queue.push_back(p);
                }
            }
        }
        dist
    }

    /// Deterministic text rendering in the same shape as [`Nfa::export_graph`].
    pub fn export_graph(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "dfa states={} letters={}",
            self.subsets.len(),
            self.alphabet.letter_count()
        );
        for q in 0..self.subsets.len() {
            let mut line = format!("node {q}");
            if q == 0 {
                line.push_str(" initial");
            }
            if self.finals[q] {
                line.push_str(" final");
            }
            let _ = writeln!(out, "{line}");
        }
        for (q, row) in self.delta.iter().enumerate() {
            for (letter, &r) in row.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "edge {q} {} {r}",
                    self.alphabet.format_letter(letter as Letter)
                );
            }
        }
        out
    }
}

/// Standard subset construction restricted to reachable subsets, in BFS
/// discovery order; a subset is final iff it contains an NFA final state;
/// totality comes from the implicit empty-subset sink.
pub fn subset_construction(nfa: &Nfa) -> Dfa {
    let letter_count = nfa.alphabet.letter_count();
    let start: Vec<u32> = nfa.initial.clone();
    let mut subsets: Vec<Vec<u32>> = vec![start.clone()];
    let mut index: HashMap<Vec<u32>, u32> = HashMap::new();
    index.insert(start, 0);
    let mut delta: Vec<Vec<u32>> = Vec::new();
    let mut queue: VecDeque<u32> = VecDeque::new();
    queue.push_back(0);
    let mut sink = None;

    while let Some(qi) = queue.pop_front() {
        let members = subsets[qi as usize].clone();
        let mut row = Vec::with_capacity(letter_count);
        for letter in 0..letter_count as Letter {
            let mut next: Vec<u32> = Vec::new();
            for &m in &members {
                next.extend_from_slice(nfa.successors(m, letter));
            }
            next.sort_unstable();
            next.dedup();
            let id = match index.get(&next) {
                Some(&id) => id,
                None => {
                    let id = subsets.len() as u32;
                    if next.is_empty() {
                        sink = Some(id);
                    }
                    index.insert(next.clone(), id);
                    subsets.push(next);
                    queue.push_back(id);
                    id
                }
            };
            row.push(id);
        }
        delta.push(row);
        debug_assert_eq!(delta.len() as u32 - 1, qi, "BFS emits rows in id order");
    }

    let final_mask: Vec<bool> = {
        let mut v = vec![false; nfa.state_count()];
        for &q in &nfa.finals {
            v[q as usize] = true;
        }
        v
    };
    let finals: Vec<bool> = subsets
        .iter()
        .map(|s| s.iter().any(|&m| final_mask[m as usize]))
        .collect();
    if subsets[0].is_empty() {
        sink = Some(0);
    }
    Dfa {
        alphabet: nfa.alphabet.clone(),
        subsets,
        delta,
        finals,
        sink,
    }
}
