//! Finite transition systems with named inputs and atom-set outputs:
//! construction, validation, text round-tripping, synchronous product with a
//! monitor DFA, and restriction to a strategy-set.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use crate::automata::Dfa;
use crate::ltl::{Alphabet, Letter};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TsError {
    #[error("unknown state id {0}")]
    UnknownState(u32),
    #[error("unknown input id {0}")]
    UnknownInput(u32),
    #[error("unknown input name `{0}`")]
    UnknownInputName(String),
    #[error("state {state} (`{name}`) has no successor under input `{input}`")]
    Blocking {
        state: u32,
        name: String,
        input: String,
    },
    #[error("system text line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("output alphabet of the system differs from the automaton's")]
    AlphabetMismatch,
    #[error("restriction table covers {got} states, system has {want}")]
    RestrictionSize { got: usize, want: usize },
    #[error(transparent)]
    Ltl(#[from] crate::ltl::LtlError),
}

/// A finite system: dense state ids with names, named inputs, a (possibly
/// nondeterministic) transition relation, and an output letter per state.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSystem {
    atoms: Alphabet,
    input_names: Vec<String>,
    state_names: Vec<String>,
    labels: Vec<Letter>,
    initial: Vec<bool>,
    /// `succ[state][input]`, each sorted ascending and deduplicated.
    succ: Vec<Vec<Vec<u32>>>,
}

impl TransitionSystem {
    /// Builds a system from parts; transition endpoints are validated, the
    /// non-blocking invariant is not (see [`TransitionSystem::validate_non_blocking`]).
    pub fn new(
        atoms: Alphabet,
        input_names: Vec<String>,
        states: Vec<(String, Letter, bool)>,
        transitions: &[(u32, u32, u32)],
    ) -> Result<TransitionSystem, TsError> {
        let n = states.len();
        let m = input_names.len();
        let mut state_names = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        let mut initial = Vec::with_capacity(n);
        for (name, label, init) in states {
            state_names.push(name);
            labels.push(label);
            initial.push(init);
        }
        let mut succ = vec![vec![Vec::new(); m]; n];
        for &(src, input, dst) in transitions {
            if src as usize >= n {
                return Err(TsError::UnknownState(src));
            }
            if dst as usize >= n {
                return Err(TsError::UnknownState(dst));
            }
            if input as usize >= m {
                return Err(TsError::UnknownInput(input));
            }
            succ[src as usize][input as usize].push(dst);
        }
        for per_state in &mut succ {
            for targets in per_state {
                targets.sort_unstable();
                targets.dedup();
            }
        }
        Ok(TransitionSystem {
            atoms,
            input_names,
            state_names,
            labels,
            initial,
            succ,
        })
    }

    pub fn atoms(&self) -> &Alphabet {
        &self.atoms
    }

    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    pub fn input_count(&self) -> usize {
        self.input_names.len()
    }

    pub fn state_name(&self, x: u32) -> &str {
        &self.state_names[x as usize]
    }

    pub fn input_name(&self, u: u32) -> &str {
        &self.input_names[u as usize]
    }

    pub fn input_id(&self, name: &str) -> Option<u32> {
        self.input_names.iter().position(|n| n == name).map(|i| i as u32)
    }

    /// Output letter of a state.
    pub fn label(&self, x: u32) -> Letter {
        self.labels[x as usize]
    }

    pub fn is_initial(&self, x: u32) -> bool {
        self.initial[x as usize]
    }

    pub fn initial_states(&self) -> Vec<u32> {
        (0..self.state_count() as u32).filter(|&x| self.initial[x as usize]).collect()
    }

    /// Successor set of `x` under `u`, sorted ascending.
    pub fn post(&self, x: u32, u: u32) -> Result<&[u32], TsError> {
        if x as usize >= self.state_count() {
            return Err(TsError::UnknownState(x));
        }
        if u as usize >= self.input_count() {
            return Err(TsError::UnknownInput(u));
        }
        Ok(&self.succ[x as usize][u as usize])
    }

    /// Unchecked successor access for solver loops.
    pub(crate) fn post_raw(&self, x: u32, u: u32) -> &[u32] {
        &self.succ[x as usize][u as usize]
    }

    /// Verifies every (state, input) pair has a successor; reports the first
    /// offender by name.
    pub fn validate_non_blocking(&self) -> Result<(), TsError> {
        for x in 0..self.state_count() as u32 {
            for u in 0..self.input_count() as u32 {
                if self.succ[x as usize][u as usize].is_empty() {
                    return Err(TsError::Blocking {
                        state: x,
                        name: self.state_names[x as usize].clone(),
                        input: self.input_names[u as usize].clone(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Drops every transition whose input is not allowed at its source.
    /// Returns the restricted system and the states left with no outgoing
    /// transition at all (losing states outside any winning region).
    pub fn restrict(&self, allowed: &[Vec<u32>]) -> Result<(TransitionSystem, Vec<u32>), TsError> {
        if allowed.len() != self.state_count() {
            return Err(TsError::RestrictionSize {
                got: allowed.len(),
                want: self.state_count(),
            });
        }
        let mut out = self.clone();
        for (x, per_state) in out.succ.iter_mut().enumerate() {
            for (u, targets) in per_state.iter_mut().enumerate() {
                if !allowed[x].contains(&(u as u32)) {
                    targets.clear();
                }
            }
        }
        let blocking = (0..self.state_count() as u32)
            .filter(|&x| out.succ[x as usize].iter().all(Vec::is_empty))
            .collect();
        Ok((out, blocking))
    }

    /// A copy with one specific transition removed (useful for checking
    /// that soundness tests actually detect missing successors).
    pub fn without_transition(&self, src: u32, input: u32, dst: u32) -> TransitionSystem {
        let mut out = self.clone();
        out.succ[src as usize][input as usize].retain(|&y| y != dst);
        out
    }

    /// Serializes to the line-oriented text format, optionally preceded by
    /// `#` comment lines.
    pub fn to_text_with_comments(&self, comments: &[String]) -> String {
        let mut out = String::new();
        for c in comments {
            let _ = writeln!(out, "# {c}");
        }
        let _ = writeln!(out, "atoms: {}", self.atoms.names().join(" "));
        let _ = writeln!(out, "inputs: {}", self.input_names.join(" "));
        for x in 0..self.state_count() {
            let mut line = format!(
                "state {x} {} labels={}",
                self.state_names[x],
                self.atoms.format_letter(self.labels[x])
            );
            if self.initial[x] {
                line.push_str(" init");
            }
            let _ = writeln!(out, "{line}");
        }
        for x in 0..self.state_count() {
            for u in 0..self.input_count() {
                for &y in &self.succ[x][u] {
                    let _ = writeln!(out, "trans {x} {} {y}", self.input_names[u]);
                }
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        self.to_text_with_comments(&[])
    }
}

/// Atom names used by [`random_system`]; fuzzers that pair random formulas
/// with random systems should draw from the same pool so alphabets line up.
pub const ATOM_POOL: [&str; 8] = ["p", "q", "r", "s", "t", "w0", "w1", "w2"];

/// Seeded random non-blocking system: 1..=`max_states` states,
/// 1..=`max_inputs` inputs, outputs over the first `n_atoms` pool atoms,
/// at least one initial state, and 1–3 successors per (state, input).
pub fn random_system(seed: u64, max_states: usize, max_inputs: usize, n_atoms: usize) -> TransitionSystem {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_states.max(1));
    let m = rng.gen_range(1..=max_inputs.max(1));
    let atoms = Alphabet::new(ATOM_POOL.iter().copied().take(n_atoms))
        .expect("pool names are valid");
    let states: Vec<(String, Letter, bool)> = (0..n)
        .map(|x| {
            (
                format!("n{x}"),
                rng.gen_range(0..atoms.letter_count()) as Letter,
                rng.gen_bool(0.3),
            )
        })
        .collect();
    let mut transitions = Vec::new();
    for x in 0..n as u32 {
        for u in 0..m as u32 {
            for _ in 0..rng.gen_range(1..=3usize) {
                transitions.push((x, u, rng.gen_range(0..n) as u32));
            }
        }
    }
    let inputs = (0..m).map(|u| format!("u{u}")).collect();
    let mut sys = TransitionSystem::new(atoms, inputs, states, &transitions)
        .expect("generated ids are in range");
    if sys.initial_states().is_empty() {
        sys.initial[0] = true;
    }
    sys
}

/// Parses the text format produced by [`TransitionSystem::to_text`] and
/// validates the non-blocking invariant.
pub fn load_system(text: &str) -> Result<TransitionSystem, TsError> {
    let mut atoms: Option<Alphabet> = None;
    let mut inputs: Vec<String> = Vec::new();
    let mut states: Vec<(String, Letter, bool)> = Vec::new();
    let mut transitions: Vec<(u32, u32, u32)> = Vec::new();
    let mut saw_inputs = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |msg: String| TsError::Parse {
            line: lineno + 1,
            msg,
        };
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("atoms:") {
            atoms = Some(Alphabet::new(rest.split_whitespace())?);
            continue;
        }
        if let Some(rest) = line.strip_prefix("inputs:") {
            inputs = rest.split_whitespace().map(String::from).collect();
            if inputs.is_empty() {
                return Err(err("at least one input is required".into()));
            }
            saw_inputs = true;
            continue;
        }
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("state") => {
                let alphabet = atoms.as_ref().ok_or_else(|| err("`state` before `atoms:`".into()))?;
                let id: u32 = tok
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err("expected numeric state id".into()))?;
                if id as usize != states.len() {
                    return Err(err(format!(
                        "state ids must be dense and in order; expected {}, got {id}",
                        states.len()
                    )));
                }
                let name = tok.next().ok_or_else(|| err("expected state name".into()))?.to_string();
                let labels_tok = tok.next().ok_or_else(|| err("expected labels={...}".into()))?;
                let set = labels_tok
                    .strip_prefix("labels={")
                    .and_then(|t| t.strip_suffix('}'))
                    .ok_or_else(|| err("expected labels={...}".into()))?;
                let letter = alphabet.letter(set.split(',').filter(|a| !a.is_empty()))?;
                let init = match tok.next() {
                    None => false,
                    Some("init") => true,
                    Some(other) => return Err(err(format!("unexpected token `{other}`"))),
                };
                states.push((name, letter, init));
            }
            Some("trans") => {
                if !saw_inputs {
                    return Err(err("`trans` before `inputs:`".into()));
                }
                let src: u32 = tok
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err("expected numeric source id".into()))?;
                let input_name = tok.next().ok_or_else(|| err("expected input name".into()))?;
                let input = inputs
                    .iter()
                    .position(|n| n == input_name)
                    .ok_or_else(|| TsError::UnknownInputName(input_name.to_string()))?;
                let dst: u32 = tok
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| err("expected numeric target id".into()))?;
                transitions.push((src, input as u32, dst));
            }
            Some(other) => return Err(err(format!("unknown directive `{other}`"))),
            None => unreachable!("blank lines were skipped"),
        }
    }

    let atoms = atoms.ok_or(TsError::Parse {
        line: 0,
        msg: "missing `atoms:` header".into(),
    })?;
    if !saw_inputs {
        return Err(TsError::Parse {
            line: 0,
            msg: "missing `inputs:` header".into(),
        });
    }
    let sys = TransitionSystem::new(atoms, inputs, states, &transitions)?;
    sys.validate_non_blocking()?;
    Ok(sys)
}

/// Synchronous composition of a system with a monitor DFA.
///
/// Product states pair a system state with the DFA state reached after the
/// output trace so far — including the very first output, which is consumed
/// at initialization. Unsafe product states are those whose DFA component is
/// final (the monitor has recognized a violation).
#[derive(Debug, Clone)]
pub struct ProductSystem {
    sys: TransitionSystem,
    pairs: Vec<(u32, u32)>,
    index: HashMap<(u32, u32), u32>,
    safe: Vec<bool>,
}

impl ProductSystem {
    pub fn system(&self) -> &TransitionSystem {
        &self.sys
    }

    pub fn state_count(&self) -> usize {
        self.pairs.len()
    }

    /// (system state, DFA state) behind a product state.
    pub fn pair(&self, p: u32) -> (u32, u32) {
        self.pairs[p as usize]
    }

    pub fn product_id(&self, x: u32, q: u32) -> Option<u32> {
        self.index.get(&(x, q)).copied()
    }

    /// `true` where the DFA component is non-final.
    pub fn safe_mask(&self) -> &[bool] {
        &self.safe
    }

    /// Serializes the underlying system with provenance comments mapping
    /// product ids to their (state, DFA state) pairs.
    pub fn to_text(&self) -> String {
        let comments: Vec<String> = std::iter::once("product system".to_string())
            .chain(
                self.pairs
                    .iter()
                    .enumerate()
                    .map(|(p, (x, q))| format!("pair {p} = (state {x}, dfa {q})")),
            )
            .collect();
        self.sys.to_text_with_comments(&comments)
    }
}

/// Builds the reachable synchronous product of `s` and `d`.
///
/// Initial states are `(x0, δ(q0, H(x0)))`; a step on input `u` moves both
/// components, the DFA reading the *successor's* output: `(x,q) →u (x',
/// δ(q, H(x')))`. Outputs and inputs carry over unchanged, so the product is
/// again a well-formed system (non-blocking whenever `s` is, since the DFA
/// is total).
pub fn product(s: &TransitionSystem, d: &Dfa) -> Result<ProductSystem, TsError> {
    if s.atoms() != d.alphabet() {
        return Err(TsError::AlphabetMismatch);
    }
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let mut index: HashMap<(u32, u32), u32> = HashMap::new();
    let mut queue: VecDeque<u32> = VecDeque::new();
    let mut intern = |pair: (u32, u32),
                      pairs: &mut Vec<(u32, u32)>,
                      queue: &mut VecDeque<u32>|
     -> u32 {
        match index.get(&pair) {
            Some(&p) => p,
            None => {
                let p = pairs.len() as u32;
                pairs.push(pair);
                index.insert(pair, p);
                queue.push_back(p);
                p
            }
        }
    };

    for x in s.initial_states() {
        let q = d.step(d.initial(), s.label(x));
        intern((x, q), &mut pairs, &mut queue);
    }
    let mut transitions: Vec<(u32, u32, u32)> = Vec::new();
    while let Some(p) = queue.pop_front() {
        let (x, q) = pairs[p as usize];
        for u in 0..s.input_count() as u32 {
            for &x2 in s.post_raw(x, u) {
                let q2 = d.step(q, s.label(x2));
                let p2 = intern((x2, q2), &mut pairs, &mut queue);
                transitions.push((p, u, p2));
            }
        }
    }

    let states: Vec<(String, Letter, bool)> = pairs
        .iter()
        .map(|&(x, q)| {
            // A pair is initial exactly when it arises from an initial
            // system state with the DFA's first read.
            let init = s.is_initial(x) && d.step(d.initial(), s.label(x)) == q;
            (format!("{}|q{q}", s.state_name(x)), s.label(x), init)
        })
        .collect();
    let sys = TransitionSystem::new(
        s.atoms().clone(),
        (0..s.input_count()).map(|u| s.input_name(u as u32).to_string()).collect(),
        states,
        &transitions,
    )?;
    let safe = pairs.iter().map(|&(_, q)| !d.is_final(q)).collect();
    Ok(ProductSystem {
        sys,
        pairs,
        index,
        safe,
    })
}
