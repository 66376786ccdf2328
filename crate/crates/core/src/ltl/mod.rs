//! Temporal formulas over named atomic propositions.
//!
//! The safety fragment consists of literals, conjunction, disjunction, next
//! and weak-until; negation of a compound formula is normalized away by
//! [`Formula::to_nnf`]. `true`, `false`, eventually and always are stored
//! desugared: `true = p | !p`, `false = p & !p` for a pivot atom, `<> f =
//! true U f`, `[] f = f W false`.

mod eval;
mod gen;
mod parse;

pub use eval::{classify_prefix, eval_lasso, LassoEvaluator, PrefixClass, PrefixEvaluator};
pub(crate) use eval::{index_closure, SubNode};
pub use gen::{gen_fail_exact_formula, gen_fail_formula, gen_modeswitch_formula};
pub use parse::parse_formula;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Errors from formula parsing, validation and automaton-facing helpers.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum LtlError {
    #[error("syntax error at column {col}: {msg}")]
    Syntax { col: usize, msg: String },
    #[error("atom `{0}` is not declared in the alphabet")]
    UndeclaredAtom(String),
    #[error("`{0}` is reserved and cannot be used as an atom name")]
    ReservedAtom(String),
    #[error("duplicate atom `{0}` in alphabet")]
    DuplicateAtom(String),
    #[error("alphabet holds {0} atoms; at most {max} are supported", max = MAX_ATOMS)]
    AlphabetTooLarge(usize),
    #[error("an empty alphabet cannot express true/false")]
    EmptyAlphabet,
    #[error("formula is not in the safety fragment (an until survives negation normalization)")]
    NotSafe,
    #[error("formula closure holds {0} subformulas; at most 128 are supported")]
    ClosureTooLarge(usize),
    #[error("invalid parameters: {0}")]
    BadParams(String),
}

/// Largest supported alphabet; letters are bitmasks in a `u32` and automata
/// enumerate all `2^|P|` letters explicitly.
pub const MAX_ATOMS: usize = 16;

/// Words read by automata are sequences of letters; a letter is the set of
/// atoms that hold at an instant, encoded as a bitmask over an [`Alphabet`].
pub type Letter = u32;

/// An ordered set of atom names fixing the letter encoding: bit `i` of a
/// [`Letter`] corresponds to `names()[i]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    index: HashMap<String, usize>,
}

/// Operator keywords of the concrete syntax; they cannot name atoms.
const RESERVED: [&str; 5] = ["X", "U", "W", "true", "false"];

impl Alphabet {
    /// Builds an alphabet from atom names in declaration order.
    pub fn new<I, S>(names: I) -> Result<Alphabet, LtlError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() > MAX_ATOMS {
            return Err(LtlError::AlphabetTooLarge(names.len()));
        }
        let mut index = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if RESERVED.contains(&n.as_str()) {
                return Err(LtlError::ReservedAtom(n.clone()));
            }
            if index.insert(n.clone(), i).is_some() {
                return Err(LtlError::DuplicateAtom(n.clone()));
            }
        }
        Ok(Alphabet { names, index })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Number of distinct letters, `2^|P|`.
    pub fn letter_count(&self) -> usize {
        1usize << self.names.len()
    }

    /// Bit position of `name`, if declared.
    pub fn bit(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// First declared atom; used as the pivot when desugaring true/false.
    pub fn pivot(&self) -> Result<&str, LtlError> {
        self.names.first().map(String::as_str).ok_or(LtlError::EmptyAlphabet)
    }

    /// Letter containing exactly the given atoms.
    pub fn letter<'a, I: IntoIterator<Item = &'a str>>(&self, atoms: I) -> Result<Letter, LtlError> {
        let mut mask = 0u32;
        for a in atoms {
            let bit = self.bit(a).ok_or_else(|| LtlError::UndeclaredAtom(a.to_string()))?;
            mask |= 1 << bit;
        }
        Ok(mask)
    }

    /// Renders a letter as a sorted atom set, e.g. `{f,stop}`.
    pub fn format_letter(&self, letter: Letter) -> String {
        let mut atoms: Vec<&str> = self
            .names
            .iter()
            .enumerate()
            .filter(|(i, _)| letter & (1 << i) != 0)
            .map(|(_, n)| n.as_str())
            .collect();
        atoms.sort_unstable();
        format!("{{{}}}", atoms.join(","))
    }
}

/// A finite word: the output trace observed so far.
pub type FiniteWord = Vec<Letter>;

/// An ultimately periodic word `stem . cycle^ω`; the cycle must be nonempty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoWord {
    pub stem: Vec<Letter>,
    pub cycle: Vec<Letter>,
}

impl LassoWord {
    pub fn new(stem: Vec<Letter>, cycle: Vec<Letter>) -> LassoWord {
        assert!(!cycle.is_empty(), "lasso cycle must be nonempty");
        LassoWord { stem, cycle }
    }

    /// Letter at absolute position `i` of the infinite unrolling.
    pub fn at(&self, i: usize) -> Letter {
        if i < self.stem.len() {
            self.stem[i]
        } else {
            self.cycle[(i - self.stem.len()) % self.cycle.len()]
        }
    }

    /// Finite prefix of length `n`.
    pub fn prefix(&self, n: usize) -> FiniteWord {
        (0..n).map(|i| self.at(i)).collect()
    }
}

/// Temporal formula. Compound negation is permitted structurally (the parser
/// produces it for implications) but every algorithm that needs normal form
/// calls [`Formula::to_nnf`] first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    WeakUntil(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Formula {
        Formula::Atom(name.into())
    }

    // Associated constructor, not a `self` method — cannot collide with
    // `std::ops::Not` at call sites (always `Formula::not(f)`).
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Formula {
        Formula::Next(Box::new(f))
    }

    /// `X^n f`.
    pub fn next_n(f: Formula, n: usize) -> Formula {
        (0..n).fold(f, |g, _| Formula::next(g))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn weak_until(a: Formula, b: Formula) -> Formula {
        Formula::WeakUntil(Box::new(a), Box::new(b))
    }

    /// `a -> b`, stored as `!a | b`.
    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::not(a), b)
    }

    /// `true`, stored as `pivot | !pivot`.
    pub fn tt(pivot: &str) -> Formula {
        Formula::or(Formula::atom(pivot), Formula::not(Formula::atom(pivot)))
    }

    /// `false`, stored as `pivot & !pivot`.
    pub fn ff(pivot: &str) -> Formula {
        Formula::and(Formula::atom(pivot), Formula::not(Formula::atom(pivot)))
    }

    /// `<> f`, stored as `true U f`.
    pub fn eventually(f: Formula, pivot: &str) -> Formula {
        Formula::until(Formula::tt(pivot), f)
    }

    /// `[] f`, stored as `f W false`.
    pub fn always(f: Formula, pivot: &str) -> Formula {
        Formula::weak_until(f, Formula::ff(pivot))
    }

    /// Does this match a desugared `true` (`p | !p` in either operand order)?
    pub fn is_true_const(&self) -> bool {
        match self {
            Formula::Or(a, b) => literal_pair_same_atom(a, b),
            _ => false,
        }
    }

    /// Does this match a desugared `false` (`p & !p` in either operand order)?
    pub fn is_false_const(&self) -> bool {
        match self {
            Formula::And(a, b) => literal_pair_same_atom(a, b),
            _ => false,
        }
    }

    /// Number of symbols (atoms and operators). A formula always has at
    /// least one symbol, so there is no `is_empty` counterpart.
    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> usize {
        match self {
            Formula::Atom(_) => 1,
            Formula::Not(f) | Formula::Next(f) => 1 + f.len(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Until(a, b)
            | Formula::WeakUntil(a, b) => 1 + a.len() + b.len(),
        }
    }

    /// Atom names used by the formula, in first-occurrence order.
    pub fn atoms(&self) -> Vec<&str> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a str>) {
            match f {
                Formula::Atom(a) => {
                    if !out.contains(&a.as_str()) {
                        out.push(a);
                    }
                }
                Formula::Not(g) | Formula::Next(g) => walk(g, out),
                Formula::And(a, b)
                | Formula::Or(a, b)
                | Formula::Until(a, b)
                | Formula::WeakUntil(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
        }
        walk(self, &mut out);
        out
    }

    /// True iff negation occurs over atoms only.
    pub fn is_nnf(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::Not(f) => matches!(**f, Formula::Atom(_)),
            Formula::Next(f) => f.is_nnf(),
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Until(a, b)
            | Formula::WeakUntil(a, b) => a.is_nnf() && b.is_nnf(),
        }
    }

    /// Negation normal form: pushes negation to atoms using
    /// `!!f = f`, `!X f = X !f`, de Morgan, `!(a U b) = !b W (!b & !a)` and
    /// `!(a W b) = !b U (!b & !a)`.
    pub fn to_nnf(&self) -> Formula {
        match self {
            Formula::Atom(_) => self.clone(),
            Formula::And(a, b) => Formula::and(a.to_nnf(), b.to_nnf()),
            Formula::Or(a, b) => Formula::or(a.to_nnf(), b.to_nnf()),
            Formula::Next(f) => Formula::next(f.to_nnf()),
            Formula::Until(a, b) => Formula::until(a.to_nnf(), b.to_nnf()),
            Formula::WeakUntil(a, b) => Formula::weak_until(a.to_nnf(), b.to_nnf()),
            Formula::Not(f) => f.negated_nnf(),
        }
    }

    /// Negation normal form of `!self`.
    pub fn negated_nnf(&self) -> Formula {
        match self {
            Formula::Atom(_) => Formula::not(self.clone()),
            Formula::Not(f) => f.to_nnf(),
            Formula::And(a, b) => Formula::or(a.negated_nnf(), b.negated_nnf()),
            Formula::Or(a, b) => Formula::and(a.negated_nnf(), b.negated_nnf()),
            Formula::Next(f) => Formula::next(f.negated_nnf()),
            Formula::Until(a, b) => {
                let nb = b.negated_nnf();
                Formula::weak_until(nb.clone(), Formula::and(nb, a.negated_nnf()))
            }
            Formula::WeakUntil(a, b) => {
                let nb = b.negated_nnf();
                Formula::until(nb.clone(), Formula::and(nb, a.negated_nnf()))
            }
        }
    }

    /// True iff the formula belongs to the safety fragment: after negation
    /// normalization no until remains.
    pub fn is_safe_ltl(&self) -> bool {
        fn no_until(f: &Formula) -> bool {
            match f {
                Formula::Atom(_) | Formula::Not(_) => true,
                Formula::Next(g) => no_until(g),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::WeakUntil(a, b) => {
                    no_until(a) && no_until(b)
                }
                Formula::Until(_, _) => false,
            }
        }
        no_until(&self.to_nnf())
    }

    /// All distinct subformulas including `self`, in post order (children
    /// before parents, first occurrence kept). Literals are leaves: a negated
    /// atom is one closure element and does not contribute the bare atom.
    pub fn closure(&self) -> Vec<Formula> {
        let mut out: Vec<Formula> = Vec::new();
        fn walk(f: &Formula, out: &mut Vec<Formula>) {
            match f {
                Formula::Atom(_) => {}
                Formula::Not(g) => {
                    if !matches!(**g, Formula::Atom(_)) {
                        walk(g, out);
                    }
                }
                Formula::Next(g) => walk(g, out),
                Formula::And(a, b)
                | Formula::Or(a, b)
                | Formula::Until(a, b)
                | Formula::WeakUntil(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
            }
            if !out.contains(f) {
                out.push(f.clone());
            }
        }
        walk(self, &mut out);
        out
    }
}

fn literal_pair_same_atom(a: &Formula, b: &Formula) -> bool {
    match (a, b) {
        (Formula::Atom(p), Formula::Not(n)) | (Formula::Not(n), Formula::Atom(p)) => {
            matches!(&**n, Formula::Atom(q) if q == p)
        }
        _ => false,
    }
}

/// Fully parenthesized prefix serialization, e.g. `(W (! p) q)`.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(g) => write!(f, "(! {g})"),
            Formula::And(a, b) => write!(f, "(& {a} {b})"),
            Formula::Or(a, b) => write!(f, "(| {a} {b})"),
            Formula::Next(g) => write!(f, "(X {g})"),
            Formula::Until(a, b) => write!(f, "(U {a} {b})"),
            Formula::WeakUntil(a, b) => write!(f, "(W {a} {b})"),
        }
    }
}
