//! Formula evaluation on words: exact model checking of ultimately periodic
//! words and three-valued classification of finite prefixes.
//!
//! Both evaluators compile the formula once into an indexed closure
//! ([`SubNode`] per closure element, children referenced by index) so that
//! large word sweeps pay no per-word formula traversal cost.

use std::collections::HashMap;

use super::{Alphabet, FiniteWord, Formula, LassoWord, Letter, LtlError};

/// A closure element with children resolved to closure indices. Literals are
/// leaves carrying their alphabet bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum SubNode {
    Lit { bit: usize, neg: bool },
    And(usize, usize),
    Or(usize, usize),
    Next(usize),
    Until(usize, usize),
    WeakUntil(usize, usize),
}

impl SubNode {
    pub(crate) fn is_until(&self) -> bool {
        matches!(self, SubNode::Until(_, _))
    }
}

/// Indexes the closure of an NNF formula: returns the closure in post order
/// together with one [`SubNode`] per element. The root is the last index.
pub(crate) fn index_closure(
    nnf: &Formula,
    alphabet: &Alphabet,
) -> Result<(Vec<Formula>, Vec<SubNode>), LtlError> {
    debug_assert!(nnf.is_nnf(), "index_closure requires negation normal form");
    let closure = nnf.closure();
    if closure.len() > 128 {
        return Err(LtlError::ClosureTooLarge(closure.len()));
    }
    let index: HashMap<&Formula, usize> = closure.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let child = |f: &Formula| -> usize {
        *index
            .get(f)
            .expect("closure is downward closed: every child of an element is an element")
    };
    let mut nodes = Vec::with_capacity(closure.len());
    for f in &closure {
        let node = match f {
            Formula::Atom(a) => SubNode::Lit {
                bit: alphabet
                    .bit(a)
                    .ok_or_else(|| LtlError::UndeclaredAtom(a.clone()))?,
                neg: false,
            },
            Formula::Not(g) => match &**g {
                Formula::Atom(a) => SubNode::Lit {
                    bit: alphabet
                        .bit(a)
                        .ok_or_else(|| LtlError::UndeclaredAtom(a.clone()))?,
                    neg: true,
                },
                _ => unreachable!("negation over compounds is removed by normalization"),
            },
            Formula::And(a, b) => SubNode::And(child(a), child(b)),
            Formula::Or(a, b) => SubNode::Or(child(a), child(b)),
            Formula::Next(a) => SubNode::Next(child(a)),
            Formula::Until(a, b) => SubNode::Until(child(a), child(b)),
            Formula::WeakUntil(a, b) => SubNode::WeakUntil(child(a), child(b)),
        };
        nodes.push(node);
    }
    Ok((closure, nodes))
}

/// Exact model checker for `stem . cycle^ω ⊨ f`, reusable across words.
#[derive(Debug, Clone)]
pub struct LassoEvaluator {
    nodes: Vec<SubNode>,
}

impl LassoEvaluator {
    /// Compiles `f` (normalized internally) over `alphabet`.
    pub fn new(f: &Formula, alphabet: &Alphabet) -> Result<LassoEvaluator, LtlError> {
        let (_, nodes) = index_closure(&f.to_nnf(), alphabet)?;
        Ok(LassoEvaluator { nodes })
    }

    /// Evaluates the compiled formula on a lasso word.
    ///
    /// Each position of the finite unrolling `stem . cycle` gets one truth
    /// value per closure element, computed children-first; the rows of
    /// temporal operators are solved as loop-back fixpoints (least for
    /// until, greatest for weak-until).
    pub fn eval(&self, w: &LassoWord) -> bool {
        let sl = w.stem.len();
        let n = sl + w.cycle.len();
        let next = |i: usize| if i + 1 < n { i + 1 } else { sl };
        let letters: Vec<Letter> = (0..n).map(|i| w.at(i)).collect();

        let mut val: Vec<Vec<bool>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let row: Vec<bool> = match *node {
                SubNode::Lit { bit, neg } => letters
                    .iter()
                    .map(|l| ((l >> bit) & 1 == 1) != neg)
                    .collect(),
                SubNode::And(a, b) => (0..n).map(|i| val[a][i] && val[b][i]).collect(),
                SubNode::Or(a, b) => (0..n).map(|i| val[a][i] || val[b][i]).collect(),
                SubNode::Next(a) => (0..n).map(|i| val[a][next(i)]).collect(),
                SubNode::Until(a, b) => fixpoint(n, sl, false, &val[a], &val[b]),
                SubNode::WeakUntil(a, b) => fixpoint(n, sl, true, &val[a], &val[b]),
            };
            val.push(row);
        }
        val.last().map(|row| row[0]).unwrap_or_else(|| {
            unreachable!("closure of a formula is nonempty")
        })
    }
}

/// Solves `row[i] = b[i] || (a[i] && row[next(i)])` on the loop structure,
/// starting from `init` everywhere (false: least fixpoint; true: greatest).
fn fixpoint(n: usize, loop_start: usize, init: bool, a: &[bool], b: &[bool]) -> Vec<bool> {
    let next = |i: usize| if i + 1 < n { i + 1 } else { loop_start };
    let mut row = vec![init; n];
    loop {
        let mut changed = false;
        for i in (0..n).rev() {
            let v = b[i] || (a[i] && row[next(i)]);
            if v != row[i] {
                row[i] = v;
                changed = true;
            }
        }
        if !changed {
            return row;
        }
    }
}

/// One-shot convenience wrapper over [`LassoEvaluator`].
pub fn eval_lasso(f: &Formula, alphabet: &Alphabet, w: &LassoWord) -> Result<bool, LtlError> {
    Ok(LassoEvaluator::new(f, alphabet)?.eval(w))
}

/// Verdict of a finite prefix against a formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PrefixClass {
    /// Every infinite extension satisfies the formula.
    DefTrue,
    /// No infinite extension satisfies the formula (a bad prefix).
    DefFalse,
    /// Some extensions satisfy it and some violate it.
    Open,
}

/// Three-valued finite-prefix classifier for formulas whose normal form is
/// until-free, reusable across words.
#[derive(Debug, Clone)]
pub struct PrefixEvaluator {
    nodes: Vec<SubNode>,
}

impl PrefixEvaluator {
    /// Compiles `f`; fails with [`LtlError::NotSafe`] if an until survives
    /// normalization, since the bad-prefix reading of `DefFalse` is only
    /// sound on the safety fragment.
    pub fn new(f: &Formula, alphabet: &Alphabet) -> Result<PrefixEvaluator, LtlError> {
        let (_, nodes) = index_closure(&f.to_nnf(), alphabet)?;
        if nodes.iter().any(SubNode::is_until) {
            return Err(LtlError::NotSafe);
        }
        Ok(PrefixEvaluator { nodes })
    }

    /// Classifies a finite word.
    ///
    /// Two truth tables are computed per closure element over positions
    /// `0..=n` where position `n` stands for "past the end": `weak` (some
    /// extension satisfies, true past the end) and `strong` (every extension
    /// satisfies, false past the end). The verdict reads the root at
    /// position 0: strong ⇒ `DefTrue`, not weak ⇒ `DefFalse`.
    pub fn classify(&self, w: &FiniteWord) -> PrefixClass {
        let n = w.len();
        let mut weak: Vec<Vec<bool>> = Vec::with_capacity(self.nodes.len());
        let mut strong: Vec<Vec<bool>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let (wrow, srow) = match *node {
                SubNode::Lit { bit, neg } => {
                    let mut wr = vec![true; n + 1];
                    let mut sr = vec![false; n + 1];
                    for (i, l) in w.iter().enumerate() {
                        let v = ((l >> bit) & 1 == 1) != neg;
                        wr[i] = v;
                        sr[i] = v;
                    }
                    (wr, sr)
                }
                SubNode::And(a, b) => (
                    (0..=n).map(|i| weak[a][i] && weak[b][i]).collect(),
                    (0..=n).map(|i| strong[a][i] && strong[b][i]).collect(),
                ),
                SubNode::Or(a, b) => (
                    (0..=n).map(|i| weak[a][i] || weak[b][i]).collect(),
                    (0..=n).map(|i| strong[a][i] || strong[b][i]).collect(),
                ),
                SubNode::Next(a) => {
                    let mut wr = vec![true; n + 1];
                    let mut sr = vec![false; n + 1];
                    wr[..n].copy_from_slice(&weak[a][1..=n]);
                    sr[..n].copy_from_slice(&strong[a][1..=n]);
                    (wr, sr)
                }
                SubNode::WeakUntil(a, b) => {
                    let mut wr = vec![true; n + 1];
                    let mut sr = vec![false; n + 1];
                    for i in (0..n).rev() {
                        wr[i] = weak[b][i] || (weak[a][i] && wr[i + 1]);
                        sr[i] = strong[b][i] || (strong[a][i] && sr[i + 1]);
                    }
                    (wr, sr)
                }
                SubNode::Until(_, _) => unreachable!("rejected at construction"),
            };
            weak.push(wrow);
            strong.push(srow);
        }
        let root = self.nodes.len() - 1;
        if strong[root][0] {
            PrefixClass::DefTrue
        } else if !weak[root][0] {
            PrefixClass::DefFalse
        } else {
            PrefixClass::Open
        }
    }
}

/// One-shot convenience wrapper over [`PrefixEvaluator`].
pub fn classify_prefix(
    f: &Formula,
    alphabet: &Alphabet,
    w: &FiniteWord,
) -> Result<PrefixClass, LtlError> {
    Ok(PrefixEvaluator::new(f, alphabet)?.classify(w))
}
