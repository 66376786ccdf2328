//! Property tests tying the three independent views of a specification to
//! each other: formula evaluation on lasso words, three-valued prefix
//! classification, and the constructed monitor automata.

use proptest::prelude::*;

use safesynth::automata::{construct_fine_nfa, subset_construction};
use safesynth::ltl::{
    classify_prefix, eval_lasso, Alphabet, FiniteWord, Formula, LassoWord, Letter, PrefixClass,
};

const ATOMS: [&str; 3] = ["p", "q", "r"];

fn alphabet() -> Alphabet {
    Alphabet::new(ATOMS).unwrap()
}

fn letters() -> impl Strategy<Value = Letter> {
    0u32..8
}

fn lassos() -> impl Strategy<Value = LassoWord> {
    (
        prop::collection::vec(letters(), 0..4),
        prop::collection::vec(letters(), 1..4),
    )
        .prop_map(|(stem, cycle)| LassoWord::new(stem, cycle))
}

fn words() -> impl Strategy<Value = FiniteWord> {
    prop::collection::vec(letters(), 0..8)
}

/// Formulas in the full grammar, negation anywhere.
fn any_formula() -> impl Strategy<Value = Formula> {
    let leaf = (0..ATOMS.len()).prop_map(|i| Formula::atom(ATOMS[i]));
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            inner.clone().prop_map(Formula::next),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::until(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::weak_until(a, b)),
        ]
    })
}

/// Formulas already in the safety fragment: negation on atoms only, no
/// strong until.
fn safe_formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        (0..ATOMS.len()).prop_map(|i| Formula::atom(ATOMS[i])),
        (0..ATOMS.len()).prop_map(|i| Formula::not(Formula::atom(ATOMS[i]))),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            inner.clone().prop_map(Formula::next),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::weak_until(a, b)),
        ]
    })
}

proptest! {
    /// Negation normal form neither changes the language nor keeps any
    /// negation above a literal.
    #[test]
    fn nnf_preserves_lasso_semantics(f in any_formula(), w in lassos()) {
        let ab = alphabet();
        let nnf = f.to_nnf();
        prop_assert!(nnf.is_nnf());
        prop_assert_eq!(
            eval_lasso(&f, &ab, &w).unwrap(),
            eval_lasso(&nnf, &ab, &w).unwrap()
        );
    }

    /// `negated_nnf` builds the complement.
    #[test]
    fn negated_nnf_complements(f in any_formula(), w in lassos()) {
        let ab = alphabet();
        let neg = f.negated_nnf();
        prop_assert!(neg.is_nnf());
        prop_assert_eq!(
            eval_lasso(&neg, &ab, &w).unwrap(),
            !eval_lasso(&f, &ab, &w).unwrap()
        );
    }

    /// Both untils satisfy their one-step expansion laws.
    #[test]
    fn until_expansion_laws(a in any_formula(), b in any_formula(), w in lassos()) {
        let ab = alphabet();
        let strong = Formula::until(a.clone(), b.clone());
        let strong_unrolled = Formula::or(
            b.clone(),
            Formula::and(a.clone(), Formula::next(strong.clone())),
        );
        prop_assert_eq!(
            eval_lasso(&strong, &ab, &w).unwrap(),
            eval_lasso(&strong_unrolled, &ab, &w).unwrap()
        );
        let weak = Formula::weak_until(a.clone(), b.clone());
        let weak_unrolled = Formula::or(b, Formula::and(a, Formula::next(weak.clone())));
        prop_assert_eq!(
            eval_lasso(&weak, &ab, &w).unwrap(),
            eval_lasso(&weak_unrolled, &ab, &w).unwrap()
        );
    }

    /// The generated safety strategy really is in the fragment, and prefix
    /// verdicts only harden as more letters arrive.
    #[test]
    fn classification_monotone_under_extension(f in safe_formula(), w in words(), a in letters()) {
        let ab = alphabet();
        prop_assert!(f.is_safe_ltl());
        let before = classify_prefix(&f, &ab, &w).unwrap();
        let mut longer = w.clone();
        longer.push(a);
        let after = classify_prefix(&f, &ab, &longer).unwrap();
        match before {
            PrefixClass::DefFalse => prop_assert_eq!(after, PrefixClass::DefFalse),
            PrefixClass::DefTrue => prop_assert_eq!(after, PrefixClass::DefTrue),
            PrefixClass::Open => {}
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The fine NFA, its determinization, and the three-valued classifier
    /// agree on which prefixes are bad.
    #[test]
    fn automata_agree_with_classifier(f in safe_formula(), w in words()) {
        let ab = alphabet();
        let nfa = construct_fine_nfa(&f, &ab).unwrap();
        let dfa = subset_construction(&nfa);
        let bad = classify_prefix(&f, &ab, &w).unwrap() == PrefixClass::DefFalse;
        prop_assert_eq!(nfa.accepts(&w), bad, "NFA disagrees with classifier");
        prop_assert_eq!(dfa.accepts(&w), bad, "DFA disagrees with classifier");
    }

    /// Accepting states of the determinized monitor are a trap: once a bad
    /// prefix is seen, every continuation stays bad.
    #[test]
    fn dfa_final_states_trap(f in safe_formula()) {
        let ab = alphabet();
        let dfa = subset_construction(&construct_fine_nfa(&f, &ab).unwrap());
        for q in 0..dfa.state_count() as u32 {
            if !dfa.is_final(q) {
                continue;
            }
            for l in 0..ab.letter_count() as Letter {
                prop_assert!(dfa.is_final(dfa.step(q, l)), "final state {q} escapes on {l}");
            }
        }
    }

    /// On ultimately periodic words, a safety violation shows up as a bad
    /// prefix no longer than `|stem| + |cycle| * |DFA|`, and a satisfied
    /// lasso never produces one.
    #[test]
    fn lasso_violations_surface_within_pumping_bound(f in safe_formula(), w in lassos()) {
        let ab = alphabet();
        let dfa = subset_construction(&construct_fine_nfa(&f, &ab).unwrap());
        let bound = w.stem.len() + w.cycle.len() * dfa.state_count();
        let mut q = dfa.initial();
        let mut hit = None;
        for i in 0..bound {
            q = dfa.step(q, w.at(i));
            if dfa.is_final(q) {
                hit = Some(i + 1);
                break;
            }
        }
        let satisfied = eval_lasso(&f, &ab, &w).unwrap();
        prop_assert_eq!(hit.is_none(), satisfied, "bad-prefix detection vs lasso semantics");
    }
}
