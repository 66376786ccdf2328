//! Generators for the two specification families used by the case studies:
//! fault-tolerance monitors over a sliding window of sensor readings, and
//! scenario/goal mode-switching templates.

use super::{Formula, LtlError};

/// Name of the sensor-failure atom the fault templates are written over.
pub const FAULT_ATOM: &str = "f";

/// Builds `[] (window -> X^n consequent)` where `window` flags a pattern of
/// `f` readings among the next `n` cycles.
///
/// For the two window sizes with fixed canonical shapes — `(3,2)` and
/// `(3,1)` — the antecedent is emitted verbatim in that shape, including the
/// `(3,1)` variant whose disjuncts mix positive and negated readings. For
/// every other `(n,k)` the antecedent is "at least k of the n positions read
/// `f`": a disjunction over all k-subsets of window offsets in lexicographic
/// order, each a conjunction of `X^i f` chains.
pub fn gen_fail_formula(n: usize, k: usize, consequent: Formula) -> Result<Formula, LtlError> {
    if k < 1 || k > n {
        return Err(LtlError::BadParams(format!(
            "window pattern needs 1 <= k <= n, got n={n}, k={k}"
        )));
    }
    let f = || Formula::atom(FAULT_ATOM);
    let nf = || Formula::not(Formula::atom(FAULT_ATOM));
    let at = |lit: Formula, i: usize| Formula::next_n(lit, i);

    let antecedent = match (n, k) {
        (3, 2) => or_all(vec![
            and_all(vec![at(f(), 0), at(f(), 1)]),
            and_all(vec![at(f(), 1), at(f(), 2)]),
            and_all(vec![at(f(), 0), at(f(), 2)]),
        ]),
        (3, 1) => or_all(vec![
            and_all(vec![at(f(), 0), at(f(), 1), at(nf(), 2)]),
            and_all(vec![at(nf(), 0), at(f(), 1), at(f(), 2)]),
            and_all(vec![at(f(), 0), at(nf(), 1), at(f(), 2)]),
        ]),
        _ => {
            let disjuncts = k_subsets(n, k)
                .into_iter()
                .map(|s| and_all(s.into_iter().map(|i| at(f(), i)).collect()))
                .collect();
            or_all(disjuncts)
        }
    };
    let body = Formula::implies(antecedent, Formula::next_n(consequent, n));
    Ok(Formula::always(body, FAULT_ATOM))
}

/// Builds `[] (window -> X^n consequent)` where `window` holds when
/// exactly `k` of the next `n` readings are `!f` (every disjunct pins all
/// `n` positions, negating one k-subset). This is the companion family to
/// [`gen_fail_formula`] — its `(3,1)` instance coincides with the fixed
/// canonical shape there — and serves as a cross-tool size benchmark.
///
/// `nested` selects how each disjunct's literal chain is written: flat
/// (`f & X f & X X !f`, left-associated) or next-factored
/// (`f & X (f & X !f)`). Both spellings are equivalent, but they pass
/// through monitor construction as differently shaped syntax trees and so
/// yield different automaton sizes.
pub fn gen_fail_exact_formula(
    n: usize,
    k: usize,
    nested: bool,
    consequent: Formula,
) -> Result<Formula, LtlError> {
    if k < 1 || k > n {
        return Err(LtlError::BadParams(format!(
            "window pattern needs 1 <= k <= n, got n={n}, k={k}"
        )));
    }
    let lit = |healthy: bool| {
        if healthy {
            Formula::not(Formula::atom(FAULT_ATOM))
        } else {
            Formula::atom(FAULT_ATOM)
        }
    };
    let disjuncts: Vec<Formula> = k_subsets(n, k)
        .into_iter()
        .map(|negs| {
            if nested {
                // lit ∧ X(lit ∧ X(... lit)), innermost position last.
                let mut acc = lit(negs.contains(&(n - 1)));
                for i in (0..n - 1).rev() {
                    acc = Formula::and(lit(negs.contains(&i)), Formula::next(acc));
                }
                acc
            } else {
                and_all(
                    (0..n)
                        .map(|i| Formula::next_n(lit(negs.contains(&i)), i))
                        .collect(),
                )
            }
        })
        .collect();
    let body = Formula::implies(or_all(disjuncts), Formula::next_n(consequent, n));
    Ok(Formula::always(body, FAULT_ATOM))
}

/// Builds the mode-switching specification `[] (AND_i phi_i)` with
/// `phi_i = scen_i -> ((scen_i & !goal_i) W ((scen_i & goal_i) W !scen_i))`:
/// while a scenario is active its goal must be reached and then held until
/// the scenario ends.
pub fn gen_modeswitch_formula(pairs: &[(Formula, Formula)]) -> Result<Formula, LtlError> {
    if pairs.is_empty() {
        return Err(LtlError::BadParams(
            "mode-switching template needs at least one (scenario, goal) pair".into(),
        ));
    }
    let parts = pairs
        .iter()
        .map(|(scen, goal)| {
            let pre = Formula::and(scen.clone(), Formula::not(goal.clone()));
            let hold = Formula::and(scen.clone(), goal.clone());
            let tail = Formula::weak_until(hold, Formula::not(scen.clone()));
            Formula::implies(scen.clone(), Formula::weak_until(pre, tail))
        })
        .collect();
    let body = and_all(parts);
    let pivot = body.atoms()[0].to_string();
    Ok(Formula::always(body, &pivot))
}

/// Left-associated conjunction of a nonempty list.
fn and_all(mut parts: Vec<Formula>) -> Formula {
    let first = parts.remove(0);
    parts.into_iter().fold(first, Formula::and)
}

/// Left-associated disjunction of a nonempty list.
fn or_all(mut parts: Vec<Formula>) -> Formula {
    let first = parts.remove(0);
    parts.into_iter().fold(first, Formula::or)
}

/// All k-element subsets of `0..n` in lexicographic order.
fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::{parse_formula, Alphabet};

    fn parsed(src: &str, names: &[&str]) -> Formula {
        parse_formula(src, &Alphabet::new(names.iter().copied()).unwrap()).unwrap()
    }

    #[test]
    fn three_two_window_matches_canonical_shape() {
        let got = gen_fail_formula(3, 2, Formula::atom("stop")).unwrap();
        let want = parsed(
            "[] ((f & X f | X f & X X f | f & X X f) -> X X X stop)",
            &["f", "stop"],
        );
        assert_eq!(got, want);
        assert!(got.is_safe_ltl());
    }

    #[test]
    fn three_one_window_matches_canonical_shape() {
        let got = gen_fail_formula(3, 1, Formula::atom("slow")).unwrap();
        let want = parsed(
            "[] ((f & X f & X X !f | !f & X f & X X f | f & X !f & X X f) -> X X X slow)",
            &["f", "slow"],
        );
        assert_eq!(got, want);
    }

    #[test]
    fn exact_window_shapes() {
        let got = gen_fail_exact_formula(3, 1, false, Formula::atom("stop")).unwrap();
        let want = parsed(
            "[] ((!f & X f & X X f | f & X !f & X X f | f & X f & X X !f) -> X X X stop)",
            &["f", "stop"],
        );
        assert_eq!(got, want);

        let got = gen_fail_exact_formula(3, 1, true, Formula::atom("stop")).unwrap();
        let want = parsed(
            "[] ((!f & X (f & X f) | f & X (!f & X f) | f & X (f & X !f)) -> X X X stop)",
            &["f", "stop"],
        );
        assert_eq!(got, want);
        assert!(got.is_safe_ltl());
    }

    #[test]
    fn single_cycle_window_is_plain_implication() {
        let got = gen_fail_formula(1, 1, Formula::atom("stop")).unwrap();
        assert_eq!(got, parsed("[] (f -> X stop)", &["f", "stop"]));
    }

    #[test]
    fn general_window_enumerates_position_subsets() {
        let got = gen_fail_formula(2, 1, Formula::atom("stop")).unwrap();
        assert_eq!(got, parsed("[] ((f | X f) -> X X stop)", &["f", "stop"]));
        let got = gen_fail_formula(4, 4, Formula::atom("stop")).unwrap();
        assert_eq!(
            got,
            parsed("[] ((f & X f & X X f & X X X f) -> X X X X stop)", &["f", "stop"])
        );
    }

    #[test]
    fn window_parameters_validated() {
        assert!(matches!(
            gen_fail_formula(3, 0, Formula::atom("stop")),
            Err(LtlError::BadParams(_))
        ));
        assert!(matches!(
            gen_fail_formula(2, 3, Formula::atom("stop")),
            Err(LtlError::BadParams(_))
        ));
    }

    #[test]
    fn modeswitch_single_pair_matches_template() {
        let got =
            gen_modeswitch_formula(&[(Formula::atom("s"), Formula::atom("g"))]).unwrap();
        let want = parsed("[] (s -> ((s & !g) W ((s & g) W !s)))", &["s", "g"]);
        assert_eq!(got, want);
        assert!(got.is_safe_ltl());
    }

    #[test]
    fn modeswitch_conjoins_pairs_under_always() {
        let s1 = Formula::atom("s1");
        let pairs = [
            (s1.clone(), Formula::atom("g1")),
            (Formula::not(s1), Formula::atom("g2")),
        ];
        let got = gen_modeswitch_formula(&pairs).unwrap();
        let want = parsed(
            "[] ((s1 -> ((s1 & !g1) W ((s1 & g1) W !s1))) \
             & (!s1 -> ((!s1 & !g2) W ((!s1 & g2) W !!s1))))",
            &["s1", "g1", "g2"],
        );
        // The second template negates the scenario formula structurally, so
        // compare after normalization.
        assert_eq!(got.to_nnf(), want.to_nnf());
        assert!(got.is_safe_ltl());
    }

    #[test]
    fn modeswitch_requires_pairs() {
        assert!(matches!(
            gen_modeswitch_formula(&[]),
            Err(LtlError::BadParams(_))
        ));
    }
}
