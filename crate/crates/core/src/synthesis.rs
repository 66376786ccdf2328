//! End-to-end controller synthesis: split a specification into its safety
//! part and an optional single-atom reachability guarantee, monitor the
//! safety part with a DFA, build the synchronous product, and solve the
//! safety game followed by the reachability game on the restricted arena.

use std::fmt::Write as _;
use std::time::Instant;

use thiserror::Error;

use crate::automata::{construct_fine_nfa, subset_construction};
use crate::games::{solve_reachability, solve_safety, Controller, GameError, StrategySet};
use crate::ltl::{Formula, LtlError};
use crate::ts::{product, ProductSystem, TransitionSystem, TsError};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("unsupported specification shape `{0}`: expected a safety formula, optionally conjoined with an eventually-atom guarantee, or a top-level until with an atomic right side")]
    UnsupportedFragment(String),
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error(transparent)]
    Ts(#[from] TsError),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// Splits a specification into `(safety part, optional guarantee atom)`.
///
/// Accepted shapes:
/// - a safety formula `ψ` → `(ψ, None)`;
/// - `ψ ∧ ◇γ` (either operand order, `γ` an atom, `ψ` safety) → `(ψ, Some(γ))`;
/// - a top-level `p U q` with `q` an atom and `p` safety → `(p W q, Some(q))`,
///   using `p U q ≡ (p W q) ∧ ◇q`.
pub fn decompose_until(f: &Formula) -> Result<(Formula, Option<String>), SynthError> {
    if f.is_safe_ltl() {
        return Ok((f.clone(), None));
    }
    if let Formula::And(a, b) = f {
        for (psi, guarantee) in [(a, b), (b, a)] {
            let Formula::Until(pre, g) = guarantee.as_ref() else {
                continue;
            };
            let Formula::Atom(name) = g.as_ref() else {
                continue;
            };
            if pre.is_true_const() && psi.is_safe_ltl() {
                return Ok(((**psi).clone(), Some(name.clone())));
            }
        }
    }
    if let Formula::Until(p, q) = f {
        if let Formula::Atom(name) = q.as_ref() {
            if p.is_safe_ltl() {
                return Ok((
                    Formula::weak_until((**p).clone(), (**q).clone()),
                    Some(name.clone()),
                ));
            }
        }
    }
    Err(SynthError::UnsupportedFragment(f.to_string()))
}

/// Size and timing figures gathered along the pipeline.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Report {
    pub nfa_states: usize,
    pub dfa_states: usize,
    /// Milliseconds spent building the monitor automata.
    pub build_ms: u128,
    pub product_states: usize,
    pub safety_winning: usize,
    pub reach_winning: Option<usize>,
    pub realizable: bool,
}

impl Report {
    /// One `key value` line per figure; `-` for an absent reach count.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "nfa_states {}", self.nfa_states);
        let _ = writeln!(out, "dfa_states {}", self.dfa_states);
        let _ = writeln!(out, "build_ms {}", self.build_ms);
        let _ = writeln!(out, "product_states {}", self.product_states);
        let _ = writeln!(out, "safety_winning {}", self.safety_winning);
        match self.reach_winning {
            Some(n) => {
                let _ = writeln!(out, "reach_winning {n}");
            }
            None => {
                let _ = writeln!(out, "reach_winning -");
            }
        }
        let _ = writeln!(out, "realizable {}", self.realizable);
        out
    }
}

/// Everything `synthesize` produces. Policies are indexed by *product*
/// states; use [`ProductSystem::pair`] to map them back.
#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub phi_safe: Formula,
    pub gamma: Option<String>,
    pub product: ProductSystem,
    /// Maximally permissive safety strategy on the product.
    pub strategy: StrategySet,
    /// Reachability controller when a guarantee is present, totalized with
    /// the smallest safe input on winning states outside the attractor.
    pub controller: Option<Controller>,
    pub realizable: bool,
    pub report: Report,
}

/// Synthesizes a controller for `f` on `s`.
///
/// Unrealizability (some initial product state outside the winning region,
/// including monitors that reject the very first output) is reported via
/// `realizable: false`, not as an error.
pub fn synthesize(s: &TransitionSystem, f: &Formula) -> Result<SynthesisResult, SynthError> {
    let (phi_safe, gamma) = decompose_until(f)?;

    let t0 = Instant::now();
    let nfa = construct_fine_nfa(&phi_safe, s.atoms())?;
    let dfa = subset_construction(&nfa);
    let build_ms = t0.elapsed().as_millis();

    let prod = product(s, &dfa)?;
    let strategy = solve_safety(prod.system(), prod.safe_mask())?;
    let initials = prod.system().initial_states();

    let mut realizable = initials.iter().all(|&p| strategy.is_winning(p));
    let mut reach_winning = None;
    let controller = match &gamma {
        None => None,
        Some(name) => {
            let bit = s
                .atoms()
                .bit(name)
                .ok_or_else(|| LtlError::UndeclaredAtom(name.clone()))?;
            let (arena, _blocking) = prod.system().restrict(&strategy.allowed)?;
            let target: Vec<bool> = (0..arena.state_count() as u32)
                .map(|p| strategy.is_winning(p) && arena.label(p) & (1 << bit) != 0)
                .collect();
            let mut ctrl = solve_reachability(&arena, &target)?;
            // Keep the controller defined (and safe) after the objective:
            // on winning states the attractor never ranked, fall back to
            // the smallest allowed input.
            for p in 0..arena.state_count() {
                if ctrl.choice[p].is_none() && strategy.winning[p] {
                    ctrl.choice[p] = strategy.allowed[p].first().copied();
                }
            }
            realizable = realizable && initials.iter().all(|&p| ctrl.is_winning(p));
            reach_winning = Some(ctrl.winning_count());
            Some(ctrl)
        }
    };

    let report = Report {
        nfa_states: nfa.state_count(),
        dfa_states: dfa.state_count(),
        build_ms,
        product_states: prod.state_count(),
        safety_winning: strategy.winning_count(),
        reach_winning,
        realizable,
    };
    Ok(SynthesisResult {
        phi_safe,
        gamma,
        product: prod,
        strategy,
        controller,
        realizable,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{check_enforces, CheckBudget};
    use crate::ltl::{parse_formula, Alphabet};

    fn corridor() -> TransitionSystem {
        let atoms = Alphabet::new(["pit", "goal"]).unwrap();
        TransitionSystem::new(
            atoms,
            vec!["left".into(), "right".into()],
            vec![
                ("c0".into(), 0, true),
                ("c1".into(), 0b10, false),
                ("pit".into(), 0b01, false),
            ],
            &[
                (0, 0, 0),
                (0, 1, 1),
                (1, 0, 0),
                (1, 1, 1),
                (1, 1, 2),
                (2, 0, 2),
                (2, 1, 2),
            ],
        )
        .unwrap()
    }

    fn parse(src: &str) -> Formula {
        let atoms = Alphabet::new(["pit", "goal"]).unwrap();
        parse_formula(src, &atoms).unwrap()
    }

    #[test]
    fn decompose_accepts_the_supported_shapes() {
        let (phi, g) = decompose_until(&parse("[] !pit")).unwrap();
        assert_eq!(phi, parse("[] !pit"));
        assert_eq!(g, None);

        for src in ["[] !pit & <> goal", "<> goal & [] !pit"] {
            let (phi, g) = decompose_until(&parse(src)).unwrap();
            assert_eq!(phi, parse("[] !pit"));
            assert_eq!(g.as_deref(), Some("goal"));
        }

        let (phi, g) = decompose_until(&parse("!pit U goal")).unwrap();
        assert_eq!(phi, parse("!pit W goal"));
        assert_eq!(g.as_deref(), Some("goal"));

        // Bare eventually is the until case with a trivial left side.
        let (phi, g) = decompose_until(&parse("<> goal")).unwrap();
        assert!(matches!(phi, Formula::WeakUntil(..)));
        assert_eq!(g.as_deref(), Some("goal"));
    }

    #[test]
    fn decompose_rejects_everything_else() {
        for src in [
            "(pit U goal) & (goal U pit)", // two untils
            "<> (pit & goal)",             // non-atomic guarantee
            "[] <> goal",                  // nested until
        ] {
            assert!(matches!(
                decompose_until(&parse(src)),
                Err(SynthError::UnsupportedFragment(_))
            ));
        }
    }

    #[test]
    fn synthesize_reach_avoid_controller_enforces_the_spec() {
        let s = corridor();
        let f = parse("[] !pit & <> goal");
        let r = synthesize(&s, &f).unwrap();
        assert!(r.realizable);
        assert_eq!(r.gamma.as_deref(), Some("goal"));
        let ctrl = r.controller.as_ref().unwrap();
        let budget = CheckBudget {
            max_depth: 16,
            ..CheckBudget::default()
        };
        let verdict = check_enforces(
            r.product.system(),
            ctrl,
            &r.phi_safe,
            r.gamma.as_deref(),
            &budget,
        )
        .unwrap();
        assert!(verdict.is_pass(), "{verdict:?}");
        // The maximal safety strategy alone keeps the play safe too.
        let verdict = check_enforces(r.product.system(), &r.strategy, &r.phi_safe, None, &budget)
            .unwrap();
        assert!(verdict.is_pass(), "{verdict:?}");
    }

    #[test]
    fn controller_is_total_on_the_winning_region() {
        let s = corridor();
        let r = synthesize(&s, &parse("[] !pit & <> goal")).unwrap();
        let ctrl = r.controller.as_ref().unwrap();
        for p in 0..r.product.state_count() {
            if r.strategy.winning[p] {
                assert!(ctrl.choice[p].is_some(), "no choice at winning state {p}");
            }
        }
    }

    #[test]
    fn safety_only_runs_skip_the_reach_game() {
        let s = corridor();
        let r = synthesize(&s, &parse("[] !pit")).unwrap();
        assert!(r.realizable);
        assert!(r.controller.is_none());
        assert_eq!(r.report.reach_winning, None);
        assert!(r.report.to_text().contains("reach_winning -"));
    }

    #[test]
    fn unrealizable_is_a_result_not_an_error() {
        // A single absorbing pit state: the monitor rejects immediately.
        let atoms = Alphabet::new(["pit", "goal"]).unwrap();
        let s = TransitionSystem::new(
            atoms,
            vec!["go".into()],
            vec![("pit".into(), 0b01, true)],
            &[(0, 0, 0)],
        )
        .unwrap();
        let r = synthesize(&s, &parse("[] !pit")).unwrap();
        assert!(!r.realizable);
        assert_eq!(r.report.safety_winning, 0);
        assert!(r.report.to_text().contains("realizable false"));
    }

    #[test]
    fn report_lists_every_figure() {
        let s = corridor();
        let r = synthesize(&s, &parse("[] !pit & <> goal")).unwrap();
        let text = r.report.to_text();
        for key in [
            "nfa_states",
            "dfa_states",
            "build_ms",
            "product_states",
            "safety_winning",
            "reach_winning",
            "realizable true",
        ] {
            assert!(text.contains(key), "missing `{key}` in:\n{text}");
        }
        assert!(r.report.product_states >= 2);
        assert_eq!(r.report.safety_winning, r.strategy.winning_count());
    }
}
