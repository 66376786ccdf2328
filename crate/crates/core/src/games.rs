//! Two-player games on transition systems: the controller picks inputs, the
//! environment resolves nondeterminism. Provides the controllable
//! predecessor, maximally permissive safety strategies, ranked reachability
//! controllers, an independent closed-loop checker, and text serialization
//! of policies.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ltl::{Formula, Letter, LtlError, PrefixClass, PrefixEvaluator};
use crate::ts::TransitionSystem;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GameError {
    #[error("mask covers {got} states, system has {want}")]
    MaskSize { got: usize, want: usize },
    #[error("policy text line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Ltl(#[from] LtlError),
}

/// States from which the controller can force the next state into `target`
/// in one step: some input has a nonempty successor set entirely inside
/// `target`. Requiring nonemptiness keeps the operator meaningful on
/// restricted (partially blocking) systems, where an input with no
/// transitions wins nothing.
pub fn cpre(s: &TransitionSystem, target: &[bool]) -> Result<Vec<bool>, GameError> {
    check_mask(s, target)?;
    Ok((0..s.state_count() as u32)
        .map(|x| {
            (0..s.input_count() as u32).any(|u| {
                let post = s.post_raw(x, u);
                !post.is_empty() && post.iter().all(|&y| target[y as usize])
            })
        })
        .collect())
}

fn check_mask(s: &TransitionSystem, mask: &[bool]) -> Result<(), GameError> {
    if mask.len() != s.state_count() {
        return Err(GameError::MaskSize {
            got: mask.len(),
            want: s.state_count(),
        });
    }
    Ok(())
}

/// Maximally permissive safety strategy: the winning region together with
/// *every* input that keeps the play inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategySet {
    /// Winning region of the safety game.
    pub winning: Vec<bool>,
    /// Per state, the sorted inputs whose successor sets are nonempty and
    /// stay within the winning region; empty outside the region.
    pub allowed: Vec<Vec<u32>>,
}

impl StrategySet {
    pub fn is_winning(&self, x: u32) -> bool {
        self.winning[x as usize]
    }

    pub fn winning_count(&self) -> usize {
        self.winning.iter().filter(|&&w| w).count()
    }
}

/// Greatest fixpoint of `V ↦ safe ∩ CPre(V)`: the largest set of safe
/// states the controller can keep the play in forever.
pub fn solve_safety(s: &TransitionSystem, safe: &[bool]) -> Result<StrategySet, GameError> {
    check_mask(s, safe)?;
    let n = s.state_count() as u32;
    let m = s.input_count() as u32;
    let mut winning: Vec<bool> = safe.to_vec();
    // Shrink until stable. Removing a state as soon as every input either
    // blocks or escapes the current over-approximation is sound because the
    // set only ever shrinks toward the fixpoint.
    loop {
        let mut changed = false;
        for x in 0..n {
            if !winning[x as usize] {
                continue;
            }
            let keeps = (0..m).any(|u| {
                let post = s.post_raw(x, u);
                !post.is_empty() && post.iter().all(|&y| winning[y as usize])
            });
            if !keeps {
                winning[x as usize] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let allowed = (0..n)
        .map(|x| {
            if !winning[x as usize] {
                return Vec::new();
            }
            (0..m)
                .filter(|&u| {
                    let post = s.post_raw(x, u);
                    !post.is_empty() && post.iter().all(|&y| winning[y as usize])
                })
                .collect()
        })
        .collect();
    Ok(StrategySet { winning, allowed })
}

/// Memoryless reachability controller: a single input per winning state and
/// the attractor rank (distance bound to the target under the policy).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Controller {
    /// Chosen input per state; `None` where the controller is undefined.
    pub choice: Vec<Option<u32>>,
    /// Attractor layer: 0 on target states, `k` when the chosen input
    /// forces rank `< k` next; `None` outside the winning region.
    pub rank: Vec<Option<u32>>,
    /// The reachability objective.
    pub target: Vec<bool>,
}

impl Controller {
    pub fn is_winning(&self, x: u32) -> bool {
        self.rank[x as usize].is_some()
    }

    pub fn winning_count(&self) -> usize {
        self.rank.iter().filter(|r| r.is_some()).count()
    }
}

/// Attractor construction for `reach target`: layer `k+1` adds every state
/// with an input forcing layer `≤ k`, recording the smallest such input.
/// Target states get rank 0 and the smallest input that has any successor
/// (to keep the play alive once the objective is met).
pub fn solve_reachability(s: &TransitionSystem, target: &[bool]) -> Result<Controller, GameError> {
    check_mask(s, target)?;
    let n = s.state_count() as u32;
    let m = s.input_count() as u32;
    let mut rank: Vec<Option<u32>> = target.iter().map(|&t| t.then_some(0)).collect();
    let mut choice: Vec<Option<u32>> = vec![None; n as usize];
    for x in 0..n {
        if target[x as usize] {
            choice[x as usize] = (0..m).find(|&u| !s.post_raw(x, u).is_empty());
        }
    }
    let mut k = 0;
    loop {
        // Snapshot the attractor so far; additions within a sweep must not
        // see each other, otherwise ranks would stop strictly decreasing
        // along chosen inputs.
        let attracted: Vec<bool> = rank.iter().map(Option::is_some).collect();
        let mut added = false;
        for x in 0..n {
            if rank[x as usize].is_some() {
                continue;
            }
            let found = (0..m).find(|&u| {
                let post = s.post_raw(x, u);
                !post.is_empty() && post.iter().all(|&y| attracted[y as usize])
            });
            if let Some(u) = found {
                rank[x as usize] = Some(k + 1);
                choice[x as usize] = Some(u);
                added = true;
            }
        }
        if !added {
            break;
        }
        k += 1;
    }
    Ok(Controller {
        choice,
        rank,
        target: target.to_vec(),
    })
}

/// Anything that tells the controller which inputs it may play at a state.
pub trait Strategy {
    /// Permitted inputs at `x`; empty means the policy is stuck there.
    fn permitted(&self, x: u32) -> Vec<u32>;
}

impl Strategy for StrategySet {
    fn permitted(&self, x: u32) -> Vec<u32> {
        self.allowed[x as usize].clone()
    }
}

impl Strategy for Controller {
    fn permitted(&self, x: u32) -> Vec<u32> {
        self.choice[x as usize].into_iter().collect()
    }
}

/// Exploration budget for [`check_enforces`].
#[derive(Debug, Clone)]
pub struct CheckBudget {
    /// Length (in steps) of each explored run.
    pub max_depth: usize,
    /// Node cap for the exhaustive search; beyond it the checker falls back
    /// to random sampling.
    pub exhaustive_node_limit: usize,
    /// Number of sampled runs in the fallback.
    pub samples: usize,
    pub seed: u64,
}

impl Default for CheckBudget {
    fn default() -> CheckBudget {
        CheckBudget {
            max_depth: 64,
            exhaustive_node_limit: 200_000,
            samples: 200,
            seed: 0xC0FFEE,
        }
    }
}

/// Outcome of a closed-loop check; failures carry the offending run as
/// alternating states and inputs (`states.len() == inputs.len() + 1`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// Some run prefix is already unsalvageable for the safety formula.
    SafetyViolation { states: Vec<u32>, inputs: Vec<u32> },
    /// A run of full budget length never visited the guarantee atom.
    GuaranteeMiss { states: Vec<u32>, inputs: Vec<u32> },
    /// The policy permits no input at the last state of the run.
    Stuck { states: Vec<u32>, inputs: Vec<u32> },
}

impl Verdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, Verdict::Pass)
    }
}

/// Plays the environment against `policy` on `s` and checks that every
/// explored run keeps `phi_safe` satisfiable (no prefix classifies as
/// definitively false) and, when `gamma` is given, visits a state labeled
/// with it within the depth budget.
///
/// All permitted inputs are adversarial too: a strategy-set only enforces
/// the objective if *every* compatible choice does. Exploration is
/// exhaustive up to `budget.exhaustive_node_limit` nodes and falls back to
/// seeded random sampling when the tree is larger.
pub fn check_enforces(
    s: &TransitionSystem,
    policy: &dyn Strategy,
    phi_safe: &Formula,
    gamma: Option<&str>,
    budget: &CheckBudget,
) -> Result<Verdict, GameError> {
    let eval = PrefixEvaluator::new(phi_safe, s.atoms())?;
    let gamma_bit = match gamma {
        None => None,
        Some(name) => Some(
            s.atoms()
                .bit(name)
                .ok_or_else(|| LtlError::UndeclaredAtom(name.to_string()))?,
        ),
    };
    let mut check = Check {
        s,
        policy,
        eval,
        gamma_bit,
        budget,
    };
    match check.exhaustive() {
        Some(verdict) => Ok(verdict),
        None => Ok(check.sampled()),
    }
}

struct Check<'a> {
    s: &'a TransitionSystem,
    policy: &'a dyn Strategy,
    eval: PrefixEvaluator,
    gamma_bit: Option<usize>,
    budget: &'a CheckBudget,
}

enum Flow {
    Done,
    Overflow,
    Fail(Verdict),
}

impl Check<'_> {
    fn hits(&self, letter: Letter) -> bool {
        match self.gamma_bit {
            Some(b) => letter & (1 << b) != 0,
            None => true,
        }
    }

    fn exhaustive(&mut self) -> Option<Verdict> {
        let mut nodes_left = self.budget.exhaustive_node_limit;
        for x0 in self.s.initial_states() {
            let mut states = vec![x0];
            let mut inputs = Vec::new();
            let mut prefix = vec![self.s.label(x0)];
            let settled = false;
            let hit = self.hits(self.s.label(x0));
            match self.dfs(&mut states, &mut inputs, &mut prefix, settled, hit, &mut nodes_left) {
                Flow::Done => {}
                Flow::Overflow => return None,
                Flow::Fail(v) => return Some(v),
            }
        }
        Some(Verdict::Pass)
    }

    /// `settled` means the prefix already classified as definitively true
    /// (no extension can violate safety); `hit` that the guarantee atom was
    /// seen. Subtrees where both hold cannot fail and are pruned.
    fn dfs(
        &self,
        states: &mut Vec<u32>,
        inputs: &mut Vec<u32>,
        prefix: &mut Vec<Letter>,
        settled: bool,
        hit: bool,
        nodes_left: &mut usize,
    ) -> Flow {
        if *nodes_left == 0 {
            return Flow::Overflow;
        }
        *nodes_left -= 1;
        let mut settled = settled;
        if !settled {
            match self.eval.classify(prefix) {
                PrefixClass::DefFalse => {
                    return Flow::Fail(Verdict::SafetyViolation {
                        states: states.clone(),
                        inputs: inputs.clone(),
                    });
                }
                PrefixClass::DefTrue => settled = true,
                PrefixClass::Open => {}
            }
        }
        if settled && hit {
            return Flow::Done;
        }
        if inputs.len() == self.budget.max_depth {
            if !hit {
                return Flow::Fail(Verdict::GuaranteeMiss {
                    states: states.clone(),
                    inputs: inputs.clone(),
                });
            }
            return Flow::Done;
        }
        let x = *states.last().expect("run is never empty");
        let permitted = self.policy.permitted(x);
        if permitted.is_empty() {
            return Flow::Fail(Verdict::Stuck {
                states: states.clone(),
                inputs: inputs.clone(),
            });
        }
        for u in permitted {
            for &y in self.s.post_raw(x, u) {
                states.push(y);
                inputs.push(u);
                prefix.push(self.s.label(y));
                let flow = self.dfs(
                    states,
                    inputs,
                    prefix,
                    settled,
                    hit || self.hits(self.s.label(y)),
                    nodes_left,
                );
                states.pop();
                inputs.pop();
                prefix.pop();
                if let Flow::Fail(_) | Flow::Overflow = flow {
                    return flow;
                }
            }
        }
        Flow::Done
    }

    fn sampled(&mut self) -> Verdict {
        let initials = self.s.initial_states();
        if initials.is_empty() {
            return Verdict::Pass;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.budget.seed);
        for _ in 0..self.budget.samples {
            let x0 = initials[rng.gen_range(0..initials.len())];
            let mut states = vec![x0];
            let mut inputs: Vec<u32> = Vec::new();
            let mut prefix = vec![self.s.label(x0)];
            let mut settled = false;
            let mut hit = self.hits(self.s.label(x0));
            loop {
                if !settled {
                    match self.eval.classify(&prefix) {
                        PrefixClass::DefFalse => {
                            return Verdict::SafetyViolation { states, inputs };
                        }
                        PrefixClass::DefTrue => settled = true,
                        PrefixClass::Open => {}
                    }
                }
                if settled && hit {
                    break;
                }
                if inputs.len() == self.budget.max_depth {
                    if !hit {
                        return Verdict::GuaranteeMiss { states, inputs };
                    }
                    break;
                }
                let x = *states.last().expect("run is never empty");
                let permitted = self.policy.permitted(x);
                if permitted.is_empty() {
                    return Verdict::Stuck { states, inputs };
                }
                let u = permitted[rng.gen_range(0..permitted.len())];
                let post = self.s.post_raw(x, u);
                if post.is_empty() {
                    return Verdict::Stuck { states, inputs };
                }
                let y = post[rng.gen_range(0..post.len())];
                states.push(y);
                inputs.push(u);
                prefix.push(self.s.label(y));
                hit = hit || self.hits(self.s.label(y));
            }
        }
        Verdict::Pass
    }
}

/// Renders a strategy-set (and optionally a reachability controller over
/// the same states) as text: one `strategy <state> {inputs}` row per state
/// and one `control <state> <input> <rank>` row per state the controller
/// covers, both ordered by state id. `-` stands for an absent input/rank.
pub fn save_policy(strat: &StrategySet, ctrl: Option<&Controller>) -> String {
    let n = strat.winning.len();
    let mut out = String::new();
    let _ = writeln!(out, "policy states={n}");
    for x in 0..n {
        let ids: Vec<String> = strat.allowed[x].iter().map(u32::to_string).collect();
        let _ = writeln!(out, "strategy {x} {{{}}}", ids.join(","));
    }
    if let Some(c) = ctrl {
        for x in 0..n {
            let (choice, rank) = (c.choice[x], c.rank[x]);
            if choice.is_none() && rank.is_none() {
                continue;
            }
            let choice = choice.map_or_else(|| "-".into(), |u| u.to_string());
            let rank = rank.map_or_else(|| "-".into(), |r| r.to_string());
            let _ = writeln!(out, "control {x} {choice} {rank}");
        }
    }
    out
}

/// Parses the format written by [`save_policy`]. The controller is present
/// whenever at least one `control` row is; its target is recovered as the
/// rank-0 states.
pub fn load_policy(text: &str) -> Result<(StrategySet, Option<Controller>), GameError> {
    let mut n: Option<usize> = None;
    let mut allowed: Vec<Vec<u32>> = Vec::new();
    let mut choice: Vec<Option<u32>> = Vec::new();
    let mut rank: Vec<Option<u32>> = Vec::new();
    let mut saw_control = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |msg: String| GameError::Parse {
            line: lineno + 1,
            msg,
        };
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tok = line.split_whitespace();
        match tok.next() {
            Some("policy") => {
                let states = tok
                    .next()
                    .and_then(|t| t.strip_prefix("states="))
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| err("expected `policy states=<n>`".into()))?;
                n = Some(states);
                allowed = vec![Vec::new(); states];
                choice = vec![None; states];
                rank = vec![None; states];
            }
            Some("strategy") => {
                let n = n.ok_or_else(|| err("`strategy` before `policy` header".into()))?;
                let x: usize = tok
                    .next()
                    .and_then(|t| t.parse().ok())
                    .filter(|&x| x < n)
                    .ok_or_else(|| err("expected state id".into()))?;
                let set = tok
                    .next()
                    .and_then(|t| t.strip_prefix('{'))
                    .and_then(|t| t.strip_suffix('}'))
                    .ok_or_else(|| err("expected {input ids}".into()))?;
                let mut ids = Vec::new();
                for part in set.split(',').filter(|p| !p.is_empty()) {
                    ids.push(
                        part.parse::<u32>()
                            .map_err(|_| err(format!("bad input id `{part}`")))?,
                    );
                }
                allowed[x] = ids;
            }
            Some("control") => {
                let n = n.ok_or_else(|| err("`control` before `policy` header".into()))?;
                let x: usize = tok
                    .next()
                    .and_then(|t| t.parse().ok())
                    .filter(|&x| x < n)
                    .ok_or_else(|| err("expected state id".into()))?;
                let parse_opt = |t: Option<&str>| -> Result<Option<u32>, GameError> {
                    match t {
                        Some("-") => Ok(None),
                        Some(v) => v
                            .parse::<u32>()
                            .map(Some)
                            .map_err(|_| err(format!("bad number `{v}`"))),
                        None => Err(err("expected `<input> <rank>`".into())),
                    }
                };
                choice[x] = parse_opt(tok.next())?;
                rank[x] = parse_opt(tok.next())?;
                saw_control = true;
            }
            Some(other) => return Err(err(format!("unknown directive `{other}`"))),
            None => unreachable!("blank lines were skipped"),
        }
    }

    if n.is_none() {
        return Err(GameError::Parse {
            line: 0,
            msg: "missing `policy states=<n>` header".into(),
        });
    }
    let winning = allowed.iter().map(|a| !a.is_empty()).collect();
    let strat = StrategySet { winning, allowed };
    let ctrl = saw_control.then(|| {
        let target = rank.iter().map(|r| *r == Some(0)).collect();
        Controller {
            choice,
            rank,
            target,
        }
    });
    Ok((strat, ctrl))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::{parse_formula, Alphabet};
    use crate::ts::random_system;

    /// Corridor with a pit: 0 -left/right-> {0,1}, from 1 `right` may slip
    /// into pit 2 (absorbing, unsafe), `left` returns to 0.
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

    fn mask(n: usize, on: &[u32]) -> Vec<bool> {
        let mut v = vec![false; n];
        for &x in on {
            v[x as usize] = true;
        }
        v
    }

    /// Set-based reference solver recomputing the safety region from
    /// scratch each round.
    fn safety_oracle(s: &TransitionSystem, safe: &[bool]) -> Vec<bool> {
        use std::collections::BTreeSet;
        let mut w: BTreeSet<u32> = (0..s.state_count() as u32)
            .filter(|&x| safe[x as usize])
            .collect();
        loop {
            let keep: BTreeSet<u32> = w
                .iter()
                .copied()
                .filter(|&x| {
                    (0..s.input_count() as u32).any(|u| {
                        let post = s.post(x, u).unwrap();
                        !post.is_empty() && post.iter().all(|y| w.contains(y))
                    })
                })
                .collect();
            if keep == w {
                break;
            }
            w = keep;
        }
        (0..s.state_count() as u32).map(|x| w.contains(&x)).collect()
    }

    /// Set-based reference attractor.
    fn reach_oracle(s: &TransitionSystem, target: &[bool]) -> Vec<bool> {
        use std::collections::BTreeSet;
        let mut a: BTreeSet<u32> = (0..s.state_count() as u32)
            .filter(|&x| target[x as usize])
            .collect();
        loop {
            let grow: BTreeSet<u32> = (0..s.state_count() as u32)
                .filter(|&x| {
                    a.contains(&x)
                        || (0..s.input_count() as u32).any(|u| {
                            let post = s.post(x, u).unwrap();
                            !post.is_empty() && post.iter().all(|y| a.contains(y))
                        })
                })
                .collect();
            if grow == a {
                break;
            }
            a = grow;
        }
        (0..s.state_count() as u32).map(|x| a.contains(&x)).collect()
    }

    #[test]
    fn cpre_requires_nonempty_contained_successors() {
        let s = corridor();
        // Into {c0}: from c0 `left` works; from c1 `left` works; pit stuck.
        assert_eq!(cpre(&s, &mask(3, &[0])).unwrap(), vec![true, true, false]);
        // Into {c1}: from c0 `right` reaches exactly c1; from c1 `right`
        // may slip into the pit, so c1 cannot force a stay.
        assert_eq!(cpre(&s, &mask(3, &[1])).unwrap(), vec![true, false, false]);
        assert_eq!(
            cpre(&s, &[true]).unwrap_err(),
            GameError::MaskSize { got: 1, want: 3 }
        );
    }

    #[test]
    fn safety_region_avoids_the_pit_maximally() {
        let s = corridor();
        let safe = mask(3, &[0, 1]);
        let strat = solve_safety(&s, &safe).unwrap();
        assert_eq!(strat.winning, vec![true, true, false]);
        // c0 may do anything (right only reaches c1); c1 must go left.
        assert_eq!(strat.allowed[0], vec![0, 1]);
        assert_eq!(strat.allowed[1], vec![0]);
        assert!(strat.allowed[2].is_empty());
    }

    #[test]
    fn reachability_ranks_decrease_along_choices() {
        let s = corridor();
        let ctrl = solve_reachability(&s, &mask(3, &[1])).unwrap();
        assert_eq!(ctrl.rank, vec![Some(1), Some(0), None]);
        // c0 must pick `right` (its only route to c1).
        assert_eq!(ctrl.choice[0], Some(1));
        for x in 0..3u32 {
            let (Some(u), Some(k)) = (ctrl.choice[x as usize], ctrl.rank[x as usize]) else {
                continue;
            };
            if k == 0 {
                continue;
            }
            for &y in s.post(x, u).unwrap() {
                assert!(ctrl.rank[y as usize].unwrap() < k);
            }
        }
    }

    #[test]
    fn solvers_match_oracles_on_random_systems() {
        for seed in 0..40 {
            let s = random_system(seed, 12, 3, 2);
            let n = s.state_count();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5afe);
            let safe: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.7)).collect();
            let target: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.2)).collect();

            let strat = solve_safety(&s, &safe).unwrap();
            assert_eq!(strat.winning, safety_oracle(&s, &safe), "seed {seed}");
            // Maximality: disallowed inputs at winning states must escape.
            for x in 0..n as u32 {
                if !strat.winning[x as usize] {
                    assert!(strat.allowed[x as usize].is_empty());
                    continue;
                }
                for u in 0..s.input_count() as u32 {
                    if strat.allowed[x as usize].contains(&u) {
                        continue;
                    }
                    let post = s.post(x, u).unwrap();
                    assert!(
                        post.is_empty() || post.iter().any(|&y| !strat.winning[y as usize]),
                        "seed {seed}: disallowed input {u} at {x} has no escape"
                    );
                }
            }

            let ctrl = solve_reachability(&s, &target).unwrap();
            let oracle = reach_oracle(&s, &target);
            let won: Vec<bool> = ctrl.rank.iter().map(Option::is_some).collect();
            assert_eq!(won, oracle, "seed {seed}");
        }
    }

    #[test]
    fn check_passes_safe_policy_and_catches_unsafe_one() {
        let s = corridor();
        let atoms = s.atoms().clone();
        let phi = parse_formula("[] !pit", &atoms).unwrap();
        let strat = solve_safety(&s, &mask(3, &[0, 1])).unwrap();
        let budget = CheckBudget {
            max_depth: 12,
            ..CheckBudget::default()
        };
        let verdict = check_enforces(&s, &strat, &phi, None, &budget).unwrap();
        assert!(verdict.is_pass(), "{verdict:?}");

        // Permitting `right` at c1 lets the environment slip into the pit.
        let loose = StrategySet {
            winning: vec![true, true, false],
            allowed: vec![vec![0, 1], vec![0, 1], vec![]],
        };
        match check_enforces(&s, &loose, &phi, None, &budget).unwrap() {
            Verdict::SafetyViolation { states, .. } => {
                assert_eq!(states.last(), Some(&2));
            }
            v => panic!("expected violation, got {v:?}"),
        }
    }

    #[test]
    fn check_reports_guarantee_misses_and_stuck_states() {
        let s = corridor();
        let atoms = s.atoms().clone();
        let phi = parse_formula("[] !pit", &atoms).unwrap();
        let budget = CheckBudget {
            max_depth: 8,
            ..CheckBudget::default()
        };
        // Staying at c0 forever never reaches the goal.
        let lazy = Controller {
            choice: vec![Some(0), Some(0), None],
            rank: vec![Some(0), Some(0), None],
            target: mask(3, &[1]),
        };
        match check_enforces(&s, &lazy, &phi, Some("goal"), &budget).unwrap() {
            Verdict::GuaranteeMiss { states, .. } => assert_eq!(states.len(), 9),
            v => panic!("expected miss, got {v:?}"),
        }
        // A controller that reaches the goal passes.
        let eager = solve_reachability(&s, &mask(3, &[1])).unwrap();
        // Rank-0 choice at c1 is `left` (smallest with successors), which
        // keeps the loop alive and safe.
        assert!(check_enforces(&s, &eager, &phi, Some("goal"), &budget)
            .unwrap()
            .is_pass());

        let undef = Controller {
            choice: vec![None, None, None],
            rank: vec![None; 3],
            target: vec![false; 3],
        };
        match check_enforces(&s, &undef, &phi, None, &budget).unwrap() {
            Verdict::Stuck { states, .. } => assert_eq!(states, vec![0]),
            v => panic!("expected stuck, got {v:?}"),
        }
    }

    #[test]
    fn sampled_fallback_finds_violations_on_large_trees() {
        let s = corridor();
        let atoms = s.atoms().clone();
        let phi = parse_formula("[] !pit", &atoms).unwrap();
        let loose = StrategySet {
            winning: vec![true, true, false],
            allowed: vec![vec![0, 1], vec![0, 1], vec![]],
        };
        // Force the sampling path with a tiny node limit.
        let budget = CheckBudget {
            max_depth: 40,
            exhaustive_node_limit: 3,
            samples: 500,
            seed: 7,
        };
        match check_enforces(&s, &loose, &phi, None, &budget).unwrap() {
            Verdict::SafetyViolation { states, .. } => assert_eq!(states.last(), Some(&2)),
            v => panic!("expected violation, got {v:?}"),
        }
    }

    #[test]
    fn policy_text_round_trips() {
        let s = corridor();
        let strat = solve_safety(&s, &mask(3, &[0, 1])).unwrap();
        let ctrl = solve_reachability(&s, &mask(3, &[1])).unwrap();
        let text = save_policy(&strat, Some(&ctrl));
        let (strat2, ctrl2) = load_policy(&text).unwrap();
        assert_eq!(strat, strat2);
        assert_eq!(Some(ctrl), ctrl2);

        let text = save_policy(&strat, None);
        let (strat3, none) = load_policy(&text).unwrap();
        assert_eq!(strat, strat3);
        assert!(none.is_none());

        assert!(matches!(
            load_policy("strategy 0 {}").unwrap_err(),
            GameError::Parse { line: 1, .. }
        ));
    }

    #[test]
    fn random_systems_are_non_blocking_by_construction() {
        for seed in 0..20 {
            let s = random_system(seed, 30, 4, 3);
            s.validate_non_blocking().unwrap();
            assert!(!s.initial_states().is_empty());
        }
    }
}
