//! Closed-loop refinement: drives the continuous model with a controller
//! synthesized on the abstraction, tracking the abstract product state in
//! lockstep and checking that the trajectory stays ε-close to it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use thiserror::Error;

use super::{Extension, GridAbstraction, Real};
use crate::ltl::Letter;
use crate::synthesis::SynthesisResult;

/// Where exogenous atom valuations come from during simulation.
pub enum EnvSource {
    /// All exogenous atoms stay false.
    Silent,
    /// A fixed valuation per step, padded with all-false past the end.
    Word(Vec<Letter>),
    /// Uniformly random valuations from a seeded generator.
    Random(Box<ChaCha8Rng>),
}

impl EnvSource {
    pub fn random(seed: u64) -> EnvSource {
        EnvSource::Random(Box::new(ChaCha8Rng::seed_from_u64(seed)))
    }

    /// The environment's valuation of `bits` exogenous atoms at `step`.
    pub fn next_exo(&mut self, step: usize, bits: u32) -> Letter {
        let mask: Letter = (1 << bits) - 1;
        match self {
            EnvSource::Silent => 0,
            EnvSource::Word(letters) => letters.get(step).copied().unwrap_or(0) & mask,
            EnvSource::Random(rng) => rng.gen_range(0..=mask),
        }
    }
}

/// One control cycle: the continuous state at its start, the input applied
/// during it, and the abstract (cell, automaton-state, atoms) bookkeeping.
#[derive(Debug, Clone)]
pub struct SimRow<F: Real> {
    pub t: usize,
    pub state: Vec<F>,
    pub input_id: u32,
    pub input_name: String,
    /// Grid cell of `state` (decoded base cell, never the out state).
    pub cell: u32,
    /// Specification-automaton component of the tracked product state.
    pub dfa_state: u32,
    /// Atoms holding at the tracked product state, `;`-joined.
    pub atoms: String,
}

/// A simulated closed-loop trajectory.
#[derive(Debug, Clone)]
pub struct Trajectory<F: Real> {
    pub dim_names: Vec<String>,
    pub rows: Vec<SimRow<F>>,
    /// First control cycle at whose start the guarantee atom held.
    pub target_step: Option<usize>,
    pub final_state: Vec<F>,
    /// Largest observed output distance between the trajectory and the
    /// tracked cell center.
    pub eps_max: F,
}

impl<F: Real> Trajectory<F> {
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "t,{},input,cell,dfa_state,atoms", self.dim_names.join(","));
        for r in &self.rows {
            let coords = r
                .state
                .iter()
                .map(|v| format!("{v:.6}"))
                .collect::<Vec<_>>()
                .join(",");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                r.t, coords, r.input_name, r.cell, r.dfa_state, r.atoms
            );
        }
        out
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SimError {
    #[error("start state lies outside the gridded domain")]
    StartOutsideDomain,
    #[error("start cell is not an initial state of the synthesis product")]
    StartNotInitial,
    #[error("controller permits no input at step {step}")]
    NoPolicy { step: usize },
    #[error("trajectory left the domain at step {step}")]
    LeftDomain { step: usize },
    #[error("step {step} landed in a cell that is not an abstract successor")]
    AbstractionMismatch { step: usize },
    #[error("trajectory drifted beyond the abstraction precision at step {step}")]
    Divergence { step: usize },
    #[error("flow produced a non-finite state at step {step}")]
    NonFinite { step: usize },
}

fn atoms_of(sys: &crate::ts::TransitionSystem, x: u32) -> String {
    let letter = sys.label(x);
    sys.atoms()
        .names()
        .iter()
        .enumerate()
        .filter(|&(b, _)| letter & (1 << b) != 0)
        .map(|(_, n)| n.as_str())
        .collect::<Vec<_>>()
        .join(";")
}

/// Runs the synthesized controller in closed loop on the continuous model
/// for up to `steps` control cycles (or until the guarantee atom is first
/// reached, when `stop_at_target` is set).
///
/// Every cycle: pick the controller's input at the tracked product state,
/// flow the continuous state for one sampling period, re-quantize, feed
/// the environment's exogenous valuation into the extended-state encoding
/// (when `ext` is given), and advance the product state to the unique
/// successor over the landed cell. Errors if the trajectory ever leaves
/// the domain, lands in a cell the abstraction did not predict, or drifts
/// farther than the abstraction precision from the tracked cell center —
/// so a returned trajectory is itself a refinement certificate.
pub fn refine_and_simulate<F: Real>(
    g: &GridAbstraction<F>,
    ext: Option<&Extension>,
    result: &SynthesisResult,
    x0: &[F],
    env: &mut EnvSource,
    steps: usize,
    stop_at_target: bool,
) -> Result<Trajectory<F>, SimError> {
    let product = &result.product;
    let psys = product.system();
    let gamma_bit = result
        .gamma
        .as_ref()
        .and_then(|name| psys.atoms().bit(name));
    let exo_bits = ext.map_or(0, |e| e.exo_bits);

    let base_cell_of = |p: u32| -> u32 {
        let sys_id = product.pair(p).0;
        match ext {
            Some(e) => e.decode(sys_id).0,
            None => sys_id,
        }
    };

    let cell0 = g.grid.quantize(x0).ok_or(SimError::StartOutsideDomain)? as u32;
    let sys0 = match ext {
        Some(e) => e.encode(cell0, None, 0),
        None => cell0,
    };
    let mut p = *psys
        .initial_states()
        .iter()
        .find(|&&q| product.pair(q).0 == sys0)
        .ok_or(SimError::StartNotInitial)?;
    let mut x = x0.to_vec();

    let choose = |p: u32, step: usize| -> Result<u32, SimError> {
        if let Some(ctrl) = &result.controller {
            if let Some(u) = ctrl.choice[p as usize] {
                return Ok(u);
            }
        } else if let Some(&u) = result.strategy.allowed[p as usize].first() {
            return Ok(u);
        }
        Err(SimError::NoPolicy { step })
    };

    let slack = super::real::<F>(1e-9);
    let mut eps_max = F::zero();
    let mut target_step = None;
    let mut rows = Vec::new();

    for t in 0..=steps {
        // Closeness and objective bookkeeping at the start of cycle `t`.
        let cell = base_cell_of(p);
        if cell == g.out_state {
            return Err(SimError::LeftDomain { step: t });
        }
        let d = g.output_dist(&x, &g.grid.center(cell as usize));
        eps_max = eps_max.max(d);
        if d > g.eps + slack {
            return Err(SimError::Divergence { step: t });
        }
        let at_target = gamma_bit.is_some_and(|b| psys.label(p) & (1 << b) != 0);
        if at_target && target_step.is_none() {
            target_step = Some(t);
        }
        if t == steps || (stop_at_target && at_target) {
            break;
        }

        let u = choose(p, t)?;
        rows.push(SimRow {
            t,
            state: x.clone(),
            input_id: u,
            input_name: psys.input_name(u).to_string(),
            cell,
            dfa_state: product.pair(p).1,
            atoms: atoms_of(psys, p),
        });

        let vals = g.model.input_values(u);
        let next = super::flow(&g.model, &x, vals, g.model.tau)
            .map_err(|_| SimError::NonFinite { step: t })?;
        let cell2 = g
            .grid
            .quantize(&next)
            .ok_or(SimError::LeftDomain { step: t })? as u32;
        let sys2 = match ext {
            Some(e) => {
                let exo = env.next_exo(t, exo_bits);
                e.encode(cell2, Some(e.input_class[u as usize]), exo)
            }
            None => cell2,
        };
        p = *psys
            .post(p, u)
            .expect("tracked state and input are in range")
            .iter()
            .find(|&&q| product.pair(q).0 == sys2)
            .ok_or(SimError::AbstractionMismatch { step: t })?;
        x = next;
    }

    Ok(Trajectory {
        dim_names: g.model.dim_names.clone(),
        rows,
        target_step,
        final_state: x,
        eps_max,
    })
}
