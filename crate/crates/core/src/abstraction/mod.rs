//! Grid-based finite abstraction of controlled ODEs: sampled-time flow,
//! over-approximated successor computation via componentwise growth bounds,
//! empirical checking of the ε-approximate alternating-simulation
//! conditions, extension with input-observation and environment atoms, and
//! closed-loop refinement of synthesized controllers back onto the
//! continuous model.

mod config;
mod grid;
mod ode;
mod sim;

pub use config::{parse_abstraction_config, AbstractionSpec};
pub use grid::AxisGrid;
pub use ode::{flow, lookup_field, real, OdeModel, Real, Unicycle, VectorField};
pub use sim::{refine_and_simulate, EnvSource, SimError, SimRow, Trajectory};

use rayon::prelude::*;
use thiserror::Error;

use crate::ltl::{Alphabet, Letter, LtlError};
use crate::ts::{TransitionSystem, TsError};

#[derive(Debug, Error)]
pub enum AbsError {
    #[error("flow produced a non-finite state")]
    NonFinite,
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error(transparent)]
    Ltl(#[from] LtlError),
    #[error(transparent)]
    Ts(#[from] TsError),
}

/// Name of the absorbing out-of-domain state and of its label atom.
pub const OUT_ATOM: &str = "out";

/// Finite abstraction of an [`OdeModel`] on an [`AxisGrid`]: one state per
/// cell plus an absorbing `out` state, successors over-approximated by a
/// growth box around the flowed cell center, and outputs assigned by cell
/// centers against predicate boxes.
pub struct GridAbstraction<F: Real> {
    pub model: OdeModel<F>,
    pub grid: AxisGrid<F>,
    pub system: TransitionSystem,
    /// State id of the absorbing out-of-domain state (`grid.cell_count()`).
    pub out_state: u32,
    /// Half cell diagonal in the output metric (Euclidean over non-periodic
    /// dimensions, shortest arc over periodic ones, combined by max).
    pub eps: F,
    /// Per input, the half-widths of the successor box: `e^{M_u τ}(η/2)`
    /// plus the configured margin.
    pub radii: Vec<Vec<F>>,
    pub initial_box: Vec<(F, F)>,
    pub atom_boxes: Vec<(String, Vec<(F, F)>)>,
}

impl<F: Real> GridAbstraction<F> {
    /// Distance in the output metric: Euclidean over non-periodic
    /// dimensions, shortest arc over periodic ones, combined by max.
    pub fn output_dist(&self, a: &[F], b: &[F]) -> F {
        let mut planar = F::zero();
        let mut angular = F::zero();
        for (d, (&(lo, hi), &w)) in self
            .grid
            .domain()
            .iter()
            .zip(self.grid.wrap().iter())
            .enumerate()
        {
            let diff = (a[d] - b[d]).abs();
            if w {
                let period = hi - lo;
                let folded = diff % period;
                let arc = folded.min(period - folded);
                angular = angular.max(arc);
            } else {
                planar = planar + diff * diff;
            }
        }
        planar.sqrt().max(angular)
    }

    /// The abstract state of a continuous point: its cell, or `out`.
    pub fn abstract_state(&self, x: &[F]) -> u32 {
        match self.grid.quantize(x) {
            Some(c) => c as u32,
            None => self.out_state,
        }
    }
}

fn letter_for_center<F: Real>(
    alphabet: &Alphabet,
    atom_boxes: &[(String, Vec<(F, F)>)],
    center: &[F],
) -> Letter {
    let mut letter: Letter = 0;
    for (name, bx) in atom_boxes {
        let inside = bx
            .iter()
            .enumerate()
            .all(|(d, &(lo, hi))| center[d] >= lo && center[d] <= hi);
        if inside {
            let bit = alphabet.bit(name).expect("atom registered");
            letter |= 1 << bit;
        }
    }
    letter
}

/// Half-widths of the one-step successor box for one input: the truncated
/// series `e^{M τ} (η/2)` plus the margin. All entries of `M` and of the
/// start vector are nonnegative, so partial sums only grow and truncation
/// at a small term is safe.
fn growth_radii<F: Real>(m: &[F], n: usize, half_eta: &[F], tau: F, margin: &[F]) -> Vec<F> {
    let mut acc = half_eta.to_vec();
    let mut term = half_eta.to_vec();
    for k in 1..=40 {
        let scale = tau / real::<F>(k as f64);
        let prev = term.clone();
        for i in 0..n {
            let mut s = F::zero();
            for j in 0..n {
                s = s + m[i * n + j] * prev[j];
            }
            term[i] = scale * s;
        }
        let mut biggest = F::zero();
        for i in 0..n {
            acc[i] = acc[i] + term[i];
            biggest = biggest.max(term[i]);
        }
        if biggest < real::<F>(1e-14) {
            break;
        }
    }
    acc.iter().zip(margin.iter()).map(|(&a, &g)| a + g).collect()
}

/// Builds the finite abstraction: one state per cell plus absorbing `out`;
/// for each (cell, input), successors are every cell intersecting the box
/// of half-widths `radii[u]` around `flow(center, u, τ)`, plus `out` if
/// the box escapes the domain. Construction is parallel over cells with a
/// deterministic merge.
pub fn build_grid_abstraction<F: Real>(
    spec: &AbstractionSpec<F>,
) -> Result<GridAbstraction<F>, AbsError> {
    let field =
        lookup_field::<F>(&spec.model).ok_or_else(|| AbsError::UnknownModel(spec.model.clone()))?;
    let model = OdeModel {
        field,
        dim_names: spec.dim_names.clone(),
        domain: spec.domain.clone(),
        wrap: spec.wrap.clone(),
        inputs: spec.inputs.clone(),
        tau: spec.tau,
        substeps: spec.substeps,
    };
    model.validate()?;
    if spec.margin.len() != model.dim() {
        return Err(AbsError::Shape("margin has wrong dimension".into()));
    }
    let grid = AxisGrid::new(&spec.domain, &spec.eta, &spec.wrap)?;
    let n_dims = grid.dims();
    let n_cells = grid.cell_count();
    let out_state = n_cells as u32;

    let alphabet = Alphabet::new(
        spec.atoms
            .iter()
            .map(|(n, _)| n.as_str())
            .chain(std::iter::once(OUT_ATOM)),
    )?;
    let half_eta: Vec<F> = grid.eta().iter().map(|&w| w * real::<F>(0.5)).collect();
    let radii: Vec<Vec<F>> = model
        .inputs
        .iter()
        .map(|(_, vals)| {
            growth_radii(
                &model.field.growth_matrix(vals),
                n_dims,
                &half_eta,
                model.tau,
                &spec.margin,
            )
        })
        .collect();

    let (initial_cells, _) = grid.cells_overlapping(&half_open(&spec.initial_box));
    let initial_mask: Vec<bool> = {
        let mut mask = vec![false; n_cells];
        for c in initial_cells {
            mask[c] = true;
        }
        mask
    };

    let mut states: Vec<(String, Letter, bool)> = (0..n_cells)
        .map(|c| {
            let coords = grid.coords(c);
            let name = format!(
                "c{}",
                coords.iter().map(usize::to_string).collect::<Vec<_>>().join("_")
            );
            let letter = letter_for_center(&alphabet, &spec.atoms, &grid.center(c));
            (name, letter, initial_mask[c])
        })
        .collect();
    let out_bit = alphabet.bit(OUT_ATOM).expect("out atom registered");
    states.push(("out".into(), 1 << out_bit, false));

    type Edges = Vec<(u32, u32, u32)>;
    let per_cell: Result<Vec<Edges>, AbsError> = (0..n_cells)
        .into_par_iter()
        .map(|c| {
            let center = grid.center(c);
            let mut edges = Vec::new();
            for (u, (_, vals)) in model.inputs.iter().enumerate() {
                let image = flow(&model, &center, vals, model.tau)?;
                let bx: Vec<(F, F)> = image
                    .iter()
                    .zip(radii[u].iter())
                    .map(|(&x, &r)| (x - r, x + r))
                    .collect();
                let (cells, escapes) = grid.cells_overlapping(&bx);
                for dst in cells {
                    edges.push((c as u32, u as u32, dst as u32));
                }
                if escapes {
                    edges.push((c as u32, u as u32, out_state));
                }
            }
            Ok(edges)
        })
        .collect();
    let mut transitions: Vec<(u32, u32, u32)> = per_cell?.into_iter().flatten().collect();
    for u in 0..model.inputs.len() as u32 {
        transitions.push((out_state, u, out_state));
    }

    let system = TransitionSystem::new(alphabet, model.input_names(), states, &transitions)?;
    system.validate_non_blocking()?;

    let mut planar = F::zero();
    let mut angular = F::zero();
    for (d, &w) in spec.wrap.iter().enumerate() {
        if w {
            angular = angular.max(half_eta[d]);
        } else {
            planar = planar + half_eta[d] * half_eta[d];
        }
    }
    let eps = planar.sqrt().max(angular);

    Ok(GridAbstraction {
        model,
        grid,
        system,
        out_state,
        eps,
        radii,
        initial_box: spec.initial_box.clone(),
        atom_boxes: spec.atoms.clone(),
    })
}

/// Nudges a closed box into half-open form for cell-overlap queries (the
/// upper face still belongs to the box, so widen it by nothing — overlap
/// queries treat `[a, b)` and the closed box identically except on a
/// measure-zero boundary that the snapping already resolves).
fn half_open<F: Real>(bx: &[(F, F)]) -> Vec<(F, F)> {
    bx.to_vec()
}

/// First witness of a simulation-condition violation found by
/// [`check_asr`].
#[derive(Debug, Clone)]
pub struct AsrViolation<F: Real> {
    /// Violated condition: 1 (initial-state cover), 2 (output closeness),
    /// or 3 (successor matching).
    pub condition: u8,
    pub cell: u32,
    pub input: Option<u32>,
    pub point: Vec<F>,
    pub landed: Option<Vec<F>>,
    pub landed_cell: Option<u32>,
    pub msg: String,
}

/// Samples `n` relation pairs (cell, uniformly random point inside it) for
/// [`check_asr`], deterministically from `seed`.
pub fn sample_relation_pairs<F: Real>(
    g: &GridAbstraction<F>,
    n: usize,
    seed: u64,
) -> Vec<(u32, Vec<F>)> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let c = rng.gen_range(0..g.grid.cell_count());
            let point = g
                .grid
                .cell_box(c)
                .iter()
                .map(|&(lo, hi)| {
                    let t: f64 = rng.gen_range(0.0..1.0);
                    lo + (hi - lo) * real::<F>(t)
                })
                .collect();
            (c as u32, point)
        })
        .collect()
}

/// Empirically checks the three alternating-simulation conditions between
/// the abstraction and the sampled continuous system over the given
/// relation pairs, with precision `g.eps`:
///
/// 1. every cell meeting the initial box is an initial abstract state
///    (checked exhaustively);
/// 2. each pair's outputs are ε-close: `d(point, center(cell)) ≤ ε`;
/// 3. for every pair and every input, the cell reached by flowing the
///    point for τ is among the abstract successors of the pair's cell.
///
/// Returns the number of pairs checked, or the first violating witness.
pub fn check_asr<F: Real>(
    g: &GridAbstraction<F>,
    pairs: &[(u32, Vec<F>)],
) -> Result<usize, Box<AsrViolation<F>>> {
    let (initial_cells, _) = g.grid.cells_overlapping(&half_open(&g.initial_box));
    for c in initial_cells {
        if !g.system.is_initial(c as u32) {
            return Err(Box::new(AsrViolation {
                condition: 1,
                cell: c as u32,
                input: None,
                point: g.grid.center(c),
                landed: None,
                landed_cell: None,
                msg: format!("cell {c} meets the initial box but is not abstract-initial"),
            }));
        }
    }

    let slack = real::<F>(1e-9);
    for &(cell, ref point) in pairs {
        let center = g.grid.center(cell as usize);
        let d = g.output_dist(point, &center);
        if d > g.eps + slack {
            return Err(Box::new(AsrViolation {
                condition: 2,
                cell,
                input: None,
                point: point.clone(),
                landed: None,
                landed_cell: None,
                msg: format!("output distance {d} exceeds eps {}", g.eps),
            }));
        }
        for u in 0..g.model.inputs.len() as u32 {
            let landed = match flow(&g.model, point, g.model.input_values(u), g.model.tau) {
                Ok(x) => x,
                Err(_) => {
                    return Err(Box::new(AsrViolation {
                        condition: 3,
                        cell,
                        input: Some(u),
                        point: point.clone(),
                        landed: None,
                        landed_cell: None,
                        msg: "flow diverged".into(),
                    }))
                }
            };
            let landed_cell = g.abstract_state(&landed);
            let successors = g.system.post(cell, u).expect("ids in range");
            if !successors.contains(&landed_cell) {
                return Err(Box::new(AsrViolation {
                    condition: 3,
                    cell,
                    input: Some(u),
                    point: point.clone(),
                    landed: Some(landed),
                    landed_cell: Some(landed_cell),
                    msg: format!(
                        "flow from sampled point lands in cell {landed_cell}, not among the {} abstract successors",
                        successors.len()
                    ),
                }));
            }
        }
    }
    Ok(pairs.len())
}

/// How extended-system states encode (base state, last-input class,
/// exogenous bits); see [`extend_system`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extension {
    pub base_states: u32,
    /// Input-class count: one per input-predicate valuation, plus the
    /// initial "no input yet" class 0.
    pub classes: u32,
    /// Number of exogenous atoms.
    pub exo_bits: u32,
    /// Valuation of the input-predicate atoms per input id.
    pub input_class: Vec<Letter>,
    /// Bit offset of the input-predicate atoms in the extended alphabet.
    pub pred_shift: u32,
    /// Bit offset of the exogenous atoms in the extended alphabet.
    pub exo_shift: u32,
}

impl Extension {
    /// Extended state id for (base, class, exo) — class `None` is the
    /// initial "no input applied yet" class.
    pub fn encode(&self, base: u32, class: Option<Letter>, exo: Letter) -> u32 {
        let class_idx = match class {
            None => 0,
            Some(v) => 1 + v,
        };
        (base * self.classes + class_idx) * (1 << self.exo_bits) + exo
    }

    /// Inverse of [`Extension::encode`].
    pub fn decode(&self, ext: u32) -> (u32, Option<Letter>, Letter) {
        let exo = ext % (1 << self.exo_bits);
        let rest = ext / (1 << self.exo_bits);
        let class_idx = rest % self.classes;
        let base = rest / self.classes;
        let class = if class_idx == 0 { None } else { Some(class_idx - 1) };
        (base, class, exo)
    }
}

/// Extends a system so formulas can observe the previously applied input
/// and environment-chosen bits: states become (base state, last-input
/// class, exogenous valuation). Input-predicate atoms label a state when
/// the last input satisfies them; exogenous atoms are resolved freshly and
/// adversarially on every step (all valuations are successors). Initial
/// states carry the "no input yet" class and all-false exogenous bits.
pub fn extend_system(
    base: &TransitionSystem,
    input_atoms: &[(String, Vec<u32>)],
    exo: &[String],
) -> Result<(TransitionSystem, Extension), AbsError> {
    let alphabet = Alphabet::new(
        base.atoms()
            .names()
            .iter()
            .map(String::as_str)
            .chain(input_atoms.iter().map(|(n, _)| n.as_str()))
            .chain(exo.iter().map(String::as_str)),
    )?;
    let pred_shift = base.atoms().len() as u32;
    let exo_shift = pred_shift + input_atoms.len() as u32;
    let p = input_atoms.len() as u32;
    let e = exo.len() as u32;
    let ext = Extension {
        base_states: base.state_count() as u32,
        classes: (1 << p) + 1,
        exo_bits: e,
        input_class: (0..base.input_count() as u32)
            .map(|u| {
                let mut v: Letter = 0;
                for (j, (_, members)) in input_atoms.iter().enumerate() {
                    if members.contains(&u) {
                        v |= 1 << j;
                    }
                }
                v
            })
            .collect(),
        pred_shift,
        exo_shift,
    };

    let total = base.state_count() as u64 * ext.classes as u64 * (1u64 << e);
    if total >= u32::MAX as u64 {
        return Err(AbsError::Shape(format!("extended system would have {total} states")));
    }

    let mut states: Vec<(String, Letter, bool)> = Vec::with_capacity(total as usize);
    for b in 0..base.state_count() as u32 {
        for class_idx in 0..ext.classes {
            for bits in 0..(1u32 << e) {
                let mut letter = base.label(b);
                if class_idx > 0 {
                    letter |= (class_idx - 1) << pred_shift;
                }
                letter |= bits << exo_shift;
                let name = format!("{}+c{}e{}", base.state_name(b), class_idx, bits);
                let init = base.is_initial(b) && class_idx == 0 && bits == 0;
                states.push((name, letter, init));
            }
        }
    }

    let mut transitions = Vec::new();
    for b in 0..base.state_count() as u32 {
        for u in 0..base.input_count() as u32 {
            let class = Some(ext.input_class[u as usize]);
            for &b2 in base.post(b, u).map_err(AbsError::Ts)? {
                for class_idx in 0..ext.classes {
                    let from_class = if class_idx == 0 { None } else { Some(class_idx - 1) };
                    for bits in 0..(1u32 << e) {
                        let src = ext.encode(b, from_class, bits);
                        for next_bits in 0..(1u32 << e) {
                            transitions.push((src, u, ext.encode(b2, class, next_bits)));
                        }
                    }
                }
            }
        }
    }

    let sys = TransitionSystem::new(
        alphabet,
        (0..base.input_count() as u32)
            .map(|u| base.input_name(u).to_string())
            .collect(),
        states,
        &transitions,
    )?;
    Ok((sys, ext))
}

#[cfg(test)]
mod tests {
    use super::*;
    use config::ROBOT_CONFIG;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    pub(crate) fn small_spec() -> AbstractionSpec<f64> {
        let text = "model: unicycle\ndims: x y theta\n\
                    domain: 0<=x<=1, 0<=y<=1, 0<=theta<=6.283185307179586\n\
                    wrap: theta\n\
                    eta: 0.25 0.25 1.5707963267948966\n\
                    tau: 0.5\n\
                    input stop: 0 0\ninput go: 0.4 0\ninput turn: 0.2 0.2\n\
                    initial: 0<=x<=0.3, 0<=y<=0.3\n\
                    atom home: 0<=x<=0.35, 0<=y<=0.35\n";
        parse_abstraction_config(text).unwrap()
    }

    #[test]
    fn stationary_input_self_loops_exactly() {
        let g = build_grid_abstraction(&small_spec()).unwrap();
        for c in 0..g.grid.cell_count() as u32 {
            assert_eq!(g.system.post(c, 0).unwrap(), &[c], "cell {c}");
        }
    }

    #[test]
    fn robot_scale_abstraction_builds_with_nine_inputs() {
        let spec: AbstractionSpec<f64> = parse_abstraction_config(ROBOT_CONFIG).unwrap();
        let g = build_grid_abstraction(&spec).unwrap();
        assert_eq!(g.model.inputs.len(), 9);
        assert_eq!(g.system.state_count(), 5001);
        g.system.validate_non_blocking().unwrap();
        // ε: Euclidean over the sole non-periodic dimension (x) versus the
        // largest periodic half width (θ at π/8).
        let expect = 0.1f64.max(TAU / 16.0);
        assert!((g.eps - expect).abs() < 1e-12);
    }

    #[test]
    fn out_state_is_absorbing_and_labeled() {
        let g = build_grid_abstraction(&small_spec()).unwrap();
        let out = g.out_state;
        for u in 0..3 {
            assert_eq!(g.system.post(out, u).unwrap(), &[out]);
        }
        let bit = g.system.atoms().bit(OUT_ATOM).unwrap();
        assert_ne!(g.system.label(out) & (1 << bit), 0);
    }

    #[test]
    fn labels_follow_cell_centers() {
        let g = build_grid_abstraction(&small_spec()).unwrap();
        let bit = g.system.atoms().bit("home").unwrap();
        for c in 0..g.grid.cell_count() {
            let center = g.grid.center(c);
            let inside = center[0] <= 0.35 && center[1] <= 0.35;
            let labeled = g.system.label(c as u32) & (1 << bit) != 0;
            assert_eq!(inside, labeled, "cell {c} center {center:?}");
        }
    }

    #[test]
    fn monte_carlo_successor_soundness() {
        let g = build_grid_abstraction(&small_spec()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let c = rng.gen_range(0..g.grid.cell_count());
            let point: Vec<f64> = g
                .grid
                .cell_box(c)
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..hi))
                .collect();
            let u = rng.gen_range(0..g.model.inputs.len() as u32);
            let landed = flow(&g.model, &point, g.model.input_values(u), g.model.tau).unwrap();
            let landed_cell = g.abstract_state(&landed);
            assert!(
                g.system.post(c as u32, u).unwrap().contains(&landed_cell),
                "cell {c} input {u} point {point:?} landed {landed_cell}"
            );
        }
    }

    #[test]
    fn check_asr_passes_and_catches_mutations() {
        let g = build_grid_abstraction(&small_spec()).unwrap();
        let pairs = sample_relation_pairs(&g, 300, 23);
        assert_eq!(check_asr(&g, &pairs).unwrap(), 300);

        // Delete the transition the first sampled pair actually takes
        // under input `go`; condition 3 must report it.
        let (cell, point) = (&pairs[0].0, &pairs[0].1);
        let landed = flow(&g.model, point, g.model.input_values(1), g.model.tau).unwrap();
        let landed_cell = g.abstract_state(&landed);
        let mut tampered = build_grid_abstraction(&small_spec()).unwrap();
        tampered.system = tampered.system.without_transition(*cell, 1, landed_cell);
        let witness = check_asr(&tampered, &pairs).unwrap_err();
        assert_eq!(witness.condition, 3);
        assert_eq!(witness.cell, *cell);
        assert_eq!(witness.input, Some(1));
        assert_eq!(witness.landed_cell, Some(landed_cell));
    }

    #[test]
    fn extension_tracks_last_input_and_exogenous_bits() {
        let g = build_grid_abstraction(&small_spec()).unwrap();
        let stop_inputs = vec![0u32];
        let (ext_sys, ext) = extend_system(
            &g.system,
            &[("halted".into(), stop_inputs)],
            &["f".into()],
        )
        .unwrap();
        assert_eq!(ext.classes, 3);
        assert_eq!(
            ext_sys.state_count(),
            g.system.state_count() * 3 * 2
        );

        let halted_bit = ext_sys.atoms().bit("halted").unwrap();
        let f_bit = ext_sys.atoms().bit("f").unwrap();
        // Initial states: class none, exo false, base-initial underneath.
        for x in ext_sys.initial_states() {
            let (b, class, e) = ext.decode(x);
            assert!(g.system.is_initial(b));
            assert_eq!(class, None);
            assert_eq!(e, 0);
            assert_eq!(ext_sys.label(x) & (1 << halted_bit), 0);
        }
        // Stepping with input 0 (stop) sets the class and leaves both
        // exogenous valuations available to the environment.
        let x0 = ext_sys.initial_states()[0];
        let succ = ext_sys.post(x0, 0).unwrap();
        let mut exo_seen = std::collections::BTreeSet::new();
        for &y in succ {
            let (_, class, e) = ext.decode(y);
            assert_eq!(class, Some(1)); // valuation: halted
            assert_ne!(ext_sys.label(y) & (1 << halted_bit), 0);
            assert_eq!(ext_sys.label(y) & (1 << f_bit) != 0, e == 1);
            exo_seen.insert(e);
        }
        assert_eq!(exo_seen.into_iter().collect::<Vec<_>>(), vec![0, 1]);
        // A non-stop input clears the predicate.
        let succ = ext_sys.post(x0, 1).unwrap();
        for &y in succ {
            let (_, class, _) = ext.decode(y);
            assert_eq!(class, Some(0));
            assert_eq!(ext_sys.label(y) & (1 << halted_bit), 0);
        }
        // Encode/decode round-trip.
        for x in [0u32, 5, 17, ext_sys.state_count() as u32 - 1] {
            let (b, c, e) = ext.decode(x);
            assert_eq!(ext.encode(b, c, e), x);
        }
    }

    #[test]
    fn robot_reach_avoid_scenario_is_realizable() {
        let spec: AbstractionSpec<f64> = parse_abstraction_config(ROBOT_CONFIG).unwrap();
        let g = build_grid_abstraction(&spec).unwrap();
        let f = crate::ltl::parse_formula(
            "(!(o1 | o2 | o3) W target) & <> target",
            g.system.atoms(),
        )
        .unwrap();
        let result = crate::synthesis::synthesize(&g.system, &f).unwrap();
        assert!(result.realizable, "{}", result.report.to_text());

        let mut env = EnvSource::Silent;
        let traj = sim::refine_and_simulate(
            &g,
            None,
            &result,
            &[0.5, 2.5, 0.3],
            &mut env,
            result.product.state_count(),
            true,
        )
        .unwrap();
        let arrived = traj.target_step.expect("target reached");
        assert!(arrived <= result.product.state_count());
        assert!(traj.final_state[0] >= 4.15 - g.eps);
        // The run never touches an obstacle cell.
        let (o1, o2, o3) = (
            g.system.atoms().bit("o1").unwrap(),
            g.system.atoms().bit("o2").unwrap(),
            g.system.atoms().bit("o3").unwrap(),
        );
        let bad = (1 << o1) | (1 << o2) | (1 << o3);
        for row in &traj.rows {
            assert_eq!(g.system.label(row.cell) & bad, 0, "step {}", row.t);
        }
    }

    #[test]
    fn extended_robot_fault_monitor_is_realizable() {
        let spec: AbstractionSpec<f64> = parse_abstraction_config(ROBOT_CONFIG).unwrap();
        let g = build_grid_abstraction(&spec).unwrap();
        // `stop` observes the v = 0 inputs: stop, spin_l, spin_r.
        let (ext_sys, _) = extend_system(
            &g.system,
            &[("stop".into(), vec![0, 7, 8])],
            &["f".into()],
        )
        .unwrap();
        assert_eq!(ext_sys.state_count(), 30006);
        let f = crate::ltl::gen_fail_formula(3, 2, crate::ltl::Formula::atom("stop")).unwrap();
        let result = crate::synthesis::synthesize(&ext_sys, &f).unwrap();
        assert_eq!(result.report.dfa_states, 10);
        assert!(result.realizable);
        assert!(result.controller.is_none());
    }

    #[test]
    fn extension_preserves_non_blocking() {
        let g = build_grid_abstraction(&small_spec()).unwrap();
        let (ext_sys, _) =
            extend_system(&g.system, &[("halted".into(), vec![0])], &["f".into()]).unwrap();
        ext_sys.validate_non_blocking().unwrap();
    }
}
