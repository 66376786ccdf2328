//! Controller synthesis for safety-plus-guarantee specifications.
//!
//! The pipeline: write a requirement as a temporal formula ([`ltl`]), turn
//! its violations into a finite monitor ([`automata`]), compose that monitor
//! with a finite transition system ([`ts`]), solve the resulting safety and
//! reachability games for a maximally permissive controller ([`games`],
//! [`synthesis`]), and — when the plant is a sampled ODE — build the finite
//! system as a grid abstraction and replay the controller against the
//! continuous model ([`abstraction`]).

pub mod abstraction;
pub mod automata;
pub mod games;
pub mod ltl;
pub mod synthesis;
pub mod ts;

pub use ltl::{Alphabet, Formula, LtlError};

/// Continuous-side types instantiated at the default `f64` precision.
pub type OdeModel64 = abstraction::OdeModel<f64>;
pub type Grid64 = abstraction::GridAbstraction<f64>;
pub type Trajectory64 = abstraction::Trajectory<f64>;
