//! STRIPS model: lifted specs, grounding, states and successor generation.

mod spec;
pub mod symmetry;
mod task;

pub use spec::*;
pub use task::{ground, Atom, GroundAction, State, Task, Transition};
