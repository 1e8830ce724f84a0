//! Discrete path measures: the state space, the time grid, paths, events and
//! the measure type itself, with marginals, the incompressibility check,
//! shifts, conditioning and mixing.

mod event;
mod grid;
mod measure;
mod space;
mod values;

pub use event::{CylinderConstraint, PathEvent};
pub use grid::{GridMode, TimeGrid};
pub use measure::{mix, Atom, DiscretePath, IncompressibilityReport, PathMeasure};
pub use space::{SpaceKind, StateSpace};
pub use values::{Marginal, Observable, WEIGHT_TOL};
