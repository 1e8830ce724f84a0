//! Numerical toolkit for generalized incompressible flows on finite grids.
//!
//! A generalized incompressible flow is a probability measure on paths whose
//! single-time marginals do not depend on time. This crate represents such
//! measures by finitely many weighted cell sequences ([`PathMeasure`]) and
//! provides:
//!
//! - [`constructors`]: flows induced by cell maps, the stopping rotation on the
//!   circle, and Cesàro averaging of shifted measures;
//! - [`ergodic`]: running averages, maximal functions, the maximal inequality
//!   check, greedy Vitali selection, and convergence diagnostics;
//! - [`structure`]: shift orbits, ergodicity and weak ergodicity, invariant
//!   hulls, and convex decomposition;
//! - [`brenier`]: the discrete minimum-action problem with a prescribed
//!   endpoint coupling, solved as a linear program over enumerated paths.
//!
//! With the default `parallel` feature, per-atom and per-candidate loops run
//! on rayon. Results are identical either way.

pub mod brenier;
pub mod constructors;
pub mod ergodic;
mod error;
pub mod families;
pub mod par;
pub mod path_measure;
pub mod report;
pub mod structure;

pub use error::{Error, Result};
pub use path_measure::{
    mix, Atom, DiscretePath, GridMode, IncompressibilityReport, Marginal, Observable, PathEvent,
    PathMeasure, SpaceKind, StateSpace, TimeGrid,
};
