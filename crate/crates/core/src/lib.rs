//! Solvers for three-operator monotone inclusions `0 ∈ Ax + Bx + Cx` over
//! `R^n`, where `A` is maximally monotone (accessed through its resolvent),
//! `B` is monotone Lipschitz, and `C` is cocoercive.
//!
//! The crate provides:
//!
//! - an operator catalog (projections, shrinkage, affine/skew/quadratic maps)
//!   with randomized probes that check declared Lipschitz/cocoercivity
//!   certificates ([`operators`], [`catalog`], [`probes`]);
//! - the outer reflected forward-backward scheme with its step-size planner,
//!   seven baseline splitting schemes, and per-iteration diagnostics
//!   ([`algorithms`]);
//! - a product-space lift that solves composite primal-dual inclusions with
//!   parallel sums by running the same scheme on a stacked space
//!   ([`product`]);
//! - JSON descriptions of operators and problems ([`json`]).
//!
//! Planted test problems make every solver run checkable against an exact
//! solution; see [`catalog::synthesize_instance`] and
//! [`product::synthesize_composite`].

pub mod algorithms;
pub mod catalog;
pub mod error;
pub mod json;
pub mod linalg;
pub mod operators;
pub mod point;
pub mod probes;
pub mod product;

pub use catalog::{Inclusion, InstanceKind, ProblemInstance};
pub use error::{OperatorError, PlanError, SolveError};
pub use operators::{ForwardOp, ResolventOp, SetValuedOp, SingleValuedOp};
pub use point::Point;
