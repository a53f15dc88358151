//! Grigorchuk groups G_ω acting on the binary tree: element arithmetic, the
//! Schreier graph of 1^∞, substitution calculus, quasi-cubic measures and a
//! random-walk laboratory.

pub mod core_tree;
pub mod error;
pub mod grigorchuk;
pub mod measures;
pub mod par;
pub mod schreier;
pub mod subst_calculus;
pub mod walk_lab;

pub use core_tree::{Digits, Element, Expr, GroupCtx, Letter, Vertex};
pub use error::{Error, Result};
pub use grigorchuk::{GermCoset, GermValue, OmegaString};
pub use schreier::OrbitPoint;
