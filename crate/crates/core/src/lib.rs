//! Finite-scale behaviour categories for algebraic effects.
//!
//! This crate builds, at "desk" sizes where everything is exhaustively
//! checkable, the two halves of a Stone-style duality for notions of
//! computation:
//!
//! - from a finitary monad and a runner (comodel) for it, the *behaviour
//!   category*: states up to observable behaviour, with trace classes of
//!   unary computations as transitions ([`behaviour`]);
//! - from a finite category, the *sections monad* of output-and-transition
//!   assignments ([`sections`]), together with the unit and counit maps
//!   that compare the two constructions ([`duality`]).
//!
//! Supporting material: finite Boolean algebras, Boolean powers, B-sets
//! with congruence closure, étale spaces and germs ([`boolalg`]); finite
//! internal categories and retrofunctors ([`topcat`]); comodels and their
//! operational subset algebras ([`comodel`]); and a symbolic presentation
//! of look-ahead ("scrying") sections over binary streams
//! ([`sections::scry`]).
//!
//! Everything is immutable after construction and all checks are
//! deterministic; reports carry the bounds they were computed at.

// Table-driven math: parallel index loops are clearer than zip chains here.
#![allow(clippy::needless_range_loop)]

pub mod behaviour;
pub mod boolalg;
pub mod comodel;
pub mod duality;
pub mod error;
pub mod finmonad;
pub mod finset;
pub mod fixtures;
pub mod formats;
pub mod report;
pub mod sections;
pub mod topcat;

pub use error::{Error, Result};
pub use finset::FinSet;
pub use report::LawReport;
