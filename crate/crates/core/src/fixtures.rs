//! Ready-made monads and runners shared by the CLI and the test suites.

use crate::comodel::Comodel;
use crate::finmonad::{flip_signature, FinMonad, StateMonad, TermMonad};

/// Free theory of one binary `flip`, carrier depth-bounded.
pub fn flip_monad(depth: usize) -> TermMonad {
    TermMonad::free(flip_signature(), depth)
}

/// The four eventually-periodic binary streams (00)^w, (01)^w, (10)^w,
/// (11)^w in that order, closed under shift; `flip` reads the head digit
/// and shifts.
pub fn four_stream_comodel() -> Comodel {
    Comodel::new(
        flip_signature(),
        4,
        vec![vec![(0, 0), (0, 2), (1, 1), (1, 3)]],
    )
    .unwrap()
}

/// The canonical runner for the theory of state: states are memory
/// contents, `get` reads, `put_j` writes.
pub fn state_comodel(states: usize) -> Comodel {
    StateMonad::new(states).canonical_comodel().unwrap()
}
