//! Canonical finite sets.
//!
//! Every finite set in this crate is the integer range `0..n`. Two sets are
//! equal exactly when their sizes are equal, so a `FinSet` is just a size
//! with some arithmetic for forming products.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FinSet(pub usize);

impl FinSet {
    pub fn size(self) -> usize {
        self.0
    }

    pub fn elements(self) -> std::ops::Range<usize> {
        0..self.0
    }

    pub fn contains(self, x: usize) -> bool {
        x < self.0
    }

    /// The product `self × self`, with pairs encoded as `x * n + y`.
    pub fn square(self) -> FinSet {
        FinSet(self.0 * self.0)
    }

    pub fn encode_pair(self, x: usize, y: usize) -> usize {
        x * self.0 + y
    }

    pub fn decode_pair(self, p: usize) -> (usize, usize) {
        (p / self.0, p % self.0)
    }
}

impl std::fmt::Display for FinSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}]", self.0)
    }
}

/// Iterate over all functions `dom -> 0..codomain` as digit vectors, in
/// lexicographic order. The empty domain yields exactly the empty function.
pub fn functions(dom: usize, codomain: usize) -> FunctionIter {
    FunctionIter {
        digits: vec![0; dom],
        codomain,
        done: dom > 0 && codomain == 0,
        fresh: true,
    }
}

pub struct FunctionIter {
    digits: Vec<usize>,
    codomain: usize,
    done: bool,
    fresh: bool,
}

impl Iterator for FunctionIter {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if self.fresh {
            self.fresh = false;
            return Some(self.digits.clone());
        }
        for i in 0..self.digits.len() {
            self.digits[i] += 1;
            if self.digits[i] < self.codomain {
                return Some(self.digits.clone());
            }
            self.digits[i] = 0;
        }
        self.done = true;
        None
    }
}

/// Number of functions `dom -> codomain`, as a u128 to survive size guards.
pub fn function_count(dom: usize, codomain: usize) -> u128 {
    (codomain as u128).pow(dom as u32)
}
