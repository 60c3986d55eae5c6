//! The state monad `TA = (A × S)^S` over a finite state set.

use crate::error::{Error, Result};
use crate::finset::FinSet;

use super::term::{Signature, Term};
use super::FinMonad;

/// Computations are total tables `S -> A × S`, encoded as mixed-radix
/// numbers: digit `s` (base `|A|·|S|`) is `value·|S| + next`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMonad {
    states: usize,
}

impl StateMonad {
    pub fn new(states: usize) -> StateMonad {
        assert!(states > 0, "state monad needs a nonempty state set");
        StateMonad { states }
    }

    pub fn states(&self) -> usize {
        self.states
    }

    fn radix(&self, a: FinSet) -> usize {
        a.size() * self.states
    }

    /// The `(value, next)` pair of `t` at state `s`.
    pub fn eval(&self, a: FinSet, t: usize, s: usize) -> (usize, usize) {
        let base = self.radix(a);
        let digit = (t / base.pow(s as u32)) % base;
        (digit / self.states, digit % self.states)
    }

    /// Build a table from its graph.
    pub fn encode(&self, a: FinSet, f: impl Fn(usize) -> (usize, usize)) -> usize {
        let base = self.radix(a);
        let mut code = 0;
        for s in (0..self.states).rev() {
            let (v, n) = f(s);
            debug_assert!(v < a.size() && n < self.states);
            code = code * base + (v * self.states + n);
        }
        code
    }
}

impl FinMonad for StateMonad {
    fn name(&self) -> String {
        format!("state[{}]", self.states)
    }

    fn carrier_len(&self, a: FinSet) -> Result<usize> {
        let size = (self.radix(a) as u128).pow(self.states as u32);
        usize::try_from(size).map_err(|_| Error::SearchSpaceTooLarge {
            size,
            cap: usize::MAX as u128,
        })
    }

    fn ret(&self, a: FinSet, value: usize) -> Result<usize> {
        if !a.contains(value) {
            return Err(Error::OutOfRange {
                index: value,
                what: format!("{a}"),
            });
        }
        Ok(self.encode(a, |s| (value, s)))
    }

    fn bind(&self, a: FinSet, b: FinSet, t: usize, cont: &[usize]) -> Result<usize> {
        if cont.len() != a.size() {
            return Err(Error::InvalidSpec(format!(
                "continuation has {} entries, expected {}",
                cont.len(),
                a.size()
            )));
        }
        Ok(self.encode(b, |s| {
            let (v, s1) = self.eval(a, t, s);
            self.eval(b, cont[v], s1)
        }))
    }

    fn describe(&self, a: FinSet, t: usize) -> String {
        let rows: Vec<String> = (0..self.states)
            .map(|s| {
                let (v, n) = self.eval(a, t, s);
                format!("{s}->({v},{n})")
            })
            .collect();
        format!("[{}]", rows.join(" "))
    }

    fn canonical_comodel(&self) -> Result<crate::comodel::Comodel> {
        let sig = state_signature(self.states);
        let mut coops = vec![(0..self.states).map(|w| (w, w)).collect::<Vec<_>>()];
        for j in 0..self.states {
            coops.push((0..self.states).map(|_| (0, j)).collect());
        }
        crate::comodel::Comodel::new(sig, self.states, coops)
    }
}

/// The theory of state over `states` memory values: `get` with one result
/// per value, and one unary `put_j` per value.
pub fn state_signature(states: usize) -> Signature {
    let mut ops: Vec<(String, usize)> = vec![("get".to_string(), states)];
    for j in 0..states {
        ops.push((format!("put{j}"), 1));
    }
    Signature::from_decls(
        ops.into_iter()
            .map(|(name, arity)| super::term::OpDecl { name, arity })
            .collect(),
    )
    .unwrap()
}

/// The four state equations as term pairs over the signature of
/// [`state_signature`], each with its ambient leaf alphabet size.
pub fn state_equations(states: usize) -> Vec<(Term, Term, usize)> {
    let get = 0;
    let put = |j: usize| 1 + j;
    let mut eqs = Vec::new();

    // get;get diagonal: reading twice equals reading once, leaves are
    // value pairs encoded as i*states + j.
    let pairs = FinSet(states);
    let lhs = Term::node(
        get,
        (0..states)
            .map(|i| {
                Term::node(
                    get,
                    (0..states)
                        .map(|j| Term::Leaf(pairs.encode_pair(i, j)))
                        .collect(),
                )
            })
            .collect(),
    );
    let rhs = Term::node(
        get,
        (0..states)
            .map(|i| Term::Leaf(pairs.encode_pair(i, i)))
            .collect(),
    );
    eqs.push((lhs, rhs, states * states));

    // get;put of the value just read is a no-op.
    let lhs = Term::node(
        get,
        (0..states)
            .map(|j| Term::node(put(j), vec![Term::Leaf(0)]))
            .collect(),
    );
    eqs.push((lhs, Term::Leaf(0), 1));

    // put;get reads back what was written.
    for j in 0..states {
        let lhs = Term::node(
            put(j),
            vec![Term::node(get, (0..states).map(Term::Leaf).collect())],
        );
        let rhs = Term::node(put(j), vec![Term::Leaf(j)]);
        eqs.push((lhs, rhs, states));
    }

    // put;put: the second write wins.
    for i in 0..states {
        for j in 0..states {
            let lhs = Term::node(put(i), vec![Term::node(put(j), vec![Term::Leaf(0)])]);
            let rhs = Term::node(put(j), vec![Term::Leaf(0)]);
            eqs.push((lhs, rhs, 1));
        }
    }
    eqs
}
