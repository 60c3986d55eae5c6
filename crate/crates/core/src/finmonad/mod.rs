//! Finitary monads over canonical finite sets.
//!
//! A monad here is a contract: for each finite set `A` it enumerates a
//! duplicate-free carrier of computations, and provides `ret` and `bind`
//! on carrier *indices*. Index equality is computation equality, so every
//! law in the crate can be checked by plain exhaustive enumeration.

mod laws;
mod state;
mod term;

pub use laws::{check_monad_laws, check_monad_map, LawCheckConfig};
pub use state::{state_equations, state_signature, StateMonad};
pub use term::{
    commutative_theory, enumerate_terms, fail_signature, fail_theory, flip_signature, Normalizer,
    OpDecl, Signature, Term, TermMonad,
};

use crate::error::{Error, Result};
use crate::finset::FinSet;

/// A finitary monad presented computationally: enumerable carriers with
/// decidable (index) equality.
///
/// `bind` takes the continuation `u : A -> TB` as a slice of carrier
/// indices of length `|A|`.
pub trait FinMonad {
    fn name(&self) -> String;

    /// Size of the carrier `TA`.
    fn carrier_len(&self, a: FinSet) -> Result<usize>;

    /// Index of the pure computation `return value`.
    fn ret(&self, a: FinSet, value: usize) -> Result<usize>;

    /// Index of `t >>= u`.
    fn bind(&self, a: FinSet, b: FinSet, t: usize, cont: &[usize]) -> Result<usize>;

    /// Printable form of a carrier element, for witnesses and exports.
    fn describe(&self, a: FinSet, t: usize) -> String {
        let _ = a;
        format!("#{t}")
    }

    /// The canonical runner, for built-in monads that have one.
    fn canonical_comodel(&self) -> Result<crate::comodel::Comodel> {
        Err(Error::Unsupported { monad: self.name() })
    }
}

/// `t ⊳ s`: run `t`, discard its value, continue as `s`.
pub fn skip(m: &dyn FinMonad, a: FinSet, b: FinSet, t: usize, s: usize) -> Result<usize> {
    m.bind(a, b, t, &vec![s; a.size()])
}

/// The family `λa. return a` as a slice, i.e. the identity continuation.
pub fn ret_family(m: &dyn FinMonad, a: FinSet) -> Result<Vec<usize>> {
    a.elements().map(|x| m.ret(a, x)).collect()
}

/// Interpret a syntax tree in any monad, given one carrier element per
/// generating operation (`generators[op] ∈ T arity(op)`).
pub fn interpret_term(
    m: &dyn FinMonad,
    sig: &Signature,
    generators: &[usize],
    b: FinSet,
    t: &Term,
) -> Result<usize> {
    match t {
        Term::Leaf(v) => m.ret(b, *v),
        Term::Node { op, children } => {
            let arity = FinSet(sig.arity(*op));
            let cont: Vec<usize> = children
                .iter()
                .map(|c| interpret_term(m, sig, generators, b, c))
                .collect::<Result<_>>()?;
            m.bind(arity, b, generators[*op], &cont)
        }
    }
}

/// The generator elements of the state theory inside the state monad:
/// `get` is the diagonal read, `put_j` writes `j`.
pub fn state_generators(m: &StateMonad) -> Vec<usize> {
    let states = m.states();
    let mut gens = vec![m.encode(FinSet(states), |s| (s, s))];
    for j in 0..states {
        gens.push(m.encode(FinSet(1), |_| (0, j)));
    }
    gens
}

/// A monad map: one component function per carrier, preserving `ret` and
/// `bind` (checked by [`check_monad_map`]).
pub struct MonadMap<'a> {
    pub source: &'a dyn FinMonad,
    pub target: &'a dyn FinMonad,
    pub label: String,
    component: Box<dyn Fn(FinSet, usize) -> Result<usize> + 'a>,
}

impl<'a> MonadMap<'a> {
    pub fn new(
        source: &'a dyn FinMonad,
        target: &'a dyn FinMonad,
        label: impl Into<String>,
        component: impl Fn(FinSet, usize) -> Result<usize> + 'a,
    ) -> Self {
        MonadMap {
            source,
            target,
            label: label.into(),
            component: Box::new(component),
        }
    }

    pub fn identity(monad: &'a dyn FinMonad) -> Self {
        MonadMap::new(monad, monad, "id", |_, t| Ok(t))
    }

    pub fn apply(&self, a: FinSet, t: usize) -> Result<usize> {
        let len = self.source.carrier_len(a)?;
        if t >= len {
            return Err(Error::OutOfRange {
                index: t,
                what: format!("{}{}", self.source.name(), a),
            });
        }
        (self.component)(a, t)
    }

    /// The whole component table at size `a`.
    pub fn table(&self, a: FinSet) -> Result<Vec<usize>> {
        (0..self.source.carrier_len(a)?)
            .map(|t| self.apply(a, t))
            .collect()
    }
}
