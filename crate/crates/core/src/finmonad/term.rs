//! Term monads: free theories and normalizer-presented quotient theories.
//!
//! Carriers are depth-bounded term universes. The bound is a hard wall:
//! a bind whose result (after normalization) escapes the bound fails with
//! [`Error::DepthExceeded`] rather than truncating.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::error::{Error, Result};
use crate::finset::FinSet;

use super::FinMonad;

/// One generating operation. `arity` is the number of possible results,
/// i.e. the number of children of a node; `arity` 0 is allowed and denotes
/// an operation that never returns (its cointerpretation has empty
/// codomain).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpDecl {
    pub name: String,
    pub arity: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Signature {
    ops: Vec<OpDecl>,
}

impl Signature {
    pub fn new(ops: Vec<(&str, usize)>) -> Result<Signature> {
        Signature::from_decls(
            ops.into_iter()
                .map(|(name, arity)| OpDecl {
                    name: name.to_string(),
                    arity,
                })
                .collect(),
        )
    }

    pub fn from_decls(ops: Vec<OpDecl>) -> Result<Signature> {
        for (i, op) in ops.iter().enumerate() {
            if ops[..i].iter().any(|o| o.name == op.name) {
                return Err(Error::InvalidSpec(format!(
                    "duplicate operation name `{}`",
                    op.name
                )));
            }
        }
        Ok(Signature { ops })
    }

    pub fn ops(&self) -> &[OpDecl] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn arity(&self, op: usize) -> usize {
        self.ops[op].arity
    }

    pub fn name(&self, op: usize) -> &str {
        &self.ops[op].name
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.ops
            .iter()
            .position(|o| o.name == name)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown operation `{name}`")))
    }
}

/// A syntax tree over a signature. Leaves carry values of the ambient set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Leaf(usize),
    Node { op: usize, children: Vec<Term> },
}

impl Term {
    pub fn node(op: usize, children: Vec<Term>) -> Term {
        Term::Node { op, children }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Leaf(_) => 0,
            Term::Node { children, .. } => 1 + children.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn validate(&self, sig: &Signature, leaf_bound: usize) -> Result<()> {
        match self {
            Term::Leaf(v) => {
                if *v >= leaf_bound {
                    return Err(Error::OutOfRange {
                        index: *v,
                        what: format!("leaf in [{leaf_bound}]"),
                    });
                }
            }
            Term::Node { op, children } => {
                if *op >= sig.len() {
                    return Err(Error::OutOfRange {
                        index: *op,
                        what: "signature".into(),
                    });
                }
                if children.len() != sig.arity(*op) {
                    return Err(Error::InvalidSpec(format!(
                        "`{}` expects {} children, got {}",
                        sig.name(*op),
                        sig.arity(*op),
                        children.len()
                    )));
                }
                for c in children {
                    c.validate(sig, leaf_bound)?;
                }
            }
        }
        Ok(())
    }

    /// Graft `cont[v]` onto every leaf `v`.
    pub fn substitute(&self, cont: &[Term]) -> Term {
        match self {
            Term::Leaf(v) => cont[*v].clone(),
            Term::Node { op, children } => Term::Node {
                op: *op,
                children: children.iter().map(|c| c.substitute(cont)).collect(),
            },
        }
    }

    pub fn display(&self, sig: &Signature) -> String {
        match self {
            Term::Leaf(v) => format!("{v}"),
            Term::Node { op, children } => {
                if children.is_empty() {
                    sig.name(*op).to_string()
                } else {
                    let args: Vec<_> = children.iter().map(|c| c.display(sig)).collect();
                    format!("{}({})", sig.name(*op), args.join(","))
                }
            }
        }
    }
}

/// Enumerate every term over `sig` with leaves in `0..leaves` of depth at
/// most `depth`, in a stable order: all terms of depth `< d` precede the
/// terms of depth exactly `d`, and within a level nodes are ordered by
/// operation index, then lexicographically by child indices.
pub fn enumerate_terms(sig: &Signature, leaves: usize, depth: usize) -> Vec<Term> {
    let mut all: Vec<Term> = (0..leaves).map(Term::Leaf).collect();
    let mut prev_level_end = all.len();
    let mut prev_level_start = 0;
    for _ in 1..=depth {
        let mut next = Vec::new();
        for op in 0..sig.len() {
            let arity = sig.arity(op);
            // Children range over everything so far, with at least one child
            // from the newest level so the node has this exact depth.
            let mut idx = vec![0usize; arity];
            if arity == 0 {
                if prev_level_start == 0 {
                    next.push(Term::Node {
                        op,
                        children: vec![],
                    });
                }
                continue;
            }
            if prev_level_end == 0 {
                continue;
            }
            loop {
                if idx.iter().any(|&i| i >= prev_level_start) {
                    let children: Vec<Term> = idx.iter().map(|&i| all[i].clone()).collect();
                    next.push(Term::Node { op, children });
                }
                let mut k = arity;
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < prev_level_end {
                        break;
                    }
                    idx[k] = 0;
                    if k == 0 {
                        break;
                    }
                }
                if idx.iter().all(|&i| i == 0) {
                    break;
                }
            }
        }
        if next.is_empty() {
            break;
        }
        prev_level_start = all.len();
        all.extend(next);
        prev_level_end = all.len();
    }
    all
}

/// Normal-form functions for quotient theories.
///
/// Soundness (idempotence plus preservation of the supplied equations) is
/// checked at construction time; completeness for the intended theory is
/// the caller's obligation.
#[derive(Clone, Copy)]
pub enum Normalizer {
    /// Free theory: syntactic equality.
    None,
    /// One commutative operation (or several): children sorted recursively.
    Commutative,
    /// The theory of a never-returning nullary operation. It has no
    /// equations, so normal forms are the terms themselves.
    Fail,
    /// Caller-supplied function, for tests and extensions.
    Custom(&'static str, fn(&Signature, &Term) -> Term),
}

impl Normalizer {
    pub fn label(&self) -> &str {
        match self {
            Normalizer::None => "none",
            Normalizer::Commutative => "commutative",
            Normalizer::Fail => "fail",
            Normalizer::Custom(name, _) => name,
        }
    }

    pub fn apply(&self, sig: &Signature, t: &Term) -> Term {
        match self {
            Normalizer::None | Normalizer::Fail => t.clone(),
            Normalizer::Commutative => sort_children(sig, t),
            Normalizer::Custom(_, f) => f(sig, t),
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, Normalizer::None | Normalizer::Fail)
    }

    /// Whether normal forms keep the depth of their input (true for the
    /// shipped normalizers; sorting children cannot change depth).
    pub fn preserves_depth(&self) -> bool {
        !matches!(self, Normalizer::Custom(..))
    }
}

impl std::fmt::Debug for Normalizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Normalizer::{}", self.label())
    }
}

fn sort_children(sig: &Signature, t: &Term) -> Term {
    let _ = sig;
    match t {
        Term::Leaf(v) => Term::Leaf(*v),
        Term::Node { op, children } => {
            let mut kids: Vec<Term> = children.iter().map(|c| sort_children(sig, c)).collect();
            kids.sort();
            Term::Node {
                op: *op,
                children: kids,
            }
        }
    }
}

struct Carrier {
    terms: Vec<Term>,
    depths: Vec<usize>,
    index: HashMap<Term, usize>,
}

/// A term monad: the free theory on a signature, or a quotient of it
/// presented by a normal-form function.
pub struct TermMonad {
    sig: Signature,
    depth_bound: usize,
    normalizer: Normalizer,
    equations: Vec<(Term, Term)>,
    carriers: RwLock<HashMap<usize, Arc<Carrier>>>,
}

impl std::fmt::Debug for TermMonad {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "TermMonad({})", self.name())
    }
}

impl TermMonad {
    /// The free theory on `sig` with the given carrier depth bound.
    pub fn free(sig: Signature, depth_bound: usize) -> TermMonad {
        TermMonad {
            sig,
            depth_bound,
            normalizer: Normalizer::None,
            equations: Vec::new(),
            carriers: RwLock::new(HashMap::new()),
        }
    }

    /// A quotient theory. The normalizer must be idempotent on the bounded
    /// universe and must identify both sides of every supplied equation;
    /// both conditions are verified here, on the universe over two leaves.
    pub fn quotient(
        sig: Signature,
        depth_bound: usize,
        equations: Vec<(Term, Term)>,
        normalizer: Normalizer,
    ) -> Result<TermMonad> {
        let monad = TermMonad {
            sig,
            depth_bound,
            normalizer,
            equations,
            carriers: RwLock::new(HashMap::new()),
        };
        for t in enumerate_terms(&monad.sig, 2, depth_bound) {
            let once = monad.normalizer.apply(&monad.sig, &t);
            let twice = monad.normalizer.apply(&monad.sig, &once);
            if once != twice {
                return Err(Error::NormalizerUnsound {
                    term: t.display(&monad.sig),
                });
            }
        }
        for (lhs, rhs) in &monad.equations {
            let l = monad.normalizer.apply(&monad.sig, lhs);
            let r = monad.normalizer.apply(&monad.sig, rhs);
            if l != r {
                return Err(Error::NormalizerUnsound {
                    term: format!(
                        "equation {} = {} not collapsed",
                        lhs.display(&monad.sig),
                        rhs.display(&monad.sig)
                    ),
                });
            }
        }
        Ok(monad)
    }

    pub fn signature(&self) -> &Signature {
        &self.sig
    }

    pub fn depth_bound(&self) -> usize {
        self.depth_bound
    }

    pub fn equations(&self) -> &[(Term, Term)] {
        &self.equations
    }

    /// Free theories admit traces as literal operation sequences.
    pub fn is_free(&self) -> bool {
        self.normalizer.is_identity() && self.equations.is_empty()
    }

    fn carrier(&self, a: usize) -> Arc<Carrier> {
        if let Some(c) = self.carriers.read().unwrap().get(&a) {
            return c.clone();
        }
        let mut terms: Vec<Term> = Vec::new();
        let mut index = HashMap::new();
        for t in enumerate_terms(&self.sig, a, self.depth_bound) {
            let nf = self.normalizer.apply(&self.sig, &t);
            if !index.contains_key(&nf) {
                index.insert(nf.clone(), terms.len());
                terms.push(nf);
            }
        }
        let depths = terms.iter().map(Term::depth).collect();
        let carrier = Arc::new(Carrier {
            terms,
            depths,
            index,
        });
        self.carriers.write().unwrap().insert(a, carrier.clone());
        carrier
    }

    pub fn term_at(&self, a: FinSet, t: usize) -> Result<Term> {
        let c = self.carrier(a.size());
        c.terms.get(t).cloned().ok_or_else(|| Error::OutOfRange {
            index: t,
            what: format!("{}{}", self.name(), a),
        })
    }

    /// Index of a term's normal form; `DepthExceeded` when the normal form
    /// escapes the bound.
    pub fn index_of(&self, a: FinSet, t: &Term) -> Result<usize> {
        t.validate(&self.sig, a.size())?;
        let nf = self.normalizer.apply(&self.sig, t);
        let c = self.carrier(a.size());
        c.index.get(&nf).copied().ok_or(Error::DepthExceeded {
            depth: nf.depth(),
            bound: self.depth_bound,
        })
    }
}

impl FinMonad for TermMonad {
    fn name(&self) -> String {
        let ops: Vec<String> = self
            .sig
            .ops()
            .iter()
            .map(|o| format!("{}/{}", o.name, o.arity))
            .collect();
        if self.is_free() {
            format!("free[{}]@{}", ops.join(","), self.depth_bound)
        } else {
            format!(
                "quot[{};{}]@{}",
                ops.join(","),
                self.normalizer.label(),
                self.depth_bound
            )
        }
    }

    fn carrier_len(&self, a: FinSet) -> Result<usize> {
        Ok(self.carrier(a.size()).terms.len())
    }

    fn ret(&self, a: FinSet, value: usize) -> Result<usize> {
        if !a.contains(value) {
            return Err(Error::OutOfRange {
                index: value,
                what: format!("{a}"),
            });
        }
        self.index_of(a, &Term::Leaf(value))
    }

    fn bind(&self, a: FinSet, b: FinSet, t: usize, cont: &[usize]) -> Result<usize> {
        let ca = self.carrier(a.size());
        let cb = self.carrier(b.size());
        let term = ca.terms.get(t).ok_or_else(|| Error::OutOfRange {
            index: t,
            what: format!("{}{}", self.name(), a),
        })?;
        for &u in cont {
            if u >= cb.terms.len() {
                return Err(Error::OutOfRange {
                    index: u,
                    what: format!("{}{}", self.name(), b),
                });
            }
        }
        // Grafting can square the tree size only to fall out of the
        // bound; with a depth-preserving normalizer the escape is known
        // from the leaf depths alone, before building anything.
        if self.normalizer.preserves_depth() {
            fn grafted_depth(t: &Term, leaf_depth: &[usize]) -> usize {
                match t {
                    Term::Leaf(v) => leaf_depth[*v],
                    Term::Node { children, .. } => {
                        1 + children
                            .iter()
                            .map(|c| grafted_depth(c, leaf_depth))
                            .max()
                            .unwrap_or(0)
                    }
                }
            }
            let leaf_depth: Vec<usize> = cont.iter().map(|&u| cb.depths[u]).collect();
            let depth = grafted_depth(term, &leaf_depth);
            if depth > self.depth_bound {
                return Err(Error::DepthExceeded {
                    depth,
                    bound: self.depth_bound,
                });
            }
        }
        let cont_terms: Vec<Term> = cont.iter().map(|&u| cb.terms[u].clone()).collect();
        let grafted = term.substitute(&cont_terms);
        let nf = self.normalizer.apply(&self.sig, &grafted);
        cb.index.get(&nf).copied().ok_or(Error::DepthExceeded {
            depth: nf.depth(),
            bound: self.depth_bound,
        })
    }

    fn describe(&self, a: FinSet, t: usize) -> String {
        match self.term_at(a, t) {
            Ok(term) => term.display(&self.sig),
            Err(_) => format!("#{t}"),
        }
    }
}

/// The signature of one binary operation, the running example theory.
pub fn flip_signature() -> Signature {
    Signature::new(vec![("flip", 2)]).unwrap()
}

/// The theory of a never-returning nullary operation.
pub fn fail_signature() -> Signature {
    Signature::new(vec![("fail", 0)]).unwrap()
}

/// The theory of one commutative binary operation: `x ⊕ y = y ⊕ x`,
/// presented by the sorting normalizer.
pub fn commutative_theory(depth_bound: usize) -> TermMonad {
    let sig = Signature::new(vec![("oplus", 2)]).unwrap();
    let eq = (
        Term::node(0, vec![Term::Leaf(0), Term::Leaf(1)]),
        Term::node(0, vec![Term::Leaf(1), Term::Leaf(0)]),
    );
    TermMonad::quotient(sig, depth_bound, vec![eq], Normalizer::Commutative).unwrap()
}

/// The free theory on the nullary `fail`.
pub fn fail_theory(depth_bound: usize) -> TermMonad {
    TermMonad::quotient(fail_signature(), depth_bound, Vec::new(), Normalizer::Fail).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flip(l: Term, r: Term) -> Term {
        Term::node(0, vec![l, r])
    }

    #[test]
    fn flip_carrier_at_depth_one() {
        // 2 leaves + 4 one-node trees.
        let m = TermMonad::free(flip_signature(), 1);
        assert_eq!(m.carrier_len(FinSet(2)).unwrap(), 6);
    }

    #[test]
    fn bind_on_leaf_is_the_continuation() {
        let m = TermMonad::free(flip_signature(), 2);
        let a = FinSet(2);
        let lens = m.carrier_len(a).unwrap();
        for v in 0..2 {
            let leaf = m.ret(a, v).unwrap();
            for u0 in 0..lens {
                for u1 in 0..lens {
                    assert_eq!(m.bind(a, a, leaf, &[u0, u1]).unwrap(), [u0, u1][v]);
                }
            }
        }
    }

    #[test]
    fn flip_skip_flip_is_the_complete_depth_two_tree() {
        let m = TermMonad::free(flip_signature(), 2);
        let a = FinSet(2);
        let f = m.index_of(a, &flip(Term::Leaf(0), Term::Leaf(1))).unwrap();
        let skipped = crate::finmonad::skip(&m, a, a, f, f).unwrap();
        let expected = flip(
            flip(Term::Leaf(0), Term::Leaf(1)),
            flip(Term::Leaf(0), Term::Leaf(1)),
        );
        assert_eq!(m.term_at(a, skipped).unwrap(), expected);
    }

    #[test]
    fn bind_past_the_bound_fails_loudly() {
        let m = TermMonad::free(flip_signature(), 1);
        let a = FinSet(2);
        let f = m.index_of(a, &flip(Term::Leaf(0), Term::Leaf(1))).unwrap();
        let err = m.bind(a, a, f, &[f, f]).unwrap_err();
        assert!(matches!(err, Error::DepthExceeded { depth: 2, bound: 1 }));
    }

    #[test]
    fn commutative_normalizer_sorts_leaves() {
        let m = commutative_theory(1);
        let unsorted = Term::node(0, vec![Term::Leaf(1), Term::Leaf(0)]);
        let sorted = Term::node(0, vec![Term::Leaf(0), Term::Leaf(1)]);
        assert_eq!(
            m.index_of(FinSet(2), &unsorted).unwrap(),
            m.index_of(FinSet(2), &sorted).unwrap()
        );
    }

    #[test]
    fn commutative_carrier_at_depth_one() {
        // 2 leaves + 3 unordered pairs.
        let m = commutative_theory(1);
        assert_eq!(m.carrier_len(FinSet(2)).unwrap(), 5);
    }

    #[test]
    fn equations_hold_after_normalization() {
        let m = commutative_theory(2);
        for (lhs, rhs) in m.equations() {
            assert_eq!(
                m.normalizer.apply(m.signature(), lhs),
                m.normalizer.apply(m.signature(), rhs)
            );
        }
    }

    #[test]
    fn unsound_normalizer_is_rejected() {
        // Swaps children on every visit; not idempotent.
        fn swap(_sig: &Signature, t: &Term) -> Term {
            match t {
                Term::Leaf(v) => Term::Leaf(*v),
                Term::Node { op, children } => {
                    let mut kids: Vec<Term> = children.iter().map(|c| swap(_sig, c)).collect();
                    kids.reverse();
                    Term::Node {
                        op: *op,
                        children: kids,
                    }
                }
            }
        }
        let err = TermMonad::quotient(
            flip_signature(),
            2,
            Vec::new(),
            Normalizer::Custom("swap", swap),
        )
        .unwrap_err();
        assert!(matches!(err, Error::NormalizerUnsound { .. }));
    }

    #[test]
    fn fail_theory_carrier() {
        // Leaves plus the single fail node.
        let m = fail_theory(2);
        assert_eq!(m.carrier_len(FinSet(2)).unwrap(), 3);
        assert_eq!(m.carrier_len(FinSet(0)).unwrap(), 1);
    }

    #[test]
    fn skip_grafts_onto_every_leaf() {
        let m = TermMonad::free(flip_signature(), 2);
        let a = FinSet(1);
        let t = m.index_of(a, &flip(Term::Leaf(0), Term::Leaf(0))).unwrap();
        let s = m.index_of(a, &flip(Term::Leaf(0), Term::Leaf(0))).unwrap();
        let grafted = crate::finmonad::skip(&m, a, a, t, s).unwrap();
        let expected = flip(
            flip(Term::Leaf(0), Term::Leaf(0)),
            flip(Term::Leaf(0), Term::Leaf(0)),
        );
        assert_eq!(m.term_at(a, grafted).unwrap(), expected);
    }

    #[test]
    fn bind_is_leaf_substitution_with_additive_depth() {
        // depth(t >>= u) <= depth(t) + max depth(u(a)), and equality of
        // computations is syntactic tree equality.
        let wide = TermMonad::free(flip_signature(), 3);
        let a = FinSet(2);
        let heads: Vec<usize> = (0..wide.carrier_len(a).unwrap())
            .filter(|&t| wide.term_at(a, t).unwrap().depth() <= 1)
            .collect();
        let tails: Vec<usize> = (0..wide.carrier_len(a).unwrap())
            .filter(|&t| wide.term_at(a, t).unwrap().depth() <= 2)
            .collect();
        for &t in &heads {
            let dt = wide.term_at(a, t).unwrap().depth();
            for &u0 in &tails {
                for &u1 in tails.iter().take(8) {
                    let bound = wide.bind(a, a, t, &[u0, u1]).unwrap();
                    let du = wide
                        .term_at(a, u0)
                        .unwrap()
                        .depth()
                        .max(wide.term_at(a, u1).unwrap().depth());
                    assert!(wide.term_at(a, bound).unwrap().depth() <= dt + du);
                }
            }
        }
    }

    #[test]
    fn enumeration_is_stable_and_by_depth() {
        let sig = flip_signature();
        let ts = enumerate_terms(&sig, 2, 2);
        assert_eq!(ts[0], Term::Leaf(0));
        assert_eq!(ts[1], Term::Leaf(1));
        // Depth never decreases along the enumeration.
        let mut last = 0;
        for t in &ts {
            assert!(t.depth() >= last);
            last = t.depth();
        }
        assert_eq!(ts.len(), 2 + 4 + 32);
    }
}
