//! Finite comodels: stateful runners for a signature-presented theory.
//!
//! A comodel is a state set with one table per generating operation; the
//! cointerpretation of an arbitrary term is forced from the tables. The
//! operational subset algebra collects the observable regions `[t -> a]`
//! and closes them under Boolean operations.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::finmonad::{enumerate_terms, FinMonad, Signature, Term};
use crate::report::LawReport;

/// A finite stateful runner. `coops[op][w] = (result, next)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Comodel {
    signature: Signature,
    states: usize,
    coops: Vec<Vec<(usize, usize)>>,
}

impl Comodel {
    pub fn new(
        signature: Signature,
        states: usize,
        coops: Vec<Vec<(usize, usize)>>,
    ) -> Result<Comodel> {
        if coops.len() != signature.len() {
            return Err(Error::InvalidSpec(format!(
                "{} cooperation tables for {} operations",
                coops.len(),
                signature.len()
            )));
        }
        for (op, table) in coops.iter().enumerate() {
            let arity = signature.arity(op);
            if states > 0 && arity == 0 {
                // The copower 0·W is empty; there is no table to give.
                return Err(Error::InvalidSpec(format!(
                    "`{}` never returns, so only the empty runner carries it",
                    signature.name(op)
                )));
            }
            if table.len() != states {
                return Err(Error::InvalidSpec(format!(
                    "table for `{}` has {} rows, expected {}",
                    signature.name(op),
                    table.len(),
                    states
                )));
            }
            for (w, &(result, next)) in table.iter().enumerate() {
                if result >= arity || next >= states {
                    return Err(Error::InvalidSpec(format!(
                        "table for `{}` at state {w} maps outside {arity}x{states}",
                        signature.name(op)
                    )));
                }
            }
        }
        Ok(Comodel {
            signature,
            states,
            coops,
        })
    }

    /// The empty runner, the only one for theories with a never-returning
    /// operation.
    pub fn empty(signature: Signature) -> Comodel {
        let coops = vec![Vec::new(); signature.len()];
        Comodel {
            signature,
            states: 0,
            coops,
        }
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn states(&self) -> usize {
        self.states
    }

    pub fn coop(&self, op: usize, w: usize) -> (usize, usize) {
        self.coops[op][w]
    }

    /// Run a term from a state: a leaf returns immediately, a node runs
    /// its operation and descends into the selected child.
    pub fn cointerpret(&self, t: &Term, w: usize) -> (usize, usize) {
        match t {
            Term::Leaf(v) => (*v, w),
            Term::Node { op, children } => {
                let (result, next) = self.coops[*op][w];
                self.cointerpret(&children[result], next)
            }
        }
    }

    /// Verify the supplied equations at every state.
    pub fn check(&self, equations: &[(Term, Term)]) -> LawReport {
        let mut report = LawReport::new(format!("comodel on {} states", self.states));
        for (lhs, rhs) in equations {
            for w in 0..self.states {
                report.checked += 1;
                if self.cointerpret(lhs, w) != self.cointerpret(rhs, w) {
                    report.violate(
                        "equation",
                        format!(
                            "{} = {} at state {w}",
                            lhs.display(&self.signature),
                            rhs.display(&self.signature)
                        ),
                    );
                }
            }
        }
        report
    }
}

/// Check that `h` is a runner morphism: on every state and generator the
/// results agree and `h` commutes with the transition, then re-check on a
/// sample of composite terms.
pub fn check_comodel_morphism(
    h: &[usize],
    source: &Comodel,
    target: &Comodel,
    term_sample: &[Term],
) -> LawReport {
    let mut report = LawReport::new("comodel morphism");
    if source.signature() != target.signature() {
        report.violate("signature", "source and target differ");
        return report;
    }
    if h.len() != source.states() {
        report.violate(
            "shape",
            format!("{} entries for {} states", h.len(), source.states()),
        );
        return report;
    }
    for w in 0..source.states() {
        for op in 0..source.signature().len() {
            report.checked += 1;
            let (r1, n1) = source.coop(op, w);
            let (r2, n2) = target.coop(op, h[w]);
            if r1 != r2 || h[n1] != n2 {
                report.violate(
                    "generator",
                    format!("`{}` at state {w}", source.signature().name(op)),
                );
            }
        }
        for t in term_sample {
            report.checked += 1;
            let (v1, n1) = source.cointerpret(t, w);
            let (v2, n2) = target.cointerpret(t, h[w]);
            if v1 != v2 || h[n1] != n2 {
                report.violate(
                    "term",
                    format!("{} at state {w}", t.display(source.signature())),
                );
            }
        }
    }
    report
}

/// A Boolean algebra of subsets of a finite ground set, stored by its atom
/// partition; the members are exactly the unions of blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetAlgebra {
    pub ground: usize,
    /// Labelled generating subsets `[t -> a]`.
    pub generators: Vec<(String, u64)>,
    /// Atom partition, sorted by least element.
    pub blocks: Vec<u64>,
}

impl SubsetAlgebra {
    pub fn ground_mask(&self) -> u64 {
        if self.ground == 64 {
            u64::MAX
        } else {
            (1u64 << self.ground) - 1
        }
    }

    pub fn contains(&self, set: u64) -> bool {
        self.blocks
            .iter()
            .all(|&b| (set & b) == 0 || (set & b) == b)
            && (set & !self.ground_mask()) == 0
    }

    pub fn member_count(&self) -> u128 {
        1u128 << self.blocks.len()
    }

    /// Every member, smallest first. Only for small algebras.
    pub fn members(&self) -> Vec<u64> {
        let mut all = Vec::with_capacity(1 << self.blocks.len());
        for choice in 0..(1u64 << self.blocks.len()) {
            let mut set = 0u64;
            for (i, &b) in self.blocks.iter().enumerate() {
                if choice >> i & 1 == 1 {
                    set |= b;
                }
            }
            all.push(set);
        }
        all.sort_unstable();
        all.dedup();
        all
    }

    /// Closure sanity: generators are members, and members are closed
    /// under complement, meet and join.
    pub fn verify_closure(&self) -> LawReport {
        let mut report = LawReport::new("subset algebra closure");
        let ground = self.ground_mask();
        for (label, g) in &self.generators {
            report.checked += 1;
            if !self.contains(*g) {
                report.violate("generator membership", label.clone());
            }
        }
        let members = self.members();
        for &x in &members {
            report.checked += 1;
            if !self.contains(ground & !x) {
                report.violate("complement", format!("{x:b}"));
            }
            for &y in &members {
                report.checked += 2;
                if !self.contains(x & y) || !self.contains(x | y) {
                    report.violate("meet/join", format!("{x:b},{y:b}"));
                }
            }
        }
        if !self.contains(0) || !self.contains(ground) {
            report.violate("bounds", "empty set or ground missing");
        }
        report
    }

    /// Whether `other` refines this algebra (every member here is a member
    /// there).
    pub fn coarser_than(&self, other: &SubsetAlgebra) -> bool {
        self.ground == other.ground
            && self.blocks.iter().all(|&b| {
                // b must be a union of other's blocks
                other.blocks.iter().all(|&c| (b & c) == 0 || (b & c) == c)
            })
    }
}

/// The algebra of observable regions to the given term depth: for every
/// term `t` over two leaf values, the region where running `t` returns 1.
/// Two leaves suffice because `[t -> a]` equals `[t' -> 1]` for the binary
/// term `t'` that post-composes `t` with the indicator of `a`, and that
/// substitution does not increase depth.
pub fn operational_algebra(w: &Comodel, depth: usize) -> SubsetAlgebra {
    let mut generators: Vec<(String, u64)> = Vec::new();
    let mut seen = BTreeMap::new();
    for t in enumerate_terms(w.signature(), 2, depth) {
        let mut region = 0u64;
        for state in 0..w.states() {
            if w.cointerpret(&t, state).0 == 1 {
                region |= 1 << state;
            }
        }
        if seen.insert(region, ()).is_none() {
            generators.push((format!("[{} -> 1]", t.display(w.signature())), region));
        }
    }
    // Atom partition: states are equivalent when no generator separates
    // them. Boolean closure of the generators is all unions of blocks.
    let mut key_of: Vec<Vec<bool>> = vec![Vec::new(); w.states()];
    for (_, g) in &generators {
        for (state, key) in key_of.iter_mut().enumerate() {
            key.push(g >> state & 1 == 1);
        }
    }
    let mut blocks: Vec<u64> = Vec::new();
    let mut block_keys: Vec<Vec<bool>> = Vec::new();
    for state in 0..w.states() {
        if let Some(i) = block_keys.iter().position(|k| *k == key_of[state]) {
            blocks[i] |= 1 << state;
        } else {
            block_keys.push(key_of[state].clone());
            blocks.push(1 << state);
        }
    }
    blocks.sort_by_key(|b| b.trailing_zeros());
    SubsetAlgebra {
        ground: w.states(),
        generators,
        blocks,
    }
}

/// The canonical runner of a built-in monad (state, distributions);
/// `Unsupported` otherwise.
pub fn canonical_comodel(m: &dyn FinMonad) -> Result<Comodel> {
    m.canonical_comodel()
}

/// All comodels of the given size satisfying the equations.
pub fn enumerate_comodels(
    sig: &Signature,
    equations: &[(Term, Term)],
    states: usize,
    cap: u128,
) -> Result<Vec<Comodel>> {
    if states == 0 {
        let empty = Comodel::empty(sig.clone());
        return Ok(if empty.check(equations).passed() {
            vec![empty]
        } else {
            vec![]
        });
    }
    // One table per op: (arity * states)^states choices.
    let mut total: u128 = 1;
    for op in 0..sig.len() {
        let per_op = (sig.arity(op) as u128 * states as u128).pow(states as u32);
        total = total.saturating_mul(per_op);
        if total > cap {
            return Err(Error::SearchSpaceTooLarge { size: total, cap });
        }
        if per_op == 0 {
            return Ok(Vec::new());
        }
    }
    let mut found = Vec::new();
    let mut choice = vec![0u128; sig.len()];
    'outer: loop {
        let mut coops = Vec::with_capacity(sig.len());
        for op in 0..sig.len() {
            let base = (sig.arity(op) * states) as u128;
            let mut table = Vec::with_capacity(states);
            let mut code = choice[op];
            for _ in 0..states {
                let digit = (code % base) as usize;
                table.push((digit / states, digit % states));
                code /= base;
            }
            coops.push(table);
        }
        let candidate = Comodel::new(sig.clone(), states, coops)?;
        if candidate.check(equations).passed() {
            found.push(candidate);
        }
        for op in 0..sig.len() {
            let base = (sig.arity(op) as u128 * states as u128).pow(states as u32);
            choice[op] += 1;
            if choice[op] < base {
                continue 'outer;
            }
            choice[op] = 0;
        }
        break;
    }
    Ok(found)
}
