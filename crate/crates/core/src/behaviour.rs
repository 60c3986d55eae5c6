//! Behaviours, trace equivalence, and the behaviour category.
//!
//! A [`Runner`] pairs a monad with a finite state set on which its
//! computations can be run. States are collapsed to *behaviours* by
//! partition refinement; unary computations are collapsed to *trace
//! classes* at each behaviour; behaviours and trace classes form a finite
//! category with composition `[m];[n] = [m ⊳ n]`.
//!
//! Trace equivalence for a general theory is computed as a bounded
//! closure: the least equivalence identifying `t >>= u` with
//! `t ⊳ u(value of t here)`, seeded over all computations up to an arity
//! bound. Every answer is tagged with the bound actually enumerated. For
//! free theories the closure is bypassed: two unary terms are equivalent
//! exactly when they traverse the same operation sequence, which is exact
//! at every bound.

use std::collections::BTreeMap;

use crate::comodel::{operational_algebra, Comodel, SubsetAlgebra};
use crate::error::{Error, Result};
use crate::finmonad::{skip, FinMonad, Term, TermMonad};
use crate::finset::{function_count, functions, FinSet};
use crate::report::LawReport;
use crate::topcat::FinCat;

/// A monad together with a way to run its computations statefully.
pub trait Runner {
    fn monad(&self) -> &dyn FinMonad;

    fn state_count(&self) -> usize;

    /// Run computation `t ∈ T a` at state `w`, producing the returned
    /// value and the next state.
    fn run(&self, a: FinSet, t: usize, w: usize) -> Result<(usize, usize)>;

    fn state_label(&self, w: usize) -> String {
        format!("w{w}")
    }

    /// States up to observable behaviour, as a block id per state.
    /// The default refines by outputs of binary computations and then by
    /// successor blocks under unary computations until stable.
    fn behaviour_partition(&self) -> Result<Vec<usize>> {
        refine_by_carriers(self.as_runner())
    }

    /// Term-comodel view, when this runner is a term comodel over a free
    /// theory; lets trace computations use exact operation sequences.
    fn free_term_view(&self) -> Option<(&TermMonad, &Comodel)> {
        None
    }

    fn as_runner(&self) -> &dyn Runner;
}

impl Runner for crate::finmonad::StateMonad {
    fn monad(&self) -> &dyn FinMonad {
        self
    }

    fn state_count(&self) -> usize {
        self.states()
    }

    fn run(&self, a: FinSet, t: usize, w: usize) -> Result<(usize, usize)> {
        if t >= self.carrier_len(a)? {
            return Err(Error::OutOfRange {
                index: t,
                what: format!("{}{}", self.name(), a),
            });
        }
        Ok(self.eval(a, t, w))
    }

    fn state_label(&self, w: usize) -> String {
        format!("s{w}")
    }

    fn as_runner(&self) -> &dyn Runner {
        self
    }
}

/// A table comodel running a term monad over the same signature.
pub struct TermRunner<'a> {
    pub monad: &'a TermMonad,
    pub comodel: &'a Comodel,
}

impl<'a> TermRunner<'a> {
    pub fn new(monad: &'a TermMonad, comodel: &'a Comodel) -> Result<TermRunner<'a>> {
        if monad.signature() != comodel.signature() {
            return Err(Error::InvalidSpec(
                "runner and theory signatures differ".into(),
            ));
        }
        Ok(TermRunner { monad, comodel })
    }
}

impl Runner for TermRunner<'_> {
    fn monad(&self) -> &dyn FinMonad {
        self.monad
    }

    fn state_count(&self) -> usize {
        self.comodel.states()
    }

    fn run(&self, a: FinSet, t: usize, w: usize) -> Result<(usize, usize)> {
        let term = self.monad.term_at(a, t)?;
        Ok(self.comodel.cointerpret(&term, w))
    }

    fn behaviour_partition(&self) -> Result<Vec<usize>> {
        Ok(minimize(self.comodel).block_of)
    }

    fn free_term_view(&self) -> Option<(&TermMonad, &Comodel)> {
        if self.monad.is_free() {
            Some((self.monad, self.comodel))
        } else {
            None
        }
    }

    fn as_runner(&self) -> &dyn Runner {
        self
    }
}

fn refine_by_carriers(runner: &dyn Runner) -> Result<Vec<usize>> {
    let states = runner.state_count();
    if states == 0 {
        return Ok(Vec::new());
    }
    let two = FinSet(2);
    let one = FinSet(1);
    let t2 = runner.monad().carrier_len(two)?;
    let t1 = runner.monad().carrier_len(one)?;
    // Initial split: outputs of every binary computation.
    let mut keys: Vec<Vec<usize>> = vec![Vec::with_capacity(t2); states];
    for t in 0..t2 {
        for (w, key) in keys.iter_mut().enumerate() {
            key.push(runner.run(two, t, w)?.0);
        }
    }
    let mut block_of = blocks_from_keys(&keys);
    // Refine by successor blocks under unary computations.
    loop {
        let mut keys: Vec<Vec<usize>> = vec![Vec::with_capacity(t1 + 1); states];
        for (w, key) in keys.iter_mut().enumerate() {
            key.push(block_of[w]);
        }
        for m in 0..t1 {
            for (w, key) in keys.iter_mut().enumerate() {
                key.push(block_of[runner.run(one, m, w)?.1]);
            }
        }
        let refined = blocks_from_keys(&keys);
        if refined == block_of {
            return Ok(block_of);
        }
        block_of = refined;
    }
}

fn blocks_from_keys(keys: &[Vec<usize>]) -> Vec<usize> {
    let mut ids: Vec<usize> = Vec::with_capacity(keys.len());
    let mut seen: Vec<&Vec<usize>> = Vec::new();
    for key in keys {
        if let Some(i) = seen.iter().position(|k| *k == key) {
            ids.push(i);
        } else {
            seen.push(key);
            ids.push(seen.len() - 1);
        }
    }
    ids
}

/// Result of comodel minimization.
#[derive(Debug, Clone)]
pub struct Minimization {
    pub block_of: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
    pub quotient: Comodel,
    /// The projection, as a state map onto the quotient (= `block_of`).
    pub projection: Vec<usize>,
}

/// Partition refinement on a table comodel: split by generator outputs,
/// refine by successor blocks until stable, then form the quotient runner.
pub fn minimize(w: &Comodel) -> Minimization {
    let states = w.states();
    let ops = w.signature().len();
    let mut keys: Vec<Vec<usize>> = vec![Vec::with_capacity(ops); states];
    for op in 0..ops {
        for (state, key) in keys.iter_mut().enumerate() {
            key.push(w.coop(op, state).0);
        }
    }
    let mut block_of = blocks_from_keys(&keys);
    loop {
        let mut keys: Vec<Vec<usize>> = vec![Vec::with_capacity(ops + 1); states];
        for (state, key) in keys.iter_mut().enumerate() {
            key.push(block_of[state]);
        }
        for op in 0..ops {
            for (state, key) in keys.iter_mut().enumerate() {
                key.push(block_of[w.coop(op, state).1]);
            }
        }
        let refined = blocks_from_keys(&keys);
        if refined == block_of {
            break;
        }
        block_of = refined;
    }
    let block_count = block_of.iter().max().map_or(0, |&m| m + 1);
    let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); block_count];
    for (state, &b) in block_of.iter().enumerate() {
        blocks[b].push(state);
    }
    let coops = (0..ops)
        .map(|op| {
            blocks
                .iter()
                .map(|members| {
                    let (result, next) = w.coop(op, members[0]);
                    (result, block_of[next])
                })
                .collect()
        })
        .collect();
    let quotient = Comodel::new(w.signature().clone(), block_count, coops)
        .expect("quotient tables are total by construction");
    Minimization {
        projection: block_of.clone(),
        block_of,
        blocks,
        quotient,
    }
}

/// States of a runner grouped into behaviours.
pub struct Behaviours<'a> {
    pub runner: &'a dyn Runner,
    pub block_of: Vec<usize>,
    pub blocks: Vec<Vec<usize>>,
}

impl<'a> Behaviours<'a> {
    pub fn of(runner: &'a dyn Runner) -> Result<Behaviours<'a>> {
        let block_of = runner.behaviour_partition()?;
        let count = block_of.iter().max().map_or(0, |&m| m + 1);
        let mut blocks: Vec<Vec<usize>> = vec![Vec::new(); count];
        for (state, &b) in block_of.iter().enumerate() {
            blocks[b].push(state);
        }
        Ok(Behaviours {
            runner,
            block_of,
            blocks,
        })
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn rep(&self, block: usize) -> usize {
        self.blocks[block][0]
    }

    /// Run a computation at a behaviour: evaluate on the representative
    /// state and land in the next behaviour.
    pub fn run(&self, a: FinSet, t: usize, block: usize) -> Result<(usize, usize)> {
        let (value, next) = self.runner.run(a, t, self.rep(block))?;
        Ok((value, self.block_of[next]))
    }

    /// Output row of every binary computation; equal rows mean equal
    /// behaviours. Also used as a stable label.
    pub fn observables(&self, block: usize) -> Result<Vec<usize>> {
        let two = FinSet(2);
        let t2 = self.runner.monad().carrier_len(two)?;
        (0..t2).map(|t| Ok(self.run(two, t, block)?.0)).collect()
    }
}

/// The operation sequence traversed running `m` down at a state; only
/// defined for free theories, where it is a complete trace invariant.
pub fn trace_free(runner: &TermRunner<'_>, state: usize, m: &Term) -> Result<Vec<String>> {
    if !runner.monad.is_free() {
        return Err(Error::TheoryNotFree {
            monad: runner.monad.name(),
        });
    }
    let mut ops = Vec::new();
    let mut term = m.clone();
    let mut here = state;
    loop {
        match term {
            Term::Leaf(_) => return Ok(ops),
            Term::Node { op, children } => {
                ops.push(runner.comodel.signature().name(op).to_string());
                let (result, next) = runner.comodel.coop(op, here);
                term = children[result].clone();
                here = next;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct TraceConfig {
    /// Largest arity whose computations seed the closure; `None` means
    /// `|T1|`, the size of the unary carrier.
    pub max_arity: Option<usize>,
    /// Cap on seed pairs per (behaviour, arity); arities whose seed space
    /// exceeds it are not enumerated and the achieved bound is reported.
    pub seed_budget: u64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            max_arity: None,
            seed_budget: 1 << 21,
        }
    }
}

/// Trace classes of the unary carrier at one state.
#[derive(Debug, Clone)]
pub struct TraceTable {
    pub class_of: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
    /// Largest arity fully enumerated while seeding; `usize::MAX` when the
    /// classes are exact (free-theory traces).
    pub arity_used: usize,
    pub exact: bool,
}

impl TraceTable {
    fn from_class_of(mut class_of: Vec<usize>, arity_used: usize, exact: bool) -> TraceTable {
        // Renumber classes by least member, for deterministic output.
        let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
        for m in 0..class_of.len() {
            let c = class_of[m];
            let next_id = remap.len();
            remap.entry(c).or_insert(next_id);
        }
        for c in class_of.iter_mut() {
            *c = remap[c];
        }
        let count = remap.len();
        let mut classes = vec![Vec::new(); count];
        for (m, &c) in class_of.iter().enumerate() {
            classes[c].push(m);
        }
        TraceTable {
            class_of,
            classes,
            arity_used,
            exact,
        }
    }

    pub fn rep(&self, class: usize) -> usize {
        self.classes[class][0]
    }

    pub fn equivalent(&self, m: usize, n: usize) -> bool {
        self.class_of[m] == self.class_of[n]
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let root = self.find(self.0[x]);
            self.0[x] = root;
        }
        self.0[x]
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // Smaller index wins, keeping representatives enumeration-least.
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.0[hi] = lo;
        lo != hi
    }
}

/// Trace classes of `T1` at state `w`, by bounded closure (or exactly,
/// via operation sequences, when the runner is a free-theory comodel).
pub fn trace_classes(runner: &dyn Runner, w: usize, cfg: &TraceConfig) -> Result<TraceTable> {
    let one = FinSet(1);
    let t1 = runner.monad().carrier_len(one)?;

    if let Some((monad, comodel)) = runner.free_term_view() {
        let mut strings: Vec<Vec<String>> = Vec::with_capacity(t1);
        for m in 0..t1 {
            let term = monad.term_at(one, m)?;
            strings.push({
                let tr = TermRunner { monad, comodel };
                trace_free(&tr, w, &term)?
            });
        }
        let mut class_of = vec![0; t1];
        let mut seen: Vec<&Vec<String>> = Vec::new();
        for m in 0..t1 {
            if let Some(i) = seen.iter().position(|s| **s == strings[m]) {
                class_of[m] = i;
            } else {
                seen.push(&strings[m]);
                class_of[m] = seen.len() - 1;
            }
        }
        return Ok(TraceTable::from_class_of(class_of, usize::MAX, true));
    }

    let max_arity = cfg.max_arity.unwrap_or(t1).max(1);
    let mut uf = UnionFind::new(t1);
    let mut arity_used = 0;
    for arity in 1..=max_arity {
        let a = FinSet(arity);
        let ta = runner.monad().carrier_len(a)?;
        let planned = ta as u128 * function_count(arity, t1);
        if planned > cfg.seed_budget as u128 {
            break;
        }
        for t in 0..ta {
            let here = runner.run(a, t, w)?.0;
            for u in functions(arity, t1) {
                let lhs = runner.monad().bind(a, one, t, &u);
                let rhs = skip(runner.monad(), a, one, t, u[here]);
                match (lhs, rhs) {
                    (Ok(l), Ok(r)) => {
                        uf.union(l, r);
                    }
                    (Err(Error::DepthExceeded { .. }), _)
                    | (_, Err(Error::DepthExceeded { .. }))
                    | (Err(Error::Truncated(_)), _)
                    | (_, Err(Error::Truncated(_))) => {}
                    (Err(e), _) | (_, Err(e)) => return Err(e),
                }
            }
        }
        arity_used = arity;
    }
    let class_of: Vec<usize> = (0..t1).map(|m| uf.find(m)).collect();
    Ok(TraceTable::from_class_of(class_of, arity_used, false))
}

/// Are `m, n ∈ T1` trace-equivalent at the behaviour of state `w`?
/// The answer is exact for free theories and closure-at-bound otherwise.
pub fn trace_equiv(
    runner: &dyn Runner,
    w: usize,
    m: usize,
    n: usize,
    cfg: &TraceConfig,
) -> Result<bool> {
    Ok(trace_classes(runner, w, cfg)?.equivalent(m, n))
}

/// One morphism of a behaviour category.
#[derive(Debug, Clone)]
pub struct TraceClassInfo {
    pub object: usize,
    /// Enumeration-least representative in `T1`.
    pub rep: usize,
    pub members: Vec<usize>,
    pub label: String,
}

/// The finite image of the behaviour category over a runner: objects are
/// behaviours, morphisms are trace classes, and the object space carries
/// its algebra of observable regions.
#[derive(Clone)]
pub struct BehaviourCategory {
    pub cat: FinCat,
    pub object_reps: Vec<usize>,
    pub object_blocks: Vec<Vec<usize>>,
    pub object_labels: Vec<String>,
    pub morphisms: Vec<TraceClassInfo>,
    /// `t1_class[object][m]` = the morphism (global index) that the unary
    /// computation `m` falls into at that object.
    pub t1_class: Vec<Vec<usize>>,
    /// Behaviour block of every runner state.
    pub block_of: Vec<usize>,
    pub object_algebra: Option<SubsetAlgebra>,
    pub law_report: LawReport,
    /// Arity bound achieved per object (`usize::MAX` = exact traces).
    pub arity_used: Vec<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct BehaviourCategoryConfig {
    pub trace: TraceConfig,
    /// Depth for the operational algebra attached to term runners.
    pub algebra_depth: Option<usize>,
}

/// Build the behaviour category of a runner.
///
/// Composition that leaves a bounded term universe is recorded as
/// truncated (and surfaced in the law report) rather than silently
/// repaired; a genuinely ill-defined composite or target is a hard error.
pub fn behaviour_category(
    runner: &dyn Runner,
    cfg: &BehaviourCategoryConfig,
) -> Result<BehaviourCategory> {
    let behaviours = Behaviours::of(runner)?;
    let one = FinSet(1);
    let monad = runner.monad();

    let mut object_reps = Vec::new();
    let mut object_labels = Vec::new();
    let mut tables = Vec::new();
    for block in 0..behaviours.len() {
        object_reps.push(behaviours.rep(block));
        let obs = behaviours.observables(block)?;
        let key: Vec<String> = obs.iter().take(8).map(|v| v.to_string()).collect();
        object_labels.push(format!(
            "{}|{}",
            runner.state_label(behaviours.rep(block)),
            key.join("")
        ));
        tables.push(trace_classes(runner, behaviours.rep(block), &cfg.trace)?);
    }

    // Morphisms, object-major; classes within an object ordered by least
    // representative (the class id order of TraceTable).
    let mut morphisms = Vec::new();
    let mut src = Vec::new();
    let mut tgt = Vec::new();
    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (object, table) in tables.iter().enumerate() {
        for (class, members) in table.classes.iter().enumerate() {
            let rep = members[0];
            // Target must not depend on the member or on the state chosen
            // inside the block.
            let mut target = None;
            for &m in members {
                for &state in &behaviours.blocks[object] {
                    let next = behaviours.block_of[runner.run(one, m, state)?.1];
                    match target {
                        None => target = Some(next),
                        Some(t) if t == next => {}
                        Some(t) => {
                            return Err(Error::CategoryLawViolation(format!(
                                "class of {} at object {object} has split targets {t} vs {next}",
                                monad.describe(one, rep)
                            )))
                        }
                    }
                }
            }
            let target = target.expect("classes are nonempty");
            index.insert((object, class), src.len());
            src.push(object);
            tgt.push(target);
            // Free theories also carry the literal trace string.
            let label = match runner.free_term_view() {
                Some((term_monad, comodel)) => {
                    let tr = TermRunner {
                        monad: term_monad,
                        comodel,
                    };
                    let term = term_monad.term_at(one, rep)?;
                    let trace = trace_free(&tr, behaviours.rep(object), &term)?;
                    format!("{} ({})", monad.describe(one, rep), trace.join("."))
                }
                None => monad.describe(one, rep),
            };
            morphisms.push(TraceClassInfo {
                object,
                rep,
                members: members.clone(),
                label,
            });
        }
    }

    let mut id = Vec::new();
    for (object, table) in tables.iter().enumerate() {
        let ret = monad.ret(one, 0)?;
        id.push(index[&(object, table.class_of[ret])]);
    }

    let mut report = LawReport::new("behaviour category");
    let mut comp = BTreeMap::new();
    let mut truncated = std::collections::BTreeSet::new();
    for f in 0..src.len() {
        for g in 0..src.len() {
            if tgt[f] != src[g] {
                continue;
            }
            let object = src[f];
            // Composite on representatives, then well-definedness across
            // all member pairs.
            let mut composite: Option<usize> = None;
            let mut escaped = false;
            for &m in &morphisms[f].members {
                for &n in &morphisms[g].members {
                    match skip(monad, one, one, m, n) {
                        Ok(mn) => {
                            let class = tables[object].class_of[mn];
                            match composite {
                                None => composite = Some(class),
                                Some(c) if c == class => {}
                                Some(c) => {
                                    return Err(Error::CategoryLawViolation(format!(
                                        "composite of classes {f};{g} depends on representatives \
                                         ({c} vs {class}); closure bounds too small"
                                    )))
                                }
                            }
                        }
                        Err(Error::DepthExceeded { .. }) | Err(Error::Truncated(_)) => {
                            escaped = true
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
            match composite {
                Some(class) => {
                    comp.insert((f, g), index[&(object, class)]);
                }
                None => {
                    debug_assert!(escaped);
                    truncated.insert((f, g));
                }
            }
            if escaped {
                report.skipped += 1;
            }
        }
    }
    if !truncated.is_empty() {
        report.note(format!(
            "{} composites leave the bounded universe and are recorded as truncated",
            truncated.len()
        ));
    }

    let mut cat = FinCat::new(behaviours.len(), src, tgt, id, comp)?;
    cat.truncated = truncated;
    report.absorb(cat.check());
    if !report.passed() {
        return Err(Error::CategoryLawViolation(
            report.violations[0].witness.to_string(),
        ));
    }

    let object_algebra = runner.free_term_view().map(|(monad, comodel)| {
        operational_algebra(comodel, cfg.algebra_depth.unwrap_or(monad.depth_bound()))
    });

    let t1_class = tables
        .iter()
        .enumerate()
        .map(|(object, table)| {
            table
                .class_of
                .iter()
                .map(|&class| index[&(object, class)])
                .collect()
        })
        .collect();

    Ok(BehaviourCategory {
        cat,
        object_reps,
        object_blocks: behaviours.blocks,
        object_labels,
        morphisms,
        t1_class,
        block_of: behaviours.block_of,
        object_algebra,
        law_report: report,
        arity_used: tables.iter().map(|t| t.arity_used).collect(),
    })
}

impl BehaviourCategory {
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph behaviour {\n  rankdir=LR;\n");
        for (i, label) in self.object_labels.iter().enumerate() {
            s.push_str(&format!("  b{i} [label=\"{label}\"];\n"));
        }
        for (f, info) in self.morphisms.iter().enumerate() {
            s.push_str(&format!(
                "  b{} -> b{} [label=\"{}\"];\n",
                self.cat.src[f],
                self.cat.tgt[f],
                info.label.replace('"', "'")
            ));
        }
        s.push_str("}\n");
        s
    }
}
