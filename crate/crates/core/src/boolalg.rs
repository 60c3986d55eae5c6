//! Finite Boolean algebras, B-sets, Boolean powers, étale spaces, germs,
//! the distributions monad, and the sheaf of transitions.
//!
//! A finite Boolean algebra is a set of atoms; elements are atom subsets
//! stored as bitmasks. Every partition of a finite algebra is finite, so
//! the partition-indexed ("switch") operations of a B-set range over the
//! set partitions of the atoms and no further topology bookkeeping is
//! needed.
//!
//! A B-set carries one if-then-else operation per algebra element:
//! `b(x, y)` is the amalgam of `x` on `b` and `y` on its complement. The
//! induced relations `x ≡_b y iff b(x, y) = y` ("x and y agree on b")
//! recover the action, and most constructions here are phrased through
//! them: germs at an atom are `≡_atom`-classes, étale opens are the
//! relation-preserving maps into the algebra itself, and congruences are
//! equivalences closed under the switch operations.

use std::collections::BTreeMap;

use crate::behaviour::{trace_classes, Behaviours, Runner, TraceConfig};
use crate::error::{Error, Result};
use crate::finmonad::FinMonad;
use crate::finset::{function_count, functions, FinSet};
use crate::report::LawReport;

/// An algebra element: a bitmask over atoms.
pub type BElem = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FinBoolAlg {
    atoms: usize,
}

impl FinBoolAlg {
    pub fn new(atoms: usize) -> FinBoolAlg {
        assert!(atoms <= 24, "atom count out of desk scale");
        FinBoolAlg { atoms }
    }

    pub fn atoms(&self) -> usize {
        self.atoms
    }

    /// `⊥ = ⊤` exactly in the degenerate (atomless) algebra.
    pub fn is_degenerate(&self) -> bool {
        self.atoms == 0
    }

    pub fn top(&self) -> BElem {
        ((1u64 << self.atoms) - 1) as BElem
    }

    pub fn bot(&self) -> BElem {
        0
    }

    pub fn atom(&self, i: usize) -> BElem {
        1 << i
    }

    pub fn complement(&self, b: BElem) -> BElem {
        self.top() & !b
    }

    pub fn leq(&self, a: BElem, b: BElem) -> bool {
        a & b == a
    }

    pub fn elements(&self) -> impl Iterator<Item = BElem> {
        0..=self.top()
    }

    pub fn atoms_in(&self, b: BElem) -> impl Iterator<Item = usize> + '_ {
        (0..self.atoms).filter(move |&i| b >> i & 1 == 1)
    }

    pub fn is_partition(&self, blocks: &[BElem]) -> bool {
        let mut seen: BElem = 0;
        for &b in blocks {
            if b == 0 || seen & b != 0 {
                return false;
            }
            seen |= b;
        }
        seen == self.top()
    }

    /// Every partition of the algebra, i.e. every set partition of the
    /// atoms. Blocks are ordered by least atom; the list is deterministic.
    pub fn partitions(&self) -> Vec<Vec<BElem>> {
        let mut out = Vec::new();
        let mut blocks: Vec<BElem> = Vec::new();
        fn go(alg: &FinBoolAlg, atom: usize, blocks: &mut Vec<BElem>, out: &mut Vec<Vec<BElem>>) {
            if atom == alg.atoms() {
                if !blocks.is_empty() {
                    out.push(blocks.clone());
                }
                return;
            }
            for i in 0..blocks.len() {
                blocks[i] |= alg.atom(atom);
                go(alg, atom + 1, blocks, out);
                blocks[i] &= !alg.atom(atom);
            }
            blocks.push(alg.atom(atom));
            go(alg, atom + 1, blocks, out);
            blocks.pop();
        }
        go(self, 0, &mut blocks, &mut out);
        out
    }

    pub fn display(&self, b: BElem) -> String {
        if b == 0 {
            return "⊥".into();
        }
        if b == self.top() {
            return "⊤".into();
        }
        let atoms: Vec<String> = self.atoms_in(b).map(|i| format!("p{i}")).collect();
        atoms.join("+")
    }
}

/// A finite set with an if-then-else action of a finite Boolean algebra.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BSet {
    pub algebra: FinBoolAlg,
    pub carrier: usize,
    /// `table[b][x * carrier + y] = b(x, y)`.
    table: Vec<Vec<usize>>,
}

impl BSet {
    pub fn from_action(
        algebra: FinBoolAlg,
        carrier: usize,
        act: impl Fn(BElem, usize, usize) -> usize,
    ) -> Result<BSet> {
        let elements = 1usize << algebra.atoms();
        let cells = (elements as u128) * (carrier as u128) * (carrier as u128);
        if cells > 1 << 26 {
            return Err(Error::SearchSpaceTooLarge {
                size: cells,
                cap: 1 << 26,
            });
        }
        let mut table = Vec::with_capacity(elements);
        for b in algebra.elements() {
            let mut row = Vec::with_capacity(carrier * carrier);
            for x in 0..carrier {
                for y in 0..carrier {
                    let z = act(b, x, y);
                    if z >= carrier {
                        return Err(Error::OutOfRange {
                            index: z,
                            what: "B-set action".into(),
                        });
                    }
                    row.push(z);
                }
            }
            table.push(row);
        }
        Ok(BSet {
            algebra,
            carrier,
            table,
        })
    }

    pub fn act(&self, b: BElem, x: usize, y: usize) -> usize {
        self.table[b as usize][x * self.carrier + y]
    }

    /// `x ≡_b y`: x and y agree on `b`.
    pub fn equiv(&self, b: BElem, x: usize, y: usize) -> bool {
        self.act(b, x, y) == y
    }

    /// Amalgamate a family along a partition: the element agreeing with
    /// `family[i]` on `blocks[i]` for every i. Uniqueness of the result is
    /// one of the checked axioms, not an assumption here.
    pub fn partition_apply(&self, blocks: &[BElem], family: &[usize]) -> usize {
        debug_assert_eq!(blocks.len(), family.len());
        debug_assert!(!family.is_empty());
        let mut z = family[family.len() - 1];
        for i in (0..family.len() - 1).rev() {
            z = self.act(blocks[i], family[i], z);
        }
        z
    }

    /// The quotient by a congruence; the action descends classwise.
    pub fn quotient(&self, congruence: &BSetCongruence) -> Result<BSet> {
        let classes = congruence.classes.len();
        BSet::from_action(self.algebra, classes, |b, cx, cy| {
            congruence.class_of[self.act(b, congruence.classes[cx][0], congruence.classes[cy][0])]
        })
    }
}

/// The free B-set on `generators` generators: functions from generators
/// to the algebra with pairwise-disjoint values joining to ⊤ — stored as
/// atom labelings (each atom picks the generator whose value covers it).
#[derive(Debug, Clone)]
pub struct FreeBSet {
    pub bset: BSet,
    pub generators: usize,
}

pub fn free_bset(generators: usize, algebra: FinBoolAlg) -> Result<FreeBSet> {
    if algebra.is_degenerate() {
        return Err(Error::InvalidSpec(
            "free B-set over the degenerate algebra".into(),
        ));
    }
    let carrier_size = function_count(algebra.atoms(), generators);
    if carrier_size > 1 << 13 {
        return Err(Error::SearchSpaceTooLarge {
            size: carrier_size,
            cap: 1 << 13,
        });
    }
    let carrier = carrier_size as usize;
    let atoms = algebra.atoms();
    let label =
        move |h: usize, atom: usize| -> usize { (h / generators.pow(atom as u32)) % generators };
    let bset = BSet::from_action(algebra, carrier, |b, x, y| {
        let mut code = 0;
        for atom in (0..atoms).rev() {
            let lab = if b >> atom & 1 == 1 {
                label(x, atom)
            } else {
                label(y, atom)
            };
            code = code * generators + lab;
        }
        code
    })?;
    Ok(FreeBSet { bset, generators })
}

impl FreeBSet {
    /// The generator labeling atom `atom` in element `h`.
    pub fn label(&self, h: usize, atom: usize) -> usize {
        (h / self.generators.pow(atom as u32)) % self.generators
    }

    pub fn encode(&self, labels: impl Fn(usize) -> usize) -> usize {
        let mut code = 0;
        for atom in (0..self.bset.algebra.atoms()).rev() {
            let lab = labels(atom);
            debug_assert!(lab < self.generators);
            code = code * self.generators + lab;
        }
        code
    }

    /// The unit: generator `a` as the labeling constant at `a`, i.e. the
    /// function with `h(a) = ⊤` and `h(a') = ⊥` elsewhere.
    pub fn delta(&self, a: usize) -> usize {
        self.encode(|_| a)
    }

    /// `h(a)`: the join of atoms labeled `a`.
    pub fn value(&self, h: usize, a: usize) -> BElem {
        let mut mask = 0;
        for atom in 0..self.bset.algebra.atoms() {
            if self.label(h, atom) == a {
                mask |= self.bset.algebra.atom(atom);
            }
        }
        mask
    }

    pub fn display(&self, h: usize) -> String {
        let labels: Vec<String> = (0..self.bset.algebra.atoms())
            .map(|p| self.label(h, p).to_string())
            .collect();
        format!("⟨{}⟩", labels.join(","))
    }
}

/// The algebra acting on itself: `u ≡_b v iff b ∧ u = b ∧ v`, with the
/// action patching `u` over `b` into `v` elsewhere.
pub fn algebra_as_bset(algebra: FinBoolAlg) -> Result<BSet> {
    BSet::from_action(algebra, 1 << algebra.atoms(), |b, u, v| {
        ((b & u as BElem) | (algebra.complement(b) & v as BElem)) as usize
    })
}

#[derive(Debug, Clone, Copy)]
pub struct BSetCheckConfig {
    /// Cap per axiom; instances beyond it are strided and the report is
    /// flagged partial.
    pub cap: u64,
}

impl Default for BSetCheckConfig {
    fn default() -> Self {
        BSetCheckConfig { cap: 1 << 22 }
    }
}

/// Exhaustively verify the six if-then-else axioms, the three switch
/// axioms, and the induced-relation laws (monotonicity, rigidity at ⊤,
/// triviality at ⊥, unique amalgams).
pub fn check_bset(x: &BSet, cfg: &BSetCheckConfig) -> LawReport {
    let mut report = LawReport::new(format!(
        "B-set axioms (carrier {}, {} atoms)",
        x.carrier,
        x.algebra.atoms()
    ));
    let alg = x.algebra;
    let n = x.carrier;
    let top = alg.top();

    for b in alg.elements() {
        for xx in 0..n {
            report.checked += 1;
            if x.act(b, xx, xx) != xx {
                report.violate("b(x,x)=x", format!("b={}, x={xx}", alg.display(b)));
            }
            for y in 0..n {
                report.checked += 2;
                if x.act(top, xx, y) != xx {
                    report.violate("⊤(x,y)=x", format!("x={xx}, y={y}"));
                }
                if x.act(alg.complement(b), xx, y) != x.act(b, y, xx) {
                    report.violate(
                        "(¬b)(x,y)=b(y,x)",
                        format!("b={}, x={xx}, y={y}", alg.display(b)),
                    );
                }
                for z in 0..n {
                    report.checked += 2;
                    if x.act(b, x.act(b, xx, y), z) != x.act(b, xx, z) {
                        report.violate(
                            "b(b(x,y),z)=b(x,z)",
                            format!("b={}, x={xx}, y={y}, z={z}", alg.display(b)),
                        );
                    }
                    if x.act(b, xx, x.act(b, y, z)) != x.act(b, xx, z) {
                        report.violate(
                            "b(x,b(y,z))=b(x,z)",
                            format!("b={}, x={xx}, y={y}, z={z}", alg.display(b)),
                        );
                    }
                }
            }
        }
        for c in alg.elements() {
            for xx in 0..n {
                for y in 0..n {
                    report.checked += 1;
                    if x.act(b & c, xx, y) != x.act(b, x.act(c, xx, y), y) {
                        report.violate(
                            "(b∧c)(x,y)=b(c(x,y),y)",
                            format!("b={}, c={}, x={xx}, y={y}", alg.display(b), alg.display(c)),
                        );
                    }
                }
            }
        }
    }

    // Induced relations.
    for xx in 0..n {
        for y in 0..n {
            report.checked += 2;
            if x.equiv(top, xx, y) != (xx == y) {
                report.violate("≡_⊤ is equality", format!("x={xx}, y={y}"));
            }
            if !x.equiv(alg.bot(), xx, y) {
                report.violate("≡_⊥ is total", format!("x={xx}, y={y}"));
            }
            for b in alg.elements() {
                if !x.equiv(b, xx, y) {
                    continue;
                }
                for c in alg.elements() {
                    report.checked += 1;
                    if alg.leq(c, b) && !x.equiv(c, xx, y) {
                        report.violate(
                            "≡ monotone",
                            format!(
                                "x={xx} ≡ y={y} on {} but not {}",
                                alg.display(b),
                                alg.display(c)
                            ),
                        );
                    }
                }
            }
        }
    }

    // Switch axioms over every partition.
    for blocks in alg.partitions() {
        let k = blocks.len();
        let pname = || {
            let parts: Vec<String> = blocks.iter().map(|&b| alg.display(b)).collect();
            format!("{{{}}}", parts.join("|"))
        };
        for z in 0..n {
            report.checked += 1;
            if x.partition_apply(&blocks, &vec![z; k]) != z {
                report.violate("P(λb.z)=z", format!("P={}, z={z}", pname()));
            }
        }
        let families = function_count(k, n);
        let (step, partial) = if families > cfg.cap as u128 {
            ((families / cfg.cap as u128) as usize + 1, true)
        } else {
            (1, false)
        };
        report.partial |= partial;
        for (i, family) in functions(k, n).enumerate() {
            if i % step != 0 {
                continue;
            }
            let amalgam = x.partition_apply(&blocks, &family);
            for (j, &b) in blocks.iter().enumerate() {
                report.checked += 1;
                // b(P(x), x_b) = x_b, equivalently P(x) ≡_b x_b.
                if x.act(b, amalgam, family[j]) != family[j] {
                    report.violate(
                        "b(P(x),x_b)=x_b",
                        format!("P={}, family={family:?}, b={}", pname(), alg.display(b)),
                    );
                }
            }
            // The amalgam is the unique element matching the family.
            report.checked += 1;
            let matches = (0..n)
                .filter(|&z| {
                    blocks
                        .iter()
                        .zip(&family)
                        .all(|(&b, &fb)| x.equiv(b, z, fb))
                })
                .count();
            if matches != 1 {
                report.violate(
                    "unique amalgam",
                    format!("P={}, family={family:?} has {matches} amalgams", pname()),
                );
            }
        }
        // P(λb. b(x_b, y_b)) = P(λb. x_b), two families.
        let pairs = function_count(2 * k, n);
        let (step, partial) = if pairs > cfg.cap as u128 {
            ((pairs / cfg.cap as u128) as usize + 1, true)
        } else {
            (1, false)
        };
        report.partial |= partial;
        for (i, fam2) in functions(2 * k, n).enumerate() {
            if i % step != 0 {
                continue;
            }
            let (fx, fy) = fam2.split_at(k);
            let mixed: Vec<usize> = (0..k).map(|j| x.act(blocks[j], fx[j], fy[j])).collect();
            report.checked += 1;
            if x.partition_apply(&blocks, &mixed) != x.partition_apply(&blocks, fx) {
                report.violate(
                    "P(λb.b(x_b,y_b))=P(λb.x_b)",
                    format!("P={}, x={fx:?}, y={fy:?}", pname()),
                );
            }
        }
    }
    report
}

/// `x ≡_b y` on any B-set.
pub fn equiv_b(x: &BSet, a: usize, b: usize, elem: BElem) -> bool {
    x.equiv(elem, a, b)
}

/// An equivalence on a B-set carrier closed under all switch operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BSetCongruence {
    pub class_of: Vec<usize>,
    pub classes: Vec<Vec<usize>>,
}

impl BSetCongruence {
    fn from_union_find(mut parent: Vec<usize>) -> BSetCongruence {
        fn find(parent: &mut Vec<usize>, x: usize) -> usize {
            if parent[x] != x {
                let root = find(parent, parent[x]);
                parent[x] = root;
            }
            parent[x]
        }
        let n = parent.len();
        let mut remap: BTreeMap<usize, usize> = BTreeMap::new();
        let mut class_of = vec![0; n];
        for x in 0..n {
            let root = find(&mut parent, x);
            let next = remap.len();
            let id = *remap.entry(root).or_insert(next);
            class_of[x] = id;
        }
        let mut classes = vec![Vec::new(); remap.len()];
        for (x, &c) in class_of.iter().enumerate() {
            classes[c].push(x);
        }
        BSetCongruence { class_of, classes }
    }

    pub fn related(&self, x: usize, y: usize) -> bool {
        self.class_of[x] == self.class_of[y]
    }

    pub fn is_identity(&self) -> bool {
        self.classes.iter().all(|c| c.len() == 1)
    }
}

/// Least congruence containing the pairs: union-find plus saturation
/// under every switch operation. For each partition and family it
/// suffices to identify `P(family)` with `P(representatives of family)`;
/// two componentwise-related families then meet through the common
/// representative family.
pub fn congruence_closure(x: &BSet, pairs: &[(usize, usize)]) -> BSetCongruence {
    let n = x.carrier;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, v: usize) -> usize {
        if parent[v] != v {
            let root = find(parent, parent[v]);
            parent[v] = root;
        }
        parent[v]
    }
    fn union(parent: &mut Vec<usize>, a: usize, b: usize) -> bool {
        let (ra, rb) = (find(parent, a), find(parent, b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
        true
    }
    for &(a, b) in pairs {
        union(&mut parent, a, b);
    }
    let partitions = x.algebra.partitions();
    loop {
        let mut changed = false;
        for blocks in &partitions {
            let k = blocks.len();
            if k == 1 {
                continue; // P(x) = x, nothing to saturate
            }
            for family in functions(k, n) {
                let reps: Vec<usize> = family.iter().map(|&f| find(&mut parent, f)).collect();
                if reps == family {
                    continue;
                }
                let direct = x.partition_apply(blocks, &family);
                let via_reps = x.partition_apply(blocks, &reps);
                changed |= union(&mut parent, direct, via_reps);
            }
        }
        if !changed {
            break;
        }
    }
    BSetCongruence::from_union_find(parent)
}

/// Germs of a B-set: for each atom, the classes of agreement at that
/// atom. In a finite algebra the neighbourhood filter of an atom is
/// principal, so `≡_atom` itself is the germ relation.
#[derive(Debug, Clone)]
pub struct Germs {
    /// `class_at[p][x]` = germ id of `x` at atom `p`.
    pub class_at: Vec<Vec<usize>>,
    pub counts: Vec<usize>,
}

pub fn germs(x: &BSet) -> Germs {
    let mut class_at = Vec::new();
    let mut counts = Vec::new();
    for p in 0..x.algebra.atoms() {
        let atom = x.algebra.atom(p);
        let mut class_of = vec![usize::MAX; x.carrier];
        let mut reps: Vec<usize> = Vec::new();
        for e in 0..x.carrier {
            if let Some(i) = reps.iter().position(|&r| x.equiv(atom, r, e)) {
                class_of[e] = i;
            } else {
                reps.push(e);
                class_of[e] = reps.len() - 1;
            }
        }
        counts.push(reps.len());
        class_at.push(class_of);
    }
    Germs { class_at, counts }
}

impl Germs {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// The lattice of opens of the étale space of a B-set: the
/// relation-preserving maps into the algebra, pointwise ordered. Each
/// carrier element `x` induces the open `x̂ = λy. ⋁{b | x ≡_b y}`; the
/// verification that these generate (every open decomposes as
/// `⋁_x x̂ ∧ const_{w(x)}`) is part of construction.
#[derive(Debug, Clone)]
pub struct EtaleSpace {
    pub opens: Vec<Vec<BElem>>,
    /// Index of `x̂` in `opens`, per carrier element.
    pub hat: Vec<usize>,
    pub germs: Germs,
    pub report: LawReport,
}

pub fn etale_opens(x: &BSet, cap: u128) -> Result<EtaleSpace> {
    let mut report = LawReport::new("étale space");
    let g = germs(x);
    let atoms = x.algebra.atoms();

    // An open assigns to each atom a set of germs at that atom; its value
    // at y joins the atoms whose chosen germ-set contains y's germ.
    let mut total: u128 = 1;
    for &c in &g.counts {
        total = total.saturating_mul(1u128 << c);
        if total > cap {
            return Err(Error::SearchSpaceTooLarge { size: total, cap });
        }
    }
    let mut opens: Vec<Vec<BElem>> = Vec::with_capacity(total as usize);
    let mut selections = vec![0u64; atoms];
    loop {
        let mut w = vec![0 as BElem; x.carrier];
        for (y, value) in w.iter_mut().enumerate() {
            for p in 0..atoms {
                if selections[p] >> g.class_at[p][y] & 1 == 1 {
                    *value |= x.algebra.atom(p);
                }
            }
        }
        opens.push(w);
        let mut p = 0;
        loop {
            if p == atoms {
                break;
            }
            selections[p] += 1;
            if selections[p] < (1u64 << g.counts[p]) {
                break;
            }
            selections[p] = 0;
            p += 1;
        }
        if p == atoms {
            break;
        }
    }
    opens.sort_unstable();

    // Every open preserves the agreement relations (this is what makes it
    // a map of B-sets into the algebra).
    for w in &opens {
        for b in x.algebra.elements() {
            for e1 in 0..x.carrier {
                for e2 in 0..x.carrier {
                    if x.equiv(b, e1, e2) {
                        report.checked += 1;
                        if b & w[e1] != b & w[e2] {
                            report.violate(
                                "open preserves agreement",
                                format!("b={}, x={e1}, y={e2}", x.algebra.display(b)),
                            );
                        }
                    }
                }
            }
        }
    }

    // x̂ opens: computed directly, must appear among the opens, injectively.
    let mut hat = Vec::with_capacity(x.carrier);
    for e in 0..x.carrier {
        let mut w = vec![0 as BElem; x.carrier];
        for (y, value) in w.iter_mut().enumerate() {
            for b in x.algebra.elements() {
                if x.equiv(b, e, y) {
                    *value |= b;
                }
            }
        }
        match opens.binary_search(&w) {
            Ok(i) => hat.push(i),
            Err(_) => {
                report.violate("x̂ is an open", format!("x={e}"));
                hat.push(usize::MAX);
            }
        }
    }
    for e1 in 0..x.carrier {
        for e2 in (e1 + 1)..x.carrier {
            report.checked += 1;
            if hat[e1] == hat[e2] {
                report.violate("x ↦ x̂ injective", format!("x={e1}, y={e2}"));
            }
        }
    }

    // Basis decomposition: w = ⋁_x x̂ ∧ const_{w(x)}.
    for w in &opens {
        for y in 0..x.carrier {
            report.checked += 1;
            let mut join = 0 as BElem;
            for e in 0..x.carrier {
                if hat[e] != usize::MAX {
                    join |= opens[hat[e]][y] & w[e];
                }
            }
            if join != w[y] {
                report.violate("basis decomposition", format!("w={w:?} at y={y}"));
            }
        }
    }

    // Point count: atoms of the open lattice are the single-germ opens,
    // one per germ (the independent route to the germ count).
    let zero = vec![0 as BElem; x.carrier];
    let minimal = opens
        .iter()
        .filter(|w| {
            **w != zero
                && !opens.iter().any(|v| {
                    *v != zero && *v != **w && v.iter().zip(w.iter()).all(|(a, b)| a & b == *a)
                })
        })
        .count();
    report.checked += 1;
    if minimal != g.total() {
        report.violate(
            "lattice points = germ count",
            format!("{minimal} minimal opens vs {} germs", g.total()),
        );
    }

    Ok(EtaleSpace {
        opens,
        hat,
        germs: g,
        report,
    })
}

/// The distributions monad of a finite Boolean algebra: computations at
/// `A` are partition-valued maps `A -> B`, i.e. atom labelings; `bind`
/// relabels atom by atom. All its computations are read-only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DistMonad {
    algebra: FinBoolAlg,
}

impl DistMonad {
    pub fn new(algebra: FinBoolAlg) -> Result<DistMonad> {
        if algebra.is_degenerate() {
            return Err(Error::InvalidSpec(
                "distributions over the degenerate algebra".into(),
            ));
        }
        Ok(DistMonad { algebra })
    }

    pub fn algebra(&self) -> FinBoolAlg {
        self.algebra
    }

    pub fn label(&self, a: FinSet, h: usize, atom: usize) -> usize {
        (h / a.size().pow(atom as u32)) % a.size()
    }

    pub fn encode(&self, a: FinSet, labels: impl Fn(usize) -> usize) -> usize {
        let mut code = 0;
        for atom in (0..self.algebra.atoms()).rev() {
            code = code * a.size() + labels(atom);
        }
        code
    }
}

impl FinMonad for DistMonad {
    fn name(&self) -> String {
        format!("dist[{} atoms]", self.algebra.atoms())
    }

    fn carrier_len(&self, a: FinSet) -> Result<usize> {
        let size = function_count(self.algebra.atoms(), a.size());
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
        Ok(self.encode(a, |_| value))
    }

    fn bind(&self, a: FinSet, b: FinSet, t: usize, cont: &[usize]) -> Result<usize> {
        if cont.len() != a.size() {
            return Err(Error::InvalidSpec(format!(
                "continuation has {} entries, expected {}",
                cont.len(),
                a.size()
            )));
        }
        Ok(self.encode(b, |atom| self.label(b, cont[self.label(a, t, atom)], atom)))
    }

    fn describe(&self, a: FinSet, t: usize) -> String {
        let labels: Vec<String> = (0..self.algebra.atoms())
            .map(|p| self.label(a, t, p).to_string())
            .collect();
        format!("⟨{}⟩", labels.join(","))
    }

    fn canonical_comodel(&self) -> Result<crate::comodel::Comodel> {
        let atoms = self.algebra.atoms();
        let sig = crate::finmonad::Signature::from_decls(vec![crate::finmonad::OpDecl {
            name: "which".into(),
            arity: atoms,
        }])?;
        crate::comodel::Comodel::new(sig, atoms, vec![(0..atoms).map(|p| (p, p)).collect()])
    }
}

/// Distributions run on the atoms of their algebra: at atom `p` a
/// computation outputs its label and stays put.
impl Runner for DistMonad {
    fn monad(&self) -> &dyn FinMonad {
        self
    }

    fn state_count(&self) -> usize {
        self.algebra.atoms()
    }

    fn run(&self, a: FinSet, t: usize, w: usize) -> Result<(usize, usize)> {
        if t >= self.carrier_len(a)? {
            return Err(Error::OutOfRange {
                index: t,
                what: format!("{}{}", self.name(), a),
            });
        }
        Ok((self.label(a, t, w), w))
    }

    fn state_label(&self, w: usize) -> String {
        format!("p{w}")
    }

    fn as_runner(&self) -> &dyn Runner {
        self
    }
}

#[derive(Debug, Clone)]
pub struct SheafConfig {
    pub trace: TraceConfig,
    /// Cap on generator pairs per arity.
    pub pair_budget: u64,
}

impl Default for SheafConfig {
    fn default() -> Self {
        SheafConfig {
            trace: TraceConfig::default(),
            pair_budget: 1 << 21,
        }
    }
}

/// The sheaf of transitions of a runner, with the pointwise comparison.
pub struct SheafOutcome {
    pub algebra: FinBoolAlg,
    pub free: FreeBSet,
    pub congruence: BSetCongruence,
    pub quotient: BSet,
    pub germ_counts: Vec<usize>,
    pub generator_pairs: usize,
    pub arity_used: usize,
}

/// Quotient the free B-set on the unary carrier by the congruence
/// identifying a composite with its piecewise continuations: over the
/// region where `t` returns `a`, `t >>= u` is `t ⊳ u(a)`.
///
/// The outcome is compared against pointwise trace equivalence: two
/// labelings are congruent exactly when their labels are trace-equivalent
/// at every behaviour. Disagreement means the closure bounds were too
/// small and is a hard error.
pub fn sheaf_of_transitions(runner: &dyn Runner, cfg: &SheafConfig) -> Result<SheafOutcome> {
    let behaviours = Behaviours::of(runner)?;
    if behaviours.is_empty() {
        return Err(Error::InvalidSpec(
            "sheaf of transitions over an empty runner".into(),
        ));
    }
    let algebra = FinBoolAlg::new(behaviours.len());
    let one = FinSet(1);
    let monad = runner.monad();
    let t1 = monad.carrier_len(one)?;
    let free = free_bset(t1, algebra)?;

    let mut pairs: Vec<(usize, usize)> = Vec::new();
    let max_arity = cfg.trace.max_arity.unwrap_or(t1).max(1);
    let mut arity_used = 0;
    for arity in 1..=max_arity {
        let a = FinSet(arity);
        let ta = monad.carrier_len(a)?;
        let planned = ta as u128 * function_count(arity, t1);
        if planned > cfg.pair_budget as u128 {
            break;
        }
        for t in 0..ta {
            let outs: Vec<usize> = (0..behaviours.len())
                .map(|block| Ok(behaviours.run(a, t, block)?.0))
                .collect::<Result<_>>()?;
            'cont: for u in functions(arity, t1) {
                let lhs = match monad.bind(a, one, t, &u) {
                    Ok(m) => m,
                    Err(Error::DepthExceeded { .. }) | Err(Error::Truncated(_)) => continue,
                    Err(e) => return Err(e),
                };
                let mut labels = Vec::with_capacity(behaviours.len());
                for block in 0..behaviours.len() {
                    match crate::finmonad::skip(monad, a, one, t, u[outs[block]]) {
                        Ok(m) => labels.push(m),
                        Err(Error::DepthExceeded { .. }) | Err(Error::Truncated(_)) => {
                            continue 'cont
                        }
                        Err(e) => return Err(e),
                    }
                }
                pairs.push((free.delta(lhs), free.encode(|p| labels[p])));
            }
        }
        arity_used = arity;
    }

    let congruence = congruence_closure(&free.bset, &pairs);
    let quotient = free.bset.quotient(&congruence)?;
    let germ_counts = germs(&quotient).counts;

    // Pointwise comparison against trace equivalence.
    let tables: Vec<_> = (0..behaviours.len())
        .map(|block| trace_classes(runner, behaviours.rep(block), &cfg.trace))
        .collect::<Result<_>>()?;
    for x in 0..free.bset.carrier {
        for y in 0..free.bset.carrier {
            let closed = congruence.related(x, y);
            let pointwise = (0..behaviours.len())
                .all(|p| tables[p].equivalent(free.label(x, p), free.label(y, p)));
            if closed != pointwise {
                return Err(Error::BoundMismatch(format!(
                    "elements {} and {} are {} by congruence but {} pointwise",
                    free.display(x),
                    free.display(y),
                    if closed { "related" } else { "unrelated" },
                    if pointwise { "related" } else { "unrelated" }
                )));
            }
        }
    }

    Ok(SheafOutcome {
        algebra,
        free,
        congruence,
        quotient,
        germ_counts,
        generator_pairs: pairs.len(),
        arity_used,
    })
}
