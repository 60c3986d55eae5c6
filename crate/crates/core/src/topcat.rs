//! Finite internal categories and retrofunctors.
//!
//! Objects carry the discrete topology implicitly: a finite Stone space is
//! discrete, so no topology field is stored, and the source map of any
//! finite category is automatically a local homeomorphism (each morphism
//! is the unique lift of itself over the singleton open of its source).
//!
//! Composition is diagrammatic throughout: `comp(f, g)` is "f then g" and
//! is defined exactly when `tgt(f) = src(g)`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::report::LawReport;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinCat {
    pub objects: usize,
    pub morphisms: usize,
    pub src: Vec<usize>,
    pub tgt: Vec<usize>,
    pub id: Vec<usize>,
    comp: BTreeMap<(usize, usize), usize>,
    /// Dense mirror of `comp` (usize::MAX = undefined), for hot paths.
    comp_dense: Vec<usize>,
    /// Composable pairs whose composite left a bounded carrier. Empty for
    /// honest finite categories; behaviour categories of depth-bounded
    /// theories record their missing composites here.
    pub truncated: BTreeSet<(usize, usize)>,
}

impl FinCat {
    pub fn new(
        objects: usize,
        src: Vec<usize>,
        tgt: Vec<usize>,
        id: Vec<usize>,
        comp: BTreeMap<(usize, usize), usize>,
    ) -> Result<FinCat> {
        let morphisms = src.len();
        if tgt.len() != morphisms || id.len() != objects {
            return Err(Error::InvalidSpec(
                "src/tgt/id tables have inconsistent sizes".into(),
            ));
        }
        if src.iter().chain(tgt.iter()).any(|&o| o >= objects) {
            return Err(Error::InvalidSpec("morphism endpoint out of range".into()));
        }
        if id.iter().any(|&f| f >= morphisms) {
            return Err(Error::InvalidSpec("identity morphism out of range".into()));
        }
        if comp
            .iter()
            .any(|(&(f, g), &h)| f >= morphisms || g >= morphisms || h >= morphisms)
        {
            return Err(Error::InvalidSpec("composition entry out of range".into()));
        }
        let mut comp_dense = vec![usize::MAX; morphisms * morphisms];
        for (&(f, g), &h) in &comp {
            comp_dense[f * morphisms + g] = h;
        }
        Ok(FinCat {
            objects,
            morphisms,
            src,
            tgt,
            id,
            comp,
            comp_dense,
            truncated: BTreeSet::new(),
        })
    }

    /// `f ; g`, defined when `tgt f = src g`.
    pub fn comp(&self, f: usize, g: usize) -> Result<usize> {
        match self.comp_dense[f * self.morphisms + g] {
            usize::MAX if self.truncated.contains(&(f, g)) => {
                Err(Error::Truncated(format!("composite {f};{g}")))
            }
            usize::MAX => Err(Error::CategoryLawViolation(format!(
                "composite {f};{g} missing"
            ))),
            h => Ok(h),
        }
    }

    pub fn comp_opt(&self, f: usize, g: usize) -> Option<usize> {
        match self.comp_dense[f * self.morphisms + g] {
            usize::MAX => None,
            h => Some(h),
        }
    }

    /// Morphisms out of `c`, ascending.
    pub fn out(&self, c: usize) -> Vec<usize> {
        (0..self.morphisms).filter(|&f| self.src[f] == c).collect()
    }

    pub fn hom(&self, c: usize, d: usize) -> Vec<usize> {
        (0..self.morphisms)
            .filter(|&f| self.src[f] == c && self.tgt[f] == d)
            .collect()
    }

    pub fn check(&self) -> LawReport {
        let mut report = LawReport::new(format!(
            "category laws ({} objects, {} morphisms)",
            self.objects, self.morphisms
        ));
        for c in 0..self.objects {
            report.checked += 1;
            let i = self.id[c];
            if self.src[i] != c || self.tgt[i] != c {
                report.violate("identity endpoints", format!("object {c}"));
            }
        }
        // comp defined exactly on composable pairs, with correct endpoints.
        for f in 0..self.morphisms {
            for g in 0..self.morphisms {
                report.checked += 1;
                let composable = self.tgt[f] == self.src[g];
                match self.comp.get(&(f, g)) {
                    None if composable && self.truncated.contains(&(f, g)) => {
                        report.skipped += 1;
                    }
                    None if composable => report.violate("totality", format!("{f};{g} undefined")),
                    Some(_) if !composable => {
                        report.violate("domain", format!("{f};{g} defined but not composable"))
                    }
                    Some(&h)
                        if composable
                            && (self.src[h] != self.src[f] || self.tgt[h] != self.tgt[g]) =>
                    {
                        report.violate("composite endpoints", format!("{f};{g}={h}"));
                    }
                    _ => {}
                }
            }
        }
        for f in 0..self.morphisms {
            report.checked += 2;
            if self.comp.get(&(self.id[self.src[f]], f)) != Some(&f) {
                report.violate("left unit", format!("morphism {f}"));
            }
            if self.comp.get(&(f, self.id[self.tgt[f]])) != Some(&f) {
                report.violate("right unit", format!("morphism {f}"));
            }
        }
        for f in 0..self.morphisms {
            for g in self.out(self.tgt[f]) {
                for h in self.out(self.tgt[g]) {
                    report.checked += 1;
                    let left = self.comp(f, g).and_then(|fg| self.comp(fg, h));
                    let right = self.comp(g, h).and_then(|gh| self.comp(f, gh));
                    match (left, right) {
                        (Ok(l), Ok(r)) if l == r => {}
                        (Err(Error::Truncated(_)), _) | (_, Err(Error::Truncated(_))) => {
                            report.skipped += 1;
                        }
                        _ => report.violate("associativity", format!("{f};{g};{h}")),
                    }
                }
            }
        }
        report
    }

    /// Only identity morphisms.
    pub fn discrete(n: usize) -> FinCat {
        let mut comp = BTreeMap::new();
        for f in 0..n {
            comp.insert((f, f), f);
        }
        FinCat::new(
            n,
            (0..n).collect(),
            (0..n).collect(),
            (0..n).collect(),
            comp,
        )
        .expect("discrete categories are well-formed")
    }

    /// Exactly one morphism between every ordered pair of objects; the
    /// indiscrete transition system. Morphism `i*n + j : i -> j`.
    pub fn chaotic(n: usize) -> FinCat {
        let mut src = Vec::new();
        let mut tgt = Vec::new();
        for i in 0..n {
            for j in 0..n {
                src.push(i);
                tgt.push(j);
            }
        }
        let mut comp = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    comp.insert((i * n + j, j * n + k), i * n + k);
                }
            }
        }
        FinCat::new(n, src, tgt, (0..n).map(|i| i * n + i).collect(), comp)
            .expect("chaotic categories are well-formed")
    }

    /// The cyclic group of order `n` as a one-object category.
    pub fn cyclic(n: usize) -> FinCat {
        assert!(n > 0);
        let mut comp = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                comp.insert((i, j), (i + j) % n);
            }
        }
        FinCat::new(1, vec![0; n], vec![0; n], vec![0], comp)
            .expect("cyclic groups are well-formed")
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph category {\n  rankdir=LR;\n");
        for c in 0..self.objects {
            s.push_str(&format!("  o{c} [label=\"{c}\"];\n"));
        }
        for f in 0..self.morphisms {
            let style = if self.id.contains(&f) {
                ",style=dashed"
            } else {
                ""
            };
            s.push_str(&format!(
                "  o{} -> o{} [label=\"m{f}\"{style}];\n",
                self.src[f], self.tgt[f]
            ));
        }
        s.push_str("}\n");
        s
    }
}

/// Deterministic generator state (splitmix64).
#[derive(Debug, Clone)]
pub struct SeededRng(u64);

impl SeededRng {
    pub fn new(seed: u64) -> SeededRng {
        SeededRng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// A random finite category: a random quiver completed with identities,
/// with parallel paths collapsed (so hom-sets are empty or singletons and
/// the composition table is forced, hence always law-valid).
pub fn random_category(seed: u64, max_objects: usize, max_morphisms: usize) -> FinCat {
    assert!(max_objects >= 1 && max_morphisms >= 1);
    let mut rng = SeededRng::new(seed);
    let objects = 1 + rng.below(max_objects);
    // Reachability matrix, reflexive to start.
    let mut reach = vec![vec![false; objects]; objects];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    let count = |r: &Vec<Vec<bool>>| -> usize {
        r.iter().map(|row| row.iter().filter(|&&b| b).count()).sum()
    };
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for i in 0..objects {
        for j in 0..objects {
            if i != j {
                edges.push((i, j));
            }
        }
    }
    // Deterministic shuffle.
    for i in (1..edges.len()).rev() {
        let j = rng.below(i + 1);
        edges.swap(i, j);
    }
    let attempts = if edges.is_empty() {
        0
    } else {
        rng.below(edges.len() + 1)
    };
    for &(i, j) in edges.iter().take(attempts) {
        let mut trial = reach.clone();
        trial[i][j] = true;
        // Transitive closure.
        loop {
            let mut changed = false;
            for a in 0..objects {
                for b in 0..objects {
                    if trial[a][b] {
                        for c in 0..objects {
                            if trial[b][c] && !trial[a][c] {
                                trial[a][c] = true;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
        if count(&trial) <= max_morphisms {
            reach = trial;
        }
    }
    let mut src = Vec::new();
    let mut tgt = Vec::new();
    let mut index = BTreeMap::new();
    for i in 0..objects {
        for j in 0..objects {
            if reach[i][j] {
                index.insert((i, j), src.len());
                src.push(i);
                tgt.push(j);
            }
        }
    }
    let id = (0..objects).map(|i| index[&(i, i)]).collect();
    let mut comp = BTreeMap::new();
    for (&(i, j), &f) in &index {
        for (&(j2, k), &g) in &index {
            if j == j2 {
                comp.insert((f, g), index[&(i, k)]);
            }
        }
    }
    FinCat::new(objects, src, tgt, id, comp).expect("thin categories are well-formed")
}

/// A retrofunctor `C ⇝ D`: objects map forward, morphisms lift backward.
/// `lifts[(c, f)]` is defined for every `c` and every D-morphism `f` with
/// `src_D f = on_objects[c]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Retrofunctor {
    pub on_objects: Vec<usize>,
    pub lifts: BTreeMap<(usize, usize), usize>,
}

impl Retrofunctor {
    pub fn lift(&self, c: usize, f: usize) -> Result<usize> {
        self.lifts
            .get(&(c, f))
            .copied()
            .ok_or_else(|| Error::CategoryLawViolation(format!("lift of ({c},{f}) missing")))
    }
}

pub fn retro_id(c: &FinCat) -> Retrofunctor {
    let mut lifts = BTreeMap::new();
    for obj in 0..c.objects {
        for f in c.out(obj) {
            lifts.insert((obj, f), f);
        }
    }
    Retrofunctor {
        on_objects: (0..c.objects).collect(),
        lifts,
    }
}

/// Composite of `f : C ⇝ D` and `g : D ⇝ E`.
pub fn retro_compose(
    f: &Retrofunctor,
    g: &Retrofunctor,
    c: &FinCat,
    _d: &FinCat,
    e: &FinCat,
) -> Result<Retrofunctor> {
    let on_objects: Vec<usize> = f.on_objects.iter().map(|&cd| g.on_objects[cd]).collect();
    let mut lifts = BTreeMap::new();
    for obj in 0..c.objects {
        for h in e.out(on_objects[obj]) {
            let mid = g.lift(f.on_objects[obj], h)?;
            lifts.insert((obj, h), f.lift(obj, mid)?);
        }
    }
    Ok(Retrofunctor { on_objects, lifts })
}

pub fn check_retrofunctor(r: &Retrofunctor, c: &FinCat, d: &FinCat) -> LawReport {
    let mut report = LawReport::new("retrofunctor laws");
    if r.on_objects.len() != c.objects {
        report.violate("shape", "object map has wrong length");
        return report;
    }
    if r.on_objects.iter().any(|&o| o >= d.objects) {
        report.violate("shape", "object map out of range");
        return report;
    }
    for obj in 0..c.objects {
        let image = r.on_objects[obj];
        for f in d.out(image) {
            report.checked += 1;
            let lift = match r.lift(obj, f) {
                Ok(l) => l,
                Err(_) => {
                    report.violate("totality", format!("no lift of ({obj},{f})"));
                    continue;
                }
            };
            if c.src[lift] != obj {
                report.violate("lift source", format!("lift of ({obj},{f})"));
            }
            if r.on_objects[c.tgt[lift]] != d.tgt[f] {
                report.violate("lift target", format!("lift of ({obj},{f})"));
            }
        }
        // Extraneous lifts are ill-formed.
        for &(c0, f) in r.lifts.keys() {
            if c0 == obj && d.src[f] != image {
                report.violate("domain", format!("lift of non-outgoing ({obj},{f})"));
            }
        }
        report.checked += 1;
        if r.lift(obj, d.id[image]).ok() != Some(c.id[obj]) {
            report.violate("identity lift", format!("object {obj}"));
        }
        for f in d.out(image) {
            let lift_f = match r.lift(obj, f) {
                Ok(l) => l,
                Err(_) => continue,
            };
            let mid = c.tgt[lift_f];
            for g in d.out(d.tgt[f]) {
                report.checked += 1;
                let composite = match d.comp(f, g) {
                    Ok(fg) => fg,
                    Err(_) => continue,
                };
                let lhs = r.lift(obj, composite).ok();
                let rhs = match r.lift(mid, g) {
                    Ok(lift_g) => c.comp(lift_f, lift_g).ok(),
                    Err(_) => None,
                };
                if lhs.is_none() || lhs != rhs {
                    report.violate("composition lift", format!("({obj},{f};{g})"));
                }
            }
        }
    }
    report
}
