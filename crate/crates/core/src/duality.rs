//! The two comparison maps between monads and finite categories, and the
//! fixed-point machinery around them.
//!
//! The unit sends a computation `t` to the section that, at each
//! behaviour, outputs `t`'s value and takes `t`'s transition class. The
//! counit sends an object of a category to its behaviour in the sections
//! monad, lifting each trace class to the morphism its sections take at
//! that object. Hyperaffine computations ("scries") are the ones that
//! predict an output while provably changing nothing; a monad where every
//! computation factors uniquely through its scry is exactly one the unit
//! identifies with a sections monad.

use serde::{Deserialize, Serialize};

use crate::behaviour::{behaviour_category, BehaviourCategory, BehaviourCategoryConfig, Runner};
use crate::boolalg::{DistMonad, FinBoolAlg};
use crate::error::{Error, Result};
use crate::finmonad::{check_monad_map, skip, FinMonad, LawCheckConfig, MonadMap};
use crate::finset::FinSet;
use crate::report::LawReport;
use crate::sections::{gamma_retro, GammaMonad};
use crate::topcat::{check_retrofunctor, retro_compose, retro_id, FinCat, Retrofunctor};

/// Both scrying equations: running `t` then returning a fixed value is
/// that pure value, and running `t` twice duplicates nothing.
pub fn is_hyperaffine(m: &dyn FinMonad, a: FinSet, t: usize) -> Result<bool> {
    for v in a.elements() {
        let pure = m.ret(a, v)?;
        if skip(m, a, a, t, pure)? != pure {
            return Ok(false);
        }
    }
    let sq = a.square();
    let mut diag = Vec::with_capacity(a.size());
    for v in a.elements() {
        diag.push(m.ret(sq, a.encode_pair(v, v))?);
    }
    let rhs = m.bind(a, sq, t, &diag)?;
    let mut outer = Vec::with_capacity(a.size());
    for v1 in a.elements() {
        let mut row = Vec::with_capacity(a.size());
        for v2 in a.elements() {
            row.push(m.ret(sq, a.encode_pair(v1, v2))?);
        }
        outer.push(m.bind(a, sq, t, &row)?);
    }
    let lhs = m.bind(a, sq, t, &outer)?;
    Ok(lhs == rhs)
}

/// All hyperaffine elements of `T a`. Candidates whose scrying equations
/// escape a bounded carrier are excluded (they are not certifiable there).
pub fn hyperaffines(m: &dyn FinMonad, a: FinSet) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for t in 0..m.carrier_len(a)? {
        match is_hyperaffine(m, a, t) {
            Ok(true) => out.push(t),
            Ok(false) => {}
            Err(Error::DepthExceeded { .. }) | Err(Error::Truncated(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decomposition {
    /// Exactly one hyperaffine `h` with `t = h >>= λa. (t ⊳ return a)`;
    /// the unary family is the one appearing in that factorization.
    Unique {
        hyperaffine: usize,
        unary_family: Vec<usize>,
    },
    NoDecomposition,
    NonUnique {
        count: usize,
    },
}

/// Brute-force search for the scry factorization of `t`.
pub fn hyperaffine_decompose(m: &dyn FinMonad, a: FinSet, t: usize) -> Result<Decomposition> {
    let mut family = Vec::with_capacity(a.size());
    for v in a.elements() {
        let pure = m.ret(a, v)?;
        match skip(m, a, a, t, pure) {
            Ok(s) => family.push(s),
            Err(Error::DepthExceeded { .. }) | Err(Error::Truncated(_)) => {
                return Ok(Decomposition::NoDecomposition)
            }
            Err(e) => return Err(e),
        }
    }
    let mut witnesses = Vec::new();
    for h in hyperaffines(m, a)? {
        match m.bind(a, a, h, &family) {
            Ok(rebuilt) if rebuilt == t => witnesses.push(h),
            Ok(_) => {}
            Err(Error::DepthExceeded { .. }) | Err(Error::Truncated(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(match witnesses.len() {
        0 => Decomposition::NoDecomposition,
        1 => Decomposition::Unique {
            hyperaffine: witnesses[0],
            unary_family: family,
        },
        n => Decomposition::NonUnique { count: n },
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HyperaffineUnaryReport {
    pub monad: String,
    pub sizes: Vec<usize>,
    pub verdict: bool,
    pub failures: Vec<String>,
}

/// Does every computation factor uniquely through a scry, at all sizes up
/// to the bound?
pub fn is_hyperaffine_unary(m: &dyn FinMonad, max_size: usize) -> Result<HyperaffineUnaryReport> {
    let mut failures = Vec::new();
    for size in 1..=max_size {
        let a = FinSet(size);
        for t in 0..m.carrier_len(a)? {
            match hyperaffine_decompose(m, a, t)? {
                Decomposition::Unique { .. } => {}
                Decomposition::NoDecomposition => {
                    failures.push(format!("{} at {a}: no factorization", m.describe(a, t)))
                }
                Decomposition::NonUnique { count } => failures.push(format!(
                    "{} at {a}: {count} factorizations",
                    m.describe(a, t)
                )),
            }
        }
    }
    Ok(HyperaffineUnaryReport {
        monad: m.name(),
        sizes: (1..=max_size).collect(),
        verdict: failures.is_empty(),
        failures,
    })
}

/// The Boolean algebra carried by the hyperaffine binary computations:
/// top is `return 1`, meet runs the left conjunct and continues into the
/// right one on success, negation swaps the outputs.
pub struct H2Algebra<'a> {
    monad: &'a dyn FinMonad,
    pub elements: Vec<usize>,
    pub top: usize,
    pub bot: usize,
}

impl<'a> H2Algebra<'a> {
    pub fn meet(&self, h1: usize, h2: usize) -> Result<usize> {
        let two = FinSet(2);
        let zero = self.monad.ret(two, 0)?;
        self.monad.bind(two, two, h1, &[zero, h2])
    }

    pub fn not(&self, h: usize) -> Result<usize> {
        let two = FinSet(2);
        let one = self.monad.ret(two, 1)?;
        let zero = self.monad.ret(two, 0)?;
        self.monad.bind(two, two, h, &[one, zero])
    }

    pub fn join(&self, h1: usize, h2: usize) -> Result<usize> {
        let two = FinSet(2);
        let one = self.monad.ret(two, 1)?;
        self.monad.bind(two, two, h1, &[h2, one])
    }
}

/// Build the algebra on hyperaffine `T2` and verify the Boolean laws
/// exhaustively over it.
pub fn h2_boolean_algebra(m: &dyn FinMonad) -> Result<(H2Algebra<'_>, LawReport)> {
    let two = FinSet(2);
    let elements = hyperaffines(m, two)?;
    let algebra_err = |what: &str| Error::AxiomViolation(format!("H2: {what}"));
    let top = m.ret(two, 1)?;
    let bot = m.ret(two, 0)?;
    if !elements.contains(&top) || !elements.contains(&bot) {
        return Err(algebra_err("pure computations are not hyperaffine"));
    }
    let h2 = H2Algebra {
        monad: m,
        elements,
        top,
        bot,
    };
    let mut report = LawReport::new(format!("Boolean algebra on hyperaffine T2 of {}", m.name()));

    let els = h2.elements.clone();
    let contains = |x: usize| els.contains(&x);
    for &x in &els {
        report.checked += 4;
        if !contains(h2.not(x)?) {
            report.violate("closure under ¬", m.describe(two, x));
        }
        if h2.meet(x, x)? != x {
            report.violate("idempotence", m.describe(two, x));
        }
        if h2.meet(h2.top, x)? != x || h2.meet(x, h2.top)? != x {
            report.violate("⊤ is a unit for ∧", m.describe(two, x));
        }
        if h2.join(h2.bot, x)? != x || h2.join(x, h2.bot)? != x {
            report.violate("⊥ is a unit for ∨", m.describe(two, x));
        }
        if h2.meet(x, h2.not(x)?)? != h2.bot || h2.join(x, h2.not(x)?)? != h2.top {
            report.violate("complement", m.describe(two, x));
        }
        if h2.not(h2.not(x)?)? != x {
            report.violate("involution", m.describe(two, x));
        }
        for &y in &els {
            report.checked += 4;
            if !contains(h2.meet(x, y)?) || !contains(h2.join(x, y)?) {
                report.violate("closure under ∧/∨", format!("{x},{y}"));
            }
            if h2.meet(x, y)? != h2.meet(y, x)? {
                report.violate("commutativity of ∧", format!("{x},{y}"));
            }
            if h2.join(x, y)? != h2.join(y, x)? {
                report.violate("commutativity of ∨", format!("{x},{y}"));
            }
            if h2.not(h2.meet(x, y)?)? != h2.join(h2.not(x)?, h2.not(y)?)? {
                report.violate("de Morgan", format!("{x},{y}"));
            }
            if h2.meet(x, h2.join(x, y)?)? != x || h2.join(x, h2.meet(x, y)?)? != x {
                report.violate("absorption", format!("{x},{y}"));
            }
            for &z in &els {
                report.checked += 3;
                if h2.meet(h2.meet(x, y)?, z)? != h2.meet(x, h2.meet(y, z)?)? {
                    report.violate("associativity of ∧", format!("{x},{y},{z}"));
                }
                if h2.join(h2.join(x, y)?, z)? != h2.join(x, h2.join(y, z)?)? {
                    report.violate("associativity of ∨", format!("{x},{y},{z}"));
                }
                if h2.meet(x, h2.join(y, z)?)? != h2.join(h2.meet(x, y)?, h2.meet(x, z)?)? {
                    report.violate("distributivity", format!("{x},{y},{z}"));
                }
            }
        }
    }
    Ok((h2, report))
}

/// The unit's component tables against an already-built behaviour
/// category: `t ↦ (value of t, class of t ⊳ return)` objectwise.
pub fn unit_tables(
    runner: &dyn Runner,
    bcat: &BehaviourCategory,
    gamma: &GammaMonad,
    size: usize,
) -> Result<Vec<usize>> {
    let a = FinSet(size);
    let one = FinSet(1);
    let monad = runner.monad();
    let ret1 = monad.ret(one, 0)?;
    let mut tables = Vec::with_capacity(monad.carrier_len(a)?);
    for t in 0..monad.carrier_len(a)? {
        let transition = skip(monad, a, one, t, ret1)?;
        let mut per_object = Vec::with_capacity(bcat.cat.objects);
        for c in 0..bcat.cat.objects {
            let value = runner.run(a, t, bcat.object_reps[c])?.0;
            per_object.push((value, bcat.t1_class[c][transition]));
        }
        tables.push(gamma.encode(a, |c| per_object[c]));
    }
    Ok(tables)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitSizeVerdict {
    pub size: usize,
    pub source: usize,
    pub target: usize,
    pub injective: bool,
    pub surjective: bool,
    pub missing_section: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UnitReport {
    pub monad: String,
    pub sizes: Vec<UnitSizeVerdict>,
    pub map_laws: LawReport,
    pub bijective: bool,
}

pub struct UnitOutcome {
    pub bcat: BehaviourCategory,
    pub gamma: GammaMonad,
    /// Component tables per size `0..=max_size`.
    pub tables: Vec<Vec<usize>>,
    pub report: UnitReport,
}

/// Build the unit `T -> Γ(behaviour category)` over a runner and check
/// its monad-map laws, injectivity and surjectivity at each size.
pub fn unit(
    runner: &dyn Runner,
    max_size: usize,
    cfg: &BehaviourCategoryConfig,
) -> Result<UnitOutcome> {
    let bcat = behaviour_category(runner, cfg)?;
    let gamma = GammaMonad::new(bcat.cat.clone())?;
    let mut tables = Vec::with_capacity(max_size + 1);
    for size in 0..=max_size {
        tables.push(unit_tables(runner, &bcat, &gamma, size)?);
    }

    let map_laws = {
        let map = MonadMap::new(runner.monad(), &gamma, "unit", |a, t| {
            if a.size() < tables.len() {
                Ok(tables[a.size()][t])
            } else {
                unit_tables(runner, &bcat, &gamma, a.size()).map(|tab| tab[t])
            }
        });
        check_monad_map(
            &map,
            &LawCheckConfig {
                max_a: max_size.min(2),
                max_b: max_size.min(2),
                max_c: 0,
                cap: 250_000,
            },
        )
    };

    let mut sizes = Vec::new();
    for (size, table) in tables.iter().enumerate().skip(1) {
        let target = gamma.carrier_len(FinSet(size))?;
        let mut image = table.clone();
        image.sort_unstable();
        image.dedup();
        let injective = image.len() == table.len();
        let surjective = image.len() == target;
        let missing_section = if surjective {
            None
        } else {
            (0..target)
                .find(|s| image.binary_search(s).is_err())
                .map(|s| gamma.describe(FinSet(size), s))
        };
        sizes.push(UnitSizeVerdict {
            size,
            source: table.len(),
            target,
            injective,
            surjective,
            missing_section,
        });
    }
    let bijective = sizes.iter().all(|v| v.injective && v.surjective) && map_laws.passed();
    let report = UnitReport {
        monad: runner.monad().name(),
        sizes,
        map_laws,
        bijective,
    };
    Ok(UnitOutcome {
        bcat,
        gamma,
        tables,
        report,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CounitReport {
    pub objects: usize,
    pub behaviour_objects: usize,
    pub morphisms: usize,
    pub behaviour_morphisms: usize,
    pub objects_bijective: bool,
    pub morphisms_bijective: bool,
    pub retro_laws: LawReport,
    pub bijective: bool,
}

pub struct CounitOutcome {
    pub retro: Retrofunctor,
    pub bcat: BehaviourCategory,
    pub report: CounitReport,
}

fn counit_from_bcat(
    cat: &FinCat,
    gamma: &GammaMonad,
    bcat: &BehaviourCategory,
) -> Result<CounitOutcome> {
    let one = FinSet(1);
    let on_objects: Vec<usize> = (0..cat.objects).map(|c| bcat.block_of[c]).collect();
    let mut lifts = std::collections::BTreeMap::new();
    for c in 0..cat.objects {
        for f in bcat.cat.out(on_objects[c]) {
            let mut lift = None;
            for &member in &bcat.morphisms[f].members {
                let component = gamma.component(one, member, c).1;
                match lift {
                    None => lift = Some(component),
                    Some(l) if l == component => {}
                    Some(l) => {
                        return Err(Error::BoundInsufficient {
                            bound: bcat.arity_used.iter().copied().min().unwrap_or(0),
                            detail: format!(
                                "trace class {f} takes both m{l} and m{component} at object {c}"
                            ),
                        })
                    }
                }
            }
            lifts.insert((c, f), lift.expect("trace classes are nonempty"));
        }
    }
    let retro = Retrofunctor {
        on_objects: on_objects.clone(),
        lifts,
    };
    let retro_laws = check_retrofunctor(&retro, cat, &bcat.cat);

    let mut objects_sorted = on_objects.clone();
    objects_sorted.sort_unstable();
    objects_sorted.dedup();
    let objects_bijective = objects_sorted.len() == cat.objects && cat.objects == bcat.cat.objects;
    // With bijective objects, morphism bijectivity is lift bijectivity
    // over every object.
    let mut morphisms_bijective = cat.morphisms == bcat.cat.morphisms;
    for c in 0..cat.objects {
        let mut images: Vec<usize> = bcat
            .cat
            .out(on_objects[c])
            .iter()
            .map(|&f| retro.lifts[&(c, f)])
            .collect();
        images.sort_unstable();
        images.dedup();
        if images != cat.out(c) {
            morphisms_bijective = false;
        }
    }
    let report = CounitReport {
        objects: cat.objects,
        behaviour_objects: bcat.cat.objects,
        morphisms: cat.morphisms,
        behaviour_morphisms: bcat.cat.morphisms,
        objects_bijective,
        morphisms_bijective,
        bijective: objects_bijective && morphisms_bijective && retro_laws.passed(),
        retro_laws,
    };
    Ok(CounitOutcome {
        retro,
        bcat: bcat.clone(),
        report,
    })
}

/// The counit retrofunctor of a finite category: objects to their
/// behaviours in the sections monad, trace classes lifted to the morphism
/// their sections take. If the trace classes are too coarse at the
/// default bound the closure budget is raised once before failing.
pub fn counit(cat: &FinCat, cfg: &BehaviourCategoryConfig) -> Result<CounitOutcome> {
    let check = cat.check();
    if !check.passed() {
        return Err(Error::CategoryLawViolation(
            check.violations[0].witness.clone(),
        ));
    }
    let gamma = GammaMonad::new(cat.clone())?;
    let mut attempt_cfg = cfg.clone();
    if attempt_cfg.trace.max_arity.is_none() {
        // Outgoing morphisms of any object are realized by sections at
        // arity |morphisms| + 1, so that is where the sweep may stop.
        attempt_cfg.trace.max_arity = Some(cat.morphisms + 1);
    }
    match behaviour_category(&gamma, &attempt_cfg)
        .and_then(|bcat| counit_from_bcat(cat, &gamma, &bcat))
    {
        Ok(outcome) => Ok(outcome),
        Err(Error::BoundInsufficient { .. }) => {
            let mut raised = attempt_cfg.clone();
            raised.trace.seed_budget = raised.trace.seed_budget.saturating_mul(8);
            let bcat = behaviour_category(&gamma, &raised)?;
            counit_from_bcat(cat, &gamma, &bcat)
        }
        Err(e) => Err(e),
    }
}

/// `Γ(ε) ∘ η = id` on the sections of `cat`, elementwise at every size up
/// to the bound.
pub fn triangle_on_sections(
    cat: &FinCat,
    max_size: usize,
    cfg: &BehaviourCategoryConfig,
) -> Result<LawReport> {
    let mut report = LawReport::new(format!(
        "triangle on sections of ({} objects, {} morphisms)",
        cat.objects, cat.morphisms
    ));
    let gamma_c = GammaMonad::new(cat.clone())?;
    let mut attempt_cfg = cfg.clone();
    if attempt_cfg.trace.max_arity.is_none() {
        attempt_cfg.trace.max_arity = Some(cat.morphisms + 1);
    }
    let bcat = behaviour_category(&gamma_c, &attempt_cfg)?;
    let outcome = counit_from_bcat(cat, &gamma_c, &bcat)?;
    let gamma_bc = GammaMonad::new(bcat.cat.clone())?;
    let back = gamma_retro(&outcome.retro, &gamma_c, &gamma_bc);
    for size in 0..=max_size {
        let eta = unit_tables(&gamma_c, &bcat, &gamma_bc, size)?;
        let a = FinSet(size);
        for (s, &image) in eta.iter().enumerate() {
            report.checked += 1;
            let round = back.apply(a, image)?;
            if round != s {
                report.violate(
                    "Γ(ε)∘η = id",
                    format!(
                        "section {} maps to {}",
                        gamma_c.describe(a, s),
                        gamma_c.describe(a, round)
                    ),
                );
            }
        }
    }
    Ok(report)
}

/// The other triangle: `ε at the behaviour category` composed with the
/// behaviour action of the unit is the identity retrofunctor.
pub fn triangle_on_categories(
    runner: &dyn Runner,
    cfg: &BehaviourCategoryConfig,
) -> Result<LawReport> {
    let mut report = LawReport::new("triangle on behaviour categories");
    let bcat_t = behaviour_category(runner, cfg)?;
    let m1 = GammaMonad::new(bcat_t.cat.clone())?;
    let mut inner_cfg = cfg.clone();
    if inner_cfg.trace.max_arity.is_none() {
        inner_cfg.trace.max_arity = Some(bcat_t.cat.morphisms + 1);
    }
    let bcat_2 = behaviour_category(&m1, &inner_cfg)?;
    let eps = counit_from_bcat(&bcat_t.cat, &m1, &bcat_2)?;

    let max_needed = 2;
    let mut tables = Vec::new();
    for size in 0..=max_needed {
        tables.push(unit_tables(runner, &bcat_t, &m1, size)?);
    }
    let eta = MonadMap::new(runner.monad(), &m1, "unit", |a, t| {
        tables
            .get(a.size())
            .map(|tab| tab[t])
            .ok_or_else(|| Error::OutOfRange {
                index: a.size(),
                what: "unit table".into(),
            })
    });
    let (b_eta, b_eta_report) = behaviour_functor_on_maps(&eta, runner, &bcat_t, &m1, &bcat_2)?;
    report.absorb(b_eta_report);

    let composite = retro_compose(&eps.retro, &b_eta, &bcat_t.cat, &bcat_2.cat, &bcat_t.cat)?;
    report.checked += 1;
    if composite != retro_id(&bcat_t.cat) {
        report.violate(
            "ε;B(η) = id",
            "composite retrofunctor differs from the identity",
        );
    }
    Ok(report)
}

/// The contravariant behaviour action of a monad map `γ: T -> S`: a
/// retrofunctor from the behaviour category of `S` to that of `T`.
/// Objects map by matching observable output rows through `γ`; a trace
/// class `[m]` lifts to `[γ(m)]`.
pub fn behaviour_functor_on_maps(
    map: &MonadMap<'_>,
    runner_t: &dyn Runner,
    bcat_t: &BehaviourCategory,
    runner_s: &dyn Runner,
    bcat_s: &BehaviourCategory,
) -> Result<(Retrofunctor, LawReport)> {
    let mut report = LawReport::new(format!("behaviour action of {}", map.label));
    let two = FinSet(2);
    let one = FinSet(1);
    let t2 = map.source.carrier_len(two)?;

    // Precompute T-side observable rows per T-object.
    let mut t_rows: Vec<Vec<usize>> = Vec::with_capacity(bcat_t.cat.objects);
    for &rep in &bcat_t.object_reps {
        let mut row = Vec::with_capacity(t2);
        for t in 0..t2 {
            row.push(runner_t.run(two, t, rep)?.0);
        }
        t_rows.push(row);
    }

    let mut on_objects = Vec::with_capacity(bcat_s.cat.objects);
    for &rep_s in &bcat_s.object_reps {
        let mut s_row = Vec::with_capacity(t2);
        for t in 0..t2 {
            s_row.push(runner_s.run(two, map.apply(two, t)?, rep_s)?.0);
        }
        let matches: Vec<usize> = (0..bcat_t.cat.objects)
            .filter(|&b| t_rows[b] == s_row)
            .collect();
        match matches.as_slice() {
            [unique] => on_objects.push(*unique),
            [] => {
                return Err(Error::AxiomViolation(format!(
                    "no behaviour of {} matches an object of {}",
                    map.source.name(),
                    map.target.name()
                )))
            }
            _ => {
                return Err(Error::AxiomViolation(
                    "behaviour match through the monad map is ambiguous".into(),
                ))
            }
        }
    }

    let mut lifts = std::collections::BTreeMap::new();
    for c in 0..bcat_s.cat.objects {
        for f in bcat_t.cat.out(on_objects[c]) {
            let mut lift = None;
            for &member in &bcat_t.morphisms[f].members {
                let image = map.apply(one, member)?;
                let candidate = bcat_s.t1_class[c][image];
                match lift {
                    None => lift = Some(candidate),
                    Some(l) if l == candidate => {}
                    Some(_) => {
                        return Err(Error::BoundInsufficient {
                            bound: bcat_s.arity_used.iter().copied().min().unwrap_or(0),
                            detail: format!("lift of class {f} is not classwise constant"),
                        })
                    }
                }
            }
            lifts.insert((c, f), lift.expect("classes are nonempty"));
        }
    }
    let retro = Retrofunctor { on_objects, lifts };
    report.absorb(check_retrofunctor(&retro, &bcat_s.cat, &bcat_t.cat));
    Ok((retro, report))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StoneReport {
    pub atoms: usize,
    pub objects: usize,
    pub morphisms: usize,
    pub identities_only: bool,
    pub unit_bijective: Vec<UnitSizeVerdict>,
    pub passed: bool,
}

/// Round trip a finite Boolean algebra through its distributions monad:
/// the behaviour category is discrete on the atoms and the unit is a
/// bijection at every size.
pub fn stone_roundtrip(
    atoms: usize,
    max_size: usize,
    cfg: &BehaviourCategoryConfig,
) -> Result<StoneReport> {
    let dist = DistMonad::new(FinBoolAlg::new(atoms))?;
    let outcome = unit(&dist, max_size, cfg)?;
    let cat = &outcome.bcat.cat;
    let identities_only =
        cat.morphisms == cat.objects && (0..cat.objects).all(|c| cat.out(c) == vec![cat.id[c]]);
    let unit_ok = outcome.report.bijective;
    Ok(StoneReport {
        atoms,
        objects: cat.objects,
        morphisms: cat.morphisms,
        identities_only,
        unit_bijective: outcome.report.sizes,
        passed: identities_only && cat.objects == atoms && unit_ok,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdempotenceReport {
    pub first_sizes: Vec<usize>,
    pub second_sizes: Vec<usize>,
    pub inner_unit_bijective: bool,
    pub passed: bool,
}

/// Apply the construction twice: the sections monad of the behaviour
/// category, then again. One application reaches a fixed point: the unit
/// of the first sections monad is a bijection, and the second monad has
/// the same carriers.
pub fn idempotence_check(
    runner: &dyn Runner,
    max_size: usize,
    cfg: &BehaviourCategoryConfig,
) -> Result<IdempotenceReport> {
    let bcat_1 = behaviour_category(runner, cfg)?;
    let m1 = GammaMonad::new(bcat_1.cat.clone())?;
    let mut inner_cfg = cfg.clone();
    if inner_cfg.trace.max_arity.is_none() {
        inner_cfg.trace.max_arity = Some(bcat_1.cat.morphisms + 1);
    }
    let inner = unit(&m1, max_size, &inner_cfg)?;
    let m2 = GammaMonad::new(inner.bcat.cat.clone())?;
    let mut first_sizes = Vec::new();
    let mut second_sizes = Vec::new();
    for size in 0..=max_size {
        first_sizes.push(m1.carrier_len(FinSet(size))?);
        second_sizes.push(m2.carrier_len(FinSet(size))?);
    }
    let passed = inner.report.bijective && first_sizes == second_sizes;
    Ok(IdempotenceReport {
        first_sizes,
        second_sizes,
        inner_unit_bijective: inner.report.bijective,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behaviour::TermRunner;
    use crate::finmonad::StateMonad;
    use crate::fixtures;

    #[test]
    fn pure_computations_are_hyperaffine() {
        let m = StateMonad::new(2);
        let a = FinSet(2);
        for v in 0..2 {
            let r = m.ret(a, v).unwrap();
            assert!(is_hyperaffine(&m, a, r).unwrap());
        }
    }

    #[test]
    fn state_hyperaffines_are_the_read_only_tables() {
        let m = StateMonad::new(2);
        let a = FinSet(2);
        let hs = hyperaffines(&m, a).unwrap();
        assert_eq!(hs.len(), 4, "|A|^|S| read-only tables");
        for h in hs {
            for s in 0..2 {
                assert_eq!(m.eval(a, h, s).1, s, "state unchanged");
            }
        }
    }

    #[test]
    fn every_distribution_is_hyperaffine() {
        let d = DistMonad::new(FinBoolAlg::new(3)).unwrap();
        let a = FinSet(2);
        assert_eq!(
            hyperaffines(&d, a).unwrap().len(),
            d.carrier_len(a).unwrap()
        );
    }

    #[test]
    fn state_emit_and_flip_decomposes_through_the_diagonal_read() {
        // t = λs.(s, 1−s) factors through the read-only λs.(s,s).
        let m = StateMonad::new(2);
        let a = FinSet(2);
        let t = m.encode(a, |s| (s, 1 - s));
        let diag = m.encode(a, |s| (s, s));
        match hyperaffine_decompose(&m, a, t).unwrap() {
            Decomposition::Unique { hyperaffine, .. } => assert_eq!(hyperaffine, diag),
            other => panic!("expected unique decomposition, got {other:?}"),
        }
    }

    #[test]
    fn free_flip_computations_do_not_decompose() {
        let monad = fixtures::flip_monad(2);
        let a = FinSet(2);
        let flip = monad
            .index_of(
                a,
                &crate::finmonad::Term::node(
                    0,
                    vec![
                        crate::finmonad::Term::Leaf(0),
                        crate::finmonad::Term::Leaf(1),
                    ],
                ),
            )
            .unwrap();
        assert_eq!(
            hyperaffine_decompose(&monad, a, flip).unwrap(),
            Decomposition::NoDecomposition
        );
    }

    #[test]
    fn state_and_distributions_are_hyperaffine_unary() {
        assert!(
            is_hyperaffine_unary(&StateMonad::new(2), 2)
                .unwrap()
                .verdict
        );
        let d = DistMonad::new(FinBoolAlg::new(2)).unwrap();
        assert!(is_hyperaffine_unary(&d, 2).unwrap().verdict);
    }

    #[test]
    fn bounded_free_theory_is_not_hyperaffine_unary() {
        let monad = fixtures::flip_monad(2);
        assert!(!is_hyperaffine_unary(&monad, 2).unwrap().verdict);
    }

    #[test]
    fn sections_monads_decompose_uniquely() {
        for cat in [FinCat::chaotic(2), FinCat::discrete(3), FinCat::cyclic(2)] {
            let g = GammaMonad::new(cat).unwrap();
            assert!(is_hyperaffine_unary(&g, 2).unwrap().verdict);
        }
    }

    #[test]
    fn affine_sections_are_hyperaffine() {
        // In a sections monad the first scrying equation implies the
        // second: check by enumeration.
        for cat in [FinCat::chaotic(2), FinCat::discrete(3), FinCat::cyclic(3)] {
            let g = GammaMonad::new(cat).unwrap();
            let a = FinSet(2);
            for t in 0..g.carrier_len(a).unwrap() {
                let affine = a.elements().all(|v| {
                    let pure = g.ret(a, v).unwrap();
                    skip(&g, a, a, t, pure).unwrap() == pure
                });
                if affine {
                    assert!(is_hyperaffine(&g, a, t).unwrap());
                }
            }
        }
    }

    #[test]
    fn hyperaffine_sections_have_identity_transitions() {
        let g = GammaMonad::new(FinCat::chaotic(2)).unwrap();
        let a = FinSet(2);
        for h in hyperaffines(&g, a).unwrap() {
            for c in 0..2 {
                let (_, f) = g.component(a, h, c);
                assert_eq!(f, g.category().id[c]);
            }
        }
    }

    #[test]
    fn h2_of_state_is_the_powerset_of_states() {
        let m = StateMonad::new(2);
        let (h2, report) = h2_boolean_algebra(&m).unwrap();
        report.expect_clean();
        assert_eq!(h2.elements.len(), 4);
    }

    #[test]
    fn h2_of_distributions_is_the_algebra() {
        let d = DistMonad::new(FinBoolAlg::new(3)).unwrap();
        let (h2, report) = h2_boolean_algebra(&d).unwrap();
        report.expect_clean();
        assert_eq!(h2.elements.len(), 8);
    }

    #[test]
    fn h2_regions_partition() {
        // {[h -> a]} for h hyperaffine at size 2: disjoint, join top.
        let m = StateMonad::new(2);
        let (h2, _) = h2_boolean_algebra(&m).unwrap();
        let two = FinSet(2);
        for &h in &h2.elements {
            // [h -> 1] = h itself; [h -> 0] = ¬h.
            let region1 = h;
            let region0 = h2.not(h).unwrap();
            assert_eq!(h2.meet(region0, region1).unwrap(), h2.bot);
            assert_eq!(h2.join(region0, region1).unwrap(), h2.top);
            let _ = two;
        }
    }

    #[test]
    fn unit_is_bijective_for_state_two() {
        let m = StateMonad::new(2);
        let outcome = unit(&m, 2, &BehaviourCategoryConfig::default()).unwrap();
        assert!(outcome.report.bijective, "{:?}", outcome.report.sizes);
        outcome.report.map_laws.expect_clean();
    }

    #[test]
    fn unit_is_not_surjective_for_bounded_flip() {
        let monad = fixtures::flip_monad(2);
        let comodel = fixtures::four_stream_comodel();
        let runner = TermRunner::new(&monad, &comodel).unwrap();
        let outcome = unit(&runner, 2, &BehaviourCategoryConfig::default()).unwrap();
        let v2 = &outcome.report.sizes[1];
        assert!(v2.injective);
        assert!(!v2.surjective);
        assert!(v2.missing_section.is_some());
    }

    #[test]
    fn counit_is_bijective_on_small_categories() {
        for cat in [FinCat::discrete(3), FinCat::chaotic(2), FinCat::cyclic(2)] {
            let outcome = counit(&cat, &BehaviourCategoryConfig::default()).unwrap();
            assert!(outcome.report.bijective, "{:?}", outcome.report);
            outcome.report.retro_laws.expect_clean();
        }
    }

    #[test]
    fn counit_is_bijective_on_a_parallel_pair() {
        // Two objects with a parallel pair of morphisms between them:
        // morphisms id0, id1, f, g with f, g : 0 -> 1.
        use std::collections::BTreeMap;
        let mut comp = BTreeMap::new();
        comp.insert((0, 0), 0);
        comp.insert((1, 1), 1);
        comp.insert((0, 2), 2);
        comp.insert((2, 1), 2);
        comp.insert((0, 3), 3);
        comp.insert((3, 1), 3);
        let cat = FinCat::new(2, vec![0, 1, 0, 0], vec![0, 1, 1, 1], vec![0, 1], comp).unwrap();
        cat.check().expect_clean();
        let outcome = counit(&cat, &BehaviourCategoryConfig::default()).unwrap();
        assert!(outcome.report.bijective, "{:?}", outcome.report);
    }

    #[test]
    fn triangle_holds_on_chaotic_and_discrete() {
        for cat in [FinCat::chaotic(2), FinCat::discrete(3)] {
            triangle_on_sections(&cat, 2, &BehaviourCategoryConfig::default())
                .unwrap()
                .expect_clean();
        }
    }

    #[test]
    fn dual_triangle_holds_for_state() {
        let m = StateMonad::new(2);
        triangle_on_categories(&m, &BehaviourCategoryConfig::default())
            .unwrap()
            .expect_clean();
    }

    #[test]
    fn behaviour_action_of_identity_is_identity() {
        let m = StateMonad::new(2);
        let cfg = BehaviourCategoryConfig::default();
        let bcat = behaviour_category(&m, &cfg).unwrap();
        let bcat2 = behaviour_category(&m, &cfg).unwrap();
        let id_map = MonadMap::identity(&m);
        let (retro, report) = behaviour_functor_on_maps(&id_map, &m, &bcat, &m, &bcat2).unwrap();
        report.expect_clean();
        assert_eq!(retro, retro_id(&bcat.cat));
    }

    #[test]
    fn read_only_state_inclusion_collapses_transitions() {
        // Distributions on two atoms include into state on two cells as
        // the read-only computations; the induced action collapses every
        // transition of the state behaviour category to the identity.
        let dist = DistMonad::new(FinBoolAlg::new(2)).unwrap();
        let state = StateMonad::new(2);
        let include = MonadMap::new(&dist, &state, "read-only inclusion", |a, h| {
            Ok(state.encode(a, |s| (dist.label(a, h, s), s)))
        });
        check_monad_map(&include, &LawCheckConfig::sizes(2, 2, 0)).expect_clean();
        let cfg = BehaviourCategoryConfig::default();
        let bcat_dist = behaviour_category(&dist, &cfg).unwrap();
        let bcat_state = behaviour_category(&state, &cfg).unwrap();
        let (retro, report) =
            behaviour_functor_on_maps(&include, &dist, &bcat_dist, &state, &bcat_state).unwrap();
        report.expect_clean();
        for ((_, _), &lift) in retro.lifts.iter() {
            assert!(bcat_state.cat.id.contains(&lift));
        }
    }

    #[test]
    fn behaviour_action_is_functorial_on_a_composable_pair() {
        // dist(2) -> state(2) -> state(2) with the identity on top: the
        // action of the composite equals the composite of the actions.
        let dist = DistMonad::new(FinBoolAlg::new(2)).unwrap();
        let state = StateMonad::new(2);
        let include = MonadMap::new(&dist, &state, "read-only inclusion", |a, h| {
            Ok(state.encode(a, |s| (dist.label(a, h, s), s)))
        });
        let ident = MonadMap::identity(&state);
        let composite = MonadMap::new(&dist, &state, "composite", |a, h| {
            ident.apply(a, include.apply(a, h)?)
        });
        let cfg = BehaviourCategoryConfig::default();
        let bcat_dist = behaviour_category(&dist, &cfg).unwrap();
        let bcat_state = behaviour_category(&state, &cfg).unwrap();
        let bcat_state2 = behaviour_category(&state, &cfg).unwrap();
        let (b_ident, _) =
            behaviour_functor_on_maps(&ident, &state, &bcat_state, &state, &bcat_state2).unwrap();
        let (b_include, _) =
            behaviour_functor_on_maps(&include, &dist, &bcat_dist, &state, &bcat_state).unwrap();
        let (b_composite, _) =
            behaviour_functor_on_maps(&composite, &dist, &bcat_dist, &state, &bcat_state2).unwrap();
        let chained = retro_compose(
            &b_ident,
            &b_include,
            &bcat_state2.cat,
            &bcat_state.cat,
            &bcat_dist.cat,
        )
        .unwrap();
        assert_eq!(chained, b_composite);
    }

    #[test]
    fn triangle_degenerates_gracefully_on_a_point() {
        triangle_on_sections(&FinCat::discrete(1), 2, &BehaviourCategoryConfig::default())
            .unwrap()
            .expect_clean();
    }

    #[test]
    fn stone_roundtrip_small_algebras() {
        for atoms in 1..=3 {
            let report = stone_roundtrip(atoms, 2, &BehaviourCategoryConfig::default()).unwrap();
            assert!(report.passed, "{report:?}");
            assert_eq!(report.objects, atoms);
        }
    }

    #[test]
    fn idempotence_for_state() {
        let m = StateMonad::new(2);
        let report = idempotence_check(&m, 2, &BehaviourCategoryConfig::default()).unwrap();
        assert!(report.passed, "{report:?}");
        assert_eq!(
            report.first_sizes,
            vec![0, 4, 16],
            "no sections at the empty output type"
        );
    }

    #[test]
    fn idempotence_collapses_the_commutative_theory() {
        let monad = crate::finmonad::commutative_theory(2);
        let empty = crate::comodel::Comodel::empty(monad.signature().clone());
        let runner = TermRunner::new(&monad, &empty).unwrap();
        let report = idempotence_check(&runner, 2, &BehaviourCategoryConfig::default()).unwrap();
        assert!(report.passed);
        assert_eq!(report.first_sizes, vec![1, 1, 1], "terminal monad");
    }
}
