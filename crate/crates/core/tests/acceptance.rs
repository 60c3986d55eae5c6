//! Acceptance suite: one test per shipped guarantee, each printing a
//! pass/fail line and holding a wall-clock budget.
//!
//! Run with `cargo test -p finstone --test acceptance -- --nocapture` to
//! see the per-criterion lines.

use std::time::{Duration, Instant};

use finstone::behaviour::{behaviour_category, BehaviourCategoryConfig, TermRunner, TraceConfig};
use finstone::boolalg::{
    check_bset, etale_opens, free_bset, germs, sheaf_of_transitions, BSetCheckConfig, DistMonad,
    FinBoolAlg, SheafConfig,
};
use finstone::comodel::{enumerate_comodels, Comodel};
use finstone::duality::{
    counit, h2_boolean_algebra, hyperaffine_decompose, idempotence_check, is_hyperaffine,
    stone_roundtrip, triangle_on_sections, unit, Decomposition,
};
use finstone::finmonad::{
    check_monad_laws, commutative_theory, fail_theory, skip, FinMonad, LawCheckConfig, StateMonad,
    Term,
};
use finstone::finset::FinSet;
use finstone::fixtures;
use finstone::sections::scry::{
    scry_bind, scry_from_term, scry_hyperaffine_part, scry_ret, ScryTree,
};
use finstone::sections::GammaMonad;
use finstone::topcat::{random_category, FinCat};

struct Criterion {
    number: usize,
    name: &'static str,
    budget: Duration,
    started: Instant,
}

impl Criterion {
    fn start(number: usize, name: &'static str, budget_secs: u64) -> Criterion {
        Criterion {
            number,
            name,
            budget: Duration::from_secs(budget_secs),
            started: Instant::now(),
        }
    }

    fn pass(self) {
        let elapsed = self.started.elapsed();
        println!(
            "criterion {:>2}: PASS  ({:>8.3}s / {}s)  {}",
            self.number,
            elapsed.as_secs_f64(),
            self.budget.as_secs(),
            self.name
        );
        assert!(
            elapsed <= self.budget,
            "criterion {} exceeded its {}s budget: {:.3}s",
            self.number,
            self.budget.as_secs(),
            elapsed.as_secs_f64()
        );
    }
}

#[test]
fn criterion_01_state_behaviour_category_is_chaotic() {
    let c = Criterion::start(1, "state behaviour category on two cells", 1);
    let m = StateMonad::new(2);
    let bc = behaviour_category(&m, &BehaviourCategoryConfig::default()).unwrap();
    assert_eq!(bc.cat.objects, 2);
    assert_eq!(bc.cat.morphisms, 4);
    for s in 0..2 {
        for t in 0..2 {
            assert_eq!(
                bc.cat.hom(s, t).len(),
                1,
                "hom({s},{t}) must be a singleton"
            );
        }
    }
    bc.law_report.expect_clean();
    c.pass();
}

#[test]
fn criterion_02_scrying_tables_and_factorization() {
    let c = Criterion::start(2, "scrying: worked table and look-ahead factorization", 1);
    // b(a0, b(b(a1, a2), a3))
    let term = Term::node(
        0,
        vec![
            Term::Leaf(0),
            Term::node(
                0,
                vec![
                    Term::node(0, vec![Term::Leaf(1), Term::Leaf(2)]),
                    Term::Leaf(3),
                ],
            ),
        ],
    );
    let section = scry_from_term(&term, 4).unwrap();
    assert_eq!(
        section.table(),
        "{0 -> (1,a0); 100 -> (3,a1); 101 -> (3,a2); 11 -> (2,a3)}"
    );
    assert_eq!(
        section.assignments(),
        vec![
            ("0".into(), 1, 0),
            ("100".into(), 3, 1),
            ("101".into(), 3, 2),
            ("11".into(), 2, 3),
        ]
    );

    // The look-ahead section {0 -> (0,a0); 10 -> (1,a1); 11 -> (1,a2)}
    // satisfies s = scry(s) >>= λa. s ⊳ return a, bit-exactly.
    let look_ahead = ScryTree::node(
        ScryTree::leaf(0, 0),
        ScryTree::node(ScryTree::leaf(1, 1), ScryTree::leaf(1, 2)),
    );
    let bar = scry_hyperaffine_part(&look_ahead);
    assert_eq!(
        bar.assignments(),
        vec![("0".into(), 0, 0), ("10".into(), 0, 1), ("11".into(), 0, 2)]
    );
    let rebuilt = scry_bind(&bar, |a| scry_bind(&look_ahead, |_| scry_ret(a)));
    assert_eq!(rebuilt, look_ahead);
    c.pass();
}

#[test]
fn criterion_03_classical_stone_duality() {
    let c = Criterion::start(3, "distributions monads against discrete categories", 10);
    for atoms in 1..=4 {
        let report = stone_roundtrip(atoms, 2, &BehaviourCategoryConfig::default()).unwrap();
        assert!(report.passed, "atoms={atoms}: {report:?}");
        assert_eq!(report.objects, atoms);
        assert_eq!(report.morphisms, atoms, "identity transitions only");
        assert!(report.identities_only);
        for verdict in &report.unit_bijective {
            let expected = verdict.size.pow(atoms as u32);
            assert_eq!(verdict.source, expected, "|A|^atoms computations");
            assert_eq!(verdict.target, expected, "|A|^atoms sections");
            assert!(verdict.injective && verdict.surjective);
        }
    }
    c.pass();
}

#[test]
fn criterion_04_unit_iso_on_state_and_gap_on_free_flip() {
    let c = Criterion::start(
        4,
        "unit bijective for state; a scry escapes the free theory",
        30,
    );
    for states in [2, 3] {
        let m = StateMonad::new(states);
        let outcome = unit(&m, 2, &BehaviourCategoryConfig::default()).unwrap();
        assert!(
            outcome.report.bijective,
            "state[{states}]: {:?}",
            outcome.report.sizes
        );
        outcome.report.map_laws.expect_clean();
    }

    let monad = fixtures::flip_monad(2);
    let comodel = fixtures::four_stream_comodel();
    let runner = TermRunner::new(&monad, &comodel).unwrap();
    let outcome = unit(&runner, 2, &BehaviourCategoryConfig::default()).unwrap();
    let verdict = &outcome.report.sizes[1];
    assert!(verdict.injective);
    assert!(
        !verdict.surjective,
        "the bounded theory cannot fill the sections monad"
    );
    assert!(verdict.missing_section.is_some());
    outcome.report.map_laws.expect_clean();

    // The explicit counterexample: output the head digit while taking only
    // identity transitions. Any term that reads a digit must consume it,
    // so this section is outside the unit's image.
    let a = FinSet(2);
    let scry_section = outcome.gamma.encode(a, |object| {
        let rep = outcome.bcat.object_reps[object];
        let first_digit = comodel.coop(0, rep).0;
        (first_digit, outcome.bcat.cat.id[object])
    });
    assert!(
        !outcome.tables[2].contains(&scry_section),
        "scry-style section must not be hit by the unit"
    );
    c.pass();
}

#[test]
fn criterion_05_counit_iso_on_small_and_random_categories() {
    let c = Criterion::start(5, "counit bijective on fixed and 100 random categories", 60);
    for cat in [FinCat::discrete(3), FinCat::chaotic(2)] {
        let outcome = counit(&cat, &BehaviourCategoryConfig::default()).unwrap();
        assert!(outcome.report.bijective, "{:?}", outcome.report);
        outcome.report.retro_laws.expect_clean();
    }
    let cfg = BehaviourCategoryConfig {
        trace: TraceConfig {
            max_arity: None,
            seed_budget: 1 << 16,
        },
        algebra_depth: None,
    };
    for seed in 0..100 {
        let cat = random_category(seed, 3, 7);
        let outcome = counit(&cat, &cfg).unwrap();
        assert!(
            outcome.report.bijective,
            "seed {seed} ({} objects, {} morphisms): {:?}",
            cat.objects, cat.morphisms, outcome.report
        );
        outcome.report.retro_laws.expect_clean();
    }
    c.pass();
}

#[test]
fn criterion_06_degenerate_theories_collapse_idempotently() {
    let c = Criterion::start(
        6,
        "commutative and fail theories collapse to the terminal monad",
        10,
    );
    let commutative = commutative_theory(2);
    let fail = fail_theory(2);
    for (monad, label) in [(&commutative, "commutative"), (&fail, "fail")] {
        for states in 1..=2 {
            let found =
                enumerate_comodels(monad.signature(), monad.equations(), states, 1 << 20).unwrap();
            assert!(
                found.is_empty(),
                "{label} theory has no runner on {states} states"
            );
        }
        let empty = Comodel::empty(monad.signature().clone());
        let runner = TermRunner::new(monad, &empty).unwrap();
        let report = idempotence_check(&runner, 2, &BehaviourCategoryConfig::default()).unwrap();
        assert_eq!(report.first_sizes, vec![1, 1, 1], "{label}: terminal monad");
        assert_eq!(
            report.second_sizes,
            vec![1, 1, 1],
            "{label}: still terminal"
        );
        assert!(
            report.inner_unit_bijective && report.passed,
            "{label}: {report:?}"
        );
    }
    // A hyperaffine-unary fixture is already a fixed point.
    let m = StateMonad::new(2);
    let report = idempotence_check(&m, 2, &BehaviourCategoryConfig::default()).unwrap();
    assert!(report.passed, "{report:?}");
    assert_eq!(report.first_sizes, report.second_sizes);
    c.pass();
}

#[test]
fn criterion_07_law_suites() {
    let c = Criterion::start(7, "monad, B-set, étale and germ law suites", 60);
    // Monad laws for the built-in monads, exhaustively at (2,2,2) with
    // carrier bounds that keep the products enumerable.
    let state = StateMonad::new(2);
    let dist = DistMonad::new(FinBoolAlg::new(3)).unwrap();
    let flip = fixtures::flip_monad(1);
    let commutative = commutative_theory(1);
    let fail = fail_theory(2);
    let monads: [&dyn FinMonad; 5] = [&state, &dist, &flip, &commutative, &fail];
    for monad in monads {
        let report = check_monad_laws(monad, &LawCheckConfig::sizes(2, 2, 2));
        assert!(!report.partial, "{} must be exhaustive", monad.name());
        report.expect_clean();
    }
    // Deeper term universes, exhaustively at unit size.
    for monad in [&fixtures::flip_monad(2), &commutative_theory(2)] {
        let report = check_monad_laws(monad, &LawCheckConfig::sizes(1, 1, 1));
        assert!(!report.partial);
        report.expect_clean();
    }

    // B-set and switch axioms for free B-sets at |A| <= 2, atoms <= 3.
    for generators in 1..=2 {
        for atoms in 1..=3 {
            let f = free_bset(generators, FinBoolAlg::new(atoms)).unwrap();
            let report = check_bset(&f.bset, &BSetCheckConfig::default());
            assert!(
                !report.partial,
                "free({generators},{atoms}) must be exhaustive"
            );
            report.expect_clean();

            // Étale basis decomposition and germ count at the same sizes.
            let etale = etale_opens(&f.bset, 1 << 22).unwrap();
            etale.report.expect_clean();
            let g = germs(&f.bset);
            assert_eq!(etale.germs.total(), g.counts.iter().sum::<usize>());
            assert_eq!(g.counts, vec![generators; atoms], "free germs per atom");
        }
    }
    c.pass();
}

#[test]
fn criterion_08_sheaf_of_transitions_matches_trace_equivalence() {
    let c = Criterion::start(
        8,
        "congruence closure against pointwise trace equivalence",
        30,
    );
    let m = StateMonad::new(2);
    // sheaf_of_transitions verifies the pointwise comparison internally
    // and fails loudly on mismatch.
    let outcome = sheaf_of_transitions(&m, &SheafConfig::default()).unwrap();
    assert_eq!(outcome.algebra.atoms(), 2);
    assert_eq!(
        outcome.free.bset.carrier, 16,
        "labelings of T1 = S^S over two atoms"
    );
    assert_eq!(outcome.germ_counts, vec![2, 2]);

    // Germ total equals the number of transitions of the behaviour
    // category, computed independently.
    let bc = behaviour_category(&m, &BehaviourCategoryConfig::default()).unwrap();
    assert_eq!(outcome.germ_counts.iter().sum::<usize>(), bc.cat.morphisms);
    assert_eq!(bc.cat.morphisms, 4);
    c.pass();
}

#[test]
fn criterion_09_hyperaffine_structure() {
    let c = Criterion::start(
        9,
        "unique scry factorizations and the hyperaffine algebra",
        30,
    );
    let fixtures: Vec<(String, GammaMonad)> = [
        ("chaotic(2)".to_string(), FinCat::chaotic(2)),
        ("discrete(3)".to_string(), FinCat::discrete(3)),
        ("cyclic(2)".to_string(), FinCat::cyclic(2)),
        ("random(1)".to_string(), random_category(1, 3, 7)),
        ("random(2)".to_string(), random_category(2, 3, 7)),
        ("random(3)".to_string(), random_category(3, 3, 7)),
    ]
    .into_iter()
    .map(|(name, cat)| (name, GammaMonad::new(cat).unwrap()))
    .collect();
    for (name, gamma) in &fixtures {
        for size in 1..=2 {
            let a = FinSet(size);
            for t in 0..gamma.carrier_len(a).unwrap() {
                match hyperaffine_decompose(gamma, a, t).unwrap() {
                    Decomposition::Unique { .. } => {}
                    other => panic!("{name}: section {t} at {a}: {other:?}"),
                }
                // Affine implies hyperaffine in a sections monad.
                let affine = a.elements().all(|v| {
                    let pure = gamma.ret(a, v).unwrap();
                    skip(gamma, a, a, t, pure).unwrap() == pure
                });
                if affine {
                    assert!(is_hyperaffine(gamma, a, t).unwrap(), "{name}: section {t}");
                }
            }
        }
    }
    let state = StateMonad::new(2);
    let (h2_state, report_state) = h2_boolean_algebra(&state).unwrap();
    report_state.expect_clean();
    assert_eq!(h2_state.elements.len(), 4);
    let dist = DistMonad::new(FinBoolAlg::new(3)).unwrap();
    let (h2_dist, report_dist) = h2_boolean_algebra(&dist).unwrap();
    report_dist.expect_clean();
    assert_eq!(h2_dist.elements.len(), 8);
    c.pass();
}

#[test]
fn criterion_10_triangle_identities() {
    let c = Criterion::start(10, "triangle identities on section fixtures", 10);
    for cat in [FinCat::chaotic(2), FinCat::discrete(3)] {
        let report = triangle_on_sections(&cat, 2, &BehaviourCategoryConfig::default()).unwrap();
        assert!(!report.partial);
        report.expect_clean();
        assert!(report.checked > 0);
    }
    c.pass();
}
