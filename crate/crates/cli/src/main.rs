//! finstone: build behaviour categories from finite theories and runners,
//! rebuild monads from categories via sections, and check the comparison
//! maps between the two.
//!
//! Exit codes: 0 = all verdicts pass, 1 = a mathematical verdict failed,
//! 2 = input or parse error.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use finstone::behaviour::{
    behaviour_category, BehaviourCategory, BehaviourCategoryConfig, Runner, TermRunner, TraceConfig,
};
use finstone::boolalg::{DistMonad, FinBoolAlg};
use finstone::comodel::Comodel;
use finstone::duality;
use finstone::error::Error;
use finstone::finmonad::{check_monad_laws, FinMonad, LawCheckConfig, StateMonad, TermMonad};
use finstone::finset::FinSet;
use finstone::fixtures;
use finstone::formats::{
    behaviour_category_json, BooleanSpec, CategorySpec, ComodelSpec, TermJson, TheorySpec,
};
use finstone::sections::scry;
use finstone::sections::GammaMonad;
use finstone::topcat::{random_category, FinCat};

#[derive(Parser)]
#[command(name = "finstone", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
    Dot,
}

#[derive(Args, Clone)]
struct Bounds {
    /// Carrier depth bound for term theories.
    #[arg(long, default_value_t = 2)]
    depth: usize,
    /// Largest arity seeding the trace-equivalence closure
    /// (default: the unary carrier size).
    #[arg(long)]
    max_arity: Option<usize>,
    /// Cap on closure seed pairs per behaviour and arity.
    #[arg(long, default_value_t = 1 << 21)]
    closure_depth: u64,
    /// Seed for generated fixtures (random categories).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker count; accepted for compatibility, execution is sequential
    /// and outputs do not depend on it.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl Bounds {
    fn validate(&self) -> Result<(), Error> {
        if self.jobs == 0 {
            return Err(Error::InvalidSpec("--jobs must be at least 1".into()));
        }
        Ok(())
    }

    fn bcat_config(&self) -> BehaviourCategoryConfig {
        BehaviourCategoryConfig {
            trace: TraceConfig {
                max_arity: self.max_arity,
                seed_budget: self.closure_depth,
            },
            algebra_depth: Some(self.depth),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the law suite for a spec file.
    Check {
        #[command(subcommand)]
        kind: CheckKind,
    },
    /// Build the behaviour category of a theory over a runner.
    BehaviourCat {
        #[command(flatten)]
        input: RunnerInput,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        out: OutputFormat,
    },
    /// Enumerate the sections monad of a category.
    Sections {
        #[command(flatten)]
        cat: CategoryInput,
        /// Output type size.
        #[arg(long, default_value_t = 2)]
        arity: usize,
        /// Also run the monad law suite.
        #[arg(long)]
        laws: bool,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// The comparison maps: unit, counit, triangle, idempotence, stone.
    Duality {
        #[command(subcommand)]
        verb: DualityVerb,
    },
    /// Shorthand for `duality stone`.
    Stone {
        #[arg(long)]
        atoms: usize,
        #[arg(long, default_value_t = 2)]
        arity: usize,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        out: OutputFormat,
    },
    /// Print a section of the free binary theory as an assignment table.
    Scry {
        /// Term file ({"op":...,"children":[...]} / {"leaf":k}).
        #[arg(long, conflicts_with = "tree")]
        term: Option<PathBuf>,
        /// Tree file ({"leaf":[n,a]} / {"node":[l,r]}).
        #[arg(long)]
        tree: Option<PathBuf>,
        /// Output alphabet size for term input.
        #[arg(long, default_value_t = 4)]
        alphabet: usize,
        /// Evaluate on a stream prefix of 0/1 digits.
        #[arg(long)]
        eval: Option<String>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        out: OutputFormat,
    },
}

#[derive(Subcommand)]
enum CheckKind {
    /// Theory spec: monad laws of the presented term monad.
    Theory {
        file: PathBuf,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Comodel spec against a theory: equations at every state.
    Comodel {
        file: PathBuf,
        #[arg(long)]
        theory: PathBuf,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Category spec: identity, composition and associativity laws.
    Category { file: PathBuf },
    /// Boolean algebra spec: non-degeneracy and lattice sanity.
    Boolean { file: PathBuf },
}

#[derive(Subcommand)]
enum DualityVerb {
    /// The map from a monad into the sections of its behaviour category.
    Unit {
        #[command(flatten)]
        input: RunnerInput,
        #[arg(long, default_value_t = 2)]
        arity: usize,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        out: OutputFormat,
    },
    /// The retrofunctor from a category to the behaviour category of its
    /// sections monad; expected bijective for every finite category.
    Counit {
        #[command(flatten)]
        cat: CategoryInput,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        out: OutputFormat,
    },
    /// Both triangle identities over a category fixture.
    Triangle {
        #[command(flatten)]
        cat: CategoryInput,
        #[arg(long, default_value_t = 2)]
        arity: usize,
        #[command(flatten)]
        bounds: Bounds,
    },
    /// Apply the construction twice and compare.
    Idempotence {
        #[command(flatten)]
        input: RunnerInput,
        #[arg(long, default_value_t = 2)]
        arity: usize,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        out: OutputFormat,
    },
    /// Round-trip a Boolean algebra through its distributions monad.
    Stone {
        #[arg(long)]
        atoms: usize,
        #[arg(long, default_value_t = 2)]
        arity: usize,
        #[command(flatten)]
        bounds: Bounds,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        out: OutputFormat,
    },
}

/// A monad with a runner: either a builtin fixture or theory+comodel files.
#[derive(Args, Clone)]
struct RunnerInput {
    /// Builtin fixture: state:N, dist:N, or flip[:DEPTH].
    #[arg(long, conflicts_with_all = ["theory", "comodel"])]
    builtin: Option<String>,
    /// Theory spec file.
    #[arg(long, requires = "comodel")]
    theory: Option<PathBuf>,
    /// Comodel spec file.
    #[arg(long, requires = "theory")]
    comodel: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct CategoryInput {
    /// Category spec file.
    #[arg(long, conflicts_with = "builtin_cat")]
    category: Option<PathBuf>,
    /// Builtin category: discrete:N, chaotic:N, cyclic:N, random[:SEED].
    #[arg(long)]
    builtin_cat: Option<String>,
}

enum Verdict {
    Pass,
    Fail,
}

type CmdResult = Result<Verdict, Error>;

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, Error> {
    let data = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&data).map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))
}

enum BuiltRunner {
    State(StateMonad),
    Dist(DistMonad),
    Term(Box<TermMonad>, Box<Comodel>),
}

impl BuiltRunner {
    fn with<R>(&self, f: impl FnOnce(&dyn Runner) -> R) -> R {
        match self {
            BuiltRunner::State(m) => f(m),
            BuiltRunner::Dist(m) => f(m),
            BuiltRunner::Term(m, w) => {
                let runner = TermRunner::new(m, w).expect("signature agreement checked at build");
                f(&runner)
            }
        }
    }
}

fn parse_builtin(name: &str, depth: usize) -> Result<BuiltRunner, Error> {
    let parts: Vec<&str> = name.split(':').collect();
    match parts.as_slice() {
        ["state", n] => {
            let states: usize = n
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("bad state size `{n}`")))?;
            if states == 0 {
                return Err(Error::InvalidSpec("state:0 has no runner".into()));
            }
            Ok(BuiltRunner::State(StateMonad::new(states)))
        }
        ["dist", n] => {
            let atoms: usize = n
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("bad atom count `{n}`")))?;
            Ok(BuiltRunner::Dist(DistMonad::new(FinBoolAlg::new(atoms))?))
        }
        ["flip"] => Ok(BuiltRunner::Term(
            Box::new(fixtures::flip_monad(depth)),
            Box::new(fixtures::four_stream_comodel()),
        )),
        ["flip", d] => {
            let depth: usize = d
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("bad depth `{d}`")))?;
            Ok(BuiltRunner::Term(
                Box::new(fixtures::flip_monad(depth)),
                Box::new(fixtures::four_stream_comodel()),
            ))
        }
        _ => Err(Error::InvalidSpec(format!(
            "unknown builtin `{name}` (expected state:N, dist:N, flip[:D])"
        ))),
    }
}

fn build_runner(input: &RunnerInput, bounds: &Bounds) -> Result<BuiltRunner, Error> {
    bounds.validate()?;
    if let Some(name) = &input.builtin {
        return parse_builtin(name, bounds.depth);
    }
    match (&input.theory, &input.comodel) {
        (Some(theory), Some(comodel)) => {
            let theory: TheorySpec = read_json(theory)?;
            let monad = theory.build(bounds.depth)?;
            let spec: ComodelSpec = read_json(comodel)?;
            let w = spec.build(monad.signature())?;
            Ok(BuiltRunner::Term(Box::new(monad), Box::new(w)))
        }
        _ => Err(Error::InvalidSpec(
            "provide either --builtin or both --theory and --comodel".into(),
        )),
    }
}

fn build_category(input: &CategoryInput, bounds: &Bounds) -> Result<FinCat, Error> {
    bounds.validate()?;
    if let Some(path) = &input.category {
        let spec: CategorySpec = read_json(path)?;
        return spec.build();
    }
    let name = input
        .builtin_cat
        .as_deref()
        .ok_or_else(|| Error::InvalidSpec("provide --category or --builtin-cat".into()))?;
    let parts: Vec<&str> = name.split(':').collect();
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| Error::InvalidSpec(format!("bad size `{s}`")))
    };
    match parts.as_slice() {
        ["discrete", n] => Ok(FinCat::discrete(parse(n)?)),
        ["chaotic", n] => Ok(FinCat::chaotic(parse(n)?)),
        ["cyclic", n] => Ok(FinCat::cyclic(parse(n)?)),
        ["random"] => Ok(logged_random_category(bounds.seed)),
        ["random", s] => {
            let seed: u64 = s
                .parse()
                .map_err(|_| Error::InvalidSpec(format!("bad seed `{s}`")))?;
            Ok(logged_random_category(seed))
        }
        _ => Err(Error::InvalidSpec(format!(
            "unknown builtin category `{name}` (discrete:N, chaotic:N, cyclic:N, random[:SEED])"
        ))),
    }
}

/// Seeded fixtures announce themselves on stderr, keeping stdout clean
/// for JSON consumers.
fn logged_random_category(seed: u64) -> FinCat {
    let cat = random_category(seed, 3, 7);
    eprintln!(
        "# fixture: random category seed={seed} ({} objects, {} morphisms)",
        cat.objects, cat.morphisms
    );
    cat
}

fn print_behaviour_cat(bc: &BehaviourCategory, out: OutputFormat) -> Result<(), Error> {
    match out {
        OutputFormat::Dot => print!("{}", bc.to_dot()),
        OutputFormat::Json => {
            let json = serde_json::to_string_pretty(&behaviour_category_json(bc))
                .map_err(|e| Error::InvalidSpec(e.to_string()))?;
            println!("{json}");
        }
        OutputFormat::Text => {
            println!(
                "behaviour category: {} objects, {} morphisms",
                bc.cat.objects, bc.cat.morphisms
            );
            for (i, label) in bc.object_labels.iter().enumerate() {
                println!("  object {i}: {label}");
            }
            for f in 0..bc.cat.morphisms {
                println!(
                    "  morphism {f}: {} -> {}  [{}]",
                    bc.cat.src[f], bc.cat.tgt[f], bc.morphisms[f].label
                );
            }
            if let Some(alg) = &bc.object_algebra {
                println!(
                    "  observable algebra: {} generating regions, {} atoms",
                    alg.generators.len(),
                    alg.blocks.len()
                );
            }
        }
    }
    Ok(())
}

fn emit<T: serde::Serialize>(report: &T, out: OutputFormat, text: String) -> Result<(), Error> {
    match out {
        OutputFormat::Json => {
            let json = serde_json::to_string_pretty(report)
                .map_err(|e| Error::InvalidSpec(e.to_string()))?;
            println!("{json}");
        }
        _ => println!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Check { kind } => run_check(kind),
        Command::BehaviourCat { input, bounds, out } => {
            let built = build_runner(&input, &bounds)?;
            let bc = built.with(|runner| behaviour_category(runner, &bounds.bcat_config()))?;
            print_behaviour_cat(&bc, out)?;
            Ok(if bc.law_report.passed() {
                Verdict::Pass
            } else {
                Verdict::Fail
            })
        }
        Command::Sections {
            cat,
            arity,
            laws,
            bounds,
        } => {
            let cat = build_category(&cat, &bounds)?;
            let report = cat.check();
            if !report.passed() {
                println!("{report}");
                return Ok(Verdict::Fail);
            }
            let gamma = GammaMonad::new(cat)?;
            let a = FinSet(arity);
            let count = gamma.carrier_len(a)?;
            println!("{count} sections at output size {arity}");
            if count <= 64 {
                for s in 0..count {
                    println!("  {}", gamma.describe(a, s));
                }
            }
            if laws {
                let laws = check_monad_laws(&gamma, &LawCheckConfig::sizes(arity.min(2), 2, 2));
                println!("{laws}");
                if !laws.passed() {
                    return Ok(Verdict::Fail);
                }
            }
            Ok(Verdict::Pass)
        }
        Command::Duality { verb } => run_duality(verb),
        Command::Stone {
            atoms,
            arity,
            bounds,
            out,
        } => run_duality(DualityVerb::Stone {
            atoms,
            arity,
            bounds,
            out,
        }),
        Command::Scry {
            term,
            tree,
            alphabet,
            eval,
            out,
        } => {
            let section = match (term, tree) {
                (Some(path), None) => {
                    let term_json: TermJson = read_json(&path)?;
                    let sig = finstone::finmonad::flip_signature();
                    let term = term_json.to_term(&sig)?;
                    scry::scry_from_term(&term, alphabet)?
                }
                (None, Some(path)) => {
                    let tree: scry::ScryTree = read_json(&path)?;
                    tree.normalize()
                }
                _ => {
                    return Err(Error::InvalidSpec(
                        "provide exactly one of --term/--tree".into(),
                    ))
                }
            };
            match out {
                OutputFormat::Json => {
                    let json = serde_json::to_string_pretty(&section)
                        .map_err(|e| Error::InvalidSpec(e.to_string()))?;
                    println!("{json}");
                }
                _ => println!("{section}"),
            }
            if let Some(bits) = eval {
                let prefix: Vec<bool> = bits
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        other => Err(Error::InvalidSpec(format!("bad stream digit `{other}`"))),
                    })
                    .collect::<Result<_, _>>()?;
                let (consumed, output) = scry::scry_eval(&section, &prefix)?;
                println!("eval({bits}) = ({consumed},a{output})");
            }
            Ok(Verdict::Pass)
        }
    }
}

fn run_check(kind: CheckKind) -> CmdResult {
    match kind {
        CheckKind::Theory { file, bounds } => {
            let spec: TheorySpec = read_json(&file)?;
            let monad = spec.build(bounds.depth)?;
            let report = check_monad_laws(&monad, &LawCheckConfig::default());
            println!("{report}");
            Ok(if report.passed() {
                Verdict::Pass
            } else {
                Verdict::Fail
            })
        }
        CheckKind::Comodel {
            file,
            theory,
            bounds,
        } => {
            let theory: TheorySpec = read_json(&theory)?;
            let monad = theory.build(bounds.depth)?;
            let spec: ComodelSpec = read_json(&file)?;
            let w = spec.build(monad.signature())?;
            let report = w.check(monad.equations());
            println!("{report}");
            Ok(if report.passed() {
                Verdict::Pass
            } else {
                Verdict::Fail
            })
        }
        CheckKind::Category { file } => {
            let spec: CategorySpec = read_json(&file)?;
            let cat = spec.build()?;
            let report = cat.check();
            println!("{report}");
            Ok(if report.passed() {
                Verdict::Pass
            } else {
                Verdict::Fail
            })
        }
        CheckKind::Boolean { file } => {
            let spec: BooleanSpec = read_json(&file)?;
            let algebra = FinBoolAlg::new(spec.atoms);
            if algebra.is_degenerate() {
                println!("degenerate algebra (0 atoms): top = bottom");
                return Ok(Verdict::Fail);
            }
            let bset = finstone::boolalg::algebra_as_bset(algebra)?;
            let report = finstone::boolalg::check_bset(
                &bset,
                &finstone::boolalg::BSetCheckConfig::default(),
            );
            println!("{report}");
            Ok(if report.passed() {
                Verdict::Pass
            } else {
                Verdict::Fail
            })
        }
    }
}

fn run_duality(verb: DualityVerb) -> CmdResult {
    match verb {
        DualityVerb::Unit {
            input,
            arity,
            bounds,
            out,
        } => {
            let built = build_runner(&input, &bounds)?;
            let outcome =
                built.with(|runner| duality::unit(runner, arity, &bounds.bcat_config()))?;
            let mut text = String::new();
            let _ = writeln!(text, "unit of {}:", outcome.report.monad);
            for v in &outcome.report.sizes {
                let _ = writeln!(
                    text,
                    "  size {}: {} -> {} sections, injective={}, surjective={}{}",
                    v.size,
                    v.source,
                    v.target,
                    v.injective,
                    v.surjective,
                    match &v.missing_section {
                        Some(s) => format!(", outside the image: {s}"),
                        None => String::new(),
                    }
                );
            }
            let _ = writeln!(text, "  bijective: {}", outcome.report.bijective);
            let _ = write!(text, "  {}", outcome.report.map_laws);
            emit(&outcome.report, out, text)?;
            Ok(if outcome.report.map_laws.passed() {
                Verdict::Pass
            } else {
                Verdict::Fail
            })
        }
        DualityVerb::Counit { cat, bounds, out } => {
            let cat = build_category(&cat, &bounds)?;
            let outcome = duality::counit(&cat, &bounds.bcat_config())?;
            let text = format!(
                "counit: {} objects -> {} behaviours, {} morphisms -> {} trace classes\n  \
                 objects_bijective={}, morphisms_bijective={}, laws={}",
                outcome.report.objects,
                outcome.report.behaviour_objects,
                outcome.report.morphisms,
                outcome.report.behaviour_morphisms,
                outcome.report.objects_bijective,
                outcome.report.morphisms_bijective,
                outcome.report.retro_laws.passed()
            );
            emit(&outcome.report, out, text)?;
            Ok(if outcome.report.bijective {
                Verdict::Pass
            } else {
                Verdict::Fail
            })
        }
        DualityVerb::Triangle { cat, arity, bounds } => {
            let cat = build_category(&cat, &bounds)?;
            let report = duality::triangle_on_sections(&cat, arity, &bounds.bcat_config())?;
            println!("{report}");
            let gamma = GammaMonad::new(cat)?;
            let dual = duality::triangle_on_categories(&gamma, &bounds.bcat_config())?;
            println!("{dual}");
            Ok(if report.passed() && dual.passed() {
                Verdict::Pass
            } else {
                Verdict::Fail
            })
        }
        DualityVerb::Idempotence {
            input,
            arity,
            bounds,
            out,
        } => {
            let built = build_runner(&input, &bounds)?;
            let report = built
                .with(|runner| duality::idempotence_check(runner, arity, &bounds.bcat_config()))?;
            let text = format!(
                "idempotence: carriers {:?} then {:?}, inner unit bijective={}, passed={}",
                report.first_sizes, report.second_sizes, report.inner_unit_bijective, report.passed
            );
            emit(&report, out, text)?;
            Ok(if report.passed {
                Verdict::Pass
            } else {
                Verdict::Fail
            })
        }
        DualityVerb::Stone {
            atoms,
            arity,
            bounds,
            out,
        } => {
            let report = duality::stone_roundtrip(atoms, arity, &bounds.bcat_config())?;
            let text = format!(
                "stone: atoms={}, objects={}, identities_only={}, unit_bijective={}, passed={}",
                report.atoms,
                report.objects,
                report.identities_only,
                report
                    .unit_bijective
                    .iter()
                    .all(|v| v.injective && v.surjective),
                report.passed
            );
            emit(&report, out, text)?;
            Ok(if report.passed {
                Verdict::Pass
            } else {
                Verdict::Fail
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Verdict::Pass) => ExitCode::from(0),
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidSpec(_) | Error::OutOfRange { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
