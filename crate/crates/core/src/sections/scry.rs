//! Look-ahead ("scrying") sections over infinite binary streams, given
//! symbolically as reduced prefix trees.
//!
//! A tree branches positionally: a node at depth `k` reads stream digit
//! `k`. A leaf `(consume, output)` ends the walk, consuming `consume`
//! digits in total — possibly fewer than the digits branched on (that is
//! scrying: the section peeked ahead without consuming), possibly more
//! (blind consumption). Sections of this kind are exactly the finitely
//! describable ones; a section that would need to inspect an entire
//! infinite stream has no finite tree.
//!
//! Reduction collapses a node whose children are equal leaves. Reduced
//! trees are canonical: two reduced trees describe the same section if
//! and only if they are equal, and `scry_eval` is the semantics that
//! equality is measured against.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finmonad::Term;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ScryTree {
    Leaf { consume: usize, output: usize },
    Node(Box<ScryTree>, Box<ScryTree>),
}

impl ScryTree {
    pub fn leaf(consume: usize, output: usize) -> ScryTree {
        ScryTree::Leaf { consume, output }
    }

    pub fn node(zero: ScryTree, one: ScryTree) -> ScryTree {
        ScryTree::Node(Box::new(zero), Box::new(one))
    }

    pub fn depth(&self) -> usize {
        match self {
            ScryTree::Leaf { .. } => 0,
            ScryTree::Node(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    pub fn max_consume(&self) -> usize {
        match self {
            ScryTree::Leaf { consume, .. } => *consume,
            ScryTree::Node(l, r) => l.max_consume().max(r.max_consume()),
        }
    }

    pub fn is_reduced(&self) -> bool {
        match self {
            ScryTree::Leaf { .. } => true,
            ScryTree::Node(l, r) => {
                if let (ScryTree::Leaf { .. }, ScryTree::Leaf { .. }) = (l.as_ref(), r.as_ref()) {
                    if l == r {
                        return false;
                    }
                }
                l.is_reduced() && r.is_reduced()
            }
        }
    }

    /// Collapse nodes whose two children are equal leaves, bottom-up.
    /// Only leaves may collapse: an inner node one level up would change
    /// which digit its branches read.
    pub fn normalize(&self) -> ScryTree {
        match self {
            ScryTree::Leaf { consume, output } => ScryTree::leaf(*consume, *output),
            ScryTree::Node(l, r) => {
                let l = l.normalize();
                let r = r.normalize();
                if let (ScryTree::Leaf { .. }, ScryTree::Leaf { .. }) = (&l, &r) {
                    if l == r {
                        return l;
                    }
                }
                ScryTree::node(l, r)
            }
        }
    }

    /// Leaves in depth-first order as `(branch path, consume, output)`.
    pub fn assignments(&self) -> Vec<(String, usize, usize)> {
        let mut out = Vec::new();
        fn walk(t: &ScryTree, path: String, out: &mut Vec<(String, usize, usize)>) {
            match t {
                ScryTree::Leaf { consume, output } => out.push((path, *consume, *output)),
                ScryTree::Node(l, r) => {
                    walk(l, format!("{path}0"), out);
                    walk(r, format!("{path}1"), out);
                }
            }
        }
        walk(self, String::new(), &mut out);
        out
    }

    /// The assignment-table notation, e.g. `{0 -> (1,a0); 11 -> (2,a3)}`.
    pub fn table(&self) -> String {
        let rows: Vec<String> = self
            .assignments()
            .into_iter()
            .map(|(path, consume, output)| {
                let path = if path.is_empty() {
                    "ε".to_string()
                } else {
                    path
                };
                format!("{path} -> ({consume},a{output})")
            })
            .collect();
        format!("{{{}}}", rows.join("; "))
    }
}

impl std::fmt::Display for ScryTree {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.table())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum ScryJson {
    Leaf {
        leaf: (usize, usize),
    },
    Node {
        node: (Box<ScryJson>, Box<ScryJson>),
    },
}

impl From<&ScryTree> for ScryJson {
    fn from(t: &ScryTree) -> ScryJson {
        match t {
            ScryTree::Leaf { consume, output } => ScryJson::Leaf {
                leaf: (*consume, *output),
            },
            ScryTree::Node(l, r) => ScryJson::Node {
                node: (Box::new(l.as_ref().into()), Box::new(r.as_ref().into())),
            },
        }
    }
}

impl From<ScryJson> for ScryTree {
    fn from(j: ScryJson) -> ScryTree {
        match j {
            ScryJson::Leaf {
                leaf: (consume, output),
            } => ScryTree::leaf(consume, output),
            ScryJson::Node { node: (l, r) } => ScryTree::node((*l).into(), (*r).into()),
        }
    }
}

impl Serialize for ScryTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ScryJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ScryTree {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<ScryTree, D::Error> {
        Ok(ScryJson::deserialize(d)?.into())
    }
}

/// The section induced by a term of the free binary theory: every branch
/// consumes the digit it reads, so a leaf at depth `d` consumes exactly
/// `d` digits.
pub fn scry_from_term(t: &Term, a_size: usize) -> Result<ScryTree> {
    fn build(t: &Term, depth: usize, a_size: usize) -> Result<ScryTree> {
        match t {
            Term::Leaf(v) => {
                if *v >= a_size {
                    return Err(Error::OutOfRange {
                        index: *v,
                        what: format!("[{a_size}]"),
                    });
                }
                Ok(ScryTree::leaf(depth, *v))
            }
            Term::Node { op, children } => {
                if *op != 0 || children.len() != 2 {
                    return Err(Error::InvalidSpec(
                        "scry trees come from the free theory of one binary operation".into(),
                    ));
                }
                Ok(ScryTree::node(
                    build(&children[0], depth + 1, a_size)?,
                    build(&children[1], depth + 1, a_size)?,
                ))
            }
        }
    }
    Ok(build(t, 0, a_size)?.normalize())
}

pub fn scry_ret(output: usize) -> ScryTree {
    ScryTree::leaf(0, output)
}

/// Walk `u` down along already-fixed digits. Returns the residual subtree
/// and how many digits of `digits` were branched on.
fn resolve<'a>(u: &'a ScryTree, digits: &[bool]) -> (&'a ScryTree, usize) {
    let mut here = u;
    let mut used = 0;
    while used < digits.len() {
        match here {
            ScryTree::Leaf { .. } => break,
            ScryTree::Node(l, r) => {
                here = if digits[used] { r } else { l };
                used += 1;
            }
        }
    }
    (here, used)
}

/// Add `offset` to every leaf's consume count.
fn shift(t: &ScryTree, offset: usize) -> ScryTree {
    match t {
        ScryTree::Leaf { consume, output } => ScryTree::leaf(consume + offset, *output),
        ScryTree::Node(l, r) => ScryTree::node(shift(l, offset), shift(r, offset)),
    }
}

/// Duplicate `t` below `levels` blind branches (both children equal); the
/// padding aligns a subtree whose branches start at a later stream
/// position than the current depth.
fn pad(t: ScryTree, levels: usize) -> ScryTree {
    let mut out = t;
    for _ in 0..levels {
        out = ScryTree::node(out.clone(), out);
    }
    out
}

/// Sequential composition: run `s`, feed its output to `u`, continue on
/// the not-yet-consumed part of the stream.
///
/// The defining property (checked by the oracle tests) is
/// `eval(bind(s,u), w) = (n1 + n2, b)` where `(n1, a) = eval(s, w)` and
/// `(n2, b) = eval(u(a), w[n1..])`.
pub fn scry_bind(s: &ScryTree, u: impl Fn(usize) -> ScryTree) -> ScryTree {
    fn go(
        s: &ScryTree,
        depth: usize,
        path: &mut Vec<bool>,
        u: &dyn Fn(usize) -> ScryTree,
    ) -> ScryTree {
        match s {
            ScryTree::Node(l, r) => {
                path.push(false);
                let zero = go(l, depth + 1, path, u);
                path.pop();
                path.push(true);
                let one = go(r, depth + 1, path, u);
                path.pop();
                ScryTree::node(zero, one)
            }
            ScryTree::Leaf { consume, output } => {
                let next = u(*output);
                if *consume >= depth {
                    // Continuation reads from position `consume`, beyond
                    // everything branched on so far: pad blindly up to it.
                    pad(shift(&next, *consume), consume - depth)
                } else {
                    // Digits consume..depth are already fixed by the path.
                    let (residual, _) = resolve(&next, &path[*consume..depth]);
                    shift(residual, *consume)
                }
            }
        }
    }
    go(s, 0, &mut Vec::new(), &u).normalize()
}

/// The scry of a section: same outputs, but no consumption anywhere.
pub fn scry_hyperaffine_part(s: &ScryTree) -> ScryTree {
    fn strip(t: &ScryTree) -> ScryTree {
        match t {
            ScryTree::Leaf { output, .. } => ScryTree::leaf(0, *output),
            ScryTree::Node(l, r) => ScryTree::node(strip(l), strip(r)),
        }
    }
    strip(s).normalize()
}

/// Run a section on a stream prefix: `(digits consumed, output)`.
/// The prefix must be long enough to reach a leaf.
pub fn scry_eval(s: &ScryTree, prefix: &[bool]) -> Result<(usize, usize)> {
    let mut here = s;
    let mut pos = 0;
    loop {
        match here {
            ScryTree::Leaf { consume, output } => return Ok((*consume, *output)),
            ScryTree::Node(l, r) => {
                if pos >= prefix.len() {
                    return Err(Error::InvalidSpec(format!(
                        "stream prefix of length {} is too short (branching at digit {pos})",
                        prefix.len()
                    )));
                }
                here = if prefix[pos] { r } else { l };
                pos += 1;
            }
        }
    }
}

/// `s ⊳ return a`, then the factorization `s = scry(s) >>= λa. s ⊳ return a`
/// as a checkable equation.
pub fn factorization_holds(s: &ScryTree) -> bool {
    let bar = scry_hyperaffine_part(s);
    let rebuilt = scry_bind(&bar, |a| scry_bind(s, |_| scry_ret(a)));
    rebuilt == s.normalize()
}

pub fn random_tree(rng: &mut crate::topcat::SeededRng, depth: usize, outputs: usize) -> ScryTree {
    if depth == 0 || rng.below(3) == 0 {
        ScryTree::leaf(rng.below(depth + 2), rng.below(outputs))
    } else {
        ScryTree::node(
            random_tree(rng, depth - 1, outputs),
            random_tree(rng, depth - 1, outputs),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topcat::SeededRng;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    /// The worked tree b(a0, b(b(a1, a2), a3)).
    fn worked_term() -> Term {
        Term::node(
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
        )
    }

    #[test]
    fn leaf_term_gives_the_trivial_assignment() {
        let t = scry_from_term(&Term::Leaf(0), 1).unwrap();
        assert_eq!(t, ScryTree::leaf(0, 0));
        assert_eq!(t.table(), "{ε -> (0,a0)}");
    }

    #[test]
    fn worked_tree_gives_the_expected_table() {
        let t = scry_from_term(&worked_term(), 4).unwrap();
        assert_eq!(
            t.assignments(),
            vec![
                ("0".to_string(), 1, 0),
                ("100".to_string(), 3, 1),
                ("101".to_string(), 3, 2),
                ("11".to_string(), 2, 3),
            ]
        );
        assert_eq!(
            t.table(),
            "{0 -> (1,a0); 100 -> (3,a1); 101 -> (3,a2); 11 -> (2,a3)}"
        );
    }

    #[test]
    fn equal_branches_reduce() {
        let t = scry_from_term(&Term::node(0, vec![Term::Leaf(0), Term::Leaf(0)]), 1).unwrap();
        assert_eq!(t, ScryTree::leaf(1, 0));
    }

    #[test]
    fn bind_with_ret_is_identity_both_ways() {
        let mut rng = SeededRng::new(11);
        for _ in 0..100 {
            let s = random_tree(&mut rng, 4, 3).normalize();
            assert_eq!(scry_bind(&scry_ret(2), |_| s.clone()), s);
            assert_eq!(scry_bind(&s, scry_ret), s);
        }
    }

    #[test]
    fn look_ahead_section_consumes_one_more_digit_after_a_flip() {
        // s = {0 -> (0,a0); 10 -> (1,a1); 11 -> (1,a2)} bound with
        // λa. section of flip(a, a).
        let s = ScryTree::node(
            ScryTree::leaf(0, 0),
            ScryTree::node(ScryTree::leaf(1, 1), ScryTree::leaf(1, 2)),
        );
        let u = |a: usize| {
            scry_from_term(&Term::node(0, vec![Term::Leaf(a), Term::Leaf(a)]), 3).unwrap()
        };
        let bound = scry_bind(&s, u);
        assert_eq!(
            bound.assignments(),
            vec![
                ("0".to_string(), 1, 0),
                ("10".to_string(), 2, 1),
                ("11".to_string(), 2, 2),
            ]
        );
    }

    #[test]
    fn hyperaffine_part_of_ret_is_ret() {
        assert_eq!(scry_hyperaffine_part(&scry_ret(1)), scry_ret(1));
    }

    #[test]
    fn worked_tree_factorizes_through_its_scry() {
        let s = scry_from_term(&worked_term(), 4).unwrap();
        let bar = scry_hyperaffine_part(&s);
        assert_eq!(
            bar.assignments(),
            vec![
                ("0".to_string(), 0, 0),
                ("100".to_string(), 0, 1),
                ("101".to_string(), 0, 2),
                ("11".to_string(), 0, 3),
            ]
        );
        assert!(factorization_holds(&s));
    }

    #[test]
    fn factorization_holds_on_random_trees() {
        let mut rng = SeededRng::new(2024);
        for _ in 0..200 {
            let s = random_tree(&mut rng, 4, 3);
            assert!(factorization_holds(&s), "failed on {s}");
        }
    }

    #[test]
    fn eval_on_the_worked_tree() {
        let s = scry_from_term(&worked_term(), 4).unwrap();
        assert_eq!(scry_eval(&s, &bits("101110")).unwrap(), (3, 2));
        assert_eq!(scry_eval(&s, &bits("0")).unwrap(), (1, 0));
        assert_eq!(scry_eval(&ScryTree::leaf(0, 7), &bits("")).unwrap(), (0, 7));
    }

    #[test]
    fn eval_fails_loudly_on_short_prefixes() {
        let s = scry_from_term(&worked_term(), 4).unwrap();
        assert!(scry_eval(&s, &bits("1")).is_err());
    }

    #[test]
    fn bind_agrees_with_sequential_evaluation() {
        // The oracle equation on random pairs, over all 12-digit prefixes
        // of a deterministic sample.
        let mut rng = SeededRng::new(7);
        for _ in 0..60 {
            let s = random_tree(&mut rng, 3, 2);
            let u0 = random_tree(&mut rng, 3, 2);
            let u1 = random_tree(&mut rng, 3, 2);
            let u = |a: usize| if a == 0 { u0.clone() } else { u1.clone() };
            let bound = scry_bind(&s, u);
            for code in 0..(1u32 << 12) {
                let w: Vec<bool> = (0..12).map(|i| code >> i & 1 == 1).collect();
                let (n1, a) = scry_eval(&s, &w).unwrap();
                let rest: Vec<bool> = w[n1.min(w.len())..].to_vec();
                let u_tree = if a == 0 { &u0 } else { &u1 };
                let (n2, b) = scry_eval(u_tree, &rest).unwrap();
                assert_eq!(scry_eval(&bound, &w).unwrap(), (n1 + n2, b));
            }
        }
    }

    #[test]
    fn normalize_is_idempotent() {
        let mut rng = SeededRng::new(99);
        for _ in 0..200 {
            let s = random_tree(&mut rng, 5, 2);
            let once = s.normalize();
            assert!(once.is_reduced());
            assert_eq!(once.normalize(), once);
        }
    }

    #[test]
    fn json_roundtrip() {
        let s = scry_from_term(&worked_term(), 4).unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"leaf\""));
        let back: ScryTree = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
    }
}
