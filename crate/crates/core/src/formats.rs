//! File formats: JSON specs for theories, comodels, categories and
//! Boolean algebras, plus JSON export of behaviour categories.
//!
//! Unknown keys are rejected everywhere; a parse failure is the caller's
//! exit-code-2 path.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::behaviour::BehaviourCategory;
use crate::comodel::Comodel;
use crate::error::{Error, Result};
use crate::finmonad::{Normalizer, OpDecl, Signature, Term, TermMonad};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TermJson {
    Leaf { leaf: usize },
    Node { op: String, children: Vec<TermJson> },
}

impl TermJson {
    pub fn to_term(&self, sig: &Signature) -> Result<Term> {
        match self {
            TermJson::Leaf { leaf } => Ok(Term::Leaf(*leaf)),
            TermJson::Node { op, children } => {
                let op = sig.index_of(op)?;
                let kids: Vec<Term> = children
                    .iter()
                    .map(|c| c.to_term(sig))
                    .collect::<Result<_>>()?;
                if kids.len() != sig.arity(op) {
                    return Err(Error::InvalidSpec(format!(
                        "`{}` expects {} children, got {}",
                        sig.name(op),
                        sig.arity(op),
                        kids.len()
                    )));
                }
                Ok(Term::Node { op, children: kids })
            }
        }
    }

    pub fn from_term(t: &Term, sig: &Signature) -> TermJson {
        match t {
            Term::Leaf(v) => TermJson::Leaf { leaf: *v },
            Term::Node { op, children } => TermJson::Node {
                op: sig.name(*op).to_string(),
                children: children
                    .iter()
                    .map(|c| TermJson::from_term(c, sig))
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpJson {
    pub name: String,
    pub arity: usize,
}

/// `{"ops":[{"name":"flip","arity":2}], "equations":[[t,t],...],
///   "normalizer":"none|commutative|fail"}`
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheorySpec {
    pub ops: Vec<OpJson>,
    #[serde(default)]
    pub equations: Vec<(TermJson, TermJson)>,
    #[serde(default = "default_normalizer")]
    pub normalizer: String,
}

fn default_normalizer() -> String {
    "none".into()
}

impl TheorySpec {
    pub fn signature(&self) -> Result<Signature> {
        Signature::from_decls(
            self.ops
                .iter()
                .map(|o| OpDecl {
                    name: o.name.clone(),
                    arity: o.arity,
                })
                .collect(),
        )
    }

    pub fn build(&self, depth: usize) -> Result<TermMonad> {
        let sig = self.signature()?;
        let equations: Vec<(Term, Term)> = self
            .equations
            .iter()
            .map(|(l, r)| Ok((l.to_term(&sig)?, r.to_term(&sig)?)))
            .collect::<Result<_>>()?;
        let normalizer = match self.normalizer.as_str() {
            "none" => Normalizer::None,
            "commutative" => Normalizer::Commutative,
            "fail" => Normalizer::Fail,
            other => return Err(Error::InvalidSpec(format!("unknown normalizer `{other}`"))),
        };
        if equations.is_empty() && normalizer.is_identity() {
            Ok(TermMonad::free(sig, depth))
        } else {
            TermMonad::quotient(sig, depth, equations, normalizer)
        }
    }
}

/// `{"states":k, "coops":{"flip":[[result,next],...]}}`
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComodelSpec {
    pub states: usize,
    pub coops: BTreeMap<String, Vec<(usize, usize)>>,
}

impl ComodelSpec {
    pub fn build(&self, sig: &Signature) -> Result<Comodel> {
        let mut coops = Vec::with_capacity(sig.len());
        for op in 0..sig.len() {
            let table = self.coops.get(sig.name(op)).ok_or_else(|| {
                Error::InvalidSpec(format!("missing cooperation for `{}`", sig.name(op)))
            })?;
            coops.push(table.clone());
        }
        for name in self.coops.keys() {
            sig.index_of(name)?;
        }
        Comodel::new(sig.clone(), self.states, coops)
    }

    pub fn from_comodel(w: &Comodel) -> ComodelSpec {
        let mut coops = BTreeMap::new();
        for op in 0..w.signature().len() {
            coops.insert(
                w.signature().name(op).to_string(),
                (0..w.states()).map(|s| w.coop(op, s)).collect(),
            );
        }
        ComodelSpec {
            states: w.states(),
            coops,
        }
    }
}

/// `{"atoms": n}`
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BooleanSpec {
    pub atoms: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismJson {
    pub src: usize,
    pub tgt: usize,
}

/// `{"objects":n, "morphisms":[{"src":i,"tgt":j}], "identities":[...],
///   "comp":[[f,g,h],...]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CategorySpec {
    pub objects: usize,
    pub morphisms: Vec<MorphismJson>,
    pub identities: Vec<usize>,
    pub comp: Vec<(usize, usize, usize)>,
}

impl CategorySpec {
    pub fn build(&self) -> Result<crate::topcat::FinCat> {
        let src = self.morphisms.iter().map(|m| m.src).collect();
        let tgt = self.morphisms.iter().map(|m| m.tgt).collect();
        let comp = self.comp.iter().map(|&(f, g, h)| ((f, g), h)).collect();
        crate::topcat::FinCat::new(self.objects, src, tgt, self.identities.clone(), comp)
    }

    pub fn from_cat(cat: &crate::topcat::FinCat) -> CategorySpec {
        let mut comp = Vec::new();
        for f in 0..cat.morphisms {
            for g in 0..cat.morphisms {
                if let Some(h) = cat.comp_opt(f, g) {
                    comp.push((f, g, h));
                }
            }
        }
        CategorySpec {
            objects: cat.objects,
            morphisms: (0..cat.morphisms)
                .map(|f| MorphismJson {
                    src: cat.src[f],
                    tgt: cat.tgt[f],
                })
                .collect(),
            identities: cat.id.clone(),
            comp,
        }
    }
}

/// B-set fixtures: `{"carrier":k, "equiv":{"<element mask>": [[...],...]}}`
/// giving, per algebra element, the partition of the carrier it induces.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BSetSpec {
    pub carrier: usize,
    pub equiv: BTreeMap<String, Vec<Vec<usize>>>,
}

impl BSetSpec {
    /// Rebuild the action from the agreement relations: `b(x, y)` is the
    /// unique element agreeing with `x` on `b` and with `y` outside it.
    pub fn build(&self, algebra: crate::boolalg::FinBoolAlg) -> Result<crate::boolalg::BSet> {
        let mut class_of: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for b in algebra.elements() {
            let classes = self
                .equiv
                .get(&b.to_string())
                .ok_or_else(|| Error::InvalidSpec(format!("missing relation for element {b}")))?;
            let mut ids = vec![usize::MAX; self.carrier];
            for (i, class) in classes.iter().enumerate() {
                for &x in class {
                    if x >= self.carrier || ids[x] != usize::MAX {
                        return Err(Error::InvalidSpec(format!(
                            "relation for element {b} is not a partition"
                        )));
                    }
                    ids[x] = i;
                }
            }
            if ids.contains(&usize::MAX) {
                return Err(Error::InvalidSpec(format!(
                    "relation for element {b} misses carrier elements"
                )));
            }
            class_of.insert(b, ids);
        }
        let carrier = self.carrier;
        crate::boolalg::BSet::from_action(algebra, carrier, |b, x, y| {
            let on_b = &class_of[&b];
            let off_b = &class_of[&algebra.complement(b)];
            let mut amalgam = None;
            for z in 0..carrier {
                if on_b[z] == on_b[x] && off_b[z] == off_b[y] {
                    amalgam = match amalgam {
                        None => Some(z),
                        // Ambiguity is signalled via the range check in from_action.
                        Some(_) => Some(carrier),
                    };
                }
            }
            amalgam.unwrap_or(carrier)
        })
    }

    pub fn from_bset(x: &crate::boolalg::BSet) -> BSetSpec {
        let mut equiv = BTreeMap::new();
        for b in x.algebra.elements() {
            let mut classes: Vec<Vec<usize>> = Vec::new();
            for e in 0..x.carrier {
                if let Some(class) = classes.iter_mut().find(|c| x.equiv(b, c[0], e)) {
                    class.push(e);
                } else {
                    classes.push(vec![e]);
                }
            }
            equiv.insert(b.to_string(), classes);
        }
        BSetSpec {
            carrier: x.carrier,
            equiv,
        }
    }
}

/// JSON form of a behaviour category export.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BehaviourCategoryJson {
    pub objects: Vec<String>,
    pub morphisms: Vec<BehaviourMorphismJson>,
    pub identities: Vec<usize>,
    pub comp: Vec<(usize, usize, usize)>,
    pub algebra_atoms: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BehaviourMorphismJson {
    pub src: usize,
    pub tgt: usize,
    pub label: String,
}

pub fn behaviour_category_json(bc: &BehaviourCategory) -> BehaviourCategoryJson {
    let mut comp = Vec::new();
    for f in 0..bc.cat.morphisms {
        for g in 0..bc.cat.morphisms {
            if let Some(h) = bc.cat.comp_opt(f, g) {
                comp.push((f, g, h));
            }
        }
    }
    BehaviourCategoryJson {
        objects: bc.object_labels.clone(),
        morphisms: (0..bc.cat.morphisms)
            .map(|f| BehaviourMorphismJson {
                src: bc.cat.src[f],
                tgt: bc.cat.tgt[f],
                label: bc.morphisms[f].label.clone(),
            })
            .collect(),
        identities: bc.cat.id.clone(),
        comp,
        algebra_atoms: bc.object_algebra.as_ref().map(|a| a.blocks.len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theory_spec_roundtrip_and_build() {
        use crate::finmonad::FinMonad as _;
        let json = r#"{"ops":[{"name":"flip","arity":2}],"equations":[],"normalizer":"none"}"#;
        let spec: TheorySpec = serde_json::from_str(json).unwrap();
        let monad = spec.build(1).unwrap();
        assert_eq!(monad.carrier_len(crate::finset::FinSet(2)).unwrap(), 6);
        let printed = serde_json::to_string(&spec).unwrap();
        let reparsed: TheorySpec = serde_json::from_str(&printed).unwrap();
        assert_eq!(reparsed.ops[0].name, "flip");
    }

    #[test]
    fn terms_roundtrip_through_json() {
        let sig = crate::finmonad::flip_signature();
        let t = Term::node(
            0,
            vec![
                Term::Leaf(0),
                Term::node(0, vec![Term::Leaf(1), Term::Leaf(0)]),
            ],
        );
        let j = TermJson::from_term(&t, &sig);
        let back = j.to_term(&sig).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let json = r#"{"ops":[],"equations":[],"normalizer":"none","extra":1}"#;
        assert!(serde_json::from_str::<TheorySpec>(json).is_err());
        let json = r#"{"states":1,"coops":{},"bogus":true}"#;
        assert!(serde_json::from_str::<ComodelSpec>(json).is_err());
    }

    #[test]
    fn comodel_spec_roundtrip() {
        let w = crate::fixtures::four_stream_comodel();
        let spec = ComodelSpec::from_comodel(&w);
        let json = serde_json::to_string(&spec).unwrap();
        let reparsed: ComodelSpec = serde_json::from_str(&json).unwrap();
        let rebuilt = reparsed.build(w.signature()).unwrap();
        assert_eq!(rebuilt, w);
    }

    #[test]
    fn category_spec_roundtrip() {
        let cat = crate::topcat::FinCat::chaotic(2);
        let spec = CategorySpec::from_cat(&cat);
        let rebuilt = spec.build().unwrap();
        assert_eq!(rebuilt, cat);
        rebuilt.check().expect_clean();
    }

    #[test]
    fn bset_fixture_roundtrips_through_relations() {
        let algebra = crate::boolalg::FinBoolAlg::new(2);
        let f = crate::boolalg::free_bset(2, algebra).unwrap();
        let spec = BSetSpec::from_bset(&f.bset);
        let rebuilt = spec.build(algebra).unwrap();
        assert_eq!(rebuilt, f.bset);
    }

    #[test]
    fn bad_comodel_spec_is_rejected() {
        let sig = crate::finmonad::flip_signature();
        let spec: ComodelSpec =
            serde_json::from_str(r#"{"states":1,"coops":{"flip":[[5,0]]}}"#).unwrap();
        assert!(spec.build(&sig).is_err());
    }
}
