//! Global sections of a finite category's source map, as a monad.
//!
//! A section at output type `A` assigns to every object an output value
//! and an outgoing morphism. `return a` takes identity transitions
//! everywhere; `bind` composes transitions and reads the continuation at
//! the target of the first step. This is a state monad that also records
//! which transition was taken.

pub mod scry;

use crate::behaviour::Runner;
use crate::error::{Error, Result};
use crate::finmonad::{FinMonad, MonadMap};
use crate::finset::FinSet;
use crate::topcat::{FinCat, Retrofunctor};

/// The sections monad `Γ C`. Carrier elements at `A` are tables
/// `object -> (value, outgoing morphism)`, encoded mixed-radix with the
/// outgoing morphisms of each object in ascending order.
pub struct GammaMonad {
    cat: FinCat,
    out: Vec<Vec<usize>>,
    /// Position of a morphism within `out[src]`.
    out_pos: Vec<usize>,
}

impl GammaMonad {
    /// Requires a law-clean category.
    pub fn new(cat: FinCat) -> Result<GammaMonad> {
        let check = cat.check();
        if !check.passed() {
            return Err(Error::CategoryLawViolation(format!(
                "sections monad over an invalid category: {}",
                check.violations[0].witness
            )));
        }
        Ok(GammaMonad::new_unchecked(cat))
    }

    pub(crate) fn new_unchecked(cat: FinCat) -> GammaMonad {
        let out: Vec<Vec<usize>> = (0..cat.objects).map(|c| cat.out(c)).collect();
        let mut out_pos = vec![0; cat.morphisms];
        for outs in &out {
            for (pos, &f) in outs.iter().enumerate() {
                out_pos[f] = pos;
            }
        }
        GammaMonad { cat, out, out_pos }
    }

    pub fn category(&self) -> &FinCat {
        &self.cat
    }

    fn radix(&self, a: FinSet, c: usize) -> usize {
        a.size() * self.out[c].len()
    }

    /// The `(value, morphism)` the section assigns at object `c`.
    pub fn component(&self, a: FinSet, s: usize, c: usize) -> (usize, usize) {
        let mut code = s;
        for obj in 0..c {
            code /= self.radix(a, obj);
        }
        let digit = code % self.radix(a, c);
        (
            digit / self.out[c].len(),
            self.out[c][digit % self.out[c].len()],
        )
    }

    pub fn encode(&self, a: FinSet, f: impl Fn(usize) -> (usize, usize)) -> usize {
        let mut code = 0;
        for c in (0..self.cat.objects).rev() {
            let (value, morphism) = f(c);
            debug_assert!(a.contains(value));
            debug_assert_eq!(self.cat.src[morphism], c);
            code = code * self.radix(a, c) + (value * self.out[c].len() + self.out_pos[morphism]);
        }
        code
    }
}

impl FinMonad for GammaMonad {
    fn name(&self) -> String {
        format!("sections[{}o,{}m]", self.cat.objects, self.cat.morphisms)
    }

    fn carrier_len(&self, a: FinSet) -> Result<usize> {
        let mut len: u128 = 1;
        for c in 0..self.cat.objects {
            len = len.saturating_mul(self.radix(a, c) as u128);
        }
        usize::try_from(len).map_err(|_| Error::SearchSpaceTooLarge {
            size: len,
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
        Ok(self.encode(a, |c| (value, self.cat.id[c])))
    }

    fn bind(&self, a: FinSet, b: FinSet, t: usize, cont: &[usize]) -> Result<usize> {
        if cont.len() != a.size() {
            return Err(Error::InvalidSpec(format!(
                "continuation has {} entries, expected {}",
                cont.len(),
                a.size()
            )));
        }
        let mut table = Vec::with_capacity(self.cat.objects);
        for c in 0..self.cat.objects {
            let (value, first) = self.component(a, t, c);
            let (out, second) = self.component(b, cont[value], self.cat.tgt[first]);
            table.push((out, self.cat.comp(first, second)?));
        }
        Ok(self.encode(b, |c| table[c]))
    }

    fn describe(&self, a: FinSet, t: usize) -> String {
        let parts: Vec<String> = (0..self.cat.objects)
            .map(|c| {
                let (value, morphism) = self.component(a, t, c);
                format!("{c}:({value},m{morphism})")
            })
            .collect();
        format!("<{}>", parts.join(" "))
    }
}

/// Sections run on the category's objects: at `c`, a section outputs its
/// value and moves to the target of its chosen morphism. This is the
/// canonical runner that the behaviour category of `Γ C` is built over.
impl Runner for GammaMonad {
    fn monad(&self) -> &dyn FinMonad {
        self
    }

    fn state_count(&self) -> usize {
        self.cat.objects
    }

    fn run(&self, a: FinSet, t: usize, w: usize) -> Result<(usize, usize)> {
        if t >= self.carrier_len(a)? {
            return Err(Error::OutOfRange {
                index: t,
                what: format!("{}{}", self.name(), a),
            });
        }
        let (value, morphism) = self.component(a, t, w);
        Ok((value, self.cat.tgt[morphism]))
    }

    fn state_label(&self, w: usize) -> String {
        format!("c{w}")
    }

    fn as_runner(&self) -> &dyn Runner {
        self
    }
}

/// The contravariant action of a retrofunctor `F : C ⇝ D` on sections:
/// a monad map `Γ D -> Γ C` reading the section at the image object and
/// lifting its morphism back.
pub fn gamma_retro<'a>(
    f: &'a Retrofunctor,
    gamma_c: &'a GammaMonad,
    gamma_d: &'a GammaMonad,
) -> MonadMap<'a> {
    MonadMap::new(
        gamma_d,
        gamma_c,
        "sections along retrofunctor",
        move |a, s| {
            let mut table = Vec::with_capacity(gamma_c.cat.objects);
            for c in 0..gamma_c.cat.objects {
                let (value, morphism) = gamma_d.component(a, s, f.on_objects[c]);
                table.push((value, f.lift(c, morphism)?));
            }
            Ok(gamma_c.encode(a, |c| table[c]))
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finmonad::{check_monad_laws, check_monad_map, LawCheckConfig, StateMonad};
    use crate::topcat::{check_retrofunctor, random_category, retro_compose, retro_id};
    use std::collections::BTreeMap;

    #[test]
    fn chaotic_two_sections_count_matches_the_state_monad() {
        let g = GammaMonad::new(FinCat::chaotic(2)).unwrap();
        assert_eq!(g.carrier_len(FinSet(2)).unwrap(), 16);
        assert_eq!(
            StateMonad::new(2).carrier_len(FinSet(2)).unwrap(),
            g.carrier_len(FinSet(2)).unwrap()
        );
    }

    #[test]
    fn discrete_three_sections_are_output_tables() {
        let g = GammaMonad::new(FinCat::discrete(3)).unwrap();
        assert_eq!(g.carrier_len(FinSet(2)).unwrap(), 8);
    }

    #[test]
    fn left_unit_exhaustively_on_small_categories() {
        for cat in [FinCat::chaotic(2), FinCat::discrete(3), FinCat::cyclic(3)] {
            let g = GammaMonad::new(cat).unwrap();
            let a = FinSet(2);
            let n = g.carrier_len(a).unwrap();
            for v in 0..2 {
                let r = g.ret(a, v).unwrap();
                for u0 in 0..n {
                    for u1 in 0..n {
                        assert_eq!(g.bind(a, a, r, &[u0, u1]).unwrap(), [u0, u1][v]);
                    }
                }
            }
        }
    }

    #[test]
    fn monad_laws_hold_on_section_fixtures() {
        for cat in [FinCat::chaotic(2), FinCat::discrete(3), FinCat::cyclic(2)] {
            let g = GammaMonad::new(cat).unwrap();
            check_monad_laws(&g, &LawCheckConfig::sizes(2, 2, 2)).expect_clean();
        }
    }

    #[test]
    fn monad_laws_sampled_on_random_categories() {
        for seed in [1, 2, 3] {
            let g = GammaMonad::new(random_category(seed, 3, 7)).unwrap();
            check_monad_laws(&g, &LawCheckConfig::sizes(1, 2, 2)).expect_clean();
        }
    }

    #[test]
    fn gamma_of_identity_retrofunctor_is_identity() {
        let cat = FinCat::chaotic(2);
        let g = GammaMonad::new(cat.clone()).unwrap();
        let identity = retro_id(&cat);
        let map = gamma_retro(&identity, &g, &g);
        let a = FinSet(2);
        for s in 0..g.carrier_len(a).unwrap() {
            assert_eq!(map.apply(a, s).unwrap(), s);
        }
    }

    fn collapse_to_point(c: &FinCat) -> (Retrofunctor, FinCat) {
        let point = FinCat::chaotic(1);
        let mut lifts = BTreeMap::new();
        for obj in 0..c.objects {
            lifts.insert((obj, 0usize), c.id[obj]);
        }
        (
            Retrofunctor {
                on_objects: vec![0; c.objects],
                lifts,
            },
            point,
        )
    }

    #[test]
    fn collapse_retrofunctor_induces_a_monad_map() {
        let c = FinCat::chaotic(2);
        let (f, point) = collapse_to_point(&c);
        check_retrofunctor(&f, &c, &point).expect_clean();
        let gc = GammaMonad::new(c).unwrap();
        let gp = GammaMonad::new(point).unwrap();
        let map = gamma_retro(&f, &gc, &gp);
        check_monad_map(&map, &LawCheckConfig::sizes(2, 2, 0)).expect_clean();
    }

    #[test]
    fn gamma_retro_is_contravariantly_functorial() {
        // gamma(F;G) = gamma(F) ∘ gamma(G) on every section.
        let c = FinCat::chaotic(2);
        let (f, point) = collapse_to_point(&c);
        let g = retro_id(&point);
        let fg = retro_compose(&f, &g, &c, &point, &point).unwrap();
        let gc = GammaMonad::new(c).unwrap();
        let gp = GammaMonad::new(point).unwrap();
        let via_composite = gamma_retro(&fg, &gc, &gp);
        let via_f = gamma_retro(&f, &gc, &gp);
        let via_g = gamma_retro(&g, &gp, &gp);
        let a = FinSet(2);
        for s in 0..gp.carrier_len(a).unwrap() {
            assert_eq!(
                via_composite.apply(a, s).unwrap(),
                via_f.apply(a, via_g.apply(a, s).unwrap()).unwrap()
            );
        }
    }

    #[test]
    fn empty_category_yields_the_terminal_monad() {
        let g = GammaMonad::new(FinCat::discrete(0)).unwrap();
        for n in 0..4 {
            assert_eq!(g.carrier_len(FinSet(n)).unwrap(), 1);
        }
    }

    #[test]
    fn monad_map_laws_for_gamma_retro_on_fixtures() {
        let c = FinCat::chaotic(2);
        let gc = GammaMonad::new(c.clone()).unwrap();
        let identity = retro_id(&c);
        let id_map = gamma_retro(&identity, &gc, &gc);
        check_monad_map(&id_map, &LawCheckConfig::sizes(2, 2, 0)).expect_clean();
    }
}
