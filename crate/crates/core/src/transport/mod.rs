//! Moving set-valued functors between `C` and its spectrum sites.
//!
//! `tilde F (x, p)` is the intersection of the images of `F u -> F x` over
//! the members `u` of `p`. On the ultrafilter site `hat G (x)` is the tagged
//! disjoint union of the `G (x, p)`; on the prime site it is the colimit of
//! the `G (x, p)` along the identity germs `(x, p') -> (x, p)` for `p <= p'`,
//! computed by union-find with the least tag as representative.

pub mod flat;
pub mod harness;
pub mod preserve;

use std::collections::HashMap;

use thiserror::Error;

use crate::category::{CatError, Scope};
use crate::finite::ObjId;
use crate::functor::{nat_trans, NatTrans, SetFunctor};
use crate::report::Verdict;
use crate::sheaf::UnionFind;
use crate::spectrum::{SpecError, SpecSite, Variant};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransportError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{0} is outside the scope")]
    OutOfScope(String),
    #[error("the site lacks {0}")]
    SiteIncomplete(String),
    #[error("action not well defined at {0}; the functor lacks the required certificate")]
    NotWellDefined(String),
    #[error("needs the {0} site")]
    WrongVariant(Variant),
    #[error("estimated {estimate} cases exceed the budget of {budget}")]
    Budget { estimate: f64, budget: f64 },
}

impl From<CatError> for TransportError {
    fn from(e: CatError) -> Self {
        TransportError::Spec(SpecError::Cat(e))
    }
}

impl TransportError {
    pub fn is_bound(&self) -> bool {
        matches!(self, TransportError::Spec(e) if e.is_bound())
    }
}

/// `tilde F` on a site, with each value as a sorted subset of `F x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tilde {
    pub functor: SetFunctor,
    pub elements: Vec<Vec<usize>>,
}

fn scope_obj(site: &SpecSite, scope: &Scope, x: crate::category::Obj) -> Result<ObjId, TransportError> {
    scope.obj(x).ok_or_else(|| TransportError::OutOfScope(site.c.object_name(x)))
}

fn scope_mor(site: &SpecSite, scope: &Scope, m: &crate::category::Mor) -> Result<usize, TransportError> {
    scope
        .mor_id(m)
        .ok_or_else(|| TransportError::OutOfScope(site.c.morphism_name(m)))
}

pub fn tilde(site: &SpecSite, scope: &Scope, f: &SetFunctor) -> Result<Tilde, TransportError> {
    let spec = site.spectrum();
    let mut elements = Vec::new();
    let mut gens = Vec::new();
    for o in &site.objects {
        let xs = scope_obj(site, scope, o.x)?;
        let t = spec.type_lattice(o.x)?;
        let mut keep = vec![true; f.values[xs]];
        for &local in o.filter.members() {
            let mono = &t.sub.subs[t.embed[local]].mono;
            let image = &f.actions[scope_mor(site, scope, mono)?];
            let mut hit = vec![false; f.values[xs]];
            for &a in image {
                hit[a] = true;
            }
            for (k, h) in keep.iter_mut().zip(hit) {
                *k &= h;
            }
        }
        elements.push((0..f.values[xs]).filter(|&a| keep[a]).collect::<Vec<_>>());
        gens.push(scope_mor(site, scope, &t.sub.subs[o.generator].mono)?);
    }
    let mut actions = Vec::new();
    for (m, g) in site.germs.iter().enumerate() {
        let (s, d) = (site.cat.dom(m), site.cat.cod(m));
        let (_, rep) = spec.representative(g)?;
        let rep = scope_mor(site, scope, &rep)?;
        let mut table = Vec::new();
        for &a in &elements[s] {
            let lift = f.actions[gens[s]]
                .iter()
                .position(|&v| v == a)
                .expect("members of the intersection lie in the generator's image");
            let b = f.actions[rep][lift];
            let idx = elements[d]
                .binary_search(&b)
                .map_err(|_| TransportError::NotWellDefined(site.cat.morphism_name(m).to_string()))?;
            table.push(idx);
        }
        actions.push(table);
    }
    let functor = SetFunctor {
        values: elements.iter().map(Vec::len).collect(),
        actions,
    };
    Ok(Tilde { functor, elements })
}

/// `tilde` on a transformation `F => F'`.
pub fn tilde_map(from: &Tilde, to: &Tilde, beta: &NatTrans, site: &SpecSite, scope: &Scope) -> Result<NatTrans, TransportError> {
    let mut components = Vec::new();
    for (o, obj) in site.objects.iter().enumerate() {
        let xs = scope_obj(site, scope, obj.x)?;
        let comp = from.elements[o]
            .iter()
            .map(|&a| {
                to.elements[o]
                    .binary_search(&beta.components[xs][a])
                    .map_err(|_| TransportError::NotWellDefined(site.object_names[o].clone()))
            })
            .collect::<Result<_, _>>()?;
        components.push(comp);
    }
    Ok(NatTrans { components })
}

/// `hat G` on the scope; every tag `(site object, element)` is mapped to its
/// element of `hat G (x)`, and each element remembers its least tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hat {
    pub functor: SetFunctor,
    pub representatives: Vec<Vec<(ObjId, usize)>>,
    pub classes: Vec<HashMap<(ObjId, usize), usize>>,
}

fn site_objects_over(site: &SpecSite, x: crate::category::Obj) -> Result<Vec<ObjId>, TransportError> {
    let spec = site.spectrum();
    spec.filters(x)?
        .into_iter()
        .map(|p| {
            let o = spec.object(x, p)?;
            site.object_index(&o)
                .ok_or_else(|| TransportError::SiteIncomplete(spec.object_name(&o)))
        })
        .collect()
}

fn hat_with(site: &SpecSite, scope: &Scope, g: &SetFunctor, glue: bool) -> Result<Hat, TransportError> {
    let spec = site.spectrum();
    let mut representatives = Vec::new();
    let mut classes = Vec::new();
    for &x in &scope.objects {
        let over = site_objects_over(site, x)?;
        let tags: Vec<(ObjId, usize)> = over.iter().flat_map(|&o| (0..g.values[o]).map(move |e| (o, e))).collect();
        let index: HashMap<(ObjId, usize), usize> = tags.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let mut uf = UnionFind::new(tags.len());
        if glue {
            let top = spec.type_lattice(x)?.sub.top();
            for &fine in &over {
                for &coarse in &over {
                    let (pf, pc) = (&site.objects[fine].filter, &site.objects[coarse].filter);
                    if fine == coarse || !pc.is_subset_of(pf) {
                        continue;
                    }
                    let germ = spec.germ_from_partial(&site.objects[fine], &site.objects[coarse], top, &site.c.identity(x))?;
                    let m = site.germ_id(&germ).expect("both ends are site objects");
                    for e in 0..g.values[fine] {
                        uf.union(index[&(fine, e)], index[&(coarse, g.apply(m, e))]);
                    }
                }
            }
        }
        let mut reps = Vec::new();
        let mut root_class = HashMap::new();
        let mut map = HashMap::new();
        for (i, &t) in tags.iter().enumerate() {
            let r = uf.find(i);
            let k = *root_class.entry(r).or_insert_with(|| {
                reps.push(tags[r]);
                reps.len() - 1
            });
            map.insert(t, k);
        }
        representatives.push(reps);
        classes.push(map);
    }
    let mut actions = Vec::new();
    for m in &scope.mors {
        let (xs, ys) = (scope.obj(m.dom).expect("scope"), scope.obj(m.cod).expect("scope"));
        let mut table = Vec::new();
        for &(o, e) in &representatives[xs] {
            let germ = spec.total_germ(&site.objects[o], m)?;
            let target = site
                .object_index(&germ.target)
                .ok_or_else(|| TransportError::SiteIncomplete(spec.object_name(&germ.target)))?;
            let gm = site.germ_id(&germ).expect("both ends are site objects");
            table.push(classes[ys][&(target, g.apply(gm, e))]);
        }
        actions.push(table);
    }
    let functor = SetFunctor {
        values: representatives.iter().map(Vec::len).collect(),
        actions,
    };
    Ok(Hat {
        functor,
        representatives,
        classes,
    })
}

/// Tagged disjoint union over the ultrafilters.
pub fn hat_disjoint(site: &SpecSite, scope: &Scope, g: &SetFunctor) -> Result<Hat, TransportError> {
    if site.variant != Variant::Ultra {
        return Err(TransportError::WrongVariant(Variant::Ultra));
    }
    hat_with(site, scope, g, false)
}

/// Colimit over the prime filters along identity germs.
pub fn hat_colim(site: &SpecSite, scope: &Scope, g: &SetFunctor) -> Result<Hat, TransportError> {
    if site.variant != Variant::Prime {
        return Err(TransportError::WrongVariant(Variant::Prime));
    }
    hat_with(site, scope, g, true)
}

/// The hat matching the site's variant.
pub fn hat(site: &SpecSite, scope: &Scope, g: &SetFunctor) -> Result<Hat, TransportError> {
    hat_with(site, scope, g, site.variant == Variant::Prime)
}

/// `hat` on a transformation `G => G'`.
pub fn hat_map(from: &Hat, to: &Hat, alpha: &NatTrans) -> NatTrans {
    NatTrans {
        components: from
            .representatives
            .iter()
            .enumerate()
            .map(|(xs, reps)| reps.iter().map(|&(o, e)| to.classes[xs][&(o, alpha.components[o][e])]).collect())
            .collect(),
    }
}

/// `G => tilde hat G`, sending `e` in `G (x, p)` to its class.
pub fn unit(site: &SpecSite, scope: &Scope, g: &SetFunctor, h: &Hat, th: &Tilde) -> Result<NatTrans, TransportError> {
    let mut components = Vec::new();
    for (o, obj) in site.objects.iter().enumerate() {
        let xs = scope_obj(site, scope, obj.x)?;
        let comp = (0..g.values[o])
            .map(|e| {
                th.elements[o]
                    .binary_search(&h.classes[xs][&(o, e)])
                    .map_err(|_| TransportError::NotWellDefined(site.object_names[o].clone()))
            })
            .collect::<Result<_, _>>()?;
        components.push(comp);
    }
    Ok(NatTrans { components })
}

/// `hat tilde F => F`, reading each class's tag as an element of `F x`.
pub fn counit(ht: &Hat, t: &Tilde) -> NatTrans {
    NatTrans {
        components: ht
            .representatives
            .iter()
            .map(|reps| reps.iter().map(|&(o, i)| t.elements[o][i]).collect())
            .collect(),
    }
}

/// The bijection `Hom(hat G, F) -> Hom(G, tilde F)`: restrict the
/// `x`-component to the tags over `(x, p)`.
pub fn phi(site: &SpecSite, scope: &Scope, h: &Hat, t: &Tilde, beta: &NatTrans) -> Option<NatTrans> {
    let mut components = Vec::new();
    for (o, obj) in site.objects.iter().enumerate() {
        let xs = scope.obj(obj.x)?;
        let n = h.classes[xs].keys().filter(|(src, _)| *src == o).count();
        let comp = (0..n)
            .map(|e| t.elements[o].binary_search(&beta.components[xs][h.classes[xs][&(o, e)]]).ok())
            .collect::<Option<_>>()?;
        components.push(comp);
    }
    Some(NatTrans { components })
}

/// The inverse `Hom(G, tilde F) -> Hom(hat G, F)`.
pub fn psi(h: &Hat, t: &Tilde, alpha: &NatTrans) -> NatTrans {
    NatTrans {
        components: h
            .representatives
            .iter()
            .map(|reps| reps.iter().map(|&(o, e)| t.elements[o][alpha.components[o][e]]).collect())
            .collect(),
    }
}

/// Sizes of both hom-sets and the first failure found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjunctionReport {
    pub left: usize,
    pub right: usize,
    pub verdict: Verdict,
}

/// Checks that `phi` and `psi` are mutually inverse bijections, that they
/// agree with the unit/counit formulas, and the triangle identities.
pub fn adjunction_check(
    site: &SpecSite,
    scope: &Scope,
    g: &SetFunctor,
    f: &SetFunctor,
) -> Result<AdjunctionReport, TransportError> {
    let h = hat(site, scope, g)?;
    let t = tilde(site, scope, f)?;
    let th = tilde(site, scope, &h.functor)?;
    let ht = hat(site, scope, &t.functor)?;
    let eta = unit(site, scope, g, &h, &th)?;
    let eps = counit(&ht, &t);
    let left = nat_trans(&scope.cat, &h.functor, f);
    let right = nat_trans(&site.cat, g, &t.functor);
    let report = |verdict| AdjunctionReport {
        left: left.len(),
        right: right.len(),
        verdict,
    };
    if left.len() != right.len() {
        return Ok(report(Verdict::no(format!("hom-set sizes {} and {}", left.len(), right.len()))));
    }
    for (i, beta) in left.iter().enumerate() {
        let Some(a) = phi(site, scope, &h, &t, beta) else {
            return Ok(report(Verdict::no(format!("phi of left {i} leaves tilde F"))));
        };
        if !a.is_natural(&site.cat, g, &t.functor) || psi(&h, &t, &a) != *beta {
            return Ok(report(Verdict::no(format!("phi of left {i}"))));
        }
        if tilde_map(&th, &t, beta, site, scope)?.compose(&eta) != a {
            return Ok(report(Verdict::no(format!("phi of left {i} differs from tilde(beta) . unit"))));
        }
    }
    for (i, alpha) in right.iter().enumerate() {
        let b = psi(&h, &t, alpha);
        if !b.is_natural(&scope.cat, &h.functor, f) || phi(site, scope, &h, &t, &b).as_ref() != Some(alpha) {
            return Ok(report(Verdict::no(format!("psi of right {i}"))));
        }
        let ha = hat_map(&h, &ht, alpha);
        if eps.compose(&ha) != b {
            return Ok(report(Verdict::no(format!("psi of right {i} differs from counit . hat(alpha)"))));
        }
    }
    let hth = hat(site, scope, &th.functor)?;
    let first = counit(&hth, &th).compose(&hat_map(&h, &hth, &eta));
    if first != NatTrans::identity(&h.functor) {
        return Ok(report(Verdict::no("triangle at hat G")));
    }
    let tht = tilde(site, scope, &ht.functor)?;
    let eta_t = unit(site, scope, &t.functor, &ht, &tht)?;
    let second = tilde_map(&tht, &t, &eps, site, scope)?.compose(&eta_t);
    if second != NatTrans::identity(&t.functor) {
        return Ok(report(Verdict::no("triangle at tilde F")));
    }
    Ok(report(Verdict::yes()))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::category::PresentedCategory;
    use crate::lattice::FinLattice;

    /// `F(top) = {s, t}`, `F(a) = {s}`, `F(b) = {t}`, `F(bottom)` empty.
    pub(crate) fn points(scope: &Scope) -> SetFunctor {
        let values = vec![0, 1, 1, 2];
        let actions = scope
            .mors
            .iter()
            .map(|m| match (m.dom, m.cod) {
                (1, 3) => vec![0],
                (2, 3) => vec![1],
                (x, y) if x == y => (0..values[x]).collect(),
                _ => vec![],
            })
            .collect();
        let f = SetFunctor { values, actions };
        f.validate(&scope.cat).unwrap();
        f
    }

    #[test]
    fn tilde_of_points_intersects_images() {
        let c = PresentedCategory::lattice(FinLattice::powerset(2));
        let scope = c.scope(&c.objects()).unwrap();
        let f = points(&scope);
        for v in [Variant::Prime, Variant::Ultra] {
            let site = SpecSite::build(&c, v, &c.objects()).unwrap();
            let t = tilde(&site, &scope, &f).unwrap();
            t.functor.validate(&site.cat).unwrap();
            let o = site.objects.iter().position(|o| o.x == 3 && o.generator == 1).unwrap();
            assert_eq!(t.elements[o], vec![0]);
            let h = hat(&site, &scope, &t.functor).unwrap();
            assert!(counit(&h, &t).is_iso(&f));
            assert!(counit(&h, &t).is_natural(&scope.cat, &h.functor, &f));
        }
    }

    #[test]
    fn hat_disjoint_tags_every_ultrafilter() {
        let c = PresentedCategory::finsets(4);
        let scope = c.scope(&[1, 2]).unwrap();
        let site = SpecSite::build(&c, Variant::Ultra, &[1, 2]).unwrap();
        let one = SetFunctor::constant(&site.cat, 1);
        let h = hat_disjoint(&site, &scope, &one).unwrap();
        assert_eq!(h.functor.values, vec![1, 2]);
        h.functor.validate(&scope.cat).unwrap();
        let empty = SetFunctor::constant(&site.cat, 0);
        assert_eq!(hat_disjoint(&site, &scope, &empty).unwrap().functor.values, vec![0, 0]);
        assert!(matches!(hat_colim(&site, &scope, &one), Err(TransportError::WrongVariant(_))));
    }

    #[test]
    fn hat_colim_on_the_chain_keeps_the_top_filter() {
        let c = PresentedCategory::lattice(FinLattice::chain(3));
        let scope = c.scope(&c.objects()).unwrap();
        let site = SpecSite::build(&c, Variant::Prime, &c.objects()).unwrap();
        for o in site.cat.objects() {
            let g = crate::sheaf::yoneda(&site.cat.opposite(), o);
            g.validate(&site.cat).unwrap();
            let h = hat_colim(&site, &scope, &g).unwrap();
            h.functor.validate(&scope.cat).unwrap();
            let th = tilde(&site, &scope, &h.functor).unwrap();
            let eta = unit(&site, &scope, &g, &h, &th).unwrap();
            assert!(eta.is_iso(&th.functor));
        }
    }

    #[test]
    fn adjunction_on_small_pairs() {
        let c = PresentedCategory::lattice(FinLattice::powerset(2));
        let scope = c.scope(&c.objects()).unwrap();
        let site = SpecSite::build(&c, Variant::Ultra, &c.objects()).unwrap();
        let f = points(&scope);
        for g in [SetFunctor::constant(&site.cat, 1), SetFunctor::constant(&site.cat, 2)] {
            let r = adjunction_check(&site, &scope, &g, &f).unwrap();
            assert!(r.verdict.holds, "{:?}", r.verdict);
        }
    }
}
