//! Exhaustive and randomized harnesses for the transport constructions.
//!
//! [`equivalence_harness`] runs `hat` and `tilde` over every bounded functor
//! on both sides, [`random_finsets_pairs`] draws seeded pairs over the
//! FinSets `{1, 2}` ultrafilter site, [`topos_predicates`] asserts local
//! connectedness and prime generation of a finite presheaf category, and
//! [`allthree_check`] compares each coherent functor with the left Kan
//! extension of its `tilde` along `phi0`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{adjunction_check, counit, hat, hat_map, tilde, tilde_map, unit, TransportError};
use crate::category::{PresentedCategory, Scope};
use crate::coverage::{generate_families, FamilyKind};
use crate::finite::{FiniteCategory, ObjId};
use crate::functor::{nat_trans, FunctorEnumerator, SetFunctor};
use crate::phi::phi0;
use crate::report::{Check, CheckLog, Status};
use crate::sheaf::UnionFind;
use crate::spectrum::{SpecSite, Variant};
use crate::transport::flat::is_p_infty_flat;
use crate::transport::preserve::{certify, has_variant_certificate, is_coherent_on_scope, Property};

/// Counts passes of one named check and keeps its first failure.
struct Tally {
    name: String,
    passed: usize,
    failure: Option<String>,
}

impl Tally {
    fn new(name: impl Into<String>) -> Self {
        Tally {
            name: name.into(),
            passed: 0,
            failure: None,
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else if self.failure.is_none() {
            self.failure = Some(witness());
        }
    }

    fn check(self) -> Check {
        match self.failure {
            Some(w) => Check::fail(self.name, w),
            None => Check::new(self.name, Status::Pass, format!("cases={}", self.passed)),
        }
    }
}

fn show(f: &SetFunctor) -> String {
    format!("values={:?} actions={:?}", f.values, f.actions)
}

/// Value bound and the largest enumeration size estimate accepted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub value: usize,
    pub budget: f64,
}

pub fn check_budget(cat: &FiniteCategory, bounds: Bounds) -> Result<(), TransportError> {
    let estimate = FunctorEnumerator::new(cat, bounds.value).size_estimate();
    if estimate > bounds.budget {
        return Err(TransportError::Budget {
            estimate,
            budget: bounds.budget,
        });
    }
    Ok(())
}

/// Every family of the variant's effective-epi coverage is sent to a
/// jointly surjective family.
pub fn is_e_preserving(site: &SpecSite, g: &SetFunctor) -> Result<bool, TransportError> {
    let families = generate_families(site, FamilyKind::for_variant(site.variant))
        .map_err(|e| TransportError::SiteIncomplete(e.to_string()))?;
    for fam in families {
        let Some(t) = site.object_index(&fam.target) else { continue };
        let mut hit = vec![false; g.values[t]];
        for leg in &fam.legs {
            let Some(m) = site.germ_id(leg) else { continue };
            for &b in &g.actions[m] {
                hit[b] = true;
            }
        }
        if hit.iter().any(|&h| !h) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn in_c_class(c: &PresentedCategory, scope: &Scope, f: &SetFunctor, variant: Variant) -> Result<bool, TransportError> {
    Ok(match variant {
        Variant::Ultra => has_variant_certificate(c, scope, f, variant)?,
        Variant::Prime => is_coherent_on_scope(c, scope, f)?,
    })
}

fn in_site_class(site: &SpecSite, g: &SetFunctor) -> bool {
    match site.variant {
        Variant::Ultra => true,
        Variant::Prime => is_p_infty_flat(site, g).holds,
    }
}

/// Equivalence between bounded functors on the scope of `C` and on its
/// spectrum site; the prime variant restricts to flat functors and to lex
/// union-preserving ones, and also checks the coherent refinement.
pub fn equivalence_harness(
    c: &PresentedCategory,
    variant: Variant,
    objects: &[crate::category::Obj],
    bounds: Bounds,
) -> Result<CheckLog, TransportError> {
    let site = SpecSite::build(c, variant, objects)?;
    let scope = c.scope(objects)?;
    check_budget(&scope.cat, bounds)?;
    check_budget(&site.cat, bounds)?;
    let v = variant.as_str();

    let mut c_side = Vec::new();
    for f in FunctorEnumerator::new(&scope.cat, bounds.value) {
        if in_c_class(c, &scope, &f, variant)? {
            c_side.push(f);
        }
    }
    let site_side: Vec<SetFunctor> = FunctorEnumerator::new(&site.cat, bounds.value)
        .filter(|g| in_site_class(&site, g))
        .collect();

    let mut log = CheckLog::new();
    log.push(Check::new(
        format!("{v} corpus"),
        Status::Pass,
        format!("c-side={} site-side={}", c_side.len(), site_side.len()),
    ));

    let mut lands = Tally::new(format!("{v} tilde lands in the site class"));
    let mut counit_iso = Tally::new(format!("{v} counit iso"));
    let mut monos = Tally::new(format!("{v} tilde transitions are inclusions"));
    let mut refine = Tally::new(format!("{v} effective epis iff E-preserving tilde"));
    let mut tildes = Vec::new();
    for f in &c_side {
        let t = tilde(&site, &scope, f)?;
        lands.record(t.functor.validate(&site.cat).is_ok() && in_site_class(&site, &t.functor), || show(f));
        let ht = hat(&site, &scope, &t.functor)?;
        let eps = counit(&ht, &t);
        counit_iso.record(eps.is_iso(f) && eps.is_natural(&scope.cat, &ht.functor, f), || show(f));
        if variant == Variant::Prime {
            let nested = (0..site.objects.len()).all(|p| {
                (0..site.objects.len()).all(|q| {
                    let (op, oq) = (&site.objects[p], &site.objects[q]);
                    op.x != oq.x
                        || !op.filter.is_subset_of(&oq.filter)
                        || t.elements[q].iter().all(|a| t.elements[p].binary_search(a).is_ok())
                })
            });
            monos.record(nested, || show(f));
            let epis = certify(c, &scope, f, Property::EffectiveEpis)?.holds();
            refine.record(epis == is_e_preserving(&site, &t.functor)?, || show(f));
        }
        tildes.push(t);
    }

    let mut hat_lands = Tally::new(format!("{v} hat lands in the functor class"));
    let mut unit_iso = Tally::new(format!("{v} unit iso"));
    let mut cocone = Tally::new(format!("{v} cocone maps are mono"));
    let mut hat_epis = Tally::new(format!("{v} E-preserving gives effective-epi preserving hat"));
    let mut hats = Vec::new();
    for g in &site_side {
        let h = hat(&site, &scope, g)?;
        hat_lands.record(in_c_class(c, &scope, &h.functor, variant)?, || show(g));
        let th = tilde(&site, &scope, &h.functor)?;
        let eta = unit(&site, &scope, g, &h, &th)?;
        unit_iso.record(eta.is_iso(&th.functor) && eta.is_natural(&site.cat, g, &th.functor), || show(g));
        let injective = site.objects.iter().enumerate().all(|(o, obj)| {
            let xs = scope.obj(obj.x).expect("site objects lie over the scope");
            let mut seen: Vec<usize> = (0..g.values[o]).map(|e| h.classes[xs][&(o, e)]).collect();
            seen.sort_unstable();
            seen.windows(2).all(|w| w[0] != w[1])
        });
        cocone.record(injective, || show(g));
        if is_e_preserving(&site, g)? {
            hat_epis.record(certify(c, &scope, &h.functor, Property::EffectiveEpis)?.holds(), || show(g));
        }
        hats.push(h);
    }

    let mut tilde_ff = Tally::new(format!("{v} tilde bijective on transformations"));
    for (i, f) in c_side.iter().enumerate() {
        for (j, f2) in c_side.iter().enumerate() {
            let left = nat_trans(&scope.cat, f, f2);
            let right = nat_trans(&site.cat, &tildes[i].functor, &tildes[j].functor);
            let mut images = left
                .iter()
                .map(|b| tilde_map(&tildes[i], &tildes[j], b, &site, &scope))
                .collect::<Result<Vec<_>, _>>()?;
            images.sort_by(|a, b| a.components.cmp(&b.components));
            images.dedup();
            tilde_ff.record(images.len() == left.len() && left.len() == right.len(), || {
                format!("{} to {}", show(f), show(f2))
            });
        }
    }
    let mut hat_ff = Tally::new(format!("{v} hat bijective on transformations"));
    for (i, g) in site_side.iter().enumerate() {
        for (j, g2) in site_side.iter().enumerate() {
            let left = nat_trans(&site.cat, g, g2);
            let right = nat_trans(&scope.cat, &hats[i].functor, &hats[j].functor);
            let mut images: Vec<_> = left.iter().map(|a| hat_map(&hats[i], &hats[j], a)).collect();
            images.sort_by(|a, b| a.components.cmp(&b.components));
            images.dedup();
            hat_ff.record(images.len() == left.len() && left.len() == right.len(), || {
                format!("{} to {}", show(g), show(g2))
            });
        }
    }

    let mut adjunction = Tally::new(format!("{v} adjunction"));
    for g in &site_side {
        for f in &c_side {
            let r = adjunction_check(&site, &scope, g, f)?;
            adjunction.record(r.verdict.holds, || {
                format!("{} / {}: {}", show(g), show(f), r.verdict.witness.clone().unwrap_or_default())
            });
        }
    }

    let mut tallies = vec![lands, counit_iso, hat_lands, unit_iso, cocone, tilde_ff, hat_ff, adjunction];
    if variant == Variant::Prime {
        tallies.extend([monos, refine, hat_epis]);
    }
    for t in tallies {
        log.push(t.check());
    }
    Ok(log)
}

/// The FinSets `{1, 2}` ultrafilter site with its scope.
pub fn finsets_pair_site() -> Result<(PresentedCategory, Scope), TransportError> {
    let c = PresentedCategory::finsets(2);
    let scope = c.scope(&[1, 2])?;
    Ok((c, scope))
}

fn permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

fn inverse(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &v) in p.iter().enumerate() {
        inv[v] = i;
    }
    inv
}

/// A functor on a site whose objects are all uniquely isomorphic: one set,
/// relabelled per object.
fn random_site_functor(site: &SpecSite, rng: &mut ChaCha8Rng, max: usize) -> SetFunctor {
    let n = rng.gen_range(0..=max);
    let labels: Vec<Vec<usize>> = site.cat.objects().map(|_| permutation(rng, n)).collect();
    let actions = (0..site.cat.num_morphisms())
        .map(|m| {
            let back = inverse(&labels[site.cat.dom(m)]);
            (0..n).map(|e| labels[site.cat.cod(m)][back[e]]).collect()
        })
        .collect();
    SetFunctor {
        values: vec![n; site.cat.num_objects()],
        actions,
    }
}

/// `x -> x * S` relabelled per object.
fn random_product_functor(c: &PresentedCategory, scope: &Scope, rng: &mut ChaCha8Rng, max: usize) -> SetFunctor {
    let s = rng.gen_range(0..=max);
    let card = |x| c.identity(x).table().expect("finite sets").len();
    let labels: Vec<Vec<usize>> = scope.objects.iter().map(|&x| permutation(rng, card(x) * s)).collect();
    let actions = scope
        .mors
        .iter()
        .map(|m| {
            let table = m.table().expect("finite sets");
            let (d, t) = (scope.obj(m.dom).expect("scope"), scope.obj(m.cod).expect("scope"));
            let back = inverse(&labels[d]);
            (0..card(m.dom) * s)
                .map(|e| {
                    let k = back[e];
                    labels[t][table[k / s] * s + k % s]
                })
                .collect()
        })
        .collect();
    SetFunctor {
        values: scope.objects.iter().map(|&x| card(x) * s).collect(),
        actions,
    }
}

/// Seeded adjunction checks on random pairs over the FinSets `{1, 2}`
/// ultrafilter site.
pub fn random_finsets_pairs(seed: u64, pairs: usize, max: usize) -> Result<CheckLog, TransportError> {
    let (c, scope) = finsets_pair_site()?;
    let site = SpecSite::build(&c, Variant::Ultra, &scope.objects)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adjunction = Tally::new("random adjunction");
    let mut unit_iso = Tally::new("random unit iso");
    let mut counit_iso = Tally::new("random counit iso");
    for _ in 0..pairs {
        let g = random_site_functor(&site, &mut rng, max);
        let f = random_product_functor(&c, &scope, &mut rng, max);
        debug_assert!(g.validate(&site.cat).is_ok() && f.validate(&scope.cat).is_ok());
        let r = adjunction_check(&site, &scope, &g, &f)?;
        adjunction.record(r.verdict.holds, || format!("{} / {}", show(&g), show(&f)));
        let h = hat(&site, &scope, &g)?;
        let th = tilde(&site, &scope, &h.functor)?;
        unit_iso.record(unit(&site, &scope, &g, &h, &th)?.is_iso(&th.functor), || show(&g));
        let t = tilde(&site, &scope, &f)?;
        let ht = hat(&site, &scope, &t.functor)?;
        counit_iso.record(counit(&ht, &t).is_iso(&f), || show(&f));
    }
    let mut log = CheckLog::new();
    log.push(Check::new("random seed", Status::Pass, format!("seed={seed} pairs={pairs}")));
    for t in [adjunction, unit_iso, counit_iso] {
        log.push(t.check());
    }
    Ok(log)
}

/// Elements of a presheaf, as `(object, element)` in object order.
fn element_index(p: &SetFunctor) -> (Vec<(ObjId, usize)>, Vec<usize>) {
    let mut offsets = Vec::new();
    let mut all = Vec::new();
    for (o, &n) in p.values.iter().enumerate() {
        offsets.push(all.len());
        all.extend((0..n).map(|e| (o, e)));
    }
    (all, offsets)
}

/// Largest generated subpresheaf whose subpresheaves are enumerated.
pub const JOIN_SCAN_BOUND: usize = 12;

/// For every presheaf on `k` with values at most `bound`: connected
/// components partition it into subpresheaves, and the subpresheaves
/// generated by single elements cover it and are join-indecomposable.
pub fn topos_predicates(k: &FiniteCategory, bound: usize) -> CheckLog {
    let op = k.opposite();
    let mut components = Tally::new(format!("locally connected {}", k.name()));
    let mut prime = Tally::new(format!("prime generated {}", k.name()));
    let mut scanned = 0usize;
    let mut skipped = 0usize;
    for p in FunctorEnumerator::new(&op, bound) {
        let (all, offsets) = element_index(&p);
        let at = |o: ObjId, e: usize| offsets[o] + e;
        let restrict = |o: ObjId, e: usize| -> Vec<usize> {
            k.into_obj(o).into_iter().map(|m| at(k.dom(m), p.apply(m, e))).collect()
        };
        let mut uf = UnionFind::new(all.len());
        for &(o, e) in &all {
            for r in restrict(o, e) {
                uf.union(at(o, e), r);
            }
        }
        let mut roots: Vec<usize> = (0..all.len()).map(|i| uf.find(i)).collect();
        let closed = (0..all.len()).all(|i| {
            let (o, e) = all[i];
            restrict(o, e).into_iter().all(|r| roots[r] == roots[i])
        });
        roots.sort_unstable();
        roots.dedup();
        components.record(closed, || show(&p));

        let generated: Vec<Vec<bool>> = all
            .iter()
            .map(|&(o, e)| {
                let mut s = vec![false; all.len()];
                for r in restrict(o, e) {
                    s[r] = true;
                }
                s
            })
            .collect();
        let covers = (0..all.len()).all(|i| generated[i][i]);
        let mut indecomposable = true;
        for gen in &generated {
            let members: Vec<usize> = (0..all.len()).filter(|&j| gen[j]).collect();
            if members.len() > JOIN_SCAN_BOUND {
                skipped += 1;
                continue;
            }
            scanned += 1;
            let closed_sub = |mask: u32| {
                members.iter().enumerate().all(|(a, &j)| {
                    mask & (1 << a) == 0
                        || members
                            .iter()
                            .enumerate()
                            .all(|(b, &r)| !generated[j][r] || mask & (1 << b) != 0)
                })
            };
            let full = (1u32 << members.len()) - 1;
            let proper: Vec<u32> = (0..full).filter(|&m| closed_sub(m)).collect();
            let split = proper.iter().any(|&a| proper.iter().any(|&b| a | b == full));
            indecomposable &= !split;
        }
        prime.record(covers && indecomposable, || show(&p));
    }
    let mut log = CheckLog::new();
    log.push(components.check());
    let mut check = prime.check();
    if check.status == Status::Pass {
        check.detail = format!("{} scanned={scanned} skipped={skipped}", check.detail);
    }
    log.push(check);
    log
}

/// Classes of `coend_o phi0(x)(o) * tilde F(o)` mapped into `F x`.
fn coend_map(
    site: &SpecSite,
    scope: &Scope,
    f: &SetFunctor,
    x: crate::category::Obj,
) -> Result<(usize, Vec<usize>), TransportError> {
    let p = phi0(site, x)?;
    let t = tilde(site, scope, f)?;
    let spec = site.spectrum();
    let n = site.objects.len();
    let mut offsets = vec![0; n + 1];
    for o in 0..n {
        offsets[o + 1] = offsets[o] + p.presheaf.values[o] * t.functor.values[o];
    }
    let at = |o: usize, h: usize, a: usize| offsets[o] + h * t.functor.values[o] + a;
    let mut uf = UnionFind::new(offsets[n]);
    for m in 0..site.cat.num_morphisms() {
        let (s, d) = (site.cat.dom(m), site.cat.cod(m));
        for h in 0..p.presheaf.values[d] {
            for a in 0..t.functor.values[s] {
                uf.union(at(s, p.presheaf.apply(m, h), a), at(d, h, t.functor.apply(m, a)));
            }
        }
    }
    let mut value = vec![None; offsets[n]];
    for (o, obj) in site.objects.iter().enumerate() {
        let t_lat = spec.type_lattice(obj.x)?;
        let gen = &t_lat.sub.subs[obj.generator].mono;
        let gen = scope.mor_id(gen).ok_or_else(|| TransportError::OutOfScope(site.c.morphism_name(gen)))?;
        for (hi, h) in p.elements[o].iter().enumerate() {
            let hm = scope.mor_id(h).ok_or_else(|| TransportError::OutOfScope(site.c.morphism_name(h)))?;
            for (ai, &a) in t.elements[o].iter().enumerate() {
                let lift = f.actions[gen].iter().position(|&v| v == a).expect("tilde lies in the generator image");
                let target = f.actions[hm][lift];
                let root = uf.find(at(o, hi, ai));
                match value[root] {
                    None => value[root] = Some(target),
                    Some(v) if v == target => {}
                    Some(_) => return Err(TransportError::NotWellDefined(format!("coend at {}", site.c.object_name(x)))),
                }
            }
        }
    }
    let mut images: Vec<usize> = value.into_iter().flatten().collect();
    let classes = images.len();
    images.sort_unstable();
    Ok((classes, images))
}

/// For every functor in `k`, the left Kan extension of `tilde F` along
/// `phi0` agrees with `F` on the scope via the canonical map; the
/// ultrafilter triangle is checked when `C` is Boolean.
pub fn allthree_check(c: &PresentedCategory, objects: &[crate::category::Obj], k: &[SetFunctor]) -> Result<CheckLog, TransportError> {
    let scope = c.scope(objects)?;
    let mut log = CheckLog::new();
    if k.is_empty() {
        log.push(Check::new("allthree", Status::Pass, "empty family; the target is trivial"));
        return Ok(log);
    }
    let boolean = c.is_boolean()?.holds;
    for variant in [Variant::Prime, Variant::Ultra] {
        let name = format!("allthree {} triangle", variant.as_str());
        if variant == Variant::Ultra && !boolean {
            log.push(Check::skip(name, "not Boolean"));
            continue;
        }
        let site = SpecSite::build(c, variant, objects)?;
        let mut tally = Tally::new(name);
        for (i, f) in k.iter().enumerate() {
            if !is_coherent_on_scope(c, &scope, f)? {
                return Err(TransportError::NotWellDefined(format!("functor {i} is not coherent")));
            }
            for (xs, &x) in scope.objects.iter().enumerate() {
                let (classes, images) = coend_map(&site, &scope, f, x)?;
                let bijective = classes == f.values[xs] && images == (0..f.values[xs]).collect::<Vec<_>>();
                tally.record(bijective, || format!("functor {i} at {}", c.object_name(x)));
            }
        }
        log.push(tally.check());
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::FinLattice;

    const BOUNDS: Bounds = Bounds {
        value: 2,
        budget: 1e7,
    };

    fn assert_clean(log: &CheckLog) {
        for c in &log.checks {
            assert_ne!(c.status, Status::Fail, "{}: {}", c.name, c.detail);
        }
    }

    #[test]
    fn ultra_equivalence_on_the_two_element_algebra() {
        let c = PresentedCategory::lattice(FinLattice::chain(2));
        let log = equivalence_harness(&c, Variant::Ultra, &c.objects(), BOUNDS).unwrap();
        assert_clean(&log);
    }

    #[test]
    fn prime_equivalence_on_the_chain() {
        let c = PresentedCategory::lattice(FinLattice::chain(3));
        let log = equivalence_harness(&c, Variant::Prime, &c.objects(), BOUNDS).unwrap();
        assert_clean(&log);
        assert!(log.checks.iter().any(|c| c.name.contains("cocone")));
    }

    #[test]
    fn budget_refuses_large_enumerations() {
        let c = PresentedCategory::lattice(FinLattice::chain(3));
        let tight = Bounds { value: 2, budget: 1.0 };
        assert!(matches!(
            equivalence_harness(&c, Variant::Prime, &c.objects(), tight),
            Err(TransportError::Budget { .. })
        ));
    }

    #[test]
    fn random_pairs_are_reproducible() {
        let a = random_finsets_pairs(7, 20, 2).unwrap();
        let b = random_finsets_pairs(7, 20, 2).unwrap();
        assert_clean(&a);
        assert_eq!(a.to_report().render(), b.to_report().render());
    }

    #[test]
    fn presheaf_categories_are_locally_connected_and_prime_generated() {
        let one = FiniteCategory::preorder("one", vec!["*".into()], |_, _| true);
        assert_clean(&topos_predicates(&one, 3));
        let arrow = FiniteCategory::preorder("arrow", vec!["0".into(), "1".into()], |a, b| a <= b);
        assert_clean(&topos_predicates(&arrow, 2));
    }

    #[test]
    fn allthree_on_the_square() {
        let c = PresentedCategory::lattice(FinLattice::powerset(2));
        let scope = c.scope(&c.objects()).unwrap();
        let up_a = SetFunctor {
            values: vec![0, 1, 0, 1],
            actions: scope
                .mors
                .iter()
                .map(|m| if [1, 3].contains(&m.dom) { vec![0] } else { vec![] })
                .collect(),
        };
        let log = allthree_check(&c, &c.objects(), &[up_a]).unwrap();
        assert_clean(&log);
        assert_eq!(log.counts().pass, 2);
        assert_eq!(allthree_check(&c, &c.objects(), &[]).unwrap().counts().pass, 1);
    }
}
