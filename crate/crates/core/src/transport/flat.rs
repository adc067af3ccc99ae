//! Flatness of set-valued functors on a finite category.
//!
//! [`is_flat`] checks the three finite shapes directly on values: the empty
//! diagram, pairs of objects and parallel pairs. [`filtered_oracle`] builds
//! the category of elements and decides cofilteredness on it; the two must
//! agree.

use crate::finite::FiniteCategory;
use crate::functor::SetFunctor;
use crate::lattice;
use crate::report::Verdict;
use crate::spectrum::SpecSite;

pub fn is_flat(cat: &FiniteCategory, g: &SetFunctor) -> Verdict {
    if g.total_size() == 0 {
        return Verdict::no("empty diagram: no element");
    }
    for a in cat.objects() {
        for b in cat.objects() {
            for s in 0..g.values[a] {
                for t in 0..g.values[b] {
                    let hit = cat.objects().any(|c| {
                        (0..g.values[c]).any(|z| {
                            cat.hom(c, a).iter().any(|&f| g.apply(f, z) == s)
                                && cat.hom(c, b).iter().any(|&h| g.apply(h, z) == t)
                        })
                    });
                    if !hit {
                        return Verdict::no(format!(
                            "pair: ({}:{s}, {}:{t}) has no span",
                            cat.object_name(a),
                            cat.object_name(b)
                        ));
                    }
                }
            }
        }
    }
    for a in cat.objects() {
        for b in cat.objects() {
            let hom = cat.hom(a, b);
            for (i, &f) in hom.iter().enumerate() {
                for &h in &hom[i + 1..] {
                    for s in 0..g.values[a] {
                        if g.apply(f, s) != g.apply(h, s) {
                            continue;
                        }
                        let hit = cat.into_obj(a).into_iter().any(|k| {
                            cat.compose(f, k) == cat.compose(h, k)
                                && (0..g.values[cat.dom(k)]).any(|z| g.apply(k, z) == s)
                        });
                        if !hit {
                            return Verdict::no(format!(
                                "parallel pair {} {} at {}:{s}",
                                cat.morphism_name(f),
                                cat.morphism_name(h),
                                cat.object_name(a)
                            ));
                        }
                    }
                }
            }
        }
    }
    Verdict::yes()
}

/// Cofilteredness of the category of elements.
pub fn filtered_oracle(cat: &FiniteCategory, g: &SetFunctor) -> bool {
    let (el, _) = g.elements(cat);
    if el.num_objects() == 0 {
        return false;
    }
    let cone_pair = |a, b| el.objects().any(|c| !el.hom(c, a).is_empty() && !el.hom(c, b).is_empty());
    if !el.objects().all(|a| el.objects().all(|b| cone_pair(a, b))) {
        return false;
    }
    el.objects().all(|a| {
        el.objects().all(|b| {
            let hom = el.hom(a, b);
            hom.iter().enumerate().all(|(i, &u)| {
                hom[i + 1..]
                    .iter()
                    .all(|&v| el.into_obj(a).into_iter().any(|w| el.compose(u, w) == el.compose(v, w)))
            })
        })
    })
}

/// Flat, and along every chain of prime filters on one object the values
/// embed and meet in the value at the union.
pub fn is_p_infty_flat(site: &SpecSite, g: &SetFunctor) -> Verdict {
    let flat = is_flat(&site.cat, g);
    if !flat.holds {
        return flat;
    }
    chain_condition(site, g)
}

/// The chain part of p-infinity flatness alone.
pub fn chain_condition(site: &SpecSite, g: &SetFunctor) -> Verdict {
    let spec = site.spectrum();
    for &x in &site.scope {
        let over: Vec<usize> = (0..site.objects.len()).filter(|&o| site.objects[o].x == x).collect();
        let t = match spec.type_lattice(x) {
            Ok(t) => t,
            Err(e) => return Verdict::no(e.to_string()),
        };
        let top = t.sub.top();
        let transition = |fine: usize, coarse: usize| -> Option<usize> {
            let germ = spec
                .germ_from_partial(&site.objects[fine], &site.objects[coarse], top, &site.c.identity(x))
                .ok()?;
            site.germ_id(&germ)
        };
        for &p0 in &over {
            for &pl in &over {
                if p0 == pl || !site.objects[p0].filter.is_subset_of(&site.objects[pl].filter) {
                    continue;
                }
                let chain: Vec<usize> = over
                    .iter()
                    .copied()
                    .filter(|&q| {
                        site.objects[p0].filter.is_subset_of(&site.objects[q].filter)
                            && site.objects[q].filter.is_subset_of(&site.objects[pl].filter)
                    })
                    .collect();
                let filters: Vec<_> = chain.iter().map(|&q| site.objects[q].filter.clone()).collect();
                let is_chain = filters
                    .iter()
                    .all(|a| filters.iter().all(|b| a.is_subset_of(b) || b.is_subset_of(a)));
                if !is_chain {
                    continue;
                }
                debug_assert_eq!(
                    lattice::chain_union(&t.lattice, &filters).ok().as_ref(),
                    Some(&site.objects[pl].filter)
                );
                let Some(top_map) = transition(pl, p0) else {
                    return Verdict::no("missing identity germ");
                };
                let mut meet = vec![true; g.values[p0]];
                for &q in &chain {
                    let m = transition(q, p0).expect("identity germs along a chain");
                    let mut hit = vec![false; g.values[p0]];
                    for e in 0..g.values[q] {
                        hit[g.apply(m, e)] = true;
                    }
                    for (a, b) in meet.iter_mut().zip(hit) {
                        *a &= b;
                    }
                }
                let image: Vec<usize> = (0..g.values[pl]).map(|e| g.apply(top_map, e)).collect();
                let mut sorted = image.clone();
                sorted.sort_unstable();
                sorted.dedup();
                let expected: Vec<usize> = (0..g.values[p0]).filter(|&e| meet[e]).collect();
                if sorted.len() != image.len() || sorted != expected {
                    return Verdict::no(format!(
                        "chain {} .. {}",
                        site.object_names[p0], site.object_names[pl]
                    ));
                }
            }
        }
    }
    Verdict::yes()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::PresentedCategory;
    use crate::finite::FiniteCategory;
    use crate::functor::all_functors;
    use crate::lattice::FinLattice;
    use crate::spectrum::Variant;

    #[test]
    fn small_examples() {
        let one = FiniteCategory::preorder("one", vec!["*".into()], |_, _| true);
        let two = SetFunctor::constant(&one, 2);
        assert!(!is_flat(&one, &two).holds);
        assert!(!filtered_oracle(&one, &two));
        let empty = SetFunctor::constant(&one, 0);
        assert!(!is_flat(&one, &empty).holds && !filtered_oracle(&one, &empty));
        let single = SetFunctor::constant(&one, 1);
        assert!(is_flat(&one, &single).holds && filtered_oracle(&one, &single));
    }

    #[test]
    fn oracles_agree_on_the_chain_spectrum() {
        let c = PresentedCategory::lattice(FinLattice::chain(3));
        let site = SpecSite::build(&c, Variant::Prime, &c.objects()).unwrap();
        let mut flat = 0;
        for g in all_functors(&site.cat, 2) {
            let v = is_flat(&site.cat, &g).holds;
            assert_eq!(v, filtered_oracle(&site.cat, &g));
            if v {
                flat += 1;
                assert!(is_p_infty_flat(&site, &g).holds);
            }
        }
        assert!(flat > 0);
    }

    #[test]
    fn non_injective_transition_breaks_the_chain_condition() {
        let c = PresentedCategory::lattice(FinLattice::chain(3));
        let site = SpecSite::build(&c, Variant::Prime, &c.objects()).unwrap();
        let bad = all_functors(&site.cat, 2)
            .into_iter()
            .find(|g| !chain_condition(&site, g).holds)
            .expect("a collapsing transition exists");
        assert!(chain_condition(&site, &bad).witness.unwrap().starts_with("chain"));
    }
}
