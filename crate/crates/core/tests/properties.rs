use proptest::prelude::*;

use typetopos::category::PresentedCategory;
use typetopos::functor::{all_functors, nat_trans, NatTrans};
use typetopos::lattice::{self, FinLattice, Filter};
use typetopos::spectrum::{self, SpecSite, Variant};

/// Down-sets of a poset on `k` points, ordered by inclusion.
fn downsets(k: usize, rel: &[bool]) -> FinLattice {
    let mut le = vec![vec![false; k]; k];
    for i in 0..k {
        for j in i..k {
            le[i][j] = i == j || rel[i * k + j];
        }
    }
    for m in 0..k {
        for i in 0..k {
            for j in 0..k {
                le[i][j] |= le[i][m] && le[m][j];
            }
        }
    }
    let sets: Vec<u32> = (0u32..1 << k)
        .filter(|&s| (0..k).all(|j| s >> j & 1 == 0 || (0..k).all(|i| !le[i][j] || s >> i & 1 == 1)))
        .collect();
    let names = sets.iter().map(|s| format!("d{s}")).collect();
    FinLattice::from_order("downsets", names, |a, b| sets[a] & !sets[b] == 0).unwrap()
}

fn poset() -> impl Strategy<Value = (usize, Vec<bool>)> {
    (1usize..=3).prop_flat_map(|k| (Just(k), proptest::collection::vec(any::<bool>(), k * k)))
}

fn is_prime_by_scan(l: &FinLattice, f: &[bool]) -> bool {
    let n = l.len();
    !f[l.bottom()]
        && f.iter().any(|&b| b)
        && (0..n).all(|a| (0..n).all(|b| !(f[a] && l.leq(a, b)) || f[b]))
        && (0..n).all(|a| (0..n).all(|b| !(f[a] && f[b]) || f[l.meet(a, b)]))
        && (0..n).all(|a| (0..n).all(|b| !f[l.join(a, b)] || f[a] || f[b]))
}

fn indicator(l: &FinLattice, f: &Filter) -> Vec<bool> {
    l.elems().map(|e| f.contains(e)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn downset_lattices_are_distributive((k, rel) in poset()) {
        let l = downsets(k, &rel);
        prop_assert!(l.is_distributive());
        let antichain = (0..k).all(|i| (i + 1..k).all(|j| !rel[i * k + j]));
        prop_assert_eq!(l.is_boolean(), antichain);
    }

    #[test]
    fn prime_filters_match_a_subset_scan((k, rel) in poset()) {
        let l = downsets(k, &rel);
        let n = l.len();
        let mut scanned: Vec<Vec<bool>> = (0u32..1 << n)
            .map(|m| (0..n).map(|i| m >> i & 1 == 1).collect::<Vec<bool>>())
            .filter(|f| is_prime_by_scan(&l, f))
            .collect();
        let mut found: Vec<Vec<bool>> = lattice::prime_filters(&l).unwrap().iter().map(|f| indicator(&l, f)).collect();
        scanned.sort();
        found.sort();
        prop_assert_eq!(found.len(), k);
        prop_assert_eq!(found, scanned);
    }

    #[test]
    fn compatibility_is_symmetric_and_reflexive((k, rel) in poset()) {
        let l = downsets(k, &rel);
        let primes = lattice::prime_filters(&l).unwrap();
        for p in &primes {
            prop_assert!(lattice::compatible(&l, p, p).unwrap());
            for q in &primes {
                prop_assert_eq!(lattice::compatible(&l, p, q).unwrap(), lattice::compatible(&l, q, p).unwrap());
                if p.is_subset_of(q) {
                    prop_assert!(lattice::compatible(&l, p, q).unwrap());
                }
            }
        }
    }

    #[test]
    fn spectrum_skeleton_counts_prime_filters((k, rel) in poset()) {
        let l = downsets(k, &rel);
        let c = PresentedCategory::lattice(l.clone());
        let site = SpecSite::build(&c, Variant::Prime, &c.objects()).unwrap();
        let (classes, _) = spectrum::skeleton(&site.cat);
        prop_assert_eq!(classes.len(), k);
        prop_assert!(spectrum::lattice_duality(&l).unwrap().holds);
    }

    #[test]
    fn transformations_compose_naturally(a in 0usize..64, b in 0usize..64, c in 0usize..64) {
        let cat = PresentedCategory::lattice(FinLattice::chain(3));
        let scope = cat.scope(&cat.objects()).unwrap();
        let all = all_functors(&scope.cat, 2);
        let (f, g, h) = (&all[a % all.len()], &all[b % all.len()], &all[c % all.len()]);
        prop_assert!(NatTrans::identity(f).is_natural(&scope.cat, f, f));
        for x in nat_trans(&scope.cat, f, g) {
            for y in nat_trans(&scope.cat, g, h) {
                prop_assert!(y.compose(&x).is_natural(&scope.cat, f, h));
            }
        }
    }
}
