//! Built-in fixtures: lattices, FinSets scopes, spectrum sites and a small
//! site with a nontrivial topology.

use thiserror::Error;

use crate::category::{Obj, PresentedCategory};
use crate::finite::FiniteCategory;
use crate::lattice::FinLattice;
use crate::sieve::{self, Sieve, Topology};
use crate::spectrum::{SpecError, SpecSite, Variant};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CorpusError {
    #[error("no fixture named `{0}`")]
    Unknown(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Lattice,
    Category,
    Site,
    Topology,
}

/// One named fixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Entry {
    pub name: &'static str,
    pub kind: Kind,
    pub about: &'static str,
}

pub const ENTRIES: &[Entry] = &[
    Entry { name: "lattice-2chain", kind: Kind::Lattice, about: "two-element Boolean algebra" },
    Entry { name: "lattice-3chain", kind: Kind::Lattice, about: "three-element chain" },
    Entry { name: "lattice-2x2", kind: Kind::Lattice, about: "four-element Boolean algebra" },
    Entry { name: "lattice-2x2x2", kind: Kind::Lattice, about: "eight-element Boolean algebra" },
    Entry { name: "lattice-2x2-top", kind: Kind::Lattice, about: "2x2 with a new top; distributive, not Boolean" },
    Entry { name: "lattice-m3", kind: Kind::Lattice, about: "diamond M3; not distributive" },
    Entry { name: "lattice-n5", kind: Kind::Lattice, about: "pentagon N5; not distributive" },
    Entry { name: "finsets-12", kind: Kind::Category, about: "finite sets up to 2, scope {1,2}" },
    Entry { name: "finsets-124", kind: Kind::Category, about: "finite sets up to 4, scope {1,2,4}" },
    Entry { name: "finsets-12-site", kind: Kind::Site, about: "ultrafilter spectrum of {1,2}: pointed sets" },
    Entry { name: "finsets-124-site", kind: Kind::Site, about: "prime spectrum of {1,2,4}" },
    Entry { name: "converse-search", kind: Kind::Site, about: "prime spectrum of the three-element chain" },
    Entry { name: "opens-abc", kind: Kind::Topology, about: "opens of {a,b,c} generated by {a,b} and {b,c}" },
];

pub fn names() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.name).collect()
}

pub fn lattice(name: &str) -> Option<FinLattice> {
    let named = |n: &str, elems: &[&str], leq: &dyn Fn(usize, usize) -> bool| {
        FinLattice::from_order(n, elems.iter().map(|s| s.to_string()).collect(), leq).expect("fixture is a lattice")
    };
    Some(match name {
        "lattice-2chain" => FinLattice::chain(2),
        "lattice-3chain" => FinLattice::chain(3),
        "lattice-2x2" => FinLattice::powerset(2),
        "lattice-2x2x2" => FinLattice::powerset(3),
        "lattice-2x2-top" => named("2x2-top", &["0", "a", "b", "s", "j"], &|x, y| {
            x == y || x == 0 || y == 4 || (y == 3 && x != 4)
        }),
        "lattice-m3" => named("m3", &["0", "a", "b", "c", "1"], &|x, y| x == y || x == 0 || y == 4),
        "lattice-n5" => named("n5", &["0", "a", "b", "c", "1"], &|x, y| {
            x == y || x == 0 || y == 4 || (x == 1 && y == 2)
        }),
        _ => return None,
    })
}

/// The category with its default scope.
pub fn category(name: &str) -> Option<(PresentedCategory, Vec<Obj>)> {
    match name {
        "finsets-12" | "finsets-12-site" => Some((PresentedCategory::finsets(2), vec![1, 2])),
        "finsets-124" | "finsets-124-site" => Some((PresentedCategory::finsets(4), vec![1, 2, 4])),
        "converse-search" => category("lattice-3chain"),
        _ => {
            let c = PresentedCategory::lattice(lattice(name)?);
            let objects = c.objects();
            Some((c, objects))
        }
    }
}

pub fn site(name: &str) -> Result<SpecSite, CorpusError> {
    let variant = match name {
        "finsets-12-site" => Variant::Ultra,
        "finsets-124-site" | "converse-search" => Variant::Prime,
        _ => return Err(CorpusError::Unknown(name.into())),
    };
    let (c, scope) = category(name).expect("site fixtures have categories");
    Ok(SpecSite::build(&c, variant, &scope)?)
}

/// `U = {a, b}` and `V = {b, c}` cover `X`; the empty sieve covers the
/// empty open.
pub fn opens() -> (FiniteCategory, Topology) {
    let sets = [0b000u8, 0b010, 0b011, 0b110, 0b111];
    let names = ["0", "B", "U", "V", "X"].map(String::from).to_vec();
    let cat = FiniteCategory::preorder("opens-abc", names, |a, b| sets[a] & !sets[b] == 0);
    let gens = [
        sieve::generated(&cat, 4, &[cat.hom(2, 4)[0], cat.hom(3, 4)[0]]),
        Sieve { target: 0, members: vec![] },
    ];
    let top = sieve::saturate(&cat, &gens);
    (cat, top)
}

/// Coherent sub-sites: every distributive lattice on its prime spectrum,
/// Boolean ones on their ultrafilter spectrum too, and both FinSets scopes.
pub fn sub_sites() -> Vec<(&'static str, PresentedCategory, Variant, Vec<Obj>)> {
    let mut out = Vec::new();
    for name in ["lattice-2chain", "lattice-3chain", "lattice-2x2", "lattice-2x2x2", "lattice-2x2-top"] {
        let (c, scope) = category(name).expect("fixture");
        let boolean = lattice(name).expect("fixture").is_boolean();
        out.push((name, c.clone(), Variant::Prime, scope.clone()));
        if boolean {
            out.push((name, c, Variant::Ultra, scope));
        }
    }
    for name in ["finsets-12", "finsets-124"] {
        let (c, scope) = category(name).expect("fixture");
        out.push((name, c.clone(), Variant::Ultra, scope.clone()));
        out.push((name, c, Variant::Prime, scope));
    }
    out
}

pub fn dump(name: &str) -> Result<String, CorpusError> {
    let entry = ENTRIES
        .iter()
        .find(|e| e.name == name)
        .ok_or_else(|| CorpusError::Unknown(name.into()))?;
    Ok(match entry.kind {
        Kind::Lattice => lattice(name).expect("listed").to_text(),
        Kind::Category => category(name).expect("listed").0.to_text(),
        Kind::Site => site(name)?.to_text(),
        Kind::Topology => {
            let (cat, top) = opens();
            format!("{}{}", cat.to_text(), top.to_text(&cat, "generated"))
        }
    })
}

pub fn list() -> String {
    ENTRIES.iter().map(|e| format!("{} {}\n", e.name, e.about)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::parse_category;
    use crate::lattice::{parse_lattice, FinLattice};

    #[test]
    fn every_entry_dumps() {
        for name in names() {
            assert!(!dump(name).unwrap().is_empty(), "{name}");
        }
        assert!(matches!(dump("nope"), Err(CorpusError::Unknown(_))));
    }

    #[test]
    fn lattice_dumps_round_trip() {
        for e in ENTRIES.iter().filter(|e| e.kind == Kind::Lattice) {
            let l = lattice(e.name).unwrap();
            let back = FinLattice::new(parse_lattice(&dump(e.name).unwrap()).unwrap()).unwrap();
            assert_eq!(back.fingerprint(), l.fingerprint(), "{}", e.name);
        }
        let c = parse_category(&category("finsets-124").unwrap().0.to_text()).unwrap();
        assert_eq!(c.max_card(), Some(4));
    }

    #[test]
    fn negative_lattices_are_not_distributive() {
        for name in ["lattice-m3", "lattice-n5"] {
            assert!(!lattice(name).unwrap().is_distributive());
        }
        assert!(lattice("lattice-2x2-top").unwrap().is_distributive());
        assert!(!lattice("lattice-2x2-top").unwrap().is_boolean());
    }

    #[test]
    fn pointed_set_site_has_one_object_per_point() {
        let s = site("finsets-12-site").unwrap();
        assert_eq!(s.objects.len(), 3);
        assert!(dump("finsets-124-site").unwrap().contains("germ "));
    }
}
