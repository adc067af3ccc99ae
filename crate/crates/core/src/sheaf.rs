//! Set-valued presheaves on finite sites, the plus construction, and
//! sheafification with an explicit amalgamation certificate.
//!
//! A presheaf on `cat` is a [`SetFunctor`] on `cat.opposite()`: since the
//! opposite keeps morphism ids, `actions[m]` maps `P(cod m)` to `P(dom m)`.

use std::collections::HashMap;

use thiserror::Error;

use crate::finite::{FiniteCategory, MorId, ObjId};
use crate::functor::SetFunctor;
use crate::lattice::FinLattice;
use crate::report::Verdict;
use crate::sieve::{self, Indeterminate, Sieve, Topology};
use crate::text::{self, ParseError};

pub type Presheaf = SetFunctor;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SheafError {
    #[error("topology has {} indeterminate sieves; refusing to sheafify", .0.len())]
    Indeterminate(Vec<Indeterminate>),
    #[error("not a presheaf: {0}")]
    NotPresheaf(String),
    #[error("{0} elements exceed the subsheaf enumeration bound of {1}")]
    Bound(usize, usize),
}

pub fn validate_presheaf(cat: &FiniteCategory, p: &Presheaf) -> Result<(), SheafError> {
    p.validate(&cat.opposite()).map_err(|v| SheafError::NotPresheaf(format!("{v:?}")))
}

/// Representable presheaf `cat(-, c)`; elements are indexed in `hom` order
/// grouped by domain.
pub fn yoneda(cat: &FiniteCategory, c: ObjId) -> Presheaf {
    SetFunctor::representable(&cat.opposite(), c)
}

/// Restriction of `x` along the members of `s`.
pub fn restrict_to(p: &Presheaf, s: &Sieve, x: usize) -> Vec<usize> {
    s.members.iter().map(|&f| p.apply(f, x)).collect()
}

/// All matching families on `s`, aligned with `s.members`.
pub fn matching_families(cat: &FiniteCategory, p: &Presheaf, s: &Sieve) -> Vec<Vec<usize>> {
    let pos: HashMap<MorId, usize> = s.members.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    // constraints[i] = (g, j): x_j = P(g)(x_i), with j = members[i] . g
    let mut constraints: Vec<Vec<(MorId, usize)>> = vec![Vec::new(); s.members.len()];
    for (i, &f) in s.members.iter().enumerate() {
        for g in cat.into_obj(cat.dom(f)) {
            constraints[i].push((g, pos[&cat.compose(f, g)]));
        }
    }
    let mut out = Vec::new();
    let mut assign = vec![usize::MAX; s.members.len()];
    fn consistent(p: &Presheaf, c: &[Vec<(MorId, usize)>], a: &[usize], i: usize) -> bool {
        for (k, cs) in c.iter().enumerate() {
            if a[k] == usize::MAX {
                continue;
            }
            for &(g, j) in cs {
                if (k == i || j == i) && a[j] != usize::MAX && a[j] != p.apply(g, a[k]) {
                    return false;
                }
            }
        }
        true
    }
    fn go(
        cat: &FiniteCategory,
        p: &Presheaf,
        s: &Sieve,
        c: &[Vec<(MorId, usize)>],
        i: usize,
        a: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == a.len() {
            out.push(a.clone());
            return;
        }
        for v in 0..p.values[cat.dom(s.members[i])] {
            a[i] = v;
            if consistent(p, c, a, i) {
                go(cat, p, s, c, i + 1, a, out);
            }
        }
        a[i] = usize::MAX;
    }
    go(cat, p, s, &constraints, 0, &mut assign, &mut out);
    out
}

/// One covering sieve with its matching families and their amalgamation
/// counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SieveCertificate {
    pub sieve: Sieve,
    pub families: usize,
    /// Families with no amalgamation.
    pub missing: usize,
    /// Families with more than one amalgamation.
    pub duplicated: usize,
}

impl SieveCertificate {
    pub fn is_bijective(&self) -> bool {
        self.missing == 0 && self.duplicated == 0
    }
}

/// Matching-family/amalgamation counts for every covering sieve.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SheafCertificate {
    pub entries: Vec<SieveCertificate>,
}

impl SheafCertificate {
    pub fn is_sheaf(&self) -> bool {
        self.entries.iter().all(SieveCertificate::is_bijective)
    }

    pub fn is_separated(&self) -> bool {
        self.entries.iter().all(|e| e.duplicated == 0)
    }

    pub fn first_failure(&self) -> Option<&SieveCertificate> {
        self.entries.iter().find(|e| !e.is_bijective())
    }

    pub fn to_text(&self, cat: &FiniteCategory) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!(
                "sieve {} {} families={} missing={} duplicated={}\n",
                cat.object_name(e.sieve.target),
                e.sieve.render(cat),
                e.families,
                e.missing,
                e.duplicated
            ));
        }
        out
    }
}

pub fn certify(cat: &FiniteCategory, top: &Topology, p: &Presheaf) -> SheafCertificate {
    let mut entries = Vec::new();
    for c in cat.objects() {
        for s in &top.covers[c] {
            let mut amalgams: HashMap<Vec<usize>, usize> = HashMap::new();
            for x in 0..p.values[c] {
                *amalgams.entry(restrict_to(p, s, x)).or_default() += 1;
            }
            let fams = matching_families(cat, p, s);
            let missing = fams.iter().filter(|f| !amalgams.contains_key(*f)).count();
            let duplicated = amalgams.values().filter(|&&n| n > 1).count();
            entries.push(SieveCertificate {
                sieve: s.clone(),
                families: fams.len(),
                missing,
                duplicated,
            });
        }
    }
    SheafCertificate { entries }
}

pub fn is_sheaf(cat: &FiniteCategory, top: &Topology, p: &Presheaf) -> Verdict {
    match certify(cat, top, p).first_failure() {
        None => Verdict::yes(),
        Some(e) => Verdict::no(format!(
            "{} {} missing={} duplicated={}",
            cat.object_name(e.sieve.target),
            e.sieve.render(cat),
            e.missing,
            e.duplicated
        )),
    }
}

pub(crate) struct UnionFind(Vec<usize>);

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    pub(crate) fn find(&mut self, a: usize) -> usize {
        let mut r = a;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut a = a;
        while self.0[a] != r {
            let next = self.0[a];
            self.0[a] = r;
            a = next;
        }
        r
    }

    /// Keeps the smaller root as representative.
    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.0[hi] = lo;
        }
    }
}

/// The plus construction together with its unit `P -> P+`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plus {
    pub presheaf: Presheaf,
    /// `unit[c][x]` is the class of `x` in `P+(c)`.
    pub unit: Vec<Vec<usize>>,
    /// Least representative `(sieve, family)` of each class.
    pub representatives: Vec<Vec<(Sieve, Vec<usize>)>>,
}

fn refuse_indeterminate(top: &Topology) -> Result<(), SheafError> {
    if top.is_determinate() {
        Ok(())
    } else {
        Err(SheafError::Indeterminate(top.indeterminate.clone()))
    }
}

/// `P+(c)` is the set of matching families over covering sieves of `c`,
/// two being identified when they agree on a covering sieve.
pub fn plus(cat: &FiniteCategory, top: &Topology, p: &Presheaf) -> Result<Plus, SheafError> {
    refuse_indeterminate(top)?;
    let mut values = Vec::new();
    let mut representatives = Vec::new();
    let mut lookup: Vec<HashMap<(Sieve, Vec<usize>), usize>> = Vec::new();
    for c in cat.objects() {
        let mut entries: Vec<(Sieve, Vec<usize>)> = Vec::new();
        for s in &top.covers[c] {
            for fam in matching_families(cat, p, s) {
                entries.push((s.clone(), fam));
            }
        }
        let mut uf = UnionFind::new(entries.len());
        for a in 0..entries.len() {
            for b in a + 1..entries.len() {
                if agree_on_cover(top, &entries[a], &entries[b]) {
                    uf.union(a, b);
                }
            }
        }
        let mut class_of_root = HashMap::new();
        let mut reps = Vec::new();
        let mut map = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            let r = uf.find(i);
            let k = *class_of_root.entry(r).or_insert_with(|| {
                reps.push(entries[r].clone());
                reps.len() - 1
            });
            map.insert(e.clone(), k);
        }
        values.push(reps.len());
        representatives.push(reps);
        lookup.push(map);
    }
    let mut actions = Vec::new();
    for h in cat.morphisms() {
        let (d, c) = (cat.dom(h), cat.cod(h));
        let table = representatives[c]
            .iter()
            .map(|(s, fam)| {
                let pulled = sieve::pull_back(cat, s, h);
                let restricted = pulled
                    .members
                    .iter()
                    .map(|&g| fam[s.members.binary_search(&cat.compose(h, g)).expect("sieve member")])
                    .collect();
                lookup[d][&(pulled, restricted)]
            })
            .collect();
        actions.push(table);
    }
    let unit = cat
        .objects()
        .map(|c| {
            let max = sieve::maximal(cat, c);
            (0..p.values[c]).map(|x| lookup[c][&(max.clone(), restrict_to(p, &max, x))]).collect()
        })
        .collect();
    Ok(Plus {
        presheaf: SetFunctor { values, actions },
        unit,
        representatives,
    })
}

fn agree_on_cover(top: &Topology, a: &(Sieve, Vec<usize>), b: &(Sieve, Vec<usize>)) -> bool {
    let members = a
        .0
        .members
        .iter()
        .enumerate()
        .filter_map(|(i, m)| {
            let j = b.0.members.binary_search(m).ok()?;
            (a.1[i] == b.1[j]).then_some(*m)
        })
        .collect();
    top.covers(&Sieve {
        target: a.0.target,
        members,
    })
}

/// A sheaf with its certificate and the unit from the original presheaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sheaf {
    pub presheaf: Presheaf,
    pub certificate: SheafCertificate,
    pub unit: Vec<Vec<usize>>,
}

/// Two plus steps; the certificate is checked exhaustively.
pub fn sheafify(cat: &FiniteCategory, top: &Topology, p: &Presheaf) -> Result<Sheaf, SheafError> {
    let once = plus(cat, top, p)?;
    let twice = plus(cat, top, &once.presheaf)?;
    let unit = cat
        .objects()
        .map(|c| once.unit[c].iter().map(|&x| twice.unit[c][x]).collect())
        .collect();
    let certificate = certify(cat, top, &twice.presheaf);
    debug_assert!(certificate.is_sheaf());
    Ok(Sheaf {
        presheaf: twice.presheaf,
        certificate,
        unit,
    })
}

/// Whether a pointwise isomorphism exists that commutes with restrictions,
/// checked through the given components.
pub fn is_iso_via(cat: &FiniteCategory, from: &Presheaf, to: &Presheaf, components: &[Vec<usize>]) -> bool {
    let op = cat.opposite();
    let t = crate::functor::NatTrans {
        components: components.to_vec(),
    };
    t.is_natural(&op, from, to) && t.is_iso(to)
}

/// Whether `alpha : p -> q` is locally surjective: every element of `q` is
/// in the image after restriction to some covering sieve.
pub fn is_locally_surjective(
    cat: &FiniteCategory,
    top: &Topology,
    q: &Presheaf,
    alpha: &[Vec<usize>],
) -> Verdict {
    for c in cat.objects() {
        for y in 0..q.values[c] {
            let members = cat
                .into_obj(c)
                .into_iter()
                .filter(|&g| alpha[cat.dom(g)].contains(&q.apply(g, y)))
                .collect();
            let s = Sieve { target: c, members };
            if !top.covers(&s) {
                return Verdict::no(format!("{} element {y}", cat.object_name(c)));
            }
        }
    }
    Verdict::yes()
}

/// A pointwise subset given as membership flags per object.
pub type Part = Vec<Vec<bool>>;

fn is_subpresheaf(cat: &FiniteCategory, p: &Presheaf, part: &Part) -> bool {
    cat.morphisms().all(|m| {
        (0..p.values[cat.cod(m)]).all(|y| !part[cat.cod(m)][y] || part[cat.dom(m)][p.apply(m, y)])
    })
}

/// A subpresheaf of a sheaf is a subsheaf when amalgamations of its matching
/// families stay inside it.
pub fn is_subsheaf(cat: &FiniteCategory, top: &Topology, p: &Presheaf, part: &Part) -> bool {
    is_subpresheaf(cat, p, part) && closure(cat, top, p, part) == *part
}

/// The least subsheaf containing `part`.
pub fn closure(cat: &FiniteCategory, top: &Topology, p: &Presheaf, part: &Part) -> Part {
    let mut out = part.clone();
    loop {
        let mut changed = false;
        for m in cat.morphisms() {
            let (d, c) = (cat.dom(m), cat.cod(m));
            for y in 0..p.values[c] {
                if out[c][y] && !out[d][p.apply(m, y)] {
                    out[d][p.apply(m, y)] = true;
                    changed = true;
                }
            }
        }
        for c in cat.objects() {
            for x in 0..p.values[c] {
                if out[c][x] {
                    continue;
                }
                let inside = top.covers[c]
                    .iter()
                    .any(|s| s.members.iter().all(|&f| out[cat.dom(f)][p.apply(f, x)]));
                if inside {
                    out[c][x] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            return out;
        }
    }
}

pub const SUBSHEAF_BOUND: usize = 4096;

/// All subsheaves, least first, found by closing up one element at a time.
pub fn subsheaves(cat: &FiniteCategory, top: &Topology, p: &Presheaf) -> Result<Vec<Part>, SheafError> {
    let empty: Part = p.values.iter().map(|&n| vec![false; n]).collect();
    let bottom = closure(cat, top, p, &empty);
    let mut seen = std::collections::BTreeSet::from([bottom.clone()]);
    let mut queue = std::collections::VecDeque::from([bottom]);
    let mut out = Vec::new();
    while let Some(a) = queue.pop_front() {
        for c in cat.objects() {
            for x in 0..p.values[c] {
                if a[c][x] {
                    continue;
                }
                let mut grown = a.clone();
                grown[c][x] = true;
                let grown = closure(cat, top, p, &grown);
                if seen.insert(grown.clone()) {
                    if seen.len() > SUBSHEAF_BOUND {
                        return Err(SheafError::Bound(seen.len(), SUBSHEAF_BOUND));
                    }
                    queue.push_back(grown);
                }
            }
        }
        out.push(a);
    }
    out.sort_by_key(|a| a.iter().flatten().filter(|&&b| b).count());
    Ok(out)
}

/// The lattice of subsheaves, ordered by inclusion.
pub fn subsheaf_lattice(cat: &FiniteCategory, top: &Topology, p: &Presheaf) -> Result<FinLattice, SheafError> {
    let subs = subsheaves(cat, top, p)?;
    let names = subs.iter().map(|a| render_part(cat, a)).collect();
    let within = |a: &Part, b: &Part| a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| !x || *y);
    FinLattice::from_order("subsheaves", names, |i, j| within(&subs[i], &subs[j]))
        .map_err(|e| SheafError::NotPresheaf(e.to_string()))
}

/// A decomposition into two complementary subsheaves, neither of them
/// the least one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub left: Part,
    pub right: Part,
}

/// Searches for a nontrivial complemented subsheaf: `A` and `B` meet in the
/// least subsheaf and the closure of their union is everything.
pub fn find_decomposition(
    cat: &FiniteCategory,
    top: &Topology,
    p: &Presheaf,
) -> Result<Option<Decomposition>, SheafError> {
    let subs = subsheaves(cat, top, p)?;
    let (bottom, whole) = (&subs[0], &subs[subs.len() - 1]);
    for (i, a) in subs.iter().enumerate().skip(1) {
        for b in subs.iter().skip(i + 1) {
            if b == whole || a == whole {
                continue;
            }
            let meet: Part = a
                .iter()
                .zip(b)
                .map(|(x, y)| x.iter().zip(y).map(|(u, v)| *u && *v).collect())
                .collect();
            if meet != *bottom {
                continue;
            }
            let union: Part = a
                .iter()
                .zip(b)
                .map(|(x, y)| x.iter().zip(y).map(|(u, v)| *u || *v).collect())
                .collect();
            if closure(cat, top, p, &union) == *whole {
                return Ok(Some(Decomposition {
                    left: a.clone(),
                    right: b.clone(),
                }));
            }
        }
    }
    Ok(None)
}

/// Connected: not the least subsheaf of itself, and no nontrivial
/// decomposition.
pub fn is_connected(cat: &FiniteCategory, top: &Topology, p: &Presheaf) -> Result<Verdict, SheafError> {
    let subs = subsheaves(cat, top, p)?;
    if subs.len() == 1 {
        return Ok(Verdict::no("initial"));
    }
    Ok(match find_decomposition(cat, top, p)? {
        None => Verdict::yes(),
        Some(d) => Verdict::no(format!("split {} {}", render_part(cat, &d.left), render_part(cat, &d.right))),
    })
}

pub fn render_part(cat: &FiniteCategory, part: &Part) -> String {
    let items: Vec<String> = cat
        .objects()
        .flat_map(|c| {
            part[c]
                .iter()
                .enumerate()
                .filter(|(_, &b)| b)
                .map(move |(x, _)| format!("{}:{x}", cat.object_name(c)))
        })
        .collect();
    format!("{{{}}}", items.join(","))
}

/// Line format: `presheaf <name>`, `value <object> <n>`,
/// `restrict <morphism> <table>`.
pub fn presheaf_to_text(cat: &FiniteCategory, name: &str, p: &Presheaf) -> String {
    let mut out = format!("presheaf {name} site={}\n", cat.name());
    for c in cat.objects() {
        out.push_str(&format!("value {} {}\n", cat.object_name(c), p.values[c]));
    }
    for m in cat.morphisms() {
        if !cat.is_identity(m) {
            out.push_str(&format!("restrict {} {}\n", cat.morphism_name(m), text::format_list(&p.actions[m])));
        }
    }
    out
}

pub fn parse_presheaf(cat: &FiniteCategory, input: &str) -> Result<Presheaf, ParseError> {
    let mut values = vec![usize::MAX; cat.num_objects()];
    let mut actions: Vec<Option<Vec<usize>>> = vec![None; cat.num_morphisms()];
    for line in text::lines(input) {
        match line.word(0).unwrap_or_default() {
            "presheaf" => {}
            "value" => {
                let c = cat
                    .object_id(line.expect(1, "name")?)
                    .map_err(|e| ParseError::at(&line, 1, e.to_string()))?;
                values[c] = text::parse_usize(&line, 2, line.expect(2, "value")?)?;
            }
            "restrict" => {
                let m = cat
                    .morphism_id(line.expect(1, "name")?)
                    .map_err(|e| ParseError::at(&line, 1, e.to_string()))?;
                actions[m] = Some(text::parse_usize_list(&line, 2, line.expect(2, "value")?)?);
            }
            other => return Err(ParseError::at(&line, 0, format!("unknown directive {other}"))),
        }
    }
    if let Some(c) = values.iter().position(|&v| v == usize::MAX) {
        return Err(ParseError::new(0, 0, format!("missing value for {}", cat.object_name(c))));
    }
    let actions = cat
        .morphisms()
        .map(|m| match &actions[m] {
            Some(t) => Ok(t.clone()),
            None if cat.is_identity(m) => Ok((0..values[cat.cod(m)]).collect()),
            None => Err(ParseError::new(0, 0, format!("missing restriction for {}", cat.morphism_name(m)))),
        })
        .collect::<Result<_, _>>()?;
    let p = SetFunctor { values, actions };
    validate_presheaf(cat, &p).map_err(|e| ParseError::new(0, 0, e.to_string()))?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Opens of `{a, b, c}` generated by `U = {a, b}` and `V = {b, c}`;
    /// `U` and `V` cover `X`.
    fn opens() -> (FiniteCategory, Topology) {
        let sets = [0b000u8, 0b010, 0b011, 0b110, 0b111];
        let names = ["0", "B", "U", "V", "X"].map(String::from).to_vec();
        let cat = FiniteCategory::preorder("opens", names, |a, b| sets[a] & !sets[b] == 0);
        let gens = [
            sieve::generated(&cat, 4, &[cat.hom(2, 4)[0], cat.hom(3, 4)[0]]),
            Sieve { target: 0, members: vec![] },
        ];
        let top = sieve::saturate(&cat, &gens);
        (cat, top)
    }

    fn presheaf(cat: &FiniteCategory, values: Vec<usize>, act: impl Fn(MorId, usize) -> usize) -> Presheaf {
        let actions = cat
            .morphisms()
            .map(|m| (0..values[cat.cod(m)]).map(|y| act(m, y)).collect())
            .collect();
        let p = SetFunctor { values, actions };
        validate_presheaf(cat, &p).unwrap();
        p
    }

    /// Two local sections over `U` and `V`, one global section.
    fn separated_not_sheaf(cat: &FiniteCategory) -> Presheaf {
        presheaf(cat, vec![1, 1, 2, 2, 1], |m, y| if cat.is_identity(m) { y } else { 0 })
    }

    fn least_cover(top: &Topology, c: ObjId) -> &Sieve {
        top.covers[c].iter().min_by_key(|s| s.members.len()).unwrap()
    }

    #[test]
    fn opens_topology_is_a_topology() {
        let (cat, top) = opens();
        assert!(sieve::is_topology(&cat, &top).holds);
        assert_eq!(top.covers[0].len(), 2);
        assert_eq!(top.covers[4].len(), 2);
    }

    #[test]
    fn plus_adds_the_missing_amalgamations() {
        let (cat, top) = opens();
        let p = separated_not_sheaf(&cat);
        let cert = certify(&cat, &top, &p);
        assert!(cert.is_separated() && !cert.is_sheaf());
        let once = plus(&cat, &top, &p).unwrap();
        assert_eq!(once.presheaf.values, vec![1, 1, 2, 2, 4]);
        for c in cat.objects() {
            let oracle = matching_families(&cat, &p, least_cover(&top, c)).len();
            assert_eq!(once.presheaf.values[c], oracle);
        }
        assert!(is_sheaf(&cat, &top, &once.presheaf).holds);
        let sheaf = sheafify(&cat, &top, &p).unwrap();
        assert!(sheaf.certificate.is_sheaf());
        let again = sheafify(&cat, &top, &sheaf.presheaf).unwrap();
        assert!(is_iso_via(&cat, &sheaf.presheaf, &again.presheaf, &again.unit));
    }

    #[test]
    fn plus_is_identity_for_the_trivial_topology() {
        let (cat, _) = opens();
        let top = Topology::trivial(&cat);
        let p = separated_not_sheaf(&cat);
        let once = plus(&cat, &top, &p).unwrap();
        assert!(is_iso_via(&cat, &p, &once.presheaf, &once.unit));
    }

    #[test]
    fn indeterminate_topologies_are_refused() {
        let (cat, mut top) = opens();
        top.indeterminate.push(Indeterminate {
            sieve: sieve::maximal(&cat, 4),
            reason: "test".into(),
        });
        let p = separated_not_sheaf(&cat);
        assert!(matches!(sheafify(&cat, &top, &p), Err(SheafError::Indeterminate(v)) if v.len() == 1));
    }

    #[test]
    fn subsheaves_of_the_terminal_sheaf_are_the_opens() {
        let (cat, top) = opens();
        let one = SetFunctor::constant(&cat.opposite(), 1);
        assert!(is_sheaf(&cat, &top, &one).holds);
        let l = subsheaf_lattice(&cat, &top, &one).unwrap();
        assert_eq!(l.len(), 5);
        assert!(!l.is_boolean());
        assert!(is_connected(&cat, &top, &one).unwrap().holds);
    }

    #[test]
    fn coproducts_are_not_connected() {
        let (cat, top) = opens();
        let two = SetFunctor::constant(&cat.opposite(), 2);
        let sheaf = sheafify(&cat, &top, &two).unwrap();
        let v = is_connected(&cat, &top, &sheaf.presheaf).unwrap();
        assert!(!v.holds);
        assert!(v.witness.unwrap().starts_with("split"));
    }

    #[test]
    fn sheafified_representables_are_connected() {
        let (cat, top) = opens();
        let empty = sheafify(&cat, &top, &yoneda(&cat, 0)).unwrap();
        assert_eq!(is_connected(&cat, &top, &empty.presheaf).unwrap().witness.as_deref(), Some("initial"));
        for c in 1..cat.num_objects() {
            let y = sheafify(&cat, &top, &yoneda(&cat, c)).unwrap();
            assert!(y.presheaf.total_size() > 0);
            assert!(is_connected(&cat, &top, &y.presheaf).unwrap().holds);
        }
    }

    #[test]
    fn presheaf_text_round_trips() {
        let (cat, _) = opens();
        let p = separated_not_sheaf(&cat);
        let text = presheaf_to_text(&cat, "fixture", &p);
        assert_eq!(parse_presheaf(&cat, &text).unwrap(), p);
        let bad = text.replace("value X 1", "value X 3");
        assert_ne!(bad, text);
        assert!(parse_presheaf(&cat, &bad).is_err());
    }
}
