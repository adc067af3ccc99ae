//! Sieves and Grothendieck topologies on finite categories.
//!
//! A topology is stored extensionally: for every object, the sorted list of
//! its covering sieves. Saturation runs a fixpoint over the finite set of
//! all sieves, so the result is the least topology containing the
//! generators.

use std::collections::{BTreeSet, HashMap};

use crate::finite::{FiniteCategory, MorId, ObjId};
use crate::report::Verdict;
use crate::text::{self, ParseError};

/// A set of morphisms into `target`, closed under precomposition.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sieve {
    pub target: ObjId,
    pub members: Vec<MorId>,
}

impl Sieve {
    pub fn contains(&self, m: MorId) -> bool {
        self.members.binary_search(&m).is_ok()
    }

    pub fn is_subset_of(&self, other: &Sieve) -> bool {
        self.members.iter().all(|&m| other.contains(m))
    }

    pub fn render(&self, cat: &FiniteCategory) -> String {
        let names: Vec<&str> = self.members.iter().map(|&m| cat.morphism_name(m)).collect();
        format!("[{}]", names.join(","))
    }
}

/// The sieve generated by `gens`, all of which must end at `target`.
pub fn generated(cat: &FiniteCategory, target: ObjId, gens: &[MorId]) -> Sieve {
    let mut members = BTreeSet::new();
    for &f in gens {
        debug_assert_eq!(cat.cod(f), target);
        for h in cat.into_obj(cat.dom(f)) {
            members.insert(cat.compose(f, h));
        }
    }
    Sieve {
        target,
        members: members.into_iter().collect(),
    }
}

pub fn maximal(cat: &FiniteCategory, c: ObjId) -> Sieve {
    generated(cat, c, &[cat.id(c)])
}

/// `h^* S = { k : h . k in S }` for `h : d -> target(S)`.
pub fn pull_back(cat: &FiniteCategory, s: &Sieve, h: MorId) -> Sieve {
    debug_assert_eq!(cat.cod(h), s.target);
    let d = cat.dom(h);
    Sieve {
        target: d,
        members: cat.into_obj(d).into_iter().filter(|&k| s.contains(cat.compose(h, k))).collect(),
    }
}

pub fn is_sieve(cat: &FiniteCategory, s: &Sieve) -> bool {
    s.members.iter().all(|&f| cat.cod(f) == s.target)
        && s.members
            .iter()
            .all(|&f| cat.into_obj(cat.dom(f)).into_iter().all(|h| s.contains(cat.compose(f, h))))
}

/// Every sieve on `c`, smallest first.
pub fn all_sieves(cat: &FiniteCategory, c: ObjId) -> Vec<Sieve> {
    let into = cat.into_obj(c);
    let mut seen: BTreeSet<Sieve> = BTreeSet::new();
    let mut queue = vec![Sieve {
        target: c,
        members: vec![],
    }];
    seen.insert(queue[0].clone());
    while let Some(s) = queue.pop() {
        for &f in &into {
            if s.contains(f) {
                continue;
            }
            let g = generated(cat, c, &[f]);
            let mut union: BTreeSet<MorId> = s.members.iter().copied().collect();
            union.extend(g.members);
            let next = Sieve {
                target: c,
                members: union.into_iter().collect(),
            };
            if seen.insert(next.clone()) {
                queue.push(next);
            }
        }
    }
    let mut out: Vec<Sieve> = seen.into_iter().collect();
    out.sort_by(|a, b| a.members.len().cmp(&b.members.len()).then_with(|| a.members.cmp(&b.members)));
    out
}

/// A sieve flagged as undecidable on the sub-site, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Indeterminate {
    pub sieve: Sieve,
    pub reason: String,
}

/// Covering sieves per object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    pub covers: Vec<Vec<Sieve>>,
    pub indeterminate: Vec<Indeterminate>,
}

impl Topology {
    /// Only the maximal sieves cover.
    pub fn trivial(cat: &FiniteCategory) -> Self {
        Topology {
            covers: cat.objects().map(|c| vec![maximal(cat, c)]).collect(),
            indeterminate: Vec::new(),
        }
    }

    pub fn covers(&self, s: &Sieve) -> bool {
        self.covers[s.target].binary_search_by(|t| cmp_sieves(t, s)).is_ok()
    }

    pub fn is_determinate(&self) -> bool {
        self.indeterminate.is_empty()
    }

    pub fn count(&self) -> usize {
        self.covers.iter().map(Vec::len).sum()
    }

    /// Covering sieves of `self` missing from `other`.
    pub fn not_in(&self, other: &Topology) -> Vec<Sieve> {
        self.covers.iter().flatten().filter(|s| !other.covers(s)).cloned().collect()
    }

    pub fn to_text(&self, cat: &FiniteCategory, kind: &str) -> String {
        let mut out = format!("topology {} kind={kind}\n", cat.name());
        for c in cat.objects() {
            for s in &self.covers[c] {
                out.push_str(&format!("cover {} {}\n", cat.object_name(c), s.render(cat)));
            }
        }
        for i in &self.indeterminate {
            out.push_str(&format!(
                "indeterminate {} {} {}\n",
                cat.object_name(i.sieve.target),
                i.sieve.render(cat),
                i.reason
            ));
        }
        out
    }
}

fn cmp_sieves(a: &Sieve, b: &Sieve) -> std::cmp::Ordering {
    a.members.len().cmp(&b.members.len()).then_with(|| a.members.cmp(&b.members))
}

/// The least topology whose covers include `generators`.
pub fn saturate(cat: &FiniteCategory, generators: &[Sieve]) -> Topology {
    let sieves: Vec<Vec<Sieve>> = cat.objects().map(|c| all_sieves(cat, c)).collect();
    let index: Vec<HashMap<Sieve, usize>> = sieves
        .iter()
        .map(|list| list.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect())
        .collect();
    let mut covering: Vec<Vec<bool>> = sieves.iter().map(|l| vec![false; l.len()]).collect();
    for c in cat.objects() {
        covering[c][index[c][&maximal(cat, c)]] = true;
    }
    for g in generators {
        covering[g.target][index[g.target][g]] = true;
    }
    loop {
        let mut changed = false;
        for c in cat.objects() {
            for (i, s) in sieves[c].iter().enumerate() {
                if !covering[c][i] {
                    continue;
                }
                for h in cat.into_obj(c) {
                    let d = cat.dom(h);
                    let j = index[d][&pull_back(cat, s, h)];
                    if !covering[d][j] {
                        covering[d][j] = true;
                        changed = true;
                    }
                }
            }
        }
        for c in cat.objects() {
            for (r, cand) in sieves[c].iter().enumerate() {
                if covering[c][r] {
                    continue;
                }
                let local = sieves[c].iter().enumerate().any(|(i, s)| {
                    covering[c][i]
                        && s.members.iter().all(|&f| {
                            let d = cat.dom(f);
                            covering[d][index[d][&pull_back(cat, cand, f)]]
                        })
                });
                if local {
                    covering[c][r] = true;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let covers = cat
        .objects()
        .map(|c| {
            let mut v: Vec<Sieve> = sieves[c]
                .iter()
                .zip(&covering[c])
                .filter(|(_, &b)| b)
                .map(|(s, _)| s.clone())
                .collect();
            v.sort_by(cmp_sieves);
            v
        })
        .collect();
    Topology {
        covers,
        indeterminate: Vec::new(),
    }
}

/// Checks the three topology axioms directly.
pub fn is_topology(cat: &FiniteCategory, t: &Topology) -> Verdict {
    for c in cat.objects() {
        if !t.covers(&maximal(cat, c)) {
            return Verdict::no(format!("maximal sieve on {} does not cover", cat.object_name(c)));
        }
        for s in &t.covers[c] {
            for h in cat.into_obj(c) {
                if !t.covers(&pull_back(cat, s, h)) {
                    return Verdict::no(format!(
                        "pullback of {} along {} does not cover",
                        s.render(cat),
                        cat.morphism_name(h)
                    ));
                }
            }
        }
        for r in all_sieves(cat, c) {
            if t.covers(&r) {
                continue;
            }
            let local = t.covers[c]
                .iter()
                .any(|s| s.members.iter().all(|&f| t.covers(&pull_back(cat, &r, f))));
            if local {
                return Verdict::no(format!("{} is locally covering but not covering", r.render(cat)));
            }
        }
    }
    Verdict::yes()
}

/// Reads a topology file written by [`Topology::to_text`].
pub fn parse_topology(cat: &FiniteCategory, input: &str) -> Result<Topology, ParseError> {
    let lines = text::lines(input);
    let mut covers: Vec<BTreeSet<Sieve>> = vec![BTreeSet::new(); cat.num_objects()];
    let mut indeterminate = Vec::new();
    for line in &lines {
        let kind = line.word(0);
        if kind == Some("topology") {
            continue;
        }
        if kind != Some("cover") && kind != Some("indeterminate") {
            return Err(ParseError::at(line, 0, "expected `cover` or `indeterminate`"));
        }
        let c = cat
            .object_id(line.expect(1, "object")?)
            .map_err(|e| ParseError::at(line, 1, e.to_string()))?;
        let raw = line.expect(2, "sieve")?;
        let inner = raw.trim_start_matches('[').trim_end_matches(']');
        let mut members = Vec::new();
        for name in inner.split(',').filter(|s| !s.is_empty()) {
            let m = cat.morphism_id(name).map_err(|e| ParseError::at(line, 2, e.to_string()))?;
            members.push(m);
        }
        members.sort_unstable();
        let sieve = Sieve { target: c, members };
        if !is_sieve(cat, &sieve) {
            return Err(ParseError::at(line, 2, "not a sieve on this object"));
        }
        if kind == Some("cover") {
            covers[c].insert(sieve);
        } else {
            let reason = line.tokens[3..].iter().map(|t| t.text).collect::<Vec<_>>().join(" ");
            indeterminate.push(Indeterminate { sieve, reason });
        }
    }
    let covers = covers
        .into_iter()
        .map(|s| {
            let mut v: Vec<Sieve> = s.into_iter().collect();
            v.sort_by(cmp_sieves);
            v
        })
        .collect();
    Ok(Topology { covers, indeterminate })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Opens of the two-point discrete space: 0 = {}, 1 = {u}, 2 = {v}, 3 = X.
    fn opens() -> FiniteCategory {
        FiniteCategory::preorder("opens", vec!["0".into(), "U".into(), "V".into(), "X".into()], |a, b| a & !b == 0)
    }

    #[test]
    fn sieves_on_a_point() {
        let cat = opens();
        assert_eq!(all_sieves(&cat, 0).len(), 2);
        // Sieves on X are down-closed sets of opens.
        assert_eq!(all_sieves(&cat, 3).len(), 6);
    }

    #[test]
    fn saturation_of_open_covers() {
        let cat = opens();
        let u = cat.hom(1, 3)[0];
        let v = cat.hom(2, 3)[0];
        let cover_x = generated(&cat, 3, &[u, v]);
        let empty_on_zero = Sieve {
            target: 0,
            members: vec![],
        };
        let t = saturate(&cat, &[cover_x.clone(), empty_on_zero.clone()]);
        assert!(t.covers(&cover_x));
        assert!(t.covers(&empty_on_zero));
        assert!(!t.covers(&generated(&cat, 3, &[u])));
        assert!(is_topology(&cat, &t).holds);
        let again = saturate(&cat, &t.covers.concat());
        assert_eq!(again, t);
        let trivial = saturate(&cat, &[]);
        assert_eq!(trivial, Topology::trivial(&cat));
    }

    #[test]
    fn topology_text_round_trip() {
        let cat = opens();
        let u = cat.hom(1, 3)[0];
        let v = cat.hom(2, 3)[0];
        let t = saturate(&cat, &[generated(&cat, 3, &[u, v])]);
        let parsed = parse_topology(&cat, &t.to_text(&cat, "test")).unwrap();
        assert_eq!(parsed, t);
    }
}
