//! Finite-set-valued functors on finite categories.
//!
//! A functor stores one cardinality per object (its value is `0..n`) and one
//! function table per morphism. Presheaves are functors on the opposite
//! category, which keeps morphism ids, so a restriction along `f` is simply
//! `actions[f]`.

use std::collections::BTreeMap;
use std::fmt;

use crate::finite::{CategoryBuilder, FiniteCategory, MorId, ObjId};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetFunctor {
    pub values: Vec<usize>,
    pub actions: Vec<Vec<usize>>,
}

/// Why a table family fails to be a functor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FunctorViolation {
    Shape(String),
    Identity(MorId),
    Composition { g: MorId, f: MorId },
}

impl fmt::Display for FunctorViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctorViolation::Shape(s) => write!(f, "shape: {s}"),
            FunctorViolation::Identity(m) => write!(f, "identity {m} not sent to an identity"),
            FunctorViolation::Composition { g, f: ff } => write!(f, "composite {g} . {ff} not preserved"),
        }
    }
}

impl SetFunctor {
    /// The functor with every value of size `n` and identity actions.
    pub fn constant(cat: &FiniteCategory, n: usize) -> Self {
        SetFunctor {
            values: vec![n; cat.num_objects()],
            actions: vec![(0..n).collect(); cat.num_morphisms()],
        }
    }

    /// `hom(x, -)`, elements of `F(y)` indexed by position in `cat.hom(x, y)`.
    pub fn representable(cat: &FiniteCategory, x: ObjId) -> Self {
        let values = cat.objects().map(|y| cat.hom(x, y).len()).collect();
        let actions = cat
            .morphisms()
            .map(|m| {
                let (a, b) = (cat.dom(m), cat.cod(m));
                cat.hom(x, a)
                    .iter()
                    .map(|&h| {
                        let mh = cat.compose(m, h);
                        cat.hom(x, b).iter().position(|&k| k == mh).expect("hom is complete")
                    })
                    .collect()
            })
            .collect();
        SetFunctor { values, actions }
    }

    pub fn apply(&self, m: MorId, e: usize) -> usize {
        self.actions[m][e]
    }

    pub fn total_size(&self) -> usize {
        self.values.iter().sum()
    }

    pub fn validate(&self, cat: &FiniteCategory) -> Result<(), FunctorViolation> {
        if self.values.len() != cat.num_objects() || self.actions.len() != cat.num_morphisms() {
            return Err(FunctorViolation::Shape("table counts".into()));
        }
        for m in cat.morphisms() {
            let t = &self.actions[m];
            if t.len() != self.values[cat.dom(m)] || t.iter().any(|&v| v >= self.values[cat.cod(m)]) {
                return Err(FunctorViolation::Shape(format!("table of {}", cat.morphism_name(m))));
            }
        }
        for x in cat.objects() {
            let i = cat.id(x);
            if self.actions[i].iter().enumerate().any(|(e, &v)| e != v) {
                return Err(FunctorViolation::Identity(i));
            }
        }
        for f in cat.morphisms() {
            for g in cat.morphisms() {
                let Some(h) = cat.try_compose(g, f) else { continue };
                if (0..self.values[cat.dom(f)]).any(|e| self.actions[h][e] != self.actions[g][self.actions[f][e]]) {
                    return Err(FunctorViolation::Composition { g, f });
                }
            }
        }
        Ok(())
    }

    /// The category of elements: objects `(x, e)` with `e` in `F(x)`,
    /// morphisms `f : (x, e) -> (y, F(f)(e))`.
    pub fn elements(&self, cat: &FiniteCategory) -> (FiniteCategory, Vec<(ObjId, usize)>) {
        let mut b = CategoryBuilder::new(format!("elements({})", cat.name()));
        let mut objs = Vec::new();
        let mut index = BTreeMap::new();
        for x in cat.objects() {
            for e in 0..self.values[x] {
                index.insert((x, e), b.object(format!("{}:{e}", cat.object_name(x))).expect("fresh"));
                objs.push((x, e));
            }
        }
        let mut mors = BTreeMap::new();
        for m in cat.morphisms() {
            for e in 0..self.values[cat.dom(m)] {
                let src = index[&(cat.dom(m), e)];
                if cat.is_identity(m) {
                    mors.insert((m, e), b.morphism_id(&format!("id_{}:{e}", cat.object_name(cat.dom(m)))).unwrap());
                    continue;
                }
                let tgt = index[&(cat.cod(m), self.actions[m][e])];
                let id = b
                    .morphism(format!("{}@{e}", cat.morphism_name(m)), src, tgt)
                    .expect("fresh");
                mors.insert((m, e), id);
            }
        }
        for f in cat.morphisms() {
            for g in cat.morphisms() {
                let Some(h) = cat.try_compose(g, f) else { continue };
                for e in 0..self.values[cat.dom(f)] {
                    let fe = self.actions[f][e];
                    b.compose(mors[&(g, fe)], mors[&(f, e)], mors[&(h, e)]);
                }
            }
        }
        (b.build().expect("categories of elements are categories"), objs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NatTrans {
    pub components: Vec<Vec<usize>>,
}

impl NatTrans {
    pub fn identity(f: &SetFunctor) -> Self {
        NatTrans {
            components: f.values.iter().map(|&n| (0..n).collect()).collect(),
        }
    }

    /// `self . other`.
    pub fn compose(&self, other: &NatTrans) -> NatTrans {
        NatTrans {
            components: self
                .components
                .iter()
                .zip(&other.components)
                .map(|(a, b)| b.iter().map(|&e| a[e]).collect())
                .collect(),
        }
    }

    /// First morphism whose naturality square fails.
    pub fn naturality_failure(&self, cat: &FiniteCategory, from: &SetFunctor, to: &SetFunctor) -> Option<MorId> {
        cat.morphisms().find(|&m| {
            let (x, y) = (cat.dom(m), cat.cod(m));
            (0..from.values[x]).any(|e| to.actions[m][self.components[x][e]] != self.components[y][from.actions[m][e]])
        })
    }

    pub fn is_natural(&self, cat: &FiniteCategory, from: &SetFunctor, to: &SetFunctor) -> bool {
        self.components.len() == cat.num_objects()
            && cat
                .objects()
                .all(|x| self.components[x].len() == from.values[x] && self.components[x].iter().all(|&v| v < to.values[x]))
            && self.naturality_failure(cat, from, to).is_none()
    }

    pub fn is_iso(&self, to: &SetFunctor) -> bool {
        self.components.iter().enumerate().all(|(x, c)| {
            let mut seen = vec![false; to.values[x]];
            c.len() == to.values[x] && c.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
        })
    }

    pub fn is_mono(&self, to: &SetFunctor) -> bool {
        self.components.iter().enumerate().all(|(x, c)| {
            let mut seen = vec![false; to.values[x]];
            c.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
        })
    }
}

/// Every natural transformation `from => to`, in lexicographic order of
/// component tables.
pub fn nat_trans(cat: &FiniteCategory, from: &SetFunctor, to: &SetFunctor) -> Vec<NatTrans> {
    let n = cat.num_objects();
    let mut checks: Vec<Vec<MorId>> = vec![Vec::new(); n];
    for m in cat.morphisms() {
        checks[cat.dom(m).max(cat.cod(m))].push(m);
    }
    let mut out = Vec::new();
    let mut comps: Vec<Vec<usize>> = Vec::with_capacity(n);
    nat_rec(cat, from, to, &checks, &mut comps, &mut out);
    out
}

fn nat_rec(
    cat: &FiniteCategory,
    from: &SetFunctor,
    to: &SetFunctor,
    checks: &[Vec<MorId>],
    comps: &mut Vec<Vec<usize>>,
    out: &mut Vec<NatTrans>,
) {
    let x = comps.len();
    if x == cat.num_objects() {
        out.push(NatTrans {
            components: comps.clone(),
        });
        return;
    }
    for table in functions(from.values[x], to.values[x]) {
        comps.push(table);
        let ok = checks[x].iter().all(|&m| {
            let (a, b) = (cat.dom(m), cat.cod(m));
            (0..from.values[a]).all(|e| to.actions[m][comps[a][e]] == comps[b][from.actions[m][e]])
        });
        if ok {
            nat_rec(cat, from, to, checks, comps, out);
        }
        comps.pop();
    }
}

/// All tables `0..n -> 0..m`, lexicographic.
pub fn functions(n: usize, m: usize) -> Vec<Vec<usize>> {
    crate::category::all_functions(n, m)
}

/// How each non-identity morphism is obtained during enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Generator(MorId),
    Derived { m: MorId, g: MorId, f: MorId },
}

/// Resumable position of a [`FunctorEnumerator`]: the index of the value
/// assignment and the number of functors already produced for it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Cursor {
    pub values: u64,
    pub within: u64,
}

/// Enumerates all functors `cat -> FinSet` with every value of size at most
/// `bound`, in a fixed order: value assignments as mixed-radix numbers over
/// the objects, then action tables of a generating set of morphisms in
/// lexicographic order. Composites are derived and every composition law is
/// checked as soon as its three tables are known.
pub struct FunctorEnumerator<'a> {
    cat: &'a FiniteCategory,
    bound: usize,
    steps: Vec<Step>,
    /// Composition constraints `(g, f, h)` indexed by the step at which the
    /// last of the three becomes known.
    constraints: Vec<Vec<(MorId, MorId, MorId)>>,
    injective_only: bool,
    cursor: Cursor,
    pending: Vec<SetFunctor>,
    done: bool,
}

impl<'a> FunctorEnumerator<'a> {
    pub fn new(cat: &'a FiniteCategory, bound: usize) -> Self {
        let steps = plan_steps(cat);
        let mut position = vec![None; cat.num_morphisms()];
        for (i, s) in steps.iter().enumerate() {
            let m = match *s {
                Step::Generator(m) | Step::Derived { m, .. } => m,
            };
            position[m] = Some(i);
        }
        let mut constraints = vec![Vec::new(); steps.len()];
        for f in cat.morphisms() {
            for g in cat.morphisms() {
                let Some(h) = cat.try_compose(g, f) else { continue };
                if cat.is_identity(f) || cat.is_identity(g) {
                    continue;
                }
                // identities are known before the first step
                let at = |m: MorId| if cat.is_identity(m) { Some(0) } else { position[m] };
                let (Some(pf), Some(pg), Some(ph)) = (at(f), at(g), at(h)) else { continue };
                constraints[pf.max(pg).max(ph)].push((g, f, h));
            }
        }
        FunctorEnumerator {
            cat,
            bound,
            steps,
            constraints,
            injective_only: false,
            cursor: Cursor::default(),
            pending: Vec::new(),
            done: false,
        }
    }

    /// Restricts to functors whose action tables are all injective.
    pub fn injective_only(mut self) -> Self {
        self.injective_only = true;
        self
    }

    /// Continues from a cursor previously returned by [`Self::cursor`].
    pub fn resume(mut self, cursor: Cursor) -> Self {
        self.cursor = Cursor {
            values: cursor.values,
            within: 0,
        };
        self.pending.clear();
        self.done = false;
        self.fill();
        let skip = (cursor.within as usize).min(self.pending.len());
        self.pending.drain(..skip);
        self.cursor.within = cursor.within;
        self
    }

    pub fn cursor(&self) -> Cursor {
        self.cursor
    }

    pub fn generator_count(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Generator(_))).count()
    }

    /// Upper bound on the search space size: value assignments times
    /// generator tables at the largest sizes.
    pub fn size_estimate(&self) -> f64 {
        let b = (self.bound + 1) as f64;
        let per_table = (self.bound.max(1) as f64).powi(self.bound as i32);
        b.powi(self.cat.num_objects() as i32) * per_table.powi(self.generator_count() as i32)
    }

    fn total_assignments(&self) -> u64 {
        ((self.bound + 1) as u64).pow(self.cat.num_objects() as u32)
    }

    fn values_for(&self, mut idx: u64) -> Vec<usize> {
        let base = (self.bound + 1) as u64;
        let mut v = vec![0; self.cat.num_objects()];
        for slot in v.iter_mut().rev() {
            *slot = (idx % base) as usize;
            idx /= base;
        }
        v
    }

    fn fill(&mut self) {
        while self.pending.is_empty() {
            if self.cursor.values >= self.total_assignments() {
                self.done = true;
                return;
            }
            let values = self.values_for(self.cursor.values);
            let mut actions: Vec<Option<Vec<usize>>> = vec![None; self.cat.num_morphisms()];
            for x in self.cat.objects() {
                actions[self.cat.id(x)] = Some((0..values[x]).collect());
            }
            let mut found = Vec::new();
            self.search(&values, &mut actions, 0, &mut found);
            self.pending = found;
            if self.pending.is_empty() {
                self.cursor.values += 1;
                self.cursor.within = 0;
            }
        }
    }

    fn search(&self, values: &[usize], actions: &mut Vec<Option<Vec<usize>>>, k: usize, out: &mut Vec<SetFunctor>) {
        if k == self.steps.len() {
            out.push(SetFunctor {
                values: values.to_vec(),
                actions: actions.iter().map(|a| a.clone().expect("all set")).collect(),
            });
            return;
        }
        let holds = |actions: &Vec<Option<Vec<usize>>>| {
            self.constraints[k].iter().all(|&(g, f, h)| {
                let (tf, tg, th) = (
                    actions[f].as_ref().unwrap(),
                    actions[g].as_ref().unwrap(),
                    actions[h].as_ref().unwrap(),
                );
                tf.iter().zip(th).all(|(&a, &b)| tg[a] == b)
            })
        };
        match self.steps[k] {
            Step::Generator(m) => {
                let (x, y) = (self.cat.dom(m), self.cat.cod(m));
                for t in functions(values[x], values[y]) {
                    if self.injective_only && !is_injective(&t, values[y]) {
                        continue;
                    }
                    actions[m] = Some(t);
                    if holds(actions) {
                        self.search(values, actions, k + 1, out);
                    }
                }
                actions[m] = None;
            }
            Step::Derived { m, g, f } => {
                let tf = actions[f].as_ref().unwrap();
                let tg = actions[g].as_ref().unwrap();
                let t: Vec<usize> = tf.iter().map(|&a| tg[a]).collect();
                if self.injective_only && !is_injective(&t, values[self.cat.cod(m)]) {
                    return;
                }
                actions[m] = Some(t);
                if holds(actions) {
                    self.search(values, actions, k + 1, out);
                }
                actions[m] = None;
            }
        }
    }
}

fn is_injective(t: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    t.iter().all(|&v| !std::mem::replace(&mut seen[v], true))
}

fn plan_steps(cat: &FiniteCategory) -> Vec<Step> {
    let non_id: Vec<MorId> = cat.morphisms().filter(|&m| !cat.is_identity(m)).collect();
    let decomposable = |m: MorId| {
        non_id.iter().any(|&f| {
            non_id
                .iter()
                .any(|&g| f != m && g != m && cat.try_compose(g, f) == Some(m))
        })
    };
    let mut known = vec![false; cat.num_morphisms()];
    for x in cat.objects() {
        known[cat.id(x)] = true;
    }
    let mut steps = Vec::new();
    let mut remaining = non_id.clone();
    while !remaining.is_empty() {
        let derived = remaining.iter().enumerate().find_map(|(i, &m)| {
            non_id.iter().find_map(|&f| {
                non_id.iter().find_map(|&g| {
                    (known[f] && known[g] && !cat.is_identity(f) && cat.try_compose(g, f) == Some(m))
                        .then_some((i, Step::Derived { m, g, f }))
                })
            })
        });
        let (i, step) = match derived {
            Some(d) => d,
            None => {
                let i = remaining
                    .iter()
                    .position(|&m| !decomposable(m))
                    .unwrap_or(0);
                (i, Step::Generator(remaining[i]))
            }
        };
        let m = remaining.remove(i);
        known[m] = true;
        steps.push(step);
    }
    steps
}

impl Iterator for FunctorEnumerator<'_> {
    type Item = SetFunctor;

    fn next(&mut self) -> Option<SetFunctor> {
        if self.done {
            return None;
        }
        self.fill();
        if self.done {
            return None;
        }
        let f = self.pending.remove(0);
        self.cursor.within += 1;
        if self.pending.is_empty() {
            self.cursor.values += 1;
            self.cursor.within = 0;
        }
        Some(f)
    }
}

/// All functors with values bounded by `bound`.
pub fn all_functors(cat: &FiniteCategory, bound: usize) -> Vec<SetFunctor> {
    FunctorEnumerator::new(cat, bound).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> FiniteCategory {
        FiniteCategory::preorder("chain", (0..n).map(|i| i.to_string()).collect(), |a, b| a <= b)
    }

    fn brute_force_count(cat: &FiniteCategory, bound: usize) -> usize {
        let mut count = 0;
        let n = cat.num_objects();
        let mut values = vec![0; n];
        loop {
            let tables: Vec<Vec<Vec<usize>>> = cat
                .morphisms()
                .map(|m| functions(values[cat.dom(m)], values[cat.cod(m)]))
                .collect();
            let mut idx = vec![0; tables.len()];
            if tables.iter().all(|t| !t.is_empty()) {
                loop {
                    let f = SetFunctor {
                        values: values.clone(),
                        actions: idx.iter().zip(&tables).map(|(&i, t)| t[i].clone()).collect(),
                    };
                    if f.validate(cat).is_ok() {
                        count += 1;
                    }
                    let mut k = idx.len();
                    loop {
                        if k == 0 {
                            break;
                        }
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] < tables[k].len() {
                            break;
                        }
                        idx[k] = 0;
                    }
                    if idx.iter().all(|&i| i == 0) {
                        break;
                    }
                }
            }
            let mut k = n;
            loop {
                if k == 0 {
                    return count;
                }
                k -= 1;
                values[k] += 1;
                if values[k] <= bound {
                    break;
                }
                values[k] = 0;
            }
        }
    }

    #[test]
    fn enumeration_matches_brute_force() {
        for cat in [chain(2), chain(3)] {
            let all = all_functors(&cat, 2);
            assert_eq!(all.len(), brute_force_count(&cat, 2));
            assert!(all.iter().all(|f| f.validate(&cat).is_ok()));
        }
        let square = FiniteCategory::preorder("sq", (0..4).map(|i| i.to_string()).collect(), |a, b| a & !b == 0);
        assert_eq!(all_functors(&square, 1).len(), brute_force_count(&square, 1));
        // two isomorphic objects with a third object over one of them
        let mut b = CategoryBuilder::new("iso");
        let (x, y, z) = (b.object("x").unwrap(), b.object("y").unwrap(), b.object("z").unwrap());
        let i = b.morphism("i", x, y).unwrap();
        let j = b.morphism("j", y, x).unwrap();
        let k = b.morphism("k", y, z).unwrap();
        let l = b.morphism("l", x, z).unwrap();
        let (idx, idy) = (b.morphism_id("id_x").unwrap(), b.morphism_id("id_y").unwrap());
        b.compose(j, i, idx);
        b.compose(i, j, idy);
        b.compose(k, i, l);
        b.compose(l, j, k);
        let iso = b.build().unwrap();
        let all = all_functors(&iso, 2);
        assert!(all.iter().all(|f| f.validate(&iso).is_ok()));
        assert_eq!(all.len(), brute_force_count(&iso, 2));
    }

    #[test]
    fn resumes_from_cursor() {
        let cat = chain(3);
        let all = all_functors(&cat, 2);
        let mut e = FunctorEnumerator::new(&cat, 2);
        let first: Vec<SetFunctor> = e.by_ref().take(17).collect();
        let cursor = e.cursor();
        let rest: Vec<SetFunctor> = FunctorEnumerator::new(&cat, 2).resume(cursor).collect();
        assert_eq!(first.len() + rest.len(), all.len());
        assert_eq!([first, rest].concat(), all);
    }

    #[test]
    fn nat_trans_of_representables() {
        let cat = chain(3);
        let h0 = SetFunctor::representable(&cat, 0);
        let h2 = SetFunctor::representable(&cat, 2);
        assert_eq!(h0.values, vec![1, 1, 1]);
        assert_eq!(h2.values, vec![0, 0, 1]);
        assert_eq!(nat_trans(&cat, &h2, &h0).len(), 1);
        assert!(nat_trans(&cat, &h0, &h2).is_empty());
        let id = NatTrans::identity(&h0);
        assert!(id.is_natural(&cat, &h0, &h0) && id.is_iso(&h0));
    }

    #[test]
    fn elements_category() {
        let cat = chain(2);
        let f = SetFunctor {
            values: vec![2, 1],
            actions: vec![vec![0, 1], vec![0, 0], vec![0]],
        };
        f.validate(&cat).unwrap();
        let (el, objs) = f.elements(&cat);
        assert_eq!(objs, vec![(0, 0), (0, 1), (1, 0)]);
        assert_eq!(el.num_morphisms(), 5);
    }
}
