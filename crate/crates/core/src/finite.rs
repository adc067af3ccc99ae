//! Explicit finite categories: objects, morphisms and a composition table.
//!
//! This is the shared currency between modules. Spectrum sites, Table
//! backends, categories of elements and the small test categories of the
//! transport harness are all `FiniteCategory` values, so the sieve, sheaf and
//! functor code only has to be written once.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

pub type ObjId = usize;
pub type MorId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CategoryError {
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("unknown morphism `{0}`")]
    UnknownMorphism(String),
    #[error("duplicate name `{0}`")]
    Duplicate(String),
    #[error("composite {g} . {f} is not defined")]
    MissingComposite { g: String, f: String },
    #[error("composite {g} . {f} = {h} has the wrong endpoints")]
    BadComposite { g: String, f: String, h: String },
    #[error("identity law fails at `{0}`")]
    Identity(String),
    #[error("associativity fails for {h} . {g} . {f}")]
    Associativity { h: String, g: String, f: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MorphismInfo {
    pub name: String,
    pub dom: ObjId,
    pub cod: ObjId,
}

#[derive(Clone, PartialEq, Eq)]
pub struct FiniteCategory {
    name: String,
    objects: Vec<String>,
    morphisms: Vec<MorphismInfo>,
    identities: Vec<MorId>,
    /// `comp[g][f]` is `g . f` when `cod f = dom g`.
    comp: Vec<Vec<Option<MorId>>>,
    homs: Vec<Vec<Vec<MorId>>>,
}

impl fmt::Debug for FiniteCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "FiniteCategory({}, {} objects, {} morphisms)",
            self.name,
            self.objects.len(),
            self.morphisms.len()
        )
    }
}

/// Incremental construction of a [`FiniteCategory`]; identities are added
/// automatically and composites with identities are implied.
#[derive(Debug, Clone, Default)]
pub struct CategoryBuilder {
    name: String,
    objects: Vec<String>,
    morphisms: Vec<MorphismInfo>,
    identities: Vec<MorId>,
    composites: Vec<(MorId, MorId, MorId)>,
}

impl CategoryBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        CategoryBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn object(&mut self, name: impl Into<String>) -> Result<ObjId, CategoryError> {
        let name = name.into();
        if self.objects.contains(&name) {
            return Err(CategoryError::Duplicate(name));
        }
        let id = self.objects.len();
        let id_name = format!("id_{name}");
        self.objects.push(name);
        self.identities.push(self.morphisms.len());
        self.morphisms.push(MorphismInfo {
            name: id_name,
            dom: id,
            cod: id,
        });
        Ok(id)
    }

    pub fn morphism(&mut self, name: impl Into<String>, dom: ObjId, cod: ObjId) -> Result<MorId, CategoryError> {
        let name = name.into();
        if self.morphisms.iter().any(|m| m.name == name) {
            return Err(CategoryError::Duplicate(name));
        }
        self.morphisms.push(MorphismInfo { name, dom, cod });
        Ok(self.morphisms.len() - 1)
    }

    /// Records `g . f = h`.
    pub fn compose(&mut self, g: MorId, f: MorId, h: MorId) {
        self.composites.push((g, f, h));
    }

    pub fn object_id(&self, name: &str) -> Result<ObjId, CategoryError> {
        self.objects
            .iter()
            .position(|o| o == name)
            .ok_or_else(|| CategoryError::UnknownObject(name.to_string()))
    }

    pub fn morphism_id(&self, name: &str) -> Result<MorId, CategoryError> {
        self.morphisms
            .iter()
            .position(|m| m.name == name)
            .ok_or_else(|| CategoryError::UnknownMorphism(name.to_string()))
    }

    pub fn build(self) -> Result<FiniteCategory, CategoryError> {
        let n = self.morphisms.len();
        let mut comp = vec![vec![None; n]; n];
        let is_id = |m: MorId| self.identities.contains(&m);
        for (f, info) in self.morphisms.iter().enumerate() {
            comp[f][self.identities[info.dom]] = Some(f);
            comp[self.identities[info.cod]][f] = Some(f);
        }
        for &(g, f, h) in &self.composites {
            if is_id(g) || is_id(f) {
                continue;
            }
            comp[g][f] = Some(h);
        }
        FiniteCategory::from_parts(self.name, self.objects, self.morphisms, self.identities, comp)
    }
}

impl FiniteCategory {
    /// Assembles and validates a category from raw tables.
    pub fn from_parts(
        name: impl Into<String>,
        objects: Vec<String>,
        morphisms: Vec<MorphismInfo>,
        identities: Vec<MorId>,
        comp: Vec<Vec<Option<MorId>>>,
    ) -> Result<Self, CategoryError> {
        let mut homs = vec![vec![Vec::new(); objects.len()]; objects.len()];
        for (m, info) in morphisms.iter().enumerate() {
            homs[info.dom][info.cod].push(m);
        }
        let cat = FiniteCategory {
            name: name.into(),
            objects,
            morphisms,
            identities,
            comp,
            homs,
        };
        cat.check_axioms()?;
        Ok(cat)
    }

    /// A category built from a composition function instead of a table.
    pub fn from_fn(
        name: impl Into<String>,
        objects: Vec<String>,
        morphisms: Vec<MorphismInfo>,
        identities: Vec<MorId>,
        compose: impl Fn(MorId, MorId) -> MorId,
    ) -> Result<Self, CategoryError> {
        let n = morphisms.len();
        let comp = (0..n)
            .map(|g| {
                (0..n)
                    .map(|f| (morphisms[f].cod == morphisms[g].dom).then(|| compose(g, f)))
                    .collect()
            })
            .collect();
        FiniteCategory::from_parts(name, objects, morphisms, identities, comp)
    }

    /// The thin category of a preorder given by `leq`.
    pub fn preorder(name: impl Into<String>, objects: Vec<String>, leq: impl Fn(ObjId, ObjId) -> bool) -> Self {
        let n = objects.len();
        let mut morphisms = Vec::new();
        let mut index = vec![vec![None; n]; n];
        for a in 0..n {
            for b in 0..n {
                if leq(a, b) {
                    index[a][b] = Some(morphisms.len());
                    let name = if a == b {
                        format!("id_{}", objects[a])
                    } else {
                        format!("{}<={}", objects[a], objects[b])
                    };
                    morphisms.push(MorphismInfo { name, dom: a, cod: b });
                }
            }
        }
        let identities = (0..n).map(|a| index[a][a].expect("preorders are reflexive")).collect();
        let m = morphisms.clone();
        FiniteCategory::from_fn(name, objects, morphisms, identities, |g, f| {
            index[m[f].dom][m[g].cod].expect("preorders are transitive")
        })
        .expect("preorders are categories")
    }

    fn check_axioms(&self) -> Result<(), CategoryError> {
        let n = self.morphisms.len();
        let name = |m: MorId| self.morphisms[m].name.clone();
        for g in 0..n {
            for f in 0..n {
                if self.morphisms[f].cod != self.morphisms[g].dom {
                    continue;
                }
                let h = self.comp[g][f].ok_or_else(|| CategoryError::MissingComposite { g: name(g), f: name(f) })?;
                if self.morphisms[h].dom != self.morphisms[f].dom || self.morphisms[h].cod != self.morphisms[g].cod {
                    return Err(CategoryError::BadComposite {
                        g: name(g),
                        f: name(f),
                        h: name(h),
                    });
                }
            }
        }
        for (x, &i) in self.identities.iter().enumerate() {
            if self.morphisms[i].dom != x || self.morphisms[i].cod != x {
                return Err(CategoryError::Identity(self.objects[x].clone()));
            }
        }
        for (f, info) in self.morphisms.iter().enumerate() {
            if self.comp[f][self.identities[info.dom]] != Some(f) || self.comp[self.identities[info.cod]][f] != Some(f) {
                return Err(CategoryError::Identity(info.name.clone()));
            }
        }
        for f in 0..n {
            for g in self.out_of(self.morphisms[f].cod) {
                let gf = self.compose(g, f);
                for h in self.out_of(self.morphisms[g].cod) {
                    if self.compose(h, gf) != self.compose(self.compose(h, g), f) {
                        return Err(CategoryError::Associativity {
                            h: name(h),
                            g: name(g),
                            f: name(f),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    fn out_of(&self, x: ObjId) -> impl Iterator<Item = MorId> + '_ {
        (0..self.objects.len()).flat_map(move |y| self.homs[x][y].iter().copied())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_morphisms(&self) -> usize {
        self.morphisms.len()
    }

    pub fn objects(&self) -> std::ops::Range<ObjId> {
        0..self.objects.len()
    }

    pub fn morphisms(&self) -> std::ops::Range<MorId> {
        0..self.morphisms.len()
    }

    pub fn object_name(&self, x: ObjId) -> &str {
        &self.objects[x]
    }

    pub fn morphism_name(&self, m: MorId) -> &str {
        &self.morphisms[m].name
    }

    pub fn object_id(&self, name: &str) -> Result<ObjId, CategoryError> {
        self.objects
            .iter()
            .position(|o| o == name)
            .ok_or_else(|| CategoryError::UnknownObject(name.to_string()))
    }

    pub fn morphism_id(&self, name: &str) -> Result<MorId, CategoryError> {
        self.morphisms
            .iter()
            .position(|m| m.name == name)
            .ok_or_else(|| CategoryError::UnknownMorphism(name.to_string()))
    }

    pub fn dom(&self, m: MorId) -> ObjId {
        self.morphisms[m].dom
    }

    pub fn cod(&self, m: MorId) -> ObjId {
        self.morphisms[m].cod
    }

    pub fn id(&self, x: ObjId) -> MorId {
        self.identities[x]
    }

    pub fn is_identity(&self, m: MorId) -> bool {
        self.identities[self.dom(m)] == m
    }

    pub fn hom(&self, x: ObjId, y: ObjId) -> &[MorId] {
        &self.homs[x][y]
    }

    /// All morphisms with codomain `y`.
    pub fn into_obj(&self, y: ObjId) -> Vec<MorId> {
        self.objects().flat_map(|x| self.homs[x][y].iter().copied()).collect()
    }

    /// `g . f`; panics when the pair is not composable.
    pub fn compose(&self, g: MorId, f: MorId) -> MorId {
        self.comp[g][f].unwrap_or_else(|| {
            panic!(
                "{} . {} is not composable in {}",
                self.morphisms[g].name, self.morphisms[f].name, self.name
            )
        })
    }

    pub fn try_compose(&self, g: MorId, f: MorId) -> Option<MorId> {
        self.comp[g][f]
    }

    pub fn is_mono(&self, f: MorId) -> bool {
        let x = self.dom(f);
        self.objects().all(|a| {
            let hs = self.hom(a, x);
            let mut seen = BTreeSet::new();
            hs.iter().all(|&g| seen.insert(self.compose(f, g)))
        })
    }

    pub fn is_epi(&self, f: MorId) -> bool {
        let y = self.cod(f);
        self.objects().all(|b| {
            let hs = self.hom(y, b);
            let mut seen = BTreeSet::new();
            hs.iter().all(|&g| seen.insert(self.compose(g, f)))
        })
    }

    pub fn inverse(&self, f: MorId) -> Option<MorId> {
        self.hom(self.cod(f), self.dom(f)).iter().copied().find(|&g| {
            self.compose(g, f) == self.id(self.dom(f)) && self.compose(f, g) == self.id(self.cod(f))
        })
    }

    pub fn is_iso(&self, f: MorId) -> bool {
        self.inverse(f).is_some()
    }

    pub fn is_thin(&self) -> bool {
        self.objects().all(|x| self.objects().all(|y| self.hom(x, y).len() <= 1))
    }

    /// Partition of the objects into isomorphism classes, each sorted, in
    /// order of least member.
    pub fn iso_classes(&self) -> Vec<Vec<ObjId>> {
        let mut classes: Vec<Vec<ObjId>> = Vec::new();
        for x in self.objects() {
            let found = classes.iter_mut().find(|c| {
                let y = c[0];
                self.hom(x, y).iter().any(|&f| self.is_iso(f))
            });
            match found {
                Some(c) => c.push(x),
                None => classes.push(vec![x]),
            }
        }
        classes
    }

    /// The opposite category; morphism ids are preserved.
    pub fn opposite(&self) -> FiniteCategory {
        let morphisms = self
            .morphisms
            .iter()
            .map(|m| MorphismInfo {
                name: m.name.clone(),
                dom: m.cod,
                cod: m.dom,
            })
            .collect();
        let n = self.morphisms.len();
        let comp = (0..n)
            .map(|g| (0..n).map(|f| self.comp[f][g]).collect())
            .collect();
        FiniteCategory::from_parts(
            format!("{}^op", self.name),
            self.objects.clone(),
            morphisms,
            self.identities.clone(),
            comp,
        )
        .expect("the opposite of a category is a category")
    }

    /// Objects connected to `x` by a zig-zag of morphisms.
    pub fn components(&self) -> Vec<Vec<ObjId>> {
        let mut label: Vec<Option<usize>> = vec![None; self.num_objects()];
        let mut out = Vec::new();
        for start in self.objects() {
            if label[start].is_some() {
                continue;
            }
            let k = out.len();
            let mut comp = vec![start];
            label[start] = Some(k);
            let mut i = 0;
            while i < comp.len() {
                let x = comp[i];
                for m in self.morphisms() {
                    let (d, c) = (self.dom(m), self.cod(m));
                    for (a, b) in [(d, c), (c, d)] {
                        if a == x && label[b].is_none() {
                            label[b] = Some(k);
                            comp.push(b);
                        }
                    }
                }
                i += 1;
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Renders the category in the table text format.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for o in &self.objects {
            out.push_str(&format!("object {o}\n"));
        }
        for (m, info) in self.morphisms.iter().enumerate() {
            if !self.is_identity(m) {
                out.push_str(&format!(
                    "morphism {} : {} -> {}\n",
                    info.name, self.objects[info.dom], self.objects[info.cod]
                ));
            }
        }
        for g in self.morphisms() {
            for f in self.morphisms() {
                if self.is_identity(g) || self.is_identity(f) {
                    continue;
                }
                if let Some(h) = self.comp[g][f] {
                    out.push_str(&format!(
                        "compose {} {} = {}\n",
                        self.morphisms[g].name, self.morphisms[f].name, self.morphisms[h].name
                    ));
                }
            }
        }
        out
    }
}

/// A finite diagram: a list of vertices mapped to objects and edges mapped
/// to morphisms between them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    pub vertices: Vec<ObjId>,
    /// `(from, to, morphism)` with `from`, `to` vertex indices.
    pub edges: Vec<(usize, usize, MorId)>,
}

/// A cone over a diagram: an apex and one leg per vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cone {
    pub apex: ObjId,
    pub legs: Vec<MorId>,
}

impl FiniteCategory {
    /// Every cone with the given apex.
    pub fn cones(&self, d: &Diagram, apex: ObjId) -> Vec<Cone> {
        let mut out = Vec::new();
        let mut legs = Vec::with_capacity(d.vertices.len());
        self.cones_rec(d, apex, &mut legs, &mut out);
        out
    }

    fn cones_rec(&self, d: &Diagram, apex: ObjId, legs: &mut Vec<MorId>, out: &mut Vec<Cone>) {
        let k = legs.len();
        if k == d.vertices.len() {
            out.push(Cone { apex, legs: legs.clone() });
            return;
        }
        for &leg in self.hom(apex, d.vertices[k]) {
            legs.push(leg);
            let ok = d.edges.iter().all(|&(from, to, m)| {
                from.max(to) >= legs.len() || self.compose(m, legs[from]) == legs[to]
            });
            if ok {
                self.cones_rec(d, apex, legs, out);
            }
            legs.pop();
        }
    }

    /// Morphisms `apex(c) -> apex(limit)` through which `c` factors.
    pub fn factorizations(&self, c: &Cone, limit: &Cone) -> Vec<MorId> {
        self.hom(c.apex, limit.apex)
            .iter()
            .copied()
            .filter(|&u| limit.legs.iter().zip(&c.legs).all(|(&l, &cl)| self.compose(l, u) == cl))
            .collect()
    }

    /// Whether `cone` is a limit: every cone factors through it uniquely.
    pub fn is_limit(&self, d: &Diagram, cone: &Cone) -> bool {
        self.objects()
            .all(|a| self.cones(d, a).iter().all(|c| self.factorizations(c, cone).len() == 1))
    }

    /// Some limit cone, searched by brute force, least apex first.
    pub fn limit(&self, d: &Diagram) -> Option<Cone> {
        self.objects()
            .flat_map(|a| self.cones(d, a))
            .find(|c| self.is_limit(d, c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arrow_category() -> FiniteCategory {
        let mut b = CategoryBuilder::new("arrow");
        let a = b.object("a").unwrap();
        let c = b.object("b").unwrap();
        b.morphism("f", a, c).unwrap();
        b.build().unwrap()
    }

    #[test]
    fn builds_identities_and_homs() {
        let cat = arrow_category();
        assert_eq!(cat.num_morphisms(), 3);
        assert_eq!(cat.hom(0, 1).len(), 1);
        assert!(cat.hom(1, 0).is_empty());
        let f = cat.morphism_id("f").unwrap();
        assert_eq!(cat.compose(cat.id(1), f), f);
        assert!(cat.is_mono(f) && cat.is_epi(f) && !cat.is_iso(f));
    }

    #[test]
    fn rejects_missing_and_non_associative_composites() {
        let mut b = CategoryBuilder::new("broken");
        let x = b.object("x").unwrap();
        let y = b.object("y").unwrap();
        let z = b.object("z").unwrap();
        b.morphism("f", x, y).unwrap();
        b.morphism("g", y, z).unwrap();
        assert!(matches!(b.build(), Err(CategoryError::MissingComposite { .. })));

        let mut b = CategoryBuilder::new("idem");
        let x = b.object("x").unwrap();
        let e = b.morphism("e", x, x).unwrap();
        let s = b.morphism("s", x, x).unwrap();
        b.compose(e, e, e);
        b.compose(s, s, e);
        b.compose(e, s, s);
        b.compose(s, e, e);
        assert!(b.build().is_err());
    }

    #[test]
    fn preorder_limits_are_meets() {
        let cat = FiniteCategory::preorder("square", vec!["0".into(), "a".into(), "b".into(), "1".into()], |x, y| {
            x & !y == 0
        });
        let product = Diagram {
            vertices: vec![1, 2],
            edges: vec![],
        };
        assert_eq!(cat.limit(&product).unwrap().apex, 0);
        let terminal = Diagram {
            vertices: vec![],
            edges: vec![],
        };
        assert_eq!(cat.limit(&terminal).unwrap().apex, 3);
        assert!(cat.is_thin());
        assert_eq!(cat.opposite().hom(3, 0).len(), 1);
    }

    #[test]
    fn iso_classes_and_components() {
        let mut b = CategoryBuilder::new("iso");
        let x = b.object("x").unwrap();
        let y = b.object("y").unwrap();
        b.object("z").unwrap();
        let f = b.morphism("f", x, y).unwrap();
        let g = b.morphism("g", y, x).unwrap();
        b.compose(g, f, 0);
        b.compose(f, g, 1);
        let cat = b.build().unwrap();
        assert_eq!(cat.iso_classes(), vec![vec![0, 1], vec![2]]);
        assert_eq!(cat.components(), vec![vec![0, 1], vec![2]]);
    }
}
