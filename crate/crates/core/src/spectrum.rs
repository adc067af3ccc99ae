//! Prime and ultrafilter spectra of a presented category.
//!
//! An object of the spectrum is a pair `(x, p)` with `p` a prime filter on
//! `Sub(x)` (or an ultrafilter on its complemented part). Filters on finite
//! lattices are principal, so `p` is determined by its generator `g`, a
//! subobject of `x`, and we keep the domain of `g` around as the *core* of
//! the object.
//!
//! A germ `(x, p) -> (y, q)` is a class of partial maps `u -> y` with `u` in
//! `p`, two maps being identified when they agree on some member of `p`.
//! Restricting to the generator gives a normal form: a map `h : core(p) -> y`.
//! Continuity (`v` in `q` implies `h^{-1}(v)` in `p`) says exactly that `h`
//! factors through the generator of `q`, so a germ is stored as the factored
//! map `core(p) -> core(q)` and germ composition is composition in `C`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::category::{CatError, Mor, Obj, PresentedCategory, Scope, SubLattice};
use crate::finite::{FiniteCategory, MorId, MorphismInfo, ObjId};
use crate::functor::{NatTrans, SetFunctor};
use crate::lattice::{self, Elem, FinLattice, Filter, LatticeError};
use crate::report::Verdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variant {
    /// Prime filters on `Sub(x)`.
    Prime,
    /// Ultrafilters on the complemented subobjects of `x`.
    Ultra,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Prime => "prime",
            Variant::Ultra => "ultra",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        match s {
            "prime" => Some(Variant::Prime),
            "ultra" => Some(Variant::Ultra),
            _ => None,
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecError {
    #[error(transparent)]
    Cat(#[from] CatError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("germs have different endpoints")]
    ObjectMismatch,
    #[error("domain {0} is not a member of the source filter")]
    DomainNotInFilter(String),
    #[error("partial map is not continuous: it does not factor through {0}")]
    NotContinuous(String),
    #[error("object `{0}` is not in the scope")]
    OutOfScope(String),
    #[error("type of element {element} at {object} is not a {kind} filter")]
    BadType {
        object: String,
        element: usize,
        kind: &'static str,
    },
}

impl SpecError {
    pub fn is_bound(&self) -> bool {
        matches!(self, SpecError::Cat(e) if e.is_bound())
    }
}

/// The lattice a variant's filters live on, with its embedding into `Sub(x)`.
#[derive(Debug, Clone)]
pub struct TypeLattice {
    pub sub: Arc<SubLattice>,
    pub lattice: FinLattice,
    /// `embed[i]` is the subobject index of local element `i`.
    pub embed: Vec<Elem>,
}

impl TypeLattice {
    pub fn local(&self, ambient: Elem) -> Option<Elem> {
        self.embed.iter().position(|&e| e == ambient)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpecObject {
    pub x: Obj,
    pub filter: Filter,
    /// Least member of the filter, as an index of `Sub(x)`.
    pub generator: Elem,
    /// Domain of the generator's canonical mono.
    pub core: Obj,
}

/// A germ in normal form: the map between cores.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Germ {
    pub source: SpecObject,
    pub target: SpecObject,
    pub core: Mor,
}

/// Spectrum computations over one presented category and variant.
pub struct Spectrum<'c> {
    pub c: &'c PresentedCategory,
    pub variant: Variant,
    cache: Mutex<BTreeMap<Obj, Arc<TypeLattice>>>,
}

impl<'c> Spectrum<'c> {
    pub fn new(c: &'c PresentedCategory, variant: Variant) -> Self {
        Spectrum {
            c,
            variant,
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn type_lattice(&self, x: Obj) -> Result<Arc<TypeLattice>, SpecError> {
        if let Some(t) = self.cache.lock().expect("cache lock").get(&x) {
            return Ok(t.clone());
        }
        let sub = self.c.sub_lattice(x)?;
        let t = match self.variant {
            Variant::Prime => TypeLattice {
                lattice: sub.lattice.clone(),
                embed: sub.lattice.elems().collect(),
                sub,
            },
            Variant::Ultra => {
                let view = lattice::complemented_sublattice(&sub.lattice, sub.top());
                TypeLattice {
                    lattice: view.lattice,
                    embed: view.embed,
                    sub,
                }
            }
        };
        let t = Arc::new(t);
        self.cache.lock().expect("cache lock").insert(x, t.clone());
        Ok(t)
    }

    /// The type space `S(x)`: all filters of the variant's kind.
    pub fn filters(&self, x: Obj) -> Result<Vec<Filter>, SpecError> {
        let t = self.type_lattice(x)?;
        Ok(match self.variant {
            Variant::Prime => lattice::prime_filters(&t.lattice)?,
            Variant::Ultra => lattice::ultrafilters(&t.lattice)?,
        })
    }

    pub fn object(&self, x: Obj, filter: Filter) -> Result<SpecObject, SpecError> {
        let t = self.type_lattice(x)?;
        let generator = t.embed[filter.generator(&t.lattice)];
        Ok(SpecObject {
            x,
            core: t.sub.subs[generator].domain,
            filter,
            generator,
        })
    }

    /// Every `(x, p)` with `x` in `scope`, in scope order then canonical
    /// filter order.
    pub fn objects(&self, scope: &[Obj]) -> Result<Vec<SpecObject>, SpecError> {
        let mut out = Vec::new();
        for &x in scope {
            for p in self.filters(x)? {
                out.push(self.object(x, p)?);
            }
        }
        Ok(out)
    }

    pub fn object_name(&self, o: &SpecObject) -> String {
        let t = self.type_lattice(o.x).expect("object was built from this lattice");
        let g = t.sub.lattice.elem_name(o.generator);
        let g = g.strip_prefix('{').and_then(|s| s.strip_suffix('}')).unwrap_or(g);
        format!("({},@{})", self.c.object_name(o.x), g)
    }

    fn generator_mono(&self, o: &SpecObject) -> Result<Mor, SpecError> {
        Ok(self.type_lattice(o.x)?.sub.subs[o.generator].mono.clone())
    }

    /// The filter `{v : im(h) <= v}` on the type lattice of `cod h`.
    pub fn image_filter(&self, h: &Mor) -> Result<Filter, SpecError> {
        let t = self.type_lattice(h.cod)?;
        let im = self.c.image(h)?;
        let members = t
            .lattice
            .elems()
            .filter(|&v| t.sub.lattice.leq(im, t.embed[v]));
        Filter::from_members(&t.lattice, members).ok_or(SpecError::Lattice(LatticeError::Improper))
    }

    /// `f_! p` along a total morphism, computed from the preimage map.
    pub fn pushforward(&self, f: &Mor, p: &Filter) -> Result<Filter, SpecError> {
        let src = self.type_lattice(f.dom)?;
        let tgt = self.type_lattice(f.cod)?;
        let pre = self.c.preimage_map(f)?;
        let local: Vec<Elem> = tgt
            .embed
            .iter()
            .map(|&v| src.local(pre[v]).expect("preimages of complemented subobjects are complemented"))
            .collect();
        Ok(lattice::pushforward(&local, &src.lattice, &tgt.lattice, p)?)
    }

    pub fn identity(&self, o: &SpecObject) -> Germ {
        Germ {
            source: o.clone(),
            target: o.clone(),
            core: self.c.identity(o.core),
        }
    }

    /// Normalizes a partial map `f : u -> y` with `u` a subobject index of
    /// `source.x`.
    pub fn germ_from_partial(
        &self,
        source: &SpecObject,
        target: &SpecObject,
        u: Elem,
        f: &Mor,
    ) -> Result<Germ, SpecError> {
        let t = self.type_lattice(source.x)?;
        let in_filter = t.local(u).is_some_and(|l| source.filter.contains(l));
        if !in_filter {
            return Err(SpecError::DomainNotInFilter(t.sub.lattice.elem_name(u).to_string()));
        }
        let gen = self.generator_mono(source)?;
        let incl = self
            .c
            .factor(&gen, &t.sub.subs[u].mono)
            .expect("the generator lies below every member");
        let h = self.c.compose(f, &incl)?;
        let q = self.generator_mono(target)?;
        let core = self.c.factor(&h, &q).ok_or_else(|| {
            let tt = self.type_lattice(target.x).expect("target lattice");
            SpecError::NotContinuous(tt.sub.lattice.elem_name(target.generator).to_string())
        })?;
        Ok(Germ {
            source: source.clone(),
            target: target.clone(),
            core,
        })
    }

    /// The germ of a total morphism `f : x -> y` at `p`, landing in
    /// `(y, f_! p)`.
    pub fn total_germ(&self, source: &SpecObject, f: &Mor) -> Result<Germ, SpecError> {
        let q = self.pushforward(f, &source.filter)?;
        let target = self.object(f.cod, q)?;
        let top = self.type_lattice(source.x)?.sub.top();
        self.germ_from_partial(source, &target, top, f)
    }

    /// The representative partial map: domain subobject index and map.
    pub fn representative(&self, g: &Germ) -> Result<(Elem, Mor), SpecError> {
        let q = self.generator_mono(&g.target)?;
        Ok((g.source.generator, self.c.compose(&q, &g.core)?))
    }

    pub fn germ_equal(&self, a: &Germ, b: &Germ) -> Result<bool, SpecError> {
        if a.source != b.source || a.target != b.target {
            return Err(SpecError::ObjectMismatch);
        }
        Ok(a.core == b.core)
    }

    /// `second . first`.
    pub fn compose(&self, second: &Germ, first: &Germ) -> Result<Germ, SpecError> {
        if first.target != second.source {
            return Err(SpecError::ObjectMismatch);
        }
        Ok(Germ {
            source: first.source.clone(),
            target: second.target.clone(),
            core: self.c.compose(&second.core, &first.core)?,
        })
    }

    pub fn hom_germs(&self, a: &SpecObject, b: &SpecObject) -> Result<Vec<Germ>, SpecError> {
        Ok(self
            .c
            .hom(a.core, b.core)?
            .into_iter()
            .map(|core| Germ {
                source: a.clone(),
                target: b.clone(),
                core,
            })
            .collect())
    }

    /// `f_! p` for the germ's representative; continuity says the target
    /// filter is contained in it.
    pub fn germ_pushforward(&self, g: &Germ) -> Result<Filter, SpecError> {
        let (_, h) = self.representative(g)?;
        self.image_filter(&h)
    }

    /// `f_! p = q` exactly.
    pub fn is_strict(&self, g: &Germ) -> Result<bool, SpecError> {
        Ok(self.germ_pushforward(g)? == g.target.filter)
    }

    /// Type-space map `S(x) -> S(y)` of a total morphism, as indices into
    /// `filters(x)` and `filters(y)`.
    pub fn type_space(&self, f: &Mor) -> Result<Vec<usize>, SpecError> {
        let sx = self.filters(f.dom)?;
        let sy = self.filters(f.cod)?;
        sx.iter()
            .map(|p| {
                let q = self.pushforward(f, p)?;
                Ok(sy.iter().position(|r| *r == q).expect("pushforward stays in the type space"))
            })
            .collect()
    }

    /// The type-space functor restricted to a scope, with filter lists.
    pub fn type_space_functor(&self, scope: &Scope) -> Result<(SetFunctor, Vec<Vec<Filter>>), SpecError> {
        let filters: Vec<Vec<Filter>> = scope.objects.iter().map(|&x| self.filters(x)).collect::<Result<_, _>>()?;
        let values = filters.iter().map(Vec::len).collect();
        let actions = scope.mors.iter().map(|m| self.type_space(m)).collect::<Result<_, _>>()?;
        Ok((SetFunctor { values, actions }, filters))
    }

    /// `tp_x(a) = {u : a in image of F(u -> x)}` on the variant's lattice.
    pub fn tp(&self, scope: &Scope, f: &SetFunctor, x: Obj, a: usize) -> Result<Filter, SpecError> {
        let t = self.type_lattice(x)?;
        let mut members = Vec::new();
        for (local, &u) in t.embed.iter().enumerate() {
            let mono = &t.sub.subs[u].mono;
            let m = scope
                .mor_id(mono)
                .ok_or_else(|| SpecError::OutOfScope(self.c.object_name(mono.dom)))?;
            if f.actions[m].contains(&a) {
                members.push(local);
            }
        }
        let kind = self.variant.as_str();
        let bad = || SpecError::BadType {
            object: self.c.object_name(x),
            element: a,
            kind,
        };
        let filter = Filter::from_members(&t.lattice, members).ok_or_else(bad)?;
        let expected = self.filters(x)?;
        if expected.contains(&filter) {
            Ok(filter)
        } else {
            Err(bad())
        }
    }

    /// `tp : F => S` as a natural transformation on the scope.
    pub fn tp_transformation(&self, scope: &Scope, f: &SetFunctor) -> Result<NatTrans, SpecError> {
        let mut components = Vec::new();
        for (i, &x) in scope.objects.iter().enumerate() {
            let sx = self.filters(x)?;
            let comp = (0..f.values[i])
                .map(|a| {
                    let p = self.tp(scope, f, x, a)?;
                    Ok(sx.iter().position(|q| *q == p).expect("tp lands in S(x)"))
                })
                .collect::<Result<Vec<_>, SpecError>>()?;
            components.push(comp);
        }
        Ok(NatTrans { components })
    }

    /// Scope morphisms at which cartesianness is required: complemented
    /// monos for the ultra variant, all monos for the prime variant.
    pub fn cartesian_monos(&self, scope: &Scope) -> Result<Vec<MorId>, SpecError> {
        let mut out = Vec::new();
        for (id, m) in scope.mors.iter().enumerate() {
            if !self.c.is_mono(m) {
                continue;
            }
            if self.variant == Variant::Ultra {
                let sub = self.c.sub_lattice(m.cod)?;
                let u = self.c.subobject_index(m)?;
                if sub.lattice.complement(u).is_none() {
                    continue;
                }
            }
            out.push(id);
        }
        Ok(out)
    }

    /// Whether the naturality squares of `alpha` at the variant's monos are
    /// pullbacks of finite sets.
    pub fn cartesian_check(
        &self,
        scope: &Scope,
        from: &SetFunctor,
        to: &SetFunctor,
        alpha: &NatTrans,
    ) -> Result<Verdict, SpecError> {
        for m in self.cartesian_monos(scope)? {
            if let Some(w) = pullback_square_failure(&scope.cat, from, to, alpha, m) {
                return Ok(Verdict::no(format!("square at {}: {w}", scope.cat.morphism_name(m))));
            }
        }
        Ok(Verdict::yes())
    }
}

/// Checks that `F(u) -> F(x) x_{G(x)} G(u)` is a bijection for `m : u -> x`.
pub fn pullback_square_failure(
    cat: &FiniteCategory,
    from: &SetFunctor,
    to: &SetFunctor,
    alpha: &NatTrans,
    m: MorId,
) -> Option<String> {
    let (u, x) = (cat.dom(m), cat.cod(m));
    let mut hits = HashMap::new();
    for e in 0..from.values[u] {
        let key = (from.actions[m][e], alpha.components[u][e]);
        if let Some(prev) = hits.insert(key, e) {
            return Some(format!("elements {prev} and {e} have the same image"));
        }
    }
    for a in 0..from.values[x] {
        for b in 0..to.values[u] {
            if to.actions[m][b] == alpha.components[x][a] && !hits.contains_key(&(a, b)) {
                return Some(format!("pair ({a},{b}) is not hit"));
            }
        }
    }
    None
}

/// The spectrum of a scope as an explicit finite category of germs.
#[derive(Debug, Clone)]
pub struct SpecSite {
    pub c: PresentedCategory,
    pub variant: Variant,
    pub scope: Vec<Obj>,
    pub objects: Vec<SpecObject>,
    pub object_names: Vec<String>,
    /// `germs[m]` is the germ behind morphism `m` of `cat`.
    pub germs: Vec<Germ>,
    pub cat: FiniteCategory,
}

impl SpecSite {
    pub fn build(c: &PresentedCategory, variant: Variant, scope: &[Obj]) -> Result<SpecSite, SpecError> {
        let spec = Spectrum::new(c, variant);
        let objects = spec.objects(scope)?;
        let object_names: Vec<String> = objects.iter().map(|o| spec.object_name(o)).collect();
        let mut germs = Vec::new();
        let mut infos = Vec::new();
        let mut identities = vec![0; objects.len()];
        let mut index: HashMap<(ObjId, ObjId, Mor), MorId> = HashMap::new();
        for (i, a) in objects.iter().enumerate() {
            for (j, b) in objects.iter().enumerate() {
                for g in spec.hom_germs(a, b)? {
                    let id = germs.len();
                    let is_id = i == j && g.core == c.identity(a.core);
                    if is_id {
                        identities[i] = id;
                    }
                    infos.push(MorphismInfo {
                        name: if is_id {
                            format!("id_{}", object_names[i])
                        } else {
                            format!("g{id}")
                        },
                        dom: i,
                        cod: j,
                    });
                    index.insert((i, j, g.core.clone()), id);
                    germs.push(g);
                }
            }
        }
        let name = format!("Spec{}({})", if variant == Variant::Ultra { "~" } else { "" }, c.name());
        let cat = FiniteCategory::from_fn(name, object_names.clone(), infos.clone(), identities, |g, f| {
            let core = c.compose(&germs[g].core, &germs[f].core).expect("cores compose");
            index[&(infos[f].dom, infos[g].cod, core)]
        })
        .map_err(CatError::from)?;
        Ok(SpecSite {
            c: c.clone(),
            variant,
            scope: scope.to_vec(),
            objects,
            object_names,
            germs,
            cat,
        })
    }

    pub fn spectrum(&self) -> Spectrum<'_> {
        Spectrum::new(&self.c, self.variant)
    }

    pub fn object_index(&self, o: &SpecObject) -> Option<ObjId> {
        self.objects.iter().position(|p| p == o)
    }

    /// The site morphism for a germ with endpoints in the site.
    pub fn germ_id(&self, g: &Germ) -> Option<MorId> {
        let a = self.object_index(&g.source)?;
        let b = self.object_index(&g.target)?;
        self.cat.hom(a, b).iter().copied().find(|&m| self.germs[m].core == g.core)
    }

    /// Renders the site in the text format read by the coverage and sheaf
    /// tools.
    pub fn to_text(&self) -> String {
        let mut out = format!("site {} variant={}\n", self.cat.name(), self.variant);
        out.push_str("begin category\n");
        out.push_str(&self.c.to_text());
        out.push_str("end category\n");
        let scope: Vec<String> = self.scope.iter().map(|&x| self.c.object_name(x)).collect();
        out.push_str(&format!("scope {}\n", scope.join(" ")));
        let spec = self.spectrum();
        for (i, o) in self.objects.iter().enumerate() {
            out.push_str(&format!(
                "object {} {} {}\n",
                self.object_names[i],
                self.c.object_name(o.x),
                o.filter.render(&spec.type_lattice(o.x).expect("built").lattice)
            ));
        }
        for m in self.cat.morphisms() {
            let g = &self.germs[m];
            let (_, rep) = spec.representative(g).expect("built");
            out.push_str(&format!(
                "germ {} {} -> {} rep={}\n",
                self.cat.morphism_name(m),
                self.cat.object_name(self.cat.dom(m)),
                self.cat.object_name(self.cat.cod(m)),
                self.c.morphism_name(&rep)
            ));
        }
        for g in self.cat.morphisms() {
            for f in self.cat.morphisms() {
                if self.cat.is_identity(g) || self.cat.is_identity(f) {
                    continue;
                }
                if let Some(h) = self.cat.try_compose(g, f) {
                    out.push_str(&format!(
                        "compose {} {} = {}\n",
                        self.cat.morphism_name(g),
                        self.cat.morphism_name(f),
                        self.cat.morphism_name(h)
                    ));
                }
            }
        }
        out
    }
}

/// Skeleton of a thin site as `(classes, leq)` where `leq[a][b]` records
/// an arrow from class `a` to class `b`.
pub fn skeleton(cat: &FiniteCategory) -> (Vec<Vec<ObjId>>, Vec<Vec<bool>>) {
    let classes = cat.iso_classes();
    let leq = classes
        .iter()
        .map(|a| classes.iter().map(|b| !cat.hom(a[0], b[0]).is_empty()).collect())
        .collect();
    (classes, leq)
}

/// Compares the skeleton of `Spec(L)` with the prime filters of `L` under
/// reverse inclusion, by searching for an order isomorphism.
pub fn lattice_duality(l: &FinLattice) -> Result<Verdict, SpecError> {
    let c = PresentedCategory::lattice(l.clone());
    let site = SpecSite::build(&c, Variant::Prime, &c.objects())?;
    if !site.cat.is_thin() {
        return Ok(Verdict::no("Spec(L) is not thin"));
    }
    let (classes, leq) = skeleton(&site.cat);
    let primes = lattice::prime_filters(l)?;
    if primes.len() != classes.len() {
        return Ok(Verdict::no(format!(
            "{} iso classes but {} prime filters",
            classes.len(),
            primes.len()
        )));
    }
    let n = primes.len();
    let rev_incl = |a: usize, b: usize| primes[b].is_subset_of(&primes[a]);
    let found = permutations(n).into_iter().any(|perm| {
        (0..n).all(|a| (0..n).all(|b| leq[a][b] == rev_incl(perm[a], perm[b])))
    });
    Ok(if found {
        Verdict::yes()
    } else {
        Verdict::no("no order isomorphism")
    })
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::FinLattice;

    fn chain3() -> PresentedCategory {
        PresentedCategory::lattice(FinLattice::from_order("c3", vec!["b".into(), "m".into(), "t".into()], |a, b| a <= b).unwrap())
    }

    fn names(c: &PresentedCategory, v: Variant, scope: &[Obj]) -> Vec<String> {
        let s = Spectrum::new(c, v);
        s.objects(scope).unwrap().iter().map(|o| s.object_name(o)).collect()
    }

    #[test]
    fn objects_of_small_spectra() {
        let c = chain3();
        assert_eq!(names(&c, Variant::Prime, &c.objects()), vec!["(m,@m)", "(t,@t)", "(t,@m)"]);
        assert_eq!(names(&c, Variant::Ultra, &c.objects()), vec!["(m,@m)", "(t,@t)"]);
        let s = PresentedCategory::finsets(4);
        assert_eq!(names(&s, Variant::Ultra, &[1, 2]), vec!["(1,@0)", "(2,@0)", "(2,@1)"]);
    }

    #[test]
    fn finsets_germs() {
        let c = PresentedCategory::finsets(4);
        let s = Spectrum::new(&c, Variant::Ultra);
        let objs = s.objects(&[1, 2]).unwrap();
        let (one, two0, two1) = (&objs[0], &objs[1], &objs[2]);
        assert_eq!(s.hom_germs(two0, two1).unwrap().len(), 1);
        assert_eq!(s.hom_germs(one, two0).unwrap().len(), 1);

        let swap = Mor::func(2, 2, vec![1, 0]);
        let whole = s.germ_from_partial(two0, two1, 3, &swap).unwrap();
        let partial = s.germ_from_partial(two0, two1, 1, &Mor::func(1, 2, vec![1])).unwrap();
        assert!(s.germ_equal(&whole, &partial).unwrap());

        let id = s.germ_from_partial(two0, two0, 3, &c.identity(2)).unwrap();
        let c0 = s.germ_from_partial(two0, two0, 3, &Mor::func(2, 2, vec![0, 0])).unwrap();
        assert!(s.germ_equal(&id, &c0).unwrap());
        let c1 = s.germ_from_partial(two0, two0, 3, &Mor::func(2, 2, vec![1, 1]));
        assert!(matches!(c1, Err(SpecError::NotContinuous(_))));

        let to_one = s.germ_from_partial(two1, one, 3, &Mor::func(2, 1, vec![0, 0])).unwrap();
        let comp = s.compose(&to_one, &whole).unwrap();
        assert_eq!(s.hom_germs(two0, one).unwrap(), vec![comp]);
    }

    #[test]
    fn type_space_maps() {
        let c = PresentedCategory::finsets(4);
        let s = Spectrum::new(&c, Variant::Ultra);
        assert_eq!(s.type_space(&Mor::func(2, 2, vec![1, 0])).unwrap(), vec![1, 0]);
        assert_eq!(s.type_space(&Mor::func(2, 1, vec![0, 0])).unwrap(), vec![0, 0]);
        assert_eq!(s.type_space(&c.identity(3)).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn chain_germs_compose_to_identity() {
        let c = chain3();
        let s = Spectrum::new(&c, Variant::Prime);
        let objs = s.objects(&c.objects()).unwrap();
        let (m, tm) = (&objs[0], &objs[2]);
        let there = s.hom_germs(tm, m).unwrap().remove(0);
        let back = s.hom_germs(m, tm).unwrap().remove(0);
        let round = s.compose(&back, &there).unwrap();
        assert!(s.germ_equal(&round, &s.identity(tm)).unwrap());
    }

    #[test]
    fn duality_on_small_lattices() {
        assert!(lattice_duality(&FinLattice::chain(3)).unwrap().holds);
        assert!(lattice_duality(&FinLattice::powerset(2)).unwrap().holds);
        assert!(lattice_duality(&FinLattice::chain(5)).unwrap().holds);
    }

    #[test]
    fn points_functor_types() {
        let c = PresentedCategory::lattice(FinLattice::powerset(2));
        let scope = c.scope(&c.objects()).unwrap();
        // F(top) = {s, t}, F(a) = {s}, F(b) = {t}, F(bottom) = {} as inclusions.
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
        for v in [Variant::Prime, Variant::Ultra] {
            let s = Spectrum::new(&c, v);
            let t = s.type_lattice(3).unwrap();
            let p = s.tp(&scope, &f, 3, 0).unwrap();
            let members: Vec<Elem> = p.members().iter().map(|&l| t.embed[l]).collect();
            assert_eq!(members, vec![1, 3]);
            let tp = s.tp_transformation(&scope, &f).unwrap();
            let (sf, _) = s.type_space_functor(&scope).unwrap();
            assert!(tp.is_natural(&scope.cat, &f, &sf));
            assert!(s.cartesian_check(&scope, &f, &sf, &tp).unwrap().holds);
        }
    }

    #[test]
    fn site_text_mentions_every_germ() {
        let c = chain3();
        let site = SpecSite::build(&c, Variant::Prime, &c.objects()).unwrap();
        let text = site.to_text();
        assert_eq!(text.lines().filter(|l| l.starts_with("germ ")).count(), site.cat.num_morphisms());
        assert!(text.contains("object (t,@m) t {m,t}"));
    }
}
