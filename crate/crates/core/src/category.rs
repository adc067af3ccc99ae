//! Presented coherent categories behind one interface.
//!
//! Three backends share the same operations:
//!
//! * `Lattice`: a finite lattice viewed as a thin category. Finite coherent
//!   categories are necessarily preorders, so this is the fully finite case.
//! * `FinSets`: the sets `{0, ..., n-1}` for `n <= max_card` and all functions
//!   between them. Requests that would need a larger set return
//!   [`CatError::Bound`] instead of a wrong answer.
//! * `Table`: an explicit finite category, possibly not coherent; the
//!   operations search for universal objects by brute force.
//!
//! Subobjects are handled through [`SubLattice`]: each element of the
//! subobject lattice of `x` carries a canonical mono, and operations such as
//! preimage and image return lattice indices.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::finite::{CategoryBuilder, CategoryError, Cone, Diagram, FiniteCategory, MorId, MorphismInfo, ObjId};
use crate::report::Verdict;
use crate::lattice::{self, Elem, FinLattice, LatticeError, LatticeSpec, Tags};
use crate::text::{self, ParseError};

/// An object id: a lattice element, a cardinality, or a table object.
pub type Obj = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatError {
    #[error("object of size {needed} exceeds max_card={max_card}")]
    Bound { needed: usize, max_card: usize },
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("{0} does not exist")]
    Missing(String),
    #[error("not coherent: {0}")]
    NotCoherent(String),
    #[error("morphisms {0} and {1} are not composable")]
    NotComposable(String, String),
    #[error(transparent)]
    Category(#[from] CategoryError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

impl CatError {
    pub fn is_bound(&self) -> bool {
        matches!(self, CatError::Bound { .. })
    }
}

/// How a morphism is represented in its backend.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arrow {
    /// The unique arrow `dom <= cod` of a lattice.
    Order,
    /// A function table `i -> f[i]`.
    Func(Vec<usize>),
    /// A morphism of a table category.
    Named(MorId),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mor {
    pub dom: Obj,
    pub cod: Obj,
    pub arrow: Arrow,
}

impl Mor {
    pub fn func(dom: Obj, cod: Obj, table: Vec<usize>) -> Self {
        Mor {
            dom,
            cod,
            arrow: Arrow::Func(table),
        }
    }

    pub fn table(&self) -> Option<&[usize]> {
        match &self.arrow {
            Arrow::Func(t) => Some(t),
            _ => None,
        }
    }
}

/// A subobject of `ambient` with its canonical mono `domain -> ambient`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subobject {
    pub ambient: Obj,
    pub domain: Obj,
    pub mono: Mor,
}

/// The subobjects of one object, as a lattice plus a dictionary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubLattice {
    pub ambient: Obj,
    pub lattice: FinLattice,
    /// `subs[i]` is the subobject standing for lattice element `i`.
    pub subs: Vec<Subobject>,
}

impl SubLattice {
    pub fn top(&self) -> Elem {
        self.lattice.top()
    }

    pub fn bottom(&self) -> Elem {
        self.lattice.bottom()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Backend {
    Lattice(FinLattice),
    FinSets { max_card: usize },
    Table(FiniteCategory),
}

/// A diagram in a presented category.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CDiagram {
    pub vertices: Vec<Obj>,
    pub edges: Vec<(usize, usize, Mor)>,
}

/// A limit cone: apex and one projection per diagram vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitCone {
    pub apex: Obj,
    pub legs: Vec<Mor>,
}

pub struct PresentedCategory {
    name: String,
    backend: Backend,
    subs: Mutex<BTreeMap<Obj, Arc<SubLattice>>>,
}

impl Clone for PresentedCategory {
    fn clone(&self) -> Self {
        PresentedCategory::new(self.name.clone(), self.backend.clone())
    }
}

impl fmt::Debug for PresentedCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PresentedCategory")
            .field("name", &self.name)
            .field("backend", &self.backend)
            .finish()
    }
}

impl PartialEq for PresentedCategory {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.backend == other.backend
    }
}

/// Every function `{0..n} -> {0..m}` in lexicographic order of tables.
pub fn all_functions(n: usize, m: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    let mut t = vec![0; n];
    loop {
        out.push(t.clone());
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < m {
                break;
            }
            t[i] = 0;
        }
    }
}

fn mask_elems(mask: usize) -> Vec<usize> {
    (0..usize::BITS as usize).filter(|i| mask >> i & 1 == 1).collect()
}

impl PresentedCategory {
    pub fn new(name: impl Into<String>, backend: Backend) -> Self {
        PresentedCategory {
            name: name.into(),
            backend,
            subs: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn lattice(l: FinLattice) -> Self {
        PresentedCategory::new(l.name().to_string(), Backend::Lattice(l))
    }

    pub fn finsets(max_card: usize) -> Self {
        PresentedCategory::new(format!("finsets{max_card}"), Backend::FinSets { max_card })
    }

    pub fn table(cat: FiniteCategory) -> Self {
        PresentedCategory::new(cat.name().to_string(), Backend::Table(cat))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn backend_name(&self) -> &'static str {
        match self.backend {
            Backend::Lattice(_) => "lattice",
            Backend::FinSets { .. } => "finsets",
            Backend::Table(_) => "table",
        }
    }

    pub fn max_card(&self) -> Option<usize> {
        match self.backend {
            Backend::FinSets { max_card } => Some(max_card),
            _ => None,
        }
    }

    pub fn objects(&self) -> Vec<Obj> {
        match &self.backend {
            Backend::Lattice(l) => l.elems().collect(),
            Backend::FinSets { max_card } => (0..=*max_card).collect(),
            Backend::Table(c) => c.objects().collect(),
        }
    }

    pub fn object_name(&self, x: Obj) -> String {
        match &self.backend {
            Backend::Lattice(l) => l.elem_name(x).to_string(),
            Backend::FinSets { .. } => x.to_string(),
            Backend::Table(c) => c.object_name(x).to_string(),
        }
    }

    pub fn object_id(&self, name: &str) -> Result<Obj, CatError> {
        let x = match &self.backend {
            Backend::Lattice(l) => l.index_of(name).ok(),
            Backend::FinSets { max_card } => name.parse::<usize>().ok().filter(|n| n <= max_card),
            Backend::Table(c) => c.object_id(name).ok(),
        };
        x.ok_or_else(|| CatError::UnknownObject(name.to_string()))
    }

    fn check_obj(&self, x: Obj) -> Result<(), CatError> {
        let ok = match &self.backend {
            Backend::Lattice(l) => x < l.len(),
            Backend::FinSets { max_card } => {
                if x > *max_card {
                    return Err(CatError::Bound {
                        needed: x,
                        max_card: *max_card,
                    });
                }
                true
            }
            Backend::Table(c) => x < c.num_objects(),
        };
        if ok {
            Ok(())
        } else {
            Err(CatError::UnknownObject(x.to_string()))
        }
    }

    pub fn morphism_name(&self, f: &Mor) -> String {
        match &f.arrow {
            Arrow::Order => format!("{}<={}", self.object_name(f.dom), self.object_name(f.cod)),
            Arrow::Func(t) => text::format_list(t),
            Arrow::Named(m) => match &self.backend {
                Backend::Table(c) => c.morphism_name(*m).to_string(),
                _ => m.to_string(),
            },
        }
    }

    /// All morphisms `x -> y`, canonically ordered.
    pub fn hom(&self, x: Obj, y: Obj) -> Result<Vec<Mor>, CatError> {
        self.check_obj(x)?;
        self.check_obj(y)?;
        Ok(match &self.backend {
            Backend::Lattice(l) => {
                if l.leq(x, y) {
                    vec![Mor {
                        dom: x,
                        cod: y,
                        arrow: Arrow::Order,
                    }]
                } else {
                    vec![]
                }
            }
            Backend::FinSets { .. } => all_functions(x, y).into_iter().map(|t| Mor::func(x, y, t)).collect(),
            Backend::Table(c) => c
                .hom(x, y)
                .iter()
                .map(|&m| Mor {
                    dom: x,
                    cod: y,
                    arrow: Arrow::Named(m),
                })
                .collect(),
        })
    }

    pub fn identity(&self, x: Obj) -> Mor {
        match &self.backend {
            Backend::Lattice(_) => Mor {
                dom: x,
                cod: x,
                arrow: Arrow::Order,
            },
            Backend::FinSets { .. } => Mor::func(x, x, (0..x).collect()),
            Backend::Table(c) => Mor {
                dom: x,
                cod: x,
                arrow: Arrow::Named(c.id(x)),
            },
        }
    }

    /// `g . f`.
    pub fn compose(&self, g: &Mor, f: &Mor) -> Result<Mor, CatError> {
        if f.cod != g.dom {
            return Err(CatError::NotComposable(self.morphism_name(g), self.morphism_name(f)));
        }
        let arrow = match (&g.arrow, &f.arrow) {
            (Arrow::Order, Arrow::Order) => Arrow::Order,
            (Arrow::Func(gt), Arrow::Func(ft)) => Arrow::Func(ft.iter().map(|&i| gt[i]).collect()),
            (Arrow::Named(gm), Arrow::Named(fm)) => match &self.backend {
                Backend::Table(c) => Arrow::Named(c.compose(*gm, *fm)),
                _ => unreachable!("named arrows only occur in table backends"),
            },
            _ => return Err(CatError::NotComposable(self.morphism_name(g), self.morphism_name(f))),
        };
        Ok(Mor {
            dom: f.dom,
            cod: g.cod,
            arrow,
        })
    }

    pub fn is_mono(&self, f: &Mor) -> bool {
        match (&self.backend, &f.arrow) {
            (Backend::Lattice(_), _) => true,
            (_, Arrow::Func(t)) => {
                let mut seen = vec![false; f.cod];
                t.iter().all(|&i| !std::mem::replace(&mut seen[i], true))
            }
            (Backend::Table(c), Arrow::Named(m)) => c.is_mono(*m),
            _ => false,
        }
    }

    pub fn is_iso(&self, f: &Mor) -> bool {
        match (&self.backend, &f.arrow) {
            (Backend::Lattice(_), _) => f.dom == f.cod,
            (_, Arrow::Func(_)) => f.dom == f.cod && self.is_mono(f),
            (Backend::Table(c), Arrow::Named(m)) => c.is_iso(*m),
            _ => false,
        }
    }

    /// The lattice of subobjects of `x`, with canonical monos.
    pub fn sub_lattice(&self, x: Obj) -> Result<Arc<SubLattice>, CatError> {
        self.check_obj(x)?;
        if let Some(s) = self.subs.lock().expect("cache lock").get(&x) {
            return Ok(s.clone());
        }
        let built = Arc::new(self.build_sub_lattice(x)?);
        self.subs.lock().expect("cache lock").insert(x, built.clone());
        Ok(built)
    }

    fn build_sub_lattice(&self, x: Obj) -> Result<SubLattice, CatError> {
        match &self.backend {
            Backend::Lattice(l) => {
                let view = l.down_interval(x);
                let subs = view
                    .embed
                    .iter()
                    .map(|&u| Subobject {
                        ambient: x,
                        domain: u,
                        mono: Mor {
                            dom: u,
                            cod: x,
                            arrow: Arrow::Order,
                        },
                    })
                    .collect();
                Ok(SubLattice {
                    ambient: x,
                    lattice: view.lattice,
                    subs,
                })
            }
            Backend::FinSets { .. } => {
                let mut lat = FinLattice::powerset(x);
                let names: Vec<String> = lat.names().to_vec();
                lat = FinLattice::from_order(format!("Sub({x})"), names, |a, b| a & !b == 0)?;
                let subs = (0..1usize << x)
                    .map(|mask| {
                        let elems = mask_elems(mask);
                        Subobject {
                            ambient: x,
                            domain: elems.len(),
                            mono: Mor::func(elems.len(), x, elems),
                        }
                    })
                    .collect();
                Ok(SubLattice {
                    ambient: x,
                    lattice: lat,
                    subs,
                })
            }
            Backend::Table(c) => table_sub_lattice(c, x),
        }
    }

    /// The lattice index of the subobject represented by the mono `m`.
    pub fn subobject_index(&self, m: &Mor) -> Result<Elem, CatError> {
        let sl = self.sub_lattice(m.cod)?;
        match (&self.backend, &m.arrow) {
            (Backend::Lattice(_), _) => Ok(sl.subs.iter().position(|s| s.domain == m.dom).expect("interval")),
            (Backend::FinSets { .. }, Arrow::Func(t)) => {
                if !self.is_mono(m) {
                    return Err(CatError::Missing(format!("subobject for non-mono {}", self.morphism_name(m))));
                }
                Ok(t.iter().fold(0, |acc, &i| acc | 1 << i))
            }
            (Backend::Table(c), Arrow::Named(f)) => sl
                .subs
                .iter()
                .position(|s| match s.mono.arrow {
                    Arrow::Named(g) => table_factors(c, *f, g) && table_factors(c, g, *f),
                    _ => false,
                })
                .ok_or_else(|| CatError::Missing(format!("subobject for {}", c.morphism_name(*f)))),
            _ => Err(CatError::Missing("subobject".into())),
        }
    }

    /// The unique `h` with `mono . h = f`, when `f` factors through `mono`.
    pub fn factor(&self, f: &Mor, mono: &Mor) -> Option<Mor> {
        if f.cod != mono.cod {
            return None;
        }
        match (&f.arrow, &mono.arrow) {
            (Arrow::Order, Arrow::Order) => {
                let Backend::Lattice(l) = &self.backend else { return None };
                l.leq(f.dom, mono.dom).then(|| Mor {
                    dom: f.dom,
                    cod: mono.dom,
                    arrow: Arrow::Order,
                })
            }
            (Arrow::Func(ft), Arrow::Func(mt)) => {
                let table: Option<Vec<usize>> = ft.iter().map(|v| mt.iter().position(|w| w == v)).collect();
                table.map(|t| Mor::func(f.dom, mono.dom, t))
            }
            (Arrow::Named(fm), Arrow::Named(mm)) => {
                let Backend::Table(c) = &self.backend else { return None };
                c.hom(f.dom, mono.dom)
                    .iter()
                    .copied()
                    .find(|&h| c.compose(*mm, h) == *fm)
                    .map(|h| Mor {
                        dom: f.dom,
                        cod: mono.dom,
                        arrow: Arrow::Named(h),
                    })
            }
            _ => None,
        }
    }

    /// `f^{-1}(v)` for `v` a subobject index of `cod f`; returns an index of
    /// `Sub(dom f)`.
    pub fn preimage(&self, f: &Mor, v: Elem) -> Result<Elem, CatError> {
        let target = self.sub_lattice(f.cod)?;
        let source = self.sub_lattice(f.dom)?;
        match (&self.backend, &f.arrow) {
            (Backend::Lattice(l), _) => {
                let v_elem = target.subs[v].domain;
                let m = l.meet(f.dom, v_elem);
                Ok(source.subs.iter().position(|s| s.domain == m).expect("interval"))
            }
            (Backend::FinSets { .. }, Arrow::Func(t)) => {
                Ok(t.iter().enumerate().filter(|&(_, &j)| v >> j & 1 == 1).fold(0, |acc, (i, _)| acc | 1 << i))
            }
            (Backend::Table(c), Arrow::Named(fm)) => {
                let Arrow::Named(vm) = target.subs[v].mono.arrow else { unreachable!() };
                let d = Diagram {
                    vertices: vec![f.dom, target.subs[v].domain, f.cod],
                    edges: vec![(0, 2, *fm), (1, 2, vm)],
                };
                let cone = c.limit(&d).ok_or_else(|| {
                    CatError::Missing(format!("pullback of {} along {}", c.morphism_name(vm), c.morphism_name(*fm)))
                })?;
                self.subobject_index(&Mor {
                    dom: cone.apex,
                    cod: f.dom,
                    arrow: Arrow::Named(cone.legs[0]),
                })
            }
            _ => Err(CatError::Missing("preimage".into())),
        }
    }

    /// The preimage map `Sub(cod f) -> Sub(dom f)` as a table.
    pub fn preimage_map(&self, f: &Mor) -> Result<Vec<Elem>, CatError> {
        let target = self.sub_lattice(f.cod)?;
        target.lattice.elems().map(|v| self.preimage(f, v)).collect()
    }

    /// The least subobject of `cod f` through which `f` factors.
    pub fn image(&self, f: &Mor) -> Result<Elem, CatError> {
        let target = self.sub_lattice(f.cod)?;
        match (&self.backend, &f.arrow) {
            (Backend::Lattice(_), _) => Ok(target.subs.iter().position(|s| s.domain == f.dom).expect("interval")),
            (Backend::FinSets { .. }, Arrow::Func(t)) => Ok(t.iter().fold(0, |acc, &j| acc | 1 << j)),
            (Backend::Table(_), _) => {
                let through: Vec<Elem> = target
                    .lattice
                    .elems()
                    .filter(|&s| self.factor(f, &target.subs[s].mono).is_some())
                    .collect();
                through
                    .iter()
                    .copied()
                    .find(|&s| through.iter().all(|&t| target.lattice.leq(s, t)))
                    .ok_or_else(|| CatError::Missing(format!("image of {}", self.morphism_name(f))))
            }
            _ => Err(CatError::Missing("image".into())),
        }
    }

    /// `f = m . e` with `m` the canonical mono of the image and `e` an
    /// effective epi.
    pub fn image_factorization(&self, f: &Mor) -> Result<(Mor, Mor), CatError> {
        let target = self.sub_lattice(f.cod)?;
        let m = target.subs[self.image(f)?].mono.clone();
        let e = self.factor(f, &m).expect("f factors through its image");
        if !self.is_effective_epi(&e)? {
            return Err(CatError::NotCoherent(format!(
                "image cover of {} is not an effective epi",
                self.morphism_name(f)
            )));
        }
        Ok((e, m))
    }

    /// The existential image of the subobject `u` of `dom f` along `f`.
    pub fn exists(&self, f: &Mor, u: Elem) -> Result<Elem, CatError> {
        let source = self.sub_lattice(f.dom)?;
        let restricted = self.compose(f, &source.subs[u].mono)?;
        self.image(&restricted)
    }

    pub fn union(&self, x: Obj, u: Elem, v: Elem) -> Result<Elem, CatError> {
        Ok(self.sub_lattice(x)?.lattice.join(u, v))
    }

    /// Whether `f` is the coequalizer of its kernel pair.
    pub fn is_effective_epi(&self, f: &Mor) -> Result<bool, CatError> {
        Ok(match (&self.backend, &f.arrow) {
            (Backend::Lattice(_), _) => f.dom == f.cod,
            (Backend::FinSets { .. }, Arrow::Func(t)) => (0..f.cod).all(|j| t.contains(&j)),
            (Backend::Table(c), Arrow::Named(fm)) => {
                let d = Diagram {
                    vertices: vec![f.dom, f.dom, f.cod],
                    edges: vec![(0, 2, *fm), (1, 2, *fm)],
                };
                let Some(kp) = c.limit(&d) else {
                    return Err(CatError::Missing(format!("kernel pair of {}", c.morphism_name(*fm))));
                };
                let (k1, k2) = (kp.legs[0], kp.legs[1]);
                c.objects().all(|z| {
                    c.hom(f.dom, z).iter().all(|&g| {
                        if c.compose(g, k1) != c.compose(g, k2) {
                            return true;
                        }
                        c.hom(f.cod, z).iter().filter(|&&u| c.compose(u, *fm) == g).count() == 1
                    })
                })
            }
            _ => false,
        })
    }

    /// The limit of a finite diagram with projections.
    pub fn limit(&self, d: &CDiagram) -> Result<LimitCone, CatError> {
        for &v in &d.vertices {
            self.check_obj(v)?;
        }
        match &self.backend {
            Backend::Lattice(l) => {
                let apex = l.meet_all(d.vertices.iter().copied());
                let legs = d
                    .vertices
                    .iter()
                    .map(|&v| Mor {
                        dom: apex,
                        cod: v,
                        arrow: Arrow::Order,
                    })
                    .collect();
                Ok(LimitCone { apex, legs })
            }
            Backend::FinSets { max_card } => {
                let tuples = compatible_tuples(d);
                if tuples.len() > *max_card {
                    return Err(CatError::Bound {
                        needed: tuples.len(),
                        max_card: *max_card,
                    });
                }
                let apex = tuples.len();
                let legs = d
                    .vertices
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| Mor::func(apex, v, tuples.iter().map(|t| t[k]).collect()))
                    .collect();
                Ok(LimitCone { apex, legs })
            }
            Backend::Table(c) => {
                let mut edges = Vec::new();
                for (a, b, m) in &d.edges {
                    let Arrow::Named(id) = m.arrow else { unreachable!() };
                    edges.push((*a, *b, id));
                }
                let fd = Diagram {
                    vertices: d.vertices.clone(),
                    edges,
                };
                let cone = c
                    .limit(&fd)
                    .ok_or_else(|| CatError::Missing(format!("limit of a {}-vertex diagram", d.vertices.len())))?;
                Ok(self.lift_cone(&cone, &d.vertices))
            }
        }
    }

    fn lift_cone(&self, cone: &Cone, vertices: &[Obj]) -> LimitCone {
        LimitCone {
            apex: cone.apex,
            legs: cone
                .legs
                .iter()
                .zip(vertices)
                .map(|(&m, &v)| Mor {
                    dom: cone.apex,
                    cod: v,
                    arrow: Arrow::Named(m),
                })
                .collect(),
        }
    }

    /// Checks the universal property of `cone`. Finite sets are detected by
    /// points, so for `FinSets` it suffices that the legs give a bijection
    /// between points of the apex and compatible point tuples.
    pub fn certify_limit(&self, d: &CDiagram, cone: &LimitCone) -> Result<bool, CatError> {
        match &self.backend {
            Backend::Lattice(l) => Ok(cone.apex == l.meet_all(d.vertices.iter().copied())),
            Backend::FinSets { .. } => {
                let mut expected = compatible_tuples(d);
                let mut got: Vec<Vec<usize>> = (0..cone.apex)
                    .map(|i| cone.legs.iter().map(|l| l.table().expect("finsets")[i]).collect())
                    .collect();
                expected.sort();
                got.sort();
                let injective = got.windows(2).all(|w| w[0] != w[1]);
                Ok(injective && got == expected)
            }
            Backend::Table(c) => {
                let fd = Diagram {
                    vertices: d.vertices.clone(),
                    edges: d
                        .edges
                        .iter()
                        .map(|(a, b, m)| {
                            let Arrow::Named(id) = m.arrow else { unreachable!() };
                            (*a, *b, id)
                        })
                        .collect(),
                };
                let legs = cone
                    .legs
                    .iter()
                    .map(|l| match l.arrow {
                        Arrow::Named(m) => m,
                        _ => unreachable!(),
                    })
                    .collect();
                Ok(c.is_limit(&fd, &Cone { apex: cone.apex, legs }))
            }
        }
    }

    pub fn terminal(&self) -> Result<LimitCone, CatError> {
        self.limit(&CDiagram {
            vertices: vec![],
            edges: vec![],
        })
    }

    pub fn product(&self, a: Obj, b: Obj) -> Result<LimitCone, CatError> {
        self.limit(&CDiagram {
            vertices: vec![a, b],
            edges: vec![],
        })
    }

    /// Equalizer of `f, g : x -> y`; the single leg goes to `x`.
    pub fn equalizer(&self, f: &Mor, g: &Mor) -> Result<LimitCone, CatError> {
        let cone = self.limit(&CDiagram {
            vertices: vec![f.dom, f.cod],
            edges: vec![(0, 1, f.clone()), (0, 1, g.clone())],
        })?;
        Ok(LimitCone {
            apex: cone.apex,
            legs: vec![cone.legs[0].clone()],
        })
    }

    /// Pullback of `f : a -> c` and `g : b -> c`, legs to `a` and `b`.
    pub fn pullback(&self, f: &Mor, g: &Mor) -> Result<LimitCone, CatError> {
        let cone = self.limit(&CDiagram {
            vertices: vec![f.dom, g.dom, f.cod],
            edges: vec![(0, 2, f.clone()), (1, 2, g.clone())],
        })?;
        Ok(LimitCone {
            apex: cone.apex,
            legs: cone.legs[..2].to_vec(),
        })
    }

    /// The initial object, if one exists.
    pub fn initial(&self) -> Option<Obj> {
        match &self.backend {
            Backend::Lattice(l) => Some(l.bottom()),
            Backend::FinSets { .. } => Some(0),
            Backend::Table(c) => c.objects().find(|&x| c.objects().all(|y| c.hom(x, y).len() == 1)),
        }
    }

    /// Every subobject lattice is Boolean.
    pub fn is_boolean(&self) -> Result<Verdict, CatError> {
        for x in self.objects() {
            let sl = self.sub_lattice(x)?;
            if let Some(u) = sl.lattice.elems().find(|&u| sl.lattice.complement(u).is_none()) {
                return Ok(Verdict::no(format!(
                    "{} in Sub({}) has no complement",
                    sl.lattice.elem_name(u),
                    self.object_name(x)
                )));
            }
        }
        Ok(Verdict::yes())
    }

    /// Every pair of objects has a coproduct whose injections are disjoint
    /// (their pullback is initial). Pairs whose coproduct exceeds the
    /// cardinality bound are not examined.
    pub fn has_disjoint_coproducts(&self) -> Result<Verdict, CatError> {
        let initial = self.initial();
        for a in self.objects() {
            for b in self.objects() {
                let (apex, ia, ib) = match &self.backend {
                    Backend::Lattice(l) => {
                        let j = l.join(a, b);
                        let up = |x| Mor {
                            dom: x,
                            cod: j,
                            arrow: Arrow::Order,
                        };
                        (j, up(a), up(b))
                    }
                    Backend::FinSets { max_card } => {
                        if a + b > *max_card {
                            continue;
                        }
                        (
                            a + b,
                            Mor::func(a, a + b, (0..a).collect()),
                            Mor::func(b, a + b, (a..a + b).collect()),
                        )
                    }
                    Backend::Table(c) => match table_coproduct(c, a, b) {
                        Some((s, ia, ib)) => (
                            s,
                            Mor {
                                dom: a,
                                cod: s,
                                arrow: Arrow::Named(ia),
                            },
                            Mor {
                                dom: b,
                                cod: s,
                                arrow: Arrow::Named(ib),
                            },
                        ),
                        None => {
                            return Ok(Verdict::no(format!(
                                "no coproduct of {} and {}",
                                self.object_name(a),
                                self.object_name(b)
                            )))
                        }
                    },
                };
                let _ = apex;
                let pb = self.pullback(&ia, &ib)?;
                if Some(pb.apex) != initial {
                    return Ok(Verdict::no(format!(
                        "injections into {} + {} meet in {}",
                        self.object_name(a),
                        self.object_name(b),
                        self.object_name(pb.apex)
                    )));
                }
            }
        }
        Ok(Verdict::yes())
    }

    /// Renders the category in the input format.
    pub fn to_text(&self) -> String {
        match &self.backend {
            Backend::Lattice(l) => format!("category {} backend=lattice\n{}", self.name, l.to_text()),
            Backend::FinSets { max_card } => format!("category {} backend=finsets max_card={max_card}\n", self.name),
            Backend::Table(c) => format!("category {} backend=table\n{}", self.name, c.to_text()),
        }
    }
}

fn compatible_tuples(d: &CDiagram) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(d.vertices.len());
    fn rec(d: &CDiagram, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let k = cur.len();
        if k == d.vertices.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..d.vertices[k] {
            cur.push(v);
            let ok = d.edges.iter().all(|(a, b, m)| {
                (*a).max(*b) >= cur.len() || m.table().expect("finsets")[cur[*a]] == cur[*b]
            });
            if ok {
                rec(d, cur, out);
            }
            cur.pop();
        }
    }
    rec(d, &mut cur, &mut out);
    out
}

fn table_factors(c: &FiniteCategory, f: MorId, through: MorId) -> bool {
    c.cod(f) == c.cod(through) && c.hom(c.dom(f), c.dom(through)).iter().any(|&h| c.compose(through, h) == f)
}

fn table_coproduct(c: &FiniteCategory, a: Obj, b: Obj) -> Option<(Obj, MorId, MorId)> {
    for s in c.objects() {
        for &ia in c.hom(a, s) {
            for &ib in c.hom(b, s) {
                let universal = c.objects().all(|z| {
                    c.hom(a, z).iter().all(|&fa| {
                        c.hom(b, z).iter().all(|&fb| {
                            c.hom(s, z)
                                .iter()
                                .filter(|&&u| c.compose(u, ia) == fa && c.compose(u, ib) == fb)
                                .count()
                                == 1
                        })
                    })
                });
                if universal {
                    return Some((s, ia, ib));
                }
            }
        }
    }
    None
}

fn table_sub_lattice(c: &FiniteCategory, x: Obj) -> Result<SubLattice, CatError> {
    let monos: Vec<MorId> = c.into_obj(x).into_iter().filter(|&m| c.is_mono(m)).collect();
    let mut reps: Vec<MorId> = Vec::new();
    for &m in &monos {
        if !reps.iter().any(|&r| table_factors(c, m, r) && table_factors(c, r, m)) {
            reps.push(m);
        }
    }
    let names: Vec<String> = reps.iter().map(|&m| c.morphism_name(m).to_string()).collect();
    let n = reps.len();
    let leq: Vec<Vec<bool>> = (0..n)
        .map(|a| (0..n).map(|b| table_factors(c, reps[a], reps[b])).collect())
        .collect();
    let spec = LatticeSpec {
        name: format!("Sub({})", c.object_name(x)),
        elems: names,
        leq,
        tags: Tags::default(),
    };
    let report = lattice::validate(&spec);
    if let Some(v) = report.violations.first() {
        let names: Vec<&str> = v.witness().iter().map(|&i| spec.elems[i].as_str()).collect();
        return Err(CatError::NotCoherent(format!(
            "Sub({}) is not closed: {} missing for {}",
            c.object_name(x),
            v.kind(),
            names.join(",")
        )));
    }
    let lat = FinLattice::new(spec)?;
    let subs = reps
        .iter()
        .map(|&m| Subobject {
            ambient: x,
            domain: c.dom(m),
            mono: Mor {
                dom: c.dom(m),
                cod: x,
                arrow: Arrow::Named(m),
            },
        })
        .collect();
    Ok(SubLattice {
        ambient: x,
        lattice: lat,
        subs,
    })
}

/// A full subcategory on finitely many objects, as an explicit table.
#[derive(Debug, Clone)]
pub struct Scope {
    pub objects: Vec<Obj>,
    pub cat: FiniteCategory,
    /// `mors[m]` is the morphism of the presented category behind `m`.
    pub mors: Vec<Mor>,
    index: HashMap<Mor, MorId>,
}

impl Scope {
    /// Position of a presented object in the scope.
    pub fn obj(&self, x: Obj) -> Option<ObjId> {
        self.objects.iter().position(|&o| o == x)
    }

    pub fn mor_id(&self, m: &Mor) -> Option<MorId> {
        self.index.get(m).copied()
    }
}

impl PresentedCategory {
    /// The full subcategory on `objects`, in the given order.
    pub fn scope(&self, objects: &[Obj]) -> Result<Scope, CatError> {
        let mut mors = Vec::new();
        let mut infos = Vec::new();
        let mut identities = vec![0; objects.len()];
        for (i, &a) in objects.iter().enumerate() {
            for (j, &b) in objects.iter().enumerate() {
                for m in self.hom(a, b)? {
                    if i == j && m == self.identity(a) {
                        identities[i] = mors.len();
                    }
                    infos.push(MorphismInfo {
                        name: format!("{}:{}->{}", self.morphism_name(&m), self.object_name(a), self.object_name(b)),
                        dom: i,
                        cod: j,
                    });
                    mors.push(m);
                }
            }
        }
        let index: HashMap<Mor, MorId> = mors.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let names = objects.iter().map(|&o| self.object_name(o)).collect();
        let cat = FiniteCategory::from_fn(format!("{}|scope", self.name), names, infos, identities, |g, f| {
            let h = self.compose(&mors[g], &mors[f]).expect("composable in scope");
            index[&h]
        })?;
        Ok(Scope {
            objects: objects.to_vec(),
            cat,
            mors,
            index,
        })
    }
}

/// One violated coherence requirement with its witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoherenceViolation {
    pub axiom: &'static str,
    pub witness: String,
}

/// Checks the coherent-category axioms the other modules rely on: a
/// terminal object and pullbacks, stable images, and distributive,
/// pullback-stable unions of subobjects.
pub fn validate_coherent(cat: &PresentedCategory) -> Vec<CoherenceViolation> {
    let mut out = Vec::new();
    let mut push = |axiom: &'static str, witness: String| out.push(CoherenceViolation { axiom, witness });
    if let Err(e) = cat.terminal() {
        push("terminal", e.to_string());
    }
    let objects = cat.objects();
    let mut morphisms = Vec::new();
    for &x in &objects {
        for &y in &objects {
            match cat.hom(x, y) {
                Ok(h) => morphisms.extend(h),
                Err(e) if e.is_bound() => {}
                Err(e) => push("hom", e.to_string()),
            }
        }
    }
    let name = |f: &Mor| cat.morphism_name(f);
    for f in &morphisms {
        for g in morphisms.iter().filter(|g| g.cod == f.cod) {
            match cat.pullback(f, g) {
                Ok(_) => {}
                Err(e) if e.is_bound() => {}
                Err(_) => push("pullback", format!("cospan {} , {}", name(f), name(g))),
            }
        }
    }
    for &x in &objects {
        match cat.sub_lattice(x) {
            Ok(sl) => {
                if !sl.lattice.is_distributive() {
                    let report = lattice::validate(&LatticeSpec {
                        name: sl.lattice.name().to_string(),
                        elems: sl.lattice.names().to_vec(),
                        leq: sl
                            .lattice
                            .elems()
                            .map(|a| sl.lattice.elems().map(|b| sl.lattice.leq(a, b)).collect())
                            .collect(),
                        tags: Tags {
                            distributive: true,
                            boolean: false,
                        },
                    });
                    let w = report
                        .violations
                        .iter()
                        .map(|v| {
                            let names: Vec<&str> = v.witness().iter().map(|&i| sl.lattice.elem_name(i)).collect();
                            names.join(",")
                        })
                        .next()
                        .unwrap_or_default();
                    push("distributivity", format!("Sub({}) at {}", cat.object_name(x), w));
                }
            }
            Err(e) if e.is_bound() => {}
            Err(e) => push("unions", e.to_string()),
        }
    }
    for f in &morphisms {
        match cat.image_factorization(f) {
            Ok(_) => {}
            Err(e) if e.is_bound() => {}
            Err(_) => push("image", format!("morphism {}", name(f))),
        }
        let (Ok(src), Ok(tgt)) = (cat.sub_lattice(f.dom), cat.sub_lattice(f.cod)) else { continue };
        let Ok(pre) = cat.preimage_map(f) else {
            push("preimage", format!("morphism {}", name(f)));
            continue;
        };
        for u in tgt.lattice.elems() {
            for v in tgt.lattice.elems() {
                if pre[tgt.lattice.join(u, v)] != src.lattice.join(pre[u], pre[v]) {
                    push(
                        "stable-unions",
                        format!(
                            "{} and {} along {}",
                            tgt.lattice.elem_name(u),
                            tgt.lattice.elem_name(v),
                            name(f)
                        ),
                    );
                }
            }
        }
    }
    for f in &morphisms {
        for g in morphisms.iter().filter(|g| g.cod == f.cod) {
            let Ok(pb) = cat.pullback(f, g) else { continue };
            let (Ok(img), Ok(pre)) = (cat.image(f), cat.preimage_map(g)) else { continue };
            let Ok(pulled) = cat.image(&pb.legs[1]) else { continue };
            if pre[img] != pulled {
                push("stable-images", format!("image of {} along {}", name(f), name(g)));
            }
        }
    }
    out
}

/// Parses the category text format:
///
/// ```text
/// category <name> backend=lattice|finsets|table [max_card=N]
/// ```
///
/// followed by a lattice block, nothing (finsets), or `object`, `morphism
/// f : A -> B` and `compose g f = h` lines (table).
pub fn parse_category(input: &str) -> Result<PresentedCategory, ParseError> {
    let lines = text::lines(input);
    let header = lines.first().ok_or_else(|| ParseError::new(1, 1, "empty category file"))?;
    if header.word(0) != Some("category") {
        return Err(ParseError::at(header, 0, "expected `category <name> backend=...`"));
    }
    let name = header.expect(1, "category name")?.to_string();
    let (bi, backend) = header
        .keyed(2, "backend")
        .ok_or_else(|| ParseError::at(header, 2, "expected backend=lattice|finsets|table"))?;
    let payload = blank_line(input, header.number);
    match backend {
        "lattice" => {
            let spec = lattice::parse_lattice(&payload)?;
            let first = text::lines(&payload).first().map(|l| l.number).unwrap_or(header.number);
            let l = FinLattice::new(spec).map_err(|e| ParseError::new(first, 1, e.to_string()))?;
            Ok(PresentedCategory::new(name, Backend::Lattice(l)))
        }
        "finsets" => {
            let found = header
                .keyed(2, "max_card")
                .map(|(i, v)| (header.clone(), i, v))
                .or_else(|| lines.get(1).and_then(|l| l.keyed(0, "max_card").map(|(i, v)| (l.clone(), i, v))));
            let (line, i, v) = found.ok_or_else(|| ParseError::at(header, bi, "finsets needs max_card=N"))?;
            let max_card = text::parse_usize(&line, i, v)?;
            Ok(PresentedCategory::new(name, Backend::FinSets { max_card }))
        }
        "table" => {
            let cat = parse_table(&name, &lines[1..])?;
            Ok(PresentedCategory::new(name, Backend::Table(cat)))
        }
        other => Err(ParseError::at(header, bi, format!("unknown backend `{other}`"))),
    }
}

fn blank_line(input: &str, number: usize) -> String {
    input
        .lines()
        .enumerate()
        .map(|(i, l)| if i + 1 == number { "" } else { l })
        .collect::<Vec<_>>()
        .join("\n")
}

pub(crate) fn parse_table(name: &str, lines: &[text::Line<'_>]) -> Result<FiniteCategory, ParseError> {
    let mut b = CategoryBuilder::new(name);
    let mut last = None;
    for line in lines {
        last = Some(line);
        let wrap = |e: CategoryError, i: usize| ParseError::at(line, i, e.to_string());
        match line.word(0) {
            Some("object") => {
                b.object(line.expect(1, "object name")?).map_err(|e| wrap(e, 1))?;
            }
            Some("morphism") => {
                let m = line.expect(1, "morphism name")?;
                if line.word(2) != Some(":") || line.word(4) != Some("->") {
                    return Err(ParseError::at(line, 2, "expected `morphism f : A -> B`"));
                }
                let dom = b.object_id(line.expect(3, "domain")?).map_err(|e| wrap(e, 3))?;
                let cod = b.object_id(line.expect(5, "codomain")?).map_err(|e| wrap(e, 5))?;
                b.morphism(m, dom, cod).map_err(|e| wrap(e, 1))?;
            }
            Some("compose") => {
                if line.word(3) != Some("=") {
                    return Err(ParseError::at(line, 3, "expected `compose g f = h`"));
                }
                let g = b.morphism_id(line.expect(1, "g")?).map_err(|e| wrap(e, 1))?;
                let f = b.morphism_id(line.expect(2, "f")?).map_err(|e| wrap(e, 2))?;
                let h = b.morphism_id(line.expect(4, "h")?).map_err(|e| wrap(e, 4))?;
                b.compose(g, f, h);
            }
            _ => return Err(ParseError::at(line, 0, "expected `object`, `morphism` or `compose`")),
        }
    }
    b.build().map_err(|e| match last {
        Some(l) => ParseError::new(l.number, 1, e.to_string()),
        None => ParseError::new(1, 1, e.to_string()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain3() -> PresentedCategory {
        PresentedCategory::lattice(FinLattice::chain(3))
    }

    #[test]
    fn homs_per_backend() {
        let c = chain3();
        assert_eq!(c.hom(0, 2).unwrap().len(), 1);
        assert!(c.hom(2, 0).unwrap().is_empty());
        let s = PresentedCategory::finsets(4);
        assert_eq!(s.hom(2, 2).unwrap().len(), 4);
        assert_eq!(s.hom(0, 3).unwrap().len(), 1);
        assert!(s.hom(3, 0).unwrap().is_empty());
        assert!(s.hom(5, 1).unwrap_err().is_bound());
    }

    #[test]
    fn sub_lattices() {
        let s = PresentedCategory::finsets(4);
        let s2 = s.sub_lattice(2).unwrap();
        assert_eq!(s2.lattice.len(), 4);
        assert!(s2.lattice.is_boolean());
        assert_eq!(s.sub_lattice(3).unwrap().lattice.len(), 8);
        let c = chain3();
        let sub_m = c.sub_lattice(1).unwrap();
        assert_eq!(sub_m.lattice.len(), 2);
        assert_eq!(sub_m.subs[1].domain, 1);
    }

    #[test]
    fn limits_in_finsets() {
        let s = PresentedCategory::finsets(4);
        assert_eq!(s.terminal().unwrap().apex, 1);
        let p = s.product(2, 2).unwrap();
        assert_eq!(p.apex, 4);
        assert_eq!(p.legs[0].table().unwrap(), &[0, 0, 1, 1]);
        assert_eq!(p.legs[1].table().unwrap(), &[0, 1, 0, 1]);
        assert!(s.product(2, 3).unwrap_err().is_bound());
        let id = s.identity(2);
        let eq = s.equalizer(&id, &id).unwrap();
        assert_eq!(eq.apex, 2);
        assert!(s.is_iso(&eq.legs[0]));
    }

    #[test]
    fn images_and_preimages() {
        let s = PresentedCategory::finsets(4);
        let constant = Mor::func(2, 2, vec![0, 0]);
        let (e, m) = s.image_factorization(&constant).unwrap();
        assert_eq!(m.table().unwrap(), &[0]);
        assert_eq!(e.table().unwrap(), &[0, 0]);
        assert_eq!(e.cod, 1);
        let swap = Mor::func(2, 2, vec![1, 0]);
        assert_eq!(s.preimage(&swap, 0b10).unwrap(), 0b01);
        assert_eq!(s.union(2, 0b01, 0b10).unwrap(), 0b11);
        let c = chain3();
        let f = c.hom(1, 2).unwrap().remove(0);
        let (e, m) = c.image_factorization(&f).unwrap();
        assert_eq!((e.dom, e.cod), (1, 1));
        assert_eq!(m, f);
    }

    #[test]
    fn boolean_and_coproducts() {
        let s = PresentedCategory::finsets(3);
        assert!(s.is_boolean().unwrap().holds);
        assert!(s.has_disjoint_coproducts().unwrap().holds);
        let c = chain3();
        assert!(!c.is_boolean().unwrap().holds);
        assert!(!c.has_disjoint_coproducts().unwrap().holds);
    }

    #[test]
    fn scope_categories() {
        let s = PresentedCategory::finsets(2);
        let sc = s.scope(&[1, 2]).unwrap();
        assert_eq!(sc.cat.num_morphisms(), 1 + 2 + 1 + 4);
        assert_eq!(sc.cat.hom(1, 0).len(), 1);
        let c = chain3();
        let sc = c.scope(&c.objects()).unwrap();
        assert!(sc.cat.is_thin());
        assert_eq!(sc.cat.num_morphisms(), 6);
    }

    #[test]
    fn parses_table_and_validates() {
        let text = "category v backend=table\nobject a\nobject b\nobject c\nmorphism f : a -> c\nmorphism g : b -> c\n";
        let c = parse_category(text).unwrap();
        let violations = validate_coherent(&c);
        assert!(violations.iter().any(|v| v.axiom == "pullback"));
        let err = parse_category("category v backend=table\nobject a\nmorphism f : a -> z\n").unwrap_err();
        assert_eq!((err.line, err.column), (3, 19));
    }

    #[test]
    fn parses_other_backends() {
        let c = parse_category("category s backend=finsets max_card=3\n").unwrap();
        assert_eq!(c.max_card(), Some(3));
        let c = parse_category("category c backend=lattice\nlattice c3\nb\nm\nt\nb < m\nm < t\n").unwrap();
        assert_eq!(c.objects().len(), 3);
        let err = parse_category("category c backend=lattice\nlattice c3\nb\nb < q\n").unwrap_err();
        assert_eq!(err.line, 4);
    }
}
