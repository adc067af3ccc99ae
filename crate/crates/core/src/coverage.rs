//! Cover families on spectrum sites, cover trees, and the topologies they
//! generate.
//!
//! A family is built from an effective epi `f : x -> y` of `C` and a target
//! `(y, q)`: its legs are the germs of `f` at every `(x, p)` whose pushforward
//! `f_! p` relates to `q` as the kind demands (`=` for `Eneg` and `E0`,
//! `>=` for `E`). `sat` families are single germs with `f_! p = q`.
//!
//! Cover trees are finite rooted trees whose internal vertices are either a
//! family or a single isomorphism; their leaf composites generate the basis
//! covers. Pulling a tree back along a germ follows the construction
//! levelwise: the effective epi is pulled back along the germ's
//! representative and the resulting family is put behind the restriction
//! isomorphism.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::category::{CatError, Mor, Obj};
use crate::finite::{MorId, ObjId};
use crate::lattice;
use crate::report::{Check, CheckLog, Status, Verdict};
use crate::sieve::{self, Indeterminate, Sieve, Topology};
use crate::spectrum::{Germ, SpecError, SpecObject, SpecSite, Spectrum, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyKind {
    /// Prime variant, legs with `f_! p >= q`.
    E,
    /// Ultra variant, legs with `f_! p = q`.
    Eneg,
    /// Prime variant, legs with `f_! p = q`.
    E0,
    /// Single germs with `f_! p = q`.
    Sat,
}

impl FamilyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FamilyKind::E => "E",
            FamilyKind::Eneg => "Eneg",
            FamilyKind::E0 => "E0",
            FamilyKind::Sat => "sat",
        }
    }

    pub fn parse(s: &str) -> Option<FamilyKind> {
        match s {
            "E" => Some(FamilyKind::E),
            "Eneg" => Some(FamilyKind::Eneg),
            "E0" => Some(FamilyKind::E0),
            "sat" => Some(FamilyKind::Sat),
            _ => None,
        }
    }

    /// The effective-epi kind that matches a site variant.
    pub fn for_variant(v: Variant) -> FamilyKind {
        match v {
            Variant::Prime => FamilyKind::E,
            Variant::Ultra => FamilyKind::Eneg,
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverageError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("family kind {kind} does not apply to the {variant} spectrum")]
    WrongVariant { kind: FamilyKind, variant: Variant },
    #[error("E0 is excluded from saturation unless the experimental flag is set")]
    E0Excluded,
    #[error("no object of the site is isomorphic to {0}")]
    OffSite(String),
    #[error("vertex {vertex}: {reason}")]
    Malformed { vertex: usize, reason: String },
    #[error("violated: {0}")]
    Violation(String),
}

impl From<CatError> for CoverageError {
    fn from(e: CatError) -> Self {
        CoverageError::Spec(SpecError::Cat(e))
    }
}

impl CoverageError {
    pub fn is_bound(&self) -> bool {
        matches!(self, CoverageError::Spec(e) if e.is_bound())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverFamily {
    pub target: SpecObject,
    pub legs: Vec<Germ>,
    pub kind: FamilyKind,
    /// The effective epi behind the family (`None` for `sat`).
    pub via: Option<Mor>,
}

fn check_kind(kind: FamilyKind, variant: Variant) -> Result<(), CoverageError> {
    let ok = match kind {
        FamilyKind::E | FamilyKind::E0 => variant == Variant::Prime,
        FamilyKind::Eneg => variant == Variant::Ultra,
        FamilyKind::Sat => true,
    };
    if ok {
        Ok(())
    } else {
        Err(CoverageError::WrongVariant { kind, variant })
    }
}

/// The family of `kind` over `target` induced by the effective epi `f`.
pub fn family_for(
    spec: &Spectrum<'_>,
    kind: FamilyKind,
    target: &SpecObject,
    f: &Mor,
) -> Result<CoverFamily, CoverageError> {
    check_kind(kind, spec.variant)?;
    let top = spec.type_lattice(f.dom)?.sub.top();
    let mut legs = Vec::new();
    for p in spec.filters(f.dom)? {
        let pushed = spec.pushforward(f, &p)?;
        let keep = match kind {
            FamilyKind::E => target.filter.is_subset_of(&pushed),
            _ => pushed == target.filter,
        };
        if keep {
            let source = spec.object(f.dom, p)?;
            legs.push(spec.germ_from_partial(&source, target, top, f)?);
        }
    }
    Ok(CoverFamily {
        target: target.clone(),
        legs,
        kind,
        via: Some(f.clone()),
    })
}

/// Every family of `kind` whose legs lie in the site.
pub fn generate_families(site: &SpecSite, kind: FamilyKind) -> Result<Vec<CoverFamily>, CoverageError> {
    check_kind(kind, site.variant)?;
    let spec = site.spectrum();
    let mut out = Vec::new();
    if kind == FamilyKind::Sat {
        for (m, g) in site.germs.iter().enumerate() {
            if spec.is_strict(g)? {
                out.push(CoverFamily {
                    target: g.target.clone(),
                    legs: vec![site.germs[m].clone()],
                    kind,
                    via: None,
                });
            }
        }
        return Ok(out);
    }
    for target in &site.objects {
        for &x in &site.scope {
            for f in site.c.hom(x, target.x)? {
                if site.c.is_effective_epi(&f)? {
                    out.push(family_for(&spec, kind, target, &f)?);
                }
            }
        }
    }
    Ok(out)
}

/// The site sieve generated by a family whose legs are site germs.
pub fn family_sieve(site: &SpecSite, family: &CoverFamily) -> Result<Sieve, CoverageError> {
    let target = site
        .object_index(&family.target)
        .ok_or_else(|| CoverageError::OffSite(site.spectrum().object_name(&family.target)))?;
    let mut gens = Vec::new();
    for leg in &family.legs {
        gens.push(
            site.germ_id(leg)
                .ok_or_else(|| CoverageError::OffSite(site.spectrum().object_name(&leg.source)))?,
        );
    }
    Ok(sieve::generated(&site.cat, target, &gens))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeLabel {
    Leaf,
    Iso,
    Family { kind: FamilyKind, via: Mor },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    pub object: SpecObject,
    pub label: NodeLabel,
    /// `(germ child -> this node, child index)`.
    pub children: Vec<(Germ, usize)>,
}

/// A finite rooted tree of refining families; `nodes[0]` is the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverTree {
    pub nodes: Vec<TreeNode>,
}

impl CoverTree {
    pub fn leaf(o: &SpecObject) -> Self {
        CoverTree {
            nodes: vec![TreeNode {
                object: o.clone(),
                label: NodeLabel::Leaf,
                children: vec![],
            }],
        }
    }

    /// A single isomorphism `iso : child -> root`.
    pub fn iso(iso: &Germ) -> Self {
        CoverTree {
            nodes: vec![
                TreeNode {
                    object: iso.target.clone(),
                    label: NodeLabel::Iso,
                    children: vec![(iso.clone(), 1)],
                },
                TreeNode {
                    object: iso.source.clone(),
                    label: NodeLabel::Leaf,
                    children: vec![],
                },
            ],
        }
    }

    pub fn from_family(family: &CoverFamily) -> Self {
        let mut tree = CoverTree::leaf(&family.target);
        tree.attach(0, family);
        tree
    }

    /// Replaces the leaf at `node` by the family, whose target must be the
    /// leaf's object.
    pub fn attach(&mut self, node: usize, family: &CoverFamily) {
        debug_assert_eq!(self.nodes[node].object, family.target);
        let via = family.via.clone().expect("attachable families come from an effective epi");
        self.nodes[node].label = NodeLabel::Family { kind: family.kind, via };
        for leg in &family.legs {
            let idx = self.nodes.len();
            self.nodes.push(TreeNode {
                object: leg.source.clone(),
                label: NodeLabel::Leaf,
                children: vec![],
            });
            self.nodes[node].children.push((leg.clone(), idx));
        }
    }

    pub fn root(&self) -> &SpecObject {
        &self.nodes[0].object
    }

    pub fn height(&self) -> usize {
        fn h(t: &CoverTree, n: usize) -> usize {
            t.nodes[n].children.iter().map(|&(_, c)| 1 + h(t, c)).max().unwrap_or(0)
        }
        h(self, 0)
    }

    /// Leaf composites into the root, with the leaf node index.
    pub fn leaf_composites(&self, spec: &Spectrum<'_>) -> Result<Vec<(usize, Germ)>, SpecError> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, spec.identity(self.root()))];
        while let Some((n, to_root)) = stack.pop() {
            if self.nodes[n].children.is_empty() {
                out.push((n, to_root));
                continue;
            }
            for (g, c) in self.nodes[n].children.iter().rev() {
                stack.push((*c, spec.compose(&to_root, g)?));
            }
        }
        out.sort_by_key(|(n, _)| *n);
        Ok(out)
    }
}

/// Validates the vertex condition: every vertex is a leaf, a single
/// isomorphism, or carries exactly the legs of its family.
pub fn is_basis_cover(spec: &Spectrum<'_>, tree: &CoverTree) -> Result<(), CoverageError> {
    for (i, node) in tree.nodes.iter().enumerate() {
        let bad = |reason: String| CoverageError::Malformed { vertex: i, reason };
        for (g, c) in &node.children {
            if g.target != node.object || g.source != tree.nodes[*c].object {
                return Err(bad("edge germ has the wrong endpoints".into()));
            }
        }
        match &node.label {
            NodeLabel::Leaf => {
                if !node.children.is_empty() {
                    return Err(bad("leaf with predecessors".into()));
                }
            }
            NodeLabel::Iso => {
                if node.children.len() != 1 || !spec.c.is_iso(&node.children[0].0.core) {
                    return Err(bad("not a single isomorphism".into()));
                }
            }
            NodeLabel::Family { kind, via } => {
                let family = family_for(spec, *kind, &node.object, via)?;
                let expected: BTreeSet<_> = family.legs.iter().map(|g| (&g.source, &g.core)).collect();
                let got: BTreeSet<_> = node.children.iter().map(|(g, _)| (&g.source, &g.core)).collect();
                if expected != got || got.len() != node.children.len() {
                    return Err(bad(format!(
                        "predecessors are not the {} family of {}",
                        kind,
                        spec.c.morphism_name(via)
                    )));
                }
            }
        }
    }
    Ok(())
}

/// A site object isomorphic to `o`, with an isomorphism from it.
pub fn site_representative(site: &SpecSite, o: &SpecObject) -> Result<(ObjId, Germ), CoverageError> {
    let spec = site.spectrum();
    if let Some(i) = site.object_index(o) {
        return Ok((i, spec.identity(o)));
    }
    for (i, cand) in site.objects.iter().enumerate() {
        for g in spec.hom_germs(cand, o)? {
            if site.c.is_iso(&g.core) {
                return Ok((i, g));
            }
        }
    }
    Err(CoverageError::OffSite(spec.object_name(o)))
}

/// The site sieve generated by the leaf composites, moving off-site leaves
/// onto isomorphic site objects.
pub fn tree_to_sieve(site: &SpecSite, tree: &CoverTree) -> Result<Sieve, CoverageError> {
    let spec = site.spectrum();
    let root = site
        .object_index(tree.root())
        .ok_or_else(|| CoverageError::OffSite(spec.object_name(tree.root())))?;
    let mut gens = Vec::new();
    for (_, leg) in tree.leaf_composites(&spec)? {
        let (_, iso) = site_representative(site, &leg.source)?;
        let moved = spec.compose(&leg, &iso)?;
        gens.push(site.germ_id(&moved).expect("endpoints are site objects"));
    }
    Ok(sieve::generated(&site.cat, root, &gens))
}

/// The object `(u, {top})` for `u` the core of `o`, isomorphic to `o`.
fn core_object(spec: &Spectrum<'_>, o: &SpecObject) -> Result<SpecObject, CoverageError> {
    let t = spec.type_lattice(o.core)?;
    let top = t.sub.top();
    for p in spec.filters(o.core)? {
        if t.embed[p.generator(&t.lattice)] == top {
            return spec.object(o.core, p).map_err(Into::into);
        }
    }
    Err(CoverageError::Violation(format!(
        "the core of {} has no filter generated by its top",
        spec.object_name(o)
    )))
}

/// Pulls `tree` back along `g : (y', q') -> root`.
pub fn pull_back_tree(spec: &Spectrum<'_>, tree: &CoverTree, g: &Germ) -> Result<CoverTree, CoverageError> {
    if g.target != *tree.root() {
        return Err(SpecError::ObjectMismatch.into());
    }
    let mut out = CoverTree { nodes: Vec::new() };
    pull_node(spec, tree, 0, g, &mut out)?;
    Ok(out)
}

fn pull_node(
    spec: &Spectrum<'_>,
    tree: &CoverTree,
    n: usize,
    g: &Germ,
    out: &mut CoverTree,
) -> Result<usize, CoverageError> {
    let node = &tree.nodes[n];
    let idx = out.nodes.len();
    out.nodes.push(TreeNode {
        object: g.source.clone(),
        label: NodeLabel::Leaf,
        children: vec![],
    });
    match &node.label {
        NodeLabel::Leaf => {}
        NodeLabel::Iso => {
            let (iso, c) = &node.children[0];
            let inv_core = spec
                .c
                .hom(iso.target.core, iso.source.core)?
                .into_iter()
                .find(|k| spec.c.compose(&iso.core, k).ok() == Some(spec.c.identity(iso.target.core)))
                .expect("isomorphisms have inverses");
            let inv = Germ {
                source: iso.target.clone(),
                target: iso.source.clone(),
                core: inv_core,
            };
            let down = spec.compose(&inv, g)?;
            let child = pull_node(spec, tree, *c, &down, out)?;
            out.nodes[idx].label = NodeLabel::Iso;
            out.nodes[idx].children.push((spec.identity(&g.source), child));
        }
        NodeLabel::Family { kind, via } => {
            let (_, h) = spec.representative(g)?;
            let restricted = core_object(spec, &g.source)?;
            let restriction_iso = Germ {
                source: restricted.clone(),
                target: g.source.clone(),
                core: spec.c.identity(g.source.core),
            };
            let pb = spec.c.pullback(&h, via)?;
            let (f_pulled, k) = (&pb.legs[0], &pb.legs[1]);
            if !spec.c.is_effective_epi(f_pulled)? {
                return Err(CoverageError::Violation(format!(
                    "pullback of {} is not an effective epi",
                    spec.c.morphism_name(via)
                )));
            }
            let family = family_for(spec, *kind, &restricted, f_pulled)?;
            let mid = out.nodes.len();
            out.nodes.push(TreeNode {
                object: restricted.clone(),
                label: NodeLabel::Family {
                    kind: *kind,
                    via: f_pulled.clone(),
                },
                children: vec![],
            });
            out.nodes[idx].label = NodeLabel::Iso;
            out.nodes[idx].children.push((restriction_iso, mid));
            for leg in family.legs {
                let down = spec.total_germ(&leg.source, k)?;
                let (_, c) = node
                    .children
                    .iter()
                    .find(|(cg, _)| cg.source == down.target)
                    .ok_or_else(|| {
                        CoverageError::Violation(format!(
                            "pulled-back leg {} lands outside the family",
                            spec.object_name(&down.target)
                        ))
                    })?;
                let child = pull_node(spec, tree, *c, &down, out)?;
                out.nodes[mid].children.push((leg, child));
            }
        }
    }
    Ok(idx)
}

/// Every leaf composite of `pulled`, followed by `g`, factors through a
/// leaf composite of `original`.
pub fn leaf_factoring(
    spec: &Spectrum<'_>,
    original: &CoverTree,
    pulled: &CoverTree,
    g: &Germ,
) -> Result<Verdict, CoverageError> {
    let legs = original.leaf_composites(spec)?;
    for (n, leaf) in pulled.leaf_composites(spec)? {
        let along = spec.compose(g, &leaf)?;
        let mut found = false;
        'legs: for (_, l) in &legs {
            for t in spec.hom_germs(&along.source, &l.source)? {
                if spec.compose(l, &t)?.core == along.core {
                    found = true;
                    break 'legs;
                }
            }
        }
        if !found {
            return Ok(Verdict::no(format!("leaf {n} does not factor")));
        }
    }
    Ok(Verdict::yes())
}

/// The saturated topology generated by the families of `kind`.
///
/// Pullbacks of generating families that leave the bounded fragment, or
/// whose leaves have no isomorphic site object, are recorded as
/// indeterminate. `E0` is refused unless `experimental` is set, in which
/// case every pulled-back generating sieve is marked indeterminate.
pub fn saturate_site(site: &SpecSite, kind: FamilyKind, experimental: bool) -> Result<Topology, CoverageError> {
    if kind == FamilyKind::E0 && !experimental {
        return Err(CoverageError::E0Excluded);
    }
    let spec = site.spectrum();
    let families = generate_families(site, kind)?;
    let mut generators = Vec::new();
    let mut indeterminate = Vec::new();
    for fam in &families {
        let s = family_sieve(site, fam)?;
        let root = s.target;
        generators.push(s.clone());
        if fam.via.is_none() {
            continue;
        }
        let tree = CoverTree::from_family(fam);
        for h in site.cat.into_obj(root) {
            let pulled_sieve = sieve::pull_back(&site.cat, &s, h);
            if kind == FamilyKind::E0 && !site.cat.is_iso(h) {
                indeterminate.push(Indeterminate {
                    sieve: pulled_sieve,
                    reason: "E0-pullback-stability-unknown".into(),
                });
                continue;
            }
            match pull_back_tree(&spec, &tree, &site.germs[h]).and_then(|t| tree_to_sieve(site, &t)) {
                Ok(_) => {}
                Err(e) if e.is_bound() || matches!(e, CoverageError::OffSite(_)) => {
                    indeterminate.push(Indeterminate {
                        sieve: pulled_sieve,
                        reason: e.to_string().replace(' ', "-"),
                    });
                }
                Err(e) => return Err(e),
            }
        }
    }
    let mut t = sieve::saturate(&site.cat, &generators);
    indeterminate.sort_by(|a, b| a.sieve.cmp(&b.sieve));
    indeterminate.dedup_by(|a, b| a.sieve == b.sieve);
    t.indeterminate = indeterminate;
    Ok(t)
}

/// The least member of `cover` whose germ is strict (`f_! p = q`).
pub fn strictness_check(site: &SpecSite, cover: &Sieve) -> Result<MorId, CoverageError> {
    let spec = site.spectrum();
    for &m in &cover.members {
        if spec.is_strict(&site.germs[m])? {
            return Ok(m);
        }
    }
    Err(CoverageError::Violation(format!(
        "covering sieve {} on {} has no strict leg",
        cover.render(&site.cat),
        site.cat.object_name(cover.target)
    )))
}

/// A commuting square over a cospan of germs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Square {
    pub apex: SpecObject,
    pub left: Germ,
    pub right: Germ,
}

/// Completes the cospan `f, f'` by pulling back the representatives and
/// choosing the least filter on the pullback; `None` when the pullback has
/// no filter of the variant's kind.
pub fn complete_square(spec: &Spectrum<'_>, f: &Germ, f2: &Germ) -> Result<Option<Square>, CoverageError> {
    if f.target != f2.target {
        return Err(SpecError::ObjectMismatch.into());
    }
    let (_, h) = spec.representative(f)?;
    let (_, h2) = spec.representative(f2)?;
    let pb = spec.c.pullback(&h, &h2)?;
    let Some(p) = spec.filters(pb.apex)?.into_iter().next() else {
        return Ok(None);
    };
    let apex = spec.object(pb.apex, p)?;
    let gen = spec.type_lattice(pb.apex)?.sub.subs[apex.generator].mono.clone();
    let left = Germ {
        source: apex.clone(),
        target: f.source.clone(),
        core: spec.c.compose(&pb.legs[0], &gen)?,
    };
    let right = Germ {
        source: apex.clone(),
        target: f2.source.clone(),
        core: spec.c.compose(&pb.legs[1], &gen)?,
    };
    let a = spec.compose(f, &left)?;
    let b = spec.compose(f2, &right)?;
    if !spec.germ_equal(&a, &b)? {
        return Err(CoverageError::Violation("completed square does not commute".into()));
    }
    Ok(Some(Square { apex, left, right }))
}

/// Searches the site for any commuting square over the cospan.
pub fn square_in_site(site: &SpecSite, f: MorId, f2: MorId) -> Option<(ObjId, MorId, MorId)> {
    let cat = &site.cat;
    let (a, b) = (cat.dom(f), cat.dom(f2));
    for z in cat.objects() {
        for &l in cat.hom(z, a) {
            for &r in cat.hom(z, b) {
                if cat.compose(f, l) == cat.compose(f2, r) {
                    return Some((z, l, r));
                }
            }
        }
    }
    None
}

/// Checks, for every cospan in the site, that `complete_square` succeeds
/// exactly when the pushforwards are compatible and exactly when a square
/// exists in the site.
pub fn check_squares(site: &SpecSite) -> Result<CheckLog, CoverageError> {
    let spec = site.spectrum();
    let mut log = CheckLog::new();
    for y in site.cat.objects() {
        let into = site.cat.into_obj(y);
        for &f in &into {
            for &f2 in &into {
                let name = format!(
                    "square {} {}",
                    site.cat.morphism_name(f),
                    site.cat.morphism_name(f2)
                );
                let (gf, gf2) = (&site.germs[f], &site.germs[f2]);
                let square = match complete_square(&spec, gf, gf2) {
                    Ok(s) => s,
                    Err(e) if e.is_bound() => {
                        log.push(Check::skip(name, e.to_string()));
                        continue;
                    }
                    Err(e) => return Err(e),
                };
                let tl = spec.type_lattice(gf.target.x)?;
                let compatible =
                    lattice::compatible(&tl.lattice, &spec.germ_pushforward(gf)?, &spec.germ_pushforward(gf2)?)
                        .map_err(SpecError::from)?;
                let brute = square_in_site(site, f, f2).is_some();
                let ok = square.is_some() == compatible && compatible == brute;
                log.push(Check::new(
                    name,
                    Status::from_bool(ok),
                    format!("square={} compatible={compatible} search={brute}", square.is_some()),
                ));
            }
        }
    }
    Ok(log)
}

/// Checks that every `kind`-covering sieve is `sat`-covering.
pub fn compare_topologies(site: &SpecSite) -> Result<CheckLog, CoverageError> {
    let kind = FamilyKind::for_variant(site.variant);
    let te = saturate_site(site, kind, false)?;
    let ts = saturate_site(site, FamilyKind::Sat, false)?;
    let mut log = CheckLog::new();
    for c in site.cat.objects() {
        for s in &te.covers[c] {
            log.push(Check::new(
                format!("{kind}-cover {} {} in sat", site.cat.object_name(c), s.render(&site.cat)),
                Status::from_bool(ts.covers(s)),
                "",
            ));
        }
    }
    let extra = ts.not_in(&te).len();
    log.push(Check::pass(format!("sat-only covers {extra}")));
    Ok(log)
}

/// Strictness of every covering sieve of the saturated topology.
pub fn check_strictness(site: &SpecSite, kind: FamilyKind) -> Result<CheckLog, CoverageError> {
    let t = saturate_site(site, kind, false)?;
    let mut log = CheckLog::new();
    for c in site.cat.objects() {
        for s in &t.covers[c] {
            let name = format!("strict {} {}", site.cat.object_name(c), s.render(&site.cat));
            match strictness_check(site, s) {
                Ok(m) => log.push(Check::new(name, Status::Pass, site.cat.morphism_name(m))),
                Err(CoverageError::Violation(w)) => log.push(Check::fail(name, w)),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(log)
}

/// The basis axioms on a site: isomorphisms cover, families pull back to
/// valid trees whose leaves factor, and height-2 composites cover.
pub fn check_basis(site: &SpecSite, kind: FamilyKind) -> Result<CheckLog, CoverageError> {
    let spec = site.spectrum();
    let topology = saturate_site(site, kind, false)?;
    let mut log = CheckLog::new();
    let name_of = |g: &Germ| -> String {
        format!("{}->{}", spec.object_name(&g.source), spec.object_name(&g.target))
    };

    for (m, g) in site.germs.iter().enumerate() {
        if !site.c.is_iso(&g.core) {
            continue;
        }
        let tree = CoverTree::iso(g);
        let ok = is_basis_cover(&spec, &tree).is_ok() && topology.covers(&tree_to_sieve(site, &tree)?);
        log.push(Check::new(format!("iso {}", site.cat.morphism_name(m)), Status::from_bool(ok), ""));
    }

    let families = generate_families(site, kind)?;
    let mut trees: Vec<CoverTree> = families.iter().map(CoverTree::from_family).collect();
    for (m, g) in site.germs.iter().enumerate() {
        if site.c.is_iso(&g.core) && !site.cat.is_identity(m) {
            trees.push(CoverTree::iso(g));
        }
    }
    for tree in &trees {
        let root = site.object_index(tree.root()).expect("site families");
        let base = tree_to_sieve(site, tree)?;
        for h in site.cat.into_obj(root) {
            let g = &site.germs[h];
            let name = format!("pullback height{} tree at {} along {}", tree.height(), spec.object_name(tree.root()), name_of(g));
            let pulled = match pull_back_tree(&spec, tree, g) {
                Ok(t) => t,
                Err(e) if e.is_bound() => {
                    log.push(Check::skip(name, e.to_string()));
                    continue;
                }
                Err(e) => {
                    log.push(Check::fail(name, e.to_string()));
                    continue;
                }
            };
            let valid = is_basis_cover(&spec, &pulled);
            let factoring = leaf_factoring(&spec, tree, &pulled, g)?;
            let status = match (valid, factoring.holds, tree_to_sieve(site, &pulled)) {
                (Ok(()), true, Ok(s)) => {
                    let inside = s.is_subset_of(&sieve::pull_back(&site.cat, &base, h));
                    Status::from_bool(inside && topology.covers(&s))
                }
                (_, _, Err(CoverageError::OffSite(_))) => Status::Indeterminate,
                _ => Status::Fail,
            };
            log.push(Check::new(name, status, factoring.witness.unwrap_or_default()));
        }
    }

    let n = site.cat.num_morphisms();
    for fam in &families {
        let root = site.object_index(&fam.target).expect("site families");
        let mut options: Vec<Vec<Vec<bool>>> = Vec::new();
        let mut valid = true;
        for leg in &fam.legs {
            let mut leg_options = Vec::new();
            for child in families.iter().filter(|c| c.target == leg.source) {
                let mut tree = CoverTree::from_family(fam);
                let slot = tree.nodes[0]
                    .children
                    .iter()
                    .find(|(g, _)| g == leg)
                    .map(|&(_, c)| c)
                    .expect("leg is a child");
                tree.attach(slot, child);
                valid &= is_basis_cover(&spec, &tree).is_ok();
                let mut bits = vec![false; n];
                for l in &child.legs {
                    let through = spec.compose(leg, l)?;
                    let id = site.germ_id(&through).expect("site germs");
                    for m in sieve::generated(&site.cat, root, &[id]).members {
                        bits[m] = true;
                    }
                }
                leg_options.push(bits);
            }
            options.push(leg_options);
        }
        let mut all_cover = true;
        let mut combos = 0u64;
        if options.iter().all(|o| !o.is_empty()) {
            let mut idx = vec![0usize; options.len()];
            loop {
                combos += 1;
                let mut bits = vec![false; n];
                for (k, &i) in idx.iter().enumerate() {
                    for (b, &v) in bits.iter_mut().zip(&options[k][i]) {
                        *b |= v;
                    }
                }
                let s = Sieve {
                    target: root,
                    members: (0..n).filter(|&m| bits[m]).collect(),
                };
                if !topology.covers(&s) {
                    all_cover = false;
                    break;
                }
                let mut k = idx.len();
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < options[k].len() {
                        break;
                    }
                    idx[k] = 0;
                }
                if idx.iter().all(|&i| i == 0) {
                    break;
                }
            }
        }
        log.push(Check::new(
            format!(
                "height2 at {} via {}",
                spec.object_name(&fam.target),
                fam.via.as_ref().map(|f| site.c.morphism_name(f)).unwrap_or_default()
            ),
            Status::from_bool(valid && all_cover),
            format!("combinations={combos}"),
        ));
    }
    Ok(log)
}

/// Objects of `C` reachable as sources of effective epis onto `y` within
/// the scope.
pub fn epi_sources(site: &SpecSite, y: Obj) -> Result<Vec<Obj>, CoverageError> {
    let mut out = Vec::new();
    for &x in &site.scope {
        if site.c.hom(x, y)?.iter().any(|f| site.c.is_effective_epi(f).unwrap_or(false)) {
            out.push(x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::PresentedCategory;
    use crate::lattice::FinLattice;

    fn diamond_with_top() -> PresentedCategory {
        let names = ["0", "a", "b", "s", "j"].map(String::from).to_vec();
        let up = |x: usize, y: usize| x == y || x == 0 || y == 4 || (y == 3 && x != 4);
        PresentedCategory::lattice(FinLattice::from_order("2x2-top", names, up).unwrap())
    }

    #[test]
    fn finsets_ultra_site_is_a_basis() {
        let c = PresentedCategory::finsets(4);
        let site = SpecSite::build(&c, Variant::Ultra, &[1, 2]).unwrap();
        let fams = generate_families(&site, FamilyKind::Eneg).unwrap();
        assert!(fams.iter().all(|f| !f.legs.is_empty()));
        for log in [
            check_basis(&site, FamilyKind::Eneg).unwrap(),
            check_strictness(&site, FamilyKind::Eneg).unwrap(),
            check_squares(&site).unwrap(),
            compare_topologies(&site).unwrap(),
        ] {
            assert!(log.all_passed(), "{:?}", log.failures().collect::<Vec<_>>());
        }
    }

    #[test]
    fn two_point_family_pulls_back_along_a_point() {
        let c = PresentedCategory::finsets(4);
        let spec = Spectrum::new(&c, Variant::Ultra);
        let objs = spec.objects(&[1, 2]).unwrap();
        let f = Mor::func(2, 1, vec![0, 0]);
        let fam = family_for(&spec, FamilyKind::Eneg, &objs[0], &f).unwrap();
        assert_eq!(fam.legs.len(), 2);
        let tree = CoverTree::from_family(&fam);
        is_basis_cover(&spec, &tree).unwrap();
        let g = spec.hom_germs(&objs[1], &objs[0]).unwrap().remove(0);
        let pulled = pull_back_tree(&spec, &tree, &g).unwrap();
        is_basis_cover(&spec, &pulled).unwrap();
        assert_eq!(pulled.leaf_composites(&spec).unwrap().len(), 2);
        assert!(leaf_factoring(&spec, &tree, &pulled, &g).unwrap().holds);
    }

    #[test]
    fn malformed_trees_are_rejected() {
        let c = PresentedCategory::finsets(4);
        let spec = Spectrum::new(&c, Variant::Ultra);
        let objs = spec.objects(&[1, 2]).unwrap();
        let fam = family_for(&spec, FamilyKind::Eneg, &objs[0], &Mor::func(2, 1, vec![0, 0])).unwrap();
        let mut tree = CoverTree::from_family(&fam);
        tree.nodes[0].children.pop();
        assert!(matches!(is_basis_cover(&spec, &tree), Err(CoverageError::Malformed { vertex: 0, .. })));
    }

    #[test]
    fn e0_needs_the_experimental_flag() {
        let c = PresentedCategory::finsets(4);
        let site = SpecSite::build(&c, Variant::Prime, &[1, 2]).unwrap();
        assert_eq!(saturate_site(&site, FamilyKind::E0, false), Err(CoverageError::E0Excluded));
        assert!(matches!(
            saturate_site(&site, FamilyKind::Eneg, false),
            Err(CoverageError::WrongVariant { .. })
        ));
        let c = diamond_with_top();
        let site = SpecSite::build(&c, Variant::Prime, &c.objects()).unwrap();
        assert!(!saturate_site(&site, FamilyKind::E0, true).unwrap().is_determinate());
    }

    #[test]
    fn incompatible_cospan_has_no_square() {
        let c = diamond_with_top();
        let site = SpecSite::build(&c, Variant::Prime, &c.objects()).unwrap();
        let log = check_squares(&site).unwrap();
        assert!(log.all_passed(), "{:?}", log.failures().collect::<Vec<_>>());
        let spec = site.spectrum();
        let name = |g: &Germ| (spec.object_name(&g.source), spec.object_name(&g.target));
        let find = |s: &str| {
            site.germs
                .iter()
                .find(|g| name(g) == (s.to_string(), "(j,@j)".to_string()))
                .cloned()
                .unwrap()
        };
        let (fa, fb) = (find("(a,@a)"), find("(b,@b)"));
        assert_eq!(complete_square(&spec, &fa, &fb).unwrap(), None);
        assert!(complete_square(&spec, &fa, &fa).unwrap().is_some());
    }

    #[test]
    fn lattice_sites_satisfy_the_basis_axioms() {
        let c = diamond_with_top();
        let site = SpecSite::build(&c, Variant::Prime, &c.objects()).unwrap();
        let log = check_basis(&site, FamilyKind::E).unwrap();
        assert!(log.all_passed(), "{:?}", log.failures().collect::<Vec<_>>());
        let t = saturate_site(&site, FamilyKind::E, false).unwrap();
        assert!(t.is_determinate());
        assert!(sieve::is_topology(&site.cat, &t).holds);
    }
}
