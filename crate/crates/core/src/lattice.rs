//! Finite bounded lattices, filters, prime filters and ultrafilters.
//!
//! A lattice is given by its order relation only. Meets and joins are
//! computed once and cached, so two lattices with the same order table are
//! interchangeable no matter how they were built.
//!
//! Filters are stored as sorted element sets. On a finite lattice every
//! filter is principal, so a filter is also determined by its least member,
//! its *generator*; prime filters are exactly the principal filters on
//! join-irreducible elements, and ultrafilters of a Boolean algebra are the
//! principal filters on atoms.

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};

use thiserror::Error;

use crate::report::Report;
use crate::text::{self, ParseError};

/// Index of an element inside a [`FinLattice`].
pub type Elem = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("lattice `{name}` is invalid: {violation}")]
    Invalid { name: String, violation: Violation },
    #[error("lattice `{0}` is not distributive")]
    NotDistributive(String),
    #[error("lattice `{0}` is not Boolean")]
    NotBoolean(String),
    #[error("filters live on different lattices")]
    LatticeMismatch,
    #[error("preimage map does not preserve {0}")]
    NotMeetPreserving(String),
    #[error("pushforward is improper: it contains the bottom element")]
    Improper,
    #[error("filters do not form a chain")]
    NotAChain,
    #[error("empty chain")]
    EmptyChain,
    #[error("unknown element `{0}`")]
    UnknownElement(String),
}

/// Tags a lattice may claim.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tags {
    pub distributive: bool,
    pub boolean: bool,
}

/// Raw, unvalidated lattice input: element names and an order table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeSpec {
    pub name: String,
    pub elems: Vec<String>,
    pub leq: Vec<Vec<bool>>,
    pub tags: Tags,
}

/// One violated lattice axiom with its witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    NotReflexive(Elem),
    NotAntisymmetric(Elem, Elem),
    NotTransitive(Elem, Elem, Elem),
    NoMeet(Elem, Elem),
    NoJoin(Elem, Elem),
    NotDistributive(Elem, Elem, Elem),
    NoComplement(Elem),
}

impl Violation {
    pub fn kind(&self) -> &'static str {
        match self {
            Violation::Empty => "empty",
            Violation::NotReflexive(..) => "reflexivity",
            Violation::NotAntisymmetric(..) => "antisymmetry",
            Violation::NotTransitive(..) => "transitivity",
            Violation::NoMeet(..) => "meet",
            Violation::NoJoin(..) => "join",
            Violation::NotDistributive(..) => "distributivity",
            Violation::NoComplement(..) => "complement",
        }
    }

    pub fn witness(&self) -> Vec<Elem> {
        match *self {
            Violation::Empty => vec![],
            Violation::NotReflexive(a) | Violation::NoComplement(a) => vec![a],
            Violation::NotAntisymmetric(a, b) | Violation::NoMeet(a, b) | Violation::NoJoin(a, b) => vec![a, b],
            Violation::NotTransitive(a, b, c) | Violation::NotDistributive(a, b, c) => vec![a, b, c],
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} witness {:?}", self.kind(), self.witness())
    }
}

/// Every violated axiom of a lattice input; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub name: String,
    pub violations: Vec<Violation>,
    /// Element names, for rendering witnesses.
    pub names: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new();
        r.push("lattice", &self.name);
        r.push("valid", self.is_valid());
        for v in &self.violations {
            let names: Vec<&str> = v.witness().iter().map(|&i| self.names[i].as_str()).collect();
            r.push("violation", format!("{} {}", v.kind(), names.join(",")));
        }
        r
    }
}

fn find_bound(n: usize, leq: &[Vec<bool>], a: Elem, b: Elem, upper: bool) -> Option<Elem> {
    let is_bound = |c: Elem| {
        if upper {
            leq[a][c] && leq[b][c]
        } else {
            leq[c][a] && leq[c][b]
        }
    };
    let bounds: Vec<Elem> = (0..n).filter(|&c| is_bound(c)).collect();
    bounds.iter().copied().find(|&c| {
        bounds
            .iter()
            .all(|&d| if upper { leq[c][d] } else { leq[d][c] })
    })
}

/// Checks the order table and every claimed tag.
pub fn validate(spec: &LatticeSpec) -> ValidationReport {
    let n = spec.elems.len();
    let leq = &spec.leq;
    let mut violations = Vec::new();
    if n == 0 {
        violations.push(Violation::Empty);
    }
    for a in 0..n {
        if !leq[a][a] {
            violations.push(Violation::NotReflexive(a));
        }
    }
    for a in 0..n {
        for b in (a + 1)..n {
            if leq[a][b] && leq[b][a] {
                violations.push(Violation::NotAntisymmetric(a, b));
            }
        }
    }
    'trans: for a in 0..n {
        for b in 0..n {
            if !leq[a][b] {
                continue;
            }
            for c in 0..n {
                if leq[b][c] && !leq[a][c] {
                    violations.push(Violation::NotTransitive(a, b, c));
                    break 'trans;
                }
            }
        }
    }
    let poset_ok = violations.is_empty();
    let mut meet = vec![vec![0; n]; n];
    let mut join = vec![vec![0; n]; n];
    let mut bounds_ok = poset_ok;
    if poset_ok {
        for a in 0..n {
            for b in a..n {
                match find_bound(n, leq, a, b, false) {
                    Some(m) => {
                        meet[a][b] = m;
                        meet[b][a] = m;
                    }
                    None => {
                        violations.push(Violation::NoMeet(a, b));
                        bounds_ok = false;
                    }
                }
                match find_bound(n, leq, a, b, true) {
                    Some(j) => {
                        join[a][b] = j;
                        join[b][a] = j;
                    }
                    None => {
                        violations.push(Violation::NoJoin(a, b));
                        bounds_ok = false;
                    }
                }
            }
        }
    }
    if bounds_ok && n > 0 {
        let claims_distributive = spec.tags.distributive || spec.tags.boolean;
        if claims_distributive {
            if let Some((a, b, c)) = distributivity_witness(n, &meet, &join) {
                violations.push(Violation::NotDistributive(a, b, c));
            }
        }
        if spec.tags.boolean {
            let bottom = (0..n).find(|&x| (0..n).all(|y| leq[x][y])).unwrap_or(0);
            let top = (0..n).find(|&x| (0..n).all(|y| leq[y][x])).unwrap_or(0);
            for a in 0..n {
                let has = (0..n).any(|b| meet[a][b] == bottom && join[a][b] == top);
                if !has {
                    violations.push(Violation::NoComplement(a));
                }
            }
        }
    }
    ValidationReport {
        name: spec.name.clone(),
        violations,
        names: spec.elems.clone(),
    }
}

fn distributivity_witness(n: usize, meet: &[Vec<Elem>], join: &[Vec<Elem>]) -> Option<(Elem, Elem, Elem)> {
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let lhs = meet[a][join[b][c]];
                let rhs = join[meet[a][b]][meet[a][c]];
                if lhs != rhs {
                    return Some((a, b, c));
                }
            }
        }
    }
    None
}

/// A validated finite bounded lattice with cached meets and joins.
#[derive(Clone, PartialEq, Eq)]
pub struct FinLattice {
    name: String,
    elems: Vec<String>,
    leq: Vec<Vec<bool>>,
    meet: Vec<Vec<Elem>>,
    join: Vec<Vec<Elem>>,
    bottom: Elem,
    top: Elem,
    distributive: bool,
    boolean: bool,
    fingerprint: u64,
}

impl fmt::Debug for FinLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FinLattice")
            .field("name", &self.name)
            .field("elems", &self.elems)
            .finish()
    }
}

impl FinLattice {
    /// Builds a lattice, rejecting the input if it fails validation
    /// (including any claimed tag).
    pub fn new(spec: LatticeSpec) -> Result<Self, LatticeError> {
        let report = validate(&spec);
        if let Some(v) = report.violations.into_iter().next() {
            return Err(LatticeError::Invalid { name: spec.name, violation: v });
        }
        let n = spec.elems.len();
        let leq = spec.leq;
        let mut meet = vec![vec![0; n]; n];
        let mut join = vec![vec![0; n]; n];
        for a in 0..n {
            for b in 0..n {
                meet[a][b] = find_bound(n, &leq, a, b, false).expect("validated");
                join[a][b] = find_bound(n, &leq, a, b, true).expect("validated");
            }
        }
        let bottom = (0..n).find(|&x| (0..n).all(|y| leq[x][y])).expect("validated");
        let top = (0..n).find(|&x| (0..n).all(|y| leq[y][x])).expect("validated");
        let distributive = distributivity_witness(n, &meet, &join).is_none();
        let boolean = distributive && (0..n).all(|a| (0..n).any(|b| meet[a][b] == bottom && join[a][b] == top));
        let mut hasher = DefaultHasher::new();
        leq.hash(&mut hasher);
        Ok(FinLattice {
            name: spec.name,
            elems: spec.elems,
            leq,
            meet,
            join,
            bottom,
            top,
            distributive,
            boolean,
            fingerprint: hasher.finish(),
        })
    }

    /// Builds a lattice from an order predicate on `0..names.len()`.
    pub fn from_order(
        name: impl Into<String>,
        names: Vec<String>,
        leq: impl Fn(usize, usize) -> bool,
    ) -> Result<Self, LatticeError> {
        let n = names.len();
        let table = (0..n).map(|a| (0..n).map(|b| leq(a, b)).collect()).collect();
        FinLattice::new(LatticeSpec {
            name: name.into(),
            elems: names,
            leq: table,
            tags: Tags::default(),
        })
    }

    /// The chain `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Self {
        let names = (0..n).map(|i| format!("c{i}")).collect();
        FinLattice::from_order(format!("chain{n}"), names, |a, b| a <= b).expect("chains are lattices")
    }

    /// The powerset of an `n`-element set, elements indexed by bitmask.
    pub fn powerset(n: usize) -> Self {
        let names = (0..1usize << n)
            .map(|m| {
                let bits: Vec<String> = (0..n).filter(|i| m >> i & 1 == 1).map(|i| i.to_string()).collect();
                format!("{{{}}}", bits.join(","))
            })
            .collect();
        FinLattice::from_order(format!("powerset{n}"), names, |a, b| a & !b == 0).expect("powersets are lattices")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elems(&self) -> impl Iterator<Item = Elem> {
        0..self.elems.len()
    }

    pub fn elem_name(&self, e: Elem) -> &str {
        &self.elems[e]
    }

    pub fn names(&self) -> &[String] {
        &self.elems
    }

    pub fn index_of(&self, name: &str) -> Result<Elem, LatticeError> {
        self.elems
            .iter()
            .position(|e| e == name)
            .ok_or_else(|| LatticeError::UnknownElement(name.to_string()))
    }

    pub fn leq(&self, a: Elem, b: Elem) -> bool {
        self.leq[a][b]
    }

    pub fn meet(&self, a: Elem, b: Elem) -> Elem {
        self.meet[a][b]
    }

    pub fn join(&self, a: Elem, b: Elem) -> Elem {
        self.join[a][b]
    }

    pub fn meet_all(&self, items: impl IntoIterator<Item = Elem>) -> Elem {
        items.into_iter().fold(self.top, |acc, e| self.meet(acc, e))
    }

    pub fn join_all(&self, items: impl IntoIterator<Item = Elem>) -> Elem {
        items.into_iter().fold(self.bottom, |acc, e| self.join(acc, e))
    }

    pub fn bottom(&self) -> Elem {
        self.bottom
    }

    pub fn top(&self) -> Elem {
        self.top
    }

    pub fn is_distributive(&self) -> bool {
        self.distributive
    }

    pub fn is_boolean(&self) -> bool {
        self.boolean
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Some complement of `a`, if one exists.
    pub fn complement(&self, a: Elem) -> Option<Elem> {
        self.elems()
            .find(|&b| self.meet(a, b) == self.bottom && self.join(a, b) == self.top)
    }

    /// Elements `a != bottom` such that `a = b v c` forces `a = b` or `a = c`.
    pub fn join_irreducibles(&self) -> Vec<Elem> {
        self.elems()
            .filter(|&a| a != self.bottom)
            .filter(|&a| {
                let below: Vec<Elem> = self.elems().filter(|&b| b != a && self.leq(b, a)).collect();
                self.join_all(below.iter().copied()) != a
            })
            .collect()
    }

    /// Minimal non-bottom elements.
    pub fn atoms(&self) -> Vec<Elem> {
        self.elems()
            .filter(|&a| a != self.bottom)
            .filter(|&a| self.elems().all(|b| b == a || b == self.bottom || !self.leq(b, a)))
            .collect()
    }

    /// The principal up-set of `a`.
    pub fn up_set(&self, a: Elem) -> Vec<Elem> {
        self.elems().filter(|&b| self.leq(a, b)).collect()
    }

    /// The interval `[bottom, x]` as a lattice of its own, with the
    /// embedding back into `self`.
    pub fn down_interval(&self, x: Elem) -> SubLatticeView {
        let embed: Vec<Elem> = self.elems().filter(|&u| self.leq(u, x)).collect();
        let names = embed.iter().map(|&u| self.elems[u].clone()).collect();
        let lattice = FinLattice::from_order(format!("{}[{}]", self.name, self.elems[x]), names, |a, b| {
            self.leq(embed[a], embed[b])
        })
        .expect("intervals of lattices are lattices");
        SubLatticeView { lattice, embed }
    }

    /// Emits the lattice in the text input format (covering pairs only).
    pub fn to_text(&self) -> String {
        let mut out = format!("lattice {}", self.name);
        if self.distributive {
            out.push_str(" distributive");
        }
        if self.boolean {
            out.push_str(" boolean");
        }
        out.push('\n');
        for e in &self.elems {
            out.push_str(e);
            out.push('\n');
        }
        for a in self.elems() {
            for b in self.elems() {
                if self.covers(a, b) {
                    out.push_str(&format!("{} < {}\n", self.elems[a], self.elems[b]));
                }
            }
        }
        out
    }

    /// `a < b` with nothing strictly between.
    pub fn covers(&self, a: Elem, b: Elem) -> bool {
        a != b
            && self.leq(a, b)
            && !self
                .elems()
                .any(|c| c != a && c != b && self.leq(a, c) && self.leq(c, b))
    }
}

/// A lattice carved out of another one, with the inclusion map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubLatticeView {
    pub lattice: FinLattice,
    /// `embed[i]` is the element of the ambient lattice that `i` stands for.
    pub embed: Vec<Elem>,
}

impl SubLatticeView {
    pub fn local_index(&self, ambient: Elem) -> Option<Elem> {
        self.embed.iter().position(|&e| e == ambient)
    }
}

/// What a filter is known to be.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FilterKind {
    Filter,
    Prime,
    Ultra,
}

/// A proper filter stored as a sorted element set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Filter {
    lattice: u64,
    members: Vec<Elem>,
    kind: FilterKind,
}

impl Filter {
    /// Checks the filter axioms on `members` and classifies the result.
    pub fn from_members(lattice: &FinLattice, members: impl IntoIterator<Item = Elem>) -> Option<Filter> {
        let mut members: Vec<Elem> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        if !is_proper_filter(lattice, &members) {
            return None;
        }
        let kind = if is_prime(lattice, &members) {
            if lattice.is_boolean() {
                FilterKind::Ultra
            } else {
                FilterKind::Prime
            }
        } else {
            FilterKind::Filter
        };
        Some(Filter {
            lattice: lattice.fingerprint(),
            members,
            kind,
        })
    }

    /// The principal filter on `a`, or `None` when `a` is the bottom.
    pub fn principal(lattice: &FinLattice, a: Elem) -> Option<Filter> {
        Filter::from_members(lattice, lattice.up_set(a))
    }

    pub fn members(&self) -> &[Elem] {
        &self.members
    }

    pub fn contains(&self, e: Elem) -> bool {
        self.members.binary_search(&e).is_ok()
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn lattice_fingerprint(&self) -> u64 {
        self.lattice
    }

    pub fn is_on(&self, lattice: &FinLattice) -> bool {
        self.lattice == lattice.fingerprint()
    }

    /// The least member (every filter on a finite lattice is principal).
    pub fn generator(&self, lattice: &FinLattice) -> Elem {
        lattice.meet_all(self.members.iter().copied())
    }

    pub fn is_subset_of(&self, other: &Filter) -> bool {
        self.members.iter().all(|&e| other.contains(e))
    }

    /// Renders member names as `{a,b}`.
    pub fn render(&self, lattice: &FinLattice) -> String {
        let names: Vec<&str> = self.members.iter().map(|&e| lattice.elem_name(e)).collect();
        format!("{{{}}}", names.join(","))
    }
}

fn is_proper_filter(l: &FinLattice, members: &[Elem]) -> bool {
    let has = |e: Elem| members.binary_search(&e).is_ok();
    if members.is_empty() || has(l.bottom()) || !has(l.top()) {
        return false;
    }
    for &a in members {
        if !l.elems().filter(|&b| l.leq(a, b)).all(has) {
            return false;
        }
        if !members.iter().all(|&b| has(l.meet(a, b))) {
            return false;
        }
    }
    true
}

fn is_prime(l: &FinLattice, members: &[Elem]) -> bool {
    let has = |e: Elem| members.binary_search(&e).is_ok();
    l.elems()
        .all(|a| l.elems().all(|b| !has(l.join(a, b)) || has(a) || has(b)))
}

fn canonical_order(filters: &mut [Filter]) {
    filters.sort_by(|a, b| a.members.len().cmp(&b.members.len()).then_with(|| a.members.cmp(&b.members)));
}

/// All prime filters of a distributive lattice, smallest first.
///
/// A one-element lattice has none.
pub fn prime_filters(l: &FinLattice) -> Result<Vec<Filter>, LatticeError> {
    if !l.is_distributive() {
        return Err(LatticeError::NotDistributive(l.name().to_string()));
    }
    let mut out: Vec<Filter> = l
        .join_irreducibles()
        .into_iter()
        .filter_map(|j| Filter::principal(l, j))
        .collect();
    canonical_order(&mut out);
    Ok(out)
}

/// All ultrafilters of a Boolean algebra; one per atom.
pub fn ultrafilters(b: &FinLattice) -> Result<Vec<Filter>, LatticeError> {
    if !b.is_boolean() {
        return Err(LatticeError::NotBoolean(b.name().to_string()));
    }
    let mut out: Vec<Filter> = b
        .atoms()
        .into_iter()
        .filter_map(|a| Filter::principal(b, a))
        .collect();
    canonical_order(&mut out);
    Ok(out)
}

/// The Boolean algebra of elements below `x` that have a complement
/// inside `[bottom, x]`.
pub fn complemented_sublattice(l: &FinLattice, x: Elem) -> SubLatticeView {
    let bottom = l.bottom();
    let embed: Vec<Elem> = l
        .elems()
        .filter(|&u| l.leq(u, x))
        .filter(|&u| {
            l.elems()
                .any(|w| l.leq(w, x) && l.meet(u, w) == bottom && l.join(u, w) == x)
        })
        .collect();
    let names = embed.iter().map(|&u| l.elem_name(u).to_string()).collect();
    let lattice = FinLattice::from_order(format!("{}~[{}]", l.name(), l.elem_name(x)), names, |a, b| {
        l.leq(embed[a], embed[b])
    })
    .expect("complemented elements of an interval form a lattice");
    SubLatticeView { lattice, embed }
}

/// Checks that `preimg : target -> source` preserves top and binary meets.
pub fn check_meet_preserving(preimg: &[Elem], source: &FinLattice, target: &FinLattice) -> Result<(), LatticeError> {
    if preimg.len() != target.len() {
        return Err(LatticeError::NotMeetPreserving("arity".into()));
    }
    if preimg[target.top()] != source.top() {
        return Err(LatticeError::NotMeetPreserving("top".into()));
    }
    for a in target.elems() {
        for b in target.elems() {
            if preimg[target.meet(a, b)] != source.meet(preimg[a], preimg[b]) {
                return Err(LatticeError::NotMeetPreserving(format!(
                    "meet of {} and {}",
                    target.elem_name(a),
                    target.elem_name(b)
                )));
            }
        }
    }
    Ok(())
}

/// Whether `preimg` preserves bottom and binary joins.
pub fn is_join_preserving(preimg: &[Elem], source: &FinLattice, target: &FinLattice) -> bool {
    preimg[target.bottom()] == source.bottom()
        && target
            .elems()
            .all(|a| target.elems().all(|b| preimg[target.join(a, b)] == source.join(preimg[a], preimg[b])))
}

/// `f_! p = { v : preimg(v) in p }`.
pub fn pushforward(
    preimg: &[Elem],
    source: &FinLattice,
    target: &FinLattice,
    p: &Filter,
) -> Result<Filter, LatticeError> {
    if !p.is_on(source) {
        return Err(LatticeError::LatticeMismatch);
    }
    check_meet_preserving(preimg, source, target)?;
    let members = target.elems().filter(|&v| p.contains(preimg[v]));
    let raw: Vec<Elem> = members.collect();
    if raw.contains(&target.bottom()) {
        return Err(LatticeError::Improper);
    }
    Filter::from_members(target, raw).ok_or(LatticeError::Improper)
}

/// Whether `p` and `q` jointly have the finite intersection property.
pub fn compatible(l: &FinLattice, p: &Filter, q: &Filter) -> Result<bool, LatticeError> {
    if !p.is_on(l) || !q.is_on(l) {
        return Err(LatticeError::LatticeMismatch);
    }
    Ok(l.meet(p.generator(l), q.generator(l)) != l.bottom())
}

/// Union of an ascending chain of filters; on a finite lattice this is the
/// largest member of the chain.
pub fn chain_union(l: &FinLattice, chain: &[Filter]) -> Result<Filter, LatticeError> {
    let first = chain.first().ok_or(LatticeError::EmptyChain)?;
    if chain.iter().any(|p| !p.is_on(l)) {
        return Err(LatticeError::LatticeMismatch);
    }
    for p in chain {
        for q in chain {
            if !p.is_subset_of(q) && !q.is_subset_of(p) {
                return Err(LatticeError::NotAChain);
            }
        }
    }
    let members = chain.iter().flat_map(|p| p.members.iter().copied());
    let mut union = Filter::from_members(l, members).expect("a union of a chain of proper filters is a proper filter");
    if chain.iter().all(|p| p.kind != FilterKind::Filter) {
        union.kind = union.kind.max(first.kind);
    }
    Ok(union)
}

/// Parses the lattice text format.
///
/// ```text
/// lattice diamond distributive
/// bot
/// a
/// top
/// bot < a
/// a < top
/// ```
///
/// Element lines hold a single name; cover lines read `a < b`. The order is
/// the reflexive-transitive closure of the cover pairs.
pub fn parse_lattice(input: &str) -> Result<LatticeSpec, ParseError> {
    let lines = text::lines(input);
    let header = lines.first().ok_or_else(|| ParseError::new(1, 1, "empty lattice file"))?;
    if header.word(0) != Some("lattice") {
        return Err(ParseError::at(header, 0, "expected `lattice <name>` header"));
    }
    let name = header.expect(1, "lattice name")?.to_string();
    let mut tags = Tags::default();
    for i in 2..header.tokens.len() {
        match header.word(i) {
            Some("distributive") => tags.distributive = true,
            Some("boolean") => tags.boolean = true,
            Some(other) => return Err(ParseError::at(header, i, format!("unknown tag `{other}`"))),
            None => {}
        }
    }
    let mut elems: Vec<String> = Vec::new();
    let mut pairs = Vec::new();
    for line in &lines[1..] {
        match line.tokens.len() {
            1 => {
                let e = line.tokens[0].text;
                if elems.iter().any(|x| x == e) {
                    return Err(ParseError::at(line, 0, format!("duplicate element `{e}`")));
                }
                elems.push(e.to_string());
            }
            3 if line.word(1) == Some("<") => {
                let lookup = |i: usize| -> Result<usize, ParseError> {
                    let w = line.tokens[i].text;
                    elems
                        .iter()
                        .position(|x| x == w)
                        .ok_or_else(|| ParseError::at(line, i, format!("unknown element `{w}`")))
                };
                pairs.push((lookup(0)?, lookup(2)?));
            }
            _ => return Err(ParseError::at(line, 0, "expected an element name or `a < b`")),
        }
    }
    let n = elems.len();
    let mut leq = vec![vec![false; n]; n];
    for (i, row) in leq.iter_mut().enumerate() {
        row[i] = true;
    }
    for (a, b) in pairs {
        leq[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if leq[i][k] {
                for j in 0..n {
                    if leq[k][j] {
                        leq[i][j] = true;
                    }
                }
            }
        }
    }
    Ok(LatticeSpec { name, elems, leq, tags })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(text: &str) -> LatticeSpec {
        parse_lattice(text).unwrap()
    }

    const CHAIN3: &str = "lattice c3 distributive\nbot\nm\ntop\nbot < m\nm < top\n";
    const SQUARE: &str = "lattice sq boolean\nbot\na\nb\ntop\nbot < a\nbot < b\na < top\nb < top\n";
    const M3: &str = "lattice m3 distributive\nbot\na\nb\nc\ntop\nbot < a\nbot < b\nbot < c\na < top\nb < top\nc < top\n";

    #[test]
    fn validates_chain_and_square() {
        assert!(validate(&spec(CHAIN3)).is_valid());
        assert!(validate(&spec(SQUARE)).is_valid());
    }

    #[test]
    fn diamond_is_not_distributive() {
        let r = validate(&spec(M3));
        assert_eq!(r.violations, vec![Violation::NotDistributive(1, 2, 3)]);
        let rendered = r.to_report().render();
        assert!(rendered.contains("violation=distributivity a,b,c"));
    }

    #[test]
    fn chain_is_not_boolean() {
        let mut s = spec(CHAIN3);
        s.tags.boolean = true;
        let r = validate(&s);
        assert_eq!(r.violations, vec![Violation::NoComplement(1)]);
    }

    #[test]
    fn detects_missing_joins_and_cycles() {
        let r = validate(&spec("lattice v\nx\ny\n"));
        assert!(r.violations.iter().any(|v| matches!(v, Violation::NoMeet(0, 1))));
        let r = validate(&spec("lattice cyc\nx\ny\nx < y\ny < x\n"));
        assert_eq!(r.violations, vec![Violation::NotAntisymmetric(0, 1)]);
    }

    #[test]
    fn prime_filters_of_small_lattices() {
        let one = FinLattice::chain(1);
        assert!(prime_filters(&one).unwrap().is_empty());
        let c3 = FinLattice::new(spec(CHAIN3)).unwrap();
        let pf = prime_filters(&c3).unwrap();
        let rendered: Vec<String> = pf.iter().map(|p| p.render(&c3)).collect();
        assert_eq!(rendered, vec!["{top}", "{m,top}"]);
        let sq = FinLattice::new(spec(SQUARE)).unwrap();
        let rendered: Vec<String> = prime_filters(&sq).unwrap().iter().map(|p| p.render(&sq)).collect();
        assert_eq!(rendered, vec!["{a,top}", "{b,top}"]);
        let m3 = FinLattice::new(LatticeSpec { tags: Tags::default(), ..spec(M3) }).unwrap();
        assert!(matches!(prime_filters(&m3), Err(LatticeError::NotDistributive(_))));
    }

    #[test]
    fn ultrafilters_count_atoms() {
        assert!(ultrafilters(&FinLattice::chain(1)).unwrap().is_empty());
        let two = FinLattice::chain(2);
        let u = ultrafilters(&two).unwrap();
        assert_eq!(u.len(), 1);
        assert_eq!(u[0].members(), &[1]);
        assert_eq!(ultrafilters(&FinLattice::powerset(3)).unwrap().len(), 3);
        assert!(ultrafilters(&FinLattice::chain(3)).is_err());
    }

    #[test]
    fn complemented_parts() {
        let c3 = FinLattice::new(spec(CHAIN3)).unwrap();
        let v = complemented_sublattice(&c3, 2);
        assert_eq!(v.embed, vec![0, 2]);
        assert!(v.lattice.is_boolean());
        let sq = FinLattice::powerset(2);
        assert_eq!(complemented_sublattice(&sq, 3).embed, vec![0, 1, 2, 3]);
        assert_eq!(complemented_sublattice(&sq, 1).embed, vec![0, 1]);
    }

    #[test]
    fn pushforward_examples() {
        let sq = FinLattice::powerset(2);
        let p = Filter::principal(&sq, 1).unwrap();
        let id: Vec<Elem> = sq.elems().collect();
        assert_eq!(pushforward(&id, &sq, &sq, &p).unwrap(), p);

        let two = FinLattice::chain(2);
        let pre = vec![sq.bottom(), sq.top()];
        let q = pushforward(&pre, &sq, &two, &p).unwrap();
        assert_eq!(q.members(), &[1]);

        let constant_top = vec![sq.top(), sq.top()];
        assert_eq!(pushforward(&constant_top, &sq, &two, &p), Err(LatticeError::Improper));

        let broken = vec![sq.bottom(), sq.bottom()];
        assert!(matches!(
            pushforward(&broken, &sq, &two, &p),
            Err(LatticeError::NotMeetPreserving(_))
        ));
    }

    #[test]
    fn compatibility() {
        let sq = FinLattice::powerset(2);
        let a = Filter::principal(&sq, 1).unwrap();
        let b = Filter::principal(&sq, 2).unwrap();
        assert!(compatible(&sq, &a, &a).unwrap());
        assert!(!compatible(&sq, &a, &b).unwrap());
        let c3 = FinLattice::chain(3);
        let top = Filter::principal(&c3, 2).unwrap();
        let mid = Filter::principal(&c3, 1).unwrap();
        assert!(compatible(&c3, &top, &mid).unwrap());
        assert_eq!(compatible(&c3, &top, &a), Err(LatticeError::LatticeMismatch));
    }

    #[test]
    fn chain_unions() {
        let c3 = FinLattice::chain(3);
        let top = Filter::principal(&c3, 2).unwrap();
        let mid = Filter::principal(&c3, 1).unwrap();
        assert_eq!(chain_union(&c3, &[top.clone()]).unwrap(), top);
        assert_eq!(chain_union(&c3, &[top.clone(), mid.clone()]).unwrap(), mid);
        let sq = FinLattice::powerset(2);
        let a = Filter::principal(&sq, 1).unwrap();
        let b = Filter::principal(&sq, 2).unwrap();
        assert_eq!(chain_union(&sq, &[a, b]), Err(LatticeError::NotAChain));
        assert_eq!(chain_union(&sq, &[]), Err(LatticeError::EmptyChain));
    }

    #[test]
    fn text_round_trip() {
        let c3 = FinLattice::new(spec(CHAIN3)).unwrap();
        let again = FinLattice::new(parse_lattice(&c3.to_text()).unwrap()).unwrap();
        assert_eq!(again.fingerprint(), c3.fingerprint());
        let err = parse_lattice("lattice x\na\na < b\n").unwrap_err();
        assert_eq!((err.line, err.column), (3, 5));
    }
}
