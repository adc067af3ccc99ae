//! Preservation certificates for functors on a scope of `C`, uniqueness of
//! the type transformation, and the search for a transformation between
//! weakly coherent functors that is not mono-cartesian.
//!
//! Every witness whose limit, union or pullback object falls outside the
//! scope is reported as skipped rather than passed.

use crate::category::{CatError, Mor, PresentedCategory, Scope};
use crate::functor::{nat_trans, FunctorEnumerator, NatTrans, SetFunctor};
use crate::report::{Check, CheckLog, Status, Verdict};
use crate::spectrum::{SpecError, Spectrum, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    Monos,
    Preimages,
    Unions,
    DisjointUnions,
    Lex,
    EffectiveEpis,
}

impl Property {
    pub fn as_str(self) -> &'static str {
        match self {
            Property::Monos => "monos",
            Property::Preimages => "preimages",
            Property::Unions => "unions",
            Property::DisjointUnions => "disjoint-unions",
            Property::Lex => "lex",
            Property::EffectiveEpis => "effective-epis",
        }
    }

    pub const ALL: [Property; 6] = [
        Property::Monos,
        Property::Preimages,
        Property::Unions,
        Property::DisjointUnions,
        Property::Lex,
        Property::EffectiveEpis,
    ];
}

/// Checks of one functor against one property.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub property: Property,
    pub log: CheckLog,
}

impl Certificate {
    pub fn holds(&self) -> bool {
        self.log.counts().fail == 0
    }
}

struct Ctx<'a> {
    c: &'a PresentedCategory,
    scope: &'a Scope,
    f: &'a SetFunctor,
}

impl Ctx<'_> {
    fn table(&self, m: &Mor) -> Option<&[usize]> {
        self.scope.mor_id(m).map(|i| self.f.actions[i].as_slice())
    }

    fn size(&self, x: crate::category::Obj) -> Option<usize> {
        self.scope.obj(x).map(|i| self.f.values[i])
    }

    fn image(&self, m: &Mor) -> Option<Vec<bool>> {
        let mut hit = vec![false; self.size(m.cod)?];
        for &b in self.table(m)? {
            hit[b] = true;
        }
        Some(hit)
    }
}

fn injective(t: &[usize]) -> bool {
    let mut s = t.to_vec();
    s.sort_unstable();
    s.windows(2).all(|w| w[0] != w[1])
}

fn push(log: &mut CheckLog, name: String, r: Result<Option<bool>, CatError>, witness: &str) -> Result<(), CatError> {
    match r {
        Ok(Some(true)) => log.push(Check::pass(name)),
        Ok(Some(false)) => log.push(Check::fail(name, witness)),
        Ok(None) => log.push(Check::skip(name, "witness outside the scope")),
        Err(e) if e.is_bound() => log.push(Check::skip(name, e.to_string())),
        Err(e) => return Err(e),
    }
    Ok(())
}

fn monos(x: &Ctx<'_>) -> Result<CheckLog, CatError> {
    let mut log = CheckLog::new();
    for m in &x.scope.mors {
        if x.c.is_mono(m) {
            let ok = injective(x.table(m).expect("scope morphism"));
            push(&mut log, format!("mono {}", x.c.morphism_name(m)), Ok(Some(ok)), "not injective")?;
        }
    }
    Ok(log)
}

fn preimages(x: &Ctx<'_>) -> Result<CheckLog, CatError> {
    let mut log = CheckLog::new();
    for v in &x.scope.mors {
        if !x.c.is_mono(v) || x.c.is_iso(v) {
            continue;
        }
        for f in x.scope.mors.iter().filter(|f| f.cod == v.cod) {
            let name = format!("preimage {} along {}", x.c.morphism_name(v), x.c.morphism_name(f));
            let r = x.c.pullback(f, v).map(|pb| {
                let back = x.table(&pb.legs[0])?;
                let image_v = x.image(v)?;
                let tf = x.table(f)?;
                let mut expected: Vec<usize> = (0..tf.len()).filter(|&b| image_v[tf[b]]).collect();
                let mut got = back.to_vec();
                got.sort_unstable();
                expected.sort_unstable();
                Some(injective(back) && got == expected)
            });
            push(&mut log, name, r, "pullback not preserved")?;
        }
    }
    Ok(log)
}

fn unions(x: &Ctx<'_>) -> Result<CheckLog, CatError> {
    let mut log = CheckLog::new();
    for &o in &x.scope.objects {
        let sub = x.c.sub_lattice(o)?;
        let l = &sub.lattice;
        let bottom = &sub.subs[l.bottom()].mono;
        let empty = x.image(bottom).map(|h| h.iter().all(|b| !b));
        push(&mut log, format!("empty union in {}", x.c.object_name(o)), Ok(empty), "bottom is inhabited")?;
        for u in 0..l.len() {
            for v in u + 1..l.len() {
                let w = l.join(u, v);
                let r = (|| {
                    let (iu, iv, iw) = (
                        x.image(&sub.subs[u].mono)?,
                        x.image(&sub.subs[v].mono)?,
                        x.image(&sub.subs[w].mono)?,
                    );
                    Some(iw.iter().zip(iu.iter().zip(&iv)).all(|(&a, (&b, &c))| a == (b || c)))
                })();
                let name = format!(
                    "union {} {} in {}",
                    l.elem_name(u),
                    l.elem_name(v),
                    x.c.object_name(o)
                );
                push(&mut log, name, Ok(r), "images do not join")?;
            }
        }
    }
    Ok(log)
}

fn disjoint_unions(x: &Ctx<'_>) -> Result<CheckLog, CatError> {
    let mut log = CheckLog::new();
    for &o in &x.scope.objects {
        let sub = x.c.sub_lattice(o)?;
        let l = &sub.lattice;
        let bottom = &sub.subs[l.bottom()].mono;
        let empty = x.image(bottom).map(|h| h.iter().all(|b| !b));
        push(&mut log, format!("initial in {}", x.c.object_name(o)), Ok(empty), "initial is inhabited")?;
        for u in 0..l.len() {
            for v in u + 1..l.len() {
                if l.meet(u, v) != l.bottom() || l.join(u, v) != l.top() {
                    continue;
                }
                let r = (|| {
                    let (mu, mv) = (&sub.subs[u].mono, &sub.subs[v].mono);
                    let (iu, iv) = (x.image(mu)?, x.image(mv)?);
                    let inj = injective(x.table(mu)?) && injective(x.table(mv)?);
                    Some(inj && iu.iter().zip(&iv).all(|(&a, &b)| a != b))
                })();
                let name = format!("sum {} {} in {}", l.elem_name(u), l.elem_name(v), x.c.object_name(o));
                push(&mut log, name, Ok(r), "not a disjoint union")?;
            }
        }
    }
    Ok(log)
}

fn lex(x: &Ctx<'_>) -> Result<CheckLog, CatError> {
    let mut log = CheckLog::new();
    let t = x.c.terminal().map(|t| x.size(t.apex).map(|n| n == 1));
    push(&mut log, "terminal".into(), t, "terminal not a singleton")?;
    let objs = &x.scope.objects;
    for (i, &a) in objs.iter().enumerate() {
        for &b in &objs[i..] {
            let name = format!("product {} {}", x.c.object_name(a), x.c.object_name(b));
            let r = x.c.product(a, b).map(|p| {
                let (ta, tb) = (x.table(&p.legs[0])?, x.table(&p.legs[1])?);
                let nb = x.size(b)?;
                let mut pairs: Vec<usize> = ta.iter().zip(tb).map(|(&s, &t)| s * nb + t).collect();
                pairs.sort_unstable();
                Some(pairs == (0..x.size(a)? * nb).collect::<Vec<_>>())
            });
            push(&mut log, name, r, "not a product")?;
        }
    }
    for (i, f) in x.scope.mors.iter().enumerate() {
        for g in &x.scope.mors[i + 1..] {
            if f.dom != g.dom || f.cod != g.cod {
                continue;
            }
            let name = format!("equalizer {} {}", x.c.morphism_name(f), x.c.morphism_name(g));
            let r = x.c.equalizer(f, g).map(|e| {
                let te = x.table(&e.legs[0])?;
                let (tf, tg) = (x.table(f)?, x.table(g)?);
                let expected: Vec<usize> = (0..tf.len()).filter(|&a| tf[a] == tg[a]).collect();
                let mut got = te.to_vec();
                got.sort_unstable();
                Some(injective(te) && got == expected)
            });
            push(&mut log, name, r, "not an equalizer")?;
        }
    }
    Ok(log)
}

fn effective_epis(x: &Ctx<'_>) -> Result<CheckLog, CatError> {
    let mut log = CheckLog::new();
    for m in &x.scope.mors {
        if x.c.is_effective_epi(m)? {
            let ok = x.image(m).map(|h| h.iter().all(|&b| b));
            push(&mut log, format!("effective-epi {}", x.c.morphism_name(m)), Ok(ok), "not surjective")?;
        }
    }
    Ok(log)
}

pub fn certify(c: &PresentedCategory, scope: &Scope, f: &SetFunctor, property: Property) -> Result<Certificate, CatError> {
    let x = Ctx { c, scope, f };
    let log = match property {
        Property::Monos => monos(&x)?,
        Property::Preimages => preimages(&x)?,
        Property::Unions => unions(&x)?,
        Property::DisjointUnions => disjoint_unions(&x)?,
        Property::Lex => lex(&x)?,
        Property::EffectiveEpis => effective_epis(&x)?,
    };
    Ok(Certificate { property, log })
}

pub fn preservation_suite(c: &PresentedCategory, scope: &Scope, f: &SetFunctor) -> Result<Vec<Certificate>, CatError> {
    Property::ALL.iter().map(|&p| certify(c, scope, f, p)).collect()
}

/// Monos, preimages and finite unions.
pub fn is_weakly_coherent(c: &PresentedCategory, scope: &Scope, f: &SetFunctor) -> Result<bool, CatError> {
    for p in [Property::Monos, Property::Preimages, Property::Unions] {
        if !certify(c, scope, f, p)?.holds() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Lex and finite unions.
pub fn is_coherent_on_scope(c: &PresentedCategory, scope: &Scope, f: &SetFunctor) -> Result<bool, CatError> {
    Ok(certify(c, scope, f, Property::Lex)?.holds() && certify(c, scope, f, Property::Unions)?.holds())
}

/// The certificate `tilde` needs for a variant.
pub fn has_variant_certificate(
    c: &PresentedCategory,
    scope: &Scope,
    f: &SetFunctor,
    variant: Variant,
) -> Result<bool, CatError> {
    match variant {
        Variant::Ultra => Ok(certify(c, scope, f, Property::DisjointUnions)?.holds()
            && certify(c, scope, f, Property::Monos)?.holds()),
        Variant::Prime => is_weakly_coherent(c, scope, f),
    }
}

/// Among all transformations into the type-space functor, exactly one is
/// cartesian at the variant's monos, and it is `tp`.
pub fn tp_uniqueness(spec: &Spectrum<'_>, scope: &Scope, f: &SetFunctor) -> Result<Verdict, SpecError> {
    let (sf, _) = spec.type_space_functor(scope)?;
    let tp = spec.tp_transformation(scope, f)?;
    let mut cartesian = Vec::new();
    let all = nat_trans(&scope.cat, f, &sf);
    for alpha in &all {
        if spec.cartesian_check(scope, f, &sf, alpha)?.holds {
            cartesian.push(alpha);
        }
    }
    Ok(match cartesian.as_slice() {
        [one] if **one == tp => Verdict::yes(),
        [_] => Verdict::no("the unique cartesian transformation is not tp"),
        other => Verdict::no(format!("{} cartesian among {} transformations", other.len(), all.len())),
    })
}

/// A transformation between weakly coherent functors that is not
/// mono-cartesian.
#[derive(Debug, Clone)]
pub struct ConverseWitness {
    pub from: SetFunctor,
    pub to: SetFunctor,
    pub alpha: NatTrans,
    pub square: String,
}

/// Outcome of the bounded search.
#[derive(Debug, Clone)]
pub enum ConverseSearch {
    Found(ConverseWitness),
    Exhausted { functors: usize, pairs: usize },
}

/// Searches weakly coherent pairs with values at most `bound`, in
/// enumeration order.
pub fn search_converse(c: &PresentedCategory, scope: &Scope, bound: usize) -> Result<ConverseSearch, SpecError> {
    let spec = Spectrum::new(c, Variant::Prime);
    let coherent: Vec<SetFunctor> = FunctorEnumerator::new(&scope.cat, bound)
        .filter_map(|f| match is_weakly_coherent(c, scope, &f) {
            Ok(true) => Some(Ok(f)),
            Ok(false) => None,
            Err(e) => Some(Err(e)),
        })
        .collect::<Result<_, _>>()?;
    let mut pairs = 0;
    for from in &coherent {
        for to in &coherent {
            for alpha in nat_trans(&scope.cat, from, to) {
                pairs += 1;
                let v = spec.cartesian_check(scope, from, to, &alpha)?;
                if !v.holds {
                    return Ok(ConverseSearch::Found(ConverseWitness {
                        from: from.clone(),
                        to: to.clone(),
                        alpha,
                        square: v.witness.unwrap_or_default(),
                    }));
                }
            }
        }
    }
    Ok(ConverseSearch::Exhausted {
        functors: coherent.len(),
        pairs,
    })
}

pub fn status_of(cert: &Certificate) -> Status {
    let counts = cert.log.counts();
    if counts.fail > 0 {
        Status::Fail
    } else if counts.pass == 0 && counts.skip_bound > 0 {
        Status::SkipBound
    } else {
        Status::Pass
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::FinLattice;
    use crate::transport::tests::points;

    #[test]
    fn points_functor_is_weakly_coherent_but_not_lex() {
        let c = PresentedCategory::lattice(FinLattice::powerset(2));
        let scope = c.scope(&c.objects()).unwrap();
        let f = points(&scope);
        for cert in preservation_suite(&c, &scope, &f).unwrap() {
            assert_eq!(cert.holds(), cert.property != Property::Lex, "{:?}", cert.property);
        }
        let up_a = SetFunctor {
            values: vec![0, 1, 0, 1],
            actions: scope
                .mors
                .iter()
                .map(|m| if [1, 3].contains(&m.dom) { vec![0] } else { vec![] })
                .collect(),
        };
        up_a.validate(&scope.cat).unwrap();
        assert!(is_coherent_on_scope(&c, &scope, &up_a).unwrap());
        assert!(is_weakly_coherent(&c, &scope, &up_a).unwrap());
    }

    #[test]
    fn collapsing_a_union_breaks_weak_coherence() {
        let c = PresentedCategory::lattice(FinLattice::powerset(2));
        let scope = c.scope(&c.objects()).unwrap();
        // F(top) = {s, t, u} would be needed to fail unions; use F(a) = F(b) = {}.
        let values = vec![0, 0, 0, 1];
        let actions = scope
            .mors
            .iter()
            .map(|m| if m.dom == m.cod { (0..values[m.dom]).collect() } else { vec![] })
            .collect();
        let f = SetFunctor { values, actions };
        f.validate(&scope.cat).unwrap();
        let cert = certify(&c, &scope, &f, Property::Unions).unwrap();
        assert!(!cert.holds());
        assert!(cert.log.failures().any(|c| c.name.starts_with("union")));
    }

    #[test]
    fn constants_are_lex_and_keep_effective_epis() {
        let c = PresentedCategory::finsets(4);
        let scope = c.scope(&[1, 2]).unwrap();
        let one = SetFunctor::constant(&scope.cat, 1);
        assert!(certify(&c, &scope, &one, Property::Lex).unwrap().holds());
        assert!(certify(&c, &scope, &one, Property::EffectiveEpis).unwrap().holds());
        let cert = certify(&c, &scope, &one, Property::Lex).unwrap();
        assert!(cert.log.counts().skip_bound > 0);
    }

    #[test]
    fn chain_has_a_non_cartesian_transformation() {
        let c = PresentedCategory::lattice(FinLattice::chain(3));
        let scope = c.scope(&c.objects()).unwrap();
        match search_converse(&c, &scope, 1).unwrap() {
            ConverseSearch::Found(w) => {
                assert_eq!(w.from.values, vec![0, 0, 1]);
                assert_eq!(w.to.values, vec![0, 1, 1]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tp_is_the_only_cartesian_transformation() {
        let c = PresentedCategory::lattice(FinLattice::chain(3));
        let scope = c.scope(&c.objects()).unwrap();
        let spec = Spectrum::new(&c, Variant::Prime);
        let mut checked = 0;
        for f in FunctorEnumerator::new(&scope.cat, 2) {
            if is_weakly_coherent(&c, &scope, &f).unwrap() {
                checked += 1;
                let v = tp_uniqueness(&spec, &scope, &f).unwrap();
                assert!(v.holds, "{:?} {:?}", f.values, v.witness);
            }
        }
        assert!(checked > 1);
    }
}
