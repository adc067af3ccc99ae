//! The functor `phi0` from `C` to presheaves on a spectrum site, its
//! preservation checks, and the comparison of the two topologies.
//!
//! `phi0(y)` sends a site object `(x, p)` to the germs of maps `x -> y` at
//! `p`, which in normal form are the maps `core(p) -> y`; restriction along a
//! germ is precomposition with its core map.

use crate::category::{CatError, Mor, Obj};
use crate::coverage::{self, CoverageError, FamilyKind};
use crate::finite::FiniteCategory;
use crate::functor::{FunctorEnumerator, SetFunctor};
use crate::report::{Check, CheckLog, Status};
use crate::sheaf::{self, Presheaf, SheafError};
use crate::sieve::Topology;
use crate::spectrum::SpecSite;

/// `phi0(y)` with the map behind every element.
#[derive(Debug, Clone)]
pub struct Phi0 {
    pub y: Obj,
    pub presheaf: Presheaf,
    pub elements: Vec<Vec<Mor>>,
}

impl Phi0 {
    pub fn index(&self, c: usize, h: &Mor) -> Option<usize> {
        self.elements[c].iter().position(|e| e == h)
    }
}

pub fn phi0(site: &SpecSite, y: Obj) -> Result<Phi0, CatError> {
    let elements: Vec<Vec<Mor>> = site
        .objects
        .iter()
        .map(|o| site.c.hom(o.core, y))
        .collect::<Result<_, _>>()?;
    let mut actions = Vec::new();
    for (m, g) in site.germs.iter().enumerate() {
        let d = site.cat.dom(m);
        let table = elements[site.cat.cod(m)]
            .iter()
            .map(|h| {
                let back = site.c.compose(h, &g.core)?;
                Ok(elements[d].iter().position(|e| *e == back).expect("hom is complete"))
            })
            .collect::<Result<_, CatError>>()?;
        actions.push(table);
    }
    let presheaf = SetFunctor {
        values: elements.iter().map(Vec::len).collect(),
        actions,
    };
    Ok(Phi0 { y, presheaf, elements })
}

/// `phi0(f)` as components, `elements` of the source mapped by `f . -`.
pub fn phi0_map(site: &SpecSite, from: &Phi0, to: &Phi0, f: &Mor) -> Result<Vec<Vec<usize>>, CatError> {
    (0..site.objects.len())
        .map(|c| {
            from.elements[c]
                .iter()
                .map(|h| Ok(to.index(c, &site.c.compose(f, h)?).expect("hom is complete")))
                .collect()
        })
        .collect()
}

fn bound_or<T>(log: &mut CheckLog, name: &str, r: Result<T, CatError>) -> Result<Option<T>, CatError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(e) if e.is_bound() => {
            log.push(Check::skip(name, e.to_string()));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn is_bijection(table: &[usize], n: usize) -> bool {
    let mut seen = vec![false; n];
    table.len() == n && table.iter().all(|&v| v < n && !std::mem::replace(&mut seen[v], true))
}

/// Preservation of terminal object, binary products, equalizers and unions
/// by `phi0`, and of effective epis by its sheafification, over every
/// in-scope witness; out-of-bound witnesses are skipped.
pub fn check_phi_coherent(site: &SpecSite, top: &Topology) -> Result<CheckLog, CatError> {
    let c = &site.c;
    let n = site.objects.len();
    let mut log = CheckLog::new();

    if let Some(t) = bound_or(&mut log, "terminal", c.terminal())? {
        let p = phi0(site, t.apex)?;
        log.push(Check::new("terminal", Status::from_bool(p.presheaf.values.iter().all(|&v| v == 1)), ""));
    }

    let scope = &site.scope;
    for (i, &y1) in scope.iter().enumerate() {
        for &y2 in &scope[i..] {
            let name = format!("product {} {}", c.object_name(y1), c.object_name(y2));
            let Some(cone) = bound_or(&mut log, &name, c.product(y1, y2))? else {
                continue;
            };
            let (p, p1, p2) = (phi0(site, cone.apex)?, phi0(site, y1)?, phi0(site, y2)?);
            let mut ok = true;
            for o in 0..n {
                let pairs: Vec<usize> = p.elements[o]
                    .iter()
                    .map(|h| {
                        let a = p1.index(o, &c.compose(&cone.legs[0], h)?).expect("hom");
                        let b = p2.index(o, &c.compose(&cone.legs[1], h)?).expect("hom");
                        Ok(a * p2.elements[o].len() + b)
                    })
                    .collect::<Result<_, CatError>>()?;
                ok &= is_bijection(&pairs, p1.elements[o].len() * p2.elements[o].len());
            }
            log.push(Check::new(name, Status::from_bool(ok), ""));
        }
    }

    for &y in scope {
        for &z in scope {
            let hom = c.hom(y, z)?;
            let (py, mut equalizers, mut passed) = (phi0(site, y)?, 0usize, true);
            let mut skipped = None;
            for (a, f) in hom.iter().enumerate() {
                for g in &hom[a + 1..] {
                    let cone = match c.equalizer(f, g) {
                        Ok(cone) => cone,
                        Err(e) if e.is_bound() => {
                            skipped = Some(e.to_string());
                            continue;
                        }
                        Err(e) => return Err(e),
                    };
                    equalizers += 1;
                    let pe = phi0(site, cone.apex)?;
                    for o in 0..n {
                        let mut image: Vec<usize> = pe.elements[o]
                            .iter()
                            .map(|h| Ok(py.index(o, &c.compose(&cone.legs[0], h)?).expect("hom")))
                            .collect::<Result<_, CatError>>()?;
                        let mut expected = Vec::new();
                        for (k, h) in py.elements[o].iter().enumerate() {
                            if c.compose(f, h)? == c.compose(g, h)? {
                                expected.push(k);
                            }
                        }
                        let len = image.len();
                        image.sort_unstable();
                        image.dedup();
                        passed &= image.len() == len && image == expected;
                    }
                }
            }
            let name = format!("equalizers {} {}", c.object_name(y), c.object_name(z));
            match skipped {
                Some(why) => log.push(Check::skip(name, why)),
                None if equalizers > 0 => {
                    log.push(Check::new(name, Status::from_bool(passed), format!("pairs={equalizers}")))
                }
                None => {}
            }
        }
    }

    for &y in scope {
        let sub = c.sub_lattice(y)?;
        let py = phi0(site, y)?;
        let images: Vec<Vec<Vec<bool>>> = sub
            .subs
            .iter()
            .map(|s| {
                let pv = phi0(site, s.domain)?;
                (0..n)
                    .map(|o| {
                        let mut mark = vec![false; py.elements[o].len()];
                        for h in &pv.elements[o] {
                            mark[py.index(o, &c.compose(&s.mono, h)?).expect("hom")] = true;
                        }
                        Ok(mark)
                    })
                    .collect()
            })
            .collect::<Result<_, CatError>>()?;
        let l = &sub.lattice;
        let mut ok = true;
        for u in 0..l.len() {
            for v in u + 1..l.len() {
                let j = l.join(u, v);
                ok &= (0..n).all(|o| {
                    (0..py.elements[o].len()).all(|k| images[j][o][k] == (images[u][o][k] || images[v][o][k]))
                });
            }
        }
        log.push(Check::new(format!("unions {}", c.object_name(y)), Status::from_bool(ok), ""));
    }

    for &y in scope {
        for &z in scope {
            for f in c.hom(y, z)? {
                if !c.is_effective_epi(&f)? {
                    continue;
                }
                let (py, pz) = (phi0(site, y)?, phi0(site, z)?);
                let alpha = phi0_map(site, &py, &pz, &f)?;
                let v = sheaf::is_locally_surjective(&site.cat, top, &pz.presheaf, &alpha);
                let mut check = v.check(format!("effective-epi {}", c.morphism_name(&f)));
                if !top.is_determinate() && check.status == Status::Pass {
                    check.status = Status::Indeterminate;
                }
                log.push(check);
            }
        }
    }
    Ok(log)
}

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error(transparent)]
    Coverage(#[from] CoverageError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error(transparent)]
    Cat(#[from] CatError),
}

/// Search budget for the proper-embedding witness.
pub const EMBEDDING_SEARCH_BUDGET: usize = 20_000;

/// Compares the sheaves of the effective-epi topology with those of the
/// saturated one on the site.
pub fn embedding_check(site: &SpecSite) -> Result<CheckLog, EmbeddingError> {
    let kind = FamilyKind::for_variant(site.variant);
    let te = coverage::saturate_site(site, kind, false)?;
    let ts = coverage::saturate_site(site, FamilyKind::Sat, false)?;
    let cat = &site.cat;
    let mut log = coverage::compare_topologies(site)?;

    let mut fixtures: Vec<(String, Presheaf)> = cat
        .objects()
        .map(|o| (format!("representable {}", site.object_names[o]), sheaf::yoneda(cat, o)))
        .collect();
    fixtures.push(("terminal".into(), SetFunctor::constant(&cat.opposite(), 1)));
    for &y in &site.scope {
        fixtures.push((format!("phi0 {}", site.c.object_name(y)), phi0(site, y)?.presheaf));
    }
    for (name, p) in &fixtures {
        if name.starts_with("representable") {
            log.push(sheaf::is_sheaf(cat, &ts, p).check(format!("sat-sheaf {name}")));
        }
        if sheaf::is_sheaf(cat, &ts, p).holds {
            log.push(sheaf::is_sheaf(cat, &te, p).check(format!("{kind}-sheaf {name}")));
            log.push(recovers(cat, &te, p, &format!("{kind}-sheafification {name}"))?);
        }
    }

    let mut searched = 0usize;
    let mut witness = None;
    let op = cat.opposite();
    for p in FunctorEnumerator::new(&op, 2).take(EMBEDDING_SEARCH_BUDGET) {
        searched += 1;
        if sheaf::is_sheaf(cat, &te, &p).holds && !sheaf::is_sheaf(cat, &ts, &p).holds {
            witness = Some(sheaf::presheaf_to_text(cat, "witness", &p).replace('\n', ";"));
            break;
        }
    }
    let detail = match witness {
        Some(w) => format!("proper witness={w}"),
        None => format!("no proper witness among {searched} presheaves with values at most 2"),
    };
    log.push(Check::new("embedding-proper-search", Status::Pass, detail));
    Ok(log)
}

fn recovers(cat: &FiniteCategory, top: &Topology, p: &Presheaf, name: &str) -> Result<Check, SheafError> {
    let s = sheaf::sheafify(cat, top, p)?;
    Ok(Check::new(name, Status::from_bool(sheaf::is_iso_via(cat, p, &s.presheaf, &s.unit)), ""))
}

/// Connectedness of every sheafified representable; finite-site evidence
/// only.
pub fn connectedness_evidence(site: &SpecSite, top: &Topology) -> Result<CheckLog, SheafError> {
    let mut log = CheckLog::new();
    for o in site.cat.objects() {
        let s = sheaf::sheafify(&site.cat, top, &sheaf::yoneda(&site.cat, o))?;
        let name = format!("evidence connected {}", site.object_names[o]);
        if s.presheaf.total_size() == 0 {
            log.push(Check::fail(name, "empty"));
            continue;
        }
        log.push(sheaf::is_connected(&site.cat, top, &s.presheaf)?.check(name));
    }
    Ok(log)
}
