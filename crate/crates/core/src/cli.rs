//! Command-line front end: input loading, `KEY=VALUE` run configs, the
//! pipeline stages and report bundles.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::category::{self, CatError, Obj, PresentedCategory};
use crate::corpus::{self, CorpusError};
use crate::coverage::{self, CoverageError, FamilyKind};
use crate::functor::FunctorEnumerator;
use crate::lattice::{self, FinLattice};
use crate::phi::{self, EmbeddingError};
use crate::report::{Check, CheckLog, Counts, Report, Status};
use crate::sheaf::{self, SheafError};
use crate::spectrum::{self, SpecError, SpecSite, Spectrum, Variant};
use crate::text::ParseError;
use crate::transport::flat::{chain_condition, filtered_oracle, is_flat};
use crate::transport::harness::{self, check_budget, is_e_preserving, Bounds};
use crate::transport::preserve::{self, certify, ConverseSearch, Property};
use crate::transport::{adjunction_check, counit, hat, tilde, TransportError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Parse { path: String, source: ParseError },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Cat(#[from] CatError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error(transparent)]
    Coverage(#[from] CoverageError),
    #[error(transparent)]
    Sheaf(#[from] SheafError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

impl CliError {
    pub fn is_bound(&self) -> bool {
        match self {
            CliError::Cat(e) => e.is_bound(),
            CliError::Spec(e) => e.is_bound(),
            CliError::Coverage(e) | CliError::Embedding(EmbeddingError::Coverage(e)) => e.is_bound(),
            CliError::Sheaf(SheafError::Bound(..)) | CliError::Embedding(EmbeddingError::Sheaf(SheafError::Bound(..))) => true,
            CliError::Embedding(EmbeddingError::Cat(e)) => e.is_bound(),
            CliError::Transport(e) => e.is_bound() || matches!(e, TransportError::Budget { .. }),
            _ => false,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn parse_err(path: &str) -> impl FnOnce(ParseError) -> CliError + '_ {
    move |source| CliError::Parse {
        path: path.to_string(),
        source,
    }
}

/// A corpus name or a lattice or category file.
pub fn load_category(input: &str) -> Result<(PresentedCategory, Vec<Obj>), CliError> {
    if let Some(found) = corpus::category(input) {
        return Ok(found);
    }
    let text = read(Path::new(input))?;
    let is_lattice = text.split_whitespace().next() == Some("lattice");
    let c = if is_lattice {
        let spec = lattice::parse_lattice(&text).map_err(parse_err(input))?;
        PresentedCategory::lattice(FinLattice::new(spec).map_err(CatError::from)?)
    } else {
        category::parse_category(&text).map_err(parse_err(input))?
    };
    let objects = c.objects();
    Ok((c, objects))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Spec,
    Coverage,
    Sheaf,
    Adjunction,
    Equivalence,
    Flat,
    Preserve,
    Allthree,
    Predicates,
    Random,
}

impl Stage {
    pub const ALL: [Stage; 10] = [
        Stage::Spec,
        Stage::Coverage,
        Stage::Sheaf,
        Stage::Adjunction,
        Stage::Equivalence,
        Stage::Flat,
        Stage::Preserve,
        Stage::Allthree,
        Stage::Predicates,
        Stage::Random,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Spec => "spec",
            Stage::Coverage => "coverage",
            Stage::Sheaf => "sheaf",
            Stage::Adjunction => "adjunction",
            Stage::Equivalence => "equivalence",
            Stage::Flat => "flat",
            Stage::Preserve => "preserve",
            Stage::Allthree => "allthree",
            Stage::Predicates => "predicates",
            Stage::Random => "random",
        }
    }

    pub fn parse(s: &str) -> Option<Stage> {
        Stage::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

/// Everything a run depends on; rendered verbatim into every report header.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub input: String,
    pub variant: Variant,
    pub scope: Option<Vec<String>>,
    pub max_card: Option<usize>,
    pub bound: usize,
    pub budget: f64,
    pub kind: Option<FamilyKind>,
    pub checks: Vec<Stage>,
    pub seed: Option<u64>,
    pub pairs: usize,
    pub presheaf: Option<String>,
    pub experimental: bool,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(input: impl Into<String>) -> Self {
        RunConfig {
            input: input.into(),
            variant: Variant::Prime,
            scope: None,
            max_card: None,
            bound: 2,
            budget: 1e7,
            kind: None,
            checks: vec![Stage::Spec, Stage::Coverage, Stage::Sheaf],
            seed: None,
            pairs: 100,
            presheaf: None,
            experimental: false,
            out: None,
        }
    }

    fn bounds(&self) -> Bounds {
        Bounds {
            value: self.bound,
            budget: self.budget,
        }
    }

    pub fn header(&self) -> Report {
        let mut r = Report::new();
        r.push("input", &self.input);
        r.push("variant", self.variant);
        r.push("scope", self.scope.as_ref().map_or("all".into(), |s| s.join(",")));
        r.push("max_card", self.max_card.map_or("default".into(), |m| m.to_string()));
        r.push("bound", self.bound);
        r.push("budget", self.budget);
        r.push("kind", self.kind.map_or("default".into(), |k| k.to_string()));
        let checks: Vec<&str> = self.checks.iter().map(|s| s.as_str()).collect();
        r.push("checks", checks.join(","));
        r.push("seed", self.seed.map_or("none".into(), |s| s.to_string()));
        r.push("pairs", self.pairs);
        r.push("experimental", self.experimental);
        r
    }
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T, ParseError> {
    v.parse()
        .map_err(|_| ParseError::new(line, key.len() + 2, format!("bad value `{v}` for {key}")))
}

/// Reads a `KEY=VALUE` config; blank lines and lines starting with `#` are
/// ignored.
pub fn parse_config(text: &str) -> Result<RunConfig, ParseError> {
    let mut cfg = RunConfig::new("");
    let mut input = None;
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ParseError::new(n, 1, "expected KEY=VALUE"))?;
        let (key, value) = (key.trim(), value.trim());
        match key {
            "input" => input = Some(value.to_string()),
            "variant" => {
                cfg.variant = Variant::parse(value)
                    .ok_or_else(|| ParseError::new(n, key.len() + 2, format!("unknown variant `{value}`")))?
            }
            "scope" => cfg.scope = Some(value.split(',').map(|s| s.trim().to_string()).collect()),
            "max_card" => cfg.max_card = Some(parse_value(n, key, value)?),
            "bound" => cfg.bound = parse_value(n, key, value)?,
            "budget" => cfg.budget = parse_value(n, key, value)?,
            "kind" => {
                cfg.kind = Some(
                    FamilyKind::parse(value)
                        .ok_or_else(|| ParseError::new(n, key.len() + 2, format!("unknown kind `{value}`")))?,
                )
            }
            "checks" => {
                cfg.checks = value
                    .split(',')
                    .map(|s| {
                        Stage::parse(s.trim())
                            .ok_or_else(|| ParseError::new(n, key.len() + 2, format!("unknown check `{s}`")))
                    })
                    .collect::<Result<_, _>>()?
            }
            "seed" => cfg.seed = Some(parse_value(n, key, value)?),
            "pairs" => cfg.pairs = parse_value(n, key, value)?,
            "presheaf" => cfg.presheaf = Some(value.to_string()),
            "experimental" => cfg.experimental = parse_value(n, key, value)?,
            "out" => cfg.out = Some(PathBuf::from(value)),
            _ => return Err(ParseError::new(n, 1, format!("unknown key `{key}`"))),
        }
    }
    cfg.input = input.ok_or_else(|| ParseError::new(1, 1, "missing input"))?;
    Ok(cfg)
}

/// Category and scope after applying `max_card` and `scope`.
pub fn resolve(cfg: &RunConfig) -> Result<(PresentedCategory, Vec<Obj>), CliError> {
    let (mut c, mut objects) = load_category(&cfg.input)?;
    if let (Some(m), Some(_)) = (cfg.max_card, c.max_card()) {
        c = PresentedCategory::finsets(m);
        objects.retain(|&x| x <= m);
    }
    if let Some(names) = &cfg.scope {
        objects = names.iter().map(|n| c.object_id(n)).collect::<Result<_, _>>()?;
    }
    Ok((c, objects))
}

/// One stage's checks and the files it produced.
#[derive(Debug, Clone)]
pub struct StageOutput {
    pub stage: Stage,
    pub log: CheckLog,
    pub artifacts: Vec<(String, String)>,
}

fn absorb(stage: Stage, r: Result<StageOutput, CliError>) -> StageOutput {
    match r {
        Ok(out) => out,
        Err(e) => {
            let mut log = CheckLog::new();
            let name = format!("{} stage", stage.as_str());
            if e.is_bound() {
                log.push(Check::skip(name, e.to_string()));
            } else {
                log.push(Check::fail(name, e.to_string()));
            }
            StageOutput {
                stage,
                log,
                artifacts: Vec::new(),
            }
        }
    }
}

fn bound_skip<E: std::fmt::Display>(log: &mut CheckLog, name: &str, r: Result<CheckLog, E>, is_bound: impl Fn(&E) -> bool) -> Result<(), E> {
    match r {
        Ok(l) => log.extend(l),
        Err(e) if is_bound(&e) => log.push(Check::skip(name, e.to_string())),
        Err(e) => return Err(e),
    }
    Ok(())
}

fn spec_stage(cfg: &RunConfig, c: &PresentedCategory, objects: &[Obj]) -> Result<StageOutput, CliError> {
    let site = SpecSite::build(c, cfg.variant, objects)?;
    let mut log = CheckLog::new();
    log.push(Check::new(
        "site",
        Status::Pass,
        format!("objects={} germs={}", site.cat.num_objects(), site.cat.num_morphisms()),
    ));
    if let (category::Backend::Lattice(l), Variant::Prime) = (c.backend(), cfg.variant) {
        log.push(spectrum::lattice_duality(l)?.check("duality"));
    }
    let scope = c.scope(objects)?;
    let (s, _) = Spectrum::new(c, cfg.variant).type_space_functor(&scope)?;
    let props: &[Property] = match cfg.variant {
        Variant::Ultra => &[Property::DisjointUnions, Property::EffectiveEpis],
        Variant::Prime => &[Property::Monos, Property::Preimages, Property::Unions, Property::EffectiveEpis],
    };
    for &p in props {
        let cert = certify(c, &scope, &s, p)?;
        let status = preserve::status_of(&cert);
        let detail = cert.log.failures().next().map(|f| f.name.clone()).unwrap_or_default();
        log.push(Check::new(format!("type-space {}", p.as_str()), status, detail));
    }
    Ok(StageOutput {
        stage: Stage::Spec,
        log,
        artifacts: vec![("site.txt".into(), site.to_text())],
    })
}

fn kind_of(cfg: &RunConfig) -> FamilyKind {
    cfg.kind.unwrap_or(FamilyKind::for_variant(cfg.variant))
}

fn coverage_stage(cfg: &RunConfig, c: &PresentedCategory, objects: &[Obj]) -> Result<StageOutput, CliError> {
    let site = SpecSite::build(c, cfg.variant, objects)?;
    let kind = kind_of(cfg);
    let top = coverage::saturate_site(&site, kind, cfg.experimental)?;
    let mut log = CheckLog::new();
    log.push(Check::new(
        format!("{kind} topology"),
        if top.is_determinate() { Status::Pass } else { Status::Indeterminate },
        format!("covers={} indeterminate={}", top.covers.iter().map(Vec::len).sum::<usize>(), top.indeterminate.len()),
    ));
    if kind != FamilyKind::E0 {
        bound_skip(&mut log, "basis", coverage::check_basis(&site, kind), CoverageError::is_bound)?;
        bound_skip(&mut log, "strictness", coverage::check_strictness(&site, kind), CoverageError::is_bound)?;
    }
    bound_skip(&mut log, "squares", coverage::check_squares(&site), CoverageError::is_bound)?;
    bound_skip(&mut log, "topologies", coverage::compare_topologies(&site), CoverageError::is_bound)?;
    Ok(StageOutput {
        stage: Stage::Coverage,
        log,
        artifacts: vec![("topology.txt".into(), top.to_text(&site.cat, kind.as_str()))],
    })
}

fn sheaf_stage(cfg: &RunConfig, c: &PresentedCategory, objects: &[Obj]) -> Result<StageOutput, CliError> {
    let site = SpecSite::build(c, cfg.variant, objects)?;
    let top = coverage::saturate_site(&site, kind_of(cfg), cfg.experimental)?;
    let mut log = CheckLog::new();
    bound_skip(&mut log, "phi", phi::check_phi_coherent(&site, &top), CatError::is_bound)?;
    bound_skip(&mut log, "embedding", phi::embedding_check(&site), |e| {
        matches!(e, EmbeddingError::Coverage(c) if c.is_bound()) || matches!(e, EmbeddingError::Sheaf(SheafError::Bound(..)))
    })?;
    bound_skip(&mut log, "connectedness", phi::connectedness_evidence(&site, &top), |e| {
        matches!(e, SheafError::Bound(..))
    })?;
    let mut artifacts = Vec::new();
    if let Some(path) = &cfg.presheaf {
        let p = sheaf::parse_presheaf(&site.cat, &read(Path::new(path))?).map_err(parse_err(path))?;
        let cert = sheaf::certify(&site.cat, &top, &p);
        log.push(Check::new("presheaf certificate", Status::Pass, if cert.is_sheaf() { "sheaf" } else { "not a sheaf" }));
        let s = sheaf::sheafify(&site.cat, &top, &p)?;
        log.push(sheaf::is_sheaf(&site.cat, &top, &s.presheaf).check("sheafification is a sheaf"));
        artifacts.push(("certificate.txt".into(), cert.to_text(&site.cat)));
        artifacts.push(("sheafified.txt".into(), sheaf::presheaf_to_text(&site.cat, "sheafified", &s.presheaf)));
    }
    Ok(StageOutput {
        stage: Stage::Sheaf,
        log,
        artifacts,
    })
}

struct Tally {
    name: String,
    passed: usize,
    failure: Option<String>,
}

impl Tally {
    fn new(name: impl Into<String>) -> Self {
        Tally {
            name: name.into(),
            passed: 0,
            failure: None,
        }
    }

    fn record(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else if self.failure.is_none() {
            self.failure = Some(witness());
        }
    }

    fn check(self) -> Check {
        match self.failure {
            Some(w) => Check::fail(self.name, w),
            None => Check::new(self.name, Status::Pass, format!("cases={}", self.passed)),
        }
    }
}

fn show(f: &crate::functor::SetFunctor) -> String {
    format!("values={:?} actions={:?}", f.values, f.actions)
}

fn adjunction_stage(cfg: &RunConfig, c: &PresentedCategory, objects: &[Obj]) -> Result<StageOutput, CliError> {
    let site = SpecSite::build(c, cfg.variant, objects)?;
    let scope = c.scope(objects)?;
    check_budget(&scope.cat, cfg.bounds())?;
    check_budget(&site.cat, cfg.bounds())?;
    let mut fs = Vec::new();
    for f in FunctorEnumerator::new(&scope.cat, cfg.bound) {
        if preserve::has_variant_certificate(c, &scope, &f, cfg.variant)? {
            fs.push(f);
        }
    }
    let mut tally = Tally::new("adjunction");
    for g in FunctorEnumerator::new(&site.cat, cfg.bound) {
        for f in &fs {
            let r = adjunction_check(&site, &scope, &g, f)?;
            tally.record(r.verdict.holds, || format!("{} / {}", show(&g), show(f)));
        }
    }
    let mut log = CheckLog::new();
    log.push(tally.check());
    Ok(StageOutput {
        stage: Stage::Adjunction,
        log,
        artifacts: Vec::new(),
    })
}

fn flat_stage(cfg: &RunConfig, c: &PresentedCategory, objects: &[Obj]) -> Result<StageOutput, CliError> {
    let site = SpecSite::build(c, cfg.variant, objects)?;
    let scope = c.scope(objects)?;
    check_budget(&site.cat, cfg.bounds())?;
    let mut agree = Tally::new("flat oracle agreement");
    let mut chain = Tally::new("flat functors satisfy the chain condition");
    let mut flat = 0usize;
    for g in FunctorEnumerator::new(&site.cat, cfg.bound) {
        let v = is_flat(&site.cat, &g);
        agree.record(v.holds == filtered_oracle(&site.cat, &g), || show(&g));
        if v.holds {
            flat += 1;
            if cfg.variant == Variant::Prime {
                chain.record(chain_condition(&site, &g).holds, || show(&g));
            }
        }
    }
    let mut lex_flat = Tally::new("lex functors have flat tilde");
    check_budget(&scope.cat, cfg.bounds())?;
    for f in FunctorEnumerator::new(&scope.cat, cfg.bound) {
        if preserve::has_variant_certificate(c, &scope, &f, cfg.variant)? && certify(c, &scope, &f, Property::Lex)?.holds() {
            let t = tilde(&site, &scope, &f)?;
            lex_flat.record(is_flat(&site.cat, &t.functor).holds, || show(&f));
        }
    }
    let mut log = CheckLog::new();
    log.push(Check::new("flat census", Status::Pass, format!("flat={flat}")));
    log.push(agree.check());
    if cfg.variant == Variant::Prime {
        log.push(chain.check());
    }
    log.push(lex_flat.check());
    Ok(StageOutput {
        stage: Stage::Flat,
        log,
        artifacts: Vec::new(),
    })
}

fn preserve_stage(cfg: &RunConfig, c: &PresentedCategory, objects: &[Obj]) -> Result<StageOutput, CliError> {
    let site = SpecSite::build(c, cfg.variant, objects)?;
    let scope = c.scope(objects)?;
    check_budget(&scope.cat, cfg.bounds())?;
    let spec = site.spectrum();
    let mut census = vec![0usize; Property::ALL.len()];
    let mut total = 0usize;
    let mut unique = Tally::new("tp uniqueness");
    let mut reconstruct = Tally::new("hat of tilde recovers the functor");
    let mut e_pres = Tally::new("effective-epi preserving functors have E-preserving tilde");
    for f in FunctorEnumerator::new(&scope.cat, cfg.bound) {
        total += 1;
        for (slot, cert) in census.iter_mut().zip(preserve::preservation_suite(c, &scope, &f)?) {
            *slot += usize::from(cert.holds());
        }
        if !preserve::has_variant_certificate(c, &scope, &f, cfg.variant)? {
            continue;
        }
        let v = preserve::tp_uniqueness(&spec, &scope, &f)?;
        unique.record(v.holds, || format!("{}: {}", show(&f), v.witness.clone().unwrap_or_default()));
        let t = tilde(&site, &scope, &f)?;
        let ht = hat(&site, &scope, &t.functor)?;
        reconstruct.record(counit(&ht, &t).is_iso(&f), || show(&f));
        if certify(c, &scope, &f, Property::EffectiveEpis)?.holds() {
            e_pres.record(is_e_preserving(&site, &t.functor)?, || show(&f));
        }
    }
    let mut log = CheckLog::new();
    for (p, n) in Property::ALL.iter().zip(&census) {
        log.push(Check::new(format!("census {}", p.as_str()), Status::Pass, format!("{n} of {total}")));
    }
    log.push(unique.check());
    log.push(reconstruct.check());
    log.push(e_pres.check());
    let mut artifacts = Vec::new();
    if cfg.variant == Variant::Prime {
        match preserve::search_converse(c, &scope, cfg.bound)? {
            ConverseSearch::Found(w) => {
                log.push(Check::new("converse search", Status::Pass, format!("witness {}", w.square)));
                let mut text = String::new();
                let _ = writeln!(text, "from {}", show(&w.from));
                let _ = writeln!(text, "to {}", show(&w.to));
                let _ = writeln!(text, "alpha {:?}", w.alpha.components);
                let _ = writeln!(text, "square {}", w.square);
                artifacts.push(("converse-witness.txt".into(), text));
            }
            ConverseSearch::Exhausted { functors, pairs } => log.push(Check::new(
                "converse search",
                Status::Pass,
                format!("no witness among {functors} functors and {pairs} transformations"),
            )),
        }
    }
    Ok(StageOutput {
        stage: Stage::Preserve,
        log,
        artifacts,
    })
}

fn allthree_stage(cfg: &RunConfig, c: &PresentedCategory, objects: &[Obj]) -> Result<StageOutput, CliError> {
    let scope = c.scope(objects)?;
    check_budget(&scope.cat, cfg.bounds())?;
    let mut k = Vec::new();
    for f in FunctorEnumerator::new(&scope.cat, cfg.bound) {
        if preserve::is_coherent_on_scope(c, &scope, &f)? {
            k.push(f);
        }
    }
    Ok(StageOutput {
        stage: Stage::Allthree,
        log: harness::allthree_check(c, objects, &k)?,
        artifacts: Vec::new(),
    })
}

fn run_stage(cfg: &RunConfig, stage: Stage, c: &PresentedCategory, objects: &[Obj]) -> Result<StageOutput, CliError> {
    let simple = |log| StageOutput {
        stage,
        log,
        artifacts: Vec::new(),
    };
    match stage {
        Stage::Spec => spec_stage(cfg, c, objects),
        Stage::Coverage => coverage_stage(cfg, c, objects),
        Stage::Sheaf => sheaf_stage(cfg, c, objects),
        Stage::Adjunction => adjunction_stage(cfg, c, objects),
        Stage::Equivalence => Ok(simple(harness::equivalence_harness(c, cfg.variant, objects, cfg.bounds())?)),
        Stage::Flat => flat_stage(cfg, c, objects),
        Stage::Preserve => preserve_stage(cfg, c, objects),
        Stage::Allthree => allthree_stage(cfg, c, objects),
        Stage::Predicates => {
            let site = SpecSite::build(c, cfg.variant, objects)?;
            let scope = c.scope(objects)?;
            let mut log = harness::topos_predicates(&scope.cat, cfg.bound);
            log.extend(harness::topos_predicates(&site.cat, cfg.bound));
            Ok(simple(log))
        }
        Stage::Random => {
            let seed = cfg
                .seed
                .ok_or_else(|| CliError::Config("the random suite needs a seed".into()))?;
            Ok(simple(harness::random_finsets_pairs(seed, cfg.pairs, cfg.bound)?))
        }
    }
}

/// Reports of every selected stage, in selection order.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub header: Report,
    pub stages: Vec<StageOutput>,
}

impl Bundle {
    pub fn counts(&self) -> Counts {
        let mut c = Counts::default();
        for s in &self.stages {
            c.merge(s.log.counts());
        }
        c
    }

    pub fn passed(&self) -> bool {
        self.counts().fail == 0
    }

    pub fn stage_report(&self, s: &StageOutput) -> String {
        let mut r = self.header.clone();
        r.push("stage", s.stage.as_str());
        r.extend(&s.log.to_report());
        r.render()
    }

    pub fn summary(&self) -> String {
        let mut r = self.header.clone();
        for s in &self.stages {
            let c = s.log.counts();
            r.push(
                "stage",
                format!(
                    "{} pass={} fail={} skip_bound={} indeterminate={}",
                    s.stage.as_str(),
                    c.pass,
                    c.fail,
                    c.skip_bound,
                    c.indeterminate
                ),
            );
        }
        let c = self.counts();
        r.push("pass", c.pass);
        r.push("fail", c.fail);
        r.push("skip_bound", c.skip_bound);
        r.push("indeterminate", c.indeterminate);
        r.render()
    }

    /// Writes per-stage reports, artifacts, one file per failed check and
    /// the summary.
    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        let io = |source| CliError::Io {
            path: dir.display().to_string(),
            source,
        };
        std::fs::create_dir_all(dir).map_err(io)?;
        for s in &self.stages {
            let name = s.stage.as_str();
            std::fs::write(dir.join(format!("{name}.report")), self.stage_report(s)).map_err(io)?;
            for (file, text) in &s.artifacts {
                std::fs::write(dir.join(format!("{name}-{file}")), text).map_err(io)?;
            }
            for (i, f) in s.log.failures().enumerate() {
                let text = format!("check={}\nwitness={}\n", f.name, f.detail);
                std::fs::write(dir.join(format!("{name}-fail-{i}.txt")), text).map_err(io)?;
            }
        }
        std::fs::write(dir.join("summary.report"), self.summary()).map_err(io)
    }
}

pub fn run(cfg: &RunConfig) -> Result<Bundle, CliError> {
    if cfg.checks.contains(&Stage::Random) && cfg.seed.is_none() {
        return Err(CliError::Config("the random suite needs a seed".into()));
    }
    let (c, objects) = resolve(cfg)?;
    let stages = cfg
        .checks
        .iter()
        .map(|&s| absorb(s, run_stage(cfg, s, &c, &objects)))
        .collect();
    let bundle = Bundle {
        header: cfg.header(),
        stages,
    };
    if let Some(dir) = &cfg.out {
        bundle.write(dir)?;
    }
    Ok(bundle)
}

#[derive(Debug, Parser)]
#[command(name = "typetopos", version, about = "Spectra, topologies, sheaves and functor transport on finite coherent categories")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Corpus name or lattice/category file.
    pub input: String,
    #[arg(long, default_value = "prime")]
    pub variant: String,
    /// Comma-separated object names.
    #[arg(long)]
    pub scope: Option<String>,
    #[arg(long)]
    pub max_card: Option<usize>,
    /// Directory for reports and witness files.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a lattice or category file.
    Validate { file: PathBuf },
    /// Build the spectrum site and print it.
    Spec(Common),
    /// Saturate a coverage and check its basis axioms.
    Coverage {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        experimental: bool,
    },
    /// Sheaf checks on the site, optionally for one presheaf file.
    Sheaf {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        presheaf: Option<String>,
    },
    /// Transport checks between the category and its site.
    Transport {
        #[command(flatten)]
        common: Common,
        /// adjunction, equivalence, flat, preserve, allthree, predicates or random.
        #[arg(long)]
        check: String,
        #[arg(long, default_value_t = 2)]
        bound: usize,
        #[arg(long, default_value_t = 1e7)]
        budget: f64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 100)]
        pairs: usize,
    },
    /// Run the stages listed in a KEY=VALUE config.
    Run { config: PathBuf },
    /// List or dump the built-in fixtures.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CorpusAction {
    List,
    Dump { name: String },
}

fn config_from(common: Common, checks: Vec<Stage>) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::new(common.input);
    cfg.variant = Variant::parse(&common.variant)
        .ok_or_else(|| CliError::Config(format!("unknown variant `{}`", common.variant)))?;
    cfg.scope = common.scope.map(|s| s.split(',').map(str::to_string).collect());
    cfg.max_card = common.max_card;
    cfg.out = common.out;
    cfg.checks = checks;
    Ok(cfg)
}

fn validate(path: &Path) -> Result<(String, bool), CliError> {
    let text = read(path)?;
    let name = path.display().to_string();
    let mut r = Report::new();
    r.push("file", &name);
    let ok = if text.split_whitespace().next() == Some("lattice") {
        let spec = lattice::parse_lattice(&text).map_err(parse_err(&name))?;
        let v = lattice::validate(&spec);
        r.extend(&v.to_report());
        v.is_valid()
    } else {
        let c = category::parse_category(&text).map_err(parse_err(&name))?;
        let violations = category::validate_coherent(&c);
        for v in &violations {
            r.push("violation", format!("{} {}", v.axiom, v.witness));
        }
        r.push("coherent", violations.is_empty());
        violations.is_empty()
    };
    Ok((r.render(), ok))
}

/// Runs a parsed command, returning its standard output and exit code.
pub fn execute(cli: Cli) -> Result<(String, i32), CliError> {
    let code = |ok: bool| if ok { 0 } else { 1 };
    let bundle_out = |cfg: RunConfig, prefix: Option<usize>| -> Result<(String, i32), CliError> {
        let b = run(&cfg)?;
        let mut out = String::new();
        for s in &b.stages {
            if prefix.is_some() {
                for (_, text) in &s.artifacts {
                    out.push_str(text);
                }
            }
            out.push_str(&b.stage_report(s));
        }
        Ok((out, code(b.passed())))
    };
    match cli.command {
        Command::Validate { file } => {
            let (out, ok) = validate(&file)?;
            Ok((out, code(ok)))
        }
        Command::Spec(common) => bundle_out(config_from(common, vec![Stage::Spec])?, Some(0)),
        Command::Coverage {
            common,
            kind,
            experimental,
        } => {
            let mut cfg = config_from(common, vec![Stage::Coverage])?;
            cfg.kind = kind
                .map(|k| FamilyKind::parse(&k).ok_or_else(|| CliError::Config(format!("unknown kind `{k}`"))))
                .transpose()?;
            cfg.experimental = experimental;
            bundle_out(cfg, Some(0))
        }
        Command::Sheaf { common, presheaf } => {
            let mut cfg = config_from(common, vec![Stage::Sheaf])?;
            cfg.presheaf = presheaf;
            bundle_out(cfg, Some(0))
        }
        Command::Transport {
            common,
            check,
            bound,
            budget,
            seed,
            pairs,
        } => {
            let stage = Stage::parse(&check)
                .filter(|s| *s > Stage::Sheaf)
                .ok_or_else(|| CliError::Config(format!("unknown check `{check}`")))?;
            let mut cfg = config_from(common, vec![stage])?;
            cfg.bound = bound;
            cfg.budget = budget;
            cfg.seed = seed;
            cfg.pairs = pairs;
            bundle_out(cfg, None)
        }
        Command::Run { config } => {
            let name = config.display().to_string();
            let cfg = parse_config(&read(&config)?).map_err(parse_err(&name))?;
            let b = run(&cfg)?;
            Ok((b.summary(), code(b.passed())))
        }
        Command::Corpus { action } => match action {
            CorpusAction::List => Ok((corpus::list(), 0)),
            CorpusAction::Dump { name } => Ok((corpus::dump(&name)?, 0)),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_into_the_header() {
        let cfg = parse_config("# run\ninput=lattice-2x2\nvariant=ultra\nchecks=spec,random\nseed=9\n").unwrap();
        assert_eq!(cfg.variant, Variant::Ultra);
        assert_eq!(cfg.checks, vec![Stage::Spec, Stage::Random]);
        let h = cfg.header();
        assert_eq!(h.get("seed"), Some("9"));
        assert_eq!(h.get("checks"), Some("spec,random"));
    }

    #[test]
    fn config_errors_carry_positions() {
        let e = parse_config("input=x\nbound=two\n").unwrap_err();
        assert_eq!(e.line, 2);
        let e = parse_config("input=x\ncolour=red\n").unwrap_err();
        assert!(e.message.contains("unknown key"));
        assert!(parse_config("bound=1\n").is_err());
    }

    #[test]
    fn random_suite_requires_a_seed() {
        let mut cfg = RunConfig::new("finsets-12");
        cfg.checks = vec![Stage::Random];
        assert!(matches!(run(&cfg), Err(CliError::Config(_))));
    }

    #[test]
    fn small_max_card_skips_instead_of_failing() {
        let mut cfg = RunConfig::new("finsets-12");
        cfg.variant = Variant::Ultra;
        cfg.max_card = Some(2);
        cfg.checks = vec![Stage::Spec, Stage::Sheaf];
        let b = run(&cfg).unwrap();
        assert!(b.passed(), "{}", b.summary());
        assert!(b.counts().skip_bound > 0);
    }

    #[test]
    fn runs_are_deterministic() {
        let mut cfg = RunConfig::new("lattice-3chain");
        cfg.checks = vec![Stage::Spec, Stage::Coverage, Stage::Preserve];
        let (a, b) = (run(&cfg).unwrap(), run(&cfg).unwrap());
        assert_eq!(a.summary(), b.summary());
        assert!(a.passed(), "{}", a.summary());
    }
}
