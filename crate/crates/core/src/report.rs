//! Line-oriented `KEY=VALUE` reports and check outcomes.

use std::fmt;

/// Outcome of one individual check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Status {
    Pass,
    Fail,
    /// The instance needs an object beyond the configured cardinality bound.
    SkipBound,
    /// The topology could not be decided on the sub-site.
    Indeterminate,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::SkipBound => "skip:bound",
            Status::Indeterminate => "indeterminate",
        }
    }

    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A single named check with its status and an optional witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, status: Status, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            status,
            detail: detail.into(),
        }
    }

    pub fn pass(name: impl Into<String>) -> Self {
        Check::new(name, Status::Pass, "")
    }

    pub fn fail(name: impl Into<String>, witness: impl Into<String>) -> Self {
        Check::new(name, Status::Fail, witness)
    }

    pub fn skip(name: impl Into<String>, why: impl Into<String>) -> Self {
        Check::new(name, Status::SkipBound, why)
    }
}

/// A yes/no answer with an optional witness for "no".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub witness: Option<String>,
}

impl Verdict {
    pub fn yes() -> Self {
        Verdict { holds: true, witness: None }
    }

    pub fn no(witness: impl Into<String>) -> Self {
        Verdict {
            holds: false,
            witness: Some(witness.into()),
        }
    }

    /// A check named `name` with this verdict's status and witness.
    pub fn check(&self, name: impl Into<String>) -> Check {
        Check::new(name, Status::from_bool(self.holds), self.witness.clone().unwrap_or_default())
    }
}

/// Tallies of check outcomes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub pass: usize,
    pub fail: usize,
    pub skip_bound: usize,
    pub indeterminate: usize,
}

impl Counts {
    pub fn add(&mut self, status: Status) {
        match status {
            Status::Pass => self.pass += 1,
            Status::Fail => self.fail += 1,
            Status::SkipBound => self.skip_bound += 1,
            Status::Indeterminate => self.indeterminate += 1,
        }
    }

    pub fn merge(&mut self, other: Counts) {
        self.pass += other.pass;
        self.fail += other.fail;
        self.skip_bound += other.skip_bound;
        self.indeterminate += other.indeterminate;
    }
}

/// An ordered list of `KEY=VALUE` records.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    records: Vec<(String, String)>,
}

impl Report {
    pub fn new() -> Self {
        Report::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: impl fmt::Display) {
        self.records.push((key.into(), value.to_string()));
    }

    pub fn push_check(&mut self, check: &Check) {
        let value = if check.detail.is_empty() {
            format!("{} {}", check.status, check.name)
        } else {
            format!("{} {} {}", check.status, check.name, check.detail)
        };
        self.push("check", value);
    }

    pub fn extend(&mut self, other: &Report) {
        self.records.extend(other.records.iter().cloned());
    }

    pub fn records(&self) -> &[(String, String)] {
        &self.records
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.records
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.records {
            out.push_str(k);
            out.push('=');
            out.push_str(v);
            out.push('\n');
        }
        out
    }
}

/// Collects checks and renders them with a summary line.
#[derive(Debug, Clone, Default)]
pub struct CheckLog {
    pub checks: Vec<Check>,
}

impl CheckLog {
    pub fn new() -> Self {
        CheckLog::default()
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn extend(&mut self, other: CheckLog) {
        self.checks.extend(other.checks);
    }

    pub fn counts(&self) -> Counts {
        let mut c = Counts::default();
        for check in &self.checks {
            c.add(check.status);
        }
        c
    }

    pub fn all_passed(&self) -> bool {
        self.counts().fail == 0 && self.counts().indeterminate == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn to_report(&self) -> Report {
        let mut r = Report::new();
        for c in &self.checks {
            r.push_check(c);
        }
        let counts = self.counts();
        r.push("pass", counts.pass);
        r.push("fail", counts.fail);
        r.push("skip_bound", counts.skip_bound);
        r.push("indeterminate", counts.indeterminate);
        r
    }
}
