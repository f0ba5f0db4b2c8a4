//! Machine certification of the identities, lower bounds, cancellations and pointwise bounds
//! behind the normal form reduction.
//!
//! Every check produces a [`CertificationReport`]. A report passes exactly when it examined at
//! least one tuple in its hypothesis region and recorded no violation. Sweeps record the
//! empirical constant per dyadic scale in `constants`, keyed by the scale.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod bounds;
mod cancellation;
mod counterexample;
mod exact;
mod nf_identity;
mod pointwise;
pub(crate) mod sampling;

pub use cancellation::{cancellation_value, Cancellation, CancellationValue};
pub use counterexample::{counterexample_ratio, counterexample_tuple, CounterexampleRow, DEFAULT_G};

/// At most this many violations and witnesses are kept verbatim.
pub const MAX_LISTED: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Exact,
    Bounds,
    Counterexample,
    Cancellation,
    Pointwise,
    NfIdentity,
}

impl Suite {
    pub const ALL: [Suite; 6] =
        [Suite::Exact, Suite::Bounds, Suite::Counterexample, Suite::Cancellation, Suite::Pointwise, Suite::NfIdentity];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Exact => "exact",
            Suite::Bounds => "bounds",
            Suite::Counterexample => "counterexample",
            Suite::Cancellation => "cancellation",
            Suite::Pointwise => "pointwise",
            Suite::NfIdentity => "nf-identity",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown suite `{s}`")))
    }
}

/// A tuple singled out by a check, with a human-readable note (usually the offending value).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub tuple: Vec<i64>,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub check_id: String,
    /// The mathematical statement being checked.
    pub anchor: String,
    /// Where the statement was examined.
    pub domain: String,
    pub examined: u64,
    pub violation_count: u64,
    /// The first [`MAX_LISTED`] violations.
    pub violations: Vec<Witness>,
    /// Empirical constants, keyed by dyadic scale or by name.
    pub constants: BTreeMap<String, f64>,
    pub pass: bool,
    /// Replayable sample points: extremal tuples per scale, or the families used.
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
}

impl CertificationReport {
    pub(crate) fn new(check_id: &str, anchor: &str, domain: impl Into<String>) -> Self {
        Self {
            check_id: check_id.to_string(),
            anchor: anchor.to_string(),
            domain: domain.into(),
            examined: 0,
            violation_count: 0,
            violations: Vec::new(),
            constants: BTreeMap::new(),
            pass: false,
            witnesses: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub(crate) fn violation(&mut self, tuple: &[i64], note: impl Into<String>) {
        self.violation_count += 1;
        if self.violations.len() < MAX_LISTED {
            self.violations.push(Witness { tuple: tuple.to_vec(), note: note.into() });
        }
    }

    pub(crate) fn witness(&mut self, tuple: &[i64], note: impl Into<String>) {
        if self.witnesses.len() < MAX_LISTED {
            self.witnesses.push(Witness { tuple: tuple.to_vec(), note: note.into() });
        }
    }

    pub(crate) fn constant(&mut self, key: impl Into<String>, v: f64) {
        self.constants.insert(key.into(), v);
    }

    pub(crate) fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub(crate) fn finish(mut self) -> Self {
        if self.examined == 0 {
            self.notes.push(Error::HypothesisEmpty(self.check_id.clone()).to_string());
        }
        self.pass = self.examined > 0 && self.violation_count == 0;
        self
    }
}

/// Knobs shared by every check.
#[derive(Clone, Debug)]
pub struct CertifyOptions {
    pub seed: u64,
    /// Flip the sign of one table entry (`M5_5`); every suite depending on it must then fail.
    pub perturb: bool,
    /// Smaller boxes and sample counts, for smoke tests.
    pub quick: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { seed: 20_240_611, perturb: false, quick: false }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckInfo {
    pub id: String,
    pub suite: Suite,
    pub anchor: String,
}

fn catalog(suite: Suite) -> Vec<(&'static str, String)> {
    match suite {
        Suite::Exact => exact::catalog(),
        Suite::Bounds => bounds::catalog(),
        Suite::Counterexample => counterexample::catalog(),
        Suite::Cancellation => cancellation::catalog(),
        Suite::Pointwise => pointwise::catalog(),
        Suite::NfIdentity => nf_identity::catalog(),
    }
}

/// Every check, in execution order.
pub fn registry() -> Vec<CheckInfo> {
    Suite::ALL
        .into_iter()
        .flat_map(|s| catalog(s).into_iter().map(move |(id, anchor)| CheckInfo { id: id.to_string(), suite: s, anchor }))
        .collect()
}

fn run_ids(suite: Suite, ids: &[&str], opts: &CertifyOptions) -> Result<Vec<CertificationReport>> {
    match suite {
        Suite::Exact => exact::run(ids, opts),
        Suite::Bounds => bounds::run(ids, opts),
        Suite::Counterexample => counterexample::run(ids, opts),
        Suite::Cancellation => cancellation::run(ids, opts),
        Suite::Pointwise => pointwise::run(ids, opts),
        Suite::NfIdentity => nf_identity::run(ids, opts),
    }
}

pub fn run_suite(suite: Suite, opts: &CertifyOptions) -> Result<Vec<CertificationReport>> {
    let ids: Vec<&str> = catalog(suite).into_iter().map(|(id, _)| id).collect();
    run_ids(suite, &ids, opts)
}

pub fn run_check(id: &str, opts: &CertifyOptions) -> Result<CertificationReport> {
    let info = registry()
        .into_iter()
        .find(|c| c.id == id)
        .ok_or_else(|| Error::InvalidConfig(format!("unknown check `{id}`")))?;
    let mut out = run_ids(info.suite, &[id], opts)?;
    out.pop().ok_or_else(|| Error::InvalidConfig(format!("check `{id}` produced no report")))
}

/// Anchor text of a registered check.
pub(crate) fn anchor_of(list: &[(&'static str, String)], id: &str) -> String {
    list.iter().find(|(i, _)| *i == id).map(|(_, a)| a.clone()).unwrap_or_default()
}
