use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::Value;

use super::params::BoundMode;

pub const LEDGER_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Tag {
    H7,
    H8,
    H10,
    H11,
    H12,
    H13,
    H14,
    H15,
    H16,
}

impl Tag {
    pub const ALL: [Tag; 9] = [
        Tag::H7,
        Tag::H8,
        Tag::H10,
        Tag::H11,
        Tag::H12,
        Tag::H13,
        Tag::H14,
        Tag::H15,
        Tag::H16,
    ];

    pub fn describe(self) -> &'static str {
        match self {
            Tag::H7 => "E(W_n | F_n) = 0",
            Tag::H8 => "sum E W_n^2 < inf",
            Tag::H10 => "alpha_n >= 0",
            Tag::H11 => "beta_n >= 0",
            Tag::H12 => "gamma_n >= 0",
            Tag::H13 => "alpha_n -> 0",
            Tag::H14 => "sum beta_n < inf",
            Tag::H15 => "sum gamma_n = inf",
            Tag::H16 => "|T_n - x*| <= bound",
        }
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    #[serde(rename = "pass")]
    Pass,
    #[serde(rename = "fail")]
    Fail,
    /// Passed on Monte Carlo evidence only.
    #[serde(rename = "finite-horizon-pass")]
    FiniteHorizonPass,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Self::Pass
        } else {
            Self::Fail
        }
    }

    pub fn is_pass(self) -> bool {
        !matches!(self, Self::Fail)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evidence {
    pub value: f64,
    pub at: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub status: Status,
    pub evidence: Evidence,
    pub horizon: usize,
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl LedgerEntry {
    pub fn new(status: Status, value: f64, at: Value, horizon: usize, tol: f64) -> Self {
        Self {
            status,
            evidence: Evidence { value, at },
            horizon,
            tol,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisLedger {
    pub schema_version: u32,
    pub mode: BoundMode,
    pub n0: usize,
    pub overall: Status,
    /// Set when "with probability 1" was checked seed by seed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_set: Option<Vec<u64>>,
    pub hypotheses: BTreeMap<Tag, LedgerEntry>,
}

impl HypothesisLedger {
    pub fn new(mode: BoundMode, n0: usize) -> Self {
        Self {
            schema_version: LEDGER_SCHEMA_VERSION,
            mode,
            n0,
            overall: Status::Pass,
            seed_set: None,
            hypotheses: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, tag: Tag, entry: LedgerEntry) {
        self.hypotheses.insert(tag, entry);
        self.refresh_overall();
    }

    pub fn extend(&mut self, entries: impl IntoIterator<Item = (Tag, LedgerEntry)>) {
        for (t, e) in entries {
            self.insert(t, e);
        }
    }

    fn refresh_overall(&mut self) {
        let complete = Tag::ALL.iter().all(|t| self.hypotheses.contains_key(t));
        let ok = self.hypotheses.values().all(|e| e.status.is_pass());
        self.overall = Status::from_bool(complete && ok);
    }

    pub fn get(&self, tag: Tag) -> Option<&LedgerEntry> {
        self.hypotheses.get(&tag)
    }

    pub fn is_complete(&self) -> bool {
        Tag::ALL.iter().all(|t| self.hypotheses.contains_key(t))
    }

    pub fn all_pass(&self) -> bool {
        self.overall.is_pass()
    }

    pub fn failing(&self) -> Vec<Tag> {
        self.hypotheses
            .iter()
            .filter(|(_, e)| !e.status.is_pass())
            .map(|(t, _)| *t)
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("ledger serializes") + "\n"
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for (tag, e) in &self.hypotheses {
            let status = match e.status {
                Status::Pass => "pass",
                Status::Fail => "FAIL",
                Status::FiniteHorizonPass => "pass (finite horizon)",
            };
            out.push_str(&format!(
                "{:<4} {:<22} {:<22} value {:.6e}\n",
                tag.to_string(),
                tag.describe(),
                status,
                e.evidence.value
            ));
        }
        out.push_str(&format!(
            "overall: {}\n",
            if self.all_pass() { "pass" } else { "FAIL" }
        ));
        out
    }
}
