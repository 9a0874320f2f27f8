use std::collections::BTreeMap;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    HoldsOnWindow,
    Violated,
    Inconclusive,
}

/// A concrete counterexample. `kind` names the check; `indices` is the tuple
/// that re-evaluates to a violation; `value` and `bound` are the compared
/// quantities in the units named by `kind` (log-scale kinds are natural
/// logs unless the kind says `log2`).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub kind: String,
    pub indices: Vec<i64>,
    pub value: f64,
    pub bound: f64,
}

impl Witness {
    pub fn new(kind: impl Into<String>, indices: Vec<i64>, value: f64, bound: f64) -> Self {
        Self { kind: kind.into(), indices, value, bound }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub id: String,
    pub verdict: Verdict,
    pub quantities: BTreeMap<String, Value>,
    pub witnesses: Vec<Witness>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ConditionReport {
    fn new(id: impl Into<String>, verdict: Verdict) -> Self {
        Self { id: id.into(), verdict, quantities: BTreeMap::new(), witnesses: Vec::new(), notes: Vec::new() }
    }

    pub fn holds(id: impl Into<String>) -> Self {
        Self::new(id, Verdict::HoldsOnWindow)
    }

    pub fn violated(id: impl Into<String>, witness: Witness) -> Self {
        let mut r = Self::new(id, Verdict::Violated);
        r.witnesses.push(witness);
        r
    }

    pub fn inconclusive(id: impl Into<String>, note: impl Into<String>) -> Self {
        let mut r = Self::new(id, Verdict::Inconclusive);
        r.notes.push(note.into());
        r
    }

    /// Holds unless `witnesses` is nonempty.
    pub fn from_witnesses(id: impl Into<String>, witnesses: Vec<Witness>) -> Self {
        let verdict = if witnesses.is_empty() { Verdict::HoldsOnWindow } else { Verdict::Violated };
        let mut r = Self::new(id, verdict);
        r.witnesses = witnesses;
        r
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.quantities.insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn holds_on_window(&self) -> bool {
        self.verdict == Verdict::HoldsOnWindow
    }

    pub fn is_violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }
}

/// Folds verdicts: any violation wins, then any inconclusive.
pub fn overall(reports: &[ConditionReport]) -> Verdict {
    if reports.iter().any(|r| r.verdict == Verdict::Violated) {
        Verdict::Violated
    } else if reports.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::HoldsOnWindow
    }
}

/// Keep at most this many witnesses per report.
pub(crate) const MAX_WITNESSES: usize = 8;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding_and_serialization() {
        let a = ConditionReport::holds("a").with("x", 1.5);
        let b = ConditionReport::inconclusive("b", "too short");
        let c = ConditionReport::violated("c", Witness::new("pair", vec![1, 2], 3.0, 2.0));
        assert_eq!(overall(&[a.clone()]), Verdict::HoldsOnWindow);
        assert_eq!(overall(&[a.clone(), b.clone()]), Verdict::Inconclusive);
        assert_eq!(overall(&[a.clone(), b, c.clone()]), Verdict::Violated);
        let j = serde_json::to_value(&c).unwrap();
        assert_eq!(j["verdict"], "violated");
        assert_eq!(j["witnesses"][0]["indices"][1], 2);
        assert_eq!(serde_json::to_value(&a).unwrap()["quantities"]["x"], 1.5);
    }
}
