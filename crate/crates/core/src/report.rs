//! Verification reports. Failed properties are data, not errors.

use std::fmt::Write as _;
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Indeterminate,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckEntry {
    pub name: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Value>,
    /// Wall-clock time; shown in text output only so JSON stays reproducible.
    #[serde(skip)]
    pub timing: Duration,
}

impl CheckEntry {
    pub fn new(name: impl Into<String>, verdict: Verdict) -> Self {
        CheckEntry { name: name.into(), verdict, detail: None, witness: None, certificate: None, timing: Duration::ZERO }
    }

    pub fn pass(name: impl Into<String>) -> Self {
        Self::new(name, Verdict::Pass)
    }

    pub fn fail(name: impl Into<String>) -> Self {
        Self::new(name, Verdict::Fail)
    }

    pub fn from_bool(name: impl Into<String>, ok: bool) -> Self {
        Self::new(name, if ok { Verdict::Pass } else { Verdict::Fail })
    }

    pub fn with_detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }

    pub fn with_witness(mut self, w: Value) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn with_certificate(mut self, c: Value) -> Self {
        self.certificate = Some(c);
        self
    }

    pub fn with_timing(mut self, t: Duration) -> Self {
        self.timing = t;
        self
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub entries: Vec<CheckEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<Value>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report { command: command.into(), seed: None, entries: Vec::new(), output: None }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn push(&mut self, e: CheckEntry) {
        self.entries.push(e);
    }

    pub fn extend(&mut self, prefix: &str, other: Report) {
        for mut e in other.entries {
            e.name = format!("{prefix}{}", e.name);
            self.entries.push(e);
        }
    }

    pub fn entry(&self, name: &str) -> Option<&CheckEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Fail if anything failed; otherwise indeterminate if anything was.
    pub fn status(&self) -> Verdict {
        if self.entries.iter().any(|e| e.verdict == Verdict::Fail) {
            Verdict::Fail
        } else if self.entries.iter().any(|e| e.verdict == Verdict::Indeterminate) {
            Verdict::Indeterminate
        } else {
            Verdict::Pass
        }
    }

    pub fn passed(&self) -> bool {
        self.status() == Verdict::Pass
    }

    pub fn failures(&self) -> Vec<&CheckEntry> {
        self.entries.iter().filter(|e| e.verdict == Verdict::Fail).collect()
    }

    /// JSON with entries sorted by name (stable for equal names).
    pub fn to_json(&self) -> Value {
        let mut sorted = self.clone();
        sorted.entries.sort_by(|a, b| a.name.cmp(&b.name));
        let mut v = serde_json::to_value(&sorted).expect("report serializes");
        v["status"] = serde_json::to_value(self.status()).unwrap();
        v
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}: {:?}", self.command, self.status());
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "  seed {seed}");
        }
        let mut entries: Vec<&CheckEntry> = self.entries.iter().collect();
        entries.sort_by(|a, b| a.name.cmp(&b.name));
        for e in entries {
            let tag = match e.verdict {
                Verdict::Pass => "PASS",
                Verdict::Fail => "FAIL",
                Verdict::Indeterminate => "????",
            };
            let _ = write!(s, "  [{tag}] {} ({:.1} ms)", e.name, e.timing.as_secs_f64() * 1e3);
            if let Some(d) = &e.detail {
                let _ = write!(s, " - {d}");
            }
            s.push('\n');
            if let Some(w) = &e.witness {
                let _ = writeln!(s, "         witness: {w}");
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_precedence() {
        let mut r = Report::new("t");
        assert_eq!(r.status(), Verdict::Pass);
        r.push(CheckEntry::new("b", Verdict::Indeterminate));
        assert_eq!(r.status(), Verdict::Indeterminate);
        r.push(CheckEntry::fail("a"));
        assert_eq!(r.status(), Verdict::Fail);
        let j = r.to_json();
        assert_eq!(j["entries"][0]["name"], "a");
        assert_eq!(j["status"], "fail");
    }
}
