use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Ok,
    Refused,
    Rejected,
}

/// One line of the JSON-lines audit export.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub seq: u64,
    pub kind: String,
    pub party: String,
    pub timestamp_ms: u64,
    pub outcome: Outcome,
    pub id_hex: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AuditFilter {
    pub kind: Option<String>,
    pub party: Option<String>,
    pub outcome: Option<Outcome>,
}

impl AuditFilter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn kind(mut self, kind: &str) -> Self {
        self.kind = Some(kind.to_string());
        self
    }

    pub fn party(mut self, party: &str) -> Self {
        self.party = Some(party.to_string());
        self
    }

    pub fn outcome(mut self, outcome: Outcome) -> Self {
        self.outcome = Some(outcome);
        self
    }

    pub fn matches(&self, e: &AuditEntry) -> bool {
        self.kind.as_ref().is_none_or(|k| *k == e.kind)
            && self.party.as_ref().is_none_or(|p| *p == e.party)
            && self.outcome.is_none_or(|o| o == e.outcome)
    }
}

/// Append-only audit trail.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditLog {
    entries: Vec<AuditEntry>,
}

impl AuditLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn append(&mut self, kind: &str, party: &str, timestamp_ms: u64, outcome: Outcome, id_hex: String) -> u64 {
        let seq = self.entries.len() as u64;
        self.entries.push(AuditEntry {
            seq,
            kind: kind.to_string(),
            party: party.to_string(),
            timestamp_ms,
            outcome,
            id_hex,
        });
        seq
    }

    pub fn entries(&self) -> &[AuditEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn query(&self, filter: &AuditFilter) -> Vec<AuditEntry> {
        self.entries.iter().filter(|e| filter.matches(e)).cloned().collect()
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("audit entries always serialize"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, serde_json::Error> {
        let entries = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<Vec<AuditEntry>, _>>()?;
        Ok(AuditLog { entries })
    }
}
