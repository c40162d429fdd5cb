use serde::{Deserialize, Serialize};

/// One violated axiom together with the ids that witness it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: String,
    pub witness: Vec<String>,
}

/// Result of a total validation pass. Empty means the input satisfies every
/// checked axiom.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push<S: Into<String>>(&mut self, axiom: &str, witness: impl IntoIterator<Item = S>) {
        self.violations.push(Violation {
            axiom: axiom.to_string(),
            witness: witness.into_iter().map(Into::into).collect(),
        });
    }

    pub fn has(&self, axiom: &str) -> bool {
        self.violations.iter().any(|v| v.axiom == axiom)
    }
}
