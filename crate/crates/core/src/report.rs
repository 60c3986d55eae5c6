//! Law reports: the uniform result of every exhaustive check in the crate.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub law: String,
    pub witness: String,
}

/// Outcome of a law suite. `checked` counts instances actually evaluated,
/// `skipped` counts instances that could not be evaluated (e.g. a bind that
/// escaped a depth bound), and `partial` is set when an enumeration cap
/// forced subsampling.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LawReport {
    pub subject: String,
    pub checked: u64,
    pub skipped: u64,
    pub partial: bool,
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
}

impl LawReport {
    pub fn new(subject: impl Into<String>) -> Self {
        LawReport {
            subject: subject.into(),
            checked: 0,
            skipped: 0,
            partial: false,
            violations: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violate(&mut self, law: impl Into<String>, witness: impl Into<String>) {
        self.violations.push(Violation {
            law: law.into(),
            witness: witness.into(),
        });
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    pub fn absorb(&mut self, other: LawReport) {
        self.checked += other.checked;
        self.skipped += other.skipped;
        self.partial |= other.partial;
        self.violations.extend(other.violations);
        self.notes.extend(other.notes);
    }

    /// Panic with the first violation; for tests and fixtures.
    pub fn expect_clean(&self) {
        if let Some(v) = self.violations.first() {
            panic!(
                "{}: law `{}` violated at {}",
                self.subject, v.law, v.witness
            );
        }
    }
}

impl std::fmt::Display for LawReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: {} ({} checked, {} skipped{})",
            self.subject,
            if self.passed() { "ok" } else { "FAILED" },
            self.checked,
            self.skipped,
            if self.partial { ", partial" } else { "" }
        )?;
        for v in &self.violations {
            write!(f, "\n  {} violated at {}", v.law, v.witness)?;
        }
        Ok(())
    }
}
