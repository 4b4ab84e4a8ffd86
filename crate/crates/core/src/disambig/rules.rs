use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Identifier kinds whose disagreement forbids a merge outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HardConflict {
    Orcid,
    ResearcherId,
    Email,
}

/// Evidence weights and the merge threshold for pairwise mention scoring.
///
/// The defaults are a configurable approximation of a rule-based scoring
/// method: strong identifiers (orcid, researcher id, email) clear the
/// threshold on their own, weaker signals have to stack.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScoringRules {
    pub orcid: f64,
    pub researcher_id: f64,
    pub email: f64,
    /// Per distinct co-author last name appearing on both bylines.
    pub coauthor: f64,
    pub organization: f64,
    pub journal: f64,
    pub subject_category: f64,
    /// Both first names spelled out and equal.
    pub first_name: f64,
    pub merge_threshold: f64,
    pub hard_conflicts: Vec<HardConflict>,
}

impl Default for ScoringRules {
    fn default() -> Self {
        Self {
            orcid: 100.0,
            researcher_id: 100.0,
            email: 90.0,
            coauthor: 25.0,
            organization: 15.0,
            journal: 10.0,
            subject_category: 10.0,
            first_name: 10.0,
            merge_threshold: 50.0,
            hard_conflicts: vec![HardConflict::Orcid],
        }
    }
}

impl ScoringRules {
    pub fn validate(&self) -> Result<()> {
        let weights = [
            ("orcid", self.orcid),
            ("researcher_id", self.researcher_id),
            ("email", self.email),
            ("coauthor", self.coauthor),
            ("organization", self.organization),
            ("journal", self.journal),
            ("subject_category", self.subject_category),
            ("first_name", self.first_name),
        ];
        for (name, w) in weights {
            if !w.is_finite() {
                return Err(Error::invalid("rules", format!("weight `{name}` is not finite")));
            }
        }
        if !(self.merge_threshold.is_finite() && self.merge_threshold > 0.0) {
            return Err(Error::invalid(
                "rules",
                format!("merge_threshold must be positive, got {}", self.merge_threshold),
            ));
        }
        Ok(())
    }

    pub fn is_hard(&self, kind: HardConflict) -> bool {
        self.hard_conflicts.contains(&kind)
    }

    /// Parses a `key = value` weight file. Missing keys keep their defaults.
    pub fn from_toml(text: &str) -> Result<Self> {
        let rules: ScoringRules =
            toml::from_str(text).map_err(|e| Error::invalid("rules", e.to_string()))?;
        rules.validate()?;
        Ok(rules)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("rules serialize")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_roundtrip() {
        let r = ScoringRules::default();
        r.validate().unwrap();
        assert_eq!(ScoringRules::from_toml(&r.to_toml()).unwrap(), r);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let r = ScoringRules::from_toml("merge_threshold = 70\ncoauthor = 30.5\n").unwrap();
        assert_eq!(r.merge_threshold, 70.0);
        assert_eq!(r.coauthor, 30.5);
        assert_eq!(r.orcid, 100.0);
    }

    #[test]
    fn bad_rules_rejected() {
        assert!(ScoringRules::from_toml("merge_threshold = 0").is_err());
        assert!(ScoringRules::from_toml("merge_threshold = -5").is_err());
        assert!(ScoringRules::from_toml("orcid = inf").is_err());
        assert!(ScoringRules::from_toml("unknown_weight = 3").is_err());
    }
}
