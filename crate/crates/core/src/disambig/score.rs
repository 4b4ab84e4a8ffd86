use std::collections::BTreeSet;

use super::rules::{HardConflict, ScoringRules};
use crate::corpus::{AuthorMention, Corpus, MentionRef, PublicationRecord};
use crate::{Error, Result};

/// Sentinel score for pairs that must never end up in one cluster.
pub const NEVER_MERGE: f64 = f64::NEG_INFINITY;

/// A mention together with the publication-level evidence around it.
#[derive(Debug, Clone)]
pub struct MentionContext<'a> {
    pub mention_ref: MentionRef,
    pub mention: &'a AuthorMention,
    pub publication: &'a PublicationRecord,
    /// Normalized last names of everyone else on the byline.
    pub coauthors: BTreeSet<&'a str>,
}

impl<'a> MentionContext<'a> {
    pub fn new(corpus: &'a Corpus, r: &MentionRef) -> Result<Self> {
        let publication = corpus
            .get(&r.pub_id)
            .ok_or_else(|| Error::UnknownPublication(r.pub_id.clone()))?;
        let mention = publication
            .mentions
            .get(r.position as usize)
            .ok_or_else(|| Error::invalid("mention", format!("no position {r}")))?;
        let coauthors = publication
            .mentions
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != r.position as usize)
            .map(|(_, m)| m.last_name.as_str())
            .collect();
        Ok(Self {
            mention_ref: r.clone(),
            mention,
            publication,
            coauthors,
        })
    }
}

/// Which evidence kinds fired for a pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairEvidence {
    pub hard_conflict: bool,
    pub orcid: bool,
    pub researcher_id: bool,
    pub email: bool,
    pub shared_coauthors: usize,
    pub organization: bool,
    pub journal: bool,
    pub subject_category: bool,
    pub first_name: bool,
}

fn same<T: PartialEq>(a: &Option<T>, b: &Option<T>) -> Option<bool> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x == y),
        _ => None,
    }
}

pub fn pair_evidence(a: &MentionContext, b: &MentionContext, rules: &ScoringRules) -> PairEvidence {
    let (ma, mb) = (a.mention, b.mention);
    let orcid = same(&ma.orcid, &mb.orcid);
    let rid = same(&ma.researcher_id, &mb.researcher_id);
    let email = same(&ma.email, &mb.email);
    let hard_conflict = (rules.is_hard(HardConflict::Orcid) && orcid == Some(false))
        || (rules.is_hard(HardConflict::ResearcherId) && rid == Some(false))
        || (rules.is_hard(HardConflict::Email) && email == Some(false));
    let sc_overlap = a
        .publication
        .subject_categories
        .iter()
        .any(|s| b.publication.subject_categories.contains(s));
    PairEvidence {
        hard_conflict,
        orcid: orcid == Some(true),
        researcher_id: rid == Some(true),
        email: email == Some(true),
        shared_coauthors: a.coauthors.intersection(&b.coauthors).count(),
        organization: same(&ma.organization_normalized, &mb.organization_normalized) == Some(true),
        journal: !a.publication.journal.is_empty() && a.publication.journal == b.publication.journal,
        subject_category: sc_overlap,
        first_name: ma.has_full_first_name()
            && mb.has_full_first_name()
            && ma.first_name == mb.first_name,
    }
}

impl PairEvidence {
    pub fn score(&self, rules: &ScoringRules) -> f64 {
        if self.hard_conflict {
            return NEVER_MERGE;
        }
        let flag = |on: bool, w: f64| if on { w } else { 0.0 };
        flag(self.orcid, rules.orcid)
            + flag(self.researcher_id, rules.researcher_id)
            + flag(self.email, rules.email)
            + self.shared_coauthors as f64 * rules.coauthor
            + flag(self.organization, rules.organization)
            + flag(self.journal, rules.journal)
            + flag(self.subject_category, rules.subject_category)
            + flag(self.first_name, rules.first_name)
    }
}

/// Sum of the weights of every satisfied evidence kind, or [`NEVER_MERGE`]
/// on a hard conflict. Two mentions of one publication cannot be one person.
pub fn score_pair(a: &MentionContext, b: &MentionContext, rules: &ScoringRules) -> Result<f64> {
    if a.mention_ref.pub_id == b.mention_ref.pub_id {
        return Err(Error::SamePublication {
            a: a.mention_ref.to_string(),
            b: b.mention_ref.to_string(),
        });
    }
    Ok(pair_evidence(a, b, rules).score(rules))
}
