//! Rule-based author-name disambiguation.
//!
//! Mentions are blocked on `last_name|first_initial`, scored pairwise from
//! shared evidence (identifiers, email, co-authors, organization, venue,
//! subject category, first name) and agglomerated with average linkage
//! under hard conflicts. Each resulting cluster is a proto-individual
//! summarized by modal affiliation and email.
//!
//! This is a configurable approximation of the rule-based scoring family;
//! the default weights are not a reimplementation of any published rule set.
//! One person may end up split over several clusters; no repair pass runs.

mod block;
mod cluster;
pub mod eval;
mod rules;
mod score;
mod summary;

#[cfg(test)]
pub(crate) use score::tests as fixtures;

use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, MentionRef};
use crate::{Error, Result};

pub use block::{block_mentions, Block};
pub use cluster::{agglomerate, block_scores, cluster_block, Merge, ScoreMatrix};
pub use rules::{HardConflict, ScoringRules};
pub use score::{pair_evidence, score_pair, MentionContext, PairEvidence, NEVER_MERGE};
pub use summary::{modal, summarize_cluster};

/// A proto-individual. Fields serialize in the order of the cluster output
/// table (`cluster_id`, `n_pubs`, years, names, email, organization, city,
/// country, orcid, researcher id) followed by the member mentions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorCluster {
    pub cluster_id: String,
    pub n_pubs: usize,
    pub first_year: i32,
    pub last_year: i32,
    pub academic_age: i32,
    pub full_name: String,
    pub last_name: String,
    pub first_name: String,
    pub email: Option<String>,
    pub organization: Option<String>,
    pub city: Option<String>,
    pub country: Option<String>,
    pub orcid: Option<String>,
    pub researcher_id: Option<String>,
    pub mention_refs: Vec<MentionRef>,
}

impl AuthorCluster {
    pub fn pub_ids(&self) -> impl Iterator<Item = &str> {
        let mut last: Option<&str> = None;
        self.mention_refs.iter().filter_map(move |r| {
            let id = r.pub_id.as_str();
            if last == Some(id) {
                None
            } else {
                last = Some(id);
                Some(id)
            }
        })
    }
}

/// Clusters the whole corpus, block by block (blocks run in parallel), and
/// returns clusters ordered by id.
pub fn disambiguate(corpus: &Corpus, rules: &ScoringRules) -> Result<Vec<AuthorCluster>> {
    rules.validate()?;
    let blocks = block_mentions(corpus);
    let per_block: Vec<Vec<AuthorCluster>> = blocks
        .par_iter()
        .map(|b| cluster_block(b, corpus, rules))
        .collect::<Result<_>>()?;
    let mut clusters: Vec<AuthorCluster> = per_block.into_iter().flatten().collect();
    clusters.sort_by(|a, b| a.mention_refs[0].cmp(&b.mention_refs[0]));
    Ok(clusters)
}

pub fn write_clusters(clusters: &[AuthorCluster], mut w: impl Write) -> Result<()> {
    for c in clusters {
        serde_json::to_writer(&mut w, c)?;
        w.write_all(b"\n").map_err(|e| Error::io("<clusters>", e))?;
    }
    Ok(())
}

pub fn read_clusters(r: impl BufRead) -> Result<Vec<AuthorCluster>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::io("<clusters>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let de = &mut serde_json::Deserializer::from_str(&line);
        out.push(serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
            line: i + 1,
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })?);
    }
    Ok(out)
}

pub fn save_clusters(clusters: &[AuthorCluster], path: &Path) -> Result<()> {
    let f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    write_clusters(clusters, &mut w)?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_clusters(path: &Path) -> Result<Vec<AuthorCluster>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_clusters(std::io::BufReader::new(f))
}
