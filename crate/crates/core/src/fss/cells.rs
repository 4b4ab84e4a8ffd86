use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{Corpus, PublicationRecord};
use crate::{Error, Result};

/// Mean citations of every publication in one `(year, sc)` cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CitationCell {
    pub year: i32,
    pub sc_id: String,
    pub mean_citations: f64,
    pub pub_count: u64,
    pub citation_total: u64,
}

#[derive(Debug, Clone, Default)]
pub struct CellMap {
    cells: HashMap<(i32, String), CitationCell>,
}

impl CellMap {
    pub fn get(&self, year: i32, sc_id: &str) -> Option<&CitationCell> {
        self.cells.get(&(year, sc_id.to_string()))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cells ordered by `(year, sc)`.
    pub fn sorted(&self) -> Vec<&CitationCell> {
        let mut v: Vec<_> = self.cells.values().collect();
        v.sort_by(|a, b| (a.year, &a.sc_id).cmp(&(b.year, &b.sc_id)));
        v
    }
}

/// Builds a cell for every `(year, sc)` with at least one publication. A
/// publication listed under several SCs counts in each of their cells.
pub fn build_citation_cells(corpus: &Corpus) -> CellMap {
    let totals: BTreeMap<(i32, String), (u64, u64)> = corpus
        .publications()
        .par_iter()
        .fold(BTreeMap::new, |mut acc: BTreeMap<(i32, String), (u64, u64)>, p| {
            for sc in &p.subject_categories {
                let e = acc.entry((p.year, sc.clone())).or_default();
                e.0 += 1;
                e.1 += p.citation_count;
            }
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, (n, c)) in b {
                let e = a.entry(k).or_default();
                e.0 += n;
                e.1 += c;
            }
            a
        });
    let cells = totals
        .into_iter()
        .map(|((year, sc_id), (n, c))| {
            let cell = CitationCell {
                year,
                sc_id: sc_id.clone(),
                mean_citations: c as f64 / n as f64,
                pub_count: n,
                citation_total: c,
            };
            ((year, sc_id), cell)
        })
        .collect();
    CellMap { cells }
}

/// `cᵢ/c̄` against one SC cell; an all-zero cell yields 0.
pub fn normalized_citation_score(publication: &PublicationRecord, sc_id: &str, cells: &CellMap) -> Result<f64> {
    let cell = cells.get(publication.year, sc_id).ok_or_else(|| Error::MissingCell {
        year: publication.year,
        sc: sc_id.to_string(),
    })?;
    if cell.citation_total == 0 {
        return Ok(0.0);
    }
    Ok(publication.citation_count as f64 / cell.mean_citations)
}

/// The publication's normalized impact: `cᵢ/c̄` averaged over its SCs.
pub fn publication_impact(publication: &PublicationRecord, cells: &CellMap) -> Result<f64> {
    let scs = &publication.subject_categories;
    if scs.is_empty() {
        return Err(Error::NoSubjectCategory(publication.pub_id.clone()));
    }
    let mut sum = 0.0;
    for sc in scs {
        sum += normalized_citation_score(publication, sc, cells)?;
    }
    Ok(sum / scs.len() as f64)
}
