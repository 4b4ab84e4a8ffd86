use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cells::{publication_impact, CellMap};
use crate::corpus::{Corpus, IncidenceTable, RosterEntry, YearRange};
use crate::disambig::AuthorCluster;
use crate::keyed::keyed_choice;
use crate::staff::StaffUnit;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Supervised,
    Unsupervised,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Supervised => "supervised",
            Mode::Unsupervised => "unsupervised",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "supervised" => Ok(Mode::Supervised),
            "unsupervised" => Ok(Mode::Unsupervised),
            other => Err(Error::invalid("mode", other.to_string())),
        }
    }
}

/// Roster information the supervised SC fallback needs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RosterHints {
    pub field_code: String,
    pub sc_hint: Option<String>,
}

/// A researcher to be scored: an oeuvre, a years-on-staff count and a home
/// university.
#[derive(Debug, Clone, PartialEq)]
pub struct Subject {
    pub subject_id: String,
    pub mode: Mode,
    pub university_id: String,
    /// Sorted, distinct; only ids present in the corpus.
    pub pub_ids: Vec<String>,
    pub t: f64,
    pub hints: Option<RosterHints>,
}

impl Subject {
    /// A roster member. Publications not in the corpus (filtered at ingest)
    /// are dropped; a missing link list means no publications.
    pub fn supervised(entry: &RosterEntry, corpus: &Corpus, window: &YearRange) -> Self {
        let mut pub_ids: Vec<String> = entry
            .linked_pub_ids
            .iter()
            .flatten()
            .filter(|id| corpus.get(id).is_some())
            .cloned()
            .collect();
        pub_ids.sort();
        pub_ids.dedup();
        Subject {
            subject_id: entry.person_id.clone(),
            mode: Mode::Supervised,
            university_id: entry.university_id.clone(),
            pub_ids,
            t: entry.years_in(window) as f64,
            hints: Some(RosterHints {
                field_code: entry.field_code.clone(),
                sc_hint: entry.sc_hint.clone(),
            }),
        }
    }

    /// A derived staff unit; its oeuvre is the union of its clusters'
    /// publications and `t` is the full window length.
    pub fn unsupervised(
        unit: &StaffUnit,
        clusters: &HashMap<&str, &AuthorCluster>,
        window: &YearRange,
    ) -> Result<Self> {
        let mut pub_ids = BTreeSet::new();
        for id in &unit.cluster_ids {
            let c = clusters
                .get(id.as_str())
                .ok_or_else(|| Error::invalid("staff unit", format!("unknown cluster {id}")))?;
            pub_ids.extend(c.pub_ids().map(str::to_string));
        }
        Ok(Subject {
            subject_id: unit.unit_id().to_string(),
            mode: Mode::Unsupervised,
            university_id: unit.university_id.clone(),
            pub_ids: pub_ids.into_iter().collect(),
            t: window.len() as f64,
            hints: None,
        })
    }
}

/// Context shared by every subject of a scoring run.
#[derive(Debug, Clone, Copy)]
pub struct ScoringContext<'a> {
    pub corpus: &'a Corpus,
    pub cells: &'a CellMap,
    pub window: YearRange,
    /// Years whose production decides a supervised subject's SC.
    pub lookback: YearRange,
    pub incidence: Option<&'a IncidenceTable>,
    pub seed: u64,
}

fn sc_counts<'a>(ids: impl Iterator<Item = &'a str>, corpus: &'a Corpus, years: Option<&YearRange>) -> BTreeMap<&'a str, usize> {
    let mut counts = BTreeMap::new();
    for id in ids {
        let Some(p) = corpus.get(id) else { continue };
        if years.is_some_and(|y| !y.contains(p.year)) {
            continue;
        }
        for sc in &p.subject_categories {
            *counts.entry(sc.as_str()).or_default() += 1;
        }
    }
    counts
}

fn modes<'a>(counts: &BTreeMap<&'a str, usize>) -> Vec<&'a str> {
    let top = counts.values().copied().max().unwrap_or(0);
    counts.iter().filter(|(_, &c)| c == top && c > 0).map(|(s, _)| *s).collect()
}

/// The subject's prevailing SC.
///
/// Unsupervised: the most frequent SC over the whole oeuvre; ties are broken
/// by a draw keyed on `(seed, subject_id)`. Supervised: the most frequent SC
/// over the lookback years; with no publications the roster's SC hint, then
/// the field's highest-incidence SC, is used; on a tie the hint wins if it is
/// among the tied SCs, then the tied SC with highest incidence for the field,
/// then the smallest tied SC id.
pub fn assign_prevailing_sc(subject: &Subject, ctx: &ScoringContext<'_>) -> Result<String> {
    let ids = subject.pub_ids.iter().map(String::as_str);
    match subject.mode {
        Mode::Unsupervised => {
            let tied = modes(&sc_counts(ids, ctx.corpus, None));
            keyed_choice(ctx.seed, &subject.subject_id, &tied)
                .map(|s| s.to_string())
                .ok_or_else(|| Error::invalid("subject", format!("{} has no publications", subject.subject_id)))
        }
        Mode::Supervised => {
            let tied = modes(&sc_counts(ids, ctx.corpus, Some(&ctx.lookback)));
            if tied.len() == 1 {
                return Ok(tied[0].to_string());
            }
            let hints = subject.hints.as_ref();
            let hint = hints.and_then(|h| h.sc_hint.as_deref());
            let from_incidence = |candidates: Option<&[String]>| {
                let h = hints?;
                ctx.incidence?.best(&h.field_code, candidates).map(str::to_string)
            };
            if tied.is_empty() {
                return hint
                    .map(str::to_string)
                    .or_else(|| from_incidence(None))
                    .ok_or_else(|| {
                        Error::invalid(
                            "subject",
                            format!("{} has no publications, no SC hint and no incidence row", subject.subject_id),
                        )
                    });
            }
            if let Some(h) = hint.filter(|h| tied.contains(h)) {
                return Ok(h.to_string());
            }
            let owned: Vec<String> = tied.iter().map(|s| s.to_string()).collect();
            Ok(from_incidence(Some(&owned)).unwrap_or_else(|| owned[0].clone()))
        }
    }
}

/// One publication's contribution to a score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PublicationTerm {
    pub pub_id: String,
    pub citations: u64,
    /// `c̄` of each of the publication's SC cells.
    pub cell_means: Vec<f64>,
    /// `cᵢ/c̄`, averaged over SCs.
    pub normalized: f64,
    /// `fᵢ`
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResearcherScore {
    pub subject_id: String,
    pub mode: Mode,
    pub university_id: String,
    pub sc_id: String,
    pub t: f64,
    pub n_pubs: usize,
    pub fss_r: f64,
    pub terms: Vec<PublicationTerm>,
}

/// `(1/t)·Σ (cᵢ/c̄)·fᵢ` over the subject's window publications, in pub id
/// order. Both modes go through this function.
pub fn compute_fss_r(subject: &Subject, sc_id: &str, ctx: &ScoringContext<'_>) -> Result<ResearcherScore> {
    if !(subject.t > 0.0) {
        return Err(Error::invalid(
            "t",
            format!("{} has t = {}", subject.subject_id, subject.t),
        ));
    }
    let mut terms = Vec::new();
    let mut sum = 0.0;
    for id in &subject.pub_ids {
        let p = ctx.corpus.get(id).ok_or_else(|| Error::UnknownPublication(id.clone()))?;
        if !ctx.window.contains(p.year) {
            continue;
        }
        let normalized = publication_impact(p, ctx.cells)?;
        let fraction = 1.0 / p.byline_len() as f64;
        sum += normalized * fraction;
        terms.push(PublicationTerm {
            pub_id: p.pub_id.clone(),
            citations: p.citation_count,
            cell_means: p
                .subject_categories
                .iter()
                .map(|sc| ctx.cells.get(p.year, sc).map_or(0.0, |c| c.mean_citations))
                .collect(),
            normalized,
            fraction,
        });
    }
    Ok(ResearcherScore {
        subject_id: subject.subject_id.clone(),
        mode: subject.mode,
        university_id: subject.university_id.clone(),
        sc_id: sc_id.to_string(),
        t: subject.t,
        n_pubs: terms.len(),
        fss_r: sum / subject.t,
        terms,
    })
}

/// Assigns SCs and scores every subject in parallel; output follows input
/// order.
pub fn score_subjects(subjects: &[Subject], ctx: &ScoringContext<'_>) -> Result<Vec<ResearcherScore>> {
    subjects
        .par_iter()
        .map(|s| {
            let sc = assign_prevailing_sc(s, ctx)?;
            compute_fss_r(s, &sc, ctx)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fss::cells::build_citation_cells;
    use crate::fss::cells::tests::cited;

    fn window() -> YearRange {
        YearRange::new(2015, 2019).unwrap()
    }

    fn subject(mode: Mode, ids: &[&str], t: f64) -> Subject {
        Subject {
            subject_id: "S1".into(),
            mode,
            university_id: "U".into(),
            pub_ids: ids.iter().map(|s| s.to_string()).collect(),
            t,
            hints: None,
        }
    }

    fn ctx<'a>(corpus: &'a Corpus, cells: &'a CellMap, incidence: Option<&'a IncidenceTable>) -> ScoringContext<'a> {
        ScoringContext {
            corpus,
            cells,
            window: window(),
            lookback: YearRange::new(2001, 2019).unwrap(),
            incidence,
            seed: 7,
        }
    }

    #[test]
    fn no_window_pubs_scores_zero() {
        let corpus = Corpus::new(vec![cited("P1", 2010, &["A"], 5, 1)]).unwrap();
        let cells = build_citation_cells(&corpus);
        let s = compute_fss_r(&subject(Mode::Unsupervised, &["P1"], 5.0), "A", &ctx(&corpus, &cells, None)).unwrap();
        assert_eq!((s.fss_r, s.n_pubs), (0.0, 0));
    }

    #[test]
    fn one_pub_three_authors() {
        // c=6 in a cell with mean 3: the other cell member has 0 citations
        let corpus = Corpus::new(vec![cited("P1", 2016, &["A"], 6, 3), cited("P2", 2016, &["A"], 0, 1)]).unwrap();
        let cells = build_citation_cells(&corpus);
        let s = compute_fss_r(&subject(Mode::Unsupervised, &["P1"], 5.0), "A", &ctx(&corpus, &cells, None)).unwrap();
        let oracle = (1.0 / 5.0) * (6.0 / 3.0) * (1.0 / 3.0);
        assert!((s.fss_r - oracle).abs() < 1e-15);
        assert!((s.fss_r - 0.133_333_333_333_333_3).abs() < 1e-12);
    }

    #[test]
    fn two_pubs_t4() {
        // P1: c=4, mean 4, solo. P2: c=0, mean 2 (partner P3 has 4), two authors
        let corpus = Corpus::new(vec![
            cited("P1", 2016, &["A"], 4, 1),
            cited("P2", 2017, &["A"], 0, 2),
            cited("P3", 2017, &["A"], 4, 1),
        ])
        .unwrap();
        let cells = build_citation_cells(&corpus);
        let s = compute_fss_r(&subject(Mode::Supervised, &["P1", "P2"], 4.0), "A", &ctx(&corpus, &cells, None)).unwrap();
        assert_eq!(s.fss_r, 0.25);
        assert_eq!(s.terms[1].cell_means, [2.0]);
    }

    #[test]
    fn zero_t_is_error() {
        let corpus = Corpus::default();
        let cells = CellMap::default();
        assert!(compute_fss_r(&subject(Mode::Supervised, &[], 0.0), "A", &ctx(&corpus, &cells, None)).is_err());
    }

    #[test]
    fn modes_share_the_formula() {
        let corpus = Corpus::new(vec![cited("P1", 2016, &["A"], 3, 2), cited("P2", 2018, &["A"], 1, 4)]).unwrap();
        let cells = build_citation_cells(&corpus);
        let c = ctx(&corpus, &cells, None);
        let a = compute_fss_r(&subject(Mode::Supervised, &["P1", "P2"], 5.0), "A", &c).unwrap();
        let b = compute_fss_r(&subject(Mode::Unsupervised, &["P1", "P2"], 5.0), "A", &c).unwrap();
        assert_eq!(a.fss_r.to_bits(), b.fss_r.to_bits());
    }

    #[test]
    fn unique_mode_wins() {
        let corpus = Corpus::new(vec![
            cited("P1", 2016, &["A"], 0, 1),
            cited("P2", 2016, &["A"], 0, 1),
            cited("P3", 2016, &["A"], 0, 1),
            cited("P4", 2016, &["B"], 0, 1),
        ])
        .unwrap();
        let cells = build_citation_cells(&corpus);
        let c = ctx(&corpus, &cells, None);
        for mode in [Mode::Supervised, Mode::Unsupervised] {
            assert_eq!(assign_prevailing_sc(&subject(mode, &["P1", "P2", "P3", "P4"], 5.0), &c).unwrap(), "A");
        }
    }

    #[test]
    fn unsupervised_tie_is_keyed() {
        let corpus = Corpus::new(vec![
            cited("P1", 2016, &["A"], 0, 1),
            cited("P2", 2016, &["A"], 0, 1),
            cited("P3", 2016, &["B"], 0, 1),
            cited("P4", 2016, &["B"], 0, 1),
        ])
        .unwrap();
        let cells = build_citation_cells(&corpus);
        let c = ctx(&corpus, &cells, None);
        let s = subject(Mode::Unsupervised, &["P1", "P2", "P3", "P4"], 5.0);
        let first = assign_prevailing_sc(&s, &c).unwrap();
        assert!(first == "A" || first == "B");
        let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let again = pool.install(|| score_subjects(&[s.clone(), s.clone()], &c).unwrap());
        assert!(again.iter().all(|r| r.sc_id == first));
        // different subjects can land on different sides of the tie
        let picks: BTreeSet<String> = (0..40)
            .map(|i| {
                let mut s = s.clone();
                s.subject_id = format!("S{i}");
                assign_prevailing_sc(&s, &c).unwrap()
            })
            .collect();
        assert_eq!(picks.len(), 2);
    }

    #[test]
    fn supervised_fallbacks() {
        let corpus = Corpus::new(vec![
            cited("P1", 2016, &["A"], 0, 1),
            cited("P2", 2016, &["B"], 0, 1),
            cited("P3", 2000, &["C"], 0, 1),
        ])
        .unwrap();
        let cells = build_citation_cells(&corpus);
        let mut inc = IncidenceTable::default();
        inc.insert("F1", "A", 0.2);
        inc.insert("F1", "B", 0.5);
        inc.insert("F1", "D", 0.9);
        let c = ctx(&corpus, &cells, Some(&inc));

        let mut s = subject(Mode::Supervised, &[], 5.0);
        s.hints = Some(RosterHints { field_code: "F1".into(), sc_hint: Some("B".into()) });
        assert_eq!(assign_prevailing_sc(&s, &c).unwrap(), "B");
        s.hints = Some(RosterHints { field_code: "F1".into(), sc_hint: None });
        assert_eq!(assign_prevailing_sc(&s, &c).unwrap(), "D");
        s.hints = Some(RosterHints { field_code: "F9".into(), sc_hint: None });
        assert!(assign_prevailing_sc(&s, &c).is_err());

        // P3 lies before the lookback years, so only A and B tie
        let mut s = subject(Mode::Supervised, &["P1", "P2", "P3"], 5.0);
        s.hints = Some(RosterHints { field_code: "F1".into(), sc_hint: Some("A".into()) });
        assert_eq!(assign_prevailing_sc(&s, &c).unwrap(), "A");
        s.hints = Some(RosterHints { field_code: "F1".into(), sc_hint: Some("D".into()) });
        assert_eq!(assign_prevailing_sc(&s, &c).unwrap(), "B");
        s.hints = Some(RosterHints { field_code: "F9".into(), sc_hint: None });
        assert_eq!(assign_prevailing_sc(&s, &c).unwrap(), "A");
    }
}
