//! Brute-force reference scorer.
//!
//! Recomputes FSS_R and FSS_U with plain linear scans over the corpus and
//! none of the indexes the production scorer builds. Subjects arrive with
//! their SC already fixed, so the oracle checks the arithmetic only.

use std::collections::BTreeMap;

use crate::corpus::{Corpus, SCScheme, YearRange};
use crate::fss::{Level, Mode};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSubject {
    pub subject_id: String,
    pub mode: Mode,
    pub university_id: String,
    pub sc_id: String,
    pub pub_ids: Vec<String>,
    pub t: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OracleScores {
    /// `(mode, subject_id) → fss_r`
    pub researchers: BTreeMap<(Mode, String), f64>,
    /// `(mode, sc_id) → mean fss_r over productive researchers`
    pub baselines: BTreeMap<(Mode, String), f64>,
    /// `(university_id, mode, level, key) → fss_u`
    pub universities: BTreeMap<(String, Mode, Level, String), f64>,
}

fn cell_mean(corpus: &Corpus, year: i32, sc: &str) -> Option<f64> {
    let mut n = 0u64;
    let mut c = 0u64;
    for p in corpus.publications() {
        if p.year == year && p.subject_categories.iter().any(|s| s == sc) {
            n += 1;
            c += p.citation_count;
        }
    }
    (n > 0).then(|| c as f64 / n as f64)
}

fn fss_r(subject: &OracleSubject, corpus: &Corpus, window: &YearRange) -> Result<f64> {
    let mut total = 0.0;
    for id in &subject.pub_ids {
        let Some(p) = corpus.publications().iter().find(|p| &p.pub_id == id) else {
            continue;
        };
        if p.year < window.start || p.year > window.end {
            continue;
        }
        let mut ratio = 0.0;
        for sc in &p.subject_categories {
            let mean = cell_mean(corpus, p.year, sc).ok_or_else(|| Error::MissingCell {
                year: p.year,
                sc: sc.clone(),
            })?;
            if mean > 0.0 {
                ratio += p.citation_count as f64 / mean;
            }
        }
        ratio /= p.subject_categories.len() as f64;
        total += ratio / p.mentions.len() as f64;
    }
    Ok(total / subject.t)
}

pub fn oracle_scores(
    subjects: &[OracleSubject],
    corpus: &Corpus,
    window: &YearRange,
    scheme: &SCScheme,
) -> Result<OracleScores> {
    let mut out = OracleScores::default();
    for s in subjects {
        out.researchers.insert((s.mode, s.subject_id.clone()), fss_r(s, corpus, window)?);
    }
    let mut sums: BTreeMap<(Mode, String), (f64, usize)> = BTreeMap::new();
    for s in subjects {
        let v = out.researchers[&(s.mode, s.subject_id.clone())];
        if v > 0.0 {
            let e = sums.entry((s.mode, s.sc_id.clone())).or_default();
            e.0 += v;
            e.1 += 1;
        }
    }
    out.baselines = sums.into_iter().map(|(k, (sum, n))| (k, sum / n as f64)).collect();

    for level in Level::ALL {
        let mut acc: BTreeMap<(String, Mode, Level, String), Vec<f64>> = BTreeMap::new();
        for s in subjects {
            let baseline = *out
                .baselines
                .get(&(s.mode, s.sc_id.clone()))
                .ok_or_else(|| Error::MissingBaseline(s.sc_id.clone()))?;
            let key = match level {
                Level::Sc => s.sc_id.clone(),
                Level::Area => scheme
                    .area_of(&s.sc_id)
                    .ok_or_else(|| Error::UnknownSubjectCategory(s.sc_id.clone()))?
                    .to_string(),
                Level::Overall => Level::OVERALL_KEY.to_string(),
            };
            let v = out.researchers[&(s.mode, s.subject_id.clone())];
            acc.entry((s.university_id.clone(), s.mode, level, key))
                .or_default()
                .push(v / baseline);
        }
        for (k, v) in acc {
            out.universities.insert(k, v.iter().sum::<f64>() / v.len() as f64);
        }
    }
    Ok(out)
}
