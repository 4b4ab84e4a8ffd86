//! Fractional Scientific Strength.
//!
//! A researcher's FSS_R is the field-normalized, co-author-fractionalized
//! citation impact of their window publications per year on staff. A
//! university's FSS_U averages its staff's FSS_R, each scaled by the mean of
//! the productive researchers in the same subject category.

mod aggregate;
mod cells;
mod researcher;

use std::io::{Read, Write};

use serde::Deserialize;

use crate::{Error, Result};

pub use aggregate::{
    apply_exclusions, compute_fss_u, compute_sc_baselines, ExclusionParams, ExclusionReason, Exclusions, Level,
    ObsRule, SCBaseline, UniversityScore,
};
pub use cells::{build_citation_cells, normalized_citation_score, publication_impact, CellMap, CitationCell};
pub use researcher::{
    assign_prevailing_sc, compute_fss_r, score_subjects, Mode, PublicationTerm, ResearcherScore, RosterHints,
    ScoringContext, Subject,
};

/// `scores_researchers.csv`: `subject_id,mode,university_id,sc,t,n,fss_r`.
pub fn write_researcher_scores(scores: &[ResearcherScore], w: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["subject_id", "mode", "university_id", "sc", "t", "n", "fss_r"])?;
    for s in scores {
        w.write_record([
            s.subject_id.as_str(),
            &s.mode.to_string(),
            &s.university_id,
            &s.sc_id,
            &s.t.to_string(),
            &s.n_pubs.to_string(),
            &s.fss_r.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<scores_researchers>", e))
}

/// Reads scores back without their per-publication terms.
pub fn read_researcher_scores(r: impl Read) -> Result<Vec<ResearcherScore>> {
    #[derive(Deserialize)]
    struct Row {
        subject_id: String,
        mode: String,
        university_id: String,
        sc: String,
        t: f64,
        n: usize,
        fss_r: f64,
    }
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let row = row?;
        out.push(ResearcherScore {
            subject_id: row.subject_id,
            mode: row.mode.parse()?,
            university_id: row.university_id,
            sc_id: row.sc,
            t: row.t,
            n_pubs: row.n,
            fss_r: row.fss_r,
            terms: Vec::new(),
        });
    }
    Ok(out)
}

/// `scores_universities.csv`: `university_id,mode,level,key,rs_u,fss_u`.
pub fn write_university_scores(scores: &[UniversityScore], w: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["university_id", "mode", "level", "key", "rs_u", "fss_u"])?;
    for s in scores {
        w.write_record([
            s.university_id.as_str(),
            &s.mode.to_string(),
            &s.level.to_string(),
            &s.level_key,
            &s.rs_u.to_string(),
            &s.fss_u.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<scores_universities>", e))
}

pub fn read_university_scores(r: impl Read) -> Result<Vec<UniversityScore>> {
    #[derive(Deserialize)]
    struct Row {
        university_id: String,
        mode: String,
        level: String,
        key: String,
        rs_u: usize,
        fss_u: f64,
    }
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for row in rdr.deserialize::<Row>() {
        let row = row?;
        out.push(UniversityScore {
            university_id: row.university_id,
            mode: row.mode.parse()?,
            level: row.level.parse()?,
            level_key: row.key,
            rs_u: row.rs_u,
            fss_u: row.fss_u,
        });
    }
    Ok(out)
}
