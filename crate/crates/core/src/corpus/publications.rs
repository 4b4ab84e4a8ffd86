use std::collections::{BTreeSet, HashSet};
use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::{
    open, AuthorMention, Corpus, DocType, PublicationRecord, SourceIndex, YearRange,
};
use crate::normalize::{is_valid_orcid, normalize, normalize_email};
use crate::{Error, Result};

/// Filters applied while reading `publications.jsonl`.
#[derive(Debug, Clone)]
pub struct IngestOptions {
    pub window: YearRange,
    pub doc_filter: BTreeSet<DocType>,
    /// Number of years, ending at the window end, of production kept for
    /// subject-category assignment (19 gives 2001-2019 for a 2015-2019 window).
    pub sc_lookback: u32,
    /// Last year kept. Defaults to the window end; the recency filter needs
    /// publications after the window, so pipelines pass the recency year here.
    pub through_year: Option<i32>,
}

impl IngestOptions {
    pub fn new(window: YearRange) -> Self {
        Self {
            window,
            doc_filter: DocType::default_filter(),
            sc_lookback: 19,
            through_year: None,
        }
    }

    /// The years a publication may fall in to be kept.
    pub fn load_range(&self) -> YearRange {
        let lookback_start = self.window.end - self.sc_lookback.max(1) as i32 + 1;
        let end = self.through_year.unwrap_or(self.window.end).max(self.window.end);
        YearRange {
            start: lookback_start.min(self.window.start),
            end,
        }
    }
}

const PUB_KEYS: &[&str] = &[
    "pub_id",
    "year",
    "doc_type",
    "source_index",
    "subject_categories",
    "journal",
    "mentions",
    "citation_count",
    "census_date",
];

const MENTION_KEYS: &[&str] = &[
    "full_name",
    "last_name",
    "first_name",
    "email",
    "orcid",
    "researcher_id",
    "affiliation",
    "organization",
    "city",
    "country",
];

#[derive(Deserialize)]
struct RawPublication {
    pub_id: String,
    year: i32,
    doc_type: DocType,
    source_index: SourceIndex,
    subject_categories: Vec<String>,
    #[serde(default)]
    journal: String,
    mentions: Vec<RawMention>,
    citation_count: u64,
    census_date: chrono::NaiveDate,
}

#[derive(Deserialize)]
struct RawMention {
    full_name: String,
    last_name: Option<String>,
    first_name: Option<String>,
    email: Option<String>,
    orcid: Option<String>,
    researcher_id: Option<String>,
    #[serde(default)]
    affiliation: String,
    organization: Option<String>,
    city: Option<String>,
    country: Option<String>,
}

fn non_blank(s: Option<String>) -> Option<String> {
    s.map(|v| v.trim().to_string()).filter(|v| !v.is_empty())
}

fn normalized_opt(s: Option<String>) -> Option<String> {
    non_blank(s).map(|v| normalize(&v)).filter(|v| !v.is_empty())
}

/// Splits `Last, First` (or `First Middle Last` when there is no comma).
fn split_full_name(full: &str) -> (String, String) {
    if let Some((last, first)) = full.split_once(',') {
        return (last.to_string(), first.to_string());
    }
    let mut tokens: Vec<&str> = full.split_whitespace().collect();
    match tokens.pop() {
        Some(last) => (last.to_string(), tokens.join(" ")),
        None => (String::new(), String::new()),
    }
}

fn convert_mention(raw: RawMention, line: usize, idx: usize) -> Result<AuthorMention> {
    let field = |name: &str| format!("mentions[{idx}].{name}");
    let (split_last, split_first) = split_full_name(&raw.full_name);
    let last_name = normalize(&non_blank(raw.last_name).unwrap_or(split_last));
    if last_name.is_empty() {
        return Err(Error::Parse {
            line,
            field: field("last_name"),
            message: "empty after normalization".into(),
        });
    }
    let first_name = normalize(&non_blank(raw.first_name).unwrap_or(split_first));
    let orcid = non_blank(raw.orcid).map(|o| o.to_uppercase());
    if let Some(o) = &orcid {
        if !is_valid_orcid(o) {
            return Err(Error::Parse {
                line,
                field: field("orcid"),
                message: format!("`{o}` is not a 0000-0000-0000-000X identifier"),
            });
        }
    }
    Ok(AuthorMention {
        raw_full_name: raw.full_name.trim().to_string(),
        last_name,
        first_name,
        email: raw.email.as_deref().and_then(normalize_email),
        orcid,
        researcher_id: non_blank(raw.researcher_id),
        affiliation_raw: raw.affiliation.trim().to_string(),
        organization_normalized: normalized_opt(raw.organization),
        city: normalized_opt(raw.city),
        country: normalized_opt(raw.country),
    })
}

fn warn_unknown_keys(value: &serde_json::Value, line: usize) {
    let Some(obj) = value.as_object() else { return };
    for k in obj.keys() {
        if !PUB_KEYS.contains(&k.as_str()) {
            log::warn!("publications line {line}: ignoring unknown field `{k}`");
        }
    }
    if let Some(mentions) = obj.get("mentions").and_then(|m| m.as_array()) {
        for (i, m) in mentions.iter().enumerate() {
            for k in m.as_object().into_iter().flat_map(|o| o.keys()) {
                if !MENTION_KEYS.contains(&k.as_str()) {
                    log::warn!("publications line {line}: ignoring unknown field `mentions[{i}].{k}`");
                }
            }
        }
    }
}

fn parse_line(text: &str, line: usize) -> Result<PublicationRecord> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line,
        field: "<record>".into(),
        message: e.to_string(),
    })?;
    warn_unknown_keys(&value, line);
    let raw: RawPublication = serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::Parse {
            line,
            field: if path == "." { "<record>".into() } else { path },
            message: e.into_inner().to_string(),
        }
    })?;

    let bad = |field: &str, message: String| Error::Parse {
        line,
        field: field.into(),
        message,
    };
    if raw.pub_id.trim().is_empty() {
        return Err(bad("pub_id", "empty".into()));
    }
    if raw.mentions.is_empty() {
        return Err(bad("mentions", "publication has no authors".into()));
    }
    let subject_categories: Vec<String> = raw
        .subject_categories
        .iter()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .collect();
    if subject_categories.is_empty() {
        return Err(bad("subject_categories", "at least one required".into()));
    }
    use chrono::Datelike;
    if raw.year > raw.census_date.year() {
        return Err(bad(
            "year",
            format!("{} is after the census date {}", raw.year, raw.census_date),
        ));
    }
    let mentions = raw
        .mentions
        .into_iter()
        .enumerate()
        .map(|(i, m)| convert_mention(m, line, i))
        .collect::<Result<Vec<_>>>()?;

    Ok(PublicationRecord {
        pub_id: raw.pub_id.trim().to_string(),
        year: raw.year,
        doc_type: raw.doc_type,
        source_index: raw.source_index,
        subject_categories,
        journal: normalize(&raw.journal),
        mentions,
        citation_count: raw.citation_count,
        census_date: raw.census_date,
    })
}

/// Parses JSON Lines publication records, validating every line and keeping
/// core-collection records of allowed document types inside the load range.
pub fn parse_publications(mut reader: impl Read, opts: &IngestOptions) -> Result<Corpus> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| Error::io("<publications>", e))?;
    let range = opts.load_range();
    let mut seen = HashSet::new();
    let mut kept = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = parse_line(line, i + 1)?;
        if !seen.insert(rec.pub_id.clone()) {
            return Err(Error::Duplicate {
                kind: "pub_id",
                id: rec.pub_id,
            });
        }
        if rec.source_index == SourceIndex::Core
            && opts.doc_filter.contains(&rec.doc_type)
            && range.contains(rec.year)
        {
            kept.push(rec);
        }
    }
    Corpus::new(kept)
}

pub fn load_publications(path: &Path, opts: &IngestOptions) -> Result<Corpus> {
    parse_publications(open(path)?, opts)
}
