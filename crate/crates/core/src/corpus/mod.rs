//! Publications, author mentions, staff rosters, the university registry and
//! the subject-category scheme.
//!
//! Input formats:
//!
//! - `publications.jsonl`: one publication per line (see [`load_publications`]).
//! - `roster.csv`: `person_id,full_name,university_id,field_code,sc_hint,active_years,linked_pub_ids`.
//! - `registry.csv`: `university_id,official_name,email_domains,organization_variants`.
//! - `scheme.csv`: `sc_id,name,area_id,excluded_area,is_multidisciplinary`.
//! - `incidence.csv` (optional): `field_code,sc_id,incidence`.
//!
//! List-valued CSV cells are `;`-separated. Unknown JSON keys and CSV columns
//! are ignored with a warning.

mod publications;
mod registry;
mod roster;
mod scheme;

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use publications::{load_publications, parse_publications, IngestOptions};
pub use registry::{load_registry, parse_registry, write_registry, University, UniversityRegistry};
pub use roster::{load_roster, parse_roster, write_roster, RosterEntry};
pub use scheme::{
    load_incidence, load_scheme, parse_incidence, parse_scheme, write_incidence, write_scheme, IncidenceTable,
    SCScheme, SubjectCategory,
};

/// Inclusive range of calendar years. Deserializes from `{start, end}` or
/// from a string such as `"2015:2019"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct YearRange {
    pub start: i32,
    pub end: i32,
}

impl YearRange {
    pub fn new(start: i32, end: i32) -> Result<Self> {
        if start > end {
            return Err(Error::invalid(
                "year range",
                format!("start {start} is after end {end}"),
            ));
        }
        Ok(Self { start, end })
    }

    pub fn contains(&self, year: i32) -> bool {
        (self.start..=self.end).contains(&year)
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start..=self.end
    }
}

impl<'de> Deserialize<'de> for YearRange {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Text(String),
            Table { start: i32, end: i32 },
        }
        match Repr::deserialize(d)? {
            Repr::Text(s) => s.parse().map_err(serde::de::Error::custom),
            Repr::Table { start, end } => YearRange::new(start, end).map_err(serde::de::Error::custom),
        }
    }
}

impl fmt::Display for YearRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.start, self.end)
    }
}

impl FromStr for YearRange {
    type Err = Error;

    /// Accepts `2015:2019`, `2015-2019` or a single year.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid("year range", format!("cannot parse `{s}`"));
        let s = s.trim();
        let (a, b) = match s.split_once([':', '-']) {
            Some((a, b)) => (a, b),
            None => (s, s),
        };
        let start = a.trim().parse().map_err(|_| bad())?;
        let end = b.trim().parse().map_err(|_| bad())?;
        YearRange::new(start, end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DocType {
    Article,
    Review,
    Letter,
    Proceedings,
    Other,
}

impl DocType {
    pub const ALL: [DocType; 5] = [
        DocType::Article,
        DocType::Review,
        DocType::Letter,
        DocType::Proceedings,
        DocType::Other,
    ];

    /// Articles, reviews, letters and proceedings.
    pub fn default_filter() -> BTreeSet<DocType> {
        [
            DocType::Article,
            DocType::Review,
            DocType::Letter,
            DocType::Proceedings,
        ]
        .into_iter()
        .collect()
    }
}

impl FromStr for DocType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_lowercase().as_str() {
            "article" => Ok(DocType::Article),
            "review" => Ok(DocType::Review),
            "letter" => Ok(DocType::Letter),
            "proceedings" => Ok(DocType::Proceedings),
            "other" => Ok(DocType::Other),
            other => Err(Error::invalid("doc type", other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceIndex {
    Core,
    Esci,
    Other,
}

/// One name on a byline, with the evidence attached to it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorMention {
    pub raw_full_name: String,
    pub last_name: String,
    pub first_name: String,
    pub email: Option<String>,
    pub orcid: Option<String>,
    pub researcher_id: Option<String>,
    pub affiliation_raw: String,
    pub organization_normalized: Option<String>,
    pub city: Option<String>,
    pub country: Option<String>,
}

impl AuthorMention {
    pub fn first_initial(&self) -> Option<char> {
        self.first_name.chars().find(|c| c.is_alphanumeric())
    }

    /// `last|i`, the key used to decide which mentions are ever compared.
    pub fn block_key(&self) -> String {
        match self.first_initial() {
            Some(i) => format!("{}|{}", self.last_name, i),
            None => format!("{}|", self.last_name),
        }
    }

    /// Whether the first name looks spelled out rather than initials only.
    pub fn has_full_first_name(&self) -> bool {
        self.first_name
            .split([' ', '-'])
            .next()
            .is_some_and(|tok| tok.chars().count() >= 3)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub pub_id: String,
    pub year: i32,
    pub doc_type: DocType,
    pub source_index: SourceIndex,
    pub subject_categories: Vec<String>,
    pub journal: String,
    pub mentions: Vec<AuthorMention>,
    pub citation_count: u64,
    pub census_date: chrono::NaiveDate,
}

impl PublicationRecord {
    pub fn byline_len(&self) -> usize {
        self.mentions.len()
    }
}

/// `(pub_id, position)`: the address of one mention. Orders lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MentionRef {
    pub pub_id: String,
    pub position: u32,
}

impl MentionRef {
    pub fn new(pub_id: impl Into<String>, position: u32) -> Self {
        Self {
            pub_id: pub_id.into(),
            position,
        }
    }
}

impl fmt::Display for MentionRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.pub_id, self.position)
    }
}

/// An immutable, pub_id-ordered set of publications.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    publications: Vec<PublicationRecord>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    pub fn new(mut publications: Vec<PublicationRecord>) -> Result<Self> {
        publications.sort_by(|a, b| a.pub_id.cmp(&b.pub_id));
        let mut by_id = HashMap::with_capacity(publications.len());
        for (i, p) in publications.iter().enumerate() {
            if by_id.insert(p.pub_id.clone(), i).is_some() {
                return Err(Error::Duplicate {
                    kind: "pub_id",
                    id: p.pub_id.clone(),
                });
            }
        }
        Ok(Self {
            publications,
            by_id,
        })
    }

    pub fn publications(&self) -> &[PublicationRecord] {
        &self.publications
    }

    pub fn len(&self) -> usize {
        self.publications.len()
    }

    pub fn is_empty(&self) -> bool {
        self.publications.is_empty()
    }

    pub fn get(&self, pub_id: &str) -> Option<&PublicationRecord> {
        self.by_id.get(pub_id).map(|&i| &self.publications[i])
    }

    pub fn mention(&self, r: &MentionRef) -> Option<&AuthorMention> {
        self.get(&r.pub_id)
            .and_then(|p| p.mentions.get(r.position as usize))
    }

    pub fn mention_count(&self) -> usize {
        self.publications.iter().map(|p| p.mentions.len()).sum()
    }

    /// Every mention address, in corpus order.
    pub fn mention_refs(&self) -> impl Iterator<Item = MentionRef> + '_ {
        self.publications.iter().flat_map(|p| {
            (0..p.mentions.len()).map(move |i| MentionRef::new(p.pub_id.clone(), i as u32))
        })
    }

    /// Serialized normal form: one JSON record per line.
    pub fn to_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for p in &self.publications {
            out.push_str(&serde_json::to_string(p)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn write_jsonl(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_jsonl()?).map_err(|e| Error::io(path, e))
    }

    /// Reads the normal form written by [`Corpus::write_jsonl`].
    pub fn read_jsonl(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut pubs = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let de = &mut serde_json::Deserializer::from_str(line);
            let rec: PublicationRecord =
                serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
                    line: i + 1,
                    field: e.path().to_string(),
                    message: e.inner().to_string(),
                })?;
            pubs.push(rec);
        }
        Corpus::new(pubs)
    }
}

pub(crate) fn split_list(cell: &str) -> Vec<String> {
    cell.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

pub(crate) fn warn_unknown_headers(file: &str, headers: &csv::StringRecord, known: &[&str]) {
    for h in headers.iter() {
        if !known.contains(&h) {
            log::warn!("{file}: ignoring unknown column `{h}`");
        }
    }
}

pub(crate) fn open(path: &Path) -> Result<std::fs::File> {
    std::fs::File::open(path).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn year_range_parsing() {
        let r: YearRange = "2015:2019".parse().unwrap();
        assert_eq!((r.start, r.end, r.len()), (2015, 2019, 5));
        assert_eq!("2015-2019".parse::<YearRange>().unwrap(), r);
        assert_eq!("2020".parse::<YearRange>().unwrap().len(), 1);
        assert!("2019:2015".parse::<YearRange>().is_err());
        assert!("abc".parse::<YearRange>().is_err());
    }

    #[test]
    fn mention_ref_order() {
        let mut v = vec![
            MentionRef::new("P2", 0),
            MentionRef::new("P1", 3),
            MentionRef::new("P1", 1),
        ];
        v.sort();
        assert_eq!(v[0], MentionRef::new("P1", 1));
        assert_eq!(v[2], MentionRef::new("P2", 0));
    }
}
