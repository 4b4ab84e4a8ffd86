use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{open, warn_unknown_headers};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectCategory {
    pub sc_id: String,
    pub name: String,
    pub area_id: String,
    /// Area with scarce index coverage (arts and humanities, law and social sciences).
    pub excluded_area: bool,
    pub is_multidisciplinary: bool,
}

/// Subject categories keyed by id; each belongs to one area.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SCScheme {
    categories: BTreeMap<String, SubjectCategory>,
}

impl SCScheme {
    pub fn new(categories: Vec<SubjectCategory>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for c in categories {
            if c.area_id.is_empty() {
                return Err(Error::invalid("scheme", format!("`{}` has no area", c.sc_id)));
            }
            let id = c.sc_id.clone();
            if map.insert(id.clone(), c).is_some() {
                return Err(Error::Duplicate { kind: "sc_id", id });
            }
        }
        Ok(Self { categories: map })
    }

    pub fn get(&self, sc_id: &str) -> Option<&SubjectCategory> {
        self.categories.get(sc_id)
    }

    pub fn area_of(&self, sc_id: &str) -> Option<&str> {
        self.get(sc_id).map(|c| c.area_id.as_str())
    }

    pub fn categories(&self) -> impl Iterator<Item = &SubjectCategory> {
        self.categories.values()
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }
}

const COLUMNS: &[&str] = &["sc_id", "name", "area_id", "excluded_area", "is_multidisciplinary"];

#[derive(Deserialize)]
struct RawRow {
    sc_id: String,
    #[serde(default)]
    name: String,
    area_id: String,
    #[serde(default)]
    excluded_area: String,
    #[serde(default)]
    is_multidisciplinary: String,
}

fn parse_bool(cell: &str, line: usize, field: &str) -> Result<bool> {
    match cell.trim().to_lowercase().as_str() {
        "" | "0" | "false" | "no" => Ok(false),
        "1" | "true" | "yes" => Ok(true),
        other => Err(Error::Parse {
            line,
            field: field.into(),
            message: format!("`{other}` is not a boolean"),
        }),
    }
}

pub fn parse_scheme(reader: impl Read) -> Result<SCScheme> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    warn_unknown_headers("scheme", rdr.headers()?, COLUMNS);
    let mut cats = Vec::new();
    for (i, row) in rdr.deserialize::<RawRow>().enumerate() {
        let line = i + 2;
        let row = row?;
        cats.push(SubjectCategory {
            excluded_area: parse_bool(&row.excluded_area, line, "excluded_area")?,
            is_multidisciplinary: parse_bool(&row.is_multidisciplinary, line, "is_multidisciplinary")?,
            sc_id: row.sc_id,
            name: row.name,
            area_id: row.area_id,
        });
    }
    SCScheme::new(cats)
}

pub fn load_scheme(path: &Path) -> Result<SCScheme> {
    parse_scheme(open(path)?)
}

pub fn write_scheme(scheme: &SCScheme, writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COLUMNS)?;
    for c in scheme.categories() {
        w.write_record([
            c.sc_id.as_str(),
            &c.name,
            &c.area_id,
            if c.excluded_area { "true" } else { "false" },
            if c.is_multidisciplinary { "true" } else { "false" },
        ])?;
    }
    w.flush().map_err(|e| Error::io("<scheme>", e))?;
    Ok(())
}

/// How often researchers of a national field code publish in each subject
/// category; the supervised fallback when production alone does not decide.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct IncidenceTable {
    rows: BTreeMap<String, BTreeMap<String, f64>>,
}

impl IncidenceTable {
    pub fn insert(&mut self, field_code: &str, sc_id: &str, incidence: f64) {
        self.rows
            .entry(field_code.to_string())
            .or_default()
            .insert(sc_id.to_string(), incidence);
    }

    pub fn incidence(&self, field_code: &str, sc_id: &str) -> Option<f64> {
        self.rows.get(field_code)?.get(sc_id).copied()
    }

    /// The highest-incidence category among `candidates` (all if `None`);
    /// ties go to the smaller sc_id.
    pub fn best(&self, field_code: &str, candidates: Option<&[String]>) -> Option<&str> {
        let row = self.rows.get(field_code)?;
        let mut best: Option<(&str, f64)> = None;
        for (sc, &v) in row {
            if candidates.is_some_and(|c| !c.iter().any(|x| x == sc)) {
                continue;
            }
            if best.is_none_or(|(_, bv)| v > bv) {
                best = Some((sc.as_str(), v));
            }
        }
        best.map(|(sc, _)| sc)
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// `(field_code, sc_id, incidence)` in key order.
    pub fn rows(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.rows
            .iter()
            .flat_map(|(f, row)| row.iter().map(move |(sc, v)| (f.as_str(), sc.as_str(), *v)))
    }
}

#[derive(Deserialize)]
struct RawIncidence {
    field_code: String,
    sc_id: String,
    incidence: f64,
}

pub fn parse_incidence(reader: impl Read) -> Result<IncidenceTable> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    warn_unknown_headers("incidence", rdr.headers()?, &["field_code", "sc_id", "incidence"]);
    let mut table = IncidenceTable::default();
    for (i, row) in rdr.deserialize::<RawIncidence>().enumerate() {
        let row = row?;
        if !row.incidence.is_finite() || row.incidence < 0.0 {
            return Err(Error::Parse {
                line: i + 2,
                field: "incidence".into(),
                message: format!("{} is not a non-negative number", row.incidence),
            });
        }
        table.insert(&row.field_code, &row.sc_id, row.incidence);
    }
    Ok(table)
}

pub fn load_incidence(path: &Path) -> Result<IncidenceTable> {
    parse_incidence(open(path)?)
}

pub fn write_incidence(table: &IncidenceTable, writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["field_code", "sc_id", "incidence"])?;
    for (f, sc, v) in table.rows() {
        w.write_record([f, sc, &v.to_string()])?;
    }
    w.flush().map_err(|e| Error::io("<incidence>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flags_and_areas() {
        let text = "sc_id,name,area_id,excluded_area,is_multidisciplinary\nGA,Dermatology,MED,false,false\nXY,Statistics & probability,MAT,0,0\nRO,Multidisciplinary sciences,MULTI,false,true\nHI,History,ART,true,false\n";
        let s = parse_scheme(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.area_of("XY"), Some("MAT"));
        assert!(s.get("RO").unwrap().is_multidisciplinary);
        assert!(s.get("HI").unwrap().excluded_area);
    }

    #[test]
    fn duplicate_sc_rejected() {
        let text = "sc_id,name,area_id\nGA,a,MED\nGA,b,BIO\n";
        assert!(matches!(parse_scheme(text.as_bytes()), Err(Error::Duplicate { .. })));
    }

    #[test]
    fn incidence_best() {
        let text = "field_code,sc_id,incidence\nMAT/06,XY,0.6\nMAT/06,ZZ,0.6\nMAT/06,AA,0.1\n";
        let t = parse_incidence(text.as_bytes()).unwrap();
        assert_eq!(t.best("MAT/06", None), Some("XY"));
        let only = vec!["AA".to_string(), "ZZ".to_string()];
        assert_eq!(t.best("MAT/06", Some(&only)), Some("ZZ"));
        assert_eq!(t.best("FIS/01", None), None);
    }
}
