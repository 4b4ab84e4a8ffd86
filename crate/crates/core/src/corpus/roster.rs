use std::collections::{BTreeSet, HashSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{open, split_list, warn_unknown_headers, YearRange};
use crate::{Error, Result};

/// One known member of a university's research staff.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RosterEntry {
    pub person_id: String,
    pub full_name: String,
    pub university_id: String,
    pub field_code: String,
    pub sc_hint: Option<String>,
    pub active_years: BTreeSet<i32>,
    pub linked_pub_ids: Option<Vec<String>>,
}

impl RosterEntry {
    /// Years on staff inside `window`.
    pub fn years_in(&self, window: &YearRange) -> usize {
        self.active_years.iter().filter(|y| window.contains(**y)).count()
    }
}

const COLUMNS: &[&str] = &[
    "person_id",
    "full_name",
    "university_id",
    "field_code",
    "sc_hint",
    "active_years",
    "linked_pub_ids",
];

#[derive(Deserialize)]
struct RawRow {
    person_id: String,
    #[serde(default)]
    full_name: String,
    university_id: String,
    #[serde(default)]
    field_code: String,
    #[serde(default)]
    sc_hint: String,
    #[serde(default)]
    active_years: String,
    linked_pub_ids: Option<String>,
}

/// `2015;2016` or `2015-2019` or a mix of both.
fn parse_years(cell: &str) -> std::result::Result<BTreeSet<i32>, String> {
    let mut years = BTreeSet::new();
    for item in split_list(cell) {
        let parsed = match item.split_once('-') {
            Some((a, b)) => a
                .trim()
                .parse::<i32>()
                .and_then(|a| b.trim().parse::<i32>().map(|b| (a, b))),
            None => item.parse::<i32>().map(|y| (y, y)),
        };
        let (a, b) = parsed.map_err(|_| format!("cannot parse year `{item}`"))?;
        if a > b {
            return Err(format!("reversed range `{item}`"));
        }
        years.extend(a..=b);
    }
    Ok(years)
}

pub fn parse_roster(reader: impl Read, window: &YearRange) -> Result<Vec<RosterEntry>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    warn_unknown_headers("roster", rdr.headers()?, COLUMNS);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<RawRow>().enumerate() {
        let line = i + 2;
        let row = row?;
        let bad = |field: &str, message: String| Error::Parse {
            line,
            field: field.into(),
            message,
        };
        if row.person_id.is_empty() {
            return Err(bad("person_id", "empty".into()));
        }
        if row.university_id.is_empty() {
            return Err(bad("university_id", "empty".into()));
        }
        let active_years = parse_years(&row.active_years).map_err(|m| bad("active_years", m))?;
        if active_years.is_empty() {
            return Err(bad(
                "active_years",
                format!("`{}` has no active years", row.person_id),
            ));
        }
        if let Some(y) = active_years.iter().find(|y| !window.contains(**y)) {
            return Err(bad(
                "active_years",
                format!("{y} for `{}` is outside the window {window}", row.person_id),
            ));
        }
        if !seen.insert(row.person_id.clone()) {
            return Err(Error::Duplicate {
                kind: "person_id",
                id: row.person_id,
            });
        }
        out.push(RosterEntry {
            person_id: row.person_id,
            full_name: row.full_name,
            university_id: row.university_id,
            field_code: row.field_code,
            sc_hint: Some(row.sc_hint).filter(|s| !s.is_empty()),
            active_years,
            linked_pub_ids: row.linked_pub_ids.map(|c| split_list(&c)),
        });
    }
    Ok(out)
}

pub fn load_roster(path: &Path, window: &YearRange) -> Result<Vec<RosterEntry>> {
    parse_roster(open(path)?, window)
}

/// Writes a roster in the same format [`parse_roster`] reads.
pub fn write_roster(entries: &[RosterEntry], writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COLUMNS)?;
    for e in entries {
        let years = e
            .active_years
            .iter()
            .map(|y| y.to_string())
            .collect::<Vec<_>>()
            .join(";");
        let linked = e.linked_pub_ids.as_ref().map(|v| v.join(";")).unwrap_or_default();
        w.write_record([
            e.person_id.as_str(),
            &e.full_name,
            &e.university_id,
            &e.field_code,
            e.sc_hint.as_deref().unwrap_or(""),
            &years,
            &linked,
        ])?;
    }
    w.flush().map_err(|e| Error::io("<roster>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "person_id,full_name,university_id,field_code,sc_hint,active_years,linked_pub_ids\n";

    fn window() -> YearRange {
        YearRange::new(2015, 2019).unwrap()
    }

    #[test]
    fn three_valid_rows() {
        let text = format!(
            "{HEADER}R1,Rossi M,U1,ING-IND/35,SC1,2015-2019,P1;P2\nR2,Bianchi L,U1,MAT/06,,2016;2017,\nR3,Verdi G,U2,FIS/01,SC2,2019,P9\n"
        );
        let r = parse_roster(text.as_bytes(), &window()).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(r[0].active_years.len(), 5);
        assert_eq!(r[0].linked_pub_ids.as_deref(), Some(&["P1".to_string(), "P2".to_string()][..]));
        assert_eq!(r[1].sc_hint, None);
        assert_eq!(r[1].years_in(&window()), 2);
        assert_eq!(r[1].linked_pub_ids, None);
    }

    #[test]
    fn empty_active_years_is_error() {
        let text = format!("{HEADER}R1,Rossi M,U1,X,,,\n");
        assert!(matches!(
            parse_roster(text.as_bytes(), &window()),
            Err(Error::Parse { field, .. }) if field == "active_years"
        ));
    }

    #[test]
    fn active_year_outside_window_is_error() {
        let text = format!("{HEADER}R1,Rossi M,U1,X,,2014;2015,\n");
        assert!(parse_roster(text.as_bytes(), &window()).is_err());
    }

    #[test]
    fn duplicate_row_names_person() {
        let text = format!("{HEADER}R1,Rossi M,U1,X,,2015,\nR1,Rossi M,U1,X,,2015,\n");
        match parse_roster(text.as_bytes(), &window()) {
            Err(Error::Duplicate { id, .. }) => assert_eq!(id, "R1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn write_then_parse() {
        let text = format!("{HEADER}R1,Rossi M,U1,X,SC1,2015;2016,P1;P2\n");
        let r = parse_roster(text.as_bytes(), &window()).unwrap();
        let mut buf = Vec::new();
        write_roster(&r, &mut buf).unwrap();
        assert_eq!(parse_roster(&buf[..], &window()).unwrap(), r);
    }
}
