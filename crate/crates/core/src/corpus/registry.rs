use std::collections::{BTreeSet, HashMap};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{open, split_list, warn_unknown_headers};
use crate::normalize::{normalize, normalize_domain};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct University {
    pub university_id: String,
    pub official_name: String,
    pub email_domains: Vec<String>,
    pub organization_variants: Vec<String>,
}

/// Universities with their organization-name variants and email domains.
/// Every variant and every domain belongs to exactly one university.
#[derive(Debug, Clone, Default)]
pub struct UniversityRegistry {
    universities: Vec<University>,
    by_variant: HashMap<String, usize>,
    by_domain: HashMap<String, usize>,
}

impl UniversityRegistry {
    pub fn new(universities: Vec<University>) -> Result<Self> {
        let mut cleaned: Vec<University> = Vec::with_capacity(universities.len());
        let mut by_variant: HashMap<String, usize> = HashMap::new();
        let mut by_domain: HashMap<String, usize> = HashMap::new();
        let mut ids = std::collections::HashSet::new();
        for (i, u) in universities.into_iter().enumerate() {
            if !ids.insert(u.university_id.clone()) {
                return Err(Error::Duplicate {
                    kind: "university_id",
                    id: u.university_id,
                });
            }
            let variants: BTreeSet<String> = u
                .organization_variants
                .iter()
                .map(|v| normalize(v))
                .filter(|v| !v.is_empty())
                .collect();
            let domains: BTreeSet<String> = u
                .email_domains
                .iter()
                .map(|d| normalize_domain(d))
                .filter(|d| !d.is_empty())
                .collect();
            for v in &variants {
                if let Some(&j) = by_variant.get(v) {
                    return Err(Error::RegistryOverlap {
                        kind: "organization variant",
                        value: v.clone(),
                        first: cleaned[j].university_id.clone(),
                        second: u.university_id.clone(),
                    });
                }
                by_variant.insert(v.clone(), i);
            }
            for d in &domains {
                if let Some(&j) = by_domain.get(d) {
                    return Err(Error::RegistryOverlap {
                        kind: "email domain",
                        value: d.clone(),
                        first: cleaned[j].university_id.clone(),
                        second: u.university_id.clone(),
                    });
                }
                by_domain.insert(d.clone(), i);
            }
            cleaned.push(University {
                university_id: u.university_id,
                official_name: u.official_name,
                email_domains: domains.into_iter().collect(),
                organization_variants: variants.into_iter().collect(),
            });
        }
        Ok(Self {
            universities: cleaned,
            by_variant,
            by_domain,
        })
    }

    pub fn universities(&self) -> &[University] {
        &self.universities
    }

    pub fn get(&self, university_id: &str) -> Option<&University> {
        self.universities.iter().find(|u| u.university_id == university_id)
    }

    /// University whose variant list contains the (already normalized) organization.
    pub fn university_for_organization(&self, organization: &str) -> Option<&str> {
        self.by_variant
            .get(organization)
            .map(|&i| self.universities[i].university_id.as_str())
    }

    /// University whose domain the email ends with, as `@domain` or `.domain`.
    /// The longest matching domain wins.
    pub fn university_for_email(&self, email: &str) -> Option<&str> {
        let email = email.trim().to_lowercase();
        let (_, host) = email.rsplit_once('@')?;
        let mut suffix = host;
        loop {
            if let Some(&i) = self.by_domain.get(suffix) {
                return Some(self.universities[i].university_id.as_str());
            }
            match suffix.split_once('.') {
                Some((_, rest)) => suffix = rest,
                None => return None,
            }
        }
    }
}

const COLUMNS: &[&str] = &[
    "university_id",
    "official_name",
    "email_domains",
    "organization_variants",
];

#[derive(Deserialize)]
struct RawRow {
    university_id: String,
    #[serde(default)]
    official_name: String,
    #[serde(default)]
    email_domains: String,
    #[serde(default)]
    organization_variants: String,
}

pub fn parse_registry(reader: impl Read) -> Result<UniversityRegistry> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    warn_unknown_headers("registry", rdr.headers()?, COLUMNS);
    let mut unis = Vec::new();
    for (i, row) in rdr.deserialize::<RawRow>().enumerate() {
        let row = row?;
        if row.university_id.is_empty() {
            return Err(Error::Parse {
                line: i + 2,
                field: "university_id".into(),
                message: "empty".into(),
            });
        }
        unis.push(University {
            university_id: row.university_id,
            official_name: row.official_name,
            email_domains: split_list(&row.email_domains),
            organization_variants: split_list(&row.organization_variants),
        });
    }
    UniversityRegistry::new(unis)
}

pub fn load_registry(path: &Path) -> Result<UniversityRegistry> {
    parse_registry(open(path)?)
}

pub fn write_registry(registry: &UniversityRegistry, writer: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(COLUMNS)?;
    for u in registry.universities() {
        w.write_record([
            u.university_id.as_str(),
            &u.official_name,
            &u.email_domains.join(";"),
            &u.organization_variants.join(";"),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<registry>", e))?;
    Ok(())
}
