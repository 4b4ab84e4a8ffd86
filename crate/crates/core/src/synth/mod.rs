//! Seeded synthetic academia.
//!
//! Generates universities, subject categories, faculty (who also form the
//! roster) and non-faculty contaminants (who only publish), together with a
//! publication corpus whose mentions carry configurable metadata noise, and
//! the ground truth behind every mention. All randomness is keyed by
//! `(seed, entity id)`, so output bytes depend only on the configuration.

mod names;
mod oracle;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    parse_publications, write_incidence, write_registry, write_roster, write_scheme, Corpus, DocType,
    IncidenceTable, IngestOptions, MentionRef, RosterEntry, SCScheme, SourceIndex, SubjectCategory, University,
    UniversityRegistry, YearRange,
};
use crate::keyed::keyed_rng;
use crate::{Error, Result};

pub use oracle::{oracle_scores, OracleScores, OracleSubject};

pub const PUBLICATIONS_FILE: &str = "publications.jsonl";
pub const ROSTER_FILE: &str = "roster.csv";
pub const REGISTRY_FILE: &str = "registry.csv";
pub const SCHEME_FILE: &str = "scheme.csv";
pub const INCIDENCE_FILE: &str = "incidence.csv";
pub const GROUND_TRUTH_FILE: &str = "ground_truth.csv";
pub const MENTION_TRUTH_FILE: &str = "mention_truth.csv";

/// Generator knobs. `n_researchers` counts faculty; non-faculty are added
/// per university so that they make up about `non_faculty_share` of the
/// people publishing under its name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_universities: usize,
    pub n_researchers: usize,
    pub n_scs: usize,
    pub n_areas: usize,
    pub window: YearRange,
    /// Last publication year generated; the recency filter looks at it.
    pub through_year: i32,
    /// Earliest first-publication year of a senior researcher.
    pub career_start: i32,
    /// Log-scale mean and sigma of publications per year.
    pub productivity_log_mean: f64,
    pub productivity_log_sigma: f64,
    /// Sigma of the per-SC shift of the log productivity mean.
    pub sc_productivity_spread: f64,
    /// Sigma of the log of each university's quality factor, which scales
    /// both productivity and citations.
    pub university_quality_sigma: f64,
    pub citation_log_mean: f64,
    pub citation_log_sigma: f64,
    pub mean_external_coauthors: f64,
    /// Chance that a paper also lists a colleague from the same university.
    pub internal_coauthor_rate: f64,
    /// Chance a paper's main SC is not the author's own.
    pub off_sc_rate: f64,
    /// Chance a paper lists a second SC.
    pub secondary_sc_rate: f64,
    /// Share of records outside the core collection or of other types.
    pub excluded_record_rate: f64,
    pub silent_faculty_rate: f64,
    /// Share of faculty hired after the window start.
    pub late_hire_rate: f64,
    pub non_faculty_share: f64,
    /// Each university's share is drawn uniformly within this distance of
    /// `non_faculty_share`.
    pub non_faculty_share_spread: f64,
    pub non_faculty_productivity_multiplier: f64,
    pub orcid_missing_rate: f64,
    pub email_missing_rate: f64,
    /// Share of researchers with a namesake (same surname and initial).
    pub homonym_rate: f64,
    /// Chance a mention carries an unregistered organization string.
    pub affiliation_variant_rate: f64,
    /// Chance a mention abbreviates the first name to an initial.
    pub initials_only_rate: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            n_universities: 8,
            n_researchers: 320,
            n_scs: 6,
            n_areas: 3,
            window: YearRange { start: 2015, end: 2019 },
            through_year: 2020,
            career_start: 1998,
            productivity_log_mean: 0.0,
            productivity_log_sigma: 0.6,
            sc_productivity_spread: 0.3,
            university_quality_sigma: 0.25,
            citation_log_mean: 1.5,
            citation_log_sigma: 1.0,
            mean_external_coauthors: 2.5,
            internal_coauthor_rate: 0.2,
            off_sc_rate: 0.15,
            secondary_sc_rate: 0.2,
            excluded_record_rate: 0.05,
            silent_faculty_rate: 0.03,
            late_hire_rate: 0.1,
            non_faculty_share: 0.35,
            non_faculty_share_spread: 0.15,
            non_faculty_productivity_multiplier: 0.5,
            orcid_missing_rate: 0.5,
            email_missing_rate: 0.3,
            homonym_rate: 0.05,
            affiliation_variant_rate: 0.05,
            initials_only_rate: 0.5,
        }
    }
}

impl SynthConfig {
    /// No contamination and no metadata noise.
    pub fn clean(seed: u64) -> Self {
        Self {
            seed,
            non_faculty_share: 0.0,
            non_faculty_share_spread: 0.0,
            orcid_missing_rate: 0.0,
            email_missing_rate: 0.0,
            homonym_rate: 0.0,
            affiliation_variant_rate: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid("synth config", msg));
        for (name, v) in [
            ("internal_coauthor_rate", self.internal_coauthor_rate),
            ("off_sc_rate", self.off_sc_rate),
            ("secondary_sc_rate", self.secondary_sc_rate),
            ("excluded_record_rate", self.excluded_record_rate),
            ("silent_faculty_rate", self.silent_faculty_rate),
            ("late_hire_rate", self.late_hire_rate),
            ("non_faculty_share", self.non_faculty_share),
            ("non_faculty_share_spread", self.non_faculty_share_spread),
            ("orcid_missing_rate", self.orcid_missing_rate),
            ("email_missing_rate", self.email_missing_rate),
            ("homonym_rate", self.homonym_rate),
            ("affiliation_variant_rate", self.affiliation_variant_rate),
            ("initials_only_rate", self.initials_only_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} = {v} is not in [0, 1]"));
            }
        }
        if self.non_faculty_share >= 0.95 {
            return bad(format!("non_faculty_share = {} leaves no faculty", self.non_faculty_share));
        }
        for (name, n) in [
            ("n_universities", self.n_universities),
            ("n_researchers", self.n_researchers),
            ("n_scs", self.n_scs),
            ("n_areas", self.n_areas),
        ] {
            if n == 0 {
                return bad(format!("{name} must be positive"));
            }
        }
        if self.n_areas > self.n_scs {
            return bad(format!("{} areas cannot be filled by {} SCs", self.n_areas, self.n_scs));
        }
        if self.n_universities > self.n_researchers {
            return bad(format!(
                "{} universities cannot each get one of {} researchers",
                self.n_universities, self.n_researchers
            ));
        }
        if self.n_universities > 999 || self.n_researchers > 99_999 {
            return bad("identifier space exceeded".into());
        }
        if self.career_start >= self.window.start || self.through_year < self.window.end {
            return bad("career_start must precede the window and through_year must not end before it".into());
        }
        for (name, v) in [
            ("productivity_log_sigma", self.productivity_log_sigma),
            ("citation_log_sigma", self.citation_log_sigma),
            ("sc_productivity_spread", self.sc_productivity_spread),
            ("university_quality_sigma", self.university_quality_sigma),
            ("mean_external_coauthors", self.mean_external_coauthors),
            ("non_faculty_productivity_multiplier", self.non_faculty_productivity_multiplier),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} = {v} must be a non-negative number"));
            }
        }
        if !self.productivity_log_mean.is_finite() || !self.citation_log_mean.is_finite() {
            return bad("log means must be finite".into());
        }
        Ok(())
    }

    /// Ingest options matching the generated years.
    pub fn ingest_options(&self) -> IngestOptions {
        let mut o = IngestOptions::new(self.window);
        o.through_year = Some(self.through_year);
        o
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PersonTruth {
    pub person_id: String,
    pub university_id: String,
    pub faculty: bool,
    pub sc_id: String,
    pub full_name: String,
    /// Every generated publication the person is on, including records the
    /// ingest filter drops.
    pub pub_ids: BTreeSet<String>,
    /// Years on staff within the window; empty for non-faculty.
    pub active_years: BTreeSet<i32>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pub persons: BTreeMap<String, PersonTruth>,
    /// The true author behind every mention; external co-authors have ids
    /// starting with `X`.
    pub mention_person: BTreeMap<MentionRef, String>,
}

impl GroundTruth {
    pub fn write_persons(&self, w: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["person_id", "university_id", "faculty", "sc_id", "full_name", "n_pubs", "pub_ids"])?;
        for p in self.persons.values() {
            let ids: Vec<&str> = p.pub_ids.iter().map(String::as_str).collect();
            w.write_record([
                p.person_id.as_str(),
                &p.university_id,
                if p.faculty { "true" } else { "false" },
                &p.sc_id,
                &p.full_name,
                &p.pub_ids.len().to_string(),
                &ids.join(";"),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<ground_truth>", e))
    }

    pub fn write_mentions(&self, w: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(w);
        w.write_record(["pub_id", "position", "person_id"])?;
        for (r, p) in &self.mention_person {
            w.write_record([r.pub_id.as_str(), &r.position.to_string(), p])?;
        }
        w.flush().map_err(|e| Error::io("<mention_truth>", e))
    }
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub publications_jsonl: String,
    pub roster: Vec<RosterEntry>,
    pub registry: UniversityRegistry,
    pub scheme: SCScheme,
    pub incidence: IncidenceTable,
    pub truth: GroundTruth,
}

impl SynthOutput {
    /// The corpus as the ingest step would load it.
    pub fn corpus(&self, opts: &IngestOptions) -> Result<Corpus> {
        parse_publications(self.publications_jsonl.as_bytes(), opts)
    }

    /// Writes every input file plus the ground truth into `dir` and returns
    /// the paths written.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        let mut put = |name: &str, bytes: Vec<u8>| -> Result<()> {
            let path = dir.join(name);
            std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            written.push(path);
            Ok(())
        };
        put(PUBLICATIONS_FILE, self.publications_jsonl.clone().into_bytes())?;
        let mut buf = Vec::new();
        write_roster(&self.roster, &mut buf)?;
        put(ROSTER_FILE, buf)?;
        let mut buf = Vec::new();
        write_registry(&self.registry, &mut buf)?;
        put(REGISTRY_FILE, buf)?;
        let mut buf = Vec::new();
        write_scheme(&self.scheme, &mut buf)?;
        put(SCHEME_FILE, buf)?;
        let mut buf = Vec::new();
        write_incidence(&self.incidence, &mut buf)?;
        put(INCIDENCE_FILE, buf)?;
        let mut buf = Vec::new();
        self.truth.write_persons(&mut buf)?;
        put(GROUND_TRUTH_FILE, buf)?;
        let mut buf = Vec::new();
        self.truth.write_mentions(&mut buf)?;
        put(MENTION_TRUTH_FILE, buf)?;
        Ok(written)
    }
}

struct ScSpec {
    id: String,
    name: String,
    area: String,
    productivity_shift: f64,
}

struct UniSpec {
    id: String,
    city: String,
    domain: String,
    variants: [String; 2],
    quality: f64,
}

#[derive(Clone)]
struct External {
    id: String,
    last: String,
    first: String,
    org: String,
    country: &'static str,
}

struct Person {
    id: String,
    uni: usize,
    faculty: bool,
    sc: usize,
    last: String,
    first: String,
    orcid: String,
    first_year: i32,
    active_years: BTreeSet<i32>,
    rate: f64,
    circle: Vec<External>,
}

const COUNTRIES: &[&str] = &["Germany", "France", "Spain", "Netherlands", "Sweden", "Poland"];

#[derive(Serialize)]
struct OutMention {
    full_name: String,
    last_name: String,
    first_name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    email: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    orcid: Option<String>,
    affiliation: String,
    organization: String,
    city: String,
    country: String,
}

#[derive(Serialize)]
struct OutPublication {
    pub_id: String,
    year: i32,
    doc_type: DocType,
    source_index: SourceIndex,
    subject_categories: Vec<String>,
    journal: String,
    mentions: Vec<OutMention>,
    citation_count: u64,
    census_date: NaiveDate,
}

struct Generated {
    record: OutPublication,
    /// Person id per byline position.
    authors: Vec<String>,
}

fn normal(rng: &mut impl Rng, sigma: f64) -> f64 {
    if sigma == 0.0 {
        return 0.0;
    }
    Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
}

fn poisson(rng: &mut impl Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive lambda").sample(rng) as u64
}

fn external(rng: &mut impl Rng, id: String) -> External {
    let place = names::place(rng);
    External {
        id,
        last: names::foreign_surname(rng),
        first: names::first_name(rng),
        org: format!("Inst {place}"),
        country: COUNTRIES[rng.random_range(0..COUNTRIES.len())],
    }
}

fn scs(cfg: &SynthConfig) -> Vec<ScSpec> {
    (0..cfg.n_scs)
        .map(|i| {
            let id = format!("SC{:02}", i + 1);
            let mut rng = keyed_rng(cfg.seed, &["sc", &id]);
            ScSpec {
                name: format!("Subject {}", i + 1),
                area: format!("AR{}", i % cfg.n_areas + 1),
                productivity_shift: normal(&mut rng, cfg.sc_productivity_spread),
                id,
            }
        })
        .collect()
}

fn universities(cfg: &SynthConfig) -> Vec<UniSpec> {
    let mut used = HashSet::new();
    (0..cfg.n_universities)
        .map(|i| {
            let id = format!("U{:03}", i + 1);
            let mut rng = keyed_rng(cfg.seed, &["university", &id]);
            let city = loop {
                let c = names::place(&mut rng);
                if used.insert(c.clone()) {
                    break c;
                }
            };
            let slug = city.to_lowercase();
            UniSpec {
                domain: format!("uni{slug}.it"),
                variants: [format!("Univ {city}"), format!("{city} Univ")],
                quality: normal(&mut rng, cfg.university_quality_sigma).exp(),
                id,
                city,
            }
        })
        .collect()
}

/// Faculty per university: half spread evenly, half by random weights.
fn faculty_allocation(cfg: &SynthConfig) -> Vec<usize> {
    let k = cfg.n_universities;
    let weights: Vec<f64> = (0..k)
        .map(|i| normal(&mut keyed_rng(cfg.seed, &["uni-weight", &i.to_string()]), 0.5).exp())
        .collect();
    let guaranteed = (cfg.n_researchers / (2 * k)).max(1);
    let total_w: f64 = weights.iter().sum();
    (0..cfg.n_researchers)
        .map(|i| {
            if i < guaranteed * k {
                return i % k;
            }
            let mut x = keyed_rng(cfg.seed, &["faculty-uni", &i.to_string()]).random::<f64>() * total_w;
            for (u, w) in weights.iter().enumerate() {
                if x < *w {
                    return u;
                }
                x -= w;
            }
            k - 1
        })
        .collect()
}

fn people(cfg: &SynthConfig, scs: &[ScSpec], unis: &[UniSpec]) -> Result<Vec<Person>> {
    let alloc = faculty_allocation(cfg);
    let mut faculty_per_uni = vec![0usize; unis.len()];
    for &u in &alloc {
        faculty_per_uni[u] += 1;
    }
    // (id, uni, faculty)
    let mut skeleton: Vec<(String, usize, bool)> = alloc
        .iter()
        .enumerate()
        .map(|(i, &u)| (format!("F{:05}", i + 1), u, true))
        .collect();
    let mut nf = 0;
    for (u, spec) in unis.iter().enumerate() {
        let share = if cfg.non_faculty_share == 0.0 {
            0.0
        } else {
            let mut rng = keyed_rng(cfg.seed, &["nf-share", &spec.id]);
            let jitter = cfg.non_faculty_share_spread * (2.0 * rng.random::<f64>() - 1.0);
            (cfg.non_faculty_share + jitter).clamp(0.0, 0.9)
        };
        let n = (faculty_per_uni[u] as f64 * share / (1.0 - share)).round() as usize;
        for _ in 0..n {
            nf += 1;
            skeleton.push((format!("N{nf:05}"), u, false));
        }
    }
    let homonym_pairs = (cfg.homonym_rate * skeleton.len() as f64 / 2.0).round() as usize;
    if 2 * homonym_pairs > skeleton.len() {
        return Err(Error::invalid(
            "synth config",
            format!("{homonym_pairs} homonym pairs need more than {} researchers", skeleton.len()),
        ));
    }

    let mut surnames = HashSet::new();
    let mut orcids = HashSet::new();
    let (w0, w1) = (cfg.window.start, cfg.window.end);
    let mut persons: Vec<Person> = skeleton
        .into_iter()
        .map(|(id, uni, faculty)| {
            let mut rng = keyed_rng(cfg.seed, &["person", &id]);
            let last = loop {
                let s = names::surname(&mut rng);
                if surnames.insert(s.clone()) {
                    break s;
                }
            };
            let orcid = loop {
                let o = names::orcid(&mut rng);
                if orcids.insert(o.clone()) {
                    break o;
                }
            };
            let first = names::first_name(&mut rng);
            let sc = rng.random_range(0..scs.len());
            let (first_year, active_years) = if !faculty {
                (rng.random_range(w0 - 4..=w0 + 1), BTreeSet::new())
            } else if w1 > w0 && rng.random_bool(cfg.late_hire_rate) {
                let hire = rng.random_range(w0 + 1..=w1);
                (hire - rng.random_range(0..=3), (hire..=w1).collect())
            } else {
                (rng.random_range(cfg.career_start..w0), (w0..=w1).collect())
            };
            let silent = faculty && rng.random_bool(cfg.silent_faculty_rate);
            let mut rate = (cfg.productivity_log_mean
                + scs[sc].productivity_shift
                + normal(&mut rng, cfg.productivity_log_sigma))
            .exp()
                * unis[uni].quality;
            if !faculty {
                rate *= cfg.non_faculty_productivity_multiplier;
            }
            if silent {
                rate = 0.0;
            }
            let circle = (0..4).map(|k| external(&mut rng, format!("X-{id}-{k}"))).collect();
            Person {
                id,
                uni,
                faculty,
                sc,
                last,
                first,
                orcid,
                first_year,
                active_years,
                rate,
                circle,
            }
        })
        .collect();

    let mut order: Vec<usize> = (0..persons.len()).collect();
    let mut rng = keyed_rng(cfg.seed, &["homonyms"]);
    order.shuffle(&mut rng);
    for pair in order.chunks(2).take(homonym_pairs) {
        let (a, b) = (pair[0], pair[1]);
        let last = persons[a].last.clone();
        let first = names::first_name_like(&mut rng, &persons[a].first);
        persons[b].last = last;
        persons[b].first = first;
    }
    Ok(persons)
}

fn staff_mention(p: &Person, uni: &UniSpec, sc: &ScSpec, cfg: &SynthConfig, rng: &mut impl Rng) -> OutMention {
    let shown_first = if rng.random_bool(cfg.initials_only_rate) {
        format!("{}.", p.first.chars().next().unwrap_or('X'))
    } else {
        p.first.clone()
    };
    let email = (!rng.random_bool(cfg.email_missing_rate))
        .then(|| format!("{}.{}@{}", p.first.to_lowercase(), p.last.to_lowercase(), uni.domain));
    let orcid = (!rng.random_bool(cfg.orcid_missing_rate)).then(|| p.orcid.clone());
    let organization = if rng.random_bool(cfg.affiliation_variant_rate) {
        format!("{} Gen Hosp", uni.city)
    } else if rng.random_bool(0.2) {
        uni.variants[1].clone()
    } else {
        uni.variants[0].clone()
    };
    OutMention {
        full_name: format!("{}, {}", p.last, shown_first),
        last_name: p.last.clone(),
        first_name: shown_first,
        email,
        orcid,
        affiliation: format!("Dept {}, {}, {}, Italy", sc.name, organization, uni.city),
        organization,
        city: uni.city.clone(),
        country: "Italy".into(),
    }
}

fn external_mention(e: &External) -> OutMention {
    let initial = format!("{}.", e.first.chars().next().unwrap_or('X'));
    OutMention {
        full_name: format!("{}, {}", e.last, initial),
        last_name: e.last.clone(),
        first_name: initial,
        email: None,
        orcid: None,
        affiliation: format!("{}, {}", e.org, e.country),
        organization: e.org.clone(),
        city: String::new(),
        country: e.country.to_string(),
    }
}

fn publications_of(
    p: &Person,
    persons: &[Person],
    colleagues: &[usize],
    scs: &[ScSpec],
    unis: &[UniSpec],
    cfg: &SynthConfig,
) -> Vec<Generated> {
    let census = NaiveDate::from_ymd_opt(cfg.through_year + 1, 3, 29).expect("valid census date");
    let mut out = Vec::new();
    for year in p.first_year..=cfg.through_year {
        let n = poisson(&mut keyed_rng(cfg.seed, &["count", &p.id, &year.to_string()]), p.rate);
        for k in 0..n {
            let pub_id = format!("{}-{}-{:02}", p.id, year, k);
            let mut rng = keyed_rng(cfg.seed, &["pub", &pub_id]);
            let primary = if scs.len() > 1 && rng.random_bool(cfg.off_sc_rate) {
                (p.sc + rng.random_range(1..scs.len())) % scs.len()
            } else {
                p.sc
            };
            let mut subject_categories = vec![scs[primary].id.clone()];
            if scs.len() > 1 && rng.random_bool(cfg.secondary_sc_rate) {
                let second = (primary + rng.random_range(1..scs.len())) % scs.len();
                subject_categories.push(scs[second].id.clone());
            }
            let journal = format!("Journal of {} {}", scs[primary].name, rng.random_range(1..=4));
            let citations = LogNormal::new(cfg.citation_log_mean, cfg.citation_log_sigma)
                .expect("finite citation parameters")
                .sample(&mut rng)
                * unis[p.uni].quality;
            let (doc_type, source_index) = if rng.random_bool(cfg.excluded_record_rate) {
                if rng.random_bool(0.5) {
                    (DocType::Other, SourceIndex::Core)
                } else {
                    (DocType::Article, SourceIndex::Esci)
                }
            } else {
                let r: f64 = rng.random();
                let d = match r {
                    _ if r < 0.8 => DocType::Article,
                    _ if r < 0.9 => DocType::Review,
                    _ if r < 0.95 => DocType::Letter,
                    _ => DocType::Proceedings,
                };
                (d, SourceIndex::Core)
            };

            let mut byline: Vec<(OutMention, String)> =
                vec![(staff_mention(p, &unis[p.uni], &scs[p.sc], cfg, &mut rng), p.id.clone())];
            if colleagues.len() > 1 && rng.random_bool(cfg.internal_coauthor_rate) {
                let c = colleagues[rng.random_range(0..colleagues.len())];
                if persons[c].id != p.id && persons[c].last != p.last {
                    let q = &persons[c];
                    byline.push((staff_mention(q, &unis[q.uni], &scs[q.sc], cfg, &mut rng), q.id.clone()));
                }
            }
            let n_ext = poisson(&mut rng, cfg.mean_external_coauthors).min(30);
            let mut seen: HashSet<String> = byline.iter().map(|(m, _)| m.last_name.clone()).collect();
            for j in 0..n_ext {
                let e = if rng.random_bool(0.6) {
                    p.circle[rng.random_range(0..p.circle.len())].clone()
                } else {
                    external(&mut rng, format!("X-{pub_id}-{j}"))
                };
                if seen.insert(e.last.clone()) {
                    byline.push((external_mention(&e), e.id));
                }
            }
            byline.shuffle(&mut rng);
            let (mentions, authors) = byline.into_iter().unzip();
            out.push(Generated {
                record: OutPublication {
                    pub_id,
                    year,
                    doc_type,
                    source_index,
                    subject_categories,
                    journal,
                    mentions,
                    citation_count: citations.floor() as u64,
                    census_date: census,
                },
                authors,
            });
        }
    }
    out
}

/// Builds the synthetic world for `cfg`.
pub fn generate(cfg: &SynthConfig) -> Result<SynthOutput> {
    cfg.validate()?;
    let scs = scs(cfg);
    let unis = universities(cfg);
    let persons = people(cfg, &scs, &unis)?;
    let mut by_uni: Vec<Vec<usize>> = vec![Vec::new(); unis.len()];
    for (i, p) in persons.iter().enumerate() {
        by_uni[p.uni].push(i);
    }

    let mut generated: Vec<Generated> = persons
        .par_iter()
        .flat_map_iter(|p| publications_of(p, &persons, &by_uni[p.uni], &scs, &unis, cfg))
        .collect();
    generated.sort_by(|a, b| a.record.pub_id.cmp(&b.record.pub_id));

    let mut truth = GroundTruth::default();
    for p in &persons {
        truth.persons.insert(
            p.id.clone(),
            PersonTruth {
                person_id: p.id.clone(),
                university_id: unis[p.uni].id.clone(),
                faculty: p.faculty,
                sc_id: scs[p.sc].id.clone(),
                full_name: format!("{}, {}", p.last, p.first),
                pub_ids: BTreeSet::new(),
                active_years: p.active_years.clone(),
            },
        );
    }
    let mut jsonl = String::new();
    for g in &generated {
        for (pos, who) in g.authors.iter().enumerate() {
            truth
                .mention_person
                .insert(MentionRef::new(g.record.pub_id.clone(), pos as u32), who.clone());
            if let Some(t) = truth.persons.get_mut(who) {
                t.pub_ids.insert(g.record.pub_id.clone());
            }
        }
        jsonl.push_str(&serde_json::to_string(&g.record)?);
        jsonl.push('\n');
    }

    let roster = truth
        .persons
        .values()
        .filter(|t| t.faculty)
        .map(|t| RosterEntry {
            person_id: t.person_id.clone(),
            full_name: t.full_name.clone(),
            university_id: t.university_id.clone(),
            field_code: format!("F-{}", t.sc_id),
            sc_hint: Some(t.sc_id.clone()),
            active_years: t.active_years.clone(),
            linked_pub_ids: Some(t.pub_ids.iter().cloned().collect()),
        })
        .collect();

    let registry = UniversityRegistry::new(
        unis.iter()
            .map(|u| University {
                university_id: u.id.clone(),
                official_name: format!("Universita di {}", u.city),
                email_domains: vec![u.domain.clone()],
                organization_variants: u.variants.to_vec(),
            })
            .collect(),
    )?;
    let scheme = SCScheme::new(
        scs.iter()
            .map(|s| SubjectCategory {
                sc_id: s.id.clone(),
                name: s.name.clone(),
                area_id: s.area.clone(),
                excluded_area: false,
                is_multidisciplinary: false,
            })
            .collect(),
    )?;
    let mut incidence = IncidenceTable::default();
    for field in &scs {
        for sc in &scs {
            let v = if field.id == sc.id {
                0.6
            } else {
                0.4 / (scs.len() - 1).max(1) as f64
            };
            incidence.insert(&format!("F-{}", field.id), &sc.id, v);
        }
    }
    Ok(SynthOutput {
        publications_jsonl: jsonl,
        roster,
        registry,
        scheme,
        incidence,
        truth,
    })
}
