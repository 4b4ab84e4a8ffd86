//! Deriving a university's research staff from author clusters.
//!
//! A cluster is attributed to a university when its modal organization is a
//! registered variant or its modal email falls under a registered domain.
//! Clusters whose evidence is incoherent, whose academic age or recency is
//! too low, or whose university yielded too few clusters overall are flagged
//! and routed to a review queue instead of the staff list. Distinct clusters
//! sharing an orcid or email are merged (same university) or arbitrated
//! (different universities: the larger oeuvre wins).

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::UniversityRegistry;
use crate::disambig::AuthorCluster;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Evidence {
    Organization,
    Email,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StaffFlag {
    /// Organization present but not a registered university variant.
    IncoherentOrg,
    /// Email present but not under any university domain.
    NonUniversityEmail,
    /// Organization and email point at different universities.
    EmailOrgConflict,
    OrcidConflict,
    EmailConflict,
    BelowAge,
    Stale,
    ExcludedSmallUniversity,
}

impl StaffFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            StaffFlag::IncoherentOrg => "incoherent_org",
            StaffFlag::NonUniversityEmail => "non_university_email",
            StaffFlag::EmailOrgConflict => "email_org_conflict",
            StaffFlag::OrcidConflict => "orcid_conflict",
            StaffFlag::EmailConflict => "email_conflict",
            StaffFlag::BelowAge => "below_age",
            StaffFlag::Stale => "stale",
            StaffFlag::ExcludedSmallUniversity => "excluded_small_university",
        }
    }
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Evidence::Organization => "organization",
            Evidence::Email => "email",
            Evidence::Both => "both",
        })
    }
}

impl FromStr for Evidence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "organization" => Ok(Evidence::Organization),
            "email" => Ok(Evidence::Email),
            "both" => Ok(Evidence::Both),
            other => Err(Error::invalid("evidence", other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniversityMatch {
    pub university_id: String,
    pub evidence: Evidence,
    pub by_organization: Option<String>,
    pub by_email: Option<String>,
}

/// Attributes a cluster to a university. When organization and email point
/// at different universities the email wins; [`coherence_check`] flags it.
pub fn match_university(cluster: &AuthorCluster, registry: &UniversityRegistry) -> Option<UniversityMatch> {
    let by_organization = cluster
        .organization
        .as_deref()
        .and_then(|o| registry.university_for_organization(o))
        .map(str::to_string);
    let by_email = cluster
        .email
        .as_deref()
        .and_then(|e| registry.university_for_email(e))
        .map(str::to_string);
    let (university_id, evidence) = match (&by_organization, &by_email) {
        (Some(o), Some(e)) if o == e => (o.clone(), Evidence::Both),
        (Some(_), Some(e)) => (e.clone(), Evidence::Both),
        (Some(o), None) => (o.clone(), Evidence::Organization),
        (None, Some(e)) => (e.clone(), Evidence::Email),
        (None, None) => return None,
    };
    Some(UniversityMatch {
        university_id,
        evidence,
        by_organization,
        by_email,
    })
}

/// The three incoherence flags; empty iff the cluster's evidence is consistent.
pub fn coherence_check(cluster: &AuthorCluster, registry: &UniversityRegistry) -> BTreeSet<StaffFlag> {
    let mut flags = BTreeSet::new();
    let org_u = cluster
        .organization
        .as_deref()
        .map(|o| registry.university_for_organization(o));
    let email_u = cluster.email.as_deref().map(|e| registry.university_for_email(e));
    if let Some(None) = org_u {
        flags.insert(StaffFlag::IncoherentOrg);
    }
    if let Some(None) = email_u {
        flags.insert(StaffFlag::NonUniversityEmail);
    }
    if let (Some(Some(o)), Some(Some(e))) = (org_u, email_u) {
        if o != e {
            flags.insert(StaffFlag::EmailOrgConflict);
        }
    }
    flags
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaffCandidate {
    pub cluster_id: String,
    pub university_id: String,
    pub evidence: Evidence,
    pub flags: BTreeSet<StaffFlag>,
    pub n_pubs: usize,
    pub academic_age: i32,
    pub last_year: i32,
    pub orcid: Option<String>,
    pub email: Option<String>,
    pub details: Vec<String>,
}

impl StaffCandidate {
    pub fn accepted(&self) -> bool {
        self.flags.is_empty()
    }
}

/// Matches every cluster and runs the coherence check. Unmatched clusters
/// are not candidates.
pub fn build_candidates(clusters: &[AuthorCluster], registry: &UniversityRegistry) -> Vec<StaffCandidate> {
    clusters
        .iter()
        .filter_map(|c| {
            let m = match_university(c, registry)?;
            let flags = coherence_check(c, registry);
            let mut details = Vec::new();
            if flags.contains(&StaffFlag::IncoherentOrg) {
                details.push(format!(
                    "organization `{}` is not a registered university",
                    c.organization.as_deref().unwrap_or_default()
                ));
            }
            if flags.contains(&StaffFlag::NonUniversityEmail) {
                details.push(format!(
                    "email `{}` is not under a university domain",
                    c.email.as_deref().unwrap_or_default()
                ));
            }
            if flags.contains(&StaffFlag::EmailOrgConflict) {
                details.push(format!(
                    "organization says {}, email says {}",
                    m.by_organization.as_deref().unwrap_or_default(),
                    m.by_email.as_deref().unwrap_or_default()
                ));
            }
            Some(StaffCandidate {
                cluster_id: c.cluster_id.clone(),
                university_id: m.university_id,
                evidence: m.evidence,
                flags,
                n_pubs: c.n_pubs,
                academic_age: c.academic_age,
                last_year: c.last_year,
                orcid: c.orcid.clone(),
                email: c.email.clone(),
                details,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterParams {
    pub min_clusters: usize,
    pub min_age: i32,
    pub recency_year: i32,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            min_clusters: 30,
            min_age: 4,
            recency_year: 2020,
        }
    }
}

/// Flags clusters below the academic-age minimum, clusters whose last
/// publication predates the recency year, and every candidate of a
/// university that had fewer than `min_clusters` candidates before any
/// filtering.
pub fn apply_filters(mut candidates: Vec<StaffCandidate>, params: &FilterParams) -> Vec<StaffCandidate> {
    let mut per_university: HashMap<String, usize> = HashMap::new();
    for c in &candidates {
        *per_university.entry(c.university_id.clone()).or_default() += 1;
    }
    for c in &mut candidates {
        if c.academic_age < params.min_age {
            c.flags.insert(StaffFlag::BelowAge);
            c.details.push(format!("academic age {} < {}", c.academic_age, params.min_age));
        }
        if c.last_year < params.recency_year {
            c.flags.insert(StaffFlag::Stale);
            c.details.push(format!("last publication {} < {}", c.last_year, params.recency_year));
        }
        let count = per_university[&c.university_id];
        if count < params.min_clusters {
            c.flags.insert(StaffFlag::ExcludedSmallUniversity);
            c.details.push(format!(
                "{} has {count} candidate clusters < {}",
                c.university_id, params.min_clusters
            ));
        }
    }
    candidates
}

/// One staff member as derived: one or more clusters sharing an identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StaffUnit {
    pub university_id: String,
    /// Sorted; the first is the unit's id.
    pub cluster_ids: Vec<String>,
    pub evidence: Evidence,
    /// Distinct publications across member clusters.
    pub n_pubs: usize,
}

impl StaffUnit {
    pub fn unit_id(&self) -> &str {
        &self.cluster_ids[0]
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DerivedStaff {
    pub by_university: BTreeMap<String, Vec<StaffUnit>>,
    pub review_queue: Vec<StaffCandidate>,
}

impl DerivedStaff {
    /// Regroups units read back from `staff.csv`; the review queue is empty.
    pub fn from_units(units: Vec<StaffUnit>) -> Self {
        let mut by_university: BTreeMap<String, Vec<StaffUnit>> = BTreeMap::new();
        for u in units {
            by_university.entry(u.university_id.clone()).or_default().push(u);
        }
        for v in by_university.values_mut() {
            v.sort_by(|a, b| a.cluster_ids.cmp(&b.cluster_ids));
        }
        Self {
            by_university,
            review_queue: Vec::new(),
        }
    }

    pub fn units(&self) -> impl Iterator<Item = &StaffUnit> {
        self.by_university.values().flatten()
    }

    pub fn unit_count(&self) -> usize {
        self.by_university.values().map(Vec::len).sum()
    }
}

fn find(parent: &mut [usize], i: usize) -> usize {
    let mut root = i;
    while parent[root] != root {
        root = parent[root];
    }
    let mut cur = i;
    while parent[cur] != root {
        let next = parent[cur];
        parent[cur] = root;
        cur = next;
    }
    root
}

/// Resolves clusters that share an orcid or an email.
///
/// Accepted candidates linked (transitively) by a shared identifier form a
/// group. The member with the most publications (ties: smaller cluster id)
/// decides the university; group members of that university merge into one
/// staff unit, the rest are flagged `orcid_conflict`/`email_conflict` and
/// queued for review. Flagged candidates from earlier stages are queued too.
pub fn resolve_conflicts(candidates: Vec<StaffCandidate>, clusters: &[AuthorCluster]) -> DerivedStaff {
    let pubs_of: HashMap<&str, &AuthorCluster> =
        clusters.iter().map(|c| (c.cluster_id.as_str(), c)).collect();
    let (mut accepted, mut review): (Vec<_>, Vec<_>) =
        candidates.into_iter().partition(StaffCandidate::accepted);
    accepted.sort_by(|a, b| a.cluster_id.cmp(&b.cluster_id));

    let n = accepted.len();
    let mut parent: Vec<usize> = (0..n).collect();
    let mut by_orcid: HashMap<&str, usize> = HashMap::new();
    let mut by_email: HashMap<&str, usize> = HashMap::new();
    let mut orcid_count: HashMap<&str, usize> = HashMap::new();
    let mut email_count: HashMap<&str, usize> = HashMap::new();
    for (i, c) in accepted.iter().enumerate() {
        if let Some(o) = c.orcid.as_deref() {
            *orcid_count.entry(o).or_default() += 1;
            if let Some(&j) = by_orcid.get(o) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            } else {
                by_orcid.insert(o, i);
            }
        }
        if let Some(e) = c.email.as_deref() {
            *email_count.entry(e).or_default() += 1;
            if let Some(&j) = by_email.get(e) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            } else {
                by_email.insert(e, i);
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }

    let mut by_university: BTreeMap<String, Vec<StaffUnit>> = BTreeMap::new();
    let mut conflicted = Vec::new();
    for members in groups.into_values() {
        let winner = *members
            .iter()
            .max_by(|&&a, &&b| {
                accepted[a]
                    .n_pubs
                    .cmp(&accepted[b].n_pubs)
                    .then_with(|| accepted[b].cluster_id.cmp(&accepted[a].cluster_id))
            })
            .expect("non-empty group");
        let home = accepted[winner].university_id.clone();
        let mut unit_clusters = Vec::new();
        let mut unit_pubs: BTreeSet<&str> = BTreeSet::new();
        for &i in &members {
            let c = &accepted[i];
            if c.university_id == home {
                unit_clusters.push(c.cluster_id.clone());
                match pubs_of.get(c.cluster_id.as_str()) {
                    Some(k) => unit_pubs.extend(k.pub_ids()),
                    None => {
                        log::warn!("cluster {} missing from cluster table", c.cluster_id);
                    }
                }
            } else {
                let mut c = c.clone();
                if c.orcid.as_deref().is_some_and(|o| orcid_count[o] > 1) {
                    c.flags.insert(StaffFlag::OrcidConflict);
                }
                if c.email.as_deref().is_some_and(|e| email_count[e] > 1) {
                    c.flags.insert(StaffFlag::EmailConflict);
                }
                c.details.push(format!(
                    "shares an identifier with {} at {home}, which has more publications",
                    accepted[winner].cluster_id
                ));
                log::info!("auto-resolved: {} yields to {}", c.cluster_id, accepted[winner].cluster_id);
                conflicted.push(c);
            }
        }
        unit_clusters.sort();
        let n_pubs = if unit_pubs.is_empty() {
            accepted[winner].n_pubs
        } else {
            unit_pubs.len()
        };
        by_university.entry(home.clone()).or_default().push(StaffUnit {
            university_id: home,
            cluster_ids: unit_clusters,
            evidence: accepted[winner].evidence,
            n_pubs,
        });
    }
    for units in by_university.values_mut() {
        units.sort_by(|a, b| a.cluster_ids.cmp(&b.cluster_ids));
    }
    review.extend(conflicted);
    review.sort_by(|a, b| a.cluster_id.cmp(&b.cluster_id));
    DerivedStaff {
        by_university,
        review_queue: review,
    }
}

/// Matching, coherence, filters and conflict resolution in one call.
pub fn derive_staff(
    clusters: &[AuthorCluster],
    registry: &UniversityRegistry,
    params: &FilterParams,
) -> DerivedStaff {
    let candidates = apply_filters(build_candidates(clusters, registry), params);
    resolve_conflicts(candidates, clusters)
}

/// `staff.csv`: `university_id,cluster_id,evidence,n_pubs`; merged units list
/// their member clusters `;`-separated.
pub fn write_staff(staff: &DerivedStaff, w: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["university_id", "cluster_id", "evidence", "n_pubs"])?;
    for u in staff.units() {
        w.write_record([
            u.university_id.as_str(),
            &u.cluster_ids.join(";"),
            &u.evidence.to_string(),
            &u.n_pubs.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<staff>", e))
}

pub fn read_staff(r: impl Read) -> Result<Vec<StaffUnit>> {
    #[derive(Deserialize)]
    struct Row {
        university_id: String,
        cluster_id: String,
        evidence: String,
        n_pubs: usize,
    }
    let mut rdr = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for (i, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row?;
        let cluster_ids = crate::corpus::split_list(&row.cluster_id);
        if cluster_ids.is_empty() {
            return Err(Error::Parse {
                line: i + 2,
                field: "cluster_id".into(),
                message: "empty".into(),
            });
        }
        out.push(StaffUnit {
            university_id: row.university_id,
            cluster_ids,
            evidence: row.evidence.parse()?,
            n_pubs: row.n_pubs,
        });
    }
    Ok(out)
}

/// `review_queue.csv`: `cluster_id,flags,details`.
pub fn write_review_queue(staff: &DerivedStaff, w: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["cluster_id", "flags", "details"])?;
    for c in &staff.review_queue {
        let flags: Vec<&str> = c.flags.iter().map(|f| f.as_str()).collect();
        w.write_record([
            c.cluster_id.as_str(),
            &flags.join(";"),
            &format!("university={}; {}", c.university_id, c.details.join("; ")),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<review_queue>", e))
}
