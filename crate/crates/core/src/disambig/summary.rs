use std::collections::{BTreeMap, BTreeSet};

use super::AuthorCluster;
use crate::corpus::{AuthorMention, Corpus, MentionRef};
use crate::{Error, Result};

/// Most frequent non-empty value; ties go to the lexicographically smaller.
pub fn modal<'a>(values: impl IntoIterator<Item = &'a str>) -> Option<String> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for v in values {
        if !v.is_empty() {
            *counts.entry(v).or_default() += 1;
        }
    }
    let mut best: Option<(&str, usize)> = None;
    for (v, c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((v, c));
        }
    }
    best.map(|(v, _)| v.to_string())
}

fn unique<'a>(values: impl IntoIterator<Item = &'a str>) -> (Option<String>, Vec<String>) {
    let distinct: BTreeSet<&str> = values.into_iter().filter(|v| !v.is_empty()).collect();
    let all: Vec<String> = distinct.iter().map(|s| s.to_string()).collect();
    if all.len() == 1 {
        (Some(all[0].clone()), all)
    } else {
        (None, all)
    }
}

fn initials(first_name: &str) -> String {
    first_name
        .split([' ', '-'])
        .filter_map(|t| t.chars().next())
        .collect()
}

/// Builds the cluster record for a set of mentions.
///
/// Years span the member publications; email, organization, city and country
/// are the modal member values; orcid and researcher id are set only when a
/// single value occurs. The first name is the most spelled-out form seen and
/// the full name is `last, initials`. The cluster id is derived from the
/// smallest member mention, so it does not depend on processing order.
pub fn summarize_cluster(refs: &[MentionRef], corpus: &Corpus) -> Result<AuthorCluster> {
    if refs.is_empty() {
        return Err(Error::invalid("cluster", "empty mention set"));
    }
    let mut refs = refs.to_vec();
    refs.sort();
    refs.dedup();
    let mut mentions: Vec<&AuthorMention> = Vec::with_capacity(refs.len());
    let mut years = Vec::with_capacity(refs.len());
    let mut pubs = BTreeSet::new();
    for r in &refs {
        let p = corpus
            .get(&r.pub_id)
            .ok_or_else(|| Error::UnknownPublication(r.pub_id.clone()))?;
        let m = p
            .mentions
            .get(r.position as usize)
            .ok_or_else(|| Error::invalid("mention", format!("no position {r}")))?;
        mentions.push(m);
        years.push(p.year);
        pubs.insert(r.pub_id.as_str());
    }
    let (orcid, orcids) = unique(mentions.iter().filter_map(|m| m.orcid.as_deref()));
    if orcids.len() > 1 {
        return Err(Error::ConflictingOrcids(orcids));
    }
    let (researcher_id, _) = unique(mentions.iter().filter_map(|m| m.researcher_id.as_deref()));

    let first_year = *years.iter().min().expect("non-empty");
    let last_year = *years.iter().max().expect("non-empty");
    let last_name = modal(mentions.iter().map(|m| m.last_name.as_str())).unwrap_or_default();
    let first_name = mentions
        .iter()
        .map(|m| m.first_name.as_str())
        .fold(None::<&str>, |best, f| match best {
            Some(b) if b.chars().count() > f.chars().count() => Some(b),
            Some(b) if b.chars().count() == f.chars().count() && b <= f => Some(b),
            _ => Some(f),
        })
        .unwrap_or_default()
        .to_string();
    let full_name = format!("{}, {}", last_name, initials(&first_name));

    Ok(AuthorCluster {
        cluster_id: format!("K{}-{}", refs[0].pub_id, refs[0].position),
        n_pubs: pubs.len(),
        first_year,
        last_year,
        academic_age: last_year - first_year,
        full_name,
        last_name,
        first_name,
        email: modal(mentions.iter().filter_map(|m| m.email.as_deref())),
        organization: modal(mentions.iter().filter_map(|m| m.organization_normalized.as_deref())),
        city: modal(mentions.iter().filter_map(|m| m.city.as_deref())),
        country: modal(mentions.iter().filter_map(|m| m.country.as_deref())),
        orcid,
        researcher_id,
        mention_refs: refs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disambig::score::tests::{mention, publication};

    fn corpus_with(years: &[i32], orgs: &[&str]) -> (Corpus, Vec<MentionRef>) {
        let mut pubs = Vec::new();
        for (i, y) in years.iter().enumerate() {
            let mut m = mention("d'amico, ca", "damico", if i == 0 { "carlo andrea" } else { "ca" });
            m.organization_normalized = orgs.get(i).map(|o| o.to_string());
            m.email = Some("damico@dii.uniroma2.it".into());
            m.orcid = Some("0000-0002-1825-0097".into());
            pubs.push(publication(&format!("P{i:03}"), *y, "SC", "", vec![m]));
        }
        let c = Corpus::new(pubs).unwrap();
        let refs = c.mention_refs().collect();
        (c, refs)
    }

    #[test]
    fn year_span_and_age() {
        let years: Vec<i32> = (1996..=2020).collect();
        let (c, refs) = corpus_with(&years, &[]);
        let k = summarize_cluster(&refs, &c).unwrap();
        assert_eq!((k.first_year, k.last_year, k.academic_age), (1996, 2020, 24));
        assert_eq!(k.n_pubs, 25);
        assert_eq!(k.first_name, "carlo andrea");
        assert_eq!(k.full_name, "damico, ca");
        assert_eq!(k.orcid.as_deref(), Some("0000-0002-1825-0097"));
        assert_eq!(k.email.as_deref(), Some("damico@dii.uniroma2.it"));
        assert_eq!(k.cluster_id, "KP000-0");
    }

    #[test]
    fn modal_organization() {
        let (c, refs) = corpus_with(
            &[2016, 2017, 2018, 2019],
            &["univ roma tor vergata", "univ roma la sapienza", "univ roma tor vergata", "univ roma tor vergata"],
        );
        let k = summarize_cluster(&refs, &c).unwrap();
        assert_eq!(k.organization.as_deref(), Some("univ roma tor vergata"));
    }

    #[test]
    fn tied_organization_takes_smaller() {
        let (c, refs) = corpus_with(&[2016, 2017, 2018, 2019], &["tor vergata", "sapienza", "sapienza", "tor vergata"]);
        let k = summarize_cluster(&refs, &c).unwrap();
        assert_eq!(k.organization.as_deref(), Some("sapienza"));
        assert_eq!(modal(["b", "a", "b", "a", "c"]), Some("a".into()));
        assert_eq!(modal(["", ""]), None);
    }

    #[test]
    fn conflicting_orcids_error() {
        let mut a = mention("rossi, m", "rossi", "m");
        a.orcid = Some("0000-0001-0000-0001".into());
        let mut b = a.clone();
        b.orcid = Some("0000-0001-0000-0002".into());
        let c = Corpus::new(vec![
            publication("P1", 2016, "SC", "", vec![a]),
            publication("P2", 2016, "SC", "", vec![b]),
        ])
        .unwrap();
        let refs: Vec<_> = c.mention_refs().collect();
        assert!(matches!(summarize_cluster(&refs, &c), Err(Error::ConflictingOrcids(_))));
    }

    #[test]
    fn researcher_id_only_when_unique() {
        let mut a = mention("rossi, m", "rossi", "m");
        a.researcher_id = Some("A-1".into());
        let mut b = a.clone();
        b.researcher_id = Some("B-2".into());
        let c = Corpus::new(vec![
            publication("P1", 2016, "SC", "", vec![a]),
            publication("P2", 2016, "SC", "", vec![b]),
        ])
        .unwrap();
        let refs: Vec<_> = c.mention_refs().collect();
        assert_eq!(summarize_cluster(&refs, &c).unwrap().researcher_id, None);
        assert_eq!(summarize_cluster(&refs[..1], &c).unwrap().researcher_id.as_deref(), Some("A-1"));
    }

    #[test]
    fn empty_set_is_error() {
        assert!(summarize_cluster(&[], &Corpus::default()).is_err());
    }
}
