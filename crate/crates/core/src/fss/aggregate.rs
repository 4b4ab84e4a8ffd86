use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::researcher::{Mode, ResearcherScore};
use crate::corpus::SCScheme;
use crate::{Error, Result};

/// Mean FSS_R over the productive researchers of one SC.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SCBaseline {
    pub sc_id: String,
    pub mean_fss_over_productive: f64,
    pub productive_count: usize,
    pub total_count: usize,
}

/// Baselines for one mode's scores. SCs without a productive researcher get
/// no entry.
pub fn compute_sc_baselines(scores: &[ResearcherScore]) -> BTreeMap<String, SCBaseline> {
    let mut acc: BTreeMap<&str, (f64, usize, usize)> = BTreeMap::new();
    for s in scores {
        let e = acc.entry(s.sc_id.as_str()).or_default();
        e.2 += 1;
        if s.fss_r > 0.0 {
            e.0 += s.fss_r;
            e.1 += 1;
        }
    }
    acc.into_iter()
        .filter(|(_, (_, productive, _))| *productive > 0)
        .map(|(sc, (sum, productive, total))| {
            (
                sc.to_string(),
                SCBaseline {
                    sc_id: sc.to_string(),
                    mean_fss_over_productive: sum / productive as f64,
                    productive_count: productive,
                    total_count: total,
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObsRule {
    /// Drop an SC only when every dataset has fewer than `min_obs` researchers.
    #[default]
    Literal,
    /// Drop an SC when any dataset has fewer than `min_obs` researchers.
    Strict,
}

impl FromStr for ObsRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(ObsRule::Literal),
            "strict" => Ok(ObsRule::Strict),
            other => Err(Error::invalid("obs rule", format!("{other} (expected literal or strict)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExclusionParams {
    pub min_obs: usize,
    pub rule: ObsRule,
}

impl Default for ExclusionParams {
    fn default() -> Self {
        Self {
            min_obs: 10,
            rule: ObsRule::Literal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "reason")]
pub enum ExclusionReason {
    ExcludedArea,
    Multidisciplinary,
    FewObservations { observations: BTreeMap<Mode, usize> },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Exclusions {
    pub kept: Vec<ResearcherScore>,
    pub excluded_scs: BTreeMap<String, ExclusionReason>,
    pub dropped_researchers: usize,
}

/// Drops researchers whose SC lies in an excluded area or is
/// multidisciplinary, then SCs with too few observations. Observations are
/// counted per mode among the modes present in `scores`; with a single mode
/// both rules reduce to `obs < min_obs`.
pub fn apply_exclusions(scores: Vec<ResearcherScore>, scheme: &SCScheme, params: &ExclusionParams) -> Result<Exclusions> {
    let mut excluded_scs = BTreeMap::new();
    for s in &scores {
        let sc = scheme
            .get(&s.sc_id)
            .ok_or_else(|| Error::UnknownSubjectCategory(s.sc_id.clone()))?;
        if sc.excluded_area {
            excluded_scs.insert(s.sc_id.clone(), ExclusionReason::ExcludedArea);
        } else if sc.is_multidisciplinary {
            excluded_scs.insert(s.sc_id.clone(), ExclusionReason::Multidisciplinary);
        }
    }
    let modes: Vec<Mode> = {
        let mut m: Vec<Mode> = scores.iter().map(|s| s.mode).collect();
        m.sort();
        m.dedup();
        m
    };
    let mut obs: BTreeMap<&str, BTreeMap<Mode, usize>> = BTreeMap::new();
    for s in &scores {
        if !excluded_scs.contains_key(&s.sc_id) {
            *obs.entry(s.sc_id.as_str()).or_default().entry(s.mode).or_default() += 1;
        }
    }
    let mut few = Vec::new();
    for (sc, counts) in obs {
        let full: BTreeMap<Mode, usize> = modes.iter().map(|m| (*m, counts.get(m).copied().unwrap_or(0))).collect();
        let below = full.values().filter(|&&n| n < params.min_obs).count();
        let drop = match params.rule {
            ObsRule::Literal => below == full.len(),
            ObsRule::Strict => below > 0,
        };
        if drop {
            few.push((sc.to_string(), ExclusionReason::FewObservations { observations: full }));
        }
    }
    excluded_scs.extend(few);
    let before = scores.len();
    let kept: Vec<ResearcherScore> = scores.into_iter().filter(|s| !excluded_scs.contains_key(&s.sc_id)).collect();
    Ok(Exclusions {
        dropped_researchers: before - kept.len(),
        kept,
        excluded_scs,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Sc,
    Area,
    Overall,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Sc, Level::Area, Level::Overall];
    pub const OVERALL_KEY: &'static str = "all";
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Level::Sc => "sc",
            Level::Area => "area",
            Level::Overall => "overall",
        })
    }
}

impl FromStr for Level {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sc" => Ok(Level::Sc),
            "area" => Ok(Level::Area),
            "overall" => Ok(Level::Overall),
            other => Err(Error::invalid("level", other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniversityScore {
    pub university_id: String,
    pub mode: Mode,
    pub level: Level,
    pub level_key: String,
    pub rs_u: usize,
    pub fss_u: f64,
}

/// `(1/RS_U)·Σ fss_rⱼ / baseline(scⱼ)` per university and level key. Every
/// researcher is scaled by the baseline of their own SC, whatever the level.
pub fn compute_fss_u(
    scores: &[ResearcherScore],
    baselines: &BTreeMap<String, SCBaseline>,
    scheme: &SCScheme,
    level: Level,
) -> Result<Vec<UniversityScore>> {
    let mut acc: BTreeMap<(&str, Mode, &str), (f64, usize)> = BTreeMap::new();
    for s in scores {
        let baseline = baselines
            .get(&s.sc_id)
            .ok_or_else(|| Error::MissingBaseline(s.sc_id.clone()))?;
        let key = match level {
            Level::Sc => s.sc_id.as_str(),
            Level::Area => scheme
                .area_of(&s.sc_id)
                .ok_or_else(|| Error::UnknownSubjectCategory(s.sc_id.clone()))?,
            Level::Overall => Level::OVERALL_KEY,
        };
        let e = acc.entry((s.university_id.as_str(), s.mode, key)).or_default();
        e.0 += s.fss_r / baseline.mean_fss_over_productive;
        e.1 += 1;
    }
    Ok(acc
        .into_iter()
        .map(|((u, mode, key), (sum, n))| UniversityScore {
            university_id: u.to_string(),
            mode,
            level,
            level_key: key.to_string(),
            rs_u: n,
            fss_u: sum / n as f64,
        })
        .collect())
}
