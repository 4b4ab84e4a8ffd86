use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::ranking::{
    quartile_confusion, rank_jumps, rank_universities, QuartileJump, QuartileMatrix, RankTable, ScoredUniversity,
};
use super::stats::{distribution_stats, mean, median, pearson, spearman, DistributionStats, PERCENTILE_POINTS};
use crate::fss::{Level, Mode, ResearcherScore, UniversityScore};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupCorrelation {
    pub group: String,
    pub n: usize,
    pub pearson: Option<f64>,
    pub spearman: Option<f64>,
}

/// Pearson on scores and Spearman on ranks, over universities present in
/// both modes, for each key of `level`. Groups with fewer than three pairs
/// are skipped with a warning.
pub fn correlation_battery(scores: &[UniversityScore], level: Level) -> Vec<GroupCorrelation> {
    let mut pairs: BTreeMap<&str, BTreeMap<&str, [Option<f64>; 2]>> = BTreeMap::new();
    for s in scores.iter().filter(|s| s.level == level) {
        let slot = match s.mode {
            Mode::Supervised => 0,
            Mode::Unsupervised => 1,
        };
        pairs.entry(&s.level_key).or_default().entry(&s.university_id).or_default()[slot] = Some(s.fss_u);
    }
    let mut out = Vec::new();
    for (group, unis) in pairs {
        let (sup, unsup): (Vec<f64>, Vec<f64>) = unis
            .values()
            .filter_map(|[a, b]| Some((a.as_ref().copied()?, b.as_ref().copied()?)))
            .unzip();
        if sup.len() < 3 {
            log::warn!("correlation group {group} has {} paired universities; skipped", sup.len());
            continue;
        }
        out.push(GroupCorrelation {
            group: group.to_string(),
            n: sup.len(),
            pearson: pearson(&unsup, &sup),
            spearman: spearman(&unsup, &sup),
        });
    }
    out
}

/// Pearson on the two FSS_U columns and on the two rank columns.
pub fn rank_table_correlation(table: &RankTable) -> GroupCorrelation {
    let col = |f: fn(&super::ranking::RankRow) -> f64| table.rows.iter().map(f).collect::<Vec<f64>>();
    let (su, ss) = (col(|r| r.unsupervised.fss_u), col(|r| r.supervised.fss_u));
    let (ru, rs) = (col(|r| r.unsupervised.rank as f64), col(|r| r.supervised.rank as f64));
    GroupCorrelation {
        group: Level::OVERALL_KEY.to_string(),
        n: table.n,
        pearson: pearson(&su, &ss),
        spearman: spearman(&ru, &rs),
    }
}

/// `100·(unsupervised − supervised)/supervised`; `None` when the supervised
/// value is 0.
pub fn pct_deviation(unsupervised: f64, supervised: f64) -> Option<f64> {
    (supervised != 0.0).then(|| 100.0 * (unsupervised - supervised) / supervised)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScDeviation {
    pub sc_id: String,
    pub obs_supervised: usize,
    pub obs_unsupervised: usize,
    pub mean_supervised: f64,
    pub mean_unsupervised: f64,
    pub median_supervised: f64,
    pub median_unsupervised: f64,
    pub obs_pct: Option<f64>,
    pub mean_pct: Option<f64>,
    pub median_pct: Option<f64>,
}

/// Per-SC head counts and FSS_R location in both modes, for SCs scored in both.
pub fn sc_deviations(scores: &[ResearcherScore]) -> Vec<ScDeviation> {
    let mut by_sc: BTreeMap<&str, [Vec<f64>; 2]> = BTreeMap::new();
    for s in scores {
        let slot = match s.mode {
            Mode::Supervised => 0,
            Mode::Unsupervised => 1,
        };
        by_sc.entry(&s.sc_id).or_default()[slot].push(s.fss_r);
    }
    by_sc
        .into_iter()
        .filter(|(_, [s, u])| !s.is_empty() && !u.is_empty())
        .map(|(sc, [s, u])| {
            let (ms, mu) = (mean(&s).unwrap(), mean(&u).unwrap());
            let (ds, du) = (median(&s).unwrap(), median(&u).unwrap());
            ScDeviation {
                sc_id: sc.to_string(),
                obs_supervised: s.len(),
                obs_unsupervised: u.len(),
                mean_supervised: ms,
                mean_unsupervised: mu,
                median_supervised: ds,
                median_unsupervised: du,
                obs_pct: pct_deviation(u.len() as f64, s.len() as f64),
                mean_pct: pct_deviation(mu, ms),
                median_pct: pct_deviation(du, ds),
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationCorrelations {
    /// SC level: head-count deviation vs mean FSS_R deviation.
    pub sc_obs_vs_mean: Option<f64>,
    pub sc_obs_vs_median: Option<f64>,
    /// University level: head-count deviation vs FSS_U deviation.
    pub university_obs_vs_fss_u: Option<f64>,
    pub university_obs_vs_delta_rank: Option<f64>,
}

fn paired(xs: impl Iterator<Item = (Option<f64>, Option<f64>)>) -> Option<f64> {
    let (a, b): (Vec<f64>, Vec<f64>) = xs.filter_map(|(a, b)| Some((a?, b?))).unzip();
    if a.len() < 3 {
        return None;
    }
    pearson(&a, &b)
}

pub fn deviation_correlations(sc: &[ScDeviation], table: &RankTable) -> DeviationCorrelations {
    let obs_pct = |r: &super::ranking::RankRow| pct_deviation(r.unsupervised.obs as f64, r.supervised.obs as f64);
    DeviationCorrelations {
        sc_obs_vs_mean: paired(sc.iter().map(|d| (d.obs_pct, d.mean_pct))),
        sc_obs_vs_median: paired(sc.iter().map(|d| (d.obs_pct, d.median_pct))),
        university_obs_vs_fss_u: paired(
            table
                .rows
                .iter()
                .map(|r| (obs_pct(r), pct_deviation(r.unsupervised.fss_u, r.supervised.fss_u))),
        ),
        university_obs_vs_delta_rank: paired(table.rows.iter().map(|r| (obs_pct(r), Some(r.delta_rank as f64)))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelledStats {
    /// An SC id, or `all`.
    pub sc_id: String,
    pub mode: Mode,
    pub stats: DistributionStats,
}

/// FSS_R distributions per mode, overall then per SC.
pub fn distribution_table(scores: &[ResearcherScore]) -> Result<Vec<LabelledStats>> {
    let mut groups: BTreeMap<(bool, &str, Mode), Vec<f64>> = BTreeMap::new();
    for s in scores {
        groups.entry((false, Level::OVERALL_KEY, s.mode)).or_default().push(s.fss_r);
        groups.entry((true, &s.sc_id, s.mode)).or_default().push(s.fss_r);
    }
    groups
        .into_iter()
        .map(|((_, sc, mode), v)| {
            Ok(LabelledStats {
                sc_id: sc.to_string(),
                mode,
                stats: distribution_stats(&v)?,
            })
        })
        .collect()
}

pub fn write_distribution_stats(rows: &[LabelledStats], w: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    let mut header: Vec<String> = ["sc", "mode", "obs", "mean", "std_dev", "variance", "skewness", "kurtosis"]
        .map(String::from)
        .to_vec();
    header.extend(PERCENTILE_POINTS.iter().map(|p| format!("p{p}")));
    header.push("max".into());
    w.write_record(&header)?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let s = &r.stats;
        let mut rec = vec![
            r.sc_id.clone(),
            r.mode.to_string(),
            s.obs.to_string(),
            s.mean.to_string(),
            s.std_dev.to_string(),
            s.variance.to_string(),
            opt(s.skewness),
            opt(s.kurtosis),
        ];
        rec.extend(s.percentiles.iter().map(|(_, v)| v.to_string()));
        rec.push(s.max.to_string());
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io("<distribution_stats>", e))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportParams {
    /// Supervised top-k over which rank stability is reported.
    pub top_k: usize,
}

impl Default for ReportParams {
    fn default() -> Self {
        Self { top_k: 11 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuartileSummary {
    pub diagonal: usize,
    pub above_diagonal: usize,
    pub below_diagonal: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub distributions: Vec<LabelledStats>,
    pub rank_table: RankTable,
    pub quartile_matrix: QuartileMatrix,
    pub quartile_summary: QuartileSummary,
    pub two_quartile_jumps: Vec<QuartileJump>,
    pub three_quartile_jumps: Vec<QuartileJump>,
    pub max_abs_delta_rank: i64,
    pub top_k: usize,
    pub max_abs_delta_rank_top_k: i64,
    /// The overall row first, then one per area.
    pub correlations: Vec<GroupCorrelation>,
    pub sc_deviations: Vec<ScDeviation>,
    pub deviation_correlations: DeviationCorrelations,
    /// Universities scored in only one mode; left out of every ranking.
    pub unpaired_universities: Vec<String>,
}

fn overall(scores: &[UniversityScore], mode: Mode) -> Vec<ScoredUniversity> {
    scores
        .iter()
        .filter(|s| s.level == Level::Overall && s.mode == mode)
        .map(|s| ScoredUniversity {
            university_id: s.university_id.clone(),
            obs: s.rs_u,
            fss_u: s.fss_u,
        })
        .collect()
}

/// The full battery over both modes' researcher and university scores.
pub fn build_report(
    researchers: &[ResearcherScore],
    universities: &[UniversityScore],
    params: &ReportParams,
) -> Result<ComparisonReport> {
    let mut sup = overall(universities, Mode::Supervised);
    let mut unsup = overall(universities, Mode::Unsupervised);
    let ids = |v: &[ScoredUniversity]| v.iter().map(|s| s.university_id.clone()).collect::<BTreeSet<_>>();
    let (sup_ids, unsup_ids) = (ids(&sup), ids(&unsup));
    let unpaired: Vec<String> = sup_ids.symmetric_difference(&unsup_ids).cloned().collect();
    if !unpaired.is_empty() {
        log::warn!("{} universities scored in one mode only: {}", unpaired.len(), unpaired.join(", "));
        sup.retain(|s| unsup_ids.contains(&s.university_id));
        unsup.retain(|s| sup_ids.contains(&s.university_id));
    }
    if sup.len() < 2 {
        return Err(Error::invalid(
            "comparison",
            "needs overall scores for at least two universities in both modes",
        ));
    }
    let rank_table = rank_universities(&sup, &unsup)?;
    let quartile_matrix = quartile_confusion(&rank_table);
    let mut correlations = vec![rank_table_correlation(&rank_table)];
    correlations.extend(correlation_battery(universities, Level::Area));
    let sc_dev = sc_deviations(researchers);
    Ok(ComparisonReport {
        distributions: distribution_table(researchers)?,
        quartile_summary: QuartileSummary {
            diagonal: quartile_matrix.diagonal(),
            above_diagonal: quartile_matrix.above_diagonal(),
            below_diagonal: quartile_matrix.below_diagonal(),
        },
        quartile_matrix,
        two_quartile_jumps: rank_jumps(&rank_table, 2),
        three_quartile_jumps: rank_jumps(&rank_table, 3),
        max_abs_delta_rank: rank_table.max_abs_delta_rank(None),
        top_k: params.top_k,
        max_abs_delta_rank_top_k: rank_table.max_abs_delta_rank(Some(params.top_k)),
        correlations,
        deviation_correlations: deviation_correlations(&sc_dev, &rank_table),
        sc_deviations: sc_dev,
        rank_table,
        unpaired_universities: unpaired,
    })
}
