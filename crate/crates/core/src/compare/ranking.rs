use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One university's overall result in one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredUniversity {
    pub university_id: String,
    pub obs: usize,
    pub fss_u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeRank {
    pub obs: usize,
    pub fss_u: f64,
    pub rank: usize,
    pub percentile: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    pub university_id: String,
    pub unsupervised: ModeRank,
    pub supervised: ModeRank,
    /// `rank_supervised − rank_unsupervised`: positive when the unsupervised
    /// ranking places the university higher.
    pub delta_rank: i64,
}

/// Rows ordered by supervised rank.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub n: usize,
    pub rows: Vec<RankRow>,
}

/// `round_half_up(100·(n − rank)/(n − 1))` in integer arithmetic; 100 when
/// `n = 1`.
pub fn rank_percentile(rank: usize, n: usize) -> u32 {
    assert!((1..=n).contains(&rank), "rank {rank} out of 1..={n}");
    if n == 1 {
        return 100;
    }
    let num = 100 * (n - rank);
    let den = n - 1;
    ((2 * num + den) / (2 * den)) as u32
}

/// Quartile 1..=4 from the unrounded percentile: Q1 at ≥ 75, Q2 at ≥ 50,
/// Q3 at ≥ 25, else Q4.
pub fn assign_quartile(rank: usize, n: usize) -> u8 {
    assert!((1..=n).contains(&rank), "rank {rank} out of 1..={n}");
    if n == 1 {
        return 1;
    }
    // 100·(n − rank)/(n − 1) ≥ c  ⇔  100·(n − rank) ≥ c·(n − 1)
    let scaled = 100 * (n - rank);
    let den = n - 1;
    match () {
        _ if scaled >= 75 * den => 1,
        _ if scaled >= 50 * den => 2,
        _ if scaled >= 25 * den => 3,
        _ => 4,
    }
}

fn ranks(scores: &[ScoredUniversity]) -> BTreeMap<&str, (usize, &ScoredUniversity)> {
    let mut order: Vec<&ScoredUniversity> = scores.iter().collect();
    order.sort_by(|a, b| {
        b.fss_u
            .total_cmp(&a.fss_u)
            .then_with(|| a.university_id.cmp(&b.university_id))
    });
    order
        .into_iter()
        .enumerate()
        .map(|(i, s)| (s.university_id.as_str(), (i + 1, s)))
        .collect()
}

/// Ranks both modes by descending FSS_U, ties to the smaller university id.
pub fn rank_universities(supervised: &[ScoredUniversity], unsupervised: &[ScoredUniversity]) -> Result<RankTable> {
    let sup = ranks(supervised);
    let unsup = ranks(unsupervised);
    if sup.len() != supervised.len() || unsup.len() != unsupervised.len() {
        return Err(Error::invalid("rank table", "duplicate university in a mode"));
    }
    let unpaired: Vec<String> = sup
        .keys()
        .filter(|k| !unsup.contains_key(*k))
        .chain(unsup.keys().filter(|k| !sup.contains_key(*k)))
        .map(|k| k.to_string())
        .collect();
    if !unpaired.is_empty() {
        return Err(Error::UnpairedUniversities(unpaired));
    }
    let n = sup.len();
    let mut rows: Vec<RankRow> = sup
        .iter()
        .map(|(id, (rs, s))| {
            let (ru, u) = unsup[id];
            RankRow {
                university_id: id.to_string(),
                unsupervised: ModeRank {
                    obs: u.obs,
                    fss_u: u.fss_u,
                    rank: ru,
                    percentile: rank_percentile(ru, n),
                },
                supervised: ModeRank {
                    obs: s.obs,
                    fss_u: s.fss_u,
                    rank: *rs,
                    percentile: rank_percentile(*rs, n),
                },
                delta_rank: *rs as i64 - ru as i64,
            }
        })
        .collect();
    rows.sort_by_key(|r| r.supervised.rank);
    Ok(RankTable { n, rows })
}

/// A published ranking row, both modes, as shipped in the reference file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct ReferenceRow {
    pub university: String,
    pub unsup_obs: usize,
    pub unsup_fss_u: f64,
    pub unsup_rank: usize,
    pub unsup_percentile: u32,
    pub sup_obs: usize,
    pub sup_fss_u: f64,
    pub sup_rank: usize,
    pub sup_percentile: u32,
    #[serde(deserialize_with = "signed")]
    pub delta_rank: i64,
}

fn signed<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<i64, D::Error> {
    let s = String::deserialize(d)?;
    s.trim_start_matches('+').parse().map_err(serde::de::Error::custom)
}

pub fn parse_reference_rankings(r: impl Read) -> Result<Vec<ReferenceRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// The 65-university 2015–2019 Italian ranking in both modes, with scores
/// rounded to three decimals.
pub fn reference_rankings() -> Vec<ReferenceRow> {
    parse_reference_rankings(include_str!("../../data/reference_rankings.csv").as_bytes())
        .expect("bundled reference rankings parse")
}

impl RankTable {
    /// Takes ranks as given (the rounded scores contain ties) and recomputes
    /// percentiles and rank differences from them.
    pub fn from_reference(rows: &[ReferenceRow]) -> Result<Self> {
        let n = rows.len();
        for r in rows {
            if !(1..=n).contains(&r.sup_rank) || !(1..=n).contains(&r.unsup_rank) {
                return Err(Error::invalid("rank table", format!("{}: rank out of range", r.university)));
            }
        }
        let mut out: Vec<RankRow> = rows
            .iter()
            .map(|r| RankRow {
                university_id: r.university.clone(),
                unsupervised: ModeRank {
                    obs: r.unsup_obs,
                    fss_u: r.unsup_fss_u,
                    rank: r.unsup_rank,
                    percentile: rank_percentile(r.unsup_rank, n),
                },
                supervised: ModeRank {
                    obs: r.sup_obs,
                    fss_u: r.sup_fss_u,
                    rank: r.sup_rank,
                    percentile: rank_percentile(r.sup_rank, n),
                },
                delta_rank: r.sup_rank as i64 - r.unsup_rank as i64,
            })
            .collect();
        out.sort_by_key(|r| r.supervised.rank);
        Ok(RankTable { n, rows: out })
    }

    pub fn get(&self, university_id: &str) -> Option<&RankRow> {
        self.rows.iter().find(|r| r.university_id == university_id)
    }

    /// Largest `|delta_rank|` among the supervised top `k` (all rows if `None`).
    pub fn max_abs_delta_rank(&self, top_k: Option<usize>) -> i64 {
        self.rows
            .iter()
            .filter(|r| top_k.is_none_or(|k| r.supervised.rank <= k))
            .map(|r| r.delta_rank.abs())
            .max()
            .unwrap_or(0)
    }

    /// Same rows with the two modes swapped.
    pub fn transposed(&self) -> Self {
        let mut rows: Vec<RankRow> = self
            .rows
            .iter()
            .map(|r| RankRow {
                university_id: r.university_id.clone(),
                unsupervised: r.supervised,
                supervised: r.unsupervised,
                delta_rank: -r.delta_rank,
            })
            .collect();
        rows.sort_by_key(|r| r.supervised.rank);
        RankTable { n: self.n, rows }
    }
}

/// `counts[q_unsup − 1][q_sup − 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuartileMatrix {
    pub counts: [[usize; 4]; 4],
}

impl QuartileMatrix {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn diagonal(&self) -> usize {
        (0..4).map(|i| self.counts[i][i]).sum()
    }

    /// Better quartile unsupervised than supervised.
    pub fn above_diagonal(&self) -> usize {
        (0..4).flat_map(|i| ((i + 1)..4).map(move |j| (i, j))).map(|(i, j)| self.counts[i][j]).sum()
    }

    pub fn below_diagonal(&self) -> usize {
        (0..4).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| self.counts[i][j]).sum()
    }

    pub fn transposed(&self) -> Self {
        let mut counts = [[0; 4]; 4];
        for (i, row) in self.counts.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                counts[j][i] = *c;
            }
        }
        QuartileMatrix { counts }
    }
}

pub fn quartile_confusion(table: &RankTable) -> QuartileMatrix {
    let mut counts = [[0; 4]; 4];
    for r in &table.rows {
        let qu = assign_quartile(r.unsupervised.rank, table.n);
        let qs = assign_quartile(r.supervised.rank, table.n);
        counts[qu as usize - 1][qs as usize - 1] += 1;
    }
    QuartileMatrix { counts }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuartileJump {
    pub university_id: String,
    pub quartile_unsupervised: u8,
    pub quartile_supervised: u8,
}

/// Universities whose quartiles differ by at least `threshold`, in
/// supervised rank order.
pub fn rank_jumps(table: &RankTable, threshold: u8) -> Vec<QuartileJump> {
    table
        .rows
        .iter()
        .filter_map(|r| {
            let qu = assign_quartile(r.unsupervised.rank, table.n);
            let qs = assign_quartile(r.supervised.rank, table.n);
            (qu.abs_diff(qs) >= threshold).then(|| QuartileJump {
                university_id: r.university_id.clone(),
                quartile_unsupervised: qu,
                quartile_supervised: qs,
            })
        })
        .collect()
}

/// `rank_table.csv`, one row per university in supervised rank order.
pub fn write_rank_table(table: &RankTable, w: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record([
        "university_id",
        "unsup_obs",
        "unsup_fss_u",
        "unsup_rank",
        "unsup_percentile",
        "sup_obs",
        "sup_fss_u",
        "sup_rank",
        "sup_percentile",
        "delta_rank",
    ])?;
    for r in &table.rows {
        let (u, s) = (&r.unsupervised, &r.supervised);
        w.write_record([
            r.university_id.clone(),
            u.obs.to_string(),
            u.fss_u.to_string(),
            u.rank.to_string(),
            u.percentile.to_string(),
            s.obs.to_string(),
            s.fss_u.to_string(),
            s.rank.to_string(),
            s.percentile.to_string(),
            r.delta_rank.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<rank_table>", e))
}

/// `quartile_matrix.csv`: rows are unsupervised quartiles, columns supervised.
pub fn write_quartile_matrix(m: &QuartileMatrix, w: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    w.write_record(["unsup_quartile", "sup_q1", "sup_q2", "sup_q3", "sup_q4"])?;
    for (i, row) in m.counts.iter().enumerate() {
        let mut rec = vec![(i + 1).to_string()];
        rec.extend(row.iter().map(|c| c.to_string()));
        w.write_record(rec)?;
    }
    w.flush().map_err(|e| Error::io("<quartile_matrix>", e))
}
