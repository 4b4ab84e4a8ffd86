//! Greedy average-linkage agglomeration over one block.

use super::block::Block;
use super::rules::ScoringRules;
use super::score::{pair_evidence, MentionContext};
use super::summary::summarize_cluster;
use super::AuthorCluster;
use crate::corpus::Corpus;
use crate::Result;

/// Pairwise scores between the items of one block; `None` marks a pair that
/// may never share a cluster.
#[derive(Debug, Clone)]
pub struct ScoreMatrix {
    n: usize,
    cells: Vec<Option<f64>>,
}

impl ScoreMatrix {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            cells: vec![Some(0.0); n * n],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn set(&mut self, i: usize, j: usize, v: Option<f64>) {
        self.cells[i * self.n + j] = v;
        self.cells[j * self.n + i] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.cells[i * self.n + j]
    }
}

/// One merge step: the two clusters (named by their smallest item) and the
/// average linkage at which they merged.
#[derive(Debug, Clone, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub linkage: f64,
}

/// Runs the agglomeration and returns the merge trace plus the final
/// clusters (each sorted, clusters ordered by smallest item).
///
/// At every step the pair of clusters with the highest average pairwise
/// score is merged, provided that average reaches `threshold` and no pair
/// across them is forbidden. Ties go to the lexicographically smallest
/// `(smallest item of left, smallest item of right)`. The choice of pair never
/// depends on the threshold, so a higher threshold yields a prefix of the
/// same trace.
pub fn agglomerate(scores: &ScoreMatrix, threshold: f64) -> (Vec<Merge>, Vec<Vec<usize>>) {
    let n = scores.len();
    // slot i holds the cluster whose smallest member is i
    let mut members: Vec<Option<Vec<usize>>> = (0..n).map(|i| Some(vec![i])).collect();
    let mut sum = vec![0.0f64; n * n];
    let mut blocked = vec![false; n * n];
    for i in 0..n {
        for j in 0..n {
            match scores.get(i, j) {
                Some(v) => sum[i * n + j] = v,
                None => blocked[i * n + j] = true,
            }
        }
    }
    let mut trace = Vec::new();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for a in 0..n {
            let Some(ma) = &members[a] else { continue };
            for b in (a + 1)..n {
                let Some(mb) = &members[b] else { continue };
                if blocked[a * n + b] {
                    continue;
                }
                let avg = sum[a * n + b] / (ma.len() * mb.len()) as f64;
                if avg >= threshold && best.is_none_or(|(_, _, v)| avg > v) {
                    best = Some((a, b, avg));
                }
            }
        }
        let Some((a, b, linkage)) = best else { break };
        let mb = members[b].take().expect("active slot");
        members[a].as_mut().expect("active slot").extend(mb);
        for c in 0..n {
            if members[c].is_none() || c == a {
                continue;
            }
            let s = sum[b * n + c];
            sum[a * n + c] += s;
            sum[c * n + a] += s;
            let blk = blocked[b * n + c];
            blocked[a * n + c] |= blk;
            blocked[c * n + a] |= blk;
        }
        trace.push(Merge {
            left: a,
            right: b,
            linkage,
        });
    }
    let clusters = members
        .into_iter()
        .flatten()
        .map(|mut m| {
            m.sort_unstable();
            m
        })
        .collect();
    (trace, clusters)
}

/// Scores every pair of a block's mentions under `rules`.
pub fn block_scores(contexts: &[MentionContext], rules: &ScoringRules) -> ScoreMatrix {
    let n = contexts.len();
    let mut m = ScoreMatrix::new(n);
    for i in 0..n {
        m.set(i, i, None);
        for j in (i + 1)..n {
            let (a, b) = (&contexts[i], &contexts[j]);
            let v = if a.mention_ref.pub_id == b.mention_ref.pub_id {
                None
            } else {
                let ev = pair_evidence(a, b, rules);
                if ev.hard_conflict {
                    None
                } else {
                    Some(ev.score(rules))
                }
            };
            m.set(i, j, v);
        }
    }
    m
}

/// Clusters one block and summarizes each cluster.
pub fn cluster_block(block: &Block, corpus: &Corpus, rules: &ScoringRules) -> Result<Vec<AuthorCluster>> {
    let contexts = block
        .mentions
        .iter()
        .map(|r| MentionContext::new(corpus, r))
        .collect::<Result<Vec<_>>>()?;
    let scores = block_scores(&contexts, rules);
    let (_, groups) = agglomerate(&scores, rules.merge_threshold);
    groups
        .into_iter()
        .map(|g| {
            let refs: Vec<_> = g.into_iter().map(|i| block.mentions[i].clone()).collect();
            summarize_cluster(&refs, corpus)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{AuthorMention, MentionRef};
    use crate::disambig::block::block_mentions;
    use crate::disambig::score::tests::{mention, publication};
    use proptest::prelude::*;

    fn with_orcid(mut m: AuthorMention, o: &str) -> AuthorMention {
        m.orcid = Some(o.into());
        m
    }

    #[test]
    fn shared_orcid_makes_one_cluster() {
        let m = with_orcid(mention("rossi, m", "rossi", "m"), "0000-0001-0000-0001");
        let corpus = Corpus::new(
            (1..=3)
                .map(|i| publication(&format!("P{i}"), 2015 + i, "SC1", "", vec![m.clone()]))
                .collect(),
        )
        .unwrap();
        let blocks = block_mentions(&corpus);
        assert_eq!(blocks.len(), 1);
        let clusters = cluster_block(&blocks[0], &corpus, &ScoringRules::default()).unwrap();
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].n_pubs, 3);
    }

    #[test]
    fn distinct_orcids_stay_apart() {
        let mut a = with_orcid(mention("rossi, m", "rossi", "m"), "0000-0001-0000-0001");
        a.email = Some("m@unimi.it".into());
        let mut b = with_orcid(a.clone(), "0000-0001-0000-0002");
        b.email = a.email.clone();
        let corpus = Corpus::new(vec![
            publication("P1", 2016, "SC1", "j", vec![a]),
            publication("P2", 2016, "SC1", "j", vec![b]),
        ])
        .unwrap();
        let blocks = block_mentions(&corpus);
        let clusters = cluster_block(&blocks[0], &corpus, &ScoringRules::default()).unwrap();
        assert_eq!(clusters.len(), 2);
        assert!(clusters.iter().all(|c| c.n_pubs == 1));
    }

    #[test]
    fn same_publication_mentions_never_merge() {
        let m = with_orcid(mention("rossi, m", "rossi", "m"), "0000-0001-0000-0001");
        let corpus = Corpus::new(vec![publication("P1", 2016, "SC1", "j", vec![m.clone(), m])]).unwrap();
        let blocks = block_mentions(&corpus);
        let clusters = cluster_block(&blocks[0], &corpus, &ScoringRules::default()).unwrap();
        assert_eq!(clusters.len(), 2);
    }

    /// Sum over within-cluster pairs of (score - threshold); forbidden pairs
    /// make a partition infeasible.
    fn objective(p: &[Vec<usize>], s: &ScoreMatrix, threshold: f64) -> Option<f64> {
        let mut total = 0.0;
        for g in p {
            for (x, &i) in g.iter().enumerate() {
                for &j in &g[x + 1..] {
                    total += s.get(i, j)? - threshold;
                }
            }
        }
        Some(total)
    }

    fn all_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
        fn rec(i: usize, n: usize, cur: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
            if i == n {
                out.push(cur.clone());
                return;
            }
            for k in 0..cur.len() {
                cur[k].push(i);
                rec(i + 1, n, cur, out);
                cur[k].pop();
            }
            cur.push(vec![i]);
            rec(i + 1, n, cur, out);
            cur.pop();
        }
        let mut out = Vec::new();
        rec(0, n, &mut Vec::new(), &mut out);
        out
    }

    #[test]
    fn partition_enumeration_is_bell_number() {
        assert_eq!(all_partitions(5).len(), 52);
    }

    #[test]
    fn planted_two_three_split_is_recovered_and_optimal() {
        // two people sharing a block: {0,2,4} share co-authors and an
        // organization, {1,3} share an email; no identifiers cross over
        let mk = |org: &str, email: Option<&str>| {
            let mut m = mention("rossi, m", "rossi", "m");
            m.organization_normalized = Some(org.into());
            m.email = email.map(str::to_string);
            m
        };
        let coauthors_a = ["bianchi", "verdi"];
        let coauthors_b = ["neri", "gialli"];
        let mut pubs = Vec::new();
        for i in 0..5 {
            let (m, co) = if i % 2 == 0 {
                (mk("univ milan", None), &coauthors_a)
            } else {
                (mk("univ pisa", Some("m.rossi@unipi.it")), &coauthors_b)
            };
            let mut ms = vec![m];
            ms.extend(co.iter().map(|n| mention(n, n, "z")));
            pubs.push(publication(&format!("P{i}"), 2015 + i as i32, "SC1", "", ms));
        }
        let corpus = Corpus::new(pubs).unwrap();
        let rules = ScoringRules::default();
        let blocks = block_mentions(&corpus);
        let block = blocks.iter().find(|b| b.key == "rossi|m").unwrap();
        assert_eq!(block.mentions.len(), 5);
        let contexts: Vec<_> = block
            .mentions
            .iter()
            .map(|r| MentionContext::new(&corpus, r).unwrap())
            .collect();
        let scores = block_scores(&contexts, &rules);
        let (_, greedy) = agglomerate(&scores, rules.merge_threshold);
        assert_eq!(greedy, vec![vec![0, 2, 4], vec![1, 3]]);

        let best = all_partitions(5)
            .into_iter()
            .filter_map(|p| objective(&p, &scores, rules.merge_threshold).map(|v| (v, p)))
            .fold(None::<(f64, Vec<Vec<usize>>)>, |acc, (v, p)| match acc {
                Some((bv, _)) if bv >= v => acc,
                _ => Some((v, p)),
            })
            .unwrap();
        let mut best_p = best.1;
        for g in &mut best_p {
            g.sort();
        }
        best_p.sort();
        assert_eq!(best_p, greedy);
        assert_eq!(objective(&greedy, &scores, rules.merge_threshold), Some(best.0));

        let clusters = cluster_block(block, &corpus, &rules).unwrap();
        let sizes: Vec<_> = clusters.iter().map(|c| c.n_pubs).collect();
        assert_eq!(sizes, [3, 2]);
        assert_eq!(clusters[1].email.as_deref(), Some("m.rossi@unipi.it"));
        assert_eq!(clusters[0].mention_refs[0], MentionRef::new("P0", 0));
    }

    #[test]
    fn ties_break_toward_smallest_items() {
        let mut s = ScoreMatrix::new(4);
        for i in 0..4 {
            s.set(i, i, None);
        }
        s.set(0, 1, Some(60.0));
        s.set(2, 3, Some(60.0));
        s.set(0, 2, Some(0.0));
        s.set(0, 3, Some(0.0));
        s.set(1, 2, Some(0.0));
        s.set(1, 3, Some(0.0));
        let (trace, clusters) = agglomerate(&s, 50.0);
        assert_eq!((trace[0].left, trace[0].right), (0, 1));
        assert_eq!((trace[1].left, trace[1].right), (2, 3));
        assert_eq!(clusters, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn forbidden_pair_blocks_whole_clusters() {
        let mut s = ScoreMatrix::new(3);
        for i in 0..3 {
            s.set(i, i, None);
        }
        s.set(0, 1, Some(100.0));
        s.set(1, 2, Some(100.0));
        s.set(0, 2, None);
        let (_, clusters) = agglomerate(&s, 50.0);
        assert_eq!(clusters, vec![vec![0, 1], vec![2]]);
    }

    fn arb_matrix() -> impl Strategy<Value = ScoreMatrix> {
        (2usize..9).prop_flat_map(|n| {
            prop::collection::vec(prop::option::weighted(0.85, 0.0f64..120.0), n * (n - 1) / 2)
                .prop_map(move |vals| {
                    let mut m = ScoreMatrix::new(n);
                    let mut k = 0;
                    for i in 0..n {
                        m.set(i, i, None);
                        for j in (i + 1)..n {
                            m.set(i, j, vals[k]);
                            k += 1;
                        }
                    }
                    m
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn output_is_partition(m in arb_matrix(), t in 1.0f64..100.0) {
            let (_, clusters) = agglomerate(&m, t);
            let mut all: Vec<usize> = clusters.iter().flatten().copied().collect();
            all.sort();
            prop_assert_eq!(all, (0..m.len()).collect::<Vec<_>>());
            for g in &clusters {
                for (x, &i) in g.iter().enumerate() {
                    for &j in &g[x + 1..] {
                        prop_assert!(m.get(i, j).is_some());
                    }
                }
            }
        }

        #[test]
        fn higher_threshold_is_trace_prefix(m in arb_matrix(), lo in 1.0f64..100.0, bump in 0.0f64..60.0) {
            let hi = lo + bump;
            let (t_lo, c_lo) = agglomerate(&m, lo);
            let (t_hi, c_hi) = agglomerate(&m, hi);
            prop_assert!(t_hi.len() <= t_lo.len());
            prop_assert_eq!(&t_lo[..t_hi.len()], &t_hi[..]);
            prop_assert!(c_hi.len() >= c_lo.len());
        }
    }
}
