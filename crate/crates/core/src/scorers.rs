//! Neighborhood link-prediction scorers and candidate ranking.
//!
//! All three scorers sum a per-vertex weight over the common neighbors
//! `Γ(u) ∩ Γ(v)` of the symmetrized graph:
//!
//! | scorer | weight of a common neighbor `z` |
//! |--------|---------------------------------|
//! | CN     | `1`                             |
//! | AA     | `1 / ln |Γ(z)|`                 |
//! | RA     | `1 / |Γ(z)|`                    |
//!
//! Weights are accumulated in ascending order of `|Γ(z)|`, so two pairs with
//! the same multiset of common-neighbor degrees get bit-identical scores and
//! land in the same tie block.
//!
//! Scores are zero outside distance-2 pairs, so candidates are enumerated by
//! walking two hops from each source vertex instead of visiting all pairs.

use std::collections::HashMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Mode, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scorer {
    Cn,
    Aa,
    Ra,
}

impl Scorer {
    pub const ALL: [Scorer; 3] = [Scorer::Cn, Scorer::Aa, Scorer::Ra];

    pub fn name(self) -> &'static str {
        match self {
            Scorer::Cn => "cn",
            Scorer::Aa => "aa",
            Scorer::Ra => "ra",
        }
    }

    #[inline]
    fn weight(self, degree: usize) -> f64 {
        match self {
            Scorer::Cn => 1.0,
            Scorer::Aa => 1.0 / (degree as f64).ln(),
            Scorer::Ra => 1.0 / degree as f64,
        }
    }
}

impl std::fmt::Display for Scorer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scorer {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cn" => Ok(Scorer::Cn),
            "aa" => Ok(Scorer::Aa),
            "ra" => Ok(Scorer::Ra),
            other => Err(Error::Parameter(format!("unknown scorer {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidatePolicy {
    TwoHop,
}

fn check_pair(g: &Graph, u: VertexId, v: VertexId) -> Result<()> {
    for x in [u, v] {
        if x as usize >= g.vertex_count() {
            return Err(Error::VertexOutOfRange {
                vertex: x as u64,
                vertex_count: g.vertex_count(),
            });
        }
    }
    if u == v {
        return Err(Error::Parameter(format!("self-pair ({u}, {u}) cannot be scored")));
    }
    Ok(())
}

/// Score of a single pair by sorted-list intersection.
pub fn score_pair(train: &Graph, scorer: Scorer, u: VertexId, v: VertexId) -> Result<f64> {
    check_pair(train, u, v)?;
    let (a, b) = (train.sym_slice(u as usize), train.sym_slice(v as usize));
    let mut degrees = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                degrees.push(train.sym_slice(a[i] as usize).len());
                i += 1;
                j += 1;
            }
        }
    }
    degrees.sort_unstable();
    Ok(degrees.into_iter().fold(0.0, |acc, d| acc + scorer.weight(d)))
}

pub fn common_neighbors(train: &Graph, u: VertexId, v: VertexId) -> Result<f64> {
    score_pair(train, Scorer::Cn, u, v)
}

pub fn adamic_adar(train: &Graph, u: VertexId, v: VertexId) -> Result<f64> {
    score_pair(train, Scorer::Aa, u, v)
}

pub fn resource_allocation(train: &Graph, u: VertexId, v: VertexId) -> Result<f64> {
    score_pair(train, Scorer::Ra, u, v)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoredPair {
    pub u: VertexId,
    pub v: VertexId,
    pub score: f64,
}

/// Candidate pairs sorted by descending score, ties broken by `(u, v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredRanking {
    pub scorer: Scorer,
    pub mode: Mode,
    pub policy: CandidatePolicy,
    pub entries: Vec<ScoredPair>,
    /// Exclusive end index of each maximal equal-score run.
    pub tie_ends: Vec<usize>,
}

impl ScoredRanking {
    /// Sorts `entries` and derives the tie blocks.
    pub fn from_entries(scorer: Scorer, mode: Mode, mut entries: Vec<ScoredPair>) -> Self {
        entries.par_sort_unstable_by(|a, b| {
            b.score
                .total_cmp(&a.score)
                .then(a.u.cmp(&b.u))
                .then(a.v.cmp(&b.v))
        });
        let mut tie_ends = Vec::new();
        for i in 1..=entries.len() {
            if i == entries.len() || entries[i].score != entries[i - 1].score {
                tie_ends.push(i);
            }
        }
        ScoredRanking {
            scorer,
            mode,
            policy: CandidatePolicy::TwoHop,
            entries,
            tie_ends,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tie_blocks(&self) -> impl Iterator<Item = &[ScoredPair]> + '_ {
        let starts = std::iter::once(0).chain(self.tie_ends.iter().copied());
        starts
            .zip(self.tie_ends.iter().copied())
            .map(move |(s, e)| &self.entries[s..e])
    }

    /// `u,v,score` rows in ranking order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "u,v,score")?;
        for e in &self.entries {
            writeln!(w, "{},{},{}", e.u, e.v, e.score)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn sidecar(&self) -> RankingSidecar {
        RankingSidecar {
            scorer: self.scorer,
            mode: self.mode,
            candidate_policy: self.policy,
            candidate_count: self.entries.len() as u64,
            tie_block_count: self.tie_ends.len() as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingSidecar {
    pub scorer: Scorer,
    pub mode: Mode,
    pub candidate_policy: CandidatePolicy,
    pub candidate_count: u64,
    pub tie_block_count: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct ScoreOptions {
    /// Upper bound on the wedge-count estimate of candidates that
    /// [`score_all`] may materialize.
    pub max_candidates: u64,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            max_candidates: 1 << 27,
        }
    }
}

/// Upper bound on the number of distance-2 candidates: the number of paths
/// of length two, halved in undirected mode.
pub fn estimate_candidates(train: &Graph) -> u64 {
    let wedges: u64 = (0..train.vertex_count())
        .map(|z| {
            let d = train.sym_slice(z).len() as u64;
            d * d.saturating_sub(1)
        })
        .sum();
    match train.mode() {
        Mode::Directed => wedges,
        Mode::Undirected => wedges / 2,
    }
}

struct Scratch {
    acc: Vec<f64>,
    touched: Vec<VertexId>,
    order: Vec<VertexId>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Scratch {
            acc: vec![0.0; n],
            touched: Vec::new(),
            order: Vec::new(),
        }
    }
}

/// Emits every candidate with source `u` (undirected: `(u, w)` with `u < w`;
/// directed: both `(u, w)` and `(w, u)` for `u < w`, minus existing arcs).
fn candidates_from<F>(train: &Graph, scorer: Scorer, u: usize, s: &mut Scratch, mut emit: F)
where
    F: FnMut(VertexId, VertexId, f64),
{
    let uid = u as VertexId;
    s.order.clear();
    s.order.extend_from_slice(train.sym_slice(u));
    s.order
        .sort_unstable_by_key(|&z| (train.sym_slice(z as usize).len(), z));
    for &z in &s.order {
        let nz = train.sym_slice(z as usize);
        let w = scorer.weight(nz.len());
        let start = nz.partition_point(|&x| x <= uid);
        for &x in &nz[start..] {
            let slot = &mut s.acc[x as usize];
            if *slot == 0.0 {
                s.touched.push(x);
            }
            *slot += w;
        }
    }
    let mode = train.mode();
    for &x in &s.touched {
        let score = std::mem::replace(&mut s.acc[x as usize], 0.0);
        match mode {
            Mode::Undirected => {
                if !train.has_edge(uid, x) {
                    emit(uid, x, score);
                }
            }
            Mode::Directed => {
                if !train.has_edge(uid, x) {
                    emit(uid, x, score);
                }
                if !train.has_edge(x, uid) {
                    emit(x, uid, score);
                }
            }
        }
    }
    s.touched.clear();
}

/// Scores every distance-2 non-edge and returns the global ranking.
pub fn score_all(train: &Graph, scorer: Scorer, opts: ScoreOptions) -> Result<ScoredRanking> {
    if train.is_empty() {
        return Err(Error::Parameter("cannot score an empty graph".into()));
    }
    let estimated = estimate_candidates(train);
    if estimated > opts.max_candidates {
        return Err(Error::CandidateBudget {
            estimated,
            budget: opts.max_candidates,
        });
    }
    let n = train.vertex_count();
    let chunks: Vec<Vec<ScoredPair>> = (0..n)
        .into_par_iter()
        .map_init(
            || Scratch::new(n),
            |s, u| {
                let mut local = Vec::new();
                candidates_from(train, scorer, u, s, |u, v, score| {
                    local.push(ScoredPair { u, v, score })
                });
                local
            },
        )
        .collect();
    let entries = chunks.concat();
    Ok(ScoredRanking::from_entries(scorer, train.mode(), entries))
}

/// Candidate counts of one tie block, split by a labeling predicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockCounts {
    pub score: f64,
    pub positives: u64,
    pub negatives: u64,
}

/// Streaming alternative to [`score_all`]: candidates are labeled as they
/// are produced and only per-score counts are kept, so memory grows with the
/// number of distinct scores rather than the number of candidates. Blocks are
/// returned in descending score order.
pub fn score_blocks<L>(train: &Graph, scorer: Scorer, is_positive: L) -> Result<Vec<BlockCounts>>
where
    L: Fn(VertexId, VertexId) -> bool + Sync,
{
    if train.is_empty() {
        return Err(Error::Parameter("cannot score an empty graph".into()));
    }
    let n = train.vertex_count();
    let merged: HashMap<u64, (u64, u64)> = (0..n)
        .into_par_iter()
        .with_min_len(64)
        .fold(
            || (Scratch::new(n), HashMap::<u64, (u64, u64)>::new()),
            |(mut s, mut counts), u| {
                candidates_from(train, scorer, u, &mut s, |u, v, score| {
                    let c = counts.entry(score.to_bits()).or_default();
                    if is_positive(u, v) {
                        c.0 += 1;
                    } else {
                        c.1 += 1;
                    }
                });
                (s, counts)
            },
        )
        .map(|(_, counts)| counts)
        .reduce(HashMap::new, |a, b| {
            if a.len() >= b.len() {
                merge_into(a, b)
            } else {
                merge_into(b, a)
            }
        });
    let mut blocks: Vec<BlockCounts> = merged
        .into_iter()
        .map(|(bits, (positives, negatives))| BlockCounts {
            score: f64::from_bits(bits),
            positives,
            negatives,
        })
        .collect();
    blocks.sort_unstable_by(|a, b| b.score.total_cmp(&a.score));
    Ok(blocks)
}

fn merge_into(mut a: HashMap<u64, (u64, u64)>, b: HashMap<u64, (u64, u64)>) -> HashMap<u64, (u64, u64)> {
    for (k, (p, q)) in b {
        let c = a.entry(k).or_default();
        c.0 += p;
        c.1 += q;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn undirected(n: usize, edges: &[(u32, u32)]) -> Graph {
        Graph::from_edges(Mode::Undirected, n, edges.iter().copied()).unwrap()
    }

    #[test]
    fn single_shared_neighbor() {
        // a=0, b=1, c=2
        let g = undirected(3, &[(0, 2), (1, 2)]);
        assert_eq!(common_neighbors(&g, 0, 1).unwrap(), 1.0);
        assert!((adamic_adar(&g, 0, 1).unwrap() - 1.0 / 2f64.ln()).abs() < 1e-15);
        assert!((adamic_adar(&g, 0, 1).unwrap() - 1.4427).abs() < 1e-4);
        assert_eq!(resource_allocation(&g, 0, 1).unwrap(), 0.5);
    }

    #[test]
    fn two_shared_neighbors() {
        let g = undirected(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]);
        assert_eq!(common_neighbors(&g, 0, 1).unwrap(), 2.0);
    }

    #[test]
    fn mixed_degree_common_neighbors() {
        // common neighbors 2 (degree 2) and 3 (degree 3: 0, 1, 4)
        let g = undirected(5, &[(0, 2), (1, 2), (0, 3), (1, 3), (3, 4)]);
        let aa = adamic_adar(&g, 0, 1).unwrap();
        assert!((aa - (1.0 / 2f64.ln() + 1.0 / 3f64.ln())).abs() < 1e-12);
        assert!((aa - 2.3529).abs() < 1e-4);
        // common neighbors of degree 2 and 4
        let g = undirected(6, &[(0, 2), (1, 2), (0, 3), (1, 3), (3, 4), (3, 5)]);
        assert_eq!(resource_allocation(&g, 0, 1).unwrap(), 0.75);
    }

    #[test]
    fn disconnected_pair_scores_zero() {
        let g = undirected(4, &[(0, 1), (2, 3)]);
        for s in Scorer::ALL {
            assert_eq!(score_pair(&g, s, 0, 2).unwrap(), 0.0);
        }
    }

    #[test]
    fn pair_errors() {
        let g = undirected(3, &[(0, 1)]);
        assert!(matches!(common_neighbors(&g, 0, 3), Err(Error::VertexOutOfRange { .. })));
        assert!(matches!(common_neighbors(&g, 1, 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn path_ranking() {
        let g = undirected(3, &[(0, 1), (1, 2)]);
        let r = score_all(&g, Scorer::Cn, ScoreOptions::default()).unwrap();
        assert_eq!(r.entries, vec![ScoredPair { u: 0, v: 2, score: 1.0 }]);
        assert_eq!(r.tie_ends, vec![1]);
    }

    #[test]
    fn star_is_one_tie_block() {
        let g = undirected(4, &[(0, 1), (0, 2), (0, 3)]);
        let r = score_all(&g, Scorer::Cn, ScoreOptions::default()).unwrap();
        let pairs: Vec<_> = r.entries.iter().map(|e| (e.u, e.v, e.score)).collect();
        assert_eq!(pairs, vec![(1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)]);
        assert_eq!(r.tie_blocks().map(<[_]>::len).collect::<Vec<_>>(), vec![3]);
    }

    #[test]
    fn four_cycle_resource_allocation() {
        let g = undirected(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        let r = score_all(&g, Scorer::Ra, ScoreOptions::default()).unwrap();
        let pairs: Vec<_> = r.entries.iter().map(|e| (e.u, e.v, e.score)).collect();
        assert_eq!(pairs, vec![(0, 2, 1.0), (1, 3, 1.0)]);
    }

    #[test]
    fn directed_candidates_are_ordered() {
        // 0 -> 1 -> 2: symmetrized neighborhoods make (0,2) and (2,0) candidates.
        let g = Graph::from_edges(Mode::Directed, 3, [(0, 1), (1, 2)]).unwrap();
        let r = score_all(&g, Scorer::Cn, ScoreOptions::default()).unwrap();
        let pairs: Vec<_> = r.entries.iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(pairs, vec![(0, 2), (2, 0)]);

        // Reciprocal candidate excluded only in the direction that exists.
        let g = Graph::from_edges(Mode::Directed, 3, [(0, 1), (1, 2), (2, 0)]).unwrap();
        let r = score_all(&g, Scorer::Cn, ScoreOptions::default()).unwrap();
        let pairs: Vec<_> = r.entries.iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(pairs, vec![(0, 2), (1, 0), (2, 1)]);
    }

    #[test]
    fn candidate_budget_enforced() {
        let g = undirected(4, &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(estimate_candidates(&g), 3);
        let err = score_all(&g, Scorer::Cn, ScoreOptions { max_candidates: 2 }).unwrap_err();
        assert!(matches!(err, Error::CandidateBudget { estimated: 3, budget: 2 }));
    }

    #[test]
    fn streaming_blocks_match_ranking() {
        let g = undirected(
            8,
            &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 0), (1, 5)],
        );
        for s in Scorer::ALL {
            let r = score_all(&g, s, ScoreOptions::default()).unwrap();
            let label = |u: u32, v: u32| (u + v) % 3 == 0;
            let blocks = score_blocks(&g, s, label).unwrap();
            let expected: Vec<BlockCounts> = r
                .tie_blocks()
                .map(|b| {
                    let p = b.iter().filter(|e| label(e.u, e.v)).count() as u64;
                    BlockCounts {
                        score: b[0].score,
                        positives: p,
                        negatives: b.len() as u64 - p,
                    }
                })
                .collect();
            assert_eq!(blocks, expected);
        }
    }

    #[test]
    fn csv_and_sidecar() {
        let g = undirected(4, &[(0, 1), (0, 2), (0, 3)]);
        let r = score_all(&g, Scorer::Ra, ScoreOptions::default()).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("u,v,score"));
        assert_eq!(text.lines().nth(1), Some("1,2,0.3333333333333333"));
        let side = r.sidecar();
        assert_eq!((side.candidate_count, side.tie_block_count), (3, 1));
        let json = serde_json::to_string(&side).unwrap();
        assert!(json.contains("\"scorer\":\"ra\"") && json.contains("\"two_hop\""));
    }
}
