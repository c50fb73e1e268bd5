//! Compact read-only graphs in CSR form, edge-list ingestion, and
//! class-imbalance arithmetic for the link-prediction candidate space.
//!
//! Vertex ids are dense `u32`s. A [`Graph`] never contains self-loops or
//! duplicate edges, and every neighbor list is sorted ascending. In directed
//! mode the structure keeps out-neighbors, in-neighbors, and their union
//! (the symmetrized neighborhood used by the scorers).

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Directed,
    Undirected,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Directed => "directed",
            Mode::Undirected => "undirected",
        }
    }

    /// Number of candidate vertex pairs on `n` vertices, self-pairs excluded.
    pub fn possible_pairs(self, n: u64) -> u64 {
        match self {
            Mode::Directed => n * n.saturating_sub(1),
            Mode::Undirected => n * n.saturating_sub(1) / 2,
        }
    }

    /// Canonical key for a pair: ordered in directed mode, `(min, max)` otherwise.
    #[inline]
    pub fn canonical(self, u: VertexId, v: VertexId) -> (VertexId, VertexId) {
        match self {
            Mode::Directed => (u, v),
            Mode::Undirected => (u.min(v), u.max(v)),
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "directed" => Ok(Mode::Directed),
            "undirected" => Ok(Mode::Undirected),
            other => Err(Error::Parameter(format!("unknown graph mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
}

impl Csr {
    /// Builds from `(source, target)` pairs; per-vertex lists come out sorted.
    fn from_pairs(n: usize, pairs: &[(VertexId, VertexId)]) -> Csr {
        let mut offsets = vec![0usize; n + 1];
        for &(s, _) in pairs {
            offsets[s as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets[..n].to_vec();
        let mut targets = vec![0; pairs.len()];
        for &(s, t) in pairs {
            targets[cursor[s as usize]] = t;
            cursor[s as usize] += 1;
        }
        for v in 0..n {
            targets[offsets[v]..offsets[v + 1]].sort_unstable();
        }
        Csr { offsets, targets }
    }

    #[inline]
    fn slice(&self, v: usize) -> &[VertexId] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }
}

/// Immutable adjacency structure. Cheap to share across threads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    mode: Mode,
    edge_count: u64,
    out: Csr,
    // directed only
    inn: Option<Csr>,
    sym: Option<Csr>,
}

impl Graph {
    /// Builds a graph on `vertex_count` vertices. Self-loops are skipped and
    /// duplicates collapsed (in undirected mode `(u, v)` and `(v, u)` are the
    /// same edge).
    pub fn from_edges<I>(mode: Mode, vertex_count: usize, edges: I) -> Result<Graph>
    where
        I: IntoIterator<Item = (VertexId, VertexId)>,
    {
        if vertex_count > VertexId::MAX as usize {
            return Err(Error::Parameter(format!(
                "vertex_count {vertex_count} exceeds the 32-bit id space"
            )));
        }
        let mut list = Vec::new();
        for (u, v) in edges {
            for x in [u, v] {
                if x as usize >= vertex_count {
                    return Err(Error::VertexOutOfRange {
                        vertex: x as u64,
                        vertex_count,
                    });
                }
            }
            if u != v {
                list.push(mode.canonical(u, v));
            }
        }
        list.sort_unstable();
        list.dedup();
        Ok(Graph::from_canonical_sorted(mode, vertex_count, &list))
    }

    /// `edges` must be canonical, sorted, deduplicated, self-loop free and in range.
    pub(crate) fn from_canonical_sorted(
        mode: Mode,
        vertex_count: usize,
        edges: &[(VertexId, VertexId)],
    ) -> Graph {
        let edge_count = edges.len() as u64;
        match mode {
            Mode::Directed => {
                let out = Csr::from_pairs(vertex_count, edges);
                let reversed: Vec<_> = edges.iter().map(|&(u, v)| (v, u)).collect();
                let inn = Csr::from_pairs(vertex_count, &reversed);
                let mut both: Vec<_> = edges.iter().copied().chain(reversed).collect();
                both.sort_unstable();
                both.dedup();
                let sym = Csr::from_pairs(vertex_count, &both);
                Graph {
                    vertex_count,
                    mode,
                    edge_count,
                    out,
                    inn: Some(inn),
                    sym: Some(sym),
                }
            }
            Mode::Undirected => {
                let mut both = Vec::with_capacity(edges.len() * 2);
                for &(u, v) in edges {
                    both.push((u, v));
                    both.push((v, u));
                }
                let out = Csr::from_pairs(vertex_count, &both);
                Graph {
                    vertex_count,
                    mode,
                    edge_count,
                    out,
                    inn: None,
                    sym: None,
                }
            }
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Distinct edges; unordered pairs in undirected mode.
    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    pub fn is_empty(&self) -> bool {
        self.vertex_count == 0
    }

    fn check(&self, v: VertexId) -> Result<usize> {
        let i = v as usize;
        if i < self.vertex_count {
            Ok(i)
        } else {
            Err(Error::VertexOutOfRange {
                vertex: v as u64,
                vertex_count: self.vertex_count,
            })
        }
    }

    /// Sorted out-neighbors of `v` (all neighbors in undirected mode).
    pub fn neighbors(&self, v: VertexId) -> Result<&[VertexId]> {
        let i = self.check(v)?;
        Ok(self.out.slice(i))
    }

    /// Sorted in-neighbors; equal to [`Graph::neighbors`] in undirected mode.
    pub fn in_neighbors(&self, v: VertexId) -> Result<&[VertexId]> {
        let i = self.check(v)?;
        Ok(self.inn.as_ref().unwrap_or(&self.out).slice(i))
    }

    /// Sorted union of in- and out-neighbors.
    pub fn undirected_neighbors(&self, v: VertexId) -> Result<&[VertexId]> {
        let i = self.check(v)?;
        Ok(self.sym_slice(i))
    }

    #[inline]
    pub(crate) fn out_slice(&self, v: usize) -> &[VertexId] {
        self.out.slice(v)
    }

    #[inline]
    pub(crate) fn sym_slice(&self, v: usize) -> &[VertexId] {
        self.sym.as_ref().unwrap_or(&self.out).slice(v)
    }

    pub fn out_degree(&self, v: VertexId) -> Result<usize> {
        Ok(self.neighbors(v)?.len())
    }

    /// Total stored out-neighbor entries (twice the edge count when undirected).
    pub fn neighbor_entries(&self) -> usize {
        self.out.targets.len()
    }

    /// Whether the edge `u -> v` exists (either orientation when undirected).
    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        (u as usize) < self.vertex_count && self.out_slice(u as usize).binary_search(&v).is_ok()
    }

    /// Edges in canonical order: lexicographic, `u < v` when undirected.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        let undirected = self.mode == Mode::Undirected;
        (0..self.vertex_count).flat_map(move |u| {
            let u32_ = u as VertexId;
            self.out_slice(u)
                .iter()
                .copied()
                .filter(move |&v| !undirected || v > u32_)
                .map(move |v| (u32_, v))
        })
    }

    /// Writes the canonical edge list, preceded by a `# vertices: N` comment
    /// so isolated trailing vertices survive a reload.
    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# vertices: {}", self.vertex_count)?;
        for (u, v) in self.edges() {
            writeln!(w, "{u} {v}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn class_imbalance(&self, test_fraction: f64) -> Result<ImbalanceReport> {
        ImbalanceReport::from_counts(
            self.mode,
            self.vertex_count as u64,
            self.edge_count,
            test_fraction,
        )
    }

    /// Number of misclassified negatives at a given false-positive rate.
    pub fn error_magnitude_at_fpr(&self, fpr: f64) -> Result<u64> {
        let negatives = self
            .mode
            .possible_pairs(self.vertex_count as u64)
            .saturating_sub(self.edge_count);
        error_magnitude(negatives, fpr)
    }
}

pub fn error_magnitude(negatives: u64, fpr: f64) -> Result<u64> {
    if !(0.0..=1.0).contains(&fpr) {
        return Err(Error::Parameter(format!("fpr {fpr} outside [0, 1]")));
    }
    Ok((fpr * negatives as f64).round() as u64)
}

/// Number of edges held out for a test fraction. Rounds down, with a
/// relative slack so that e.g. `0.29 * 100` counts 29, not 28.
pub fn held_out_count(edge_count: u64, fraction: f64) -> u64 {
    let raw = fraction * edge_count as f64;
    (raw * (1.0 + 1e-12)).floor().min(edge_count as f64) as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImbalanceReport {
    pub mode: Mode,
    pub possible_edges: u64,
    pub positives: u64,
    pub negatives: u64,
    /// Negatives per positive of the evaluated problem: per test positive
    /// when a test fraction was supplied, per edge otherwise.
    pub ratio: f64,
    pub test_positives: Option<u64>,
}

impl ImbalanceReport {
    pub fn from_counts(
        mode: Mode,
        vertex_count: u64,
        edge_count: u64,
        test_fraction: f64,
    ) -> Result<ImbalanceReport> {
        if !(0.0..=1.0).contains(&test_fraction) {
            return Err(Error::Parameter(format!(
                "test fraction {test_fraction} outside [0, 1]"
            )));
        }
        if edge_count == 0 {
            return Err(Error::UndefinedRatio);
        }
        let possible_edges = mode.possible_pairs(vertex_count);
        if edge_count > possible_edges {
            return Err(Error::Parameter(format!(
                "{edge_count} edges exceed the {possible_edges} possible pairs"
            )));
        }
        let negatives = possible_edges - edge_count;
        let (ratio, test_positives) = if test_fraction > 0.0 {
            let tp = held_out_count(edge_count, test_fraction);
            if tp == 0 {
                return Err(Error::UndefinedRatio);
            }
            (negatives as f64 / tp as f64, Some(tp))
        } else {
            (negatives as f64 / edge_count as f64, None)
        };
        Ok(ImbalanceReport {
            mode,
            possible_edges,
            positives: edge_count,
            negatives,
            ratio,
            test_positives,
        })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LoadStats {
    pub lines: usize,
    pub self_loops_dropped: usize,
}

/// Parses a whitespace-separated `u v` edge list. `#` lines are comments;
/// a `# vertices: N` comment raises the vertex count to at least `N`.
pub fn load_edge_list<R: BufRead>(reader: R, mode: Mode) -> Result<(Graph, LoadStats)> {
    let mut stats = LoadStats::default();
    let mut edges = Vec::new();
    let mut declared = 0usize;
    let mut max_id: Option<u32> = None;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(n) = parse_vertex_directive(comment) {
                declared = declared.max(n);
            }
            continue;
        }
        stats.lines += 1;
        let mut tokens = trimmed.split_whitespace();
        let u = parse_id(tokens.next(), lineno)?;
        let v = parse_id(tokens.next(), lineno)?;
        if tokens.next().is_some() {
            return Err(Error::Parse {
                line: lineno,
                message: "expected exactly two vertex ids".into(),
            });
        }
        max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
        if u == v {
            stats.self_loops_dropped += 1;
            continue;
        }
        edges.push((u, v));
    }
    if stats.self_loops_dropped > 0 {
        log::warn!("dropped {} self-loop line(s)", stats.self_loops_dropped);
    }
    let n = declared.max(max_id.map_or(0, |m| m as usize + 1));
    Ok((Graph::from_edges(mode, n, edges)?, stats))
}

/// Like [`load_edge_list`], but vertices are arbitrary string labels mapped
/// to dense ids in order of first appearance. Returns the id → label table.
pub fn load_labeled_edge_list<R: BufRead>(
    reader: R,
    mode: Mode,
) -> Result<(Graph, LoadStats, Vec<String>)> {
    let mut stats = LoadStats::default();
    let mut ids: HashMap<String, VertexId> = HashMap::new();
    let mut labels = Vec::new();
    let mut edges = Vec::new();
    let mut intern = |s: &str| -> VertexId {
        if let Some(&id) = ids.get(s) {
            return id;
        }
        let id = labels.len() as VertexId;
        labels.push(s.to_owned());
        ids.insert(s.to_owned(), id);
        id
    };
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        stats.lines += 1;
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 2 {
            return Err(Error::Parse {
                line: idx + 1,
                message: "expected exactly two vertex labels".into(),
            });
        }
        let (u, v) = (intern(tokens[0]), intern(tokens[1]));
        if u == v {
            stats.self_loops_dropped += 1;
            continue;
        }
        edges.push((u, v));
    }
    if stats.self_loops_dropped > 0 {
        log::warn!("dropped {} self-loop line(s)", stats.self_loops_dropped);
    }
    let graph = Graph::from_edges(mode, labels.len(), edges)?;
    Ok((graph, stats, labels))
}

fn parse_vertex_directive(comment: &str) -> Option<usize> {
    comment
        .trim()
        .strip_prefix("vertices:")
        .and_then(|rest| rest.trim().parse().ok())
}

fn parse_id(token: Option<&str>, line: usize) -> Result<VertexId> {
    let token = token.ok_or_else(|| Error::Parse {
        line,
        message: "expected two vertex ids".into(),
    })?;
    token.parse::<VertexId>().map_err(|_| Error::Parse {
        line,
        message: format!("invalid vertex id {token:?}"),
    })
}
