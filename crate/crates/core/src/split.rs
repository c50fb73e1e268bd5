//! Seeded train/test splits of a graph's edge set.
//!
//! The sampler is pinned: ChaCha8 seeded through `SeedableRng::seed_from_u64`,
//! bounded draws by Lemire's multiply-and-reject on `next_u64`, and a partial
//! Fisher–Yates shuffle over the canonical edge order. Changing any of these
//! changes every split ever produced, so they must stay fixed.

use std::collections::HashSet;
use std::io::Write;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{held_out_count, Graph, Mode, VertexId};

pub const PRNG_NAME: &str = "chacha8/seed_from_u64";

#[inline]
pub(crate) fn pair_key(u: VertexId, v: VertexId) -> u64 {
    ((u as u64) << 32) | v as u64
}

/// Uniform integer in `0..bound` (`bound > 0`).
pub(crate) fn uniform_below(rng: &mut ChaCha8Rng, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let m = (rng.next_u64() as u128) * (bound as u128);
        if (m as u64) >= threshold {
            return (m >> 64) as u64;
        }
    }
}

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone)]
pub struct EdgeSplit {
    pub train: Graph,
    /// Held-out edges in canonical order.
    pub test: Vec<(VertexId, VertexId)>,
    pub seed: u64,
    pub fraction: f64,
    pub original_edge_count: u64,
    test_keys: HashSet<u64>,
}

impl EdgeSplit {
    pub fn mode(&self) -> Mode {
        self.train.mode()
    }

    pub fn test_len(&self) -> usize {
        self.test.len()
    }

    /// Whether `(u, v)` is a held-out positive (orientation-free when undirected).
    #[inline]
    pub fn is_test(&self, u: VertexId, v: VertexId) -> bool {
        let (a, b) = self.mode().canonical(u, v);
        self.test_keys.contains(&pair_key(a, b))
    }

    /// Negatives of the full candidate universe: all pairs minus the
    /// pre-split edge set.
    pub fn total_negatives(&self) -> u64 {
        self.mode()
            .possible_pairs(self.train.vertex_count() as u64)
            .saturating_sub(self.original_edge_count)
    }

    /// Recombines train and test into the original edge set.
    pub fn reconstruct(&self) -> Result<Graph> {
        Graph::from_edges(
            self.mode(),
            self.train.vertex_count(),
            self.train.edges().chain(self.test.iter().copied()),
        )
    }

    pub fn write_test_edges<W: Write>(&self, mut w: W) -> Result<()> {
        for &(u, v) in &self.test {
            writeln!(w, "{u} {v}")?;
        }
        w.flush()?;
        Ok(())
    }

    /// SHA-256 over the canonical train and test edge lists.
    pub fn checksum(&self) -> String {
        let mut h = Sha256::new();
        let mut buf = Vec::new();
        self.train.write_edge_list(&mut buf).expect("write to Vec");
        h.update(&buf);
        h.update(b"--test--\n");
        buf.clear();
        self.write_test_edges(&mut buf).expect("write to Vec");
        h.update(&buf);
        hex::encode(h.finalize())
    }

    pub fn manifest(&self) -> SplitManifest {
        SplitManifest {
            prng: PRNG_NAME.to_owned(),
            seed: self.seed,
            fraction: self.fraction,
            mode: self.mode(),
            vertex_count: self.train.vertex_count(),
            original_edges: self.original_edge_count,
            train_edges: self.train.edge_count(),
            test_edges: self.test.len() as u64,
            checksum: self.checksum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub prng: String,
    pub seed: u64,
    pub fraction: f64,
    pub mode: Mode,
    pub vertex_count: usize,
    pub original_edges: u64,
    pub train_edges: u64,
    pub test_edges: u64,
    pub checksum: String,
}

impl EdgeSplit {
    /// Assembles a split from an explicit training graph and test edge list,
    /// e.g. one read back from disk. The original graph is `train ∪ test`.
    pub fn from_parts(train: Graph, test: Vec<(VertexId, VertexId)>, seed: u64) -> Result<EdgeSplit> {
        let mode = train.mode();
        let n = train.vertex_count();
        let mut canon = Vec::with_capacity(test.len());
        for (u, v) in test {
            for x in [u, v] {
                if x as usize >= n {
                    return Err(Error::VertexOutOfRange {
                        vertex: x as u64,
                        vertex_count: n,
                    });
                }
            }
            if u == v {
                return Err(Error::Consistency(format!("test edge ({u}, {u}) is a self-loop")));
            }
            if train.has_edge(u, v) {
                return Err(Error::Consistency(format!("test edge ({u}, {v}) is also a training edge")));
            }
            canon.push(mode.canonical(u, v));
        }
        canon.sort_unstable();
        canon.dedup();
        if canon.is_empty() {
            return Err(Error::DegenerateSplit("empty test set".into()));
        }
        let original_edge_count = train.edge_count() + canon.len() as u64;
        let test_keys = canon.iter().map(|&(u, v)| pair_key(u, v)).collect();
        Ok(EdgeSplit {
            fraction: canon.len() as f64 / original_edge_count as f64,
            train,
            test: canon,
            seed,
            original_edge_count,
            test_keys,
        })
    }
}

pub fn random_split(g: &Graph, fraction: f64, seed: u64) -> Result<EdgeSplit> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Parameter(format!("fraction {fraction} outside (0, 1)")));
    }
    let e = g.edge_count();
    if e == 0 {
        return Err(Error::DegenerateSplit("graph has no edges".into()));
    }
    let k = held_out_count(e, fraction);
    if k == 0 {
        return Err(Error::DegenerateSplit(format!(
            "fraction {fraction} of {e} edges holds out no test edge"
        )));
    }
    if k >= e {
        return Err(Error::DegenerateSplit(format!(
            "fraction {fraction} of {e} edges leaves an empty training graph"
        )));
    }

    let mut edges: Vec<(VertexId, VertexId)> = g.edges().collect();
    let mut rng = seeded_rng(seed);
    let k = k as usize;
    for i in 0..k {
        let j = i + uniform_below(&mut rng, (edges.len() - i) as u64) as usize;
        edges.swap(i, j);
    }
    let (held, rest) = edges.split_at_mut(k);
    held.sort_unstable();
    rest.sort_unstable();
    let train = Graph::from_canonical_sorted(g.mode(), g.vertex_count(), rest);
    let test = held.to_vec();
    let test_keys = test.iter().map(|&(u, v)| pair_key(u, v)).collect();
    Ok(EdgeSplit {
        train,
        test,
        seed,
        fraction,
        original_edge_count: e,
        test_keys,
    })
}

/// `k` splits seeded `base_seed, base_seed + 1, ...`, built in parallel.
pub fn k_random_splits(g: &Graph, fraction: f64, base_seed: u64, k: usize) -> Result<Vec<EdgeSplit>> {
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    (0..k as u64)
        .into_par_iter()
        .map(|i| random_split(g, fraction, base_seed.wrapping_add(i)))
        .collect()
}
