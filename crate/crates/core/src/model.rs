//! Shared domain types and the seeding policy.
//!
//! Vertices are `0..n`. A [`SeedSpec`] names one ChaCha8 stream; trials and
//! sweep cells get their own streams through [`derive_stream`].

use serde::{Deserialize, Serialize};

use crate::error::{ensure_param, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Bilateral,
    Unilateral,
    ErdosRenyi,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Bilateral => "bilateral",
            ModelKind::Unilateral => "unilateral",
            ModelKind::ErdosRenyi => "erdos_renyi",
        }
    }
}

/// One instance of a graph family: `(n, k)` for the preference models,
/// `(n, p)` for Erdős–Rényi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    n: usize,
    k: usize,
    kind: ModelKind,
    p: f64,
}

impl ModelParams {
    pub fn new(kind: ModelKind, n: usize, k: usize, p: f64) -> Result<Self> {
        ensure_param!(n >= 1, "n must be positive");
        ensure_param!(
            n <= u32::MAX as usize,
            "n = {n} exceeds the 32-bit vertex id range"
        );
        match kind {
            ModelKind::Bilateral | ModelKind::Unilateral => {
                ensure_param!(
                    k >= 1 && k < n,
                    "k must satisfy 1 <= k <= n-1 (got n = {n}, k = {k})"
                );
            }
            ModelKind::ErdosRenyi => {
                ensure_param!((0.0..=1.0).contains(&p), "p must lie in [0, 1] (got {p})");
            }
        }
        Ok(ModelParams { n, k, kind, p })
    }

    pub fn bilateral(n: usize, k: usize) -> Result<Self> {
        Self::new(ModelKind::Bilateral, n, k, 0.0)
    }

    pub fn unilateral(n: usize, k: usize) -> Result<Self> {
        Self::new(ModelKind::Unilateral, n, k, 0.0)
    }

    pub fn erdos_renyi(n: usize, p: f64) -> Result<Self> {
        Self::new(ModelKind::ErdosRenyi, n, 0, p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Preference budget; zero for Erdős–Rényi.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }

    /// Edge probability; only meaningful for Erdős–Rényi.
    pub fn p(&self) -> f64 {
        self.p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        SeedSpec {
            master_seed,
            stream_index,
        }
    }
}

// SplitMix64 finalizer; a bijection on u64.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child stream for `trial` under `seed`.
///
/// The result is `mix(mix(stream_index) + trial)`, so for a fixed parent it is
/// injective in `trial`.
pub fn derive_stream(seed: SeedSpec, trial: u64) -> SeedSpec {
    let base = mix64(seed.stream_index ^ 0x9e37_79b9_7f4a_7c15);
    SeedSpec {
        master_seed: seed.master_seed,
        stream_index: mix64(base.wrapping_add(trial)),
    }
}

/// Ordered top-k neighbour lists `R_i^1, ..., R_i^k` for every vertex,
/// most preferred first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopKSets {
    n: usize,
    k: usize,
    lists: Vec<u32>,
}

impl TopKSets {
    /// `lists` holds `n * k` ids, row `i` being vertex `i`'s list.
    pub fn from_lists(n: usize, k: usize, lists: Vec<u32>) -> Result<Self> {
        ensure_param!(k >= 1 && k < n, "need 1 <= k <= n-1");
        ensure_param!(lists.len() == n * k, "expected {} ids", n * k);
        for (i, row) in lists.chunks_exact(k).enumerate() {
            for (pos, &v) in row.iter().enumerate() {
                ensure_param!((v as usize) < n, "vertex {i}: id {v} out of range");
                ensure_param!(v as usize != i, "vertex {i} lists itself");
                ensure_param!(!row[..pos].contains(&v), "vertex {i}: duplicate id {v}");
            }
        }
        Ok(TopKSets { n, k, lists })
    }

    pub(crate) fn from_lists_unchecked(n: usize, k: usize, lists: Vec<u32>) -> Self {
        debug_assert_eq!(lists.len(), n * k);
        TopKSets { n, k, lists }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn list(&self, i: usize) -> &[u32] {
        &self.lists[i * self.k..(i + 1) * self.k]
    }

    /// Does `i` propose the edge to `j`?
    pub fn proposes(&self, i: usize, j: usize) -> bool {
        self.list(i).contains(&(j as u32))
    }

    /// 1-based rank of `j` in `i`'s list.
    pub fn rank_of(&self, i: usize, j: usize) -> Option<usize> {
        self.list(i)
            .iter()
            .position(|&v| v as usize == j)
            .map(|p| p + 1)
    }
}

/// Simple undirected graph with canonical `u < v` edges and CSR adjacency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    n: usize,
    edges: Vec<(u32, u32)>,
    offsets: Vec<usize>,
    adjacency: Vec<u32>,
}

impl UndirectedGraph {
    /// Builds the canonical form: endpoints ordered, sorted, deduplicated.
    /// Self-loops and out-of-range ids are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32)>,
    {
        let mut canon = Vec::new();
        for (u, v) in edges {
            ensure_param!(u != v, "self-loop at vertex {u}");
            ensure_param!(
                (u as usize) < n && (v as usize) < n,
                "edge ({u}, {v}) out of range for n = {n}"
            );
            canon.push(if u < v { (u, v) } else { (v, u) });
        }
        canon.sort_unstable();
        canon.dedup();
        Ok(Self::from_canonical(n, canon))
    }

    pub(crate) fn from_canonical(n: usize, edges: Vec<(u32, u32)>) -> Self {
        let mut degree = vec![0usize; n];
        for &(u, v) in &edges {
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut adjacency = vec![0u32; offsets[n]];
        for &(u, v) in &edges {
            adjacency[fill[u as usize]] = v;
            fill[u as usize] += 1;
            adjacency[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        UndirectedGraph {
            n,
            edges,
            offsets,
            adjacency,
        }
    }

    pub fn empty(n: usize) -> Self {
        Self::from_canonical(n, Vec::new())
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n as u32)
            .flat_map(|u| (u + 1..n as u32).map(move |v| (u, v)))
            .collect();
        Self::from_canonical(n, edges)
    }

    pub fn canonicalize(&self) -> Self {
        Self::from_edges(self.n, self.edges.iter().copied())
            .expect("graph already satisfies the edge invariants")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adjacency[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        let key = if u < v { (u, v) } else { (v, u) };
        self.edges.binary_search(&key).is_ok()
    }

    /// True when every edge of `self` is also an edge of `other`.
    pub fn is_subgraph_of(&self, other: &UndirectedGraph) -> bool {
        self.n == other.n && self.edges.iter().all(|&(u, v)| other.has_edge(u, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn params_validation() {
        assert!(ModelParams::bilateral(5, 0).is_err());
        assert!(ModelParams::bilateral(5, 5).is_err());
        assert!(ModelParams::unilateral(5, 7).is_err());
        assert!(ModelParams::bilateral(2, 1).is_ok());
        assert!(ModelParams::erdos_renyi(10, 1.5).is_err());
        assert!(ModelParams::erdos_renyi(10, -0.1).is_err());
        assert!(ModelParams::erdos_renyi(10, f64::NAN).is_err());
        assert!(ModelParams::erdos_renyi(10, 1.0).is_ok());
        assert!(ModelParams::erdos_renyi(0, 0.5).is_err());
    }

    #[test]
    fn derive_stream_is_deterministic_and_injective() {
        let s = SeedSpec::new(7, 0);
        assert_eq!(derive_stream(s, 0), derive_stream(s, 0));
        assert_ne!(derive_stream(s, 1), derive_stream(s, 2));
        assert_eq!(derive_stream(s, 3).master_seed, 7);
    }

    #[test]
    fn ten_thousand_streams_are_distinct() {
        let s = SeedSpec::new(7, 0);
        let set: HashSet<u64> = (0..10_000)
            .map(|t| derive_stream(s, t).stream_index)
            .collect();
        assert_eq!(set.len(), 10_000);
    }

    #[test]
    fn graph_rejects_bad_edges() {
        assert!(UndirectedGraph::from_edges(3, [(1, 1)]).is_err());
        assert!(UndirectedGraph::from_edges(3, [(0, 3)]).is_err());
        let g = UndirectedGraph::from_edges(3, [(2, 0), (0, 2), (1, 2)]).unwrap();
        assert_eq!(g.edges(), &[(0, 2), (1, 2)]);
        assert_eq!(g.degree(2), 2);
        assert!(g.has_edge(2, 1));
        assert!(!g.has_edge(0, 1));
    }

    #[test]
    fn complete_graph_edge_count() {
        assert_eq!(UndirectedGraph::complete(8).edge_count(), 28);
    }

    #[test]
    fn top_k_validation() {
        assert!(TopKSets::from_lists(3, 1, vec![1, 0, 0]).is_ok());
        assert!(TopKSets::from_lists(3, 1, vec![0, 0, 0]).is_err());
        assert!(TopKSets::from_lists(3, 2, vec![1, 1, 0, 2, 0, 1]).is_err());
        let t = TopKSets::from_lists(3, 2, vec![1, 2, 2, 0, 0, 1]).unwrap();
        assert_eq!(t.rank_of(1, 0), Some(2));
        assert!(t.proposes(2, 1));
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(
            n in 2usize..20,
            raw in proptest::collection::vec((0u32..20, 0u32..20), 0..60),
        ) {
            let edges: Vec<_> = raw
                .into_iter()
                .map(|(a, b)| (a % n as u32, b % n as u32))
                .filter(|(a, b)| a != b)
                .collect();
            let g = UndirectedGraph::from_edges(n, edges).unwrap();
            let once = g.canonicalize();
            prop_assert_eq!(&once, &g);
            prop_assert_eq!(once.canonicalize(), once.clone());
            let handshake: usize = (0..n).map(|v| once.degree(v)).sum();
            prop_assert_eq!(handshake, 2 * once.edge_count());
            for v in 0..n {
                for &u in once.neighbors(v) {
                    prop_assert!(once.neighbors(u as usize).contains(&(v as u32)));
                }
            }
        }
    }
}
