//! Graph generators.
//!
//! Edge scores come from a ChaCha8 stream selected by the [`SeedSpec`]: the
//! unordered edge with row-major id `e` (pairs `i < j` enumerated by `i`, then
//! `j`) takes the `e`-th 64-bit word. The streaming generator walks the edges
//! in that order and feeds each score to the bounded heaps of both endpoints,
//! so it never stores more than `n * k` candidates. The oracle generator
//! materializes every score and sorts, and must agree with it exactly.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure_param, Result};
use crate::model::{ModelKind, ModelParams, SeedSpec, TopKSets, UndirectedGraph};

/// Largest `n` the materializing oracle accepts.
pub const ORACLE_MAX_N: usize = 2000;

const SCORE_BITS: u32 = 53;

/// Row-major id of the unordered edge `{i, j}`.
pub fn edge_id(n: usize, i: usize, j: usize) -> u64 {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    debug_assert!(j < n);
    let (n, i, j) = (n as u64, i as u64, j as u64);
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Counter-addressed edge scores for one [`SeedSpec`].
pub struct ScoreStream {
    rng: ChaCha8Rng,
}

impl ScoreStream {
    pub fn new(seed: SeedSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.master_seed);
        rng.set_stream(seed.stream_index);
        ScoreStream { rng }
    }

    /// Raw 53-bit score of the next edge in row-major order.
    #[inline]
    pub fn next_raw(&mut self) -> u64 {
        self.rng.next_u64() >> (64 - SCORE_BITS)
    }

    /// Raw score of edge `id`, independent of the current position.
    pub fn raw_at(&mut self, id: u64) -> u64 {
        self.rng.set_word_pos(2 * id as u128);
        self.next_raw()
    }

    /// Next score as a float on the open interval (0, 1).
    #[inline]
    pub fn next_unit(&mut self) -> f64 {
        raw_to_unit(self.next_raw())
    }
}

/// Maps a raw score to the open unit interval. Order is preserved weakly: the
/// low bit is dropped so that the midpoint stays exactly representable.
pub fn raw_to_unit(raw: u64) -> f64 {
    ((raw >> 1) as f64 + 0.5) / (1u64 << (SCORE_BITS - 1)) as f64
}

/// Exponential(1) score with the same order as the raw score.
pub fn raw_to_exponential(raw: u64) -> f64 {
    -(-raw_to_unit(raw)).ln_1p()
}

/// Total order on edges: score first, canonical edge id as tie-break.
/// Always nonzero, so zero can stand for "no candidate yet".
#[inline]
pub fn edge_key(raw: u64, id: u64) -> u128 {
    (((raw + 1) as u128) << 64) | id as u128
}

/// Raw score recovered from an [`edge_key`].
pub fn key_raw(key: u128) -> u64 {
    ((key >> 64) as u64) - 1
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Candidate {
    key: u128,
    vertex: u32,
}

/// Per-vertex bounded min-heaps holding the `k` best candidates seen so far.
struct Selector {
    k: usize,
    heaps: Vec<BinaryHeap<Reverse<Candidate>>>,
    // key of the weakest kept candidate once the heap is full, else 0
    floor: Vec<u128>,
}

impl Selector {
    fn new(n: usize, k: usize) -> Self {
        Selector {
            k,
            heaps: (0..n).map(|_| BinaryHeap::with_capacity(k + 1)).collect(),
            floor: vec![0; n],
        }
    }

    #[inline]
    fn offer(&mut self, owner: usize, key: u128, vertex: u32) {
        if key <= self.floor[owner] {
            return;
        }
        let heap = &mut self.heaps[owner];
        let cand = Reverse(Candidate { key, vertex });
        if heap.len() < self.k {
            heap.push(cand);
            if heap.len() < self.k {
                return;
            }
        } else {
            *heap.peek_mut().expect("full heap") = cand;
        }
        self.floor[owner] = heap.peek().expect("full heap").0.key;
    }

    fn run(n: usize, k: usize, seed: SeedSpec) -> Self {
        let mut sel = Selector::new(n, k);
        let mut scores = ScoreStream::new(seed);
        let mut id = 0u64;
        for i in 0..n {
            for j in i + 1..n {
                let key = edge_key(scores.next_raw(), id);
                sel.offer(i, key, j as u32);
                sel.offer(j, key, i as u32);
                id += 1;
            }
        }
        sel
    }

    fn into_top_k(self, n: usize) -> TopKSets {
        let k = self.k;
        let mut lists = Vec::with_capacity(n * k);
        for heap in self.heaps {
            // ascending by Reverse == descending by key
            lists.extend(heap.into_sorted_vec().into_iter().map(|c| c.0.vertex));
        }
        TopKSets::from_lists_unchecked(n, k, lists)
    }
}

fn require_preference_model(params: &ModelParams) -> Result<()> {
    ensure_param!(
        params.kind() != ModelKind::ErdosRenyi,
        "top-k sets need a bilateral or unilateral model"
    );
    Ok(())
}

/// Streaming top-k selection: `O(n k)` memory, `O(n^2 log k)` time.
pub fn top_k_sets(params: &ModelParams, seed: SeedSpec) -> Result<TopKSets> {
    require_preference_model(params)?;
    Ok(Selector::run(params.n(), params.k(), seed).into_top_k(params.n()))
}

/// Key of each vertex's `k`-th most preferred edge, `V(i, R_i^k)` in key form.
pub fn kth_keys(n: usize, k: usize, seed: SeedSpec) -> Result<Vec<u128>> {
    ModelParams::bilateral(n, k)?;
    Ok(Selector::run(n, k, seed).floor)
}

/// Reference selection: materialize all `C(n, 2)` scores and sort per vertex.
pub fn top_k_sets_oracle(params: &ModelParams, seed: SeedSpec) -> Result<TopKSets> {
    require_preference_model(params)?;
    let (n, k) = (params.n(), params.k());
    ensure_param!(
        n <= ORACLE_MAX_N,
        "oracle generator limited to n <= {ORACLE_MAX_N}"
    );
    let mut scores = ScoreStream::new(seed);
    let total = n * (n - 1) / 2;
    let raw: Vec<u64> = (0..total).map(|_| scores.next_raw()).collect();
    let mut lists = Vec::with_capacity(n * k);
    let mut row = Vec::with_capacity(n - 1);
    for i in 0..n {
        row.clear();
        for j in (0..n).filter(|&j| j != i) {
            let id = edge_id(n, i, j);
            row.push((edge_key(raw[id as usize], id), j as u32));
        }
        row.sort_unstable_by(|a, b| b.cmp(a));
        lists.extend(row[..k].iter().map(|&(_, v)| v));
    }
    TopKSets::from_lists(n, k, lists)
}

/// Mutual proposals only.
pub fn bilateral_from_top_k(sets: &TopKSets) -> UndirectedGraph {
    let mut edges = Vec::new();
    for i in 0..sets.n() {
        for &j in sets.list(i) {
            if (j as usize) > i && sets.proposes(j as usize, i) {
                edges.push((i as u32, j));
            }
        }
    }
    edges.sort_unstable();
    UndirectedGraph::from_canonical(sets.n(), edges)
}

/// Any proposal.
pub fn unilateral_from_top_k(sets: &TopKSets) -> UndirectedGraph {
    let mut edges = Vec::with_capacity(sets.n() * sets.k());
    for i in 0..sets.n() {
        for &j in sets.list(i) {
            let j = j as usize;
            if j > i || !sets.proposes(j, i) {
                edges.push(((i.min(j)) as u32, (i.max(j)) as u32));
            }
        }
    }
    edges.sort_unstable();
    UndirectedGraph::from_canonical(sets.n(), edges)
}

/// Builds the graph of a preference model from already selected top-k sets.
pub fn graph_from_top_k(kind: ModelKind, sets: &TopKSets) -> Result<UndirectedGraph> {
    match kind {
        ModelKind::Bilateral => Ok(bilateral_from_top_k(sets)),
        ModelKind::Unilateral => Ok(unilateral_from_top_k(sets)),
        ModelKind::ErdosRenyi => Err(crate::Error::param(
            "Erdős–Rényi graphs are not built from top-k sets",
        )),
    }
}

pub fn generate_bilateral(params: &ModelParams, seed: SeedSpec) -> Result<UndirectedGraph> {
    ensure_param!(
        params.kind() == ModelKind::Bilateral,
        "expected a bilateral model"
    );
    Ok(bilateral_from_top_k(&top_k_sets(params, seed)?))
}

pub fn generate_unilateral(params: &ModelParams, seed: SeedSpec) -> Result<UndirectedGraph> {
    ensure_param!(
        params.kind() == ModelKind::Unilateral,
        "expected a unilateral model"
    );
    Ok(unilateral_from_top_k(&top_k_sets(params, seed)?))
}

/// Each pair kept independently when its uniform score falls below `p`.
pub fn generate_er(params: &ModelParams, seed: SeedSpec) -> Result<UndirectedGraph> {
    ensure_param!(
        params.kind() == ModelKind::ErdosRenyi,
        "expected an Erdős–Rényi model"
    );
    let (n, p) = (params.n(), params.p());
    let mut scores = ScoreStream::new(seed);
    let mut edges = Vec::new();
    for i in 0..n as u32 {
        for j in i + 1..n as u32 {
            if scores.next_unit() < p {
                edges.push((i, j));
            }
        }
    }
    Ok(UndirectedGraph::from_canonical(n, edges))
}

/// Dispatches on the model kind.
pub fn generate(params: &ModelParams, seed: SeedSpec) -> Result<UndirectedGraph> {
    match params.kind() {
        ModelKind::Bilateral => generate_bilateral(params, seed),
        ModelKind::Unilateral => generate_unilateral(params, seed),
        ModelKind::ErdosRenyi => generate_er(params, seed),
    }
}

/// Same as [`generate`] but through the materializing oracle.
pub fn generate_oracle(params: &ModelParams, seed: SeedSpec) -> Result<UndirectedGraph> {
    match params.kind() {
        ModelKind::ErdosRenyi => generate_er(params, seed),
        kind => graph_from_top_k(kind, &top_k_sets_oracle(params, seed)?),
    }
}
