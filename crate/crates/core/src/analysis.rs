//! Connectivity and degree statistics of a realized graph.

use std::collections::BTreeMap;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::model::UndirectedGraph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub n: usize,
    pub edge_count: usize,
    pub degree_histogram: BTreeMap<usize, usize>,
    pub min_degree: usize,
    pub max_degree: usize,
    pub mean_degree: f64,
    pub isolated_count: usize,
    /// Sorted descending; the largest component comes first.
    pub component_sizes: Vec<usize>,
    pub is_connected: bool,
}

/// Sizes of the connected components, largest first.
pub fn component_sizes(graph: &UndirectedGraph) -> Vec<usize> {
    let n = graph.n();
    let mut uf = UnionFind::<u32>::new(n);
    for &(u, v) in graph.edges() {
        uf.union(u, v);
    }
    let mut size = vec![0usize; n];
    for v in 0..n as u32 {
        size[uf.find_mut(v) as usize] += 1;
    }
    let mut sizes: Vec<usize> = size.into_iter().filter(|&s| s > 0).collect();
    sizes.sort_unstable_by(|a, b| b.cmp(a));
    sizes
}

pub fn analyze(graph: &UndirectedGraph) -> AnalysisReport {
    let n = graph.n();
    let mut degree_histogram = BTreeMap::new();
    let (mut min_degree, mut max_degree) = (usize::MAX, 0);
    for v in 0..n {
        let d = graph.degree(v);
        *degree_histogram.entry(d).or_insert(0) += 1;
        min_degree = min_degree.min(d);
        max_degree = max_degree.max(d);
    }
    if n == 0 {
        min_degree = 0;
    }
    let component_sizes = component_sizes(graph);
    AnalysisReport {
        n,
        edge_count: graph.edge_count(),
        min_degree,
        max_degree,
        mean_degree: if n == 0 {
            0.0
        } else {
            2.0 * graph.edge_count() as f64 / n as f64
        },
        isolated_count: degree_histogram.get(&0).copied().unwrap_or(0),
        degree_histogram,
        is_connected: component_sizes.len() == 1,
        component_sizes,
    }
}

/// Whether some component has size in `lo..=hi`.
pub fn has_component_in_range(report: &AnalysisReport, lo: usize, hi: usize) -> bool {
    report.component_sizes.iter().any(|s| (lo..=hi).contains(s))
}

pub fn min_degree_at_most(report: &AnalysisReport, kappa: usize) -> bool {
    report.min_degree <= kappa
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::generate;
    use crate::model::{ModelParams, SeedSpec};

    fn path4() -> UndirectedGraph {
        UndirectedGraph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap()
    }

    #[test]
    fn empty_graph() {
        let r = analyze(&UndirectedGraph::empty(5));
        assert_eq!(r.isolated_count, 5);
        assert_eq!(r.component_sizes, vec![1; 5]);
        assert!(!r.is_connected);
        assert!(has_component_in_range(&r, 1, 1));
        assert!(min_degree_at_most(&r, 0));
    }

    #[test]
    fn path_graph() {
        let r = analyze(&path4());
        assert!(r.is_connected);
        assert_eq!(r.degree_histogram, BTreeMap::from([(1, 2), (2, 2)]));
        assert!(min_degree_at_most(&r, 1));
        assert_eq!(r.mean_degree, 1.5);
    }

    #[test]
    fn complete_graph_from_generator() {
        let p = ModelParams::bilateral(8, 7).unwrap();
        let r = analyze(&generate(&p, SeedSpec::new(1, 0)).unwrap());
        assert!(r.is_connected);
        assert_eq!(r.min_degree, 7);
        assert!(!has_component_in_range(&r, 1, 4));
        assert!(!min_degree_at_most(&r, 6));
    }

    #[test]
    fn component_range_gap() {
        let mut edges: Vec<(u32, u32)> = (0..8).map(|v| (v, v + 1)).collect();
        edges.push((0, 8));
        let g = UndirectedGraph::from_edges(10, edges).unwrap();
        let r = analyze(&g);
        assert_eq!(r.component_sizes, vec![9, 1]);
        assert!(!has_component_in_range(&r, 2, 8));
        assert!(has_component_in_range(&r, 9, 9));
    }

    #[test]
    fn json_field_names() {
        let v = serde_json::to_value(analyze(&path4())).unwrap();
        let keys: Vec<&str> = v.as_object().unwrap().keys().map(|s| s.as_str()).collect();
        for key in [
            "n",
            "edge_count",
            "degree_histogram",
            "min_degree",
            "max_degree",
            "mean_degree",
            "isolated_count",
            "component_sizes",
            "is_connected",
        ] {
            assert!(keys.contains(&key), "missing {key}");
        }
        assert_eq!(keys.len(), 9);
    }
}
