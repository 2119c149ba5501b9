//! Synthetic benchmark graphs with known explanation ground truth.
//!
//! Two families: a stochastic block model, where an intra-block edge is
//! explained by the other same-block edges and nodes in its neighbourhood,
//! and a Watts-Strogatz small world, where an edge is explained by the
//! triangles it closes. Both carry one-hot node identity features, so the
//! feature ground truth selects the columns of the relevant nodes.

use ndarray::Array2;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph, canonical, k_hop_subgraph, Edge, Graph};
use crate::rng::rng_from;

#[derive(Debug, Clone, PartialEq)]
pub struct SbmConfig {
    pub block_sizes: Vec<usize>,
    pub p_in: f64,
    pub p_out: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WsConfig {
    /// Number of nodes.
    pub n: usize,
    /// Ring-lattice degree; must be even and < n.
    pub k: usize,
    /// Rewiring probability.
    pub beta: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Sbm,
    WattsStrogatz,
}

/// A generated graph plus the side information needed for ground truth:
/// block labels (SBM) and the edges that carry no planted structure
/// (cross-block or rewired), which evaluation skips as targets.
#[derive(Debug, Clone)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub kind: GeneratorKind,
    pub labels: Option<Vec<usize>>,
    pub random_edges: Vec<Edge>,
}

/// Ground-truth explanation for one target edge, defined on its k-hop scope.
/// `edge_mask` aligns with `scope_edges`; `feature_mask` with feature columns.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub target: Edge,
    pub scope_nodes: Vec<usize>,
    pub scope_edges: Vec<Edge>,
    pub edge_mask: Vec<bool>,
    pub feature_mask: Vec<bool>,
}

impl GroundTruth {
    pub fn edge_positives(&self) -> usize {
        self.edge_mask.iter().filter(|&&b| b).count()
    }

    /// True when the edge mask has at least one negative, i.e. specificity
    /// is well defined for this target.
    pub fn has_edge_negatives(&self) -> bool {
        self.edge_mask.iter().any(|&b| !b)
    }
}

pub fn generate_sbm(cfg: &SbmConfig) -> Result<LabeledGraph> {
    if cfg.block_sizes.is_empty() || cfg.block_sizes.iter().any(|&s| s == 0) {
        return Err(Error::InvalidArgument(
            "block_sizes must be non-empty with positive entries".into(),
        ));
    }
    if !(cfg.p_out >= 0.0 && cfg.p_out < cfg.p_in && cfg.p_in <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "need 0 <= p_out < p_in <= 1, got p_in={} p_out={}",
            cfg.p_in, cfg.p_out
        )));
    }

    let n: usize = cfg.block_sizes.iter().sum();
    let mut labels = Vec::with_capacity(n);
    for (b, &size) in cfg.block_sizes.iter().enumerate() {
        labels.extend(std::iter::repeat(b).take(size));
    }

    let mut rng = rng_from(cfg.seed);
    let mut edges = Vec::new();
    let mut random_edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let intra = labels[u] == labels[v];
            let p = if intra { cfg.p_in } else { cfg.p_out };
            if p > 0.0 && rng.gen_bool(p) {
                edges.push((u, v));
                if !intra {
                    random_edges.push((u, v));
                }
            }
        }
    }

    let graph = build_graph(n, &edges, Array2::eye(n))?;
    Ok(LabeledGraph {
        graph,
        kind: GeneratorKind::Sbm,
        labels: Some(labels),
        random_edges,
    })
}

pub fn generate_ws(cfg: &WsConfig) -> Result<LabeledGraph> {
    if cfg.k == 0 || cfg.k % 2 != 0 || cfg.k >= cfg.n {
        return Err(Error::InvalidArgument(format!(
            "ring lattice needs even 0 < k < n, got n={} k={}",
            cfg.n, cfg.k
        )));
    }
    if !(0.0..=1.0).contains(&cfg.beta) {
        return Err(Error::InvalidArgument(format!(
            "beta must lie in [0, 1], got {}",
            cfg.beta
        )));
    }

    let n = cfg.n;
    let mut adj: Vec<std::collections::BTreeSet<usize>> = vec![Default::default(); n];
    let connect = |adj: &mut Vec<std::collections::BTreeSet<usize>>, u: usize, v: usize| {
        adj[u].insert(v);
        adj[v].insert(u);
    };
    for d in 1..=(cfg.k / 2) {
        for u in 0..n {
            connect(&mut adj, u, (u + d) % n);
        }
    }

    let mut rng = rng_from(cfg.seed);
    let mut rewired = Vec::new();
    // Visit each lattice edge once, in lattice order; with probability beta
    // replace its far endpoint by a uniformly chosen non-neighbor. A node
    // adjacent to everything else has no candidates and keeps its edge.
    for d in 1..=(cfg.k / 2) {
        for u in 0..n {
            let v = (u + d) % n;
            if cfg.beta > 0.0 && rng.gen_bool(cfg.beta) {
                if adj[u].len() >= n - 1 {
                    continue;
                }
                let w = loop {
                    let cand = rng.gen_range(0..n);
                    if cand != u && !adj[u].contains(&cand) {
                        break cand;
                    }
                };
                adj[u].remove(&v);
                adj[v].remove(&u);
                connect(&mut adj, u, w);
                rewired.push(canonical((u, w)));
            }
        }
    }

    let mut edges = Vec::new();
    for u in 0..n {
        for &v in &adj[u] {
            if u < v {
                edges.push((u, v));
            }
        }
    }
    rewired.sort_unstable();
    let graph = build_graph(n, &edges, Array2::eye(n))?;
    Ok(LabeledGraph {
        graph,
        kind: GeneratorKind::WattsStrogatz,
        labels: None,
        random_edges: rewired,
    })
}

/// Ground truth for an intra-block SBM edge: every same-block edge in the
/// scope matters, plus the identity columns of the same-block scope nodes.
pub fn ground_truth_sbm(lg: &LabeledGraph, target: Edge, hops: usize) -> Result<GroundTruth> {
    let labels = lg
        .labels
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("graph carries no block labels".into()))?;
    let (i, j) = canonical(target);
    if i >= labels.len() || j >= labels.len() {
        return Err(Error::InvalidArgument(format!(
            "target ({i}, {j}) outside the graph"
        )));
    }
    let block = labels[i];
    if labels[j] != block {
        return Err(Error::RefusedTarget(
            (i, j),
            "endpoints lie in different blocks".into(),
        ));
    }
    expect_identity_features(&lg.graph)?;

    let scope = k_hop_subgraph(&lg.graph, &[i, j], hops)?;
    let scope_edges = scope.edges_original();
    let edge_mask = scope_edges
        .iter()
        .map(|&(u, v)| labels[u] == block && labels[v] == block)
        .collect();
    let mut feature_mask = vec![false; lg.graph.num_features()];
    for &node in &scope.nodes {
        if labels[node] == block {
            feature_mask[node] = true;
        }
    }
    Ok(GroundTruth {
        target: (i, j),
        scope_nodes: scope.nodes,
        scope_edges,
        edge_mask,
        feature_mask,
    })
}

/// Ground truth for a Watts-Strogatz edge: the edges closing a triangle over
/// each common neighbour, plus the identity columns of the endpoints and the
/// common neighbours. Refused when the endpoints share no neighbour.
pub fn ground_truth_ws(lg: &LabeledGraph, target: Edge, hops: usize) -> Result<GroundTruth> {
    let (i, j) = canonical(target);
    if i >= lg.graph.num_nodes() || j >= lg.graph.num_nodes() {
        return Err(Error::InvalidArgument(format!(
            "target ({i}, {j}) outside the graph"
        )));
    }
    expect_identity_features(&lg.graph)?;
    let common = lg.graph.common_neighbors(i, j);
    if common.is_empty() {
        return Err(Error::RefusedTarget(
            (i, j),
            "endpoints share no common neighbour".into(),
        ));
    }

    let scope = k_hop_subgraph(&lg.graph, &[i, j], hops)?;
    let scope_edges = scope.edges_original();
    let mut closure = std::collections::HashSet::new();
    for &w in &common {
        closure.insert(canonical((i, w)));
        closure.insert(canonical((j, w)));
    }
    let edge_mask = scope_edges.iter().map(|e| closure.contains(e)).collect();
    let mut feature_mask = vec![false; lg.graph.num_features()];
    feature_mask[i] = true;
    feature_mask[j] = true;
    for &w in &common {
        feature_mask[w] = true;
    }
    Ok(GroundTruth {
        target: (i, j),
        scope_nodes: scope.nodes,
        scope_edges,
        edge_mask,
        feature_mask,
    })
}

fn expect_identity_features(g: &Graph) -> Result<()> {
    if g.num_features() != g.num_nodes() {
        return Err(Error::InvalidArgument(format!(
            "ground truth assumes one-hot identity features; graph has {} nodes but {} feature columns",
            g.num_nodes(),
            g.num_features()
        )));
    }
    Ok(())
}

impl LabeledGraph {
    /// Ground truth for `target` on its `hops`-hop scope, per generator kind.
    pub fn ground_truth(&self, target: Edge, hops: usize) -> Result<GroundTruth> {
        match self.kind {
            GeneratorKind::Sbm => ground_truth_sbm(self, target, hops),
            GeneratorKind::WattsStrogatz => ground_truth_ws(self, target, hops),
        }
    }

    /// Edges with no planted structure (cross-block / rewired); evaluation
    /// never uses them as targets.
    pub fn is_random_edge(&self, e: Edge) -> bool {
        self.random_edges.binary_search(&canonical(e)).is_ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn planted_partition_with_extreme_probabilities() {
        let lg = generate_sbm(&SbmConfig {
            block_sizes: vec![4, 4],
            p_in: 1.0,
            p_out: 0.0,
            seed: 3,
        })
        .unwrap();
        assert_eq!(lg.graph.num_edges(), 12); // two K4 cliques
        assert!(lg.random_edges.is_empty());
        assert_eq!(lg.labels.as_ref().unwrap()[3], 0);
        assert_eq!(lg.labels.as_ref().unwrap()[4], 1);
        assert_eq!(lg.graph.num_features(), 8);
    }

    #[test]
    fn sbm_densities_match_probabilities_within_3_sigma() {
        let lg = generate_sbm(&SbmConfig {
            block_sizes: vec![50, 50],
            p_in: 0.3,
            p_out: 0.02,
            seed: 11,
        })
        .unwrap();
        let labels = lg.labels.as_ref().unwrap();
        let (mut intra, mut inter) = (0usize, 0usize);
        for &(u, v) in lg.graph.edges() {
            if labels[u] == labels[v] {
                intra += 1;
            } else {
                inter += 1;
            }
        }
        let intra_pairs = 2.0 * (50.0 * 49.0 / 2.0);
        let inter_pairs = 50.0 * 50.0;
        let intra_density = intra as f64 / intra_pairs;
        let inter_density = inter as f64 / inter_pairs;
        let sigma_in = (0.3 * 0.7 / intra_pairs).sqrt();
        let sigma_out = (0.02 * 0.98 / inter_pairs).sqrt();
        assert!((intra_density - 0.3).abs() < 3.0 * sigma_in, "{intra_density}");
        assert!((inter_density - 0.02).abs() < 3.0 * sigma_out, "{inter_density}");
        assert_eq!(lg.random_edges.len(), inter);
    }

    #[test]
    fn sbm_rejects_bad_probabilities() {
        let bad = SbmConfig {
            block_sizes: vec![4],
            p_in: 0.2,
            p_out: 0.5,
            seed: 0,
        };
        assert!(generate_sbm(&bad).is_err());
        let empty = SbmConfig {
            block_sizes: vec![],
            p_in: 0.5,
            p_out: 0.0,
            seed: 0,
        };
        assert!(generate_sbm(&empty).is_err());
    }

    #[test]
    fn sbm_is_deterministic_per_seed() {
        let cfg = SbmConfig {
            block_sizes: vec![20, 20],
            p_in: 0.4,
            p_out: 0.05,
            seed: 9,
        };
        let a = generate_sbm(&cfg).unwrap();
        let b = generate_sbm(&cfg).unwrap();
        assert_eq!(a.graph.edges(), b.graph.edges());
        let c = generate_sbm(&SbmConfig { seed: 10, ..cfg }).unwrap();
        assert_ne!(a.graph.edges(), c.graph.edges());
    }

    #[test]
    fn unrewired_lattice_is_regular() {
        let lg = generate_ws(&WsConfig {
            n: 10,
            k: 4,
            beta: 0.0,
            seed: 0,
        })
        .unwrap();
        assert_eq!(lg.graph.num_edges(), 20);
        for u in 0..10 {
            assert_eq!(lg.graph.degree(u), 4);
        }
        assert!(lg.random_edges.is_empty());

        let ring = generate_ws(&WsConfig {
            n: 5,
            k: 2,
            beta: 0.0,
            seed: 0,
        })
        .unwrap();
        assert_eq!(
            ring.graph.edges(),
            &[(0, 1), (0, 4), (1, 2), (2, 3), (3, 4)]
        );
    }

    #[test]
    fn rewiring_preserves_edge_count() {
        for beta in [0.1, 0.5, 1.0] {
            let lg = generate_ws(&WsConfig {
                n: 10,
                k: 4,
                beta,
                seed: 21,
            })
            .unwrap();
            assert_eq!(lg.graph.num_edges(), 20, "beta={beta}");
        }
    }

    #[test]
    fn rewired_count_within_3_sigma_of_expectation() {
        let lg = generate_ws(&WsConfig {
            n: 100,
            k: 4,
            beta: 0.1,
            seed: 5,
        })
        .unwrap();
        // 200 lattice edges, each rewired with p = 0.1.
        let mean = 20.0;
        let sigma = (200.0f64 * 0.1 * 0.9).sqrt();
        let got = lg.random_edges.len() as f64;
        assert!((got - mean).abs() < 3.0 * sigma, "rewired {got}");
        assert_eq!(lg.graph.num_edges(), 200);
    }

    #[test]
    fn ws_rejects_bad_lattice_parameters() {
        assert!(generate_ws(&WsConfig { n: 10, k: 3, beta: 0.0, seed: 0 }).is_err());
        assert!(generate_ws(&WsConfig { n: 4, k: 4, beta: 0.0, seed: 0 }).is_err());
        assert!(generate_ws(&WsConfig { n: 10, k: 4, beta: 1.5, seed: 0 }).is_err());
    }

    #[test]
    fn sbm_ground_truth_selects_same_block_structure() {
        let lg = generate_sbm(&SbmConfig {
            block_sizes: vec![4, 4],
            p_in: 1.0,
            p_out: 0.0,
            seed: 3,
        })
        .unwrap();
        let gt = ground_truth_sbm(&lg, (0, 1), 1).unwrap();
        assert_eq!(gt.scope_nodes, vec![0, 1, 2, 3]);
        assert_eq!(gt.edge_mask.len(), 6);
        assert!(gt.edge_mask.iter().all(|&b| b));
        assert!(!gt.has_edge_negatives());
        let expected: Vec<bool> = (0..8).map(|c| c < 4).collect();
        assert_eq!(gt.feature_mask, expected);
    }

    #[test]
    fn sbm_ground_truth_refuses_cross_block_targets() {
        let lg = generate_sbm(&SbmConfig {
            block_sizes: vec![4, 4],
            p_in: 1.0,
            p_out: 0.0,
            seed: 3,
        })
        .unwrap();
        assert!(matches!(
            ground_truth_sbm(&lg, (0, 4), 1),
            Err(Error::RefusedTarget(_, _))
        ));
    }

    #[test]
    fn ws_ground_truth_marks_triangle_closures() {
        // Triangle 0-1-2 plus a pendant 3; target (0,1) is closed by 2.
        let graph = build_graph(
            4,
            &[(0, 1), (0, 2), (1, 2), (2, 3)],
            Array2::eye(4),
        )
        .unwrap();
        let lg = LabeledGraph {
            graph,
            kind: GeneratorKind::WattsStrogatz,
            labels: None,
            random_edges: vec![],
        };
        let gt = ground_truth_ws(&lg, (0, 1), 1).unwrap();
        assert_eq!(gt.scope_edges, vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(gt.edge_mask, vec![false, true, true]);
        assert_eq!(gt.edge_positives(), 2);
        assert_eq!(gt.feature_mask, vec![true, true, true, false]);

        // The pendant edge (2,3) closes no triangle.
        assert!(matches!(
            ground_truth_ws(&lg, (2, 3), 1),
            Err(Error::RefusedTarget(_, _))
        ));
    }

    #[test]
    fn random_edges_are_flagged() {
        let lg = generate_sbm(&SbmConfig {
            block_sizes: vec![10, 10],
            p_in: 0.8,
            p_out: 0.3,
            seed: 17,
        })
        .unwrap();
        assert!(!lg.random_edges.is_empty());
        for &e in &lg.random_edges {
            assert!(lg.is_random_edge(e));
            assert!(matches!(
                lg.ground_truth(e, 1),
                Err(Error::RefusedTarget(_, _))
            ));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn sbm_with_zero_p_out_never_crosses_blocks(seed in 0u64..500) {
            let lg = generate_sbm(&SbmConfig {
                block_sizes: vec![6, 6],
                p_in: 0.5,
                p_out: 0.0,
                seed,
            }).unwrap();
            let labels = lg.labels.as_ref().unwrap();
            for &(u, v) in lg.graph.edges() {
                prop_assert_eq!(labels[u], labels[v]);
            }
        }

        #[test]
        fn ws_edge_count_is_always_half_nk(seed in 0u64..500, beta in 0.0f64..=1.0) {
            let lg = generate_ws(&WsConfig { n: 20, k: 6, beta, seed }).unwrap();
            prop_assert_eq!(lg.graph.num_edges(), 60);
        }
    }
}
