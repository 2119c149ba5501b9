//! Undirected simple graphs with dense node features, train/test edge splits
//! and k-hop neighbourhood extraction.
//!
//! Nodes are dense ids `0..num_nodes`. Edges are stored once as canonical
//! `(min, max)` pairs in sorted order, so edge indices are stable and
//! reproducible across runs; adjacency lists mirror them symmetrically.

use std::sync::Arc;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::rng_from;

pub type Edge = (usize, usize);

/// Return the canonical orientation of an undirected edge.
pub fn canonical(e: Edge) -> Edge {
    if e.0 <= e.1 {
        e
    } else {
        (e.1, e.0)
    }
}

#[derive(Debug, Clone)]
pub struct Graph {
    num_nodes: usize,
    edges: Arc<Vec<Edge>>,
    adjacency: Vec<Vec<usize>>,
    features: Array2<f64>,
}

impl Graph {
    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_features(&self) -> usize {
        self.features.ncols()
    }

    /// Canonical `(min, max)` edge list, sorted lexicographically.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Shared handle to the edge list, used by computation tapes.
    pub fn edges_arc(&self) -> Arc<Vec<Edge>> {
        Arc::clone(&self.edges)
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_nodes && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Index of an edge in `edges()`, accepting either orientation.
    pub fn edge_index(&self, e: Edge) -> Option<usize> {
        self.edges.binary_search(&canonical(e)).ok()
    }

    /// Common neighbours of `u` and `v`, ascending.
    pub fn common_neighbors(&self, u: usize, v: usize) -> Vec<usize> {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.adjacency[u], &self.adjacency[v]);
        let mut out = Vec::new();
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out
    }

    /// Same structure, different feature matrix (row count must match).
    pub fn with_features(&self, features: Array2<f64>) -> Result<Graph> {
        if features.nrows() != self.num_nodes {
            return Err(Error::ShapeMismatch {
                expected: format!("{} feature rows", self.num_nodes),
                got: format!("{}", features.nrows()),
                context: "with_features",
            });
        }
        Ok(Graph {
            num_nodes: self.num_nodes,
            edges: Arc::clone(&self.edges),
            adjacency: self.adjacency.clone(),
            features,
        })
    }
}

/// Validate and canonicalize raw edge data into a `Graph`.
///
/// Edges may arrive in either orientation and with duplicates; they are
/// deduplicated and stored canonically. Self-loops, out-of-range endpoints
/// and feature row mismatches are rejected.
pub fn build_graph(num_nodes: usize, edges: &[Edge], features: Array2<f64>) -> Result<Graph> {
    if features.nrows() != num_nodes {
        return Err(Error::ShapeMismatch {
            expected: format!("{num_nodes} feature rows"),
            got: format!("{}", features.nrows()),
            context: "build_graph",
        });
    }
    let mut canon: Vec<Edge> = Vec::with_capacity(edges.len());
    for &(u, v) in edges {
        if u >= num_nodes || v >= num_nodes {
            return Err(Error::InvalidGraph(format!(
                "edge ({u}, {v}) references a node outside 0..{num_nodes}"
            )));
        }
        if u == v {
            return Err(Error::InvalidGraph(format!("self-loop at node {u}")));
        }
        canon.push(canonical((u, v)));
    }
    canon.sort_unstable();
    canon.dedup();

    let mut adjacency = vec![Vec::new(); num_nodes];
    for &(u, v) in &canon {
        adjacency[u].push(v);
        adjacency[v].push(u);
    }
    for list in &mut adjacency {
        list.sort_unstable();
    }
    Ok(Graph {
        num_nodes,
        edges: Arc::new(canon),
        adjacency,
        features,
    })
}

/// A train/test split of a graph's edges.
///
/// `train_graph` is the input graph with the test positives removed; the
/// negatives are node pairs carrying no edge in the *original* graph, fixed
/// at split time so that every downstream consumer scores the same pairs.
#[derive(Debug, Clone)]
pub struct EdgeSplit {
    pub train_graph: Graph,
    pub test_pos: Vec<Edge>,
    pub test_neg: Vec<Edge>,
    pub seed: u64,
}

/// Split edges into train/test positives and sample matching negatives.
pub fn split_edges(g: &Graph, test_fraction: f64, seed: u64) -> Result<EdgeSplit> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test_fraction must lie strictly between 0 and 1, got {test_fraction}"
        )));
    }
    let m = g.num_edges();
    if m < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 edges to split, graph has {m}"
        )));
    }
    let n_test = ((m as f64 * test_fraction).round() as usize).clamp(1, m - 1);

    let n = g.num_nodes();
    let total_pairs = n * (n - 1) / 2;
    let available = total_pairs - m;
    if available < n_test {
        return Err(Error::NotEnoughNonEdges {
            needed: n_test,
            available,
        });
    }

    let mut rng = rng_from(seed);

    // Test positives: partial Fisher-Yates over the edge indices.
    let mut idx: Vec<usize> = (0..m).collect();
    for i in 0..n_test {
        let j = rng.gen_range(i..m);
        idx.swap(i, j);
    }
    let mut test_pos: Vec<Edge> = idx[..n_test].iter().map(|&i| g.edges()[i]).collect();
    test_pos.sort_unstable();

    let mut test_neg = sample_non_edges(g, n_test, &mut rng)?;
    test_neg.sort_unstable();

    let test_set: std::collections::HashSet<Edge> = test_pos.iter().copied().collect();
    let train_edges: Vec<Edge> = g
        .edges()
        .iter()
        .copied()
        .filter(|e| !test_set.contains(e))
        .collect();
    let train_graph = build_graph(n, &train_edges, g.features().clone())?;

    Ok(EdgeSplit {
        train_graph,
        test_pos,
        test_neg,
        seed,
    })
}

/// Draw `count` distinct node pairs that carry no edge, uniformly at random.
///
/// Rejection sampling in the sparse regime, full enumeration plus a partial
/// shuffle once the graph is dense enough for rejections to dominate.
pub fn sample_non_edges(
    g: &Graph,
    count: usize,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Result<Vec<Edge>> {
    let n = g.num_nodes();
    let total_pairs = n * (n - 1) / 2;
    let available = total_pairs - g.num_edges();
    if available < count {
        return Err(Error::NotEnoughNonEdges {
            needed: count,
            available,
        });
    }
    let mut out: Vec<Edge> = Vec::with_capacity(count);
    if (g.num_edges() + count) * 2 < total_pairs {
        let mut seen = std::collections::HashSet::with_capacity(count);
        while out.len() < count {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u == v {
                continue;
            }
            let e = canonical((u, v));
            if g.has_edge(e.0, e.1) || !seen.insert(e) {
                continue;
            }
            out.push(e);
        }
    } else {
        let mut pool: Vec<Edge> = Vec::with_capacity(available);
        for u in 0..n {
            for v in (u + 1)..n {
                if !g.has_edge(u, v) {
                    pool.push((u, v));
                }
            }
        }
        pool.partial_shuffle(rng, count);
        out.extend_from_slice(&pool[..count]);
    }
    Ok(out)
}

/// Induced subgraph around a set of seed nodes, with its node mapping.
///
/// `nodes[local] = original` and the list is ascending, so local edge order
/// agrees with the original canonical order.
#[derive(Debug, Clone)]
pub struct Scope {
    pub graph: Graph,
    pub nodes: Vec<usize>,
}

impl Scope {
    /// Local index of an original node id, if it lies in the scope.
    pub fn local(&self, orig: usize) -> Option<usize> {
        self.nodes.binary_search(&orig).ok()
    }

    /// Map a local edge back to original node ids.
    pub fn edge_to_original(&self, e: Edge) -> Edge {
        canonical((self.nodes[e.0], self.nodes[e.1]))
    }

    /// Scope edge list in original node ids (canonical order).
    pub fn edges_original(&self) -> Vec<Edge> {
        self.graph
            .edges()
            .iter()
            .map(|&e| self.edge_to_original(e))
            .collect()
    }
}

/// Extract the `k`-hop neighbourhood of `seeds` as an induced subgraph.
pub fn k_hop_subgraph(g: &Graph, seeds: &[usize], k: usize) -> Result<Scope> {
    if seeds.is_empty() {
        return Err(Error::InvalidArgument("empty seed set for k-hop scope".into()));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k-hop scope requires k >= 1".into()));
    }
    for &s in seeds {
        if s >= g.num_nodes() {
            return Err(Error::InvalidArgument(format!(
                "seed node {s} outside 0..{}",
                g.num_nodes()
            )));
        }
    }

    let mut in_scope = vec![false; g.num_nodes()];
    let mut frontier: Vec<usize> = Vec::new();
    for &s in seeds {
        if !in_scope[s] {
            in_scope[s] = true;
            frontier.push(s);
        }
    }
    for _ in 0..k {
        let mut next = Vec::new();
        for &u in &frontier {
            for &v in g.neighbors(u) {
                if !in_scope[v] {
                    in_scope[v] = true;
                    next.push(v);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }

    let nodes: Vec<usize> = (0..g.num_nodes()).filter(|&u| in_scope[u]).collect();
    let mut local_of = vec![usize::MAX; g.num_nodes()];
    for (local, &orig) in nodes.iter().enumerate() {
        local_of[orig] = local;
    }
    let sub_edges: Vec<Edge> = g
        .edges()
        .iter()
        .filter(|&&(u, v)| in_scope[u] && in_scope[v])
        .map(|&(u, v)| (local_of[u], local_of[v]))
        .collect();

    let mut features = Array2::zeros((nodes.len(), g.num_features()));
    for (local, &orig) in nodes.iter().enumerate() {
        features.row_mut(local).assign(&g.features().row(orig));
    }

    Ok(Scope {
        graph: build_graph(nodes.len(), &sub_edges, features)?,
        nodes,
    })
}

/// Five nodes a,b,x,y,z (ids 0..4) and the three spokes around `a`; the
/// star fixture shared by model and explainer tests.
#[cfg(test)]
pub(crate) fn toy_graph() -> Graph {
    let features = ndarray::arr2(&[
        [0.5, 0.5],
        [1.0, 0.0],
        [1.0, 0.0],
        [0.0, 1.0],
        [0.5, 0.5],
    ]);
    build_graph(5, &[(0, 2), (0, 3), (0, 4)], features).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn complete_graph(n: usize) -> Graph {
        let mut edges = Vec::new();
        for u in 0..n {
            for v in (u + 1)..n {
                edges.push((u, v));
            }
        }
        build_graph(n, &edges, Array2::zeros((n, 1))).unwrap()
    }

    #[test]
    fn build_canonicalizes_and_dedups() {
        let g = build_graph(3, &[(2, 0), (0, 2), (1, 2)], Array2::zeros((3, 2))).unwrap();
        assert_eq!(g.edges(), &[(0, 2), (1, 2)]);
        assert_eq!(g.neighbors(2), &[0, 1]);
        assert!(g.has_edge(2, 0));
        assert_eq!(g.edge_index((2, 1)), Some(1));
    }

    #[test]
    fn build_rejects_bad_input() {
        assert!(matches!(
            build_graph(3, &[(0, 3)], Array2::zeros((3, 1))),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            build_graph(3, &[(1, 1)], Array2::zeros((3, 1))),
            Err(Error::InvalidGraph(_))
        ));
        assert!(matches!(
            build_graph(3, &[(0, 1)], Array2::zeros((2, 1))),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn toy_graph_shape() {
        let g = toy_graph();
        assert_eq!(g.num_nodes(), 5);
        assert_eq!(g.num_edges(), 3);
        assert_eq!(g.degree(0), 3);
        assert_eq!(g.degree(1), 0);
    }

    #[test]
    fn split_counts_and_disjointness() {
        // 10-edge ring over 10 nodes; 0.2 of 10 edges -> 2 test positives.
        let edges: Vec<Edge> = (0..10).map(|i| (i, (i + 1) % 10)).collect();
        let g = build_graph(10, &edges, Array2::zeros((10, 1))).unwrap();
        let s = split_edges(&g, 0.2, 11).unwrap();
        assert_eq!(s.test_pos.len(), 2);
        assert_eq!(s.test_neg.len(), 2);
        assert_eq!(s.train_graph.num_edges(), 8);
        for e in &s.test_pos {
            assert!(!s.train_graph.has_edge(e.0, e.1));
            assert!(g.has_edge(e.0, e.1));
        }
        for e in &s.test_neg {
            assert!(!g.has_edge(e.0, e.1));
            assert!(!s.test_pos.contains(e));
        }
    }

    #[test]
    fn split_on_complete_graph_fails() {
        let g = complete_graph(4);
        assert!(matches!(
            split_edges(&g, 0.5, 0),
            Err(Error::NotEnoughNonEdges { .. })
        ));
    }

    #[test]
    fn split_deterministic_per_seed() {
        let edges: Vec<Edge> = (0..30).map(|i| (i, (i + 1) % 30)).collect();
        let g = build_graph(30, &edges, Array2::zeros((30, 1))).unwrap();
        let a = split_edges(&g, 0.3, 5).unwrap();
        let b = split_edges(&g, 0.3, 5).unwrap();
        assert_eq!(a.test_pos, b.test_pos);
        assert_eq!(a.test_neg, b.test_neg);
        let c = split_edges(&g, 0.3, 6).unwrap();
        assert!(a.test_pos != c.test_pos || a.test_neg != c.test_neg);
    }

    #[test]
    fn one_hop_scope_of_toy_target_covers_whole_graph() {
        let g = toy_graph();
        let scope = k_hop_subgraph(&g, &[0, 1], 1).unwrap();
        assert_eq!(scope.nodes, vec![0, 1, 2, 3, 4]);
        assert_eq!(scope.graph.num_edges(), 3);
        assert_eq!(scope.edges_original(), vec![(0, 2), (0, 3), (0, 4)]);
    }

    #[test]
    fn scope_features_follow_node_mapping() {
        let g = toy_graph();
        let scope = k_hop_subgraph(&g, &[2], 1).unwrap();
        assert_eq!(scope.nodes, vec![0, 2]);
        assert_eq!(scope.graph.features().row(1).to_vec(), vec![1.0, 0.0]);
        assert_eq!(scope.local(2), Some(1));
        assert_eq!(scope.local(3), None);
    }

    #[test]
    fn k_hop_rejects_bad_arguments() {
        let g = toy_graph();
        assert!(k_hop_subgraph(&g, &[], 1).is_err());
        assert!(k_hop_subgraph(&g, &[0], 0).is_err());
        assert!(k_hop_subgraph(&g, &[9], 1).is_err());
    }

    prop_compose! {
        fn arbitrary_graph()(n in 2usize..16)(
            n in Just(n),
            picks in proptest::collection::vec(any::<bool>(), n * (n - 1) / 2),
        ) -> Graph {
            let mut edges = Vec::new();
            let mut k = 0;
            for u in 0..n {
                for v in (u + 1)..n {
                    if picks[k] {
                        edges.push((u, v));
                    }
                    k += 1;
                }
            }
            build_graph(n, &edges, Array2::zeros((n, 1))).unwrap()
        }
    }

    proptest! {
        #[test]
        fn adjacency_is_symmetric_and_loop_free(g in arbitrary_graph()) {
            for u in 0..g.num_nodes() {
                for &v in g.neighbors(u) {
                    prop_assert_ne!(u, v);
                    prop_assert!(g.neighbors(v).contains(&u));
                }
            }
            let total: usize = (0..g.num_nodes()).map(|u| g.degree(u)).sum();
            prop_assert_eq!(total, 2 * g.num_edges());
        }

        #[test]
        fn k_hop_scopes_grow_monotonically(g in arbitrary_graph(), k in 1usize..4) {
            let seed = 0usize;
            let small = k_hop_subgraph(&g, &[seed], k).unwrap();
            let large = k_hop_subgraph(&g, &[seed], k + 1).unwrap();
            for u in &small.nodes {
                prop_assert!(large.nodes.contains(u));
            }
            for e in small.edges_original() {
                prop_assert!(large.edges_original().contains(&e));
            }
        }
    }
}
