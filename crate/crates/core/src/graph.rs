//! Labeled undirected graphs, synthetic workload generation, one-hot input
//! features and the symmetric normalized adjacency with self-loops.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Dense node-feature matrix, one row per node.
pub type FeatureMatrix<T> = Matrix<T>;

/// Default label vocabulary for AIDS-like synthetic data.
pub const DEFAULT_VOCAB: usize = 29;

/// Simple labeled undirected graph. Edges are stored once per pair with
/// `src < dst`; self-loops are not allowed here.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_nodes: usize,
    labels: Vec<usize>,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    num_nodes: usize,
    labels: Vec<usize>,
    edges: Vec<[usize; 2]>,
}

impl Graph {
    /// Validates and canonicalizes (`src < dst`) the edge list.
    pub fn new(num_nodes: usize, labels: Vec<usize>, edges: Vec<(usize, usize)>) -> Result<Self> {
        if labels.len() != num_nodes {
            return Err(Error::InvalidGraph(format!(
                "{} labels for {} nodes",
                labels.len(),
                num_nodes
            )));
        }
        let mut seen = BTreeSet::new();
        let mut canon = Vec::with_capacity(edges.len());
        for (a, b) in edges {
            if a >= num_nodes || b >= num_nodes {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) references a node outside 0..{num_nodes}"
                )));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop on node {a}")));
            }
            let pair = (a.min(b), a.max(b));
            if !seen.insert(pair) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    pair.0, pair.1
                )));
            }
            canon.push(pair);
        }
        Ok(Self {
            num_nodes,
            labels,
            edges: canon,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Degree of every node, without self-loops.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_nodes];
        for &(a, b) in &self.edges {
            deg[a] += 1;
            deg[b] += 1;
        }
        deg
    }

    pub fn check_vocab(&self, vocab: usize) -> Result<()> {
        match self.labels.iter().enumerate().find(|(_, &l)| l >= vocab) {
            Some((node, &label)) => Err(Error::LabelOutOfRange { node, label, vocab }),
            None => Ok(()),
        }
    }

    /// Relabels nodes: old node `i` becomes node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        if perm.len() != self.num_nodes {
            return Err(Error::dims("node permutation", self.num_nodes, perm.len()));
        }
        let mut labels = vec![0; self.num_nodes];
        for (old, &new) in perm.iter().enumerate() {
            if new >= self.num_nodes {
                return Err(Error::InvalidGraph(format!("permutation target {new} out of range")));
            }
            labels[new] = self.labels[old];
        }
        let edges = self.edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
        Graph::new(self.num_nodes, labels, edges)
    }

    pub fn to_json(&self) -> String {
        let file = GraphFile {
            num_nodes: self.num_nodes,
            labels: self.labels.clone(),
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
        };
        serde_json::to_string(&file).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Graph> {
        let file: GraphFile = serde_json::from_str(text)?;
        Graph::new(
            file.num_nodes,
            file.labels,
            file.edges.into_iter().map(|[a, b]| (a, b)).collect(),
        )
    }
}

/// Reads and validates a graph JSON file.
pub fn load_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Graph::from_json(&text)
}

pub fn save_graph(graph: &Graph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, graph.to_json()).map_err(|e| Error::io(path, e))
}

/// Uniformly random simple graph with exactly `num_edges` distinct edges and
/// uniform labels in `0..vocab_size`. Connectivity is not guaranteed.
pub fn generate_synthetic(
    seed: u64,
    num_nodes: usize,
    num_edges: usize,
    vocab_size: usize,
) -> Result<Graph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_with_rng(&mut rng, num_nodes, num_edges, vocab_size)
}

pub(crate) fn generate_with_rng<R: Rng>(
    rng: &mut R,
    num_nodes: usize,
    num_edges: usize,
    vocab_size: usize,
) -> Result<Graph> {
    if vocab_size == 0 {
        return Err(Error::InvalidGraph("vocabulary size must be at least 1".into()));
    }
    let max_edges = num_nodes * num_nodes.saturating_sub(1) / 2;
    if num_edges > max_edges {
        return Err(Error::InfeasibleEdgeCount {
            num_nodes,
            num_edges,
        });
    }
    let mut picks = index::sample(rng, max_edges, num_edges).into_vec();
    picks.sort_unstable();
    let edges = picks
        .into_iter()
        .map(|k| pair_from_index(num_nodes, k))
        .collect();
    let labels = (0..num_nodes).map(|_| rng.random_range(0..vocab_size)).collect();
    Graph::new(num_nodes, labels, edges)
}

/// Maps `k` in `0..n(n-1)/2` to the k-th pair `(i, j)`, `i < j`, in
/// lexicographic order.
fn pair_from_index(n: usize, mut k: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row = n - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
        i += 1;
    }
}

/// `|V| x vocab_size` indicator matrix of the node labels.
pub fn one_hot_features<T: Scalar>(graph: &Graph, vocab_size: usize) -> Result<FeatureMatrix<T>> {
    graph.check_vocab(vocab_size)?;
    let mut h = Matrix::zeros(graph.num_nodes(), vocab_size);
    for (node, &label) in graph.labels().iter().enumerate() {
        h[(node, label)] = T::one();
    }
    Ok(h)
}

/// One nonzero of the normalized adjacency: `out[dst] += weight * x[src]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedEdge<T> {
    pub src: usize,
    pub dst: usize,
    pub weight: T,
}

/// Edge list of `D^-1/2 (A + I) D^-1/2`: both directions of every input edge
/// plus one self-loop per node.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedGraph<T> {
    num_nodes: usize,
    edges: Vec<WeightedEdge<T>>,
}

impl<T: Scalar> NormalizedGraph<T> {
    /// Wraps an arbitrary weighted edge list, e.g. a hand-built test case.
    ///
    /// # Panics
    /// If an endpoint is not below `num_nodes`.
    pub fn from_parts(num_nodes: usize, edges: Vec<WeightedEdge<T>>) -> Self {
        assert!(
            edges.iter().all(|e| e.src < num_nodes && e.dst < num_nodes),
            "edge endpoint out of range"
        );
        Self { num_nodes, edges }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[WeightedEdge<T>] {
        &self.edges
    }

    pub fn num_entries(&self) -> usize {
        self.edges.len()
    }
}

/// Symmetric normalization with self-loops. Self-loop entries come first (node
/// order), followed by the two directions of each input edge.
pub fn normalize_adjacency<T: Scalar>(graph: &Graph) -> NormalizedGraph<T> {
    let deg: Vec<T> = graph
        .degrees()
        .into_iter()
        .map(|d| T::of((d + 1) as f64))
        .collect();
    let weight = |a: usize, b: usize| (deg[a] * deg[b]).sqrt().recip();

    let mut edges = Vec::with_capacity(graph.num_nodes() + 2 * graph.num_edges());
    for i in 0..graph.num_nodes() {
        edges.push(WeightedEdge {
            src: i,
            dst: i,
            weight: weight(i, i),
        });
    }
    for &(a, b) in graph.edges() {
        let w = weight(a, b);
        edges.push(WeightedEdge { src: a, dst: b, weight: w });
        edges.push(WeightedEdge { src: b, dst: a, weight: w });
    }
    NormalizedGraph {
        num_nodes: graph.num_nodes(),
        edges,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_graph_parses() {
        let g = Graph::from_json(r#"{"num_nodes":2,"labels":[0,1],"edges":[[0,1]]}"#).unwrap();
        assert_eq!(g.num_nodes(), 2);
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn out_of_range_edge_rejected() {
        let err = Graph::from_json(r#"{"num_nodes":3,"labels":[0,0,0],"edges":[[0,5]]}"#);
        assert!(matches!(err, Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn duplicate_and_self_loop_rejected() {
        assert!(Graph::new(3, vec![0; 3], vec![(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, vec![0; 3], vec![(2, 2)]).is_err());
        assert!(Graph::new(3, vec![0; 2], vec![]).is_err());
    }

    #[test]
    fn malformed_json_is_parse_error() {
        assert!(matches!(Graph::from_json("{nodes"), Err(Error::Parse(_))));
    }

    #[test]
    fn edges_canonicalized() {
        let g = Graph::new(3, vec![0; 3], vec![(2, 0)]).unwrap();
        assert_eq!(g.edges(), &[(0, 2)]);
        assert!(g.to_json().contains("[[0,2]]"));
    }

    #[test]
    fn pair_index_enumerates_all_pairs() {
        let n = 6;
        let pairs: Vec<_> = (0..n * (n - 1) / 2).map(|k| pair_from_index(n, k)).collect();
        let expected: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        assert_eq!(pairs, expected);
    }

    #[test]
    fn synthetic_counts_and_determinism() {
        let g = generate_synthetic(1, 26, 28, 29).unwrap();
        assert_eq!((g.num_nodes(), g.num_edges()), (26, 28));
        assert_eq!(g, generate_synthetic(1, 26, 28, 29).unwrap());
        g.check_vocab(29).unwrap();
    }

    #[test]
    fn synthetic_saturation_is_complete_graph() {
        let g = generate_synthetic(2, 5, 10, 3).unwrap();
        assert_eq!(g.num_edges(), 10);
        assert!(g.degrees().iter().all(|&d| d == 4));
    }

    #[test]
    fn synthetic_rejects_infeasible() {
        assert!(matches!(
            generate_synthetic(1, 4, 7, 3),
            Err(Error::InfeasibleEdgeCount { .. })
        ));
        assert!(generate_synthetic(1, 4, 2, 0).is_err());
    }

    #[test]
    fn one_hot_examples() {
        let g = Graph::new(2, vec![2, 0], vec![]).unwrap();
        let h = one_hot_features::<f64>(&g, 3).unwrap();
        assert_eq!(h.to_rows(), vec![vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]]);

        let single = Graph::new(1, vec![0], vec![]).unwrap();
        assert_eq!(one_hot_features::<f32>(&single, 1).unwrap().to_rows(), vec![vec![1.0]]);

        assert!(matches!(
            one_hot_features::<f64>(&g, 2),
            Err(Error::LabelOutOfRange { node: 0, label: 2, vocab: 2 })
        ));
    }

    #[test]
    fn normalize_single_node() {
        let g = Graph::new(1, vec![0], vec![]).unwrap();
        let a = normalize_adjacency::<f64>(&g);
        assert_eq!(a.edges(), &[WeightedEdge { src: 0, dst: 0, weight: 1.0 }]);
    }

    #[test]
    fn normalize_two_nodes() {
        let g = Graph::new(2, vec![0, 1], vec![(0, 1)]).unwrap();
        let a = normalize_adjacency::<f64>(&g);
        assert_eq!(a.num_entries(), 4);
        assert!(a.edges().iter().all(|e| e.weight == 0.5));
    }

    #[test]
    fn permutation_moves_labels_and_edges() {
        let g = Graph::new(3, vec![5, 6, 7], vec![(0, 1)]).unwrap();
        let p = g.permuted(&[2, 0, 1]).unwrap();
        assert_eq!(p.labels(), &[6, 7, 5]);
        assert_eq!(p.edges(), &[(0, 2)]);
    }
}
