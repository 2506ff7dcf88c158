//! Undirected nominal network graph.
//!
//! Edges are unordered pairs stored once as `(lo, hi)` with `lo < hi`, sorted
//! lexicographically. An edge's position in that sorted list is its
//! [`EdgeId`]; every per-link quantity (clock, control, jamming signal) is
//! keyed by it.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of an edge in [`Graph::edges`].
pub type EdgeId = usize;

/// Unordered node pair, normalised so that `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "[usize; 2]", try_from = "[usize; 2]")]
pub struct Edge {
    lo: usize,
    hi: usize,
}

impl Edge {
    /// Normalises `{a, b}`. Returns `None` for a self-loop.
    pub fn new(a: usize, b: usize) -> Option<Self> {
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(Edge { lo: a, hi: b }),
            std::cmp::Ordering::Greater => Some(Edge { lo: b, hi: a }),
            std::cmp::Ordering::Equal => None,
        }
    }

    pub fn lo(self) -> usize {
        self.lo
    }

    pub fn hi(self) -> usize {
        self.hi
    }

    pub fn touches(self, node: usize) -> bool {
        self.lo == node || self.hi == node
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}, {}}}", self.lo, self.hi)
    }
}

impl From<Edge> for [usize; 2] {
    fn from(e: Edge) -> Self {
        [e.lo, e.hi]
    }
}

impl TryFrom<[usize; 2]> for Edge {
    type Error = TopologyError;

    fn try_from(pair: [usize; 2]) -> Result<Self, Self::Error> {
        Edge::new(pair[0], pair[1]).ok_or(TopologyError::SelfLoop(pair[0]))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("edge {{{a}, {b}}} references node {bad} but the graph has {n} nodes")]
    NodeOutOfRange { a: usize, b: usize, bad: usize, n: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(usize),
    #[error("edge {0} is not in the graph")]
    NotAnEdge(Edge),
    #[error("no {deg}-regular graph on {n} nodes: {reason}")]
    RegularInfeasible { n: usize, deg: usize, reason: &'static str },
    #[error("could not sample a connected {deg}-regular graph on {n} nodes after {attempts} attempts")]
    RegularRetriesExhausted { n: usize, deg: usize, attempts: usize },
}

/// Undirected simple graph `G = (I, E)` with neighbour lists and degrees.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphSpec", into = "GraphSpec")]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
    neighbors: Vec<Vec<usize>>,
    incident: Vec<Vec<EdgeId>>,
    index: HashMap<Edge, EdgeId>,
}

/// Wire form of a graph: node count plus edge array.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphSpec> for Graph {
    type Error = TopologyError;

    fn try_from(spec: GraphSpec) -> Result<Self, Self::Error> {
        Graph::new(spec.n, spec.edges.iter().map(|p| (p[0], p[1])))
    }
}

impl From<Graph> for GraphSpec {
    fn from(g: Graph) -> Self {
        GraphSpec { n: g.n, edges: g.edges.iter().map(|&e| e.into()).collect() }
    }
}

/// Degree extrema and the total degree `d = sum_i d^i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeStats {
    pub max: usize,
    pub min: usize,
    pub total: usize,
}

impl Graph {
    /// Builds a graph from an edge list, dropping duplicate pairs.
    pub fn new<I>(n: usize, edge_list: I) -> Result<Self, TopologyError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set = BTreeSet::new();
        for (a, b) in edge_list {
            if a >= n || b >= n {
                let bad = if a >= n { a } else { b };
                return Err(TopologyError::NodeOutOfRange { a, b, bad, n });
            }
            set.insert(Edge::new(a, b).ok_or(TopologyError::SelfLoop(a))?);
        }
        Ok(Self::from_sorted(n, set.into_iter().collect()))
    }

    fn from_sorted(n: usize, edges: Vec<Edge>) -> Self {
        let mut neighbors = vec![Vec::new(); n];
        let mut incident = vec![Vec::new(); n];
        let mut index = HashMap::with_capacity(edges.len());
        for (id, e) in edges.iter().enumerate() {
            neighbors[e.lo].push(e.hi);
            neighbors[e.hi].push(e.lo);
            incident[e.lo].push(id);
            incident[e.hi].push(id);
            index.insert(*e, id);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Graph { n, edges, neighbors, incident, index }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> Edge {
        self.edges[id]
    }

    pub fn edge_id(&self, e: Edge) -> Option<EdgeId> {
        self.index.get(&e).copied()
    }

    /// `N_i`, sorted ascending.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[node]
    }

    /// Edge ids incident to `node`.
    pub fn incident(&self, node: usize) -> &[EdgeId] {
        &self.incident[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors[node].len()
    }

    pub fn degree_stats(&self) -> DegreeStats {
        let degrees = self.neighbors.iter().map(Vec::len);
        DegreeStats {
            max: degrees.clone().max().unwrap_or(0),
            min: if self.edges.is_empty() { 0 } else { degrees.clone().min().unwrap_or(0) },
            total: degrees.sum(),
        }
    }

    /// True iff every node is reachable from node 0. The empty graph counts as
    /// connected.
    pub fn is_connected(&self) -> bool {
        self.component_of(0, None).map_or(true, |seen| seen.iter().all(|&s| s))
    }

    /// Breadth-first reachability from `start`, optionally ignoring one edge.
    fn component_of(&self, start: usize, skip: Option<EdgeId>) -> Option<Vec<bool>> {
        if start >= self.n {
            return None;
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(v) = queue.pop_front() {
            for &id in &self.incident[v] {
                if Some(id) == skip {
                    continue;
                }
                let e = self.edges[id];
                let w = if e.lo == v { e.hi } else { e.lo };
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
        Some(seen)
    }

    /// Whether removing `e` disconnects its endpoints.
    pub fn is_bridge(&self, e: Edge) -> Result<bool, TopologyError> {
        let id = self.edge_id(e).ok_or(TopologyError::NotAnEdge(e))?;
        let seen = self.component_of(e.lo, Some(id)).expect("endpoint in range");
        Ok(!seen[e.hi])
    }

    /// Nodes on the `lo` side of a bridge once it is removed.
    pub fn bridge_sides(&self, e: Edge) -> Result<(Vec<usize>, Vec<usize>), TopologyError> {
        let id = self.edge_id(e).ok_or(TopologyError::NotAnEdge(e))?;
        let seen = self.component_of(e.lo, Some(id)).expect("endpoint in range");
        let (a, b): (Vec<usize>, Vec<usize>) = (0..self.n).partition(|&v| seen[v]);
        Ok((a, b))
    }

    /// `G_X = (I, E \ X)`.
    pub fn remove_links(&self, removed: &[Edge]) -> Result<Graph, TopologyError> {
        let mut drop = BTreeSet::new();
        for &e in removed {
            if self.edge_id(e).is_none() {
                return Err(TopologyError::NotAnEdge(e));
            }
            drop.insert(e);
        }
        let kept = self.edges.iter().copied().filter(|e| !drop.contains(e)).collect();
        Ok(Self::from_sorted(self.n, kept))
    }

    /// Graph with one extra edge (no-op if already present).
    pub fn with_link(&self, e: Edge) -> Result<Graph, TopologyError> {
        Graph::new(
            self.n,
            self.edges.iter().chain(std::iter::once(&e)).map(|e| (e.lo, e.hi)),
        )
    }

    /// Relabels nodes: node `v` becomes `perm[v]`.
    pub fn relabel(&self, perm: &[usize]) -> Result<Graph, TopologyError> {
        Graph::new(self.n, self.edges.iter().map(|e| (perm[e.lo], perm[e.hi])))
    }

    /// Samples a connected `deg`-regular graph with the pairing (configuration)
    /// model: shuffle `n * deg` stubs, pair consecutive stubs, reject pairings
    /// with self-loops, repeated pairs or more than one component.
    pub fn random_regular_connected(n: usize, deg: usize, seed: u64) -> Result<Graph, TopologyError> {
        const MAX_ATTEMPTS: usize = 100_000;
        if (n * deg) % 2 != 0 {
            return Err(TopologyError::RegularInfeasible { n, deg, reason: "n * deg is odd" });
        }
        if deg >= n.max(1) {
            return Err(TopologyError::RegularInfeasible { n, deg, reason: "deg must be below n" });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(deg)).collect();
        'attempt: for _ in 0..MAX_ATTEMPTS {
            stubs.shuffle(&mut rng);
            let mut set = BTreeSet::new();
            for pair in stubs.chunks_exact(2) {
                match Edge::new(pair[0], pair[1]) {
                    Some(e) if set.insert(e) => {}
                    _ => continue 'attempt,
                }
            }
            let g = Self::from_sorted(n, set.into_iter().collect());
            if g.is_connected() {
                return Ok(g);
            }
        }
        Err(TopologyError::RegularRetriesExhausted { n, deg, attempts: MAX_ATTEMPTS })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(a: usize, b: usize) -> Edge {
        Edge::new(a, b).unwrap()
    }

    #[test]
    fn smallest_connected_graph() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        assert_eq!(g.degree(0), 1);
        assert_eq!(g.degree(1), 1);
        assert_eq!(g.degree_stats().total, 2);
        assert!(g.is_connected());
    }

    #[test]
    fn duplicate_edges_are_merged() {
        let g = Graph::new(3, [(0, 1), (1, 0), (1, 2)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.degree(1), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn rejects_bad_edges() {
        assert_eq!(Graph::new(3, [(1, 1)]), Err(TopologyError::SelfLoop(1)));
        assert!(matches!(
            Graph::new(3, [(0, 3)]),
            Err(TopologyError::NodeOutOfRange { bad: 3, .. })
        ));
    }

    #[test]
    fn degree_stats_examples() {
        let star = Graph::new(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(star.degree_stats(), DegreeStats { max: 3, min: 1, total: 6 });
        let empty = Graph::new(3, []).unwrap();
        assert_eq!(empty.degree_stats(), DegreeStats { max: 0, min: 0, total: 0 });
    }

    #[test]
    fn connectivity() {
        assert!(Graph::new(2, [(0, 1)]).unwrap().is_connected());
        assert!(!Graph::new(4, [(0, 1), (2, 3)]).unwrap().is_connected());
    }

    #[test]
    fn bridges_and_removal() {
        let tri = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert!(tri.remove_links(&[e(0, 1)]).unwrap().is_connected());
        assert!(!tri.is_bridge(e(0, 1)).unwrap());
        let path = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert!(path.is_bridge(e(1, 2)).unwrap());
        assert!(!path.remove_links(&[e(1, 2)]).unwrap().is_connected());
        assert_eq!(path.remove_links(&[]).unwrap(), path);
        assert_eq!(path.remove_links(&[e(0, 2)]), Err(TopologyError::NotAnEdge(e(0, 2))));
        let (a, b) = path.bridge_sides(e(1, 2)).unwrap();
        assert_eq!((a, b), (vec![0, 1], vec![2]));
    }

    #[test]
    fn regular_parity_rejected() {
        assert!(matches!(
            Graph::random_regular_connected(3, 1, 0),
            Err(TopologyError::RegularInfeasible { .. })
        ));
    }

    #[test]
    fn regular_is_seed_deterministic() {
        let a = Graph::random_regular_connected(40, 4, 7).unwrap();
        let b = Graph::random_regular_connected(40, 4, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.edge_count(), 80);
        assert_eq!(a.degree_stats(), DegreeStats { max: 4, min: 4, total: 160 });
    }

    #[test]
    fn json_round_trip_and_validation() {
        let g = Graph::new(3, [(2, 1), (0, 1)]).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(text, r#"{"n":3,"edges":[[0,1],[1,2]]}"#);
        let back: Graph = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Graph>(r#"{"n":2,"edges":[[0,0]]}"#).is_err());
    }
}
