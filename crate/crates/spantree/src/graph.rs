//! Simple undirected graphs over dense vertex ids `0..n`.
//!
//! Graphs are immutable after construction and store one sorted neighbor
//! list per vertex, so iteration order is deterministic everywhere. Vertex
//! subsets, induced subgraphs and the ordered-pair edge count `e(X, Y)`
//! (which counts an edge inside `X ∩ Y` twice) live here as well.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {0} out of range for graph on {1} vertices")]
    VertexOutOfRange(usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("embedding has {got} entries but the pattern has {expected} vertices")]
    EmbeddingLengthMismatch { got: usize, expected: usize },
    #[error("graph is disconnected")]
    Disconnected,
    #[error("malformed graph file: {0}")]
    Parse(String),
}

/// An immutable simple undirected graph with vertices `0..n`.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

impl fmt::Debug for Graph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n(), self.edge_count())
    }
}

impl Graph {
    /// Graph on `n` vertices with no edges.
    pub fn empty(n: usize) -> Self {
        Graph { adj: vec![Vec::new(); n] }
    }

    /// The complete graph `K_n`.
    pub fn complete(n: usize) -> Self {
        let adj = (0..n)
            .map(|v| (0..n).filter(|&u| u != v).collect())
            .collect();
        Graph { adj }
    }

    /// Builds a graph from an edge list, rejecting loops, duplicates and
    /// out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for &(u, v) in edges {
            if u >= n {
                return Err(GraphError::VertexOutOfRange(u, n));
            }
            if v >= n {
                return Err(GraphError::VertexOutOfRange(v, n));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !adj[u].insert(v) {
                return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
            }
            adj[v].insert(u);
        }
        Ok(Graph {
            adj: adj.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` pairs with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    fn check_set(&self, x: &VertexSet) -> Result<(), GraphError> {
        match x.members.iter().next_back() {
            Some(&v) if v >= self.n() => Err(GraphError::VertexOutOfRange(v, self.n())),
            _ => Ok(()),
        }
    }

    /// External neighborhood `N(X)`: vertices outside `X` adjacent to `X`.
    pub fn external_neighborhood(&self, x: &VertexSet) -> Result<VertexSet, GraphError> {
        self.check_set(x)?;
        let mut out = BTreeSet::new();
        for &v in x.iter() {
            for &w in self.neighbors(v) {
                if !x.contains(w) {
                    out.insert(w);
                }
            }
        }
        Ok(VertexSet { members: out })
    }

    /// Number of ordered pairs `(x, y)` in `X × Y` joined by an edge.
    /// Symmetric in its arguments; an edge with both ends in `X ∩ Y`
    /// contributes twice.
    pub fn ordered_edge_count(&self, x: &VertexSet, y: &VertexSet) -> Result<usize, GraphError> {
        self.check_set(x)?;
        self.check_set(y)?;
        let mut count = 0;
        for &v in x.iter() {
            if self.degree(v) <= y.len() {
                count += self.neighbors(v).iter().filter(|&&w| y.contains(w)).count();
            } else {
                count += y.iter().filter(|&&w| self.has_edge(v, w)).count();
            }
        }
        Ok(count)
    }

    /// Subgraph induced by `X`, relabeled to `0..|X|`. The returned map
    /// sends each new id to its original vertex.
    pub fn induced_subgraph(&self, x: &VertexSet) -> Result<(Graph, Vec<usize>), GraphError> {
        self.check_set(x)?;
        let old_ids: Vec<usize> = x.iter().copied().collect();
        let mut new_id = vec![usize::MAX; self.n()];
        for (i, &v) in old_ids.iter().enumerate() {
            new_id[v] = i;
        }
        let adj = old_ids
            .iter()
            .map(|&v| {
                self.neighbors(v)
                    .iter()
                    .filter(|&&w| new_id[w] != usize::MAX)
                    .map(|&w| new_id[w])
                    .collect()
            })
            .collect();
        Ok((Graph { adj }, old_ids))
    }

    /// BFS distances from `src`; `None` marks unreachable vertices.
    pub fn bfs_distances(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n()];
        dist[src] = Some(0);
        let mut queue = std::collections::VecDeque::from([src]);
        while let Some(v) = queue.pop_front() {
            let dv = dist[v].unwrap();
            for &w in self.neighbors(v) {
                if dist[w].is_none() {
                    dist[w] = Some(dv + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        if self.n() == 0 {
            return true;
        }
        self.bfs_distances(0).iter().all(Option::is_some)
    }

    /// Length of a shortest cycle, or `None` for forests.
    ///
    /// BFS from every vertex; a non-tree edge seen at depth levels `a`, `b`
    /// closes a cycle of length `a + b + 1` through the root.
    pub fn girth(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for root in 0..self.n() {
            let mut dist = vec![usize::MAX; self.n()];
            let mut parent = vec![usize::MAX; self.n()];
            dist[root] = 0;
            let mut queue = std::collections::VecDeque::from([root]);
            while let Some(v) = queue.pop_front() {
                for &w in self.neighbors(v) {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        parent[w] = v;
                        queue.push_back(w);
                    } else if parent[v] != w {
                        let cycle = dist[v] + dist[w] + 1;
                        if best.is_none_or(|b| cycle < b) {
                            best = Some(cycle);
                        }
                    }
                }
            }
        }
        best
    }

    /// Searches for a clique on `size` vertices; returns one if present.
    pub fn find_clique(&self, size: usize) -> Option<Vec<usize>> {
        if size == 0 {
            return Some(Vec::new());
        }
        let mut chosen = Vec::with_capacity(size);
        let all: Vec<usize> = (0..self.n()).collect();
        if self.extend_clique(&mut chosen, &all, size) {
            Some(chosen)
        } else {
            None
        }
    }

    fn extend_clique(&self, chosen: &mut Vec<usize>, candidates: &[usize], size: usize) -> bool {
        if chosen.len() == size {
            return true;
        }
        let need = size - chosen.len();
        if candidates.len() < need {
            return false;
        }
        for (i, &v) in candidates.iter().enumerate() {
            if candidates.len() - i < need {
                return false;
            }
            let narrowed: Vec<usize> = candidates[i + 1..]
                .iter()
                .filter(|&&w| self.has_edge(v, w))
                .copied()
                .collect();
            chosen.push(v);
            if self.extend_clique(chosen, &narrowed, size) {
                return true;
            }
            chosen.pop();
        }
        false
    }
}

/// A set of vertex ids of some graph.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexSet {
    members: BTreeSet<usize>,
}

impl VertexSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn full(n: usize) -> Self {
        (0..n).collect()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.contains(&v)
    }

    pub fn insert(&mut self, v: usize) -> bool {
        self.members.insert(v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &usize> + '_ {
        self.members.iter()
    }

    pub fn max_element(&self) -> Option<usize> {
        self.members.iter().next_back().copied()
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.members.is_disjoint(&other.members)
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        VertexSet { members: self.members.union(&other.members).copied().collect() }
    }

    pub fn difference(&self, other: &VertexSet) -> VertexSet {
        VertexSet { members: self.members.difference(&other.members).copied().collect() }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.members.iter().copied().collect()
    }
}

impl FromIterator<usize> for VertexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        VertexSet { members: iter.into_iter().collect() }
    }
}

impl<const N: usize> From<[usize; N]> for VertexSet {
    fn from(items: [usize; N]) -> Self {
        items.into_iter().collect()
    }
}

impl From<&[usize]> for VertexSet {
    fn from(items: &[usize]) -> Self {
        items.iter().copied().collect()
    }
}

/// An injective, edge-preserving map from a pattern graph into a host.
/// `map[v]` is the host image of pattern vertex `v`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub map: Vec<usize>,
}

impl Embedding {
    pub fn new(map: Vec<usize>) -> Self {
        Embedding { map }
    }

    /// True iff the map is injective and sends every pattern edge to a host
    /// edge. Errors when the map length does not match the pattern.
    pub fn validate(&self, pattern: &Graph, host: &Graph) -> Result<bool, GraphError> {
        if self.map.len() != pattern.n() {
            return Err(GraphError::EmbeddingLengthMismatch {
                got: self.map.len(),
                expected: pattern.n(),
            });
        }
        let mut seen = vec![false; host.n()];
        for &img in &self.map {
            if img >= host.n() {
                return Err(GraphError::VertexOutOfRange(img, host.n()));
            }
            if seen[img] {
                return Ok(false);
            }
            seen[img] = true;
        }
        for (u, v) in pattern.edges() {
            if !host.has_edge(self.map[u], self.map[v]) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

/// Serialized form used by the JSON graph format.
#[derive(Serialize, Deserialize)]
struct JsonGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Text format: optional `#`-prefixed header comments, a `n m` line,
    /// then one `u v` line per edge with `u < v` in lexicographic order.
    pub fn to_text(&self, header_comment: Option<&str>) -> String {
        let mut out = String::new();
        if let Some(c) = header_comment {
            for line in c.lines() {
                out.push_str("# ");
                out.push_str(line);
                out.push('\n');
            }
        }
        out.push_str(&format!("{} {}\n", self.n(), self.edge_count()));
        for (u, v) in self.edges() {
            out.push_str(&format!("{} {}\n", u, v));
        }
        out
    }

    /// Parses the text format; returns the graph and any header comment.
    pub fn from_text(s: &str) -> Result<(Graph, Option<String>), GraphError> {
        let mut comment = String::new();
        let mut lines = s.lines().peekable();
        while let Some(line) = lines.peek() {
            if let Some(rest) = line.strip_prefix('#') {
                comment.push_str(rest.trim_start());
                comment.push('\n');
                lines.next();
            } else {
                break;
            }
        }
        let header = lines
            .next()
            .ok_or_else(|| GraphError::Parse("missing header line".into()))?;
        let mut it = header.split_whitespace();
        let n: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| GraphError::Parse(format!("bad header: {header:?}")))?;
        let m: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| GraphError::Parse(format!("bad header: {header:?}")))?;
        if it.next().is_some() {
            return Err(GraphError::Parse(format!("trailing tokens in header: {header:?}")));
        }
        let mut edges = Vec::with_capacity(m);
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let u: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| GraphError::Parse(format!("bad edge line: {line:?}")))?;
            let v: usize = it
                .next()
                .and_then(|t| t.parse().ok())
                .ok_or_else(|| GraphError::Parse(format!("bad edge line: {line:?}")))?;
            if it.next().is_some() {
                return Err(GraphError::Parse(format!("trailing tokens: {line:?}")));
            }
            if u >= v {
                return Err(GraphError::Parse(format!("edge {u} {v} not in u < v form")));
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(GraphError::Parse(format!(
                "header promises {m} edges, found {}",
                edges.len()
            )));
        }
        let g = Graph::from_edges(n, &edges)?;
        Ok((g, if comment.is_empty() { None } else { Some(comment.trim_end().to_string()) }))
    }

    /// JSON format: `{ "n": ..., "edges": [[u, v], ...] }` with `u < v`.
    pub fn to_json(&self) -> String {
        let j = JsonGraph { n: self.n(), edges: self.edges().collect() };
        serde_json::to_string(&j).expect("graph serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Graph, GraphError> {
        let j: JsonGraph = serde_json::from_str(s).map_err(|e| GraphError::Parse(e.to_string()))?;
        Graph::from_edges(j.n, &j.edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert_eq!(Graph::from_edges(3, &[(0, 0)]), Err(GraphError::SelfLoop(0)));
        assert_eq!(
            Graph::from_edges(3, &[(0, 1), (1, 0)]),
            Err(GraphError::DuplicateEdge(0, 1))
        );
        assert_eq!(
            Graph::from_edges(2, &[(0, 5)]),
            Err(GraphError::VertexOutOfRange(5, 2))
        );
    }

    #[test]
    fn external_neighborhood_examples() {
        let k4 = Graph::complete(4);
        assert_eq!(
            k4.external_neighborhood(&[0].into()).unwrap(),
            [1, 2, 3].into()
        );
        let p4 = path(4);
        assert_eq!(
            p4.external_neighborhood(&[1, 2].into()).unwrap(),
            [0, 3].into()
        );
        assert_eq!(
            k4.external_neighborhood(&VertexSet::full(4)).unwrap(),
            VertexSet::new()
        );
        assert!(k4.external_neighborhood(&[7].into()).is_err());
    }

    #[test]
    fn ordered_edge_count_examples() {
        let e = Graph::from_edges(2, &[(0, 1)]).unwrap();
        // an edge inside the intersection is counted twice
        assert_eq!(e.ordered_edge_count(&[0, 1].into(), &[0, 1].into()).unwrap(), 2);

        let tri = Graph::complete(3);
        assert_eq!(tri.ordered_edge_count(&[0, 1].into(), &[2].into()).unwrap(), 2);
        assert_eq!(tri.ordered_edge_count(&[0, 1].into(), &[1, 2].into()).unwrap(), 3);
    }

    #[test]
    fn induced_subgraph_examples() {
        let k5 = Graph::complete(5);
        let (h, map) = k5.induced_subgraph(&[1, 2, 4].into()).unwrap();
        assert_eq!(h, Graph::complete(3));
        assert_eq!(map, vec![1, 2, 4]);

        let p4 = path(4);
        let (h, _) = p4.induced_subgraph(&[0, 2].into()).unwrap();
        assert_eq!(h.edge_count(), 0);

        // removing one vertex of a 5-cycle leaves a 4-vertex path
        let c5 = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
        let (h, _) = c5.induced_subgraph(&[0, 1, 2, 3].into()).unwrap();
        assert_eq!(h.edge_count(), 3);
        assert!(h.is_connected());
        assert_eq!(h.max_degree(), 2);
    }

    #[test]
    fn embedding_validation() {
        let k3 = Graph::complete(3);
        assert!(Embedding::new(vec![0, 1, 2]).validate(&k3, &k3).unwrap());
        assert!(!Embedding::new(vec![0, 0, 2]).validate(&k3, &k3).unwrap());
        let p3 = path(3);
        assert!(Embedding::new(vec![2, 0, 1]).validate(&p3, &k3).unwrap());
        assert!(matches!(
            Embedding::new(vec![0, 1]).validate(&k3, &k3),
            Err(GraphError::EmbeddingLengthMismatch { .. })
        ));
        // host edge missing
        let p3h = path(3);
        assert!(!Embedding::new(vec![0, 2, 1]).validate(&p3h, &p3h).unwrap());
    }

    #[test]
    fn girth_and_clique() {
        let c5 = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
        assert_eq!(c5.girth(), Some(5));
        assert_eq!(path(4).girth(), None);
        assert_eq!(Graph::complete(4).girth(), Some(3));

        assert!(Graph::complete(5).find_clique(5).is_some());
        assert!(Graph::complete(5).find_clique(6).is_none());
        assert!(c5.find_clique(3).is_none());
        let found = Graph::complete(4).find_clique(3).unwrap();
        assert_eq!(found.len(), 3);
    }

    #[test]
    fn text_round_trip() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (0, 3)]).unwrap();
        let s = g.to_text(Some("provenance"));
        let (h, comment) = Graph::from_text(&s).unwrap();
        assert_eq!(g, h);
        assert_eq!(comment.as_deref(), Some("provenance"));
        assert_eq!(h.to_text(Some("provenance")), s);

        let j = g.to_json();
        assert_eq!(Graph::from_json(&j).unwrap(), g);
    }

    #[test]
    fn text_rejects_malformed() {
        assert!(Graph::from_text("").is_err());
        assert!(Graph::from_text("2 1\n1 0\n").is_err()); // not u < v
        assert!(Graph::from_text("2 2\n0 1\n").is_err()); // edge count mismatch
    }
}
