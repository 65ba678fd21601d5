//! Labeled trees: Pruefer sequences, bounded-degree sampling, radius, and
//! the leaf / bare-path decomposition used by the spanning-tree embedder.
//!
//! A *bare path* is a path whose vertices all have degree two in the tree.
//! Deleting all leaves and looking at the leaves and bare paths of what
//! remains gives the *second level* of the same notions.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError, VertexSet};

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("a tree on {n} vertices needs {} edges, got {got}", n - 1)]
    WrongEdgeCount { n: usize, got: usize },
    #[error("edge set is not connected")]
    NotConnected,
    #[error("Pruefer entry {0} out of range for {1} vertices")]
    PrueferOutOfRange(usize, usize),
    #[error("maximum degree bound {delta} infeasible for {n} vertices")]
    InfeasibleDegreeBound { n: usize, delta: f64 },
    #[error("branching factor must be at least 1")]
    BadBranching,
    #[error("tree must be non-empty")]
    Empty,
    #[error("graph is disconnected, radius undefined")]
    Disconnected,
    #[error("malformed tree line: {0}")]
    Parse(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// A labeled tree on vertices `0..n`, stored as a validated graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Tree {
    g: Graph,
}

impl Tree {
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, TreeError> {
        if n == 0 {
            return Err(TreeError::Empty);
        }
        if edges.len() != n - 1 {
            return Err(TreeError::WrongEdgeCount { n, got: edges.len() });
        }
        let g = Graph::from_edges(n, edges)?;
        if !g.is_connected() {
            return Err(TreeError::NotConnected);
        }
        Ok(Tree { g })
    }

    /// The one-vertex tree.
    pub fn single() -> Self {
        Tree { g: Graph::empty(1) }
    }

    /// The path 0 - 1 - ... - (n-1).
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Tree::from_edges(n, &edges).expect("path is a tree")
    }

    pub fn n(&self) -> usize {
        self.g.n()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.g.degree(v)
    }

    pub fn max_degree(&self) -> usize {
        self.g.max_degree()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        self.g.neighbors(v)
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.g.edges()
    }

    pub fn graph(&self) -> &Graph {
        &self.g
    }

    pub fn into_graph(self) -> Graph {
        self.g
    }

    /// Tree radius via the diameter: for trees, radius = ceil(diam / 2).
    pub fn radius(&self) -> usize {
        if self.n() <= 1 {
            return 0;
        }
        let far = |src: usize| {
            let dist = self.g.bfs_distances(src);
            dist.iter()
                .enumerate()
                .map(|(v, d)| (d.unwrap(), v))
                .max()
                .unwrap()
        };
        let (_, a) = far(0);
        let (diam, _) = far(a);
        diam.div_ceil(2)
    }
}

/// Eccentricity-based radius of a connected graph: `min_u max_v dist(u, v)`.
pub fn radius(g: &Graph) -> Result<usize, TreeError> {
    if g.n() == 0 {
        return Err(TreeError::Empty);
    }
    let mut best = usize::MAX;
    for v in 0..g.n() {
        let dist = g.bfs_distances(v);
        let mut ecc = 0;
        for d in &dist {
            match d {
                Some(d) => ecc = ecc.max(*d),
                None => return Err(TreeError::Disconnected),
            }
        }
        best = best.min(ecc);
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Pruefer bijection
// ---------------------------------------------------------------------------

/// Decodes a Pruefer sequence into the unique labeled tree on
/// `seq.len() + 2` vertices with that sequence.
pub fn tree_from_pruefer(seq: &[usize]) -> Result<Tree, TreeError> {
    let n = seq.len() + 2;
    let mut degree = vec![1usize; n];
    for &s in seq {
        if s >= n {
            return Err(TreeError::PrueferOutOfRange(s, n));
        }
        degree[s] += 1;
    }
    let mut leaves: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let Reverse(leaf) = leaves.pop().expect("leaf available while decoding");
        edges.push((leaf, s));
        degree[s] -= 1;
        if degree[s] == 1 {
            leaves.push(Reverse(s));
        }
    }
    let Reverse(u) = leaves.pop().unwrap();
    let Reverse(v) = leaves.pop().unwrap();
    edges.push((u, v));
    Tree::from_edges(n, &edges)
}

/// Encodes a tree on at least two vertices as its Pruefer sequence;
/// inverse of [`tree_from_pruefer`].
pub fn pruefer_from_tree(t: &Tree) -> Vec<usize> {
    let n = t.n();
    if n < 2 {
        return Vec::new();
    }
    let mut degree: Vec<usize> = (0..n).map(|v| t.degree(v)).collect();
    let mut removed = vec![false; n];
    let mut leaves: BinaryHeap<Reverse<usize>> =
        (0..n).filter(|&v| degree[v] == 1).map(Reverse).collect();
    let mut seq = Vec::with_capacity(n - 2);
    for _ in 0..n - 2 {
        let Reverse(leaf) = leaves.pop().unwrap();
        removed[leaf] = true;
        let parent = *t
            .neighbors(leaf)
            .iter()
            .find(|&&w| !removed[w])
            .expect("non-removed neighbor of a leaf");
        seq.push(parent);
        degree[parent] -= 1;
        if degree[parent] == 1 {
            leaves.push(Reverse(parent));
        }
    }
    seq
}

// ---------------------------------------------------------------------------
// Samplers and constructions
// ---------------------------------------------------------------------------

/// A sampled tree plus whether it came from the uniform rejection sampler
/// or the non-uniform fallback construction.
#[derive(Clone, Debug)]
pub struct SampledTree {
    pub tree: Tree,
    pub uniform: bool,
}

const MAX_REJECTION_ATTEMPTS: usize = 10_000;

/// Samples a tree with maximum degree at most `delta`, uniform over that
/// class: uniform Pruefer sequences are drawn and rejected while any label
/// occurs more than `floor(delta) - 1` times. If rejection keeps failing
/// (paths are rare among all trees, for example), a flagged non-uniform
/// construction is returned instead.
pub fn random_bounded_degree_tree(
    n: usize,
    delta: f64,
    seed: u64,
) -> Result<SampledTree, TreeError> {
    if n == 0 {
        return Err(TreeError::Empty);
    }
    let feasible = match n {
        1 => true,
        2 => delta >= 1.0,
        _ => delta >= 2.0,
    };
    if !feasible {
        return Err(TreeError::InfeasibleDegreeBound { n, delta });
    }
    if n == 1 {
        return Ok(SampledTree { tree: Tree::single(), uniform: true });
    }
    if n == 2 {
        return Ok(SampledTree { tree: Tree::path(2), uniform: true });
    }

    let cap = (delta.floor() as usize).saturating_sub(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0usize; n];
    'attempts: for _ in 0..MAX_REJECTION_ATTEMPTS {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut seq = Vec::with_capacity(n - 2);
        for _ in 0..n - 2 {
            let s = rng.gen_range(0..n);
            counts[s] += 1;
            if counts[s] > cap {
                continue 'attempts;
            }
            seq.push(s);
        }
        let tree = tree_from_pruefer(&seq)?;
        debug_assert!(tree.max_degree() as f64 <= delta);
        return Ok(SampledTree { tree, uniform: true });
    }

    // Fallback: attach each vertex (in random order) to a random earlier
    // vertex that still has degree capacity. Admissible but not uniform.
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..n).collect();
    use rand::seq::SliceRandom;
    order.shuffle(&mut rng);
    let max_deg = delta.floor() as usize;
    let mut degree = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    for i in 1..n {
        let candidates: Vec<usize> = order[..i]
            .iter()
            .copied()
            .filter(|&v| degree[v] < max_deg)
            .collect();
        let parent = candidates[rng.gen_range(0..candidates.len())];
        let child = order[i];
        degree[parent] += 1;
        degree[child] += 1;
        edges.push((parent, child));
    }
    Ok(SampledTree { tree: Tree::from_edges(n, &edges)?, uniform: false })
}

/// Rooted `b`-ary tree on `n` vertices in BFS labeling: every level except
/// possibly the last is full; vertex `i >= 1` hangs below `(i - 1) / b`.
pub fn complete_ary_tree(n: usize, b: usize) -> Result<Tree, TreeError> {
    if b == 0 {
        return Err(TreeError::BadBranching);
    }
    if n == 0 {
        return Err(TreeError::Empty);
    }
    let edges: Vec<_> = (1..n).map(|i| ((i - 1) / b, i)).collect();
    Tree::from_edges(n, &edges)
}

// ---------------------------------------------------------------------------
// Decomposition
// ---------------------------------------------------------------------------

/// Leaf and bare-path structure of a tree, at the first and second level.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeDecomposition {
    /// Degree-one vertices.
    pub leaves: VertexSet,
    /// Neighbors of the leaves.
    pub leaf_neighbors: VertexSet,
    /// Degree-one vertices of the tree with all leaves removed.
    pub second_level_leaves: VertexSet,
    /// All maximal bare paths, each lexicographically oriented, sorted.
    pub bare_paths: Vec<Vec<usize>>,
    /// A longest bare path (ties broken by smallest sequence); empty if
    /// the tree has no degree-two vertex.
    pub longest_bare_path: Vec<usize>,
    /// Maximal bare paths of the tree with all leaves removed.
    pub second_level_bare_paths: Vec<Vec<usize>>,
}

/// Maximal chains of `active` vertices whose degree inside `active` is
/// exactly two. Each chain is reported as a path sequence in its
/// lexicographically smaller orientation.
fn bare_chains(t: &Tree, active: &[bool]) -> Vec<Vec<usize>> {
    let n = t.n();
    let deg_in = |v: usize| t.neighbors(v).iter().filter(|&&w| active[w]).count();
    let in_chain: Vec<bool> = (0..n).map(|v| active[v] && deg_in(v) == 2).collect();
    let mut visited = vec![false; n];
    let mut chains = Vec::new();
    for v in 0..n {
        if !in_chain[v] || visited[v] {
            continue;
        }
        let step = |u: usize, prev: usize| {
            t.neighbors(u).iter().copied().find(|&w| in_chain[w] && w != prev)
        };
        // chain components are paths (the tree is acyclic): walk from v to
        // one endpoint, then collect the whole path from there
        let mut start = v;
        let mut prev = usize::MAX;
        while let Some(w) = step(start, prev) {
            prev = start;
            start = w;
        }
        let mut path = vec![start];
        visited[start] = true;
        let mut prev = usize::MAX;
        let mut cur = start;
        while let Some(next) = step(cur, prev) {
            visited[next] = true;
            path.push(next);
            prev = cur;
            cur = next;
        }
        let reversed: Vec<usize> = path.iter().rev().copied().collect();
        chains.push(if reversed < path { reversed } else { path });
    }
    chains.sort();
    chains
}

/// Computes the full leaf / bare-path decomposition.
pub fn decompose(t: &Tree) -> TreeDecomposition {
    let n = t.n();
    let leaves: VertexSet = (0..n).filter(|&v| t.degree(v) == 1).collect();
    let mut leaf_neighbors = VertexSet::new();
    for &v in leaves.iter() {
        for &w in t.neighbors(v) {
            leaf_neighbors.insert(w);
        }
    }

    let all = vec![true; n];
    let bare_paths = bare_chains(t, &all);
    let longest_bare_path = bare_paths
        .iter()
        .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b.cmp(a)))
        .cloned()
        .unwrap_or_default();

    let active: Vec<bool> = (0..n).map(|v| !leaves.contains(v)).collect();
    let second_level_leaves: VertexSet = (0..n)
        .filter(|&v| active[v])
        .filter(|&v| t.neighbors(v).iter().filter(|&&w| active[w]).count() == 1)
        .collect();
    let second_level_bare_paths = bare_chains(t, &active);

    TreeDecomposition {
        leaves,
        leaf_neighbors,
        second_level_leaves,
        bare_paths,
        longest_bare_path,
        second_level_bare_paths,
    }
}

/// Longest-bare-path size, leaf count, and whether
/// `2 (|V(P)| + 1) (|L| - 1) >= n` holds (it does for every tree).
pub fn verify_path_or_leaves(t: &Tree) -> (usize, usize, bool) {
    let dec = decompose(t);
    let p = dec.longest_bare_path.len();
    let l = dec.leaves.len();
    let ok = 2 * (p + 1) * l.saturating_sub(1) >= t.n();
    (p, l, ok)
}

// ---------------------------------------------------------------------------
// Case classification
// ---------------------------------------------------------------------------

/// Thresholds steering the spanning-tree embedding case split.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseThresholds {
    /// Minimum vertex count of a usable bare path.
    pub tau_path: usize,
    /// Minimum number of leaves (first or second level).
    pub tau_leaves: usize,
}

impl CaseThresholds {
    /// The defaults scale as `50 * delta * m` and `25 * delta * m^2`; these
    /// exceed `n` for small instances, where explicit overrides are the
    /// intended usage.
    pub fn defaults(delta: f64, m: usize) -> Self {
        CaseThresholds {
            tau_path: (50.0 * delta * m as f64).ceil() as usize,
            tau_leaves: (25.0 * delta * (m * m) as f64).ceil() as usize,
        }
    }
}

/// Which embedding pipeline a tree routes through.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TreeCase {
    /// Case 1: a first-level bare path of at least `tau_path` vertices.
    LongBarePath,
    /// Case 2: at least `tau_leaves` leaves and a second-level bare path
    /// of at least `tau_path` vertices.
    LeavesAndSecondLevelPath,
    /// Case 3: at least `tau_leaves` leaves on both levels.
    TwoLeafLevels,
}

/// Decomposition statistics carried by a failed classification.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CaseStats {
    pub longest_bare_path: usize,
    pub leaves: usize,
    pub longest_second_level_path: usize,
    pub second_level_leaves: usize,
}

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error(
        "no case applies: bare path {}, leaves {}, second-level path {}, second-level leaves {} \
         against tau_path {tau_path}, tau_leaves {tau_leaves}",
        stats.longest_bare_path,
        stats.leaves,
        stats.longest_second_level_path,
        stats.second_level_leaves
    )]
    NoCase { stats: CaseStats, tau_path: usize, tau_leaves: usize },
}

/// Routes a tree to its embedding case; total when the thresholds satisfy
/// the leaf-or-path counting inequality, otherwise `NoCase` is possible.
pub fn classify_case(t: &Tree, thresholds: &CaseThresholds) -> Result<TreeCase, ClassifyError> {
    let dec = decompose(t);
    classify_decomposition(&dec, thresholds)
}

pub(crate) fn classify_decomposition(
    dec: &TreeDecomposition,
    thresholds: &CaseThresholds,
) -> Result<TreeCase, ClassifyError> {
    let longest_second = dec
        .second_level_bare_paths
        .iter()
        .map(Vec::len)
        .max()
        .unwrap_or(0);
    if dec.longest_bare_path.len() >= thresholds.tau_path {
        return Ok(TreeCase::LongBarePath);
    }
    if dec.leaves.len() >= thresholds.tau_leaves {
        if longest_second >= thresholds.tau_path {
            return Ok(TreeCase::LeavesAndSecondLevelPath);
        }
        if dec.second_level_leaves.len() >= thresholds.tau_leaves {
            return Ok(TreeCase::TwoLeafLevels);
        }
    }
    Err(ClassifyError::NoCase {
        stats: CaseStats {
            longest_bare_path: dec.longest_bare_path.len(),
            leaves: dec.leaves.len(),
            longest_second_level_path: longest_second,
            second_level_leaves: dec.second_level_leaves.len(),
        },
        tau_path: thresholds.tau_path,
        tau_leaves: thresholds.tau_leaves,
    })
}

// ---------------------------------------------------------------------------
// File formats
// ---------------------------------------------------------------------------

impl Tree {
    /// Parent-array line `n p_1 ... p_{n-1}` with vertex 0 as root and
    /// `p_i` the parent of vertex `i`.
    pub fn to_parent_line(&self) -> String {
        let mut parent = vec![usize::MAX; self.n()];
        let dist = self.g.bfs_distances(0);
        for v in 0..self.n() {
            for &w in self.neighbors(v) {
                if dist[w] < dist[v] {
                    parent[v] = w;
                }
            }
        }
        let mut out = self.n().to_string();
        for p in parent.iter().skip(1) {
            out.push(' ');
            out.push_str(&p.to_string());
        }
        out
    }

    pub fn from_parent_line(line: &str) -> Result<Tree, TreeError> {
        let mut it = line.split_whitespace();
        let n: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| TreeError::Parse(format!("missing vertex count in {line:?}")))?;
        let parents: Vec<usize> = it
            .map(|t| t.parse().map_err(|_| TreeError::Parse(format!("bad token {t:?}"))))
            .collect::<Result<_, _>>()?;
        if parents.len() + 1 != n {
            return Err(TreeError::Parse(format!(
                "expected {} parents, got {}",
                n - 1,
                parents.len()
            )));
        }
        let edges: Vec<_> = parents.iter().enumerate().map(|(i, &p)| (p, i + 1)).collect();
        Tree::from_edges(n, &edges)
    }

    /// Pruefer line `n : s_1 ... s_{n-2}`.
    pub fn to_pruefer_line(&self) -> String {
        let seq = pruefer_from_tree(self);
        let mut out = format!("{} :", self.n());
        for s in seq {
            out.push(' ');
            out.push_str(&s.to_string());
        }
        out
    }

    pub fn from_pruefer_line(line: &str) -> Result<Tree, TreeError> {
        let (head, tail) = line
            .split_once(':')
            .ok_or_else(|| TreeError::Parse(format!("missing ':' in {line:?}")))?;
        let n: usize = head
            .trim()
            .parse()
            .map_err(|_| TreeError::Parse(format!("bad vertex count in {line:?}")))?;
        let seq: Vec<usize> = tail
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| TreeError::Parse(format!("bad token {t:?}"))))
            .collect::<Result<_, _>>()?;
        match n {
            0 => Err(TreeError::Empty),
            1 if seq.is_empty() => Ok(Tree::single()),
            _ if seq.len() + 2 == n => tree_from_pruefer(&seq),
            _ => Err(TreeError::Parse(format!(
                "sequence length {} does not match n = {}",
                seq.len(),
                n
            ))),
        }
    }
}
