//! Vertex-expansion checking.
//!
//! A graph on `n` vertices is an `(n, d)`-expander, with `m = ceil(n / 2d)`,
//! when
//!
//! * (E1) every vertex set `X` with `1 <= |X| < m` has external neighborhood
//!   of size at least `d * |X|`, and
//! * (E2) every two disjoint sets of size `m` span at least one edge.
//!
//! Both conditions are universally quantified, so the exact checker
//! enumerates candidate sets (behind a size guard) and the sampled checker
//! is one-sided: it can produce a counterexample but never certifies a
//! pass. All `d * |X|` comparisons are carried out in exact rational
//! arithmetic over the binary value of `d` so that boundary cases never
//! depend on float rounding.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combos::{binomial, count_at_least, for_each_subset, sample_subset, sample_subset_of};
use crate::graph::{Graph, VertexSet};

/// Default cap on the number of enumerated sets in exact mode.
pub const DEFAULT_EXACT_GUARD: u64 = 20_000_000;

/// Trials used to verify a candidate partition when exact enumeration is
/// too large.
const PARTITION_SAMPLED_TRIALS: u64 = 200;

#[derive(Debug, Error, PartialEq)]
pub enum ExpansionError {
    #[error("expansion factor d must be positive and finite, got {0}")]
    BadExpansionFactor(f64),
    #[error("graph must have at least one vertex")]
    EmptyGraph,
    #[error("too large for exact mode: {sets} sets exceed the guard {guard}")]
    TooLargeForExact { sets: u64, guard: u64 },
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
}

/// `m(n, d) = ceil(n / 2d)`, the set-size threshold of the expander
/// predicate, computed with exact comparisons.
pub fn m_param(n: usize, d: f64) -> Result<usize, ExpansionError> {
    if !(d.is_finite() && d > 0.0) {
        return Err(ExpansionError::BadExpansionFactor(d));
    }
    if n == 0 {
        return Err(ExpansionError::EmptyGraph);
    }
    // smallest m with 2d * m >= n, starting from a safe underestimate
    let estimate = (n as f64 / (2.0 * d)).ceil();
    let mut m: usize = if estimate.is_finite() && estimate >= 4.0 {
        estimate as usize - 3
    } else {
        1
    };
    while crate::combos::cmp_scaled(m as u64, 2.0 * d, n as u64) == std::cmp::Ordering::Less {
        m += 1;
    }
    Ok(m.max(1))
}

/// Parameters of one expander check; `m` is always the derived threshold,
/// never user-supplied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpanderParams {
    n: usize,
    d: f64,
    m: usize,
}

impl ExpanderParams {
    pub fn new(n: usize, d: f64) -> Result<Self, ExpansionError> {
        Ok(ExpanderParams { n, d, m: m_param(n, d)? })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn m(&self) -> usize {
        self.m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMode {
    Exact,
    Sampled { trials: u64, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    /// A set violating (E1): `|N(X)| < d |X|`.
    E1 { x: Vec<usize>, neighborhood_size: usize },
    /// A disjoint pair of m-sets violating (E2): no edge between them.
    E2 { x: Vec<usize>, y: Vec<usize> },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Pass,
    FailE1,
    FailE2,
    /// Sampled mode found no violation; this is evidence, not proof.
    Unknown,
}

/// Outcome of an expander check, including a re-checkable witness on
/// failure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpanderVerdict {
    pub status: VerdictStatus,
    pub witness: Option<Witness>,
    pub mode: CheckMode,
    pub d: f64,
    pub m: usize,
}

impl ExpanderVerdict {
    pub fn is_pass(&self) -> bool {
        self.status == VerdictStatus::Pass
    }

    pub fn is_fail(&self) -> bool {
        matches!(self.status, VerdictStatus::FailE1 | VerdictStatus::FailE2)
    }

    /// Re-checks the stored witness against the raw definition.
    pub fn witness_revalidates(&self, g: &Graph) -> bool {
        match &self.witness {
            None => !self.is_fail(),
            Some(Witness::E1 { x, neighborhood_size }) => {
                if x.is_empty() || x.len() >= self.m {
                    return false;
                }
                let xs: VertexSet = x.iter().copied().collect();
                match g.external_neighborhood(&xs) {
                    Ok(nbhd) => {
                        nbhd.len() == *neighborhood_size
                            && !count_at_least(nbhd.len() as u64, self.d, x.len() as u64)
                    }
                    Err(_) => false,
                }
            }
            Some(Witness::E2 { x, y }) => {
                let xs: VertexSet = x.iter().copied().collect();
                let ys: VertexSet = y.iter().copied().collect();
                xs.len() == self.m
                    && ys.len() == self.m
                    && xs.is_disjoint(&ys)
                    && g.ordered_edge_count(&xs, &ys) == Ok(0)
            }
        }
    }
}

fn exact_cost(n: usize, m: usize) -> u64 {
    let mut cost: u64 = 0;
    for k in 1..m.min(n + 1) {
        cost = cost.saturating_add(binomial(n, k));
    }
    if 2 * m <= n {
        cost = cost.saturating_add(
            binomial(n, m).saturating_mul(binomial(n - m, m)) / 2,
        );
    }
    cost
}

/// Marks `N(X)` in `mask` (a reusable buffer) and returns its size.
fn neighborhood_mask(g: &Graph, x: &[usize], mask: &mut [bool], touched: &mut Vec<usize>) -> usize {
    for &v in touched.iter() {
        mask[v] = false;
    }
    touched.clear();
    for &v in x {
        mask[v] = true;
        touched.push(v);
    }
    let mut size = 0;
    for &v in x {
        for &w in g.neighbors(v) {
            if !mask[w] {
                mask[w] = true;
                touched.push(w);
                size += 1;
            }
        }
    }
    size
}

/// Exhaustive expander check with the default enumeration guard.
pub fn check_expander_exact(g: &Graph, d: f64) -> Result<ExpanderVerdict, ExpansionError> {
    check_expander_exact_guarded(g, d, DEFAULT_EXACT_GUARD)
}

/// Exhaustive expander check. Fails E1 with the smallest violating set
/// (lexicographically first among those), then E2 with the first violating
/// pair; refuses when the enumeration exceeds `guard`.
pub fn check_expander_exact_guarded(
    g: &Graph,
    d: f64,
    guard: u64,
) -> Result<ExpanderVerdict, ExpansionError> {
    let params = ExpanderParams::new(g.n(), d)?;
    let (n, m) = (params.n, params.m);
    let cost = exact_cost(n, m);
    if cost > guard {
        return Err(ExpansionError::TooLargeForExact { sets: cost, guard });
    }

    let verdict = |status, witness| ExpanderVerdict {
        status,
        witness,
        mode: CheckMode::Exact,
        d,
        m,
    };

    let pool: Vec<usize> = (0..n).collect();
    let mut mask = vec![false; n];
    let mut touched = Vec::new();

    // (E1), by increasing set size
    for k in 1..=m.saturating_sub(1).min(n) {
        let mut found: Option<Witness> = None;
        for_each_subset(&pool, k, &mut |x| {
            let size = neighborhood_mask(g, x, &mut mask, &mut touched);
            if !count_at_least(size as u64, d, k as u64) {
                found = Some(Witness::E1 { x: x.to_vec(), neighborhood_size: size });
                return false;
            }
            true
        });
        if let Some(w) = found {
            return Ok(verdict(VerdictStatus::FailE1, Some(w)));
        }
    }

    // (E2): enumerate unordered disjoint pairs via min(X) < min(Y)
    if 2 * m <= n {
        let mut found: Option<Witness> = None;
        for_each_subset(&pool, m, &mut |x| {
            // vertices adjacent to X (X itself marked too; Y is disjoint anyway)
            neighborhood_mask(g, x, &mut mask, &mut touched);
            let min_x = x[0];
            let y_pool: Vec<usize> = (min_x + 1..n).filter(|v| !x.contains(v)).collect();
            for_each_subset(&y_pool, m, &mut |y| {
                if y.iter().all(|&v| !mask[v]) {
                    found = Some(Witness::E2 { x: x.to_vec(), y: y.to_vec() });
                    return false;
                }
                true
            });
            found.is_none()
        });
        if let Some(w) = found {
            return Ok(verdict(VerdictStatus::FailE2, Some(w)));
        }
    }

    Ok(verdict(VerdictStatus::Pass, None))
}

/// One-sided Monte-Carlo refutation: draws sets of every size `1..m` for
/// (E1) and disjoint m-pairs for (E2). Finding a violation yields a
/// definite failure; finding none yields `Unknown`, never `Pass`.
pub fn check_expander_sampled(
    g: &Graph,
    d: f64,
    trials: u64,
    seed: u64,
) -> Result<ExpanderVerdict, ExpansionError> {
    if trials == 0 {
        return Err(ExpansionError::NoTrials);
    }
    let params = ExpanderParams::new(g.n(), d)?;
    let (n, m) = (params.n, params.m);
    let mode = CheckMode::Sampled { trials, seed };
    let verdict = |status, witness| ExpanderVerdict { status, witness, mode, d, m };

    let mut mask = vec![false; n];
    let mut touched = Vec::new();
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial);
        for k in 1..=m.saturating_sub(1).min(n) {
            let x = sample_subset(&mut rng, n, k);
            let size = neighborhood_mask(g, &x, &mut mask, &mut touched);
            if !count_at_least(size as u64, d, k as u64) {
                return Ok(verdict(
                    VerdictStatus::FailE1,
                    Some(Witness::E1 { x, neighborhood_size: size }),
                ));
            }
        }
        if 2 * m <= n {
            let x = sample_subset(&mut rng, n, m);
            neighborhood_mask(g, &x, &mut mask, &mut touched);
            let complement: Vec<usize> = (0..n).filter(|v| !x.contains(v)).collect();
            let y = sample_subset_of(&mut rng, &complement, m);
            if y.iter().all(|&v| !mask[v]) {
                return Ok(verdict(VerdictStatus::FailE2, Some(Witness::E2 { x, y })));
            }
        }
    }
    Ok(verdict(VerdictStatus::Unknown, None))
}

/// For disjoint `X`, `Y` with `|X| >= m` and `|Y| >= 2m` in a graph whose
/// disjoint m-sets always span an edge, the edge count is at least
/// `|X| |Y| / 4m`. Returns whether the instance satisfies that bound
/// (compared in exact integer arithmetic).
pub fn verify_density_bound(
    g: &Graph,
    m: usize,
    x: &VertexSet,
    y: &VertexSet,
) -> Result<bool, ExpansionError> {
    if m == 0 {
        return Err(ExpansionError::Precondition("m must be positive".into()));
    }
    if !x.is_disjoint(y) {
        return Err(ExpansionError::Precondition("X and Y must be disjoint".into()));
    }
    if x.len() < m || y.len() < 2 * m {
        return Err(ExpansionError::Precondition(format!(
            "need |X| >= m and |Y| >= 2m, got |X|={}, |Y|={}, m={}",
            x.len(),
            y.len(),
            m
        )));
    }
    let e = g.ordered_edge_count(x, y)? as u128;
    Ok(e * 4 * m as u128 >= x.len() as u128 * y.len() as u128)
}

/// Vertices outside `W` with at most `m - 1` neighbors inside `W`. The
/// hypothesis `|W| >= m^2` is required; under (E2)-style edge coverage
/// between the complement and `W` there are at most `m - 1` of them.
pub fn exceptional_vertices(
    g: &Graph,
    w: &VertexSet,
    m: usize,
) -> Result<VertexSet, ExpansionError> {
    if m == 0 {
        return Err(ExpansionError::Precondition("m must be positive".into()));
    }
    if w.len() < m * m {
        return Err(ExpansionError::Precondition(format!(
            "|W| = {} is below the required m^2 = {}",
            w.len(),
            m * m
        )));
    }
    if let Some(v) = w.max_element() {
        if v >= g.n() {
            return Err(ExpansionError::Graph(crate::graph::GraphError::VertexOutOfRange(
                v,
                g.n(),
            )));
        }
    }
    Ok((0..g.n())
        .filter(|&v| !w.contains(v))
        .filter(|&v| g.neighbors(v).iter().filter(|&&u| w.contains(u)).count() < m)
        .collect())
}

/// A verified partition of the vertex set: each part `U_i` comes with its
/// per-part expansion factor `d_i = (|U_i| / 5n) * d`, and every checked set
/// `X` with `1 <= |X| < m` satisfies `|N(X) ∩ U_i| >= d_i |X|`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Partition {
    pub parts: Vec<VertexSet>,
    pub part_expansions: Vec<f64>,
    /// How the partition was verified.
    pub mode: CheckMode,
    /// Number of resampling attempts consumed (1 = first try verified).
    pub attempts: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PartitionWitness {
    pub x: Vec<usize>,
    pub part: usize,
    pub intersection_size: usize,
    pub required: f64,
}

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("part sizes sum to {got}, graph has {n} vertices")]
    SizeMismatch { got: usize, n: usize },
    #[error("no parts requested")]
    NoParts,
    #[error("partition verification failed after {retries} attempts")]
    RetriesExhausted { retries: u64, last_witness: Option<PartitionWitness> },
    #[error(transparent)]
    Expansion(#[from] ExpansionError),
}

/// Draws uniformly random partitions with the requested part sizes and
/// re-verifies the per-part expansion inequality until one passes
/// (exactly when the enumeration fits the guard, by sampling otherwise).
pub fn partition_vertices(
    g: &Graph,
    d: f64,
    sizes: &[usize],
    seed: u64,
    max_retries: u64,
) -> Result<Partition, PartitionError> {
    let n = g.n();
    if sizes.is_empty() {
        return Err(PartitionError::NoParts);
    }
    let total: usize = sizes.iter().sum();
    if total != n {
        return Err(PartitionError::SizeMismatch { got: total, n });
    }
    let m = m_param(n, d)?;
    let d_parts: Vec<f64> = sizes
        .iter()
        .map(|&s| (s as f64 / (5.0 * n as f64)) * d)
        .collect();

    let e1_cost = (1..m.min(n + 1)).fold(0u64, |acc, k| acc.saturating_add(binomial(n, k)));
    let exact = e1_cost <= DEFAULT_EXACT_GUARD;
    let mode = if exact {
        CheckMode::Exact
    } else {
        CheckMode::Sampled { trials: PARTITION_SAMPLED_TRIALS, seed }
    };

    let mut last_witness = None;
    for attempt in 0..max_retries.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut rng);
        let mut parts: Vec<VertexSet> = Vec::with_capacity(sizes.len());
        let mut part_of = vec![usize::MAX; n];
        let mut offset = 0;
        for (i, &s) in sizes.iter().enumerate() {
            let chunk = &order[offset..offset + s];
            for &v in chunk {
                part_of[v] = i;
            }
            parts.push(chunk.iter().copied().collect());
            offset += s;
        }

        let witness = if exact {
            verify_partition_exact(g, m, &d_parts, &part_of)
        } else {
            verify_partition_sampled(g, m, &d_parts, &part_of, &mut rng)
        };
        match witness {
            None => {
                return Ok(Partition {
                    parts,
                    part_expansions: d_parts,
                    mode,
                    attempts: attempt + 1,
                })
            }
            some => last_witness = some,
        }
    }
    Err(PartitionError::RetriesExhausted { retries: max_retries.max(1), last_witness })
}

fn check_parts(
    g: &Graph,
    x: &[usize],
    d_parts: &[f64],
    part_of: &[usize],
    counts: &mut [usize],
    mask: &mut [bool],
    touched: &mut Vec<usize>,
) -> Option<PartitionWitness> {
    counts.iter_mut().for_each(|c| *c = 0);
    for &v in touched.iter() {
        mask[v] = false;
    }
    touched.clear();
    for &v in x {
        mask[v] = true;
        touched.push(v);
    }
    for &v in x {
        for &w in g.neighbors(v) {
            if !mask[w] {
                mask[w] = true;
                touched.push(w);
                counts[part_of[w]] += 1;
            }
        }
    }
    for (i, (&count, &di)) in counts.iter().zip(d_parts).enumerate() {
        if !count_at_least(count as u64, di, x.len() as u64) {
            return Some(PartitionWitness {
                x: x.to_vec(),
                part: i,
                intersection_size: count,
                required: di * x.len() as f64,
            });
        }
    }
    None
}

fn verify_partition_exact(
    g: &Graph,
    m: usize,
    d_parts: &[f64],
    part_of: &[usize],
) -> Option<PartitionWitness> {
    let n = g.n();
    let pool: Vec<usize> = (0..n).collect();
    let mut counts = vec![0usize; d_parts.len()];
    let mut mask = vec![false; n];
    let mut touched = Vec::new();
    let mut witness = None;
    for k in 1..=m.saturating_sub(1).min(n) {
        for_each_subset(&pool, k, &mut |x| {
            witness = check_parts(g, x, d_parts, part_of, &mut counts, &mut mask, &mut touched);
            witness.is_none()
        });
        if witness.is_some() {
            break;
        }
    }
    witness
}

fn verify_partition_sampled(
    g: &Graph,
    m: usize,
    d_parts: &[f64],
    part_of: &[usize],
    rng: &mut ChaCha8Rng,
) -> Option<PartitionWitness> {
    let n = g.n();
    let mut counts = vec![0usize; d_parts.len()];
    let mut mask = vec![false; n];
    let mut touched = Vec::new();
    for _ in 0..PARTITION_SAMPLED_TRIALS {
        for k in 1..=m.saturating_sub(1).min(n) {
            let x = sample_subset(rng, n, k);
            let w = check_parts(g, &x, d_parts, part_of, &mut counts, &mut mask, &mut touched);
            if w.is_some() {
                return w;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, &(0..n - 1).map(|i| (i, i + 1)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn m_param_examples() {
        assert_eq!(m_param(100, 10.0).unwrap(), 5);
        assert_eq!(m_param(7, 3.0).unwrap(), 2);
        assert_eq!(m_param(6, 2.0).unwrap(), 2);
        assert_eq!(m_param(8, 1.0).unwrap(), 4);
        assert!(m_param(5, 0.0).is_err());
        assert!(m_param(5, -1.0).is_err());
        assert!(m_param(0, 1.0).is_err());
    }

    #[test]
    fn m_param_matches_integer_arithmetic() {
        // d = i/8 is exactly representable, so ceil(n / 2d) = ceil(4n / i)
        for n in 1..=100usize {
            for i in 1..=200u64 {
                let d = i as f64 / 8.0;
                let expected = (4 * n as u64).div_ceil(i) as usize;
                assert_eq!(m_param(n, d).unwrap(), expected.max(1), "n={n}, d={d}");
            }
        }
    }

    #[test]
    fn complete_graph_passes() {
        // K_6 with d = 2: m = 2, singletons expand 5 >= 2, complete E2
        let v = check_expander_exact(&Graph::complete(6), 2.0).unwrap();
        assert_eq!(v.status, VerdictStatus::Pass);
        assert!(v.witness_revalidates(&Graph::complete(6)));
    }

    #[test]
    fn path_fails_e1_at_endpoint() {
        // 5-vertex path with d = 2: m = 2, an endpoint has one neighbor
        let g = path(5);
        let v = check_expander_exact(&g, 2.0).unwrap();
        assert_eq!(v.status, VerdictStatus::FailE1);
        assert_eq!(
            v.witness,
            Some(Witness::E1 { x: vec![0], neighborhood_size: 1 })
        );
        assert!(v.witness_revalidates(&g));
    }

    #[test]
    fn disjoint_cliques_fail() {
        // two K_5s, d = 2 (m = 3): a same-clique pair already fails E1,
        // and the minimal-size witness rule surfaces that first
        let mut edges = Vec::new();
        for c in 0..2 {
            for i in 0..5 {
                for j in i + 1..5 {
                    edges.push((5 * c + i, 5 * c + j));
                }
            }
        }
        let g = Graph::from_edges(10, &edges).unwrap();
        let v = check_expander_exact(&g, 2.0).unwrap();
        assert_eq!(v.status, VerdictStatus::FailE1);
        assert!(v.witness_revalidates(&g));

        // two K_6s with d = 2 (m = 3) satisfy E1, so the missing cross
        // edges surface as an E2 witness with one m-set per clique
        let mut edges = Vec::new();
        for c in 0..2 {
            for i in 0..6 {
                for j in i + 1..6 {
                    edges.push((6 * c + i, 6 * c + j));
                }
            }
        }
        let g = Graph::from_edges(12, &edges).unwrap();
        let v = check_expander_exact(&g, 2.0).unwrap();
        assert_eq!(v.status, VerdictStatus::FailE2);
        match &v.witness {
            Some(Witness::E2 { x, y }) => {
                assert!(x.iter().all(|&u| u < 6) != y.iter().all(|&u| u < 6));
            }
            other => panic!("expected E2 witness, got {other:?}"),
        }
        assert!(v.witness_revalidates(&g));
    }

    #[test]
    fn exact_guard_refuses() {
        let g = Graph::complete(40);
        match check_expander_exact_guarded(&g, 1.0, 1000) {
            Err(ExpansionError::TooLargeForExact { .. }) => {}
            other => panic!("expected guard refusal, got {other:?}"),
        }
    }

    #[test]
    fn sampled_is_one_sided() {
        let v = check_expander_sampled(&Graph::complete(20), 3.0, 1000, 1).unwrap();
        assert_eq!(v.status, VerdictStatus::Unknown);

        // 5-vertex path: some violation is found quickly on every seed,
        // and the endpoint E1 witness shows up within a few seeds
        let mut saw_e1 = false;
        for seed in 0..10 {
            let v = check_expander_sampled(&path(5), 2.0, 50, seed).unwrap();
            assert!(v.is_fail());
            assert!(v.witness_revalidates(&path(5)));
            if v.status == VerdictStatus::FailE1 {
                saw_e1 = true;
                break;
            }
        }
        assert!(saw_e1);

        let v = check_expander_sampled(&Graph::empty(6), 1.0, 10, 0).unwrap();
        assert_eq!(v.status, VerdictStatus::FailE1);
        match &v.witness {
            Some(Witness::E1 { x, neighborhood_size }) => {
                assert_eq!(*neighborhood_size, 0);
                assert!(!x.is_empty());
            }
            other => panic!("unexpected witness {other:?}"),
        }

        assert!(check_expander_sampled(&path(5), 2.0, 0, 0).is_err());
    }

    #[test]
    fn verdict_serializes() {
        let v = check_expander_exact(&path(5), 2.0).unwrap();
        let j = serde_json::to_string(&v).unwrap();
        assert!(j.contains("\"status\":\"fail_e1\""));
        assert!(j.contains("\"mode\":\"exact\""));
        let back: ExpanderVerdict = serde_json::from_str(&j).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn density_bound_examples() {
        let k8 = Graph::complete(8);
        assert!(verify_density_bound(&k8, 1, &[0].into(), &[1, 2].into()).unwrap());
        let k12 = Graph::complete(12);
        assert!(verify_density_bound(&k12, 2, &[0, 1].into(), &[2, 3, 4, 5].into()).unwrap());
        // violated preconditions are input errors
        assert!(verify_density_bound(&k8, 2, &[0].into(), &[1, 2, 3, 4].into()).is_err());
        assert!(verify_density_bound(&k8, 1, &[0].into(), &[0, 1].into()).is_err());
    }

    #[test]
    fn exceptional_vertex_examples() {
        let k10 = Graph::complete(10);
        let w: VertexSet = [0, 1, 2, 3].into();
        assert_eq!(exceptional_vertices(&k10, &w, 2).unwrap(), VertexSet::new());

        // star with center 0 and leaves 1..=9; W = four leaves
        let star = Graph::from_edges(10, &(1..10).map(|v| (0, v)).collect::<Vec<_>>()).unwrap();
        let w: VertexSet = [1, 2, 3, 4].into();
        let exc = exceptional_vertices(&star, &w, 2).unwrap();
        assert_eq!(exc, [5, 6, 7, 8, 9].into());

        // boundary: exactly m - 1 neighbors in W counts as exceptional
        let g = Graph::from_edges(5, &[(0, 4), (1, 4), (0, 3), (1, 3), (2, 3)]).unwrap();
        let w: VertexSet = [0, 1, 2, 3].into();
        let exc = exceptional_vertices(&g, &w, 2).unwrap();
        assert!(!exc.contains(4)); // 4 has 2 >= m neighbors in W
        let w2: VertexSet = [0, 1, 2, 4].into();
        let exc2 = exceptional_vertices(&g, &w2, 2).unwrap();
        assert!(!exc2.contains(3));
        // |W| below m^2 is an input error
        assert!(exceptional_vertices(&g, &[0, 1].into(), 2).is_err());
    }

    #[test]
    fn partition_small_complete() {
        let g = Graph::complete(20);
        let p = partition_vertices(&g, 5.0, &[10, 10], 11, 50).unwrap();
        assert_eq!(p.parts.len(), 2);
        assert_eq!(p.parts[0].len(), 10);
        assert_eq!(p.parts[1].len(), 10);
        assert!(p.parts[0].is_disjoint(&p.parts[1]));
        assert_eq!(p.parts[0].union(&p.parts[1]), VertexSet::full(20));
        assert_eq!(p.mode, CheckMode::Exact);
        assert!((p.part_expansions[0] - 0.5).abs() < 1e-12);

        // trivial single part
        let p = partition_vertices(&g, 5.0, &[20], 1, 50).unwrap();
        assert_eq!(p.parts[0], VertexSet::full(20));
        assert!((p.part_expansions[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partition_impossible_instance() {
        // K_7 plus an isolated vertex, d = 3 (m = 2): the isolated
        // singleton has no neighbors in any part while every d_i > 0,
        // so no partition can verify
        let mut edges = Vec::new();
        for i in 0..7 {
            for j in i + 1..7 {
                edges.push((i, j));
            }
        }
        let g = Graph::from_edges(8, &edges).unwrap();
        match partition_vertices(&g, 3.0, &[4, 4], 5, 10) {
            Err(PartitionError::RetriesExhausted { retries, last_witness }) => {
                assert_eq!(retries, 10);
                let w = last_witness.expect("witness recorded");
                assert_eq!(w.x, vec![7]);
                assert_eq!(w.intersection_size, 0);
            }
            other => panic!("expected retry exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn partition_sampled_mode_on_large_hosts() {
        // d small enough that exhaustive verification is far beyond the
        // guard: the sampled verifier takes over
        let g = crate::generators::gen_gnp(120, 0.5, 3).unwrap();
        let p = partition_vertices(&g, 2.0, &[60, 60], 9, 20).unwrap();
        assert!(matches!(p.mode, CheckMode::Sampled { .. }));
        assert_eq!(p.parts[0].len(), 60);
        assert!(p.parts[0].is_disjoint(&p.parts[1]));
    }

    #[test]
    fn partition_rejects_bad_sizes() {
        let g = Graph::complete(6);
        assert!(matches!(
            partition_vertices(&g, 2.0, &[3, 4], 0, 5),
            Err(PartitionError::SizeMismatch { .. })
        ));
        assert!(matches!(
            partition_vertices(&g, 2.0, &[], 0, 5),
            Err(PartitionError::NoParts)
        ));
    }
}
