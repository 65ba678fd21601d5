//! Star matchings: partitioning a target set `W` among centers `U` so that
//! each center `u` receives `k(u)` of its own neighbors. Feasibility is
//! exactly the generalized Hall condition
//! `|N(X) ∩ W| >= sum of k over X` for all `X ⊆ U`,
//! decided here by integral max-flow on the demand network; an infeasible
//! instance yields a violating set extracted from the min cut.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

/// A star-matching instance: disjoint centers and targets plus one demand
/// per center, demands summing to the number of targets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StarDemand {
    pub centers: Vec<usize>,
    pub targets: Vec<usize>,
    /// `demands[i]` targets go to `centers[i]`.
    pub demands: Vec<usize>,
}

impl StarDemand {
    pub fn new(centers: Vec<usize>, targets: Vec<usize>, demands: Vec<usize>) -> Self {
        StarDemand { centers, targets, demands }
    }
}

/// A feasible assignment: `parts[i]` lists the targets matched to
/// `centers[i]`, each adjacent to it, disjoint across centers, covering
/// all targets.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StarMatching {
    pub parts: Vec<Vec<usize>>,
}

/// A set of centers whose joint target neighborhood is smaller than its
/// joint demand.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HallViolation {
    pub centers: Vec<usize>,
    pub neighborhood_size: usize,
    pub demanded: usize,
}

#[derive(Debug, Error)]
pub enum StarError {
    #[error("invalid star demand: {0}")]
    InvalidDemand(String),
    #[error(
        "infeasible: centers {:?} demand {} but see only {} targets",
        violation.centers,
        violation.demanded,
        violation.neighborhood_size
    )]
    Infeasible { violation: HallViolation },
}

struct FlowEdge {
    to: usize,
    cap: i64,
    rev: usize,
}

/// Dinic's algorithm; capacities here are small integers, flows integral.
struct FlowNet {
    edges: Vec<Vec<FlowEdge>>,
}

impl FlowNet {
    fn new(nodes: usize) -> Self {
        FlowNet { edges: (0..nodes).map(|_| Vec::new()).collect() }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: i64) -> (usize, usize) {
        let a = self.edges[from].len();
        let b = self.edges[to].len();
        self.edges[from].push(FlowEdge { to, cap, rev: b });
        self.edges[to].push(FlowEdge { to: from, cap: 0, rev: a });
        (from, a)
    }

    fn bfs_levels(&self, s: usize, t: usize) -> Option<Vec<i32>> {
        let mut level = vec![-1; self.edges.len()];
        level[s] = 0;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for e in &self.edges[v] {
                if e.cap > 0 && level[e.to] < 0 {
                    level[e.to] = level[v] + 1;
                    queue.push_back(e.to);
                }
            }
        }
        (level[t] >= 0).then_some(level)
    }

    fn dfs_augment(
        &mut self,
        v: usize,
        t: usize,
        pushed: i64,
        level: &[i32],
        it: &mut [usize],
    ) -> i64 {
        if v == t {
            return pushed;
        }
        while it[v] < self.edges[v].len() {
            let (to, cap, rev) = {
                let e = &self.edges[v][it[v]];
                (e.to, e.cap, e.rev)
            };
            if cap > 0 && level[to] == level[v] + 1 {
                let d = self.dfs_augment(to, t, pushed.min(cap), level, it);
                if d > 0 {
                    self.edges[v][it[v]].cap -= d;
                    self.edges[to][rev].cap += d;
                    return d;
                }
            }
            it[v] += 1;
        }
        0
    }

    fn max_flow(&mut self, s: usize, t: usize) -> i64 {
        let mut flow = 0;
        while let Some(level) = self.bfs_levels(s, t) {
            let mut it = vec![0; self.edges.len()];
            loop {
                let pushed = self.dfs_augment(s, t, i64::MAX, &level, &mut it);
                if pushed == 0 {
                    break;
                }
                flow += pushed;
            }
        }
        flow
    }

    /// Nodes reachable from `s` in the residual network.
    fn residual_reachable(&self, s: usize) -> Vec<bool> {
        let mut seen = vec![false; self.edges.len()];
        seen[s] = true;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(v) = queue.pop_front() {
            for e in &self.edges[v] {
                if e.cap > 0 && !seen[e.to] {
                    seen[e.to] = true;
                    queue.push_back(e.to);
                }
            }
        }
        seen
    }
}

/// Solves a star-matching instance. Success returns the per-center target
/// sets; infeasible instances return the Hall violator taken from the
/// source side of a min cut.
pub fn star_matching(g: &Graph, demand: &StarDemand) -> Result<StarMatching, StarError> {
    let nu = demand.centers.len();
    let nw = demand.targets.len();
    if demand.demands.len() != nu {
        return Err(StarError::InvalidDemand(format!(
            "{} demands for {} centers",
            demand.demands.len(),
            nu
        )));
    }
    let total: usize = demand.demands.iter().sum();
    if total != nw {
        return Err(StarError::InvalidDemand(format!(
            "demands sum to {total}, but there are {nw} targets"
        )));
    }
    let mut seen = std::collections::HashSet::new();
    for &v in demand.centers.iter().chain(&demand.targets) {
        if v >= g.n() {
            return Err(StarError::InvalidDemand(format!("vertex {v} out of range")));
        }
        if !seen.insert(v) {
            return Err(StarError::InvalidDemand(format!(
                "vertex {v} repeated across centers and targets"
            )));
        }
    }

    // nodes: 0 source, 1..=nu centers, nu+1..=nu+nw targets, nu+nw+1 sink
    let source = 0;
    let sink = nu + nw + 1;
    let mut net = FlowNet::new(nu + nw + 2);
    let mut target_index = std::collections::HashMap::new();
    for (j, &w) in demand.targets.iter().enumerate() {
        target_index.insert(w, j);
    }
    for (i, (&u, &k)) in demand.centers.iter().zip(&demand.demands).enumerate() {
        net.add_edge(source, 1 + i, k as i64);
        for &w in g.neighbors(u) {
            if let Some(&j) = target_index.get(&w) {
                net.add_edge(1 + i, 1 + nu + j, 1);
            }
        }
    }
    for j in 0..nw {
        net.add_edge(1 + nu + j, sink, 1);
    }

    let flow = net.max_flow(source, sink);
    if flow < nw as i64 {
        let reach = net.residual_reachable(source);
        let violators: Vec<usize> = (0..nu).filter(|&i| reach[1 + i]).map(|i| demand.centers[i]).collect();
        let demanded: usize = (0..nu)
            .filter(|&i| reach[1 + i])
            .map(|i| demand.demands[i])
            .sum();
        let mut nbhd = std::collections::HashSet::new();
        for &u in &violators {
            for &w in g.neighbors(u) {
                if target_index.contains_key(&w) {
                    nbhd.insert(w);
                }
            }
        }
        return Err(StarError::Infeasible {
            violation: HallViolation {
                centers: violators,
                neighborhood_size: nbhd.len(),
                demanded,
            },
        });
    }

    // read the assignment off saturated center -> target edges
    let mut parts = vec![Vec::new(); nu];
    for (i, part) in parts.iter_mut().enumerate() {
        for e in &net.edges[1 + i] {
            let j = e.to;
            if j > nu && j < sink && e.cap == 0 {
                part.push(demand.targets[j - nu - 1]);
            }
        }
        part.sort_unstable();
        debug_assert_eq!(part.len(), demand.demands[i]);
    }
    Ok(StarMatching { parts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simple_feasible_instances() {
        // one center adjacent to both targets
        let g = Graph::from_edges(3, &[(0, 1), (0, 2)]).unwrap();
        let m = star_matching(&g, &StarDemand::new(vec![0], vec![1, 2], vec![2])).unwrap();
        assert_eq!(m.parts, vec![vec![1, 2]]);

        // two centers, one target, only center 0 adjacent
        let g = Graph::from_edges(3, &[(0, 2)]).unwrap();
        let m = star_matching(&g, &StarDemand::new(vec![0, 1], vec![2], vec![1, 0])).unwrap();
        assert_eq!(m.parts, vec![vec![2], vec![]]);
    }

    #[test]
    fn infeasible_reports_violator() {
        // center 1 demands a target but has no edge into W
        let g = Graph::from_edges(4, &[(0, 2), (0, 3)]).unwrap();
        let err = star_matching(&g, &StarDemand::new(vec![0, 1], vec![2, 3], vec![1, 1]));
        match err {
            Err(StarError::Infeasible { violation }) => {
                assert!(violation.centers.contains(&1));
                assert!(violation.neighborhood_size < violation.demanded);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn rejects_invalid_demands() {
        let g = Graph::complete(4);
        assert!(star_matching(&g, &StarDemand::new(vec![0], vec![1, 2], vec![1])).is_err());
        assert!(star_matching(&g, &StarDemand::new(vec![0], vec![0, 1], vec![2])).is_err());
        assert!(star_matching(&g, &StarDemand::new(vec![0, 0], vec![1, 2], vec![1, 1])).is_err());
        assert!(star_matching(&g, &StarDemand::new(vec![9], vec![1], vec![1])).is_err());
    }
}
