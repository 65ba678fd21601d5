//! Hamilton paths between prescribed endpoints.
//!
//! The search keeps the start pinned, grows the path greedily at the free
//! end, and applies rotations when stuck: a neighbor `p[i]` of the free end
//! turns `p[0..=i], p[i+1..=k]` into `p[0..=i], reverse(p[i+1..=k])`,
//! exposing a new free end. The destination stays out of the path until
//! everything else is covered. Random restarts are driven by the budget;
//! on at most ten vertices an exhaustive backtracking search decides the
//! question conclusively.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::embed::EmbedBudget;
use crate::graph::Graph;

#[derive(Debug, Error, PartialEq)]
pub enum HamiltonError {
    #[error("endpoints must differ")]
    SameEndpoints,
    #[error("vertex {0} out of range for graph on {1} vertices")]
    VertexOutOfRange(usize, usize),
    #[error("no Hamilton path found (conclusive: {conclusive})")]
    NotFound { conclusive: bool },
}

const EXACT_LIMIT: usize = 10;

/// Finds a Hamilton path from `s` to `t`, visiting every vertex once with
/// consecutive vertices adjacent. Failure is conclusive only on graphs
/// with at most ten vertices, where the exact fallback runs.
pub fn hamilton_path(
    g: &Graph,
    s: usize,
    t: usize,
    budget: &EmbedBudget,
) -> Result<Vec<usize>, HamiltonError> {
    let n = g.n();
    if s >= n {
        return Err(HamiltonError::VertexOutOfRange(s, n));
    }
    if t >= n {
        return Err(HamiltonError::VertexOutOfRange(t, n));
    }
    if s == t {
        return Err(HamiltonError::SameEndpoints);
    }

    if n <= EXACT_LIMIT {
        return exact_search(g, s, t).ok_or(HamiltonError::NotFound { conclusive: true });
    }

    for restart in 0..=budget.max_restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        rng.set_stream(restart);
        if let Some(path) = rotation_extension(g, s, t, &mut rng) {
            debug_assert!(is_valid_path(g, &path, s, t));
            return Ok(path);
        }
    }
    Err(HamiltonError::NotFound { conclusive: false })
}

fn is_valid_path(g: &Graph, path: &[usize], s: usize, t: usize) -> bool {
    let mut seen = vec![false; g.n()];
    path.len() == g.n()
        && path.first() == Some(&s)
        && path.last() == Some(&t)
        && path.iter().all(|&v| {
            let fresh = !seen[v];
            seen[v] = true;
            fresh
        })
        && path.windows(2).all(|w| g.has_edge(w[0], w[1]))
}

fn rotation_extension(g: &Graph, s: usize, t: usize, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    let n = g.n();
    let mut path = vec![s];
    let mut pos = vec![usize::MAX; n]; // position in path, MAX = absent
    pos[s] = 0;
    // stagnation: rotations since the last extension or unseen endpoint
    let mut stale_rotations = 0usize;
    let mut seen_end = vec![false; n];

    loop {
        // extend greedily at the free end, avoiding t
        loop {
            let end = *path.last().unwrap();
            let fresh: Vec<usize> = g
                .neighbors(end)
                .iter()
                .copied()
                .filter(|&w| w != t && pos[w] == usize::MAX)
                .collect();
            match fresh.len() {
                0 => break,
                len => {
                    let next = fresh[rng.gen_range(0..len)];
                    pos[next] = path.len();
                    path.push(next);
                    stale_rotations = 0;
                    seen_end.iter_mut().for_each(|b| *b = false);
                }
            }
        }

        if path.len() == n - 1 {
            let end = *path.last().unwrap();
            if g.has_edge(end, t) {
                path.push(t);
                return Some(path);
            }
        }

        // rotate: pick a path neighbor of the free end and reverse the tail
        let end = *path.last().unwrap();
        let pivots: Vec<usize> = g
            .neighbors(end)
            .iter()
            .copied()
            .filter(|&w| w != t && pos[w] != usize::MAX && pos[w] + 2 <= path.len().saturating_sub(1))
            .collect();
        if pivots.is_empty() {
            return None;
        }
        let pivot = pivots[rng.gen_range(0..pivots.len())];
        let i = pos[pivot];
        path[i + 1..].reverse();
        for (offset, &v) in path[i + 1..].iter().enumerate() {
            pos[v] = i + 1 + offset;
        }
        let new_end = *path.last().unwrap();
        if !seen_end[new_end] {
            seen_end[new_end] = true;
            stale_rotations = 0;
        } else {
            stale_rotations += 1;
            if stale_rotations > 2 * n {
                return None;
            }
        }
    }
}

fn exact_search(g: &Graph, s: usize, t: usize) -> Option<Vec<usize>> {
    let mut visited = vec![false; g.n()];
    visited[s] = true;
    let mut path = vec![s];
    if exact_extend(g, t, &mut path, &mut visited) {
        Some(path)
    } else {
        None
    }
}

fn exact_extend(g: &Graph, t: usize, path: &mut Vec<usize>, visited: &mut [bool]) -> bool {
    let end = *path.last().unwrap();
    if path.len() == g.n() {
        return end == t;
    }
    for &w in g.neighbors(end) {
        if visited[w] || (w == t && path.len() != g.n() - 1) {
            continue;
        }
        visited[w] = true;
        path.push(w);
        if exact_extend(g, t, path, visited) {
            return true;
        }
        path.pop();
        visited[w] = false;
    }
    false
}
