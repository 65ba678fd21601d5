//! Greedy tree embedding with chronological backtracking.
//!
//! Tree vertices are placed in BFS order; each vertex goes to a free host
//! neighbor of its parent's image, preferring images with the most free
//! neighbors left (max slack). Dead ends backtrack chronologically up to a
//! budget, and the whole attempt restarts with fresh randomness. Patterns
//! on at most nine vertices instead run an exhaustive backtracking search,
//! making failures conclusive.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::embed::EmbedBudget;
use crate::graph::{Embedding, Graph};
use crate::trees::Tree;

#[derive(Debug, Error, PartialEq)]
pub enum EmbedError {
    #[error("tree has maximum degree {got}, above the required bound {bound}")]
    DegreeBound { got: usize, bound: f64 },
    #[error("tree on {pattern} vertices cannot embed into host on {host}")]
    PatternTooLarge { pattern: usize, host: usize },
    #[error("no embedding found (conclusive: {conclusive})")]
    NotFound { conclusive: bool },
}

pub(crate) const EXACT_LIMIT: usize = 9;

/// Embeds a tree with maximum degree at most `d` into `g`, leaving host
/// vertices over when the tree is smaller than the host. Every returned
/// embedding is validated.
pub fn embed_almost_spanning_tree(
    g: &Graph,
    t: &Tree,
    d: f64,
    budget: &EmbedBudget,
) -> Result<Embedding, EmbedError> {
    if (t.max_degree() as f64) > d {
        return Err(EmbedError::DegreeBound { got: t.max_degree(), bound: d });
    }
    if t.n() > g.n() {
        return Err(EmbedError::PatternTooLarge { pattern: t.n(), host: g.n() });
    }
    let allowed = vec![true; g.n()];
    let plan = BfsPlan::new(t, 0);
    let exact = t.n() <= EXACT_LIMIT;

    if exact {
        let mut used = vec![false; g.n()];
        let mut backtracks = 0u64;
        return match place_component(g, &plan, &allowed, &mut used, None, &mut backtracks, u64::MAX, None)
        {
            Some(map) => {
                let phi = lift(&plan, &map, t.n());
                debug_assert_eq!(phi.validate(t.graph(), g), Ok(true));
                Ok(phi)
            }
            None => Err(EmbedError::NotFound { conclusive: true }),
        };
    }

    for restart in 0..=budget.max_restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        rng.set_stream(restart);
        let mut used = vec![false; g.n()];
        let mut backtracks = 0u64;
        if let Some(map) = place_component(
            g,
            &plan,
            &allowed,
            &mut used,
            None,
            &mut backtracks,
            budget.max_backtracks,
            Some(&mut rng),
        ) {
            let phi = lift(&plan, &map, t.n());
            debug_assert_eq!(phi.validate(t.graph(), g), Ok(true));
            return Ok(phi);
        }
    }
    Err(EmbedError::NotFound { conclusive: false })
}

fn lift(plan: &BfsPlan, map: &[usize], n: usize) -> Embedding {
    let mut phi = vec![usize::MAX; n];
    for (i, &tv) in plan.order.iter().enumerate() {
        phi[tv] = map[i];
    }
    Embedding::new(phi)
}

/// BFS placement order of one tree component: `order[i]` is a tree vertex,
/// `parent_pos[i]` its parent's position in `order` (`None` for the root).
pub(crate) struct BfsPlan {
    pub order: Vec<usize>,
    pub parent_pos: Vec<Option<usize>>,
}

impl BfsPlan {
    pub fn new(t: &Tree, root: usize) -> Self {
        let mut order = vec![root];
        let mut parent_pos = vec![None];
        let mut pos_of = vec![usize::MAX; t.n()];
        pos_of[root] = 0;
        let mut head = 0;
        while head < order.len() {
            let v = order[head];
            for &w in t.neighbors(v) {
                if pos_of[w] == usize::MAX {
                    pos_of[w] = order.len();
                    order.push(w);
                    parent_pos.push(Some(head));
                }
            }
            head += 1;
        }
        BfsPlan { order, parent_pos }
    }
}

/// Places one BFS-ordered component into the host. `used` is shared
/// bookkeeping across components and stages; `allowed` restricts the
/// usable host vertices. With `rng` absent, candidates are enumerated in
/// ascending order (exhaustive mode); with `rng` present they are ordered
/// by descending slack with random tie-breaking.
///
/// Returns the image of each position in the plan, or `None`; `used` is
/// left unchanged on failure.
#[allow(clippy::too_many_arguments)]
pub(crate) fn place_component(
    g: &Graph,
    plan: &BfsPlan,
    allowed: &[bool],
    used: &mut [bool],
    root_image: Option<usize>,
    backtracks: &mut u64,
    max_backtracks: u64,
    mut rng: Option<&mut ChaCha8Rng>,
) -> Option<Vec<usize>> {
    let size = plan.order.len();
    let mut map: Vec<usize> = Vec::with_capacity(size);
    let mut cand: Vec<Vec<usize>> = Vec::with_capacity(size);
    let mut cursor: Vec<usize> = Vec::with_capacity(size);

    let candidates_for = |pos: usize,
                          map: &[usize],
                          used: &[bool],
                          rng: &mut Option<&mut ChaCha8Rng>|
     -> Vec<usize> {
        let mut c: Vec<usize> = match plan.parent_pos[pos] {
            None => match root_image {
                Some(h) => {
                    if used[h] {
                        Vec::new()
                    } else {
                        vec![h]
                    }
                }
                None => (0..g.n()).filter(|&h| allowed[h] && !used[h]).collect(),
            },
            Some(pp) => {
                let ph = map[pp];
                g.neighbors(ph)
                    .iter()
                    .copied()
                    .filter(|&h| allowed[h] && !used[h])
                    .collect()
            }
        };
        if let Some(r) = rng.as_deref_mut() {
            // max slack first, random among ties
            c.shuffle(r);
            let free_degree = |h: usize| {
                g.neighbors(h).iter().filter(|&&w| allowed[w] && !used[w]).count()
            };
            let mut keyed: Vec<(usize, usize)> = c.into_iter().map(|h| (free_degree(h), h)).collect();
            keyed.sort_by_key(|&(count, _)| std::cmp::Reverse(count));
            keyed.into_iter().map(|(_, h)| h).collect()
        } else {
            c
        }
    };

    cand.push(candidates_for(0, &map, used, &mut rng));
    cursor.push(0);

    loop {
        let pos = map.len();
        if pos == size {
            return Some(map);
        }
        let idx = cursor[pos];
        if idx < cand[pos].len() {
            cursor[pos] += 1;
            let h = cand[pos][idx];
            if used[h] {
                continue;
            }
            used[h] = true;
            map.push(h);
            let next = map.len();
            if next < size {
                let c = candidates_for(next, &map, used, &mut rng);
                if cand.len() > next {
                    cand[next] = c;
                    cursor[next] = 0;
                } else {
                    cand.push(c);
                    cursor.push(0);
                }
            }
        } else {
            // exhausted candidates here: backtrack
            {
                let h = map.pop()?;
                used[h] = false;
                *backtracks += 1;
                if *backtracks > max_backtracks {
                    for &placed in &map {
                        used[placed] = false;
                    }
                    return None;
                }
            }
        }
    }
}
