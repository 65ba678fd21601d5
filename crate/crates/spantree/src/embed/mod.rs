//! The embedding engine.
//!
//! [`embed_spanning_tree`] dispatches a spanning tree on the case split
//! from [`crate::trees::classify_case`] and runs the matching pipeline:
//!
//! * **Case 1** (long bare path): embed the forest left after cutting a
//!   bare path into a reserved region, then close the path over all
//!   remaining vertices with a Hamilton path between anchors adjacent to
//!   the cut ends.
//! * **Case 2** (many leaves, second-level bare path): reserve a leaf
//!   region, avoid its exceptional vertices (too few portal neighbors),
//!   route the second-level path through everything else, then attach the
//!   leaves by star matching.
//! * **Case 3** (two leaf levels): embed the core, then both leaf levels
//!   by consecutive star matchings, the first avoiding exceptional
//!   vertices.
//!
//! Failed stages report a witness; the driver then falls back to exact
//! backtracking (at most nine vertices, conclusive) or a whole-tree greedy
//! attempt.

pub mod almost;
pub mod hamilton;
pub mod star;

pub use almost::{embed_almost_spanning_tree, EmbedError};
pub use hamilton::{hamilton_path, HamiltonError};
pub use star::{star_matching, HallViolation, StarDemand, StarError, StarMatching};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expansion::m_param;
use crate::graph::{Embedding, Graph, VertexSet};
use crate::trees::{classify_case, decompose, CaseThresholds, ClassifyError, Tree, TreeCase};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Search budgets for the embedding heuristics. All randomness is derived
/// from `seed`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmbedBudget {
    pub max_backtracks: u64,
    pub max_restarts: u64,
    pub seed: u64,
}

impl EmbedBudget {
    pub fn with_seed(seed: u64) -> Self {
        EmbedBudget { max_backtracks: 20_000, max_restarts: 30, seed }
    }
}

const PARTITION_RETRIES: u64 = 50;

/// Full pipeline reruns (fresh partition and search randomness) before
/// the driver falls back.
const PIPELINE_ATTEMPTS: u64 = 5;

/// One pipeline stage outcome.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

/// Transcript of a spanning-tree embedding run.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbedReport {
    pub case: Option<TreeCase>,
    pub thresholds: CaseThresholds,
    pub m: usize,
    pub stages: Vec<StageRecord>,
    /// Number of components of the cut forest, when a pipeline ran.
    pub forest_components: Option<usize>,
    /// Which fallback produced the embedding, if any
    /// (`"exact"` or `"greedy"`).
    pub fallback: Option<String>,
    pub validated: bool,
}

/// A successful spanning embedding plus its transcript.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpanningEmbed {
    pub embedding: Embedding,
    pub report: EmbedReport,
}

#[derive(Debug, Error)]
pub enum SpanningError {
    #[error("tree has {tree} vertices but host has {host}; a spanning embedding needs equality")]
    SizeMismatch { tree: usize, host: usize },
    #[error("tree maximum degree {got} exceeds the bound {bound}")]
    DegreeBound { got: usize, bound: f64 },
    #[error("thresholds too small for the pipeline: {0}")]
    BadThresholds(String),
    #[error("invalid expansion parameter: {0}")]
    BadParameter(String),
    #[error("embedding failed at stage {stage}")]
    Failed { stage: String, report: Box<EmbedReport> },
}

struct StageFail {
    stage: String,
    detail: String,
}

impl StageFail {
    fn new(stage: &str, detail: impl Into<String>) -> Self {
        StageFail { stage: stage.into(), detail: detail.into() }
    }
}

/// Embeds a spanning tree into the host, following the case pipeline and
/// recording a per-stage transcript. Every success is validated before it
/// is returned.
pub fn embed_spanning_tree(
    g: &Graph,
    t: &Tree,
    delta: f64,
    d: f64,
    thresholds: Option<CaseThresholds>,
    budget: &EmbedBudget,
) -> Result<SpanningEmbed, SpanningError> {
    let n = g.n();
    if t.n() != n {
        return Err(SpanningError::SizeMismatch { tree: t.n(), host: n });
    }
    if (t.max_degree() as f64) > delta {
        return Err(SpanningError::DegreeBound { got: t.max_degree(), bound: delta });
    }
    let m = m_param(n, d).map_err(|e| SpanningError::BadParameter(e.to_string()))?;
    let thresholds = thresholds.unwrap_or_else(|| CaseThresholds::defaults(delta, m));

    let mut report = EmbedReport {
        case: None,
        thresholds,
        m,
        stages: Vec::new(),
        forest_components: None,
        fallback: None,
        validated: false,
    };

    let case = match classify_case(t, &thresholds) {
        Ok(case) => {
            report.case = Some(case);
            report.stages.push(StageRecord {
                name: "classify".into(),
                ok: true,
                detail: format!("{case:?}"),
            });
            Some(case)
        }
        Err(ClassifyError::NoCase { .. }) => {
            report.stages.push(StageRecord {
                name: "classify".into(),
                ok: false,
                detail: "no case applies at these thresholds".into(),
            });
            None
        }
    };

    if let Some(case) = case {
        // a failed stage usually means the random partition handed an
        // unlucky region to one of the searches; retry the whole pipeline
        // with fresh randomness before giving up on it
        for attempt in 0..PIPELINE_ATTEMPTS {
            let attempt_budget = EmbedBudget {
                seed: budget.seed.wrapping_add(attempt.wrapping_mul(0x9E37_79B9_7F4A_7C15)),
                ..*budget
            };
            let before = report.stages.len();
            let run = match case {
                TreeCase::LongBarePath => {
                    case1_pipeline(g, t, delta, d, m, &thresholds, &attempt_budget, &mut report)
                }
                TreeCase::LeavesAndSecondLevelPath => {
                    case2_pipeline(g, t, delta, d, m, &thresholds, &attempt_budget, &mut report)
                }
                TreeCase::TwoLeafLevels => {
                    case3_pipeline(g, t, delta, d, m, &thresholds, &attempt_budget, &mut report)
                }
            };
            match run {
                Ok(embedding) => return finish(g, t, embedding, report),
                Err(fail) => {
                    if let Some(msg) = fail.detail.strip_prefix("input:") {
                        return Err(SpanningError::BadThresholds(msg.trim().to_string()));
                    }
                    report.stages.truncate(before);
                    report.stages.push(StageRecord {
                        name: fail.stage.clone(),
                        ok: false,
                        detail: format!("attempt {attempt}: {}", fail.detail),
                    });
                }
            }
        }
    }

    // fallback: exact backtracking for tiny instances, whole-tree greedy
    // otherwise
    let (kind, attempt) = fallback_embed(g, t, budget);
    report.fallback = Some(kind.to_string());
    match attempt {
        Some(embedding) => {
            report.stages.push(StageRecord {
                name: "fallback".into(),
                ok: true,
                detail: kind.to_string(),
            });
            finish(g, t, embedding, report)
        }
        None => {
            report.stages.push(StageRecord {
                name: "fallback".into(),
                ok: false,
                detail: format!("{kind} search failed"),
            });
            let stage = report
                .stages
                .iter()
                .find(|s| !s.ok)
                .map(|s| s.name.clone())
                .unwrap_or_else(|| "fallback".into());
            Err(SpanningError::Failed { stage, report: Box::new(report) })
        }
    }
}

fn finish(
    g: &Graph,
    t: &Tree,
    embedding: Embedding,
    mut report: EmbedReport,
) -> Result<SpanningEmbed, SpanningError> {
    let ok = embedding.validate(t.graph(), g) == Ok(true);
    report.validated = ok;
    report.stages.push(StageRecord {
        name: "validate".into(),
        ok,
        detail: if ok { "embedding validated".into() } else { "validation failed".into() },
    });
    if ok {
        Ok(SpanningEmbed { embedding, report })
    } else {
        Err(SpanningError::Failed { stage: "validate".into(), report: Box::new(report) })
    }
}

fn fallback_embed(g: &Graph, t: &Tree, budget: &EmbedBudget) -> (&'static str, Option<Embedding>) {
    let plan = almost::BfsPlan::new(t, 0);
    let allowed = vec![true; g.n()];
    if t.n() <= almost::EXACT_LIMIT {
        let mut used = vec![false; g.n()];
        let mut backtracks = 0;
        let found = almost::place_component(
            g,
            &plan,
            &allowed,
            &mut used,
            None,
            &mut backtracks,
            u64::MAX,
            None,
        )
        .map(|map| lift_plan(&plan, &map, t.n()));
        ("exact", found)
    } else {
        for restart in 0..=budget.max_restarts {
            let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
            rng.set_stream(0x8000_0000_0000_0000 | restart);
            let mut used = vec![false; g.n()];
            let mut backtracks = 0;
            if let Some(map) = almost::place_component(
                g,
                &plan,
                &allowed,
                &mut used,
                None,
                &mut backtracks,
                budget.max_backtracks,
                Some(&mut rng),
            ) {
                return ("greedy", Some(lift_plan(&plan, &map, t.n())));
            }
        }
        ("greedy", None)
    }
}

fn lift_plan(plan: &almost::BfsPlan, map: &[usize], n: usize) -> Embedding {
    let mut phi = vec![usize::MAX; n];
    for (i, &tv) in plan.order.iter().enumerate() {
        phi[tv] = map[i];
    }
    Embedding::new(phi)
}

// ---------------------------------------------------------------------------
// Shared pipeline pieces
// ---------------------------------------------------------------------------

/// Connected components of the tree restricted to `keep`, as relabeled
/// trees plus their old-id vertex lists.
fn kept_components(t: &Tree, keep: &[bool]) -> Vec<(Tree, Vec<usize>)> {
    let n = t.n();
    let mut seen = vec![false; n];
    let mut comps = Vec::new();
    for start in 0..n {
        if !keep[start] || seen[start] {
            continue;
        }
        let mut verts = vec![start];
        seen[start] = true;
        let mut head = 0;
        while head < verts.len() {
            let v = verts[head];
            for &w in t.neighbors(v) {
                if keep[w] && !seen[w] {
                    seen[w] = true;
                    verts.push(w);
                }
            }
            head += 1;
        }
        verts.sort_unstable();
        let mut local = std::collections::HashMap::new();
        for (i, &v) in verts.iter().enumerate() {
            local.insert(v, i);
        }
        let mut edges = Vec::new();
        for &v in &verts {
            for &w in t.neighbors(v) {
                if keep[w] && v < w {
                    edges.push((local[&v], local[&w]));
                }
            }
        }
        let tree = Tree::from_edges(verts.len(), &edges).expect("component of a tree is a tree");
        comps.push((tree, verts));
    }
    comps
}

/// Embeds the kept part of `t` (a forest) into the `allowed` region of the
/// host with shared usage bookkeeping and whole-forest restarts. Preferred
/// roots (old tree ids) are placed first within their components. On
/// success, `phi` gains the images and `used` the marks.
#[allow(clippy::too_many_arguments)]
fn embed_forest_stage(
    g: &Graph,
    t: &Tree,
    keep: &[bool],
    preferred_roots: &[usize],
    allowed: &[bool],
    used: &mut [bool],
    phi: &mut [usize],
    budget: &EmbedBudget,
) -> Result<usize, StageFail> {
    let comps = kept_components(t, keep);
    let plans: Vec<(almost::BfsPlan, &Vec<usize>)> = comps
        .iter()
        .map(|(tree, verts)| {
            let root_old = preferred_roots
                .iter()
                .copied()
                .find(|r| verts.binary_search(r).is_ok())
                .unwrap_or(verts[0]);
            let root_local = verts.binary_search(&root_old).unwrap();
            (almost::BfsPlan::new(tree, root_local), verts)
        })
        .collect();

    'restarts: for restart in 0..=budget.max_restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
        rng.set_stream(0x4000_0000_0000_0000 | restart);
        let mut marked: Vec<usize> = Vec::new();
        let mut backtracks = 0;
        let mut images: Vec<Vec<usize>> = Vec::new();
        for (plan, _) in &plans {
            match almost::place_component(
                g,
                plan,
                allowed,
                used,
                None,
                &mut backtracks,
                budget.max_backtracks,
                Some(&mut rng),
            ) {
                Some(map) => {
                    marked.extend(map.iter().copied());
                    images.push(map);
                }
                None => {
                    for &h in &marked {
                        used[h] = false;
                    }
                    continue 'restarts;
                }
            }
        }
        for ((plan, verts), map) in plans.iter().zip(&images) {
            for (i, &local) in plan.order.iter().enumerate() {
                phi[verts[local]] = map[i];
            }
        }
        return Ok(comps.len());
    }
    Err(StageFail::new(
        "forest",
        format!("greedy forest embedding exhausted {} restarts", budget.max_restarts + 1),
    ))
}

/// First anchor pair `(v, w)` in ascending order with `v` adjacent to the
/// image of `s_f`, `w` adjacent to the image of `t_f`, both inside
/// `region`, `v != w`.
fn pick_anchors(
    g: &Graph,
    s_image: usize,
    t_image: usize,
    region: &VertexSet,
) -> Option<(usize, usize)> {
    for &v in region.iter() {
        if !g.has_edge(s_image, v) {
            continue;
        }
        for &w in region.iter() {
            if w != v && g.has_edge(t_image, w) {
                return Some((v, w));
            }
        }
    }
    None
}

/// Runs the Hamilton stage on the free region, writing the images of the
/// path vertices into `phi`.
#[allow(clippy::too_many_arguments)]
fn hamilton_stage(
    g: &Graph,
    free: &[usize],
    from: usize,
    to: usize,
    path_vertices: &[usize],
    phi: &mut [usize],
    used: &mut [bool],
    budget: &EmbedBudget,
) -> Result<(), StageFail> {
    debug_assert_eq!(free.len(), path_vertices.len());
    let region: VertexSet = free.iter().copied().collect();
    let (sub, old_ids) = g.induced_subgraph(&region).expect("region within host");
    let local_of = |v: usize| old_ids.binary_search(&v).expect("member of region");
    match hamilton_path(&sub, local_of(from), local_of(to), budget) {
        Ok(path) => {
            for (tv, local) in path_vertices.iter().zip(&path) {
                phi[*tv] = old_ids[*local];
                used[old_ids[*local]] = true;
            }
            Ok(())
        }
        Err(e) => Err(StageFail::new(
            "hamilton",
            format!("no Hamilton path over {} free vertices: {e}", free.len()),
        )),
    }
}

/// Star-matching stage: attaches, for each center (a tree vertex already
/// embedded), its pending tree children onto targets adjacent to the
/// center's image.
fn star_stage(
    g: &Graph,
    stage_name: &str,
    centers_tree: &[usize],
    children_of: &dyn Fn(usize) -> Vec<usize>,
    targets: &[usize],
    phi: &mut [usize],
    used: &mut [bool],
) -> Result<(), StageFail> {
    let centers_host: Vec<usize> = centers_tree.iter().map(|&k| phi[k]).collect();
    let demands: Vec<usize> = centers_tree.iter().map(|&k| children_of(k).len()).collect();
    let demand = StarDemand::new(centers_host, targets.to_vec(), demands);
    match star_matching(g, &demand) {
        Ok(matching) => {
            for (i, &k) in centers_tree.iter().enumerate() {
                let children = children_of(k);
                debug_assert_eq!(children.len(), matching.parts[i].len());
                for (child, host) in children.iter().zip(&matching.parts[i]) {
                    phi[*child] = *host;
                    used[*host] = true;
                }
            }
            Ok(())
        }
        Err(e) => Err(StageFail::new(stage_name, e.to_string())),
    }
}

fn record(report: &mut EmbedReport, name: &str, detail: String) {
    report.stages.push(StageRecord { name: name.into(), ok: true, detail });
}

// ---------------------------------------------------------------------------
// Case 1: long first-level bare path
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn case1_pipeline(
    g: &Graph,
    t: &Tree,
    delta: f64,
    d: f64,
    m: usize,
    th: &CaseThresholds,
    budget: &EmbedBudget,
    report: &mut EmbedReport,
) -> Result<Embedding, StageFail> {
    let n = g.n();
    if th.tau_path < 2 {
        return Err(StageFail::new("classify", "input: case 1 needs tau_path >= 2"));
    }
    let dec = decompose(t);
    let chain = &dec.longest_bare_path;
    let path: Vec<usize> = chain[..th.tau_path].to_vec();
    let (s_p, t_p) = (path[0], *path.last().unwrap());
    let in_path = membership(n, &path);
    let s_f = attach_vertex(t, s_p, &in_path)
        .ok_or_else(|| StageFail::new("split", "no attachment for the path start"))?;
    let t_f = attach_vertex(t, t_p, &in_path)
        .ok_or_else(|| StageFail::new("split", "no attachment for the path end"))?;

    let keep: Vec<bool> = (0..n).map(|v| !in_path[v]).collect();
    let forest_size = n - path.len();

    // region sizes: forest gets slack to make the greedy tractable; the
    // slack returns to the path region after the forest stage. Clamped to
    // half the path region so the anchor pool stays usable.
    let slack = ceil_f(4.0 * delta * m as f64)
        .min(path.len() / 2)
        .min(path.len().saturating_sub(2));
    let sizes = [forest_size + slack, path.len() - slack];
    record(report, "split", format!(
        "path {} vertices, forest {} vertices, slack {}",
        path.len(), forest_size, slack
    ));

    let partition = crate::expansion::partition_vertices(g, d, &sizes, budget.seed, PARTITION_RETRIES)
        .map_err(|e| StageFail::new("partition", e.to_string()))?;
    record(report, "partition", format!(
        "parts {:?}, expansions {:?}, attempts {}",
        sizes, partition.part_expansions, partition.attempts
    ));

    let u_f = &partition.parts[0];
    let u_p = &partition.parts[1];
    let allowed = member_mask(n, u_f);
    let mut used = vec![false; n];
    let mut phi = vec![usize::MAX; n];
    let comps = embed_forest_stage(g, t, &keep, &[s_f, t_f], &allowed, &mut used, &mut phi, budget)?;
    report.forest_components = Some(comps);
    record(report, "forest", format!("{comps} components embedded into {} hosts", u_f.len()));

    let (v, w) = pick_anchors(g, phi[s_f], phi[t_f], u_p)
        .ok_or_else(|| StageFail::new("anchors", "no adjacent anchor pair in the path region"))?;
    record(report, "anchors", format!("anchors {v}, {w}"));

    let free: Vec<usize> = (0..n).filter(|&h| !used[h]).collect();
    hamilton_stage(g, &free, v, w, &path, &mut phi, &mut used, budget)?;
    record(report, "hamilton", format!("path of {} vertices routed", path.len()));

    Ok(Embedding::new(phi))
}

// ---------------------------------------------------------------------------
// Case 2: many leaves plus a second-level bare path
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn case2_pipeline(
    g: &Graph,
    t: &Tree,
    delta: f64,
    d: f64,
    m: usize,
    th: &CaseThresholds,
    budget: &EmbedBudget,
    report: &mut EmbedReport,
) -> Result<Embedding, StageFail> {
    let n = g.n();
    if th.tau_path < 4 {
        return Err(StageFail::new("classify", "input: case 2 needs tau_path >= 4"));
    }
    let dec = decompose(t);
    let leaves = dec.leaves.to_vec();
    let k_set = dec.leaf_neighbors.clone();

    // two disjoint half-length candidate subpaths of a long second-level
    // chain; use the one carrying at most half of the leaf neighbors
    let chain = dec
        .second_level_bare_paths
        .iter()
        .filter(|c| c.len() >= th.tau_path)
        .max_by(|a, b| a.len().cmp(&b.len()).then_with(|| b.cmp(a)))
        .ok_or_else(|| StageFail::new("split", "no second-level bare path long enough"))?;
    let half = th.tau_path / 2;
    let cand_a: Vec<usize> = chain[..half].to_vec();
    let cand_b: Vec<usize> = chain[chain.len() - half..].to_vec();
    let count_k = |c: &[usize]| c.iter().filter(|&&v| k_set.contains(v)).count();
    let (ka, kb) = (count_k(&cand_a), count_k(&cand_b));
    let path = if 2 * ka <= k_set.len() && (ka <= kb || 2 * kb > k_set.len()) {
        cand_a
    } else {
        cand_b
    };
    let (s_p, t_p) = (path[0], *path.last().unwrap());
    record(report, "split", format!(
        "second-level path of {} vertices carrying {} of {} leaf neighbors",
        path.len(),
        count_k(&path),
        k_set.len()
    ));

    let in_path = membership(n, &path);
    let in_leaves = membership(n, &leaves);
    let keep: Vec<bool> = (0..n).map(|v| !in_path[v] && !in_leaves[v]).collect();
    let s_f = attach_in_forest(t, s_p, &keep)
        .ok_or_else(|| StageFail::new("split", "no attachment for the path start"))?;
    let t_f = attach_in_forest(t, t_p, &keep)
        .ok_or_else(|| StageFail::new("split", "no attachment for the path end"))?;

    let forest_size = n - path.len() - leaves.len();
    let avail = (path.len() / 2).min(path.len().saturating_sub(2));
    let slack_l = ceil_f(delta * m as f64).min(avail / 2);
    let slack_f = ceil_f(4.0 * delta * m as f64).min(avail - slack_l);
    let sizes = [forest_size + slack_f, path.len() - slack_f - slack_l, leaves.len() + slack_l];
    let partition = crate::expansion::partition_vertices(g, d, &sizes, budget.seed, PARTITION_RETRIES)
        .map_err(|e| StageFail::new("partition", e.to_string()))?;
    record(report, "partition", format!(
        "parts {:?}, expansions {:?}, attempts {}",
        sizes, partition.part_expansions, partition.attempts
    ));
    let u_f = &partition.parts[0];
    let u_p = &partition.parts[1];
    let u_l = &partition.parts[2];

    let allowed = member_mask(n, u_f);
    let mut used = vec![false; n];
    let mut phi = vec![usize::MAX; n];
    let comps = embed_forest_stage(g, t, &keep, &[s_f, t_f], &allowed, &mut used, &mut phi, budget)?;
    report.forest_components = Some(comps);
    record(report, "forest", format!("{comps} components embedded"));

    // exceptional vertices of the leaf region: fewer than m neighbors among
    // the already-embedded forest portals
    let portals_f: Vec<usize> = k_set.iter().copied().filter(|&k| keep[k]).map(|k| phi[k]).collect();
    let portal_mask = membership(n, &portals_f);
    let exceptional: Vec<usize> = u_l
        .iter()
        .copied()
        .filter(|&u| g.neighbors(u).iter().filter(|&&w| portal_mask[w]).count() < m)
        .collect();
    let w_l: Vec<usize> = u_l
        .iter()
        .copied()
        .filter(|u| !exceptional.contains(u))
        .take(leaves.len())
        .collect();
    if w_l.len() < leaves.len() {
        return Err(StageFail::new(
            "exceptional",
            format!(
                "{} exceptional vertices leave only {} of the {} leaf slots",
                exceptional.len(),
                w_l.len(),
                leaves.len()
            ),
        ));
    }
    record(report, "exceptional", format!(
        "{} exceptional vertices avoided ({} forest portals)",
        exceptional.len(),
        portals_f.len()
    ));
    // re-check the avoidance directly: every reserved leaf slot keeps at
    // least m portal neighbors
    if let Some(&bad) = w_l
        .iter()
        .find(|&&u| g.neighbors(u).iter().filter(|&&w| portal_mask[w]).count() < m)
    {
        return Err(StageFail::new(
            "exceptional",
            format!("reserved vertex {bad} has fewer than {m} portal neighbors"),
        ));
    }

    let in_wl = membership(n, &w_l);
    let (v, w) = pick_anchors(g, phi[s_f], phi[t_f], u_p)
        .ok_or_else(|| StageFail::new("anchors", "no adjacent anchor pair in the path region"))?;
    record(report, "anchors", format!("anchors {v}, {w}"));

    let free: Vec<usize> = (0..n).filter(|&h| !used[h] && !in_wl[h]).collect();
    hamilton_stage(g, &free, v, w, &path, &mut phi, &mut used, budget)?;
    record(report, "hamilton", format!("second-level path of {} vertices routed", path.len()));

    // leaves by star matching from all portals (forest and path images)
    let centers: Vec<usize> = k_set.to_vec();
    let children_of = |k: usize| -> Vec<usize> {
        t.neighbors(k).iter().copied().filter(|&c| in_leaves[c]).collect()
    };
    star_stage(g, "leaves", &centers, &children_of, &w_l, &mut phi, &mut used)?;
    record(report, "leaves", format!("{} leaves attached to {} portals", leaves.len(), centers.len()));

    Ok(Embedding::new(phi))
}

// ---------------------------------------------------------------------------
// Case 3: two levels of leaves
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn case3_pipeline(
    g: &Graph,
    t: &Tree,
    delta: f64,
    d: f64,
    m: usize,
    th: &CaseThresholds,
    budget: &EmbedBudget,
    report: &mut EmbedReport,
) -> Result<Embedding, StageFail> {
    let n = g.n();
    let dec = decompose(t);
    let in_leaves = member_mask(n, &dec.leaves);

    // the second-level leaf block M, its attached first-level leaves, and
    // the neighbors of M in the leafless tree
    let block: Vec<usize> = dec.second_level_leaves.iter().copied().take(th.tau_leaves).collect();
    let in_block = membership(n, &block);
    let mut attached: Vec<usize> = Vec::new();
    let mut anchors_of_block = VertexSet::new();
    for &v in &block {
        for &w in t.neighbors(v) {
            if in_leaves[w] {
                attached.push(w);
            } else {
                anchors_of_block.insert(w);
            }
        }
    }
    attached.sort_unstable();
    let in_attached = membership(n, &attached);
    let anchors: Vec<usize> = anchors_of_block.to_vec();
    record(report, "split", format!(
        "block of {} second-level leaves, {} attached leaves, {} anchors",
        block.len(),
        attached.len(),
        anchors.len()
    ));

    let keep: Vec<bool> = (0..n).map(|v| !in_block[v] && !in_attached[v]).collect();
    let forest_size = n - block.len() - attached.len();

    let avail = (attached.len() / 2).min(attached.len().saturating_sub(1));
    let slack_m = ceil_f(delta * m as f64).min(avail / 2);
    let slack_f = ceil_f(4.0 * delta * m as f64).min(avail - slack_m);
    let sizes = [forest_size + slack_f, block.len() + slack_m, attached.len() - slack_f - slack_m];
    let partition = crate::expansion::partition_vertices(g, d, &sizes, budget.seed, PARTITION_RETRIES)
        .map_err(|e| StageFail::new("partition", e.to_string()))?;
    record(report, "partition", format!(
        "parts {:?}, expansions {:?}, attempts {}",
        sizes, partition.part_expansions, partition.attempts
    ));
    let u_f = &partition.parts[0];
    let u_m = &partition.parts[1];

    let allowed = member_mask(n, u_f);
    let mut used = vec![false; n];
    let mut phi = vec![usize::MAX; n];
    let comps = embed_forest_stage(g, t, &keep, &anchors, &allowed, &mut used, &mut phi, budget)?;
    report.forest_components = Some(comps);
    record(report, "forest", format!("{comps} component(s) embedded"));

    // exceptional vertices of the block region relative to the anchors
    let portals: Vec<usize> = anchors.iter().map(|&k| phi[k]).collect();
    let portal_mask = membership(n, &portals);
    let exceptional: Vec<usize> = u_m
        .iter()
        .copied()
        .filter(|&u| g.neighbors(u).iter().filter(|&&w| portal_mask[w]).count() < m)
        .collect();
    let w_m: Vec<usize> = u_m
        .iter()
        .copied()
        .filter(|u| !exceptional.contains(u))
        .take(block.len())
        .collect();
    if w_m.len() < block.len() {
        return Err(StageFail::new(
            "exceptional",
            format!(
                "{} exceptional vertices leave only {} of the {} block slots",
                exceptional.len(),
                w_m.len(),
                block.len()
            ),
        ));
    }
    record(report, "exceptional", format!("{} exceptional vertices avoided", exceptional.len()));
    if let Some(&bad) = w_m
        .iter()
        .find(|&&u| g.neighbors(u).iter().filter(|&&w| portal_mask[w]).count() < m)
    {
        return Err(StageFail::new(
            "exceptional",
            format!("reserved vertex {bad} has fewer than {m} portal neighbors"),
        ));
    }

    // second-level leaves via star matching from the anchor images
    let block_children_of = |k: usize| -> Vec<usize> {
        t.neighbors(k).iter().copied().filter(|&c| in_block[c]).collect()
    };
    star_stage(g, "second-level-leaves", &anchors, &block_children_of, &w_m, &mut phi, &mut used)?;
    record(report, "second-level-leaves", format!("{} block vertices matched", block.len()));

    // first-level leaves from the block images onto everything left
    let w_l: Vec<usize> = (0..n).filter(|&h| !used[h]).collect();
    debug_assert_eq!(w_l.len(), attached.len());
    let leaf_children_of = |k: usize| -> Vec<usize> {
        t.neighbors(k).iter().copied().filter(|&c| in_attached[c]).collect()
    };
    star_stage(g, "leaves", &block, &leaf_children_of, &w_l, &mut phi, &mut used)?;
    record(report, "leaves", format!("{} leaves matched", attached.len()));

    Ok(Embedding::new(phi))
}

// ---------------------------------------------------------------------------

fn ceil_f(x: f64) -> usize {
    x.ceil().max(0.0) as usize
}

fn membership(n: usize, items: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &v in items {
        mask[v] = true;
    }
    mask
}

fn member_mask(n: usize, set: &VertexSet) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &v in set.iter() {
        mask[v] = true;
    }
    mask
}

/// The unique tree neighbor of `v` outside the removed path, inside the
/// kept part.
fn attach_vertex(t: &Tree, v: usize, in_path: &[bool]) -> Option<usize> {
    t.neighbors(v).iter().copied().find(|&w| !in_path[w])
}

fn attach_in_forest(t: &Tree, v: usize, keep: &[bool]) -> Option<usize> {
    t.neighbors(v).iter().copied().find(|&w| keep[w])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_gnp;
    use crate::trees::tree_from_pruefer;

    fn budget(seed: u64) -> EmbedBudget {
        EmbedBudget::with_seed(seed)
    }

    #[test]
    fn all_small_trees_into_complete_hosts() {
        // exhaustive n = 6; the exact fallback covers NoCase classification
        let n = 6usize;
        let g = Graph::complete(n);
        let total = (n as u64).pow(n as u32 - 2);
        let mut seq = vec![0usize; n - 2];
        for code in 0..total {
            let mut c = code;
            for s in seq.iter_mut() {
                *s = (c % n as u64) as usize;
                c /= n as u64;
            }
            let t = tree_from_pruefer(&seq).unwrap();
            let out = embed_spanning_tree(&g, &t, (n - 1) as f64, 1.0, None, &budget(0)).unwrap();
            assert!(out.report.validated);
        }
    }

    #[test]
    fn case1_routes_long_path_tree() {
        // host: dense random graph; tree: star with a long tail
        let n = 48;
        let g = gen_gnp(n, 0.5, 3).unwrap();
        let mut edges: Vec<(usize, usize)> = (0..30).map(|i| (i, i + 1)).collect();
        for leaf in 31..n {
            edges.push((0, leaf));
        }
        let t = Tree::from_edges(n, &edges).unwrap();
        let th = CaseThresholds { tau_path: 12, tau_leaves: 40 };
        let out = embed_spanning_tree(&g, &t, 20.0, 6.0, Some(th), &budget(5)).unwrap();
        assert_eq!(out.report.case, Some(TreeCase::LongBarePath));
        assert!(out.report.fallback.is_none(), "pipeline should succeed: {:?}", out.report);
        assert!(out.report.validated);
    }

    #[test]
    fn case2_routes_caterpillar() {
        let n = 64;
        let g = gen_gnp(n, 0.5, 11).unwrap();
        // caterpillar: spine of 32, one leaf under each spine vertex
        let mut edges: Vec<(usize, usize)> = (0..31).map(|i| (i, i + 1)).collect();
        for i in 0..32 {
            edges.push((i, 32 + i));
        }
        let t = Tree::from_edges(n, &edges).unwrap();
        let th = CaseThresholds { tau_path: 24, tau_leaves: 20 };
        let out = embed_spanning_tree(&g, &t, 6.0, 8.0, Some(th), &budget(7)).unwrap();
        assert_eq!(out.report.case, Some(TreeCase::LeavesAndSecondLevelPath));
        assert!(out.report.fallback.is_none(), "pipeline should succeed: {:?}", out.report);
        assert!(out.report.validated);
    }

    #[test]
    fn case3_routes_two_level_broom() {
        let n = 49;
        let g = gen_gnp(n, 0.5, 13).unwrap();
        // core path of 9, below it 10 mid vertices, 3 leaves under each
        let mut edges: Vec<(usize, usize)> = (0..8).map(|i| (i, i + 1)).collect();
        for j in 0..10 {
            let mid = 9 + j;
            edges.push((j % 9, mid));
            for c in 0..3 {
                edges.push((mid, 19 + 3 * j + c));
            }
        }
        let t = Tree::from_edges(n, &edges).unwrap();
        let th = CaseThresholds { tau_path: 30, tau_leaves: 10 };
        let out = embed_spanning_tree(&g, &t, 8.0, 6.0, Some(th), &budget(17)).unwrap();
        assert_eq!(out.report.case, Some(TreeCase::TwoLeafLevels));
        assert!(out.report.fallback.is_none(), "pipeline should succeed: {:?}", out.report);
        assert!(out.report.validated);
    }

    #[test]
    fn input_errors() {
        let g = Graph::complete(5);
        let t = Tree::path(4);
        assert!(matches!(
            embed_spanning_tree(&g, &t, 3.0, 1.0, None, &budget(0)),
            Err(SpanningError::SizeMismatch { .. })
        ));
        let star = Tree::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert!(matches!(
            embed_spanning_tree(&g, &star, 2.0, 1.0, None, &budget(0)),
            Err(SpanningError::DegreeBound { .. })
        ));
    }

    #[test]
    fn degree_obstruction_fails_with_report() {
        // 4-leaf star into a 5-cycle: conclusive failure via exact fallback
        let star = Tree::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let c5 = Graph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]).unwrap();
        match embed_spanning_tree(&c5, &star, 4.0, 1.0, None, &budget(0)) {
            Err(SpanningError::Failed { report, .. }) => {
                assert_eq!(report.fallback.as_deref(), Some("exact"));
            }
            other => panic!("expected failure report, got {other:?}"),
        }
    }

    #[test]
    fn hamilton_degenerate_case1_for_paths() {
        // a spanning path: case 1 applies and the forest is two stubs
        let n = 24;
        let g = gen_gnp(n, 0.6, 19).unwrap();
        let t = Tree::path(n);
        let th = CaseThresholds { tau_path: 10, tau_leaves: 99 };
        let out = embed_spanning_tree(&g, &t, 4.0, 4.0, Some(th), &budget(23)).unwrap();
        assert_eq!(out.report.case, Some(TreeCase::LongBarePath));
        assert!(out.report.validated);
    }
}
