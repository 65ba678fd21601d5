//! The gen / check / embed / game subcommands.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;

use spantree::embed::{embed_spanning_tree, EmbedBudget, SpanningError};
use spantree::expansion::{check_expander_exact, check_expander_sampled, VerdictStatus};
use spantree::games::{universality_game, Strategy};
use spantree::generators::{self, GenKind, GenSpec};
use spantree::trees::{random_bounded_degree_tree, CaseThresholds, Tree};
use spantree::Graph;

pub const SCHEMA_VERSION: u32 = 1;

// ---------------------------------------------------------------------------
// file helpers
// ---------------------------------------------------------------------------

pub fn load_graph(path: &Path) -> Result<Graph> {
    let body = std::fs::read_to_string(path)
        .with_context(|| format!("reading graph file {}", path.display()))?;
    let trimmed = body.trim_start();
    if trimmed.starts_with('{') {
        Graph::from_json(trimmed).with_context(|| format!("parsing {}", path.display()))
    } else {
        Graph::from_text(&body)
            .map(|(g, _)| g)
            .with_context(|| format!("parsing {}", path.display()))
    }
}

pub fn load_tree(path: &Path) -> Result<Tree> {
    let body = std::fs::read_to_string(path)
        .with_context(|| format!("reading tree file {}", path.display()))?;
    let line = body
        .lines()
        .find(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .context("tree file has no data line")?;
    let parsed = if line.contains(':') {
        Tree::from_pruefer_line(line)
    } else {
        Tree::from_parent_line(line)
    };
    parsed.with_context(|| format!("parsing {}", path.display()))
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct GenArgs {
    #[command(subcommand)]
    kind: GenCmd,
}

#[derive(Subcommand)]
enum GenCmd {
    /// Binomial random graph G(n, p).
    Gnp {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random r-regular graph.
    Regular {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// G(n, p) made (k, l)-locally sparse by deleting a maximal family of
    /// dense k-sets.
    LocallySparse {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Complete graph K_n.
    Complete {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Vertex-doubled graph of a base graph file.
    Doubled {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Random tree with maximum degree at most delta, in parent-array form.
    Tree {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run_gen(args: GenArgs) -> Result<u8> {
    match args.kind {
        GenCmd::Gnp { n, p, seed, out } => {
            let spec = GenSpec::new(GenKind::Gnp { n, p }, seed);
            write_graph(&generators::generate(&spec)?, &spec.provenance(), &out)
        }
        GenCmd::Regular { n, r, seed, out } => {
            let spec = GenSpec::new(GenKind::RandomRegular { n, r }, seed);
            write_graph(&generators::generate(&spec)?, &spec.provenance(), &out)
        }
        GenCmd::LocallySparse { n, k, l, p, seed, out } => {
            let spec = GenSpec::new(GenKind::LocallySparse { n, k, l, p }, seed);
            write_graph(&generators::generate(&spec)?, &spec.provenance(), &out)
        }
        GenCmd::Complete { n, out } => {
            let spec = GenSpec::new(GenKind::Complete { n }, 0);
            write_graph(&generators::generate(&spec)?, &spec.provenance(), &out)
        }
        GenCmd::Doubled { base, seed, out } => {
            let h = load_graph(&base)?;
            let g = generators::gen_doubled(&h, seed);
            let provenance = format!(
                "genspec: {{\"kind\":{{\"doubled_file\":{}}},\"seed\":{}}}",
                serde_json::to_string(&base.display().to_string())?,
                seed
            );
            write_graph(&g, &provenance, &out)
        }
        GenCmd::Tree { n, delta, seed, out } => {
            let sampled = random_bounded_degree_tree(n, delta, seed)?;
            let provenance = format!(
                "treespec: {{\"n\":{n},\"delta\":{delta},\"seed\":{seed},\"uniform\":{}}}",
                sampled.uniform
            );
            let body = format!("# {}\n{}\n", provenance, sampled.tree.to_parent_line());
            std::fs::write(&out, body)
                .with_context(|| format!("writing {}", out.display()))?;
            Ok(0)
        }
    }
}

fn write_graph(g: &Graph, provenance: &str, out: &Path) -> Result<u8> {
    std::fs::write(out, g.to_text(Some(provenance)))
        .with_context(|| format!("writing {}", out.display()))?;
    Ok(0)
}

// ---------------------------------------------------------------------------
// check
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CheckMode {
    Exact,
    Sampled,
}

#[derive(Args)]
pub struct CheckArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    d: f64,
    #[arg(long, value_enum, default_value = "exact")]
    mode: CheckMode,
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    /// Required in sampled mode.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Serialize)]
struct CheckOutput {
    schema_version: u32,
    #[serde(flatten)]
    verdict: spantree::expansion::ExpanderVerdict,
}

pub fn run_check(args: CheckArgs) -> Result<u8> {
    let g = load_graph(&args.graph)?;
    let verdict = match args.mode {
        CheckMode::Exact => check_expander_exact(&g, args.d)?,
        CheckMode::Sampled => {
            let seed = args.seed.context("--seed is required in sampled mode")?;
            check_expander_sampled(&g, args.d, args.trials, seed)?
        }
    };
    let status = verdict.status;
    let payload = CheckOutput { schema_version: SCHEMA_VERSION, verdict };
    println!("{}", serde_json::to_string(&payload)?);
    Ok(match status {
        VerdictStatus::Pass | VerdictStatus::Unknown => 0,
        VerdictStatus::FailE1 | VerdictStatus::FailE2 => 1,
    })
}

// ---------------------------------------------------------------------------
// embed
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct EmbedArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    tree: PathBuf,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    d: f64,
    #[arg(long, requires = "tau_leaves")]
    tau_path: Option<usize>,
    #[arg(long, requires = "tau_path")]
    tau_leaves: Option<usize>,
    #[arg(long, default_value_t = 20_000)]
    backtracks: u64,
    #[arg(long, default_value_t = 30)]
    restarts: u64,
    #[arg(long)]
    seed: u64,
}

#[derive(Serialize)]
struct EmbedOutput<'a> {
    schema_version: u32,
    host: &'a str,
    pattern: &'a str,
    embedding: Option<&'a [usize]>,
    report: &'a spantree::embed::EmbedReport,
}

pub fn run_embed(args: EmbedArgs) -> Result<u8> {
    let g = load_graph(&args.graph)?;
    let t = load_tree(&args.tree)?;
    let thresholds = match (args.tau_path, args.tau_leaves) {
        (Some(tau_path), Some(tau_leaves)) => Some(CaseThresholds { tau_path, tau_leaves }),
        _ => None,
    };
    let budget = EmbedBudget {
        max_backtracks: args.backtracks,
        max_restarts: args.restarts,
        seed: args.seed,
    };
    let host = args.graph.display().to_string();
    let pattern = args.tree.display().to_string();
    match embed_spanning_tree(&g, &t, args.delta, args.d, thresholds, &budget) {
        Ok(out) => {
            debug_assert!(out.report.validated);
            let payload = EmbedOutput {
                schema_version: SCHEMA_VERSION,
                host: &host,
                pattern: &pattern,
                embedding: Some(&out.embedding.map),
                report: &out.report,
            };
            println!("{}", serde_json::to_string(&payload)?);
            Ok(0)
        }
        Err(SpanningError::Failed { report, .. }) => {
            let payload = EmbedOutput {
                schema_version: SCHEMA_VERSION,
                host: &host,
                pattern: &pattern,
                embedding: None,
                report: &report,
            };
            println!("{}", serde_json::to_string(&payload)?);
            Ok(1)
        }
        Err(e) => bail!(e),
    }
}

// ---------------------------------------------------------------------------
// game
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BreakerKind {
    Random,
    Greedy,
    Potential,
}

impl From<BreakerKind> for Strategy {
    fn from(k: BreakerKind) -> Strategy {
        match k {
            BreakerKind::Random => Strategy::Random,
            BreakerKind::Greedy => Strategy::Greedy,
            BreakerKind::Potential => Strategy::Potential,
        }
    }
}

#[derive(Args)]
pub struct GameArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    d: f64,
    #[arg(long)]
    b: usize,
    #[arg(long, value_enum, default_value = "random")]
    breaker: BreakerKind,
    #[arg(long, default_value_t = 10)]
    trials: u64,
    /// Spanning trees sampled per trial.
    #[arg(long, default_value_t = 5)]
    trees: u64,
    /// Degree bound for the sampled trees.
    #[arg(long, default_value_t = 4.0)]
    delta: f64,
    #[arg(long)]
    seed: u64,
}

#[derive(Serialize)]
struct GameSummary {
    schema_version: u32,
    trials: u64,
    criterion_potential: f64,
    criterion_holds: bool,
    maker_wins: u64,
    expander_passes: u64,
    expander_unknowns: u64,
    expander_fails: u64,
    trees_attempted: u64,
    trees_embedded: u64,
    trees_validated: u64,
    per_trial: Vec<spantree::games::UniversalityReport>,
}

pub fn run_game(args: GameArgs) -> Result<u8> {
    let g = load_graph(&args.graph)?;
    let mut per_trial = Vec::with_capacity(args.trials as usize);
    for trial in 0..args.trials {
        let trial_seed = args.seed.wrapping_add(trial.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let trees: Vec<Tree> = (0..args.trees)
            .map(|i| {
                random_bounded_degree_tree(g.n(), args.delta, trial_seed.wrapping_add(i))
                    .map(|s| s.tree)
            })
            .collect::<Result<_, _>>()?;
        let report = universality_game(
            &g,
            args.delta,
            args.d,
            args.b,
            &trees,
            args.breaker.into(),
            trial_seed,
        )?;
        per_trial.push(report);
    }

    let summary = GameSummary {
        schema_version: SCHEMA_VERSION,
        trials: args.trials,
        criterion_potential: per_trial.first().map_or(f64::NAN, |r| r.criterion_potential),
        criterion_holds: per_trial.first().is_some_and(|r| r.criterion_holds),
        maker_wins: per_trial.iter().filter(|r| r.maker_won).count() as u64,
        expander_passes: per_trial
            .iter()
            .filter(|r| r.expander_verdict.is_pass())
            .count() as u64,
        expander_unknowns: per_trial
            .iter()
            .filter(|r| r.expander_verdict.status == VerdictStatus::Unknown)
            .count() as u64,
        expander_fails: per_trial
            .iter()
            .filter(|r| r.expander_verdict.is_fail())
            .count() as u64,
        trees_attempted: per_trial.iter().map(|r| r.tree_outcomes.len() as u64).sum(),
        trees_embedded: per_trial
            .iter()
            .map(|r| r.tree_outcomes.iter().filter(|o| o.embedded).count() as u64)
            .sum(),
        trees_validated: per_trial
            .iter()
            .map(|r| r.tree_outcomes.iter().filter(|o| o.validated).count() as u64)
            .sum(),
        per_trial,
    };
    println!("{}", serde_json::to_string(&summary)?);
    Ok(0)
}

// ---------------------------------------------------------------------------
// experiment / tailcheck argument types live here for main's Subcommand
// ---------------------------------------------------------------------------

#[derive(Args)]
pub struct ExperimentArgs {
    /// JSON config file; see the guide for the schema.
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistKind {
    Binomial,
    Hypergeometric,
}

#[derive(Args)]
pub struct TailcheckArgs {
    #[arg(long, value_enum)]
    pub dist: DistKind,
    /// Population (hypergeometric) or trial count (binomial).
    #[arg(long)]
    pub n: u64,
    /// Success probability (binomial only).
    #[arg(long)]
    pub p: Option<f64>,
    /// Success states in the population (hypergeometric only).
    #[arg(long)]
    pub m: Option<u64>,
    /// Draws (hypergeometric only).
    #[arg(long)]
    pub l: Option<u64>,
    /// Relative deviation, in (0, 3/2].
    #[arg(long)]
    pub eps: f64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long)]
    pub seed: u64,
}
