//! Maker-Breaker games on hypergraphs, the Erdős–Selfridge potential
//! strategy, and the reversed expander game.
//!
//! In an `(a : b)` game Maker claims `a` and Breaker claims `b` unclaimed
//! board elements per turn, Maker first; Maker wins by owning a complete
//! winning set, Breaker by touching every winning set.
//!
//! The potential of a family is `sum over F of (1+b)^(-|F|/a)`. For the
//! side playing the *toucher* role (classically Breaker), a start value
//! below `1/(1+b)` certifies a win: the greedy strategy claims the element
//! whose removal decreases the live potential the most, where a set is
//! live while the toucher has not touched it and its size counts only
//! elements the opponent has not claimed.
//!
//! The expander game reverses roles: winning sets are the edge sets
//! between vertex-set pairs whose coverage certifies the expansion
//! predicate, and the builder of the expander plays the toucher on them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combos::{binomial, for_each_subset};
use crate::expansion::m_param;
use crate::graph::Graph;

#[derive(Debug, Error, PartialEq)]
pub enum GameError {
    #[error("winning set index {0} out of range for board of {1}")]
    IndexOutOfRange(usize, usize),
    #[error("biases must be at least 1")]
    BadBias,
    #[error("no unclaimed element left")]
    BoardExhausted,
    #[error("strategy picked element {0}, which is already claimed")]
    StrategyFault(usize),
    #[error("too large for exact enumeration: {sets} sets exceed the guard {guard}")]
    TooLarge { sets: u64, guard: u64 },
    #[error("expander predicate unsatisfiable at set size {k}: no graph on {n} vertices qualifies")]
    Unsatisfiable { k: usize, n: usize },
    #[error(transparent)]
    Expansion(#[from] crate::expansion::ExpansionError),
}

/// A Maker-Breaker game instance: board elements are host edges, winning
/// sets are index sets into the board.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameHypergraph {
    pub board: Vec<(usize, usize)>,
    pub winning_sets: Vec<Vec<usize>>,
    pub maker_bias: usize,
    pub breaker_bias: usize,
}

impl GameHypergraph {
    pub fn new(
        board: Vec<(usize, usize)>,
        winning_sets: Vec<Vec<usize>>,
        maker_bias: usize,
        breaker_bias: usize,
    ) -> Result<Self, GameError> {
        if maker_bias == 0 || breaker_bias == 0 {
            return Err(GameError::BadBias);
        }
        for set in &winning_sets {
            for &i in set {
                if i >= board.len() {
                    return Err(GameError::IndexOutOfRange(i, board.len()));
                }
            }
        }
        Ok(GameHypergraph { board, winning_sets, maker_bias, breaker_bias })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim {
    Unclaimed,
    Maker,
    Breaker,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Maker,
    Breaker,
}

impl Side {
    fn claim(self) -> Claim {
        match self {
            Side::Maker => Claim::Maker,
            Side::Breaker => Claim::Breaker,
        }
    }
}

/// Board state during play.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameState {
    pub claims: Vec<Claim>,
    pub turn: Side,
    pub picks_left: usize,
}

impl GameState {
    pub fn new(h: &GameHypergraph, first: Side) -> Self {
        GameState {
            claims: vec![Claim::Unclaimed; h.board.len()],
            turn: first,
            picks_left: match first {
                Side::Maker => h.maker_bias,
                Side::Breaker => h.breaker_bias,
            },
        }
    }

    pub fn unclaimed(&self) -> impl Iterator<Item = usize> + '_ {
        self.claims
            .iter()
            .enumerate()
            .filter(|(_, c)| **c == Claim::Unclaimed)
            .map(|(i, _)| i)
    }
}

/// Start-of-game potential `sum over F of (1+b)^(-|F|/a)`, taking `a` as
/// the toucher's opponent bias and `b` as the toucher bias from the
/// hypergraph (`a = maker_bias`, `b = breaker_bias`).
pub fn es_potential(h: &GameHypergraph) -> f64 {
    let state = GameState::new(h, Side::Maker);
    es_potential_state(h, &state, Side::Breaker)
}

/// In-play potential for the side `toucher` whose goal is to touch every
/// winning set: sets already touched by the toucher are dropped, and `|F|`
/// counts the elements not yet claimed by the opponent.
pub fn es_potential_state(h: &GameHypergraph, state: &GameState, toucher: Side) -> f64 {
    let (a, b) = biases_for(h, toucher);
    let base = (1 + b) as f64;
    let mut total = 0.0;
    for set in &h.winning_sets {
        if let Some(weight) = live_weight(set, state, toucher, a, base) {
            total += weight;
        }
    }
    total
}

fn biases_for(h: &GameHypergraph, toucher: Side) -> (usize, usize) {
    match toucher {
        Side::Breaker => (h.maker_bias, h.breaker_bias),
        Side::Maker => (h.breaker_bias, h.maker_bias),
    }
}

/// `(1+b)^(-|F|/a)` for a live set, `None` for a set the toucher already
/// touched.
fn live_weight(
    set: &[usize],
    state: &GameState,
    toucher: Side,
    a: usize,
    base: f64,
) -> Option<f64> {
    let mine = toucher.claim();
    let mut remaining = 0usize;
    for &i in set {
        let c = state.claims[i];
        if c == mine {
            return None;
        }
        if c == Claim::Unclaimed {
            remaining += 1;
        }
    }
    Some(base.powf(-(remaining as f64) / a as f64))
}

/// The greedy potential move for the toucher: the unclaimed element whose
/// claiming maximally decreases the potential, ties to the lowest index.
pub fn potential_move(
    h: &GameHypergraph,
    state: &GameState,
    toucher: Side,
) -> Result<usize, GameError> {
    let (a, b) = biases_for(h, toucher);
    let base = (1 + b) as f64;
    let mut gain = vec![0.0f64; h.board.len()];
    for set in &h.winning_sets {
        if let Some(weight) = live_weight(set, state, toucher, a, base) {
            for &i in set {
                if state.claims[i] == Claim::Unclaimed {
                    gain[i] += weight;
                }
            }
        }
    }
    state
        .unclaimed()
        .max_by(|&i, &j| gain[i].partial_cmp(&gain[j]).unwrap().then(j.cmp(&i)))
        .ok_or(GameError::BoardExhausted)
}

/// Breaker's Erdős–Selfridge move (Breaker is the toucher in the direct
/// game).
pub fn breaker_potential_move(h: &GameHypergraph, state: &GameState) -> Result<usize, GameError> {
    potential_move(h, state, Side::Breaker)
}

/// Move suppliers for simulated play.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Uniform over unclaimed elements.
    Random,
    /// Erdős–Selfridge greedy for this side in the toucher role.
    Potential,
    /// Mirror-image greedy: plays the potential move of the opposing role,
    /// i.e. grabs what the toucher would most want to remove.
    Greedy,
}

impl Strategy {
    fn pick(
        &self,
        h: &GameHypergraph,
        state: &GameState,
        side: Side,
        rng: &mut ChaCha8Rng,
    ) -> Result<usize, GameError> {
        match self {
            Strategy::Random => {
                let free: Vec<usize> = state.unclaimed().collect();
                if free.is_empty() {
                    return Err(GameError::BoardExhausted);
                }
                Ok(free[rng.gen_range(0..free.len())])
            }
            Strategy::Potential => potential_move(h, state, side),
            Strategy::Greedy => {
                let other = match side {
                    Side::Maker => Side::Breaker,
                    Side::Breaker => Side::Maker,
                };
                potential_move(h, state, other)
            }
        }
    }
}

/// One move of a finished game.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Move {
    pub side: Side,
    pub element: usize,
}

/// Full record of a simulated game.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GameTranscript {
    pub moves: Vec<Move>,
    pub winner: Side,
    pub claims: Vec<Claim>,
    pub maker_edges: Vec<(usize, usize)>,
    pub first_mover: Side,
    pub initial_potential: f64,
    pub final_potential: f64,
}

/// Simulates a full game, Maker moving first. Ends early once the winner
/// is determined; the winner is Maker iff some winning set is fully
/// Maker-claimed by then. Deterministic for fixed strategies and seed.
pub fn play_game(
    h: &GameHypergraph,
    maker: Strategy,
    breaker: Strategy,
    seed: u64,
) -> Result<GameTranscript, GameError> {
    play_game_from(h, maker, breaker, seed, Side::Maker)
}

/// [`play_game`] with an explicit first mover.
pub fn play_game_from(
    h: &GameHypergraph,
    maker: Strategy,
    breaker: Strategy,
    seed: u64,
    first: Side,
) -> Result<GameTranscript, GameError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = GameState::new(h, first);
    let mut moves = Vec::with_capacity(h.board.len());
    let initial_potential = es_potential(h);

    // per-set progress: None once Breaker touched the set
    let mut maker_needed: Vec<Option<usize>> = h.winning_sets.iter().map(|s| Some(s.len())).collect();
    let mut incidence: Vec<Vec<usize>> = vec![Vec::new(); h.board.len()];
    for (si, set) in h.winning_sets.iter().enumerate() {
        for &i in set {
            incidence[i].push(si);
        }
    }
    let mut maker_won = h.winning_sets.iter().any(|s| s.is_empty());

    // the full board is played out; the winner is determined at the end
    while state.unclaimed().next().is_some() {
        let side = state.turn;
        let strat = match side {
            Side::Maker => maker,
            Side::Breaker => breaker,
        };
        let element = strat.pick(h, &state, side, &mut rng)?;
        if state.claims[element] != Claim::Unclaimed {
            return Err(GameError::StrategyFault(element));
        }
        state.claims[element] = side.claim();
        moves.push(Move { side, element });
        for &si in &incidence[element] {
            match (&mut maker_needed[si], side) {
                (Some(needed), Side::Maker) => {
                    *needed -= 1;
                    if *needed == 0 {
                        maker_won = true;
                    }
                }
                (slot @ Some(_), Side::Breaker) => {
                    *slot = None;
                }
                (None, _) => {}
            }
        }

        state.picks_left -= 1;
        if state.picks_left == 0 {
            state.turn = match side {
                Side::Maker => Side::Breaker,
                Side::Breaker => Side::Maker,
            };
            state.picks_left = match state.turn {
                Side::Maker => h.maker_bias,
                Side::Breaker => h.breaker_bias,
            };
        }
    }

    let winner = if maker_won { Side::Maker } else { Side::Breaker };
    let maker_edges: Vec<(usize, usize)> = state
        .claims
        .iter()
        .enumerate()
        .filter(|(_, c)| **c == Claim::Maker)
        .map(|(i, _)| h.board[i])
        .collect();
    let final_potential = es_potential_state(h, &state, Side::Breaker);
    Ok(GameTranscript {
        moves,
        winner,
        claims: state.claims,
        maker_edges,
        first_mover: first,
        initial_potential,
        final_potential,
    })
}

// ---------------------------------------------------------------------------
// The reversed expander game
// ---------------------------------------------------------------------------

pub const DEFAULT_GAME_GUARD: u64 = 20_000_000;

/// Winning sets of the reversed expander game on `G` with parameter `d`:
/// for disjoint `(X, Y)` with either `1 <= |X| < m` and
/// `|Y| = n - ceil((d+1)|X|) + 1`, or `|X| = |Y| = m`, one set holding all
/// board indices of `G`-edges between `X` and `Y`. A player owning one
/// element of every set owns a subgraph satisfying both expansion
/// conditions for `d`.
pub fn expander_game_hypergraph(g: &Graph, d: f64, b: usize) -> Result<GameHypergraph, GameError> {
    expander_game_hypergraph_guarded(g, d, b, DEFAULT_GAME_GUARD)
}

pub fn expander_game_hypergraph_guarded(
    g: &Graph,
    d: f64,
    b: usize,
    guard: u64,
) -> Result<GameHypergraph, GameError> {
    if b == 0 {
        return Err(GameError::BadBias);
    }
    let n = g.n();
    let m = m_param(n, d)?;
    let y_size = |k: usize| -> isize {
        let dk1 = ((d + 1.0) * k as f64).ceil() as isize;
        n as isize - dk1 + 1
    };

    // enumeration budget
    let mut sets: u64 = 0;
    for k in 1..m.min(n + 1) {
        let y = y_size(k);
        if y <= 0 {
            return Err(GameError::Unsatisfiable { k, n });
        }
        sets = sets.saturating_add(binomial(n, k).saturating_mul(binomial(n - k, y as usize)));
    }
    if 2 * m <= n {
        sets = sets.saturating_add(binomial(n, m).saturating_mul(binomial(n - m, m)) / 2);
    }
    if sets > guard {
        return Err(GameError::TooLarge { sets, guard });
    }

    let board: Vec<(usize, usize)> = g.edges().collect();
    let mut edge_index = std::collections::HashMap::new();
    for (i, &(u, v)) in board.iter().enumerate() {
        edge_index.insert((u, v), i);
    }
    let edge_of = |u: usize, v: usize| edge_index.get(&(u.min(v), u.max(v))).copied();

    let pool: Vec<usize> = (0..n).collect();
    let mut winning_sets = Vec::new();
    let collect_set = |x: &[usize], y: &[usize]| -> Vec<usize> {
        let mut f = Vec::new();
        for &u in x {
            for &v in y {
                if let Some(i) = edge_of(u, v) {
                    f.push(i);
                }
            }
        }
        f.sort_unstable();
        f
    };

    for k in 1..m.min(n + 1) {
        let y = y_size(k) as usize;
        for_each_subset(&pool, k, &mut |x| {
            let rest: Vec<usize> = (0..n).filter(|v| !x.contains(v)).collect();
            for_each_subset(&rest, y, &mut |yset| {
                winning_sets.push(collect_set(x, yset));
                true
            });
            true
        });
    }
    if 2 * m <= n {
        for_each_subset(&pool, m, &mut |x| {
            let min_x = x[0];
            let rest: Vec<usize> = (min_x + 1..n).filter(|v| !x.contains(v)).collect();
            for_each_subset(&rest, m, &mut |yset| {
                winning_sets.push(collect_set(x, yset));
                true
            });
            true
        });
    }

    // reversed roles: the expander builder is the toucher claiming one
    // element per turn; the opponent claims b
    GameHypergraph::new(board, winning_sets, b, 1)
}

/// The reversed-game potential `sum over F of 2^(-|F|/b)` and whether it
/// is below 1/2, which certifies that the builder can touch every set of
/// [`expander_game_hypergraph`] against bias `b`.
pub fn maker_win_criterion(g: &Graph, d: f64, b: usize) -> Result<(f64, bool), GameError> {
    let h = expander_game_hypergraph(g, d, b)?;
    let potential = es_potential(&h);
    Ok((potential, potential < 0.5))
}

/// Per-tree outcome of the universality game.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TreeOutcome {
    pub embedded: bool,
    pub validated: bool,
    pub fallback: Option<String>,
}

/// End-to-end report of one universality game. Field names speak the
/// direct-game language: "maker" is the expander builder, even though the
/// builder occupies the toucher (engine Breaker) role of the reversed
/// hypergraph internally.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct UniversalityReport {
    /// Whether the builder touched every winning set, certifying the
    /// expansion predicate for its claimed subgraph.
    pub maker_won: bool,
    pub maker_edge_count: usize,
    pub expander_verdict: crate::expansion::ExpanderVerdict,
    pub criterion_potential: f64,
    pub criterion_holds: bool,
    pub tree_outcomes: Vec<TreeOutcome>,
    /// The builder moved first (the direct-game convention).
    pub maker_moved_first: bool,
}

/// Plays the `(1 : b)` game on the edges of `G`: the builder claims one
/// edge per turn with the toucher potential over the reversed expander
/// hypergraph, the adversary claims `b` with the given strategy. The
/// builder's claimed graph is then checked for `(n, d)`-expansion
/// (exactly when feasible, sampled otherwise) and every sampled tree is
/// embedded into it.
pub fn universality_game(
    g: &Graph,
    delta: f64,
    d: f64,
    b: usize,
    trees: &[crate::trees::Tree],
    adversary: Strategy,
    seed: u64,
) -> Result<UniversalityReport, GameError> {
    let h = expander_game_hypergraph(g, d, b)?;
    let potential = es_potential(&h);
    // reversed roles: engine Maker is the adversary (bias b), engine
    // Breaker is the builder (bias 1); the builder moves first
    let transcript = play_game_from(&h, adversary, Strategy::Potential, seed, Side::Breaker)?;
    let maker_won = transcript.winner == Side::Breaker;
    let builder_edges: Vec<(usize, usize)> = transcript
        .claims
        .iter()
        .enumerate()
        .filter(|(_, c)| **c == Claim::Breaker)
        .map(|(i, _)| h.board[i])
        .collect();

    let maker_graph =
        Graph::from_edges(g.n(), &builder_edges).expect("claimed edges form a graph");
    let verdict = match crate::expansion::check_expander_exact(&maker_graph, d) {
        Ok(v) => v,
        Err(crate::expansion::ExpansionError::TooLargeForExact { .. }) => {
            crate::expansion::check_expander_sampled(&maker_graph, d, 200, seed)?
        }
        Err(e) => return Err(GameError::Expansion(e)),
    };

    let budget = crate::embed::EmbedBudget::with_seed(seed);
    let tree_outcomes = trees
        .iter()
        .map(|t| match crate::embed::embed_spanning_tree(&maker_graph, t, delta, d, None, &budget) {
            Ok(out) => TreeOutcome {
                embedded: true,
                validated: out.report.validated,
                fallback: out.report.fallback,
            },
            Err(_) => TreeOutcome { embedded: false, validated: false, fallback: None },
        })
        .collect();

    Ok(UniversalityReport {
        maker_won,
        maker_edge_count: builder_edges.len(),
        expander_verdict: verdict,
        criterion_potential: potential,
        criterion_holds: potential < 0.5,
        tree_outcomes,
        maker_moved_first: true,
    })
}
