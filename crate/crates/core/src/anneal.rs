//! Simulated annealing and the two-step base-matrix construction.
//!
//! Step 1 anneals a simple graph on `r_b` vertices with `c2 + 2·c3` edges that
//! contains the fixed Hamiltonian cycle `0 - 1 - ... - (r_b-1) - 0`. Step 2
//! anneals a set of `c3` disjoint pairs of incident non-cycle edges, each pair
//! being merged into one three-vertex hyperedge. The incidence matrix of the
//! result is an `r_b × (c2 + c3)` base matrix with column weights two and three.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::{dp_walk_counts, merge_cycle_profile, merge_edges, Hypergraph};
use crate::seed::{self, Rng};

/// Annealing schedule `t_I = t0 · t_step^I` with
/// `t_step = (t_end / t0)^(1 / i_max)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaConfig {
    pub i_max: u64,
    pub t0: f64,
    pub t_end: f64,
    pub seed: u64,
}

impl SaConfig {
    pub fn new(i_max: u64, t0: f64, t_end: f64, seed: u64) -> Result<Self> {
        if i_max == 0 {
            return Err(Error::Infeasible("annealing needs at least one iteration".into()));
        }
        if !(t_end > 0.0 && t_end <= t0 && t0.is_finite()) {
            return Err(Error::Infeasible(format!(
                "temperatures must satisfy 0 < t_end <= t0, got t0={t0}, t_end={t_end}"
            )));
        }
        Ok(SaConfig { i_max, t0, t_end, seed })
    }

    /// Zero-temperature schedule: only non-worsening moves are accepted.
    pub fn greedy(i_max: u64, seed: u64) -> Self {
        SaConfig {
            i_max,
            t0: 0.0,
            t_end: 0.0,
            seed,
        }
    }

    pub fn t_step(&self) -> f64 {
        if self.t0 <= 0.0 {
            return 1.0;
        }
        (self.t_end / self.t0).powf(1.0 / self.i_max as f64)
    }

    /// Temperature at iteration `i` (1-based).
    pub fn temperature(&self, i: u64) -> f64 {
        self.t0 * self.t_step().powf(i as f64)
    }
}

/// Step-1 initial temperatures for 26 × 52 base matrices, keyed by `c3`.
/// Every row uses `t_end = 1e-7`; Step 2 uses `t0 = 10`.
pub const TABLE_STEP1_T0: [(usize, f64); 4] = [(20, 1.603), (15, 1.375), (10, 1.298), (0, 0.862)];
pub const DEFAULT_STEP2_T0: f64 = 10.0;
pub const DEFAULT_T_END: f64 = 1e-7;
pub const DEFAULT_I_MAX: u64 = 1_000_000;

/// Tabulated Step-1 `t0` for `c3`, if that row exists.
pub fn table_step1_t0(c3: usize) -> Option<f64> {
    TABLE_STEP1_T0.iter().find(|r| r.0 == c3).map(|r| r.1)
}

/// Step-1 `t0` of the tabulated row nearest to `c3` (the smaller `c3` on ties).
pub fn default_step1_t0(c3: usize) -> f64 {
    TABLE_STEP1_T0
        .iter()
        .min_by_key(|r| (r.0.abs_diff(c3), r.0))
        .map(|r| r.1)
        .expect("table is not empty")
}

/// Result of an annealing run.
#[derive(Clone, Debug)]
pub struct SaOutcome<S> {
    pub best: S,
    pub best_energy: f64,
    pub last: S,
    pub last_energy: f64,
    pub accepted: u64,
}

/// Runs `cfg.i_max` Metropolis steps and returns the lowest-energy state seen.
///
/// A candidate with energy `E'` replaces the current state (energy `E`) when
/// `E' <= E`, or otherwise with probability `exp(-(E' - E) / t_I)`. Infinite
/// energies are never accepted. The generator is seeded from `cfg.seed` and
/// shared between `perturb` and the acceptance draws.
pub fn simulated_annealing<S, E, P>(initial: S, mut energy: E, mut perturb: P, cfg: &SaConfig) -> SaOutcome<S>
where
    S: Clone,
    E: FnMut(&S) -> f64,
    P: FnMut(&S, &mut Rng) -> S,
{
    let mut rng = seed::rng(cfg.seed);
    let t_step = cfg.t_step();
    let mut t = cfg.t0;
    let mut cur_e = energy(&initial);
    let mut cur = initial;
    let mut best = cur.clone();
    let mut best_e = cur_e;
    let mut accepted = 0;
    for _ in 0..cfg.i_max {
        t *= t_step;
        let cand = perturb(&cur, &mut rng);
        let cand_e = energy(&cand);
        let accept = if cand_e <= cur_e {
            true
        } else if cand_e.is_finite() && t > 0.0 {
            rng.random::<f64>() < (-(cand_e - cur_e) / t).exp()
        } else {
            false
        };
        if accept {
            cur = cand;
            cur_e = cand_e;
            accepted += 1;
            if cur_e < best_e {
                best = cur.clone();
                best_e = cur_e;
            }
        }
    }
    SaOutcome {
        best,
        best_energy: best_e,
        last: cur,
        last_energy: cur_e,
        accepted,
    }
}

/// Which length enters the weight `x^{2(g-2)}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LengthUnit {
    /// `g` is the Tanner-graph length `2ℓ`.
    #[default]
    Tanner,
    /// `g` is the hypergraph length `ℓ`.
    Hyper,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyParams {
    pub x: f64,
    pub gamma: f64,
    /// Longest cycle counted, in hyperedge steps.
    pub l_max: usize,
    pub unit: LengthUnit,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            x: 0.1,
            gamma: 20.0,
            l_max: 6,
            unit: LengthUnit::Tanner,
        }
    }
}

impl EnergyParams {
    /// Weight `x^{2(g-2)}` of a cycle of `l` hyperedge steps.
    pub fn weight(&self, l: usize) -> f64 {
        let g = match self.unit {
            LengthUnit::Tanner => 2 * l,
            LengthUnit::Hyper => l,
        } as f64;
        self.x.powf(2.0 * (g - 2.0))
    }
}

/// `Σ_ℓ (N_ℓ + γ·m_ℓ)·x^{2(g-2)}`, or `+∞` for a graph with self-loops,
/// parallel edges or a broken Hamiltonian cycle.
pub fn step1_energy(g: &Hypergraph, p: &EnergyParams) -> f64 {
    if g.validate().is_err() {
        return f64::INFINITY;
    }
    let n = dp_walk_counts(g, p.l_max);
    let m = merge_cycle_profile(g, p.l_max);
    (2..=p.l_max)
        .map(|l| (n.get(l) as f64 + p.gamma * m.get(l) as f64) * p.weight(l))
        .sum()
}

/// A set of pairs of edge indices into a fixed Step-1 graph.
pub type MergeSet = Vec<(usize, usize)>;

/// `Σ_ℓ N_ℓ·x^{2(g-2)}` of the merged hypergraph, or `+∞` if `s` is illegal.
pub fn step2_energy(s: &[(usize, usize)], base: &Hypergraph, p: &EnergyParams) -> f64 {
    match merge_edges(base, s) {
        Ok(h) => {
            let n = dp_walk_counts(&h, p.l_max);
            (2..=p.l_max).map(|l| n.get(l) as f64 * p.weight(l)).sum()
        }
        Err(_) => f64::INFINITY,
    }
}

pub const RETRY_BOUND: usize = 100;

/// Moves one non-cycle edge `{u,v}` to `{u,w}` (roles of `u`, `v` swapped
/// with probability 1/2), where `w ∉ {u, v}` and `{u,w}` is absent. The moved
/// edge keeps its index. Returns the input unchanged after [`RETRY_BOUND`]
/// failed draws.
pub fn step1_perturb(g: &Hypergraph, rng: &mut Rng) -> Hypergraph {
    let free: Vec<usize> = (0..g.edges().len()).filter(|&i| !g.is_hamiltonian_edge(i)).collect();
    if free.is_empty() {
        return g.clone();
    }
    let n = g.n_vertices();
    for _ in 0..RETRY_BOUND {
        let idx = *free.choose(rng).unwrap();
        let e = &g.edges()[idx];
        let (mut u, mut v) = (e[0], e[1]);
        if rng.random::<bool>() {
            std::mem::swap(&mut u, &mut v);
        }
        let options: Vec<usize> = (0..n)
            .filter(|&w| w != u && w != v && g.find_edge(&sorted2(u, w)).is_none())
            .collect();
        if let Some(&w) = options.choose(rng) {
            let mut out = g.clone();
            out.edges_mut()[idx] = sorted2(u, w).to_vec();
            return out;
        }
    }
    g.clone()
}

fn sorted2(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Drops a random pair from `s` and adds `({u,v}, {u,w})` for a random vertex
/// `u` and two distinct random neighbours, provided neither edge is on the
/// Hamiltonian cycle. Returns `s` unchanged after [`RETRY_BOUND`] failed draws.
pub fn step2_perturb(s: &[(usize, usize)], base: &Hypergraph, rng: &mut Rng) -> MergeSet {
    if s.is_empty() {
        return s.to_vec();
    }
    let n = base.n_vertices();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in base.edges().iter().enumerate() {
        for &v in e {
            incident[v].push(i);
        }
    }
    for _ in 0..RETRY_BOUND {
        let u = rng.random_range(0..n);
        let edges = &incident[u];
        if edges.len() < 2 {
            continue;
        }
        let picked: Vec<usize> = edges.choose_multiple(rng, 2).copied().collect();
        let (a, b) = (picked[0], picked[1]);
        if base.is_hamiltonian_edge(a) || base.is_hamiltonian_edge(b) {
            continue;
        }
        let mut out = s.to_vec();
        let drop = rng.random_range(0..out.len());
        out.remove(drop);
        out.push((a.min(b), a.max(b)));
        return out;
    }
    s.to_vec()
}

/// The fixed Hamiltonian cycle plus `extra` uniformly random absent edges.
pub fn random_step1_graph(r_b: usize, extra: usize, rng: &mut Rng) -> Result<Hypergraph> {
    let total = r_b * (r_b - 1) / 2;
    if r_b + extra > total {
        return Err(Error::Infeasible(format!(
            "{} edges do not fit in a simple graph on {r_b} vertices",
            r_b + extra
        )));
    }
    let mut g = Hypergraph::cycle(r_b);
    let mut absent: Vec<[usize; 2]> = Vec::new();
    for a in 0..r_b {
        for b in a + 1..r_b {
            if g.find_edge(&[a, b]).is_none() {
                absent.push([a, b]);
            }
        }
    }
    absent.shuffle(rng);
    for e in absent.into_iter().take(extra) {
        g.edges_mut().push(e.to_vec());
    }
    Ok(g)
}

/// Decomposes the non-Hamiltonian two-edges of `g` into disjoint incident
/// pairs, leaving at most one edge per connected component unpaired.
///
/// Works on a randomized depth-first forest: vertices are processed deepest
/// first, and each pairs up its remaining edges, borrowing the edge to its
/// parent when the count is odd.
pub fn random_pairing(g: &Hypergraph, rng: &mut Rng) -> MergeSet {
    let n = g.n_vertices();
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (i, e) in g.edges().iter().enumerate() {
        if e.len() == 2 && !g.is_hamiltonian_edge(i) {
            adj[e[0]].push((e[1], i));
            adj[e[1]].push((e[0], i));
        }
    }
    for a in &mut adj {
        a.shuffle(rng);
    }
    let mut roots: Vec<usize> = (0..n).collect();
    roots.shuffle(rng);
    let mut parent_edge = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for &r in &roots {
        if seen[r] {
            continue;
        }
        seen[r] = true;
        let mut stack = vec![(r, 0usize)];
        order.push(r);
        while let Some(&mut (v, ref mut k)) = stack.last_mut() {
            if *k == adj[v].len() {
                stack.pop();
                continue;
            }
            let (w, e) = adj[v][*k];
            *k += 1;
            if !seen[w] {
                seen[w] = true;
                parent_edge[w] = e;
                order.push(w);
                stack.push((w, 0));
            }
        }
    }
    let mut used = vec![false; g.edges().len()];
    let mut pairs = Vec::new();
    for &v in order.iter().rev() {
        let mut open: Vec<usize> = adj[v]
            .iter()
            .map(|&(_, e)| e)
            .filter(|&e| !used[e] && e != parent_edge[v])
            .collect();
        if open.len() % 2 == 1 && parent_edge[v] != usize::MAX {
            open.push(parent_edge[v]);
        }
        for chunk in open.chunks_exact(2) {
            used[chunk[0]] = true;
            used[chunk[1]] = true;
            pairs.push((chunk[0].min(chunk[1]), chunk[0].max(chunk[1])));
        }
    }
    pairs
}

/// Two-step construction of an `r_b`-vertex hypergraph with `c2` two-vertex
/// edges (including the Hamiltonian cycle) and `c3` three-vertex edges.
pub fn construct_base(
    r_b: usize,
    c2: usize,
    c3: usize,
    cfg1: &SaConfig,
    cfg2: &SaConfig,
    p: &EnergyParams,
) -> Result<Hypergraph> {
    if r_b < 3 {
        return Err(Error::Infeasible(format!("need at least 3 rows, got {r_b}")));
    }
    if c2 < r_b {
        return Err(Error::Infeasible(format!(
            "c2 = {c2} weight-2 columns cannot hold a Hamiltonian cycle on {r_b} rows"
        )));
    }
    let mut rng = seed::rng_for(cfg1.seed, "anneal.init");
    let g0 = random_step1_graph(r_b, c2 + 2 * c3 - r_b, &mut rng)?;
    let step1 = if c2 + 2 * c3 > r_b {
        simulated_annealing(g0, |g| step1_energy(g, p), step1_perturb, cfg1).best
    } else {
        g0
    };
    if c3 == 0 {
        return Ok(step1);
    }
    let mut rng = seed::rng_for(cfg2.seed, "anneal.pairs");
    let mut pairs = random_pairing(&step1, &mut rng);
    if pairs.len() < c3 {
        return Err(Error::Infeasible(format!(
            "only {} disjoint mergeable pairs exist, {c3} required",
            pairs.len()
        )));
    }
    pairs.shuffle(&mut rng);
    pairs.truncate(c3);
    let best = simulated_annealing(
        pairs,
        |s| step2_energy(s, &step1, p),
        |s, rng| step2_perturb(s, &step1, rng),
        cfg2,
    );
    if !best.best_energy.is_finite() {
        return Err(Error::Infeasible("no legal merge set found".into()));
    }
    merge_edges(&step1, &best.best)
}
