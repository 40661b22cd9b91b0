//! Hypergraphs, Tanner-graph cycles and the dynamic-programming cycle counter.
//!
//! A base matrix with column weights two and three is the incidence matrix of
//! a hypergraph: rows are vertices, columns are (hyper)edges. Cycle lengths in
//! this module are measured in hyperedge steps `ℓ`; the corresponding Tanner
//! graph cycle has length `2ℓ`.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::matrix::BinaryMatrix;

/// Vertices plus edges of size two or three, with an optional distinguished
/// Hamiltonian cycle made of two-vertex edges.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Hypergraph {
    n_vertices: usize,
    edges: Vec<Vec<usize>>,
    hamiltonian: Vec<usize>,
}

impl Hypergraph {
    /// Builds and validates a hypergraph. Each edge is sorted on input.
    pub fn new(n_vertices: usize, edges: Vec<Vec<usize>>, hamiltonian: Vec<usize>) -> Result<Self> {
        let h = Self::from_raw(n_vertices, edges, hamiltonian);
        h.validate()?;
        Ok(h)
    }

    /// Builds without validation. The result may contain self-loops or
    /// parallel edges; [`Hypergraph::validate`] reports them.
    pub fn from_raw(n_vertices: usize, mut edges: Vec<Vec<usize>>, hamiltonian: Vec<usize>) -> Self {
        for e in &mut edges {
            e.sort_unstable();
        }
        Hypergraph {
            n_vertices,
            edges,
            hamiltonian,
        }
    }

    /// The cycle `0 - 1 - ... - (n-1) - 0` as a graph whose edges are all
    /// Hamiltonian: `{k, k+1}` for `k < n-1` followed by `{0, n-1}`.
    pub fn cycle(n: usize) -> Self {
        let mut edges: Vec<Vec<usize>> = (0..n - 1).map(|k| vec![k, k + 1]).collect();
        edges.push(vec![0, n - 1]);
        Hypergraph {
            n_vertices: n,
            edges,
            hamiltonian: (0..n).collect(),
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn hamiltonian(&self) -> &[usize] {
        &self.hamiltonian
    }

    pub fn is_hamiltonian_edge(&self, idx: usize) -> bool {
        self.hamiltonian.contains(&idx)
    }

    /// Number of edges containing each vertex.
    pub fn vertex_degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_vertices];
        for e in &self.edges {
            for &v in e {
                deg[v] += 1;
            }
        }
        deg
    }

    /// Edge count by edge size.
    pub fn edge_size_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for e in &self.edges {
            *h.entry(e.len()).or_insert(0) += 1;
        }
        h
    }

    /// Index of the edge equal to `edge` (sorted), if present.
    pub fn find_edge(&self, edge: &[usize]) -> Option<usize> {
        self.edges.iter().position(|e| e == edge)
    }

    pub(crate) fn edges_mut(&mut self) -> &mut Vec<Vec<usize>> {
        &mut self.edges
    }

    /// Checks the structural invariants: edge sizes 2 or 3, vertices in range
    /// and distinct within an edge, no duplicate edges, and a Hamiltonian
    /// cycle (if any) of two-vertex edges visiting every vertex once.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidHypergraph(msg));
        for (i, e) in self.edges.iter().enumerate() {
            if !(2..=3).contains(&e.len()) {
                return bad(format!("edge {i} has {} vertices", e.len()));
            }
            if e.iter().any(|&v| v >= self.n_vertices) {
                return bad(format!("edge {i} refers to a vertex out of range"));
            }
            if e.windows(2).any(|w| w[0] == w[1]) {
                return bad(format!("edge {i} is a self-loop"));
            }
        }
        let mut sorted: Vec<&Vec<usize>> = self.edges.iter().collect();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return bad("parallel edges".into());
        }
        if self.hamiltonian.is_empty() {
            return Ok(());
        }
        if self.hamiltonian.len() != self.n_vertices || self.n_vertices < 3 {
            return bad("Hamiltonian cycle does not cover every vertex".into());
        }
        let mut deg = vec![0usize; self.n_vertices];
        let mut adj = vec![Vec::new(); self.n_vertices];
        for &idx in &self.hamiltonian {
            let Some(e) = self.edges.get(idx) else {
                return bad(format!("Hamiltonian index {idx} out of range"));
            };
            if e.len() != 2 {
                return bad(format!("Hamiltonian edge {idx} is a hyperedge"));
            }
            for &v in e {
                deg[v] += 1;
            }
            adj[e[0]].push(e[1]);
            adj[e[1]].push(e[0]);
        }
        if deg.iter().any(|&d| d != 2) {
            return bad("Hamiltonian edges do not form a cycle".into());
        }
        match self.hamiltonian_order() {
            Some(order) if order.len() == self.n_vertices => Ok(()),
            _ => bad("Hamiltonian edges form several disjoint cycles".into()),
        }
    }

    /// Vertices in the order the Hamiltonian cycle visits them, starting at
    /// vertex 0 and stepping first to its smaller cycle neighbour.
    pub fn hamiltonian_order(&self) -> Option<Vec<usize>> {
        if self.hamiltonian.is_empty() {
            return None;
        }
        let mut adj = vec![Vec::new(); self.n_vertices];
        for &idx in &self.hamiltonian {
            let e = self.edges.get(idx)?;
            adj[e[0]].push(e[1]);
            adj[e[1]].push(e[0]);
        }
        let mut order = vec![0];
        let mut prev = usize::MAX;
        let mut cur = 0;
        loop {
            let mut nbrs = adj[cur].clone();
            nbrs.sort_unstable();
            let next = *nbrs.iter().find(|&&w| w != prev)?;
            if next == 0 {
                break;
            }
            if order.len() > self.n_vertices {
                return None;
            }
            order.push(next);
            prev = cur;
            cur = next;
        }
        Some(order)
    }
}

/// Column order and row relabeling used by [`incidence_to_base`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceLayout {
    /// `row_of[v]` is the row of vertex `v`.
    pub row_of: Vec<usize>,
    /// `edge_of_col[j]` is the edge placed in column `j`.
    pub edge_of_col: Vec<usize>,
}

/// The layout that puts the Hamiltonian edges last, as `h0` followed by a
/// bidiagonal block, with rows numbered along the cycle.
pub fn incidence_layout(h: &Hypergraph) -> IncidenceLayout {
    let n = h.n_vertices();
    let Some(order) = h.hamiltonian_order() else {
        return IncidenceLayout {
            row_of: (0..n).collect(),
            edge_of_col: (0..h.edges().len()).collect(),
        };
    };
    let mut row_of = vec![0; n];
    for (k, &v) in order.iter().enumerate() {
        row_of[v] = k;
    }
    let ham_edge_between = |a: usize, b: usize| {
        let mut key = vec![order[a], order[b]];
        key.sort_unstable();
        *h.hamiltonian()
            .iter()
            .find(|&&idx| h.edges()[idx] == key)
            .expect("consecutive cycle vertices share a Hamiltonian edge")
    };
    let mut edge_of_col: Vec<usize> = (0..h.edges().len()).filter(|i| !h.is_hamiltonian_edge(*i)).collect();
    edge_of_col.push(ham_edge_between(0, n - 1));
    for k in 0..n - 1 {
        edge_of_col.push(ham_edge_between(k, k + 1));
    }
    IncidenceLayout { row_of, edge_of_col }
}

/// Incidence matrix of `h` (rows = vertices, columns = edges) laid out by
/// [`incidence_layout`]. For hypergraphs built on [`Hypergraph::cycle`] the
/// row order is the identity.
pub fn incidence_to_base(h: &Hypergraph) -> BinaryMatrix {
    let layout = incidence_layout(h);
    let mut b = BinaryMatrix::zeros(h.n_vertices(), h.edges().len());
    for (col, &e) in layout.edge_of_col.iter().enumerate() {
        for &v in &h.edges()[e] {
            b.set(layout.row_of[v], col, true);
        }
    }
    b
}

/// Hypergraph whose edges are the columns of `b`. Columns must have weight
/// two or three for the result to be valid.
pub fn base_to_hypergraph(b: &BinaryMatrix) -> Hypergraph {
    let edges = (0..b.cols()).map(|c| b.col_support(c)).collect();
    Hypergraph::from_raw(b.rows(), edges, Vec::new())
}

/// Counts keyed by cycle length in hyperedge steps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CycleCounts {
    counts: BTreeMap<usize, u128>,
}

impl CycleCounts {
    pub fn get(&self, len: usize) -> u128 {
        self.counts.get(&len).copied().unwrap_or(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, u128)> + '_ {
        self.counts.iter().map(|(&k, &v)| (k, v))
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Smallest length with a nonzero count.
    pub fn shortest(&self) -> Option<(usize, u128)> {
        self.iter().next()
    }

    pub(crate) fn add(&mut self, len: usize, n: u128) {
        if n > 0 {
            *self.counts.entry(len).or_insert(0) += n;
        }
    }
}

impl FromIterator<(usize, u128)> for CycleCounts {
    fn from_iter<I: IntoIterator<Item = (usize, u128)>>(iter: I) -> Self {
        let mut c = CycleCounts::default();
        for (k, v) in iter {
            c.add(k, v);
        }
        c
    }
}

/// Closed non-backtracking walk counts `Σ_{u,e} dp(ℓ, u, e, u)` for
/// `ℓ = 2..=l_max`.
///
/// `dp(ℓ, u, e, v)` counts walks of `ℓ` edge steps from `u` ending at `v`
/// through last edge `e`, never using the same edge twice in a row. At the
/// shortest cycle length the value is exactly `2ℓ` times the number of simple
/// cycles; longer lengths also count non-simple closed walks.
pub fn dp_walk_counts(h: &Hypergraph, l_max: usize) -> CycleCounts {
    closed_walk_counts(h.n_vertices(), h.edges(), l_max)
}

/// [`dp_walk_counts`] on a bare edge list; edges may have any size.
pub fn closed_walk_counts(n_vertices: usize, edges: &[Vec<usize>], l_max: usize) -> CycleCounts {
    // State (e, j) is "last edge e, standing on its j-th vertex".
    let mut offset = Vec::with_capacity(edges.len() + 1);
    offset.push(0);
    for e in edges {
        offset.push(offset.last().unwrap() + e.len());
    }
    let n_states = *offset.last().unwrap();
    let mut at_vertex: Vec<Vec<usize>> = vec![Vec::new(); n_vertices];
    for (i, e) in edges.iter().enumerate() {
        for (j, &v) in e.iter().enumerate() {
            at_vertex[v].push(offset[i] + j);
        }
    }
    let mut totals = vec![0u128; l_max + 1];
    let mut cur = vec![0u128; n_states];
    let mut next = vec![0u128; n_states];
    let mut sums = vec![0u128; n_vertices];
    for u in 0..n_vertices {
        cur.iter_mut().for_each(|x| *x = 0);
        for (i, e) in edges.iter().enumerate() {
            if e.contains(&u) {
                for (j, &v) in e.iter().enumerate() {
                    if v != u {
                        cur[offset[i] + j] = 1;
                    }
                }
            }
        }
        for len in 2..=l_max {
            for (w, states) in at_vertex.iter().enumerate() {
                sums[w] = states.iter().map(|&s| cur[s]).sum();
            }
            for (i, e) in edges.iter().enumerate() {
                let base = offset[i];
                // Arriving at w through some other edge f and leaving through e.
                let mut total = 0u128;
                for (jw, &w) in e.iter().enumerate() {
                    total += sums[w] - cur[base + jw];
                }
                for (jv, &v) in e.iter().enumerate() {
                    next[base + jv] = total - (sums[v] - cur[base + jv]);
                }
            }
            std::mem::swap(&mut cur, &mut next);
            totals[len] += at_vertex[u].iter().map(|&s| cur[s]).sum::<u128>();
        }
    }
    totals.into_iter().enumerate().skip(2).filter(|&(_, c)| c > 0).collect()
}

fn tanner_adjacency(b: &BinaryMatrix) -> Vec<Vec<usize>> {
    let r = b.rows();
    let mut adj = vec![Vec::new(); r + b.cols()];
    for i in 0..r {
        for j in b.row_support(i) {
            adj[i].push(r + j);
            adj[r + j].push(i);
        }
    }
    adj
}

/// Girth of the Tanner graph of `b`, or `None` when no cycle of length
/// `≤ g_cap` exists.
pub fn tanner_girth(b: &BinaryMatrix, g_cap: usize) -> Option<usize> {
    let adj = tanner_adjacency(b);
    let n = adj.len();
    let mut best = usize::MAX;
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for root in b.rows()..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[root] = 0;
        parent[root] = usize::MAX;
        queue.clear();
        queue.push_back(root);
        while let Some(x) = queue.pop_front() {
            if 2 * dist[x] + 1 >= best.min(g_cap + 1) {
                break;
            }
            for &y in &adj[x] {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    parent[y] = x;
                    queue.push_back(y);
                } else if parent[x] != y {
                    best = best.min(dist[x] + dist[y] + 1);
                }
            }
        }
    }
    (best <= g_cap).then_some(best)
}

/// A simple cycle of a Tanner graph: checks `c_0, ..., c_{k-1}` and variables
/// `v_0, ..., v_{k-1}`, where `v_i` joins `c_i` and `c_{i+1 mod k}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TannerCycle {
    pub checks: Vec<usize>,
    pub vars: Vec<usize>,
}

impl TannerCycle {
    /// Tanner length `2k`.
    pub fn len(&self) -> usize {
        2 * self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    /// Matrix positions in traversal order:
    /// `(c_0,v_0), (c_1,v_0), (c_1,v_1), (c_2,v_1), ..., (c_0,v_{k-1})`.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        let k = self.vars.len();
        let mut out = Vec::with_capacity(2 * k);
        for i in 0..k {
            out.push((self.checks[i], self.vars[i]));
            out.push((self.checks[(i + 1) % k], self.vars[i]));
        }
        out
    }
}

/// All simple Tanner cycles of `b` with length `≤ g_cap`, each reported once:
/// `c_0` is the smallest check on the cycle and `v_0 < v_{k-1}`.
pub fn tanner_cycles(b: &BinaryMatrix, g_cap: usize) -> Vec<TannerCycle> {
    let rows: Vec<Vec<usize>> = (0..b.rows()).map(|r| b.row_support(r)).collect();
    let cols: Vec<Vec<usize>> = (0..b.cols()).map(|c| b.col_support(c)).collect();
    let k_max = g_cap / 2;
    let mut out = Vec::new();
    let mut used_check = vec![false; b.rows()];
    let mut used_var = vec![false; b.cols()];

    struct Walk<'a> {
        rows: &'a [Vec<usize>],
        cols: &'a [Vec<usize>],
        k_max: usize,
        c0: usize,
        checks: Vec<usize>,
        vars: Vec<usize>,
    }

    fn extend(w: &mut Walk<'_>, used_check: &mut [bool], used_var: &mut [bool], out: &mut Vec<TannerCycle>) {
        let cur = *w.checks.last().unwrap();
        for &v in &w.rows[cur] {
            if used_var[v] {
                continue;
            }
            for &c in &w.cols[v] {
                if c == cur {
                    continue;
                }
                if c == w.c0 {
                    if w.checks.len() >= 2 && w.vars[0] < v {
                        let mut vars = w.vars.clone();
                        vars.push(v);
                        out.push(TannerCycle {
                            checks: w.checks.clone(),
                            vars,
                        });
                    }
                } else if c > w.c0 && !used_check[c] && w.checks.len() < w.k_max {
                    used_check[c] = true;
                    used_var[v] = true;
                    w.checks.push(c);
                    w.vars.push(v);
                    extend(w, used_check, used_var, out);
                    w.checks.pop();
                    w.vars.pop();
                    used_var[v] = false;
                    used_check[c] = false;
                }
            }
        }
    }

    for c0 in 0..b.rows() {
        let mut w = Walk {
            rows: &rows,
            cols: &cols,
            k_max,
            c0,
            checks: vec![c0],
            vars: Vec::new(),
        };
        used_check[c0] = true;
        extend(&mut w, &mut used_check, &mut used_var, &mut out);
        used_check[c0] = false;
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Approximate cycle extrinsic message degree: `Σ (deg(v) - 2)` over the
/// cycle's variable nodes.
pub fn ace_of_cycle(b: &BinaryMatrix, cycle: &TannerCycle) -> usize {
    cycle.vars.iter().map(|&v| b.col_weight(v).saturating_sub(2)).sum()
}

/// Replaces each pair of incident edges `{u,v}, {v,w}` by the hyperedge
/// `{u,v,w}`.
///
/// Kept edges retain their relative order and are followed by the merged
/// hyperedges in pair order; Hamiltonian indices are remapped.
pub fn merge_edges(h: &Hypergraph, pairs: &[(usize, usize)]) -> Result<Hypergraph> {
    let illegal = |msg: String| Err(Error::IllegalMerge(msg));
    let mut in_pair = vec![false; h.edges().len()];
    let mut merged = Vec::with_capacity(pairs.len());
    for &(a, b) in pairs {
        if a >= h.edges().len() || b >= h.edges().len() || a == b {
            return illegal(format!("pair ({a}, {b}) does not name two edges"));
        }
        for e in [a, b] {
            if in_pair[e] {
                return illegal(format!("edge {e} appears in two pairs"));
            }
            if h.is_hamiltonian_edge(e) {
                return illegal(format!("edge {e} is on the Hamiltonian cycle"));
            }
            if h.edges()[e].len() != 2 {
                return illegal(format!("edge {e} is already a hyperedge"));
            }
            in_pair[e] = true;
        }
        let (ea, eb) = (&h.edges()[a], &h.edges()[b]);
        let shared = ea.iter().filter(|v| eb.contains(v)).count();
        if shared != 1 {
            return illegal(format!("edges {a} and {b} share {shared} vertices"));
        }
        let mut triple: Vec<usize> = ea.iter().chain(eb).copied().collect();
        triple.sort_unstable();
        triple.dedup();
        merged.push(triple);
    }
    let mut new_index = vec![usize::MAX; h.edges().len()];
    let mut edges = Vec::with_capacity(h.edges().len() - pairs.len());
    for (i, e) in h.edges().iter().enumerate() {
        if !in_pair[i] {
            new_index[i] = edges.len();
            edges.push(e.clone());
        }
    }
    edges.extend(merged);
    let hamiltonian = h.hamiltonian().iter().map(|&i| new_index[i]).collect();
    let out = Hypergraph::from_raw(h.n_vertices(), edges, hamiltonian);
    if let Err(e) = out.validate() {
        return illegal(format!("merged hypergraph is invalid: {e}"));
    }
    Ok(out)
}

/// Histogram, over unordered pairs of incident non-Hamiltonian two-vertex
/// edges `{u,v}, {v,w}`, of the shortest cycle length through the hyperedge
/// `{u,v,w}` they would merge into: one plus the shortest `u`–`w` path
/// avoiding `v`. Lengths above `l_max` are dropped.
pub fn merge_cycle_profile(h: &Hypergraph, l_max: usize) -> CycleCounts {
    let n = h.n_vertices();
    let mut adj = vec![Vec::new(); n];
    for e in h.edges() {
        for &a in e {
            for &b in e {
                if a != b {
                    adj[a].push(b);
                }
            }
        }
    }
    // incident[v] = far endpoints of the mergeable edges at v.
    let mut incident = vec![Vec::new(); n];
    for (i, e) in h.edges().iter().enumerate() {
        if e.len() == 2 && !h.is_hamiltonian_edge(i) {
            incident[e[0]].push(e[1]);
            incident[e[1]].push(e[0]);
        }
    }
    let mut hist = [0u128; 64];
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for v in 0..n {
        let ends = &incident[v];
        for (a, &u) in ends.iter().enumerate() {
            if a + 1 == ends.len() {
                break;
            }
            // BFS from u in the graph with v deleted, up to depth l_max - 1.
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[u] = 0;
            queue.clear();
            queue.push_back(u);
            while let Some(x) = queue.pop_front() {
                if dist[x] + 1 >= l_max {
                    continue;
                }
                for &y in &adj[x] {
                    if y != v && dist[y] == usize::MAX {
                        dist[y] = dist[x] + 1;
                        queue.push_back(y);
                    }
                }
            }
            for &w in &ends[a + 1..] {
                if dist[w] != usize::MAX && dist[w] < l_max {
                    hist[dist[w] + 1] += 1;
                }
            }
        }
    }
    hist.iter()
        .enumerate()
        .filter(|&(l, &c)| c > 0 && l <= l_max)
        .map(|(l, &c)| (l, c))
        .collect()
}
