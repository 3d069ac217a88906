//! The edge-colored configuration model and well-separated vertex sets.
//!
//! `ColoredMultigraph` is the union of `d` independent uniform perfect
//! matchings on `n` vertices, edges carrying the index of the matching they
//! came from as a color. Locally it looks like the edge-colored `d`-regular
//! tree, and the density of `t`-separated vertex sets in it is what pins
//! down the behaviour of balloon processes on trees and on the hyperbolic
//! plane. This module has the samplers and the solvers; the exact event
//! probabilities and the entropy-gap computation live in [`probability`].

pub mod probability;

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng;

pub use probability::{
    event_probability_log, exact_event_probability, gap_margin, structured_event_occurs,
    sufficient_chain_margin, BoundParams, GapReport,
};

/// `n` vertices carrying `d` perfect matchings; color `c` edges are the
/// pairs of matching `c`. Self-loops are impossible, parallel edges are not.
#[derive(Debug, Clone)]
pub struct ColoredMultigraph {
    n: usize,
    d: usize,
    matchings: Vec<Vec<u32>>,
    adj: Vec<u32>,
}

impl ColoredMultigraph {
    pub fn from_matchings(matchings: Vec<Vec<u32>>) -> Result<Self> {
        let d = matchings.len();
        if d < 2 {
            return Err(Error::InvalidArgument("need at least two matchings".into()));
        }
        let n = matchings[0].len();
        for m in &matchings {
            if m.len() != n {
                return Err(Error::InvalidArgument("matchings disagree on n".into()));
            }
            for (v, &w) in m.iter().enumerate() {
                if w as usize >= n || w as usize == v || m[w as usize] as usize != v {
                    return Err(Error::InvalidArgument(
                        "each color must be a perfect matching without fixed points".into(),
                    ));
                }
            }
        }
        let mut adj = vec![0u32; n * d];
        for v in 0..n {
            for c in 0..d {
                adj[v * d + c] = matchings[c][v];
            }
        }
        Ok(ColoredMultigraph { n, d, matchings, adj })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn neighbor(&self, v: u32, color: usize) -> u32 {
        self.matchings[color][v as usize]
    }

    /// Edge list `(u, v, color)` with `u < v`, sorted.
    pub fn edge_list(&self) -> Vec<(u32, u32, u32)> {
        let mut edges = Vec::with_capacity(self.n * self.d / 2);
        for (c, m) in self.matchings.iter().enumerate() {
            for (u, &v) in m.iter().enumerate() {
                if (u as u32) < v {
                    edges.push((u as u32, v, c as u32));
                }
            }
        }
        edges.sort_unstable();
        edges
    }

    /// Number of edges that have a parallel partner: a vertex pair joined by
    /// `m >= 2` colors contributes `m`. For the random model the mean is
    /// `d(d-1)/2` in the large-`n` limit.
    pub fn doubled_edge_count(&self) -> usize {
        let mut count = 0usize;
        let mut partners = Vec::with_capacity(self.d);
        for v in 0..self.n as u32 {
            partners.clear();
            partners.extend_from_slice(self.neighbors_of(v));
            partners.sort_unstable();
            let mut i = 0;
            while i < partners.len() {
                let mut j = i;
                while j < partners.len() && partners[j] == partners[i] {
                    j += 1;
                }
                if j - i >= 2 {
                    count += j - i;
                }
                i = j;
            }
        }
        count / 2
    }
}

/// Anything with vertices `0..len` and an enumerable neighbor list.
pub trait VertexGraph {
    fn len(&self) -> usize;
    fn neighbors_of(&self, v: u32) -> &[u32];
}

impl VertexGraph for ColoredMultigraph {
    fn len(&self) -> usize {
        self.n
    }

    fn neighbors_of(&self, v: u32) -> &[u32] {
        &self.adj[v as usize * self.d..(v as usize + 1) * self.d]
    }
}

/// Sample `G*_{n,d}`: `d` independent uniform perfect matchings.
pub fn generate_configuration_model(n: usize, d: usize, seed: u64) -> Result<ColoredMultigraph> {
    if n < 2 || n % 2 != 0 {
        return Err(Error::InvalidArgument("n must be even and at least 2".into()));
    }
    if d < 3 {
        return Err(Error::InvalidArgument("degree must be at least 3".into()));
    }
    let mut matchings = Vec::with_capacity(d);
    for c in 0..d {
        let mut perm: Vec<u32> = (0..n as u32).collect();
        let mut r = rng::stream(seed, "configuration-model", c as u64);
        perm.shuffle(&mut r);
        let mut m = vec![0u32; n];
        for pair in perm.chunks_exact(2) {
            m[pair[0] as usize] = pair[1];
            m[pair[1] as usize] = pair[0];
        }
        matchings.push(m);
    }
    ColoredMultigraph::from_matchings(matchings)
}

/// Reusable bounded BFS over a [`VertexGraph`].
pub(crate) struct Bfs {
    stamp: Vec<u32>,
    dist: Vec<u32>,
    cur: u32,
    queue: VecDeque<u32>,
}

impl Bfs {
    pub fn new(n: usize) -> Self {
        Bfs { stamp: vec![0; n], dist: vec![0; n], cur: 0, queue: VecDeque::new() }
    }

    /// Visit every vertex within distance `maxdist` of `v` (including `v`),
    /// calling `f(vertex, dist)`.
    pub fn run<G: VertexGraph>(&mut self, g: &G, v: u32, maxdist: u32, mut f: impl FnMut(u32, u32)) {
        self.cur += 1;
        self.queue.clear();
        self.stamp[v as usize] = self.cur;
        self.dist[v as usize] = 0;
        self.queue.push_back(v);
        while let Some(u) = self.queue.pop_front() {
            let du = self.dist[u as usize];
            f(u, du);
            if du == maxdist {
                continue;
            }
            for &w in g.neighbors_of(u) {
                if self.stamp[w as usize] != self.cur {
                    self.stamp[w as usize] = self.cur;
                    self.dist[w as usize] = du + 1;
                    self.queue.push_back(w);
                }
            }
        }
    }
}

/// Fraction of vertices whose radius-`r` ball is color-isomorphic to the
/// radius-`r` ball of the edge-colored regular tree. The isomorphism is
/// unique when it exists, so a breadth-first walk that never revisits a
/// vertex decides it exactly.
pub fn local_tree_fraction(g: &ColoredMultigraph, r: usize) -> f64 {
    let mut stamp = vec![0u32; g.n];
    let mut cur = 0u32;
    let mut good = 0usize;
    // frontier entries: (vertex, color of the edge it was entered through)
    let mut frontier: Vec<(u32, usize)> = Vec::new();
    let mut next: Vec<(u32, usize)> = Vec::new();
    'vertices: for v in 0..g.n as u32 {
        cur += 1;
        stamp[v as usize] = cur;
        frontier.clear();
        for c in 0..g.d {
            let w = g.neighbor(v, c);
            if stamp[w as usize] == cur {
                continue 'vertices; // collision already at radius 1
            }
            stamp[w as usize] = cur;
            frontier.push((w, c));
        }
        for _level in 2..=r {
            next.clear();
            for &(u, c_in) in &frontier {
                for c in 0..g.d {
                    if c == c_in {
                        continue;
                    }
                    let w = g.neighbor(u, c);
                    if stamp[w as usize] == cur {
                        continue 'vertices;
                    }
                    stamp[w as usize] = cur;
                    next.push((w, c));
                }
            }
            std::mem::swap(&mut frontier, &mut next);
        }
        good += 1;
    }
    good as f64 / g.n as f64
}

/// Maximal (not maximum) `t`-separated set by random-order greedy: take a
/// vertex unless something within distance `t` was already taken.
pub fn greedy_max_separated(g: &ColoredMultigraph, t: usize, seed: u64) -> Vec<u32> {
    let mut order: Vec<u32> = (0..g.n as u32).collect();
    let mut r = rng::stream(seed, "greedy-separated", 0);
    order.shuffle(&mut r);
    let mut excluded = vec![false; g.n];
    let mut bfs = Bfs::new(g.n);
    let mut chosen = Vec::new();
    for v in order {
        if excluded[v as usize] {
            continue;
        }
        chosen.push(v);
        bfs.run(g, v, t as u32, |w, _| excluded[w as usize] = true);
    }
    chosen.sort_unstable();
    chosen
}

/// Exhaustive pairwise check that `set` is `t`-separated (pairwise graph
/// distance greater than `t`).
pub fn is_separated<G: VertexGraph>(g: &G, set: &[u32], t: usize) -> bool {
    let mut member = vec![false; g.len()];
    for &v in set {
        member[v as usize] = true;
    }
    let mut bfs = Bfs::new(g.len());
    for &v in set {
        let mut ok = true;
        bfs.run(g, v, t as u32, |w, _| {
            if w != v && member[w as usize] {
                ok = false;
            }
        });
        if !ok {
            return false;
        }
    }
    true
}

const EXACT_GUARD: usize = 60;

/// Exact maximum `t`-separated set size, by branch and bound on the maximum
/// independent set of the `t`-th distance power. Guarded to `n <= 60` so the
/// conflict graph fits in one machine word per vertex.
pub fn exact_max_separated(g: &ColoredMultigraph, t: usize) -> Result<usize> {
    if g.n > EXACT_GUARD {
        return Err(Error::SizeGuard(g.n, EXACT_GUARD));
    }
    // conflict[v] = vertices within distance t of v, v excluded
    let mut conflict = vec![0u64; g.n];
    let mut bfs = Bfs::new(g.n);
    for v in 0..g.n as u32 {
        let mut mask = 0u64;
        bfs.run(g, v, t as u32, |w, _| mask |= 1 << w);
        conflict[v as usize] = mask & !(1u64 << v);
    }
    let all = if g.n == 64 { !0u64 } else { (1u64 << g.n) - 1 };

    // greedy lower bound: repeatedly take the vertex of least conflict
    let mut best = 0usize;
    let mut avail = all;
    while avail != 0 {
        let mut pick = u32::MAX;
        let mut pick_deg = usize::MAX;
        let mut m = avail;
        while m != 0 {
            let v = m.trailing_zeros();
            m &= m - 1;
            let deg = (conflict[v as usize] & avail).count_ones() as usize;
            if deg < pick_deg {
                pick_deg = deg;
                pick = v;
            }
        }
        best += 1;
        avail &= !(conflict[pick as usize] | (1u64 << pick));
    }

    fn clique_cover_bound(conflict: &[u64], mut avail: u64) -> usize {
        let mut cliques = 0usize;
        while avail != 0 {
            let v = avail.trailing_zeros();
            avail &= !(1u64 << v);
            let mut members = conflict[v as usize] & avail;
            // grow a clique containing v greedily
            let mut clique_common = conflict[v as usize];
            while members != 0 {
                let u = members.trailing_zeros();
                avail &= !(1u64 << u);
                clique_common &= conflict[u as usize];
                members = clique_common & avail;
            }
            cliques += 1;
        }
        cliques
    }

    fn branch(conflict: &[u64], avail: u64, current: usize, best: &mut usize) {
        if avail == 0 {
            *best = (*best).max(current);
            return;
        }
        if current + clique_cover_bound(conflict, avail) <= *best {
            return;
        }
        // branch on the most conflicted available vertex
        let mut pick = 0u32;
        let mut deg = -1i64;
        let mut m = avail;
        while m != 0 {
            let v = m.trailing_zeros();
            m &= m - 1;
            let d = (conflict[v as usize] & avail).count_ones() as i64;
            if d > deg {
                deg = d;
                pick = v;
            }
        }
        branch(conflict, avail & !(conflict[pick as usize] | (1u64 << pick)), current + 1, best);
        branch(conflict, avail & !(1u64 << pick), current, best);
    }

    branch(&conflict, all, 0, &mut best);
    Ok(best)
}

/// The density bound `2 t log(d-1) / (d-1)^t` for `t`-separated sets on the
/// `d`-regular tree that arise from local rules.
pub fn bound_density(d: usize, t: usize) -> f64 {
    let q = d as f64 - 1.0;
    2.0 * t as f64 * q.ln() / q.powi(t as i32)
}

/// Select every vertex whose iid label is strictly smallest in its radius-`t`
/// ball. The output is `t`-separated by construction; on the regular tree
/// the inclusion probability of an interior vertex is one over the ball
/// size.
pub fn local_factor_separated<G: VertexGraph>(g: &G, t: usize, seed: u64) -> Vec<u32> {
    let mut r = rng::stream(seed, "factor-labels", 0);
    let labels: Vec<f64> = (0..g.len()).map(|_| rand::Rng::random::<f64>(&mut r)).collect();
    let mut bfs = Bfs::new(g.len());
    let mut out = Vec::new();
    for v in 0..g.len() as u32 {
        let lv = labels[v as usize];
        let mut smallest = true;
        bfs.run(g, v, t as u32, |w, _| {
            if w != v && labels[w as usize] <= lv {
                smallest = false;
            }
        });
        if smallest {
            out.push(v);
        }
    }
    out
}

/// The ball of radius `radius` in the infinite `degree`-regular tree, as an
/// explicit finite graph. Vertex 0 is the root; vertices are in
/// breadth-first order.
#[derive(Debug, Clone, Serialize)]
pub struct TreeBall {
    pub degree: usize,
    pub radius: usize,
    pub depth: Vec<u32>,
    offsets: Vec<u32>,
    adjacency: Vec<u32>,
}

impl TreeBall {
    pub fn new(degree: usize, radius: usize) -> Result<TreeBall> {
        if degree < 3 {
            return Err(Error::InvalidArgument("degree must be at least 3".into()));
        }
        let q = degree - 1;
        let mut total = 1usize;
        let mut level_size = degree;
        for _ in 1..=radius {
            total = total
                .checked_add(level_size)
                .ok_or_else(|| Error::InvalidArgument("tree ball too large".into()))?;
            level_size *= q;
        }
        if total > 50_000_000 {
            return Err(Error::SizeGuard(total, 50_000_000));
        }
        let mut depth = vec![0u32; total];
        let mut parent = vec![u32::MAX; total];
        let mut children: Vec<Vec<u32>> = vec![Vec::new(); total];
        let mut next_id = 1u32;
        let mut frontier = vec![0u32];
        for level in 1..=radius {
            let mut next = Vec::new();
            for &v in &frontier {
                let kids = if level == 1 { degree } else { q };
                for _ in 0..kids {
                    let id = next_id;
                    next_id += 1;
                    depth[id as usize] = level as u32;
                    parent[id as usize] = v;
                    children[v as usize].push(id);
                    next.push(id);
                }
            }
            frontier = next;
        }
        let mut offsets = Vec::with_capacity(total + 1);
        let mut adjacency = Vec::new();
        offsets.push(0u32);
        for v in 0..total {
            if parent[v] != u32::MAX {
                adjacency.push(parent[v]);
            }
            adjacency.extend_from_slice(&children[v]);
            offsets.push(adjacency.len() as u32);
        }
        Ok(TreeBall { degree, radius, depth, offsets, adjacency })
    }
}

impl VertexGraph for TreeBall {
    fn len(&self) -> usize {
        self.depth.len()
    }

    fn neighbors_of(&self, v: u32) -> &[u32] {
        &self.adjacency[self.offsets[v as usize] as usize..self.offsets[v as usize + 1] as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn six_cycle() -> ColoredMultigraph {
        // alternating 2-colored 6-cycle
        let m1 = vec![1u32, 0, 3, 2, 5, 4];
        let m2 = vec![5u32, 2, 1, 4, 3, 0];
        ColoredMultigraph::from_matchings(vec![m1, m2]).unwrap()
    }

    #[test]
    fn two_vertices_form_a_triple_edge() {
        let g = generate_configuration_model(2, 3, 1).unwrap();
        assert_eq!(g.neighbors_of(0), &[1, 1, 1]);
        assert_eq!(g.doubled_edge_count(), 1);
        assert_eq!(local_tree_fraction(&g, 1), 0.0);
        assert_eq!(greedy_max_separated(&g, 1, 0).len(), 1);
        assert_eq!(exact_max_separated(&g, 1).unwrap(), 1);
    }

    #[test]
    fn every_vertex_has_all_colors() {
        let g = generate_configuration_model(100, 4, 7).unwrap();
        for v in 0..100u32 {
            for c in 0..4 {
                let w = g.neighbor(v, c);
                assert_ne!(w, v);
                assert_eq!(g.neighbor(w, c), v);
            }
        }
        assert_eq!(g.edge_list().len(), 200);
    }

    #[test]
    fn odd_n_rejected() {
        assert!(generate_configuration_model(7, 3, 0).is_err());
        assert!(generate_configuration_model(10, 2, 0).is_err());
    }

    #[test]
    fn tree_fraction_is_nonincreasing_in_r() {
        let g = generate_configuration_model(2000, 3, 3).unwrap();
        let f: Vec<f64> = (1..5).map(|r| local_tree_fraction(&g, r)).collect();
        for w in f.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(f[0] > 0.9);
    }

    #[test]
    fn greedy_output_is_separated_and_bounded_by_exact() {
        let g = generate_configuration_model(40, 3, 11).unwrap();
        for t in 1..=3 {
            let greedy = greedy_max_separated(&g, t, 5);
            assert!(is_separated(&g, &greedy, t));
            let exact = exact_max_separated(&g, t).unwrap();
            assert!(greedy.len() <= exact);
        }
    }

    #[test]
    fn six_cycle_exact_two_separated() {
        let g = six_cycle();
        assert_eq!(exact_max_separated(&g, 2).unwrap(), 2);
        assert_eq!(exact_max_separated(&g, 1).unwrap(), 3);

        // enumeration oracle
        let mut bfs = Bfs::new(6);
        let mut dist = vec![[0u32; 6]; 6];
        for v in 0..6u32 {
            bfs.run(&g, v, 6, |w, d| dist[v as usize][w as usize] = d);
        }
        for t in 1..=2usize {
            let mut best = 0;
            for mask in 0u32..64 {
                let set: Vec<u32> = (0..6).filter(|&v| mask >> v & 1 == 1).collect();
                let ok = set.iter().enumerate().all(|(i, &a)| {
                    set[i + 1..].iter().all(|&b| dist[a as usize][b as usize] > t as u32)
                });
                if ok {
                    best = best.max(set.len());
                }
            }
            assert_eq!(exact_max_separated(&g, t).unwrap(), best);
        }
    }

    #[test]
    fn exact_guard_kicks_in() {
        let g = generate_configuration_model(80, 3, 0).unwrap();
        assert!(matches!(exact_max_separated(&g, 1), Err(Error::SizeGuard(80, _))));
    }

    #[test]
    fn bound_density_values() {
        assert!((bound_density(3, 2) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((bound_density(3, 1) - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((bound_density(4, 4) - 8.0 * 3.0f64.ln() / 81.0).abs() < 1e-12);
        assert!((bound_density(4, 4) - 0.1085).abs() < 1e-4);
    }

    #[test]
    fn local_factor_output_is_separated() {
        let g = generate_configuration_model(500, 3, 9).unwrap();
        for t in 1..=3 {
            let set = local_factor_separated(&g, t, 21);
            assert!(is_separated(&g, &set, t));
        }
        let ball = TreeBall::new(3, 6).unwrap();
        let set = local_factor_separated(&ball, 2, 4);
        assert!(is_separated(&ball, &set, 2));
    }

    #[test]
    fn tree_ball_shape() {
        let ball = TreeBall::new(3, 2).unwrap();
        // b_2 = (3 * 2^2 - 2)/1 = 10 vertices
        assert_eq!(ball.len(), 10);
        assert_eq!(ball.neighbors_of(0).len(), 3);
        let leaves = (0..10u32).filter(|&v| ball.neighbors_of(v).len() == 1).count();
        assert_eq!(leaves, 6);
    }
}
