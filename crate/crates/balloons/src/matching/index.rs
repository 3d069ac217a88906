//! Spatial acceleration for nearest-neighbor, range and taint queries.
//!
//! One best-first engine ([`CellIndex`]) runs over anything that can chop
//! its space into cells with conservative lower bounds on the distance from
//! a query point to a cell:
//!
//! * Euclidean boxes use a uniform grid with cell side `(measure/n)^(1/d)`.
//! * The hyperbolic disk uses polar bands of fixed hyperbolic width, each
//!   split into equal-angle sectors sized to the band's measure. Bounds use
//!   the hyperbolic law of cosines in the cancellation-free form
//!   `cosh d = cosh(dr) + 2 sinh r1 sinh r2 sin^2(dtheta/2)`.
//! * The tree buckets points per edge and walks the edge adjacency.
//!
//! Lower bounds are deliberately slackened by a hair so that they never
//! exceed the exact distances computed by [`PointSet::dist`]; search
//! correctness needs `lb <= true distance`, nothing more.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::process::{PointData, PointSet};
use crate::space::{
    edges_at_level, euclidean_distance, hyperbolic_distance_xy, tree_distance, TreeAddr, TreePoint,
    Window,
};

/// Total-ordered f64 for heap keys (distances are never NaN).
#[derive(Clone, Copy, PartialEq)]
pub(crate) struct Ord64(pub f64);

impl Eq for Ord64 {}
impl PartialOrd for Ord64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Ord64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

pub(crate) trait CellSpace {
    fn n_points(&self) -> usize;
    fn n_cells(&self) -> usize;
    fn cell_of(&self, p: u32) -> u32;
    fn dist(&self, a: u32, b: u32) -> f64;
    /// Conservative lower bound on the distance from point `q` to any point
    /// of cell `c`.
    fn cell_lower_bound(&self, q: u32, c: u32) -> f64;
    fn neighbors(&self, c: u32, out: &mut Vec<u32>);
}

// ---------------------------------------------------------------------------
// Euclidean uniform grid

pub(crate) struct EuclidGrid<'a> {
    dim: usize,
    coords: &'a [f64],
    lo: Vec<f64>,
    cell_w: f64,
    dims: Vec<i64>,
}

impl<'a> EuclidGrid<'a> {
    pub fn new(dim: usize, coords: &'a [f64], window: &Window) -> Self {
        let n = (coords.len() / dim.max(1)).max(1);
        let (corner, sides) = match window {
            Window::Box { corner, sides } => (corner.clone(), sides.clone()),
            _ => unreachable!("euclidean sets carry box windows"),
        };
        // Make sure every point is covered even if it strays from the window.
        let mut lo = corner;
        let mut hi: Vec<f64> = lo.iter().zip(&sides).map(|(&c, &s)| c + s.max(1e-9)).collect();
        for (i, c) in coords.iter().enumerate() {
            let a = i % dim;
            lo[a] = lo[a].min(*c);
            hi[a] = hi[a].max(*c + 1e-9);
        }
        let measure: f64 = lo.iter().zip(&hi).map(|(&l, &h)| h - l).product();
        let mut cell_w = (measure / n as f64).powf(1.0 / dim as f64).max(1e-12);
        // Keep the total cell count within a small multiple of n.
        loop {
            let total: f64 = lo
                .iter()
                .zip(&hi)
                .map(|(&l, &h)| ((h - l) / cell_w).ceil().max(1.0))
                .product();
            if total <= (8 * n + 64) as f64 {
                break;
            }
            cell_w *= 1.5;
        }
        let dims: Vec<i64> = lo
            .iter()
            .zip(&hi)
            .map(|(&l, &h)| (((h - l) / cell_w).ceil() as i64).max(1))
            .collect();
        EuclidGrid { dim, coords, lo, cell_w, dims }
    }

    fn axis_index(&self, a: usize, x: f64) -> i64 {
        (((x - self.lo[a]) / self.cell_w).floor() as i64).clamp(0, self.dims[a] - 1)
    }

    fn encode(&self, idx: &[i64]) -> u32 {
        let mut id: i64 = 0;
        for a in 0..self.dim {
            id = id * self.dims[a] + idx[a];
        }
        id as u32
    }

    fn decode(&self, mut c: i64) -> Vec<i64> {
        let mut idx = vec![0i64; self.dim];
        for a in (0..self.dim).rev() {
            idx[a] = c % self.dims[a];
            c /= self.dims[a];
        }
        idx
    }
}

impl<'a> CellSpace for EuclidGrid<'a> {
    fn n_points(&self) -> usize {
        self.coords.len() / self.dim
    }

    fn n_cells(&self) -> usize {
        self.dims.iter().product::<i64>() as usize
    }

    fn cell_of(&self, p: u32) -> u32 {
        let base = p as usize * self.dim;
        let idx: Vec<i64> = (0..self.dim)
            .map(|a| self.axis_index(a, self.coords[base + a]))
            .collect();
        self.encode(&idx)
    }

    fn dist(&self, a: u32, b: u32) -> f64 {
        let (i, j) = (a as usize * self.dim, b as usize * self.dim);
        euclidean_distance(&self.coords[i..i + self.dim], &self.coords[j..j + self.dim])
    }

    fn cell_lower_bound(&self, q: u32, c: u32) -> f64 {
        let idx = self.decode(c as i64);
        let base = q as usize * self.dim;
        let mut s = 0.0;
        for a in 0..self.dim {
            let x = self.coords[base + a];
            let lo = self.lo[a] + idx[a] as f64 * self.cell_w;
            let hi = lo + self.cell_w;
            let d = if x < lo {
                lo - x
            } else if x > hi {
                x - hi
            } else {
                0.0
            };
            s += d * d;
        }
        s.sqrt() * (1.0 - 1e-12)
    }

    fn neighbors(&self, c: u32, out: &mut Vec<u32>) {
        let idx = self.decode(c as i64);
        let mut off = vec![-1i64; self.dim];
        'outer: loop {
            if off.iter().any(|&o| o != 0) {
                let mut nb = idx.clone();
                let mut ok = true;
                for a in 0..self.dim {
                    nb[a] += off[a];
                    if nb[a] < 0 || nb[a] >= self.dims[a] {
                        ok = false;
                        break;
                    }
                }
                if ok {
                    out.push(self.encode(&nb));
                }
            }
            for a in (0..self.dim).rev() {
                off[a] += 1;
                if off[a] <= 1 {
                    continue 'outer;
                }
                off[a] = -1;
                if a == 0 {
                    break 'outer;
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Hyperbolic polar band grid

pub(crate) struct HypGrid<'a> {
    xy: &'a [[f64; 2]],
    rho: Vec<f64>,
    theta: Vec<f64>,
    band_lo: Vec<f64>,
    band_hi: Vec<f64>,
    sectors: Vec<u32>,
    offsets: Vec<u32>,
}

impl<'a> HypGrid<'a> {
    pub fn new(xy: &'a [[f64; 2]], window_radius: f64) -> Self {
        let n = xy.len().max(1);
        let mut rho = Vec::with_capacity(xy.len());
        let mut theta = Vec::with_capacity(xy.len());
        let mut max_rho = window_radius.max(1e-6);
        for &[x, y] in xy {
            let r = x.hypot(y).min(1.0 - 1e-15);
            let rh = 2.0 * r.atanh();
            let mut th = y.atan2(x);
            if th < 0.0 {
                th += std::f64::consts::TAU;
            }
            rho.push(rh);
            theta.push(th);
            max_rho = max_rho.max(rh);
        }
        let bands = ((max_rho / 0.7).ceil() as usize).max(1);
        let width = max_rho / bands as f64;
        let total_area = crate::space::hyperbolic_ball_area(max_rho);
        let target = 2.0 * total_area / n as f64;
        let mut band_lo = Vec::with_capacity(bands);
        let mut band_hi = Vec::with_capacity(bands);
        let mut sectors = Vec::with_capacity(bands);
        let mut offsets = vec![0u32];
        for k in 0..bands {
            let lo = k as f64 * width;
            let hi = if k + 1 == bands { max_rho * (1.0 + 1e-12) } else { (k + 1) as f64 * width };
            let area = crate::space::hyperbolic_ball_area(hi) - crate::space::hyperbolic_ball_area(lo);
            let s = ((area / target).round() as u32).clamp(1, u32::MAX / 2);
            band_lo.push(lo);
            band_hi.push(hi);
            sectors.push(s);
            offsets.push(offsets.last().unwrap() + s);
        }
        HypGrid { xy, rho, theta, band_lo, band_hi, sectors, offsets }
    }

    fn band_of(&self, rho: f64) -> usize {
        match self.band_hi.iter().position(|&h| rho < h) {
            Some(b) => b,
            None => self.band_hi.len() - 1,
        }
    }

    fn decode(&self, c: u32) -> (usize, u32) {
        let b = match self.offsets.binary_search(&c) {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        (b, c - self.offsets[b])
    }

    fn sector_theta(&self, band: usize, sector: u32) -> (f64, f64) {
        let w = std::f64::consts::TAU / self.sectors[band] as f64;
        (sector as f64 * w, (sector as f64 + 1.0) * w)
    }
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

impl<'a> CellSpace for HypGrid<'a> {
    fn n_points(&self) -> usize {
        self.xy.len()
    }

    fn n_cells(&self) -> usize {
        *self.offsets.last().unwrap() as usize
    }

    fn cell_of(&self, p: u32) -> u32 {
        let b = self.band_of(self.rho[p as usize]);
        let s = ((self.theta[p as usize] / std::f64::consts::TAU) * self.sectors[b] as f64) as u32;
        self.offsets[b] + s.min(self.sectors[b] - 1)
    }

    fn dist(&self, a: u32, b: u32) -> f64 {
        let p = self.xy[a as usize];
        let q = self.xy[b as usize];
        hyperbolic_distance_xy(p[0], p[1], q[0], q[1])
    }

    fn cell_lower_bound(&self, q: u32, c: u32) -> f64 {
        let (band, sector) = self.decode(c);
        let (ta, tb) = self.sector_theta(band, sector);
        let rq = self.rho[q as usize];
        let tq = self.theta[q as usize];
        let inside = tq >= ta && tq <= tb;
        let dtheta = if inside { 0.0 } else { circular_gap(tq, ta).min(circular_gap(tq, tb)) };
        let (ra, rb) = (self.band_lo[band], self.band_hi[band]);
        if dtheta == 0.0 && rq >= ra && rq <= rb {
            return 0.0;
        }
        // Minimize cosh d over the cell: convex in rho with the critical
        // point tanh(rho) = tanh(rq) cos(dtheta).
        let ct = dtheta.cos();
        let rc = (rq.tanh() * ct).atanh().clamp(ra, rb);
        let s2 = (dtheta / 2.0).sin().powi(2);
        let val = (rq - rc).cosh() + 2.0 * rq.sinh() * rc.sinh() * s2;
        let d = val.max(1.0).acosh();
        (d * (1.0 - 1e-9) - 1e-12).max(0.0)
    }

    fn neighbors(&self, c: u32, out: &mut Vec<u32>) {
        let (band, sector) = self.decode(c);
        let s = self.sectors[band];
        if s > 1 {
            out.push(self.offsets[band] + (sector + 1) % s);
            out.push(self.offsets[band] + (sector + s - 1) % s);
        }
        let (ta, tb) = self.sector_theta(band, sector);
        for nb in [band.wrapping_sub(1), band + 1] {
            if nb >= self.sectors.len() {
                continue;
            }
            let sn = self.sectors[nb] as f64;
            let i0 = ((ta / std::f64::consts::TAU) * sn).floor() as i64 - 1;
            let i1 = ((tb / std::f64::consts::TAU) * sn).floor() as i64 + 1;
            let sn = self.sectors[nb] as i64;
            if i1 - i0 + 1 >= sn {
                for i in 0..sn {
                    out.push(self.offsets[nb] + i as u32);
                }
            } else {
                for i in i0..=i1 {
                    out.push(self.offsets[nb] + i.rem_euclid(sn) as u32);
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Tree edge buckets

pub(crate) struct TreeGrid<'a> {
    pts: &'a [TreePoint],
    degree: usize,
    edges: Vec<TreeAddr>,
    edge_index: HashMap<TreeAddr, u32>,
    max_level: usize,
}

impl<'a> TreeGrid<'a> {
    /// Returns `None` when the window ball has far more edges than points,
    /// in which case bucketing per edge is a bad deal and the caller should
    /// fall back to the naive index.
    pub fn new(pts: &'a [TreePoint], degree: usize, window_radius: f64) -> Option<Self> {
        let mut max_level = window_radius.ceil() as usize;
        for p in pts {
            max_level = max_level.max(p.edge.depth());
        }
        let mut count = 0.0;
        for k in 1..=max_level {
            count += edges_at_level(degree, k);
        }
        if count > (16 * pts.len() + 4096) as f64 {
            return None;
        }
        let mut edges = Vec::with_capacity(count as usize);
        let mut edge_index = HashMap::with_capacity(count as usize);
        let mut frontier = vec![TreeAddr::ROOT];
        for level in 1..=max_level {
            let mut next = Vec::new();
            for v in frontier {
                let kids = if level == 1 { degree } else { degree - 1 };
                for d in 0..kids as u8 {
                    let e = v.child(d);
                    edge_index.insert(e, edges.len() as u32);
                    edges.push(e);
                    next.push(e);
                }
            }
            frontier = next;
        }
        Some(TreeGrid { pts, degree, edges, edge_index, max_level })
    }
}

impl<'a> CellSpace for TreeGrid<'a> {
    fn n_points(&self) -> usize {
        self.pts.len()
    }

    fn n_cells(&self) -> usize {
        self.edges.len()
    }

    fn cell_of(&self, p: u32) -> u32 {
        self.edge_index[&self.pts[p as usize].edge]
    }

    fn dist(&self, a: u32, b: u32) -> f64 {
        tree_distance(&self.pts[a as usize], &self.pts[b as usize])
    }

    fn cell_lower_bound(&self, q: u32, c: u32) -> f64 {
        let e = self.edges[c as usize];
        let qp = &self.pts[q as usize];
        if qp.edge == e {
            return 0.0;
        }
        let parent = e.parent().expect("edge");
        qp.dist_to_vertex(&parent).min(qp.dist_to_vertex(&e))
    }

    fn neighbors(&self, c: u32, out: &mut Vec<u32>) {
        let e = self.edges[c as usize];
        let parent = e.parent().expect("edge");
        // Edges at the shallow endpoint: the parent's own edge plus siblings.
        if !parent.is_root() {
            out.push(self.edge_index[&parent]);
        }
        let sibling_count = if parent.is_root() { self.degree } else { self.degree - 1 };
        let own = e.digit(e.depth() - 1);
        for d in 0..sibling_count as u8 {
            if d != own {
                out.push(self.edge_index[&parent.child(d)]);
            }
        }
        // Edges below the deep endpoint.
        if e.depth() < self.max_level {
            for d in 0..(self.degree - 1) as u8 {
                out.push(self.edge_index[&e.child(d)]);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Naive single cell (the O(n^2) fallback)

pub(crate) struct NaiveCell<'a> {
    ps: &'a PointSet,
}

impl<'a> NaiveCell<'a> {
    pub fn new(ps: &'a PointSet) -> Self {
        NaiveCell { ps }
    }
}

impl<'a> CellSpace for NaiveCell<'a> {
    fn n_points(&self) -> usize {
        self.ps.len()
    }

    fn n_cells(&self) -> usize {
        1
    }

    fn cell_of(&self, _p: u32) -> u32 {
        0
    }

    fn dist(&self, a: u32, b: u32) -> f64 {
        self.ps.dist(a, b)
    }

    fn cell_lower_bound(&self, _q: u32, _c: u32) -> f64 {
        0.0
    }

    fn neighbors(&self, _c: u32, _out: &mut Vec<u32>) {}
}

// ---------------------------------------------------------------------------
// Dispatch

pub(crate) enum AnySpace<'a> {
    Euclid(EuclidGrid<'a>),
    Hyp(HypGrid<'a>),
    Tree(TreeGrid<'a>),
    Naive(NaiveCell<'a>),
}

pub(crate) fn build_space<'a>(ps: &'a PointSet, naive: bool) -> AnySpace<'a> {
    if naive {
        return AnySpace::Naive(NaiveCell::new(ps));
    }
    match &ps.data {
        PointData::Euclidean { dim, coords } if *dim <= 3 && !coords.is_empty() => {
            AnySpace::Euclid(EuclidGrid::new(*dim, coords, &ps.window))
        }
        PointData::Hyperbolic { xy } if !xy.is_empty() => {
            let radius = match &ps.window {
                Window::Disk { radius } => *radius,
                _ => 1.0,
            };
            AnySpace::Hyp(HypGrid::new(xy, radius))
        }
        PointData::Tree { pts } if !pts.is_empty() => {
            let radius = match &ps.window {
                Window::Ball { radius } => *radius,
                _ => 1.0,
            };
            match TreeGrid::new(pts, tree_degree(ps), radius) {
                Some(g) => AnySpace::Tree(g),
                None => AnySpace::Naive(NaiveCell::new(ps)),
            }
        }
        _ => AnySpace::Naive(NaiveCell::new(ps)),
    }
}

fn tree_degree(ps: &PointSet) -> usize {
    match ps.space {
        crate::space::Space::RealTree { degree } => degree,
        _ => unreachable!(),
    }
}

macro_rules! dispatch_space {
    ($ps:expr, $naive:expr, |$s:ident| $body:expr) => {
        match crate::matching::index::build_space($ps, $naive) {
            crate::matching::index::AnySpace::Euclid($s) => $body,
            crate::matching::index::AnySpace::Hyp($s) => $body,
            crate::matching::index::AnySpace::Tree($s) => $body,
            crate::matching::index::AnySpace::Naive($s) => $body,
        }
    };
}
pub(crate) use dispatch_space;

// ---------------------------------------------------------------------------
// The index engine

pub(crate) struct CellIndex<S: CellSpace> {
    pub space: S,
    start: Vec<u32>,
    items: Vec<u32>,
    cell_of_point: Vec<u32>,
    alive: Vec<bool>,
    live_in_cell: Vec<u32>,
    live_count: usize,
    // best-first scratch
    heap: BinaryHeap<Reverse<(Ord64, u32)>>,
    seen: Vec<u32>,
    stamp: u32,
    nbrs: Vec<u32>,
    cand: Vec<(f64, u32)>,
}

impl<S: CellSpace> CellIndex<S> {
    pub fn new(space: S) -> Self {
        let n = space.n_points();
        let cells = space.n_cells();
        let cell_of_point: Vec<u32> = (0..n as u32).map(|p| space.cell_of(p)).collect();
        let mut count = vec![0u32; cells + 1];
        for &c in &cell_of_point {
            count[c as usize + 1] += 1;
        }
        for i in 0..cells {
            count[i + 1] += count[i];
        }
        let start = count.clone();
        let mut fill = count;
        let mut items = vec![0u32; n];
        for (p, &c) in cell_of_point.iter().enumerate() {
            items[fill[c as usize] as usize] = p as u32;
            fill[c as usize] += 1;
        }
        let mut live_in_cell = vec![0u32; cells];
        for &c in &cell_of_point {
            live_in_cell[c as usize] += 1;
        }
        CellIndex {
            space,
            start,
            items,
            cell_of_point,
            alive: vec![true; n],
            live_in_cell,
            live_count: n,
            heap: BinaryHeap::new(),
            seen: vec![0; cells],
            stamp: 0,
            nbrs: Vec::new(),
            cand: Vec::new(),
        }
    }

    pub fn is_alive(&self, p: u32) -> bool {
        self.alive[p as usize]
    }

    pub fn live_count(&self) -> usize {
        self.live_count
    }

    pub fn remove(&mut self, p: u32) {
        if self.alive[p as usize] {
            self.alive[p as usize] = false;
            self.live_in_cell[self.cell_of_point[p as usize] as usize] -= 1;
            self.live_count -= 1;
        }
    }

    fn cell_items(&self, c: u32) -> &[u32] {
        &self.items[self.start[c as usize] as usize..self.start[c as usize + 1] as usize]
    }

    fn begin_search(&mut self, q: u32) {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.seen.iter_mut().for_each(|s| *s = 0);
            self.stamp = 1;
        }
        self.heap.clear();
        let c0 = self.cell_of_point[q as usize];
        self.seen[c0 as usize] = self.stamp;
        self.heap.push(Reverse((Ord64(0.0), c0)));
    }

    fn expand(&mut self, q: u32, c: u32) {
        self.nbrs.clear();
        let mut nbrs = std::mem::take(&mut self.nbrs);
        self.space.neighbors(c, &mut nbrs);
        for &nb in &nbrs {
            if self.seen[nb as usize] != self.stamp {
                self.seen[nb as usize] = self.stamp;
                let lb = self.space.cell_lower_bound(q, nb);
                self.heap.push(Reverse((Ord64(lb), nb)));
            }
        }
        self.nbrs = nbrs;
    }

    /// The live point nearest to `q` (excluding `q`), with ties within `tol`
    /// resolved toward the smallest id. Returns its id and exact distance.
    pub fn nearest_live(&mut self, q: u32, tol: f64) -> Option<(u32, f64)> {
        self.begin_search(q);
        self.cand.clear();
        let mut cand = std::mem::take(&mut self.cand);
        let mut best = f64::INFINITY;
        while let Some(&Reverse((Ord64(lb), c))) = self.heap.peek() {
            if lb > best + tol {
                break;
            }
            self.heap.pop();
            if self.live_in_cell[c as usize] > 0 {
                for &p in self.cell_items(c) {
                    if p == q || !self.alive[p as usize] {
                        continue;
                    }
                    let d = self.space.dist(q, p);
                    if d < best {
                        best = d;
                    }
                    if d <= best + tol {
                        cand.push((d, p));
                    }
                }
            }
            self.expand(q, c);
        }
        let mut winner: Option<(u32, f64)> = None;
        for &(d, p) in &cand {
            if d <= best + tol {
                match winner {
                    Some((wp, _)) if wp <= p => {}
                    _ => winner = Some((p, d)),
                }
            }
        }
        self.cand = cand;
        winner.map(|(p, d)| (p, d))
    }

    /// All points (alive or dead) within distance `radius` of `q`, inclusive.
    pub fn range_all(&mut self, q: u32, radius: f64, out: &mut Vec<u32>) {
        out.clear();
        self.begin_search(q);
        while let Some(&Reverse((Ord64(lb), c))) = self.heap.peek() {
            if lb > radius {
                break;
            }
            self.heap.pop();
            for &p in self.cell_items(c) {
                if p != q && self.space.dist(q, p) <= radius {
                    out.push(p);
                }
            }
            self.expand(q, c);
        }
    }

    /// Does any taint location lie within `radius` of `q` (inclusive)?
    pub fn any_taint_within(&mut self, taint: &TaintIndex, q: u32, radius: f64) -> bool {
        if taint.map.is_empty() {
            return false;
        }
        self.begin_search(q);
        while let Some(&Reverse((Ord64(lb), c))) = self.heap.peek() {
            if lb > radius {
                break;
            }
            self.heap.pop();
            if let Some(pts) = taint.map.get(&c) {
                for &p in pts {
                    if self.space.dist(q, p) <= radius {
                        return true;
                    }
                }
            }
            self.expand(q, c);
        }
        false
    }

    pub fn insert_taint(&self, taint: &mut TaintIndex, p: u32) {
        taint.map.entry(self.cell_of_point[p as usize]).or_default().push(p);
    }

    /// The k nearest live points to `q`, by exact distance.
    pub fn k_nearest(&mut self, q: u32, k: usize) -> Vec<(f64, u32)> {
        self.begin_search(q);
        let mut found: BinaryHeap<(Ord64, u32)> = BinaryHeap::new(); // max-heap
        while let Some(&Reverse((Ord64(lb), c))) = self.heap.peek() {
            let kth = if found.len() == k { found.peek().unwrap().0 .0 } else { f64::INFINITY };
            if lb > kth {
                break;
            }
            self.heap.pop();
            for &p in self.cell_items(c) {
                if p == q || !self.alive[p as usize] {
                    continue;
                }
                let d = self.space.dist(q, p);
                if found.len() < k {
                    found.push((Ord64(d), p));
                } else if d < found.peek().unwrap().0 .0 {
                    found.pop();
                    found.push((Ord64(d), p));
                }
            }
            self.expand(q, c);
        }
        found.into_iter().map(|(d, p)| (d.0, p)).collect()
    }
}

#[derive(Default)]
pub(crate) struct TaintIndex {
    map: HashMap<u32, Vec<u32>>,
}

impl TaintIndex {
    pub fn new() -> Self {
        TaintIndex::default()
    }
}

/// Unique unordered near-neighbor pairs `(dist, u, v)` over a k-NN graph;
/// used by diagnostics when the full pair list is too large.
pub(crate) fn knn_pairs(ps: &PointSet, k: usize) -> Vec<(f64, u32, u32)> {
    dispatch_space!(ps, false, |s| {
        let mut index = CellIndex::new(s);
        let mut pairs = Vec::with_capacity(ps.len() * k);
        for q in 0..ps.len() as u32 {
            for (d, p) in index.k_nearest(q, k) {
                let (a, b) = if q < p { (q, p) } else { (p, q) };
                pairs.push((d, a, b));
            }
        }
        pairs.sort_by(|x, y| x.1.cmp(&y.1).then(x.2.cmp(&y.2)));
        pairs.dedup_by(|a, b| a.1 == b.1 && a.2 == b.2);
        pairs
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::sample_poisson;
    use crate::space::Space;

    fn check_nearest_matches_scan(ps: &PointSet) {
        dispatch_space!(ps, false, |s| {
            let mut index = CellIndex::new(s);
            for q in 0..ps.len() as u32 {
                let got = index.nearest_live(q, 1e-12).unwrap();
                // naive scan with the same tie rule
                let mut best = f64::INFINITY;
                for p in 0..ps.len() as u32 {
                    if p != q {
                        best = best.min(ps.dist(q, p));
                    }
                }
                let mut want = u32::MAX;
                for p in 0..ps.len() as u32 {
                    if p != q && ps.dist(q, p) <= best + 1e-12 && p < want {
                        want = p;
                    }
                }
                assert_eq!(got.0, want, "query {q}");
                assert!((got.1 - ps.dist(q, want)).abs() == 0.0);
            }
        });
    }

    #[test]
    fn grid_nearest_agrees_with_scan_euclidean() {
        let ps = sample_poisson(&Space::Euclidean { dim: 2 }, &Window::cube(2, 12.0), 1.0, 11).unwrap();
        assert!(ps.len() > 50);
        check_nearest_matches_scan(&ps);
    }

    #[test]
    fn grid_nearest_agrees_with_scan_hyperbolic() {
        let ps = sample_poisson(&Space::Hyperbolic, &Window::Disk { radius: 5.0 }, 1.0, 13).unwrap();
        assert!(ps.len() > 50);
        check_nearest_matches_scan(&ps);
    }

    #[test]
    fn grid_nearest_agrees_with_scan_tree() {
        let ps =
            sample_poisson(&Space::RealTree { degree: 3 }, &Window::Ball { radius: 6.0 }, 1.0, 17).unwrap();
        assert!(ps.len() > 50);
        check_nearest_matches_scan(&ps);
    }

    #[test]
    fn range_query_is_exhaustive() {
        let ps = sample_poisson(&Space::Euclidean { dim: 2 }, &Window::cube(2, 10.0), 2.0, 3).unwrap();
        dispatch_space!(&ps, false, |s| {
            let mut index = CellIndex::new(s);
            let mut out = Vec::new();
            for q in 0..ps.len().min(40) as u32 {
                for radius in [0.5, 1.7, 4.0] {
                    index.range_all(q, radius, &mut out);
                    let mut want: Vec<u32> = (0..ps.len() as u32)
                        .filter(|&p| p != q && ps.dist(q, p) <= radius)
                        .collect();
                    out.sort_unstable();
                    want.sort_unstable();
                    assert_eq!(out, want);
                }
            }
        });
    }
}
