//! Point-process generators and well-definedness diagnostics.
//!
//! The balloon process is driven entirely by its initial point set, so the
//! generators here are deterministic functions of a 64-bit seed. Poisson
//! sampling works on all three spaces; the perturbed lattice (Bernoulli
//! percolation on `Z^d` followed by a small displacement) is Euclidean only.

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::space::{
    euclidean_distance, hyperbolic_distance_xy, sample_uniform, tree_distance, MetricPoint, Space,
    TreePoint, Window,
};

/// A finite realization of a point process inside a window.
///
/// Point ids are contiguous `0..len` and stable for the lifetime of the set;
/// matchings, pop times and certificates all refer to them.
#[derive(Debug, Clone)]
pub struct PointSet {
    pub space: Space,
    pub window: Window,
    pub seed: u64,
    pub(crate) data: PointData,
}

#[derive(Debug, Clone)]
pub(crate) enum PointData {
    Euclidean { dim: usize, coords: Vec<f64> },
    Hyperbolic { xy: Vec<[f64; 2]> },
    Tree { pts: Vec<TreePoint> },
}

impl PointData {
    fn len(&self) -> usize {
        match self {
            PointData::Euclidean { dim, coords } => coords.len() / (*dim).max(1),
            PointData::Hyperbolic { xy } => xy.len(),
            PointData::Tree { pts } => pts.len(),
        }
    }
}

impl PointSet {
    pub fn from_points(
        space: Space,
        window: Window,
        seed: u64,
        points: Vec<MetricPoint>,
    ) -> Result<PointSet> {
        space.validate()?;
        window.validate(&space)?;
        let data = match space {
            Space::Euclidean { dim } => {
                let mut coords = Vec::with_capacity(points.len() * dim);
                for p in &points {
                    match p {
                        MetricPoint::Euclidean(x) if x.len() == dim => coords.extend_from_slice(x),
                        _ => return Err(Error::SpaceMismatch("non-euclidean point in set".into())),
                    }
                }
                PointData::Euclidean { dim, coords }
            }
            Space::Hyperbolic => {
                let mut xy = Vec::with_capacity(points.len());
                for p in &points {
                    match p {
                        MetricPoint::Hyperbolic { x, y } => xy.push([*x, *y]),
                        _ => return Err(Error::SpaceMismatch("non-hyperbolic point in set".into())),
                    }
                }
                PointData::Hyperbolic { xy }
            }
            Space::RealTree { .. } => {
                let mut pts = Vec::with_capacity(points.len());
                for p in &points {
                    match p {
                        MetricPoint::Tree(t) => pts.push(*t),
                        _ => return Err(Error::SpaceMismatch("non-tree point in set".into())),
                    }
                }
                PointData::Tree { pts }
            }
        };
        Ok(PointSet { space, window, seed, data })
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, i: u32) -> MetricPoint {
        match &self.data {
            PointData::Euclidean { dim, coords } => {
                let i = i as usize;
                MetricPoint::Euclidean(coords[i * dim..(i + 1) * dim].to_vec())
            }
            PointData::Hyperbolic { xy } => {
                let [x, y] = xy[i as usize];
                MetricPoint::Hyperbolic { x, y }
            }
            PointData::Tree { pts } => MetricPoint::Tree(pts[i as usize]),
        }
    }

    pub fn points(&self) -> Vec<MetricPoint> {
        (0..self.len() as u32).map(|i| self.point(i)).collect()
    }

    /// Distance between points `i` and `j` of the set.
    pub fn dist(&self, i: u32, j: u32) -> f64 {
        match &self.data {
            PointData::Euclidean { dim, coords } => {
                let (i, j) = (i as usize * dim, j as usize * dim);
                euclidean_distance(&coords[i..i + dim], &coords[j..j + dim])
            }
            PointData::Hyperbolic { xy } => {
                let a = xy[i as usize];
                let b = xy[j as usize];
                hyperbolic_distance_xy(a[0], a[1], b[0], b[1])
            }
            PointData::Tree { pts } => tree_distance(&pts[i as usize], &pts[j as usize]),
        }
    }

    /// Distance from an arbitrary point of the same space to point `j`.
    pub fn dist_to(&self, p: &MetricPoint, j: u32) -> Result<f64> {
        crate::space::distance(&self.space, p, &self.point(j))
    }

    /// Restriction to a sub-window. Returns the restricted set (with fresh
    /// contiguous ids) together with the original id of each kept point.
    pub fn restrict(&self, sub: &Window) -> Result<(PointSet, Vec<u32>)> {
        sub.validate(&self.space)?;
        let mut kept = Vec::new();
        let mut points = Vec::new();
        for i in 0..self.len() as u32 {
            let p = self.point(i);
            if sub.contains(&self.space, &p) {
                kept.push(i);
                points.push(p);
            }
        }
        Ok((PointSet::from_points(self.space, sub.clone(), self.seed, points)?, kept))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("point set serializes")
    }

    pub fn from_json(s: &str) -> Result<PointSet> {
        serde_json::from_str(s).map_err(|e| Error::Serde(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct PointSetRepr {
    space: Space,
    window: Window,
    seed: u64,
    points: Vec<MetricPoint>,
}

impl Serialize for PointSet {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PointSetRepr {
            space: self.space,
            window: self.window.clone(),
            seed: self.seed,
            points: self.points(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PointSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PointSetRepr::deserialize(d)?;
        PointSet::from_points(repr.space, repr.window, repr.seed, repr.points)
            .map_err(serde::de::Error::custom)
    }
}

/// Sample the Poisson process with the given intensity (points per unit
/// measure) restricted to `window`. Fully reproducible from `seed`.
pub fn sample_poisson(space: &Space, window: &Window, intensity: f64, seed: u64) -> Result<PointSet> {
    if !(intensity > 0.0) {
        return Err(Error::InvalidArgument("intensity must be positive".into()));
    }
    let mean = intensity * window.measure(space)?;
    let n = if mean > 0.0 {
        let mut rng = rng::stream(seed, "poisson-count", 0);
        Poisson::new(mean)
            .map_err(|e| Error::InvalidArgument(format!("poisson: {e}")))?
            .sample(&mut rng) as usize
    } else {
        0
    };
    let mut rng = rng::stream(seed, "poisson-points", 0);
    let points: Vec<MetricPoint> = (0..n)
        .map(|_| sample_uniform(space, window, &mut rng))
        .collect::<Result<_>>()?;
    PointSet::from_points(*space, window.clone(), seed, points)
}

/// Bernoulli site percolation on the lattice points of `Z^d` inside a box
/// window, each kept point independently displaced by a centered Gaussian
/// with standard deviation `perturb_sd`, clamped so the displacement norm
/// stays below 1/2 (and the point stays inside the window).
pub fn sample_perturbed_lattice(
    window: &Window,
    p: f64,
    perturb_sd: f64,
    seed: u64,
) -> Result<PointSet> {
    let (corner, sides) = match window {
        Window::Box { corner, sides } => (corner.clone(), sides.clone()),
        _ => return Err(Error::Unsupported("perturbed lattice requires a euclidean box window".into())),
    };
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidArgument("keep probability must lie in (0, 1]".into()));
    }
    if perturb_sd < 0.0 {
        return Err(Error::InvalidArgument("perturbation sd must be nonnegative".into()));
    }
    let dim = corner.len();
    let space = Space::Euclidean { dim };

    let axes: Vec<Vec<i64>> = corner
        .iter()
        .zip(&sides)
        .map(|(&c, &s)| {
            let lo = c.ceil() as i64;
            let hi = (c + s).ceil() as i64;
            (lo..hi).filter(|&k| (k as f64) < c + s && (k as f64) >= c).collect()
        })
        .collect();

    let normal = if perturb_sd > 0.0 {
        Some(Normal::new(0.0, perturb_sd).map_err(|e| Error::InvalidArgument(e.to_string()))?)
    } else {
        None
    };
    let mut rng = rng::stream(seed, "perturbed-lattice", 0);
    let mut points = Vec::new();
    if dim > 0 && axes.iter().all(|v| !v.is_empty()) {
        let mut idx = vec![0usize; dim];
        'outer: loop {
            let site: Vec<f64> = idx.iter().enumerate().map(|(a, &k)| axes[a][k] as f64).collect();
            if p >= 1.0 || rng.random::<f64>() < p {
                let mut x = site;
                if let Some(normal) = &normal {
                    let mut disp: Vec<f64> = (0..dim).map(|_| normal.sample(&mut rng)).collect();
                    let norm = disp.iter().map(|d| d * d).sum::<f64>().sqrt();
                    if norm >= 0.5 {
                        let scale = 0.5 * (1.0 - 1e-9) / norm;
                        for d in &mut disp {
                            *d *= scale;
                        }
                    }
                    for (a, xi) in x.iter_mut().enumerate() {
                        *xi = (*xi + disp[a]).clamp(corner[a], (corner[a] + sides[a]).next_down());
                    }
                }
                points.push(MetricPoint::Euclidean(x));
            }
            // odometer over the lattice, row-major for determinism
            for a in (0..dim).rev() {
                idx[a] += 1;
                if idx[a] < axes[a].len() {
                    continue 'outer;
                }
                idx[a] = 0;
                if a == 0 {
                    break 'outer;
                }
            }
        }
    }
    PointSet::from_points(space, window.clone(), seed, points)
}

/// Knobs for [`diagnostics`].
#[derive(Debug, Clone)]
pub struct DiagnosticsConfig {
    /// Two pair distances closer than this count as equal.
    pub tol: f64,
    /// Equidistance is scanned over the `m_smallest` smallest pair distances.
    pub m_smallest: usize,
    /// Reported chain lengths are capped here.
    pub chain_cap: usize,
    /// Above this many pairs the chain search falls back to a k-nearest
    /// neighbor graph and the result is a lower bound.
    pub exact_pair_limit: usize,
    /// Neighbors per point in the fallback graph.
    pub knn: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            tol: 1e-12,
            m_smallest: 1000,
            chain_cap: 64,
            exact_pair_limit: 20_000_000,
            knn: 16,
        }
    }
}

/// Well-definedness report for a point set: the minimum gap, near-equidistant
/// pair-of-pair count, and the longest chain of strictly decreasing
/// consecutive distances.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticsReport {
    pub min_gap: f64,
    pub equidistant_quadruples: u64,
    /// Number of points on the longest descending chain found (capped).
    pub longest_descending_chain: usize,
    /// False when the pair graph was restricted to nearest neighbors.
    pub chain_exact: bool,
}

pub fn diagnostics(ps: &PointSet, cfg: &DiagnosticsConfig) -> Result<DiagnosticsReport> {
    let n = ps.len();
    if n < 2 {
        return Err(Error::InvalidArgument("diagnostics needs at least two points".into()));
    }
    let total_pairs = n * (n - 1) / 2;
    let exact = total_pairs <= cfg.exact_pair_limit;
    let mut pairs: Vec<(f64, u32, u32)> = if exact {
        let mut v = Vec::with_capacity(total_pairs);
        for i in 0..n as u32 {
            for j in (i + 1)..n as u32 {
                v.push((ps.dist(i, j), i, j));
            }
        }
        v
    } else {
        crate::matching::index::knn_pairs(ps, cfg.knn)
    };
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let min_gap = pairs.first().map(|p| p.0).unwrap_or(f64::INFINITY);

    // Near-equidistant pairs among the m smallest distances, by sliding
    // window over the sorted list.
    let m = cfg.m_smallest.min(pairs.len());
    let mut equidistant = 0u64;
    let mut lo = 0usize;
    for hi in 0..m {
        while pairs[hi].0 - pairs[lo].0 >= cfg.tol {
            lo += 1;
        }
        equidistant += (hi - lo) as u64;
    }

    // Longest descending chain. Reversed, a descending chain has strictly
    // increasing gaps, so process pairs by increasing distance and track, per
    // point, the longest increasing-gap path starting there. Equal distances
    // are batched so "strictly" is honored.
    let mut best = vec![0u32; n];
    let mut i = 0;
    while i < pairs.len() {
        let mut j = i;
        while j < pairs.len() && pairs[j].0 == pairs[i].0 {
            j += 1;
        }
        let mut updates: Vec<(u32, u32)> = Vec::with_capacity(2 * (j - i));
        for &(_, u, v) in &pairs[i..j] {
            updates.push((u, 1 + best[v as usize]));
            updates.push((v, 1 + best[u as usize]));
        }
        for (x, val) in updates {
            let b = &mut best[x as usize];
            if val > *b {
                *b = val;
            }
        }
        i = j;
    }
    let chain = best.iter().copied().max().unwrap_or(0) as usize + 1;

    Ok(DiagnosticsReport {
        min_gap,
        equidistant_quadruples: equidistant,
        longest_descending_chain: chain.min(cfg.chain_cap),
        chain_exact: exact,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_is_reproducible() {
        let s = Space::Euclidean { dim: 2 };
        let w = Window::cube(2, 10.0);
        let a = sample_poisson(&s, &w, 1.0, 42).unwrap();
        let b = sample_poisson(&s, &w, 1.0, 42).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let c = sample_poisson(&s, &w, 1.0, 43).unwrap();
        assert_ne!(a.to_json(), c.to_json());
    }

    #[test]
    fn zero_measure_window_yields_empty_set() {
        let s = Space::Euclidean { dim: 2 };
        let w = Window::Box { corner: vec![0.0, 0.0], sides: vec![0.0, 5.0] };
        let ps = sample_poisson(&s, &w, 1.0, 1).unwrap();
        assert!(ps.is_empty());
    }

    #[test]
    fn unperturbed_full_lattice_is_exact() {
        let w = Window::cube(2, 5.0);
        let ps = sample_perturbed_lattice(&w, 1.0, 0.0, 9).unwrap();
        assert_eq!(ps.len(), 25);
        let mut pts: Vec<Vec<f64>> = ps
            .points()
            .into_iter()
            .map(|p| match p {
                MetricPoint::Euclidean(x) => x,
                _ => unreachable!(),
            })
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expect = Vec::new();
        for i in 0..5 {
            for j in 0..5 {
                expect.push(vec![i as f64, j as f64]);
            }
        }
        assert_eq!(pts, expect);
    }

    #[test]
    fn perturbed_lattice_displacements_are_clamped() {
        let w = Window::cube(2, 30.0);
        let ps = sample_perturbed_lattice(&w, 0.8, 10.0, 3).unwrap();
        // With a huge sd nearly every displacement hits the clamp.
        for p in ps.points() {
            let MetricPoint::Euclidean(x) = p else { unreachable!() };
            let site = [x[0].round(), x[1].round()];
            let d = ((x[0] - site[0]).powi(2) + (x[1] - site[1]).powi(2)).sqrt();
            assert!(d < 0.5, "displacement {d} not below 1/2");
            assert!(w.contains(&Space::Euclidean { dim: 2 }, &MetricPoint::Euclidean(x)));
        }
    }

    #[test]
    fn diagnostics_on_unit_square_sees_equidistant_quadruples() {
        let s = Space::Euclidean { dim: 2 };
        let w = Window::cube(2, 2.0);
        let pts = vec![
            MetricPoint::Euclidean(vec![0.0, 0.0]),
            MetricPoint::Euclidean(vec![1.0, 0.0]),
            MetricPoint::Euclidean(vec![0.0, 1.0]),
            MetricPoint::Euclidean(vec![1.0, 1.0]),
        ];
        let ps = PointSet::from_points(s, w, 0, pts).unwrap();
        let rep = diagnostics(&ps, &DiagnosticsConfig::default()).unwrap();
        assert!(rep.equidistant_quadruples >= 1);
        assert_eq!(rep.min_gap, 1.0);
    }

    #[test]
    fn descending_chain_on_collinear_points() {
        // 0, 4, 6, 7 on the line: gaps 4, 2, 1 descend along 0 -> 4 -> 6 -> 7.
        let s = Space::Euclidean { dim: 1 };
        let w = Window::cube(1, 8.0);
        let pts = [0.0, 4.0, 6.0, 7.0]
            .iter()
            .map(|&x| MetricPoint::Euclidean(vec![x]))
            .collect();
        let ps = PointSet::from_points(s, w, 0, pts).unwrap();
        let rep = diagnostics(&ps, &DiagnosticsConfig::default()).unwrap();
        assert_eq!(rep.longest_descending_chain, 4);
        assert!(rep.chain_exact);

        // Brute-force oracle: enumerate every chain by depth-first search.
        let coords = [0.0f64, 4.0, 6.0, 7.0];
        fn dfs(coords: &[f64], chain: &mut Vec<usize>, last_gap: f64, best: &mut usize) {
            *best = (*best).max(chain.len());
            let cur = *chain.last().unwrap();
            for next in 0..coords.len() {
                if chain.contains(&next) {
                    continue;
                }
                let gap = (coords[cur] - coords[next]).abs();
                if gap < last_gap {
                    chain.push(next);
                    dfs(coords, chain, gap, best);
                    chain.pop();
                }
            }
        }
        let mut best = 0;
        for start in 0..coords.len() {
            let mut chain = vec![start];
            dfs(&coords, &mut chain, f64::INFINITY, &mut best);
        }
        assert_eq!(best, 4);
    }

    #[test]
    fn point_set_round_trips_through_json() {
        let s = Space::RealTree { degree: 3 };
        let w = Window::Ball { radius: 3.0 };
        let ps = sample_poisson(&s, &w, 2.0, 5).unwrap();
        let json = ps.to_json();
        let back = PointSet::from_json(&json).unwrap();
        assert_eq!(ps.len(), back.len());
        for i in 0..ps.len() as u32 {
            assert_eq!(ps.point(i), back.point(i));
        }
    }
}
