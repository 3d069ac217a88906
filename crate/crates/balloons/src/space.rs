//! Metric and measure backends for the three supported spaces.
//!
//! * Euclidean space of any dimension, with Lebesgue measure.
//! * The hyperbolic plane at curvature -1, in the Poincaré disk model.
//! * The regular real tree with unit edge lengths and edge-length measure.
//!
//! Points, windows, distances, ball volumes and uniform sampling all live
//! here; everything downstream (point processes, matching, balloons) is
//! written against these primitives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperbolic points are rejected at construction when `|z|` exceeds
/// `1 - HYPERBOLIC_RIM_MARGIN`; beyond that the `acosh` argument in the
/// distance formula is too poorly conditioned to trust.
pub const HYPERBOLIC_RIM_MARGIN: f64 = 1e-12;

/// Maximum tree depth representable by a packed [`TreeAddr`].
pub const MAX_TREE_DEPTH: usize = 31;

/// Maximum supported degree of the real tree (a packing limit of
/// [`TreeAddr`], not a mathematical one).
pub const MAX_TREE_DEGREE: usize = 16;

/// One of the three supported metric measure spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Space {
    Euclidean { dim: usize },
    /// The hyperbolic plane with constant curvature -1.
    Hyperbolic,
    /// The infinite `degree`-regular real tree with unit edge lengths.
    RealTree { degree: usize },
}

impl Space {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Space::Euclidean { dim } => {
                if dim == 0 {
                    return Err(Error::InvalidArgument("euclidean dimension must be >= 1".into()));
                }
            }
            Space::Hyperbolic => {}
            Space::RealTree { degree } => {
                if degree < 3 {
                    return Err(Error::InvalidArgument("tree degree must be >= 3".into()));
                }
                if degree > MAX_TREE_DEGREE {
                    return Err(Error::InvalidArgument(format!(
                        "tree degree {degree} exceeds the packing limit {MAX_TREE_DEGREE}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Address of a vertex (equivalently, of its parent edge) in the rooted
/// regular tree.
///
/// The root carries the empty address. The digit string `d1 d2 ... dk`
/// names the vertex reached by taking child `d1` of the root and then
/// child `d_i` at each subsequent vertex; the same address names the edge
/// between that vertex and its parent. In a `d`-regular tree the root has
/// `d` children and every other vertex has `d - 1`.
///
/// Digits are packed four bits each into a `u128`, so addresses are `Copy`
/// and vertex distance is pure integer arithmetic on the longest common
/// prefix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeAddr {
    depth: u8,
    digits: u128,
}

impl TreeAddr {
    pub const ROOT: TreeAddr = TreeAddr { depth: 0, digits: 0 };

    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        if digits.len() > MAX_TREE_DEPTH {
            return Err(Error::InvalidArgument(format!(
                "tree address deeper than {MAX_TREE_DEPTH}"
            )));
        }
        let mut addr = TreeAddr::ROOT;
        for &d in digits {
            if d as usize >= MAX_TREE_DEGREE {
                return Err(Error::InvalidArgument("tree address digit out of range".into()));
            }
            addr = addr.child(d);
        }
        Ok(addr)
    }

    pub fn depth(&self) -> usize {
        self.depth as usize
    }

    pub fn is_root(&self) -> bool {
        self.depth == 0
    }

    pub fn digit(&self, i: usize) -> u8 {
        debug_assert!(i < self.depth as usize);
        ((self.digits >> (4 * i)) & 0xf) as u8
    }

    pub fn digits(&self) -> Vec<u8> {
        (0..self.depth()).map(|i| self.digit(i)).collect()
    }

    pub fn child(&self, digit: u8) -> TreeAddr {
        debug_assert!((self.depth as usize) < MAX_TREE_DEPTH);
        debug_assert!((digit as usize) < MAX_TREE_DEGREE);
        TreeAddr {
            depth: self.depth + 1,
            digits: self.digits | ((digit as u128) << (4 * self.depth as usize)),
        }
    }

    pub fn parent(&self) -> Option<TreeAddr> {
        if self.depth == 0 {
            return None;
        }
        let d = self.depth - 1;
        TreeAddr {
            depth: d,
            digits: self.digits & !(0xfu128 << (4 * d as usize)),
        }
        .into()
    }

    /// Length of the longest common prefix with `other`.
    pub fn common_prefix(&self, other: &TreeAddr) -> usize {
        let max = self.depth.min(other.depth) as usize;
        for i in 0..max {
            if self.digit(i) != other.digit(i) {
                return i;
            }
        }
        max
    }

    /// Graph distance between the two vertices.
    pub fn vertex_distance(&self, other: &TreeAddr) -> usize {
        let p = self.common_prefix(other);
        self.depth() + other.depth() - 2 * p
    }
}

impl Serialize for TreeAddr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.digits().serialize(s)
    }
}

impl<'de> Deserialize<'de> for TreeAddr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let digits = Vec::<u8>::deserialize(d)?;
        TreeAddr::from_digits(&digits).map_err(serde::de::Error::custom)
    }
}

/// A point on the regular real tree: an edge plus an offset along it.
///
/// `offset` is measured from the parent endpoint of the edge, so `offset 0`
/// is the shallower vertex and `offset 1` the deeper one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreePoint {
    pub edge: TreeAddr,
    pub offset: f64,
}

impl TreePoint {
    pub fn new(edge: TreeAddr, offset: f64) -> Result<Self> {
        if edge.is_root() {
            return Err(Error::InvalidArgument("a tree point needs an edge, not the root".into()));
        }
        if !(0.0..=1.0).contains(&offset) {
            return Err(Error::InvalidArgument("tree offset must lie in [0, 1]".into()));
        }
        Ok(TreePoint { edge, offset })
    }

    /// The canonical representation of the root vertex as a point.
    pub fn root_vertex() -> Self {
        TreePoint { edge: TreeAddr::ROOT.child(0), offset: 0.0 }
    }

    /// Distance from this point to the vertex `v`.
    pub fn dist_to_vertex(&self, v: &TreeAddr) -> f64 {
        let parent = self.edge.parent().expect("edge has a parent");
        let via_parent = self.offset + parent.vertex_distance(v) as f64;
        let via_child = (1.0 - self.offset) + self.edge.vertex_distance(v) as f64;
        via_parent.min(via_child)
    }

    /// Distance from the root vertex.
    pub fn depth(&self) -> f64 {
        (self.edge.depth() - 1) as f64 + self.offset
    }
}

/// Geodesic distance between two tree points.
pub fn tree_distance(a: &TreePoint, b: &TreePoint) -> f64 {
    if a.edge == b.edge {
        return (a.offset - b.offset).abs();
    }
    // The geodesic leaves each edge through one of its endpoints; taking the
    // minimum over the four endpoint combinations is exact in a tree.
    let ap = a.edge.parent().expect("edge");
    let bp = b.edge.parent().expect("edge");
    let mut best = f64::INFINITY;
    for (ca, va) in [(a.offset, &ap), (1.0 - a.offset, &a.edge)] {
        for (cb, vb) in [(b.offset, &bp), (1.0 - b.offset, &b.edge)] {
            let d = ca + va.vertex_distance(vb) as f64 + cb;
            if d < best {
                best = d;
            }
        }
    }
    best
}

/// A point of one of the three spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MetricPoint {
    Euclidean(Vec<f64>),
    Hyperbolic { x: f64, y: f64 },
    Tree(TreePoint),
}

impl MetricPoint {
    /// A hyperbolic point from disk-model coordinates, rejecting points too
    /// close to the rim for the distance formula to stay conditioned.
    pub fn hyperbolic(x: f64, y: f64) -> Result<Self> {
        if x.hypot(y) >= 1.0 - HYPERBOLIC_RIM_MARGIN {
            return Err(Error::InvalidArgument(format!(
                "disk coordinate ({x}, {y}) too close to the boundary circle"
            )));
        }
        Ok(MetricPoint::Hyperbolic { x, y })
    }

    pub fn matches_space(&self, space: &Space) -> bool {
        matches!(
            (self, space),
            (MetricPoint::Euclidean(_), Space::Euclidean { .. })
                | (MetricPoint::Hyperbolic { .. }, Space::Hyperbolic)
                | (MetricPoint::Tree(_), Space::RealTree { .. })
        )
    }
}

pub(crate) fn euclidean_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Poincaré disk distance `arcosh(1 + 2|z-w|^2 / ((1-|z|^2)(1-|w|^2)))`.
pub(crate) fn hyperbolic_distance_xy(ax: f64, ay: f64, bx: f64, by: f64) -> f64 {
    let d2 = (ax - bx) * (ax - bx) + (ay - by) * (ay - by);
    let qa = 1.0 - (ax * ax + ay * ay);
    let qb = 1.0 - (bx * bx + by * by);
    (1.0 + 2.0 * d2 / (qa * qb)).acosh()
}

/// Metric distance between two points of `space`.
pub fn distance(space: &Space, a: &MetricPoint, b: &MetricPoint) -> Result<f64> {
    if !a.matches_space(space) || !b.matches_space(space) {
        return Err(Error::SpaceMismatch("point does not belong to the given space".into()));
    }
    match (a, b) {
        (MetricPoint::Euclidean(x), MetricPoint::Euclidean(y)) => {
            if let Space::Euclidean { dim } = space {
                if x.len() != *dim || y.len() != *dim {
                    return Err(Error::SpaceMismatch("coordinate length != dim".into()));
                }
            }
            Ok(euclidean_distance(x, y))
        }
        (MetricPoint::Hyperbolic { x: ax, y: ay }, MetricPoint::Hyperbolic { x: bx, y: by }) => {
            Ok(hyperbolic_distance_xy(*ax, *ay, *bx, *by))
        }
        (MetricPoint::Tree(p), MetricPoint::Tree(q)) => Ok(tree_distance(p, q)),
        _ => Err(Error::SpaceMismatch("mixed point kinds".into())),
    }
}

/// Volume of the unit ball in `dim` dimensions.
pub fn unit_ball_volume(dim: usize) -> f64 {
    // omega_d = omega_{d-2} * 2 pi / d, with omega_0 = 1 and omega_1 = 2.
    let mut v = if dim % 2 == 0 { 1.0 } else { 2.0 };
    let mut d = if dim % 2 == 0 { 2 } else { 3 };
    while d <= dim {
        v *= 2.0 * std::f64::consts::PI / d as f64;
        d += 2;
    }
    v
}

/// Area of the hyperbolic ball of radius `s`: `4 pi sinh^2(s/2)`.
pub fn hyperbolic_ball_area(s: f64) -> f64 {
    let sh = (s / 2.0).sinh();
    4.0 * std::f64::consts::PI * sh * sh
}

/// Edge-length measure of the ball of radius `s` about a vertex of the
/// `degree`-regular tree. Piecewise linear in `s`, with value
/// `d((d-1)^i - 1)/(d-2)` at integer `s = i` and slope `d(d-1)^i` on
/// `[i, i+1]`.
pub fn tree_ball_volume(degree: usize, s: f64) -> f64 {
    let d = degree as f64;
    let i = s.floor();
    let grown = d * ((d - 1.0).powf(i) - 1.0) / (d - 2.0);
    grown + (s - i) * d * (d - 1.0).powf(i)
}

/// Measure of the ball of radius `s` about a point of `space`.
pub fn ball_volume(space: &Space, s: f64) -> Result<f64> {
    if s < 0.0 {
        return Err(Error::InvalidArgument("ball radius must be nonnegative".into()));
    }
    Ok(match *space {
        Space::Euclidean { dim } => unit_ball_volume(dim) * s.powi(dim as i32),
        Space::Hyperbolic => hyperbolic_ball_area(s),
        Space::RealTree { degree } => tree_ball_volume(degree, s),
    })
}

/// A finite sampling window with closed-form measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Window {
    /// Axis-aligned box `[corner_i, corner_i + sides_i)`.
    Box { corner: Vec<f64>, sides: Vec<f64> },
    /// Hyperbolic disk of radius `radius` about the origin of the model.
    Disk { radius: f64 },
    /// Tree ball of radius `radius` about the root vertex.
    Ball { radius: f64 },
}

impl Window {
    /// Cube `[0, side)^dim`.
    pub fn cube(dim: usize, side: f64) -> Window {
        Window::Box { corner: vec![0.0; dim], sides: vec![side; dim] }
    }

    /// Cube `[-side/2, side/2)^dim`, centered on the origin.
    pub fn centered_cube(dim: usize, side: f64) -> Window {
        Window::Box { corner: vec![-side / 2.0; dim], sides: vec![side; dim] }
    }

    pub fn validate(&self, space: &Space) -> Result<()> {
        match (self, space) {
            (Window::Box { corner, sides }, Space::Euclidean { dim }) => {
                if corner.len() != *dim || sides.len() != *dim {
                    return Err(Error::SpaceMismatch("window dimension != space dimension".into()));
                }
                if sides.iter().any(|&s| s < 0.0) {
                    return Err(Error::InvalidArgument("box sides must be nonnegative".into()));
                }
                Ok(())
            }
            (Window::Disk { radius }, Space::Hyperbolic) | (Window::Ball { radius }, Space::RealTree { .. }) => {
                if *radius < 0.0 {
                    return Err(Error::InvalidArgument("window radius must be nonnegative".into()));
                }
                if matches!(space, Space::RealTree { .. }) && *radius > MAX_TREE_DEPTH as f64 - 1.0 {
                    return Err(Error::InvalidArgument(format!(
                        "tree window radius exceeds addressable depth {MAX_TREE_DEPTH}"
                    )));
                }
                Ok(())
            }
            _ => Err(Error::SpaceMismatch("window shape does not fit the space".into())),
        }
    }

    pub fn measure(&self, space: &Space) -> Result<f64> {
        self.validate(space)?;
        Ok(match (self, space) {
            (Window::Box { sides, .. }, _) => sides.iter().product(),
            (Window::Disk { radius }, _) => hyperbolic_ball_area(*radius),
            (Window::Ball { radius }, Space::RealTree { degree }) => tree_ball_volume(*degree, *radius),
            _ => unreachable!(),
        })
    }

    pub fn contains(&self, space: &Space, p: &MetricPoint) -> bool {
        match (self, p) {
            (Window::Box { corner, sides }, MetricPoint::Euclidean(x)) => x
                .iter()
                .zip(corner.iter().zip(sides))
                .all(|(&xi, (&c, &s))| xi >= c && xi < c + s),
            (Window::Disk { radius }, MetricPoint::Hyperbolic { x, y }) => {
                hyperbolic_distance_xy(0.0, 0.0, *x, *y) <= *radius
            }
            (Window::Ball { radius }, MetricPoint::Tree(t)) => t.depth() <= *radius,
            _ => {
                let _ = space;
                false
            }
        }
    }

    /// Distance from `p` to the boundary of the window.
    pub fn boundary_distance(&self, space: &Space, p: &MetricPoint) -> Result<f64> {
        if !p.matches_space(space) {
            return Err(Error::SpaceMismatch("point does not belong to the space".into()));
        }
        Ok(match (self, p) {
            (Window::Box { corner, sides }, MetricPoint::Euclidean(x)) => x
                .iter()
                .zip(corner.iter().zip(sides))
                .map(|(&xi, (&c, &s))| (xi - c).min(c + s - xi))
                .fold(f64::INFINITY, f64::min),
            (Window::Disk { radius }, MetricPoint::Hyperbolic { x, y }) => {
                radius - hyperbolic_distance_xy(0.0, 0.0, *x, *y)
            }
            (Window::Ball { radius }, MetricPoint::Tree(t)) => radius - t.depth(),
            _ => return Err(Error::SpaceMismatch("window shape does not fit the space".into())),
        })
    }
}

/// Sample one point uniformly (with respect to the space's measure)
/// from `window`.
pub fn sample_uniform<R: rand::Rng>(space: &Space, window: &Window, rng: &mut R) -> Result<MetricPoint> {
    window.validate(space)?;
    Ok(match (space, window) {
        (Space::Euclidean { .. }, Window::Box { corner, sides }) => MetricPoint::Euclidean(
            corner
                .iter()
                .zip(sides)
                .map(|(&c, &s)| c + s * rng.random::<f64>())
                .collect(),
        ),
        (Space::Hyperbolic, Window::Disk { radius }) => {
            // Radial CDF F(s) = sinh^2(s/2) / sinh^2(R/2); invert directly.
            let u: f64 = rng.random();
            let s = 2.0 * (u.sqrt() * (radius / 2.0).sinh()).asinh();
            let rm = (s / 2.0).tanh();
            let theta = rng.random::<f64>() * std::f64::consts::TAU;
            MetricPoint::Hyperbolic { x: rm * theta.cos(), y: rm * theta.sin() }
        }
        (Space::RealTree { degree }, Window::Ball { radius }) => {
            MetricPoint::Tree(sample_tree_ball(*degree, *radius, rng)?)
        }
        _ => unreachable!("validate() checked the pairing"),
    })
}

/// Number of edges at depth `level` (edges whose deeper endpoint has depth
/// `level`) of the `degree`-regular rooted tree.
pub(crate) fn edges_at_level(degree: usize, level: usize) -> f64 {
    debug_assert!(level >= 1);
    degree as f64 * (degree as f64 - 1.0).powi(level as i32 - 1)
}

fn sample_tree_ball<R: rand::Rng>(degree: usize, radius: f64, rng: &mut R) -> Result<TreePoint> {
    if radius <= 0.0 {
        return Err(Error::InvalidArgument("empty tree window".into()));
    }
    let levels = radius.ceil() as usize;
    // Level k covers offsets [k-1, min(k, radius)); pick a level with
    // probability proportional to its total edge length.
    let weights: Vec<f64> = (1..=levels)
        .map(|k| edges_at_level(degree, k) * (radius - (k - 1) as f64).min(1.0))
        .collect();
    let total: f64 = weights.iter().sum();
    let mut pick = rng.random::<f64>() * total;
    let mut level = levels;
    for (k, w) in weights.iter().enumerate() {
        if pick < *w {
            level = k + 1;
            break;
        }
        pick -= w;
    }
    let mut addr = TreeAddr::ROOT.child(rng.random_range(0..degree as u8));
    for _ in 1..level {
        addr = addr.child(rng.random_range(0..degree as u8 - 1));
    }
    let len = (radius - (level - 1) as f64).min(1.0);
    Ok(TreePoint { edge: addr, offset: rng.random::<f64>() * len })
}

/// Apply the disk automorphism `z -> e^{i theta} (z - a) / (1 - conj(a) z)`
/// to the model coordinate `(x, y)`. Hyperbolic isometry; used by tests and
/// by the tessellation builder.
pub fn disk_automorphism(x: f64, y: f64, ax: f64, ay: f64, theta: f64) -> (f64, f64) {
    // numerator z - a
    let nx = x - ax;
    let ny = y - ay;
    // denominator 1 - conj(a) z
    let dx = 1.0 - (ax * x + ay * y);
    let dy = -(ax * y - ay * x);
    let den = dx * dx + dy * dy;
    let qx = (nx * dx + ny * dy) / den;
    let qy = (ny * dx - nx * dy) / den;
    let (s, c) = theta.sin_cos();
    (qx * c - qy * s, qx * s + qy * c)
}

/// Euclidean center and radius of the model circle that represents the
/// hyperbolic circle of radius `rho` about the disk point `(x, y)`.
pub fn hyperbolic_circle_euclidean(x: f64, y: f64, rho: f64) -> (f64, f64, f64) {
    let t = (rho / 2.0).tanh();
    let zz = x * x + y * y;
    let den = 1.0 - t * t * zz;
    let scale = (1.0 - t * t) / den;
    let radius = t * (1.0 - zz) / den;
    (x * scale, y * scale, radius)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_pythagoras() {
        let s = Space::Euclidean { dim: 2 };
        let a = MetricPoint::Euclidean(vec![0.0, 0.0]);
        let b = MetricPoint::Euclidean(vec![3.0, 4.0]);
        assert_eq!(distance(&s, &a, &b).unwrap(), 5.0);
    }

    #[test]
    fn hyperbolic_radial_distance_is_two_artanh() {
        let s = Space::Hyperbolic;
        let a = MetricPoint::hyperbolic(0.0, 0.0).unwrap();
        let b = MetricPoint::hyperbolic(0.5, 0.0).unwrap();
        let d = distance(&s, &a, &b).unwrap();
        assert!((d - 3.0f64.ln()).abs() < 1e-12, "expected log 3, got {d}");
    }

    #[test]
    fn tree_distance_through_shared_vertex() {
        let s = Space::RealTree { degree: 3 };
        // Midpoints of two sibling edges below the root: 1/2 + 1/2.
        let e0 = TreeAddr::ROOT.child(0);
        let e1 = TreeAddr::ROOT.child(1);
        let a = MetricPoint::Tree(TreePoint::new(e0, 0.5).unwrap());
        let b = MetricPoint::Tree(TreePoint::new(e1, 0.5).unwrap());
        assert_eq!(distance(&s, &a, &b).unwrap(), 1.0);
    }

    #[test]
    fn tree_distance_same_edge_and_nested() {
        let e = TreeAddr::ROOT.child(2);
        let a = MetricPoint::Tree(TreePoint::new(e, 0.25).unwrap());
        let b = MetricPoint::Tree(TreePoint::new(e, 0.75).unwrap());
        let s = Space::RealTree { degree: 3 };
        assert!((distance(&s, &a, &b).unwrap() - 0.5).abs() < 1e-15);

        // Point on a grandchild edge: path passes through two vertices.
        let g = e.child(1);
        let c = MetricPoint::Tree(TreePoint::new(g, 0.5).unwrap());
        assert!((distance(&s, &a, &c).unwrap() - (0.75 + 0.5)).abs() < 1e-15);
    }

    #[test]
    fn mismatched_kinds_are_rejected() {
        let s = Space::Euclidean { dim: 2 };
        let a = MetricPoint::Euclidean(vec![0.0, 0.0]);
        let b = MetricPoint::hyperbolic(0.1, 0.0).unwrap();
        assert!(distance(&s, &a, &b).is_err());
    }

    #[test]
    fn ball_volumes_match_closed_forms() {
        // Hyperbolic s=2 evaluates the area formula.
        let v = ball_volume(&Space::Hyperbolic, 2.0).unwrap();
        let expect = 4.0 * std::f64::consts::PI * 1.0f64.sinh().powi(2);
        assert!((v - expect).abs() < 1e-12);
        assert!((v - 17.3554).abs() < 1e-3);

        // Tree d=3, s=1: the three unit edges at the root.
        assert!((ball_volume(&Space::RealTree { degree: 3 }, 1.0).unwrap() - 3.0).abs() < 1e-12);

        // Euclidean d=1, s=2: interval of length 4.
        assert!((ball_volume(&Space::Euclidean { dim: 1 }, 2.0).unwrap() - 4.0).abs() < 1e-12);

        assert!(ball_volume(&Space::Hyperbolic, -1.0).is_err());
    }

    #[test]
    fn tree_ball_volume_matches_vertex_counts_at_integers() {
        // Ball of radius i contains b_i = (d(d-1)^i - 2)/(d-2) vertices and
        // hence b_i - 1 unit edges.
        for d in [3usize, 4, 5, 10] {
            for i in 0..8u32 {
                let b_i = (d as f64 * (d as f64 - 1.0).powi(i as i32) - 2.0) / (d as f64 - 2.0);
                let vol = tree_ball_volume(d, i as f64);
                assert!(
                    (vol - (b_i - 1.0)).abs() < 1e-9,
                    "d={d} i={i}: vol {vol} vs b_i - 1 = {}",
                    b_i - 1.0
                );
            }
        }
    }

    #[test]
    fn unit_ball_volume_low_dims() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-12);
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rim_points_are_rejected() {
        assert!(MetricPoint::hyperbolic(1.0 - 1e-13, 0.0).is_err());
        assert!(MetricPoint::hyperbolic(0.9, 0.0).is_ok());
    }

    #[test]
    fn boundary_distances() {
        let s = Space::Euclidean { dim: 2 };
        let w = Window::cube(2, 10.0);
        let p = MetricPoint::Euclidean(vec![1.0, 4.0]);
        assert_eq!(w.boundary_distance(&s, &p).unwrap(), 1.0);

        let s = Space::RealTree { degree: 3 };
        let w = Window::Ball { radius: 4.0 };
        let p = MetricPoint::Tree(TreePoint::new(TreeAddr::ROOT.child(1).child(0), 0.25).unwrap());
        assert!((w.boundary_distance(&s, &p).unwrap() - (4.0 - 1.25)).abs() < 1e-15);
    }
}
