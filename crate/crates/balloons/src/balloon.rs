//! Balloon-process observables derived from a certified matching.
//!
//! The active centers at time `t` are the points whose pop time
//! `T_x = rho(x, m(x)) / 2` exceeds `t`, so the distance
//! `R_t = rho(origin, active centers)` is a nondecreasing step function
//! with breakpoints at pop times. Everything here is a pure transform of a
//! point set plus its matching.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matching::{pop_times, MatchingResult};
use crate::process::PointSet;
use crate::space::MetricPoint;

/// The step function `t -> R_t` plus certification horizons.
///
/// `R_s = breakpoints[i].1` for `s` in `[breakpoints[i].0, breakpoints[i+1].0)`,
/// and the last value holds from its breakpoint on. Values are only
/// trustworthy up to `certified_until`: beyond it, a balloon influenced by
/// the window boundary or by an uncertified removal could reach the origin's
/// neighborhood. The horizon keeps the ball `B(origin, R_t + 2t)` clear of
/// the boundary and of every taint location; `certified_until_strict`
/// doubles the growth allowance to `4t` as a sensitivity report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub breakpoints: Vec<(f64, f64)>,
    pub certified_until: f64,
    pub certified_until_strict: f64,
    pub origin: MetricPoint,
}

impl Trajectory {
    /// R at time `t` (ignoring certification).
    pub fn value_at(&self, t: f64) -> f64 {
        let mut r = f64::INFINITY;
        for &(bt, bv) in &self.breakpoints {
            if bt <= t {
                r = bv;
            } else {
                break;
            }
        }
        r
    }

    /// Largest value of `t / R_t` over certified times, with its witness
    /// time. The supremum over a piece `[a, b)` sits at the right end.
    pub fn sup_t_over_r(&self) -> (f64, f64) {
        let mut best = 0.0;
        let mut arg = 0.0;
        let h = self.certified_until;
        for (i, &(a, r)) in self.breakpoints.iter().enumerate() {
            if a > h {
                break;
            }
            let b = self.breakpoints.get(i + 1).map(|&(t, _)| t).unwrap_or(f64::INFINITY);
            let end = b.min(h);
            if r > 0.0 && r.is_finite() && end / r > best {
                best = end / r;
                arg = end;
            }
        }
        (best, arg)
    }
}

/// Trajectory of `R_t` seen from `origin`, with a conservative certification
/// horizon.
pub fn compute_trajectory(ps: &PointSet, mr: &MatchingResult, origin: &MetricPoint) -> Result<Trajectory> {
    if !mr.certified_computed {
        return Err(Error::InvalidArgument("matching must be certified before computing trajectories".into()));
    }
    if !ps.window.contains(&ps.space, origin) {
        return Err(Error::InvalidArgument("origin lies outside the window".into()));
    }
    let n = ps.len();
    let pop = pop_times(mr, n);

    let mut by_dist: Vec<(f64, u32)> = (0..n as u32)
        .map(|i| (ps.dist_to(origin, i).expect("same space"), i))
        .collect();
    by_dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut breakpoints = Vec::new();
    let mut t = 0.0;
    let mut i = 0usize;
    loop {
        while i < n && pop[by_dist[i].1 as usize] <= t {
            i += 1;
        }
        if i == n {
            breakpoints.push((t, f64::INFINITY));
            break;
        }
        let (d, id) = by_dist[i];
        breakpoints.push((t, d));
        let popped_at = pop[id as usize];
        if popped_at.is_infinite() {
            break;
        }
        t = popped_at;
    }

    // Horizon: keep B(origin, R_t + 2t) inside the window and clear of taint.
    let mut clearance = ps.window.boundary_distance(&ps.space, origin)?;
    for taint in &mr.taint_log {
        clearance = clearance.min(ps.dist_to(origin, taint.location)?);
    }
    let horizon = |rate: f64| -> f64 {
        // sup { t : R_t + rate * t < clearance }; R_t + rate * t increases,
        // so walk the pieces until the condition first fails.
        let mut h = 0.0;
        for (i, &(a, r)) in breakpoints.iter().enumerate() {
            if r + rate * a >= clearance {
                return a;
            }
            let piece_end = breakpoints.get(i + 1).map(|&(t, _)| t).unwrap_or(f64::INFINITY);
            let cap = (clearance - r) / rate;
            if cap < piece_end {
                return cap;
            }
            h = piece_end;
        }
        h
    };
    Ok(Trajectory {
        certified_until: horizon(2.0).max(0.0),
        certified_until_strict: horizon(4.0).max(0.0),
        breakpoints,
        origin: origin.clone(),
    })
}

/// Cover-time report: when the origin is inside a balloon, and how small the
/// ratio `R_t / t` gets over the certified range.
#[derive(Debug, Clone, Serialize)]
pub struct CoverReport {
    /// Maximal intervals of `[0, certified_until]` with `R_t <= t`.
    pub covered: Vec<(f64, f64)>,
    /// Minimum of `R_t / t` over `[t0, certified_until]` (infimum over each
    /// constant piece sits at its right end).
    pub min_ratio: f64,
    pub argmin_t: f64,
    /// True when the certified horizon does not reach `t0`.
    pub empty: bool,
}

pub fn cover_report(traj: &Trajectory, t0: f64) -> CoverReport {
    let h = traj.certified_until;
    if h < t0 || traj.breakpoints.is_empty() {
        return CoverReport { covered: Vec::new(), min_ratio: f64::NAN, argmin_t: f64::NAN, empty: true };
    }
    let mut covered: Vec<(f64, f64)> = Vec::new();
    let mut min_ratio = f64::INFINITY;
    let mut argmin = f64::NAN;
    for (i, &(a, r)) in traj.breakpoints.iter().enumerate() {
        if a > h {
            break;
        }
        let b = traj.breakpoints.get(i + 1).map(|&(t, _)| t).unwrap_or(f64::INFINITY);
        let end = b.min(h);
        // covered sub-interval of this piece: [max(a, r), end), closed at
        // the horizon itself
        let lo = a.max(r);
        if lo < end || (lo == end && end == h) {
            match covered.last_mut() {
                Some(last) if last.1 >= lo => last.1 = end,
                _ => covered.push((lo, end)),
            }
        }
        // ratio infimum of this piece over [t0, h]
        let seg_end = end.min(h);
        if seg_end >= t0 && seg_end > 0.0 && r.is_finite() {
            let ratio = r / seg_end;
            if ratio < min_ratio {
                min_ratio = ratio;
                argmin = seg_end;
            }
        }
    }
    CoverReport { covered, min_ratio, argmin_t: argmin, empty: false }
}

/// Lattice of unit cells with the largest pop time seen in each cell.
///
/// Cell `n` holds `max { T_x : x in n + [0,1)^d }`, zero when the cell is
/// empty. A cell is certified when it lies inside the window and every point
/// in it belongs to a certified pair.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeField {
    pub dim: usize,
    pub min_cell: Vec<i64>,
    pub extents: Vec<usize>,
    pub origin_cell: Vec<i64>,
    pub values: Vec<f64>,
    pub certified: Vec<bool>,
}

impl LatticeField {
    pub fn index_of(&self, cell: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for a in 0..self.dim {
            let off = cell[a] - self.min_cell[a];
            if off < 0 || off as usize >= self.extents[a] {
                return None;
            }
            idx = idx * self.extents[a] + off as usize;
        }
        Some(idx)
    }

    pub fn cell_at(&self, mut idx: usize) -> Vec<i64> {
        let mut cell = vec![0i64; self.dim];
        for a in (0..self.dim).rev() {
            cell[a] = self.min_cell[a] + (idx % self.extents[a]) as i64;
            idx /= self.extents[a];
        }
        cell
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Pop-time field `X_n` on the unit cells of a Euclidean window.
pub fn lattice_field(ps: &PointSet, mr: &MatchingResult, origin: &MetricPoint) -> Result<LatticeField> {
    let (corner, sides, dim) = match (&ps.space, &ps.window) {
        (crate::space::Space::Euclidean { dim }, crate::space::Window::Box { corner, sides }) => {
            (corner.clone(), sides.clone(), *dim)
        }
        _ => return Err(Error::Unsupported("lattice fields require a euclidean box window".into())),
    };
    let MetricPoint::Euclidean(origin_coords) = origin else {
        return Err(Error::SpaceMismatch("origin must be euclidean".into()));
    };
    let min_cell: Vec<i64> = corner.iter().map(|&c| c.floor() as i64).collect();
    let extents: Vec<usize> = corner
        .iter()
        .zip(&sides)
        .zip(&min_cell)
        .map(|((&c, &s), &m)| (((c + s).ceil() as i64 - m).max(1)) as usize)
        .collect();
    let total: usize = extents.iter().product();
    let mut values = vec![0.0f64; total];

    // A cell starts certified iff it sits fully inside the window; points
    // then demand that their own pair is certified.
    let mut certified = vec![false; total];
    for idx in 0..total {
        let mut tmp = idx;
        let mut inside = true;
        for a in (0..dim).rev() {
            let cell = min_cell[a] + (tmp % extents[a]) as i64;
            tmp /= extents[a];
            if (cell as f64) < corner[a] || (cell + 1) as f64 > corner[a] + sides[a] {
                inside = false;
            }
        }
        certified[idx] = inside;
    }

    let pop = pop_times(mr, ps.len());
    let mut pair_certified = vec![false; ps.len()];
    for p in &mr.pairs {
        pair_certified[p.u as usize] = p.certified;
        pair_certified[p.v as usize] = p.certified;
    }
    let field = {
        let mut field = LatticeField {
            dim,
            min_cell,
            extents,
            origin_cell: origin_coords.iter().map(|&x| x.floor() as i64).collect(),
            values: Vec::new(),
            certified: Vec::new(),
        };
        for i in 0..ps.len() as u32 {
            let MetricPoint::Euclidean(x) = ps.point(i) else { unreachable!() };
            let cell: Vec<i64> = x.iter().map(|&c| c.floor() as i64).collect();
            let Some(idx) = field.index_of(&cell) else { continue };
            if pop[i as usize] > values[idx] {
                values[idx] = pop[i as usize];
            }
            if !pair_certified[i as usize] {
                certified[idx] = false;
            }
        }
        field.values = values;
        field.certified = certified;
        field
    };
    Ok(field)
}
