//! Covering selection and lattice `limsup` estimators.
//!
//! The subcover selector realizes the finite-collection covering constant 3:
//! greedily keep balls by decreasing radius when disjoint from everything
//! kept so far; every discarded ball then meets a kept ball of no smaller
//! radius, so the 3-fold blowups of the kept balls cover the collection.
//! Decisions and verification compare squared quantities in exact rational
//! arithmetic (a float prefilter handles the easy margins), so both reported
//! properties hold exactly, not up to tolerance.

use num::{BigRational, FromPrimitive};
use rand::Rng;
use serde::Serialize;

use crate::balloon::LatticeField;
use crate::error::{Error, Result};
use crate::rng;

/// A finite collection of Euclidean balls with bounded radii.
#[derive(Debug, Clone)]
pub struct BallCollection {
    pub dim: usize,
    pub centers: Vec<Vec<f64>>,
    pub radii: Vec<f64>,
}

impl BallCollection {
    pub fn len(&self) -> usize {
        self.radii.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// Uniform random centers in `[0, box_side]^dim` with radii in
    /// `(0, radius_max]`.
    pub fn random(dim: usize, n: usize, box_side: f64, radius_max: f64, seed: u64) -> Self {
        let mut r = rng::stream(seed, "vitali-balls", 0);
        let centers = (0..n)
            .map(|_| (0..dim).map(|_| r.random::<f64>() * box_side).collect())
            .collect();
        let radii = (0..n).map(|_| (1.0 - r.random::<f64>()) * radius_max).collect();
        BallCollection { dim, centers, radii }
    }
}

fn dist2_f64(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn dist2_exact(a: &[f64], b: &[f64]) -> BigRational {
    let mut s = BigRational::from_integer(0.into());
    for (x, y) in a.iter().zip(b) {
        let d = BigRational::from_f64(*x).unwrap() - BigRational::from_f64(*y).unwrap();
        s += &d * &d;
    }
    s
}

/// Is `dist(a, b) > bound`? Exact, with a float fast path.
fn dist_exceeds(a: &[f64], b: &[f64], bound: f64) -> bool {
    if bound < 0.0 {
        return true;
    }
    let d2 = dist2_f64(a, b);
    let b2 = bound * bound;
    let margin = 1e-9 * (d2.abs() + b2.abs() + 1e-300);
    if (d2 - b2).abs() > margin {
        return d2 > b2;
    }
    let exact = BigRational::from_f64(bound).unwrap();
    dist2_exact(a, b) > &exact * &exact
}

/// Greedy Vitali subcover: indices of a pairwise disjoint subfamily whose
/// 3-fold blowups cover every ball of the collection.
pub fn vitali_subcover(bc: &BallCollection) -> Vec<usize> {
    let mut order: Vec<usize> = (0..bc.len()).collect();
    order.sort_by(|&a, &b| bc.radii[b].total_cmp(&bc.radii[a]).then(a.cmp(&b)));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let disjoint = kept.iter().all(|&j| {
            dist_exceeds(&bc.centers[i], &bc.centers[j], bc.radii[i] + bc.radii[j])
        });
        if disjoint {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SubcoverCheck {
    pub disjoint: bool,
    pub covered: bool,
}

/// Verify the two subcover postconditions exactly: kept balls are pairwise
/// disjoint, and for every ball `i` some kept `j` satisfies
/// `dist(x_i, x_j) + r_i <= 3 r_j`.
pub fn verify_subcover(bc: &BallCollection, kept: &[usize]) -> SubcoverCheck {
    let disjoint = kept.iter().enumerate().all(|(a, &i)| {
        kept[a + 1..].iter().all(|&j| {
            dist_exceeds(&bc.centers[i], &bc.centers[j], bc.radii[i] + bc.radii[j])
        })
    });
    let covered = (0..bc.len()).all(|i| {
        kept.iter().any(|&j| {
            // dist + r_i <= 3 r_j  <=>  not (dist > 3 r_j - r_i)
            !dist_exceeds(&bc.centers[i], &bc.centers[j], 3.0 * bc.radii[j] - bc.radii[i])
        })
    });
    SubcoverCheck { disjoint, covered }
}

fn chebyshev(cell: &[i64], origin: &[i64]) -> i64 {
    cell.iter().zip(origin).map(|(c, o)| (c - o).abs()).max().unwrap_or(0)
}

/// Exact maximum of `X_n / |n|_inf` over `0 < |n|_inf <= l`, relative to the
/// field's origin cell. `certified_only` skips uncertified cells.
pub fn limsup_estimator(field: &LatticeField, l: i64, certified_only: bool) -> Result<f64> {
    if l < 1 {
        return Err(Error::InvalidArgument("window size l must be >= 1".into()));
    }
    let mut best = 0.0f64;
    for idx in 0..field.len() {
        if certified_only && !field.certified[idx] {
            continue;
        }
        let cell = field.cell_at(idx);
        let norm = chebyshev(&cell, &field.origin_cell);
        if norm >= 1 && norm <= l {
            best = best.max(field.values[idx] / norm as f64);
        }
    }
    Ok(best)
}

/// Annulus maxima of `X_n / |n|_inf` over `l_{k-1} < |n|_inf <= l_k`, one
/// value per requested `l`. This is the tail statistic whose trend over
/// growing `l` separates the two regimes of the dichotomy
/// `limsup X_n / |n| in {0, infinity}`: it sinks toward zero for bounded
/// fields and climbs without bound for heavy-tailed ones.
pub fn annulus_estimates(field: &LatticeField, ls: &[i64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(ls.len());
    let mut prev = 0i64;
    for &l in ls {
        if l <= prev {
            return Err(Error::InvalidArgument("window sizes must be strictly increasing".into()));
        }
        let mut best = 0.0f64;
        for idx in 0..field.len() {
            let cell = field.cell_at(idx);
            let norm = chebyshev(&cell, &field.origin_cell);
            if norm > prev && norm <= l {
                best = best.max(field.values[idx] / norm as f64);
            }
        }
        out.push(best);
        prev = l;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TailClass {
    Finite,
    Infinite,
}

/// Classify an iid Pareto(`tail_index`) field on `Z^dim`: the limsup of
/// `X_n / |n|` is infinite iff `E[X^dim]` diverges, i.e. iff
/// `tail_index <= dim`.
pub fn tail_criterion(tail_index: f64, dim: usize) -> Result<TailClass> {
    if !(tail_index > 0.0) {
        return Err(Error::InvalidArgument("tail index must be positive".into()));
    }
    Ok(if tail_index <= dim as f64 { TailClass::Infinite } else { TailClass::Finite })
}

/// Centered dense field over `[-l, l]^dim` with iid values from `gen`.
fn iid_field(dim: usize, l: i64, seed: u64, tag: &str, mut gen: impl FnMut(&mut rng::ChaCha12Rng) -> f64) -> LatticeField {
    let mut r = rng::stream(seed, tag, 0);
    let extent = (2 * l + 1) as usize;
    let total = extent.pow(dim as u32);
    let values = (0..total).map(|_| gen(&mut r)).collect();
    LatticeField {
        dim,
        min_cell: vec![-l; dim],
        extents: vec![extent; dim],
        origin_cell: vec![0; dim],
        values,
        certified: vec![true; total],
    }
}

/// iid Uniform(0, 1) field; a bounded-field exemplar.
pub fn uniform_field(dim: usize, l: i64, seed: u64) -> LatticeField {
    iid_field(dim, l, seed, "uniform-field", |r| r.random::<f64>())
}

/// iid Pareto field with `P(X > x) = x^(-beta)` for `x >= 1`.
pub fn pareto_field(dim: usize, l: i64, beta: f64, seed: u64) -> LatticeField {
    iid_field(dim, l, seed, "pareto-field", move |r| {
        (1.0 - r.random::<f64>()).powf(-1.0 / beta)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_ball_is_its_own_cover() {
        let bc = BallCollection { dim: 2, centers: vec![vec![0.0, 0.0]], radii: vec![2.0] };
        let kept = vitali_subcover(&bc);
        assert_eq!(kept, vec![0]);
        let chk = verify_subcover(&bc, &kept);
        assert!(chk.disjoint && chk.covered);
    }

    #[test]
    fn duplicate_balls_keep_one() {
        let bc = BallCollection {
            dim: 2,
            centers: vec![vec![1.0, 1.0], vec![1.0, 1.0]],
            radii: vec![1.5, 1.5],
        };
        let kept = vitali_subcover(&bc);
        assert_eq!(kept.len(), 1);
        let chk = verify_subcover(&bc, &kept);
        assert!(chk.disjoint && chk.covered);
    }

    #[test]
    fn random_collections_satisfy_both_postconditions() {
        for seed in 0..10u64 {
            let bc = BallCollection::random(2, 500, 100.0, 5.0, seed);
            let kept = vitali_subcover(&bc);
            let chk = verify_subcover(&bc, &kept);
            assert!(chk.disjoint, "seed {seed}");
            assert!(chk.covered, "seed {seed}");
        }
    }

    #[test]
    fn touching_balls_are_not_disjoint() {
        // centers distance 2, radii 1+1: closed balls touch, so the second
        // is discarded and covered by the blowup.
        let bc = BallCollection {
            dim: 1,
            centers: vec![vec![0.0], vec![2.0]],
            radii: vec![1.0, 1.0],
        };
        let kept = vitali_subcover(&bc);
        assert_eq!(kept, vec![0]);
        assert!(verify_subcover(&bc, &kept).covered);
    }

    #[test]
    fn constant_field_estimator() {
        let field = iid_field(2, 100, 0, "const", |_| 1.0);
        let est = limsup_estimator(&field, 100, false).unwrap();
        assert_eq!(est, 1.0); // attained at |n| = 1
        // annulus maxima decay like 1/l
        let ann = annulus_estimates(&field, &[25, 50, 100]).unwrap();
        assert!(ann[0] > ann[1] && ann[1] > ann[2]);
        assert!((ann[2] - 1.0 / 51.0).abs() < 1e-12);
    }

    #[test]
    fn quadratic_field_diverges() {
        let mut field = iid_field(2, 50, 0, "quad", |_| 0.0);
        for idx in 0..field.len() {
            let cell = field.cell_at(idx);
            let norm = chebyshev(&cell, &[0, 0]);
            field.values[idx] = (norm * norm) as f64;
        }
        let e25 = limsup_estimator(&field, 25, false).unwrap();
        let e50 = limsup_estimator(&field, 50, false).unwrap();
        assert_eq!(e25, 25.0);
        assert_eq!(e50, 50.0);
    }

    #[test]
    fn tail_classification() {
        assert_eq!(tail_criterion(3.0, 2).unwrap(), TailClass::Finite);
        assert_eq!(tail_criterion(2.0, 2).unwrap(), TailClass::Infinite);
        assert_eq!(tail_criterion(0.5, 1).unwrap(), TailClass::Infinite);
        assert!(tail_criterion(0.0, 1).is_err());
    }

    #[test]
    fn estimator_is_monotone_under_domination() {
        let a = uniform_field(2, 30, 7);
        let mut b = a.clone();
        for v in &mut b.values {
            *v += 0.5;
        }
        let ea = limsup_estimator(&a, 30, false).unwrap();
        let eb = limsup_estimator(&b, 30, false).unwrap();
        assert!(eb >= ea);
    }
}
