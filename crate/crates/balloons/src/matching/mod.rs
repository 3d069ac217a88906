//! The unique stable partial matching of a finite point set.
//!
//! For a discrete, non-equidistant set with no descending chains the stable
//! partial matching exists, is unique, leaves at most one point unmatched,
//! and is produced by iterating "match all mutually closest pairs, remove
//! them, repeat". The production matcher here is event-driven: it maintains
//! each live point's nearest live neighbor in a priority queue and always
//! extracts the globally closest mutually-nearest pair, which realizes the
//! same matching pair by pair in nondecreasing distance order.
//!
//! Exact ties (below [`MatchConfig::tie_tol`]) are broken toward smaller
//! point ids, in both the accelerated matcher and the quadratic oracle, so
//! the two agree even on degenerate inputs like lattices.
//!
//! [`certify`] adds finite-window soundness: pairs whose removal provably
//! coincides with the infinite-volume stable matching are flagged, and the
//! endpoints of unprovable removals become "taint" that later pairs must
//! keep clear of.

pub(crate) mod index;

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use index::{dispatch_space, CellIndex, CellSpace, Ord64, TaintIndex};

use crate::error::{Error, Result};
use crate::process::PointSet;

/// One matched pair. `round` is the iteration of the mutually-closest-pair
/// algorithm in which the pair is removed (1-based; 0 when round tracking
/// was disabled).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub u: u32,
    pub v: u32,
    pub round: u32,
    pub dist: f64,
    pub certified: bool,
}

/// A location whose removal could not be certified, together with the scale
/// at which the uncertainty enters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Taint {
    pub location: u32,
    pub scale: f64,
}

/// Result of a matching run. Pairs are listed in removal order, which has
/// nondecreasing distances.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MatchingResult {
    pub pairs: Vec<MatchedPair>,
    pub unmatched: Option<u32>,
    pub taint_log: Vec<Taint>,
    pub rounds_computed: bool,
    pub certified_computed: bool,
}

impl MatchingResult {
    /// Partner of each point id, `None` for the unmatched point.
    pub fn partners(&self, n: usize) -> Vec<Option<u32>> {
        let mut m = vec![None; n];
        for p in &self.pairs {
            m[p.u as usize] = Some(p.v);
            m[p.v as usize] = Some(p.u);
        }
        m
    }

    /// Match distance per point id, infinity for the unmatched point.
    pub fn match_dists(&self, n: usize) -> Vec<f64> {
        let mut d = vec![f64::INFINITY; n];
        for p in &self.pairs {
            d[p.u as usize] = p.dist;
            d[p.v as usize] = p.dist;
        }
        d
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matching serializes")
    }

    pub fn from_json(s: &str) -> Result<MatchingResult> {
        serde_json::from_str(s).map_err(|e| Error::Serde(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IndexChoice {
    /// Pick a spatial index suited to the space.
    #[default]
    Auto,
    /// Single-cell index: every query scans all live points.
    Naive,
}

#[derive(Debug, Clone)]
pub struct MatchConfig {
    pub index: IndexChoice,
    /// Compute the round (iteration) number of every pair. Costs one range
    /// query per pair; disable for very large trajectory-only runs.
    pub compute_rounds: bool,
    /// Distances closer than this are ties, broken by id.
    pub tie_tol: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig { index: IndexChoice::Auto, compute_rounds: true, tie_tol: 1e-12 }
    }
}

/// Stable partial matching with the default configuration.
pub fn greedy_stable_matching(ps: &PointSet) -> Result<MatchingResult> {
    greedy_stable_matching_with(ps, &MatchConfig::default())
}

/// Stable partial matching, event-driven over a spatial index.
pub fn greedy_stable_matching_with(ps: &PointSet, cfg: &MatchConfig) -> Result<MatchingResult> {
    let naive = cfg.index == IndexChoice::Naive;
    dispatch_space!(ps, naive, |s| run_match(s, cfg))
}

fn run_match<S: CellSpace>(space: S, cfg: &MatchConfig) -> Result<MatchingResult> {
    let n = space.n_points();
    if n == 0 {
        return Ok(MatchingResult::default());
    }
    if n == 1 {
        return Ok(MatchingResult { unmatched: Some(0), ..Default::default() });
    }
    let tol = cfg.tie_tol;
    let mut ix = CellIndex::new(space);

    // Current nearest-neighbor candidate per live point. A heap entry
    // (d, seq, u, v) is current iff nn[u] == (v, d); everything else is
    // stale and gets skipped or recomputed when popped.
    let mut nn: Vec<(u32, f64)> = vec![(u32::MAX, f64::INFINITY); n];
    let mut heap: BinaryHeap<Reverse<(Ord64, u64, u32, u32)>> = BinaryHeap::with_capacity(2 * n);
    let mut seq: u64 = 0;
    for u in 0..n as u32 {
        let (v, d) = ix.nearest_live(u, tol).expect("n >= 2 so a neighbor exists");
        if d == 0.0 {
            return Err(Error::DuplicatePoints(u.min(v), u.max(v)));
        }
        nn[u as usize] = (v, d);
        heap.push(Reverse((Ord64(d), seq, u, v)));
        seq += 1;
    }

    let mut pairs: Vec<MatchedPair> = Vec::with_capacity(n / 2);
    let mut round_of: Vec<u32> = if cfg.compute_rounds { vec![0; n] } else { Vec::new() };
    let mut range_buf: Vec<u32> = Vec::new();

    let iter_guard = 64 * n as u64 + 4096;
    let mut iters: u64 = 0;
    while let Some(Reverse((Ord64(d), _, u, v))) = heap.pop() {
        iters += 1;
        if iters > iter_guard {
            return Err(Error::Numerical(
                "matcher failed to converge; input may contain degenerate ties".into(),
            ));
        }
        if !ix.is_alive(u) {
            continue;
        }
        if nn[u as usize] != (v, d) {
            continue; // stale; u's current entry is elsewhere in the heap
        }
        if !ix.is_alive(v) {
            if let Some((v2, d2)) = ix.nearest_live(u, tol) {
                nn[u as usize] = (v2, d2);
                heap.push(Reverse((Ord64(d2), seq, u, v2)));
                seq += 1;
            }
            continue;
        }
        // u's candidate is current and live; fetch v's. Deaths only ever
        // push nearest-neighbor distances up, so a stored live candidate is
        // still the minimum; recompute only if v's stored partner died.
        let (vn, _vd) = {
            let (pv, pd) = nn[v as usize];
            if pv != u32::MAX && ix.is_alive(pv) {
                (pv, pd)
            } else {
                let r = ix.nearest_live(v, tol).expect("u is alive");
                nn[v as usize] = r;
                heap.push(Reverse((Ord64(r.1), seq, v, r.0)));
                seq += 1;
                r
            }
        };
        if vn != u {
            // v prefers a tie with a smaller id; requeue u behind it.
            heap.push(Reverse((Ord64(d), seq, u, v)));
            seq += 1;
            continue;
        }
        // Mutually closest: remove the pair.
        ix.remove(u);
        ix.remove(v);
        let round = if cfg.compute_rounds {
            let r = compute_round(&mut ix, u, v, d, tol, &round_of, &mut range_buf);
            round_of[u as usize] = r;
            round_of[v as usize] = r;
            r
        } else {
            0
        };
        pairs.push(MatchedPair { u, v, round, dist: d, certified: false });
    }

    let unmatched = (0..n as u32).find(|&p| ix.is_alive(p));
    debug_assert_eq!(pairs.len() * 2 + unmatched.iter().count(), n);
    Ok(MatchingResult {
        pairs,
        unmatched,
        taint_log: Vec::new(),
        rounds_computed: cfg.compute_rounds,
        certified_computed: false,
    })
}

/// Round of a freshly matched pair: one more than the latest round among the
/// points that blocked it. A point blocks when the tie-aware neighbor rule
/// would have preferred it over the partner; all blockers are already
/// matched by the time the pair is extracted.
fn compute_round<S: CellSpace>(
    ix: &mut CellIndex<S>,
    u: u32,
    v: u32,
    d: f64,
    tol: f64,
    round_of: &[u32],
    buf: &mut Vec<u32>,
) -> u32 {
    let mut round = 1;
    for (a, b) in [(u, v), (v, u)] {
        ix.range_all(a, d + tol, buf);
        for i in 0..buf.len() {
            let w = buf[i];
            if w == u || w == v || ix.is_alive(w) {
                continue;
            }
            let dw = ix.space.dist(a, w);
            let blocks = dw < d - tol || ((dw - d).abs() <= tol && w < b);
            if blocks {
                debug_assert!(round_of[w as usize] >= 1, "blocker must already be matched");
                round = round.max(round_of[w as usize] + 1);
            }
        }
    }
    round
}

/// Literal quadratic implementation of the iterated mutually-closest-pair
/// algorithm; the oracle the accelerated matcher is tested against.
pub fn brute_force_matching(ps: &PointSet) -> Result<MatchingResult> {
    const GUARD: usize = 5000;
    let n = ps.len();
    if n > GUARD {
        return Err(Error::SizeGuard(n, GUARD));
    }
    let tol = 1e-12;
    let mut alive: Vec<bool> = vec![true; n];
    let mut remaining = n;
    let mut pairs = Vec::new();
    let mut round = 1u32;
    while remaining >= 2 {
        let ids: Vec<u32> = (0..n as u32).filter(|&p| alive[p as usize]).collect();
        let mut nn = vec![u32::MAX; n];
        for &a in &ids {
            let mut best = f64::INFINITY;
            for &b in &ids {
                if b != a {
                    best = best.min(ps.dist(a, b));
                }
            }
            if best == 0.0 {
                let b = ids.iter().find(|&&b| b != a && ps.dist(a, b) == 0.0).unwrap();
                return Err(Error::DuplicatePoints(a.min(*b), a.max(*b)));
            }
            let winner = ids
                .iter()
                .copied()
                .find(|&b| b != a && ps.dist(a, b) <= best + tol)
                .expect("at least two alive");
            nn[a as usize] = winner;
        }
        let mut matched = Vec::new();
        for &a in &ids {
            let b = nn[a as usize];
            if b > a && nn[b as usize] == a {
                matched.push((a, b));
            }
        }
        debug_assert!(!matched.is_empty(), "a mutually closest pair always exists");
        for (a, b) in matched {
            alive[a as usize] = false;
            alive[b as usize] = false;
            remaining -= 2;
            pairs.push(MatchedPair { u: a, v: b, round, dist: ps.dist(a, b), certified: false });
        }
        round += 1;
    }
    pairs.sort_by(|a, b| a.dist.total_cmp(&b.dist).then(a.u.cmp(&b.u)));
    let unmatched = (0..n as u32).find(|&p| alive[p as usize]);
    Ok(MatchingResult {
        pairs,
        unmatched,
        taint_log: Vec::new(),
        rounds_computed: true,
        certified_computed: false,
    })
}

/// Count unordered pairs violating stability: `rho(u, v)` strictly below
/// both match distances (unmatched points have match distance infinity).
/// Zero for any output of the matchers.
pub fn verify_stability(ps: &PointSet, mr: &MatchingResult) -> usize {
    let n = ps.len();
    let md = mr.match_dists(n);
    dispatch_space!(ps, false, |s| {
        let mut ix = CellIndex::new(s);
        let mut buf = Vec::new();
        let mut violations = 0usize;
        for u in 0..n as u32 {
            let du = md[u as usize];
            if !du.is_finite() {
                continue; // found from the matched side
            }
            ix.range_all(u, du, &mut buf);
            for i in 0..buf.len() {
                let w = buf[i];
                let d = ix.space.dist(u, w);
                if d < du && d < md[w as usize] && (u < w || !md[w as usize].is_finite()) {
                    violations += 1;
                }
            }
        }
        violations
    })
}

/// Pop time of each point: half its match distance, infinity when unmatched.
pub fn pop_times(mr: &MatchingResult, n: usize) -> Vec<f64> {
    mr.match_dists(n).into_iter().map(|d| d / 2.0).collect()
}

/// Certify which removals provably agree with the infinite-volume stable
/// matching restricted to the window.
///
/// Removals are replayed in increasing pair-distance order against a taint
/// set seeded with the window boundary. A pair at scale `delta` is certified
/// iff both endpoints are farther than `delta` from the boundary and from
/// every taint location; an uncertified removal adds both endpoints at scale
/// `delta` to the taint set. No unseen exterior point or mis-ordered removal
/// can have interfered with a certified pair at any earlier scale.
pub fn certify(ps: &PointSet, mr: &MatchingResult) -> Result<MatchingResult> {
    let mut out = mr.clone();
    out.taint_log.clear();
    let mut order: Vec<usize> = (0..out.pairs.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&out.pairs[a], &out.pairs[b]);
        pa.dist.total_cmp(&pb.dist).then(pa.u.cmp(&pb.u))
    });
    let bd: Vec<f64> = (0..ps.len() as u32)
        .map(|i| ps.window.boundary_distance(&ps.space, &ps.point(i)))
        .collect::<Result<_>>()?;
    dispatch_space!(ps, false, |s| {
        let mut ix = CellIndex::new(s);
        let mut taint = TaintIndex::new();
        for idx in order {
            let (u, v, delta) = {
                let p = &out.pairs[idx];
                (p.u, p.v, p.dist)
            };
            let ok = bd[u as usize] > delta
                && bd[v as usize] > delta
                && !ix.any_taint_within(&taint, u, delta)
                && !ix.any_taint_within(&taint, v, delta);
            out.pairs[idx].certified = ok;
            if !ok {
                ix.insert_taint(&mut taint, u);
                ix.insert_taint(&mut taint, v);
                out.taint_log.push(Taint { location: u, scale: delta });
                out.taint_log.push(Taint { location: v, scale: delta });
            }
        }
    });
    out.certified_computed = true;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::process::{sample_poisson, PointSet};
    use crate::space::{MetricPoint, Space, Window};

    fn line_points(xs: &[f64]) -> PointSet {
        let pts = xs.iter().map(|&x| MetricPoint::Euclidean(vec![x])).collect();
        let hi = xs.iter().cloned().fold(f64::MIN, f64::max) + 1.0;
        PointSet::from_points(
            Space::Euclidean { dim: 1 },
            Window::Box { corner: vec![-1.0], sides: vec![hi + 2.0] },
            0,
            pts,
        )
        .unwrap()
    }

    #[test]
    fn three_points_single_pair() {
        let ps = line_points(&[0.0, 1.0, 3.0]);
        let mr = greedy_stable_matching(&ps).unwrap();
        assert_eq!(mr.pairs.len(), 1);
        let p = mr.pairs[0];
        assert_eq!((p.u, p.v, p.round), (0, 1, 1));
        assert_eq!(p.dist, 1.0);
        assert_eq!(mr.unmatched, Some(2));
    }

    #[test]
    fn four_points_two_rounds() {
        let ps = line_points(&[0.0, 1.0, 3.0, 7.0]);
        let mr = greedy_stable_matching(&ps).unwrap();
        assert_eq!(mr.pairs.len(), 2);
        assert_eq!((mr.pairs[0].u, mr.pairs[0].v, mr.pairs[0].round), (0, 1, 1));
        assert_eq!((mr.pairs[1].u, mr.pairs[1].v, mr.pairs[1].round), (2, 3, 2));
        assert_eq!(mr.pairs[1].dist, 4.0);
        assert_eq!(mr.unmatched, None);
        assert_eq!(verify_stability(&ps, &mr), 0);
    }

    #[test]
    fn duplicates_are_rejected() {
        let ps = line_points(&[1.0, 2.0, 1.0]);
        assert!(matches!(greedy_stable_matching(&ps), Err(Error::DuplicatePoints(0, 2))));
        assert!(matches!(brute_force_matching(&ps), Err(Error::DuplicatePoints(..))));
    }

    #[test]
    fn empty_and_singleton() {
        let ps = line_points(&[]);
        let mr = brute_force_matching(&ps).unwrap();
        assert!(mr.pairs.is_empty() && mr.unmatched.is_none());
        let ps = line_points(&[5.0]);
        let mr = greedy_stable_matching(&ps).unwrap();
        assert!(mr.pairs.is_empty());
        assert_eq!(mr.unmatched, Some(0));
    }

    #[test]
    fn unit_square_ties_break_by_id() {
        let pts = vec![
            MetricPoint::Euclidean(vec![0.0, 0.0]),
            MetricPoint::Euclidean(vec![1.0, 0.0]),
            MetricPoint::Euclidean(vec![0.0, 1.0]),
            MetricPoint::Euclidean(vec![1.0, 1.0]),
        ];
        let ps =
            PointSet::from_points(Space::Euclidean { dim: 2 }, Window::cube(2, 2.0), 0, pts).unwrap();
        let fast = greedy_stable_matching(&ps).unwrap();
        let slow = brute_force_matching(&ps).unwrap();
        let norm = |mr: &MatchingResult| {
            let mut v: Vec<(u32, u32, u32)> =
                mr.pairs.iter().map(|p| (p.u.min(p.v), p.u.max(p.v), p.round)).collect();
            v.sort_unstable();
            v
        };
        assert_eq!(norm(&fast), norm(&slow));
        assert_eq!(norm(&fast), vec![(0, 1, 1), (2, 3, 2)]);
    }

    #[test]
    fn adversarial_matching_violates_stability() {
        let ps = line_points(&[0.0, 1.0, 3.0, 7.0]);
        let bad = MatchingResult {
            pairs: vec![
                MatchedPair { u: 1, v: 2, round: 1, dist: 2.0, certified: false },
                MatchedPair { u: 0, v: 3, round: 1, dist: 7.0, certified: false },
            ],
            ..Default::default()
        };
        assert!(verify_stability(&ps, &bad) >= 1);
    }

    #[test]
    fn single_pair_is_stable() {
        let ps = line_points(&[0.0, 2.0]);
        let mr = greedy_stable_matching(&ps).unwrap();
        assert_eq!(verify_stability(&ps, &mr), 0);
    }

    #[test]
    fn parity_and_monotone_distances_on_poisson() {
        for seed in 0..5u64 {
            let ps =
                sample_poisson(&Space::Euclidean { dim: 2 }, &Window::cube(2, 20.0), 1.0, seed).unwrap();
            let mr = greedy_stable_matching(&ps).unwrap();
            assert_eq!(mr.unmatched.iter().count(), ps.len() % 2);
            for w in mr.pairs.windows(2) {
                assert!(w[0].dist <= w[1].dist, "removal distances must be nondecreasing");
            }
            assert_eq!(verify_stability(&ps, &mr), 0);
        }
    }

    #[test]
    fn oracle_equality_small_random_all_spaces() {
        let spaces = [
            (Space::Euclidean { dim: 2 }, Window::cube(2, 14.0)),
            (Space::Hyperbolic, Window::Disk { radius: 4.5 }),
            (Space::RealTree { degree: 3 }, Window::Ball { radius: 5.0 }),
        ];
        for (space, window) in spaces {
            for seed in 0..8u64 {
                let ps = sample_poisson(&space, &window, 1.0, seed ^ 0xbeef).unwrap();
                if ps.len() < 2 {
                    continue;
                }
                let fast = greedy_stable_matching(&ps).unwrap();
                let slow = brute_force_matching(&ps).unwrap();
                let norm = |mr: &MatchingResult| {
                    let mut v: Vec<(u32, u32, u32)> =
                        mr.pairs.iter().map(|p| (p.u.min(p.v), p.u.max(p.v), p.round)).collect();
                    v.sort_unstable();
                    v
                };
                assert_eq!(norm(&fast), norm(&slow), "space {space:?} seed {seed}");
                assert_eq!(fast.unmatched, slow.unmatched);
            }
        }
    }

    #[test]
    fn pop_times_halve_distances() {
        let ps = line_points(&[0.0, 4.0, 9.0]);
        let mr = greedy_stable_matching(&ps).unwrap();
        let t = pop_times(&mr, ps.len());
        assert_eq!(t[0], 2.0);
        assert_eq!(t[1], 2.0);
        assert_eq!(t[2], f64::INFINITY);
    }

    #[test]
    fn certification_interior_pair_certified_boundary_pair_not() {
        // A pair deep in the interior with margin 10x its distance, plus a
        // pair hugging the boundary.
        let pts = vec![
            MetricPoint::Euclidean(vec![50.0, 50.0]),
            MetricPoint::Euclidean(vec![50.5, 50.0]),
            MetricPoint::Euclidean(vec![0.2, 50.0]),
            MetricPoint::Euclidean(vec![1.4, 50.0]),
        ];
        let ps =
            PointSet::from_points(Space::Euclidean { dim: 2 }, Window::cube(2, 100.0), 0, pts).unwrap();
        let mr = certify(&ps, &greedy_stable_matching(&ps).unwrap()).unwrap();
        for p in &mr.pairs {
            let interior = p.u == 0 || p.v == 0;
            assert_eq!(p.certified, interior, "pair {:?}", p);
        }
        assert!(!mr.taint_log.is_empty());
    }

    #[test]
    fn taint_cascades_to_interior_neighbors() {
        // c -- b near the boundary (uncertified), and a pair near b whose
        // scale reaches the tainted location.
        let pts = vec![
            MetricPoint::Euclidean(vec![0.3, 5.0]), // b: boundary pair
            MetricPoint::Euclidean(vec![1.0, 5.0]), // c
            MetricPoint::Euclidean(vec![2.0, 5.0]), // u: matched at scale 1.5
            MetricPoint::Euclidean(vec![3.5, 5.0]), // v
        ];
        let ps =
            PointSet::from_points(Space::Euclidean { dim: 2 }, Window::cube(2, 10.0), 0, pts).unwrap();
        let mr = certify(&ps, &greedy_stable_matching(&ps).unwrap()).unwrap();
        // (0,1) at dist 0.7 with boundary margin 0.3 -> uncertified, taints.
        // (2,3) at dist 1.5: taint location 1 is at distance 1.0 <= 1.5.
        assert!(mr.pairs.iter().all(|p| !p.certified));
    }
}
