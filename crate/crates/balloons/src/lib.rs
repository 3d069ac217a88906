//! Simulation of the Poisson balloon process.
//!
//! Start growing a ball ("balloon") at unit rate around every point of a
//! Poisson process; when two balloons touch, both pop and disappear. The
//! surviving balloons at time `t` are exactly the points whose partner in
//! the unique *stable matching* of the point set lies at distance greater
//! than `2t`, which is what makes the process simulable: this crate samples
//! point processes, computes the stable matching by iterating mutually
//! closest pairs, certifies which matched pairs are unaffected by the finite
//! window, and derives the balloon observables (the trajectory
//! `R_t = dist(origin, active centers)`, cover times, lattice pop-time
//! fields) on three spaces: Euclidean `R^d`, the hyperbolic plane, and
//! regular real trees.
//!
//! Two verification toolkits accompany the simulator. [`separated`] builds
//! the edge-colored configuration model (the union of `d` independent
//! perfect matchings) and bounds the density of well-separated vertex sets,
//! both by solvers and by exact falling-factorial event probabilities.
//! [`tessellation`] embeds the 3-regular tree in the Poincaré disk as the
//! dual of an ideal-triangle tessellation and checks the distance-distortion
//! constants that drive the hyperbolic transience bound. [`limits`] holds
//! the Vitali subcover selector and the lattice `limsup X_n / |n|`
//! estimators.
//!
//! See the `book/` directory of this repository for a guided tour; its code
//! snippets compile and run as the doc-tests of the [`guide`] module.

pub mod balloon;
pub mod error;
pub mod guide;
pub mod limits;
pub mod matching;
pub mod process;
pub mod render;
pub mod rng;
pub mod separated;
pub mod space;
pub mod tessellation;

pub use balloon::{compute_trajectory, cover_report, lattice_field, CoverReport, LatticeField, Trajectory};
pub use error::{Error, Result};
pub use matching::{
    brute_force_matching, certify, greedy_stable_matching, greedy_stable_matching_with, pop_times,
    verify_stability, IndexChoice, MatchConfig, MatchedPair, MatchingResult,
};
pub use process::{diagnostics, sample_perturbed_lattice, sample_poisson, DiagnosticsConfig, PointSet};
pub use render::{render_svg, RenderStyle};
pub use space::{
    ball_volume, distance, sample_uniform, MetricPoint, Space, TreeAddr, TreePoint, Window,
};
