//! Binary Wasserstein error functionals.
//!
//! The state-dependent distance between two binary observables is
//! `2 sum_mu |p^X_mu - p^Y_mu| = 2 |(x - y) . r|`; maximising over pure states
//! gives the state-independent deviation `2 |x - y|`.
//!
//! The functional is conventionally called a Wasserstein distance "of order
//! 2" although the formula is an L1 probability distance scaled by 2; the
//! formula is what is implemented.

use crate::qubit::{prob, Observable, QubitState, Sign};
use crate::{Error, Result, Vec3};

/// `2 sum_mu |p^X_mu - p^Y_mu|` on the state `rho`.
pub fn wasserstein_state(rho: &QubitState, x: &Observable, y: &Observable) -> f64 {
    let d: f64 = Sign::BOTH
        .iter()
        .map(|&s| (prob(&x.effect(s), rho) - prob(&y.effect(s), rho)).abs())
        .sum();
    2.0 * d
}

/// Closed form `2 |(x - y) . r|` of [`wasserstein_state`].
pub fn wasserstein_state_closed(rho: &QubitState, x: &Observable, y: &Observable) -> f64 {
    2.0 * (x.bloch() - y.bloch()).dot(rho.bloch()).abs()
}

/// Maximum of the state-dependent distance over states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WorstCase {
    /// `2 |x - y|`.
    pub value: f64,
    /// Maximiser `(x - y) / |x - y|`; `None` when `x = y` and every state
    /// attains the (zero) maximum.
    pub state: Option<QubitState>,
}

impl WorstCase {
    pub fn is_degenerate(&self) -> bool {
        self.state.is_none()
    }
}

pub fn worst_case_delta(x: &Observable, y: &Observable) -> WorstCase {
    let diff = x.bloch() - y.bloch();
    let state = diff.normalized().map(|u| QubitState::new(u).expect("unit vector"));
    WorstCase { value: 2.0 * diff.norm(), state }
}

/// Per-term breakdown of the total deviation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UncertaintyBreakdown {
    pub d_ad: f64,
    pub d_be: f64,
    pub d_cf: f64,
    pub total: f64,
}

impl UncertaintyBreakdown {
    pub fn terms(&self) -> [f64; 3] {
        [self.d_ad, self.d_be, self.d_cf]
    }
}

/// `2 (|a - d| + |b - e| + |c - f|)` for sharp targets `a, b, c`.
pub fn delta_total(targets: [&Observable; 3], approx: [&Observable; 3]) -> Result<UncertaintyBreakdown> {
    for t in targets {
        if !t.is_sharp() {
            return Err(Error::NotSharp { what: "target observable", norm: t.bloch().norm() });
        }
    }
    Ok(breakdown(
        [targets[0].bloch(), targets[1].bloch(), targets[2].bloch()],
        [approx[0].bloch(), approx[1].bloch(), approx[2].bloch()],
    ))
}

/// Unchecked breakdown on raw Bloch vectors.
pub fn breakdown(targets: [Vec3; 3], approx: [Vec3; 3]) -> UncertaintyBreakdown {
    let d_ad = 2.0 * targets[0].distance(approx[0]);
    let d_be = 2.0 * targets[1].distance(approx[1]);
    let d_cf = 2.0 * targets[2].distance(approx[2]);
    UncertaintyBreakdown { d_ad, d_be, d_cf, total: d_ad + d_be + d_cf }
}

/// Distance from measured `+` frequencies: `4 |p^X_+ - p^Y_+|`.
///
/// Only the `+` outcomes are needed because
/// `|p^X_+ - p^Y_+| = |p^X_- - p^Y_-|`.
pub fn wasserstein_empirical(px_plus: f64, py_plus: f64) -> f64 {
    4.0 * (px_plus - py_plus).abs()
}
