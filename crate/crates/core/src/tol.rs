//! Numerical tolerances shared by every module.

/// One record holding every tolerance used by the predicates in this crate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// `||v| - 1|` below which a Bloch vector counts as sharp / pure.
    pub sharp: f64,
    /// Slack allowed on `s >= |v|` when testing effect positivity.
    pub positivity: f64,
    /// Excess over the unit ball that is clamped instead of rejected.
    pub ball_clamp: f64,
    /// `|s - |v||` below which a positive effect counts as rank one.
    pub rank_one: f64,
    /// Slack on every joint-measurability inequality.
    pub jm: f64,
    /// Bound on `|d x e . f|` for a triple to count as coplanar.
    pub coplanar: f64,
    /// Bound on `|d . f| + |e . f|` for the one-orthogonal reduction.
    pub one_orthogonal: f64,
    /// Bound on pairwise dot products for the orthogonal reduction.
    pub orthogonal: f64,
    /// Relative tolerance of the triangle area identity.
    pub area_rel: f64,
    /// `|d x e|` below which a triangle is degenerate.
    pub degenerate: f64,
    /// Tolerance of POVM completeness and marginal identities.
    pub povm: f64,
    /// Negativity beyond which POVM construction fails.
    pub povm_negativity: f64,
    /// Constraint residual below which a bound result is feasible.
    pub feasible: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        sharp: 1e-9,
        positivity: 1e-12,
        ball_clamp: 1e-9,
        rank_one: 1e-9,
        jm: 1e-9,
        coplanar: 1e-5,
        one_orthogonal: 1e-4,
        orthogonal: 1e-9,
        area_rel: 1e-9,
        degenerate: 1e-12,
        povm: 1e-12,
        povm_negativity: 1e-9,
        feasible: 1e-6,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// The tolerances in effect.
pub const TOL: Tolerances = Tolerances::DEFAULT;
