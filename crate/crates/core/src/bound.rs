//! Lower bounds of the total error over jointly measurable approximations.
//!
//! The bound `min 2 (|a - d| + |b - e| + |c - f|)` over jointly measurable
//! `(d, e, f)` is computed with a penalty method: the joint-measurability
//! condition (and, for the reduced variants, an equality constraint on the
//! geometry of the approximations) is added to the distance with a factor
//! `Np`, and the unconstrained problem is minimised by a restarted
//! Nelder–Mead search over the nine coordinates, increasing `Np` stage by
//! stage. The final iterate is projected onto the feasible set before the
//! bound is reported.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fermat::FtResult;
use crate::joint::{self, Triple};
use crate::optim::NelderMead;
use crate::qubit::unit_vector;
use crate::scenarios::approx_family_orthogonal;
use crate::tol::TOL;
use crate::uncertainty::{breakdown, UncertaintyBreakdown};
use crate::{math, Error, Result, Vec3};

/// Three sharp target observables `(a, b, c)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triad {
    pub a: Vec3,
    pub b: Vec3,
    pub c: Vec3,
}

impl Triad {
    pub fn new(a: Vec3, b: Vec3, c: Vec3) -> Result<Self> {
        Ok(Triad { a: unit_vector("a", a)?, b: unit_vector("b", b)?, c: unit_vector("c", c)? })
    }

    pub fn vectors(&self) -> [Vec3; 3] {
        [self.a, self.b, self.c]
    }

    /// The same triad after one global rotation.
    pub fn rotated(&self, axis: Vec3, angle: f64) -> Triad {
        Triad { a: self.a.rotated(axis, angle), b: self.b.rotated(axis, angle), c: self.c.rotated(axis, angle) }
    }

    pub fn is_orthogonal(&self) -> bool {
        Triple::from_vectors(self.vectors()).max_dot() <= TOL.orthogonal
    }

    pub fn is_coplanar(&self) -> bool {
        self.a.triple(self.b, self.c).abs() <= TOL.orthogonal
    }

    /// `c` is orthogonal to both `a` and `b`.
    pub fn is_one_orthogonal(&self) -> bool {
        self.a.dot(self.c).abs() + self.b.dot(self.c).abs() <= TOL.orthogonal
    }
}

/// Constraint set used in the penalised objective.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Median form of the triplewise condition, no geometric restriction.
    General,
    /// `sum |lk|^2 <= 1` with mutually orthogonal approximations.
    Orthogonal,
    /// Coplanar approximations.
    Coplanar,
    /// `f` orthogonal to `d` and `e`.
    OneOrthogonal,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::General, Variant::Orthogonal, Variant::Coplanar, Variant::OneOrthogonal];

    pub fn name(self) -> &'static str {
        match self {
            Variant::General => "general",
            Variant::Orthogonal => "orthogonal",
            Variant::Coplanar => "coplanar",
            Variant::OneOrthogonal => "one_orthogonal",
        }
    }
}

/// Variant plus the shape of the joint-measurability penalty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ObjectiveKind {
    pub variant: Variant,
    /// Use `Np max(0, lhs - rhs)` instead of `Np (lhs - rhs)^2`.
    pub hinge: bool,
}

impl ObjectiveKind {
    pub const fn squared(variant: Variant) -> Self {
        ObjectiveKind { variant, hinge: false }
    }

    pub const fn hinge(variant: Variant) -> Self {
        ObjectiveKind { variant, hinge: true }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Penalty factor of the last stage.
    pub penalty_np: f64,
    /// Factors of the earlier stages; entries not below `penalty_np` are
    /// ignored.
    pub penalty_schedule: Vec<f64>,
    pub restarts: usize,
    /// Value spread at which a simplex counts as converged.
    pub simplex_tol: f64,
    /// Evaluation budget of one stage.
    pub max_evals: usize,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            penalty_np: 1e5,
            penalty_schedule: vec![1e2, 1e3, 1e4, 1e5],
            restarts: 4,
            simplex_tol: 1e-13,
            max_evals: 60_000,
            seed: 0,
        }
    }
}

impl SolverConfig {
    /// One stage at a fixed factor.
    pub fn single_stage(np: f64) -> Self {
        SolverConfig { penalty_np: np, penalty_schedule: Vec::new(), ..SolverConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what, reason: &str| Err(Error::InvalidParameter { what, reason: reason.into() });
        if !(self.penalty_np.is_finite() && self.penalty_np > 0.0) {
            return bad("penalty_np", "must be positive and finite");
        }
        if self.penalty_schedule.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return bad("penalty_schedule", "entries must be positive and finite");
        }
        if self.penalty_schedule.windows(2).any(|w| w[1] <= w[0]) {
            return bad("penalty_schedule", "must be strictly increasing");
        }
        if self.restarts == 0 {
            return bad("restarts", "must be at least 1");
        }
        if !(self.simplex_tol.is_finite() && self.simplex_tol > 0.0) {
            return bad("simplex_tol", "must be positive and finite");
        }
        if self.max_evals == 0 {
            return bad("max_evals", "must be at least 1");
        }
        Ok(())
    }

    /// Penalty factors of the stages, in order.
    pub fn stages(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self.penalty_schedule.iter().copied().filter(|&v| v < self.penalty_np).collect();
        s.push(self.penalty_np);
        s
    }
}

/// The penalised objective at one point, split into its parts.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveValue {
    /// Distance part plus `Np` times every penalty term.
    pub value: f64,
    pub distance: f64,
    /// Joint-measurability term (squared or hinge).
    pub jm_term: f64,
    /// Equality term of the reduced variants.
    pub eq_term: f64,
    /// `sum max(0, |lk| - 1)^2`.
    pub domain_term: f64,
    /// `lhs - rhs` of the joint-measurability inequality.
    pub violation: f64,
    /// Median of the lambda points (general variant only).
    pub ft: Option<FtResult>,
}

impl ObjectiveValue {
    /// False when the median iteration did not converge.
    pub fn reliable(&self) -> bool {
        self.ft.is_none_or(|ft| ft.converged)
    }
}

fn distance(t: &Triple, triad: &Triad) -> f64 {
    2.0 * (triad.a.distance(t.l1) + triad.b.distance(t.l2) + triad.c.distance(t.l3))
}

/// `lhs - rhs` of the inequality for `variant`, plus the median if computed.
fn violation(t: &Triple, variant: Variant) -> (f64, Option<FtResult>) {
    match variant {
        Variant::General => {
            let (lhs, ft) = joint::triple_lhs(t);
            (lhs - 4.0, Some(ft))
        }
        Variant::Orthogonal => (joint::orthogonal_lhs(t) - 1.0, None),
        Variant::Coplanar => (joint::coplanar_lhs(t) - 2.0, None),
        Variant::OneOrthogonal => {
            let (lhs, rhs) = joint::one_orthogonal_sides(t);
            (lhs - rhs, None)
        }
    }
}

fn squared_equality(t: &Triple, variant: Variant) -> f64 {
    let (d, e, f) = (t.l1, t.l2, t.l3);
    let sq = |x: f64| x * x;
    match variant {
        Variant::General => 0.0,
        Variant::Orthogonal => sq(d.dot(e)) + sq(d.dot(f)) + sq(e.dot(f)),
        Variant::Coplanar => sq(d.triple(e, f)),
        Variant::OneOrthogonal => sq(d.dot(f)) + sq(e.dot(f)),
    }
}

/// Unsquared equality residual reported as `residual_g2`.
fn equality_residual(t: &Triple, variant: Variant) -> f64 {
    let (d, e, f) = (t.l1, t.l2, t.l3);
    match variant {
        Variant::General => 0.0,
        Variant::Orthogonal => d.dot(e).abs() + d.dot(f).abs() + e.dot(f).abs(),
        Variant::Coplanar => d.triple(e, f).abs(),
        Variant::OneOrthogonal => d.dot(f).abs() + e.dot(f).abs(),
    }
}

fn domain_excess(t: &Triple) -> f64 {
    t.vectors().iter().map(|v| v.norm() - 1.0).fold(0.0, f64::max)
}

/// Penalised objective of `kind` at `t` with factor `np`.
pub fn objective_eval(t: &Triple, triad: &Triad, kind: ObjectiveKind, np: f64) -> ObjectiveValue {
    let distance = distance(t, triad);
    let (violation, ft) = violation(t, kind.variant);
    let jm_term = if kind.hinge { violation.max(0.0) } else { violation * violation };
    let eq_term = squared_equality(t, kind.variant);
    let domain_term: f64 = t.vectors().iter().map(|v| { let x = (v.norm() - 1.0).max(0.0); x * x }).sum();
    let value = distance + np * (jm_term + eq_term + domain_term);
    ObjectiveValue { value, distance, jm_term, eq_term, domain_term, violation, ft }
}

/// Constraint residuals `(g1, g2)` of `t` under `variant`: the excess of the
/// joint-measurability inequality (or of the unit ball) and the unsquared
/// equality residual.
pub fn residuals(t: &Triple, variant: Variant) -> (f64, f64) {
    let g1 = violation(t, variant).0.max(domain_excess(t)).max(0.0);
    (g1, equality_residual(t, variant))
}

/// Outcome of [`solve_lower_bound`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundResult {
    /// Objective at the projected argmin with the last penalty factor.
    pub value: f64,
    /// Objective at the raw optimiser output, before projection.
    pub penalized_value: f64,
    pub argmin: Triple,
    pub residual_g1: f64,
    pub residual_g2: f64,
    pub evals: usize,
    /// Median of the lambda points of the argmin (general variant only).
    pub ft_diag: Option<FtResult>,
    pub feasible: bool,
    /// Index of the restart that produced the result.
    pub restart: usize,
    pub np_final: f64,
    /// Every simplex stage met its tolerances.
    pub converged: bool,
}

impl BoundResult {
    pub fn breakdown(&self, triad: &Triad) -> UncertaintyBreakdown {
        breakdown(triad.vectors(), self.argmin.vectors())
    }
}

fn to_triple(x: &[f64]) -> Triple {
    Triple {
        l1: Vec3::new(x[0], x[1], x[2]),
        l2: Vec3::new(x[3], x[4], x[5]),
        l3: Vec3::new(x[6], x[7], x[8]),
    }
}

fn from_triple(t: &Triple) -> [f64; 9] {
    let [a, b, c] = t.vectors();
    [a.x, a.y, a.z, b.x, b.y, b.z, c.x, c.y, c.z]
}

fn random_ball(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
        if v.norm_sq() <= 1.0 {
            return v;
        }
    }
}

/// Starting point of restart `index`.
///
/// Restart 0 is `(a, b, c) / 2`, except for the one-orthogonal variant which
/// starts from `((2a + b) / 3, (a + 2b) / 2, c / 2)`. Later restarts draw
/// each vector uniformly from the unit ball.
pub fn initial_iterate(triad: &Triad, variant: Variant, seed: u64, index: usize) -> Triple {
    let (a, b, c) = (triad.a, triad.b, triad.c);
    if index == 0 {
        return match variant {
            Variant::OneOrthogonal => Triple { l1: (a * 2.0 + b) / 3.0, l2: (a + b * 2.0) / 2.0, l3: c / 2.0 },
            _ => Triple { l1: a / 2.0, l2: b / 2.0, l3: c / 2.0 },
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    Triple { l1: random_ball(&mut rng), l2: random_ball(&mut rng), l3: random_ball(&mut rng) }
}

fn gram_schmidt(v: Vec3, basis: &[Vec3]) -> Vec3 {
    basis.iter().fold(v, |acc, u| acc - *u * acc.dot(*u))
}

/// Orthonormal basis of the span of `vs`, dropping near-dependent vectors.
fn span_basis(vs: &[Vec3]) -> Vec<Vec3> {
    let mut basis: Vec<Vec3> = Vec::new();
    for &v in vs {
        let w = gram_schmidt(v, &basis);
        if w.norm() > 1e-8 * v.norm() {
            basis.push(w / w.norm());
        }
    }
    basis
}

/// Equality residual below which a point is left untouched by the repair.
const REPAIR_SKIP: f64 = 1e-15;

/// Enforces the equality constraint of `variant` exactly.
fn repair_equality(t: &Triple, variant: Variant) -> Triple {
    if equality_residual(t, variant) <= REPAIR_SKIP {
        return *t;
    }
    let (d, e, f) = (t.l1, t.l2, t.l3);
    match variant {
        Variant::General => *t,
        Variant::Orthogonal => {
            let e2 = match d.normalized() {
                Some(u) => e - u * e.dot(u),
                None => e,
            };
            let f2 = gram_schmidt(f, &span_basis(&[d, e2]));
            Triple { l1: d, l2: e2, l3: f2 }
        }
        Variant::Coplanar => {
            let pairs = [(d.cross(e), 2), (d.cross(f), 1), (e.cross(f), 0)];
            let (n, free) = pairs.iter().copied().fold(pairs[0], |acc, p| if p.0.norm() > acc.0.norm() { p } else { acc });
            let [x, y, z] = t.vectors().map(Vec3::norm);
            if n.norm() <= 1e-8 * (x * y).max(x * z).max(y * z) {
                return *t;
            }
            let Some(n) = n.normalized() else { return *t };
            let mut v = t.vectors();
            v[free] = v[free] - n * v[free].dot(n);
            Triple::from_vectors(v)
        }
        Variant::OneOrthogonal => Triple { l1: d, l2: e, l3: gram_schmidt(f, &span_basis(&[d, e])) },
    }
}

/// Largest `k <= 1` with `k t` satisfying the inequality of `variant`.
fn feasible_scale(t: &Triple, variant: Variant) -> f64 {
    let ok = |k: f64| {
        let s = t.scaled(k);
        violation(&s, variant).0 <= 0.0 && domain_excess(&s) <= 0.0
    };
    if ok(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > f64::EPSILON {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Projection onto the feasible set used after the penalty stages: exact
/// repair of the equality constraint, then the largest shrink factor `<= 1`
/// satisfying the inequality.
pub fn project_feasible(t: &Triple, variant: Variant) -> Triple {
    let repaired = repair_equality(t, variant);
    repaired.scaled(feasible_scale(&repaired, variant))
}

struct Run {
    raw: Triple,
    penalized: f64,
    evals: usize,
    converged: bool,
}

fn run_stages(triad: &Triad, kind: ObjectiveKind, cfg: &SolverConfig, start: Triple) -> Run {
    let mut x = from_triple(&start).to_vec();
    let mut evals = 0;
    let mut converged = true;
    let mut penalized = f64::INFINITY;
    for (i, np) in cfg.stages().into_iter().enumerate() {
        let nm = NelderMead {
            initial_step: if i == 0 { 0.1 } else { 0.02 },
            ftol: cfg.simplex_tol,
            xtol: 1e-10,
            max_evals: cfg.max_evals,
            rebuilds: 8,
        };
        let m = nm.minimize(|p| objective_eval(&to_triple(p), triad, kind, np).value, &x);
        evals += m.evals;
        converged &= m.converged;
        x = m.x;
        penalized = m.value;
    }
    Run { raw: to_triple(&x), penalized, evals, converged }
}

fn finish(triad: &Triad, kind: ObjectiveKind, cfg: &SolverConfig, run: Run, restart: usize) -> BoundResult {
    let argmin = project_feasible(&run.raw, kind.variant);
    let obj = objective_eval(&argmin, triad, kind, cfg.penalty_np);
    let (g1, g2) = residuals(&argmin, kind.variant);
    BoundResult {
        value: obj.value,
        penalized_value: run.penalized,
        argmin,
        residual_g1: g1,
        residual_g2: g2,
        evals: run.evals,
        ft_diag: obj.ft,
        feasible: g1 <= TOL.feasible && g2 <= TOL.feasible && obj.reliable(),
        restart,
        np_final: cfg.penalty_np,
        converged: run.converged,
    }
}

/// Result of one restart; restarts are independent and can run in parallel.
pub fn solve_restart(triad: &Triad, kind: ObjectiveKind, cfg: &SolverConfig, restart: usize) -> BoundResult {
    let start = initial_iterate(triad, kind.variant, cfg.seed, restart);
    let run = run_stages(triad, kind, cfg, start);
    finish(triad, kind, cfg, run, restart)
}

/// Picks the lowest feasible value, ties within `1e-9` going to the lowest
/// restart index; without feasible candidates the lowest value wins.
pub fn merge_results(results: &[BoundResult]) -> Option<BoundResult> {
    let better = |x: &BoundResult, y: &BoundResult| -> bool {
        if x.feasible != y.feasible {
            return x.feasible;
        }
        if (x.value - y.value).abs() <= 1e-9 {
            return x.restart < y.restart;
        }
        x.value < y.value
    };
    results.iter().copied().reduce(|acc, r| if better(&r, &acc) { r } else { acc })
}

/// Multi-start penalty minimisation of the total error.
pub fn solve_lower_bound(triad: &Triad, kind: ObjectiveKind, cfg: &SolverConfig) -> Result<BoundResult> {
    cfg.validate()?;
    let results: Vec<BoundResult> = (0..cfg.restarts).map(|r| solve_restart(triad, kind, cfg, r)).collect();
    let mut best = merge_results(&results).expect("at least one restart");
    best.evals = results.iter().map(|r| r.evals).sum();
    Ok(best)
}

/// Closed-form optimum of the orthogonal problem.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrthogonalOptimum {
    /// `2 sqrt(3) (sqrt(3) - 1) = 6 - 2 sqrt(3)`.
    pub value: f64,
    pub k: f64,
    pub varphi: f64,
    pub phi: f64,
}

pub fn analytic_orthogonal_bound() -> OrthogonalOptimum {
    OrthogonalOptimum {
        value: 6.0 - 2.0 * math::sqrt(3.0),
        k: 1.0,
        varphi: core::f64::consts::FRAC_PI_4,
        phi: math::acos(math::sqrt(1.0 / 3.0)),
    }
}

/// `2 [3 - k (sin varphi sin phi + cos varphi sin phi + cos phi)]`, the total
/// error of the orthogonal approximation family.
pub fn orthogonal_family_objective(k: f64, varphi: f64, phi: f64) -> f64 {
    let (sv, cv) = (math::sin(varphi), math::cos(varphi));
    let (sp, cp) = (math::sin(phi), math::cos(phi));
    2.0 * (3.0 - k * (sv * sp + cv * sp + cp))
}

/// Exhaustive search on a grid that is refined around its best point.
///
/// `eval` returns `None` for infeasible points. Each level places `density`
/// points per axis on the current box and shrinks the box to three spacings
/// around the best point found so far.
fn zoom_grid<F>(lo: &[f64], hi: &[f64], density: usize, levels: usize, mut eval: F) -> Option<f64>
where
    F: FnMut(&[f64]) -> Option<f64>,
{
    let dim = lo.len();
    let (mut blo, mut bhi) = (lo.to_vec(), hi.to_vec());
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    for _ in 0..levels {
        idx.iter_mut().for_each(|i| *i = 0);
        'grid: loop {
            for k in 0..dim {
                x[k] = blo[k] + (bhi[k] - blo[k]) * idx[k] as f64 / (density - 1) as f64;
            }
            if let Some(v) = eval(&x) {
                if best.as_ref().is_none_or(|(b, _)| v < *b) {
                    best = Some((v, x.clone()));
                }
            }
            for i in idx.iter_mut() {
                *i += 1;
                if *i < density {
                    continue 'grid;
                }
                *i = 0;
            }
            break;
        }
        let (_, center) = best.as_ref()?;
        for k in 0..dim {
            let half = 1.5 * (bhi[k] - blo[k]) / (density - 1) as f64;
            blo[k] = (center[k] - half).max(lo[k]);
            bhi[k] = (center[k] + half).min(hi[k]);
        }
    }
    best.map(|(v, _)| v)
}

fn orthonormal_pair(u: Vec3, hint: Vec3) -> Option<(Vec3, Vec3)> {
    let u = u.normalized()?;
    let w = (hint - u * hint.dot(u)).normalized().or_else(|| {
        let probe = if u.x.abs() < 0.9 { Vec3::X } else { Vec3::Y };
        (probe - u * probe.dot(u)).normalized()
    })?;
    Some((u, w))
}

fn polar(u: Vec3, w: Vec3, r: f64, angle: f64) -> Vec3 {
    (u * math::cos(angle) + w * math::sin(angle)) * r
}

/// Grid oracle for the bound, an upper bound on the true minimum.
///
/// Orthogonal triads are searched over the orthogonal approximation family
/// `(k, varphi, phi)`; coplanar triads over approximations in the plane of
/// the triad (polar radius and angle per vector); one-orthogonal triads over
/// `d, e` in the plane orthogonal to `c` and `f` along `c`. Only points that
/// satisfy the inequality of `kind` are accepted. `density` is the number of
/// grid points per axis and must lie in `3..=21`.
pub fn brute_force_bound(triad: &Triad, kind: ObjectiveKind, density: usize) -> Result<f64> {
    if !(3..=21).contains(&density) {
        return Err(Error::InvalidParameter { what: "grid_density", reason: "must lie in 3..=21".into() });
    }
    let variant = kind.variant;
    let feasible = |t: &Triple| violation(t, variant).0 <= TOL.jm;
    let levels = 12;
    let tau = 2.0 * core::f64::consts::PI;
    let pi = core::f64::consts::PI;
    let accept = |t: Triple| feasible(&t).then(|| distance(&t, triad));
    let found = if triad.is_orthogonal() && matches!(variant, Variant::General | Variant::Orthogonal) {
        zoom_grid(&[0.0, 0.0, 0.0], &[1.0, tau, pi], density, levels, |p| {
            accept(approx_family_orthogonal(triad, p[0], p[1], p[2]))
        })
    } else if triad.is_coplanar() && matches!(variant, Variant::General | Variant::Coplanar) {
        let normal = [triad.a.cross(triad.b), triad.a.cross(triad.c), triad.b.cross(triad.c)]
            .into_iter()
            .fold(Vec3::ZERO, |acc, n| if n.norm() > acc.norm() { n } else { acc });
        let (u, w) = orthonormal_pair(triad.a, normal.cross(triad.a)).ok_or(Error::Unsupported("degenerate triad"))?;
        let lo = [0.0, -pi, 0.0, -pi, 0.0, -pi];
        let hi = [1.0, pi, 1.0, pi, 1.0, pi];
        zoom_grid(&lo, &hi, density, levels, |p| {
            accept(Triple {
                l1: polar(u, w, p[0], p[1]),
                l2: polar(u, w, p[2], p[3]),
                l3: polar(u, w, p[4], p[5]),
            })
        })
    } else if triad.is_one_orthogonal() && matches!(variant, Variant::General | Variant::OneOrthogonal) {
        let (u, w) = orthonormal_pair(triad.a, triad.c.cross(triad.a)).ok_or(Error::Unsupported("degenerate triad"))?;
        let lo = [0.0, -pi, 0.0, -pi, -1.0];
        let hi = [1.0, pi, 1.0, pi, 1.0];
        zoom_grid(&lo, &hi, density, levels, |p| {
            accept(Triple { l1: polar(u, w, p[0], p[1]), l2: polar(u, w, p[2], p[3]), l3: triad.c * p[4] })
        })
    } else {
        return Err(Error::Unsupported("no reduced parametrization matches this triad and variant"));
    };
    found.ok_or(Error::Unsupported("no feasible grid point"))
}

/// One penalty factor of [`penalty_scaling_study`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltyPoint {
    pub np: f64,
    /// Penalised objective at the optimiser output.
    pub value: f64,
    /// `|value - reference|`.
    pub gap: f64,
    /// The simplex search converged; other points are left out of the fit.
    pub converged: bool,
    pub result: BoundResult,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PenaltyStudy {
    pub reference: f64,
    pub points: Vec<PenaltyPoint>,
    /// Least-squares fit `ln gap = slope ln Np + ln constant`.
    pub slope: f64,
    pub constant: f64,
}

/// One single-stage solve per factor, all from the restart-0 iterate.
pub fn penalty_scaling_study(triad: &Triad, kind: ObjectiveKind, np_list: &[f64], base: &SolverConfig) -> Result<PenaltyStudy> {
    let points = np_list
        .iter()
        .map(|&np| penalty_point(triad, kind, np, base))
        .collect::<Result<Vec<_>>>()?;
    fit_study(analytic_orthogonal_bound().value, points)
}

/// The solve behind one entry of [`penalty_scaling_study`].
pub fn penalty_point(triad: &Triad, kind: ObjectiveKind, np: f64, base: &SolverConfig) -> Result<PenaltyPoint> {
    let cfg = SolverConfig { restarts: 1, ..SolverConfig { penalty_schedule: Vec::new(), penalty_np: np, ..base.clone() } };
    let r = solve_lower_bound(triad, kind, &cfg)?;
    let reference = analytic_orthogonal_bound().value;
    Ok(PenaltyPoint { np, value: r.penalized_value, gap: (r.penalized_value - reference).abs(), converged: r.converged, result: r })
}

/// Log-log least-squares fit over the converged points with positive gap.
pub fn fit_study(reference: f64, points: Vec<PenaltyPoint>) -> Result<PenaltyStudy> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.converged && p.gap > 0.0)
        .map(|p| (math::ln(p.np), math::ln(p.gap)))
        .collect();
    if used.len() < 2 {
        return Err(Error::TooFewPoints { got: used.len() });
    }
    let n = used.len() as f64;
    let mx = used.iter().map(|p| p.0).sum::<f64>() / n;
    let my = used.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = used.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = used.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter { what: "np_list", reason: "needs at least two distinct factors".into() });
    }
    let slope = sxy / sxx;
    let constant = math::exp(my - slope * mx);
    Ok(PenaltyStudy { reference, points, slope, constant })
}
