//! Joint measurability of qubit observables and joint POVM construction.
//!
//! Three observables `lambda_k . sigma` are triplewise jointly measurable iff
//! the four points `L0 = l1 + l2 + l3`, `Lk = 2 lk - L0` have a
//! Fermat–Torricelli sum of at most 4. Orthogonal, coplanar and
//! one-orthogonal triples admit closed-form reductions of this test, and a
//! pair is jointly measurable iff `|l1 + l2| + |l1 - l2| <= 2`.
//!
//! Every [`JointPovm`] is validated when built: completeness, positivity and
//! the marginal identities all hold, or construction fails.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::fermat::{self, FtResult};
use crate::qubit::{ball_vector, Effect, Sign};
use crate::tol::TOL;
use crate::{math, Error, Result, Vec3};

/// Bloch vectors `(l1, l2, l3)` of three candidate compatible observables.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Triple {
    pub l1: Vec3,
    pub l2: Vec3,
    pub l3: Vec3,
}

impl Triple {
    /// Validates finiteness and `|lk| <= 1` (tiny overshoots are clamped).
    pub fn new(l1: Vec3, l2: Vec3, l3: Vec3) -> Result<Self> {
        Ok(Triple {
            l1: ball_vector("l1", l1)?,
            l2: ball_vector("l2", l2)?,
            l3: ball_vector("l3", l3)?,
        })
    }

    pub fn vectors(&self) -> [Vec3; 3] {
        [self.l1, self.l2, self.l3]
    }

    pub fn from_vectors(v: [Vec3; 3]) -> Self {
        Triple { l1: v[0], l2: v[1], l3: v[2] }
    }

    pub fn scaled(&self, k: f64) -> Triple {
        Triple { l1: self.l1 * k, l2: self.l2 * k, l3: self.l3 * k }
    }

    pub fn is_finite(&self) -> bool {
        self.l1.is_finite() && self.l2.is_finite() && self.l3.is_finite()
    }

    /// `l1 . (l2 x l3)`.
    pub fn triple_product(&self) -> f64 {
        self.l1.triple(self.l2, self.l3)
    }

    /// Largest absolute pairwise dot product.
    pub fn max_dot(&self) -> f64 {
        self.l1.dot(self.l2).abs().max(self.l1.dot(self.l3).abs()).max(self.l2.dot(self.l3).abs())
    }

    /// `|l1 . l3| + |l2 . l3|`.
    pub fn third_overlap(&self) -> f64 {
        self.l1.dot(self.l3).abs() + self.l2.dot(self.l3).abs()
    }

    fn check_ball(&self) -> Result<()> {
        Triple::new(self.l1, self.l2, self.l3).map(|_| ())
    }
}

/// The points `L0 = l1 + l2 + l3` and `Lk = 2 lk - L0`.
pub fn lambda_points(t: &Triple) -> [Vec3; 4] {
    let l0 = t.l1 + t.l2 + t.l3;
    [l0, t.l1 * 2.0 - l0, t.l2 * 2.0 - l0, t.l3 * 2.0 - l0]
}

/// Fermat–Torricelli sum of the four lambda points.
pub fn triple_lhs(t: &Triple) -> (f64, FtResult) {
    let pts = lambda_points(t);
    let ft = fermat::weiszfeld(&pts, fermat::DEFAULT_TOL, fermat::DEFAULT_MAX_ITER);
    (ft.total_distance, ft)
}

/// Outcome of the general triplewise test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JmReport {
    /// `sum_k |Lk - L_FT|`.
    pub lhs: f64,
    /// `4 - lhs`.
    pub margin: f64,
    pub satisfied: bool,
    pub ft: FtResult,
}

impl JmReport {
    /// False when the median iteration did not converge.
    pub fn reliable(&self) -> bool {
        self.ft.converged
    }
}

/// General triplewise joint-measurability test.
pub fn jm_check_triple(t: &Triple) -> Result<JmReport> {
    t.check_ball()?;
    let (lhs, ft) = triple_lhs(t);
    let margin = 4.0 - lhs;
    Ok(JmReport { lhs, margin, satisfied: margin >= -TOL.jm, ft })
}

/// Orthogonal reduction: `sum |lk|^2 <= 1`.
pub fn jm_check_orthogonal(t: &Triple) -> Result<bool> {
    t.check_ball()?;
    let residual = t.max_dot();
    if residual > TOL.orthogonal {
        return Err(Error::NotOrthogonal { residual });
    }
    Ok(orthogonal_lhs(t) <= 1.0 + TOL.jm)
}

pub fn orthogonal_lhs(t: &Triple) -> f64 {
    t.l1.norm_sq() + t.l2.norm_sq() + t.l3.norm_sq()
}

/// `|l1 + l2| + |l1 - l2|`.
pub fn pair_lhs(l1: Vec3, l2: Vec3) -> f64 {
    (l1 + l2).norm() + (l1 - l2).norm()
}

/// Pairwise joint-measurability test.
pub fn jm_check_pair(l1: Vec3, l2: Vec3) -> Result<bool> {
    ball_vector("l1", l1)?;
    ball_vector("l2", l2)?;
    Ok(pair_lhs(l1, l2) <= 2.0 + TOL.jm)
}

/// Result of a point-in-triangle test on the triangle `O, d, e`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Containment {
    pub inside: bool,
    /// `d` and `e` are parallel, so the triangle collapsed to segments.
    pub degenerate: bool,
}

fn triangle_area(p: Vec3, q: Vec3, r: Vec3) -> f64 {
    0.5 * (q - p).cross(r - p).norm()
}

fn on_segment(p: Vec3, q: Vec3, x: Vec3) -> bool {
    let scale = 1.0 + p.norm().max(q.norm());
    (p.distance(x) + x.distance(q) - p.distance(q)).abs() <= 1e-9 * scale
}

fn contains_unchecked(d: Vec3, e: Vec3, f: Vec3) -> Containment {
    if d.cross(e).norm() < TOL.degenerate {
        let o = Vec3::ZERO;
        let inside = on_segment(o, d, f) || on_segment(o, e, f) || on_segment(d, e, f);
        return Containment { inside, degenerate: true };
    }
    let o = Vec3::ZERO;
    let whole = triangle_area(o, d, e);
    let parts = triangle_area(o, d, f) + triangle_area(d, e, f) + triangle_area(e, o, f);
    Containment { inside: (parts - whole).abs() <= TOL.area_rel * whole, degenerate: false }
}

/// Whether `f` lies in the triangle with vertices `O`, `d`, `e`, by the area
/// identity `S_ODE = S_ODF + S_DEF + S_EOF`.
pub fn triangle_contains(d: Vec3, e: Vec3, f: Vec3) -> Result<Containment> {
    let residual = d.triple(e, f).abs();
    if residual > TOL.coplanar {
        return Err(Error::NotCoplanar { residual });
    }
    Ok(contains_unchecked(d, e, f))
}

/// `f` lies in the parallelogram `conv{+-d, +-e}`, the union of the four
/// triangles `O, +-d, +-e`.
fn diamond_contains(d: Vec3, e: Vec3, f: Vec3) -> bool {
    [(d, e), (-d, e), (d, -e), (-d, -e)].iter().any(|&(p, q)| contains_unchecked(p, q, f).inside)
}

/// Left-hand side of the coplanar reduction, compared against 2.
///
/// When `f` lies in `conv{+-d, +-e}` the four lambda points form a convex
/// quadrilateral whose diagonals give `|d + e| + |d - e|`; the same holds for
/// the other two pairings. Otherwise one lambda point lies inside the
/// triangle of the others and the sum is the smallest of the four
/// sign-flipped forms of `|d + e| + |d - f| + |e - f|`.
pub fn coplanar_lhs(t: &Triple) -> f64 {
    let (d, e, f) = (t.l1, t.l2, t.l3);
    if diamond_contains(d, e, f) {
        return pair_lhs(d, e);
    }
    if diamond_contains(d, f, e) {
        return pair_lhs(d, f);
    }
    if diamond_contains(e, f, d) {
        return pair_lhs(e, f);
    }
    let outside = |d: Vec3, e: Vec3, f: Vec3| (d + e).norm() + (d - f).norm() + (e - f).norm();
    outside(d, e, f).min(outside(d, e, -f)).min(outside(d, -e, f)).min(outside(-d, e, f))
}

/// Coplanar reduction of the triplewise test.
pub fn jm_check_coplanar(t: &Triple) -> Result<bool> {
    t.check_ball()?;
    let residual = t.triple_product().abs();
    if residual > TOL.coplanar {
        return Err(Error::NotCoplanar { residual });
    }
    Ok(coplanar_lhs(t) <= 2.0 + TOL.jm)
}

/// `(|d + e| + |d - e|, 2 sqrt(1 - |f|^2))`, the two sides of the
/// one-orthogonal reduction.
pub fn one_orthogonal_sides(t: &Triple) -> (f64, f64) {
    let rhs = 2.0 * math::sqrt((1.0 - t.l3.norm_sq()).max(0.0));
    (pair_lhs(t.l1, t.l2), rhs)
}

/// One-orthogonal reduction (`f` orthogonal to `d` and `e`).
pub fn jm_check_one_orthogonal(t: &Triple) -> Result<bool> {
    t.check_ball()?;
    let residual = t.third_overlap();
    if residual > TOL.one_orthogonal {
        return Err(Error::NotOneOrthogonal { residual });
    }
    let (lhs, rhs) = one_orthogonal_sides(t);
    Ok(lhs <= rhs + TOL.jm)
}

/// Closed-form median of the lambda points when `f` is orthogonal to `d, e`:
/// `(|d - e| - |d + e|) / (|d + e| + |d - e|) f`.
pub fn one_orthogonal_ft(t: &Triple) -> Vec3 {
    let p = (t.l1 + t.l2).norm();
    let q = (t.l1 - t.l2).norm();
    if p + q == 0.0 {
        return Vec3::ZERO;
    }
    t.l3 * ((q - p) / (p + q))
}

/// How a [`JointPovm`] was built.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    /// Eight outcomes from the median of the lambda points.
    General,
    /// Eight outcomes `(I + sum mu_k lk . sigma) / 8` for orthogonal triples.
    OrthogonalCompact,
    /// Four outcomes of a pairwise joint measurement.
    Pairwise,
}

/// A validated joint POVM, outcomes indexed by sign tuples.
///
/// Outcomes are stored in the order `+++, ++-, +-+, +--, -++, ...`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointPovm {
    construction: Construction,
    arity: usize,
    marginal_vectors: [Vec3; 3],
    effects: Vec<Effect>,
}

fn index_of(signs: &[Sign]) -> usize {
    signs.iter().fold(0, |acc, s| (acc << 1) | usize::from(*s == Sign::Minus))
}

fn signs_of(index: usize, arity: usize) -> [Sign; 3] {
    let mut out = [Sign::Plus; 3];
    for (i, s) in out.iter_mut().enumerate().take(arity) {
        if (index >> (arity - 1 - i)) & 1 == 1 {
            *s = Sign::Minus;
        }
    }
    out
}

/// `"+-+"` style label.
pub fn outcome_label(signs: &[Sign]) -> String {
    signs.iter().map(|s| s.symbol()).collect()
}

impl JointPovm {
    fn validated(construction: Construction, arity: usize, lambdas: [Vec3; 3], effects: Vec<Effect>) -> Result<Self> {
        let povm = JointPovm { construction, arity, marginal_vectors: lambdas, effects };
        povm.validate()?;
        Ok(povm)
    }

    fn validate(&self) -> Result<()> {
        let total: Effect = self.effects.iter().copied().sum();
        let err = total.distance(&Effect::IDENTITY);
        if err > TOL.povm {
            return Err(Error::PovmIdentity { what: String::from("completeness"), error: err });
        }
        for (signs, e) in self.outcomes() {
            let deficit = e.min_eigenvalue();
            if deficit < -TOL.povm_negativity {
                return Err(Error::NegativeOutcome { label: outcome_label(&signs), deficit });
            }
        }
        for k in 0..self.arity {
            for sign in Sign::BOTH {
                let want = Effect::new(0.5, self.marginal_vectors[k] * (0.5 * sign.value()));
                let err = self.marginal(k, sign).distance(&want);
                if err > TOL.povm {
                    return Err(Error::PovmIdentity { what: format!("marginal {k}{sign}"), error: err });
                }
            }
        }
        Ok(())
    }

    pub fn construction(&self) -> Construction {
        self.construction
    }

    /// 3 for triplewise POVMs, 2 for pairwise ones.
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn get(&self, signs: &[Sign]) -> Option<&Effect> {
        if signs.len() != self.arity {
            return None;
        }
        self.effects.get(index_of(signs))
    }

    /// `(signs, effect)` pairs in canonical order; only the first
    /// [`arity`](Self::arity) signs are meaningful.
    pub fn outcomes(&self) -> impl Iterator<Item = (Vec<Sign>, Effect)> + '_ {
        self.effects
            .iter()
            .enumerate()
            .map(move |(i, e)| (signs_of(i, self.arity)[..self.arity].to_vec(), *e))
    }

    /// Sum of the outcomes whose `index`-th sign equals `sign`.
    pub fn marginal(&self, index: usize, sign: Sign) -> Effect {
        self.outcomes().filter(|(s, _)| s[index] == sign).map(|(_, e)| e).sum()
    }

    /// Bloch vectors of the observables this POVM jointly measures.
    pub fn marginal_vectors(&self) -> &[Vec3] {
        &self.marginal_vectors[..self.arity]
    }
}

fn sign_triples() -> impl Iterator<Item = [Sign; 3]> {
    (0..8).map(|i| signs_of(i, 3))
}

/// Eight-outcome joint POVM built from the median `ft` of the lambda points.
///
/// `M_mu = (I + sum_{i>j} mu_i mu_j Z_ij + sum mu_i li . sigma
///          - mu_1 mu_2 mu_3 ft . sigma) / 8`
/// with `Z_ij = 1 - (|Li - ft| + |Lj - ft|) / 2`. With this choice the
/// outcomes `+--`, `-+-`, `--+` and their negations are rank one and the
/// outcomes `+++`, `---` absorb the slack `4 - sum_k |Lk - ft|`.
pub fn build_povm_with_ft(t: &Triple, ft: Vec3) -> Result<JointPovm> {
    let pts = lambda_points(t);
    let ell: [f64; 4] = core::array::from_fn(|k| pts[k].distance(ft));
    let z = |i: usize, j: usize| 1.0 - 0.5 * (ell[i] + ell[j]);
    let (z21, z31, z32) = (z(2, 1), z(3, 1), z(3, 2));
    let lambdas = t.vectors();
    let effects = sign_triples()
        .map(|mu| {
            let [m1, m2, m3] = mu.map(Sign::value);
            let s = 1.0 + m2 * m1 * z21 + m3 * m1 * z31 + m3 * m2 * z32;
            let v = lambdas[0] * m1 + lambdas[1] * m2 + lambdas[2] * m3 - ft * (m1 * m2 * m3);
            Effect::new(s / 8.0, v / 8.0)
        })
        .collect();
    JointPovm::validated(Construction::General, 3, lambdas, effects)
}

/// General joint POVM; the triple must pass [`jm_check_triple`].
pub fn build_povm_general(t: &Triple) -> Result<JointPovm> {
    let report = jm_check_triple(t)?;
    if !report.satisfied {
        return Err(Error::NotJointlyMeasurable { margin: report.margin });
    }
    build_povm_with_ft(t, report.ft.point)
}

/// Compact POVM `(I + sum mu_k lk . sigma) / 8` for orthogonal triples with
/// `sum |lk|^2 <= 1`.
pub fn build_povm_orthogonal(t: &Triple) -> Result<JointPovm> {
    if !jm_check_orthogonal(t)? {
        return Err(Error::NotJointlyMeasurable { margin: 1.0 - orthogonal_lhs(t) });
    }
    let lambdas = t.vectors();
    let effects = sign_triples()
        .map(|mu| {
            let v = lambdas[0] * mu[0].value() + lambdas[1] * mu[1].value() + lambdas[2] * mu[2].value();
            Effect::new(0.125, v / 8.0)
        })
        .collect();
    JointPovm::validated(Construction::OrthogonalCompact, 3, lambdas, effects)
}

/// Four-outcome POVM `(G I + mu_1 l1 . sigma + mu_2 l2 . sigma) / 4` with
/// `G = 1 + mu_1 mu_2 l1 . l2`.
pub fn build_povm_pair(l1: Vec3, l2: Vec3) -> Result<JointPovm> {
    if !jm_check_pair(l1, l2)? {
        return Err(Error::NotJointlyMeasurable { margin: 2.0 - pair_lhs(l1, l2) });
    }
    let overlap = l1.dot(l2);
    let effects = (0..4)
        .map(|i| {
            let mu = signs_of(i, 2);
            let (m1, m2) = (mu[0].value(), mu[1].value());
            Effect::new((1.0 + m1 * m2 * overlap) / 4.0, (l1 * m1 + l2 * m2) / 4.0)
        })
        .collect();
    JointPovm::validated(Construction::Pairwise, 2, [l1, l2, Vec3::ZERO], effects)
}

/// Rank-one test used to decide whether an outcome is measurable with one
/// pulse and a projective detection.
pub fn is_rank_one(e: &Effect) -> bool {
    e.is_rank_one()
}
