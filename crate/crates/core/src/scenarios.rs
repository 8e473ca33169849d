//! Canonical target triads and the parameter sweeps over them.
//!
//! | family           | `a`                                  | `b`                     | `c`                      |
//! |------------------|--------------------------------------|-------------------------|--------------------------|
//! | `orthogonal`     | `(0, 0, 1)`                          | `(0, 1, 0)`             | `(1, 0, 0)`              |
//! | `coplanar`       | `(0, 0, 1)`                          | `(0, sin vp, cos vp)`   | `(0, -sin p, cos p)`     |
//! | `one_orthogonal` | `(0, -sin p, cos p)`                 | `(0, sin vp, cos vp)`   | `(1, 0, 0)`              |
//! | `general`        | `(cos p, sin x sin p, cos x sin p)`  | `(0, sin vp, cos vp)`   | `(1, 0, 0)`              |
//!
//! Here `p` is `phi`, `vp` is `varphi` and `x` the extra angle of the
//! general family. The orthogonal triad is fixed; its sweeps run over the
//! angles of the orthogonal approximation family instead.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
use core::fmt;
use core::str::FromStr;

use crate::bound::{
    orthogonal_family_objective, solve_lower_bound, ObjectiveKind, SolverConfig, Triad, Variant,
};
use crate::joint::Triple;
use crate::uncertainty::{breakdown, UncertaintyBreakdown};
use crate::{math, Error, Result, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Orthogonal,
    Coplanar,
    OneOrthogonal,
    General,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Orthogonal, Family::Coplanar, Family::OneOrthogonal, Family::General];

    pub fn name(self) -> &'static str {
        match self {
            Family::Orthogonal => "orthogonal",
            Family::Coplanar => "coplanar",
            Family::OneOrthogonal => "one_orthogonal",
            Family::General => "general",
        }
    }

    /// Objective variant used when solving points of this family.
    pub fn variant(self) -> Variant {
        match self {
            Family::Orthogonal => Variant::Orthogonal,
            Family::Coplanar => Variant::Coplanar,
            Family::OneOrthogonal => Variant::OneOrthogonal,
            Family::General => Variant::General,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Family::ALL
            .into_iter()
            .find(|f| f.name() == norm)
            .ok_or_else(|| Error::InvalidParameter {
                what: "family",
                reason: alloc::format!("unknown family `{s}`; expected one of orthogonal, coplanar, one_orthogonal, general"),
            })
    }
}

const ANGLE_SLACK: f64 = 1e-12;

fn check_angle(what: &'static str, value: f64, hi: f64) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::NonFinite { what });
    }
    if !(-ANGLE_SLACK..=hi + ANGLE_SLACK).contains(&value) {
        return Err(Error::OutOfDomain { what, value });
    }
    Ok(())
}

/// Target triad of `family` at `(phi, varphi)`, with `extra` the second
/// angle of `b` in the general family. Accepts `phi` in `[0, pi]` and
/// `varphi`, `extra` in `[0, 2 pi]`.
pub fn triad(family: Family, phi: f64, varphi: f64, extra: f64) -> Result<Triad> {
    check_angle("phi", phi, PI)?;
    check_angle("varphi", varphi, 2.0 * PI)?;
    check_angle("extra", extra, 2.0 * PI)?;
    let (sp, cp) = (math::sin(phi), math::cos(phi));
    let (sv, cv) = (math::sin(varphi), math::cos(varphi));
    let (a, b, c) = match family {
        Family::Orthogonal => (Vec3::Z, Vec3::Y, Vec3::X),
        Family::Coplanar => (Vec3::Z, Vec3::new(0.0, sv, cv), Vec3::new(0.0, -sp, cp)),
        Family::OneOrthogonal => (Vec3::new(0.0, -sp, cp), Vec3::new(0.0, sv, cv), Vec3::X),
        Family::General => {
            let (sx, cx) = (math::sin(extra), math::cos(extra));
            (Vec3::new(cp, sx * sp, cx * sp), Vec3::new(0.0, sv, cv), Vec3::X)
        }
    };
    Triad::new(a, b, c)
}

/// `d = k sin varphi sin phi a`, `e = k cos varphi sin phi b`,
/// `f = k cos phi c`: orthogonal approximations with `sum |lk|^2 = k^2`.
pub fn approx_family_orthogonal(triad: &Triad, k: f64, varphi: f64, phi: f64) -> Triple {
    let (sv, cv) = (math::sin(varphi), math::cos(varphi));
    let (sp, cp) = (math::sin(phi), math::cos(phi));
    Triple { l1: triad.a * (k * sv * sp), l2: triad.b * (k * cv * sp), l3: triad.c * (k * cp) }
}

/// `n` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect(),
    }
}

/// Grid of `(phi, varphi)` points for one family.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub family: Family,
    pub phi_grid: Vec<f64>,
    pub varphi_grid: Vec<f64>,
    /// Sweep only `phi = varphi` along `phi_grid`.
    pub diagonal_only: bool,
    /// Second angle of `b` in the general family.
    pub extra: f64,
}

pub const DEFAULT_GRID_POINTS: usize = 41;

impl SweepSpec {
    /// The default 41 x 41 grid of `family`.
    pub fn full(family: Family) -> Self {
        let (phi_hi, varphi_hi) = default_domain(family);
        SweepSpec {
            family,
            phi_grid: linspace(0.0, phi_hi, DEFAULT_GRID_POINTS),
            varphi_grid: linspace(0.0, varphi_hi, DEFAULT_GRID_POINTS),
            diagonal_only: false,
            extra: 0.0,
        }
    }

    /// `n` points on the diagonal `phi = varphi` between `lo` and `hi`.
    pub fn diagonal(family: Family, lo: f64, hi: f64, n: usize) -> Self {
        let grid = linspace(lo, hi, n);
        SweepSpec { family, phi_grid: grid.clone(), varphi_grid: grid, diagonal_only: true, extra: 0.0 }
    }

    /// Default diagonal of `family` with 41 points.
    pub fn default_diagonal(family: Family) -> Self {
        let (hi, _) = default_domain(family);
        SweepSpec::diagonal(family, 0.0, hi, DEFAULT_GRID_POINTS)
    }

    pub fn validate(&self) -> Result<()> {
        if self.phi_grid.is_empty() || (!self.diagonal_only && self.varphi_grid.is_empty()) {
            return Err(Error::InvalidParameter { what: "grid", reason: "must be nonempty".into() });
        }
        for &p in &self.phi_grid {
            check_angle("phi", p, PI)?;
            if self.diagonal_only {
                check_angle("varphi", p, 2.0 * PI)?;
            }
        }
        if !self.diagonal_only {
            for &v in &self.varphi_grid {
                check_angle("varphi", v, 2.0 * PI)?;
            }
        }
        check_angle("extra", self.extra, 2.0 * PI)
    }

    /// `(phi, varphi)` points in grid order: along the diagonal, or
    /// `phi`-major over the product grid.
    pub fn points(&self) -> Vec<(f64, f64)> {
        if self.diagonal_only {
            return self.phi_grid.iter().map(|&p| (p, p)).collect();
        }
        self.phi_grid.iter().flat_map(|&p| self.varphi_grid.iter().map(move |&v| (p, v))).collect()
    }
}

/// Upper ends of the default `(phi, varphi)` ranges.
pub fn default_domain(family: Family) -> (f64, f64) {
    match family {
        Family::Orthogonal => (FRAC_PI_2, FRAC_PI_2),
        Family::Coplanar => (FRAC_PI_2, FRAC_PI_2),
        Family::OneOrthogonal => (PI, PI),
        Family::General => (FRAC_PI_2, FRAC_PI_2),
    }
}

/// One solved grid point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub phi: f64,
    pub varphi: f64,
    pub triad: Triad,
    /// Bound (or, for the orthogonal family, the family error) at the point.
    pub value: f64,
    pub terms: UncertaintyBreakdown,
    pub argmin: Triple,
    pub residual_g1: f64,
    pub residual_g2: f64,
    pub feasible: bool,
    pub converged: bool,
    pub evals: usize,
}

/// Seed of grid point `index`, derived from the master seed.
pub fn point_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Evaluates one grid point.
///
/// For the orthogonal family the point is the approximation
/// `approx_family_orthogonal(1, varphi, phi)` and no solve takes place; for
/// the other families the bound is solved with the family's variant.
pub fn sweep_point(spec: &SweepSpec, index: usize, phi: f64, varphi: f64, cfg: &SolverConfig) -> Result<SweepRow> {
    let t = triad(spec.family, phi, varphi, spec.extra)?;
    if spec.family == Family::Orthogonal {
        let argmin = approx_family_orthogonal(&t, 1.0, varphi, phi);
        return Ok(SweepRow {
            index,
            phi,
            varphi,
            triad: t,
            value: orthogonal_family_objective(1.0, varphi, phi),
            terms: breakdown(t.vectors(), argmin.vectors()),
            argmin,
            residual_g1: 0.0,
            residual_g2: 0.0,
            feasible: true,
            converged: true,
            evals: 0,
        });
    }
    let point_cfg = SolverConfig { seed: point_seed(cfg.seed, index), ..cfg.clone() };
    let r = solve_lower_bound(&t, ObjectiveKind::squared(spec.family.variant()), &point_cfg)?;
    Ok(SweepRow {
        index,
        phi,
        varphi,
        triad: t,
        value: r.value,
        terms: r.breakdown(&t),
        argmin: r.argmin,
        residual_g1: r.residual_g1,
        residual_g2: r.residual_g2,
        feasible: r.feasible,
        converged: r.converged,
        evals: r.evals,
    })
}

/// Sequential sweep; rows come back in grid order.
pub fn run_sweep(spec: &SweepSpec, cfg: &SolverConfig) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    cfg.validate()?;
    spec.points()
        .into_iter()
        .enumerate()
        .map(|(i, (p, v))| sweep_point(spec, i, p, v, cfg))
        .collect()
}
