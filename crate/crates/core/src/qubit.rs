//! Single-qubit algebra in the Bloch representation.
//!
//! Every operator in this crate is affine in `(I, sigma)`, so an effect is
//! stored as the real pair `(s, v)` meaning `s I + v . sigma`. The explicit
//! 2x2 matrix is only produced by [`Effect::matrix`] for debugging.

use core::fmt;

use crate::tol::TOL;
use crate::{math, Error, Result, Vec3};

/// Nominal Rabi frequency of the carrier transition, in Hz.
///
/// Only used to convert a pulse area into a duration for reports.
pub const RABI_FREQUENCY_HZ: f64 = 47.0e3;

/// Outcome label of a binary observable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Checks a Bloch vector for finiteness and the unit ball, clamping tiny
/// overshoots produced by upstream arithmetic.
pub(crate) fn ball_vector(what: &'static str, v: Vec3) -> Result<Vec3> {
    if !v.is_finite() {
        return Err(Error::NonFinite { what });
    }
    let n = v.norm();
    if n > 1.0 + TOL.ball_clamp {
        return Err(Error::OutsideBall { what, norm: n });
    }
    Ok(if n > 1.0 { v / n } else { v })
}

pub(crate) fn unit_vector(what: &'static str, v: Vec3) -> Result<Vec3> {
    if !v.is_finite() {
        return Err(Error::NonFinite { what });
    }
    let n = v.norm();
    if (n - 1.0).abs() > TOL.sharp {
        return Err(Error::NotUnit { what, norm: n });
    }
    Ok(v / n)
}

/// A binary qubit observable `o . sigma` with `|o| <= 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observable {
    bloch: Vec3,
}

impl Observable {
    pub fn new(bloch: Vec3) -> Result<Self> {
        Ok(Observable { bloch: ball_vector("observable", bloch)? })
    }

    /// A sharp (projective) observable; `bloch` must have unit length.
    pub fn sharp(bloch: Vec3) -> Result<Self> {
        Ok(Observable { bloch: unit_vector("observable", bloch)? })
    }

    #[inline]
    pub fn bloch(&self) -> Vec3 {
        self.bloch
    }

    pub fn is_sharp(&self) -> bool {
        (self.bloch.norm() - 1.0).abs() <= TOL.sharp
    }

    /// The effect `(1 +- o . sigma) / 2`.
    pub fn effect(&self, sign: Sign) -> Effect {
        Effect { s: 0.5, v: self.bloch * (0.5 * sign.value()) }
    }
}

/// A qubit state `(1 + r . sigma) / 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState {
    bloch: Vec3,
}

impl QubitState {
    pub const UP: QubitState = QubitState { bloch: Vec3::Z };
    pub const DOWN: QubitState = QubitState { bloch: Vec3::new(0.0, 0.0, -1.0) };

    pub fn new(bloch: Vec3) -> Result<Self> {
        Ok(QubitState { bloch: ball_vector("state", bloch)? })
    }

    #[inline]
    pub fn bloch(&self) -> Vec3 {
        self.bloch
    }

    pub fn is_pure(&self) -> bool {
        (self.bloch.norm() - 1.0).abs() <= TOL.sharp
    }
}

/// A positive qubit operator `s I + v . sigma`.
///
/// Construction does not enforce positivity; POVM builders check it.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Effect {
    pub s: f64,
    pub v: Vec3,
}

impl Effect {
    pub const IDENTITY: Effect = Effect { s: 1.0, v: Vec3::ZERO };
    pub const ZERO: Effect = Effect { s: 0.0, v: Vec3::ZERO };

    #[inline]
    pub const fn new(s: f64, v: Vec3) -> Self {
        Effect { s, v }
    }

    pub fn trace(&self) -> f64 {
        2.0 * self.s
    }

    /// Eigenvalues `(s + |v|, s - |v|)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let n = self.v.norm();
        (self.s + n, self.s - n)
    }

    /// `s - |v|`, the smallest eigenvalue.
    pub fn min_eigenvalue(&self) -> f64 {
        self.s - self.v.norm()
    }

    pub fn is_positive(&self) -> bool {
        self.min_eigenvalue() >= -TOL.positivity
    }

    /// Proportional to a pure-state projector.
    pub fn is_rank_one(&self) -> bool {
        self.s > 0.0 && (self.s - self.v.norm()).abs() <= TOL.rank_one
    }

    pub fn is_zero(&self) -> bool {
        self.s.abs() <= TOL.povm && self.v.norm() <= TOL.povm
    }

    pub fn scaled(&self, k: f64) -> Effect {
        Effect { s: self.s * k, v: self.v * k }
    }

    /// Largest deviation between the `(s, v)` coefficients of two effects.
    pub fn distance(&self, o: &Effect) -> f64 {
        (self.s - o.s).abs().max(self.v.max_abs_diff(o.v))
    }

    /// Row-major 2x2 matrix as `(re, im)` pairs.
    pub fn matrix(&self) -> [[(f64, f64); 2]; 2] {
        let Effect { s, v } = *self;
        [[(s + v.z, 0.0), (v.x, -v.y)], [(v.x, v.y), (s - v.z, 0.0)]]
    }
}

impl core::ops::Add for Effect {
    type Output = Effect;
    fn add(self, o: Effect) -> Effect {
        Effect { s: self.s + o.s, v: self.v + o.v }
    }
}

impl core::iter::Sum for Effect {
    fn sum<I: Iterator<Item = Effect>>(iter: I) -> Effect {
        iter.fold(Effect::ZERO, |a, b| a + b)
    }
}

/// Area and phase of a carrier-transition pulse.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseParams {
    /// Pulse area `Omega t`, radians.
    pub theta: f64,
    /// Laser phase, radians.
    pub phi: f64,
}

impl PulseParams {
    pub const fn new(theta: f64, phi: f64) -> Self {
        PulseParams { theta, phi }
    }

    /// Pulse duration in seconds at the nominal Rabi frequency.
    pub fn duration_s(&self) -> f64 {
        self.theta / (2.0 * core::f64::consts::PI * RABI_FREQUENCY_HZ)
    }

    /// Rotation axis `(cos phi, -sin phi, 0)` of the pulse.
    pub fn axis(&self) -> Vec3 {
        Vec3::new(math::cos(self.phi), -math::sin(self.phi), 0.0)
    }
}

/// `(1 +- o . sigma) / 2` for an observable given by its Bloch vector.
pub fn effect_of_observable(o: &Observable, sign: Sign) -> Effect {
    o.effect(sign)
}

/// Born probability `Tr[E rho] = s + v . r`.
#[inline]
pub fn prob(e: &Effect, rho: &QubitState) -> f64 {
    e.s + e.v.dot(rho.bloch)
}

/// Applies the carrier rotation `U_C(theta, phi)` to a Bloch vector.
///
/// The generator `sigma_x cos phi - sigma_y sin phi` rotates by `theta`
/// about `(cos phi, -sin phi, 0)`.
pub fn rotate_bloch(r: Vec3, p: PulseParams) -> Vec3 {
    r.rotated(p.axis(), p.theta)
}
