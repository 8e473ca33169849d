//! Simulation of the single-ion measurement protocol.
//!
//! A rank-one effect `M = Tr[M] U^dag |up><up| U` is measured by applying
//! the carrier pulse `U` and detecting `up`; a state is prepared by applying
//! a pulse to the ground state `down`. This module turns Bloch vectors into
//! pulse parameters, samples detection events with binomial shot noise and
//! reconstructs marginal probabilities and error estimates from the counts.
//!
//! Random numbers come from ChaCha8 streams selected by
//! [`stream_id`]`(point, entry)`, so results do not depend on the order in
//! which entries are simulated.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use alloc::format;
use core::f64::consts::{FRAC_PI_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bound::{SolverConfig, Triad};
use crate::joint::{self, outcome_label, JointPovm, Triple};
use crate::qubit::{prob, rotate_bloch, unit_vector, Effect, Observable, PulseParams, QubitState, Sign};
use crate::scenarios::{self, approx_family_orthogonal, Family, SweepSpec};
use crate::uncertainty::wasserstein_empirical;
use crate::{math, Error, Result, Vec3};

/// Laser phase for a direction with in-plane components `(x, y)`.
fn branch_phase(x: f64, y: f64) -> f64 {
    if y != 0.0 {
        let sign = if y > 0.0 { 1.0 } else { -1.0 };
        FRAC_PI_2 * (1.0 - sign) + math::atan(x / y)
    } else if x > 0.0 {
        FRAC_PI_2
    } else if x < 0.0 {
        -FRAC_PI_2
    } else {
        0.0
    }
}

/// Pulse whose detection of `up` measures the projector onto `m`.
pub fn measure_angles(m: Vec3) -> Result<PulseParams> {
    let m = unit_vector("measurement direction", m)?;
    Ok(PulseParams::new(math::acos(m.z), branch_phase(m.x, m.y)))
}

/// Pulse that takes `down` to the pure state with Bloch vector `r`.
pub fn prep_angles(r: Vec3) -> Result<PulseParams> {
    let r = unit_vector("state", r)?;
    Ok(PulseParams::new(math::acos(-r.z), branch_phase(r.x, r.y)))
}

/// `(sin theta sin phi, sin theta cos phi, cos theta)`, the direction
/// measured by [`measure_angles`] parameters.
pub fn measure_direction(p: PulseParams) -> Vec3 {
    let st = math::sin(p.theta);
    Vec3::new(st * math::sin(p.phi), st * math::cos(p.phi), math::cos(p.theta))
}

/// State obtained by applying `p` to `down`.
pub fn prepare(p: PulseParams) -> Vec3 {
    rotate_bloch(QubitState::DOWN.bloch(), p)
}

/// Probability of detecting `up` after applying `p` to the state `r`.
pub fn p_up(r: Vec3, p: PulseParams) -> f64 {
    ((1.0 + rotate_bloch(r, p).z) / 2.0).clamp(0.0, 1.0)
}

/// Repetitions per estimate and master seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ShotConfig {
    pub shots: u64,
    pub seed: u64,
}

pub const DEFAULT_SHOTS: u64 = 20_000;

impl Default for ShotConfig {
    fn default() -> Self {
        ShotConfig { shots: DEFAULT_SHOTS, seed: 0 }
    }
}

impl ShotConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shots == 0 {
            return Err(Error::InvalidParameter { what: "shots", reason: "must be at least 1".into() });
        }
        Ok(())
    }
}

/// Optional hardware imperfections, all off by default.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct NoiseModel {
    /// Shrink factor `1 - p` applied to every prepared Bloch vector.
    pub prep_depolarization: f64,
    /// Probability that a detection result is flipped.
    pub detection_flip: f64,
    /// Relative standard deviation of the pulse area, drawn per shot.
    pub amplitude_jitter: f64,
}

impl NoiseModel {
    pub fn is_ideal(&self) -> bool {
        *self == NoiseModel::default()
    }

    pub fn validate(&self) -> Result<()> {
        for (what, v) in [("prep_depolarization", self.prep_depolarization), ("detection_flip", self.detection_flip)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::OutOfDomain { what, value: v });
            }
        }
        if !(self.amplitude_jitter.is_finite() && self.amplitude_jitter >= 0.0) {
            return Err(Error::OutOfDomain { what: "amplitude_jitter", value: self.amplitude_jitter });
        }
        Ok(())
    }
}

/// A weighted detection frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShotEstimate {
    pub p_hat: f64,
    /// `w sqrt(q (1 - q) / N)` with `q` the raw `up` frequency.
    pub stderr: f64,
    pub shots: u64,
}

impl ShotEstimate {
    /// An estimate without sampling error.
    pub fn exact(p: f64, shots: u64) -> Self {
        ShotEstimate { p_hat: p, stderr: 0.0, shots }
    }
}

/// Stream index of entry `entry` at sweep point `point`.
pub fn stream_id(point: usize, entry: usize) -> u64 {
    ((point as u64) << 16) | entry as u64
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * PI * u2)
}

/// Weight `2 s` and measurement direction of a rank-one effect.
pub fn decompose(e: &Effect) -> Result<(f64, Vec3)> {
    if !e.is_rank_one() {
        return Err(Error::NotRankOne { s: e.s, norm: e.v.norm() });
    }
    let m = e.v.normalized().ok_or(Error::NotRankOne { s: e.s, norm: 0.0 })?;
    Ok((2.0 * e.s, m))
}

/// Counts `up` events for `shots` repetitions of measuring `pulse` on `r`.
fn count_up(r: Vec3, pulse: PulseParams, shots: u64, noise: &NoiseModel, rng: &mut ChaCha8Rng) -> u64 {
    let r = r * (1.0 - noise.prep_depolarization);
    let flip = noise.detection_flip;
    let observed = |p: f64| p * (1.0 - flip) + (1.0 - p) * flip;
    let fixed = observed(p_up(r, pulse));
    let mut ups = 0;
    for _ in 0..shots {
        let p = if noise.amplitude_jitter > 0.0 {
            let theta = pulse.theta * (1.0 + noise.amplitude_jitter * standard_normal(rng));
            observed(p_up(r, PulseParams::new(theta, pulse.phi)))
        } else {
            fixed
        };
        if rng.random::<f64>() < p {
            ups += 1;
        }
    }
    ups
}

fn weighted(ups: u64, shots: u64, w: f64) -> ShotEstimate {
    let q = ups as f64 / shots as f64;
    ShotEstimate { p_hat: (w * q).clamp(0.0, w), stderr: w * math::sqrt(q * (1.0 - q) / shots as f64), shots }
}

/// Sampled estimate of `Tr[e rho]` for a rank-one effect.
///
/// The zero effect gives an exact 0 without sampling.
pub fn simulate_effect(e: &Effect, rho: &QubitState, sc: &ShotConfig, noise: &NoiseModel, stream: u64) -> Result<ShotEstimate> {
    sc.validate()?;
    if e.is_zero() {
        return Ok(ShotEstimate::exact(0.0, sc.shots));
    }
    let (w, m) = decompose(e)?;
    let pulse = measure_angles(m)?;
    let mut rng = rng_for(sc.seed, stream);
    Ok(weighted(count_up(rho.bloch(), pulse, sc.shots, noise, &mut rng), sc.shots, w))
}

/// Noise-free counterpart of [`simulate_effect`]: `w p_up` and the binomial
/// standard error it would have.
pub fn simulate_effect_exact(e: &Effect, rho: &QubitState, shots: u64) -> Result<ShotEstimate> {
    if e.is_zero() {
        return Ok(ShotEstimate::exact(0.0, shots));
    }
    let (w, m) = decompose(e)?;
    let q = p_up(rho.bloch(), measure_angles(m)?);
    Ok(ShotEstimate { p_hat: w * q, stderr: w * math::sqrt(q * (1.0 - q) / shots as f64), shots })
}

/// Sum of the estimates of the outcomes whose `index`-th sign is `sign`,
/// with standard errors added in quadrature.
pub fn estimate_marginal(estimates: &BTreeMap<[Sign; 3], ShotEstimate>, index: usize, sign: Sign) -> Result<ShotEstimate> {
    if index > 2 {
        return Err(Error::InvalidParameter { what: "index", reason: format!("{index} is not in 0..3") });
    }
    let (mut p, mut var, mut shots) = (0.0, 0.0, 0);
    for rest in 0..4 {
        let mut signs = [Sign::Plus; 3];
        let others: Vec<usize> = (0..3).filter(|&k| k != index).collect();
        signs[index] = sign;
        signs[others[0]] = if rest & 2 == 0 { Sign::Plus } else { Sign::Minus };
        signs[others[1]] = if rest & 1 == 0 { Sign::Plus } else { Sign::Minus };
        let est = estimates.get(&signs).ok_or_else(|| Error::MissingOutcome { label: outcome_label(&signs) })?;
        p += est.p_hat;
        var += est.stderr * est.stderr;
        shots = shots.max(est.shots);
    }
    Ok(ShotEstimate { p_hat: p, stderr: math::sqrt(var), shots })
}

/// One pulse of a measurement plan.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanEntry {
    pub label: String,
    pub pulse: PulseParams,
    /// Trace of the measured operator.
    pub weight: f64,
}

/// Ordered list of pulses, one per measured operator.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct MeasurementPlan {
    pub entries: Vec<PlanEntry>,
}

impl MeasurementPlan {
    pub fn validate(&self) -> Result<()> {
        for (i, e) in self.entries.iter().enumerate() {
            if !(e.weight > 0.0 && e.weight <= 2.0) {
                return Err(Error::OutOfDomain { what: "weight", value: e.weight });
            }
            if !(e.pulse.theta.is_finite() && e.pulse.phi.is_finite()) {
                return Err(Error::NonFinite { what: "pulse" });
            }
            if self.entries[..i].iter().any(|o| o.label == e.label) {
                return Err(Error::InvalidParameter { what: "label", reason: format!("duplicate label `{}`", e.label) });
            }
        }
        Ok(())
    }

    /// The effect measured by an entry.
    pub fn effect(entry: &PlanEntry) -> Effect {
        let s = entry.weight / 2.0;
        Effect::new(s, measure_direction(entry.pulse) * s)
    }
}

/// Plan measuring `A+, B+, C+` of `triad` followed by the nonzero outcomes
/// of `povm`, labelled `A+`, `M+-+`, and so on.
pub fn plan_for(triad: &Triad, povm: &JointPovm) -> Result<MeasurementPlan> {
    let mut entries = Vec::new();
    for (name, x) in ["A", "B", "C"].into_iter().zip(triad.vectors()) {
        entries.push(PlanEntry { label: format!("{name}+"), pulse: measure_angles(x)?, weight: 1.0 });
    }
    entries.extend(plan_for_povm(povm)?.entries);
    let plan = MeasurementPlan { entries };
    plan.validate()?;
    Ok(plan)
}

/// Plan measuring the nonzero outcomes of `povm`.
pub fn plan_for_povm(povm: &JointPovm) -> Result<MeasurementPlan> {
    let mut entries = Vec::new();
    for (signs, e) in povm.outcomes() {
        if e.is_zero() {
            continue;
        }
        let (w, m) = decompose(&e)?;
        entries.push(PlanEntry { label: format!("M{}", outcome_label(&signs)), pulse: measure_angles(m)?, weight: w });
    }
    let plan = MeasurementPlan { entries };
    plan.validate()?;
    Ok(plan)
}

/// Simulates every entry of `plan` on `rho`; entry `i` uses stream
/// `stream_id(point, i)`.
pub fn simulate_plan(plan: &MeasurementPlan, rho: &QubitState, sc: &ShotConfig, noise: &NoiseModel, point: usize) -> Result<Vec<ShotEstimate>> {
    plan.validate()?;
    sc.validate()?;
    Ok(plan
        .entries
        .iter()
        .enumerate()
        .map(|(i, entry)| {
            let mut rng = rng_for(sc.seed, stream_id(point, i));
            weighted(count_up(rho.bloch(), entry.pulse, sc.shots, noise, &mut rng), sc.shots, entry.weight)
        })
        .collect())
}

/// Where the approximations of each experiment point come from.
#[derive(Clone, Debug, PartialEq)]
pub enum ArgminSource {
    /// `approx_family_orthogonal(1, varphi, phi)`; orthogonal family only.
    Analytic,
    /// [`crate::bound::solve_lower_bound`] with the family's variant.
    Solver(SolverConfig),
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct ExperimentConfig {
    pub shots: ShotConfig,
    pub noise: NoiseModel,
    /// Report algebraic values instead of sampled ones.
    pub exact: bool,
}

/// One estimated quantity of an experiment point.
#[derive(Clone, Debug, PartialEq)]
pub struct Quantity {
    pub name: String,
    pub value: f64,
    pub stderr: f64,
    /// Noise-free value of the same quantity.
    pub exact: f64,
    pub shots: u64,
    /// The quantity was not sampled because an operator is not rank one.
    pub not_single_qubit_measurable: bool,
}

/// Every quantity measured at one sweep point.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRow {
    pub index: usize,
    pub phi: f64,
    pub varphi: f64,
    pub approximations: Triple,
    pub quantities: Vec<Quantity>,
    /// The bound solve behind the approximations was infeasible.
    pub infeasible: bool,
}

impl ExperimentRow {
    pub fn get(&self, name: &str) -> Option<&Quantity> {
        self.quantities.iter().find(|q| q.name == name)
    }

    pub fn total(&self) -> &Quantity {
        self.get("delta_total").expect("every row carries delta_total")
    }
}

const TERM_NAMES: [(&str, &str, &str); 3] = [("A", "D", "AD"), ("B", "E", "BE"), ("C", "F", "CF")];

/// `|x - y|` below which the error term is treated as vanishing.
const COINCIDENT: f64 = 1e-8;

/// State maximising the error between `x` and `y`; `x` itself when they
/// (nearly) coincide.
fn optimal_state(x: Vec3, y: Vec3) -> QubitState {
    let diff = x - y;
    let dir = if diff.norm() <= COINCIDENT { x } else { diff / diff.norm() };
    QubitState::new(dir).expect("unit vector")
}

struct Estimator<'a> {
    cfg: &'a ExperimentConfig,
    point: usize,
    next_entry: usize,
}

impl Estimator<'_> {
    /// Estimate and noise-free value of `Tr[e rho]`, with rho prepared by
    /// its pulse from `down`.
    fn measure(&mut self, e: &Effect, rho: &QubitState) -> Result<(ShotEstimate, f64, bool)> {
        let stream = stream_id(self.point, self.next_entry);
        self.next_entry += 1;
        let exact = prob(e, rho);
        let shots = self.cfg.shots.shots;
        if e.is_zero() {
            return Ok((ShotEstimate::exact(0.0, shots), 0.0, false));
        }
        if !e.is_rank_one() {
            return Ok((ShotEstimate::exact(exact, shots), exact, true));
        }
        let prepared = QubitState::new(prepare(prep_angles(rho.bloch())?))?;
        let est = if self.cfg.exact {
            simulate_effect_exact(e, &prepared, shots)?
        } else {
            simulate_effect(e, &prepared, &self.cfg.shots, &self.cfg.noise, stream)?
        };
        Ok((est, exact, false))
    }
}

fn quantity(name: String, est: ShotEstimate, exact: f64, flagged: bool) -> Quantity {
    Quantity { name, value: est.p_hat, stderr: est.stderr, exact, shots: est.shots, not_single_qubit_measurable: flagged }
}

/// Runs the protocol for one set of targets and approximations.
///
/// For each term the optimal state `(x - y) / |x - y|` is prepared; the
/// target effect `X+` is measured directly and the eight joint outcomes
/// are measured to reconstruct the marginal `Y+`. The error term is
/// `4 |p(X+) - p(Y+)|` with standard errors combined in quadrature.
pub fn experiment_point(index: usize, phi: f64, varphi: f64, triad: &Triad, approx: &Triple, povm: &JointPovm, cfg: &ExperimentConfig) -> Result<ExperimentRow> {
    let mut est = Estimator { cfg, point: index, next_entry: 0 };
    let targets = triad.vectors();
    let approxs = approx.vectors();
    let mut quantities = Vec::new();
    let (mut total, mut total_var, mut total_exact, mut total_flag) = (0.0, 0.0, 0.0, false);
    for k in 0..3 {
        let (xn, yn, term) = TERM_NAMES[k];
        let rho = optimal_state(targets[k], approxs[k]);
        let x_eff = Observable::new(targets[k])?.effect(Sign::Plus);
        let (x_est, x_exact, x_flag) = est.measure(&x_eff, &rho)?;

        let mut joint_est = BTreeMap::new();
        let mut joint_exact = BTreeMap::new();
        let mut joint_flag = false;
        for (signs, e) in povm.outcomes() {
            let key = [signs[0], signs[1], signs[2]];
            let (e_est, e_exact, flag) = est.measure(&e, &rho)?;
            joint_flag |= flag;
            quantities.push(quantity(format!("p_M{}_rho{}", outcome_label(&signs), k + 1), e_est, e_exact, flag));
            joint_est.insert(key, e_est);
            joint_exact.insert(key, ShotEstimate::exact(e_exact, e_est.shots));
        }
        let y_est = estimate_marginal(&joint_est, k, Sign::Plus)?;
        let y_exact = estimate_marginal(&joint_exact, k, Sign::Plus)?.p_hat;

        let d_val = wasserstein_empirical(x_est.p_hat, y_est.p_hat);
        let d_err = 4.0 * math::sqrt(x_est.stderr * x_est.stderr + y_est.stderr * y_est.stderr);
        let d_exact = wasserstein_empirical(x_exact, y_exact);
        let flag = x_flag || joint_flag;
        quantities.push(quantity(format!("p_{xn}+"), x_est, x_exact, x_flag));
        quantities.push(quantity(format!("p_{yn}+"), y_est, y_exact, joint_flag));
        quantities.push(Quantity { name: format!("delta_{term}"), value: d_val, stderr: d_err, exact: d_exact, shots: x_est.shots, not_single_qubit_measurable: flag });
        total += d_val;
        total_var += d_err * d_err;
        total_exact += d_exact;
        total_flag |= flag;
    }
    quantities.push(Quantity {
        name: String::from("delta_total"),
        value: total,
        stderr: math::sqrt(total_var),
        exact: total_exact,
        shots: cfg.shots.shots,
        not_single_qubit_measurable: total_flag,
    });
    Ok(ExperimentRow { index, phi, varphi, approximations: *approx, quantities, infeasible: false })
}

/// Approximations and joint POVM for one grid point of `spec`.
pub fn experiment_setup(spec: &SweepSpec, index: usize, phi: f64, varphi: f64, source: &ArgminSource) -> Result<(Triad, Triple, JointPovm, bool)> {
    let t = scenarios::triad(spec.family, phi, varphi, spec.extra)?;
    match source {
        ArgminSource::Analytic => {
            if spec.family != Family::Orthogonal {
                return Err(Error::Unsupported("analytic approximations exist only for the orthogonal family"));
            }
            let approx = approx_family_orthogonal(&t, 1.0, varphi, phi);
            let povm = joint::build_povm_orthogonal(&approx)?;
            Ok((t, approx, povm, false))
        }
        ArgminSource::Solver(cfg) => {
            let row = scenarios::sweep_point(spec, index, phi, varphi, cfg)?;
            let povm = if spec.family == Family::Orthogonal {
                joint::build_povm_orthogonal(&row.argmin)?
            } else {
                joint::build_povm_general(&row.argmin)?
            };
            Ok((t, row.argmin, povm, !row.feasible))
        }
    }
}

/// Runs [`experiment_point`] over every point of `spec`, in grid order.
pub fn run_experiment(spec: &SweepSpec, source: &ArgminSource, cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    spec.validate()?;
    cfg.shots.validate()?;
    cfg.noise.validate()?;
    spec.points()
        .into_iter()
        .enumerate()
        .map(|(i, (phi, varphi))| {
            let (t, approx, povm, infeasible) = experiment_setup(spec, i, phi, varphi, source)?;
            let mut row = experiment_point(i, phi, varphi, &t, &approx, &povm, cfg)?;
            row.infeasible = infeasible;
            Ok(row)
        })
        .collect()
}

/// Location and value of the minimum of the least-squares parabola through
/// the points within `half_window` positions of the smallest `y`.
///
/// Returns `None` when fewer than three points are available or the fitted
/// parabola does not open upwards.
pub fn parabola_minimum(xs: &[f64], ys: &[f64], half_window: usize) -> Option<(f64, f64)> {
    let n = xs.len().min(ys.len());
    let best = (0..n).min_by(|&i, &j| ys[i].total_cmp(&ys[j]))?;
    let lo = best.saturating_sub(half_window);
    let hi = (best + half_window + 1).min(n);
    if hi - lo < 3 {
        return None;
    }
    let x0 = xs[best];
    let mut m = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for i in lo..hi {
        let u = xs[i] - x0;
        let basis = [1.0, u, u * u];
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] += basis[r] * basis[c];
            }
            rhs[r] += basis[r] * ys[i];
        }
    }
    let [c0, c1, c2] = solve3(m, rhs)?;
    if c2 <= 0.0 {
        return None;
    }
    let u = -c1 / (2.0 * c2);
    Some((x0 + u, c0 + c1 * u + c2 * u * u))
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = m[r][col] / m[col][col];
            let pivot_row = m[col];
            for (dst, src) in m[r][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst -= f * src;
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let s: f64 = (r + 1..3).map(|c| m[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / m[r][r];
    }
    Some(x)
}

/// The directions and weights of a plan, for checking a plan against the
/// operators it should measure.
pub fn plan_effects(plan: &MeasurementPlan) -> Vec<(String, Effect)> {
    plan.entries.iter().map(|e| (e.label.clone(), MeasurementPlan::effect(e))).collect()
}
