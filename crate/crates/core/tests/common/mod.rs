#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use trijm_core::joint::{self, Triple};
use trijm_core::Vec3;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn in_ball(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        if v.norm_sq() <= 1.0 {
            return v;
        }
    }
}

pub fn on_sphere(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        if let Some(u) = in_ball(rng).normalized() {
            return u;
        }
    }
}

/// Random orthonormal frame.
pub fn frame(rng: &mut ChaCha8Rng) -> [Vec3; 3] {
    let u = on_sphere(rng);
    loop {
        if let Some(w) = on_sphere(rng).cross(u).normalized() {
            return [u, w, u.cross(w)];
        }
    }
}

/// Largest `k <= 1` with `k t` jointly measurable.
pub fn boundary_scale(t: &Triple) -> f64 {
    let ok = |k: f64| joint::triple_lhs(&t.scaled(k)).0 <= 4.0;
    if ok(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// A jointly measurable triple: half of the draws sit on the boundary, the
/// rest strictly inside.
pub fn random_jm_triple(rng: &mut ChaCha8Rng, i: usize) -> Triple {
    let t = Triple::from_vectors([in_ball(rng), in_ball(rng), in_ball(rng)]);
    let k = boundary_scale(&t);
    let shrink = if i.is_multiple_of(2) { 1.0 } else { rng.random_range(0.0..1.0) };
    t.scaled(k * shrink)
}
