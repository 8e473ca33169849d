//! Derivative-free minimisation by the Nelder–Mead simplex method.
//!
//! Uses the dimension-adaptive coefficients of Gao and Han, which behave far
//! better than the classical `(1, 2, 1/2, 1/2)` choice beyond a handful of
//! variables. After each convergence the simplex is rebuilt around the best
//! vertex and the search resumed, until a rebuild no longer improves the
//! value.

use alloc::vec;
use alloc::vec::Vec;

/// Stopping rules and simplex geometry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NelderMead {
    /// Edge length of the initial simplex along each coordinate.
    pub initial_step: f64,
    /// Spread of the vertex values below which the simplex has converged.
    pub ftol: f64,
    /// Largest vertex offset from the best vertex below which the simplex
    /// has converged.
    pub xtol: f64,
    /// Budget of objective evaluations across all rebuilds.
    pub max_evals: usize,
    /// Maximum number of simplex rebuilds after the first convergence.
    pub rebuilds: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead { initial_step: 0.1, ftol: 1e-13, xtol: 1e-10, max_evals: 200_000, rebuilds: 8 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub evals: usize,
    /// The last simplex met the tolerances before the budget ran out.
    pub converged: bool,
}

struct Counter<F> {
    f: F,
    evals: usize,
}

impl<F: FnMut(&[f64]) -> f64> Counter<F> {
    fn call(&mut self, x: &[f64]) -> f64 {
        self.evals += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }
}

impl NelderMead {
    /// Minimises `f` starting from `x0`.
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, f: F, x0: &[f64]) -> Minimum {
        let mut counter = Counter { f, evals: 0 };
        let (mut x, mut value, mut converged) = self.run(&mut counter, x0, self.initial_step);
        let mut step = self.initial_step;
        for _ in 0..self.rebuilds {
            if counter.evals >= self.max_evals {
                break;
            }
            step = (step * 0.5).max(self.xtol * 100.0);
            let (nx, nv, nc) = self.run(&mut counter, &x, step);
            let improved = nv < value - self.ftol;
            if nv <= value {
                x = nx;
                value = nv;
                converged = nc;
            }
            if !improved {
                break;
            }
        }
        Minimum { x, value, evals: counter.evals, converged }
    }

    fn run<F: FnMut(&[f64]) -> f64>(&self, f: &mut Counter<F>, x0: &[f64], step: f64) -> (Vec<f64>, f64, bool) {
        let n = x0.len();
        let nf = n as f64;
        let (alpha, beta, gamma, delta) = (1.0, 1.0 + 2.0 / nf, 0.75 - 0.5 / nf, 1.0 - 1.0 / nf);

        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
        pts.push(x0.to_vec());
        for i in 0..n {
            let mut p = x0.to_vec();
            p[i] += step;
            pts.push(p);
        }
        let mut vals: Vec<f64> = pts.iter().map(|p| f.call(p)).collect();
        let mut order: Vec<usize> = (0..=n).collect();
        let mut centroid = vec![0.0; n];
        let mut trial = vec![0.0; n];
        let mut trial2 = vec![0.0; n];

        let converged = loop {
            order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
            let (best, worst, second) = (order[0], order[n], order[n - 1]);
            let spread = vals[worst] - vals[best];
            let size = pts
                .iter()
                .flat_map(|p| p.iter().zip(&pts[best]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if spread <= self.ftol && size <= self.xtol {
                break true;
            }
            if f.evals >= self.max_evals {
                break false;
            }

            centroid.iter_mut().for_each(|c| *c = 0.0);
            for &i in &order[..n] {
                for (c, p) in centroid.iter_mut().zip(&pts[i]) {
                    *c += p / nf;
                }
            }
            let towards = |out: &mut Vec<f64>, coef: f64| {
                for k in 0..n {
                    out[k] = centroid[k] + coef * (pts[worst][k] - centroid[k]);
                }
            };

            towards(&mut trial, -alpha);
            let fr = f.call(&trial);
            if fr < vals[best] {
                towards(&mut trial2, -alpha * beta);
                let fe = f.call(&trial2);
                if fe < fr {
                    pts[worst].copy_from_slice(&trial2);
                    vals[worst] = fe;
                } else {
                    pts[worst].copy_from_slice(&trial);
                    vals[worst] = fr;
                }
                continue;
            }
            if fr < vals[second] {
                pts[worst].copy_from_slice(&trial);
                vals[worst] = fr;
                continue;
            }
            let (coef, limit) = if fr < vals[worst] { (-alpha * gamma, fr) } else { (gamma, vals[worst]) };
            towards(&mut trial2, coef);
            let fc = f.call(&trial2);
            if fc <= limit {
                pts[worst].copy_from_slice(&trial2);
                vals[worst] = fc;
                continue;
            }
            let anchor = pts[best].clone();
            for &i in &order[1..] {
                for k in 0..n {
                    pts[i][k] = anchor[k] + delta * (pts[i][k] - anchor[k]);
                }
                vals[i] = f.call(&pts[i]);
            }
        };
        let best = (0..=n).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap_or(0);
        (pts.swap_remove(best), vals[best], converged)
    }
}
