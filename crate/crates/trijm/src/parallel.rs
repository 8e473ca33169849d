//! Rayon drivers for sweeps and simulated experiments.
//!
//! Every grid point is evaluated independently with its own seed and RNG
//! streams, and results are collected in grid order, so the output does not
//! depend on the number of threads.

use rayon::prelude::*;
use trijm_core::bound::SolverConfig;
use trijm_core::ion::{experiment_point, experiment_setup, ArgminSource, ExperimentConfig, ExperimentRow};
use trijm_core::scenarios::{sweep_point, SweepRow, SweepSpec};
use trijm_core::Result;

pub fn par_sweep(spec: &SweepSpec, cfg: &SolverConfig) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    cfg.validate()?;
    spec.points()
        .into_par_iter()
        .enumerate()
        .map(|(i, (phi, varphi))| sweep_point(spec, i, phi, varphi, cfg))
        .collect()
}

pub fn par_experiment(spec: &SweepSpec, source: &ArgminSource, cfg: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    spec.validate()?;
    cfg.shots.validate()?;
    cfg.noise.validate()?;
    spec.points()
        .into_par_iter()
        .enumerate()
        .map(|(i, (phi, varphi))| {
            let (triad, approx, povm, infeasible) = experiment_setup(spec, i, phi, varphi, source)?;
            let mut row = experiment_point(i, phi, varphi, &triad, &approx, &povm, cfg)?;
            row.infeasible |= infeasible;
            Ok(row)
        })
        .collect()
}

/// Runs `f` on a pool of `threads` workers, or on the global pool when
/// `threads` is `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => Ok(rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(f)),
    }
}
