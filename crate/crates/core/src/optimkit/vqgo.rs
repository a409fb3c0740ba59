use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    minimize_derivative_free, minimize_quasi_newton, AmplitudeBounds, MinimizeOutcome, OptimizerConfig, Termination,
};
use crate::ansatz::{agi_cost, AgiObjective, CircuitParams, CostBackend, SourceGateSet};
use crate::error::{Error, Result};
use crate::numkit::{derive_seed, ComplexMatrix, RandomSource};

/// Best of a set of independent angle optimizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    /// Angles of the best restart, wrapped into `[0, 2pi)`.
    pub best_params: CircuitParams,
    /// Exact infidelity at `best_params`.
    pub best_cost: f64,
    /// Accepted steps of the best restart.
    pub iterations_used: usize,
    pub converged: bool,
    pub termination: Termination,
    pub restart_index: usize,
    /// Cost trace of the best restart as seen by the optimizer.
    pub cost_history: Vec<f64>,
    pub seed: u64,
    /// Exact infidelity at each restart's random start.
    pub restart_initial_costs: Vec<f64>,
    /// Exact infidelity at each restart's final point.
    pub restart_final_costs: Vec<f64>,
    pub total_iterations: usize,
}

struct RestartRun {
    outcome: MinimizeOutcome,
    params: CircuitParams,
    initial_cost: f64,
    final_cost: f64,
}

fn restart_backend(backend: CostBackend, restart: usize) -> CostBackend {
    match backend {
        CostBackend::Exact => CostBackend::Exact,
        CostBackend::Emulated { shots, seed } => CostBackend::Emulated {
            shots,
            seed: derive_seed(seed, restart as u64),
        },
    }
}

fn run_restart(
    target: &ComplexMatrix,
    sources: &SourceGateSet,
    cfg: &OptimizerConfig,
    backend: CostBackend,
    restart: usize,
    warm: Option<&CircuitParams>,
) -> Result<RestartRun> {
    let shape = sources.shape();
    let start = match warm {
        Some(p) if restart == 0 => p.clone(),
        _ => CircuitParams::random(shape, &mut RandomSource::new(cfg.seed).split(restart as u64)),
    };
    let objective = AgiObjective::new(target.clone(), sources.clone(), restart_backend(backend, restart))?;
    let initial_cost = agi_cost(&start, sources, target)?;
    let outcome = minimize_quasi_newton(
        |x| objective.cost_and_gradient(&CircuitParams::from_vec(shape, x.to_vec())?),
        start.as_slice(),
        cfg,
    )?;
    let params = CircuitParams::from_vec(shape, outcome.x.clone())?.wrapped();
    let final_cost = agi_cost(&params, sources, target)?;
    Ok(RestartRun {
        outcome,
        params,
        initial_cost,
        final_cost,
    })
}

/// Multistart angle optimization of the layered circuit built on `sources`.
///
/// Restart `r` starts from angles drawn uniformly in `[0, 2pi)` by the RNG
/// split `r` of `cfg.seed` and runs L-BFGS with parameter-shift gradients
/// from `backend`. Restarts run in parallel; the result depends only on the
/// inputs. Restarts are ranked by exact infidelity at their wrapped final
/// angles, ties going to the lowest index.
pub fn vqgo(
    target: &ComplexMatrix,
    sources: &SourceGateSet,
    cfg: &OptimizerConfig,
    backend: CostBackend,
) -> Result<OptimizationResult> {
    vqgo_with_start(target, sources, cfg, backend, None)
}

/// [`vqgo`] with restart 0 started from `warm` instead of random angles.
pub fn vqgo_with_start(
    target: &ComplexMatrix,
    sources: &SourceGateSet,
    cfg: &OptimizerConfig,
    backend: CostBackend,
    warm: Option<&CircuitParams>,
) -> Result<OptimizationResult> {
    cfg.validate()?;
    target.ensure_dim(sources.dim())?;
    target.ensure_unitary()?;
    if let Some(p) = warm {
        if p.shape() != sources.shape() {
            return Err(Error::InvalidInput(format!(
                "warm start shape {:?} does not match sources {:?}",
                p.shape(),
                sources.shape()
            )));
        }
    }
    let runs: Vec<RestartRun> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            run_restart(target, sources, cfg, backend, r, warm).map_err(|e| Error::OptimizerAborted {
                restart: r,
                reason: e.to_string(),
            })
        })
        .collect::<Result<_>>()?;

    let best_index = runs
        .iter()
        .enumerate()
        .fold(0, |best, (i, run)| if run.final_cost < runs[best].final_cost { i } else { best });
    let restart_initial_costs = runs.iter().map(|r| r.initial_cost).collect();
    let restart_final_costs = runs.iter().map(|r| r.final_cost).collect();
    let total_iterations = runs.iter().map(|r| r.outcome.iterations).sum();
    let best = runs.into_iter().nth(best_index).expect("at least one restart");
    Ok(OptimizationResult {
        best_cost: best.final_cost,
        best_params: best.params,
        iterations_used: best.outcome.iterations,
        converged: best.outcome.converged(),
        termination: best.outcome.termination,
        restart_index: best_index,
        cost_history: best.outcome.cost_history,
        seed: cfg.seed,
        restart_initial_costs,
        restart_final_costs,
        total_iterations,
    })
}

/// Settings of the two nested loops of [`concatenated_optimize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConcatenatedConfig {
    pub inner: OptimizerConfig,
    pub backend: CostBackend,
    /// Simplex updates allowed in the amplitude search.
    pub outer_max_iterations: usize,
    pub outer_cost_tolerance: f64,
    /// Restarts per outer evaluation; `None` uses `inner.restarts`.
    pub search_restarts: Option<usize>,
    /// Start restart 0 of each outer evaluation from the best angles found so far.
    pub warm_start: bool,
}

impl Default for ConcatenatedConfig {
    fn default() -> Self {
        Self {
            inner: OptimizerConfig::default(),
            backend: CostBackend::Exact,
            outer_max_iterations: 200,
            outer_cost_tolerance: 1e-12,
            search_restarts: None,
            warm_start: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcatenatedResult {
    pub omega_mhz: Vec<f64>,
    /// Angle optimization at `omega_mhz`.
    pub inner: OptimizationResult,
    pub outer_evaluations: usize,
    pub outer_iterations: usize,
    pub outer_converged: bool,
    /// Best outer cost after each simplex update.
    pub outer_history: Vec<f64>,
}

/// Amplitude search wrapped around [`vqgo`].
///
/// The outer cost at amplitudes `omega` is the best infidelity of `vqgo` on
/// `factory(omega, t_ns)`, always with the same inner seed. The outer search
/// is a bounded Nelder-Mead simplex started at `omega0`.
///
/// With `search_restarts` or `warm_start` set, the search runs the cheaper
/// inner loop and the returned inner result comes from a final `vqgo` with
/// the full `inner` settings at the chosen amplitudes. The search is
/// sequential, so warm starts keep the result reproducible.
pub fn concatenated_optimize<F>(
    target: &ComplexMatrix,
    factory: F,
    omega0: &[f64],
    bounds: AmplitudeBounds,
    t_ns: f64,
    cfg: &ConcatenatedConfig,
) -> Result<ConcatenatedResult>
where
    F: Fn(&[f64], f64) -> Result<SourceGateSet>,
{
    bounds.validate()?;
    cfg.inner.validate()?;
    let search = OptimizerConfig {
        restarts: cfg.search_restarts.unwrap_or(cfg.inner.restarts),
        ..cfg.inner
    };
    let plain_search = cfg.search_restarts.is_none() && !cfg.warm_start;
    let mut evaluated: Vec<(Vec<f64>, OptimizationResult)> = Vec::new();
    let mut best_angles: Option<(f64, CircuitParams)> = None;
    let outer_cfg = OptimizerConfig {
        max_iterations: cfg.outer_max_iterations,
        cost_tolerance: cfg.outer_cost_tolerance,
        ..cfg.inner
    };
    let outcome = minimize_derivative_free(
        |omega| {
            let sources = factory(omega, t_ns)?;
            let warm = best_angles.as_ref().filter(|_| cfg.warm_start).map(|(_, p)| p);
            let result = vqgo_with_start(target, &sources, &search, cfg.backend, warm)?;
            let cost = result.best_cost;
            if best_angles.as_ref().is_none_or(|(c, _)| cost < *c) {
                best_angles = Some((cost, result.best_params.clone()));
            }
            evaluated.push((omega.to_vec(), result));
            Ok(cost)
        },
        omega0,
        &bounds.to_box(omega0.len()),
        &outer_cfg,
    )?;
    let searched = evaluated
        .into_iter()
        .find(|(omega, _)| *omega == outcome.x)
        .map(|(_, r)| r)
        .expect("outer optimum was evaluated");
    let inner = if plain_search {
        searched
    } else {
        let sources = factory(&outcome.x, t_ns)?;
        let warm = cfg.warm_start.then_some(&searched.best_params);
        let polished = vqgo_with_start(target, &sources, &cfg.inner, cfg.backend, warm)?;
        if polished.best_cost <= searched.best_cost {
            polished
        } else {
            searched
        }
    };
    Ok(ConcatenatedResult {
        omega_mhz: outcome.x.clone(),
        inner,
        outer_evaluations: outcome.evaluations,
        outer_iterations: outcome.iterations,
        outer_converged: outcome.converged(),
        outer_history: outcome.cost_history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::devices::{opposite_phase_sources, CrossResonancePair};
    use crate::gates::{cnot, swap};
    use crate::numkit::haar_special_unitary;

    fn quick() -> OptimizerConfig {
        OptimizerConfig::default().with_seed(11)
    }

    #[test]
    fn exact_representation_at_depth_one() {
        let sources = SourceGateSet::new(vec![cnot()]).unwrap();
        let r = vqgo(&cnot(), &sources, &quick(), CostBackend::Exact).unwrap();
        assert!(r.best_cost < 1e-10, "{}", r.best_cost);
        let again = agi_cost(&r.best_params, &sources, &cnot()).unwrap();
        assert!((again - r.best_cost).abs() < 1e-12);
    }

    #[test]
    fn best_is_never_worse_than_any_start() {
        let mut rng = RandomSource::new(4);
        let target = haar_special_unitary(4, &mut rng);
        let sources = SourceGateSet::repeated(cnot(), 2).unwrap();
        let r = vqgo(&target, &sources, &quick(), CostBackend::Exact).unwrap();
        assert_eq!(r.restart_final_costs.len(), 8);
        for (&init, &fin) in r.restart_initial_costs.iter().zip(&r.restart_final_costs) {
            assert!(r.best_cost <= init + 1e-15);
            assert!(r.best_cost <= fin);
        }
        assert!(r.cost_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn depth_three_reaches_random_targets() {
        let mut rng = RandomSource::new(2024);
        let sources = SourceGateSet::repeated(cnot(), 3).unwrap();
        for k in 0..3 {
            let target = haar_special_unitary(4, &mut rng);
            let r = vqgo(&target, &sources, &quick().with_seed(k), CostBackend::Exact).unwrap();
            assert!(r.best_cost < 1e-6, "target {k}: {}", r.best_cost);
        }
    }

    #[test]
    fn swap_sources_cannot_make_cnot() {
        let sources = SourceGateSet::repeated(swap(), 2).unwrap();
        let r = vqgo(&cnot(), &sources, &quick(), CostBackend::Exact).unwrap();
        assert!(r.best_cost >= 0.1, "{}", r.best_cost);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let mut rng = RandomSource::new(9);
        let target = haar_special_unitary(4, &mut rng);
        let sources = SourceGateSet::repeated(cnot(), 3).unwrap();
        let a = vqgo(&target, &sources, &quick(), CostBackend::Exact).unwrap();
        let b = vqgo(&target, &sources, &quick(), CostBackend::Exact).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn emulated_backend_converges_without_shots() {
        let sources = SourceGateSet::new(vec![cnot()]).unwrap();
        let backend = CostBackend::Emulated { shots: None, seed: 3 };
        let r = vqgo(&cnot(), &sources, &quick().with_restarts(3), backend).unwrap();
        assert!(r.best_cost < 1e-9, "{}", r.best_cost);
    }

    #[test]
    fn flat_outer_landscape_keeps_start() {
        let cfg = ConcatenatedConfig {
            inner: quick().with_restarts(2),
            ..ConcatenatedConfig::default()
        };
        let factory = |_: &[f64], _: f64| SourceGateSet::repeated(cnot(), 1);
        let out = concatenated_optimize(&cnot(), factory, &[50.0], AmplitudeBounds::default(), 75.0, &cfg).unwrap();
        assert_eq!(out.omega_mhz, vec![50.0]);
        assert!(out.outer_iterations <= 2);
        let direct = vqgo(&cnot(), &factory(&[50.0], 75.0).unwrap(), &cfg.inner, CostBackend::Exact).unwrap();
        assert_eq!(out.inner, direct);
    }

    #[test]
    fn cross_resonance_amplitude_search() {
        let pair = CrossResonancePair {
            delta_mhz: 200.0,
            g_mhz: 5.0,
            eps: 0.0,
            phi_rad: std::f64::consts::FRAC_PI_4,
        };
        let cfg = ConcatenatedConfig {
            inner: quick().with_restarts(4),
            outer_max_iterations: 40,
            ..ConcatenatedConfig::default()
        };
        let factory = |omega: &[f64], t: f64| SourceGateSet::new(opposite_phase_sources(&pair, omega[0], t)?);
        let out = concatenated_optimize(&cnot(), factory, &[50.0], AmplitudeBounds::default(), 75.0, &cfg).unwrap();
        assert!((40.0..=160.0).contains(&out.omega_mhz[0]), "{:?}", out.omega_mhz);
        assert!(out.inner.best_cost < 1e-3, "{}", out.inner.best_cost);
    }
}
