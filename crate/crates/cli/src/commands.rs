//! The four experiments.

use std::f64::consts::FRAC_PI_4;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use vqgo_core::analysis::{canonical_gate, entangling_power, CartanCoordinates};
use vqgo_core::channels::agi;
use vqgo_core::devices::{
    cr_gate, fixtures, four_cr_gate, syndrome_target, tpcx, CrossResonancePair, DriveSpec, FourQubitDevice,
};
use vqgo_core::gates::{cnot, swap};
use vqgo_core::numkit::{derive_seed, haar_special_unitary, RandomSource};
use vqgo_core::optimkit::{
    concatenated_optimize, minimize_derivative_free, vqgo, vqgo_with_start, AmplitudeBounds, BoxBounds, ConcatenatedConfig,
    ConcatenatedResult, OptimizationResult, Termination,
};
use vqgo_core::{format_sig17, CircuitParams, ComplexMatrix, CostBackend, OptimizerConfig, SourceGateSet};

use crate::artifact::{config_hash, join_floats, Artifact, TOOL_NAME, TOOL_VERSION};
use crate::config::{
    CartanMapConfig, CnotSweepConfig, Crosstalk, Experiment, ExperimentConfig, GateSpec, LayerSigns,
    SingleOptimizeConfig, SyndromeSweepConfig,
};
use crate::error::CliError;

/// Cross-resonance sources alternating `U(-omega), U(+omega), ...`.
pub fn cr_sources(pair: &CrossResonancePair, omega_mhz: f64, t_ns: f64, depth: usize) -> vqgo_core::Result<SourceGateSet> {
    let minus = cr_gate(pair, &DriveSpec::new(-omega_mhz, t_ns)?)?;
    let plus = cr_gate(pair, &DriveSpec::new(omega_mhz, t_ns)?)?;
    SourceGateSet::new((0..depth).map(|i| if i % 2 == 0 { minus.clone() } else { plus.clone() }).collect())
}

/// The two simultaneous four-pair drive layers of the syndrome circuit.
pub fn syndrome_sources(
    dev: &FourQubitDevice,
    omegas_mhz: &[f64; 4],
    t_ns: f64,
    signs: LayerSigns,
) -> vqgo_core::Result<SourceGateSet> {
    let second = four_cr_gate(dev, omegas_mhz, t_ns)?;
    let first = match signs {
        LayerSigns::Shared => second.clone(),
        LayerSigns::Opposite => four_cr_gate(dev, &omegas_mhz.map(|w| -w), t_ns)?,
    };
    SourceGateSet::new(vec![first, second])
}

pub fn canonical_sources(c: CartanCoordinates, depth: usize) -> vqgo_core::Result<SourceGateSet> {
    SourceGateSet::repeated(canonical_gate(c), depth)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Tpcx,
    Vqgo,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Tpcx => "tpcx",
            Method::Vqgo => "vqgo",
        }
    }
}

/// Optimization outcome columns shared by every table.
#[derive(Debug, Clone, PartialEq)]
pub struct RowOutcome {
    /// `NaN` when the optimization aborted.
    pub agi: f64,
    pub restarts: usize,
    pub iterations: usize,
    pub converged: bool,
    /// `ok`, or `aborted:` followed by the reason.
    pub status: String,
    pub theta: Vec<f64>,
}

impl RowOutcome {
    fn fixed(agi: f64) -> Self {
        Self {
            agi,
            restarts: 0,
            iterations: 0,
            converged: true,
            status: "ok".into(),
            theta: Vec::new(),
        }
    }

    fn from_result(r: &vqgo_core::Result<OptimizationResult>, restarts: usize) -> Self {
        match r {
            Ok(r) => Self {
                agi: r.best_cost,
                restarts,
                iterations: r.iterations_used,
                converged: r.converged,
                status: "ok".into(),
                theta: r.best_params.as_slice().to_vec(),
            },
            Err(e) => Self {
                agi: f64::NAN,
                restarts,
                iterations: 0,
                converged: false,
                status: format!("aborted:{}", e.to_string().replace([',', '\n'], ";")),
                theta: Vec::new(),
            },
        }
    }

    fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    const COLUMNS: [&'static str; 6] = ["agi", "restarts", "iterations", "converged", "status", "theta"];

    fn cells(&self) -> Vec<String> {
        vec![
            format_sig17(self.agi),
            self.restarts.to_string(),
            self.iterations.to_string(),
            self.converged.to_string(),
            self.status.clone(),
            join_floats(&self.theta, ";"),
        ]
    }
}

fn header(lead: &[&str]) -> Vec<String> {
    lead.iter().chain(RowOutcome::COLUMNS.iter()).map(|s| s.to_string()).collect()
}

fn seeded(opt: &OptimizerConfig, seed: u64) -> OptimizerConfig {
    opt.with_seed(seed)
}

/// Lowest TPCX infidelity over the amplitude bounds: a 1 MHz scan followed
/// by a simplex refinement around the best scan point.
pub fn optimize_tpcx_amplitude(
    pair: &CrossResonancePair,
    t_ns: f64,
    bounds: AmplitudeBounds,
) -> vqgo_core::Result<(f64, f64)> {
    let target = cnot();
    let cost = |omega: f64| -> vqgo_core::Result<f64> { agi(&target, &tpcx(pair, omega, t_ns)?) };
    let steps = (bounds.upper - bounds.lower).ceil() as usize;
    let mut best = (bounds.lower, cost(bounds.lower)?);
    for k in 1..=steps {
        let omega = (bounds.lower + k as f64).min(bounds.upper);
        let c = cost(omega)?;
        if c < best.1 {
            best = (omega, c);
        }
    }
    let window = BoxBounds::new(
        vec![(best.0 - 1.0).max(bounds.lower)],
        vec![(best.0 + 1.0).min(bounds.upper)],
    )?;
    let refine = OptimizerConfig {
        cost_tolerance: 1e-15,
        max_iterations: 500,
        ..OptimizerConfig::default()
    };
    let out = minimize_derivative_free(|x| cost(x[0]), &[best.0], &window, &refine)?;
    Ok((out.x[0], out.cost))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeSearch {
    pub omega_mhz: Vec<f64>,
    pub agi: f64,
    pub outer_evaluations: usize,
    pub outer_converged: bool,
    /// Failure message when the search aborted and the start amplitudes were kept.
    pub failure: Option<String>,
    /// Best angles at `omega_mhz`; used to warm-start the sweep rows.
    pub best_params: Option<CircuitParams>,
}

impl AmplitudeSearch {
    fn from_result(r: vqgo_core::Result<ConcatenatedResult>, omega0: &[f64]) -> Self {
        match r {
            Ok(r) => Self {
                omega_mhz: r.omega_mhz,
                agi: r.inner.best_cost,
                outer_evaluations: r.outer_evaluations,
                outer_converged: r.outer_converged,
                failure: None,
                best_params: Some(r.inner.best_params),
            },
            Err(e) => Self {
                omega_mhz: omega0.to_vec(),
                agi: f64::NAN,
                outer_evaluations: 0,
                outer_converged: false,
                failure: Some(e.to_string()),
                best_params: None,
            },
        }
    }

    fn describe(&self) -> String {
        let mut s = format!(
            "omega_mhz=[{}] agi={} outer_evaluations={} outer_converged={}",
            join_floats(&self.omega_mhz, " "),
            format_sig17(self.agi),
            self.outer_evaluations,
            self.outer_converged
        );
        if let Some(f) = &self.failure {
            s.push_str(&format!(" failure={f}"));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnotCase {
    pub eps: f64,
    pub vqgo: AmplitudeSearch,
    pub tpcx_omega_mhz: f64,
    pub tpcx_agi: f64,
    pub reference: Option<fixtures::CrossResonanceCase>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnotRow {
    pub method: Method,
    pub eps: f64,
    pub phi_rad: f64,
    pub omega_mhz: f64,
    pub t_ns: f64,
    pub outcome: RowOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CnotSweepOutput {
    pub cases: Vec<CnotCase>,
    pub rows: Vec<CnotRow>,
}

impl CnotSweepOutput {
    pub fn row(&self, method: Method, eps: f64, t_ns: f64) -> Option<&CnotRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.eps == eps && (r.t_ns - t_ns).abs() < 1e-9)
    }

    pub fn artifact(&self) -> Artifact {
        let mut metadata = Vec::new();
        for (i, c) in self.cases.iter().enumerate() {
            let mut v = format!(
                "eps={} vqgo {} tpcx omega_mhz={} agi={}",
                format_sig17(c.eps),
                c.vqgo.describe(),
                format_sig17(c.tpcx_omega_mhz),
                format_sig17(c.tpcx_agi)
            );
            if let Some(r) = &c.reference {
                v.push_str(&format!(
                    " reference_vqgo_omega_mhz={} reference_tpcx_omega_mhz={}",
                    r.reference_omega_vqgo_mhz, r.reference_omega_tpcx_mhz
                ));
            }
            metadata.push((format!("case[{i}]"), v));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut cells = vec![
                    r.method.as_str().to_string(),
                    format_sig17(r.eps),
                    format_sig17(r.phi_rad),
                    format_sig17(r.omega_mhz),
                    format_sig17(r.t_ns),
                ];
                cells.extend(r.outcome.cells());
                cells
            })
            .collect();
        Artifact {
            metadata,
            header: header(&["method", "eps", "phi_rad", "omega_mhz", "t_ns"]),
            rows,
        }
    }
}

fn matching_reference(pair: &CrossResonancePair) -> Option<fixtures::CrossResonanceCase> {
    fixtures::cross_resonance_table().cases.into_iter().find(|c| {
        let p = c.pair;
        p.delta_mhz == pair.delta_mhz && p.g_mhz == pair.g_mhz && p.eps == pair.eps && (p.phi_rad - pair.phi_rad).abs() < 1e-12
    })
}

pub fn cmd_cnot_sweep(cfg: &ExperimentConfig, sweep: &CnotSweepConfig) -> Result<CnotSweepOutput, CliError> {
    let opt = cfg.optimizer();
    let bounds = AmplitudeBounds::new(sweep.amplitude_bounds_mhz[0], sweep.amplitude_bounds_mhz[1])?;
    let target = cnot();
    let cases: Vec<CnotCase> = sweep
        .crosstalk_eps
        .par_iter()
        .enumerate()
        .map(|(c, &eps)| -> Result<CnotCase, CliError> {
            let pair = sweep.pair(eps);
            let concat = ConcatenatedConfig {
                inner: seeded(&opt, derive_seed(cfg.seed, c as u64)),
                outer_max_iterations: sweep.outer_max_iterations,
                outer_cost_tolerance: sweep.outer_cost_tolerance,
                ..ConcatenatedConfig::default()
            };
            let depth = sweep.depth;
            let factory = |omega: &[f64], t: f64| cr_sources(&pair, omega[0], t, depth);
            let search = concatenated_optimize(&target, factory, &[sweep.omega0_mhz], bounds, sweep.optimize_t_ns, &concat);
            let (tpcx_omega_mhz, tpcx_agi) = optimize_tpcx_amplitude(&pair, sweep.optimize_t_ns, bounds)?;
            Ok(CnotCase {
                eps,
                vqgo: AmplitudeSearch::from_result(search, &[sweep.omega0_mhz]),
                tpcx_omega_mhz,
                tpcx_agi,
                reference: matching_reference(&pair),
            })
        })
        .collect::<Result<_, _>>()?;

    let times = sweep.t_sweep.points();
    let tasks: Vec<(usize, usize)> = (0..cases.len()).flat_map(|c| (0..times.len()).map(move |k| (c, k))).collect();
    let rows: Vec<[CnotRow; 2]> = tasks
        .par_iter()
        .map(|&(c, k)| -> Result<[CnotRow; 2], CliError> {
            let case = &cases[c];
            let pair = sweep.pair(case.eps);
            let t = times[k];
            let tpcx_agi = agi(&target, &tpcx(&pair, case.tpcx_omega_mhz, t)?)?;
            let omega = case.vqgo.omega_mhz[0];
            let point_cfg = seeded(&opt, derive_seed(derive_seed(cfg.seed, c as u64), k as u64 + 1));
            let result = cr_sources(&pair, omega, t, sweep.depth)
                .and_then(|s| vqgo_with_start(&target, &s, &point_cfg, CostBackend::Exact, case.vqgo.best_params.as_ref()));
            let base = |method, omega_mhz, outcome| CnotRow {
                method,
                eps: case.eps,
                phi_rad: sweep.phi_rad,
                omega_mhz,
                t_ns: t,
                outcome,
            };
            Ok([
                base(Method::Tpcx, case.tpcx_omega_mhz, RowOutcome::fixed(tpcx_agi)),
                base(Method::Vqgo, omega, RowOutcome::from_result(&result, opt.restarts)),
            ])
        })
        .collect::<Result<_, _>>()?;
    Ok(CnotSweepOutput {
        cases,
        rows: rows.into_iter().flatten().collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyndromeSetting {
    pub crosstalk: Crosstalk,
    pub search: AmplitudeSearch,
    pub reference_omega_mhz: Option<[f64; 4]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyndromeRow {
    pub crosstalk: Crosstalk,
    pub omega_mhz: [f64; 4],
    pub t_ns: f64,
    pub outcome: RowOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyndromeSweepOutput {
    pub settings: Vec<SyndromeSetting>,
    pub rows: Vec<SyndromeRow>,
    /// Duration of both source layers at the optimization time.
    pub source_time_ns: f64,
}

impl SyndromeSweepOutput {
    pub fn row(&self, crosstalk: Crosstalk, t_ns: f64) -> Option<&SyndromeRow> {
        self.rows
            .iter()
            .find(|r| r.crosstalk == crosstalk && (r.t_ns - t_ns).abs() < 1e-9)
    }

    pub fn artifact(&self) -> Artifact {
        let mut metadata = vec![("source_time_ns".to_string(), format_sig17(self.source_time_ns))];
        for s in &self.settings {
            let mut v = s.search.describe();
            if let Some(r) = s.reference_omega_mhz {
                v.push_str(&format!(" reference_omega_mhz=[{}]", join_floats(&r, " ")));
            }
            metadata.push((format!("crosstalk[{}]", s.crosstalk.as_str()), v));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut cells = vec![Method::Vqgo.as_str().to_string(), r.crosstalk.as_str().to_string()];
                cells.extend(r.omega_mhz.iter().map(|&w| format_sig17(w)));
                cells.push(format_sig17(r.t_ns));
                cells.extend(r.outcome.cells());
                cells
            })
            .collect();
        Artifact {
            metadata,
            header: header(&[
                "method",
                "crosstalk",
                "omega1_mhz",
                "omega2_mhz",
                "omega3_mhz",
                "omega4_mhz",
                "t_ns",
            ]),
            rows,
        }
    }
}

pub fn cmd_syndrome_sweep(cfg: &ExperimentConfig, sweep: &SyndromeSweepConfig) -> Result<SyndromeSweepOutput, CliError> {
    let opt = cfg.optimizer();
    let bounds = AmplitudeBounds::new(sweep.amplitude_bounds_mhz[0], sweep.amplitude_bounds_mhz[1])?;
    let target = syndrome_target();
    let table = fixtures::four_qubit_table();
    let settings: Vec<SyndromeSetting> = sweep
        .crosstalk
        .par_iter()
        .enumerate()
        .map(|(s, &crosstalk)| {
            let dev = sweep.device(crosstalk);
            let concat = ConcatenatedConfig {
                inner: seeded(&opt, derive_seed(cfg.seed, s as u64)),
                outer_max_iterations: sweep.outer_max_iterations,
                outer_cost_tolerance: sweep.outer_cost_tolerance,
                search_restarts: sweep.search_restarts,
                warm_start: sweep.warm_start,
                ..ConcatenatedConfig::default()
            };
            let factory =
                |w: &[f64], t: f64| syndrome_sources(&dev, &[w[0], w[1], w[2], w[3]], t, sweep.layer_signs);
            let search = concatenated_optimize(&target, factory, &sweep.omega0_mhz, bounds, sweep.optimize_t_ns, &concat);
            let reference_omega_mhz = sweep.pairs.is_none().then_some(match crosstalk {
                Crosstalk::Off => table.reference_omega_no_crosstalk_mhz,
                Crosstalk::On => table.reference_omega_crosstalk_mhz,
            });
            SyndromeSetting {
                crosstalk,
                search: AmplitudeSearch::from_result(search, &sweep.omega0_mhz),
                reference_omega_mhz,
            }
        })
        .collect();

    let times = sweep.t_sweep.points();
    let tasks: Vec<(usize, usize)> = (0..settings.len()).flat_map(|s| (0..times.len()).map(move |k| (s, k))).collect();
    let rows: Vec<SyndromeRow> = tasks
        .par_iter()
        .map(|&(s, k)| {
            let setting = &settings[s];
            let w = &setting.search.omega_mhz;
            let omega_mhz = [w[0], w[1], w[2], w[3]];
            let t = times[k];
            let point_cfg = seeded(&opt, derive_seed(derive_seed(cfg.seed, s as u64), k as u64 + 1));
            let result = syndrome_sources(&sweep.device(setting.crosstalk), &omega_mhz, t, sweep.layer_signs)
                .and_then(|src| {
                    vqgo_with_start(&target, &src, &point_cfg, CostBackend::Exact, setting.search.best_params.as_ref())
                });
            SyndromeRow {
                crosstalk: setting.crosstalk,
                omega_mhz,
                t_ns: t,
                outcome: RowOutcome::from_result(&result, opt.restarts),
            }
        })
        .collect();
    Ok(SyndromeSweepOutput {
        settings,
        rows,
        source_time_ns: 2.0 * sweep.optimize_t_ns,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartanRow {
    pub coords: CartanCoordinates,
    pub entangling_power: f64,
    /// `1 - agi` of the best synthesized CNOT; `NaN` when aborted.
    pub best_agf: f64,
    pub outcome: RowOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartanMapOutput {
    pub grid_points: usize,
    pub rows: Vec<CartanRow>,
}

impl CartanMapOutput {
    pub fn artifact(&self) -> Artifact {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut cells: Vec<String> = r.coords.as_array().iter().map(|&c| format_sig17(c)).collect();
                cells.push(format_sig17(r.entangling_power));
                cells.push(format_sig17(r.best_agf));
                cells.extend(r.outcome.cells());
                cells
            })
            .collect();
        Artifact {
            metadata: vec![("grid_points_per_axis".into(), self.grid_points.to_string())],
            header: header(&["c_x", "c_y", "c_z", "entangling_power", "best_agf"]),
            rows,
        }
    }
}

/// Grid value `index / (points - 1) * pi/4`.
pub fn cartan_grid_value(index: usize, points: usize) -> f64 {
    FRAC_PI_4 * index as f64 / (points - 1) as f64
}

pub fn cmd_cartan_map(cfg: &ExperimentConfig, map: &CartanMapConfig) -> Result<CartanMapOutput, CliError> {
    let opt = cfg.optimizer();
    let n = map.grid_points;
    let target = cnot();
    let rows: Vec<CartanRow> = (0..n * n * n)
        .into_par_iter()
        .map(|idx| -> Result<CartanRow, CliError> {
            let coords = CartanCoordinates::new(
                cartan_grid_value(idx / (n * n), n),
                cartan_grid_value((idx / n) % n, n),
                cartan_grid_value(idx % n, n),
            );
            let ep = entangling_power(&canonical_gate(coords))?;
            let result = canonical_sources(coords, map.depth)
                .and_then(|s| vqgo(&target, &s, &seeded(&opt, derive_seed(cfg.seed, idx as u64)), CostBackend::Exact));
            let outcome = RowOutcome::from_result(&result, opt.restarts);
            Ok(CartanRow {
                coords,
                entangling_power: ep,
                best_agf: 1.0 - outcome.agi,
                outcome,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(CartanMapOutput { grid_points: n, rows })
}

pub fn build_gate(spec: &GateSpec) -> Result<ComplexMatrix, CliError> {
    Ok(match spec {
        GateSpec::Cnot => cnot(),
        GateSpec::Swap => swap(),
        GateSpec::Identity { n_qubits } => {
            if *n_qubits == 0 || *n_qubits > 10 {
                return Err(CliError::Config(format!("identity needs 1..=10 qubits, got {n_qubits}")));
            }
            ComplexMatrix::identity(1 << n_qubits)
        }
        GateSpec::HaarSpecialUnitary { n_qubits, seed } => {
            if *n_qubits == 0 || *n_qubits > 10 {
                return Err(CliError::Config(format!("haar_special_unitary needs 1..=10 qubits, got {n_qubits}")));
            }
            haar_special_unitary(1 << n_qubits, &mut RandomSource::new(*seed))
        }
        GateSpec::Canonical { c_rad } => canonical_gate(CartanCoordinates::new(c_rad[0], c_rad[1], c_rad[2])),
        GateSpec::CrossResonance { pair, omega_mhz, t_ns } => {
            pair.validate()?;
            cr_gate(pair, &DriveSpec::new(*omega_mhz, *t_ns)?)?
        }
        GateSpec::Tpcx { pair, omega_mhz, t_ns } => {
            pair.validate()?;
            tpcx(pair, *omega_mhz, *t_ns)?
        }
        GateSpec::SyndromeTarget => syndrome_target(),
    })
}

/// Structured report of a single synthesis run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleReport {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config_sha256: String,
    pub config: ExperimentConfig,
    pub agi: f64,
    pub theta: Vec<f64>,
    pub restarts: usize,
    pub restart_index: usize,
    pub iterations: usize,
    pub converged: bool,
    pub termination: Termination,
    pub cost_history: Vec<f64>,
    pub restart_final_costs: Vec<f64>,
    pub wall_time_s: f64,
}

pub fn single_problem(single: &SingleOptimizeConfig) -> Result<(ComplexMatrix, SourceGateSet), CliError> {
    let target = build_gate(&single.target)?;
    let gates = single.sources.iter().map(build_gate).collect::<Result<Vec<_>, _>>()?;
    let sources = SourceGateSet::new(gates).map_err(|e| CliError::Config(format!("sources: {e}")))?;
    if target.dim() != sources.dim() {
        return Err(CliError::Config(format!(
            "target acts on dimension {} but sources on {}",
            target.dim(),
            sources.dim()
        )));
    }
    Ok((target, sources))
}

pub fn cmd_single_optimize(cfg: &ExperimentConfig, single: &SingleOptimizeConfig) -> Result<SingleReport, CliError> {
    let (target, sources) = single_problem(single)?;
    let opt = seeded(&cfg.optimizer(), cfg.seed);
    let start = Instant::now();
    let r = vqgo(&target, &sources, &opt, single.backend)?;
    Ok(SingleReport {
        tool: TOOL_NAME.into(),
        version: TOOL_VERSION.into(),
        seed: cfg.seed,
        config_sha256: config_hash(cfg),
        config: cfg.clone(),
        agi: r.best_cost,
        theta: r.best_params.as_slice().to_vec(),
        restarts: opt.restarts,
        restart_index: r.restart_index,
        iterations: r.iterations_used,
        converged: r.converged,
        termination: r.termination,
        cost_history: r.cost_history,
        restart_final_costs: r.restart_final_costs,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Output of any experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentOutput {
    CnotSweep(CnotSweepOutput),
    SyndromeSweep(SyndromeSweepOutput),
    CartanMap(CartanMapOutput),
    SingleOptimize(Box<SingleReport>),
}

impl ExperimentOutput {
    /// File contents: CSV for sweeps and maps, JSON for single runs.
    pub fn render(&self, cfg: &ExperimentConfig) -> String {
        match self {
            ExperimentOutput::CnotSweep(o) => o.artifact().render(cfg),
            ExperimentOutput::SyndromeSweep(o) => o.artifact().render(cfg),
            ExperimentOutput::CartanMap(o) => o.artifact().render(cfg),
            ExperimentOutput::SingleOptimize(r) => {
                serde_json::to_string_pretty(r).expect("report serializes") + "\n"
            }
        }
    }

    pub fn flagged_rows(&self) -> usize {
        match self {
            ExperimentOutput::CnotSweep(o) => o.rows.iter().filter(|r| !r.outcome.is_ok()).count(),
            ExperimentOutput::SyndromeSweep(o) => o.rows.iter().filter(|r| !r.outcome.is_ok()).count(),
            ExperimentOutput::CartanMap(o) => o.rows.iter().filter(|r| !r.outcome.is_ok()).count(),
            ExperimentOutput::SingleOptimize(_) => 0,
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, CliError> {
    Ok(match &cfg.experiment {
        Experiment::CnotSweep(s) => ExperimentOutput::CnotSweep(cmd_cnot_sweep(cfg, s)?),
        Experiment::SyndromeSweep(s) => ExperimentOutput::SyndromeSweep(cmd_syndrome_sweep(cfg, s)?),
        Experiment::CartanMap(m) => ExperimentOutput::CartanMap(cmd_cartan_map(cfg, m)?),
        Experiment::SingleOptimize(s) => ExperimentOutput::SingleOptimize(Box::new(cmd_single_optimize(cfg, s)?)),
    })
}
