//! Suite runner: solve each case with each formulation, compare against
//! reference ACOPF objectives, and write the tables and figures.

mod report;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use acopf_conic::{BackendRegistry, SolveSettings, SolveStatus};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cycles::{cycle_from_buses, cycle_sums, fundamental_cycles, solution_link_angles, Cycle};
use crate::network::{build_ybus, load_case, NetworkCase};
use crate::powerflow::{verify_realizability, PowerFlowOptions};
use crate::socp::{build, extract_solution, FormulationKind, RelaxationSolution, DEFAULT_EPS_MAX};

pub use report::{emit_reports, write_cycle_csv, ReportError, ReportFiles};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Typical,
    Congested,
}

impl Condition {
    pub fn label(self) -> &'static str {
        match self {
            Condition::Typical => "typical",
            Condition::Congested => "congested",
        }
    }
}

/// Where a reference objective comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Published,
    LocalHeuristic,
}

impl Provenance {
    pub fn label(self) -> &'static str {
        match self {
            Provenance::Published => "published",
            Provenance::LocalHeuristic => "local-heuristic",
        }
    }
}

/// One entry of the reference file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceEntry {
    pub case: String,
    pub condition: Condition,
    /// Best-known exact ACOPF objective, $/h.
    pub ob_ac: f64,
    pub source: Provenance,
    /// Optional per-bus voltage magnitudes of the ACOPF solution, in case bus order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vm: Option<Vec<f64>>,
}

#[derive(Debug, thiserror::Error)]
pub enum RefsError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed reference file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("reference for {case} ({condition}) has non-positive ob_ac {value}")]
    NonPositive {
        case: String,
        condition: &'static str,
        value: f64,
    },
    #[error("duplicate reference for {case} ({condition})")]
    Duplicate {
        case: String,
        condition: &'static str,
    },
}

/// Reference objectives keyed by `(case, condition)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReferenceObjectives {
    entries: BTreeMap<(String, Condition), ReferenceEntry>,
}

impl ReferenceObjectives {
    pub fn from_json(text: &str) -> Result<Self, RefsError> {
        let list: Vec<ReferenceEntry> = serde_json::from_str(text)?;
        let mut entries = BTreeMap::new();
        for e in list {
            if !(e.ob_ac > 0.0) {
                return Err(RefsError::NonPositive {
                    case: e.case,
                    condition: e.condition.label(),
                    value: e.ob_ac,
                });
            }
            let key = (e.case.clone(), e.condition);
            if entries.insert(key, e.clone()).is_some() {
                return Err(RefsError::Duplicate {
                    case: e.case,
                    condition: e.condition.label(),
                });
            }
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self, RefsError> {
        let text = std::fs::read_to_string(path).map_err(|source| RefsError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn get(&self, case: &str, condition: Condition) -> Option<&ReferenceEntry> {
        self.entries.get(&(case.to_string(), condition))
    }

    /// The condition a case is listed under, if it appears exactly once.
    pub fn condition_of(&self, case: &str) -> Option<Condition> {
        let mut found = self.entries.keys().filter(|(c, _)| c == case).map(|&(_, k)| k);
        match (found.next(), found.next()) {
            (Some(k), None) => Some(k),
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("reference objective is zero")]
pub struct ZeroReference;

/// Percentage optimality gap `(ob_ac − ob) / ob_ac × 100`.
pub fn gap(ob_ac: f64, ob: f64) -> Result<f64, ZeroReference> {
    if ob_ac == 0.0 {
        return Err(ZeroReference);
    }
    Ok((ob_ac - ob) / ob_ac * 100.0)
}

/// A case file and the operating condition it represents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseInput {
    /// File stem, also the key into the reference file.
    pub id: String,
    pub condition: Condition,
    pub path: PathBuf,
}

/// `path` itself, or every `*.m` file directly inside it, sorted by name.
///
/// The condition comes from the reference file when the case is listed
/// there, else from a `_congested` suffix on the file stem.
pub fn discover_cases(
    path: &Path,
    refs: &ReferenceObjectives,
) -> std::io::Result<Vec<CaseInput>> {
    let mut files = if path.is_dir() {
        let mut v: Vec<PathBuf> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == "m"))
            .collect();
        v.sort();
        v
    } else if path.is_file() {
        vec![path.to_path_buf()]
    } else {
        return Err(std::io::Error::new(
            std::io::ErrorKind::NotFound,
            format!("{} does not exist", path.display()),
        ));
    };
    Ok(files
        .drain(..)
        .map(|p| {
            let id = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default();
            let condition = refs.condition_of(&id).unwrap_or(if id.ends_with("_congested") {
                Condition::Congested
            } else {
                Condition::Typical
            });
            CaseInput {
                id,
                condition,
                path: p,
            }
        })
        .collect())
}

/// The meshes drawn for the IEEE 14-bus system, as external bus numbers.
pub const IEEE14_CYCLES: [&[usize]; 8] = [
    &[1, 2, 5, 1],
    &[2, 3, 4, 2],
    &[2, 4, 5, 2],
    &[6, 12, 13, 6],
    &[6, 11, 10, 9, 14, 13, 6],
    &[5, 6, 11, 10, 9, 4, 5],
    &[1, 5, 6, 12, 13, 14, 9, 7, 4, 3, 2, 1],
    &[2, 3, 4, 7, 9, 10, 11, 6, 5, 2],
];

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub formulations: Vec<FormulationKind>,
    pub eps_max: f64,
    /// `None` selects the default weight.
    pub beta: Option<f64>,
    pub solver: String,
    pub settings: SolveSettings<f64>,
    pub verify_pf: bool,
    pub pf: PowerFlowOptions<f64>,
    /// Tolerance for the limit checks after the verification power flow, pu.
    pub limit_tol: f64,
    /// Explicit cycles per case id, reported instead of the fundamental basis.
    pub named_cycles: BTreeMap<String, Vec<Vec<usize>>>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let ieee14: Vec<Vec<usize>> = IEEE14_CYCLES.iter().map(|c| c.to_vec()).collect();
        Self {
            formulations: vec![FormulationKind::RelaxedNoArctan, FormulationKind::NewSocp],
            eps_max: DEFAULT_EPS_MAX,
            beta: None,
            solver: "bundled".into(),
            settings: SolveSettings::default(),
            verify_pf: false,
            pf: PowerFlowOptions::default(),
            limit_tol: 1e-4,
            named_cycles: BTreeMap::from([
                ("case14".to_string(), ieee14.clone()),
                ("case14_congested".to_string(), ieee14),
            ]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleSum {
    pub label: String,
    pub sum_rad: f64,
}

/// Outcome of one (case, condition, formulation) run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunRecord {
    pub case: String,
    pub condition: Condition,
    pub formulation: FormulationKind,
    pub solver: String,
    /// Solver status label, or `error` when the run failed before solving.
    pub status: String,
    pub error: Option<String>,
    pub objective_cost: Option<f64>,
    pub objective_total: Option<f64>,
    pub eps_theta: Option<f64>,
    pub beta: Option<f64>,
    pub penalty: Option<f64>,
    pub ob_ac: Option<f64>,
    pub ref_source: Option<Provenance>,
    pub gap_percent: Option<f64>,
    /// Largest |cycle sum| over the fundamental basis and any named cycles.
    pub cycle_max_abs_sum: Option<f64>,
    pub cycle_source: Option<&'static str>,
    /// Named cycles when configured for the case, else the fundamental basis.
    pub cycles: Vec<CycleSum>,
    pub pf_converged: Option<bool>,
    pub pf_iterations: Option<usize>,
    pub pf_mismatch: Option<f64>,
    pub pf_switched: Vec<usize>,
    pub violations: Option<Vec<String>>,
    /// Seconds spent in the conic solve only.
    pub wall_time: f64,
    pub solver_iterations: usize,
    pub vm: Vec<f64>,
    pub ref_vm: Option<Vec<f64>>,
}

impl RunRecord {
    fn new(input: &CaseInput, kind: FormulationKind, solver: &str) -> Self {
        Self {
            case: input.id.clone(),
            condition: input.condition,
            formulation: kind,
            solver: solver.to_string(),
            status: "error".into(),
            error: None,
            objective_cost: None,
            objective_total: None,
            eps_theta: None,
            beta: None,
            penalty: None,
            ob_ac: None,
            ref_source: None,
            gap_percent: None,
            cycle_max_abs_sum: None,
            cycle_source: None,
            cycles: Vec::new(),
            pf_converged: None,
            pf_iterations: None,
            pf_mismatch: None,
            pf_switched: Vec::new(),
            violations: None,
            wall_time: 0.0,
            solver_iterations: 0,
            vm: Vec::new(),
            ref_vm: None,
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == SolveStatus::Optimal.to_string()
    }

    /// Value-matching against reference gaps only makes sense for
    /// published references; everything else is checked by properties.
    pub fn acceptance_mode(&self) -> &'static str {
        match self.ref_source {
            Some(Provenance::Published) => "value-match",
            _ => "property-based",
        }
    }
}

/// Runs every configured formulation on every case.
///
/// Cases run in parallel; records come back ordered by input case, then
/// by the order of `config.formulations`. Failures are stored in the
/// record. Each run calls the solver exactly once.
pub fn run_suite(
    cases: &[CaseInput],
    refs: &ReferenceObjectives,
    registry: &BackendRegistry<f64>,
    config: &SuiteConfig,
) -> Vec<RunRecord> {
    cases
        .par_iter()
        .flat_map_iter(|input| run_case(input, refs, registry, config))
        .collect()
}

fn run_case(
    input: &CaseInput,
    refs: &ReferenceObjectives,
    registry: &BackendRegistry<f64>,
    config: &SuiteConfig,
) -> Vec<RunRecord> {
    let case = load_case::<f64>(&input.path);
    config
        .formulations
        .iter()
        .map(|&kind| {
            let mut rec = RunRecord::new(input, kind, &config.solver);
            if let Some(r) = refs.get(&input.id, input.condition) {
                rec.ob_ac = Some(r.ob_ac);
                rec.ref_source = Some(r.source);
                rec.ref_vm.clone_from(&r.vm);
            }
            match &case {
                Ok(case) => {
                    if let Err(e) = run_one(case, kind, registry, config, &mut rec) {
                        rec.error = Some(e);
                    }
                }
                Err(e) => rec.error = Some(e.to_string()),
            }
            if let Some(e) = &rec.error {
                log::warn!("{} {} {}: {e}", rec.case, rec.condition.label(), kind.label());
            }
            rec
        })
        .collect()
}

fn run_one(
    case: &NetworkCase<f64>,
    kind: FormulationKind,
    registry: &BackendRegistry<f64>,
    config: &SuiteConfig,
    rec: &mut RunRecord,
) -> Result<(), String> {
    let ybus = build_ybus(case).map_err(|e| e.to_string())?;
    let opf = build(case, &ybus, kind, config.eps_max, config.beta).map_err(|e| e.to_string())?;
    let started = Instant::now();
    let outcome = registry
        .solve(&config.solver, &opf.program, &config.settings)
        .map_err(|e| e.to_string())?;
    rec.wall_time = started.elapsed().as_secs_f64();
    let outcome = outcome.map_err(|e| e.to_string())?;
    rec.status = outcome.status.to_string();
    rec.solver_iterations = outcome.iterations;
    if outcome.status != SolveStatus::Optimal {
        return Ok(());
    }
    let sol = extract_solution(&opf, case, &outcome.x).map_err(|e| e.to_string())?;
    record_solution(case, &sol, config, rec)
}

fn record_solution(
    case: &NetworkCase<f64>,
    sol: &RelaxationSolution<f64>,
    config: &SuiteConfig,
    rec: &mut RunRecord,
) -> Result<(), String> {
    rec.objective_cost = Some(sol.objective_cost);
    rec.objective_total = Some(sol.objective_total);
    rec.eps_theta = sol.eps_theta;
    rec.penalty = sol.eps_theta.map(|_| sol.penalty);
    rec.beta = sol.eps_theta.map(|_| sol.beta);
    rec.vm.clone_from(&sol.vm);
    if let Some(ob_ac) = rec.ob_ac {
        rec.gap_percent = gap(ob_ac, sol.objective_cost).ok();
    }

    let links = case.links().map_err(|k| format!("branch {k} has zero series impedance"))?;
    let basis = fundamental_cycles(case).map_err(|e| e.to_string())?;
    let named: Vec<Cycle> = match config.named_cycles.get(&rec.case) {
        Some(paths) => paths
            .iter()
            .map(|p| cycle_from_buses(case, &links, p))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?,
        None => Vec::new(),
    };
    let (angles, source) = solution_link_angles(sol, &links).map_err(|e| e.to_string())?;
    let all: Vec<Cycle> = basis.cycles.iter().chain(&named).cloned().collect();
    let report = cycle_sums(&all, &angles, source);
    rec.cycle_max_abs_sum = Some(report.max_abs_sum);
    rec.cycle_source = Some(source.label());
    let shown = if named.is_empty() { &basis.cycles } else { &named };
    rec.cycles = shown
        .iter()
        .map(|c| CycleSum {
            label: c.label(case),
            sum_rad: c.sum(&angles),
        })
        .collect();

    if config.verify_pf {
        match verify_realizability(case, sol, &config.pf, config.limit_tol) {
            Ok(r) => {
                rec.pf_converged = Some(r.result.converged);
                rec.pf_iterations = Some(r.result.total_iterations);
                rec.pf_mismatch = Some(r.result.max_mismatch);
                rec.pf_switched = r.result.switched;
                rec.violations = Some(r.violations.iter().map(|v| v.to_string()).collect());
            }
            Err(e) => {
                rec.pf_converged = Some(false);
                log::warn!("{} {}: power flow failed: {e}", rec.case, rec.formulation.label());
            }
        }
    }
    Ok(())
}
