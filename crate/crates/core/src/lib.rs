//! Convex relaxations of AC optimal power flow.
//!
//! - [`network`]: case parsing, per-unit model, admittance matrix.
//! - [`socp`]: the relaxed SOCP and the SOCP with linear angle constraints.
//! - [`cycles`]: cycle basis and angle-sum consistency.
//! - [`powerflow`]: Newton–Raphson power flow and limit checks.
//! - [`experiment`]: suite runner, optimality gaps and reports.
//!
//! The numerical core is generic over [`Scalar`]; the `*64` aliases fix
//! `f64`, which is what the suite runner uses.

pub mod cycles;
pub mod experiment;
pub mod network;
pub mod powerflow;
pub mod socp;

pub use acopf_conic as conic;
pub use acopf_conic::Scalar;

pub use experiment::{
    discover_cases, emit_reports, gap, run_suite, write_cycle_csv, CaseInput, Condition,
    Provenance, ReferenceEntry, ReferenceObjectives, RunRecord, SuiteConfig,
};

pub use network::{
    build_ybus, load_case, parse_case, write_case, AdmittanceMatrix, Branch, Bus, BusKind,
    CaseError, Generator, Link, NetworkCase, YbusError,
};

pub use cycles::{
    cycle_from_buses, cycle_sums, fundamental_cycles, link_angles_cs, link_angles_theta,
    recover_angles, solution_link_angles, AngleSource, Cycle, CycleBasis, CycleError, CycleReport,
};

pub use powerflow::{
    check_limits, pv_to_pq_switching, run_powerflow, solve_powerflow, verify_realizability,
    LinkFlow, PfBusKind, PowerFlowError, PowerFlowOptions, PowerFlowResult, PowerFlowSpec,
    Realizability, RealizabilityError, Violation,
};

pub use socp::{
    build, default_beta, extract_solution, map_exact_point, BuildError, ExtractError,
    FormulationKind, OpfProgram, RelaxationSolution, DEFAULT_EPS_MAX,
};

pub type NetworkCase64 = NetworkCase<f64>;
pub type AdmittanceMatrix64 = AdmittanceMatrix<f64>;
pub type OpfProgram64 = OpfProgram<f64>;
pub type RelaxationSolution64 = RelaxationSolution<f64>;
pub type PowerFlowSpec64 = PowerFlowSpec<f64>;
pub type PowerFlowResult64 = PowerFlowResult<f64>;
