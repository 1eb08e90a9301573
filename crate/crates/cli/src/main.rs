use std::path::{Path, PathBuf};
use std::process::ExitCode;

use acopf_core::conic::{write_program, BackendRegistry, SolveSettings};
use acopf_core::{
    build, build_ybus, discover_cases, emit_reports, load_case, run_suite,
    write_cycle_csv, CaseInput, FormulationKind, NetworkCase64, ReferenceObjectives, RunRecord,
    SuiteConfig, DEFAULT_EPS_MAX,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "acopf", version, about = "SOCP relaxations of AC optimal power flow")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve cases with one or both relaxations and write reports.
    Run(RunArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Formulation {
    Relaxed,
    New,
    Both,
}

impl Formulation {
    fn kinds(self) -> Vec<FormulationKind> {
        match self {
            Formulation::Relaxed => vec![FormulationKind::RelaxedNoArctan],
            Formulation::New => vec![FormulationKind::NewSocp],
            Formulation::Both => vec![FormulationKind::RelaxedNoArctan, FormulationKind::NewSocp],
        }
    }
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// MATPOWER case file, or a directory of `*.m` files.
    #[arg(long)]
    case: PathBuf,
    #[arg(long, value_enum, default_value_t = Formulation::Both)]
    formulation: Formulation,
    /// Reference objectives (JSON array of {case, condition, ob_ac, source}).
    #[arg(long)]
    refs: Option<PathBuf>,
    /// Output directory for tables and figures.
    #[arg(long)]
    out: PathBuf,
    /// Check each optimum with a seeded Newton–Raphson power flow.
    #[arg(long)]
    verify_pf: bool,
    /// Write per-cycle angle sums as CSV (default: <out>/cycle_report.csv).
    #[arg(long, num_args = 0..=1, value_name = "PATH")]
    cycle_report: Option<Option<PathBuf>>,
    /// Upper bound on ε_θ in radians.
    #[arg(long, default_value_t = DEFAULT_EPS_MAX)]
    eps_max: f64,
    /// Penalty weight on ε_θ, or `auto`.
    #[arg(long, default_value = "auto", value_parser = parse_beta)]
    beta: Beta,
    /// Write the conic program of each run (a file for a single run, else a directory).
    #[arg(long, value_name = "PATH")]
    dump_program: Option<PathBuf>,
    /// Print the parsed per-unit case as JSON and exit.
    #[arg(long)]
    dump_case: bool,
    #[arg(long, default_value = "bundled")]
    solver: String,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Feasibility and gap tolerance.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Beta {
    Auto,
    Value(f64),
}

fn parse_beta(s: &str) -> Result<Beta, String> {
    if s == "auto" {
        return Ok(Beta::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(Beta::Value(v)),
        _ => Err(format!("expected `auto` or a non-negative number, got `{s}`")),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let Command::Run(args) = cli.command;
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// `Ok(true)` when every run reached Optimal.
fn run(args: &RunArgs) -> Result<bool, String> {
    let refs = match &args.refs {
        Some(p) => ReferenceObjectives::load(p).map_err(|e| e.to_string())?,
        None => ReferenceObjectives::default(),
    };
    let cases = discover_cases(&args.case, &refs).map_err(|e| e.to_string())?;
    if cases.is_empty() {
        return Err(format!("no case files found at {}", args.case.display()));
    }

    if args.dump_case {
        for c in &cases {
            let case: NetworkCase64 = load_case(&c.path).map_err(|e| format!("{}: {e}", c.id))?;
            println!("{}", case.to_json());
        }
        return Ok(true);
    }

    let registry = BackendRegistry::<f64>::with_defaults();
    registry.resolve(&args.solver).map_err(|e| e.to_string())?;

    let mut settings = SolveSettings::default();
    if let Some(n) = args.max_iters {
        settings.max_iters = n;
    }
    if let Some(t) = args.tol {
        settings.feas_tol = t;
        settings.gap_tol = t;
    }
    settings.validate().map_err(|e| e.to_string())?;

    let config = SuiteConfig {
        formulations: args.formulation.kinds(),
        eps_max: args.eps_max,
        beta: match args.beta {
            Beta::Auto => None,
            Beta::Value(v) => Some(v),
        },
        solver: args.solver.clone(),
        settings,
        verify_pf: args.verify_pf,
        ..SuiteConfig::default()
    };

    if let Some(path) = &args.dump_program {
        dump_programs(&cases, &config, path)?;
    }

    let records = run_suite(&cases, &refs, &registry, &config);
    log::info!("{} conic solves for {} runs", registry.total_calls(), records.len());
    print_summary(&records);

    let files = emit_reports(&records, &args.out).map_err(|e| e.to_string())?;
    for f in &files.written {
        log::info!("wrote {}", f.display());
    }
    if let Some(target) = &args.cycle_report {
        let path = target.clone().unwrap_or_else(|| args.out.join("cycle_report.csv"));
        write_cycle_csv(&records, &path).map_err(|e| e.to_string())?;
        print_cycles(&records);
        log::info!("wrote {}", path.display());
    }
    Ok(records.iter().all(RunRecord::is_optimal))
}

fn dump_programs(cases: &[CaseInput], config: &SuiteConfig, path: &Path) -> Result<(), String> {
    let single = cases.len() == 1 && config.formulations.len() == 1;
    if !single {
        std::fs::create_dir_all(path).map_err(|e| format!("{}: {e}", path.display()))?;
    }
    for c in cases {
        let case: NetworkCase64 = load_case(&c.path).map_err(|e| format!("{}: {e}", c.id))?;
        let ybus = build_ybus(&case).map_err(|e| format!("{}: {e}", c.id))?;
        for &kind in &config.formulations {
            let opf = build(&case, &ybus, kind, config.eps_max, config.beta)
                .map_err(|e| format!("{}: {e}", c.id))?;
            let target = if single {
                path.to_path_buf()
            } else {
                path.join(format!("{}_{}.txt", c.id, kind.label()))
            };
            std::fs::write(&target, write_program(&opf.program))
                .map_err(|e| format!("{}: {e}", target.display()))?;
        }
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>, prec: usize) -> String {
    v.map_or_else(|| "-".into(), |x| format!("{x:.prec$}"))
}

fn print_summary(records: &[RunRecord]) {
    println!(
        "{:<18} {:<9} {:<7} {:<17} {:>14} {:>9} {:>11} {:>10} {:>4}",
        "case", "condition", "form", "status", "objective", "gap %", "eps_theta", "cycle max", "pf"
    );
    for r in records {
        let pf = match (r.pf_converged, &r.violations) {
            (None, _) => "-".to_string(),
            (Some(false), _) => "fail".to_string(),
            (Some(true), Some(v)) if v.is_empty() => "ok".to_string(),
            (Some(true), Some(v)) => format!("{}v", v.len()),
            (Some(true), None) => "ok".to_string(),
        };
        println!(
            "{:<18} {:<9} {:<7} {:<17} {:>14} {:>9} {:>11} {:>10} {:>4}",
            r.case,
            r.condition.label(),
            r.formulation.label(),
            r.status,
            fmt_opt(r.objective_cost, 4),
            fmt_opt(r.gap_percent, 4),
            r.eps_theta.map_or_else(|| "-".into(), |e| format!("{e:.2e}")),
            r.cycle_max_abs_sum.map_or_else(|| "-".into(), |e| format!("{e:.2e}")),
            pf
        );
        if let Some(e) = &r.error {
            println!("    error: {e}");
        }
        for v in r.violations.iter().flatten() {
            println!("    {v}");
        }
    }
}

fn print_cycles(records: &[RunRecord]) {
    for r in records.iter().filter(|r| !r.cycles.is_empty()) {
        println!("{} {} {}:", r.case, r.condition.label(), r.formulation.label());
        for (k, c) in r.cycles.iter().enumerate() {
            println!("  {:>2}) {:<40} {:+.3e}", k + 1, c.label, c.sum_rad);
        }
    }
}
