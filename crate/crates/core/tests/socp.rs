use std::path::Path;

use acopf_core::conic::{solve, SolveSettings, SolveStatus};
use acopf_core::{
    build, build_ybus, default_beta, extract_solution, load_case, map_exact_point, run_powerflow,
    FormulationKind, NetworkCase64, PowerFlowResult64, PowerFlowSpec, DEFAULT_EPS_MAX,
};

fn load(name: &str) -> NetworkCase64 {
    let p = Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../data/cases/{name}.m"));
    load_case(&p).unwrap()
}

/// Limits wide enough that a base-case power flow is inside every bound.
fn loosened(mut c: NetworkCase64) -> NetworkCase64 {
    for b in &mut c.buses {
        b.vmin = 0.5;
        b.vmax = 1.5;
    }
    for g in &mut c.generators {
        g.pmin = -20.0;
        g.pmax = 20.0;
        g.qmin = -20.0;
        g.qmax = 20.0;
    }
    for br in &mut c.branches {
        br.rate = None;
    }
    c
}

fn base_flow(c: &NetworkCase64) -> PowerFlowResult64 {
    let r = run_powerflow(c, &PowerFlowSpec::from_case(c), 1e-11, 30).unwrap();
    assert!(r.converged);
    r
}

fn ac_cost(c: &NetworkCase64, pg: &[f64]) -> f64 {
    c.generators
        .iter()
        .zip(pg)
        .map(|(g, &p)| g.a * p * p + g.b * p + g.c)
        .sum()
}

#[test]
fn default_beta_of_ieee14_matches_hand_sum() {
    // Σ a·Pmax² + b·Pmax + c in $/h over the raw MW data
    let c = load("case14");
    let beta = default_beta(&c, DEFAULT_EPS_MAX).unwrap();
    assert!((beta - 899_521.541_964_136_4).abs() < 1e-6, "{beta}");
    assert!(default_beta(&c, 0.0).is_err());
}

#[test]
fn power_flow_point_is_feasible_for_both_programs() {
    for name in ["case9", "case14", "case30", "case57", "case118"] {
        let c = loosened(load(name));
        let y = build_ybus(&c).unwrap();
        let pf = base_flow(&c);
        for kind in [FormulationKind::RelaxedNoArctan, FormulationKind::NewSocp] {
            let opf = build(&c, &y, kind, 1.0, None).unwrap();
            let x = map_exact_point(&opf, &c, &pf.vm, &pf.va, &pf.pg, &pf.qg).unwrap();
            let v = opf.program.max_violation(&x);
            assert!(v < 1e-8, "{name} {kind}: violation {v}");
            let sol = extract_solution(&opf, &c, &x).unwrap();
            assert!((sol.objective_cost - ac_cost(&c, &pf.pg)).abs() < 1e-6 * sol.objective_cost);
        }
    }
}

#[test]
fn mapped_eps_is_largest_angle_mismatch() {
    let c = loosened(load("case30"));
    let y = build_ybus(&c).unwrap();
    let pf = base_flow(&c);
    let opf = build(&c, &y, FormulationKind::NewSocp, 1.0, None).unwrap();
    let x = map_exact_point(&opf, &c, &pf.vm, &pf.va, &pf.pg, &pf.qg).unwrap();
    let sol = extract_solution(&opf, &c, &x).unwrap();
    let mut expected = 0.0f64;
    for br in &c.branches {
        let d = pf.va[br.from] - pf.va[br.to];
        let s = pf.vm[br.from] * pf.vm[br.to] * d.sin();
        expected = expected.max((d - s).abs());
    }
    assert!((sol.eps_theta.unwrap() - expected).abs() < 1e-14);
    // tightening eps_max below the mismatch cuts the point off
    let tight = build(&c, &y, FormulationKind::NewSocp, expected / 2.0, None).unwrap();
    let x = map_exact_point(&tight, &c, &pf.vm, &pf.va, &pf.pg, &pf.qg).unwrap();
    assert!(tight.program.max_violation(&x) >= expected / 2.0 - 1e-12);
}

#[test]
fn relaxation_optimum_lower_bounds_a_feasible_ac_point() {
    for name in ["case9", "case14", "case30"] {
        let c = loosened(load(name));
        let y = build_ybus(&c).unwrap();
        let pf = base_flow(&c);
        let opf = build(&c, &y, FormulationKind::RelaxedNoArctan, DEFAULT_EPS_MAX, None).unwrap();
        let out = solve(&opf.program, &SolveSettings::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal, "{name}");
        let sol = extract_solution(&opf, &c, &out.x).unwrap();
        let bound = ac_cost(&c, &pf.pg);
        assert!(sol.objective_cost <= bound * (1.0 + 1e-8), "{name}: {} > {bound}", sol.objective_cost);
    }
}

#[test]
fn angle_constraints_never_lower_the_cost() {
    for name in ["case9", "case14", "case14_congested", "case30"] {
        let c = load(name);
        let y = build_ybus(&c).unwrap();
        let solve_kind = |kind| {
            let opf = build(&c, &y, kind, DEFAULT_EPS_MAX, None).unwrap();
            let out = solve(&opf.program, &SolveSettings::default()).unwrap();
            assert_eq!(out.status, SolveStatus::Optimal, "{name} {kind}");
            extract_solution(&opf, &c, &out.x).unwrap()
        };
        let relaxed = solve_kind(FormulationKind::RelaxedNoArctan);
        let new = solve_kind(FormulationKind::NewSocp);
        assert!(
            new.objective_cost >= relaxed.objective_cost * (1.0 - 1e-7),
            "{name}: {} < {}",
            new.objective_cost,
            relaxed.objective_cost
        );
        let eps = new.eps_theta.unwrap();
        assert!(eps <= DEFAULT_EPS_MAX + 1e-9);
        assert!((new.objective_total - new.objective_cost - new.beta * eps).abs() < 1e-6);
    }
}

#[test]
fn zero_beta_drops_the_penalty() {
    let c = load("case14");
    let y = build_ybus(&c).unwrap();
    let opf = build(&c, &y, FormulationKind::NewSocp, DEFAULT_EPS_MAX, Some(0.0)).unwrap();
    let out = solve(&opf.program, &SolveSettings::default()).unwrap();
    let sol = extract_solution(&opf, &c, &out.x).unwrap();
    assert_eq!(sol.penalty, 0.0);
    assert_eq!(sol.objective_total, sol.objective_cost);
    assert!(build(&c, &y, FormulationKind::NewSocp, DEFAULT_EPS_MAX, Some(-1.0)).is_err());
}
