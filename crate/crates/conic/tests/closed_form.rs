use acopf_conic::{solve, Affine, Cone, ProgramBuilder, SolveSettings, SolveStatus};

#[path = "support/closed_form_cases.rs"]
mod fixtures;

use fixtures::cases;

const TOL: f64 = 1e-6;

#[test]
fn closed_form_suite() {
    let all = cases();
    assert!(all.len() >= 20);
    let settings = SolveSettings::default();
    let mut failures = Vec::new();
    for c in &all {
        let out = solve(&c.program, &settings).unwrap();
        let ok = out.status == SolveStatus::Optimal
            && (out.obj - c.optimum).abs() <= TOL
            && out.residuals.primal <= 1e-8
            && out.residuals.dual <= 1e-8
            && c.program.max_violation(&out.x) <= 1e-7;
        if !ok {
            failures.push(format!(
                "{}: status {} obj {} expected {} residuals {:?}",
                c.name, out.status, out.obj, c.optimum, out.residuals
            ));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn primal_points_match_where_unique() {
    let settings = SolveSettings::default();
    let by_name = |n: &str| cases().into_iter().find(|c| c.name == n).unwrap();

    let out = solve(&by_name("distance_point_to_disc").program, &settings).unwrap();
    assert!((out.x[1] - 0.6).abs() < 1e-6 && (out.x[2] - 0.8).abs() < 1e-6);

    let out = solve(&by_name("scalar_quadratic").program, &settings).unwrap();
    assert!((out.x[1] - 1.0).abs() < 1e-3);

    let out = solve(&by_name("least_norm_squared").program, &settings).unwrap();
    assert!((out.x[1] - 0.5).abs() < 1e-6 && (out.x[2] - 0.5).abs() < 1e-6);
}

#[test]
fn f32_matches_closed_forms_at_single_precision() {
    let mut pb = ProgramBuilder::<f32>::new();
    let t = pb.add_var("t");
    let x = pb.add_var("x");
    let y = pb.add_var("y");
    pb.add_cost(t, 1.0);
    pb.equal(Affine::var(x).term(y, 1.0).plus_const(-2.0));
    pb.add_block(
        Cone::SecondOrder(3),
        &[Affine::var(t), Affine::var(x), Affine::var(y)],
    );
    let out = solve(&pb.build(), &SolveSettings::default()).unwrap();
    assert_eq!(out.status, SolveStatus::Optimal);
    assert!((out.obj - 2f32.sqrt()).abs() < 1e-3, "{}", out.obj);
}
