use acopf_conic::{solve, Affine, Cone, ConicProgram, ProgramBuilder, SolveSettings, SolveStatus};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A bounded random SOCP together with a strictly feasible point.
fn random_program(seed: u64) -> (ConicProgram<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=5);
    let mut pb = ProgramBuilder::<f64>::new();
    let xs: Vec<usize> = (0..n).map(|i| pb.add_var(format!("x{i}"))).collect();
    let x0: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    for &x in &xs {
        pb.add_cost(x, rng.gen_range(-2.0..2.0));
        pb.bounds(x, -5.0, 5.0);
    }
    let row = |rng: &mut ChaCha8Rng, s0: f64| {
        // s = b - A x with s(x0) = s0
        let mut e = Affine::constant(s0);
        for (j, &x) in xs.iter().enumerate() {
            let a: f64 = rng.gen_range(-1.0..1.0);
            e = e.term(x, a);
            e = e.plus_const(-a * x0[j]);
        }
        e
    };
    for _ in 0..rng.gen_range(1..=3) {
        let dim = rng.gen_range(3..=4);
        let tail: Vec<f64> = (1..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let head = tail.iter().map(|v| v * v).sum::<f64>().sqrt() + rng.gen_range(0.1..1.0);
        let mut rows = vec![row(&mut rng, head)];
        for &t in &tail {
            rows.push(row(&mut rng, t));
        }
        pb.add_block(Cone::SecondOrder(dim), &rows);
    }
    for _ in 0..rng.gen_range(0..=2) {
        let s0 = rng.gen_range(0.1..1.0);
        let r = row(&mut rng, s0);
        pb.nonneg(r);
    }
    (pb.build(), x0)
}

fn dual_cone_violation(p: &ConicProgram<f64>, dual: &[f64]) -> f64 {
    p.cones
        .iter()
        .zip(p.cone_ranges())
        .filter(|(c, _)| !c.is_zero())
        .map(|(c, r)| c.violation(&dual[r]))
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn weak_duality_against_a_feasible_point(seed in any::<u64>()) {
        let (p, x0) = random_program(seed);
        let out = solve(&p, &SolveSettings::default()).unwrap();
        prop_assert_eq!(out.status, SolveStatus::Optimal);
        let f0 = p.objective_value(&x0);
        let tol = 1e-6 * (1.0 + f0.abs());
        prop_assert!(out.obj <= f0 + tol, "primal {} above feasible {}", out.obj, f0);
        prop_assert!(out.dual_obj <= f0 + tol, "dual {} above feasible {}", out.dual_obj, f0);
        prop_assert!(dual_cone_violation(&p, &out.dual) <= 1e-7);
        prop_assert!((out.obj - out.dual_obj).abs() <= 1e-6 * (1.0 + out.obj.abs()));
        prop_assert!(out.residuals.primal <= 1e-8 && out.residuals.dual <= 1e-8);
    }

    #[test]
    fn repeated_solves_are_bitwise_identical(seed in any::<u64>()) {
        let (p, _) = random_program(seed);
        let a = solve(&p, &SolveSettings::default()).unwrap();
        let b = solve(&p, &SolveSettings::default()).unwrap();
        prop_assert_eq!(a.iterations, b.iterations);
        prop_assert!(a.x.iter().zip(&b.x).all(|(u, v)| u.to_bits() == v.to_bits()));
        prop_assert_eq!(a.obj.to_bits(), b.obj.to_bits());
    }

    #[test]
    fn objective_scales_with_cost(seed in any::<u64>(), k in 0.1f64..10.0) {
        let (p, _) = random_program(seed);
        let mut q = p.clone();
        q.objective.iter_mut().for_each(|c| *c *= k);
        let a = solve(&p, &SolveSettings::default()).unwrap();
        let b = solve(&q, &SolveSettings::default()).unwrap();
        prop_assert_eq!(b.status, SolveStatus::Optimal);
        prop_assert!((b.obj - k * a.obj).abs() <= 1e-6 * (1.0 + (k * a.obj).abs()));
    }

    #[test]
    fn optimum_invariant_under_row_scaling(seed in any::<u64>(), k in 0.1f64..10.0) {
        // scaling a whole cone block by k > 0 leaves the feasible set unchanged
        let (p, _) = random_program(seed);
        let mut q = p.clone();
        let rows = q.cone_ranges().last().unwrap().clone();
        let mut scale = vec![1.0; q.num_rows()];
        for r in rows {
            scale[r] = k;
            q.b[r] *= k;
        }
        q.a.scale(&scale, &vec![1.0; q.num_vars]);
        let a = solve(&p, &SolveSettings::default()).unwrap();
        let b = solve(&q, &SolveSettings::default()).unwrap();
        prop_assert_eq!(b.status, SolveStatus::Optimal);
        prop_assert!((b.obj - a.obj).abs() <= 1e-6 * (1.0 + a.obj.abs()));
    }
}
