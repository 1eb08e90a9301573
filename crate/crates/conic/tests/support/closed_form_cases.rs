//! Hand-built programs with optimal values known in closed form.

use acopf_conic::{Affine, Cone, ConicProgram, ProgramBuilder};

pub struct Case {
    pub name: &'static str,
    pub program: ConicProgram<f64>,
    pub optimum: f64,
}

fn case(name: &'static str, optimum: f64, f: impl FnOnce(&mut ProgramBuilder<f64>)) -> Case {
    let mut pb = ProgramBuilder::new();
    f(&mut pb);
    Case {
        name,
        program: pb.build(),
        optimum,
    }
}

fn soc(pb: &mut ProgramBuilder<f64>, rows: &[Affine<f64>]) {
    pb.add_block(Cone::SecondOrder(rows.len()), rows);
}

fn rsoc(pb: &mut ProgramBuilder<f64>, rows: &[Affine<f64>]) {
    pb.add_block(Cone::RotatedSecondOrder(rows.len()), rows);
}

fn v(col: usize) -> Affine<f64> {
    Affine::var(col)
}

fn k(c: f64) -> Affine<f64> {
    Affine::constant(c)
}

pub fn cases() -> Vec<Case> {
    vec![
        case("halfline", 3.0, |pb| {
            let x = pb.add_var("x");
            pb.add_cost(x, 1.0);
            pb.nonneg(v(x).plus_const(-3.0));
        }),
        case("lp_with_bounds", 1.75, |pb| {
            let x = pb.add_var("x");
            let y = pb.add_var("y");
            pb.add_cost(x, 1.0);
            pb.add_cost(y, 2.0);
            pb.equal(v(x).term(y, 1.0).plus_const(-1.0));
            pb.bounds(x, 0.0, 0.25);
            pb.bounds(y, 0.0, f64::INFINITY);
        }),
        case("norm_of_ones", 2f64.sqrt(), |pb| {
            let t = pb.add_var("t");
            pb.add_cost(t, 1.0);
            soc(pb, &[v(t), k(1.0), k(1.0)]);
        }),
        case("norm_3_4", 5.0, |pb| {
            let t = pb.add_var("t");
            pb.add_cost(t, 1.0);
            soc(pb, &[v(t), k(3.0), k(4.0)]);
        }),
        case("distance_point_to_disc", 4.0, |pb| {
            let t = pb.add_var("t");
            let x = pb.add_var("x");
            let y = pb.add_var("y");
            pb.add_cost(t, 1.0);
            soc(pb, &[v(t), v(x).plus_const(-3.0), v(y).plus_const(-4.0)]);
            soc(pb, &[k(1.0), v(x), v(y)]);
        }),
        case("linear_over_ball", -3.0, |pb| {
            let xs: Vec<usize> = (0..3).map(|i| pb.add_var(format!("x{i}"))).collect();
            for (&c, &x) in [1.0, 2.0, 2.0].iter().zip(&xs) {
                pb.add_cost(x, c);
            }
            let mut rows = vec![k(1.0)];
            rows.extend(xs.iter().map(|&x| v(x)));
            soc(pb, &rows);
        }),
        case("hyperbola", 2f64.sqrt(), |pb| {
            let x = pb.add_var("x");
            let y = pb.add_var("y");
            pb.add_cost(x, 1.0);
            pb.add_cost(y, 1.0);
            rsoc(pb, &[v(x), v(y), k(1.0)]);
        }),
        case("scalar_quadratic", -1.0, |pb| {
            // min x² − 2x
            let t = pb.add_var("t");
            let x = pb.add_var("x");
            pb.add_cost(t, 1.0);
            pb.add_cost(x, -2.0);
            rsoc(pb, &[v(t), k(0.5), v(x)]);
        }),
        case("interval_from_cone", -2.0, |pb| {
            let x = pb.add_var("x");
            pb.add_cost(x, -1.0);
            soc(pb, &[k(2.0), v(x)]);
        }),
        case("geometric_mean", -1.0, |pb| {
            // max u with u² <= x y, x + y = 2
            let u = pb.add_var("u");
            let x = pb.add_var("x");
            let y = pb.add_var("y");
            pb.add_cost(u, -1.0);
            pb.equal(v(x).term(y, 1.0).plus_const(-2.0));
            rsoc(pb, &[v(x), v(y), Affine::constant(0.0).term(u, 2f64.sqrt())]);
        }),
        case("norm_on_line", 2f64.sqrt(), |pb| {
            let t = pb.add_var("t");
            let x = pb.add_var("x");
            let y = pb.add_var("y");
            pb.add_cost(t, 1.0);
            pb.equal(v(x).term(y, 1.0).plus_const(-2.0));
            soc(pb, &[v(t), v(x), v(y)]);
        }),
        case("distance_to_hyperplane", 2.0, |pb| {
            let t = pb.add_var("t");
            let xs: Vec<usize> = (0..3).map(|i| pb.add_var(format!("x{i}"))).collect();
            pb.add_cost(t, 1.0);
            pb.equal(
                Affine::constant(-6.0)
                    .term(xs[0], 1.0)
                    .term(xs[1], 2.0)
                    .term(xs[2], 2.0),
            );
            let mut rows = vec![v(t)];
            rows.extend(xs.iter().map(|&x| v(x)));
            soc(pb, &rows);
        }),
        case("distance_to_halfplane", 3.0 / 2f64.sqrt(), |pb| {
            let t = pb.add_var("t");
            let x = pb.add_var("x");
            let y = pb.add_var("y");
            pb.add_cost(t, 1.0);
            pb.nonneg(Affine::constant(0.0).term(x, -1.0).term(y, -1.0));
            soc(pb, &[v(t), v(x).plus_const(-1.0), v(y).plus_const(-2.0)]);
        }),
        case("box_lp", -2.5, |pb| {
            let x = pb.add_var("x");
            let y = pb.add_var("y");
            pb.add_cost(x, -1.0);
            pb.add_cost(y, -1.0);
            pb.nonneg(Affine::constant(1.0).term(x, -1.0));
            pb.nonneg(Affine::constant(2.0).term(y, -1.0));
            pb.nonneg(Affine::constant(2.5).term(x, -1.0).term(y, -1.0));
        }),
        case("redundant_bound", 0.0, |pb| {
            let x = pb.add_var("x");
            pb.add_cost(x, 1.0);
            pb.nonneg(v(x));
            pb.nonneg(v(x).plus_const(1.0));
        }),
        case("fermat_two_points", 4.0, |pb| {
            let t1 = pb.add_var("t1");
            let t2 = pb.add_var("t2");
            let x = pb.add_var("x");
            let y = pb.add_var("y");
            pb.add_cost(t1, 1.0);
            pb.add_cost(t2, 1.0);
            soc(pb, &[v(t1), v(x), v(y)]);
            soc(pb, &[v(t2), v(x).plus_const(-4.0), v(y)]);
        }),
        case("least_norm_squared", 0.5, |pb| {
            let t = pb.add_var("t");
            let x = pb.add_var("x");
            let y = pb.add_var("y");
            pb.add_cost(t, 1.0);
            pb.equal(v(x).term(y, 1.0).plus_const(-1.0));
            rsoc(pb, &[v(t), k(0.5), v(x), v(y)]);
        }),
        case("fixed_variable", 6.0, |pb| {
            let x = pb.add_var("x");
            pb.add_cost(x, 3.0);
            pb.equal(v(x).plus_const(-2.0));
        }),
        case("objective_offset", 11.0, |pb| {
            let x = pb.add_var("x");
            pb.add_cost(x, 1.0);
            pb.add_offset(10.0);
            pb.nonneg(v(x).plus_const(-1.0));
        }),
        case("clamped_quadratic", 4.0, |pb| {
            // min (x − 3)² with x <= 1
            let t = pb.add_var("t");
            let x = pb.add_var("x");
            pb.add_cost(t, 1.0);
            pb.nonneg(Affine::constant(1.0).term(x, -1.0));
            rsoc(pb, &[v(t), k(0.5), v(x).plus_const(-3.0)]);
        }),
        case("two_dim_rotated", 1.0, |pb| {
            let u = pb.add_var("u");
            let w = pb.add_var("w");
            pb.add_cost(u, 1.0);
            pb.add_cost(w, 1.0);
            pb.nonneg(v(u).plus_const(-1.0));
            rsoc(pb, &[v(u), v(w)]);
        }),
        case("fixed_point_norm", 5f64.sqrt(), |pb| {
            let t = pb.add_var("t");
            let x = pb.add_var("x");
            pb.add_cost(t, 1.0);
            pb.equal(v(x).plus_const(-2.0));
            soc(pb, &[v(t), v(x), k(1.0)]);
        }),
        case("linear_over_ellipse", -(5f64.sqrt()), |pb| {
            // x²/4 + y² <= 1
            let x = pb.add_var("x");
            let y = pb.add_var("y");
            pb.add_cost(x, 1.0);
            pb.add_cost(y, 1.0);
            soc(pb, &[k(1.0), Affine::constant(0.0).term(x, 0.5), v(y)]);
        }),
        case("simplex_with_norm_cap", -(2.0 + 1.12f64.sqrt()) / 4.0, |pb| {
            // max x1 over x >= 0, x1 + x2 = 1, ||x|| <= 0.8
            let x1 = pb.add_var("x1");
            let x2 = pb.add_var("x2");
            pb.add_cost(x1, -1.0);
            pb.nonneg(v(x1));
            pb.nonneg(v(x2));
            pb.equal(v(x1).term(x2, 1.0).plus_const(-1.0));
            soc(pb, &[k(0.8), v(x1), v(x2)]);
        }),
    ]
}
