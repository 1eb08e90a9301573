//! Adapter routing programs to the Clarabel interior-point solver.
//!
//! Clarabel has no rotated cone, so rotated blocks are passed as Lorentz
//! cones after applying the orthogonal map `R` to their rows; duals and
//! slacks are mapped back with the same `R`.

use std::time::Instant;

use clarabel::algebra::CscMatrix as ClCsc;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};

use crate::backend::ConicBackend;
use crate::cones::{rotate, Cone};
use crate::ipm::{Residuals, SolveOutcome, SolveSettings, SolveStatus, SolverError};
use crate::program::ConicProgram;
use crate::scalar::{dot, norm_inf, Scalar};

#[derive(Debug, Clone, Copy, Default)]
pub struct Clarabel;

impl<T: Scalar> ConicBackend<T> for Clarabel {
    fn solve(
        &self,
        program: &ConicProgram<T>,
        settings: &SolveSettings<T>,
    ) -> Result<SolveOutcome<T>, SolverError> {
        program.validate()?;
        settings.validate()?;
        let start = Instant::now();
        let n = program.num_vars;
        let m = program.num_rows();
        let ranges = program.cone_ranges();

        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
        for (r, c, v) in program.a.triplets() {
            rows[r].push((c, v.as_f64()));
        }
        let mut b: Vec<f64> = program.b.iter().map(|v| v.as_f64()).collect();
        let mut cones = Vec::with_capacity(program.cones.len());
        for (cone, r) in program.cones.iter().zip(&ranges) {
            cones.push(match *cone {
                Cone::Zero(k) => SupportedConeT::ZeroConeT(k),
                Cone::NonNeg(k) => SupportedConeT::NonnegativeConeT(k),
                Cone::SecondOrder(k) => SupportedConeT::SecondOrderConeT(k),
                Cone::RotatedSecondOrder(k) => {
                    let (u, v) = (r.start, r.start + 1);
                    let h = std::f64::consts::FRAC_1_SQRT_2;
                    let mut ru = Vec::new();
                    let mut rv = Vec::new();
                    for &(c, a) in &rows[u] {
                        ru.push((c, h * a));
                        rv.push((c, h * a));
                    }
                    for &(c, a) in &rows[v] {
                        ru.push((c, h * a));
                        rv.push((c, -h * a));
                    }
                    rows[u] = ru;
                    rows[v] = rv;
                    let (bu, bv) = (b[u], b[v]);
                    b[u] = h * (bu + bv);
                    b[v] = h * (bu - bv);
                    SupportedConeT::SecondOrderConeT(k)
                }
            });
        }
        let (mut ii, mut jj, mut vv) = (Vec::new(), Vec::new(), Vec::new());
        for (r, row) in rows.iter().enumerate() {
            for &(c, v) in row {
                ii.push(r);
                jj.push(c);
                vv.push(v);
            }
        }
        let a = ClCsc::new_from_triplets(m, n, ii, jj, vv);
        let p = ClCsc::<f64>::zeros((n, n));
        let q: Vec<f64> = program.objective.iter().map(|v| v.as_f64()).collect();
        let tol_feas = settings.feas_tol.as_f64();
        let tol_gap = settings.gap_tol.as_f64();
        let cl_settings = DefaultSettings {
            verbose: settings.verbose,
            max_iter: settings.max_iters as u32,
            tol_feas,
            tol_gap_abs: tol_gap,
            tol_gap_rel: tol_gap,
            ..DefaultSettings::default()
        };
        let mut solver = DefaultSolver::new(&p, &q, &a, &b, &cones, cl_settings)
            .map_err(|_| SolverError::Settings("clarabel rejected the problem data"))?;
        solver.solve();
        let sol = &solver.solution;

        let mut s = sol.s.clone();
        let mut z = sol.z.clone();
        for (cone, r) in program.cones.iter().zip(&ranges) {
            if matches!(cone, Cone::RotatedSecondOrder(_)) {
                rotate(&mut s[r.clone()]);
                rotate(&mut z[r.clone()]);
            }
        }
        let conv = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
        let x: Vec<T> = conv(&sol.x);
        let s: Vec<T> = conv(&s);
        let dual: Vec<T> = conv(&z);

        let mut status = match sol.status {
            SolverStatus::Solved => SolveStatus::Optimal,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                SolveStatus::PrimalInfeasible
            }
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                SolveStatus::DualInfeasible
            }
            SolverStatus::MaxIterations | SolverStatus::MaxTime | SolverStatus::AlmostSolved => {
                SolveStatus::IterLimit
            }
            _ => SolveStatus::NumericalFailure,
        };

        // residuals recomputed on the caller's data and definitions
        let mut prim = s.clone();
        for (pi, bi) in prim.iter_mut().zip(&program.b) {
            *pi -= *bi;
        }
        program.a.gemv(T::one(), &x, T::one(), &mut prim);
        let mut dres = program.objective.clone();
        program.a.gemv_t(T::one(), &dual, T::one(), &mut dres);
        let pobj = dot(&program.objective, &x);
        let dobj = -dot(&program.b, &dual);
        let residuals = Residuals {
            primal: norm_inf(&prim) / (T::one() + norm_inf(&program.b)),
            dual: norm_inf(&dres) / (T::one() + norm_inf(&program.objective)),
            gap: (pobj - dobj).abs() / T::one().max(pobj.abs().min(dobj.abs())),
        };
        let gap_abs = (pobj - dobj).abs();
        let meets = residuals.primal <= settings.feas_tol
            && residuals.dual <= settings.feas_tol
            && (residuals.gap <= settings.gap_tol || gap_abs <= settings.gap_tol);
        if status == SolveStatus::Optimal && !meets {
            status = SolveStatus::NumericalFailure;
        }
        let (mut y, mut zc) = (Vec::new(), Vec::new());
        for (cone, r) in program.cones.iter().zip(&ranges) {
            if cone.is_zero() {
                y.extend_from_slice(&dual[r.clone()]);
            } else {
                zc.extend_from_slice(&dual[r.clone()]);
            }
        }
        let certificate = match status {
            SolveStatus::PrimalInfeasible => Some(dual.clone()),
            SolveStatus::DualInfeasible => Some(x.clone()),
            _ => None,
        };
        Ok(SolveOutcome {
            status,
            obj: pobj + program.objective_offset,
            dual_obj: dobj + program.objective_offset,
            x,
            s,
            y,
            z: zc,
            dual,
            residuals,
            iterations: sol.iterations as usize,
            wall_time: start.elapsed().as_secs_f64(),
            certificate,
            history: Vec::new(),
        })
    }
}
