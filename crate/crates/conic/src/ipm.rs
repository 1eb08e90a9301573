//! Homogeneous self-dual interior-point method.
//!
//! The embedding solved is
//!
//! ```text
//! [0]   [ 0   A'  c] [x]
//! [s] = [-A   0   b] [z],   s ∈ K, z ∈ K*, τ, κ >= 0
//! [κ]   [-c' -b'  0] [τ]
//! ```
//!
//! with Nesterov–Todd scaling and a Mehrotra predictor–corrector. Each
//! iteration factors one quasi-definite KKT matrix `[εI A'; A -(H+εI)]`
//! (`H = W'W`) and reuses it for three solves, each followed by iterative
//! refinement against the unregularized matrix.

use std::time::Instant;

use crate::cones::{circ, unit, Cone, Scaling};
use crate::ldl::{LdlError, LdlFactor};
use crate::program::{ConicProgram, ProgramError};
use crate::scalar::{axpy, dot, norm_inf, Scalar};
use crate::sparse::CscMatrix;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveSettings<T> {
    pub max_iters: usize,
    pub feas_tol: T,
    pub gap_tol: T,
    pub verbose: bool,
    /// Diagonal regularization added to the KKT matrix.
    pub static_reg: T,
    /// Maximum iterative-refinement passes per linear solve.
    pub refine_steps: usize,
    pub equilibrate: bool,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: T,
}

impl<T: Scalar> Default for SolveSettings<T> {
    fn default() -> Self {
        Self {
            max_iters: 100,
            feas_tol: T::tol(1e-8),
            gap_tol: T::tol(1e-8),
            verbose: false,
            static_reg: T::tol(1e-8),
            refine_steps: 10,
            equilibrate: true,
            step_fraction: T::lit(0.99),
        }
    }
}

impl<T: Scalar> SolveSettings<T> {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.max_iters == 0 {
            return Err(SolverError::Settings("max_iters must be positive"));
        }
        if !(self.feas_tol > T::zero() && self.gap_tol > T::zero()) {
            return Err(SolverError::Settings("tolerances must be positive"));
        }
        if !(self.step_fraction > T::zero() && self.step_fraction < T::one()) {
            return Err(SolverError::Settings("step_fraction must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    IterLimit,
    NumericalFailure,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::PrimalInfeasible => "primal_infeasible",
            SolveStatus::DualInfeasible => "dual_infeasible",
            SolveStatus::IterLimit => "iteration_limit",
            SolveStatus::NumericalFailure => "numerical_failure",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolverError {
    #[error("malformed program: {0}")]
    Program(#[from] ProgramError),
    #[error("invalid settings: {0}")]
    Settings(&'static str),
    #[error("KKT analysis failed: {0}")]
    Kkt(#[from] LdlError),
}

/// Relative residuals of the returned point.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Residuals<T> {
    /// `‖Ax + s − b‖∞ / (1 + ‖b‖∞)`
    pub primal: T,
    /// `‖A'z + c‖∞ / (1 + ‖c‖∞)`
    pub dual: T,
    /// `|c'x + b'z| / max(1, min(|c'x|, |b'z|))`
    pub gap: T,
}

/// Per-iteration diagnostics, in unscaled quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct IterateRecord<T> {
    pub iter: usize,
    pub pobj: T,
    pub dobj: T,
    pub residuals: Residuals<T>,
    /// `x̂'r̂x − ẑ'r̂z`; weak duality reads `pobj − dobj = ŝ'ẑ + cross >= cross`.
    pub cross: T,
    pub mu: T,
    pub tau: T,
    pub kappa: T,
    pub step: T,
}

#[derive(Clone, Debug)]
pub struct SolveOutcome<T> {
    pub status: SolveStatus,
    pub x: Vec<T>,
    pub s: Vec<T>,
    /// Duals of the equality (zero-cone) rows, in row order.
    pub y: Vec<T>,
    /// Duals of the remaining conic rows, in row order.
    pub z: Vec<T>,
    /// Full-length dual vector over all rows.
    pub dual: Vec<T>,
    pub obj: T,
    pub dual_obj: T,
    pub residuals: Residuals<T>,
    pub iterations: usize,
    pub wall_time: f64,
    /// Infeasibility ray: `z` (primal infeasible) or `x` (dual infeasible).
    pub certificate: Option<Vec<T>>,
    pub history: Vec<IterateRecord<T>>,
}

/// Solves `program` with the bundled interior-point method.
pub fn solve<T: Scalar>(
    program: &ConicProgram<T>,
    settings: &SolveSettings<T>,
) -> Result<SolveOutcome<T>, SolverError> {
    program.validate()?;
    settings.validate()?;
    let start = Instant::now();
    let mut ws = Workspace::new(program, settings)?;
    let mut out = ws.run(program, settings);
    out.wall_time = start.elapsed().as_secs_f64();
    Ok(out)
}

struct Scaled<T> {
    a: CscMatrix<T>,
    b: Vec<T>,
    c: Vec<T>,
    d: Vec<T>,
    e: Vec<T>,
}

/// Ruiz equilibration `Ã = E A D`, `b̃ = E b`, `c̃ = D c`.
///
/// Rows of a second-order block share one factor (their mean) so the
/// scaled block is still the same cone.
fn equilibrate<T: Scalar>(p: &ConicProgram<T>, enabled: bool) -> Scaled<T> {
    let (n, m) = (p.num_vars, p.num_rows());
    let mut a = p.a.clone();
    let mut d = vec![T::one(); n];
    let mut e = vec![T::one(); m];
    if enabled {
        let (lo, hi) = (T::lit(1e-4), T::lit(1e4));
        let inv_sqrt = |v: T| if v > T::zero() { T::one() / v.sqrt() } else { T::one() };
        for _ in 0..10 {
            let mut dd: Vec<T> = a.col_norms_inf().into_iter().map(inv_sqrt).collect();
            let mut ee: Vec<T> = a.row_norms_inf().into_iter().map(inv_sqrt).collect();
            for (j, v) in dd.iter_mut().enumerate() {
                *v = (*v * d[j]).max(lo).min(hi) / d[j];
            }
            for (i, v) in ee.iter_mut().enumerate() {
                *v = (*v * e[i]).max(lo).min(hi) / e[i];
            }
            a.scale(&ee, &dd);
            d.iter_mut().zip(&dd).for_each(|(x, y)| *x *= *y);
            e.iter_mut().zip(&ee).for_each(|(x, y)| *x *= *y);
        }
        let mut ee = vec![T::one(); m];
        for (cone, r) in p.cones.iter().zip(&p.cone_ranges()) {
            if cone.is_dense() {
                let mean = e[r.clone()].iter().copied().sum::<T>() / T::lit(r.len() as f64);
                for i in r.clone() {
                    ee[i] = mean / e[i];
                }
            }
        }
        a.scale(&ee, &vec![T::one(); n]);
        e.iter_mut().zip(&ee).for_each(|(x, y)| *x *= *y);
    }
    let c = p.objective.iter().zip(&d).map(|(&c, &dj)| c * dj).collect();
    let b = p.b.iter().zip(&e).map(|(&b, &ei)| b * ei).collect();
    Scaled { a, b, c, d, e }
}

struct Workspace<T> {
    n: usize,
    m: usize,
    data: Scaled<T>,
    cones: Vec<Cone>,
    ranges: Vec<std::ops::Range<usize>>,
    scalings: Vec<Scaling<T>>,
    kkt: LdlFactor<T>,
    kkt_vals: Vec<T>,
    // offset of each cone's block inside `kkt_vals`
    block_offsets: Vec<usize>,
    degree: usize,
}

struct Direction<T> {
    x: Vec<T>,
    s: Vec<T>,
    z: Vec<T>,
    tau: T,
    kappa: T,
}

impl<T: Scalar> Workspace<T> {
    fn new(p: &ConicProgram<T>, settings: &SolveSettings<T>) -> Result<Self, SolverError> {
        let n = p.num_vars;
        let m = p.num_rows();
        let data = equilibrate(p, settings.equilibrate);
        let ranges = p.cone_ranges();

        let mut entries: Vec<(usize, usize)> = (0..n).map(|j| (j, j)).collect();
        for (r, c, _) in data.a.triplets() {
            entries.push((c, n + r));
        }
        let mut block_offsets = Vec::with_capacity(p.cones.len());
        for (cone, r) in p.cones.iter().zip(&ranges) {
            block_offsets.push(entries.len());
            if cone.is_dense() {
                for i in r.clone() {
                    for j in i..r.end {
                        entries.push((n + i, n + j));
                    }
                }
            } else {
                for i in r.clone() {
                    entries.push((n + i, n + i));
                }
            }
        }
        let signs: Vec<i8> = (0..n + m).map(|i| if i < n { 1 } else { -1 }).collect();
        let kkt = LdlFactor::new(n + m, &entries, &signs)?;
        let mut kkt_vals = vec![T::zero(); entries.len()];
        kkt_vals[n..n + data.a.nnz()].copy_from_slice(&data.a.nzval);

        Ok(Self {
            n,
            m,
            scalings: p.cones.iter().map(Scaling::new).collect(),
            cones: p.cones.clone(),
            ranges,
            kkt,
            kkt_vals,
            block_offsets,
            degree: p.degree(),
            data,
        })
    }

    fn factor(&mut self, reg: T) -> Result<(), LdlError> {
        let n = self.n;
        for v in &mut self.kkt_vals[..n] {
            *v = reg;
        }
        let mut h = Vec::new();
        for (k, sc) in self.scalings.iter().enumerate() {
            let off = self.block_offsets[k];
            let dim = self.ranges[k].len();
            if self.cones[k].is_dense() {
                sc.hessian_upper(&mut h);
                let mut idx = 0;
                for i in 0..dim {
                    for j in i..dim {
                        let diag = if i == j { reg } else { T::zero() };
                        self.kkt_vals[off + idx] = -h[idx] - diag;
                        idx += 1;
                    }
                }
            } else {
                sc.hessian_upper(&mut h);
                for i in 0..dim {
                    let hi = if h.is_empty() { T::zero() } else { h[i] };
                    self.kkt_vals[off + i] = -hi - reg;
                }
            }
        }
        self.kkt
            .factor(&self.kkt_vals, T::rel(1e-13), T::tol(2e-7))
    }

    /// `[0 A'; A -H] [x; z]` without regularization.
    fn kkt_mul(&self, x: &[T], z: &[T], out_x: &mut [T], out_z: &mut [T]) {
        self.data.a.gemv_t(T::one(), z, T::zero(), out_x);
        self.data.a.gemv(T::one(), x, T::zero(), out_z);
        let mut tmp = Vec::new();
        for (k, sc) in self.scalings.iter().enumerate() {
            if self.cones[k].is_zero() {
                continue;
            }
            let r = self.ranges[k].clone();
            tmp.resize(r.len(), T::zero());
            sc.hessian_mul(&z[r.clone()], &mut tmp);
            for (o, t) in out_z[r].iter_mut().zip(&tmp) {
                *o -= *t;
            }
        }
    }

    fn solve_kkt(&self, rhs_x: &[T], rhs_z: &[T], refine: usize) -> (Vec<T>, Vec<T>) {
        let n = self.n;
        let rhs: Vec<T> = rhs_x.iter().chain(rhs_z).copied().collect();
        let mut sol = rhs.clone();
        self.kkt.solve(&mut sol);
        let stop = T::lit(1e-13) * (T::one() + norm_inf(&rhs));
        let mut rx = vec![T::zero(); n];
        let mut rz = vec![T::zero(); self.m];
        let residual = |sol: &[T], rx: &mut [T], rz: &mut [T]| -> Vec<T> {
            self.kkt_mul(&sol[..n], &sol[n..], rx, rz);
            rhs.iter()
                .zip(rx.iter().chain(rz.iter()))
                .map(|(a, b)| *a - *b)
                .collect()
        };
        let mut res = residual(&sol, &mut rx, &mut rz);
        let mut err = norm_inf(&res);
        for _ in 0..refine {
            if err <= stop {
                break;
            }
            let mut corr = res.clone();
            self.kkt.solve(&mut corr);
            let mut trial = sol.clone();
            axpy(T::one(), &corr, &mut trial);
            let trial_res = residual(&trial, &mut rx, &mut rz);
            let trial_err = norm_inf(&trial_res);
            // keep refining only while it pays off
            if !(trial_err < err) {
                break;
            }
            let ratio = err / trial_err;
            sol = trial;
            res = trial_res;
            err = trial_err;
            if ratio < T::lit(2.0) {
                break;
            }
        }
        let z = sol.split_off(n);
        (sol, z)
    }

    #[allow(clippy::too_many_arguments)]
    fn newton_step(
        &self,
        state: &State<T>,
        res: &ResidualVecs<T>,
        x1: &[T],
        z1: &[T],
        dst: &[T],
        dk: T,
        keep: T,
        refine: usize,
    ) -> Direction<T> {
        let (tau, kappa) = (state.tau, state.kappa);
        let r1: Vec<T> = res.rx.iter().map(|&v| -keep * v).collect();
        let mut r2: Vec<T> = res.rz.iter().map(|&v| -keep * v).collect();
        let mut t1 = Vec::new();
        let mut t2 = Vec::new();
        for (k, sc) in self.scalings.iter().enumerate() {
            if self.cones[k].is_zero() {
                continue;
            }
            let r = self.ranges[k].clone();
            t1.resize(r.len(), T::zero());
            t2.resize(r.len(), T::zero());
            sc.lambda_inv_circ(&dst[r.clone()], &mut t1);
            sc.mul_w(&t1, &mut t2, false);
            for (o, v) in r2[r].iter_mut().zip(&t2) {
                *o -= *v;
            }
        }
        let (x2, z2) = self.solve_kkt(&r1, &r2, refine);
        let c = &self.data.c;
        let b = &self.data.b;
        let r3 = -keep * res.rtau;
        let denom = dot(c, x1) + dot(b, z1) - kappa / tau;
        let dtau = (r3 - dot(c, &x2) - dot(b, &z2) - dk / tau) / denom;
        let mut dx = x2;
        axpy(dtau, x1, &mut dx);
        let mut dz = z2;
        axpy(dtau, z1, &mut dz);
        let mut ds = vec![T::zero(); self.m];
        for (k, sc) in self.scalings.iter().enumerate() {
            if self.cones[k].is_zero() {
                continue;
            }
            let r = self.ranges[k].clone();
            t1.resize(r.len(), T::zero());
            t2.resize(r.len(), T::zero());
            // ds = W(λ \ dst − W dz)
            sc.lambda_inv_circ(&dst[r.clone()], &mut t1);
            sc.mul_w(&dz[r.clone()], &mut t2, false);
            for (a, b) in t1.iter_mut().zip(&t2) {
                *a -= *b;
            }
            sc.mul_w(&t1, &mut ds[r], false);
        }
        let dkappa = (dk - kappa * dtau) / tau;
        Direction {
            x: dx,
            s: ds,
            z: dz,
            tau: dtau,
            kappa: dkappa,
        }
    }

    fn max_step(&self, st: &State<T>, d: &Direction<T>) -> T {
        let mut alpha = T::infinity();
        for (k, sc) in self.scalings.iter().enumerate() {
            let r = self.ranges[k].clone();
            alpha = alpha.min(sc.max_step(&st.s[r.clone()], &st.z[r.clone()], &d.s[r.clone()], &d.z[r]));
        }
        if d.tau < T::zero() {
            alpha = alpha.min(-st.tau / d.tau);
        }
        if d.kappa < T::zero() {
            alpha = alpha.min(-st.kappa / d.kappa);
        }
        alpha
    }

    fn residuals(&self, st: &State<T>) -> ResidualVecs<T> {
        let a = &self.data.a;
        let mut rx = self.data.c.iter().map(|&c| c * st.tau).collect::<Vec<_>>();
        a.gemv_t(T::one(), &st.z, T::one(), &mut rx);
        let mut rz: Vec<T> = st
            .s
            .iter()
            .zip(&self.data.b)
            .map(|(&s, &b)| s - b * st.tau)
            .collect();
        a.gemv(T::one(), &st.x, T::one(), &mut rz);
        let rtau = dot(&self.data.c, &st.x) + dot(&self.data.b, &st.z) + st.kappa;
        ResidualVecs { rx, rz, rtau }
    }

    /// Unscaled `(x, s, z)` without dividing by τ.
    fn unscale(&self, st: &State<T>) -> (Vec<T>, Vec<T>, Vec<T>) {
        let x = st.x.iter().zip(&self.data.d).map(|(&v, &d)| v * d).collect();
        let s = st.s.iter().zip(&self.data.e).map(|(&v, &e)| v / e).collect();
        let z = st
            .z
            .iter()
            .zip(&self.data.e)
            .map(|(&v, &e)| v * e)
            .collect();
        (x, s, z)
    }

    fn run(&mut self, p: &ConicProgram<T>, settings: &SolveSettings<T>) -> SolveOutcome<T> {
        let (n, m) = (self.n, self.m);
        let mut st = State {
            x: vec![T::zero(); n],
            s: vec![T::zero(); m],
            z: vec![T::zero(); m],
            tau: T::one(),
            kappa: T::one(),
        };
        for (cone, r) in self.cones.iter().zip(&self.ranges) {
            unit(cone, &mut st.s[r.clone()]);
            unit(cone, &mut st.z[r.clone()]);
        }

        let b_norm = norm_inf(&p.b);
        let c_norm = norm_inf(&p.objective);
        let mut history = Vec::new();
        let status;
        let mut certificate = None;
        let mut last_step = T::zero();
        let mut iter = 0usize;
        let mut residuals;

        loop {
            let (xu, su, zu) = self.unscale(&st);
            let inv_tau = T::one() / st.tau;
            let xh: Vec<T> = xu.iter().map(|&v| v * inv_tau).collect();
            let sh: Vec<T> = su.iter().map(|&v| v * inv_tau).collect();
            let zh: Vec<T> = zu.iter().map(|&v| v * inv_tau).collect();

            let mut prim = sh.clone();
            axpy(-T::one(), &p.b, &mut prim);
            p.a.gemv(T::one(), &xh, T::one(), &mut prim);
            let mut dual = p.objective.clone();
            p.a.gemv_t(T::one(), &zh, T::one(), &mut dual);
            let pobj = dot(&p.objective, &xh);
            let dobj = -dot(&p.b, &zh);
            let gap_abs = (pobj - dobj).abs();
            residuals = Residuals {
                primal: norm_inf(&prim) / (T::one() + b_norm),
                dual: norm_inf(&dual) / (T::one() + c_norm),
                gap: gap_abs / T::one().max(pobj.abs().min(dobj.abs())),
            };
            let cross = dot(&xh, &dual) - dot(&zh, &prim);
            let mu = (dot(&st.s, &st.z) + st.tau * st.kappa) / T::lit((self.degree + 1) as f64);
            history.push(IterateRecord {
                iter,
                pobj: pobj + p.objective_offset,
                dobj: dobj + p.objective_offset,
                residuals,
                cross,
                mu,
                tau: st.tau,
                kappa: st.kappa,
                step: last_step,
            });
            if settings.verbose {
                eprintln!(
                    "{:>3}  pobj {:+.8e}  dobj {:+.8e}  pres {:.2e}  dres {:.2e}  gap {:.2e}  mu {:.2e}  step {:.3}  tau {:.2e} kap {:.2e}",
                    iter,
                    pobj.as_f64(),
                    dobj.as_f64(),
                    residuals.primal.as_f64(),
                    residuals.dual.as_f64(),
                    residuals.gap.as_f64(),
                    mu.as_f64(),
                    last_step.as_f64(), st.tau.as_f64(), st.kappa.as_f64()
                );
            }

            if !(pobj.is_finite() && dobj.is_finite() && mu.is_finite()) {
                status = SolveStatus::NumericalFailure;
                break;
            }
            if residuals.primal <= settings.feas_tol
                && residuals.dual <= settings.feas_tol
                && (residuals.gap <= settings.gap_tol || gap_abs <= settings.gap_tol)
            {
                status = SolveStatus::Optimal;
                break;
            }
            // infeasibility rays use the unnormalized iterate
            let bz = dot(&p.b, &zu);
            if bz < T::zero() {
                let mut atz = vec![T::zero(); n];
                p.a.gemv_t(T::one(), &zu, T::zero(), &mut atz);
                if norm_inf(&atz) <= settings.feas_tol * (-bz) {
                    status = SolveStatus::PrimalInfeasible;
                    certificate = Some(zu.iter().map(|&v| v / -bz).collect());
                    break;
                }
            }
            let cx = dot(&p.objective, &xu);
            if cx < T::zero() {
                let mut axs = su.clone();
                p.a.gemv(T::one(), &xu, T::one(), &mut axs);
                if norm_inf(&axs) <= settings.feas_tol * (-cx) {
                    status = SolveStatus::DualInfeasible;
                    certificate = Some(xu.iter().map(|&v| v / -cx).collect());
                    break;
                }
            }
            if iter >= settings.max_iters {
                status = SolveStatus::IterLimit;
                break;
            }

            // scaling and factorization
            let mut interior = true;
            for (k, sc) in self.scalings.iter_mut().enumerate() {
                let r = self.ranges[k].clone();
                interior &= sc.update(&st.s[r.clone()], &st.z[r]);
            }
            if !interior || self.factor(settings.static_reg).is_err() {
                status = SolveStatus::NumericalFailure;
                break;
            }

            let res = self.residuals(&st);
            let neg_c: Vec<T> = self.data.c.iter().map(|&v| -v).collect();
            let (x1, z1) = self.solve_kkt(&neg_c, &self.data.b, settings.refine_steps);

            // affine predictor
            let mut lam_sq = vec![T::zero(); m];
            for (k, sc) in self.scalings.iter().enumerate() {
                sc.lambda_sq(&mut lam_sq[self.ranges[k].clone()]);
            }
            let dst_aff: Vec<T> = lam_sq.iter().map(|&v| -v).collect();
            let dk_aff = -st.tau * st.kappa;
            let aff = self.newton_step(&st, &res, &x1, &z1, &dst_aff, dk_aff, T::one(), settings.refine_steps);
            let alpha_aff = self.max_step(&st, &aff).min(T::one());
            let sigma = (T::one() - alpha_aff).powi(3);

            // centering + second-order correction
            let mut dst = vec![T::zero(); m];
            let mut e = Vec::new();
            let mut ws = Vec::new();
            let mut wz = Vec::new();
            let mut cc = Vec::new();
            for (k, sc) in self.scalings.iter().enumerate() {
                let cone = &self.cones[k];
                if cone.is_zero() {
                    continue;
                }
                let r = self.ranges[k].clone();
                let len = r.len();
                e.resize(len, T::zero());
                ws.resize(len, T::zero());
                wz.resize(len, T::zero());
                cc.resize(len, T::zero());
                unit(cone, &mut e);
                sc.mul_w(&aff.s[r.clone()], &mut ws, true);
                sc.mul_w(&aff.z[r.clone()], &mut wz, false);
                circ(cone, &ws, &wz, &mut cc);
                for i in 0..len {
                    dst[r.start + i] = -lam_sq[r.start + i] + sigma * mu * e[i] - cc[i];
                }
            }
            let dk = -st.tau * st.kappa + sigma * mu - aff.tau * aff.kappa;
            let dir = self.newton_step(
                &st,
                &res,
                &x1,
                &z1,
                &dst,
                dk,
                T::one() - sigma,
                settings.refine_steps,
            );
            let alpha = settings.step_fraction * self.max_step(&st, &dir).min(T::one());
            if !(alpha > T::lit(1e-12)) {
                status = SolveStatus::NumericalFailure;
                break;
            }
            axpy(alpha, &dir.x, &mut st.x);
            axpy(alpha, &dir.s, &mut st.s);
            axpy(alpha, &dir.z, &mut st.z);
            st.tau += alpha * dir.tau;
            st.kappa += alpha * dir.kappa;
            last_step = alpha;
            iter += 1;
        }

        let (xu, su, zu) = self.unscale(&st);
        let (x, s, dual) = if status == SolveStatus::PrimalInfeasible || status == SolveStatus::DualInfeasible {
            (xu, su, zu)
        } else {
            let it = T::one() / st.tau;
            (
                xu.iter().map(|&v| v * it).collect(),
                su.iter().map(|&v| v * it).collect(),
                zu.iter().map(|&v| v * it).collect::<Vec<T>>(),
            )
        };
        let mut y = Vec::new();
        let mut z = Vec::new();
        for (cone, r) in self.cones.iter().zip(&self.ranges) {
            if cone.is_zero() {
                y.extend_from_slice(&dual[r.clone()]);
            } else {
                z.extend_from_slice(&dual[r.clone()]);
            }
        }
        let obj = p.objective_value(&x);
        let dual_obj = -dot(&p.b, &dual) + p.objective_offset;
        SolveOutcome {
            status,
            x,
            s,
            y,
            z,
            dual,
            obj,
            dual_obj,
            residuals,
            iterations: iter,
            wall_time: 0.0,
            certificate,
            history,
        }
    }
}

struct State<T> {
    x: Vec<T>,
    s: Vec<T>,
    z: Vec<T>,
    tau: T,
    kappa: T,
}

struct ResidualVecs<T> {
    rx: Vec<T>,
    rz: Vec<T>,
    rtau: T,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::program::{Affine, ProgramBuilder};

    #[test]
    fn one_dimensional_lp() {
        // min x s.t. x >= 3
        let mut pb = ProgramBuilder::<f64>::new();
        let x = pb.add_var("x");
        pb.add_cost(x, 1.0);
        pb.nonneg(Affine::var(x).plus_const(-3.0));
        let out = solve(&pb.build(), &SolveSettings::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.x[0] - 3.0).abs() < 1e-7);
        assert!((out.obj - 3.0).abs() < 1e-7);
    }

    #[test]
    fn soc_norm_epigraph() {
        // min t s.t. ||(1, 1)|| <= t
        let mut pb = ProgramBuilder::<f64>::new();
        let t = pb.add_var("t");
        pb.add_cost(t, 1.0);
        pb.add_block(
            Cone::SecondOrder(3),
            &[Affine::var(t), Affine::constant(1.0), Affine::constant(1.0)],
        );
        let out = solve(&pb.build(), &SolveSettings::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.obj - 2f64.sqrt()).abs() < 1e-7, "{}", out.obj);
    }

    #[test]
    fn f32_lp_converges_at_type_tolerance() {
        let mut pb = ProgramBuilder::<f32>::new();
        let x = pb.add_var("x");
        let y = pb.add_var("y");
        pb.add_cost(x, 1.0);
        pb.add_cost(y, 2.0);
        pb.equal(Affine::var(x).term(y, 1.0).plus_const(-1.0));
        pb.bounds(x, 0.0, 0.25);
        pb.bounds(y, 0.0, f32::INFINITY);
        let out = solve(&pb.build(), &SolveSettings::default()).unwrap();
        assert_eq!(out.status, SolveStatus::Optimal);
        assert!((out.obj - 1.75).abs() < 1e-3);
    }

    #[test]
    fn infeasible_lp_certificate() {
        // x >= 1 and x <= 0
        let mut pb = ProgramBuilder::<f64>::new();
        let x = pb.add_var("x");
        pb.add_cost(x, 1.0);
        pb.nonneg(Affine::var(x).plus_const(-1.0));
        pb.nonneg(Affine::constant(0.0).term(x, -1.0));
        let p = pb.build();
        let out = solve(&p, &SolveSettings::default()).unwrap();
        assert_eq!(out.status, SolveStatus::PrimalInfeasible);
        let ray = out.certificate.unwrap();
        // A'z = 0, b'z = -1, z >= 0
        let mut atz = vec![0.0];
        p.a.gemv_t(1.0, &ray, 0.0, &mut atz);
        assert!(atz[0].abs() < 1e-8);
        assert!((dot(&p.b, &ray) + 1.0).abs() < 1e-12);
        assert!(ray.iter().all(|&v| v >= -1e-12));
    }

    #[test]
    fn unbounded_lp_certificate() {
        // min -x s.t. x >= 0
        let mut pb = ProgramBuilder::<f64>::new();
        let x = pb.add_var("x");
        pb.add_cost(x, -1.0);
        pb.nonneg(Affine::var(x));
        let out = solve(&pb.build(), &SolveSettings::default()).unwrap();
        assert_eq!(out.status, SolveStatus::DualInfeasible);
        assert!(out.certificate.unwrap()[0] > 0.0);
    }

    #[test]
    fn zero_iterations_rejected() {
        let mut pb = ProgramBuilder::<f64>::new();
        pb.add_var("x");
        let s = SolveSettings {
            max_iters: 0,
            ..SolveSettings::default()
        };
        assert!(matches!(solve(&pb.build(), &s), Err(SolverError::Settings(_))));
    }
}
