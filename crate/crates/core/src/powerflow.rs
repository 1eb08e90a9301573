//! Newton–Raphson AC power flow in polar coordinates, generator
//! Q-limit enforcement by PV→PQ switching, and operating-limit checks.
//!
//! Mismatches and voltages are kept in `T`; the Jacobian is factored in
//! `f64` with a dense partial-pivot LU.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use serde::Serialize;

use crate::cycles::{recover_angles, CycleError};
use crate::network::{build_ybus, AdmittanceMatrix, BusKind, Link, NetworkCase, YbusError};
use crate::socp::RelaxationSolution;
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PfBusKind {
    Slack,
    Pv,
    Pq,
}

/// Bus classification, setpoints and starting point of a power-flow solve.
///
/// `vm` is the fixed magnitude at slack and PV buses and the starting
/// magnitude at PQ buses. `va` is the starting angle; the slack angle is
/// held at its value. `pg` is the dispatch of every generator; slack-bus
/// generators are re-dispatched by the solve. `qg` is only read for
/// generators whose bus has been switched to PQ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerFlowSpec<T> {
    pub kinds: Vec<PfBusKind>,
    pub vm: Vec<T>,
    pub va: Vec<T>,
    pub pg: Vec<T>,
    pub qg: Vec<T>,
}

impl<T: Scalar> PowerFlowSpec<T> {
    /// Flat start with the case's generator setpoints.
    pub fn from_case(case: &NetworkCase<T>) -> Self {
        let n = case.buses.len();
        let mut vm = vec![T::one(); n];
        for g in &case.generators {
            vm[g.bus] = g.vg;
        }
        Self {
            kinds: case.buses.iter().map(|b| kind_of(b.kind)).collect(),
            vm,
            va: vec![T::zero(); n],
            pg: case.generators.iter().map(|g| g.pg).collect(),
            qg: case.generators.iter().map(|g| g.qg).collect(),
        }
    }

    /// Seeds the solve from a relaxation optimum: dispatch `Pg`, magnitudes
    /// `√c_ii` and the given starting angles.
    pub fn from_relaxation(
        case: &NetworkCase<T>,
        solution: &RelaxationSolution<T>,
        theta: &[T],
    ) -> Self {
        let slack = case.slack();
        Self {
            kinds: case.buses.iter().map(|b| kind_of(b.kind)).collect(),
            vm: solution.vm.clone(),
            va: theta.iter().map(|&a| a - theta[slack]).collect(),
            pg: solution.pg.clone(),
            qg: solution.qg.clone(),
        }
    }

    fn validate(&self, case: &NetworkCase<T>) -> Result<(), PowerFlowError> {
        let n = case.buses.len();
        let ng = case.generators.len();
        for (what, got, expected) in [
            ("kinds", self.kinds.len(), n),
            ("vm", self.vm.len(), n),
            ("va", self.va.len(), n),
            ("pg", self.pg.len(), ng),
            ("qg", self.qg.len(), ng),
        ] {
            if got != expected {
                return Err(PowerFlowError::Spec(format!(
                    "{what} has {got} entries, expected {expected}"
                )));
            }
        }
        let slacks: Vec<usize> = (0..n).filter(|&i| self.kinds[i] == PfBusKind::Slack).collect();
        if slacks.len() != 1 {
            return Err(PowerFlowError::Spec(format!(
                "expected one slack bus, found {}",
                slacks.len()
            )));
        }
        let gens = case.gens_at();
        for i in 0..n {
            if self.kinds[i] != PfBusKind::Pq && gens[i].is_empty() {
                return Err(PowerFlowError::Spec(format!(
                    "bus {} is voltage-controlled but has no generator",
                    case.buses[i].id
                )));
            }
        }
        let s = slacks[0];
        let (v, b) = (self.vm[s], &case.buses[s]);
        if !(v >= b.vmin && v <= b.vmax) {
            return Err(PowerFlowError::Spec(format!(
                "slack voltage {v} outside [{}, {}]",
                b.vmin, b.vmax
            )));
        }
        Ok(())
    }
}

fn kind_of(k: BusKind) -> PfBusKind {
    match k {
        BusKind::Slack => PfBusKind::Slack,
        BusKind::Generator => PfBusKind::Pv,
        BusKind::Load => PfBusKind::Pq,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkFlow<T> {
    pub p_ft: T,
    pub q_ft: T,
    pub p_tf: T,
    pub q_tf: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerFlowResult<T> {
    pub vm: Vec<T>,
    pub va: Vec<T>,
    /// Per generator. Slack-bus and PV-bus reactive output is shared among
    /// a bus's generators in proportion to their Q ranges.
    pub pg: Vec<T>,
    pub qg: Vec<T>,
    /// Per merged link, in [`NetworkCase::links`] order.
    pub flows: Vec<LinkFlow<T>>,
    pub converged: bool,
    /// Newton iterations of the final solve.
    pub iterations: usize,
    /// Newton iterations summed over all switching rounds.
    pub total_iterations: usize,
    /// `‖mismatch‖∞` in pu.
    pub max_mismatch: T,
    /// Bus kinds the final solve used.
    pub kinds: Vec<PfBusKind>,
    /// External ids of buses switched from PV to PQ, in switching order.
    pub switched: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PowerFlowError {
    #[error("inconsistent power-flow spec: {0}")]
    Spec(String),
    #[error(transparent)]
    Ybus(#[from] YbusError),
    #[error("singular Jacobian at iteration {0}")]
    Singular(usize),
    #[error("no convergence after {} iterations (mismatch {:e})", .0.iterations, .0.max_mismatch)]
    Diverged(Box<PowerFlowResult<f64>>),
    #[error("PV/PQ switching did not settle after {0} rounds")]
    Oscillating(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerFlowOptions<T> {
    pub tol: T,
    pub max_iters: usize,
    pub enforce_q_limits: bool,
    pub max_switch_rounds: usize,
}

impl<T: Scalar> Default for PowerFlowOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::tol(1e-8),
            max_iters: 50,
            enforce_q_limits: true,
            max_switch_rounds: 20,
        }
    }
}

struct Network<T> {
    y: AdmittanceMatrix<T>,
    links: Vec<Link<T>>,
    gens: Vec<Vec<usize>>,
}

impl<T: Scalar> Network<T> {
    fn new(case: &NetworkCase<T>) -> Result<Self, PowerFlowError> {
        let y = build_ybus(case)?;
        let links = case.links().map_err(YbusError::ZeroImpedance)?;
        Ok(Self {
            y,
            links,
            gens: case.gens_at(),
        })
    }

    fn injections(&self, v: &[Complex<T>]) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let i = self.y.mul(v);
        let s = v.iter().zip(&i).map(|(&vi, ii)| vi * ii.conj()).collect();
        (s, i)
    }
}

fn polar<T: Scalar>(vm: &[T], va: &[T]) -> Vec<Complex<T>> {
    vm.iter().zip(va).map(|(&m, &a)| Complex::from_polar(m, a)).collect()
}

/// Scheduled net injection per bus.
fn scheduled<T: Scalar>(
    case: &NetworkCase<T>,
    net: &Network<T>,
    spec: &PowerFlowSpec<T>,
) -> Vec<Complex<T>> {
    case.buses
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let p: T = net.gens[i].iter().map(|&k| spec.pg[k]).sum();
            let q: T = net.gens[i].iter().map(|&k| spec.qg[k]).sum();
            Complex::new(p - b.pd, q - b.qd)
        })
        .collect()
}

/// One Newton–Raphson solve with fixed bus kinds.
///
/// Converged when the largest P (non-slack) or Q (PQ) mismatch is at most
/// `tol`. Returns [`PowerFlowError::Diverged`] with the last iterate when
/// `max_iters` is exhausted.
pub fn run_powerflow<T: Scalar>(
    case: &NetworkCase<T>,
    spec: &PowerFlowSpec<T>,
    tol: T,
    max_iters: usize,
) -> Result<PowerFlowResult<T>, PowerFlowError> {
    spec.validate(case)?;
    let net = Network::new(case)?;
    solve(case, &net, spec, tol, max_iters)
}

fn solve<T: Scalar>(
    case: &NetworkCase<T>,
    net: &Network<T>,
    spec: &PowerFlowSpec<T>,
    tol: T,
    max_iters: usize,
) -> Result<PowerFlowResult<T>, PowerFlowError> {
    let n = case.buses.len();
    let sbus = scheduled(case, net, spec);
    // column/row positions: angles for PV and PQ buses, magnitudes for PQ
    let mut pos_a = vec![None; n];
    let mut pos_m = vec![None; n];
    let mut na = 0;
    for i in 0..n {
        if spec.kinds[i] != PfBusKind::Slack {
            pos_a[i] = Some(na);
            na += 1;
        }
    }
    let mut nm = 0;
    for i in 0..n {
        if spec.kinds[i] == PfBusKind::Pq {
            pos_m[i] = Some(na + nm);
            nm += 1;
        }
    }
    let dim = na + nm;

    let mut vm = spec.vm.clone();
    let mut va = spec.va.clone();
    let mismatch = |s: &[Complex<T>]| -> (Vec<T>, T) {
        let mut f = vec![T::zero(); dim];
        let mut worst = T::zero();
        for i in 0..n {
            let d = s[i] - sbus[i];
            if let Some(r) = pos_a[i] {
                f[r] = d.re;
                worst = worst.max(d.re.abs());
            }
            if let Some(r) = pos_m[i] {
                f[r] = d.im;
                worst = worst.max(d.im.abs());
            }
        }
        (f, worst)
    };

    let mut v = polar(&vm, &va);
    let (mut s, mut cur) = net.injections(&v);
    let (mut f, mut worst) = mismatch(&s);
    let mut it = 0;
    while !(worst <= tol) {
        if it == max_iters || !worst.is_finite() {
            let last = finish(case, net, spec, &vm, &va, it, worst, false);
            return Err(PowerFlowError::Diverged(Box::new(to_f64(&last))));
        }
        it += 1;
        let mut jac = DMatrix::<f64>::zeros(dim, dim);
        for i in 0..n {
            if pos_a[i].is_none() {
                continue;
            }
            let vn_i = v[i] / vm[i];
            for &(j, yij) in net.y.row(i) {
                let vn_j = v[j] / vm[j];
                let mut d_va = -Complex::<T>::i() * v[i] * (yij * v[j]).conj();
                let mut d_vm = v[i] * (yij * vn_j).conj();
                if i == j {
                    d_va = d_va + Complex::<T>::i() * v[i] * cur[i].conj();
                    d_vm = d_vm + cur[i].conj() * vn_i;
                }
                let (ri, rq) = (pos_a[i], pos_m[i]);
                if let Some(c) = pos_a[j] {
                    if let Some(r) = ri {
                        jac[(r, c)] = d_va.re.as_f64();
                    }
                    if let Some(r) = rq {
                        jac[(r, c)] = d_va.im.as_f64();
                    }
                }
                if let Some(c) = pos_m[j] {
                    if let Some(r) = ri {
                        jac[(r, c)] = d_vm.re.as_f64();
                    }
                    if let Some(r) = rq {
                        jac[(r, c)] = d_vm.im.as_f64();
                    }
                }
            }
        }
        let rhs = DVector::from_iterator(dim, f.iter().map(|x| -x.as_f64()));
        let dx = jac
            .lu()
            .solve(&rhs)
            .filter(|d| d.iter().all(|x| x.is_finite()))
            .ok_or(PowerFlowError::Singular(it))?;
        for i in 0..n {
            if let Some(c) = pos_a[i] {
                va[i] += T::lit(dx[c]);
            }
            if let Some(c) = pos_m[i] {
                vm[i] += T::lit(dx[c]);
            }
        }
        v = polar(&vm, &va);
        (s, cur) = net.injections(&v);
        (f, worst) = mismatch(&s);
    }
    Ok(finish(case, net, spec, &vm, &va, it, worst, true))
}

#[allow(clippy::too_many_arguments)]
fn finish<T: Scalar>(
    case: &NetworkCase<T>,
    net: &Network<T>,
    spec: &PowerFlowSpec<T>,
    vm: &[T],
    va: &[T],
    iterations: usize,
    max_mismatch: T,
    converged: bool,
) -> PowerFlowResult<T> {
    let v = polar(vm, va);
    let (s, _) = net.injections(&v);
    let mut pg = spec.pg.clone();
    let mut qg = spec.qg.clone();
    for (i, b) in case.buses.iter().enumerate() {
        let at = &net.gens[i];
        if at.is_empty() {
            continue;
        }
        let total_q = s[i].im + b.qd;
        if spec.kinds[i] == PfBusKind::Slack {
            // the first unit absorbs the real-power balance
            let others: T = at[1..].iter().map(|&k| spec.pg[k]).sum();
            pg[at[0]] = s[i].re + b.pd - others;
        }
        if spec.kinds[i] != PfBusKind::Pq {
            share_q(case, at, total_q, &mut qg);
        }
    }
    let flows = net
        .links
        .iter()
        .map(|l| {
            let (vf, vt) = (v[l.from], v[l.to]);
            let sf = vf * (l.y_ff * vf + l.y_ft * vt).conj();
            let st = vt * (l.y_tf * vf + l.y_tt * vt).conj();
            LinkFlow {
                p_ft: sf.re,
                q_ft: sf.im,
                p_tf: st.re,
                q_tf: st.im,
            }
        })
        .collect();
    PowerFlowResult {
        vm: vm.to_vec(),
        va: va.to_vec(),
        pg,
        qg,
        flows,
        converged,
        iterations,
        total_iterations: iterations,
        max_mismatch,
        kinds: spec.kinds.clone(),
        switched: Vec::new(),
    }
}

fn share_q<T: Scalar>(case: &NetworkCase<T>, at: &[usize], total: T, qg: &mut [T]) {
    let ranges: Vec<T> = at
        .iter()
        .map(|&k| {
            let g = &case.generators[k];
            let r = g.qmax - g.qmin;
            if r.is_finite() && r > T::zero() {
                r
            } else {
                T::zero()
            }
        })
        .collect();
    let sum: T = ranges.iter().copied().sum();
    let count = T::lit(at.len() as f64);
    for (&k, &r) in at.iter().zip(&ranges) {
        qg[k] = if sum > T::zero() {
            total * r / sum
        } else {
            total / count
        };
    }
}

fn to_f64<T: Scalar>(r: &PowerFlowResult<T>) -> PowerFlowResult<f64> {
    let cv = |v: &[T]| v.iter().map(|x| x.as_f64()).collect();
    PowerFlowResult {
        vm: cv(&r.vm),
        va: cv(&r.va),
        pg: cv(&r.pg),
        qg: cv(&r.qg),
        flows: r
            .flows
            .iter()
            .map(|f| LinkFlow {
                p_ft: f.p_ft.as_f64(),
                q_ft: f.q_ft.as_f64(),
                p_tf: f.p_tf.as_f64(),
                q_tf: f.q_tf.as_f64(),
            })
            .collect(),
        converged: r.converged,
        iterations: r.iterations,
        total_iterations: r.total_iterations,
        max_mismatch: r.max_mismatch.as_f64(),
        kinds: r.kinds.clone(),
        switched: r.switched.clone(),
    }
}

/// Re-solves with PV buses whose reactive output leaves `[Σ qmin, Σ qmax]`
/// converted to PQ at the violated limit, until no further bus switches.
///
/// `base` must be a converged solve of `spec`. The slack bus never
/// switches. Buses are not switched back.
pub fn pv_to_pq_switching<T: Scalar>(
    case: &NetworkCase<T>,
    spec: &PowerFlowSpec<T>,
    base: PowerFlowResult<T>,
    opts: &PowerFlowOptions<T>,
) -> Result<PowerFlowResult<T>, PowerFlowError> {
    let net = Network::new(case)?;
    let mut spec = spec.clone();
    let mut result = base;
    let mut switched = Vec::new();
    let mut total = result.iterations;
    for _ in 0..opts.max_switch_rounds {
        let mut changed = false;
        for (i, at) in net.gens.iter().enumerate() {
            if spec.kinds[i] != PfBusKind::Pv {
                continue;
            }
            let q: T = at.iter().map(|&k| result.qg[k]).sum();
            let qmax: T = at.iter().map(|&k| case.generators[k].qmax).sum();
            let qmin: T = at.iter().map(|&k| case.generators[k].qmin).sum();
            let clamp_max = q > qmax + opts.tol;
            if clamp_max || q < qmin - opts.tol {
                for &k in at {
                    let g = &case.generators[k];
                    spec.qg[k] = if clamp_max { g.qmax } else { g.qmin };
                }
                spec.kinds[i] = PfBusKind::Pq;
                spec.vm[i] = result.vm[i];
                switched.push(case.buses[i].id);
                changed = true;
            }
        }
        if !changed {
            result.switched = switched;
            result.total_iterations = total;
            return Ok(result);
        }
        spec.va.clone_from(&result.va);
        result = solve(case, &net, &spec, opts.tol, opts.max_iters)?;
        total += result.iterations;
    }
    Err(PowerFlowError::Oscillating(opts.max_switch_rounds))
}

/// [`run_powerflow`] followed by [`pv_to_pq_switching`] when enabled.
pub fn solve_powerflow<T: Scalar>(
    case: &NetworkCase<T>,
    spec: &PowerFlowSpec<T>,
    opts: &PowerFlowOptions<T>,
) -> Result<PowerFlowResult<T>, PowerFlowError> {
    let base = run_powerflow(case, spec, opts.tol, opts.max_iters)?;
    if opts.enforce_q_limits {
        pv_to_pq_switching(case, spec, base, opts)
    } else {
        Ok(base)
    }
}

/// An operating limit missed by more than the check tolerance. Buses are
/// external ids; values are per unit.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Voltage { bus: usize, vm: f64, vmin: f64, vmax: f64 },
    ActivePower { generator: usize, bus: usize, pg: f64, pmin: f64, pmax: f64 },
    /// Bus-level reactive output against the summed unit limits.
    ReactivePower { bus: usize, qg: f64, qmin: f64, qmax: f64 },
    /// Largest end flow `|P|` on a link against its rating.
    LineFlow { from: usize, to: usize, branches: Vec<usize>, flow: f64, rate: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Voltage { bus, vm, vmin, vmax } => {
                write!(f, "bus {bus}: V = {vm:.6} outside [{vmin}, {vmax}]")
            }
            Violation::ActivePower { generator, bus, pg, pmin, pmax } => write!(
                f,
                "generator {generator} at bus {bus}: Pg = {pg:.6} outside [{pmin}, {pmax}]"
            ),
            Violation::ReactivePower { bus, qg, qmin, qmax } => {
                write!(f, "bus {bus}: Qg = {qg:.6} outside [{qmin}, {qmax}]")
            }
            Violation::LineFlow { from, to, flow, rate, .. } => {
                write!(f, "link {from}-{to}: |P| = {flow:.6} above rating {rate}")
            }
        }
    }
}

/// Voltage, generator P and Q, and line-rating checks on a solved state.
pub fn check_limits<T: Scalar>(
    result: &PowerFlowResult<T>,
    case: &NetworkCase<T>,
    tol: T,
) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, b) in case.buses.iter().enumerate() {
        let v = result.vm[i];
        if v < b.vmin - tol || v > b.vmax + tol {
            out.push(Violation::Voltage {
                bus: b.id,
                vm: v.as_f64(),
                vmin: b.vmin.as_f64(),
                vmax: b.vmax.as_f64(),
            });
        }
    }
    for (k, g) in case.generators.iter().enumerate() {
        let p = result.pg[k];
        if p < g.pmin - tol || p > g.pmax + tol {
            out.push(Violation::ActivePower {
                generator: k,
                bus: case.buses[g.bus].id,
                pg: p.as_f64(),
                pmin: g.pmin.as_f64(),
                pmax: g.pmax.as_f64(),
            });
        }
    }
    for (i, at) in case.gens_at().iter().enumerate() {
        if at.is_empty() {
            continue;
        }
        let q: T = at.iter().map(|&k| result.qg[k]).sum();
        let qmin: T = at.iter().map(|&k| case.generators[k].qmin).sum();
        let qmax: T = at.iter().map(|&k| case.generators[k].qmax).sum();
        if q < qmin - tol || q > qmax + tol {
            out.push(Violation::ReactivePower {
                bus: case.buses[i].id,
                qg: q.as_f64(),
                qmin: qmin.as_f64(),
                qmax: qmax.as_f64(),
            });
        }
    }
    if let Ok(links) = case.links() {
        for (l, fl) in links.iter().zip(&result.flows) {
            let Some(rate) = l.rate else { continue };
            let flow = fl.p_ft.abs().max(fl.p_tf.abs());
            if flow > rate + tol {
                out.push(Violation::LineFlow {
                    from: case.buses[l.from].id,
                    to: case.buses[l.to].id,
                    branches: l.branches.clone(),
                    flow: flow.as_f64(),
                    rate: rate.as_f64(),
                });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Realizability<T> {
    pub result: PowerFlowResult<T>,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RealizabilityError {
    #[error(transparent)]
    Angles(#[from] CycleError),
    #[error(transparent)]
    PowerFlow(#[from] PowerFlowError),
}

/// Power flow seeded from a relaxation optimum, then checked against the
/// case limits at `limit_tol`.
///
/// The starting angles are the solution's own `θ` when it has them and
/// tree-recovered angles otherwise.
pub fn verify_realizability<T: Scalar>(
    case: &NetworkCase<T>,
    solution: &RelaxationSolution<T>,
    opts: &PowerFlowOptions<T>,
    limit_tol: T,
) -> Result<Realizability<T>, RealizabilityError> {
    let theta = match &solution.theta {
        Some(t) => t.clone(),
        None => recover_angles(solution, case)?,
    };
    let spec = PowerFlowSpec::from_relaxation(case, solution, &theta);
    let result = solve_powerflow(case, &spec, opts)?;
    let violations = check_limits(&result, case, limit_tol);
    Ok(Realizability { result, violations })
}
