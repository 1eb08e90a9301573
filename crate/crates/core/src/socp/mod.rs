//! Conic programs for the OPF relaxations.
//!
//! Both formulations lift voltages to `c_ii = V_i²`,
//! `c_ij = V_i V_j cos(θ_i − θ_j)` and `s_ij = V_i V_j sin(θ_i − θ_j)`, one
//! `(c_ij, s_ij)` pair per [`Link`], and keep the convex hull
//! `c_ij² + s_ij² <= c_ii c_jj` as a second-order cone. The new formulation
//! adds bus angles `θ` with `θ_ref = 0` and ties them to the lifted variables
//! through `|θ_i − θ_j − s_ij| <= ε_θ`, penalising `ε_θ` with weight `β`.

mod solution;

use acopf_conic::{Affine, Cone, ConicProgram, ProgramBuilder};

use crate::network::{AdmittanceMatrix, Link, NetworkCase};
use crate::Scalar;

pub use solution::{extract_solution, map_exact_point, ExtractError, RelaxationSolution};

/// Default upper bound on `ε_θ`, in radians.
pub const DEFAULT_EPS_MAX: f64 = 0.03491;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FormulationKind {
    /// SOC relaxation without any angle coupling.
    RelaxedNoArctan,
    /// SOC relaxation with bus angles and linear angle constraints.
    NewSocp,
}

impl FormulationKind {
    pub fn label(self) -> &'static str {
        match self {
            FormulationKind::RelaxedNoArctan => "relaxed",
            FormulationKind::NewSocp => "new",
        }
    }
}

impl std::fmt::Display for FormulationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for FormulationKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "relaxed" => Ok(FormulationKind::RelaxedNoArctan),
            "new" => Ok(FormulationKind::NewSocp),
            _ => Err(format!("unknown formulation `{s}` (expected relaxed or new)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("admittance matrix is {got}x{got} but the case has {expected} buses")]
    YbusSize { expected: usize, got: usize },
    #[error("branch {0} has zero series impedance")]
    ZeroImpedance(usize),
    #[error("eps_max must be positive and finite, got {0}")]
    EpsMax(f64),
    #[error("beta must be nonnegative and finite, got {0}")]
    Beta(f64),
}

/// A built relaxation together with what is needed to interpret its solution.
#[derive(Debug, Clone)]
pub struct OpfProgram<T> {
    pub program: ConicProgram<T>,
    pub kind: FormulationKind,
    /// Weight on `ε_θ`; zero for [`FormulationKind::RelaxedNoArctan`].
    pub beta: T,
    pub eps_max: T,
    pub links: Vec<Link<T>>,
    pub num_buses: usize,
    pub num_gens: usize,
}

/// `Σ_g (a Pmax² + b Pmax + c) / eps_max`.
pub fn default_beta<T: Scalar>(case: &NetworkCase<T>, eps_max: T) -> Result<T, BuildError> {
    if !(eps_max > T::zero() && eps_max.is_finite()) {
        return Err(BuildError::EpsMax(eps_max.as_f64()));
    }
    let total: T = case
        .generators
        .iter()
        .map(|g| g.a * g.pmax * g.pmax + g.b * g.pmax + g.c)
        .sum();
    Ok(total / eps_max)
}

pub(crate) fn name_cii<T>(case: &NetworkCase<T>, i: usize) -> String {
    format!("cii[{}]", case.buses[i].id)
}

pub(crate) fn name_theta<T>(case: &NetworkCase<T>, i: usize) -> String {
    format!("theta[{}]", case.buses[i].id)
}

/// Real-power flow at both ends of a link as affine expressions in
/// `(c_ff, c_tt, c, s)` columns: `(P_ft, P_tf)`.
pub(crate) fn link_flows<T: Scalar>(
    l: &Link<T>,
    cf: usize,
    ct: usize,
    c: usize,
    s: usize,
) -> (Affine<T>, Affine<T>) {
    let pft = Affine::constant(T::zero())
        .term(cf, l.y_ff.re)
        .term(c, l.y_ft.re)
        .term(s, l.y_ft.im);
    let ptf = Affine::constant(T::zero())
        .term(ct, l.y_tt.re)
        .term(c, l.y_tf.re)
        .term(s, -l.y_tf.im);
    (pft, ptf)
}

/// Builds the relaxation of `kind` for `case`.
///
/// `beta_override` replaces [`default_beta`]; it is ignored for the
/// relaxation without angles.
pub fn build<T: Scalar>(
    case: &NetworkCase<T>,
    ybus: &AdmittanceMatrix<T>,
    kind: FormulationKind,
    eps_max: T,
    beta_override: Option<T>,
) -> Result<OpfProgram<T>, BuildError> {
    let n = case.buses.len();
    if ybus.n != n {
        return Err(BuildError::YbusSize {
            expected: n,
            got: ybus.n,
        });
    }
    if !(eps_max > T::zero() && eps_max.is_finite()) {
        return Err(BuildError::EpsMax(eps_max.as_f64()));
    }
    let beta = match (kind, beta_override) {
        (FormulationKind::RelaxedNoArctan, _) => T::zero(),
        (FormulationKind::NewSocp, Some(b)) if b >= T::zero() && b.is_finite() => b,
        (FormulationKind::NewSocp, Some(b)) => return Err(BuildError::Beta(b.as_f64())),
        (FormulationKind::NewSocp, None) => default_beta(case, eps_max)?,
    };
    let links = case.links().map_err(BuildError::ZeroImpedance)?;
    let two = T::lit(2.0);

    let mut pb = ProgramBuilder::<T>::new();
    let cii: Vec<usize> = (0..n).map(|i| pb.add_var(name_cii(case, i))).collect();
    let cij: Vec<usize> = (0..links.len())
        .map(|k| pb.add_var(format!("cij[{k}]")))
        .collect();
    let sij: Vec<usize> = (0..links.len())
        .map(|k| pb.add_var(format!("sij[{k}]")))
        .collect();
    let pg: Vec<usize> = (0..case.generators.len())
        .map(|k| pb.add_var(format!("pg[{k}]")))
        .collect();
    let qg: Vec<usize> = (0..case.generators.len())
        .map(|k| pb.add_var(format!("qg[{k}]")))
        .collect();
    let t: Vec<Option<usize>> = case
        .generators
        .iter()
        .enumerate()
        .map(|(k, g)| (g.a > T::zero()).then(|| pb.add_var(format!("t[{k}]"))))
        .collect();

    // objective
    for (k, g) in case.generators.iter().enumerate() {
        if let Some(tk) = t[k] {
            pb.add_cost(tk, g.a);
        }
        pb.add_cost(pg[k], g.b);
        pb.add_offset(g.c);
    }

    // power balance
    let gens_at = case.gens_at();
    let mut incident: Vec<Vec<(usize, usize, T)>> = vec![Vec::new(); n];
    for (k, l) in links.iter().enumerate() {
        incident[l.from].push((k, l.to, T::one()));
        incident[l.to].push((k, l.from, -T::one()));
    }
    for i in 0..n {
        let bus = &case.buses[i];
        let mut p = Affine::constant(-bus.pd).term(cii[i], -ybus.g(i, i));
        let mut q = Affine::constant(-bus.qd).term(cii[i], ybus.b(i, i));
        for &gk in &gens_at[i] {
            p = p.term(pg[gk], T::one());
            q = q.term(qg[gk], T::one());
        }
        for &(k, j, sign) in &incident[i] {
            let y = ybus.get(i, j);
            p = p.term(cij[k], -y.re).term(sij[k], -y.im * sign);
            q = q.term(sij[k], -y.re * sign).term(cij[k], y.im);
        }
        pb.equal(p);
        pb.equal(q);
    }

    // voltage, dispatch and flow limits
    for (i, bus) in case.buses.iter().enumerate() {
        pb.bounds(cii[i], bus.vmin * bus.vmin, bus.vmax * bus.vmax);
    }
    for (k, g) in case.generators.iter().enumerate() {
        pb.bounds(pg[k], g.pmin, g.pmax);
        pb.bounds(qg[k], g.qmin, g.qmax);
    }
    for (k, l) in links.iter().enumerate() {
        if let Some(rate) = l.rate {
            let (pft, ptf) = link_flows(l, cii[l.from], cii[l.to], cij[k], sij[k]);
            for f in [pft, ptf] {
                pb.nonneg(negate(&f).plus_const(rate));
                pb.nonneg(f.plus_const(rate));
            }
        }
    }

    // ‖(2c, 2s, c_ii − c_jj)‖ <= c_ii + c_jj
    for (k, l) in links.iter().enumerate() {
        let (a, b) = (cii[l.from], cii[l.to]);
        pb.add_block(
            Cone::SecondOrder(4),
            &[
                Affine::var(a).term(b, T::one()),
                Affine::constant(T::zero()).term(cij[k], two),
                Affine::constant(T::zero()).term(sij[k], two),
                Affine::var(a).term(b, -T::one()),
            ],
        );
    }

    // quadratic cost a·t with t >= p², as (t, 1/2, p) in the rotated cone
    for (k, tk) in t.iter().enumerate() {
        if let Some(tk) = *tk {
            pb.add_block(
                Cone::RotatedSecondOrder(3),
                &[
                    Affine::var(tk),
                    Affine::constant(T::lit(0.5)),
                    Affine::var(pg[k]),
                ],
            );
        }
    }

    if kind == FormulationKind::NewSocp {
        let theta: Vec<usize> = (0..n).map(|i| pb.add_var(name_theta(case, i))).collect();
        let eps = pb.add_var("eps_theta");
        pb.add_cost(eps, beta);
        let slack = case.slack();
        pb.equal(Affine::var(theta[slack]));
        let half_pi = T::FRAC_PI_2();
        for (i, &th) in theta.iter().enumerate() {
            if i != slack {
                pb.bounds(th, -half_pi, half_pi);
            }
        }
        pb.bounds(eps, T::zero(), eps_max);
        for (k, l) in links.iter().enumerate() {
            // d = θ_f − θ_t − s
            let d = Affine::constant(T::zero())
                .term(theta[l.from], T::one())
                .term(theta[l.to], -T::one())
                .term(sij[k], -T::one());
            pb.nonneg(negate(&d).term(eps, T::one()));
            pb.nonneg(d.term(eps, T::one()));
        }
    }

    Ok(OpfProgram {
        program: pb.build(),
        kind,
        beta,
        eps_max,
        links,
        num_buses: n,
        num_gens: case.generators.len(),
    })
}

fn negate<T: Scalar>(e: &Affine<T>) -> Affine<T> {
    Affine {
        terms: e.terms.iter().map(|&(c, v)| (c, -v)).collect(),
        constant: -e.constant,
    }
}
