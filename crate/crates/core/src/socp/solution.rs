use super::{name_cii, name_theta, FormulationKind, OpfProgram};
use crate::network::NetworkCase;
use crate::Scalar;

/// Named values of a relaxation optimum.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxationSolution<T> {
    pub kind: FormulationKind,
    pub cii: Vec<T>,
    /// `√c_ii`.
    pub vm: Vec<T>,
    /// Per link, oriented as in [`OpfProgram::links`].
    pub cij: Vec<T>,
    pub sij: Vec<T>,
    pub link_ends: Vec<(usize, usize)>,
    pub theta: Option<Vec<T>>,
    pub eps_theta: Option<T>,
    pub pg: Vec<T>,
    pub qg: Vec<T>,
    /// Full objective value including the angle penalty.
    pub objective_total: T,
    /// `objective_total − penalty`.
    pub objective_cost: T,
    /// `β ε_θ` (zero without angles).
    pub penalty: T,
    pub beta: T,
}

impl<T: Scalar> RelaxationSolution<T> {
    /// `Σ a p² + b p + c` evaluated at the dispatch.
    pub fn generation_cost(&self, case: &NetworkCase<T>) -> T {
        case.generators
            .iter()
            .zip(&self.pg)
            .map(|(g, &p)| g.a * p * p + g.b * p + g.c)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExtractError {
    #[error("program has no variable `{0}`")]
    Unmapped(String),
    #[error("solution vector has {got} entries, program has {expected}")]
    Length { expected: usize, got: usize },
    #[error("c_ii = {value:e} at bus {bus} is negative beyond tolerance")]
    NegativeCii { bus: usize, value: f64 },
}

struct Cols<'a, T> {
    opf: &'a OpfProgram<T>,
}

impl<T: Scalar> Cols<'_, T> {
    fn get(&self, name: &str) -> Result<usize, ExtractError> {
        self.opf
            .program
            .column(name)
            .ok_or_else(|| ExtractError::Unmapped(name.to_string()))
    }
}

/// Reads named variables out of a primal vector of `opf.program`.
pub fn extract_solution<T: Scalar>(
    opf: &OpfProgram<T>,
    case: &NetworkCase<T>,
    x: &[T],
) -> Result<RelaxationSolution<T>, ExtractError> {
    let p = &opf.program;
    if x.len() != p.num_vars {
        return Err(ExtractError::Length {
            expected: p.num_vars,
            got: x.len(),
        });
    }
    let cols = Cols { opf };
    let n = case.buses.len();
    let tol = T::tol(1e-6);
    let mut cii = Vec::with_capacity(n);
    let mut vm = Vec::with_capacity(n);
    for i in 0..n {
        let v = x[cols.get(&name_cii(case, i))?];
        if v < -tol {
            return Err(ExtractError::NegativeCii {
                bus: case.buses[i].id,
                value: v.as_f64(),
            });
        }
        cii.push(v);
        vm.push(v.max(T::zero()).sqrt());
    }
    let nl = opf.links.len();
    let read = |prefix: &str, count: usize| -> Result<Vec<T>, ExtractError> {
        (0..count)
            .map(|k| Ok(x[cols.get(&format!("{prefix}[{k}]"))?]))
            .collect()
    };
    let cij = read("cij", nl)?;
    let sij = read("sij", nl)?;
    let pg = read("pg", case.generators.len())?;
    let qg = read("qg", case.generators.len())?;
    let (theta, eps_theta) = match opf.kind {
        FormulationKind::RelaxedNoArctan => (None, None),
        FormulationKind::NewSocp => {
            let th = (0..n)
                .map(|i| Ok(x[cols.get(&name_theta(case, i))?]))
                .collect::<Result<Vec<T>, ExtractError>>()?;
            (Some(th), Some(x[cols.get("eps_theta")?]))
        }
    };
    let objective_total = p.objective_value(x);
    let penalty = eps_theta.map_or(T::zero(), |e| opf.beta * e);
    Ok(RelaxationSolution {
        kind: opf.kind,
        cii,
        vm,
        cij,
        sij,
        link_ends: opf.links.iter().map(|l| (l.from, l.to)).collect(),
        theta,
        eps_theta,
        pg,
        qg,
        objective_total,
        objective_cost: objective_total - penalty,
        penalty,
        beta: opf.beta,
    })
}

/// Maps an AC operating point `(V, θ, Pg, Qg)` onto the program's variables.
///
/// The lifted variables take their defining values, cost epigraphs are
/// tight, angles are shifted so the slack bus is at zero and
/// `ε_θ = max |θ_i − θ_j − s_ij|` over links.
pub fn map_exact_point<T: Scalar>(
    opf: &OpfProgram<T>,
    case: &NetworkCase<T>,
    vm: &[T],
    va: &[T],
    pg: &[T],
    qg: &[T],
) -> Result<Vec<T>, ExtractError> {
    let cols = Cols { opf };
    let mut x = vec![T::zero(); opf.program.num_vars];
    let n = case.buses.len();
    let slack = case.slack();
    let theta: Vec<T> = va.iter().map(|&a| a - va[slack]).collect();
    for i in 0..n {
        x[cols.get(&name_cii(case, i))?] = vm[i] * vm[i];
    }
    let mut eps = T::zero();
    for (k, l) in opf.links.iter().enumerate() {
        let m = vm[l.from] * vm[l.to];
        let d = theta[l.from] - theta[l.to];
        let s = m * d.sin();
        x[cols.get(&format!("cij[{k}]"))?] = m * d.cos();
        x[cols.get(&format!("sij[{k}]"))?] = s;
        eps = eps.max((d - s).abs());
    }
    for (k, g) in case.generators.iter().enumerate() {
        x[cols.get(&format!("pg[{k}]"))?] = pg[k];
        x[cols.get(&format!("qg[{k}]"))?] = qg[k];
        if g.a > T::zero() {
            x[cols.get(&format!("t[{k}]"))?] = pg[k] * pg[k];
        }
    }
    if opf.kind == FormulationKind::NewSocp {
        for i in 0..n {
            x[cols.get(&name_theta(case, i))?] = theta[i];
        }
        x[cols.get("eps_theta")?] = eps;
    }
    Ok(x)
}
