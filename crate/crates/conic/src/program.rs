use std::collections::BTreeMap;

use crate::cones::Cone;
use crate::scalar::Scalar;
use crate::sparse::CscMatrix;

/// Column index by variable name.
pub type VarMap = BTreeMap<String, usize>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProgramError {
    #[error("objective has {got} entries, expected {expected}")]
    ObjectiveLength { expected: usize, got: usize },
    #[error("constraint matrix is {rows}x{cols}, expected {exp_rows}x{exp_cols}")]
    MatrixShape {
        rows: usize,
        cols: usize,
        exp_rows: usize,
        exp_cols: usize,
    },
    #[error("right-hand side has {got} entries, expected {expected}")]
    RhsLength { expected: usize, got: usize },
    #[error("cone {index} ({cone:?}) has invalid dimension")]
    ConeDim { index: usize, cone: Cone },
    #[error("variable `{name}` maps to column {col} but the program has {num_vars}")]
    UnmappedVariable { name: String, col: usize, num_vars: usize },
    #[error("non-finite data in {0}")]
    NonFinite(&'static str),
}

/// Standard-form conic program
///
/// ```text
/// minimize    c'x + offset
/// subject to  A x + s = b,   s ∈ K = K_1 × … × K_p
/// ```
///
/// Rows of `A` are partitioned, in order, by `cones`. Equality constraints are
/// rows in a [`Cone::Zero`] block.
#[derive(Clone, Debug)]
pub struct ConicProgram<T> {
    pub num_vars: usize,
    pub objective: Vec<T>,
    pub objective_offset: T,
    pub a: CscMatrix<T>,
    pub b: Vec<T>,
    pub cones: Vec<Cone>,
    pub var_map: VarMap,
}

impl<T: Scalar> ConicProgram<T> {
    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    /// Row ranges of each cone block.
    pub fn cone_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::with_capacity(self.cones.len());
        let mut start = 0;
        for c in &self.cones {
            out.push(start..start + c.dim());
            start += c.dim();
        }
        out
    }

    pub fn validate(&self) -> Result<(), ProgramError> {
        if self.objective.len() != self.num_vars {
            return Err(ProgramError::ObjectiveLength {
                expected: self.num_vars,
                got: self.objective.len(),
            });
        }
        let m: usize = self.cones.iter().map(Cone::dim).sum();
        if self.b.len() != m {
            return Err(ProgramError::RhsLength {
                expected: m,
                got: self.b.len(),
            });
        }
        if self.a.nrows != m || self.a.ncols != self.num_vars {
            return Err(ProgramError::MatrixShape {
                rows: self.a.nrows,
                cols: self.a.ncols,
                exp_rows: m,
                exp_cols: self.num_vars,
            });
        }
        for (index, cone) in self.cones.iter().enumerate() {
            let ok = match *cone {
                Cone::Zero(n) | Cone::NonNeg(n) | Cone::SecondOrder(n) => n >= 1,
                Cone::RotatedSecondOrder(n) => n >= 2,
            };
            if !ok {
                return Err(ProgramError::ConeDim { index, cone: *cone });
            }
        }
        for (name, &col) in &self.var_map {
            if col >= self.num_vars {
                return Err(ProgramError::UnmappedVariable {
                    name: name.clone(),
                    col,
                    num_vars: self.num_vars,
                });
            }
        }
        if !self.objective.iter().all(|v| v.is_finite()) || !self.objective_offset.is_finite() {
            return Err(ProgramError::NonFinite("objective"));
        }
        if !self.b.iter().all(|v| v.is_finite()) {
            return Err(ProgramError::NonFinite("rhs"));
        }
        if !self.a.nzval.iter().all(|v| v.is_finite()) {
            return Err(ProgramError::NonFinite("constraint matrix"));
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[T]) -> T {
        crate::scalar::dot(&self.objective, x) + self.objective_offset
    }

    /// Slack `s = b - A x`.
    pub fn slack(&self, x: &[T]) -> Vec<T> {
        let mut s = self.b.clone();
        self.a.gemv(-T::one(), x, T::one(), &mut s);
        s
    }

    /// Per-cone membership violation of `b - A x`.
    pub fn cone_violations(&self, x: &[T]) -> Vec<T> {
        let s = self.slack(x);
        self.cones
            .iter()
            .zip(self.cone_ranges())
            .map(|(c, r)| c.violation(&s[r]))
            .collect()
    }

    /// Largest membership violation over all cones.
    pub fn max_violation(&self, x: &[T]) -> T {
        self.cone_violations(x)
            .into_iter()
            .fold(T::zero(), |m, v| m.max(v))
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.var_map.get(name).copied()
    }

    /// Total barrier degree of `K`.
    pub fn degree(&self) -> usize {
        self.cones.iter().map(Cone::degree).sum()
    }
}

/// Incremental builder: variables by name, rows grouped into cone blocks.
#[derive(Debug, Clone, Default)]
pub struct ProgramBuilder<T> {
    names: Vec<String>,
    var_map: VarMap,
    objective: Vec<T>,
    offset: T,
    triplets: Vec<(usize, usize, T)>,
    b: Vec<T>,
    cones: Vec<Cone>,
}

/// An affine expression `Σ coef·x_col + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Affine<T> {
    pub terms: Vec<(usize, T)>,
    pub constant: T,
}

impl<T: Scalar> Affine<T> {
    pub fn constant(c: T) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn var(col: usize) -> Self {
        Self {
            terms: vec![(col, T::one())],
            constant: T::zero(),
        }
    }

    pub fn term(mut self, col: usize, coef: T) -> Self {
        if coef != T::zero() {
            self.terms.push((col, coef));
        }
        self
    }

    pub fn plus_const(mut self, c: T) -> Self {
        self.constant += c;
        self
    }

    pub fn eval(&self, x: &[T]) -> T {
        self.terms.iter().map(|&(c, v)| v * x[c]).sum::<T>() + self.constant
    }
}

impl<T: Scalar> ProgramBuilder<T> {
    pub fn new() -> Self {
        Self {
            names: Vec::new(),
            var_map: VarMap::new(),
            objective: Vec::new(),
            offset: T::zero(),
            triplets: Vec::new(),
            b: Vec::new(),
            cones: Vec::new(),
        }
    }

    /// Adds a free variable; panics on a duplicate name.
    pub fn add_var(&mut self, name: impl Into<String>) -> usize {
        let name = name.into();
        let col = self.names.len();
        assert!(
            self.var_map.insert(name.clone(), col).is_none(),
            "duplicate variable {name}"
        );
        self.names.push(name);
        self.objective.push(T::zero());
        col
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn add_cost(&mut self, col: usize, coef: T) {
        self.objective[col] += coef;
    }

    pub fn add_offset(&mut self, c: T) {
        self.offset += c;
    }

    /// Appends a cone block whose slack rows are the given affine expressions.
    pub fn add_block(&mut self, cone: Cone, rows: &[Affine<T>]) {
        assert_eq!(cone.dim(), rows.len(), "cone dimension mismatch");
        for e in rows {
            let r = self.b.len();
            // s = b - A x = e(x)  =>  A = -coefs, b = constant
            for &(c, v) in &e.terms {
                self.triplets.push((r, c, -v));
            }
            self.b.push(e.constant);
        }
        match (self.cones.last_mut(), cone) {
            (Some(Cone::Zero(n)), Cone::Zero(k)) => *n += k,
            (Some(Cone::NonNeg(n)), Cone::NonNeg(k)) => *n += k,
            _ => self.cones.push(cone),
        }
    }

    pub fn equal(&mut self, e: Affine<T>) {
        self.add_block(Cone::Zero(1), &[e]);
    }

    pub fn nonneg(&mut self, e: Affine<T>) {
        self.add_block(Cone::NonNeg(1), &[e]);
    }

    /// `lo <= x_col <= hi`, skipping infinite sides.
    pub fn bounds(&mut self, col: usize, lo: T, hi: T) {
        if lo.is_finite() {
            self.nonneg(Affine::var(col).plus_const(-lo));
        }
        if hi.is_finite() {
            self.nonneg(Affine::constant(hi).term(col, -T::one()));
        }
    }

    pub fn build(self) -> ConicProgram<T> {
        let n = self.names.len();
        let m = self.b.len();
        ConicProgram {
            num_vars: n,
            objective: self.objective,
            objective_offset: self.offset,
            a: CscMatrix::from_triplets(m, n, &self.triplets),
            b: self.b,
            cones: self.cones,
            var_map: self.var_map,
        }
    }
}
