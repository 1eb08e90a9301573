use num_complex::Complex;

use super::NetworkCase;
use crate::Scalar;

/// Sparse bus admittance matrix `Y = G + jB`, stored by rows with sorted
/// column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct AdmittanceMatrix<T> {
    pub n: usize,
    rows: Vec<Vec<(usize, Complex<T>)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum YbusError {
    #[error("branch {0} has zero series impedance")]
    ZeroImpedance(usize),
}

impl<T: Scalar> AdmittanceMatrix<T> {
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        let row = &self.rows[i];
        match row.binary_search_by_key(&j, |e| e.0) {
            Ok(k) => row[k].1,
            Err(_) => Complex::new(T::zero(), T::zero()),
        }
    }

    pub fn g(&self, i: usize, j: usize) -> T {
        self.get(i, j).re
    }

    pub fn b(&self, i: usize, j: usize) -> T {
        self.get(i, j).im
    }

    /// Stored entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> &[(usize, Complex<T>)] {
        &self.rows[i]
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `I = Y V`.
    pub fn mul(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        self.rows
            .iter()
            .map(|row| {
                row.iter()
                    .fold(Complex::new(T::zero(), T::zero()), |acc, &(j, y)| acc + y * v[j])
            })
            .collect()
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        (0..self.n).all(|i| {
            self.rows[i]
                .iter()
                .all(|&(j, y)| (y - self.get(j, i)).norm() <= tol)
        })
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex<T>>> {
        let mut d = vec![vec![Complex::new(T::zero(), T::zero()); self.n]; self.n];
        for (i, row) in self.rows.iter().enumerate() {
            for &(j, y) in row {
                d[i][j] = y;
            }
        }
        d
    }
}

/// Assembles the bus admittance matrix from merged branch two-ports and bus shunts.
pub fn build_ybus<T: Scalar>(case: &NetworkCase<T>) -> Result<AdmittanceMatrix<T>, YbusError> {
    let n = case.buses.len();
    let links = case.links().map_err(YbusError::ZeroImpedance)?;
    let mut rows: Vec<Vec<(usize, Complex<T>)>> = vec![Vec::new(); n];
    let mut add = |i: usize, j: usize, y: Complex<T>| {
        let row = &mut rows[i];
        match row.binary_search_by_key(&j, |e| e.0) {
            Ok(k) => row[k].1 = row[k].1 + y,
            Err(k) => row.insert(k, (j, y)),
        }
    };
    for (i, bus) in case.buses.iter().enumerate() {
        add(i, i, Complex::new(bus.gsh, bus.bsh));
    }
    for l in &links {
        add(l.from, l.from, l.y_ff);
        add(l.from, l.to, l.y_ft);
        add(l.to, l.from, l.y_tf);
        add(l.to, l.to, l.y_tt);
    }
    Ok(AdmittanceMatrix { n, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::parse_case;

    fn two_bus(r: f64, x: f64) -> NetworkCase<f64> {
        let text = format!(
            "mpc.baseMVA = 100;
mpc.bus = [1 3 0 0 0 0 1 1 0 1 1 1.1 0.9; 2 1 0 0 0 0 1 1 0 1 1 1.1 0.9];
mpc.gen = [1 0 0 1 -1 1 100 1 1 0];
mpc.branch = [1 2 {r} {x} 0 0 0 0 0 0 1 -360 360];"
        );
        parse_case(&text).unwrap()
    }

    #[test]
    fn pure_reactance_branch() {
        let y = build_ybus(&two_bus(0.0, 0.1)).unwrap();
        for (i, j, im) in [(0, 0, -10.0), (0, 1, 10.0), (1, 0, 10.0), (1, 1, -10.0)] {
            let e = y.get(i, j);
            assert!(e.re.abs() < 1e-12 && (e.im - im).abs() < 1e-12, "({i},{j}) = {e}");
        }
        assert!(y.is_symmetric(0.0));
    }

    #[test]
    fn lossy_branch_off_diagonal() {
        let y = build_ybus(&two_bus(0.01, 0.1)).unwrap();
        assert!((y.g(0, 1) + 0.9901).abs() < 1e-4);
        assert!((y.b(0, 1) - 9.901).abs() < 1e-3);
    }
}
