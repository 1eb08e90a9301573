//! Cone definitions and the per-cone operations used by the interior-point method.
//!
//! Second-order cones are `{(t, x) : t >= ||x||}`. Rotated cones are
//! `{(u, v, w) : 2uv >= ||w||², u, v >= 0}`; they are handled through the
//! symmetric orthogonal map `R(u, v, w) = ((u+v)/√2, (u-v)/√2, w)`, which
//! carries the rotated cone onto the standard one. Because `R` is its own
//! inverse, every operation is "map in, apply the Lorentz-cone rule, map out".

use crate::scalar::{dot, Scalar};

/// One block of the cone product `K`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cone {
    /// `{0}^n`: equality rows.
    Zero(usize),
    /// Nonnegative orthant `R^n_+`.
    NonNeg(usize),
    /// Lorentz cone of total dimension `n` (`n >= 1`).
    SecondOrder(usize),
    /// Rotated Lorentz cone of total dimension `n` (`n >= 2`).
    RotatedSecondOrder(usize),
}

impl Cone {
    pub fn dim(&self) -> usize {
        match *self {
            Cone::Zero(n) | Cone::NonNeg(n) | Cone::SecondOrder(n) | Cone::RotatedSecondOrder(n) => n,
        }
    }

    /// Barrier degree contribution.
    pub fn degree(&self) -> usize {
        match *self {
            Cone::Zero(_) => 0,
            Cone::NonNeg(n) => n,
            Cone::SecondOrder(_) | Cone::RotatedSecondOrder(_) => 1,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Cone::Zero(_))
    }

    /// Whether the scaling matrix of this block is dense.
    pub fn is_dense(&self) -> bool {
        matches!(self, Cone::SecondOrder(_) | Cone::RotatedSecondOrder(_))
    }

    /// Distance-style violation of membership: 0 inside the cone.
    pub fn violation<T: Scalar>(&self, s: &[T]) -> T {
        match *self {
            Cone::Zero(_) => s.iter().fold(T::zero(), |m, v| m.max(v.abs())),
            Cone::NonNeg(_) => s.iter().fold(T::zero(), |m, &v| m.max(-v)),
            Cone::SecondOrder(_) => {
                let tail = dot(&s[1..], &s[1..]).sqrt();
                (tail - s[0]).max(T::zero())
            }
            Cone::RotatedSecondOrder(_) => {
                let mut r = s.to_vec();
                rotate(&mut r);
                let tail = dot(&r[1..], &r[1..]).sqrt();
                (tail - r[0]).max(T::zero())
            }
        }
    }
}

/// Applies `R` (an involution) in place.
pub(crate) fn rotate<T: Scalar>(v: &mut [T]) {
    let h = T::FRAC_1_SQRT_2();
    let (a, b) = (v[0], v[1]);
    v[0] = h * (a + b);
    v[1] = h * (a - b);
}

/// Sets `v` to the identity element of the cone.
pub(crate) fn unit<T: Scalar>(cone: &Cone, v: &mut [T]) {
    match cone {
        Cone::Zero(_) => v.iter_mut().for_each(|x| *x = T::zero()),
        Cone::NonNeg(_) => v.iter_mut().for_each(|x| *x = T::one()),
        Cone::SecondOrder(_) => {
            v.iter_mut().for_each(|x| *x = T::zero());
            v[0] = T::one();
        }
        Cone::RotatedSecondOrder(_) => {
            v.iter_mut().for_each(|x| *x = T::zero());
            v[0] = T::one();
            rotate(v);
        }
    }
}

/// Nesterov–Todd scaling state of one block.
#[derive(Clone, Debug)]
pub(crate) enum Scaling<T> {
    Zero,
    NonNeg { w: Vec<T>, lambda: Vec<T> },
    /// `W = eta * [w0 w1'; w1 I + w1 w1'/(1+w0)]` in Lorentz coordinates.
    Soc { rotated: bool, eta: T, wbar: Vec<T>, lambda: Vec<T> },
}

impl<T: Scalar> Scaling<T> {
    pub fn new(cone: &Cone) -> Self {
        let n = cone.dim();
        match cone {
            Cone::Zero(_) => Scaling::Zero,
            Cone::NonNeg(_) => Scaling::NonNeg {
                w: vec![T::one(); n],
                lambda: vec![T::one(); n],
            },
            Cone::SecondOrder(_) | Cone::RotatedSecondOrder(_) => {
                let mut wbar = vec![T::zero(); n];
                wbar[0] = T::one();
                Scaling::Soc {
                    rotated: matches!(cone, Cone::RotatedSecondOrder(_)),
                    eta: T::one(),
                    wbar: wbar.clone(),
                    lambda: wbar,
                }
            }
        }
    }

    /// Recomputes the scaling point for interior `s`, `z`. Returns false if
    /// either vector has left the cone interior.
    pub fn update(&mut self, s: &[T], z: &[T]) -> bool {
        match self {
            Scaling::Zero => true,
            Scaling::NonNeg { w, lambda } => {
                for i in 0..s.len() {
                    if !(s[i] > T::zero() && z[i] > T::zero()) {
                        return false;
                    }
                    w[i] = (s[i] / z[i]).sqrt();
                    lambda[i] = (s[i] * z[i]).sqrt();
                }
                true
            }
            Scaling::Soc { rotated, eta, wbar, lambda } => {
                let mut s = s.to_vec();
                let mut z = z.to_vec();
                if *rotated {
                    rotate(&mut s);
                    rotate(&mut z);
                }
                let s_res = soc_residual(&s);
                let z_res = soc_residual(&z);
                if !(s_res > T::zero() && z_res > T::zero() && s[0] > T::zero() && z[0] > T::zero()) {
                    return false;
                }
                let s_norm = s_res.sqrt();
                let z_norm = z_res.sqrt();
                *eta = (s_norm / z_norm).sqrt();
                // w ∝ s/‖s‖ + J z/‖z‖, renormalized onto the unit hyperboloid
                wbar[0] = s[0] / s_norm + z[0] / z_norm;
                for i in 1..wbar.len() {
                    wbar[i] = s[i] / s_norm - z[i] / z_norm;
                }
                let w_res = soc_residual(wbar);
                if !(w_res > T::zero()) {
                    return false;
                }
                let w_norm = w_res.sqrt();
                wbar.iter_mut().for_each(|v| *v /= w_norm);
                wbar[0] = (T::one() + dot(&wbar[1..], &wbar[1..])).sqrt();
                // closed form of λ = W z
                let gamma = w_norm / T::lit(2.0);
                let (s0, z0) = (s[0] / s_norm, z[0] / z_norm);
                let cs = (gamma + z0) / s_norm;
                let cz = (gamma + s0) / z_norm;
                let denom = s0 + z0 + T::lit(2.0) * gamma;
                let root = (s_norm * z_norm).sqrt();
                lambda[0] = gamma * root;
                for i in 1..lambda.len() {
                    lambda[i] = (cs * s[i] + cz * z[i]) / denom * root;
                }
                true
            }
        }
    }

    /// Largest `α` keeping `s + α ds` and `z + α dz` in the cone, measured
    /// in the scaled coordinates `λ + α W⁻¹ds`, `λ + α W dz`, which stay
    /// well-centred as the iterates approach the boundary.
    pub fn max_step(&self, s: &[T], z: &[T], ds: &[T], dz: &[T]) -> T {
        match self {
            Scaling::Zero => T::infinity(),
            Scaling::NonNeg { .. } => {
                let mut a = T::infinity();
                for i in 0..s.len() {
                    if ds[i] < T::zero() {
                        a = a.min(-s[i] / ds[i]);
                    }
                    if dz[i] < T::zero() {
                        a = a.min(-z[i] / dz[i]);
                    }
                }
                a
            }
            Scaling::Soc {
                rotated,
                eta,
                wbar,
                lambda,
            } => {
                let mut a = ds.to_vec();
                let mut b = dz.to_vec();
                if *rotated {
                    rotate(&mut a);
                    rotate(&mut b);
                }
                let mut ta = vec![T::zero(); a.len()];
                let mut tb = vec![T::zero(); b.len()];
                soc_w_mul(*eta, wbar, &a, &mut ta, true);
                soc_w_mul(*eta, wbar, &b, &mut tb, false);
                soc_scaled_step(lambda, &ta).min(soc_scaled_step(lambda, &tb))
            }
        }
    }

    /// `out = W v` (or `W⁻¹ v` when `inverse`).
    pub fn mul_w(&self, v: &[T], out: &mut [T], inverse: bool) {
        match self {
            Scaling::Zero => out.iter_mut().for_each(|x| *x = T::zero()),
            Scaling::NonNeg { w, .. } => {
                for i in 0..v.len() {
                    out[i] = if inverse { v[i] / w[i] } else { v[i] * w[i] };
                }
            }
            Scaling::Soc { rotated, eta, wbar, .. } => {
                if *rotated {
                    let mut r = v.to_vec();
                    rotate(&mut r);
                    soc_w_mul(*eta, wbar, &r, out, inverse);
                    rotate(out);
                } else {
                    soc_w_mul(*eta, wbar, v, out, inverse);
                }
            }
        }
    }

    /// `λ ∘ λ` in the block's coordinates.
    pub fn lambda_sq(&self, out: &mut [T]) {
        match self {
            Scaling::Zero => out.iter_mut().for_each(|x| *x = T::zero()),
            Scaling::NonNeg { lambda, .. } => {
                for i in 0..lambda.len() {
                    out[i] = lambda[i] * lambda[i];
                }
            }
            Scaling::Soc { rotated, lambda, .. } => {
                soc_circ(lambda, lambda, out);
                if *rotated {
                    rotate(out);
                }
            }
        }
    }

    /// `out = λ \ v`, the solution `u` of `λ ∘ u = v`.
    pub fn lambda_inv_circ(&self, v: &[T], out: &mut [T]) {
        match self {
            Scaling::Zero => out.iter_mut().for_each(|x| *x = T::zero()),
            Scaling::NonNeg { lambda, .. } => {
                for i in 0..v.len() {
                    out[i] = v[i] / lambda[i];
                }
            }
            Scaling::Soc { rotated, lambda, .. } => {
                if *rotated {
                    let mut r = v.to_vec();
                    rotate(&mut r);
                    soc_inv_circ(lambda, &r, out);
                    rotate(out);
                } else {
                    soc_inv_circ(lambda, v, out);
                }
            }
        }
    }

    /// Upper triangle (row-major pairs `i <= j`) of `H = W W`.
    pub fn hessian_upper(&self, out: &mut Vec<T>) {
        out.clear();
        match self {
            Scaling::Zero => {}
            Scaling::NonNeg { w, .. } => out.extend(w.iter().map(|&v| v * v)),
            Scaling::Soc { rotated, eta, wbar, .. } => {
                // W̄² = 2 w̄ w̄' − J
                let n = wbar.len();
                let eta2 = *eta * *eta;
                let mut h = vec![vec![T::zero(); n]; n];
                for i in 0..n {
                    for j in 0..n {
                        h[i][j] = T::lit(2.0) * wbar[i] * wbar[j];
                    }
                    h[i][i] += if i == 0 { -T::one() } else { T::one() };
                }
                let r2w0 = T::SQRT_2() * wbar[0];
                h[0][0] = (r2w0 - T::one()) * (r2w0 + T::one());
                if *rotated {
                    rotate_sym(&mut h);
                }
                for i in 0..n {
                    for j in i..n {
                        out.push(eta2 * h[i][j]);
                    }
                }
            }
        }
    }

    /// `out = H v` with `H = W W`.
    pub fn hessian_mul(&self, v: &[T], out: &mut [T]) {
        match self {
            Scaling::Soc { rotated, eta, wbar, .. } => {
                out.copy_from_slice(v);
                if *rotated {
                    rotate(out);
                }
                let c = T::lit(2.0) * dot(wbar, out);
                out[0] = -out[0];
                let eta2 = *eta * *eta;
                for (o, &w) in out.iter_mut().zip(wbar.iter()) {
                    *o = eta2 * (*o + c * w);
                }
                if *rotated {
                    rotate(out);
                }
            }
            _ => {
                let mut tmp = vec![T::zero(); v.len()];
                self.mul_w(v, &mut tmp, false);
                self.mul_w(&tmp, out, false);
            }
        }
    }
}

/// Jordan product `x ∘ y` in the block's algebra.
pub(crate) fn circ<T: Scalar>(cone: &Cone, x: &[T], y: &[T], out: &mut [T]) {
    match cone {
        Cone::Zero(_) => out.iter_mut().for_each(|v| *v = T::zero()),
        Cone::NonNeg(_) => {
            for i in 0..x.len() {
                out[i] = x[i] * y[i];
            }
        }
        Cone::SecondOrder(_) => soc_circ(x, y, out),
        Cone::RotatedSecondOrder(_) => {
            let mut a = x.to_vec();
            let mut b = y.to_vec();
            rotate(&mut a);
            rotate(&mut b);
            soc_circ(&a, &b, out);
            rotate(out);
        }
    }
}

fn soc_residual<T: Scalar>(v: &[T]) -> T {
    let r = dot(&v[1..], &v[1..]).sqrt();
    (v[0] - r) * (v[0] + r)
}

/// Step to the boundary from an interior `λ` along `d`, via the hyperbolic
/// rotation that maps `λ/‖λ‖_J` to the cone axis.
fn soc_scaled_step<T: Scalar>(lambda: &[T], d: &[T]) -> T {
    let nrm = soc_residual(lambda).sqrt();
    let l0 = lambda[0] / nrm;
    let rho0 = (l0 * d[0] - dot(&lambda[1..], &d[1..]) / nrm) / nrm;
    let f = (rho0 + d[0] / nrm) / (l0 + T::one());
    let mut r1 = T::zero();
    for i in 1..d.len() {
        let v = d[i] / nrm - f * lambda[i] / nrm;
        r1 += v * v;
    }
    let denom = r1.sqrt() - rho0;
    if denom > T::zero() {
        T::one() / denom
    } else {
        T::infinity()
    }
}

fn soc_w_mul<T: Scalar>(eta: T, wbar: &[T], v: &[T], out: &mut [T], inverse: bool) {
    let w0 = wbar[0];
    let w1 = &wbar[1..];
    let v0 = v[0];
    let v1 = &v[1..];
    let w1v1 = dot(w1, v1);
    let (sgn, scale) = if inverse {
        (-T::one(), T::one() / eta)
    } else {
        (T::one(), eta)
    };
    out[0] = scale * (w0 * v0 + sgn * w1v1);
    let c = sgn * v0 + w1v1 / (T::one() + w0);
    for i in 1..v.len() {
        out[i] = scale * (v[i] + c * wbar[i]);
    }
}

fn soc_circ<T: Scalar>(x: &[T], y: &[T], out: &mut [T]) {
    out[0] = dot(x, y);
    for i in 1..x.len() {
        out[i] = x[0] * y[i] + y[0] * x[i];
    }
}

fn soc_inv_circ<T: Scalar>(lambda: &[T], v: &[T], out: &mut [T]) {
    let l0 = lambda[0];
    let rho = soc_residual(lambda);
    let nu = dot(&lambda[1..], &v[1..]);
    let u0 = (l0 * v[0] - nu) / rho;
    out[0] = u0;
    for i in 1..v.len() {
        out[i] = (v[i] - u0 * lambda[i]) / l0;
    }
}

fn rotate_sym<T: Scalar>(h: &mut [Vec<T>]) {
    // R H R with R symmetric
    for row in h.iter_mut() {
        rotate(row);
    }
    let n = h.len();
    for j in 0..n {
        let mut col: Vec<T> = (0..n).map(|i| h[i][j]).collect();
        rotate(&mut col);
        for i in 0..n {
            h[i][j] = col[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn nt_scaling_maps_z_to_s() {
        for cone in [Cone::SecondOrder(4), Cone::RotatedSecondOrder(4)] {
            let (s, z) = match cone {
                Cone::SecondOrder(_) => (vec![3.0, 1.0, -0.5, 2.0], vec![2.0, -0.3, 0.8, 0.1]),
                _ => (vec![2.0, 1.5, 0.3, -1.0], vec![0.7, 3.0, 0.2, 0.5]),
            };
            assert_eq!(cone.violation(&s), 0.0);
            assert_eq!(cone.violation(&z), 0.0);
            let mut sc = Scaling::new(&cone);
            assert!(sc.update(&s, &z));
            // W z = W⁻¹ s = λ
            let mut wz = vec![0.0; 4];
            let mut wis = vec![0.0; 4];
            sc.mul_w(&z, &mut wz, false);
            sc.mul_w(&s, &mut wis, true);
            assert!(close(&wz, &wis, 1e-12), "{wz:?} vs {wis:?}");
            // H z = s
            let mut hz = vec![0.0; 4];
            sc.hessian_mul(&z, &mut hz);
            assert!(close(&hz, &s, 1e-12));
            // dense H agrees with operator form
            let mut up = Vec::new();
            sc.hessian_upper(&mut up);
            let mut h = [[0.0; 4]; 4];
            let mut k = 0;
            for i in 0..4 {
                for j in i..4 {
                    h[i][j] = up[k];
                    h[j][i] = up[k];
                    k += 1;
                }
            }
            let hz2: Vec<f64> = (0..4).map(|i| (0..4).map(|j| h[i][j] * z[j]).sum()).collect();
            assert!(close(&hz2, &s, 1e-12));
            // λ ∘ λ has first entry s'z
            let mut l2 = vec![0.0; 4];
            sc.lambda_sq(&mut l2);
            let sz: f64 = s.iter().zip(&z).map(|(a, b)| a * b).sum();
            let mut l2_lorentz = l2.clone();
            if matches!(cone, Cone::RotatedSecondOrder(_)) {
                rotate(&mut l2_lorentz);
            }
            assert!((l2_lorentz[0] - sz).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_circ_inverts_circ() {
        let cone = Cone::RotatedSecondOrder(3);
        let mut sc = Scaling::new(&cone);
        assert!(sc.update(&[1.0, 2.0, 0.5], &[2.0, 0.5, -0.4]));
        let v = [0.3, -0.2, 0.9];
        let mut u = [0.0; 3];
        sc.lambda_inv_circ(&v, &mut u);
        // λ in rotated coordinates
        let lam = match &sc {
            Scaling::Soc { lambda, .. } => {
                let mut l = lambda.clone();
                rotate(&mut l);
                l
            }
            _ => unreachable!(),
        };
        let mut back = [0.0; 3];
        circ(&cone, &lam, &u, &mut back);
        assert!(close(&back, &v, 1e-12));
    }

    #[test]
    fn scaled_step_hits_boundary() {
        // from the axis along (-1, 1, 0): (1 - a) = a at a = 1/2
        let a = soc_scaled_step(&[1.0f64, 0.0, 0.0], &[-1.0, 1.0, 0.0]);
        assert!((a - 0.5).abs() < 1e-12);
        assert_eq!(soc_scaled_step(&[1.0f64, 0.0, 0.0], &[1.0, 0.0, 0.0]), f64::INFINITY);
        // off-axis start: λ = (2, 1, 0), boundary where 2 - a = 1 + a
        let a = soc_scaled_step(&[2.0f64, 1.0, 0.0], &[-1.0, 1.0, 0.0]);
        assert!((a - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rotated_unit_is_interior() {
        let cone = Cone::RotatedSecondOrder(3);
        let mut e = [0.0f64; 3];
        unit(&cone, &mut e);
        assert!((2.0 * e[0] * e[1] - 1.0).abs() < 1e-12);
        assert_eq!(e[2], 0.0);
    }
}
