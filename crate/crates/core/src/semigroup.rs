//! Finite-dimensional generators `A`, their forms `alpha_m^A`, the Cayley
//! correspondence with cogenerators, and orbit growth of `exp(tA)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::isometry::{beta, binom};
use crate::numerics::{herm_eig, inverse, mat_exp, norm_sqr, solve, ComplexMatrix, C64};

/// Time grid for orbit checks: small-t behaviour plus the growth regime.
pub const T_GRID: [f64; 8] = [0.0, 0.1, 0.25, 0.5, 1.0, 2.0, 4.0, 5.0];

/// Simpson nodes per unit time in quadrature checks.
pub const SIMPSON_PER_UNIT: usize = 64;

/// A bounded generator `A` and the semigroup `exp(tA)` it generates.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorModel {
    a: ComplexMatrix,
}

impl GeneratorModel {
    pub fn new(a: ComplexMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape(format!("generator is {}x{}", a.rows(), a.cols())));
        }
        Ok(GeneratorModel { a })
    }

    pub fn generator(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn orbit(&self, t: f64) -> ComplexMatrix {
        mat_exp(&self.a, t)
    }

    pub fn cogenerator(&self) -> Result<ComplexMatrix> {
        cayley_cogenerator(&self.a)
    }

    pub fn w(&self) -> f64 {
        dissipativity_w(&self.a)
    }
}

/// Hermitian matrix of `y -> alpha_m^A(y) = sum_j binom(m,j) <A^j y, A^{m-j} y>`.
#[derive(Clone, Debug)]
pub struct AlphaForm {
    pub m: usize,
    pub matrix: ComplexMatrix,
}

fn powers(a: &ComplexMatrix, k: usize) -> Vec<ComplexMatrix> {
    let mut out = Vec::with_capacity(k + 1);
    let mut p = ComplexMatrix::identity(a.rows());
    out.push(p.clone());
    for _ in 0..k {
        p = &p * a;
        out.push(p.clone());
    }
    out
}

/// `sum_j binom(m,j) (A^{m-j})* A^j` together with its largest summand magnitude.
fn alpha_with_scale(a: &ComplexMatrix, m: usize) -> (ComplexMatrix, f64) {
    let pw = powers(a, m);
    let n = a.rows();
    let mut acc = ComplexMatrix::zeros(n, n);
    let mut scale: f64 = 1.0;
    for j in 0..=m {
        let term = (&pw[m - j].adjoint() * &pw[j]).scale_real(binom(m, j));
        scale = scale.max(1.0 + term.max_abs());
        acc += &term;
    }
    (acc, scale)
}

pub fn alpha_form(a: &ComplexMatrix, m: usize) -> AlphaForm {
    assert!(a.is_square(), "alpha_form needs a square generator");
    AlphaForm { m, matrix: alpha_with_scale(a, m).0 }
}

/// `1 + largest summand magnitude` of `alpha_m^A`.
pub fn alpha_scale(a: &ComplexMatrix, m: usize) -> f64 {
    alpha_with_scale(a, m).1
}

/// `|| alpha_{m+1} - (A* alpha_m + alpha_m A) ||` relative to [`alpha_scale`].
pub fn alpha_recursion_residual(a: &ComplexMatrix, m: usize) -> f64 {
    let am = alpha_form(a, m).matrix;
    let (next, scale) = alpha_with_scale(a, m + 1);
    let rec = &(&a.adjoint() * &am) + &(&am * a);
    next.dist(&rec) / scale
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SkewSymmetry {
    pub m: usize,
    pub holds: bool,
    /// Spectral norm of `alpha_m^A`.
    pub residual: f64,
}

pub fn is_m_skew_symmetric(a: &ComplexMatrix, m: usize, tol: f64) -> SkewSymmetry {
    let form = alpha_form(a, m).matrix.hermitian_part();
    let residual = herm_eig(&form).expect("alpha is Hermitian").spectral_norm();
    SkewSymmetry { m, holds: residual <= tol, residual }
}

fn shifted(a: &ComplexMatrix, s: f64) -> ComplexMatrix {
    &ComplexMatrix::identity(a.rows()).scale_real(s) + a
}

fn cayley_inverse(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    inverse(&shifted(x, -1.0)).map_err(|e| match e {
        Error::Singular { pivot, .. } => Error::CayleyPole { pivot },
        other => other,
    })
}

/// Cogenerator `T = (A + I)(A - I)^{-1}`.
pub fn cayley_cogenerator(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(&shifted(a, 1.0) * &cayley_inverse(a)?)
}

/// Generator `A = (T + I)(T - I)^{-1}`; the map is its own inverse.
pub fn cayley_generator(t: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(&shifted(t, 1.0) * &cayley_inverse(t)?)
}

/// `beta_m(T)` against `2^m ((A-I)^{-m})* alpha_m^A (A-I)^{-m}` for the
/// cogenerator `T` of `A`, relative to the larger summand scale.
pub fn beta_alpha_bridge_residual(a: &ComplexMatrix, m: usize) -> Result<f64> {
    let t = cayley_cogenerator(a)?;
    let r = cayley_inverse(a)?.powi(m);
    let (alpha, a_scale) = alpha_with_scale(a, m);
    let rhs = (&(&r.adjoint() * &alpha) * &r).scale_real(2f64.powi(m as i32));
    let lhs = beta(&t, m).matrix;
    let scale = crate::isometry::defect_scale(&t, m).max(a_scale * 2f64.powi(m as i32) * r.max_abs().powi(2));
    Ok(lhs.dist(&rhs) / scale)
}

/// Coefficients `c_j = alpha_j^A(x) / j!`, `j < m`, of `t -> ||exp(tA)x||^2`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthPolynomial {
    pub coefficients: Vec<f64>,
}

impl GrowthPolynomial {
    pub fn eval(&self, t: f64) -> f64 {
        self.coefficients.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }
}

fn growth_coefficients(a: &ComplexMatrix, x: &[C64], m: usize) -> GrowthPolynomial {
    let mut fact = 1.0;
    let coefficients = (0..m)
        .map(|j| {
            if j > 0 {
                fact *= j as f64;
            }
            alpha_form(a, j).matrix.quad(x) / fact
        })
        .collect();
    GrowthPolynomial { coefficients }
}

/// Growth polynomial of an m-skew-symmetric generator.
///
/// Fails with [`Error::Class`] unless `alpha_m^A` vanishes to `1e-10`.
pub fn growth_polynomial(a: &ComplexMatrix, x: &[C64], m: usize) -> Result<GrowthPolynomial> {
    let check = is_m_skew_symmetric(a, m, 1e-10);
    if !check.holds {
        return Err(Error::Class(format!("generator is not {m}-skew-symmetric (residual {:.3e})", check.residual)));
    }
    Ok(growth_coefficients(a, x, m))
}

/// Largest `| ||exp(tA)x||^2 - p(t) | / ((1+t)^{m-1} ||x||^2)` over `times`.
pub fn growth_defect(a: &ComplexMatrix, x: &[C64], poly: &GrowthPolynomial, times: &[f64]) -> f64 {
    let m = poly.coefficients.len().max(1);
    let nx = norm_sqr(x).max(f64::MIN_POSITIVE);
    times
        .iter()
        .map(|&t| {
            let orbit = norm_sqr(&mat_exp(a, t).mul_vec(x));
            (orbit - poly.eval(t)).abs() / ((1.0 + t).powi(m as i32 - 1) * nx)
        })
        .fold(0.0, f64::max)
}

/// Least `w` with `Re<Ay,y> <= w ||y||^2`, i.e. `lambda_max((A + A*)/2)`.
pub fn dissipativity_w(a: &ComplexMatrix) -> f64 {
    herm_eig(&a.hermitian_part()).expect("Hermitian part").max()
}

/// Largest `||exp(tA)|| / exp(wt)` over `times`; at most one for quasicontractive orbits.
pub fn quasicontractivity_ratio(a: &ComplexMatrix, w: f64, times: &[f64]) -> f64 {
    times.iter().map(|&t| mat_exp(a, t).op_norm() / (w * t).exp()).fold(0.0, f64::max)
}

/// Smallest horizon with `exp((w - lambda) H) <= 1e-10`.
pub fn laplace_horizon(w: f64, lambda: f64) -> f64 {
    (1e10f64).ln() / (lambda - w)
}

/// Composite Simpson approximation of `int_0^H exp(tA) exp(-lambda t) dt`.
///
/// `steps` is rounded up to an even count. Fails with
/// [`Error::DivergentIntegral`] when `lambda` does not exceed the
/// dissipativity constant of `A`.
pub fn resolvent_quadrature(a: &ComplexMatrix, lambda: f64, horizon: f64, steps: usize) -> Result<ComplexMatrix> {
    let w = dissipativity_w(a);
    if lambda <= w {
        return Err(Error::DivergentIntegral { lambda, w });
    }
    let steps = steps.max(2).div_ceil(2) * 2;
    let h = horizon / steps as f64;
    let step = mat_exp(&shifted(a, -lambda), h);
    let n = a.rows();
    let mut acc = ComplexMatrix::zeros(n, n);
    let mut current = ComplexMatrix::identity(n);
    for k in 0..=steps {
        let weight = if k == 0 || k == steps {
            1.0
        } else if k % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += &current.scale_real(weight);
        current = &current * &step;
    }
    Ok(acc.scale_real(h / 3.0))
}

/// `(lambda I - A)^{-1}` by direct solve.
pub fn resolvent(a: &ComplexMatrix, lambda: f64) -> Result<ComplexMatrix> {
    let shifted_a = &ComplexMatrix::identity(a.rows()).scale_real(lambda) - a;
    solve(&shifted_a, &ComplexMatrix::identity(a.rows()))
}

/// Composite Simpson weights on `n + 1` equispaced nodes with spacing `h`.
fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    (0..=n)
        .map(|k| {
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect()
}

/// Both sides of the m-th difference identity for `f(t) = ||exp(tA)y||^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DifferenceQuotient {
    /// `sum_k (-1)^{m-k} binom(m,k) f(kh)`.
    pub difference: f64,
    /// Tensor Simpson rule for `int_{[0,h]^m} alpha_m^A(exp((s_1+..+s_m)A)y) ds`.
    pub integral: f64,
    /// `|difference - integral| / max(|difference|, ||y||^2)`.
    pub relative: f64,
}

pub fn difference_quotient_check(a: &ComplexMatrix, y: &[C64], m: usize, h: f64) -> Result<DifferenceQuotient> {
    if !(1..=4).contains(&m) || !(h > 0.0 && h <= 1.0) {
        return Err(Error::InvalidArgument(format!("need 1 <= m <= 4 and h in (0, 1], got m={m}, h={h}")));
    }
    let difference: f64 = (0..=m)
        .map(|k| {
            let sign = if (m - k).is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * binom(m, k) * norm_sqr(&mat_exp(a, k as f64 * h).mul_vec(y))
        })
        .sum();

    // The integrand depends on s_1 + .. + s_m only, so the tensor rule
    // collapses to a convolution of the one-dimensional weights.
    let n = SIMPSON_PER_UNIT;
    let ds = h / n as f64;
    let w1 = simpson_weights(n, ds);
    let mut w = vec![1.0];
    for _ in 0..m {
        let mut next = vec![0.0; w.len() + n];
        for (i, wi) in w.iter().enumerate() {
            for (j, wj) in w1.iter().enumerate() {
                next[i + j] += wi * wj;
            }
        }
        w = next;
    }
    let alpha = alpha_form(a, m).matrix;
    let step = mat_exp(a, ds);
    let mut z = y.to_vec();
    let mut integral = 0.0;
    for wk in &w {
        integral += wk * alpha.quad(&z);
        z = step.mul_vec(&z);
    }
    let scale = difference.abs().max(norm_sqr(y));
    Ok(DifferenceQuotient { difference, integral, relative: (difference - integral).abs() / scale })
}

/// Largest violation of `||exp(tA)x||^2 <= sum_{j<m} t^j/j! alpha_j^A(x)` over `times`.
///
/// Fails with [`Error::Class`] unless `lambda_max(alpha_m^A) <= 1e-10`.
pub fn concave_growth_check(a: &ComplexMatrix, x: &[C64], m: usize, times: &[f64]) -> Result<f64> {
    let top = herm_eig(&alpha_form(a, m).matrix.hermitian_part()).expect("Hermitian").max();
    if top > 1e-10 {
        return Err(Error::Class(format!("generator is not {m}-concave (lambda_max of alpha = {top:.3e})")));
    }
    let poly = growth_coefficients(a, x, m);
    Ok(times.iter().map(|&t| (norm_sqr(&mat_exp(a, t).mul_vec(x)) - poly.eval(t)).max(0.0)).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c, r, I};

    fn nilpotent() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
    }

    #[test]
    fn alpha_examples() {
        let skew = ComplexMatrix::from_rows(&[vec![I, r(1.0)], vec![r(-1.0), c(0.0, -2.0)]]);
        assert!(alpha_form(&skew, 1).matrix.max_abs() < 1e-15);
        assert_eq!(alpha_form(&nilpotent(), 3).matrix.max_abs(), 0.0);
        let w = ComplexMatrix::diag_real(&[0.7]);
        assert!((alpha_form(&w, 1).matrix[(0, 0)].re - 1.4).abs() < 1e-15);
        assert_eq!(alpha_form(&nilpotent(), 0).matrix, ComplexMatrix::identity(2));
    }

    #[test]
    fn alpha_recursion_examples() {
        assert_eq!(alpha_recursion_residual(&ComplexMatrix::zeros(3, 3), 2), 0.0);
        let one = ComplexMatrix::identity(1);
        assert_eq!(alpha_form(&one, 2).matrix[(0, 0)], r(4.0));
        assert_eq!(alpha_recursion_residual(&one, 1), 0.0);
    }

    #[test]
    fn nilpotent_is_exactly_three_skew_symmetric() {
        let a = nilpotent();
        assert!(!is_m_skew_symmetric(&a, 1, 1e-10).holds);
        assert!(!is_m_skew_symmetric(&a, 2, 1e-10).holds);
        assert!(is_m_skew_symmetric(&a, 3, 1e-10).holds);
        let id = ComplexMatrix::identity(2);
        for m in 1..=6 {
            let s = is_m_skew_symmetric(&id, m, 1e-10);
            assert!(!s.holds);
            assert!((s.residual - 2f64.powi(m as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn cayley_examples() {
        let t = cayley_cogenerator(&ComplexMatrix::zeros(2, 2)).unwrap();
        assert!(t.dist(&ComplexMatrix::identity(2).scale_real(-1.0)) < 1e-15);

        let theta = 0.8;
        let t = cayley_cogenerator(&ComplexMatrix::diag(&[c(0.0, theta)])).unwrap();
        assert!((t[(0, 0)].norm() - 1.0).abs() < 1e-15);
        let expected = (c(1.0, theta)) / c(-1.0, theta);
        assert!((t[(0, 0)] - expected).norm() < 1e-15);

        let t = cayley_cogenerator(&nilpotent()).unwrap();
        let expected = ComplexMatrix::from_real_rows(&[&[-1.0, -2.0], &[0.0, -1.0]]);
        assert!(t.dist(&expected) < 1e-15);
        assert!(cayley_generator(&expected).unwrap().dist(&nilpotent()) < 1e-15);

        let a = cayley_generator(&ComplexMatrix::identity(2).scale_real(-1.0)).unwrap();
        assert!(a.max_abs() < 1e-15);
    }

    #[test]
    fn cayley_pole() {
        let a = ComplexMatrix::identity(2);
        assert!(matches!(cayley_cogenerator(&a), Err(Error::CayleyPole { .. })));
        assert!(matches!(cayley_generator(&a), Err(Error::CayleyPole { .. })));
    }

    #[test]
    fn unitary_without_eigenvalue_one_has_skew_generator() {
        let t = ComplexMatrix::diag(&[I, c(-0.6, 0.8), r(-1.0)]);
        let a = cayley_generator(&t).unwrap();
        assert!(is_m_skew_symmetric(&a, 1, 1e-12).holds);
    }

    #[test]
    fn bridge_examples() {
        assert!(beta_alpha_bridge_residual(&nilpotent(), 0).unwrap() < 1e-15);
        assert!(beta_alpha_bridge_residual(&nilpotent(), 3).unwrap() < 1e-15);
    }

    #[test]
    fn growth_polynomial_of_nilpotent() {
        let a = nilpotent();
        let x = vec![c(0.3, -1.0), c(2.0, 0.5)];
        let p = growth_polynomial(&a, &x, 3).unwrap();
        let re_b_conj_a = (x[1] * x[0].conj()).re;
        assert!((p.coefficients[0] - norm_sqr(&x)).abs() < 1e-14);
        assert!((p.coefficients[1] - 2.0 * re_b_conj_a).abs() < 1e-14);
        assert!((p.coefficients[2] - x[1].norm_sqr()).abs() < 1e-14);
        let p1 = growth_polynomial(&a, &[r(1.0), r(0.0)], 3).unwrap();
        assert_eq!(p1.coefficients, vec![1.0, 0.0, 0.0]);
        assert!(matches!(growth_polynomial(&a, &x, 2), Err(Error::Class(_))));
    }

    #[test]
    fn dissipativity_examples() {
        let skew = ComplexMatrix::from_rows(&[vec![I, r(1.0)], vec![r(-1.0), r(0.0)]]);
        assert!(dissipativity_w(&skew).abs() < 1e-15);
        assert!((dissipativity_w(&nilpotent()) - 0.5).abs() < 1e-15);
        assert!((dissipativity_w(&ComplexMatrix::identity(3).scale_real(-0.4)) + 0.4).abs() < 1e-15);
    }

    #[test]
    fn resolvent_examples() {
        let cases = [
            (ComplexMatrix::zeros(2, 2), ComplexMatrix::identity(2)),
            (nilpotent(), ComplexMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]])),
            (ComplexMatrix::identity(2).scale_real(-1.0), ComplexMatrix::identity(2).scale_real(0.5)),
        ];
        for (a, expected) in cases {
            let w = dissipativity_w(&a);
            let horizon = laplace_horizon(w, 1.0);
            let steps = (SIMPSON_PER_UNIT as f64 * horizon).ceil() as usize;
            let q = resolvent_quadrature(&a, 1.0, horizon, steps).unwrap();
            assert!(q.dist(&expected) < 1e-6 * expected.op_norm(), "{a:?}");
            assert!(resolvent(&a, 1.0).unwrap().dist(&expected) < 1e-15);
        }
        assert!(matches!(resolvent_quadrature(&nilpotent(), 0.4, 10.0, 100), Err(Error::DivergentIntegral { .. })));
    }

    #[test]
    fn difference_quotient_examples() {
        let w = 0.3;
        let a = ComplexMatrix::diag_real(&[w]);
        let d = difference_quotient_check(&a, &[r(1.0)], 1, 1.0).unwrap();
        assert!((d.difference - ((2.0 * w).exp() - 1.0)).abs() < 1e-14);
        assert!(d.relative < 1e-5);

        let d = difference_quotient_check(&nilpotent(), &[r(0.0), r(1.0)], 2, 1.0).unwrap();
        assert!((d.difference - 2.0).abs() < 1e-13);
        assert!((d.integral - 2.0).abs() < 1e-12);

        let d = difference_quotient_check(&nilpotent(), &[r(0.4), r(1.0)], 3, 0.5).unwrap();
        assert!(d.difference.abs() < 1e-13 && d.integral.abs() < 1e-13);
    }

    #[test]
    fn concave_growth_examples() {
        let x = vec![c(1.0, 0.5), r(-2.0)];
        let minus = ComplexMatrix::identity(2).scale_real(-1.0);
        assert_eq!(concave_growth_check(&minus, &x, 1, &T_GRID).unwrap(), 0.0);
        let skew = ComplexMatrix::from_rows(&[vec![I, r(1.0)], vec![r(-1.0), r(0.0)]]);
        assert!(concave_growth_check(&skew, &x, 1, &T_GRID).unwrap() < 1e-12);

        // -0.1 I + N is not 3-concave: its third form is indefinite.
        let weak = ComplexMatrix::from_real_rows(&[&[-0.1, 1.0], &[0.0, -0.1]]);
        assert!(matches!(concave_growth_check(&weak, &x, 3, &T_GRID), Err(Error::Class(_))));
        // -I + N is 3-concave (damping 2 exceeds sqrt 3).
        let strong = ComplexMatrix::from_real_rows(&[&[-1.0, 1.0], &[0.0, -1.0]]);
        assert_eq!(concave_growth_check(&strong, &x, 3, &T_GRID).unwrap(), 0.0);
    }
}
