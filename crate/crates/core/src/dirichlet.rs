//! Truncations of the harmonically weighted Dirichlet space `D^2_mu(E)`.
//!
//! A polynomial `f = sum_k f_k z^k` with `f_k` in `E = C^d` is stored by its
//! coefficients. The monomial Gram blocks are
//!
//! ```text
//! <z^k x, z^l y> = delta_kl <x, y> + min(k, l) <mu_hat(l - k) x, y>
//! ```
//!
//! which makes every norm on polynomials an exact finite sum.

use std::f64::consts::PI;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::isometry::{binom, DefectForm};
use crate::measures::{tilde_measure, OperatorMeasure, Tilde, UNIMODULAR_TOL};
use crate::numerics::{cholesky, gen_eig_max, inner, norm_sqr, solve, ComplexMatrix, C64, ONE, ZERO};

/// Cauchy-increment threshold for the truncated multiplication path.
pub const PHI_INCREMENT_TOL: f64 = 1e-8;
/// Largest `phi_t` truncation degree the truncated path will try.
pub const PHI_MAX_DEGREE: usize = 1 << 20;

/// `E`-valued analytic polynomial.
#[derive(Clone, Debug, PartialEq)]
pub struct VecPoly {
    dim: usize,
    coeffs: Vec<Vec<C64>>,
}

impl VecPoly {
    /// Builds a polynomial, dropping trailing zero coefficients.
    pub fn new(dim: usize, mut coeffs: Vec<Vec<C64>>) -> Self {
        assert!(coeffs.iter().all(|c| c.len() == dim), "coefficient length must equal dim");
        while coeffs.last().is_some_and(|c| c.iter().all(|z| *z == ZERO)) {
            coeffs.pop();
        }
        VecPoly { dim, coeffs }
    }

    pub fn scalar(coeffs: &[C64]) -> Self {
        Self::new(1, coeffs.iter().map(|&z| vec![z]).collect())
    }

    pub fn real(coeffs: &[f64]) -> Self {
        Self::new(1, coeffs.iter().map(|&x| vec![C64::new(x, 0.0)]).collect())
    }

    /// `p(z) x` for a scalar polynomial `p`.
    pub fn times_vector(p: &[f64], x: &[C64]) -> Self {
        Self::new(x.len(), p.iter().map(|&a| x.iter().map(|&xi| xi * a).collect()).collect())
    }

    pub fn zero(dim: usize) -> Self {
        VecPoly { dim, coeffs: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[Vec<C64>] {
        &self.coeffs
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coefficient(&self, k: usize) -> Vec<C64> {
        self.coeffs.get(k).cloned().unwrap_or_else(|| vec![ZERO; self.dim])
    }

    pub fn eval(&self, z: C64) -> Vec<C64> {
        let mut acc = vec![ZERO; self.dim];
        for c in self.coeffs.iter().rev() {
            for (a, ci) in acc.iter_mut().zip(c) {
                *a = *a * z + ci;
            }
        }
        acc
    }

    /// Coefficients of degree `0..=n` laid end to end.
    pub fn flatten(&self, n: usize) -> Vec<C64> {
        (0..=n).flat_map(|k| self.coefficient(k)).collect()
    }

    pub fn h2_norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| norm_sqr(c)).sum()
    }

    /// `z f`.
    pub fn shift(&self) -> Self {
        if self.coeffs.is_empty() {
            return self.clone();
        }
        let mut coeffs = vec![vec![ZERO; self.dim]];
        coeffs.extend(self.coeffs.iter().cloned());
        VecPoly { dim: self.dim, coeffs }
    }

    /// Product with the scalar polynomial `sum a_n z^n`.
    pub fn mul_series(&self, a: &[f64]) -> Self {
        if self.coeffs.is_empty() || a.is_empty() {
            return Self::zero(self.dim);
        }
        let mut out = vec![vec![ZERO; self.dim]; a.len() + self.coeffs.len() - 1];
        for (k, fk) in self.coeffs.iter().enumerate() {
            for (n, &an) in a.iter().enumerate() {
                for (o, x) in out[n + k].iter_mut().zip(fk) {
                    *o += x * an;
                }
            }
        }
        Self::new(self.dim, out)
    }

    fn sub(&self, other: &VecPoly) -> Self {
        let len = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..len)
            .map(|k| self.coefficient(k).iter().zip(other.coefficient(k)).map(|(a, b)| a - b).collect())
            .collect();
        Self::new(self.dim, coeffs)
    }
}

fn check_dim(mu: &OperatorMeasure, f: &VecPoly) -> Result<()> {
    if mu.dim() != f.dim() {
        return Err(Error::Shape(format!("measure acts on C^{}, polynomial takes values in C^{}", mu.dim(), f.dim())));
    }
    Ok(())
}

/// `mu_hat(n)` for `n = 0..=n_max`.
fn fourier_table(mu: &OperatorMeasure, n_max: usize) -> Vec<ComplexMatrix> {
    (0..=n_max as i64).map(|n| mu.fourier(n)).collect()
}

fn toeplitz_block(table: &[ComplexMatrix], l: usize, k: usize) -> ComplexMatrix {
    if l >= k {
        table[l - k].clone()
    } else {
        table[k - l].adjoint()
    }
}

/// Gram matrix of the monomials `z^k e_i`, `k <= degree`, in `D^2_mu(E)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GramTruncation {
    pub degree: usize,
    pub dim: usize,
    pub matrix: ComplexMatrix,
}

impl GramTruncation {
    /// `||f||^2`; `f` must have degree at most the truncation degree.
    pub fn norm_sq(&self, f: &VecPoly) -> f64 {
        assert!(f.degree().is_none_or(|d| d <= self.degree), "polynomial exceeds truncation degree");
        self.matrix.quad(&f.flatten(self.degree))
    }

    pub fn inner(&self, f: &VecPoly, g: &VecPoly) -> C64 {
        self.matrix.form(&f.flatten(self.degree), &g.flatten(self.degree))
    }
}

/// Block `(l, k)` is `delta_kl I + min(k, l) mu_hat(l - k)`.
pub fn gram(mu: &OperatorMeasure, degree: usize) -> GramTruncation {
    let d = mu.dim();
    let table = fourier_table(mu, degree);
    let mut matrix = ComplexMatrix::zeros((degree + 1) * d, (degree + 1) * d);
    for l in 0..=degree {
        for k in 0..=degree {
            let mut block = toeplitz_block(&table, l, k).scale_real(k.min(l) as f64);
            if k == l {
                block += &ComplexMatrix::identity(d);
            }
            matrix.set_block(l * d, k * d, &block);
        }
    }
    GramTruncation { degree, dim: d, matrix }
}

/// `||f||^2_{D^2_mu}` through the Gram matrix.
pub fn norm_sq(mu: &OperatorMeasure, f: &VecPoly) -> Result<f64> {
    check_dim(mu, f)?;
    Ok(gram(mu, f.degree().unwrap_or(0)).norm_sq(f))
}

/// `||f||^2_{D^2_mu}` in time linear in the degree.
///
/// Atoms use `sum_{k,l>=1} min(k,l) a_k conj(a_l) = sum_{s>=1} |sum_{k>=s} a_k|^2`
/// with `a_k = zeta^k f_k`; the density part is a band of width `K`.
pub fn norm_sq_fast(mu: &OperatorMeasure, f: &VecPoly) -> Result<f64> {
    check_dim(mu, f)?;
    let coeffs = f.coeffs();
    let mut total = f.h2_norm_sq();
    let d = mu.dim();
    for atom in mu.atoms() {
        let mut suffix = vec![ZERO; d];
        let mut acc = 0.0;
        let mut powers: Vec<C64> = Vec::with_capacity(coeffs.len());
        let mut p = ONE;
        for _ in 0..coeffs.len() {
            powers.push(p);
            p *= atom.zeta;
        }
        for s in (1..coeffs.len()).rev() {
            for (u, x) in suffix.iter_mut().zip(&coeffs[s]) {
                *u += powers[s] * x;
            }
            acc += atom.weight.quad(&suffix);
        }
        total += acc / (2.0 * PI);
    }
    let density = mu.density_coefficients();
    if !density.is_empty() && !coeffs.is_empty() {
        let band = density.len() - 1;
        let top = coeffs.len() - 1;
        let mut acc = 0.0;
        for l in 1..=top {
            // Diagonal term plus twice the real part of the strictly lower band.
            acc += l as f64 * density[0].quad(&coeffs[l]);
            for k in (l.saturating_sub(band)).max(1)..l {
                acc += 2.0 * k as f64 * density[l - k].form(&coeffs[k], &coeffs[l]).re;
            }
        }
        total += acc;
    }
    Ok(total)
}

/// `D_mu(f) = sum_{k,l>=1} min(k,l) <mu_hat(l-k) f_k, f_l>`.
pub fn dirichlet_energy(mu: &OperatorMeasure, f: &VecPoly) -> Result<f64> {
    check_dim(mu, f)?;
    let Some(n) = f.degree() else { return Ok(0.0) };
    let table = fourier_table(mu, n);
    let mut acc = ZERO;
    for l in 1..=n {
        for k in 1..=n {
            let block = toeplitz_block(&table, l, k);
            acc += block.form(&f.coefficient(k), &f.coefficient(l)) * k.min(l) as f64;
        }
    }
    Ok(acc.re)
}

/// Matrix of `(f, g) -> sum_{k,l} <mu_hat(l-k) f_k, g_l>` on degrees `<= degree`.
pub fn boundary_matrix(mu: &OperatorMeasure, degree: usize) -> ComplexMatrix {
    let d = mu.dim();
    let table = fourier_table(mu, degree);
    let mut matrix = ComplexMatrix::zeros((degree + 1) * d, (degree + 1) * d);
    for l in 0..=degree {
        for k in 0..=degree {
            matrix.set_block(l * d, k * d, &toeplitz_block(&table, l, k));
        }
    }
    matrix
}

/// `(1/2pi) int <dmu f, g>` as the finite double sum of Fourier data.
pub fn boundary_form(mu: &OperatorMeasure, f: &VecPoly, g: &VecPoly) -> Result<C64> {
    check_dim(mu, f)?;
    check_dim(mu, g)?;
    let n = f.degree().unwrap_or(0).max(g.degree().unwrap_or(0));
    Ok(boundary_matrix(mu, n).form(&f.flatten(n), &g.flatten(n)))
}

/// `|(||z f||^2 - ||f||^2) - (1/2pi) int <dmu f, f>|` relative to `1 + ||z f||^2`.
pub fn defect_formula_residual(mu: &OperatorMeasure, f: &VecPoly) -> Result<f64> {
    check_dim(mu, f)?;
    let g = gram(mu, f.degree().unwrap_or(0) + 1);
    let zf = f.shift();
    let lhs = g.norm_sq(&zf) - g.norm_sq(f);
    let rhs = boundary_form(mu, f, f)?.re;
    Ok((lhs - rhs).abs() / (1.0 + g.norm_sq(&zf)))
}

/// `f -> <beta_m(M_z) f, f>` on polynomials of degree `<= degree`.
///
/// Block `(l, k)` is `sum_j (-1)^{m-j} binom(m,j) G[l+j][k+j]` with `G` the
/// Gram matrix of degree `degree + m`.
pub fn mz_defect_form(mu: &OperatorMeasure, degree: usize, m: usize) -> DefectForm {
    let d = mu.dim();
    let g = gram(mu, degree + m).matrix;
    let size = (degree + 1) * d;
    let mut matrix = ComplexMatrix::zeros(size, size);
    for j in 0..=m {
        let sign = if (m - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        let shifted = g.block(j * d, j * d, size, size).scale_real(sign * binom(m, j));
        matrix += &shifted;
    }
    DefectForm { m, matrix }
}

fn check_unimodular(zeta: C64) -> Result<()> {
    if (zeta.norm() - 1.0).abs() > UNIMODULAR_TOL {
        return Err(Error::NotUnimodular { modulus: zeta.norm() });
    }
    Ok(())
}

/// `F = (f - f(zeta)) / (z - zeta)` by synthetic division.
pub fn douglas_quotient(f: &VecPoly, zeta: C64) -> VecPoly {
    let n = f.coeffs().len();
    if n <= 1 {
        return VecPoly::zero(f.dim());
    }
    let mut out = vec![vec![ZERO; f.dim()]; n - 1];
    out[n - 2] = f.coeffs()[n - 1].clone();
    for k in (1..n - 1).rev() {
        out[k - 1] = f.coeffs()[k].iter().zip(&out[k]).map(|(a, b)| a + zeta * b).collect();
    }
    VecPoly::new(f.dim(), out)
}

/// `D_zeta(f) = ||(f - f(zeta)) / (z - zeta)||^2_{H^2}` for scalar `f`.
pub fn local_dirichlet(f: &VecPoly, zeta: C64) -> Result<f64> {
    check_unimodular(zeta)?;
    if f.dim() != 1 {
        return Err(Error::Shape("local_dirichlet takes a scalar polynomial".into()));
    }
    Ok(douglas_quotient(f, zeta).h2_norm_sq())
}

/// `sum_k <W F_k, F_k>` with `F` the Douglas quotient at `zeta`.
pub fn local_dirichlet_weighted(f: &VecPoly, zeta: C64, weight: &ComplexMatrix) -> Result<f64> {
    check_unimodular(zeta)?;
    Ok(douglas_quotient(f, zeta).coeffs().iter().map(|c| weight.quad(c)).sum())
}

fn require_atomic(mu: &OperatorMeasure) -> Result<()> {
    if !mu.is_atomic() {
        return Err(Error::InvalidArgument("this path needs a purely atomic measure".into()));
    }
    Ok(())
}

/// `(1/2pi) sum_j D^{W_j}_{zeta_j}(f)`: the Douglas path to `D_mu(f)`.
pub fn douglas_energy(mu: &OperatorMeasure, f: &VecPoly) -> Result<f64> {
    check_dim(mu, f)?;
    require_atomic(mu)?;
    let mut acc = 0.0;
    for atom in mu.atoms() {
        acc += local_dirichlet_weighted(f, atom.zeta, &atom.weight)?;
    }
    Ok(acc / (2.0 * PI))
}

/// Series path versus Douglas path, relative to `1 + D_mu(f)`.
pub fn fubini_residual(mu: &OperatorMeasure, f: &VecPoly) -> Result<f64> {
    let series = dirichlet_energy(mu, f)?;
    let douglas = douglas_energy(mu, f)?;
    Ok((series - douglas).abs() / (1.0 + series.abs()))
}

/// Maclaurin coefficients `a_0..=a_M` of `phi_t(z) = exp(t (z + 1) / (z - 1))`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiCoefficients {
    pub t: f64,
    pub coeffs: Vec<f64>,
}

/// Three-term recurrence from `(z - 1)^2 phi' = -2t phi`.
pub fn phi_coeffs(t: f64, degree: usize) -> PhiCoefficients {
    let mut a = Vec::with_capacity(degree + 1);
    a.push((-t).exp());
    if degree >= 1 {
        a.push(-2.0 * t * a[0]);
    }
    for n in 1..degree {
        let nf = n as f64;
        let next = ((2.0 * nf - 2.0 * t) * a[n] - (nf - 1.0) * a[n - 1]) / (nf + 1.0);
        a.push(next);
    }
    PhiCoefficients { t, coeffs: a }
}

/// `|phi_t(z)|^2 = exp(-2t (1 - |z|^2) / |1 - z|^2)`, evaluated without the series.
pub fn phi_modulus_sq(t: f64, z: C64) -> f64 {
    (-2.0 * t * (1.0 - z.norm_sqr()) / (ONE - z).norm_sqr()).exp()
}

fn check_not_one(zeta: C64) -> Result<f64> {
    check_unimodular(zeta)?;
    let gap = (ONE - zeta).norm_sqr();
    if gap <= UNIMODULAR_TOL * UNIMODULAR_TOL {
        return Err(Error::PoleAtOne);
    }
    Ok(gap)
}

/// `D_zeta(phi_t) = 2t / |1 - zeta|^2`.
pub fn local_dirichlet_phi(t: f64, zeta: C64) -> Result<f64> {
    Ok(2.0 * t / check_not_one(zeta)?)
}

/// `(1 - |phi_t(r zeta)|^2) / (1 - r^2)`, whose limit as `r -> 1` is `D_zeta(phi_t)`.
pub fn phi_radial_quotient(t: f64, zeta: C64, r: f64) -> Result<f64> {
    check_not_one(zeta)?;
    let z = zeta * r;
    let exponent = -2.0 * t * (1.0 - r * r) / (ONE - z).norm_sqr();
    Ok(-exponent.exp_m1() / (1.0 - r * r))
}

fn atomic_without_pole(mu: &OperatorMeasure) -> Result<()> {
    require_atomic(mu)?;
    for atom in mu.atoms() {
        if atom.weight.max_abs() > 0.0 {
            check_not_one(atom.zeta)?;
        }
    }
    Ok(())
}

/// `||f||^2 + (t/pi) sum_j <W_j f(zeta_j), f(zeta_j)> / |1 - zeta_j|^2`.
pub fn multiplication_formula_rhs(mu: &OperatorMeasure, f: &VecPoly, t: f64) -> Result<f64> {
    check_dim(mu, f)?;
    atomic_without_pole(mu)?;
    let mut boundary = 0.0;
    for atom in mu.atoms() {
        let v = f.eval(atom.zeta);
        boundary += atom.weight.quad(&v) / (ONE - atom.zeta).norm_sqr();
    }
    Ok(norm_sq(mu, f)? + t / PI * boundary)
}

/// `||phi_t f||^2` per atom: `phi_t` is inner, so the Hardy part is `||f||^2_{H^2}`,
/// and `D_zeta(phi f) = D_zeta(f) + |f(zeta)|^2 D_zeta(phi)` at each atom.
pub fn phi_times_norm_exact(mu: &OperatorMeasure, f: &VecPoly, t: f64) -> Result<f64> {
    check_dim(mu, f)?;
    atomic_without_pole(mu)?;
    let mut local = 0.0;
    for atom in mu.atoms() {
        let v = f.eval(atom.zeta);
        local += local_dirichlet_weighted(f, atom.zeta, &atom.weight)?
            + atom.weight.quad(&v) * local_dirichlet_phi(t, atom.zeta)?;
    }
    Ok(f.h2_norm_sq() + local / (2.0 * PI))
}

/// Result of the truncated path: the last partial norm and its degree.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TruncatedNorm {
    pub value: f64,
    pub degree: usize,
    pub last_increment: f64,
    pub converged: bool,
}

/// `||phi_t^{(M)} f||^2` with `M` doubled from 16 until the increment drops
/// below `tol` or `M` exceeds `max_degree`.
pub fn phi_times_norm_truncated(
    mu: &OperatorMeasure,
    f: &VecPoly,
    t: f64,
    tol: f64,
    max_degree: usize,
) -> Result<TruncatedNorm> {
    check_dim(mu, f)?;
    let all = phi_coeffs(t, max_degree).coeffs;
    let mut degree = 16.min(max_degree);
    let mut value = norm_sq_fast(mu, &f.mul_series(&all[..=degree]))?;
    loop {
        if degree >= max_degree {
            return Ok(TruncatedNorm { value, degree, last_increment: f64::INFINITY, converged: false });
        }
        let next_degree = (2 * degree).min(max_degree);
        let next = norm_sq_fast(mu, &f.mul_series(&all[..=next_degree]))?;
        let increment = (next - value).abs();
        value = next;
        degree = next_degree;
        if increment < tol {
            return Ok(TruncatedNorm { value, degree, last_increment: increment, converged: true });
        }
        if degree >= max_degree {
            return Ok(TruncatedNorm { value, degree, last_increment: increment, converged: false });
        }
    }
}

/// Both residuals of the multiplication formula at one `(f, t)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MultiplicationResidual {
    pub rhs: f64,
    pub exact: f64,
    pub truncated: TruncatedNorm,
    pub exact_residual: f64,
    pub truncated_residual: f64,
}

pub fn multiplication_formula_residual(
    mu: &OperatorMeasure,
    f: &VecPoly,
    t: f64,
    max_degree: usize,
) -> Result<MultiplicationResidual> {
    let rhs = multiplication_formula_rhs(mu, f, t)?;
    let exact = phi_times_norm_exact(mu, f, t)?;
    let truncated = phi_times_norm_truncated(mu, f, t, PHI_INCREMENT_TOL, max_degree)?;
    Ok(MultiplicationResidual {
        rhs,
        exact,
        truncated,
        exact_residual: (exact - rhs).abs(),
        truncated_residual: (truncated.value - rhs).abs(),
    })
}

/// Fits a line through the exact path at `t = 0.5, 1, 2` and returns the
/// miss at `t = 4`.
pub fn affine_extrapolation_residual(mu: &OperatorMeasure, f: &VecPoly) -> Result<f64> {
    let ts = [0.5, 1.0, 2.0];
    let ys = ts.iter().map(|&t| phi_times_norm_exact(mu, f, t)).collect::<Result<Vec<_>>>()?;
    let tm = ts.iter().sum::<f64>() / 3.0;
    let ym = ys.iter().sum::<f64>() / 3.0;
    let sxy: f64 = ts.iter().zip(&ys).map(|(t, y)| (t - tm) * (y - ym)).sum();
    let sxx: f64 = ts.iter().map(|t| (t - tm) * (t - tm)).sum();
    let slope = sxy / sxx;
    let predicted = ym + slope * (4.0 - tm);
    Ok((predicted - phi_times_norm_exact(mu, f, 4.0)?).abs())
}

/// Coefficient matrix of `f -> (1 - z) f` from degree `<= n` to degree `<= n + 1`.
fn one_minus_z(n: usize, d: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros((n + 2) * d, (n + 1) * d);
    for k in 0..=n {
        for i in 0..d {
            m[(k * d + i, k * d + i)] = ONE;
            m[((k + 1) * d + i, k * d + i)] = -ONE;
        }
    }
    m
}

/// Largest `(1/2pi) int <dmu f, f> / ||(I - M_z) f||^2` over degree `<= n`.
pub fn estimate_w1(mu: &OperatorMeasure, n: usize) -> Result<f64> {
    let q = boundary_matrix(mu, n);
    let d = one_minus_z(n, mu.dim());
    let g = &(&d.adjoint() * &gram(mu, n + 1).matrix) * &d;
    gen_eig_max(&q, &g.hermitian_part())
}

/// Value or divergence verdict of the `w_2` estimator.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum W2 {
    Value(f64),
    Diverges(String),
}

impl W2 {
    pub fn value(&self) -> Option<f64> {
        match self {
            W2::Value(v) => Some(*v),
            W2::Diverges(_) => None,
        }
    }
}

/// Largest `int <dmu~ f, f> / ||f||^2` over degree `<= n`.
///
/// `mu~` carries the `1/2pi` of its definition, so the quotient uses
/// `int` rather than `(1/2pi) int`; this is the normalization under which
/// `w_1`, `w_2` and the dissipativity constant share a limit.
pub fn estimate_w2(mu: &OperatorMeasure, n: usize, quad_points: usize) -> Result<W2> {
    match tilde_measure(mu, quad_points) {
        Tilde::Diverges(reason) => Ok(W2::Diverges(reason)),
        Tilde::Measure(tilde) => {
            let q = boundary_matrix(&tilde, n).scale_real(2.0 * PI);
            Ok(W2::Value(gen_eig_max(&q.hermitian_part(), &gram(mu, n).matrix)?))
        }
    }
}

/// `w_1` and `w_2` at one truncation degree.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WReport {
    pub degree: usize,
    pub w1: f64,
    pub w2: W2,
    /// Dissipativity constant of the Cayley generator of the compressed shift.
    pub w: Option<f64>,
}

pub fn w_report(mu: &OperatorMeasure, degree: usize, quad_points: usize) -> Result<WReport> {
    let w = model_generator(mu, degree).ok().map(|a| crate::semigroup::dissipativity_w(&a));
    Ok(WReport { degree, w1: estimate_w1(mu, degree)?, w2: estimate_w2(mu, degree, quad_points)?, w })
}

/// Compression of `M_z` to polynomials of degree `<= n`, in coordinates
/// orthonormal for `D^2_mu`.
pub fn model_shift(mu: &OperatorMeasure, n: usize) -> Result<ComplexMatrix> {
    let d = mu.dim();
    let big = gram(mu, n + 1).matrix;
    let size = (n + 1) * d;
    let small = big.block(0, 0, size, size);
    // <z f, z^l e_i> for l <= n, then project with the Gram inverse.
    let mut shift = ComplexMatrix::zeros((n + 2) * d, size);
    for i in 0..size {
        shift[(i + d, i)] = ONE;
    }
    let cross = &big.block(0, 0, size, (n + 2) * d) * &shift;
    let compressed = solve(&small, &cross)?;
    let l = cholesky(&small)?;
    let right = solve(&l.adjoint(), &ComplexMatrix::identity(size))?;
    Ok(&(&l.adjoint() * &compressed) * &right)
}

/// Cayley generator of [`model_shift`].
pub fn model_generator(mu: &OperatorMeasure, n: usize) -> Result<ComplexMatrix> {
    crate::semigroup::cayley_generator(&model_shift(mu, n)?)
}

/// Plain coefficient shift on degree `<= n`: the analytic part of the model.
pub fn coefficient_shift(n: usize, d: usize) -> ComplexMatrix {
    let size = (n + 1) * d;
    let mut m = ComplexMatrix::zeros(size, size);
    for i in 0..size.saturating_sub(d) {
        m[(i + d, i)] = ONE;
    }
    m
}

/// `||f - k_r f||^2_{D^2_mu}` for each `r`, with `k_r = (1 - z)/(1 - r z)`
/// expanded until `r^M <= 1e-12`.
pub fn kr_convergence_report(mu: &OperatorMeasure, f: &VecPoly, r_grid: &[f64]) -> Result<Vec<f64>> {
    check_dim(mu, f)?;
    r_grid
        .iter()
        .map(|&r| {
            if !(r > 0.0 && r < 1.0) {
                return Err(Error::InvalidArgument(format!("r = {r} is not in (0, 1)")));
            }
            let terms = ((1e-12f64).ln() / r.ln()).ceil() as usize;
            let mut k = Vec::with_capacity(terms + 1);
            k.push(1.0);
            let mut p = 1.0;
            for _ in 1..=terms {
                k.push(p * (r - 1.0));
                p *= r;
            }
            norm_sq_fast(mu, &f.sub(&f.mul_series(&k)))
        })
        .collect()
}

/// Machine-readable record of one operation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpRecord {
    pub op: String,
    #[serde(rename = "inputs-digest")]
    pub inputs_digest: String,
    pub value: serde_json::Value,
    pub tolerance: f64,
    pub pass: bool,
}

impl OpRecord {
    pub fn new(op: &str, inputs: &impl Serialize, value: impl Serialize, tolerance: f64, pass: bool) -> Self {
        let canonical = serde_json::to_vec(inputs).expect("inputs serialize");
        OpRecord {
            op: op.to_string(),
            inputs_digest: hex::encode(Sha256::digest(&canonical)),
            value: serde_json::to_value(value).expect("value serializes"),
            tolerance,
            pass,
        }
    }
}

/// `<f, g>_{H^2}`.
pub fn h2_inner(f: &VecPoly, g: &VecPoly) -> C64 {
    let n = f.coeffs().len().min(g.coeffs().len());
    (0..n).map(|k| inner(&f.coeffs()[k], &g.coeffs()[k])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c, r, I};

    fn delta_minus_one() -> OperatorMeasure {
        OperatorMeasure::point_mass_2pi(1.0, 1)
    }

    fn z_pow(k: usize) -> VecPoly {
        let mut p = vec![0.0; k + 1];
        p[k] = 1.0;
        VecPoly::real(&p)
    }

    #[test]
    fn gram_examples() {
        let g = gram(&OperatorMeasure::lebesgue(1), 5).matrix;
        assert!(g.dist(&ComplexMatrix::diag_real(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0])) == 0.0);
        assert_eq!(gram(&OperatorMeasure::zero(2), 3).matrix, ComplexMatrix::identity(8));
        let g = gram(&delta_minus_one(), 3);
        assert!((g.norm_sq(&z_pow(1)) - 2.0).abs() < 1e-15);
        assert!((g.matrix[(2, 1)] - r(-1.0)).norm() < 1e-15);
        assert!((g.inner(&z_pow(2), &z_pow(1)) - r(-1.0)).norm() < 1e-15);
    }

    #[test]
    fn fast_norm_matches_gram() {
        let mu = delta_minus_one()
            .add(&OperatorMeasure::atom(0.3, ComplexMatrix::diag_real(&[0.7])).unwrap())
            .unwrap()
            .add(&OperatorMeasure::fejer_abs_one_minus_z(8, 1))
            .unwrap();
        let f = VecPoly::scalar(&(0..14).map(|k| c((k as f64).sin(), 0.3 * k as f64 - 1.0)).collect::<Vec<_>>());
        let slow = norm_sq(&mu, &f).unwrap();
        let fast = norm_sq_fast(&mu, &f).unwrap();
        assert!((slow - fast).abs() < 1e-10 * slow);
    }

    #[test]
    fn energy_examples() {
        assert_eq!(dirichlet_energy(&delta_minus_one(), &VecPoly::real(&[3.0])).unwrap(), 0.0);
        assert!((dirichlet_energy(&delta_minus_one(), &z_pow(1)).unwrap() - 1.0).abs() < 1e-15);
        assert!((dirichlet_energy(&OperatorMeasure::lebesgue(1), &z_pow(2)).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn boundary_examples() {
        let f = VecPoly::real(&[1.0, -2.0, 0.5]);
        let leb = boundary_form(&OperatorMeasure::lebesgue(1), &f, &f).unwrap();
        assert!((leb.re - f.h2_norm_sq()).abs() < 1e-15);
        let one_plus_z = VecPoly::real(&[1.0, 1.0]);
        assert!(boundary_form(&delta_minus_one(), &one_plus_z, &one_plus_z).unwrap().norm() < 1e-15);
    }

    #[test]
    fn defect_formula_examples() {
        assert!(defect_formula_residual(&OperatorMeasure::zero(1), &VecPoly::real(&[1.0, 2.0])).unwrap() < 1e-15);
        let one = VecPoly::real(&[1.0]);
        let leb = OperatorMeasure::lebesgue(1);
        assert!(defect_formula_residual(&leb, &one).unwrap() < 1e-15);
        let g = gram(&leb, 1);
        assert!((g.norm_sq(&one.shift()) - g.norm_sq(&one) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn model_is_two_isometric() {
        for mu in [delta_minus_one(), OperatorMeasure::lebesgue(1)] {
            assert!(mz_defect_form(&mu, 6, 2).matrix.max_abs() < 1e-12);
        }
        assert!(mz_defect_form(&OperatorMeasure::zero(1), 4, 1).matrix.max_abs() < 1e-15);
        let b1 = mz_defect_form(&OperatorMeasure::lebesgue(1), 4, 1).matrix;
        assert!(b1.dist(&ComplexMatrix::identity(5)) < 1e-15);
    }

    #[test]
    fn douglas_examples() {
        assert_eq!(local_dirichlet(&VecPoly::real(&[4.0]), I).unwrap(), 0.0);
        assert!((local_dirichlet(&z_pow(1), c(0.6, 0.8)).unwrap() - 1.0).abs() < 1e-15);
        assert!((local_dirichlet(&z_pow(2), r(-1.0)).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(local_dirichlet(&z_pow(1), r(0.5)), Err(Error::NotUnimodular { .. })));
    }

    #[test]
    fn fubini_examples() {
        let mu = delta_minus_one();
        assert!(fubini_residual(&mu, &z_pow(1)).unwrap() < 1e-15);
        assert!((douglas_energy(&mu, &z_pow(2)).unwrap() - 2.0).abs() < 1e-14);
        assert!((dirichlet_energy(&mu, &z_pow(2)).unwrap() - 2.0).abs() < 1e-14);
        assert!(fubini_residual(&mu, &VecPoly::real(&[2.0])).unwrap() == 0.0);
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_coeffs(0.0, 5).coeffs, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let t = 0.7;
        let a = phi_coeffs(t, 3).coeffs;
        let e = (-t).exp();
        assert!((a[0] - e).abs() < 1e-16);
        assert!((a[1] + 2.0 * t * e).abs() < 1e-16);
        assert!((a[2] + 2.0 * t * (1.0 - t) * e).abs() < 1e-16);
    }

    #[test]
    fn local_dirichlet_phi_examples() {
        assert!((local_dirichlet_phi(1.3, r(-1.0)).unwrap() - 0.65).abs() < 1e-15);
        assert_eq!(local_dirichlet_phi(0.0, I).unwrap(), 0.0);
        assert!((local_dirichlet_phi(1.3, I).unwrap() - 1.3).abs() < 1e-15);
        assert!(matches!(local_dirichlet_phi(1.0, ONE), Err(Error::PoleAtOne)));
        let q = phi_radial_quotient(1.0, r(-1.0), 1.0 - 1e-6).unwrap();
        assert!((q - 0.5).abs() < 1e-5);
    }

    #[test]
    fn multiplication_examples() {
        let mu = delta_minus_one();
        for t in [0.0, 0.5, 2.0] {
            let one = VecPoly::real(&[1.0]);
            assert!((phi_times_norm_exact(&mu, &one, t).unwrap() - (1.0 + t / 2.0)).abs() < 1e-14);
            assert!((multiplication_formula_rhs(&mu, &one, t).unwrap() - (1.0 + t / 2.0)).abs() < 1e-14);
            let z = z_pow(1);
            assert!((phi_times_norm_exact(&mu, &z, t).unwrap() - (2.0 + t / 2.0)).abs() < 1e-14);
        }
        let at_one = OperatorMeasure::atom(0.0, ComplexMatrix::diag_real(&[1.0])).unwrap();
        assert!(matches!(multiplication_formula_rhs(&at_one, &z_pow(1), 1.0), Err(Error::PoleAtOne)));
    }

    #[test]
    fn w_estimates_at_degree_zero() {
        assert_eq!(estimate_w1(&OperatorMeasure::zero(1), 3).unwrap(), 0.0);
        assert!((estimate_w1(&delta_minus_one(), 0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(estimate_w2(&OperatorMeasure::zero(1), 2, 64).unwrap(), W2::Value(0.0));
        let w2 = estimate_w2(&delta_minus_one(), 0, 64).unwrap().value().unwrap();
        assert!((w2 - 0.25).abs() < 1e-14);
        assert!(matches!(estimate_w2(&OperatorMeasure::lebesgue(1), 3, 64).unwrap(), W2::Diverges(_)));
    }

    #[test]
    fn kr_examples() {
        let grid = [0.5, 0.9, 0.99];
        let h2 = kr_convergence_report(&OperatorMeasure::zero(1), &VecPoly::real(&[1.0]), &grid).unwrap();
        for (v, r) in h2.iter().zip(grid) {
            assert!((v - (1.0 - r) / (1.0 + r)).abs() < 1e-12);
        }
        let zero = kr_convergence_report(&OperatorMeasure::lebesgue(1), &VecPoly::zero(1), &grid).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn op_record_digest_is_stable() {
        let a = OpRecord::new("gram", &("lebesgue", 3), 1.0, 1e-10, true);
        let b = OpRecord::new("gram", &("lebesgue", 3), 2.0, 1e-10, true);
        assert_eq!(a.inputs_digest, b.inputs_digest);
        assert_eq!(a.inputs_digest.len(), 64);
    }
}
