//! Defect operators `beta_m(T)`, m-isometries and m-concave operators.

use num_bigint::{BigInt, BigUint};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{herm_eig, norm_sqr, orth_complement, range_basis, ComplexMatrix, C64};

/// Default numerical-rank threshold for range computations.
pub const RANK_TOL: f64 = 1e-10;

/// `binom(n, k)` as a float; zero outside `0 <= k <= n`.
pub fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Exact `binom(n, k)`; zero outside `0 <= k <= n`.
pub fn binom_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Hermitian matrix of `beta_m(T) = sum_j (-1)^{m-j} binom(m,j) T*^j T^j`.
#[derive(Clone, Debug)]
pub struct DefectForm {
    pub m: usize,
    pub matrix: ComplexMatrix,
}

/// `T*^j T^j` for `j = 0..=k`.
fn gram_powers(t: &ComplexMatrix, k: usize) -> Vec<ComplexMatrix> {
    let adj = t.adjoint();
    let mut out = Vec::with_capacity(k + 1);
    let mut p = ComplexMatrix::identity(t.rows());
    out.push(p.clone());
    for _ in 0..k {
        p = &(&adj * &p) * t;
        out.push(p.clone());
    }
    out
}

fn alternating_sum(powers: &[ComplexMatrix], m: usize) -> ComplexMatrix {
    let n = powers[0].rows();
    let mut acc = ComplexMatrix::zeros(n, n);
    for (j, p) in powers.iter().enumerate().take(m + 1) {
        let sign = if (m - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        acc += &p.scale_real(sign * binom(m, j));
    }
    acc
}

/// `1 + max_j binom(m,j) max|T*^j T^j|`: magnitude of the largest summand of
/// `beta_m(T)`, the reference scale for identity residuals.
pub fn defect_scale(t: &ComplexMatrix, m: usize) -> f64 {
    let powers = gram_powers(t, m);
    1.0 + powers.iter().enumerate().map(|(j, p)| binom(m, j) * p.max_abs()).fold(0.0, f64::max)
}

pub fn beta(t: &ComplexMatrix, m: usize) -> DefectForm {
    assert!(t.is_square(), "beta needs a square operator");
    let powers = gram_powers(t, m);
    DefectForm { m, matrix: alternating_sum(&powers, m) }
}

/// `|| beta_{m+1} - (T* beta_m T - beta_m) ||`, both sides from the defining
/// sum, relative to [`defect_scale`] at order `m + 1`.
pub fn beta_recursion_residual(t: &ComplexMatrix, m: usize) -> f64 {
    let bm = beta(t, m).matrix;
    let next = beta(t, m + 1).matrix;
    let rec = &(&(&t.adjoint() * &bm) * t) - &bm;
    next.dist(&rec) / defect_scale(t, m + 1)
}

/// `|| T*^k T^k - sum_j binom(k,j) beta_j(T) ||`, relative to the largest
/// summand scale `binom(k,j) * defect_scale(T, j)`.
pub fn sum_of_defects_residual(t: &ComplexMatrix, k: usize) -> f64 {
    let lhs = gram_powers(t, k).pop().expect("k + 1 powers");
    let n = t.rows();
    let mut rhs = ComplexMatrix::zeros(n, n);
    let mut scale: f64 = 1.0;
    for j in 0..=k {
        rhs += &beta(t, j).matrix.scale_real(binom(k, j));
        scale = scale.max(binom(k, j) * defect_scale(t, j));
    }
    lhs.dist(&rhs) / scale
}

/// `beta_{j+m}(T)` against `sum_i (-1)^{j-i} binom(j,i) T*^i beta_m(T) T^i`,
/// relative to the larger of the two summand scales.
pub fn shifted_defect_residual(t: &ComplexMatrix, m: usize, j: usize) -> f64 {
    let lhs = beta(t, j + m).matrix;
    let bm = beta(t, m).matrix;
    let adj = t.adjoint();
    let n = t.rows();
    let mut rhs = ComplexMatrix::zeros(n, n);
    let mut conj_term = bm;
    let mut scale = defect_scale(t, j + m);
    for i in 0..=j {
        let sign = if (j - i).is_multiple_of(2) { 1.0 } else { -1.0 };
        rhs += &conj_term.scale_real(sign * binom(j, i));
        scale = scale.max(1.0 + binom(j, i) * conj_term.max_abs());
        conj_term = &(&adj * &conj_term) * t;
    }
    lhs.dist(&rhs) / scale
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    MIsometric,
    MConcave,
    Neither,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OperatorClass {
    pub m: usize,
    pub verdict: Verdict,
    /// Spectral norm of `beta_m` for an m-isometry, otherwise its largest eigenvalue.
    pub residual: f64,
}

/// Isometric iff `||beta_m(T)|| <= tol`; concave iff `lambda_max(beta_m(T)) <= tol`.
pub fn classify(t: &ComplexMatrix, m: usize, tol: f64) -> OperatorClass {
    let eig = herm_eig(&beta(t, m).matrix.hermitian_part()).expect("beta is Hermitian");
    let norm = eig.spectral_norm();
    let top = eig.max();
    if norm <= tol {
        OperatorClass { m, verdict: Verdict::MIsometric, residual: norm }
    } else if top <= tol {
        OperatorClass { m, verdict: Verdict::MConcave, residual: top }
    } else {
        OperatorClass { m, verdict: Verdict::Neither, residual: top }
    }
}

/// Class a caller asserts for `T` before running orbit checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeclaredClass {
    Isometric(usize),
    Concave(usize),
}

/// Orbit growth `||T^k x||^2` against `sum_{j<m} binom(k,j) <beta_j x, x>`
/// for `k = 0..=kmax`.
///
/// For a declared m-isometry each entry is the absolute mismatch; for a
/// declared m-concave operator it is the excess of the left side over the
/// bound (zero when the bound holds).
pub fn discrete_growth_check(
    t: &ComplexMatrix,
    x: &[C64],
    kmax: usize,
    declared: DeclaredClass,
    tol: f64,
) -> Result<Vec<f64>> {
    let (m, concave) = match declared {
        DeclaredClass::Isometric(m) => (m, false),
        DeclaredClass::Concave(m) => (m, true),
    };
    if m == 0 {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    let class = classify(t, m, tol);
    let ok = match class.verdict {
        Verdict::MIsometric => true,
        Verdict::MConcave => concave,
        Verdict::Neither => false,
    };
    if !ok {
        return Err(Error::Class(format!(
            "declared {declared:?} but classified {:?} (residual {:.3e})",
            class.verdict, class.residual
        )));
    }
    let defects: Vec<f64> = (0..m).map(|j| beta(t, j).matrix.quad(x)).collect();
    let mut y = x.to_vec();
    let mut out = Vec::with_capacity(kmax + 1);
    for k in 0..=kmax {
        let lhs = norm_sqr(&y);
        let bound: f64 = defects.iter().enumerate().map(|(j, d)| binom(k, j) * d).sum();
        out.push(if concave { (lhs - bound).max(0.0) } else { (lhs - bound).abs() });
        y = t.mul_vec(&y);
    }
    Ok(out)
}

/// Both sides of `sum_{j=i}^N (-1)^{j-i} binom(N+m, j+m) binom(j, i) = binom(m-1+N-i, N-i)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinomialCheck {
    pub lhs: BigInt,
    pub rhs: BigInt,
}

impl BinomialCheck {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

pub fn binom_sum_verify(i: u64, n: u64, m: u64) -> Result<BinomialCheck> {
    if i > n || m == 0 {
        return Err(Error::InvalidArgument(format!("need N >= i >= 0 and m >= 1, got i={i}, N={n}, m={m}")));
    }
    let mut lhs = BigInt::from(0);
    for j in i..=n {
        let term = BigInt::from(binom_big(n + m, j + m) * binom_big(j, i));
        if (j - i).is_multiple_of(2) {
            lhs += term;
        } else {
            lhs -= term;
        }
    }
    let rhs = BigInt::from(binom_big(m - 1 + n - i, n - i));
    Ok(BinomialCheck { lhs, rhs })
}

/// Exhaustive sweep over `0 <= i <= N <= n_max`, `1 <= m <= m_max`; returns
/// the failing triples.
pub fn binom_sum_sweep(n_max: u64, m_max: u64) -> Vec<(u64, u64, u64)> {
    let mut failures = Vec::new();
    for n in 0..=n_max {
        for i in 0..=n {
            for m in 1..=m_max {
                let check = binom_sum_verify(i, n, m).expect("valid indices");
                if !check.holds() {
                    failures.push((i, n, m));
                }
            }
        }
    }
    failures
}

/// Orthonormal bases for the unitary part `cap_n T^n H` and the analytic
/// part spanned by `T^n (H - TH)`.
#[derive(Clone, Debug)]
pub struct WoldSplit {
    pub unitary_basis: ComplexMatrix,
    pub analytic_basis: ComplexMatrix,
}

impl WoldSplit {
    /// `max |<u, a>|` over basis vectors of different blocks.
    pub fn cross_overlap(&self) -> f64 {
        if self.unitary_basis.cols() == 0 || self.analytic_basis.cols() == 0 {
            return 0.0;
        }
        (&self.unitary_basis.adjoint() * &self.analytic_basis).max_abs()
    }

    /// Deviation of each block from orthonormality.
    pub fn orthonormality_defect(&self) -> f64 {
        [&self.unitary_basis, &self.analytic_basis]
            .iter()
            .map(|b| (&b.adjoint() * b).dist(&ComplexMatrix::identity(b.cols())))
            .fold(0.0, f64::max)
    }

    /// `||(I - P) T P||` for the projector onto each block.
    pub fn invariance_defect(&self, t: &ComplexMatrix) -> f64 {
        let n = t.rows();
        [&self.unitary_basis, &self.analytic_basis]
            .iter()
            .map(|b| {
                let p = *b * &b.adjoint();
                let q = &ComplexMatrix::identity(n) - &p;
                (&(&q * t) * &p).op_norm()
            })
            .fold(0.0, f64::max)
    }
}

pub fn wold_split(t: &ComplexMatrix, nmax: usize, tol: f64) -> WoldSplit {
    assert!(t.is_square(), "wold_split needs a square operator");
    let n = t.rows();

    let mut range = ComplexMatrix::identity(n);
    for _ in 0..nmax.max(n) {
        let next = range_basis(&(t * &range), tol);
        let stable = next.cols() == range.cols();
        range = next;
        if stable || range.cols() == 0 {
            break;
        }
    }

    let wandering = orth_complement(&range_basis(t, tol), tol);
    let mut generators: Vec<Vec<C64>> = Vec::new();
    let mut block = wandering;
    for _ in 0..=nmax.max(n) {
        if block.cols() == 0 {
            break;
        }
        generators.extend(block.columns());
        block = t * &block;
        if block.max_abs() <= tol {
            break;
        }
    }
    let analytic = range_basis(&ComplexMatrix::from_columns(n, &generators), tol);
    WoldSplit { unitary_basis: range, analytic_basis: analytic }
}
