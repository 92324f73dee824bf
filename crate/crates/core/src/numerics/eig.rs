//! Hermitian eigenproblems by cyclic complex Jacobi rotations.

use super::{r, ComplexMatrix, C64, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Eigen-decomposition `H = V diag(values) V*` with ascending eigenvalues.
#[derive(Clone, Debug)]
pub struct HermEig {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermEig {
    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue magnitude, i.e. the spectral norm of `H`.
    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.vectors;
        let n = v.rows();
        ComplexMatrix::from_fn(n, n, |i, j| {
            (0..self.values.len()).map(|k| v[(i, k)] * self.values[k] * v[(j, k)].conj()).sum()
        })
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix.
pub fn herm_eig(h: &ComplexMatrix) -> Result<HermEig> {
    if !h.is_square() {
        return Err(Error::Shape(format!("herm_eig needs a square matrix, got {}x{}", h.rows(), h.cols())));
    }
    if !h.is_hermitian() {
        return Err(Error::NotHermitian { defect: h.hermitian_defect() });
    }
    let n = h.rows();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let total = a.frobenius();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-17 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |i, k| v[(i, order[k])]);
    Ok(HermEig { values, vectors })
}

/// One Jacobi rotation zeroing `a[p][q]`: a diagonal phase makes the pivot
/// real, then a real plane rotation diagonalizes the 2x2 block.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let b = a[(p, q)];
    let mag = b.norm();
    if mag <= f64::MIN_POSITIVE {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    if mag <= 1e-300 * (app.abs() + aqq.abs()) {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let phase = b / mag; // e^{i phi}
    let theta = (aqq - app) / (2.0 * mag);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let cs = 1.0 / (t * t + 1.0).sqrt();
    let sn = t * cs;

    // U restricted to (p, q): columns (c, -s e^{-i phi}) and (s, c e^{-i phi}).
    let u_pp = r(cs);
    let u_qp = -phase.conj() * sn;
    let u_pq = r(sn);
    let u_qq = phase.conj() * cs;

    let n = a.rows();
    for i in 0..n {
        let hp = a[(i, p)];
        let hq = a[(i, q)];
        a[(i, p)] = hp * u_pp + hq * u_qp;
        a[(i, q)] = hp * u_pq + hq * u_qq;
    }
    for j in 0..n {
        let hp = a[(p, j)];
        let hq = a[(q, j)];
        a[(p, j)] = u_pp.conj() * hp + u_qp.conj() * hq;
        a[(q, j)] = u_pq.conj() * hp + u_qq.conj() * hq;
    }
    for i in 0..n {
        let vp = v[(i, p)];
        let vq = v[(i, q)];
        v[(i, p)] = vp * u_pp + vq * u_qp;
        v[(i, q)] = vp * u_pq + vq * u_qq;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = r(a[(p, p)].re);
    a[(q, q)] = r(a[(q, q)].re);
}

/// Largest generalized eigenvalue `max <Qx,x>/<Gx,x>` for Hermitian `Q` and
/// positive definite `G`.
///
/// `G` is whitened through its own eigen-decomposition, `G^{-1/2} Q G^{-1/2}`.
/// Fails with [`Error::SingularGram`] when the smallest eigenvalue of `G` is
/// at most `1e-12 * ||G||`.
pub fn gen_eig_max(q: &ComplexMatrix, g: &ComplexMatrix) -> Result<f64> {
    if q.rows() != g.rows() || !q.is_square() || !g.is_square() {
        return Err(Error::Shape("gen_eig_max needs square matrices of equal size".into()));
    }
    if !q.is_hermitian() {
        return Err(Error::NotHermitian { defect: q.hermitian_defect() });
    }
    if q.rows() == 0 {
        return Ok(0.0);
    }
    let ge = herm_eig(g)?;
    let min = ge.min();
    if min <= 1e-12 * ge.spectral_norm() {
        return Err(Error::SingularGram { min_eigenvalue: min });
    }
    let n = g.rows();
    let w = ComplexMatrix::from_fn(n, n, |i, k| ge.vectors[(i, k)] / ge.values[k].sqrt());
    let whitened = (&(&w.adjoint() * q) * &w).hermitian_part();
    Ok(herm_eig(&whitened)?.max())
}

/// Lower-triangular Cholesky factor `L` with `G = L L*`.
pub fn cholesky(g: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !g.is_hermitian() {
        return Err(Error::NotHermitian { defect: g.hermitian_defect() });
    }
    let n = g.rows();
    let mut l = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = g[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if d <= 0.0 {
            return Err(Error::SingularGram { min_eigenvalue: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = r(djj);
        for i in j + 1..n {
            let mut s: C64 = g[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}
