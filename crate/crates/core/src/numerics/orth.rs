use super::{inner, norm_sqr, ComplexMatrix, C64};

/// Orthonormal basis (as columns) of the column space of `m`.
///
/// Modified Gram-Schmidt with column pivoting and one reorthogonalization
/// pass. A candidate column whose residual norm drops below
/// `tol * (largest column norm)` is treated as dependent.
pub fn range_basis(m: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let n = m.rows();
    let mut cols = m.columns();
    let scale = cols.iter().map(|c| norm_sqr(c).sqrt()).fold(0.0, f64::max);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    if scale == 0.0 {
        return ComplexMatrix::zeros(n, 0);
    }
    while !cols.is_empty() && basis.len() < n {
        let (best, norm) = cols
            .iter()
            .enumerate()
            .map(|(i, c)| (i, norm_sqr(c).sqrt()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        if norm <= tol * scale {
            break;
        }
        let mut q = cols.swap_remove(best);
        for _ in 0..2 {
            for b in &basis {
                let p = inner(&q, b);
                for (qi, bi) in q.iter_mut().zip(b) {
                    *qi -= p * bi;
                }
            }
        }
        let qn = norm_sqr(&q).sqrt();
        if qn <= tol * scale {
            continue;
        }
        for qi in q.iter_mut() {
            *qi /= qn;
        }
        for c in cols.iter_mut() {
            let p = inner(c, &q);
            for (ci, qi) in c.iter_mut().zip(&q) {
                *ci -= p * qi;
            }
        }
        basis.push(q);
    }
    ComplexMatrix::from_columns(n, &basis)
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns of `q` inside `C^n`.
pub fn orth_complement(q: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let n = q.rows();
    let projector = &ComplexMatrix::identity(n) - &(q * &q.adjoint());
    // A nonzero projector has a column of norm at least sqrt(rank / n), so
    // anything at roundoff level means the complement is trivial.
    if projector.max_abs() <= tol {
        return ComplexMatrix::zeros(n, 0);
    }
    range_basis(&projector, tol)
}
