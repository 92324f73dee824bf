use super::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};

/// Relative pivot threshold below which a matrix is declared singular.
pub const PIVOT_TOL: f64 = 1e-13;

/// Solves `A X = B` by LU factorization with partial pivoting.
///
/// A pivot smaller than `1e-13 * max|A|` is reported as [`Error::Singular`].
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(Error::Shape(format!("solve needs a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    if a.rows() != b.rows() {
        return Err(Error::Shape(format!("right-hand side has {} rows, expected {}", b.rows(), a.rows())));
    }
    let n = a.rows();
    let threshold = PIVOT_TOL * a.max_abs();
    let mut lu = a.clone();
    let mut x = b.clone();
    let m = b.cols();

    for col in 0..n {
        let (piv, mag) = (col..n)
            .map(|i| (i, lu[(i, col)].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty pivot range");
        if mag <= threshold || mag == 0.0 {
            return Err(Error::Singular { pivot: mag, column: col });
        }
        if piv != col {
            for j in 0..n {
                let tmp = lu[(col, j)];
                lu[(col, j)] = lu[(piv, j)];
                lu[(piv, j)] = tmp;
            }
            for j in 0..m {
                let tmp = x[(col, j)];
                x[(col, j)] = x[(piv, j)];
                x[(piv, j)] = tmp;
            }
        }
        let d = lu[(col, col)];
        for i in col + 1..n {
            let factor = lu[(i, col)] / d;
            if factor == ZERO {
                continue;
            }
            lu[(i, col)] = ZERO;
            for j in col + 1..n {
                let u = lu[(col, j)];
                lu[(i, j)] -= factor * u;
            }
            for j in 0..m {
                let u = x[(col, j)];
                x[(i, j)] -= factor * u;
            }
        }
    }

    for col in (0..n).rev() {
        let d = lu[(col, col)];
        for j in 0..m {
            let mut s = x[(col, j)];
            for k in col + 1..n {
                s -= lu[(col, k)] * x[(k, j)];
            }
            x[(col, j)] = s / d;
        }
    }
    Ok(x)
}

pub fn inverse(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    solve(a, &ComplexMatrix::identity(a.rows()))
}
