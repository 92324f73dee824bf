use super::{r, ComplexMatrix};

/// Degree of the Taylor polynomial applied after scaling.
const TAYLOR_DEGREE: usize = 18;
/// Scaled one-norm bound; the truncation error is below 0.5^19/19! ~ 2e-23.
const SCALED_NORM: f64 = 0.5;

/// `exp(tA)` by scaling and squaring around a fixed-degree Taylor polynomial.
///
/// The squaring depth `s` is the smallest integer with `||tA||_1 / 2^s <= 0.5`.
pub fn mat_exp(a: &ComplexMatrix, t: f64) -> ComplexMatrix {
    assert!(a.is_square(), "mat_exp needs a square matrix");
    let n = a.rows();
    let scaled = a.scale_real(t);
    let norm = scaled.norm1();
    let squarings = if norm > SCALED_NORM { (norm / SCALED_NORM).log2().ceil() as i32 } else { 0 };
    let x = scaled.scale_real(0.5f64.powi(squarings));

    // Horner: I + X(I + X/2(I + X/3(...)))
    let id = ComplexMatrix::identity(n);
    let mut acc = id.clone();
    for k in (1..=TAYLOR_DEGREE).rev() {
        acc = &id + &(&x * &acc).scale(r(1.0 / k as f64));
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    acc
}
