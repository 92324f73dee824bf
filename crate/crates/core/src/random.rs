//! Seeded generators for random test operators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::numerics::{c, range_basis, ComplexMatrix, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn complex(rng: &mut impl Rng) -> C64 {
    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn vector(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| complex(rng)).collect()
}

/// Entries uniform in the square `[-s, s] x [-s, s]i`.
pub fn matrix(rng: &mut impl Rng, n: usize, s: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| complex(rng) * s)
}

pub fn hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    matrix(rng, n, 1.0).hermitian_part()
}

/// `X - X*`, so `A* = -A`.
pub fn skew_adjoint(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let x = matrix(rng, n, 1.0);
    &x - &x.adjoint()
}

/// Orthonormalized random matrix.
pub fn unitary(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    loop {
        let q = range_basis(&matrix(rng, n, 1.0), 1e-8);
        if q.cols() == n {
            return q;
        }
    }
}

/// `i lambda I + u v*` with `v* u = 0`: the orbit norm is quadratic in `t`,
/// so the generator is 3-skew-symmetric but not 2-skew-symmetric.
pub fn three_skew(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    assert!(n >= 2, "a square-zero rank-one perturbation needs n >= 2");
    let u = vector(rng, n);
    let mut v = vector(rng, n);
    let p = crate::numerics::inner(&v, &u) / crate::numerics::norm_sqr(&u);
    for (vi, ui) in v.iter_mut().zip(&u) {
        *vi -= p * ui;
    }
    let lambda = rng.gen_range(-1.0..1.0);
    &ComplexMatrix::identity(n).scale(c(0.0, lambda)) + &ComplexMatrix::outer(&u, &v)
}

/// Skew-adjoint part plus damping plus a small general perturbation.
pub fn dissipative(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
    let s = skew_adjoint(rng, n);
    let e = matrix(rng, n, 0.2 / (n as f64).sqrt());
    &(&s + &e) - &ComplexMatrix::identity(n).scale_real(0.3)
}
