//! Acceptance criteria. Each test prints one PASS/FAIL line to stderr
//! (written directly, so it shows even when the harness captures output)
//! and then asserts.

use std::f64::consts::PI;
use std::io::Write;
use std::time::{Duration, Instant};

use miso_lab::dirichlet::{
    affine_extrapolation_residual, dirichlet_energy, douglas_energy, estimate_w1, estimate_w2, gram,
    local_dirichlet_phi, multiplication_formula_residual, mz_defect_form, phi_times_norm_exact, VecPoly,
    PHI_MAX_DEGREE, W2,
};
use miso_lab::experiments::{shift_lsds_norm, Piece};
use miso_lab::isometry::{
    beta_recursion_residual, binom_sum_sweep, classify, shifted_defect_residual, sum_of_defects_residual, Verdict,
};
use miso_lab::measures::{Atom, OperatorMeasure};
use miso_lab::numerics::{c, cholesky, herm_eig, mat_exp, norm_sqr, solve, ComplexMatrix, I};
use miso_lab::random;
use miso_lab::semigroup::{
    alpha_recursion_residual, beta_alpha_bridge_residual, cayley_cogenerator, dissipativity_w, growth_polynomial,
    is_m_skew_symmetric, laplace_horizon, resolvent_quadrature, SIMPSON_PER_UNIT, T_GRID,
};
use miso_lab::Exec;
use rand::Rng;

fn report(n: u32, title: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "acceptance criterion {n:>2} [{verdict}] {title}: {detail}");
}

fn nilpotent() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]])
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

fn shipped_measures() -> Vec<(&'static str, OperatorMeasure)> {
    let x = [c(1.0, 0.5), c(-0.3, 0.0)];
    vec![
        ("2pi delta(-1)", OperatorMeasure::point_mass_2pi(1.0, 1)),
        ("2pi delta(i)", OperatorMeasure::point_mass_2pi(0.5, 1)),
        ("lebesgue", OperatorMeasure::lebesgue(1)),
        ("fejer |1-z|", OperatorMeasure::fejer_abs_one_minus_z(8, 1)),
        ("rank-one atom on C^2", OperatorMeasure::atom(2.0 / 3.0, ComplexMatrix::outer(&x, &x)).unwrap()),
    ]
}

#[test]
fn criterion_01_exact_combinatorics() {
    let start = Instant::now();
    let failures = binom_sum_sweep(30, 10);
    let elapsed = start.elapsed();
    let pass = failures.is_empty() && elapsed < Duration::from_secs(1);
    report(
        1,
        "binomial sum lemma, exhaustive big-integer sweep",
        pass,
        &format!("{} failures over 0<=i<=N<=30, 1<=m<=10 in {elapsed:.2?}", failures.len()),
    );
    assert!(pass, "failures {failures:?}, elapsed {elapsed:?}");
}

#[test]
fn criterion_02_algebraic_identities() {
    let start = Instant::now();
    let residuals = Exec::Parallel.map_range(200, |i| {
        let mut rng = random::rng(1000 + i as u64);
        let n = 1 + i % 16;
        let m = i % 7;
        let t = random::matrix(&mut rng, n, 1.0 / (n as f64).sqrt());
        let a = random::matrix(&mut rng, n, 0.5 / (n as f64).sqrt());
        [
            beta_recursion_residual(&t, m),
            sum_of_defects_residual(&t, m),
            alpha_recursion_residual(&a, m),
            shifted_defect_residual(&t, m.max(1), i % 5),
            beta_alpha_bridge_residual(&a, m).expect("A - I invertible for small A"),
        ]
    });
    let names = ["beta recursion", "sum of defects", "alpha recursion", "shifted defect", "beta/alpha bridge"];
    let worst: Vec<f64> = (0..5).map(|k| max_of(residuals.iter().map(|r| r[k]))).collect();
    let elapsed = start.elapsed();
    let pass = worst.iter().all(|&w| w <= 1e-9) && elapsed < Duration::from_secs(10);
    let detail = names.iter().zip(&worst).map(|(n, w)| format!("{n} {w:.1e}")).collect::<Vec<_>>().join(", ");
    report(2, "algebraic identities on 200 random matrices", pass, &format!("{detail}; {elapsed:.2?}"));
    assert!(pass);
}

#[test]
fn criterion_03_generator_cogenerator_equivalence() {
    let mut mismatches = Vec::new();
    let mut hits = [0usize; 3];
    for i in 0..50 {
        let mut rng = random::rng(3000 + i);
        let n = 2 + (i as usize) % 5;
        let a = match i % 3 {
            0 => random::skew_adjoint(&mut rng, n),
            1 => random::three_skew(&mut rng, n),
            _ => random::matrix(&mut rng, n, 1.0 / (n as f64).sqrt()),
        };
        let t = cayley_cogenerator(&a).expect("A - I invertible");
        for m in 1..=3 {
            let gen = is_m_skew_symmetric(&a, m, 1e-8).holds;
            let cogen = classify(&t, m, 1e-8).verdict == Verdict::MIsometric;
            if gen {
                hits[m - 1] += 1;
            }
            if gen != cogen {
                mismatches.push((i, m));
            }
        }
    }

    // The nilpotent witness: exp(tA) = I + tA, 3-isometric but not 1-isometric.
    let a = nilpotent();
    let mut orbit_err: f64 = 0.0;
    let mut classes_ok = true;
    let mut rng = random::rng(3100);
    let x = random::vector(&mut rng, 2);
    let poly = growth_polynomial(&a, &x, 3).unwrap();
    for k in 0..=50 {
        let t = 0.1 * k as f64;
        let orbit = mat_exp(&a, t);
        let exact = &ComplexMatrix::identity(2) + &a.scale_real(t);
        orbit_err = orbit_err.max(orbit.dist(&exact));
        // Orbit norm from the closed form of (I + tA)x, against the polynomial.
        let y = [x[0] + x[1] * t, x[1]];
        orbit_err = orbit_err.max((norm_sqr(&y) - poly.eval(t)).abs());
        if t > 0.0 {
            classes_ok &= classify(&orbit, 3, 1e-8).verdict == Verdict::MIsometric;
            classes_ok &= classify(&orbit, 1, 1e-8).verdict != Verdict::MIsometric;
        }
    }
    let pass = mismatches.is_empty() && orbit_err <= 1e-10 && classes_ok;
    report(
        3,
        "generator/cogenerator equivalence and nilpotent witness",
        pass,
        &format!(
            "{} mismatches (skew-symmetric counts m=1,2,3: {hits:?}); witness orbit error {orbit_err:.1e}, 3-isometric not 1-isometric: {classes_ok}",
            mismatches.len()
        ),
    );
    assert!(pass, "mismatches {mismatches:?}");
}

#[test]
fn criterion_04_polynomial_growth() {
    let mut generators = vec![("nilpotent".to_string(), nilpotent(), 3)];
    for n in [2, 4, 8] {
        let mut rng = random::rng(4000 + n as u64);
        generators.push((format!("skew-adjoint {n}"), random::skew_adjoint(&mut rng, n), 1));
        generators.push((format!("three-skew {n}"), random::three_skew(&mut rng, n), 3));
    }
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for (name, a, m) in &generators {
        assert!(is_m_skew_symmetric(a, *m, 1e-10).holds, "{name} should be {m}-skew-symmetric");
        let mut rng = random::rng(4100);
        let mut local: f64 = 0.0;
        for _ in 0..20 {
            let x = random::vector(&mut rng, a.rows());
            let poly = growth_polynomial(a, &x, *m).unwrap();
            for &t in &T_GRID {
                let orbit = norm_sqr(&mat_exp(a, t).mul_vec(&x));
                let bound = (1.0 + t).powi(*m as i32 - 1) * norm_sqr(&x);
                local = local.max((orbit - poly.eval(t)).abs() / bound);
            }
        }
        details.push(format!("{name} {local:.1e}"));
        worst = worst.max(local);
    }
    let pass = worst <= 1e-7;
    report(4, "polynomial growth of m-isometric orbits", pass, &details.join(", "));
    assert!(pass);
}

#[test]
fn criterion_05_resolvent_identity() {
    let mut rng = random::rng(5000);
    let cases = [
        ("zero", ComplexMatrix::zeros(3, 3)),
        ("nilpotent", nilpotent()),
        ("minus identity", ComplexMatrix::identity(2).scale_real(-1.0)),
        ("random dissipative", random::dissipative(&mut rng, 4)),
    ];
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    for (name, a) in &cases {
        let w = dissipativity_w(a);
        for gap in [0.5, 1.0, 2.0] {
            let lambda = w + gap;
            let horizon = laplace_horizon(w, lambda);
            let steps = (SIMPSON_PER_UNIT as f64 * horizon * a.op_norm().max(1.0)).ceil() as usize;
            let q = resolvent_quadrature(a, lambda, horizon, steps).unwrap();
            let shifted = &ComplexMatrix::identity(a.rows()).scale_real(lambda) - a;
            let direct = solve(&shifted, &ComplexMatrix::identity(a.rows())).unwrap();
            let rel = q.dist(&direct) / direct.op_norm();
            worst = worst.max(rel);
        }
        details.push(format!("{name} ok"));
    }
    let pass = worst <= 1e-6;
    report(
        5,
        "Laplace transform of the semigroup equals the resolvent",
        pass,
        &format!("worst relative error {worst:.1e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_06_model_two_isometry() {
    let mut worst: f64 = 0.0;
    for (_, mu) in shipped_measures() {
        for n in 0..=12 {
            worst = worst.max(mz_defect_form(&mu, n, 2).matrix.max_abs());
        }
    }
    let pass = worst <= 1e-10;
    report(
        6,
        "M_z is a 2-isometry on every shipped model space",
        pass,
        &format!("max |beta_2 entry| {worst:.1e} for N <= 12"),
    );
    assert!(pass);
}

#[test]
fn criterion_07_dirichlet_energy_oracles() {
    let mut worst: f64 = 0.0;
    for seed in 0..40u64 {
        let mut rng = random::rng(7000 + seed);
        let dim = 1 + (seed % 2) as usize;
        let atoms = (0..1 + seed % 4)
            .map(|_| {
                let b = random::matrix(&mut rng, dim, 1.0);
                Atom::new(rng.gen_range(-1.0..1.0), &b * &b.adjoint())
            })
            .collect();
        let mu = OperatorMeasure::new(dim, atoms, Vec::new()).unwrap();
        let degree = (seed % 11) as usize;
        let f = VecPoly::new(dim, (0..=degree).map(|_| random::vector(&mut rng, dim)).collect());
        let series = dirichlet_energy(&mu, &f).unwrap();
        let douglas = douglas_energy(&mu, &f).unwrap();
        worst = worst.max((series - douglas).abs() / (1.0 + series.abs()));
    }
    let pass = worst <= 1e-10;
    report(
        7,
        "series and Douglas paths to the Dirichlet energy agree",
        pass,
        &format!("worst relative gap {worst:.1e} over 40 atomic measures"),
    );
    assert!(pass);
}

#[test]
fn criterion_08_closed_forms() {
    let g = gram(&OperatorMeasure::lebesgue(1), 20);
    let monomials = max_of((0..=20).map(|k| {
        let mut p = vec![0.0; k + 1];
        p[k] = 1.0;
        (g.norm_sq(&VecPoly::real(&p)) - (1.0 + k as f64)).abs()
    }));
    let mut local: f64 = 0.0;
    for t in [0.25, 0.5, 1.0, 2.0, 4.0] {
        local = local.max((local_dirichlet_phi(t, c(-1.0, 0.0)).unwrap() - t / 2.0).abs());
        local = local.max((local_dirichlet_phi(t, I).unwrap() - t).abs());
    }
    let mut shift: f64 = 0.0;
    for t in [0.0, 0.5, 1.0, 3.0] {
        for h in [0.1, 1.0, 2.5] {
            let f = [Piece { start: 0.0, end: h, value: 1.0 }];
            shift = shift.max((shift_lsds_norm(t, &f).unwrap() - (t * h + h * h / 2.0)).abs());
            let second = shift_lsds_norm(2.0 * t, &f).unwrap() - 2.0 * shift_lsds_norm(t, &f).unwrap()
                + shift_lsds_norm(0.0, &f).unwrap();
            shift = shift.max(second.abs());
        }
    }
    let pass = monomials <= 1e-12 && local <= 1e-12 && shift <= 1e-12;
    report(
        8,
        "closed forms: ||z^k||^2 = 1 + k, D_zeta(phi_t), right shift norms",
        pass,
        &format!("monomials {monomials:.1e}, local Dirichlet {local:.1e}, right shift {shift:.1e}"),
    );
    assert!(pass);
}

#[test]
fn criterion_09_dichotomy() {
    let start = Instant::now();
    let delta = OperatorMeasure::point_mass_2pi(1.0, 1);
    let rows = Exec::Parallel.map_range(13, |n| {
        let w1 = estimate_w1(&delta, n).unwrap();
        let w2 = estimate_w2(&delta, n, 64).unwrap().value().expect("tilde measure of an atom off 1 exists");
        (w1, w2)
    });
    let w2s: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let gaps: Vec<f64> = rows.iter().map(|(a, b)| (a - b).abs()).collect();
    let starts = (w2s[0] - 0.25).abs() <= 1e-12;
    let nondecreasing = w2s.windows(2).all(|p| p[1] >= p[0] - 1e-12);
    let gap_decreasing = gaps.windows(2).all(|p| p[1] < p[0]);

    let leb = OperatorMeasure::lebesgue(1);
    let diverges = matches!(estimate_w2(&leb, 4, 64).unwrap(), W2::Diverges(_));
    let w1_4 = estimate_w1(&leb, 4).unwrap();
    let w1_16 = estimate_w1(&leb, 16).unwrap();
    let doubles = w1_16 >= 2.0 * w1_4;
    let elapsed = start.elapsed();
    let pass = starts && nondecreasing && gap_decreasing && diverges && doubles && elapsed < Duration::from_secs(30);
    report(
        9,
        "w1/w2 dichotomy for 2pi delta(-1) and Lebesgue",
        pass,
        &format!(
            "w2(0) = {:.12}, w2 nondecreasing {nondecreasing}, |w1-w2| {:.3e} -> {:.3e} decreasing {gap_decreasing}; Lebesgue w2 diverges {diverges}, w1(4) = {w1_4:.4}, w1(16) = {w1_16:.4}; {elapsed:.2?}",
            w2s[0], gaps[0], gaps[12]
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_multiplication_formula() {
    let x = [c(0.8, -0.2), c(0.4, 0.6)];
    let measures = vec![
        OperatorMeasure::point_mass_2pi(1.0, 1),
        OperatorMeasure::point_mass_2pi(0.5, 1)
            .add(&OperatorMeasure::atom(-0.25, ComplexMatrix::diag_real(&[0.7])).unwrap())
            .unwrap(),
        OperatorMeasure::atom(2.0 / 3.0, ComplexMatrix::outer(&x, &x).scale_real(2.0 * PI)).unwrap(),
    ];
    let family: [&[f64]; 4] = [&[1.0], &[0.0, 1.0], &[1.0, 1.0], &[0.0, 0.0, 1.0]];
    let times = [0.5, 1.0, 2.0, 4.0];

    let mut cases = Vec::new();
    for k in 0..measures.len() {
        for p in family {
            for t in times {
                cases.push((k, p, t));
            }
        }
    }
    let results = Exec::Parallel.map(cases, |(k, p, t)| {
        let mu = &measures[k];
        let f = VecPoly::times_vector(p, &[c(1.0, 0.0), c(-0.5, 0.25)][..mu.dim()]);
        multiplication_formula_residual(mu, &f, t, PHI_MAX_DEGREE).unwrap()
    });
    let exact = max_of(results.iter().map(|r| r.exact_residual));
    let truncated = max_of(results.iter().map(|r| r.truncated_residual));
    let converged = results.iter().filter(|r| r.truncated.converged).count();

    let mut affine: f64 = 0.0;
    let mut quasi: f64 = f64::NEG_INFINITY;
    for mu in &measures {
        let w2 = estimate_w2(mu, 12, 64).unwrap().value().unwrap();
        for p in family {
            let f = VecPoly::times_vector(p, &[c(1.0, 0.0), c(-0.5, 0.25)][..mu.dim()]);
            affine = affine.max(affine_extrapolation_residual(mu, &f).unwrap());
            let base = f.h2_norm_sq() + dirichlet_energy(mu, &f).unwrap();
            for k in 0..=16 {
                let t = 0.25 * k as f64;
                let lhs = phi_times_norm_exact(mu, &f, t).unwrap();
                quasi = quasi.max(lhs - (2.0 * w2 * t).exp() * base);
            }
        }
    }

    let exact_ok = exact <= 1e-12;
    let truncated_ok = truncated <= 1e-7;
    let affine_ok = affine <= 1e-9;
    let quasi_ok = quasi <= 1e-8;
    let pass = exact_ok && truncated_ok && affine_ok && quasi_ok;
    report(
        10,
        "multiplication formula for phi_t",
        pass,
        &format!(
            "exact path {exact:.1e} (<= 1e-12: {exact_ok}); truncated path {truncated:.1e} (<= 1e-7: {truncated_ok}, {converged}/{} runs met the 1e-8 increment before degree {PHI_MAX_DEGREE}); affine extrapolation {affine:.1e}; quasicontractivity excess {quasi:.1e}",
            results.len()
        ),
    );
    assert!(exact_ok, "exact path residual {exact}");
    assert!(affine_ok, "affine extrapolation residual {affine}");
    assert!(quasi_ok, "quasicontractivity excess {quasi}");
    assert!(truncated_ok, "truncated path residual {truncated}: the Maclaurin tail of phi_t decays like n^(-3/4)");
}

#[test]
fn generalized_eigenvalue_paths_agree_on_w_gram() {
    // Sanity link between the estimators above and an independent Cholesky path.
    let mu = OperatorMeasure::point_mass_2pi(1.0, 1);
    let g = gram(&mu, 6).matrix;
    let q = miso_lab::dirichlet::boundary_matrix(&mu, 6);
    let l = cholesky(&g).unwrap();
    let linv = solve(&l, &ComplexMatrix::identity(7)).unwrap();
    let reduced = (&(&linv * &q) * &linv.adjoint()).hermitian_part();
    let oracle = herm_eig(&reduced).unwrap().max();
    let fast = miso_lab::numerics::gen_eig_max(&q, &g).unwrap();
    assert!((oracle - fast).abs() < 1e-12);
}
