//! Positive-matrix-valued measures on the unit circle with finitely many
//! atoms and a trigonometric-polynomial density.
//!
//! Conventions: `lambda` is arc length on the circle (total mass `2 pi`), an
//! atom `(zeta, W)` has raw mass `W`, and a density `D` is taken with respect
//! to `lambda`. Hence
//!
//! ```text
//! mu_hat(n) = (1/2pi) int conj(zeta)^n dmu = sum_j W_j conj(zeta_j)^n / 2pi + D(n)
//! ```
//!
//! so Lebesgue measure (`D(0) = I`) has `mu_hat(0) = I` and total mass `2 pi I`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{c, herm_eig, ComplexMatrix, C64, ONE, ZERO};

/// Allowed deviation of an atom location from the unit circle.
pub const UNIMODULAR_TOL: f64 = 1e-14;
/// Grid used to check that the density is pointwise positive semidefinite.
pub const PSD_GRID: usize = 512;
/// Largest node count tried by [`tilde_measure`].
pub const TILDE_MAX_NODES: usize = 1 << 20;

/// `exp(i pi x)`, exact when `2x` is an integer.
pub fn unimodular(angle_over_pi: f64) -> C64 {
    let x = angle_over_pi.rem_euclid(2.0);
    let h = 2.0 * x;
    if h.fract() == 0.0 {
        return match h as u8 {
            0 => ONE,
            1 => c(0.0, 1.0),
            2 => c(-1.0, 0.0),
            _ => c(0.0, -1.0),
        };
    }
    C64::from_polar(1.0, PI * x)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub angle_over_pi: f64,
    pub zeta: C64,
    pub weight: ComplexMatrix,
}

impl Atom {
    pub fn new(angle_over_pi: f64, weight: ComplexMatrix) -> Self {
        Atom { angle_over_pi, zeta: unimodular(angle_over_pi), weight }
    }

    /// Atom at an arbitrary point; the point must be unimodular.
    pub fn at(zeta: C64, weight: ComplexMatrix) -> Result<Self> {
        if (zeta.norm() - 1.0).abs() > UNIMODULAR_TOL {
            return Err(Error::NotUnimodular { modulus: zeta.norm() });
        }
        Ok(Atom { angle_over_pi: zeta.arg() / PI, zeta, weight })
    }
}

fn min_eigenvalue(m: &ComplexMatrix) -> Result<f64> {
    Ok(herm_eig(m)?.min())
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMeasure {
    dim: usize,
    atoms: Vec<Atom>,
    /// `D(0), D(1), ..., D(K)`; negative indices follow from `D(-n) = D(n)*`.
    density: Vec<ComplexMatrix>,
}

impl OperatorMeasure {
    /// Validates and builds a measure.
    pub fn new(dim: usize, atoms: Vec<Atom>, density: Vec<ComplexMatrix>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMeasure("dimension must be positive".into()));
        }
        for (j, atom) in atoms.iter().enumerate() {
            if atom.weight.rows() != dim || atom.weight.cols() != dim {
                return Err(Error::Shape(format!("atom {j} weight is not {dim}x{dim}")));
            }
            if (atom.zeta.norm() - 1.0).abs() > UNIMODULAR_TOL {
                return Err(Error::NotUnimodular { modulus: atom.zeta.norm() });
            }
            if !atom.weight.is_hermitian() {
                return Err(Error::InvalidMeasure(format!("atom {j} weight is not Hermitian")));
            }
            let lo = min_eigenvalue(&atom.weight)?;
            if lo < -1e-12 * atom.weight.op_norm().max(f64::MIN_POSITIVE) {
                return Err(Error::InvalidMeasure(format!("atom {j} weight is not PSD (min eigenvalue {lo:.3e})")));
            }
        }
        for (n, d) in density.iter().enumerate() {
            if d.rows() != dim || d.cols() != dim {
                return Err(Error::Shape(format!("density coefficient {n} is not {dim}x{dim}")));
            }
        }
        if let Some(d0) = density.first() {
            if !d0.is_hermitian() {
                return Err(Error::InvalidMeasure("density coefficient 0 is not Hermitian".into()));
            }
        }
        let mu = OperatorMeasure { dim, atoms, density };
        let scale = 1.0 + mu.density.iter().map(ComplexMatrix::max_abs).fold(0.0, f64::max);
        for j in 0..PSD_GRID {
            let zeta = unimodular(2.0 * j as f64 / PSD_GRID as f64);
            let lo = min_eigenvalue(&mu.density_at(zeta))?;
            if lo < -1e-10 * scale {
                return Err(Error::InvalidMeasure(format!(
                    "density is not PSD at angle {:.4} pi (min eigenvalue {lo:.3e})",
                    2.0 * j as f64 / PSD_GRID as f64
                )));
            }
        }
        Ok(mu)
    }

    pub fn zero(dim: usize) -> Self {
        OperatorMeasure { dim, atoms: Vec::new(), density: Vec::new() }
    }

    /// Arc-length measure times the identity.
    pub fn lebesgue(dim: usize) -> Self {
        OperatorMeasure { dim, atoms: Vec::new(), density: vec![ComplexMatrix::identity(dim)] }
    }

    /// Single atom of weight `W` at `exp(i pi angle_over_pi)`.
    pub fn atom(angle_over_pi: f64, weight: ComplexMatrix) -> Result<Self> {
        let dim = weight.rows();
        Self::new(dim, vec![Atom::new(angle_over_pi, weight)], Vec::new())
    }

    /// `2 pi delta_zeta I`, the point mass whose Fourier coefficients are unimodular.
    pub fn point_mass_2pi(angle_over_pi: f64, dim: usize) -> Self {
        let weight = ComplexMatrix::identity(dim).scale_real(2.0 * PI);
        OperatorMeasure { dim, atoms: vec![Atom::new(angle_over_pi, weight)], density: Vec::new() }
    }

    /// Fejer mean of order `degree` of the density `|1 - zeta|`, times the identity.
    ///
    /// The Fejer kernel is positive, so the approximation stays a
    /// nonnegative density. Its value at `zeta = 1` is positive.
    pub fn fejer_abs_one_minus_z(degree: usize, dim: usize) -> Self {
        let k = degree as f64 + 1.0;
        let density = (0..=degree)
            .map(|n| {
                let n = n as f64;
                let coeff = (1.0 - n / k) * 4.0 / (PI * (1.0 - 4.0 * n * n));
                ComplexMatrix::identity(dim).scale_real(coeff)
            })
            .collect();
        OperatorMeasure { dim, atoms: Vec::new(), density }
    }

    /// Measure with trigonometric-polynomial density `sum_n D(n) zeta^n`.
    pub fn density(dim: usize, coeffs: Vec<ComplexMatrix>) -> Result<Self> {
        Self::new(dim, Vec::new(), coeffs)
    }

    /// Sum of two measures on the same space.
    pub fn add(&self, other: &OperatorMeasure) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::Shape(format!("cannot add measures on C^{} and C^{}", self.dim, other.dim)));
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        let len = self.density.len().max(other.density.len());
        let density = (0..len)
            .map(|n| {
                let mut d = ComplexMatrix::zeros(self.dim, self.dim);
                if let Some(a) = self.density.get(n) {
                    d += a;
                }
                if let Some(b) = other.density.get(n) {
                    d += b;
                }
                d
            })
            .collect();
        Ok(OperatorMeasure { dim: self.dim, atoms, density })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    /// `D(0..=K)`.
    pub fn density_coefficients(&self) -> &[ComplexMatrix] {
        &self.density
    }

    /// Degree `K` of the density, `None` when there is no density part.
    pub fn density_degree(&self) -> Option<usize> {
        self.density.len().checked_sub(1)
    }

    pub fn is_atomic(&self) -> bool {
        self.density.iter().all(|d| d.max_abs() == 0.0)
    }

    /// Density value `sum_{|n| <= K} D(n) zeta^n` at a unimodular point.
    pub fn density_at(&self, zeta: C64) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        let mut power = ONE;
        for (n, d) in self.density.iter().enumerate() {
            if n == 0 {
                acc += d;
            } else {
                power *= zeta;
                let term = d.scale(power);
                acc += &term;
                acc += &term.adjoint();
            }
        }
        acc
    }

    /// `mu_hat(n)`, exact; negative indices are adjoints of positive ones.
    pub fn fourier(&self, n: i64) -> ComplexMatrix {
        if n < 0 {
            return self.fourier(-n).adjoint();
        }
        let mut acc = match self.density.get(n as usize) {
            Some(d) => d.clone(),
            None => ComplexMatrix::zeros(self.dim, self.dim),
        };
        for atom in &self.atoms {
            let phase = atom.zeta.conj().powi(n as i32) / (2.0 * PI);
            acc += &atom.weight.scale(phase);
        }
        acc
    }

    /// `mu(T) = 2 pi mu_hat(0)`.
    pub fn total_mass(&self) -> ComplexMatrix {
        self.fourier(0).scale_real(2.0 * PI)
    }

    /// Poisson extension at an interior point: closed-form kernel on the
    /// atoms and the (finite) character series on the density.
    pub fn poisson(&self, z: C64) -> Result<ComplexMatrix> {
        if z.norm() > 1.0 - 1e-9 {
            return Err(Error::BoundaryEvaluation { modulus: z.norm() });
        }
        let mut acc = ComplexMatrix::zeros(self.dim, self.dim);
        let mut power = ONE;
        for (n, d) in self.density.iter().enumerate() {
            if n == 0 {
                acc += d;
            } else {
                power *= z;
                let term = d.scale(power);
                acc += &term;
                acc += &term.adjoint();
            }
        }
        let lift = 1.0 - z.norm_sqr();
        for atom in &self.atoms {
            let kernel = lift / (atom.zeta - z).norm_sqr() / (2.0 * PI);
            acc += &atom.weight.scale_real(kernel);
        }
        Ok(acc)
    }

    /// Partial character series `sum_{|n| <= terms} mu_hat(n) r^|n| e^{i n theta}`.
    pub fn poisson_series(&self, z: C64, terms: usize) -> ComplexMatrix {
        let mut acc = self.fourier(0);
        let mut power = ONE;
        for n in 1..=terms {
            power *= z;
            let term = self.fourier(n as i64).scale(power);
            acc += &term;
            acc += &term.adjoint();
        }
        acc
    }

    /// The scalar measure `E -> <mu(E) x, y>`.
    pub fn scalarize(&self, x: &[C64], y: &[C64]) -> Result<ScalarMeasure> {
        if x.len() != self.dim || y.len() != self.dim {
            return Err(Error::Shape(format!(
                "scalarization vectors have lengths {} and {}, measure acts on C^{}",
                x.len(),
                y.len(),
                self.dim
            )));
        }
        let atoms = self.atoms.iter().map(|a| (a.zeta, a.weight.form(x, y))).collect();
        let k = self.density.len() as i64 - 1;
        let density = (-k..=k)
            .map(|n| {
                let d = if n >= 0 { self.density[n as usize].clone() } else { self.density[(-n) as usize].adjoint() };
                (n, d.form(x, y))
            })
            .collect();
        Ok(ScalarMeasure { atoms, density })
    }

    /// JSON description of this measure.
    pub fn to_spec(&self) -> MeasureSpec {
        let atoms = self
            .atoms
            .iter()
            .map(|a| AtomSpec {
                angle_over_pi: Angle::Number(a.angle_over_pi),
                weight_real: Entries::from_matrix(&a.weight, |z| z.re),
                weight_imag: Some(Entries::from_matrix(&a.weight, |z| z.im)),
            })
            .collect();
        let density = self
            .density
            .iter()
            .enumerate()
            .map(|(n, d)| DensitySpec {
                n: n as i64,
                coeff_real: Entries::from_matrix(d, |z| z.re),
                coeff_imag: Some(Entries::from_matrix(d, |z| z.im)),
            })
            .collect();
        MeasureSpec { dim: self.dim, atoms, density }
    }

    pub fn from_spec(spec: &MeasureSpec) -> Result<Self> {
        let dim = spec.dim;
        let atoms = spec
            .atoms
            .iter()
            .map(|a| {
                let weight = assemble(dim, &a.weight_real, a.weight_imag.as_ref())?;
                Ok(Atom::new(a.angle_over_pi.value()?, weight))
            })
            .collect::<Result<Vec<_>>>()?;
        let degree = spec.density.iter().map(|d| d.n.unsigned_abs() as usize).max();
        let mut density: Vec<Option<ComplexMatrix>> = vec![None; degree.map_or(0, |k| k + 1)];
        for d in &spec.density {
            let coeff = assemble(dim, &d.coeff_real, d.coeff_imag.as_ref())?;
            let (slot, coeff) = if d.n >= 0 { (d.n as usize, coeff) } else { ((-d.n) as usize, coeff.adjoint()) };
            match &density[slot] {
                Some(existing) if existing.dist(&coeff) > 1e-12 * existing.scale_factor() => {
                    return Err(Error::InvalidMeasure(format!(
                        "density coefficients for n = {slot} and n = -{slot} are not adjoint"
                    )));
                }
                _ => density[slot] = Some(coeff),
            }
        }
        let density = density.into_iter().map(|d| d.unwrap_or_else(|| ComplexMatrix::zeros(dim, dim))).collect();
        Self::new(dim, atoms, density)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: MeasureSpec =
            serde_json::from_str(text).map_err(|e| Error::InvalidMeasure(format!("malformed measure JSON: {e}")))?;
        Self::from_spec(&spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("measure spec serializes")
    }
}

/// JSON form `{dim, atoms: [...], density: [...]}`.
///
/// Weights and coefficients are either a number (a multiple of the
/// identity) or a row-major nested array. Angles are numbers or `"p/q"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub dim: usize,
    #[serde(default)]
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub density: Vec<DensitySpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtomSpec {
    pub angle_over_pi: Angle,
    pub weight_real: Entries,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_imag: Option<Entries>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensitySpec {
    pub n: i64,
    pub coeff_real: Entries,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeff_imag: Option<Entries>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Angle {
    Number(f64),
    Ratio(String),
}

impl Angle {
    pub fn value(&self) -> Result<f64> {
        match self {
            Angle::Number(x) if x.is_finite() => Ok(*x),
            Angle::Number(x) => Err(Error::InvalidMeasure(format!("angle {x} is not finite"))),
            Angle::Ratio(s) => {
                let bad = || Error::InvalidMeasure(format!("angle {s:?} is not of the form p/q"));
                let (p, q) = s.split_once('/').ok_or_else(bad)?;
                let p: i64 = p.trim().parse().map_err(|_| bad())?;
                let q: i64 = q.trim().parse().map_err(|_| bad())?;
                if q == 0 {
                    return Err(bad());
                }
                Ok(p as f64 / q as f64)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entries {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

impl Entries {
    fn from_matrix(m: &ComplexMatrix, part: impl Fn(C64) -> f64) -> Self {
        if m.rows() == 1 {
            return Entries::Scalar(part(m[(0, 0)]));
        }
        Entries::Matrix((0..m.rows()).map(|i| m.row(i).iter().map(|&z| part(z)).collect()).collect())
    }

    fn to_matrix(&self, dim: usize) -> Result<ComplexMatrix> {
        match self {
            Entries::Scalar(s) => Ok(ComplexMatrix::identity(dim).scale_real(*s)),
            Entries::Matrix(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::Shape(format!("expected a {dim}x{dim} array")));
                }
                Ok(ComplexMatrix::from_fn(dim, dim, |i, j| c(rows[i][j], 0.0)))
            }
        }
    }
}

fn assemble(dim: usize, re: &Entries, im: Option<&Entries>) -> Result<ComplexMatrix> {
    let mut m = re.to_matrix(dim)?;
    if let Some(im) = im {
        m += &im.to_matrix(dim)?.scale(c(0.0, 1.0));
    }
    Ok(m)
}

/// `mu_{x,y}`: complex atom masses and density coefficients for `-K..=K`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarMeasure {
    pub atoms: Vec<(C64, C64)>,
    pub density: Vec<(i64, C64)>,
}

impl ScalarMeasure {
    pub fn density_at(&self, zeta: C64) -> C64 {
        self.density.iter().map(|&(n, d)| d * zeta.powi(n as i32)).sum()
    }

    pub fn total_mass(&self) -> C64 {
        let atoms: C64 = self.atoms.iter().map(|a| a.1).sum();
        let d0 = self.density.iter().find(|d| d.0 == 0).map_or(ZERO, |d| d.1);
        atoms + d0 * (2.0 * PI)
    }

    /// `|mu_{x,y}|(T)`; the density part uses a `nodes`-point trapezoid rule.
    pub fn total_variation(&self, nodes: usize) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.1.norm()).sum();
        if self.density.is_empty() {
            return atoms;
        }
        let mean = (0..nodes).map(|j| self.density_at(unimodular(2.0 * j as f64 / nodes as f64)).norm()).sum::<f64>()
            / nodes as f64;
        atoms + 2.0 * PI * mean
    }
}

/// Outcome of [`tilde_measure`].
#[derive(Clone, Debug, PartialEq)]
pub enum Tilde {
    Measure(OperatorMeasure),
    Diverges(String),
}

impl Tilde {
    pub fn measure(&self) -> Option<&OperatorMeasure> {
        match self {
            Tilde::Measure(m) => Some(m),
            Tilde::Diverges(_) => None,
        }
    }
}

/// The measure `E -> (1/2pi) int_E dmu(zeta) / |1 - zeta|^2`.
///
/// Atoms transform in closed form. The density part is sampled on offset
/// trapezoid nodes `2 pi (j + 1/2) / Q`, which never hit `zeta = 1`, and `Q`
/// is doubled starting from `quad_points`. The proxy `(1/Q) sum tr D/|1-zeta|^2`
/// grows linearly in `Q` when `D(1) != 0` and is constant once `Q` exceeds
/// the degree when `D` vanishes at 1. Sustained growth by a factor `>= 1.5`
/// over three doublings means divergence; a relative change below `1e-10`
/// means convergence. Reaching [`TILDE_MAX_NODES`] undecided also counts as
/// divergence.
pub fn tilde_measure(mu: &OperatorMeasure, quad_points: usize) -> Tilde {
    let dim = mu.dim();
    let mut atoms = Vec::new();
    for atom in mu.atoms() {
        let gap = (ONE - atom.zeta).norm_sqr();
        if gap <= UNIMODULAR_TOL * UNIMODULAR_TOL {
            if atom.weight.max_abs() > 0.0 {
                return Tilde::Diverges("atom at zeta = 1".into());
            }
            continue;
        }
        atoms.push(Atom { weight: atom.weight.scale_real(1.0 / (2.0 * PI * gap)), ..atom.clone() });
    }
    if mu.is_atomic() {
        return Tilde::Measure(OperatorMeasure { dim, atoms, density: Vec::new() });
    }
    let k = mu.density_degree().unwrap_or(0);
    let mut q = quad_points.max(2 * k + 2).next_power_of_two();
    let proxy = |q: usize| -> f64 {
        (0..q)
            .map(|j| {
                let zeta = unimodular(2.0 * (j as f64 + 0.5) / q as f64);
                mu.density_at(zeta).trace().re / (ONE - zeta).norm_sqr()
            })
            .sum::<f64>()
            / q as f64
    };
    let mut previous = proxy(q);
    let mut growth_streak = 0;
    loop {
        if q >= TILDE_MAX_NODES {
            return Tilde::Diverges(format!("no convergence with {q} nodes"));
        }
        q *= 2;
        let current = proxy(q);
        if (current - previous).abs() <= 1e-10 * current.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if current >= 1.5 * previous && previous > 0.0 {
            growth_streak += 1;
            if growth_streak >= 3 {
                return Tilde::Diverges(format!(
                    "quadrature of 1/|1 - zeta|^2 against the density grows without bound ({current:.3e} at {q} nodes)"
                ));
            }
        } else {
            growth_streak = 0;
        }
        previous = current;
    }
    let samples: Vec<(C64, ComplexMatrix)> = (0..q)
        .map(|j| {
            let zeta = unimodular(2.0 * (j as f64 + 0.5) / q as f64);
            (zeta, mu.density_at(zeta).scale_real(1.0 / (2.0 * PI * (ONE - zeta).norm_sqr())))
        })
        .collect();
    let density = (0..=k)
        .map(|n| {
            let mut acc = ComplexMatrix::zeros(dim, dim);
            for (zeta, value) in &samples {
                acc += &value.scale(zeta.conj().powi(n as i32));
            }
            acc.scale_real(1.0 / q as f64)
        })
        .collect::<Vec<_>>();
    let mut density = density;
    density[0] = density[0].hermitian_part();
    Tilde::Measure(OperatorMeasure { dim, atoms, density })
}
