//! Expansion bases and their evaluation.
//!
//! Laplace: `u = Re[Σ a_j/(z − z_j) + Σ_{j=0}^{N₂} b_j (z − c)^j]` with real
//! unknowns `(Re a_j, −Im a_j)` per pole and `(Re b_j, −Im b_j)` per monomial,
//! except that `b₀` is real. The column pair for a term `t(z)` is
//! `(Re t, Im t)`, so `Re(a·t) = Re a·Re t − Im a·Im t`.
//!
//! Helmholtz: per charge a monopole `H₀(k|z − z_j|)` and a dipole
//! `H₁(k|z − z_j|)·(z − z_j)/|z − z_j|`, then multipoles
//! `H_|m|(k|z − c|)·((z − c)/|z − c|)^m` for `m = −N₂..=N₂`, all with complex
//! coefficients.

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::Point;
use crate::lstsq::DenseMatrix;
use crate::placement::{PoleSet, SampleSet};
use crate::specfun::{hankel01_unchecked, hankel_sequence_unchecked, SpecfunError, MAX_ORDER};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BasisError {
    #[error("point {0} coincides with a singularity")]
    PointOnSingularity(Point),
    #[error("point {0} coincides with the expansion center")]
    PointAtCenter(Point),
    #[error("expected a {expected} basis")]
    WrongKind { expected: &'static str },
    #[error("coefficient vector has length {got}, basis has {expected} unknowns")]
    CoefficientLength { expected: usize, got: usize },
    #[error("wavenumber must be positive and finite, got {0}")]
    InvalidWavenumber(f64),
    #[error("multipole order {0} exceeds the supported maximum")]
    OrderTooLarge(usize),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BasisKind {
    Laplace,
    Helmholtz { wavenumber: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    pub kind: BasisKind,
    pub poles: PoleSet,
    /// Polynomial degree `N₂` (Laplace) or largest multipole order (Helmholtz).
    pub degree: usize,
    /// Expansion point of the smooth part.
    pub center: Point,
}

impl BasisSpec {
    pub fn laplace(poles: PoleSet, degree: usize, center: Point) -> Self {
        Self {
            kind: BasisKind::Laplace,
            poles,
            degree,
            center,
        }
    }

    pub fn helmholtz(
        poles: PoleSet,
        max_order: usize,
        center: Point,
        wavenumber: f64,
    ) -> Result<Self, BasisError> {
        if !(wavenumber.is_finite() && wavenumber > 0.0) {
            return Err(BasisError::InvalidWavenumber(wavenumber));
        }
        if max_order > MAX_ORDER as usize {
            return Err(BasisError::OrderTooLarge(max_order));
        }
        Ok(Self {
            kind: BasisKind::Helmholtz { wavenumber },
            poles,
            degree: max_order,
            center,
        })
    }

    /// Number of unknowns, `2N₁ + 2N₂ + 1`: real for Laplace, complex for
    /// Helmholtz.
    pub fn dof(&self) -> usize {
        2 * self.poles.len() + 2 * self.degree + 1
    }

    pub fn wavenumber(&self) -> Option<f64> {
        match self.kind {
            BasisKind::Helmholtz { wavenumber } => Some(wavenumber),
            BasisKind::Laplace => None,
        }
    }

    pub fn translated(&self, offset: Point) -> BasisSpec {
        BasisSpec {
            poles: self.poles.translated(offset),
            center: self.center + offset,
            ..self.clone()
        }
    }
}

/// Sup-norm boundary residual measured on an independent grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorCertificate {
    pub boundary_sup_residual: f64,
    pub validation_point_count: usize,
    pub fit_point_count: usize,
    /// True when the maximum principle turns the boundary residual into an
    /// interior error bound.
    pub interior_bound: bool,
}

impl ErrorCertificate {
    pub fn statement(&self) -> String {
        if self.interior_bound {
            format!(
                "max |u - h| over {} boundary points is {:.3e}; by the maximum principle this bounds the error at every interior point",
                self.validation_point_count, self.boundary_sup_residual
            )
        } else {
            format!(
                "max |u_scattered + u_incident| over {} boundary points is {:.3e}; boundary residual only, no interior bound is implied",
                self.validation_point_count, self.boundary_sup_residual
            )
        }
    }

    pub fn uncertified() -> Self {
        Self {
            boundary_sup_residual: f64::INFINITY,
            validation_point_count: 0,
            fit_point_count: 0,
            interior_bound: false,
        }
    }
}

impl fmt::Display for ErrorCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.statement())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coefficients {
    Real(Vec<f64>),
    Complex(Vec<Complex64>),
}

impl Coefficients {
    pub fn len(&self) -> usize {
        match self {
            Coefficients::Real(v) => v.len(),
            Coefficients::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A fitted expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub spec: BasisSpec,
    pub coefficients: Coefficients,
    pub certificate: ErrorCertificate,
}

impl Solution {
    pub fn new(
        spec: BasisSpec,
        coefficients: Coefficients,
        certificate: ErrorCertificate,
    ) -> Result<Self, BasisError> {
        let expected = spec.dof();
        let ok_kind = matches!(
            (&spec.kind, &coefficients),
            (BasisKind::Laplace, Coefficients::Real(_))
                | (BasisKind::Helmholtz { .. }, Coefficients::Complex(_))
        );
        if !ok_kind {
            return Err(BasisError::WrongKind {
                expected: match spec.kind {
                    BasisKind::Laplace => "real (Laplace)",
                    BasisKind::Helmholtz { .. } => "complex (Helmholtz)",
                },
            });
        }
        if coefficients.len() != expected {
            return Err(BasisError::CoefficientLength {
                expected,
                got: coefficients.len(),
            });
        }
        Ok(Self {
            spec,
            coefficients,
            certificate,
        })
    }

    pub fn dof(&self) -> usize {
        self.spec.dof()
    }
}

/// Complex Laplace coefficients rebuilt from the real unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplaceExpansion {
    pub poles: Vec<Complex64>,
    pub residues: Vec<Complex64>,
    pub center: Complex64,
    pub polynomial: Vec<Complex64>,
}

impl LaplaceExpansion {
    pub fn from_real(spec: &BasisSpec, c: &[f64]) -> Self {
        let n1 = spec.poles.len();
        let residues = (0..n1)
            .map(|j| Complex64::new(c[2 * j], -c[2 * j + 1]))
            .collect();
        let off = 2 * n1;
        let mut polynomial = vec![Complex64::new(c[off], 0.0)];
        for j in 1..=spec.degree {
            polynomial.push(Complex64::new(c[off + 2 * j - 1], -c[off + 2 * j]));
        }
        Self {
            poles: spec.poles.poles.iter().map(|p| p.z()).collect(),
            residues,
            center: spec.center.z(),
            polynomial,
        }
    }

    /// `r(z)`; `u = Re r(z)`.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut sum = Complex64::new(0.0, 0.0);
        for (&p, &a) in self.poles.iter().zip(&self.residues) {
            sum += a / (z - p);
        }
        let w = z - self.center;
        let mut poly = Complex64::new(0.0, 0.0);
        for &b in self.polynomial.iter().rev() {
            poly = poly * w + b;
        }
        sum + poly
    }
}

fn check_clear(p: Point, spec: &BasisSpec) -> Result<(), BasisError> {
    if spec.poles.poles.contains(&p) {
        return Err(BasisError::PointOnSingularity(p));
    }
    Ok(())
}

/// Real design matrix for the Laplace expansion, rows scaled by the sample
/// weights.
pub fn laplace_matrix(samples: &SampleSet, spec: &BasisSpec) -> Result<DenseMatrix<f64>, BasisError> {
    if spec.kind != BasisKind::Laplace {
        return Err(BasisError::WrongKind { expected: "Laplace" });
    }
    for &p in &samples.points {
        check_clear(p, spec)?;
    }
    let m = samples.len();
    let zs: Vec<Complex64> = samples.points.iter().map(|p| p.z()).collect();
    let mut a = DenseMatrix::zeros(m, spec.dof());
    for (j, pole) in spec.poles.poles.iter().enumerate() {
        let zp = pole.z();
        for (i, &z) in zs.iter().enumerate() {
            let t = (z - zp).inv();
            a.set(i, 2 * j, t.re);
            a.set(i, 2 * j + 1, t.im);
        }
    }
    let off = 2 * spec.poles.len();
    let c = spec.center.z();
    for (i, &z) in zs.iter().enumerate() {
        let w = z - c;
        let mut power = Complex64::new(1.0, 0.0);
        a.set(i, off, 1.0);
        for j in 1..=spec.degree {
            power *= w;
            a.set(i, off + 2 * j - 1, power.re);
            a.set(i, off + 2 * j, power.im);
        }
    }
    a.scale_rows(&samples.weights);
    Ok(a)
}

pub fn eval_laplace(sol: &Solution, pts: &[Point]) -> Result<Vec<f64>, BasisError> {
    let Coefficients::Real(c) = &sol.coefficients else {
        return Err(BasisError::WrongKind { expected: "Laplace" });
    };
    if sol.spec.kind != BasisKind::Laplace {
        return Err(BasisError::WrongKind { expected: "Laplace" });
    }
    let expansion = LaplaceExpansion::from_real(&sol.spec, c);
    pts.iter()
        .map(|&p| {
            check_clear(p, &sol.spec)?;
            Ok(expansion.eval(p.z()).re)
        })
        .collect()
}

/// Unit complex number `w/|w|` and `|w|`.
fn polar(w: Complex64) -> (Complex64, f64) {
    let r = w.norm();
    (w / r, r)
}

/// Fills the Helmholtz basis values at `z` into `row`.
fn helmholtz_row(spec: &BasisSpec, k: f64, z: Complex64, row: &mut [Complex64]) -> Result<(), BasisError> {
    for (j, pole) in spec.poles.poles.iter().enumerate() {
        let w = z - pole.z();
        if w.norm() == 0.0 {
            return Err(BasisError::PointOnSingularity(Point::from(z)));
        }
        let (dir, r) = polar(w);
        let (h0, h1) = hankel01_unchecked(k * r);
        row[2 * j] = h0;
        row[2 * j + 1] = h1 * dir;
    }
    let off = 2 * spec.poles.len();
    let w = z - spec.center.z();
    if w.norm() == 0.0 {
        return Err(BasisError::PointAtCenter(Point::from(z)));
    }
    let (dir, r) = polar(w);
    let order = spec.degree;
    let h = hankel_sequence_unchecked(order, k * r);
    row[off + order] = h[0];
    let mut up = Complex64::new(1.0, 0.0);
    let down_dir = dir.conj();
    let mut down = Complex64::new(1.0, 0.0);
    for m in 1..=order {
        up *= dir;
        down *= down_dir;
        row[off + order + m] = h[m] * up;
        row[off + order - m] = h[m] * down;
    }
    Ok(())
}

fn helmholtz_k(spec: &BasisSpec) -> Result<f64, BasisError> {
    match spec.kind {
        BasisKind::Helmholtz { wavenumber } => Ok(wavenumber),
        BasisKind::Laplace => Err(BasisError::WrongKind { expected: "Helmholtz" }),
    }
}

/// Complex design matrix for the Helmholtz expansion, rows scaled by the
/// sample weights.
pub fn helmholtz_matrix(
    samples: &SampleSet,
    spec: &BasisSpec,
) -> Result<DenseMatrix<Complex64>, BasisError> {
    let k = helmholtz_k(spec)?;
    let m = samples.len();
    let n = spec.dof();
    let mut a = DenseMatrix::zeros(m, n);
    let mut row = vec![Complex64::new(0.0, 0.0); n];
    for (i, p) in samples.points.iter().enumerate() {
        helmholtz_row(spec, k, p.z(), &mut row)?;
        for (j, &v) in row.iter().enumerate() {
            a.set(i, j, v);
        }
    }
    a.scale_rows(&samples.weights);
    Ok(a)
}

/// Scattered field of a Helmholtz solution.
pub fn eval_helmholtz(sol: &Solution, pts: &[Point]) -> Result<Vec<Complex64>, BasisError> {
    let k = helmholtz_k(&sol.spec)?;
    let Coefficients::Complex(c) = &sol.coefficients else {
        return Err(BasisError::WrongKind { expected: "Helmholtz" });
    };
    let mut row = vec![Complex64::new(0.0, 0.0); c.len()];
    pts.iter()
        .map(|p| {
            helmholtz_row(&sol.spec, k, p.z(), &mut row)?;
            Ok(row.iter().zip(c).map(|(a, b)| a * b).sum())
        })
        .collect()
}

/// Incoming wave for scattering problems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IncidentField {
    /// `exp(ik(x cos θ + y sin θ))`, angle in radians.
    PlaneWave { angle: f64 },
    /// `H₀(k|z − z₀|)`
    PointSource { source: Point },
    /// No incident field.
    Zero,
}

impl IncidentField {
    pub fn plane_wave_degrees(degrees: f64) -> Self {
        IncidentField::PlaneWave {
            angle: degrees.to_radians(),
        }
    }

    pub fn eval_at(&self, k: f64, p: Point) -> Result<Complex64, BasisError> {
        match *self {
            IncidentField::PlaneWave { angle } => {
                let (s, c) = angle.sin_cos();
                let phase = k * (p.x * c + p.y * s);
                Ok(Complex64::new(phase.cos(), phase.sin()))
            }
            IncidentField::PointSource { source } => {
                let r = p.distance(source);
                if r == 0.0 {
                    return Err(BasisError::PointOnSingularity(p));
                }
                Ok(hankel01_unchecked(k * r).0)
            }
            IncidentField::Zero => Ok(Complex64::new(0.0, 0.0)),
        }
    }

    pub fn translated(&self, offset: Point) -> IncidentField {
        match *self {
            IncidentField::PointSource { source } => IncidentField::PointSource {
                source: source + offset,
            },
            other => other,
        }
    }
}

pub fn incident_field(
    kind: &IncidentField,
    k: f64,
    pts: &[Point],
) -> Result<Vec<Complex64>, BasisError> {
    if !(k.is_finite() && k > 0.0) {
        return Err(BasisError::InvalidWavenumber(k));
    }
    pts.iter().map(|&p| kind.eval_at(k, p)).collect()
}
