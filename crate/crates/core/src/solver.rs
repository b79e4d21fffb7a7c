//! Adaptive solvers for the Laplace Dirichlet problem on a polygon and for
//! sound-soft scattering by a polygon.
//!
//! Each refinement step `s` places `poles_per_step·s` singularities per
//! corner, grows the smooth part, fits on the boundary by least squares, and
//! measures the sup-norm residual on an independent boundary grid
//! `validation_refinement` times denser than the fit grid. The loop stops
//! when that residual reaches the tolerance or the next step would exceed
//! `max_dof` unknowns.

use std::time::Instant;

use num_complex::Complex64;
use thiserror::Error;

use crate::basis::{
    eval_helmholtz, helmholtz_matrix, laplace_matrix, BasisError, BasisSpec, Coefficients,
    ErrorCertificate, IncidentField, LaplaceExpansion, Solution,
};
use crate::exprlang::Expr;
use crate::geometry::{Location, Point, Polygon};
use crate::lstsq::{residual_sup, solve_ls, LsProblem, LstsqError};
use crate::placement::{place_poles, place_samples, ClusteringParams, PlacementError, SampleSet, Side};

/// Hard cap on refinement steps.
pub const MAX_STEPS: usize = 200;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("max_dof must be at least 1")]
    InvalidMaxDof,
    #[error("wavenumber must be positive and finite, got {0}")]
    InvalidWavenumber(f64),
    #[error("point source {0} is not outside the scatterer")]
    SourceNotOutside(Point),
    #[error("expansion center {0} is not strictly inside the polygon")]
    InvalidCenter(Point),
    #[error("validation refinement must be at least 2, got {0}")]
    InvalidRefinement(usize),
    #[error("weight exponent must be finite and nonnegative, got {0}")]
    InvalidWeightExponent(f64),
    #[error("solution and problem are of different kinds")]
    KindMismatch,
    #[error("boundary data failed at {point}: {message}")]
    BoundaryData { point: Point, message: String },
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error(transparent)]
    Basis(#[from] BasisError),
    #[error(transparent)]
    Lstsq(#[from] LstsqError),
}

/// Real boundary values `h` for the Dirichlet problem.
pub trait BoundaryData: Send + Sync {
    fn value(&self, p: Point) -> Result<f64, String>;
}

impl BoundaryData for Expr {
    fn value(&self, p: Point) -> Result<f64, String> {
        self.eval(p.x, p.y).map_err(|e| e.to_string())
    }
}

impl<F> BoundaryData for F
where
    F: Fn(Point) -> f64 + Send + Sync,
{
    fn value(&self, p: Point) -> Result<f64, String> {
        Ok(self(p))
    }
}

/// Growth of the basis with the step index `s = 1, 2, …`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    /// Singularities per corner added each step.
    pub poles_per_step: usize,
    /// Laplace polynomial degree is `⌈degree_per_step·s⌉`.
    pub degree_per_step: f64,
    /// Helmholtz multipole order is `⌈k·R⌉ + orders_per_step·s`.
    pub orders_per_step: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Self {
            poles_per_step: 3,
            degree_per_step: 2.5,
            orders_per_step: 4,
        }
    }
}

impl Schedule {
    pub fn poles_per_corner(&self, step: usize) -> usize {
        self.poles_per_step * step
    }

    pub fn laplace_degree(&self, step: usize) -> usize {
        // guard against 2.5·s landing a hair above an integer
        (self.degree_per_step * step as f64 - 1e-9).ceil().max(0.0) as usize
    }

    pub fn helmholtz_order(&self, step: usize, wavenumber: f64, radius: f64) -> usize {
        (wavenumber * radius).ceil() as usize + self.orders_per_step * step
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub sigma: f64,
    /// Clustering reach in units of the corner scale. Values above one
    /// spread the clustered singularities and samples over the whole
    /// adjacent edge, which keeps mid-edge errors from stalling convergence.
    pub reach: f64,
    pub oversample: usize,
    pub validation_refinement: usize,
    /// Fit rows are weighted by `min(1, distance to nearest corner)^e`.
    /// Zero keeps every row at full weight, so the fit targets the same
    /// unweighted sup norm the certificate reports.
    pub weight_exponent: f64,
    /// Expansion point of the smooth part; centroid (or another interior
    /// point if the centroid lies outside) when `None`.
    pub center: Option<Point>,
    pub schedule: Schedule,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            sigma: 4.0,
            reach: 2.0,
            oversample: 3,
            validation_refinement: 4,
            weight_exponent: 0.0,
            center: None,
            schedule: Schedule::default(),
        }
    }
}

impl SolverSettings {
    fn clustering(&self, per_corner_count: usize) -> ClusteringParams {
        ClusteringParams {
            sigma: self.sigma,
            per_corner_count,
            oversample_factor: self.oversample,
            reach: self.reach,
        }
    }
}

pub struct LaplaceProblem {
    pub polygon: Polygon,
    pub boundary_data: Box<dyn BoundaryData>,
    pub tolerance: f64,
    pub max_dof: usize,
    pub settings: SolverSettings,
}

impl LaplaceProblem {
    pub fn new(
        polygon: Polygon,
        boundary_data: impl BoundaryData + 'static,
        tolerance: f64,
        max_dof: usize,
    ) -> Self {
        Self {
            polygon,
            boundary_data: Box::new(boundary_data),
            tolerance,
            max_dof,
            settings: SolverSettings::default(),
        }
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }

    fn h(&self, p: Point) -> Result<f64, SolverError> {
        self.boundary_data
            .value(p)
            .map_err(|message| SolverError::BoundaryData { point: p, message })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HelmholtzProblem {
    pub scatterer: Polygon,
    pub incident: IncidentField,
    pub wavenumber: f64,
    pub tolerance: f64,
    pub max_dof: usize,
    pub settings: SolverSettings,
}

impl HelmholtzProblem {
    pub fn new(
        scatterer: Polygon,
        incident: IncidentField,
        wavenumber: f64,
        tolerance: f64,
        max_dof: usize,
    ) -> Self {
        Self {
            scatterer,
            incident,
            wavenumber,
            tolerance,
            max_dof,
            settings: SolverSettings::default(),
        }
    }

    pub fn with_settings(mut self, settings: SolverSettings) -> Self {
        self.settings = settings;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceStep {
    pub step: usize,
    pub dof: usize,
    pub fit_residual: f64,
    pub validation_residual: f64,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub steps: Vec<ConvergenceStep>,
    pub converged: bool,
    /// Certificate of the returned solution.
    pub final_certificate: ErrorCertificate,
}

impl ConvergenceReport {
    /// Least-squares slope of `log₁₀(validation residual)` against `√N`.
    pub fn sqrt_dof_slope(&self) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .steps
            .iter()
            .filter(|s| s.validation_residual > 0.0)
            .map(|s| ((s.dof as f64).sqrt(), s.validation_residual.log10()))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        Some(sxy / sxx)
    }

    pub fn final_dof(&self) -> Option<usize> {
        self.steps.last().map(|s| s.dof)
    }
}

fn check_common(tolerance: f64, max_dof: usize, settings: &SolverSettings) -> Result<(), SolverError> {
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(SolverError::InvalidTolerance(tolerance));
    }
    if max_dof == 0 {
        return Err(SolverError::InvalidMaxDof);
    }
    if settings.validation_refinement < 2 {
        return Err(SolverError::InvalidRefinement(settings.validation_refinement));
    }
    settings.clustering(0).validate()?;
    if !(settings.weight_exponent.is_finite() && settings.weight_exponent >= 0.0) {
        return Err(SolverError::InvalidWeightExponent(settings.weight_exponent));
    }
    Ok(())
}

/// A point strictly inside `polygon`: the centroid when it qualifies,
/// otherwise the middle of the widest horizontal chord through it.
pub fn interior_point(polygon: &Polygon) -> Point {
    let c = polygon.centroid();
    if polygon.locate(c) == Location::Inside {
        return c;
    }
    let (lo, hi) = polygon.bounding_box();
    let mut best = (0.0, c);
    for frac in [0.5, 0.37, 0.63, 0.21, 0.79] {
        let y = lo.y + frac * (hi.y - lo.y);
        let mut xs: Vec<f64> = (0..polygon.num_edges())
            .filter_map(|i| {
                let (a, b) = polygon.edge(i);
                if (a.y > y) != (b.y > y) {
                    Some(a.x + (y - a.y) / (b.y - a.y) * (b.x - a.x))
                } else {
                    None
                }
            })
            .collect();
        xs.sort_by(f64::total_cmp);
        for pair in xs.chunks_exact(2) {
            let width = pair[1] - pair[0];
            if width > best.0 {
                best = (width, Point::new(0.5 * (pair[0] + pair[1]), y));
            }
        }
    }
    best.1
}

fn resolve_center(polygon: &Polygon, settings: &SolverSettings) -> Result<Point, SolverError> {
    match settings.center {
        Some(c) if polygon.locate(c) == Location::Inside => Ok(c),
        Some(c) => Err(SolverError::InvalidCenter(c)),
        None => Ok(interior_point(polygon)),
    }
}

fn reweight(samples: &mut SampleSet, polygon: &Polygon, exponent: f64) {
    for (w, &p) in samples.weights.iter_mut().zip(&samples.points) {
        *w = polygon.distance_to_nearest_corner(p).min(1.0).powf(exponent);
    }
    let max = samples.weights.iter().cloned().fold(0.0, f64::max);
    for w in &mut samples.weights {
        *w /= max;
    }
}

fn weighted_rhs<T: Copy + std::ops::Mul<f64, Output = T>>(values: &[T], samples: &SampleSet) -> Vec<T> {
    values
        .iter()
        .zip(&samples.weights)
        .map(|(&v, &w)| v * w)
        .collect()
}

/// Singularities per corner used to build `spec` on `polygon`.
fn per_corner_count(spec: &BasisSpec, polygon: &Polygon) -> usize {
    (spec.poles.len() + spec.poles.discarded) / polygon.corners().len()
}

fn laplace_certificate(
    expansion: &LaplaceExpansion,
    prob: &LaplaceProblem,
    spec: &BasisSpec,
    refinement: usize,
    fit_point_count: usize,
) -> Result<ErrorCertificate, SolverError> {
    let params = prob
        .settings
        .clustering(per_corner_count(spec, &prob.polygon))
        .refined(refinement);
    let grid = place_samples(&prob.polygon, &spec.poles, spec.dof(), &params)?;
    let mut sup = 0.0_f64;
    for &p in &grid.points {
        let err = (expansion.eval(p.z()).re - prob.h(p)?).abs();
        sup = sup.max(if err.is_nan() { f64::INFINITY } else { err });
    }
    Ok(ErrorCertificate {
        boundary_sup_residual: sup,
        validation_point_count: grid.len(),
        fit_point_count,
        interior_bound: true,
    })
}

fn helmholtz_certificate(
    sol: &Solution,
    prob: &HelmholtzProblem,
    refinement: usize,
    fit_point_count: usize,
) -> Result<ErrorCertificate, SolverError> {
    let params = prob
        .settings
        .clustering(per_corner_count(&sol.spec, &prob.scatterer))
        .refined(refinement);
    let grid = place_samples(&prob.scatterer, &sol.spec.poles, sol.spec.dof(), &params)?;
    let scattered = eval_helmholtz(sol, &grid.points)?;
    let mut sup = 0.0_f64;
    for (u, &p) in scattered.iter().zip(&grid.points) {
        let total = u + prob.incident.eval_at(prob.wavenumber, p)?;
        let err = total.norm();
        sup = sup.max(if err.is_nan() { f64::INFINITY } else { err });
    }
    Ok(ErrorCertificate {
        boundary_sup_residual: sup,
        validation_point_count: grid.len(),
        fit_point_count,
        interior_bound: false,
    })
}

/// Problem a solution can be certified against.
#[derive(Clone, Copy)]
pub enum ProblemRef<'a> {
    Laplace(&'a LaplaceProblem),
    Helmholtz(&'a HelmholtzProblem),
}

impl<'a> From<&'a LaplaceProblem> for ProblemRef<'a> {
    fn from(p: &'a LaplaceProblem) -> Self {
        ProblemRef::Laplace(p)
    }
}

impl<'a> From<&'a HelmholtzProblem> for ProblemRef<'a> {
    fn from(p: &'a HelmholtzProblem) -> Self {
        ProblemRef::Helmholtz(p)
    }
}

/// Sup of the boundary residual on a grid `refinement` times denser than the
/// fit grid. For Laplace problems this bounds the interior error.
pub fn certify<'a>(
    sol: &Solution,
    prob: impl Into<ProblemRef<'a>>,
    refinement: usize,
) -> Result<ErrorCertificate, SolverError> {
    if refinement < 2 {
        return Err(SolverError::InvalidRefinement(refinement));
    }
    let fit = sol.certificate.fit_point_count;
    match (prob.into(), &sol.coefficients) {
        (ProblemRef::Laplace(p), Coefficients::Real(c)) => {
            let expansion = LaplaceExpansion::from_real(&sol.spec, c);
            laplace_certificate(&expansion, p, &sol.spec, refinement, fit)
        }
        (ProblemRef::Helmholtz(p), Coefficients::Complex(_)) => helmholtz_certificate(sol, p, refinement, fit),
        _ => Err(SolverError::KindMismatch),
    }
}

struct Best {
    solution: Solution,
    residual: f64,
}

fn keep_best(best: &mut Option<Best>, solution: Solution) {
    let residual = solution.certificate.boundary_sup_residual;
    if best.as_ref().is_none_or(|b| residual < b.residual) {
        *best = Some(Best { solution, residual });
    }
}

fn finish(best: Option<Best>, steps: Vec<ConvergenceStep>, converged: bool) -> (Solution, ConvergenceReport) {
    let best = best.expect("at least one step runs");
    let report = ConvergenceReport {
        steps,
        converged,
        final_certificate: best.solution.certificate,
    };
    (best.solution, report)
}

pub fn solve_laplace_dirichlet(prob: &LaplaceProblem) -> Result<(Solution, ConvergenceReport), SolverError> {
    let settings = &prob.settings;
    check_common(prob.tolerance, prob.max_dof, settings)?;
    let center = resolve_center(&prob.polygon, settings)?;

    let mut steps = Vec::new();
    let mut best: Option<Best> = None;
    for step in 1..=MAX_STEPS {
        let started = Instant::now();
        let params = settings.clustering(settings.schedule.poles_per_corner(step));
        let poles = place_poles(&prob.polygon, &params, Side::Exterior);
        let spec = BasisSpec::laplace(poles, settings.schedule.laplace_degree(step), center);
        let n = spec.dof();
        if step > 1 && n > prob.max_dof {
            break;
        }
        let mut samples = place_samples(&prob.polygon, &spec.poles, n, &params)?;
        reweight(&mut samples, &prob.polygon, settings.weight_exponent);
        let h: Vec<f64> = samples
            .points
            .iter()
            .map(|&p| prob.h(p))
            .collect::<Result<_, _>>()?;
        let ls = LsProblem::new(laplace_matrix(&samples, &spec)?, weighted_rhs(&h, &samples))?;
        let fit = solve_ls(&ls)?;
        let fit_residual = residual_sup(&ls, &fit.coefficients, &samples.weights)?;
        drop(ls);

        let expansion = LaplaceExpansion::from_real(&spec, &fit.coefficients);
        let certificate = laplace_certificate(
            &expansion,
            prob,
            &spec,
            settings.validation_refinement,
            samples.len(),
        )?;
        let validation_residual = certificate.boundary_sup_residual;
        let solution = Solution::new(spec, Coefficients::Real(fit.coefficients), certificate)?;
        steps.push(ConvergenceStep {
            step,
            dof: n,
            fit_residual,
            validation_residual,
            elapsed_seconds: started.elapsed().as_secs_f64(),
        });
        keep_best(&mut best, solution);
        if validation_residual <= prob.tolerance {
            return Ok(finish(best, steps, true));
        }
    }
    Ok(finish(best, steps, false))
}

pub fn solve_helmholtz_soundsoft(
    prob: &HelmholtzProblem,
) -> Result<(Solution, ConvergenceReport), SolverError> {
    let settings = &prob.settings;
    check_common(prob.tolerance, prob.max_dof, settings)?;
    let k = prob.wavenumber;
    if !(k.is_finite() && k > 0.0) {
        return Err(SolverError::InvalidWavenumber(k));
    }
    if let IncidentField::PointSource { source } = prob.incident {
        if prob.scatterer.locate(source) != Location::Outside {
            return Err(SolverError::SourceNotOutside(source));
        }
    }
    let center = resolve_center(&prob.scatterer, settings)?;
    let radius = prob.scatterer.radius_about(center);

    let mut steps = Vec::new();
    let mut best: Option<Best> = None;
    for step in 1..=MAX_STEPS {
        let started = Instant::now();
        let params = settings.clustering(settings.schedule.poles_per_corner(step));
        let charges = place_poles(&prob.scatterer, &params, Side::Interior);
        let order = settings.schedule.helmholtz_order(step, k, radius);
        let spec = BasisSpec::helmholtz(charges, order, center, k)?;
        let n = spec.dof();
        if step > 1 && n > prob.max_dof {
            break;
        }
        let mut samples = place_samples(&prob.scatterer, &spec.poles, n, &params)?;
        reweight(&mut samples, &prob.scatterer, settings.weight_exponent);
        let incident: Vec<Complex64> = samples
            .points
            .iter()
            .map(|&p| prob.incident.eval_at(k, p).map(|v| -v))
            .collect::<Result<_, _>>()?;
        let ls = LsProblem::new(helmholtz_matrix(&samples, &spec)?, weighted_rhs(&incident, &samples))?;
        let fit = solve_ls(&ls)?;
        let fit_residual = residual_sup(&ls, &fit.coefficients, &samples.weights)?;
        drop(ls);

        let provisional = Solution::new(
            spec,
            Coefficients::Complex(fit.coefficients),
            ErrorCertificate::uncertified(),
        )?;
        let certificate = helmholtz_certificate(
            &provisional,
            prob,
            settings.validation_refinement,
            samples.len(),
        )?;
        let validation_residual = certificate.boundary_sup_residual;
        let solution = Solution {
            certificate,
            ..provisional
        };
        steps.push(ConvergenceStep {
            step,
            dof: n,
            fit_residual,
            validation_residual,
            elapsed_seconds: started.elapsed().as_secs_f64(),
        });
        keep_best(&mut best, solution);
        if validation_residual <= prob.tolerance {
            return Ok(finish(best, steps, true));
        }
    }
    Ok(finish(best, steps, false))
}

/// Total field `u_scattered + u_incident` of a scattering solution.
pub fn total_field(sol: &Solution, prob: &HelmholtzProblem, pts: &[Point]) -> Result<Vec<Complex64>, SolverError> {
    let scattered = eval_helmholtz(sol, pts)?;
    scattered
        .iter()
        .zip(pts)
        .map(|(u, &p)| Ok(u + prob.incident.eval_at(prob.wavenumber, p)?))
        .collect()
}
