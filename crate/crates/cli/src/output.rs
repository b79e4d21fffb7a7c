//! Writers for the CSV, JSON and PGM outputs.

use std::fmt::Write as _;

use serde_json::json;

use lightning::geometry::Point;
use lightning::solver::ConvergenceReport;

/// A solution value at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Real(f64),
    Complex(f64, f64),
}

impl Value {
    pub fn re(self) -> f64 {
        match self {
            Value::Real(v) | Value::Complex(v, _) => v,
        }
    }
}

pub fn convergence_csv(report: &ConvergenceReport) -> String {
    let mut out = String::from("step,N,fit_residual,validation_residual,seconds\n");
    for s in &report.steps {
        let _ = writeln!(
            out,
            "{},{},{:e},{:e},{:.6}",
            s.step, s.dof, s.fit_residual, s.validation_residual, s.elapsed_seconds
        );
    }
    out
}

/// `n_final` is the size of the returned expansion, which is the last step's
/// only when the run converged.
pub fn certificate_json(report: &ConvergenceReport, n_final: usize) -> String {
    let cert = &report.final_certificate;
    let doc = json!({
        "boundary_sup_residual": cert.boundary_sup_residual,
        "N_final": n_final,
        "converged": report.converged,
        "validation_point_count": cert.validation_point_count,
        "fit_point_count": cert.fit_point_count,
        "statement": cert.statement(),
    });
    serde_json::to_string_pretty(&doc).expect("certificate serializes") + "\n"
}

/// One row per point; complex values get a `value_imag` column.
pub fn solution_csv(pts: &[Point], values: &[Value]) -> String {
    let complex = values.iter().any(|v| matches!(v, Value::Complex(..)));
    let mut out = String::from(if complex { "x,y,value,value_imag\n" } else { "x,y,value\n" });
    for (p, v) in pts.iter().zip(values) {
        let _ = match *v {
            Value::Real(u) => writeln!(out, "{},{},{}", p.x, p.y, u),
            Value::Complex(re, im) => writeln!(out, "{},{},{},{}", p.x, p.y, re, im),
        };
    }
    out
}

/// Grows a bounding box by `fraction` of its size on every side.
pub fn padded_box((lo, hi): (Point, Point), fraction: f64) -> (Point, Point) {
    let pad = Point::new((hi.x - lo.x) * fraction, (hi.y - lo.y) * fraction);
    (lo - pad, hi + pad)
}

/// Row-major grid of `nx × ny` nodes, top row first (largest y).
pub fn grid_points(lo: Point, hi: Point, nx: usize, ny: usize) -> Vec<Point> {
    let mut pts = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = hi.y - (hi.y - lo.y) * j as f64 / (ny - 1) as f64;
        for i in 0..nx {
            let x = lo.x + (hi.x - lo.x) * i as f64 / (nx - 1) as f64;
            pts.push(Point::new(x, y));
        }
    }
    pts
}

/// Grayscale image of a scalar field. `None` marks pixels outside the
/// domain; they are written as 0 and the rest map linearly onto 1..=255.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldRaster {
    pub nx: usize,
    pub ny: usize,
    pub lo: Point,
    pub hi: Point,
    pub values: Vec<Option<f64>>,
    pub quantity: &'static str,
    pub min: f64,
    pub max: f64,
}

impl FieldRaster {
    pub fn new(nx: usize, ny: usize, lo: Point, hi: Point, values: Vec<Option<f64>>, quantity: &'static str) -> Self {
        let finite = values.iter().flatten().filter(|v| v.is_finite());
        let (min, max) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        Self {
            nx,
            ny,
            lo,
            hi,
            values,
            quantity,
            min,
            max,
        }
    }

    pub fn gray(&self, v: Option<f64>) -> u8 {
        match v {
            None => 0,
            Some(v) if !v.is_finite() => 0,
            Some(_) if self.max <= self.min => 128,
            Some(v) => 1 + (254.0 * (v - self.min) / (self.max - self.min)).round() as u8,
        }
    }

    pub fn outside_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Plain (ASCII) PGM, at most 16 samples per line.
    pub fn pgm(&self) -> String {
        let mut out = format!("P2\n# {}\n{} {}\n255\n", self.quantity, self.nx, self.ny);
        for row in self.values.chunks(self.nx) {
            for chunk in row.chunks(16) {
                let line: Vec<String> = chunk.iter().map(|&v| self.gray(v).to_string()).collect();
                out.push_str(&line.join(" "));
                out.push('\n');
            }
        }
        out
    }

    pub fn sidecar_json(&self) -> String {
        let finite = |v: f64| if v.is_finite() { json!(v) } else { json!(null) };
        let doc = json!({
            "quantity": self.quantity,
            "min": finite(self.min),
            "max": finite(self.max),
            "nx": self.nx,
            "ny": self.ny,
            "bbox": [self.lo.x, self.lo.y, self.hi.x, self.hi.y],
            "outside_count": self.outside_count(),
            "mapping": "gray = 1 + round(254 * (value - min) / (max - min)); 0 marks points outside the domain; rows run from top (max y) to bottom",
        });
        serde_json::to_string_pretty(&doc).expect("sidecar serializes") + "\n"
    }
}
