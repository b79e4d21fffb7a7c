//! Problem files: JSON documents describing one Laplace or Helmholtz run.

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use lightning::basis::IncidentField;
use lightning::exprlang::Expr;
use lightning::geometry::{Point, Polygon};
use lightning::solver::{HelmholtzProblem, LaplaceProblem, Schedule, SolverSettings};

use crate::CliError;

const KNOWN_KEYS: &[&str] = &[
    "type",
    "vertices",
    "boundary_data",
    "incident",
    "k",
    "tolerance",
    "max_dof",
    "sigma",
    "reach",
    "oversample",
    "center",
    "schedule",
    "validation_refinement",
    "weight_exponent",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Laplace,
    Helmholtz,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IncidentConfig {
    PlaneWave { angle_degrees: f64 },
    PointSource { z0: [f64; 2] },
}

impl IncidentConfig {
    pub fn to_field(self) -> IncidentField {
        match self {
            IncidentConfig::PlaneWave { angle_degrees } => IncidentField::plane_wave_degrees(angle_degrees),
            IncidentConfig::PointSource { z0 } => IncidentField::PointSource {
                source: Point::new(z0[0], z0[1]),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleConfig {
    pub poles_per_step: usize,
    pub degree_per_step: f64,
    pub orders_per_step: usize,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        let s = Schedule::default();
        Self {
            poles_per_step: s.poles_per_step,
            degree_per_step: s.degree_per_step,
            orders_per_step: s.orders_per_step,
        }
    }
}

/// A fully resolved problem file. Serializing it gives a config that
/// reproduces the same run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    #[serde(rename = "type")]
    pub kind: ProblemKind,
    pub vertices: Vec<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_data: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub incident: Option<IncidentConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
    pub tolerance: f64,
    pub max_dof: usize,
    pub sigma: f64,
    pub reach: f64,
    pub oversample: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    pub schedule: ScheduleConfig,
    pub validation_refinement: usize,
    pub weight_exponent: f64,
}

fn invalid(key: &str, reason: impl Into<String>) -> CliError {
    CliError::InvalidKey {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn required<'a>(map: &'a Map<String, Value>, key: &str) -> Result<&'a Value, CliError> {
    map.get(key)
        .ok_or_else(|| CliError::MissingKey(key.to_string()))
}

fn typed<T: for<'de> Deserialize<'de>>(key: &str, value: &Value) -> Result<T, CliError> {
    T::deserialize(value).map_err(|e| invalid(key, e.to_string()))
}

fn optional<T: for<'de> Deserialize<'de>>(map: &Map<String, Value>, key: &str) -> Result<Option<T>, CliError> {
    map.get(key).map(|v| typed(key, v)).transpose()
}

impl ProblemConfig {
    /// Parses and validates a problem file. Unknown top-level keys are
    /// returned as warnings rather than rejected.
    pub fn from_json(text: &str) -> Result<(Self, Vec<String>), CliError> {
        let root: Value = serde_json::from_str(text).map_err(CliError::Json)?;
        let Value::Object(map) = root else {
            return Err(CliError::NotAnObject);
        };
        let warnings = map
            .keys()
            .filter(|k| !KNOWN_KEYS.contains(&k.as_str()))
            .map(|k| format!("ignoring unknown key \"{k}\""))
            .collect();

        let defaults = SolverSettings::default();
        let kind: ProblemKind = typed("type", required(&map, "type")?)?;
        let cfg = ProblemConfig {
            kind,
            vertices: typed("vertices", required(&map, "vertices")?)?,
            boundary_data: match kind {
                ProblemKind::Laplace => Some(typed("boundary_data", required(&map, "boundary_data")?)?),
                ProblemKind::Helmholtz => optional(&map, "boundary_data")?,
            },
            incident: match kind {
                ProblemKind::Helmholtz => Some(typed("incident", required(&map, "incident")?)?),
                ProblemKind::Laplace => optional(&map, "incident")?,
            },
            k: match kind {
                ProblemKind::Helmholtz => Some(typed("k", required(&map, "k")?)?),
                ProblemKind::Laplace => optional(&map, "k")?,
            },
            tolerance: typed("tolerance", required(&map, "tolerance")?)?,
            max_dof: typed("max_dof", required(&map, "max_dof")?)?,
            sigma: optional(&map, "sigma")?.unwrap_or(defaults.sigma),
            reach: optional(&map, "reach")?.unwrap_or(defaults.reach),
            oversample: optional(&map, "oversample")?.unwrap_or(defaults.oversample),
            center: optional(&map, "center")?,
            schedule: optional(&map, "schedule")?.unwrap_or_default(),
            validation_refinement: optional(&map, "validation_refinement")?
                .unwrap_or(defaults.validation_refinement),
            weight_exponent: optional(&map, "weight_exponent")?.unwrap_or(defaults.weight_exponent),
        };
        cfg.validate()?;
        Ok((cfg, warnings))
    }

    /// Checks values that parse but are out of range.
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return Err(invalid("tolerance", format!("must be positive, got {}", self.tolerance)));
        }
        if self.max_dof == 0 {
            return Err(invalid("max_dof", "must be at least 1"));
        }
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(invalid("sigma", format!("must be positive, got {}", self.sigma)));
        }
        if !(self.reach.is_finite() && self.reach > 0.0) {
            return Err(invalid("reach", format!("must be positive, got {}", self.reach)));
        }
        if self.oversample < 2 {
            return Err(invalid("oversample", format!("must be at least 2, got {}", self.oversample)));
        }
        if self.validation_refinement < 4 {
            return Err(invalid(
                "validation_refinement",
                format!("must be at least 4, got {}", self.validation_refinement),
            ));
        }
        if !(self.weight_exponent.is_finite() && self.weight_exponent >= 0.0) {
            return Err(invalid("weight_exponent", "must be finite and nonnegative"));
        }
        let s = &self.schedule;
        if s.poles_per_step == 0 || s.orders_per_step == 0 {
            return Err(invalid("schedule", "step increments must be at least 1"));
        }
        if !(s.degree_per_step.is_finite() && s.degree_per_step > 0.0) {
            return Err(invalid("schedule", "degree_per_step must be positive"));
        }
        if let Some(k) = self.k {
            if !(k.is_finite() && k > 0.0) {
                return Err(invalid("k", format!("must be positive, got {k}")));
            }
        }
        if let Some(IncidentConfig::PlaneWave { angle_degrees }) = self.incident {
            if !angle_degrees.is_finite() {
                return Err(invalid("incident", "angle_degrees must be finite"));
            }
        }
        self.polygon()?;
        if let Some(src) = &self.boundary_data {
            src.parse::<Expr>()
                .map_err(|e| invalid("boundary_data", e.to_string()))?;
        }
        Ok(())
    }

    pub fn polygon(&self) -> Result<Polygon, CliError> {
        let pts: Vec<Point> = self.vertices.iter().map(|v| Point::new(v[0], v[1])).collect();
        Polygon::new(pts).map_err(|e| invalid("vertices", e.to_string()))
    }

    pub fn settings(&self) -> SolverSettings {
        SolverSettings {
            sigma: self.sigma,
            reach: self.reach,
            oversample: self.oversample,
            validation_refinement: self.validation_refinement,
            weight_exponent: self.weight_exponent,
            center: self.center.map(|c| Point::new(c[0], c[1])),
            schedule: Schedule {
                poles_per_step: self.schedule.poles_per_step,
                degree_per_step: self.schedule.degree_per_step,
                orders_per_step: self.schedule.orders_per_step,
            },
        }
    }

    pub fn laplace_problem(&self) -> Result<LaplaceProblem, CliError> {
        let src = self
            .boundary_data
            .as_deref()
            .ok_or_else(|| CliError::MissingKey("boundary_data".into()))?;
        let expr: Expr = src
            .parse()
            .map_err(|e: lightning::exprlang::ParseError| invalid("boundary_data", e.to_string()))?;
        Ok(LaplaceProblem::new(self.polygon()?, expr, self.tolerance, self.max_dof)
            .with_settings(self.settings()))
    }

    pub fn helmholtz_problem(&self) -> Result<HelmholtzProblem, CliError> {
        let incident = self
            .incident
            .ok_or_else(|| CliError::MissingKey("incident".into()))?;
        let k = self.k.ok_or_else(|| CliError::MissingKey("k".into()))?;
        Ok(
            HelmholtzProblem::new(self.polygon()?, incident.to_field(), k, self.tolerance, self.max_dof)
                .with_settings(self.settings()),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
