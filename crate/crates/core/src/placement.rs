//! Exponentially clustered singularities near corners and the matching
//! boundary sample points.
//!
//! For a corner with scale `L` and `n` singularities, the distances from the
//! corner are `d_j = L·exp(−σ(√n − √j))`, `j = 1..=n`. Boundary samples follow
//! the same law with `oversample_factor` points per singularity.

use thiserror::Error;

use crate::geometry::{inward_normal, Location, Point, Polygon};

/// Edges shorter than this are rejected by [`place_samples`].
pub const MIN_EDGE_LENGTH: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlacementError {
    #[error("clustering rate sigma must be positive and finite, got {0}")]
    InvalidSigma(f64),
    #[error("reach must be positive and finite, got {0}")]
    InvalidReach(f64),
    #[error("oversample factor must be at least 2, got {0}")]
    InvalidOversample(usize),
    #[error("basis size must be at least 1")]
    EmptyBasis,
    #[error("edge {0} is degenerate")]
    DegenerateEdge(usize),
    #[error("sample point {0} coincides with a singularity")]
    SampleOnPole(Point),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusteringParams {
    /// Clustering rate σ.
    pub sigma: f64,
    /// Singularities per corner.
    pub per_corner_count: usize,
    /// Boundary rows per unknown.
    pub oversample_factor: usize,
    /// Multiplier on the corner scale: the farthest singularity sits at
    /// `reach·L` from its corner.
    pub reach: f64,
}

impl Default for ClusteringParams {
    fn default() -> Self {
        Self {
            sigma: 4.0,
            per_corner_count: 0,
            oversample_factor: 3,
            reach: 1.0,
        }
    }
}

impl ClusteringParams {
    pub fn with_count(per_corner_count: usize) -> Self {
        Self {
            per_corner_count,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), PlacementError> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(PlacementError::InvalidSigma(self.sigma));
        }
        if !(self.reach.is_finite() && self.reach > 0.0) {
            return Err(PlacementError::InvalidReach(self.reach));
        }
        if self.oversample_factor < 2 {
            return Err(PlacementError::InvalidOversample(self.oversample_factor));
        }
        Ok(())
    }

    /// The same clustering with `factor` times as many samples.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            oversample_factor: self.oversample_factor * factor.max(1),
            ..*self
        }
    }
}

/// Which side of the boundary the singularities go on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Outside the polygon (interior Laplace problems).
    Exterior,
    /// Inside the polygon (exterior scattering problems).
    Interior,
}

/// Clustered singularity locations.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoleSet {
    pub poles: Vec<Point>,
    /// Index of the corner each pole belongs to.
    pub owning_corner: Vec<usize>,
    /// Poles dropped because they landed on the wrong side of the boundary.
    pub discarded: usize,
}

impl PoleSet {
    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }

    pub fn translated(&self, offset: Point) -> PoleSet {
        PoleSet {
            poles: self.poles.iter().map(|&p| p + offset).collect(),
            ..self.clone()
        }
    }
}

/// Boundary points used as least-squares rows.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SampleSet {
    pub points: Vec<Point>,
    pub normals: Vec<Point>,
    pub weights: Vec<f64>,
    pub edge_index: Vec<usize>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn translated(&self, offset: Point) -> SampleSet {
        SampleSet {
            points: self.points.iter().map(|&p| p + offset).collect(),
            ..self.clone()
        }
    }

    /// Same points with unit weights.
    pub fn unweighted(&self) -> SampleSet {
        SampleSet {
            weights: vec![1.0; self.points.len()],
            ..self.clone()
        }
    }
}

fn same_parameter(s: f64, t: f64) -> bool {
    (s - t).abs() <= 4.0 * f64::EPSILON
}

/// Clustered distances `L·exp(−σ(√n − √(j/per_unit)))` for
/// `j = 1..=n·per_unit`, increasing.
pub fn clustered_distances(scale: f64, sigma: f64, n: usize, per_unit: usize) -> Vec<f64> {
    let sqrt_n = (n as f64).sqrt();
    (1..=n * per_unit)
        .map(|j| scale * (-sigma * (sqrt_n - (j as f64 / per_unit as f64).sqrt())).exp())
        .collect()
}

pub fn place_poles(polygon: &Polygon, params: &ClusteringParams, side: Side) -> PoleSet {
    let mut set = PoleSet::default();
    let wanted = match side {
        Side::Exterior => Location::Outside,
        Side::Interior => Location::Inside,
    };
    for (c, corner) in polygon.corners().iter().enumerate() {
        let dir = match side {
            Side::Exterior => corner.exterior_bisector,
            Side::Interior => corner.interior_bisector,
        };
        for d in clustered_distances(params.reach * corner.scale, params.sigma, params.per_corner_count, 1) {
            let pole = corner.location + dir.scale(d);
            if polygon.locate(pole) == wanted {
                set.poles.push(pole);
                set.owning_corner.push(c);
            } else {
                set.discarded += 1;
            }
        }
    }
    set
}

/// Splits `total` among edges in proportion to length with at least
/// `minimum` per edge, using largest remainders.
fn distribute(lengths: &[f64], total: usize, minimum: usize) -> Vec<usize> {
    let floor_total = minimum * lengths.len();
    let extra = total.saturating_sub(floor_total);
    let perimeter: f64 = lengths.iter().sum();
    let shares: Vec<f64> = lengths
        .iter()
        .map(|l| extra as f64 * l / perimeter)
        .collect();
    let mut counts: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let mut left = extra - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..lengths.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = shares[a] - shares[a].floor();
        let rb = shares[b] - shares[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts.iter().map(|c| c + minimum).collect()
}

/// Places about `oversample_factor · basis_size` boundary samples.
///
/// Each edge gets clustered samples toward both endpoints plus an evenly
/// spaced fill; the fill is sized so the total reaches
/// `oversample_factor · basis_size`, subject to at least
/// `2 · oversample_factor` fill points per edge.
pub fn place_samples(
    polygon: &Polygon,
    poleset: &PoleSet,
    basis_size: usize,
    params: &ClusteringParams,
) -> Result<SampleSet, PlacementError> {
    params.validate()?;
    if basis_size == 0 {
        return Err(PlacementError::EmptyBasis);
    }
    let edges = polygon.num_edges();
    let lengths: Vec<f64> = (0..edges).map(|i| polygon.edge_length(i)).collect();
    if let Some(i) = lengths.iter().position(|&l| l < MIN_EDGE_LENGTH) {
        return Err(PlacementError::DegenerateEdge(i));
    }
    let os = params.oversample_factor;
    let n = params.per_corner_count;
    let corners = polygon.corners();

    // clustered samples per edge as (parameter, point); offsets that would
    // round onto either vertex are skipped
    let clustered: Vec<Vec<(f64, Point)>> = (0..edges)
        .map(|e| {
            let (a, b) = polygon.edge(e);
            let len = lengths[e];
            let floor_a = 8.0 * f64::EPSILON * a.norm().max(1.0);
            let floor_b = 8.0 * f64::EPSILON * b.norm().max(1.0);
            let dir = (b - a).scale(1.0 / len);
            let near_a = clustered_distances(params.reach * corners[e].scale, params.sigma, n, os);
            let near_b = clustered_distances(params.reach * corners[(e + 1) % edges].scale, params.sigma, n, os);
            let from_a = near_a
                .into_iter()
                .filter(|&d| d > floor_a && d < len - floor_b)
                .map(|d| (d / len, a + dir.scale(d)));
            let from_b = near_b
                .into_iter()
                .filter(|&d| d > floor_b && d < len - floor_a)
                .map(|d| (1.0 - d / len, b - dir.scale(d)));
            let mut pts: Vec<(f64, Point)> = from_a.chain(from_b).collect();
            pts.sort_by(|p, q| p.0.total_cmp(&q.0));
            // both clusters end at the midpoint when the edge is twice the reach
            pts.dedup_by(|p, q| same_parameter(p.0, q.0));
            pts
        })
        .collect();
    let clustered_total: usize = clustered.iter().map(Vec::len).sum();
    let target = os * basis_size;
    let fill = distribute(&lengths, target.saturating_sub(clustered_total), 2 * os);

    let mut set = SampleSet::default();
    for (e, mut pts) in clustered.into_iter().enumerate() {
        let (a, b) = polygon.edge(e);
        let normal = inward_normal(a, b);
        let fills: Vec<(f64, Point)> = (0..fill[e])
            .map(|i| {
                let mut t = (i as f64 + 0.5) / fill[e] as f64;
                if pts.iter().any(|p| same_parameter(p.0, t)) {
                    t = (i as f64 + 0.25) / fill[e] as f64;
                }
                (t, a + (b - a).scale(t))
            })
            .collect();
        pts.extend(fills);
        pts.sort_by(|p, q| p.0.total_cmp(&q.0));
        for (_, p) in pts {
            set.points.push(p);
            set.normals.push(normal);
            set.edge_index.push(e);
        }
    }

    for &p in &set.points {
        if poleset.poles.contains(&p) {
            return Err(PlacementError::SampleOnPole(p));
        }
    }

    set.weights = set
        .points
        .iter()
        .map(|&p| polygon.distance_to_nearest_corner(p).min(1.0).sqrt())
        .collect();
    let wmax = set.weights.iter().cloned().fold(0.0, f64::max);
    for w in &mut set.weights {
        *w /= wmax;
    }
    Ok(set)
}
