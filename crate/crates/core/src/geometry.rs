//! Polygonal domains: construction, corner data, point classification and
//! boundary parametrization.
//!
//! Polygons are stored counterclockwise. Every vertex is treated as a corner,
//! including vertices with an interior angle of exactly π.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

/// Distance below which a point is classified as lying on the boundary.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// A point in the plane, identified with the complex number `x + iy`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn z(self) -> Complex64 {
        Complex64::new(self.x, self.y)
    }

    #[inline]
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    #[inline]
    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    #[inline]
    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    /// Counterclockwise rotation by `angle` radians.
    pub fn rotate(self, angle: f64) -> Point {
        let (s, c) = angle.sin_cos();
        Point::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn unit(self) -> Point {
        self.scale(1.0 / self.norm())
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point::new(z.re, z.im)
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Point::new(x, y)
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("a polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertex {0} repeats the previous vertex")]
    RepeatedVertex(usize),
    #[error("vertex {0} has a non-finite coordinate")]
    NonFiniteVertex(usize),
    #[error("edges {0} and {1} intersect")]
    SelfIntersection(usize, usize),
    #[error("polygon has zero area")]
    ZeroArea,
    #[error("edge index {index} out of range for a polygon with {edges} edges")]
    EdgeOutOfRange { index: usize, edges: usize },
    #[error("edge parameter t = {0} is outside [0, 1]")]
    ParameterOutOfRange(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Inside,
    Outside,
    Boundary,
}

/// Geometric data attached to one vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corner {
    pub location: Point,
    /// Interior angle in radians, in (0, 2π).
    pub interior_angle: f64,
    /// Unit vector bisecting the exterior wedge.
    pub exterior_bisector: Point,
    /// Unit vector bisecting the interior wedge.
    pub interior_bisector: Point,
    /// Half the length of the shorter adjacent side.
    pub scale: f64,
}

/// A simple polygon with straight edges, oriented counterclockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    vertices: Vec<Point>,
    corners: Vec<Corner>,
}

/// A point on an edge together with the inward unit normal there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint {
    pub point: Point,
    pub normal: Point,
}

fn signed_area(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    0.5 * (0..n)
        .map(|i| vertices[i].cross(vertices[(i + 1) % n]))
        .sum::<f64>()
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test, exact in the sign of the orientation
/// predicates.
fn segments_intersect(a: Point, b: Point, c: Point, d: Point) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

/// Distance from `p` to the closed segment `ab`.
pub fn segment_distance(a: Point, b: Point, p: Point) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    let t = if len2 > 0.0 {
        ((p - a).dot(ab) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    p.distance(a + ab.scale(t))
}

impl Polygon {
    /// Builds a polygon from its vertex list, normalizing the orientation to
    /// counterclockwise.
    pub fn new(vertices: Vec<Point>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::TooFewVertices(n));
        }
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(GeometryError::NonFiniteVertex(i));
        }
        for i in 0..n {
            if vertices[i] == vertices[(i + 1) % n] {
                return Err(GeometryError::RepeatedVertex((i + 1) % n));
            }
        }
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            for j in i + 1..n {
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    // Adjacent edges share one vertex; they may only overlap
                    // if they fold back onto each other.
                    let (shared, p, q) = if j == i + 1 { (b, a, d) } else { (a, b, c) };
                    if orient(shared, p, q) == 0.0 && (p - shared).dot(q - shared) > 0.0 {
                        return Err(GeometryError::SelfIntersection(i, j));
                    }
                } else if segments_intersect(a, b, c, d) {
                    return Err(GeometryError::SelfIntersection(i, j));
                }
            }
        }
        let area = signed_area(&vertices);
        if area == 0.0 {
            return Err(GeometryError::ZeroArea);
        }
        let mut vertices = vertices;
        if area < 0.0 {
            vertices.reverse();
        }
        let corners = compute_corners(&vertices);
        Ok(Self { vertices, corners })
    }

    pub fn from_xy(coords: &[(f64, f64)]) -> Result<Self, GeometryError> {
        Self::new(coords.iter().map(|&c| c.into()).collect())
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn corners(&self) -> &[Corner] {
        &self.corners
    }

    pub fn num_edges(&self) -> usize {
        self.vertices.len()
    }

    /// Endpoints of edge `i`, running from vertex `i` to vertex `i + 1`.
    pub fn edge(&self, i: usize) -> (Point, Point) {
        let n = self.vertices.len();
        (self.vertices[i % n], self.vertices[(i + 1) % n])
    }

    pub fn edge_length(&self, i: usize) -> f64 {
        let (a, b) = self.edge(i);
        a.distance(b)
    }

    pub fn perimeter(&self) -> f64 {
        (0..self.num_edges()).map(|i| self.edge_length(i)).sum()
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Area centroid.
    pub fn centroid(&self) -> Point {
        let n = self.vertices.len();
        let (mut cx, mut cy) = (0.0, 0.0);
        for i in 0..n {
            let (p, q) = (self.vertices[i], self.vertices[(i + 1) % n]);
            let c = p.cross(q);
            cx += (p.x + q.x) * c;
            cy += (p.y + q.y) * c;
        }
        let a6 = 6.0 * self.area();
        Point::new(cx / a6, cy / a6)
    }

    /// Largest distance from `center` to a vertex.
    pub fn radius_about(&self, center: Point) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.distance(center))
            .fold(0.0, f64::max)
    }

    /// Axis-aligned bounding box as `(min, max)` corners.
    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            lo = Point::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Point::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        (lo, hi)
    }

    /// Distance from `p` to the closest vertex.
    pub fn distance_to_nearest_corner(&self, p: Point) -> f64 {
        self.vertices
            .iter()
            .map(|v| v.distance(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from `p` to the boundary.
    pub fn distance_to_boundary(&self, p: Point) -> f64 {
        (0..self.num_edges())
            .map(|i| {
                let (a, b) = self.edge(i);
                segment_distance(a, b, p)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Classifies `q` by an even-odd crossing count, after a boundary check
    /// with absolute tolerance [`BOUNDARY_TOLERANCE`].
    pub fn locate(&self, q: Point) -> Location {
        if self.distance_to_boundary(q) <= BOUNDARY_TOLERANCE {
            return Location::Boundary;
        }
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let (a, b) = (self.vertices[i], self.vertices[(i + 1) % n]);
            if (a.y > q.y) != (b.y > q.y) {
                let x_cross = a.x + (q.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if q.x < x_cross {
                    inside = !inside;
                }
            }
        }
        if inside {
            Location::Inside
        } else {
            Location::Outside
        }
    }

    /// Point at parameter `t` along edge `edge_index`, with the inward unit
    /// normal of that edge.
    pub fn boundary_point(&self, edge_index: usize, t: f64) -> Result<BoundaryPoint, GeometryError> {
        let edges = self.num_edges();
        if edge_index >= edges {
            return Err(GeometryError::EdgeOutOfRange {
                index: edge_index,
                edges,
            });
        }
        if !(0.0..=1.0).contains(&t) {
            return Err(GeometryError::ParameterOutOfRange(t));
        }
        let (a, b) = self.edge(edge_index);
        Ok(BoundaryPoint {
            point: a + (b - a).scale(t),
            normal: inward_normal(a, b),
        })
    }

    /// The same polygon shifted by `offset`.
    pub fn translated(&self, offset: Point) -> Polygon {
        let vertices = self.vertices.iter().map(|&v| v + offset).collect::<Vec<_>>();
        let corners = compute_corners(&vertices);
        Polygon { vertices, corners }
    }
}

/// Builds a counterclockwise polygon from `vertices`.
pub fn make_polygon(vertices: Vec<Point>) -> Result<Polygon, GeometryError> {
    Polygon::new(vertices)
}

pub fn point_in_polygon(p: &Polygon, q: Point) -> Location {
    p.locate(q)
}

/// Inward normal of a counterclockwise edge from `a` to `b`.
pub(crate) fn inward_normal(a: Point, b: Point) -> Point {
    let d = (b - a).unit();
    Point::new(-d.y, d.x)
}

fn compute_corners(vertices: &[Point]) -> Vec<Corner> {
    let n = vertices.len();
    (0..n)
        .map(|i| {
            let prev = vertices[(i + n - 1) % n];
            let here = vertices[i];
            let next = vertices[(i + 1) % n];
            let incoming = here - prev;
            let outgoing = next - here;
            let turn = incoming.cross(outgoing).atan2(incoming.dot(outgoing));
            let interior_angle = PI - turn;
            // The interior wedge opens counterclockwise from the outgoing edge.
            let interior_bisector = outgoing.unit().rotate(0.5 * interior_angle);
            Corner {
                location: here,
                interior_angle,
                exterior_bisector: interior_bisector.scale(-1.0),
                interior_bisector,
                scale: 0.5 * incoming.norm().min(outgoing.norm()),
            }
        })
        .collect()
}
