//! Planar domains bounded by closed analytic curves.
//!
//! Boundaries are truncated Fourier series, so they are analytic by
//! construction and closed with period 2*pi. Regularity (nonvanishing
//! velocity) is validated on a fine grid when a curve is built; simplicity
//! is checked heuristically on the same polyline.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

/// Grid resolution used to validate regularity and to build the cached
/// membership polyline.
pub const VALIDATION_SAMPLES: usize = 4096;

/// Coarser polyline used by the O(M^2) self-intersection heuristic.
const SIMPLICITY_SAMPLES: usize = 512;

/// Relative width of the boundary-ambiguous band: points closer than
/// `AMBIGUOUS_BAND_REL * diameter` to the boundary polyline are treated as
/// outside so that accepted interior points stay strictly interior.
pub const AMBIGUOUS_BAND_REL: f64 = 1e-9;

const BBOX_MARGIN_REL: f64 = 1e-6;
const ARCLENGTH_REL_TOL: f64 = 1e-12;

/// A point in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// Euclidean distance, computed without squaring tricks so accuracy is
    /// preserved near the kernel's singular circle.
    pub fn dist(&self, other: Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Closed curve gamma(t) = (x(t), y(t)), t in [0, 2*pi), with each coordinate
/// a truncated Fourier series.
///
/// `x_cos[k]` multiplies cos(k t) (index 0 is the constant term) and
/// `x_sin[k]` multiplies sin(k t) (index 0 is inert since sin(0) = 0);
/// likewise for y.
#[derive(Clone, Debug, PartialEq)]
pub struct AnalyticCurve {
    x_cos: Vec<f64>,
    x_sin: Vec<f64>,
    y_cos: Vec<f64>,
    y_sin: Vec<f64>,
}

impl AnalyticCurve {
    /// Builds and validates a curve: all coefficients finite, velocity
    /// nonvanishing on a grid of [`VALIDATION_SAMPLES`] points, and no
    /// polyline self-intersection.
    pub fn new(
        x_cos: Vec<f64>,
        x_sin: Vec<f64>,
        y_cos: Vec<f64>,
        y_sin: Vec<f64>,
    ) -> Result<Self> {
        let curve = Self::new_unchecked(x_cos, x_sin, y_cos, y_sin);
        curve.validate()?;
        Ok(curve)
    }

    /// Builds a curve without regularity or simplicity validation.
    /// Evaluation and derivatives still work; intended for coefficient-level
    /// experimentation, not for use as a domain boundary.
    pub fn new_unchecked(
        x_cos: Vec<f64>,
        x_sin: Vec<f64>,
        y_cos: Vec<f64>,
        y_sin: Vec<f64>,
    ) -> Self {
        let degree = x_cos
            .len()
            .max(x_sin.len())
            .max(y_cos.len())
            .max(y_sin.len())
            .max(1);
        let pad = |mut v: Vec<f64>| {
            v.resize(degree, 0.0);
            v
        };
        AnalyticCurve {
            x_cos: pad(x_cos),
            x_sin: pad(x_sin),
            y_cos: pad(y_cos),
            y_sin: pad(y_sin),
        }
    }

    /// Circle of radius `r` centered at `(cx, cy)`.
    pub fn circle(r: f64, cx: f64, cy: f64) -> Result<Self> {
        Self::new(
            vec![cx, r],
            vec![0.0, 0.0],
            vec![cy, 0.0],
            vec![0.0, r],
        )
    }

    /// Axis-aligned ellipse x = a cos t, y = b sin t.
    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![0.0, a], vec![0.0, 0.0], vec![0.0, 0.0], vec![0.0, b])
    }

    /// Three-lobed smooth star: the radial bump r(t) = 1 + 0.25 cos(3t)
    /// expanded into Cartesian Fourier coefficients.
    pub fn star3() -> Result<Self> {
        let e = 0.25 / 2.0;
        // x = cos t + e (cos 2t + cos 4t), y = sin t + e (sin 4t - sin 2t)
        Self::new(
            vec![0.0, 1.0, e, 0.0, e],
            vec![0.0; 5],
            vec![0.0; 5],
            vec![0.0, 1.0, -e, 0.0, e],
        )
    }

    /// Highest harmonic index carried by the coefficient arrays.
    pub fn max_degree(&self) -> usize {
        self.x_cos.len() - 1
    }

    /// gamma(t). The parameter is reduced modulo 2*pi first, so t and t+2*pi
    /// evaluate identically whenever t+2*pi is exact in floating point.
    pub fn eval(&self, t: f64) -> Point2 {
        let t = t.rem_euclid(TAU);
        let mut x = self.x_cos[0];
        let mut y = self.y_cos[0];
        for k in 1..self.x_cos.len() {
            let (s, c) = (k as f64 * t).sin_cos();
            x += self.x_cos[k] * c + self.x_sin[k] * s;
            y += self.y_cos[k] * c + self.y_sin[k] * s;
        }
        Point2::new(x, y)
    }

    /// gamma'(t), the exact term-by-term derivative of the series.
    pub fn deriv(&self, t: f64) -> (f64, f64) {
        let t = t.rem_euclid(TAU);
        let mut dx = 0.0;
        let mut dy = 0.0;
        for k in 1..self.x_cos.len() {
            let kf = k as f64;
            let (s, c) = (kf * t).sin_cos();
            dx += kf * (-self.x_cos[k] * s + self.x_sin[k] * c);
            dy += kf * (-self.y_cos[k] * s + self.y_sin[k] * c);
        }
        (dx, dy)
    }

    /// ||gamma'(t)||.
    pub fn speed(&self, t: f64) -> f64 {
        let (dx, dy) = self.deriv(t);
        dx.hypot(dy)
    }

    /// Certified envelope S >= ||gamma'(t)|| for all t, from the coefficient
    /// bounds B_x = sum k (|a_k| + |b_k|) per coordinate.
    pub fn speed_upper_bound(&self) -> f64 {
        let mut bx = 0.0;
        let mut by = 0.0;
        for k in 1..self.x_cos.len() {
            let kf = k as f64;
            bx += kf * (self.x_cos[k].abs() + self.x_sin[k].abs());
            by += kf * (self.y_cos[k].abs() + self.y_sin[k].abs());
        }
        bx.hypot(by)
    }

    /// Curve length by composite Gauss-Legendre quadrature of the speed,
    /// panel count doubled until two successive refinements agree to
    /// relative 1e-12.
    pub fn arclength(&self) -> Result<f64> {
        let rule = gauss_legendre_16();
        let mut panels = 4usize;
        let mut prev = self.arclength_with_panels(&rule, panels);
        for _ in 0..16 {
            panels *= 2;
            let next = self.arclength_with_panels(&rule, panels);
            if (next - prev).abs() <= ARCLENGTH_REL_TOL * next.abs() {
                return Ok(next);
            }
            prev = next;
        }
        Err(Error::QuadratureFailure {
            tol: ARCLENGTH_REL_TOL,
            refinements: 16,
        })
    }

    fn arclength_with_panels(&self, rule: &[(f64, f64)], panels: usize) -> f64 {
        let h = TAU / panels as f64;
        let mut total = 0.0;
        for p in 0..panels {
            let a = p as f64 * h;
            let mid = a + 0.5 * h;
            let half = 0.5 * h;
            let mut panel = 0.0;
            for &(node, weight) in rule {
                panel += weight * self.speed(mid + half * node);
            }
            total += panel * half;
        }
        total
    }

    fn validate(&self) -> Result<()> {
        for c in [&self.x_cos, &self.x_sin, &self.y_cos, &self.y_sin] {
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::Config("curve coefficients must be finite".into()));
            }
        }
        let mut min_speed = f64::INFINITY;
        let mut min_t = 0.0;
        for j in 0..VALIDATION_SAMPLES {
            let t = j as f64 * TAU / VALIDATION_SAMPLES as f64;
            let s = self.speed(t);
            if s < min_speed {
                min_speed = s;
                min_t = t;
            }
        }
        if !(min_speed > 0.0) {
            return Err(Error::IrregularCurve {
                min_speed,
                at_t: min_t,
            });
        }
        self.check_simplicity()
    }

    /// Segment-pair intersection test on a coarse polyline. Heuristic: it
    /// catches gross self-intersections, not tangencies below the grid scale.
    fn check_simplicity(&self) -> Result<()> {
        let m = SIMPLICITY_SAMPLES;
        let pts: Vec<Point2> = (0..m)
            .map(|j| self.eval(j as f64 * TAU / m as f64))
            .collect();
        for i in 0..m {
            let a1 = pts[i];
            let a2 = pts[(i + 1) % m];
            for j in (i + 2)..m {
                // skip the closing segment's shared endpoint with segment 0
                if i == 0 && j == m - 1 {
                    continue;
                }
                let b1 = pts[j];
                let b2 = pts[(j + 1) % m];
                if segments_intersect(a1, a2, b1, b2) {
                    return Err(Error::SelfIntersectingCurve { seg_a: i, seg_b: j });
                }
            }
        }
        Ok(())
    }
}

fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_intersect(a1: Point2, a2: Point2, b1: Point2, b2: Point2) -> bool {
    let d1 = orient(b1, b2, a1);
    let d2 = orient(b1, b2, a2);
    let d3 = orient(a1, a2, b1);
    let d4 = orient(a1, a2, b2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

/// Axis-aligned bounding rectangle.
#[derive(Clone, Copy, Debug)]
pub struct BoundingBox {
    pub min: Point2,
    pub max: Point2,
}

impl BoundingBox {
    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }
}

/// A domain with analytic boundary: the curve plus cached membership
/// polyline, bounding box and arclength.
#[derive(Clone, Debug)]
pub struct Domain {
    boundary: AnalyticCurve,
    polyline: Vec<Point2>,
    bbox: BoundingBox,
    arclength: f64,
    diameter: f64,
}

impl Domain {
    pub fn new(boundary: AnalyticCurve) -> Result<Self> {
        let m = VALIDATION_SAMPLES;
        let polyline: Vec<Point2> = (0..m)
            .map(|j| boundary.eval(j as f64 * TAU / m as f64))
            .collect();

        let mut min = polyline[0];
        let mut max = polyline[0];
        for p in &polyline {
            min.x = min.x.min(p.x);
            min.y = min.y.min(p.y);
            max.x = max.x.max(p.x);
            max.y = max.y.max(p.y);
        }
        let diameter = (max.x - min.x).hypot(max.y - min.y);
        let mx = BBOX_MARGIN_REL * (max.x - min.x);
        let my = BBOX_MARGIN_REL * (max.y - min.y);
        let bbox = BoundingBox {
            min: Point2::new(min.x - mx, min.y - my),
            max: Point2::new(max.x + mx, max.y + my),
        };

        let arclength = boundary.arclength()?;
        Ok(Domain {
            boundary,
            polyline,
            bbox,
            arclength,
            diameter,
        })
    }

    pub fn boundary(&self) -> &AnalyticCurve {
        &self.boundary
    }

    pub fn bounding_box(&self) -> BoundingBox {
        self.bbox
    }

    pub fn arclength(&self) -> f64 {
        self.arclength
    }

    /// Diagonal of the polyline's bounding box; the scale behind the
    /// ambiguous band and the distinctness guard.
    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn polyline(&self) -> &[Point2] {
        &self.polyline
    }

    /// Width of the boundary-ambiguous band in absolute units.
    pub fn ambiguous_band(&self) -> f64 {
        AMBIGUOUS_BAND_REL * self.diameter
    }

    /// Even-odd ray-crossing test against the cached polyline. Points within
    /// the ambiguous band of the polyline are reported outside.
    pub fn contains(&self, p: Point2) -> bool {
        if !p.is_finite() {
            return false;
        }
        let band = self.ambiguous_band();
        let m = self.polyline.len();
        let mut inside = false;
        for i in 0..m {
            let a = self.polyline[i];
            let b = self.polyline[(i + 1) % m];
            if point_segment_dist(p, a, b) < band {
                return false;
            }
            if (a.y > p.y) != (b.y > p.y) {
                let x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
                if x_cross > p.x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

fn point_segment_dist(p: Point2, a: Point2, b: Point2) -> f64 {
    let abx = b.x - a.x;
    let aby = b.y - a.y;
    let apx = p.x - a.x;
    let apy = p.y - a.y;
    let len2 = abx * abx + aby * aby;
    let s = if len2 > 0.0 {
        ((apx * abx + apy * aby) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (apx - s * abx).hypot(apy - s * aby)
}

/// 16-point Gauss-Legendre rule on [-1, 1], nodes found by Newton iteration
/// on the Legendre recurrence.
fn gauss_legendre_16() -> Vec<(f64, f64)> {
    gauss_legendre(16)
}

pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_deriv(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_deriv(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((x, w));
    }
    rule
}

/// Legendre P_n(x) and its derivative via the three-term recurrence.
fn legendre_with_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
