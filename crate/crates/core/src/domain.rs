//! Bounded convex planar domains.
//!
//! Each domain carries an implicit level function (negative inside), a signed
//! distance, exact segment/boundary intersection for the grid closure, outward
//! normals, and a convex gauge `ψ` with `ψ <= 1` near `∂Ω` used to build
//! admissible initial guesses.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use libm::{fabs, hypot, pow, sqrt};

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    /// Disc of the given radius centred at the origin.
    Ball { radius: f64 },
    /// `x²/a² + y²/b² < 1`.
    Ellipse { a: f64, b: f64 },
    /// `|x/a|^p + |y/b|^p < 1` with `p >= 2`.
    Superellipse { a: f64, b: f64, p: f64 },
    /// Convex polygon, vertices counter-clockwise.
    Polygon { vertices: Vec<Point> },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidDomain(format!("{name} must be positive, got {v}")))
    }
}

impl DomainSpec {
    pub fn ball(radius: f64) -> Result<Self> {
        positive("radius", radius)?;
        Ok(DomainSpec::Ball { radius })
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        positive("a", a)?;
        positive("b", b)?;
        Ok(DomainSpec::Ellipse { a, b })
    }

    pub fn superellipse(a: f64, b: f64, p: f64) -> Result<Self> {
        positive("a", a)?;
        positive("b", b)?;
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::InvalidDomain(format!(
                "superellipse exponent must be >= 2 for a smooth convex boundary, got {p}"
            )));
        }
        Ok(DomainSpec::Superellipse { a, b, p })
    }

    /// Validates convexity and reorders the vertices counter-clockwise.
    pub fn polygon(mut vertices: Vec<Point>) -> Result<Self> {
        let m = vertices.len();
        if m < 3 {
            return Err(Error::InvalidDomain("a polygon needs at least 3 vertices".into()));
        }
        let area2: f64 = (0..m)
            .map(|i| {
                let (p, q) = (vertices[i], vertices[(i + 1) % m]);
                p[0] * q[1] - p[1] * q[0]
            })
            .sum();
        if area2 == 0.0 {
            return Err(Error::InvalidDomain("polygon has zero area".into()));
        }
        if area2 < 0.0 {
            vertices.reverse();
        }
        for i in 0..m {
            let (p, q, r) = (vertices[i], vertices[(i + 1) % m], vertices[(i + 2) % m]);
            let cross = (q[0] - p[0]) * (r[1] - q[1]) - (q[1] - p[1]) * (r[0] - q[0]);
            if !(cross > 0.0) {
                return Err(Error::InvalidDomain(
                    "only strictly convex polygons are supported".into(),
                ));
            }
        }
        Ok(DomainSpec::Polygon { vertices })
    }

    /// Axis-aligned bounding box `(min, max)`.
    pub fn bbox(&self) -> (Point, Point) {
        match self {
            DomainSpec::Ball { radius } => ([-radius, -radius], [*radius, *radius]),
            DomainSpec::Ellipse { a, b } | DomainSpec::Superellipse { a, b, .. } => {
                ([-a, -b], [*a, *b])
            }
            DomainSpec::Polygon { vertices } => {
                let mut lo = [f64::INFINITY; 2];
                let mut hi = [f64::NEG_INFINITY; 2];
                for v in vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Radius of the smallest origin-centred disc containing the domain.
    pub fn circumradius(&self) -> f64 {
        match self {
            DomainSpec::Ball { radius } => *radius,
            DomainSpec::Ellipse { a, b } => a.max(*b),
            DomainSpec::Superellipse { a, b, .. } => hypot(*a, *b),
            DomainSpec::Polygon { vertices } => {
                vertices.iter().fold(0.0, |m, v| m.max(hypot(v[0], v[1])))
            }
        }
    }

    /// Largest radius of exterior discs touching `∂Ω`. Every supported domain
    /// is convex, so exterior discs of any radius fit.
    pub fn r1(&self) -> f64 {
        f64::INFINITY
    }

    fn edges(vertices: &[Point]) -> impl Iterator<Item = (Point, f64, Point, Point)> + '_ {
        let m = vertices.len();
        (0..m).map(move |i| {
            let (p, q) = (vertices[i], vertices[(i + 1) % m]);
            let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
            let len = hypot(dx, dy);
            let n = [dy / len, -dx / len];
            (n, n[0] * p[0] + n[1] * p[1], p, q)
        })
    }

    /// Implicit function, negative exactly inside; zero on `∂Ω`.
    pub fn level(&self, x: Point) -> f64 {
        match self {
            DomainSpec::Ball { radius } => (x[0] * x[0] + x[1] * x[1]) / (radius * radius) - 1.0,
            DomainSpec::Ellipse { a, b } => (x[0] / a) * (x[0] / a) + (x[1] / b) * (x[1] / b) - 1.0,
            DomainSpec::Superellipse { a, b, p } => {
                pow(fabs(x[0] / a), *p) + pow(fabs(x[1] / b), *p) - 1.0
            }
            DomainSpec::Polygon { vertices } => Self::edges(vertices)
                .map(|(n, c, _, _)| n[0] * x[0] + n[1] * x[1] - c)
                .fold(f64::NEG_INFINITY, f64::max),
        }
    }

    pub fn contains(&self, x: Point) -> bool {
        self.level(x) < 0.0
    }

    /// Signed Euclidean distance to `∂Ω`, negative inside.
    pub fn sdf(&self, x: Point) -> f64 {
        match self {
            DomainSpec::Ball { radius } => hypot(x[0], x[1]) - radius,
            DomainSpec::Ellipse { a, b } => ellipse_sdf(*a, *b, x),
            DomainSpec::Superellipse { a, b, p } => superellipse_sdf(*a, *b, *p, x),
            DomainSpec::Polygon { vertices } => {
                let inside = self.level(x);
                if inside <= 0.0 {
                    inside
                } else {
                    Self::edges(vertices)
                        .map(|(_, _, p, q)| segment_distance(x, p, q))
                        .fold(f64::INFINITY, f64::min)
                }
            }
        }
    }

    /// Fraction `t ∈ (0, 1]` at which `x + t d` first leaves the domain, for
    /// `x` inside and `x + d` outside (or on `∂Ω`). Exact up to rounding:
    /// quadratic roots for balls and ellipses, line intersection for
    /// polygons, and bisection on the convex level function otherwise.
    pub fn crossing(&self, x: Point, d: Point) -> Result<f64> {
        if !self.contains(x) {
            return Err(Error::Grid(format!("crossing requested from outside point {x:?}")));
        }
        let conic = |sa: f64, sb: f64| {
            let (px, py, dx, dy) = (x[0] / sa, x[1] / sb, d[0] / sa, d[1] / sb);
            let qa = dx * dx + dy * dy;
            let qb = px * dx + py * dy;
            let qc = px * px + py * py - 1.0;
            // qc < 0 inside; the positive root of qa t² + 2 qb t + qc.
            let disc = sqrt(qb * qb - qa * qc);
            if qb >= 0.0 { -qc / (qb + disc) } else { (disc - qb) / qa }
        };
        let t = match self {
            DomainSpec::Ball { radius } => conic(*radius, *radius),
            DomainSpec::Ellipse { a, b } => conic(*a, *b),
            DomainSpec::Polygon { vertices } => Self::edges(vertices)
                .filter_map(|(n, c, _, _)| {
                    let nd = n[0] * d[0] + n[1] * d[1];
                    (nd > 0.0).then(|| (c - n[0] * x[0] - n[1] * x[1]) / nd)
                })
                .fold(f64::INFINITY, f64::min),
            DomainSpec::Superellipse { .. } => {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                let end = [x[0] + d[0], x[1] + d[1]];
                let end_level = self.level(end);
                if end_level < 0.0 && end_level > -1e-12 {
                    // `x + d` rounded onto the inside of a lattice point on ∂Ω.
                    return Ok(1.0);
                }
                if end_level < 0.0 {
                    return Err(Error::Grid(format!("segment end {end:?} is inside the domain")));
                }
                while hi - lo > 1e-17 {
                    let mid = 0.5 * (lo + hi);
                    if mid == lo || mid == hi {
                        break;
                    }
                    if self.level([x[0] + mid * d[0], x[1] + mid * d[1]]) < 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        };
        if !(t > 0.0) || t > 1.0 + 1e-12 {
            return Err(Error::Grid(format!(
                "segment from {x:?} along {d:?} does not leave the domain within one step (t={t})"
            )));
        }
        Ok(t.min(1.0))
    }

    /// Outward unit normal at (or near) a boundary point.
    pub fn normal(&self, x: Point) -> Point {
        let g = match self {
            DomainSpec::Ball { .. } => [x[0], x[1]],
            DomainSpec::Ellipse { a, b } => [x[0] / (a * a), x[1] / (b * b)],
            DomainSpec::Superellipse { a, b, p } => {
                let gx = pow(fabs(x[0] / a), p - 1.0) / a;
                let gy = pow(fabs(x[1] / b), p - 1.0) / b;
                [gx.copysign(x[0]), gy.copysign(x[1])]
            }
            DomainSpec::Polygon { vertices } => {
                let lv = self.level(x);
                let tol = 1e-9 * self.circumradius();
                let mut acc = [0.0, 0.0];
                for (n, c, _, _) in Self::edges(vertices) {
                    if n[0] * x[0] + n[1] * x[1] - c >= lv - tol {
                        acc[0] += n[0];
                        acc[1] += n[1];
                    }
                }
                acc
            }
        };
        let len = hypot(g[0], g[1]);
        [g[0] / len, g[1] / len]
    }

    /// Convex gauge with `ψ = 0` at the deepest point and `ψ >= 1` outside
    /// a neighbourhood of `∂Ω`, together with a length `L` such that
    /// `|x|² - L² ψ` is convex.
    pub fn gauge(&self) -> Gauge {
        match self {
            DomainSpec::Ball { radius } => Gauge {
                kind: GaugeKind::Quadratic { a: *radius, b: *radius },
                length: *radius,
            },
            DomainSpec::Ellipse { a, b } => Gauge {
                kind: GaugeKind::Quadratic { a: *a, b: *b },
                length: a.min(*b),
            },
            DomainSpec::Superellipse { a, b, p } => {
                let m = a.min(*b);
                Gauge {
                    kind: GaugeKind::Power { a: *a, b: *b, p: *p },
                    length: sqrt(2.0 * m * m / (p * (p - 1.0))),
                }
            }
            DomainSpec::Polygon { vertices } => {
                let m = vertices.len() as f64;
                let centre = vertices.iter().fold([0.0, 0.0], |c, v| {
                    [c[0] + v[0] / m, c[1] + v[1] / m]
                });
                let edges: Vec<(Point, f64)> =
                    Self::edges(vertices).map(|(n, c, _, _)| (n, c)).collect();
                let rho = edges
                    .iter()
                    .map(|(n, c)| c - n[0] * centre[0] - n[1] * centre[1])
                    .fold(f64::INFINITY, f64::min);
                // Largest eigenvalue of Σ n_k n_kᵀ bounds the Hessian of Σ (t_k)_+².
                let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
                for (n, _) in &edges {
                    sxx += n[0] * n[0];
                    sxy += n[0] * n[1];
                    syy += n[1] * n[1];
                }
                let top = 0.5 * (sxx + syy) + hypot(0.5 * (sxx - syy), sxy);
                Gauge {
                    kind: GaugeKind::EdgeBands { edges, rho },
                    length: rho / sqrt(top),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GaugeKind {
    Quadratic { a: f64, b: f64 },
    Power { a: f64, b: f64, p: f64 },
    /// `Σ_k (1 - d_k / ρ)_+²` with `d_k` the distance to the k-th edge line.
    EdgeBands { edges: Vec<(Point, f64)>, rho: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gauge {
    pub kind: GaugeKind,
    pub length: f64,
}

impl Gauge {
    pub fn eval(&self, x: Point) -> f64 {
        match &self.kind {
            GaugeKind::Quadratic { a, b } => (x[0] / a) * (x[0] / a) + (x[1] / b) * (x[1] / b),
            GaugeKind::Power { a, b, p } => pow(fabs(x[0] / a), *p) + pow(fabs(x[1] / b), *p),
            GaugeKind::EdgeBands { edges, rho } => edges
                .iter()
                .map(|(n, c)| {
                    let t = 1.0 - (c - n[0] * x[0] - n[1] * x[1]) / rho;
                    if t > 0.0 {
                        t * t
                    } else {
                        0.0
                    }
                })
                .sum(),
        }
    }
}

fn segment_distance(x: Point, p: Point, q: Point) -> f64 {
    let (dx, dy) = (q[0] - p[0], q[1] - p[1]);
    let t = (((x[0] - p[0]) * dx + (x[1] - p[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    hypot(x[0] - p[0] - t * dx, x[1] - p[1] - t * dy)
}

/// Distance from `(y0, y1)` in the closed first quadrant to the ellipse with
/// semi-axes `e0 >= e1`, by bisection on the closest-point parameter.
fn ellipse_distance_quadrant(e0: f64, e1: f64, y0: f64, y1: f64) -> f64 {
    if y1 > 0.0 {
        if y0 > 0.0 {
            let z0 = y0 / e0;
            let z1 = y1 / e1;
            let g = z0 * z0 + z1 * z1 - 1.0;
            if g == 0.0 {
                return 0.0;
            }
            let r0 = (e0 / e1) * (e0 / e1);
            let n0 = r0 * z0;
            let mut s0 = z1 - 1.0;
            let mut s1 = if g < 0.0 { 0.0 } else { hypot(n0, z1) - 1.0 };
            let mut s = 0.0;
            for _ in 0..2200 {
                s = 0.5 * (s0 + s1);
                if s == s0 || s == s1 {
                    break;
                }
                let ratio0 = n0 / (s + r0);
                let ratio1 = z1 / (s + 1.0);
                let gs = ratio0 * ratio0 + ratio1 * ratio1 - 1.0;
                if gs > 0.0 {
                    s0 = s;
                } else if gs < 0.0 {
                    s1 = s;
                } else {
                    break;
                }
            }
            let x0 = r0 * y0 / (s + r0);
            let x1 = y1 / (s + 1.0);
            hypot(x0 - y0, x1 - y1)
        } else {
            fabs(y1 - e1)
        }
    } else {
        let numer0 = e0 * y0;
        let denom0 = e0 * e0 - e1 * e1;
        if numer0 < denom0 {
            let xde0 = numer0 / denom0;
            let x0 = e0 * xde0;
            let x1 = e1 * sqrt(1.0 - xde0 * xde0);
            hypot(x0 - y0, x1)
        } else {
            fabs(y0 - e0)
        }
    }
}

fn ellipse_sdf(a: f64, b: f64, x: Point) -> f64 {
    let (y0, y1) = (fabs(x[0]), fabs(x[1]));
    let dist = if a >= b {
        ellipse_distance_quadrant(a, b, y0, y1)
    } else {
        ellipse_distance_quadrant(b, a, y1, y0)
    };
    let inside = (x[0] / a) * (x[0] / a) + (x[1] / b) * (x[1] / b) < 1.0;
    if inside {
        -dist
    } else {
        dist
    }
}

fn superellipse_sdf(a: f64, b: f64, p: f64, x: Point) -> f64 {
    let (y0, y1) = (fabs(x[0]), fabs(x[1]));
    let curve = |th: f64| {
        // cos(π/2) is not 0 in floating point, and the 2/p power amplifies it.
        let c = if th >= core::f64::consts::FRAC_PI_2 { 0.0 } else { libm::cos(th).max(0.0) };
        let s = libm::sin(th).max(0.0);
        [a * pow(c, 2.0 / p), b * pow(s, 2.0 / p)]
    };
    let dist2 = |th: f64| {
        let c = curve(th);
        (c[0] - y0) * (c[0] - y0) + (c[1] - y1) * (c[1] - y1)
    };
    const SAMPLES: usize = 1024;
    let step = core::f64::consts::FRAC_PI_2 / SAMPLES as f64;
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for k in 0..=SAMPLES {
        let d = dist2(k as f64 * step);
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    // Golden-section refinement on the bracketing interval.
    let (mut lo, mut hi) = (
        (best as f64 - 1.0).max(0.0) * step,
        (best as f64 + 1.0).min(SAMPLES as f64) * step,
    );
    let phi = 0.5 * (sqrt(5.0) - 1.0);
    for _ in 0..80 {
        let m1 = hi - phi * (hi - lo);
        let m2 = lo + phi * (hi - lo);
        if dist2(m1) < dist2(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let d = sqrt(best_d.min(dist2(0.5 * (lo + hi))));
    if pow(y0 / a, p) + pow(y1 / b, p) < 1.0 {
        -d
    } else {
        d
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DomainSpec::Ball { radius } => write!(f, "ball r={radius}"),
            DomainSpec::Ellipse { a, b } => write!(f, "ellipse a={a} b={b}"),
            DomainSpec::Superellipse { a, b, p } => write!(f, "superellipse a={a} b={b} p={p}"),
            DomainSpec::Polygon { vertices } => {
                write!(f, "polygon ")?;
                for (i, v) in vertices.iter().enumerate() {
                    if i > 0 {
                        write!(f, "; ")?;
                    }
                    write!(f, "{},{}", v[0], v[1])?;
                }
                Ok(())
            }
        }
    }
}

/// Text forms: `ball r=1`, `ellipse a=1 b=0.5`, `superellipse a=1 b=1 p=4`,
/// `polygon 1,0; 0,1; -1,0; 0,-1`.
impl FromStr for DomainSpec {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let text = text.trim();
        let bad = |msg: String| Error::InvalidDomain(format!("{msg} in `{text}`"));
        let (kind, rest) = text.split_once(char::is_whitespace).unwrap_or((text, ""));
        if kind == "polygon" {
            let mut vertices = Vec::new();
            for item in rest.split(';').map(str::trim).filter(|s| !s.is_empty()) {
                let (x, y) = item
                    .split_once(',')
                    .ok_or_else(|| bad(format!("vertex `{item}` is not x,y")))?;
                let parse = |s: &str| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| bad(format!("malformed coordinate `{s}`")))
                };
                vertices.push([parse(x)?, parse(y)?]);
            }
            return Self::polygon(vertices);
        }
        let mut params: Vec<(&str, f64)> = Vec::new();
        for word in rest.split_whitespace() {
            let (k, v) = word
                .split_once('=')
                .ok_or_else(|| bad(format!("expected key=value, got `{word}`")))?;
            let v = v
                .parse::<f64>()
                .map_err(|_| bad(format!("malformed number `{v}`")))?;
            params.push((k, v));
        }
        let get = |key: &str| {
            params
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| bad(format!("missing `{key}`")))
        };
        let allowed: &[&str] = match kind {
            "ball" => &["r"],
            "ellipse" => &["a", "b"],
            "superellipse" => &["a", "b", "p"],
            _ => return Err(bad(format!("unknown domain kind `{kind}`"))),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(bad(format!("unknown parameter `{k}`")));
        }
        match kind {
            "ball" => Self::ball(get("r")?),
            "ellipse" => Self::ellipse(get("a")?, get("b")?),
            _ => Self::superellipse(get("a")?, get("b")?, get("p")?),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    #[test]
    fn ellipse_sdf_on_axes_and_circle_limit() {
        let e = DomainSpec::ellipse(2.0, 1.0).unwrap();
        assert!((e.sdf([0.0, 0.0]) + 1.0).abs() < 1e-15);
        assert!((e.sdf([3.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!((e.sdf([0.0, 1.5]) - 0.5).abs() < 1e-15);
        let c = DomainSpec::ellipse(1.0, 1.0 + 1e-12).unwrap();
        for x in [[0.3, 0.4], [1.2, -0.9], [-0.1, 0.05]] {
            assert!((c.sdf(x) - (hypot(x[0], x[1]) - 1.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn superellipse_with_p2_is_an_ellipse() {
        let s = DomainSpec::superellipse(1.5, 1.0, 2.0).unwrap();
        let e = DomainSpec::ellipse(1.5, 1.0).unwrap();
        for x in [[0.3, 0.4], [1.2, -0.9], [-0.1, 0.05], [2.0, 2.0]] {
            assert!((s.sdf(x) - e.sdf(x)).abs() < 1e-9, "{x:?}");
        }
        assert!(DomainSpec::superellipse(1.0, 1.0, 1.5).is_err());
    }

    #[test]
    fn crossings_land_on_the_boundary() {
        let domains = [
            DomainSpec::ball(1.0).unwrap(),
            DomainSpec::ellipse(1.0, 0.5).unwrap(),
            DomainSpec::superellipse(1.0, 0.7, 4.0).unwrap(),
            DomainSpec::polygon(vec![[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]]).unwrap(),
        ];
        for dom in &domains {
            let x = [0.1, 0.05];
            for d in [[2.0, 0.0], [0.0, -2.0], [1.5, 1.5], [-1.3, 0.9]] {
                let t = dom.crossing(x, d).unwrap();
                let y = [x[0] + t * d[0], x[1] + t * d[1]];
                assert!(dom.sdf(y).abs() < 1e-12, "{dom} {d:?} {}", dom.sdf(y));
            }
        }
    }

    #[test]
    fn polygon_orientation_and_convexity() {
        let cw = DomainSpec::polygon(vec![[0.0, 1.0], [1.0, 0.0], [-1.0, -1.0]]).unwrap();
        assert!(cw.contains([0.0, 0.0]));
        assert!(DomainSpec::polygon(vec![[0.0, 0.0], [2.0, 0.0], [1.0, 0.2], [1.0, 2.0]]).is_err());
        let sq = DomainSpec::polygon(vec![[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])
            .unwrap();
        assert!((sq.sdf([0.5, 0.0]) + 0.5).abs() < 1e-15);
        assert!((sq.sdf([2.0, 2.0]) - libm::sqrt(2.0)).abs() < 1e-15);
        let n = sq.normal([1.0, 1.0]);
        assert!((n[0] - n[1]).abs() < 1e-15 && n[0] > 0.0);
    }

    #[test]
    fn gauges_vanish_inside_and_reach_one_on_the_boundary() {
        let e = DomainSpec::ellipse(1.0, 0.5).unwrap();
        let g = e.gauge();
        assert_eq!(g.eval([0.0, 0.0]), 0.0);
        assert!((g.eval([0.0, 0.5]) - 1.0).abs() < 1e-15);
        assert_eq!(g.length, 0.5);
        let sq = DomainSpec::polygon(vec![[1.0, 1.0], [-1.0, 1.0], [-1.0, -1.0], [1.0, -1.0]])
            .unwrap();
        let g = sq.gauge();
        assert_eq!(g.eval([0.0, 0.0]), 0.0);
        assert!((g.eval([1.0, 0.0]) - 1.0).abs() < 1e-15);
        assert!((g.length - libm::sqrt(0.5)).abs() < 1e-15);
    }

    #[test]
    fn text_round_trip() {
        for t in [
            "ball r=1",
            "ellipse a=1 b=0.5",
            "superellipse a=1 b=0.8 p=4",
            "polygon 1,0; 0,1; -1,0; 0,-1",
        ] {
            let d: DomainSpec = t.parse().unwrap();
            assert_eq!(d.to_string(), t);
        }
        assert!("ball radius=1".parse::<DomainSpec>().is_err());
        assert!("torus r=1".parse::<DomainSpec>().is_err());
        assert!("ellipse a=1".parse::<DomainSpec>().is_err());
    }
}
