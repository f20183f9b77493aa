use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics;

pub type V2 = Vector2<f64>;

/// Position and the first three parameter derivatives of a wire at `s`.
#[derive(Debug, Clone, Copy)]
pub struct CurveJet {
    pub position: V2,
    pub d1: V2,
    pub d2: V2,
    pub d3: V2,
}

impl CurveJet {
    pub fn speed(&self) -> f64 {
        self.d1.norm()
    }

    /// Inward unit normal (left of the tangent for a counterclockwise curve).
    pub fn normal(&self) -> V2 {
        let t = self.d1 / self.d1.norm();
        V2::new(-t.y, t.x)
    }

    /// Signed curvature, positive where a counterclockwise curve is convex.
    pub fn curvature(&self) -> f64 {
        cross(self.d1, self.d2) / self.d1.norm().powi(3)
    }

    /// Derivative of the signed curvature with respect to the parameter.
    pub fn curvature_rate(&self) -> f64 {
        let sp2 = self.d1.norm_squared();
        let num = cross(self.d1, self.d2);
        let dnum = cross(self.d1, self.d3);
        let dsp2 = 2.0 * self.d1.dot(&self.d2);
        dnum / sp2.powf(1.5) - 1.5 * num * dsp2 / sp2.powf(2.5)
    }

    /// Derivative of the speed |γ'| with respect to the parameter.
    pub fn speed_rate(&self) -> f64 {
        self.d1.dot(&self.d2) / self.d1.norm()
    }
}

pub(crate) fn cross(a: V2, b: V2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Periodic cubic interpolating spline through closed sample points,
/// parametrized by cumulative chord length.
#[derive(Debug, Clone)]
struct PeriodicSpline {
    knots: Vec<f64>,
    values: Vec<V2>,
    second: Vec<V2>,
    period: f64,
}

impl PeriodicSpline {
    fn fit(points: &[V2]) -> Result<Self> {
        let n = points.len();
        if n < 4 {
            return Err(Error::InvalidWire("spline needs at least 4 points".into()));
        }
        let mut knots = Vec::with_capacity(n + 1);
        knots.push(0.0);
        for i in 0..n {
            let h = (points[(i + 1) % n] - points[i]).norm();
            if h <= 1e-14 {
                return Err(Error::InvalidWire(format!("repeated spline point at index {i}")));
            }
            knots.push(knots[i] + h);
        }
        let period = knots[n];
        let h: Vec<f64> = (0..n).map(|i| knots[i + 1] - knots[i]).collect();
        // cyclic tridiagonal system for the second derivatives
        let sub: Vec<f64> = (0..n).map(|i| h[(i + n - 1) % n]).collect();
        let diag: Vec<f64> = (0..n).map(|i| 2.0 * (h[(i + n - 1) % n] + h[i])).collect();
        let sup: Vec<f64> = h.clone();
        let mut second = vec![V2::zeros(); n];
        for c in 0..2 {
            let rhs: Vec<f64> = (0..n)
                .map(|i| {
                    let ip = (i + 1) % n;
                    let im = (i + n - 1) % n;
                    6.0 * ((points[ip][c] - points[i][c]) / h[i] - (points[i][c] - points[im][c]) / h[im])
                })
                .collect();
            let sol = solve_cyclic_tridiagonal(&sub, &diag, &sup, &rhs);
            for i in 0..n {
                second[i][c] = sol[i];
            }
        }
        Ok(PeriodicSpline {
            knots,
            values: points.to_vec(),
            second,
            period,
        })
    }

    fn eval(&self, s: f64) -> CurveJet {
        let n = self.values.len();
        let u = s.rem_euclid(self.period);
        let k = match self.knots.binary_search_by(|x| x.partial_cmp(&u).unwrap()) {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        };
        let h = self.knots[k + 1] - self.knots[k];
        let t = u - self.knots[k];
        let (y0, y1) = (self.values[k], self.values[(k + 1) % n]);
        let (m0, m1) = (self.second[k], self.second[(k + 1) % n]);
        let a = y0 / h - m0 * (h / 6.0);
        let b = y1 / h - m1 * (h / 6.0);
        let w = h - t;
        CurveJet {
            position: m0 * (w * w * w / (6.0 * h)) + m1 * (t * t * t / (6.0 * h)) + a * w + b * t,
            d1: -m0 * (w * w / (2.0 * h)) + m1 * (t * t / (2.0 * h)) - a + b,
            d2: m0 * (w / h) + m1 * (t / h),
            d3: (m1 - m0) / h,
        }
    }
}

/// Solves a cyclic tridiagonal system (Sherman–Morrison on top of Thomas).
fn solve_cyclic_tridiagonal(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let alpha = sup[n - 1]; // bottom-left corner
    let beta = sub[0]; // top-right corner
    let gamma = -diag[0];
    let mut b = diag.to_vec();
    b[0] -= gamma;
    b[n - 1] -= alpha * beta / gamma;
    let thomas = |r: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0; n];
        let mut d = vec![0.0; n];
        c[0] = sup[0] / b[0];
        d[0] = r[0] / b[0];
        for i in 1..n {
            let m = b[i] - sub[i] * c[i - 1];
            c[i] = if i < n - 1 { sup[i] / m } else { 0.0 };
            d[i] = (r[i] - sub[i] * d[i - 1]) / m;
        }
        let mut x = vec![0.0; n];
        x[n - 1] = d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = d[i] - c[i] * x[i + 1];
        }
        x
    };
    let x = thomas(rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = thomas(&u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

#[derive(Debug, Clone)]
enum Shape {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Spline(PeriodicSpline),
}

/// Wire description as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "lowercase")]
pub enum WireSpec {
    Circle {
        #[serde(default = "unit")]
        radius: f64,
    },
    Ellipse { a: f64, b: f64 },
    Spline { points: Vec<[f64; 2]> },
}

fn unit() -> f64 {
    1.0
}

impl WireSpec {
    pub fn build(&self) -> Result<WireCurve> {
        match self {
            WireSpec::Circle { radius } => WireCurve::circle(*radius),
            WireSpec::Ellipse { a, b } => WireCurve::ellipse(*a, *b),
            WireSpec::Spline { points } => {
                WireCurve::spline(&points.iter().map(|p| V2::new(p[0], p[1])).collect::<Vec<_>>())
            }
        }
    }
}

/// Smooth closed planar wire in the plane x₃ = 0, oriented counterclockwise.
///
/// Circles are parametrized by arc length, ellipses by the eccentric angle
/// and spline fits by cumulative chord length. Derivatives are analytic in
/// every case.
#[derive(Debug, Clone)]
pub struct WireCurve {
    shape: Shape,
    spec: WireSpec,
    max_curvature: f64,
}

impl WireCurve {
    pub fn circle(radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidWire(format!("circle radius {radius} must be positive")));
        }
        Self::finish(Shape::Circle { radius }, WireSpec::Circle { radius })
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
            return Err(Error::InvalidWire(format!("ellipse semi-axes ({a}, {b}) must be positive")));
        }
        Self::finish(Shape::Ellipse { a, b }, WireSpec::Ellipse { a, b })
    }

    /// Periodic cubic spline through `points` (closed; do not repeat the
    /// first point). Clockwise input is reversed.
    pub fn spline(points: &[V2]) -> Result<Self> {
        let mut pts = points.to_vec();
        if signed_area(&pts) < 0.0 {
            pts.reverse();
        }
        let spec = WireSpec::Spline {
            points: pts.iter().map(|p| [p.x, p.y]).collect(),
        };
        Self::finish(Shape::Spline(PeriodicSpline::fit(&pts)?), spec)
    }

    fn finish(shape: Shape, spec: WireSpec) -> Result<Self> {
        let mut wire = WireCurve {
            shape,
            spec,
            max_curvature: 0.0,
        };
        let n = 4096;
        let l = wire.period();
        wire.max_curvature = (0..n)
            .map(|i| wire.jet(l * i as f64 / n as f64).curvature().abs())
            .fold(0.0, f64::max);
        wire.validate()?;
        Ok(wire)
    }

    pub fn spec(&self) -> &WireSpec {
        &self.spec
    }

    /// Parameter period L.
    pub fn period(&self) -> f64 {
        match &self.shape {
            Shape::Circle { radius } => std::f64::consts::TAU * radius,
            Shape::Ellipse { .. } => std::f64::consts::TAU,
            Shape::Spline(sp) => sp.period,
        }
    }

    pub fn jet(&self, s: f64) -> CurveJet {
        match &self.shape {
            Shape::Circle { radius: r } => {
                let u = s / r;
                let (sn, cs) = u.sin_cos();
                CurveJet {
                    position: V2::new(r * cs, r * sn),
                    d1: V2::new(-sn, cs),
                    d2: V2::new(-cs, -sn) / *r,
                    d3: V2::new(sn, -cs) / (r * r),
                }
            }
            Shape::Ellipse { a, b } => {
                let (sn, cs) = s.sin_cos();
                CurveJet {
                    position: V2::new(a * cs, b * sn),
                    d1: V2::new(-a * sn, b * cs),
                    d2: V2::new(-a * cs, -b * sn),
                    d3: V2::new(a * sn, -b * cs),
                }
            }
            Shape::Spline(sp) => sp.eval(s),
        }
    }

    pub fn position(&self, s: f64) -> V2 {
        self.jet(s).position
    }

    pub fn normal(&self, s: f64) -> V2 {
        self.jet(s).normal()
    }

    pub fn curvature(&self, s: f64) -> f64 {
        self.jet(s).curvature()
    }

    pub fn max_abs_curvature(&self) -> f64 {
        self.max_curvature
    }

    pub fn length(&self) -> f64 {
        let l = self.period();
        let n = 64;
        (0..n)
            .map(|i| {
                let a = l * i as f64 / n as f64;
                let b = l * (i + 1) as f64 / n as f64;
                numerics::integrate(|s| self.jet(s).speed(), a, b, 1e-14)
            })
            .sum()
    }

    /// Area enclosed by the wire (Green's formula).
    pub fn enclosed_area(&self) -> f64 {
        let l = self.period();
        let n = 64;
        (0..n)
            .map(|i| {
                let a = l * i as f64 / n as f64;
                let b = l * (i + 1) as f64 / n as f64;
                numerics::integrate(
                    |s| {
                        let j = self.jet(s);
                        0.5 * cross(j.position, j.d1)
                    },
                    a,
                    b,
                    1e-14,
                )
            })
            .sum()
    }

    /// Checks regularity, orientation and simplicity on a dense sample.
    pub fn validate(&self) -> Result<()> {
        let n = 1024;
        let l = self.period();
        let pts: Vec<V2> = (0..n).map(|i| self.position(l * i as f64 / n as f64)).collect();
        for i in 0..n {
            let j = self.jet(l * i as f64 / n as f64);
            if j.speed() <= 1e-12 {
                return Err(Error::InvalidWire(format!("vanishing speed at sample {i}")));
            }
            let nu = j.normal();
            if nu.dot(&j.d1).abs() > 1e-12 * j.speed() || (nu.norm() - 1.0).abs() > 1e-12 {
                return Err(Error::InvalidWire("normal field is not orthonormal".into()));
            }
        }
        if signed_area(&pts) <= 0.0 {
            return Err(Error::InvalidWire("curve is not counterclockwise".into()));
        }
        if let Some((i, k)) = first_self_intersection(&pts) {
            return Err(Error::InvalidWire(format!("self-intersection between segments {i} and {k}")));
        }
        Ok(())
    }
}

pub(crate) fn signed_area(pts: &[V2]) -> f64 {
    let n = pts.len();
    0.5 * (0..n).map(|i| cross(pts[i], pts[(i + 1) % n])).sum::<f64>()
}

pub(crate) fn segments_intersect(p1: V2, p2: V2, q1: V2, q2: V2) -> bool {
    let d1 = cross(q2 - q1, p1 - q1);
    let d2 = cross(q2 - q1, p2 - q1);
    let d3 = cross(p2 - p1, q1 - p1);
    let d4 = cross(p2 - p1, q2 - p1);
    (d1 > 0.0) != (d2 > 0.0) && (d3 > 0.0) != (d4 > 0.0) && d1 != 0.0 && d2 != 0.0 && d3 != 0.0 && d4 != 0.0
}

/// Pairwise test of non-adjacent segments of a closed polyline.
pub(crate) fn first_self_intersection(pts: &[V2]) -> Option<(usize, usize)> {
    let n = pts.len();
    // bounding boxes for a cheap reject
    let bb: Vec<(V2, V2)> = (0..n)
        .map(|i| {
            let a = pts[i];
            let b = pts[(i + 1) % n];
            (V2::new(a.x.min(b.x), a.y.min(b.y)), V2::new(a.x.max(b.x), a.y.max(b.y)))
        })
        .collect();
    for i in 0..n {
        for k in i + 2..n {
            if i == 0 && k == n - 1 {
                continue;
            }
            let (lo1, hi1) = bb[i];
            let (lo2, hi2) = bb[k];
            if lo1.x > hi2.x || lo2.x > hi1.x || lo1.y > hi2.y || lo2.y > hi1.y {
                continue;
            }
            if segments_intersect(pts[i], pts[(i + 1) % n], pts[k], pts[(k + 1) % n]) {
                return Some((i, k));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn circle_jet_is_unit_speed() {
        let w = WireCurve::circle(2.0).unwrap();
        let j = w.jet(1.3);
        assert!((j.speed() - 1.0).abs() < 1e-15);
        assert!((j.curvature() - 0.5).abs() < 1e-14);
        assert!((w.length() - TAU * 2.0).abs() < 1e-12);
        let nu = j.normal();
        assert!((nu + j.position / 2.0).norm() < 1e-14, "normal points inward");
    }

    #[test]
    fn ellipse_curvature_extremes() {
        let w = WireCurve::ellipse(1.3, 0.8).unwrap();
        assert!((w.curvature(0.0) - 1.3 / 0.64).abs() < 1e-12);
        assert!((w.curvature(PI / 2.0) - 0.8 / 1.69).abs() < 1e-12);
        assert!((w.max_abs_curvature() - 1.3 / 0.64).abs() < 1e-9);
        assert!((w.enclosed_area() - PI * 1.3 * 0.8).abs() < 1e-11);
    }

    #[test]
    fn ellipse_derivatives_match_finite_differences() {
        let w = WireCurve::ellipse(1.3, 0.8).unwrap();
        let s = 0.7;
        let h = 1e-5;
        let j = w.jet(s);
        let fd_k = (w.curvature(s + h) - w.curvature(s - h)) / (2.0 * h);
        assert!((fd_k - j.curvature_rate()).abs() < 1e-8);
        let fd_sp = (w.jet(s + h).speed() - w.jet(s - h).speed()) / (2.0 * h);
        assert!((fd_sp - j.speed_rate()).abs() < 1e-9);
    }

    #[test]
    fn spline_reproduces_circle() {
        let n = 256;
        let pts: Vec<V2> = (0..n)
            .map(|i| {
                let a = TAU * i as f64 / n as f64;
                V2::new(a.cos(), a.sin())
            })
            .collect();
        let w = WireCurve::spline(&pts).unwrap();
        for i in 0..50 {
            let s = w.period() * (i as f64 + 0.37) / 50.0;
            let j = w.jet(s);
            assert!((j.position.norm() - 1.0).abs() < 1e-8);
            assert!((j.curvature() - 1.0).abs() < 1e-3);
        }
        // clockwise input is reoriented
        let rev: Vec<V2> = pts.iter().rev().cloned().collect();
        let w2 = WireCurve::spline(&rev).unwrap();
        assert!(w2.enclosed_area() > 0.0);
    }

    #[test]
    fn figure_eight_is_rejected() {
        let n = 200;
        let pts: Vec<V2> = (0..n)
            .map(|i| {
                let a = TAU * i as f64 / n as f64;
                V2::new(a.sin(), (2.0 * a).sin() * 0.5)
            })
            .collect();
        assert!(WireCurve::spline(&pts).is_err());
    }

    #[test]
    fn bad_parameters() {
        assert!(WireCurve::circle(0.0).is_err());
        assert!(WireCurve::ellipse(1.0, -1.0).is_err());
    }

    #[test]
    fn wire_spec_json() {
        let spec: WireSpec = serde_json::from_str(r#"{"kind":"ellipse","params":{"a":1.3,"b":0.8}}"#).unwrap();
        assert_eq!(spec, WireSpec::Ellipse { a: 1.3, b: 0.8 });
        let spec: WireSpec = serde_json::from_str(r#"{"kind":"circle","params":{}}"#).unwrap();
        assert_eq!(spec, WireSpec::Circle { radius: 1.0 });
    }
}
