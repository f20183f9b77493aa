use nalgebra::Vector3;

use super::wire::{CurveJet, WireCurve, V2};
use crate::error::{domain_err, Error, Result};

pub type V3 = Vector3<f64>;

/// Result of projecting a point onto the tube surface ∂W.
#[derive(Debug, Clone, Copy)]
pub struct TubePoint {
    pub foot: V3,
    /// Unit normal of ∂W at `foot`, pointing out of W.
    pub normal: V3,
    /// Wire parameter of the meridian through `foot`.
    pub s: f64,
    /// Meridian angle, 0 at the inner equator and increasing toward +x₃.
    pub angle: f64,
}

/// Closed δ-neighborhood W of a planar wire.
#[derive(Debug, Clone)]
pub struct Tube {
    wire: WireCurve,
    delta: f64,
    seeds: Vec<(f64, V2)>,
}

const SEED_COUNT: usize = 512;

impl Tube {
    pub fn new(wire: WireCurve, delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(domain_err(format!("tube radius {delta} must be positive")));
        }
        if delta * wire.max_abs_curvature() >= 1.0 {
            return Err(domain_err(format!(
                "tube radius {delta} exceeds the curvature radius {}",
                1.0 / wire.max_abs_curvature()
            )));
        }
        let l = wire.period();
        let seeds = (0..SEED_COUNT)
            .map(|i| {
                let s = l * i as f64 / SEED_COUNT as f64;
                (s, wire.position(s))
            })
            .collect();
        let tube = Tube { wire, delta, seeds };
        tube.check_embedded()?;
        Ok(tube)
    }

    pub fn wire(&self) -> &WireCurve {
        &self.wire
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// 1 − δ·max|κ|, positive for a valid tube.
    pub fn curvature_margin(&self) -> f64 {
        1.0 - self.delta * self.wire.max_abs_curvature()
    }

    /// Distinct far-apart stretches of the wire must stay more than 2δ apart,
    /// otherwise ∂W touches itself.
    fn check_embedded(&self) -> Result<()> {
        let n = 720;
        let l = self.wire.period();
        let pts: Vec<(f64, V2)> = (0..n)
            .map(|i| {
                let s = l * i as f64 / n as f64;
                (s, self.wire.position(s))
            })
            .collect();
        // cumulative arc length for the separation test
        let mut arc = vec![0.0; n + 1];
        for i in 0..n {
            arc[i + 1] = arc[i] + (pts[(i + 1) % n].1 - pts[i].1).norm();
        }
        let total = arc[n];
        let min_sep = std::f64::consts::PI * self.delta;
        for i in 0..n {
            for k in i + 1..n {
                let d = arc[k] - arc[i];
                if d.min(total - d) < min_sep {
                    continue;
                }
                if (pts[i].1 - pts[k].1).norm() <= 2.0 * self.delta {
                    return Err(domain_err(format!(
                        "tube surface is not embedded: s = {} and s = {} are closer than 2δ",
                        pts[i].0, pts[k].0
                    )));
                }
            }
        }
        Ok(())
    }

    /// Point P(s, φ) = γ(s) + δ cosφ ν(s) + δ sinφ e₃.
    pub fn point(&self, s: f64, angle: f64) -> V3 {
        let j = self.wire.jet(s);
        self.point_from_jet(&j, angle)
    }

    pub(crate) fn point_from_jet(&self, j: &CurveJet, angle: f64) -> V3 {
        let nu = j.normal();
        let (sn, cs) = angle.sin_cos();
        V3::new(
            j.position.x + self.delta * cs * nu.x,
            j.position.y + self.delta * cs * nu.y,
            self.delta * sn,
        )
    }

    /// Outward unit normal of ∂W at P(s, φ).
    pub fn normal(&self, s: f64, angle: f64) -> V3 {
        let nu = self.wire.normal(s);
        let (sn, cs) = angle.sin_cos();
        V3::new(cs * nu.x, cs * nu.y, sn)
    }

    /// Partial derivatives (∂P/∂s, ∂P/∂φ).
    pub fn tangents(&self, s: f64, angle: f64) -> (V3, V3) {
        let j = self.wire.jet(s);
        let nu = j.normal();
        let (sn, cs) = angle.sin_cos();
        let f = 1.0 - self.delta * j.curvature() * cs;
        let ps = V3::new(j.d1.x * f, j.d1.y * f, 0.0);
        let pa = V3::new(-self.delta * sn * nu.x, -self.delta * sn * nu.y, self.delta * cs);
        (ps, pa)
    }

    /// Volume of W ∩ {x₃ ≥ 0} between the inner equator and latitude φ, per
    /// unit wire parameter, and its derivatives in s and φ.
    pub fn wedge_density(&self, s: f64, angle: f64) -> (f64, f64, f64) {
        let j = self.wire.jet(s);
        let d = self.delta;
        let sp = j.speed();
        let k = j.curvature();
        let (sn, cs) = angle.sin_cos();
        let seg = d * d * (angle / 2.0 - (2.0 * angle).sin() / 4.0);
        let cub = d * d * d * sn * sn * sn / 3.0;
        let val = sp * (seg - k * cub);
        let d_s = j.speed_rate() * (seg - k * cub) - sp * j.curvature_rate() * cub;
        let d_a = sp * (d * d * sn * sn - k * d * d * d * sn * sn * cs);
        (val, d_s, d_a)
    }

    /// Orthogonal projection of `p` onto ∂W.
    pub fn closest_point(&self, p: &V3) -> Result<TubePoint> {
        let q = V2::new(p.x, p.y);
        let (mut best, mut best_d) = (0usize, f64::INFINITY);
        for (i, (_, g)) in self.seeds.iter().enumerate() {
            let d = (g - q).norm_squared();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        let h = self.wire.period() / SEED_COUNT as f64;
        let s0 = self.seeds[best].0;
        let s = self.polish(q, s0, s0 - h, s0 + h)?;
        self.finish(p, s)
    }

    /// Projection starting from a nearby wire parameter; falls back to the
    /// global search when the local minimizer leaves the window.
    pub fn closest_point_near(&self, p: &V3, s_hint: f64) -> Result<TubePoint> {
        let q = V2::new(p.x, p.y);
        let h = 2.0 * self.wire.period() / SEED_COUNT as f64;
        match self.polish(q, s_hint, s_hint - h, s_hint + h) {
            Ok(s) if (s - s_hint).abs() < 0.999 * h => self.finish(p, s),
            _ => self.closest_point(p),
        }
    }

    /// Safeguarded Newton on g(s) = (γ(s) − q)·γ'(s) inside [lo, hi].
    fn polish(&self, q: V2, s0: f64, lo: f64, hi: f64) -> Result<f64> {
        let g = |s: f64| {
            let j = self.wire.jet(s);
            let r = j.position - q;
            (r.dot(&j.d1), j.d1.norm_squared() + r.dot(&j.d2))
        };
        let (mut lo, mut hi) = (lo, hi);
        let (glo, _) = g(lo);
        let (ghi, _) = g(hi);
        let bracketed = glo < 0.0 && ghi > 0.0;
        let mut s = s0;
        for _ in 0..50 {
            let (gv, dg) = g(s);
            let scale = self.wire.jet(s).d1.norm_squared();
            if gv.abs() <= 1e-15 * scale.max(1e-300) {
                return Ok(s);
            }
            if bracketed {
                if gv < 0.0 {
                    lo = s;
                } else {
                    hi = s;
                }
            }
            let mut next = if dg > 0.0 { s - gv / dg } else { f64::NAN };
            if !(next.is_finite() && next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() <= 1e-15 * (1.0 + s.abs()) {
                return Ok(next);
            }
            s = next;
        }
        Err(Error::NoConvergence {
            what: "tube closest point",
            iterations: 50,
            residuals: vec![g(s).0],
        })
    }

    fn finish(&self, p: &V3, s: f64) -> Result<TubePoint> {
        let j = self.wire.jet(s);
        let c = V3::new(j.position.x, j.position.y, 0.0);
        let d = p - c;
        let dist = d.norm();
        if dist <= 1e-12 {
            return Err(Error::AxisDegenerate);
        }
        let normal = d / dist;
        let nu = j.normal();
        let angle = normal.z.atan2(normal.x * nu.x + normal.y * nu.y);
        Ok(TubePoint {
            foot: c + normal * self.delta,
            normal,
            s: s.rem_euclid(self.wire.period()),
            angle,
        })
    }

    /// Distance from `p` to the wire curve Γ.
    pub fn distance_to_wire(&self, p: &V3) -> Result<f64> {
        let tp = self.closest_point(p)?;
        let c = self.wire.position(tp.s);
        Ok(((p.x - c.x).powi(2) + (p.y - c.y).powi(2) + p.z * p.z).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle_tube() -> Tube {
        Tube::new(WireCurve::circle(1.0).unwrap(), 0.1).unwrap()
    }

    #[test]
    fn equator_examples() {
        let t = circle_tube();
        let a = t.closest_point(&V3::new(1.2, 0.0, 0.0)).unwrap();
        assert!((a.foot - V3::new(1.1, 0.0, 0.0)).norm() < 1e-14);
        assert!((a.normal - V3::new(1.0, 0.0, 0.0)).norm() < 1e-14);
        assert!((a.angle.abs() - PI).abs() < 1e-14);
        let b = t.closest_point(&V3::new(0.8, 0.0, 0.0)).unwrap();
        assert!((b.foot - V3::new(0.9, 0.0, 0.0)).norm() < 1e-14);
        assert!((b.normal - V3::new(-1.0, 0.0, 0.0)).norm() < 1e-14);
        assert!(b.angle.abs() < 1e-14);
    }

    #[test]
    fn axis_point_is_degenerate() {
        let t = circle_tube();
        let (sn, cs) = 0.7f64.sin_cos();
        assert_eq!(t.closest_point(&V3::new(cs, sn, 0.0)).unwrap_err(), Error::AxisDegenerate);
    }

    #[test]
    fn point_and_projection_round_trip() {
        let t = Tube::new(WireCurve::ellipse(1.3, 0.8).unwrap(), 0.05).unwrap();
        for i in 0..40 {
            let s = 0.157 * i as f64;
            let a = -3.0 + 0.15 * i as f64;
            let p = t.point(s, a);
            let tp = t.closest_point(&(p + t.normal(s, a) * 0.03)).unwrap();
            assert!((tp.foot - p).norm() < 1e-11, "{i}");
            let da = (tp.angle - a + PI).rem_euclid(2.0 * PI) - PI;
            assert!(da.abs() < 1e-10);
        }
    }

    #[test]
    fn tangents_match_finite_differences() {
        let t = Tube::new(WireCurve::ellipse(1.3, 0.8).unwrap(), 0.05).unwrap();
        let (s, a, h) = (0.9, 0.4, 1e-6);
        let (ps, pa) = t.tangents(s, a);
        let fs = (t.point(s + h, a) - t.point(s - h, a)) / (2.0 * h);
        let fa = (t.point(s, a + h) - t.point(s, a - h)) / (2.0 * h);
        assert!((ps - fs).norm() < 1e-8);
        assert!((pa - fa).norm() < 1e-8);
        assert!(ps.dot(&t.normal(s, a)).abs() < 1e-14);
    }

    #[test]
    fn wedge_density_derivatives() {
        let t = Tube::new(WireCurve::ellipse(1.3, 0.8).unwrap(), 0.05).unwrap();
        let (s, a, h) = (0.9, 0.4, 1e-6);
        let (_, ds, da) = t.wedge_density(s, a);
        let fs = (t.wedge_density(s + h, a).0 - t.wedge_density(s - h, a).0) / (2.0 * h);
        let fa = (t.wedge_density(s, a + h).0 - t.wedge_density(s, a - h).0) / (2.0 * h);
        assert!((ds - fs).abs() < 1e-10);
        assert!((da - fa).abs() < 1e-10);
    }

    #[test]
    fn wedge_density_is_the_meridian_slice_integral() {
        let t = circle_tube();
        let a: f64 = 0.6;
        let d = 0.1;
        // ∫ (1 − t) sqrt(δ² − t²) dt over t ∈ [δ cos a, δ], t measured inward
        let v = crate::numerics::integrate(|x| (1.0 - x) * (d * d - x * x).max(0.0).sqrt(), d * a.cos(), d, 1e-15);
        assert!((t.wedge_density(0.3, a).0 - v).abs() < 1e-12);
    }

    #[test]
    fn rejects_thick_or_touching_tubes() {
        assert!(Tube::new(WireCurve::circle(1.0).unwrap(), 1.0).is_err());
        // peanut with a neck of width 0.24 and modest curvature
        let peanut: Vec<V2> = (0..400)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / 400.0;
                V2::new(2.0 * a.cos(), a.sin() * (0.12 + 0.88 * a.cos().powi(2)))
            })
            .collect();
        let w = WireCurve::spline(&peanut).unwrap();
        assert!(0.15 * w.max_abs_curvature() < 0.5);
        assert!(Tube::new(w.clone(), 0.1).is_ok());
        assert!(Tube::new(w, 0.15).is_err());
    }
}
