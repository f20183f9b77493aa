use super::tube::Tube;
use super::wire::{cross, first_self_intersection, signed_area, V2};
use crate::error::{domain_err, Error, Result};
use crate::numerics::halton2;

/// Simple counterclockwise polygon.
#[derive(Debug, Clone)]
pub struct PlanarDomain {
    boundary: Vec<V2>,
    /// Wire parameter of each boundary vertex when the polygon was built as
    /// an offset of a wire.
    params: Option<Vec<f64>>,
    area: f64,
}

impl PlanarDomain {
    pub fn from_polyline(mut boundary: Vec<V2>) -> Result<Self> {
        if boundary.len() < 3 {
            return Err(domain_err("polygon needs at least 3 vertices"));
        }
        let mut area = signed_area(&boundary);
        if area < 0.0 {
            boundary.reverse();
            area = -area;
        }
        if area <= 0.0 {
            return Err(domain_err("polygon has zero area"));
        }
        if first_self_intersection(&boundary).is_some() {
            return Err(domain_err("polygon is not simple"));
        }
        Ok(PlanarDomain {
            boundary,
            params: None,
            area,
        })
    }

    pub fn boundary(&self) -> &[V2] {
        &self.boundary
    }

    pub fn params(&self) -> Option<&[f64]> {
        self.params.as_deref()
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn len(&self) -> usize {
        self.boundary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundary.is_empty()
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.boundary.len();
        (0..n).map(|i| (self.boundary[(i + 1) % n] - self.boundary[i]).norm()).sum()
    }

    /// Even-odd point-in-polygon test.
    pub fn contains(&self, p: V2) -> bool {
        let n = self.boundary.len();
        let mut inside = false;
        let mut j = n - 1;
        for i in 0..n {
            let (a, b) = (self.boundary[i], self.boundary[j]);
            if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
                inside = !inside;
            }
            j = i;
        }
        inside
    }

    /// Unsigned distance from `p` to the polygon boundary.
    pub fn boundary_distance(&self, p: V2) -> f64 {
        let n = self.boundary.len();
        (0..n)
            .map(|i| segment_distance(p, self.boundary[i], self.boundary[(i + 1) % n]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Symmetric Hausdorff distance between the two boundary polylines.
    pub fn hausdorff_distance(&self, other: &PlanarDomain) -> f64 {
        let one_way = |a: &PlanarDomain, b: &PlanarDomain| {
            a.boundary
                .iter()
                .map(|&p| b.boundary_distance(p))
                .fold(0.0, f64::max)
        };
        one_way(self, other).max(one_way(other, self))
    }

    /// True when `inner` lies in this domain with every inner vertex at
    /// least `margin` from this boundary. Returns the smallest clearance.
    pub fn contains_domain(&self, inner: &PlanarDomain, margin: f64) -> (bool, f64) {
        let mut clearance = f64::INFINITY;
        for &p in &inner.boundary {
            let d = if self.contains(p) { self.boundary_distance(p) } else { -self.boundary_distance(p) };
            clearance = clearance.min(d);
        }
        (clearance > margin, clearance)
    }

    pub fn bounding_box(&self) -> (V2, V2) {
        let mut lo = V2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for p in &self.boundary {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (lo, hi)
    }

    /// Radius of the largest inscribed disc, by a grid scan refined with a
    /// pattern search around the best candidate.
    pub fn inscribed_radius(&self) -> (f64, V2) {
        let (lo, hi) = self.bounding_box();
        let n = 64;
        let mut best = (0.0, (lo + hi) / 2.0);
        for i in 0..=n {
            for k in 0..=n {
                let p = V2::new(
                    lo.x + (hi.x - lo.x) * i as f64 / n as f64,
                    lo.y + (hi.y - lo.y) * k as f64 / n as f64,
                );
                if self.contains(p) {
                    let d = self.boundary_distance(p);
                    if d > best.0 {
                        best = (d, p);
                    }
                }
            }
        }
        let mut step = (hi - lo).norm() / n as f64;
        while step > 1e-12 {
            let mut moved = false;
            for dir in [V2::new(1.0, 0.0), V2::new(-1.0, 0.0), V2::new(0.0, 1.0), V2::new(0.0, -1.0)] {
                let p = best.1 + dir * step;
                if self.contains(p) {
                    let d = self.boundary_distance(p);
                    if d > best.0 {
                        best = (d, p);
                        moved = true;
                    }
                }
            }
            if !moved {
                step /= 2.0;
            }
        }
        best
    }

    /// `n` quasi-random points inside the domain (Halton points of the
    /// bounding box, rejection-filtered).
    pub fn sample_points(&self, n: usize) -> Vec<V2> {
        let (lo, hi) = self.bounding_box();
        let mut out = Vec::with_capacity(n);
        let mut i = 0u64;
        while out.len() < n {
            let h = halton2(i);
            i += 1;
            let p = V2::new(lo.x + (hi.x - lo.x) * h[0], lo.y + (hi.y - lo.y) * h[1]);
            if self.contains(p) {
                out.push(p);
            }
        }
        out
    }

    /// CSV rows `s,x,y` (s is the wire parameter when known, else the index).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,x,y\n");
        for (i, p) in self.boundary.iter().enumerate() {
            let s = self.params.as_ref().map_or(i as f64, |v| v[i]);
            out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", s, p.x, p.y));
        }
        out
    }
}

pub(crate) fn segment_distance(p: V2, a: V2, b: V2) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_squared();
    let t = if l2 > 0.0 { ((p - a).dot(&ab) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}

/// Wire parameters whose offset points γ(s) + off·ν(s) are equally spaced in
/// arc length along the offset curve.
pub fn uniform_offset_params(tube: &Tube, offset: f64, n: usize) -> Vec<f64> {
    let wire = tube.wire();
    let l = wire.period();
    let m = 64 * n.max(16);
    let speed = |s: f64| {
        let j = wire.jet(s);
        j.speed() * (1.0 - offset * j.curvature())
    };
    // Simpson-weighted cumulative arc length on a fine grid
    let mut cum = vec![0.0; m + 1];
    let h = l / m as f64;
    for i in 0..m {
        let a = i as f64 * h;
        cum[i + 1] = cum[i] + h / 6.0 * (speed(a) + 4.0 * speed(a + h / 2.0) + speed(a + h));
    }
    let total = cum[m];
    let mut out = Vec::with_capacity(n);
    let mut k = 0;
    for i in 0..n {
        let target = total * i as f64 / n as f64;
        while k < m - 1 && cum[k + 1] < target {
            k += 1;
        }
        let seg = cum[k + 1] - cum[k];
        let frac = if seg > 0.0 { (target - cum[k]) / seg } else { 0.0 };
        out.push((k as f64 + frac) * h);
    }
    out
}

/// Bounded component of the plane minus W: the inward offset of the wire by
/// δ, sampled at `n` points equally spaced in arc length.
pub fn inner_offset_domain(tube: &Tube, n: usize) -> Result<PlanarDomain> {
    if n < 8 {
        return Err(domain_err("offset polyline needs at least 8 points"));
    }
    if tube.curvature_margin() <= 0.0 {
        return Err(Error::OffsetCollapse("δ·max|κ| ≥ 1".into()));
    }
    let params = uniform_offset_params(tube, tube.delta(), n);
    let pts: Vec<V2> = params
        .iter()
        .map(|&s| {
            let j = tube.wire().jet(s);
            j.position + j.normal() * tube.delta()
        })
        .collect();
    if let Some((i, k)) = first_self_intersection(&pts) {
        return Err(Error::OffsetCollapse(format!("segments {i} and {k} intersect")));
    }
    let area = signed_area(&pts);
    if area <= 0.0 {
        return Err(Error::OffsetCollapse("offset polygon is inverted".into()));
    }
    Ok(PlanarDomain {
        boundary: pts,
        params: Some(params),
        area,
    })
}

/// Signed area of a closed polyline (shoelace).
pub fn shoelace(pts: &[V2]) -> f64 {
    let n = pts.len();
    0.5 * (0..n).map(|i| cross(pts[i], pts[(i + 1) % n])).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::wire::WireCurve;
    use std::f64::consts::PI;

    #[test]
    fn circle_offset_is_inscribed_polygon() {
        let tube = Tube::new(WireCurve::circle(1.0).unwrap(), 0.1).unwrap();
        let n = 2048;
        let d = inner_offset_domain(&tube, n).unwrap();
        let polygon = 0.5 * n as f64 * 0.81 * (2.0 * PI / n as f64).sin();
        assert!((d.area() - polygon).abs() < 1e-12);
        assert!((d.area() - shoelace(d.boundary())).abs() < 1e-12);
        for p in d.boundary() {
            assert!((p.norm() - 0.9).abs() < 1e-14);
        }
    }

    #[test]
    fn square_basics() {
        let sq = PlanarDomain::from_polyline(vec![
            V2::new(0.0, 0.0),
            V2::new(0.0, 1.0),
            V2::new(1.0, 1.0),
            V2::new(1.0, 0.0),
        ])
        .unwrap();
        assert!((sq.area() - 1.0).abs() < 1e-15);
        assert!(sq.contains(V2::new(0.3, 0.6)));
        assert!(!sq.contains(V2::new(1.3, 0.6)));
        let (r, c) = sq.inscribed_radius();
        assert!((r - 0.5).abs() < 1e-9 && (c - V2::new(0.5, 0.5)).norm() < 1e-8);
        assert_eq!(sq.sample_points(100).len(), 100);
    }

    #[test]
    fn offset_params_are_equally_spaced() {
        let tube = Tube::new(WireCurve::ellipse(1.3, 0.8).unwrap(), 0.05).unwrap();
        let d = inner_offset_domain(&tube, 500).unwrap();
        let b = d.boundary();
        let lens: Vec<f64> = (0..b.len()).map(|i| (b[(i + 1) % b.len()] - b[i]).norm()).collect();
        let mean = lens.iter().sum::<f64>() / lens.len() as f64;
        assert!(lens.iter().all(|l| (l / mean - 1.0).abs() < 1e-4));
    }
}
