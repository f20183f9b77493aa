use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::{Tube, V2, V3};

/// Triangulated graph surface whose boundary vertices sit on ∂W.
#[derive(Debug, Clone, PartialEq)]
pub struct TriSurface {
    pub vertices: Vec<V3>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary_flags: Vec<bool>,
    /// `(s, angle)` tube coordinates of boundary vertices, `None` inside.
    pub boundary_coords: Vec<Option<[f64; 2]>>,
}

impl TriSurface {
    /// Surface without any boundary constraint (analytic samples, tests).
    pub fn unconstrained(vertices: Vec<V3>, triangles: Vec<[usize; 3]>) -> Self {
        let n = vertices.len();
        TriSurface {
            vertices,
            triangles,
            boundary_flags: vec![false; n],
            boundary_coords: vec![None; n],
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary_flags.iter().filter(|b| **b).count()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let (pa, pb, pc) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        0.5 * (pb - pa).cross(&(pc - pa)).norm()
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Inradius over circumradius; 0.5 for an equilateral triangle.
    pub fn triangle_quality(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        triangle_quality(self.vertices[a], self.vertices[b], self.vertices[c])
    }

    pub fn min_quality(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| self.triangle_quality(t))
            .fold(f64::INFINITY, f64::min)
    }

    /// Directed edges that belong to exactly one triangle.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        let mut count: HashMap<(usize, usize), (usize, (usize, usize))> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let e = count.entry((a.min(b), a.max(b))).or_insert((0, (a, b)));
                e.0 += 1;
            }
        }
        let mut out: Vec<(usize, usize)> = count.into_values().filter(|(c, _)| *c == 1).map(|(_, e)| e).collect();
        out.sort_unstable();
        out
    }

    /// Boundary vertices in loop order, following the triangle orientation.
    pub fn boundary_loop(&self) -> Result<Vec<usize>> {
        let edges = self.boundary_edges();
        if edges.is_empty() {
            return Err(Error::NoBoundary);
        }
        let next: HashMap<usize, usize> = edges.iter().cloned().collect();
        if next.len() != edges.len() {
            return Err(Error::MeshingFailed("boundary is not a simple loop".into()));
        }
        let start = edges[0].0;
        let mut out = vec![start];
        let mut v = next[&start];
        while v != start {
            out.push(v);
            if out.len() > edges.len() {
                return Err(Error::MeshingFailed("boundary loop does not close".into()));
            }
            v = *next
                .get(&v)
                .ok_or_else(|| Error::MeshingFailed("open boundary chain".into()))?;
        }
        if out.len() != edges.len() {
            return Err(Error::MeshingFailed("boundary has several components".into()));
        }
        Ok(out)
    }

    /// Area-weighted vertex normals.
    pub fn vertex_normals(&self) -> Vec<V3> {
        let mut n = vec![V3::zeros(); self.vertices.len()];
        for &[a, b, c] in &self.triangles {
            let f = (self.vertices[b] - self.vertices[a]).cross(&(self.vertices[c] - self.vertices[a]));
            n[a] += f;
            n[b] += f;
            n[c] += f;
        }
        n.into_iter()
            .map(|v| {
                let l = v.norm();
                if l > 0.0 {
                    v / l
                } else {
                    v
                }
            })
            .collect()
    }

    /// One third of the incident triangle areas.
    pub fn vertex_areas(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            let a = self.triangle_area(t) / 3.0;
            for &v in tri {
                m[v] += a;
            }
        }
        m
    }

    /// Checks manifoldness, orientation consistency and the tube constraint.
    pub fn validate(&self, tube: Option<&Tube>) -> Result<()> {
        let n = self.vertices.len();
        if self.boundary_flags.len() != n || self.boundary_coords.len() != n {
            return Err(Error::MeshingFailed("per-vertex arrays have mismatched lengths".into()));
        }
        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            if tri.iter().any(|&v| v >= n) || tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::MeshingFailed(format!("bad triangle {tri:?}")));
            }
            for k in 0..3 {
                let e = (tri[k], tri[(k + 1) % 3]);
                *directed.entry(e).or_insert(0) += 1;
                if directed[&e] > 1 {
                    return Err(Error::MeshingFailed(format!("edge {e:?} used twice in one direction")));
                }
            }
        }
        let on_boundary: Vec<bool> = {
            let mut b = vec![false; n];
            for (a, c) in self.boundary_edges() {
                b[a] = true;
                b[c] = true;
            }
            b
        };
        if on_boundary != self.boundary_flags && self.boundary_flags.iter().any(|f| *f) {
            return Err(Error::MeshingFailed("boundary flags disagree with the topology".into()));
        }
        if let Some(tube) = tube {
            for (i, v) in self.vertices.iter().enumerate() {
                if self.boundary_flags[i] {
                    let d = tube.distance_to_wire(v)?;
                    if (d - tube.delta()).abs() > 1e-9 {
                        return Err(Error::MeshingFailed(format!(
                            "boundary vertex {i} is {d} from the wire (tube radius {})",
                            tube.delta()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Wavefront OBJ text (x₃ up, 1-based faces).
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            let _ = writeln!(out, "v {:.16e} {:.16e} {:.16e}", v.x, v.y, v.z);
        }
        for t in &self.triangles {
            let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        out
    }

    /// Reflection x₃ ↦ −x₃ with orientation reversed.
    pub fn mirrored(&self) -> TriSurface {
        TriSurface {
            vertices: self.vertices.iter().map(|v| V3::new(v.x, v.y, -v.z)).collect(),
            triangles: self.triangles.iter().map(|t| [t[0], t[2], t[1]]).collect(),
            boundary_flags: self.boundary_flags.clone(),
            boundary_coords: self.boundary_coords.iter().map(|c| c.map(|[s, a]| [s, -a])).collect(),
        }
    }
}

pub fn triangle_quality(a: V3, b: V3, c: V3) -> f64 {
    let (la, lb, lc) = ((b - c).norm(), (c - a).norm(), (a - b).norm());
    let area = 0.5 * (b - a).cross(&(c - a)).norm();
    let denom = (la + lb + lc) * la * lb * lc;
    if denom <= 0.0 {
        0.0
    } else {
        8.0 * area * area / denom
    }
}

/// Uniform-grid point location in the x₁x₂ projection of a surface.
#[derive(Debug, Clone)]
pub struct ProjectedLocator {
    lo: V2,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<usize>>,
    corners: Vec<[V3; 3]>,
}

impl ProjectedLocator {
    pub fn new(surface: &TriSurface) -> Self {
        let corners: Vec<[V3; 3]> = surface
            .triangles
            .iter()
            .map(|t| [surface.vertices[t[0]], surface.vertices[t[1]], surface.vertices[t[2]]])
            .collect();
        let mut lo = V2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for c in &corners {
            for p in c {
                lo = lo.inf(&p.xy());
                hi = hi.sup(&p.xy());
            }
        }
        if corners.is_empty() {
            lo = V2::zeros();
            hi = V2::new(1.0, 1.0);
        }
        let span = (hi - lo).sup(&V2::new(1e-12, 1e-12));
        let cells = (corners.len().max(1) as f64).sqrt().ceil().max(1.0);
        let cell = span.x.max(span.y) / cells;
        let nx = ((span.x / cell).ceil() as usize).max(1);
        let ny = ((span.y / cell).ceil() as usize).max(1);
        let mut buckets = vec![Vec::new(); nx * ny];
        for (t, c) in corners.iter().enumerate() {
            let mut blo = V2::new(f64::INFINITY, f64::INFINITY);
            let mut bhi = -blo;
            for p in c {
                blo = blo.inf(&p.xy());
                bhi = bhi.sup(&p.xy());
            }
            let i0 = (((blo.x - lo.x) / cell).floor().max(0.0) as usize).min(nx - 1);
            let i1 = (((bhi.x - lo.x) / cell).floor().max(0.0) as usize).min(nx - 1);
            let k0 = (((blo.y - lo.y) / cell).floor().max(0.0) as usize).min(ny - 1);
            let k1 = (((bhi.y - lo.y) / cell).floor().max(0.0) as usize).min(ny - 1);
            for i in i0..=i1 {
                for k in k0..=k1 {
                    buckets[k * nx + i].push(t);
                }
            }
        }
        ProjectedLocator {
            lo,
            cell,
            nx,
            ny,
            buckets,
            corners,
        }
    }

    /// Triangle index and barycentric weights of the first triangle whose
    /// projection contains `p`.
    pub fn locate(&self, p: V2) -> Option<(usize, [f64; 3])> {
        let fi = (p.x - self.lo.x) / self.cell;
        let fk = (p.y - self.lo.y) / self.cell;
        if fi < -1e-9 || fk < -1e-9 {
            return None;
        }
        let i = (fi.max(0.0) as usize).min(self.nx - 1);
        let k = (fk.max(0.0) as usize).min(self.ny - 1);
        if fi > self.nx as f64 + 1e-9 || fk > self.ny as f64 + 1e-9 {
            return None;
        }
        for &t in &self.buckets[k * self.nx + i] {
            let [a, b, c] = self.corners[t];
            if let Some(w) = barycentric(p, a.xy(), b.xy(), c.xy()) {
                if w.iter().all(|x| *x >= -1e-12) {
                    return Some((t, w));
                }
            }
        }
        None
    }

    /// Height of the surface above `p`, if the vertical line meets it.
    pub fn height(&self, p: V2) -> Option<f64> {
        self.locate(p).map(|(t, w)| {
            let c = &self.corners[t];
            w[0] * c[0].z + w[1] * c[1].z + w[2] * c[2].z
        })
    }
}

pub(crate) fn barycentric(p: V2, a: V2, b: V2, c: V2) -> Option<[f64; 3]> {
    let det = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    if det.abs() < 1e-300 {
        return None;
    }
    let l1 = ((b.x - p.x) * (c.y - p.y) - (c.x - p.x) * (b.y - p.y)) / det;
    let l2 = ((c.x - p.x) * (a.y - p.y) - (a.x - p.x) * (c.y - p.y)) / det;
    Some([l1, l2, 1.0 - l1 - l2])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> TriSurface {
        TriSurface::unconstrained(
            vec![
                V3::new(0.0, 0.0, 0.0),
                V3::new(1.0, 0.0, 0.0),
                V3::new(1.0, 1.0, 1.0),
                V3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
    }

    #[test]
    fn loop_and_locator() {
        let s = square();
        assert_eq!(s.boundary_loop().unwrap(), vec![0, 1, 2, 3]);
        let loc = ProjectedLocator::new(&s);
        let h = loc.height(V2::new(0.75, 0.25)).unwrap();
        assert!((h - 0.25).abs() < 1e-15);
        assert!(loc.height(V2::new(1.5, 0.5)).is_none());
        assert!((triangle_quality(V3::zeros(), V3::x(), V3::new(0.5, 0.75f64.sqrt(), 0.0)) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn mirror_keeps_projection_orientation_reversed() {
        let m = square().mirrored();
        assert_eq!(m.triangles[0], [0, 2, 1]);
        assert_eq!(m.vertices[2].z, -1.0);
    }
}
