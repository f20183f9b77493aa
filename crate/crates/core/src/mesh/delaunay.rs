//! Incremental Bowyer–Watson triangulation of a planar point set.

use crate::error::{Error, Result};
use crate::geometry::V2;

fn orient(a: V2, b: V2, c: V2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// Positive when `d` lies strictly inside the circumcircle of the
/// counterclockwise triangle `abc`.
fn in_circle(a: V2, b: V2, c: V2, d: V2) -> f64 {
    let (ax, ay) = (a.x - d.x, a.y - d.y);
    let (bx, by) = (b.x - d.x, b.y - d.y);
    let (cx, cy) = (c.x - d.x, c.y - d.y);
    (ax * ax + ay * ay) * (bx * cy - cx * by) - (bx * bx + by * by) * (ax * cy - cx * ay)
        + (cx * cx + cy * cy) * (ax * by - bx * ay)
}

struct Triangulation {
    pts: Vec<V2>,
    tris: Vec<[usize; 3]>,
    /// Neighbor across the edge opposite corner k.
    nbr: Vec<[Option<usize>; 3]>,
    alive: Vec<bool>,
    free: Vec<usize>,
    last: usize,
}

impl Triangulation {
    fn locate(&self, p: V2) -> Result<usize> {
        let mut t = self.last;
        if !self.alive[t] {
            t = self.alive.iter().position(|a| *a).unwrap_or(0);
        }
        for _ in 0..self.tris.len() * 4 + 16 {
            let tri = self.tris[t];
            let mut moved = false;
            for k in 0..3 {
                let (a, b) = (self.pts[tri[(k + 1) % 3]], self.pts[tri[(k + 2) % 3]]);
                if orient(a, b, p) < 0.0 {
                    if let Some(n) = self.nbr[t][k] {
                        t = n;
                        moved = true;
                        break;
                    }
                }
            }
            if !moved {
                return Ok(t);
            }
        }
        Err(Error::MeshingFailed("point location did not terminate".into()))
    }

    fn alloc(&mut self, tri: [usize; 3]) -> usize {
        if let Some(i) = self.free.pop() {
            self.tris[i] = tri;
            self.nbr[i] = [None; 3];
            self.alive[i] = true;
            i
        } else {
            self.tris.push(tri);
            self.nbr.push([None; 3]);
            self.alive.push(true);
            self.tris.len() - 1
        }
    }

    fn insert(&mut self, pi: usize) -> Result<()> {
        let p = self.pts[pi];
        let start = self.locate(p)?;
        // grow the cavity by breadth-first search over circumcircle hits
        let mut cavity = vec![start];
        let mut in_cavity = std::collections::HashSet::from([start]);
        let mut head = 0;
        while head < cavity.len() {
            let t = cavity[head];
            head += 1;
            for k in 0..3 {
                if let Some(n) = self.nbr[t][k] {
                    if in_cavity.contains(&n) {
                        continue;
                    }
                    let [a, b, c] = self.tris[n];
                    if in_circle(self.pts[a], self.pts[b], self.pts[c], p) > 0.0 {
                        in_cavity.insert(n);
                        cavity.push(n);
                    }
                }
            }
        }
        // boundary edges of the cavity, each with the outside neighbor
        let mut rim = Vec::new();
        for &t in &cavity {
            for k in 0..3 {
                let outside = self.nbr[t][k].filter(|n| !in_cavity.contains(n));
                if self.nbr[t][k].is_none() || outside.is_some() {
                    let tri = self.tris[t];
                    let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                    if orient(self.pts[a], self.pts[b], p) <= 0.0 {
                        return Err(Error::MeshingFailed(format!("cavity of point {pi} is not star-shaped")));
                    }
                    rim.push((a, b, outside));
                }
            }
        }
        for &t in &cavity {
            self.alive[t] = false;
            self.free.push(t);
        }
        let mut by_start = std::collections::HashMap::new();
        let mut created = Vec::with_capacity(rim.len());
        for &(a, b, outside) in &rim {
            let t = self.alloc([a, b, pi]);
            // corner 2 (pi) faces edge ab
            self.nbr[t][2] = outside;
            if let Some(o) = outside {
                for k in 0..3 {
                    let ot = self.tris[o];
                    if ot[(k + 1) % 3] == b && ot[(k + 2) % 3] == a {
                        self.nbr[o][k] = Some(t);
                    }
                }
            }
            by_start.insert(a, t);
            created.push((t, a, b));
        }
        for &(t, _, b) in &created {
            // edge (b, pi) is opposite corner 0 and shared with the triangle starting at b
            let n = *by_start
                .get(&b)
                .ok_or_else(|| Error::MeshingFailed("cavity rim is not a closed loop".into()))?;
            self.nbr[t][0] = Some(n);
            // in triangle n = [b, c, pi] the edge (pi, b) is opposite corner 1
            self.nbr[n][1] = Some(t);
        }
        self.last = created[0].0;
        Ok(())
    }
}

/// Delaunay triangulation of `points`; returns counterclockwise triangles.
/// Points are inserted in the given order.
pub fn triangulate(points: &[V2]) -> Result<Vec<[usize; 3]>> {
    if points.len() < 3 {
        return Err(Error::MeshingFailed("need at least 3 points".into()));
    }
    let mut lo = V2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    for p in points {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let c = (lo + hi) / 2.0;
    let span = (hi - lo).norm().max(1e-12);
    let n = points.len();
    let mut pts = points.to_vec();
    pts.push(c + V2::new(-20.0 * span, -20.0 * span));
    pts.push(c + V2::new(20.0 * span, -20.0 * span));
    pts.push(c + V2::new(0.0, 20.0 * span));
    let mut tr = Triangulation {
        pts,
        tris: vec![[n, n + 1, n + 2]],
        nbr: vec![[None; 3]],
        alive: vec![true],
        free: Vec::new(),
        last: 0,
    };
    for i in 0..n {
        tr.insert(i)?;
    }
    Ok(tr
        .tris
        .iter()
        .zip(&tr.alive)
        .filter(|(t, a)| **a && t.iter().all(|&v| v < n))
        .map(|(t, _)| *t)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_triangulation_is_delaunay() {
        let mut pts = Vec::new();
        for i in 0..12 {
            for k in 0..9 {
                let j = crate::numerics::halton2((i * 9 + k) as u64);
                pts.push(V2::new(i as f64 + 0.01 * j[0], k as f64 + 0.01 * j[1]));
            }
        }
        let tris = triangulate(&pts).unwrap();
        let area: f64 = tris.iter().map(|t| 0.5 * orient(pts[t[0]], pts[t[1]], pts[t[2]])).sum();
        assert!(tris.iter().all(|t| orient(pts[t[0]], pts[t[1]], pts[t[2]]) > 0.0));
        assert!((area - 11.0 * 8.0).abs() < 0.5);
        for t in &tris {
            for (i, p) in pts.iter().enumerate() {
                if !t.contains(&i) {
                    assert!(in_circle(pts[t[0]], pts[t[1]], pts[t[2]], *p) <= 1e-9);
                }
            }
        }
    }
}
