use std::collections::HashSet;

use super::delaunay::triangulate;
use super::surface::TriSurface;
use crate::error::{Error, Result};
use crate::geometry::{inner_offset_domain, PlanarDomain, Tube, V2, V3};
use crate::numerics::halton2;

/// D₀ sampled with boundary spacing close to `target_edge`.
pub fn plateau_domain(tube: &Tube, target_edge: f64) -> Result<PlanarDomain> {
    let coarse = inner_offset_domain(tube, 256)?;
    let n = ((coarse.perimeter() / target_edge).round() as usize).max(16);
    inner_offset_domain(tube, n)
}

/// Flat triangulation of `domain` at height 0 with boundary vertices on the
/// inner equator of ∂W.
pub fn init_mesh(domain: &PlanarDomain, tube: &Tube, target_edge: f64) -> Result<TriSurface> {
    if !(target_edge > 0.0 && target_edge <= 0.5 * tube.delta() + 1e-12) {
        return Err(Error::MeshingFailed(format!(
            "target edge {target_edge} must lie in (0, δ/2 = {}]",
            0.5 * tube.delta()
        )));
    }
    let h = target_edge;
    let boundary = domain.boundary();
    let (lo, hi) = domain.bounding_box();
    let mut interior = Vec::new();
    let dy = h * 3f64.sqrt() / 2.0;
    let rows = ((hi.y - lo.y) / dy).ceil() as usize + 1;
    let cols = ((hi.x - lo.x) / h).ceil() as usize + 2;
    let mut k = 0u64;
    for r in 0..rows {
        for c in 0..cols {
            let shift = if r % 2 == 1 { 0.5 * h } else { 0.0 };
            let j = halton2(k);
            k += 1;
            let p = V2::new(
                lo.x + c as f64 * h + shift + 1e-3 * h * (j[0] - 0.5),
                lo.y + r as f64 * dy + 1e-3 * h * (j[1] - 0.5),
            );
            if domain.contains(p) && domain.boundary_distance(p) >= 0.55 * h {
                interior.push(p);
            }
        }
    }
    let ni = interior.len();
    let nb = boundary.len();
    let mut pts = interior;
    pts.extend_from_slice(boundary);
    let all = triangulate(&pts)?;
    let mut tris: Vec<[usize; 3]> = all
        .into_iter()
        .filter(|t| {
            let c = (pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0;
            domain.contains(c)
        })
        .collect();
    let edges: HashSet<(usize, usize)> = tris
        .iter()
        .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
        .collect();
    for i in 0..nb {
        let (a, b) = (ni + i, ni + (i + 1) % nb);
        if !edges.contains(&(a, b)) {
            return Err(Error::MeshingFailed(format!("boundary edge {i} was not recovered")));
        }
    }
    smooth_interior(&mut pts, &tris, ni, 5);
    // drop unreferenced points, if any
    let mut used = vec![false; pts.len()];
    for t in &tris {
        for &v in t {
            used[v] = true;
        }
    }
    if used[ni..].iter().any(|u| !u) {
        return Err(Error::MeshingFailed("boundary vertex left out of the triangulation".into()));
    }
    let mut remap = vec![usize::MAX; pts.len()];
    let mut kept = Vec::new();
    for (i, p) in pts.iter().enumerate() {
        if used[i] {
            remap[i] = kept.len();
            kept.push(*p);
        }
    }
    for t in &mut tris {
        for v in t.iter_mut() {
            *v = remap[*v];
        }
    }
    let nk = kept.len();
    let first_boundary = nk - nb;
    let mut vertices = Vec::with_capacity(nk);
    let mut flags = vec![false; nk];
    let mut coords = vec![None; nk];
    for (i, p) in kept.iter().enumerate() {
        if i >= first_boundary {
            let tp = tube.closest_point(&V3::new(p.x, p.y, 0.0))?;
            let s = tp.s;
            vertices.push(tube.point(s, 0.0));
            flags[i] = true;
            coords[i] = Some([s, 0.0]);
        } else {
            vertices.push(V3::new(p.x, p.y, 0.0));
        }
    }
    let mesh = TriSurface {
        vertices,
        triangles: tris,
        boundary_flags: flags,
        boundary_coords: coords,
    };
    mesh.validate(None)?;
    Ok(mesh)
}

/// A few Jacobi sweeps of umbrella smoothing on interior points; a move is
/// kept only if every incident triangle stays positively oriented.
fn smooth_interior(pts: &mut [V2], tris: &[[usize; 3]], n_interior: usize, sweeps: usize) {
    let n = pts.len();
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ti, t) in tris.iter().enumerate() {
        for k in 0..3 {
            nbrs[t[k]].push(t[(k + 1) % 3]);
            incident[t[k]].push(ti);
        }
    }
    let orient = |p: &[V2], t: &[usize; 3]| {
        let (a, b, c) = (p[t[0]], p[t[1]], p[t[2]]);
        (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    };
    for _ in 0..sweeps {
        for i in 0..n_interior {
            if nbrs[i].is_empty() {
                continue;
            }
            let mean = nbrs[i].iter().map(|&j| pts[j]).sum::<V2>() / nbrs[i].len() as f64;
            let old = pts[i];
            pts[i] = mean;
            if incident[i].iter().any(|&t| orient(pts, &tris[t]) <= 0.0) {
                pts[i] = old;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WireCurve;
    use std::f64::consts::PI;

    #[test]
    fn flat_disc_mesh() {
        let tube = Tube::new(WireCurve::circle(1.0).unwrap(), 0.1).unwrap();
        let dom = plateau_domain(&tube, 0.05).unwrap();
        let m = init_mesh(&dom, &tube, 0.05).unwrap();
        assert!((m.area() - PI * 0.81).abs() < 2e-3, "{}", m.area());
        assert_eq!(m.boundary_count(), dom.len());
        assert!(m.min_quality() > 0.2, "{}", m.min_quality());
        m.validate(Some(&tube)).unwrap();
        assert_eq!(m.boundary_loop().unwrap().len(), dom.len());
    }
}
