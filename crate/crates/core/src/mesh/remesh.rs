//! Edge split and collapse toward a target edge length.

use std::collections::{HashMap, HashSet};

use super::energy::wrapped_ds;
use super::surface::{triangle_quality, TriSurface};
use crate::error::{Error, Result};
use crate::geometry::Tube;

pub const SPLIT_FACTOR: f64 = 1.6;
pub const COLLAPSE_FACTOR: f64 = 0.4;
pub const QUALITY_FLOOR: f64 = 0.05;

fn edge_map(tris: &[[usize; 3]]) -> HashMap<(usize, usize), Vec<usize>> {
    let mut m: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (ti, t) in tris.iter().enumerate() {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            m.entry((a.min(b), a.max(b))).or_default().push(ti);
        }
    }
    m
}

/// Rotates `t` so that it starts with the directed edge (a, b), if present.
fn rotate_to(t: [usize; 3], a: usize, b: usize) -> Option<[usize; 3]> {
    (0..3)
        .map(|k| [t[k], t[(k + 1) % 3], t[(k + 2) % 3]])
        .find(|r| r[0] == a && r[1] == b)
}

fn split_pass(mesh: &mut TriSurface, tube: &Tube, max_len: f64) -> bool {
    let edges = edge_map(&mesh.triangles);
    let mut cands: Vec<((usize, usize), f64)> = edges
        .keys()
        .map(|&(a, b)| ((a, b), (mesh.vertices[a] - mesh.vertices[b]).norm()))
        .filter(|e| e.1 > max_len)
        .collect();
    cands.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
    let mut touched = vec![false; mesh.triangles.len()];
    let period = tube.wire().period();
    let mut changed = false;
    for ((a, b), _) in cands {
        let owners = &edges[&(a, b)];
        if owners.iter().any(|&t| touched[t]) {
            continue;
        }
        let boundary_edge = owners.len() == 1;
        let m = mesh.vertices.len();
        if boundary_edge {
            let (Some([sa, pa]), Some([sb, pb])) = (mesh.boundary_coords[a], mesh.boundary_coords[b]) else {
                continue;
            };
            let s = sa + 0.5 * wrapped_ds(sa, sb, period);
            let phi = 0.5 * (pa + pb);
            mesh.vertices.push(tube.point(s, phi));
            mesh.boundary_flags.push(true);
            mesh.boundary_coords.push(Some([s.rem_euclid(period), phi]));
        } else {
            mesh.vertices.push(0.5 * (mesh.vertices[a] + mesh.vertices[b]));
            mesh.boundary_flags.push(false);
            mesh.boundary_coords.push(None);
        }
        for &ti in owners {
            touched[ti] = true;
            let t = mesh.triangles[ti];
            let r = rotate_to(t, a, b).or_else(|| rotate_to(t, b, a)).expect("edge belongs to triangle");
            let (p, q, c) = (r[0], r[1], r[2]);
            mesh.triangles[ti] = [p, m, c];
            mesh.triangles.push([m, q, c]);
            touched.push(true);
        }
        changed = true;
    }
    changed
}

fn collapse_pass(mesh: &mut TriSurface, min_len: f64) -> bool {
    let n = mesh.vertices.len();
    let mut nbrs: Vec<HashSet<usize>> = vec![HashSet::new(); n];
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ti, t) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            nbrs[t[k]].insert(t[(k + 1) % 3]);
            nbrs[t[k]].insert(t[(k + 2) % 3]);
            incident[t[k]].push(ti);
        }
    }
    let bverts: Vec<usize> = (0..n).filter(|&i| mesh.boundary_flags[i]).collect();
    let depth = |i: usize| {
        let v = mesh.vertices[i];
        bverts
            .iter()
            .map(|&b| (mesh.vertices[b].xy() - v.xy()).norm())
            .fold(f64::INFINITY, f64::min)
    };
    let mut cands: Vec<(usize, usize, f64)> = Vec::new();
    for (i, ns) in nbrs.iter().enumerate() {
        for &j in ns {
            if i < j && !mesh.boundary_flags[i] && !mesh.boundary_flags[j] {
                let l = (mesh.vertices[i] - mesh.vertices[j]).norm();
                if l < min_len {
                    cands.push((i, j, l));
                }
            }
        }
    }
    cands.sort_by(|x, y| x.2.total_cmp(&y.2).then((x.0, x.1).cmp(&(y.0, y.1))));
    let mut locked = vec![false; n];
    let mut dead_tri = vec![false; mesh.triangles.len()];
    let mut removed = vec![false; n];
    let mut changed = false;
    for (i, j, _) in cands {
        if locked[i] || locked[j] {
            continue;
        }
        let (keep, gone) = if depth(i) >= depth(j) { (i, j) } else { (j, i) };
        if nbrs[i].intersection(&nbrs[j]).count() != 2 {
            continue;
        }
        let pk = mesh.vertices[keep];
        let mut ok = true;
        let mut updates = Vec::new();
        for &ti in &incident[gone] {
            let t = mesh.triangles[ti];
            if t.contains(&keep) {
                continue;
            }
            let nt = t.map(|v| if v == gone { keep } else { v });
            let p = nt.map(|v| if v == keep { pk } else { mesh.vertices[v] });
            let orient = (p[1].x - p[0].x) * (p[2].y - p[0].y) - (p[1].y - p[0].y) * (p[2].x - p[0].x);
            if orient <= 0.0 || triangle_quality(p[0], p[1], p[2]) < QUALITY_FLOOR {
                ok = false;
                break;
            }
            updates.push((ti, nt));
        }
        if !ok {
            continue;
        }
        for &ti in &incident[gone] {
            if mesh.triangles[ti].contains(&keep) {
                dead_tri[ti] = true;
            }
        }
        for (ti, nt) in updates {
            mesh.triangles[ti] = nt;
        }
        removed[gone] = true;
        for v in nbrs[gone].iter().chain(nbrs[keep].iter()) {
            locked[*v] = true;
        }
        locked[keep] = true;
        locked[gone] = true;
        changed = true;
    }
    if !changed {
        return false;
    }
    let mut remap = vec![usize::MAX; n];
    let mut k = 0;
    for i in 0..n {
        if !removed[i] {
            remap[i] = k;
            k += 1;
        }
    }
    let keep_idx: Vec<usize> = (0..n).filter(|&i| !removed[i]).collect();
    mesh.vertices = keep_idx.iter().map(|&i| mesh.vertices[i]).collect();
    mesh.boundary_flags = keep_idx.iter().map(|&i| mesh.boundary_flags[i]).collect();
    mesh.boundary_coords = keep_idx.iter().map(|&i| mesh.boundary_coords[i]).collect();
    mesh.triangles = mesh
        .triangles
        .iter()
        .zip(&dead_tri)
        .filter(|(_, d)| !**d)
        .map(|(t, _)| t.map(|v| remap[v]))
        .collect();
    true
}

/// One split pass and one collapse pass. Returns the new mesh and whether
/// anything changed; fails if the quality floor is violated afterwards.
pub fn remesh(mesh: &TriSurface, tube: &Tube, target_edge: f64) -> Result<(TriSurface, bool)> {
    let mut out = mesh.clone();
    let split = split_pass(&mut out, tube, SPLIT_FACTOR * target_edge);
    let collapsed = collapse_pass(&mut out, COLLAPSE_FACTOR * target_edge);
    let q = out.min_quality();
    if q < QUALITY_FLOOR {
        return Err(Error::MeshDegenerate { quality: q });
    }
    Ok((out, split || collapsed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WireCurve;
    use crate::mesh::init::{init_mesh, plateau_domain};

    #[test]
    fn uniform_mesh_is_left_alone() {
        let tube = Tube::new(WireCurve::circle(1.0).unwrap(), 0.1).unwrap();
        let dom = plateau_domain(&tube, 0.05).unwrap();
        let m = init_mesh(&dom, &tube, 0.05).unwrap();
        let (_, changed) = remesh(&m, &tube, 0.05).unwrap();
        assert!(!changed);
    }

    #[test]
    fn coarse_target_collapses_and_fine_target_splits() {
        let tube = Tube::new(WireCurve::circle(1.0).unwrap(), 0.1).unwrap();
        let dom = plateau_domain(&tube, 0.05).unwrap();
        let m = init_mesh(&dom, &tube, 0.05).unwrap();
        let (fine, changed) = remesh(&m, &tube, 0.025).unwrap();
        assert!(changed && fine.vertices.len() > m.vertices.len());
        fine.validate(Some(&tube)).unwrap();
        // boundary midpoints land on the arc, so the area can only grow
        assert!(fine.area() >= m.area() && fine.area() - m.area() < 1e-3);
        let (coarse, changed) = remesh(&m, &tube, 0.15).unwrap();
        assert!(changed && coarse.vertices.len() < m.vertices.len());
        coarse.validate(Some(&tube)).unwrap();
        assert!((coarse.area() - m.area()).abs() < 1e-6);
    }
}
