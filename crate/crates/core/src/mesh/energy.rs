//! Area and enclosed-volume functionals of a graph sheet with their exact
//! gradients.
//!
//! The enclosed volume of an upper sheet is the column volume between the
//! plane x₃ = 0 and the sheet, minus the part of the tube W lying under
//! the sheet. The latter is integrated along the contact line with the
//! trapezoid rule in the wire parameter.

use super::surface::TriSurface;
use crate::error::{Error, Result};
use crate::geometry::{Tube, V3};
use crate::par::{self, Execution};

/// Area of one triangle and its gradient with respect to the three corners.
pub fn triangle_area_grad(a: V3, b: V3, c: V3) -> (f64, [V3; 3]) {
    let n = (b - a).cross(&(c - a));
    let len = n.norm();
    if len == 0.0 {
        return (0.0, [V3::zeros(); 3]);
    }
    let u = n / len;
    (0.5 * len, [0.5 * u.cross(&(c - b)), 0.5 * u.cross(&(a - c)), 0.5 * u.cross(&(b - a))])
}

/// Column volume z̄·S of one triangle (S the signed projected area) and its
/// gradient.
pub fn triangle_column_grad(a: V3, b: V3, c: V3) -> (f64, [V3; 3]) {
    let s = 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
    let zbar = (a.z + b.z + c.z) / 3.0;
    let g = |p: V3, q: V3| V3::new(0.5 * zbar * (p.y - q.y), 0.5 * zbar * (q.x - p.x), s / 3.0);
    (zbar * s, [g(b, c), g(c, a), g(a, b)])
}

fn assemble<F>(mesh: &TriSurface, exec: Execution, f: F) -> (f64, Vec<V3>)
where
    F: Fn(V3, V3, V3) -> (f64, [V3; 3]) + Sync + Send,
{
    let per = par::map_indexed(mesh.triangles.len(), exec, |t| {
        let [a, b, c] = mesh.triangles[t];
        f(mesh.vertices[a], mesh.vertices[b], mesh.vertices[c])
    });
    let mut grad = vec![V3::zeros(); mesh.vertices.len()];
    let mut total = 0.0;
    for (t, (v, g)) in per.iter().enumerate() {
        total += v;
        for k in 0..3 {
            grad[mesh.triangles[t][k]] += g[k];
        }
    }
    (total, grad)
}

pub fn area_and_gradient(mesh: &TriSurface, exec: Execution) -> (f64, Vec<V3>) {
    assemble(mesh, exec, triangle_area_grad)
}

pub fn column_volume_and_gradient(mesh: &TriSurface, exec: Execution) -> (f64, Vec<V3>) {
    assemble(mesh, exec, triangle_column_grad)
}

/// Wire-parameter increment from `a` to `b`, wrapped to (−L/2, L/2].
pub fn wrapped_ds(a: f64, b: f64, period: f64) -> f64 {
    let d = b - a;
    d - period * (d / period).round()
}

/// Tube volume under the sheet along the contact line, with partial
/// derivatives (∂/∂s, ∂/∂φ) for each vertex of `boundary_loop`.
pub fn wedge_volume(mesh: &TriSurface, tube: &Tube, boundary_loop: &[usize]) -> Result<(f64, Vec<[f64; 2]>)> {
    let n = boundary_loop.len();
    let period = tube.wire().period();
    let mut coords = Vec::with_capacity(n);
    for &v in boundary_loop {
        coords.push(mesh.boundary_coords[v].ok_or(Error::NoBoundary)?);
    }
    let dens: Vec<(f64, f64, f64)> = coords.iter().map(|c| tube.wedge_density(c[0], c[1])).collect();
    let mut total = 0.0;
    let mut grad = vec![[0.0; 2]; n];
    for i in 0..n {
        let j = (i + 1) % n;
        let ds = wrapped_ds(coords[i][0], coords[j][0], period);
        total += 0.5 * ds * (dens[i].0 + dens[j].0);
        // d(ds)/ds_i = −1, d(ds)/ds_j = +1
        grad[i][0] += -0.5 * (dens[i].0 + dens[j].0) + 0.5 * ds * dens[i].1;
        grad[j][0] += 0.5 * (dens[i].0 + dens[j].0) + 0.5 * ds * dens[j].1;
        grad[i][1] += 0.5 * ds * dens[i].2;
        grad[j][1] += 0.5 * ds * dens[j].2;
    }
    Ok((total, grad))
}

/// Change of area and enclosed volume between two meshes of equal
/// connectivity, summed term by term so that small changes are resolved
/// far below the rounding level of the totals.
pub fn energy_change(old: &TriSurface, new: &TriSurface, tube: &Tube, boundary_loop: &[usize]) -> Result<(f64, f64)> {
    let mut da = 0.0;
    let mut dv = 0.0;
    for t in &old.triangles {
        let p = t.map(|v| old.vertices[v]);
        let q = t.map(|v| new.vertices[v]);
        da += triangle_area_grad(q[0], q[1], q[2]).0 - triangle_area_grad(p[0], p[1], p[2]).0;
        dv += triangle_column_grad(q[0], q[1], q[2]).0 - triangle_column_grad(p[0], p[1], p[2]).0;
    }
    let period = tube.wire().period();
    let n = boundary_loop.len();
    let slice = |m: &TriSurface| -> Result<Vec<(f64, f64)>> {
        boundary_loop
            .iter()
            .map(|&v| {
                let [s, a] = m.boundary_coords[v].ok_or(Error::NoBoundary)?;
                Ok((s, tube.wedge_density(s, a).0))
            })
            .collect()
    };
    let (wo, wn) = (slice(old)?, slice(new)?);
    for i in 0..n {
        let j = (i + 1) % n;
        let so = wrapped_ds(wo[i].0, wo[j].0, period);
        let sn = wrapped_ds(wn[i].0, wn[j].0, period);
        dv -= 0.5 * (sn * (wn[i].1 + wn[j].1) - so * (wo[i].1 + wo[j].1));
    }
    Ok((da, dv))
}

/// Volume between x₃ = 0 and an upper sheet, inside Ω.
pub fn enclosed_volume(mesh: &TriSurface, tube: &Tube) -> Result<f64> {
    let (col, _) = column_volume_and_gradient(mesh, Execution::Sequential);
    let lp = mesh.boundary_loop()?;
    let (w, _) = wedge_volume(mesh, tube, &lp)?;
    Ok(col - w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_triangle_gradients() {
        let (a, b, c) = (V3::new(0.1, 0.0, 0.3), V3::new(1.0, 0.2, -0.1), V3::new(0.3, 0.9, 0.5));
        let h = 1e-6;
        let (_, ga) = triangle_area_grad(a, b, c);
        let (_, gv) = triangle_column_grad(a, b, c);
        for k in 0..3 {
            let mut e = V3::zeros();
            e[k] = h;
            let fd = (triangle_area_grad(a + e, b, c).0 - triangle_area_grad(a - e, b, c).0) / (2.0 * h);
            assert!((fd - ga[0][k]).abs() < 1e-9);
            let fd = (triangle_column_grad(a, b, c + e).0 - triangle_column_grad(a, b, c - e).0) / (2.0 * h);
            assert!((fd - gv[2][k]).abs() < 1e-9);
        }
    }

    #[test]
    fn column_volume_of_a_slanted_prism() {
        // z = 1 + x over the unit right triangle: volume 1/2 + 1/6
        let (a, b, c) = (V3::new(0.0, 0.0, 1.0), V3::new(1.0, 0.0, 2.0), V3::new(0.0, 1.0, 1.0));
        assert!((triangle_column_grad(a, b, c).0 - 2.0 / 3.0).abs() < 1e-15);
    }
}
