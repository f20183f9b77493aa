//! Diagnostics of solved sheets: contact angle, discrete mean curvature,
//! analytic cap meshes and the two-sheet asymmetry.

use serde::{Deserialize, Serialize};

use super::energy::triangle_area_grad;
use super::init::{init_mesh, plateau_domain};
use super::surface::{ProjectedLocator, TriSurface};
use crate::cap::CapSolution;
use crate::error::{Error, Result};
use crate::geometry::{PlanarDomain, Tube, V2, V3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactAngleStats {
    pub mean: f64,
    pub max_dev: f64,
}

/// Deviation from π/2 of the angle between the sheet and ∂W at each
/// boundary vertex, from area-weighted vertex normals.
pub fn measure_contact_angle(mesh: &TriSurface, tube: &Tube) -> Result<ContactAngleStats> {
    let normals = mesh.vertex_normals();
    let mut sum = 0.0;
    let mut max_dev: f64 = 0.0;
    let mut n = 0;
    for (i, flag) in mesh.boundary_flags.iter().enumerate() {
        if !flag {
            continue;
        }
        let [s, a] = mesh.boundary_coords[i].ok_or(Error::NoBoundary)?;
        let c = normals[i].dot(&tube.normal(s, a)).clamp(-1.0, 1.0);
        let dev = c.asin().abs();
        sum += dev;
        max_dev = max_dev.max(dev);
        n += 1;
    }
    if n == 0 {
        return Err(Error::NoBoundary);
    }
    Ok(ContactAngleStats {
        mean: sum / n as f64,
        max_dev,
    })
}

/// Per interior vertex: (vertex, discrete mean curvature, lumped area).
///
/// The curvature is the ratio of the area gradient to the volume gradient
/// along the latter, i.e. the cotangent Laplacian of the position
/// projected on the vertex normal and divided by the one-ring area.
pub fn mean_curvature_field(mesh: &TriSurface) -> Vec<(usize, f64, f64)> {
    let n = mesh.vertices.len();
    let mut ga = vec![V3::zeros(); n];
    let mut gv = vec![V3::zeros(); n];
    for t in &mesh.triangles {
        let (a, b, c) = (mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]);
        let (_, g) = triangle_area_grad(a, b, c);
        let nt = 0.5 * (b - a).cross(&(c - a));
        for k in 0..3 {
            ga[t[k]] += g[k];
            gv[t[k]] += nt / 3.0;
        }
    }
    let mass = mesh.vertex_areas();
    (0..n)
        .filter(|&i| !mesh.boundary_flags[i])
        .filter_map(|i| {
            let v2 = gv[i].norm_squared();
            (v2 > 0.0).then(|| (i, ga[i].dot(&gv[i]) / v2, mass[i]))
        })
        .collect()
}

/// Area-weighted mean of the discrete mean curvature over interior
/// vertices, as a magnitude.
pub fn estimate_lambda(mesh: &TriSurface) -> f64 {
    let field = mean_curvature_field(mesh);
    let w: f64 = field.iter().map(|f| f.2).sum();
    if w == 0.0 {
        return 0.0;
    }
    (field.iter().map(|f| f.1 * f.2).sum::<f64>() / w).abs()
}

/// Area-weighted mean and standard deviation of the curvature field.
pub fn curvature_spread(mesh: &TriSurface) -> (f64, f64) {
    let field = mean_curvature_field(mesh);
    let w: f64 = field.iter().map(|f| f.2).sum();
    let mean = field.iter().map(|f| f.1 * f.2).sum::<f64>() / w;
    let var = field.iter().map(|f| (f.1 - mean).powi(2) * f.2).sum::<f64>() / w;
    (mean, var.sqrt())
}

/// Upper sheet sampled from an exact cap over a circular wire: the flat
/// Plateau mesh is stretched radially onto the contact disc and lifted.
pub fn cap_mesh(tube: &Tube, cap: &CapSolution, target_edge: f64) -> Result<TriSurface> {
    let dom = plateau_domain(tube, target_edge)?;
    let mut mesh = init_mesh(&dom, tube, target_edge)?;
    let scale = cap.contact_radius / (1.0 - tube.delta());
    for (i, v) in mesh.vertices.iter_mut().enumerate() {
        if let Some([s, _]) = mesh.boundary_coords[i] {
            *v = tube.point(s, cap.theta);
            mesh.boundary_coords[i] = Some([s, cap.theta]);
        } else {
            let (x, y) = (v.x * scale, v.y * scale);
            *v = V3::new(x, y, cap.height(x.hypot(y)));
        }
    }
    Ok(mesh)
}

/// Largest distance of a vertex from the cap sphere.
pub fn cap_vertex_error(mesh: &TriSurface, cap: &CapSolution) -> f64 {
    let c = V3::new(0.0, 0.0, cap.z_c);
    mesh.vertices
        .iter()
        .map(|v| ((v - c).norm() - cap.r).abs())
        .fold(0.0, f64::max)
}

/// Triangulated spherical cap of radius `radius` and half-opening angle
/// `opening`, with vertices exactly on the sphere.
pub fn sphere_cap_mesh(radius: f64, opening: f64, target_edge: f64) -> Result<TriSurface> {
    let rim = radius * opening.sin();
    let n = ((2.0 * std::f64::consts::PI * rim / target_edge).round() as usize).max(16);
    let boundary: Vec<V2> = (0..n)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            V2::new(rim * a.cos(), rim * a.sin())
        })
        .collect();
    let dom = PlanarDomain::from_polyline(boundary)?;
    // a throwaway tube only supplies the wire for snapping; the rim is
    // replaced by exact sphere points below
    let tube = Tube::new(crate::geometry::WireCurve::circle(rim + 2.0 * target_edge)?, 2.0 * target_edge)?;
    let mut mesh = init_mesh(&dom, &tube, target_edge)?;
    for v in mesh.vertices.iter_mut() {
        let r = v.x.hypot(v.y).min(rim);
        let phi = v.y.atan2(v.x);
        let polar = (r / radius).asin();
        let rho = radius * polar.sin();
        *v = V3::new(rho * phi.cos(), rho * phi.sin(), radius * polar.cos());
    }
    mesh.boundary_coords = vec![None; mesh.vertices.len()];
    Ok(mesh)
}

/// Largest |u₊(x) − ū₋(x)| over interior sample points of `domain`, where
/// both sheets are stored as upper sheets (ū₋ = −u₋).
pub fn sheet_asymmetry(upper: &TriSurface, lower_reflected: &TriSurface, domain: &PlanarDomain, samples: usize) -> f64 {
    let lu = ProjectedLocator::new(upper);
    let ll = ProjectedLocator::new(lower_reflected);
    domain
        .sample_points(samples)
        .into_iter()
        .filter_map(|p| Some((lu.height(p)? - ll.height(p)?).abs()))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cap::cap_for_volume;
    use crate::geometry::WireCurve;

    #[test]
    fn sphere_curvature_estimate() {
        let r = 0.8;
        let m = sphere_cap_mesh(r, 1.0, r / 40.0).unwrap();
        let lam = estimate_lambda(&m);
        assert!((lam - 2.0 / r).abs() / (2.0 / r) < 0.02, "{lam}");
    }

    #[test]
    fn flat_disc_has_zero_curvature_and_right_angles() {
        let tube = Tube::new(WireCurve::circle(1.0).unwrap(), 0.1).unwrap();
        let dom = plateau_domain(&tube, 0.05).unwrap();
        let m = init_mesh(&dom, &tube, 0.05).unwrap();
        assert!(estimate_lambda(&m) < 1e-8);
        let ca = measure_contact_angle(&m, &tube).unwrap();
        assert!(ca.max_dev < 1e-12, "{ca:?}");
    }

    #[test]
    fn exact_cap_mesh_contact_angle() {
        let tube = Tube::new(WireCurve::circle(1.0).unwrap(), 0.1).unwrap();
        let cap = cap_for_volume(0.1, 0.05).unwrap();
        for h in [0.05, 0.025] {
            let m = cap_mesh(&tube, &cap, h).unwrap();
            assert!(cap_vertex_error(&m, &cap) < 1e-12);
            let ca = measure_contact_angle(&m, &tube).unwrap();
            assert!(ca.max_dev <= 2.0 * h, "{ca:?}");
        }
    }

    #[test]
    fn no_boundary_is_reported() {
        let m = sphere_cap_mesh(1.0, 0.5, 0.05).unwrap();
        let mut closed = m.clone();
        closed.boundary_flags = vec![false; m.vertices.len()];
        let tube = Tube::new(WireCurve::circle(1.0).unwrap(), 0.1).unwrap();
        assert_eq!(measure_contact_angle(&closed, &tube).unwrap_err(), Error::NoBoundary);
    }
}
