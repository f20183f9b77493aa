//! Area minimization under a volume constraint with contact-line vertices
//! sliding on ∂W.
//!
//! Interior vertices move vertically (the sheet is a graph), boundary
//! vertices carry tube coordinates (s, φ): a step moves them in the tangent
//! plane of ∂W and reprojects. The constraint is handled by an augmented
//! Lagrangian Φ = A − μ(V − V₀) + ρ/2 (V − V₀)²; the inner loop is a
//! preconditioned descent with backtracking line search. The returned
//! multiplier μ estimates the mean curvature λ.

use serde::{Deserialize, Serialize};

use super::analysis::{measure_contact_angle, ContactAngleStats};
use super::energy::{area_and_gradient, column_volume_and_gradient, energy_change, wedge_volume};
use super::remesh::remesh;
use super::sparse::{cg_solve, CsrBuilder, CsrMatrix};
use super::surface::TriSurface;
use crate::error::{Error, Result};
use crate::geometry::{Tube, V3};
use crate::par::Execution;

/// Descent metric for the inner loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Preconditioner {
    /// Cotangent stiffness with the Robin boundary term and a mass shift.
    #[default]
    Sobolev,
    /// Lumped vertex masses only.
    LumpedMass,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveParams {
    pub target_edge: f64,
    /// Stop when the Lagrangian gradient norm is below `tol · area`.
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub penalty_growth: f64,
    /// Relative volume violation accepted at convergence.
    pub volume_tol: f64,
    pub remesh_every: usize,
    /// Let contact-line vertices slide along the wire direction as well.
    /// Off by default: that motion only reparametrizes the contact line and
    /// lets the discrete energy trade mesh quality for area.
    pub slide_tangential: bool,
    pub preconditioner: Preconditioner,
    pub exec: Execution,
}

impl Default for SolveParams {
    fn default() -> Self {
        SolveParams {
            target_edge: 0.025,
            tol: 1e-7,
            max_outer: 40,
            max_inner: 400,
            penalty_growth: 10.0,
            volume_tol: 1e-10,
            remesh_every: 50,
            slide_tangential: false,
            preconditioner: Preconditioner::Sobolev,
            exec: Execution::Sequential,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub lambda_hat: f64,
    pub area: f64,
    pub volume: f64,
    pub target_volume: f64,
    pub grad_norm: f64,
    pub contact_angle_stats: ContactAngleStats,
    pub iterations: usize,
    pub outer_iterations: usize,
    pub penalty: f64,
    pub remesh_passes: usize,
    pub min_quality: f64,
    /// The merit never increased across an accepted step.
    pub merit_monotone: bool,
}

#[derive(Debug, Clone, Copy)]
enum VKind {
    Interior { z: usize },
    Boundary { s: Option<usize>, phi: usize },
}

struct Sheet {
    mesh: TriSurface,
    boundary_loop: Vec<usize>,
    kinds: Vec<VKind>,
    n_dofs: usize,
}

impl Sheet {
    fn new(mesh: TriSurface, slide: bool) -> Result<Self> {
        let boundary_loop = mesh.boundary_loop()?;
        let mut kinds = Vec::with_capacity(mesh.vertices.len());
        let mut n = 0;
        for i in 0..mesh.vertices.len() {
            if mesh.boundary_flags[i] {
                if mesh.boundary_coords[i].is_none() {
                    return Err(Error::MeshingFailed(format!("boundary vertex {i} has no tube coordinates")));
                }
                let s = if slide {
                    n += 1;
                    Some(n - 1)
                } else {
                    None
                };
                kinds.push(VKind::Boundary { s, phi: n });
                n += 1;
            } else {
                kinds.push(VKind::Interior { z: n });
                n += 1;
            }
        }
        Ok(Sheet {
            mesh,
            boundary_loop,
            kinds,
            n_dofs: n,
        })
    }
}

struct Eval {
    area: f64,
    volume: f64,
    ga: Vec<f64>,
    gv: Vec<f64>,
    /// Lumped metric weight of each dof.
    mass: Vec<f64>,
}

fn evaluate(sheet: &Sheet, tube: &Tube, exec: Execution, with_grad: bool) -> Result<Eval> {
    let mesh = &sheet.mesh;
    let (area, ga_pos) = area_and_gradient(mesh, exec);
    let (col, gv_pos) = column_volume_and_gradient(mesh, exec);
    let (wedge, wgrad) = wedge_volume(mesh, tube, &sheet.boundary_loop)?;
    let volume = col - wedge;
    if !with_grad {
        return Ok(Eval {
            area,
            volume,
            ga: Vec::new(),
            gv: Vec::new(),
            mass: Vec::new(),
        });
    }
    let vmass = mesh.vertex_areas();
    let mut ga = vec![0.0; sheet.n_dofs];
    let mut gv = vec![0.0; sheet.n_dofs];
    let mut mass = vec![0.0; sheet.n_dofs];
    let mut loop_pos = vec![usize::MAX; mesh.vertices.len()];
    for (k, &v) in sheet.boundary_loop.iter().enumerate() {
        loop_pos[v] = k;
    }
    for (i, kind) in sheet.kinds.iter().enumerate() {
        match *kind {
            VKind::Interior { z } => {
                ga[z] = ga_pos[i].z;
                gv[z] = gv_pos[i].z;
                mass[z] = vmass[i];
            }
            VKind::Boundary { s, phi } => {
                let [sv, av] = mesh.boundary_coords[i].ok_or(Error::NoBoundary)?;
                let (ps, pa) = tube.tangents(sv, av);
                let w = wgrad[loop_pos[i]];
                ga[phi] = ga_pos[i].dot(&pa);
                gv[phi] = gv_pos[i].dot(&pa) - w[1];
                mass[phi] = vmass[i] * pa.norm_squared();
                if let Some(s) = s {
                    ga[s] = ga_pos[i].dot(&ps);
                    gv[s] = gv_pos[i].dot(&ps) - w[0];
                    mass[s] = vmass[i] * ps.norm_squared();
                }
            }
        }
    }
    Ok(Eval {
        area,
        volume,
        ga,
        gv,
        mass,
    })
}

/// Moves a sheet along the reduced direction `d` scaled by `t`.
fn displaced(sheet: &Sheet, tube: &Tube, d: &[f64], t: f64) -> Result<TriSurface> {
    let mut mesh = sheet.mesh.clone();
    for (i, kind) in sheet.kinds.iter().enumerate() {
        match *kind {
            VKind::Interior { z } => mesh.vertices[i].z += t * d[z],
            VKind::Boundary { s, phi } => {
                let [sv, av] = mesh.boundary_coords[i].ok_or(Error::NoBoundary)?;
                let (ps, pa) = tube.tangents(sv, av);
                let ds = s.map_or(0.0, |k| d[k]);
                let moved = mesh.vertices[i] + (ps * ds + pa * d[phi]) * t;
                let tp = tube.closest_point_near(&moved, sv)?;
                mesh.vertices[i] = tp.foot;
                mesh.boundary_coords[i] = Some([tp.s, tp.angle]);
            }
        }
    }
    Ok(mesh)
}

/// Cotangent weights of the projected-and-lifted surface, clamped positive.
fn cotan_weights(mesh: &TriSurface) -> Vec<(usize, usize, f64)> {
    let mut w = std::collections::HashMap::new();
    for t in &mesh.triangles {
        for k in 0..3 {
            let (a, b, c) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
            let (pa, pb, pc) = (mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
            let (u, v) = (pa - pc, pb - pc);
            let cot = u.dot(&v) / u.cross(&v).norm().max(1e-300);
            *w.entry((a.min(b), a.max(b))).or_insert(0.0) += 0.5 * cot;
        }
    }
    let mut out: Vec<(usize, usize, f64)> = w.into_iter().map(|((a, b), x)| (a, b, x.max(0.01))).collect();
    out.sort_by_key(|x| (x.0, x.1));
    out
}

const MASS_SHIFT: f64 = 0.1;

fn build_metric(sheet: &Sheet, tube: &Tube, kind: Preconditioner, eval: &Eval) -> Result<CsrMatrix> {
    let n = sheet.n_dofs;
    let mesh = &sheet.mesh;
    let mut b = CsrBuilder::new(n);
    if kind == Preconditioner::LumpedMass {
        for k in 0..n {
            b.add(k, k, eval.mass[k]);
        }
        return Ok(b.build());
    }
    // normal dof and its vertical Jacobian per vertex
    let mut normal = Vec::with_capacity(mesh.vertices.len());
    for (i, kind) in sheet.kinds.iter().enumerate() {
        normal.push(match *kind {
            VKind::Interior { z } => (z, 1.0),
            VKind::Boundary { phi, .. } => {
                let [_, av] = mesh.boundary_coords[i].ok_or(Error::NoBoundary)?;
                (phi, tube.delta() * av.cos())
            }
        });
    }
    let mut wsum = vec![0.0; mesh.vertices.len()];
    for (i, j, w) in cotan_weights(mesh) {
        let ((pi, ji), (pj, jj)) = (normal[i], normal[j]);
        b.add(pi, pi, w * ji * ji);
        b.add(pj, pj, w * jj * jj);
        b.add(pi, pj, -w * ji * jj);
        b.add(pj, pi, -w * ji * jj);
        wsum[i] += w;
        wsum[j] += w;
    }
    let vmass = mesh.vertex_areas();
    let lp = &sheet.boundary_loop;
    let nb = lp.len();
    for k in 0..nb {
        let (a, c) = (lp[k], lp[(k + 1) % nb]);
        let half = 0.5 * (mesh.vertices[a] - mesh.vertices[c]).norm();
        for v in [a, c] {
            let (p, j) = normal[v];
            b.add(p, p, half / tube.delta() * j * j);
        }
    }
    for (i, kind) in sheet.kinds.iter().enumerate() {
        let (p, j) = normal[i];
        b.add(p, p, MASS_SHIFT * vmass[i] * j * j);
        if let VKind::Boundary { s: Some(s), .. } = *kind {
            let [sv, av] = mesh.boundary_coords[i].ok_or(Error::NoBoundary)?;
            let (ps, _) = tube.tangents(sv, av);
            b.add(s, s, (wsum[i] + MASS_SHIFT * vmass[i]) * ps.norm_squared());
        }
    }
    Ok(b.build())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mass_norm(g: &[f64], m: &[f64]) -> f64 {
    g.iter().zip(m).map(|(x, w)| x * x / w.max(1e-300)).sum::<f64>().sqrt()
}

/// Constrained minimization of one or more sheets sharing one volume
/// constraint.
struct Problem<'a> {
    tube: &'a Tube,
    target: f64,
    params: &'a SolveParams,
}

struct State {
    sheets: Vec<Sheet>,
    evals: Vec<Eval>,
}

impl State {
    fn area(&self) -> f64 {
        self.evals.iter().map(|e| e.area).sum()
    }
    fn volume(&self) -> f64 {
        self.evals.iter().map(|e| e.volume).sum()
    }
}

impl<'a> Problem<'a> {
    fn evaluate_all(&self, sheets: &[Sheet]) -> Result<Vec<Eval>> {
        sheets
            .iter()
            .map(|s| evaluate(s, self.tube, self.params.exec, true))
            .collect()
    }

    fn run(&self, meshes: Vec<TriSurface>) -> Result<(Vec<TriSurface>, SolveReport)> {
        let p = self.params;
        let sheets = meshes
            .into_iter()
            .map(|m| Sheet::new(m, p.slide_tangential))
            .collect::<Result<Vec<_>>>()?;
        let evals = self.evaluate_all(&sheets)?;
        let mut st = State { sheets, evals };
        let mut mu = 0.0;
        let mut rho = 0.0;
        let mut iterations = 0;
        let mut remesh_passes = 0;
        let mut merit_monotone = true;
        let mut prev_violation = f64::INFINITY;
        let mut growth_strikes = 0;
        // tiny volumes are limited by rounding in the volume sum, so the
        // scale never drops below a layer of thickness target_edge/100
        let vol_scale = self.target.abs().max(0.01 * p.target_edge * st.area());
        let mut omega = 1e-2;
        for outer in 1..=p.max_outer {
            // first call sets the penalty from the preconditioned volume gradient
            let metrics = st
                .sheets
                .iter()
                .zip(&st.evals)
                .map(|(s, e)| build_metric(s, self.tube, p.preconditioner, e))
                .collect::<Result<Vec<_>>>()?;
            if rho == 0.0 {
                let vbv: f64 = metrics
                    .iter()
                    .zip(&st.evals)
                    .map(|(m, e)| dot(&e.gv, &cg_solve(m, &e.gv, 1e-10, 2000)))
                    .sum();
                rho = if vbv > 0.0 { 1e3 / vbv } else { 1.0 };
            }
            let inner_tol = (omega * st.area()).max(p.tol * st.area() * 0.5);
            for _ in 0..p.max_inner {
                let c = st.volume() - self.target;
                let g: Vec<Vec<f64>> = st
                    .evals
                    .iter()
                    .map(|e| e.ga.iter().zip(&e.gv).map(|(a, v)| a - mu * v + rho * c * v).collect())
                    .collect();
                let gnorm = g
                    .iter()
                    .zip(&st.evals)
                    .map(|(gk, e)| mass_norm(gk, &e.mass).powi(2))
                    .sum::<f64>()
                    .sqrt();
                if gnorm <= inner_tol {
                    break;
                }
                let metrics = st
                    .sheets
                    .iter()
                    .zip(&st.evals)
                    .map(|(s, e)| build_metric(s, self.tube, p.preconditioner, e))
                    .collect::<Result<Vec<_>>>()?;
                // Sherman–Morrison for (B + ρ v vᵀ)⁻¹ g with block-diagonal B
                let y: Vec<Vec<f64>> = metrics.iter().zip(&g).map(|(m, gk)| cg_solve(m, gk, 1e-9, 2000)).collect();
                let u: Vec<Vec<f64>> = metrics
                    .iter()
                    .zip(&st.evals)
                    .map(|(m, e)| cg_solve(m, &e.gv, 1e-9, 2000))
                    .collect();
                let vy: f64 = st.evals.iter().zip(&y).map(|(e, yk)| dot(&e.gv, yk)).sum();
                let vu: f64 = st.evals.iter().zip(&u).map(|(e, uk)| dot(&e.gv, uk)).sum();
                let f = rho * vy / (1.0 + rho * vu);
                let mut d: Vec<Vec<f64>> = y
                    .iter()
                    .zip(&u)
                    .map(|(yk, uk)| yk.iter().zip(uk).map(|(a, b)| -(a - f * b)).collect())
                    .collect();
                let mut slope: f64 = g.iter().zip(&d).map(|(gk, dk)| dot(gk, dk)).sum();
                if !(slope < 0.0) {
                    d = g
                        .iter()
                        .zip(&st.evals)
                        .map(|(gk, e)| gk.iter().zip(&e.mass).map(|(x, m)| -x / m.max(1e-300)).collect())
                        .collect();
                    slope = g.iter().zip(&d).map(|(gk, dk)| dot(gk, dk)).sum();
                }
                let c0 = st.volume() - self.target;
                let mut t = 1.0;
                let mut accepted = None;
                for _ in 0..30 {
                    let trial: Result<Vec<TriSurface>> = st
                        .sheets
                        .iter()
                        .zip(&d)
                        .map(|(s, dk)| displaced(s, self.tube, dk, t))
                        .collect();
                    if let Ok(meshes) = trial {
                        let change: Result<Vec<(f64, f64)>> = st
                            .sheets
                            .iter()
                            .zip(&meshes)
                            .map(|(s, m)| energy_change(&s.mesh, m, self.tube, &s.boundary_loop))
                            .collect();
                        if let Ok(ch) = change {
                            let da: f64 = ch.iter().map(|x| x.0).sum();
                            let dv: f64 = ch.iter().map(|x| x.1).sum();
                            // Φ(new) − Φ(old)
                            let dphi = da - mu * dv + rho * (c0 * dv + 0.5 * dv * dv);
                            if dphi.is_finite() && dphi <= 1e-4 * t * slope {
                                accepted = Some(meshes);
                                if dphi > 0.0 {
                                    merit_monotone = false;
                                }
                                break;
                            }
                        }
                    }
                    t *= 0.5;
                }
                iterations += 1;
                let Some(meshes) = accepted else {
                    // no decrease possible at this resolution: treat as converged
                    break;
                };
                for (s, m) in st.sheets.iter_mut().zip(meshes) {
                    s.mesh = m;
                }
                if p.remesh_every > 0 && iterations % p.remesh_every == 0 {
                    let mut changed = false;
                    for s in &mut st.sheets {
                        let (m, c) = remesh(&s.mesh, self.tube, p.target_edge)?;
                        if c {
                            *s = Sheet::new(m, p.slide_tangential)?;
                            changed = true;
                        }
                    }
                    if changed {
                        remesh_passes += 1;
                    }
                }
                st.evals = self.evaluate_all(&st.sheets)?;
            }
            let c = st.volume() - self.target;
            let violation = c.abs();
            let gl_norm = st
                .evals
                .iter()
                .map(|e| {
                    let gl: Vec<f64> = e.ga.iter().zip(&e.gv).map(|(a, v)| a - (mu - rho * c) * v).collect();
                    mass_norm(&gl, &e.mass).powi(2)
                })
                .sum::<f64>()
                .sqrt();
            // first-order multiplier update
            mu -= rho * c;
            let converged_volume = violation <= p.volume_tol * vol_scale || (self.target == 0.0 && violation <= 1e-14);
            if converged_volume && gl_norm <= p.tol * st.area() {
                let meshes: Vec<TriSurface> = st.sheets.into_iter().map(|s| s.mesh).collect();
                let mut min_quality = f64::INFINITY;
                let mut worst = ContactAngleStats { mean: 0.0, max_dev: 0.0 };
                for m in &meshes {
                    min_quality = min_quality.min(m.min_quality());
                    let ca = measure_contact_angle(m, self.tube)?;
                    worst.mean = worst.mean.max(ca.mean);
                    worst.max_dev = worst.max_dev.max(ca.max_dev);
                }
                let area: f64 = meshes.iter().map(|m| m.area()).sum();
                let report = SolveReport {
                    lambda_hat: mu,
                    area,
                    volume: self.target + c,
                    target_volume: self.target,
                    grad_norm: gl_norm,
                    contact_angle_stats: worst,
                    iterations,
                    outer_iterations: outer,
                    penalty: rho,
                    remesh_passes,
                    min_quality,
                    merit_monotone,
                };
                return Ok((meshes, report));
            }
            if violation > 0.25 * prev_violation && !converged_volume {
                rho *= p.penalty_growth;
                growth_strikes += 1;
            }
            if violation > prev_violation * 1.0001 && growth_strikes > 3 || rho > 1e18 {
                return Err(Error::VolumeInfeasible {
                    violation,
                    penalty: rho,
                });
            }
            prev_violation = violation;
            omega = (omega * 0.1).max(p.tol * 0.5);
        }
        let c = st.volume() - self.target;
        Err(Error::NoConvergence {
            what: "augmented Lagrangian",
            iterations,
            residuals: vec![c, mu],
        })
    }
}

/// Minimizes the area of one upper sheet enclosing `half_volume` with the
/// plane x₃ = 0 and the tube.
pub fn minimize(mesh: TriSurface, tube: &Tube, half_volume: f64, params: &SolveParams) -> Result<(TriSurface, SolveReport)> {
    if !(half_volume >= 0.0 && half_volume.is_finite()) {
        return Err(Error::Domain(format!("half volume {half_volume} must be non-negative")));
    }
    let problem = Problem {
        tube,
        target: half_volume,
        params,
    };
    let (mut meshes, report) = problem.run(vec![mesh])?;
    Ok((meshes.remove(0), report))
}

/// Two sheets with one shared volume constraint. Both sheets are given and
/// returned as upper sheets; the lower sheet of the film is the mirror
/// image of the second one.
pub fn minimize_two_sheets(
    upper: TriSurface,
    lower_reflected: TriSurface,
    tube: &Tube,
    total_volume: f64,
    params: &SolveParams,
) -> Result<(TriSurface, TriSurface, SolveReport)> {
    let problem = Problem {
        tube,
        target: total_volume,
        params,
    };
    let (mut meshes, report) = problem.run(vec![upper, lower_reflected])?;
    let lower = meshes.pop().ok_or(Error::NoBoundary)?;
    let upper = meshes.pop().ok_or(Error::NoBoundary)?;
    Ok((upper, lower, report))
}

/// Vertical offset of the interior vertices by `amplitude · b(x)`, where b
/// is a smooth bump of radius `radius` centred at `center`.
pub fn add_bump(mesh: &mut TriSurface, center: V3, radius: f64, amplitude: f64) {
    for (i, v) in mesh.vertices.iter_mut().enumerate() {
        if mesh.boundary_flags[i] {
            continue;
        }
        let r2 = ((v.x - center.x).powi(2) + (v.y - center.y).powi(2)) / (radius * radius);
        if r2 < 1.0 {
            v.z += amplitude * (1.0 - r2).powi(2);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WireCurve;
    use crate::mesh::init::{init_mesh, plateau_domain};

    #[test]
    fn flat_disc_is_stationary() {
        let tube = Tube::new(WireCurve::circle(1.0).unwrap(), 0.1).unwrap();
        let dom = plateau_domain(&tube, 0.05).unwrap();
        let m = init_mesh(&dom, &tube, 0.05).unwrap();
        let params = SolveParams {
            target_edge: 0.05,
            ..Default::default()
        };
        let (_, rep) = minimize(m, &tube, 0.0, &params).unwrap();
        assert!(rep.outer_iterations <= 2);
        assert!(rep.lambda_hat.abs() <= 1e-6);
        assert!(rep.grad_norm <= params.tol * rep.area);
    }
}

#[cfg(test)]
mod reduced_gradient_tests {
    use super::*;
    use crate::geometry::WireCurve;
    use crate::mesh::init::{init_mesh, plateau_domain};

    // derivatives with respect to the reduced coordinates, including the
    // tube angle and arclength of contact-line vertices
    #[test]
    fn reduced_gradient_matches_differences() {
        let tube = Tube::new(WireCurve::ellipse(1.3, 0.8).unwrap(), 0.05).unwrap();
        let dom = plateau_domain(&tube, 0.025).unwrap();
        let mut m = init_mesh(&dom, &tube, 0.025).unwrap();
        add_bump(&mut m, V3::new(0.1, 0.05, 0.0), 0.9, 0.02);
        for (i, c) in m.boundary_coords.clone().iter().enumerate() {
            if let Some([s, _]) = c {
                let a = 0.03 * (3.0 * s).sin() + 0.01;
                m.vertices[i] = tube.point(*s, a);
                m.boundary_coords[i] = Some([*s, a]);
            }
        }
        let sheet = Sheet::new(m, true).unwrap();
        let e = evaluate(&sheet, &tube, Execution::Sequential, true).unwrap();
        let h = 1e-6;
        let mut worst: (f64, f64) = (0.0, 0.0);
        for k in (0..sheet.n_dofs).step_by(7) {
            let mut d = vec![0.0; sheet.n_dofs];
            d[k] = 1.0;
            let f = |t: f64| {
                let mm = displaced(&sheet, &tube, &d, t).unwrap();
                let s2 = Sheet {
                    mesh: mm,
                    boundary_loop: sheet.boundary_loop.clone(),
                    kinds: sheet.kinds.clone(),
                    n_dofs: sheet.n_dofs,
                };
                let ev = evaluate(&s2, &tube, Execution::Sequential, false).unwrap();
                (ev.area, ev.volume)
            };
            let (ap, vp) = f(h);
            let (am, vm) = f(-h);
            worst.0 = worst.0.max(((ap - am) / (2.0 * h) - e.ga[k]).abs());
            worst.1 = worst.1.max(((vp - vm) / (2.0 * h) - e.gv[k]).abs());
        }
        assert!(worst.0 < 1e-7 && worst.1 < 1e-7, "{worst:?}");
    }
}
