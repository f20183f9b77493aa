//! The verification suite: each criterion solves its own problems against
//! an oracle and returns a pass/fail line with the measured numbers.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::axisym::solve_axisym;
use crate::cap::{cap_for_volume, cap_from_angle, discrepancy_records, theta_for_lambda, DiscrepancyRecord};
use crate::error::Result;
use crate::foliation::{
    check_convergence_to_disc, check_ordering, check_symmetry, compute_pi, geometric_grid, solve_record, SolverKind,
    SweepOptions, sweep,
};
use crate::geometry::{Tube, WireCurve, V3};
use crate::hodograph::{build_chart, curvature_bound_report, extract_theta, pde_residual, ThetaRun};
use crate::mesh::{
    add_bump, area_and_gradient, cap_vertex_error, column_volume_and_gradient, enclosed_volume, init_mesh, minimize, plateau_domain,
    wedge_volume, SolveParams, TriSurface,
};
use crate::par::{self, Execution};

pub mod tol {
    //! Pass thresholds.

    pub const CAP_ODE_LAMBDA_REL: f64 = 1e-7;
    pub const CAP_ODE_MERIDIAN: f64 = 1e-7;
    pub const CAP_ODE_SECONDS: f64 = 10.0;
    pub const MESH_ERROR_RATIO: f64 = 3.0;
    pub const MESH_LAMBDA_REL: f64 = 0.02;
    pub const MESH_SECONDS: f64 = 300.0;
    pub const CONTACT_MAX_DEV: f64 = 0.05;
    pub const CONTACT_REFINE_RATIO: f64 = 2.0;
    pub const SYMMETRY_FACTOR: f64 = 5.0;
    pub const CHART_ENERGY_REL: f64 = 1e-8;
    pub const RESIDUAL_RATIO: (f64, f64) = (3.5, 4.5);
    pub const NEUMANN_RATIO: f64 = 2.0;
    pub const D2_GROWTH: f64 = 1.5;
    pub const AREA_GRAD_REL: f64 = 1e-5;
    pub const VOLUME_GRAD_REL: f64 = 1e-7;
    pub const QUICK_SECONDS: f64 = 60.0;
}

pub const CRITERIA: [(u32, &str); 10] = [
    (1, "cap/ode agreement"),
    (2, "mesh/cap agreement"),
    (3, "curvature bounds 0 < lambda <= Pi eps"),
    (4, "orthogonal contact"),
    (5, "foliation ordering"),
    (6, "two-sheet symmetry"),
    (7, "convergence to the Plateau disc"),
    (8, "hodograph consistency"),
    (9, "gradient exactness"),
    (10, "documented discrepancies"),
];

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub summary: String,
    pub metrics: Value,
    /// Wall time; kept out of the JSON so reports stay reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionResult {
    /// `[PASS] 3 curvature bounds …: summary`
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {}: {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.summary
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub quick: bool,
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
    pub discrepancies: Vec<DiscrepancyRecord>,
    /// Quick mode only: whether the whole run fit the time budget.
    pub within_time_budget: Option<bool>,
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct VerifyOptions {
    /// Cap/ode cross-check, the Π bound on a 4-point grid and the
    /// discrepancy records only.
    pub quick: bool,
    pub exec: Execution,
}

fn name_of(id: u32) -> &'static str {
    CRITERIA.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1)
}

fn finish(id: u32, start: Instant, out: Result<(bool, String, Value)>) -> CriterionResult {
    let (passed, summary, metrics) = match out {
        Ok(x) => x,
        Err(e) => (false, format!("solver error {}: {e}", e.code()), json!({"error": e.code()})),
    };
    CriterionResult {
        id,
        name: name_of(id),
        passed,
        summary,
        metrics,
        seconds: start.elapsed().as_secs_f64(),
    }
}

fn circle(delta: f64) -> Result<Tube> {
    Tube::new(WireCurve::circle(1.0)?, delta)
}

fn ellipse(delta: f64) -> Result<Tube> {
    Tube::new(WireCurve::ellipse(1.3, 0.8)?, delta)
}

fn mesh_params(h: f64, exec: Execution) -> SolveParams {
    SolveParams {
        target_edge: h,
        exec,
        ..Default::default()
    }
}

fn solve_flat_start(tube: &Tube, eps: f64, params: &SolveParams) -> Result<(TriSurface, crate::mesh::SolveReport)> {
    let dom = plateau_domain(tube, params.target_edge)?;
    let m = init_mesh(&dom, tube, params.target_edge)?;
    minimize(m, tube, 0.5 * eps, params)
}

pub fn cap_ode_agreement(exec: Execution) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let cases: Vec<(f64, f64)> = [0.02, 0.05, 0.1]
            .iter()
            .flat_map(|&d| [1e-3, 1e-2, 5e-2].map(|e| (d, e)))
            .collect();
        let rows = par::map_slice(&cases, exec, |&(d, e)| -> Result<(f64, f64)> {
            let cap = cap_for_volume(d, e)?;
            let prof = solve_axisym(d, e)?;
            Ok(((prof.lambda - cap.lambda).abs() / cap.lambda, prof.distance_to_cap(&cap)))
        });
        let mut worst = (0.0f64, 0.0f64);
        for r in rows {
            let (l, m) = r?;
            worst = (worst.0.max(l), worst.1.max(m));
        }
        let secs = start.elapsed().as_secs_f64();
        let ok = worst.0 <= tol::CAP_ODE_LAMBDA_REL && worst.1 <= tol::CAP_ODE_MERIDIAN && secs <= tol::CAP_ODE_SECONDS;
        Ok((
            ok,
            format!(
                "9 cases, max |dlambda|/lambda {:.2e} (<= {:.0e}), max meridian distance {:.2e} (<= {:.0e}), {} the {} s budget",
                worst.0,
                tol::CAP_ODE_LAMBDA_REL,
                worst.1,
                tol::CAP_ODE_MERIDIAN,
                if secs <= tol::CAP_ODE_SECONDS { "within" } else { "OVER" },
                tol::CAP_ODE_SECONDS
            ),
            json!({"max_lambda_rel": worst.0, "max_meridian_distance": worst.1,
                   "within_time_budget": secs <= tol::CAP_ODE_SECONDS}),
        ))
    })();
    finish(1, start, out)
}

pub fn mesh_cap_agreement(exec: Execution) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let tube = circle(0.1)?;
        let cap = cap_for_volume(0.1, 0.05)?;
        let mut errs = Vec::new();
        let mut lams = Vec::new();
        for h in [0.05, 0.025] {
            let (m, rep) = solve_flat_start(&tube, 0.05, &mesh_params(h, exec))?;
            errs.push(cap_vertex_error(&m, &cap));
            lams.push((rep.lambda_hat - cap.lambda).abs() / cap.lambda);
        }
        let ratio = errs[0] / errs[1];
        let secs = start.elapsed().as_secs_f64();
        let ok = ratio >= tol::MESH_ERROR_RATIO && lams[1] <= tol::MESH_LAMBDA_REL && secs <= tol::MESH_SECONDS;
        Ok((
            ok,
            format!(
                "vertex error {:.3e} -> {:.3e} (ratio {:.2} >= {}), lambda rel error at h=0.025 {:.2e} (<= {})",
                errs[0],
                errs[1],
                ratio,
                tol::MESH_ERROR_RATIO,
                lams[1],
                tol::MESH_LAMBDA_REL
            ),
            json!({"target_edge": [0.05, 0.025], "vertex_error": errs, "error_ratio": ratio,
                   "lambda_rel_error": lams, "within_time_budget": secs <= tol::MESH_SECONDS}),
        ))
    })();
    finish(2, start, out)
}

pub fn curvature_bounds(quick: bool, exec: Execution) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let n = if quick { 4 } else { 8 };
        let grid = geometric_grid(1e-4, 0.05, n)?;
        let mut runs: Vec<(f64, SolverKind)> = vec![(0.1, SolverKind::Cap), (0.1, SolverKind::Ode)];
        if !quick {
            for d in [0.05, 0.02] {
                runs.push((d, SolverKind::Cap));
                runs.push((d, SolverKind::Ode));
            }
            runs.push((0.1, SolverKind::Mesh));
        }
        let mut ok = true;
        let mut rows = Vec::new();
        let mut worst_fraction: f64 = 0.0;
        for (d, kind) in runs {
            let tube = circle(d)?;
            let pi = compute_pi(3, 1.0 - d)?;
            let opts = SweepOptions {
                mesh: mesh_params(0.02, exec),
                exec,
                symmetry_solve: false,
            };
            let rep = sweep(&tube, &grid, kind, &opts)?;
            ok &= rep.failures.is_empty();
            let ratios: Vec<f64> = rep.records.iter().map(|r| r.lambda / r.eps).collect();
            for r in &rep.records {
                ok &= r.lambda > 0.0 && r.lambda <= pi * r.eps;
                worst_fraction = worst_fraction.max(r.lambda / (pi * r.eps));
            }
            // λ/ε drift over the two smallest volumes
            let drift = (ratios[1] - ratios[0]).abs() / ratios[0];
            rows.push(json!({"delta": d, "solver": kind, "Pi": pi, "lambda_over_eps": ratios,
                             "tail_drift": drift, "failures": rep.failures}));
        }
        Ok((
            ok,
            format!(
                "{} sweeps x {n} points, max lambda/(Pi eps) = {:.4} (<= 1), all lambda > 0",
                rows.len(),
                worst_fraction
            ),
            json!({"grid": grid, "max_lambda_over_bound": worst_fraction, "sweeps": rows}),
        ))
    })();
    finish(3, start, out)
}

pub fn orthogonal_contact(exec: Execution) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let tube = circle(0.1)?;
        let mut devs = Vec::new();
        for h in [0.025, 0.0125] {
            let (_, rep) = solve_flat_start(&tube, 0.05, &mesh_params(h, exec))?;
            devs.push(rep.contact_angle_stats.max_dev);
        }
        let ratio = devs[0] / devs[1];
        let ok = devs[0] <= tol::CONTACT_MAX_DEV && ratio >= tol::CONTACT_REFINE_RATIO;
        Ok((
            ok,
            format!(
                "max |angle - pi/2| {:.3e} rad at h=0.025 (<= {}), {:.3e} at h=0.0125 (ratio {:.2} >= {})",
                devs[0],
                tol::CONTACT_MAX_DEV,
                devs[1],
                ratio,
                tol::CONTACT_REFINE_RATIO
            ),
            json!({"target_edge": [0.025, 0.0125], "max_dev": devs, "ratio": ratio}),
        ))
    })();
    finish(4, start, out)
}

pub fn foliation_ordering(exec: Execution) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let grid = geometric_grid(1e-4, 0.05, 8)?;
        let tube = circle(0.1)?;
        let caps: Vec<_> = grid
            .iter()
            .map(|&e| solve_record(&tube, e, SolverKind::Cap, &SolveParams::default()))
            .collect::<Result<_>>()?;
        let cap_rep = check_ordering(&caps)?;
        let el = ellipse(0.05)?;
        let mesh_grid = [0.005, 0.01, 0.02, 0.04];
        let params = mesh_params(0.02, Execution::Sequential);
        let meshes = par::map_slice(&mesh_grid, exec, |&e| solve_record(&el, e, SolverKind::Mesh, &params))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let mesh_rep = check_ordering(&meshes)?;
        Ok((
            cap_rep.ok && mesh_rep.ok,
            format!(
                "cap sweep {} (min lambda gap {:.2e}), ellipse mesh sweep {} (min height gap {:.2e}, min lambda gap {:.2e}, margin {:.0e})",
                if cap_rep.ok { "ordered" } else { "NOT ordered" },
                cap_rep.min_lambda_gap,
                if mesh_rep.ok { "ordered" } else { "NOT ordered" },
                mesh_rep.min_height_gap,
                mesh_rep.min_lambda_gap,
                mesh_rep.margin
            ),
            json!({"cap": cap_rep, "mesh_ellipse": mesh_rep, "mesh_eps": mesh_grid}),
        ))
    })();
    finish(5, start, out)
}

pub fn symmetry(exec: Execution) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let cases = [(circle(0.1)?, 0.05, 0.025, "circle"), (ellipse(0.05)?, 0.02, 0.02, "ellipse")];
        let reps = par::map_slice(&cases, exec, |(tube, eps, h, _)| {
            check_symmetry(tube, *eps, &mesh_params(*h, Execution::Sequential), 0.3)
        });
        let mut ok = true;
        let mut parts = Vec::new();
        let mut rows = Vec::new();
        for (c, r) in cases.iter().zip(reps) {
            let r = r?;
            debug_assert_eq!(r.threshold, tol::SYMMETRY_FACTOR * c.2 * c.2);
            ok &= r.ok;
            parts.push(format!("{} {:.2e} (<= {:.2e})", c.3, r.asymmetry, r.threshold));
            rows.push(json!({"wire": c.3, "eps": c.1, "target_edge": c.2, "report": r}));
        }
        Ok((ok, format!("asymmetry after 30% bump: {}", parts.join(", ")), json!(rows)))
    })();
    finish(6, start, out)
}

pub fn plateau_convergence(exec: Execution) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let tube = circle(0.1)?;
        let grid = geometric_grid(1e-5, 1e-2, 7)?;
        let mut ok = true;
        let mut rows = Vec::new();
        for kind in [SolverKind::Cap, SolverKind::Ode] {
            let recs = par::map_slice(&grid, exec, |&e| solve_record(&tube, e, kind, &SolveParams::default()))
                .into_iter()
                .collect::<Result<Vec<_>>>()?;
            let rep = check_convergence_to_disc(&recs)?;
            ok &= rep.ok;
            rows.push((kind, rep));
        }
        let cap = &rows[0].1;
        Ok((
            ok,
            format!(
                "eps 1e-5..1e-2, cap and ode leaves: monotone vanishing of sup_height, lambda and Hausdorff(D_eps, D0) {}, \
                 spanning {}; fitted exponents a = {:.3}, b = {:.3}, max lambda/eps = {:.4}",
                if rows.iter().all(|r| r.1.sup_height_monotone && r.1.lambda_monotone && r.1.hausdorff_monotone) { "holds" } else { "VIOLATED" },
                if rows.iter().all(|r| r.1.spanning_ok) { "holds" } else { "VIOLATED" },
                cap.height_exponent.unwrap_or(f64::NAN),
                cap.lambda_exponent.unwrap_or(f64::NAN),
                cap.max_lambda_over_eps
            ),
            json!({"grid": grid, "cap": rows[0].1, "ode": rows[1].1}),
        ))
    })();
    finish(7, start, out)
}

pub fn hodograph_consistency() -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let w = WireCurve::circle(1.0)?;
        // chart energy of the cap graph against the spherical zone area 2πRΔz
        let mut energy_err: f64 = 0.0;
        for d in [0.02, 0.05, 0.1] {
            for e in [1e-3, 1e-2, 5e-2] {
                let cap = cap_for_volume(d, e)?;
                let depth = 0.3;
                let chart = build_chart(&w, d, depth, (8, 8))?;
                let t_lo = 1.0 - cap.contact_radius;
                let grad = |_s: f64, t: f64| {
                    let rho = 1.0 - t;
                    (0.0, rho / (cap.height(rho) - cap.z_c))
                };
                let chart_e = chart.energy(grad, |_| t_lo, depth, 1e-13);
                let direct = 2.0 * PI * cap.r * (cap.height(1.0 - depth) - cap.height(cap.contact_radius));
                energy_err = energy_err.max((chart_e - direct).abs() / direct);
            }
        }
        // residual refinement on the cap field
        let cap = cap_for_volume(0.1, 0.05)?;
        let mut interior = Vec::new();
        let mut neumann = Vec::new();
        for n in [32, 64, 128] {
            let chart = build_chart(&w, 0.1, 0.1, (8, n))?;
            let f = extract_theta(&cap, &chart)?;
            let r = pde_residual(&f, &chart, cap.lambda);
            interior.push(r.max_interior);
            neumann.push(r.max_neumann);
        }
        let res_ratios = [interior[0] / interior[1], interior[1] / interior[2]];
        let neu_ratios = [neumann[0] / neumann[1], neumann[1] / neumann[2]];
        // second-derivative proxy at matched λ
        let lambda = 0.1;
        let mut fields = Vec::new();
        for d in [0.1, 0.05, 0.02] {
            let c = cap_from_angle(d, theta_for_lambda(d, lambda)?)?;
            let chart = build_chart(&w, d, 0.3, (8, 120))?;
            let f = extract_theta(&c, &chart)?;
            fields.push((chart, f, c.lambda));
        }
        let runs: Vec<ThetaRun> = fields
            .iter()
            .map(|(c, f, l)| ThetaRun {
                theta: f,
                chart: c,
                lambda: *l,
            })
            .collect();
        let bound = curvature_bound_report(&runs);
        let (lo, hi) = tol::RESIDUAL_RATIO;
        let ok_energy = energy_err <= tol::CHART_ENERGY_REL;
        let ok_res = res_ratios.iter().all(|r| (lo..=hi).contains(r));
        let ok_neu = neu_ratios.iter().all(|r| *r >= tol::NEUMANN_RATIO);
        let ok_d2 = bound.d2_ratio <= tol::D2_GROWTH;
        Ok((
            ok_energy && ok_res && ok_neu && ok_d2,
            format!(
                "chart energy rel err {:.1e} (<= {:.0e}); residual ratios {:.2}, {:.2} (in [{lo}, {hi}]); \
                 Neumann ratios {:.2}, {:.2} (>= {}); D2 growth {:.3} (<= {})",
                energy_err,
                tol::CHART_ENERGY_REL,
                res_ratios[0],
                res_ratios[1],
                neu_ratios[0],
                neu_ratios[1],
                tol::NEUMANN_RATIO,
                bound.d2_ratio,
                tol::D2_GROWTH
            ),
            json!({"chart_energy_rel_error": energy_err, "n_rho": [32, 64, 128],
                   "max_interior_residual": interior, "max_neumann_residual": neumann,
                   "residual_ratios": res_ratios, "neumann_ratios": neu_ratios,
                   "curvature_bound": bound}),
        ))
    })();
    finish(8, start, out)
}

/// Central-difference directional derivatives of the area and the enclosed
/// volume at 100 random perturbations of a bumped ellipse mesh, each along a
/// random direction.
pub fn gradient_exactness(seed: u64) -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let tube = ellipse(0.05)?;
        let h_mesh = 0.025;
        let dom = plateau_domain(&tube, h_mesh)?;
        let mut base = init_mesh(&dom, &tube, h_mesh)?;
        add_bump(&mut base, V3::new(0.1, 0.05, 0.0), 0.9, 0.03);
        let lp = base.boundary_loop()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let step = 1e-4;
        let (mut worst_a, mut worst_v): (f64, f64) = (0.0, 0.0);
        for _ in 0..100 {
            let mut m = base.clone();
            for (i, v) in m.vertices.iter_mut().enumerate() {
                if let Some([s, a]) = m.boundary_coords[i] {
                    let a = a + rng.random_range(0.0..0.2);
                    *v = tube.point(s, a);
                    m.boundary_coords[i] = Some([s, a]);
                } else {
                    *v += V3::new(
                        rng.random_range(-0.2..0.2) * h_mesh,
                        rng.random_range(-0.2..0.2) * h_mesh,
                        rng.random_range(-0.02..0.02),
                    );
                }
            }
            // interior vertices move freely, contact-line vertices along the
            // tube in (s, angle)
            let dir: Vec<V3> = (0..m.vertices.len())
                .map(|_| V3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let moved = |t: f64| {
                let mut c = m.clone();
                for (i, v) in c.vertices.iter_mut().enumerate() {
                    match c.boundary_coords[i].as_mut() {
                        Some(bc) => {
                            *bc = [bc[0] + t * dir[i].x, bc[1] + t * dir[i].y];
                            *v = tube.point(bc[0], bc[1]);
                        }
                        None => *v += t * dir[i],
                    }
                }
                c
            };
            let (_, ga) = area_and_gradient(&m, Execution::Sequential);
            let (_, gv) = column_volume_and_gradient(&m, Execution::Sequential);
            let (_, gw) = wedge_volume(&m, &tube, &lp)?;
            let (mut an_a, mut an_v) = (0.0, 0.0);
            for i in 0..m.vertices.len() {
                let dx = match m.boundary_coords[i] {
                    Some([s, a]) => {
                        let (ps, pa) = tube.tangents(s, a);
                        ps * dir[i].x + pa * dir[i].y
                    }
                    None => dir[i],
                };
                an_a += ga[i].dot(&dx);
                an_v += gv[i].dot(&dx);
            }
            for (k, &v) in lp.iter().enumerate() {
                an_v -= gw[k][0] * dir[v].x + gw[k][1] * dir[v].y;
            }
            // fourth-order central stencil
            let mut fd_a = 0.0;
            let mut fd_v = 0.0;
            for (k, w) in [(1.0, 8.0), (-1.0, -8.0), (2.0, -1.0), (-2.0, 1.0)] {
                let c = moved(k * step);
                fd_a += w * c.area() / (12.0 * step);
                fd_v += w * enclosed_volume(&c, &tube)? / (12.0 * step);
            }
            worst_a = worst_a.max((fd_a - an_a).abs() / an_a.abs());
            worst_v = worst_v.max((fd_v - an_v).abs() / an_v.abs());
        }
        let ok = worst_a <= tol::AREA_GRAD_REL && worst_v <= tol::VOLUME_GRAD_REL;
        Ok((
            ok,
            format!(
                "100 random perturbations: area rel err {:.2e} (<= {:.0e}), volume rel err {:.2e} (<= {:.0e})",
                worst_a,
                tol::AREA_GRAD_REL,
                worst_v,
                tol::VOLUME_GRAD_REL
            ),
            json!({"seed": seed, "fd_step": step, "area_rel_error": worst_a, "volume_rel_error": worst_v}),
        ))
    })();
    finish(9, start, out)
}

pub fn documented_discrepancies() -> CriterionResult {
    let start = Instant::now();
    let out = (|| {
        let recs = discrepancy_records()?;
        let has = |id: &str| recs.iter().find(|r| r.id == id);
        let ok = ["center_height_sign", "half_volume_identity"].iter().all(|id| {
            has(id).is_some_and(|r| {
                r.printed_value.is_finite() && r.derived_value.is_finite() && !r.printed_consistent && r.derived_consistent
            })
        });
        let zc = has("center_height_sign");
        let hv = has("half_volume_identity");
        Ok((
            ok,
            format!(
                "z_C printed {:.6} vs derived {:.6}; half-ball volume printed {:.6} vs derived {:.6} (2 pi/3 = {:.6})",
                zc.map_or(f64::NAN, |r| r.printed_value),
                zc.map_or(f64::NAN, |r| r.derived_value),
                hv.map_or(f64::NAN, |r| r.printed_value),
                hv.map_or(f64::NAN, |r| r.derived_value),
                2.0 * PI / 3.0
            ),
            json!(recs),
        ))
    })();
    finish(10, start, out)
}

/// Runs one criterion by number.
pub fn run_criterion(id: u32, opts: &VerifyOptions) -> Option<CriterionResult> {
    let e = opts.exec;
    Some(match id {
        1 => cap_ode_agreement(e),
        2 => mesh_cap_agreement(e),
        3 => curvature_bounds(opts.quick, e),
        4 => orthogonal_contact(e),
        5 => foliation_ordering(e),
        6 => symmetry(e),
        7 => plateau_convergence(e),
        8 => hodograph_consistency(),
        9 => gradient_exactness(20_240_601),
        10 => documented_discrepancies(),
        _ => return None,
    })
}

/// The full suite, or criteria 1, 3 (4-point grid) and 10 in quick mode.
pub fn verify(opts: &VerifyOptions) -> Result<VerifyReport> {
    let start = Instant::now();
    let ids: Vec<u32> = if opts.quick {
        vec![1, 3, 10]
    } else {
        CRITERIA.iter().map(|c| c.0).collect()
    };
    let criteria: Vec<CriterionResult> = ids.iter().filter_map(|&id| run_criterion(id, opts)).collect();
    let within = opts.quick.then(|| start.elapsed().as_secs_f64() <= tol::QUICK_SECONDS);
    Ok(VerifyReport {
        quick: opts.quick,
        passed: criteria.iter().all(|c| c.passed) && within != Some(false),
        criteria,
        discrepancies: discrepancy_records()?,
        within_time_budget: within,
    })
}
