//! Sweeps over the volume parameter and the validators of the resulting
//! family of leaves: nesting, symmetry, the curvature bound 0 < λ ≤ Πε and
//! convergence to the Plateau disc.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::axisym::{solve_axisym, MeridianProfile};
use crate::cap::{cap_for_volume, CapSolution};
use crate::error::{domain_err, Error, Result};
use crate::geometry::{inner_offset_domain, spanning_check, PlanarDomain, Tube, WireSpec, V2, V3};
use crate::hodograph::{GraphSource, MeshGraph};
use crate::mesh::{
    add_bump, init_mesh, minimize, minimize_two_sheets, plateau_domain, sheet_asymmetry, SolveParams, TriSurface,
};
use crate::par::{self, Execution};

/// Π = ((d − 1)/ω_{d−1})·(2/r)^{d+1}, ω_{d−1} the volume of the unit
/// (d − 1)-ball and r the radius of a disc inscribed in D₀.
pub fn compute_pi(dimension: u32, inscribed_radius: f64) -> Result<f64> {
    if dimension != 3 {
        return Err(domain_err(format!("dimension {dimension} is not supported")));
    }
    if !(inscribed_radius > 0.0 && inscribed_radius.is_finite()) {
        return Err(domain_err(format!("inscribed radius {inscribed_radius} must be positive")));
    }
    let omega = std::f64::consts::PI;
    Ok((dimension as f64 - 1.0) / omega * (2.0 / inscribed_radius).powi(dimension as i32 + 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Cap,
    Ode,
    Mesh,
}

impl SolverKind {
    /// Differences below this are treated as noise by the ordering checks.
    pub fn margin(self) -> f64 {
        match self {
            SolverKind::Cap => 1e-14,
            SolverKind::Ode => 1e-9,
            SolverKind::Mesh => 1e-8,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Leaf {
    Cap(CapSolution),
    Profile(MeridianProfile),
    Mesh(TriSurface),
}

const CIRCLE_POINTS: usize = 1024;

fn is_unit_circle(tube: &Tube) -> bool {
    matches!(tube.wire().spec(), WireSpec::Circle { radius } if *radius == 1.0)
}

fn disc(radius: f64) -> Result<PlanarDomain> {
    let pts = (0..CIRCLE_POINTS)
        .map(|k| {
            let a = 2.0 * std::f64::consts::PI * k as f64 / CIRCLE_POINTS as f64;
            V2::new(radius * a.cos(), radius * a.sin())
        })
        .collect();
    PlanarDomain::from_polyline(pts)
}

/// One leaf of the foliation.
#[derive(Debug, Clone, Serialize)]
pub struct FoliationRecord {
    pub eps: f64,
    pub lambda: f64,
    pub sup_height: f64,
    /// Area of the projected domain D^ε.
    pub domain_area: f64,
    pub solver_kind: SolverKind,
    #[serde(skip)]
    pub leaf: Leaf,
    #[serde(skip)]
    pub domain: PlanarDomain,
    #[serde(skip)]
    pub tube: Tube,
}

impl FoliationRecord {
    pub fn new(eps: f64, lambda: f64, leaf: Leaf, tube: &Tube) -> Result<Self> {
        let (kind, sup_height, domain) = match &leaf {
            Leaf::Cap(c) => (SolverKind::Cap, c.apex_height, disc(c.contact_radius)?),
            Leaf::Profile(p) => (
                SolverKind::Ode,
                p.samples.iter().map(|s| s[1]).fold(f64::NEG_INFINITY, f64::max),
                disc(p.contact_radius)?,
            ),
            Leaf::Mesh(m) => {
                let lp = m.boundary_loop()?;
                let pts = lp.iter().map(|&v| m.vertices[v].xy()).collect();
                (
                    SolverKind::Mesh,
                    m.vertices.iter().map(|v| v.z).fold(f64::NEG_INFINITY, f64::max),
                    PlanarDomain::from_polyline(pts)?,
                )
            }
        };
        if !(eps > 0.0) {
            return Err(domain_err(format!("record volume {eps} must be positive")));
        }
        if !(lambda > 0.0) {
            return Err(domain_err(format!("record at eps = {eps} has non-positive lambda {lambda}")));
        }
        if !(sup_height > 0.0) {
            return Err(domain_err(format!("record at eps = {eps} has non-positive height {sup_height}")));
        }
        Ok(FoliationRecord {
            eps,
            lambda,
            sup_height,
            domain_area: domain.area(),
            solver_kind: kind,
            leaf,
            domain,
            tube: tube.clone(),
        })
    }

    /// Height function of the upper sheet.
    pub fn graph(&self) -> Result<Box<dyn GraphSource + '_>> {
        Ok(match &self.leaf {
            Leaf::Cap(c) => Box::new(*c),
            Leaf::Profile(p) => Box::new(p.clone()),
            Leaf::Mesh(m) => Box::new(MeshGraph::new(m, &self.tube)?),
        })
    }
}

/// Solves one leaf with the requested backend.
pub fn solve_record(tube: &Tube, eps: f64, solver: SolverKind, params: &SolveParams) -> Result<FoliationRecord> {
    match solver {
        SolverKind::Cap | SolverKind::Ode if !is_unit_circle(tube) => {
            Err(domain_err("cap and ode backends need the unit circle wire"))
        }
        SolverKind::Cap => {
            let c = cap_for_volume(tube.delta(), eps)?;
            FoliationRecord::new(eps, c.lambda, Leaf::Cap(c), tube)
        }
        SolverKind::Ode => {
            let p = solve_axisym(tube.delta(), eps)?;
            FoliationRecord::new(eps, p.lambda, Leaf::Profile(p), tube)
        }
        SolverKind::Mesh => {
            let (m, rep) = solve_mesh_leaf(tube, eps, params)?;
            FoliationRecord::new(eps, rep.lambda_hat, Leaf::Mesh(m), tube)
        }
    }
}

fn solve_mesh_leaf(tube: &Tube, eps: f64, params: &SolveParams) -> Result<(TriSurface, crate::mesh::SolveReport)> {
    let dom = plateau_domain(tube, params.target_edge)?;
    let m = init_mesh(&dom, tube, params.target_edge)?;
    minimize(m, tube, 0.5 * eps, params)
}

fn sorted(records: &[FoliationRecord]) -> Vec<&FoliationRecord> {
    let mut v: Vec<&FoliationRecord> = records.iter().collect();
    v.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    v
}

fn check_common(records: &[FoliationRecord]) -> Result<()> {
    if let Some(first) = records.first() {
        for r in records {
            if r.tube.wire().spec() != first.tube.wire().spec() || r.tube.delta() != first.tube.delta() {
                return Err(Error::IncompatibleRecords("records belong to different wires or tubes".into()));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderingWitness {
    /// Record indices in ε order.
    pub pair: (usize, usize),
    pub kind: &'static str,
    pub point: Option<[f64; 2]>,
    pub values: (f64, f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderingReport {
    pub ok: bool,
    pub margin: f64,
    /// Smallest domain clearance, height gap and λ gap over consecutive pairs.
    pub min_domain_clearance: f64,
    pub min_height_gap: f64,
    pub min_lambda_gap: f64,
    pub witnesses: Vec<OrderingWitness>,
}

pub const ORDERING_SAMPLES: usize = 1000;

/// Nesting of consecutive leaves: D^{ε₁} inside D^{ε₂}, u^{ε₁} < u^{ε₂} on
/// D^{ε₁}, and λ strictly increasing, each by more than the solver margin.
pub fn check_ordering(records: &[FoliationRecord]) -> Result<OrderingReport> {
    check_common(records)?;
    let recs = sorted(records);
    let margin = recs.iter().map(|r| r.solver_kind.margin()).fold(0.0, f64::max);
    let mut rep = OrderingReport {
        ok: true,
        margin,
        min_domain_clearance: f64::INFINITY,
        min_height_gap: f64::INFINITY,
        min_lambda_gap: f64::INFINITY,
        witnesses: Vec::new(),
    };
    for k in 1..recs.len() {
        let (a, b) = (recs[k - 1], recs[k]);
        let (_, clearance) = b.domain.contains_domain(&a.domain, 0.0);
        rep.min_domain_clearance = rep.min_domain_clearance.min(clearance);
        if !(clearance > 0.0) {
            rep.witnesses.push(OrderingWitness {
                pair: (k - 1, k),
                kind: "domain",
                point: None,
                values: (a.domain_area, b.domain_area),
            });
        }
        let (ga, gb) = (a.graph()?, b.graph()?);
        let mut worst: Option<(V2, f64, f64)> = None;
        for p in a.domain.sample_points(ORDERING_SAMPLES) {
            let (Some(ua), Some(ub)) = (ga.height(p), gb.height(p)) else {
                rep.witnesses.push(OrderingWitness {
                    pair: (k - 1, k),
                    kind: "height_undefined",
                    point: Some([p.x, p.y]),
                    values: (f64::NAN, f64::NAN),
                });
                continue;
            };
            let gap = ub - ua;
            if worst.is_none_or(|w| gap < w.2 - w.1) {
                worst = Some((p, ua, ub));
            }
        }
        if let Some((p, ua, ub)) = worst {
            rep.min_height_gap = rep.min_height_gap.min(ub - ua);
            if !(ub - ua > margin) {
                rep.witnesses.push(OrderingWitness {
                    pair: (k - 1, k),
                    kind: "height",
                    point: Some([p.x, p.y]),
                    values: (ua, ub),
                });
            }
        }
        let dl = b.lambda - a.lambda;
        rep.min_lambda_gap = rep.min_lambda_gap.min(dl);
        if !(dl > margin) {
            rep.witnesses.push(OrderingWitness {
                pair: (k - 1, k),
                kind: "lambda",
                point: None,
                values: (a.lambda, b.lambda),
            });
        }
    }
    rep.ok = rep.witnesses.is_empty();
    Ok(rep)
}

/// Smallest distance from sampled points of cap `a` to the spherical cap `b`.
pub fn cap_separation(a: &CapSolution, b: &CapSolution, samples: usize) -> f64 {
    let dom = match disc(a.contact_radius) {
        Ok(d) => d,
        Err(_) => return f64::NAN,
    };
    let cb = V3::new(0.0, 0.0, b.z_c);
    let rim_z = b.delta * b.theta.sin();
    dom.sample_points(samples)
        .into_iter()
        .map(|p| {
            let x = V3::new(p.x, p.y, a.height(p.norm()));
            let d = x - cb;
            // nearest sphere point, if it lies on the cap; else the rim circle
            let foot = cb + d * (b.r / d.norm());
            if foot.z >= rim_z {
                (d.norm() - b.r).abs()
            } else {
                let rho = x.xy().norm();
                ((rho - b.contact_radius).powi(2) + (x.z - rim_z).powi(2)).sqrt()
            }
        })
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub ok: bool,
    pub asymmetry: f64,
    pub threshold: f64,
    pub lambda_hat: f64,
    pub iterations: usize,
}

/// Two independent sheets sharing the volume ε; the upper one starts with
/// an off-centre bump of height `perturbation · apex`. Passes when the
/// converged sheets are mirror images within 5·target_edge².
pub fn check_symmetry(tube: &Tube, eps: f64, params: &SolveParams, perturbation: f64) -> Result<SymmetryReport> {
    let h = params.target_edge;
    let dom = plateau_domain(tube, h)?;
    let flat = init_mesh(&dom, tube, h)?;
    let apex = if perturbation != 0.0 {
        let (single, _) = minimize(flat.clone(), tube, 0.5 * eps, params)?;
        single.vertices.iter().map(|v| v.z).fold(0.0, f64::max)
    } else {
        0.0
    };
    let (r_in, c) = dom.inscribed_radius();
    let mut upper = flat.clone();
    add_bump(
        &mut upper,
        V3::new(c.x + 0.3 * r_in, c.y + 0.1 * r_in, 0.0),
        0.5 * r_in,
        perturbation * apex,
    );
    let (u, l, rep) = minimize_two_sheets(upper, flat, tube, eps, params)?;
    let asymmetry = sheet_asymmetry(&u, &l, &dom, ORDERING_SAMPLES);
    let threshold = 5.0 * h * h;
    Ok(SymmetryReport {
        ok: asymmetry <= threshold,
        asymmetry,
        threshold,
        lambda_hat: rep.lambda_hat,
        iterations: rep.iterations,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub ok: bool,
    pub sup_height_monotone: bool,
    pub lambda_monotone: bool,
    pub hausdorff_monotone: bool,
    pub spanning_ok: bool,
    /// Hausdorff distance of each ∂D^ε to ∂D₀, in ε order.
    pub hausdorff: Vec<f64>,
    pub decades: f64,
    /// Fitted sup_height ~ ε^a and λ ~ ε^b, when the tail is long enough.
    pub height_exponent: Option<f64>,
    pub lambda_exponent: Option<f64>,
    pub max_lambda_over_eps: f64,
    pub offenders: Vec<usize>,
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn leaf_spans(rec: &FoliationRecord, d0: &PlanarDomain) -> Result<bool> {
    Ok(match &rec.leaf {
        Leaf::Mesh(m) => spanning_check(m, d0, ORDERING_SAMPLES),
        _ => {
            let g = rec.graph()?;
            d0.sample_points(ORDERING_SAMPLES).into_iter().all(|p| g.height(p).is_some())
        }
    })
}

/// D₀ at the resolution of the leaf: mesh leaves are compared with the
/// polygon through the inner equator at their own contact-line parameters,
/// so the chord error of the mesh does not mask the motion of the contact line.
fn reference_disc(rec: &FoliationRecord, d0: &PlanarDomain) -> Result<PlanarDomain> {
    match &rec.leaf {
        Leaf::Mesh(m) => {
            let pts = m
                .boundary_loop()?
                .iter()
                .map(|&v| {
                    let [s, _] = m.boundary_coords[v].ok_or(Error::NoBoundary)?;
                    Ok(rec.tube.point(s, 0.0).xy())
                })
                .collect::<Result<Vec<V2>>>()?;
            PlanarDomain::from_polyline(pts)
        }
        _ => Ok(d0.clone()),
    }
}

fn convergence_core(records: &[FoliationRecord], fit: bool) -> Result<ConvergenceReport> {
    check_common(records)?;
    let recs = sorted(records);
    let tube = &recs[0].tube;
    let d0 = inner_offset_domain(tube, CIRCLE_POINTS)?;
    let decades = (recs[recs.len() - 1].eps / recs[0].eps).log10();
    let mut offenders = Vec::new();
    let mut mono = |vals: &[f64]| {
        let mut ok = true;
        for k in 1..vals.len() {
            if !(vals[k] > vals[k - 1]) {
                ok = false;
                offenders.push(k);
            }
        }
        ok
    };
    let heights: Vec<f64> = recs.iter().map(|r| r.sup_height).collect();
    let lambdas: Vec<f64> = recs.iter().map(|r| r.lambda).collect();
    let hausdorff: Vec<f64> = recs
        .iter()
        .map(|r| Ok(r.domain.hausdorff_distance(&reference_disc(r, &d0)?)))
        .collect::<Result<_>>()?;
    let sup_height_monotone = mono(&heights) && heights[0] > 0.0;
    let lambda_monotone = mono(&lambdas) && lambdas[0] > 0.0;
    let hausdorff_monotone = mono(&hausdorff);
    let mut spanning_ok = true;
    for (k, r) in recs.iter().enumerate() {
        if !leaf_spans(r, &d0)? {
            spanning_ok = false;
            offenders.push(k);
        }
    }
    offenders.sort_unstable();
    offenders.dedup();
    let logs: Vec<f64> = recs.iter().map(|r| r.eps.ln()).collect();
    let (height_exponent, lambda_exponent) = if fit && recs.len() >= 2 {
        (
            Some(slope(&logs, &heights.iter().map(|h| h.ln()).collect::<Vec<_>>())),
            Some(slope(&logs, &lambdas.iter().map(|l| l.ln()).collect::<Vec<_>>())),
        )
    } else {
        (None, None)
    };
    let rates_ok = height_exponent.is_none_or(|a| a > 0.0) && lambda_exponent.is_none_or(|b| b > 0.0);
    Ok(ConvergenceReport {
        ok: sup_height_monotone && lambda_monotone && hausdorff_monotone && spanning_ok && rates_ok,
        sup_height_monotone,
        lambda_monotone,
        hausdorff_monotone,
        spanning_ok,
        hausdorff,
        decades,
        height_exponent,
        lambda_exponent,
        max_lambda_over_eps: recs.iter().map(|r| r.lambda / r.eps).fold(0.0, f64::max),
        offenders,
    })
}

/// sup_height, λ and the Hausdorff distance of ∂D^ε to ∂D₀ all decrease
/// strictly as ε decreases, every leaf spans D₀, and the fitted power laws
/// have positive exponents. Needs at least three decades of ε.
pub fn check_convergence_to_disc(records: &[FoliationRecord]) -> Result<ConvergenceReport> {
    if records.len() < 2 {
        return Err(Error::InsufficientTail { decades: 0.0 });
    }
    let lo = records.iter().map(|r| r.eps).fold(f64::INFINITY, f64::min);
    let hi = records.iter().map(|r| r.eps).fold(0.0, f64::max);
    let decades = (hi / lo).log10();
    if decades < 3.0 {
        return Err(Error::InsufficientTail { decades });
    }
    convergence_core(records, true)
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckOutcome {
    /// `None` when the check could not run; see `note`.
    pub ok: Option<bool>,
    pub offenders: Vec<usize>,
    pub note: Option<String>,
}

impl CheckOutcome {
    fn from_bool(ok: bool, offenders: Vec<usize>) -> Self {
        CheckOutcome {
            ok: Some(ok),
            offenders,
            note: None,
        }
    }
    fn skipped(note: &str) -> Self {
        CheckOutcome {
            ok: None,
            offenders: Vec::new(),
            note: Some(note.into()),
        }
    }
    pub fn failed(&self) -> bool {
        self.ok == Some(false)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub solver: SolverKind,
    pub delta: f64,
    pub records: Vec<FoliationRecord>,
    /// ε values whose solve failed, with the error code.
    pub failures: Vec<(f64, String)>,
    #[serde(rename = "Pi")]
    pub pi: f64,
    pub ordering_ok: CheckOutcome,
    pub symmetry_ok: CheckOutcome,
    pub curvature_bound_ok: CheckOutcome,
    pub convergence_ok: CheckOutcome,
    pub ordering: Option<OrderingReport>,
    pub convergence: Option<ConvergenceReport>,
    /// Smallest 3D distance between consecutive cap leaves.
    pub leaf_separation: Option<f64>,
    pub max_asymmetry: Option<f64>,
}

impl SweepReport {
    pub fn all_passed(&self) -> bool {
        self.failures.is_empty()
            && ![&self.ordering_ok, &self.symmetry_ok, &self.curvature_bound_ok, &self.convergence_ok]
                .iter()
                .any(|c| c.failed())
    }

    /// CSV bundle of the leaves: `eps,r,z` for axisymmetric leaves, `eps,x,y,z`
    /// vertex lists for mesh leaves.
    pub fn leaves_csv(&self) -> String {
        let mesh = self.records.iter().any(|r| matches!(r.leaf, Leaf::Mesh(_)));
        let mut out = String::from(if mesh { "eps,x,y,z\n" } else { "eps,r,z\n" });
        for r in &self.records {
            match &r.leaf {
                Leaf::Cap(c) => {
                    let n = 200;
                    for k in 0..=n {
                        let rho = c.contact_radius * (1.0 - k as f64 / n as f64);
                        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", r.eps, rho, c.height(rho));
                    }
                }
                Leaf::Profile(p) => {
                    for s in &p.samples {
                        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", r.eps, s[0], s[1]);
                    }
                }
                Leaf::Mesh(m) => {
                    for v in &m.vertices {
                        let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e}", r.eps, v.x, v.y, v.z);
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct SweepOptions {
    pub mesh: SolveParams,
    /// Records are solved in parallel across ε in parallel mode.
    pub exec: Execution,
    /// Run the two-sheet symmetry solve for mesh sweeps.
    pub symmetry_solve: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            mesh: SolveParams::default(),
            exec: Execution::Sequential,
            symmetry_solve: true,
        }
    }
}

/// Solves every ε of the grid and runs the validators on the records that
/// succeeded.
pub fn sweep(tube: &Tube, eps_grid: &[f64], solver: SolverKind, opts: &SweepOptions) -> Result<SweepReport> {
    if eps_grid.is_empty() {
        return Err(domain_err("empty volume grid"));
    }
    if eps_grid.windows(2).any(|w| !(w[1] > w[0])) || eps_grid[0] <= 0.0 {
        return Err(domain_err("volume grid must be positive and strictly increasing"));
    }
    let d0 = inner_offset_domain(tube, CIRCLE_POINTS)?;
    let (r_in, _) = d0.inscribed_radius();
    let pi = compute_pi(3, r_in)?;
    let results = par::map_slice(eps_grid, opts.exec, |&eps| solve_record(tube, eps, solver, &opts.mesh));
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for (eps, r) in eps_grid.iter().zip(results) {
        match r {
            Ok(rec) => records.push(rec),
            Err(e) => failures.push((*eps, e.code().to_string())),
        }
    }
    let (ordering_ok, ordering) = if records.len() < 2 {
        (CheckOutcome::from_bool(true, vec![]), None)
    } else {
        let o = check_ordering(&records)?;
        let mut idx: Vec<usize> = o.witnesses.iter().map(|w| w.pair.1).collect();
        idx.dedup();
        (CheckOutcome::from_bool(o.ok, idx), Some(o))
    };
    let bound_off: Vec<usize> = records
        .iter()
        .enumerate()
        .filter(|(_, r)| !(r.lambda > 0.0 && r.lambda <= pi * r.eps))
        .map(|(k, _)| k)
        .collect();
    let curvature_bound_ok = CheckOutcome::from_bool(bound_off.is_empty(), bound_off);
    let (convergence_ok, convergence) = if records.len() < 2 {
        (CheckOutcome::skipped("insufficient points"), None)
    } else {
        let fit = (records[records.len() - 1].eps / records[0].eps).log10() >= 3.0;
        let c = convergence_core(&records, fit)?;
        let mut out = CheckOutcome::from_bool(c.ok, c.offenders.clone());
        if !fit {
            out.note = Some("tail shorter than three decades: monotonicity only, no rate fit".into());
        }
        (out, Some(c))
    };
    let (symmetry_ok, max_asymmetry) = match solver {
        // both sheets of an axisymmetric leaf are the reflected profile
        SolverKind::Cap | SolverKind::Ode => {
            let mut worst: f64 = 0.0;
            for r in &records {
                let g = r.graph()?;
                let refl: Option<MeridianProfile> = match &r.leaf {
                    Leaf::Profile(p) => Some(p.reflected()),
                    _ => None,
                };
                for p in r.domain.sample_points(200) {
                    let up = g.height(p).unwrap_or(0.0);
                    let down = match (&refl, &r.leaf) {
                        (Some(rp), _) => rp.height(p).unwrap_or(0.0),
                        (None, Leaf::Cap(c)) => -c.height(p.norm()),
                        _ => 0.0,
                    };
                    worst = worst.max((up + down).abs());
                }
            }
            (CheckOutcome::from_bool(worst == 0.0, vec![]), Some(worst))
        }
        SolverKind::Mesh if opts.symmetry_solve => match records.last() {
            Some(r) => {
                let s = check_symmetry(tube, r.eps, &opts.mesh, 0.3)?;
                (CheckOutcome::from_bool(s.ok, vec![]), Some(s.asymmetry))
            }
            None => (CheckOutcome::skipped("no solved records"), None),
        },
        SolverKind::Mesh => (CheckOutcome::skipped("two-sheet solve disabled"), None),
    };
    let leaf_separation = if solver == SolverKind::Cap && records.len() >= 2 {
        let caps: Vec<&CapSolution> = sorted(&records)
            .into_iter()
            .filter_map(|r| match &r.leaf {
                Leaf::Cap(c) => Some(c),
                _ => None,
            })
            .collect();
        Some(
            caps.windows(2)
                .map(|w| cap_separation(w[0], w[1], 10_000))
                .fold(f64::INFINITY, f64::min),
        )
    } else {
        None
    };
    records.sort_by(|a, b| a.eps.total_cmp(&b.eps));
    Ok(SweepReport {
        solver,
        delta: tube.delta(),
        records,
        failures,
        pi,
        ordering_ok,
        symmetry_ok,
        curvature_bound_ok,
        convergence_ok,
        ordering,
        convergence,
        leaf_separation,
        max_asymmetry,
    })
}

/// Geometric grid of `n` points from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(domain_err(format!("bad geometric grid {lo}:{hi}:{n}")));
    }
    let r = (hi / lo).ln() / (n - 1) as f64;
    Ok((0..n)
        .map(|k| if k == n - 1 { hi } else { lo * (r * k as f64).exp() })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WireCurve;

    #[test]
    fn pi_examples() {
        assert!((compute_pi(3, 1.0).unwrap() - 32.0 / std::f64::consts::PI).abs() < 1e-12);
        assert!((compute_pi(3, 0.9).unwrap() - 15.52).abs() < 5e-3);
        let r = compute_pi(3, 0.3).unwrap() / compute_pi(3, 0.6).unwrap();
        assert!((r - 16.0).abs() < 1e-12);
        assert!(compute_pi(2, 1.0).is_err());
        assert!(compute_pi(3, 0.0).is_err());
    }

    #[test]
    fn cap_sweep_passes_everything() {
        let tube = Tube::new(WireCurve::circle(1.0).unwrap(), 0.1).unwrap();
        let grid = geometric_grid(1e-4, 0.05, 8).unwrap();
        let rep = sweep(&tube, &grid, SolverKind::Cap, &SweepOptions::default()).unwrap();
        assert!(rep.all_passed(), "{:?}", (&rep.ordering_ok, &rep.symmetry_ok, &rep.curvature_bound_ok, &rep.convergence_ok));
        assert_eq!(rep.convergence_ok.ok, Some(true));
        assert!(rep.leaf_separation.unwrap() > 0.0);
    }

    #[test]
    fn single_point_grid() {
        let tube = Tube::new(WireCurve::circle(1.0).unwrap(), 0.1).unwrap();
        let rep = sweep(&tube, &[0.01], SolverKind::Cap, &SweepOptions::default()).unwrap();
        assert_eq!(rep.ordering_ok.ok, Some(true));
        assert_eq!(rep.convergence_ok.ok, None);
        assert_eq!(rep.convergence_ok.note.as_deref(), Some("insufficient points"));
    }

    fn cap_records(grid: &[f64]) -> Vec<FoliationRecord> {
        let tube = Tube::new(WireCurve::circle(1.0).unwrap(), 0.1).unwrap();
        grid.iter()
            .map(|&e| solve_record(&tube, e, SolverKind::Cap, &SolveParams::default()).unwrap())
            .collect()
    }

    #[test]
    fn ordering_ignores_input_order() {
        let mut recs = cap_records(&geometric_grid(1e-4, 0.05, 8).unwrap());
        let a = check_ordering(&recs).unwrap();
        recs.reverse();
        recs.swap(1, 5);
        let b = check_ordering(&recs).unwrap();
        assert!(a.ok && b.ok);
        assert_eq!(a.min_lambda_gap, b.min_lambda_gap);
        assert_eq!(a.min_height_gap, b.min_height_gap);
    }

    #[test]
    fn swapped_lambda_is_detected() {
        let mut recs = cap_records(&geometric_grid(1e-3, 0.05, 5).unwrap());
        let l = recs[2].lambda;
        recs[2].lambda = recs[3].lambda;
        recs[3].lambda = l;
        let rep = check_ordering(&recs).unwrap();
        assert!(!rep.ok);
        assert!(rep.witnesses.iter().any(|w| w.kind == "lambda"));
    }

    #[test]
    fn constant_lambda_breaks_convergence() {
        let mut recs = cap_records(&geometric_grid(1e-5, 0.05, 8).unwrap());
        for r in recs.iter_mut() {
            r.lambda = 0.5;
        }
        let rep = check_convergence_to_disc(&recs).unwrap();
        assert!(!rep.ok && !rep.lambda_monotone);
    }

    #[test]
    fn short_tail_is_reported() {
        let recs = cap_records(&[0.01, 0.02, 0.04]);
        assert!(matches!(check_convergence_to_disc(&recs), Err(Error::InsufficientTail { .. })));
    }

    #[test]
    fn mixed_tubes_are_rejected() {
        let mut recs = cap_records(&[0.01, 0.02]);
        let other = Tube::new(WireCurve::circle(1.0).unwrap(), 0.05).unwrap();
        recs.push(solve_record(&other, 0.03, SolverKind::Cap, &SolveParams::default()).unwrap());
        assert!(matches!(check_ordering(&recs), Err(Error::IncompatibleRecords(_))));
    }

    #[test]
    fn ode_sweep_agrees_with_caps() {
        let tube = Tube::new(WireCurve::circle(1.0).unwrap(), 0.1).unwrap();
        let grid = geometric_grid(1e-3, 0.05, 4).unwrap();
        let rep = sweep(&tube, &grid, SolverKind::Ode, &SweepOptions::default()).unwrap();
        assert!(rep.failures.is_empty());
        assert_eq!(rep.ordering_ok.ok, Some(true));
        assert_eq!(rep.curvature_bound_ok.ok, Some(true));
        let caps = cap_records(&grid);
        for (o, c) in rep.records.iter().zip(&caps) {
            assert!((o.lambda - c.lambda).abs() < 1e-7 * c.lambda);
        }
    }
}
