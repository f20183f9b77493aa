//! Polar chart around the wire and the angle field Θ of a sheet.
//!
//! Near the wire a sheet is described in the meridian plane at s by the
//! angle Θ(s, ρ) at which the circle of radius δ + ρ around γ(s) meets it:
//! the point γ(s) + (δ+ρ)cosΘ ν(s) + (δ+ρ)sinΘ e₃ lies on the sheet. The
//! chart φ(s, t) = γ(s) + t ν(s) flattens the tubular neighborhood.
//!
//! With R = δ + ρ and a = |γ'|(1 − κ R cosΘ) the area density of the sheet
//! is L = √(a²(1 + R²Θ_ρ²) + R²Θ_s²) and the volume density under it has
//! Θ-derivative R·a, so a sheet of mean curvature λ satisfies
//!
//!   ∂_s(R²Θ_s / L) + ∂_ρ(a²R²Θ_ρ / L) = G / R²,
//!   G = R²·(a ∂_Θa (1 + R²Θ_ρ²) / L − λ R a),
//!
//! with the natural boundary condition Θ_ρ = 0 at ρ = 0.

use std::fmt::Write as _;

use nalgebra::Matrix2;
use serde::Serialize;

use crate::axisym::MeridianProfile;
use crate::cap::CapSolution;
use crate::error::{domain_err, Error, Result};
use crate::geometry::{Tube, WireCurve, V2};
use crate::mesh::{ProjectedLocator, TriSurface};
use crate::numerics::{find_root, integrate};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChartNode {
    pub s: f64,
    pub t: f64,
    pub phi: [f64; 2],
    /// Columns ∂φ/∂s and ∂φ/∂t.
    pub dphi: [[f64; 2]; 2],
    /// A = (Dφ)⁻¹(Dφ)⁻ᵀ in (s, t) coordinates.
    pub a: [[f64; 2]; 2],
    pub b: [[f64; 2]; 2],
}

/// Tabulated chart φ(s, t) = γ(s) + t ν(s) for 0 ≤ t ≤ δ₀.
#[derive(Debug, Clone)]
pub struct Chart {
    wire: WireCurve,
    delta: f64,
    delta0: f64,
    n_s: usize,
    n_rho: usize,
    nodes: Vec<ChartNode>,
}

fn to_arr(m: &Matrix2<f64>) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

impl Chart {
    pub fn wire(&self) -> &WireCurve {
        &self.wire
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn grid(&self) -> (usize, usize) {
        (self.n_s, self.n_rho)
    }

    /// Node (i, j) with s = i·L/n_s and t = j·δ₀/n_rho.
    pub fn node(&self, i: usize, j: usize) -> &ChartNode {
        &self.nodes[i * (self.n_rho + 1) + j]
    }

    pub fn nodes(&self) -> &[ChartNode] {
        &self.nodes
    }

    pub fn map(&self, s: f64, t: f64) -> V2 {
        let j = self.wire.jet(s);
        j.position + t * j.normal()
    }

    pub fn jacobian(&self, s: f64, t: f64) -> Matrix2<f64> {
        let j = self.wire.jet(s);
        let f = 1.0 - t * j.curvature();
        let ps = j.d1 * f;
        let nu = j.normal();
        Matrix2::new(ps.x, nu.x, ps.y, nu.y)
    }

    /// Metric coefficient matrix A(s, t).
    pub fn metric(&self, s: f64, t: f64) -> Matrix2<f64> {
        let a = self.area_factor(s, t);
        Matrix2::new(1.0 / (a * a), 0.0, 0.0, 1.0)
    }

    /// N = |det Dφ| = |γ'|(1 − tκ).
    pub fn area_factor(&self, s: f64, t: f64) -> f64 {
        let j = self.wire.jet(s);
        j.speed() * (1.0 - t * j.curvature())
    }

    /// Chart energy ∫∫ √(1 + ∇v·A∇v) N dt ds of a graph v over the chart
    /// strip t_lo(s) ≤ t ≤ t_hi. `grad` returns (v_s, v_t).
    pub fn energy<G, T>(&self, grad: G, t_lo: T, t_hi: f64, tol: f64) -> f64
    where
        G: Fn(f64, f64) -> (f64, f64),
        T: Fn(f64) -> f64,
    {
        let period = self.wire.period();
        integrate(
            |s| {
                integrate(
                    |t| {
                        let (vs, vt) = grad(s, t);
                        let n = self.area_factor(s, t);
                        (1.0 + vs * vs / (n * n) + vt * vt).sqrt() * n
                    },
                    t_lo(s),
                    t_hi,
                    tol / period,
                )
            },
            0.0,
            period,
            tol,
        )
    }
}

pub fn build_chart(wire: &WireCurve, delta: f64, delta0: f64, grid: (usize, usize)) -> Result<Chart> {
    let kmax = wire.max_abs_curvature();
    if !(delta > 0.0 && delta0 > 0.0 && delta0 * kmax <= 0.5) {
        return Err(domain_err(format!(
            "chart thickness {delta0} needs δ₀·max|κ| ≤ 0.5 (max|κ| = {kmax})"
        )));
    }
    let (n_s, n_rho) = grid;
    if n_s < 4 || n_rho < 2 {
        return Err(domain_err("chart grid too small"));
    }
    let mut chart = Chart {
        wire: wire.clone(),
        delta,
        delta0,
        n_s,
        n_rho,
        nodes: Vec::with_capacity(n_s * (n_rho + 1)),
    };
    let period = wire.period();
    for i in 0..n_s {
        let s = period * i as f64 / n_s as f64;
        for j in 0..=n_rho {
            let t = delta0 * j as f64 / n_rho as f64;
            let d = chart.jacobian(s, t);
            if d.determinant() <= 0.0 {
                return Err(Error::ChartSingular { s, t });
            }
            let inv = d.try_inverse().ok_or(Error::ChartSingular { s, t })?;
            let a = inv * inv.transpose();
            let b = a - Matrix2::identity();
            let p = chart.map(s, t);
            chart.nodes.push(ChartNode {
                s,
                t,
                phi: [p.x, p.y],
                dphi: to_arr(&d),
                a: to_arr(&a),
                b: to_arr(&b),
            });
        }
    }
    Ok(chart)
}

/// A sheet given as a height over the plane.
pub trait GraphSource {
    /// Height above `p`, or `None` outside the projected domain.
    fn height(&self, p: V2) -> Option<f64>;
    /// Tube angle of the contact line at wire parameter s, when known.
    fn contact_angle(&self, _s: f64) -> Option<f64> {
        None
    }
}

/// Cap over the unit circle centred at the origin.
impl GraphSource for CapSolution {
    fn height(&self, p: V2) -> Option<f64> {
        let r = p.norm();
        (r <= self.contact_radius).then(|| CapSolution::height(self, r))
    }
    fn contact_angle(&self, _s: f64) -> Option<f64> {
        Some(self.theta)
    }
}

/// Axisymmetric profile over the unit circle, cubic Hermite in r.
impl GraphSource for MeridianProfile {
    fn height(&self, p: V2) -> Option<f64> {
        let r = p.norm();
        let smp = &self.samples;
        if r > self.contact_radius {
            return None;
        }
        // samples run from the contact radius toward the axis
        let last = smp.last()?;
        if r <= last[0] {
            return Some(last[1]);
        }
        let k = smp.partition_point(|x| x[0] > r).clamp(1, smp.len() - 1);
        let (a, b) = (smp[k - 1], smp[k]);
        let h = b[0] - a[0];
        let u = (r - a[0]) / h;
        let (ma, mb) = (a[2].tan() * h, b[2].tan() * h);
        let (u2, u3) = (u * u, u * u * u);
        Some(
            (2.0 * u3 - 3.0 * u2 + 1.0) * a[1]
                + (u3 - 2.0 * u2 + u) * ma
                + (-2.0 * u3 + 3.0 * u2) * b[1]
                + (u3 - u2) * mb,
        )
    }
    fn contact_angle(&self, _s: f64) -> Option<f64> {
        Some(self.theta)
    }
}

/// The flat Plateau disc D₀ of a circular wire of radius 1.
pub struct FlatDisc {
    pub delta: f64,
}

impl GraphSource for FlatDisc {
    fn height(&self, p: V2) -> Option<f64> {
        (p.norm() <= 1.0 - self.delta).then_some(0.0)
    }
    fn contact_angle(&self, _s: f64) -> Option<f64> {
        Some(0.0)
    }
}

/// Upper sheet of a mesh solve.
pub struct MeshGraph {
    locator: ProjectedLocator,
    contact: Vec<(f64, f64)>,
    period: f64,
}

impl MeshGraph {
    pub fn new(mesh: &TriSurface, tube: &Tube) -> Result<Self> {
        let mut contact: Vec<(f64, f64)> = mesh.boundary_coords.iter().flatten().map(|c| (c[0], c[1])).collect();
        if contact.is_empty() {
            return Err(Error::NoBoundary);
        }
        contact.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(MeshGraph {
            locator: ProjectedLocator::new(mesh),
            contact,
            period: tube.wire().period(),
        })
    }
}

impl GraphSource for MeshGraph {
    fn height(&self, p: V2) -> Option<f64> {
        self.locator.height(p)
    }
    fn contact_angle(&self, s: f64) -> Option<f64> {
        let c = &self.contact;
        let s = s.rem_euclid(self.period);
        let k = c.partition_point(|x| x.0 <= s);
        let (a, b) = if k == 0 || k == c.len() {
            let (a, mut b) = (c[c.len() - 1], c[0]);
            b.0 += self.period;
            let a = if k == 0 { (a.0 - self.period, a.1) } else { a };
            (a, if k == 0 { (b.0 - self.period, b.1) } else { b })
        } else {
            (c[k - 1], c[k])
        };
        let w = if b.0 > a.0 { (s - a.0) / (b.0 - a.0) } else { 0.0 };
        Some(a.1 + w * (b.1 - a.1))
    }
}

/// Θ on a uniform grid over (s, ρ) ∈ [0, L) × [0, ρ_max], periodic in s.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaField {
    pub delta: f64,
    pub rho_max: f64,
    pub n_s: usize,
    pub n_rho: usize,
    pub period: f64,
    /// Row-major in s: value (i, j) at index i·(n_rho + 1) + j.
    pub values: Vec<f64>,
}

impl ThetaField {
    pub fn ds(&self) -> f64 {
        self.period / self.n_s as f64
    }

    pub fn drho(&self) -> f64 {
        self.rho_max / self.n_rho as f64
    }

    pub fn s(&self, i: usize) -> f64 {
        i as f64 * self.ds()
    }

    pub fn rho(&self, j: usize) -> f64 {
        j as f64 * self.drho()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[(i % self.n_s) * (self.n_rho + 1) + j]
    }

    fn at_wrapped(&self, i: isize, j: usize) -> f64 {
        self.at(i.rem_euclid(self.n_s as isize) as usize, j)
    }

    /// Central difference in s (periodic).
    pub fn d_s(&self, i: usize, j: usize) -> f64 {
        let i = i as isize;
        (self.at_wrapped(i + 1, j) - self.at_wrapped(i - 1, j)) / (2.0 * self.ds())
    }

    /// Central difference in ρ, second-order one-sided at the ends.
    pub fn d_rho(&self, i: usize, j: usize) -> f64 {
        let h = self.drho();
        let n = self.n_rho;
        if j == 0 {
            (-3.0 * self.at(i, 0) + 4.0 * self.at(i, 1) - self.at(i, 2)) / (2.0 * h)
        } else if j == n {
            (3.0 * self.at(i, n) - 4.0 * self.at(i, n - 1) + self.at(i, n - 2)) / (2.0 * h)
        } else {
            (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * h)
        }
    }

    pub fn d_ss(&self, i: usize, j: usize) -> f64 {
        let i = i as isize;
        (self.at_wrapped(i + 1, j) - 2.0 * self.at_wrapped(i, j) + self.at_wrapped(i - 1, j)) / self.ds().powi(2)
    }

    pub fn d_rr(&self, i: usize, j: usize) -> f64 {
        let j = j.clamp(1, self.n_rho - 1);
        (self.at(i, j + 1) - 2.0 * self.at(i, j) + self.at(i, j - 1)) / self.drho().powi(2)
    }

    pub fn d_sr(&self, i: usize, j: usize) -> f64 {
        let i = i as isize;
        let n = self.n_s;
        let f = |k: isize| self.d_rho(k.rem_euclid(n as isize) as usize, j);
        (f(i + 1) - f(i - 1)) / (2.0 * self.ds())
    }

    /// CSV rows `s,rho,theta`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,rho,theta\n");
        for i in 0..self.n_s {
            for j in 0..=self.n_rho {
                let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", self.s(i), self.rho(j), self.at(i, j));
            }
        }
        out
    }
}

const SCAN: usize = 96;

/// Θ field of `source` on the chart's grid, with ρ ∈ [0, δ₀].
pub fn extract_theta(source: &dyn GraphSource, chart: &Chart) -> Result<ThetaField> {
    let (n_s, n_rho) = chart.grid();
    let delta = chart.delta();
    let rho_max = chart.delta0();
    let period = chart.wire().period();
    if (delta + rho_max) * chart.wire().max_abs_curvature() >= 1.0 {
        return Err(domain_err("circle of radius δ + δ₀ leaves the chart"));
    }
    let mut values = Vec::with_capacity(n_s * (n_rho + 1));
    for i in 0..n_s {
        let s = period * i as f64 / n_s as f64;
        let jet = chart.wire().jet(s);
        let (g, nu) = (jet.position, jet.normal());
        for j in 0..=n_rho {
            let rho = rho_max * j as f64 / n_rho as f64;
            if j == 0 {
                if let Some(a) = source.contact_angle(s) {
                    values.push(a);
                    continue;
                }
            }
            let r = delta + rho;
            // points off the projected domain count as above the upper
            // sheet, or below it when under the plane
            let f = |th: f64| match source.height(g + r * th.cos() * nu) {
                Some(h) => r * th.sin() - h,
                None => th.signum(),
            };
            let lim = 0.5 * std::f64::consts::PI * (1.0 - 1e-9);
            let mut prev = (-lim, f(-lim));
            let mut bracket = None;
            let mut crossings = 0;
            let mut exact = None;
            for k in 1..=SCAN {
                let th = -lim + 2.0 * lim * k as f64 / SCAN as f64;
                let v = f(th);
                if v == 0.0 {
                    exact.get_or_insert(th);
                } else if prev.1 != 0.0 && v.signum() != prev.1.signum() {
                    crossings += 1;
                    bracket.get_or_insert((prev.0, th));
                }
                prev = (th, v);
            }
            if crossings > 1 {
                return Err(Error::NotAGraph { s, rho });
            }
            let theta = match (bracket, exact) {
                (Some((lo, hi)), _) => find_root(f, lo, hi, 1e-15, 0.0)?,
                (None, Some(th)) => th,
                (None, None) => return Err(Error::NotAGraph { s, rho }),
            };
            values.push(theta);
        }
    }
    Ok(ThetaField {
        delta,
        rho_max,
        n_s,
        n_rho,
        period,
        values,
    })
}

/// Exact Θ of a cap over the unit circle: intersection of the sphere with
/// the circle of radius δ + ρ around the wire point in the meridian plane.
pub fn cap_theta(cap: &CapSolution, rho: f64) -> f64 {
    let r = cap.delta + rho;
    // cosΘ + z_C sinΘ = k with the circle centred at (1, 0)
    let k = (1.0 + cap.z_c * cap.z_c + r * r - cap.r * cap.r) / (2.0 * r);
    let m = (1.0 + cap.z_c * cap.z_c).sqrt();
    let alpha = cap.z_c.atan2(1.0);
    alpha + (k / m).clamp(-1.0, 1.0).acos()
}

fn lagrangian_parts(jet_speed: f64, kappa: f64, r: f64, th: f64, ts: f64, tr: f64) -> (f64, f64, f64) {
    let a = jet_speed * (1.0 - kappa * r * th.cos());
    let a_th = jet_speed * kappa * r * th.sin();
    let l = (a * a * (1.0 + r * r * tr * tr) + r * r * ts * ts).sqrt();
    (a, a_th, l)
}

/// Area density |P_s × P_ρ| of the sheet in polar chart coordinates.
pub fn area_density(wire: &WireCurve, delta: f64, s: f64, rho: f64, theta: f64, grad: [f64; 2]) -> f64 {
    let j = wire.jet(s);
    lagrangian_parts(j.speed(), j.curvature(), delta + rho, theta, grad[0], grad[1]).2
}

/// The coefficients of the transformed area density: M with
/// q = (δ+ρ)T(Θ)∇Θ, T(Θ) = diag(1, cosΘ), and N = (det A)^{−1/2} at
/// t = (δ+ρ)cosΘ, so that √(1+M)·N is the area density.
pub fn m_and_n(chart: &Chart, s: f64, rho: f64, theta: f64, grad: [f64; 2]) -> (f64, f64, [f64; 2]) {
    let r = chart.delta() + rho;
    let q = [r * grad[0], r * theta.cos() * grad[1]];
    let t = r * theta.cos();
    let a = chart.metric(s, t);
    let b = a - Matrix2::identity();
    let qv = nalgebra::Vector2::new(q[0], q[1]);
    let e = nalgebra::Vector2::new(0.0, 1.0);
    let g2 = grad[0] * grad[0] + grad[1] * grad[1];
    let sn = theta.sin();
    let m = r * r * g2 + qv.dot(&(b * qv)) + 2.0 * qv.dot(&(b * e)) * sn + sn * sn * e.dot(&(b * e));
    let n = a.determinant().powf(-0.5);
    (m, n, q)
}

#[derive(Debug, Clone, Serialize)]
pub struct PdeResidual {
    pub n_s: usize,
    pub n_rho: usize,
    /// Interior residual at (i, j), j = 1 … n_rho − 1, row-major in s.
    pub interior: Vec<f64>,
    /// Θ_ρ at ρ = 0 per s node.
    pub neumann: Vec<f64>,
    pub max_interior: f64,
    pub l2_interior: f64,
    pub max_neumann: f64,
    pub l2_neumann: f64,
}

/// Divergence-form residual of the constant-mean-curvature equation for Θ
/// with multiplier `lambda`, and the Neumann residual at ρ = 0.
#[allow(clippy::needless_range_loop)]
pub fn pde_residual(theta: &ThetaField, chart: &Chart, lambda: f64) -> PdeResidual {
    let (ns, nr) = (theta.n_s, theta.n_rho);
    let (ds, dr) = (theta.ds(), theta.drho());
    let wire = chart.wire();
    let delta = theta.delta;
    let jets: Vec<_> = (0..ns).map(|i| wire.jet(theta.s(i))).collect();
    let mid_jets: Vec<_> = (0..ns).map(|i| wire.jet(theta.s(i) + 0.5 * ds)).collect();
    let th = |i: isize, j: usize| theta.at(i.rem_euclid(ns as isize) as usize, j);
    let dsc = |i: isize, j: usize| (th(i + 1, j) - th(i - 1, j)) / (2.0 * ds);
    let mut interior = Vec::with_capacity(ns * nr.saturating_sub(1));
    for i in 0..ns {
        let ii = i as isize;
        for j in 1..nr {
            let r = delta + theta.rho(j);
            // flux across s = s_{i±1/2}
            let flux_s = |k: isize| {
                let jm = &mid_jets[k.rem_euclid(ns as isize) as usize];
                let t_mid = 0.5 * (th(k, j) + th(k + 1, j));
                let ts = (th(k + 1, j) - th(k, j)) / ds;
                let tr = 0.5 * ((th(k, j + 1) - th(k, j - 1)) + (th(k + 1, j + 1) - th(k + 1, j - 1))) / (2.0 * dr);
                let (_, _, l) = lagrangian_parts(jm.speed(), jm.curvature(), r, t_mid, ts, tr);
                r * r * ts / l
            };
            // flux across ρ = ρ_{j±1/2}
            let jt = &jets[i];
            let flux_r = |jl: usize| {
                let rm = delta + theta.rho(jl) + 0.5 * dr;
                let t_mid = 0.5 * (th(ii, jl) + th(ii, jl + 1));
                let tr = (th(ii, jl + 1) - th(ii, jl)) / dr;
                let ts = 0.5 * (dsc(ii, jl) + dsc(ii, jl + 1));
                let (a, _, l) = lagrangian_parts(jt.speed(), jt.curvature(), rm, t_mid, ts, tr);
                a * a * rm * rm * tr / l
            };
            let div = (flux_s(ii) - flux_s(ii - 1)) / ds + (flux_r(j) - flux_r(j - 1)) / dr;
            let ts = dsc(ii, j);
            let tr = (th(ii, j + 1) - th(ii, j - 1)) / (2.0 * dr);
            let t0 = th(ii, j);
            let (a, a_th, l) = lagrangian_parts(jt.speed(), jt.curvature(), r, t0, ts, tr);
            let rhs = a * a_th * (1.0 + r * r * tr * tr) / l - lambda * r * a;
            interior.push(div - rhs);
        }
    }
    let neumann: Vec<f64> = (0..ns).map(|i| theta.d_rho(i, 0)).collect();
    let norms = |v: &[f64]| {
        let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let l2 = (v.iter().map(|x| x * x).sum::<f64>() / v.len().max(1) as f64).sqrt();
        (max, l2)
    };
    let (max_interior, l2_interior) = norms(&interior);
    let (max_neumann, l2_neumann) = norms(&neumann);
    PdeResidual {
        n_s: ns,
        n_rho: nr,
        interior,
        neumann,
        max_interior,
        l2_interior,
        max_neumann,
        l2_neumann,
    }
}

/// Lower-order term G at every node (central differences).
pub fn lower_order_term(theta: &ThetaField, chart: &Chart, lambda: f64) -> Vec<f64> {
    let wire = chart.wire();
    let mut out = Vec::with_capacity(theta.values.len());
    for i in 0..theta.n_s {
        let jet = wire.jet(theta.s(i));
        for j in 0..=theta.n_rho {
            let r = theta.delta + theta.rho(j);
            let (ts, tr) = (theta.d_s(i, j), theta.d_rho(i, j));
            let (a, a_th, l) = lagrangian_parts(jet.speed(), jet.curvature(), r, theta.at(i, j), ts, tr);
            out.push(r * r * (a * a_th * (1.0 + r * r * tr * tr) / l - lambda * r * a));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GradientSample {
    pub s: f64,
    pub rho: f64,
    pub point: [f64; 2],
    /// ∇u at `point` in the plane.
    pub grad: [f64; 2],
}

/// ∇u of the sheet rebuilt from Θ and its first differences, from
/// v(s, R cosΘ) = R sinΘ differentiated in s and ρ.
pub fn reconstruct_gradient(theta: &ThetaField, chart: &Chart) -> Vec<GradientSample> {
    let mut out = Vec::new();
    for i in 0..theta.n_s {
        let s = theta.s(i);
        let jet = chart.wire().jet(s);
        for j in 1..theta.n_rho {
            let r = theta.delta + theta.rho(j);
            let th = theta.at(i, j);
            let (ts, tr) = (theta.d_s(i, j), theta.d_rho(i, j));
            let (sn, cs) = th.sin_cos();
            let vt = (sn + r * cs * tr) / (cs - r * sn * tr);
            let vs = r * ts * (cs + sn * vt);
            let t = r * cs;
            let tangent = jet.d1 / jet.speed();
            let nu = jet.normal();
            let a = chart.area_factor(s, t);
            let g = tangent * (vs / a) + nu * vt;
            let p = jet.position + t * nu;
            out.push(GradientSample {
                s,
                rho: theta.rho(j),
                point: [p.x, p.y],
                grad: [g.x, g.y],
            });
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct NormRow {
    pub delta: f64,
    pub lambda: f64,
    pub theta_max: f64,
    pub grad_max: f64,
    /// max (δ+ρ)²·|D²Θ| with s-derivatives taken per unit arc length.
    pub d2_proxy: f64,
    pub g_max: f64,
    pub g_bound_violations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureBoundReport {
    pub rows: Vec<NormRow>,
    pub c1: f64,
    pub c2: f64,
    /// Largest growth proxy(δ₁)/proxy(δ₂) over pairs with δ₁ < δ₂.
    pub d2_ratio: f64,
    /// Largest over smallest proxy, reported only.
    pub d2_spread: f64,
    pub d2_uniform: bool,
    pub g_bound_ok: bool,
}

/// One solved configuration for the curvature-bound diagnostics.
pub struct ThetaRun<'a> {
    pub theta: &'a ThetaField,
    pub chart: &'a Chart,
    pub lambda: f64,
}

fn node_norms(run: &ThetaRun) -> (f64, Vec<(f64, f64, f64)>, f64) {
    let th = run.theta;
    let g = lower_order_term(th, run.chart, run.lambda);
    let mut per = Vec::with_capacity(g.len());
    let mut d2: f64 = 0.0;
    for i in 0..th.n_s {
        let sp = run.chart.wire().jet(th.s(i)).speed();
        for j in 0..=th.n_rho {
            let r = th.delta + th.rho(j);
            let grad = r * (th.d_s(i, j).powi(2) / (sp * sp) + th.d_rho(i, j).powi(2)).sqrt();
            per.push((th.at(i, j).abs(), grad, g[i * (th.n_rho + 1) + j].abs()));
            let h = (th.d_ss(i, j) / (sp * sp)).powi(2) + 2.0 * (th.d_sr(i, j) / sp).powi(2) + th.d_rr(i, j).powi(2);
            d2 = d2.max(r * r * h.sqrt());
        }
    }
    let tmax = per.iter().fold(0.0f64, |m, p| m.max(p.0));
    (tmax, per, d2)
}

/// Norm proxies per run, the bound |G| ≤ c₁|Θ| + c₂(δ+ρ)|∇Θ| with
/// constants fitted on the first run, and whether the D²Θ proxy grows by
/// more than 1.5 as δ decreases.
pub fn curvature_bound_report(runs: &[ThetaRun]) -> CurvatureBoundReport {
    let mut rows = Vec::new();
    let (mut c1, mut c2) = (0.0, 0.0);
    for (k, run) in runs.iter().enumerate() {
        let (tmax, per, d2) = node_norms(run);
        if k == 0 {
            // smallest equal constants that cover the first run
            let c = per
                .iter()
                .filter(|p| p.0 + p.1 > 0.0)
                .map(|p| p.2 / (p.0 + p.1))
                .fold(0.0f64, f64::max);
            c1 = c;
            c2 = c;
        }
        let viol = per.iter().filter(|p| p.2 > c1 * p.0 + c2 * p.1 + 1e-14).count();
        rows.push(NormRow {
            delta: run.theta.delta,
            lambda: run.lambda,
            theta_max: tmax,
            grad_max: per.iter().fold(0.0f64, |m, p| m.max(p.1)),
            d2_proxy: d2,
            g_max: per.iter().fold(0.0f64, |m, p| m.max(p.2)),
            g_bound_violations: viol,
        });
    }
    let mut ratio: f64 = 0.0;
    let mut spread: f64 = 1.0;
    for a in &rows {
        for b in &rows {
            if b.d2_proxy > 0.0 {
                spread = spread.max(a.d2_proxy / b.d2_proxy);
                if a.delta < b.delta {
                    ratio = ratio.max(a.d2_proxy / b.d2_proxy);
                }
            }
        }
    }
    CurvatureBoundReport {
        d2_uniform: ratio <= 1.5,
        g_bound_ok: rows.iter().all(|r| r.g_bound_violations == 0),
        rows,
        c1,
        c2,
        d2_ratio: ratio,
        d2_spread: spread,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cap::cap_from_angle;

    #[test]
    fn circle_chart_metric() {
        let w = WireCurve::circle(1.0).unwrap();
        let c = build_chart(&w, 0.1, 0.3, (16, 8)).unwrap();
        for n in c.nodes() {
            let want = 1.0 / (1.0 - n.t).powi(2);
            assert!((n.a[0][0] - want).abs() < 1e-12);
            assert!(n.a[0][1].abs() < 1e-12 && (n.a[1][1] - 1.0).abs() < 1e-12);
        }
        assert!(build_chart(&w, 0.1, 0.6, (16, 8)).is_err());
    }

    #[test]
    fn flat_disc_field() {
        let w = WireCurve::circle(1.0).unwrap();
        let chart = build_chart(&w, 0.1, 0.3, (16, 8)).unwrap();
        let f = extract_theta(&FlatDisc { delta: 0.1 }, &chart).unwrap();
        assert!(f.values.iter().all(|v| v.abs() < 1e-14));
        let res = pde_residual(&f, &chart, 0.0);
        assert!(res.max_interior <= 1e-10);
    }

    #[test]
    fn cap_field_matches_sphere_intersection() {
        let w = WireCurve::circle(1.0).unwrap();
        let cap = cap_from_angle(0.1, 0.2).unwrap();
        let chart = build_chart(&w, 0.1, 0.3, (8, 30)).unwrap();
        let f = extract_theta(&cap, &chart).unwrap();
        for i in 0..8 {
            assert_eq!(f.at(i, 0), 0.2);
            for j in 1..=30 {
                assert!((f.at(i, j) - cap_theta(&cap, f.rho(j))).abs() < 1e-10);
                assert!(f.at(i, j) < f.at(i, j - 1));
            }
        }
        assert!((cap_theta(&cap, 0.0) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn transformed_density_is_the_area_density() {
        let w = WireCurve::ellipse(1.3, 0.8).unwrap();
        let chart = build_chart(&w, 0.05, 0.14, (8, 4)).unwrap();
        for k in 0..20 {
            let s = 0.31 * k as f64;
            let (rho, th, g) = (0.01 * k as f64 % 0.1, 0.03 * (k as f64).sin(), [0.2 * (k as f64).cos(), -0.4 + 0.05 * k as f64]);
            let (m, n, q) = m_and_n(&chart, s, rho, th, g);
            let direct = area_density(&w, 0.05, s, rho, th, g);
            assert!(((1.0 + m).sqrt() * n - direct).abs() < 1e-12 * direct);
            let r = 0.05 + rho;
            assert!((q[0] - r * g[0]).abs() <= 1e-14 && (q[1] - r * th.cos() * g[1]).abs() <= 1e-14);
        }
    }
}
