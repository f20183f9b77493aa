//! Shooting solver for the meridian of an axisymmetric CMC cap spanning the
//! circular wire of radius 1.
//!
//! The meridian is parametrized by arc length with tangent angle ψ measured
//! from the outward radial direction:
//! dr/dℓ = cosψ, dz/dℓ = sinψ, dψ/dℓ = −λ − sinψ/r.
//! Integration runs inward from the contact point on the tube, where
//! orthogonality forces ψ = −θ. Along any solution r·sinψ + λr²/2 is
//! constant, and a profile regular at the pole has constant 0.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use serde::Serialize;

use crate::cap::{self, CapSolution};
use crate::error::{domain_err, Error, Result};
use crate::foliation::compute_pi;
use crate::numerics::{integrate_ode, Flow, OdeOptions};
use crate::par::{self, Execution};

/// Inward integration stops at |ψ| ≥ this when probing residuals.
const PSI_GUARD: f64 = 1.4;

/// Point on the tube where integration begins, with the meridian angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeridianStart {
    pub r: f64,
    pub z: f64,
    pub psi: f64,
}

impl MeridianStart {
    /// Contact point at latitude θ on the tube of radius δ around the unit
    /// circle, leaving orthogonally.
    pub fn on_tube(delta: f64, theta: f64) -> Self {
        MeridianStart {
            r: 1.0 - delta * theta.cos(),
            z: delta * theta.sin(),
            psi: -theta,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeridianProfile {
    /// `(r, z, psi)` from the contact point toward the axis.
    pub samples: Vec<[f64; 3]>,
    pub lambda: f64,
    pub theta: f64,
    pub contact_radius: f64,
    /// Total volume 2·∫ enclosed by the two reflected sheets and the tube.
    pub volume: f64,
    pub reached_axis: bool,
    /// sinψ + λr/2 at the innermost sample; 0 for a pole-regular profile.
    pub pole_residual: f64,
    /// Largest deviation of r·sinψ + λr²/2 from its starting value.
    pub first_integral_drift: f64,
    pub steps: usize,
}

struct Shot {
    samples: Vec<[f64; 3]>,
    r: f64,
    z: f64,
    psi: f64,
    /// ∫ r z dr from the stopping radius to the contact radius.
    moment: f64,
    guard_hit: bool,
    drift: f64,
    steps: usize,
}

fn shoot(lambda: f64, start: MeridianStart, r_end: f64, guard: f64, keep: bool) -> Result<Shot> {
    let rhs = |_: f64, y: &[f64; 4]| -> Result<[f64; 4]> {
        let (r, z, psi) = (y[0], y[1], y[2]);
        if r <= 0.0 {
            return Err(Error::StepUnderflow { r });
        }
        let (sn, cs) = psi.sin_cos();
        Ok([-cs, -sn, lambda + sn / r, r * z * cs])
    };
    let c0 = start.r * start.psi.sin() + 0.5 * lambda * start.r * start.r;
    let mut samples = Vec::new();
    if keep {
        samples.push([start.r, start.z, start.psi]);
    }
    let mut drift = 0.0_f64;
    let mut guard_hit = false;
    let opts = OdeOptions {
        h_max: 0.02 * start.r.max(1e-3),
        ..OdeOptions::default()
    };
    let stop_at = r_end * (1.0 + 1e-9);
    let run = integrate_ode(
        rhs,
        0.0,
        [start.r, start.z, start.psi, 0.0],
        &opts,
        |_, y, h| {
            let cs = y[2].cos().max(1e-3);
            (0.999 * (y[0] - r_end) / cs).max(opts.h_min * 2.0).min(h)
        },
        |_, y| {
            if keep {
                samples.push([y[0], y[1], y[2]]);
            }
            let c = y[0] * y[2].sin() + 0.5 * lambda * y[0] * y[0];
            drift = drift.max((c - c0).abs());
            if y[2].abs() >= guard {
                guard_hit = true;
                return Ok(Flow::Stop);
            }
            Ok(if y[0] <= stop_at { Flow::Stop } else { Flow::Continue })
        },
    )?;
    if !run.stopped {
        return Err(Error::NoConvergence {
            what: "meridian integration",
            iterations: run.steps,
            residuals: vec![run.y[0], run.y[2]],
        });
    }
    Ok(Shot {
        samples,
        r: run.y[0],
        z: run.y[1],
        psi: run.y[2],
        moment: run.y[3],
        guard_hit,
        drift,
        steps: run.steps,
    })
}

/// Volume of W ∩ {x₃ ≥ 0} between the inner equator and latitude θ for
/// the unit circle wire.
fn torus_wedge(delta: f64, theta: f64) -> f64 {
    let seg = (2.0 * theta - (2.0 * theta).sin()) / 4.0;
    2.0 * PI * (delta * delta * seg - delta.powi(3) * theta.sin().powi(3) / 3.0)
}

/// Integrates the meridian inward from `start` until r ≤ `step` (the axis is
/// then reached) and returns the sampled profile.
pub fn integrate_meridian(lambda: f64, start: MeridianStart, delta: f64, step: f64) -> Result<MeridianProfile> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(domain_err(format!("lambda = {lambda} must be non-negative")));
    }
    if !(step > 0.0 && step < start.r) {
        return Err(domain_err(format!("end radius {step} must lie in (0, {})", start.r)));
    }
    let shot = shoot(lambda, start, step, FRAC_PI_2, true)?;
    if shot.guard_hit {
        return Err(Error::Blowup { r: shot.r, psi: shot.psi });
    }
    Ok(profile_from(shot, lambda, start, delta))
}

fn profile_from(shot: Shot, lambda: f64, start: MeridianStart, delta: f64) -> MeridianProfile {
    let theta = -start.psi;
    let half = 2.0 * PI * (shot.moment + 0.5 * shot.z * shot.r * shot.r) - torus_wedge(delta, theta);
    MeridianProfile {
        reached_axis: !shot.guard_hit,
        pole_residual: shot.psi.sin() + 0.5 * lambda * shot.r,
        samples: shot.samples,
        lambda,
        theta,
        contact_radius: start.r,
        volume: 2.0 * half,
        first_integral_drift: shot.drift,
        steps: shot.steps,
    }
}

/// Newton options for [`solve_axisym_with`].
#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Relative central-difference step for the Jacobian.
    pub fd_step: f64,
    /// End radius as a fraction of the contact radius.
    pub end_fraction: f64,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            tol: 1e-10,
            max_iter: 100,
            fd_step: 1e-6,
            end_fraction: 1e-3,
        }
    }
}

/// Solver diagnostics returned alongside the profile.
#[derive(Debug, Clone, Serialize)]
pub struct ShootingReport {
    pub lambda: f64,
    pub theta: f64,
    pub residuals: [f64; 2],
    pub n_steps: usize,
}

/// Independent starting guess from the linearized problem on the disc of
/// radius 1 − δ: u ≈ λ(a² − r²)/4 carries half volume λπa⁴/8.
pub fn linearized_guess(delta: f64, eps: f64) -> (f64, f64) {
    let a = 1.0 - delta;
    let lambda = 4.0 * eps / (PI * a.powi(4));
    let theta = (0.5 * lambda * a).min(0.9).asin();
    (lambda, theta)
}

fn residuals(delta: f64, eps: f64, x: [f64; 2], opts: &ShootingOptions) -> Result<([f64; 2], Shot)> {
    let (lambda, theta) = (x[0], x[1]);
    if !(lambda > 0.0 && theta > 0.0 && theta < FRAC_PI_2) {
        return Err(domain_err("shooting parameters left the admissible box"));
    }
    let start = MeridianStart::on_tube(delta, theta);
    let r_end = opts.end_fraction * start.r;
    let shot = shoot(lambda, start, r_end, PSI_GUARD, false)?;
    // the first integral is conserved, so this is continuous even when the
    // guard stopped the run early
    let c = shot.r * shot.psi.sin() + 0.5 * lambda * shot.r * shot.r;
    let pole = c / r_end;
    let half = 2.0 * PI * (shot.moment + 0.5 * shot.z * shot.r * shot.r) - torus_wedge(delta, theta);
    Ok(([pole, (half - eps / 2.0) / (eps / 2.0)], shot))
}

fn norm2(r: [f64; 2]) -> f64 {
    r[0].hypot(r[1])
}

/// Damped Newton from `guess` on (λ, θ).
pub fn solve_axisym_from(
    delta: f64,
    eps: f64,
    guess: (f64, f64),
    opts: &ShootingOptions,
) -> Result<(MeridianProfile, ShootingReport)> {
    if !(delta > 0.0 && delta < 0.5) && delta != 0.0 {
        return Err(domain_err(format!("delta = {delta} must lie in [0, 0.5)")));
    }
    let emax = cap::eps_max(delta)?;
    if !(eps > 0.0) {
        return Err(domain_err(format!("eps = {eps} must be positive")));
    }
    if eps > emax {
        return Err(Error::VolumeTooLarge { eps, eps_max: emax });
    }
    let mut x = [guess.0, guess.1];
    let mut f = residuals(delta, eps, x, opts)?.0;
    let mut history = vec![norm2(f)];
    for it in 0..opts.max_iter {
        if norm2(f) <= opts.tol {
            return finish(delta, eps, x, f, it, opts);
        }
        // central differences with relative steps
        let mut jac = [[0.0; 2]; 2];
        for k in 0..2 {
            let h = opts.fd_step * x[k].abs().max(1e-12);
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let fp = residuals(delta, eps, xp, opts)?.0;
            let fm = residuals(delta, eps, xm, opts)?.0;
            for i in 0..2 {
                jac[i][k] = (fp[i] - fm[i]) / (2.0 * h);
            }
        }
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        if !det.is_finite() || det == 0.0 {
            break;
        }
        let dx = [
            -(jac[1][1] * f[0] - jac[0][1] * f[1]) / det,
            -(-jac[1][0] * f[0] + jac[0][0] * f[1]) / det,
        ];
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = [x[0] + t * dx[0], x[1] + t * dx[1]];
            if let Ok((fc, _)) = residuals(delta, eps, cand, opts) {
                if norm2(fc) < norm2(f) {
                    x = cand;
                    f = fc;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        history.push(norm2(f));
        if !accepted {
            break;
        }
    }
    if norm2(f) <= opts.tol {
        return finish(delta, eps, x, f, history.len(), opts);
    }
    Err(Error::NoConvergence {
        what: "axisymmetric shooting",
        iterations: history.len(),
        residuals: f.to_vec(),
    })
}

fn finish(
    delta: f64,
    eps: f64,
    x: [f64; 2],
    f: [f64; 2],
    n_steps: usize,
    opts: &ShootingOptions,
) -> Result<(MeridianProfile, ShootingReport)> {
    let start = MeridianStart::on_tube(delta, x[1]);
    let profile = integrate_meridian(x[0], start, delta, opts.end_fraction * start.r)?;
    let _ = eps;
    Ok((
        profile,
        ShootingReport {
            lambda: x[0],
            theta: x[1],
            residuals: f,
            n_steps,
        },
    ))
}

/// Solves for the meridian of total volume `eps`, starting from the
/// linearized guess.
pub fn solve_axisym(delta: f64, eps: f64) -> Result<MeridianProfile> {
    solve_axisym_with(delta, eps, &ShootingOptions::default()).map(|(p, _)| p)
}

pub fn solve_axisym_with(
    delta: f64,
    eps: f64,
    opts: &ShootingOptions,
) -> Result<(MeridianProfile, ShootingReport)> {
    solve_axisym_from(delta, eps, linearized_guess(delta, eps), opts)
}

impl MeridianProfile {
    /// Largest distance of a sample to the sphere of `cap`.
    pub fn distance_to_cap(&self, cap: &CapSolution) -> f64 {
        self.samples
            .iter()
            .map(|s| cap.meridian_distance(s[0], s[1]))
            .fold(0.0, f64::max)
    }

    /// Mirror image in the plane x₃ = 0: the lower sheet with multiplier −λ.
    pub fn reflected(&self) -> MeridianProfile {
        MeridianProfile {
            samples: self.samples.iter().map(|s| [s[0], -s[1], -s[2]]).collect(),
            lambda: -self.lambda,
            theta: -self.theta,
            pole_residual: -self.pole_residual,
            ..self.clone()
        }
    }

    /// CSV rows `r,z,psi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,z,psi\n");
        for s in &self.samples {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", s[0], s[1], s[2]);
        }
        out
    }
}

/// Outcome of the multi-start probe.
#[derive(Debug, Clone, Serialize)]
pub struct UniquenessProbe {
    pub lambdas: Vec<f64>,
    pub max_pairwise: f64,
    pub failures: usize,
}

/// Runs the shooting solver from guesses scaled by the given factors
/// (each factor pair multiplies the linearized (λ, θ) guess).
pub fn uniqueness_probe(delta: f64, eps: f64, factors: &[(f64, f64)], exec: Execution) -> UniquenessProbe {
    let base = linearized_guess(delta, eps);
    let opts = ShootingOptions::default();
    let results = par::map_slice(factors, exec, |&(a, b)| {
        solve_axisym_from(delta, eps, (base.0 * a, (base.1 * b).min(1.5)), &opts).map(|(_, r)| r.lambda)
    });
    let lambdas: Vec<f64> = results.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
    let failures = results.len() - lambdas.len();
    let mut max_pairwise = 0.0_f64;
    for i in 0..lambdas.len() {
        for k in i + 1..lambdas.len() {
            max_pairwise = max_pairwise.max((lambdas[i] - lambdas[k]).abs() / lambdas[i].abs());
        }
    }
    UniquenessProbe {
        lambdas,
        max_pairwise,
        failures,
    }
}

/// One row of the empirical regime scan.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeRow {
    pub eps: f64,
    pub lambda: Option<f64>,
    pub bound: f64,
    pub ok: bool,
    pub error: Option<String>,
}

/// Empirical small-volume boundary: the largest ε of the grid for which
/// shooting converges and λ ≤ Πε holds, and the first ε where it fails.
#[derive(Debug, Clone, Serialize)]
pub struct RegimeBoundary {
    pub pi: f64,
    pub rows: Vec<RegimeRow>,
    pub largest_ok: Option<f64>,
    pub first_violation: Option<f64>,
}

pub fn regime_boundary(delta: f64, eps_grid: &[f64], exec: Execution) -> Result<RegimeBoundary> {
    let pi = compute_pi(3, 1.0 - delta)?;
    let rows = par::map_slice(eps_grid, exec, |&eps| match solve_axisym(delta, eps) {
        Ok(p) => RegimeRow {
            eps,
            lambda: Some(p.lambda),
            bound: pi * eps,
            ok: p.lambda > 0.0 && p.lambda <= pi * eps,
            error: None,
        },
        Err(e) => RegimeRow {
            eps,
            lambda: None,
            bound: pi * eps,
            ok: false,
            error: Some(e.code().to_string()),
        },
    });
    let first_violation = rows.iter().find(|r| !r.ok).map(|r| r.eps);
    let largest_ok = rows
        .iter()
        .take_while(|r| r.ok)
        .map(|r| r.eps)
        .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.max(e))));
    Ok(RegimeBoundary {
        pi,
        rows,
        largest_ok,
        first_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cap::{cap_for_volume, cap_from_angle};

    #[test]
    fn cap_meridian_is_reproduced() {
        let cap = cap_from_angle(0.1, 0.2).unwrap();
        let start = MeridianStart::on_tube(0.1, 0.2);
        let p = integrate_meridian(cap.lambda, start, 0.1, 1e-4).unwrap();
        assert!(p.reached_axis);
        assert!(p.distance_to_cap(&cap) < 1e-8, "{}", p.distance_to_cap(&cap));
        assert!(p.first_integral_drift < 1e-9);
        assert!((p.volume - cap.volume).abs() < 1e-9);
    }

    #[test]
    fn zero_lambda_is_flat() {
        let start = MeridianStart::on_tube(0.1, 0.0);
        let p = integrate_meridian(0.0, start, 0.1, 1e-3).unwrap();
        let zmax = p.samples.iter().map(|s| s[1].abs()).fold(0.0, f64::max);
        assert!(zmax <= 1e-8);
    }

    #[test]
    fn too_large_lambda_blows_up() {
        let start = MeridianStart::on_tube(0.1, 0.2);
        let err = integrate_meridian(2.0, start, 0.1, 1e-4).unwrap_err();
        assert!(matches!(err, Error::Blowup { .. }));
    }

    #[test]
    fn shooting_agrees_with_cap() {
        let (p, rep) = solve_axisym_with(0.1, 0.05, &ShootingOptions::default()).unwrap();
        let cap = cap_for_volume(0.1, 0.05).unwrap();
        assert!(((p.lambda - cap.lambda) / cap.lambda).abs() < 1e-8);
        assert!(p.distance_to_cap(&cap) < 1e-7);
        assert!(rep.residuals[0].abs() <= 1e-9 && rep.residuals[1].abs() <= 1e-9);
    }

    #[test]
    fn reflection_flips_sign() {
        let p = solve_axisym(0.1, 0.05).unwrap();
        let q = p.reflected();
        assert_eq!(q.lambda, -p.lambda);
        assert!(q.samples.iter().zip(&p.samples).all(|(a, b)| a[1] == -b[1]));
    }
}
