//! Small numerical kernels: adaptive quadrature, bracketed root finding,
//! low-discrepancy points and an embedded Runge–Kutta integrator.

use crate::error::{Error, Result};

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const K15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = K15_WEIGHTS[7] * fc;
    let mut g = G7_WEIGHTS[3] * fc;
    for i in 0..7 {
        let x = h * GK_NODES[i];
        let s = f(c - x) + f(c + x);
        k += K15_WEIGHTS[i] * s;
        if i % 2 == 1 {
            g += G7_WEIGHTS[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]` to an
/// absolute tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, whole: (f64, f64), depth: u32) -> f64 {
        let (val, err) = whole;
        if err <= tol || depth >= 40 || (b - a).abs() < 1e-15 * (1.0 + a.abs()) {
            return val;
        }
        let m = 0.5 * (a + b);
        let left = gk15(f, a, m);
        let right = gk15(f, m, b);
        rec(f, a, m, 0.5 * tol, left, depth + 1) + rec(f, m, b, 0.5 * tol, right, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    let whole = gk15(&f, a, b);
    rec(&f, a, b, abs_tol, whole, 0)
}

/// Root of a continuous function on a sign-changing bracket: bisection
/// until the bracket is small, then safeguarded secant steps.
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, x_tol: f64, f_tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Domain(format!(
            "root not bracketed on [{lo}, {hi}] (f = {flo:e}, {fhi:e})"
        )));
    }
    for _ in 0..400 {
        // secant candidate, accepted only when it lands well inside the bracket
        let sec = hi - fhi * (hi - lo) / (fhi - flo);
        let width = hi - lo;
        let x = if sec.is_finite() && sec > lo + 0.05 * width && sec < hi - 0.05 * width {
            sec
        } else {
            0.5 * (lo + hi)
        };
        let fx = f(x);
        if fx == 0.0 || fx.abs() <= f_tol {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        if (hi - lo).abs() <= x_tol {
            return Ok(if flo.abs() < fhi.abs() { lo } else { hi });
        }
    }
    Err(Error::NoConvergence {
        what: "bracketed root finder",
        iterations: 400,
        residuals: vec![flo, fhi],
    })
}

/// Radical inverse of `index` in `base` (Halton component).
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    r
}

/// The `i`-th point of the 2D Halton sequence (bases 2, 3), skipping 0.
pub fn halton2(i: u64) -> [f64; 2] {
    [radical_inverse(i + 1, 2), radical_inverse(i + 1, 3)]
}

/// Status returned by the step observer of [`integrate_ode`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

/// Tolerances and limits for the embedded Dormand–Prince 5(4) integrator.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-12,
            atol: 1e-14,
            h_init: 1e-4,
            h_max: 0.05,
            h_min: 1e-14,
            max_steps: 200_000,
        }
    }
}

const DP_C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Outcome of [`integrate_ode`].
#[derive(Debug, Clone)]
pub struct OdeRun<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub steps: usize,
    pub stopped: bool,
}

/// Integrates `y' = f(t, y)` with adaptive Dormand–Prince steps. After every
/// accepted step `observe(t, y)` is called; it may stop the run. The
/// `limit(t, y, h)` hook can shorten a proposed step (used to land on
/// stopping surfaces); it returns the largest admissible step.
pub fn integrate_ode<const N: usize, F, O, L>(
    f: F,
    t0: f64,
    y0: [f64; N],
    opts: &OdeOptions,
    mut limit: L,
    mut observe: O,
) -> Result<OdeRun<N>>
where
    F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    O: FnMut(f64, &[f64; N]) -> Result<Flow>,
    L: FnMut(f64, &[f64; N], f64) -> f64,
{
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.h_init.min(opts.h_max);
    let mut k = [[0.0; N]; 7];
    k[0] = f(t, &y)?;
    let mut steps = 0;
    while steps < opts.max_steps {
        h = limit(t, &y, h).min(h);
        if h < opts.h_min {
            return Err(Error::StepUnderflow { r: y[0] });
        }
        for stage in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = DP_A[stage][j];
                if a != 0.0 {
                    for m in 0..N {
                        ys[m] += h * a * kj[m];
                    }
                }
            }
            k[stage] = f(t + DP_C[stage] * h, &ys)?;
        }
        let mut y_new = y;
        let mut err = 0.0_f64;
        for m in 0..N {
            let mut incr = 0.0;
            let mut e = 0.0;
            for s in 0..7 {
                incr += DP_B[s] * k[s][m];
                e += DP_E[s] * k[s][m];
            }
            y_new[m] = y[m] + h * incr;
            let sc = opts.atol + opts.rtol * y[m].abs().max(y_new[m].abs());
            err = err.max((h * e / sc).abs());
        }
        if err <= 1.0 || h <= opts.h_min * 1.0001 {
            t += h;
            y = y_new;
            k[0] = k[6];
            steps += 1;
            if observe(t, &y)? == Flow::Stop {
                return Ok(OdeRun { t, y, steps, stopped: true });
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).min(opts.h_max);
        } else {
            h *= (0.9 * err.powf(-0.25)).clamp(0.1, 0.9);
        }
    }
    Ok(OdeRun { t, y, steps, stopped: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_polynomial_and_smooth() {
        let v = integrate(|x| x.powi(7) - 3.0 * x, 0.0, 2.0, 1e-13);
        assert!((v - (256.0 / 8.0 - 6.0)).abs() < 1e-12);
        let v = integrate(|x| (1.0 - x * x).max(0.0).sqrt(), -1.0, 1.0, 1e-10);
        assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn root_finder_on_cubic() {
        let r = find_root(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15, 0.0).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
        assert!(find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12, 0.0).is_err());
    }

    #[test]
    fn halton_is_in_unit_square_and_spread() {
        let pts: Vec<_> = (0..1000).map(halton2).collect();
        assert!(pts.iter().all(|p| (0.0..1.0).contains(&p[0]) && (0.0..1.0).contains(&p[1])));
        let left = pts.iter().filter(|p| p[0] < 0.5).count();
        assert!((490..=510).contains(&left));
    }

    #[test]
    fn dopri_matches_harmonic_oscillator() {
        let opts = OdeOptions { h_max: 0.1, ..Default::default() };
        let run = integrate_ode(
            |_, y: &[f64; 2]| Ok([y[1], -y[0]]),
            0.0,
            [1.0, 0.0],
            &opts,
            |t, _, h| (std::f64::consts::PI - t).max(0.0).min(h).max(1e-13),
            |t, _| Ok(if t >= std::f64::consts::PI - 1e-13 { Flow::Stop } else { Flow::Continue }),
        )
        .unwrap();
        assert!(run.stopped);
        assert!((run.y[0] + 1.0).abs() < 1e-10, "{:?}", run.y);
    }
}
