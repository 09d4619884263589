//! Linear (`n = 0`) spectral data for `k = 1`.
//!
//! The rescaled kernel `F` solves `F'' + yF/3 = 0` with unit mass and is
//! `F(y) = 3^{-1/3} Ai(-3^{-1/3} y)`. Eigenfunctions are
//! `psi_l = (-1)^l D^l F / sqrt(l!)`; derivatives beyond the first follow
//! from `F^{(m+2)} = -(y F^{(m)} + m F^{(m-1)})/3`.

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::airy::airy_ai;
use crate::diagnostics::{envelope_fit, EnvelopeFit};
use crate::error::{Error, Result};
use crate::ode::{integrate, Options, System};
use crate::profile::Profile;
use crate::roots::brent;
use crate::shooting::{shoot, DEFAULT_DELTA_FACTOR};
use crate::similarity::root_nonlinearity;

/// `3^{-1/3}`.
fn scale() -> f64 {
    3f64.powf(-1.0 / 3.0)
}

/// `(F(y), F'(y))`.
pub fn kernel_value(y: f64) -> (f64, f64) {
    let c = scale();
    let (a, d) = airy_ai(-c * y);
    (c * a, -c * c * d)
}

/// `F, F', ..., F^{(order)}` at `y`.
pub fn kernel_derivatives(y: f64, order: usize) -> Vec<f64> {
    let (f, fp) = kernel_value(y);
    let mut d = vec![f, fp];
    for m in 0..order.saturating_sub(1) {
        let prev = if m == 0 { 0.0 } else { d[m - 1] };
        d.push(-(y * d[m] + m as f64 * prev) / 3.0);
    }
    d.truncate(order + 1);
    d
}

fn factorial(l: usize) -> f64 {
    (1..=l).map(|i| i as f64).product()
}

/// `psi_l(y) = (-1)^l F^{(l)}(y)/sqrt(l!)`.
pub fn psi_at(l: usize, y: f64) -> f64 {
    let d = kernel_derivatives(y, l)[l];
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    sign * d / factorial(l).sqrt()
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KernelSample {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// `derivatives[j][i]` is `F^{(j)}(grid[i])`.
    pub derivatives: Vec<Vec<f64>>,
    pub mass: f64,
    pub mass_domain: (f64, f64),
    /// Largest deviation of the ODE route from the Airy route on the grid.
    pub route_discrepancy: f64,
}

impl KernelSample {
    /// Fails with `MassDeficit` if `|mass - 1| > tol`.
    pub fn require_mass(&self, tol: f64) -> Result<()> {
        if (self.mass - 1.0).abs() > tol || !self.mass.is_finite() {
            return Err(Error::MassDeficit { mass: self.mass, tol });
        }
        Ok(())
    }
}

/// Samples `F` and its derivatives up to `order` on `points` uniform nodes
/// of `[y_min, y_max]`, checks it against direct integration of the ODE
/// from `y = 0` (to `tol`), and records the mass over the same range.
pub fn kernel_f(y_min: f64, y_max: f64, points: usize, order: usize, tol: f64) -> Result<KernelSample> {
    if !(y_min < 0.0 && 0.0 < y_max) || points < 2 {
        return Err(Error::InvalidArgument("need y_min < 0 < y_max and at least 2 points".into()));
    }
    let grid: Vec<f64> = (0..points)
        .map(|i| y_min + (y_max - y_min) * i as f64 / (points - 1) as f64)
        .collect();
    let order = order.max(1);
    let mut derivatives = vec![Vec::with_capacity(points); order + 1];
    for &y in &grid {
        for (j, v) in kernel_derivatives(y, order).into_iter().enumerate() {
            derivatives[j].push(v);
        }
    }
    let ode = kernel_by_integration(&grid)?;
    let mut worst: (f64, f64) = (0.0, 0.0);
    for ((y, a), b) in grid.iter().zip(&derivatives[0]).zip(&ode) {
        let diff = (a - b).abs();
        if diff > worst.1 {
            worst = (*y, diff);
        }
    }
    if worst.1 > tol {
        return Err(Error::KernelMismatch { at: worst.0, diff: worst.1 });
    }
    Ok(KernelSample {
        values: derivatives[0].clone(),
        grid,
        derivatives,
        mass: kernel_mass(y_min, y_max),
        mass_domain: (y_min, y_max),
        route_discrepancy: worst.1,
    })
}

/// `psi_l` on the sample grid.
pub fn psi_l(l: usize, sample: &KernelSample) -> Result<Vec<f64>> {
    let d = sample
        .derivatives
        .get(l)
        .ok_or_else(|| Error::InvalidArgument(format!("sample carries derivatives up to {}", sample.derivatives.len() - 1)))?;
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    let norm = factorial(l).sqrt();
    Ok(d.iter().map(|v| sign * v / norm).collect())
}

/// `F'' = -yF/3` written as `y -> s y` with `s = +-1`, so that both
/// directions integrate with increasing time.
struct KernelOde {
    direction: f64,
}

impl System for KernelOde {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, t: f64, s: &[f64], _branch: f64, out: &mut [f64]) {
        out[0] = s[1];
        out[1] = -self.direction * t * s[0] / 3.0;
    }
}

/// `F` on `grid` by integrating the ODE outward from `y = 0` with the
/// origin values `F(0) = 3^{-1/3} Ai(0)`, `F'(0) = -3^{-2/3} Ai'(0)`.
pub fn kernel_by_integration(grid: &[f64]) -> Result<Vec<f64>> {
    const AI0: f64 = 0.355_028_053_887_817_24;
    const AIP0: f64 = -0.258_819_403_792_806_8;
    let c = scale();
    let (f0, fp0) = (c * AI0, -c * c * AIP0);
    let lo = grid.iter().cloned().fold(0.0, f64::min);
    let hi = grid.iter().cloned().fold(0.0, f64::max);
    let opts = Options::with_tol(1e-13, 1e-15);
    let right = if hi > 0.0 {
        Some(integrate(&KernelOde { direction: 1.0 }, 0.0, &[f0, fp0], hi, &opts)?)
    } else {
        None
    };
    let left = if lo < 0.0 {
        Some(integrate(&KernelOde { direction: -1.0 }, 0.0, &[f0, -fp0], -lo, &opts)?)
    } else {
        None
    };
    grid.iter()
        .map(|&y| {
            let (traj, t) = if y >= 0.0 { (&right, y) } else { (&left, -y) };
            if y == 0.0 {
                return Ok(f0);
            }
            traj.as_ref()
                .and_then(|tr| tr.state_at(t))
                .map(|s| s[0])
                .ok_or(Error::InvalidArgument(format!("kernel integration stopped before y = {y}")))
        })
        .collect()
}

/// `int F` over `[y_min, y_max]` by Gauss-Legendre panels no wider than
/// half a local oscillation period.
pub fn kernel_mass(y_min: f64, y_max: f64) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(16).unwrap());
    let f = |y: f64| kernel_value(y).0;
    let mut total = 0.0;
    let mut a = y_min;
    while a < y_max {
        // Local wavelength 2 pi sqrt(3/y) for y > 0.
        let width = if a > 1.0 {
            (std::f64::consts::PI * (3.0 / a).sqrt()).min(1.0)
        } else {
            1.0
        };
        let b = (a + width).min(y_max);
        total += rule.integrate(a, b, f);
        a = b;
    }
    total
}

/// Smallest `y_max` (doubling from `y_start`) at which the mass over
/// `[y_min, y_max]` is within `tol` of 1.
pub fn mass_domain_for(y_min: f64, y_start: f64, tol: f64, y_limit: f64) -> Result<(f64, f64)> {
    let mut y_max = y_start;
    loop {
        let m = kernel_mass(y_min, y_max);
        if (m - 1.0).abs() <= tol {
            return Ok((y_max, m));
        }
        if y_max >= y_limit {
            return Err(Error::MassDeficit { mass: m, tol });
        }
        y_max = (2.0 * y_max).min(y_limit);
    }
}

/// Weak-form residual of `F'' + yF/3 = 0`: for bumps `phi = (1 - s^2)^4`
/// of half-width `w` centred every `w/2` on `[y_min, y_max]`, the largest
/// `|int F (phi'' + y phi/3)|` relative to `int |F phi''| + int |y F phi/3|`.
pub fn weak_residual(y_min: f64, y_max: f64, w: f64) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(40).unwrap());
    let mut worst: f64 = 0.0;
    let mut centre = y_min + w;
    while centre <= y_max - w + 1e-12 {
        let phi = |y: f64| {
            let s = (y - centre) / w;
            let q = 1.0 - s * s;
            let val = q.powi(4);
            // d2/dy2 (1-s^2)^4 = (-8 q^3 + 48 s^2 q^2)/w^2
            let dd = (-8.0 * q.powi(3) + 48.0 * s * s * q * q) / (w * w);
            (val, dd)
        };
        let (a, b) = (centre - w, centre + w);
        let res = rule.integrate(a, b, |y| {
            let (v, dd) = phi(y);
            kernel_value(y).0 * (dd + y * v / 3.0)
        });
        let norm = rule.integrate(a, b, |y| {
            let (v, dd) = phi(y);
            let f = kernel_value(y).0;
            (f * dd).abs() + (y * f * v / 3.0).abs()
        });
        worst = worst.max(res.abs() / norm.max(1e-300));
        centre += 0.5 * w;
    }
    worst
}

/// Extrema `(y, |F(y)|)` of `F` on `[lo, hi]`.
pub fn kernel_extrema(lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let fp = |y: f64| kernel_value(y).1;
    let mut out = Vec::new();
    let mut a = lo;
    let mut fa = fp(a);
    while a < hi {
        let step = if a > 1.0 { 0.25 * (3.0 / a).sqrt() } else { 0.05 };
        let b = (a + step).min(hi);
        let fb = fp(b);
        if fa.signum() != fb.signum() {
            if let Some(r) = brent(fp, a, b, 1e-14, 200) {
                out.push((r, kernel_value(r).0.abs()));
            }
        }
        a = b;
        fa = fb;
    }
    out
}

/// Log-log fit of the extremum magnitudes of `F` over `window`.
pub fn kernel_envelope(window: (f64, f64)) -> Result<EnvelopeFit> {
    envelope_fit(&kernel_extrema(window.0, window.1), window)
}

/// Exact coefficients of the adjoint polynomial before the `1/sqrt(l!)`
/// normalization; entry `i` multiplies `y^i`.
pub fn adjoint_coefficients(l: usize, k: u32) -> Result<Vec<Rational64>> {
    if l > 20 {
        return Err(Error::InvalidArgument("adjoint polynomials are supported for l <= 20".into()));
    }
    let order = 2 * k as usize + 1;
    let mut c = vec![Rational64::from_integer(0); l + 1];
    c[l] = Rational64::from_integer(1);
    let sign: i64 = if k % 2 == 1 { 1 } else { -1 };
    let mut j = 1;
    while order * j <= l {
        let m = order * j;
        // D^m y^l = l!/(l-m)! y^{l-m}
        let falling: i64 = ((l - m + 1)..=l).map(|i| i as i64).product();
        let jfact: i64 = (1..=j as i64).product();
        c[l - m] += Rational64::new(sign * falling, jfact);
        j += 1;
    }
    Ok(c)
}

/// `psi*_l(y) = (y^l + (-1)^{k+1} sum_j D^{(2k+1)j} y^l / j!)/sqrt(l!)`.
pub fn adjoint_poly(l: usize, k: u32, y: f64) -> Result<f64> {
    let c = adjoint_coefficients(l, k)?;
    let value = c
        .iter()
        .rev()
        .fold(0.0, |acc, r| acc * y + *r.numer() as f64 / *r.denom() as f64);
    Ok(value / factorial(l).sqrt())
}

/// One row of [`homotopy_compare`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HomotopyPoint {
    pub n: f64,
    pub distance: f64,
    /// Stretch `a` applied to the nonlinear profile, `y -> a y`.
    pub stretch: f64,
    /// Peak of the stretched nonlinear hump and of `psi_l`.
    pub peak_nonlinear: f64,
    pub peak_linear: f64,
}

/// Interface used for the nonlinear profiles; the comparison is invariant
/// under the exact scaling of the equations.
pub const HOMOTOPY_INTERFACE: f64 = -10.0;
/// Left cut of the comparison window.
pub const HOMOTOPY_LEFT: f64 = -8.0;

struct Hump {
    peak: f64,
    /// Signed value at the peak.
    height: f64,
    right_zero: f64,
    next_zero: f64,
}

/// First hump of `f` right of `lo`: the interval up to the first sign
/// change, its extremum, and the following sign change.
fn hump_of<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, samples: usize) -> Result<Hump> {
    let h = (hi - lo) / samples as f64;
    let ys: Vec<f64> = (0..=samples).map(|i| lo + h * i as f64).collect();
    let vals: Vec<f64> = ys.iter().map(|&y| f(y)).collect();
    // Sign changes below this level are interpolation noise at the interface.
    let floor = 1e-8 * vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut zeros = Vec::new();
    for i in 0..samples {
        let (a, b) = (vals[i], vals[i + 1]);
        if a.abs().max(b.abs()) <= floor {
            continue;
        }
        if a != 0.0 && (b == 0.0 || a.signum() != b.signum()) {
            let r = brent(&f, ys[i], ys[i + 1], 1e-13, 200).ok_or(Error::NoBracket)?;
            zeros.push(r);
            if zeros.len() == 2 {
                break;
            }
        }
    }
    if zeros.len() < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: zeros.len() });
    }
    let imax = (0..=samples)
        .filter(|&i| ys[i] < zeros[0])
        .max_by(|&a, &b| vals[a].abs().partial_cmp(&vals[b].abs()).unwrap())
        .ok_or(Error::TooFewPoints { needed: 1, got: 0 })?;
    let lo_p = ys[imax.saturating_sub(1)];
    let hi_p = ys[(imax + 1).min(samples)].min(zeros[0]);
    let peak = golden_max(&|y: f64| f(y).abs(), lo_p, hi_p);
    Ok(Hump {
        peak,
        height: f(peak),
        right_zero: zeros[0],
        next_zero: zeros[1],
    })
}

fn golden_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// Compares `f = |Y|^{-n/(n+1)} Y` of the shot profile with `psi_l` for
/// every `n` in `n_list`.
///
/// The nonlinear profile is stretched by `y -> a y` so that its first zero
/// (its second one when the first sits at `y = 0`) meets that of `psi_l`.
/// Both are scaled to unit signed extremum on their first hump and
/// compared in sup-norm on `[max(a y0, -8), second zero of psi_l]`.
pub fn homotopy_compare(n_list: &[f64], l: u32) -> Result<Vec<HomotopyPoint>> {
    let lin = |y: f64| psi_at(l as usize, y);
    let lin_hump = hump_of(lin, HOMOTOPY_LEFT, 20.0, 4000)?;
    n_list.iter().map(|&n| compare_one(n, l, &lin_hump)).collect()
}

fn compare_one(n: f64, l: u32, lin_hump: &Hump) -> Result<HomotopyPoint> {
    let y0 = HOMOTOPY_INTERFACE;
    let mut y_max = 40.0;
    let (profile, hump) = loop {
        let p = shoot(n, l, y0, Some(DEFAULT_DELTA_FACTOR * y0.abs()), y_max, 1e-11)?;
        let f = |y: f64| nonlinear_f(&p, n, y);
        match hump_of(f, p.grid[0], p.grid[p.len() - 1], 8000) {
            Ok(h) => break (p, h),
            Err(e) if y_max > 1000.0 => return Err(e),
            Err(_) => y_max *= 2.0,
        }
    };
    let stretch = if hump.right_zero.abs() > 1e-9 * y0.abs() {
        lin_hump.right_zero / hump.right_zero
    } else {
        lin_hump.next_zero / hump.next_zero
    };
    let left = (stretch * y0).max(HOMOTOPY_LEFT);
    let right = lin_hump.next_zero;
    if right / stretch > hump.next_zero.max(profile.grid[profile.len() - 1]) {
        return Err(Error::InvalidArgument("profile too short for the comparison window".into()));
    }
    let samples = 4000;
    let mut distance: f64 = 0.0;
    for i in 0..=samples {
        let y = left + (right - left) * i as f64 / samples as f64;
        let a = nonlinear_f(&profile, n, y / stretch) / hump.height;
        let b = psi_at(l as usize, y) / lin_hump.height;
        distance = distance.max((a - b).abs());
    }
    Ok(HomotopyPoint {
        n,
        distance,
        stretch,
        peak_nonlinear: stretch * hump.peak,
        peak_linear: lin_hump.peak,
    })
}

fn nonlinear_f(p: &Profile, n: f64, y: f64) -> f64 {
    match p.eval(y) {
        Some((v, _)) => root_nonlinearity(v, n),
        None => 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_value() {
        assert!((kernel_value(0.0).0 - 0.2461627038738828).abs() < 1e-15);
    }

    #[test]
    fn first_zeros() {
        for (lo, hi, want) in [(3.0, 3.6, 3.3721344080681663), (5.5, 6.2, 5.8958433292363015)] {
            let r = brent(|y| kernel_value(y).0, lo, hi, 1e-15, 200).unwrap();
            assert!((r - want).abs() < 1e-12);
        }
    }

    #[test]
    fn psi_identities() {
        let s = kernel_f(-10.0, 20.0, 301, 3, 1e-9).unwrap();
        let p0 = psi_l(0, &s).unwrap();
        let p1 = psi_l(1, &s).unwrap();
        let p2 = psi_l(2, &s).unwrap();
        for i in 0..s.grid.len() {
            assert_eq!(p0[i], s.values[i]);
            assert_eq!(p1[i], -s.derivatives[1][i]);
            let y = s.grid[i];
            assert!((p2[i] * 2f64.sqrt() + y * s.values[i] / 3.0).abs() < 1e-15);
        }
        // Third derivative against a difference quotient of the second.
        let h = 1e-5;
        for &y in &[-3.0, 0.7, 9.0] {
            let d2 = |y: f64| kernel_derivatives(y, 2)[2];
            let fd = (d2(y + h) - d2(y - h)) / (2.0 * h);
            assert!((kernel_derivatives(y, 3)[3] - fd).abs() < 1e-8);
        }
    }

    #[test]
    fn decays_monotonically_on_left() {
        let mut prev = kernel_value(-3.0).0;
        let mut y = -3.0;
        while y > -12.0 {
            y -= 0.1;
            let v = kernel_value(y).0;
            assert!(v > 0.0 && v < prev);
            prev = v;
        }
    }

    #[test]
    fn weak_residual_is_small() {
        assert!(weak_residual(-10.0, 50.0, 0.5) < 1e-12);
    }

    #[test]
    fn routes_agree() {
        let s = kernel_f(-10.0, 50.0, 601, 1, 1e-9).unwrap();
        assert!(s.route_discrepancy < 1e-9);
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(adjoint_poly(0, 1, 5.0).unwrap(), 1.0);
        let y = 1.7;
        assert!((adjoint_poly(2, 1, y).unwrap() - y * y / 2f64.sqrt()).abs() < 1e-15);
        assert!((adjoint_poly(3, 1, 0.0).unwrap() - 6f64.sqrt()).abs() < 1e-15);
        for l in 0..12 {
            let c = adjoint_coefficients(l, 1).unwrap();
            assert_eq!(c[l], Rational64::from_integer(1));
        }
        // l = 6: y^6 + 120 y^3 + 360
        let c = adjoint_coefficients(6, 1).unwrap();
        assert_eq!(c[3], Rational64::from_integer(120));
        assert_eq!(c[0], Rational64::from_integer(360));
    }

    #[test]
    fn mass_over_long_domain() {
        let m = kernel_mass(-12.0, 20_000.0);
        assert!((m - 1.0).abs() < 1e-3, "{m}");
    }

    #[test]
    fn require_mass_reports_deficit() {
        let s = kernel_f(-10.0, 10.0, 11, 1, 1e-9).unwrap();
        assert!(matches!(s.require_mass(1e-3), Err(Error::MassDeficit { .. })));
    }

    #[test]
    fn homotopy_distance_shrinks_with_n() {
        let pts = homotopy_compare(&[0.7, 0.5, 0.3, 0.2, 0.1], 0).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].distance < w[0].distance, "{pts:?}");
        }
        assert!(pts.last().unwrap().distance < 0.1);
    }
}
