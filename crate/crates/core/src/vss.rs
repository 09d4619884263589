//! Very singular solutions of the dispersion equation with absorption,
//! `k = 1`.
//!
//! The third-order profile equation
//! `Y''' + beta y Phi(Y)' + alpha Phi(Y) - G(Y) = 0`, with
//! `Phi(Y) = |Y|^{-n/(n+1)} Y` and `G(Y) = |Y|^{(p-n-1)/(n+1)} Y`, is
//! integrated once and solved as the first-order system
//!
//! ```text
//! Y' = V,   V' = c - beta y Phi(Y) - W,   W' = (alpha - beta) Phi(Y) - G(Y)
//! ```
//!
//! on `[y0, L]` with `Y = V = W = 0` at `y0` and one tail closure at `L`.
//! The constant `c = Y''(y0)` is the only free parameter once the mesh
//! unknowns are eliminated: the trapezoidal equations are solved node by
//! node, and `c` is found by bracketed root finding on the closure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate, Options, System};
use crate::profile::{Profile, ProfileMeta, ProfileSource, Termination};
use crate::roots::brent;
use crate::shooting::{termination_of, trajectory_profile};
use crate::similarity::{absorption, p_crit, root_nonlinearity, SimilarityParams};

/// Smallest admitted distance between `p` and any critical exponent.
pub const P_CRIT_GUARD: f64 = 0.05;
/// Distance to a critical exponent below which a warning is attached.
pub const P_CRIT_WARN: f64 = 0.5;
/// Default interface position.
pub const DEFAULT_Y0: f64 = -3.0;
/// Default mesh step.
pub const DEFAULT_STEP: f64 = 0.01;

/// Third boundary condition at the right end `L`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Closure {
    /// `Y(L) + Y(L - h_half) = 0` with `h_half` a half-oscillation length.
    Antisymmetric,
    /// `Y(L) = 0`.
    Zero,
    /// Mean of `Y` over the last two half-oscillations vanishes.
    TailMean,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VssProblem {
    pub n: f64,
    pub p: f64,
    pub y0: f64,
    pub length: f64,
    /// Number of mesh nodes on `[y0, L]`.
    pub mesh: usize,
    pub params: SimilarityParams,
    pub closure: Closure,
}

impl VssProblem {
    pub fn new(n: f64, p: f64, y0: f64, length: f64, mesh: usize) -> Result<Self> {
        let params = SimilarityParams::vss(n, p, 1)?;
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidExponents(format!("n={n} must be positive and finite")));
        }
        for l in 0..3 {
            let pc = p_crit(n, 1, l)?;
            if (p - pc).abs() < P_CRIT_GUARD {
                return Err(Error::InvalidExponents(format!(
                    "p={p} lies within {P_CRIT_GUARD} of the critical exponent p_{l}={pc}"
                )));
            }
        }
        if !(y0 < 0.0) || !(length > 0.0) || mesh < 16 {
            return Err(Error::InvalidArgument(format!(
                "need y0 < 0 < L and at least 16 nodes (y0={y0}, L={length}, mesh={mesh})"
            )));
        }
        Ok(Self {
            n,
            p,
            y0,
            length,
            mesh,
            params,
            closure: Closure::Antisymmetric,
        })
    }

    /// Problem with mesh step close to [`DEFAULT_STEP`].
    pub fn with_step(n: f64, p: f64, y0: f64, length: f64, step: f64) -> Result<Self> {
        let mesh = ((length - y0) / step).round() as usize + 1;
        Self::new(n, p, y0, length, mesh)
    }

    pub fn with_closure(mut self, closure: Closure) -> Self {
        self.closure = closure;
        self
    }

    pub fn step(&self) -> f64 {
        (self.length - self.y0) / (self.mesh - 1) as f64
    }

    pub fn grid(&self) -> Vec<f64> {
        let h = self.step();
        (0..self.mesh).map(|i| self.y0 + h * i as f64).collect()
    }

    /// Warnings for `p` close to a critical exponent.
    pub fn warnings(&self) -> Vec<String> {
        (0..3)
            .filter_map(|l| {
                let pc = p_crit(self.n, 1, l).ok()?;
                ((self.p - pc).abs() < P_CRIT_WARN)
                    .then(|| format!("p={} is within {P_CRIT_WARN} of p_{l}={pc:.6}", self.p))
            })
            .collect()
    }

    fn phi(&self, v: f64) -> f64 {
        root_nonlinearity(v, self.n)
    }

    fn g(&self, v: f64) -> f64 {
        (self.params.alpha - self.params.beta) * self.phi(v) - absorption(v, self.n, self.p)
    }

    fn f(&self, y: f64, v: f64, w: f64, c: f64) -> f64 {
        c - self.params.beta * y * self.phi(v) - w
    }
}

/// Mesh values of the first-order system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshState {
    pub grid: Vec<f64>,
    pub value: Vec<f64>,
    pub slope: Vec<f64>,
    pub flux: Vec<f64>,
    pub c: f64,
}

/// Result of [`solve_vss`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VssSolution {
    pub profile: Profile,
    pub state: MeshState,
    /// Largest defect of the discrete equations, closure included.
    pub residual_norm: f64,
    pub closure_defect: f64,
    pub hump_amplitude: f64,
    /// Mesh steps in the half-oscillation length used by the closure.
    pub half_period_steps: usize,
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Solves the trapezoidal step `x0 -> x1` for `Y1`, taking the root nearest
/// to the Taylor predictor. At the interface with `c = 0` the nontrivial
/// root is taken.
fn step(prob: &VssProblem, y_prev: f64, x0: [f64; 3], y1: f64, h: f64, c: f64) -> Option<[f64; 3]> {
    let beta = prob.params.beta;
    let f0 = prob.f(y_prev, x0[0], x0[2], c);
    let g0 = prob.g(x0[0]);
    let flux = |v: f64| x0[2] + 0.5 * h * (g0 + prob.g(v));
    let slope = |v: f64| 2.0 * (v - x0[0]) / h - x0[1];
    let res = |v: f64| slope(v) - x0[1] - 0.5 * h * (f0 + prob.f(y1, v, flux(v), c));
    let finish = |v: f64| Some([v, slope(v), flux(v)]);

    if x0 == [0.0, 0.0, 0.0] {
        // First step off the interface: take the root of largest modulus on
        // the side of sign(c), which for c = 0 is the nontrivial one. To
        // leading order (2/h) Y = (h/2) (c + beta |y1| Phi(Y)).
        let side = if c < 0.0 { -1.0 } else { 1.0 };
        let seed = (0.25 * h * h * beta * y1.abs()).powf((prob.n + 1.0) / prob.n) + 0.25 * h * h * c.abs();
        if !(seed > 0.0) {
            return finish(0.0);
        }
        let signed = |v: f64| res(side * v);
        let mut hi = 4.0 * seed;
        let r_hi = signed(hi);
        let mut lo = hi;
        for _ in 0..200 {
            lo *= 0.5;
            if signed(lo).signum() != r_hi.signum() {
                let root = brent(signed, lo, hi, 1e-16 * seed, 200)?;
                return finish(side * root);
            }
            hi = lo;
        }
        return finish(0.0);
    }

    let pred = x0[0] + h * x0[1] + 0.5 * h * h * f0;
    let r_pred = res(pred);
    if r_pred == 0.0 {
        return finish(pred);
    }
    let scale = x0[0].abs() + h * x0[1].abs() + h * h * f0.abs() + 1e-300;
    let mut r = 1e-3 * scale;
    for _ in 0..200 {
        for side in [1.0, -1.0] {
            let b = pred + side * r;
            let rb = res(b);
            if rb.is_nan() {
                return None;
            }
            if rb.signum() != r_pred.signum() {
                let (lo, hi) = if side > 0.0 { (pred, b) } else { (b, pred) };
                let root = brent(res, lo, hi, 1e-16 * scale, 200)?;
                return finish(root);
            }
        }
        r *= 2.0;
        if !r.is_finite() {
            return None;
        }
    }
    None
}

/// Trapezoidal march for a given `c`; `None` on blow-up.
pub fn march(prob: &VssProblem, c: f64, cap: f64) -> Option<MeshState> {
    let grid = prob.grid();
    let h = prob.step();
    let mut value = vec![0.0; grid.len()];
    let mut slope = vec![0.0; grid.len()];
    let mut flux = vec![0.0; grid.len()];
    let mut x = [0.0; 3];
    for i in 1..grid.len() {
        x = step(prob, grid[i - 1], x, grid[i], h, c)?;
        if !(x[0].abs() <= cap && x[1].abs().is_finite() && x[2].abs().is_finite()) {
            return None;
        }
        value[i] = x[0];
        slope[i] = x[1];
        flux[i] = x[2];
    }
    Some(MeshState {
        grid,
        value,
        slope,
        flux,
        c,
    })
}

fn closure_value(closure: Closure, state: &MeshState, m: usize) -> f64 {
    let v = &state.value;
    let last = v.len() - 1;
    match closure {
        Closure::Antisymmetric => v[last] + v[last - m],
        Closure::Zero => v[last],
        Closure::TailMean => {
            let start = last.saturating_sub(2 * m);
            let h = state.grid[1] - state.grid[0];
            let integral: f64 = (start..last).map(|i| 0.5 * h * (v[i] + v[i + 1])).sum();
            integral / (h * (last - start) as f64)
        }
    }
}

/// Largest defect of the trapezoidal equations, the interface conditions
/// and the closure, re-evaluated from the mesh values alone.
pub fn mesh_defect(prob: &VssProblem, state: &MeshState, half_period_steps: usize) -> f64 {
    let s = state;
    let mut worst = s.value[0].abs().max(s.slope[0].abs()).max(s.flux[0].abs());
    for i in 0..s.grid.len() - 1 {
        let h = s.grid[i + 1] - s.grid[i];
        let e1 = s.value[i + 1] - s.value[i] - 0.5 * h * (s.slope[i] + s.slope[i + 1]);
        let e2 = s.slope[i + 1]
            - s.slope[i]
            - 0.5
                * h
                * (prob.f(s.grid[i], s.value[i], s.flux[i], s.c)
                    + prob.f(s.grid[i + 1], s.value[i + 1], s.flux[i + 1], s.c));
        let e3 = s.flux[i + 1] - s.flux[i] - 0.5 * h * (prob.g(s.value[i]) + prob.g(s.value[i + 1]));
        worst = worst.max(e1.abs()).max(e2.abs()).max(e3.abs());
    }
    worst.max(closure_value(prob.closure, s, half_period_steps).abs())
}

/// Largest value of `Y` before its first sign change.
pub fn first_hump_amplitude(value: &[f64]) -> f64 {
    let mut best: f64 = 0.0;
    for &v in value.iter().skip(1) {
        if v < 0.0 {
            break;
        }
        best = best.max(v);
    }
    best
}

/// Half-oscillation length, in mesh steps, from the zero spacing in the
/// right half of the `c = 0` march.
fn half_period(prob: &VssProblem, state: &MeshState) -> usize {
    let mid = 0.5 * (prob.y0 + prob.length).max(0.0);
    let mut zeros = Vec::new();
    for i in 0..state.value.len() - 1 {
        let (a, b) = (state.value[i], state.value[i + 1]);
        if state.grid[i] >= mid && a != 0.0 && a.signum() != b.signum() {
            zeros.push(state.grid[i] - a * (state.grid[i + 1] - state.grid[i]) / (b - a));
        }
    }
    let h = prob.step();
    let fallback = (state.value.len() / 20).max(1);
    if zeros.len() < 3 {
        return fallback;
    }
    let tail = &zeros[zeros.len().saturating_sub(5)..];
    let spacing = (tail[tail.len() - 1] - tail[0]) / (tail.len() - 1) as f64;
    ((spacing / h).round() as usize).clamp(1, state.value.len() - 2)
}

/// Trial values of `c` for bracketing: 0 and `+-10^e`, `e` in `[-14, 0]`.
fn c_grid() -> Vec<f64> {
    let mut pos: Vec<f64> = (0..=112).map(|i| 10f64.powf(-14.0 + 14.0 * i as f64 / 112.0)).collect();
    let mut neg: Vec<f64> = pos.iter().rev().map(|c| -c).collect();
    neg.push(0.0);
    neg.append(&mut pos);
    neg
}

fn to_profile(prob: &VssProblem, state: &MeshState, converged: bool) -> Profile {
    Profile::new(
        state.grid.clone(),
        state.value.clone(),
        state.slope.clone(),
        ProfileMeta {
            n: Some(prob.n),
            k: 1,
            l: None,
            y0: prob.y0,
            delta: 0.0,
            termination: if converged {
                Termination::Converged
            } else {
                Termination::NotConverged
            },
            source: ProfileSource::Vss,
        },
    )
}

/// Solves the discrete boundary-value problem.
///
/// Candidate roots of the closure in `c` are bracketed on [`c_grid`]
/// (brackets across `c = 0` and across blow-up are skipped) and refined by
/// Brent's method; the root with the smallest `|c|` and a nontrivial first
/// hump is returned. A solution with residual above `tol` is reported as
/// `NoConvergence` carrying the best iterate.
pub fn solve_vss(prob: &VssProblem, tol: f64) -> Result<VssSolution> {
    let cap = 1e8;
    let base = march(prob, 0.0, cap);
    let m = match &base {
        Some(s) => half_period(prob, s),
        None => (prob.mesh / 20).max(1),
    };
    let eval = |c: f64| march(prob, c, cap).map(|s| closure_value(prob.closure, &s, m));

    let cs = c_grid();
    let vals: Vec<Option<f64>> = cs.iter().map(|&c| eval(c)).collect();
    let mut candidates: Vec<f64> = Vec::new();
    for (i, &c) in cs.iter().enumerate() {
        if vals[i] == Some(0.0) {
            candidates.push(c);
        }
    }
    for i in 0..cs.len() - 1 {
        let (a, b) = (cs[i], cs[i + 1]);
        if a < 0.0 && b >= 0.0 || a <= 0.0 && b > 0.0 {
            continue;
        }
        if let (Some(fa), Some(fb)) = (vals[i], vals[i + 1]) {
            if fa != 0.0 && fb != 0.0 && fa.signum() != fb.signum() {
                let root = brent(|c| eval(c).unwrap_or(f64::NAN), a, b, 1e-15 * a.abs().max(b.abs()), 300);
                if let Some(r) = root {
                    candidates.push(r);
                }
            }
        }
    }
    candidates.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());

    let mut best: Option<(f64, MeshState)> = None;
    for c in candidates {
        let Some(state) = march(prob, c, cap) else { continue };
        if first_hump_amplitude(&state.value) <= 0.0 {
            continue;
        }
        let defect = mesh_defect(prob, &state, m);
        if defect <= tol {
            return Ok(finish(prob, state, m, defect, true));
        }
        if best.as_ref().map_or(true, |(d, _)| defect < *d) {
            best = Some((defect, state));
        }
    }
    // No admissible root: report the trial with the smallest defect.
    for (i, &c) in cs.iter().enumerate() {
        if vals[i].is_none() {
            continue;
        }
        if let Some(state) = march(prob, c, cap) {
            let defect = mesh_defect(prob, &state, m);
            if best.as_ref().map_or(true, |(d, _)| defect < *d) {
                best = Some((defect, state));
            }
        }
    }
    match best {
        Some((defect, state)) => {
            let sol = finish(prob, state, m, defect, false);
            Err(Error::NoConvergence {
                residual: defect,
                best: Box::new(sol.profile),
            })
        }
        None => Err(Error::NoConvergence {
            residual: f64::INFINITY,
            best: Box::new(to_profile(
                prob,
                &MeshState {
                    grid: vec![prob.y0],
                    value: vec![0.0],
                    slope: vec![0.0],
                    flux: vec![0.0],
                    c: 0.0,
                },
                false,
            )),
        }),
    }
}

fn finish(prob: &VssProblem, state: MeshState, m: usize, defect: f64, converged: bool) -> VssSolution {
    VssSolution {
        profile: to_profile(prob, &state, converged),
        closure_defect: closure_value(prob.closure, &state, m).abs(),
        hump_amplitude: first_hump_amplitude(&state.value),
        residual_norm: defect,
        half_period_steps: m,
        converged,
        warnings: prob.warnings(),
        state,
    }
}

/// First-hump amplitudes over right ends `lengths` and their largest
/// relative deviation from the first entry.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HumpStability {
    pub lengths: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub residuals: Vec<f64>,
    pub variation: f64,
}

pub fn hump_stability(prob: &VssProblem, lengths: &[f64], tol: f64) -> Result<HumpStability> {
    if lengths.is_empty() {
        return Err(Error::InvalidArgument("no lengths given".into()));
    }
    let h = prob.step();
    let mut amplitudes = Vec::new();
    let mut residuals = Vec::new();
    for &length in lengths {
        let mut q = VssProblem::with_step(prob.n, prob.p, prob.y0, length, h)?;
        q.closure = prob.closure;
        let sol = solve_vss(&q, tol)?;
        amplitudes.push(sol.hump_amplitude);
        residuals.push(sol.residual_norm);
    }
    let reference = amplitudes[0];
    let variation = amplitudes
        .iter()
        .map(|a| (a - reference).abs() / reference)
        .fold(0.0, f64::max);
    Ok(HumpStability {
        lengths: lengths.to_vec(),
        amplitudes,
        residuals,
        variation,
    })
}

/// `n = inf` limit `Y''' + (sign(Y) y)' - Y = 0`, integrated once:
/// state `(Y, Y', Z)` with `Z' = Y` and `Y'' = -sign(Y) y + Z`.
#[derive(Clone, Copy, Debug)]
pub struct LimitVssSystem;

impl System for LimitVssSystem {
    fn dim(&self) -> usize {
        3
    }

    fn rhs(&self, y: f64, s: &[f64], branch: f64, out: &mut [f64]) {
        out[0] = s[1];
        out[1] = -branch * y + s[2];
        out[2] = s[0];
    }
}

/// Default launch curvature `Y''(y0)` of the limit equation, as a multiple
/// of `|y0|`.
pub const LIMIT_VSS_CURVATURE: f64 = 0.5;

/// Integrates the limit equation from a quadratic contact at `y0`
/// (`Y = Y' = 0`, `Y'' = LIMIT_VSS_CURVATURE |y0|`) with restarts at every
/// zero.
pub fn limit_vss_integrate(y0: f64, y_max: f64, tol: f64) -> Result<Profile> {
    limit_vss_integrate_with(y0, LIMIT_VSS_CURVATURE * y0.abs(), y_max, tol)
}

/// As [`limit_vss_integrate`] with an explicit launch curvature.
pub fn limit_vss_integrate_with(y0: f64, curvature: f64, y_max: f64, tol: f64) -> Result<Profile> {
    if !(y0 < 0.0 && y_max > y0 && curvature.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need y0 < 0, y_max > y0 and finite curvature (y0={y0}, y_max={y_max}, curvature={curvature})"
        )));
    }
    let opts = Options {
        restart_at_zeros: true,
        initial_branch: 1.0,
        event_skip: 1e-9 * y0.abs(),
        max_step: (y_max - y0) / 200.0,
        ..Options::with_tol(tol, tol * 1e-3)
    };
    // Y'' = -y + Z at the launch fixes Z(y0).
    let state0 = [0.0, 0.0, curvature + y0];
    let traj = integrate(&LimitVssSystem, y0, &state0, y_max, &opts)?;
    let meta = ProfileMeta {
        n: None,
        k: 1,
        l: None,
        y0,
        delta: 0.0,
        termination: termination_of(traj.end),
        source: ProfileSource::LimitVss,
    };
    Ok(trajectory_profile(&LimitVssSystem, &traj, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::similarity::{residual, OdeForm, OdeKind};

    #[test]
    fn problem_guards() {
        assert!(matches!(VssProblem::new(0.6, 1.5, -3.0, 20.0, 100), Err(Error::InvalidExponents(_))));
        assert!(matches!(VssProblem::new(0.6, 4.62, -3.0, 20.0, 100), Err(Error::InvalidExponents(_))));
        let prob = VssProblem::new(0.6, 5.0, -3.0, 20.0, 100).unwrap();
        assert_eq!(prob.warnings().len(), 1);
        let b = prob.params.beta;
        assert!((b - (5.0 - 1.6) / (4.0 * 3.0)).abs() < 1e-15);
        let far = VssProblem::new(1.0, 10.0, -3.0, 20.0, 100).unwrap();
        assert!(far.warnings().is_empty());
    }

    #[test]
    fn zero_solution_has_zero_defect() {
        let prob = VssProblem::new(0.6, 5.0, -3.0, 10.0, 200).unwrap();
        let n = prob.mesh;
        let zero = MeshState {
            grid: prob.grid(),
            value: vec![0.0; n],
            slope: vec![0.0; n],
            flux: vec![0.0; n],
            c: 0.0,
        };
        assert_eq!(mesh_defect(&prob, &zero, 10), 0.0);
        assert_eq!(first_hump_amplitude(&zero.value), 0.0);
    }

    #[test]
    fn march_satisfies_mesh_equations() {
        let prob = VssProblem::new(0.6, 5.0, -3.0, 10.0, 1301).unwrap();
        let s = march(&prob, 0.0, 1e8).unwrap();
        assert!(first_hump_amplitude(&s.value) > 0.0);
        let plain = prob.clone().with_closure(Closure::Zero);
        let defect = mesh_defect(&plain, &s, 10) - s.value.last().unwrap().abs();
        assert!(defect <= 1e-13, "{defect}");
    }

    #[test]
    fn integrated_system_matches_third_order_form() {
        // Differentiate V' = c - beta y Phi - W once and compare with the
        // residual evaluator on a smooth positive state.
        let prob = VssProblem::new(1.0, 10.0, -3.0, 10.0, 100).unwrap();
        let (y, v, vp, w, c) = (0.7, 0.4, -0.3, 0.05, 0.1);
        let (alpha, beta) = (prob.params.alpha, prob.params.beta);
        let vpp = prob.f(y, v, w, c);
        let phi_prime = vp * v.abs().powf(-0.5) / 2.0;
        let vppp = -beta * prob.phi(v) - beta * y * phi_prime - prob.g(v);
        let form = OdeForm::new(OdeKind::VssY, prob.params);
        let r = residual(&form, y, &[v, vp, vpp, vppp]).unwrap();
        assert!(r.abs() < 1e-14, "{r}");
        assert!(alpha > 0.0);
    }

    #[test]
    fn solve_short_domain() {
        let prob = VssProblem::with_step(0.6, 5.0, -3.0, 8.0, 0.02).unwrap();
        let sol = solve_vss(&prob, 1e-6).unwrap();
        assert!(sol.converged);
        assert!(sol.residual_norm <= 1e-6);
        assert!((mesh_defect(&prob, &sol.state, sol.half_period_steps) - sol.residual_norm).abs() <= 1e-12);
        assert_eq!(sol.state.value[0], 0.0);
        assert_eq!(sol.state.slope[0], 0.0);
        assert!(sol.hump_amplitude > 0.0);
        assert_eq!(sol.warnings.len(), 1);
        assert_eq!(sol.profile.meta.termination, Termination::Converged);
    }

    #[test]
    fn identical_lengths_are_stable() {
        let prob = VssProblem::with_step(0.6, 5.0, -3.0, 8.0, 0.02).unwrap();
        let st = hump_stability(&prob, &[8.0, 8.0], 1e-6).unwrap();
        assert_eq!(st.variation, 0.0);
    }

    #[test]
    fn no_root_is_an_error() {
        // Too short for any sign change of Y(L) in c.
        let prob = VssProblem::with_step(0.6, 5.0, -3.0, 0.5, 0.01)
            .unwrap()
            .with_closure(Closure::Zero);
        match solve_vss(&prob, 1e-6) {
            Err(Error::NoConvergence { residual, .. }) => assert!(residual > 1e-6),
            other => panic!("{other:?}"),
        }
        assert!(hump_stability(&prob, &[0.5], 1e-6).is_err());
    }

    #[test]
    fn odd_symmetry_in_c() {
        let prob = VssProblem::with_step(0.6, 5.0, -3.0, 5.0, 0.02).unwrap();
        let a = march(&prob, 1e-4, 1e8).unwrap();
        let b = march(&prob, -1e-4, 1e8).unwrap();
        for (x, y) in a.value.iter().zip(&b.value) {
            assert!((x + y).abs() <= 1e-14 * x.abs().max(1e-300));
        }
    }

    #[test]
    fn limit_vss_between_zeros() {
        let p = limit_vss_integrate(-1.0, 12.0, 1e-11).unwrap();
        assert!(p.zeros().len() >= 20, "{:?}", p.zeros());
        // Leading quadratic contact.
        let (v, _) = p.eval(-0.99).unwrap();
        // Y = (c/2) t^2 - t^3/6 + O(t^5) with c = 1/2, t = 0.01.
        assert!((v - (0.25e-4 - 1e-6 / 6.0)).abs() < 1e-10, "{v}");
        // Y = 1 is an equilibrium of Y''' = Y - 1 on positive arcs.
        let flat = limit_vss_integrate_with(-1.0, 1.0, 12.0, 1e-11).unwrap();
        assert!(flat.zeros().is_empty());
        assert!((flat.value.last().unwrap() - 1.0).abs() < 1e-2);
    }
}
