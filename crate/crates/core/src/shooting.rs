//! Finite-`n` profiles for `k = 1`, `l = 0, 1, 2`, shot forward from the
//! interface expansion `Y = C0 (y - y0)^{2(n+1)/n}`.
//!
//! The `l = 1, 2` equations have `1/y`, `1/y^2` coefficients. They are
//! integrated in variables that are smooth through `y = 0`:
//!
//! * `l = 1`: `g = Y'/y` with `Y' = y g`, `g' = -Phi(Y)/(2n+3)`,
//! * `l = 2`: `u = Y/y` with `u'' = -Phi(y u)/(3n+3)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{integrate, IntegrationEnd, Options, System, Trajectory};
use crate::profile::{Profile, ProfileMeta, ProfileSource, Termination};
use crate::similarity::root_nonlinearity;

/// Default launch offset relative to `|y0|`.
pub const DEFAULT_DELTA_FACTOR: f64 = 1e-3;
/// Largest accepted launch offset relative to `|y0|`.
pub const MAX_DELTA_FACTOR: f64 = 1e-2;
/// Default right end for envelope studies.
pub const DEFAULT_Y_MAX: f64 = 100.0;

fn check_index(l: u32) -> Result<()> {
    if l > 2 {
        return Err(Error::IndexOutOfRange { l, limit: 3 });
    }
    Ok(())
}

fn check_n(n: f64) -> Result<()> {
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidArgument(format!("n must be positive and finite, got {n}")));
    }
    Ok(())
}

/// Leading term of the profile at the interface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterfaceSeries {
    pub y0: f64,
    pub a_tilde: f64,
    pub c0: f64,
    /// `3 + (l+1) n`.
    pub denominator_factor: f64,
}

impl InterfaceSeries {
    pub fn new(n: f64, l: u32, y0: f64) -> Result<Self> {
        check_n(n)?;
        check_index(l)?;
        if !(y0 < 0.0) {
            return Err(Error::InvalidArgument(format!("interface must be negative, got {y0}")));
        }
        let denom = 3.0 + (l + 1) as f64 * n;
        let base = n * n * y0.abs() / (2.0 * (n + 1.0) * (n + 2.0) * denom);
        Ok(Self {
            y0,
            a_tilde: 2.0 * (n + 1.0) / n,
            c0: base.powf((n + 1.0) / n),
            denominator_factor: denom,
        })
    }

    /// `(Y, Y', Y'')` at `y0 + delta`.
    pub fn eval(&self, delta: f64) -> (f64, f64, f64) {
        if delta <= 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let a = self.a_tilde;
        (
            self.c0 * delta.powf(a),
            a * self.c0 * delta.powf(a - 1.0),
            a * (a - 1.0) * self.c0 * delta.powf(a - 2.0),
        )
    }
}

/// `(Y, Y')` at `y0 + delta` from the interface expansion.
pub fn series_launch(n: f64, l: u32, y0: f64, delta: f64) -> Result<(f64, f64)> {
    let series = InterfaceSeries::new(n, l, y0)?;
    if !(delta >= 0.0) || delta > MAX_DELTA_FACTOR * y0.abs() {
        return Err(Error::BadDelta {
            delta,
            y0_abs: y0.abs(),
        });
    }
    let (v, d, _) = series.eval(delta);
    Ok((v, d))
}

/// Integrated `k = 1` equation for index `l` in regularized variables.
#[derive(Clone, Copy, Debug)]
pub struct ShootingSystem {
    pub n: f64,
    pub l: u32,
}

impl ShootingSystem {
    fn denom(&self) -> f64 {
        3.0 + (self.l + 1) as f64 * self.n
    }

    /// Regularized state from `(Y, Y')` at `y != 0`.
    pub fn state_from(&self, y: f64, value: f64, slope: f64) -> [f64; 2] {
        match self.l {
            0 => [value, slope],
            1 => [value, slope / y],
            _ => {
                let u = value / y;
                [u, (slope - u) / y]
            }
        }
    }
}

impl System for ShootingSystem {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, y: f64, s: &[f64], _branch: f64, out: &mut [f64]) {
        let d = self.denom();
        match self.l {
            0 => {
                out[0] = s[1];
                out[1] = -root_nonlinearity(s[0], self.n) * y / d;
            }
            1 => {
                out[0] = y * s[1];
                out[1] = -root_nonlinearity(s[0], self.n) / d;
            }
            _ => {
                out[0] = s[1];
                out[1] = -root_nonlinearity(y * s[0], self.n) / d;
            }
        }
    }

    fn observe(&self, y: f64, s: &[f64]) -> (f64, f64) {
        match self.l {
            0 => (s[0], s[1]),
            1 => (s[0], y * s[1]),
            _ => (y * s[0], s[0] + y * s[1]),
        }
    }
}

/// Merges integrator nodes and events into a profile grid; zero events are
/// stored with value exactly zero.
pub(crate) fn trajectory_profile<S: System>(sys: &S, traj: &Trajectory, meta: ProfileMeta) -> Profile {
    let mut rows: Vec<(f64, f64, f64)> = traj
        .ys
        .iter()
        .zip(&traj.states)
        .map(|(y, s)| {
            let (v, d) = sys.observe(*y, s);
            (*y, v, d)
        })
        .collect();
    for ev in &traj.events {
        if let Some(state) = traj.state_at(ev.y) {
            let (v, d) = sys.observe(ev.y, &state);
            let v = if ev.kind == crate::ode::EventKind::Zero { 0.0 } else { v };
            rows.push((ev.y, v, d));
        }
    }
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut grid = Vec::with_capacity(rows.len());
    let mut value = Vec::with_capacity(rows.len());
    let mut slope = Vec::with_capacity(rows.len());
    for (y, v, d) in rows {
        if let Some(&last) = grid.last() {
            if y <= last {
                // Keep the exact zero if an event coincides with a node.
                if v == 0.0 {
                    *value.last_mut().unwrap() = 0.0;
                }
                continue;
            }
        }
        grid.push(y);
        value.push(v);
        slope.push(d);
    }
    Profile::new(grid, value, slope, meta)
}

pub(crate) fn termination_of(end: IntegrationEnd) -> Termination {
    match end {
        IntegrationEnd::ReachedEnd | IntegrationEnd::EventLimit => Termination::ReachedEnd,
        IntegrationEnd::StepUnderflow | IntegrationEnd::MaxSteps => Termination::StepUnderflow,
        IntegrationEnd::StateOverflow => Termination::StateOverflow,
    }
}

/// Shoots the `l`-th profile from the interface `y0 < 0` to `y_max`.
///
/// Early termination (step underflow, state overflow) is reported in the
/// profile's metadata rather than as an error.
pub fn shoot(n: f64, l: u32, y0: f64, delta: Option<f64>, y_max: f64, tol: f64) -> Result<Profile> {
    let delta = delta.unwrap_or(DEFAULT_DELTA_FACTOR * y0.abs());
    let (v, d) = series_launch(n, l, y0, delta)?;
    let start = y0 + delta;
    if !(y_max > start) {
        return Err(Error::InvalidArgument(format!("y_max={y_max} must exceed the launch point {start}")));
    }
    if start >= 0.0 && l > 0 {
        return Err(Error::InvalidArgument("launch point must be negative".into()));
    }
    let sys = ShootingSystem { n, l };
    let state0 = sys.state_from(start, v, d);
    // Natural amplitude: the leading term evaluated one interface length out.
    let series = InterfaceSeries::new(n, l, y0)?;
    let amplitude = series.eval(y0.abs()).0;
    let opts = Options {
        restart_at_zeros: true,
        max_step: (y_max - y0).abs() / 200.0,
        overflow_cap: Some(1e12 * amplitude * (1.0 + (y_max / y0).abs()).powi(3)),
        ..Options::with_tol(tol, tol * 1e-2 * amplitude)
    };
    let traj = integrate(&sys, start, &state0, y_max, &opts)?;
    if l > 0 && y_max > 0.0 && traj.last_y() > 0.0 {
        if let Some(s) = traj.state_at(0.0) {
            if s.iter().any(|x| !x.is_finite()) {
                return Err(Error::SingularCrossing);
            }
        }
    }
    let meta = ProfileMeta {
        n: Some(n),
        k: 1,
        l: Some(l),
        y0,
        delta,
        termination: termination_of(traj.end),
        source: ProfileSource::Shooting,
    };
    Ok(trajectory_profile(&sys, &traj, meta))
}

/// Exponent of the exact invariance `Y -> a^e Y(y/a)` of the integrated
/// equations: `e = 3(n+1)/n`.
pub fn scaling_exponent(n: f64) -> f64 {
    3.0 * (n + 1.0) / n
}

/// Applies `Y -> sign a^e Y(y/a)` to a sampled profile.
pub fn scale_profile(profile: &Profile, a: f64, flip: bool, n: f64) -> Profile {
    let e = scaling_exponent(n);
    let amp = if flip { -1.0 } else { 1.0 } * a.powf(e);
    let mut meta = profile.meta.clone();
    meta.y0 *= a;
    meta.delta *= a;
    Profile::new(
        profile.grid.iter().map(|y| a * y).collect(),
        profile.value.iter().map(|v| amp * v).collect(),
        profile.slope.iter().map(|d| amp / a * d).collect(),
        meta,
    )
}

/// Relative residual of the integrated equation at the launch point:
/// `|residual| / |Y''|`.
pub fn launch_residual(n: f64, l: u32, y0: f64, delta: f64) -> Result<f64> {
    use crate::similarity::{residual, OdeForm, OdeKind, SimilarityParams};
    let series = InterfaceSeries::new(n, l, y0)?;
    let (v, d, dd) = series.eval(delta);
    let kind = match l {
        0 => OdeKind::IntegratedL0,
        1 => OdeKind::IntegratedL1,
        _ => OdeKind::IntegratedL2,
    };
    let form = OdeForm::new(kind, SimilarityParams::eigen(n, 1, l)?);
    let r = residual(&form, y0 + delta, &[v, d, dd])?;
    Ok(r.abs() / dd.abs())
}

/// Fixed point of the inverse-function map on `[0, y_cap]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PicardTable {
    /// Profile values `Y`.
    pub values: Vec<f64>,
    /// Positions `y(Y)`.
    pub positions: Vec<f64>,
    pub iterations: usize,
    /// Successive-iterate sup distances.
    pub distances: Vec<f64>,
    /// Largest ratio of successive distances.
    pub contraction: f64,
}

impl PicardTable {
    /// Least-squares exponent and amplitude of `y - y0 = A Y^e` over rows
    /// with `Y <= fraction * y_cap`.
    pub fn power_fit(&self, fraction: f64) -> Result<(f64, f64)> {
        let y0 = self.positions[0];
        let cap = fraction * self.values.last().unwrap();
        let pts: Vec<(f64, f64)> = self
            .values
            .iter()
            .zip(&self.positions)
            .skip(1)
            .filter(|(v, _)| **v <= cap)
            .map(|(v, p)| (v.ln(), (p - y0).ln()))
            .collect();
        if pts.len() < 5 {
            return Err(Error::TooFewPoints {
                needed: 5,
                got: pts.len(),
            });
        }
        let m = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        let icpt = (sy - slope * sx) / m;
        Ok((slope, icpt.exp()))
    }
}

/// Iterates `y(Y) = y0 + int_0^Y sqrt((n+3)/(2 int_0^r |y(s)| s^{1/(n+1)} ds)) dr`
/// to a fixed point on `[0, y_cap]`.
///
/// The table uses `Y = y_cap t^q`, `q = 2(n+1)/n`, on a uniform `t` grid of
/// `nodes` points, which makes both integrands regular at `t = 0`.
pub fn picard_local(n: f64, y0: f64, y_cap: f64, iters: usize, nodes: usize) -> Result<PicardTable> {
    check_n(n)?;
    if !(y0 < 0.0 && y_cap > 0.0) || nodes < 3 {
        return Err(Error::InvalidArgument("need y0 < 0, y_cap > 0 and at least 3 nodes".into()));
    }
    let q = 2.0 * (n + 1.0) / n;
    let h = 1.0 / (nodes - 1) as f64;
    let t: Vec<f64> = (0..nodes).map(|j| j as f64 * h).collect();
    let values: Vec<f64> = t.iter().map(|t| y_cap * t.powf(q)).collect();
    // s^{1/(n+1)} ds = y_cap^{(n+2)/(n+1)} q t^{p_in} dt
    let p_in = q / (n + 1.0) + q - 1.0;
    let inner_scale = y_cap.powf((n + 2.0) / (n + 1.0)) * q;
    let outer_scale = y_cap * q;
    // Inner integral ~ |y0| inner_scale t^{p_in+1}/(p_in+1); outer
    // integrand tends to this constant at t = 0.
    let exponent_out = q - 1.0;
    let apply = |pos: &[f64]| -> Vec<f64> {
        let mut inner = vec![0.0; nodes];
        for j in 1..nodes {
            let a = pos[j - 1].abs() * t[j - 1].powf(p_in);
            let b = pos[j].abs() * t[j].powf(p_in);
            inner[j] = inner[j - 1] + 0.5 * h * (a + b) * inner_scale;
        }
        let integrand: Vec<f64> = (0..nodes)
            .map(|j| {
                if j == 0 {
                    let lead = pos[0].abs() * inner_scale / (p_in + 1.0);
                    outer_scale * ((n + 3.0) / (2.0 * lead)).sqrt()
                } else {
                    outer_scale * t[j].powf(exponent_out) * ((n + 3.0) / (2.0 * inner[j])).sqrt()
                }
            })
            .collect();
        let mut out = vec![y0; nodes];
        for j in 1..nodes {
            out[j] = out[j - 1] + 0.5 * h * (integrand[j - 1] + integrand[j]);
        }
        out
    };
    let mut pos = vec![y0; nodes];
    let mut distances = Vec::new();
    let mut contraction: f64 = 0.0;
    for it in 0..iters {
        let next = apply(&pos);
        let dist = next
            .iter()
            .zip(&pos)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if let Some(&prev) = distances.last() {
            if prev > 0.0 && distances.len() >= 2 {
                let ratio: f64 = dist / prev;
                contraction = contraction.max(ratio);
                if ratio >= 1.0 {
                    return Err(Error::NoContraction(ratio));
                }
            }
        }
        distances.push(dist);
        pos = next;
        if next_out_of_range(&pos, y0) {
            return Err(Error::InvalidArgument(format!(
                "y_cap={y_cap} leaves the neighbourhood |y - y0| <= |y0|/2"
            )));
        }
        if dist <= 1e-10 {
            return Ok(PicardTable {
                values,
                positions: pos,
                iterations: it + 1,
                distances,
                contraction,
            });
        }
    }
    Err(Error::NoContraction(contraction.max(1.0)))
}

fn next_out_of_range(pos: &[f64], y0: f64) -> bool {
    pos.iter().any(|p| (p - y0).abs() > 0.5 * y0.abs() || !p.is_finite())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{oscillation_bound, sign_alternation, Status};
    use crate::limit::zeros_l0;

    #[test]
    fn series_constants() {
        let s = InterfaceSeries::new(1.0, 0, -10.0).unwrap();
        assert_eq!(s.a_tilde, 4.0);
        assert!((s.c0 - (10.0f64 / 48.0).powi(2)).abs() < 1e-15);
        let s = InterfaceSeries::new(2.0, 0, -10.0).unwrap();
        assert_eq!(s.a_tilde, 3.0);
        assert!((s.c0 - 0.19245008972987526).abs() < 1e-12);
        assert_eq!(series_launch(1.0, 0, -10.0, 0.0).unwrap(), (0.0, 0.0));
        assert!(matches!(series_launch(1.0, 0, -10.0, 0.2), Err(Error::BadDelta { .. })));
        assert!(matches!(series_launch(1.0, 3, -10.0, 0.01), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn launch_residual_decreases() {
        for l in 0..3 {
            for &n in &[0.5, 1.0, 3.0] {
                let r: Vec<f64> = [1e-2, 1e-3, 1e-4]
                    .iter()
                    .map(|f| launch_residual(n, l, -10.0, f * 10.0).unwrap())
                    .collect();
                assert!(r[0] > r[1] && r[1] > r[2], "l={l} n={n}: {r:?}");
            }
        }
    }

    #[test]
    fn regularized_system_matches_singular_form() {
        // The regularized right-hand sides reproduce Y'' of the l = 1, 2
        // equations away from y = 0.
        for l in 1..3 {
            let sys = ShootingSystem { n: 1.5, l };
            let (y, v, d) = (-0.7, 0.3, -0.2);
            let s = sys.state_from(y, v, d);
            let (ov, od) = sys.observe(y, &s);
            assert!((ov - v).abs() < 1e-15 && (od - d).abs() < 1e-15);
            let mut ds = [0.0; 2];
            sys.rhs(y, &s, 1.0, &mut ds);
            let h = 1e-6;
            let sp = [s[0] + h * ds[0], s[1] + h * ds[1]];
            let sm = [s[0] - h * ds[0], s[1] - h * ds[1]];
            let dd = (sys.observe(y + h, &sp).1 - sys.observe(y - h, &sm).1) / (2.0 * h);
            let phi = root_nonlinearity(v, 1.5) * y;
            let want = if l == 1 {
                d / y - phi / sys.denom()
            } else {
                2.0 * d / y - 2.0 * v / (y * y) - phi / sys.denom()
            };
            assert!((dd - want).abs() < 1e-6, "l={l}: {dd} vs {want}");
        }
    }

    #[test]
    fn n1_profile_oscillates() {
        let p = shoot(1.0, 0, -10.0, None, 100.0, 1e-10).unwrap();
        assert_eq!(p.meta.termination, Termination::ReachedEnd);
        assert_eq!(sign_alternation(&p, None).status, Status::Pass);
        let bound = oscillation_bound(&p, 0).unwrap();
        assert!(bound.passed(), "{bound:?}");
        // sign Y'' = -sign Y for y > 0
        for (i, &y) in p.grid.iter().enumerate() {
            if y > 0.0 && p.value[i] != 0.0 {
                let ypp = -root_nonlinearity(p.value[i], 1.0) * y / 4.0;
                assert_eq!(ypp.signum(), -p.value[i].signum());
            }
        }
    }

    #[test]
    fn large_n_approaches_limit_zeros() {
        let p = shoot(1000.0, 0, -1.0, None, 6.0, 1e-11).unwrap();
        let z = p.zeros();
        let exact = zeros_l0(3).unwrap().zeros;
        assert!((z[0] - exact[1]).abs() < 1e-2, "{z:?}");
        assert!((z[1] - exact[2]).abs() < 1e-2, "{z:?}");
    }

    #[test]
    fn l1_and_l2_cross_origin() {
        for l in 1..3 {
            let p = shoot(1.0, l, -10.0, None, 40.0, 1e-10).unwrap();
            assert_eq!(p.meta.termination, Termination::ReachedEnd);
            assert!(p.value.iter().all(|v| v.is_finite()));
            assert!(p.zeros().len() >= 3);
        }
    }

    #[test]
    fn scaling_maps_profiles() {
        let n = 2.0;
        let a = 1.5;
        let p = shoot(n, 0, -4.0, Some(4e-3), 30.0, 1e-11).unwrap();
        let q = shoot(n, 0, -6.0, Some(6e-3), 45.0, 1e-11).unwrap();
        let mapped = scale_profile(&p, a, false, n);
        let scale = q.sup_norm();
        for &y in &[-3.0, 0.0, 5.0, 20.0, 40.0] {
            let (u, _) = mapped.eval(y).unwrap();
            let (v, _) = q.eval(y).unwrap();
            assert!((u - v).abs() < 1e-6 * scale, "y={y}: {u} vs {v}");
        }
    }

    #[test]
    fn picard_fixed_point() {
        let n = 1.0;
        let y0 = -10.0;
        let table = picard_local(n, y0, 1e-3, 200, 4001).unwrap();
        assert_eq!(table.positions[0], y0);
        assert!(table.contraction < 1.0);
        let (e, amp) = table.power_fit(0.5).unwrap();
        let want = n / (2.0 * (n + 1.0));
        assert!((e - want).abs() < 0.02 * want, "{e}");
        let series = InterfaceSeries::new(n, 0, y0).unwrap();
        let amp_series = series.c0.powf(-1.0 / series.a_tilde);
        assert!((amp - amp_series).abs() < 0.05 * amp_series, "{amp} vs {amp_series}");
    }

    #[test]
    fn picard_rejects_large_cap() {
        assert!(picard_local(1.0, -10.0, 1e3, 200, 501).is_err());
    }
}
