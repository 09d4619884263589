//! Invariant checks on profiles: the a-priori oscillation bound between
//! consecutive extrema, sign alternation across zeros, and power-law
//! envelope fits of extremum magnitudes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::Profile;

/// Margin below which a satisfied strict inequality is reported as marginal.
pub const MARGINAL_MARGIN: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Marginal,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub measured: f64,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    pub fn new(name: impl Into<String>, status: Status, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            status,
            measured,
            threshold,
            detail: None,
        }
    }

    /// Pass when `measured <= threshold`.
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        let status = if measured <= threshold {
            Status::Pass
        } else {
            Status::Fail
        };
        Self::new(name, status, measured, threshold)
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeFit {
    pub coefficient: f64,
    pub exponent: f64,
    pub rms: f64,
    pub points: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope: Option<EnvelopeFit>,
}

impl DiagnosticsReport {
    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn merge(&mut self, other: DiagnosticsReport) {
        self.checks.extend(other.checks);
        if other.envelope.is_some() {
            self.envelope = other.envelope;
        }
    }

    /// No check failed (marginal counts as passing).
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn statuses(&self) -> Vec<(String, Status)> {
        self.checks
            .iter()
            .map(|c| (c.name.clone(), c.status))
            .collect()
    }
}

/// Minimum margin of the extremum-pair bound and the pair realising it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundPair {
    pub y1: f64,
    pub y2: f64,
    pub margin: f64,
}

/// Consecutive positive-y extremum pairs `(y1, y2)` must satisfy
/// `(|Y(y2)|/|Y(y1)|)^{(n+2)/(n+1)} > (y1/y2)^{l+1}`. The margin is the
/// difference of the two sides; equality fails.
pub fn oscillation_bound_pairs(profile: &Profile, l: u32) -> Result<Vec<BoundPair>> {
    let extrema: Vec<_> = profile.extrema().into_iter().filter(|e| e.y > 0.0).collect();
    if extrema.len() < 2 {
        return Err(Error::InsufficientExtrema(extrema.len()));
    }
    let power = match profile.meta.n {
        Some(n) => (n + 2.0) / (n + 1.0),
        None => 1.0,
    };
    Ok(extrema
        .windows(2)
        .map(|w| {
            let lhs = (w[1].value.abs() / w[0].value.abs()).powf(power);
            let rhs = (w[0].y / w[1].y).powi(l as i32 + 1);
            BoundPair {
                y1: w[0].y,
                y2: w[1].y,
                margin: lhs - rhs,
            }
        })
        .collect())
}

fn margin_status(margin: f64) -> Status {
    if margin <= 0.0 || margin.is_nan() {
        Status::Fail
    } else if margin < MARGINAL_MARGIN {
        Status::Marginal
    } else {
        Status::Pass
    }
}

/// One check per extremum pair plus a summary carrying the minimum margin.
pub fn oscillation_bound(profile: &Profile, l: u32) -> Result<DiagnosticsReport> {
    let pairs = oscillation_bound_pairs(profile, l)?;
    let mut report = DiagnosticsReport::default();
    let mut worst = pairs[0];
    for (i, p) in pairs.iter().enumerate() {
        if p.margin < worst.margin || p.margin.is_nan() {
            worst = *p;
        }
        report.push(
            Check::new(format!("oscillation_bound[{i}]"), margin_status(p.margin), p.margin, 0.0)
                .with_detail(format!("y1={:.12e} y2={:.12e}", p.y1, p.y2)),
        );
    }
    report.push(
        Check::new("oscillation_bound_min_margin", margin_status(worst.margin), worst.margin, 0.0)
            .with_detail(format!("pair y1={:.12e} y2={:.12e}", worst.y1, worst.y2)),
    );
    Ok(report)
}

/// Log-log least squares fit `|Y| ~ coefficient * y^exponent` over the
/// points with `y` inside `window`.
pub fn envelope_fit(extrema: &[(f64, f64)], window: (f64, f64)) -> Result<EnvelopeFit> {
    let pts: Vec<(f64, f64)> = extrema
        .iter()
        .filter(|(y, v)| *y >= window.0 && *y <= window.1 && *y > 0.0 && v.abs() > 0.0)
        .map(|(y, v)| (y.ln(), v.abs().ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::TooFewPoints {
            needed: 5,
            got: pts.len(),
        });
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let rms = (pts
        .iter()
        .map(|p| (p.1 - intercept - exponent * p.0).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(EnvelopeFit {
        coefficient: intercept.exp(),
        exponent,
        rms,
        points: pts.len(),
    })
}

/// Default envelope window.
pub const ENVELOPE_WINDOW: (f64, f64) = (20.0, 200.0);

/// Envelope fit of a profile's extrema, skipping the first two extrema.
pub fn profile_envelope(profile: &Profile, window: (f64, f64)) -> Result<EnvelopeFit> {
    let pts: Vec<(f64, f64)> = profile
        .extrema()
        .into_iter()
        .skip(2)
        .map(|e| (e.y, e.value.abs()))
        .collect();
    envelope_fit(&pts, window)
}

/// Zero set used for the alternation test: sign changes plus sample nodes
/// where the value is exactly zero without a sign change (touching zeros).
fn alternation_zeros(profile: &Profile) -> Vec<f64> {
    let mut zeros = profile.zeros();
    let v = &profile.value;
    for i in 1..v.len().saturating_sub(1) {
        if v[i] == 0.0 && v[i - 1] != 0.0 && v[i + 1] != 0.0 && v[i - 1].signum() == v[i + 1].signum() {
            zeros.push(profile.grid[i]);
        }
    }
    zeros.sort_by(|a, b| a.partial_cmp(b).unwrap());
    zeros
}

/// Consecutive inter-zero intervals (after `from`, if given) carry opposite
/// signs. Reports the first zero at which the sign fails to flip.
pub fn sign_alternation(profile: &Profile, from: Option<f64>) -> Check {
    let zeros: Vec<f64> = alternation_zeros(profile)
        .into_iter()
        .filter(|z| from.map_or(true, |f| *z >= f))
        .collect();
    if zeros.len() < 2 {
        return Check::new("sign_alternation", Status::Pass, zeros.len() as f64, 2.0)
            .with_detail("fewer than two zeros");
    }
    let mut bounds = zeros.clone();
    if let Some(&end) = profile.grid.last() {
        if end > *bounds.last().unwrap() {
            bounds.push(end);
        }
    }
    let mut prev_sign = 0.0;
    for w in bounds.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let s = profile.eval(mid).map(|(v, _)| v.signum()).unwrap_or(0.0);
        if prev_sign != 0.0 && s == prev_sign {
            return Check::new("sign_alternation", Status::Fail, w[0], 0.0)
                .with_detail(format!("no sign change at y={:.12e}", w[0]));
        }
        prev_sign = s;
    }
    Check::new("sign_alternation", Status::Pass, zeros.len() as f64, 2.0)
}

/// Full report for a profile: alternation after the first zero, the
/// extremum-pair bound, and (when enough extrema exist) the envelope fit.
pub fn check_profile(profile: &Profile, l: u32, window: (f64, f64)) -> DiagnosticsReport {
    let mut report = DiagnosticsReport::default();
    let first_zero = profile.zeros().first().copied();
    report.push(sign_alternation(profile, first_zero));
    match oscillation_bound(profile, l) {
        Ok(r) => report.merge(r),
        Err(e) => report.push(
            Check::new("oscillation_bound_min_margin", Status::Fail, f64::NAN, 0.0)
                .with_detail(e.to_string()),
        ),
    }
    if let Ok(fit) = profile_envelope(profile, window) {
        report.envelope = Some(fit);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::ProfileMeta;
    use proptest::prelude::*;

    fn damped(n_nodes: usize, span: f64, decay: f64) -> Profile {
        // sin(y) y^{-decay} on [1, span]
        let grid: Vec<f64> = (0..=n_nodes)
            .map(|i| 1.0 + (span - 1.0) * i as f64 / n_nodes as f64)
            .collect();
        let value = grid.iter().map(|y| y.sin() * y.powf(-decay)).collect();
        let slope = grid
            .iter()
            .map(|y| y.cos() * y.powf(-decay) - decay * y.sin() * y.powf(-decay - 1.0))
            .collect();
        Profile::new(grid, value, slope, ProfileMeta::synthetic(Some(1.0), Some(0)))
    }

    #[test]
    fn exact_power_law_envelope() {
        let pts: Vec<(f64, f64)> = (0..40)
            .map(|i| {
                let y = 20.0 + 4.0 * i as f64;
                (y, 2.0 * y.powf(-1.0 / 3.0))
            })
            .collect();
        let fit = envelope_fit(&pts, (20.0, 200.0)).unwrap();
        assert!((fit.exponent + 1.0 / 3.0).abs() < 1e-12);
        assert!((fit.coefficient - 2.0).abs() < 1e-12);
        assert!(fit.rms < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let pts = [(25.0, 1.0), (30.0, 1.0)];
        assert!(matches!(
            envelope_fit(&pts, (20.0, 200.0)),
            Err(Error::TooFewPoints { needed: 5, got: 2 })
        ));
    }

    #[test]
    fn slowly_decaying_oscillation_passes_bound() {
        let p = damped(20000, 60.0, 0.1);
        let r = oscillation_bound(&p, 0).unwrap();
        assert!(r.passed());
        assert_eq!(sign_alternation(&p, None).status, Status::Pass);
    }

    #[test]
    fn fast_decay_violates_bound() {
        // |Y| ~ y^{-3}: ratio^{3/2} ~ (y1/y2)^{4.5} < y1/y2.
        let p = damped(20000, 60.0, 3.0);
        let r = oscillation_bound(&p, 0).unwrap();
        assert!(!r.passed());
        let bad = r.checks.iter().find(|c| c.status == Status::Fail).unwrap();
        assert!(bad.detail.as_ref().unwrap().contains("y1="));
    }

    #[test]
    fn equality_fails() {
        // Two extrema with |Y2|/|Y1| = (y1/y2)^{2/3} for n=1 gives equality.
        let y1 = std::f64::consts::FRAC_PI_2;
        let y2 = 3.0 * y1;
        let ratio = (y1 / y2).powf(1.0 / 1.5);
        let grid = vec![0.5, y1, 2.0 * y1, y2, 3.5 * y1];
        let value = vec![0.5, 1.0, 0.0, -ratio, -0.5 * ratio];
        let slope = vec![1.0, 0.0, -1.0, 0.0, 0.5];
        let p = Profile::new(grid, value, slope, ProfileMeta::synthetic(Some(1.0), Some(0)));
        let pairs = oscillation_bound_pairs(&p, 0).unwrap();
        assert_eq!(pairs.len(), 1);
        assert!(pairs[0].margin.abs() < 1e-12);
        let forced = Check::new("x", margin_status(0.0), 0.0, 0.0);
        assert_eq!(forced.status, Status::Fail);
        assert_eq!(margin_status(5e-7), Status::Marginal);
    }

    #[test]
    fn touching_zero_breaks_alternation() {
        let grid: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
        // |sin| style: positive humps touching zero at pi.
        let value: Vec<f64> = grid
            .iter()
            .map(|&y| {
                if (y - std::f64::consts::PI).abs() < 1e-12 {
                    0.0
                } else if y < std::f64::consts::PI {
                    y.sin()
                } else {
                    (y - std::f64::consts::PI).sin().abs() + 1e-3
                }
            })
            .collect();
        let mut grid = grid;
        let mut value = value;
        let idx = grid.partition_point(|&g| g < std::f64::consts::PI);
        grid.insert(idx, std::f64::consts::PI);
        value.insert(idx, 0.0);
        // Put an ordinary sign change early so there are >= 2 zeros.
        value[0] = -0.1;
        let slope = vec![1.0; grid.len()];
        let p = Profile::new(grid, value, slope, ProfileMeta::synthetic(Some(1.0), Some(0)));
        let c = sign_alternation(&p, None);
        assert_eq!(c.status, Status::Fail);
        assert!((c.measured - std::f64::consts::PI).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn envelope_recovers_power_law(c in 0.1f64..10.0, e in -2.0f64..2.0) {
            let pts: Vec<(f64, f64)> = (0..30).map(|i| {
                let y = 20.0 * (10f64).powf(i as f64 / 29.0);
                (y, c * y.powf(e))
            }).collect();
            let fit = envelope_fit(&pts, (20.0, 200.0)).unwrap();
            prop_assert!((fit.exponent - e).abs() < 1e-12);
            prop_assert!((fit.coefficient / c - 1.0).abs() < 1e-11);
        }
    }
}
