//! Dormand–Prince 5(4) integrator with PI step control, dense output and
//! detection of zeros and extrema of an observed scalar.
//!
//! Systems expose an `observe` map from the state to a (value, slope) pair;
//! sign changes of the value are `Zero` events and sign changes of the slope
//! are `Extremum` events. With `restart_at_zeros` the step is cut at every
//! zero and the integration restarts there with the branch flipped, which
//! keeps the method's order for right-hand sides containing `sign(Y)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::brent;

/// First-order system `state' = rhs(y, state)`.
pub trait System {
    fn dim(&self) -> usize;

    /// Evaluates the vector field. `branch` is `+1`/`-1` and only matters for
    /// right-hand sides with a discontinuous sign term.
    fn rhs(&self, y: f64, state: &[f64], branch: f64, out: &mut [f64]);

    /// Scalar profile value and its derivative; defaults to the first two
    /// components.
    fn observe(&self, _y: f64, state: &[f64]) -> (f64, f64) {
        (state[0], if state.len() > 1 { state[1] } else { 0.0 })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Zero,
    Extremum,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub y: f64,
    pub kind: EventKind,
    /// Observed profile value at the event.
    pub value: f64,
    /// Index of the dense segment containing the event.
    pub segment: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntegrationEnd {
    ReachedEnd,
    StepUnderflow,
    StateOverflow,
    EventLimit,
    MaxSteps,
}

#[derive(Clone, Debug)]
pub struct Options {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_step: Option<f64>,
    pub max_step: f64,
    pub max_steps: usize,
    /// Magnitude cap on every state component; defaults to
    /// `1e12 * max(|state0|_inf, 1)`.
    pub overflow_cap: Option<f64>,
    pub restart_at_zeros: bool,
    pub initial_branch: f64,
    /// Stop after this many zero events.
    pub max_zeros: Option<usize>,
    /// Ignore events closer than this to the start point.
    pub event_skip: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            initial_step: None,
            max_step: f64::INFINITY,
            max_steps: 5_000_000,
            overflow_cap: None,
            restart_at_zeros: false,
            initial_branch: 1.0,
            max_zeros: None,
            event_skip: 0.0,
        }
    }
}

impl Options {
    pub fn with_tol(rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..Self::default()
        }
    }
}

/// Continuous extension over one accepted step.
#[derive(Clone, Debug)]
pub struct DenseSegment {
    pub start: f64,
    pub h: f64,
    /// End of the valid range; shorter than `start + h` for steps cut at a
    /// branch restart.
    pub stop: f64,
    pub branch: f64,
    coeffs: [Vec<f64>; 5],
}

impl DenseSegment {
    pub fn end(&self) -> f64 {
        self.stop
    }

    pub fn eval_into(&self, y: f64, out: &mut [f64]) {
        let theta = (y - self.start) / self.h;
        let theta1 = 1.0 - theta;
        let [r1, r2, r3, r4, r5] = &self.coeffs;
        for i in 0..out.len() {
            out[i] = r1[i] + theta * (r2[i] + theta1 * (r3[i] + theta * (r4[i] + theta1 * r5[i])));
        }
    }

    pub fn eval(&self, y: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.coeffs[0].len()];
        self.eval_into(y, &mut out);
        out
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub ys: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub events: Vec<Event>,
    pub segments: Vec<DenseSegment>,
    pub end: IntegrationEnd,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn last_y(&self) -> f64 {
        *self.ys.last().unwrap()
    }

    pub fn zeros(&self) -> Vec<f64> {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Zero)
            .map(|e| e.y)
            .collect()
    }

    pub fn extrema(&self) -> Vec<(f64, f64)> {
        self.events
            .iter()
            .filter(|e| e.kind == EventKind::Extremum)
            .map(|e| (e.y, e.value))
            .collect()
    }

    /// Dense-output state at `y`, if `y` lies in the integrated range.
    pub fn state_at(&self, y: f64) -> Option<Vec<f64>> {
        if self.segments.is_empty() {
            return None;
        }
        let first = self.segments[0].start;
        let last = self.segments.last().unwrap().end();
        if y < first || y > last {
            return None;
        }
        let idx = self
            .segments
            .partition_point(|s| s.end() < y)
            .min(self.segments.len() - 1);
        Some(self.segments[idx].eval(y))
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Work {
    k: [Vec<f64>; 7],
    tmp: Vec<f64>,
    next: Vec<f64>,
    err: Vec<f64>,
}

impl Work {
    fn new(dim: usize) -> Self {
        Self {
            k: std::array::from_fn(|_| vec![0.0; dim]),
            tmp: vec![0.0; dim],
            next: vec![0.0; dim],
            err: vec![0.0; dim],
        }
    }
}

fn combine(out: &mut [f64], base: &[f64], h: f64, terms: &[(f64, &[f64])]) {
    for i in 0..out.len() {
        let mut acc = 0.0;
        for (c, v) in terms {
            acc += c * v[i];
        }
        out[i] = base[i] + h * acc;
    }
}

/// One Dormand–Prince step; `w.k[0]` must hold `rhs(y, state)`. On return
/// `w.next` holds the 5th-order state, `w.k[6]` its derivative, and the
/// scaled error norm is returned.
fn dp_step<S: System + ?Sized>(
    sys: &S,
    y: f64,
    state: &[f64],
    h: f64,
    branch: f64,
    opts: &Options,
    w: &mut Work,
) -> f64 {
    let Work { k, tmp, next, err } = w;
    let [k1, k2, k3, k4, k5, k6, k7] = k;
    combine(tmp, state, h, &[(A21, k1)]);
    sys.rhs(y + C2 * h, tmp, branch, k2);
    combine(tmp, state, h, &[(A31, k1), (A32, k2)]);
    sys.rhs(y + C3 * h, tmp, branch, k3);
    combine(tmp, state, h, &[(A41, k1), (A42, k2), (A43, k3)]);
    sys.rhs(y + C4 * h, tmp, branch, k4);
    combine(tmp, state, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
    sys.rhs(y + C5 * h, tmp, branch, k5);
    combine(tmp, state, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]);
    sys.rhs(y + h, tmp, branch, k6);
    combine(next, state, h, &[(A71, k1), (A73, k3), (A74, k4), (A75, k5), (A76, k6)]);
    sys.rhs(y + h, next, branch, k7);
    for i in 0..state.len() {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    let mut sum = 0.0;
    for i in 0..state.len() {
        let sk = opts.abs_tol + opts.rel_tol * state[i].abs().max(next[i].abs());
        sum += (err[i] / sk).powi(2);
    }
    (sum / state.len() as f64).sqrt()
}

fn dense_segment(y: f64, h: f64, branch: f64, state: &[f64], w: &Work) -> DenseSegment {
    let dim = state.len();
    let [k1, _k2, k3, k4, k5, k6, k7] = &w.k;
    let mut r1 = vec![0.0; dim];
    let mut r2 = vec![0.0; dim];
    let mut r3 = vec![0.0; dim];
    let mut r4 = vec![0.0; dim];
    let mut r5 = vec![0.0; dim];
    for i in 0..dim {
        let ydiff = w.next[i] - state[i];
        let bspl = h * k1[i] - ydiff;
        r1[i] = state[i];
        r2[i] = ydiff;
        r3[i] = bspl;
        r4[i] = ydiff - h * k7[i] - bspl;
        r5[i] = h
            * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
    }
    DenseSegment {
        start: y,
        h,
        stop: y + h,
        branch,
        coeffs: [r1, r2, r3, r4, r5],
    }
}

fn initial_step<S: System + ?Sized>(
    sys: &S,
    y: f64,
    state: &[f64],
    f0: &[f64],
    dir_span: f64,
    branch: f64,
    opts: &Options,
) -> f64 {
    let dim = state.len();
    let sk: Vec<f64> = state
        .iter()
        .map(|v| opts.abs_tol + opts.rel_tol * v.abs())
        .collect();
    let dnf: f64 = (0..dim).map(|i| (f0[i] / sk[i]).powi(2)).sum::<f64>() / dim as f64;
    let dny: f64 = (0..dim).map(|i| (state[i] / sk[i]).powi(2)).sum::<f64>() / dim as f64;
    let mut h = if dnf <= 1e-10 || dny <= 1e-10 {
        1e-6
    } else {
        (dny / dnf).sqrt() * 0.01
    };
    h = h.min(opts.max_step).min(dir_span);
    let probe: Vec<f64> = (0..dim).map(|i| state[i] + h * f0[i]).collect();
    let mut f1 = vec![0.0; dim];
    sys.rhs(y + h, &probe, branch, &mut f1);
    let der2 = ((0..dim)
        .map(|i| ((f1[i] - f0[i]) / sk[i]).powi(2))
        .sum::<f64>()
        / dim as f64)
        .sqrt()
        / h;
    let der12 = der2.max(dnf.sqrt());
    let h1 = if der12 <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / der12).powf(0.2)
    };
    (100.0 * h).min(h1).min(opts.max_step).min(dir_span)
}

/// Integrates `sys` from `y_start` to `y_end` (`y_start < y_end`).
///
/// Step underflow and state overflow end the run early and are reported in
/// [`Trajectory::end`]; the nodes up to that point are kept.
pub fn integrate<S: System + ?Sized>(
    sys: &S,
    y_start: f64,
    state0: &[f64],
    y_end: f64,
    opts: &Options,
) -> Result<Trajectory> {
    if !(y_start < y_end) {
        return Err(Error::InvalidArgument(format!(
            "integration span must be increasing: {y_start} -> {y_end}"
        )));
    }
    if !(opts.rel_tol > 0.0 && opts.rel_tol < 1.0 && opts.abs_tol > 0.0 && opts.abs_tol.is_finite()) {
        return Err(Error::InvalidArgument("rel_tol must lie in (0, 1) and abs_tol must be positive".into()));
    }
    let dim = sys.dim();
    if state0.len() != dim {
        return Err(Error::InvalidArgument("state dimension mismatch".into()));
    }
    let cap = opts.overflow_cap.unwrap_or_else(|| {
        1e12 * state0.iter().fold(1.0f64, |m, v| m.max(v.abs()))
    });

    let mut w = Work::new(dim);
    let mut y = y_start;
    let mut state = state0.to_vec();
    let mut branch = if opts.initial_branch < 0.0 { -1.0 } else { 1.0 };
    let mut traj = Trajectory {
        ys: vec![y],
        states: vec![state.clone()],
        events: Vec::new(),
        segments: Vec::new(),
        end: IntegrationEnd::ReachedEnd,
        rejected_steps: 0,
    };

    sys.rhs(y, &state, branch, &mut w.k[0]);
    let mut h = match opts.initial_step {
        Some(h) => h.min(y_end - y),
        None => initial_step(sys, y, &state, &w.k[0], y_end - y, branch, opts),
    };
    let beta = 0.04;
    let expo1 = 0.2 - beta * 0.75;
    let safe = 0.9;
    let mut facold: f64 = 1e-4;
    let mut last_rejected = false;
    let mut zero_count = 0usize;
    let mut steps = 0usize;
    let mut obs_prev = sys.observe(y, &state);

    loop {
        if steps >= opts.max_steps {
            traj.end = IntegrationEnd::MaxSteps;
            break;
        }
        steps += 1;
        let underflow = 1e2 * f64::EPSILON * y.abs();
        if h < underflow || h <= 0.0 {
            traj.end = IntegrationEnd::StepUnderflow;
            break;
        }
        let final_step = y + h >= y_end;
        if final_step {
            h = y_end - y;
        }
        let err = dp_step(sys, y, &state, h, branch, opts, &mut w);
        if !err.is_finite() {
            h *= 0.25;
            last_rejected = true;
            traj.rejected_steps += 1;
            continue;
        }
        let fac11 = err.powf(expo1);
        if err > 1.0 {
            h /= (fac11 / safe).min(5.0);
            last_rejected = true;
            traj.rejected_steps += 1;
            continue;
        }
        let mut fac = fac11 / facold.powf(beta);
        fac = (fac / safe).clamp(0.1, 5.0);
        let mut h_new = (h / fac).min(opts.max_step);
        if last_rejected {
            h_new = h_new.min(h);
        }
        facold = err.max(1e-4);
        last_rejected = false;

        let y_next = if final_step { y_end } else { y + h };
        let seg = dense_segment(y, h, branch, &state, &w);
        let seg_index = traj.segments.len();
        let obs_next = sys.observe(y_next, &w.next);

        // Events inside (y, y_next].
        let mut cut: Option<f64> = None;
        let mut found: Vec<Event> = Vec::new();
        let past_skip = y_next > y_start + opts.event_skip;
        if past_skip && obs_prev.0 != 0.0 && obs_prev.0.signum() != obs_next.0.signum() && obs_next.0 != 0.0
            || past_skip && obs_next.0 == 0.0 && obs_prev.0 != 0.0
        {
            let root = locate(sys, &seg, y, y_next, |o| o.0);
            if root > y_start + opts.event_skip {
                let value = sys.observe(root, &seg.eval(root)).0;
                found.push(Event {
                    y: root,
                    kind: EventKind::Zero,
                    value,
                    segment: seg_index,
                });
                if opts.restart_at_zeros {
                    cut = Some(root);
                }
            }
        }
        if past_skip && obs_prev.1 != 0.0 && obs_next.1 != 0.0 && obs_prev.1.signum() != obs_next.1.signum() {
            let root = locate(sys, &seg, y, y_next, |o| o.1);
            if root > y_start + opts.event_skip && cut.map_or(true, |c| root < c) {
                let value = sys.observe(root, &seg.eval(root)).0;
                found.push(Event {
                    y: root,
                    kind: EventKind::Extremum,
                    value,
                    segment: seg_index,
                });
            }
        }
        found.sort_by(|a, b| a.y.partial_cmp(&b.y).unwrap());

        let mut overflow = false;
        if let Some(c) = cut {
            let mut seg_cut = seg;
            let cut_state = seg_cut.eval(c);
            seg_cut.stop = c;
            traj.segments.push(seg_cut);
            y = c;
            state = cut_state;
            branch = -branch;
            sys.rhs(y, &state, branch, &mut w.k[0]);
            h = h_new.min(h).max(1e-3 * h);
            facold = 1e-4;
        } else {
            traj.segments.push(seg);
            y = y_next;
            state.copy_from_slice(&w.next);
            w.k[0] = w.k[6].clone();
            h = h_new;
        }
        if state.iter().any(|v| !v.is_finite() || v.abs() > cap) {
            overflow = true;
        }
        for e in found {
            if e.kind == EventKind::Zero {
                zero_count += 1;
            }
            traj.events.push(e);
        }
        traj.ys.push(y);
        traj.states.push(state.clone());
        obs_prev = sys.observe(y, &state);
        if cut.is_some() {
            // The restart point is a zero; carry the post-crossing sign.
            obs_prev.0 = obs_next.0;
        }
        if overflow {
            traj.end = IntegrationEnd::StateOverflow;
            break;
        }
        if let Some(limit) = opts.max_zeros {
            if zero_count >= limit {
                traj.end = IntegrationEnd::EventLimit;
                break;
            }
        }
        if y >= y_end {
            traj.end = IntegrationEnd::ReachedEnd;
            break;
        }
    }
    Ok(traj)
}

fn locate<S: System + ?Sized, G: Fn((f64, f64)) -> f64>(
    sys: &S,
    seg: &DenseSegment,
    a: f64,
    b: f64,
    g: G,
) -> f64 {
    let mut buf = vec![0.0; sys.dim()];
    let f = |t: f64| {
        seg.eval_into(t, &mut buf);
        g(sys.observe(t, &buf))
    };
    brent(f, a, b, 1e-15 * (1.0 + a.abs()), 200).unwrap_or(b)
}

/// Re-locates event `index` of `traj` by bracketing root finding on the
/// dense output to `|g| <= 1e-12 * scale`, where `g` is the observed value
/// (zeros) or slope (extrema) and `scale` the largest observed magnitude on
/// the segment.
pub fn refine_event<S: System + ?Sized>(
    sys: &S,
    traj: &Trajectory,
    index: usize,
) -> Result<(f64, f64)> {
    let ev = traj
        .events
        .get(index)
        .ok_or_else(|| Error::InvalidArgument(format!("no event {index}")))?;
    let seg = &traj.segments[ev.segment];
    let pick = |o: (f64, f64)| match ev.kind {
        EventKind::Zero => o.0,
        EventKind::Extremum => o.1,
    };
    let g = |t: f64| pick(sys.observe(t, &seg.eval(t)));
    let (a, b) = (seg.start, seg.end());
    // Widen to the neighbouring segments if the event sits on an endpoint.
    let (mut lo, mut hi) = (a, b);
    let (mut glo, mut ghi) = (g(lo), g(hi));
    if glo.signum() == ghi.signum() && glo != 0.0 && ghi != 0.0 {
        let probe = (ev.y - 1e-9 * (1.0 + ev.y.abs())).max(a);
        let probe_hi = (ev.y + 1e-9 * (1.0 + ev.y.abs())).min(b);
        lo = probe;
        hi = probe_hi;
        glo = g(lo);
        ghi = g(hi);
        if glo.signum() == ghi.signum() && glo != 0.0 && ghi != 0.0 {
            return Err(Error::NoBracket);
        }
    }
    let scale = [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|t| pick(sys.observe(a + t * (b - a), &seg.eval(a + t * (b - a)))).abs())
        .fold(f64::MIN_POSITIVE, f64::max);
    let root = brent(g, lo, hi, 0.0, 400).ok_or(Error::NoBracket)?;
    let residual = g(root);
    if residual.abs() > 1e-12 * scale {
        // Brent stopped at the floating-point resolution of y; report anyway.
        let value = sys.observe(root, &seg.eval(root)).0;
        return Ok((root, value));
    }
    Ok((root, sys.observe(root, &seg.eval(root)).0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    struct Harmonic;
    impl System for Harmonic {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _y: f64, s: &[f64], _b: f64, out: &mut [f64]) {
            out[0] = s[1];
            out[1] = -s[0];
        }
    }

    struct Still;
    impl System for Still {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, _y: f64, _s: &[f64], _b: f64, out: &mut [f64]) {
            out.iter_mut().for_each(|v| *v = 0.0);
        }
    }

    /// `Y'' = -branch * y`, the n = inf profile equation.
    struct SignQuadratic;
    impl System for SignQuadratic {
        fn dim(&self) -> usize {
            2
        }
        fn rhs(&self, y: f64, s: &[f64], b: f64, out: &mut [f64]) {
            out[0] = s[1];
            out[1] = -b * y;
        }
    }

    #[test]
    fn harmonic_zero_events() {
        let opts = Options::with_tol(1e-10, 1e-12);
        let t = integrate(&Harmonic, 0.0, &[0.0, 1.0], 2.0 * PI + 1e-9, &opts).unwrap();
        let z = t.zeros();
        assert_eq!(z.len(), 2, "{z:?}");
        assert!((z[0] - PI).abs() < 1e-8);
        assert!((z[1] - 2.0 * PI).abs() < 1e-8);
        let kinds: Vec<_> = t.events.iter().map(|e| e.kind).collect();
        for pair in kinds.windows(2) {
            assert_ne!(pair[0], pair[1]);
        }
        let (root, _) = refine_event(&Harmonic, &t, 1).unwrap();
        assert!((root - PI).abs() < 1e-10, "{root}");
    }

    #[test]
    fn zero_field_is_constant() {
        let t = integrate(&Still, 0.0, &[1.5, -2.0], 10.0, &Options::default()).unwrap();
        assert!(t.events.is_empty());
        assert!(t.states.iter().all(|s| s == &vec![1.5, -2.0]));
        assert_eq!(t.end, IntegrationEnd::ReachedEnd);
    }

    #[test]
    fn dense_output_is_fifth_order_accurate() {
        let opts = Options::with_tol(1e-11, 1e-13);
        let t = integrate(&Harmonic, 0.0, &[0.0, 1.0], 10.0, &opts).unwrap();
        for &y in &[0.37, 2.9, 7.123, 9.99] {
            let s = t.state_at(y).unwrap();
            assert!((s[0] - y.sin()).abs() < 1e-9, "y={y}");
        }
    }

    #[test]
    fn branch_restart_reproduces_piecewise_cubic() {
        // From the interface y0=-1: Y = (y+1)^2/2 * ... exact first zero at 2.
        let delta = 1e-3;
        let y = -1.0 + delta;
        let value = -(y + 1.0f64).powi(2) * (y - 2.0) / 6.0;
        let slope = -(y + 1.0) * (y - 2.0) / 3.0 - (y + 1.0f64).powi(2) / 6.0;
        let opts = Options {
            restart_at_zeros: true,
            ..Options::with_tol(1e-12, 1e-14)
        };
        let t = integrate(&SignQuadratic, y, &[value, slope], 3.5, &opts).unwrap();
        let z = t.zeros();
        assert!((z[0] - 2.0).abs() < 1e-6, "{z:?}");
        assert!((z[1] - (3.0 * 2f64.sqrt() - 1.0)).abs() < 1e-8, "{z:?}");
    }

    #[test]
    fn overflow_is_reported() {
        struct Growth;
        impl System for Growth {
            fn dim(&self) -> usize {
                1
            }
            fn rhs(&self, _y: f64, s: &[f64], _b: f64, out: &mut [f64]) {
                out[0] = s[0] * s[0];
            }
        }
        let t = integrate(&Growth, 0.0, &[1.0], 2.0, &Options::default()).unwrap();
        assert_ne!(t.end, IntegrationEnd::ReachedEnd);
        assert!(t.last_y() < 1.0);
    }

    #[test]
    fn halving_tolerance_does_not_increase_error() {
        let mut prev = f64::INFINITY;
        for &tol in &[1e-6, 5e-7, 2.5e-7, 1.25e-7] {
            let opts = Options::with_tol(tol, tol * 1e-2);
            let t = integrate(&Harmonic, 0.0, &[0.0, 1.0], 20.0, &opts).unwrap();
            let err = (t.states.last().unwrap()[0] - 20f64.sin()).abs();
            assert!(err <= prev * 1.05, "tol={tol} err={err} prev={prev}");
            prev = err;
        }
    }

    #[test]
    fn rejects_bad_span() {
        assert!(integrate(&Harmonic, 1.0, &[0.0, 1.0], 0.0, &Options::default()).is_err());
    }
}
