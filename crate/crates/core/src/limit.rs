//! Exact `n = inf` limit profiles for `k = 1`, normalized to the interface
//! `y0 = -1`.
//!
//! Each limit profile is a chain of cubics glued with value and slope
//! continuity at transversal zeros. On a piece `[lo, hi]` the cubic is
//! stored in factored form `(y - lo)(y - hi)(lead*y + offset)`:
//!
//! * `l = 0` (`Y'' + sign(Y) y = 0`): `lead = -s/6`, `offset = -s(lo+hi)/6`,
//! * `l = 1` (`Y'' y - Y' + sign(Y) y^2 = 0`): `lead = -s/3`,
//!   `offset = -s lo hi/(3(lo+hi))`,
//! * `l = 2` (`Y'' y^2 - 2Y' y + 2Y + sign(Y) y^3 = 0`): `lead = -s/2`,
//!   `offset = 0` except on the two pieces adjacent to `y = 0`,
//!
//! where `s` is the sign of the profile on the piece. Slope matching at a
//! zero `b` between pieces `[a, b]` and `[b, d]` gives the next zero `d`:
//!
//! * `l = 0`: `d = (sqrt(17 b^2 - 4ab - 4a^2) - b)/2`,
//! * `l = 1`: with `K = (b-a)(2a+b)/(a+b)`, `d = ((b+K) + sqrt((b+K)^2 + 8b(b+K)))/4`,
//! * `l = 2`: constant gap `2 sqrt 2` after `y = 1 + sqrt 2`; at `y = 0` the
//!   second derivative is matched as well.
//!
//! Recurrences run in double-double arithmetic; the leading zeros are also
//! available as exact elements of `Q(sqrt 2)` or `Q(sqrt 5)`.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::diagnostics::{Check, DiagnosticsReport};
use crate::error::{Error, Result};
use crate::ode::{integrate, Options, System};
use crate::profile::{Profile, ProfileMeta, ProfileSource, Termination};
use crate::roots::bisect;
use crate::similarity::{residual, OdeForm, OdeKind, SimilarityParams};
use crate::surd::Surd;

/// `((2k+1)+n)^{-(n+1)/n}`, the amplitude factor between `Y` and its limit
/// profile.
pub fn scaling_constant(n: f64, k: u32) -> f64 {
    ((2 * k + 1) as f64 + n).powf(-(n + 1.0) / n)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroSource {
    Recurrence,
    MatchingOracle,
    Integration,
}

/// Ordered zeros starting at the interface `-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZeroSequence {
    pub l: u32,
    pub zeros: Vec<f64>,
    /// Closed forms where known.
    #[serde(skip)]
    pub exact: Vec<Option<Surd>>,
    pub source: ZeroSource,
}

fn tf(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

fn to_f64(x: TwoFloat) -> f64 {
    f64::from(x)
}

/// `a / b` to double-double precision. `twofloat` divides by a `TwoFloat`
/// only to double precision, so the quotient gets one residual correction.
fn dd_div(a: TwoFloat, b: TwoFloat) -> TwoFloat {
    let q = a / b.hi();
    let r = a - q * b;
    q + r / b.hi()
}

fn next_zero_l0(a: TwoFloat, b: TwoFloat, index: usize) -> Result<TwoFloat> {
    let disc = tf(17.0) * b * b - tf(4.0) * a * b - tf(4.0) * a * a;
    if disc < tf(0.0) {
        return Err(Error::NegativeDiscriminant(index));
    }
    Ok((disc.sqrt() - b) / 2.0)
}

fn next_zero_l1(a: TwoFloat, b: TwoFloat) -> Result<TwoFloat> {
    let kk = dd_div((b - a) * (tf(2.0) * a + b), a + b);
    let s = b + kk;
    let disc = s * s + tf(8.0) * b * s;
    if disc < tf(0.0) {
        return Err(Error::NoRootAbove(to_f64(b)));
    }
    let d = (s + disc.sqrt()) / 4.0;
    if d <= b {
        return Err(Error::NoRootAbove(to_f64(b)));
    }
    Ok(d)
}

fn l2_zero(i: usize) -> TwoFloat {
    // (1 - 3 sqrt 2) + 2 sqrt 2 i
    let r2 = tf(2.0).sqrt();
    tf(1.0) - tf(3.0) * r2 + tf(2.0) * r2 * tf(i as f64)
}

fn zeros_hp(l: u32, count: usize) -> Result<Vec<TwoFloat>> {
    if count < 2 {
        return Err(Error::InvalidArgument("need at least two zeros".into()));
    }
    let mut z = vec![tf(-1.0)];
    match l {
        0 => {
            z.push(tf(2.0));
            for i in 1..count {
                let next = next_zero_l0(z[i - 1], z[i], i + 1)?;
                z.push(next);
            }
        }
        1 => {
            z.push(tf(0.5));
            for i in 1..count {
                let next = next_zero_l1(z[i - 1], z[i])?;
                z.push(next);
            }
        }
        2 => {
            z.push(tf(0.0));
            for i in 2..=count {
                z.push(l2_zero(i));
            }
        }
        _ => return Err(Error::IndexOutOfRange { l, limit: 3 }),
    }
    Ok(z)
}

fn exact_prefix(l: u32, count: usize) -> Vec<Option<Surd>> {
    let q = Rational64::from_integer;
    let mut out = vec![None; count + 1];
    match l {
        0 => {
            out[0] = Some(Surd::rational_only(q(-1), 2));
            out[1] = Some(Surd::rational_only(q(2), 2));
            out[2] = Some(Surd::from_ints(-1, 3, 2));
        }
        1 => {
            out[0] = Some(Surd::rational_only(q(-1), 5));
            out[1] = Some(Surd::rational_only(Rational64::new(1, 2), 5));
            out[2] = Some(Surd::new(Rational64::new(5, 4), Rational64::new(3, 4), 5));
        }
        _ => {
            out[0] = Some(Surd::rational_only(q(-1), 2));
            out[1] = Some(Surd::rational_only(q(0), 2));
            for (i, slot) in out.iter_mut().enumerate().skip(2) {
                *slot = Some(Surd::from_ints(1, 0, 2) + Surd::from_ints(0, 2 * i as i64 - 3, 2));
            }
        }
    }
    out.truncate(count + 1);
    out
}

/// The interface `-1` followed by `count` zeros of the `l`-th limit profile.
pub fn limit_zeros(l: u32, count: usize) -> Result<ZeroSequence> {
    let hp = zeros_hp(l, count)?;
    Ok(ZeroSequence {
        l,
        zeros: hp.into_iter().map(to_f64).collect(),
        exact: exact_prefix(l, count),
        source: ZeroSource::Recurrence,
    })
}

pub fn zeros_l0(count: usize) -> Result<ZeroSequence> {
    limit_zeros(0, count)
}

pub fn zeros_l1(count: usize) -> Result<ZeroSequence> {
    limit_zeros(1, count)
}

pub fn zeros_l2(count: usize) -> Result<ZeroSequence> {
    limit_zeros(2, count)
}

/// Zeros up to and including the first one at or beyond `y_max`.
pub fn limit_zeros_through(l: u32, y_max: f64) -> Result<ZeroSequence> {
    let mut count = 8;
    loop {
        let seq = limit_zeros(l, count)?;
        if let Some(pos) = seq.zeros.iter().position(|&z| z >= y_max) {
            return limit_zeros(l, pos.max(2));
        }
        count *= 2;
        if count > 1 << 22 {
            return Err(Error::InvalidArgument(format!("y_max={y_max} out of reach")));
        }
    }
}

/// Cubic `(y - lo)(y - hi)(lead*y + offset)` on `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicPiece {
    pub lo: f64,
    pub hi: f64,
    pub lead: f64,
    pub offset: f64,
}

impl CubicPiece {
    /// `(c3, c2, c1, c0)` of `c3 y^3 + c2 y^2 + c1 y + c0`.
    pub fn coefficients(&self) -> (f64, f64, f64, f64) {
        let (a, b, k, m) = (self.lo, self.hi, self.lead, self.offset);
        (k, m - k * (a + b), k * a * b - m * (a + b), m * a * b)
    }

    /// Value, first and second derivative.
    pub fn eval(&self, y: f64) -> (f64, f64, f64) {
        let (a, b, k, m) = (self.lo, self.hi, self.lead, self.offset);
        let quad = (y - a) * (y - b);
        let lin = k * y + m;
        let dquad = 2.0 * y - a - b;
        (quad * lin, dquad * lin + k * quad, 2.0 * lin + 2.0 * k * dquad)
    }

    /// Sign of the cubic inside the piece.
    pub fn sign(&self) -> f64 {
        self.eval(0.5 * (self.lo + self.hi)).0.signum()
    }

    /// Interior critical point, if the piece has one.
    pub fn extremum(&self) -> Option<(f64, f64)> {
        let (c3, c2, c1, _) = self.coefficients();
        // 3 c3 y^2 + 2 c2 y + c1 = 0
        let (qa, qb, qc) = (3.0 * c3, 2.0 * c2, c1);
        let disc = qb * qb - 4.0 * qa * qc;
        if disc < 0.0 {
            return None;
        }
        let sq = disc.sqrt();
        let q = -0.5 * (qb + qb.signum() * sq);
        let mut cands = vec![];
        if q != 0.0 {
            cands.push(qc / q);
        }
        if qa != 0.0 {
            cands.push(q / qa);
        }
        cands
            .into_iter()
            .filter(|y| *y > self.lo && *y < self.hi)
            .map(|y| (y, self.eval(y).0))
            .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseCubic {
    pub l: u32,
    pub pieces: Vec<CubicPiece>,
}

fn pieces_hp(l: u32, z: &[TwoFloat]) -> Vec<CubicPiece> {
    let mut out = Vec::with_capacity(z.len() - 1);
    for i in 0..z.len() - 1 {
        let (a, b) = (z[i], z[i + 1]);
        // Sign is +, -, +, ... starting with the positive first hump.
        let s = if i % 2 == 0 { 1.0 } else { -1.0 };
        let (lead, offset) = match l {
            0 => (-s / 6.0, to_f64(tf(-s) * (a + b) / 6.0)),
            1 => (-s / 3.0, to_f64(dd_div(tf(-s) * a * b, tf(3.0) * (a + b)))),
            _ => match i {
                0 => (-0.5, -0.5),
                1 => (0.5, to_f64(dd_div(tf(1.0), tf(2.0) * b))),
                _ => (-s / 2.0, 0.0),
            },
        };
        out.push(CubicPiece {
            lo: to_f64(a),
            hi: to_f64(b),
            lead,
            offset,
        });
    }
    out
}

impl PiecewiseCubic {
    pub fn first_zero(&self) -> f64 {
        self.pieces[0].hi
    }

    pub fn interface(&self) -> f64 {
        self.pieces[0].lo
    }

    pub fn end(&self) -> f64 {
        self.pieces.last().unwrap().hi
    }

    fn piece_index(&self, y: f64) -> Option<usize> {
        if y < self.interface() || y > self.end() {
            return None;
        }
        let idx = self.pieces.partition_point(|p| p.hi < y);
        Some(idx.min(self.pieces.len() - 1))
    }

    /// Value, slope and curvature at `y`; `None` outside the covered range.
    pub fn eval(&self, y: f64) -> Option<(f64, f64, f64)> {
        self.piece_index(y).map(|i| self.pieces[i].eval(y))
    }

    pub fn zeros(&self) -> Vec<f64> {
        let mut z = vec![self.interface()];
        z.extend(self.pieces.iter().map(|p| p.hi));
        z
    }

    /// Interior extrema `(y, value)` of all pieces.
    pub fn extrema(&self) -> Vec<(f64, f64)> {
        self.pieces.iter().filter_map(|p| p.extremum()).collect()
    }

    /// Maximum relative slope jump over interior zeros, plus the
    /// second-derivative jump at `y = 0` for `l = 2`.
    pub fn matching_jumps(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for w in self.pieces.windows(2) {
            let y = w[0].hi;
            let left = w[0].eval(y);
            let right = w[1].eval(y);
            let scale = left.1.abs().max(right.1.abs()).max(1e-300);
            out.push((y, (left.1 - right.1).abs() / scale));
            if self.l == 2 && y == 0.0 {
                let scale2 = left.2.abs().max(right.2.abs()).max(1.0);
                out.push((y, (left.2 - right.2).abs() / scale2));
            }
        }
        out
    }

    /// Samples the profile with `per_piece` interior points on every piece
    /// plus the zeros and the exact extrema.
    pub fn to_profile(&self, per_piece: usize) -> Profile {
        let mut grid = Vec::new();
        let mut value = Vec::new();
        let mut slope = Vec::new();
        let mut push = |y: f64, p: &CubicPiece| {
            let (v, d, _) = p.eval(y);
            grid.push(y);
            value.push(v);
            slope.push(d);
        };
        for (i, p) in self.pieces.iter().enumerate() {
            let mut nodes: Vec<f64> = (0..=per_piece + 1)
                .map(|j| p.lo + (p.hi - p.lo) * j as f64 / (per_piece + 1) as f64)
                .collect();
            nodes[per_piece + 1] = p.hi;
            if let Some((ye, _)) = p.extremum() {
                nodes.push(ye);
            }
            nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
            nodes.dedup();
            for (j, &y) in nodes.iter().enumerate() {
                if i > 0 && j == 0 {
                    continue;
                }
                push(y, p);
            }
        }
        // Zeros of the pieces are exact; clamp rounding noise at the knots.
        for (g, v) in grid.iter().zip(value.iter_mut()) {
            if self.pieces.iter().any(|p| p.lo == *g || p.hi == *g) {
                *v = 0.0;
            }
        }
        Profile::new(
            grid,
            value,
            slope,
            ProfileMeta {
                n: None,
                k: 1,
                l: Some(self.l),
                y0: self.interface(),
                delta: 0.0,
                termination: Termination::Exact,
                source: ProfileSource::Limit,
            },
        )
    }
}

/// Piecewise cubic of the `l`-th limit profile with `count` zeros beyond
/// the interface. Fails if any matching condition is violated beyond `1e-12`.
pub fn build_piecewise(l: u32, count: usize) -> Result<PiecewiseCubic> {
    let z = zeros_hp(l, count)?;
    let pc = PiecewiseCubic {
        l,
        pieces: pieces_hp(l, &z),
    };
    for (at, jump) in pc.matching_jumps() {
        if jump > 1e-12 {
            return Err(Error::MatchingFailure { at, jump });
        }
    }
    Ok(pc)
}

/// Limit profile covering `[-1, y_max]`.
pub fn build_piecewise_through(l: u32, y_max: f64) -> Result<PiecewiseCubic> {
    let seq = limit_zeros_through(l, y_max)?;
    build_piecewise(l, seq.zeros.len() - 1)
}

/// `+-a^3 Y(y/a)`: zeros scale by `a`, leads are unchanged, offsets scale
/// by `a`; `flip` negates the profile.
pub fn scale_family(profile: &PiecewiseCubic, a: f64, flip: bool) -> PiecewiseCubic {
    assert!(a > 0.0, "scale factor must be positive");
    let s = if flip { -1.0 } else { 1.0 };
    PiecewiseCubic {
        l: profile.l,
        pieces: profile
            .pieces
            .iter()
            .map(|p| CubicPiece {
                lo: a * p.lo,
                hi: a * p.hi,
                lead: s * p.lead,
                offset: s * a * p.offset,
            })
            .collect(),
    }
}

/// Continues the zero sequence by solving for the next cubic directly from
/// the slope (and, at `y = 0` for `l = 2`, curvature) matching conditions,
/// then deflating the known root. Independent of the closed-form
/// recurrences.
pub fn zeros_by_matching(l: u32, count: usize) -> Result<ZeroSequence> {
    if count < 2 {
        return Err(Error::InvalidArgument("need at least two zeros".into()));
    }
    // First piece from the interface expansion: Y = (|y0|/2) s^2 + c s^3 with
    // the cubic coefficient fixed by the ODE.
    let lead0 = match l {
        0 => -1.0 / 6.0,
        1 => -1.0 / 3.0,
        2 => -0.5,
        _ => return Err(Error::IndexOutOfRange { l, limit: 3 }),
    };
    // In powers of y: Y = 0.5 (y+1)^2 + lead0 (y+1)^3
    let mut coeffs = [
        0.5 + lead0,
        1.0 + 3.0 * lead0,
        0.5 + 3.0 * lead0,
        lead0,
    ]; // c0, c1, c2, c3
    let mut zeros = vec![-1.0];
    let mut lo = -1.0;
    let mut sign = 1.0;
    for _ in 0..count {
        let b = next_root_above(&coeffs, lo)?;
        zeros.push(b);
        let slope = coeffs[1] + 2.0 * coeffs[2] * b + 3.0 * coeffs[3] * b * b;
        let curv = 2.0 * coeffs[2] + 6.0 * coeffs[3] * b;
        sign = -sign;
        let k = match l {
            0 => -sign / 6.0,
            1 => -sign / 3.0,
            _ => -sign / 2.0,
        };
        coeffs = match l {
            0 => {
                // c2 = 0: Q = k y^3 + c1 y + c0
                let c1 = slope - 3.0 * k * b * b;
                [-(k * b * b * b + c1 * b), c1, 0.0, k]
            }
            1 => {
                // c1 = 0: Q = k y^3 + c2 y^2 + c0
                if b == 0.0 {
                    return Err(Error::SingularPoint(0.0));
                }
                let c2 = (slope - 3.0 * k * b * b) / (2.0 * b);
                [-(k * b * b * b + c2 * b * b), 0.0, c2, k]
            }
            _ => {
                // c0 = 0: Q = k y^3 + c2 y^2 + c1 y
                if b == 0.0 {
                    let c1 = slope;
                    let c2 = 0.5 * (curv - 0.0);
                    [0.0, c1, c2, k]
                } else {
                    // c2 b^2 + c1 b = -k b^3 ; 2 c2 b + c1 = slope - 3 k b^2
                    let c2 = (slope - 3.0 * k * b * b + k * b * b) / b;
                    let c1 = slope - 3.0 * k * b * b - 2.0 * c2 * b;
                    [0.0, c1, c2, k]
                }
            }
        };
        lo = b;
    }
    Ok(ZeroSequence {
        l,
        zeros,
        exact: vec![None; count + 1],
        source: ZeroSource::MatchingOracle,
    })
}

/// Smallest root above `lo` of `c3 y^3 + c2 y^2 + c1 y + c0` where `lo` is
/// itself a root (or the interface double root for the first piece).
fn next_root_above(c: &[f64; 4], lo: f64) -> Result<f64> {
    // Deflate (y - lo): q2 y^2 + q1 y + q0.
    let q2 = c[3];
    let q1 = c[2] + q2 * lo;
    let q0 = c[1] + q1 * lo;
    let disc = q1 * q1 - 4.0 * q2 * q0;
    if disc < 0.0 {
        return Err(Error::NoRootAbove(lo));
    }
    let sq = disc.sqrt();
    let q = -0.5 * (q1 + if q1 >= 0.0 { sq } else { -sq });
    let mut roots = vec![];
    if q2 != 0.0 {
        roots.push(q / q2);
    }
    if q != 0.0 {
        roots.push(q0 / q);
    }
    let tol = 1e-9 * (1.0 + lo.abs());
    roots
        .into_iter()
        .filter(|r| *r > lo + tol)
        .min_by(|a, b| a.partial_cmp(b).unwrap())
        .ok_or(Error::NoRootAbove(lo))
}

/// First-order form of the limit equations with the `y = 0` singularity of
/// `l = 1, 2` removed:
///
/// * `l = 0`: state `(Y, Y')`, `Y'' = -sign(Y) y`,
/// * `l = 1`: state `(Y, g = Y'/y)`, `Y' = y g`, `g' = -sign(Y)`,
/// * `l = 2`: state `(u = Y/y, u')`, `u'' = -sign(Y)`.
#[derive(Clone, Copy, Debug)]
pub struct LimitSystem {
    pub l: u32,
}

impl System for LimitSystem {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, y: f64, s: &[f64], branch: f64, out: &mut [f64]) {
        match self.l {
            0 => {
                out[0] = s[1];
                out[1] = -branch * y;
            }
            1 => {
                out[0] = y * s[1];
                out[1] = -branch;
            }
            _ => {
                out[0] = s[1];
                out[1] = -branch;
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

impl LimitSystem {
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

/// Outcome of integrating a limit equation against its exact profile.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LimitVerification {
    pub l: u32,
    pub exact: Vec<f64>,
    pub detected: Vec<f64>,
    pub max_zero_error: f64,
    pub sup_deviation: f64,
    pub first_piece_deviation: f64,
    pub report: DiagnosticsReport,
}

/// Launch offset from the interface for limit integrations.
pub const LIMIT_LAUNCH_DELTA: f64 = 1e-5;

/// Integrates the limit equation from the leading-order interface
/// expansion `Y = (|y0|/2)(y - y0)^2` with branch restarts at zeros and
/// compares against the exact profile.
pub fn verify_by_integration(l: u32, count: usize, tol: f64) -> Result<LimitVerification> {
    if count > 50 {
        return Err(Error::InvalidArgument("count must be <= 50".into()));
    }
    let pc = build_piecewise(l, count)?;
    let exact = pc.zeros();
    let sys = LimitSystem { l };
    let y0 = -1.0f64;
    let delta = LIMIT_LAUNCH_DELTA;
    let start = y0 + delta;
    let c0 = 0.5 * y0.abs();
    let state0 = sys.state_from(start, c0 * delta * delta, 2.0 * c0 * delta);
    let end = pc.end() + 0.5 * (pc.end() - exact[exact.len() - 2]);
    let opts = Options {
        restart_at_zeros: true,
        max_step: 0.05,
        ..Options::with_tol(tol, tol * 1e-3)
    };
    let traj = integrate(&sys, start, &state0, end, &opts)?;
    let detected: Vec<f64> = std::iter::once(y0).chain(traj.zeros()).collect();
    let mut max_zero_error: f64 = 0.0;
    for i in 1..exact.len() {
        let err = detected.get(i).map_or(f64::INFINITY, |d| (d - exact[i]).abs());
        max_zero_error = max_zero_error.max(err);
    }
    let mut sup: f64 = 0.0;
    let mut first: f64 = 0.0;
    for (y, s) in traj.ys.iter().zip(&traj.states) {
        if *y > pc.end() {
            break;
        }
        let got = sys.observe(*y, s).0;
        let want = pc.eval(*y).unwrap().0;
        let dev = (got - want).abs();
        sup = sup.max(dev);
        if *y <= pc.first_zero() {
            first = first.max(dev);
        }
    }
    let mut report = DiagnosticsReport::default();
    report.push(Check::at_most("zero_discrepancy", max_zero_error, 1e-6));
    report.push(Check::at_most("first_piece_deviation", first, 1e-8));
    report.push(Check::at_most(
        "profile_sup_deviation",
        sup,
        1e-6 * pc.pieces.iter().map(|p| p.extremum().map_or(0.0, |e| e.1.abs())).fold(1.0, f64::max),
    ));
    if l == 2 {
        let gap = 2.0 * 2f64.sqrt();
        let worst = detected
            .windows(2)
            .skip(2)
            .take(count.saturating_sub(2))
            .map(|w| (w[1] - w[0] - gap).abs())
            .fold(0.0, f64::max);
        report.push(Check::at_most("uniform_gap", worst, 1e-6));
    }
    Ok(LimitVerification {
        l,
        exact,
        detected,
        max_zero_error,
        sup_deviation: sup,
        first_piece_deviation: first,
        report,
    })
}

/// Residual of the limit equation on every piece, sampled `per_piece`
/// times per piece (interior points only). Returns the largest relative
/// residual.
pub fn limit_residual(pc: &PiecewiseCubic, per_piece: usize) -> Result<f64> {
    let kind = match pc.l {
        0 => OdeKind::LimitL0,
        1 => OdeKind::LimitL1,
        _ => OdeKind::LimitL2,
    };
    let form = OdeForm::new(kind, SimilarityParams::limit(pc.l)?);
    let mut worst: f64 = 0.0;
    for p in &pc.pieces {
        for j in 1..=per_piece {
            let y = p.lo + (p.hi - p.lo) * j as f64 / (per_piece + 1) as f64;
            if y == 0.0 {
                continue;
            }
            let (v, d, dd) = p.eval(y);
            let r = residual(&form, y, &[v, d, dd])?;
            let scale = match pc.l {
                0 => dd.abs().max(y.abs()),
                1 => (dd * y).abs().max(y * y),
                _ => (dd * y * y).abs().max(y.abs().powi(3)),
            };
            worst = worst.max(r.abs() / scale.max(1e-300));
        }
    }
    Ok(worst)
}

/// Truncated sum `sum_{i=1}^{N} (-1)^i y_i sin(w (y_i - y_0))` with `w = sqrt|lambda|`.
pub fn lambda_sum(zeros: &[f64], n_trunc: usize, w: f64) -> f64 {
    let y0 = zeros[0];
    (1..=n_trunc)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            s * zeros[i] * (w * (zeros[i] - y0)).sin()
        })
        .sum()
}

/// Default truncation, `sqrt|lambda|` range and grid size for [`lambda_roots`].
pub const LAMBDA_DEFAULTS: (usize, (f64, f64), usize) = (25, (0.0, 10.0), 100_000);

/// Roots in `w = sqrt|lambda|` of the truncated sum on `range`, bracketed
/// on a uniform grid and refined by bisection. The eigenvalues are `-w^2`.
pub fn lambda_roots(zeros: &ZeroSequence, n_trunc: usize, range: (f64, f64), grid: usize) -> Result<Vec<f64>> {
    if zeros.zeros.len() < n_trunc + 1 {
        return Err(Error::InvalidArgument(format!(
            "need {} zeros, have {}",
            n_trunc,
            zeros.zeros.len() - 1
        )));
    }
    if !(range.0 >= 0.0 && range.1 > range.0) || grid < 2 {
        return Err(Error::InvalidArgument("bad lambda range or grid".into()));
    }
    let z = &zeros.zeros;
    let f = |w: f64| lambda_sum(z, n_trunc, w);
    let h = (range.1 - range.0) / grid as f64;
    let mut roots = Vec::new();
    let mut prev_w = range.0;
    let mut prev = f(prev_w);
    for i in 1..=grid {
        let w = range.0 + h * i as f64;
        let cur = f(w);
        if prev != 0.0 && cur != 0.0 && prev.signum() != cur.signum() {
            if let Some(r) = bisect(f, prev_w, w) {
                roots.push(r);
            }
        } else if cur == 0.0 && w > range.0 {
            roots.push(w);
        }
        prev_w = w;
        prev = cur;
    }
    Ok(roots)
}
