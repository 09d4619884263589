//! Similarity exponents, nonlinear eigenvalues, critical absorption exponents
//! and pointwise residuals of every ODE form handled by the crate.
//!
//! Exponents come in two flavours: exact rationals (`*_exact`, for rational
//! `n`) and `f64` projections. The nonlinearity `|Y|^{-n/(n+1)} Y` is always
//! evaluated as `sign(Y) |Y|^{1/(n+1)}` with value 0 at `Y = 0`.

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `sign(Y) |Y|^{1/(n+1)}`, the profile `f` recovered from `Y = |f|^n f`.
/// For `n = inf` this is `sign(Y)`.
pub fn root_nonlinearity(value: f64, n: f64) -> f64 {
    if value == 0.0 {
        return 0.0;
    }
    if n.is_infinite() {
        return value.signum();
    }
    value.signum() * value.abs().powf(1.0 / (n + 1.0))
}

/// `sign(Y) |Y|^{p/(n+1)}`, the absorption term in `Y` variables.
pub fn absorption(value: f64, n: f64, p: f64) -> f64 {
    if value == 0.0 {
        return 0.0;
    }
    value.signum() * value.abs().powf(p / (n + 1.0))
}

fn check_index(k: u32, l: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if l >= 2 * k + 1 {
        return Err(Error::IndexOutOfRange { l, limit: 2 * k + 1 });
    }
    Ok(())
}

/// `(l+1)/((2k+1)+(l+1)n)` in exact arithmetic.
pub fn alpha_l_exact(n: Rational64, k: u32, l: u32) -> Result<Rational64> {
    check_index(k, l)?;
    if n < Rational64::zero() {
        return Err(Error::InvalidArgument("n must be >= 0".into()));
    }
    let l1 = Rational64::from_integer(l as i64 + 1);
    let order = Rational64::from_integer(2 * k as i64 + 1);
    Ok(l1 / (order + l1 * n))
}

/// `(1 - alpha n)/(2k+1)` in exact arithmetic.
pub fn beta_of_exact(alpha: Rational64, n: Rational64, k: u32) -> Result<Rational64> {
    if alpha * n >= Rational64::one() {
        return Err(Error::InvalidScaling(ratio_to_f64(alpha * n)));
    }
    Ok((Rational64::one() - alpha * n) / Rational64::from_integer(2 * k as i64 + 1))
}

/// `1 + 1/alpha_l(n)` in exact arithmetic.
pub fn p_crit_exact(n: Rational64, k: u32, l: u32) -> Result<Rational64> {
    Ok(Rational64::one() + alpha_l_exact(n, k, l)?.recip())
}

pub fn ratio_to_f64(r: Rational64) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Nonlinear eigenvalue `alpha_l(n) = (l+1)/((2k+1)+(l+1)n)`.
pub fn alpha_l(n: f64, k: u32, l: u32) -> Result<f64> {
    check_index(k, l)?;
    if !(n >= 0.0) {
        return Err(Error::InvalidArgument("n must be >= 0".into()));
    }
    let l1 = l as f64 + 1.0;
    Ok(l1 / ((2 * k + 1) as f64 + l1 * n))
}

/// Spatial exponent `(1 - alpha n)/(2k+1)`.
pub fn beta_of(alpha: f64, n: f64, k: u32) -> Result<f64> {
    if alpha * n >= 1.0 {
        return Err(Error::InvalidScaling(alpha * n));
    }
    Ok((1.0 - alpha * n) / (2 * k + 1) as f64)
}

/// Critical absorption exponent `1 + 1/alpha_l(n)`.
pub fn p_crit(n: f64, k: u32, l: u32) -> Result<f64> {
    Ok(1.0 + 1.0 / alpha_l(n, k, l)?)
}

/// Exponent `(2k+1)(n+1)/n` of the oscillatory component.
pub fn oscillation_exponent(k: u32, n: f64) -> f64 {
    (2 * k + 1) as f64 * (n + 1.0) / n
}

/// Non-oscillatory power-law bundle `Y ~ A y^m` of the mass-conserving
/// equation `(-1)^{k+1} Y^{(2k)} + y Phi(Y)/((2k+1)+n) = 0` as `y -> +inf`.
///
/// The exponent balances `Y^{(2k)}` against `y Phi(Y)`, giving
/// `m = (2k+1)(n+1)/n`; the amplitude then solves
/// `|A|^{-n/(n+1)} = (-1)^k m(m-1)...(m-2k+1) ((2k+1)+n)`. A positive
/// right-hand side is needed, which fails for odd `k` (returns `None`).
pub fn growth_bundle(k: u32, n: f64) -> Option<(f64, f64)> {
    if k == 0 || !(n > 0.0) {
        return None;
    }
    let m = oscillation_exponent(k, n);
    let mut falling = 1.0;
    for j in 0..2 * k {
        falling *= m - j as f64;
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    let rhs = sign * falling * ((2 * k + 1) as f64 + n);
    if rhs <= 0.0 {
        return None;
    }
    Some((m, rhs.powf(-(n + 1.0) / n)))
}

/// Exponent triple for one problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityParams {
    /// Nonlinearity exponent; `f64::INFINITY` for the limit forms.
    pub n: f64,
    pub k: u32,
    pub l: Option<u32>,
    pub alpha: f64,
    pub beta: f64,
    pub p: Option<f64>,
}

impl SimilarityParams {
    /// Eigenvalue problem of index `l`.
    pub fn eigen(n: f64, k: u32, l: u32) -> Result<Self> {
        let alpha = alpha_l(n, k, l)?;
        let beta = beta_of(alpha, n, k)?;
        Ok(Self {
            n,
            k,
            l: Some(l),
            alpha,
            beta,
            p: None,
        })
    }

    /// Very singular solutions of the absorption equation: `alpha = 1/(p-1)`,
    /// `beta = (p-(n+1))/((p-1)(2k+1))`.
    pub fn vss(n: f64, p: f64, k: u32) -> Result<Self> {
        if !(n >= 0.0) || k == 0 {
            return Err(Error::InvalidExponents(format!("n={n}, k={k}")));
        }
        if !(p > n + 1.0) {
            return Err(Error::InvalidExponents(format!(
                "p={p} must exceed n+1={}",
                n + 1.0
            )));
        }
        Ok(Self {
            n,
            k,
            l: None,
            alpha: 1.0 / (p - 1.0),
            beta: (p - (n + 1.0)) / ((p - 1.0) * (2 * k + 1) as f64),
            p: Some(p),
        })
    }

    /// `n = inf` limit of the eigenvalue problem of index `l` (k = 1).
    pub fn limit(l: u32) -> Result<Self> {
        check_index(1, l)?;
        Ok(Self {
            n: f64::INFINITY,
            k: 1,
            l: Some(l),
            alpha: 0.0,
            beta: 0.0,
            p: None,
        })
    }
}

/// ODE families evaluated by [`residual`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OdeKind {
    /// `(-1)^{k+1} D^{2k+1}(|f|^n f) + beta y f' + alpha f = 0`, state `f, f', ..., f^{(2k+1)}`.
    PureF,
    /// `(-1)^{k+1} D^{2k} Y + y Phi(Y)/((2k+1)+n) = 0`, state `Y, ..., Y^{(2k)}`.
    IntegratedL0,
    /// `Y'' - Y'/y + y Phi(Y)/(2n+3) = 0` (k = 1), state `Y, Y', Y''`.
    IntegratedL1,
    /// `Y'' - 2Y'/y + 2Y/y^2 + y Phi(Y)/(3n+3) = 0` (k = 1), state `Y, Y', Y''`.
    IntegratedL2,
    /// `(-1)^{k+1} D^{2k+1} Y + beta y Phi(Y)' + alpha Phi(Y) = 0`, state `Y, ..., Y^{(2k+1)}`.
    GeneralY,
    /// `Y''' + beta y Phi(Y)' + alpha Phi(Y) - |Y|^{(p-n-1)/(n+1)} Y = 0`, state `Y, Y', Y'', Y'''`.
    VssY,
    /// `Y'' + sign(Y) y = 0`.
    LimitL0,
    /// `Y'' y - Y' + sign(Y) y^2 = 0`.
    LimitL1,
    /// `Y'' y^2 - 2 Y' y + 2 Y + sign(Y) y^3 = 0`.
    LimitL2,
    /// `Y''' + sign(Y) - Y = 0` on intervals of constant sign.
    LimitVss,
}

/// An ODE kind together with its exponents.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OdeForm {
    pub kind: OdeKind,
    pub params: SimilarityParams,
}

impl OdeForm {
    pub fn new(kind: OdeKind, params: SimilarityParams) -> Self {
        Self { kind, params }
    }

    /// Differential order of the form.
    pub fn order(&self) -> usize {
        let k = self.params.k as usize;
        match self.kind {
            OdeKind::IntegratedL0 => 2 * k,
            OdeKind::IntegratedL1
            | OdeKind::IntegratedL2
            | OdeKind::LimitL0
            | OdeKind::LimitL1
            | OdeKind::LimitL2 => 2,
            OdeKind::VssY | OdeKind::LimitVss => 3,
            OdeKind::PureF | OdeKind::GeneralY => 2 * k + 1,
        }
    }
}

fn sign(value: f64) -> f64 {
    if value == 0.0 {
        0.0
    } else {
        value.signum()
    }
}

/// `Phi(Y)' = Y' |Y|^{-n/(n+1)}/(n+1)`; defined as 0 when `Y = Y' = 0`.
fn root_nonlinearity_slope(value: f64, slope: f64, n: f64, y: f64) -> Result<f64> {
    if value == 0.0 {
        if slope == 0.0 {
            return Ok(0.0);
        }
        return Err(Error::SingularPoint(y));
    }
    Ok(slope * value.abs().powf(-n / (n + 1.0)) / (n + 1.0))
}

/// Taylor coefficients of `|s|^n s` from those of `s` (`s[0] != 0`).
fn signed_power_series(s: &[f64], n: f64) -> Vec<f64> {
    let q = n + 1.0;
    let mut c = vec![0.0; s.len()];
    c[0] = s[0].signum() * s[0].abs().powf(q);
    for m in 1..s.len() {
        let mut acc = 0.0;
        for j in 1..=m {
            acc += ((q + 1.0) * j as f64 - m as f64) * s[j] * c[m - j];
        }
        c[m] = acc / (m as f64 * s[0]);
    }
    c
}

/// Left-hand side of `form` at `y` for the derivative vector `state`
/// (`state[j]` is the `j`-th derivative). Zero on exact solutions.
pub fn residual(form: &OdeForm, y: f64, state: &[f64]) -> Result<f64> {
    let order = form.order();
    if state.len() < order + 1 {
        return Err(Error::InvalidArgument(format!(
            "state needs {} entries, got {}",
            order + 1,
            state.len()
        )));
    }
    let prm = &form.params;
    let n = prm.n;
    let k = prm.k;
    let odd_sign = if k % 2 == 1 { 1.0 } else { -1.0 };
    let value = state[0];
    match form.kind {
        OdeKind::IntegratedL0 => {
            let denom = (2 * k + 1) as f64 + n;
            Ok(odd_sign * state[2 * k as usize] + y * root_nonlinearity(value, n) / denom)
        }
        OdeKind::IntegratedL1 | OdeKind::IntegratedL2 if k != 1 => Err(Error::InvalidArgument(
            "higher-moment integrated forms are implemented for k = 1".into(),
        )),
        OdeKind::IntegratedL1 => {
            if y == 0.0 {
                return Err(Error::SingularPoint(y));
            }
            Ok(state[2] - state[1] / y + y * root_nonlinearity(value, n) / (2.0 * n + 3.0))
        }
        OdeKind::IntegratedL2 => {
            if y == 0.0 {
                return Err(Error::SingularPoint(y));
            }
            Ok(state[2] - 2.0 * state[1] / y
                + 2.0 * value / (y * y)
                + y * root_nonlinearity(value, n) / (3.0 * n + 3.0))
        }
        OdeKind::GeneralY => {
            let dphi = root_nonlinearity_slope(value, state[1], n, y)?;
            Ok(odd_sign * state[2 * k as usize + 1]
                + prm.beta * y * dphi
                + prm.alpha * root_nonlinearity(value, n))
        }
        OdeKind::PureF => {
            if value == 0.0 {
                return Err(Error::SingularPoint(y));
            }
            let top = 2 * k as usize + 1;
            let mut factorial = 1.0;
            let taylor: Vec<f64> = (0..=top)
                .map(|j| {
                    if j > 0 {
                        factorial *= j as f64;
                    }
                    state[j] / factorial
                })
                .collect();
            let powered = signed_power_series(&taylor, n);
            let high = powered[top] * factorial;
            Ok(odd_sign * high + prm.beta * y * state[1] + prm.alpha * value)
        }
        OdeKind::VssY => {
            let p = prm
                .p
                .ok_or_else(|| Error::InvalidExponents("VSS form needs p".into()))?;
            let dphi = root_nonlinearity_slope(value, state[1], n, y)?;
            Ok(state[3] + prm.beta * y * dphi + prm.alpha * root_nonlinearity(value, n)
                - absorption(value, n, p))
        }
        OdeKind::LimitL0 => Ok(state[2] + sign(value) * y),
        OdeKind::LimitL1 => {
            if y == 0.0 {
                return Err(Error::SingularPoint(y));
            }
            Ok(state[2] * y - state[1] + sign(value) * y * y)
        }
        OdeKind::LimitL2 => {
            if y == 0.0 {
                return Err(Error::SingularPoint(y));
            }
            Ok(state[2] * y * y - 2.0 * state[1] * y + 2.0 * value + sign(value) * y * y * y)
        }
        OdeKind::LimitVss => Ok(state[3] + sign(value) - value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    #[test]
    fn eigenvalues_match_closed_forms() {
        assert_eq!(alpha_l_exact(r(0, 1), 1, 0).unwrap(), r(1, 3));
        assert_eq!(alpha_l_exact(r(1, 1), 1, 0).unwrap(), r(1, 4));
        assert_eq!(alpha_l_exact(r(1, 1), 1, 1).unwrap(), r(2, 5));
        assert_eq!(p_crit_exact(r(0, 1), 1, 0).unwrap(), r(4, 1));
        assert_eq!(p_crit(1.0, 1, 0).unwrap(), 5.0);
        assert!((p_crit(0.6, 1, 0).unwrap() - 4.6).abs() < 1e-14);
    }

    #[test]
    fn beta_examples() {
        assert_eq!(beta_of_exact(r(1, 4), r(1, 1), 1).unwrap(), r(1, 4));
        assert_eq!(beta_of_exact(r(1, 3), r(0, 1), 1).unwrap(), r(1, 3));
        assert_eq!(beta_of_exact(r(2, 5), r(1, 1), 1).unwrap(), r(1, 5));
        assert!(matches!(beta_of(1.0, 1.0, 1), Err(Error::InvalidScaling(_))));
    }

    #[test]
    fn out_of_range_index_is_error() {
        assert!(matches!(
            alpha_l(1.0, 1, 3),
            Err(Error::IndexOutOfRange { l: 3, limit: 3 })
        ));
        assert!(alpha_l(1.0, 2, 4).is_ok());
    }

    #[test]
    fn oscillation_exponent_examples() {
        assert_eq!(oscillation_exponent(1, 3.0), 4.0);
        assert_eq!(oscillation_exponent(1, 1.0), 6.0);
        assert_eq!(oscillation_exponent(2, 1.0), 10.0);
    }

    #[test]
    fn growth_bundle_absent_for_odd_order() {
        assert!(growth_bundle(1, 1.0).is_none());
        assert!(growth_bundle(3, 2.0).is_none());
    }

    #[test]
    fn growth_bundle_solves_leading_balance() {
        // Substitute A y^m into Y'''' ... for k=2: -Y^{(4)} + y Phi(Y)/(5+n) = 0.
        for &n in &[0.5, 1.0, 2.0, 7.0] {
            let (m, amp) = growth_bundle(2, n).unwrap();
            for &y in &[3.0, 10.0, 50.0] {
                let value = amp * f64::powf(y, m);
                let d4 = amp * m * (m - 1.0) * (m - 2.0) * (m - 3.0) * y.powf(m - 4.0);
                let lhs = -d4 + y * root_nonlinearity(value, n) / (5.0 + n);
                assert!(lhs.abs() <= 1e-12 * d4.abs(), "n={n} y={y} lhs={lhs}");
            }
        }
    }

    #[test]
    fn limit_l0_first_piece_has_zero_residual() {
        let form = OdeForm::new(OdeKind::LimitL0, SimilarityParams::limit(0).unwrap());
        let y: f64 = 0.5;
        let value = -(y + 1.0).powi(2) * (y - 2.0) / 6.0;
        let slope = -(y + 1.0) * (y - 2.0) / 3.0 - (y + 1.0).powi(2) / 6.0;
        let curv = -(y - 2.0) / 3.0 - 2.0 * (y + 1.0) / 3.0;
        assert!(residual(&form, y, &[value, slope, curv]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn singular_limit_forms_reject_origin() {
        let form = OdeForm::new(OdeKind::LimitL1, SimilarityParams::limit(1).unwrap());
        assert!(matches!(
            residual(&form, 0.0, &[0.0, 0.0, 0.0]),
            Err(Error::SingularPoint(_))
        ));
    }

    #[test]
    fn pure_f_agrees_with_general_y() {
        // f = 1 + y/4 + y^2/10 + y^3/7 near y = 0.3 with n = 2, k = 1.
        let n = 2.0;
        let prm = SimilarityParams::eigen(n, 1, 0).unwrap();
        let y: f64 = 0.3;
        let f = [
            1.0 + y / 4.0 + y * y / 10.0 + y.powi(3) / 7.0,
            0.25 + y / 5.0 + 3.0 * y * y / 7.0,
            0.2 + 6.0 * y / 7.0,
            6.0 / 7.0,
        ];
        // Y = f^3 derivatives by hand.
        let yv = f[0].powi(3);
        let y1 = 3.0 * f[0].powi(2) * f[1];
        let y2 = 6.0 * f[0] * f[1].powi(2) + 3.0 * f[0].powi(2) * f[2];
        let y3 = 6.0 * f[1].powi(3) + 18.0 * f[0] * f[1] * f[2] + 3.0 * f[0].powi(2) * f[3];
        let a = residual(&OdeForm::new(OdeKind::PureF, prm), y, &f).unwrap();
        let b = residual(&OdeForm::new(OdeKind::GeneralY, prm), y, &[yv, y1, y2, y3]).unwrap();
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn vss_params_consistent() {
        let prm = SimilarityParams::vss(0.6, 5.0, 1).unwrap();
        assert!((prm.alpha - 0.25).abs() < 1e-15);
        assert!((prm.beta - 3.4 / 12.0).abs() < 1e-15);
        assert!(SimilarityParams::vss(1.0, 2.0, 1).is_err());
    }

    proptest! {
        #[test]
        fn moment_condition_holds_exactly(num in 0i64..200, den in 1i64..50, k in 1u32..4, l_raw in 0u32..9) {
            let l = l_raw % (2 * k + 1);
            let n = Rational64::new(num, den);
            let a = alpha_l_exact(n, k, l).unwrap();
            let b = beta_of_exact(a, n, k).unwrap();
            prop_assert_eq!(Rational64::from_integer(l as i64 + 1) * b, a);
        }

        #[test]
        fn p_crit_exceeds_n_plus_one(n in 0.0f64..50.0, k in 1u32..4, l_raw in 0u32..9) {
            let l = l_raw % (2 * k + 1);
            prop_assert!(p_crit(n, k, l).unwrap() - (n + 1.0) > 0.0);
        }

        #[test]
        fn alpha_decreases_in_n(n in 0.0f64..20.0, dn in 1e-3f64..5.0, l in 0u32..3) {
            prop_assert!(alpha_l(n + dn, 1, l).unwrap() < alpha_l(n, 1, l).unwrap());
        }

        #[test]
        fn small_n_limit(k in 1u32..4, l_raw in 0u32..9) {
            let l = l_raw % (2 * k + 1);
            let a = alpha_l(1e-300, k, l).unwrap();
            let target = (l + 1) as f64 / (2 * k + 1) as f64;
            prop_assert!((a - target).abs() <= f64::EPSILON * target);
        }
    }
}
