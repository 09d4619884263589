//! Airy function `Ai` and its derivative on the real line.
//!
//! `|x| < 10` uses the Maclaurin series summed in double-double arithmetic,
//! so the cancellation for large positive `x` stays below double precision.
//! Larger `|x|` uses the standard asymptotic expansions. All divisions in
//! the series are by `f64`, which `twofloat` performs to full precision.

use std::f64::consts::{FRAC_PI_4, PI};
use std::sync::OnceLock;

use twofloat::TwoFloat;

/// `Ai(0)` as a double-double.
const AI0: (f64, f64) = (0.3550280538878172, 2.05233632436212e-17);
/// `-Ai'(0)` as a double-double.
const MINUS_AIP0: (f64, f64) = (0.2588194037928068, -2.522243111610832e-17);

const SERIES_LIMIT: f64 = 10.0;

fn dd(c: (f64, f64)) -> TwoFloat {
    TwoFloat::from(c.0) + TwoFloat::from(c.1)
}

/// `(Ai(x), Ai'(x))`.
pub fn airy_ai(x: f64) -> (f64, f64) {
    if x.abs() < SERIES_LIMIT {
        maclaurin(x)
    } else if x > 0.0 {
        asymptotic_decaying(x)
    } else {
        asymptotic_oscillatory(-x)
    }
}

fn maclaurin(x: f64) -> (f64, f64) {
    let xt = TwoFloat::from(x);
    let x3 = xt * xt * xt;
    let eps = TwoFloat::from(1e-34);
    // f = sum 3^k (1/3)_k x^{3k}/(3k)!, g = sum 3^k (2/3)_k x^{3k+1}/(3k+1)!
    let mut f = TwoFloat::from(1.0);
    let mut g = xt;
    let mut fp = TwoFloat::from(0.0);
    let mut gp = TwoFloat::from(1.0);
    let mut tf = TwoFloat::from(1.0);
    let mut tg = xt;
    for k in 1..200 {
        let kf = k as f64;
        tf = tf * x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        tg = tg * x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        f += tf;
        g += tg;
        // d/dx x^m = m x^{m-1}
        if x != 0.0 {
            fp += tf * (3.0 * kf) / x;
            gp += tg * (3.0 * kf + 1.0) / x;
        }
        if tf.abs() < eps && tg.abs() < eps {
            break;
        }
    }
    let c1 = dd(AI0);
    let c2 = dd(MINUS_AIP0);
    (f64::from(c1 * f - c2 * g), f64::from(c1 * fp - c2 * gp))
}

/// Coefficients `u_k` of the asymptotic expansions.
fn u_coeffs(count: usize) -> Vec<f64> {
    let mut u = vec![1.0];
    for k in 1..count {
        let kf = k as f64;
        let prev = u[k - 1];
        u.push(prev * (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf));
    }
    u
}

/// Sums `sum_k sign^k c_k zeta^{-k}` until the terms stop decreasing.
fn asym_sum(coeffs: &[f64], zeta: f64, alternate: bool, parity: Option<usize>) -> f64 {
    let mut total = 0.0;
    let mut last = f64::INFINITY;
    for (k, c) in coeffs.iter().enumerate() {
        if let Some(p) = parity {
            if k % 2 != p {
                continue;
            }
        }
        let sign = if alternate {
            match parity {
                Some(_) => {
                    if (k / 2) % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
                None => {
                    if k % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            }
        } else {
            1.0
        };
        let term = c * zeta.powi(-(k as i32));
        if term.abs() > last {
            break;
        }
        last = term.abs();
        total += sign * term;
        if term.abs() < 1e-18 * total.abs() {
            break;
        }
    }
    total
}

fn v_coeffs(u: &[f64]) -> Vec<f64> {
    u.iter()
        .enumerate()
        .map(|(k, uk)| {
            let kf = k as f64;
            -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * uk
        })
        .collect()
}

fn coeffs() -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    CACHE.get_or_init(|| {
        let u = u_coeffs(60);
        let v = v_coeffs(&u);
        (u, v)
    })
}

fn asymptotic_decaying(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x.powf(1.5);
    let (u, v) = coeffs();
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let q = x.powf(0.25);
    (
        e / q * asym_sum(u, zeta, true, None),
        -e * q * asym_sum(v, zeta, true, None),
    )
}

fn asymptotic_oscillatory(z: f64) -> (f64, f64) {
    // Ai(-z) and d/dx Ai at x = -z.
    let zeta = 2.0 / 3.0 * z.powf(1.5);
    let (u, v) = coeffs();
    let p = asym_sum(u, zeta, true, Some(0));
    let q = asym_sum(u, zeta, true, Some(1));
    let r = asym_sum(v, zeta, true, Some(0));
    let s = asym_sum(v, zeta, true, Some(1));
    let theta = zeta - FRAC_PI_4;
    let (sn, cs) = theta.sin_cos();
    let root = PI.sqrt();
    let q4 = z.powf(0.25);
    let ai = (cs * p + sn * q) / (root * q4);
    let aip = q4 * (sn * r - cs * s) / root;
    (ai, aip)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_values() {
        let (a, d) = airy_ai(0.0);
        assert!((a - 0.355028053887817239).abs() < 1e-16);
        assert!((d + 0.258819403792806798).abs() < 1e-16);
    }

    #[test]
    fn known_values() {
        // Reference values to 16 digits.
        let cases = [
            (1.0, 0.1352924163128814, -0.1591474412967932),
            (-1.0, 0.5355608832923521, -0.01016056711664521),
            (5.0, 1.083444281360744e-4, -2.474138908684625e-4),
            (-5.0, 0.3507610090241143, 0.3271928185544431),
            (12.0, 1.393184688875361e-13, -4.854736554985308e-13),
            (-12.0, -0.06655517505437313, 1.023110453367971),
        ];

        for (x, a, d) in cases {
            let (ga, gd) = airy_ai(x);
            assert!((ga - a).abs() < 1e-14 * a.abs().max(1.0) && (ga - a).abs() < 1e-13 * a.abs(), "Ai({x}) = {ga}, want {a}");
            assert!((gd - d).abs() < 1e-13 * d.abs().max(1.0) && (gd - d).abs() < 1e-13 * d.abs().max(1e-12), "Ai'({x}) = {gd}, want {d}");
        }
    }

    #[test]
    fn series_and_asymptotics_agree_at_switch() {
        for &x in &[-10.0, 10.0, -9.5, 9.5] {
            let s = maclaurin(x);
            let a = if x > 0.0 {
                asymptotic_decaying(x)
            } else {
                asymptotic_oscillatory(-x)
            };
            let scale = s.0.abs().max(1e-300);
            assert!((s.0 - a.0).abs() < 1e-12 * scale.max(if x < 0.0 { 1.0 } else { 0.0 }), "{x}: {s:?} {a:?}");
            assert!((s.1 - a.1).abs() < 1e-11 * s.1.abs().max(if x < 0.0 { 1.0 } else { 0.0 }), "{x}: {s:?} {a:?}");
        }
    }

    #[test]
    fn wronskian_like_ode_check() {
        // Ai'' = x Ai via central differences of the derivative.
        for &x in &[-30.0, -12.0, -3.0, 0.5, 4.0, 11.0] {
            let h = 1e-5;
            let dd = (airy_ai(x + h).1 - airy_ai(x - h).1) / (2.0 * h);
            let want = x * airy_ai(x).0;
            assert!((dd - want).abs() < 1e-7 * (1.0 + want.abs()), "{x}: {dd} vs {want}");
        }
    }
}
