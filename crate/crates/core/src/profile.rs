//! Sampled profiles `(y, Y, Y')` and grid-based zero/extremum extraction.
//!
//! Zeros and extrema are recovered from the samples alone (cubic Hermite
//! interpolation between nodes), so any consumer holding only the grid
//! data reproduces them exactly.

use serde::{Deserialize, Serialize};

use crate::roots::brent;

/// How a profile run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ReachedEnd,
    StepUnderflow,
    StateOverflow,
    Exact,
    Converged,
    NotConverged,
}

/// Producer of a profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileSource {
    Shooting,
    Limit,
    LimitIntegration,
    Vss,
    LimitVss,
    Synthetic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileMeta {
    /// `None` stands for the `n = inf` limit.
    pub n: Option<f64>,
    pub k: u32,
    pub l: Option<u32>,
    pub y0: f64,
    pub delta: f64,
    pub termination: Termination,
    pub source: ProfileSource,
}

impl ProfileMeta {
    pub fn synthetic(n: Option<f64>, l: Option<u32>) -> Self {
        Self {
            n,
            k: 1,
            l,
            y0: f64::NAN,
            delta: 0.0,
            termination: Termination::Exact,
            source: ProfileSource::Synthetic,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub grid: Vec<f64>,
    pub value: Vec<f64>,
    pub slope: Vec<f64>,
    pub meta: ProfileMeta,
}

/// Extremum location and signed value.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub y: f64,
    pub value: f64,
}

impl Profile {
    pub fn new(grid: Vec<f64>, value: Vec<f64>, slope: Vec<f64>, meta: ProfileMeta) -> Self {
        assert_eq!(grid.len(), value.len());
        assert_eq!(grid.len(), slope.len());
        Self {
            grid,
            value,
            slope,
            meta,
        }
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Value of the cubic Hermite interpolant on cell `i` at `y`, and its slope.
    fn cell_eval(&self, i: usize, y: f64) -> (f64, f64) {
        let (a, b) = (self.grid[i], self.grid[i + 1]);
        let h = b - a;
        let t = (y - a) / h;
        let (v0, v1) = (self.value[i], self.value[i + 1]);
        let (d0, d1) = (self.slope[i] * h, self.slope[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let value = (2.0 * t3 - 3.0 * t2 + 1.0) * v0
            + (t3 - 2.0 * t2 + t) * d0
            + (-2.0 * t3 + 3.0 * t2) * v1
            + (t3 - t2) * d1;
        let dval = (6.0 * t2 - 6.0 * t) * v0
            + (3.0 * t2 - 4.0 * t + 1.0) * d0
            + (-6.0 * t2 + 6.0 * t) * v1
            + (3.0 * t2 - 2.0 * t) * d1;
        (value, dval / h)
    }

    fn cell_of(&self, y: f64) -> Option<usize> {
        if self.grid.len() < 2 || y < self.grid[0] || y > *self.grid.last().unwrap() {
            return None;
        }
        let idx = self.grid.partition_point(|&g| g <= y);
        Some(idx.saturating_sub(1).min(self.grid.len() - 2))
    }

    /// Hermite-interpolated value and slope; `None` outside the grid.
    pub fn eval(&self, y: f64) -> Option<(f64, f64)> {
        self.cell_of(y).map(|i| self.cell_eval(i, y))
    }

    /// Sign changes of the value, located on the Hermite interpolant.
    /// Exact zero nodes count once when the sign changes across them.
    pub fn zeros(&self) -> Vec<f64> {
        self.crossings(|p, i, y| p.cell_eval(i, y).0, &self.value)
    }

    /// Sign changes of the slope with the interpolated value at each.
    pub fn extrema(&self) -> Vec<Extremum> {
        self.crossings(|p, i, y| p.cell_eval(i, y).1, &self.slope)
            .into_iter()
            .map(|y| Extremum {
                y,
                value: self.eval(y).unwrap().0,
            })
            .collect()
    }

    fn crossings<F>(&self, f: F, samples: &[f64]) -> Vec<f64>
    where
        F: Fn(&Self, usize, f64) -> f64,
    {
        let mut out = Vec::new();
        let mut last_sign = 0.0;
        let mut last_idx = 0usize;
        for i in 0..samples.len() {
            let s = samples[i];
            if s == 0.0 {
                continue;
            }
            let sg = s.signum();
            if last_sign != 0.0 && sg != last_sign {
                // Bracket is [grid[last_idx], grid[i]]; interior exact zeros are
                // handled by taking the first exact-zero node when present.
                let exact = (last_idx + 1..i).find(|&j| samples[j] == 0.0);
                let root = match exact {
                    Some(j) => self.grid[j],
                    None => {
                        let cell = last_idx;
                        let (a, b) = (self.grid[cell], self.grid[cell + 1]);
                        brent(|y| f(self, cell, y), a, b, 1e-15 * (1.0 + a.abs()), 200)
                            .unwrap_or(0.5 * (a + b))
                    }
                };
                out.push(root);
            }
            last_sign = sg;
            last_idx = i;
        }
        out
    }

    /// Maximum of `|Y|` over the samples.
    pub fn sup_norm(&self) -> f64 {
        self.value.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum of `Y` over the samples.
    pub fn max_value(&self) -> f64 {
        self.value.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine_profile(n: usize, span: f64) -> Profile {
        let grid: Vec<f64> = (0..=n).map(|i| span * i as f64 / n as f64).collect();
        let value = grid.iter().map(|y| y.sin()).collect();
        let slope = grid.iter().map(|y| y.cos()).collect();
        Profile::new(grid, value, slope, ProfileMeta::synthetic(None, None))
    }

    #[test]
    fn hermite_interpolation_is_accurate() {
        let p = sine_profile(400, 10.0);
        for &y in &[0.013, 3.3, 7.77] {
            let (v, d) = p.eval(y).unwrap();
            assert!((v - y.sin()).abs() < 1e-9);
            assert!((d - y.cos()).abs() < 1e-6);
        }
        assert!(p.eval(-1.0).is_none());
    }

    #[test]
    fn zeros_and_extrema_of_sine() {
        let p = sine_profile(500, 10.0);
        let z = p.zeros();
        assert_eq!(z.len(), 3);
        for (i, y) in z.iter().enumerate() {
            assert!((y - std::f64::consts::PI * (i + 1) as f64).abs() < 1e-9);
        }
        let e = p.extrema();
        assert_eq!(e.len(), 3);
        assert!((e[0].y - std::f64::consts::FRAC_PI_2).abs() < 1e-7);
        assert!((e[0].value - 1.0).abs() < 1e-9);
        assert!(e[1].value < 0.0);
    }
}
