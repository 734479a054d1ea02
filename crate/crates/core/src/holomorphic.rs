//! Holomorphic maps from a small catalog, evaluated with their complex
//! derivatives.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "map", rename_all = "kebab-case")]
pub enum HolomorphicMap {
    Identity,
    Cos,
    Exp,
    /// `sum_n a_n z^n`, coefficients as `[re, im]` pairs; `a_1` is real.
    PowerSeries { coefficients: Vec<[f64; 2]> },
}

impl HolomorphicMap {
    /// Power series with `a_1` forced onto the real axis.
    pub fn power_series(coefficients: &[Complex64]) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Config("power series needs at least one coefficient".into()));
        }
        let mut c: Vec<[f64; 2]> = coefficients.iter().map(|a| [a.re, a.im]).collect();
        if c.len() > 1 {
            c[1][1] = 0.0;
        }
        Ok(HolomorphicMap::PowerSeries { coefficients: c })
    }

    /// `f(z) = c z`.
    pub fn scaling(c: f64) -> Self {
        HolomorphicMap::PowerSeries { coefficients: vec![[0.0, 0.0], [c, 0.0]] }
    }

    fn coeffs(c: &[[f64; 2]]) -> impl DoubleEndedIterator<Item = Complex64> + ExactSizeIterator + '_ {
        c.iter().map(|a| Complex64::new(a[0], a[1]))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            HolomorphicMap::Identity => z,
            HolomorphicMap::Cos => z.cos(),
            HolomorphicMap::Exp => z.exp(),
            HolomorphicMap::PowerSeries { coefficients } => {
                Self::coeffs(coefficients).rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
            }
        }
    }

    pub fn derivative(&self, z: Complex64) -> Complex64 {
        match self {
            HolomorphicMap::Identity => Complex64::new(1.0, 0.0),
            HolomorphicMap::Cos => -z.sin(),
            HolomorphicMap::Exp => z.exp(),
            HolomorphicMap::PowerSeries { coefficients } => Self::coeffs(coefficients)
                .enumerate()
                .skip(1)
                .rev()
                .fold(Complex64::new(0.0, 0.0), |acc, (n, a)| acc * z + a * n as f64),
        }
    }

    /// Taylor coefficients `a_0..=a_n` about the origin.
    pub fn taylor_coefficients(&self, n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        match self {
            HolomorphicMap::Identity => {
                if n >= 1 {
                    out[1] = Complex64::new(1.0, 0.0);
                }
            }
            HolomorphicMap::Exp => {
                let mut f = 1.0;
                for (k, a) in out.iter_mut().enumerate() {
                    if k > 0 {
                        f *= k as f64;
                    }
                    *a = Complex64::new(1.0 / f, 0.0);
                }
            }
            HolomorphicMap::Cos => {
                let mut f = 1.0;
                for (k, a) in out.iter_mut().enumerate() {
                    if k > 0 {
                        f *= k as f64;
                    }
                    if k % 2 == 0 {
                        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
                        *a = Complex64::new(sign / f, 0.0);
                    }
                }
            }
            HolomorphicMap::PowerSeries { coefficients } => {
                for (a, c) in out.iter_mut().zip(Self::coeffs(coefficients)) {
                    *a = c;
                }
            }
        }
        out
    }

    /// `a_1 = f'(0)`.
    pub fn a1(&self) -> Complex64 {
        self.derivative(Complex64::new(0.0, 0.0))
    }

    /// Known univalence on the unit disk; `None` when not decided.
    pub fn univalent_on_disk(&self) -> Option<bool> {
        match self {
            HolomorphicMap::Identity | HolomorphicMap::Exp => Some(true),
            HolomorphicMap::Cos => Some(false),
            HolomorphicMap::PowerSeries { coefficients } => {
                // |a_1| > sum_{n>=2} n |a_n| is sufficient (f' never vanishes
                // and Re(f'/a_1) > 0 on the disk).
                let c: Vec<Complex64> = Self::coeffs(coefficients).collect();
                let a1 = c.get(1).map(|a| a.norm()).unwrap_or(0.0);
                let tail: f64 = c.iter().enumerate().skip(2).map(|(n, a)| n as f64 * a.norm()).sum();
                if a1 > tail {
                    Some(true)
                } else {
                    None
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            HolomorphicMap::Identity => "identity",
            HolomorphicMap::Cos => "cos",
            HolomorphicMap::Exp => "exp",
            HolomorphicMap::PowerSeries { .. } => "power-series",
        }
    }
}
