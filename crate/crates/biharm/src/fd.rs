//! Central finite differences with optional Richardson extrapolation.

use std::ops::{Add, Mul, Sub};

#[derive(Clone, Copy, Debug)]
pub struct FdConfig {
    pub step: f64,
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            step: 1e-4,
            richardson: true,
        }
    }
}

impl FdConfig {
    pub fn with_step(step: f64) -> Self {
        Self {
            step,
            ..Self::default()
        }
    }

    /// Plain second-order central differences, no extrapolation.
    pub fn plain(step: f64) -> Self {
        Self {
            step,
            richardson: false,
        }
    }
}

fn central<T, F>(f: &F, x: f64, h: f64) -> T
where
    F: Fn(f64) -> T,
    T: Sub<Output = T> + Mul<f64, Output = T>,
{
    (f(x + h) - f(x - h)) * (0.5 / h)
}

/// First derivative of `f` at `x`. With Richardson extrapolation the result
/// is fourth-order accurate.
pub fn deriv<T, F>(f: F, x: f64, cfg: &FdConfig) -> T
where
    F: Fn(f64) -> T,
    T: Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> + Clone,
{
    let h = cfg.step;
    if cfg.richardson {
        let coarse = central(&f, x, h);
        let fine = central(&f, x, 0.5 * h);
        (fine * 4.0 - coarse) * (1.0 / 3.0)
    } else {
        central(&f, x, h)
    }
}

/// Partial derivative along coordinate `i` of a function on a chart.
pub fn partial<T, F>(f: F, x: &[f64], i: usize, cfg: &FdConfig) -> T
where
    F: Fn(&[f64]) -> T,
    T: Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T> + Clone,
{
    let y = x.to_vec();
    deriv(
        |t| {
            let mut z = y.clone();
            z[i] = t;
            f(&z)
        },
        x[i],
        cfg,
    )
}
