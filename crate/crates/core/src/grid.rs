//! Uniform one-dimensional axes and quadrature on them.

use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Fewer points than this make quadrature meaningless.
pub const MIN_POINTS: usize = 16;

/// A uniform axis `start + i·step`, `i = 0..len`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformGrid {
    start: f64,
    step: f64,
    len: usize,
}

impl UniformGrid {
    /// `len` points spanning `[min, max]` inclusive.
    pub fn new(min: f64, max: f64, len: usize) -> Result<Self> {
        if len < MIN_POINTS {
            return Err(Error::invalid(
                "grid",
                format!("{len} points; at least {MIN_POINTS} are required"),
            ));
        }
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::invalid("grid", format!("bad range [{min}, {max}]")));
        }
        Ok(UniformGrid {
            start: min,
            step: (max - min) / (len - 1) as f64,
            len,
        })
    }

    /// An axis from an explicit start and spacing.
    pub fn from_step(start: f64, step: f64, len: usize) -> Result<Self> {
        if len < MIN_POINTS {
            return Err(Error::invalid(
                "grid",
                format!("{len} points; at least {MIN_POINTS} are required"),
            ));
        }
        if !(step > 0.0 && step.is_finite() && start.is_finite()) {
            return Err(Error::invalid("grid", format!("bad step {step}")));
        }
        Ok(UniformGrid { start, step, len })
    }

    /// Validates an explicit list of points as a uniform, strictly increasing axis.
    pub fn from_points(points: &[f64]) -> Result<Self> {
        if points.len() < MIN_POINTS {
            return Err(Error::invalid(
                "grid",
                format!(
                    "{} points; at least {MIN_POINTS} are required",
                    points.len()
                ),
            ));
        }
        let step = (points[points.len() - 1] - points[0]) / (points.len() - 1) as f64;
        for (i, w) in points.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::invalid(
                    "grid",
                    format!("not increasing at index {i}"),
                ));
            }
            if ((w[1] - w[0]) - step).abs() > 1e-9 * step {
                return Err(Error::invalid("grid", format!("not uniform at index {i}")));
            }
        }
        UniformGrid::from_step(points[0], step, points.len())
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.point(self.len - 1)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.point(i)).collect()
    }

    /// Trapezoid rule for samples on this axis.
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        trapezoid(values, self.step)
    }

    /// Symmetric momentum axis with `len` points and spacing `π/(period·dx)`.
    ///
    /// On such an axis `e^{−2i p k dx}` is periodic in `k` with period
    /// `period`, which is what the DFT route of the Wigner transform needs.
    pub fn commensurate_momentum(dx: f64, period: usize, len: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::invalid("p_grid", "zero period"));
        }
        let dp = PI / (period as f64 * dx);
        UniformGrid::from_step(-0.5 * (len - 1) as f64 * dp, dp, len)
    }

    /// If `e^{−2i p_j k dx}` is periodic in `k` for this (momentum) axis,
    /// returns that period.
    pub fn momentum_period(&self, dx: f64) -> Option<usize> {
        let ratio = PI / (self.step * dx);
        let period = ratio.round();
        ((ratio - period).abs() < 1e-9 * ratio && period >= 1.0).then_some(period as usize)
    }
}

pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => step * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_tiny_grids() {
        assert!(UniformGrid::new(0.0, 1.0, 15).is_err());
        assert!(UniformGrid::new(0.0, 1.0, 16).is_ok());
        assert!(UniformGrid::new(1.0, 0.0, 64).is_err());
    }

    #[test]
    fn endpoints_are_exact_enough() {
        let g = UniformGrid::new(-0.25, 0.45, 2048).unwrap();
        assert_eq!(g.point(0), -0.25);
        assert!((g.end() - 0.45).abs() < 1e-15);
    }

    #[test]
    fn from_points_checks_uniformity() {
        let mut pts: Vec<f64> = (0..32).map(|i| i as f64 * 0.1).collect();
        assert!(UniformGrid::from_points(&pts).is_ok());
        pts[7] += 0.01;
        assert!(UniformGrid::from_points(&pts).is_err());
    }

    #[test]
    fn trapezoid_integrates_linear_exactly() {
        let g = UniformGrid::new(0.0, 2.0, 33).unwrap();
        let v: Vec<f64> = g.points().iter().map(|x| 3.0 * x + 1.0).collect();
        assert!((g.trapezoid(&v) - 8.0).abs() < 1e-13);
    }

    #[test]
    fn commensurate_momentum_round_trips_period() {
        let dx = 0.7 / 2047.0;
        let p = UniformGrid::commensurate_momentum(dx, 1500, 512).unwrap();
        assert_eq!(p.momentum_period(dx), Some(1500));
        assert!((p.start() + p.end()).abs() < 1e-9);
        let q = UniformGrid::from_step(-100.0, 0.37, 64).unwrap();
        assert_eq!(q.momentum_period(dx), None);
    }
}
