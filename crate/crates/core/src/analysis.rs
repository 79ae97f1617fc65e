//! Observables built on phase-locked packets: spreads and tile areas,
//! interference-fringe amplitudes, quantum carpets and displacement
//! sensitivity.

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::phase_space::{
    auto_momentum_grid, fft_momentum_distribution, wigner_overlap, wigner_transform, LobeCounter,
    AUTO_P_SPAN, DEFAULT_P_POINTS,
};
use crate::wavepacket::{reduce_phase, PhaseLockedPacket, StateGrid};
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::TAU;

/// How far from 1 the norm of an input density may be.
pub const NORM_CONTRACT_TOLERANCE: f64 = 1e-3;

/// Overlap below which a displaced copy counts as distinguishable.
pub const DISTINGUISHABLE_OVERLAP: f64 = 1e-2;

pub const MIN_SCAN_STEPS: usize = 32;
pub const MIN_CARPET_ROWS: usize = 9;

/// Local maxima below this fraction of the global maximum are ignored by
/// the fringe extraction.
const FRINGE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    pub theta: f64,
    pub t: f64,
    pub dx: f64,
    pub dp: f64,
    /// Δx·Δp.
    pub action: f64,
    /// 1/(Δx·Δp).
    pub tile_area: f64,
    /// Per atomic unit of r.
    pub fringe_amplitude: f64,
    pub lobe_count: usize,
}

/// Spreads (Δx, Δp) of a normalized state. Δp comes from the discrete
/// Fourier transform, so it is independent of any Wigner p-grid.
pub fn uncertainties(state: &StateGrid) -> (f64, f64) {
    let x = state.grid.points();
    let rho = state.density();
    let norm = state.grid.trapezoid(&rho);
    let first: Vec<f64> = x.iter().zip(&rho).map(|(x, r)| x * r).collect();
    let second: Vec<f64> = x.iter().zip(&rho).map(|(x, r)| x * x * r).collect();
    let mean = state.grid.trapezoid(&first) / norm;
    let dx = (state.grid.trapezoid(&second) / norm - mean * mean)
        .max(0.0)
        .sqrt();

    let (p, prob) = fft_momentum_distribution(state);
    let pm: f64 = p.iter().zip(&prob).map(|(p, w)| p * w).sum();
    let p2: f64 = p.iter().zip(&prob).map(|(p, w)| p * p * w).sum();
    let dp = (p2 - pm * pm).max(0.0).sqrt();
    (dx, dp)
}

pub fn tile_area(state: &StateGrid) -> f64 {
    let (dx, dp) = uncertainties(state);
    1.0 / (dx * dp)
}

/// Spread of a sampled distribution `weights(values)` normalized by its sum.
pub fn spread(values: &[f64], weights: &[f64]) -> f64 {
    let total: f64 = weights.iter().sum();
    let mean: f64 = values.iter().zip(weights).map(|(v, w)| v * w).sum::<f64>() / total;
    let second: f64 = values
        .iter()
        .zip(weights)
        .map(|(v, w)| v * v * w)
        .sum::<f64>()
        / total;
    (second - mean * mean).max(0.0).sqrt()
}

/// Amplitude of the interference fringes in a position density, per unit
/// of r (the density is per unit of the scaled coordinate, hence the
/// division by `r0`).
///
/// Local maxima are grouped into clusters separated by minima of their
/// envelope. A cluster is a fringe train when it holds at least three
/// maxima and peaks in its interior; an Airy-type train at a turning point
/// decays away from its main lobe and peaks at one end instead. The result
/// is the largest peak-over-adjacent-troughs height in any fringe train,
/// or 0 when there is none.
pub fn fringe_amplitude(density: &[f64], x_grid: &UniformGrid, r0: f64) -> Result<f64> {
    if density.len() != x_grid.len() {
        return Err(Error::Shape(format!(
            "density has {} samples, grid has {}",
            density.len(),
            x_grid.len()
        )));
    }
    let norm = x_grid.trapezoid(density);
    if (norm - 1.0).abs() > NORM_CONTRACT_TOLERANCE {
        return Err(Error::Contract(format!(
            "density integrates to {norm}, expected 1"
        )));
    }
    let top = density.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let floor = FRINGE_FLOOR * top;
    let maxima: Vec<usize> = (1..density.len() - 1)
        .filter(|&j| {
            density[j] > density[j - 1] && density[j] >= density[j + 1] && density[j] > floor
        })
        .collect();
    if maxima.len() < 3 {
        return Ok(0.0);
    }
    let heights: Vec<f64> = maxima.iter().map(|&j| density[j]).collect();
    let troughs: Vec<f64> = maxima
        .windows(2)
        .map(|w| {
            density[w[0]..=w[1]]
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let last = maxima.len() - 1;
    let prominence: Vec<f64> = (0..maxima.len())
        .map(|q| {
            let adjacent = match q {
                0 => troughs[0],
                q if q == last => troughs[q - 1],
                q => 0.5 * (troughs[q - 1] + troughs[q]),
            };
            heights[q] - adjacent
        })
        .collect();

    // clusters share their bounding envelope minimum
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut current = vec![0];
    for q in 1..last {
        current.push(q);
        if heights[q] < heights[q - 1] && heights[q] <= heights[q + 1] {
            clusters.push(std::mem::replace(&mut current, vec![q]));
        }
    }
    current.push(last);
    clusters.push(current);

    let mut best = 0.0_f64;
    for cluster in clusters.iter().filter(|c| c.len() >= 3) {
        let peak = cluster
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, &q)| {
                if heights[q] > acc.1 {
                    (k, heights[q])
                } else {
                    acc
                }
            })
            .0;
        if peak > 0 && peak < cluster.len() - 1 {
            let p = cluster.iter().map(|&q| prominence[q]).fold(0.0, f64::max);
            best = best.max(p);
        }
    }
    Ok(best / r0)
}

/// Densities |Φ_θ(x, t)|² over a uniform θ lattice on [0, 2π].
#[derive(Debug, Clone, PartialEq)]
pub struct CarpetGrid {
    pub x: UniformGrid,
    pub theta: Vec<f64>,
    /// One row per θ, each of length `x.len()`.
    pub density: Vec<Vec<f64>>,
    pub t: f64,
}

/// θ_j = 2πj/(n − 1), j = 0..n, so both 0 and 2π are rows.
pub fn carpet(packet: &PhaseLockedPacket, t: f64, theta_count: usize) -> Result<CarpetGrid> {
    if theta_count < MIN_CARPET_ROWS {
        return Err(Error::invalid(
            "theta_count",
            format!("{theta_count} rows; at least {MIN_CARPET_ROWS} are required"),
        ));
    }
    let theta: Vec<f64> = (0..theta_count)
        .map(|j| TAU * j as f64 / (theta_count - 1) as f64)
        .collect();
    let density = theta
        .par_iter()
        .map(|&th| packet.phase_locked_state(th, t).density())
        .collect();
    Ok(CarpetGrid {
        x: *packet.grid(),
        theta,
        density,
        t,
    })
}

/// Copy of `state` translated by `dx_shift` in x and `dp_shift` in p.
///
/// The translation is spectral (a phase ramp on the DFT), which is exact
/// for band-limited states but periodic; content that would wrap around the
/// grid edge is reported as truncation instead.
pub fn displaced_state(state: &StateGrid, dx_shift: f64, dp_shift: f64) -> Result<StateGrid> {
    let grid = state.grid;
    let n = grid.len();
    let mut psi = state.psi.clone();
    if dx_shift != 0.0 {
        let rho = state.density();
        let total = grid.trapezoid(&rho);
        let x = grid.points();
        let wrapped: Vec<f64> = x
            .iter()
            .zip(&rho)
            .map(|(&xi, &r)| {
                let lost = if dx_shift > 0.0 {
                    xi > grid.end() - dx_shift
                } else {
                    xi < grid.start() - dx_shift
                };
                if lost {
                    r
                } else {
                    0.0
                }
            })
            .collect();
        let lost = grid.trapezoid(&wrapped) / total;
        if lost > crate::morse::NORM_CAPTURE_TOLERANCE {
            return Err(Error::Truncation {
                captured: 1.0 - lost,
                context: format!("position shift {dx_shift} pushes the state off the grid"),
            });
        }
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(n).process(&mut psi);
        let dk = TAU / (n as f64 * grid.step());
        for (k, z) in psi.iter_mut().enumerate() {
            let signed = if k < n.div_ceil(2) {
                k as f64
            } else {
                k as f64 - n as f64
            };
            *z *= Complex64::from_polar(1.0 / n as f64, -signed * dk * dx_shift);
        }
        planner.plan_fft_inverse(n).process(&mut psi);
    }
    if dp_shift != 0.0 {
        for (i, z) in psi.iter_mut().enumerate() {
            *z *= Complex64::from_polar(1.0, dp_shift * grid.point(i));
        }
    }
    let mut out = StateGrid {
        psi,
        ..state.clone()
    };
    let norm = out.norm().sqrt();
    out.psi.iter_mut().for_each(|z| *z /= norm);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Position,
    Momentum,
}

impl Direction {
    pub fn name(self) -> &'static str {
        match self {
            Direction::Position => "position",
            Direction::Momentum => "momentum",
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "position" | "x" => Ok(Direction::Position),
            "momentum" | "p" => Ok(Direction::Momentum),
            other => Err(Error::invalid(
                "direction",
                format!("expected position or momentum, got {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityScan {
    pub direction: Direction,
    pub shifts: Vec<f64>,
    pub overlaps: Vec<f64>,
    pub first_zero: Option<f64>,
    /// `(shift, wave-function overlap, Wigner-route overlap)` at a few
    /// shifts: zero, the middle of the scan and the first zero (or the end).
    pub wigner_check: Vec<(f64, f64, f64)>,
}

fn shifted(state: &StateGrid, direction: Direction, s: f64) -> Result<StateGrid> {
    match direction {
        Direction::Position => displaced_state(state, s, 0.0),
        Direction::Momentum => displaced_state(state, 0.0, s),
    }
}

fn overlap(a: &StateGrid, b: &StateGrid) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr())
}

/// |⟨Φ|Φ_s⟩|² for `steps` shifts uniformly spaced on [0, max_shift].
pub fn sensitivity_scan(
    state: &StateGrid,
    direction: Direction,
    max_shift: f64,
    steps: usize,
) -> Result<SensitivityScan> {
    if steps < MIN_SCAN_STEPS {
        return Err(Error::invalid(
            "steps",
            format!("{steps}; at least {MIN_SCAN_STEPS} are required"),
        ));
    }
    if !(max_shift > 0.0 && max_shift.is_finite()) {
        return Err(Error::invalid(
            "max_shift",
            format!("must be positive, got {max_shift}"),
        ));
    }
    let shifts: Vec<f64> = (0..steps)
        .map(|i| max_shift * i as f64 / (steps - 1) as f64)
        .collect();
    let overlaps = shifts
        .par_iter()
        .map(|&s| overlap(state, &shifted(state, direction, s)?))
        .collect::<Result<Vec<f64>>>()?;
    let zero_index = overlaps.iter().position(|&o| o < DISTINGUISHABLE_OVERLAP);
    let first_zero = zero_index.map(|i| shifts[i]);

    let p_grid = auto_momentum_grid(state, DEFAULT_P_POINTS, AUTO_P_SPAN)?;
    let w0 = wigner_transform(state, &p_grid)?;
    let mut picks = vec![0, steps / 2, zero_index.unwrap_or(steps - 1)];
    picks.dedup();
    let wigner_check = picks
        .into_iter()
        .map(|i| {
            let moved = shifted(state, direction, shifts[i])?;
            let w = wigner_transform(&moved, &p_grid)?;
            Ok((shifts[i], overlaps[i], wigner_overlap(&w0, &w)?))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(SensitivityScan {
        direction,
        shifts,
        overlaps,
        first_zero,
        wigner_check,
    })
}

/// Every observable at one (θ, t).
pub fn metrics(
    packet: &PhaseLockedPacket,
    theta: f64,
    t: f64,
    lobes: &LobeCounter,
    p_points: usize,
) -> Result<MetricsReport> {
    let state = packet.phase_locked_state(theta, t);
    let (dx, dp) = uncertainties(&state);
    let fringe = fringe_amplitude(&state.density(), &state.grid, packet.params().r0())?;
    let p_grid = auto_momentum_grid(&state, p_points, AUTO_P_SPAN)?;
    let w = wigner_transform(&state, &p_grid)?;
    Ok(MetricsReport {
        theta: reduce_phase(theta),
        t,
        dx,
        dp,
        action: dx * dp,
        tile_area: 1.0 / (dx * dp),
        fringe_amplitude: fringe,
        lobe_count: lobes.count(&w)?,
    })
}
