//! Wigner distributions on a rectangular (x, p) grid.
//!
//! With the state normalized in x and ħ = 1,
//!
//! ```text
//! W(x, p) = (1/π) ∫ Φ*(x − x′) Φ(x + x′) e^{−2ipx′} dx′
//! ```
//!
//! sampled with `x′ = k·dx` so that `x ± x′` fall on the state grid. The
//! transform is periodic in p with period π/dx; momentum content beyond
//! ±π/(2dx) aliases.

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::wavepacket::StateGrid;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use std::f64::consts::{PI, TAU};

/// |Φ|² below this fraction of its maximum is outside the state support.
const SUPPORT_CUTOFF: f64 = 1e-24;

/// Default p range in units of sqrt(⟨p²⟩).
pub const AUTO_P_SPAN: f64 = 5.0;
pub const DEFAULT_P_POINTS: usize = 512;

/// Largest momentum-probability fraction tolerated beyond the aliasing limit.
const ALIAS_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x: UniformGrid,
    pub p: UniformGrid,
    /// Row-major, rows indexed by x, columns by p.
    pub w: Vec<f64>,
    pub theta: Option<f64>,
    pub t: f64,
    /// ∬ W dx dp.
    pub norm_captured: f64,
}

impl WignerGrid {
    pub fn nx(&self) -> usize {
        self.x.len()
    }
    pub fn np(&self) -> usize {
        self.p.len()
    }
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.np() + j]
    }
    pub fn row(&self, i: usize) -> &[f64] {
        let np = self.np();
        &self.w[i * np..(i + 1) * np]
    }
    pub fn min(&self) -> f64 {
        self.w.iter().cloned().fold(f64::INFINITY, f64::min)
    }
    pub fn max(&self) -> f64 {
        self.w.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
    pub fn cell_area(&self) -> f64 {
        self.x.step() * self.p.step()
    }
    /// 2π ∬ W² dx dp; 1 for a pure state.
    pub fn purity(&self) -> f64 {
        TAU * self.w.iter().map(|v| v * v).sum::<f64>() * self.cell_area()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WignerMethod {
    /// Quadrature over x′ for every (x, p) point.
    Direct,
    /// Folded DFT along x′; requires a commensurate p grid.
    Fourier,
    /// Fourier when the p grid allows it, otherwise Direct.
    Auto,
}

/// Index range `[lo, hi]` where |Φ|² is non-negligible.
fn support(psi: &[Complex64]) -> Option<(usize, usize)> {
    let max = psi.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max);
    if max <= 0.0 {
        return None;
    }
    let cut = SUPPORT_CUTOFF * max;
    let lo = psi.iter().position(|z| z.norm_sqr() > cut)?;
    let hi = psi.iter().rposition(|z| z.norm_sqr() > cut)?;
    Some((lo, hi))
}

/// Momentum probability density (1/2π)|∫Φ e^{−ipx} dx|² at arbitrary p, by
/// direct summation.
pub fn fourier_momentum_density(state: &StateGrid, p_grid: &UniformGrid) -> Vec<f64> {
    let x = state.grid.points();
    let dx = state.grid.step();
    (0..p_grid.len())
        .into_par_iter()
        .map(|j| {
            let p = p_grid.point(j);
            let mut acc = Complex64::new(0.0, 0.0);
            for (xi, psi) in x.iter().zip(&state.psi) {
                acc += psi * Complex64::from_polar(1.0, -p * xi);
            }
            (acc * dx).norm_sqr() / TAU
        })
        .collect()
}

/// FFT momentum distribution of a state: `(p_k, probability_k)` on the
/// natural DFT frequencies `2πk/(N dx)`, probabilities summing to 1.
pub fn fft_momentum_distribution(state: &StateGrid) -> (Vec<f64>, Vec<f64>) {
    let n = state.psi.len();
    let dx = state.grid.step();
    let mut buf = state.psi.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let total: f64 = buf.iter().map(|z| z.norm_sqr()).sum();
    let dk = TAU / (n as f64 * dx);
    let p = (0..n)
        .map(|k| {
            let signed = if k < n.div_ceil(2) {
                k as f64
            } else {
                k as f64 - n as f64
            };
            signed * dk
        })
        .collect();
    let prob = buf.iter().map(|z| z.norm_sqr() / total).collect();
    (p, prob)
}

/// sqrt(⟨p²⟩) from the FFT momentum distribution.
pub fn rms_momentum(state: &StateGrid) -> f64 {
    let (p, prob) = fft_momentum_distribution(state);
    p.iter()
        .zip(&prob)
        .map(|(p, w)| p * p * w)
        .sum::<f64>()
        .sqrt()
}

/// Momentum probability allowed outside an automatically chosen p grid.
const AUTO_TAIL: f64 = 1e-10;

/// Symmetric momentum grid spanning at least ±`span`·sqrt(⟨p²⟩), widened
/// until less than 1e-10 of the momentum probability lies outside it, and
/// commensurate with the state grid so the DFT path applies.
pub fn auto_momentum_grid(state: &StateGrid, points: usize, span: f64) -> Result<UniformGrid> {
    let dx = state.grid.step();
    let (p, prob) = fft_momentum_distribution(state);
    let rms = p
        .iter()
        .zip(&prob)
        .map(|(p, w)| p * p * w)
        .sum::<f64>()
        .sqrt();
    if !(rms > 0.0) {
        return Err(Error::Degenerate("state has no momentum spread".into()));
    }
    let mut by_size: Vec<(f64, f64)> = p.iter().map(|p| p.abs()).zip(prob).collect();
    by_size.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut tail = 0.0;
    let mut reach = 0.0;
    for (size, w) in by_size {
        tail += w;
        if tail >= AUTO_TAIL {
            reach = size;
            break;
        }
    }
    let half = (span * rms).max(reach);
    let desired_dp = 2.0 * half / (points - 1) as f64;
    let period = ((PI / (desired_dp * dx)).floor() as usize).max(1);
    UniformGrid::commensurate_momentum(dx, period, points)
}

fn check_aliasing(state: &StateGrid, p_grid: &UniformGrid) -> Result<()> {
    let limit = PI / (2.0 * state.grid.step());
    let p_extent = p_grid.start().abs().max(p_grid.end().abs());
    if p_extent > limit {
        return Err(Error::Aliasing(format!(
            "p grid reaches {p_extent:.4e} but the x step resolves only ±{limit:.4e}"
        )));
    }
    let (p, prob) = fft_momentum_distribution(state);
    let beyond: f64 = p
        .iter()
        .zip(&prob)
        .filter(|(p, _)| p.abs() > limit)
        .map(|(_, w)| w)
        .sum();
    if beyond > ALIAS_TOLERANCE {
        return Err(Error::Aliasing(format!(
            "{beyond:.3e} of the momentum probability lies beyond ±{limit:.4e}"
        )));
    }
    Ok(())
}

/// Wigner transform with the method picked automatically.
pub fn wigner_transform(state: &StateGrid, p_grid: &UniformGrid) -> Result<WignerGrid> {
    wigner_transform_with(state, p_grid, WignerMethod::Auto)
}

pub fn wigner_transform_with(
    state: &StateGrid,
    p_grid: &UniformGrid,
    method: WignerMethod,
) -> Result<WignerGrid> {
    check_aliasing(state, p_grid)?;
    let dx = state.grid.step();
    let period = p_grid.momentum_period(dx);
    let w = match (method, period) {
        (WignerMethod::Direct, _) | (WignerMethod::Auto, None) => direct_rows(state, p_grid),
        (WignerMethod::Fourier | WignerMethod::Auto, Some(period)) => {
            fourier_rows(state, p_grid, period)
        }
        (WignerMethod::Fourier, None) => {
            return Err(Error::invalid(
                "p_grid",
                "the DFT path needs dp = π/(L·dx) for an integer L",
            ))
        }
    };
    let cell = dx * p_grid.step();
    let norm_captured = w.iter().sum::<f64>() * cell;
    Ok(WignerGrid {
        x: state.grid,
        p: *p_grid,
        w,
        theta: state.theta,
        t: state.t,
        norm_captured,
    })
}

fn direct_rows(state: &StateGrid, p_grid: &UniformGrid) -> Vec<f64> {
    let nx = state.psi.len();
    let np = p_grid.len();
    let dx = state.grid.step();
    let mut out = vec![0.0; nx * np];
    let Some((lo, hi)) = support(&state.psi) else {
        return out;
    };
    let k_max = (hi - lo) / 2;
    // phases[j][k] = e^{−2i p_j k dx}, k = 1..=k_max
    let phases: Vec<Vec<Complex64>> = (0..np)
        .into_par_iter()
        .map(|j| {
            let p = p_grid.point(j);
            (1..=k_max)
                .map(|k| Complex64::from_polar(1.0, -2.0 * p * k as f64 * dx))
                .collect()
        })
        .collect();
    let psi = &state.psi;
    out.par_chunks_mut(np)
        .enumerate()
        .filter(|(i, _)| *i >= lo && *i <= hi)
        .for_each(|(i, row)| {
            let reach = (i - lo).min(hi - i);
            let g: Vec<Complex64> = (1..=reach)
                .map(|k| psi[i - k].conj() * psi[i + k])
                .collect();
            let center = psi[i].norm_sqr();
            for (j, cell) in row.iter_mut().enumerate() {
                // g(−k) = g(k)*, so the sum over ±k is twice the real part
                let mut acc = 0.0;
                for (gk, ph) in g.iter().zip(&phases[j]) {
                    acc += (gk * ph).re;
                }
                *cell = (center + 2.0 * acc) * dx / PI;
            }
        });
    out
}

fn fourier_rows(state: &StateGrid, p_grid: &UniformGrid, period: usize) -> Vec<f64> {
    let nx = state.psi.len();
    let np = p_grid.len();
    let dx = state.grid.step();
    let mut out = vec![0.0; nx * np];
    let Some((lo, hi)) = support(&state.psi) else {
        return out;
    };
    let k_max = (hi - lo) / 2;
    let p0 = p_grid.start();
    // offset[k] = e^{−2i p0 k dx}, k = 0..=k_max
    let offset: Vec<Complex64> = (0..=k_max)
        .map(|k| Complex64::from_polar(1.0, -2.0 * p0 * k as f64 * dx))
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(period);
    let psi = &state.psi;
    out.par_chunks_mut(np)
        .enumerate()
        .filter(|(i, _)| *i >= lo && *i <= hi)
        .for_each(|(i, row)| {
            let reach = (i - lo).min(hi - i);
            let mut buf = vec![Complex64::new(0.0, 0.0); period];
            buf[0] += psi[i].norm_sqr() * offset[0];
            for k in 1..=reach {
                let g = psi[i - k].conj() * psi[i + k];
                buf[k % period] += g * offset[k];
                // g(−k) = g(k)*, offset(−k) = offset(k)*
                buf[(period - k % period) % period] += (g * offset[k]).conj();
            }
            fft.process(&mut buf);
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = buf[j % period].re * dx / PI;
            }
        });
    out
}

/// Position and momentum marginals by row/column Riemann sums.
pub fn marginals(w: &WignerGrid) -> (Vec<f64>, Vec<f64>) {
    let (nx, np) = (w.nx(), w.np());
    let dp = w.p.step();
    let dx = w.x.step();
    let pos = (0..nx).map(|i| w.row(i).iter().sum::<f64>() * dp).collect();
    let mut mom = vec![0.0; np];
    for i in 0..nx {
        for (m, v) in mom.iter_mut().zip(w.row(i)) {
            *m += v;
        }
    }
    mom.iter_mut().for_each(|m| *m *= dx);
    (pos, mom)
}

/// 2π ∬ W₁ W₂ dx dp = |⟨Φ₁|Φ₂⟩|².
pub fn wigner_overlap(a: &WignerGrid, b: &WignerGrid) -> Result<f64> {
    if a.x != b.x || a.p != b.p {
        return Err(Error::Shape(format!(
            "{}×{} grid vs {}×{} grid (or different axes)",
            a.nx(),
            a.np(),
            b.nx(),
            b.np()
        )));
    }
    let s: f64 = a.w.iter().zip(&b.w).map(|(x, y)| x * y).sum();
    Ok(TAU * s * a.cell_area())
}

/// Counts the macroscopic lobes of a Wigner distribution.
///
/// W is first coarse-grained with the Wigner function of a
/// minimum-uncertainty Gaussian of widths `(σx, σp)`, σx·σp = 1/2. That
/// washes out the sub-Planck interference tiles and leaves the packet
/// clones; each local maximum above `threshold·max` is one lobe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LobeCounter {
    pub sigma_x: f64,
    pub sigma_p: f64,
    pub threshold: f64,
}

pub const DEFAULT_LOBE_THRESHOLD: f64 = 0.3;

impl LobeCounter {
    /// Minimum-uncertainty kernel with position width `sigma_x`.
    pub fn new(sigma_x: f64, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::invalid(
                "lobe_threshold",
                format!("must lie in (0, 1), got {threshold}"),
            ));
        }
        if !(sigma_x > 0.0 && sigma_x.is_finite()) {
            return Err(Error::invalid(
                "sigma_x",
                format!("must be positive, got {sigma_x}"),
            ));
        }
        Ok(LobeCounter {
            sigma_x,
            sigma_p: 0.5 / sigma_x,
            threshold,
        })
    }

    /// Kernel matched to the harmonic ground state of the model.
    pub fn for_model(params: &crate::morse::MorseParams, threshold: f64) -> Result<Self> {
        LobeCounter::new(params.ground_state_widths().0, threshold)
    }

    pub fn smoothed(&self, w: &WignerGrid) -> Vec<f64> {
        let (nx, np) = (w.nx(), w.np());
        let kx = gaussian_kernel(self.sigma_x / w.x.step());
        let kp = gaussian_kernel(self.sigma_p / w.p.step());
        // along p (contiguous)
        let mut tmp = vec![0.0; nx * np];
        tmp.par_chunks_mut(np).enumerate().for_each(|(i, out)| {
            convolve_into(w.row(i), &kp, out);
        });
        // along x, column by column
        let cols: Vec<Vec<f64>> = (0..np)
            .into_par_iter()
            .map(|j| {
                let col: Vec<f64> = (0..nx).map(|i| tmp[i * np + j]).collect();
                let mut out = vec![0.0; nx];
                convolve_into(&col, &kx, &mut out);
                out
            })
            .collect();
        let mut q = vec![0.0; nx * np];
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                q[i * np + j] = *v;
            }
        }
        q
    }

    pub fn count(&self, w: &WignerGrid) -> Result<usize> {
        let q = self.smoothed(w);
        let (nx, np) = (w.nx(), w.np());
        let max = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(max > 0.0) {
            return Err(Error::Degenerate(
                "coarse-grained Wigner function has no positive region".into(),
            ));
        }
        let level = self.threshold * max;
        let mut lobes = 0;
        for i in 0..nx {
            for j in 0..np {
                let v = q[i * np + j];
                if v <= level {
                    continue;
                }
                let mut is_peak = true;
                'nb: for di in -1i64..=1 {
                    for dj in -1i64..=1 {
                        if di == 0 && dj == 0 {
                            continue;
                        }
                        let (ii, jj) = (i as i64 + di, j as i64 + dj);
                        if ii < 0 || jj < 0 || ii >= nx as i64 || jj >= np as i64 {
                            continue;
                        }
                        let u = q[ii as usize * np + jj as usize];
                        // ties go to the first cell in row-major order
                        let earlier = (di, dj) < (0, 0);
                        if u > v || (earlier && u == v) {
                            is_peak = false;
                            break 'nb;
                        }
                    }
                }
                if is_peak {
                    lobes += 1;
                }
            }
        }
        Ok(lobes)
    }
}

/// `lobe_count` with a kernel of position width `sigma_x`.
pub fn lobe_count(w: &WignerGrid, threshold: f64, sigma_x: f64) -> Result<usize> {
    LobeCounter::new(sigma_x, threshold)?.count(w)
}

/// Normalized Gaussian taps for a width given in samples, truncated at 4σ.
fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let half = (4.0 * sigma).ceil().max(1.0) as usize;
    let mut k: Vec<f64> = (0..=2 * half)
        .map(|i| {
            let d = i as f64 - half as f64;
            (-0.5 * d * d / (sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Same-size convolution with zero padding.
fn convolve_into(input: &[f64], kernel: &[f64], out: &mut [f64]) {
    let n = input.len() as i64;
    let half = (kernel.len() / 2) as i64;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (t, kv) in kernel.iter().enumerate() {
            let src = i as i64 + t as i64 - half;
            if src >= 0 && src < n {
                acc += kv * input[src as usize];
            }
        }
        *o = acc;
    }
}
