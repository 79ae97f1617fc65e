//! Phase-locked wave packets built from even and odd subsidiary packets.
//!
//! ```text
//! Φ₁(x,t) = Σ_{m even} d_m ψ_m(x) e^{−iE_m t}
//! Φ₂(x,t) = Σ_{m odd}  d_m ψ_m(x) e^{−iE_m t}
//! Φ_θ     = ½[(1 − e^{iθ}) Φ₁ + (1 + e^{iθ}) Φ₂]
//! ```
//!
//! so that θ = 0 selects Φ₂ and θ = π selects Φ₁.

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::morse::{EigenTable, MorseParams};
use crate::special::ln_binomial;
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Binomial SU(2) coherent-state amplitudes over levels `0..=n_max`:
/// `c_m = sqrt(C(N,m)) ζ^m / (1+ζ²)^{N/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Su2Amplitudes {
    pub n_max: usize,
    pub zeta: f64,
    pub c: Vec<f64>,
}

pub fn su2_coefficients(zeta: f64, n_max: usize) -> Result<Su2Amplitudes> {
    if n_max < 1 {
        return Err(Error::invalid(
            "n_levels",
            "need at least two levels (N ≥ 1)",
        ));
    }
    if !zeta.is_finite() {
        return Err(Error::invalid(
            "alpha",
            format!("must be finite, got {zeta}"),
        ));
    }
    let n = n_max as u32;
    let ln_denominator = 0.5 * n_max as f64 * (1.0 + zeta * zeta).ln();
    let c = (0..=n)
        .map(|m| {
            if zeta == 0.0 {
                return if m == 0 { 1.0 } else { 0.0 };
            }
            let ln_mag = 0.5 * ln_binomial(n, m) + m as f64 * zeta.abs().ln() - ln_denominator;
            let sign = if zeta < 0.0 && m % 2 == 1 { -1.0 } else { 1.0 };
            sign * ln_mag.exp()
        })
        .collect();
    Ok(Su2Amplitudes { n_max, zeta, c })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(m: usize) -> Parity {
        if m.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

/// Coherent-state amplitudes with their separately renormalized even and odd parts.
///
/// `d_even` and `d_odd` have the full length `n_max + 1`, zero on the other parity.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub n_max: usize,
    pub zeta: f64,
    pub c: Vec<f64>,
    pub d_even: Vec<f64>,
    pub d_odd: Vec<f64>,
    /// Σ_{m even} c_m² before renormalization.
    pub even_weight: f64,
}

impl CoefficientSet {
    pub fn amplitudes(&self, parity: Parity) -> &[f64] {
        match parity {
            Parity::Even => &self.d_even,
            Parity::Odd => &self.d_odd,
        }
    }

    pub fn levels(&self) -> usize {
        self.n_max + 1
    }
}

pub fn split_even_odd(amps: &Su2Amplitudes) -> Result<CoefficientSet> {
    let restrict = |parity: Parity| -> Vec<f64> {
        amps.c
            .iter()
            .enumerate()
            .map(|(m, &c)| if Parity::of(m) == parity { c } else { 0.0 })
            .collect()
    };
    let mut d_even = restrict(Parity::Even);
    let mut d_odd = restrict(Parity::Odd);
    let even_weight: f64 = d_even.iter().map(|c| c * c).sum();
    let odd_weight: f64 = d_odd.iter().map(|c| c * c).sum();
    if even_weight <= 0.0 {
        return Err(Error::DegenerateSplit("even"));
    }
    if odd_weight <= 0.0 {
        return Err(Error::DegenerateSplit("odd"));
    }
    let (se, so) = (even_weight.sqrt(), odd_weight.sqrt());
    d_even.iter_mut().for_each(|d| *d /= se);
    d_odd.iter_mut().for_each(|d| *d /= so);
    Ok(CoefficientSet {
        n_max: amps.n_max,
        zeta: amps.zeta,
        c: amps.c.clone(),
        d_even,
        d_odd,
        even_weight: even_weight / (even_weight + odd_weight),
    })
}

/// Complex wave-function samples at one (θ, t).
#[derive(Debug, Clone, PartialEq)]
pub struct StateGrid {
    pub grid: UniformGrid,
    pub psi: Vec<Complex64>,
    /// Control phase reduced to [0, 2π); `None` for subsidiary packets.
    pub theta: Option<f64>,
    pub t: f64,
    /// λ of the model that produced the state.
    pub lambda: f64,
}

impl StateGrid {
    pub fn x(&self) -> Vec<f64> {
        self.grid.points()
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.iter().map(|z| z.norm_sqr()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.grid.trapezoid(&self.density())
    }

    /// ⟨self|other⟩ by trapezoid quadrature.
    pub fn inner(&self, other: &StateGrid) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::Shape("states live on different grids".into()));
        }
        let n = self.psi.len();
        let dx = self.grid.step();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, (a, b)) in self.psi.iter().zip(&other.psi).enumerate() {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            acc += a.conj() * b * w;
        }
        Ok(acc * dx)
    }
}

pub fn reduce_phase(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Weights of |Φ₁|², |Φ₂|² and the cross term i(Φ₂Φ₁* − Φ₁Φ₂*) in |Φ_θ|².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCircle {
    pub even: f64,
    pub odd: f64,
    pub cross: f64,
}

pub fn phase_circle_coeffs(theta: f64) -> PhaseCircle {
    let (s, c) = theta.sin_cos();
    PhaseCircle {
        even: 0.5 * (1.0 - c),
        odd: 0.5 * (1.0 + c),
        cross: 0.5 * s,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityParts {
    pub even: Vec<f64>,
    pub odd: Vec<f64>,
    pub cross: Vec<f64>,
}

impl DensityParts {
    pub fn total(&self) -> Vec<f64> {
        self.even
            .iter()
            .zip(&self.odd)
            .zip(&self.cross)
            .map(|((e, o), c)| e + o + c)
            .collect()
    }
}

/// Eigenfunction table plus coherent-state amplitudes: everything needed to
/// evaluate Φ₁, Φ₂ and Φ_θ at any time.
#[derive(Debug, Clone)]
pub struct PhaseLockedPacket {
    table: EigenTable,
    coefficients: CoefficientSet,
    energies: Vec<f64>,
}

impl PhaseLockedPacket {
    pub fn new(table: EigenTable, coefficients: CoefficientSet) -> Result<Self> {
        let bound = table.params().bound_state_count();
        if coefficients.levels() > bound {
            return Err(Error::Domain(format!(
                "{} levels requested but the model has only {bound} bound states",
                coefficients.levels()
            )));
        }
        if coefficients.levels() > table.levels() {
            return Err(Error::Domain(format!(
                "{} levels requested but only {} eigenfunctions were tabulated",
                coefficients.levels(),
                table.levels()
            )));
        }
        let energies = (0..coefficients.levels())
            .map(|m| table.params().energy(m))
            .collect::<Result<Vec<_>>>()?;
        Ok(PhaseLockedPacket {
            table,
            coefficients,
            energies,
        })
    }

    /// Builds the table and coefficients from scratch.
    pub fn build(params: MorseParams, grid: UniformGrid, zeta: f64, levels: usize) -> Result<Self> {
        if levels > params.bound_state_count() {
            return Err(Error::Domain(format!(
                "{levels} levels requested but the model has only {} bound states",
                params.bound_state_count()
            )));
        }
        let amps = su2_coefficients(zeta, levels.saturating_sub(1))?;
        let coefficients = split_even_odd(&amps)?;
        let table = EigenTable::new(params, grid, levels)?;
        PhaseLockedPacket::new(table, coefficients)
    }

    pub fn params(&self) -> &MorseParams {
        self.table.params()
    }
    pub fn grid(&self) -> &UniformGrid {
        self.table.grid()
    }
    pub fn table(&self) -> &EigenTable {
        &self.table
    }
    pub fn coefficients(&self) -> &CoefficientSet {
        &self.coefficients
    }
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn warnings(&self) -> Vec<String> {
        self.table.truncation_warnings()
    }

    fn expand(&self, weights: &[Complex64]) -> Vec<Complex64> {
        let n = self.grid().len();
        let mut psi = vec![Complex64::new(0.0, 0.0); n];
        // fixed level order keeps results bit-reproducible
        for (m, w) in weights.iter().enumerate() {
            if *w == Complex64::new(0.0, 0.0) {
                continue;
            }
            let f = &self.table.function(m).values;
            for (out, &v) in psi.iter_mut().zip(f) {
                *out += w * v;
            }
        }
        psi
    }

    fn level_weights(&self, parity: Parity, t: f64) -> Vec<Complex64> {
        self.coefficients
            .amplitudes(parity)
            .iter()
            .zip(&self.energies)
            .map(|(&d, &e)| {
                if d == 0.0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    d * Complex64::from_polar(1.0, -e * t)
                }
            })
            .collect()
    }

    /// Φ₁ (even) or Φ₂ (odd) at time `t` (atomic units).
    pub fn subsidiary_state(&self, parity: Parity, t: f64) -> StateGrid {
        StateGrid {
            grid: *self.grid(),
            psi: self.expand(&self.level_weights(parity, t)),
            theta: None,
            t,
            lambda: self.params().lambda(),
        }
    }

    /// Φ_θ at time `t`; θ is reduced modulo 2π.
    pub fn phase_locked_state(&self, theta: f64, t: f64) -> StateGrid {
        let theta = reduce_phase(theta);
        let (a_even, a_odd) = mixing_factors(theta);
        let even = self.level_weights(Parity::Even, t);
        let odd = self.level_weights(Parity::Odd, t);
        let weights: Vec<Complex64> = even
            .iter()
            .zip(&odd)
            .map(|(e, o)| a_even * e + a_odd * o)
            .collect();
        StateGrid {
            grid: *self.grid(),
            psi: self.expand(&weights),
            theta: Some(theta),
            t,
            lambda: self.params().lambda(),
        }
    }

    /// |Φ_θ(x, t)|².
    pub fn density(&self, theta: f64, t: f64) -> Vec<f64> {
        self.phase_locked_state(theta, t).density()
    }

    pub fn density_decomposition(&self, theta: f64, t: f64) -> DensityParts {
        let coeffs = phase_circle_coeffs(reduce_phase(theta));
        let phi1 = self.subsidiary_state(Parity::Even, t).psi;
        let phi2 = self.subsidiary_state(Parity::Odd, t).psi;
        let even = phi1.iter().map(|z| coeffs.even * z.norm_sqr()).collect();
        let odd = phi2.iter().map(|z| coeffs.odd * z.norm_sqr()).collect();
        // i(Φ₂Φ₁* − Φ₁Φ₂*) = 2 Im(Φ₁Φ₂*)
        let cross = phi1
            .iter()
            .zip(&phi2)
            .map(|(a, b)| coeffs.cross * 2.0 * (a * b.conj()).im)
            .collect();
        DensityParts { even, odd, cross }
    }
}

/// ½(1 − e^{iθ}) and ½(1 + e^{iθ}).
fn mixing_factors(theta: f64) -> (Complex64, Complex64) {
    let phase = Complex64::from_polar(1.0, theta);
    let one = Complex64::new(1.0, 0.0);
    ((one - phase) * 0.5, (one + phase) * 0.5)
}

/// Times used throughout: t = T_rev·fraction.
pub fn revival_fraction_time(params: &MorseParams, fraction: f64) -> f64 {
    params.characteristic_times().revival * fraction
}
