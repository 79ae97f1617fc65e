//! Morse-oscillator model in the dimensionless coordinate `x = r/r0 − 1`.
//!
//! With `V(x) = D(e^{−2βx} − 2e^{−βx})` and effective mass `M = μ r0²`
//! the bound states are
//!
//! ```text
//! ψ_m(x) = N_m ξ^{s_m} e^{−ξ/2} L_m^{(2 s_m)}(ξ),   ξ = 2λ e^{−βx},   s_m = λ − m − 1/2
//! E_m    = −(D/λ²)(λ − m − 1/2)²,                   λ = r0·sqrt(2μD)/β
//! ```
//!
//! Amplitudes are assembled from logarithms and only exponentiated at the
//! end; at λ ≈ 117 the individual factors overflow.

use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::special::{laguerre, ln_factorial, ln_gamma};
use rayon::prelude::*;
use std::f64::consts::PI;

/// One atomic unit of time in seconds.
pub const AU_TIME_SECONDS: f64 = 2.418_884_326_585_7e-17;

/// Fraction of the analytic norm a grid must capture before an
/// eigenfunction is flagged as truncated.
pub const NORM_CAPTURE_TOLERANCE: f64 = 1e-6;

/// λ = r0·sqrt(2μD)/β.
pub fn derive_lambda(beta: f64, mu: f64, r0: f64, d: f64) -> Result<f64> {
    for (name, v) in [("beta", beta), ("mu", mu), ("r0", r0), ("D", d)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(
                name,
                format!("must be positive and finite, got {v}"),
            ));
        }
    }
    Ok(r0 * (2.0 * mu * d).sqrt() / beta)
}

/// Physical constants of the molecule (atomic units) and derived quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MorseParams {
    beta: f64,
    mu: f64,
    r0: f64,
    d: f64,
    lambda: f64,
    mass: f64,
}

impl MorseParams {
    /// I₂ ground electronic state.
    pub const I2_BETA: f64 = 4.954;
    pub const I2_MU: f64 = 1.156e5;
    pub const I2_R0: f64 = 5.03;
    pub const I2_D: f64 = 0.057;

    pub fn new(beta: f64, mu: f64, r0: f64, d: f64) -> Result<Self> {
        let lambda = derive_lambda(beta, mu, r0, d)?;
        if lambda <= 0.5 {
            return Err(Error::invalid(
                "lambda",
                format!("λ = {lambda} ≤ 1/2 supports no bound state"),
            ));
        }
        Ok(MorseParams {
            beta,
            mu,
            r0,
            d,
            lambda,
            mass: mu * r0 * r0,
        })
    }

    pub fn iodine() -> Self {
        Self::new(Self::I2_BETA, Self::I2_MU, Self::I2_R0, Self::I2_D)
            .expect("I2 constants are valid")
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn r0(&self) -> f64 {
        self.r0
    }
    pub fn dissociation_energy(&self) -> f64 {
        self.d
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    /// Effective mass for the dimensionless coordinate, `μ r0²`.
    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// floor(λ − 1/2) + 1.
    pub fn bound_state_count(&self) -> usize {
        (self.lambda - 0.5).floor() as usize + 1
    }

    pub fn max_quantum_number(&self) -> usize {
        self.bound_state_count() - 1
    }

    fn check_level(&self, m: usize) -> Result<()> {
        if m > self.max_quantum_number() {
            return Err(Error::Domain(format!(
                "level m = {m} exceeds the highest bound state {}",
                self.max_quantum_number()
            )));
        }
        Ok(())
    }

    pub fn eigenstate(&self, m: usize) -> Result<Eigenstate> {
        self.check_level(m)?;
        let s = self.lambda - m as f64 - 0.5;
        Ok(Eigenstate {
            m,
            energy: -(self.d / (self.lambda * self.lambda)) * s * s,
            s,
        })
    }

    pub fn energy(&self, m: usize) -> Result<f64> {
        self.eigenstate(m).map(|e| e.energy)
    }

    pub fn characteristic_times(&self) -> CharacteristicTimes {
        let revival = 2.0 * PI * self.lambda * self.lambda / self.d;
        CharacteristicTimes {
            classical: revival / (2.0 * self.lambda - 1.0),
            revival,
        }
    }

    pub fn potential(&self, x: f64) -> f64 {
        let e = (-self.beta * x).exp();
        self.d * (e * e - 2.0 * e)
    }

    /// Harmonic frequency at the well bottom, `β·sqrt(2D/M)`.
    pub fn harmonic_frequency(&self) -> f64 {
        self.beta * (2.0 * self.d / self.mass).sqrt()
    }

    /// Position and momentum widths `(σx, σp)` of the harmonic ground state;
    /// `σx·σp = 1/2`.
    pub fn ground_state_widths(&self) -> (f64, f64) {
        let m_omega = self.mass * self.harmonic_frequency();
        ((0.5 / m_omega).sqrt(), (0.5 * m_omega).sqrt())
    }

    /// Bound-state wave function ψ_m sampled on `grid`, renormalized to unit
    /// trapezoid norm there.
    pub fn evaluate_eigenfunction(&self, m: usize, grid: &UniformGrid) -> Result<Eigenfunction> {
        let state = self.eigenstate(m)?;
        let s = state.s;
        let two_s = 2.0 * s;
        // N_m² = β·2s·m!/Γ(2λ − m)
        let ln_norm = 0.5
            * (self.beta.ln() + two_s.ln() + ln_factorial(m as u32)
                - ln_gamma(2.0 * self.lambda - m as f64));
        let ln_two_lambda = (2.0 * self.lambda).ln();
        let mut values: Vec<f64> = (0..grid.len())
            .map(|i| {
                let x = grid.point(i);
                let ln_xi = ln_two_lambda - self.beta * x;
                let xi = ln_xi.exp();
                let lag = laguerre(m as u32, two_s, xi);
                if lag.sign == 0.0 {
                    return 0.0;
                }
                lag.sign * (ln_norm + s * ln_xi - 0.5 * xi + lag.ln_abs).exp()
            })
            .collect();
        let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
        let captured_norm = grid.trapezoid(&squares);
        if !(captured_norm > 1e-300) {
            return Err(Error::Truncation {
                captured: captured_norm,
                context: format!("grid holds none of ψ_{m}"),
            });
        }
        let scale = captured_norm.sqrt().recip();
        values.iter_mut().for_each(|v| *v *= scale);
        Ok(Eigenfunction {
            state,
            values,
            captured_norm,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenstate {
    pub m: usize,
    pub energy: f64,
    /// s_m = λ − m − 1/2.
    pub s: f64,
}

/// Atomic-unit times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicTimes {
    pub classical: f64,
    pub revival: f64,
}

/// ψ_m on a grid, together with the fraction of the analytic norm the grid held.
#[derive(Debug, Clone)]
pub struct Eigenfunction {
    pub state: Eigenstate,
    pub values: Vec<f64>,
    pub captured_norm: f64,
}

impl Eigenfunction {
    pub fn is_truncated(&self) -> bool {
        (1.0 - self.captured_norm).abs() > NORM_CAPTURE_TOLERANCE
    }
}

/// Eigenfunctions `0..levels` precomputed on one grid; shared read-only.
#[derive(Debug, Clone)]
pub struct EigenTable {
    params: MorseParams,
    grid: UniformGrid,
    functions: Vec<Eigenfunction>,
}

impl EigenTable {
    pub fn new(params: MorseParams, grid: UniformGrid, levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Domain(
                "an eigenfunction table needs at least one level".into(),
            ));
        }
        params.check_level(levels - 1)?;
        let functions = (0..levels)
            .into_par_iter()
            .map(|m| params.evaluate_eigenfunction(m, &grid))
            .collect::<Result<Vec<_>>>()?;
        Ok(EigenTable {
            params,
            grid,
            functions,
        })
    }

    pub fn params(&self) -> &MorseParams {
        &self.params
    }
    pub fn grid(&self) -> &UniformGrid {
        &self.grid
    }
    pub fn levels(&self) -> usize {
        self.functions.len()
    }
    pub fn function(&self, m: usize) -> &Eigenfunction {
        &self.functions[m]
    }
    pub fn functions(&self) -> &[Eigenfunction] {
        &self.functions
    }

    /// Human-readable notes for every truncated eigenfunction.
    pub fn truncation_warnings(&self) -> Vec<String> {
        self.functions
            .iter()
            .filter(|f| f.is_truncated())
            .map(|f| {
                format!(
                    "ψ_{} truncated by the grid: captured norm {:.10}",
                    f.state.m, f.captured_norm
                )
            })
            .collect()
    }
}
