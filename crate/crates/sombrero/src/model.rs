//! Dimensionless parameter bookkeeping for the circular-well problem.
//!
//! Physical inputs (mass μ, frequency ω, ħ, rim radius ρ₀) enter only through
//! two maps: radii scale by sqrt(2μω/ħ) and energies by ħω. Everything
//! downstream works with the dimensionless rim radius r₀ and energy ε.
//!
//! At fixed angular momentum m the radial equation splits at the rim into an
//! inner piece (inverted oscillator, parameter ξ_in = r₀²/4 − ε) and an outer
//! piece (ordinary oscillator, parameter ξ_out = −r₀²/4 − ε). The confluent
//! parameters derived from them — α = (γ − i·ξ_in)/2 for the inner Kummer
//! function and a = (γ + ξ_out)/2 for the outer Tricomi function, with
//! γ = |m| + 1 — are collected in [`SpectralParams`].

use num_complex::Complex64;

/// Physical parameters of the trap in ordinary units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Particle mass μ > 0.
    pub mass: f64,
    /// Trap frequency ω > 0.
    pub omega: f64,
    /// Reduced Planck constant ħ > 0 (set to 1 for natural units).
    pub hbar: f64,
    /// Rim radius ρ₀ ≥ 0 of the potential minimum circle.
    pub rho0: f64,
}

/// Quantum numbers of a bound state: angular momentum m ∈ ℤ and radial
/// excitation n_r ≥ 0 (the number of radial nodes).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuantumNumbers {
    pub m: i32,
    pub n_r: u32,
}

impl QuantumNumbers {
    /// The oscillator-limit principal quantum number n = 2·n_r + |m|.
    #[must_use]
    pub fn principal(&self) -> u32 {
        2 * self.n_r + self.m.unsigned_abs()
    }
}

/// Parameters of the matched hypergeometric solutions at one (ε, m, r₀).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParams {
    /// Dimensionless rim radius.
    pub r0: f64,
    /// Dimensionless energy ε = E/ħω.
    pub eps: f64,
    /// Inner separation parameter ξ_in = r₀²/4 − ε.
    pub xi_in: f64,
    /// Outer separation parameter ξ_out = −r₀²/4 − ε.
    pub xi_out: f64,
    /// First parameter of the inner Kummer function, α = (γ − i·ξ_in)/2.
    pub alpha: Complex64,
    /// First parameter of the outer Tricomi function, a = (γ + ξ_out)/2.
    pub a: f64,
    /// Shared second parameter γ = |m| + 1.
    pub gamma: f64,
}

/// Errors for physical-parameter validation.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("physical parameters must be positive (mass={mass}, omega={omega}, hbar={hbar}) with rho0 ≥ 0 (rho0={rho0})")]
    InvalidPhysicalParams {
        mass: f64,
        omega: f64,
        hbar: f64,
        rho0: f64,
    },
}

impl PhysicalParams {
    fn validate(&self) -> Result<(), ModelError> {
        let ok = self.mass > 0.0
            && self.omega > 0.0
            && self.hbar > 0.0
            && self.rho0 >= 0.0
            && self.mass.is_finite()
            && self.omega.is_finite()
            && self.hbar.is_finite()
            && self.rho0.is_finite();
        if ok {
            Ok(())
        } else {
            Err(ModelError::InvalidPhysicalParams {
                mass: self.mass,
                omega: self.omega,
                hbar: self.hbar,
                rho0: self.rho0,
            })
        }
    }
}

/// Map the physical rim radius to its dimensionless value
/// r₀ = sqrt(2μω/ħ)·ρ₀.
pub fn nondimensionalize(params: &PhysicalParams) -> Result<f64, ModelError> {
    params.validate()?;
    Ok((2.0 * params.mass * params.omega / params.hbar).sqrt() * params.rho0)
}

/// Energy of a dimensionless level: E = ħω·ε.
pub fn energy_from_eps(params: &PhysicalParams, eps: f64) -> Result<f64, ModelError> {
    params.validate()?;
    Ok(params.hbar * params.omega * eps)
}

/// Dimensionless energy of a physical one: ε = E/ħω.
pub fn eps_from_energy(params: &PhysicalParams, energy: f64) -> Result<f64, ModelError> {
    params.validate()?;
    Ok(energy / (params.hbar * params.omega))
}

/// Assemble the hypergeometric parameters for the matched solutions at one
/// (ε, m, r₀). Depends on m only through |m|, so levels come in ±m pairs.
#[must_use]
pub fn spectral_params(eps: f64, m: i32, r0: f64) -> SpectralParams {
    let gamma = f64::from(m.unsigned_abs()) + 1.0;
    let xi_in = r0 * r0 / 4.0 - eps;
    let xi_out = -r0 * r0 / 4.0 - eps;
    SpectralParams {
        r0,
        eps,
        xi_in,
        xi_out,
        alpha: Complex64::new(gamma / 2.0, -xi_in / 2.0),
        a: (gamma + xi_out) / 2.0,
        gamma,
    }
}

/// All quantum numbers (m of both signs) sharing the oscillator shell
/// n = 2·n_r + |m|. The shell holds exactly n + 1 states.
#[must_use]
pub fn oscillator_states(n: u32) -> Vec<QuantumNumbers> {
    let mut states = Vec::new();
    let n = n as i32;
    let mut abs_m = n % 2;
    while abs_m <= n {
        let n_r = ((n - abs_m) / 2) as u32;
        if abs_m == 0 {
            states.push(QuantumNumbers { m: 0, n_r });
        } else {
            states.push(QuantumNumbers { m: -abs_m, n_r });
            states.push(QuantumNumbers { m: abs_m, n_r });
        }
        abs_m += 2;
    }
    states.sort_by_key(|q| (q.m, q.n_r));
    states
}
