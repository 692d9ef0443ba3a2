//! Physical constants and the recoil unit system.
//!
//! Everything downstream works in recoil units: energies in E_R = ħ²k²/2M,
//! lengths in 1/k with k = 2π/λ, times in ħ/E_R. In these units ħ = 1,
//! k = 1 and M = 1/2, so the kinetic energy of a plane wave with wave
//! vector κ (in units of k) is simply |κ|².

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Planck constant (J s), exact.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant (J s).
pub const HBAR: f64 = PLANCK / (2.0 * PI);
/// Bohr magneton (J/T).
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Unified atomic mass unit (kg).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Rb-87 atomic mass (kg).
pub const RB87_MASS: f64 = 86.909_180_531 * ATOMIC_MASS_UNIT;
/// Rb-87 5²S₁/₂ ground-state hyperfine splitting (Hz).
pub const RB87_HYPERFINE_HZ: f64 = 6.834_682_610_904e9;
/// Rb-87 nuclear spin.
pub const RB87_NUCLEAR_SPIN: f64 = 1.5;
/// Fine-structure Landé factor of 5²S₁/₂.
pub const RB87_G_J: f64 = 2.002_331_13;
/// Nuclear g-factor (same sign convention as g_J, so negative for Rb-87).
pub const RB87_G_I: f64 = -0.000_995_141_4;

/// Lattice laser wavelength used throughout the experiment (m).
pub const LATTICE_WAVELENGTH: f64 = 790.76e-9;

/// Recoil energy of a photon of `wavelength` absorbed by an atom of `mass`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoilEnergy {
    pub joules: f64,
    pub hz: f64,
}

pub fn recoil_energy(wavelength: f64, mass: f64) -> Result<RecoilEnergy> {
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(Error::domain(format!("wavelength must be positive, got {wavelength}")));
    }
    if !(mass > 0.0 && mass.is_finite()) {
        return Err(Error::domain(format!("mass must be positive, got {mass}")));
    }
    let k = 2.0 * PI / wavelength;
    let joules = HBAR * HBAR * k * k / (2.0 * mass);
    Ok(RecoilEnergy {
        joules,
        hz: joules / PLANCK,
    })
}

/// Converters between recoil units and SI / lab units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    wavelength: f64,
    mass: f64,
    wavenumber: f64,
    recoil: RecoilEnergy,
}

impl UnitSystem {
    pub fn new(wavelength: f64, mass: f64) -> Result<Self> {
        let recoil = recoil_energy(wavelength, mass)?;
        Ok(Self {
            wavelength,
            mass,
            wavenumber: 2.0 * PI / wavelength,
            recoil,
        })
    }

    /// Rb-87 in a 790.76 nm lattice.
    pub fn rubidium_lattice() -> Self {
        Self::new(LATTICE_WAVELENGTH, RB87_MASS).expect("built-in constants are positive")
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    /// k = 2π/λ (1/m).
    pub fn wavenumber(&self) -> f64 {
        self.wavenumber
    }

    pub fn recoil(&self) -> RecoilEnergy {
        self.recoil
    }

    /// ħk/M (m/s).
    pub fn recoil_velocity(&self) -> f64 {
        HBAR * self.wavenumber / self.mass
    }

    pub fn energy_from_hz(&self, hz: f64) -> f64 {
        hz / self.recoil.hz
    }

    pub fn energy_to_hz(&self, e: f64) -> f64 {
        e * self.recoil.hz
    }

    pub fn energy_from_khz(&self, khz: f64) -> f64 {
        self.energy_from_hz(khz * 1e3)
    }

    pub fn energy_to_khz(&self, e: f64) -> f64 {
        self.energy_to_hz(e) * 1e-3
    }

    pub fn energy_from_joules(&self, j: f64) -> f64 {
        j / self.recoil.joules
    }

    pub fn energy_to_joules(&self, e: f64) -> f64 {
        e * self.recoil.joules
    }

    pub fn length_from_m(&self, m: f64) -> f64 {
        m * self.wavenumber
    }

    pub fn length_to_m(&self, l: f64) -> f64 {
        l / self.wavenumber
    }

    /// Time unit ħ/E_R expressed in seconds.
    pub fn time_unit(&self) -> f64 {
        HBAR / self.recoil.joules
    }

    pub fn time_from_s(&self, s: f64) -> f64 {
        s / self.time_unit()
    }

    pub fn time_to_s(&self, t: f64) -> f64 {
        t * self.time_unit()
    }

    /// Angular frequency in E_R/ħ to a rate in 1/s.
    pub fn rate_to_per_s(&self, w: f64) -> f64 {
        w / self.time_unit()
    }

    pub fn rate_from_per_s(&self, r: f64) -> f64 {
        r * self.time_unit()
    }

    /// Velocity unit (1/k)/(ħ/E_R) = ħk/2M in m/s.
    pub fn velocity_unit(&self) -> f64 {
        self.recoil.joules / (HBAR * self.wavenumber)
    }

    pub fn velocity_to_m_per_s(&self, v: f64) -> f64 {
        v * self.velocity_unit()
    }

    pub fn velocity_from_m_per_s(&self, v: f64) -> f64 {
        v / self.velocity_unit()
    }

    /// Energy gradient E_R·k to J/m.
    pub fn slope_to_si(&self, s: f64) -> f64 {
        s * self.recoil.joules * self.wavenumber
    }

    pub fn slope_from_si(&self, s: f64) -> f64 {
        s / (self.recoil.joules * self.wavenumber)
    }
}

impl Default for UnitSystem {
    fn default() -> Self {
        Self::rubidium_lattice()
    }
}
