//! Breit–Rabi structure of the Rb-87 5²S₁/₂ ground state.
//!
//! Level energies are measured from the hyperfine centroid. The closed form
//! is evaluated exactly, nuclear Zeeman term included; the quadratic shift
//! δ′ = ν₋₁,₀ − ν₀,₊₁ is taken from exact level differences.

use crate::constants::{BOHR_MAGNETON, PLANCK, RB87_G_I, RB87_G_J, RB87_HYPERFINE_HZ, RB87_NUCLEAR_SPIN};
use crate::error::{Error, Result};

/// Largest field covered by the tests.
pub const MAX_FIELD_T: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeemanLevel {
    pub f: u8,
    pub m_f: i8,
    pub energy_hz: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeemanSpectrum {
    pub field_t: f64,
    /// F = 1 (m = −1, 0, 1) followed by F = 2 (m = −2 … 2).
    pub levels: [ZeemanLevel; 8],
    /// ν₋₁,₀ = (E₁,₋₁ − E₁,₀)/h.
    pub nu_m1_0_hz: f64,
    /// ν₀,₊₁ = (E₁,₀ − E₁,₊₁)/h.
    pub nu_0_p1_hz: f64,
    /// δ′/2π = ν₋₁,₀ − ν₀,₊₁.
    pub quadratic_shift_hz: f64,
}

impl ZeemanSpectrum {
    pub fn level(&self, f: u8, m_f: i8) -> Option<&ZeemanLevel> {
        self.levels.iter().find(|l| l.f == f && l.m_f == m_f)
    }
}

/// Breit–Rabi energy (Hz) of |F, m_F⟩ at field `field_t`, relative to the centroid.
pub fn level_energy_hz(f: u8, m_f: i8, field_t: f64) -> f64 {
    let i = RB87_NUCLEAR_SPIN;
    let hfs = RB87_HYPERFINE_HZ;
    let m = m_f as f64;
    let x = (RB87_G_J - RB87_G_I) * BOHR_MAGNETON * field_t / (PLANCK * hfs);
    let base = -hfs / (2.0 * (2.0 * i + 1.0)) + RB87_G_I * BOHR_MAGNETON * m * field_t / PLANCK;
    let stretched = (m.abs() - (i + 0.5)).abs() < 1e-12;
    if stretched {
        // analytic continuation of the square root for m = ±(I + 1/2)
        base + 0.5 * hfs * (1.0 + m.signum() * x)
    } else {
        let root = (1.0 + 4.0 * m * x / (2.0 * i + 1.0) + x * x).sqrt();
        if f == 2 {
            base + 0.5 * hfs * root
        } else {
            base - 0.5 * hfs * root
        }
    }
}

/// F = 1 transition frequency ν₋₁,₀ computed without forming the large
/// hyperfine offsets, so small-field differences keep full precision.
fn f1_transitions(field_t: f64) -> (f64, f64) {
    let hfs = RB87_HYPERFINE_HZ;
    let x = (RB87_G_J - RB87_G_I) * BOHR_MAGNETON * field_t / (PLANCK * hfs);
    let nuc = RB87_G_I * BOHR_MAGNETON * field_t / PLANCK;
    let r = |m: f64| (1.0 + m * x + x * x).sqrt();
    // √a − √b = (a − b)/(√a + √b)
    let d_m1_0 = -x / (r(-1.0) + r(0.0));
    let d_0_p1 = -x / (r(0.0) + r(1.0));
    let nu_m1_0 = -nuc - 0.5 * hfs * d_m1_0;
    let nu_0_p1 = -nuc - 0.5 * hfs * d_0_p1;
    (nu_m1_0, nu_0_p1)
}

pub fn breit_rabi(field_t: f64) -> Result<ZeemanSpectrum> {
    if !(field_t >= 0.0) || !field_t.is_finite() {
        return Err(Error::domain(format!(
            "magnetic field must be non-negative, got {field_t} T"
        )));
    }
    let mut levels = [ZeemanLevel {
        f: 1,
        m_f: 0,
        energy_hz: 0.0,
    }; 8];
    let states = [(1u8, -1i8), (1, 0), (1, 1), (2, -2), (2, -1), (2, 0), (2, 1), (2, 2)];
    for (slot, &(f, m)) in levels.iter_mut().zip(states.iter()) {
        *slot = ZeemanLevel {
            f,
            m_f: m,
            energy_hz: level_energy_hz(f, m, field_t),
        };
    }
    let (nu_m1_0_hz, nu_0_p1_hz) = f1_transitions(field_t);
    // ν₋₁,₀ − ν₀,₊₁ rewritten so that no large terms cancel
    let hfs = RB87_HYPERFINE_HZ;
    let x = (RB87_G_J - RB87_G_I) * BOHR_MAGNETON * field_t / (PLANCK * hfs);
    let r0 = (1.0 + x * x).sqrt();
    let rm = (1.0 - x + x * x).sqrt();
    let rp = (1.0 + x + x * x).sqrt();
    let quadratic_shift_hz = hfs * x * x / ((rm + r0) * (r0 + rp) * (rp + rm));
    Ok(ZeemanSpectrum {
        field_t,
        levels,
        nu_m1_0_hz,
        nu_0_p1_hz,
        quadratic_shift_hz,
    })
}

/// δ/2π = ν_rf − ν₋₁,₀(B), in Hz.
pub fn detuning_hz(rf_hz: f64, field_t: f64) -> Result<f64> {
    Ok(rf_hz - breit_rabi(field_t)?.nu_m1_0_hz)
}

#[cfg(test)]
mod tests {
    use super::*;

    const REFERENCE_FIELD: f64 = 5.117e-3;

    #[test]
    fn calibration_field_reproduces_resonance_and_shift() {
        let s = breit_rabi(REFERENCE_FIELD).unwrap();
        assert!((s.nu_m1_0_hz / 36.12e6 - 1.0).abs() < 5e-4, "{}", s.nu_m1_0_hz);
        assert!(
            (s.quadratic_shift_hz / 376e3 - 1.0).abs() < 1e-2,
            "{}",
            s.quadratic_shift_hz
        );
    }

    #[test]
    fn zero_field_degenerate_manifolds() {
        let s = breit_rabi(0.0).unwrap();
        let f1: Vec<f64> = s.levels.iter().filter(|l| l.f == 1).map(|l| l.energy_hz).collect();
        let f2: Vec<f64> = s.levels.iter().filter(|l| l.f == 2).map(|l| l.energy_hz).collect();
        assert!(f1.iter().all(|e| (e - f1[0]).abs() < 1e-6));
        assert!(f2.iter().all(|e| (e - f2[0]).abs() < 1e-6));
        assert!(((f2[0] - f1[0]) / RB87_HYPERFINE_HZ - 1.0).abs() < 1e-9);
        assert_eq!(s.nu_m1_0_hz, 0.0);
        assert_eq!(s.quadratic_shift_hz, 0.0);
    }

    #[test]
    fn transitions_positive_and_ordered() {
        for &b in &[1e-6, 1e-4, 1e-3, 5.117e-3, 0.05, 0.4] {
            let s = breit_rabi(b).unwrap();
            assert!(s.nu_m1_0_hz > 0.0 && s.nu_0_p1_hz > 0.0);
            assert!(s.quadratic_shift_hz > 0.0);
            assert!(s.nu_m1_0_hz > s.nu_0_p1_hz);
        }
    }

    #[test]
    fn fast_differences_match_level_differences() {
        for &b in &[1e-3, 5.117e-3, 0.1] {
            let s = breit_rabi(b).unwrap();
            let e = |m| s.level(1, m).unwrap().energy_hz;
            let nu = e(-1) - e(0);
            assert!((nu - s.nu_m1_0_hz).abs() < 1e-3, "{nu} vs {}", s.nu_m1_0_hz);
            let dp = (e(-1) - e(0)) - (e(0) - e(1));
            assert!((dp - s.quadratic_shift_hz).abs() < 1e-3);
        }
    }

    #[test]
    fn trace_is_field_independent() {
        for &b in &[0.0, 1e-3, 5.117e-3, 0.2, 0.45] {
            let s = breit_rabi(b).unwrap();
            let trace: f64 = s.levels.iter().map(|l| l.energy_hz).sum();
            assert!(trace.abs() < 1e-4, "B = {b}: trace {trace}");
        }
    }

    #[test]
    fn stretched_states_monotone() {
        let mut prev_up = f64::NEG_INFINITY;
        let mut prev_dn = f64::INFINITY;
        for i in 0..200 {
            let b = i as f64 * 2.5e-3;
            let up = level_energy_hz(2, 2, b);
            let dn = level_energy_hz(2, -2, b);
            assert!(up > prev_up && dn < prev_dn);
            prev_up = up;
            prev_dn = dn;
        }
    }

    #[test]
    fn quadratic_shift_scales_quadratically() {
        for &b in &[1e-5, 5e-5, 1e-4] {
            let r = breit_rabi(2.0 * b).unwrap().quadratic_shift_hz / breit_rabi(b).unwrap().quadratic_shift_hz;
            assert!((r - 4.0).abs() < 1e-3, "B = {b}: ratio {r}");
        }
    }

    #[test]
    fn low_field_slope() {
        // series expansion of the closed form at B → 0:
        // dν₋₁,₀/dB = (g_J − g_I) μ_B / (4h) − g_I μ_B / h
        let series = (RB87_G_J - RB87_G_I) * BOHR_MAGNETON / (4.0 * PLANCK) - RB87_G_I * BOHR_MAGNETON / PLANCK;
        let h = 1e-9;
        let fd = (breit_rabi(2.0 * h).unwrap().nu_m1_0_hz - breit_rabi(h).unwrap().nu_m1_0_hz) / h;
        assert!((fd / series - 1.0).abs() < 1e-4, "{fd} vs {series}");
        // ≈ 7.0 kHz/μT
        assert!((series * 1e-6 / 1e3 - 7.0).abs() < 0.05);
    }

    #[test]
    fn detuning_examples() {
        let nu = breit_rabi(REFERENCE_FIELD).unwrap().nu_m1_0_hz;
        assert_eq!(detuning_hz(nu, REFERENCE_FIELD).unwrap(), 0.0);
        let d = detuning_hz(35.90e6, REFERENCE_FIELD).unwrap();
        assert!((d + 0.22e6).abs() < 0.01e6, "{d}");
        let d = detuning_hz(nu + 100e3, REFERENCE_FIELD).unwrap();
        assert!((d - 100e3).abs() < 1e-6);
    }

    #[test]
    fn negative_field_rejected() {
        assert!(breit_rabi(-1e-3).is_err());
        assert!(detuning_hz(36e6, -1.0).is_err());
    }
}
