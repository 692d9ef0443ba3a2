//! Nonadiabatic loss-rate estimators for the uppermost adiabatic surface.
//!
//! Internal units: energies and ħΔ in E_R, lengths in 1/k, velocities in
//! E_R/(ħk) (so v = 2k for momentum k in ħk), rates in E_R/ħ. Reported
//! rates are converted to s⁻¹.
//!
//! All three models share the Landau–Zener exponent πΔ²/(2vE′). E′ is the
//! slope of the difference of the crossing diabats V₊₁ + δ + δ′ and V₋₁ − δ,
//! taken as its RMS over the unit cell: √(Σ_G |G|² |V₊₁(G) − V₋₁(G)|²).

use std::f64::consts::PI;

use serde::Serialize;

use crate::bloch::BlochSolution;
use crate::constants::UnitSystem;
use crate::dressing::{min_gap, min_gap_on_grid, top_surface_minimum, AdiabaticSurfaces, DressingParams};
use crate::error::{Error, Result};
use crate::lattice::{LatticeModel, Spin};
use crate::linalg::eigh3;
use crate::momentum::{momentum_distribution, MomentumDistribution, MomentumMode};

/// (1 − P_A) below this counts as "≪ 1".
pub const WEAK_NONADIABATIC: f64 = 0.1;
/// ω_l/Δ below this counts as "ω_l ≪ Δ".
pub const SEMICLASSICAL_REGIME: f64 = 0.2;
pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_PREFACTOR: f64 = 1.0;
/// Attempt rate = ATTEMPT_CONSTANT · ω/2π.
pub const DEFAULT_ATTEMPT_CONSTANT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossModel {
    Lz,
    FourierLz,
    Semiclassical,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossEstimate {
    pub model: LossModel,
    /// γ (s⁻¹).
    pub rate_per_s: f64,
    /// γ (E_R/ħ).
    pub rate: f64,
    /// ħΔ (E_R).
    pub gap: f64,
    /// Lattice depth U (E_R).
    pub depth: f64,
    /// Ω (E_R/ħ); 0 when the model does not use it.
    pub coupling: f64,
    /// Oscillation frequency used for the attempt rate (E_R/ħ).
    pub omega_l: f64,
    pub alpha: f64,
    pub prefactor: f64,
    /// Velocity entering the L-Z exponent (E_R/(ħk)); not set for sums over k.
    pub velocity: Option<f64>,
    /// E′ (E_R k).
    pub slope: Option<f64>,
    /// Per-traversal 1 − P_A (mean over the distribution for fourier-lz).
    pub nonadiabatic_probability: Option<f64>,
    /// The model's stated regime holds: (1 − P_A) ≪ 1 for L-Z, ω_l ≪ Δ for
    /// the semiclassical law.
    pub regime_ok: bool,
    /// ω_l / √(U/Δ), the proportionality constant of the semiclassical scaling.
    pub scaling_constant: Option<f64>,
}

/// L-Z exponent πΔ²/(2vE′) (ħ = 1).
pub fn lz_exponent(gap: f64, velocity: f64, slope: f64) -> Result<f64> {
    if !(velocity > 0.0) || !(slope > 0.0) {
        return Err(Error::domain(format!(
            "velocity and slope must be positive, got v = {velocity}, E′ = {slope}"
        )));
    }
    if !(gap >= 0.0) {
        return Err(Error::domain(format!("gap must be non-negative, got {gap}")));
    }
    Ok(0.5 * PI * gap * gap / (velocity * slope))
}

/// Adiabatic following probability P_A = 1 − e^{−πΔ²/(2vE′)}.
pub fn lz_probability(gap: f64, velocity: f64, slope: f64) -> Result<f64> {
    Ok(-(-lz_exponent(gap, velocity, slope)?).exp_m1())
}

/// RMS over the cell of |∇(V₊₁ − V₋₁)|, exact from the Fourier tables.
pub fn crossing_slope(lattice: &LatticeModel) -> f64 {
    let mut keys: Vec<(i32, i32)> = lattice.table(Spin::Plus).keys().cloned().collect();
    keys.extend(lattice.table(Spin::Minus).keys().cloned());
    keys.sort_unstable();
    keys.dedup();
    keys.iter()
        .map(|&(a, b)| {
            let g = lattice.g_vector(a, b);
            let d = lattice.coefficient(Spin::Plus, a, b) - lattice.coefficient(Spin::Minus, a, b);
            (g[0] * g[0] + g[1] * g[1]) * d.norm_sqr()
        })
        .sum::<f64>()
        .sqrt()
}

/// Harmonic frequency √(2κ) of the bare m_F = −1 well along its stiffest
/// axis (E_R/ħ).
pub fn bare_well_frequency(lattice: &LatticeModel) -> Result<f64> {
    let (r, _) = lattice.minimum(Spin::Minus);
    let h = lattice.hessian_at(r, Spin::Minus);
    let (w, _) = eigh3([[h[0][0], h[0][1], 0.0], [h[1][0], h[1][1], 0.0], [0.0, 0.0, 0.0]]);
    let kappa = w[2];
    if !(kappa > 0.0) {
        return Err(Error::FlatSurface);
    }
    Ok((2.0 * kappa).sqrt())
}

/// Ground-state RMS velocity √(ħω/2M) of the bare well, = √ω here.
pub fn bare_well_velocity(lattice: &LatticeModel) -> Result<f64> {
    Ok(bare_well_frequency(lattice)?.sqrt())
}

/// γ = c (ω/2π)(1 − P_A) with v and ω from the harmonic bare m_F = −1 well.
pub fn lz_rate(lattice: &LatticeModel, gap: f64, attempt_constant: f64, units: &UnitSystem) -> Result<LossEstimate> {
    if !(attempt_constant >= 0.0) {
        return Err(Error::domain("attempt constant must be non-negative"));
    }
    let slope = crossing_slope(lattice);
    if slope <= 1e-12 * lattice.depth().max(1.0) {
        return Err(Error::NoCrossing);
    }
    let omega = bare_well_frequency(lattice)?;
    let velocity = omega.sqrt();
    let pna = (-lz_exponent(gap, velocity, slope)?).exp();
    let rate = attempt_constant * omega / (2.0 * PI) * pna;
    Ok(LossEstimate {
        model: LossModel::Lz,
        rate_per_s: units.rate_to_per_s(rate),
        rate,
        gap,
        depth: lattice.depth(),
        coupling: 0.0,
        omega_l: omega,
        alpha: 0.0,
        prefactor: attempt_constant,
        velocity: Some(velocity),
        slope: Some(slope),
        nonadiabatic_probability: Some(pna),
        regime_ok: pna < WEAK_NONADIABATIC,
        scaling_constant: None,
    })
}

/// p · ω_l · e^{−αΔ/ω_l} (same units as ω_l).
pub fn semiclassical_formula(omega_l: f64, gap: f64, alpha: f64, prefactor: f64) -> Result<f64> {
    if !(omega_l > 0.0) || !(gap >= 0.0) || !(alpha >= 0.0) || !(prefactor >= 0.0) {
        return Err(Error::domain("need ω_l > 0 and Δ, α, prefactor ≥ 0"));
    }
    Ok(prefactor * omega_l * (-alpha * gap / omega_l).exp())
}

/// Semiclassical law with ω_l from the harmonic fit to the top surface.
/// Δ is the cell minimum gap unless `gap` is given.
pub fn semiclassical_rate(
    params: &DressingParams,
    gap: Option<f64>,
    alpha: f64,
    prefactor: f64,
    grid: usize,
    units: &UnitSystem,
) -> Result<LossEstimate> {
    let omega_l = top_surface_minimum(params, grid)?.frequency;
    let gap = match gap {
        Some(g) => g,
        None => min_gap(params)?.gap,
    };
    let rate = semiclassical_formula(omega_l, gap, alpha, prefactor)?;
    let depth = params.lattice.depth();
    let scaling_constant = (depth > 0.0 && gap > 0.0).then(|| omega_l / (depth / gap).sqrt());
    Ok(LossEstimate {
        model: LossModel::Semiclassical,
        rate_per_s: units.rate_to_per_s(rate),
        rate,
        gap,
        depth,
        coupling: params.coupling,
        omega_l,
        alpha,
        prefactor,
        velocity: None,
        slope: None,
        nonadiabatic_probability: None,
        regime_ok: gap > 0.0 && omega_l / gap < SEMICLASSICAL_REGIME,
        scaling_constant,
    })
}

/// c (ω_l/2π) Σ_k n(k) e^{−πΔ²/(2·2|k|·E′)}, in E_R/ħ, with the mean
/// nonadiabatic probability.
pub fn fourier_weighted_sum(
    dist: &MomentumDistribution,
    gap: f64,
    slope: f64,
    omega_l: f64,
    attempt_constant: f64,
) -> Result<(f64, f64)> {
    if dist.is_empty() {
        return Err(Error::Empty("momentum distribution".into()));
    }
    if !(slope > 0.0) || !(gap >= 0.0) || !(omega_l >= 0.0) {
        return Err(Error::domain("need E′ > 0, Δ ≥ 0, ω_l ≥ 0"));
    }
    let mut pna = 0.0;
    for (k, &w) in dist.samples.iter().zip(&dist.weights) {
        let v = 2.0 * k[0].hypot(k[1]);
        if v > 0.0 && w > 0.0 {
            pna += w * (-lz_exponent(gap, v, slope)?).exp();
        }
    }
    Ok((attempt_constant * omega_l / (2.0 * PI) * pna, pna))
}

/// Fourier-weighted L-Z over the dephased ground band. Δ is the refined
/// minimum gap of `surfaces`, ω_l the top-surface trap frequency.
pub fn fourier_weighted_lz(
    sol: &BlochSolution,
    surfaces: &AdiabaticSurfaces,
    attempt_constant: f64,
    units: &UnitSystem,
) -> Result<LossEstimate> {
    let params = &surfaces.params;
    let dist = momentum_distribution(sol, MomentumMode::DephasedBand)?;
    let gap = min_gap_on_grid(params, surfaces.n)?.gap;
    let omega_l = top_surface_minimum(params, surfaces.n)?.frequency;
    let slope = crossing_slope(&params.lattice);
    if slope <= 1e-12 * params.lattice.depth().max(1.0) {
        return Err(Error::NoCrossing);
    }
    let (rate, pna) = fourier_weighted_sum(&dist, gap, slope, omega_l, attempt_constant)?;
    Ok(LossEstimate {
        model: LossModel::FourierLz,
        rate_per_s: units.rate_to_per_s(rate),
        rate,
        gap,
        depth: params.lattice.depth(),
        coupling: params.coupling,
        omega_l,
        alpha: 0.0,
        prefactor: attempt_constant,
        velocity: None,
        slope: Some(slope),
        nonadiabatic_probability: Some(pna),
        regime_ok: pna < WEAK_NONADIABATIC,
        scaling_constant: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepAdiabaticity {
    /// 2π(Ω/2)²/(dδ/dt), angular units.
    pub exponent: f64,
    pub p_diabatic: f64,
}

/// Two-level L-Z sweep through resonance. Ω_eff/2π in Hz, sweep in Hz/s.
pub fn sweep_adiabaticity(sweep_rate_hz_per_s: f64, coupling_hz: f64) -> Result<SweepAdiabaticity> {
    if !(sweep_rate_hz_per_s > 0.0) || !(coupling_hz >= 0.0) {
        return Err(Error::domain("need sweep rate > 0 and coupling ≥ 0"));
    }
    let omega = 2.0 * PI * coupling_hz;
    let rate = 2.0 * PI * sweep_rate_hz_per_s;
    let exponent = 2.0 * PI * (0.5 * omega).powi(2) / rate;
    Ok(SweepAdiabaticity {
        exponent,
        p_diabatic: (-exponent).exp(),
    })
}
