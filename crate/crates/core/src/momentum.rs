//! Momentum distributions of the ground band and time-of-flight widths.
//!
//! Momenta are in units of ħk. The dephased-band distribution is the
//! incoherent q-average of |c_{q,s,G}|² placed at k = q + G. The Wannier
//! distribution is |Σ_q c̃_q(s,G)/N_q|² at k = G, where each c̃_q is phased
//! so the dominant spin component of ψ_q is real and positive at the site.

use num_complex::Complex64;
use serde::Serialize;

use crate::bloch::BlochSolution;
use crate::constants::UnitSystem;
use crate::error::{Error, Result};
use crate::fit::levenberg_marquardt;

/// Samples with |k| at or beyond this radius (ħk) are excluded from the
/// central Gaussian fit.
pub const SATELLITE_MASK: f64 = 1.5;
/// Largest fraction of the weight the mask may remove.
pub const MAX_MASKED_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentumMode {
    Wannier,
    DephasedBand,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentumDistribution {
    pub mode: MomentumMode,
    pub samples: Vec<[f64; 2]>,
    /// Non-negative, summing to 1.
    pub weights: Vec<f64>,
}

impl MomentumDistribution {
    /// Normalizes `weights` to unit sum.
    pub fn new(mode: MomentumMode, samples: Vec<[f64; 2]>, weights: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::Empty("momentum distribution".into()));
        }
        if samples.len() != weights.len() {
            return Err(Error::domain(format!(
                "{} samples but {} weights",
                samples.len(),
                weights.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::domain("weights must be finite and non-negative"));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::domain("distribution carries no weight"));
        }
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self { mode, samples, weights })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Weight inside |k| < radius.
    pub fn weight_within(&self, radius: f64) -> f64 {
        self.samples
            .iter()
            .zip(&self.weights)
            .filter(|(k, _)| k[0].hypot(k[1]) < radius)
            .map(|(_, w)| w)
            .sum()
    }
}

pub fn momentum_distribution(sol: &BlochSolution, mode: MomentumMode) -> Result<MomentumDistribution> {
    let nq = sol.qpoints.len();
    if nq == 0 || sol.coefficients.is_empty() {
        return Err(Error::Empty("Bloch solution".into()));
    }
    let ng = sol.basis.len();
    match mode {
        MomentumMode::DephasedBand => {
            let mut samples = Vec::with_capacity(nq * ng);
            let mut weights = Vec::with_capacity(nq * ng);
            for (q, c) in sol.qpoints.iter().zip(&sol.coefficients) {
                for g in 0..ng {
                    let gv = sol.g_vector(g);
                    samples.push([q[0] + gv[0], q[1] + gv[1]]);
                    weights.push((0..sol.spins).map(|s| c[s * ng + g].norm_sqr()).sum::<f64>() / nq as f64);
                }
            }
            MomentumDistribution::new(mode, samples, weights)
        }
        MomentumMode::Wannier => {
            let mut field = vec![Complex64::new(0.0, 0.0); sol.spins * ng];
            for c in &sol.coefficients {
                let phase = site_phase(c, sol.spins, ng);
                for (f, x) in field.iter_mut().zip(c) {
                    *f += x * phase / nq as f64;
                }
            }
            let samples = (0..ng).map(|g| sol.g_vector(g)).collect();
            let weights = (0..ng)
                .map(|g| (0..sol.spins).map(|s| field[s * ng + g].norm_sqr()).sum())
                .collect();
            MomentumDistribution::new(mode, samples, weights)
        }
    }
}

/// Unit phase making the dominant spin component of Σ_G c_{s,G} (the
/// periodic part at the cell origin) real and positive. Falls back to the
/// largest single coefficient when that amplitude vanishes.
fn site_phase(c: &[Complex64], spins: usize, ng: usize) -> Complex64 {
    let amp = (0..spins)
        .map(|s| c[s * ng..(s + 1) * ng].iter().sum::<Complex64>())
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
        .unwrap_or_default();
    let total: f64 = c.iter().map(|x| x.norm()).sum();
    let reference = if amp.norm() > 1e-8 * total {
        amp
    } else {
        c.iter()
            .cloned()
            .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
            .unwrap_or_default()
    };
    if reference.norm() == 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        reference.conj() / reference.norm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianFit {
    pub amplitude: f64,
    /// 1/e radius of n(k) = A e^{−|k|²/σ²} (ħk).
    pub sigma: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub points: usize,
    pub masked_fraction: f64,
}

/// Isotropic Gaussian fitted to the samples with |k| < 1.5 ħk.
pub fn fit_central_gaussian(dist: &MomentumDistribution) -> Result<GaussianFit> {
    let (k2, n): (Vec<f64>, Vec<f64>) = dist
        .samples
        .iter()
        .zip(&dist.weights)
        .filter(|(k, _)| k[0].hypot(k[1]) < SATELLITE_MASK)
        .map(|(k, &w)| (k[0] * k[0] + k[1] * k[1], w))
        .unzip();
    let inside: f64 = n.iter().sum();
    let masked_fraction = 1.0 - inside / dist.total();
    if masked_fraction > MAX_MASKED_FRACTION {
        return Err(Error::Fit(format!(
            "satellite mask removes {:.1}% of the weight",
            100.0 * masked_fraction
        )));
    }
    if n.len() < 3 {
        return Err(Error::Fit(format!("only {} samples inside the central mask", n.len())));
    }
    // second moment of A e^{−k²/σ²} in 2D: ⟨k²⟩ = σ²
    let s0 = (k2.iter().zip(&n).map(|(k, w)| k * w).sum::<f64>() / inside)
        .max(1e-6)
        .sqrt();
    let peak = n.iter().cloned().fold(0.0, f64::max);
    let m = n.len();
    let out = levenberg_marquardt([1.0, s0], m, |p, r, j| {
        for i in 0..m {
            let e = (-k2[i] / (p[1] * p[1])).exp();
            r[i] = p[0] * e - n[i] / peak;
            j[i] = [e, p[0] * e * 2.0 * k2[i] / p[1].powi(3)];
        }
    });
    let sigma = out.params[1].abs();
    if !(sigma > 0.0 && sigma.is_finite() && out.params[0] > 0.0) {
        return Err(Error::Fit(format!("non-positive fitted width {}", out.params[1])));
    }
    Ok(GaussianFit {
        amplitude: out.params[0] * peak,
        sigma,
        residual_norm: out.residuals.iter().map(|x| x * x).sum::<f64>().sqrt() * peak,
        iterations: out.iterations,
        converged: out.converged,
        points: m,
        masked_fraction,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TofWidth {
    /// Momentum 1/e radius (ħk).
    pub sigma_k: f64,
    /// Cloud 1/e radius after flight (m), initial size added in quadrature.
    pub radius_m: f64,
    pub fit: GaussianFit,
}

/// Ballistic radius d = √((σ_k ħk t/M)² + d₀²).
pub fn tof_radius(sigma_k: f64, t_tof_s: f64, initial_size_m: f64, units: &UnitSystem) -> Result<f64> {
    if !(t_tof_s > 0.0) || !(initial_size_m >= 0.0) || !(sigma_k >= 0.0) {
        return Err(Error::domain("need σ_k ≥ 0, t_tof > 0 and initial size ≥ 0"));
    }
    Ok((sigma_k * units.recoil_velocity() * t_tof_s).hypot(initial_size_m))
}

/// Inverse of [`tof_radius`]: σ_k from a measured radius.
pub fn momentum_width_from_radius(radius_m: f64, t_tof_s: f64, initial_size_m: f64, units: &UnitSystem) -> Result<f64> {
    if !(t_tof_s > 0.0) || !(initial_size_m >= 0.0) || !(radius_m >= initial_size_m) {
        return Err(Error::domain("need t_tof > 0 and radius ≥ initial size ≥ 0"));
    }
    let ballistic = (radius_m * radius_m - initial_size_m * initial_size_m).sqrt();
    Ok(ballistic / (units.recoil_velocity() * t_tof_s))
}

pub fn tof_width(
    dist: &MomentumDistribution,
    t_tof_s: f64,
    initial_size_m: f64,
    units: &UnitSystem,
) -> Result<TofWidth> {
    let fit = fit_central_gaussian(dist)?;
    let radius_m = tof_radius(fit.sigma, t_tof_s, initial_size_m, units)?;
    Ok(TofWidth {
        sigma_k: fit.sigma,
        radius_m,
        fit,
    })
}
