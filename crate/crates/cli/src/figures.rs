//! Composite pipelines: theory curves plus synthetic-law fit overlays.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde_json::json;

use dressed_lattice::bloch::BandMode;
use dressed_lattice::fit::{fit_exponential_law, spin_flip_rate, subtract_background, LawSign};
use dressed_lattice::momentum::tof_radius;
use dressed_lattice::sweep::width_vs_frequency;
use dressed_lattice::zeeman::breit_rabi;

use crate::commands::{fit_json, loss_rows_over_depth, loss_rows_over_rf, width_sweep_for};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{flag, num, Artifact, Table};

/// Final rf frequencies of the width figure (MHz).
pub const WIDTH_FIGURE_RF_MHZ: [f64; 7] = [35.80, 35.825, 35.85, 35.875, 35.90, 35.925, 35.95];
/// Detuning of the effectively bare reference (Hz).
pub const FAR_DETUNING_HZ: f64 = -1e6;

fn rf_list(cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    match cfg.rf()?.sweep_MHz {
        Some(_) => cfg.rf_sweep_hz(),
        None => Ok(WIDTH_FIGURE_RF_MHZ.iter().map(|f| f * 1e6).collect()),
    }
}

/// Multiplicative Gaussian scatter; redraws keep every rate positive.
fn scatter(rng: &mut ChaCha8Rng, values: &[f64], fraction: f64) -> Vec<f64> {
    let noise = Normal::new(0.0, 1.0).expect("unit normal");
    values
        .iter()
        .map(|&v| loop {
            let f = 1.0 + fraction * noise.sample(rng);
            if f > 0.0 {
                break v * f;
            }
        })
        .collect()
}

pub fn figure(cfg: &RunConfig, which: u8, seed: u64) -> Result<Vec<Artifact>, CliError> {
    match which {
        2 => figure2(cfg),
        3 => figure3(cfg, seed),
        4 => figure4(cfg, seed),
        _ => Err(CliError::config(
            "figure",
            format!("no pipeline for figure {which} (expected 2, 3 or 4)"),
        )),
    }
}

fn figure2(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let units = cfg.units()?;
    let spectrum = breit_rabi(cfg.field_t()).map_err(|e| CliError::config("physical.field_mT", e.to_string()))?;
    let far = spectrum.nu_m1_0_hz + FAR_DETUNING_HZ;
    let mut rf = vec![far];
    rf.extend(rf_list(cfg)?);
    let tof = cfg.momentum.tof_ms * 1e-3;
    let d0 = cfg.momentum.initial_size_um * 1e-6;
    let mut t = Table::new(
        "figure2",
        &[
            "mode",
            "rf_MHz",
            "detuning_kHz",
            "reference",
            "width_hbar_k",
            "width_lo",
            "width_hi",
            "radius_um",
        ],
    );
    let mut summary = serde_json::Map::new();
    for (mode, tag) in [
        (BandMode::Spinor, "spinor"),
        (BandMode::SingleSurface, "single-surface"),
    ] {
        let points = width_vs_frequency(&width_sweep_for(cfg, mode)?, &rf, &units)?;
        for (i, p) in points.iter().enumerate() {
            t.push(vec![
                tag.into(),
                num(p.rf_hz / 1e6),
                num(p.detuning_hz / 1e3),
                flag(i == 0),
                num(p.width),
                num(p.width_lo),
                num(p.width_hi),
                num(tof_radius(p.width, tof, d0, &units)? * 1e6),
            ]);
        }
        let dressed = &points[1..];
        let narrowest = dressed.iter().map(|p| p.width).fold(f64::INFINITY, f64::min);
        summary.insert(
            tag.into(),
            json!({
                "far_detuned_width": points[0].width,
                "narrowest_dressed_width": narrowest,
                "narrowing": narrowest < points[0].width,
                "monotone_decreasing": dressed.windows(2).all(|w| w[1].width < w[0].width),
            }),
        );
    }
    Ok(vec![
        Artifact::Csv(t),
        Artifact::Json {
            name: "figure2_summary".into(),
            value: serde_json::Value::Object(summary),
        },
    ])
}

fn figure3(cfg: &RunConfig, seed: u64) -> Result<Vec<Artifact>, CliError> {
    let theory = loss_rows_over_rf(cfg, &rf_list(cfg)?)?;
    let f = &cfg.figure;
    if f.gap_points_kHz.len() < 3 {
        return Err(CliError::config("figure.gap_points_kHz", "need at least 3 points"));
    }
    // γ(Δ) = A e^{−BΔ/2π}; B in μs, Δ/2π in kHz
    let b_per_khz = f.gap_law_B_us * 1e-3;
    let truth: Vec<f64> = f
        .gap_points_kHz
        .iter()
        .map(|x| f.gap_law_A_per_s * (-b_per_khz * x).exp())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let synthetic = scatter(&mut rng, &truth, f.noise_fraction);
    let fit = fit_exponential_law(&f.gap_points_kHz, &synthetic, None, LawSign::Decay)?;
    let mut t = Table::new(
        "figure3_synthetic",
        &["Delta_kHz", "gamma_law", "gamma_synthetic", "gamma_fit"],
    );
    for (i, &x) in f.gap_points_kHz.iter().enumerate() {
        let fitted = fit.parameters[0] * (-fit.parameters[1] * x).exp();
        t.push(vec![num(x), num(truth[i]), num(synthetic[i]), num(fitted)]);
    }
    let doc = json!({
        "generator": { "A_per_s": f.gap_law_A_per_s, "B_us": f.gap_law_B_us, "noise_fraction": f.noise_fraction },
        "recovered": { "A_per_s": fit.parameters[0], "B_us": fit.parameters[1] * 1e3,
                       "sigma_A_per_s": fit.uncertainties[0], "sigma_B_us": fit.uncertainties[1] * 1e3 },
        "fit": fit_json(&fit),
    });
    Ok(vec![
        Artifact::Csv(theory),
        Artifact::Csv(t),
        Artifact::Json {
            name: "figure3_fit".into(),
            value: doc,
        },
    ])
}

fn figure4(cfg: &RunConfig, seed: u64) -> Result<Vec<Artifact>, CliError> {
    let theory = loss_rows_over_depth(cfg)?;
    let f = &cfg.figure;
    if f.depth_points_Er.len() < 3 {
        return Err(CliError::config("figure.depth_points_Er", "need at least 3 points"));
    }
    let truth: Vec<f64> = f
        .depth_points_Er
        .iter()
        .map(|u| f.depth_law_C_per_s * (f.depth_law_D_per_Er * u).exp())
        .collect();
    let measured_clean: Vec<f64> = truth
        .iter()
        .zip(&f.depth_points_Er)
        .map(|(g, &u)| g + spin_flip_rate(u))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let measured = scatter(&mut rng, &measured_clean, f.noise_fraction);
    let mut corrected = Vec::with_capacity(measured.len());
    let mut t = Table::new(
        "figure4_synthetic",
        &[
            "U_Er",
            "gamma_law",
            "gamma_measured",
            "background",
            "gamma_corrected",
            "floored",
            "gamma_fit",
        ],
    );
    let mut rows = Vec::new();
    for (i, &u) in f.depth_points_Er.iter().enumerate() {
        let c = subtract_background(measured[i], u)
            .map_err(|e| CliError::config("figure.depth_points_Er", e.to_string()))?;
        corrected.push(c.rate);
        rows.push((u, truth[i], measured[i], c));
    }
    let fit = fit_exponential_law(&f.depth_points_Er, &corrected, None, LawSign::Growth)?;
    for (u, g, m, c) in rows {
        let fitted = fit.parameters[0] * (fit.parameters[1] * u).exp();
        t.push(vec![
            num(u),
            num(g),
            num(m),
            num(c.subtracted),
            num(c.rate),
            flag(c.floored),
            num(fitted),
        ]);
    }
    let doc = json!({
        "generator": { "C_per_s": f.depth_law_C_per_s, "D_per_Er": f.depth_law_D_per_Er, "noise_fraction": f.noise_fraction },
        "recovered": { "C_per_s": fit.parameters[0], "D_per_Er": fit.parameters[1],
                       "sigma_C_per_s": fit.uncertainties[0], "sigma_D_per_Er": fit.uncertainties[1] },
        "fit": fit_json(&fit),
    });
    Ok(vec![
        Artifact::Csv(theory),
        Artifact::Csv(t),
        Artifact::Json {
            name: "figure4_fit".into(),
            value: doc,
        },
    ])
}
