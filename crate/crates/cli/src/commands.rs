//! Subcommand bodies. Each returns the artifacts to write.

use std::path::Path;

use serde_json::{json, Value};

use dressed_lattice::bloch::{solve_bands, BandMode};
use dressed_lattice::constants::UnitSystem;
use dressed_lattice::dressing::{
    adiabatic_surfaces, gap_asymptotes, min_gap, rabi_oscillation_frequency, DressingParams,
};
use dressed_lattice::fit::{fit_decay, fit_exponential_law, subtract_background, FitResult, LawSign};
use dressed_lattice::lattice::LatticeModel;
use dressed_lattice::loss::{fourier_weighted_lz, lz_rate, semiclassical_rate, sweep_adiabaticity};
use dressed_lattice::momentum::{momentum_distribution, tof_width};
use dressed_lattice::sweep::{width_vs_frequency, ParameterUncertainty, WidthSweep};
use dressed_lattice::zeeman::breit_rabi;

use crate::config::{FitKind, RunConfig};
use crate::error::CliError;
use crate::output::{flag, num, Artifact, Table};

pub(crate) fn dressing(cfg: &RunConfig, lattice: LatticeModel, rf_hz: f64) -> Result<DressingParams, CliError> {
    let units = cfg.units()?;
    Ok(DressingParams::from_lab(
        lattice,
        cfg.rf()?.coupling_kHz * 1e3,
        rf_hz,
        cfg.field_t(),
        &units,
    )?)
}

pub fn zeeman(cfg: &RunConfig, field_mt: Option<f64>) -> Result<Vec<Artifact>, CliError> {
    let field_t = field_mt.map(|b| b / 1e3).unwrap_or_else(|| cfg.field_t());
    let s = breit_rabi(field_t).map_err(|e| CliError::config("physical.field_mT", e.to_string()))?;
    let mut t = Table::new("zeeman", &["quantity", "F", "mF", "value_MHz"]);
    for l in &s.levels {
        t.push(vec![
            "level".into(),
            l.f.to_string(),
            l.m_f.to_string(),
            num(l.energy_hz / 1e6),
        ]);
    }
    for (name, v) in [
        ("nu_m1_0", s.nu_m1_0_hz),
        ("nu_0_p1", s.nu_0_p1_hz),
        ("delta_prime", s.quadratic_shift_hz),
    ] {
        t.push(vec![name.into(), String::new(), String::new(), num(v / 1e6)]);
    }
    Ok(vec![Artifact::Csv(t)])
}

pub fn surfaces(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let p = dressing(cfg, cfg.lattice()?, cfg.rf_frequency_hz()?)?;
    let s = adiabatic_surfaces(&p, cfg.solver.cell_grid)?;
    let mut t = Table::new(
        "surfaces",
        &[
            "x_invk", "y_invk", "E_low_Er", "E_mid_Er", "E_top_Er", "w_top_m1", "w_top_0", "w_top_p1",
        ],
    );
    for i in 0..s.positions.len() {
        let w = s.top_weights(i);
        t.push(vec![
            num(s.positions[i][0]),
            num(s.positions[i][1]),
            num(s.low[i]),
            num(s.mid[i]),
            num(s.top[i]),
            num(w[0]),
            num(w[1]),
            num(w[2]),
        ]);
    }
    Ok(vec![Artifact::Csv(t)])
}

pub fn gap(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let units = cfg.units()?;
    let lattice = cfg.lattice()?;
    let rf_hz = cfg.rf_frequency_hz()?;
    let p = dressing(cfg, lattice, rf_hz)?;
    let g = min_gap(&p)?;
    let (weak, strong) = match gap_asymptotes(p.coupling, p.quadratic_shift) {
        Ok((a, b)) => (num(units.energy_to_khz(a)), num(units.energy_to_khz(b))),
        Err(_) => (String::new(), String::new()),
    };
    let mut t = Table::new(
        "gap",
        &[
            "U_Er",
            "Omega_kHz",
            "rf_MHz",
            "detuning_kHz",
            "Delta_kHz",
            "x_invk",
            "y_invk",
            "crossing",
            "refinement_levels",
            "weak_coupling_limit_kHz",
            "strong_coupling_limit_kHz",
        ],
    );
    t.push(vec![
        num(p.lattice.depth()),
        num(cfg.rf()?.coupling_kHz),
        num(rf_hz / 1e6),
        num(units.energy_to_khz(p.detuning)),
        num(units.energy_to_khz(g.gap)),
        num(g.position[0]),
        num(g.position[1]),
        flag(g.crossing),
        g.refinement_levels.to_string(),
        weak,
        strong,
    ]);
    Ok(vec![Artifact::Csv(t)])
}

pub fn rabi_cal(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let units = cfg.units()?;
    let rf = cfg.rf()?;
    let couplings = rf
        .coupling_sweep_kHz
        .as_ref()
        .ok_or_else(|| CliError::config("rf.coupling_sweep_kHz", "missing required key"))?;
    let s = breit_rabi(cfg.field_t()).map_err(|e| CliError::config("physical.field_mT", e.to_string()))?;
    let detuning = units.energy_from_hz(cfg.rf_frequency_hz()? - s.nu_m1_0_hz);
    let shift = units.energy_from_hz(s.quadratic_shift_hz);
    let mut t = Table::new("rabi_cal", &["Omega_kHz", "omega_osc_kHz", "amplitude", "tie"]);
    for (i, &om) in couplings.iter().enumerate() {
        if !(om >= 0.0 && om.is_finite()) {
            return Err(CliError::config(
                format!("rf.coupling_sweep_kHz[{i}]"),
                "must be non-negative",
            ));
        }
        let r = rabi_oscillation_frequency(units.energy_from_khz(om), detuning, shift);
        t.push(vec![
            num(om),
            num(units.energy_to_khz(r.frequency)),
            num(r.amplitude),
            flag(r.tie),
        ]);
    }
    Ok(vec![Artifact::Csv(t)])
}

pub fn bands(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let p = dressing(cfg, cfg.lattice()?, cfg.rf_frequency_hz()?)?;
    let sol = solve_bands(&p, &cfg.solver.options())?;
    let nb = cfg.solver.bands.min(sol.energies[0].len());
    let mut columns = vec!["qx_k".to_string(), "qy_k".to_string()];
    columns.extend((1..=nb).map(|b| format!("E_{b}_Er")));
    columns.extend(["ground_band".to_string(), "top_fraction".to_string()]);
    let mut t = Table::with_columns("bands", columns);
    for (qi, q) in sol.qpoints.iter().enumerate() {
        let mut row = vec![num(q[0]), num(q[1])];
        row.extend(sol.energies[qi][..nb].iter().map(|&e| num(e)));
        row.push((sol.band_index[qi] + 1).to_string());
        row.push(num(sol.top_fraction[qi]));
        t.push(row);
    }
    Ok(vec![Artifact::Csv(t)])
}

pub fn momentum(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let units = cfg.units()?;
    let p = dressing(cfg, cfg.lattice()?, cfg.rf_frequency_hz()?)?;
    let sol = solve_bands(&p, &cfg.solver.options())?;
    let dist = momentum_distribution(&sol, cfg.momentum.distribution_mode())?;
    let mut t = Table::new("momentum", &["kx_hbar_k", "ky_hbar_k", "n"]);
    for (k, w) in dist.samples.iter().zip(&dist.weights) {
        t.push(vec![num(k[0]), num(k[1]), num(*w)]);
    }
    let mut out = vec![Artifact::Csv(t)];
    let tof = tof_width(
        &dist,
        cfg.momentum.tof_ms * 1e-3,
        cfg.momentum.initial_size_um * 1e-6,
        &units,
    )?;
    out.push(Artifact::Json {
        name: "momentum_fit".into(),
        value: json!({
            "sigma_hbar_k": tof.sigma_k,
            "tof_radius_um": tof.radius_m * 1e6,
            "amplitude": tof.fit.amplitude,
            "residual_norm": tof.fit.residual_norm,
            "iterations": tof.fit.iterations,
            "converged": tof.fit.converged,
            "points": tof.fit.points,
            "masked_fraction": tof.fit.masked_fraction,
            "identification_fallback": sol.identification_fallback,
        }),
    });
    Ok(out)
}

fn sweep_for(cfg: &RunConfig, mode: BandMode) -> Result<WidthSweep, CliError> {
    let mut s = WidthSweep::new(cfg.lattice()?, cfg.rf()?.coupling_kHz * 1e3, cfg.field_t());
    s.solver = cfg.solver.options();
    s.solver.mode = mode;
    s.mode = cfg.momentum.distribution_mode();
    s.uncertainty = ParameterUncertainty {
        field_t: cfg.momentum.field_uncertainty_uT * 1e-6,
        depth: cfg.momentum.depth_uncertainty_Er,
    };
    Ok(s)
}

pub fn width_sweep(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let units = cfg.units()?;
    let rf = cfg.rf_sweep_hz()?;
    let sweep = sweep_for(cfg, cfg.solver.options().mode)?;
    let points = width_vs_frequency(&sweep, &rf, &units)?;
    let mut t = Table::new(
        "width_sweep",
        &[
            "rf_MHz",
            "detuning_kHz",
            "width_hbar_k",
            "width_lo",
            "width_hi",
            "top_fraction_min",
            "fallback",
        ],
    );
    for p in points {
        t.push(vec![
            num(p.rf_hz / 1e6),
            num(p.detuning_hz / 1e3),
            num(p.width),
            num(p.width_lo),
            num(p.width_hi),
            num(p.top_fraction_min),
            flag(p.identification_fallback),
        ]);
    }
    Ok(vec![Artifact::Csv(t)])
}

/// One row of loss-model estimates.
struct LossRow {
    depth: f64,
    rf_hz: f64,
    gap_khz: f64,
    lz: f64,
    fourier: f64,
    semiclassical: f64,
    omega_l_khz: f64,
    flags: Vec<&'static str>,
}

fn loss_row(cfg: &RunConfig, units: &UnitSystem, lattice: LatticeModel, rf_hz: f64) -> Result<LossRow, CliError> {
    let p = dressing(cfg, lattice, rf_hz)?;
    let gap = min_gap(&p)?.gap;
    let lz = lz_rate(&p.lattice, gap, cfg.loss.attempt_constant, units)?;
    let sc = semiclassical_rate(
        &p,
        Some(gap),
        cfg.loss.alpha,
        cfg.loss.prefactor,
        cfg.solver.cell_grid,
        units,
    )?;
    let surfaces = adiabatic_surfaces(&p, cfg.solver.cell_grid)?;
    let sol = solve_bands(&p, &cfg.solver.options())?;
    let fl = fourier_weighted_lz(&sol, &surfaces, cfg.loss.attempt_constant, units)?;
    let mut flags = Vec::new();
    if lz.regime_ok {
        flags.push("lz-weak");
    }
    if fl.regime_ok {
        flags.push("fourier-lz-weak");
    }
    if sc.regime_ok {
        flags.push("semiclassical-regime");
    }
    if sol.identification_fallback {
        flags.push("band-fallback");
    }
    Ok(LossRow {
        depth: p.lattice.depth(),
        rf_hz,
        gap_khz: units.energy_to_khz(gap),
        lz: lz.rate_per_s,
        fourier: fl.rate_per_s,
        semiclassical: sc.rate_per_s,
        omega_l_khz: units.energy_to_khz(sc.omega_l),
        flags,
    })
}

fn loss_table(name: &str, cfg: &RunConfig, rows: &[LossRow]) -> Result<Table, CliError> {
    let sweep = match cfg.rf()?.sweep_rate_kHz_per_ms {
        Some(r) => {
            let s = sweep_adiabaticity(r * 1e6, cfg.rf()?.coupling_kHz * 1e3)
                .map_err(|e| CliError::config("rf.sweep_rate_kHz_per_ms", e.to_string()))?;
            Some(s.p_diabatic)
        }
        None => None,
    };
    let mut t = Table::new(
        name,
        &[
            "U_Er",
            "Omega_kHz",
            "rf_MHz",
            "Delta_kHz",
            "gamma_lz",
            "gamma_fourier_lz",
            "gamma_semiclassical",
            "omega_l_kHz",
            "p_sweep_diabatic",
            "flags",
        ],
    );
    for r in rows {
        let mut flags = r.flags.clone();
        if sweep.is_some_and(|p| p < 1e-6) {
            flags.push("sweep-adiabatic");
        }
        t.push(vec![
            num(r.depth),
            num(cfg.rf()?.coupling_kHz),
            num(r.rf_hz / 1e6),
            num(r.gap_khz),
            num(r.lz),
            num(r.fourier),
            num(r.semiclassical),
            num(r.omega_l_khz),
            sweep.map(num).unwrap_or_default(),
            flags.join(";"),
        ]);
    }
    Ok(t)
}

fn depth_list(cfg: &RunConfig, lattice: &LatticeModel, fallback: &[f64]) -> Result<Vec<LatticeModel>, CliError> {
    let depths: Vec<f64> = if !cfg.loss.depths_Er.is_empty() {
        cfg.loss.depths_Er.clone()
    } else if !fallback.is_empty() {
        fallback.to_vec()
    } else {
        vec![lattice.depth()]
    };
    let base = lattice.depth();
    depths
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if !(d > 0.0 && base > 0.0) {
                return Err(CliError::config(
                    format!("loss.depths_Er[{i}]"),
                    "depths must be positive",
                ));
            }
            Ok(lattice.scaled(d / base))
        })
        .collect()
}

pub fn loss(cfg: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let units = cfg.units()?;
    let lattice = cfg.lattice()?;
    let rf_hz = cfg.rf_frequency_hz()?;
    let rows = depth_list(cfg, &lattice, &[])?
        .into_iter()
        .map(|l| loss_row(cfg, &units, l, rf_hz))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(vec![Artifact::Csv(loss_table("loss", cfg, &rows)?)])
}

type Columns = (Vec<f64>, Vec<f64>, Option<Vec<f64>>);

fn read_xy(path: &Path) -> Result<Columns, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let (mut x, mut y, mut s) = (Vec::new(), Vec::new(), Vec::new());
    let mut width = None;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::config("fit.input", e.to_string()))?;
        let fields: Result<Vec<f64>, _> = rec.iter().map(|f| f.parse::<f64>()).collect();
        let Ok(fields) = fields else {
            if i == 0 {
                // column names
                continue;
            }
            return Err(CliError::config(
                "fit.input",
                format!("record {}: non-numeric field", i + 1),
            ));
        };
        if !(2..=3).contains(&fields.len()) || width.is_some_and(|w| w != fields.len()) {
            return Err(CliError::config(
                "fit.input",
                format!("record {}: expected a consistent x, y[, sigma] layout", i + 1),
            ));
        }
        width = Some(fields.len());
        x.push(fields[0]);
        y.push(fields[1]);
        if fields.len() == 3 {
            s.push(fields[2]);
        }
    }
    let sigma = (width == Some(3)).then_some(s);
    Ok((x, y, sigma))
}

fn fit_document(f: &FitResult) -> Value {
    let names = f.names();
    json!({
        "model": f.model,
        "parameters": { names[0]: f.parameters[0], names[1]: f.parameters[1] },
        "uncertainties": { names[0]: f.uncertainties[0], names[1]: f.uncertainties[1] },
        "residual_norm": f.residual_norm,
        "iterations": f.iterations,
        "converged": f.converged,
        "exactly_determined": f.exactly_determined,
        "degenerate": f.degenerate,
    })
}

pub fn fit(cfg: &RunConfig, input_override: Option<&Path>) -> Result<Vec<Artifact>, CliError> {
    let fc = cfg.fit()?;
    let path = input_override
        .map(Path::to_path_buf)
        .unwrap_or_else(|| fc.input.clone().into());
    let (x, mut y, sigma) = read_xy(&path)?;
    let mut background = Vec::new();
    if fc.subtract_background {
        for (xi, yi) in x.iter().zip(y.iter_mut()) {
            let c = subtract_background(*yi, *xi).map_err(|e| CliError::config("fit.input", e.to_string()))?;
            background.push(json!({ "subtracted": c.subtracted, "floored": c.floored }));
            *yi = c.rate;
        }
    }
    let data_err = |e: dressed_lattice::Error| match e {
        dressed_lattice::Error::Domain(m) | dressed_lattice::Error::Empty(m) => CliError::config("fit.input", m),
        other => other.into(),
    };
    let result = match fc.model {
        FitKind::Decay => {
            if sigma.is_some() {
                return Err(CliError::config("fit.input", "the decay model takes x, y only"));
            }
            fit_decay(&x, &y).map_err(data_err)?
        }
        FitKind::ExponentialDecay => fit_exponential_law(&x, &y, sigma.as_deref(), LawSign::Decay).map_err(data_err)?,
        FitKind::ExponentialGrowth => {
            fit_exponential_law(&x, &y, sigma.as_deref(), LawSign::Growth).map_err(data_err)?
        }
    };
    let mut doc = fit_document(&result);
    doc["points"] = json!(x.len());
    if fc.subtract_background {
        doc["background"] = Value::Array(background);
    }
    Ok(vec![Artifact::Json {
        name: "fit".into(),
        value: doc,
    }])
}

pub(crate) fn loss_rows_over_rf(cfg: &RunConfig, rf: &[f64]) -> Result<Table, CliError> {
    let units = cfg.units()?;
    let lattice = cfg.lattice()?;
    let rows = rf
        .iter()
        .map(|&f| loss_row(cfg, &units, lattice.clone(), f))
        .collect::<Result<Vec<_>, _>>()?;
    loss_table("figure3_theory", cfg, &rows)
}

pub(crate) fn loss_rows_over_depth(cfg: &RunConfig) -> Result<Table, CliError> {
    let units = cfg.units()?;
    let lattice = cfg.lattice()?;
    let rf_hz = cfg.rf_frequency_hz()?;
    let rows = depth_list(cfg, &lattice, &cfg.figure.depth_points_Er)?
        .into_iter()
        .map(|l| loss_row(cfg, &units, l, rf_hz))
        .collect::<Result<Vec<_>, _>>()?;
    loss_table("figure4_theory", cfg, &rows)
}

pub(crate) fn fit_json(f: &FitResult) -> Value {
    fit_document(f)
}

pub(crate) fn width_sweep_for(cfg: &RunConfig, mode: BandMode) -> Result<WidthSweep, CliError> {
    sweep_for(cfg, mode)
}
