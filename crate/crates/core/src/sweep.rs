//! Central momentum width of the ground band as a function of rf frequency.

use serde::Serialize;

use crate::bloch::{solve_bands, SolverOptions};
use crate::constants::UnitSystem;
use crate::dressing::DressingParams;
use crate::error::{Error, Result};
use crate::lattice::LatticeModel;
use crate::momentum::{fit_central_gaussian, momentum_distribution, MomentumMode};
use crate::zeeman::detuning_hz;

/// 1σ input uncertainties propagated into the width envelope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParameterUncertainty {
    pub field_t: f64,
    pub depth: f64,
}

impl ParameterUncertainty {
    pub const NONE: Self = Self {
        field_t: 0.0,
        depth: 0.0,
    };
    /// ±3 μT on the bias field, ±0.5 E_R on the depth.
    pub const TYPICAL: Self = Self {
        field_t: 3e-6,
        depth: 0.5,
    };

    fn is_zero(&self) -> bool {
        self.field_t == 0.0 && self.depth == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WidthSweep {
    pub lattice: LatticeModel,
    pub coupling_hz: f64,
    pub field_t: f64,
    pub solver: SolverOptions,
    pub mode: MomentumMode,
    pub uncertainty: ParameterUncertainty,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WidthPoint {
    pub rf_hz: f64,
    pub detuning_hz: f64,
    /// 1/e momentum radius (ħk).
    pub width: f64,
    pub width_lo: f64,
    pub width_hi: f64,
    pub top_fraction_min: f64,
    pub identification_fallback: bool,
}

impl WidthSweep {
    pub fn new(lattice: LatticeModel, coupling_hz: f64, field_t: f64) -> Self {
        Self {
            lattice,
            coupling_hz,
            field_t,
            solver: SolverOptions::default(),
            mode: MomentumMode::DephasedBand,
            uncertainty: ParameterUncertainty::NONE,
        }
    }

    fn width(&self, lattice: &LatticeModel, rf_hz: f64, field_t: f64, units: &UnitSystem) -> Result<(f64, f64, bool)> {
        let params = DressingParams::from_lab(lattice.clone(), self.coupling_hz, rf_hz, field_t, units)?;
        let sol = solve_bands(&params, &self.solver)?;
        let dist = momentum_distribution(&sol, self.mode)?;
        let fit = fit_central_gaussian(&dist)?;
        let fmin = sol.top_fraction.iter().cloned().fold(f64::INFINITY, f64::min);
        Ok((fit.sigma, fmin, sol.identification_fallback))
    }

    /// Nominal width plus the range over single-parameter ±1σ shifts.
    pub fn point(&self, rf_hz: f64, units: &UnitSystem) -> Result<WidthPoint> {
        let (width, top_fraction_min, identification_fallback) =
            self.width(&self.lattice, rf_hz, self.field_t, units)?;
        let (mut lo, mut hi) = (width, width);
        if !self.uncertainty.is_zero() {
            let mut variants = Vec::new();
            let db = self.uncertainty.field_t;
            if db > 0.0 {
                variants.push((self.lattice.clone(), self.field_t - db));
                variants.push((self.lattice.clone(), self.field_t + db));
            }
            let du = self.uncertainty.depth;
            if du > 0.0 {
                let u = self.lattice.depth();
                if !(u > du) {
                    return Err(Error::domain(format!("depth uncertainty {du} not below depth {u}")));
                }
                variants.push((self.lattice.scaled((u - du) / u), self.field_t));
                variants.push((self.lattice.scaled((u + du) / u), self.field_t));
            }
            for (lattice, field) in variants {
                let (w, _, _) = self.width(&lattice, rf_hz, field, units)?;
                lo = lo.min(w);
                hi = hi.max(w);
            }
        }
        Ok(WidthPoint {
            rf_hz,
            detuning_hz: detuning_hz(rf_hz, self.field_t)?,
            width,
            width_lo: lo,
            width_hi: hi,
            top_fraction_min,
            identification_fallback,
        })
    }
}

/// One [`WidthPoint`] per rf frequency, in input order.
pub fn width_vs_frequency(sweep: &WidthSweep, rf_hz: &[f64], units: &UnitSystem) -> Result<Vec<WidthPoint>> {
    if rf_hz.is_empty() {
        return Err(Error::Empty("rf frequency list".into()));
    }
    rf_hz.iter().map(|&f| sweep.point(f, units)).collect()
}
