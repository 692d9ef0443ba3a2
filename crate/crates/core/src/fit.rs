//! Exponential decay fits, rate laws and spin-flip background subtraction.

use serde::Serialize;

use crate::dressing::solve_dense;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;
/// Relative parameter step at which Levenberg–Marquardt stops.
pub const STEP_TOL: f64 = 1e-8;
/// Cap on reweighting rounds in [`fit_decay`].
pub const MAX_REWEIGHTS: usize = 30;
/// Spin-flip lifetime measured at the reference depth (s).
pub const SPIN_FLIP_LIFETIME_S: f64 = 0.085;
/// Depth at which the spin-flip lifetime was measured (E_R).
pub const SPIN_FLIP_REFERENCE_DEPTH: f64 = 55.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitModel {
    /// N(t) = N₀ e^{−γt}; parameters (N₀, γ).
    Decay,
    /// γ(x) = A e^{−Bx}; parameters (A, B).
    ExponentialDecay,
    /// γ(x) = C e^{Dx}; parameters (C, D).
    ExponentialGrowth,
}

impl FitModel {
    pub fn parameter_names(self) -> [&'static str; 2] {
        match self {
            FitModel::Decay => ["N0", "gamma"],
            FitModel::ExponentialDecay => ["A", "B"],
            FitModel::ExponentialGrowth => ["C", "D"],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawSign {
    Decay,
    Growth,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: FitModel,
    pub parameters: [f64; 2],
    /// 1σ, from the residual covariance.
    pub uncertainties: [f64; 2],
    /// √(Σ r²) in the fitted domain (relative for decays, log for rate laws).
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// As many points as parameters: uncertainties are reported as 0.
    pub exactly_determined: bool,
    /// Data carry no decay information (constant N).
    pub degenerate: bool,
}

impl FitResult {
    pub fn names(&self) -> [&'static str; 2] {
        self.model.parameter_names()
    }
}

pub(crate) struct LmOutcome<const N: usize> {
    pub params: [f64; N],
    pub residuals: Vec<f64>,
    pub normal: [[f64; N]; N],
    pub iterations: usize,
    pub converged: bool,
}

/// Damped Gauss–Newton. `model(p, r, j)` fills residuals and Jacobian rows.
pub(crate) fn levenberg_marquardt<const N: usize>(
    p0: [f64; N],
    m: usize,
    model: impl Fn(&[f64; N], &mut [f64], &mut [[f64; N]]),
) -> LmOutcome<N> {
    let mut p = p0;
    let mut r = vec![0.0; m];
    let mut j = vec![[0.0; N]; m];
    let (mut rt, mut jt) = (vec![0.0; m], vec![[0.0; N]; m]);
    let cost = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();
    model(&p, &mut r, &mut j);
    let mut c = cost(&r);
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (a, g) = normal_equations(&r, &j);
        if c == 0.0 {
            converged = true;
            break;
        }
        let mut accepted = false;
        while lambda < 1e16 {
            let mut damped = a;
            for (i, row) in damped.iter_mut().enumerate() {
                row[i] += lambda * a[i][i].max(1e-300);
            }
            let Some(step) = solve_dense(damped, g.map(|x| -x)) else {
                lambda *= 10.0;
                continue;
            };
            let mut trial = p;
            for i in 0..N {
                trial[i] += step[i];
            }
            model(&trial, &mut rt, &mut jt);
            let ct = cost(&rt);
            if ct.is_finite() && ct <= c {
                let small = (0..N).all(|i| step[i].abs() <= STEP_TOL * (trial[i].abs() + STEP_TOL));
                p = trial;
                std::mem::swap(&mut r, &mut rt);
                std::mem::swap(&mut j, &mut jt);
                c = ct;
                lambda = (lambda * 0.1).max(1e-12);
                accepted = true;
                converged = small;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // no downhill step left: stationary to working precision
            converged = true;
        }
        if converged {
            break;
        }
    }
    let (normal, _) = normal_equations(&r, &j);
    LmOutcome {
        params: p,
        residuals: r,
        normal,
        iterations,
        converged,
    }
}

fn normal_equations<const N: usize>(r: &[f64], j: &[[f64; N]]) -> ([[f64; N]; N], [f64; N]) {
    let mut a = [[0.0; N]; N];
    let mut g = [0.0; N];
    for (ri, ji) in r.iter().zip(j) {
        for p in 0..N {
            g[p] += ji[p] * ri;
            for q in 0..N {
                a[p][q] += ji[p] * ji[q];
            }
        }
    }
    (a, g)
}

/// Diagonal of (JᵀJ)⁻¹ scaled by s².
fn sigma_from_normal(normal: [[f64; 2]; 2], s2: f64) -> [f64; 2] {
    let det = normal[0][0] * normal[1][1] - normal[0][1] * normal[1][0];
    if det <= 0.0 || !det.is_finite() {
        return [f64::NAN; 2];
    }
    [(s2 * normal[1][1] / det).sqrt(), (s2 * normal[0][0] / det).sqrt()]
}

fn check_series(x: &[f64], y: &[f64], min_points: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::domain(format!("{} abscissae but {} values", x.len(), y.len())));
    }
    if x.len() < min_points {
        return Err(Error::domain(format!(
            "need at least {min_points} points, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::domain("non-finite data"));
    }
    if let Some(i) = y.iter().position(|&v| v <= 0.0) {
        return Err(Error::domain(format!("value {i} is not positive ({})", y[i])));
    }
    Ok(())
}

/// Least-squares N(t) = N₀e^{−γt} with constant relative error: residuals
/// are weighted by 1/N(t), iterated to a fixed point, starting from a
/// log-linear regression. Two points determine the fit exactly.
pub fn fit_decay(times: &[f64], numbers: &[f64]) -> Result<FitResult> {
    check_series(times, numbers, 2)?;
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("times must be strictly increasing"));
    }
    let m = times.len();
    let scale = numbers.iter().cloned().fold(0.0, f64::max);
    if numbers.iter().all(|&n| n == numbers[0]) {
        return Ok(FitResult {
            model: FitModel::Decay,
            parameters: [numbers[0], 0.0],
            uncertainties: [0.0; 2],
            residual_norm: 0.0,
            iterations: 0,
            converged: true,
            exactly_determined: m == 2,
            degenerate: true,
        });
    }
    let logs: Vec<f64> = numbers.iter().map(|n| (n / scale).ln()).collect();
    let (intercept, slope, _) = line_fit(times, &logs, None);
    let mut p = [intercept.exp(), -slope];
    let mut iterations = 0;
    let mut out;
    let mut reweights = 0;
    loop {
        let w: Vec<f64> = times.iter().map(|t| 1.0 / (p[0] * (-p[1] * t).exp())).collect();
        out = levenberg_marquardt(p, m, |p, r, j| {
            for i in 0..m {
                let e = (-p[1] * times[i]).exp();
                r[i] = w[i] * (p[0] * e - numbers[i] / scale);
                j[i] = [w[i] * e, -w[i] * p[0] * times[i] * e];
            }
        });
        iterations += out.iterations;
        reweights += 1;
        let settled = (0..2).all(|i| (out.params[i] - p[i]).abs() <= 1e-10 * p[i].abs());
        p = out.params;
        if settled || !out.converged || reweights == MAX_REWEIGHTS {
            break;
        }
    }
    let rss: f64 = out.residuals.iter().map(|x| x * x).sum();
    let (exactly_determined, sigma) = if m == 2 {
        (true, [0.0; 2])
    } else {
        (false, sigma_from_normal(out.normal, rss / (m - 2) as f64))
    };
    Ok(FitResult {
        model: FitModel::Decay,
        parameters: [p[0] * scale, p[1]],
        uncertainties: [sigma[0] * scale, sigma[1]],
        residual_norm: rss.sqrt(),
        iterations,
        converged: out.converged,
        exactly_determined,
        degenerate: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BackgroundCorrected {
    pub rate: f64,
    pub subtracted: f64,
    /// The background exceeded the input and the result was floored at 0.
    pub floored: bool,
}

/// Spin-flip background rate at depth `u` (E_R), linear in depth.
pub fn spin_flip_rate(u: f64) -> f64 {
    u / SPIN_FLIP_REFERENCE_DEPTH / SPIN_FLIP_LIFETIME_S
}

pub fn subtract_background(rate: f64, u: f64) -> Result<BackgroundCorrected> {
    if !(u >= 0.0) || !rate.is_finite() {
        return Err(Error::domain(format!(
            "need depth ≥ 0 and a finite rate, got U = {u}, γ = {rate}"
        )));
    }
    let subtracted = spin_flip_rate(u);
    let diff = rate - subtracted;
    Ok(BackgroundCorrected {
        rate: diff.max(0.0),
        subtracted,
        floored: diff < 0.0,
    })
}

/// Weighted y = a + b x. Returns (a, b, [[var a, cov], [cov, var b]]) with
/// unit weights scaled by the residual variance when `w` is absent.
fn line_fit(x: &[f64], y: &[f64], w: Option<&[f64]>) -> (f64, f64, [[f64; 2]; 2]) {
    let weight = |i: usize| w.map_or(1.0, |w| w[i]);
    let sw: f64 = (0..x.len()).map(weight).sum();
    let xm = (0..x.len()).map(|i| weight(i) * x[i]).sum::<f64>() / sw;
    let ym = (0..x.len()).map(|i| weight(i) * y[i]).sum::<f64>() / sw;
    let sxx: f64 = (0..x.len()).map(|i| weight(i) * (x[i] - xm).powi(2)).sum();
    let sxy: f64 = (0..x.len()).map(|i| weight(i) * (x[i] - xm) * (y[i] - ym)).sum();
    let b = sxy / sxx;
    let a = ym - b * xm;
    let scale = match w {
        Some(_) => 1.0,
        None if x.len() > 2 => {
            let rss: f64 = (0..x.len()).map(|i| (y[i] - a - b * x[i]).powi(2)).sum();
            rss / (x.len() - 2) as f64
        }
        None => 0.0,
    };
    let var_b = scale / sxx;
    let var_a = scale / sw + xm * xm * var_b;
    (a, b, [[var_a, -xm * var_b], [-xm * var_b, var_b]])
}

/// γ(x) = A e^{−Bx} (decay) or C e^{Dx} (growth) by regression of ln γ on x.
/// Unweighted in the log domain unless 1σ errors on γ are given, in which
/// case the weights are (γ/σ)².
pub fn fit_exponential_law(x: &[f64], rates: &[f64], sigma: Option<&[f64]>, sign: LawSign) -> Result<FitResult> {
    check_series(x, rates, 3)?;
    let weights = match sigma {
        Some(s) => {
            if s.len() != rates.len() {
                return Err(Error::domain(format!(
                    "{} uncertainties for {} rates",
                    s.len(),
                    rates.len()
                )));
            }
            if let Some(i) = s.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
                return Err(Error::domain(format!("uncertainty {i} is not positive ({})", s[i])));
            }
            Some(rates.iter().zip(s).map(|(g, s)| (g / s).powi(2)).collect::<Vec<_>>())
        }
        None => None,
    };
    if x.iter().all(|&v| v == x[0]) {
        return Err(Error::domain("all abscissae are equal"));
    }
    let logs: Vec<f64> = rates.iter().map(|g| g.ln()).collect();
    let (a, b, cov) = line_fit(x, &logs, weights.as_deref());
    let residual_norm = x
        .iter()
        .zip(&logs)
        .map(|(xi, li)| (li - a - b * xi).powi(2))
        .sum::<f64>()
        .sqrt();
    let prefactor = a.exp();
    let (model, exponent) = match sign {
        LawSign::Decay => (FitModel::ExponentialDecay, -b),
        LawSign::Growth => (FitModel::ExponentialGrowth, b),
    };
    Ok(FitResult {
        model,
        parameters: [prefactor, exponent],
        uncertainties: [prefactor * cov[0][0].sqrt(), cov[1][1].sqrt()],
        residual_norm,
        iterations: 1,
        converged: true,
        exactly_determined: false,
        degenerate: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_decay() {
        let t: Vec<f64> = (0..10).map(|i| i as f64 * 0.006).collect();
        let n: Vec<f64> = t.iter().map(|t| 1e5 * (-50.0 * t).exp()).collect();
        let f = fit_decay(&t, &n).unwrap();
        assert!(f.converged);
        assert!((f.parameters[0] / 1e5 - 1.0).abs() < 1e-8);
        assert!((f.parameters[1] / 50.0 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn two_point_decay_is_exact() {
        let f = fit_decay(&[0.0, 0.02], &[2000.0, 2000.0 * (-1.0f64).exp()]).unwrap();
        assert!(f.exactly_determined);
        assert_eq!(f.uncertainties, [0.0, 0.0]);
        assert!((f.parameters[1] - 50.0).abs() < 1e-9);
    }

    #[test]
    fn constant_numbers_flagged() {
        let f = fit_decay(&[0.0, 1.0, 2.0], &[7.0; 3]).unwrap();
        assert!(f.degenerate);
        assert_eq!(f.parameters, [7.0, 0.0]);
    }

    #[test]
    fn decay_rejects_bad_input() {
        assert!(fit_decay(&[0.0], &[1.0]).is_err());
        assert!(fit_decay(&[0.0, 0.0, 1.0], &[3.0, 2.0, 1.0]).is_err());
        assert!(fit_decay(&[0.0, 1.0, 2.0], &[3.0, 0.0, 1.0]).is_err());
        assert!(fit_decay(&[0.0, 1.0], &[3.0, 2.0, 1.0]).is_err());
    }

    #[test]
    fn background_values() {
        let b = subtract_background(100.0, 55.0).unwrap();
        assert!((b.subtracted - 1.0 / 0.085).abs() < 1e-12);
        assert!((b.subtracted - 11.76).abs() < 0.01);
        assert_eq!(subtract_background(5.0, 0.0).unwrap().subtracted, 0.0);
        let f = subtract_background(5.0, 55.0).unwrap();
        assert!(f.floored && f.rate == 0.0);
        assert!(subtract_background(5.0, -1.0).is_err());
    }

    #[test]
    fn rate_laws_recover_generators() {
        let x: Vec<f64> = (0..7).map(|i| 20e3 + 10e3 * i as f64).collect();
        let g: Vec<f64> = x.iter().map(|x| 3e3 * (-83e-6 * x).exp()).collect();
        let f = fit_exponential_law(&x, &g, None, LawSign::Decay).unwrap();
        assert!((f.parameters[1] / 83e-6 - 1.0).abs() < 1e-10);
        assert!((f.parameters[0] / 3e3 - 1.0).abs() < 1e-10);

        let u: Vec<f64> = (8..=16).map(f64::from).collect();
        let g: Vec<f64> = u.iter().map(|u| 1.2 * (0.27 * u).exp()).collect();
        let f = fit_exponential_law(&u, &g, None, LawSign::Growth).unwrap();
        assert!((f.parameters[0] / 1.2 - 1.0).abs() < 1e-10);
        assert!((f.parameters[1] / 0.27 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn constant_rates_give_zero_exponent() {
        let f = fit_exponential_law(&[1.0, 2.0, 3.0, 4.0], &[5.0; 4], None, LawSign::Decay).unwrap();
        assert!(f.parameters[1].abs() < 1e-14);
        assert!((f.parameters[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn weighted_regression_uses_relative_errors() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let g = [10.0, 5.0, 2.5, 1.25];
        let s = [1.0, 0.5, 0.25, 0.125];
        let f = fit_exponential_law(&x, &g, Some(&s), LawSign::Decay).unwrap();
        assert!((f.parameters[1] - 2f64.ln()).abs() < 1e-12);
        // weights (γ/σ)² = 100 each: var B = 1/(100 Σ(x−x̄)²)
        assert!((f.uncertainties[1] - (1.0 / 500.0f64).sqrt()).abs() < 1e-12);
        assert!(fit_exponential_law(&x, &g, Some(&s[..3]), LawSign::Decay).is_err());
    }
}
