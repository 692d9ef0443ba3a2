//! Rotating-frame spin Hamiltonian H₁(r) of the rf-dressed F = 1 ladder and
//! its pointwise (Born–Oppenheimer) eigensystem.
//!
//! All energies are in E_R. In the basis (m_F = −1, 0, +1),
//!
//! ```text
//!        ⎛ V₋₁ − δ    Ω/2       0        ⎞
//! H₁ =   ⎜ Ω/2        V₀        Ω/2      ⎟
//!        ⎝ 0          Ω/2       V₊₁+δ+δ′ ⎠
//! ```

use rayon::prelude::*;

use crate::constants::UnitSystem;
use crate::error::{Error, Result};
use crate::lattice::{refine_minimum, LatticeModel};
use crate::linalg::eigh3;
use crate::zeeman;

/// Smallest cell grid accepted by [`adiabatic_surfaces`].
pub const MIN_SURFACE_GRID: usize = 16;
/// Default cell grid for gap searches.
pub const DEFAULT_GAP_GRID: usize = 64;
/// Relative convergence target of the gap refinement.
pub const GAP_REL_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct DressingParams {
    pub lattice: LatticeModel,
    /// ħΩ.
    pub coupling: f64,
    /// ħδ, with δ = ω_rf − 2πν₋₁,₀.
    pub detuning: f64,
    /// ħδ′.
    pub quadratic_shift: f64,
}

impl DressingParams {
    pub fn new(lattice: LatticeModel, coupling: f64, detuning: f64, quadratic_shift: f64) -> Result<Self> {
        if !(coupling >= 0.0) || !coupling.is_finite() {
            return Err(Error::domain(format!("coupling must be non-negative, got {coupling}")));
        }
        if !detuning.is_finite() {
            return Err(Error::domain("detuning must be finite"));
        }
        // δ′ = 0 is the B → 0 limit and is kept for the flat-ladder checks
        if !(quadratic_shift >= 0.0) || !quadratic_shift.is_finite() {
            return Err(Error::domain(format!(
                "quadratic shift must be non-negative, got {quadratic_shift}"
            )));
        }
        Ok(Self {
            lattice,
            coupling,
            detuning,
            quadratic_shift,
        })
    }

    /// Parameters from lab quantities: Ω/2π in Hz, rf frequency in Hz, bias field in T.
    pub fn from_lab(
        lattice: LatticeModel,
        coupling_hz: f64,
        rf_hz: f64,
        field_t: f64,
        units: &UnitSystem,
    ) -> Result<Self> {
        let spectrum = zeeman::breit_rabi(field_t)?;
        Self::new(
            lattice,
            units.energy_from_hz(coupling_hz),
            units.energy_from_hz(rf_hz - spectrum.nu_m1_0_hz),
            units.energy_from_hz(spectrum.quadratic_shift_hz),
        )
    }

    /// Constant diagonal offsets (−δ, 0, δ + δ′).
    pub fn detuning_offsets(&self) -> [f64; 3] {
        [-self.detuning, 0.0, self.detuning + self.quadratic_shift]
    }

    /// Detuned bare levels (V₋₁ − δ, V₀, V₊₁ + δ + δ′) at `r`.
    pub fn diabats_at(&self, r: [f64; 2]) -> [f64; 3] {
        let v = self.lattice.potentials_at(r);
        let o = self.detuning_offsets();
        [v[0] + o[0], v[1] + o[1], v[2] + o[2]]
    }

    pub fn with_lattice(&self, lattice: LatticeModel) -> Self {
        Self {
            lattice,
            ..self.clone()
        }
    }
}

/// H₁(r). Real symmetric, hence Hermitian.
pub fn h1_matrix(params: &DressingParams, r: [f64; 2]) -> [[f64; 3]; 3] {
    let d = params.diabats_at(r);
    let c = 0.5 * params.coupling;
    [[d[0], c, 0.0], [c, d[1], c], [0.0, c, d[2]]]
}

/// Sorted eigenvalues and eigenvectors of H₁(r).
pub fn local_eigensystem(params: &DressingParams, r: [f64; 2]) -> ([f64; 3], [[f64; 3]; 3]) {
    eigh3(h1_matrix(params, r))
}

fn local_gap(params: &DressingParams, r: [f64; 2]) -> f64 {
    let (w, _) = local_eigensystem(params, r);
    w[2] - w[1]
}

/// Eigenvalue fields of H₁ over one unit cell, sampled at fractional
/// coordinates (i/n, j/n). Index `i * n + j`.
#[derive(Debug, Clone)]
pub struct AdiabaticSurfaces {
    pub params: DressingParams,
    pub n: usize,
    pub positions: Vec<[f64; 2]>,
    pub low: Vec<f64>,
    pub mid: Vec<f64>,
    pub top: Vec<f64>,
    /// Unit top eigenvector (m_F = −1, 0, +1), component sum ≥ 0.
    pub top_vectors: Vec<[f64; 3]>,
    /// E_top − E_mid.
    pub gap: Vec<f64>,
}

impl AdiabaticSurfaces {
    pub fn index(&self, i: usize, j: usize) -> usize {
        (i % self.n) * self.n + (j % self.n)
    }

    /// Spin weights |χ_m|² of the top eigenvector.
    pub fn top_weights(&self, idx: usize) -> [f64; 3] {
        self.top_vectors[idx].map(|c| c * c)
    }

    /// Grid index and value of the top-surface minimum (first in index order).
    pub fn top_minimum(&self) -> (usize, f64) {
        argmin(&self.top)
    }

    /// Grid index and value of the smallest gap (first in index order).
    pub fn gap_minimum(&self) -> (usize, f64) {
        argmin(&self.gap)
    }

    /// Peak-to-valley variation of the top surface along the first cell axis
    /// through the top-surface minimum.
    pub fn top_corrugation_along_axis(&self) -> f64 {
        let (idx, _) = self.top_minimum();
        let j = idx % self.n;
        let row: Vec<f64> = (0..self.n).map(|i| self.top[self.index(i, j)]).collect();
        let hi = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = row.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

fn argmin(v: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, &x) in v.iter().enumerate() {
        if x < best.1 {
            best = (i, x);
        }
    }
    best
}

pub fn adiabatic_surfaces(params: &DressingParams, n: usize) -> Result<AdiabaticSurfaces> {
    if n < MIN_SURFACE_GRID {
        return Err(Error::domain(format!(
            "surface grid must be at least {MIN_SURFACE_GRID}, got {n}"
        )));
    }
    let lattice = &params.lattice;
    let points: Vec<([f64; 2], [f64; 3], [f64; 3])> = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / n, idx % n);
            let r = lattice.cell_point(i as f64 / n as f64, j as f64 / n as f64);
            let (w, v) = local_eigensystem(params, r);
            (r, w, v[2])
        })
        .collect();
    let mut s = AdiabaticSurfaces {
        params: params.clone(),
        n,
        positions: Vec::with_capacity(n * n),
        low: Vec::with_capacity(n * n),
        mid: Vec::with_capacity(n * n),
        top: Vec::with_capacity(n * n),
        top_vectors: Vec::with_capacity(n * n),
        gap: Vec::with_capacity(n * n),
    };
    for (r, w, v) in points {
        s.positions.push(r);
        s.low.push(w[0]);
        s.mid.push(w[1]);
        s.top.push(w[2]);
        s.top_vectors.push(v);
        s.gap.push(w[2] - w[1]);
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinGap {
    /// ħΔ.
    pub gap: f64,
    pub position: [f64; 2],
    /// Whether two detuned bare levels intersect somewhere in the cell.
    pub crossing: bool,
    pub refinement_levels: usize,
}

/// Whether any pair of detuned bare levels changes order on the grid.
pub fn bare_crossing(params: &DressingParams, n: usize) -> bool {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for i in 0..n {
        for j in 0..n {
            let r = params.lattice.cell_point(i as f64 / n as f64, j as f64 / n as f64);
            let d = params.diabats_at(r);
            for (k, (a, b)) in [(0, 1), (0, 2), (1, 2)].into_iter().enumerate() {
                let diff = d[a] - d[b];
                lo[k] = lo[k].min(diff);
                hi[k] = hi[k].max(diff);
            }
        }
    }
    (0..3).any(|k| lo[k] <= 0.0 && hi[k] >= 0.0)
}

pub fn min_gap(params: &DressingParams) -> Result<MinGap> {
    min_gap_on_grid(params, DEFAULT_GAP_GRID)
}

/// Minimum of E_top − E_mid over the cell: grid scan, then repeated local
/// subdivision around the best point until successive levels agree to
/// [`GAP_REL_TOL`] / 10.
pub fn min_gap_on_grid(params: &DressingParams, n: usize) -> Result<MinGap> {
    let surfaces = adiabatic_surfaces(params, n)?;
    let (idx, g0) = surfaces.gap_minimum();
    let lattice = &params.lattice;
    let f = |a: f64, b: f64| local_gap(params, lattice.cell_point(a, b));
    let (mut best, mut x, mut y) = (g0, (idx / n) as f64 / n as f64, (idx % n) as f64 / n as f64);
    let mut h = 1.0 / n as f64;
    let mut levels = 0;
    // a cusp can stall the stencil for a few levels, so compare against
    // the value several levels back
    let mut history = vec![best];
    while levels < 48 {
        let (cx, cy) = (x, y);
        h *= 0.5;
        for i in -2i32..=2 {
            for j in -2i32..=2 {
                let (px, py) = (cx + i as f64 * h, cy + j as f64 * h);
                let v = f(px, py);
                if v < best {
                    best = v;
                    x = px;
                    y = py;
                }
            }
        }
        levels += 1;
        history.push(best);
        let back = history[history.len().saturating_sub(7)];
        if levels >= 6 && back - best <= 0.1 * GAP_REL_TOL * best {
            break;
        }
        if best < 1e-14 {
            break;
        }
    }
    Ok(MinGap {
        gap: best,
        position: lattice.cell_point(x, y),
        crossing: bare_crossing(params, n),
        refinement_levels: levels,
    })
}

/// (Ω²/δ′, Ω/√2 − δ′/4): small- and large-coupling forms of the gap.
pub fn gap_asymptotes(coupling: f64, quadratic_shift: f64) -> Result<(f64, f64)> {
    if !(coupling > 0.0 && quadratic_shift > 0.0) {
        return Err(Error::domain("coupling and quadratic shift must be positive"));
    }
    Ok((
        coupling * coupling / quadratic_shift,
        coupling / 2f64.sqrt() - quadratic_shift / 4.0,
    ))
}

/// Flat-potential eigenvalues of H₁ (no lattice).
pub fn flat_eigenvalues(coupling: f64, detuning: f64, quadratic_shift: f64) -> [f64; 3] {
    let c = 0.5 * coupling;
    eigh3([[-detuning, c, 0.0], [c, 0.0, c], [0.0, c, detuning + quadratic_shift]]).0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beat {
    /// Angular frequency, same units as the inputs.
    pub frequency: f64,
    /// Amplitude 2 w_j w_l of the cosine in P₋₁(t).
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RabiOscillation {
    /// Dominant angular frequency of P₋₁(t); 0 when nothing oscillates.
    pub frequency: f64,
    pub amplitude: f64,
    /// All three pair frequencies, by decreasing amplitude.
    pub beats: Vec<Beat>,
    pub zero_amplitude: bool,
    /// The two strongest beats have equal amplitude.
    pub tie: bool,
}

/// ω_osc of the m_F = −1 population starting from pure m_F = −1 in flat
/// potentials. P₋₁(t) = Σ_jl w_j w_l cos((E_j − E_l)t), with w_j = |⟨j|−1⟩|².
pub fn rabi_oscillation_frequency(coupling: f64, detuning: f64, quadratic_shift: f64) -> RabiOscillation {
    let c = 0.5 * coupling;
    let (e, v) = eigh3([[-detuning, c, 0.0], [c, 0.0, c], [0.0, c, detuning + quadratic_shift]]);
    let w = [v[0][0] * v[0][0], v[1][0] * v[1][0], v[2][0] * v[2][0]];
    let mut beats: Vec<Beat> = [(0usize, 1usize), (0, 2), (1, 2)]
        .iter()
        .map(|&(j, l)| Beat {
            frequency: (e[l] - e[j]).abs(),
            amplitude: 2.0 * w[j] * w[l],
        })
        .collect();
    beats.sort_by(|a, b| {
        b.amplitude
            .total_cmp(&a.amplitude)
            .then(b.frequency.total_cmp(&a.frequency))
    });
    let top = beats[0];
    let zero_amplitude = top.amplitude < 1e-12;
    let tie = !zero_amplitude && (beats[0].amplitude - beats[1].amplitude).abs() <= 1e-9 * top.amplitude;
    RabiOscillation {
        frequency: if zero_amplitude { 0.0 } else { top.frequency },
        amplitude: if zero_amplitude { 0.0 } else { top.amplitude },
        beats,
        zero_amplitude,
        tie,
    }
}

/// Coupling Ω whose dominant oscillation frequency equals `target`
/// (bisection; ω_osc is increasing in Ω on the bracket).
pub fn coupling_for_oscillation(target: f64, detuning: f64, quadratic_shift: f64) -> Result<f64> {
    if !(target > 0.0) {
        return Err(Error::domain("target oscillation frequency must be positive"));
    }
    let g = |om: f64| rabi_oscillation_frequency(om, detuning, quadratic_shift).frequency - target;
    let (mut lo, mut hi) = (0.0, target);
    while g(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e6 * target {
            return Err(Error::Convergence {
                what: "coupling bracket".into(),
                residual: g(hi),
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Harmonic description of the top surface near its minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMinimum {
    pub position: [f64; 2],
    pub energy: f64,
    /// Hessian of E_top from a local quadratic least-squares fit (E_R k²).
    pub hessian: [[f64; 2]; 2],
    /// Largest Hessian eigenvalue.
    pub curvature: f64,
    /// Trap frequency √(κ/M) for the stiffest direction (E_R/ħ).
    pub frequency: f64,
}

/// Step of the quadratic-fit stencil, in 1/k.
const FIT_STEP: f64 = 0.02;

pub fn top_surface_minimum(params: &DressingParams, n: usize) -> Result<SurfaceMinimum> {
    let s = adiabatic_surfaces(params, n)?;
    let (idx, e0) = s.top_minimum();
    let hi = s.top.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi - e0 <= 1e-12 * hi.abs().max(1.0) {
        return Err(Error::FlatSurface);
    }
    let lattice = &params.lattice;
    let top = |r: [f64; 2]| local_eigensystem(params, r).0[2];
    let start = ((e0), (idx / n) as f64 / n as f64, (idx % n) as f64 / n as f64);
    let (energy, fx, fy) = refine_minimum(&|a, b| top(lattice.cell_point(a, b)), start, 1.0 / n as f64);
    let p = lattice.cell_point(fx, fy);
    // E ≈ c + g·x + ½ xᵀHx on a 5×5 stencil; unknowns (c, gx, gy, hxx, hxy, hyy)
    let mut ata = [[0.0f64; 6]; 6];
    let mut atb = [0.0f64; 6];
    for i in -2i32..=2 {
        for j in -2i32..=2 {
            let (dx, dy) = (i as f64 * FIT_STEP, j as f64 * FIT_STEP);
            let row = [1.0, dx, dy, 0.5 * dx * dx, dx * dy, 0.5 * dy * dy];
            let e = top([p[0] + dx, p[1] + dy]) - energy;
            for a in 0..6 {
                atb[a] += row[a] * e;
                for b in 0..6 {
                    ata[a][b] += row[a] * row[b];
                }
            }
        }
    }
    let sol = solve_dense(ata, atb).ok_or(Error::FlatSurface)?;
    let hessian = [[sol[3], sol[4]], [sol[4], sol[5]]];
    let tr = sol[3] + sol[5];
    let det = sol[3] * sol[5] - sol[4] * sol[4];
    let curvature = 0.5 * tr + (0.25 * tr * tr - det).max(0.0).sqrt();
    if !(curvature > 0.0) {
        return Err(Error::FlatSurface);
    }
    // M = 1/2 in recoil units
    Ok(SurfaceMinimum {
        position: p,
        energy,
        hessian,
        curvature,
        frequency: (2.0 * curvature).sqrt(),
    })
}

/// Gaussian elimination with partial pivoting for small dense systems.
pub(crate) fn solve_dense<const N: usize>(mut a: [[f64; N]; N], mut b: [f64; N]) -> Option<[f64; N]> {
    for col in 0..N {
        let piv = (col..N).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            for k in col..N {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let scale = (0..N).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    if (0..N).any(|i| a[i][i].abs() <= 1e-14 * scale) {
        return None;
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let s: f64 = (row + 1..N).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat() -> LatticeModel {
        LatticeModel::checkerboard(0.0).unwrap()
    }

    fn reference_params(depth: f64, coupling_hz: f64, rf_hz: f64) -> DressingParams {
        let units = UnitSystem::rubidium_lattice();
        DressingParams::from_lab(
            LatticeModel::checkerboard(depth).unwrap(),
            coupling_hz,
            rf_hz,
            5.117e-3,
            &units,
        )
        .unwrap()
    }

    #[test]
    fn zero_matrix() {
        let p = DressingParams::new(flat(), 0.0, 0.0, 0.0).unwrap();
        let h = h1_matrix(&p, [0.3, 0.2]);
        assert!(h.iter().flatten().all(|&x| x == 0.0));
        assert_eq!(local_eigensystem(&p, [0.0, 0.0]).0, [0.0; 3]);
    }

    #[test]
    fn three_level_ladder() {
        let units = UnitSystem::rubidium_lattice();
        let om = units.energy_from_khz(200.0);
        let p = DressingParams::new(flat(), om, 0.0, 0.0).unwrap();
        let w = local_eigensystem(&p, [1.0, 2.0]).0.map(|e| units.energy_to_khz(e));
        let r = 200.0 / 2f64.sqrt();
        assert!(
            (w[0] + r).abs() < 1e-9 && w[1].abs() < 1e-9 && (w[2] - r).abs() < 1e-9,
            "{w:?}"
        );
        assert!((r - 141.42).abs() < 0.01);
    }

    #[test]
    fn hermitian_and_trace() {
        let p = reference_params(10.0, 205e3, 35.90e6);
        for &r in &[[0.0, 0.0], [0.4, 1.3], [1.5, 1.5]] {
            let h = h1_matrix(&p, r);
            for i in 0..3 {
                for j in 0..3 {
                    assert_eq!(h[i][j], h[j][i]);
                }
            }
            let w = local_eigensystem(&p, r).0;
            let v = p.lattice.potentials_at(r);
            let want = v[0] + v[1] + v[2] + p.quadratic_shift;
            assert!((w.iter().sum::<f64>() - want).abs() < 1e-9);
        }
    }

    #[test]
    fn uncoupled_surfaces_are_sorted_diabats() {
        let mut p = reference_params(10.0, 205e3, 35.90e6);
        p.coupling = 0.0;
        let s = adiabatic_surfaces(&p, 16).unwrap();
        for idx in 0..s.top.len() {
            let mut d = p.diabats_at(s.positions[idx]);
            d.sort_by(f64::total_cmp);
            assert!((s.low[idx] - d[0]).abs() < 1e-12);
            assert!((s.mid[idx] - d[1]).abs() < 1e-12);
            assert!((s.top[idx] - d[2]).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_too_small() {
        assert!(adiabatic_surfaces(&reference_params(10.0, 205e3, 35.9e6), 8).is_err());
    }

    #[test]
    fn gauge_shift() {
        let p = reference_params(10.0, 205e3, 35.90e6);
        let q = p.with_lattice(p.lattice.shifted(3.5));
        let r = [0.7, 0.2];
        let a = local_eigensystem(&p, r).0;
        let b = local_eigensystem(&q, r).0;
        for i in 0..3 {
            assert!((b[i] - a[i] - 3.5).abs() < 1e-12);
        }
        assert!(((b[2] - b[1]) - (a[2] - a[1])).abs() < 1e-12);
    }

    #[test]
    fn uncoupled_crossing_closes_gap() {
        // deep lattice near resonance: the ∓1 diabats cross inside the cell
        let mut p = reference_params(30.0, 205e3, 35.90e6);
        p.coupling = 0.0;
        let g = min_gap(&p).unwrap();
        assert!(g.crossing);
        assert!(g.gap < 1e-6, "{}", g.gap);
    }

    #[test]
    fn asymptote_forms() {
        let (a, b) = gap_asymptotes(20.0, 376.0).unwrap();
        assert!((a - 400.0 / 376.0).abs() < 1e-12);
        assert!((b - (20.0 / 2f64.sqrt() - 94.0)).abs() < 1e-12);
        assert!(gap_asymptotes(0.0, 1.0).is_err());
        // crossover point: both returned, no accuracy claimed
        let (a, b) = gap_asymptotes(376.0, 376.0).unwrap();
        assert!(a.is_finite() && b.is_finite());
    }

    #[test]
    fn rabi_two_level_limit() {
        let om = 1.0;
        let r = rabi_oscillation_frequency(om, 0.0, 1e4 * om);
        assert!((r.frequency / om - 1.0).abs() < 1e-2, "{}", r.frequency);
        assert!(!r.zero_amplitude);
    }

    #[test]
    fn rabi_zero_coupling() {
        let r = rabi_oscillation_frequency(0.0, 0.3, 1.0);
        assert!(r.zero_amplitude);
        assert_eq!(r.frequency, 0.0);
        assert_eq!(r.beats.len(), 3);
    }

    #[test]
    fn rabi_inverse() {
        let (d, dp) = (0.0, 376.0);
        let om = coupling_for_oscillation(200.0, d, dp).unwrap();
        let back = rabi_oscillation_frequency(om, d, dp).frequency;
        assert!((back - 200.0).abs() < 1e-9);
    }

    #[test]
    fn dense_solver() {
        let x = solve_dense([[2.0, 1.0], [1.0, 3.0]], [3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-14 && (x[1] - 1.4).abs() < 1e-14);
        assert!(solve_dense([[1.0, 2.0], [2.0, 4.0]], [1.0, 1.0]).is_none());
    }
}
