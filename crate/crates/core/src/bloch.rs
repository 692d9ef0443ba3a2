//! Plane-wave solver for H = p²/2M + H₁(r).
//!
//! Basis: e^{i(q+G)·r} ⊗ |m_F⟩ with G = n₁b₁ + n₂b₂, |n₁|,|n₂| ≤ n_max.
//! Kinetic energy is |q+G|² (E_R). The quasimomentum grid is the midpoint
//! grid q = Σ ((i+½)/N − ½) b_i, which is closed under q → −q and under the
//! square point group, so only one q per symmetry orbit is diagonalized.
//!
//! "Ground band" means the lowest band living on the uppermost adiabatic
//! surface: the lowest eigenstate at or above min E_top whose weight on the
//! local top eigenvector χ(r) exceeds ½. The weight is ⟨ψ|Π|ψ⟩ with
//! Π(r) = χ(r)χ(r)ᵀ, evaluated in the plane-wave basis.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::dressing::{adiabatic_surfaces, AdiabaticSurfaces, DressingParams};
use crate::error::{Error, Result};
use crate::lattice::Spin;
use crate::linalg::hermitian_eigen;

pub const DEFAULT_N_MAX: usize = 8;
pub const DEFAULT_Q_GRID: usize = 16;
pub const DEFAULT_SURFACE_GRID: usize = 64;
/// Cutoff-convergence tolerance on the ground-band energy (E_R).
pub const CUTOFF_TOL: f64 = 1e-4;
/// Depth up to which the cutoff check is enforced (E_R).
pub const CUTOFF_CHECK_MAX_DEPTH: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandMode {
    /// Full three-component spinor problem.
    Spinor,
    /// Scalar particle in the uppermost adiabatic potential E_top(r).
    SingleSurface,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub n_max: usize,
    pub q_grid: usize,
    /// Cell grid used to sample E_top and χ(r).
    pub surface_grid: usize,
    pub mode: BandMode,
    /// Enforce the cutoff-convergence check (only for depths ≤ 20 E_R).
    pub check_convergence: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            n_max: DEFAULT_N_MAX,
            q_grid: DEFAULT_Q_GRID,
            surface_grid: DEFAULT_SURFACE_GRID,
            mode: BandMode::Spinor,
            check_convergence: true,
        }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if self.n_max < 4 {
            return Err(Error::domain(format!("n_max must be at least 4, got {}", self.n_max)));
        }
        if self.q_grid < 8 {
            return Err(Error::domain(format!("q grid must be at least 8, got {}", self.q_grid)));
        }
        if self.surface_grid < 4 * self.n_max + 1 {
            return Err(Error::domain(format!(
                "surface grid {} too coarse for n_max = {} (need ≥ {})",
                self.surface_grid,
                self.n_max,
                4 * self.n_max + 1
            )));
        }
        Ok(())
    }
}

/// Square block of reciprocal-lattice indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveBasis {
    pub n_max: i32,
    pub harmonics: Vec<(i32, i32)>,
}

impl PlaneWaveBasis {
    pub fn new(n_max: usize) -> Self {
        let n = n_max as i32;
        let harmonics = (-n..=n).flat_map(|a| (-n..=n).map(move |b| (a, b))).collect();
        Self { n_max: n, harmonics }
    }

    pub fn len(&self) -> usize {
        self.harmonics.len()
    }

    pub fn is_empty(&self) -> bool {
        self.harmonics.is_empty()
    }

    pub fn index(&self, n1: i32, n2: i32) -> Option<usize> {
        let w = 2 * self.n_max + 1;
        if n1.abs() > self.n_max || n2.abs() > self.n_max {
            return None;
        }
        Some(((n1 + self.n_max) * w + (n2 + self.n_max)) as usize)
    }
}

/// Dense table of Fourier coefficients indexed by Δn ∈ [−2n_max, 2n_max]².
#[derive(Debug, Clone)]
struct DiffTable {
    reach: i32,
    values: Vec<Complex64>,
}

impl DiffTable {
    fn new(reach: i32, f: impl Fn(i32, i32) -> Complex64) -> Self {
        let w = 2 * reach + 1;
        let mut values = Vec::with_capacity((w * w) as usize);
        for a in -reach..=reach {
            for b in -reach..=reach {
                values.push(f(a, b));
            }
        }
        Self { reach, values }
    }

    #[inline]
    fn get(&self, a: i32, b: i32) -> Complex64 {
        let w = 2 * self.reach + 1;
        self.values[((a + self.reach) * w + (b + self.reach)) as usize]
    }
}

/// Everything needed to assemble H(q) for one parameter set.
struct Assembly {
    basis: PlaneWaveBasis,
    reciprocal: [[f64; 2]; 2],
    spins: usize,
    /// Per-spin potential tables (one table in single-surface mode).
    potential: Vec<DiffTable>,
    offsets: Vec<f64>,
    half_coupling: f64,
    real: bool,
    /// Projector blocks Π_ss′ (spinor mode only), row-major 3×3.
    projector: Vec<DiffTable>,
    top_min: f64,
}

impl Assembly {
    fn new(params: &DressingParams, opts: &SolverOptions, surfaces: &AdiabaticSurfaces) -> Result<Self> {
        let basis = PlaneWaveBasis::new(opts.n_max);
        let reach = 2 * basis.n_max;
        let lattice = &params.lattice;
        let real_model = Spin::ALL
            .iter()
            .all(|&s| lattice.table(s).values().all(|c| c.im == 0.0));
        let n = surfaces.n;
        let top_min = surfaces.top_minimum().1;
        match opts.mode {
            BandMode::Spinor => {
                let potential = Spin::ALL
                    .iter()
                    .map(|&s| DiffTable::new(reach, |a, b| lattice.coefficient(s, a, b)))
                    .collect();
                let mut projector = Vec::with_capacity(9);
                for s in 0..3 {
                    for t in 0..3 {
                        let field: Vec<f64> = surfaces.top_vectors.iter().map(|v| v[s] * v[t]).collect();
                        let coeffs = cell_dft(&field, n);
                        projector.push(DiffTable::new(reach, |a, b| {
                            let c = coeffs[wrap(a, n) * n + wrap(b, n)];
                            if real_model {
                                Complex64::new(c.re, 0.0)
                            } else {
                                c
                            }
                        }));
                    }
                }
                Ok(Self {
                    basis,
                    reciprocal: lattice.reciprocal_vectors(),
                    spins: 3,
                    potential,
                    offsets: params.detuning_offsets().to_vec(),
                    half_coupling: 0.5 * params.coupling,
                    real: real_model,
                    projector,
                    top_min,
                })
            }
            BandMode::SingleSurface => {
                let coeffs = cell_dft(&surfaces.top, n);
                let table = DiffTable::new(reach, |a, b| {
                    let c = coeffs[wrap(a, n) * n + wrap(b, n)];
                    if real_model {
                        Complex64::new(c.re, 0.0)
                    } else {
                        c
                    }
                });
                Ok(Self {
                    basis,
                    reciprocal: lattice.reciprocal_vectors(),
                    spins: 1,
                    potential: vec![table],
                    offsets: vec![0.0],
                    half_coupling: 0.0,
                    real: real_model,
                    projector: Vec::new(),
                    top_min,
                })
            }
        }
    }

    fn dim(&self) -> usize {
        self.spins * self.basis.len()
    }

    fn kinetic(&self, q: [f64; 2], g: usize) -> f64 {
        let (n1, n2) = self.basis.harmonics[g];
        let [b1, b2] = self.reciprocal;
        let kx = q[0] + n1 as f64 * b1[0] + n2 as f64 * b2[0];
        let ky = q[1] + n1 as f64 * b1[1] + n2 as f64 * b2[1];
        kx * kx + ky * ky
    }

    /// Lower-triangle element H_ij(q), i ≥ j.
    fn element(&self, q: [f64; 2], i: usize, j: usize) -> Complex64 {
        let ng = self.basis.len();
        let (si, gi) = (i / ng, i % ng);
        let (sj, gj) = (j / ng, j % ng);
        if si == sj {
            let (a1, a2) = self.basis.harmonics[gi];
            let (b1, b2) = self.basis.harmonics[gj];
            let mut v = self.potential[si].get(a1 - b1, a2 - b2);
            if gi == gj {
                v += self.kinetic(q, gi) + self.offsets[si];
            }
            v
        } else if gi == gj && si.abs_diff(sj) == 1 {
            Complex64::new(self.half_coupling, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// ⟨c|Π|c⟩.
    fn top_fraction(&self, c: &[Complex64]) -> f64 {
        if self.spins == 1 {
            return 1.0;
        }
        let ng = self.basis.len();
        let mut total = 0.0;
        for s in 0..3 {
            for t in 0..3 {
                let table = &self.projector[s * 3 + t];
                let (cs, ct) = (&c[s * ng..(s + 1) * ng], &c[t * ng..(t + 1) * ng]);
                let mut acc = Complex64::new(0.0, 0.0);
                for (g, &(a1, a2)) in self.basis.harmonics.iter().enumerate() {
                    if cs[g].norm_sqr() == 0.0 {
                        continue;
                    }
                    let mut row = Complex64::new(0.0, 0.0);
                    for (h, &(b1, b2)) in self.basis.harmonics.iter().enumerate() {
                        row += table.get(a1 - b1, a2 - b2) * ct[h];
                    }
                    acc += cs[g].conj() * row;
                }
                total += acc.re;
            }
        }
        total
    }

    fn solve(&self, q: [f64; 2]) -> Result<BandState> {
        let dim = self.dim();
        let eig = hermitian_eigen(dim, self.real, true, |i, j| self.element(q, i, j))?;
        let floor = self.top_min - 1e-9 * self.top_min.abs().max(1.0);
        let mut chosen: Option<(usize, f64)> = None;
        let mut best: Option<(usize, f64)> = None;
        for b in 0..dim {
            if self.spins == 3 && eig.values[b] < floor {
                continue;
            }
            let f = self.top_fraction(eig.vector(b));
            if best.is_none_or(|(_, bf)| f > bf) {
                best = Some((b, f));
            }
            if f > 0.5 {
                chosen = Some((b, f));
                break;
            }
        }
        let (fallback, (band, fraction)) = match (chosen, best) {
            (Some(c), _) => (false, c),
            (None, Some(b)) => (true, b),
            (None, None) => (true, (dim - 1, 0.0)),
        };
        let coefficients = eig.vector(band).to_vec();
        Ok(BandState {
            q,
            energies: eig.values,
            band,
            energy: 0.0,
            fraction,
            fallback,
            coefficients,
        }
        .finish())
    }
}

/// Eigenvalues at one quasimomentum and the identified ground-band state.
#[derive(Debug, Clone)]
pub struct BandState {
    pub q: [f64; 2],
    pub energies: Vec<f64>,
    pub band: usize,
    pub energy: f64,
    /// Weight on the top adiabatic eigenvector.
    pub fraction: f64,
    /// No band exceeded weight ½; the best candidate was taken.
    pub fallback: bool,
    /// Spin-major coefficients c[s·N_G + g].
    pub coefficients: Vec<Complex64>,
}

impl BandState {
    fn finish(mut self) -> Self {
        self.energy = self.energies[self.band];
        self
    }
}

#[derive(Debug, Clone)]
pub struct BlochSolution {
    pub mode: BandMode,
    pub n_max: usize,
    pub q_grid: usize,
    pub reciprocal: [[f64; 2]; 2],
    pub basis: PlaneWaveBasis,
    /// 3 in spinor mode, 1 in single-surface mode.
    pub spins: usize,
    /// Cartesian quasimomenta, index i₁·N + i₂.
    pub qpoints: Vec<[f64; 2]>,
    /// All band energies per q, ascending.
    pub energies: Vec<Vec<f64>>,
    pub band_index: Vec<usize>,
    pub coefficients: Vec<Vec<Complex64>>,
    pub top_fraction: Vec<f64>,
    /// Some q needed the best-candidate fallback.
    pub identification_fallback: bool,
    /// |E(n_max + 2) − E(n_max)| at Γ, when checked.
    pub cutoff_change: Option<f64>,
    /// Number of distinct diagonalizations after symmetry reduction.
    pub solved_points: usize,
    pub top_surface_min: f64,
}

impl BlochSolution {
    pub fn ground_energies(&self) -> Vec<f64> {
        self.energies.iter().zip(&self.band_index).map(|(e, &b)| e[b]).collect()
    }

    pub fn mean_ground_energy(&self) -> f64 {
        let e = self.ground_energies();
        e.iter().sum::<f64>() / e.len() as f64
    }

    /// Σ_G |c_{s,G}|² at one q.
    pub fn spin_weights(&self, qi: usize) -> Vec<f64> {
        let ng = self.basis.len();
        (0..self.spins)
            .map(|s| {
                self.coefficients[qi][s * ng..(s + 1) * ng]
                    .iter()
                    .map(|c| c.norm_sqr())
                    .sum()
            })
            .collect()
    }

    /// Spin weights averaged over the q grid.
    pub fn mean_spin_weights(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.spins];
        for qi in 0..self.qpoints.len() {
            for (a, w) in acc.iter_mut().zip(self.spin_weights(qi)) {
                *a += w;
            }
        }
        acc.iter().map(|a| a / self.qpoints.len() as f64).collect()
    }

    /// Cartesian reciprocal vector of basis entry `g`.
    pub fn g_vector(&self, g: usize) -> [f64; 2] {
        let (n1, n2) = self.basis.harmonics[g];
        let [b1, b2] = self.reciprocal;
        [
            n1 as f64 * b1[0] + n2 as f64 * b2[0],
            n1 as f64 * b1[1] + n2 as f64 * b2[1],
        ]
    }
}

/// Index-space point operation n ↦ (s₁ n_{p₁}, s₂ n_{p₂}).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct PointOp {
    swap: bool,
    s1: i32,
    s2: i32,
}

impl PointOp {
    fn all() -> Vec<Self> {
        let mut ops = Vec::with_capacity(8);
        for swap in [false, true] {
            for s1 in [1, -1] {
                for s2 in [1, -1] {
                    ops.push(Self { swap, s1, s2 });
                }
            }
        }
        ops
    }

    fn apply(&self, a: i32, b: i32) -> (i32, i32) {
        if self.swap {
            (self.s1 * b, self.s2 * a)
        } else {
            (self.s1 * a, self.s2 * b)
        }
    }
}

/// Point operations that leave the metric and every potential table invariant.
fn model_symmetries(params: &DressingParams) -> Vec<PointOp> {
    let lattice = &params.lattice;
    let [b1, b2] = lattice.reciprocal_vectors();
    let dot = |u: [f64; 2], v: [f64; 2]| u[0] * v[0] + u[1] * v[1];
    let metric = [[dot(b1, b1), dot(b1, b2)], [dot(b2, b1), dot(b2, b2)]];
    let scale = metric[0][0].abs().max(metric[1][1].abs());
    PointOp::all()
        .into_iter()
        .filter(|op| {
            let image = |a: i32, b: i32| {
                let (x, y) = op.apply(a, b);
                lattice.g_vector(x, y)
            };
            let (e1, e2) = (image(1, 0), image(0, 1));
            let m = [[dot(e1, e1), dot(e1, e2)], [dot(e2, e1), dot(e2, e2)]];
            let metric_ok = (0..2).all(|i| (0..2).all(|j| (m[i][j] - metric[i][j]).abs() <= 1e-12 * scale));
            metric_ok
                && Spin::ALL.iter().all(|&s| {
                    let table = lattice.table(s);
                    let tscale = table.values().map(|c| c.norm()).fold(0.0, f64::max);
                    table.iter().all(|(&(a, b), &c)| {
                        let (x, y) = op.apply(a, b);
                        (lattice.coefficient(s, x, y) - c).norm() <= 1e-13 * tscale.max(1e-300)
                    })
                })
        })
        .collect()
}

/// Representative for every grid point: (rep index, op, time reversal).
fn reduce_grid(n: usize, ops: &[PointOp]) -> Vec<(usize, PointOp, bool)> {
    // fractional index f = i + ½ − N/2 in half-steps: store 2f = 2i + 1 − N
    let to_half = |i: usize| 2 * i as i32 + 1 - n as i32;
    let from_half = |h: i32| ((h + n as i32 - 1) / 2) as usize;
    let mut assigned: Vec<Option<(usize, PointOp, bool)>> = vec![None; n * n];
    let identity = PointOp {
        swap: false,
        s1: 1,
        s2: 1,
    };
    for idx in 0..n * n {
        if assigned[idx].is_some() {
            continue;
        }
        assigned[idx] = Some((idx, identity, false));
        let (h1, h2) = (to_half(idx / n), to_half(idx % n));
        for op in std::iter::once(&identity).chain(ops) {
            for tr in [false, true] {
                let (mut a, mut b) = op.apply(h1, h2);
                if tr {
                    a = -a;
                    b = -b;
                }
                let t = from_half(a) * n + from_half(b);
                if assigned[t].is_none() {
                    assigned[t] = Some((idx, *op, tr));
                }
            }
        }
    }
    assigned.into_iter().map(|a| a.expect("every point assigned")).collect()
}

/// Midpoint quasimomentum grid (Cartesian), index i₁·N + i₂.
pub fn quasimomentum_grid(reciprocal: [[f64; 2]; 2], n: usize) -> Vec<[f64; 2]> {
    let [b1, b2] = reciprocal;
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let f1 = (i as f64 + 0.5) / n as f64 - 0.5;
            let f2 = (j as f64 + 0.5) / n as f64 - 0.5;
            out.push([f1 * b1[0] + f2 * b2[0], f1 * b1[1] + f2 * b2[1]]);
        }
    }
    out
}

pub fn solve_bands(params: &DressingParams, opts: &SolverOptions) -> Result<BlochSolution> {
    opts.validate()?;
    let surfaces = adiabatic_surfaces(params, opts.surface_grid)?;
    let asm = Assembly::new(params, opts, &surfaces)?;
    let n = opts.q_grid;
    let qpoints = quasimomentum_grid(asm.reciprocal, n);
    let ops = model_symmetries(params);
    let map = reduce_grid(n, &ops);
    let reps: Vec<usize> = (0..n * n).filter(|&i| map[i].0 == i).collect();
    let solved: Vec<BandState> = reps
        .par_iter()
        .map(|&i| asm.solve(qpoints[i]))
        .collect::<Result<Vec<_>>>()?;
    let mut slot = vec![usize::MAX; n * n];
    for (k, &i) in reps.iter().enumerate() {
        slot[i] = k;
    }
    let ng = asm.basis.len();
    let mut energies = Vec::with_capacity(n * n);
    let mut band_index = Vec::with_capacity(n * n);
    let mut coefficients = Vec::with_capacity(n * n);
    let mut top_fraction = Vec::with_capacity(n * n);
    let mut fallback = false;
    for idx in 0..n * n {
        let (rep, op, tr) = map[idx];
        let state = &solved[slot[rep]];
        energies.push(state.energies.clone());
        band_index.push(state.band);
        top_fraction.push(state.fraction);
        fallback |= state.fallback;
        if rep == idx {
            coefficients.push(state.coefficients.clone());
            continue;
        }
        let mut c = vec![Complex64::new(0.0, 0.0); state.coefficients.len()];
        for s in 0..asm.spins {
            for (g, &(a, b)) in asm.basis.harmonics.iter().enumerate() {
                let (mut x, mut y) = op.apply(a, b);
                let mut v = state.coefficients[s * ng + g];
                if tr {
                    x = -x;
                    y = -y;
                    v = v.conj();
                }
                let t = asm.basis.index(x, y).expect("square basis is closed under point ops");
                c[s * ng + t] = v;
            }
        }
        coefficients.push(c);
    }
    let mut cutoff_change = None;
    if opts.check_convergence && params.lattice.depth() <= CUTOFF_CHECK_MAX_DEPTH {
        let here = asm.solve([0.0, 0.0])?;
        let bigger = SolverOptions {
            n_max: opts.n_max + 2,
            ..opts.clone()
        };
        let asm2 = Assembly::new(params, &bigger, &surfaces)?;
        let there = asm2.solve([0.0, 0.0])?;
        let change = (there.energy - here.energy).abs();
        cutoff_change = Some(change);
        if change >= CUTOFF_TOL {
            return Err(Error::Convergence {
                what: format!("ground band at n_max = {}", opts.n_max),
                residual: change,
            });
        }
    }
    Ok(BlochSolution {
        mode: opts.mode,
        n_max: opts.n_max,
        q_grid: n,
        reciprocal: asm.reciprocal,
        basis: asm.basis.clone(),
        spins: asm.spins,
        qpoints,
        energies,
        band_index,
        coefficients,
        top_fraction,
        identification_fallback: fallback,
        cutoff_change,
        solved_points: reps.len(),
        top_surface_min: asm.top_min,
    })
}

/// Ground-band state at a single quasimomentum.
pub fn solve_at(params: &DressingParams, opts: &SolverOptions, q: [f64; 2]) -> Result<BandState> {
    let surfaces = adiabatic_surfaces(params, opts.surface_grid)?;
    let asm = Assembly::new(params, opts, &surfaces)?;
    asm.solve(q)
}

/// Cell density of the ground-band state at Γ, unit maximum.
pub fn ground_state_density(params: &DressingParams, opts: &SolverOptions, n: usize) -> Result<Vec<f64>> {
    let state = solve_at(params, opts, [0.0, 0.0])?;
    let spins = match opts.mode {
        BandMode::Spinor => 3,
        BandMode::SingleSurface => 1,
    };
    cell_density(&PlaneWaveBasis::new(opts.n_max), spins, &state.coefficients, n)
}

/// Σ_s |ψ_s(r)|² of a Bloch state on an n × n grid of fractional cell
/// coordinates (the plane-wave phase e^{iq·r} drops out). Normalized to
/// unit maximum.
pub fn cell_density(basis: &PlaneWaveBasis, spins: usize, coefficients: &[Complex64], n: usize) -> Result<Vec<f64>> {
    if n < 2 * basis.n_max as usize + 1 {
        return Err(Error::domain(format!(
            "density grid {n} too coarse for n_max = {}",
            basis.n_max
        )));
    }
    let ng = basis.len();
    let mut density = vec![0.0; n * n];
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_inverse(n);
    for s in 0..spins {
        let mut grid = vec![Complex64::new(0.0, 0.0); n * n];
        for (g, &(a, b)) in basis.harmonics.iter().enumerate() {
            grid[wrap(a, n) * n + wrap(b, n)] += coefficients[s * ng + g];
        }
        fft2(&mut grid, n, &fft);
        for (d, z) in density.iter_mut().zip(&grid) {
            *d += z.norm_sqr();
        }
    }
    let peak = density.iter().cloned().fold(0.0, f64::max);
    if peak > 0.0 {
        for d in density.iter_mut() {
            *d /= peak;
        }
    }
    Ok(density)
}

#[inline]
pub(crate) fn wrap(a: i32, n: usize) -> usize {
    a.rem_euclid(n as i32) as usize
}

/// Forward cell DFT: c(Δn) = N⁻² Σ_f field(f) e^{−2πi Δn·f}, at wrapped index.
pub(crate) fn cell_dft(field: &[f64], n: usize) -> Vec<Complex64> {
    let mut grid: Vec<Complex64> = field.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    fft2(&mut grid, n, &fft);
    let norm = 1.0 / (n * n) as f64;
    grid.iter().map(|z| z * norm).collect()
}

/// In-place 2D transform of a row-major n × n array.
fn fft2(grid: &mut [Complex64], n: usize, fft: &Arc<dyn rustfft::Fft<f64>>) {
    for row in grid.chunks_mut(n) {
        fft.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for j in 0..n {
        for i in 0..n {
            col[i] = grid[i * n + j];
        }
        fft.process(&mut col);
        for i in 0..n {
            grid[i * n + j] = col[i];
        }
    }
}
