use std::f64::consts::PI;

use dressed_lattice::constants::UnitSystem;
use dressed_lattice::dressing::*;
use dressed_lattice::lattice::{LatticeModel, Spin};
use dressed_lattice::topology::{ring_character, LevelSet, Topology};

const FIELD_T: f64 = 5.117e-3;

fn units() -> UnitSystem {
    UnitSystem::rubidium_lattice()
}

fn params(depth: f64, coupling_hz: f64, rf_hz: f64) -> DressingParams {
    DressingParams::from_lab(
        LatticeModel::checkerboard(depth).unwrap(),
        coupling_hz,
        rf_hz,
        FIELD_T,
        &units(),
    )
    .unwrap()
}

/// Roots of the characteristic polynomial of a real symmetric 3×3 matrix,
/// trigonometric form, ascending.
fn cubic_roots(a: [[f64; 3]; 3]) -> [f64; 3] {
    let tr = a[0][0] + a[1][1] + a[2][2];
    let minors = a[0][0] * a[1][1] - a[0][1] * a[1][0] + a[0][0] * a[2][2] - a[0][2] * a[2][0] + a[1][1] * a[2][2]
        - a[1][2] * a[2][1];
    let det = a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
    // λ = t + tr/3: t³ + p t + q = 0
    let s = tr / 3.0;
    let p = minors - tr * tr / 3.0;
    let q = -2.0 * s * s * s + minors * s - det;
    if p.abs() < 1e-300 {
        let t = (-q).cbrt();
        return [s + t; 3];
    }
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    let mut r = [0.0; 3];
    for (k, x) in r.iter_mut().enumerate() {
        *x = s + m * (theta - 2.0 * PI * k as f64 / 3.0).cos();
    }
    r.sort_by(f64::total_cmp);
    r
}

#[test]
fn cubic_oracle_matches_at_cell_centre() {
    let p = params(10.0, 205e3, 35.90e6);
    let lat = &p.lattice;
    for r in [[0.0, 0.0], lat.cell_point(0.5, 0.5), [0.31, 0.07], [1.2, -0.4]] {
        let h = h1_matrix(&p, r);
        let oracle = cubic_roots(h);
        let (w, v) = local_eigensystem(&p, r);
        for i in 0..3 {
            assert!((w[i] - oracle[i]).abs() < 1e-9, "{:?} vs {:?}", w, oracle);
            let norm: f64 = v[i].iter().map(|x| x * x).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn surface_invariants_on_grid() {
    let p = params(10.0, 205e3, 35.90e6);
    let s = adiabatic_surfaces(&p, 32).unwrap();
    for k in 0..s.top.len() {
        assert!(s.low[k] <= s.mid[k] && s.mid[k] <= s.top[k]);
        let v = p.lattice.potentials_at(s.positions[k]);
        let trace = v[0] + v[1] + v[2] + p.quadratic_shift;
        assert!((s.low[k] + s.mid[k] + s.top[k] - trace).abs() < 1e-9);
        let norm: f64 = s.top_vectors[k].iter().map(|x| x * x).sum();
        assert!((norm - 1.0).abs() < 1e-12);
    }
}

#[test]
fn top_eigenvector_continuous_between_neighbours() {
    let p = params(10.0, 205e3, 35.90e6);
    let n = 48;
    let s = adiabatic_surfaces(&p, n).unwrap();
    for i in 0..n {
        for j in 0..n {
            let a = s.top_vectors[s.index(i, j)];
            for b in [s.top_vectors[s.index(i + 1, j)], s.top_vectors[s.index(i, j + 1)]] {
                let overlap: f64 = (0..3).map(|k| a[k] * b[k]).sum::<f64>().abs();
                assert!(overlap > 0.5, "overlap {overlap} at ({i}, {j})");
            }
        }
    }
}

#[test]
fn preset_extrema_match_direct_summation() {
    let lat = LatticeModel::checkerboard(10.0).unwrap();
    for spin in Spin::ALL {
        let direct = |r: [f64; 2]| -> f64 {
            lat.table(spin)
                .iter()
                .map(|(&(a, b), c)| {
                    let g = lat.g_vector(a, b);
                    let ph = g[0] * r[0] + g[1] * r[1];
                    c.re * ph.cos() - c.im * ph.sin()
                })
                .sum()
        };
        let extrema = |n: usize, f: &dyn Fn([f64; 2]) -> f64| {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            for i in 0..n {
                for j in 0..n {
                    let v = f(lat.cell_point(i as f64 / n as f64, j as f64 / n as f64));
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            (lo, hi)
        };
        let (lo, hi) = extrema(64, &|r| lat.potential_at(r, spin));
        let (olo, ohi) = extrema(640, &direct);
        assert!((lo - olo).abs() < 1e-9 && (hi - ohi).abs() < 1e-9, "{spin:?}");
    }
}

#[test]
fn gap_at_strong_coupling() {
    let u = units();
    let g = min_gap(&params(10.0, 205e3, 35.90e6)).unwrap();
    let khz = u.energy_to_khz(g.gap);
    assert!((khz - 75.0).abs() <= 15.0, "{khz} kHz");
    let g8 = min_gap(&params(8.0, 205e3, 35.90e6)).unwrap().gap;
    let g16 = min_gap(&params(16.0, 205e3, 35.90e6)).unwrap().gap;
    assert!((g8 - g16).abs() / g8.max(g16) < 0.2);
}

#[test]
fn gap_grid_self_convergence() {
    let p = params(10.0, 205e3, 35.90e6);
    let a = min_gap_on_grid(&p, 64).unwrap().gap;
    let b = min_gap_on_grid(&p, 128).unwrap().gap;
    assert!((a - b).abs() < 1e-3 * b, "{a} vs {b}");
    let p = params(16.0, 205e3, 35.90e6);
    let a = min_gap_on_grid(&p, 64).unwrap().gap;
    let b = min_gap_on_grid(&p, 128).unwrap().gap;
    assert!((a - b).abs() < 1e-3 * b, "{a} vs {b}");
}

#[test]
fn stronger_coupling_flattens_and_opens() {
    let weak = params(10.0, 20e3, 35.90e6);
    let strong = params(10.0, 205e3, 35.90e6);
    let sw = adiabatic_surfaces(&weak, 64).unwrap();
    let ss = adiabatic_surfaces(&strong, 64).unwrap();
    assert!(ss.top_corrugation_along_axis() < sw.top_corrugation_along_axis());
    assert!(min_gap(&strong).unwrap().gap > min_gap(&weak).unwrap().gap);
}

#[test]
fn strong_coupling_top_surface_is_ring_like() {
    let s = adiabatic_surfaces(&params(10.0, 205e3, 35.90e6), 64).unwrap();
    assert_eq!(
        ring_character(&s.top, 64, 64, 0.004, LevelSet::Sublevel).unwrap(),
        Topology::Annular
    );
}

/// Minimum over δ of E_top − E_mid for flat potentials, from the cubic roots.
fn flat_gap_scan(coupling: f64, quadratic_shift: f64) -> f64 {
    let gap = |d: f64| {
        let c = 0.5 * coupling;
        let r = cubic_roots([[-d, c, 0.0], [c, 0.0, c], [0.0, c, d + quadratic_shift]]);
        r[2] - r[1]
    };
    let span = 2.0 * (coupling + quadratic_shift);
    let n = 4000;
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=n {
        let d = -span + 2.0 * span * i as f64 / n as f64;
        let g = gap(d);
        if g < best.0 {
            best = (g, d);
        }
    }
    let h = 2.0 * span / n as f64;
    let (mut a, mut b) = (best.1 - h, best.1 + h);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let x1 = b - phi * (b - a);
        let x2 = a + phi * (b - a);
        if gap(x1) < gap(x2) {
            b = x2;
        } else {
            a = x1;
        }
    }
    gap(0.5 * (a + b))
}

#[test]
fn asymptotes_match_flat_scan() {
    let dq = 376.0;
    let (small, _) = gap_asymptotes(20.0, dq).unwrap();
    let numeric = flat_gap_scan(20.0, dq);
    assert!((numeric - small).abs() / small < 0.1, "{numeric} vs {small}");
    let (_, large) = gap_asymptotes(3760.0, dq).unwrap();
    let numeric = flat_gap_scan(3760.0, dq);
    assert!((numeric - large).abs() / large < 0.05, "{numeric} vs {large}");
    assert!(gap_asymptotes(dq, dq).is_ok());
    // the library's own flat eigenvalues agree with the oracle
    let f = flat_eigenvalues(3760.0, 12.0, dq);
    let o = cubic_roots([[-12.0, 1880.0, 0.0], [1880.0, 0.0, 1880.0], [0.0, 1880.0, 12.0 + dq]]);
    for i in 0..3 {
        assert!((f[i] - o[i]).abs() < 1e-9);
    }
}

/// P₋₁(t) from RK4 integration of the flat three-level Schrödinger equation.
fn population_signal(coupling: f64, detuning: f64, quadratic_shift: f64, dt: f64, steps: usize) -> Vec<f64> {
    type C = (f64, f64);
    let c = 0.5 * coupling;
    let h = [[-detuning, c, 0.0], [c, 0.0, c], [0.0, c, detuning + quadratic_shift]];
    // dψ/dt = −iHψ
    let deriv = |psi: &[C; 3]| -> [C; 3] {
        let mut out = [(0.0, 0.0); 3];
        for i in 0..3 {
            let (mut re, mut im) = (0.0, 0.0);
            for j in 0..3 {
                re += h[i][j] * psi[j].0;
                im += h[i][j] * psi[j].1;
            }
            out[i] = (im, -re);
        }
        out
    };
    let axpy = |a: &[C; 3], s: f64, b: &[C; 3]| -> [C; 3] {
        let mut o = *a;
        for i in 0..3 {
            o[i].0 += s * b[i].0;
            o[i].1 += s * b[i].1;
        }
        o
    };
    let mut psi: [C; 3] = [(1.0, 0.0), (0.0, 0.0), (0.0, 0.0)];
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        out.push(psi[0].0 * psi[0].0 + psi[0].1 * psi[0].1);
        let k1 = deriv(&psi);
        let k2 = deriv(&axpy(&psi, 0.5 * dt, &k1));
        let k3 = deriv(&axpy(&psi, 0.5 * dt, &k2));
        let k4 = deriv(&axpy(&psi, dt, &k3));
        for i in 0..3 {
            psi[i].0 += dt / 6.0 * (k1[i].0 + 2.0 * k2[i].0 + 2.0 * k3[i].0 + k4[i].0);
            psi[i].1 += dt / 6.0 * (k1[i].1 + 2.0 * k2[i].1 + 2.0 * k3[i].1 + k4[i].1);
        }
    }
    out
}

#[test]
fn rabi_frequency_matches_time_evolution() {
    // angular frequencies in rad/ms
    let w = |khz: f64| 2.0 * PI * khz;
    let (om, dq) = (w(200.0), w(376.0));
    let dt = 2e-5;
    let steps = 200_000;
    let stride = 20;
    let signal: Vec<f64> = population_signal(om, 0.0, dq, dt, steps)
        .into_iter()
        .step_by(stride)
        .collect();
    let len = signal.len();
    let mean = signal.iter().sum::<f64>() / len as f64;
    // windowed DFT power, coarse scan then local refinement
    let power = |f: f64| {
        let (mut re, mut im) = (0.0, 0.0);
        for (k, s) in signal.iter().enumerate() {
            let t = (k * stride) as f64 * dt;
            let win = (PI * k as f64 / len as f64).sin().powi(2);
            re += win * (s - mean) * (f * t).cos();
            im -= win * (s - mean) * (f * t).sin();
        }
        re * re + im * im
    };
    let mut best = (0.0, 0.0);
    let mut f = w(20.0);
    while f < w(1000.0) {
        let p = power(f);
        if p > best.0 {
            best = (p, f);
        }
        f += w(0.25);
    }
    let centre = best.1;
    let mut f = centre - w(0.5);
    while f < centre + w(0.5) {
        let p = power(f);
        if p > best.0 {
            best = (p, f);
        }
        f += w(0.01);
    }
    let predicted = rabi_oscillation_frequency(om, 0.0, dq);
    assert!(!predicted.zero_amplitude);
    assert!(
        (best.1 - predicted.frequency).abs() / predicted.frequency < 0.01,
        "{} vs {}",
        best.1,
        predicted.frequency
    );
}
