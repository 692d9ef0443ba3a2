//! Connectivity of level sets of a periodic cell field.
//!
//! The set {f ≤ t} (potentials) or {f ≥ t} (densities) is recentred on its
//! circular mean, so a feature that straddles the periodic boundary is
//! seen whole, and then classified by flood fill on the open window.
//! Set cells use 4-connectivity, complement cells 8-connectivity.

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    SimplyConnected,
    Annular,
    MultipleComponents,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelSet {
    /// {f ≤ t}, for potentials.
    Sublevel,
    /// {f ≥ t}, for densities.
    Superlevel,
}

/// Classify the level set at `min + threshold·(max − min)` of an `n1 × n2`
/// periodic field stored row-major.
pub fn ring_character(field: &[f64], n1: usize, n2: usize, threshold: f64, kind: LevelSet) -> Result<Topology> {
    if field.len() != n1 * n2 || n1 == 0 || n2 == 0 {
        return Err(Error::domain(format!(
            "field has {} samples, expected {n1}×{n2}",
            field.len()
        )));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::domain(format!(
            "threshold fraction must lie in (0, 1), got {threshold}"
        )));
    }
    let lo = field.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = field.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !(hi - lo > 1e-14 * hi.abs().max(lo.abs()).max(1e-300)) {
        return Err(Error::NoLevelStructure);
    }
    let t = lo + threshold * (hi - lo);
    let inside: Vec<bool> = field
        .iter()
        .map(|&v| match kind {
            LevelSet::Sublevel => v <= t,
            LevelSet::Superlevel => v >= t,
        })
        .collect();
    let (s1, s2) = (
        circular_shift(&inside, n1, n2, true),
        circular_shift(&inside, n1, n2, false),
    );
    // window index (a, b) ↔ field index ((a + s1) mod n1, (b + s2) mod n2)
    let at = |a: usize, b: usize| inside[((a + s1) % n1) * n2 + (b + s2) % n2];
    let set: Vec<bool> = (0..n1 * n2).map(|k| at(k / n2, k % n2)).collect();

    let (_, components) = label(&set, n1, n2, true);
    if components != 1 {
        return Ok(Topology::MultipleComponents);
    }
    let complement: Vec<bool> = set.iter().map(|&b| !b).collect();
    let (labels, count) = label(&complement, n1, n2, false);
    let mut touches = vec![false; count];
    for a in 0..n1 {
        for b in 0..n2 {
            if a == 0 || b == 0 || a == n1 - 1 || b == n2 - 1 {
                if let Some(l) = labels[a * n2 + b] {
                    touches[l] = true;
                }
            }
        }
    }
    let holes = touches.iter().filter(|&&t| !t).count();
    Ok(match holes {
        0 => Topology::SimplyConnected,
        1 => Topology::Annular,
        _ => Topology::MultipleComponents,
    })
}

/// Offset that moves the circular mean of the set along one axis to the
/// middle of the window.
fn circular_shift(inside: &[bool], n1: usize, n2: usize, first: bool) -> usize {
    let n = if first { n1 } else { n2 };
    let (mut c, mut s) = (0.0, 0.0);
    for (k, _) in inside.iter().enumerate().filter(|(_, &b)| b) {
        let i = if first { k / n2 } else { k % n2 };
        let phi = 2.0 * PI * i as f64 / n as f64;
        c += phi.cos();
        s += phi.sin();
    }
    let mean = if c == 0.0 && s == 0.0 {
        0.0
    } else {
        s.atan2(c).rem_euclid(2.0 * PI)
    };
    let centre = (mean / (2.0 * PI) * n as f64).round() as i64;
    (centre - (n / 2) as i64).rem_euclid(n as i64) as usize
}

/// Connected-component labels of the `true` cells on the open window.
fn label(mask: &[bool], n1: usize, n2: usize, four: bool) -> (Vec<Option<usize>>, usize) {
    let mut labels = vec![None; mask.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    let steps: &[(i64, i64)] = if four {
        &[(1, 0), (-1, 0), (0, 1), (0, -1)]
    } else {
        &[(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
    };
    for start in 0..mask.len() {
        if !mask[start] || labels[start].is_some() {
            continue;
        }
        labels[start] = Some(count);
        queue.push_back(start);
        while let Some(k) = queue.pop_front() {
            let (a, b) = ((k / n2) as i64, (k % n2) as i64);
            for &(da, db) in steps {
                let (x, y) = (a + da, b + db);
                if x < 0 || y < 0 || x >= n1 as i64 || y >= n2 as i64 {
                    continue;
                }
                let nk = x as usize * n2 + y as usize;
                if mask[nk] && labels[nk].is_none() {
                    labels[nk] = Some(count);
                    queue.push_back(nk);
                }
            }
        }
        count += 1;
    }
    (labels, count)
}
