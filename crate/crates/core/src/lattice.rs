//! State-dependent 2D lattice potentials as truncated Fourier series.
//!
//! V_mF(r) = Σ_G c_mF(G) exp(iG·r), with G = n₁b₁ + n₂b₂ and the reciprocal
//! vectors b given in units of k. Positions are in units of 1/k and
//! potentials in E_R. The nominal depth U is the peak-to-valley depth of
//! V₋₁.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

/// Largest |n₁|, |n₂| accepted in user tables.
pub const MAX_HARMONIC: i32 = 16;
/// Tolerance for the conjugate-symmetry check.
const SYMMETRY_TOL: f64 = 1e-12;
/// Allowed mismatch between a declared and an evaluated depth.
pub const DEPTH_TOL: f64 = 1e-6;

pub const DEFAULT_PRESET: &str = "checkerboard-default";

/// Magnetic sublevel of the F = 1 manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Spin {
    Minus,
    Zero,
    Plus,
}

impl Spin {
    pub const ALL: [Spin; 3] = [Spin::Minus, Spin::Zero, Spin::Plus];

    pub fn from_m(m: i32) -> Result<Self> {
        match m {
            -1 => Ok(Spin::Minus),
            0 => Ok(Spin::Zero),
            1 => Ok(Spin::Plus),
            other => Err(Error::InvalidSpin(other)),
        }
    }

    pub fn m(self) -> i32 {
        self.index() as i32 - 1
    }

    /// Position in (−1, 0, +1) ordering.
    pub fn index(self) -> usize {
        match self {
            Spin::Minus => 0,
            Spin::Zero => 1,
            Spin::Plus => 2,
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            Spin::Minus => "mF=-1",
            Spin::Zero => "mF=0",
            Spin::Plus => "mF=+1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    CheckerboardDefault,
    Custom,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::CheckerboardDefault => DEFAULT_PRESET,
            Preset::Custom => "custom",
        }
    }
}

/// Fourier coefficients of one spin component, keyed by (n₁, n₂).
pub type FourierTable = BTreeMap<(i32, i32), Complex64>;

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeModel {
    reciprocal: [[f64; 2]; 2],
    tables: [FourierTable; 3],
    depth: f64,
    preset: Preset,
}

impl LatticeModel {
    /// Named preset calibrated to depth `depth` (E_R).
    pub fn build_preset(name: &str, depth: f64) -> Result<Self> {
        match name {
            DEFAULT_PRESET => Self::checkerboard(depth),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    /// Square lattice of period λ/2 with V_mF = (1 + 4m_F) s₀ [cos 2kx + cos 2ky].
    ///
    /// Scalar and vector patterns share one spatial profile, so the ±1
    /// potentials are anti-aligned and every extremum carries the
    /// −3 : 1 : 5 ratio. s₀ = U/12 fixes the V₋₁ depth to U.
    pub fn checkerboard(depth: f64) -> Result<Self> {
        if !(depth >= 0.0) || !depth.is_finite() {
            return Err(Error::domain(format!(
                "lattice depth must be non-negative, got {depth}"
            )));
        }
        let s0 = depth / 12.0;
        let mut tables: [FourierTable; 3] = Default::default();
        for spin in Spin::ALL {
            let amp = (1.0 + 4.0 * spin.m() as f64) * s0;
            let table = &mut tables[spin.index()];
            if amp != 0.0 {
                for g in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                    table.insert(g, Complex64::new(0.5 * amp, 0.0));
                }
            }
        }
        Ok(Self {
            reciprocal: [[2.0, 0.0], [0.0, 2.0]],
            tables,
            depth,
            preset: Preset::CheckerboardDefault,
        })
    }

    /// User tables; validated for conjugate symmetry and harmonic range.
    /// The nominal depth is the evaluated V₋₁ depth.
    pub fn from_tables(reciprocal: [[f64; 2]; 2], tables: [FourierTable; 3]) -> Result<Self> {
        let cross = reciprocal[0][0] * reciprocal[1][1] - reciprocal[0][1] * reciprocal[1][0];
        if !(cross.abs() > 1e-12) || reciprocal.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::document(
                "lattice.reciprocal_vectors_k",
                "reciprocal vectors must be finite and linearly independent",
            ));
        }
        for spin in Spin::ALL {
            validate_table(&tables[spin.index()], &format!("lattice.coefficients.{}", spin.key()))?;
        }
        let mut model = Self {
            reciprocal,
            tables,
            depth: 0.0,
            preset: Preset::Custom,
        };
        model.depth = model.measured_depth(Spin::Minus);
        Ok(model)
    }

    pub fn preset(&self) -> Preset {
        self.preset
    }

    /// Nominal depth U (E_R).
    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn reciprocal_vectors(&self) -> [[f64; 2]; 2] {
        self.reciprocal
    }

    /// Primitive direct vectors a_i with a_i·b_j = 2π δ_ij.
    pub fn direct_vectors(&self) -> [[f64; 2]; 2] {
        let [b1, b2] = self.reciprocal;
        let det = b1[0] * b2[1] - b1[1] * b2[0];
        let s = 2.0 * PI / det;
        [[b2[1] * s, -b2[0] * s], [-b1[1] * s, b1[0] * s]]
    }

    /// Cartesian position of fractional cell coordinates (f₁, f₂).
    pub fn cell_point(&self, f1: f64, f2: f64) -> [f64; 2] {
        let [a1, a2] = self.direct_vectors();
        [f1 * a1[0] + f2 * a2[0], f1 * a1[1] + f2 * a2[1]]
    }

    pub fn cell_area(&self) -> f64 {
        let [a1, a2] = self.direct_vectors();
        (a1[0] * a2[1] - a1[1] * a2[0]).abs()
    }

    /// Cartesian reciprocal vector for integer indices.
    pub fn g_vector(&self, n1: i32, n2: i32) -> [f64; 2] {
        let [b1, b2] = self.reciprocal;
        [
            n1 as f64 * b1[0] + n2 as f64 * b2[0],
            n1 as f64 * b1[1] + n2 as f64 * b2[1],
        ]
    }

    pub fn table(&self, spin: Spin) -> &FourierTable {
        &self.tables[spin.index()]
    }

    pub fn coefficient(&self, spin: Spin, n1: i32, n2: i32) -> Complex64 {
        self.tables[spin.index()].get(&(n1, n2)).copied().unwrap_or_default()
    }

    /// Largest |n| present in any table.
    pub fn max_harmonic(&self) -> i32 {
        self.tables
            .iter()
            .flat_map(|t| t.keys())
            .map(|&(a, b)| a.abs().max(b.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Full complex Fourier sum; its imaginary part vanishes for valid tables.
    pub fn evaluate_complex(&self, r: [f64; 2], spin: Spin) -> Complex64 {
        self.tables[spin.index()]
            .iter()
            .map(|(&(n1, n2), &c)| {
                let g = self.g_vector(n1, n2);
                c * Complex64::from_polar(1.0, g[0] * r[0] + g[1] * r[1])
            })
            .sum()
    }

    pub fn potential_at(&self, r: [f64; 2], spin: Spin) -> f64 {
        // pair ±G so the sum is real term by term
        self.tables[spin.index()]
            .iter()
            .map(|(&(n1, n2), &c)| {
                let g = self.g_vector(n1, n2);
                let phase = g[0] * r[0] + g[1] * r[1];
                c.re * phase.cos() - c.im * phase.sin()
            })
            .sum()
    }

    /// Integer m_F entry point.
    pub fn potential_at_m(&self, r: [f64; 2], m_f: i32) -> Result<f64> {
        Ok(self.potential_at(r, Spin::from_m(m_f)?))
    }

    pub fn potentials_at(&self, r: [f64; 2]) -> [f64; 3] {
        Spin::ALL.map(|s| self.potential_at(r, s))
    }

    /// ∇V_mF(r) in E_R·k.
    pub fn gradient_at(&self, r: [f64; 2], spin: Spin) -> [f64; 2] {
        let mut grad = [0.0; 2];
        for (&(n1, n2), &c) in &self.tables[spin.index()] {
            let g = self.g_vector(n1, n2);
            let phase = g[0] * r[0] + g[1] * r[1];
            // d/dr Re[c e^{iφ}] = −(c.re sin φ + c.im cos φ) G
            let d = -(c.re * phase.sin() + c.im * phase.cos());
            grad[0] += d * g[0];
            grad[1] += d * g[1];
        }
        grad
    }

    /// Peak-to-valley depth of one component, from a dense grid scan
    /// refined locally around the extrema.
    pub fn measured_depth(&self, spin: Spin) -> f64 {
        let (lo, hi) = self.extrema(spin);
        hi - lo
    }

    fn extrema(&self, spin: Spin) -> (f64, f64) {
        if self.tables[spin.index()].is_empty() {
            return (0.0, 0.0);
        }
        let n = 128usize;
        let f = |f1: f64, f2: f64| self.potential_at(self.cell_point(f1, f2), spin);
        let mut best_lo = (f64::INFINITY, 0.0, 0.0);
        let mut best_hi = (f64::NEG_INFINITY, 0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let (f1, f2) = (i as f64 / n as f64, j as f64 / n as f64);
                let v = f(f1, f2);
                if v < best_lo.0 {
                    best_lo = (v, f1, f2);
                }
                if v > best_hi.0 {
                    best_hi = (v, f1, f2);
                }
            }
        }
        let lo = refine_minimum(&|a, b| f(a, b), best_lo, 1.0 / n as f64).0;
        let hi = -refine_minimum(&|a, b| -f(a, b), (-best_hi.0, best_hi.1, best_hi.2), 1.0 / n as f64).0;
        (lo, hi)
    }

    /// Location and value of the global minimum of V_s over the cell.
    pub fn minimum(&self, spin: Spin) -> ([f64; 2], f64) {
        let n = 128usize;
        let f = |f1: f64, f2: f64| self.potential_at(self.cell_point(f1, f2), spin);
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                let (f1, f2) = (i as f64 / n as f64, j as f64 / n as f64);
                let v = f(f1, f2);
                if v < best.0 {
                    best = (v, f1, f2);
                }
            }
        }
        let (v, f1, f2) = refine_minimum(&|a, b| f(a, b), best, 1.0 / n as f64);
        (self.cell_point(f1, f2), v)
    }

    /// Hessian ∂ᵢ∂ⱼV_s at r (E_R k²).
    pub fn hessian_at(&self, r: [f64; 2], spin: Spin) -> [[f64; 2]; 2] {
        let mut h = [[0.0; 2]; 2];
        for (&(n1, n2), &c) in &self.tables[spin.index()] {
            let g = self.g_vector(n1, n2);
            let phase = Complex64::from_polar(1.0, g[0] * r[0] + g[1] * r[1]);
            let v = -(c * phase).re;
            for i in 0..2 {
                for j in 0..2 {
                    h[i][j] += v * g[i] * g[j];
                }
            }
        }
        h
    }

    /// The same model with every coefficient multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for t in out.tables.iter_mut() {
            for c in t.values_mut() {
                *c *= factor;
            }
        }
        out.depth *= factor.abs();
        out
    }

    /// The same model with `shift` (E_R) added to all three potentials.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut out = self.clone();
        for t in out.tables.iter_mut() {
            *t.entry((0, 0)).or_default() += Complex64::new(shift, 0.0);
        }
        out.preset = Preset::Custom;
        out
    }

    /// Load the `lattice` block of a configuration document.
    pub fn from_document_str(doc: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(doc).map_err(|e| Error::document("$", format!("malformed JSON: {e}")))?;
        let block = value
            .get("lattice")
            .ok_or_else(|| Error::document("lattice", "missing required key"))?;
        Self::from_value(block, "lattice")
    }

    /// Parse a lattice block located at JSON path `path`.
    pub fn from_value(block: &Value, path: &str) -> Result<Self> {
        let obj = block
            .as_object()
            .ok_or_else(|| Error::document(path, "expected an object"))?;
        for key in obj.keys() {
            if !matches!(
                key.as_str(),
                "preset" | "depth_Er" | "coefficients" | "reciprocal_vectors_k"
            ) {
                return Err(Error::document(format!("{path}.{key}"), "unknown key"));
            }
        }
        let preset = match obj.get("preset") {
            None => DEFAULT_PRESET,
            Some(Value::String(s)) => s.as_str(),
            Some(_) => return Err(Error::document(format!("{path}.preset"), "expected a string")),
        };
        let depth = match obj.get("depth_Er") {
            None => None,
            Some(v) => Some(
                v.as_f64()
                    .ok_or_else(|| Error::document(format!("{path}.depth_Er"), "expected a number"))?,
            ),
        };
        if preset != "custom" {
            if obj.contains_key("coefficients") {
                return Err(Error::document(
                    format!("{path}.coefficients"),
                    "coefficients are only allowed with preset \"custom\"",
                ));
            }
            let depth = depth.ok_or_else(|| Error::document(format!("{path}.depth_Er"), "missing required key"))?;
            return Self::build_preset(preset, depth).map_err(|e| match e {
                Error::UnknownPreset(name) => {
                    Error::document(format!("{path}.preset"), format!("unknown preset `{name}`"))
                }
                Error::Domain(msg) => Error::document(format!("{path}.depth_Er"), msg),
                other => other,
            });
        }
        let reciprocal = match obj.get("reciprocal_vectors_k") {
            None => [[2.0, 0.0], [0.0, 2.0]],
            Some(v) => parse_vectors(v, &format!("{path}.reciprocal_vectors_k"))?,
        };
        let coeffs = obj
            .get("coefficients")
            .ok_or_else(|| Error::document(format!("{path}.coefficients"), "missing required key"))?
            .as_object()
            .ok_or_else(|| Error::document(format!("{path}.coefficients"), "expected an object"))?;
        for key in coeffs.keys() {
            if !Spin::ALL.iter().any(|s| s.key() == key) {
                return Err(Error::document(
                    format!("{path}.coefficients.{key}"),
                    "unknown spin key (expected mF=-1, mF=0, mF=+1)",
                ));
            }
        }
        let mut tables: [FourierTable; 3] = Default::default();
        for spin in Spin::ALL {
            let p = format!("{path}.coefficients.{}", spin.key());
            if let Some(entries) = coeffs.get(spin.key()) {
                tables[spin.index()] = parse_table(entries, &p)?;
            }
        }
        let mut model = Self::from_tables(reciprocal, tables).map_err(|e| match e {
            Error::Document { path: p, message } => Error::Document {
                path: p.replacen("lattice", path, 1),
                message,
            },
            other => other,
        })?;
        if let Some(d) = depth {
            if (d - model.depth).abs() > DEPTH_TOL * d.abs().max(1.0) {
                return Err(Error::document(
                    format!("{path}.depth_Er"),
                    format!("declared depth {d} E_R but V(mF=-1) evaluates to {} E_R", model.depth),
                ));
            }
            model.depth = d;
        }
        Ok(model)
    }

    /// Serialize as a lattice block. Presets keep their compact form unless
    /// `explicit` asks for the coefficient tables.
    pub fn to_value(&self, explicit: bool) -> Value {
        if self.preset == Preset::CheckerboardDefault && !explicit {
            return json!({ "preset": DEFAULT_PRESET, "depth_Er": self.depth });
        }
        let mut coeffs = Map::new();
        for spin in Spin::ALL {
            let rows: Vec<Value> = self.tables[spin.index()]
                .iter()
                .map(|(&(n1, n2), c)| json!([n1, n2, c.re, c.im]))
                .collect();
            coeffs.insert(spin.key().to_string(), Value::Array(rows));
        }
        json!({
            "preset": "custom",
            "depth_Er": self.depth,
            "reciprocal_vectors_k": self.reciprocal,
            "coefficients": coeffs,
        })
    }

    /// Same tables and geometry (ignores preset tag and nominal depth).
    pub fn same_potentials(&self, other: &Self) -> bool {
        self.reciprocal == other.reciprocal && self.tables == other.tables
    }
}

/// Nested pattern search around a grid minimum of a smooth cell function.
/// Returns (value, f1, f2).
pub(crate) fn refine_minimum(f: &dyn Fn(f64, f64) -> f64, start: (f64, f64, f64), spacing: f64) -> (f64, f64, f64) {
    let (mut best, mut x, mut y) = start;
    let mut h = spacing;
    for _ in 0..60 {
        let prev = best;
        let (cx, cy) = (x, y);
        for i in -2..=2 {
            for j in -2..=2 {
                let (px, py) = (cx + i as f64 * h * 0.5, cy + j as f64 * h * 0.5);
                let v = f(px, py);
                if v < best {
                    best = v;
                    x = px;
                    y = py;
                }
            }
        }
        h *= 0.5;
        if h < 1e-13 || ((prev - best).abs() < 1e-15 * best.abs().max(1.0) && h < 1e-6) {
            break;
        }
    }
    (best, x, y)
}

fn validate_table(table: &FourierTable, path: &str) -> Result<()> {
    let scale = table.values().map(|c| c.norm()).fold(1.0, f64::max);
    for (&(n1, n2), &c) in table {
        if n1.abs() > MAX_HARMONIC || n2.abs() > MAX_HARMONIC {
            return Err(Error::document(
                path,
                format!("harmonic G=({n1},{n2}) exceeds |n| <= {MAX_HARMONIC}"),
            ));
        }
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::document(
                path,
                format!("non-finite coefficient at G=({n1},{n2})"),
            ));
        }
        let partner = table.get(&(-n1, -n2)).copied().unwrap_or_default();
        if (partner - c.conj()).norm() > SYMMETRY_TOL * scale {
            return Err(Error::document(
                path,
                format!("table is not conjugate-symmetric at G=({n1},{n2}): c(G)={c}, c(-G)={partner}"),
            ));
        }
    }
    Ok(())
}

fn parse_vectors(v: &Value, path: &str) -> Result<[[f64; 2]; 2]> {
    let rows = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| Error::document(path, "expected [[b1x,b1y],[b2x,b2y]]"))?;
    let mut out = [[0.0; 2]; 2];
    for (i, row) in rows.iter().enumerate() {
        let xs = row
            .as_array()
            .filter(|a| a.len() == 2)
            .ok_or_else(|| Error::document(format!("{path}[{i}]"), "expected two numbers"))?;
        for (j, x) in xs.iter().enumerate() {
            out[i][j] = x
                .as_f64()
                .ok_or_else(|| Error::document(format!("{path}[{i}][{j}]"), "expected a number"))?;
        }
    }
    Ok(out)
}

fn parse_table(v: &Value, path: &str) -> Result<FourierTable> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::document(path, "expected an array of [n1, n2, re, im]"))?;
    let mut table = FourierTable::new();
    for (i, row) in rows.iter().enumerate() {
        let p = format!("{path}[{i}]");
        let xs = row
            .as_array()
            .filter(|a| a.len() == 4)
            .ok_or_else(|| Error::document(&p, "expected [n1, n2, re, im]"))?;
        let n1 = xs[0]
            .as_i64()
            .ok_or_else(|| Error::document(format!("{p}[0]"), "expected an integer"))?;
        let n2 = xs[1]
            .as_i64()
            .ok_or_else(|| Error::document(format!("{p}[1]"), "expected an integer"))?;
        let re = xs[2]
            .as_f64()
            .ok_or_else(|| Error::document(format!("{p}[2]"), "expected a number"))?;
        let im = xs[3]
            .as_f64()
            .ok_or_else(|| Error::document(format!("{p}[3]"), "expected a number"))?;
        let key = (n1 as i32, n2 as i32);
        if table.insert(key, Complex64::new(re, im)).is_some() {
            return Err(Error::document(&p, format!("duplicate entry for G=({n1},{n2})")));
        }
    }
    Ok(table)
}
