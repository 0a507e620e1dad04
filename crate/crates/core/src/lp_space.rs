//! Compactly supported grid step functions as concrete elements of the
//! weighted L^p space over the sector, with the translation operators `T_t`
//! and the forward shifts `S_t` acting on them as exact index maps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sector_geometry::{Sector, SectorPoint};
use crate::weights::WeightFn;

/// A dyadic cell side `num / 2^k`, stored exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellSize {
    num: u32,
    den: u32,
}

impl CellSize {
    pub fn new(num: u32, den: u32) -> Result<Self> {
        if num == 0 || den == 0 || !den.is_power_of_two() {
            return Err(Error::Input(format!(
                "cell side must be num/2^k with num ≥ 1, got {num}/{den}"
            )));
        }
        Ok(CellSize { num, den })
    }

    /// The default desk-scale cell side 1/8.
    pub fn eighth() -> Self {
        CellSize { num: 1, den: 8 }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn parse(s: &str) -> Result<Self> {
        let (num, den) = match s.split_once('/') {
            Some((n, d)) => (
                n.trim().parse::<u32>().map_err(|e| Error::Input(e.to_string()))?,
                d.trim().parse::<u32>().map_err(|e| Error::Input(e.to_string()))?,
            ),
            None => (
                s.trim().parse::<u32>().map_err(|e| Error::Input(e.to_string()))?,
                1,
            ),
        };
        CellSize::new(num, den)
    }
}

impl std::fmt::Display for CellSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// A finitely supported step function `f = Σ c_{ij}·1_cell(i,j)` restricted
/// to the sector by cell-center membership.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    sector: Sector,
    h: CellSize,
    cells: BTreeMap<(i64, i64), f64>,
    support_radius: f64,
}

/// JSON document for a grid function; cells are kept in lexicographic index
/// order so the document round-trips bit-exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridFunctionDoc {
    pub alpha: f64,
    pub h: String,
    pub cells: Vec<(i64, i64, f64)>,
}

impl GridFunction {
    pub fn zero(sector: Sector, h: CellSize) -> Self {
        GridFunction {
            sector,
            h,
            cells: BTreeMap::new(),
            support_radius: 0.0,
        }
    }

    /// Builds from raw cells, dropping zeros and rejecting cells whose
    /// center is outside the sector or whose coefficient is not finite.
    pub fn from_cells<I>(sector: Sector, h: CellSize, cells: I) -> Result<Self>
    where
        I: IntoIterator<Item = ((i64, i64), f64)>,
    {
        let mut map = BTreeMap::new();
        for ((i, j), c) in cells {
            if !c.is_finite() {
                return Err(Error::Input(format!("non-finite coefficient at ({i}, {j})")));
            }
            if c == 0.0 {
                continue;
            }
            let center = cell_center(h, i, j);
            if !sector.contains(center) {
                return Err(Error::Input(format!(
                    "cell ({i}, {j}) has center outside the sector"
                )));
            }
            map.insert((i, j), c);
        }
        Ok(Self::assemble(sector, h, map))
    }

    fn assemble(sector: Sector, h: CellSize, cells: BTreeMap<(i64, i64), f64>) -> Self {
        let support_radius = cells
            .keys()
            .map(|&(i, j)| cell_center(h, i, j).norm())
            .fold(0.0f64, f64::max)
            + if cells.is_empty() { 0.0 } else { h.value() };
        GridFunction {
            sector,
            h,
            cells,
            support_radius,
        }
    }

    /// Indicator of the truncation `Δ_r` (cells with center in the sector
    /// and within radius `r`), scaled by `value`.
    pub fn truncation_indicator(sector: Sector, h: CellSize, radius: f64, value: f64) -> Result<Self> {
        if !(radius > 0.0) || !value.is_finite() {
            return Err(Error::Input(format!(
                "indicator requires radius > 0 and a finite value, got {radius}, {value}"
            )));
        }
        let hv = h.value();
        let max_index = (radius / hv).ceil() as i64 + 1;
        let mut cells = BTreeMap::new();
        for i in 0..=max_index {
            for j in -max_index..=max_index {
                let center = cell_center(h, i, j);
                if sector.contains(center) && center.norm() <= radius && value != 0.0 {
                    cells.insert((i, j), value);
                }
            }
        }
        Ok(Self::assemble(sector, h, cells))
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn cell_size(&self) -> CellSize {
        self.h
    }

    pub fn cells(&self) -> &BTreeMap<(i64, i64), f64> {
        &self.cells
    }

    /// `s_f`: largest support cell-center radius plus one cell side.
    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// `M_f`: largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.cells.values().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.cells.is_empty()
    }

    /// Integer grid offset of a grid-aligned sector point.
    pub fn align(&self, t: SectorPoint) -> Result<(i64, i64)> {
        let hv = self.h.value();
        let a = (t.x / hv).round();
        let b = (t.y / hv).round();
        let tol = 1e-9 * (1.0 + t.norm());
        if (a * hv - t.x).abs() > tol || (b * hv - t.y).abs() > tol {
            return Err(Error::Alignment {
                x: t.x,
                y: t.y,
                h: hv,
            });
        }
        if !self.sector.contains(t) {
            return Err(Error::Input(format!(
                "translation offset ({}, {}) lies outside the sector",
                t.x, t.y
            )));
        }
        Ok((a as i64, b as i64))
    }

    /// Nearest grid-aligned point to `p`.
    pub fn snap(&self, p: SectorPoint) -> SectorPoint {
        let hv = self.h.value();
        SectorPoint {
            x: (p.x / hv).round() * hv,
            y: (p.y / hv).round() * hv,
        }
    }

    /// `(T_t f)(x) = f(x + t)` for grid-aligned `t`, exact on indices;
    /// cells whose shifted center leaves the sector are dropped.
    pub fn translate(&self, t: SectorPoint) -> Result<GridFunction> {
        let (a, b) = self.align(t)?;
        let mut cells = BTreeMap::new();
        for (&(i, j), &c) in &self.cells {
            let key = (i - a, j - b);
            if self.sector.contains(cell_center(self.h, key.0, key.1)) {
                cells.insert(key, c);
            }
        }
        Ok(Self::assemble(self.sector, self.h, cells))
    }

    /// Forward shift `(S_t f)(τ) = f(τ - t)` on `t + Δ`, zero elsewhere,
    /// for grid-aligned `t`; exact on indices.
    pub fn backshift(&self, t: SectorPoint) -> Result<GridFunction> {
        let (a, b) = self.align(t)?;
        let mut cells = BTreeMap::new();
        for (&(i, j), &c) in &self.cells {
            let key = (i + a, j + b);
            let center = cell_center(self.h, key.0, key.1);
            if self.sector.contains(center) && self.sector.contains(center.sub(t)) {
                cells.insert(key, c);
            }
        }
        Ok(Self::assemble(self.sector, self.h, cells))
    }

    /// Pointwise linear combination; cells cancelling to exactly zero are
    /// pruned.
    pub fn lincomb(coeffs: &[f64], fs: &[&GridFunction]) -> Result<GridFunction> {
        if coeffs.len() != fs.len() || fs.is_empty() {
            return Err(Error::Input(
                "lincomb requires matching, nonempty coefficient and function lists".into(),
            ));
        }
        let first = fs[0];
        for f in fs {
            if f.h != first.h || f.sector != first.sector {
                return Err(Error::Input(
                    "lincomb requires a shared sector and grid".into(),
                ));
            }
        }
        let mut cells: BTreeMap<(i64, i64), f64> = BTreeMap::new();
        for (&coeff, &f) in coeffs.iter().zip(fs) {
            for (&key, &c) in &f.cells {
                *cells.entry(key).or_insert(0.0) += coeff * c;
            }
        }
        cells.retain(|_, c| *c != 0.0);
        Ok(Self::assemble(first.sector, first.h, cells))
    }

    pub fn scale(&self, factor: f64) -> Result<GridFunction> {
        Self::lincomb(&[factor], &[self])
    }

    pub fn to_doc(&self) -> GridFunctionDoc {
        GridFunctionDoc {
            alpha: self.sector.alpha(),
            h: self.h.to_string(),
            cells: self.cells.iter().map(|(&(i, j), &c)| (i, j, c)).collect(),
        }
    }

    pub fn from_doc(doc: &GridFunctionDoc) -> Result<Self> {
        let sector = Sector::new(doc.alpha)?;
        let h = CellSize::parse(&doc.h)?;
        Self::from_cells(sector, h, doc.cells.iter().map(|&(i, j, c)| ((i, j), c)))
    }
}

pub(crate) fn cell_center(h: CellSize, i: i64, j: i64) -> SectorPoint {
    let hv = h.value();
    SectorPoint {
        x: (i as f64 + 0.5) * hv,
        y: (j as f64 + 0.5) * hv,
    }
}

/// Exponent and weight fixing the ambient L^p space; per-cell midpoint
/// quadrature for the weighted norm.
#[derive(Clone)]
pub struct LpContext {
    p: f64,
    weight: WeightFn,
}

impl LpContext {
    pub fn new(p: f64, weight: WeightFn) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::Input(format!("exponent must satisfy 1 ≤ p < ∞, got {p}")));
        }
        Ok(LpContext { p, weight })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn weight(&self) -> &WeightFn {
        &self.weight
    }

    /// `(Σ |c_{ij}|^p ρ(center) h²)^{1/p}`, summed in index order.
    pub fn norm(&self, f: &GridFunction) -> Result<f64> {
        if f.sector() != self.weight.sector() {
            return Err(Error::Input(
                "grid function and context sectors differ".into(),
            ));
        }
        let h2 = f.cell_size().value().powi(2);
        let mut acc = 0.0;
        for (&(i, j), &c) in f.cells() {
            let center = cell_center(f.cell_size(), i, j);
            acc += c.abs().powf(self.p) * self.weight.eval_checked(center)? * h2;
        }
        Ok(acc.powf(1.0 / self.p))
    }

    /// Checks `‖T_t f‖ ≤ (M e^{ω|t|})^{1/p} ‖f‖` with 1% quadrature slack.
    pub fn growth_bound_check(&self, f: &GridFunction, t: SectorPoint) -> Result<bool> {
        let (m, omega) = self.weight.constants();
        let lhs = self.norm(&f.translate(t)?)?;
        let rhs = (m * (omega * t.norm()).exp()).powf(1.0 / self.p) * self.norm(f)?;
        Ok(lhs <= rhs * 1.01 + 1e-12)
    }
}
