//! Lower densities: finite-horizon integer lower density, the
//! area-normalized lower density of measurable subsets of the sector, and
//! the separated integer/point families feeding the criterion engine.

use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;
use crate::sector_geometry::{Sector, SectorPoint};

const ANGLE_EPS: f64 = 1e-9;

/// Exactly representable building blocks of a measurable subset of the
/// sector. Every primitive denotes its intersection with the ambient sector.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Primitive {
    /// `{p ∈ Δ : theta1 ≤ arg p ≤ theta2}`, clipped to `[-alpha, alpha]`.
    SubSector { theta1: f64, theta2: f64 },
    /// A point-anchored copy `b + Δ_delta` of the truncated sector.
    Anchored { x: f64, y: f64, delta: f64 },
    /// A disc intersected with the sector.
    Disc { x: f64, y: f64, radius: f64 },
    /// The half-plane cut `{p ∈ Δ : a·x + b·y ≤ c}`.
    HalfPlane { a: f64, b: f64, c: f64 },
}

impl Primitive {
    fn contains(&self, sector: &Sector, p: SectorPoint) -> bool {
        match *self {
            Primitive::SubSector { theta1, theta2 } => {
                if !sector.contains(p) {
                    return false;
                }
                if p.x == 0.0 && p.y == 0.0 {
                    return true;
                }
                let ang = p.y.atan2(p.x);
                ang >= theta1 - ANGLE_EPS && ang <= theta2 + ANGLE_EPS
            }
            Primitive::Anchored { x, y, delta } => {
                let q = p.sub(SectorPoint { x, y });
                sector.contains(q) && q.norm() <= delta + 1e-12
            }
            Primitive::Disc { x, y, radius } => {
                sector.contains(p) && p.dist(SectorPoint { x, y }) <= radius + 1e-12
            }
            Primitive::HalfPlane { a, b, c } => sector.contains(p) && a * p.x + b * p.y <= c + 1e-12,
        }
    }

    /// Bounding disc (center, radius), when the primitive is bounded.
    fn bounding_disc(&self) -> Option<(SectorPoint, f64)> {
        match *self {
            Primitive::Anchored { x, y, delta } => Some((SectorPoint { x, y }, delta)),
            Primitive::Disc { x, y, radius } => Some((SectorPoint { x, y }, radius)),
            _ => None,
        }
    }

    /// Area of the primitive inside `Δ_t`. Closed forms where available;
    /// deterministic midpoint grids otherwise.
    fn area_in_truncation(&self, sector: &Sector, t: f64) -> f64 {
        let alpha = sector.alpha();
        match *self {
            Primitive::SubSector { theta1, theta2 } => {
                let span = (theta2 - theta1).max(0.0);
                0.5 * span * t * t
            }
            Primitive::Anchored { x, y, delta } => {
                let anchor = SectorPoint { x, y };
                let d = anchor.norm();
                if d + delta <= t {
                    return alpha * delta * delta;
                }
                if d - delta >= t {
                    return 0.0;
                }
                // partial overlap near |p| = t: midpoint grid in (r², θ)
                // over the copy's own polar coordinates
                grid_area(alpha * delta * delta, |u, v| {
                    let r = delta * u.sqrt();
                    let theta = -alpha + 2.0 * alpha * v;
                    let p = SectorPoint {
                        x: anchor.x + r * theta.cos(),
                        y: anchor.y + r * theta.sin(),
                    };
                    p.norm() <= t
                })
            }
            Primitive::Disc {
                x,
                y,
                radius,
            } => {
                let center = SectorPoint { x, y };
                let d = center.norm();
                if d - radius >= t {
                    return 0.0;
                }
                grid_area(std::f64::consts::PI * radius * radius, |u, v| {
                    let r = radius * u.sqrt();
                    let theta = 2.0 * std::f64::consts::PI * v;
                    let p = SectorPoint {
                        x: center.x + r * theta.cos(),
                        y: center.y + r * theta.sin(),
                    };
                    sector.contains(p) && p.norm() <= t
                })
            }
            Primitive::HalfPlane { a, b, c } => {
                // for fixed θ the admissible radii form an interval; Simpson
                // over θ of the interval's ∫ r dr contribution
                let panels = 2048;
                let f = |theta: f64| {
                    let d = a * theta.cos() + b * theta.sin();
                    radial_interval_mass(d, c, t)
                };
                composite_simpson(-alpha, alpha, panels, f)
            }
        }
    }
}

/// `∫ r dr` over `{r ∈ [0, t] : r·d ≤ c}`.
fn radial_interval_mass(d: f64, c: f64, t: f64) -> f64 {
    if d > 0.0 {
        if c < 0.0 {
            0.0
        } else {
            let rmax = (c / d).min(t);
            0.5 * rmax * rmax
        }
    } else if d == 0.0 {
        if c >= 0.0 {
            0.5 * t * t
        } else {
            0.0
        }
    } else if c >= 0.0 {
        0.5 * t * t
    } else {
        let r0 = (c / d).min(t);
        0.5 * (t * t - r0 * r0)
    }
}

fn composite_simpson<F: Fn(f64) -> f64>(a: f64, b: f64, panels: usize, f: F) -> f64 {
    let n = panels * 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Deterministic midpoint grid over a parameter square, scaled by the
/// domain's total mass.
fn grid_area<F: Fn(f64, f64) -> bool>(total: f64, indicator: F) -> f64 {
    const N: usize = 48;
    let mut hits = 0usize;
    for i in 0..N {
        let u = (i as f64 + 0.5) / N as f64;
        for j in 0..N {
            let v = (j as f64 + 0.5) / N as f64;
            if indicator(u, v) {
                hits += 1;
            }
        }
    }
    total * hits as f64 / (N * N) as f64
}

/// Membership oracle for a predicate-represented set.
pub type PredicateFn = Arc<dyn Fn(SectorPoint) -> bool + Send + Sync>;

#[derive(Clone)]
enum Repr {
    Exact(Vec<Primitive>),
    Predicate(PredicateFn),
}

/// A measurable subset of the sector, given either exactly as a finite union
/// of primitives or as a deterministic membership predicate.
#[derive(Clone)]
pub struct SectorSet {
    sector: Sector,
    repr: Repr,
}

/// JSON document for exactly represented sets.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorSetDoc {
    pub alpha: f64,
    pub primitives: Vec<Primitive>,
}

impl SectorSet {
    /// Exact representation. Sub-sector primitives are clipped to the
    /// ambient angular range on construction.
    pub fn exact(sector: Sector, primitives: Vec<Primitive>) -> Result<Self> {
        let alpha = sector.alpha();
        let mut clipped = Vec::with_capacity(primitives.len());
        for prim in primitives {
            match prim {
                Primitive::SubSector { theta1, theta2 } => {
                    if !theta1.is_finite() || !theta2.is_finite() || theta1 > theta2 {
                        return Err(Error::Input(format!(
                            "invalid sub-sector angles [{theta1}, {theta2}]"
                        )));
                    }
                    clipped.push(Primitive::SubSector {
                        theta1: theta1.max(-alpha),
                        theta2: theta2.min(alpha),
                    });
                }
                Primitive::Anchored { x, y, delta } => {
                    let p = SectorPoint::new(x, y)?;
                    if !sector.contains(p) || !(delta > 0.0) || !delta.is_finite() {
                        return Err(Error::Input(format!(
                            "anchored copy at ({x}, {y}) with delta {delta} is invalid"
                        )));
                    }
                    clipped.push(prim);
                }
                Primitive::Disc { x, y, radius } => {
                    SectorPoint::new(x, y)?;
                    if !(radius > 0.0) || !radius.is_finite() {
                        return Err(Error::Input(format!("invalid disc radius {radius}")));
                    }
                    clipped.push(prim);
                }
                Primitive::HalfPlane { a, b, c } => {
                    if ![a, b, c].iter().all(|v| v.is_finite()) || (a == 0.0 && b == 0.0) {
                        return Err(Error::Input(format!(
                            "invalid half-plane ({a})x + ({b})y <= {c}"
                        )));
                    }
                    clipped.push(prim);
                }
            }
        }
        Ok(SectorSet {
            sector,
            repr: Repr::Exact(clipped),
        })
    }

    /// Predicate representation; the oracle must be deterministic.
    pub fn predicate(sector: Sector, member: PredicateFn) -> Self {
        SectorSet {
            sector,
            repr: Repr::Predicate(member),
        }
    }

    /// The whole sector.
    pub fn full(sector: Sector) -> Self {
        let alpha = sector.alpha();
        SectorSet::exact(
            sector,
            vec![Primitive::SubSector {
                theta1: -alpha,
                theta2: alpha,
            }],
        )
        .expect("full sector is a valid sub-sector")
    }

    /// A single ray `{arg p = theta}` (a measure-zero sub-sector).
    pub fn ray(sector: Sector, theta: f64) -> Result<Self> {
        if theta.abs() > sector.alpha() + ANGLE_EPS {
            return Err(Error::Input(format!("ray angle {theta} outside sector")));
        }
        SectorSet::exact(
            sector,
            vec![Primitive::SubSector {
                theta1: theta,
                theta2: theta,
            }],
        )
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.repr, Repr::Exact(_))
    }

    pub fn contains(&self, p: SectorPoint) -> bool {
        if !self.sector.contains(p) {
            return false;
        }
        match &self.repr {
            Repr::Exact(prims) => prims.iter().any(|pr| pr.contains(&self.sector, p)),
            Repr::Predicate(f) => f(p),
        }
    }

    pub fn to_doc(&self) -> Result<SectorSetDoc> {
        match &self.repr {
            Repr::Exact(prims) => Ok(SectorSetDoc {
                alpha: self.sector.alpha(),
                primitives: prims.clone(),
            }),
            Repr::Predicate(_) => Err(Error::Input(
                "predicate-represented sets have no exact document".into(),
            )),
        }
    }

    pub fn from_doc(doc: &SectorSetDoc) -> Result<Self> {
        let sector = Sector::new(doc.alpha)?;
        SectorSet::exact(sector, doc.primitives.clone())
    }

    /// Area of the set inside `Δ_t`: inclusion–exclusion up to pairs over
    /// the primitives. Anchored copies spaced further apart than their
    /// diameters contribute no pair terms.
    fn exact_area_in_truncation(&self, t: f64) -> Result<f64> {
        let prims = match &self.repr {
            Repr::Exact(p) => p,
            Repr::Predicate(_) => {
                return Err(Error::Input(
                    "exact evaluation requested for a predicate set".into(),
                ))
            }
        };
        let mut area = 0.0;
        for p in prims {
            area += p.area_in_truncation(&self.sector, t);
        }
        area -= self.pairwise_overlap(prims, t);
        Ok(area.max(0.0))
    }

    /// Sum of pairwise overlaps. Bounded primitives are bucketed in a
    /// spatial hash keyed by their bounding-disc centers, so only
    /// geometrically close pairs are inspected; unbounded primitives are
    /// paired against everything.
    fn pairwise_overlap(&self, prims: &[Primitive], t: f64) -> f64 {
        use std::collections::HashMap;

        let mut bounded: Vec<(usize, SectorPoint, f64)> = Vec::new();
        let mut unbounded: Vec<usize> = Vec::new();
        for (i, p) in prims.iter().enumerate() {
            match p.bounding_disc() {
                Some((c, r)) => bounded.push((i, c, r)),
                None => unbounded.push(i),
            }
        }

        let mut overlap = 0.0;

        // unbounded vs everything (including unbounded pairs)
        for (pos, &i) in unbounded.iter().enumerate() {
            for &j in &unbounded[pos + 1..] {
                overlap += self.pair_overlap(&prims[i], &prims[j], t);
            }
            for &(j, _, _) in &bounded {
                overlap += self.pair_overlap(&prims[i], &prims[j], t);
            }
        }

        if bounded.len() > 1 {
            let max_r = bounded
                .iter()
                .map(|&(_, _, r)| r)
                .fold(0.0f64, f64::max);
            let cell = (2.0 * max_r).max(1e-9);
            let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
            for (bi, &(_, c, _)) in bounded.iter().enumerate() {
                let key = ((c.x / cell).floor() as i64, (c.y / cell).floor() as i64);
                buckets.entry(key).or_default().push(bi);
            }
            for (bi, &(i, ci, ri)) in bounded.iter().enumerate() {
                let key = ((ci.x / cell).floor() as i64, (ci.y / cell).floor() as i64);
                for dx in -1..=1 {
                    for dy in -1..=1 {
                        let Some(cands) = buckets.get(&(key.0 + dx, key.1 + dy)) else {
                            continue;
                        };
                        for &bj in cands {
                            if bj <= bi {
                                continue;
                            }
                            let (j, cj, rj) = bounded[bj];
                            if ci.dist(cj) < ri + rj {
                                overlap += self.pair_overlap(&prims[i], &prims[j], t);
                            }
                        }
                    }
                }
            }
        }
        overlap
    }

    fn pair_overlap(&self, a: &Primitive, b: &Primitive, t: f64) -> f64 {
        if let (
            Primitive::SubSector {
                theta1: a1,
                theta2: a2,
            },
            Primitive::SubSector {
                theta1: b1,
                theta2: b2,
            },
        ) = (a, b)
        {
            let lo = a1.max(*b1);
            let hi = a2.min(*b2);
            return 0.5 * (hi - lo).max(0.0) * t * t;
        }
        match (a.bounding_disc(), b.bounding_disc()) {
            (Some((ca, ra)), Some((cb, rb))) => {
                if ca.dist(cb) >= ra + rb {
                    return 0.0;
                }
                self.grid_pair(a, b, t)
            }
            (Some(_), None) | (None, Some(_)) => self.grid_pair(a, b, t),
            (None, None) => {
                // sub-sector vs half-plane (or two half-planes): midpoint
                // grid over Δ_t in (r², θ)
                let alpha = self.sector.alpha();
                grid_area(alpha * t * t, |u, v| {
                    let r = t * u.sqrt();
                    let theta = -alpha + 2.0 * alpha * v;
                    let p = SectorPoint {
                        x: r * theta.cos(),
                        y: r * theta.sin(),
                    };
                    a.contains(&self.sector, p) && b.contains(&self.sector, p)
                })
            }
        }
    }

    /// Pair overlap via a grid over the bounded member of the pair.
    fn grid_pair(&self, a: &Primitive, b: &Primitive, t: f64) -> f64 {
        let (bounded, other) = if a.bounding_disc().is_some() {
            (a, b)
        } else {
            (b, a)
        };
        let (center, radius) = bounded.bounding_disc().expect("one side is bounded");
        grid_area(std::f64::consts::PI * radius * radius, |u, v| {
            let r = radius * u.sqrt();
            let theta = 2.0 * std::f64::consts::PI * v;
            let p = SectorPoint {
                x: center.x + r * theta.cos(),
                y: center.y + r * theta.sin(),
            };
            p.norm() <= t
                && bounded.contains(&self.sector, p)
                && other.contains(&self.sector, p)
        })
    }
}

/// How a density estimate was produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum DensityMethod {
    Exact,
    MonteCarlo { seed: u64, samples: usize },
}

/// Finite-horizon proxy of the lower density `liminf m(A ∩ Δ_t)/(α t²)`:
/// per-horizon ratios plus the minimum over the tail window.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityEstimate {
    pub horizons: Vec<f64>,
    pub ratios: Vec<f64>,
    pub halfwidths: Vec<f64>,
    pub liminf_proxy: f64,
    #[serde(flatten)]
    pub method: DensityMethod,
}

impl DensityEstimate {
    /// CSV block `(horizon, ratio, halfwidth)`, RFC 4180 line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("horizon,ratio,halfwidth\r\n");
        for i in 0..self.horizons.len() {
            out.push_str(&format!(
                "{},{},{}\r\n",
                self.horizons[i], self.ratios[i], self.halfwidths[i]
            ));
        }
        out
    }
}

/// Default geometric horizon schedule `t_i = t0 · 2^{i/4}`.
pub fn geometric_horizons(t0: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| t0 * 2f64.powf(i as f64 / 4.0))
        .collect()
}

fn tail_window_min(ratios: &[f64]) -> f64 {
    let m = ratios.len();
    let window = m.div_ceil(3);
    ratios[m - window..]
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Lower-density estimate of `set` over the horizon schedule.
///
/// Exact sets are measured by the inclusion–exclusion area engine; predicate
/// sets by stratified Monte-Carlo sampling, uniform in area, with per-stratum
/// substreams so the result is independent of worker scheduling.
pub fn sector_lower_density(
    set: &SectorSet,
    horizons: &[f64],
    method: DensityMethod,
) -> Result<DensityEstimate> {
    if horizons.is_empty() {
        return Err(Error::Input("horizon schedule is empty".into()));
    }
    for w in horizons.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Input(format!(
                "horizons must be strictly increasing, got {} after {}",
                w[1], w[0]
            )));
        }
    }
    if horizons[0] <= 0.0 {
        return Err(Error::Input("horizons must be positive".into()));
    }
    let mut ratios = Vec::with_capacity(horizons.len());
    let mut halfwidths = Vec::with_capacity(horizons.len());
    match method {
        DensityMethod::Exact => {
            for &t in horizons {
                let area = set.exact_area_in_truncation(t)?;
                let denom = set.sector.truncated_area(t)?;
                ratios.push(if denom > 0.0 { area / denom } else { 0.0 });
                halfwidths.push(0.0);
            }
        }
        DensityMethod::MonteCarlo { seed, samples } => {
            if samples == 0 {
                return Err(Error::Input("monte-carlo sample count must be ≥ 1".into()));
            }
            for (hi, &t) in horizons.iter().enumerate() {
                let (ratio, halfwidth) = monte_carlo_ratio(set, t, seed, hi as u64, samples);
                ratios.push(ratio);
                halfwidths.push(halfwidth);
            }
        }
    }
    Ok(DensityEstimate {
        liminf_proxy: tail_window_min(&ratios),
        horizons: horizons.to_vec(),
        ratios,
        halfwidths,
        method,
    })
}

const STRATA: usize = 64;

fn monte_carlo_ratio(
    set: &SectorSet,
    t: f64,
    seed: u64,
    horizon_index: u64,
    samples: usize,
) -> (f64, f64) {
    let alpha = set.sector.alpha();
    let base = samples / STRATA;
    let rem = samples % STRATA;
    let hits: usize = (0..STRATA)
        .into_par_iter()
        .map(|s| {
            let n_s = base + usize::from(s < rem);
            let mut rng = substream(seed, horizon_index, s as u64);
            let mut hits = 0usize;
            for _ in 0..n_s {
                // uniform in area: u stratified over r², θ uniform
                let u = (s as f64 + rng.random::<f64>()) / STRATA as f64;
                let r = t * u.sqrt();
                let theta = -alpha + 2.0 * alpha * rng.random::<f64>();
                let p = SectorPoint {
                    x: r * theta.cos(),
                    y: r * theta.sin(),
                };
                if set.contains(p) {
                    hits += 1;
                }
            }
            hits
        })
        .sum();
    let ratio = hits as f64 / samples as f64;
    let sigma = (ratio * (1.0 - ratio)).sqrt();
    (ratio, 3.0 * sigma / (samples as f64).sqrt())
}

/// `card(S ∩ [0, N]) / (N + 1)` for an enumerated integer set.
pub fn integer_density_prefix(set: &[u64], horizon: u64) -> f64 {
    let count = set.iter().filter(|&&n| n <= horizon).count();
    count as f64 / (horizon + 1) as f64
}

/// The paired integer/point family `(A(l, r_l), B(l, r_l))` with separation
/// certificates and per-level finite-horizon density lower bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeparatedFamily {
    pub sector: Sector,
    pub separations: Vec<u32>,
    pub integer_sets: Vec<Vec<u64>>,
    pub point_sets: Vec<Vec<SectorPoint>>,
    pub density_bounds: Vec<f64>,
    pub integer_horizon: u64,
    /// Largest abscissa whose segment points are materialized; the integer
    /// sets and density bounds always cover the full integer horizon.
    pub point_horizon: u64,
}

impl SeparatedFamily {
    pub fn levels(&self) -> usize {
        self.separations.len()
    }
}

/// Builds the separated family by dyadic-block allocation: block
/// `[2^j, 2^{j+1})` belongs to level `ν₂(j) + 1`, and within an owned block
/// the integers `2^j + R_max + i·2R_max` are taken while they fit with an
/// `R_max` margin on both sides. All cross gaps are then at least `2·R_max`.
pub fn build_separated_family(
    separations: &[u32],
    integer_horizon: u64,
    sector: Sector,
) -> Result<SeparatedFamily> {
    build_separated_family_with_points(separations, integer_horizon, integer_horizon, sector)
}

/// [`build_separated_family`] with segment points materialized only up to
/// `point_horizon`. Near the integer horizon a level can hold millions of
/// segment points; callers that only consume offsets within a truncation
/// horizon (or none at all) cap the materialization instead.
pub fn build_separated_family_with_points(
    separations: &[u32],
    integer_horizon: u64,
    point_horizon: u64,
    sector: Sector,
) -> Result<SeparatedFamily> {
    if separations.is_empty() || separations.iter().any(|&r| r == 0) {
        return Err(Error::Input(
            "separations must be a nonempty list of positive integers".into(),
        ));
    }
    let levels = separations.len();
    let r_max = *separations.iter().max().expect("nonempty") as u64;
    let mut integer_sets: Vec<Vec<u64>> = vec![Vec::new(); levels];

    let mut j = 1u32;
    while (1u64 << j) <= integer_horizon {
        let level = (j.trailing_zeros() as usize) + 1;
        if level <= levels {
            let block_start = 1u64 << j;
            let block_end = 1u64 << (j + 1);
            if block_start >= separations[level - 1] as u64 {
                let mut n = block_start + r_max;
                while n + r_max <= block_end && n <= integer_horizon {
                    integer_sets[level - 1].push(n);
                    n += 2 * r_max;
                }
            }
        }
        j += 1;
        if j >= 63 {
            break;
        }
    }

    for (l, set) in integer_sets.iter().enumerate() {
        if set.is_empty() {
            return Err(Error::HorizonTooSmall {
                level: l + 1,
                horizon: integer_horizon,
            });
        }
    }

    let mut point_sets = Vec::with_capacity(levels);
    for (l, set) in integer_sets.iter().enumerate() {
        let r = separations[l] as f64;
        let mut points = Vec::new();
        for &n in set.iter().take_while(|&&n| n <= point_horizon) {
            let n_f = n as f64;
            if 2.0 * n_f * sector.tan_alpha() >= r * (1.0 - 1e-12) {
                points.extend(sector.segment_points(n_f, r)?);
            }
        }
        if points.is_empty() {
            return Err(Error::HorizonTooSmall {
                level: l + 1,
                horizon: integer_horizon,
            });
        }
        point_sets.push(points);
    }

    let mut density_bounds = Vec::with_capacity(levels);
    for set in &integer_sets {
        let first = set[0];
        let mut checkpoints: Vec<u64> = Vec::new();
        let mut cp = first.next_power_of_two();
        while cp <= integer_horizon {
            checkpoints.push(cp);
            cp *= 2;
        }
        checkpoints.push(integer_horizon);
        let d = checkpoints
            .iter()
            .map(|&n| integer_density_prefix(set, n))
            .fold(f64::INFINITY, f64::min);
        density_bounds.push(d);
    }

    let family = SeparatedFamily {
        sector,
        separations: separations.to_vec(),
        integer_sets,
        point_sets,
        density_bounds,
        integer_horizon,
        point_horizon,
    };
    verify_family(&family)?;
    Ok(family)
}

/// Brute-force pair scan over all separation invariants. Construction calls
/// this before returning; tests call it independently.
pub fn verify_family(family: &SeparatedFamily) -> Result<()> {
    let levels = family.levels();
    for l in 0..levels {
        let r_l = family.separations[l] as u64;
        for &n in &family.integer_sets[l] {
            if n < r_l {
                return Err(Error::Input(format!(
                    "family invariant violated: n = {n} < r_{} = {r_l}",
                    l + 1
                )));
            }
        }
        if !(family.density_bounds[l] > 0.0) {
            return Err(Error::Input(format!(
                "family invariant violated: d_{} is not positive",
                l + 1
            )));
        }
    }
    // Pairwise gaps via the sorted union: checking adjacent pairs suffices,
    // since for any chain n < m < q the gaps telescope,
    // |n - q| ≥ (r_n + r_m) + (r_m + r_q) ≥ r_n + r_q.
    let mut merged: Vec<(u64, usize)> = Vec::new();
    for (l, set) in family.integer_sets.iter().enumerate() {
        merged.extend(set.iter().map(|&n| (n, l)));
    }
    merged.sort_unstable();
    for w in merged.windows(2) {
        let ((n, l), (m, k)) = (w[0], w[1]);
        if n == m {
            return Err(Error::Input(format!(
                "family invariant violated: levels {} and {} share n = {n}",
                l + 1,
                k + 1
            )));
        }
        let gap = (family.separations[l] + family.separations[k]) as u64;
        if m - n < gap {
            return Err(Error::Input(format!(
                "family invariant violated: |{n} - {m}| < r_{} + r_{}",
                l + 1,
                k + 1
            )));
        }
    }
    for v in 0..levels {
        let r_v = family.separations[v] as f64;
        for b in &family.point_sets[v] {
            if b.norm() < r_v - 1e-9 {
                return Err(Error::Input(format!(
                    "family invariant violated: |b| < r_{} for b = ({}, {})",
                    v + 1,
                    b.x,
                    b.y
                )));
            }
        }
    }
    let total_points: usize = family.point_sets.iter().map(Vec::len).sum();
    if total_points <= 4000 {
        // direct pair scan
        for v in 0..levels {
            for (i, b) in family.point_sets[v].iter().enumerate() {
                for mu in v..levels {
                    let start = if mu == v { i + 1 } else { 0 };
                    let min_sep = family.separations[v].min(family.separations[mu]) as f64;
                    for b2 in family.point_sets[mu].iter().skip(start) {
                        if b.dist(*b2) < min_sep - 1e-9 {
                            return Err(Error::Input(format!(
                                "family invariant violated: points ({}, {}) and ({}, {}) closer than {min_sep}",
                                b.x, b.y, b2.x, b2.y
                            )));
                        }
                    }
                }
            }
        }
    } else {
        // points sharing an abscissa sit on one segment with exact spacing
        // r_v; distinct abscissae are at least r_v + r_mu apart by the
        // integer invariant already scanned above, which dominates the
        // required min(r_v, r_mu). Only the per-segment spacing needs a scan.
        for v in 0..levels {
            let r_v = family.separations[v] as f64;
            let mut by_x: std::collections::BTreeMap<u64, Vec<f64>> =
                std::collections::BTreeMap::new();
            for b in &family.point_sets[v] {
                by_x.entry(b.x.to_bits()).or_default().push(b.y);
            }
            for ys in by_x.values_mut() {
                ys.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
                for w in ys.windows(2) {
                    if w[1] - w[0] < r_v - 1e-9 {
                        return Err(Error::Input(format!(
                            "family invariant violated: segment spacing {} < r_{}",
                            w[1] - w[0],
                            v + 1
                        )));
                    }
                }
            }
        }
    }
    Ok(())
}

/// The closed-form lower bound `d_l · δ² · tan(α) / r_l` for the density of
/// the return set `B(l, r_l) + Δ_δ`, together with the exact set itself.
pub struct ReturnSetBound {
    pub bound: f64,
    pub set: SectorSet,
}

pub fn return_set_density_bound(
    family: &SeparatedFamily,
    level: usize,
    delta: f64,
) -> Result<ReturnSetBound> {
    if level == 0 || level > family.levels() {
        return Err(Error::Input(format!("level {level} out of range")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Input(format!("delta must lie in (0, 1), got {delta}")));
    }
    let l = level - 1;
    let bound = family.density_bounds[l] * delta * delta * family.sector.tan_alpha()
        / family.separations[l] as f64;
    let primitives = family.point_sets[l]
        .iter()
        .map(|b| Primitive::Anchored {
            x: b.x,
            y: b.y,
            delta,
        })
        .collect();
    Ok(ReturnSetBound {
        bound,
        set: SectorSet::exact(family.sector, primitives)?,
    })
}

/// Exact angular density of the wedge complement `Δ(π/4) \ Δ_{1,k}` where
/// `Δ_{1,k} = {x + iy : kx ≤ y ≤ x}`, contrasted with the linear-in-k proxy
/// `(k + 1)/2`. The two agree only at k ∈ {-1, 0, 1}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WedgeDensityRecord {
    pub k: f64,
    pub exact: f64,
    pub linear_proxy: f64,
}

pub fn wedge_complement_density(k: f64) -> Result<WedgeDensityRecord> {
    if !(k > -1.0 && k < 1.0) {
        return Err(Error::Input(format!("k must lie in (-1, 1), got {k}")));
    }
    let alpha = std::f64::consts::FRAC_PI_4;
    let sector = Sector::new(alpha)?;
    let set = SectorSet::exact(
        sector,
        vec![Primitive::SubSector {
            theta1: -alpha,
            theta2: k.atan(),
        }],
    )?;
    let estimate = sector_lower_density(&set, &[1.0, 10.0, 100.0], DensityMethod::Exact)?;
    Ok(WedgeDensityRecord {
        k,
        exact: estimate.liminf_proxy,
        linear_proxy: (k + 1.0) / 2.0,
    })
}
