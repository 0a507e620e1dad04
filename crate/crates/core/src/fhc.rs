//! The criterion engine: tail radii, level planning, construction of the
//! candidate vector as a truncated series of forward shifts, and the
//! return / orbit-density experiments that check the finite-horizon bounds.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::density::{
    build_separated_family, return_set_density_bound, sector_lower_density, DensityEstimate,
    DensityMethod, SectorSet, SeparatedFamily,
};
use crate::error::{Error, Result};
use crate::lp_space::{cell_center, CellSize, GridFunction, GridFunctionDoc, LpContext};
use crate::sector_geometry::SectorPoint;
use crate::weights::{integrate_weight, truncated_integral, IntegralOutcome};

/// Canonical countable family dense at grid scale: indicators of `Δ_q` for
/// half-integer radii q, scaled by quarter-integer coefficients, enumerated
/// along diagonals.
pub fn dense_family_element(
    sector: crate::sector_geometry::Sector,
    h: CellSize,
    index: usize,
) -> Result<GridFunction> {
    // Cantor unpairing: index -> (a, b) on diagonal a + b = d.
    let d = (((8 * index + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    let offset = index - d * (d + 1) / 2;
    let a = d - offset;
    let b = offset;
    let radius = 0.5 * (a + 1) as f64;
    let value = 0.25 * (b + 1) as f64;
    GridFunction::truncation_indicator(sector, h, radius, value)
}

/// Least integer `R` such that the weighted tail beyond `R - s_f` is small
/// enough that any forward shift by `|b| ≥ R` has norm below `ε`:
/// `G(R - s_f)^{1/p} < ε / (M_f · N)` with `N = ⌊2 s_f⌋ + 1`.
pub fn tail_radius(y: &GridFunction, ctx: &LpContext, epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0) {
        return Err(Error::Input(format!("epsilon must be > 0, got {epsilon}")));
    }
    if y.is_zero() {
        return Ok(1);
    }
    let w = ctx.weight();
    let s_f = y.support_radius();
    let m_f = y.max_abs();
    let n = (2.0 * s_f).floor() + 1.0;
    let threshold = epsilon / (m_f * n);

    // Numeric fallback when the weight lacks a closed-form tail: total mass
    // minus the truncated integral. Divergent mass means the sufficient
    // condition fails and the criterion does not apply.
    let total = if w.has_radial_tail() {
        None
    } else {
        match integrate_weight(w, 1e-9)? {
            IntegralOutcome::Finite { value, .. } => Some(value),
            IntegralOutcome::Divergent { .. } => return Err(Error::CriterionInapplicable),
        }
    };
    let tail = |radius: f64| -> Result<f64> {
        let r = radius.max(0.0);
        match (w.radial_tail(r), total) {
            (Some(g), _) => {
                if !g.is_finite() {
                    return Err(Error::CriterionInapplicable);
                }
                Ok(g)
            }
            (None, Some(total)) => Ok((total - truncated_integral(w, r)?).max(0.0)),
            (None, None) => unreachable!("total computed when tail is absent"),
        }
    };
    let ok = |r: u64| -> Result<bool> {
        let g = tail(r as f64 - s_f)?;
        Ok(g.powf(1.0 / ctx.p()) < threshold)
    };

    // Doubling bracket, then integer bisection for the least passing R.
    let mut hi = 1u64;
    while !ok(hi)? {
        hi *= 2;
        if hi > 1 << 32 {
            return Err(Error::Input(format!(
                "tail radius for target (s_f = {s_f}) did not settle below 2^32"
            )));
        }
    }
    let mut lo = hi / 2; // ok(lo) is false (or lo = 0)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Knobs for plan construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanConfig {
    /// Largest integer abscissa allocated to the separated family.
    pub integer_horizon: u64,
    /// Multiplicative slack on the recorded series/return bounds, covering
    /// midpoint quadrature, grid snapping, and series truncation.
    pub slack: f64,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            integer_horizon: 1 << 12,
            slack: 1.1,
        }
    }
}

/// The finite-level plan: targets, the nondecreasing separation radii
/// derived from their tail radii, and the separated integer/point family.
#[derive(Clone)]
pub struct CriterionPlan {
    pub ctx: LpContext,
    pub targets: Vec<GridFunction>,
    pub radii: Vec<u32>,
    pub family: SeparatedFamily,
    /// Per-target covering multiplicity `N = ⌊2 s_f⌋ + 1`.
    pub cover_multiplicity: Vec<u64>,
    pub slack: f64,
}

impl CriterionPlan {
    pub fn levels(&self) -> usize {
        self.targets.len()
    }

    /// FNV-1a digest of the plan inputs; embedded in vector files so a
    /// vector can be matched to the plan that produced it.
    pub fn digest(&self) -> String {
        let mut hash = fnv1a(&[]);
        let mut feed = |bytes: &[u8]| hash = fnv1a_continue(hash, bytes);
        feed(&self.ctx.weight().sector().alpha().to_bits().to_le_bytes());
        feed(self.ctx.weight().name().as_bytes());
        feed(&self.ctx.p().to_bits().to_le_bytes());
        feed(&self.slack.to_bits().to_le_bytes());
        feed(&self.family.integer_horizon.to_le_bytes());
        for &r in &self.radii {
            feed(&r.to_le_bytes());
        }
        for t in &self.targets {
            feed(
                serde_json::to_string(&t.to_doc())
                    .expect("grid function doc serializes")
                    .as_bytes(),
            );
        }
        format!("{hash:016x}")
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    fnv1a_continue(FNV_OFFSET, bytes)
}

fn fnv1a_continue(mut hash: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

/// Derives the separation radii `r_l` and builds the separated family.
///
/// `r_l = max_{j ≤ l} tail_radius(y_j, 1/(l·2^l))`, made nondecreasing.
/// For translation semigroups `T_t S_t = id` exactly, so the reconstruction
/// condition (vanishing `T_t S_t y − y` error) holds with error 0 and
/// imposes no extra constraint on `r_l`.
pub fn plan_criterion(
    targets: &[GridFunction],
    ctx: &LpContext,
    config: &PlanConfig,
) -> Result<CriterionPlan> {
    if targets.is_empty() {
        return Err(Error::Input("plan requires at least one target".into()));
    }
    let sector = ctx.weight().sector();
    for t in targets {
        if t.sector() != sector || t.cell_size() != targets[0].cell_size() {
            return Err(Error::Input(
                "targets must share the context sector and a common grid".into(),
            ));
        }
    }
    let mut radii: Vec<u32> = Vec::with_capacity(targets.len());
    for l in 1..=targets.len() {
        let eps = 1.0 / (l as f64 * 2f64.powi(l as i32));
        let mut r = 0u64;
        for y in &targets[..l] {
            r = r.max(tail_radius(y, ctx, eps)?);
        }
        if let Some(&prev) = radii.last() {
            r = r.max(prev as u64);
        }
        radii.push(u32::try_from(r).map_err(|_| {
            Error::Input(format!("separation radius {r} exceeds u32 range"))
        })?);
    }
    let family = build_separated_family(&radii, config.integer_horizon, sector)?;
    let cover_multiplicity = targets
        .iter()
        .map(|y| (2.0 * y.support_radius()).floor() as u64 + 1)
        .collect();
    Ok(CriterionPlan {
        ctx: ctx.clone(),
        targets: targets.to_vec(),
        radii,
        family,
        cover_multiplicity,
        slack: config.slack,
    })
}

/// One summed term `S_{b} y_{level}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub b: SectorPoint,
    pub level: usize,
    pub target: usize,
}

/// Recorded partial-sum norm for one tested tail subset at one level.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Step1Record {
    pub level: usize,
    pub subset_size: usize,
    pub norm: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct BoundLedger {
    pub step1: Vec<Step1Record>,
    /// Grid-scale continuity radius δ₀ used by the orbit-density bound:
    /// one cell side, where sub-cell translation is the identity on snapped
    /// samples.
    pub delta0: f64,
}

/// The truncated-series candidate vector.
#[derive(Clone)]
pub struct FhcVector {
    pub x: GridFunction,
    pub terms: Vec<Term>,
    pub truncation_horizon: f64,
    pub bound_ledger: BoundLedger,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FhcVectorDoc {
    pub plan_digest: String,
    pub truncation_horizon: f64,
    pub terms: Vec<Term>,
    pub x: GridFunctionDoc,
    pub bound_ledger: BoundLedger,
}

impl FhcVector {
    pub fn to_doc(&self, plan: &CriterionPlan) -> FhcVectorDoc {
        FhcVectorDoc {
            plan_digest: plan.digest(),
            truncation_horizon: self.truncation_horizon,
            terms: self.terms.clone(),
            x: self.x.to_doc(),
            bound_ledger: self.bound_ledger.clone(),
        }
    }

    /// Rebuilds the vector from a document, re-summing its terms against the
    /// plan and checking both the digest and the stored cells.
    pub fn from_doc(doc: &FhcVectorDoc, plan: &CriterionPlan) -> Result<FhcVector> {
        if doc.plan_digest != plan.digest() {
            return Err(Error::Input(format!(
                "vector file digest {} does not match the plan digest {}",
                doc.plan_digest,
                plan.digest()
            )));
        }
        let stored = GridFunction::from_doc(&doc.x)?;
        let resummed = sum_terms(plan, &doc.terms)?;
        if stored != resummed {
            return Err(Error::Input(
                "stored cells do not match the re-summed terms".into(),
            ));
        }
        Ok(FhcVector {
            x: stored,
            terms: doc.terms.clone(),
            truncation_horizon: doc.truncation_horizon,
            bound_ledger: doc.bound_ledger.clone(),
        })
    }
}

/// Snaps a family point onto the target grid, nudging one cell toward the
/// axis when rounding pushes a boundary point out of the sector.
fn snap_into(template: &GridFunction, p: SectorPoint) -> Result<SectorPoint> {
    let sector = template.sector();
    let snapped = template.snap(p);
    if sector.contains(snapped) {
        return Ok(snapped);
    }
    let h = template.cell_size().value();
    let nudged = SectorPoint {
        x: snapped.x,
        y: snapped.y - snapped.y.signum() * h,
    };
    if sector.contains(nudged) {
        return Ok(nudged);
    }
    Err(Error::Input(format!(
        "family point ({}, {}) does not snap into the sector",
        p.x, p.y
    )))
}

fn sum_terms(plan: &CriterionPlan, terms: &[Term]) -> Result<GridFunction> {
    let sector = plan.ctx.weight().sector();
    let h = plan.targets[0].cell_size();
    if terms.is_empty() {
        return Ok(GridFunction::zero(sector, h));
    }
    let shifted: Vec<GridFunction> = terms
        .iter()
        .map(|t| plan.targets[t.target].backshift(t.b))
        .collect::<Result<_>>()?;
    let refs: Vec<&GridFunction> = shifted.iter().collect();
    GridFunction::lincomb(&vec![1.0; refs.len()], &refs)
}

/// Sums `S_{b} y_l` over every family point with `|b| ≤ horizon`, recording
/// per-level tail partial-sum norms and enforcing the series bound
/// `‖Σ_{k ∈ F} S_{b_k} z_k‖ ≤ 2/2^l` (with slack) on each tested subset.
pub fn construct_vector(plan: &CriterionPlan, horizon: f64) -> Result<FhcVector> {
    if !(horizon > 0.0) {
        return Err(Error::Input(format!("horizon must be > 0, got {horizon}")));
    }
    let mut terms: Vec<Term> = Vec::new();
    for (l, points) in plan.family.point_sets.iter().enumerate() {
        if l >= plan.levels() {
            break;
        }
        for &p in points {
            let b = snap_into(&plan.targets[l], p)?;
            if b.norm() <= horizon {
                terms.push(Term {
                    b,
                    level: l + 1,
                    target: l,
                });
            }
        }
    }
    terms.sort_by(|a, b| {
        (a.b.x, a.b.y, a.level)
            .partial_cmp(&(b.b.x, b.b.y, b.level))
            .expect("finite coordinates")
    });

    let x = sum_terms(plan, &terms)?;

    // Step-1 ledger: for each level l, the tail of the series is every term
    // drawn from levels ≥ l. Test the full tail and three suffixes of it
    // ordered by |b|.
    let mut ledger = BoundLedger {
        delta0: plan.targets[0].cell_size().value(),
        ..Default::default()
    };
    for l in 1..=plan.levels() {
        let mut tail: Vec<&Term> = terms.iter().filter(|t| t.level >= l).collect();
        tail.sort_by(|a, b| a.b.norm().partial_cmp(&b.b.norm()).expect("finite"));
        let bound = plan.slack * 2.0 / 2f64.powi(l as i32);
        for q in 0..4 {
            let start = q * tail.len() / 4;
            let subset: Vec<Term> = tail[start..].iter().map(|&&t| t).collect();
            if subset.is_empty() {
                continue;
            }
            let norm = plan.ctx.norm(&sum_terms(plan, &subset)?)?;
            if norm > bound {
                return Err(Error::ConstructionFailed {
                    level: l,
                    norm,
                    bound,
                });
            }
            ledger.step1.push(Step1Record {
                level: l,
                subset_size: subset.len(),
                norm,
                bound,
            });
        }
    }

    Ok(FhcVector {
        x,
        terms,
        truncation_horizon: horizon,
        bound_ledger: ledger,
    })
}

/// `‖T_t x − y‖` for a grid-aligned offset, computed cell-by-cell without
/// materializing the translated function.
fn return_error(ctx: &LpContext, x: &GridFunction, y: &GridFunction, t: SectorPoint) -> Result<f64> {
    let (a, b) = x.align(t)?;
    let sector = x.sector();
    let h = x.cell_size();
    let h2 = h.value() * h.value();
    let p = ctx.p();
    let w = ctx.weight();
    let mut acc = 0.0;
    for (&(i, j), &c) in x.cells() {
        let key = (i - a, j - b);
        let center = cell_center(h, key.0, key.1);
        if !sector.contains(center) {
            continue;
        }
        let diff = c - y.cells().get(&key).copied().unwrap_or(0.0);
        if diff != 0.0 {
            acc += diff.abs().powf(p) * w.eval_checked(center)? * h2;
        }
    }
    // Cells of y not covered by the translated x.
    for (&(i, j), &c) in y.cells() {
        let src = (i + a, j + b);
        if x.cells().contains_key(&src) {
            continue;
        }
        let center = cell_center(h, i, j);
        acc += c.abs().powf(p) * w.eval_checked(center)? * h2;
    }
    Ok(acc.powf(1.0 / p))
}

/// One probed return point and its error.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReturnSample {
    pub t: SectorPoint,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReturnReport {
    pub level: usize,
    pub bound: f64,
    pub samples: Vec<ReturnSample>,
    pub worst_error: f64,
    pub worst_t: SectorPoint,
}

/// Probes `‖T_t x − y_l‖ ≤ 3/2^l` (with slack) over admissible return
/// points `t ∈ B(l, r_l)`; `t` is admissible when translation by it cannot
/// see past the series truncation, i.e. `|t| + s_{y_l} ≤ horizon`.
pub fn verify_return(
    v: &FhcVector,
    plan: &CriterionPlan,
    level: usize,
    sample_count: usize,
) -> Result<ReturnReport> {
    if level == 0 || level > plan.levels() {
        return Err(Error::Input(format!("level {level} out of range")));
    }
    if sample_count == 0 {
        return Err(Error::Input("sample count must be ≥ 1".into()));
    }
    let y = &plan.targets[level - 1];
    let s_y = y.support_radius();
    let admissible: Vec<SectorPoint> = plan.family.point_sets[level - 1]
        .iter()
        .map(|&p| snap_into(y, p))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|t| t.norm() + s_y <= v.truncation_horizon)
        .collect();
    if admissible.is_empty() {
        return Err(Error::Input(format!(
            "no admissible return points at level {level} within horizon {}",
            v.truncation_horizon
        )));
    }
    let stride = admissible.len().div_ceil(sample_count);
    let probes: Vec<SectorPoint> = admissible.iter().copied().step_by(stride).collect();
    let bound = plan.slack * 3.0 / 2f64.powi(level as i32);
    let samples: Vec<ReturnSample> = probes
        .par_iter()
        .map(|&t| {
            Ok(ReturnSample {
                t,
                error: return_error(&plan.ctx, &v.x, y, t)?,
            })
        })
        .collect::<Result<_>>()?;
    let worst = samples
        .iter()
        .max_by(|a, b| a.error.partial_cmp(&b.error).expect("finite"))
        .expect("nonempty");
    if worst.error > bound {
        return Err(Error::VerificationFailed {
            level,
            error: worst.error,
            x: worst.t.x,
            y: worst.t.y,
            bound,
        });
    }
    Ok(ReturnReport {
        level,
        bound,
        worst_error: worst.error,
        worst_t: worst.t,
        samples,
    })
}

/// Orbit-density estimate plus, when a level is supplied, the closed-form
/// lower bound for the corresponding return set at δ = δ₀.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrbitDensityReport {
    pub estimate: DensityEstimate,
    pub lower_bound: Option<f64>,
    pub delta0: f64,
}

/// Monte-Carlo estimate of `D̲({t ∈ Δ : ‖T_t x − y‖ < c})`, sampling on
/// grid-snapped points.
pub fn orbit_density(
    v: &FhcVector,
    plan: &CriterionPlan,
    y: &GridFunction,
    c: f64,
    horizons: &[f64],
    seed: u64,
    samples: usize,
    level: Option<usize>,
) -> Result<OrbitDensityReport> {
    if !(c > 0.0) {
        return Err(Error::Input(format!("radius must be > 0, got {c}")));
    }
    let s_y = y.support_radius();
    if let Some(&last) = horizons.last() {
        if last + s_y > v.truncation_horizon {
            return Err(Error::Input(format!(
                "largest horizon {last} plus target support {s_y} exceeds the \
                 truncation horizon {}",
                v.truncation_horizon
            )));
        }
    }
    let ctx = plan.ctx.clone();
    let x = v.x.clone();
    let target = y.clone();
    let sector = x.sector();
    let set = SectorSet::predicate(
        sector,
        std::sync::Arc::new(move |p: SectorPoint| {
            let Ok(t) = snap_into(&x, p) else {
                return false;
            };
            match return_error(&ctx, &x, &target, t) {
                Ok(err) => err < c,
                Err(_) => false,
            }
        }),
    );
    let estimate = sector_lower_density(&set, horizons, DensityMethod::MonteCarlo { seed, samples })?;
    let delta0 = v.bound_ledger.delta0.max(plan.targets[0].cell_size().value());
    let lower_bound = match level {
        Some(l) => Some(return_set_density_bound(&plan.family, l, delta0)?.bound),
        None => None,
    };
    Ok(OrbitDensityReport {
        estimate,
        lower_bound,
        delta0,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum TransitionOutcome {
    /// A hitting time t₀ with `‖T_{t₀} x − u‖ < u_radius` was found; the
    /// estimate covers the shifted hitting set of V, a certified subset of
    /// the transition set N(U, V).
    Estimated {
        t0: SectorPoint,
        estimate: DensityEstimate,
    },
    /// No hitting time within the truncation horizon; not an error.
    Inconclusive,
}

/// Transition-set density via the shift trick: once `T_{t₀} x ∈ U`, every
/// return of the orbit to V at time `t₀ + s` puts `s` in N(U, V).
#[allow(clippy::too_many_arguments)]
pub fn transition_density(
    v: &FhcVector,
    plan: &CriterionPlan,
    u_center: &GridFunction,
    u_radius: f64,
    v_center: &GridFunction,
    v_radius: f64,
    horizons: &[f64],
    seed: u64,
    samples: usize,
) -> Result<TransitionOutcome> {
    if !(u_radius > 0.0) || !(v_radius > 0.0) {
        return Err(Error::Input("ball radii must be > 0".into()));
    }
    let s_u = u_center.support_radius();
    // Hitting-time candidates: the origin plus every summed offset, nearest
    // first.
    let mut candidates = vec![SectorPoint::ORIGIN];
    candidates.extend(v.terms.iter().map(|t| t.b));
    candidates.sort_by(|a, b| a.norm().partial_cmp(&b.norm()).expect("finite"));
    let mut t0 = None;
    for t in candidates {
        if t.norm() + s_u > v.truncation_horizon {
            break;
        }
        if return_error(&plan.ctx, &v.x, u_center, t)? < u_radius {
            t0 = Some(t);
            break;
        }
    }
    let Some(t0) = t0 else {
        return Ok(TransitionOutcome::Inconclusive);
    };

    let s_v = v_center.support_radius();
    if let Some(&last) = horizons.last() {
        if last + t0.norm() + s_v > v.truncation_horizon {
            return Err(Error::Input(format!(
                "largest horizon {last} plus shift and target support exceeds \
                 the truncation horizon {}",
                v.truncation_horizon
            )));
        }
    }
    let ctx = plan.ctx.clone();
    let x = v.x.clone();
    let target = v_center.clone();
    let sector = x.sector();
    let set = SectorSet::predicate(
        sector,
        std::sync::Arc::new(move |p: SectorPoint| {
            let Ok(s) = snap_into(&x, p) else {
                return false;
            };
            let shifted = s.add(t0);
            if !sector.contains(shifted) {
                return false;
            }
            match return_error(&ctx, &x, &target, shifted) {
                Ok(err) => err < v_radius,
                Err(_) => false,
            }
        }),
    );
    let estimate = sector_lower_density(&set, horizons, DensityMethod::MonteCarlo { seed, samples })?;
    Ok(TransitionOutcome::Estimated { t0, estimate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sector_geometry::Sector;
    use crate::weights::catalog_weight;
    use std::f64::consts::FRAC_PI_4;
    use std::sync::Arc;

    fn quarter() -> Sector {
        Sector::new(FRAC_PI_4).unwrap()
    }

    fn exp_ctx() -> LpContext {
        LpContext::new(1.0, catalog_weight("exp", quarter()).unwrap()).unwrap()
    }

    fn unit_indicator() -> GridFunction {
        GridFunction::truncation_indicator(quarter(), CellSize::eighth(), 1.0, 1.0).unwrap()
    }

    #[test]
    fn tail_radius_exp_desk_case() {
        // s_f = 1 + 1/8, M_f = 1, N = 3; least integer R with
        // 2α(R - s_f + 1) e^{-(R - s_f)} < 1/6 is 5.
        let r = tail_radius(&unit_indicator(), &exp_ctx(), 0.5).unwrap();
        assert_eq!(r, 5);
    }

    #[test]
    fn tail_radius_monotone_in_epsilon() {
        let y = unit_indicator();
        let ctx = exp_ctx();
        let r_half = tail_radius(&y, &ctx, 0.5).unwrap();
        let r_one = tail_radius(&y, &ctx, 1.0).unwrap();
        assert!(r_one <= r_half);
    }

    #[test]
    fn tail_radius_numeric_matches_closed_form() {
        let ctx = exp_ctx();
        let w = ctx.weight();
        let no_tail = crate::weights::WeightFn::new(
            quarter(),
            "exp-no-tail",
            Arc::new(|p: SectorPoint| (-p.norm()).exp()),
            w.constants().0,
            w.constants().1,
            None,
        )
        .unwrap();
        let numeric_ctx = LpContext::new(1.0, no_tail).unwrap();
        let closed = tail_radius(&unit_indicator(), &ctx, 0.5).unwrap();
        let numeric = tail_radius(&unit_indicator(), &numeric_ctx, 0.5).unwrap();
        assert!(numeric.abs_diff(closed) <= 1);
    }

    #[test]
    fn tail_radius_divergent_weight_is_inapplicable() {
        let w = catalog_weight("chaouchi", quarter()).unwrap();
        let ctx = LpContext::new(1.0, w).unwrap();
        let r = tail_radius(&unit_indicator(), &ctx, 0.5);
        assert!(matches!(r, Err(Error::CriterionInapplicable)));
    }

    fn desk_plan() -> CriterionPlan {
        let y1 = unit_indicator();
        let y2 = y1.scale(0.5).unwrap();
        plan_criterion(&[y1, y2], &exp_ctx(), &PlanConfig::default()).unwrap()
    }

    #[test]
    fn plan_radii_nondecreasing_and_family_built() {
        let plan = desk_plan();
        assert_eq!(plan.levels(), 2);
        assert!(plan.radii[1] >= plan.radii[0]);
        assert!(plan.radii[0] >= 1);
        assert_eq!(plan.family.levels(), 2);
        assert_eq!(plan.cover_multiplicity, vec![3, 3]);
    }

    #[test]
    fn plan_rejects_mismatched_grids() {
        let y1 = unit_indicator();
        let y2 =
            GridFunction::truncation_indicator(quarter(), CellSize::new(1, 16).unwrap(), 1.0, 1.0)
                .unwrap();
        assert!(plan_criterion(&[y1, y2], &exp_ctx(), &PlanConfig::default()).is_err());
    }

    #[test]
    fn construct_below_first_offset_is_zero() {
        let plan = desk_plan();
        let v = construct_vector(&plan, 1.0).unwrap();
        assert!(v.x.is_zero());
        assert!(v.terms.is_empty());
    }

    #[test]
    fn construct_desk_vector_and_ledger() {
        let plan = desk_plan();
        let v = construct_vector(&plan, 60.0).unwrap();
        assert!(!v.terms.is_empty());
        for rec in &v.bound_ledger.step1 {
            assert!(rec.norm <= rec.bound, "level {} norm {}", rec.level, rec.norm);
        }
        // Re-summation reproduces the stored cells bit-exactly.
        let doc = v.to_doc(&plan);
        let back = FhcVector::from_doc(&doc, &plan).unwrap();
        assert_eq!(back.x, v.x);
    }

    #[test]
    fn verify_return_desk_levels() {
        let plan = desk_plan();
        let v = construct_vector(&plan, 200.0).unwrap();
        for level in 1..=2 {
            let report = verify_return(&v, &plan, level, 16).unwrap();
            assert!(report.worst_error <= report.bound);
        }
    }

    #[test]
    fn single_term_return_error_is_exactly_zero() {
        let plan = desk_plan();
        let full = construct_vector(&plan, 60.0).unwrap();
        let t = full
            .terms
            .iter()
            .filter(|t| t.level == 1)
            .min_by(|a, b| a.b.norm().partial_cmp(&b.b.norm()).unwrap())
            .unwrap();
        let single = FhcVector {
            x: plan.targets[0].backshift(t.b).unwrap(),
            terms: vec![*t],
            truncation_horizon: t.b.norm() + 10.0,
            bound_ledger: BoundLedger::default(),
        };
        let err = return_error(&plan.ctx, &single.x, &plan.targets[0], t.b).unwrap();
        assert_eq!(err, 0.0);
    }

    #[test]
    fn orbit_density_huge_radius_saturates() {
        let plan = desk_plan();
        let v = construct_vector(&plan, 60.0).unwrap();
        let report = orbit_density(
            &v,
            &plan,
            &plan.targets[0],
            1e6,
            &[10.0, 20.0],
            7,
            400,
            Some(1),
        )
        .unwrap();
        assert!(report.estimate.ratios.iter().all(|&r| r > 0.99));
        assert!(report.lower_bound.unwrap() > 0.0);
    }

    #[test]
    fn orbit_density_far_target_is_empty() {
        let plan = desk_plan();
        let v = construct_vector(&plan, 60.0).unwrap();
        let far = plan.targets[0].scale(10.0).unwrap();
        let report =
            orbit_density(&v, &plan, &far, 1e-3, &[10.0, 20.0], 7, 400, None).unwrap();
        assert!(report.estimate.ratios.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn orbit_density_horizon_beyond_truncation_errors() {
        let plan = desk_plan();
        let v = construct_vector(&plan, 60.0).unwrap();
        assert!(orbit_density(&v, &plan, &plan.targets[0], 1.0, &[100.0], 7, 100, None).is_err());
    }

    #[test]
    fn transition_density_hit_and_miss() {
        let plan = desk_plan();
        let v = construct_vector(&plan, 60.0).unwrap();
        let y1 = &plan.targets[0];
        let hit = transition_density(&v, &plan, y1, 5.0, y1, 5.0, &[10.0, 20.0], 7, 400).unwrap();
        match hit {
            TransitionOutcome::Estimated { estimate, .. } => {
                assert!(estimate.ratios.iter().all(|&r| r > 0.0));
            }
            TransitionOutcome::Inconclusive => panic!("expected a hitting time"),
        }
        let far = y1.scale(50.0).unwrap();
        let miss =
            transition_density(&v, &plan, &far, 1e-6, y1, 5.0, &[10.0], 7, 100).unwrap();
        assert!(matches!(miss, TransitionOutcome::Inconclusive));
    }

    #[test]
    fn dense_family_enumeration_varies() {
        let a = dense_family_element(quarter(), CellSize::eighth(), 0).unwrap();
        let b = dense_family_element(quarter(), CellSize::eighth(), 5).unwrap();
        assert_ne!(a, b);
        assert!(!a.is_zero());
    }

    #[test]
    fn plan_digest_is_stable_and_input_sensitive() {
        let p1 = desk_plan();
        let p2 = desk_plan();
        assert_eq!(p1.digest(), p2.digest());
        let other = plan_criterion(
            &[unit_indicator()],
            &exp_ctx(),
            &PlanConfig::default(),
        )
        .unwrap();
        assert_ne!(p1.digest(), other.digest());
    }
}
