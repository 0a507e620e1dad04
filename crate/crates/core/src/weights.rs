//! Admissible weight functions on the sector: the built-in catalog, the
//! sampled admissibility check, the sector integral behind the sufficient
//! condition, and the sublevel-set / erosion analysis behind the necessary
//! condition.

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::density::{
    sector_lower_density, DensityEstimate, DensityMethod, SectorSet, WedgeDensityRecord,
};
use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::rng::substream;
use crate::sector_geometry::{Sector, SectorPoint};

type EvalFn = Arc<dyn Fn(SectorPoint) -> f64 + Send + Sync>;
type TailFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A positive weight on the sector with claimed admissibility constants
/// `(M, ω)` and, where available, a closed-form radial tail
/// `G(R) = ∫_{|τ| ≥ R} ρ(τ) dτ`.
#[derive(Clone)]
pub struct WeightFn {
    sector: Sector,
    name: String,
    eval: EvalFn,
    m: f64,
    omega: f64,
    radial_tail: Option<TailFn>,
}

impl WeightFn {
    pub fn new(
        sector: Sector,
        name: impl Into<String>,
        eval: EvalFn,
        m: f64,
        omega: f64,
        radial_tail: Option<TailFn>,
    ) -> Result<Self> {
        if !(m >= 1.0) || !omega.is_finite() {
            return Err(Error::Input(format!(
                "admissibility constants require M ≥ 1 and finite ω, got ({m}, {omega})"
            )));
        }
        Ok(WeightFn {
            sector,
            name: name.into(),
            eval,
            m,
            omega,
            radial_tail,
        })
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn constants(&self) -> (f64, f64) {
        (self.m, self.omega)
    }

    pub fn has_radial_tail(&self) -> bool {
        self.radial_tail.is_some()
    }

    pub fn eval(&self, p: SectorPoint) -> f64 {
        (self.eval)(p)
    }

    pub fn eval_checked(&self, p: SectorPoint) -> Result<f64> {
        let v = (self.eval)(p);
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::Evaluation { x: p.x, y: p.y });
        }
        Ok(v)
    }

    /// Closed-form radial tail, when the catalog provides one.
    pub fn radial_tail(&self, radius: f64) -> Option<f64> {
        self.radial_tail.as_ref().map(|g| g(radius.max(0.0)))
    }

    /// Overrides the claimed constants, keeping the evaluator. Used to probe
    /// wrong claims against the sampled admissibility check.
    pub fn with_claimed_constants(mut self, m: f64, omega: f64) -> Self {
        self.m = m;
        self.omega = omega;
        self
    }
}

/// Builds a catalog weight on the given sector.
///
/// Names: `gauss` (e^{-|τ|²}), `exp` (e^{-|τ|}), `cubic` (1 on the unit
/// truncation, |τ|^{-3} outside), `chaouchi` (the Δ(π/4) weight that is flat
/// on `x + y ≥ √(x-y)`). The chaouchi weight is only defined for α = π/4.
///
/// The claimed `(M, ω)` are implementer-derived: exact for `exp`, `cubic`
/// and `chaouchi`; for `gauss` the constants are only valid on the default
/// admissibility probe window `Δ_4 × Δ_4` (no global constants exist).
pub fn catalog_weight(name: &str, sector: Sector) -> Result<WeightFn> {
    let alpha = sector.alpha();
    match name {
        "gauss" => WeightFn::new(
            sector,
            "gauss",
            Arc::new(|p: SectorPoint| (-(p.x * p.x + p.y * p.y)).exp()),
            1.0,
            12.0,
            Some(Arc::new(move |r: f64| alpha * (-r * r).exp())),
        ),
        "exp" => WeightFn::new(
            sector,
            "exp",
            Arc::new(|p: SectorPoint| (-p.norm()).exp()),
            1.0,
            1.0,
            Some(Arc::new(move |r: f64| 2.0 * alpha * (r + 1.0) * (-r).exp())),
        ),
        "cubic" => WeightFn::new(
            sector,
            "cubic",
            Arc::new(|p: SectorPoint| {
                let r = p.norm();
                if r <= 1.0 {
                    1.0
                } else {
                    r.powi(-3)
                }
            }),
            1.0,
            3.0,
            Some(Arc::new(move |r: f64| {
                if r >= 1.0 {
                    2.0 * alpha / r
                } else {
                    alpha * (1.0 - r * r) + 2.0 * alpha
                }
            })),
        ),
        "chaouchi" => {
            if (alpha - std::f64::consts::FRAC_PI_4).abs() > 1e-12 {
                return Err(Error::Catalog(format!(
                    "the chaouchi weight requires alpha = pi/4, got {alpha}"
                )));
            }
            WeightFn::new(
                sector,
                "chaouchi",
                Arc::new(|p: SectorPoint| {
                    let u = p.x + p.y;
                    let root = (p.x - p.y).max(0.0).sqrt();
                    if u >= root {
                        1.0
                    } else {
                        (u - root).exp()
                    }
                }),
                (0.5f64).exp(),
                3.0,
                None,
            )
        }
        other => Err(Error::Catalog(format!("unknown weight name '{other}'"))),
    }
}

/// Outcome of the sampled admissibility check. A pass is evidence over the
/// sampled pairs, not a proof.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum AdmissibilityOutcome {
    Pass {
        worst_ratio: f64,
    },
    Counterexample {
        t: (f64, f64),
        t_prime: (f64, f64),
        ratio: f64,
    },
}

/// Samples `(t, t')` pairs uniformly in area over `Δ_T × Δ_T` and checks
/// `ρ(t) ≤ M e^{ω|t'|} ρ(t + t')` at every pair.
pub fn check_admissibility(
    w: &WeightFn,
    seed: u64,
    count: usize,
    probe_radius: f64,
) -> Result<AdmissibilityOutcome> {
    if count == 0 {
        return Err(Error::Input("admissibility sample count must be ≥ 1".into()));
    }
    if !(probe_radius > 0.0) {
        return Err(Error::Input("probe radius must be > 0".into()));
    }
    let alpha = w.sector.alpha();
    let (m, omega) = w.constants();
    let mut rng = substream(seed, 0x41d5, 0);
    let draw = |rng: &mut rand_chacha::ChaCha8Rng| {
        let r = probe_radius * rng.random::<f64>().sqrt();
        let theta = -alpha + 2.0 * alpha * rng.random::<f64>();
        SectorPoint {
            x: r * theta.cos(),
            y: r * theta.sin(),
        }
    };
    let mut worst = 0.0f64;
    for _ in 0..count {
        let t = draw(&mut rng);
        let tp = draw(&mut rng);
        let lhs = w.eval_checked(t)?;
        let rhs = m * (omega * tp.norm()).exp() * w.eval_checked(t.add(tp))?;
        let ratio = lhs / rhs;
        if ratio > 1.0 + 1e-9 {
            return Ok(AdmissibilityOutcome::Counterexample {
                t: (t.x, t.y),
                t_prime: (tp.x, tp.y),
                ratio,
            });
        }
        worst = worst.max(ratio);
    }
    Ok(AdmissibilityOutcome::Pass { worst_ratio: worst })
}

/// Outcome of the sector integral `∫_Δ ρ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum IntegralOutcome {
    Finite {
        value: f64,
        error_bound: f64,
    },
    /// Increments over doubling radii failed the Cauchy ratio test.
    Divergent {
        radii: Vec<f64>,
        increments: Vec<f64>,
    },
}

const MAX_DOUBLINGS: usize = 40;

/// Polar-coordinate quadrature of `∫_Δ ρ` over doubling radii.
///
/// With a closed-form radial tail the loop stops as soon as the tail is
/// below `tol` relative to the partial integral; without one, convergence is
/// declared after two consecutive negligible increments and divergence after
/// six consecutive non-decreasing increments.
pub fn integrate_weight(w: &WeightFn, tol: f64) -> Result<IntegralOutcome> {
    if !(tol > 0.0) {
        return Err(Error::Input(format!("tolerance must be > 0, got {tol}")));
    }
    let mut partial = annulus_integral(w, 0.0, 1.0)?;
    let mut r_hi = 1.0f64;
    let mut radii = vec![1.0];
    let mut increments: Vec<f64> = Vec::new();

    for _ in 0..MAX_DOUBLINGS {
        if partial > 0.0 {
            if let Some(tail) = w.radial_tail(r_hi) {
                if tail.is_finite() && tail < tol * partial {
                    return Ok(IntegralOutcome::Finite {
                        value: partial + tail / 2.0,
                        error_bound: tail,
                    });
                }
            }
        }
        let k = increments.len();
        if k >= 6
            && increments[k - 6..]
                .windows(2)
                .all(|w| w[1] >= w[0] * (1.0 - 1e-9))
        {
            return Ok(IntegralOutcome::Divergent { radii, increments });
        }
        if w.radial_tail.is_none()
            && k >= 2
            && increments[k - 1] < tol * partial
            && increments[k - 2] < tol * partial
        {
            return Ok(IntegralOutcome::Finite {
                value: partial,
                error_bound: 2.0 * increments[k - 1].max(increments[k - 2]),
            });
        }
        let inc = annulus_integral(w, r_hi, 2.0 * r_hi)?;
        partial += inc;
        r_hi *= 2.0;
        radii.push(r_hi);
        increments.push(inc);
    }
    Err(Error::Input(format!(
        "weight integral did not settle within {MAX_DOUBLINGS} radius doublings"
    )))
}

/// `∫_{Δ_radius} ρ`, the integral over the truncated sector.
pub fn truncated_integral(w: &WeightFn, radius: f64) -> Result<f64> {
    if !(radius >= 0.0) {
        return Err(Error::Input(format!("radius must be ≥ 0, got {radius}")));
    }
    if radius == 0.0 {
        return Ok(0.0);
    }
    annulus_integral(w, 0.0, radius)
}

/// `∫_{-α}^{α} ∫_{r0}^{r1} ρ(r e^{iθ}) r dr dθ` by nested adaptive Simpson.
fn annulus_integral(w: &WeightFn, r0: f64, r1: f64) -> Result<f64> {
    let alpha = w.sector.alpha();
    let inner_tol = 1e-12 * (1.0 + r1 - r0);
    let outer = |theta: f64| -> Result<f64> {
        let (cos_t, sin_t) = (theta.cos(), theta.sin());
        adaptive_simpson(
            &|r: f64| {
                let p = SectorPoint {
                    x: r * cos_t,
                    y: r * sin_t,
                };
                Ok(w.eval_checked(p)? * r)
            },
            r0,
            r1,
            inner_tol,
        )
    };
    adaptive_simpson(&outer, -alpha, alpha, 1e-11 * (1.0 + 2.0 * alpha))
}

/// The sublevel set `{t ∈ Δ : ρ(t) ≤ ε}` as a predicate set.
pub fn sublevel_set(w: &WeightFn, epsilon: f64) -> Result<SectorSet> {
    if !(epsilon > 0.0) {
        return Err(Error::Input(format!("epsilon must be > 0, got {epsilon}")));
    }
    let eval = w.eval.clone();
    Ok(SectorSet::predicate(
        w.sector,
        Arc::new(move |p| eval(p) <= epsilon),
    ))
}

/// The erosion `{t ∈ Δ : t + Δ_R ⊆ sublevel}` approximated from above by a
/// deterministic polar cover of the compact `Δ_R` at pitch `R/8`.
pub fn erosion_set(w: &WeightFn, epsilon: f64, compact_radius: f64) -> Result<SectorSet> {
    if !(epsilon > 0.0) || !(compact_radius > 0.0) {
        return Err(Error::Input(
            "erosion requires epsilon > 0 and a positive compact radius".into(),
        ));
    }
    let nodes = compact_cover(w.sector, compact_radius);
    let eval = w.eval.clone();
    Ok(SectorSet::predicate(
        w.sector,
        Arc::new(move |p| nodes.iter().all(|n| eval(p.add(*n)) <= epsilon)),
    ))
}

/// Polar cover of `Δ_R` at pitch `R/8`: nine rings, with enough nodes per
/// ring to keep arc spacing at or below the pitch.
fn compact_cover(sector: Sector, radius: f64) -> Vec<SectorPoint> {
    let alpha = sector.alpha();
    let pitch = radius / 8.0;
    let mut nodes = vec![SectorPoint::ORIGIN];
    for k in 1..=8u32 {
        let r = radius * k as f64 / 8.0;
        let arc = 2.0 * alpha * r;
        let count = ((arc / pitch).ceil() as usize).max(1) + 1;
        for i in 0..count {
            let theta = -alpha + 2.0 * alpha * i as f64 / (count - 1).max(1) as f64;
            nodes.push(SectorPoint {
                x: r * theta.cos(),
                y: r * theta.sin(),
            });
        }
    }
    nodes
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VerdictStatus {
    Pass,
    Fail,
    Inconclusive,
}

/// Evidence and verdict for the sufficient (weight-integral) condition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SufficientReport {
    pub status: VerdictStatus,
    pub integral: IntegralOutcome,
}

/// One density curve of the necessary-condition experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NecessaryEvidence {
    pub epsilon: f64,
    pub erosion_radius: f64,
    pub estimate: DensityEstimate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NecessaryReport {
    pub status: VerdictStatus,
    pub fail_threshold: f64,
    pub pass_threshold: f64,
    pub evidence: Vec<NecessaryEvidence>,
}

/// Configuration for [`check_necessary`]. Thresholds are configuration, not
/// mathematics; the defaults classify the catalog weights at horizon 10⁴.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NecessaryConfig {
    pub epsilons: Vec<f64>,
    pub horizons: Vec<f64>,
    pub erosion_radii: Vec<f64>,
    pub seed: u64,
    pub samples: usize,
    pub fail_threshold: f64,
    pub pass_threshold: f64,
}

impl Default for NecessaryConfig {
    fn default() -> Self {
        NecessaryConfig {
            epsilons: vec![0.5],
            horizons: vec![100.0, 1000.0, 10_000.0],
            erosion_radii: vec![1.0],
            seed: 0,
            samples: 20_000,
            fail_threshold: 0.02,
            pass_threshold: 0.05,
        }
    }
}

/// Necessary condition: for every ε the sublevel set must be a thick set
/// with positive lower density after erosion by any compact truncation.
///
/// Fail: for the smallest tested compact radius, some ε gives estimates that
/// do not increase across horizons and end below the fail threshold. Pass:
/// every estimate at every (ε, radius) exceeds the pass threshold.
pub fn check_necessary(w: &WeightFn, config: &NecessaryConfig) -> Result<NecessaryReport> {
    if config.epsilons.is_empty() || config.erosion_radii.is_empty() {
        return Err(Error::Input(
            "necessary check requires at least one epsilon and one erosion radius".into(),
        ));
    }
    let method = DensityMethod::MonteCarlo {
        seed: config.seed,
        samples: config.samples,
    };
    let mut evidence = Vec::new();
    for &eps in &config.epsilons {
        for &rk in &config.erosion_radii {
            let eroded = erosion_set(w, eps, rk)?;
            let estimate = sector_lower_density(&eroded, &config.horizons, method)?;
            evidence.push(NecessaryEvidence {
                epsilon: eps,
                erosion_radius: rk,
                estimate,
            });
        }
    }

    let smallest_rk = config
        .erosion_radii
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let fails = evidence.iter().any(|ev| {
        if ev.erosion_radius != smallest_rk {
            return false;
        }
        let r = &ev.estimate.ratios;
        let hw = &ev.estimate.halfwidths;
        let nonincreasing = r
            .windows(2)
            .zip(hw.windows(2))
            .all(|(rw, hww)| rw[1] <= rw[0] + hww[0] + hww[1]);
        nonincreasing && *r.last().expect("nonempty") < config.fail_threshold
    });
    let passes = evidence
        .iter()
        .all(|ev| ev.estimate.ratios.iter().all(|&r| r > config.pass_threshold));

    let status = if fails {
        VerdictStatus::Fail
    } else if passes {
        VerdictStatus::Pass
    } else {
        VerdictStatus::Inconclusive
    };
    Ok(NecessaryReport {
        status,
        fail_threshold: config.fail_threshold,
        pass_threshold: config.pass_threshold,
        evidence,
    })
}

/// Sufficient condition: the sector integral of the weight is finite.
pub fn check_sufficient(w: &WeightFn, tol: f64) -> Result<SufficientReport> {
    let integral = integrate_weight(w, tol)?;
    let status = match integral {
        IntegralOutcome::Finite { .. } => VerdictStatus::Pass,
        IntegralOutcome::Divergent { .. } => VerdictStatus::Fail,
    };
    Ok(SufficientReport { status, integral })
}

/// Combined machine-readable verdict for one weight.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightVerdict {
    pub name: String,
    pub sufficient: SufficientReport,
    pub necessary: NecessaryReport,
    /// Exact angular density of the wedge complement used by the
    /// counterexample analysis, recorded alongside the linear-in-k proxy it
    /// disagrees with. Present only for the chaouchi weight.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wedge_analysis: Option<Vec<WedgeDensityRecord>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    fn quarter() -> Sector {
        Sector::new(FRAC_PI_4).unwrap()
    }

    #[test]
    fn catalog_evaluators() {
        let s = quarter();
        let exp = catalog_weight("exp", s).unwrap();
        let v = exp.eval(SectorPoint { x: 3.0, y: 0.0 });
        assert!((v - (-3.0f64).exp()).abs() < 1e-15);

        let ch = catalog_weight("chaouchi", s).unwrap();
        assert_eq!(ch.eval(SectorPoint { x: 5.0, y: 4.0 }), 1.0);
        let below = ch.eval(SectorPoint { x: 5.0, y: -4.0 });
        assert!((below - (1.0f64 - 9.0f64.sqrt()).exp()).abs() < 1e-12);

        let gauss = catalog_weight("gauss", s).unwrap();
        assert_eq!(gauss.eval(SectorPoint::ORIGIN), 1.0);

        assert!(matches!(
            catalog_weight("nope", s),
            Err(Error::Catalog(_))
        ));
        assert!(matches!(
            catalog_weight("chaouchi", Sector::new(0.5).unwrap()),
            Err(Error::Catalog(_))
        ));
    }

    #[test]
    fn exp_admissibility_holds_for_any_seed() {
        let w = catalog_weight("exp", quarter()).unwrap();
        for seed in [1u64, 77, 4242] {
            let out = check_admissibility(&w, seed, 2000, 4.0).unwrap();
            assert!(matches!(out, AdmissibilityOutcome::Pass { .. }));
        }
    }

    #[test]
    fn gauss_with_zero_omega_is_caught() {
        let w = catalog_weight("gauss", quarter())
            .unwrap()
            .with_claimed_constants(1.0, 0.0);
        let out = check_admissibility(&w, 5, 2000, 4.0).unwrap();
        assert!(matches!(out, AdmissibilityOutcome::Counterexample { .. }));
    }

    #[test]
    fn admissibility_rejects_zero_count() {
        let w = catalog_weight("exp", quarter()).unwrap();
        assert!(check_admissibility(&w, 1, 0, 4.0).is_err());
    }

    #[test]
    fn integral_closed_forms() {
        let alpha = FRAC_PI_4;
        let cases = [("gauss", alpha), ("exp", 2.0 * alpha), ("cubic", 3.0 * alpha)];
        for (name, expected) in cases {
            let w = catalog_weight(name, quarter()).unwrap();
            match integrate_weight(&w, 1e-6).unwrap() {
                IntegralOutcome::Finite { value, .. } => {
                    assert!(
                        ((value - expected) / expected).abs() < 1e-6,
                        "{name}: {value} vs {expected}"
                    );
                }
                other => panic!("{name} unexpectedly {other:?}"),
            }
        }
    }

    #[test]
    fn chaouchi_integral_diverges() {
        let w = catalog_weight("chaouchi", quarter()).unwrap();
        match integrate_weight(&w, 1e-6).unwrap() {
            IntegralOutcome::Divergent { increments, .. } => {
                assert!(increments.len() >= 6);
                assert!(increments.windows(2).all(|w| w[1] >= w[0] * 0.99));
            }
            other => panic!("unexpectedly {other:?}"),
        }
    }

    #[test]
    fn sublevel_monotone_in_epsilon() {
        let w = catalog_weight("exp", quarter()).unwrap();
        let small = sublevel_set(&w, 0.05).unwrap();
        let large = sublevel_set(&w, 0.2).unwrap();
        let mut rng = substream(9, 0, 0);
        for _ in 0..500 {
            let r = 8.0 * rng.random::<f64>();
            let p = SectorPoint {
                x: r,
                y: r * (2.0 * rng.random::<f64>() - 1.0) * FRAC_PI_4.tan(),
            };
            if small.contains(p) {
                assert!(large.contains(p));
            }
        }
    }

    #[test]
    fn erosion_shrinks_the_sublevel() {
        let w = catalog_weight("exp", quarter()).unwrap();
        let sub = sublevel_set(&w, (-2.0f64).exp()).unwrap();
        let small = erosion_set(&w, (-2.0f64).exp(), 0.5).unwrap();
        let big = erosion_set(&w, (-2.0f64).exp(), 1.5).unwrap();
        let mut rng = substream(10, 0, 0);
        for _ in 0..500 {
            let x = 8.0 * rng.random::<f64>();
            let p = SectorPoint {
                x,
                y: x * (2.0 * rng.random::<f64>() - 1.0),
            };
            if big.contains(p) {
                assert!(small.contains(p));
            }
            if small.contains(p) {
                assert!(sub.contains(p));
            }
        }
    }

    #[test]
    fn exp_necessary_passes() {
        let w = catalog_weight("exp", quarter()).unwrap();
        let cfg = NecessaryConfig {
            epsilons: vec![(-2.0f64).exp()],
            horizons: vec![50.0, 200.0, 800.0],
            samples: 8000,
            ..NecessaryConfig::default()
        };
        let report = check_necessary(&w, &cfg).unwrap();
        assert_eq!(report.status, VerdictStatus::Pass);
    }

    #[test]
    fn constant_weight_fails_necessary_with_empty_sublevel() {
        let s = quarter();
        let w = WeightFn::new(
            s,
            "const",
            Arc::new(|_| 1.0),
            1.0,
            0.0,
            Some(Arc::new(|_| f64::INFINITY)),
        )
        .unwrap();
        let cfg = NecessaryConfig {
            samples: 2000,
            horizons: vec![10.0, 100.0],
            ..NecessaryConfig::default()
        };
        let report = check_necessary(&w, &cfg).unwrap();
        assert_eq!(report.status, VerdictStatus::Fail);
        for ev in &report.evidence {
            assert!(ev.estimate.ratios.iter().all(|&r| r == 0.0));
        }
    }

    #[test]
    fn sufficient_statuses() {
        let s = quarter();
        let gauss = check_sufficient(&catalog_weight("gauss", s).unwrap(), 1e-6).unwrap();
        assert_eq!(gauss.status, VerdictStatus::Pass);
        let ch = check_sufficient(&catalog_weight("chaouchi", s).unwrap(), 1e-6).unwrap();
        assert_eq!(ch.status, VerdictStatus::Fail);
    }

    #[test]
    fn chaouchi_sublevel_density_decreases() {
        let w = catalog_weight("chaouchi", quarter()).unwrap();
        let sub = sublevel_set(&w, 0.5).unwrap();
        let est = sector_lower_density(
            &sub,
            &[100.0, 1000.0, 10_000.0],
            DensityMethod::MonteCarlo {
                seed: 21,
                samples: 100_000,
            },
        )
        .unwrap();
        assert!(est.ratios[0] > est.ratios[1]);
        assert!(est.ratios[1] > est.ratios[2]);
        assert!(est.ratios[2] < 0.05);
    }
}
