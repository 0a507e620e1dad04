//! Batch front end: a single JSON run configuration (flags override fields),
//! four subcommands, deterministic JSON/CSV reports.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::density::{
    sector_lower_density, wedge_complement_density, DensityMethod, Primitive, SectorSet,
};
use crate::error::{Error, Result};
use crate::fhc::{
    construct_vector, orbit_density, plan_criterion, transition_density, verify_return,
    CriterionPlan, FhcVector, FhcVectorDoc, PlanConfig, TransitionOutcome,
};
use crate::lp_space::{CellSize, GridFunction, LpContext};
use crate::sector_geometry::Sector;
use crate::weights::{
    catalog_weight, check_necessary, check_sufficient, NecessaryConfig, VerdictStatus,
    WeightVerdict,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NECESSARY_FAIL: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_CONSTRUCTION_FAILED: i32 = 4;
pub const EXIT_VERIFICATION_FAILED: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "sector-fhc",
    about = "Weight verdicts, sector densities, and criterion experiments \
             for translation semigroups on weighted Lp spaces over a complex sector"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sufficient / necessary verdicts for a catalog weight
    Check(CommonArgs),
    /// Lower-density curve of a sector subset (CSV)
    Density(CommonArgs),
    /// Build the candidate vector of the criterion as a truncated series
    Construct(CommonArgs),
    /// Return / orbit-density / transition experiments on a built vector
    Orbit(CommonArgs),
}

/// Flags shared by all subcommands; each overrides the same-named config
/// field when given.
#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// JSON run configuration
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory for reports (default ".")
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Sector half-angle in radians
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Lp exponent
    #[arg(long)]
    pub p: Option<f64>,
    /// Dyadic cell side, e.g. "1/8"
    #[arg(long)]
    pub h: Option<String>,
    /// Truncation horizon (construct) / largest density horizon
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Catalog weight name
    #[arg(long)]
    pub weight: Option<String>,
}

/// Declarative sector subset for the density command.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SetSpec {
    Full,
    Ray { theta: f64 },
    Subsector { theta1: f64, theta2: f64 },
    Exact { primitives: Vec<Primitive> },
    Sublevel { weight: String, epsilon: f64 },
    Erosion { weight: String, epsilon: f64, compact_radius: f64 },
}

/// A scaled truncation indicator used as a construction target.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TargetSpec {
    pub radius: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct DensitySection {
    pub set: Option<SetSpec>,
    pub horizons: Vec<f64>,
    pub samples: usize,
}

impl Default for DensitySection {
    fn default() -> Self {
        DensitySection {
            set: None,
            horizons: vec![100.0, 1000.0, 10_000.0],
            samples: 20_000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstructSection {
    pub targets: Vec<TargetSpec>,
    pub integer_horizon: u64,
    pub horizon: f64,
    pub slack: f64,
}

impl Default for ConstructSection {
    fn default() -> Self {
        ConstructSection {
            targets: Vec::new(),
            integer_horizon: 1 << 12,
            horizon: 200.0,
            slack: 1.1,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OrbitSection {
    /// Path to the vector file written by `construct`.
    pub vector: Option<PathBuf>,
    /// verify-return | orbit-density | transition
    pub mode: String,
    pub level: usize,
    /// Ball radius around the target (orbit-density: c; transition: V radius).
    pub radius: f64,
    /// Transition-only: ball radius around U = targets[u_index].
    pub u_radius: f64,
    pub u_index: usize,
    pub horizons: Vec<f64>,
    pub samples: usize,
    /// verify-return probe budget.
    pub sample_count: usize,
}

impl Default for OrbitSection {
    fn default() -> Self {
        OrbitSection {
            vector: None,
            mode: "verify-return".into(),
            level: 1,
            radius: 1.8,
            u_radius: 5.0,
            u_index: 0,
            horizons: vec![10.0, 20.0, 40.0],
            samples: 2_000,
            sample_count: 16,
        }
    }
}

/// The single run-configuration document. Every field has a default; command
/// sections are read only by their command.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub alpha: f64,
    pub p: f64,
    pub h: String,
    pub seed: u64,
    pub weight: Option<String>,
    pub tolerance: f64,
    pub necessary: Option<NecessaryConfig>,
    pub density: DensitySection,
    pub construct: ConstructSection,
    pub orbit: OrbitSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            alpha: std::f64::consts::FRAC_PI_4,
            p: 1.0,
            h: "1/8".into(),
            seed: 0,
            weight: None,
            tolerance: 1e-6,
            necessary: None,
            density: DensitySection::default(),
            construct: ConstructSection::default(),
            orbit: OrbitSection::default(),
        }
    }
}

impl RunConfig {
    pub fn load(args: &CommonArgs) -> Result<(RunConfig, PathBuf)> {
        let mut config = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)?;
                serde_json::from_str(&text)?
            }
            None => RunConfig::default(),
        };
        // Flags take precedence over file fields.
        if let Some(seed) = args.seed {
            config.seed = seed;
        }
        if let Some(alpha) = args.alpha {
            config.alpha = alpha;
        }
        if let Some(p) = args.p {
            config.p = p;
        }
        if let Some(h) = &args.h {
            config.h = h.clone();
        }
        if let Some(w) = &args.weight {
            config.weight = Some(w.clone());
        }
        // --horizon sets "the horizon" of each command: the series truncation
        // for construct, the largest curve horizon for density and orbit.
        if let Some(horizon) = args.horizon {
            config.construct.horizon = horizon;
            if let Some(last) = config.density.horizons.last_mut() {
                *last = horizon;
            }
            if let Some(last) = config.orbit.horizons.last_mut() {
                *last = horizon;
            }
        }
        let out = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
        Ok((config, out))
    }

    fn sector(&self) -> Result<Sector> {
        Sector::new(self.alpha)
    }

    fn weight_name(&self) -> Result<&str> {
        self.weight
            .as_deref()
            .ok_or_else(|| Error::Input("no weight named in config or flags".into()))
    }

    fn context(&self) -> Result<LpContext> {
        let w = catalog_weight(self.weight_name()?, self.sector()?)?;
        LpContext::new(self.p, w)
    }

    fn targets(&self) -> Result<Vec<GridFunction>> {
        if self.construct.targets.is_empty() {
            return Err(Error::Input("construct.targets is empty".into()));
        }
        let sector = self.sector()?;
        let h = CellSize::parse(&self.h)?;
        self.construct
            .targets
            .iter()
            .map(|t| GridFunction::truncation_indicator(sector, h, t.radius, t.value))
            .collect()
    }

    fn plan(&self) -> Result<CriterionPlan> {
        plan_criterion(
            &self.targets()?,
            &self.context()?,
            &PlanConfig {
                integer_horizon: self.construct.integer_horizon,
                slack: self.construct.slack,
            },
        )
    }
}

fn write_report(out: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    fs::create_dir_all(out)?;
    let path = out.join(name);
    fs::write(&path, bytes)?;
    Ok(path)
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn cmd_check(args: &CommonArgs) -> Result<i32> {
    let (config, out) = RunConfig::load(args)?;
    let name = config.weight_name()?;
    let w = catalog_weight(name, config.sector()?)?;
    let sufficient = check_sufficient(&w, config.tolerance)?;
    let necessary_config = config.necessary.clone().unwrap_or(NecessaryConfig {
        seed: config.seed,
        ..Default::default()
    });
    let necessary = check_necessary(&w, &necessary_config)?;
    let wedge_analysis = if name == "chaouchi" {
        Some(
            [-0.9, -0.5, 0.0, 0.5]
                .iter()
                .map(|&k| wedge_complement_density(k))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    let verdict = WeightVerdict {
        name: name.to_string(),
        sufficient,
        necessary,
        wedge_analysis,
    };
    write_report(&out, "check.json", &to_json(&verdict)?)?;
    Ok(match (verdict.necessary.status, verdict.sufficient.status) {
        (VerdictStatus::Fail, _) => EXIT_NECESSARY_FAIL,
        (_, VerdictStatus::Pass) => EXIT_OK,
        _ => EXIT_INCONCLUSIVE,
    })
}

/// Materializes a declarative set spec against a sector.
pub fn build_set(spec: &SetSpec, sector: Sector) -> Result<SectorSet> {
    match spec {
        SetSpec::Full => Ok(SectorSet::full(sector)),
        SetSpec::Ray { theta } => SectorSet::ray(sector, *theta),
        SetSpec::Subsector { theta1, theta2 } => SectorSet::exact(
            sector,
            vec![Primitive::SubSector {
                theta1: *theta1,
                theta2: *theta2,
            }],
        ),
        SetSpec::Exact { primitives } => SectorSet::exact(sector, primitives.clone()),
        SetSpec::Sublevel { weight, epsilon } => {
            crate::weights::sublevel_set(&catalog_weight(weight, sector)?, *epsilon)
        }
        SetSpec::Erosion {
            weight,
            epsilon,
            compact_radius,
        } => crate::weights::erosion_set(&catalog_weight(weight, sector)?, *epsilon, *compact_radius),
    }
}

pub fn cmd_density(args: &CommonArgs) -> Result<i32> {
    let (config, out) = RunConfig::load(args)?;
    let spec = config
        .density
        .set
        .as_ref()
        .ok_or_else(|| Error::Input("density.set missing from config".into()))?;
    let set = build_set(spec, config.sector()?)?;
    let method = if set.is_exact() {
        DensityMethod::Exact
    } else {
        DensityMethod::MonteCarlo {
            seed: config.seed,
            samples: config.density.samples,
        }
    };
    let estimate = sector_lower_density(&set, &config.density.horizons, method)?;
    write_report(&out, "density.csv", estimate.to_csv().as_bytes())?;
    write_report(&out, "density.json", &to_json(&estimate)?)?;
    Ok(EXIT_OK)
}

pub fn cmd_construct(args: &CommonArgs) -> Result<i32> {
    let (config, out) = RunConfig::load(args)?;
    let plan = config.plan()?;
    match construct_vector(&plan, config.construct.horizon) {
        Ok(vector) => {
            write_report(&out, "vector.json", &to_json(&vector.to_doc(&plan))?)?;
            Ok(EXIT_OK)
        }
        Err(e @ Error::ConstructionFailed { .. }) => {
            eprintln!("{e}");
            Ok(EXIT_CONSTRUCTION_FAILED)
        }
        Err(e) => Err(e),
    }
}

/// Orbit report: one of the three experiment payloads plus the density CSV
/// where applicable.
#[derive(Debug, Serialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
enum OrbitReport {
    VerifyReturn {
        report: crate::fhc::ReturnReport,
    },
    OrbitDensity {
        report: crate::fhc::OrbitDensityReport,
        csv: String,
    },
    Transition {
        outcome: TransitionOutcome,
        csv: Option<String>,
    },
}

pub fn cmd_orbit(args: &CommonArgs) -> Result<i32> {
    let (config, out) = RunConfig::load(args)?;
    let plan = config.plan()?;
    let vector_path = config
        .orbit
        .vector
        .clone()
        .ok_or_else(|| Error::Input("orbit.vector path missing from config".into()))?;
    let doc: FhcVectorDoc = serde_json::from_str(&fs::read_to_string(&vector_path)?)?;
    let vector = FhcVector::from_doc(&doc, &plan)?;
    let section = &config.orbit;
    let level = section.level;
    if level == 0 || level > plan.levels() {
        return Err(Error::Input(format!("orbit.level {level} out of range")));
    }
    let target = plan.targets[level - 1].clone();
    let report = match section.mode.as_str() {
        "verify-return" => match verify_return(&vector, &plan, level, section.sample_count) {
            Ok(report) => OrbitReport::VerifyReturn { report },
            Err(e @ Error::VerificationFailed { .. }) => {
                eprintln!("{e}");
                return Ok(EXIT_VERIFICATION_FAILED);
            }
            Err(e) => return Err(e),
        },
        "orbit-density" => {
            let report = orbit_density(
                &vector,
                &plan,
                &target,
                section.radius,
                &section.horizons,
                config.seed,
                section.samples,
                Some(level),
            )?;
            let csv = report.estimate.to_csv();
            OrbitReport::OrbitDensity { report, csv }
        }
        "transition" => {
            let u_index = section.u_index;
            if u_index >= plan.levels() {
                return Err(Error::Input(format!("orbit.u_index {u_index} out of range")));
            }
            let u = plan.targets[u_index].clone();
            let outcome = transition_density(
                &vector,
                &plan,
                &u,
                section.u_radius,
                &target,
                section.radius,
                &section.horizons,
                config.seed,
                section.samples,
            )?;
            let csv = match &outcome {
                TransitionOutcome::Estimated { estimate, .. } => Some(estimate.to_csv()),
                TransitionOutcome::Inconclusive => None,
            };
            OrbitReport::Transition { outcome, csv }
        }
        other => {
            return Err(Error::Input(format!(
                "unknown orbit mode '{other}' (expected verify-return, \
                 orbit-density, or transition)"
            )))
        }
    };
    write_report(&out, "orbit.json", &to_json(&report)?)?;
    Ok(EXIT_OK)
}

/// Dispatches a parsed command line; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Check(args) => cmd_check(args),
        Command::Density(args) => cmd_density(args),
        Command::Construct(args) => cmd_construct(args),
        Command::Orbit(args) => cmd_orbit(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_defaults_parse() {
        let config: RunConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(config.h, "1/8");
        assert_eq!(config.p, 1.0);
        assert!(config.weight.is_none());
    }

    #[test]
    fn flags_override_config_fields() {
        let args = CommonArgs {
            seed: Some(9),
            alpha: Some(0.5),
            weight: Some("exp".into()),
            ..Default::default()
        };
        let (config, out) = RunConfig::load(&args).unwrap();
        assert_eq!(config.seed, 9);
        assert_eq!(config.alpha, 0.5);
        assert_eq!(config.weight.as_deref(), Some("exp"));
        assert_eq!(out, PathBuf::from("."));
    }

    #[test]
    fn set_specs_build() {
        let sector = Sector::new(std::f64::consts::FRAC_PI_4).unwrap();
        assert!(build_set(&SetSpec::Full, sector).unwrap().is_exact());
        assert!(build_set(&SetSpec::Ray { theta: 0.1 }, sector).unwrap().is_exact());
        let sub = build_set(
            &SetSpec::Sublevel {
                weight: "chaouchi".into(),
                epsilon: 0.5,
            },
            sector,
        )
        .unwrap();
        assert!(!sub.is_exact());
        assert!(build_set(
            &SetSpec::Sublevel {
                weight: "nope".into(),
                epsilon: 0.5
            },
            sector
        )
        .is_err());
    }

    #[test]
    fn unknown_orbit_mode_is_an_input_error() {
        let spec: std::result::Result<SetSpec, _> =
            serde_json::from_str(r#"{"kind": "no-such-kind"}"#);
        assert!(spec.is_err());
    }
}
