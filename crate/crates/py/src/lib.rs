//! Python bindings for the sector toolkit: sectors, catalog weights, grid
//! functions with the translation/backshift operators, density estimates,
//! and a one-call criterion experiment.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use sector_fhc::cli::{build_set, SetSpec};
use sector_fhc::density::{sector_lower_density, DensityMethod};
use sector_fhc::fhc;
use sector_fhc::lp_space::{CellSize, GridFunction, LpContext};
use sector_fhc::weights::{
    catalog_weight, check_necessary, check_sufficient, IntegralOutcome, NecessaryConfig,
    VerdictStatus, WeightFn,
};
use sector_fhc::SectorPoint;

fn err(e: sector_fhc::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(frozen)]
struct Sector {
    inner: sector_fhc::Sector,
}

#[pymethods]
impl Sector {
    #[new]
    fn new(alpha: f64) -> PyResult<Self> {
        Ok(Sector {
            inner: sector_fhc::Sector::new(alpha).map_err(err)?,
        })
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha()
    }

    fn contains(&self, x: f64, y: f64) -> PyResult<bool> {
        Ok(self.inner.contains(SectorPoint::new(x, y).map_err(err)?))
    }

    fn truncated_area(&self, t: f64) -> PyResult<f64> {
        self.inner.truncated_area(t).map_err(err)
    }
}

#[pyclass(frozen)]
struct Weight {
    inner: WeightFn,
}

fn status_str(s: VerdictStatus) -> &'static str {
    match s {
        VerdictStatus::Pass => "pass",
        VerdictStatus::Fail => "fail",
        VerdictStatus::Inconclusive => "inconclusive",
    }
}

#[pymethods]
impl Weight {
    #[new]
    fn new(name: &str, alpha: f64) -> PyResult<Self> {
        let sector = sector_fhc::Sector::new(alpha).map_err(err)?;
        Ok(Weight {
            inner: catalog_weight(name, sector).map_err(err)?,
        })
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn eval(&self, x: f64, y: f64) -> PyResult<f64> {
        self.inner
            .eval_checked(SectorPoint::new(x, y).map_err(err)?)
            .map_err(err)
    }

    /// (value, error_bound) of the sector integral, or None when divergent.
    #[pyo3(signature = (tol=1e-8))]
    fn integrate(&self, tol: f64) -> PyResult<Option<(f64, f64)>> {
        match sector_fhc::weights::integrate_weight(&self.inner, tol).map_err(err)? {
            IntegralOutcome::Finite { value, error_bound } => Ok(Some((value, error_bound))),
            IntegralOutcome::Divergent { .. } => Ok(None),
        }
    }

    /// (sufficient, necessary) verdict strings: "pass" | "fail" | "inconclusive".
    #[pyo3(signature = (seed=0))]
    fn check(&self, seed: u64) -> PyResult<(String, String)> {
        let sufficient = check_sufficient(&self.inner, 1e-6).map_err(err)?;
        let necessary = check_necessary(
            &self.inner,
            &NecessaryConfig {
                seed,
                ..Default::default()
            },
        )
        .map_err(err)?;
        Ok((
            status_str(sufficient.status).to_string(),
            status_str(necessary.status).to_string(),
        ))
    }
}

#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct GridFn {
    inner: GridFunction,
}

#[pymethods]
impl GridFn {
    /// Indicator of the truncated sector of the given radius, scaled.
    #[staticmethod]
    #[pyo3(signature = (alpha, h, radius, value=1.0))]
    fn indicator(alpha: f64, h: &str, radius: f64, value: f64) -> PyResult<Self> {
        let sector = sector_fhc::Sector::new(alpha).map_err(err)?;
        let h = CellSize::parse(h).map_err(err)?;
        Ok(GridFn {
            inner: GridFunction::truncation_indicator(sector, h, radius, value).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let doc = serde_json::from_str(text)
            .map_err(|e| PyValueError::new_err(e.to_string()))?;
        Ok(GridFn {
            inner: GridFunction::from_doc(&doc).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.to_doc())
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn cell_count(&self) -> usize {
        self.inner.cells().len()
    }

    #[getter]
    fn support_radius(&self) -> f64 {
        self.inner.support_radius()
    }

    fn translate(&self, x: f64, y: f64) -> PyResult<Self> {
        let t = SectorPoint::new(x, y).map_err(err)?;
        Ok(GridFn {
            inner: self.inner.translate(t).map_err(err)?,
        })
    }

    fn backshift(&self, x: f64, y: f64) -> PyResult<Self> {
        let t = SectorPoint::new(x, y).map_err(err)?;
        Ok(GridFn {
            inner: self.inner.backshift(t).map_err(err)?,
        })
    }

    fn scale(&self, c: f64) -> PyResult<Self> {
        Ok(GridFn {
            inner: self.inner.scale(c).map_err(err)?,
        })
    }

    fn add(&self, other: &GridFn) -> PyResult<Self> {
        Ok(GridFn {
            inner: GridFunction::lincomb(&[1.0, 1.0], &[&self.inner, &other.inner])
                .map_err(err)?,
        })
    }

    /// Weighted Lp norm with midpoint quadrature.
    #[pyo3(signature = (weight, p=1.0))]
    fn norm(&self, weight: &Weight, p: f64) -> PyResult<f64> {
        LpContext::new(p, weight.inner.clone())
            .and_then(|ctx| ctx.norm(&self.inner))
            .map_err(err)
    }

    fn __eq__(&self, other: &GridFn) -> bool {
        self.inner == other.inner
    }
}

/// Lower-density curve of a set spec (same JSON schema as the CLI).
/// Returns (horizons, ratios, liminf_proxy).
#[pyfunction]
#[pyo3(signature = (spec_json, alpha, horizons, seed=0, samples=20_000))]
fn lower_density(
    spec_json: &str,
    alpha: f64,
    horizons: Vec<f64>,
    seed: u64,
    samples: usize,
) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    let sector = sector_fhc::Sector::new(alpha).map_err(err)?;
    let spec: SetSpec =
        serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let set = build_set(&spec, sector).map_err(err)?;
    let method = if set.is_exact() {
        DensityMethod::Exact
    } else {
        DensityMethod::MonteCarlo { seed, samples }
    };
    let estimate = sector_lower_density(&set, &horizons, method).map_err(err)?;
    Ok((estimate.horizons, estimate.ratios, estimate.liminf_proxy))
}

/// Plan, construct, and verify a level-1 return experiment in one call.
/// Targets are (radius, value) indicator pairs. Returns a dict with the
/// separation radii, the number of summed terms, and the worst return error
/// against its bound.
#[pyfunction]
#[pyo3(signature = (weight_name, targets, alpha, p=1.0, h="1/8", horizon=200.0))]
fn criterion_experiment(
    py: Python<'_>,
    weight_name: &str,
    targets: Vec<(f64, f64)>,
    alpha: f64,
    p: f64,
    h: &str,
    horizon: f64,
) -> PyResult<Py<pyo3::types::PyDict>> {
    let sector = sector_fhc::Sector::new(alpha).map_err(err)?;
    let h = CellSize::parse(h).map_err(err)?;
    let targets: Vec<GridFunction> = targets
        .into_iter()
        .map(|(radius, value)| GridFunction::truncation_indicator(sector, h, radius, value))
        .collect::<sector_fhc::Result<_>>()
        .map_err(err)?;
    let ctx = LpContext::new(p, catalog_weight(weight_name, sector).map_err(err)?).map_err(err)?;
    let plan = fhc::plan_criterion(&targets, &ctx, &fhc::PlanConfig::default()).map_err(err)?;
    let vector = fhc::construct_vector(&plan, horizon).map_err(err)?;
    let report = fhc::verify_return(&vector, &plan, 1, 16).map_err(err)?;

    let out = pyo3::types::PyDict::new(py);
    out.set_item("radii", plan.radii.clone())?;
    out.set_item("terms", vector.terms.len())?;
    out.set_item("truncation_horizon", vector.truncation_horizon)?;
    out.set_item("worst_return_error", report.worst_error)?;
    out.set_item("return_bound", report.bound)?;
    out.set_item("plan_digest", plan.digest())?;
    Ok(out.into())
}

#[pymodule]
fn sector_fhc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Sector>()?;
    m.add_class::<Weight>()?;
    m.add_class::<GridFn>()?;
    m.add_function(wrap_pyfunction!(lower_density, m)?)?;
    m.add_function(wrap_pyfunction!(criterion_experiment, m)?)?;
    Ok(())
}
