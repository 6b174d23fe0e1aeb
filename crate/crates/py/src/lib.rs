//! Python bindings. Build with `maturin develop -m crates/py/Cargo.toml`
//! or `cargo build -p cachenet-py --release` and load the shared library.

use cachenet::config::{Config, ExperimentKind, Scheme, Tier, TierSelection};
use cachenet::experiment::{run_experiment, run_scheme, validate_mc, ExperimentSpec, TierModel};
use cachenet::mc::{simulate_scdp_mm, simulate_scdp_mu};
use cachenet::table::Format;
use cachenet::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

fn parse_tier(s: &str) -> PyResult<Tier> {
    match s {
        "mu" => Ok(Tier::Mu),
        "mm" => Ok(Tier::Mm),
        _ => Err(PyValueError::new_err(format!("unknown tier `{s}` (mu or mm)"))),
    }
}

/// Outcome of one placement scheme.
#[pyclass(get_all, frozen)]
struct Placement {
    scheme: String,
    tier: String,
    placement: Vec<f64>,
    scdp: f64,
    iterations: Option<usize>,
    converged: Option<bool>,
}

#[pymethods]
impl Placement {
    fn __repr__(&self) -> String {
        format!("Placement(scheme={:?}, tier={:?}, scdp={:.6})", self.scheme, self.tier, self.scdp)
    }
}

/// A validated configuration plus the operations that run against it.
#[pyclass]
struct Network {
    cfg: Config,
}

#[pymethods]
impl Network {
    /// `toml` is a config document; `None` uses the built-in defaults.
    #[new]
    #[pyo3(signature = (toml=None))]
    fn new(toml: Option<&str>) -> PyResult<Self> {
        let cfg = match toml {
            Some(t) => Config::from_toml_str(t).map_err(py_err)?,
            None => Config::default(),
        };
        Ok(Self { cfg })
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.cfg.seed
    }

    fn config_hash(&self) -> String {
        self.cfg.hash()
    }

    fn to_toml(&self) -> String {
        self.cfg.to_toml_string()
    }

    /// Per-content delivery probability at caching probability `b`.
    fn scdp_content(&self, tier: &str, b: f64) -> PyResult<f64> {
        let model = TierModel::build(parse_tier(tier)?, &self.cfg, &self.cfg.requirement()).map_err(py_err)?;
        model.content(b).map_err(py_err)
    }

    /// Total delivery probability of a placement over the configured library.
    fn scdp_total(&self, tier: &str, placement: Vec<f64>) -> PyResult<f64> {
        let lib = self.cfg.library().map_err(py_err)?;
        let p = cachenet::PlacementVector::new(placement).map_err(py_err)?;
        let model = TierModel::build(parse_tier(tier)?, &self.cfg, &self.cfg.requirement()).map_err(py_err)?;
        model.total(&p, &lib).map_err(py_err)
    }

    /// Monte Carlo estimate `(mean, std_error)` of the per-content probability.
    #[pyo3(signature = (tier, b, drops=20000, seed=None))]
    fn simulate_content(&self, py: Python<'_>, tier: &str, b: f64, drops: usize, seed: Option<u64>) -> PyResult<(f64, f64)> {
        let tier = parse_tier(tier)?;
        let mut mc = self.cfg.mc_params(drops);
        mc.seed = seed.unwrap_or(self.cfg.seed);
        let req = self.cfg.requirement();
        let cfg = &self.cfg;
        let est = py
            .detach(|| match TierModel::build(tier, cfg, &req)? {
                TierModel::Mu(c) => simulate_scdp_mu(b, c.config(), c.phi(), &mc),
                TierModel::Mm(c) => simulate_scdp_mm(b, c.config(), c.phi(), &mc),
            })
            .map_err(py_err)?;
        Ok((est.mean, est.std_error))
    }

    /// Places the configured library with `scheme` (mpc, cceo or twostair).
    fn optimize(&self, py: Python<'_>, scheme: &str, tier: &str) -> PyResult<Placement> {
        let scheme = Scheme::parse(scheme).map_err(py_err)?;
        let t = parse_tier(tier)?;
        let cfg = &self.cfg;
        let o = py
            .detach(|| {
                let lib = cfg.library()?;
                let model = TierModel::build(t, cfg, &cfg.requirement())?;
                run_scheme(scheme, &model, &lib, cfg, cfg.seed)
            })
            .map_err(py_err)?;
        Ok(Placement {
            scheme: scheme.name().into(),
            tier: t.name().into(),
            placement: o.placement.into_inner(),
            scdp: o.scdp,
            iterations: o.iterations,
            converged: o.converged,
        })
    }

    /// Runs an experiment and returns the table as CSV or JSON text.
    #[pyo3(signature = (kind=None, tier=None, format="csv"))]
    fn run(&self, py: Python<'_>, kind: Option<&str>, tier: Option<&str>, format: &str) -> PyResult<String> {
        let mut spec = ExperimentSpec::from_config(&self.cfg);
        if let Some(k) = kind {
            spec.kind = ExperimentKind::parse(k).map_err(py_err)?;
        }
        if let Some(t) = tier {
            spec.tier = TierSelection::parse(t).map_err(py_err)?;
        }
        let format = Format::parse(format).map_err(py_err)?;
        let cfg = &self.cfg;
        let table = py.detach(|| run_experiment(&spec, cfg)).map_err(py_err)?;
        let mut out = Vec::new();
        table.write(format, &mut out).map_err(py_err)?;
        String::from_utf8(out).map_err(|e| PyRuntimeError::new_err(e.to_string()))
    }

    /// Analytic-vs-simulation check; returns `(all_passed, rows)` with rows
    /// `(tier, antennas, b, analytic, mc, std_error, z, passed)`.
    #[pyo3(signature = (tolerance_sigma=None))]
    #[allow(clippy::type_complexity)]
    fn validate_mc(
        &self,
        py: Python<'_>,
        tolerance_sigma: Option<f64>,
    ) -> PyResult<(bool, Vec<(String, Option<u32>, f64, f64, f64, f64, f64, bool)>)> {
        let tol = tolerance_sigma.unwrap_or(self.cfg.mc.tolerance_sigma);
        let cfg = &self.cfg;
        let report = py.detach(|| validate_mc(cfg, tol)).map_err(py_err)?;
        let rows = report
            .points
            .iter()
            .map(|p| {
                (
                    p.tier.name().to_string(),
                    p.antennas,
                    p.b,
                    p.analytic,
                    p.estimate.mean,
                    p.estimate.std_error,
                    p.z,
                    p.pass,
                )
            })
            .collect();
        Ok((report.passed(), rows))
    }
}

/// ε maximizing the head/band split for fixed (ϖ, ℓ, γ).
#[pyfunction]
fn optimal_epsilon(varpi: f64, ell: f64, gamma: f64) -> PyResult<f64> {
    cachenet::twostair::optimal_epsilon(varpi, ell, gamma).map_err(py_err)
}

/// Gauss hypergeometric ₂F₁(a, b; c; z).
#[pyfunction]
fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> PyResult<f64> {
    cachenet::specfun::gauss_2f1(a, b, c, z).map_err(py_err)
}

#[pymodule]
fn cachenet_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Network>()?;
    m.add_class::<Placement>()?;
    m.add_function(wrap_pyfunction!(optimal_epsilon, m)?)?;
    m.add_function(wrap_pyfunction!(hyp2f1, m)?)?;
    m.add("SCHEMA_VERSION", cachenet::config::SCHEMA_VERSION)?;
    Ok(())
}
