//! Experiment runner: sweeps over one parameter, evaluates placement
//! schemes per tier, and collects rows into a [`Table`].
//!
//! Grid points run in parallel; rows are returned in grid order and every
//! random choice is keyed by the seed, so output does not depend on the
//! number of worker threads.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cceo::{cceo_optimize, CceoTrace};
use crate::config::{Config, ExperimentKind, Scheme, Tier, TierSelection};
use crate::error::{Error, Result};
use crate::mc::{simulate_scdp_mm, simulate_scdp_mu, simulate_total, McEstimate};
use crate::model::{mpc_placement, ContentLibrary, DeliveryRequirement, PlacementVector};
use crate::scdp_mm::{scdp_content_mm, scdp_content_mm_los, scdp_content_mm_nlos, scdp_total_mm, MmCoverageContext};
use crate::scdp_mu::{scdp_content_mu, scdp_total_mu, MuCoverageContext, ScdpTable};
use crate::table::{Cell, Table};
use crate::twostair::twostair_optimize;

/// Default drop count for validate-mc when none is given.
pub const VALIDATION_DROPS: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub tier: TierSelection,
    pub schemes: Vec<Scheme>,
    pub grid: Vec<f64>,
    pub capacities: Vec<f64>,
    pub antennas: Vec<u32>,
    pub b_values: Vec<f64>,
    pub seed: u64,
    /// 0 leaves out Monte Carlo columns.
    pub mc_drops: usize,
    /// Adds a wall-clock column; off by default because it breaks
    /// byte-identical reruns.
    pub timing: bool,
}

impl ExperimentSpec {
    pub fn from_config(cfg: &Config) -> Self {
        let ex = &cfg.experiment;
        Self {
            kind: ex.kind,
            tier: ex.tier,
            schemes: ex.schemes.clone(),
            grid: ex.grid.clone(),
            capacities: ex.capacities.clone(),
            antennas: ex.antennas.clone(),
            b_values: ex.b_values.clone(),
            seed: cfg.seed,
            mc_drops: cfg.mc.drops,
            timing: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.needs_grid() && self.grid.is_empty() {
            return Err(Error::Config(format!(
                "[experiment].grid: {} needs a non-empty grid",
                self.kind.name()
            )));
        }
        let needs_schemes = !matches!(self.kind, ExperimentKind::ScdpVsB | ExperimentKind::ValidateMc);
        if needs_schemes && self.schemes.is_empty() {
            return Err(Error::Config("[experiment].schemes: need at least one scheme".into()));
        }
        if self.kind == ExperimentKind::CacheDensity && self.capacities.is_empty() {
            return Err(Error::Config("[experiment].capacities: must not be empty".into()));
        }
        Ok(())
    }
}

/// One tier's analytic evaluator.
#[derive(Debug, Clone)]
pub enum TierModel {
    Mu(MuCoverageContext),
    Mm(MmCoverageContext),
}

impl TierModel {
    pub fn build(tier: Tier, cfg: &Config, req: &DeliveryRequirement) -> Result<Self> {
        Ok(match tier {
            Tier::Mu => TierModel::Mu(MuCoverageContext::from_requirement(cfg.mu_tier(), req)?),
            Tier::Mm => TierModel::Mm(MmCoverageContext::from_requirement(cfg.mm_tier(), req)?),
        })
    }

    pub fn tier(&self) -> Tier {
        match self {
            TierModel::Mu(_) => Tier::Mu,
            TierModel::Mm(_) => Tier::Mm,
        }
    }

    pub fn content(&self, b: f64) -> Result<f64> {
        match self {
            TierModel::Mu(c) => scdp_content_mu(b, c),
            TierModel::Mm(c) => scdp_content_mm(b, c),
        }
    }

    pub fn total(&self, placement: &PlacementVector, lib: &ContentLibrary) -> Result<f64> {
        match self {
            TierModel::Mu(c) => scdp_total_mu(placement, lib, c),
            TierModel::Mm(c) => scdp_total_mm(placement, lib, c),
        }
    }

    pub fn simulate(&self, placement: &PlacementVector, lib: &ContentLibrary, cfg: &Config, drops: usize, seed: u64) -> Result<McEstimate> {
        let mut mc = cfg.mc_params(drops);
        mc.seed = seed;
        let est = match self {
            TierModel::Mu(c) => simulate_total(placement, lib, Some((c.config(), c.phi())), None, &mc)?.mu,
            TierModel::Mm(c) => simulate_total(placement, lib, None, Some((c.config(), c.phi())), &mc)?.mm,
        };
        Ok(est.expect("requested tier is simulated"))
    }
}

#[derive(Debug, Clone)]
pub struct SchemeOutcome {
    pub scheme: Scheme,
    pub placement: PlacementVector,
    /// Exact SCDP of the placement.
    pub scdp: f64,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub trace: Option<CceoTrace>,
}

/// Places content with `scheme` and evaluates the result exactly.
pub fn run_scheme(scheme: Scheme, model: &TierModel, lib: &ContentLibrary, cfg: &Config, seed: u64) -> Result<SchemeOutcome> {
    match scheme {
        Scheme::Mpc => {
            let placement = mpc_placement(lib);
            let scdp = model.total(&placement, lib)?;
            Ok(SchemeOutcome {
                scheme,
                placement,
                scdp,
                iterations: None,
                converged: None,
                trace: None,
            })
        }
        Scheme::Cceo => {
            let mut params = cfg.cceo_params();
            params.seed = seed;
            let result = match model {
                TierModel::Mu(c) => {
                    let table = ScdpTable::build(c, ScdpTable::DEFAULT_INTERVALS)?;
                    cceo_optimize(|b| Ok(table.total(b, lib)), lib, &params)?
                }
                TierModel::Mm(c) => cceo_optimize(|b| crate::scdp_mm::scdp_total_mm_unchecked(b, lib, c), lib, &params)?,
            };
            let scdp = model.total(&result.placement, lib)?;
            Ok(SchemeOutcome {
                scheme,
                iterations: Some(result.trace.len()),
                converged: Some(result.trace.converged),
                placement: result.placement,
                scdp,
                trace: Some(result.trace),
            })
        }
        Scheme::Twostair => {
            let r = match model {
                TierModel::Mu(c) => twostair_optimize(c, lib, &cfg.newton_params())?,
                TierModel::Mm(c) => twostair_optimize(c, lib, &cfg.newton_params())?,
            };
            Ok(SchemeOutcome {
                scheme,
                placement: r.placement,
                scdp: r.scdp,
                iterations: Some(r.iterations),
                converged: Some(r.converged),
                trace: None,
            })
        }
    }
}

/// Builds rows cell by cell; a failing cell stays empty and its message
/// lands in the `error` column.
struct RowBuilder {
    cells: Vec<Cell>,
    errors: Vec<String>,
}

impl RowBuilder {
    fn new() -> Self {
        Self {
            cells: Vec::new(),
            errors: Vec::new(),
        }
    }

    fn push(&mut self, c: impl Into<Cell>) {
        self.cells.push(c.into());
    }

    fn push_result(&mut self, label: &str, r: Result<f64>) {
        match r {
            Ok(v) => self.cells.push(Cell::Num(v)),
            Err(e) => {
                self.cells.push(Cell::Empty);
                self.errors.push(format!("{label}: {e}"));
            }
        }
    }

    fn push_mc(&mut self, label: &str, r: Result<McEstimate>) {
        match r {
            Ok(e) => {
                self.cells.push(Cell::Num(e.mean));
                self.cells.push(Cell::Num(e.std_error));
            }
            Err(e) => {
                self.cells.push(Cell::Empty);
                self.cells.push(Cell::Empty);
                self.errors.push(format!("{label}: {e}"));
            }
        }
    }

    fn pad_to(&mut self, width: usize) {
        while self.cells.len() < width {
            self.cells.push(Cell::Empty);
        }
    }

    fn finish(mut self, started: Option<Instant>) -> Vec<Cell> {
        if let Some(t) = started {
            self.cells.push(Cell::Num(t.elapsed().as_secs_f64()));
        }
        self.cells.push(if self.errors.is_empty() {
            Cell::Empty
        } else {
            Cell::Text(self.errors.join("; "))
        });
        self.cells
    }
}

fn finish_columns(mut cols: Vec<String>, spec: &ExperimentSpec) -> Vec<String> {
    if spec.timing {
        cols.push("wall_time_s".into());
    }
    cols.push("error".into());
    cols
}

fn scheme_columns(spec: &ExperimentSpec, tiers: &[Tier], prefix_tier: bool) -> Vec<String> {
    let mut cols = Vec::new();
    for t in tiers {
        for s in &spec.schemes {
            let base = if prefix_tier {
                format!("{}_{}", t.name(), s.name())
            } else {
                s.name().to_string()
            };
            cols.push(base.clone());
            if spec.mc_drops > 0 {
                cols.push(format!("{base}_mc"));
                cols.push(format!("{base}_mc_se"));
            }
        }
    }
    cols
}

/// Evaluates every scheme in every tier for one library/config pair.
fn scheme_cells(row: &mut RowBuilder, spec: &ExperimentSpec, cfg: &Config, lib: &ContentLibrary, tiers: &[Tier], point: usize) {
    let req = cfg.requirement();
    for &t in tiers {
        let model = TierModel::build(t, cfg, &req);
        for &s in &spec.schemes {
            let label = format!("{}_{}", t.name(), s.name());
            let outcome = model
                .as_ref()
                .map_err(clone_err)
                .and_then(|m| run_scheme(s, m, lib, cfg, spec.seed));
            match outcome {
                Ok(o) => {
                    row.push(o.scdp);
                    if spec.mc_drops > 0 {
                        let m = model.as_ref().expect("model built");
                        let seed = point_seed(spec.seed, point);
                        row.push_mc(&format!("{label}_mc"), m.simulate(&o.placement, lib, cfg, spec.mc_drops, seed));
                    }
                }
                Err(e) => {
                    row.push(Cell::Empty);
                    if spec.mc_drops > 0 {
                        row.push(Cell::Empty);
                        row.push(Cell::Empty);
                    }
                    row.errors.push(format!("{label}: {e}"));
                }
            }
        }
    }
}

fn clone_err(e: &Error) -> Error {
    Error::Config(e.to_string())
}

fn point_seed(seed: u64, point: usize) -> u64 {
    seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(point as u64 + 1))
}

/// Table plus the CCEO traces of an optimize run, one per tier.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub table: Table,
    pub traces: Vec<(Tier, CceoTrace)>,
}

/// Runs `spec` against `cfg` and returns the table in grid order.
pub fn run_experiment(spec: &ExperimentSpec, cfg: &Config) -> Result<Table> {
    Ok(run_experiment_full(spec, cfg)?.table)
}

pub fn run_experiment_full(spec: &ExperimentSpec, cfg: &Config) -> Result<ExperimentOutput> {
    spec.validate()?;
    let mut cfg = cfg.clone();
    cfg.seed = spec.seed;
    let tiers = spec.tier.tiers();
    let started = |on: bool| on.then(Instant::now);
    let hash = cfg.hash();
    let mut traces = Vec::new();

    let (columns, rows): (Vec<String>, Vec<Vec<Cell>>) = match spec.kind {
        ExperimentKind::ScdpVsB => {
            let mut cols = vec!["b".to_string()];
            for t in tiers {
                match t {
                    Tier::Mu => cols.push("scdp_mu".into()),
                    Tier::Mm => cols.extend(["scdp_mm".into(), "scdp_mm_los".into(), "scdp_mm_nlos".into()]),
                }
                if spec.mc_drops > 0 {
                    cols.push(format!("mc_{}", t.name()));
                    cols.push(format!("mc_{}_se", t.name()));
                }
            }
            let req = cfg.requirement();
            let models: Vec<Result<TierModel>> = tiers.iter().map(|&t| TierModel::build(t, &cfg, &req)).collect();
            let rows = spec
                .grid
                .par_iter()
                .enumerate()
                .map(|(i, &b)| {
                    let t0 = started(spec.timing);
                    let mut row = RowBuilder::new();
                    row.push(b);
                    for m in &models {
                        let m = match m {
                            Ok(m) => m,
                            Err(e) => {
                                row.errors.push(e.to_string());
                                continue;
                            }
                        };
                        let mut mc = cfg.mc_params(spec.mc_drops);
                        mc.seed = point_seed(spec.seed, i);
                        match m {
                            TierModel::Mu(c) => {
                                row.push_result("scdp_mu", scdp_content_mu(b, c));
                                if spec.mc_drops > 0 {
                                    row.push_mc("mc_mu", simulate_scdp_mu(b, c.config(), c.phi(), &mc));
                                }
                            }
                            TierModel::Mm(c) => {
                                row.push_result("scdp_mm", scdp_content_mm(b, c));
                                row.push_result("scdp_mm_los", scdp_content_mm_los(b, c));
                                row.push_result("scdp_mm_nlos", scdp_content_mm_nlos(b, c));
                                if spec.mc_drops > 0 {
                                    row.push_mc("mc_mm", simulate_scdp_mm(b, c.config(), c.phi(), &mc));
                                }
                            }
                        }
                    }
                    row.pad_to(cols.len());
                    row.finish(t0)
                })
                .collect();
            (cols, rows)
        }
        ExperimentKind::ScdpVsRate
        | ExperimentKind::SweepM
        | ExperimentKind::SweepJ
        | ExperimentKind::SweepGamma => {
            let name = match spec.kind {
                ExperimentKind::ScdpVsRate => "rate_bps",
                ExperimentKind::SweepM => "M",
                ExperimentKind::SweepJ => "J",
                _ => "gamma",
            };
            let mut cols = vec![name.to_string()];
            cols.extend(scheme_columns(spec, tiers, true));
            let rows = spec
                .grid
                .par_iter()
                .enumerate()
                .map(|(i, &v)| {
                    let t0 = started(spec.timing);
                    let mut row = RowBuilder::new();
                    row.push(v);
                    let mut point_cfg = cfg.clone();
                    let lib = &cfg.library;
                    let built = match spec.kind {
                        ExperimentKind::ScdpVsRate => {
                            point_cfg.delivery.rate_bps = v;
                            cfg.library()
                        }
                        ExperimentKind::SweepM => cfg.library_with(lib.contents, v, lib.zipf_exponent),
                        ExperimentKind::SweepJ => cfg.library_with(v as usize, lib.capacity, lib.zipf_exponent),
                        _ => cfg.library_with(lib.contents, lib.capacity, v),
                    };
                    match built {
                        Ok(l) => scheme_cells(&mut row, spec, &point_cfg, &l, tiers, i),
                        Err(e) => row.errors.push(format!("library: {e}")),
                    }
                    row.pad_to(cols.len());
                    row.finish(t0)
                })
                .collect();
            (cols, rows)
        }
        ExperimentKind::CacheDensity => {
            let mut cols = vec!["tier".to_string(), "density_per_km2".into(), "M".into()];
            cols.extend(scheme_columns(spec, &[Tier::Mu], false));
            let points: Vec<(Tier, f64, f64)> = tiers
                .iter()
                .flat_map(|&t| {
                    spec.grid
                        .iter()
                        .flat_map(move |&d| spec.capacities.iter().map(move |&m| (t, d, m)))
                })
                .collect();
            let rows = points
                .par_iter()
                .enumerate()
                .map(|(i, &(t, d, m))| {
                    let t0 = started(spec.timing);
                    let mut row = RowBuilder::new();
                    row.push(t.name());
                    row.push(d);
                    row.push(m);
                    let mut point_cfg = cfg.clone();
                    point_cfg.mu.density_per_km2 = d;
                    point_cfg.mm.density_per_km2 = d;
                    let lib = &cfg.library;
                    match cfg.library_with(lib.contents, m, lib.zipf_exponent) {
                        Ok(l) => scheme_cells(&mut row, spec, &point_cfg, &l, &[t], i),
                        Err(e) => row.errors.push(format!("library: {e}")),
                    }
                    row.pad_to(cols.len());
                    row.finish(t0)
                })
                .collect();
            (cols, rows)
        }
        ExperimentKind::ValidateMc => {
            let report = validate_mc_with(&cfg, spec, cfg.mc.tolerance_sigma)?;
            let table = report.to_table(hash.clone(), spec.seed);
            (table.columns, table.rows)
        }
        ExperimentKind::Optimize => {
            let mut cols: Vec<String> = ["tier", "scheme", "scdp", "budget_used", "iterations", "converged", "placement"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            if spec.mc_drops > 0 {
                cols.extend(["mc".to_string(), "mc_se".into()]);
            }
            let lib = cfg.library()?;
            let req = cfg.requirement();
            let points: Vec<(Tier, Scheme)> = tiers
                .iter()
                .flat_map(|&t| spec.schemes.iter().map(move |&s| (t, s)))
                .collect();
            let results: Vec<(Vec<Cell>, Option<CceoTrace>)> = points
                .par_iter()
                .enumerate()
                .map(|(i, &(t, s))| {
                    let t0 = started(spec.timing);
                    let mut trace = None;
                    let mut row = RowBuilder::new();
                    row.push(t.name());
                    row.push(s.name());
                    let outcome = TierModel::build(t, &cfg, &req)
                        .and_then(|m| run_scheme(s, &m, &lib, &cfg, spec.seed).map(|o| (m, o)));
                    match outcome {
                        Ok((m, mut o)) => {
                            trace = o.trace.take();
                            row.push(o.scdp);
                            row.push(lib.budget_used(o.placement.as_slice()));
                            row.push(o.iterations);
                            row.push(o.converged);
                            row.push(format_placement(&o.placement));
                            if spec.mc_drops > 0 {
                                let seed = point_seed(spec.seed, i);
                                row.push_mc("mc", m.simulate(&o.placement, &lib, &cfg, spec.mc_drops, seed));
                            }
                        }
                        Err(e) => row.errors.push(e.to_string()),
                    }
                    row.pad_to(cols.len());
                    (row.finish(t0), trace)
                })
                .collect();
            let mut rows = Vec::with_capacity(results.len());
            for ((t, _), (row, trace)) in points.iter().zip(results) {
                rows.push(row);
                if let Some(tr) = trace {
                    traces.push((*t, tr));
                }
            }
            (cols, rows)
        }
    };

    let mut table = Table::new(finish_columns(columns, spec), hash, spec.seed);
    for row in rows {
        table.push(row);
    }
    Ok(ExperimentOutput { table, traces })
}

/// Space-separated entries with 12 significant digits.
pub fn format_placement(p: &PlacementVector) -> String {
    p.as_slice()
        .iter()
        .map(|&x| crate::table::format_sig(x))
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationPoint {
    pub tier: Tier,
    pub antennas: Option<u32>,
    pub b: f64,
    pub analytic: f64,
    pub estimate: McEstimate,
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub tolerance_sigma: f64,
    pub points: Vec<ValidationPoint>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.points.iter().all(|p| p.pass)
    }

    pub fn to_table(&self, config_hash: String, seed: u64) -> Table {
        let cols = ["tier", "antennas", "b", "analytic", "mc", "mc_se", "z", "pass"];
        let mut t = Table::new(cols.iter().map(|s| s.to_string()).collect(), config_hash, seed);
        for p in &self.points {
            t.push(vec![
                p.tier.name().into(),
                p.antennas.into(),
                p.b.into(),
                p.analytic.into(),
                p.estimate.mean.into(),
                p.estimate.std_error.into(),
                p.z.into(),
                p.pass.into(),
            ]);
        }
        t
    }
}

/// Analytic-vs-simulation grid: sub-6 GHz over antennas × b, mmWave over b.
/// A point passes when |z| ≤ `tolerance_sigma`.
pub fn validate_mc(cfg: &Config, tolerance_sigma: f64) -> Result<ValidationReport> {
    let spec = ExperimentSpec {
        kind: ExperimentKind::ValidateMc,
        ..ExperimentSpec::from_config(cfg)
    };
    validate_mc_with(cfg, &spec, tolerance_sigma)
}

fn validate_mc_with(cfg: &Config, spec: &ExperimentSpec, tolerance_sigma: f64) -> Result<ValidationReport> {
    if !(tolerance_sigma > 0.0) {
        return Err(Error::param("tolerance_sigma", "must be positive"));
    }
    let drops = if spec.mc_drops > 0 { spec.mc_drops } else { VALIDATION_DROPS };
    let req = cfg.requirement();
    let mut jobs: Vec<(Tier, Option<u32>, f64)> = Vec::new();
    for &t in spec.tier.tiers() {
        match t {
            Tier::Mu => {
                for &n in &spec.antennas {
                    for &b in &spec.b_values {
                        jobs.push((t, Some(n), b));
                    }
                }
            }
            Tier::Mm => jobs.extend(spec.b_values.iter().map(|&b| (t, None, b))),
        }
    }
    let points = jobs
        .iter()
        .enumerate()
        .map(|(i, &(t, n, b))| {
            let mut mc = cfg.mc_params(drops);
            mc.seed = point_seed(spec.seed, i);
            let (analytic, estimate) = match t {
                Tier::Mu => {
                    let mut tier = cfg.mu_tier();
                    tier.antennas = n.expect("antenna count");
                    let ctx = MuCoverageContext::from_requirement(tier.clone(), &req)?;
                    (scdp_content_mu(b, &ctx)?, simulate_scdp_mu(b, &tier, ctx.phi(), &mc)?)
                }
                Tier::Mm => {
                    let ctx = MmCoverageContext::from_requirement(cfg.mm_tier(), &req)?;
                    (scdp_content_mm(b, &ctx)?, simulate_scdp_mm(b, ctx.config(), ctx.phi(), &mc)?)
                }
            };
            let z = estimate.z_score(analytic);
            Ok(ValidationPoint {
                tier: t,
                antennas: n,
                b,
                analytic,
                estimate,
                z,
                pass: z.abs() <= tolerance_sigma,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ValidationReport {
        tolerance_sigma,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> Config {
        let mut cfg = Config::default();
        cfg.library.contents = 8;
        cfg.library.capacity = 3.0;
        cfg.cceo.samples = 60;
        cfg.cceo.elite = 6;
        cfg.cceo.max_iters = 30;
        cfg
    }

    #[test]
    fn empty_grid_rejected() {
        let cfg = small_cfg();
        let spec = ExperimentSpec {
            grid: vec![],
            ..ExperimentSpec::from_config(&cfg)
        };
        assert!(matches!(run_experiment(&spec, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn scdp_vs_b_columns() {
        let cfg = small_cfg();
        let spec = ExperimentSpec::from_config(&cfg);
        let t = run_experiment(&spec, &cfg).unwrap();
        assert_eq!(t.columns, ["b", "scdp_mu", "scdp_mm", "scdp_mm_los", "scdp_mm_nlos", "error"]);
        assert_eq!(t.rows.len(), 11);
        let mu = t.numbers("scdp_mu").unwrap();
        assert!(mu.windows(2).all(|w| w[0].unwrap() <= w[1].unwrap()));
    }

    #[test]
    fn failing_points_fill_error_column() {
        let cfg = small_cfg();
        let spec = ExperimentSpec {
            kind: ExperimentKind::SweepJ,
            tier: TierSelection::Mm,
            schemes: vec![Scheme::Mpc],
            // J = 2 < M = 3 is not a valid catalog
            grid: vec![2.0, 8.0],
            ..ExperimentSpec::from_config(&cfg)
        };
        let t = run_experiment(&spec, &cfg).unwrap();
        let err = t.column("error").unwrap();
        assert!(matches!(&t.rows[0][err], Cell::Text(_)));
        assert_eq!(t.rows[1][err], Cell::Empty);
    }

    #[test]
    fn optimize_rows() {
        let cfg = small_cfg();
        let spec = ExperimentSpec {
            kind: ExperimentKind::Optimize,
            schemes: vec![Scheme::Mpc, Scheme::Cceo, Scheme::Twostair],
            ..ExperimentSpec::from_config(&cfg)
        };
        let t = run_experiment(&spec, &cfg).unwrap();
        assert_eq!(t.rows.len(), 6);
        let budget = t.numbers("budget_used").unwrap();
        assert!(budget.iter().all(|b| b.unwrap() <= 3.0 + 1e-9));
    }
}
