//! Versioned TOML configuration.
//!
//! Physical quantities use the units of the usual parameter tables (dBm,
//! per km², MHz, GHz, dB). Every field has a default, so an empty file with
//! just `schema_version = 1` is a complete configuration.

use std::path::Path;

use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cceo::CceoParams;
use crate::error::{Error, Result};
use crate::mc::McParams;
use crate::model::{
    dbm_to_watts, free_space_intercept, per_km2_to_per_m2, thermal_noise_watts, ContentLibrary,
    DeliveryRequirement, MmTierConfig, MuTierConfig,
};
use crate::twostair::NewtonParams;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub library: LibrarySection,
    #[serde(default)]
    pub mu: MuSection,
    #[serde(default)]
    pub mm: MmSection,
    #[serde(default)]
    pub delivery: DeliverySection,
    #[serde(default)]
    pub cceo: CceoSection,
    #[serde(default)]
    pub newton: NewtonSection,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub experiment: ExperimentSection,
}

fn default_seed() -> u64 {
    1
}

impl Default for Config {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: default_seed(),
            library: Default::default(),
            mu: Default::default(),
            mm: Default::default(),
            delivery: Default::default(),
            cceo: Default::default(),
            newton: Default::default(),
            mc: Default::default(),
            experiment: Default::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LibrarySection {
    pub contents: usize,
    pub capacity: f64,
    pub zipf_exponent: f64,
    /// Explicit per-content sizes; overrides `size_choices`.
    pub sizes: Option<Vec<f64>>,
    /// Sizes drawn uniformly from this list with `size_seed`.
    pub size_choices: Option<Vec<f64>>,
    pub size_seed: u64,
}

impl Default for LibrarySection {
    fn default() -> Self {
        Self {
            contents: 100,
            capacity: 10.0,
            zipf_exponent: 1.5,
            sizes: None,
            size_choices: None,
            size_seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MuSection {
    pub antennas: u32,
    pub power_dbm: f64,
    pub density_per_km2: f64,
    pub path_loss_exponent: f64,
    pub carrier_ghz: f64,
    /// Overrides the free-space intercept at `carrier_ghz`.
    pub intercept: Option<f64>,
    pub bandwidth_mhz: f64,
    pub noise_figure_db: f64,
    /// Overrides thermal noise over the bandwidth.
    pub noise_dbm: Option<f64>,
}

impl Default for MuSection {
    fn default() -> Self {
        Self {
            antennas: 2,
            power_dbm: 20.0,
            density_per_km2: 600.0,
            path_loss_exponent: 2.5,
            carrier_ghz: 1.0,
            intercept: None,
            bandwidth_mhz: 10.0,
            noise_figure_db: 0.0,
            noise_dbm: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MmSection {
    pub array_gain: f64,
    pub power_dbm: f64,
    pub density_per_km2: f64,
    pub los_exponent: f64,
    pub nlos_exponent: f64,
    pub los_radius_m: f64,
    pub carrier_ghz: f64,
    pub intercept: Option<f64>,
    pub bandwidth_mhz: f64,
    pub noise_figure_db: f64,
    pub noise_dbm: Option<f64>,
}

impl Default for MmSection {
    fn default() -> Self {
        Self {
            array_gain: 2.0,
            power_dbm: 20.0,
            density_per_km2: 600.0,
            los_exponent: 2.25,
            nlos_exponent: 3.76,
            los_radius_m: 15.0,
            carrier_ghz: 60.0,
            intercept: None,
            bandwidth_mhz: 1000.0,
            noise_figure_db: 0.0,
            noise_dbm: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DeliverySection {
    pub rate_bps: f64,
}

impl Default for DeliverySection {
    fn default() -> Self {
        Self { rate_bps: 4e5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CceoSection {
    pub samples: usize,
    pub elite: usize,
    pub iota: f64,
    pub beta: f64,
    pub q_smooth: u32,
    pub penalty: f64,
    pub eps_stop: f64,
    pub max_iters: usize,
    pub init_mean: Option<f64>,
    pub init_var: f64,
}

impl Default for CceoSection {
    fn default() -> Self {
        let p = CceoParams::default();
        Self {
            samples: p.samples,
            elite: p.elite,
            iota: p.iota,
            beta: p.beta,
            q_smooth: p.q_smooth,
            penalty: p.penalty,
            eps_stop: p.eps_stop,
            max_iters: p.max_iters,
            init_mean: p.init_mean,
            init_var: p.init_var,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NewtonSection {
    pub max_iters: usize,
    pub grad_tol: f64,
    pub shrink: f64,
    pub armijo: f64,
    pub init_varpi: Option<f64>,
}

impl Default for NewtonSection {
    fn default() -> Self {
        let p = NewtonParams::default();
        Self {
            max_iters: p.max_iters,
            grad_tol: p.grad_tol,
            shrink: p.shrink,
            armijo: p.armijo,
            init_varpi: p.init_varpi,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSection {
    /// 0 disables Monte Carlo columns.
    pub drops: usize,
    pub window_radius_m: Option<f64>,
    pub antithetic: bool,
    pub tail_correction: bool,
    pub tolerance_sigma: f64,
}

impl Default for McSection {
    fn default() -> Self {
        Self {
            drops: 0,
            window_radius_m: None,
            antithetic: false,
            tail_correction: true,
            tolerance_sigma: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    ScdpVsB,
    ScdpVsRate,
    #[serde(rename = "sweep-M")]
    SweepM,
    #[serde(rename = "sweep-J")]
    SweepJ,
    SweepGamma,
    CacheDensity,
    ValidateMc,
    Optimize,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        Self::ScdpVsB,
        Self::ScdpVsRate,
        Self::SweepM,
        Self::SweepJ,
        Self::SweepGamma,
        Self::CacheDensity,
        Self::ValidateMc,
        Self::Optimize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::ScdpVsB => "scdp-vs-b",
            Self::ScdpVsRate => "scdp-vs-rate",
            Self::SweepM => "sweep-M",
            Self::SweepJ => "sweep-J",
            Self::SweepGamma => "sweep-gamma",
            Self::CacheDensity => "cache-density",
            Self::ValidateMc => "validate-mc",
            Self::Optimize => "optimize",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment kind `{s}`")))
    }

    /// Whether the kind sweeps over `experiment.grid`.
    pub fn needs_grid(self) -> bool {
        !matches!(self, Self::ValidateMc | Self::Optimize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Mpc,
    Cceo,
    Twostair,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mpc => "mpc",
            Self::Cceo => "cceo",
            Self::Twostair => "twostair",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mpc" => Ok(Self::Mpc),
            "cceo" => Ok(Self::Cceo),
            "twostair" => Ok(Self::Twostair),
            _ => Err(Error::Config(format!("unknown scheme `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TierSelection {
    Mu,
    Mm,
    Both,
}

impl TierSelection {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mu" => Ok(Self::Mu),
            "mm" => Ok(Self::Mm),
            "both" => Ok(Self::Both),
            _ => Err(Error::Config(format!("unknown tier `{s}`"))),
        }
    }

    pub fn tiers(self) -> &'static [Tier] {
        match self {
            Self::Mu => &[Tier::Mu],
            Self::Mm => &[Tier::Mm],
            Self::Both => &[Tier::Mu, Tier::Mm],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Mu,
    Mm,
}

impl Tier {
    pub fn name(self) -> &'static str {
        match self {
            Self::Mu => "mu",
            Self::Mm => "mm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    pub tier: TierSelection,
    pub schemes: Vec<Scheme>,
    /// Swept values: b, rate (bit/s), M, J, γ, or density (per km²)
    /// depending on `kind`.
    pub grid: Vec<f64>,
    /// Capacities crossed with `grid` by cache-density.
    pub capacities: Vec<f64>,
    /// Antenna counts crossed with b by validate-mc.
    pub antennas: Vec<u32>,
    /// b values for validate-mc.
    pub b_values: Vec<f64>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::ScdpVsB,
            tier: TierSelection::Both,
            schemes: vec![Scheme::Mpc, Scheme::Cceo],
            grid: (0..=10).map(|i| i as f64 / 10.0).collect(),
            capacities: vec![10.0, 15.0, 20.0, 25.0, 30.0],
            antennas: vec![1, 2, 4],
            b_values: vec![0.2, 0.5, 1.0],
        }
    }
}

impl Config {
    /// Parses TOML text. Syntax and type errors carry the line and column;
    /// semantic errors name the offending field.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let field = |name: &str, e: Error| Error::Config(format!("{name}: {e}"));
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version: expected {SCHEMA_VERSION}, got {}",
                self.schema_version
            )));
        }
        self.library().map_err(|e| field("[library]", e))?;
        self.mu_tier().validate().map_err(|e| field("[mu]", e))?;
        self.mm_tier().validate().map_err(|e| field("[mm]", e))?;
        DeliveryRequirement::new(self.delivery.rate_bps).map_err(|e| field("[delivery].rate_bps", e))?;
        self.cceo_params().validate().map_err(|e| field("[cceo]", e))?;
        self.newton_params().validate().map_err(|e| field("[newton]", e))?;
        if !(self.mc.tolerance_sigma > 0.0) {
            return Err(Error::Config("[mc].tolerance_sigma: must be positive".into()));
        }
        if let Some(r) = self.mc.window_radius_m {
            if !(r > 0.0) {
                return Err(Error::Config("[mc].window_radius_m: must be positive".into()));
            }
        }
        self.validate_experiment()
    }

    fn validate_experiment(&self) -> Result<()> {
        let ex = &self.experiment;
        let bad = |f: &str, msg: String| Err(Error::Config(format!("[experiment].{f}: {msg}")));
        if ex.kind.needs_grid() && ex.grid.is_empty() {
            return bad("grid", format!("{} needs a non-empty grid", ex.kind.name()));
        }
        if ex.schemes.is_empty() && !matches!(ex.kind, ExperimentKind::ScdpVsB | ExperimentKind::ValidateMc) {
            return bad("schemes", "need at least one scheme".into());
        }
        let check = |ok: fn(f64) -> bool, what: &str| -> Result<()> {
            match ex.grid.iter().find(|&&v| !ok(v)) {
                Some(v) => bad("grid", format!("{v} is not a valid {what}")),
                None => Ok(()),
            }
        };
        match ex.kind {
            ExperimentKind::ScdpVsB => check(|v| (0.0..=1.0).contains(&v), "caching probability")?,
            ExperimentKind::ScdpVsRate => check(|v| v > 0.0 && v.is_finite(), "rate")?,
            ExperimentKind::SweepM => check(|v| v >= 1.0 && v.is_finite(), "capacity")?,
            ExperimentKind::SweepJ => check(|v| v >= 1.0 && v.fract() == 0.0, "library size")?,
            ExperimentKind::SweepGamma => check(|v| v >= 0.0 && v.is_finite(), "Zipf exponent")?,
            ExperimentKind::CacheDensity => {
                check(|v| v > 0.0 && v.is_finite(), "density")?;
                if ex.capacities.is_empty() {
                    return bad("capacities", "cache-density needs a non-empty capacity grid".into());
                }
            }
            ExperimentKind::ValidateMc => {
                if ex.antennas.is_empty() || ex.b_values.is_empty() {
                    return bad("antennas/b_values", "validate-mc needs non-empty grids".into());
                }
                if let Some(b) = ex.b_values.iter().find(|b| !(**b > 0.0 && **b <= 1.0)) {
                    return bad("b_values", format!("{b} outside (0, 1]"));
                }
            }
            ExperimentKind::Optimize => {}
        }
        Ok(())
    }

    /// The catalog described by `[library]`.
    pub fn library(&self) -> Result<ContentLibrary> {
        self.library_with(self.library.contents, self.library.capacity, self.library.zipf_exponent)
    }

    /// The catalog with J, M and γ replaced (sizes follow the same rule).
    pub fn library_with(&self, contents: usize, capacity: f64, gamma: f64) -> Result<ContentLibrary> {
        let lib = &self.library;
        let mut out = ContentLibrary::zipf(contents, capacity, gamma)?;
        if let Some(sizes) = &lib.sizes {
            out = out.with_sizes(sizes.clone())?;
        } else if let Some(choices) = &lib.size_choices {
            if choices.is_empty() {
                return Err(Error::param("size_choices", "must not be empty"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(lib.size_seed);
            let sizes = (0..contents)
                .map(|_| *choices.choose(&mut rng).expect("non-empty"))
                .collect();
            out = out.with_sizes(sizes)?;
        }
        Ok(out)
    }

    pub fn mu_tier(&self) -> MuTierConfig {
        let s = &self.mu;
        let bandwidth_hz = s.bandwidth_mhz * 1e6;
        MuTierConfig {
            antennas: s.antennas,
            power_w: dbm_to_watts(s.power_dbm),
            density: per_km2_to_per_m2(s.density_per_km2),
            path_loss_exponent: s.path_loss_exponent,
            intercept: s.intercept.unwrap_or_else(|| free_space_intercept(s.carrier_ghz * 1e9)),
            noise_w: s
                .noise_dbm
                .map(dbm_to_watts)
                .unwrap_or_else(|| thermal_noise_watts(bandwidth_hz, s.noise_figure_db)),
            bandwidth_hz,
        }
    }

    pub fn mm_tier(&self) -> MmTierConfig {
        let s = &self.mm;
        let bandwidth_hz = s.bandwidth_mhz * 1e6;
        MmTierConfig {
            array_gain: s.array_gain,
            power_w: dbm_to_watts(s.power_dbm),
            density: per_km2_to_per_m2(s.density_per_km2),
            los_exponent: s.los_exponent,
            nlos_exponent: s.nlos_exponent,
            los_radius: s.los_radius_m,
            intercept: s.intercept.unwrap_or_else(|| free_space_intercept(s.carrier_ghz * 1e9)),
            noise_w: s
                .noise_dbm
                .map(dbm_to_watts)
                .unwrap_or_else(|| thermal_noise_watts(bandwidth_hz, s.noise_figure_db)),
            bandwidth_hz,
        }
    }

    pub fn requirement(&self) -> DeliveryRequirement {
        DeliveryRequirement {
            rate_bps: self.delivery.rate_bps,
        }
    }

    pub fn cceo_params(&self) -> CceoParams {
        let c = &self.cceo;
        CceoParams {
            samples: c.samples,
            elite: c.elite,
            iota: c.iota,
            beta: c.beta,
            q_smooth: c.q_smooth,
            penalty: c.penalty,
            eps_stop: c.eps_stop,
            max_iters: c.max_iters,
            seed: self.seed,
            init_mean: c.init_mean,
            init_var: c.init_var,
        }
    }

    pub fn newton_params(&self) -> NewtonParams {
        let n = &self.newton;
        NewtonParams {
            max_iters: n.max_iters,
            grad_tol: n.grad_tol,
            shrink: n.shrink,
            armijo: n.armijo,
            init_varpi: n.init_varpi,
        }
    }

    pub fn mc_params(&self, drops: usize) -> McParams {
        McParams {
            drops,
            window_radius: self.mc.window_radius_m,
            seed: self.seed,
            antithetic: self.mc.antithetic,
            tail_correction: self.mc.tail_correction,
        }
    }

    /// First 16 hex digits of SHA-256 over the canonical JSON of the
    /// resolved configuration.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&canonical);
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
