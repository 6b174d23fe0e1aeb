//! Domain types shared by the evaluators and optimizers.
//!
//! Everything is SI internally: metres, hertz, watts and densities per m².
//! The helpers at the bottom convert the usual table units (dBm, per km²,
//! MHz) at the boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feasibility slack on the cache budget.
pub const BUDGET_SLACK: f64 = 1e-9;

/// Speed of light in m/s.
const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Thermal noise density at 290 K.
const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

/// Content catalog: popularity (non-increasing, summing to one), per-content
/// sizes and the per-station cache capacity M in size units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentLibrary {
    popularity: Vec<f64>,
    sizes: Vec<f64>,
    capacity: f64,
    zipf_exponent: Option<f64>,
}

impl ContentLibrary {
    pub fn new(popularity: Vec<f64>, capacity: f64, sizes: Option<Vec<f64>>) -> Result<Self> {
        let j = popularity.len();
        if j == 0 {
            return Err(Error::param("popularity", "empty catalog"));
        }
        let total: f64 = popularity.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param(
                "popularity",
                format!("must sum to 1, sums to {total}"),
            ));
        }
        if popularity.iter().any(|&a| !(a >= 0.0)) {
            return Err(Error::param("popularity", "entries must be non-negative"));
        }
        if popularity.windows(2).any(|w| w[1] > w[0] + 1e-15) {
            return Err(Error::param("popularity", "must be sorted non-increasing"));
        }
        if !(capacity >= 1.0) {
            return Err(Error::param("capacity", format!("M = {capacity} < 1")));
        }
        if (j as f64) < capacity {
            return Err(Error::param(
                "capacity",
                format!("catalog of {j} contents is smaller than M = {capacity}"),
            ));
        }
        let sizes = match sizes {
            Some(s) => {
                if s.len() != j {
                    return Err(Error::param(
                        "sizes",
                        format!("expected {j} sizes, got {}", s.len()),
                    ));
                }
                if s.iter().any(|&x| !(x > 0.0)) {
                    return Err(Error::param("sizes", "sizes must be positive"));
                }
                s
            }
            None => vec![1.0; j],
        };
        Ok(Self {
            popularity,
            sizes,
            capacity,
            zipf_exponent: None,
        })
    }

    /// Zipf catalog of `contents` unit-size items.
    pub fn zipf(contents: usize, capacity: f64, gamma: f64) -> Result<Self> {
        let mut lib = Self::new(zipf_popularity(contents, gamma)?, capacity, None)?;
        lib.zipf_exponent = Some(gamma);
        Ok(lib)
    }

    pub fn with_sizes(mut self, sizes: Vec<f64>) -> Result<Self> {
        let rebuilt = Self::new(self.popularity.clone(), self.capacity, Some(sizes))?;
        self.sizes = rebuilt.sizes;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.popularity.len()
    }

    pub fn is_empty(&self) -> bool {
        self.popularity.is_empty()
    }

    pub fn popularity(&self) -> &[f64] {
        &self.popularity
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn capacity(&self) -> f64 {
        self.capacity
    }

    pub fn zipf_exponent(&self) -> Option<f64> {
        self.zipf_exponent
    }

    pub fn has_unit_sizes(&self) -> bool {
        self.sizes.iter().all(|&s| s == 1.0)
    }

    pub fn total_size(&self) -> f64 {
        self.sizes.iter().sum()
    }

    /// Σ b_j s_j.
    pub fn budget_used(&self, b: &[f64]) -> f64 {
        b.iter().zip(&self.sizes).map(|(b, s)| b * s).sum()
    }
}

/// Per-content caching probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementVector {
    b: Vec<f64>,
}

impl PlacementVector {
    /// Checks the box constraint only; see [`PlacementVector::check_feasible`].
    pub fn new(b: Vec<f64>) -> Result<Self> {
        if let Some((j, v)) = b
            .iter()
            .enumerate()
            .find(|(_, &v)| !(0.0..=1.0).contains(&v))
        {
            return Err(Error::param(
                "placement",
                format!("b[{j}] = {v} outside [0, 1]"),
            ));
        }
        Ok(Self { b })
    }

    pub fn zeros(j: usize) -> Self {
        Self { b: vec![0.0; j] }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.b
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.b
    }

    pub fn len(&self) -> usize {
        self.b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.b.is_empty()
    }

    pub fn is_feasible(&self, lib: &ContentLibrary) -> bool {
        self.check_feasible(lib).is_ok()
    }

    /// Length match plus Σ b_j s_j ≤ M (with a 1e-9 slack).
    pub fn check_feasible(&self, lib: &ContentLibrary) -> Result<()> {
        if self.b.len() != lib.len() {
            return Err(Error::param(
                "placement",
                format!("length {} does not match catalog of {}", self.b.len(), lib.len()),
            ));
        }
        let used = lib.budget_used(&self.b);
        if used > lib.capacity() + BUDGET_SLACK {
            return Err(Error::param(
                "placement",
                format!("uses {used} of capacity {}", lib.capacity()),
            ));
        }
        Ok(())
    }
}

/// Multi-antenna sub-6 GHz tier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuTierConfig {
    pub antennas: u32,
    pub power_w: f64,
    pub density: f64,
    pub path_loss_exponent: f64,
    pub intercept: f64,
    pub noise_w: f64,
    pub bandwidth_hz: f64,
}

impl MuTierConfig {
    /// Reference defaults: 2 antennas, 20 dBm, 600/km², α = 2.5, 10 MHz at 1 GHz.
    pub fn table_defaults() -> Self {
        let bandwidth_hz = 10e6;
        Self {
            antennas: 2,
            power_w: dbm_to_watts(20.0),
            density: per_km2_to_per_m2(600.0),
            path_loss_exponent: 2.5,
            intercept: free_space_intercept(1e9),
            noise_w: thermal_noise_watts(bandwidth_hz, 0.0),
            bandwidth_hz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.antennas < 1 {
            return Err(Error::param("antennas", "need at least one antenna"));
        }
        if (self.antennas as usize) > crate::specfun::DEFAULT_PARTITION_CAP + 1 {
            return Err(Error::param(
                "antennas",
                format!(
                    "at most {} antennas supported",
                    crate::specfun::DEFAULT_PARTITION_CAP + 1
                ),
            ));
        }
        // α = 2 is the cosecant pole; α ≤ 2 also makes the interference diverge.
        if !(self.path_loss_exponent > 2.0) || !self.path_loss_exponent.is_finite() {
            return Err(Error::param(
                "path_loss_exponent",
                format!("need α > 2, got {}", self.path_loss_exponent),
            ));
        }
        positive("power_w", self.power_w)?;
        positive("density", self.density)?;
        positive("intercept", self.intercept)?;
        positive("noise_w", self.noise_w)?;
        positive("bandwidth_hz", self.bandwidth_hz)?;
        Ok(())
    }
}

/// Millimetre-wave tier with the LOS-ball blockage model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MmTierConfig {
    pub array_gain: f64,
    pub power_w: f64,
    pub density: f64,
    pub los_exponent: f64,
    pub nlos_exponent: f64,
    pub los_radius: f64,
    pub intercept: f64,
    pub noise_w: f64,
    pub bandwidth_hz: f64,
}

impl MmTierConfig {
    /// Reference defaults: gain 2, 20 dBm, 600/km², α_L = 2.25, α_N = 3.76,
    /// D_L = 15 m, 1 GHz of bandwidth at 60 GHz.
    pub fn table_defaults() -> Self {
        let bandwidth_hz = 1e9;
        Self {
            array_gain: 2.0,
            power_w: dbm_to_watts(20.0),
            density: per_km2_to_per_m2(600.0),
            los_exponent: 2.25,
            nlos_exponent: 3.76,
            los_radius: 15.0,
            intercept: free_space_intercept(60e9),
            noise_w: thermal_noise_watts(bandwidth_hz, 0.0),
            bandwidth_hz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.los_exponent > 2.0) {
            return Err(Error::param(
                "los_exponent",
                format!("need α_L > 2, got {}", self.los_exponent),
            ));
        }
        if !(self.nlos_exponent >= self.los_exponent) {
            return Err(Error::param(
                "nlos_exponent",
                format!(
                    "need α_N ≥ α_L, got {} < {}",
                    self.nlos_exponent, self.los_exponent
                ),
            ));
        }
        positive("array_gain", self.array_gain)?;
        positive("power_w", self.power_w)?;
        positive("density", self.density)?;
        positive("los_radius", self.los_radius)?;
        positive("intercept", self.intercept)?;
        positive("noise_w", self.noise_w)?;
        positive("bandwidth_hz", self.bandwidth_hz)?;
        Ok(())
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive and finite, got {v}")))
    }
}

/// Target content bit rate η/T.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeliveryRequirement {
    pub rate_bps: f64,
}

impl DeliveryRequirement {
    pub fn new(rate_bps: f64) -> Result<Self> {
        positive("rate_bps", rate_bps)?;
        Ok(Self { rate_bps })
    }
}

impl Default for DeliveryRequirement {
    fn default() -> Self {
        Self { rate_bps: 4e5 }
    }
}

/// a_j = j^{−γ} / Σ m^{−γ}, summed exactly.
pub fn zipf_popularity(contents: usize, gamma: f64) -> Result<Vec<f64>> {
    if contents == 0 {
        return Err(Error::param("contents", "need at least one content"));
    }
    if !(gamma >= 0.0) || !gamma.is_finite() {
        return Err(Error::param("gamma", format!("need γ ≥ 0, got {gamma}")));
    }
    let weights: Vec<f64> = (1..=contents).map(|j| (j as f64).powf(-gamma)).collect();
    // sum smallest first
    let total: f64 = weights.iter().rev().sum();
    Ok(weights.into_iter().map(|w| w / total).collect())
}

/// φ = 2^{rate/W} − 1.
pub fn sinr_threshold(req: &DeliveryRequirement, bandwidth_hz: f64) -> Result<f64> {
    positive("bandwidth_hz", bandwidth_hz)?;
    Ok((req.rate_bps / bandwidth_hz * std::f64::consts::LN_2).exp_m1())
}

/// Most-popular-content caching: walk the catalog in popularity order and
/// cache each content whole while it still fits.
pub fn mpc_placement(lib: &ContentLibrary) -> PlacementVector {
    let mut remaining = lib.capacity();
    let b = lib
        .sizes()
        .iter()
        .map(|&s| {
            if s <= remaining + BUDGET_SLACK {
                remaining -= s;
                1.0
            } else {
                0.0
            }
        })
        .collect();
    PlacementVector { b }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

pub fn per_km2_to_per_m2(d: f64) -> f64 {
    d * 1e-6
}

/// Free-space path-loss intercept (c / 4π f)² at 1 m.
pub fn free_space_intercept(carrier_hz: f64) -> f64 {
    (SPEED_OF_LIGHT / (4.0 * std::f64::consts::PI * carrier_hz)).powi(2)
}

/// −174 dBm/Hz + 10 log₁₀ W + noise figure, in watts.
pub fn thermal_noise_watts(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    dbm_to_watts(THERMAL_NOISE_DBM_PER_HZ + 10.0 * bandwidth_hz.log10() + noise_figure_db)
}
