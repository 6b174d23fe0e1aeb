//! Monte Carlo simulation of the raw system model: Poisson station layouts,
//! thinning by the caching probability, nearest-caching-station association,
//! Rayleigh interferers and Gamma(N, 1) desired gain for the sub-6 GHz tier,
//! and the geometric LOS-ball link for the mmWave tier.
//!
//! Every drop draws from its own ChaCha stream keyed by (seed, drop index),
//! so results do not depend on how drops are scheduled across threads.

use std::f64::consts::PI;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ContentLibrary, MmTierConfig, MuTierConfig, PlacementVector};
use crate::scdp_mm::MmCoverageContext;

/// Smallest default window radius in metres.
pub const MIN_DEFAULT_WINDOW: f64 = 2000.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McParams {
    pub drops: usize,
    /// `None` picks max(2000 m, 12/√(πbλ)) per caching probability.
    pub window_radius: Option<f64>,
    pub seed: u64,
    /// Pair drop 2k with 2k+1 driven by complemented random bits.
    pub antithetic: bool,
    /// Add the mean interference of stations beyond the window.
    pub tail_correction: bool,
}

impl Default for McParams {
    fn default() -> Self {
        Self {
            drops: 20_000,
            window_radius: None,
            seed: 0x5eed,
            antithetic: false,
            tail_correction: true,
        }
    }
}

impl McParams {
    pub fn with_drops(drops: usize, seed: u64) -> Self {
        Self {
            drops,
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.drops == 0 {
            return Err(Error::param("drops", "need at least one drop"));
        }
        if let Some(r) = self.window_radius {
            if !(r > 0.0) {
                return Err(Error::param("window_radius", format!("must be positive, got {r}")));
            }
        }
        Ok(())
    }

    /// Window radius for caching probability b at station density λ.
    pub fn radius_for(&self, b: f64, density: f64) -> Result<f64> {
        let guard = 10.0 / (PI * b.max(0.01) * density).sqrt();
        match self.window_radius {
            Some(r) if r < guard => Err(Error::InvalidWindow {
                radius: r,
                minimum: guard,
            }),
            Some(r) => Ok(r),
            None => Ok(default_window(b, density)),
        }
    }
}

fn default_window(b: f64, density: f64) -> f64 {
    if b > 0.0 {
        MIN_DEFAULT_WINDOW.max(12.0 / (PI * b * density).sqrt())
    } else {
        MIN_DEFAULT_WINDOW
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub drops_used: usize,
}

impl McEstimate {
    /// (analytic − mean)/SE, with the SE floored at 1/(2·drops) so that
    /// all-success or all-failure runs stay comparable.
    pub fn z_score(&self, analytic: f64) -> f64 {
        let se = self.std_error.max(0.5 / self.drops_used as f64);
        (analytic - self.mean) / se
    }
}

/// Per-drop random source: a ChaCha stream, optionally bit-complemented.
pub struct DropRng {
    inner: ChaCha8Rng,
    complement: bool,
}

impl DropRng {
    pub fn new(seed: u64, stream: u64, complement: bool) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner, complement }
    }

    fn for_drop(mc: &McParams, index: usize) -> Self {
        if mc.antithetic {
            Self::new(mc.seed, (index / 2) as u64, index % 2 == 1)
        } else {
            Self::new(mc.seed, index as u64, false)
        }
    }
}

impl RngCore for DropRng {
    fn next_u32(&mut self) -> u32 {
        let v = self.inner.next_u32();
        if self.complement {
            !v
        } else {
            v
        }
    }

    fn next_u64(&mut self) -> u64 {
        let v = self.inner.next_u64();
        if self.complement {
            !v
        } else {
            v
        }
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst);
        if self.complement {
            dst.iter_mut().for_each(|b| *b = !*b);
        }
    }
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("positive finite Poisson mean");
    dist.sample(rng) as usize
}

/// Homogeneous Poisson points on the disk of the given radius centred at the
/// origin.
pub fn sample_hppp<R: Rng + ?Sized>(density: f64, window_radius: f64, rng: &mut R) -> Result<Vec<(f64, f64)>> {
    if !(density >= 0.0) || !(window_radius > 0.0) {
        return Err(Error::param(
            "density/window_radius",
            format!("need density ≥ 0 and radius > 0, got {density}, {window_radius}"),
        ));
    }
    let n = poisson_count(density * PI * window_radius * window_radius, rng);
    Ok((0..n)
        .map(|_| {
            let r = window_radius * rng.random::<f64>().sqrt();
            let theta = 2.0 * PI * rng.random::<f64>();
            (r * theta.cos(), r * theta.sin())
        })
        .collect())
}

/// Tallies Bernoulli outcomes, pairwise when antithetic.
#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    // counts of per-unit success totals 0, 1, 2 (units are drops or pairs)
    counts: [u64; 3],
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        for i in 0..3 {
            self.counts[i] += other.counts[i];
        }
        self
    }
}

fn run_drops<F>(mc: &McParams, outcome: F) -> Result<McEstimate>
where
    F: Fn(&mut DropRng) -> Result<bool> + Sync,
{
    mc.validate()?;
    let pair = mc.antithetic;
    let units = if pair { mc.drops.div_ceil(2) } else { mc.drops };
    let tally = (0..units)
        .into_par_iter()
        .map(|u| -> Result<Tally> {
            let mut t = Tally::default();
            let mut hits = 0usize;
            let idx = if pair { 2 * u } else { u };
            let mut rng = DropRng::for_drop(mc, idx);
            hits += outcome(&mut rng)? as usize;
            if pair {
                let mut rng = DropRng::for_drop(mc, idx + 1);
                hits += outcome(&mut rng)? as usize;
            }
            t.counts[hits] += 1;
            Ok(t)
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    let per_unit = if pair { 2.0 } else { 1.0 };
    let n = units as f64;
    let sum: f64 = (0..3).map(|k| tally.counts[k] as f64 * k as f64 / per_unit).sum();
    let sum_sq: f64 = (0..3)
        .map(|k| tally.counts[k] as f64 * (k as f64 / per_unit).powi(2))
        .sum();
    let mean = sum / n;
    let var = if units > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        mean: mean.clamp(0.0, 1.0),
        std_error: (var / n).sqrt(),
        drops_used: units * if pair { 2 } else { 1 },
    })
}

fn check_b(b: f64) -> Result<()> {
    if (0.0..=1.0).contains(&b) {
        Ok(())
    } else {
        Err(Error::param("b", format!("{b} outside [0, 1]")))
    }
}

fn gamma_gain<R: Rng + ?Sized>(shape: u32, rng: &mut R) -> f64 {
    (0..shape).map(|_| -> f64 { Exp1.sample(rng) }).sum()
}

/// Mean interference (normalized by Pβ) from all stations beyond radius r.
fn tail_interference(density: f64, radius: f64, alpha: f64) -> f64 {
    2.0 * PI * density * radius.powf(2.0 - alpha) / (alpha - 2.0)
}

struct MuDrop<'a> {
    cfg: &'a MuTierConfig,
    phi: f64,
    radius: f64,
    tail: f64,
}

impl MuDrop<'_> {
    /// One layout. `serving` fixes the serving distance (conditional
    /// coverage); otherwise the nearest caching station serves.
    fn run<R: Rng + ?Sized>(&self, b: f64, serving: Option<f64>, rng: &mut R) -> bool {
        let cfg = self.cfg;
        let half_alpha = 0.5 * cfg.path_loss_exponent;
        let r2_max = self.radius * self.radius;
        let n = poisson_count(cfg.density * PI * r2_max, rng);
        let mut points: Vec<(f64, bool, f64)> = Vec::with_capacity(n);
        for _ in 0..n {
            let r2 = r2_max * rng.random::<f64>();
            let cached = rng.random::<f64>() < b;
            let gain: f64 = Exp1.sample(rng);
            points.push((r2, cached, gain));
        }
        let (serving_r2, server) = match serving {
            Some(x) => (x * x, None),
            None => {
                let nearest = points
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| p.1)
                    .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0));
                match nearest {
                    Some((i, p)) => (p.0, Some(i)),
                    None => return false,
                }
            }
        };
        let mut interference = self.tail;
        for (i, &(r2, cached, gain)) in points.iter().enumerate() {
            if Some(i) == server {
                continue;
            }
            // with a fixed serving distance, caching stations sit outside it
            if serving.is_some() && cached && r2 < serving_r2 {
                continue;
            }
            interference += gain * r2.powf(-half_alpha);
        }
        let signal = gamma_gain(cfg.antennas, rng) * serving_r2.powf(-half_alpha);
        let p_beta = cfg.power_w * cfg.intercept;
        p_beta * signal > self.phi * (p_beta * interference + cfg.noise_w)
    }
}

fn mu_drop<'a>(b: f64, cfg: &'a MuTierConfig, phi: f64, mc: &McParams) -> Result<MuDrop<'a>> {
    cfg.validate()?;
    let radius = mc.radius_for(b, cfg.density)?;
    let tail = if mc.tail_correction {
        tail_interference(cfg.density, radius, cfg.path_loss_exponent)
    } else {
        0.0
    };
    Ok(MuDrop {
        cfg,
        phi,
        radius,
        tail,
    })
}

/// Delivery probability of one content cached with probability b in the
/// sub-6 GHz tier. A drop with no caching station in the window fails.
pub fn simulate_scdp_mu(b: f64, cfg: &MuTierConfig, phi: f64, mc: &McParams) -> Result<McEstimate> {
    check_b(b)?;
    let drop = mu_drop(b, cfg, phi, mc)?;
    if b == 0.0 {
        return run_drops(mc, |_| Ok(false));
    }
    run_drops(mc, |rng| Ok(drop.run(b, None, rng)))
}

/// Coverage with the serving station pinned at distance x.
pub fn simulate_conditional_coverage_mu(
    x: f64,
    b: f64,
    cfg: &MuTierConfig,
    phi: f64,
    mc: &McParams,
) -> Result<McEstimate> {
    check_b(b)?;
    if !(x > 0.0) {
        return Err(Error::param("x", format!("need x > 0, got {x}")));
    }
    let drop = mu_drop(b, cfg, phi, mc)?;
    if x >= drop.radius {
        return Err(Error::InvalidWindow {
            radius: drop.radius,
            minimum: x,
        });
    }
    run_drops(mc, |rng| Ok(drop.run(b, Some(x), rng)))
}

/// Distance to the nearest caching station inside the window, if any.
fn mm_nearest<R: Rng + ?Sized>(b: f64, ctx: &MmCoverageContext, radius: f64, rng: &mut R) -> Option<f64> {
    let density = ctx.config().density * b;
    let n = poisson_count(density * PI * radius * radius, rng);
    if n == 0 {
        return None;
    }
    let mut nearest = f64::INFINITY;
    for _ in 0..n {
        nearest = nearest.min(rng.random::<f64>());
    }
    Some(radius * nearest.sqrt())
}

fn mm_drop<R: Rng + ?Sized>(b: f64, ctx: &MmCoverageContext, radius: f64, rng: &mut R) -> bool {
    mm_nearest(b, ctx, radius, rng).is_some_and(|y| ctx.link_succeeds(y))
}

/// Delivery probability of one content in the mmWave tier; the outcome is
/// deterministic given the distance to the nearest caching station.
pub fn simulate_scdp_mm(b: f64, cfg: &MmTierConfig, phi: f64, mc: &McParams) -> Result<McEstimate> {
    check_b(b)?;
    let ctx = MmCoverageContext::new(cfg.clone(), phi)?;
    let radius = mc.radius_for(b, cfg.density)?;
    if b == 0.0 {
        return run_drops(mc, |_| Ok(false));
    }
    run_drops(mc, |rng| Ok(mm_drop(b, &ctx, radius, rng)))
}

/// LOS and NLOS delivery estimates from the same drops.
pub fn simulate_scdp_mm_parts(b: f64, cfg: &MmTierConfig, phi: f64, mc: &McParams) -> Result<[McEstimate; 2]> {
    check_b(b)?;
    let ctx = MmCoverageContext::new(cfg.clone(), phi)?;
    let radius = mc.radius_for(b, cfg.density)?;
    let d_l = cfg.los_radius;
    let part = |los: bool| {
        run_drops(mc, |rng| {
            if b == 0.0 {
                return Ok(false);
            }
            Ok(mm_nearest(b, &ctx, radius, rng).is_some_and(|y| (y < d_l) == los && ctx.link_succeeds(y)))
        })
    };
    Ok([part(true)?, part(false)?])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierEstimates {
    pub mu: Option<McEstimate>,
    pub mm: Option<McEstimate>,
}

/// Requests a content by popularity on every drop and simulates its
/// delivery in each requested tier.
pub fn simulate_total(
    placement: &PlacementVector,
    lib: &ContentLibrary,
    mu: Option<(&MuTierConfig, f64)>,
    mm: Option<(&MmTierConfig, f64)>,
    mc: &McParams,
) -> Result<TierEstimates> {
    placement.check_feasible(lib)?;
    let b = placement.as_slice();
    let cdf: Vec<f64> = lib
        .popularity()
        .iter()
        .scan(0.0, |acc, &a| {
            *acc += a;
            Some(*acc)
        })
        .collect();
    let pick = |rng: &mut DropRng| -> usize {
        let u: f64 = rng.random();
        cdf.partition_point(|&c| c <= u).min(b.len() - 1)
    };

    let mu_est = match mu {
        Some((cfg, phi)) => {
            let drops: Vec<Option<MuDrop>> = b
                .iter()
                .map(|&bj| if bj > 0.0 { mu_drop(bj, cfg, phi, mc).map(Some) } else { Ok(None) })
                .collect::<Result<_>>()?;
            Some(run_drops(mc, |rng| {
                let j = pick(rng);
                Ok(match &drops[j] {
                    Some(d) => d.run(b[j], None, rng),
                    None => false,
                })
            })?)
        }
        None => None,
    };
    let mm_est = match mm {
        Some((cfg, phi)) => {
            let ctx = MmCoverageContext::new(cfg.clone(), phi)?;
            let radii: Vec<f64> = b
                .iter()
                .map(|&bj| mc.radius_for(bj.max(1e-12), cfg.density))
                .collect::<Result<_>>()?;
            // tier streams differ from the sub-6 GHz ones
            let mm_mc = McParams {
                seed: mc.seed ^ 0x6d6d_5761_7665,
                ..mc.clone()
            };
            Some(run_drops(&mm_mc, |rng| {
                let j = pick(rng);
                Ok(b[j] > 0.0 && mm_drop(b[j], &ctx, radii[j], rng))
            })?)
        }
        None => None,
    };
    Ok(TierEstimates {
        mu: mu_est,
        mm: mm_est,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_process() {
        let mut rng = DropRng::new(1, 0, false);
        assert!(sample_hppp(0.0, 100.0, &mut rng).unwrap().is_empty());
    }

    #[test]
    fn hppp_mean_count() {
        let draws = 1000;
        let total: usize = (0..draws)
            .map(|i| {
                let mut rng = DropRng::new(7, i, false);
                sample_hppp(600e-6, 2000.0, &mut rng).unwrap().len()
            })
            .sum();
        let mean = total as f64 / draws as f64;
        let want = 600e-6 * PI * 4e6;
        assert!((mean / want - 1.0).abs() < 0.02, "{mean} vs {want}");
    }

    #[test]
    fn hppp_points_inside_window_and_repeatable() {
        let mut a = DropRng::new(3, 9, false);
        let mut b = DropRng::new(3, 9, false);
        let pa = sample_hppp(1e-3, 300.0, &mut a).unwrap();
        let pb = sample_hppp(1e-3, 300.0, &mut b).unwrap();
        assert_eq!(pa, pb);
        assert!(pa.iter().all(|(x, y)| x * x + y * y <= 300.0 * 300.0));
    }

    #[test]
    fn trivial_mu_cases() {
        let cfg = MuTierConfig::table_defaults();
        let mc = McParams::with_drops(200, 1);
        assert_eq!(simulate_scdp_mu(0.0, &cfg, 0.03, &mc).unwrap().mean, 0.0);
        let near_zero = simulate_scdp_mu(1.0, &cfg, 1e-12, &mc).unwrap();
        assert!(near_zero.mean > 0.99);
    }

    #[test]
    fn window_guard() {
        let cfg = MuTierConfig::table_defaults();
        let mc = McParams {
            window_radius: Some(100.0),
            ..McParams::with_drops(10, 1)
        };
        assert!(matches!(
            simulate_scdp_mu(0.5, &cfg, 0.03, &mc),
            Err(Error::InvalidWindow { .. })
        ));
    }

    #[test]
    fn antithetic_pairs_complement() {
        let mut a = DropRng::new(5, 2, false);
        let mut b = DropRng::new(5, 2, true);
        for _ in 0..8 {
            assert_eq!(a.next_u64(), !b.next_u64());
        }
    }
}
