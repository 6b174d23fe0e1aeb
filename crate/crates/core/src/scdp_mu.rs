//! Successful content delivery probability of the multi-antenna sub-6 GHz
//! tier.
//!
//! The serving station is the nearest one caching the content (distance x).
//! With maximum-ratio transmission the desired gain is Gamma(N, 1) and every
//! interferer sees Exp(1) fading, so the conditional coverage is
//!
//! ```text
//! P_cov(x, b) = Σ_{n<N} (−ν)ⁿ/n! · dⁿ/dνⁿ exp(g(ν)) |_{ν = x^α}
//! ```
//!
//! where `g` is the log of the noise factor times the Laplace transforms of
//! the interference from stations that cache the content (outside x) and
//! those that do not (everywhere). The n-th derivative of `exp∘g` is expanded
//! over integer partitions.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::model::{sinr_threshold, ContentLibrary, DeliveryRequirement, MuTierConfig, PlacementVector};
use crate::quad::{integrate, QuadratureOptions};
use crate::specfun::{cosecant, gamma_fn, gauss_2f1, integer_partitions, partition_sum, PartitionMultiplicity};

/// Upper limit of the outer integral in u = π b λ x²; e^{−u} < 1e-14 beyond.
pub const OUTER_U_MAX: f64 = 32.236_191_301_916_64;

/// Coverage values this far outside [0, 1] are clamped; further is an error.
const CLAMP_SLACK: f64 = 1e-9;

/// Immutable evaluation context: tier constants, SINR threshold and the
/// x-independent special-function values.
#[derive(Debug, Clone)]
pub struct MuCoverageContext {
    cfg: MuTierConfig,
    phi: f64,
    quadrature: QuadratureOptions,
    delta: f64,
    csc: f64,
    // q = 0: ₂F₁(1, 1−δ; 2−δ; −φ); q ≥ 1: ₂F₁(q+1, q−δ; q+1−δ; −φ)
    hyp: Vec<f64>,
    // Γ(1+δ)/Γ(1+δ−q) = δ(δ−1)…(δ−q+1)
    falling: Vec<f64>,
    partitions: Vec<Vec<PartitionMultiplicity>>,
}

impl MuCoverageContext {
    pub fn new(cfg: MuTierConfig, phi: f64, quadrature: QuadratureOptions) -> Result<Self> {
        cfg.validate()?;
        if !(phi > 0.0) || !phi.is_finite() {
            return Err(Error::param("phi", format!("need φ > 0, got {phi}")));
        }
        if !(quadrature.abs_tol > 0.0) {
            return Err(Error::param("quadrature.abs_tol", "must be positive"));
        }
        let alpha = cfg.path_loss_exponent;
        let delta = 2.0 / alpha;
        let csc = cosecant(PI * delta)?;
        let n_max = cfg.antennas as usize;
        let mut hyp = Vec::with_capacity(n_max);
        hyp.push(gauss_2f1(1.0, 1.0 - delta, 2.0 - delta, -phi)?);
        for q in 1..n_max {
            let qf = q as f64;
            hyp.push(gauss_2f1(qf + 1.0, qf - delta, qf + 1.0 - delta, -phi)?);
        }
        let g_top = gamma_fn(1.0 + delta)?;
        let falling = (0..n_max)
            .map(|q| Ok(g_top / gamma_fn(1.0 + delta - q as f64)?))
            .collect::<Result<Vec<_>>>()?;
        let partitions = (0..n_max)
            .map(integer_partitions)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cfg,
            phi,
            quadrature,
            delta,
            csc,
            hyp,
            falling,
            partitions,
        })
    }

    pub fn from_requirement(cfg: MuTierConfig, req: &DeliveryRequirement) -> Result<Self> {
        let phi = sinr_threshold(req, cfg.bandwidth_hz)?;
        Self::new(cfg, phi, QuadratureOptions::default())
    }

    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        Self::new(self.cfg.clone(), phi, self.quadrature)
    }

    pub fn with_quadrature(&self, quadrature: QuadratureOptions) -> Result<Self> {
        Self::new(self.cfg.clone(), self.phi, quadrature)
    }

    pub fn config(&self) -> &MuTierConfig {
        &self.cfg
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn quadrature(&self) -> &QuadratureOptions {
        &self.quadrature
    }

    fn p_beta(&self) -> f64 {
        self.cfg.power_w * self.cfg.intercept
    }

    /// Scaled log-derivatives h_q = (−ν)^q g⁽q⁾(ν) at ν = x^α, q = 1..N−1,
    /// plus g itself. Written so no power of x overflows.
    fn log_terms(&self, x: f64, b: f64) -> (f64, Vec<f64>) {
        let cfg = &self.cfg;
        let alpha = cfg.path_loss_exponent;
        let lambda = cfg.density;
        let phi = self.phi;
        let nu = x.powf(alpha);
        let x2 = x * x;
        let noise = nu * phi * cfg.noise_w / self.p_beta();
        let cached_scale = 2.0 * PI * b * lambda * x2;
        // (2π²/α)(1−b)λ(φν)^δ csc(2π/α), with (φν)^δ = φ^δ x²
        let uncached_scale = 2.0 * PI * PI / alpha * (1.0 - b) * lambda * phi.powf(self.delta) * x2 * self.csc;
        let g = -noise - cached_scale * phi / (alpha - 2.0) * self.hyp[0] - uncached_scale;
        let n_max = cfg.antennas as usize;
        let mut h = Vec::with_capacity(n_max.saturating_sub(1));
        let mut q_fact = 1.0;
        let mut phi_q = 1.0;
        for q in 1..n_max {
            let qf = q as f64;
            q_fact *= qf;
            phi_q *= phi;
            let sign = if q.is_multiple_of(2) { 1.0 } else { -1.0 };
            let mut hq = cached_scale * q_fact * phi_q / (alpha * qf - 2.0) * self.hyp[q]
                - sign * uncached_scale * self.falling[q];
            if q == 1 {
                hq += noise;
            }
            h.push(hq);
        }
        (g, h)
    }
}

fn check_probability(name: &'static str, b: f64) -> Result<()> {
    if (0.0..=1.0).contains(&b) {
        Ok(())
    } else {
        Err(Error::param(name, format!("{b} outside [0, 1]")))
    }
}

/// Laplace transform of the interference from stations caching the content,
/// all of them farther than the serving distance x.
pub fn laplace_cached_interference(s: f64, x: f64, b: f64, ctx: &MuCoverageContext) -> Result<f64> {
    check_probability("b", b)?;
    if !(s >= 0.0) || !(x > 0.0) {
        return Err(Error::param("s/x", format!("need s ≥ 0 and x > 0, got s = {s}, x = {x}")));
    }
    if s == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    let alpha = ctx.cfg.path_loss_exponent;
    let k = s * ctx.p_beta();
    let x_pow = x.powf(-alpha);
    // ∫_x^∞ r/(1 + r^α/K) dr = K x^{2−α}/(α−2) ₂F₁(1, 1−δ; 2−δ; −K x^{−α})
    let f = gauss_2f1(1.0, 1.0 - ctx.delta, 2.0 - ctx.delta, -k * x_pow)?;
    let integral = k * x * x * x_pow / (alpha - 2.0) * f;
    Ok((-2.0 * PI * b * ctx.cfg.density * integral).exp())
}

/// Laplace transform of the interference from stations not caching the
/// content, over the whole plane.
pub fn laplace_uncached_interference(s: f64, b: f64, ctx: &MuCoverageContext) -> Result<f64> {
    check_probability("b", b)?;
    if !(s >= 0.0) {
        return Err(Error::param("s", format!("need s ≥ 0, got {s}")));
    }
    if s == 0.0 || b == 1.0 {
        return Ok(1.0);
    }
    let alpha = ctx.cfg.path_loss_exponent;
    let k = s * ctx.p_beta();
    // ∫_0^∞ r/(1 + r^α/K) dr = K^δ (π/α) csc(2π/α)
    let integral = k.powf(ctx.delta) * PI / alpha * ctx.csc;
    Ok((-2.0 * PI * (1.0 - b) * ctx.cfg.density * integral).exp())
}

/// q-th derivative in ν of g(ν) = −νφσ²/(Pβ) + log L_I + log L_Ī, at ν = x^α.
pub fn t_factor(q: usize, x: f64, b: f64, ctx: &MuCoverageContext) -> Result<f64> {
    check_probability("b", b)?;
    if q == 0 || !(x > 0.0) {
        return Err(Error::param("q/x", format!("need q ≥ 1 and x > 0, got q = {q}, x = {x}")));
    }
    let cfg = &ctx.cfg;
    let alpha = cfg.path_loss_exponent;
    let lambda = cfg.density;
    let phi = ctx.phi;
    let qf = q as f64;
    let nu = x.powf(alpha);
    let q_fact = gamma_fn(qf + 1.0)?;
    let sign = if q.is_multiple_of(2) { 1.0 } else { -1.0 };
    let hyp = match ctx.hyp.get(q) {
        Some(&h) => h,
        None => gauss_2f1(qf + 1.0, qf - ctx.delta, qf + 1.0 - ctx.delta, -phi)?,
    };
    let cached = 2.0 * PI * b * lambda * sign * q_fact * phi.powi(q as i32) * x.powf(2.0 - alpha * qf)
        / (alpha * qf - 2.0)
        * hyp;
    let falling = gamma_fn(1.0 + ctx.delta)? / gamma_fn(1.0 + ctx.delta - qf)?;
    let uncached = -2.0 * PI * PI / alpha
        * (1.0 - b)
        * lambda
        * phi.powf(ctx.delta)
        * ctx.csc
        * falling
        * nu.powf(ctx.delta - qf);
    let noise = if q == 1 {
        -phi * cfg.noise_w / ctx.p_beta()
    } else {
        0.0
    };
    Ok(noise + cached + uncached)
}

/// Probability that the SINR at serving distance x exceeds φ.
pub fn conditional_coverage_mu(x: f64, b: f64, ctx: &MuCoverageContext) -> Result<f64> {
    check_probability("b", b)?;
    if !(x > 0.0) {
        return Err(Error::param("x", format!("need x > 0, got {x}")));
    }
    let (g, h) = ctx.log_terms(x, b);
    let eg = g.exp();
    if eg == 0.0 {
        return Ok(0.0);
    }
    let mut series = 1.0;
    let mut n_fact = 1.0;
    for n in 1..ctx.cfg.antennas as usize {
        n_fact *= n as f64;
        series += partition_sum(&ctx.partitions[n], &h) / n_fact;
    }
    clamp_probability(eg * series)
}

fn clamp_probability(value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else if (-CLAMP_SLACK..=1.0 + CLAMP_SLACK).contains(&value) {
        log::warn!("coverage {value} clamped into [0, 1]");
        Ok(value.clamp(0.0, 1.0))
    } else {
        Err(Error::OutOfRange { value })
    }
}

/// Per-content delivery probability: the conditional coverage averaged over
/// the nearest caching station distance, 2πbλx e^{−πbλx²}.
pub fn scdp_content_mu(b: f64, ctx: &MuCoverageContext) -> Result<f64> {
    check_probability("b", b)?;
    if b == 0.0 {
        return Ok(0.0);
    }
    let scale = 1.0 / (PI * b * ctx.cfg.density);
    let r = integrate(
        |u| Ok(conditional_coverage_mu((u * scale).sqrt(), b, ctx)? * (-u).exp()),
        0.0,
        OUTER_U_MAX,
        &ctx.quadrature,
    )?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// Σ_j a_j P_j(b_j) for a feasible placement.
pub fn scdp_total_mu(placement: &PlacementVector, lib: &ContentLibrary, ctx: &MuCoverageContext) -> Result<f64> {
    placement.check_feasible(lib)?;
    let mut memo: HashMap<i64, f64> = HashMap::new();
    let mut total = 0.0;
    for (&a, &b) in lib.popularity().iter().zip(placement.as_slice()) {
        if a == 0.0 || b == 0.0 {
            continue;
        }
        let key = memo_key(b);
        let p = match memo.get(&key) {
            Some(&p) => p,
            None => {
                let p = scdp_content_mu(b, ctx)?;
                memo.insert(key, p);
                p
            }
        };
        total += a * p;
    }
    Ok(total)
}

fn memo_key(b: f64) -> i64 {
    (b * 1e12).round() as i64
}

/// The per-content delivery probability under the approximation
/// P_cov(x, b) ≈ P_cov(x, 0) (all interferers from the origin outward),
/// together with its first two derivatives in the caching probability.
///
/// With u = πϖλx²:
/// P̂ = ∫ P₀ e^{−u} du, P̂′ = ϖ⁻¹ ∫ P₀ (1−u) e^{−u} du,
/// P̂″ = ϖ⁻² ∫ P₀ (u²−2u) e^{−u} du.
pub fn interference_limited_scdp_derivatives(varpi: f64, ctx: &MuCoverageContext) -> Result<[f64; 3]> {
    if !(varpi > 0.0 && varpi <= 1.0) {
        return Err(Error::param("varpi", format!("need 0 < ϖ ≤ 1, got {varpi}")));
    }
    let scale = 1.0 / (PI * varpi * ctx.cfg.density);
    let opts = QuadratureOptions {
        abs_tol: ctx.quadrature.abs_tol.min(1e-11),
        rel_tol: 1e-12,
        max_subdivisions: ctx.quadrature.max_subdivisions.max(400),
    };
    let p0 = |u: f64| conditional_coverage_mu((u * scale).sqrt(), 0.0, ctx);
    let v = integrate(|u| Ok(p0(u)? * (-u).exp()), 0.0, OUTER_U_MAX, &opts)?.value;
    let d1 = integrate(|u| Ok(p0(u)? * (1.0 - u) * (-u).exp()), 0.0, OUTER_U_MAX, &opts)?.value;
    let d2 = integrate(|u| Ok(p0(u)? * (u * u - 2.0 * u) * (-u).exp()), 0.0, OUTER_U_MAX, &opts)?.value;
    Ok([v, d1 / varpi, d2 / (varpi * varpi)])
}

/// Shared per-content evaluator with a memo keyed on b quantized to 1e-12.
/// Concurrent readers and writers are fine; duplicate inserts store the same
/// value.
#[derive(Debug)]
pub struct MuScdpEvaluator {
    ctx: MuCoverageContext,
    memo: Mutex<HashMap<i64, f64>>,
}

impl MuScdpEvaluator {
    pub fn new(ctx: MuCoverageContext) -> Self {
        Self {
            ctx,
            memo: Mutex::new(HashMap::new()),
        }
    }

    pub fn context(&self) -> &MuCoverageContext {
        &self.ctx
    }

    pub fn content(&self, b: f64) -> Result<f64> {
        if b == 0.0 {
            return Ok(0.0);
        }
        let key = memo_key(b);
        if let Some(&p) = self.memo.lock().expect("memo poisoned").get(&key) {
            return Ok(p);
        }
        let p = scdp_content_mu(b, &self.ctx)?;
        self.memo.lock().expect("memo poisoned").insert(key, p);
        Ok(p)
    }

    /// Σ a_j P(b_j) without a feasibility check (optimizers penalize instead).
    pub fn total(&self, b: &[f64], lib: &ContentLibrary) -> Result<f64> {
        lib.popularity()
            .iter()
            .zip(b)
            .filter(|(&a, &b)| a > 0.0 && b > 0.0)
            .map(|(&a, &b)| Ok(a * self.content(b)?))
            .sum()
    }

    pub fn memo_len(&self) -> usize {
        self.memo.lock().expect("memo poisoned").len()
    }
}

/// P(b) sampled on a uniform grid over [0, 1] and read back with cubic
/// Hermite interpolation (slopes by finite differences). Meant for
/// optimizers that evaluate millions of placements; reported values should
/// come from the exact evaluator.
#[derive(Debug, Clone)]
pub struct ScdpTable {
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl ScdpTable {
    pub const DEFAULT_INTERVALS: usize = 2048;

    pub fn build(ctx: &MuCoverageContext, intervals: usize) -> Result<Self> {
        if intervals < 2 {
            return Err(Error::param("intervals", "need at least two grid intervals"));
        }
        let step = 1.0 / intervals as f64;
        let values = (0..=intervals)
            .map(|i| scdp_content_mu((i as f64 * step).min(1.0), ctx))
            .collect::<Result<Vec<_>>>()?;
        let n = values.len();
        let slopes = (0..n)
            .map(|i| {
                if i == 0 {
                    (values[1] - values[0]) / step
                } else if i == n - 1 {
                    (values[n - 1] - values[n - 2]) / step
                } else {
                    (values[i + 1] - values[i - 1]) / (2.0 * step)
                }
            })
            .collect();
        Ok(Self { step, values, slopes })
    }

    pub fn content(&self, b: f64) -> f64 {
        if b <= 0.0 {
            return 0.0;
        }
        let pos = (b.min(1.0) / self.step).min((self.values.len() - 1) as f64);
        let i = (pos.floor() as usize).min(self.values.len() - 2);
        let t = pos - i as f64;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * self.values[i]
            + h10 * self.step * self.slopes[i]
            + h01 * self.values[i + 1]
            + h11 * self.step * self.slopes[i + 1];
        v.clamp(0.0, 1.0)
    }

    pub fn total(&self, b: &[f64], lib: &ContentLibrary) -> f64 {
        lib.popularity().iter().zip(b).map(|(&a, &b)| a * self.content(b)).sum()
    }
}
