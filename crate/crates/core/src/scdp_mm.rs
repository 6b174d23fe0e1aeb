//! Delivery probability of the noise-limited mmWave tier under the LOS-ball
//! blockage model. Closed form; no small-scale fading.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{sinr_threshold, ContentLibrary, DeliveryRequirement, MmTierConfig, PlacementVector};

/// Tier constants plus the critical distances
/// d = (P G β / (φ σ²))^{1/α} for the LOS and NLOS exponents.
#[derive(Debug, Clone)]
pub struct MmCoverageContext {
    cfg: MmTierConfig,
    phi: f64,
    d_los: f64,
    d_nlos: f64,
}

impl MmCoverageContext {
    pub fn new(cfg: MmTierConfig, phi: f64) -> Result<Self> {
        cfg.validate()?;
        if !(phi > 0.0) || !phi.is_finite() {
            return Err(Error::param("phi", format!("need φ > 0, got {phi}")));
        }
        let snr_margin = cfg.power_w * cfg.array_gain * cfg.intercept / (phi * cfg.noise_w);
        let d_los = snr_margin.powf(1.0 / cfg.los_exponent);
        let d_nlos = snr_margin.powf(1.0 / cfg.nlos_exponent);
        if !(d_los > 0.0 && d_los.is_finite() && d_nlos > 0.0 && d_nlos.is_finite()) {
            return Err(Error::param(
                "phi",
                format!("critical distances degenerate (d_L = {d_los}, d_N = {d_nlos})"),
            ));
        }
        Ok(Self {
            cfg,
            phi,
            d_los,
            d_nlos,
        })
    }

    pub fn from_requirement(cfg: MmTierConfig, req: &DeliveryRequirement) -> Result<Self> {
        let phi = sinr_threshold(req, cfg.bandwidth_hz)?;
        Self::new(cfg, phi)
    }

    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        Self::new(self.cfg.clone(), phi)
    }

    pub fn config(&self) -> &MmTierConfig {
        &self.cfg
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn d_los(&self) -> f64 {
        self.d_los
    }

    pub fn d_nlos(&self) -> f64 {
        self.d_nlos
    }

    /// Outer radius of the LOS success region, min(D_L, d_L).
    pub fn los_reach(&self) -> f64 {
        self.cfg.los_radius.min(self.d_los)
    }

    /// Outer radius of the NLOS success annulus, max(D_L, d_N).
    pub fn nlos_reach(&self) -> f64 {
        self.cfg.los_radius.max(self.d_nlos)
    }

    /// Whether the link at distance y clears the threshold.
    pub fn link_succeeds(&self, y: f64) -> bool {
        if y < self.cfg.los_radius {
            y <= self.d_los
        } else {
            y <= self.d_nlos
        }
    }
}

fn check_b(b: f64) -> Result<()> {
    if (0.0..=1.0).contains(&b) {
        Ok(())
    } else {
        Err(Error::param("b", format!("{b} outside [0, 1]")))
    }
}

/// Probability the nearest caching station lies within r: 1 − e^{−r²πbλ}.
pub fn nearest_within(r: f64, b: f64, density: f64) -> f64 {
    -(-r * r * PI * b * density).exp_m1()
}

/// 1 − exp(−min(D_L, d_L)² π b λ).
pub fn scdp_content_mm_los(b: f64, ctx: &MmCoverageContext) -> Result<f64> {
    check_b(b)?;
    Ok(nearest_within(ctx.los_reach(), b, ctx.cfg.density))
}

/// exp(−D_L² π b λ) − exp(−max(D_L, d_N)² π b λ); exactly zero once
/// d_N ≤ D_L.
pub fn scdp_content_mm_nlos(b: f64, ctx: &MmCoverageContext) -> Result<f64> {
    check_b(b)?;
    let d_l = ctx.cfg.los_radius;
    if ctx.d_nlos <= d_l {
        return Ok(0.0);
    }
    let lam = ctx.cfg.density;
    Ok(nearest_within(ctx.nlos_reach(), b, lam) - nearest_within(d_l, b, lam))
}

/// LOS + NLOS.
pub fn scdp_content_mm(b: f64, ctx: &MmCoverageContext) -> Result<f64> {
    Ok(scdp_content_mm_los(b, ctx)? + scdp_content_mm_nlos(b, ctx)?)
}

/// Σ_j a_j (LOS_j + NLOS_j) for a feasible placement.
pub fn scdp_total_mm(placement: &PlacementVector, lib: &ContentLibrary, ctx: &MmCoverageContext) -> Result<f64> {
    placement.check_feasible(lib)?;
    scdp_total_mm_unchecked(placement.as_slice(), lib, ctx)
}

/// Same sum on a raw vector, without the budget check.
pub fn scdp_total_mm_unchecked(b: &[f64], lib: &ContentLibrary, ctx: &MmCoverageContext) -> Result<f64> {
    lib.popularity()
        .iter()
        .zip(b)
        .map(|(&a, &b)| Ok(a * scdp_content_mm(b, ctx)?))
        .sum()
}

/// First and second derivatives of LOS + NLOS in b.
pub fn scdp_content_mm_derivatives(b: f64, ctx: &MmCoverageContext) -> Result<[f64; 3]> {
    check_b(b)?;
    let lam = ctx.cfg.density;
    let k_los = ctx.los_reach().powi(2) * PI * lam;
    let mut value = scdp_content_mm(b, ctx)?;
    let mut d1 = k_los * (-k_los * b).exp();
    let mut d2 = -k_los * k_los * (-k_los * b).exp();
    if ctx.d_nlos > ctx.cfg.los_radius {
        let k_d = ctx.cfg.los_radius.powi(2) * PI * lam;
        let k_n = ctx.nlos_reach().powi(2) * PI * lam;
        d1 += -k_d * (-k_d * b).exp() + k_n * (-k_n * b).exp();
        d2 += k_d * k_d * (-k_d * b).exp() - k_n * k_n * (-k_n * b).exp();
    }
    value = value.clamp(0.0, 1.0);
    Ok([value, d1, d2])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ctx_with_reach(d_l: f64, d_n: f64) -> MmCoverageContext {
        // pick constants so that the critical distances come out as requested
        let mut cfg = MmTierConfig::table_defaults();
        cfg.los_exponent = 2.25;
        cfg.nlos_exponent = 2.25 * d_l.ln() / d_n.ln();
        let margin = d_l.powf(cfg.los_exponent);
        let phi = 1e-3;
        cfg.noise_w = cfg.power_w * cfg.array_gain * cfg.intercept / (phi * margin);
        let c = MmCoverageContext::new(cfg, phi).unwrap();
        assert_relative_eq!(c.d_los(), d_l, max_relative = 1e-10);
        assert_relative_eq!(c.d_nlos(), d_n, max_relative = 1e-10);
        c
    }

    #[test]
    fn los_examples() {
        let c = ctx_with_reach(100.0, 40.0);
        assert_eq!(scdp_content_mm_los(0.0, &c).unwrap(), 0.0);
        let want = 1.0 - (-225.0 * PI * 6e-4f64).exp();
        assert_relative_eq!(scdp_content_mm_los(1.0, &c).unwrap(), want, max_relative = 1e-14);
        assert_relative_eq!(want, 0.3456, epsilon = 1e-4);
        let far = c.with_phi(1e30).unwrap();
        assert!(scdp_content_mm_los(1.0, &far).unwrap() < 1e-6);
    }

    #[test]
    fn nlos_examples() {
        let c = ctx_with_reach(100.0, 40.0);
        let want = (-225.0 * PI * 6e-4f64).exp() - (-1600.0 * PI * 6e-4f64).exp();
        assert_relative_eq!(scdp_content_mm_nlos(1.0, &c).unwrap(), want, max_relative = 1e-13);
        assert_relative_eq!(want, 0.6055, epsilon = 5e-4);
        assert_eq!(scdp_content_mm_nlos(0.0, &c).unwrap(), 0.0);
        let short = ctx_with_reach(100.0, 12.0);
        assert_eq!(scdp_content_mm_nlos(0.7, &short).unwrap(), 0.0);
    }

    #[test]
    fn totals() {
        let c = MmCoverageContext::from_requirement(MmTierConfig::table_defaults(), &DeliveryRequirement::default()).unwrap();
        let lib = ContentLibrary::zipf(5, 5.0, 0.0).unwrap();
        let ones = PlacementVector::new(vec![1.0; 5]).unwrap();
        let want = scdp_content_mm_los(1.0, &c).unwrap() + scdp_content_mm_nlos(1.0, &c).unwrap();
        assert_relative_eq!(scdp_total_mm(&ones, &lib, &c).unwrap(), want, max_relative = 1e-14);
        assert_eq!(scdp_total_mm(&PlacementVector::zeros(5), &lib, &c).unwrap(), 0.0);
    }

    #[test]
    fn table_critical_distances() {
        let c = MmCoverageContext::from_requirement(MmTierConfig::table_defaults(), &DeliveryRequirement::default()).unwrap();
        assert!(c.d_los() > c.config().los_radius);
        assert!(c.d_nlos() > c.config().los_radius);
    }
}
