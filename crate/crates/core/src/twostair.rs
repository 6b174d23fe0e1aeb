//! Two-stair placement: the ⌊εM⌋ most popular contents are cached with
//! probability one, the next band with a common probability ϖ, the rest not
//! at all.
//!
//! The search runs on a continuous relaxation of the Zipf head mass,
//! Σ_{j≤k} a_j ≈ (k^{1−γ} − 1)/(J^{1−γ} − 1). For fixed ϖ the best ε has a
//! closed form; ϖ itself is found with a clipped Newton iteration on the
//! relaxed objective, which is steered by a per-tier surrogate of the
//! per-content delivery probability. The reported value is always the exact
//! SCDP of the materialized placement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{mpc_placement, ContentLibrary, PlacementVector};
use crate::scdp_mm::{scdp_content_mm_derivatives, scdp_total_mm, MmCoverageContext};
use crate::scdp_mu::{interference_limited_scdp_derivatives, scdp_total_mu, MuCoverageContext};

/// Distance kept from γ = 1, where the head-mass relaxation is undefined.
pub const GAMMA_GUARD: f64 = 1e-6;
/// Curvatures below this switch the Newton step to a gradient step.
pub const MIN_CURVATURE: f64 = 1e-14;

const FLOOR_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoStairPoint {
    pub epsilon: f64,
    pub varpi: f64,
}

impl TwoStairPoint {
    /// ϖ is forced to 0 when ε = 1 (no budget is left for a second stair).
    pub fn new(epsilon: f64, varpi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&epsilon) || !(0.0..=1.0).contains(&varpi) {
            return Err(Error::param(
                "epsilon/varpi",
                format!("need both in [0, 1], got ({epsilon}, {varpi})"),
            ));
        }
        let varpi = if epsilon == 1.0 { 0.0 } else { varpi };
        Ok(Self { epsilon, varpi })
    }

    pub fn mpc() -> Self {
        Self {
            epsilon: 1.0,
            varpi: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonParams {
    pub max_iters: usize,
    /// Stop once an accepted step moves ϖ by less than this.
    pub grad_tol: f64,
    pub shrink: f64,
    pub armijo: f64,
    /// `None` starts at min(0.5, 1/ℓ(0.5)).
    pub init_varpi: Option<f64>,
}

impl Default for NewtonParams {
    fn default() -> Self {
        Self {
            max_iters: 100,
            grad_tol: 1e-8,
            shrink: 0.5,
            armijo: 1e-4,
            init_varpi: None,
        }
    }
}

impl NewtonParams {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || !(self.grad_tol > 0.0) || !(self.armijo > 0.0) {
            return Err(Error::param("newton", "max_iters, grad_tol and armijo must be positive"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::param("shrink", format!("{} outside (0, 1)", self.shrink)));
        }
        if let Some(v) = self.init_varpi {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::param("init_varpi", format!("{v} outside (0, 1]")));
            }
        }
        Ok(())
    }
}

fn stair_counts(pt: &TwoStairPoint, lib: &ContentLibrary) -> (usize, usize) {
    let j = lib.len();
    let m = lib.capacity().floor();
    let head = ((pt.epsilon * m + FLOOR_SLACK).floor() as usize).min(j);
    let band = if pt.varpi > 0.0 {
        ((m - head as f64) / pt.varpi + FLOOR_SLACK).floor().max(0.0) as usize
    } else {
        0
    };
    (head, band)
}

/// Materializes the stepped vector. A band running past the end of the
/// catalog is cut at J with a warning.
pub fn placement_from_twostair(pt: &TwoStairPoint, lib: &ContentLibrary) -> Result<PlacementVector> {
    if !lib.has_unit_sizes() {
        return Err(Error::param("sizes", "two-stair placement needs unit content sizes"));
    }
    let j = lib.len();
    let (head, band) = stair_counts(pt, lib);
    let band_end = if head + band > j {
        log::warn!("two-stair band of {band} contents runs past the catalog of {j}; truncated");
        j
    } else {
        head + band
    };
    let b = (0..j)
        .map(|i| {
            if i < head {
                1.0
            } else if i < band_end {
                pt.varpi
            } else {
                0.0
            }
        })
        .collect();
    PlacementVector::new(b)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::param("gamma", format!("need γ > 0, got {gamma}")));
    }
    if gamma == 1.0 {
        return Err(Error::domain("zipf head mass", "undefined at γ = 1"));
    }
    Ok(())
}

/// γ moved at least `GAMMA_GUARD` away from 1, on the side of the input.
pub fn guarded_gamma(gamma: f64) -> f64 {
    if (gamma - 1.0).abs() >= GAMMA_GUARD {
        return gamma;
    }
    let g = if gamma < 1.0 {
        1.0 - GAMMA_GUARD
    } else {
        1.0 + GAMMA_GUARD
    };
    log::debug!("zipf exponent {gamma} moved to {g}");
    g
}

/// (k^{1−γ} − 1)/(J^{1−γ} − 1).
pub fn zipf_head_mass_approx(k: f64, contents: usize, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(k >= 1.0) {
        return Err(Error::param("k", format!("need k ≥ 1, got {k}")));
    }
    if contents < 2 {
        return Err(Error::param("J", "need at least two contents"));
    }
    let e = 1.0 - gamma;
    Ok((k.powf(e) - 1.0) / ((contents as f64).powf(e) - 1.0))
}

struct Relaxation {
    k: f64,
    denom: f64,
    scale: f64,
}

impl Relaxation {
    fn new(lib: &ContentLibrary, gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if lib.len() < 2 {
            return Err(Error::param("J", "need at least two contents"));
        }
        let k = 1.0 - gamma;
        let denom = (lib.len() as f64).powf(k) - 1.0;
        Ok(Self {
            k,
            denom,
            scale: lib.capacity().powf(k) / denom,
        })
    }
}

fn library_gamma(lib: &ContentLibrary) -> Result<f64> {
    lib.zipf_exponent()
        .ok_or_else(|| Error::param("library", "two-stair placement needs a Zipf catalog"))
}

/// Relaxed objective at (ε, ϖ) given P(1) and P(ϖ):
/// P1·(M^k ε^k − 1)/D + Pw·M^k·(Z^k − ε^k)/D with k = 1−γ,
/// D = J^k − 1 and Z = ε + (1−ε)/ϖ. At (1, 0) it is the MPC head alone.
pub fn approx_objective_mu(pt: &TwoStairPoint, lib: &ContentLibrary, p1: f64, pw: f64) -> Result<f64> {
    let gamma = library_gamma(lib)?;
    let r = Relaxation::new(lib, gamma)?;
    let (eps, varpi) = (pt.epsilon, pt.varpi);
    let head = p1 * (r.scale * eps.powf(r.k) - 1.0 / r.denom);
    if varpi == 0.0 {
        if eps < 1.0 {
            return Err(Error::param("varpi", "ϖ = 0 is only meaningful with ε = 1"));
        }
        return Ok(head);
    }
    let z = eps + (1.0 - eps) / varpi;
    Ok(head + pw * r.scale * (z.powf(r.k) - eps.powf(r.k)))
}

/// The ε sub-problem objective for fixed (ϖ, ℓ):
/// f₁(ε) = [(ℓ−1)ε^{1−γ} + (ε + (1−ε)/ϖ)^{1−γ} − ℓ]/(J^{1−γ} − 1).
pub fn epsilon_subproblem(eps: f64, varpi: f64, ell: f64, gamma: f64, contents: usize) -> Result<f64> {
    check_gamma(gamma)?;
    if !(varpi > 0.0) {
        return Err(Error::param("varpi", "need ϖ > 0"));
    }
    let k = 1.0 - gamma;
    let z = eps + (1.0 - eps) / varpi;
    Ok(((ell - 1.0) * eps.powf(k) + z.powf(k) - ell) / ((contents as f64).powf(k) - 1.0))
}

fn epsilon_open(varpi: f64, ell: f64, gamma: f64) -> f64 {
    let a = ((ell - 1.0) / (1.0 / varpi - 1.0)).powf(-1.0 / gamma);
    1.0 / ((a - 1.0) * varpi + 1.0)
}

/// ε* = clamp(ε_o, 0, 1) with ε_o = 1/((A − 1)ϖ + 1),
/// A = ((ℓ−1)/(1/ϖ − 1))^{−1/γ}.
pub fn optimal_epsilon(varpi: f64, ell: f64, gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    if !(varpi > 0.0 && varpi <= 1.0) {
        return Err(Error::param("varpi", format!("{varpi} outside (0, 1]")));
    }
    if !(ell >= 1.0) || !ell.is_finite() {
        return Err(Error::param("ell", format!("need ℓ ≥ 1, got {ell}")));
    }
    if varpi == 1.0 {
        return Ok(1.0);
    }
    if ell == 1.0 {
        log::warn!("ℓ = 1 with ϖ < 1: ε_o degenerates, taking the limit ε* = 0");
        return Ok(0.0);
    }
    let e = epsilon_open(varpi, ell, gamma);
    Ok(if e.is_nan() { 1.0 } else { e.clamp(0.0, 1.0) })
}

/// ε*(ϖ) for fixed ℓ with its first two derivatives in ϖ. Zero derivatives
/// where the clamp is active.
fn epsilon_with_derivatives(varpi: f64, ell: f64, gamma: f64) -> Result<[f64; 3]> {
    let eps = optimal_epsilon(varpi, ell, gamma)?;
    if eps <= 0.0 || eps >= 1.0 || ell == 1.0 {
        return Ok([eps, 0.0, 0.0]);
    }
    let c = (ell - 1.0).powf(-1.0 / gamma);
    let inv_g = 1.0 / gamma;
    let v = 1.0 / varpi - 1.0;
    let dv = -1.0 / (varpi * varpi);
    let d2v = 2.0 / varpi.powi(3);
    let a = c * v.powf(inv_g);
    let da = c * inv_g * v.powf(inv_g - 1.0) * dv;
    let d2a = c * inv_g * ((inv_g - 1.0) * v.powf(inv_g - 2.0) * dv * dv + v.powf(inv_g - 1.0) * d2v);
    let q = (a - 1.0) * varpi + 1.0;
    let dq = da * varpi + a - 1.0;
    let d2q = d2a * varpi + 2.0 * da;
    let e1 = -dq / (q * q);
    let e2 = -d2q / (q * q) + 2.0 * dq * dq / q.powi(3);
    Ok([eps, e1, e2])
}

/// Per-tier pieces the two-stair search needs.
pub trait StairTier: Sync {
    /// Surrogate per-content delivery probability at ϖ and its first two
    /// derivatives.
    fn surrogate(&self, varpi: f64) -> Result<[f64; 3]>;

    /// Exact SCDP of a placement.
    fn exact_total(&self, placement: &PlacementVector, lib: &ContentLibrary) -> Result<f64>;
}

impl StairTier for MuCoverageContext {
    /// The interference-limited form P_cov(x, b) ≈ P_cov(x, 0).
    fn surrogate(&self, varpi: f64) -> Result<[f64; 3]> {
        interference_limited_scdp_derivatives(varpi, self)
    }

    fn exact_total(&self, placement: &PlacementVector, lib: &ContentLibrary) -> Result<f64> {
        scdp_total_mu(placement, lib, self)
    }
}

impl StairTier for MmCoverageContext {
    /// The closed form itself.
    fn surrogate(&self, varpi: f64) -> Result<[f64; 3]> {
        scdp_content_mm_derivatives(varpi, self)
    }

    fn exact_total(&self, placement: &PlacementVector, lib: &ContentLibrary) -> Result<f64> {
        scdp_total_mm(placement, lib, self)
    }
}

/// Quantities frozen for one outer iterate: ℓ = P(1)/P(ϖ) and P(1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonState {
    pub ell: f64,
    pub p1: f64,
    pub gamma: f64,
}

impl NewtonState {
    pub fn at<T: StairTier + ?Sized>(varpi: f64, lib: &ContentLibrary, tier: &T) -> Result<Self> {
        let gamma = guarded_gamma(library_gamma(lib)?);
        let p1 = tier.surrogate(1.0)?[0];
        let pw = tier.surrogate(varpi)?[0];
        if !(pw > 0.0) {
            return Err(Error::param("varpi", format!("surrogate delivery probability vanishes at ϖ = {varpi}")));
        }
        Ok(Self {
            ell: (p1 / pw).max(1.0),
            p1,
            gamma,
        })
    }
}

/// The relaxed objective along ε = ε*(ϖ; ℓ), with ℓ held fixed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedObjective {
    pub value: f64,
    pub d1: f64,
    pub d2: f64,
    pub epsilon: f64,
}

pub fn reduced_objective<T: StairTier + ?Sized>(
    varpi: f64,
    state: &NewtonState,
    lib: &ContentLibrary,
    tier: &T,
) -> Result<ReducedObjective> {
    let r = Relaxation::new(lib, state.gamma)?;
    let [pw, dpw, d2pw] = tier.surrogate(varpi)?;
    let [eps, e1, e2] = epsilon_with_derivatives(varpi, state.ell, state.gamma)?;
    let k = r.k;
    let m = r.scale;

    let inv = 1.0 / varpi;
    let z = eps + (1.0 - eps) * inv;
    let z1 = e1 * (1.0 - inv) + (eps - 1.0) * inv * inv;
    let z2 = e2 * (1.0 - inv) + 2.0 * e1 * inv * inv - 2.0 * (eps - 1.0) * inv.powi(3);

    let pow = |x: f64, p: f64| if x == 0.0 { 0.0 } else { x.powf(p) };
    let head = pow(eps, k);
    let head1 = k * pow(eps, k - 1.0) * e1;
    let head2 = k * (k - 1.0) * pow(eps, k - 2.0) * e1 * e1 + k * pow(eps, k - 1.0) * e2;
    let band = z.powf(k) - head;
    let band1 = k * z.powf(k - 1.0) * z1 - head1;
    let band2 = k * (k - 1.0) * z.powf(k - 2.0) * z1 * z1 + k * z.powf(k - 1.0) * z2 - head2;

    let p1 = state.p1;
    Ok(ReducedObjective {
        value: p1 * (m * head - 1.0 / r.denom) + pw * m * band,
        d1: p1 * m * head1 + m * (dpw * band + pw * band1),
        d2: p1 * m * head2 + m * (d2pw * band + 2.0 * dpw * band1 + pw * band2),
        epsilon: eps,
    })
}

fn newton_direction<T: StairTier + ?Sized>(
    varpi: f64,
    state: &NewtonState,
    lib: &ContentLibrary,
    tier: &T,
) -> Result<f64> {
    let r = reduced_objective(varpi, state, lib, tier)?;
    if r.d1 == 0.0 {
        return Ok(0.0);
    }
    if r.d2.abs() < MIN_CURVATURE {
        return Err(Error::ZeroCurvature {
            at: varpi,
            curvature: r.d2,
        });
    }
    Ok(r.d1 / r.d2.abs())
}

/// Δϖ = S′/|S″| on the sub-6 GHz relaxed objective.
pub fn newton_direction_mu(varpi: f64, state: &NewtonState, lib: &ContentLibrary, ctx: &MuCoverageContext) -> Result<f64> {
    newton_direction(varpi, state, lib, ctx)
}

/// Δϖ = S′/|S″| on the mmWave relaxed objective.
pub fn newton_direction_mm(varpi: f64, state: &NewtonState, lib: &ContentLibrary, ctx: &MmCoverageContext) -> Result<f64> {
    newton_direction(varpi, state, lib, ctx)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwoStairResult {
    pub point: TwoStairPoint,
    pub placement: PlacementVector,
    /// Exact SCDP of `placement`.
    pub scdp: f64,
    /// Exact SCDP of the pure MPC endpoint.
    pub mpc_scdp: f64,
    /// ϖ after each accepted step, starting with the initial point.
    pub varpi_path: Vec<f64>,
    /// Upper clip bound 1/ℓ in force at each entry of `varpi_path`.
    pub upper_path: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn bounds(varpi_upper: f64, lib: &ContentLibrary) -> (f64, f64) {
    let lower = lib.capacity() / lib.len() as f64;
    (lower.min(varpi_upper), varpi_upper)
}

/// Clipped Newton search over ϖ with Armijo backtracking on the relaxed
/// objective, then ε* at the final ϖ. Returns the better of the two-stair
/// placement and pure MPC by exact SCDP.
pub fn twostair_optimize<T: StairTier + ?Sized>(tier: &T, lib: &ContentLibrary, params: &NewtonParams) -> Result<TwoStairResult> {
    params.validate()?;
    if !lib.has_unit_sizes() {
        return Err(Error::param("sizes", "two-stair placement needs unit content sizes"));
    }
    if let Some(g) = lib.zipf_exponent().filter(|&g| guarded_gamma(g) != g) {
        log::warn!("zipf exponent {g} is too close to 1 for the head-mass relaxation; using {}", guarded_gamma(g));
    }
    let mpc = mpc_placement(lib);
    let mpc_scdp = tier.exact_total(&mpc, lib)?;
    if lib.capacity() >= lib.len() as f64 {
        return Ok(TwoStairResult {
            point: TwoStairPoint::mpc(),
            placement: mpc,
            scdp: mpc_scdp,
            mpc_scdp,
            varpi_path: vec![],
            upper_path: vec![],
            iterations: 0,
            converged: true,
        });
    }

    let mut varpi = match params.init_varpi {
        Some(v) => v,
        None => {
            let s = NewtonState::at(0.5, lib, tier)?;
            0.5f64.min(1.0 / s.ell)
        }
    };
    let mut state = NewtonState::at(varpi, lib, tier)?;
    let (lo, hi) = bounds(1.0 / state.ell, lib);
    varpi = varpi.clamp(lo, hi);
    state = NewtonState::at(varpi, lib, tier)?;

    // a start inside the flat ε* = 1 region gives no slope to follow
    if optimal_epsilon(varpi, state.ell, state.gamma)? >= 1.0 {
        if let Some(v) = coarse_start(tier, lib)? {
            varpi = v;
            state = NewtonState::at(varpi, lib, tier)?;
        }
    }

    let mut varpi_path = vec![varpi];
    let mut upper_path = vec![1.0 / state.ell];
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..params.max_iters {
        iterations += 1;
        state = NewtonState::at(varpi, lib, tier)?;
        let (lo, hi) = bounds(1.0 / state.ell, lib);
        let here = reduced_objective(varpi, &state, lib, tier)?;
        let dir = match newton_direction(varpi, &state, lib, tier) {
            Ok(d) => d,
            Err(Error::ZeroCurvature { .. }) => here.d1,
            Err(e) => return Err(e),
        };
        let mut step = 1.0;
        let mut next = varpi;
        while step > 1e-12 {
            let cand = (varpi + step * dir).clamp(lo, hi);
            let moved = cand - varpi;
            if moved == 0.0 {
                break;
            }
            let val = reduced_objective(cand, &state, lib, tier)?.value;
            if val >= here.value + params.armijo * here.d1 * moved {
                next = cand;
                break;
            }
            step *= params.shrink;
        }
        let moved = (next - varpi).abs();
        varpi = next;
        varpi_path.push(varpi);
        upper_path.push(hi);
        if moved < params.grad_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!("two-stair Newton search stopped after {iterations} iterations");
    }

    state = NewtonState::at(varpi, lib, tier)?;
    let eps = optimal_epsilon(varpi, state.ell, state.gamma)?;
    let point = TwoStairPoint::new(eps, varpi)?;
    let placement = placement_from_twostair(&point, lib)?;
    let scdp = tier.exact_total(&placement, lib)?;
    let (point, placement, scdp) = if scdp >= mpc_scdp {
        (point, placement, scdp)
    } else {
        (TwoStairPoint::mpc(), mpc, mpc_scdp)
    };
    Ok(TwoStairResult {
        point,
        placement,
        scdp,
        mpc_scdp,
        varpi_path,
        upper_path,
        iterations,
        converged,
    })
}

/// Best of a 20-point ϖ grid on the relaxed objective, among points where
/// ε* < 1.
fn coarse_start<T: StairTier + ?Sized>(tier: &T, lib: &ContentLibrary) -> Result<Option<f64>> {
    let lower = lib.capacity() / lib.len() as f64;
    let mut best: Option<(f64, f64)> = None;
    for i in 0..20 {
        let v = lower + (1.0 - lower) * (i as f64 + 0.5) / 20.0;
        let state = NewtonState::at(v, lib, tier)?;
        if v > 1.0 / state.ell {
            continue;
        }
        let r = reduced_objective(v, &state, lib, tier)?;
        if r.epsilon < 1.0 && best.is_none_or(|(_, b)| r.value > b) {
            best = Some((v, r.value));
        }
    }
    Ok(best.map(|(v, _)| v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn stair_shapes() {
        let lib = ContentLibrary::zipf(10, 4.0, 1.2).unwrap();
        let p = placement_from_twostair(&TwoStairPoint::mpc(), &lib).unwrap();
        assert_eq!(p.as_slice(), &[1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let p = placement_from_twostair(&TwoStairPoint::new(0.5, 0.5).unwrap(), &lib).unwrap();
        assert_eq!(p.as_slice(), &[1.0, 1.0, 0.5, 0.5, 0.5, 0.5, 0.0, 0.0, 0.0, 0.0]);
        let p = placement_from_twostair(&TwoStairPoint::new(0.0, 1.0).unwrap(), &lib).unwrap();
        assert_eq!(p.as_slice(), &[1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let p = placement_from_twostair(&TwoStairPoint::new(0.0, 0.1).unwrap(), &lib).unwrap();
        assert!(p.as_slice().iter().all(|&x| x == 0.1));
    }

    #[test]
    fn head_mass() {
        assert_relative_eq!(zipf_head_mass_approx(100.0, 100, 1.5).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(zipf_head_mass_approx(1.0, 100, 1.5).unwrap(), 0.0);
        assert_relative_eq!(
            zipf_head_mass_approx(10.0, 100, 1.5).unwrap(),
            0.759_746_926_647_958,
            epsilon = 1e-14
        );
        assert!(zipf_head_mass_approx(10.0, 100, 1.0).is_err());
    }

    #[test]
    fn approx_objective_cases() {
        let lib = ContentLibrary::zipf(100, 10.0, 1.5).unwrap();
        let mpc = approx_objective_mu(&TwoStairPoint::mpc(), &lib, 0.9, 0.7).unwrap();
        let want = 0.9 * (10f64.powf(-0.5) - 1.0) / (100f64.powf(-0.5) - 1.0);
        assert_relative_eq!(mpc, want, max_relative = 1e-14);

        let pt = TwoStairPoint::new(0.5, 0.25).unwrap();
        let v = approx_objective_mu(&pt, &lib, 0.9, 0.7).unwrap();
        assert_relative_eq!(v, 0.745_063_645_444_453_8, max_relative = 1e-13);

        let same = approx_objective_mu(&pt, &lib, 0.8, 0.8).unwrap();
        let z: f64 = 0.5 + 0.5 / 0.25;
        let merged = 0.8 * (z.powf(-0.5) * 10f64.powf(-0.5) - 1.0) / (100f64.powf(-0.5) - 1.0);
        assert_relative_eq!(same, merged, max_relative = 1e-13);
    }

    #[test]
    fn epsilon_edges() {
        // ε_o > 1 clamps
        assert_eq!(optimal_epsilon(0.5, 3.0, 1.5).unwrap(), 1.0);
        assert!(optimal_epsilon(0.2, 1e9, 1.5).unwrap() > 0.999);
        assert_eq!(optimal_epsilon(0.3, 1.0, 1.5).unwrap(), 0.0);
        assert!(optimal_epsilon(0.3, 1.5, 1.0).is_err());
    }

    #[test]
    fn epsilon_is_subproblem_argmax() {
        let (varpi, ell, gamma) = (0.2, 1.5, 1.5);
        let eps = optimal_epsilon(varpi, ell, gamma).unwrap();
        let f = |e: f64| epsilon_subproblem(e, varpi, ell, gamma, 100).unwrap();
        let (best, _) = (1..=10_000)
            .map(|i| i as f64 * 1e-4)
            .map(|e| (e, f(e)))
            .fold((0.0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        assert!((best - eps).abs() <= 1e-4, "{best} vs {eps}");
    }

    #[test]
    fn epsilon_derivatives_match_differences() {
        for &(v, ell, g) in &[(0.3, 2.0, 1.5), (0.15, 3.0, 0.6), (0.4, 1.8, 2.0)] {
            let [e, e1, e2] = epsilon_with_derivatives(v, ell, g).unwrap();
            assert!(e > 0.0 && e < 1.0);
            let h = 1e-5;
            let f = |x: f64| epsilon_open(x, ell, g);
            let fd1 = (f(v + h) - f(v - h)) / (2.0 * h);
            let h2 = 1e-4;
            let fd2 = (f(v + h2) - 2.0 * e + f(v - h2)) / (h2 * h2);
            assert_relative_eq!(e1, fd1, max_relative = 1e-7);
            assert_relative_eq!(e2, fd2, max_relative = 1e-5);
        }
    }

    #[test]
    fn gamma_guard_sides() {
        assert_eq!(guarded_gamma(1.0), 1.0 + GAMMA_GUARD);
        assert_eq!(guarded_gamma(1.0 - 1e-9), 1.0 - GAMMA_GUARD);
        assert_eq!(guarded_gamma(0.7), 0.7);
    }
}
