//! Constrained cross-entropy optimization of a placement vector.
//!
//! Each iteration draws `samples` Gaussian vectors, clamps them to the unit
//! box, scores them with a linear budget penalty, and refits the sampling
//! distribution to the elite set with smoothing.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ContentLibrary, PlacementVector, BUDGET_SLACK};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CceoParams {
    pub samples: usize,
    pub elite: usize,
    /// Mean smoothing factor ι.
    pub iota: f64,
    /// Base of the dynamic variance smoothing factor.
    pub beta: f64,
    pub q_smooth: u32,
    /// Penalty weight on budget overshoot.
    pub penalty: f64,
    pub eps_stop: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// `None` starts every entry at min(M/Σs, 1).
    pub init_mean: Option<f64>,
    pub init_var: f64,
}

impl Default for CceoParams {
    fn default() -> Self {
        Self {
            samples: 200,
            elite: 20,
            iota: 0.7,
            beta: 0.9,
            q_smooth: 7,
            penalty: 1e3,
            eps_stop: 1e-4,
            max_iters: 200,
            seed: 1,
            init_mean: None,
            init_var: 0.25,
        }
    }
}

impl CceoParams {
    pub fn validate(&self) -> Result<()> {
        if self.elite == 0 || self.elite >= self.samples {
            return Err(Error::param(
                "elite",
                format!("need 1 ≤ elite < samples, got {} of {}", self.elite, self.samples),
            ));
        }
        if !(0.5..=0.9).contains(&self.iota) {
            return Err(Error::param("iota", format!("{} outside [0.5, 0.9]", self.iota)));
        }
        if !(0.8..=0.99).contains(&self.beta) {
            return Err(Error::param("beta", format!("{} outside [0.8, 0.99]", self.beta)));
        }
        if !(5..=10).contains(&self.q_smooth) {
            return Err(Error::param("q_smooth", format!("{} outside [5, 10]", self.q_smooth)));
        }
        if !(self.penalty > 0.0) || !(self.eps_stop > 0.0) || !(self.init_var > 0.0) {
            return Err(Error::param("penalty/eps_stop/init_var", "must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::param("max_iters", "must be at least 1"));
        }
        if let Some(m) = self.init_mean {
            if !(0.0..=1.0).contains(&m) {
                return Err(Error::param("init_mean", format!("{m} outside [0, 1]")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CceoIteration {
    pub iteration: usize,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    /// Best penalized objective among this iteration's samples.
    pub best_objective: f64,
}

impl CceoIteration {
    pub fn max_variance(&self) -> f64 {
        self.variance.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CceoTrace {
    pub iterations: Vec<CceoIteration>,
    pub converged: bool,
}

impl CceoTrace {
    pub fn len(&self) -> usize {
        self.iterations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterations.is_empty()
    }

    /// CSV with columns iteration, max_variance, best_objective, mean_1..mean_J.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let j = self.iterations.first().map_or(0, |it| it.mean.len());
        let mut header = vec!["iteration".to_string(), "max_variance".into(), "best_objective".into()];
        header.extend((1..=j).map(|k| format!("mean_{k}")));
        w.write_record(&header)?;
        for it in &self.iterations {
            let mut row = vec![
                it.iteration.to_string(),
                format!("{:e}", it.max_variance()),
                format!("{:e}", it.best_objective),
            ];
            row.extend(it.mean.iter().map(|m| format!("{m:e}")));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// β_t = β − β(1 − 1/t)^q.
pub fn dynamic_beta(t: usize, beta: f64, q: u32) -> Result<f64> {
    if t == 0 {
        return Err(Error::param("t", "iterations are counted from 1"));
    }
    Ok(beta - beta * (1.0 - 1.0 / t as f64).powi(q as i32))
}

/// objective(b) − H·max(Σ b_j s_j − M, 0).
pub fn penalized_objective<F>(b: &[f64], objective: &F, lib: &ContentLibrary, penalty: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<f64> + ?Sized,
{
    let overshoot = (lib.budget_used(b) - lib.capacity()).max(0.0);
    Ok(objective(b)? - penalty * overshoot)
}

/// Scales the entries below one down by a common factor until the budget
/// holds. If the full entries alone overshoot, every entry is scaled.
pub fn repair_feasibility(b: &mut [f64], lib: &ContentLibrary) {
    let cap = lib.capacity();
    let used = lib.budget_used(b);
    if used <= cap + BUDGET_SLACK {
        return;
    }
    let sizes = lib.sizes();
    let full: f64 = b.iter().zip(sizes).filter(|(&x, _)| x >= 1.0).map(|(_, &s)| s).sum();
    let partial = used - full;
    if full <= cap && partial > 0.0 {
        let k = (cap - full) / partial;
        b.iter_mut().filter(|x| **x < 1.0).for_each(|x| *x *= k);
    } else {
        let k = cap / used;
        b.iter_mut().for_each(|x| *x *= k);
    }
}

#[derive(Debug, Clone)]
pub struct CceoResult {
    pub placement: PlacementVector,
    pub trace: CceoTrace,
}

/// Runs the optimizer. Objective values of one iteration are computed in
/// parallel and reduced in sample order, so the result depends only on the
/// seed.
pub fn cceo_optimize<F>(objective: F, lib: &ContentLibrary, params: &CceoParams) -> Result<CceoResult>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    params.validate()?;
    let j = lib.len();
    let start = params
        .init_mean
        .unwrap_or_else(|| (lib.capacity() / lib.total_size()).min(1.0));
    let mut mean = vec![start; j];
    let mut var = vec![params.init_var; j];
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut trace = CceoTrace::default();

    for t in 1..=params.max_iters {
        let samples: Vec<Vec<f64>> = (0..params.samples)
            .map(|_| {
                mean.iter()
                    .zip(&var)
                    .map(|(&m, &v)| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        (m + v.sqrt() * z).clamp(0.0, 1.0)
                    })
                    .collect()
            })
            .collect();
        let scores: Vec<f64> = samples
            .par_iter()
            .map(|b| penalized_objective(b, &objective, lib, params.penalty))
            .collect::<Result<_>>()?;

        let mut order: Vec<usize> = (0..params.samples).collect();
        // stable sort keeps lower indices first among ties
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
        let elite = &order[..params.elite];
        let n = params.elite as f64;

        let beta_t = dynamic_beta(t, params.beta, params.q_smooth)?;
        for k in 0..j {
            let m_hat = elite.iter().map(|&i| samples[i][k]).sum::<f64>() / n;
            let v_hat = elite.iter().map(|&i| (samples[i][k] - m_hat).powi(2)).sum::<f64>() / n;
            mean[k] = params.iota * m_hat + (1.0 - params.iota) * mean[k];
            var[k] = beta_t * v_hat + (1.0 - beta_t) * var[k];
        }
        trace.iterations.push(CceoIteration {
            iteration: t,
            mean: mean.clone(),
            variance: var.clone(),
            best_objective: scores[order[0]],
        });
        if var.iter().all(|&v| v < params.eps_stop) {
            trace.converged = true;
            break;
        }
    }
    if !trace.converged {
        log::warn!("cceo stopped at max_iters = {} before the variance criterion", params.max_iters);
    }

    // entries within one final standard deviation of a bound go to the bound
    let snap = params.eps_stop.sqrt();
    for m in mean.iter_mut() {
        if *m > 1.0 - snap {
            *m = 1.0;
        } else if *m < snap {
            *m = 0.0;
        }
    }
    repair_feasibility(&mut mean, lib);
    let placement = PlacementVector::new(mean.iter().map(|x| x.clamp(0.0, 1.0)).collect())?;
    Ok(CceoResult { placement, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn beta_schedule() {
        assert_eq!(dynamic_beta(1, 0.9, 7).unwrap(), 0.9);
        assert_relative_eq!(dynamic_beta(2, 0.9, 7).unwrap(), 0.892_968_75, epsilon = 1e-15);
        assert!(dynamic_beta(1_000_000, 0.9, 7).unwrap() < 1e-5);
        assert!(dynamic_beta(0, 0.9, 7).is_err());
    }

    #[test]
    fn penalty_is_linear_in_overshoot() {
        let lib = ContentLibrary::zipf(4, 2.0, 1.0).unwrap();
        let f = |b: &[f64]| Ok(b.iter().sum::<f64>());
        assert_eq!(penalized_objective(&[1.0, 1.0, 0.0, 0.0], &f, &lib, 1e3).unwrap(), 2.0);
        assert_eq!(penalized_objective(&[1.0, 1.0, 1.0, 0.0], &f, &lib, 1e3).unwrap(), 3.0 - 1e3);
        assert_eq!(penalized_objective(&[0.5, 0.5, 0.0, 0.0], &f, &lib, 1e3).unwrap(), 1.0);
    }

    #[test]
    fn repair_scales_partial_entries() {
        let lib = ContentLibrary::zipf(4, 2.0, 1.0).unwrap();
        let mut b = vec![1.0, 0.8, 0.4, 0.0];
        repair_feasibility(&mut b, &lib);
        assert_relative_eq!(b.iter().sum::<f64>(), 2.0, epsilon = 1e-12);
        assert_eq!(b[0], 1.0);
        assert_relative_eq!(b[1] / b[2], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_params() {
        let p = CceoParams {
            iota: 0.95,
            ..Default::default()
        };
        assert!(p.validate().is_err());
        let p = CceoParams {
            elite: 200,
            ..Default::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn monotone_objective_with_ample_budget() {
        let lib = ContentLibrary::zipf(6, 6.0, 1.0).unwrap();
        let f = |b: &[f64]| Ok(b.iter().sum::<f64>());
        let r = cceo_optimize(f, &lib, &CceoParams::default()).unwrap();
        assert!(r.placement.as_slice().iter().all(|&x| x > 1.0 - 1e-3), "{:?}", r.placement);
        assert!(r.trace.converged);
    }
}
