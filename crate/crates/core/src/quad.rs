//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd Kronrod nodes (1, 3, 5, centre).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-8,
            rel_tol: 1e-10,
            max_subdivisions: 200,
        }
    }
}

impl QuadratureOptions {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre)?;
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    for (j, &x) in XGK.iter().take(7).enumerate() {
        let dx = half * x;
        let f1 = f(centre - dx)?;
        let f2 = f(centre + dx)?;
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let value = resk * half;
    let error = ((resk - resg) * half).abs();
    Ok((value, error))
}

/// Integrates `f` over [a, b], bisecting the segment with the largest error
/// estimate until the total estimate meets `max(abs_tol, rel_tol·|I|)`.
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: &QuadratureOptions) -> Result<QuadResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (value, error) = kronrod15(&mut f, a, b)?;
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, error });
    let mut total = value;
    let mut total_err = error;
    for _ in 0..opts.max_subdivisions {
        if total_err <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            break;
        }
        let worst = heap.pop().expect("heap holds at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1) = kronrod15(&mut f, worst.a, mid)?;
        let (v2, e2) = kronrod15(&mut f, mid, worst.b)?;
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
        });
    }
    // re-sum to shed drift from the running updates
    let value: f64 = heap.iter().map(|s| s.value).sum();
    let error: f64 = heap.iter().map(|s| s.error).sum();
    if error > opts.abs_tol.max(opts.rel_tol * value.abs()) {
        return Err(Error::NonConvergence {
            what: "adaptive quadrature",
            iterations: opts.max_subdivisions,
            estimate: error,
        });
    }
    Ok(QuadResult {
        value,
        error,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| Ok(x * x * x - 2.0 * x), 0.0, 2.0, &Default::default()).unwrap();
        assert_relative_eq!(r.value, 0.0, epsilon = 1e-14);
        let r = integrate(|x| Ok(x.powi(6)), -1.0, 1.0, &Default::default()).unwrap();
        assert_relative_eq!(r.value, 2.0 / 7.0, max_relative = 1e-14);
    }

    #[test]
    fn exponential_weight() {
        let opts = QuadratureOptions {
            abs_tol: 1e-13,
            ..Default::default()
        };
        let r = integrate(|u| Ok((-u).exp()), 0.0, 40.0, &opts).unwrap();
        assert_relative_eq!(r.value, 1.0 - (-40.0f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn peaked_integrand_adapts() {
        let opts = QuadratureOptions {
            abs_tol: 1e-11,
            ..Default::default()
        };
        let r = integrate(|x| Ok(1.0 / (1e-4 + x * x)), -1.0, 1.0, &opts).unwrap();
        let want = 2.0 * (1.0f64 / 1e-2).atan() / 1e-2;
        assert_relative_eq!(r.value, want, max_relative = 1e-10);
        assert!(r.evaluations > 15);
    }

    #[test]
    fn errors_propagate() {
        let r = integrate(
            |x| {
                if x > 0.5 {
                    Err(Error::OutOfRange { value: x })
                } else {
                    Ok(x)
                }
            },
            0.0,
            1.0,
            &Default::default(),
        );
        assert!(r.is_err());
    }
}
