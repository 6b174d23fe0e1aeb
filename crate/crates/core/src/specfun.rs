//! Special functions and combinatorial helpers used by the multi-antenna
//! coverage expression: Gauss hypergeometric series, the gamma function,
//! the cosecant, integer-partition enumeration and the derivative expansion
//! of an exponential composite.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Relative tolerance of the hypergeometric series.
pub const SERIES_TOL: f64 = 1e-12;
/// Hard cap on the number of series terms.
pub const SERIES_MAX_TERMS: usize = 100_000;
/// Default cap on the partition order.
pub const DEFAULT_PARTITION_CAP: usize = 32;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Γ(x) by the Lanczos approximation (g = 7, 9 terms), with the reflection
/// formula below 1/2.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("gamma", format!("non-finite argument {x}")));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::Pole { func: "gamma", at: x });
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma_unchecked(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEF[0];
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// 1/sin(x). Multiples of π are poles.
pub fn cosecant(x: f64) -> Result<f64> {
    let turns = x / PI;
    if (turns - turns.round()).abs() < 1e-14 {
        return Err(Error::Pole {
            func: "cosecant",
            at: x,
        });
    }
    Ok(1.0 / x.sin())
}

/// Gauss hypergeometric function ₂F₁(a, b; c; z) for real arguments with
/// z < 1.
///
/// Arguments below −1/2 are mapped into (1/3, 1) with the Pfaff
/// transformation before summing; of the two Pfaff variants the one whose
/// terms decay fastest is used.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if is_nonpositive_integer(c) {
        return Err(Error::domain(
            "gauss_2f1",
            format!("c = {c} is a non-positive integer"),
        ));
    }
    if !(z < 1.0) || !a.is_finite() || !b.is_finite() || !c.is_finite() {
        return Err(Error::domain(
            "gauss_2f1",
            format!("unsupported argument z = {z}"),
        ));
    }
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    if z >= -0.5 {
        return hyp_series(a, b, c, z);
    }
    let w = z / (z - 1.0);
    // Pfaff: F(a,b;c;z) = (1-z)^{-a} F(a, c-b; c; w) = (1-z)^{-b} F(c-a, b; c; w).
    // Terms of the first decay like n^{a-b-1} w^n, of the second like n^{b-a-1} w^n.
    if a <= b {
        Ok((1.0 - z).powf(-a) * hyp_series(a, c - b, c, w)?)
    } else {
        Ok((1.0 - z).powf(-b) * hyp_series(c - a, b, c, w)?)
    }
}

fn hyp_series(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        let ratio = (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        term *= ratio;
        if term == 0.0 {
            return Ok(sum);
        }
        sum += term;
        // bound the geometric tail once the ratio has settled below one
        let r = ratio.abs();
        let tail = if r < 1.0 {
            term.abs() * (r / (1.0 - r)).max(1.0)
        } else {
            f64::INFINITY
        };
        if tail <= 1e-16 * sum.abs() && n > 2 {
            return Ok(sum);
        }
    }
    let last = term.abs() / sum.abs();
    if last <= SERIES_TOL {
        Ok(sum)
    } else {
        Err(Error::NonConvergence {
            what: "hypergeometric series",
            iterations: SERIES_MAX_TERMS,
            estimate: last,
        })
    }
}

/// Multiplicities `t_q` (q = 1..n) of one integer partition of n, i.e.
/// `Σ q·t_q = n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartitionMultiplicity {
    t: Vec<u32>,
}

impl PartitionMultiplicity {
    /// Builds from explicit multiplicities; `t[0]` is the count of ones.
    pub fn new(t: Vec<u32>) -> Self {
        Self { t }
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.t
    }

    /// t_q for q ≥ 1 (zero past the stored range).
    pub fn get(&self, q: usize) -> u32 {
        if q == 0 {
            return 0;
        }
        self.t.get(q - 1).copied().unwrap_or(0)
    }

    /// The integer n this partition belongs to.
    pub fn order(&self) -> usize {
        self.t
            .iter()
            .enumerate()
            .map(|(i, &tq)| (i + 1) * tq as usize)
            .sum()
    }

    /// Faà di Bruno weight n!/(Π t_q! (q!)^{t_q}).
    pub fn faa_di_bruno_weight(&self) -> f64 {
        let n = self.order();
        let mut w = factorial(n);
        for (i, &tq) in self.t.iter().enumerate() {
            if tq > 0 {
                w /= factorial(tq as usize) * factorial(i + 1).powi(tq as i32);
            }
        }
        w
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// All partitions of n as multiplicity vectors, with the default cap.
pub fn integer_partitions(n: usize) -> Result<Vec<PartitionMultiplicity>> {
    integer_partitions_capped(n, DEFAULT_PARTITION_CAP)
}

/// Enumerates partitions of n, starting from the one with the most ones.
pub fn integer_partitions_capped(n: usize, cap: usize) -> Result<Vec<PartitionMultiplicity>> {
    if n > cap {
        return Err(Error::CapExceeded { n, cap });
    }
    let mut out = Vec::new();
    let mut t = vec![0u32; n];
    fill_partitions(n, 1, n, &mut t, &mut out);
    Ok(out)
}

fn fill_partitions(
    n: usize,
    q: usize,
    remaining: usize,
    t: &mut Vec<u32>,
    out: &mut Vec<PartitionMultiplicity>,
) {
    if remaining == 0 {
        out.push(PartitionMultiplicity::new(t.clone()));
        return;
    }
    if q > n {
        return;
    }
    for count in (0..=remaining / q).rev() {
        t[q - 1] = count as u32;
        fill_partitions(n, q + 1, remaining - count * q, t, out);
    }
    t[q - 1] = 0;
}

/// Sum over partitions of n of the Faà di Bruno weight times Π (g⁽q⁾)^{t_q},
/// i.e. the complete Bell polynomial Bₙ(g⁽¹⁾, …, g⁽ⁿ⁾).
pub(crate) fn partition_sum(parts: &[PartitionMultiplicity], g_derivs: &[f64]) -> f64 {
    parts
        .iter()
        .map(|p| {
            let mut prod = p.faa_di_bruno_weight();
            for (i, &tq) in p.multiplicities().iter().enumerate() {
                if tq > 0 {
                    prod *= g_derivs[i].powi(tq as i32);
                }
            }
            prod
        })
        .sum()
}

/// n-th derivative of exp(g(ν)) given g(ν) and its first n derivatives at
/// the same point.
pub fn exp_composite_derivative(g_derivs: &[f64], g_value: f64, n: usize) -> Result<f64> {
    if g_derivs.len() < n {
        return Err(Error::param(
            "g_derivs",
            format!("need {n} derivatives, got {}", g_derivs.len()),
        ));
    }
    let parts = integer_partitions(n)?;
    Ok(g_value.exp() * partition_sum(&parts, g_derivs))
}
