//! Continuum checks: interval entropies from the plane current correlator,
//! and the inverse-square decay of fitted lattice weights.

use serde::{Deserialize, Serialize};

use crate::eamfit::EntanglementAdjacency;
use crate::{Error, Result};

/// Two-point correlator of the entanglement current on the plane, `1/(x−y)²`.
pub fn current_correlator(x: f64, y: f64) -> Result<f64> {
    if x == y {
        return Err(Error::InvalidInput(
            "correlator is singular at coincident points".into(),
        ));
    }
    Ok((x - y).powi(-2))
}

/// Interval `(u, v)` on the infinite line with UV cutoff `epsilon` and
/// central charge `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalSpec {
    pub u: f64,
    pub v: f64,
    pub epsilon: f64,
    pub c: f64,
}

impl IntervalSpec {
    pub fn new(u: f64, v: f64, epsilon: f64, c: f64) -> Result<Self> {
        if !(u.is_finite() && v.is_finite() && epsilon.is_finite() && c.is_finite()) {
            return Err(Error::InvalidInput(
                "interval parameters must be finite".into(),
            ));
        }
        if epsilon <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "cutoff must be positive (got {epsilon})"
            )));
        }
        if v - u <= 2.0 * epsilon {
            return Err(Error::InvalidInput(format!(
                "interval length {} must exceed twice the cutoff {epsilon}",
                v - u
            )));
        }
        Ok(Self { u, v, epsilon, c })
    }

    pub fn length(&self) -> f64 {
        self.v - self.u
    }
}

/// `(c/3) ln((v−u)/ε)`.
pub fn interval_entropy_cft(spec: &IntervalSpec) -> f64 {
    spec.c / 3.0 * (spec.length() / spec.epsilon).ln()
}

/// `(c/6) ∫_{u+ε}^{v−ε} dx ∫_{A^c} dy (x−y)^−2`.
///
/// The inner integral over the complement is `1/(x−u) + 1/(v−x)` in closed
/// form; the outer one is done by adaptive Gauss–Kronrod quadrature.
pub fn interval_entropy_integral(spec: &IntervalSpec) -> Result<f64> {
    let IntervalSpec { u, v, epsilon, c } = *spec;
    let inner = |x: f64| 1.0 / (x - u) + 1.0 / (v - x);
    let outer = adaptive_gauss_kronrod(inner, u + epsilon, v - epsilon, 1e-12)?;
    Ok(c / 6.0 * outer)
}

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
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
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// (Kronrod estimate, |Kronrod − Gauss|) on one panel.
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = half * XGK[k];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Globally adaptive G7–K15 quadrature: bisects the panel with the largest
/// error estimate until the summed estimate drops below `tol`.
pub fn adaptive_gauss_kronrod<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    const MAX_PANELS: usize = 4096;
    let (value, error) = gk15(&f, a, b);
    let mut panels = vec![(a, b, value, error)];
    loop {
        let total_error: f64 = panels.iter().map(|p| p.3).sum();
        if total_error <= tol {
            // sum small panels first
            let mut values: Vec<f64> = panels.iter().map(|p| p.2).collect();
            values.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
            return Ok(values.iter().sum());
        }
        if panels.len() >= MAX_PANELS {
            return Err(Error::Quadrature {
                tol,
                estimate: total_error,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(k, _)| k)
            .expect("at least one panel");
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        for (l, h) in [(lo, mid), (mid, hi)] {
            let (val, err) = gk15(&f, l, h);
            panels.push((l, h, val, err));
        }
    }
}

/// Log-log least-squares fit of separation-averaged link weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub separations: Vec<usize>,
    pub mean_weights: Vec<f64>,
    pub exponent: f64,
    pub amplitude: f64,
    pub r2: f64,
}

/// Fits `J̄(d) ≈ amplitude · d^exponent` for `d ∈ [min_sep, max_sep]`, where
/// `J̄(d)` averages the weights of all pairs with `|i−j| = d`.
pub fn power_law_exponent(
    eam: &EntanglementAdjacency,
    min_sep: usize,
    max_sep: usize,
) -> Result<PowerLawFit> {
    let n = eam.n_sites();
    if min_sep < 1 || max_sep <= min_sep {
        return Err(Error::InvalidInput(format!(
            "need 1 ≤ min_sep < max_sep (got {min_sep}, {max_sep})"
        )));
    }
    if max_sep >= n {
        return Err(Error::EmptyRange {
            min: min_sep,
            max: max_sep,
        });
    }
    let separations: Vec<usize> = (min_sep..=max_sep).collect();
    let mean_weights: Vec<f64> = separations
        .iter()
        .map(|&d| (0..n - d).map(|i| eam.weight(i, i + d)).sum::<f64>() / (n - d) as f64)
        .collect();
    let bad: Vec<usize> = separations
        .iter()
        .zip(&mean_weights)
        .filter(|(_, &w)| w <= 0.0)
        .map(|(&d, _)| d)
        .collect();
    if !bad.is_empty() {
        return Err(Error::NonPositiveWeights(bad));
    }

    let xs: Vec<f64> = separations.iter().map(|&d| (d as f64).ln()).collect();
    let ys: Vec<f64> = mean_weights.iter().map(|w| w.ln()).collect();
    let k = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / k;
    let mean_y = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let syy: f64 = ys.iter().map(|y| (y - mean_y).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(PowerLawFit {
        separations,
        mean_weights,
        exponent: slope,
        amplitude: intercept.exp(),
        r2,
    })
}
