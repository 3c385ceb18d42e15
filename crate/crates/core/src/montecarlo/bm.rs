//! Bernstein–Markov ratios ||w^k p||_H / ||w^k p||_{L^2(tau)} for random
//! polynomials in a Chebyshev basis.

use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::base::BaseMeasure;
use super::log_sum_exp;
use crate::error::{Error, Result};
use crate::fekete::ascent::golden_max;
use crate::measures::Rectangle;
use crate::rng::task_rng;
use crate::vdm::WeightFunction;

const SUP_GRID_1D: usize = 2048;
const SUP_GRID_2D: usize = 512;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmRow {
    pub k: u32,
    /// Largest ratio over the trials.
    pub max_ratio: f64,
    /// max_ratio^(1/k).
    pub root: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmTable {
    pub rows: Vec<BmRow>,
    pub trials: usize,
}

/// Chebyshev variable of the rectangle: the interval is mapped to [-1, 1];
/// a 2-D rectangle is centered and scaled by half its larger side.
fn chebyshev_variable(rect: &Rectangle, z: Complex64) -> Complex64 {
    let half = 0.5
        * rect.width().max(if rect.is_interval() {
            0.0
        } else {
            rect.height()
        });
    (z - rect.center()) / half
}

fn clenshaw(coeffs: &[Complex64], t: Complex64) -> Complex64 {
    let mut b1 = Complex64::new(0.0, 0.0);
    let mut b2 = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs[0] + t * b1 - b2
}

fn log_weighted(
    coeffs: &[Complex64],
    k: u32,
    w: &WeightFunction,
    rect: &Rectangle,
    z: Complex64,
) -> f64 {
    k as f64 * w.log_w(z) + clenshaw(coeffs, chebyshev_variable(rect, z)).norm().ln()
}

/// log of the sup over H of |w^k p|: dense grid, then a golden-section
/// refinement around the best node (per axis in 2-D). A lower bound for
/// the true sup.
fn log_sup(coeffs: &[Complex64], k: u32, w: &WeightFunction, rect: &Rectangle) -> f64 {
    let f = |z: Complex64| log_weighted(coeffs, k, w, rect, z);
    let nx = if rect.is_interval() {
        SUP_GRID_1D
    } else {
        SUP_GRID_2D
    };
    let ny = if rect.is_interval() { 1 } else { SUP_GRID_2D };
    let hx = rect.width() / (nx - 1) as f64;
    let hy = if ny > 1 {
        rect.height() / (ny - 1) as f64
    } else {
        0.0
    };
    let mut best = (
        Complex64::new(rect.x_min(), rect.y_min()),
        f64::NEG_INFINITY,
    );
    for iy in 0..ny {
        for ix in 0..nx {
            let z = Complex64::new(rect.x_min() + hx * ix as f64, rect.y_min() + hy * iy as f64);
            let v = f(z);
            if v > best.1 {
                best = (z, v);
            }
        }
    }
    let (mut z, mut v) = best;
    let lo = (z.re - hx).max(rect.x_min());
    let hi = (z.re + hx).min(rect.x_max());
    let (x, vx) = golden_max(|x| f(Complex64::new(x, z.im)), lo, hi, 1e-12 * rect.width());
    if vx > v {
        z = Complex64::new(x, z.im);
        v = vx;
    }
    if ny > 1 {
        let lo = (z.im - hy).max(rect.y_min());
        let hi = (z.im + hy).min(rect.y_max());
        let (_, vy) = golden_max(
            |y| f(Complex64::new(z.re, y)),
            lo,
            hi,
            1e-12 * rect.height(),
        );
        v = v.max(vy);
    }
    v
}

fn log_l2(
    coeffs: &[Complex64],
    k: u32,
    w: &WeightFunction,
    rect: &Rectangle,
    rule: &[(Complex64, f64)],
) -> f64 {
    let terms: Vec<f64> = rule
        .iter()
        .filter(|(_, wt)| *wt > 0.0)
        .map(|&(z, wt)| 2.0 * log_weighted(coeffs, k, w, rect, z) + wt.ln())
        .collect();
    0.5 * log_sum_exp(&terms)
}

fn l2_rule(tau: &BaseMeasure) -> Vec<(Complex64, f64)> {
    if tau.domain().is_interval() {
        tau.rule(16, 16)
    } else {
        tau.rule(8, 8)
    }
}

/// ||w^k p||_H / ||w^k p||_{L^2(tau)} for p = sum_j c_j T_j in the
/// Chebyshev variable of H.
pub fn weighted_norm_ratio(
    coeffs: &[Complex64],
    k: u32,
    w: &WeightFunction,
    tau: &BaseMeasure,
) -> Result<f64> {
    if coeffs.is_empty() {
        return Err(Error::InvalidArgument(
            "polynomial needs at least one coefficient".into(),
        ));
    }
    let rect = tau.domain();
    let rule = l2_rule(tau);
    Ok((log_sup(coeffs, k, w, rect) - log_l2(coeffs, k, w, rect, &rule)).exp())
}

/// R_k = max over `trials` random polynomials of degree k (standard
/// normal Chebyshev coefficients, complex in 2-D) of the weighted
/// sup/L^2 ratio, for each k in `k_list`.
pub fn bm_ratio(
    w: &WeightFunction,
    tau: &BaseMeasure,
    k_list: &[u32],
    trials: usize,
    seed: u64,
) -> Result<BmTable> {
    if k_list.contains(&0) || trials == 0 {
        return Err(Error::InvalidArgument(
            "degrees must be positive and trials >= 1".into(),
        ));
    }
    if w.domain() != tau.domain() {
        return Err(Error::InvalidArgument(
            "weight and base measure live on different rectangles".into(),
        ));
    }
    let rect = *tau.domain();
    let rule = l2_rule(tau);
    let complex = !rect.is_interval();
    let rows = k_list
        .par_iter()
        .map(|&k| {
            let mut rng = task_rng(seed, k as u64);
            let mut best = 0.0f64;
            for _ in 0..trials {
                let coeffs: Vec<Complex64> = (0..=k)
                    .map(|_| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = if complex {
                            StandardNormal.sample(&mut rng)
                        } else {
                            0.0
                        };
                        Complex64::new(re, im)
                    })
                    .collect();
                let r = (log_sup(&coeffs, k, w, &rect) - log_l2(&coeffs, k, w, &rect, &rule)).exp();
                best = best.max(r);
            }
            BmRow {
                k,
                max_ratio: best,
                root: best.powf(1.0 / k as f64),
            }
        })
        .collect();
    Ok(BmTable { rows, trials })
}
