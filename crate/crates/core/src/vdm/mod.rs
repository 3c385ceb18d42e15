//! Log-domain plain and weighted Vandermonde determinants, their
//! gradients, and the Markov-inequality perturbation floor.
//!
//! Everything is evaluated as sums of logarithms so that configurations
//! with hundreds of points neither overflow nor underflow. Coincident
//! points give `f64::NEG_INFINITY` rather than an error: samplers treat
//! that as a zero density.

mod weight;

pub use weight::{Poly2, Table, WeightFunction, WeightSpec};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{delta_box, Configuration, Rectangle};

fn require_pairs(lambda: &Configuration) -> Result<()> {
    if lambda.d() < 2 {
        return Err(Error::TooFewPoints {
            needed: 2,
            got: lambda.d(),
        });
    }
    Ok(())
}

/// Sum over i < j of log|z_i - z_j|.
pub(crate) fn log_vdm_points(points: &[Complex64]) -> f64 {
    let mut total = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            total += (a - b).norm().ln();
        }
    }
    total
}

/// log |VDM_d(lambda)| = sum_{i<j} log|lambda_i - lambda_j|; -inf when two
/// points coincide.
pub fn log_vdm(lambda: &Configuration) -> Result<f64> {
    require_pairs(lambda)?;
    Ok(log_vdm_points(lambda.points()))
}

/// log |VDM^w_d(lambda)| = log|VDM_d| + d * sum_i log w(lambda_i).
///
/// The squared modulus |VDM^w_d|^2 has log equal to twice this value.
pub fn log_wvdm(lambda: &Configuration, w: &WeightFunction) -> Result<f64> {
    require_pairs(lambda)?;
    lambda.check_in(w.domain())?;
    Ok(log_wvdm_points(lambda.points(), w))
}

pub(crate) fn log_wvdm_points(points: &[Complex64], w: &WeightFunction) -> f64 {
    let d = points.len() as f64;
    let field: f64 = points.iter().map(|&z| w.log_w(z)).sum();
    log_vdm_points(points) + d * field
}

/// Terms of log|VDM^w_d| that involve point `i` placed at `z`:
/// sum_{j != i} log|z - z_j| + d log w(z).
pub(crate) fn point_terms(points: &[Complex64], i: usize, z: Complex64, w: &WeightFunction) -> f64 {
    let mut s = 0.0;
    for (j, p) in points.iter().enumerate() {
        if j != i {
            s += (z - p).norm().ln();
        }
    }
    s + points.len() as f64 * w.log_w(z)
}

/// Gradient of log|VDM^w_d| with respect to the 2d real coordinates,
/// laid out as [Re z_0, Im z_0, Re z_1, Im z_1, ...].
pub fn grad_log_wvdm(lambda: &Configuration, w: &WeightFunction) -> Result<Vec<f64>> {
    require_pairs(lambda)?;
    lambda.check_in(w.domain())?;
    grad_points(lambda.points(), w)
}

pub(crate) fn grad_points(points: &[Complex64], w: &WeightFunction) -> Result<Vec<f64>> {
    let d = points.len();
    let mut g = vec![0.0; 2 * d];
    for i in 0..d {
        for j in (i + 1)..d {
            let diff = points[i] - points[j];
            let r2 = diff.norm_sqr();
            if r2 == 0.0 {
                return Err(Error::SingularConfiguration { i, j });
            }
            let (gx, gy) = (diff.re / r2, diff.im / r2);
            g[2 * i] += gx;
            g[2 * i + 1] += gy;
            g[2 * j] -= gx;
            g[2 * j + 1] -= gy;
        }
        let gw = w.grad_log_w(points[i])?;
        g[2 * i] += d as f64 * gw[0];
        g[2 * i + 1] += d as f64 * gw[1];
    }
    Ok(g)
}

/// Markov constant of a rectangle by affine reduction of each axis to
/// [-1, 1]: max(2/width, 2/height), ignoring the height of an interval.
pub fn markov_constant(rect: &Rectangle) -> f64 {
    let ax = 2.0 / rect.width();
    if rect.is_interval() {
        ax
    } else {
        ax.max(2.0 / rect.height())
    }
}

/// Lipschitz coefficient A k^2 in |p(z1) - p(z2)| <= A k^2 ||p||_H |z1 - z2|
/// for polynomials of degree <= k in each variable. `a` defaults to
/// [`markov_constant`] of `rect`.
pub fn markov_lipschitz_bound(k: u32, rect: &Rectangle, a: Option<f64>) -> f64 {
    let a = a.unwrap_or_else(|| markov_constant(rect));
    a * (k as f64).powi(2)
}

/// Constants of a polynomial sequence of degree <= c1 d^gamma1 per real
/// variable, on a rectangle with Markov constant `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarkovBoundParams {
    pub a: f64,
    pub c1: f64,
    pub gamma1: f64,
}

impl MarkovBoundParams {
    pub fn new(a: f64, c1: f64, gamma1: f64) -> Result<Self> {
        if !(a > 0.0 && c1 > 0.0 && gamma1 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Markov parameters must be positive: A = {a}, c1 = {c1}, gamma1 = {gamma1}"
            )));
        }
        Ok(Self { a, c1, gamma1 })
    }

    /// For |VDM^w_d|^2 with polynomial w of per-variable degree m the
    /// per-variable degree is 2(d-1) + 2dm <= (2 + 2m) d.
    pub fn for_weighted_vdm(rect: &Rectangle, w: &WeightFunction) -> Result<Self> {
        let m = w
            .poly_degree()
            .ok_or(Error::UnsupportedKind(w.kind_name()))?;
        Self::new(markov_constant(rect), 2.0 + 2.0 * m as f64, 1.0)
    }
}

/// psi(d) = 1 - d A (c1 d^gamma1)^2 e^{-sqrt d}. Values <= 0 mean the bound
/// is vacuous at this d.
pub fn perturbation_floor(d: usize, params: &MarkovBoundParams) -> f64 {
    let d = d as f64;
    let degree = params.c1 * d.powf(params.gamma1);
    1.0 - d * params.a * degree * degree * (-d.sqrt()).exp()
}

/// Ratios |VDM^w_d(z)|^2 / |VDM^w_d(center)|^2 for `samples` points z drawn
/// uniformly from the perturbation box around `center` intersected with H^d.
pub fn sampled_perturbation_ratios<R: Rng + ?Sized>(
    center: &Configuration,
    w: &WeightFunction,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let base = log_wvdm(center, w)?;
    let bx = delta_box(center);
    (0..samples)
        .map(|_| {
            let z = bx.sample(w.domain(), rng);
            Ok((2.0 * (log_wvdm(&z, w)? - base)).exp())
        })
        .collect()
}
