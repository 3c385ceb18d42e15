use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::ascent::projected_ascent;
use super::{delta_from_log, solve_fekete, FeketeOptions};
use crate::error::{Error, Result};
use crate::measures::{Configuration, MomentNeighborhood, Moments, Rectangle};
use crate::rng::task_rng;
use crate::vdm::{grad_points, log_vdm_points, log_wvdm_points, WeightFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PenaltyOptions {
    /// Moment gaps are pushed below (1 - margin) * epsilon so that the
    /// returned configuration is strictly inside the neighborhood.
    pub margin: f64,
    pub max_rounds: usize,
    pub ascent_iterations: usize,
    pub feasibility_restarts: usize,
}

impl Default for PenaltyOptions {
    fn default() -> Self {
        Self {
            margin: 0.02,
            max_rounds: 40,
            ascent_iterations: 3000,
            feasibility_restarts: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstrainedSup {
    /// log W_d = 2 log|VDM^phi_d| / (d(d-1)) at the returned configuration.
    pub log_w: f64,
    pub w_value: f64,
    pub log_wvdm_value: f64,
    pub configuration: Configuration,
    /// False when the unconstrained Fekete solution already lies in the
    /// neighborhood.
    pub constraint_active: bool,
    pub penalty_rounds: usize,
    pub final_penalty: f64,
    /// Largest absolute moment gap of the returned configuration.
    pub worst_gap: f64,
}

/// Sum over moments other than (0,0) of max(0, |gap| - target)^2, and its
/// gradient in the [x0, y0, ...] layout.
fn moment_excess(points: &[Complex64], reference: &Moments, target: f64) -> (f64, Vec<f64>) {
    let d = points.len();
    let k = reference.k();
    let moments = Moments::of_points(points, k);
    let mut value = 0.0;
    let mut grad = vec![0.0; 2 * d];
    for ((n1, n2), v) in moments.iter().skip(1) {
        let gap = v - reference.get(n1, n2).expect("same order");
        let excess = gap.abs() - target;
        if excess <= 0.0 {
            continue;
        }
        value += excess * excess;
        let coef = 2.0 * excess * gap.signum() / d as f64;
        for (i, z) in points.iter().enumerate() {
            if n1 > 0 {
                grad[2 * i] += coef * n1 as f64 * z.re.powi(n1 as i32 - 1) * z.im.powi(n2 as i32);
            }
            if n2 > 0 {
                grad[2 * i + 1] +=
                    coef * n2 as f64 * z.re.powi(n1 as i32) * z.im.powi(n2 as i32 - 1);
            }
        }
    }
    (value, grad)
}

fn log_vdm_grad(points: &[Complex64]) -> Vec<f64> {
    let d = points.len();
    let mut g = vec![0.0; 2 * d];
    for i in 0..d {
        for j in (i + 1)..d {
            let diff = points[i] - points[j];
            let r2 = diff.norm_sqr();
            let (gx, gy) = (diff.re / r2, diff.im / r2);
            g[2 * i] += gx;
            g[2 * i + 1] += gy;
            g[2 * j] -= gx;
            g[2 * j + 1] -= gy;
        }
    }
    g
}

fn worst_gap(nbhd: &MomentNeighborhood, points: &[Complex64]) -> ((u32, u32), f64) {
    nbhd.worst_gap(&Moments::of_points(points, nbhd.k()))
}

/// A configuration of `d` distinct points of `rect` whose empirical
/// measure lies strictly inside the neighborhood. Minimizes the moment
/// excess with a weak log-barrier keeping points apart, from Lobatto
/// starts (jittered after the first).
pub fn find_feasible(
    rect: &Rectangle,
    nbhd: &MomentNeighborhood,
    d: usize,
    seed: u64,
    opts: &PenaltyOptions,
) -> Result<Configuration> {
    if d < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: d });
    }
    let eps = nbhd.epsilon();
    let target = eps * (1.0 - opts.margin);
    let barrier = 1e-3 / (d * d) as f64;
    let interval = rect.is_interval();
    let eval = |p: &[Complex64]| {
        let lv = log_vdm_points(p);
        if !lv.is_finite() {
            return None;
        }
        let (pen, pg) = moment_excess(p, nbhd.reference(), target);
        let bg = log_vdm_grad(p);
        let mut g: Vec<f64> = pg
            .iter()
            .zip(&bg)
            .map(|(a, b)| -a / (eps * eps) + barrier * b)
            .collect();
        if interval {
            g.iter_mut().skip(1).step_by(2).for_each(|gy| *gy = 0.0);
        }
        Some((-pen / (eps * eps) + barrier * lv, g))
    };
    let mut closest: Option<((u32, u32), f64)> = None;
    for r in 0..opts.feasibility_restarts.max(1) {
        let mut rng = task_rng(seed ^ 0xFEA5_1B1E, r as u64);
        let mut start = rect.lobatto_points(d);
        if r > 0 {
            let scale = 0.5 * rect.width().max(rect.height()) / d as f64 * r as f64;
            for z in &mut start {
                let nx: f64 = StandardNormal.sample(&mut rng);
                let ny: f64 = if interval {
                    0.0
                } else {
                    StandardNormal.sample(&mut rng)
                };
                *z = rect.clamp(*z + Complex64::new(scale * nx, scale * ny));
            }
            if !log_vdm_points(&start).is_finite() {
                continue;
            }
        }
        if nbhd.contains_points(&start) {
            return Configuration::new(start);
        }
        let out = projected_ascent(rect, start, eval, opts.ascent_iterations, 1e-10);
        if nbhd.contains_points(&out.points) && log_vdm_points(&out.points).is_finite() {
            return Configuration::new(out.points);
        }
        let gap = worst_gap(nbhd, &out.points);
        if closest.is_none_or(|c| gap.1 < c.1) {
            closest = Some(gap);
        }
    }
    let ((n1, n2), gap) = closest.unwrap_or(((0, 0), f64::INFINITY));
    Err(Error::Infeasible {
        d,
        n1,
        n2,
        gap,
        epsilon: eps,
    })
}

/// Supremum of |VDM^phi_d|^{2/(d(d-1))} over configurations whose
/// empirical measure lies strictly in `nbhd`.
///
/// If the unconstrained Fekete solution is feasible it is the answer.
/// Otherwise an exterior quadratic penalty on the moment excess is
/// maximized with the penalty doubled each round, warm-started from a
/// feasible configuration, until the maximizer is strictly feasible. Only
/// strictly feasible configurations are ever returned.
pub fn constrained_sup_w(
    rect: &Rectangle,
    phi: &WeightFunction,
    nbhd: &MomentNeighborhood,
    d: usize,
    seed: u64,
    fekete: &FeketeOptions,
    opts: &PenaltyOptions,
) -> Result<ConstrainedSup> {
    let finish = |config: Configuration, value: f64, active: bool, rounds: usize, penalty: f64| {
        let gap = worst_gap(nbhd, config.points()).1;
        Ok(ConstrainedSup {
            log_w: 2.0 * value / (d * (d - 1)) as f64,
            w_value: delta_from_log(value, d),
            log_wvdm_value: value,
            configuration: config.canonicalized(),
            constraint_active: active,
            penalty_rounds: rounds,
            final_penalty: penalty,
            worst_gap: gap,
        })
    };
    let free = solve_fekete(rect, phi, d, fekete, seed)?;
    if nbhd.contains_points(free.configuration.points()) {
        return finish(free.configuration, free.log_wvdm_value, false, 0, 0.0);
    }

    let start = find_feasible(rect, nbhd, d, seed, opts)?;
    let mut best_points = start.points().to_vec();
    let mut best_value = log_wvdm_points(&best_points, phi);
    let eps = nbhd.epsilon();
    let target = eps * (1.0 - opts.margin);
    let interval = rect.is_interval();
    let mut rho = (d * d) as f64 / (eps * eps);
    let mut current = best_points.clone();
    let mut rounds = 0;
    while rounds < opts.max_rounds {
        rounds += 1;
        let eval = |p: &[Complex64]| {
            let v = log_wvdm_points(p, phi);
            if !v.is_finite() {
                return None;
            }
            let (pen, pg) = moment_excess(p, nbhd.reference(), target);
            let mut g = grad_points(p, phi).ok()?;
            g.iter_mut().zip(&pg).for_each(|(a, b)| *a -= rho * b);
            if interval {
                g.iter_mut().skip(1).step_by(2).for_each(|gy| *gy = 0.0);
            }
            Some((v - rho * pen, g))
        };
        let out = projected_ascent(
            rect,
            current,
            eval,
            opts.ascent_iterations,
            fekete.tolerance,
        );
        current = out.points;
        let value = log_wvdm_points(&current, phi);
        if nbhd.contains_points(&current) && value.is_finite() {
            if value > best_value {
                best_value = value;
                best_points = current.clone();
            }
            break;
        }
        rho *= 2.0;
    }
    finish(
        Configuration::new(best_points)?,
        best_value,
        true,
        rounds,
        rho,
    )
}
