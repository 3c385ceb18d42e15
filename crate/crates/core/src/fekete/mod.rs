//! Weighted Fekete configurations, the d-th transfinite diameter and its
//! extrapolated limit, and the moment-constrained supremum W_d.

pub(crate) mod ascent;
mod constrained;

pub use constrained::{constrained_sup_w, find_feasible, ConstrainedSup, PenaltyOptions};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{Configuration, Rectangle};
use crate::rng::{sub_seed, task_rng};
use crate::vdm::{grad_points, log_wvdm_points, point_terms, WeightFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeketeOptions {
    /// Independent starts; the first is unperturbed.
    pub restarts: usize,
    pub max_sweeps: usize,
    pub polish_iterations: usize,
    /// Projected-gradient norm at which the polish stops.
    pub tolerance: f64,
    /// Start jitter for restarts after the first, as a fraction of the mean
    /// point spacing.
    pub jitter: f64,
}

impl Default for FeketeOptions {
    fn default() -> Self {
        Self {
            restarts: 4,
            max_sweeps: 300,
            polish_iterations: 5000,
            tolerance: 1e-7,
            jitter: 0.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeketeResult {
    /// Canonicalized approximate maximizer z^M.
    pub configuration: Configuration,
    pub log_wvdm_value: f64,
    /// exp(2 log|VDM^w_d| / (d(d-1))).
    pub delta_d: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective of the winning restart after each sweep and polish step.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
    /// Final objective of every restart, in restart order.
    pub restart_values: Vec<f64>,
}

pub(crate) fn delta_from_log(log_value: f64, d: usize) -> f64 {
    (2.0 * log_value / (d * (d - 1)) as f64).exp()
}

fn start_points<R: Rng>(
    rect: &Rectangle,
    w: &WeightFunction,
    d: usize,
    jitter: f64,
    rng: &mut R,
) -> Vec<Complex64> {
    let base = rect.lobatto_points(d);
    if jitter <= 0.0 {
        return base;
    }
    let spacing_x = rect.width() / d as f64;
    let spacing_y = if rect.is_interval() {
        0.0
    } else {
        rect.height() / (d as f64).sqrt()
    };
    for _ in 0..100 {
        let moved: Vec<Complex64> = base
            .iter()
            .map(|z| {
                let nx: f64 = StandardNormal.sample(rng);
                let ny: f64 = StandardNormal.sample(rng);
                rect.clamp(Complex64::new(
                    z.re + jitter * spacing_x * nx,
                    z.im + jitter * spacing_y * ny,
                ))
            })
            .collect();
        if log_wvdm_points(&moved, w).is_finite() {
            return moved;
        }
    }
    base
}

/// Bracket for moving point i along one axis: between the nearest points
/// on the same horizontal (axis 0) or vertical (axis 1) line, else the
/// rectangle's edges. The flags say whether each end is a rectangle edge.
fn bracket(
    rect: &Rectangle,
    points: &[Complex64],
    i: usize,
    axis: usize,
) -> (f64, bool, f64, bool) {
    let coord = |z: &Complex64| if axis == 0 { z.re } else { z.im };
    let other = |z: &Complex64| if axis == 0 { z.im } else { z.re };
    let (mut lo, mut hi) = if axis == 0 {
        (rect.x_min(), rect.x_max())
    } else {
        (rect.y_min(), rect.y_max())
    };
    let (mut lo_edge, mut hi_edge) = (true, true);
    let c = coord(&points[i]);
    for (j, p) in points.iter().enumerate() {
        if j == i || other(p) != other(&points[i]) {
            continue;
        }
        let v = coord(p);
        if v <= c && v >= lo {
            lo = v;
            lo_edge = false;
        }
        if v >= c && v <= hi {
            hi = v;
            hi_edge = false;
        }
    }
    (lo, lo_edge, hi, hi_edge)
}

struct RunOutcome {
    points: Vec<Complex64>,
    value: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
}

fn coordinate_sweep(rect: &Rectangle, w: &WeightFunction, points: &mut [Complex64]) {
    let axes = if rect.is_interval() { 1 } else { 2 };
    let scale = rect.width().max(rect.height());
    for i in 0..points.len() {
        for axis in 0..axes {
            let (lo, lo_edge, hi, hi_edge) = bracket(rect, points, i, axis);
            if hi - lo <= 0.0 {
                continue;
            }
            let current = points[i];
            let at = |t: f64| {
                if axis == 0 {
                    Complex64::new(t, current.im)
                } else {
                    Complex64::new(current.re, t)
                }
            };
            let objective = |t: f64| point_terms(points, i, at(t), w);
            let t0 = if axis == 0 { current.re } else { current.im };
            let mut best = (t0, objective(t0));
            let (t, v) = ascent::golden_max(objective, lo, hi, 1e-13 * scale);
            if v > best.1 {
                best = (t, v);
            }
            for (edge, is_edge) in [(lo, lo_edge), (hi, hi_edge)] {
                if is_edge {
                    let v = objective(edge);
                    if v > best.1 {
                        best = (edge, v);
                    }
                }
            }
            points[i] = at(best.0);
        }
    }
}

fn run_once(
    rect: &Rectangle,
    w: &WeightFunction,
    start: Vec<Complex64>,
    opts: &FeketeOptions,
) -> RunOutcome {
    let mut points = start;
    let mut value = log_wvdm_points(&points, w);
    let mut trace = vec![value];
    let mut sweeps = 0;
    while sweeps < opts.max_sweeps {
        sweeps += 1;
        let before = points.clone();
        coordinate_sweep(rect, w, &mut points);
        let after = log_wvdm_points(&points, w);
        if !(after >= value) {
            // guards against rounding in the per-point bookkeeping
            points = before;
            break;
        }
        let gain = after - value;
        value = after;
        trace.push(value);
        if gain <= 1e-10 * (1.0 + value.abs()) {
            break;
        }
    }
    let polishable = !matches!(w.spec(), crate::vdm::WeightSpec::Tabulated { .. });
    if !polishable {
        return RunOutcome {
            points,
            value,
            iterations: sweeps,
            converged: sweeps < opts.max_sweeps,
            trace,
        };
    }
    let interval = rect.is_interval();
    let eval = |p: &[Complex64]| {
        let v = log_wvdm_points(p, w);
        if !v.is_finite() {
            return None;
        }
        let mut g = grad_points(p, w).ok()?;
        if interval {
            g.iter_mut().skip(1).step_by(2).for_each(|gy| *gy = 0.0);
        }
        Some((v, g))
    };
    let polished = ascent::projected_ascent(
        rect,
        points.clone(),
        eval,
        opts.polish_iterations,
        opts.tolerance,
    );
    if polished.value >= value {
        trace.extend(polished.trace.iter().skip(1));
        RunOutcome {
            points: polished.points,
            value: polished.value,
            iterations: sweeps + polished.iterations,
            converged: polished.converged,
            trace,
        }
    } else {
        RunOutcome {
            points,
            value,
            iterations: sweeps,
            converged: false,
            trace,
        }
    }
}

/// Approximate weighted Fekete configuration: best of `opts.restarts`
/// runs of cyclic coordinate ascent (golden section per axis) followed by
/// projected-gradient polish. Deterministic for a given seed; restarts run
/// in parallel, each on its own random stream.
pub fn solve_fekete(
    rect: &Rectangle,
    w: &WeightFunction,
    d: usize,
    opts: &FeketeOptions,
    seed: u64,
) -> Result<FeketeResult> {
    if d < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: d });
    }
    if rect != w.domain() {
        return Err(Error::InvalidArgument(format!(
            "rectangle {rect} differs from the weight's domain {}",
            w.domain()
        )));
    }
    let restarts = opts.restarts.max(1);
    let runs: Vec<RunOutcome> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = task_rng(seed, r as u64);
            let jitter = if r == 0 { 0.0 } else { opts.jitter };
            let start = start_points(rect, w, d, jitter, &mut rng);
            run_once(rect, w, start, opts)
        })
        .collect();
    let restart_values: Vec<f64> = runs.iter().map(|r| r.value).collect();
    let mut best: Option<(Configuration, &RunOutcome)> = None;
    for run in &runs {
        let canon = Configuration::new(run.points.clone())?.canonicalized();
        let better = match &best {
            None => true,
            Some((c, b)) => run.value > b.value || (run.value == b.value && lex_less(&canon, c)),
        };
        if better {
            best = Some((canon, run));
        }
    }
    let (configuration, run) = best.expect("at least one restart");
    if !run.value.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "no finite configuration found for d = {d}"
        )));
    }
    Ok(FeketeResult {
        delta_d: delta_from_log(run.value, d),
        log_wvdm_value: run.value,
        iterations: run.iterations,
        converged: run.converged,
        objective_trace: run.trace.clone(),
        restart_values,
        configuration,
    })
}

fn lex_less(a: &Configuration, b: &Configuration) -> bool {
    for (p, q) in a.points().iter().zip(b.points()) {
        match p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterRow {
    pub d: usize,
    pub delta_d: f64,
    pub log_wvdm_value: f64,
    pub converged: bool,
}

/// Raw (d, delta_d) table and the fit delta_d = delta + a/d over the
/// largest half of the d values. The fit is a heuristic extrapolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransfiniteDiameter {
    pub rows: Vec<DiameterRow>,
    pub extrapolated: f64,
    pub slope: f64,
    pub fit_d: Vec<usize>,
    pub all_converged: bool,
}

/// Least squares fit of y = c + a/d; returns (c, a).
pub fn fit_inverse_d(ds: &[usize], ys: &[f64]) -> (f64, f64) {
    let n = ds.len() as f64;
    let xs: Vec<f64> = ds.iter().map(|&d| 1.0 / d as f64).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return (my, 0.0);
    }
    let a = sxy / sxx;
    (my - a * mx, a)
}

pub fn transfinite_diameter(
    rect: &Rectangle,
    w: &WeightFunction,
    d_list: &[usize],
    opts: &FeketeOptions,
    seed: u64,
) -> Result<TransfiniteDiameter> {
    if d_list.is_empty() || d_list.windows(2).any(|p| p[0] >= p[1]) || d_list[0] < 2 {
        return Err(Error::InvalidArgument(
            "d_list must be increasing with every d >= 2".into(),
        ));
    }
    let results: Vec<Result<FeketeResult>> = d_list
        .par_iter()
        .map(|&d| solve_fekete(rect, w, d, opts, sub_seed(seed, d as u64)))
        .collect();
    let mut rows = Vec::with_capacity(d_list.len());
    for (r, &d) in results.into_iter().zip(d_list) {
        let r = r?;
        rows.push(DiameterRow {
            d,
            delta_d: r.delta_d,
            log_wvdm_value: r.log_wvdm_value,
            converged: r.converged,
        });
    }
    let half = rows.len() / 2;
    let fit_rows = if rows.len() >= 2 {
        &rows[half.min(rows.len() - 2)..]
    } else {
        &rows[..]
    };
    let fit_d: Vec<usize> = fit_rows.iter().map(|r| r.d).collect();
    let ys: Vec<f64> = fit_rows.iter().map(|r| r.delta_d).collect();
    let (extrapolated, slope) = fit_inverse_d(&fit_d, &ys);
    Ok(TransfiniteDiameter {
        all_converged: rows.iter().all(|r| r.converged),
        rows,
        extrapolated,
        slope,
        fit_d,
    })
}
