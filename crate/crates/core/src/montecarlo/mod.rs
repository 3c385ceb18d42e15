//! Base measures, partition-function and constrained-integral estimators,
//! large-deviation probabilities, and Bernstein–Markov ratio tables.
//!
//! `log_z` integrates the mean log-weighted-Vandermonde along an
//! inverse-temperature path: log Z(2) = d log tau(H) + int_0^2 E_beta[L],
//! where L = log|VDM^phi_d| and the chain at beta samples |VDM^phi|^beta.
//! For d <= 3 it uses tensor Gauss–Legendre quadrature instead.
//!
//! The constrained integral J is Z times P, the probability that the
//! beta = 2 ensemble lands in the moment neighborhood. P is estimated
//! along a penalty path exp(-rho D) with D the squared moment excess:
//! log P = -int_0^rho_max E_rho[D] drho + log P_rho_max(D = 0). The last
//! term is the inside fraction of the final, heavily penalized chain.

mod base;
mod bm;
mod chain;
mod sandwich;

pub use base::{BaseMeasure, BaseSpec};
pub use bm::{bm_ratio, weighted_norm_ratio, BmRow, BmTable};
pub use sandwich::{sandwich_bounds, SandwichBounds};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fekete::{find_feasible, PenaltyOptions};
use crate::measures::MomentNeighborhood;
use crate::rng::task_rng;
use crate::vdm::WeightFunction;
use chain::{run_stage, Chain, Penalty, StageStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    Importance,
    Thermodynamic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChainOptions {
    /// Sweeps (d single-point updates each) of burn-in per stage.
    pub burn_in: usize,
    /// Measured sweeps per stage.
    pub samples: usize,
    pub batches: usize,
    pub beta_points: usize,
    pub rho_points: usize,
    pub target_acceptance: f64,
    /// Quadrature panels and points per panel, per axis.
    pub quadrature_panels: usize,
    pub quadrature_points: usize,
    /// Forces an estimation method; by default quadrature for d <= 3 and
    /// thermodynamic integration above.
    pub method: Option<Method>,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            burn_in: 1000,
            samples: 4000,
            batches: 20,
            beta_points: 21,
            rho_points: 30,
            target_acceptance: 0.3,
            quadrature_panels: 8,
            quadrature_points: 8,
            method: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Post-adaptation acceptance rate of every stage, in path order.
    pub acceptance_rates: Vec<f64>,
    /// Smallest effective sample size over the stages.
    pub effective_sample_size: f64,
    /// Path grid (beta or rho values) and per-stage means and errors.
    pub path: Vec<f64>,
    pub stage_means: Vec<f64>,
    pub stage_errors: Vec<f64>,
    /// Fraction of final-stage sweeps inside the neighborhood.
    pub inside_fraction: Option<f64>,
    pub flagged: bool,
    pub messages: Vec<String>,
}

impl Diagnostics {
    fn check_acceptance(&mut self) {
        for (k, &a) in self.acceptance_rates.iter().enumerate() {
            if !(0.1..=0.6).contains(&a) {
                self.flagged = true;
                self.messages.push(format!(
                    "stage {k}: acceptance {a:.3} outside [0.1, 0.6] after adaptation"
                ));
            }
        }
    }

    fn merge(mut self, other: &Diagnostics) -> Self {
        self.acceptance_rates.extend(&other.acceptance_rates);
        self.effective_sample_size = match (self.path.is_empty(), other.path.is_empty()) {
            (true, _) => other.effective_sample_size,
            (_, true) => self.effective_sample_size,
            _ => self.effective_sample_size.min(other.effective_sample_size),
        };
        self.flagged |= other.flagged;
        self.messages.extend(other.messages.iter().cloned());
        if self.inside_fraction.is_none() {
            self.inside_fraction = other.inside_fraction;
        }
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub n_samples: usize,
    pub method: Method,
    /// Quadrature estimates: difference from the half-resolution rule.
    pub truncation_bound: Option<f64>,
    pub diagnostics: Diagnostics,
}

fn check_inputs(phi: &WeightFunction, tau: &BaseMeasure, d: usize) -> Result<()> {
    if d < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: d });
    }
    if phi.domain() != tau.domain() {
        return Err(Error::InvalidArgument(format!(
            "weight domain {} differs from base-measure domain {}",
            phi.domain(),
            tau.domain()
        )));
    }
    Ok(())
}

fn pick_method(opts: &ChainOptions, d: usize) -> Method {
    opts.method.unwrap_or(if d <= 3 {
        Method::Quadrature
    } else {
        Method::Thermodynamic
    })
}

/// Sum over d-tuples of quadrature nodes of prod weights * integrand,
/// with the integrand given in log form.
fn tensor_log_sum<F>(rule: &[(Complex64, f64)], d: usize, log_integrand: F) -> f64
where
    F: Fn(&[Complex64]) -> f64 + Sync,
{
    let n = rule.len();
    let terms: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|first| {
            let mut idx = vec![0usize; d];
            idx[0] = first;
            let mut pts = vec![Complex64::new(0.0, 0.0); d];
            let mut acc = Vec::new();
            loop {
                let mut logw = 0.0;
                for (p, &i) in pts.iter_mut().zip(&idx) {
                    *p = rule[i].0;
                    logw += rule[i].1.ln();
                }
                let v = log_integrand(&pts) + logw;
                if v > f64::NEG_INFINITY {
                    acc.push(v);
                }
                // odometer over indices 1..d
                let mut k = d - 1;
                loop {
                    if k == 0 {
                        return log_sum_exp(&acc);
                    }
                    idx[k] += 1;
                    if idx[k] < n {
                        break;
                    }
                    idx[k] = 0;
                    k -= 1;
                }
            }
        })
        .collect();
    log_sum_exp(&terms)
}

pub(crate) fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn quadrature_sizes(tau: &BaseMeasure, opts: &ChainOptions) -> (usize, usize) {
    if tau.domain().is_interval() {
        (opts.quadrature_panels.max(2), opts.quadrature_points.max(2))
    } else {
        (2, opts.quadrature_points.clamp(2, 6))
    }
}

/// log of int over H^d of |VDM^phi_d|^2 * indicator dtau^d by tensor
/// quadrature, with the half-resolution difference as error bound.
fn quadrature_log_integral(
    phi: &WeightFunction,
    tau: &BaseMeasure,
    d: usize,
    nbhd: Option<&MomentNeighborhood>,
    opts: &ChainOptions,
) -> (f64, f64, usize) {
    let (panels, n) = quadrature_sizes(tau, opts);
    let integrand = |pts: &[Complex64]| {
        if let Some(nb) = nbhd {
            if !nb.contains_points(pts) {
                return f64::NEG_INFINITY;
            }
        }
        2.0 * crate::vdm::log_wvdm_points(pts, phi)
    };
    let fine = tau.rule(panels, n);
    let coarse = tau.rule((panels / 2).max(1), n);
    let value = tensor_log_sum(&fine, d, integrand);
    let rough = tensor_log_sum(&coarse, d, integrand);
    (value, (value - rough).abs(), fine.len().pow(d as u32))
}

fn collect_stages(path: Vec<f64>, stats: &[StageStats]) -> Diagnostics {
    let mut diag = Diagnostics {
        acceptance_rates: stats.iter().map(|s| s.acceptance).collect(),
        effective_sample_size: stats.iter().map(|s| s.ess).fold(f64::INFINITY, f64::min),
        path,
        stage_means: stats.iter().map(|s| s.mean).collect(),
        stage_errors: stats.iter().map(|s| s.std_error).collect(),
        ..Default::default()
    };
    diag.check_acceptance();
    diag
}

/// log Z_d = log int_{H^d} |VDM^phi_d|^2 dtau^d.
pub fn log_z(
    phi: &WeightFunction,
    tau: &BaseMeasure,
    d: usize,
    seed: u64,
    opts: &ChainOptions,
) -> Result<McEstimate> {
    check_inputs(phi, tau, d)?;
    match pick_method(opts, d) {
        Method::Quadrature => {
            let (value, bound, n) = quadrature_log_integral(phi, tau, d, None, opts);
            Ok(McEstimate {
                value,
                std_error: 0.0,
                n_samples: n,
                method: Method::Quadrature,
                truncation_bound: Some(bound),
                diagnostics: Diagnostics::default(),
            })
        }
        Method::Importance => Ok(importance_log_z(phi, tau, d, seed, opts)),
        Method::Thermodynamic => Ok(thermodynamic_log_z(phi, tau, d, seed, opts)),
    }
}

fn importance_log_z(
    phi: &WeightFunction,
    tau: &BaseMeasure,
    d: usize,
    seed: u64,
    opts: &ChainOptions,
) -> McEstimate {
    let n = opts.samples.max(2) * opts.beta_points.max(1);
    let mut rng = task_rng(seed, 0);
    let logs: Vec<f64> = (0..n)
        .map(|_| {
            let pts: Vec<Complex64> = (0..d).map(|_| tau.sample(&mut rng)).collect();
            2.0 * crate::vdm::log_wvdm_points(&pts, phi)
        })
        .collect();
    let lse = log_sum_exp(&logs);
    let log_mean = lse - (n as f64).ln();
    // delta method on the ratio estimator: se(log mean) = sd(w) / (sqrt(n) mean(w))
    let second = log_sum_exp(&logs.iter().map(|l| 2.0 * l).collect::<Vec<_>>()) - (n as f64).ln();
    let rel_var = ((second - 2.0 * log_mean).exp() - 1.0).max(0.0);
    let ess = (2.0 * lse - log_sum_exp(&logs.iter().map(|l| 2.0 * l).collect::<Vec<_>>())).exp();
    McEstimate {
        value: d as f64 * tau.total_mass().ln() + log_mean,
        std_error: (rel_var / n as f64).sqrt(),
        n_samples: n,
        method: Method::Importance,
        truncation_bound: None,
        diagnostics: Diagnostics {
            effective_sample_size: ess,
            ..Default::default()
        },
    }
}

fn thermodynamic_log_z(
    phi: &WeightFunction,
    tau: &BaseMeasure,
    d: usize,
    seed: u64,
    opts: &ChainOptions,
) -> McEstimate {
    let m = opts.beta_points.max(2);
    let betas: Vec<f64> = (0..m).map(|k| 2.0 * k as f64 / (m - 1) as f64).collect();
    let stats: Vec<StageStats> = betas
        .par_iter()
        .enumerate()
        .map(|(k, &beta)| {
            let mut rng = task_rng(seed, k as u64);
            let start = Chain::initial_points(tau, phi, d, &mut rng);
            let mut chain = Chain::new(phi, tau, beta, None, start);
            run_stage(
                &mut chain,
                opts.burn_in,
                opts.samples,
                opts.batches,
                opts.target_acceptance,
                &mut rng,
                |c| c.log_wvdm(),
            )
        })
        .collect();
    let h = 2.0 / (m - 1) as f64;
    let weights: Vec<f64> = (0..m)
        .map(|k| if k == 0 || k == m - 1 { 0.5 * h } else { h })
        .collect();
    let integral: f64 = weights.iter().zip(&stats).map(|(w, s)| w * s.mean).sum();
    let var: f64 = weights
        .iter()
        .zip(&stats)
        .map(|(w, s)| (w * s.std_error).powi(2))
        .sum();
    McEstimate {
        value: d as f64 * tau.total_mass().ln() + integral,
        std_error: var.sqrt(),
        n_samples: stats.iter().map(|s| s.n).sum(),
        method: Method::Thermodynamic,
        truncation_bound: None,
        diagnostics: collect_stages(betas, &stats),
    }
}

/// Whether every configuration in H^d lies in the neighborhood: each
/// moment's possible range sits inside the epsilon window.
fn neighborhood_is_everything(tau: &BaseMeasure, nbhd: &MomentNeighborhood) -> bool {
    let b = tau.domain().coordinate_bound();
    nbhd.reference()
        .iter()
        .skip(1)
        .all(|((n1, n2), r)| b.powi((n1 + n2) as i32) + r.abs() < nbhd.epsilon())
}

/// Penalty-path grid: 0 followed by a geometric sequence from 1e-3 to 1e4
/// in units of 1/epsilon^2.
fn rho_grid(eps: f64, points: usize) -> Vec<f64> {
    let count = points.max(3) - 1;
    let (lo, hi) = (1e-3 / (eps * eps), 1e4 / (eps * eps));
    let ratio = (hi / lo).powf(1.0 / (count - 1) as f64);
    std::iter::once(0.0)
        .chain((0..count).map(|j| lo * ratio.powi(j as i32)))
        .collect()
}

/// log P_d: the log probability that the normalized |VDM^phi_d|^2 dtau^d
/// ensemble has empirical moments inside `nbhd`.
pub fn log_constraint_probability(
    phi: &WeightFunction,
    tau: &BaseMeasure,
    nbhd: &MomentNeighborhood,
    d: usize,
    seed: u64,
    opts: &ChainOptions,
) -> Result<McEstimate> {
    check_inputs(phi, tau, d)?;
    if neighborhood_is_everything(tau, nbhd) {
        return Ok(McEstimate {
            value: 0.0,
            std_error: 0.0,
            n_samples: 0,
            method: Method::Quadrature,
            truncation_bound: Some(0.0),
            diagnostics: Diagnostics {
                inside_fraction: Some(1.0),
                messages: vec!["neighborhood contains every configuration".into()],
                ..Default::default()
            },
        });
    }
    find_feasible(tau.domain(), nbhd, d, seed, &PenaltyOptions::default())?;
    match pick_method(opts, d) {
        Method::Quadrature => {
            let (lj, bj, n) = quadrature_log_integral(phi, tau, d, Some(nbhd), opts);
            let (lz, bz, _) = quadrature_log_integral(phi, tau, d, None, opts);
            Ok(McEstimate {
                value: lj - lz,
                std_error: 0.0,
                n_samples: n,
                method: Method::Quadrature,
                truncation_bound: Some(bj + bz),
                diagnostics: Diagnostics::default(),
            })
        }
        _ => penalty_path(phi, tau, nbhd, d, seed, opts),
    }
}

fn penalty_path(
    phi: &WeightFunction,
    tau: &BaseMeasure,
    nbhd: &MomentNeighborhood,
    d: usize,
    seed: u64,
    opts: &ChainOptions,
) -> Result<McEstimate> {
    let rhos = rho_grid(nbhd.epsilon(), opts.rho_points);
    let mut rng = task_rng(seed, 1 << 32);
    let start = Chain::initial_points(tau, phi, d, &mut rng);
    let mut chain = Chain::new(phi, tau, 2.0, Some(Penalty { nbhd, rho: 0.0 }), start);
    let mut stats = Vec::with_capacity(rhos.len());
    let last = rhos.len() - 1;
    let mut inside_count = 0usize;
    for (j, &rho) in rhos.iter().enumerate() {
        chain.set_rho(rho);
        let burn = if j == 0 {
            opts.burn_in
        } else {
            (opts.burn_in / 4).max(1)
        };
        let s = run_stage(
            &mut chain,
            burn,
            opts.samples,
            opts.batches,
            opts.target_acceptance,
            &mut rng,
            |c| {
                if j == last && c.inside() {
                    inside_count += 1;
                }
                c.excess()
            },
        );
        stats.push(s);
    }
    let rho_max = rhos[last];
    let fraction = inside_count as f64 / opts.samples as f64;
    if inside_count == 0 {
        return Err(Error::ChainInitialization { rho: rho_max });
    }
    // [0, rho_1] by the trapezoid rule in rho, the geometric part in log rho
    let mut integral = 0.5 * rhos[1] * (stats[0].mean + stats[1].mean);
    let mut var =
        (0.5 * rhos[1]).powi(2) * (stats[0].std_error.powi(2) + stats[1].std_error.powi(2));
    let du = (rhos[2] / rhos[1]).ln();
    for j in 1..=last {
        let w = if j == 1 || j == last { 0.5 * du } else { du } * rhos[j];
        integral += w * stats[j].mean;
        var += (w * stats[j].std_error).powi(2);
    }
    // batch-means error of the inside indicator is approximated by the
    // binomial error inflated with the final stage's ESS ratio
    let ess_ratio = (stats[last].ess / stats[last].n as f64).clamp(1e-3, 1.0);
    let frac_se = (fraction * (1.0 - fraction) / (opts.samples as f64 * ess_ratio)).sqrt();
    var += (frac_se / fraction).powi(2);
    let mut diagnostics = collect_stages(rhos, &stats);
    diagnostics.inside_fraction = Some(fraction);
    Ok(McEstimate {
        value: -integral + fraction.ln(),
        std_error: var.sqrt(),
        n_samples: stats.iter().map(|s| s.n).sum(),
        method: Method::Thermodynamic,
        truncation_bound: None,
        diagnostics,
    })
}

fn combine(a: &McEstimate, b: &McEstimate, sign: f64) -> McEstimate {
    let method = if a.method == b.method {
        a.method
    } else {
        Method::Thermodynamic
    };
    McEstimate {
        value: a.value + sign * b.value,
        std_error: a.std_error.hypot(b.std_error),
        n_samples: a.n_samples + b.n_samples,
        method,
        truncation_bound: match (a.truncation_bound, b.truncation_bound) {
            (Some(x), Some(y)) => Some(x + y),
            (x, y) => x.or(y),
        },
        diagnostics: a.diagnostics.clone().merge(&b.diagnostics),
    }
}

/// log J_d = log int over configurations with empirical moments in `nbhd`
/// of |VDM^phi_d|^2 dtau^d, computed as log Z_d + log P_d.
pub fn log_j(
    phi: &WeightFunction,
    tau: &BaseMeasure,
    nbhd: &MomentNeighborhood,
    d: usize,
    seed: u64,
    opts: &ChainOptions,
) -> Result<McEstimate> {
    let z = log_z(phi, tau, d, seed, opts)?;
    let p = log_constraint_probability(phi, tau, nbhd, d, seed, opts)?;
    Ok(combine(&z, &p, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbEstimate {
    /// log Prob_d = log J - log Z. Its error is that of log P: the log Z
    /// estimate is shared by both terms and cancels.
    pub log_prob: McEstimate,
    pub log_j: McEstimate,
    pub log_z: McEstimate,
    /// -(1/d^2) log Prob_d, comparable with the rate functional.
    pub rate_check: f64,
}

pub fn log_prob(
    phi: &WeightFunction,
    tau: &BaseMeasure,
    nbhd: &MomentNeighborhood,
    d: usize,
    seed: u64,
    opts: &ChainOptions,
) -> Result<ProbEstimate> {
    let z = log_z(phi, tau, d, seed, opts)?;
    let p = log_constraint_probability(phi, tau, nbhd, d, seed, opts)?;
    let j = combine(&z, &p, 1.0);
    let mut prob = p.clone();
    prob.value = j.value - z.value;
    Ok(ProbEstimate {
        rate_check: -prob.value / (d * d) as f64,
        log_prob: prob,
        log_j: j,
        log_z: z,
    })
}
