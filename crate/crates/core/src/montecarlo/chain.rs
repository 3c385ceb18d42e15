//! Single-point Metropolis chains on H^d targeting
//! |VDM^phi_d|^beta exp(-rho D) dtau^d, where D is the squared moment
//! excess over a neighborhood.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::base::BaseMeasure;
use crate::measures::{MomentNeighborhood, Rectangle};
use crate::vdm::{log_wvdm_points, point_terms, WeightFunction};

pub(crate) struct Penalty<'a> {
    pub nbhd: &'a MomentNeighborhood,
    pub rho: f64,
}

pub(crate) struct Chain<'a> {
    w: &'a WeightFunction,
    tau: &'a BaseMeasure,
    rect: Rectangle,
    beta: f64,
    penalty: Option<Penalty<'a>>,
    exponents: Vec<(u32, u32)>,
    reference: Vec<f64>,
    points: Vec<Complex64>,
    sums: Vec<f64>,
    /// Proposal standard deviation as a fraction of the side lengths.
    pub scale: f64,
    proposed: u64,
    accepted: u64,
}

fn monomials(z: Complex64, exponents: &[(u32, u32)]) -> Vec<f64> {
    exponents
        .iter()
        .map(|&(a, b)| z.re.powi(a as i32) * z.im.powi(b as i32))
        .collect()
}

impl<'a> Chain<'a> {
    pub fn new(
        w: &'a WeightFunction,
        tau: &'a BaseMeasure,
        beta: f64,
        penalty: Option<Penalty<'a>>,
        points: Vec<Complex64>,
    ) -> Self {
        let (exponents, reference): (Vec<(u32, u32)>, Vec<f64>) = match &penalty {
            Some(p) => p.nbhd.reference().iter().skip(1).unzip(),
            None => (Vec::new(), Vec::new()),
        };
        let mut sums = vec![0.0; exponents.len()];
        for &z in &points {
            for (s, m) in sums.iter_mut().zip(monomials(z, &exponents)) {
                *s += m;
            }
        }
        Self {
            w,
            tau,
            rect: *tau.domain(),
            beta,
            penalty,
            exponents,
            reference,
            points,
            sums,
            scale: 0.1,
            proposed: 0,
            accepted: 0,
        }
    }

    /// Starting configuration drawn from tau^d, redrawn until finite.
    pub fn initial_points<R: Rng + ?Sized>(
        tau: &BaseMeasure,
        w: &WeightFunction,
        d: usize,
        rng: &mut R,
    ) -> Vec<Complex64> {
        loop {
            let pts: Vec<Complex64> = (0..d).map(|_| tau.sample(rng)).collect();
            if log_wvdm_points(&pts, w).is_finite() {
                return pts;
            }
        }
    }

    pub fn set_rho(&mut self, rho: f64) {
        if let Some(p) = &mut self.penalty {
            p.rho = rho;
        }
    }

    fn excess_from(&self, sums: &[f64]) -> f64 {
        let Some(p) = &self.penalty else { return 0.0 };
        let d = self.points.len() as f64;
        let eps = p.nbhd.epsilon();
        sums.iter()
            .zip(&self.reference)
            .map(|(s, r)| ((s / d - r).abs() - eps).max(0.0).powi(2))
            .sum()
    }

    /// Squared moment excess D of the current configuration.
    pub fn excess(&self) -> f64 {
        self.excess_from(&self.sums)
    }

    /// Whether every moment gap is strictly below epsilon.
    pub fn inside(&self) -> bool {
        let Some(p) = &self.penalty else { return true };
        let d = self.points.len() as f64;
        self.sums
            .iter()
            .zip(&self.reference)
            .all(|(s, r)| (s / d - r).abs() < p.nbhd.epsilon())
    }

    /// log|VDM^phi_d| of the current configuration.
    pub fn log_wvdm(&self) -> f64 {
        log_wvdm_points(&self.points, self.w)
    }

    fn local(&self, i: usize, z: Complex64) -> f64 {
        let field = if self.beta == 0.0 {
            0.0
        } else {
            self.beta * point_terms(&self.points, i, z, self.w)
        };
        field + self.tau.log_density(z)
    }

    /// One pass of single-point updates over all points in order.
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let interval = self.rect.is_interval();
        let (sx, sy) = (
            self.scale * self.rect.width(),
            self.scale * self.rect.height(),
        );
        for i in 0..self.points.len() {
            self.proposed += 1;
            let old = self.points[i];
            let nx: f64 = StandardNormal.sample(rng);
            let ny: f64 = if interval {
                0.0
            } else {
                StandardNormal.sample(rng)
            };
            let new = Complex64::new(old.re + sx * nx, old.im + sy * ny);
            let u: f64 = rng.random();
            if !self.rect.contains(new) {
                continue;
            }
            let mut delta = self.local(i, new) - self.local(i, old);
            let mut new_sums = None;
            if let Some(p) = &self.penalty {
                let mo = monomials(old, &self.exponents);
                let mn = monomials(new, &self.exponents);
                let sums: Vec<f64> = self
                    .sums
                    .iter()
                    .zip(mo.iter().zip(&mn))
                    .map(|(s, (a, b))| s - a + b)
                    .collect();
                delta -= p.rho * (self.excess_from(&sums) - self.excess());
                new_sums = Some(sums);
            }
            if delta.is_nan() || u.ln() >= delta {
                continue;
            }
            self.points[i] = new;
            if let Some(s) = new_sums {
                self.sums = s;
            }
            self.accepted += 1;
        }
    }

    pub fn reset_counters(&mut self) {
        self.proposed = 0;
        self.accepted = 0;
    }

    pub fn acceptance(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Mean, batch-means standard error and effective sample size.
pub(crate) struct StageStats {
    pub mean: f64,
    pub std_error: f64,
    pub ess: f64,
    pub acceptance: f64,
    pub n: usize,
}

pub(crate) fn batch_means(values: &[f64], batches: usize) -> (f64, f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let b = batches.clamp(2, n.max(2));
    let size = n / b;
    if size == 0 {
        return (mean, 0.0, n as f64);
    }
    let means: Vec<f64> = (0..b)
        .map(|k| values[k * size..(k + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / b as f64;
    let var_b = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (b - 1) as f64;
    let se = (var_b / b as f64).sqrt();
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n.max(2) - 1) as f64;
    let ess = if se > 0.0 {
        (var / (se * se)).min(n as f64)
    } else {
        n as f64
    };
    (mean, se, ess)
}

/// Burn-in with proposal adaptation towards `target` acceptance, then
/// `samples` measured sweeps with the proposal frozen.
pub(crate) fn run_stage<R, F>(
    chain: &mut Chain<'_>,
    burn_in: usize,
    samples: usize,
    batches: usize,
    target: f64,
    rng: &mut R,
    mut observe: F,
) -> StageStats
where
    R: Rng + ?Sized,
    F: FnMut(&Chain<'_>) -> f64,
{
    const WINDOW: usize = 20;
    let mut done = 0;
    while done < burn_in {
        chain.reset_counters();
        let steps = WINDOW.min(burn_in - done);
        for _ in 0..steps {
            chain.sweep(rng);
        }
        done += steps;
        let rate = chain.acceptance();
        chain.scale = (chain.scale * (1.5 * (rate - target)).exp()).clamp(1e-9, 2.0);
    }
    chain.reset_counters();
    let mut values = Vec::with_capacity(samples);
    for _ in 0..samples {
        chain.sweep(rng);
        values.push(observe(chain));
    }
    let (mean, std_error, ess) = batch_means(&values, batches);
    StageStats {
        mean,
        std_error,
        ess,
        acceptance: chain.acceptance(),
        n: samples,
    }
}
