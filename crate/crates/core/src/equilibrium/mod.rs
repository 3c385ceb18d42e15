//! Free entropy, weighted energy, the discretized weighted equilibrium
//! problem, and the large-deviation rate functional.
//!
//! A discretized [`GridMeasure`] stands for the density that spreads each
//! mass uniformly over its cell, so its free entropy is the exact double
//! log integral of that density: sum_ij m_i m_j K_ij with K_ij the mean of
//! log|s - t| over cells i and j. The diagonal K_ii = log h + c0 is the
//! self-energy correction (c0 = -3/2 for interval cells). Literal (atomic)
//! measures have free entropy -inf.

pub mod kernel;

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{CellShape, Configuration, Grid, GridMeasure, Rectangle};
use crate::vdm::WeightFunction;
pub use kernel::{cell_mean_log, interval_cell_mean_log, GridKernel};

/// Energies of a measure. `weighted_energy = -sigma + external_term`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    /// Free entropy: int int log|z - t| dnu dnu.
    pub sigma: f64,
    /// I_w(nu) = -sigma + 2 int Q dnu.
    pub weighted_energy: f64,
    /// 2 int Q dnu.
    pub external_term: f64,
    /// -I_w of the equilibrium measure, filled in for solver output.
    pub log_delta_w: Option<f64>,
}

impl EnergyReport {
    fn new(sigma: f64, external_term: f64) -> Self {
        Self {
            sigma,
            weighted_energy: -sigma + external_term,
            external_term,
            log_delta_w: None,
        }
    }
}

fn lattice_offsets(nodes: &[Complex64], cell: CellShape) -> Option<Vec<(i64, i64)>> {
    let origin = nodes[0];
    nodes
        .iter()
        .map(|z| {
            let fx = (z.re - origin.re) / cell.width;
            let fy = if cell.height > 0.0 {
                (z.im - origin.im) / cell.height
            } else if z.im == origin.im {
                0.0
            } else {
                return None;
            };
            let (rx, ry) = (fx.round(), fy.round());
            ((fx - rx).abs() < 1e-6 && (fy - ry).abs() < 1e-6).then_some((rx as i64, ry as i64))
        })
        .collect()
}

/// Free entropy Sigma(m) = int int log|z - t| dm dm; see the module docs
/// for how discretized and literal measures differ.
pub fn free_entropy(m: &GridMeasure) -> f64 {
    let Some(cell) = m.cells() else {
        return f64::NEG_INFINITY;
    };
    let support: Vec<(Complex64, f64)> = m
        .nodes()
        .iter()
        .zip(m.masses())
        .filter(|(_, &w)| w > 0.0)
        .map(|(&z, &w)| (z, w))
        .collect();
    let nodes: Vec<Complex64> = support.iter().map(|p| p.0).collect();
    let masses: Vec<f64> = support.iter().map(|p| p.1).collect();
    let n = nodes.len();
    match lattice_offsets(&nodes, cell) {
        Some(offsets) => {
            let mut memo: HashMap<(u64, u64), f64> = HashMap::new();
            let mut total = 0.0;
            for i in 0..n {
                let mut row = 0.0;
                for j in 0..n {
                    let key = (
                        offsets[i].0.abs_diff(offsets[j].0),
                        offsets[i].1.abs_diff(offsets[j].1),
                    );
                    let k = *memo.entry(key).or_insert_with(|| {
                        cell_mean_log(key.0 as f64 * cell.width, key.1 as f64 * cell.height, cell)
                    });
                    row += k * masses[j];
                }
                total += masses[i] * row;
            }
            total
        }
        None => {
            let mut total = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let dz = nodes[j] - nodes[i];
                    total += masses[i] * masses[j] * cell_mean_log(dz.re, dz.im, cell);
                }
            }
            total
        }
    }
}

/// Weighted energy report of `m` for weight `w` (nodes must lie in the
/// weight's domain).
pub fn weighted_energy(m: &GridMeasure, w: &WeightFunction) -> Result<EnergyReport> {
    Configuration::new(m.nodes().to_vec())?.check_in(w.domain())?;
    let external = 2.0
        * m.nodes()
            .iter()
            .zip(m.masses())
            .map(|(&z, &mass)| mass * w.q(z))
            .sum::<f64>();
    Ok(EnergyReport::new(free_entropy(m), external))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EquilibriumOptions {
    pub max_iterations: usize,
    /// Stop when the projected-gradient norm drops below this.
    pub tolerance: f64,
    /// Starting masses (normalized and projected); uniform when absent.
    #[serde(default)]
    pub initial: Option<Vec<f64>>,
}

impl Default for EquilibriumOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50_000,
            tolerance: 1e-8,
            initial: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumSolution {
    pub measure: GridMeasure,
    pub energy: EnergyReport,
    pub converged: bool,
    pub iterations: usize,
    pub projected_gradient_norm: f64,
    /// Objective after every iteration; nonincreasing.
    #[serde(skip)]
    pub objective_trace: Vec<f64>,
    /// Smallest eigenvalue of the energy form on zero-sum mass vectors,
    /// computed for grids of at most 1024 cells. A negative value means
    /// the discretized problem is not convex on this grid.
    pub min_zero_sum_eigenvalue: Option<f64>,
}

/// Euclidean projection onto the probability simplex (sort-based).
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumulative += ui;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn center(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

fn negate(v: Vec<f64>) -> Vec<f64> {
    v.into_iter().map(|x| -x).collect()
}

/// Largest eigenvalue of A = -K restricted to zero-sum vectors, by power
/// iteration from a fixed start.
fn zero_sum_largest(kernel: &GridKernel, iterations: usize) -> f64 {
    let n = kernel.len();
    let mut v: Vec<f64> = (0..n)
        .map(|i| ((i as f64 + 0.5) * 2.399_963).sin())
        .collect();
    center(&mut v);
    let mut lambda = 0.0;
    for _ in 0..iterations {
        let norm = dot(&v, &v).sqrt();
        if norm == 0.0 {
            break;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        let mut av = negate(kernel.apply(&v));
        center(&mut av);
        lambda = dot(&v, &av);
        v = av;
    }
    lambda
}

/// Largest size for which the dense zero-sum spectrum and the active-set
/// polish are attempted.
const DENSE_LIMIT: usize = 1024;
const POLISH_LIMIT: usize = 2048;

/// Smallest eigenvalue of A = -K on zero-sum vectors (dense, small grids).
fn zero_sum_smallest(kernel: &GridKernel) -> Option<f64> {
    let n = kernel.len();
    if !(2..=DENSE_LIMIT).contains(&n) {
        return None;
    }
    // P A P with P the centering projector; the constant direction maps to 0
    let mut a = nalgebra::DMatrix::from_fn(n, n, |i, j| -kernel.entry(i, j));
    let row_means: Vec<f64> = (0..n).map(|i| a.row(i).sum() / n as f64).collect();
    let total = row_means.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] += total - row_means[i] - row_means[j];
        }
    }
    let eig = nalgebra::SymmetricEigen::new(a);
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    // drop the eigenvalue closest to zero belonging to the constant vector
    let ones = nalgebra::DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let constant = (0..n)
        .max_by(|&p, &q| {
            let cp = eig.eigenvectors.column(p).dot(&ones).abs();
            let cq = eig.eigenvectors.column(q).dot(&ones).abs();
            cp.total_cmp(&cq)
        })
        .map(|k| eig.eigenvalues[k]);
    let mut skipped = false;
    values.into_iter().find(|&v| {
        if !skipped && Some(v) == constant {
            skipped = true;
            false
        } else {
            true
        }
    })
}

struct Problem<'a> {
    kernel: &'a GridKernel,
    q: Vec<f64>,
    lipschitz: f64,
}

impl Problem<'_> {
    fn apply_a(&self, m: &[f64]) -> Vec<f64> {
        negate(self.kernel.apply(m))
    }

    // F(m) = m'Am + 2q'm
    fn objective(&self, m: &[f64], am: &[f64]) -> f64 {
        dot(m, am) + 2.0 * dot(&self.q, m)
    }

    fn step_from(&self, y: &[f64], ay: &[f64]) -> Vec<f64> {
        let moved: Vec<f64> = y
            .iter()
            .zip(ay)
            .zip(&self.q)
            .map(|((yi, ai), qi)| yi - 2.0 * (ai + qi) / self.lipschitz)
            .collect();
        project_simplex(&moved)
    }

    fn gradient_mapping_norm(&self, x: &[f64], ax: &[f64]) -> f64 {
        let p = self.step_from(x, ax);
        self.lipschitz
            * x.iter()
                .zip(&p)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt()
    }

    /// Primal active-set method started from a feasible x: solve the KKT
    /// system on the support, step back to feasibility when a mass goes
    /// negative, add the most violating inactive cell otherwise.
    fn active_set_polish(&self, x: &[f64]) -> Option<Vec<f64>> {
        let n = x.len();
        let mut x = x.to_vec();
        let mut active: Vec<bool> = x.iter().map(|&v| v > 0.0).collect();
        for _ in 0..4 * n.max(16) {
            let support: Vec<usize> = (0..n).filter(|&i| active[i]).collect();
            let s = support.len();
            if s == 0 || s > POLISH_LIMIT {
                return None;
            }
            let mut lhs = nalgebra::DMatrix::zeros(s + 1, s + 1);
            let mut rhs = nalgebra::DVector::zeros(s + 1);
            for (r, &i) in support.iter().enumerate() {
                for (c, &j) in support.iter().enumerate() {
                    lhs[(r, c)] = -self.kernel.entry(i, j);
                }
                lhs[(r, s)] = -1.0;
                lhs[(s, r)] = 1.0;
                rhs[r] = -self.q[i];
            }
            rhs[s] = 1.0;
            let sol = lhs.lu().solve(&rhs)?;
            let target: Vec<f64> = support.iter().enumerate().map(|(r, _)| sol[r]).collect();
            let level = sol[s];
            if target.iter().any(|&v| v < 0.0) {
                let mut alpha = 1.0f64;
                for (r, &i) in support.iter().enumerate() {
                    if target[r] < 0.0 {
                        alpha = alpha.min(x[i] / (x[i] - target[r]));
                    }
                }
                for (r, &i) in support.iter().enumerate() {
                    x[i] += alpha * (target[r] - x[i]);
                    if x[i] <= 1e-300 || (target[r] < 0.0 && x[i] <= 1e-15) {
                        x[i] = 0.0;
                        active[i] = false;
                    }
                }
                continue;
            }
            for (r, &i) in support.iter().enumerate() {
                x[i] = target[r];
            }
            let ax = self.apply_a(&x);
            let worst = (0..n)
                .filter(|&j| !active[j])
                .map(|j| (j, ax[j] + self.q[j] - level))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            match worst {
                Some((j, r)) if r < -1e-13 => active[j] = true,
                _ => {
                    let total: f64 = x.iter().sum();
                    x.iter_mut().for_each(|v| *v /= total);
                    return Some(x);
                }
            }
        }
        None
    }
}

/// Minimizes the discretized weighted energy over the probability simplex
/// on a uniform grid of about `n` cells.
///
/// Accelerated projected gradient with function-value restarts runs until
/// the gradient mapping is small, then a primal active-set solve of the
/// KKT system finishes the job. A polished point is accepted only if it
/// lowers the objective, so the recorded trace is nonincreasing.
pub fn solve_equilibrium(
    rect: &Rectangle,
    w: &WeightFunction,
    n: usize,
    opts: &EquilibriumOptions,
) -> Result<EquilibriumSolution> {
    if n < 16 {
        return Err(Error::InvalidArgument(format!(
            "grid size must be >= 16, got {n}"
        )));
    }
    let grid = Grid::new(*rect, n)?;
    let kernel = GridKernel::new(&grid);
    let nodes = grid.nodes();
    Configuration::new(nodes.clone())?.check_in(w.domain())?;
    let size = grid.len();
    let largest = zero_sum_largest(&kernel, 300);
    let problem = Problem {
        kernel: &kernel,
        q: nodes.iter().map(|&z| w.q(z)).collect(),
        lipschitz: 2.0 * largest * 1.05,
    };

    let mut x = match &opts.initial {
        Some(init) if init.len() == size => project_simplex(init),
        Some(init) => {
            return Err(Error::InvalidArgument(format!(
                "initial masses have length {} but the grid has {size} cells",
                init.len()
            )))
        }
        None => vec![1.0 / size as f64; size],
    };
    let mut ax = problem.apply_a(&x);
    let mut fx = problem.objective(&x, &ax);
    let mut y = x.clone();
    let mut ay = ax.clone();
    let mut t = 1.0f64;
    let mut trace = vec![fx];
    let mut pg_norm = problem.gradient_mapping_norm(&x, &ax);
    let mut iterations = 0;
    let mut next_polish = 1e-3f64;

    while iterations < opts.max_iterations && pg_norm >= opts.tolerance {
        iterations += 1;
        let z = problem.step_from(&y, &ay);
        let az = problem.apply_a(&z);
        let fz = problem.objective(&z, &az);
        if fz <= fx {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            y = z
                .iter()
                .zip(&x)
                .map(|(zi, xi)| zi + beta * (zi - xi))
                .collect();
            ay = az
                .iter()
                .zip(&ax)
                .map(|(a, b)| a + beta * (a - b))
                .collect();
            x = z;
            ax = az;
            fx = fz;
            t = t_next;
        } else {
            // restart from x with a plain projected-gradient step
            t = 1.0;
            let z = problem.step_from(&x, &ax);
            let az = problem.apply_a(&z);
            let fz = problem.objective(&z, &az);
            if fz <= fx {
                x = z;
                ax = az;
                fx = fz;
            }
            y = x.clone();
            ay = ax.clone();
        }
        trace.push(fx);
        if iterations % 10 != 0 && iterations != opts.max_iterations {
            continue;
        }
        pg_norm = problem.gradient_mapping_norm(&x, &ax);
        if pg_norm < next_polish && pg_norm >= opts.tolerance {
            next_polish = pg_norm / 10.0;
            if let Some(p) = problem.active_set_polish(&x) {
                let ap = problem.apply_a(&p);
                let fp = problem.objective(&p, &ap);
                if fp <= fx {
                    x = p;
                    ax = ap;
                    fx = fp;
                    y = x.clone();
                    ay = ax.clone();
                    t = 1.0;
                    trace.push(fx);
                    pg_norm = problem.gradient_mapping_norm(&x, &ax);
                }
            }
        }
    }
    let converged = pg_norm < opts.tolerance;

    let measure = GridMeasure::from_grid(&grid, x)?.with_label("equilibrium");
    let mut energy = weighted_energy(&measure, w)?;
    energy.log_delta_w = Some(-energy.weighted_energy);
    Ok(EquilibriumSolution {
        measure,
        energy,
        converged,
        iterations,
        projected_gradient_norm: pg_norm,
        objective_trace: trace,
        min_zero_sum_eigenvalue: zero_sum_smallest(&kernel),
    })
}

type CacheMap = HashMap<String, Arc<EquilibriumSolution>>;

fn cache() -> &'static RwLock<CacheMap> {
    static CACHE: OnceLock<RwLock<CacheMap>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Equilibrium for (H, w, N) computed once per process with default
/// options and shared afterwards.
pub fn cached_equilibrium(
    rect: &Rectangle,
    w: &WeightFunction,
    n: usize,
) -> Result<Arc<EquilibriumSolution>> {
    let key = format!("{rect}|{}|{n}", w.cache_key());
    if let Some(hit) = cache()
        .read()
        .expect("equilibrium cache poisoned")
        .get(&key)
    {
        return Ok(hit.clone());
    }
    let solved = Arc::new(solve_equilibrium(
        rect,
        w,
        n,
        &EquilibriumOptions::default(),
    )?);
    let mut guard = cache().write().expect("equilibrium cache poisoned");
    Ok(guard.entry(key).or_insert(solved).clone())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateValue {
    /// I_phi(m) - I_phi(mu_eq).
    pub value: f64,
    pub energy: f64,
    pub equilibrium_energy: f64,
    pub equilibrium_converged: bool,
}

/// Large-deviation rate I(m) = I_phi(m) - I_phi(mu_eq(H, phi)), with the
/// equilibrium computed on an N-cell grid and cached.
pub fn rate_functional(
    m: &GridMeasure,
    phi: &WeightFunction,
    rect: &Rectangle,
    n: usize,
) -> Result<RateValue> {
    let eq = cached_equilibrium(rect, phi, n)?;
    let energy = weighted_energy(m, phi)?.weighted_energy;
    let equilibrium_energy = eq.energy.weighted_energy;
    Ok(RateValue {
        value: energy - equilibrium_energy,
        energy,
        equilibrium_energy,
        equilibrium_converged: eq.converged,
    })
}
