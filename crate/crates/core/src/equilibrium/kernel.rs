//! Mean of log|s - t| over pairs of uniformly filled cells.
//!
//! For a piecewise-constant density the double log integral splits into
//! cell-pair means, so these values make the discrete energy exact for
//! that density. Interval cells use the closed form; rectangular cells
//! integrate the difference density with the log singularity moved to a
//! panel corner and removed by a Duffy map.

use rayon::prelude::*;

use crate::measures::{CellShape, Grid};
use crate::quadrature;

// G'' = log|u|
fn g2(u: f64) -> f64 {
    if u == 0.0 {
        0.0
    } else {
        0.5 * u * u * u.abs().ln() - 0.75 * u * u
    }
}

/// Mean of log|s - t| for s uniform on [-h/2, h/2] and t uniform on
/// [dx - h/2, dx + h/2]. Diagonal value: log h - 3/2.
pub fn interval_cell_mean_log(dx: f64, h: f64) -> f64 {
    let x = dx.abs();
    if x >= 6.0 * h {
        // second central difference of g2 as a series in (h/x)^2
        // term k: -r^k / (k (2k+1) (2k+2))
        let r = (h / x).powi(2);
        let mut sum = 0.0;
        let mut rk = 1.0;
        for k in 1..=8 {
            rk *= r;
            let k = k as f64;
            sum += rk / (k * (2.0 * k + 1.0) * (2.0 * k + 2.0));
        }
        x.ln() - sum
    } else {
        (g2(x + h) - 2.0 * g2(x) + g2(x - h)) / (h * h)
    }
}

const PANEL_POINTS: usize = 12;
const DUFFY_POINTS: usize = 16;

/// Mean of log|s - t| for s, t uniform on two cells of the given shape
/// whose centers differ by (dx, dy).
pub fn cell_mean_log(dx: f64, dy: f64, cell: CellShape) -> f64 {
    if cell.is_interval() {
        if dy == 0.0 {
            return interval_cell_mean_log(dx, cell.width);
        }
        // parallel segments at different heights: smooth integrand
        let h = cell.width;
        let tri = |u: f64| (h - u.abs()) / (h * h);
        return [(-h, 0.0), (0.0, h)]
            .iter()
            .map(|&(a, b)| {
                quadrature::integrate(a, b, PANEL_POINTS, |u| {
                    tri(u) * 0.5 * ((dx + u).powi(2) + dy * dy).ln()
                })
            })
            .sum();
    }
    let (hx, hy) = (cell.width, cell.height);
    // U = s - t has density tri_x(ux) tri_y(uy); integrate log|(dx,dy) + U|.
    let breaks = |h: f64, shift: f64| {
        let mut b = vec![-h, 0.0, h];
        if -shift > -h && -shift < h {
            b.push(-shift);
        }
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    };
    let bx = breaks(hx, dx);
    let by = breaks(hy, dy);
    let sing = (-dx, -dy);
    let f = |ux: f64, uy: f64| {
        let w = (hx - ux.abs()) * (hy - uy.abs()) / (hx * hx * hy * hy);
        let r2 = (dx + ux).powi(2) + (dy + uy).powi(2);
        if r2 == 0.0 {
            0.0
        } else {
            w * 0.5 * r2.ln()
        }
    };
    let mut total = 0.0;
    for xs in bx.windows(2) {
        for ys in by.windows(2) {
            let corners = [
                (xs[0], ys[0]),
                (xs[1], ys[0]),
                (xs[1], ys[1]),
                (xs[0], ys[1]),
            ];
            match corners.iter().position(|&c| c == sing) {
                Some(k) => {
                    let p = corners[k];
                    let a = corners[(k + 1) % 4];
                    let c = corners[(k + 2) % 4];
                    let b = corners[(k + 3) % 4];
                    total += duffy_triangle(&f, p, a, c) + duffy_triangle(&f, p, c, b);
                }
                None => {
                    let rx = quadrature::rule_on(xs[0], xs[1], PANEL_POINTS);
                    let ry = quadrature::rule_on(ys[0], ys[1], PANEL_POINTS);
                    for &(x, wx) in &rx {
                        for &(y, wy) in &ry {
                            total += wx * wy * f(x, y);
                        }
                    }
                }
            }
        }
    }
    total
}

// Triangle (p, a, b) with a log singularity at p: x = p + s(a - p) + s t (b - a),
// then s = v^3 to smooth the s log s behaviour.
fn duffy_triangle<F: Fn(f64, f64) -> f64>(
    f: &F,
    p: (f64, f64),
    a: (f64, f64),
    b: (f64, f64),
) -> f64 {
    let e1 = (a.0 - p.0, a.1 - p.1);
    let e2 = (b.0 - a.0, b.1 - a.1);
    let det = (e1.0 * e2.1 - e1.1 * e2.0).abs();
    let rule = quadrature::rule_on(0.0, 1.0, DUFFY_POINTS);
    let mut total = 0.0;
    for &(v, wv) in &rule {
        let s = v * v * v;
        for &(t, wt) in &rule {
            let x = p.0 + s * (e1.0 + t * e2.0);
            let y = p.1 + s * (e1.1 + t * e2.1);
            total += wv * wt * f(x, y) * s * det * 3.0 * v * v;
        }
    }
    total
}

/// Cell-pair kernel of a uniform grid, stored by index offset.
#[derive(Debug, Clone)]
pub struct GridKernel {
    nx: usize,
    ny: usize,
    table: Vec<f64>,
}

impl GridKernel {
    pub fn new(grid: &Grid) -> Self {
        let (nx, ny) = (grid.nx(), grid.ny());
        let cell = grid.cell();
        let table = (0..nx * ny)
            .into_par_iter()
            .map(|o| {
                let (ox, oy) = (o % nx, o / nx);
                cell_mean_log(ox as f64 * cell.width, oy as f64 * cell.height, cell)
            })
            .collect();
        Self { nx, ny, table }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (ix, iy) = ((i % self.nx) as isize, (i / self.nx) as isize);
        let (jx, jy) = ((j % self.nx) as isize, (j / self.nx) as isize);
        self.table[(ix - jx).unsigned_abs() + self.nx * (iy - jy).unsigned_abs()]
    }

    /// K m. Rows are independent (computed in parallel for large grids)
    /// and each row sums in a fixed order.
    pub fn apply(&self, m: &[f64]) -> Vec<f64> {
        let n = self.len();
        let row = |i: usize| {
            let (ix, iy) = (i % self.nx, i / self.nx);
            let mut s = 0.0;
            for jy in 0..self.ny {
                let base = self.nx * iy.abs_diff(jy);
                let mrow = &m[jy * self.nx..(jy + 1) * self.nx];
                // left part reads the table backwards, right part forwards
                for (jx, &mj) in mrow[..ix].iter().enumerate() {
                    s += self.table[base + ix - jx] * mj;
                }
                for (off, &mj) in mrow[ix..].iter().enumerate() {
                    s += self.table[base + off] * mj;
                }
            }
            s
        };
        if n >= 1024 {
            (0..n).into_par_iter().map(row).collect()
        } else {
            (0..n).map(row).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_diagonal_is_log_h_minus_three_halves() {
        for h in [1.0, 0.5, 1e-3] {
            assert!((interval_cell_mean_log(0.0, h) - (h.ln() - 1.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn interval_adjacent_cells_closed_form() {
        // mean over adjacent unit cells = 2 log 2 - 3/2
        let v = interval_cell_mean_log(1.0, 1.0);
        assert!((v - (2.0 * 2f64.ln() - 1.5)).abs() < 1e-13);
    }

    #[test]
    fn interval_series_matches_quadrature_far_away() {
        let h = 0.01;
        for k in [5.0, 6.0, 7.0, 40.0, 300.0] {
            let dx = k * h;
            // independent oracle: tensor Gauss-Legendre on the smooth integrand
            let rule = quadrature::rule_on(-0.5 * h, 0.5 * h, 20);
            let mut q = 0.0;
            for &(s, ws) in &rule {
                for &(t, wt) in &rule {
                    q += ws * wt * (dx + t - s).abs().ln();
                }
            }
            q /= h * h;
            let v = interval_cell_mean_log(dx, h);
            assert!((v - q).abs() < 1e-11, "k = {k}: {v} vs {q}");
        }
    }

    #[test]
    fn square_cell_constants_against_reference_quadrature() {
        // reference values from adaptive tanh-sinh quadrature at 20 digits
        let unit = CellShape {
            width: 1.0,
            height: 1.0,
        };
        let self_unit = cell_mean_log(0.0, 0.0, unit);
        assert!(
            (self_unit - (-0.805_086_721_950_087)).abs() < 1e-9,
            "{self_unit}"
        );
        assert!((cell_mean_log(1.0, 0.0, unit) - 0.006_528_456_354_836_82).abs() < 1e-9);
        let wide = CellShape {
            width: 2.0,
            height: 1.0,
        };
        assert!((cell_mean_log(0.0, 0.0, wide) - (-0.798_558_265_595_250_3 / 2.0)).abs() < 1e-9);
        // scaling: mean log over h-cells = log h + unit value
        let small = CellShape {
            width: 0.1,
            height: 0.1,
        };
        let v = cell_mean_log(0.0, 0.0, small);
        assert!((v - (0.1f64.ln() - 0.805_086_721_950_087)).abs() < 1e-9);
        // symmetric in the offset
        let a = cell_mean_log(0.7, -0.3, unit);
        let b = cell_mean_log(-0.7, 0.3, unit);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn far_square_cells_approach_log_distance() {
        let unit = CellShape {
            width: 1.0,
            height: 1.0,
        };
        let v = cell_mean_log(30.0, 40.0, unit);
        assert!((v - 50f64.ln()).abs() < 1e-6);
    }
}
