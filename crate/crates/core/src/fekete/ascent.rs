//! Box-constrained ascent used by the Fekete solvers.

use num_complex::Complex64;

use crate::measures::Rectangle;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Maximizes a unimodal function on [a, b] by golden-section search.
/// Returns the best abscissa seen and its value.
pub(crate) fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut a, mut b) = (a, b);
    let mut c = b - GOLDEN * (b - a);
    let mut d = a + GOLDEN * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a) > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - GOLDEN * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + GOLDEN * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

pub(crate) struct AscentOutcome {
    pub points: Vec<Complex64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<f64>,
}

fn clamp_step(rect: &Rectangle, x: &[Complex64], g: &[f64], t: f64) -> Vec<Complex64> {
    x.iter()
        .enumerate()
        .map(|(i, z)| rect.clamp(Complex64::new(z.re + t * g[2 * i], z.im + t * g[2 * i + 1])))
        .collect()
}

/// Norm of the gradient with components that push against an active
/// bound removed.
fn projected_gradient_norm(rect: &Rectangle, x: &[Complex64], g: &[f64]) -> f64 {
    let mut s = 0.0;
    for (i, z) in x.iter().enumerate() {
        let gx = g[2 * i];
        let blocked_x = (z.re <= rect.x_min() && gx < 0.0) || (z.re >= rect.x_max() && gx > 0.0);
        if !blocked_x {
            s += gx * gx;
        }
        let gy = g[2 * i + 1];
        let blocked_y = (z.im <= rect.y_min() && gy < 0.0) || (z.im >= rect.y_max() && gy > 0.0);
        if !blocked_y {
            s += gy * gy;
        }
    }
    s.sqrt()
}

/// Projected gradient ascent with Barzilai–Borwein trial steps and Armijo
/// backtracking. Every accepted step increases the objective, so the trace
/// is nondecreasing. `eval` returns the value and the gradient in the
/// [x0, y0, x1, y1, ...] layout, or `None` at a singular point.
pub(crate) fn projected_ascent<F>(
    rect: &Rectangle,
    start: Vec<Complex64>,
    eval: F,
    max_iterations: usize,
    tolerance: f64,
) -> AscentOutcome
where
    F: Fn(&[Complex64]) -> Option<(f64, Vec<f64>)>,
{
    let mut x = start;
    let Some((mut f, mut g)) = eval(&x) else {
        return AscentOutcome {
            value: f64::NEG_INFINITY,
            points: x,
            iterations: 0,
            converged: false,
            trace: Vec::new(),
        };
    };
    let mut trace = vec![f];
    let mut step = {
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            1e-3 * rect.width().max(rect.height()) / norm
        } else {
            1.0
        }
    };
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        if projected_gradient_norm(rect, &x, &g) < tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let mut t = step;
        let mut accepted = None;
        for _ in 0..60 {
            let trial = clamp_step(rect, &x, &g, t);
            let rise: f64 = trial
                .iter()
                .zip(&x)
                .enumerate()
                .map(|(i, (a, b))| g[2 * i] * (a.re - b.re) + g[2 * i + 1] * (a.im - b.im))
                .sum();
            if rise <= 0.0 {
                break;
            }
            if let Some((ft, gt)) = eval(&trial) {
                if ft.is_finite() && ft >= f + 1e-4 * rise {
                    accepted = Some((trial, ft, gt));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((trial, ft, gt)) = accepted else {
            // no ascent left at working precision
            converged = true;
            break;
        };
        let mut ss = 0.0;
        let mut sy = 0.0;
        for (i, (a, b)) in trial.iter().zip(&x).enumerate() {
            let s = [a.re - b.re, a.im - b.im];
            let y = [gt[2 * i] - g[2 * i], gt[2 * i + 1] - g[2 * i + 1]];
            ss += s[0] * s[0] + s[1] * s[1];
            sy += s[0] * y[0] + s[1] * y[1];
        }
        step = if sy < 0.0 {
            (ss / -sy).clamp(1e-14, 1e6)
        } else {
            (2.0 * t).min(1e6)
        };
        x = trial;
        f = ft;
        g = gt;
        trace.push(f);
    }
    AscentOutcome {
        points: x,
        value: f,
        iterations,
        converged,
        trace,
    }
}
