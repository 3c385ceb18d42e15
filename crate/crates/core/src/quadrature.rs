//! Gauss–Legendre rules on [-1, 1], cached by order, with helpers for
//! intervals and composite panels.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;

type Rule = Arc<[(f64, f64)]>;

fn cache() -> &'static Mutex<HashMap<usize, Rule>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on [-1, 1],
/// sorted by node.
pub fn gauss_legendre(n: usize) -> Rule {
    let n = n.max(1);
    let mut guard = cache().lock().expect("quadrature cache poisoned");
    guard
        .entry(n)
        .or_insert_with(|| {
            let rule = GaussLegendre::new(NonZeroUsize::new(n).unwrap());
            let mut pairs: Vec<(f64, f64)> = rule.as_node_weight_pairs().to_vec();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            pairs.into()
        })
        .clone()
}

/// Nodes and weights mapped to [a, b].
pub fn rule_on(a: f64, b: f64, n: usize) -> Vec<(f64, f64)> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    gauss_legendre(n)
        .iter()
        .map(|&(x, w)| (mid + half * x, half * w))
        .collect()
}

pub fn integrate<F: FnMut(f64) -> f64>(a: f64, b: f64, n: usize, mut f: F) -> f64 {
    rule_on(a, b, n).into_iter().map(|(x, w)| w * f(x)).sum()
}

/// `panels` equal panels with an `n`-point rule on each.
pub fn integrate_composite<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    panels: usize,
    n: usize,
    mut f: F,
) -> f64 {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let base = gauss_legendre(n);
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        for &(x, w) in base.iter() {
            total += 0.5 * h * w * f(mid + 0.5 * h * x);
        }
    }
    total
}

/// Composite rule as explicit (node, weight) pairs.
pub fn composite_rule(a: f64, b: f64, panels: usize, n: usize) -> Vec<(f64, f64)> {
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * n);
    for p in 0..panels {
        let lo = a + h * p as f64;
        out.extend(rule_on(lo, lo + h, n));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let v = integrate(-1.0, 2.0, 4, |x| x.powi(7) - 3.0 * x * x);
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn composite_matches_single_panel_on_smooth_integrand() {
        let a = integrate_composite(0.0, 1.0, 8, 8, f64::exp);
        assert!((a - (1f64.exp() - 1.0)).abs() < 1e-14);
        let rule = composite_rule(0.0, 1.0, 3, 5);
        assert_eq!(rule.len(), 15);
        let s: f64 = rule.iter().map(|p| p.1).sum();
        assert!((s - 1.0).abs() < 1e-14);
    }
}
