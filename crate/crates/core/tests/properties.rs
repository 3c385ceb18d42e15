//! Property tests for the invariants each module promises.

use loggas::equilibrium::{solve_equilibrium, weighted_energy, EquilibriumOptions};
use loggas::fekete::{constrained_sup_w, solve_fekete, FeketeOptions, PenaltyOptions};
use loggas::measures::{empirical, Grid, GridMeasure, MomentNeighborhood, Moments, Rectangle};
use loggas::montecarlo::{log_j, log_prob, log_z, BaseMeasure, ChainOptions, Method};
use loggas::vdm::{grad_log_wvdm, log_vdm, log_wvdm, Table, WeightFunction};
use loggas::{Complex64, Configuration};
use proptest::prelude::*;
use proptest::test_runner::Config;

/// Cases per property; no regression files next to integration tests.
fn cases(n: u32) -> Config {
    Config {
        failure_persistence: None,
        ..Config::with_cases(n)
    }
}

fn iv() -> Rectangle {
    Rectangle::interval(-1.0, 1.0).unwrap()
}

fn square() -> Rectangle {
    Rectangle::new(-1.0, 1.0, -0.5, 0.5).unwrap()
}

fn points_in(rect: Rectangle, d: std::ops::Range<usize>) -> impl Strategy<Value = Vec<Complex64>> {
    let (x0, x1, y0, y1) = (rect.x_min(), rect.x_max(), rect.y_min(), rect.y_max());
    prop::collection::vec((x0..=x1, y0..=y1.max(y0 + f64::EPSILON)), d).prop_map(move |v| {
        v.into_iter()
            .map(|(x, y)| Complex64::new(x, if y1 > y0 { y } else { y0 }))
            .collect()
    })
}

fn distinct(pts: &[Complex64]) -> bool {
    pts.iter()
        .enumerate()
        .all(|(i, a)| pts[i + 1..].iter().all(|b| (a - b).norm() > 1e-6))
}

fn weights(rect: Rectangle) -> Vec<WeightFunction> {
    vec![
        WeightFunction::unit(rect),
        WeightFunction::exp_poly(vec![(2, 0, 1.0)], rect).unwrap(),
        WeightFunction::exp_poly(vec![(1, 0, -0.5), (0, 2, 0.3), (1, 1, 0.2)], rect).unwrap(),
        WeightFunction::poly(vec![(0, 0, 1.0), (2, 0, 0.25)], rect).unwrap(),
    ]
}

/// Direct power sum (1/d) sum x^a y^b.
fn power_sum(pts: &[Complex64], a: u32, b: u32) -> f64 {
    pts.iter()
        .map(|z| z.re.powi(a as i32) * z.im.powi(b as i32))
        .sum::<f64>()
        / pts.len() as f64
}

fn arcsine_nbhd(k: u32, eps: f64) -> MomentNeighborhood {
    MomentNeighborhood::around(&GridMeasure::arcsine(&iv(), 256).unwrap(), k, eps).unwrap()
}

// measures

proptest! {
    #![proptest_config(cases(256))]

    #[test]
    fn neighborhoods_nest(pts in points_in(square(), 2..12), k in 0u32..5, extra in 0u32..3, eps in 0.01f64..1.0, shrink in 0.1f64..=1.0) {
        let mu = GridMeasure::arcsine(&iv(), 128).unwrap();
        let wide = MomentNeighborhood::around(&mu, k, eps).unwrap();
        let narrow = MomentNeighborhood::around(&mu, k + extra, eps * shrink).unwrap();
        if narrow.contains_points(&pts) {
            prop_assert!(wide.contains_points(&pts));
        }
        let m = empirical(&Configuration::new(pts).unwrap());
        if narrow.contains(&m) {
            prop_assert!(wide.contains(&m));
        }
    }

    #[test]
    fn polynomial_integrals_move_by_at_most_coefficient_sum(
        pts in points_in(iv(), 2..20),
        coeffs in prop::collection::vec(-2.0f64..2.0, 5),
    ) {
        // f(x) = sum c_j x^j, degree <= k = 4
        let mu = GridMeasure::arcsine(&iv(), 256).unwrap();
        let ref_m = mu.moments(4);
        let m = Moments::of_points(&pts, 4);
        let gap = (0..5u32)
            .map(|j| coeffs[j as usize] * (m.get(j, 0).unwrap() - ref_m.get(j, 0).unwrap()))
            .sum::<f64>()
            .abs();
        let c: f64 = coeffs.iter().map(|c| c.abs()).sum();
        // smallest eps with pts in G(mu, 4, eps)
        let eps = MomentNeighborhood::around(&mu, 4, 1.0).unwrap().worst_gap(&m).1;
        prop_assert!(gap <= c * eps * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn neighborhood_triangle(pts in points_in(iv(), 2..16), eps in 0.05f64..0.5, frac in 0.05f64..0.95) {
        let mu = GridMeasure::arcsine(&iv(), 256).unwrap();
        let k = 3;
        let outer = MomentNeighborhood::around(&mu, k, eps).unwrap();
        // nu strictly inside with slack eta
        let nu = GridMeasure::arcsine(&Rectangle::interval(-0.95, 0.95).unwrap(), 256).unwrap();
        let worst = outer.worst_gap(&nu.moments(k)).1;
        prop_assume!(worst < eps);
        let eta = frac * (eps - worst);
        let inner = MomentNeighborhood::around(&nu, k, eta).unwrap();
        if inner.contains_points(&pts) {
            prop_assert!(outer.contains_points(&pts));
        }
    }

    #[test]
    fn empirical_masses_and_moments(pts in points_in(square(), 1..40), dup in 0usize..3) {
        let mut pts = pts;
        for i in 0..dup.min(pts.len() - 1) {
            pts.push(pts[i]);
        }
        let m = empirical(&Configuration::new(pts.clone()).unwrap());
        prop_assert!((m.masses().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(m.masses().iter().all(|&x| x > 0.0));
        let mo = m.moments(4);
        for ((a, b), v) in mo.iter() {
            prop_assert!((v - power_sum(&pts, a, b)).abs() <= 1e-12);
        }
    }

    #[test]
    fn interval_y_moments_vanish(pts in points_in(iv(), 1..20)) {
        let mo = Moments::of_points(&pts, 5);
        for ((_, b), v) in mo.iter() {
            if b > 0 {
                prop_assert_eq!(v, 0.0);
            }
        }
    }

    #[test]
    fn rectangle_validation(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, e in -5.0f64..5.0) {
        let r = Rectangle::new(a, b, c, e);
        prop_assert_eq!(r.is_ok(), a < b && c <= e);
        if let Ok(r) = r {
            prop_assert!(r.contains(Complex64::new(a, c)) && r.contains(Complex64::new(b, e)));
            prop_assert!(!r.contains(Complex64::new(b + 1e-9, c)));
        }
    }

    #[test]
    fn grid_measure_json_and_csv_round_trip(masses in prop::collection::vec(0.0f64..1.0, 16..40)) {
        prop_assume!(masses.iter().sum::<f64>() > 1e-3);
        let grid = Grid::new(iv(), masses.len()).unwrap();
        let m = GridMeasure::from_grid(&grid, masses).unwrap().with_label("p");
        let back: GridMeasure = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        prop_assert_eq!(&back, &m);
        let mut buf = Vec::new();
        m.write_csv(&mut buf, &["note".to_string()]).unwrap();
        let read = GridMeasure::read_csv(buf.as_slice()).unwrap();
        for (a, b) in read.masses().iter().zip(m.masses()) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
        prop_assert_eq!(read.nodes(), m.nodes());
    }

    #[test]
    fn neighborhood_json_round_trip(k in 0u32..6, eps in 1e-4f64..2.0) {
        let n = arcsine_nbhd(k, eps);
        let back: MomentNeighborhood = serde_json::from_str(&serde_json::to_string(&n).unwrap()).unwrap();
        prop_assert_eq!(back, n);
    }
}

// vdm

proptest! {
    #![proptest_config(cases(256))]

    #[test]
    fn vandermonde_is_permutation_symmetric(pts in points_in(square(), 2..12), seed in any::<u64>()) {
        prop_assume!(distinct(&pts));
        let mut shuffled = pts.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            shuffled.swap(i, (seed.wrapping_mul(6364136223846793005).wrapping_add(i as u64) % (i as u64 + 1)) as usize);
        }
        let (a, b) = (Configuration::new(pts).unwrap(), Configuration::new(shuffled).unwrap());
        prop_assert!((log_vdm(&a).unwrap() - log_vdm(&b).unwrap()).abs() <= 1e-12);
        for w in weights(square()) {
            prop_assert!((log_wvdm(&a, &w).unwrap() - log_wvdm(&b, &w).unwrap()).abs() <= 1e-12);
        }
    }

    #[test]
    fn weight_factorization(pts in points_in(square(), 2..12)) {
        prop_assume!(distinct(&pts));
        let c = Configuration::new(pts.clone()).unwrap();
        let d = pts.len() as f64;
        let ws = weights(square());
        for phi in &ws {
            for w in &ws {
                let lhs = 2.0 * log_wvdm(&c, phi).unwrap() + 2.0 * d * pts.iter().map(|&z| w.log_w(z)).sum::<f64>();
                let rhs = 2.0 * log_wvdm(&c, w).unwrap() + 2.0 * d * pts.iter().map(|&z| phi.log_w(z)).sum::<f64>();
                prop_assert!((lhs - rhs).abs() <= 1e-10, "{lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn gradient_is_antisymmetric_for_mirrored_configurations(half in prop::collection::vec(0.01f64..1.0, 1..6)) {
        // x -> -x symmetric configuration with an even weight
        let mut xs = half.clone();
        xs.extend(half.iter().map(|x| -x));
        let pts: Vec<Complex64> = xs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        prop_assume!(distinct(&pts));
        let c = Configuration::new(pts).unwrap();
        for w in [WeightFunction::unit(iv()), WeightFunction::gaussian(iv())] {
            let g = grad_log_wvdm(&c, &w).unwrap();
            let n = half.len();
            for i in 0..n {
                prop_assert!((g[2 * i] + g[2 * (i + n)]).abs() <= 1e-9 * (1.0 + g[2 * i].abs()));
            }
        }
    }
}

#[test]
fn coincident_points_give_negative_infinity() {
    let c = Configuration::from_reals(&[0.1, 0.1, 0.5]).unwrap();
    assert_eq!(log_vdm(&c).unwrap(), f64::NEG_INFINITY);
}

// fekete

proptest! {
    #![proptest_config(cases(12))]

    #[test]
    fn fekete_output_is_canonical_and_ascending(d in 2usize..9, seed in 0u64..1000, w_index in 0usize..4) {
        let w = &weights(iv())[w_index];
        let r = solve_fekete(&iv(), w, d, &FeketeOptions { restarts: 2, ..Default::default() }, seed).unwrap();
        let pts = r.configuration.points();
        prop_assert!(pts.windows(2).all(|p| p[0].re <= p[1].re));
        prop_assert!(r.objective_trace.windows(2).all(|p| p[1] >= p[0]));
        prop_assert_eq!(r.log_wvdm_value, log_wvdm(&r.configuration, w).unwrap());
        // the reported value is independent of where the search started
        let other = solve_fekete(&iv(), w, d, &FeketeOptions { restarts: 2, ..Default::default() }, seed + 1).unwrap();
        prop_assert!((other.log_wvdm_value - r.log_wvdm_value).abs() <= 1e-8 * (1.0 + r.log_wvdm_value.abs()));
    }

    #[test]
    fn constrained_output_is_strictly_feasible(d in 4usize..12, k in 1u32..5, eps in 0.01f64..0.2, seed in 0u64..100) {
        let nb = arcsine_nbhd(k, eps);
        let w = WeightFunction::unit(iv());
        match constrained_sup_w(&iv(), &w, &nb, d, seed, &FeketeOptions::default(), &PenaltyOptions::default()) {
            Ok(s) => {
                prop_assert!(nb.contains_points(s.configuration.points()));
                prop_assert!(s.worst_gap < eps);
                let fk = solve_fekete(&iv(), &w, d, &FeketeOptions::default(), seed).unwrap();
                prop_assert!(s.log_wvdm_value <= fk.log_wvdm_value + 1e-9);
            }
            // small d cannot always reach a tight window; that must be an error, not a silent infeasible answer
            Err(e) => prop_assert!(e.to_string().to_lowercase().contains("feasib"), "{e}"),
        }
    }
}

#[test]
fn sup_bound_dominates_j() {
    // J_d <= W_d^{d(d-1)} tau(H)^d, with tau(H) = 2
    let w = WeightFunction::unit(iv());
    let tau = BaseMeasure::lebesgue(iv()).unwrap();
    let nb = arcsine_nbhd(2, 0.1);
    for d in [4usize, 6, 8] {
        let s = constrained_sup_w(
            &iv(),
            &w,
            &nb,
            d,
            1,
            &FeketeOptions::default(),
            &PenaltyOptions::default(),
        )
        .unwrap();
        let bound = 2.0 * s.log_wvdm_value + d as f64 * 2f64.ln();
        let j = log_j(&w, &tau, &nb, d, 1, &ChainOptions::default()).unwrap();
        assert!(
            j.value - 3.0 * j.std_error <= bound,
            "d={d}: {} vs {bound}",
            j.value
        );
    }
}

// equilibrium

proptest! {
    #![proptest_config(cases(24))]

    #[test]
    fn energy_report_identity(masses in prop::collection::vec(0.0f64..1.0, 16..64), w_index in 0usize..4) {
        prop_assume!(masses.iter().sum::<f64>() > 1e-3);
        let grid = Grid::new(iv(), masses.len()).unwrap();
        let m = GridMeasure::from_grid(&grid, masses).unwrap();
        let w = &weights(iv())[w_index];
        let e = weighted_energy(&m, w).unwrap();
        prop_assert!((e.weighted_energy - (-e.sigma + e.external_term)).abs() <= 1e-10);
        let two_q = 2.0 * m.nodes().iter().zip(m.masses()).map(|(&z, &p)| p * w.q(z)).sum::<f64>();
        prop_assert!((e.external_term - two_q).abs() <= 1e-10);
    }

    #[test]
    fn equilibrium_is_a_probability_vector(n in 16usize..80, w_index in 0usize..4) {
        let w = &weights(iv())[w_index];
        let s = solve_equilibrium(&iv(), w, n, &EquilibriumOptions::default()).unwrap();
        prop_assert!((s.measure.masses().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(s.measure.masses().iter().all(|&p| p >= 0.0));
        prop_assert!(s.objective_trace.windows(2).all(|p| p[1] <= p[0]));
        let e = s.energy;
        prop_assert!((e.weighted_energy - (-e.sigma + e.external_term)).abs() <= 1e-10);
    }

    #[test]
    fn equilibrium_is_unique(n in 16usize..96, start in prop::collection::vec(0.0f64..1.0, 96)) {
        let w = WeightFunction::gaussian(iv());
        let a = solve_equilibrium(&iv(), &w, n, &EquilibriumOptions::default()).unwrap();
        let opts = EquilibriumOptions { initial: Some(start[..n].to_vec()), ..Default::default() };
        prop_assume!(start[..n].iter().sum::<f64>() > 1e-3);
        let b = solve_equilibrium(&iv(), &w, n, &opts).unwrap();
        prop_assert!(a.min_zero_sum_eigenvalue.unwrap() > 0.0);
        let (ea, eb) = (a.energy.weighted_energy, b.energy.weighted_energy);
        prop_assert!((ea - eb).abs() <= 1e-8, "{ea} vs {eb}");
    }
}

#[test]
fn equilibrium_energy_is_cauchy_under_refinement() {
    for w in [WeightFunction::unit(iv()), WeightFunction::gaussian(iv())] {
        let e: Vec<f64> = [64usize, 128, 256, 512]
            .iter()
            .map(|&n| {
                solve_equilibrium(&iv(), &w, n, &EquilibriumOptions::default())
                    .unwrap()
                    .energy
                    .weighted_energy
            })
            .collect();
        let diffs: Vec<f64> = e.windows(2).map(|p| (p[1] - p[0]).abs()).collect();
        assert!(diffs.windows(2).all(|p| p[1] < p[0]), "{diffs:?}");
    }
}

// montecarlo

fn short_chain() -> ChainOptions {
    ChainOptions {
        burn_in: 200,
        samples: 1000,
        ..Default::default()
    }
}

proptest! {
    #![proptest_config(cases(6))]

    #[test]
    fn log_prob_is_log_j_minus_log_z(d in 4usize..8, k in 1u32..4, eps in 0.05f64..0.3, seed in any::<u64>()) {
        let w = WeightFunction::gaussian(iv());
        let tau = BaseMeasure::lebesgue(iv()).unwrap();
        let p = log_prob(&w, &tau, &arcsine_nbhd(k, eps), d, seed, &short_chain()).unwrap();
        prop_assert!((p.log_prob.value - (p.log_j.value - p.log_z.value)).abs() <= 1e-12);
        prop_assert!(p.log_prob.value <= 1e-9);
        prop_assert!((p.rate_check + p.log_prob.value / (d * d) as f64).abs() <= 1e-15);
    }

    #[test]
    fn estimates_are_deterministic(d in 2usize..7, seed in any::<u64>()) {
        let w = WeightFunction::unit(iv());
        let tau = BaseMeasure::lebesgue(iv()).unwrap();
        let a = log_z(&w, &tau, d, seed, &short_chain()).unwrap();
        let b = log_z(&w, &tau, d, seed, &short_chain()).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn lebesgue_base_measure_is_valid_on_any_rectangle(x0 in -3.0f64..3.0, w in 0.05f64..4.0, h in 0.0f64..4.0) {
        let r = Rectangle::new(x0, x0 + w, -h / 2.0, h / 2.0).unwrap();
        let tau = BaseMeasure::lebesgue(r).unwrap();
        prop_assert!(tau.is_verified());
        prop_assert!((tau.total_mass() - r.lebesgue_measure()).abs() <= 1e-12 * r.lebesgue_measure());
    }
}

#[test]
fn beta_grid_refinement_is_within_error() {
    let tau = BaseMeasure::lebesgue(iv()).unwrap();
    let coarse = ChainOptions {
        method: Some(Method::Thermodynamic),
        ..Default::default()
    };
    let fine = ChainOptions {
        beta_points: 41,
        ..coarse.clone()
    };
    for w in [WeightFunction::unit(iv()), WeightFunction::gaussian(iv())] {
        for d in [4usize, 8] {
            let a = log_z(&w, &tau, d, 2, &coarse).unwrap();
            let b = log_z(&w, &tau, d, 2, &fine).unwrap();
            let se = a.std_error.hypot(b.std_error);
            println!(
                "d={d} {}: 21 pts {:.5} 41 pts {:.5} combined se {se:.2e}",
                w.kind_name(),
                a.value,
                b.value
            );
            assert!(
                (a.value - b.value).abs() <= 3.0 * se,
                "{} vs {} (se {se})",
                a.value,
                b.value
            );
        }
    }
}

#[test]
fn base_measure_rejects_density_violating_the_mass_condition() {
    let zero_gap = Table {
        x: vec![-1.0, -0.2, 0.2, 1.0],
        y: vec![0.0],
        values: vec![vec![1.0, 0.0, 0.0, 1.0]],
    };
    assert!(BaseMeasure::density_grid(iv(), zero_gap.clone(), 3.0, 0.5).is_err());
    assert!(BaseMeasure::density_grid_unverified(iv(), zero_gap, 3.0, 0.5).is_ok());
    let flat = Table {
        x: vec![-1.0, 1.0],
        y: vec![0.0],
        values: vec![vec![1.0, 1.0]],
    };
    assert!(BaseMeasure::density_grid(iv(), flat, 3.0, 0.5).is_ok());
}
