use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::Rectangle;
use crate::quadrature;
use crate::vdm::Table;

/// Serializable description of a base measure, as it appears in run
/// configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseSpec {
    Lebesgue,
    DensityGrid {
        grid: Table,
        /// Exponent T of the density condition tau(D(z, r)) >= r^T.
        t: f64,
        r0: f64,
        /// Skip the density-condition check (negative controls only).
        #[serde(default)]
        unverified: bool,
    },
}

/// A finite measure tau on a rectangle, with the density condition
/// tau(D(z0, r)) >= r^T for z0 in H and r <= r0 checked at construction
/// unless explicitly built unverified.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BaseMeasure {
    spec: BaseSpec,
    domain: Rectangle,
    t: f64,
    r0: f64,
    verified: bool,
    total_mass: f64,
    max_density: f64,
}

fn disc_mass_density(table: &Table, rect: &Rectangle, c: Complex64, r: f64) -> f64 {
    if rect.is_interval() {
        let lo = (c.re - r).max(rect.x_min());
        let hi = (c.re + r).min(rect.x_max());
        if hi <= lo {
            return 0.0;
        }
        // the table is piecewise linear in x, so split at its nodes
        let mut cuts: Vec<f64> = table
            .x
            .iter()
            .copied()
            .filter(|&x| x > lo && x < hi)
            .collect();
        cuts.insert(0, lo);
        cuts.push(hi);
        return cuts
            .windows(2)
            .map(|p| quadrature::integrate(p[0], p[1], 3, |x| table.eval(Complex64::new(x, c.im))))
            .sum();
    }
    // polar quadrature with the rectangle indicator
    let radial = quadrature::rule_on(0.0, r, 24);
    let angular = 128;
    let mut total = 0.0;
    for &(rho, wr) in &radial {
        let mut ring = 0.0;
        for a in 0..angular {
            let theta = 2.0 * std::f64::consts::PI * (a as f64 + 0.5) / angular as f64;
            let z = c + Complex64::from_polar(rho, theta);
            if rect.contains(z) {
                ring += table.eval(z);
            }
        }
        total += wr * rho * ring * 2.0 * std::f64::consts::PI / angular as f64;
    }
    total
}

impl BaseMeasure {
    /// Lebesgue measure (length on an interval) with T = 3 and
    /// r0 = min(side / 2, pi / 4) on a rectangle, r0 = min(length / 2, 1)
    /// on an interval.
    pub fn lebesgue(domain: Rectangle) -> Result<Self> {
        let r0 = if domain.is_interval() {
            (domain.width() / 2.0).min(1.0)
        } else {
            (domain.width().min(domain.height()) / 2.0).min(std::f64::consts::FRAC_PI_4)
        };
        let m = Self {
            spec: BaseSpec::Lebesgue,
            domain,
            t: 3.0,
            r0,
            verified: false,
            total_mass: domain.lebesgue_measure(),
            max_density: 1.0,
        };
        m.verify()?;
        Ok(Self {
            verified: true,
            ..m
        })
    }

    /// Density given by a nonnegative table, checked against
    /// tau(D(z0, r)) >= r^t on a grid of centers and radii.
    pub fn density_grid(domain: Rectangle, grid: Table, t: f64, r0: f64) -> Result<Self> {
        let m = Self::density_grid_unverified(domain, grid, t, r0)?;
        m.verify()?;
        Ok(Self {
            verified: true,
            ..m
        })
    }

    /// Same as [`BaseMeasure::density_grid`] without the density-condition
    /// check. Intended for negative controls.
    pub fn density_grid_unverified(
        domain: Rectangle,
        grid: Table,
        t: f64,
        r0: f64,
    ) -> Result<Self> {
        grid.validate()?;
        if !(t > 0.0 && r0 > 0.0) {
            return Err(Error::InvalidBaseMeasure(format!(
                "need T > 0 and r0 > 0, got T = {t}, r0 = {r0}"
            )));
        }
        if grid
            .values
            .iter()
            .flatten()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(Error::InvalidBaseMeasure(
                "density values must be finite and >= 0".into(),
            ));
        }
        let total_mass = integrate_table(&grid, &domain);
        if total_mass <= 0.0 {
            return Err(Error::InvalidBaseMeasure(
                "density has zero total mass".into(),
            ));
        }
        let max_density = grid.values.iter().flatten().fold(0.0f64, |m, &v| m.max(v));
        Ok(Self {
            spec: BaseSpec::DensityGrid {
                grid,
                t,
                r0,
                unverified: true,
            },
            domain,
            t,
            r0,
            verified: false,
            total_mass,
            max_density,
        })
    }

    pub fn from_spec(spec: &BaseSpec, domain: Rectangle) -> Result<Self> {
        match spec {
            BaseSpec::Lebesgue => Self::lebesgue(domain),
            BaseSpec::DensityGrid {
                grid,
                t,
                r0,
                unverified,
            } => {
                if *unverified {
                    Self::density_grid_unverified(domain, grid.clone(), *t, *r0)
                } else {
                    Self::density_grid(domain, grid.clone(), *t, *r0)
                }
            }
        }
    }

    fn verify(&self) -> Result<()> {
        let rect = &self.domain;
        let (nx, ny) = if rect.is_interval() {
            (257, 1)
        } else {
            (33, 33)
        };
        let radii: Vec<f64> = (0..16)
            .map(|i| self.r0 * 10f64.powf(-3.0 * i as f64 / 15.0))
            .collect();
        // polar quadrature in 2-D is not exact at the indicator's edges
        let slack = if rect.is_interval() || matches!(self.spec, BaseSpec::Lebesgue) {
            1e-12
        } else {
            0.02
        };
        for iy in 0..ny {
            for ix in 0..nx {
                let x = rect.x_min() + rect.width() * ix as f64 / (nx - 1) as f64;
                let y = if ny == 1 {
                    rect.y_min()
                } else {
                    rect.y_min() + rect.height() * iy as f64 / (ny - 1) as f64
                };
                let c = Complex64::new(x, y);
                for &r in &radii {
                    let mass = self.disc_mass(c, r);
                    let floor = r.powf(self.t);
                    if mass < floor * (1.0 - slack) {
                        return Err(Error::InvalidBaseMeasure(format!(
                            "tau(D(({x}, {y}), {r})) = {mass} < r^T = {floor} with T = {}",
                            self.t
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &BaseSpec {
        &self.spec
    }
    pub fn domain(&self) -> &Rectangle {
        &self.domain
    }
    pub fn exponent(&self) -> f64 {
        self.t
    }
    pub fn r0(&self) -> f64 {
        self.r0
    }
    pub fn is_verified(&self) -> bool {
        self.verified
    }
    pub fn is_lebesgue(&self) -> bool {
        matches!(self.spec, BaseSpec::Lebesgue)
    }

    /// tau(H).
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// tau(D(c, r)).
    pub fn disc_mass(&self, c: Complex64, r: f64) -> f64 {
        match &self.spec {
            BaseSpec::Lebesgue => self.domain.disc_intersection_measure(c, r),
            BaseSpec::DensityGrid { grid, .. } => disc_mass_density(grid, &self.domain, c, r),
        }
    }

    /// Log density against Lebesgue measure of H (length on an interval).
    pub fn log_density(&self, z: Complex64) -> f64 {
        match &self.spec {
            BaseSpec::Lebesgue => 0.0,
            BaseSpec::DensityGrid { grid, .. } => grid.eval(z).ln(),
        }
    }

    /// A point drawn from tau / tau(H).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        loop {
            let z = self.domain.sample_uniform(rng);
            match &self.spec {
                BaseSpec::Lebesgue => return z,
                BaseSpec::DensityGrid { grid, .. } => {
                    if rng.random::<f64>() * self.max_density < grid.eval(z) {
                        return z;
                    }
                }
            }
        }
    }

    /// Quadrature rule for integrals against tau: composite Gauss–Legendre
    /// with `panels` panels of `n` points per axis, weights times density.
    pub fn rule(&self, panels: usize, n: usize) -> Vec<(Complex64, f64)> {
        let r = &self.domain;
        let xs = quadrature::composite_rule(r.x_min(), r.x_max(), panels, n);
        let nodes: Vec<(Complex64, f64)> = if r.is_interval() {
            xs.into_iter()
                .map(|(x, w)| (Complex64::new(x, r.y_min()), w))
                .collect()
        } else {
            let ys = quadrature::composite_rule(r.y_min(), r.y_max(), panels, n);
            ys.iter()
                .flat_map(|&(y, wy)| {
                    xs.iter()
                        .map(move |&(x, wx)| (Complex64::new(x, y), wx * wy))
                })
                .collect()
        };
        nodes
            .into_iter()
            .map(|(z, w)| (z, w * self.log_density(z).exp()))
            .collect()
    }
}

fn integrate_table(grid: &Table, rect: &Rectangle) -> f64 {
    let cuts = |nodes: &[f64], lo: f64, hi: f64| {
        let mut c: Vec<f64> = nodes
            .iter()
            .copied()
            .filter(|&v| v > lo && v < hi)
            .collect();
        c.insert(0, lo);
        c.push(hi);
        c
    };
    let xc = cuts(&grid.x, rect.x_min(), rect.x_max());
    if rect.is_interval() {
        return xc
            .windows(2)
            .map(|p| {
                quadrature::integrate(p[0], p[1], 3, |x| {
                    grid.eval(Complex64::new(x, rect.y_min()))
                })
            })
            .sum();
    }
    let yc = cuts(&grid.y, rect.y_min(), rect.y_max());
    let mut total = 0.0;
    for px in xc.windows(2) {
        for py in yc.windows(2) {
            for (x, wx) in quadrature::rule_on(px[0], px[1], 3) {
                for (y, wy) in quadrature::rule_on(py[0], py[1], 3) {
                    total += wx * wy * grid.eval(Complex64::new(x, y));
                }
            }
        }
    }
    total
}
