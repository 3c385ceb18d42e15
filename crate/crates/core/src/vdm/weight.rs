use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::Rectangle;

/// Real polynomial sum c * x^n1 * y^n2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly2 {
    terms: Vec<(u32, u32, f64)>,
}

impl Poly2 {
    pub fn new(terms: Vec<(u32, u32, f64)>) -> Self {
        Self { terms }
    }

    pub fn terms(&self) -> &[(u32, u32, f64)] {
        &self.terms
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        self.terms
            .iter()
            .map(|&(a, b, c)| c * z.re.powi(a as i32) * z.im.powi(b as i32))
            .sum()
    }

    pub fn grad(&self, z: Complex64) -> [f64; 2] {
        let mut g = [0.0; 2];
        for &(a, b, c) in &self.terms {
            if a > 0 {
                g[0] += c * a as f64 * z.re.powi(a as i32 - 1) * z.im.powi(b as i32);
            }
            if b > 0 {
                g[1] += c * b as f64 * z.re.powi(a as i32) * z.im.powi(b as i32 - 1);
            }
        }
        g
    }

    /// Largest degree in either real variable separately.
    pub fn per_variable_degree(&self) -> u32 {
        self.terms
            .iter()
            .filter(|t| t.2 != 0.0)
            .map(|&(a, b, _)| a.max(b))
            .max()
            .unwrap_or(0)
    }
}

/// Tabulated positive values on a tensor grid, bilinearly interpolated
/// and clamped to the table edge. A single y node gives a 1-D table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// values[iy][ix]
    pub values: Vec<Vec<f64>>,
}

impl Table {
    pub(crate) fn validate(&self) -> Result<()> {
        let sorted = |v: &[f64]| v.windows(2).all(|w| w[0] < w[1]);
        if self.x.len() < 2 || !sorted(&self.x) {
            return Err(Error::InvalidWeight(
                "table x nodes must be >= 2 and increasing".into(),
            ));
        }
        if self.y.is_empty() || !sorted(&self.y) {
            return Err(Error::InvalidWeight(
                "table y nodes must be nonempty and increasing".into(),
            ));
        }
        if self.values.len() != self.y.len() || self.values.iter().any(|r| r.len() != self.x.len())
        {
            return Err(Error::InvalidWeight(
                "table values must be y.len() rows of x.len()".into(),
            ));
        }
        Ok(())
    }

    fn locate(nodes: &[f64], t: f64) -> (usize, f64) {
        if nodes.len() == 1 {
            return (0, 0.0);
        }
        let t = t.clamp(nodes[0], nodes[nodes.len() - 1]);
        let i = nodes.partition_point(|&v| v <= t).clamp(1, nodes.len() - 1) - 1;
        (i, (t - nodes[i]) / (nodes[i + 1] - nodes[i]))
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        let (ix, fx) = Self::locate(&self.x, z.re);
        let (iy, fy) = Self::locate(&self.y, z.im);
        let row = |iy: usize| {
            let r = &self.values[iy];
            r[ix] * (1.0 - fx) + r[(ix + 1).min(r.len() - 1)] * fx
        };
        if self.y.len() == 1 {
            row(0)
        } else {
            row(iy) * (1.0 - fy) + row(iy + 1) * fy
        }
    }
}

/// Serializable description of a weight; `exp_poly` coefficients give
/// Q with w = exp(-Q), `poly` coefficients give w itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    Unit,
    ExpPoly { coefficients: Poly2 },
    Poly { coefficients: Poly2 },
    Tabulated { grid: Table },
}

impl WeightSpec {
    pub fn kind_name(&self) -> &'static str {
        match self {
            WeightSpec::Unit => "unit",
            WeightSpec::ExpPoly { .. } => "exp_poly",
            WeightSpec::Poly { .. } => "poly",
            WeightSpec::Tabulated { .. } => "tabulated",
        }
    }
}

/// A continuous weight w > 0 on a rectangle, with Q = -log w.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightFunction {
    spec: WeightSpec,
    domain: Rectangle,
}

impl WeightFunction {
    /// Validates w > 0 with finite log on a dense grid of the domain.
    pub fn new(spec: WeightSpec, domain: Rectangle) -> Result<Self> {
        if let WeightSpec::Tabulated { grid } = &spec {
            grid.validate()?;
        }
        let w = Self { spec, domain };
        let (nx, ny) = if domain.is_interval() {
            (2049, 1)
        } else {
            (129, 129)
        };
        for iy in 0..ny {
            for ix in 0..nx {
                let x = domain.x_min() + domain.width() * ix as f64 / (nx - 1) as f64;
                let y = if ny == 1 {
                    domain.y_min()
                } else {
                    domain.y_min() + domain.height() * iy as f64 / (ny - 1) as f64
                };
                let z = Complex64::new(x, y);
                let lw = w.log_w(z);
                if !lw.is_finite() {
                    return Err(Error::InvalidWeight(format!(
                        "{} weight is not positive and finite at ({x}, {y}): log w = {lw}",
                        w.spec.kind_name()
                    )));
                }
            }
        }
        Ok(w)
    }

    pub fn unit(domain: Rectangle) -> Self {
        Self {
            spec: WeightSpec::Unit,
            domain,
        }
    }

    /// w = exp(-Q) with Q given by its coefficients.
    pub fn exp_poly(q: Vec<(u32, u32, f64)>, domain: Rectangle) -> Result<Self> {
        Self::new(
            WeightSpec::ExpPoly {
                coefficients: Poly2::new(q),
            },
            domain,
        )
    }

    /// w = exp(-x^2), i.e. Q = x^2.
    pub fn gaussian(domain: Rectangle) -> Self {
        Self::exp_poly(vec![(2, 0, 1.0)], domain).expect("exp(-x^2) is positive")
    }

    pub fn poly(p: Vec<(u32, u32, f64)>, domain: Rectangle) -> Result<Self> {
        Self::new(
            WeightSpec::Poly {
                coefficients: Poly2::new(p),
            },
            domain,
        )
    }

    pub fn spec(&self) -> &WeightSpec {
        &self.spec
    }

    pub fn domain(&self) -> &Rectangle {
        &self.domain
    }

    pub fn kind_name(&self) -> &'static str {
        self.spec.kind_name()
    }

    pub fn is_unit(&self) -> bool {
        matches!(self.spec, WeightSpec::Unit)
    }

    /// Per-variable degree when w itself is a polynomial (unit counts as 0).
    pub fn poly_degree(&self) -> Option<u32> {
        match &self.spec {
            WeightSpec::Unit => Some(0),
            WeightSpec::Poly { coefficients } => Some(coefficients.per_variable_degree()),
            _ => None,
        }
    }

    pub fn log_w(&self, z: Complex64) -> f64 {
        match &self.spec {
            WeightSpec::Unit => 0.0,
            WeightSpec::ExpPoly { coefficients } => -coefficients.eval(z),
            WeightSpec::Poly { coefficients } => coefficients.eval(z).ln(),
            WeightSpec::Tabulated { grid } => grid.eval(z).ln(),
        }
    }

    /// Q = -log w.
    pub fn q(&self, z: Complex64) -> f64 {
        -self.log_w(z)
    }

    pub fn value(&self, z: Complex64) -> f64 {
        self.log_w(z).exp()
    }

    pub fn grad_log_w(&self, z: Complex64) -> Result<[f64; 2]> {
        match &self.spec {
            WeightSpec::Unit => Ok([0.0, 0.0]),
            WeightSpec::ExpPoly { coefficients } => {
                let g = coefficients.grad(z);
                Ok([-g[0], -g[1]])
            }
            WeightSpec::Poly { coefficients } => {
                let p = coefficients.eval(z);
                let g = coefficients.grad(z);
                Ok([g[0] / p, g[1] / p])
            }
            WeightSpec::Tabulated { .. } => Err(Error::UnsupportedKind("tabulated")),
        }
    }

    /// Stable identity used for caching: kind, payload and domain.
    pub fn cache_key(&self) -> String {
        serde_json::to_string(self).expect("weight serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iv() -> Rectangle {
        Rectangle::interval(-1.0, 1.0).unwrap()
    }

    #[test]
    fn spec_json_forms() {
        let s: WeightSpec =
            serde_json::from_str(r#"{"kind":"exp_poly","coefficients":[[2,0,1.0]]}"#).unwrap();
        let w = WeightFunction::new(s, iv()).unwrap();
        assert!((w.log_w(Complex64::new(0.5, 0.0)) + 0.25).abs() < 1e-15);
        let u: WeightSpec = serde_json::from_str(r#"{"kind":"unit"}"#).unwrap();
        assert_eq!(u, WeightSpec::Unit);
        let t: WeightSpec = serde_json::from_str(
            r#"{"kind":"tabulated","grid":{"x":[-1,1],"y":[0],"values":[[1,3]]}}"#,
        )
        .unwrap();
        let w = WeightFunction::new(t, iv()).unwrap();
        assert!((w.value(Complex64::new(0.0, 0.0)) - 2.0).abs() < 1e-15);
        assert!(w.grad_log_w(Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn nonpositive_weight_is_rejected() {
        assert!(WeightFunction::poly(vec![(1, 0, 1.0)], iv()).is_err());
        assert!(WeightFunction::poly(vec![(0, 0, 1.0), (2, 0, 0.25)], iv()).is_ok());
        let bad = WeightSpec::Tabulated {
            grid: Table {
                x: vec![-1.0, 1.0],
                y: vec![0.0],
                values: vec![vec![1.0, 0.0]],
            },
        };
        assert!(WeightFunction::new(bad, iv()).is_err());
    }

    #[test]
    fn poly_degree_bookkeeping() {
        let w = WeightFunction::poly(vec![(0, 0, 1.0), (2, 0, 0.25)], iv()).unwrap();
        assert_eq!(w.poly_degree(), Some(2));
        assert_eq!(WeightFunction::unit(iv()).poly_degree(), Some(0));
        assert_eq!(WeightFunction::gaussian(iv()).poly_degree(), None);
    }

    #[test]
    fn bilinear_table_in_two_dimensions() {
        let r = Rectangle::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let t = WeightSpec::Tabulated {
            grid: Table {
                x: vec![0.0, 1.0],
                y: vec![0.0, 1.0],
                values: vec![vec![1.0, 2.0], vec![3.0, 4.0]],
            },
        };
        let w = WeightFunction::new(t, r).unwrap();
        assert!((w.value(Complex64::new(0.5, 0.5)) - 2.5).abs() < 1e-15);
        assert!((w.value(Complex64::new(1.0, 0.0)) - 2.0).abs() < 1e-15);
    }
}
