use std::collections::HashMap;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Configuration, Moments, Rectangle};
use crate::error::{Error, Result};
use crate::quadrature;

/// Size of the cell each node of a discretized measure stands for.
/// `height == 0` marks interval cells.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellShape {
    pub width: f64,
    pub height: f64,
}

impl CellShape {
    pub fn is_interval(&self) -> bool {
        self.height == 0.0
    }
}

/// Uniform tensor grid of cell centers on a rectangle (a 1-D grid for an
/// interval). Nodes are ordered row-major: x fastest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    rect: Rectangle,
    nx: usize,
    ny: usize,
}

impl Grid {
    /// About `n` cells with aspect ratio close to the rectangle's.
    pub fn new(rect: Rectangle, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument(
                "grid needs at least one cell".into(),
            ));
        }
        if rect.is_interval() {
            return Ok(Self { rect, nx: n, ny: 1 });
        }
        let nx = ((n as f64 * rect.width() / rect.height()).sqrt().round() as usize).max(1);
        let ny = (n / nx).max(1);
        Ok(Self { rect, nx, ny })
    }

    pub fn with_shape(rect: Rectangle, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 || (rect.is_interval() && ny != 1) {
            return Err(Error::InvalidArgument(format!(
                "bad grid shape {nx} x {ny}"
            )));
        }
        Ok(Self { rect, nx, ny })
    }

    pub fn rect(&self) -> &Rectangle {
        &self.rect
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell(&self) -> CellShape {
        CellShape {
            width: self.rect.width() / self.nx as f64,
            height: if self.rect.is_interval() {
                0.0
            } else {
                self.rect.height() / self.ny as f64
            },
        }
    }

    pub fn node(&self, i: usize) -> Complex64 {
        let (ix, iy) = (i % self.nx, i / self.nx);
        let c = self.cell();
        let x = self.rect.x_min() + (ix as f64 + 0.5) * c.width;
        let y = if self.rect.is_interval() {
            self.rect.y_min()
        } else {
            self.rect.y_min() + (iy as f64 + 0.5) * c.height
        };
        Complex64::new(x, y)
    }

    pub fn nodes(&self) -> Vec<Complex64> {
        (0..self.len()).map(|i| self.node(i)).collect()
    }
}

/// A discrete probability measure: distinct nodes with nonnegative masses
/// summing to one.
///
/// Measures built from grids carry a [`CellShape`]; they stand for the
/// piecewise-constant density that spreads each mass uniformly over its
/// cell, which is what free entropy and energy evaluate. Without a cell
/// shape the measure is literally atomic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridMeasureRaw")]
pub struct GridMeasure {
    nodes: Vec<Complex64>,
    masses: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    cells: Option<CellShape>,
}

#[derive(Deserialize)]
struct GridMeasureRaw {
    nodes: Vec<Complex64>,
    masses: Vec<f64>,
    #[serde(default)]
    label: Option<String>,
    #[serde(default)]
    cells: Option<CellShape>,
}

impl TryFrom<GridMeasureRaw> for GridMeasure {
    type Error = Error;
    fn try_from(r: GridMeasureRaw) -> Result<Self> {
        let mut m = GridMeasure::new(r.nodes, r.masses)?;
        m.label = r.label;
        m.cells = r.cells;
        Ok(m)
    }
}

const MASS_TOL: f64 = 1e-12;

fn normalized(mut masses: Vec<f64>) -> Result<Vec<f64>> {
    for m in masses.iter_mut() {
        if *m < 0.0 && *m > -1e-15 {
            *m = 0.0;
        }
    }
    let total: f64 = masses.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::InvalidMeasure(format!(
            "total mass {total} is not positive"
        )));
    }
    Ok(masses.into_iter().map(|m| m / total).collect())
}

impl GridMeasure {
    pub fn new(nodes: Vec<Complex64>, masses: Vec<f64>) -> Result<Self> {
        if nodes.len() != masses.len() {
            return Err(Error::InvalidMeasure(format!(
                "{} nodes but {} masses",
                nodes.len(),
                masses.len()
            )));
        }
        if nodes.is_empty() {
            return Err(Error::InvalidMeasure("empty measure".into()));
        }
        if let Some(m) = masses.iter().find(|m| !(**m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidMeasure(format!(
                "mass {m} is negative or not finite"
            )));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!(
                "masses sum to {total}, not 1"
            )));
        }
        if nodes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidMeasure("non-finite node".into()));
        }
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&a, &b| {
            nodes[a]
                .re
                .total_cmp(&nodes[b].re)
                .then(nodes[a].im.total_cmp(&nodes[b].im))
        });
        if let Some(w) = order.windows(2).find(|w| nodes[w[0]] == nodes[w[1]]) {
            return Err(Error::InvalidMeasure(format!(
                "nodes {} and {} coincide",
                w[0], w[1]
            )));
        }
        Ok(Self {
            nodes,
            masses,
            label: None,
            cells: None,
        })
    }

    /// Measure on a grid; masses are normalized to total one.
    pub fn from_grid(grid: &Grid, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != grid.len() {
            return Err(Error::InvalidMeasure(format!(
                "grid has {} cells but {} masses given",
                grid.len(),
                masses.len()
            )));
        }
        let mut m = Self::new(grid.nodes(), normalized(masses)?)?;
        m.cells = Some(grid.cell());
        Ok(m)
    }

    pub fn uniform(grid: &Grid) -> Result<Self> {
        Self::from_grid(grid, vec![1.0; grid.len()])
    }

    /// Discretizes a distribution on an interval by its CDF over `n`
    /// equal cells.
    pub fn from_cdf<F: Fn(f64) -> f64>(interval: &Rectangle, n: usize, cdf: F) -> Result<Self> {
        if !interval.is_interval() {
            return Err(Error::InvalidArgument("from_cdf needs an interval".into()));
        }
        let grid = Grid::new(*interval, n)?;
        let h = grid.cell().width;
        let a = interval.x_min();
        let masses = (0..n)
            .map(|i| {
                let lo = a + h * i as f64;
                let hi = if i + 1 == n { interval.x_max() } else { lo + h };
                (cdf(hi) - cdf(lo)).max(0.0)
            })
            .collect();
        Self::from_grid(&grid, masses)
    }

    /// Discretized arcsine (unweighted equilibrium) measure of an interval.
    pub fn arcsine(interval: &Rectangle, n: usize) -> Result<Self> {
        let (a, b) = (interval.x_min(), interval.x_max());
        let cdf = move |x: f64| {
            let t = ((2.0 * x - a - b) / (b - a)).clamp(-1.0, 1.0);
            0.5 + t.asin() / std::f64::consts::PI
        };
        Ok(Self::from_cdf(interval, n, cdf)?.with_label("arcsine"))
    }

    /// Discretizes a density by integrating it over each grid cell.
    pub fn from_density<F: Fn(Complex64) -> f64>(grid: &Grid, density: F) -> Result<Self> {
        let c = grid.cell();
        let masses = (0..grid.len())
            .map(|i| {
                let z = grid.node(i);
                let xs = quadrature::rule_on(z.re - 0.5 * c.width, z.re + 0.5 * c.width, 6);
                if c.is_interval() {
                    xs.iter()
                        .map(|&(x, w)| w * density(Complex64::new(x, z.im)))
                        .sum()
                } else {
                    let ys = quadrature::rule_on(z.im - 0.5 * c.height, z.im + 0.5 * c.height, 6);
                    xs.iter()
                        .flat_map(|&(x, wx)| {
                            ys.iter()
                                .map(move |&(y, wy)| (Complex64::new(x, y), wx * wy))
                        })
                        .map(|(p, w)| w * density(p))
                        .sum()
                }
            })
            .map(|m: f64| m.max(0.0))
            .collect();
        Self::from_grid(grid, masses)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Marks the measure as a discretization with the given cells.
    pub fn as_discretization(mut self, cells: CellShape) -> Self {
        self.cells = Some(cells);
        self
    }

    /// Drops any cell information: the measure becomes literally atomic.
    pub fn literal(mut self) -> Self {
        self.cells = None;
        self
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }
    pub fn masses(&self) -> &[f64] {
        &self.masses
    }
    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }
    pub fn cells(&self) -> Option<CellShape> {
        self.cells
    }
    pub fn is_discretized(&self) -> bool {
        self.cells.is_some()
    }
    pub fn len(&self) -> usize {
        self.nodes.len()
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn moments(&self, k: u32) -> Moments {
        Moments::weighted(
            self.nodes.iter().copied().zip(self.masses.iter().copied()),
            k,
        )
    }

    /// Mass of {Re z <= x}. For discretizations the cell mass is spread
    /// uniformly across the cell width.
    pub fn mass_left_of(&self, x: f64) -> f64 {
        match self.cells {
            Some(c) => self
                .nodes
                .iter()
                .zip(&self.masses)
                .map(|(z, m)| {
                    let lo = z.re - 0.5 * c.width;
                    m * ((x - lo) / c.width).clamp(0.0, 1.0)
                })
                .sum(),
            None => self
                .nodes
                .iter()
                .zip(&self.masses)
                .filter(|(z, _)| z.re <= x)
                .map(|(_, m)| m)
                .sum(),
        }
    }

    /// Smallest and largest Re of nodes carrying mass above `threshold`.
    pub fn support_x(&self, threshold: f64) -> (f64, f64) {
        self.nodes
            .iter()
            .zip(&self.masses)
            .filter(|(_, m)| **m > threshold)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (z, _)| {
                (lo.min(z.re), hi.max(z.re))
            })
    }

    /// Push-forward under z -> s z, s > 0.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scale must be > 0, got {s}"
            )));
        }
        Ok(Self {
            nodes: self.nodes.iter().map(|z| z * s).collect(),
            masses: self.masses.clone(),
            label: self.label.clone(),
            cells: self.cells.map(|c| CellShape {
                width: c.width * s,
                height: c.height * s,
            }),
        })
    }

    /// Same nodes with new masses (normalized).
    pub fn with_masses(&self, masses: Vec<f64>) -> Result<Self> {
        if masses.len() != self.len() {
            return Err(Error::InvalidMeasure("mass vector length mismatch".into()));
        }
        let mut m = Self::new(self.nodes.clone(), normalized(masses)?)?;
        m.cells = self.cells;
        m.label = self.label.clone();
        Ok(m)
    }

    /// CSV with columns x, y, mass. Leading `#` lines carry metadata; a
    /// `# cells <width> <height>` line records the discretization.
    pub fn write_csv<W: Write>(&self, mut out: W, header_lines: &[String]) -> Result<()> {
        for line in header_lines {
            writeln!(out, "# {line}")?;
        }
        if let Some(label) = &self.label {
            writeln!(out, "# label {label}")?;
        }
        if let Some(c) = self.cells {
            writeln!(out, "# cells {:e} {:e}", c.width, c.height)?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "y", "mass"])?;
        for (z, m) in self.nodes.iter().zip(&self.masses) {
            w.write_record([
                format!("{:e}", z.re),
                format!("{:e}", z.im),
                format!("{:e}", m),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        let mut cells = None;
        let mut label = None;
        for line in text.lines().filter_map(|l| l.strip_prefix('#')) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["cells", w, h] => {
                    let parse = |s: &str| {
                        s.parse::<f64>()
                            .map_err(|e| Error::InvalidMeasure(format!("bad cells line: {e}")))
                    };
                    cells = Some(CellShape {
                        width: parse(w)?,
                        height: parse(h)?,
                    });
                }
                ["label", rest @ ..] => label = Some(rest.join(" ")),
                _ => {}
            }
        }
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut nodes = Vec::new();
        let mut masses = Vec::new();
        for row in reader.deserialize::<(f64, f64, f64)>() {
            let (x, y, m) = row?;
            nodes.push(Complex64::new(x, y));
            masses.push(m);
        }
        // CSV round-trips lose the last bits; renormalize within tolerance.
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() < 1e-9 {
            masses.iter_mut().for_each(|m| *m /= total);
        }
        let mut m = Self::new(nodes, masses)?;
        m.cells = cells;
        m.label = label;
        Ok(m)
    }
}

/// The empirical measure (1/d) sum delta(lambda_j); coincident points
/// (exact coordinate equality) merge their masses.
pub fn empirical(lambda: &Configuration) -> GridMeasure {
    let d = lambda.d();
    let mut index: HashMap<(u64, u64), usize> = HashMap::with_capacity(d);
    let mut nodes = Vec::with_capacity(d);
    let mut counts: Vec<usize> = Vec::with_capacity(d);
    for &z in lambda.points() {
        // + 0.0 maps -0.0 to +0.0 so equal values share a key
        let key = ((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits());
        match index.get(&key) {
            Some(&i) => counts[i] += 1,
            None => {
                index.insert(key, nodes.len());
                nodes.push(Complex64::new(z.re + 0.0, z.im + 0.0));
                counts.push(1);
            }
        }
    }
    let masses = counts.into_iter().map(|c| c as f64 / d as f64).collect();
    GridMeasure {
        nodes,
        masses,
        label: Some("empirical".into()),
        cells: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval() -> Rectangle {
        Rectangle::interval(-1.0, 1.0).unwrap()
    }

    #[test]
    fn validation_rejects_bad_measures() {
        let z = |x: f64| Complex64::new(x, 0.0);
        assert!(GridMeasure::new(vec![z(0.0)], vec![0.5]).is_err());
        assert!(GridMeasure::new(vec![z(0.0), z(1.0)], vec![1.5, -0.5]).is_err());
        assert!(GridMeasure::new(vec![z(0.0), z(0.0)], vec![0.5, 0.5]).is_err());
        assert!(GridMeasure::new(vec![z(0.0)], vec![1.0, 0.0]).is_err());
        assert!(GridMeasure::new(vec![z(0.0), z(1.0)], vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn point_mass_moments() {
        let m = GridMeasure::new(vec![Complex64::new(0.0, 0.0)], vec![1.0]).unwrap();
        let mo = m.moments(2);
        for ((a, b), v) in mo.iter() {
            let expected = if (a, b) == (0, 0) { 1.0 } else { 0.0 };
            assert_eq!(v, expected);
        }
    }

    #[test]
    fn symmetric_two_atom_moments() {
        let m = GridMeasure::new(
            vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
            vec![0.5, 0.5],
        )
        .unwrap();
        let mo = m.moments(2);
        assert_eq!(mo.get(1, 0), Some(0.0));
        assert_eq!(mo.get(2, 0), Some(1.0));
        assert_eq!(mo.get(0, 2), Some(0.0));
    }

    #[test]
    fn arcsine_second_moment_against_quadrature_oracle() {
        // int x^2 / (pi sqrt(1 - x^2)) dx via x = cos(t): (1/pi) int_0^pi cos^2 t dt
        let oracle =
            crate::quadrature::integrate(0.0, std::f64::consts::PI, 32, |t| t.cos().powi(2))
                / std::f64::consts::PI;
        assert!((oracle - 0.5).abs() < 1e-14);
        let m = GridMeasure::arcsine(&interval(), 512).unwrap();
        let v = m.moments(2).get(2, 0).unwrap();
        assert!((v - oracle).abs() < 1e-3, "{v}");
        assert!(m.is_discretized());
    }

    #[test]
    fn empirical_merges_coincident_points() {
        let c = Configuration::from_reals(&[1.0, -1.0]).unwrap();
        let e = empirical(&c);
        assert_eq!(e.masses(), &[0.5, 0.5]);
        let c = Configuration::from_reals(&[0.0, 0.0, 1.0]).unwrap();
        let e = empirical(&c);
        assert_eq!(e.len(), 2);
        assert!((e.masses()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((e.masses()[1] - 1.0 / 3.0).abs() < 1e-15);
        let c = Configuration::from_reals(&[-0.0, 0.0]).unwrap();
        assert_eq!(empirical(&c).len(), 1);
    }

    #[test]
    fn empirical_of_lobatto_points_second_moment() {
        let pts = interval().lobatto_points(48);
        let c = Configuration::new(pts.clone()).unwrap();
        let direct: f64 = pts.iter().map(|z| z.re * z.re).sum::<f64>() / 48.0;
        let v = empirical(&c).moments(2).get(2, 0).unwrap();
        assert!((v - direct).abs() < 1e-12);
        assert!((v - 0.5).abs() < 0.03);
    }

    #[test]
    fn mass_left_of_spreads_cells() {
        let g = Grid::new(interval(), 4).unwrap();
        let m = GridMeasure::uniform(&g).unwrap();
        assert!((m.mass_left_of(-0.75) - 0.125).abs() < 1e-15);
        assert!((m.mass_left_of(0.0) - 0.5).abs() < 1e-15);
        assert!((m.literal().mass_left_of(-0.75) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip_keeps_cells() {
        let m = GridMeasure::arcsine(&interval(), 16).unwrap();
        let mut buf = Vec::new();
        m.write_csv(&mut buf, &["loggas test".into()]).unwrap();
        let back = GridMeasure::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back.cells(), m.cells());
        assert_eq!(back.label(), Some("arcsine"));
        for (a, b) in back.masses().iter().zip(m.masses()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_shapes() {
        let r = Rectangle::new(0.0, 2.0, 0.0, 1.0).unwrap();
        let g = Grid::new(r, 200).unwrap();
        assert_eq!((g.nx(), g.ny()), (20, 10));
        let c = g.cell();
        assert!((c.width - 0.1).abs() < 1e-15 && (c.height - 0.1).abs() < 1e-15);
        assert!((g.node(0) - Complex64::new(0.05, 0.05)).norm() < 1e-15);
        assert!((g.node(20) - Complex64::new(0.05, 0.15)).norm() < 1e-15);
    }
}
