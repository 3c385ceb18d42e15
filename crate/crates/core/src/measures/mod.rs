//! Probability measures on a rectangle, their moments, moment
//! neighborhoods, empirical measures of point configurations, and the
//! perturbation boxes used around near-maximizers.

mod grid;
mod moments;

pub use grid::{empirical, CellShape, Grid, GridMeasure};
pub use moments::{in_neighborhood, MomentNeighborhood, Moments};

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Closed axis-parallel rectangle in the plane. A zero height models a
/// real interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RectangleRaw")]
pub struct Rectangle {
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

#[derive(Deserialize)]
struct RectangleRaw {
    x_min: f64,
    x_max: f64,
    #[serde(default)]
    y_min: f64,
    #[serde(default)]
    y_max: f64,
}

impl TryFrom<RectangleRaw> for Rectangle {
    type Error = Error;
    fn try_from(r: RectangleRaw) -> Result<Self> {
        Rectangle::new(r.x_min, r.x_max, r.y_min, r.y_max)
    }
}

impl Rectangle {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidRectangle("non-finite bound".into()));
        }
        if !(x_min < x_max) {
            return Err(Error::InvalidRectangle(format!(
                "need x_min < x_max, got [{x_min}, {x_max}]"
            )));
        }
        if !(y_min <= y_max) {
            return Err(Error::InvalidRectangle(format!(
                "need y_min <= y_max, got [{y_min}, {y_max}]"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    /// The real interval [a, b] embedded at height 0.
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new(a, b, 0.0, 0.0)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn y_min(&self) -> f64 {
        self.y_min
    }
    pub fn y_max(&self) -> f64 {
        self.y_max
    }
    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }
    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }
    pub fn is_interval(&self) -> bool {
        self.y_max == self.y_min
    }
    pub fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        )
    }

    /// Lebesgue measure: area, or length for an interval.
    pub fn lebesgue_measure(&self) -> f64 {
        if self.is_interval() {
            self.width()
        } else {
            self.width() * self.height()
        }
    }

    /// Closed-set membership, boundary included.
    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.x_min && z.re <= self.x_max && z.im >= self.y_min && z.im <= self.y_max
    }

    pub fn clamp(&self, z: Complex64) -> Complex64 {
        Complex64::new(
            z.re.clamp(self.x_min, self.x_max),
            z.im.clamp(self.y_min, self.y_max),
        )
    }

    /// Largest coordinate magnitude on the rectangle, max(|x|, |y|).
    pub fn coordinate_bound(&self) -> f64 {
        [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `d` starting points: tensor Chebyshev–Lobatto points of the
    /// rectangle, subsampled evenly when the tensor grid has more than `d`.
    pub fn lobatto_points(&self, d: usize) -> Vec<Complex64> {
        fn lobatto(a: f64, b: f64, n: usize) -> Vec<f64> {
            if n == 1 {
                return vec![0.5 * (a + b)];
            }
            (0..n)
                .map(|i| {
                    let t = -(std::f64::consts::PI * i as f64 / (n - 1) as f64).cos();
                    0.5 * (a + b) + 0.5 * (b - a) * t
                })
                .collect()
        }
        if d == 0 {
            return Vec::new();
        }
        if self.is_interval() {
            return lobatto(self.x_min, self.x_max, d)
                .into_iter()
                .map(|x| Complex64::new(x, self.y_min))
                .collect();
        }
        let aspect = self.width() / self.height();
        let mut nx = ((d as f64 * aspect).sqrt().ceil() as usize).max(1);
        let mut ny = d.div_ceil(nx).max(1);
        while nx * ny < d {
            nx += 1;
            ny = d.div_ceil(nx);
        }
        let xs = lobatto(self.x_min, self.x_max, nx);
        let ys = lobatto(self.y_min, self.y_max, ny);
        let all: Vec<Complex64> = ys
            .iter()
            .flat_map(|&y| xs.iter().map(move |&x| Complex64::new(x, y)))
            .collect();
        let total = all.len();
        (0..d)
            .map(|i| {
                let idx = if d == 1 { 0 } else { i * (total - 1) / (d - 1) };
                all[idx]
            })
            .collect()
    }

    /// Area (length for an interval) of the closed disc D(center, r)
    /// intersected with the rectangle.
    pub fn disc_intersection_measure(&self, center: Complex64, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        if self.is_interval() {
            if (center.im - self.y_min).abs() > r {
                return 0.0;
            }
            let half = (r * r - (center.im - self.y_min).powi(2)).max(0.0).sqrt();
            let lo = (center.re - half).max(self.x_min);
            let hi = (center.re + half).min(self.x_max);
            return (hi - lo).max(0.0);
        }
        disc_rect_area(center, r, self)
    }

    /// Uniform sample from the rectangle (interval).
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let x = self.x_min + self.width() * rng.random::<f64>();
        let y = if self.is_interval() {
            self.y_min
        } else {
            self.y_min + self.height() * rng.random::<f64>()
        };
        Complex64::new(x, y)
    }
}

impl fmt::Display for Rectangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{},{}",
            self.x_min, self.x_max, self.y_min, self.y_max
        )
    }
}

/// Parses `a,b` (an interval) or `x_min,x_max,y_min,y_max`.
impl FromStr for Rectangle {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidRectangle(format!("cannot parse `{s}`: {e}")))?;
        match parts.as_slice() {
            [a, b] => Rectangle::interval(*a, *b),
            [a, b, c, d] => Rectangle::new(*a, *b, *c, *d),
            _ => Err(Error::InvalidRectangle(format!(
                "expected 2 or 4 comma-separated numbers, got `{s}`"
            ))),
        }
    }
}

// Integrates the clipped vertical chord over x = cx + r sin(theta); the
// breakpoints make the integrand smooth on every piece.
fn disc_rect_area(c: Complex64, r: f64, rect: &Rectangle) -> f64 {
    let lo = ((rect.x_min - c.re) / r).clamp(-1.0, 1.0).asin();
    let hi = ((rect.x_max - c.re) / r).clamp(-1.0, 1.0).asin();
    if hi <= lo {
        return 0.0;
    }
    let mut breaks = vec![lo, hi];
    for dy in [rect.y_max - c.im, c.im - rect.y_min] {
        if dy.abs() < r {
            let t = (dy / r).abs().min(1.0).acos();
            for b in [t, -t] {
                if b > lo && b < hi {
                    breaks.push(b);
                }
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let chord = |theta: f64| {
        let half = r * theta.cos();
        let top = (c.im + half).min(rect.y_max);
        let bottom = (c.im - half).max(rect.y_min);
        (top - bottom).max(0.0) * r * theta.cos()
    };
    breaks
        .windows(2)
        .map(|w| quadrature::integrate(w[0], w[1], 24, chord))
        .sum()
}

/// An ordered tuple of `d` points in the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    points: Vec<Complex64>,
}

impl Configuration {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::TooFewPoints { needed: 1, got: 0 });
        }
        if points
            .iter()
            .any(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::InvalidArgument("non-finite point".into()));
        }
        Ok(Self { points })
    }

    pub fn from_reals(xs: &[f64]) -> Result<Self> {
        Self::new(xs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn d(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Complex64> {
        self.points
    }

    /// Error naming the first point outside `rect`.
    pub fn check_in(&self, rect: &Rectangle) -> Result<()> {
        match self.points.iter().position(|z| !rect.contains(*z)) {
            None => Ok(()),
            Some(index) => Err(Error::OutsideDomain {
                index,
                re: self.points[index].re,
                im: self.points[index].im,
            }),
        }
    }

    /// Points sorted by (Re, Im).
    pub fn canonicalized(&self) -> Self {
        let mut points = self.points.clone();
        points.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        Self { points }
    }

    /// Empirical moments (1/d) sum x^n1 y^n2 up to total degree `k`.
    pub fn moments(&self, k: u32) -> Moments {
        Moments::of_points(&self.points, k)
    }
}

/// The box of perturbations |z'_j - z_j| <= radius around a configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaBox {
    center: Configuration,
    radius: f64,
}

/// The perturbation box with radius e^{-sqrt(d)}.
pub fn delta_box(lambda: &Configuration) -> DeltaBox {
    DeltaBox {
        radius: (-(lambda.d() as f64).sqrt()).exp(),
        center: lambda.clone(),
    }
}

impl DeltaBox {
    pub fn with_radius(center: Configuration, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center(&self) -> &Configuration {
        &self.center
    }

    pub fn contains(&self, other: &Configuration) -> bool {
        other.d() == self.center.d()
            && other
                .points()
                .iter()
                .zip(self.center.points())
                .all(|(a, b)| (a - b).norm() <= self.radius)
    }

    /// Uniform sample from the box intersected with `rect`^d.
    pub fn sample<R: Rng + ?Sized>(&self, rect: &Rectangle, rng: &mut R) -> Configuration {
        let r = self.radius;
        let points = self
            .center
            .points()
            .iter()
            .map(|&c| {
                let x_lo = (c.re - r).max(rect.x_min());
                let x_hi = (c.re + r).min(rect.x_max());
                if rect.is_interval() {
                    return Complex64::new(x_lo + (x_hi - x_lo) * rng.random::<f64>(), c.im);
                }
                let y_lo = (c.im - r).max(rect.y_min());
                let y_hi = (c.im + r).min(rect.y_max());
                loop {
                    let z = Complex64::new(
                        x_lo + (x_hi - x_lo) * rng.random::<f64>(),
                        y_lo + (y_hi - y_lo) * rng.random::<f64>(),
                    );
                    if (z - c).norm() <= r {
                        break z;
                    }
                }
            })
            .collect();
        Configuration { points }
    }

    /// log of the Lebesgue measure of the box intersected with `rect`^d.
    pub fn log_lebesgue_volume(&self, rect: &Rectangle) -> f64 {
        self.center
            .points()
            .iter()
            .map(|&c| rect.disc_intersection_measure(c, self.radius).ln())
            .sum()
    }
}
