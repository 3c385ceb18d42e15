use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::GridMeasure;
use crate::error::{Error, Result};

/// Real moments int x^n1 y^n2 dm for n1 + n2 <= k, stored in total-degree
/// order: (0,0), (0,1), (1,0), (0,2), (1,1), (2,0), ...
#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    k: u32,
    values: Vec<f64>,
}

fn count(k: u32) -> usize {
    let k = k as usize;
    (k + 1) * (k + 2) / 2
}

impl Moments {
    pub fn index(n1: u32, n2: u32) -> usize {
        let t = (n1 + n2) as usize;
        t * (t + 1) / 2 + n1 as usize
    }

    /// Builds from values in total-degree order.
    pub fn from_values(k: u32, values: Vec<f64>) -> Result<Self> {
        if values.len() != count(k) {
            return Err(Error::InvalidArgument(format!(
                "expected {} moments for k = {k}, got {}",
                count(k),
                values.len()
            )));
        }
        Ok(Self { k, values })
    }

    pub(crate) fn weighted<I>(points_masses: I, k: u32) -> Self
    where
        I: IntoIterator<Item = (Complex64, f64)>,
    {
        let ku = k as usize;
        let mut values = vec![0.0; count(k)];
        let mut xp = vec![1.0; ku + 1];
        let mut yp = vec![1.0; ku + 1];
        for (z, m) in points_masses {
            for n in 1..=ku {
                xp[n] = xp[n - 1] * z.re;
                yp[n] = yp[n - 1] * z.im;
            }
            for t in 0..=ku {
                for n1 in 0..=t {
                    values[t * (t + 1) / 2 + n1] += m * xp[n1] * yp[t - n1];
                }
            }
        }
        Self { k, values }
    }

    /// Empirical moments of equally weighted points.
    pub fn of_points(points: &[Complex64], k: u32) -> Self {
        let w = 1.0 / points.len() as f64;
        Self::weighted(points.iter().map(|&z| (z, w)), k)
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn get(&self, n1: u32, n2: u32) -> Option<f64> {
        (n1 + n2 <= self.k).then(|| self.values[Self::index(n1, n2)])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// ((n1, n2), value) in total-degree order.
    pub fn iter(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        (0..=self.k)
            .flat_map(|t| (0..=t).map(move |n1| (n1, t - n1)))
            .zip(self.values.iter().copied())
    }

    /// Truncation to total degree `k <= self.k()`.
    pub fn truncated(&self, k: u32) -> Self {
        let k = k.min(self.k);
        Self {
            k,
            values: self.values[..count(k)].to_vec(),
        }
    }
}

impl Serialize for Moments {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let triples: Vec<(u32, u32, f64)> = self.iter().map(|((a, b), v)| (a, b, v)).collect();
        triples.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Moments {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let triples = Vec::<(u32, u32, f64)>::deserialize(d)?;
        moments_from_triples(&triples).map_err(serde::de::Error::custom)
    }
}

fn moments_from_triples(triples: &[(u32, u32, f64)]) -> Result<Moments> {
    let k = triples.iter().map(|t| t.0 + t.1).max().unwrap_or(0);
    if triples.len() != count(k) {
        return Err(Error::InvalidArgument(format!(
            "moment list must contain exactly the pairs with n1 + n2 <= {k}"
        )));
    }
    let mut values = vec![f64::NAN; count(k)];
    for &(a, b, v) in triples {
        let i = Moments::index(a, b);
        if !values[i].is_nan() {
            return Err(Error::InvalidArgument(format!(
                "duplicate moment ({a},{b})"
            )));
        }
        values[i] = v;
    }
    Ok(Moments { k, values })
}

/// The moment neighborhood G(mu, k, eps): probability measures whose
/// moments up to total degree k are strictly within eps of the reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NeighborhoodRaw", into = "NeighborhoodRaw")]
pub struct MomentNeighborhood {
    reference: Moments,
    epsilon: f64,
}

#[derive(Serialize, Deserialize)]
struct NeighborhoodRaw {
    k: u32,
    epsilon: f64,
    moments: Vec<(u32, u32, f64)>,
}

impl TryFrom<NeighborhoodRaw> for MomentNeighborhood {
    type Error = Error;
    fn try_from(raw: NeighborhoodRaw) -> Result<Self> {
        let reference = moments_from_triples(&raw.moments)?;
        if reference.k() != raw.k {
            return Err(Error::InvalidArgument(format!(
                "k = {} but moments go up to total degree {}",
                raw.k,
                reference.k()
            )));
        }
        MomentNeighborhood::new(reference, raw.epsilon)
    }
}

impl From<MomentNeighborhood> for NeighborhoodRaw {
    fn from(n: MomentNeighborhood) -> Self {
        NeighborhoodRaw {
            k: n.k(),
            epsilon: n.epsilon,
            moments: n.reference.iter().map(|((a, b), v)| (a, b, v)).collect(),
        }
    }
}

impl MomentNeighborhood {
    pub fn new(reference: Moments, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be > 0, got {epsilon}"
            )));
        }
        if (reference.values[0] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "reference (0,0) moment must be 1, got {}",
                reference.values[0]
            )));
        }
        Ok(Self { reference, epsilon })
    }

    /// G(mu, k, eps) around a grid measure.
    pub fn around(mu: &GridMeasure, k: u32, epsilon: f64) -> Result<Self> {
        Self::new(mu.moments(k), epsilon)
    }

    pub fn k(&self) -> u32 {
        self.reference.k()
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn reference(&self) -> &Moments {
        &self.reference
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        Self::new(self.reference.clone(), epsilon)
    }

    pub fn with_k(&self, k: u32) -> Self {
        Self {
            reference: self.reference.truncated(k),
            epsilon: self.epsilon,
        }
    }

    /// Signed gaps moment(m) - reference in total-degree order.
    pub fn gaps(&self, moments: &Moments) -> Vec<f64> {
        moments
            .values
            .iter()
            .zip(&self.reference.values)
            .map(|(a, b)| a - b)
            .collect()
    }

    pub fn contains_moments(&self, moments: &Moments) -> bool {
        debug_assert!(moments.k() >= self.k());
        moments
            .values
            .iter()
            .zip(&self.reference.values)
            .all(|(a, b)| (a - b).abs() < self.epsilon)
    }

    pub fn contains(&self, m: &GridMeasure) -> bool {
        self.contains_moments(&m.moments(self.k()))
    }

    pub fn contains_points(&self, points: &[Complex64]) -> bool {
        self.contains_moments(&Moments::of_points(points, self.k()))
    }

    /// Largest absolute gap and the moment it occurs at.
    pub fn worst_gap(&self, moments: &Moments) -> ((u32, u32), f64) {
        let gaps = self.gaps(moments);
        self.reference
            .iter()
            .map(|(nn, _)| nn)
            .zip(gaps.iter().map(|g| g.abs()))
            .fold(
                ((0, 0), 0.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            )
    }
}

/// Strict membership of `m` in G(mu, k, eps).
pub fn in_neighborhood(m: &GridMeasure, nbhd: &MomentNeighborhood) -> bool {
    nbhd.contains(m)
}
