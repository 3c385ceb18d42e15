//! Two-sided bounds on (1/d^2) log J_d around a constrained maximizer.
//!
//! Upper: J_d <= tau(H)^d sup |VDM^phi_d|^2 over the neighborhood.
//! Lower: J_d >= tau^d(B) min_B |VDM^phi_d|^2 for a box B of discs around
//! a strictly feasible configuration, with the radius small enough that
//! the whole box stays inside the neighborhood and every pair stays
//! separated. The minimum is bounded below pair by pair:
//! |z'_i - z'_j| >= |z_i - z_j| - 2r and log w(z') >= log w(z) - G r,
//! where G is a Lipschitz constant of log w measured on a dense grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::BaseMeasure;
use crate::error::{Error, Result};
use crate::fekete::{constrained_sup_w, ConstrainedSup, FeketeOptions, PenaltyOptions};
use crate::measures::{MomentNeighborhood, Rectangle};
use crate::vdm::{perturbation_floor, MarkovBoundParams, WeightFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichBounds {
    pub d: usize,
    /// Lower bound on (1/d^2) log J_d.
    pub lower: f64,
    /// Upper bound on (1/d^2) log J_d.
    pub upper: f64,
    /// Disc radius of the perturbation box used by the lower bound.
    pub radius: f64,
    /// log tau^d of the box.
    pub log_box_mass: f64,
    /// Lower bound on log|VDM^phi_d| over the box.
    pub min_log_wvdm: f64,
    /// Lipschitz constant of log phi used for the field term.
    pub log_weight_lipschitz: f64,
    /// The Markov-inequality floor psi(d) when phi is a polynomial weight;
    /// values <= 0 carry no information.
    pub psi: Option<f64>,
    pub sup: ConstrainedSup,
}

/// max |d log w| over a dense grid, by finite differences between
/// neighbouring nodes (exact for piecewise-linear tables).
fn log_weight_lipschitz(w: &WeightFunction) -> f64 {
    let r = w.domain();
    let (nx, ny) = if r.is_interval() {
        (4097, 1)
    } else {
        (513, 513)
    };
    let node = |ix: usize, iy: usize| {
        let x = r.x_min() + r.width() * ix as f64 / (nx - 1) as f64;
        let y = if ny == 1 {
            r.y_min()
        } else {
            r.y_min() + r.height() * iy as f64 / (ny - 1) as f64
        };
        Complex64::new(x, y)
    };
    let mut g: f64 = 0.0;
    for iy in 0..ny {
        for ix in 0..nx {
            let z = node(ix, iy);
            let v = w.log_w(z);
            if ix + 1 < nx {
                let z2 = node(ix + 1, iy);
                g = g.max((w.log_w(z2) - v).abs() / (z2 - z).norm());
            }
            if iy + 1 < ny {
                let z2 = node(ix, iy + 1);
                g = g.max((w.log_w(z2) - v).abs() / (z2 - z).norm());
            }
        }
    }
    g
}

/// Bound on the change of any empirical moment of total degree <= k when
/// every point moves by at most r, divided by r.
fn moment_lipschitz(rect: &Rectangle, k: u32) -> f64 {
    let b = rect.coordinate_bound().max(1.0);
    k as f64 * b.powi(k as i32 - 1)
}

pub fn sandwich_bounds(
    phi: &WeightFunction,
    tau: &BaseMeasure,
    nbhd: &MomentNeighborhood,
    d: usize,
    seed: u64,
    fekete: &FeketeOptions,
    penalty: &PenaltyOptions,
) -> Result<SandwichBounds> {
    if phi.domain() != tau.domain() {
        return Err(Error::InvalidArgument(
            "weight and base measure live on different rectangles".into(),
        ));
    }
    let rect = *tau.domain();
    let sup = constrained_sup_w(&rect, phi, nbhd, d, seed, fekete, penalty)?;
    let pts = sup.configuration.points();
    let dd = (d * d) as f64;

    let upper = (d as f64 * tau.total_mass().ln() + 2.0 * sup.log_wvdm_value) / dd;

    let mut min_dist = f64::INFINITY;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            min_dist = min_dist.min((a - b).norm());
        }
    }
    let slack = nbhd.epsilon() - sup.worst_gap;
    let radius = (-(d as f64).sqrt())
        .exp()
        .min(min_dist / 4.0)
        .min(0.5 * slack / moment_lipschitz(&rect, nbhd.k()));
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "no admissible perturbation radius (slack {slack:.3e}, separation {min_dist:.3e})"
        )));
    }

    let lip = log_weight_lipschitz(phi);
    let mut pair_sum = 0.0;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            pair_sum += ((a - b).norm() - 2.0 * radius).ln();
        }
    }
    let field: f64 = pts.iter().map(|&z| phi.log_w(z) - lip * radius).sum();
    let min_log_wvdm = pair_sum + d as f64 * field;
    let log_box_mass: f64 = pts.iter().map(|&z| tau.disc_mass(z, radius).ln()).sum();
    let lower = (log_box_mass + 2.0 * min_log_wvdm) / dd;

    let psi = MarkovBoundParams::for_weighted_vdm(&rect, phi)
        .ok()
        .map(|p| perturbation_floor(d, &p));

    Ok(SandwichBounds {
        d,
        lower,
        upper,
        radius,
        log_box_mass,
        min_log_wvdm,
        log_weight_lipschitz: lip,
        psi,
        sup,
    })
}
