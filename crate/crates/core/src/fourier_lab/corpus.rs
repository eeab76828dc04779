//! A fixed corpus of rasterized constructions for fitting the constants of
//! the cone-control and low-frequency inequalities.

use serde::{Deserialize, Serialize};

use crate::constructions::{ConstructionParams, ConstructionParams as P, construct};
use crate::energy::exact_energy;
use crate::error::{Error, Result};
use crate::geometry::rasterize;
use crate::spectral::nyquist;

use super::{Cone, cone_residual, low_frequency_mass};

/// Twenty planar constructions of moderate size, all resolved at `N = 256`.
pub fn inequality_corpus() -> Vec<ConstructionParams> {
    vec![
        P::Lens21 { lambda: 0.5, l: 4.0, h: 8.0 },
        P::Lens21 { lambda: 0.5, l: 8.0, h: 16.0 },
        P::Lens21 { lambda: 0.25, l: 6.0, h: 12.0 },
        P::Lens21 { lambda: 0.75, l: 6.0, h: 10.0 },
        P::Lens21 { lambda: 0.5, l: 10.0, h: 30.0 },
        P::DiamondNd { n: 2, l: 4.0, h: 4.0 },
        P::DiamondNd { n: 2, l: 6.0, h: 12.0 },
        P::DiamondNd { n: 2, l: 8.0, h: 24.0 },
        P::Ball { n: 2, lambda: 0.5, volume: 20.0 },
        P::Ball { n: 2, lambda: 0.3, volume: 50.0 },
        P::BranchRect21 { lambda: 0.5, l: 20.0, h: 24.0 },
        P::BranchRect21 { lambda: 0.5, l: 16.0, h: 40.0 },
        P::BranchRect21 { lambda: 0.3, l: 24.0, h: 40.0 },
        P::LensBranch4w { l: 20.0, h: 40.0, r: 2.0 },
        P::LensBranch4w { l: 24.0, h: 60.0, r: 2.5 },
        P::LensBranch4w { l: 32.0, h: 64.0, r: 3.0 },
        P::Tartar { l: 16.0, h: 16.0, r: 2.0, k: 1 },
        P::Tartar { l: 24.0, h: 24.0, r: 6.0, k: 2 },
        P::Tartar { l: 32.0, h: 32.0, r: 8.0, k: 2 },
        P::DoubleBranch4w { l: 16.0, h: 48.0, theta: 1.0 / 3.0 },
    ]
}

/// One field and one cone axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityRow {
    pub field_id: String,
    pub component: usize,
    pub mu: f64,
    pub mu1: f64,
    pub residual: f64,
    /// `μ^{-2} E_el + μ'^{-1} E_surf`.
    pub cone_rhs: f64,
    /// `residual / cone_rhs`, absent when the component vanishes.
    pub cone_ratio: Option<f64>,
    pub low_mass: f64,
    pub low_bound: f64,
    pub low_ratio: Option<f64>,
}

/// Cone-control and low-frequency terms of one construction, per axis.
///
/// The cone uses `μ` and `μ' = Nyquist/2`; the low-frequency cone has the
/// same aperture and a radius of four lattice steps.
pub fn inequality_rows(params: &ConstructionParams, resolution: usize, mu: f64) -> Result<Vec<InequalityRow>> {
    let c = construct(params)?;
    if c.scene.n != 2 {
        return Err(Error::param("the inequality corpus is planar"));
    }
    let e = exact_energy(&c.scene, 1.0)?;
    let field = rasterize(&c.scene, resolution, 2.0)?.field;
    let mu1 = nyquist(&field) / 2.0;
    let low_radius = 4.0 * 2.0 * std::f64::consts::PI / field.side;
    let id = serde_json::to_string(params)?;
    let cone_rhs = e.elastic / (mu * mu) + e.surface / mu1;
    let mut rows = Vec::new();
    for j in 0..2 {
        let residual = cone_residual(&field, &Cone::new(j, mu, mu1)?, j)?;
        let low = low_frequency_mass(&field, &Cone::new(j, mu, low_radius)?)?;
        let live = field.l1(j) > 0.0;
        rows.push(InequalityRow {
            field_id: id.clone(),
            component: j,
            mu,
            mu1,
            residual,
            cone_rhs,
            cone_ratio: live.then(|| residual / cone_rhs),
            low_mass: low.mass,
            low_bound: low.bound,
            low_ratio: live.then(|| low.mass / low.bound),
        });
    }
    Ok(rows)
}

/// Smallest constant that makes an inequality hold over a corpus, and its
/// stability: the spread of the same fit with one field left out.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantFit {
    pub constant: f64,
    /// `max / min` of the leave-one-out constants.
    pub spread: f64,
    pub samples: usize,
}

pub fn fit_constant(ratios: &[f64]) -> Result<ConstantFit> {
    if ratios.len() < 2 {
        return Err(Error::InsufficientData { needed: 2, got: ratios.len() });
    }
    let mut sorted = ratios.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    // Leaving out the largest ratio gives the smallest fit, anything else
    // leaves the largest in place.
    let (top, second) = (sorted[0], sorted[1]);
    let spread = if second > 0.0 { top / second } else if top > 0.0 { f64::INFINITY } else { 1.0 };
    Ok(ConstantFit { constant: top, spread, samples: ratios.len() })
}
