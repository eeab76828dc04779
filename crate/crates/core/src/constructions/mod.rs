//! Upper-bound microstructures as admissible `(scene, u)` pairs together
//! with the closed-form expression their energy is compared against.

mod branching;
mod laminate;
mod simple;
mod tartar;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::constants::BRANCH_THETA;
use crate::error::{Error, Result};
use crate::geometry::Scene;
use crate::wells::{Family, WellSet, make_well_set};

pub use branching::{
    BlockScene, LensBranchLayout, branching_block, double_branch_generations, lens_branch_layout,
    period_count,
};
pub use tartar::{tartar_bound, tartar_scales};

pub(crate) fn lambda_rational(lambda: f64) -> Result<BigRational> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::param(format!("lambda must lie in (0,1), got {lambda}")));
    }
    BigRational::from_float(lambda).ok_or_else(|| Error::param("lambda is not finite"))
}

pub(crate) fn two_well(lambda: f64, n: usize) -> Result<WellSet> {
    make_well_set(&Family::TwoWell { lambda: lambda_rational(lambda)?, n })
}

/// Family and numeric parameters of a construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family")]
pub enum ConstructionParams {
    #[serde(rename = "ball")]
    Ball {
        n: usize,
        lambda: f64,
        #[serde(rename = "V")]
        volume: f64,
    },
    #[serde(rename = "lens21")]
    Lens21 {
        lambda: f64,
        #[serde(rename = "L")]
        l: f64,
        #[serde(rename = "H")]
        h: f64,
    },
    #[serde(rename = "diamond_nd")]
    DiamondNd {
        n: usize,
        #[serde(rename = "L")]
        l: f64,
        #[serde(rename = "H")]
        h: f64,
    },
    #[serde(rename = "branch_rect21")]
    BranchRect21 {
        lambda: f64,
        #[serde(rename = "L")]
        l: f64,
        #[serde(rename = "H")]
        h: f64,
    },
    #[serde(rename = "branch_rect_nd")]
    BranchRectNd {
        n: usize,
        lambda: f64,
        #[serde(rename = "L")]
        l: f64,
        #[serde(rename = "H")]
        h: f64,
    },
    #[serde(rename = "lens_branch_4w")]
    LensBranch4w {
        #[serde(rename = "L")]
        l: f64,
        #[serde(rename = "H")]
        h: f64,
        r: f64,
    },
    #[serde(rename = "double_branch_4w")]
    DoubleBranch4w {
        #[serde(rename = "L")]
        l: f64,
        #[serde(rename = "H")]
        h: f64,
        #[serde(default = "default_theta")]
        theta: f64,
    },
    #[serde(rename = "tartar_k")]
    Tartar {
        #[serde(rename = "L")]
        l: f64,
        #[serde(rename = "H")]
        h: f64,
        r: f64,
        k: usize,
    },
}

fn default_theta() -> f64 {
    BRANCH_THETA
}

pub const FAMILIES: [&str; 8] = [
    "ball",
    "lens21",
    "diamond_nd",
    "branch_rect21",
    "branch_rect_nd",
    "lens_branch_4w",
    "double_branch_4w",
    "tartar_k",
];

impl ConstructionParams {
    pub fn family(&self) -> &'static str {
        match self {
            ConstructionParams::Ball { .. } => "ball",
            ConstructionParams::Lens21 { .. } => "lens21",
            ConstructionParams::DiamondNd { .. } => "diamond_nd",
            ConstructionParams::BranchRect21 { .. } => "branch_rect21",
            ConstructionParams::BranchRectNd { .. } => "branch_rect_nd",
            ConstructionParams::LensBranch4w { .. } => "lens_branch_4w",
            ConstructionParams::DoubleBranch4w { .. } => "double_branch_4w",
            ConstructionParams::Tartar { .. } => "tartar_k",
        }
    }

    pub fn dim(&self) -> usize {
        match *self {
            ConstructionParams::Ball { n, .. }
            | ConstructionParams::DiamondNd { n, .. }
            | ConstructionParams::BranchRectNd { n, .. } => n,
            _ => 2,
        }
    }

    /// Target `|supp χ|`.
    pub fn volume(&self) -> f64 {
        match *self {
            ConstructionParams::Ball { volume, .. } => volume,
            ConstructionParams::Lens21 { l, h, .. } | ConstructionParams::LensBranch4w { l, h, .. } => {
                l * h / 2.0
            }
            ConstructionParams::DiamondNd { n, l, h } => simple::diamond_volume(n, l, h),
            ConstructionParams::BranchRect21 { l, h, .. }
            | ConstructionParams::DoubleBranch4w { l, h, .. }
            | ConstructionParams::Tartar { l, h, .. } => l * h,
            ConstructionParams::BranchRectNd { n, l, h, .. } => l * h.powi(n as i32 - 1),
        }
    }

    /// Closed-form bound expression, without its constant.
    pub fn bound(&self) -> f64 {
        match *self {
            ConstructionParams::Ball { n, volume, .. } => {
                volume + volume.powf((n as f64 - 1.0) / n as f64)
            }
            ConstructionParams::Lens21 { l, h, .. } | ConstructionParams::BranchRect21 { l, h, .. } => {
                l.powi(3) / h + h
            }
            ConstructionParams::DiamondNd { n, l, h } => {
                l.powi(3) * h.powi(n as i32 - 3) + h.powi(n as i32 - 1)
            }
            ConstructionParams::BranchRectNd { n, l, h, .. } => {
                (l.powi(3) / h + h) * h.powi(n as i32 - 2)
            }
            ConstructionParams::LensBranch4w { l, h, r } => {
                r * l + h + l.powi(3) / h + r * r * h / l + h * l / r
            }
            ConstructionParams::DoubleBranch4w { l, h, .. } => h * l.cbrt() + l.powi(3) / h,
            ConstructionParams::Tartar { l, h, r, k } => tartar_bound(l, h, r, k),
        }
    }

    pub fn build(&self) -> Result<Construction> {
        let (scene, info) = match *self {
            ConstructionParams::Ball { n, lambda, volume } => {
                (simple::ball(n, lambda, volume)?, Default::default())
            }
            ConstructionParams::Lens21 { lambda, l, h } => {
                (simple::lens21(lambda, l, h)?, Default::default())
            }
            ConstructionParams::DiamondNd { n, l, h } => (simple::diamond(n, l, h)?, Default::default()),
            ConstructionParams::BranchRect21 { lambda, l, h } => branching::branch_rect21(lambda, l, h)?,
            ConstructionParams::BranchRectNd { n, lambda, l, h } => {
                branching::branch_rect_nd(n, lambda, l, h)?
            }
            ConstructionParams::LensBranch4w { l, h, r } => branching::lens_branch_4w(l, h, r)?,
            ConstructionParams::DoubleBranch4w { l, h, theta } => {
                branching::double_branch_4w(l, h, theta)?
            }
            ConstructionParams::Tartar { l, h, r, k } => tartar::tartar(l, h, r, k)?,
        };
        Ok(Construction { params: self.clone(), volume: self.volume(), bound: self.bound(), info, scene })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Construction {
    pub params: ConstructionParams,
    /// Target support volume.
    #[serde(rename = "V")]
    pub volume: f64,
    /// Value of the bound expression.
    pub bound: f64,
    /// Family-specific diagnostics (period counts, generation counts, ...).
    pub info: std::collections::BTreeMap<String, f64>,
    pub scene: Scene,
}

pub fn construct(params: &ConstructionParams) -> Result<Construction> {
    params.build()
}
