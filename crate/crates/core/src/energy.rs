//! Exact energies of polytopal scenes, the spectral relaxed elastic energy
//! of grid fields, and the dilation identity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    AdmissibilityReport, GridField, Overlay, Scene, check_admissible_with, overlay,
};
use crate::spectral::{frequency, power_spectrum};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyBreakdown {
    pub elastic: f64,
    pub surface: f64,
    pub epsilon: f64,
    pub total: f64,
    #[serde(rename = "V")]
    pub volume: f64,
    /// Zero-frequency contribution of a spectral evaluation, if any.
    pub k0_term: Option<f64>,
    /// Grid resolution of a spectral evaluation, if any.
    pub resolution: Option<usize>,
}

impl EnergyBreakdown {
    pub fn new(elastic: f64, surface: f64, epsilon: f64, volume: f64) -> Self {
        EnergyBreakdown {
            elastic,
            surface,
            epsilon,
            total: elastic + epsilon * surface,
            volume,
            k0_term: None,
            resolution: None,
        }
    }
}

fn frob_diff_sq(m: &[[f64; 3]; 3], chi: [f64; 3], n: usize) -> f64 {
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { chi[i] } else { 0.0 };
            s += (m[i][j] - target).powi(2);
        }
    }
    s
}

fn frob(a: [f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

/// Elastic and surface energy of a scene from a precomputed overlay,
/// without admissibility checks.
pub fn scene_energy_parts(scene: &Scene, ov: &Overlay) -> Result<(f64, f64, f64)> {
    let mut elastic = 0.0;
    let mut volume = 0.0;
    for c in &scene.cells {
        let vol = c.poly.volume()?;
        elastic += vol * frob_diff_sq(&c.map.grad, scene.chi(c.phase), scene.n);
        if c.phase.is_martensite() {
            volume += vol;
        }
    }
    let mut surface = 0.0;
    for p in &ov.internal {
        let a = scene.chi(scene.cells[p.minus].phase);
        let b = scene.chi(scene.cells[p.plus].phase);
        surface += p.measure * frob([a[0] - b[0], a[1] - b[1], a[2] - b[2]]);
    }
    for p in &ov.boundary {
        surface += p.measure * frob(scene.chi(scene.cells[p.cell].phase));
    }
    Ok((elastic, surface, volume))
}

/// Exact energy together with the admissibility report it was checked
/// against.
pub fn evaluate(scene: &Scene, epsilon: f64) -> Result<(EnergyBreakdown, AdmissibilityReport)> {
    if !(epsilon > 0.0) {
        return Err(Error::param(format!("epsilon must be positive, got {epsilon}")));
    }
    scene.validate()?;
    let ov = overlay(scene);
    let rep = check_admissible_with(scene, &ov);
    let tol = rep.tolerance();
    if rep.max_continuity_jump > tol {
        return Err(Error::Admissibility(format!(
            "u jumps by {:.3e} across a shared face",
            rep.max_continuity_jump
        )));
    }
    if rep.max_boundary_trace > tol {
        return Err(Error::Admissibility(format!(
            "u does not vanish on the domain boundary (max |u| = {:.3e})",
            rep.max_boundary_trace
        )));
    }
    let (elastic, surface, volume) = scene_energy_parts(scene, &ov)?;
    Ok((EnergyBreakdown::new(elastic, surface, epsilon, volume), rep))
}

pub fn exact_energy(scene: &Scene, epsilon: f64) -> Result<EnergyBreakdown> {
    evaluate(scene, epsilon).map(|(e, _)| e)
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralEnergy {
    /// `Σ_j Σ_{ℓ≠j} Σ_{k≠0} (k_ℓ²/|k|²) |χ̂_jj(k)|²`.
    pub elastic: f64,
    /// `Σ_j |χ̂_jj(0)|²`, the mean-strain penalty on the torus.
    pub k0_term: f64,
    /// Largest relative Plancherel defect over components.
    pub parseval_error: f64,
}

pub fn spectral_elastic(field: &GridField) -> Result<SpectralEnergy> {
    let mut elastic = 0.0;
    let mut k0_term = 0.0;
    let mut parseval_error: f64 = 0.0;
    let freqs: Vec<[f64; 3]> = (0..field.len()).map(|i| frequency(field, i)).collect();
    for j in 0..field.n {
        let ps = power_spectrum(field, j)?;
        let mass: f64 = ps.iter().sum();
        let l2 = field.l2_squared(j);
        if l2 > 0.0 {
            parseval_error = parseval_error.max((mass - l2).abs() / l2);
        }
        k0_term += ps[0];
        for (i, p) in ps.iter().enumerate().skip(1) {
            let k = freqs[i];
            let k2: f64 = k.iter().map(|x| x * x).sum();
            elastic += (1.0 - k[j] * k[j] / k2) * p;
        }
    }
    Ok(SpectralEnergy { elastic, k0_term, parseval_error })
}

/// Interface measure of a sampled field: `Σ |χ(x) − χ(x + h e_d)| hⁿ⁻¹`
/// over periodic grid neighbours. Slanted interfaces are overcounted by up
/// to a factor `sqrt(n)`.
pub fn grid_surface(field: &GridField) -> f64 {
    let n = field.n;
    let res = field.resolution;
    let face = field.h().powi(n as i32 - 1);
    let mut total = 0.0;
    for i in 0..field.len() {
        let idx = field.index(i);
        for d in 0..n {
            let mut nb = idx;
            nb[d] = (nb[d] + 1) % res;
            let k = field.flat(nb);
            let jump: f64 = field.components.iter().map(|c| (c[i] - c[k]).powi(2)).sum();
            total += jump.sqrt() * face;
        }
    }
    total
}

/// Breakdown of the dilated pair `(ε u(·/ε), χ(·/ε))`: elastic and volume
/// scale like `εⁿ`, surface like `εⁿ⁻¹`, the surface weight like `ε`.
pub fn rescale_energy(b: &EnergyBreakdown, eps: f64, n: usize) -> Result<EnergyBreakdown> {
    if !(eps > 0.0) {
        return Err(Error::param(format!("epsilon must be positive, got {eps}")));
    }
    let en = eps.powi(n as i32);
    let elastic = b.elastic * en;
    let surface = b.surface * eps.powi(n as i32 - 1);
    let epsilon = b.epsilon * eps;
    Ok(EnergyBreakdown {
        elastic,
        surface,
        epsilon,
        total: elastic + epsilon * surface,
        volume: b.volume * en,
        k0_term: b.k0_term.map(|k| k * en),
        resolution: b.resolution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Affine, CellKind, Polytope};
    use crate::wells::{Family, Phase, make_well_set};

    #[test]
    fn zero_scene_has_zero_energy() {
        let k = make_well_set(&Family::FourWell2d).unwrap();
        let mut s = Scene::new(2, Polytope::rect(0.0, 1.0, 0.0, 1.0), k);
        s.push(Polytope::rect(0.0, 1.0, 0.0, 1.0), Phase::Austenite, CellKind::Macro, Affine::ZERO);
        let e = exact_energy(&s, 1.0).unwrap();
        assert_eq!((e.elastic, e.surface, e.total), (0.0, 0.0, 0.0));
    }

    #[test]
    fn discontinuous_u_is_rejected() {
        let k = make_well_set(&Family::FourWell2d).unwrap();
        let mut s = Scene::new(2, Polytope::rect(0.0, 2.0, 0.0, 1.0), k);
        s.push(Polytope::rect(0.0, 1.0, 0.0, 1.0), Phase::Well(0), CellKind::Laminate, Affine::ZERO);
        let mut m = Affine::ZERO;
        m.offset = [0.1, 0.0, 0.0];
        s.push(Polytope::rect(1.0, 2.0, 0.0, 1.0), Phase::Well(1), CellKind::Laminate, m);
        assert!(matches!(exact_energy(&s, 1.0), Err(Error::Admissibility(_))));
        assert!(matches!(exact_energy(&s, 0.0), Err(Error::Parameter(_))));
    }

    #[test]
    fn rescaling_is_a_group_action() {
        let b = EnergyBreakdown::new(0.25, 4.0 + 2.0 * 5f64.sqrt(), 1.0, 4.0);
        let r = rescale_energy(&b, 0.1, 2).unwrap();
        let expect = 0.01 * (0.25 + 4.0 + 2.0 * 5f64.sqrt());
        assert!((r.total - expect).abs() <= 1e-12 * expect);
        assert!((r.volume - 0.04).abs() < 1e-15);
        let back = rescale_energy(&rescale_energy(&b, 2.0, 2).unwrap(), 0.5, 2).unwrap();
        assert!((back.total - b.total).abs() <= 1e-12 * b.total);
        assert_eq!(rescale_energy(&b, 1.0, 2).unwrap(), b);
        assert!(rescale_energy(&b, -1.0, 2).is_err());
    }

    fn stripes(vary_axis: usize) -> GridField {
        let res = 32;
        let mut f = GridField::zeros(2, res, 4.0);
        for flat in 0..f.len() {
            let idx = f.index(flat);
            f.components[0][flat] = if (idx[vary_axis] / 4) % 2 == 0 { 1.0 } else { -1.0 };
        }
        f
    }

    #[test]
    fn compatible_and_incompatible_stripes() {
        let s = spectral_elastic(&stripes(0)).unwrap();
        assert!(s.elastic.abs() < 1e-10);
        assert!(s.k0_term.abs() < 1e-20);
        let f = stripes(1);
        let s = spectral_elastic(&f).unwrap();
        assert!((s.elastic - f.l2_squared(0)).abs() < 1e-10 * f.l2_squared(0));
        assert!(s.parseval_error < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn rescale_scales_total_by_power(eps in 0.01f64..100.0, el in 0.0f64..10.0, su in 0.0f64..10.0, n in 2usize..=3) {
                let b = EnergyBreakdown::new(el, su, 1.0, 1.0);
                let r = rescale_energy(&b, eps, n).unwrap();
                let expect = eps.powi(n as i32) * b.total;
                prop_assert!((r.total - expect).abs() <= 1e-12 * expect.max(1e-300));
            }
        }
    }
}
