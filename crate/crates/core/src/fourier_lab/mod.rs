//! Cone decomposition of phase-indicator spectra, the low-frequency and
//! commutator inequalities, and the μ-balance that yields lower-bound
//! exponents.

use num_rational::Rational64;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::{COMMUTATOR_M, TARTAR_C0};
use crate::error::{Error, Result};
use crate::geometry::GridField;
use crate::spectral::{check_resolution, fft_nd, frequency};
use crate::wells::Polynomial;

mod corpus;

pub use corpus::{ConstantFit, InequalityRow, fit_constant, inequality_corpus, inequality_rows};

/// `C_{j,μ,μ'} = {k : Σ_{ℓ≠j} k_ℓ² ≤ μ²|k|², |k| ≤ μ'}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub axis: usize,
    pub mu: f64,
    pub radius: f64,
}

impl Cone {
    pub fn new(axis: usize, mu: f64, radius: f64) -> Result<Self> {
        if !(mu > 0.0 && mu <= 1.0) {
            return Err(Error::param(format!("cone aperture must lie in (0,1], got {mu}")));
        }
        if !(radius > 0.0) {
            return Err(Error::param(format!("cone radius must be positive, got {radius}")));
        }
        Ok(Cone { axis, mu, radius })
    }

    /// Sharp membership; `k = 0` is inside.
    pub fn contains(&self, k: [f64; 3]) -> bool {
        let k2: f64 = k.iter().map(|x| x * x).sum();
        let perp = k2 - k[self.axis] * k[self.axis];
        perp <= self.mu * self.mu * k2 && k2 <= self.radius * self.radius
    }
}

fn spectrum(field: &GridField, values: &[f64]) -> Result<Vec<f64>> {
    check_resolution(field.resolution)?;
    let mut buf: Vec<Complex64> = values.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_nd(&mut buf, field.n, field.resolution);
    let norm = field.cell_volume() / field.len() as f64;
    Ok(buf.iter().map(|c| c.norm_sqr() * norm).collect())
}

fn check_cone(field: &GridField, cone: &Cone, j: usize) -> Result<()> {
    if j >= field.n || cone.axis >= field.n {
        return Err(Error::DimensionMismatch { expected: field.n, got: j.max(cone.axis) + 1 });
    }
    Ok(())
}

/// Spectral mass of one component split by a cone.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeSplit {
    pub inside: f64,
    pub residual: f64,
    /// `∫ |χ_jj|²` on the grid.
    pub total: f64,
}

fn split_values(field: &GridField, values: &[f64], cone: &Cone) -> Result<ConeSplit> {
    let ps = spectrum(field, values)?;
    let mut inside = 0.0;
    let mut residual = 0.0;
    for (i, p) in ps.iter().enumerate() {
        if cone.contains(frequency(field, i)) {
            inside += p;
        } else {
            residual += p;
        }
    }
    let total = values.iter().map(|x| x * x).sum::<f64>() * field.cell_volume();
    Ok(ConeSplit { inside, residual, total })
}

pub fn cone_split(field: &GridField, cone: &Cone, j: usize) -> Result<ConeSplit> {
    check_cone(field, cone, j)?;
    split_values(field, &field.components[j], cone)
}

/// `Σ_{k ∉ cone} |χ̂_jj(k)|²`.
pub fn cone_residual(field: &GridField, cone: &Cone, j: usize) -> Result<f64> {
    cone_split(field, cone, j).map(|s| s.residual)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowFrequency {
    /// `Σ_k w_k |φ̂(k)|²` with `w_k` the fraction of the frequency cell
    /// around `k` that lies in the cone.
    pub mass: f64,
    /// Unweighted `Σ_{k ∈ cone} |φ̂(k)|²`.
    pub sharp_mass: f64,
    /// `8 ‖φ‖²_{L¹} (μ')ⁿ μ^{n−1}`.
    pub bound: f64,
}

const CELL_SAMPLES: usize = 8;

/// Fraction of the frequency cell of side `dk` centred at `k` inside the cone.
fn cell_weight(cone: &Cone, k: [f64; 3], dk: f64, n: usize) -> f64 {
    let s = CELL_SAMPLES;
    let total = s.pow(n as u32);
    let mut hits = 0usize;
    for t in 0..total {
        let mut q = [0.0; 3];
        let mut rest = t;
        for (d, qd) in q.iter_mut().enumerate().take(n) {
            let i = rest % s;
            rest /= s;
            *qd = k[d] + dk * ((i as f64 + 0.5) / s as f64 - 0.5);
        }
        let k2: f64 = q.iter().map(|x| x * x).sum();
        let perp = k2 - q[cone.axis] * q[cone.axis];
        if perp <= cone.mu * cone.mu * k2 && k2 <= cone.radius * cone.radius {
            hits += 1;
        }
    }
    hits as f64 / total as f64
}

/// Low-frequency mass of `φ = χ_jj` with `j` the cone axis.
pub fn low_frequency_mass(field: &GridField, cone: &Cone) -> Result<LowFrequency> {
    check_cone(field, cone, cone.axis)?;
    let values = &field.components[cone.axis];
    let n = field.n;
    let l1 = field.l1(cone.axis);
    let bound = 8.0 * l1 * l1 * cone.radius.powi(n as i32) * cone.mu.powi(n as i32 - 1);
    if l1 == 0.0 {
        return Ok(LowFrequency { mass: 0.0, sharp_mass: 0.0, bound });
    }
    let ps = spectrum(field, values)?;
    let dk = 2.0 * std::f64::consts::PI / field.side;
    let reach = cone.radius + dk * (n as f64).sqrt();
    let mut mass = 0.0;
    let mut sharp_mass = 0.0;
    for (i, p) in ps.iter().enumerate() {
        let k = frequency(field, i);
        if cone.contains(k) {
            sharp_mass += p;
        }
        if k.iter().map(|x| x * x).sum::<f64>().sqrt() <= reach {
            mass += p * cell_weight(cone, k, dk, n);
        }
    }
    Ok(LowFrequency { mass, sharp_mass, bound })
}

/// `ψ_γ(z) = max(z, z^{1−γ})`.
pub fn psi_gamma(z: f64, gamma: f64) -> f64 {
    z.max(z.powf(1.0 - gamma))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorReport {
    /// Residual of the target component at `(μ, μ̃ = M μ μ'')`.
    pub lhs: f64,
    /// `[ψ_γ(residual of the source at (μ, μ'')), residual of the target at (μ, μ')]`.
    pub rhs_terms: [f64; 2],
    pub refined_radius: f64,
    /// `lhs / (rhs₁ + rhs₂)`, absent when both sides vanish.
    pub ratio: Option<f64>,
}

/// Cone parameters of a commutator probe.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRadii {
    pub mu: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub gamma: f64,
}

/// Largest pointwise defect `|χ_to − p(Σ χ_from)|` over grid samples.
pub fn relation_defect(field: &GridField, from: &[usize], to: usize, p: &Polynomial) -> Result<f64> {
    if from.iter().chain([&to]).any(|&c| c >= field.n) {
        return Err(Error::DimensionMismatch { expected: field.n, got: to.max(*from.iter().max().unwrap_or(&0)) + 1 });
    }
    let mut worst: f64 = 0.0;
    for i in 0..field.len() {
        let t: f64 = from.iter().map(|&c| field.components[c][i]).sum();
        worst = worst.max((field.components[to][i] - p.eval_f64(t)).abs());
    }
    Ok(worst)
}

/// Cone concentration of `χ_from` transferred to `χ_to = p(χ_from)`; the
/// cones share the axis of the first source component.
pub fn commutator_probe(
    field: &GridField,
    from: &[usize],
    to: usize,
    p: &Polynomial,
    radii: ProbeRadii,
) -> Result<CommutatorReport> {
    if from.is_empty() {
        return Err(Error::param("relation needs at least one source component"));
    }
    let defect = relation_defect(field, from, to, p)?;
    if defect > 1e-9 {
        return Err(Error::Precondition(format!(
            "relation does not hold on the field (max defect {defect:.3e})"
        )));
    }
    let ProbeRadii { mu, mu1, mu2, gamma } = radii;
    let tilde = COMMUTATOR_M * mu * mu2;
    if !(tilde > 0.0 && tilde <= mu2 && mu2 <= mu1) {
        return Err(Error::param(format!(
            "need 0 < M mu mu'' <= mu'' <= mu', got mu = {mu}, mu' = {mu1}, mu'' = {mu2}"
        )));
    }
    let axis = from[0];
    let source: Vec<f64> = (0..field.len()).map(|i| from.iter().map(|&c| field.components[c][i]).sum()).collect();
    let target = &field.components[to];
    let lhs = split_values(field, target, &Cone::new(axis, mu, tilde)?)?.residual;
    let r1 = split_values(field, &source, &Cone::new(axis, mu, mu2)?)?.residual;
    let r2 = split_values(field, target, &Cone::new(axis, mu, mu1)?)?.residual;
    let rhs_terms = [psi_gamma(r1, gamma), r2];
    let den = rhs_terms[0] + rhs_terms[1];
    let ratio = if den > 0.0 { Some(lhs / den) } else if lhs > 0.0 { Some(f64::INFINITY) } else { None };
    Ok(CommutatorReport { lhs, rhs_terms, refined_radius: tilde, ratio })
}

/// `(nm + 2n − 3)/(nm + 2n − 1)`.
pub fn lower_exponent(n: usize, m: usize) -> Result<Rational64> {
    if n < 2 || m < 1 {
        return Err(Error::param(format!("need n >= 2 and m >= 1, got n = {n}, m = {m}")));
    }
    let (n, m) = (n as i64, m as i64);
    Ok(Rational64::new(n * m + 2 * n - 3, n * m + 2 * n - 1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConeOptimum {
    pub n: usize,
    pub m: usize,
    #[serde(rename = "V")]
    pub volume: f64,
    pub mu: f64,
    pub mu2: f64,
    /// `μ_m = μ^{m−1} μ₂`.
    pub mu_m: f64,
    /// `V (1 − μ^{n−1} μ_mⁿ V) / (μ^{−2} + μ₂^{−1})`.
    pub lower_bound: f64,
    /// Log-slope of the lower bound between `V` and `10 V`.
    pub exponent: f64,
    pub predicted: f64,
}

/// Log of the implied energy lower bound at `(log μ, log μ₂)`.
fn implied(n: usize, m: usize, lv: f64, a: f64, b: f64) -> f64 {
    let (nf, mf) = (n as f64, m as f64);
    let lx = (nf - 1.0) * a + nf * ((mf - 1.0) * a + b) + lv;
    if lx >= 0.0 {
        return f64::NEG_INFINITY;
    }
    let keep = (-lx.exp()).ln_1p();
    lv + keep - ((-2.0 * a).exp() + (-b).exp()).ln()
}

fn maximize(n: usize, m: usize, lv: f64) -> (f64, f64, f64) {
    const LO: f64 = -40.0;
    const STEPS: usize = 160;
    let step = -LO / STEPS as f64;
    let mut best = (LO, LO, f64::NEG_INFINITY);
    for i in 0..STEPS {
        for j in 0..STEPS {
            let (a, b) = (LO + (i as f64 + 0.5) * step, LO + (j as f64 + 0.5) * step);
            let f = implied(n, m, lv, a, b);
            if f > best.2 {
                best = (a, b, f);
            }
        }
    }
    let (mut a, mut b, mut f) = best;
    let mut width = step;
    for _ in 0..200 {
        let before = f;
        let (na, fa) = golden_max(a - width, (a + width).min(0.0), |x| implied(n, m, lv, x, b));
        if fa > f {
            a = na;
            f = fa;
        }
        let (nb, fb) = golden_max(b - width, (b + width).min(0.0), |y| implied(n, m, lv, a, y));
        if fb > f {
            b = nb;
            f = fb;
        }
        if f - before < 1e-15 {
            width *= 0.5;
            if width < 1e-12 {
                break;
            }
        }
    }
    (a, b, f)
}

fn golden_max(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..60 {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = f(d);
        }
    }
    if fc >= fd { (c, fc) } else { (d, fd) }
}

/// Cone parameters maximizing the implied energy lower bound at volume `V`.
pub fn optimize_cone_parameters(n: usize, m: usize, v: f64) -> Result<ConeOptimum> {
    let predicted = lower_exponent(n, m)?;
    if !(v > 1.0) {
        return Err(Error::OutOfRegime(format!("cone balance needs V > 1 (small volumes are isoperimetric), got {v}")));
    }
    let lv = v.ln();
    let (a, b, f) = maximize(n, m, lv);
    let (_, _, f10) = maximize(n, m, lv + 10f64.ln());
    let exponent = (f10 - f) / 10f64.ln();
    let predicted = *predicted.numer() as f64 / *predicted.denom() as f64;
    if (exponent - predicted).abs() > 0.01 {
        return Err(Error::InconsistentData(format!(
            "recovered exponent {exponent} differs from {predicted} for n = {n}, m = {m}"
        )));
    }
    let (mu, mu2) = (a.exp(), b.exp());
    Ok(ConeOptimum {
        n,
        m,
        volume: v,
        mu,
        mu2,
        mu_m: mu.powi(m as i32 - 1) * mu2,
        lower_bound: f.exp(),
        exponent,
        predicted,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TartarLowerForm {
    #[serde(rename = "V")]
    pub volume: f64,
    pub c0: f64,
    /// Minimizing even iteration count.
    pub m_star: usize,
    /// `V^{(2m−1)/(2m+1)} C₀^{−m}` at `m*`.
    pub bound: f64,
    /// `log(V / bound) / sqrt(log V)`.
    pub c_local: f64,
}

/// Iterated-commutator bound `V ≲ C₀^m V^{2/(2m+1)} Ê` optimized over even `m ≤ 64`.
pub fn tartar_lower_form(v: f64, c0: f64) -> Result<TartarLowerForm> {
    if !(v > 1.0) {
        return Err(Error::OutOfRegime(format!("need V > 1, got {v}")));
    }
    if !(c0 > 1.0) {
        return Err(Error::param(format!("need C0 > 1, got {c0}")));
    }
    let lv = v.ln();
    let log_bound = |m: usize| {
        let mf = m as f64;
        (2.0 * mf - 1.0) / (2.0 * mf + 1.0) * lv - mf * c0.ln()
    };
    let m_star = (2..=64).step_by(2).max_by(|&x, &y| log_bound(x).total_cmp(&log_bound(y))).unwrap_or(2);
    let lb = log_bound(m_star);
    Ok(TartarLowerForm { volume: v, c0, m_star, bound: lb.exp(), c_local: (lv - lb) / lv.sqrt() })
}

/// Default-constant form.
pub fn tartar_lower_form_default(v: f64) -> Result<TartarLowerForm> {
    tartar_lower_form(v, TARTAR_C0)
}

/// Stationary point `sqrt(log V / log C₀) − 1/2` of the continuous balance.
pub fn tartar_balance_m(v: f64, c0: f64) -> f64 {
    (v.ln() / c0.ln()).sqrt() - 0.5
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cone_membership() {
        let c = Cone::new(0, 0.5, 10.0).unwrap();
        assert!(c.contains([0.0; 3]));
        assert!(c.contains([3.0, 1.0, 0.0]));
        assert!(!c.contains([1.0, 3.0, 0.0]));
        assert!(!c.contains([11.0, 0.0, 0.0]));
        assert!(Cone::new(0, 0.0, 1.0).is_err());
    }

    #[test]
    fn implied_matches_closed_form_scaling() {
        let (a0, b0, _) = maximize(2, 1, 1e6f64.ln());
        let (a1, b1, _) = maximize(2, 1, 1e12f64.ln());
        let dl = 1e6f64.ln();
        assert!(((a1 - a0) / dl + 0.2).abs() < 0.01);
        assert!(((b1 - b0) / (a1 - a0) - 2.0).abs() < 0.02);
    }
}
