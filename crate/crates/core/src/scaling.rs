//! Volume sweeps with per-volume parameter optimization, power-law and
//! stretched-exponential fits, and the table of predicted exponents.

use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{BRANCH_THETA, TARTAR_C, TARTAR_C1};
use crate::constructions::{ConstructionParams, FAMILIES, construct};
use crate::energy::{EnergyBreakdown, exact_energy};
use crate::error::{Error, Result};
use crate::fourier_lab::lower_exponent;

/// Optimizer budget and fixed family parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SweepConfig {
    /// Coordinate-descent rounds.
    pub rounds: usize,
    /// Golden-section steps per coordinate.
    pub steps: usize,
    /// Half-width, in natural log, of the search interval around the start.
    pub span: f64,
    pub lambda: f64,
    /// Dimension for `ball`, `diamond_nd` and `branch_rect_nd`.
    pub n: Option<usize>,
    pub theta: f64,
    /// Laminate order rule `k = round(c₁ sqrt(log L))` for `tartar_k`.
    pub tartar_c1: f64,
    /// Recorded for reproducibility; the optimizer is deterministic.
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            rounds: 3,
            steps: 20,
            span: 4f64.ln(),
            lambda: 0.5,
            n: None,
            theta: BRANCH_THETA,
            tartar_c1: TARTAR_C1,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Row {
    #[serde(rename = "V")]
    pub volume: f64,
    pub params: ConstructionParams,
    #[serde(rename = "E_el")]
    pub elastic: f64,
    #[serde(rename = "E_surf")]
    pub surface: f64,
    #[serde(rename = "E_total")]
    pub total: f64,
    pub admissible: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Failure {
    #[serde(rename = "V")]
    pub volume: f64,
    pub error: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    Power,
    StretchedLog,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub model: Model,
    /// Exponent of the power law, or `C` of `V exp(−C sqrt(log V))`.
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub max_residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingReport {
    pub family: String,
    pub well_set: String,
    pub rows: Vec<Row>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<Failure>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub fits: Vec<Fit>,
}

fn well_set_name(family: &str) -> &'static str {
    match family {
        "ball" | "lens21" | "branch_rect21" | "branch_rect_nd" => "two_well",
        "diamond_nd" => "symmetric_pair",
        "lens_branch_4w" | "double_branch_4w" => "four_well_2d",
        _ => "tartar",
    }
}

/// Free parameters of a family at fixed volume, in log space.
struct Template<'a> {
    family: &'a str,
    cfg: &'a SweepConfig,
}

/// Strictly inside `(lo, hi)` in log space.
fn inside(lo: f64, hi: f64) -> (f64, f64) {
    let pad = 1e-9 * (1.0 + lo.abs().max(hi.abs()));
    (lo + pad, hi - pad)
}

impl Template<'_> {
    fn dim(&self, default: usize) -> usize {
        self.cfg.n.unwrap_or(default)
    }

    fn tartar_order(&self, l: f64) -> usize {
        ((self.cfg.tartar_c1 * l.ln().max(0.0).sqrt()).round() as usize).max(1)
    }

    /// Start point and per-coordinate search bounds (both in log space).
    fn start(&self, v: f64) -> Result<(Vec<f64>, Vec<(f64, f64)>)> {
        let lv = v.ln();
        let span = self.cfg.span;
        let around = |x0: f64, lo: f64, hi: f64| -> (f64, f64) {
            let (lo, hi) = inside(lo, hi);
            ((x0 - span).max(lo), (x0 + span).min(hi))
        };
        Ok(match self.family {
            "ball" => (vec![], vec![]),
            // V = LH/2 and LH: L ~ H^{2/3}.
            "lens21" | "branch_rect21" | "double_branch_4w" => {
                let c = if self.family == "lens21" { 2f64.ln() } else { 0.0 };
                let expo = if self.family == "double_branch_4w" { 4.0 / 7.0 } else { 3.0 / 5.0 };
                let x0 = expo * (lv + c);
                (vec![x0], vec![around(x0, 0.5 * (lv + c), lv + c)])
            }
            "diamond_nd" => {
                let n = self.dim(3) as f64;
                // V = K L H^{n−1} with K = 2/n!·(1/2)^{n−1}.
                let lk = diamond_log_k(n);
                let x0 = (lv - lk) / (n - 1.0 + 2.0 / 3.0);
                // H ≥ L ⇔ n log H ≥ log V − log K; L > 1 ⇔ (n−1) log H < log V − log K.
                (vec![x0], vec![around(x0, (lv - lk) / n, (lv - lk) / (n - 1.0))])
            }
            "branch_rect_nd" => {
                let n = self.dim(3) as f64;
                let x0 = lv / (n - 1.0 + 2.0 / 3.0);
                (vec![x0], vec![around(x0, lv / n, lv / (n - 1.0))])
            }
            "lens_branch_4w" => {
                let ll = 3.0 / 7.0 * (lv + 2f64.ln());
                let lh = lv + 2f64.ln() - ll;
                // r ~ L^{2/3}, kept below the first rectangle's aspect limit L/8.
                let lr = (2.0 / 3.0 * ll).min(ll - 8f64.ln() - 0.05);
                (
                    vec![lh, lr],
                    vec![around(lh, 0.5 * (lv + 2f64.ln()), lv + 2f64.ln()), (lr - span, lr + span)],
                )
            }
            "tartar_k" => {
                let l = v.sqrt();
                let k = self.tartar_order(l) as f64;
                let hi = (TARTAR_C * l).ln();
                if !(hi > 0.0) {
                    return Err(Error::Infeasible { volume: v, constraint: "r <= c H needs c L > 1".into() });
                }
                // r_k >= 1 where the cap allows it; below that the search
                // still covers a factor 4 under the cap.
                let lo = ((k - 1.0) / k * l.ln()).min(hi - 4f64.ln());
                let x0 = (k / (k + 1.0) * l.ln()).clamp(lo, hi);
                (vec![x0], vec![inside(lo, hi)])
            }
            other => return Err(Error::UnknownFamily(other.to_string())),
        })
    }

    fn params(&self, v: f64, x: &[f64]) -> ConstructionParams {
        let lambda = self.cfg.lambda;
        match self.family {
            "ball" => ConstructionParams::Ball { n: self.dim(2), lambda, volume: v },
            "lens21" => {
                let h = x[0].exp();
                ConstructionParams::Lens21 { lambda, l: 2.0 * v / h, h }
            }
            "branch_rect21" => {
                let h = x[0].exp();
                ConstructionParams::BranchRect21 { lambda, l: v / h, h }
            }
            "double_branch_4w" => {
                let h = x[0].exp();
                ConstructionParams::DoubleBranch4w { l: v / h, h, theta: self.cfg.theta }
            }
            "diamond_nd" => {
                let n = self.dim(3);
                let h = x[0].exp();
                let l = (v.ln() - diamond_log_k(n as f64) - (n as f64 - 1.0) * x[0]).exp();
                ConstructionParams::DiamondNd { n, l, h }
            }
            "branch_rect_nd" => {
                let n = self.dim(3);
                let h = x[0].exp();
                ConstructionParams::BranchRectNd { n, lambda, l: v / h.powi(n as i32 - 1), h }
            }
            "lens_branch_4w" => {
                let h = x[0].exp();
                ConstructionParams::LensBranch4w { l: 2.0 * v / h, h, r: x[1].exp() }
            }
            _ => {
                let l = v.sqrt();
                ConstructionParams::Tartar { l, h: l, r: x[0].exp(), k: self.tartar_order(l) }
            }
        }
    }
}

fn diamond_log_k(n: f64) -> f64 {
    let fact: f64 = (1..=n as usize).map(|i| i as f64).product();
    (2f64.powf(n) / fact).ln() - n * 2f64.ln()
}

fn evaluate_params(p: &ConstructionParams) -> Result<EnergyBreakdown> {
    let c = construct(p)?;
    exact_energy(&c.scene, 1.0)
}

const SCAN: usize = 8;

/// Golden-section minimization of `f` on `[a, b]`; returns the best point
/// seen, or `None` when every probe was infeasible.
fn golden(mut a: f64, mut b: f64, steps: usize, f: &mut impl FnMut(f64) -> f64) -> Option<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut best: Option<(f64, f64)> = None;
    let note = |x: f64, y: f64, best: &mut Option<(f64, f64)>| {
        if y.is_finite() && best.is_none_or(|(_, by)| y < by) {
            *best = Some((x, y));
        }
    };
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    note(c, fc, &mut best);
    note(d, fd, &mut best);
    for _ in 0..steps {
        // Ties, including two infeasible probes, shrink toward the left;
        // only feasible points are ever reported.
        if fc <= fd || (fc.is_infinite() && fd.is_infinite()) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
            note(c, fc, &mut best);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
            note(d, fd, &mut best);
        }
    }
    best
}

/// Best admissible parameters at volume `v`.
pub fn optimize_params(family: &str, v: f64, cfg: &SweepConfig) -> Result<(ConstructionParams, EnergyBreakdown)> {
    if !FAMILIES.contains(&family) {
        return Err(Error::UnknownFamily(family.to_string()));
    }
    if family != "ball" && !(v > 1.0) {
        return Err(Error::OutOfRegime(format!("{family} sweeps need V > 1, got {v}")));
    }
    if !(v > 0.0) {
        return Err(Error::param(format!("V must be positive, got {v}")));
    }
    let t = Template { family, cfg };
    let (mut x, bounds) = t.start(v)?;
    let mut last_err: Option<Error> = None;
    let objective = |x: &[f64], last_err: &mut Option<Error>| -> f64 {
        match evaluate_params(&t.params(v, x)) {
            Ok(e) => e.total,
            Err(e) => {
                *last_err = Some(e);
                f64::INFINITY
            }
        }
    };
    let mut best = objective(&x, &mut last_err);
    let rounds = if x.len() <= 1 { 1 } else { cfg.rounds };
    for _ in 0..rounds {
        for i in 0..x.len() {
            let (lo, hi) = bounds[i];
            let mut probe = x.clone();
            // Coarse scan first: the objective jumps where discrete
            // period and generation counts change.
            let width = (hi - lo) / SCAN as f64;
            let mut scan_best = (x[i], best);
            for s in 0..=SCAN {
                let xi = lo + s as f64 * width;
                probe[i] = xi;
                let y = objective(&probe, &mut last_err);
                if y < scan_best.1 {
                    scan_best = (xi, y);
                }
            }
            if scan_best.1 < best {
                best = scan_best.1;
                x[i] = scan_best.0;
            }
            let (lo, hi) = ((x[i] - width).max(lo), (x[i] + width).min(hi));
            let found = golden(lo, hi, cfg.steps, &mut |xi| {
                probe[i] = xi;
                objective(&probe, &mut last_err)
            });
            if let Some((xi, y)) = found {
                if y < best {
                    best = y;
                    x[i] = xi;
                }
            }
        }
    }
    if !best.is_finite() {
        let why = last_err.map(|e| e.to_string()).unwrap_or_else(|| "no feasible parameters".into());
        return Err(Error::Infeasible { volume: v, constraint: why });
    }
    let p = t.params(v, &x);
    let e = evaluate_params(&p)?;
    Ok((p, e))
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::param("empty V grid"));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("V grid must be strictly increasing"));
    }
    Ok(())
}

fn run_rows(family: &str, grid: &[f64], cfg: &SweepConfig) -> Result<Vec<Result<Row>>> {
    check_grid(grid)?;
    if !FAMILIES.contains(&family) {
        return Err(Error::UnknownFamily(family.to_string()));
    }
    Ok(grid
        .par_iter()
        .map(|&v| {
            optimize_params(family, v, cfg).map(|(params, e)| Row {
                volume: v,
                params,
                elastic: e.elastic,
                surface: e.surface,
                total: e.total,
                admissible: true,
            })
        })
        .collect())
}

/// One optimized row per volume; the first infeasible volume aborts.
pub fn sweep(family: &str, grid: &[f64], cfg: &SweepConfig) -> Result<ScalingReport> {
    let rows = run_rows(family, grid, cfg)?.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ScalingReport {
        family: family.to_string(),
        well_set: well_set_name(family).to_string(),
        rows,
        failures: vec![],
        fits: vec![],
    })
}

/// Like [`sweep`], but infeasible volumes are recorded and skipped.
pub fn sweep_lenient(family: &str, grid: &[f64], cfg: &SweepConfig) -> Result<ScalingReport> {
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (v, r) in grid.iter().zip(run_rows(family, grid, cfg)?) {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(Failure { volume: *v, error: e.to_string() }),
        }
    }
    Ok(ScalingReport {
        family: family.to_string(),
        well_set: well_set_name(family).to_string(),
        rows,
        failures,
        fits: vec![],
    })
}

/// Decade grid `10^a, 10^{a+step}, …, 10^b`.
pub fn decades(a: f64, b: f64, per_decade: usize) -> Vec<f64> {
    let k = ((b - a) * per_decade as f64).round() as usize;
    (0..=k).map(|i| 10f64.powf(a + i as f64 / per_decade as f64)).collect()
}

fn ols(x: &[f64], y: &[f64]) -> (f64, f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let max_res = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).abs()).fold(0.0, f64::max);
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    (slope, intercept, r2, max_res)
}

/// OLS of `log E` on `log V`.
pub fn power_fit(points: &[(f64, f64)]) -> Result<Fit> {
    if points.len() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: points.len() });
    }
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept, r2, max_residual) = ols(&x, &y);
    Ok(Fit { model: Model::Power, slope, intercept, r2, max_residual })
}

/// OLS of `log(V/E)` on `sqrt(log V)`.
pub fn stretched_fit(points: &[(f64, f64)]) -> Result<Fit> {
    if points.len() < 5 {
        return Err(Error::InsufficientData { needed: 5, got: points.len() });
    }
    if let Some(p) = points.iter().find(|p| !(p.0 > 1.0)) {
        return Err(Error::OutOfRegime(format!("stretched fit needs V > 1, got {}", p.0)));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0.ln().sqrt()).collect();
    let y: Vec<f64> = points.iter().map(|p| (p.0 / p.1).ln()).collect();
    let (slope, intercept, r2, max_residual) = ols(&x, &y);
    Ok(Fit { model: Model::StretchedLog, slope, intercept, r2, max_residual })
}

/// OLS of `log(V/E)` on `log V`: the power-law model scored on the same
/// response as [`stretched_fit`], so the two `R²` values are comparable.
pub fn deficit_power_fit(points: &[(f64, f64)]) -> Result<Fit> {
    if points.len() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: points.len() });
    }
    let x: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let y: Vec<f64> = points.iter().map(|p| (p.0 / p.1).ln()).collect();
    let (slope, intercept, r2, max_residual) = ols(&x, &y);
    Ok(Fit { model: Model::Power, slope, intercept, r2, max_residual })
}

fn points(report: &ScalingReport, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    report.rows.iter().filter(|r| r.volume >= lo && r.volume <= hi).map(|r| (r.volume, r.total)).collect()
}

pub fn fit_power_law(report: &ScalingReport, v_min: f64, v_max: f64) -> Result<Fit> {
    power_fit(&points(report, v_min, v_max))
}

pub fn fit_stretched_log(report: &ScalingReport) -> Result<Fit> {
    stretched_fit(&points(report, f64::NEG_INFINITY, f64::INFINITY))
}

/// `(V, x)` log-slope of a scalar extracted from each row's parameters.
pub fn parameter_slope(report: &ScalingReport, f: impl Fn(&ConstructionParams) -> f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = report.rows.iter().map(|r| (r.volume, f(&r.params))).collect();
    power_fit(&pts).map(|fit| fit.slope)
}

/// Flat CSV with one column per construction parameter.
pub fn to_csv(report: &ScalingReport) -> Result<String> {
    let mut names: Vec<String> = Vec::new();
    let mut values: Vec<serde_json::Map<String, serde_json::Value>> = Vec::new();
    for r in &report.rows {
        let serde_json::Value::Object(mut m) = serde_json::to_value(&r.params)? else {
            return Err(Error::InconsistentData("parameters are not an object".into()));
        };
        m.remove("family");
        m.remove("V");
        for k in m.keys() {
            if !names.contains(k) {
                names.push(k.clone());
            }
        }
        values.push(m);
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["V".to_string()];
    header.extend(names.iter().cloned());
    header.extend(["E_el", "E_surf", "E_total", "admissible"].map(String::from));
    w.write_record(&header).map_err(csv_err)?;
    for (r, m) in report.rows.iter().zip(&values) {
        let mut rec = vec![format!("{:e}", r.volume)];
        for k in &names {
            rec.push(m.get(k).map(|v| v.to_string()).unwrap_or_default());
        }
        rec.extend([
            format!("{:e}", r.elastic),
            format!("{:e}", r.surface),
            format!("{:e}", r.total),
            r.admissible.to_string(),
        ]);
        w.write_record(&rec).map_err(csv_err)?;
    }
    for f in &report.failures {
        let mut rec = vec![format!("{:e}", f.volume)];
        rec.extend(names.iter().map(|_| String::new()));
        rec.extend(["", "", "", "false"].map(String::from));
        w.write_record(&rec).map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Format(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Format(e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// What a prediction is keyed on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictKey {
    Family { family: String, n: Option<usize> },
    Chain { n: usize, m: usize },
    OnePlusOne { n: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Theorem,
    Conjecture,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub n: usize,
    /// Exponent of `V` for `V ≤ 1`.
    pub small_volume: Rational64,
    /// Exponent of `V` for `V > 1`; absent for the stretched law.
    pub large_volume: Option<Rational64>,
    /// `n (1 − large_volume)`.
    pub epsilon_exponent: Option<Rational64>,
    /// `"power"` or `"V exp(-C sqrt(log V))"`.
    pub law: String,
    pub status: Status,
}

fn power(n: usize, large: Rational64, status: Status) -> Prediction {
    let nn = Rational64::from_integer(n as i64);
    Prediction {
        n,
        small_volume: (nn - 1) / nn,
        large_volume: Some(large),
        epsilon_exponent: Some(nn * (Rational64::from_integer(1) - large)),
        law: "power".into(),
        status,
    }
}

pub fn predicted_scaling(key: &PredictKey) -> Result<Prediction> {
    match key {
        PredictKey::Family { family, n } => {
            let (dim, m) = match family.as_str() {
                "ball" => (n.unwrap_or(2), 1),
                "lens21" | "branch_rect21" => (2, 1),
                "diamond_nd" | "branch_rect_nd" => (n.unwrap_or(3), 1),
                "lens_branch_4w" | "double_branch_4w" => (2, 2),
                "tartar_k" => {
                    return Ok(Prediction {
                        n: 2,
                        small_volume: Rational64::new(1, 2),
                        large_volume: None,
                        epsilon_exponent: None,
                        law: "V exp(-C sqrt(log V))".into(),
                        status: Status::Theorem,
                    });
                }
                other => return Err(Error::UnknownFamily(other.to_string())),
            };
            if !(2..=3).contains(&dim) {
                return Err(Error::param(format!("{family} is defined for n in {{2,3}}, got {dim}")));
            }
            Ok(power(dim, lower_exponent(dim, m)?, Status::Theorem))
        }
        PredictKey::Chain { n, m } => {
            let proved = matches!((n, m), (2, 1) | (2, 2) | (3, 1) | (3, 2) | (3, 3));
            let status = if proved { Status::Theorem } else { Status::Conjecture };
            Ok(power(*n, lower_exponent(*n, *m)?, status))
        }
        PredictKey::OnePlusOne { n } => {
            if *n < 2 {
                return Err(Error::param(format!("n must be at least 2, got {n}")));
            }
            let k = *n as i64;
            Ok(power(*n, Rational64::new(2 * k - 2, 2 * k - 1), Status::Theorem))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, y) = golden(-3.0, 5.0, 40, &mut |x| (x - 1.3) * (x - 1.3) + 2.0).unwrap();
        assert!((x - 1.3).abs() < 1e-6);
        assert!((y - 2.0).abs() < 1e-10);
    }

    #[test]
    fn golden_skips_infeasible_side() {
        let (x, _) = golden(0.0, 10.0, 40, &mut |x| if x < 4.0 { f64::INFINITY } else { x }).unwrap();
        assert!(x >= 4.0 && x < 4.01);
        assert!(golden(0.0, 1.0, 10, &mut |_| f64::INFINITY).is_none());
    }

    #[test]
    fn diamond_volume_matches_construction() {
        for n in [2usize, 3] {
            let cfg = SweepConfig { n: Some(n), ..Default::default() };
            let t = Template { family: "diamond_nd", cfg: &cfg };
            let p = t.params(500.0, &[3.0]);
            assert!((p.volume() - 500.0).abs() < 1e-9 * 500.0);
        }
    }
}
