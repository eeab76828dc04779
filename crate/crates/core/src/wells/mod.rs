//! Diagonal well sets, inter-component relations and lamination hulls.

mod hull;
mod poly;

use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use hull::{LaminationHull, RatBox, lamination_hull, lamination_order_of_zero};
pub use poly::{
    Polynomial, format_rational, interpolate_relation, parse_rational, rat, rat_to_f64,
};

/// Phase label of a cell or grid sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Austenite,
    Well(usize),
}

impl Phase {
    pub fn is_martensite(self) -> bool {
        matches!(self, Phase::Well(_))
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Austenite => write!(f, "austenite"),
            Phase::Well(i) => write!(f, "well {i}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `A = diag(-λ, 0, ..)`, `B = diag(1-λ, 0, ..)`.
    TwoWell { lambda: BigRational, n: usize },
    FourWell2d,
    FourWell3d,
    EightWell3d,
    Tartar,
    /// The single well `e1 ⊗ e1`.
    SingleWellRank1 { n: usize },
    /// The pair `±e1 ⊗ e1`.
    SymmetricPair { n: usize },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::TwoWell { .. } => "two_well",
            Family::FourWell2d => "four_well_2d",
            Family::FourWell3d => "four_well_3d",
            Family::EightWell3d => "eight_well_3d",
            Family::Tartar => "tartar",
            Family::SingleWellRank1 { .. } => "single_well_rank1",
            Family::SymmetricPair { .. } => "symmetric_pair",
        }
    }

    /// Parse a family name, taking `lambda` and `n` for the parametrized ones.
    pub fn parse(name: &str, lambda: Option<BigRational>, n: Option<usize>) -> Result<Family> {
        let n2 = n.unwrap_or(2);
        Ok(match name {
            "two_well" => Family::TwoWell { lambda: lambda.unwrap_or_else(|| rat(1, 2)), n: n2 },
            "four_well_2d" => Family::FourWell2d,
            "four_well_3d" => Family::FourWell3d,
            "eight_well_3d" => Family::EightWell3d,
            "tartar" => Family::Tartar,
            "single_well_rank1" => Family::SingleWellRank1 { n: n2 },
            "symmetric_pair" => Family::SymmetricPair { n: n2 },
            other => return Err(Error::UnknownFamily(other.to_string())),
        })
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Family> {
        Family::parse(s, None, None)
    }
}

/// `chi[to] = poly(sum of chi[from])`, components 0-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Relation {
    pub from: Vec<usize>,
    pub to: usize,
    pub coeffs: Polynomial,
}

/// Martensite wells; austenite `0` is implicit.
#[derive(Clone, Debug, PartialEq)]
pub struct WellSet {
    name: String,
    n: usize,
    wells: Vec<Vec<BigRational>>,
    relations: Vec<Relation>,
}

fn diag(vals: &[i64]) -> Vec<BigRational> {
    vals.iter().map(|&v| rat(v, 1)).collect()
}

fn check_dim(n: usize) -> Result<()> {
    if n == 2 || n == 3 {
        Ok(())
    } else {
        Err(Error::param(format!("dimension must be 2 or 3, got {n}")))
    }
}

/// `g(t) = t^3/2 - 3t/2` linking the four-well components.
pub fn four_well_relation() -> Polynomial {
    Polynomial::from_i64_pairs(&[(0, 1), (-3, 2), (0, 1), (1, 2)])
}

/// `chi11 = f(chi22)` on the Tartar square.
pub fn tartar_relation_f() -> Polynomial {
    Polynomial::from_i64_pairs(&[(0, 1), (-41, 12), (0, 1), (5, 12)])
}

/// `chi22 = g(chi11)` on the Tartar square.
pub fn tartar_relation_g() -> Polynomial {
    Polynomial::from_i64_pairs(&[(0, 1), (41, 12), (0, 1), (-5, 12)])
}

/// `chi22 = f12(chi11)` on the eight-well set.
pub fn eight_well_f12() -> Polynomial {
    Polynomial::from_i64_pairs(&[
        (0, 1),
        (0, 1),
        (-5801, 5040),
        (0, 1),
        (83, 576),
        (0, 1),
        (11, 1440),
        (0, 1),
        (-1, 1344),
    ])
}

fn eight_well_f13_with(quadratic: i64) -> Polynomial {
    Polynomial::from_i64_pairs(&[
        (0, 1),
        (0, 1),
        (-5 * quadratic, 5040),
        (0, 1),
        (5 * 101, 576),
        (0, 1),
        (-5 * 31, 1440),
        (0, 1),
        (5, 1344),
    ])
}

/// `chi33 = f13(chi11)` with the quadratic coefficient as commonly quoted,
/// `-5*1781/5040`. It misses every well by a small rational amount.
pub fn eight_well_f13_quoted() -> Polynomial {
    eight_well_f13_with(1781)
}

/// `chi33 = f13(chi11)` interpolated from the wells (quadratic `-5*1787/5040`).
pub fn eight_well_f13() -> Polynomial {
    eight_well_f13_with(1787)
}

/// `chi33 = f23(chi22)` with the quadratic coefficient as commonly quoted,
/// `5t^4/12 - 7t^2/12`. It does not reproduce the wells.
pub fn eight_well_f23_quoted() -> Polynomial {
    Polynomial::from_i64_pairs(&[(0, 1), (0, 1), (-7, 12), (0, 1), (5, 12)])
}

/// `chi33 = f23(chi22)` interpolated from the wells: `5t^4/12 - 17t^2/12`.
pub fn eight_well_f23() -> Polynomial {
    Polynomial::from_i64_pairs(&[(0, 1), (0, 1), (-17, 12), (0, 1), (5, 12)])
}

impl WellSet {
    pub fn new(name: impl Into<String>, n: usize, wells: Vec<Vec<BigRational>>) -> Result<Self> {
        check_dim(n)?;
        for w in &wells {
            if w.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: w.len() });
            }
        }
        for (i, a) in wells.iter().enumerate() {
            if a.iter().all(Zero::is_zero) {
                return Err(Error::InconsistentData(format!(
                    "well {i} is the austenite zero matrix"
                )));
            }
            if wells[..i].contains(a) {
                return Err(Error::InconsistentData(format!("well {i} is a duplicate")));
            }
        }
        Ok(WellSet { name: name.into(), n, wells, relations: Vec::new() })
    }

    pub fn with_relation(mut self, from: Vec<usize>, to: usize, coeffs: Polynomial) -> Self {
        self.relations.push(Relation { from, to, coeffs });
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.wells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wells.is_empty()
    }

    pub fn wells(&self) -> &[Vec<BigRational>] {
        &self.wells
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    /// Diagonal of `phase` as floats, padded with zeros to length 3.
    pub fn diag_f64(&self, phase: Phase) -> [f64; 3] {
        let mut out = [0.0; 3];
        if let Phase::Well(i) = phase {
            for (o, v) in out.iter_mut().zip(&self.wells[i]) {
                *o = rat_to_f64(v);
            }
        }
        out
    }

    pub fn has_phase(&self, phase: Phase) -> bool {
        match phase {
            Phase::Austenite => true,
            Phase::Well(i) => i < self.wells.len(),
        }
    }

    /// Finite set of values taken by component `j` over `K ∪ {0}`.
    pub fn component_values(&self, j: usize) -> Vec<f64> {
        let mut vals: Vec<f64> = std::iter::once(0.0)
            .chain(self.wells.iter().map(|w| rat_to_f64(&w[j])))
            .collect();
        vals.sort_by(f64::total_cmp);
        vals.dedup();
        vals
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&WellSetDoc::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: WellSetDoc = serde_json::from_str(s)?;
        doc.try_into()
    }
}

pub fn make_well_set(family: &Family) -> Result<WellSet> {
    let set = match family {
        Family::TwoWell { lambda, n } => {
            let zero = BigRational::zero();
            let one = BigRational::from_integer(1.into());
            if *lambda <= zero || *lambda >= one {
                return Err(Error::param(format!(
                    "lambda must lie in (0,1), got {}",
                    format_rational(lambda)
                )));
            }
            check_dim(*n)?;
            let mut a = vec![zero.clone(); *n];
            let mut b = vec![zero; *n];
            a[0] = -lambda.clone();
            b[0] = one - lambda;
            WellSet::new("two_well", *n, vec![a, b])?
        }
        Family::FourWell2d => WellSet::new(
            "four_well_2d",
            2,
            vec![diag(&[-1, -2]), diag(&[-1, 1]), diag(&[1, 2]), diag(&[1, -1])],
        )?
        .with_relation(vec![1], 0, four_well_relation()),
        Family::FourWell3d => WellSet::new(
            "four_well_3d",
            3,
            vec![diag(&[-1, -2, 0]), diag(&[-1, 1, 0]), diag(&[1, 0, 2]), diag(&[1, 0, -1])],
        )?
        .with_relation(vec![1, 2], 0, four_well_relation()),
        Family::EightWell3d => WellSet::new(
            "eight_well_3d",
            3,
            vec![
                diag(&[2, -2, 1]),
                diag(&[-2, -2, 1]),
                diag(&[-3, 2, 1]),
                diag(&[3, 2, 1]),
                diag(&[1, -1, -1]),
                diag(&[-1, -1, -1]),
                diag(&[-4, 1, -1]),
                diag(&[4, 1, -1]),
            ],
        )?
        .with_relation(vec![0], 1, eight_well_f12())
        .with_relation(vec![0], 2, eight_well_f13())
        .with_relation(vec![1], 2, eight_well_f23()),
        Family::Tartar => WellSet::new(
            "tartar",
            2,
            vec![diag(&[-1, -3]), diag(&[-3, 1]), diag(&[1, 3]), diag(&[3, -1])],
        )?
        .with_relation(vec![1], 0, tartar_relation_f())
        .with_relation(vec![0], 1, tartar_relation_g()),
        Family::SingleWellRank1 { n } => {
            check_dim(*n)?;
            let mut a = vec![BigRational::zero(); *n];
            a[0] = rat(1, 1);
            WellSet::new("single_well_rank1", *n, vec![a])?
        }
        Family::SymmetricPair { n } => {
            check_dim(*n)?;
            let mut a = vec![BigRational::zero(); *n];
            let mut b = a.clone();
            a[0] = rat(1, 1);
            b[0] = rat(-1, 1);
            WellSet::new("symmetric_pair", *n, vec![a, b])?
                .with_relation(vec![0], 1, Polynomial::default())
        }
    };
    Ok(set)
}

/// Nearest member of `K ∪ {0}` in Frobenius distance. Austenite wins ties,
/// then the lowest well index.
pub fn project_to_k0(m: &[f64], k: &WellSet) -> Result<(Phase, f64)> {
    if m.len() != k.n() {
        return Err(Error::DimensionMismatch { expected: k.n(), got: m.len() });
    }
    let mut best = (Phase::Austenite, m.iter().map(|x| x * x).sum::<f64>());
    for (i, w) in k.wells().iter().enumerate() {
        let d2: f64 = m
            .iter()
            .zip(w)
            .map(|(x, v)| (x - rat_to_f64(v)).powi(2))
            .sum();
        if d2 < best.1 {
            best = (Phase::Well(i), d2);
        }
    }
    Ok((best.0, best.1.sqrt()))
}

/// Nearest martensite well (austenite excluded), lowest index on ties.
pub fn nearest_martensite(m: &[f64], k: &WellSet) -> Phase {
    let mut best = (Phase::Austenite, f64::INFINITY);
    for (i, w) in k.wells().iter().enumerate() {
        let d2: f64 = m
            .iter()
            .zip(w)
            .map(|(x, v)| (x - rat_to_f64(v)).powi(2))
            .sum();
        if d2 < best.1 {
            best = (Phase::Well(i), d2);
        }
    }
    best.0
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationReport {
    pub from: Vec<usize>,
    pub to: usize,
    pub polynomial: String,
    /// One residual per well, then the austenite residual `p(0)`.
    pub residuals: Vec<String>,
    pub failures: Vec<Phase>,
    pub passed: bool,
}

/// Exact check of `chi[to] = p(sum of chi[from])` on every well and on `0`.
pub fn verify_relation(k: &WellSet, from: &[usize], to: usize, p: &Polynomial) -> RelationReport {
    let mut residuals = Vec::new();
    let mut failures = Vec::new();
    let valid = to < k.n() && !from.is_empty() && from.iter().all(|&j| j < k.n());
    let zero_row = vec![BigRational::zero(); k.n()];
    let rows = k
        .wells()
        .iter()
        .enumerate()
        .map(|(i, w)| (Phase::Well(i), w))
        .chain(std::iter::once((Phase::Austenite, &zero_row)));
    for (phase, w) in rows {
        if !valid {
            failures.push(phase);
            continue;
        }
        let s: BigRational = from.iter().map(|&j| w[j].clone()).sum();
        let r = p.eval(&s) - &w[to];
        if !r.is_zero() {
            failures.push(phase);
        }
        residuals.push(format_rational(&r));
    }
    RelationReport {
        from: from.to_vec(),
        to,
        polynomial: p.to_string(),
        residuals,
        passed: failures.is_empty(),
        failures,
    }
}

/// Interpolate `chi[to]` as a polynomial in `sum of chi[from]` over `K ∪ {0}`.
pub fn interpolate_from_wells(k: &WellSet, from: &[usize], to: usize) -> Result<Polynomial> {
    let mut pairs = vec![(BigRational::zero(), BigRational::zero())];
    for w in k.wells() {
        let s: BigRational = from.iter().map(|&j| w[j].clone()).sum();
        pairs.push((s, w[to].clone()));
    }
    interpolate_relation(&pairs)
}

#[derive(Serialize, Deserialize)]
struct WellSetDoc {
    name: String,
    n: usize,
    wells: Vec<Vec<String>>,
    #[serde(default)]
    relations: Vec<Relation>,
}

impl From<&WellSet> for WellSetDoc {
    fn from(k: &WellSet) -> Self {
        WellSetDoc {
            name: k.name.clone(),
            n: k.n,
            wells: k
                .wells
                .iter()
                .map(|w| w.iter().map(format_rational).collect())
                .collect(),
            relations: k.relations.clone(),
        }
    }
}

impl TryFrom<WellSetDoc> for WellSet {
    type Error = Error;
    fn try_from(doc: WellSetDoc) -> Result<WellSet> {
        let wells = doc
            .wells
            .iter()
            .map(|w| w.iter().map(|s| parse_rational(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let mut set = WellSet::new(doc.name, doc.n, wells)?;
        for r in doc.relations {
            if r.to >= set.n || r.from.iter().any(|&j| j >= set.n) {
                return Err(Error::Format("relation component out of range".into()));
            }
            set.relations.push(r);
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(f: Family) -> WellSet {
        make_well_set(&f).unwrap()
    }

    #[test]
    fn two_well_half() {
        let k = set(Family::TwoWell { lambda: rat(1, 2), n: 2 });
        assert_eq!(k.wells(), &[diag_r(&[(-1, 2), (0, 1)]), diag_r(&[(1, 2), (0, 1)])]);
    }

    fn diag_r(v: &[(i64, i64)]) -> Vec<BigRational> {
        v.iter().map(|&(a, b)| rat(a, b)).collect()
    }

    #[test]
    fn lambda_out_of_range() {
        for l in [rat(0, 1), rat(1, 1), rat(3, 2), rat(-1, 4)] {
            assert!(matches!(
                make_well_set(&Family::TwoWell { lambda: l, n: 2 }),
                Err(Error::Parameter(_))
            ));
        }
        assert!(matches!("nine_well".parse::<Family>(), Err(Error::UnknownFamily(_))));
    }

    #[test]
    fn projection_examples() {
        let k = set(Family::FourWell2d);
        assert_eq!(project_to_k0(&[0.0, 0.0], &k).unwrap(), (Phase::Austenite, 0.0));
        assert_eq!(project_to_k0(&[-1.0, -2.0], &k).unwrap(), (Phase::Well(0), 0.0));
        let (p, d) = project_to_k0(&[0.9, 2.0], &k).unwrap();
        assert_eq!(p, Phase::Well(2));
        assert!((d - 0.1).abs() < 1e-12);
        assert!(project_to_k0(&[0.0; 3], &k).is_err());
    }

    #[test]
    fn projection_tie_prefers_austenite_then_low_index() {
        let k = set(Family::SymmetricPair { n: 2 });
        // equidistant from 0 and e1⊗e1
        assert_eq!(project_to_k0(&[0.5, 0.0], &k).unwrap().0, Phase::Austenite);
        let k = WellSet::new("pair", 2, vec![diag(&[2, 1]), diag(&[2, -1])]).unwrap();
        assert_eq!(project_to_k0(&[1.5, 0.0], &k).unwrap().0, Phase::Well(0));
    }

    #[test]
    fn tartar_relations_interpolate() {
        let k = set(Family::Tartar);
        assert_eq!(interpolate_from_wells(&k, &[0], 1).unwrap(), tartar_relation_g());
        assert_eq!(interpolate_from_wells(&k, &[1], 0).unwrap(), tartar_relation_f());
    }

    #[test]
    fn builtin_relations_verify() {
        for f in [Family::FourWell2d, Family::FourWell3d, Family::EightWell3d, Family::Tartar] {
            let k = set(f);
            for r in k.relations() {
                let rep = verify_relation(&k, &r.from, r.to, &r.coeffs);
                assert!(rep.passed, "{} {:?}", k.name(), rep);
                assert!(r.coeffs.eval(&BigRational::zero()).is_zero());
            }
        }
    }

    #[test]
    fn quoted_f23_fails_at_two() {
        let k = set(Family::EightWell3d);
        let rep = verify_relation(&k, &[1], 2, &eight_well_f23_quoted());
        assert!(!rep.passed);
        assert_eq!(eight_well_f23_quoted().eval(&rat(2, 1)), rat(13, 3));
        assert_eq!(eight_well_f23_quoted().eval(&rat(1, 1)), rat(-1, 6));
        assert_eq!(rep.failures.len(), 8);
        assert_eq!(rep.residuals.last().unwrap(), "0");
        assert_eq!(interpolate_from_wells(&k, &[1], 2).unwrap(), eight_well_f23());
    }

    #[test]
    fn quoted_f13_misses_the_wells() {
        let k = set(Family::EightWell3d);
        let rep = verify_relation(&k, &[0], 2, &eight_well_f13_quoted());
        assert!(!rep.passed);
        assert_eq!(eight_well_f13_quoted().eval(&rat(1, 1)), rat(-167, 168));
        assert_eq!(interpolate_from_wells(&k, &[0], 2).unwrap(), eight_well_f13());
        assert_eq!(interpolate_from_wells(&k, &[0], 1).unwrap(), eight_well_f12());
    }

    #[test]
    fn eight_well_f12_hand_value() {
        // (-15 + 154 + 2905 - 23204) / 20160 = -1
        assert_eq!(eight_well_f12().eval(&rat(1, 1)), rat(-1, 1));
        assert_eq!(eight_well_f12().eval(&rat(-1, 1)), rat(-1, 1));
    }

    #[test]
    fn lamination_orders() {
        let cases = [
            (Family::TwoWell { lambda: rat(1, 3), n: 2 }, Some(1)),
            (Family::FourWell2d, Some(2)),
            (Family::FourWell3d, Some(2)),
            (Family::EightWell3d, Some(3)),
            (Family::Tartar, None),
        ];
        for (f, expect) in cases {
            let k = set(f);
            assert_eq!(lamination_order_of_zero(&k, 10), expect, "{}", k.name());
        }
    }

    #[test]
    fn four_well_second_hull_contains_unit_square() {
        let k = set(Family::FourWell2d);
        let hull = lamination_hull(&k, 2);
        let sq = RatBox { lo: diag(&[-1, -1]), hi: diag(&[1, 1]) };
        assert!(hull.contains_box(&sq));
    }

    #[test]
    fn json_round_trip() {
        let k = set(Family::EightWell3d);
        let s = k.to_json().unwrap();
        assert!(s.contains("\"-5801/5040\""));
        assert_eq!(WellSet::from_json(&s).unwrap(), k);
    }

    #[test]
    fn duplicate_and_zero_wells_rejected() {
        assert!(WellSet::new("d", 2, vec![diag(&[1, 0]), diag(&[1, 0])]).is_err());
        assert!(WellSet::new("z", 2, vec![diag(&[0, 0])]).is_err());
        assert!(WellSet::new("m", 2, vec![diag(&[1, 0, 0])]).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn projection_distance_zero_iff_member(a in -4i64..=4, b in -4i64..=4, half in any::<bool>()) {
                let k = make_well_set(&Family::FourWell2d).unwrap();
                let (x, y) = if half { (a as f64 + 0.5, b as f64) } else { (a as f64, b as f64) };
                let (_, d) = project_to_k0(&[x, y], &k).unwrap();
                let member = (x == 0.0 && y == 0.0)
                    || k.wells().iter().any(|w| rat_to_f64(&w[0]) == x && rat_to_f64(&w[1]) == y);
                prop_assert_eq!(d == 0.0, member);
            }

            #[test]
            fn lamination_order_is_monotone(extra in 0usize..4) {
                for f in [Family::FourWell2d, Family::EightWell3d] {
                    let k = make_well_set(&f).unwrap();
                    let m = lamination_order_of_zero(&k, 10).unwrap();
                    prop_assert_eq!(lamination_order_of_zero(&k, m + extra), Some(m));
                    if m > 0 {
                        prop_assert_eq!(lamination_order_of_zero(&k, m - 1), None);
                    }
                }
            }
        }
    }
}
