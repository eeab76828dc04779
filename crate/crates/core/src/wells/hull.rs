//! Lamination hulls of finite sets of diagonal matrices.
//!
//! Two diagonal matrices are rank-one connected exactly when they differ in a
//! single diagonal entry, so every hull generation is a finite union of
//! closed axis-aligned boxes in diagonal-value space.

use num_rational::BigRational;
use serde::Serialize;

use super::WellSet;
use super::poly::format_rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatBox {
    pub lo: Vec<BigRational>,
    pub hi: Vec<BigRational>,
}

impl RatBox {
    pub fn point(p: &[BigRational]) -> Self {
        RatBox { lo: p.to_vec(), hi: p.to_vec() }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn contains_point(&self, p: &[BigRational]) -> bool {
        p.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(x, (lo, hi))| lo <= x && x <= hi)
    }

    pub fn contains_box(&self, other: &RatBox) -> bool {
        (0..self.dim()).all(|i| self.lo[i] <= other.lo[i] && other.hi[i] <= self.hi[i])
    }

    /// Box spanned by laminating `self` with `other` along `axis`, if the two
    /// overlap in every other coordinate.
    fn laminate(&self, other: &RatBox, axis: usize) -> Option<RatBox> {
        let n = self.dim();
        let mut lo = Vec::with_capacity(n);
        let mut hi = Vec::with_capacity(n);
        for i in 0..n {
            if i == axis {
                lo.push(self.lo[i].clone().min(other.lo[i].clone()));
                hi.push(self.hi[i].clone().max(other.hi[i].clone()));
            } else {
                let l = self.lo[i].clone().max(other.lo[i].clone());
                let h = self.hi[i].clone().min(other.hi[i].clone());
                if l > h {
                    return None;
                }
                lo.push(l);
                hi.push(h);
            }
        }
        Some(RatBox { lo, hi })
    }
}

impl Serialize for RatBox {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[String; 2]> = self
            .lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| [format_rational(l), format_rational(h)])
            .collect();
        pairs.serialize(s)
    }
}

/// Closed lamination hull `K^(order)`.
#[derive(Clone, Debug, Serialize)]
pub struct LaminationHull {
    pub boxes: Vec<RatBox>,
    pub order: usize,
}

impl LaminationHull {
    pub fn from_wells(k: &WellSet) -> Self {
        let mut boxes: Vec<RatBox> = Vec::new();
        for w in k.wells() {
            let b = RatBox::point(w);
            if !boxes.iter().any(|e| e.contains_box(&b)) {
                boxes.push(b);
            }
        }
        LaminationHull { boxes, order: 0 }
    }

    pub fn contains(&self, p: &[BigRational]) -> bool {
        self.boxes.iter().any(|b| b.contains_point(p))
    }

    pub fn contains_box(&self, b: &RatBox) -> bool {
        self.boxes.iter().any(|e| e.contains_box(b))
    }

    /// One lamination step. Returns `false` when the hull is already a fixpoint.
    pub fn step(&mut self) -> bool {
        let cur = self.boxes.clone();
        let n = cur.first().map_or(0, RatBox::dim);
        let mut added = Vec::new();
        for (i, a) in cur.iter().enumerate() {
            for b in &cur[i + 1..] {
                for axis in 0..n {
                    if let Some(c) = a.laminate(b, axis) {
                        let covered = self.contains_box(&c)
                            || added.iter().any(|e: &RatBox| e.contains_box(&c));
                        if !covered {
                            added.retain(|e| !c.contains_box(e));
                            added.push(c);
                        }
                    }
                }
            }
        }
        self.order += 1;
        if added.is_empty() {
            return false;
        }
        self.boxes.retain(|e| !added.iter().any(|c| c.contains_box(e)));
        self.boxes.extend(added);
        true
    }
}

/// `K^(m)` computed by `m` lamination steps.
pub fn lamination_hull(k: &WellSet, m: usize) -> LaminationHull {
    let mut hull = LaminationHull::from_wells(k);
    for _ in 0..m {
        if !hull.step() {
            hull.order = m;
            break;
        }
    }
    hull
}

/// Smallest `m <= max_order` with `0 ∈ K^(m)`, or `None` if not reached.
pub fn lamination_order_of_zero(k: &WellSet, max_order: usize) -> Option<usize> {
    let zero = vec![BigRational::from_integer(0.into()); k.n()];
    let mut hull = LaminationHull::from_wells(k);
    if hull.contains(&zero) {
        return Some(0);
    }
    for m in 1..=max_order {
        let grew = hull.step();
        if hull.contains(&zero) {
            return Some(m);
        }
        if !grew {
            return None;
        }
    }
    None
}
