//! Local building blocks shared by the laminate and branching families.
//!
//! Pieces live in a local frame `(σ, t)`: `σ` runs along the layers, `t`
//! across them. A piece carries the values of the scalar correction `ψ` at
//! its vertices; `ψ` is affine on every piece and the emitted map is
//! `u = W + ψ t_dir` for a background affine map `W`.

use crate::constants::BRANCH_THETA;
use crate::error::{Error, Result};
use crate::geometry::{Affine, CellKind, Point, Polytope, Scene, add, dot, scale};
use crate::wells::{Phase, nearest_martensite};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Role {
    Alpha,
    Beta,
    Ramp,
}

#[derive(Clone, Debug)]
pub(crate) struct Piece {
    pub pts: Vec<[f64; 2]>,
    pub psi: Vec<f64>,
    pub role: Role,
}

impl Piece {
    fn new(pts: Vec<[f64; 2]>, psi: Vec<f64>, role: Role) -> Self {
        Piece { pts, psi, role }
    }

    /// `(∂_σψ, ∂_tψ, ψ(0,0))`.
    pub fn gradient(&self) -> (f64, f64, f64) {
        let p0 = self.pts[0];
        let mut best = (0.0, 1, 2);
        for i in 1..self.pts.len() {
            for j in i + 1..self.pts.len() {
                let a = sub2(self.pts[i], p0);
                let b = sub2(self.pts[j], p0);
                let det = a[0] * b[1] - a[1] * b[0];
                if det.abs() > best.0 {
                    best = (det.abs(), i, j);
                }
            }
        }
        let (_, i, j) = best;
        let a = sub2(self.pts[i], p0);
        let b = sub2(self.pts[j], p0);
        let det = a[0] * b[1] - a[1] * b[0];
        let da = self.psi[i] - self.psi[0];
        let db = self.psi[j] - self.psi[0];
        let gs = (da * b[1] - db * a[1]) / det;
        let gt = (db * a[0] - da * b[0]) / det;
        (gs, gt, self.psi[0] - gs * p0[0] - gt * p0[1])
    }

    pub fn area(&self) -> f64 {
        let n = self.pts.len();
        let mut s = 0.0;
        for i in 0..n {
            let a = self.pts[i];
            let b = self.pts[(i + 1) % n];
            s += a[0] * b[1] - a[1] * b[0];
        }
        0.5 * s.abs()
    }
}

fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

/// Sawtooth profile of a two-phase laminate: `∂_tψ = α` on a fraction `w`
/// of each period and `β` on the rest, with `wα + (1−w)β = 0`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Saw {
    pub w: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Saw {
    /// From the `t`-components of the two wells.
    pub fn from_values(p: f64, q: f64, w: f64) -> Self {
        let b = w * p + (1.0 - w) * q;
        Saw { w, alpha: p - b, beta: q - b }
    }

    /// Largest value of `ψ` over one period.
    fn peak(&self, period: f64) -> f64 {
        0.5 * (self.alpha * self.w - self.beta * (1.0 - self.w)) * period
    }
}

/// Unbranched layers on `σ ∈ [s0, s1]` for one period at `t0`.
pub(crate) fn straight(s0: f64, s1: f64, t0: f64, p: f64, saw: Saw) -> [Piece; 2] {
    let m = t0 + saw.w * p;
    let pk = saw.peak(p);
    [
        Piece::new(vec![[s0, t0], [s1, t0], [s1, m], [s0, m]], vec![0.0, 0.0, pk, pk], Role::Alpha),
        Piece::new(
            vec![[s0, m], [s1, m], [s1, t0 + p], [s0, t0 + p]],
            vec![pk, pk, 0.0, 0.0],
            Role::Beta,
        ),
    ]
}

/// One period-halving cell: period `p` at `σ = s0`, period `p/2` at
/// `σ = s0 + d`.
pub(crate) fn km_cell(s0: f64, d: f64, t0: f64, p: f64, saw: Saw) -> [Piece; 4] {
    let w = saw.w;
    let s1 = s0 + d;
    let m = t0 + w * p / 2.0;
    let half = t0 + p / 2.0;
    let pk = saw.peak(p);
    [
        Piece::new(
            vec![[s0, t0], [s1, t0], [s1, m], [s0, m]],
            vec![0.0, 0.0, pk / 2.0, pk / 2.0],
            Role::Alpha,
        ),
        Piece::new(vec![[s0, m], [s1, m], [s1, half]], vec![pk / 2.0, pk / 2.0, 0.0], Role::Beta),
        Piece::new(
            vec![[s0, m], [s1, half], [s1, half + w * p / 2.0], [s0, t0 + w * p]],
            vec![pk / 2.0, 0.0, pk / 2.0, pk],
            Role::Alpha,
        ),
        Piece::new(
            vec![[s0, t0 + w * p], [s1, half + w * p / 2.0], [s1, t0 + p], [s0, t0 + p]],
            vec![pk, pk / 2.0, 0.0, 0.0],
            Role::Beta,
        ),
    ]
}

/// P1 ramp from the sawtooth at `σ = a` to `ψ = 0` at `σ = b`.
pub(crate) fn ramp(a: f64, b: f64, t0: f64, p: f64, saw: Saw) -> [Piece; 3] {
    let pk = saw.peak(p);
    let a0 = [a, t0];
    let a1 = [a, t0 + saw.w * p];
    let a2 = [a, t0 + p];
    let b0 = [b, t0];
    let b2 = [b, t0 + p];
    [
        Piece::new(vec![a0, a1, b0], vec![0.0, pk, 0.0], Role::Ramp),
        Piece::new(vec![a1, b2, b0], vec![pk, 0.0, 0.0], Role::Ramp),
        Piece::new(vec![a1, a2, b2], vec![pk, 0.0, 0.0], Role::Ramp),
    ]
}

/// Layout of one half of a branching block, from the coarse centre
/// (`σ = 0`) to the end where `ψ` is cut off.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct HalfPlan {
    pub period: f64,
    pub straight: f64,
    pub gens: Vec<f64>,
    pub cutoff: f64,
}

impl HalfPlan {
    /// Largest useful generation count for a half of length `half` and
    /// period `period`: refinement stops at unit fine period or when cells
    /// would become shorter than their period.
    pub fn max_generations(half: f64, period: f64) -> Result<usize> {
        if !(half > 2.0 * period && period > 0.0) {
            return Err(Error::param(format!(
                "branching block needs l > 4h, got l = {}, h = {period}",
                2.0 * half
            )));
        }
        let g_unit = if period > 1.0 { period.log2().ceil() as usize } else { 0 };
        let g_geo = ((period / half).ln() / (2.0 * BRANCH_THETA).ln()).floor().max(0.0) as usize;
        Ok(g_unit.min(g_geo))
    }

    #[cfg(test)]
    pub fn auto(half: f64, period: f64) -> Result<HalfPlan> {
        Ok(HalfPlan::with_generations(half, period, HalfPlan::max_generations(half, period)?))
    }

    pub fn with_generations(half: f64, period: f64, g: usize) -> HalfPlan {
        let cutoff = period / 2f64.powi(g as i32);
        let rest = half - cutoff;
        if g == 0 {
            return HalfPlan { period, straight: rest, gens: Vec::new(), cutoff };
        }
        let th = BRANCH_THETA;
        let norm = (1.0 - th) / (1.0 - th.powi(g as i32));
        let gens = (0..g).map(|i| rest * norm * th.powi(i as i32)).collect();
        HalfPlan { period, straight: 0.0, gens, cutoff }
    }

    /// Explicit generation lengths and cutoff width.
    pub fn explicit(period: f64, gens: Vec<f64>, cutoff: f64) -> HalfPlan {
        HalfPlan { period, straight: 0.0, gens, cutoff }
    }

    #[cfg(test)]
    pub fn length(&self) -> f64 {
        self.straight + self.gens.iter().sum::<f64>() + self.cutoff
    }

    #[cfg(test)]
    pub fn fine_period(&self) -> f64 {
        self.period / 2f64.powi(self.gens.len() as i32)
    }

    pub fn pieces(&self, saw: Saw) -> Vec<Piece> {
        let mut out = Vec::new();
        let mut s = 0.0;
        if self.straight > 0.0 {
            out.extend(straight(0.0, self.straight, 0.0, self.period, saw));
            s = self.straight;
        }
        let mut p = self.period;
        let mut count = 1usize;
        for &d in &self.gens {
            for j in 0..count {
                out.extend(km_cell(s, d, j as f64 * p, p, saw));
            }
            s += d;
            p /= 2.0;
            count *= 2;
        }
        for j in 0..count {
            out.extend(ramp(s, s + self.cutoff, j as f64 * p, p, saw));
        }
        out
    }
}

/// Affine placement of a local frame: `x = origin + σ s_dir + t t_dir`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Frame {
    pub origin: Point,
    pub s_dir: Point,
    pub t_dir: Point,
}

impl Frame {
    pub fn map(&self, s: f64, t: f64) -> Point {
        add(self.origin, add(scale(self.s_dir, s), scale(self.t_dir, t)))
    }

    /// `W + ψ t_dir` for the affine `ψ` of a piece.
    pub fn lift(&self, piece: &Piece, bg: &Affine) -> Affine {
        let (gs, gt, c0) = piece.gradient();
        let g = add(scale(self.s_dir, gs), scale(self.t_dir, gt));
        let off = c0 - dot(g, self.origin);
        let mut a = *bg;
        for i in 0..3 {
            for j in 0..3 {
                a.grad[i][j] += self.t_dir[i] * g[j];
            }
            a.offset[i] += self.t_dir[i] * off;
        }
        a
    }
}

/// Well labels for the two roles of a laminate.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Pair {
    pub p: Phase,
    pub q: Phase,
}

pub(crate) fn label(scene: &Scene, map: &Affine) -> Phase {
    let d: Vec<f64> = (0..scene.n).map(|i| map.grad[i][i]).collect();
    nearest_martensite(&d, &scene.wells)
}

/// Pushes the mapped pieces into a planar scene.
pub(crate) fn emit(scene: &mut Scene, frame: &Frame, pieces: &[Piece], bg: &Affine, pair: Pair) {
    for pc in pieces {
        if pc.area() <= 0.0 {
            continue;
        }
        let map = frame.lift(pc, bg);
        let poly = Polytope::polygon(pc.pts.iter().map(|q| frame.map(q[0], q[1])).collect());
        let (phase, kind) = match pc.role {
            Role::Alpha => (pair.p, CellKind::Laminate),
            Role::Beta => (pair.q, CellKind::Laminate),
            Role::Ramp => (label(scene, &map), CellKind::Cutoff),
        };
        scene.push(poly, phase, kind, map);
    }
}

/// A branching block on the rectangle spanned from `corner` by `len s_dir`
/// and `height t_dir`, refined toward both ends.
pub(crate) struct Block {
    pub corner: Point,
    pub s_dir: Point,
    pub t_dir: Point,
    pub len: f64,
    pub height: f64,
    pub w: f64,
    pub pair: Pair,
}

impl Block {
    /// Emits the block refined down to the finest admissible period.
    pub fn emit(&self, scene: &mut Scene, bg: &Affine) -> Result<HalfPlan> {
        let half = self.len / 2.0;
        let g = HalfPlan::max_generations(half, self.height)?;
        let plan = HalfPlan::with_generations(half, self.height, g);
        self.emit_with(scene, bg, &plan);
        Ok(plan)
    }

    pub fn saw(&self, scene: &Scene) -> Saw {
        let axis = axis_of(self.t_dir);
        let p = scene.chi(self.pair.p)[axis];
        let q = scene.chi(self.pair.q)[axis];
        Saw::from_values(p, q, self.w)
    }

    pub fn emit_with(&self, scene: &mut Scene, bg: &Affine, plan: &HalfPlan) {
        let saw = self.saw(scene);
        let pieces = plan.pieces(saw);
        let centre = add(self.corner, scale(self.s_dir, self.len / 2.0));
        for dir in [self.s_dir, scale(self.s_dir, -1.0)] {
            let frame = Frame { origin: centre, s_dir: dir, t_dir: self.t_dir };
            emit(scene, &frame, &pieces, bg, self.pair);
        }
    }
}

/// Index of the coordinate axis a signed unit vector points along.
pub(crate) fn axis_of(v: Point) -> usize {
    (0..3).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap_or(0)
}

/// Unit vector `±e_axis`.
pub(crate) fn unit(axis: usize, sign: f64) -> Point {
    let mut e = [0.0; 3];
    e[axis] = sign;
    e
}

#[cfg(test)]
mod tests {
    use super::*;

    fn saw() -> Saw {
        Saw::from_values(-2.0, 1.0, 1.0 / 3.0)
    }

    #[test]
    fn saw_has_zero_mean() {
        let s = saw();
        assert!((s.w * s.alpha + (1.0 - s.w) * s.beta).abs() < 1e-15);
        assert!((s.alpha + 2.0).abs() < 1e-15 && (s.beta - 1.0).abs() < 1e-15);
    }

    #[test]
    fn km_cell_slopes() {
        let s = saw();
        let cell = km_cell(0.0, 3.0, 0.0, 2.0, s);
        let expect_tilt = (s.beta - s.alpha) * (1.0 - s.w) * 2.0 / (2.0 * 3.0);
        for (i, pc) in cell.iter().enumerate() {
            let (gs, gt, _) = pc.gradient();
            let want = if pc.role == Role::Alpha { s.alpha } else { s.beta };
            assert!((gt - want).abs() < 1e-12, "piece {i}");
            let tilt = if i == 2 { expect_tilt } else { 0.0 };
            assert!((gs - tilt).abs() < 1e-12, "piece {i}: {gs}");
        }
        let area: f64 = cell.iter().map(Piece::area).sum();
        assert!((area - 6.0).abs() < 1e-12);
    }

    #[test]
    fn plan_lengths_add_up() {
        let plan = HalfPlan::auto(20.0, 4.0).unwrap();
        assert!((plan.length() - 20.0).abs() < 1e-12);
        assert!(!plan.gens.is_empty());
        assert!((plan.cutoff - plan.fine_period()).abs() < 1e-15);
        let flat = HalfPlan::auto(8.0, 1.0).unwrap();
        assert!(flat.gens.is_empty());
        assert!((flat.length() - 8.0).abs() < 1e-12);
        assert!(HalfPlan::auto(2.0, 1.0).is_err());
    }

    #[test]
    fn pieces_tile_the_half_strip() {
        let plan = HalfPlan::auto(40.0, 8.0).unwrap();
        let area: f64 = plan.pieces(saw()).iter().map(Piece::area).sum();
        assert!((area - 320.0).abs() < 1e-9);
    }
}
