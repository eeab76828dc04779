//! Polytopal scenes carrying cellwise affine deformations, their
//! admissibility checks and periodic grid sampling.

mod field;
mod overlay;
mod polytope;
mod svg;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wells::{Phase, WellSet};

pub use field::{
    GridField, Raster, RasterMeta, parse_field, rasterize, read_field, write_field, write_sidecar,
};
pub use svg::{AUSTENITE_COLOR, WELL_COLORS, phase_color, scene_svg};
pub use overlay::{BoundaryPiece, InternalPiece, Overlay, overlay};
pub use polytope::{
    Facet, Point, Polytope, add, bbox_of, centroid_of, clip_loop, cross, dot, facet_measure, lerp,
    norm, p2, scale, sub,
};

/// `u(x) = grad · x + offset`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub grad: [[f64; 3]; 3],
    pub offset: [f64; 3],
}

impl Affine {
    pub const ZERO: Affine = Affine { grad: [[0.0; 3]; 3], offset: [0.0; 3] };

    pub fn linear(grad: [[f64; 3]; 3]) -> Self {
        Affine { grad, offset: [0.0; 3] }
    }

    pub fn diag(d: [f64; 3]) -> Self {
        Affine::linear([[d[0], 0.0, 0.0], [0.0, d[1], 0.0], [0.0, 0.0, d[2]]])
    }

    pub fn eval(&self, p: Point) -> Point {
        let mut out = self.offset;
        for (i, o) in out.iter_mut().enumerate() {
            *o += dot(self.grad[i], p);
        }
        out
    }

    /// Affine map through `n + 1` point/value pairs (P1 interpolation on a
    /// simplex). Components beyond `n` are zero.
    pub fn from_simplex(n: usize, pts: &[Point], vals: &[Point]) -> Result<Self> {
        if pts.len() != n + 1 || vals.len() != n + 1 {
            return Err(Error::Geometry("simplex interpolation needs n+1 points".into()));
        }
        let e: Vec<Point> = (1..=n).map(|k| sub(pts[k], pts[0])).collect();
        let dv: Vec<Point> = (1..=n).map(|k| sub(vals[k], vals[0])).collect();
        // Solve grad · e_k = dv_k for each output row.
        let mut grad = [[0.0; 3]; 3];
        match n {
            2 => {
                let det = e[0][0] * e[1][1] - e[0][1] * e[1][0];
                if det.abs() <= f64::MIN_POSITIVE {
                    return Err(Error::Geometry("degenerate triangle".into()));
                }
                for (i, row) in grad.iter_mut().enumerate().take(2) {
                    row[0] = (dv[0][i] * e[1][1] - dv[1][i] * e[0][1]) / det;
                    row[1] = (dv[1][i] * e[0][0] - dv[0][i] * e[1][0]) / det;
                }
            }
            3 => {
                let det = dot(e[0], cross(e[1], e[2]));
                if det.abs() <= f64::MIN_POSITIVE {
                    return Err(Error::Geometry("degenerate tetrahedron".into()));
                }
                // Rows of the inverse of [e0; e1; e2] are columns of the dual basis.
                let c0 = scale(cross(e[1], e[2]), 1.0 / det);
                let c1 = scale(cross(e[2], e[0]), 1.0 / det);
                let c2 = scale(cross(e[0], e[1]), 1.0 / det);
                for (i, row) in grad.iter_mut().enumerate() {
                    for k in 0..3 {
                        row[k] = dv[0][i] * c0[k] + dv[1][i] * c1[k] + dv[2][i] * c2[k];
                    }
                }
            }
            _ => return Err(Error::param(format!("unsupported dimension {n}"))),
        }
        let mut a = Affine { grad, offset: [0.0; 3] };
        let base = a.eval(pts[0]);
        a.offset = sub(vals[0], base);
        Ok(a)
    }

    /// `v ↦ self(v)` composed with a linear change of variables `x = R y + t`.
    pub fn compose(&self, r: [[f64; 3]; 3], t: Point) -> Affine {
        let mut grad = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                grad[i][j] = (0..3).map(|k| self.grad[i][k] * r[k][j]).sum();
            }
        }
        Affine { grad, offset: self.eval(t) }
    }
}

/// Role of a cell in a construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    /// Gradient is (close to) the labelled well.
    Laminate,
    /// Interpolation or cutoff layer.
    Cutoff,
    /// Smooth macroscopic region carrying an averaged gradient.
    Macro,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub poly: Polytope,
    pub phase: Phase,
    pub kind: CellKind,
    pub map: Affine,
}

#[derive(Clone, Debug, Serialize)]
pub struct Scene {
    pub n: usize,
    pub cells: Vec<Cell>,
    pub domain: Polytope,
    #[serde(skip)]
    pub wells: WellSet,
}

impl Scene {
    pub fn new(n: usize, domain: Polytope, wells: WellSet) -> Self {
        Scene { n, cells: Vec::new(), domain, wells }
    }

    pub fn push(&mut self, poly: Polytope, phase: Phase, kind: CellKind, map: Affine) {
        self.cells.push(Cell { poly, phase, kind, map });
    }

    pub fn chi(&self, phase: Phase) -> [f64; 3] {
        self.wells.diag_f64(phase)
    }

    /// Diameter of the inclusion domain, used as the length scale for
    /// tolerances.
    pub fn scale(&self) -> f64 {
        self.domain.diameter().max(f64::MIN_POSITIVE)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.cells.iter().enumerate() {
            if c.poly.dim() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, got: c.poly.dim() });
            }
            if !self.wells.has_phase(c.phase) {
                return Err(Error::InconsistentData(format!(
                    "cell {i} labelled with unknown {}",
                    c.phase
                )));
            }
        }
        Ok(())
    }

    pub fn translated(&self, t: Point) -> Scene {
        let mut s = Scene::new(self.n, self.domain.translated(t), self.wells.clone());
        for c in &self.cells {
            // u(x) = M x + b on the old cell becomes M (y - t) + b.
            let map = Affine { grad: c.map.grad, offset: sub(c.map.offset, rot(c.map.grad, t)) };
            s.push(c.poly.translated(t), c.phase, c.kind, map);
        }
        s
    }
}

fn rot(m: [[f64; 3]; 3], p: Point) -> Point {
    [dot(m[0], p), dot(m[1], p), dot(m[2], p)]
}

/// Sum of cell volumes whose phase satisfies `filter`.
pub fn scene_volume(scene: &Scene, filter: impl Fn(Phase) -> bool) -> Result<f64> {
    let mut v = 0.0;
    for c in &scene.cells {
        if filter(c.phase) {
            v += c.poly.volume()?;
        }
    }
    Ok(v)
}

/// Volume of `supp χ`.
pub fn support_volume(scene: &Scene) -> Result<f64> {
    scene_volume(scene, Phase::is_martensite)
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    /// Largest mismatch of `u` across shared faces, at face vertices.
    pub max_continuity_jump: f64,
    /// Largest `|u|` on the boundary of the inclusion domain.
    pub max_boundary_trace: f64,
    /// Largest `|(M₁ − M₂) t|` over shared faces and unit tangents `t`.
    pub max_rank_one_violation: f64,
    /// Same, restricted to faces between two laminate cells.
    pub max_laminate_rank_one_violation: f64,
    /// Uncovered facet measure that is not on the domain boundary.
    pub gap_measure: f64,
    pub faces_checked: usize,
    /// Length scale used to judge exactness.
    pub scale: f64,
}

impl AdmissibilityReport {
    /// Zero up to floating round-off relative to the scene scale.
    pub fn tolerance(&self) -> f64 {
        1e-9 * (1.0 + self.scale)
    }

    pub fn is_exact(&self) -> bool {
        let tol = self.tolerance();
        self.max_continuity_jump <= tol
            && self.max_boundary_trace <= tol
            && self.max_rank_one_violation <= tol
            && self.gap_measure <= tol * self.scale.max(1.0).powi(2)
    }
}

pub fn check_admissible(scene: &Scene) -> AdmissibilityReport {
    check_admissible_with(scene, &overlay(scene))
}

pub fn check_admissible_with(scene: &Scene, ov: &Overlay) -> AdmissibilityReport {
    let mut rep = AdmissibilityReport { scale: scene.scale(), ..Default::default() };
    for piece in &ov.internal {
        let a = &scene.cells[piece.minus];
        let b = &scene.cells[piece.plus];
        for &p in &piece.vertices {
            let jump = norm(sub(a.map.eval(p), b.map.eval(p)));
            rep.max_continuity_jump = rep.max_continuity_jump.max(jump);
        }
        let mut viol: f64 = 0.0;
        for t in &piece.tangents {
            let mut d = [0.0; 3];
            for (i, di) in d.iter_mut().enumerate() {
                *di = dot(a.map.grad[i], *t) - dot(b.map.grad[i], *t);
            }
            viol = viol.max(norm(d));
        }
        rep.max_rank_one_violation = rep.max_rank_one_violation.max(viol);
        if a.kind == CellKind::Laminate && b.kind == CellKind::Laminate {
            rep.max_laminate_rank_one_violation = rep.max_laminate_rank_one_violation.max(viol);
        }
        rep.faces_checked += 1;
    }
    let tol = 1e-9 * rep.scale;
    for piece in &ov.boundary {
        let c = &scene.cells[piece.cell];
        let on_boundary = piece
            .vertices
            .iter()
            .all(|&p| scene.domain.contains(p, tol) && !scene.domain.contains(p, -tol));
        if !on_boundary {
            rep.gap_measure += piece.measure;
        }
        for &p in &piece.vertices {
            rep.max_boundary_trace = rep.max_boundary_trace.max(norm(c.map.eval(p)));
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wells::{Family, make_well_set, rat};

    fn two_well() -> WellSet {
        make_well_set(&Family::TwoWell { lambda: rat(1, 2), n: 2 }).unwrap()
    }

    #[test]
    fn simplex_interpolation_recovers_affine_map() {
        let a = Affine {
            grad: [[1.0, 2.0, 0.0], [-0.5, 3.0, 0.0], [0.0; 3]],
            offset: [0.25, -1.0, 0.0],
        };
        let pts = [p2(0.1, 0.2), p2(1.3, -0.4), p2(0.7, 2.0)];
        let vals: Vec<Point> = pts.iter().map(|&p| a.eval(p)).collect();
        let b = Affine::from_simplex(2, &pts, &vals).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((a.grad[i][j] - b.grad[i][j]).abs() < 1e-12);
            }
            assert!((a.offset[i] - b.offset[i]).abs() < 1e-12);
        }
        let pts3 = [[0.0; 3], [1.0, 0.2, 0.0], [0.1, 1.0, 0.3], [0.0, 0.4, 2.0]];
        let a3 = Affine { grad: [[1.0, 2.0, 3.0], [0.0, -1.0, 0.5], [2.0, 0.0, 1.0]], offset: [1.0, 2.0, 3.0] };
        let vals3: Vec<Point> = pts3.iter().map(|&p| a3.eval(p)).collect();
        let b3 = Affine::from_simplex(3, &pts3, &vals3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((a3.grad[i][j] - b3.grad[i][j]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn unit_square_split_has_volume_one() {
        let k = two_well();
        let mut s = Scene::new(2, Polytope::rect(0.0, 1.0, 0.0, 1.0), k);
        s.push(
            Polytope::triangle(p2(0.0, 0.0), p2(1.0, 0.0), p2(1.0, 1.0)),
            Phase::Well(0),
            CellKind::Laminate,
            Affine::ZERO,
        );
        s.push(
            Polytope::triangle(p2(0.0, 0.0), p2(1.0, 1.0), p2(0.0, 1.0)),
            Phase::Well(1),
            CellKind::Laminate,
            Affine::ZERO,
        );
        assert!((scene_volume(&s, |_| true).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(scene_volume(&s, |p| p == Phase::Austenite).unwrap(), 0.0);
        let rep = check_admissible(&s);
        assert!(rep.is_exact(), "{rep:?}");
        assert_eq!(rep.faces_checked, 1);
    }

    #[test]
    fn single_affine_cell_has_boundary_trace() {
        let k = two_well();
        let mut s = Scene::new(2, Polytope::rect(0.0, 1.0, 0.0, 1.0), k);
        s.push(Polytope::rect(0.0, 1.0, 0.0, 1.0), Phase::Well(0), CellKind::Laminate, Affine::diag([-0.5, 0.0, 0.0]));
        let rep = check_admissible(&s);
        assert!(rep.max_boundary_trace > 0.1);
        assert!(!rep.is_exact());
    }

    #[test]
    fn non_rank_one_jump_is_flagged() {
        let k = two_well();
        let mut s = Scene::new(2, Polytope::rect(0.0, 2.0, 0.0, 1.0), k);
        s.push(Polytope::rect(0.0, 1.0, 0.0, 1.0), Phase::Well(0), CellKind::Laminate, Affine::ZERO);
        // jump across x1 = 1 has a tangential (e2) component
        s.push(
            Polytope::rect(1.0, 2.0, 0.0, 1.0),
            Phase::Well(1),
            CellKind::Laminate,
            Affine::linear([[0.0, 1.0, 0.0], [0.0; 3], [0.0; 3]]),
        );
        let rep = check_admissible(&s);
        assert!((rep.max_rank_one_violation - 1.0).abs() < 1e-12);
        assert!(rep.max_continuity_jump > 0.5);
    }

    #[test]
    fn translation_preserves_u_values() {
        let k = two_well();
        let mut s = Scene::new(2, Polytope::rect(0.0, 1.0, 0.0, 1.0), k);
        let m = Affine { grad: [[1.0, 2.0, 0.0], [3.0, 4.0, 0.0], [0.0; 3]], offset: [0.5, 0.0, 0.0] };
        s.push(Polytope::rect(0.0, 1.0, 0.0, 1.0), Phase::Well(0), CellKind::Laminate, m);
        let t = [3.0, -2.0, 0.0];
        let s2 = s.translated(t);
        let p = p2(0.3, 0.7);
        let a = s.cells[0].map.eval(p);
        let b = s2.cells[0].map.eval(add(p, t));
        assert!(norm(sub(a, b)) < 1e-14);
    }
}
