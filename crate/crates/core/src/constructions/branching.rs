//! Branched constructions built from period-halving blocks.

use std::collections::BTreeMap;

use crate::constants::DOUBLE_BRANCH_KAPPA;
use crate::energy::{EnergyBreakdown, scene_energy_parts};
use crate::error::{Error, Result};
use crate::geometry::{Affine, CellKind, Point, Polytope, Scene, p2, sub, norm};
use crate::wells::{Family, Phase, WellSet, make_well_set};

use super::laminate::{Block, Frame, HalfPlan, Pair, Role, Saw, label, unit};
use super::two_well;

pub(crate) type Info = BTreeMap<String, f64>;

/// Number of periods across a rectangle of width `l` and height `h` with
/// every block strictly longer than four periods.
pub fn period_count(l: f64, h: f64) -> usize {
    (4.0 * l / h).floor() as usize + 1
}

pub(crate) fn branch_rect21(lambda: f64, l: f64, h: f64) -> Result<(Scene, Info)> {
    if !(h > l && l > 1.0) {
        return Err(Error::param(format!("branched rectangle needs H > L > 1, got L = {l}, H = {h}")));
    }
    let wells = two_well(lambda, 2)?;
    let mut scene = Scene::new(2, Polytope::rect(0.0, l, 0.0, h), wells);
    let n = period_count(l, h);
    let period = l / n as f64;
    let mut gens = 0;
    for i in 0..n {
        let block = Block {
            corner: p2(i as f64 * period, 0.0),
            s_dir: unit(1, 1.0),
            t_dir: unit(0, 1.0),
            len: h,
            height: period,
            w: lambda,
            pair: Pair { p: Phase::Well(1), q: Phase::Well(0) },
        };
        gens = block.emit(&mut scene, &Affine::ZERO)?.gens.len();
    }
    let mut info = Info::new();
    info.insert("N".into(), n as f64);
    info.insert("generations".into(), gens as f64);
    Ok((scene, info))
}

/// Composes the planar construction with
/// `ρ(x₂, x₃) = max(|x₂ − H/2|, |x₃ − H/2|) + H/2`.
pub(crate) fn branch_rect_nd(n: usize, lambda: f64, l: f64, h: f64) -> Result<(Scene, Info)> {
    if n != 3 {
        return Err(Error::param(format!("extruded rectangle needs n = 3, got {n}")));
    }
    let (flat, info) = branch_rect21(lambda, l, h)?;
    let wells = two_well(lambda, 3)?;
    let domain = Polytope::cuboid([0.0; 3], [l, h, h]);
    let mut scene = Scene::new(3, domain, wells);
    let c = h / 2.0;
    let tiny = 1e-14 * (l * h * h);
    for cell in &flat.cells {
        let pts = cell.poly.vertices();
        if pts.iter().map(|p| p[1]).sum::<f64>() / (pts.len() as f64) < c {
            continue;
        }
        let (m11, m12, off) = (cell.map.grad[0][0], cell.map.grad[0][1], cell.map.offset[0]);
        for (axis, sgn) in [(1usize, 1.0), (1, -1.0), (2, 1.0), (2, -1.0)] {
            let other = 3 - axis;
            let lift = |p: Point, top: bool| -> Point {
                let y = p[1];
                let mut q = [p[0], 0.0, 0.0];
                q[axis] = c + sgn * (y - c);
                q[other] = if top { y } else { h - y };
                q
            };
            let mut map = Affine::ZERO;
            map.grad[0][0] = m11;
            map.grad[0][axis] = sgn * m12;
            map.offset[0] = off + m12 * (c - sgn * c);
            for i in 1..pts.len() - 1 {
                let tri = [pts[0], pts[i], pts[i + 1]];
                let a: Vec<Point> = tri.iter().map(|&p| lift(p, false)).collect();
                let b: Vec<Point> = tri.iter().map(|&p| lift(p, true)).collect();
                let tets = [[a[0], a[1], a[2], b[0]], [a[1], a[2], b[0], b[1]], [a[2], b[0], b[1], b[2]]];
                for t in tets {
                    let poly = Polytope::tetra(t[0], t[1], t[2], t[3]);
                    if poly.signed_volume().abs() > tiny {
                        scene.push(poly, cell.phase, cell.kind, map);
                    }
                }
            }
        }
    }
    Ok((scene, info))
}

/// Macroscopic lens map on the quadrant `(sx, sy)`.
fn lens_macro(l: f64, h: f64, sx: f64, sy: f64) -> Affine {
    let mut w = Affine::ZERO;
    w.grad[0][0] = sx;
    w.grad[0][1] = sy * l / h;
    w.offset[0] = -l / 2.0;
    w
}

fn four_well_pair(sx: f64) -> Pair {
    if sx < 0.0 {
        Pair { p: Phase::Well(0), q: Phase::Well(1) }
    } else {
        Pair { p: Phase::Well(2), q: Phase::Well(3) }
    }
}

/// Geometry of the rectangles filling one lens quadrant.
#[derive(Clone, Debug, PartialEq)]
pub struct LensBranchLayout {
    /// Lower edges `h_j`, one more than the number of rectangles.
    pub h: Vec<f64>,
    /// Heights `r_j`.
    pub r: Vec<f64>,
    /// Lengths `ℓ_j`.
    pub len: Vec<f64>,
}

pub fn lens_branch_layout(l: f64, h: f64, r: f64) -> Result<LensBranchLayout> {
    if !(h > l && l > 1.0) {
        return Err(Error::param(format!("lens with branching needs H > L > 1, got L = {l}, H = {h}")));
    }
    if !(r > 0.0 && r < h / 8.0) {
        return Err(Error::param(format!("need 0 < r < H/8, got r = {r}")));
    }
    let q = 1.0 - 2.0 * r / h;
    let stop = (h - l) / 2.0;
    let mut out = LensBranchLayout { h: vec![0.0], r: Vec::new(), len: Vec::new() };
    let mut j = 0;
    while out.h[j] < stop {
        let rj = r * q.powi(j as i32);
        let lj = l / 2.0 * q.powi(j as i32 + 1);
        if !(lj > 4.0 * rj) {
            return Err(Error::param(format!(
                "rectangle {j} violates l_j > 4 r_j (l_j = {lj}, r_j = {rj})"
            )));
        }
        out.r.push(rj);
        out.len.push(lj);
        out.h.push(h / 2.0 * (1.0 - q.powi(j as i32 + 1)));
        j += 1;
    }
    Ok(out)
}

pub(crate) fn lens_branch_4w(l: f64, h: f64, r: f64) -> Result<(Scene, Info)> {
    let lay = lens_branch_layout(l, h, r)?;
    let wells = make_well_set(&Family::FourWell2d)?;
    let domain = Polytope::polygon_xy(&[(-l / 2.0, 0.0), (0.0, -h / 2.0), (l / 2.0, 0.0), (0.0, h / 2.0)]);
    let mut scene = Scene::new(2, domain, wells);
    let jn = lay.r.len();
    let mut leftover = 0.0;
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            let w = lens_macro(l, h, sx, sy);
            let pair = four_well_pair(sx);
            let macro_phase = label(&scene, &w);
            let mut push_macro = |scene: &mut Scene, pts: [(f64, f64); 3]| -> Result<()> {
                let poly = Polytope::polygon_xy(&pts);
                let a = poly.volume()?;
                if a > 0.0 {
                    leftover += a;
                    scene.push(poly, macro_phase, CellKind::Macro, w);
                }
                Ok(())
            };
            for j in 0..jn {
                let prev = if j == 0 { l / 2.0 } else { lay.len[j - 1] };
                let (lj, y0, y1) = (lay.len[j], lay.h[j], lay.h[j + 1]);
                push_macro(&mut scene, [(sx * prev, sy * y0), (sx * lj, sy * y0), (sx * lj, sy * y1)])?;
                let block = Block {
                    corner: p2(sx * lj, sy * y0),
                    s_dir: unit(0, -sx),
                    t_dir: unit(1, sy),
                    len: lj,
                    height: lay.r[j],
                    w: 1.0 / 3.0,
                    pair,
                };
                block.emit(&mut scene, &w).map_err(|e| match e {
                    Error::Parameter(m) => Error::param(format!("rectangle {j}: {m}")),
                    other => other,
                })?;
            }
            let top = lay.h[jn];
            let lt = lay.len[jn - 1];
            push_macro(&mut scene, [(sx * lt, sy * top), (0.0, sy * top), (0.0, sy * h / 2.0)])?;
        }
    }
    let mut info = Info::new();
    info.insert("rectangles".into(), jn as f64);
    info.insert("leftover_area".into(), leftover / 4.0);
    info.insert("aspect".into(), lay.r[0] / lay.len[0]);
    Ok((scene, info))
}

/// Generation depths of the outer branching: `d_j = h_j − h_{j+1}` with
/// `h_j = (H/2)θ^j`, stopping at the first `j` with `L 2^{-j} > h_j`.
pub fn double_branch_generations(l: f64, h: f64, theta: f64) -> (Vec<f64>, f64) {
    let hj = |j: i32| h / 2.0 * theta.powi(j);
    let mut gens = Vec::new();
    let mut j = 0;
    while !(l / 2f64.powi(j) > hj(j)) {
        gens.push(hj(j) - hj(j + 1));
        j += 1;
    }
    (gens, hj(j))
}

pub(crate) fn double_branch_4w(l: f64, h: f64, theta: f64) -> Result<(Scene, Info)> {
    if !(theta > 0.25 && theta < 0.5) {
        return Err(Error::param(format!("theta must lie in (1/4, 1/2), got {theta}")));
    }
    if !(h > l && l > 1.0) {
        return Err(Error::param(format!("double branching needs H > L > 1, got L = {l}, H = {h}")));
    }
    let wells = make_well_set(&Family::FourWell2d)?;
    let mut scene = Scene::new(2, Polytope::rect(0.0, l, -h / 2.0, h / 2.0), wells);
    let (gens, cutoff) = double_branch_generations(l, h, theta);
    let plan = HalfPlan::explicit(l, gens.clone(), cutoff);
    let saw = Saw::from_values(-1.0, 1.0, 0.5);
    let pieces = plan.pieces(saw);
    let mut blocks = 0usize;
    for sy in [1.0, -1.0] {
        let frame = Frame { origin: [0.0; 3], s_dir: unit(1, sy), t_dir: unit(0, 1.0) };
        for pc in &pieces {
            if pc.area() <= 0.0 {
                continue;
            }
            let map = frame.lift(pc, &Affine::ZERO);
            let pts: Vec<Point> = pc.pts.iter().map(|q| frame.map(q[0], q[1])).collect();
            match pc.role {
                Role::Ramp => {
                    let ph = label(&scene, &map);
                    scene.push(Polytope::polygon(pts), ph, CellKind::Cutoff, map);
                }
                Role::Alpha => blocks += fill_region(&mut scene, &pts, &map, four_well_pair(-1.0))?,
                Role::Beta => blocks += fill_region(&mut scene, &pts, &map, four_well_pair(1.0))?,
            }
        }
    }
    let mut info = Info::new();
    info.insert("generations".into(), gens.len() as f64);
    info.insert("cutoff".into(), cutoff);
    info.insert("inner_blocks".into(), blocks as f64);
    Ok((scene, info))
}

/// Horizontal extent of a convex polygon at height `y`.
fn x_range(pts: &[Point], y: f64) -> Option<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let k = pts.len();
    for i in 0..k {
        let (a, b) = (pts[i], pts[(i + 1) % k]);
        let (ya, yb) = (a[1], b[1]);
        if (ya - y) * (yb - y) <= 0.0 {
            if ya == yb {
                lo = lo.min(a[0].min(b[0]));
                hi = hi.max(a[0].max(b[0]));
            } else {
                let t = (y - ya) / (yb - ya);
                let x = a[0] + t * (b[0] - a[0]);
                lo = lo.min(x);
                hi = hi.max(x);
            }
        }
    }
    (lo <= hi).then_some((lo, hi))
}

/// Inner slab height for a region of width `w`.
fn slab_height(w: f64) -> f64 {
    (DOUBLE_BRANCH_KAPPA * w.max(0.0).powf(2.0 / 3.0)).min(w / 4.5)
}

/// Width of the largest rectangle spanning `[y0, y1]` inside a convex
/// polygon.
fn inscribed(pts: &[Point], y0: f64, y1: f64) -> Option<(f64, f64)> {
    let a = x_range(pts, y0)?;
    let b = x_range(pts, y1)?;
    let (lo, hi) = (a.0.max(b.0), a.1.min(b.1));
    (hi > lo).then_some((lo, hi))
}

/// Fills a convex region carrying an averaged gradient with horizontal
/// slabs, each holding a branching block in its largest inscribed
/// rectangle. Slab heights follow the local width. Returns the number of
/// blocks.
fn fill_region(scene: &mut Scene, pts: &[Point], bg: &Affine, pair: Pair) -> Result<usize> {
    let poly = Polytope::polygon(pts.to_vec());
    let (lo, hi) = poly.bbox();
    let macro_phase = label(scene, bg);
    let area_tol = 1e-12 * ((hi[0] - lo[0]) * (hi[1] - lo[1])).max(1e-300);
    let push_left = |scene: &mut Scene, piece: Option<Polytope>| {
        if let Some(p) = piece {
            if p.signed_volume().abs() > area_tol {
                scene.push(p, macro_phase, CellKind::Macro, *bg);
            }
        }
    };
    let floor = 1e-9 * (hi[1] - lo[1]);
    let mut count = 0;
    let mut y0 = lo[1];
    while y0 < hi[1] - floor {
        let width_at = |y: f64| x_range(pts, y).map_or(0.0, |r| r.1 - r.0);
        let mut s = slab_height(width_at(y0).max(width_at((y0 + 1.0).min(hi[1]))));
        for _ in 0..4 {
            let y1 = (y0 + s).min(hi[1]);
            let w = inscribed(pts, y0, y1).map_or(0.0, |r| r.1 - r.0);
            s = slab_height(w).max(s.min(hi[1] - y0) * 0.5);
        }
        let s_ok = s > 0.05;
        let mut y1 = if s_ok { (y0 + s).min(hi[1]) } else { (y0 + 1.0).min(hi[1]) };
        if hi[1] - y1 < 0.25 * s {
            y1 = hi[1];
        }
        let slab = poly
            .clip_halfplane([0.0, -1.0, 0.0], -y0)
            .and_then(|p| p.clip_halfplane([0.0, 1.0, 0.0], y1));
        if let Some(slab) = slab {
            match inscribed(pts, y0, y1) {
                Some((xl, xr)) if s_ok && xr - xl > 4.0 * (y1 - y0) * 1.0001 => {
                    let block = Block {
                        corner: p2(xl, y0),
                        s_dir: unit(0, 1.0),
                        t_dir: unit(1, 1.0),
                        len: xr - xl,
                        height: y1 - y0,
                        w: 1.0 / 3.0,
                        pair,
                    };
                    block.emit(scene, bg)?;
                    count += 1;
                    push_left(scene, slab.clip_halfplane([1.0, 0.0, 0.0], xl));
                    push_left(scene, slab.clip_halfplane([-1.0, 0.0, 0.0], -xr));
                }
                _ => push_left(scene, Some(slab)),
            }
        }
        y0 = y1;
    }
    Ok(count)
}

/// Stand-alone block on `[0, ℓ] × [0, h]` (long axis along the component
/// where the two wells agree) with boundary map `B x`.
#[derive(Clone, Debug)]
pub struct BlockScene {
    pub scene: Scene,
    pub background: Affine,
    pub generations: usize,
}

pub fn branching_block(
    wells: &WellSet,
    len: f64,
    height: f64,
    p: usize,
    q: usize,
    w: f64,
) -> Result<BlockScene> {
    if wells.n() != 2 {
        return Err(Error::param("branching blocks are planar"));
    }
    if !(w > 0.0 && w < 1.0) {
        return Err(Error::param(format!("weight must lie in (0,1), got {w}")));
    }
    let (pp, qq) = (Phase::Well(p), Phase::Well(q));
    if !wells.has_phase(pp) || !wells.has_phase(qq) || p == q {
        return Err(Error::param(format!("wells {p}, {q} are not two distinct wells")));
    }
    let (a, b) = (wells.diag_f64(pp), wells.diag_f64(qq));
    let differ: Vec<usize> = (0..2).filter(|&i| a[i] != b[i]).collect();
    if differ.len() != 1 {
        return Err(Error::param("the two wells must differ in exactly one component"));
    }
    let t_axis = differ[0];
    let s_axis = 1 - t_axis;
    let mut bdiag = [0.0; 3];
    for i in 0..2 {
        bdiag[i] = w * a[i] + (1.0 - w) * b[i];
    }
    let bg = Affine::diag(bdiag);
    let mut hi = [0.0; 3];
    hi[s_axis] = len;
    hi[t_axis] = height;
    let domain = Polytope::rect(0.0, hi[0], 0.0, hi[1]);
    let mut scene = Scene::new(2, domain, wells.clone());
    let block = Block {
        corner: [0.0; 3],
        s_dir: unit(s_axis, 1.0),
        t_dir: unit(t_axis, 1.0),
        len,
        height,
        w,
        pair: Pair { p: pp, q: qq },
    };
    let plan = block.emit(&mut scene, &bg)?;
    Ok(BlockScene { scene, background: bg, generations: plan.gens.len() })
}

impl BlockScene {
    /// Elastic energy plus the internal interfaces of the block. The outer
    /// boundary carries `B x` rather than zero, so its trace is not charged.
    pub fn energy(&self) -> Result<EnergyBreakdown> {
        let ov = crate::geometry::overlay(&self.scene);
        let rep = crate::geometry::check_admissible_with(&self.scene, &ov);
        if rep.max_continuity_jump > rep.tolerance() {
            return Err(Error::Admissibility(format!(
                "block jumps by {:.3e} across a shared face",
                rep.max_continuity_jump
            )));
        }
        let (elastic, _, volume) = scene_energy_parts(&self.scene, &ov)?;
        let mut surface = 0.0;
        for p in &ov.internal {
            let a = self.scene.chi(self.scene.cells[p.minus].phase);
            let b = self.scene.chi(self.scene.cells[p.plus].phase);
            surface += p.measure * norm(sub(a, b));
        }
        Ok(EnergyBreakdown::new(elastic, surface, 1.0, volume))
    }

    /// Largest `|u − B x|` over boundary vertices of the block.
    pub fn boundary_deviation(&self) -> f64 {
        let ov = crate::geometry::overlay(&self.scene);
        let mut dev: f64 = 0.0;
        for piece in &ov.boundary {
            let c = &self.scene.cells[piece.cell];
            for &p in &piece.vertices {
                dev = dev.max(norm(sub(c.map.eval(p), self.background.eval(p))));
            }
        }
        dev
    }
}
