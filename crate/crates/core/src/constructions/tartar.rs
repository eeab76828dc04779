//! Order-k nested laminate for the Tartar square.

use crate::constants::TARTAR_C;
use crate::error::{Error, Result};
use crate::geometry::{Affine, CellKind, Polytope, Scene};
use crate::wells::{Family, Phase, make_well_set};

use super::branching::Info;
use super::laminate::{Frame, Pair, Piece, Role, Saw, emit, label, ramp, straight, unit};

/// Nodes of the laminate tree: the averaged gradients reached along the
/// way from 0 to the four wells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Node {
    Zero,
    Left,
    Right,
    Q(usize),
    Well(usize),
}

impl Node {
    fn diag(self) -> [f64; 2] {
        match self {
            Node::Zero => [0.0, 0.0],
            Node::Left => [-1.0, 0.0],
            Node::Right => [1.0, 0.0],
            Node::Q(i) => [[-1.0, 1.0], [1.0, 1.0], [1.0, -1.0], [-1.0, -1.0]][i],
            Node::Well(i) => [[-1.0, -3.0], [-3.0, 1.0], [1.0, 3.0], [3.0, -1.0]][i],
        }
    }

    /// `(normal axis, first child, its weight, second child)`.
    fn split(self) -> Option<(usize, Node, f64, Node)> {
        Some(match self {
            Node::Zero => (0, Node::Left, 0.5, Node::Right),
            Node::Left => (1, Node::Well(0), 0.25, Node::Q(0)),
            Node::Right => (1, Node::Well(2), 0.25, Node::Q(2)),
            Node::Q(0) => (0, Node::Well(1), 0.5, Node::Q(1)),
            Node::Q(1) => (1, Node::Well(2), 0.5, Node::Q(2)),
            Node::Q(2) => (0, Node::Well(3), 0.5, Node::Q(3)),
            Node::Q(3) => (1, Node::Well(0), 0.5, Node::Q(0)),
            _ => return None,
        })
    }
}

/// Guard on the estimated cell count, which grows like `LH/(r_k r_{k-1})`.
const MAX_CELLS: f64 = 1e6;

/// Length scales `r_j = r^j / L^{j-1}`, `j = 1..=k`.
pub fn tartar_scales(l: f64, r: f64, k: usize) -> Vec<f64> {
    (1..=k).map(|j| r.powi(j as i32) / l.powi(j as i32 - 1)).collect()
}

pub(crate) fn check(l: f64, h: f64, r: f64, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::param("laminate order k must be at least 1"));
    }
    if !(h > 0.0 && h <= l) {
        return Err(Error::param(format!("nested laminate needs 0 < H <= L, got L = {l}, H = {h}")));
    }
    if !(r > 0.0 && r <= TARTAR_C * h) {
        return Err(Error::param(format!(
            "nested laminate needs r <= c H with c = {TARTAR_C}, got r = {r}, H = {h}"
        )));
    }
    let scales = tartar_scales(l, r, k);
    if !(scales[k - 1] > 1e-9 * l) {
        return Err(Error::param(format!("finest scale r_k = {} is below the feature floor", scales[k - 1])));
    }
    let coarse = if k > 1 { scales[k - 2] } else { l };
    let cells = 6.0 * l * h / (scales[k - 1] * coarse);
    if cells > MAX_CELLS {
        return Err(Error::param(format!(
            "nested laminate would need about {cells:.3e} cells (limit {MAX_CELLS:.0e}); raise r"
        )));
    }
    Ok(())
}

struct Ctx {
    scales: Vec<f64>,
    levels: usize,
    leaves_unresolved: f64,
}

pub(crate) fn tartar(l: f64, h: f64, r: f64, k: usize) -> Result<(Scene, Info)> {
    check(l, h, r, k)?;
    let wells = make_well_set(&Family::Tartar)?;
    let mut scene = Scene::new(2, Polytope::rect(0.0, l, 0.0, h), wells);
    let mut ctx = Ctx { scales: tartar_scales(l, r, k), levels: 0, leaves_unresolved: 0.0 };
    laminate(&mut scene, &mut ctx, Node::Zero, [[0.0, l], [0.0, h]], &Affine::ZERO, 1);
    let mut info = Info::new();
    info.insert("levels".into(), ctx.levels as f64);
    info.insert("unresolved_area".into(), ctx.leaves_unresolved);
    Ok((scene, info))
}

fn leaf(scene: &mut Scene, ctx: &mut Ctx, node: Node, rect: [[f64; 2]; 2], bg: &Affine) {
    let poly = Polytope::rect(rect[0][0], rect[0][1], rect[1][0], rect[1][1]);
    match node {
        Node::Well(i) => scene.push(poly, Phase::Well(i), CellKind::Laminate, *bg),
        _ => {
            ctx.leaves_unresolved += (rect[0][1] - rect[0][0]) * (rect[1][1] - rect[1][0]);
            let ph = label(scene, bg);
            scene.push(poly, ph, CellKind::Macro, *bg);
        }
    }
}

fn laminate(scene: &mut Scene, ctx: &mut Ctx, node: Node, rect: [[f64; 2]; 2], bg: &Affine, level: usize) {
    let Some((a, c1, w, c2)) = node.split() else {
        return leaf(scene, ctx, node, rect, bg);
    };
    if level > ctx.scales.len() {
        return leaf(scene, ctx, node, rect, bg);
    }
    let b = 1 - a;
    let rj = ctx.scales[level - 1];
    let ea = rect[a][1] - rect[a][0];
    let eb = rect[b][1] - rect[b][0];
    // Transition layers one scale finer than the oscillation, r_k at the bottom.
    let cut = ctx.scales.get(level).copied().unwrap_or(rj);
    if !(eb > 2.0 * cut * (1.0 + 1e-9)) || !(ea > 0.5 * rj) {
        return leaf(scene, ctx, node, rect, bg);
    }
    ctx.levels = ctx.levels.max(level);
    let m = (ea / rj).round().max(1.0) as usize;
    let p = ea / m as f64;
    let saw = Saw::from_values(c1.diag()[a], c2.diag()[a], w);
    let mut origin = [0.0; 3];
    origin[a] = rect[a][0];
    origin[b] = rect[b][0];
    let frame = Frame { origin, s_dir: unit(b, 1.0), t_dir: unit(a, 1.0) };
    let unused = Pair { p: Phase::Austenite, q: Phase::Austenite };
    for i in 0..m {
        let t0 = i as f64 * p;
        let mut ramps: Vec<Piece> = ramp(cut, 0.0, t0, p, saw).to_vec();
        ramps.extend(ramp(eb - cut, eb, t0, p, saw));
        emit(scene, &frame, &ramps, bg, unused);
        for piece in straight(cut, eb - cut, t0, p, saw) {
            let child = if piece.role == Role::Alpha { c1 } else { c2 };
            let map = frame.lift(&piece, bg);
            let (ta, tb) = (piece.pts[0][1], piece.pts[2][1]);
            let mut sub = [[0.0; 2]; 2];
            sub[a] = [rect[a][0] + ta, rect[a][0] + tb];
            sub[b] = [rect[b][0] + cut, rect[b][1] - cut];
            if i + 1 == m && piece.role == Role::Beta {
                sub[a][1] = rect[a][1];
            }
            laminate(scene, ctx, child, sub, &map, level + 1);
        }
    }
}

/// `LH(2^{-k} + r/L + Σ_{j=2}^k 2^{-j} r_j/r_{j-1} + Σ_{j=1}^k 2^{-j}/r_k)`.
pub fn tartar_bound(l: f64, h: f64, r: f64, k: usize) -> f64 {
    let s = tartar_scales(l, r, k);
    let mut acc = 0.5f64.powi(k as i32) + r / l;
    for j in 2..=k {
        acc += 0.5f64.powi(j as i32) * s[j - 1] / s[j - 2];
    }
    acc += (1.0 - 0.5f64.powi(k as i32)) / s[k - 1];
    l * h * acc
}
