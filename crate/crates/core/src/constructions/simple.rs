//! Unbranched constructions: the nucleus ball, the two-well lens and the
//! n-dimensional diamond.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{Affine, CellKind, Point, Polytope, Scene, cross, dot, norm, p2, scale};
use crate::wells::{Family, Phase, make_well_set};

use super::two_well;

const BALL_SIDES: usize = 64;

pub(crate) fn ball(n: usize, lambda: f64, volume: f64) -> Result<Scene> {
    if !(volume > 0.0) {
        return Err(Error::param(format!("V must be positive, got {volume}")));
    }
    let wells = two_well(lambda, n)?;
    let a = wells.diag_f64(Phase::Well(0));
    let inner = Affine::diag(a);
    match n {
        2 => {
            let unit_area = BALL_SIDES as f64 / 2.0 * (2.0 * std::f64::consts::PI / BALL_SIDES as f64).sin();
            let big = (volume / unit_area).sqrt();
            let r = big / 2.0;
            let ring = |rad: f64| -> Vec<Point> {
                (0..BALL_SIDES)
                    .map(|i| {
                        let t = 2.0 * std::f64::consts::PI * i as f64 / BALL_SIDES as f64;
                        p2(rad * t.cos(), rad * t.sin())
                    })
                    .collect()
            };
            let (ins, outs) = (ring(r), ring(big));
            let mut scene = Scene::new(2, Polytope::polygon(outs.clone()), wells);
            let origin = [0.0; 3];
            for i in 0..BALL_SIDES {
                let j = (i + 1) % BALL_SIDES;
                scene.push(
                    Polytope::triangle(origin, ins[i], ins[j]),
                    Phase::Well(0),
                    CellKind::Laminate,
                    inner,
                );
                for tri in [[ins[i], outs[i], outs[j]], [ins[i], outs[j], ins[j]]] {
                    let vals: Vec<Point> =
                        tri.iter().map(|&p| if norm(p) < 1.5 * r { inner.eval(p) } else { [0.0; 3] }).collect();
                    let map = Affine::from_simplex(2, &tri, &vals)?;
                    scene.push(Polytope::triangle(tri[0], tri[1], tri[2]), Phase::Well(0), CellKind::Cutoff, map);
                }
            }
            Ok(scene)
        }
        3 => {
            let (dirs, faces) = icosphere(2);
            let unit_vol: f64 =
                faces.iter().map(|f| dot(dirs[f[0]], cross(dirs[f[1]], dirs[f[2]])).abs() / 6.0).sum();
            let big = (volume / unit_vol).cbrt();
            let r = big / 2.0;
            let outs: Vec<Point> = dirs.iter().map(|&d| scale(d, big)).collect();
            let ins: Vec<Point> = dirs.iter().map(|&d| scale(d, r)).collect();
            let domain = Polytope::polyhedron(outs.clone(), faces.iter().map(|f| f.to_vec()).collect());
            let mut scene = Scene::new(3, domain, wells);
            let origin = [0.0; 3];
            for f in &faces {
                let mut s = *f;
                s.sort_unstable();
                let [i, j, k] = s;
                scene.push(
                    Polytope::tetra(origin, ins[i], ins[j], ins[k]),
                    Phase::Well(0),
                    CellKind::Laminate,
                    inner,
                );
                let tets = [
                    [ins[i], ins[j], ins[k], outs[k]],
                    [ins[i], ins[j], outs[j], outs[k]],
                    [ins[i], outs[i], outs[j], outs[k]],
                ];
                for t in tets {
                    let vals: Vec<Point> =
                        t.iter().map(|&p| if norm(p) < 1.5 * r { inner.eval(p) } else { [0.0; 3] }).collect();
                    let map = Affine::from_simplex(3, &t, &vals)?;
                    scene.push(Polytope::tetra(t[0], t[1], t[2], t[3]), Phase::Well(0), CellKind::Cutoff, map);
                }
            }
            Ok(scene)
        }
        _ => Err(Error::param(format!("ball needs n in {{2,3}}, got {n}"))),
    }
}

/// Unit icosahedron subdivided `levels` times and projected to the sphere.
fn icosphere(levels: usize) -> (Vec<Point>, Vec<[usize; 3]>) {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut verts: Vec<Point> = raw.iter().map(|&v| scale(v, 1.0 / norm(v))).collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..levels {
        let mut mids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut mid = |a: usize, b: usize, verts: &mut Vec<Point>| -> usize {
            let key = (a.min(b), a.max(b));
            *mids.entry(key).or_insert_with(|| {
                let m = scale(crate::geometry::add(verts[a], verts[b]), 0.5);
                verts.push(scale(m, 1.0 / norm(m)));
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    (verts, faces)
}

pub(crate) fn lens21(lambda: f64, l: f64, h: f64) -> Result<Scene> {
    if !(h > l && l > 1.0) {
        return Err(Error::param(format!("lens needs H > L > 1, got L = {l}, H = {h}")));
    }
    let wells = two_well(lambda, 2)?;
    let ll = lambda * l;
    let domain = Polytope::polygon_xy(&[(0.0, 0.0), (ll, -h / 2.0), (l, 0.0), (ll, h / 2.0)]);
    let mut scene = Scene::new(2, domain, wells);
    let k = 2.0 * lambda * (1.0 - lambda) * l / h;
    for sgn in [1.0, -1.0] {
        let tip = p2(ll, sgn * h / 2.0);
        // u₁ = (1−λ)x₁ − k|x₂| on the left, λ(L − x₁) − k|x₂| on the right.
        let left = Affine::linear([[1.0 - lambda, -sgn * k, 0.0], [0.0; 3], [0.0; 3]]);
        let mut right = Affine::linear([[-lambda, -sgn * k, 0.0], [0.0; 3], [0.0; 3]]);
        right.offset[0] = lambda * l;
        scene.push(Polytope::triangle(p2(0.0, 0.0), p2(ll, 0.0), tip), Phase::Well(1), CellKind::Laminate, left);
        scene.push(Polytope::triangle(p2(ll, 0.0), p2(l, 0.0), tip), Phase::Well(0), CellKind::Laminate, right);
    }
    Ok(scene)
}

pub(crate) fn diamond(n: usize, l: f64, h: f64) -> Result<Scene> {
    if !(n == 2 || n == 3) {
        return Err(Error::param(format!("diamond needs n in {{2,3}}, got {n}")));
    }
    if !(h >= l && l > 1.0) {
        return Err(Error::param(format!("diamond needs H >= L > 1, got L = {l}, H = {h}")));
    }
    let wells = make_well_set(&Family::SymmetricPair { n })?;
    let apex = |axis: usize, sgn: f64| -> Point {
        let mut p = [0.0; 3];
        p[axis] = sgn * if axis == 0 { l / 2.0 } else { h / 2.0 };
        p
    };
    let mut verts = Vec::new();
    for axis in 0..n {
        verts.push(apex(axis, 1.0));
        verts.push(apex(axis, -1.0));
    }
    let signs: Vec<Vec<f64>> = (0..1usize << n)
        .map(|m| (0..n).map(|i| if m >> i & 1 == 0 { 1.0 } else { -1.0 }).collect())
        .collect();
    let domain = if n == 2 {
        Polytope::polygon(vec![verts[0], verts[2], verts[1], verts[3]])
    } else {
        let faces = signs
            .iter()
            .map(|s| (0..3).map(|i| 2 * i + usize::from(s[i] < 0.0)).collect())
            .collect();
        Polytope::polyhedron(verts.clone(), faces)
    };
    let mut scene = Scene::new(n, domain, wells);
    for s in &signs {
        let mut map = Affine::ZERO;
        map.grad[0][0] = s[0];
        for i in 1..n {
            map.grad[0][i] = s[i] * l / h;
        }
        map.offset[0] = -l / 2.0;
        let mut pts = vec![[0.0; 3]];
        pts.extend((0..n).map(|i| apex(i, s[i])));
        let poly = if n == 2 {
            Polytope::triangle(pts[0], pts[1], pts[2])
        } else {
            Polytope::tetra(pts[0], pts[1], pts[2], pts[3])
        };
        let phase = if s[0] > 0.0 { Phase::Well(0) } else { Phase::Well(1) };
        scene.push(poly, phase, CellKind::Laminate, map);
    }
    Ok(scene)
}

/// `|Ω|` of the diamond.
pub(crate) fn diamond_volume(n: usize, l: f64, h: f64) -> f64 {
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    2f64.powi(n as i32) / fact * (l / 2.0) * (h / 2.0).powi(n as i32 - 1)
}
