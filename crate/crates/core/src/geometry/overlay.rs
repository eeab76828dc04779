//! Face overlay: matches cell facets lying in a common hyperplane so that
//! shared pieces of faces (including hanging-node configurations) and the
//! uncovered boundary remainder are both available with exact measures.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::polytope::{Point, add, clip_loop, cross, dot, facet_measure, norm, scale, sub};
use super::Scene;

/// A piece of hyperplane shared by two cells. `minus` has outward normal
/// `+normal`, `plus` has outward normal `-normal`.
#[derive(Clone, Debug)]
pub struct InternalPiece {
    pub minus: usize,
    pub plus: usize,
    pub measure: f64,
    pub normal: Point,
    pub tangents: Vec<Point>,
    pub vertices: Vec<Point>,
}

/// A piece of a cell facet with no neighbour on the other side.
#[derive(Clone, Debug)]
pub struct BoundaryPiece {
    pub cell: usize,
    pub measure: f64,
    pub vertices: Vec<Point>,
}

#[derive(Clone, Debug, Default)]
pub struct Overlay {
    pub internal: Vec<InternalPiece>,
    pub boundary: Vec<BoundaryPiece>,
    /// Measure of face pieces claimed by more than one cell on the same side.
    pub overlap_measure: f64,
}

struct Entry {
    cell: usize,
    /// `true` when the outward normal agrees with the canonical one.
    minus: bool,
    offset: f64,
    /// Unit normal of the facet itself, signed like the canonical one.
    normal: Point,
    vertices: Vec<Point>,
}

impl Entry {
    /// Moves a point of the representative plane onto the facet's own
    /// plane along `nrm`.
    fn onto(&self, nrm: Point, p: Point) -> Point {
        let d = dot(self.normal, nrm);
        let gap = dot(self.normal, sub(self.vertices[0], p));
        add(p, scale(nrm, gap / d))
    }
}

fn canonical(n: Point) -> (Point, bool) {
    for &c in &n {
        if c.abs() > 1e-12 {
            return if c > 0.0 { (n, true) } else { (scale(n, -1.0), false) };
        }
    }
    (n, true)
}

fn quantize(n: Point) -> [i64; 3] {
    [
        (n[0] * 1e8).round() as i64,
        (n[1] * 1e8).round() as i64,
        (n[2] * 1e8).round() as i64,
    ]
}

pub fn overlay(scene: &Scene) -> Overlay {
    let tol = 1e-9 * scene.scale();
    let mut groups: BTreeMap<[i64; 3], (Point, Vec<Entry>)> = BTreeMap::new();
    for (ci, cell) in scene.cells.iter().enumerate() {
        for f in cell.poly.facets() {
            if facet_measure(&f.vertices, f.normal) <= tol * tol {
                continue;
            }
            let (cn, minus) = canonical(f.normal);
            let key = quantize(cn);
            let g = groups.entry(key).or_insert_with(|| (cn, Vec::new()));
            let offset = dot(g.0, f.vertices[0]);
            g.1.push(Entry { cell: ci, minus, offset, normal: cn, vertices: f.vertices });
        }
    }

    // Split each normal class into planes by clustering offsets.
    let mut planes: Vec<(Point, f64, Vec<Entry>)> = Vec::new();
    for (_, (nrm, mut entries)) in groups {
        entries.sort_by(|a, b| a.offset.total_cmp(&b.offset));
        let mut cur: Vec<Entry> = Vec::new();
        let mut last = f64::NEG_INFINITY;
        for e in entries {
            if !cur.is_empty() && e.offset - last > tol {
                let off = cur.iter().map(|e| e.offset).sum::<f64>() / cur.len() as f64;
                planes.push((nrm, off, std::mem::take(&mut cur)));
            }
            last = e.offset;
            cur.push(e);
        }
        if !cur.is_empty() {
            let off = cur.iter().map(|e| e.offset).sum::<f64>() / cur.len() as f64;
            planes.push((nrm, off, cur));
        }
    }

    let parts: Vec<Overlay> = planes
        .par_iter()
        .map(|(nrm, off, entries)| {
            if scene.n == 2 {
                overlay_line(*nrm, *off, entries, tol)
            } else {
                overlay_plane(*nrm, *off, entries, tol)
            }
        })
        .collect();

    let mut out = Overlay::default();
    for p in parts {
        out.internal.extend(p.internal);
        out.boundary.extend(p.boundary);
        out.overlap_measure += p.overlap_measure;
    }
    out
}

fn overlay_line(nrm: Point, off: f64, entries: &[Entry], tol: f64) -> Overlay {
    let tan = [-nrm[1], nrm[0], 0.0];
    let at = |s: f64| add(scale(nrm, off), scale(tan, s));

    let mut coords: Vec<f64> = entries
        .iter()
        .flat_map(|e| e.vertices.iter().map(|&v| dot(tan, v)))
        .collect();
    coords.sort_by(f64::total_cmp);
    let mut reps: Vec<f64> = Vec::new();
    for c in coords {
        if reps.last().is_none_or(|&r| c - r > tol) {
            reps.push(c);
        }
    }
    let snap = |c: f64| -> usize {
        let i = reps.partition_point(|&r| r < c);
        let cand = [i.saturating_sub(1), i.min(reps.len() - 1)];
        if (reps[cand[0]] - c).abs() <= (reps[cand[1]] - c).abs() { cand[0] } else { cand[1] }
    };

    let mut adds: Vec<Vec<usize>> = vec![Vec::new(); reps.len()];
    let mut removes: Vec<Vec<usize>> = vec![Vec::new(); reps.len()];
    for (k, e) in entries.iter().enumerate() {
        let a = snap(dot(tan, e.vertices[0]));
        let b = snap(dot(tan, e.vertices[1]));
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if lo == hi {
            continue;
        }
        adds[lo].push(k);
        removes[hi].push(k);
    }

    let mut out = Overlay::default();
    let mut minus: Vec<usize> = Vec::new();
    let mut plus: Vec<usize> = Vec::new();
    // Current open run: (minus entry, plus entry, start coordinate).
    let mut run: Option<(Option<usize>, Option<usize>, f64)> = None;

    let flush = |run: &mut Option<(Option<usize>, Option<usize>, f64)>, end: f64, out: &mut Overlay| {
        if let Some((m, p, start)) = run.take() {
            let measure = end - start;
            if measure <= tol {
                return;
            }
            let host = &entries[m.or(p).unwrap_or(0)];
            let vertices = vec![host.onto(nrm, at(start)), host.onto(nrm, at(end))];
            match (m, p) {
                (Some(a), Some(b)) => out.internal.push(InternalPiece {
                    minus: entries[a].cell,
                    plus: entries[b].cell,
                    measure,
                    normal: nrm,
                    tangents: vec![tan],
                    vertices,
                }),
                (Some(c), None) | (None, Some(c)) => {
                    out.boundary.push(BoundaryPiece { cell: entries[c].cell, measure, vertices })
                }
                (None, None) => {}
            }
        }
    };

    for k in 0..reps.len() {
        for &r in &removes[k] {
            let list = if entries[r].minus { &mut minus } else { &mut plus };
            if let Some(pos) = list.iter().position(|&x| x == r) {
                list.remove(pos);
            }
        }
        for &a in &adds[k] {
            if entries[a].minus { minus.push(a) } else { plus.push(a) }
        }
        let sig = (minus.first().copied(), plus.first().copied());
        if k + 1 < reps.len() && (minus.len() > 1 || plus.len() > 1) {
            let len = reps[k + 1] - reps[k];
            out.overlap_measure += len * ((minus.len().max(1) - 1 + plus.len().max(1) - 1) as f64);
        }
        let same = run.as_ref().is_some_and(|r| (r.0, r.1) == sig);
        if !same {
            flush(&mut run, reps[k], &mut out);
            if k + 1 < reps.len() && (sig.0.is_some() || sig.1.is_some()) {
                run = Some((sig.0, sig.1, reps[k]));
            }
        }
    }
    if let Some(&end) = reps.last() {
        flush(&mut run, end, &mut out);
    }
    out
}

fn area2d(v: &[Point]) -> f64 {
    let mut a = 0.0;
    for i in 0..v.len() {
        let p = v[i];
        let q = v[(i + 1) % v.len()];
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a
}

fn clip_convex(subject: &[Point], clip: &[Point]) -> Vec<Point> {
    let mut out = subject.to_vec();
    for i in 0..clip.len() {
        if out.len() < 3 {
            return Vec::new();
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let e = sub(b, a);
        out = clip_loop(&out, |p| {
            let d = sub(p, a);
            e[0] * d[1] - e[1] * d[0]
        });
    }
    out
}

fn overlay_plane(nrm: Point, off: f64, entries: &[Entry], tol: f64) -> Overlay {
    let helper = {
        let a = nrm.map(f64::abs);
        if a[0] <= a[1] && a[0] <= a[2] {
            [1.0, 0.0, 0.0]
        } else if a[1] <= a[2] {
            [0.0, 1.0, 0.0]
        } else {
            [0.0, 0.0, 1.0]
        }
    };
    let e1 = {
        let c = cross(nrm, helper);
        scale(c, 1.0 / norm(c))
    };
    let e2 = cross(nrm, e1);
    let lift = |q: Point| add(scale(nrm, off), add(scale(e1, q[0]), scale(e2, q[1])));

    struct Flat {
        loop2: Vec<Point>,
        area: f64,
        lo: [f64; 2],
        hi: [f64; 2],
    }
    let flats: Vec<Flat> = entries
        .iter()
        .map(|e| {
            let mut loop2: Vec<Point> =
                e.vertices.iter().map(|&v| [dot(e1, v), dot(e2, v), 0.0]).collect();
            if area2d(&loop2) < 0.0 {
                loop2.reverse();
            }
            let mut lo = [f64::INFINITY; 2];
            let mut hi = [f64::NEG_INFINITY; 2];
            for p in &loop2 {
                for k in 0..2 {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
            let area = area2d(&loop2);
            Flat { loop2, area, lo, hi }
        })
        .collect();

    let minus_ids: Vec<usize> = (0..entries.len()).filter(|&i| entries[i].minus).collect();
    let plus_ids: Vec<usize> = (0..entries.len()).filter(|&i| !entries[i].minus).collect();

    // Bucket the plus side on a uniform grid over the plane's bounding box.
    let mut glo = [f64::INFINITY; 2];
    let mut ghi = [f64::NEG_INFINITY; 2];
    for f in &flats {
        for k in 0..2 {
            glo[k] = glo[k].min(f.lo[k]);
            ghi[k] = ghi[k].max(f.hi[k]);
        }
    }
    let g = ((plus_ids.len() as f64).sqrt().ceil() as usize).clamp(1, 256);
    let cell_w = [(ghi[0] - glo[0]).max(tol) / g as f64, (ghi[1] - glo[1]).max(tol) / g as f64];
    let bucket = |x: f64, k: usize| -> usize {
        (((x - glo[k]) / cell_w[k]).floor().max(0.0) as usize).min(g - 1)
    };
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); g * g];
    for &p in &plus_ids {
        let f = &flats[p];
        for bx in bucket(f.lo[0], 0)..=bucket(f.hi[0], 0) {
            for by in bucket(f.lo[1], 1)..=bucket(f.hi[1], 1) {
                buckets[bx * g + by].push(p);
            }
        }
    }

    let mut out = Overlay::default();
    let mut covered = vec![0.0; entries.len()];
    let mut stamp = vec![usize::MAX; entries.len()];
    let area_tol = tol * tol;
    for &m in &minus_ids {
        let fm = &flats[m];
        for bx in bucket(fm.lo[0], 0)..=bucket(fm.hi[0], 0) {
            for by in bucket(fm.lo[1], 1)..=bucket(fm.hi[1], 1) {
                for &p in &buckets[bx * g + by] {
                    if stamp[p] == m {
                        continue;
                    }
                    stamp[p] = m;
                    let fp = &flats[p];
                    if fp.lo[0] > fm.hi[0] + tol
                        || fp.hi[0] < fm.lo[0] - tol
                        || fp.lo[1] > fm.hi[1] + tol
                        || fp.hi[1] < fm.lo[1] - tol
                    {
                        continue;
                    }
                    let inter = clip_convex(&fm.loop2, &fp.loop2);
                    if inter.len() < 3 {
                        continue;
                    }
                    let a = area2d(&inter);
                    let span = inter.iter().map(|&q| norm(sub(q, inter[0]))).fold(0.0, f64::max);
                    if a <= area_tol || a <= tol * span {
                        continue;
                    }
                    covered[m] += a;
                    covered[p] += a;
                    out.internal.push(InternalPiece {
                        minus: entries[m].cell,
                        plus: entries[p].cell,
                        measure: a,
                        normal: nrm,
                        tangents: vec![e1, e2],
                        vertices: inter.iter().map(|&q| entries[m].onto(nrm, lift(q))).collect(),
                    });
                }
            }
        }
    }
    for (i, e) in entries.iter().enumerate() {
        let rest = flats[i].area - covered[i];
        if rest > area_tol.max(1e-9 * flats[i].area) {
            out.boundary.push(BoundaryPiece { cell: e.cell, measure: rest, vertices: e.vertices.clone() });
        } else if rest < -area_tol.max(1e-9 * flats[i].area) {
            out.overlap_measure += -rest;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Affine, CellKind, Polytope};
    use crate::wells::{Family, Phase, make_well_set};

    #[test]
    fn hanging_node_is_matched() {
        let k = make_well_set(&Family::FourWell2d).unwrap();
        let mut s = Scene::new(2, Polytope::rect(0.0, 2.0, 0.0, 2.0), k);
        s.push(Polytope::rect(0.0, 1.0, 0.0, 2.0), Phase::Well(0), CellKind::Laminate, Affine::ZERO);
        s.push(Polytope::rect(1.0, 2.0, 0.0, 1.0), Phase::Well(1), CellKind::Laminate, Affine::ZERO);
        s.push(Polytope::rect(1.0, 2.0, 1.0, 2.0), Phase::Well(2), CellKind::Laminate, Affine::ZERO);
        let ov = overlay(&s);
        let shared: f64 = ov.internal.iter().filter(|p| p.normal[0] > 0.5).map(|p| p.measure).sum();
        assert!((shared - 2.0).abs() < 1e-14);
        assert_eq!(ov.internal.len(), 3);
        let bnd: f64 = ov.boundary.iter().map(|p| p.measure).sum();
        assert!((bnd - 8.0).abs() < 1e-14);
        assert_eq!(ov.overlap_measure, 0.0);
    }

    #[test]
    fn cube_split_into_tetrahedra() {
        let k = make_well_set(&Family::FourWell3d).unwrap();
        let c = [
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 1.0],
            [0.0, 1.0, 1.0],
            [1.0, 1.0, 1.0],
        ];
        let mut s = Scene::new(3, Polytope::cuboid([0.0; 3], [1.0; 3]), k);
        // Kuhn triangulation along the main diagonal 0 -> 7.
        for perm in [[1, 3], [1, 5], [2, 3], [2, 6], [4, 5], [4, 6]] {
            s.push(
                Polytope::tetra(c[0], c[perm[0]], c[perm[1]], c[7]),
                Phase::Well(0),
                CellKind::Laminate,
                Affine::ZERO,
            );
        }
        let ov = overlay(&s);
        let bnd: f64 = ov.boundary.iter().map(|p| p.measure).sum();
        assert!((bnd - 6.0).abs() < 1e-12, "{bnd}");
        assert_eq!(ov.internal.len(), 6);
        assert!(ov.overlap_measure < 1e-12);
    }
}
