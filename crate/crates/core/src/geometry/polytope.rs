//! Convex polygons and polyhedra with exact-volume formulas.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Point = [f64; 3];

pub fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: Point, s: f64) -> Point {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

pub fn lerp(a: Point, b: Point, t: f64) -> Point {
    [
        a[0] + t * (b[0] - a[0]),
        a[1] + t * (b[1] - a[1]),
        a[2] + t * (b[2] - a[2]),
    ]
}

pub fn p2(x: f64, y: f64) -> Point {
    [x, y, 0.0]
}

/// A facet of a polytope: an edge in 2D, a convex polygon in 3D.
#[derive(Clone, Debug)]
pub struct Facet {
    pub normal: Point,
    pub offset: f64,
    pub vertices: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Polytope {
    /// Counter-clockwise vertex loop in the `x1, x2` plane.
    Polygon { vertices: Vec<Point> },
    /// Vertices with outward-oriented face loops.
    Polyhedron { vertices: Vec<Point>, faces: Vec<Vec<usize>> },
}

fn signed_area2(v: &[Point]) -> f64 {
    let mut a = 0.0;
    for i in 0..v.len() {
        let p = v[i];
        let q = v[(i + 1) % v.len()];
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a
}

fn face_normal(vertices: &[Point], face: &[usize]) -> Point {
    // Newell's method, robust for planar convex loops.
    let mut nrm = [0.0; 3];
    for i in 0..face.len() {
        let p = vertices[face[i]];
        let q = vertices[face[(i + 1) % face.len()]];
        nrm[0] += (p[1] - q[1]) * (p[2] + q[2]);
        nrm[1] += (p[2] - q[2]) * (p[0] + q[0]);
        nrm[2] += (p[0] - q[0]) * (p[1] + q[1]);
    }
    nrm
}

impl Polytope {
    /// Polygon from a vertex loop in either orientation.
    pub fn polygon(mut vertices: Vec<Point>) -> Self {
        if signed_area2(&vertices) < 0.0 {
            vertices.reverse();
        }
        Polytope::Polygon { vertices }
    }

    pub fn polygon_xy(pts: &[(f64, f64)]) -> Self {
        Polytope::polygon(pts.iter().map(|&(x, y)| p2(x, y)).collect())
    }

    pub fn triangle(a: Point, b: Point, c: Point) -> Self {
        Polytope::polygon(vec![a, b, c])
    }

    pub fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Polytope::polygon_xy(&[(x0, y0), (x1, y0), (x1, y1), (x0, y1)])
    }

    /// Convex polyhedron from vertices and face loops; loops are reoriented
    /// to point outward.
    pub fn polyhedron(vertices: Vec<Point>, mut faces: Vec<Vec<usize>>) -> Self {
        let c = centroid_of(&vertices);
        for f in faces.iter_mut() {
            let nrm = face_normal(&vertices, f);
            if dot(nrm, sub(vertices[f[0]], c)) < 0.0 {
                f.reverse();
            }
        }
        Polytope::Polyhedron { vertices, faces }
    }

    pub fn tetra(a: Point, b: Point, c: Point, d: Point) -> Self {
        Polytope::polyhedron(
            vec![a, b, c, d],
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
        )
    }

    pub fn cuboid(lo: Point, hi: Point) -> Self {
        let v = |i: usize| {
            [
                if i & 1 == 0 { lo[0] } else { hi[0] },
                if i & 2 == 0 { lo[1] } else { hi[1] },
                if i & 4 == 0 { lo[2] } else { hi[2] },
            ]
        };
        let vertices: Vec<Point> = (0..8).map(v).collect();
        let faces = vec![
            vec![0, 2, 6, 4],
            vec![1, 3, 7, 5],
            vec![0, 1, 5, 4],
            vec![2, 3, 7, 6],
            vec![0, 1, 3, 2],
            vec![4, 5, 7, 6],
        ];
        Polytope::polyhedron(vertices, faces)
    }

    pub fn dim(&self) -> usize {
        match self {
            Polytope::Polygon { .. } => 2,
            Polytope::Polyhedron { .. } => 3,
        }
    }

    pub fn vertices(&self) -> &[Point] {
        match self {
            Polytope::Polygon { vertices } | Polytope::Polyhedron { vertices, .. } => vertices,
        }
    }

    /// Signed volume (area in 2D); positive for correctly oriented input.
    pub fn signed_volume(&self) -> f64 {
        match self {
            Polytope::Polygon { vertices } => signed_area2(vertices),
            Polytope::Polyhedron { vertices, faces } => {
                let p0 = vertices[0];
                let mut vol = 0.0;
                for f in faces {
                    for k in 1..f.len().saturating_sub(1) {
                        let a = sub(vertices[f[0]], p0);
                        let b = sub(vertices[f[k]], p0);
                        let c = sub(vertices[f[k + 1]], p0);
                        vol += dot(a, cross(b, c));
                    }
                }
                vol / 6.0
            }
        }
    }

    pub fn volume(&self) -> Result<f64> {
        let v = self.signed_volume();
        if v < -1e-12 * self.diameter().powi(self.dim() as i32).max(f64::MIN_POSITIVE) {
            return Err(Error::Geometry(format!("negative cell volume {v:e}")));
        }
        Ok(v.max(0.0))
    }

    pub fn centroid(&self) -> Point {
        centroid_of(self.vertices())
    }

    pub fn bbox(&self) -> (Point, Point) {
        bbox_of(self.vertices())
    }

    pub fn diameter(&self) -> f64 {
        let v = self.vertices();
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max(norm(sub(v[i], v[j])));
            }
        }
        d
    }

    pub fn facets(&self) -> Vec<Facet> {
        match self {
            Polytope::Polygon { vertices } => {
                let k = vertices.len();
                (0..k)
                    .filter_map(|i| {
                        let a = vertices[i];
                        let b = vertices[(i + 1) % k];
                        let d = sub(b, a);
                        let len = norm(d);
                        if len == 0.0 {
                            return None;
                        }
                        let normal = [d[1] / len, -d[0] / len, 0.0];
                        Some(Facet { normal, offset: dot(normal, a), vertices: vec![a, b] })
                    })
                    .collect()
            }
            Polytope::Polyhedron { vertices, faces } => faces
                .iter()
                .filter_map(|f| {
                    let nrm = face_normal(vertices, f);
                    let len = norm(nrm);
                    if len == 0.0 {
                        return None;
                    }
                    let normal = scale(nrm, 1.0 / len);
                    Some(Facet {
                        normal,
                        offset: dot(normal, vertices[f[0]]),
                        vertices: f.iter().map(|&i| vertices[i]).collect(),
                    })
                })
                .collect(),
        }
    }

    /// Total boundary measure (perimeter or surface area).
    pub fn boundary_measure(&self) -> f64 {
        self.facets().iter().map(|f| facet_measure(&f.vertices, f.normal)).sum()
    }

    /// Half-space membership with absolute slack `tol`.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        self.facets().iter().all(|f| dot(f.normal, p) <= f.offset + tol)
    }

    pub fn translated(&self, t: Point) -> Polytope {
        match self {
            Polytope::Polygon { vertices } => Polytope::Polygon {
                vertices: vertices.iter().map(|&v| add(v, t)).collect(),
            },
            Polytope::Polyhedron { vertices, faces } => Polytope::Polyhedron {
                vertices: vertices.iter().map(|&v| add(v, t)).collect(),
                faces: faces.clone(),
            },
        }
    }

    /// Image under an affine map that preserves orientation or reverses it;
    /// orientation is repaired either way.
    pub fn mapped(&self, f: impl Fn(Point) -> Point) -> Polytope {
        match self {
            Polytope::Polygon { vertices } => {
                Polytope::polygon(vertices.iter().map(|&v| f(v)).collect())
            }
            Polytope::Polyhedron { vertices, faces } => Polytope::polyhedron(
                vertices.iter().map(|&v| f(v)).collect(),
                faces.clone(),
            ),
        }
    }

    /// Polygon clipped to the half-plane `a·x <= b` (2D only).
    pub fn clip_halfplane(&self, a: Point, b: f64) -> Option<Polytope> {
        match self {
            Polytope::Polygon { vertices } => {
                let out = clip_loop(vertices, |p| b - dot(a, p));
                if out.len() < 3 || signed_area2(&out).abs() <= 0.0 {
                    None
                } else {
                    Some(Polytope::Polygon { vertices: dedup_loop(out) })
                }
            }
            Polytope::Polyhedron { .. } => None,
        }
    }
}

pub fn centroid_of(v: &[Point]) -> Point {
    let mut c = [0.0; 3];
    for p in v {
        c = add(c, *p);
    }
    scale(c, 1.0 / v.len().max(1) as f64)
}

pub fn bbox_of(v: &[Point]) -> (Point, Point) {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in v {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// Length of a segment or area of a planar polygon with unit normal `n`.
pub fn facet_measure(v: &[Point], n: Point) -> f64 {
    if v.len() == 2 {
        return norm(sub(v[1], v[0]));
    }
    let mut acc = [0.0; 3];
    for i in 0..v.len() {
        acc = add(acc, cross(v[i], v[(i + 1) % v.len()]));
    }
    0.5 * dot(acc, n).abs()
}

/// Keep the part of a loop where `side(p) >= 0`.
pub fn clip_loop(poly: &[Point], side: impl Fn(Point) -> f64) -> Vec<Point> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    let k = poly.len();
    for i in 0..k {
        let p = poly[i];
        let q = poly[(i + 1) % k];
        let sp = side(p);
        let sq = side(q);
        if sp >= 0.0 {
            out.push(p);
        }
        if (sp >= 0.0) != (sq >= 0.0) {
            let t = sp / (sp - sq);
            out.push(lerp(p, q, t));
        }
    }
    out
}

fn dedup_loop(mut v: Vec<Point>) -> Vec<Point> {
    v.dedup_by(|a, b| norm(sub(*a, *b)) == 0.0);
    while v.len() > 1 && norm(sub(v[0], *v.last().unwrap())) == 0.0 {
        v.pop();
    }
    v
}
