//! Periodic grid sampling of `chi` and the binary field format.
//!
//! File layout (little-endian): `b"NUCF"`, `u32` version (1), `u32 n`,
//! `u32 N`, `f64 T`, then `n` arrays of `N^n` `f64` values in row-major
//! order (first axis slowest).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use super::polytope::{Point, dot};
use super::Scene;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"NUCF";
const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    pub n: usize,
    pub resolution: usize,
    /// Side of the periodic box.
    pub side: f64,
    /// `components[j]` holds `chi_jj` at cell centres.
    pub components: Vec<Vec<f64>>,
}

impl GridField {
    pub fn zeros(n: usize, resolution: usize, side: f64) -> Self {
        let len = resolution.pow(n as u32);
        GridField { n, resolution, side, components: vec![vec![0.0; len]; n] }
    }

    pub fn len(&self) -> usize {
        self.resolution.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn h(&self) -> f64 {
        self.side / self.resolution as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.n as i32)
    }

    /// Multi-index of a flat index, first axis first.
    pub fn index(&self, flat: usize) -> [usize; 3] {
        let nn = self.resolution;
        let mut out = [0; 3];
        let mut rest = flat;
        for d in (0..self.n).rev() {
            out[d] = rest % nn;
            rest /= nn;
        }
        out
    }

    pub fn flat(&self, idx: [usize; 3]) -> usize {
        (0..self.n).fold(0, |acc, d| acc * self.resolution + idx[d])
    }

    /// Measure of the set where any component is nonzero.
    pub fn support_volume(&self) -> f64 {
        let cnt = (0..self.len())
            .filter(|&i| self.components.iter().any(|c| c[i] != 0.0))
            .count();
        cnt as f64 * self.cell_volume()
    }

    /// `∫ |chi_jj|²` on the grid.
    pub fn l2_squared(&self, j: usize) -> f64 {
        self.components[j].iter().map(|x| x * x).sum::<f64>() * self.cell_volume()
    }

    pub fn l1(&self, j: usize) -> f64 {
        self.components[j].iter().map(|x| x.abs()).sum::<f64>() * self.cell_volume()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RasterMeta {
    pub origin: Point,
    pub h: f64,
    /// Smallest `n·vol/boundary` over cells, a proxy for feature width.
    pub min_feature: f64,
    pub warning: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Raster {
    pub field: GridField,
    pub meta: RasterMeta,
}

/// Sample `chi` at cell centres of a periodic box of side
/// `padding × diam(Ω)` centred on `Ω`.
pub fn rasterize(scene: &Scene, resolution: usize, padding: f64) -> Result<Raster> {
    if resolution < 2 || !resolution.is_power_of_two() {
        return Err(Error::Resolution(format!("N = {resolution} is not a power of two")));
    }
    if !(padding >= 2.0) {
        return Err(Error::param(format!("padding must be at least 2, got {padding}")));
    }
    let n = scene.n;
    let diam = scene.scale();
    let side = padding * diam;
    let h = side / resolution as f64;
    let (lo, hi) = scene.domain.bbox();
    let mut origin = [0.0; 3];
    for d in 0..n {
        origin[d] = 0.5 * (lo[d] + hi[d]) - 0.5 * side;
    }
    let tol = 1e-12 * diam;

    let mut owner: Vec<u32> = vec![u32::MAX; resolution.pow(n as u32)];
    let mut min_feature = f64::INFINITY;
    for (ci, cell) in scene.cells.iter().enumerate() {
        let vol = cell.poly.volume()?;
        let bm = cell.poly.boundary_measure();
        if vol > 0.0 && bm > 0.0 {
            min_feature = min_feature.min(n as f64 * vol / bm);
        }
        let planes: Vec<(Point, f64)> =
            cell.poly.facets().into_iter().map(|f| (f.normal, f.offset)).collect();
        let (clo, chi) = cell.poly.bbox();
        let mut range = [(0usize, 0usize); 3];
        for d in 0..n {
            let a = ((clo[d] - origin[d]) / h - 0.5).ceil().max(0.0) as usize;
            let b = ((chi[d] - origin[d]) / h - 0.5).floor();
            if b < 0.0 {
                range[d] = (1, 0);
                continue;
            }
            range[d] = (a, (b as usize).min(resolution - 1));
        }
        if (0..n).any(|d| range[d].0 > range[d].1) {
            continue;
        }
        let r2 = if n == 3 { range[2] } else { (0, 0) };
        for i in range[0].0..=range[0].1 {
            for j in range[1].0..=range[1].1 {
                for k in r2.0..=r2.1 {
                    let p = [
                        origin[0] + (i as f64 + 0.5) * h,
                        origin[1] + (j as f64 + 0.5) * h,
                        if n == 3 { origin[2] + (k as f64 + 0.5) * h } else { 0.0 },
                    ];
                    if planes.iter().all(|&(nv, off)| dot(nv, p) <= off + tol) {
                        let flat = if n == 3 {
                            (i * resolution + j) * resolution + k
                        } else {
                            i * resolution + j
                        };
                        if owner[flat] == u32::MAX {
                            owner[flat] = ci as u32;
                        }
                    }
                }
            }
        }
    }

    let chis: Vec<[f64; 3]> = scene.cells.iter().map(|c| scene.chi(c.phase)).collect();
    let components: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            owner
                .iter()
                .map(|&o| if o == u32::MAX { 0.0 } else { chis[o as usize][j] })
                .collect()
        })
        .collect();

    let warning = (min_feature < 2.0 * h).then(|| {
        format!("finest feature {min_feature:.3e} is below two grid cells (h = {h:.3e})")
    });
    Ok(Raster {
        field: GridField { n, resolution, side, components },
        meta: RasterMeta { origin, h, min_feature, warning },
    })
}

pub fn write_field(field: &GridField, path: &Path) -> Result<()> {
    let mut buf = Vec::with_capacity(24 + 8 * field.n * field.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(field.n as u32).to_le_bytes());
    buf.extend_from_slice(&(field.resolution as u32).to_le_bytes());
    buf.extend_from_slice(&field.side.to_le_bytes());
    for c in &field.components {
        for v in c {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    let mut f = fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

/// Write the JSON sidecar next to `path` (same basename, `.json`).
pub fn write_sidecar(path: &Path, meta: &serde_json::Value) -> Result<PathBuf> {
    let side = path.with_extension("json");
    fs::write(&side, serde_json::to_string_pretty(meta)?)?;
    Ok(side)
}

pub fn read_field(path: &Path) -> Result<GridField> {
    let bytes = fs::read(path)?;
    parse_field(&bytes)
}

fn take<const K: usize>(bytes: &[u8], at: &mut usize) -> Result<[u8; K]> {
    let end = *at + K;
    let slice = bytes
        .get(*at..end)
        .ok_or_else(|| Error::Format(format!("truncated field file at byte {at}")))?;
    *at = end;
    Ok(slice.try_into().expect("slice length"))
}

pub fn parse_field(bytes: &[u8]) -> Result<GridField> {
    let mut at = 0;
    let magic: [u8; 4] = take(bytes, &mut at)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic bytes, expected NUCF".into()));
    }
    let version = u32::from_le_bytes(take(bytes, &mut at)?);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let n = u32::from_le_bytes(take(bytes, &mut at)?) as usize;
    let resolution = u32::from_le_bytes(take(bytes, &mut at)?) as usize;
    let side = f64::from_le_bytes(take(bytes, &mut at)?);
    if !(n == 2 || n == 3) {
        return Err(Error::Format(format!("unsupported dimension {n}")));
    }
    let len = resolution
        .checked_pow(n as u32)
        .ok_or_else(|| Error::Format("grid too large".into()))?;
    let expected = at + 8 * n * len;
    if bytes.len() < expected {
        return Err(Error::Format(format!(
            "truncated payload: {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    if bytes.len() > expected {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    let mut components = Vec::with_capacity(n);
    for _ in 0..n {
        let mut c = Vec::with_capacity(len);
        for _ in 0..len {
            c.push(f64::from_le_bytes(take(bytes, &mut at)?));
        }
        components.push(c);
    }
    Ok(GridField { n, resolution, side, components })
}
