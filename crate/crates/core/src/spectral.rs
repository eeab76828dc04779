//! Multidimensional FFT of grid fields in the Plancherel normalization
//! `Σ_k |χ̂(k)|² = ∫ |χ|²`, with physical frequencies `k = 2π m / T`.

use rustfft::FftPlanner;
use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::GridField;

/// In-place forward DFT along every axis of an `n`-dimensional cube of
/// side `res`, row-major.
pub fn fft_nd(buf: &mut [Complex64], n: usize, res: usize) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(res);
    let total = buf.len();
    // Last axis is contiguous.
    fft.process(buf);
    let mut line = vec![Complex64::default(); res];
    for axis in (0..n.saturating_sub(1)).rev() {
        let stride = res.pow((n - 1 - axis) as u32);
        let block = stride * res;
        for start in (0..total).step_by(block) {
            for off in 0..stride {
                let base = start + off;
                for (i, l) in line.iter_mut().enumerate() {
                    *l = buf[base + i * stride];
                }
                fft.process(&mut line);
                for (i, l) in line.iter().enumerate() {
                    buf[base + i * stride] = *l;
                }
            }
        }
    }
}

pub fn check_resolution(res: usize) -> Result<()> {
    if res >= 2 && res.is_power_of_two() {
        Ok(())
    } else {
        Err(Error::Resolution(format!("N = {res} is not a power of two")))
    }
}

/// `|χ̂_jj(k)|²` for every lattice frequency, flat row-major.
pub fn power_spectrum(field: &GridField, j: usize) -> Result<Vec<f64>> {
    check_resolution(field.resolution)?;
    let mut buf: Vec<Complex64> =
        field.components[j].iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fft_nd(&mut buf, field.n, field.resolution);
    let norm = field.cell_volume() / field.len() as f64;
    Ok(buf.iter().map(|c| c.norm_sqr() * norm).collect())
}

/// Signed integer frequency index in `(-N/2, N/2]`.
pub fn signed_index(i: usize, res: usize) -> i64 {
    if i <= res / 2 { i as i64 } else { i as i64 - res as i64 }
}

/// Physical frequency vector of a flat index.
pub fn frequency(field: &GridField, flat: usize) -> [f64; 3] {
    let idx = field.index(flat);
    let w = 2.0 * std::f64::consts::PI / field.side;
    let mut k = [0.0; 3];
    for d in 0..field.n {
        k[d] = w * signed_index(idx[d], field.resolution) as f64;
    }
    k
}

/// Largest representable frequency, `π / h`.
pub fn nyquist(field: &GridField) -> f64 {
    std::f64::consts::PI / field.h()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parseval_on_random_field() {
        let mut f = GridField::zeros(2, 16, 3.0);
        let mut x = 0.3_f64;
        for v in f.components[0].iter_mut() {
            x = (x * 3.7 + 0.11).fract();
            *v = x - 0.5;
        }
        let ps = power_spectrum(&f, 0).unwrap();
        let total: f64 = ps.iter().sum();
        assert!((total - f.l2_squared(0)).abs() <= 1e-12 * total);
    }

    #[test]
    fn three_d_plane_wave_has_single_peak() {
        let res = 8;
        let mut f = GridField::zeros(3, res, 1.0);
        for flat in 0..f.len() {
            let idx = f.index(flat);
            f.components[0][flat] =
                (2.0 * std::f64::consts::PI * idx[1] as f64 / res as f64).cos();
        }
        let ps = power_spectrum(&f, 0).unwrap();
        let peaks: Vec<usize> = (0..ps.len()).filter(|&i| ps[i] > 1e-12).collect();
        assert_eq!(peaks.len(), 2);
        for p in peaks {
            let idx = f.index(p);
            assert_eq!(idx[0], 0);
            assert_eq!(idx[2], 0);
            assert!(idx[1] == 1 || idx[1] == res - 1);
        }
        assert!(power_spectrum(&GridField::zeros(2, 12, 1.0), 0).is_err());
    }
}
