use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{CoreError, Result};

/// Periodic box descriptor: dimension, resolution, period and the FFT-ordered
/// wavenumber lattice. Transform plans are cached on the grid.
pub struct Grid {
    d: usize,
    n: usize,
    len: f64,
    /// Integer frequencies per axis in FFT order: 0, 1, ..., N/2-1, -N/2, ..., -1.
    freqs: Vec<i64>,
    /// |k|^2 per linear mode index, in units of (2*pi/L)^2.
    ksq: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("d", &self.d)
            .field("n", &self.n)
            .field("len", &self.len)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.d == other.d && self.n == other.n && self.len == other.len
    }
}

/// Build a periodic grid. `d` in {2,3}, `n` a power of two >= 8, `len > 0`.
pub fn make_grid(d: usize, n: usize, len: f64) -> Result<Arc<Grid>> {
    if d != 2 && d != 3 {
        return Err(CoreError::BadDimension(d));
    }
    if n < 8 || !n.is_power_of_two() {
        return Err(CoreError::BadResolution(n));
    }
    if !(len > 0.0) || !len.is_finite() {
        return Err(CoreError::BadPeriod(len));
    }
    let freqs: Vec<i64> = (0..n)
        .map(|i| if i < n / 2 { i as i64 } else { i as i64 - n as i64 })
        .collect();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let scale = 2.0 * std::f64::consts::PI / len;
    let size = n.pow(d as u32);
    let mut ksq = vec![0.0; size];
    for (idx, slot) in ksq.iter_mut().enumerate() {
        let f = int_freq_at(&freqs, d, n, idx);
        let s = (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]) as f64;
        *slot = s * scale * scale;
    }
    Ok(Arc::new(Grid {
        d,
        n,
        len,
        freqs,
        ksq,
        fwd,
        inv,
    }))
}

fn int_freq_at(freqs: &[i64], d: usize, n: usize, idx: usize) -> [i64; 3] {
    match d {
        2 => [freqs[idx / n], freqs[idx % n], 0],
        _ => [freqs[idx / (n * n)], freqs[(idx / n) % n], freqs[idx % n]],
    }
}

impl Grid {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> f64 {
        self.len
    }

    /// Total number of lattice modes, N^d.
    pub fn size(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Physical volume of the box, L^d.
    pub fn volume(&self) -> f64 {
        self.len.powi(self.d as i32)
    }

    /// Wavenumber unit 2*pi/L.
    pub fn scale(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.len
    }

    /// Largest integer axis frequency kept by the 2/3 dealiasing rule.
    pub fn dealias_m(&self) -> i64 {
        (self.n / 3) as i64
    }

    /// Largest retained |k| after dealiasing, (2*pi/L) * floor(N/3).
    pub fn k_max(&self) -> f64 {
        self.scale() * self.dealias_m() as f64
    }

    /// Integer frequency tuple of the mode with linear index `idx` (third entry 0 in d = 2).
    pub fn int_freq(&self, idx: usize) -> [i64; 3] {
        int_freq_at(&self.freqs, self.d, self.n, idx)
    }

    /// Scaled wavevector of the mode with linear index `idx`.
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let f = self.int_freq(idx);
        let s = self.scale();
        [f[0] as f64 * s, f[1] as f64 * s, f[2] as f64 * s]
    }

    /// |k|^2 of the mode with linear index `idx`.
    pub fn ksq(&self, idx: usize) -> f64 {
        self.ksq[idx]
    }

    pub fn ksq_table(&self) -> &[f64] {
        &self.ksq
    }

    /// Per-axis integer frequencies in FFT order.
    pub fn axis_freqs(&self) -> &[i64] {
        &self.freqs
    }

    /// True when every axis frequency of the mode survives the 2/3 rule.
    pub fn dealias_ok(&self, idx: usize) -> bool {
        let m = self.dealias_m();
        let f = self.int_freq(idx);
        f[0].abs() <= m && f[1].abs() <= m && f[2].abs() <= m
    }

    /// Linear index of the mode with the given integer frequency tuple.
    pub fn index_of(&self, f: [i64; 3]) -> usize {
        let n = self.n as i64;
        let wrap = |x: i64| ((x % n) + n) % n;
        match self.d {
            2 => (wrap(f[0]) * n + wrap(f[1])) as usize,
            _ => ((wrap(f[0]) * n + wrap(f[1])) * n + wrap(f[2])) as usize,
        }
    }

    /// Physical-space coordinates of the sample with linear index `idx`.
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let h = self.len / self.n as f64;
        let n = self.n;
        match self.d {
            2 => [(idx / n) as f64 * h, (idx % n) as f64 * h, 0.0],
            _ => [
                (idx / (n * n)) as f64 * h,
                ((idx / n) % n) as f64 * h,
                (idx % n) as f64 * h,
            ],
        }
    }

    pub(crate) fn fft_in_place(&self, data: &mut [Complex64], inverse: bool) {
        assert_eq!(data.len(), self.size());
        let n = self.n;
        let fft = if inverse { &self.inv } else { &self.fwd };
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..self.d {
            let stride = n.pow((self.d - 1 - axis) as u32);
            let block = stride * n;
            let mut base_block = 0;
            while base_block < data.len() {
                for inner in 0..stride {
                    let base = base_block + inner;
                    if stride == 1 {
                        fft.process(&mut data[base..base + n]);
                    } else {
                        for (i, slot) in line.iter_mut().enumerate() {
                            *slot = data[base + i * stride];
                        }
                        fft.process(&mut line);
                        for (i, v) in line.iter().enumerate() {
                            data[base + i * stride] = *v;
                        }
                    }
                }
                base_block += block;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft_standard_ordering() {
        let g = make_grid(2, 8, 2.0 * std::f64::consts::PI).unwrap();
        assert_eq!(g.axis_freqs(), &[0, 1, 2, 3, -4, -3, -2, -1]);
    }

    #[test]
    fn k_max_two_thirds() {
        let g = make_grid(3, 16, 2.0 * std::f64::consts::PI).unwrap();
        assert_eq!(g.dealias_m(), 5);
        assert!((g.k_max() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(make_grid(4, 8, 1.0).is_err());
        assert!(make_grid(2, 12, 1.0).is_err());
        assert!(make_grid(2, 4, 1.0).is_err());
        assert!(make_grid(2, 8, -1.0).is_err());
    }

    #[test]
    fn index_roundtrip() {
        let g = make_grid(3, 8, 2.0 * std::f64::consts::PI).unwrap();
        for idx in 0..g.size() {
            assert_eq!(g.index_of(g.int_freq(idx)), idx);
        }
    }
}
