use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::grid::Grid;

/// Three-component vector field stored as complex Fourier coefficients.
///
/// The forward transform is mean-preserving: the k = 0 coefficient is the
/// spatial mean of the field. In d = 2 the field still carries three
/// components (the 2.5-dimensional convention) with the third wavenumber
/// component identically zero.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Arc<Grid>,
    comp: [Vec<Complex64>; 3],
    /// Hint set by constructors that guarantee a divergence-free field.
    pub divfree: bool,
}

/// Vector field sampled on the physical lattice.
#[derive(Clone, Debug)]
pub struct PhysicalField {
    grid: Arc<Grid>,
    comp: [Vec<f64>; 3],
}

impl SpectralField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); grid.size()];
        SpectralField {
            grid: grid.clone(),
            comp: [z.clone(), z.clone(), z],
            divfree: true,
        }
    }

    pub fn from_components(grid: &Arc<Grid>, comp: [Vec<Complex64>; 3]) -> Result<Self> {
        for c in &comp {
            if c.len() != grid.size() {
                return Err(CoreError::ShapeMismatch {
                    expected: grid.size(),
                    got: c.len(),
                });
            }
        }
        Ok(SpectralField {
            grid: grid.clone(),
            comp,
            divfree: false,
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn comp(&self, m: usize) -> &[Complex64] {
        &self.comp[m]
    }

    pub fn comp_mut(&mut self, m: usize) -> &mut [Complex64] {
        &mut self.comp[m]
    }

    pub fn same_grid(&self, other: &SpectralField) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    /// Mode coefficient as a 3-vector.
    pub fn at(&self, idx: usize) -> [Complex64; 3] {
        [self.comp[0][idx], self.comp[1][idx], self.comp[2][idx]]
    }

    pub fn set(&mut self, idx: usize, v: [Complex64; 3]) {
        self.comp[0][idx] = v[0];
        self.comp[1][idx] = v[1];
        self.comp[2][idx] = v[2];
    }

    /// Spatial mean (the k = 0 coefficient), real parts.
    pub fn mean(&self) -> [f64; 3] {
        [self.comp[0][0].re, self.comp[1][0].re, self.comp[2][0].re]
    }

    /// L2 norm via Parseval: sqrt(vol * sum |u_hat|^2).
    pub fn l2(&self) -> f64 {
        let mut s = 0.0;
        for c in &self.comp {
            for v in c {
                s += v.norm_sqr();
            }
        }
        (s * self.grid.volume()).sqrt()
    }

    /// Maximum relative deviation from Hermitian symmetry.
    pub fn reality_error(&self) -> f64 {
        let amp = self
            .comp
            .iter()
            .flat_map(|c| c.iter())
            .map(|v| v.norm())
            .fold(0.0f64, f64::max);
        if amp == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for idx in 0..self.grid.size() {
            let f = self.grid.int_freq(idx);
            let jdx = self.grid.index_of([-f[0], -f[1], -f[2]]);
            for m in 0..3 {
                let err = (self.comp[m][idx] - self.comp[m][jdx].conj()).norm();
                worst = worst.max(err);
            }
        }
        worst / amp
    }

    /// max_k |k . u_hat(k)| / ||u||_{L2}, zero for the zero field.
    pub fn divergence_rel(&self) -> f64 {
        let norm = self.l2();
        if norm == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for idx in 0..self.grid.size() {
            let k = self.grid.wavevector(idx);
            let dotted = self.comp[0][idx] * k[0] + self.comp[1][idx] * k[1] + self.comp[2][idx] * k[2];
            worst = worst.max(dotted.norm());
        }
        worst / norm
    }

    pub fn scale(&mut self, a: f64) {
        for c in self.comp.iter_mut() {
            for v in c.iter_mut() {
                *v *= a;
            }
        }
    }

    pub fn scaled(&self, a: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale(a);
        out
    }

    /// self += a * other (grids must match).
    pub fn add_scaled(&mut self, a: f64, other: &SpectralField) {
        debug_assert!(self.same_grid(other));
        for m in 0..3 {
            for (x, y) in self.comp[m].iter_mut().zip(&other.comp[m]) {
                *x += a * y;
            }
        }
        self.divfree = self.divfree && other.divfree;
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.add_scaled(1.0, other);
        out
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.add_scaled(-1.0, other);
        out
    }

    /// Multiply every coefficient by a per-mode real factor.
    pub fn mul_table(&mut self, table: &[f64]) {
        for c in self.comp.iter_mut() {
            for (v, f) in c.iter_mut().zip(table) {
                *v *= *f;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.comp
            .iter()
            .all(|c| c.iter().all(|v| v.re.is_finite() && v.im.is_finite()))
    }

    /// Inverse transform to physical samples (real parts; imaginary residue is
    /// discarded, which is exact for Hermitian-symmetric coefficients).
    pub fn to_physical(&self) -> PhysicalField {
        let mut comp: [Vec<f64>; 3] = Default::default();
        for m in 0..3 {
            let mut buf = self.comp[m].clone();
            self.grid.fft_in_place(&mut buf, true);
            comp[m] = buf.iter().map(|v| v.re).collect();
        }
        PhysicalField {
            grid: self.grid.clone(),
            comp,
        }
    }
}

impl PhysicalField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        let z = vec![0.0; grid.size()];
        PhysicalField {
            grid: grid.clone(),
            comp: [z.clone(), z.clone(), z],
        }
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn([f64; 3]) -> [f64; 3]) -> Self {
        let mut out = PhysicalField::zeros(grid);
        for idx in 0..grid.size() {
            let v = f(grid.coords(idx));
            out.comp[0][idx] = v[0];
            out.comp[1][idx] = v[1];
            out.comp[2][idx] = v[2];
        }
        out
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn comp(&self, m: usize) -> &[f64] {
        &self.comp[m]
    }

    pub fn comp_mut(&mut self, m: usize) -> &mut [f64] {
        &mut self.comp[m]
    }

    /// Largest pointwise Euclidean magnitude.
    pub fn linf(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.grid.size() {
            let s = self.comp[0][i] * self.comp[0][i]
                + self.comp[1][i] * self.comp[1][i]
                + self.comp[2][i] * self.comp[2][i];
            worst = worst.max(s);
        }
        worst.sqrt()
    }

    pub fn l2(&self) -> f64 {
        let mut s = 0.0;
        for c in &self.comp {
            for v in c {
                s += v * v;
            }
        }
        (s * self.grid.volume() / self.grid.size() as f64).sqrt()
    }

    /// Forward transform; divides by N^d so that the k = 0 coefficient is the mean.
    pub fn to_spectral(&self) -> SpectralField {
        let size = self.grid.size();
        let norm = 1.0 / size as f64;
        let mut comp: [Vec<Complex64>; 3] = Default::default();
        for m in 0..3 {
            let mut buf: Vec<Complex64> =
                self.comp[m].iter().map(|&x| Complex64::new(x, 0.0)).collect();
            self.grid.fft_in_place(&mut buf, false);
            for v in buf.iter_mut() {
                *v *= norm;
            }
            comp[m] = buf;
        }
        SpectralField {
            grid: self.grid.clone(),
            comp,
            divfree: false,
        }
    }
}
