//! Exact spectral Sobolev norms via Parseval sums on the wavenumber lattice.

use crate::error::{CoreError, Result};
use crate::field::SpectralField;

/// Which norm to compute: Sobolev order `s`, homogeneous or not, and an
/// optional Besov summability index (p is fixed at 2).
#[derive(Clone, Copy, Debug)]
pub struct NormSpec {
    pub s: f64,
    pub homogeneous: bool,
    pub besov_q: Option<f64>,
}

impl NormSpec {
    pub fn sobolev(s: f64) -> Self {
        NormSpec {
            s,
            homogeneous: false,
            besov_q: None,
        }
    }

    pub fn homogeneous(s: f64) -> Self {
        NormSpec {
            s,
            homogeneous: true,
            besov_q: None,
        }
    }
}

fn mean_amplitude(u: &SpectralField) -> f64 {
    (0..3).map(|m| u.comp(m)[0].norm()).fold(0.0, f64::max)
}

pub(crate) fn check_mean_zero(u: &SpectralField, s: f64) -> Result<()> {
    let norm = u.l2();
    let mean = mean_amplitude(u);
    if mean > 1e-12 * norm.max(f64::MIN_POSITIVE) {
        return Err(CoreError::MeanMode { s });
    }
    Ok(())
}

/// Homogeneous Sobolev norm sqrt(sum |k|^{2s} |u_hat|^2 * vol). The mean mode
/// contributes only at s = 0; for s < 0 a nonzero mean is an error.
pub fn homogeneous_norm(u: &SpectralField, s: f64) -> Result<f64> {
    if s < 0.0 {
        check_mean_zero(u, s)?;
    }
    let grid = u.grid();
    let mut acc = 0.0;
    for idx in 0..grid.size() {
        let ksq = grid.ksq(idx);
        let w = if ksq == 0.0 {
            if s == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            ksq.powf(s)
        };
        if w == 0.0 {
            continue;
        }
        for m in 0..3 {
            acc += w * u.comp(m)[idx].norm_sqr();
        }
    }
    Ok((acc * grid.volume()).sqrt())
}

/// Inhomogeneous Sobolev norm with weight (1 + |k|^2)^s.
pub fn hs_norm(u: &SpectralField, s: f64) -> f64 {
    let grid = u.grid();
    let mut acc = 0.0;
    for idx in 0..grid.size() {
        let w = (1.0 + grid.ksq(idx)).powf(s);
        for m in 0..3 {
            acc += w * u.comp(m)[idx].norm_sqr();
        }
    }
    (acc * grid.volume()).sqrt()
}

pub fn l2_norm(u: &SpectralField) -> f64 {
    u.l2()
}

/// L2 inner product via Parseval, vol * Re sum a . conj(b).
pub fn l2_inner(a: &SpectralField, b: &SpectralField) -> f64 {
    debug_assert!(a.same_grid(b));
    let mut acc = 0.0;
    for m in 0..3 {
        for (x, y) in a.comp(m).iter().zip(b.comp(m)) {
            acc += (x * y.conj()).re;
        }
    }
    acc * a.grid().volume()
}

/// Dispatch on a `NormSpec`; Besov specs route to the Littlewood-Paley module.
pub fn sobolev_norm(u: &SpectralField, spec: &NormSpec) -> Result<f64> {
    if let Some(q) = spec.besov_q {
        return crate::lp::besov_norm(u, spec.s, q);
    }
    if spec.homogeneous {
        homogeneous_norm(u, spec.s)
    } else {
        Ok(hs_norm(u, spec.s))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PhysicalField, SpectralField};
    use crate::grid::make_grid;
    use num_complex::Complex64;

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    #[test]
    fn zero_field_all_orders() {
        let g = make_grid(2, 8, TAU).unwrap();
        let u = SpectralField::zeros(&g);
        for s in [-1.0, 0.0, 0.5, 2.0] {
            assert_eq!(homogeneous_norm(&u, s).unwrap(), 0.0);
            assert_eq!(hs_norm(&u, s), 0.0);
        }
    }

    #[test]
    fn single_shell_closed_form() {
        let g = make_grid(2, 16, TAU).unwrap();
        let mut u = SpectralField::zeros(&g);
        u.comp_mut(0)[g.index_of([2, 0, 0])] = Complex64::new(1.0, 0.0);
        u.comp_mut(0)[g.index_of([-2, 0, 0])] = Complex64::new(1.0, 0.0);
        let l2 = l2_norm(&u);
        let h1 = homogeneous_norm(&u, 1.0).unwrap();
        assert!((h1 - 2.0 * l2).abs() < 1e-12 * l2);
    }

    #[test]
    fn h0_equals_l2() {
        let g = make_grid(2, 16, TAU).unwrap();
        let u = PhysicalField::from_fn(&g, |x| {
            [(x[0] + x[1]).sin(), (3.0 * x[0]).cos(), x[1].sin() * x[0].cos()]
        })
        .to_spectral();
        let l2 = l2_norm(&u);
        assert!((hs_norm(&u, 0.0) - l2).abs() < 1e-13 * l2);
        assert!((homogeneous_norm(&u, 0.0).unwrap() - l2).abs() < 1e-13 * l2);
    }

    #[test]
    fn negative_order_rejects_mean() {
        let g = make_grid(2, 8, TAU).unwrap();
        let u = PhysicalField::from_fn(&g, |x| [1.0 + x[0].sin(), 0.0, 0.0]).to_spectral();
        assert!(matches!(
            homogeneous_norm(&u, -1.0),
            Err(CoreError::MeanMode { .. })
        ));
    }

    #[test]
    fn parseval() {
        let g = make_grid(3, 8, TAU).unwrap();
        let p = PhysicalField::from_fn(&g, |x| {
            [
                (x[0] + 2.0 * x[2]).sin(),
                x[1].cos() * x[0].sin(),
                (x[2] - x[1]).cos(),
            ]
        });
        let s = p.to_spectral();
        let pl2 = p.l2();
        assert!((s.l2() - pl2).abs() < 1e-12 * pl2);
    }
}
