//! Spectral differential operators, the Leray projection and dealiased
//! nonlinear products.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::field::{PhysicalField, SpectralField};

/// (-Delta)^alpha as the Fourier multiplier |k|^{2 alpha}. At alpha = 0 this is
/// the identity (including the mean mode); for alpha > 0 the mean mode is
/// annihilated.
pub fn fractional_laplacian(u: &SpectralField, alpha: f64) -> SpectralField {
    let grid = u.grid().clone();
    let mut out = u.clone();
    for m in 0..3 {
        for (idx, v) in out.comp_mut(m).iter_mut().enumerate() {
            *v *= grid.ksq(idx).powf(alpha);
        }
    }
    out
}

/// Leray projection onto divergence-free fields: u_hat - k (k . u_hat)/|k|^2
/// for k != 0; the mean mode passes through unchanged.
pub fn leray_project(u: &SpectralField) -> SpectralField {
    let grid = u.grid().clone();
    let mut out = u.clone();
    for idx in 1..grid.size() {
        let ksq = grid.ksq(idx);
        if ksq == 0.0 {
            continue;
        }
        let k = grid.wavevector(idx);
        let v = out.at(idx);
        let dot = (v[0] * k[0] + v[1] * k[1] + v[2] * k[2]) / ksq;
        out.set(
            idx,
            [v[0] - dot * k[0], v[1] - dot * k[1], v[2] - dot * k[2]],
        );
    }
    out.divfree = true;
    out
}

/// Spectral curl, i k x u_hat. In d = 2 the third wavenumber component is zero.
pub fn curl(u: &SpectralField) -> SpectralField {
    let grid = u.grid().clone();
    let mut out = SpectralField::zeros(&grid);
    let i = Complex64::new(0.0, 1.0);
    for idx in 0..grid.size() {
        let k = grid.wavevector(idx);
        let v = u.at(idx);
        out.set(
            idx,
            [
                i * (k[1] * v[2] - k[2] * v[1]),
                i * (k[2] * v[0] - k[0] * v[2]),
                i * (k[0] * v[1] - k[1] * v[0]),
            ],
        );
    }
    out.divfree = true;
    out
}

/// Fourier truncation T_n: zero every coefficient with |k| > n. Idempotent and
/// commutes with `leray_project`.
pub fn truncate(u: &SpectralField, n: f64) -> SpectralField {
    let grid = u.grid().clone();
    let nsq = n * n;
    let mut out = u.clone();
    for m in 0..3 {
        for (idx, v) in out.comp_mut(m).iter_mut().enumerate() {
            if grid.ksq(idx) > nsq * (1.0 + 1e-12) {
                *v = Complex64::new(0.0, 0.0);
            }
        }
    }
    out
}

/// Zero all modes killed by the 2/3 rule (any axis frequency above floor(N/3)).
pub fn dealias(u: &SpectralField) -> SpectralField {
    let grid = u.grid().clone();
    let mut out = u.clone();
    for m in 0..3 {
        for (idx, v) in out.comp_mut(m).iter_mut().enumerate() {
            if !grid.dealias_ok(idx) {
                *v = Complex64::new(0.0, 0.0);
            }
        }
    }
    out
}

fn check_grids(a: &SpectralField, b: &SpectralField) -> Result<()> {
    if !a.same_grid(b) {
        return Err(CoreError::GridMismatch);
    }
    Ok(())
}

fn phys_dealiased(u: &SpectralField) -> PhysicalField {
    dealias(u).to_physical()
}

/// Dealiased pointwise cross product a x b, exact for quadratic nonlinearities
/// under the 2/3 rule.
pub fn cross(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    check_grids(a, b)?;
    let pa = phys_dealiased(a);
    let pb = phys_dealiased(b);
    let grid = a.grid().clone();
    let mut out = PhysicalField::zeros(&grid);
    for i in 0..grid.size() {
        let x = [pa.comp(0)[i], pa.comp(1)[i], pa.comp(2)[i]];
        let y = [pb.comp(0)[i], pb.comp(1)[i], pb.comp(2)[i]];
        out.comp_mut(0)[i] = x[1] * y[2] - x[2] * y[1];
        out.comp_mut(1)[i] = x[2] * y[0] - x[0] * y[2];
        out.comp_mut(2)[i] = x[0] * y[1] - x[1] * y[0];
    }
    Ok(dealias(&out.to_spectral()))
}

/// Dealiased advection (a . grad) b with spectral gradients.
pub fn advect(a: &SpectralField, b: &SpectralField) -> Result<SpectralField> {
    check_grids(a, b)?;
    let grid = a.grid().clone();
    let pa = phys_dealiased(a);
    let bd = dealias(b);
    let i = Complex64::new(0.0, 1.0);
    let mut out = PhysicalField::zeros(&grid);
    for axis in 0..grid.d() {
        // spectral derivative of b along this axis, then to physical
        let mut db = bd.clone();
        for m in 0..3 {
            for (idx, v) in db.comp_mut(m).iter_mut().enumerate() {
                *v *= i * grid.wavevector(idx)[axis];
            }
        }
        let pdb = db.to_physical();
        for m in 0..3 {
            for idx in 0..grid.size() {
                out.comp_mut(m)[idx] += pa.comp(axis)[idx] * pdb.comp(m)[idx];
            }
        }
    }
    Ok(dealias(&out.to_spectral()))
}

/// Dealiased pointwise dot product a . b, returned as a scalar spectral array.
pub fn dot(a: &SpectralField, b: &SpectralField) -> Result<Vec<Complex64>> {
    check_grids(a, b)?;
    let grid = a.grid().clone();
    let pa = phys_dealiased(a);
    let pb = phys_dealiased(b);
    let mut out = PhysicalField::zeros(&grid);
    for idx in 0..grid.size() {
        out.comp_mut(0)[idx] = pa.comp(0)[idx] * pb.comp(0)[idx]
            + pa.comp(1)[idx] * pb.comp(1)[idx]
            + pa.comp(2)[idx] * pb.comp(2)[idx];
    }
    let s = out.to_spectral();
    let mut data = s.comp(0).to_vec();
    for (idx, v) in data.iter_mut().enumerate() {
        if !grid.dealias_ok(idx) {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    Ok(data)
}

/// Spectral gradient of a scalar array: component m is i k_m phi_hat.
pub fn gradient(grid: &std::sync::Arc<crate::grid::Grid>, phi: &[Complex64]) -> Result<SpectralField> {
    if phi.len() != grid.size() {
        return Err(CoreError::ShapeMismatch {
            expected: grid.size(),
            got: phi.len(),
        });
    }
    let mut out = SpectralField::zeros(grid);
    let i = Complex64::new(0.0, 1.0);
    for idx in 0..grid.size() {
        let k = grid.wavevector(idx);
        let p = phi[idx];
        out.set(idx, [i * k[0] * p, i * k[1] * p, i * k[2] * p]);
    }
    out.divfree = false;
    Ok(out)
}

/// Advection by a constant vector, (b_star . grad) f, as the exact per-mode
/// multiplier i (b_star . k). No dealiasing is needed.
pub fn const_advect(b_star: [f64; 3], f: &SpectralField) -> SpectralField {
    let grid = f.grid().clone();
    let mut out = f.clone();
    for idx in 0..grid.size() {
        let k = grid.wavevector(idx);
        let mult = Complex64::new(0.0, b_star[0] * k[0] + b_star[1] * k[1] + b_star[2] * k[2]);
        let v = out.at(idx);
        out.set(idx, [mult * v[0], mult * v[1], mult * v[2]]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PhysicalField;
    use crate::grid::make_grid;

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    #[test]
    fn fractional_laplacian_multipliers() {
        let g = make_grid(2, 16, TAU).unwrap();
        let mut u = SpectralField::zeros(&g);
        let k1 = g.index_of([1, 0, 0]);
        let k2 = g.index_of([2, 1, 0]);
        u.comp_mut(0)[k1] = Complex64::new(1.0, 0.0);
        u.comp_mut(1)[k2] = Complex64::new(0.0, 2.0);
        let id = fractional_laplacian(&u, 0.0);
        assert!((id.comp(0)[k1] - u.comp(0)[k1]).norm() < 1e-15);
        let lap = fractional_laplacian(&u, 1.0);
        assert!((lap.comp(0)[k1] - u.comp(0)[k1]).norm() < 1e-15);
        let frac = fractional_laplacian(&u, 1.5);
        let want = u.comp(1)[k2] * 5.0f64.powf(1.5);
        assert!((frac.comp(1)[k2] - want).norm() < 1e-12);
        assert!((5.0f64.powf(1.5) - 11.180_339_887_498_949).abs() < 1e-12);
    }

    #[test]
    fn leray_kills_gradients_and_is_idempotent() {
        let g = make_grid(3, 8, TAU).unwrap();
        let mut grad = SpectralField::zeros(&g);
        for idx in 1..g.size() {
            let k = g.wavevector(idx);
            grad.set(
                idx,
                [
                    Complex64::new(k[0], 0.0),
                    Complex64::new(k[1], 0.0),
                    Complex64::new(k[2], 0.0),
                ],
            );
        }
        let p = leray_project(&grad);
        let norm: f64 = (0..3).map(|m| p.comp(m).iter().map(|v| v.norm()).sum::<f64>()).sum();
        assert!(norm < 1e-12);
    }

    #[test]
    fn curl_of_sine_sheet() {
        let g = make_grid(2, 8, TAU).unwrap();
        let u = PhysicalField::from_fn(&g, |x| [0.0, 0.0, x[0].sin()]).to_spectral();
        let c = curl(&u).to_physical();
        for idx in 0..g.size() {
            let x = g.coords(idx);
            assert!((c.comp(0)[idx] - 0.0).abs() < 1e-12);
            assert!((c.comp(1)[idx] + x[0].cos()).abs() < 1e-12);
            assert!((c.comp(2)[idx] - 0.0).abs() < 1e-12);
        }
    }

    #[test]
    fn beltrami_is_curl_eigenfield() {
        let g = make_grid(3, 8, TAU).unwrap();
        let b = PhysicalField::from_fn(&g, |x| [x[2].cos(), x[2].sin(), 0.0]).to_spectral();
        let c = curl(&b);
        let diff = c.add(&b);
        assert!(diff.l2() < 1e-12);
    }

    #[test]
    fn constant_field_curl_vanishes() {
        let g = make_grid(3, 8, TAU).unwrap();
        let b = PhysicalField::from_fn(&g, |_| [0.3, -1.0, 2.0]).to_spectral();
        assert!(curl(&b).l2() < 1e-13);
    }

    #[test]
    fn truncate_edges() {
        let g = make_grid(2, 8, TAU).unwrap();
        let u = PhysicalField::from_fn(&g, |x| [x[0].sin() + (2.0 * x[1]).cos(), 0.0, 1.0])
            .to_spectral();
        let full = truncate(&u, g.k_max() + 1.0);
        assert!(full.sub(&u).l2() < 1e-14);
        let mean_only = truncate(&u, 0.0);
        assert!((mean_only.comp(2)[0].re - 1.0).abs() < 1e-13);
        let nonzero: f64 = (0..3)
            .map(|m| mean_only.comp(m)[1..].iter().map(|v| v.norm()).sum::<f64>())
            .sum();
        assert!(nonzero < 1e-13);
    }

    #[test]
    fn truncate_commutes_with_leray() {
        let g = make_grid(3, 8, TAU).unwrap();
        let u = PhysicalField::from_fn(&g, |x| {
            [
                (x[0] + 2.0 * x[1]).sin(),
                (x[1] - x[2]).cos(),
                (2.0 * x[2]).sin() * x[0].cos(),
            ]
        })
        .to_spectral();
        let a = truncate(&leray_project(&u), 2.0);
        let b = leray_project(&truncate(&u, 2.0));
        assert!(a.sub(&b).l2() < 1e-13);
    }

    #[test]
    fn self_cross_vanishes() {
        let g = make_grid(2, 16, TAU).unwrap();
        let a = PhysicalField::from_fn(&g, |x| {
            [x[0].sin(), (x[0] + x[1]).cos(), (2.0 * x[1]).sin()]
        })
        .to_spectral();
        assert!(cross(&a, &a).unwrap().l2() < 1e-13);
    }

    #[test]
    fn constant_advection_closed_form() {
        let g = make_grid(2, 16, TAU).unwrap();
        let c0 = [1.5, -0.5, 0.0];
        let a = PhysicalField::from_fn(&g, |_| c0).to_spectral();
        let mut b = SpectralField::zeros(&g);
        let kf = [2i64, 1, 0];
        let plus = g.index_of(kf);
        let minus = g.index_of([-kf[0], -kf[1], 0]);
        b.comp_mut(2)[plus] = Complex64::new(0.5, 0.25);
        b.comp_mut(2)[minus] = Complex64::new(0.5, -0.25);
        let adv = advect(&a, &b).unwrap();
        let kdot = c0[0] * kf[0] as f64 + c0[1] * kf[1] as f64;
        let want = Complex64::new(0.0, kdot) * b.comp(2)[plus];
        assert!((adv.comp(2)[plus] - want).norm() < 1e-12);
    }

    #[test]
    fn cross_of_single_modes_lands_on_sum_and_difference() {
        let g = make_grid(2, 8, TAU).unwrap();
        let mk = |kf: [i64; 3], m: usize| {
            let mut u = SpectralField::zeros(&g);
            u.comp_mut(m)[g.index_of(kf)] = Complex64::new(0.5, 0.0);
            u.comp_mut(m)[g.index_of([-kf[0], -kf[1], -kf[2]])] = Complex64::new(0.5, 0.0);
            u
        };
        let a = mk([1, 0, 0], 0);
        let b = mk([0, 1, 0], 2);
        let c = cross(&a, &b).unwrap();
        for idx in 0..g.size() {
            let f = g.int_freq(idx);
            let on_sum = (f[0].abs(), f[1].abs()) == (1, 1);
            let mag: f64 = (0..3).map(|m| c.comp(m)[idx].norm()).sum();
            if on_sum {
                assert!(mag > 1e-3);
            } else {
                assert!(mag < 1e-13);
            }
        }
    }

    #[test]
    fn const_advect_matches_dealiased_advect() {
        let g = make_grid(2, 16, TAU).unwrap();
        let bstar = [0.0, 0.7, -0.2];
        let f = PhysicalField::from_fn(&g, |x| {
            [(x[0] + x[1]).sin(), (2.0 * x[0]).cos(), x[1].sin()]
        })
        .to_spectral();
        let exact = const_advect(bstar, &f);
        let a = PhysicalField::from_fn(&g, |_| bstar).to_spectral();
        let dealiased = advect(&a, &f).unwrap();
        assert!(exact.sub(&dealiased).l2() < 1e-12);
    }
}
