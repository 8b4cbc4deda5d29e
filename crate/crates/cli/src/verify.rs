//! The `verify` suites:
//!
//! - `invariants`: structural property checks (FFT roundtrip, Leray algebra,
//!   advection skew-symmetry, divergence preservation, energy fluxes) on
//!   small grids with fixed seeds;
//! - `oracles`: independent re-implementations — a direct-summation DFT
//!   pseudo-spectral evaluator for every nonlinear right-hand side, and a
//!   per-mode 6x6 matrix-exponential for the Maxwell subsystem — compared
//!   against the production code;
//! - `calibration`: regenerates the empirically calibrated inequality
//!   constants, deterministically for a fixed seed.

use crate::initial::random_field;
use crate::report::Check;
use anyhow::Result;
use nsm_core::{
    cross, curl, dealias, fractional_laplacian, l2_inner, leray_project, make_grid, rhs, step,
    Grid, PhysParams, PlasmaState, SpectralField, SystemKind,
};
use num_complex::Complex64;
use std::path::Path;
use std::sync::Arc;

const TAU: f64 = 2.0 * std::f64::consts::PI;

// ---------------------------------------------------------------------------
// Direct-summation oracle evaluator
// ---------------------------------------------------------------------------

/// Slow, obviously-correct pseudo-spectral engine: transforms are explicit
/// O(M^2) DFT sums, products are pointwise on the grid, derivatives are exact
/// multiplier sums. Shares no code with the production FFT path.
struct Oracle {
    grid: Arc<Grid>,
}

impl Oracle {
    fn new(grid: &Arc<Grid>) -> Self {
        Oracle { grid: grid.clone() }
    }

    /// Physical values of one spectral component by direct summation
    /// u(x_j) = sum_k u_hat(k) e^{i k . x_j}.
    fn to_phys(&self, spec: &[Complex64]) -> Vec<Complex64> {
        let g = &self.grid;
        let size = g.size();
        let mut out = vec![Complex64::new(0.0, 0.0); size];
        for (xi, o) in out.iter_mut().enumerate() {
            let x = g.coords(xi);
            let mut acc = Complex64::new(0.0, 0.0);
            for ki in 0..size {
                let k = g.wavevector(ki);
                let phase = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
                acc += spec[ki] * Complex64::new(phase.cos(), phase.sin());
            }
            *o = acc;
        }
        out
    }

    /// Mean-preserving forward transform by direct summation.
    fn to_spec(&self, phys: &[Complex64]) -> Vec<Complex64> {
        let g = &self.grid;
        let size = g.size();
        let mut out = vec![Complex64::new(0.0, 0.0); size];
        for (ki, o) in out.iter_mut().enumerate() {
            let k = g.wavevector(ki);
            let mut acc = Complex64::new(0.0, 0.0);
            for xi in 0..size {
                let x = g.coords(xi);
                let phase = k[0] * x[0] + k[1] * x[1] + k[2] * x[2];
                acc += phys[xi] * Complex64::new(phase.cos(), -phase.sin());
            }
            *o = acc / size as f64;
        }
        out
    }

    fn components(&self, u: &SpectralField) -> [Vec<Complex64>; 3] {
        [u.comp(0).to_vec(), u.comp(1).to_vec(), u.comp(2).to_vec()]
    }

    fn dealias_mask(&self, spec: &mut [Vec<Complex64>; 3]) {
        let g = &self.grid;
        let m = g.dealias_m() as i64;
        for idx in 0..g.size() {
            let f = g.int_freq(idx);
            if f.iter().any(|&fi| fi.abs() > m) {
                for c in spec.iter_mut() {
                    c[idx] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    fn ball_mask(&self, spec: &mut [Vec<Complex64>; 3], n: f64) {
        let g = &self.grid;
        for idx in 0..g.size() {
            if g.ksq(idx).sqrt() > n * (1.0 + 1e-12) {
                for c in spec.iter_mut() {
                    c[idx] = Complex64::new(0.0, 0.0);
                }
            }
        }
    }

    fn leray(&self, spec: &mut [Vec<Complex64>; 3]) {
        let g = &self.grid;
        for idx in 0..g.size() {
            let ksq = g.ksq(idx);
            if ksq == 0.0 {
                continue;
            }
            let k = g.wavevector(idx);
            let dot = k[0] * spec[0][idx] + k[1] * spec[1][idx] + k[2] * spec[2][idx];
            for (m, c) in spec.iter_mut().enumerate() {
                c[idx] -= k[m] * dot / ksq;
            }
        }
    }

    /// Dealiased pointwise cross product a x b via direct transforms.
    fn cross(
        &self,
        a: &[Vec<Complex64>; 3],
        b: &[Vec<Complex64>; 3],
    ) -> [Vec<Complex64>; 3] {
        let mut a = a.clone();
        let mut b = b.clone();
        self.dealias_mask(&mut a);
        self.dealias_mask(&mut b);
        let ap: Vec<Vec<Complex64>> = a.iter().map(|c| self.to_phys(c)).collect();
        let bp: Vec<Vec<Complex64>> = b.iter().map(|c| self.to_phys(c)).collect();
        let size = self.grid.size();
        let mut cp = [
            vec![Complex64::new(0.0, 0.0); size],
            vec![Complex64::new(0.0, 0.0); size],
            vec![Complex64::new(0.0, 0.0); size],
        ];
        for i in 0..size {
            cp[0][i] = ap[1][i] * bp[2][i] - ap[2][i] * bp[1][i];
            cp[1][i] = ap[2][i] * bp[0][i] - ap[0][i] * bp[2][i];
            cp[2][i] = ap[0][i] * bp[1][i] - ap[1][i] * bp[0][i];
        }
        let mut out = [
            self.to_spec(&cp[0]),
            self.to_spec(&cp[1]),
            self.to_spec(&cp[2]),
        ];
        self.dealias_mask(&mut out);
        out
    }

    /// Dealiased advection (a . grad) b.
    fn advect(
        &self,
        a: &[Vec<Complex64>; 3],
        b: &[Vec<Complex64>; 3],
    ) -> [Vec<Complex64>; 3] {
        let g = &self.grid;
        let size = g.size();
        let mut a = a.clone();
        self.dealias_mask(&mut a);
        let ap: Vec<Vec<Complex64>> = a.iter().map(|c| self.to_phys(c)).collect();
        let mut out = [
            vec![Complex64::new(0.0, 0.0); size],
            vec![Complex64::new(0.0, 0.0); size],
            vec![Complex64::new(0.0, 0.0); size],
        ];
        let i = Complex64::new(0.0, 1.0);
        for m in 0..3 {
            // grad of component m of b, spectrally, then to physical
            let mut db = b.clone();
            self.dealias_mask(&mut db);
            let mut acc = vec![Complex64::new(0.0, 0.0); size];
            for axis in 0..3 {
                let mut d = db[m].clone();
                for idx in 0..size {
                    let k = g.wavevector(idx);
                    d[idx] *= i * k[axis];
                }
                let dp = self.to_phys(&d);
                for x in 0..size {
                    acc[x] += ap[axis][x] * dp[x];
                }
            }
            out[m] = self.to_spec(&acc);
        }
        self.dealias_mask(&mut out);
        out
    }

    fn curl(&self, u: &[Vec<Complex64>; 3]) -> [Vec<Complex64>; 3] {
        let g = &self.grid;
        let size = g.size();
        let i = Complex64::new(0.0, 1.0);
        let mut out = [
            vec![Complex64::new(0.0, 0.0); size],
            vec![Complex64::new(0.0, 0.0); size],
            vec![Complex64::new(0.0, 0.0); size],
        ];
        for idx in 0..size {
            let k = g.wavevector(idx);
            out[0][idx] = i * (k[1] * u[2][idx] - k[2] * u[1][idx]);
            out[1][idx] = i * (k[2] * u[0][idx] - k[0] * u[2][idx]);
            out[2][idx] = i * (k[0] * u[1][idx] - k[1] * u[0][idx]);
        }
        out
    }

    fn frac_lap(&self, u: &[Vec<Complex64>; 3], alpha: f64) -> [Vec<Complex64>; 3] {
        let g = &self.grid;
        let mut out = u.clone();
        for idx in 0..g.size() {
            let w = g.ksq(idx).powf(alpha);
            for c in out.iter_mut() {
                c[idx] *= w;
            }
        }
        out
    }

    fn lincomb(
        terms: &[(f64, &[Vec<Complex64>; 3])],
        size: usize,
    ) -> [Vec<Complex64>; 3] {
        let mut out = [
            vec![Complex64::new(0.0, 0.0); size],
            vec![Complex64::new(0.0, 0.0); size],
            vec![Complex64::new(0.0, 0.0); size],
        ];
        for (a, t) in terms {
            for m in 0..3 {
                for idx in 0..size {
                    out[m][idx] += *a * t[m][idx];
                }
            }
        }
        out
    }

    fn diff_norm(got: &SpectralField, want: &[Vec<Complex64>; 3]) -> f64 {
        let mut acc = 0.0f64;
        for m in 0..3 {
            for (g, w) in got.comp(m).iter().zip(&want[m]) {
                acc += (g - w).norm_sqr();
            }
        }
        acc.sqrt()
    }
}

/// Oracle evaluation of the full tendency for one system, mirroring the
/// production equations with the slow engine.
fn oracle_rhs(
    oracle: &Oracle,
    state: &PlasmaState,
    params: &PhysParams,
) -> Result<(Option<[Vec<Complex64>; 3]>, Option<[Vec<Complex64>; 3]>, [Vec<Complex64>; 3])> {
    let g = &oracle.grid;
    let size = g.size();
    let n = state.truncation_n;
    let v = oracle.components(&state.v);
    let b = oracle.components(&state.b);
    let bs = params.b_star;
    let with_bstar = |b: &[Vec<Complex64>; 3]| {
        let mut out = b.clone();
        for m in 0..3 {
            out[m][0] += bs[m];
        }
        out
    };

    let result = match params.system {
        SystemKind::Nsm | SystemKind::NsmStar => {
            let e = oracle.components(state.e_ref().map_err(|e| anyhow::anyhow!("{e}"))?);
            let perturbed = params.system == SystemKind::NsmStar;
            let b_tot = if perturbed { with_bstar(&b) } else { b.clone() };
            let mut vxb = oracle.cross(&v, &b_tot);
            oracle.ball_mask(&mut vxb, n);
            // j = sigma (c E + T_n(v x B))
            let j = Oracle::lincomb(
                &[(params.sigma * params.c, &e), (params.sigma, &vxb)],
                size,
            );
            let mut lorentz = oracle.cross(&j, &b_tot);
            oracle.leray(&mut lorentz);
            oracle.ball_mask(&mut lorentz, n);
            let mut adv = oracle.advect(&v, &v);
            oracle.leray(&mut adv);
            oracle.ball_mask(&mut adv, n);
            let visc = oracle.frac_lap(&v, params.alpha);
            let mut dv = Oracle::lincomb(
                &[(-params.nu, &visc), (-1.0, &adv), (1.0, &lorentz)],
                size,
            );
            oracle.leray(&mut dv);
            let curl_b = oracle.curl(&b);
            let de = Oracle::lincomb(&[(params.c, &curl_b), (-params.c, &j)], size);
            let curl_e = oracle.curl(&e);
            let db = Oracle::lincomb(&[(-params.c, &curl_e)], size);
            (Some(dv), Some(de), db)
        }
        SystemKind::Maxwell | SystemKind::MaxwellFree => {
            let e = oracle.components(state.e_ref().map_err(|e| anyhow::anyhow!("{e}"))?);
            let curl_b = oracle.curl(&b);
            let de = if params.system == SystemKind::MaxwellFree {
                Oracle::lincomb(&[(params.c, &curl_b)], size)
            } else {
                let mut vxb = oracle.cross(&v, &b);
                oracle.ball_mask(&mut vxb, n);
                let j = Oracle::lincomb(
                    &[(params.sigma * params.c, &e), (params.sigma, &vxb)],
                    size,
                );
                Oracle::lincomb(&[(params.c, &curl_b), (-params.c, &j)], size)
            };
            let curl_e = oracle.curl(&e);
            let db = Oracle::lincomb(&[(-params.c, &curl_e)], size);
            (None, Some(de), db)
        }
        SystemKind::Hmhd => {
            let j = oracle.curl(&b);
            let mut jxb = oracle.cross(&j, &b);
            oracle.ball_mask(&mut jxb, n);
            let mut lorentz = jxb.clone();
            oracle.leray(&mut lorentz);
            oracle.ball_mask(&mut lorentz, n);
            let mut adv = oracle.advect(&v, &v);
            oracle.leray(&mut adv);
            oracle.ball_mask(&mut adv, n);
            let visc = oracle.frac_lap(&v, params.alpha);
            let mut dv = Oracle::lincomb(
                &[(-params.nu, &visc), (-1.0, &adv), (1.0, &lorentz)],
                size,
            );
            oracle.leray(&mut dv);
            let mut vxb = oracle.cross(&v, &b);
            oracle.ball_mask(&mut vxb, n);
            let curl_vxb = oracle.curl(&vxb);
            let res = oracle.frac_lap(&b, params.beta);
            let curl_jxb = oracle.curl(&jxb);
            let db = Oracle::lincomb(
                &[
                    (1.0, &curl_vxb),
                    (-1.0 / params.sigma, &res),
                    (-params.kappa / params.sigma, &curl_jxb),
                ],
                size,
            );
            (Some(dv), None, db)
        }
        SystemKind::Mhd => {
            let mut adv_vv = oracle.advect(&v, &v);
            oracle.leray(&mut adv_vv);
            oracle.ball_mask(&mut adv_vv, n);
            let mut adv_bb = oracle.advect(&b, &b);
            oracle.leray(&mut adv_bb);
            oracle.ball_mask(&mut adv_bb, n);
            let visc = oracle.frac_lap(&v, params.alpha);
            let mut dv = Oracle::lincomb(
                &[(-params.nu, &visc), (-1.0, &adv_vv), (1.0, &adv_bb)],
                size,
            );
            oracle.leray(&mut dv);
            let mut adv_bv = oracle.advect(&b, &v);
            oracle.ball_mask(&mut adv_bv, n);
            let mut adv_vb = oracle.advect(&v, &b);
            oracle.ball_mask(&mut adv_vb, n);
            let res = oracle.frac_lap(&b, params.beta);
            let db = Oracle::lincomb(
                &[
                    (1.0, &adv_bv),
                    (-1.0, &adv_vb),
                    (-1.0 / params.sigma, &res),
                ],
                size,
            );
            (Some(dv), None, db)
        }
        SystemKind::Hall => {
            let j = oracle.curl(&b);
            let mut jxb = oracle.cross(&j, &b);
            oracle.ball_mask(&mut jxb, n);
            let curl_jxb = oracle.curl(&jxb);
            let res = oracle.frac_lap(&b, params.beta);
            let db = Oracle::lincomb(
                &[
                    (-1.0 / params.sigma, &res),
                    (-params.kappa / params.sigma, &curl_jxb),
                ],
                size,
            );
            (None, None, db)
        }
        SystemKind::HmhdStar => {
            let j = oracle.curl(&b);
            // B* advection is the exact multiplier i (B* . k)
            let const_adv = |u: &[Vec<Complex64>; 3]| {
                let mut out = u.clone();
                for idx in 0..size {
                    let k = g.wavevector(idx);
                    let mult =
                        Complex64::new(0.0, bs[0] * k[0] + bs[1] * k[1] + bs[2] * k[2]);
                    for c in out.iter_mut() {
                        c[idx] *= mult;
                    }
                }
                out
            };
            let mut adv_vv = oracle.advect(&v, &v);
            oracle.leray(&mut adv_vv);
            oracle.ball_mask(&mut adv_vv, n);
            let mut adv_bb = oracle.advect(&b, &b);
            oracle.leray(&mut adv_bb);
            oracle.ball_mask(&mut adv_bb, n);
            let mut bstar_b = const_adv(&b);
            oracle.leray(&mut bstar_b);
            let mut dv = Oracle::lincomb(
                &[
                    (-params.nu, &v),
                    (-1.0, &adv_vv),
                    (1.0, &adv_bb),
                    (1.0, &bstar_b),
                ],
                size,
            );
            oracle.leray(&mut dv);
            let mut adv_bv = oracle.advect(&b, &v);
            oracle.ball_mask(&mut adv_bv, n);
            let mut adv_vb = oracle.advect(&v, &b);
            oracle.ball_mask(&mut adv_vb, n);
            let bstar_v = const_adv(&v);
            let res = oracle.frac_lap(&b, 1.0);
            let mut db = Oracle::lincomb(
                &[
                    (1.0, &adv_bv),
                    (-1.0, &adv_vb),
                    (1.0, &bstar_v),
                    (-1.0 / params.sigma, &res),
                ],
                size,
            );
            if params.kappa != 0.0 {
                let mut adv_jb = oracle.advect(&j, &b);
                oracle.ball_mask(&mut adv_jb, n);
                let mut adv_bj = oracle.advect(&b, &j);
                oracle.ball_mask(&mut adv_bj, n);
                let bstar_j = const_adv(&j);
                let hall = Oracle::lincomb(
                    &[
                        (params.kappa / params.sigma, &adv_jb),
                        (-params.kappa / params.sigma, &adv_bj),
                        (-params.kappa / params.sigma, &bstar_j),
                    ],
                    size,
                );
                db = Oracle::lincomb(&[(1.0, &db), (1.0, &hall)], size);
            }
            (Some(dv), None, db)
        }
    };
    Ok(result)
}

fn oracle_state(grid: &Arc<Grid>, seed: u64, with_e: bool) -> Result<PlasmaState> {
    let v = random_field(grid, seed, 0.0, 2.0, 0.7, 0.0)?;
    let b = random_field(grid, seed ^ 0xB00, 0.0, 2.0, 0.9, 0.0)?;
    let e = if with_e {
        let mut e = random_field(grid, seed ^ 0xE00, 0.0, 2.0, 0.5, 0.0)?;
        e.divfree = false;
        Some(e)
    } else {
        None
    };
    Ok(PlasmaState::new(0.0, v, e, b))
}

/// Compare the production RHS of every system against the direct-summation
/// oracle on an N = 8 grid. Tolerance 1e-11 absolute on the spectral L2
/// difference of each tendency.
pub fn oracle_rhs_checks(d: usize, seed: u64) -> Result<Vec<Check>> {
    let grid = make_grid(d, 8, TAU).map_err(|e| anyhow::anyhow!("{e}"))?;
    let oracle = Oracle::new(&grid);
    let mut checks = Vec::new();
    let systems = [
        SystemKind::Nsm,
        SystemKind::NsmStar,
        SystemKind::Maxwell,
        SystemKind::MaxwellFree,
        SystemKind::Hmhd,
        SystemKind::Mhd,
        SystemKind::Hall,
        SystemKind::HmhdStar,
    ];
    for system in systems {
        let params = PhysParams {
            nu: 0.3,
            sigma: 2.0,
            c: 1.5,
            kappa: 0.4,
            alpha: if system == SystemKind::HmhdStar { 0.0 } else { 1.0 },
            beta: 1.0,
            b_star: if matches!(system, SystemKind::NsmStar | SystemKind::HmhdStar) {
                [0.1, -0.2, 0.8]
            } else {
                [0.0; 3]
            },
            system,
        };
        let state = oracle_state(&grid, seed, system.has_e())?;
        let tendency = rhs(&state, &params).map_err(|e| anyhow::anyhow!("{e}"))?;
        let (odv, ode, odb) = oracle_rhs(&oracle, &state, &params)?;
        let mut worst: f64 = 0.0;
        if let (Some(dv), Some(odv)) = (&tendency.dv, &odv) {
            worst = worst.max(Oracle::diff_norm(dv, odv));
        }
        if let (Some(de), Some(ode)) = (&tendency.de, &ode) {
            worst = worst.max(Oracle::diff_norm(de, ode));
        }
        if let Some(db) = &tendency.db {
            worst = worst.max(Oracle::diff_norm(db, &odb));
        }
        checks.push(Check::upper(
            &format!("oracle_rhs_{system:?}_d{d}"),
            worst,
            1.0e-11,
            "spectral L2 gap between production RHS and direct-summation oracle".into(),
        ));
    }
    Ok(checks)
}

// ---------------------------------------------------------------------------
// Per-mode matrix-exponential Maxwell oracle
// ---------------------------------------------------------------------------

type Mat6 = [[Complex64; 6]; 6];

fn mat_mul(a: &Mat6, b: &Mat6) -> Mat6 {
    let z = Complex64::new(0.0, 0.0);
    let mut out = [[z; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            let mut acc = z;
            for (l, bl) in b.iter().enumerate() {
                acc += a[i][l] * bl[j];
            }
            out[i][j] = acc;
        }
    }
    out
}

fn mat_add_scaled(a: &mut Mat6, s: f64, b: &Mat6) {
    for i in 0..6 {
        for j in 0..6 {
            a[i][j] += s * b[i][j];
        }
    }
}

fn mat_identity() -> Mat6 {
    let z = Complex64::new(0.0, 0.0);
    let mut out = [[z; 6]; 6];
    for (i, row) in out.iter_mut().enumerate() {
        row[i] = Complex64::new(1.0, 0.0);
    }
    out
}

fn mat_norm(a: &Mat6) -> f64 {
    a.iter()
        .flatten()
        .map(|c| c.norm())
        .fold(0.0, f64::max)
}

/// exp(A t) by scaling-and-squaring with a Taylor series; hand-rolled so the
/// oracle shares nothing with the stepper.
fn expm(a: &Mat6, t: f64) -> Mat6 {
    let mut at = *a;
    for row in at.iter_mut() {
        for c in row.iter_mut() {
            *c *= t;
        }
    }
    let norm = mat_norm(&at);
    let squarings = norm.log2().ceil().max(0.0) as u32 + 4;
    let scale = 2.0f64.powi(-(squarings as i32));
    for row in at.iter_mut() {
        for c in row.iter_mut() {
            *c *= scale;
        }
    }
    // Taylor to machine precision at ||A|| <= 1/16
    let mut out = mat_identity();
    let mut term = mat_identity();
    for k in 1..=24 {
        term = mat_mul(&term, &at);
        for row in term.iter_mut() {
            for c in row.iter_mut() {
                *c /= k as f64;
            }
        }
        mat_add_scaled(&mut out, 1.0, &term);
    }
    for _ in 0..squarings {
        out = mat_mul(&out, &out);
    }
    out
}

/// Generator of the linear Maxwell system at one wavevector, acting on
/// (E_hat, B_hat) stacked as 6 complex entries:
/// dE = c i k x B - damp E, dB = -c i k x E, damp = sigma c^2 (0 if free).
fn maxwell_generator(k: [f64; 3], c: f64, damp: f64) -> Mat6 {
    let z = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let mut a = [[z; 6]; 6];
    // cross-product matrix [k]_x
    let kx = [
        [z, -i * k[2], i * k[1]],
        [i * k[2], z, -i * k[0]],
        [-i * k[1], i * k[0], z],
    ];
    for r in 0..3 {
        for q in 0..3 {
            a[r][3 + q] = c * kx[r][q]; // dE = c (ik) x B
            a[3 + r][q] = -c * kx[r][q]; // dB = -c (ik) x E
        }
        a[r][r] -= damp;
    }
    a
}

/// Advance the Maxwell subsystem exactly via per-mode matrix exponentials.
fn maxwell_exact(state: &PlasmaState, params: &PhysParams, t: f64, free: bool) -> PlasmaState {
    let grid = state.v.grid().clone();
    let damp = if free {
        0.0
    } else {
        params.sigma * params.c * params.c
    };
    let mut out = state.clone();
    let e_in = state.e.as_ref().expect("Maxwell oracle needs E");
    let e_out = out.e.as_mut().expect("Maxwell oracle needs E");
    for idx in 0..grid.size() {
        let k = grid.wavevector(idx);
        let m = expm(&maxwell_generator(k, params.c, damp), t);
        let stacked = [
            e_in.comp(0)[idx],
            e_in.comp(1)[idx],
            e_in.comp(2)[idx],
            state.b.comp(0)[idx],
            state.b.comp(1)[idx],
            state.b.comp(2)[idx],
        ];
        for r in 0..6 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (q, s) in stacked.iter().enumerate() {
                acc += m[r][q] * s;
            }
            if r < 3 {
                e_out.comp_mut(r)[idx] = acc;
            } else {
                out.b.comp_mut(r - 3)[idx] = acc;
            }
        }
    }
    out.t = state.t + t;
    out
}

/// Stepper-vs-matrix-exponential comparison over unit time, free and damped.
pub fn oracle_stepper_checks(seed: u64) -> Result<Vec<Check>> {
    let grid = make_grid(2, 8, TAU).unwrap();
    let mut checks = Vec::new();
    for free in [true, false] {
        let params = PhysParams {
            nu: 0.0,
            sigma: 1.5,
            c: 1.2,
            kappa: 0.0,
            alpha: 1.0,
            beta: 1.0,
            b_star: [0.0; 3],
            system: if free {
                SystemKind::MaxwellFree
            } else {
                SystemKind::Maxwell
            },
        };
        // v = 0 makes the damped system exactly linear (j = sigma c E)
        let mut state = oracle_state(&grid, seed, true)?;
        state.v = SpectralField::zeros(&grid);
        let exact = maxwell_exact(&state, &params, 1.0, free);

        let nsteps = 200;
        let dt = 1.0 / nsteps as f64;
        let mut s = state.clone();
        for _ in 0..nsteps {
            s = step(&s, &params, dt).map_err(|e| anyhow::anyhow!("{e}"))?;
        }
        let gap = (s
            .e
            .as_ref()
            .unwrap()
            .sub(exact.e.as_ref().unwrap())
            .l2()
            .powi(2)
            + s.b.sub(&exact.b).l2().powi(2))
        .sqrt();
        let tag = if free { "free" } else { "damped" };
        checks.push(Check::upper(
            &format!("oracle_stepper_maxwell_{tag}"),
            gap,
            1.0e-8,
            "IF-RK4 over unit time vs per-mode 6x6 matrix exponential".into(),
        ));
    }
    Ok(checks)
}

// ---------------------------------------------------------------------------
// Invariant suite
// ---------------------------------------------------------------------------

pub fn invariant_checks(seed: u64) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for n in [8usize, 16] {
        let grid = make_grid(2, n, TAU).unwrap();
        let u = random_field(&grid, seed, 0.0, (n / 3) as f64, 1.0, 0.0)?;

        // FFT roundtrip
        let round = u.to_physical().to_spectral();
        checks.push(Check::upper(
            &format!("fft_roundtrip_n{n}"),
            round.sub(&u).l2(),
            1.0e-12,
            "inverse then forward transform".into(),
        ));

        // Leray idempotence and self-adjointness
        let mut w = random_field(&grid, seed ^ 1, 0.0, (n / 3) as f64, 1.0, 0.0)?;
        w.divfree = false;
        let pu = leray_project(&u);
        checks.push(Check::upper(
            &format!("leray_idempotent_n{n}"),
            leray_project(&pu).sub(&pu).l2(),
            1.0e-12,
            "P^2 = P".into(),
        ));
        let adj_gap = (l2_inner(&leray_project(&u), &w) - l2_inner(&u, &leray_project(&w))).abs();
        checks.push(Check::upper(
            &format!("leray_self_adjoint_n{n}"),
            adj_gap,
            1.0e-11,
            "<Pu, w> = <u, Pw>".into(),
        ));

        // advection skew-symmetry
        let a = random_field(&grid, seed ^ 2, 0.0, (n / 3) as f64, 1.0, 0.0)?;
        let bfield = random_field(&grid, seed ^ 3, 0.0, (n / 3) as f64, 1.0, 0.0)?;
        let skew = l2_inner(
            &nsm_core::advect(&a, &bfield).map_err(|e| anyhow::anyhow!("{e}"))?,
            &bfield,
        )
        .abs();
        checks.push(Check::upper(
            &format!("advection_skew_n{n}"),
            skew,
            1.0e-11,
            "|<(a.grad) b, b>| with div a = 0".into(),
        ));

        // Hall-term energy orthogonality
        let hall_flux = l2_inner(
            &curl(&dealias(&cross(&curl(&bfield), &bfield).map_err(|e| anyhow::anyhow!("{e}"))?)),
            &bfield,
        )
        .abs();
        checks.push(Check::upper(
            &format!("hall_orthogonal_n{n}"),
            hall_flux,
            1.0e-11,
            "<curl((curl B) x B), B> = 0".into(),
        ));
    }

    // divergence preservation over a short nonlinear run
    let grid = make_grid(2, 16, TAU).unwrap();
    let v = random_field(&grid, seed ^ 4, 0.0, 5.0, 0.5, 0.0)?;
    let b = random_field(&grid, seed ^ 5, 0.0, 5.0, 0.5, 0.0)?;
    let params = PhysParams {
        nu: 0.1,
        sigma: 1.0,
        c: 1.0,
        kappa: 0.1,
        alpha: 1.0,
        beta: 1.0,
        b_star: [0.0; 3],
        system: SystemKind::Hmhd,
    };
    let mut s = PlasmaState::new(0.0, v, None, b);
    for _ in 0..20 {
        s = step(&s, &params, 0.01).map_err(|e| anyhow::anyhow!("{e}"))?;
    }
    checks.push(Check::upper(
        "divergence_preserved",
        s.v.divergence_rel().max(s.b.divergence_rel()),
        1.0e-9,
        "max relative divergence of v, B after 20 Hall-MHD steps".into(),
    ));

    // instantaneous energy flux identity for NSM
    let grid = make_grid(2, 16, TAU).unwrap();
    let st = oracle_state(&grid, seed ^ 6, true)?;
    let params = PhysParams {
        nu: 0.2,
        sigma: 1.5,
        c: 2.0,
        kappa: 0.0,
        alpha: 1.0,
        beta: 1.0,
        b_star: [0.0; 3],
        system: SystemKind::Nsm,
    };
    let tend = rhs(&st, &params).map_err(|e| anyhow::anyhow!("{e}"))?;
    let j = nsm_core::ohm_current(&st, &params, false).map_err(|e| anyhow::anyhow!("{e}"))?;
    let flux = l2_inner(&tend.dv.unwrap(), &st.v)
        + l2_inner(&tend.de.unwrap(), st.e.as_ref().unwrap())
        + l2_inner(&tend.db.unwrap(), &st.b);
    let want =
        -params.nu * fractional_laplacian(&st.v, params.alpha / 2.0).l2().powi(2)
            - j.l2().powi(2) / params.sigma;
    checks.push(Check::upper(
        "energy_flux_identity",
        (flux - want).abs() / want.abs().max(1e-300),
        1.0e-10,
        "<rhs, state> against -nu ||Lambda^a v||^2 - ||j||^2 / sigma".into(),
    ));

    Ok(checks)
}

// ---------------------------------------------------------------------------
// Suites
// ---------------------------------------------------------------------------

/// Run a named suite; returns the checks (caller prints / asserts).
pub fn run_suite(suite: &str, out_dir: &Path, seed: u64) -> Result<Vec<Check>> {
    match suite {
        "invariants" => invariant_checks(seed),
        "oracles" => {
            let mut checks = oracle_rhs_checks(2, seed)?;
            checks.extend(oracle_rhs_checks(3, seed)?);
            checks.extend(oracle_stepper_checks(seed)?);
            Ok(checks)
        }
        "calibration" => {
            let grid = make_grid(2, 16, TAU).unwrap();
            let params = nsm_core::MaxRegParams {
                alpha: 1.0,
                nu: 0.5,
                delta0: -0.5,
                m: 2.0,
                r: 2.0,
            };
            let (c1, c2) = crate::scenarios::calibrate_maxreg(&grid, seed..seed + 10, &params)?;
            std::fs::create_dir_all(out_dir)?;
            let path = out_dir.join("constants.txt");
            std::fs::write(
                &path,
                format!(
                    "seed = {seed}\nc1_maxreg = {c1:.17e}\nc2_maxreg = {c2:.17e}\n"
                ),
            )?;
            Ok(vec![Check::asserted(
                "calibration_written",
                c1,
                f64::INFINITY,
                c1.is_finite() && c1 > 0.0,
                format!("constants written to {}", path.display()),
            )])
        }
        other => anyhow::bail!("unknown suite '{other}' (use invariants | oracles | calibration)"),
    }
}
