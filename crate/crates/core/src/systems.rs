//! Right-hand-side evaluators for the plasma systems on the truncated
//! wavenumber ball: the Navier-Stokes-Maxwell system, its perturbation around
//! a constant magnetic field, the Maxwell subsystems, Hall-MHD, fractional
//! MHD, the Hall-only system and the perturbed Hall-MHD system.
//!
//! Pressure is never represented: every velocity tendency is Leray-projected.
//! Stiff diagonal terms are part of the returned tendency, with their rates
//! reported separately so the stepper can integrate them exactly.

use crate::error::{CoreError, Result};
use crate::field::SpectralField;
use crate::ops::{advect, const_advect, cross, curl, dealias, fractional_laplacian, leray_project, truncate};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SystemKind {
    Nsm,
    NsmStar,
    Maxwell,
    MaxwellFree,
    Hmhd,
    Mhd,
    Hall,
    HmhdStar,
}

impl SystemKind {
    /// Systems that carry an electric field.
    pub fn has_e(&self) -> bool {
        matches!(
            self,
            SystemKind::Nsm | SystemKind::NsmStar | SystemKind::Maxwell | SystemKind::MaxwellFree
        )
    }

    /// Systems whose velocity is evolved (Maxwell and Hall hold v fixed).
    pub fn evolves_v(&self) -> bool {
        matches!(
            self,
            SystemKind::Nsm | SystemKind::NsmStar | SystemKind::Hmhd | SystemKind::Mhd | SystemKind::HmhdStar
        )
    }
}

impl std::str::FromStr for SystemKind {
    type Err = CoreError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NSM" => Ok(SystemKind::Nsm),
            "NSM_STAR" => Ok(SystemKind::NsmStar),
            "MAXWELL" => Ok(SystemKind::Maxwell),
            "MAXWELL_FREE" => Ok(SystemKind::MaxwellFree),
            "HMHD" => Ok(SystemKind::Hmhd),
            "MHD" => Ok(SystemKind::Mhd),
            "HALL" => Ok(SystemKind::Hall),
            "HMHD_STAR" => Ok(SystemKind::HmhdStar),
            other => Err(CoreError::BadParams(format!("unknown system '{other}'"))),
        }
    }
}

/// Physical parameters: viscosity, conductivity, light speed, Hall
/// coefficient, dissipation exponents, background field and system selector.
#[derive(Clone, Copy, Debug)]
pub struct PhysParams {
    pub nu: f64,
    pub sigma: f64,
    pub c: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    pub b_star: [f64; 3],
    pub system: SystemKind,
}

impl PhysParams {
    pub fn validate(&self) -> Result<()> {
        if self.nu < 0.0 || self.sigma <= 0.0 || self.c <= 0.0 || self.kappa < 0.0 {
            return Err(CoreError::BadParams(format!(
                "need nu >= 0, sigma > 0, c > 0, kappa >= 0; got nu = {}, sigma = {}, c = {}, kappa = {}",
                self.nu, self.sigma, self.c, self.kappa
            )));
        }
        if self.alpha < 0.0 || self.beta <= 0.0 {
            return Err(CoreError::BadParams(format!(
                "need alpha >= 0, beta > 0; got alpha = {}, beta = {}",
                self.alpha, self.beta
            )));
        }
        if !self.b_star.iter().all(|x| x.is_finite()) {
            return Err(CoreError::BadParams("B* must be finite".into()));
        }
        Ok(())
    }
}

/// The unknowns (v, E, B) at one instant, supported in the truncation ball.
#[derive(Clone, Debug)]
pub struct PlasmaState {
    pub t: f64,
    pub v: SpectralField,
    pub e: Option<SpectralField>,
    pub b: SpectralField,
    /// Radius of the active Fourier truncation ball T_n.
    pub truncation_n: f64,
}

impl PlasmaState {
    pub fn new(t: f64, v: SpectralField, e: Option<SpectralField>, b: SpectralField) -> Self {
        let n = v.grid().k_max();
        PlasmaState {
            t,
            v,
            e,
            b,
            truncation_n: n,
        }
    }

    pub fn e_ref(&self) -> Result<&SpectralField> {
        self.e.as_ref().ok_or(CoreError::MissingField("E"))
    }

    pub fn is_finite(&self) -> bool {
        self.v.is_finite()
            && self.b.is_finite()
            && self.e.as_ref().map_or(true, |e| e.is_finite())
    }
}

/// Diagonal damping rate r(|k|) = base + coeff * |k|^{2 exponent} the stepper
/// integrates exactly.
#[derive(Clone, Copy, Debug, Default)]
pub struct StiffRate {
    pub base: f64,
    pub coeff: f64,
    pub exponent: f64,
}

impl StiffRate {
    pub fn none() -> Self {
        StiffRate::default()
    }

    pub fn rate(&self, ksq: f64) -> f64 {
        if self.coeff == 0.0 {
            self.base
        } else {
            self.base + self.coeff * ksq.powf(self.exponent)
        }
    }

    pub fn is_zero(&self) -> bool {
        self.base == 0.0 && self.coeff == 0.0
    }
}

/// Full right-hand side per field (None = field not evolved), with the stiff
/// diagonal rates that are already contained in the tendencies.
#[derive(Clone, Debug)]
pub struct Tendency {
    pub dv: Option<SpectralField>,
    pub de: Option<SpectralField>,
    pub db: Option<SpectralField>,
    pub stiff_v: StiffRate,
    pub stiff_e: StiffRate,
    pub stiff_b: StiffRate,
}

const DIV_TOL: f64 = 1e-10;

fn require_divfree(u: &SpectralField, what: &'static str) -> Result<()> {
    let rel = u.divergence_rel();
    if rel > DIV_TOL {
        let _ = what;
        return Err(CoreError::NotDivergenceFree { rel });
    }
    Ok(())
}

fn tn(u: &SpectralField, n: f64) -> SpectralField {
    truncate(u, n)
}

/// Ohm's law j = sigma (c E + T_n(v x B)); the perturbed variant replaces B by
/// B + B* (the stationary background has E* = j* = 0 for constant B*).
pub fn ohm_current(state: &PlasmaState, params: &PhysParams, perturbed: bool) -> Result<SpectralField> {
    let e = state.e_ref()?;
    let mut b = state.b.clone();
    if perturbed {
        for m in 0..3 {
            b.comp_mut(m)[0] += params.b_star[m];
        }
    }
    let vxb = tn(&cross(&state.v, &b)?, state.truncation_n);
    let mut j = e.scaled(params.c);
    j.add_scaled(1.0, &vxb);
    j.scale(params.sigma);
    Ok(j)
}

fn nsm_rhs_impl(state: &PlasmaState, params: &PhysParams, perturbed: bool) -> Result<Tendency> {
    require_divfree(&state.v, "v")?;
    require_divfree(&state.b, "B")?;
    let e = state.e_ref()?;
    let n = state.truncation_n;
    let j = ohm_current(state, params, perturbed)?;

    // Lorentz force j x B (perturbed: j_bar x (B + B*))
    let mut b_tot = state.b.clone();
    if perturbed {
        for m in 0..3 {
            b_tot.comp_mut(m)[0] += params.b_star[m];
        }
    }
    let lorentz = tn(&leray_project(&cross(&j, &b_tot)?), n);
    let advection = tn(&leray_project(&advect(&state.v, &state.v)?), n);

    let mut dv = fractional_laplacian(&state.v, params.alpha).scaled(-params.nu);
    dv.add_scaled(-1.0, &advection);
    dv.add_scaled(1.0, &lorentz);
    let dv = leray_project(&dv);

    let mut de = curl(&state.b);
    de.add_scaled(-1.0, &j);
    de.scale(params.c);

    let db = curl(e).scaled(-params.c);

    Ok(Tendency {
        dv: Some(dv),
        de: Some(de),
        db: Some(db),
        stiff_v: StiffRate {
            base: 0.0,
            coeff: params.nu,
            exponent: params.alpha,
        },
        stiff_e: StiffRate {
            base: params.sigma * params.c * params.c,
            coeff: 0.0,
            exponent: 0.0,
        },
        stiff_b: StiffRate::none(),
    })
}

/// NSM tendency: dv = -nu Lambda^{2a} v - T_n P(v.grad v) + T_n P(j x B),
/// dE = c (curl B - j), dB = -c curl E.
pub fn nsm_rhs(state: &PlasmaState, params: &PhysParams) -> Result<Tendency> {
    nsm_rhs_impl(state, params, false)
}

/// NSM around a constant background B*: Ohm current and Lorentz force use
/// B + B*.
pub fn nsm_star_rhs(state: &PlasmaState, params: &PhysParams) -> Result<Tendency> {
    nsm_rhs_impl(state, params, true)
}

/// Maxwell subsystem: free variant has no current; otherwise j comes from
/// Ohm's law with the (held-fixed) velocity.
pub fn maxwell_rhs(state: &PlasmaState, params: &PhysParams, free: bool) -> Result<Tendency> {
    let e = state.e_ref()?;
    let mut de = curl(&state.b).scaled(params.c);
    let stiff_e = if free {
        StiffRate::none()
    } else {
        let j = ohm_current(state, params, false)?;
        de.add_scaled(-params.c, &j);
        StiffRate {
            base: params.sigma * params.c * params.c,
            coeff: 0.0,
            exponent: 0.0,
        }
    };
    let db = curl(e).scaled(-params.c);
    Ok(Tendency {
        dv: None,
        de: Some(de),
        db: Some(db),
        stiff_v: StiffRate::none(),
        stiff_e,
        stiff_b: StiffRate::none(),
    })
}

/// Hall-MHD tendency; kappa = 0 degenerates to resistive MHD in curl form.
pub fn hmhd_rhs(state: &PlasmaState, params: &PhysParams) -> Result<Tendency> {
    require_divfree(&state.v, "v")?;
    require_divfree(&state.b, "B")?;
    let n = state.truncation_n;
    let j = curl(&state.b);
    let jxb = tn(&cross(&j, &state.b)?, n);

    let mut dv = fractional_laplacian(&state.v, params.alpha).scaled(-params.nu);
    dv.add_scaled(-1.0, &tn(&leray_project(&advect(&state.v, &state.v)?), n));
    dv.add_scaled(1.0, &tn(&leray_project(&jxb), n));
    let dv = leray_project(&dv);

    let mut db = curl(&tn(&cross(&state.v, &state.b)?, n));
    db.add_scaled(-1.0 / params.sigma, &fractional_laplacian(&state.b, params.beta));
    if params.kappa != 0.0 {
        db.add_scaled(-params.kappa / params.sigma, &curl(&jxb));
    }

    Ok(Tendency {
        dv: Some(dv),
        de: None,
        db: Some(db),
        stiff_v: StiffRate {
            base: 0.0,
            coeff: params.nu,
            exponent: params.alpha,
        },
        stiff_e: StiffRate::none(),
        stiff_b: StiffRate {
            base: 0.0,
            coeff: 1.0 / params.sigma,
            exponent: params.beta,
        },
    })
}

/// Fractional MHD in advection form, coded independently of `hmhd_rhs`:
/// dv uses B.grad B (the gradient part of the Lorentz force is removed by the
/// projection), dB uses B.grad v - v.grad B.
pub fn mhd_rhs(state: &PlasmaState, params: &PhysParams) -> Result<Tendency> {
    require_divfree(&state.v, "v")?;
    require_divfree(&state.b, "B")?;
    let n = state.truncation_n;

    let mut dv = fractional_laplacian(&state.v, params.alpha).scaled(-params.nu);
    dv.add_scaled(-1.0, &tn(&leray_project(&advect(&state.v, &state.v)?), n));
    dv.add_scaled(1.0, &tn(&leray_project(&advect(&state.b, &state.b)?), n));
    let dv = leray_project(&dv);

    let mut db = tn(&advect(&state.b, &state.v)?, n);
    db.add_scaled(-1.0, &tn(&advect(&state.v, &state.b)?, n));
    db.add_scaled(-1.0 / params.sigma, &fractional_laplacian(&state.b, params.beta));

    Ok(Tendency {
        dv: Some(dv),
        de: None,
        db: Some(db),
        stiff_v: StiffRate {
            base: 0.0,
            coeff: params.nu,
            exponent: params.alpha,
        },
        stiff_e: StiffRate::none(),
        stiff_b: StiffRate {
            base: 0.0,
            coeff: 1.0 / params.sigma,
            exponent: params.beta,
        },
    })
}

/// Hall-only system: dB = -(1/sigma) Lambda^{2 beta} B
/// - (kappa/sigma) curl((curl B) x B).
pub fn hall_rhs(b: &SpectralField, params: &PhysParams, truncation_n: f64) -> Result<Tendency> {
    require_divfree(b, "B")?;
    let j = curl(b);
    let mut db = fractional_laplacian(b, params.beta).scaled(-1.0 / params.sigma);
    if params.kappa != 0.0 {
        let jxb = tn(&cross(&j, b)?, truncation_n);
        db.add_scaled(-params.kappa / params.sigma, &curl(&jxb));
    }
    Ok(Tendency {
        dv: None,
        de: None,
        db: Some(db),
        stiff_v: StiffRate::none(),
        stiff_e: StiffRate::none(),
        stiff_b: StiffRate {
            base: 0.0,
            coeff: 1.0 / params.sigma,
            exponent: params.beta,
        },
    })
}

/// Perturbed Hall-MHD around a constant B* with velocity damping (alpha = 0,
/// beta = 1). The B* advection terms are exact i (B* . k) multipliers.
pub fn hmhd_star_rhs(state: &PlasmaState, params: &PhysParams) -> Result<Tendency> {
    require_divfree(&state.v, "v")?;
    require_divfree(&state.b, "B")?;
    let n = state.truncation_n;
    let bs = params.b_star;
    let j = curl(&state.b);

    let mut dv = state.v.scaled(-params.nu);
    dv.add_scaled(-1.0, &tn(&leray_project(&advect(&state.v, &state.v)?), n));
    dv.add_scaled(1.0, &tn(&leray_project(&advect(&state.b, &state.b)?), n));
    dv.add_scaled(1.0, &leray_project(&const_advect(bs, &state.b)));
    let dv = leray_project(&dv);

    let mut db = tn(&advect(&state.b, &state.v)?, n);
    db.add_scaled(-1.0, &tn(&advect(&state.v, &state.b)?, n));
    db.add_scaled(1.0, &const_advect(bs, &state.v));
    db.add_scaled(-1.0 / params.sigma, &fractional_laplacian(&state.b, 1.0));
    if params.kappa != 0.0 {
        let mut hall = tn(&advect(&j, &state.b)?, n);
        hall.add_scaled(-1.0, &tn(&advect(&state.b, &j)?, n));
        db.add_scaled(params.kappa / params.sigma, &hall);
        db.add_scaled(-params.kappa / params.sigma, &const_advect(bs, &j));
    }

    Ok(Tendency {
        dv: Some(dv),
        de: None,
        db: Some(db),
        stiff_v: StiffRate {
            base: params.nu,
            coeff: 0.0,
            exponent: 0.0,
        },
        stiff_e: StiffRate::none(),
        stiff_b: StiffRate {
            base: 0.0,
            coeff: 1.0 / params.sigma,
            exponent: 1.0,
        },
    })
}

/// Evaluate the tendency of whichever system `params.system` selects.
pub fn rhs(state: &PlasmaState, params: &PhysParams) -> Result<Tendency> {
    match params.system {
        SystemKind::Nsm => nsm_rhs(state, params),
        SystemKind::NsmStar => nsm_star_rhs(state, params),
        SystemKind::Maxwell => maxwell_rhs(state, params, false),
        SystemKind::MaxwellFree => maxwell_rhs(state, params, true),
        SystemKind::Hmhd => hmhd_rhs(state, params),
        SystemKind::Mhd => mhd_rhs(state, params),
        SystemKind::Hall => hall_rhs(&state.b, params, state.truncation_n),
        SystemKind::HmhdStar => hmhd_star_rhs(state, params),
    }
}

/// Project the state's fields onto the truncation ball and the dealiasing
/// mask, and re-project v and B divergence-free.
pub fn enforce_constraints(state: &mut PlasmaState) {
    let n = state.truncation_n;
    state.v = leray_project(&truncate(&dealias(&state.v), n));
    state.b = leray_project(&truncate(&dealias(&state.b), n));
    if let Some(e) = &state.e {
        state.e = Some(truncate(&dealias(e), n));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PhysicalField;
    use crate::grid::make_grid;
    use crate::norms::l2_inner;
    use num_complex::Complex64;

    const TAU: f64 = 2.0 * std::f64::consts::PI;

    fn params(system: SystemKind) -> PhysParams {
        PhysParams {
            nu: 0.1,
            sigma: 2.0,
            c: 3.0,
            kappa: 0.0,
            alpha: 1.0,
            beta: 1.0,
            b_star: [0.0; 3],
            system,
        }
    }

    fn zero_state(g: &std::sync::Arc<crate::grid::Grid>, with_e: bool) -> PlasmaState {
        PlasmaState::new(
            0.0,
            SpectralField::zeros(g),
            with_e.then(|| SpectralField::zeros(g)),
            SpectralField::zeros(g),
        )
    }

    #[test]
    fn ohm_constant_fields() {
        let g = make_grid(2, 8, TAU).unwrap();
        let mut st = zero_state(&g, true);
        let p = params(SystemKind::Nsm);
        let j = ohm_current(&st, &p, false).unwrap();
        assert_eq!(j.l2(), 0.0);

        st.e.as_mut().unwrap().comp_mut(0)[0] = Complex64::new(1.0, 0.0);
        let j = ohm_current(&st, &p, false).unwrap();
        assert!((j.comp(0)[0].re - 6.0).abs() < 1e-13);
    }

    #[test]
    fn ohm_missing_e() {
        let g = make_grid(2, 8, TAU).unwrap();
        let st = zero_state(&g, false);
        assert!(matches!(
            ohm_current(&st, &params(SystemKind::Nsm), false),
            Err(CoreError::MissingField("E"))
        ));
    }

    #[test]
    fn zero_state_zero_tendency() {
        let g = make_grid(2, 8, TAU).unwrap();
        let st = zero_state(&g, true);
        let t = nsm_rhs(&st, &params(SystemKind::Nsm)).unwrap();
        assert_eq!(t.dv.unwrap().l2(), 0.0);
        assert_eq!(t.de.unwrap().l2(), 0.0);
        assert_eq!(t.db.unwrap().l2(), 0.0);
    }

    #[test]
    fn constant_b_is_stationary() {
        let g = make_grid(3, 8, TAU).unwrap();
        let mut st = zero_state(&g, true);
        st.b.comp_mut(2)[0] = Complex64::new(1.5, 0.0);
        let t = nsm_rhs(&st, &params(SystemKind::Nsm)).unwrap();
        assert!(t.dv.unwrap().l2() < 1e-14);
        assert!(t.de.unwrap().l2() < 1e-14);
        assert!(t.db.unwrap().l2() < 1e-14);

        let t = hmhd_rhs(&st, &params(SystemKind::Hmhd)).unwrap();
        assert!(t.dv.unwrap().l2() < 1e-14);
        assert!(t.db.unwrap().l2() < 1e-14);

        let t = hall_rhs(&st.b, &params(SystemKind::Hall), st.truncation_n).unwrap();
        assert!(t.db.unwrap().l2() < 1e-14);
    }

    #[test]
    fn nsm_star_reduces_to_nsm() {
        let g = make_grid(2, 16, TAU).unwrap();
        let v = leray_project(
            &PhysicalField::from_fn(&g, |x| [x[1].sin(), x[0].cos(), (x[0] + x[1]).sin()])
                .to_spectral(),
        );
        let b = leray_project(
            &PhysicalField::from_fn(&g, |x| [(2.0 * x[1]).cos(), x[0].sin(), x[1].cos()])
                .to_spectral(),
        );
        let e = PhysicalField::from_fn(&g, |x| [x[0].cos(), 0.3, x[1].sin()]).to_spectral();
        let st = PlasmaState::new(0.0, v, Some(e), b);
        let p = params(SystemKind::NsmStar);
        let plain = nsm_rhs(&st, &p).unwrap();
        let star = nsm_star_rhs(&st, &p).unwrap();
        assert!(star.dv.unwrap().sub(&plain.dv.unwrap()).l2() < 1e-13);
        assert!(star.de.unwrap().sub(&plain.de.unwrap()).l2() < 1e-13);
    }

    #[test]
    fn nsm_star_background_cancellation() {
        // s = 0 cancellation: <j_bar x B*, v> + <j_bar, v x B*> = 0
        let g = make_grid(3, 8, TAU).unwrap();
        let v = leray_project(
            &PhysicalField::from_fn(&g, |x| {
                [(x[1] + x[2]).sin(), x[0].cos(), (x[0] - x[1]).sin()]
            })
            .to_spectral(),
        );
        let b = leray_project(
            &PhysicalField::from_fn(&g, |x| [x[2].cos(), (x[0] + x[1]).sin(), x[1].cos()])
                .to_spectral(),
        );
        let e = PhysicalField::from_fn(&g, |x| [0.2, x[2].sin(), x[0].cos()]).to_spectral();
        let st = PlasmaState::new(0.0, v.clone(), Some(e), b);
        let mut p = params(SystemKind::NsmStar);
        p.b_star = [0.3, -0.2, 1.0];
        let jbar = ohm_current(&st, &p, true).unwrap();
        let mut bstar = SpectralField::zeros(&g);
        for m in 0..3 {
            bstar.comp_mut(m)[0] = Complex64::new(p.b_star[m], 0.0);
        }
        let lhs = l2_inner(&cross(&jbar, &bstar).unwrap(), &v)
            + l2_inner(&jbar, &cross(&v, &bstar).unwrap());
        assert!(lhs.abs() < 1e-11 * jbar.l2().max(1.0) * v.l2().max(1.0));
    }

    #[test]
    fn free_maxwell_is_skew() {
        let g = make_grid(2, 16, TAU).unwrap();
        let e = PhysicalField::from_fn(&g, |x| [x[1].sin(), x[0].cos(), (x[0] + x[1]).cos()])
            .to_spectral();
        let b = leray_project(
            &PhysicalField::from_fn(&g, |x| [(2.0 * x[0]).sin(), x[1].cos(), x[0].sin()])
                .to_spectral(),
        );
        let st = PlasmaState::new(0.0, SpectralField::zeros(&g), Some(e.clone()), b.clone());
        let t = maxwell_rhs(&st, &params(SystemKind::MaxwellFree), true).unwrap();
        let flux = l2_inner(&t.de.unwrap(), &e) + l2_inner(&t.db.unwrap(), &b);
        assert!(flux.abs() < 1e-12 * (e.l2() + b.l2()).powi(2));
    }

    #[test]
    fn damped_maxwell_quadratic_form() {
        let g = make_grid(2, 16, TAU).unwrap();
        let e = PhysicalField::from_fn(&g, |x| [x[1].sin(), x[0].cos(), 0.5]).to_spectral();
        let b = leray_project(
            &PhysicalField::from_fn(&g, |x| [x[0].sin(), (x[0] - x[1]).cos(), x[1].sin()])
                .to_spectral(),
        );
        let st = PlasmaState::new(0.0, SpectralField::zeros(&g), Some(e.clone()), b.clone());
        let p = params(SystemKind::Maxwell);
        let t = maxwell_rhs(&st, &p, false).unwrap();
        let flux = l2_inner(&t.de.unwrap(), &e) + l2_inner(&t.db.unwrap(), &b);
        let want = -p.sigma * p.c * p.c * e.l2().powi(2);
        assert!((flux - want).abs() < 1e-10 * want.abs());
    }

    #[test]
    fn hall_beltrami_annihilates_hall_term() {
        let g = make_grid(3, 8, TAU).unwrap();
        let b = PhysicalField::from_fn(&g, |x| [x[2].cos(), x[2].sin(), 0.0]).to_spectral();
        let mut p = params(SystemKind::Hall);
        p.kappa = 0.7;
        let t = hall_rhs(&b, &p, g.k_max()).unwrap();
        // Hall contribution vanishes, leaving pure diffusion -(1/sigma) B
        let want = b.scaled(-1.0 / p.sigma);
        assert!(t.db.unwrap().sub(&want).l2() < 1e-12);
    }

    #[test]
    fn hall_energy_orthogonality() {
        let g = make_grid(2, 16, TAU).unwrap();
        let b = leray_project(
            &PhysicalField::from_fn(&g, |x| {
                [(x[0] + 2.0 * x[1]).sin(), x[0].cos(), (x[1] - x[0]).sin()]
            })
            .to_spectral(),
        );
        let mut p = params(SystemKind::Hall);
        p.kappa = 0.5;
        p.beta = 1.5;
        let t = hall_rhs(&b, &p, g.k_max()).unwrap();
        let flux = l2_inner(&t.db.unwrap(), &b);
        let want = -crate::norms::homogeneous_norm(&fractional_laplacian(&b, p.beta / 2.0), 0.0)
            .unwrap()
            .powi(2)
            / p.sigma;
        assert!((flux - want).abs() < 1e-11 * want.abs().max(1.0));
    }

    #[test]
    fn hall_single_mode_pure_decay() {
        let g = make_grid(2, 16, TAU).unwrap();
        let mut b = SpectralField::zeros(&g);
        // divergence-free single mode pair at k = (2, 0)
        b.comp_mut(1)[g.index_of([2, 0, 0])] = Complex64::new(0.5, 0.0);
        b.comp_mut(1)[g.index_of([-2, 0, 0])] = Complex64::new(0.5, 0.0);
        let mut p = params(SystemKind::Hall);
        p.beta = 1.5;
        let t = hall_rhs(&b, &p, g.k_max()).unwrap();
        let want = b.scaled(-4.0f64.powf(1.5) / p.sigma);
        assert!(t.db.unwrap().sub(&want).l2() < 1e-12);
    }

    #[test]
    fn hmhd_kappa_zero_matches_mhd_form() {
        let g = make_grid(2, 16, TAU).unwrap();
        let v = leray_project(
            &PhysicalField::from_fn(&g, |x| [x[1].sin(), (x[0] + x[1]).cos(), x[0].sin()])
                .to_spectral(),
        );
        let b = leray_project(
            &PhysicalField::from_fn(&g, |x| [(2.0 * x[1]).sin(), x[0].cos(), (x[0] - x[1]).cos()])
                .to_spectral(),
        );
        let st = PlasmaState::new(0.0, v, None, b);
        let p = params(SystemKind::Hmhd);
        let hall_form = hmhd_rhs(&st, &p).unwrap();
        let adv_form = mhd_rhs(&st, &p).unwrap();
        let dv_h = hall_form.dv.unwrap();
        let dv_a = adv_form.dv.unwrap();
        assert!(dv_h.sub(&dv_a).l2() < 1e-11 * dv_h.l2().max(1.0));
        let db_h = hall_form.db.unwrap();
        let db_a = adv_form.db.unwrap();
        assert!(db_h.sub(&db_a).l2() < 1e-11 * db_h.l2().max(1.0));
    }

    #[test]
    fn hmhd_star_reductions_and_cancellation() {
        let g = make_grid(2, 16, TAU).unwrap();
        let v = leray_project(
            &PhysicalField::from_fn(&g, |x| [x[1].sin(), x[0].cos(), (x[0] + x[1]).sin()])
                .to_spectral(),
        );
        let b = leray_project(
            &PhysicalField::from_fn(&g, |x| [(x[0] - x[1]).cos(), x[1].sin(), x[0].cos()])
                .to_spectral(),
        );
        let st = PlasmaState::new(0.0, v.clone(), None, b.clone());

        // zero state
        let g3 = make_grid(3, 8, TAU).unwrap();
        let z = PlasmaState::new(0.0, SpectralField::zeros(&g3), None, SpectralField::zeros(&g3));
        let mut p = params(SystemKind::HmhdStar);
        p.alpha = 0.0;
        let t = hmhd_star_rhs(&z, &p).unwrap();
        assert_eq!(t.dv.unwrap().l2(), 0.0);
        assert_eq!(t.db.unwrap().l2(), 0.0);

        // B* = 0, kappa = 0 matches the MHD form with alpha = 0, beta = 1
        let star = hmhd_star_rhs(&st, &p).unwrap();
        let mut pm = p;
        pm.system = SystemKind::Mhd;
        let plain = mhd_rhs(&st, &pm).unwrap();
        let dv_s = star.dv.unwrap();
        let dv_p = plain.dv.unwrap();
        assert!(dv_s.sub(&dv_p).l2() < 1e-11 * dv_s.l2().max(1.0));
        assert!(star.db.unwrap().sub(&plain.db.unwrap()).l2() < 1e-11);

        // I9-type cancellation: <curl(j x B*), B> = <j x B*, j> = 0
        let j = curl(&b);
        let mut bstar = SpectralField::zeros(&g);
        let bs = [0.2, -0.5, 1.0];
        for m in 0..3 {
            bstar.comp_mut(m)[0] = Complex64::new(bs[m], 0.0);
        }
        let jxbs = cross(&j, &bstar).unwrap();
        let lhs = l2_inner(&curl(&jxbs), &b);
        let rhs = l2_inner(&jxbs, &j);
        assert!(lhs.abs() < 1e-11 * j.l2().powi(2).max(1.0));
        assert!(rhs.abs() < 1e-11 * j.l2().powi(2).max(1.0));
    }

    #[test]
    fn rejects_divergent_input() {
        let g = make_grid(2, 16, TAU).unwrap();
        let v = PhysicalField::from_fn(&g, |x| [x[0].sin(), 0.0, 0.0]).to_spectral();
        let st = PlasmaState::new(0.0, v, Some(SpectralField::zeros(&g)), SpectralField::zeros(&g));
        assert!(matches!(
            nsm_rhs(&st, &params(SystemKind::Nsm)),
            Err(CoreError::NotDivergenceFree { .. })
        ));
    }

    #[test]
    fn nsm_energy_identity_on_random_state() {
        let g = make_grid(2, 16, TAU).unwrap();
        let v = leray_project(&dealias(
            &PhysicalField::from_fn(&g, |x| {
                [
                    (x[0] + 2.0 * x[1]).sin() * 0.3,
                    (2.0 * x[0]).cos() * 0.2,
                    (x[1] - x[0]).sin() * 0.4,
                ]
            })
            .to_spectral(),
        ));
        let b = leray_project(&dealias(
            &PhysicalField::from_fn(&g, |x| {
                [(x[1]).cos() * 0.5, (x[0] + x[1]).sin() * 0.3, (2.0 * x[1]).cos() * 0.1]
            })
            .to_spectral(),
        ));
        let e = dealias(
            &PhysicalField::from_fn(&g, |x| [x[0].sin() * 0.2, 0.1, x[1].cos() * 0.3])
                .to_spectral(),
        );
        let st = PlasmaState::new(0.0, v.clone(), Some(e.clone()), b.clone());
        let p = params(SystemKind::Nsm);
        let t = nsm_rhs(&st, &p).unwrap();
        let j = ohm_current(&st, &p, false).unwrap();
        let flux = l2_inner(&t.dv.unwrap(), &v)
            + l2_inner(&t.de.unwrap(), &e)
            + l2_inner(&t.db.unwrap(), &b);
        let lam_v = fractional_laplacian(&v, p.alpha / 2.0);
        let want = -p.nu * lam_v.l2().powi(2) - j.l2().powi(2) / p.sigma;
        assert!(
            (flux - want).abs() < 1e-10 * want.abs(),
            "flux {flux} vs {want}"
        );
    }
}
