//! The experiment catalog: eight named presets (E1..E8) plus CUSTOM, each
//! producing `diagnostics.csv`, `snapshots/*.nsms` and a `report.json` with
//! named pass/fail checks.

use crate::config::{ExperimentConfig, InitialSpec, Sweep, SweepParam};
use crate::initial::{build_initial, random_field};
use crate::report::{columns_for, write_csv, write_snapshots, Check, ScenarioReport};
use anyhow::{bail, Context, Result};
use nsm_core::{
    curl, energy_report, fit_power_law, helicity, hs_norm, integrate, integrate_samples,
    leray_project, make_grid, ohm_current, truncate, MaxRegParams,
    PhysParams, PlasmaState, RecorderConfig, SpectralField, StepperConfig, SystemKind, Trajectory,
};
use serde_json::json;
use std::path::Path;
use std::sync::Arc;

const TAU: f64 = 2.0 * std::f64::consts::PI;

/// Run one configured simulation, returning the (projected) initial state and
/// the trajectory.
pub fn simulate(cfg: &ExperimentConfig) -> Result<(PlasmaState, Trajectory)> {
    let initial = build_initial(cfg)?;
    let recorder = RecorderConfig {
        hs_order: cfg.hs_order,
        helicity: cfg.record_helicity,
        ball_m: cfg.ball_m,
    };
    let traj = integrate(&initial, &cfg.params, &cfg.stepper, &recorder)
        .map_err(|e| anyhow::anyhow!("integration failed: {e}"))?;
    Ok((initial, traj))
}

fn write_run_outputs(
    out_dir: &Path,
    cfg: &ExperimentConfig,
    traj: &Trajectory,
) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let cols = columns_for(
        traj.final_state(),
        cfg.record_helicity,
        cfg.ball_m.is_some(),
    );
    write_csv(&out_dir.join("diagnostics.csv"), &traj.records, cols)?;
    write_snapshots(out_dir, traj)?;
    Ok(())
}

fn blow_up_check(traj: &Trajectory, out_dir: &Path) -> Check {
    match traj.blew_up_at {
        None => Check::asserted("finite_trajectory", 0.0, 1.0, true, "no NaN/Inf".into()),
        Some(t) => Check::asserted(
            "finite_trajectory",
            t,
            1.0,
            false,
            format!(
                "blow-up at t = {t}; last healthy snapshot in {}",
                out_dir.join("snapshots").display()
            ),
        ),
    }
}

/// Dispatch a scenario by name. CUSTOM runs the config as-is (including an
/// optional sweep); E1..E8 install their presets first.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ScenarioReport> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let report = match cfg.scenario.as_str() {
        "CUSTOM" => run_custom(cfg, out_dir)?,
        "E1" => run_e1(cfg, out_dir)?,
        "E2" => run_e2(cfg, out_dir)?,
        "E3" => run_e3(cfg, out_dir)?,
        "E4" => run_e4(cfg, out_dir)?,
        "E5" => run_e5(cfg, out_dir)?,
        "E6" => run_e6(cfg, out_dir)?,
        "E7" => run_e7(cfg, out_dir)?,
        "E8" => run_e8(cfg, out_dir)?,
        other => bail!("unknown scenario '{other}'"),
    };
    report.write(out_dir)?;
    Ok(report)
}

fn apply_sweep_value(cfg: &mut ExperimentConfig, param: SweepParam, value: f64) {
    match param {
        SweepParam::Nu => cfg.params.nu = value,
        SweepParam::Sigma => cfg.params.sigma = value,
        SweepParam::C => cfg.params.c = value,
        SweepParam::N => cfg.n = value as usize,
    }
}

fn run_custom(cfg: &ExperimentConfig, out_dir: &Path) -> Result<ScenarioReport> {
    let mut checks = Vec::new();
    match &cfg.sweep {
        None => {
            let (_, traj) = simulate(cfg)?;
            write_run_outputs(out_dir, cfg, &traj)?;
            checks.push(blow_up_check(&traj, out_dir));
            let rep = energy_report(&traj.records)
                .map_err(|e| anyhow::anyhow!("energy report: {e}"))?;
            checks.push(Check::reported(
                "energy_identity_residual",
                rep.residual_rel,
                "relative |dE + int diss| over the run".into(),
            ));
        }
        Some(Sweep { param, values }) => {
            for &value in values {
                let mut member = cfg.clone();
                member.sweep = None;
                apply_sweep_value(&mut member, *param, value);
                let sub = out_dir.join(format!("sweep_{param}_{value}"));
                let (_, traj) = simulate(&member)?;
                write_run_outputs(&sub, &member, &traj)?;
                checks.push(blow_up_check(&traj, &sub));
            }
        }
    }
    Ok(ScenarioReport::new("CUSTOM", checks, json!({})))
}

/// E1 — exact energy identity for NSM, d = 2, alpha = 1, N = 32, t in [0,1]:
/// the cumulative residual |E(1) - E(0) + int (diss_visc + diss_ohmic)| must
/// stay below 1e-8 of E(0).
fn run_e1(base: &ExperimentConfig, out_dir: &Path) -> Result<ScenarioReport> {
    let mut cfg = base.clone();
    cfg.d = 2;
    cfg.n = 32;
    cfg.len = TAU;
    cfg.params = PhysParams {
        nu: 0.1,
        sigma: 1.0,
        c: 1.0,
        kappa: 0.0,
        alpha: 1.0,
        beta: 1.0,
        b_star: [0.0; 3],
        system: SystemKind::Nsm,
    };
    cfg.stepper = StepperConfig {
        dt: 2.0e-3,
        cfl: 1.0e9, // fixed dt; the identity check wants uniform sampling
        t_end: 1.0,
        record_every: 1,
        snapshot_every: 0,
    };
    cfg.initial = InitialSpec::Random {
        band_lo: 0.0,
        band_hi: 4.0,
        amplitude: 0.5,
        hs_order: 0.0,
    };
    let (_, traj) = simulate(&cfg)?;
    write_run_outputs(out_dir, &cfg, &traj)?;
    let rep = energy_report(&traj.records).map_err(|e| anyhow::anyhow!("{e}"))?;
    let checks = vec![
        blow_up_check(&traj, out_dir),
        Check::upper(
            "energy_identity_residual",
            rep.residual_rel,
            1.0e-8,
            format!(
                "E(0) = {:.6e}, E(1) = {:.6e}, dissipated = {:.6e}",
                rep.initial, rep.fin, rep.dissipated
            ),
        ),
    ];
    Ok(ScenarioReport::new(
        "E1",
        checks,
        json!({"dt": traj.dt_eff, "steps": traj.steps_taken}),
    ))
}

/// Shared helper: run one member at a sweep value, write outputs under a
/// subdirectory, return the trajectory.
fn member_run(
    cfg: &ExperimentConfig,
    out_dir: &Path,
    tag: &str,
) -> Result<Trajectory> {
    let sub = out_dir.join(tag);
    let (_, traj) = simulate(cfg)?;
    write_run_outputs(&sub, cfg, &traj)?;
    if traj.blew_up_at.is_some() {
        bail!("member '{tag}' blew up at t = {:?}", traj.blew_up_at);
    }
    Ok(traj)
}

/// E2 — inviscid limit rate: NSM at d = 2, N = 32, nu sweep against the
/// nu = 0 run from identical data; the L2 error at t = 0.5 must fit a slope
/// >= 0.9 in nu (theory: 1.0), and the H^{s/2} error slope >= 0.45.
fn run_e2(base: &ExperimentConfig, out_dir: &Path) -> Result<ScenarioReport> {
    let mut cfg = base.clone();
    cfg.d = 2;
    cfg.n = 32;
    cfg.len = TAU;
    cfg.params = PhysParams {
        nu: 0.0,
        sigma: 1.0,
        c: 1.0,
        kappa: 0.0,
        alpha: 1.0,
        beta: 1.0,
        b_star: [0.0; 3],
        system: SystemKind::Nsm,
    };
    cfg.stepper = StepperConfig {
        dt: 2.5e-3,
        cfl: 1.0e9,
        t_end: 0.5,
        record_every: 10,
        snapshot_every: 0,
    };
    cfg.initial = InitialSpec::Random {
        band_lo: 0.0,
        band_hi: 4.0,
        amplitude: 0.5,
        hs_order: 0.0,
    };
    // regularity order for the interpolated rate: s = 2, report s' = s/2 = 1
    let s = 2.0;

    let reference = member_run(&cfg, out_dir, "nu_0")?;
    let vb_ref = reference.final_state();

    let nus = [1.0e-2, 3.0e-3, 1.0e-3, 3.0e-4];
    let mut l2_err = Vec::new();
    let mut hs_err = Vec::new();
    for nu in nus {
        let mut member = cfg.clone();
        member.params.nu = nu;
        let traj = member_run(&member, out_dir, &format!("nu_{nu}"))?;
        let f = traj.final_state();
        let dv = f.v.sub(&vb_ref.v);
        let db = f.b.sub(&vb_ref.b);
        let de = f
            .e
            .as_ref()
            .unwrap()
            .sub(vb_ref.e.as_ref().unwrap());
        l2_err.push(
            (dv.l2().powi(2) + db.l2().powi(2) + de.l2().powi(2)).sqrt(),
        );
        hs_err.push(
            (hs_norm(&dv, s / 2.0).powi(2)
                + hs_norm(&db, s / 2.0).powi(2)
                + hs_norm(&de, s / 2.0).powi(2))
            .sqrt(),
        );
    }
    let (_, p_l2) = fit_power_law(&nus.to_vec(), &l2_err).map_err(|e| anyhow::anyhow!("{e}"))?;
    let (_, p_hs) = fit_power_law(&nus.to_vec(), &hs_err).map_err(|e| anyhow::anyhow!("{e}"))?;
    let checks = vec![
        Check::asserted(
            "l2_error_slope",
            p_l2,
            0.9,
            p_l2 >= 0.9,
            format!("errors at t = 0.5: {l2_err:?}"),
        ),
        Check::asserted(
            "hs_half_error_slope",
            p_hs,
            0.45,
            p_hs >= 0.45,
            format!("H^{{s/2}} errors: {hs_err:?}"),
        ),
    ];
    Ok(ScenarioReport::new(
        "E2",
        checks,
        json!({"nus": nus, "l2_err": l2_err, "hs_err": hs_err}),
    ))
}

/// Matched initial electric field for the c -> infinity comparison: choose
/// E0 so the initial Ohm current equals the MHD current curl B0 / sigma:
/// E0 = (curl B0 / sigma - T_n(v0 x B0)) / c.
fn matched_e0(
    v0: &SpectralField,
    b0: &SpectralField,
    sigma: f64,
    c: f64,
    n: f64,
) -> Result<SpectralField> {
    let mut e0 = curl(b0).scaled(1.0 / sigma);
    let vxb = truncate(&nsm_core::cross(v0, b0).map_err(|e| anyhow::anyhow!("{e}"))?, n);
    e0.add_scaled(-1.0, &vxb);
    e0.scale(1.0 / c);
    Ok(e0)
}

/// E3 — c -> infinity limit: NSM (d = 2, alpha = 1) against the kappa = 0
/// H-MHD run from matched data; the L2 difference of (v, B) at t = 0.5 must
/// be strictly decreasing over c in {1,3,10,30,100} with the last value below
/// 0.1 x the first.
fn run_e3(base: &ExperimentConfig, out_dir: &Path) -> Result<ScenarioReport> {
    let mut cfg = base.clone();
    cfg.d = 2;
    cfg.n = 32;
    cfg.len = TAU;
    cfg.params = PhysParams {
        nu: 0.1,
        sigma: 1.0,
        c: 1.0,
        kappa: 0.0,
        alpha: 1.0,
        beta: 1.0,
        b_star: [0.0; 3],
        system: SystemKind::Mhd,
    };
    cfg.stepper = StepperConfig {
        dt: 2.5e-3,
        cfl: 1.0e9,
        t_end: 0.5,
        record_every: 10,
        snapshot_every: 0,
    };
    cfg.initial = InitialSpec::Random {
        band_lo: 0.0,
        band_hi: 4.0,
        amplitude: 0.4,
        hs_order: 0.0,
    };

    // reference: resistive MHD (curl-form limit system, kappa = 0)
    let limit_traj = member_run(&cfg, out_dir, "mhd_limit")?;
    let limit = limit_traj.final_state();

    let cs = [1.0, 3.0, 10.0, 30.0, 100.0];
    let mut diffs = Vec::new();
    for c in cs {
        let mut member = cfg.clone();
        member.params.system = SystemKind::Nsm;
        member.params.c = c;
        // explicit Ohm forcing resolves on the sigma c^2 scale
        member.stepper.dt = (2.5e-3f64).min(0.5 / (member.params.sigma * c * c));
        // build matched data by hand: same (v0, B0) as the limit run
        let init = build_initial(&member)?;
        let e0 = matched_e0(
            &init.v,
            &init.b,
            member.params.sigma,
            c,
            init.truncation_n,
        )?;
        let state = PlasmaState::new(0.0, init.v.clone(), Some(e0), init.b.clone());
        let recorder = RecorderConfig {
            hs_order: member.hs_order,
            helicity: false,
            ball_m: None,
        };
        let traj = integrate(&state, &member.params, &member.stepper, &recorder)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let sub = out_dir.join(format!("c_{c}"));
        write_run_outputs(&sub, &member, &traj)?;
        if traj.blew_up_at.is_some() {
            bail!("c = {c} run blew up");
        }
        let f = traj.final_state();
        let d = (f.v.sub(&limit.v).l2().powi(2) + f.b.sub(&limit.b).l2().powi(2)).sqrt();
        diffs.push(d);
    }
    let decreasing = diffs.windows(2).all(|w| w[1] < w[0]);
    let checks = vec![
        Check::asserted(
            "difference_strictly_decreasing",
            if decreasing { 1.0 } else { 0.0 },
            1.0,
            decreasing,
            format!("|(v,B)^c - (v,B)| at t = 0.5: {diffs:?}"),
        ),
        Check::upper(
            "final_vs_first_ratio",
            diffs[diffs.len() - 1] / diffs[0],
            0.1,
            "last difference must be < 0.1 x first".into(),
        ),
    ];
    Ok(ScenarioReport::new(
        "E3",
        checks,
        json!({"cs": cs, "diffs": diffs}),
    ))
}

/// E4 — helicity drift vs sigma (d = 3, alpha = 3/2, N = 16): every measured
/// |H(t) - H(0)| must sit below sigma^{-1/2} (t+1) ||(v0,E0,B0)||^2_{L2}; the
/// fitted slope of max-drift against sigma is reported and asserted at
/// -0.5 +/- 0.15.
fn run_e4(base: &ExperimentConfig, out_dir: &Path) -> Result<ScenarioReport> {
    let mut cfg = base.clone();
    cfg.d = 3;
    cfg.n = 16;
    cfg.len = TAU;
    cfg.params = PhysParams {
        nu: 0.1,
        sigma: 10.0,
        c: 1.0,
        kappa: 0.0,
        alpha: 1.5,
        beta: 1.0,
        b_star: [0.0; 3],
        system: SystemKind::Nsm,
    };
    cfg.record_helicity = true;

    let grid = make_grid(3, cfg.n, cfg.len).map_err(|e| anyhow::anyhow!("{e}"))?;
    // Beltrami-plus-noise magnetic data, fixed across the sweep
    let beltrami = crate::initial::named_field(&grid, "beltrami", 1.0)?;
    let mut b0 = beltrami.scaled(1.0);
    b0.add_scaled(0.1, &random_field(&grid, cfg.seed ^ 0xB0, 1.0, 3.0, 1.0, 0.0)?);
    let b0 = leray_project(&b0);
    let v0 = random_field(&grid, cfg.seed ^ 0x70, 1.0, 3.0, 0.3, 0.0)?;
    let e0 = {
        let mut e = random_field(&grid, cfg.seed ^ 0xE0, 1.0, 3.0, 0.3, 0.0)?;
        e.divfree = false;
        e
    };
    let gamma0_sq = v0.l2().powi(2) + e0.l2().powi(2) + b0.l2().powi(2);
    let h0 = helicity(&b0).map_err(|e| anyhow::anyhow!("{e}"))?;

    let sigmas = [10.0, 100.0, 1000.0, 10000.0];
    let t_end = 1.0;
    let mut drifts = Vec::new();
    let mut bound_ok = true;
    for sigma in sigmas {
        let mut member = cfg.clone();
        member.params.sigma = sigma;
        member.stepper = StepperConfig {
            // resolve the sigma c^2 Ohm coupling scale
            dt: (5.0e-3f64).min(2.0 / (sigma * member.params.c.powi(2))),
            cfl: 1.0e9,
            t_end,
            record_every: 1,
            snapshot_every: 0,
        };
        let state = PlasmaState::new(0.0, v0.clone(), Some(e0.clone()), b0.clone());
        let recorder = RecorderConfig {
            hs_order: cfg.hs_order,
            helicity: true,
            ball_m: None,
        };
        let traj = integrate(&state, &member.params, &member.stepper, &recorder)
            .map_err(|e| anyhow::anyhow!("{e}"))?;
        let sub = out_dir.join(format!("sigma_{sigma}"));
        write_run_outputs(&sub, &member, &traj)?;
        if traj.blew_up_at.is_some() {
            bail!("sigma = {sigma} run blew up");
        }
        let mut max_drift: f64 = 0.0;
        for r in &traj.records {
            let drift = (r.helicity - h0).abs();
            max_drift = max_drift.max(drift);
            let bound = sigma.powf(-0.5) * (r.t + 1.0) * gamma0_sq;
            if drift > bound {
                bound_ok = false;
            }
        }
        drifts.push(max_drift);
    }
    let (_, slope) =
        fit_power_law(&sigmas.to_vec(), &drifts).map_err(|e| anyhow::anyhow!("{e}"))?;
    let checks = vec![
        Check::asserted(
            "drift_below_theory_bound",
            if bound_ok { 1.0 } else { 0.0 },
            1.0,
            bound_ok,
            format!("max |H(t) - H(0)| per sigma: {drifts:?}; ||Gamma0||^2 = {gamma0_sq:.6e}"),
        ),
        Check::asserted(
            "drift_slope_in_sigma",
            slope,
            -0.5,
            (slope + 0.5).abs() <= 0.15,
            format!("fitted drift ~ sigma^p, p = {slope:.4}; asserted -0.5 +/- 0.15"),
        ),
    ];
    Ok(ScenarioReport::new(
        "E4",
        checks,
        json!({"sigmas": sigmas, "max_drifts": drifts, "h0": h0, "gamma0_sq": gamma0_sq}),
    ))
}

/// E5 — damped stability around a constant B* (NSM*, alpha = 0, d = 3,
/// N = 16, nu = sigma = c = 1, B* = e3): bootstrap monitor E(t) <= 2 E(0)
/// never trips; ||v||, ||E||, ||j_bar||, ||grad B|| fall below 1e-3 of their
/// initial sizes by t_end = 50; late-time ||B|| relative slope < 1e-4.
fn run_e5(base: &ExperimentConfig, out_dir: &Path) -> Result<ScenarioReport> {
    let mut cfg = base.clone();
    cfg.d = 3;
    cfg.n = 16;
    cfg.len = TAU;
    cfg.params = PhysParams {
        nu: 1.0,
        sigma: 1.0,
        c: 1.0,
        kappa: 0.0,
        alpha: 0.0,
        beta: 1.0,
        b_star: [0.0, 0.0, 1.0],
        system: SystemKind::NsmStar,
    };
    cfg.stepper = StepperConfig {
        dt: 0.05,
        cfl: 1.0e9,
        t_end: 50.0,
        record_every: 4,
        snapshot_every: 0,
    };
    let amplitude = match &cfg.initial {
        InitialSpec::Random { amplitude, .. } => amplitude.min(0.02),
        _ => 0.02,
    };
    cfg.initial = InitialSpec::Random {
        band_lo: 0.0,
        band_hi: 3.0,
        amplitude,
        hs_order: 0.0,
    };

    let (init, traj) = simulate(&cfg)?;
    write_run_outputs(out_dir, &cfg, &traj)?;
    let mut checks = vec![blow_up_check(&traj, out_dir)];

    let e_init = traj.records[0].energy_total;
    let bootstrap_max = traj
        .records
        .iter()
        .map(|r| r.energy_total)
        .fold(0.0f64, f64::max);
    checks.push(Check::upper(
        "bootstrap_energy_monitor",
        bootstrap_max,
        2.0 * e_init,
        "E(t) <= 2 E(0) throughout".into(),
    ));

    let f = traj.final_state();
    let jbar = ohm_current(f, &cfg.params, true).map_err(|e| anyhow::anyhow!("{e}"))?;
    let jbar0 = ohm_current(&init, &cfg.params, true).map_err(|e| anyhow::anyhow!("{e}"))?;
    let grad_b = |s: &PlasmaState| nsm_core::fractional_laplacian(&s.b, 0.5).l2();
    let decay = [
        ("v_decay", f.v.l2(), init.v.l2()),
        (
            "e_decay",
            f.e.as_ref().unwrap().l2(),
            init.e.as_ref().unwrap().l2(),
        ),
        ("jbar_decay", jbar.l2(), jbar0.l2()),
        ("grad_b_decay", grad_b(f), grad_b(&init)),
    ];
    for (name, now, at0) in decay {
        checks.push(Check::upper(
            name,
            now,
            1.0e-3 * at0,
            format!("initial {at0:.6e}"),
        ));
    }

    // late-time ||B|| slope: the curve must flatten, |d||B||/dt| < 1e-4
    // over the last 20% of the run
    let tail_start = 0.8 * cfg.stepper.t_end;
    let tail: Vec<_> = traj.records.iter().filter(|r| r.t >= tail_start).collect();
    let slope = if tail.len() >= 2 {
        let first = tail[0];
        let last = tail[tail.len() - 1];
        ((last.l2_b - first.l2_b) / (last.t - first.t)).abs()
    } else {
        f64::INFINITY
    };
    checks.push(Check::upper(
        "b_late_time_slope",
        slope,
        1.0e-4,
        "|d||B||/dt| over the last 20% of the run".into(),
    ));

    Ok(ScenarioReport::new(
        "E5",
        checks,
        json!({"amplitude": amplitude, "e_init": e_init}),
    ))
}

/// E6 — HMHD* relaxation with kappa in {0, 0.1}: monotone total energy,
/// (v, grad B) decay below 1e-3 of initial, B converges to its mean. The
/// whole-space logarithmic rate is reported as a fit but deliberately not
/// asserted (the torus has a spectral gap, so decay is exponential instead).
fn run_e6(base: &ExperimentConfig, out_dir: &Path) -> Result<ScenarioReport> {
    let mut cfg = base.clone();
    cfg.d = 3;
    cfg.n = 16;
    cfg.len = TAU;
    cfg.params = PhysParams {
        nu: 1.0,
        sigma: 1.0,
        c: 1.0,
        kappa: 0.0,
        alpha: 0.0,
        beta: 1.0,
        b_star: [0.0, 0.0, 1.0],
        system: SystemKind::HmhdStar,
    };
    cfg.stepper = StepperConfig {
        dt: 0.05,
        cfl: 1.0e9,
        t_end: 50.0,
        record_every: 4,
        snapshot_every: 0,
    };
    // concentrated bump data stands in for L^1-small localized data
    cfg.initial = InitialSpec::Named("bump".into());

    let mut checks = Vec::new();
    let mut fits = serde_json::Map::new();
    for kappa in [0.0, 0.1] {
        let mut member = cfg.clone();
        member.params.kappa = kappa;
        let tag = format!("kappa_{kappa}");
        let (init, traj) = simulate(&member)?;
        let sub = out_dir.join(&tag);
        write_run_outputs(&sub, &member, &traj)?;
        checks.push(blow_up_check(&traj, &sub));

        let monotone = traj
            .records
            .windows(2)
            .all(|w| w[1].energy_total <= w[0].energy_total * (1.0 + 1e-12));
        checks.push(Check::asserted(
            &format!("{tag}_energy_monotone"),
            if monotone { 1.0 } else { 0.0 },
            1.0,
            monotone,
            "total energy nonincreasing".into(),
        ));

        let f = traj.final_state();
        let grad_b = |s: &PlasmaState| nsm_core::fractional_laplacian(&s.b, 0.5).l2();
        checks.push(Check::upper(
            &format!("{tag}_v_decay"),
            f.v.l2(),
            1.0e-3 * init.v.l2().max(1e-300),
            format!("initial ||v|| = {:.6e}", init.v.l2()),
        ));
        checks.push(Check::upper(
            &format!("{tag}_grad_b_decay"),
            grad_b(f),
            1.0e-3 * grad_b(&init).max(1e-300),
            format!("initial ||grad B|| = {:.6e}", grad_b(&init)),
        ));
        // B -> its mean: the fluctuating part (B minus the k = 0 mode)
        // must collapse relative to its initial size
        let fluct = |s: &PlasmaState| {
            let mut b = s.b.clone();
            for m in 0..3 {
                b.comp_mut(m)[0] = num_complex::Complex64::new(0.0, 0.0);
            }
            b.l2()
        };
        checks.push(Check::upper(
            &format!("{tag}_b_converges_to_mean"),
            fluct(f),
            1.0e-3 * fluct(&init).max(1e-300),
            format!("initial ||B - mean|| = {:.6e}", fluct(&init)),
        ));

        // reported (unasserted) log-rate fit on ||(v, grad B)||_{L2} tails
        let tail: Vec<_> = traj
            .records
            .iter()
            .filter(|r| r.t >= 1.0 && r.l2_v > 0.0)
            .collect();
        if tail.len() >= 3 {
            let ts: Vec<f64> = tail.iter().map(|r| r.t).collect();
            let ys: Vec<f64> = tail.iter().map(|r| r.l2_v).collect();
            if let Ok((_, p)) = fit_power_law(&ts, &ys) {
                checks.push(Check::reported(
                    &format!("{tag}_v_power_fit"),
                    p,
                    "power-law fit of ||v||(t); not asserted — torus decay is exponential, \
                     the whole-space log rate does not transfer"
                        .into(),
                ));
                fits.insert(tag.clone(), json!(p));
            }
        }
    }
    Ok(ScenarioReport::new(
        "E6",
        checks,
        json!({"power_fits": fits, "note": "log-rate fit reported, not asserted (periodic spectral gap)"}),
    ))
}

/// Calibrate the maximal-regularity constants (C1, C2) on one seed batch:
/// take the worst observed lhs/rhs decomposition ratios and add 10%
/// headroom. Deterministic in (grid, seeds).
pub fn calibrate_maxreg(
    grid: &Arc<nsm_core::Grid>,
    seeds: std::ops::Range<u64>,
    params: &MaxRegParams,
) -> Result<(f64, f64)> {
    let mut worst: f64 = 0.0;
    for seed in seeds {
        let rep = maxreg_sample(grid, seed, params)?;
        // a single scale for both terms keeps calibration one-dimensional:
        // C1 = C2 = C with C = max lhs/(rhs_f + rhs_w0)
        worst = worst.max(rep.lhs / (rep.rhs_f + rep.rhs_w0).max(1e-300));
    }
    let c = worst * 1.1;
    Ok((c, c))
}

fn maxreg_sample(
    grid: &Arc<nsm_core::Grid>,
    seed: u64,
    params: &MaxRegParams,
) -> Result<nsm_core::MaxRegReport> {
    let w0 = random_field(grid, seed, 0.5, 4.0, 1.0, 0.0)?;
    let f = random_field(grid, seed ^ 0xF00D, 0.5, 4.0, 1.0, 0.0)?;
    let forcing = move |_t: f64| f.clone();
    nsm_core::maximal_regularity_ratio(&w0, &forcing, params, 1.0, 64)
        .map_err(|e| anyhow::anyhow!("{e}"))
}

/// E7 — Besov maximal regularity: calibrate (C1, C2) on seeds 0..10, then
/// assert lhs <= C1 rhs_f + C2 rhs_w0 on a fresh 10-run ensemble.
fn run_e7(base: &ExperimentConfig, out_dir: &Path) -> Result<ScenarioReport> {
    let mut cfg = base.clone();
    cfg.d = 2;
    cfg.n = 16;
    cfg.len = TAU;
    let grid = make_grid(cfg.d, cfg.n, cfg.len).map_err(|e| anyhow::anyhow!("{e}"))?;
    let params = MaxRegParams {
        alpha: 1.0,
        nu: 0.5,
        delta0: -0.5,
        m: 2.0,
        r: 2.0,
    };
    let (c1, c2) = calibrate_maxreg(&grid, 0..10, &params)?;
    let mut ratios = Vec::new();
    for seed in 100..110 {
        let rep = maxreg_sample(&grid, seed, &params)?;
        ratios.push(rep.ratio(c1, c2));
    }
    let worst = ratios.iter().cloned().fold(0.0f64, f64::max);
    let checks = vec![Check::upper(
        "maxreg_ensemble_ratio",
        worst,
        1.0,
        format!("C1 = C2 = {c1:.4}; per-seed ratios {ratios:?}"),
    )];
    std::fs::write(
        out_dir.join("constants.txt"),
        format!("c1_maxreg = {c1:.17e}\nc2_maxreg = {c2:.17e}\n"),
    )?;
    Ok(ScenarioReport::new(
        "E7",
        checks,
        json!({"c1": c1, "c2": c2, "ratios": ratios}),
    ))
}

/// E8 — Maxwell a-priori bound with explicit constant 2:
/// sup_t ||(E,B)(t)||^2_{H^s} <= 2 ||(E0,B0)||^2_{H^s}
/// + 2 c^2 (int ||j||_{H^s} dt)^2, over 20 seeded runs of the Maxwell
/// subsystem with a prescribed velocity.
fn run_e8(base: &ExperimentConfig, out_dir: &Path) -> Result<ScenarioReport> {
    let mut cfg = base.clone();
    cfg.d = 2;
    cfg.n = 16;
    cfg.len = TAU;
    cfg.params = PhysParams {
        nu: 0.0,
        sigma: 1.0,
        c: 2.0,
        kappa: 0.0,
        alpha: 1.0,
        beta: 1.0,
        b_star: [0.0; 3],
        system: SystemKind::Maxwell,
    };
    cfg.stepper = StepperConfig {
        dt: 5.0e-3,
        cfl: 1.0e9,
        t_end: 1.0,
        record_every: 1,
        snapshot_every: 0,
    };
    let s = 1.0;
    let grid = make_grid(cfg.d, cfg.n, cfg.len).map_err(|e| anyhow::anyhow!("{e}"))?;
    let v = random_field(&grid, 0xFEED, 0.5, 3.0, 0.5, 0.0)?;

    let mut worst_ratio: f64 = 0.0;
    let mut violations = 0usize;
    let mut ratios = Vec::new();
    for seed in 0..20u64 {
        let e0 = {
            let mut e = random_field(&grid, 0x8000 + seed, 0.5, 4.0, 1.0, 0.0)?;
            e.divfree = false;
            e
        };
        let b0 = random_field(&grid, 0x9000 + seed, 0.5, 4.0, 1.0, 0.0)?;
        let state = PlasmaState::new(0.0, v.clone(), Some(e0.clone()), b0.clone());
        if seed == 0 {
            let recorder = RecorderConfig {
                hs_order: s,
                helicity: false,
                ball_m: None,
            };
            let traj = integrate(&state, &cfg.params, &cfg.stepper, &recorder)
                .map_err(|e| anyhow::anyhow!("{e}"))?;
            if traj.blew_up_at.is_some() {
                bail!("E8 seed {seed} blew up");
            }
            write_run_outputs(&out_dir.join("seed_0"), &cfg, &traj)?;
        }
        let init_sq = hs_norm(&e0, s).powi(2) + hs_norm(&b0, s).powi(2);

        // manual stepping pass: the bound needs ||j||_{H^s} at every step to
        // build the L^1-in-time factor, which sparse snapshots cannot supply
        let mut ts = Vec::new();
        let mut js = Vec::new();
        let mut st = state.clone();
        nsm_core::enforce_constraints(&mut st);
        let nsteps = (cfg.stepper.t_end / cfg.stepper.dt).round() as usize;
        let dt = cfg.stepper.t_end / nsteps as f64;
        let mut sup_sq = hs_norm(st.e.as_ref().unwrap(), s).powi(2) + hs_norm(&st.b, s).powi(2);
        ts.push(0.0);
        js.push(hs_norm(
            &ohm_current(&st, &cfg.params, false).map_err(|e| anyhow::anyhow!("{e}"))?,
            s,
        ));
        for i in 1..=nsteps {
            st = nsm_core::step(&st, &cfg.params, dt).map_err(|e| anyhow::anyhow!("{e}"))?;
            st.t = i as f64 * dt;
            ts.push(st.t);
            js.push(hs_norm(
                &ohm_current(&st, &cfg.params, false).map_err(|e| anyhow::anyhow!("{e}"))?,
                s,
            ));
            let now_sq =
                hs_norm(st.e.as_ref().unwrap(), s).powi(2) + hs_norm(&st.b, s).powi(2);
            sup_sq = sup_sq.max(now_sq);
            let j_l1 = integrate_samples(&ts, &js);
            let bound = 2.0 * init_sq + 2.0 * cfg.params.c.powi(2) * j_l1.powi(2);
            let ratio = sup_sq / bound.max(1e-300);
            worst_ratio = worst_ratio.max(ratio);
            if ratio > 1.0 {
                violations += 1;
            }
        }
        let j_l1 = integrate_samples(&ts, &js);
        let bound = 2.0 * init_sq + 2.0 * cfg.params.c.powi(2) * j_l1.powi(2);
        ratios.push(sup_sq / bound.max(1e-300));
    }
    let checks = vec![
        Check::asserted(
            "maxwell_lemma_violations",
            violations as f64,
            0.0,
            violations == 0,
            "checked at every recorded time over 20 seeds".into(),
        ),
        Check::upper(
            "maxwell_lemma_worst_ratio",
            worst_ratio,
            1.0,
            format!("per-seed final ratios {ratios:?}"),
        ),
    ];
    Ok(ScenarioReport::new(
        "E8",
        checks,
        json!({"worst_ratio": worst_ratio, "ratios": ratios, "s": s}),
    ))
}
