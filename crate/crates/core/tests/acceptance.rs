//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line
//! (visible with `--nocapture`). Tolerances are pinned here as constants.
//!
//! Run with:
//!   cargo test -p onsflux --test acceptance -- --nocapture --test-threads=1

use onsflux::flux::{
    balance_flux, density_mechanism, flux_cet, flux_dr, sweep, trilinear_cet, trilinear_dr,
    FitWindow, FluxVariant,
};
use onsflux::grid::{lp_norm, sample_function};
use onsflux::kernels::{mollify, mollify_spectral, DiscreteKernel, KernelProfile};
use onsflux::norms::bmo_commutator_ratio;
use onsflux::pressure::solution_check;
use onsflux::synth::{
    burgers_shock, random_fourier_field, shear_layer, taylor_green, weierstrass_field,
};
use onsflux::traces::{
    bd_jump_formula_check, jump_residuals, Interface, TraceData, TraceOptions,
};
use onsflux::util::fit_loglog;
use std::f64::consts::PI;

/// Standard resolution for the acceptance runs.
const N: usize = 256;

/// Smooth-field sweep slopes must be at least this (second-order vanishing).
const SMOOTH_SLOPE_FLOOR: f64 = 1.9;
/// Fit quality floor for the smooth sweeps.
const SMOOTH_R2_FLOOR: f64 = 0.98;
/// Window around the predicted rough-field exponents 3 theta - 1.
const ROUGH_SLOPE_TOL: f64 = 0.25;
/// Relative window on the step-profile flux mass (2.0 per interface).
const SHOCK_MASS_TOL: f64 = 0.04;
/// Relative agreement between the two kernel profiles at ell = 8h.
const KERNEL_AGREEMENT_TOL: f64 = 0.05;
/// Max-norm bound certifying the sheet parity cancellation.
const SHEET_DR_CEIL: f64 = 1e-13;
/// Below this, a distributional pairing counts as machine zero.
const PAIRING_MACHINE_ZERO: f64 = 1e-10;
/// Pairing decay slope when the pairing is not machine zero.
const PAIRING_SLOPE_FLOOR: f64 = 0.9;
/// Exact-zero budget for the sheet jump aggregates.
const SHEET_JUMP_CEIL: f64 = 1e-10;
/// Window on the shock surface-dissipation density (1.0 per unit length).
const SHOCK_DSIGMA_TOL: f64 = 0.02;
/// Window on the deformation tube-mass ratio at eps = 4h.
const BD_RATIO_TOL: f64 = 0.10;
/// Exactness budget for the trilinear telescoping identity.
const TELESCOPING_CEIL: f64 = 1e-12;
/// Ceiling on max/median of the commutator ratios per field pair.
const COMMUTATOR_SPREAD_CEIL: f64 = 10.0;
/// Relative agreement of the two mollification routes on 32^2 grids.
const MOLLIFY_EQUIV_TOL: f64 = 1e-10;
/// Relative agreement of the trilinear diagonal collapse.
const COLLAPSE_TOL: f64 = 1e-13;

fn h() -> f64 {
    1.0 / N as f64
}

fn cells(list: &[f64]) -> Vec<f64> {
    list.iter().map(|c| c * h()).collect()
}

fn report(name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("{tag} {name}: {detail}");
    assert!(pass, "{name}: {detail}");
}

#[test]
fn criterion_01_smooth_conservation() {
    let (u, p) = taylor_green(N, 1.0).unwrap();
    let result = sweep(
        &u,
        Some(&p),
        KernelProfile::Bump,
        &cells(&[4.0, 8.0, 16.0, 32.0]),
        FitWindow::all(),
    )
    .unwrap();
    let dr = result.fit_dr.unwrap();
    let cet = result.fit_cet.unwrap();
    let pass = dr.slope >= SMOOTH_SLOPE_FLOOR
        && cet.slope >= SMOOTH_SLOPE_FLOOR
        && dr.r2 >= SMOOTH_R2_FLOOR
        && cet.r2 >= SMOOTH_R2_FLOOR
        && !result.nonsolution;
    report(
        "criterion 1 (smooth conservation)",
        pass,
        &format!(
            "slope_dr={:.3} (r2={:.4}), slope_cet={:.3} (r2={:.4}), floors {SMOOTH_SLOPE_FLOOR}/{SMOOTH_R2_FLOOR}",
            dr.slope, dr.r2, cet.slope, cet.r2
        ),
    );
}

#[test]
fn criterion_02_critical_scaling() {
    let thetas = [0.2, 1.0 / 3.0, 0.5];
    let scales = cells(&[4.0, 8.0, 16.0, 32.0, 64.0]);
    let mut slopes = Vec::new();
    for &theta in &thetas {
        let u = weierstrass_field(theta, 6, 7, N, 1.0).unwrap();
        let result = sweep(&u, None, KernelProfile::Bump, &scales, FitWindow::all()).unwrap();
        slopes.push(result.fit_dr.unwrap().slope);
    }
    let mut pass = slopes[0] < slopes[1] && slopes[1] < slopes[2];
    let mut detail = String::new();
    for (i, &theta) in thetas.iter().enumerate() {
        let target = 3.0 * theta - 1.0;
        let ok = (slopes[i] - target).abs() <= ROUGH_SLOPE_TOL;
        pass &= ok;
        detail.push_str(&format!(
            "theta={theta:.3}: slope={:+.3} target={target:+.3}; ",
            slopes[i]
        ));
    }
    detail.push_str(&format!("monotone={}", slopes[0] < slopes[1] && slopes[1] < slopes[2]));
    report("criterion 2 (critical scaling)", pass, &detail);
}

#[test]
fn criterion_03_persistent_dissipation_and_kernel_independence() {
    let (u, entropic) = burgers_shock(1.0, -1.0, 0.0, N, 1.0).unwrap();
    assert!(entropic);
    let mut masses = std::collections::HashMap::new();
    let mut pass = true;
    let mut detail = String::new();
    for profile in [KernelProfile::Bump, KernelProfile::Quartic] {
        for ell_cells in [4.0, 8.0, 16.0] {
            let kernel = DiscreteKernel::build(profile, ell_cells * h(), &u).unwrap();
            // two mirrored interfaces carry the whole flux mass; per-interface
            // mass is half the L1 (the signed total vanishes because the seam
            // jump is the expansion partner of the entropic one)
            let per_interface = flux_dr(&u, &kernel).unwrap().l1() / 2.0;
            masses.insert((profile.name(), ell_cells as i64), per_interface);
            let ok = (per_interface - 2.0).abs() <= 2.0 * SHOCK_MASS_TOL;
            pass &= ok;
            detail.push_str(&format!(
                "{}@{}h={:.4}; ",
                profile.name(),
                ell_cells,
                per_interface
            ));
        }
    }
    let bump8 = masses[&("bump", 8)];
    let quartic8 = masses[&("quartic", 8)];
    let agreement = (bump8 - quartic8).abs() / bump8;
    pass &= agreement <= KERNEL_AGREEMENT_TOL;
    detail.push_str(&format!("kernel gap@8h={:.2}%", 100.0 * agreement));
    report(
        "criterion 3 (persistent dissipation, kernel independence)",
        pass,
        &detail,
    );
}

#[test]
fn criterion_04_sheet_parity_conservation() {
    let (u, _) = shear_layer(1.0, -1.0, 0.0, N, 1.0).unwrap();
    let phi = sample_function(1, &[N, N], &[1.0, 1.0], |x, out| {
        out[0] = (2.0 * PI * x[1]).cos() + 0.5 * (2.0 * PI * x[0]).sin();
    })
    .unwrap();
    let scale_cells = [4.0, 8.0, 16.0, 32.0];
    let mut dr_linf_max: f64 = 0.0;
    let mut pairings = Vec::new();
    for &c in &scale_cells {
        let kernel = DiscreteKernel::build(KernelProfile::Bump, c * h(), &u).unwrap();
        let dr = flux_dr(&u, &kernel).unwrap();
        dr_linf_max = dr_linf_max.max(lp_norm(&dr.values, f64::INFINITY).unwrap());
        let cet = flux_cet(&u, &kernel).unwrap();
        pairings.push(cet.pair_with(&phi).unwrap().abs());
    }
    let parity_ok = dr_linf_max <= SHEET_DR_CEIL;
    let sup_pairing = pairings.iter().cloned().fold(0.0, f64::max);
    // the filtered-stress flux of an axis-aligned sheet vanishes identically
    // (the stress and the filtered gradient occupy disjoint entries), so the
    // pairing is accepted either by decay slope or as machine zero
    let (pairing_ok, branch) = if sup_pairing <= PAIRING_MACHINE_ZERO {
        (true, format!("machine zero (sup {sup_pairing:.1e})"))
    } else {
        let scales = cells(&scale_cells);
        match fit_loglog(&scales, &pairings) {
            Some(fit) if fit.slope >= PAIRING_SLOPE_FLOOR => {
                (true, format!("decay slope {:.2}", fit.slope))
            }
            Some(fit) => (false, format!("decay slope {:.2} < {PAIRING_SLOPE_FLOOR}", fit.slope)),
            None => (false, "unfittable pairing sequence".into()),
        }
    };
    report(
        "criterion 4 (sheet parity conservation)",
        parity_ok && pairing_ok,
        &format!("DR max-norm={dr_linf_max:.2e} (ceil {SHEET_DR_CEIL:.0e}); CET pairing: {branch}"),
    );
}

#[test]
fn criterion_05_jump_condition_chain() {
    let radii = cells(&[4.0, 2.0]);
    let opts = TraceOptions::default();

    // vortex sheet: every leg of the chain holds exactly
    let (u, p) = shear_layer(1.0, -1.0, 0.0, N, 1.0).unwrap();
    let iface = Interface::new(&[0.0, 1.0], 0.5, 0.0).unwrap();
    let sheet = jump_residuals(
        &TraceData::Snapshot(&u),
        &TraceData::Snapshot(&p),
        &iface,
        &radii,
        &opts,
    )
    .unwrap();
    let sheet_ok = sheet.aggregates.r_inc_l1 <= SHEET_JUMP_CEIL
        && sheet.aggregates.r_p_l1 <= SHEET_JUMP_CEIL
        && sheet.aggregates.d_sigma_l1 <= SHEET_JUMP_CEIL;

    // compressible contrast: the incompressibility leg fails loudly
    let (u, _) = burgers_shock(1.0, -1.0, 0.0, N, 1.0).unwrap();
    let p0 = onsflux::GridField::zeros(1, u.shape(), u.lengths()).unwrap();
    let iface = Interface::new(&[1.0, 0.0], 0.5, 0.0).unwrap();
    let shock = jump_residuals(
        &TraceData::Snapshot(&u),
        &TraceData::Snapshot(&p0),
        &iface,
        &radii,
        &opts,
    )
    .unwrap();
    let r_inc_ok = shock.aggregates.r_inc_l1 >= 1.0;
    let dsigma_per_len = shock.aggregates.d_sigma_l1 / shock.aggregates.length;
    let dsigma_ok = (dsigma_per_len - 1.0).abs() <= SHOCK_DSIGMA_TOL;
    let flagged = solution_check(&u, Some(&p0)).unwrap().nonsolution;

    // documented discrepancy: the increment-form mass per interface is 2.0
    // while the balance-form surface density integrates to 1.0 (the field is
    // not an Euler solution, so the two need not agree)
    let kernel = DiscreteKernel::build(KernelProfile::Bump, 8.0 * h(), &u).unwrap();
    let dr_mass = flux_dr(&u, &kernel).unwrap().l1() / 2.0;
    let discrepancy_ok = (dr_mass - 2.0).abs() <= 2.0 * SHOCK_MASS_TOL
        && (dr_mass / dsigma_per_len - 2.0).abs() <= 0.2;

    report(
        "criterion 5 (jump-condition chain)",
        sheet_ok && r_inc_ok && dsigma_ok && flagged && discrepancy_ok,
        &format!(
            "sheet aggregates (r_inc, r_p, |D|)=({:.1e}, {:.1e}, {:.1e}); shock r_inc={:.3}, |D_sigma|/len={:.4}, nonsolution={}, DR-vs-balance {:.3} vs {:.3}",
            sheet.aggregates.r_inc_l1,
            sheet.aggregates.r_p_l1,
            sheet.aggregates.d_sigma_l1,
            shock.aggregates.r_inc_l1,
            dsigma_per_len,
            flagged,
            dr_mass,
            dsigma_per_len
        ),
    );
}

#[test]
fn criterion_06_bd_jump_formula() {
    let (u, _) = shear_layer(1.0, -1.0, 0.0, N, 1.0).unwrap();
    // the sharp transition physically sits half a cell past 0.5
    let iface = Interface::new(&[0.0, 1.0], 0.5 + h() / 2.0, 0.0).unwrap();
    let rep = bd_jump_formula_check(
        &u,
        &iface,
        &[4.0 * h()],
        KernelProfile::Bump,
        &TraceOptions::default(),
    )
    .unwrap();
    let ratio = rep.ratios[0];
    let pass = (ratio - 1.0).abs() <= BD_RATIO_TOL;
    report(
        "criterion 6 (deformation jump formula)",
        pass,
        &format!(
            "tube/jump ratio={ratio:.4} at eps=4h (jump integral {:.4})",
            rep.jump_integral
        ),
    );
}

#[test]
fn criterion_07_density_mechanism() {
    let u = weierstrass_field(0.4, 6, 7, N, 1.0).unwrap();
    let deltas = cells(&[32.0, 16.0, 8.0]);
    let ells = cells(&[16.0, 8.0, 4.0]);
    let rep = density_mechanism(&u, KernelProfile::Bump, &deltas, &ells, FluxVariant::Dr).unwrap();
    let telescoping_ok = rep.telescoping_linf <= TELESCOPING_CEIL;

    // smooth leg decreases with the flux scale for every smoothing scale
    let mut smooth_ok = true;
    for &delta in &deltas {
        let col: Vec<f64> = rep
            .rows
            .iter()
            .filter(|r| r.delta == delta)
            .map(|r| r.t_smooth_leg)
            .collect();
        smooth_ok &= col.windows(2).all(|w| w[1] < w[0]);
    }

    // remainder at the smallest flux scale shrinks as the splitting sharpens
    let ell_min = *ells.last().unwrap();
    let rem: Vec<f64> = rep
        .rows
        .iter()
        .filter(|r| r.ell == ell_min)
        .map(|r| r.t_remainder)
        .collect();
    let remainder_ok = rem.windows(2).all(|w| w[1] < w[0]);

    report(
        "criterion 7 (density mechanism)",
        telescoping_ok && smooth_ok && remainder_ok,
        &format!(
            "telescoping={:.1e} (ceil {TELESCOPING_CEIL:.0e}), smooth leg decreasing in ell: {smooth_ok}, remainder at ell_min decreasing in delta: {rem:?}",
            rep.telescoping_linf
        ),
    );
}

#[test]
fn criterion_08_oscillation_deformation_bound() {
    let scales = cells(&[4.0, 8.0, 12.0, 16.0, 24.0]);
    let (tg, _) = taylor_green(N, 1.0).unwrap();
    let (smooth_shear, _) = shear_layer(1.0, -1.0, 16.0 * h(), N, 1.0).unwrap();
    let (sheet, _) = shear_layer(1.0, -1.0, 0.0, N, 1.0).unwrap();
    let weier = weierstrass_field(0.4, 6, 7, N, 1.0).unwrap();
    let rf = random_fourier_field(1.0 / 3.0, 11, N, 1.0).unwrap();
    let pairs: [(&str, &onsflux::GridField, &onsflux::GridField); 3] = [
        ("weier/taylor-green", &weier, &tg),
        ("sheet/taylor-green", &sheet, &tg),
        ("random-fourier/shear", &rf, &smooth_shear),
    ];
    let mut pass = true;
    let mut detail = String::new();
    for (name, v, u) in pairs {
        let rep = bmo_commutator_ratio(v, u, KernelProfile::Bump, &scales).unwrap();
        let mut vals = rep.series[0].values.clone();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = vals[vals.len() / 2];
        let spread = rep.value / median;
        pass &= spread <= COMMUTATOR_SPREAD_CEIL;
        detail.push_str(&format!("{name}: max/median={spread:.2}; "));
    }
    report("criterion 8 (oscillation x deformation bound)", pass, &detail);
}

#[test]
fn criterion_09_oracle_equivalences() {
    // two mollification routes on a 32^2 grid
    let u = sample_function(2, &[32, 32], &[1.0, 1.0], |x, out| {
        out[0] = (2.0 * PI * x[0]).sin() + 0.5 * (4.0 * PI * (x[0] + x[1])).cos();
        out[1] = (2.0 * PI * x[1]).cos() - 0.25 * (4.0 * PI * x[0]).sin();
    })
    .unwrap();
    let mut mollify_gap_rel: f64 = 0.0;
    for profile in [KernelProfile::Bump, KernelProfile::Quartic] {
        let kernel = DiscreteKernel::build(profile, 4.0 / 32.0, &u).unwrap();
        let direct = mollify(&u, &kernel).unwrap();
        let spectral = mollify_spectral(&u, &kernel).unwrap();
        let gap = direct
            .data()
            .iter()
            .zip(spectral.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        mollify_gap_rel = mollify_gap_rel.max(gap / lp_norm(&u, f64::INFINITY).unwrap());
    }
    let mollify_ok = mollify_gap_rel <= MOLLIFY_EQUIV_TOL;

    // trilinear diagonal collapse
    let kernel = DiscreteKernel::build(KernelProfile::Bump, 4.0 / 32.0, &u).unwrap();
    let dr_direct = flux_dr(&u, &kernel).unwrap();
    let dr_tri = trilinear_dr(&u, &u, &u, &kernel).unwrap();
    let cet_direct = flux_cet(&u, &kernel).unwrap();
    let cet_tri = trilinear_cet(&u, &u, &u, &kernel).unwrap();
    let scale_dr = lp_norm(&dr_direct.values, f64::INFINITY).unwrap().max(1e-30);
    let scale_cet = lp_norm(&cet_direct.values, f64::INFINITY).unwrap().max(1e-30);
    let collapse_dr = dr_direct
        .values
        .data()
        .iter()
        .zip(dr_tri.values.data())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale_dr;
    let collapse_cet = cet_direct
        .values
        .data()
        .iter()
        .zip(cet_tri.values.data())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
        / scale_cet;
    let collapse_ok = collapse_dr <= COLLAPSE_TOL && collapse_cet <= COLLAPSE_TOL;

    // bitwise serialization round trip
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("roundtrip.onsf");
    onsflux::onsf::write_field(&path, &u).unwrap();
    let back = onsflux::onsf::read_field(&path).unwrap();
    let roundtrip_ok = u.shape() == back.shape()
        && u.lengths() == back.lengths()
        && u.data()
            .iter()
            .zip(back.data())
            .all(|(a, b)| a.to_bits() == b.to_bits());

    report(
        "criterion 9 (oracle equivalences)",
        mollify_ok && collapse_ok && roundtrip_ok,
        &format!(
            "mollify gap={mollify_gap_rel:.1e} (tol {MOLLIFY_EQUIV_TOL:.0e}); collapse dr={collapse_dr:.1e} cet={collapse_cet:.1e} (tol {COLLAPSE_TOL:.0e}); roundtrip bitwise={roundtrip_ok}"
        ),
    );
}

#[test]
fn criterion_10_scope_statement() {
    // The measure-theoretic conclusions (a dissipation measure giving zero
    // mass to every countably rectifiable set) are not verifiable at grid
    // scale; criteria 4-6 are their designated finite-resolution surrogates
    // and the project documentation must say so.
    let readme = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/../../README.md"
    ))
    .expect("README.md at the workspace root");
    let documented = readme.contains("finite-resolution surrogate");
    report(
        "criterion 10 (scope statement)",
        documented,
        "README documents criteria 4-6 as finite-resolution surrogates of the measure-theoretic statements",
    );
}

#[test]
fn criterion_05b_balance_flux_consistency_for_exact_solutions() {
    // supporting check for the chain: for exact steady solutions the
    // balance-form flux vanishes at spectral accuracy alongside the sweeps
    let (u, p) = taylor_green(N, 1.0).unwrap();
    let linf = lp_norm(&balance_flux(&u, &p).unwrap().values, f64::INFINITY).unwrap();
    report(
        "criterion 5 supplement (balance flux of exact solutions)",
        linf <= 1e-7,
        &format!("balance-flux max-norm={linf:.2e}"),
    );
}
