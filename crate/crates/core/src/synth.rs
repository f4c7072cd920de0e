//! Synthetic velocity/pressure fields: smooth exact solutions, sheet and
//! shock profiles, and rough fields with prescribed increment scaling.
//!
//! Sheet and shock profiles are periodized with a mirrored second transition
//! at the domain seam, so every generated field is genuinely periodic; reports
//! downstream account for both interfaces. Sharp (w = 0) profiles hold the
//! midpoint value at nodes that land exactly on a transition.

use crate::error::{Error, Result};
use crate::grid::{sample_function, GridField};
use crate::spectral::SpectralField;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::f64::consts::PI;

/// Smooth monotone ramp: 0 for t <= 0, 1 for t >= 1.
fn smoothstep(t: f64) -> f64 {
    fn f(t: f64) -> f64 {
        if t <= 0.0 {
            0.0
        } else {
            (-1.0 / t).exp()
        }
    }
    let a = f(t);
    let b = f(1.0 - t);
    a / (a + b)
}

/// Periodic two-level profile on [0, L): value `lo` on the first half-box,
/// `hi` on the second, transitions of width `w`. Smooth ramps (w > 0) are
/// centered at 0 and L/2 and hold the midpoint value there. Sharp
/// transitions (w = 0) sit at the half-cell positions half_cell and
/// L/2 + half_cell, so no lattice node ever lies on a jump: node values are
/// purely one state or the other and trace and mass diagnostics see the
/// clean step.
fn two_level_profile(x: f64, l: f64, w: f64, lo: f64, hi: f64, half_cell: f64) -> f64 {
    let x = x.rem_euclid(l);
    if w == 0.0 {
        return if x > half_cell && x < l / 2.0 + half_cell {
            lo
        } else {
            hi
        };
    }
    let g = smoothstep((x - l / 2.0 + w / 2.0) / w) - smoothstep((x - l + w / 2.0) / w)
        - smoothstep((x + w / 2.0) / w)
        + 1.0;
    lo + (hi - lo) * g
}

/// Steady Taylor-Green vortex on the square box [0, l)^2:
/// u = (sin(a x1) cos(a x2), -cos(a x1) sin(a x2)) with a = 2 pi / l and the
/// matching pressure p = (cos(2 a x1) + cos(2 a x2)) / 4, a zero-mean exact
/// steady Euler pair.
pub fn taylor_green(n: usize, l: f64) -> Result<(GridField, GridField)> {
    let a = 2.0 * PI / l;
    let u = sample_function(2, &[n, n], &[l, l], |x, out| {
        out[0] = (a * x[0]).sin() * (a * x[1]).cos();
        out[1] = -(a * x[0]).cos() * (a * x[1]).sin();
    })?;
    let p = sample_function(1, &[n, n], &[l, l], |x, out| {
        out[0] = ((2.0 * a * x[0]).cos() + (2.0 * a * x[1]).cos()) / 4.0;
    })?;
    Ok((u, p))
}

/// Planar shear layer (vortex sheet for w = 0): u = (phi(x2), 0) with phi
/// transitioning from `a` to `b` across x2 = L/2 over width `w`, mirrored at
/// the seam; p = 0. Every such pair is an exact steady Euler solution.
/// Sharp transitions sit half a cell past L/2 and the seam (see
/// [`two_level_profile`]), so adjacent node rows carry the full jump.
pub fn shear_layer(a: f64, b: f64, w: f64, n: usize, l: f64) -> Result<(GridField, GridField)> {
    if w < 0.0 || w >= l / 4.0 {
        return Err(Error::InvalidParameter(format!(
            "layer width {w} must satisfy 0 <= w < L/4 = {}",
            l / 4.0
        )));
    }
    let h = l / n as f64;
    let u = sample_function(2, &[n, n], &[l, l], |x, out| {
        out[0] = two_level_profile(x[1], l, w, a, b, h / 2.0);
        out[1] = 0.0;
    })?;
    let p = GridField::zeros(1, &[n, n], &[l, l])?;
    Ok((u, p))
}

/// Burgers-type shock profile embedded in 2D: u = (psi(x1), 0) stepping from
/// `u_l` to `u_r` across x1 = L/2 over width `w`, mirrored at the seam (sharp
/// steps half a cell past those positions). Not divergence-free at the
/// transitions: the compressible contrast case. Returns the field and
/// whether the jump is entropic (u_l > u_r).
pub fn burgers_shock(u_l: f64, u_r: f64, w: f64, n: usize, l: f64) -> Result<(GridField, bool)> {
    if w < 0.0 || w >= l / 4.0 {
        return Err(Error::InvalidParameter(format!(
            "shock width {w} must satisfy 0 <= w < L/4 = {}",
            l / 4.0
        )));
    }
    let h = l / n as f64;
    let u = sample_function(2, &[n, n], &[l, l], |x, out| {
        out[0] = two_level_profile(x[0], l, w, u_l, u_r, h / 2.0);
        out[1] = 0.0;
    })?;
    Ok((u, u_l > u_r))
}

/// Lacunary cosine series with Hoelder exponent `theta`:
/// u1(x) = sum_{j=0}^{modes} 2^{-j theta} cos(2 pi 2^j x1 / L + phi_j), u2 = 0,
/// with seeded phases. Increments along e1 scale like ell^theta and do not
/// cancel, which is what the flux-magnitude diagnostics need.
pub fn weierstrass_field(
    theta: f64,
    modes: u32,
    seed: u64,
    n: usize,
    l: f64,
) -> Result<GridField> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Hoelder exponent {theta} must lie in (0, 1)"
        )));
    }
    if 1usize << modes > n / 4 {
        return Err(Error::InvalidParameter(format!(
            "top mode 2^{modes} unresolved on {n} points (need 2^modes <= n/4)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phases: Vec<f64> = (0..=modes)
        .map(|_| rng.random::<f64>() * 2.0 * PI)
        .collect();
    sample_function(2, &[n, n], &[l, l], |x, out| {
        let mut s = 0.0;
        for (j, phi) in phases.iter().enumerate() {
            let freq = (1u64 << j) as f64;
            s += 2.0f64.powf(-(j as f64) * theta) * (2.0 * PI * freq * x[0] / l + phi).cos();
        }
        out[0] = s;
        out[1] = 0.0;
    })
}

/// Divergence-free random field with spectrum |u_hat(k)| ~ |k|^(-theta - d/2),
/// built from a seeded random-phase streamfunction (hence solenoidal and
/// Hermitian-symmetric by construction), mean zero, normalized to unit L2.
pub fn random_fourier_field(theta: f64, seed: u64, n: usize, l: f64) -> Result<GridField> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Hoelder exponent {theta} must lie in (0, 1)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let template = GridField::zeros(2, &[n, n], &[l, l])?;
    let mut hat = SpectralField::forward(&template);
    let half = (n / 2) as i64;
    let signed = |i: usize| -> i64 {
        if i as i64 <= half {
            i as i64
        } else {
            i as i64 - n as i64
        }
    };
    for i1 in 0..n {
        for i2 in 0..n {
            let q1 = signed(i1);
            let q2 = signed(i2);
            // skip the mean and the unpaired Nyquist rows
            if (q1 == 0 && q2 == 0) || q1.abs() == half || q2.abs() == half {
                continue;
            }
            // draw once per conjugate pair, in a fixed traversal order
            let canonical = q1 > 0 || (q1 == 0 && q2 > 0);
            if !canonical {
                continue;
            }
            let phase = rng.random::<f64>() * 2.0 * PI;
            let k1 = 2.0 * PI * q1 as f64 / l;
            let k2 = 2.0 * PI * q2 as f64 / l;
            let kmag = (k1 * k1 + k2 * k2).sqrt();
            // streamfunction amplitude |k|^(-theta - d/2 - 1) gives the
            // velocity |k| * |psi_hat| ~ |k|^(-theta - d/2)
            let amp = kmag.powf(-(theta + 2.0));
            let psi = Complex64::from_polar(amp, phase);
            // u = curl(psi): u1_hat = -i k2 psi_hat, u2_hat = i k1 psi_hat
            let iunit = Complex64::new(0.0, 1.0);
            let u1 = -iunit * k2 * psi;
            let u2 = iunit * k1 * psi;
            let node = i1 * n + i2;
            hat.coeffs_mut()[node * 2] = u1;
            hat.coeffs_mut()[node * 2 + 1] = u2;
            // conjugate partner
            let j1 = (-q1).rem_euclid(n as i64) as usize;
            let j2 = (-q2).rem_euclid(n as i64) as usize;
            let conj_node = j1 * n + j2;
            hat.coeffs_mut()[conj_node * 2] = u1.conj();
            hat.coeffs_mut()[conj_node * 2 + 1] = u2.conj();
        }
    }
    let u = hat.inverse();
    let norm = crate::grid::lp_norm(&u, 2.0)?;
    if norm == 0.0 {
        return Err(Error::InvalidParameter("degenerate spectrum".into()));
    }
    Ok(u.scale(1.0 / norm))
}

/// Declarative description of a synthetic field, used by the CLI and for
/// provenance records.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldSpec {
    TaylorGreen {
        n: usize,
        l: f64,
    },
    ShearLayer {
        a: f64,
        b: f64,
        w: f64,
        n: usize,
        l: f64,
    },
    Weierstrass {
        theta: f64,
        modes: u32,
        seed: u64,
        n: usize,
        l: f64,
    },
    RandomFourier {
        theta: f64,
        seed: u64,
        n: usize,
        l: f64,
    },
    BurgersShock {
        u_l: f64,
        u_r: f64,
        w: f64,
        n: usize,
        l: f64,
    },
}

/// A generated field with its pressure (when the generator defines one).
pub struct Generated {
    pub u: GridField,
    pub p: Option<GridField>,
    /// entropic orientation of the jump, for shock profiles
    pub entropic: Option<bool>,
}

impl FieldSpec {
    pub fn generate(&self) -> Result<Generated> {
        match *self {
            FieldSpec::TaylorGreen { n, l } => {
                let (u, p) = taylor_green(n, l)?;
                Ok(Generated {
                    u,
                    p: Some(p),
                    entropic: None,
                })
            }
            FieldSpec::ShearLayer { a, b, w, n, l } => {
                let (u, p) = shear_layer(a, b, w, n, l)?;
                Ok(Generated {
                    u,
                    p: Some(p),
                    entropic: None,
                })
            }
            FieldSpec::Weierstrass {
                theta,
                modes,
                seed,
                n,
                l,
            } => Ok(Generated {
                u: weierstrass_field(theta, modes, seed, n, l)?,
                p: None,
                entropic: None,
            }),
            FieldSpec::RandomFourier { theta, seed, n, l } => Ok(Generated {
                u: random_fourier_field(theta, seed, n, l)?,
                p: None,
                entropic: None,
            }),
            FieldSpec::BurgersShock { u_l, u_r, w, n, l } => {
                let (u, entropic) = burgers_shock(u_l, u_r, w, n, l)?;
                Ok(Generated {
                    u,
                    p: None,
                    entropic: Some(entropic),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::lp_norm;
    use crate::pressure::{momentum_residual, solution_check};
    use crate::spectral::divergence;

    #[test]
    fn taylor_green_is_divergence_free() {
        let (u, _) = taylor_green(64, 1.0).unwrap();
        let div = divergence(&u).unwrap();
        assert!(lp_norm(&div, f64::INFINITY).unwrap() < 1e-10);
    }

    #[test]
    fn taylor_green_momentum_residual_is_spectral() {
        let (u, p) = taylor_green(64, 1.0).unwrap();
        let r = momentum_residual(&u, &p).unwrap();
        assert!(lp_norm(&r, f64::INFINITY).unwrap() < 1e-8);
    }

    #[test]
    fn taylor_green_has_zero_mean() {
        let (u, _) = taylor_green(32, 1.0).unwrap();
        let mean = u.mean();
        assert!(mean[0].abs() < 1e-14 && mean[1].abs() < 1e-14);
    }

    #[test]
    fn sharp_shear_layer_has_two_unit_jump_interfaces() {
        let n = 64;
        let (u, _) = shear_layer(1.0, -1.0, 0.0, n, 1.0).unwrap();
        // full jump of magnitude 2 between adjacent rows across x2 ~ 1/2
        // and across the seam; no node carries an intermediate value
        let below_mid = u.value_wrapped(&[0, n as i64 / 2], 0);
        let above_mid = u.value_wrapped(&[0, n as i64 / 2 + 1], 0);
        assert_eq!(below_mid - above_mid, 2.0);
        let below_seam = u.value_wrapped(&[0, 0], 0);
        let above_seam = u.value_wrapped(&[0, 1], 0);
        assert_eq!(above_seam - below_seam, 2.0);
        for node in 0..u.node_count() {
            let v = u.data()[node * 2];
            assert!(v == 1.0 || v == -1.0);
        }
    }

    #[test]
    fn smooth_shear_layer_is_an_exact_steady_solution() {
        let (u, p) = shear_layer(1.0, -1.0, 0.125, 64, 1.0).unwrap();
        let div = divergence(&u).unwrap();
        assert!(lp_norm(&div, f64::INFINITY).unwrap() < 1e-10);
        let r = momentum_residual(&u, &p).unwrap();
        assert!(lp_norm(&r, f64::INFINITY).unwrap() < 1e-10);
        let check = solution_check(&u, Some(&p)).unwrap();
        assert!(check.exact_solution && !check.nonsolution);
    }

    #[test]
    fn shear_layer_rejects_wide_ramp() {
        assert!(shear_layer(1.0, -1.0, 0.3, 64, 1.0).is_err());
    }

    #[test]
    fn burgers_shock_jumps_in_the_normal_component() {
        let n = 64;
        let (u, entropic) = burgers_shock(1.0, -1.0, 0.0, n, 1.0).unwrap();
        assert!(entropic);
        let left = u.value_wrapped(&[n as i64 / 2, 0], 0);
        let right = u.value_wrapped(&[n as i64 / 2 + 1, 0], 0);
        assert_eq!(left - right, 2.0);
        let (_, entropic) = burgers_shock(-1.0, 1.0, 0.0, n, 1.0).unwrap();
        assert!(!entropic);
    }

    #[test]
    fn burgers_shock_is_flagged_nonsolution() {
        let (u, _) = burgers_shock(1.0, -1.0, 0.0, 64, 1.0).unwrap();
        let p = GridField::zeros(1, u.shape(), u.lengths()).unwrap();
        let check = solution_check(&u, Some(&p)).unwrap();
        assert!(check.nonsolution);
    }

    #[test]
    fn weierstrass_degenerate_single_mode() {
        let u = weierstrass_field(0.5, 0, 11, 64, 1.0).unwrap();
        // one cosine of unit amplitude
        let linf = lp_norm(&u, f64::INFINITY).unwrap();
        assert!(linf <= 1.0 + 1e-12);
        assert!(linf > 0.99);
    }

    #[test]
    fn weierstrass_sup_bound_is_geometric() {
        let theta = 0.3;
        let modes = 4;
        let u = weierstrass_field(theta, modes, 7, 128, 1.0).unwrap();
        let bound: f64 = (0..=modes).map(|j| 2.0f64.powf(-(j as f64) * theta)).sum();
        assert!(lp_norm(&u, f64::INFINITY).unwrap() <= bound + 1e-12);
    }

    #[test]
    fn weierstrass_rejects_unresolved_top_mode() {
        assert!(weierstrass_field(0.5, 5, 0, 64, 1.0).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let a = weierstrass_field(1.0 / 3.0, 4, 7, 64, 1.0).unwrap();
        let b = weierstrass_field(1.0 / 3.0, 4, 7, 64, 1.0).unwrap();
        assert_eq!(a.data(), b.data());
        let a = random_fourier_field(1.0 / 3.0, 42, 64, 1.0).unwrap();
        let b = random_fourier_field(1.0 / 3.0, 42, 64, 1.0).unwrap();
        assert!(a.data().iter().zip(b.data()).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn random_fourier_is_divergence_free_and_normalized() {
        let u = random_fourier_field(1.0 / 3.0, 3, 64, 1.0).unwrap();
        let div = divergence(&u).unwrap();
        assert!(lp_norm(&div, f64::INFINITY).unwrap() < 1e-10);
        assert!((lp_norm(&u, 2.0).unwrap() - 1.0).abs() < 1e-12);
        let mean = u.mean();
        assert!(mean[0].abs() < 1e-13 && mean[1].abs() < 1e-13);
    }
}
