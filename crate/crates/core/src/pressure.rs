//! Spectral Leray projection, pressure recovery and steady-state residuals.

use crate::error::{Error, Result};
use crate::grid::{lp_norm, GridField};
use crate::spectral::{divergence, spectral_gradient, SpectralField};
use serde::Serialize;

fn require_velocity(u: &GridField) -> Result<()> {
    if u.components() != u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "need a velocity field with m = d, got m = {} and d = {}",
            u.components(),
            u.dim()
        )));
    }
    Ok(())
}

/// Project onto divergence-free fields: u_hat(k) -> (I - k k^T / |k|^2) u_hat(k),
/// zero mode untouched.
pub fn leray_project(u: &GridField) -> Result<GridField> {
    require_velocity(u)?;
    let d = u.dim();
    let mut hat = SpectralField::forward(u);
    let m = d;
    let n = hat.shape().to_vec();
    let nodes: usize = n.iter().product();
    let mut kvec = vec![0.0; d];
    for node in 0..nodes {
        let mut rem = node;
        let mut k2 = 0.0;
        for a in (0..d).rev() {
            let i = rem % n[a];
            rem /= n[a];
            kvec[a] = hat.wavenumber(a, i);
            k2 += kvec[a] * kvec[a];
        }
        if k2 == 0.0 {
            continue;
        }
        let coeffs = &mut hat.coeffs_mut()[node * m..(node + 1) * m];
        let mut dot = num_complex::Complex64::new(0.0, 0.0);
        for a in 0..d {
            dot += coeffs[a] * kvec[a];
        }
        for a in 0..d {
            coeffs[a] -= dot * (kvec[a] / k2);
        }
    }
    Ok(hat.inverse())
}

/// Zero-mean pressure solving -Lap p = sum_ij d_i d_j (u_i u_j) spectrally:
/// p_hat(k) = -(k_i k_j / |k|^2) (u_i u_j)_hat(k) for k != 0.
pub fn solve_pressure(u: &GridField) -> Result<GridField> {
    require_velocity(u)?;
    let d = u.dim();
    // symmetric tensor components u_i u_j, i <= j
    let mut tensor_hats = Vec::new();
    for i in 0..d {
        for j in i..d {
            let prod = u.map(1, |vals, out| out[0] = vals[i] * vals[j]);
            tensor_hats.push(((i, j), SpectralField::forward(&prod)));
        }
    }
    let mut p_hat = SpectralField::forward(&GridField::zeros(1, u.shape(), u.lengths())?);
    let n = u.shape().to_vec();
    let nodes: usize = n.iter().product();
    let mut kvec = vec![0.0; d];
    for node in 0..nodes {
        let mut rem = node;
        let mut k2 = 0.0;
        for a in (0..d).rev() {
            let i = rem % n[a];
            rem /= n[a];
            kvec[a] = p_hat.wavenumber(a, i);
            k2 += kvec[a] * kvec[a];
        }
        if k2 == 0.0 {
            continue;
        }
        let mut acc = num_complex::Complex64::new(0.0, 0.0);
        for ((i, j), hat) in &tensor_hats {
            let weight = if i == j { 1.0 } else { 2.0 };
            acc += hat.coeffs()[node] * (weight * kvec[*i] * kvec[*j] / k2);
        }
        p_hat.coeffs_mut()[node] = -acc;
    }
    Ok(p_hat.inverse())
}

/// Pointwise steady momentum residual div(u tensor u) + grad p.
pub fn momentum_residual(u: &GridField, p: &GridField) -> Result<GridField> {
    require_velocity(u)?;
    if p.components() != 1 || !p.same_grid(u) {
        return Err(Error::GridMismatch(
            "pressure must be a scalar field on the velocity grid".into(),
        ));
    }
    let d = u.dim();
    // div(u tensor u)_i = sum_a d_a (u_i u_a)
    let mut rows = Vec::with_capacity(d);
    for i in 0..d {
        let mut row = GridField::zeros(1, u.shape(), u.lengths())?;
        for a in 0..d {
            let prod = u.map(1, |vals, out| out[0] = vals[i] * vals[a]);
            let grad = spectral_gradient(&prod); // component layout: 0*d + axis
            for node in 0..u.node_count() {
                row.data_mut()[node] += grad.data()[node * d + a];
            }
        }
        rows.push(row);
    }
    let grad_p = spectral_gradient(p);
    let mut out = GridField::zeros(d, u.shape(), u.lengths())?;
    for node in 0..u.node_count() {
        for i in 0..d {
            out.data_mut()[node * d + i] = rows[i].data()[node] + grad_p.data()[node * d + i];
        }
    }
    Ok(out)
}

/// Solution diagnostics for a snapshot. When no pressure is supplied the
/// Leray pressure is used, and the report says so.
#[derive(Clone, Debug, Serialize)]
pub struct SolutionCheck {
    /// max-norm of the spectral divergence
    pub divergence_linf: f64,
    /// max-norm of div(u tensor u) + grad p
    pub momentum_linf: f64,
    /// pressure recovered spectrally rather than supplied
    pub leray_pressure_used: bool,
    /// either residual above the stationarity threshold 1e-4
    pub nonsolution: bool,
    /// both residuals at spectral accuracy (1e-6)
    pub exact_solution: bool,
}

/// Threshold above which a field pair is stamped NON-SOLUTION.
pub const NONSOLUTION_THRESHOLD: f64 = 1e-4;
/// Threshold below which a field pair is marked an exact steady solution.
pub const EXACT_SOLUTION_THRESHOLD: f64 = 1e-6;

pub fn solution_check(u: &GridField, p: Option<&GridField>) -> Result<SolutionCheck> {
    require_velocity(u)?;
    let div_linf = lp_norm(&divergence(u)?, f64::INFINITY)?;
    let (pressure, leray) = match p {
        Some(p) => (p.clone(), false),
        None => (solve_pressure(u)?, true),
    };
    let mom_linf = lp_norm(&momentum_residual(u, &pressure)?, f64::INFINITY)?;
    let worst = div_linf.max(mom_linf);
    Ok(SolutionCheck {
        divergence_linf: div_linf,
        momentum_linf: mom_linf,
        leray_pressure_used: leray,
        nonsolution: worst > NONSOLUTION_THRESHOLD,
        exact_solution: worst <= EXACT_SOLUTION_THRESHOLD,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sample_function;
    use std::f64::consts::PI;

    #[test]
    fn projection_kills_gradients() {
        let u = sample_function(2, &[32, 32], &[1.0, 1.0], |x, out| {
            // grad of sin(2 pi x1): (2 pi cos(2 pi x1), 0)
            out[0] = 2.0 * PI * (2.0 * PI * x[0]).cos();
            out[1] = 0.0;
        })
        .unwrap();
        let v = leray_project(&u).unwrap();
        assert!(lp_norm(&v, f64::INFINITY).unwrap() < 1e-12 * 2.0 * PI);
    }

    #[test]
    fn projection_fixes_divergence_free_fields() {
        let u = sample_function(2, &[32, 32], &[1.0, 1.0], |x, out| {
            out[0] = (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos();
            out[1] = -(2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).sin();
        })
        .unwrap();
        let v = leray_project(&u).unwrap();
        let diff = u.sub(&v).unwrap();
        assert!(lp_norm(&diff, f64::INFINITY).unwrap() < 1e-12);
    }

    #[test]
    fn projection_is_idempotent() {
        let u = sample_function(2, &[32, 32], &[1.0, 1.0], |x, out| {
            out[0] = (2.0 * PI * x[0]).sin() + (4.0 * PI * x[1]).cos();
            out[1] = (2.0 * PI * (x[0] + x[1])).sin();
        })
        .unwrap();
        let once = leray_project(&u).unwrap();
        let twice = leray_project(&once).unwrap();
        let diff = once.sub(&twice).unwrap();
        assert!(lp_norm(&diff, f64::INFINITY).unwrap() < 1e-13);
        assert!(lp_norm(&divergence(&once).unwrap(), f64::INFINITY).unwrap() < 1e-10);
    }

    #[test]
    fn pressure_of_constant_flow_is_zero() {
        let u = sample_function(2, &[16, 16], &[1.0, 1.0], |_, out| {
            out[0] = 1.5;
            out[1] = -0.5;
        })
        .unwrap();
        let p = solve_pressure(&u).unwrap();
        assert!(lp_norm(&p, f64::INFINITY).unwrap() < 1e-13);
    }

    #[test]
    fn recovered_pressure_has_zero_mean() {
        let u = sample_function(2, &[32, 32], &[1.0, 1.0], |x, out| {
            out[0] = (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).cos();
            out[1] = -(2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).sin();
        })
        .unwrap();
        let p = solve_pressure(&u).unwrap();
        assert!(p.mean()[0].abs() < 1e-14);
    }

    #[test]
    fn solution_check_requires_velocity() {
        let u = GridField::zeros(3, &[8, 8], &[1.0, 1.0]).unwrap();
        assert!(solution_check(&u, None).is_err());
    }
}
