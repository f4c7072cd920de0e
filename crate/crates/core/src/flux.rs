//! Coarse-grained energy-flux fields and their diagnostics.
//!
//! Two pointwise approximations of the local dissipation are provided: the
//! increment form (velocity increments weighted by the kernel gradient) and
//! the resolved-stress form (filtered-stress contraction against the
//! filtered gradient). Both collapse from trilinear forms, which this module
//! also exposes, together with scale sweeps with power-law fits, the
//! Bernoulli balance flux, and the smooth/rough splitting diagnostic.

use crate::error::{Error, Result};
use crate::grid::{lp_norm, GridField, TimeSeriesField};
use crate::kernels::{mollify_spectral, DiscreteKernel, KernelProfile};
use crate::pressure::{solution_check, SolutionCheck};
use crate::spectral::{divergence, spectral_gradient, sym_gradient};
use crate::traces::{tube_mass_field, Interface};
use crate::util::{fit_loglog, FitLine, KahanSum};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FluxVariant {
    Dr,
    Cet,
    Balance,
}

/// Pointwise flux approximation at one scale.
#[derive(Clone, Debug)]
pub struct FluxField {
    pub variant: FluxVariant,
    /// regularization scale; `None` for the balance form, which has none
    pub ell: Option<f64>,
    pub kernel: Option<KernelProfile>,
    pub values: GridField,
}

impl FluxField {
    pub fn l1(&self) -> f64 {
        lp_norm(&self.values, 1.0).expect("flux L1")
    }

    /// Signed total: integral of the flux over the box.
    pub fn total(&self) -> f64 {
        let mut acc = KahanSum::new();
        for node in 0..self.values.node_count() {
            acc.add(self.values.data()[node]);
        }
        acc.total() * self.values.cell_volume()
    }

    /// Pairing with a smooth scalar test weight: integral of phi * flux.
    pub fn pair_with(&self, phi: &GridField) -> Result<f64> {
        if !phi.same_grid(&self.values) || phi.components() != 1 {
            return Err(Error::GridMismatch(
                "test weight must be a scalar field on the flux grid".into(),
            ));
        }
        let mut acc = KahanSum::new();
        for node in 0..self.values.node_count() {
            acc.add(phi.data()[node] * self.values.data()[node]);
        }
        Ok(acc.total() * self.values.cell_volume())
    }
}

fn require_velocity(u: &GridField) -> Result<()> {
    if u.components() != u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "flux needs a velocity field with m = d, got m = {}, d = {}",
            u.components(),
            u.dim()
        )));
    }
    Ok(())
}

/// Increment-form flux at the kernel scale:
/// D(x) = sum_k v_k g_k . (delta_k u / (4 ell)) |delta_k u|^2,
/// summed with compensation so parity cancellations survive in floating point.
pub fn flux_dr(u: &GridField, kernel: &DiscreteKernel) -> Result<FluxField> {
    require_velocity(u)?;
    kernel.check_grid(u)?;
    let m = u.components();
    let prefactor = kernel.cell_volume_z() / (4.0 * kernel.ell());
    let offsets = kernel.offsets();
    let grads = kernel.grads();
    let data: Vec<f64> = (0..u.node_count())
        .into_par_iter()
        .map(|node| {
            let coords = u.decode(node);
            let base = &u.data()[node * m..(node + 1) * m];
            let mut acc = KahanSum::new();
            for (i, k) in offsets.iter().enumerate() {
                let src = u.shifted_index(&coords, k);
                let there = &u.data()[src * m..(src + 1) * m];
                let mut dot = 0.0;
                let mut sq = 0.0;
                for c in 0..m {
                    let delta = there[c] - base[c];
                    dot += grads[i][c] * delta;
                    sq += delta * delta;
                }
                acc.add(dot * sq);
            }
            acc.total() * prefactor
        })
        .collect();
    Ok(FluxField {
        variant: FluxVariant::Dr,
        ell: Some(kernel.ell()),
        kernel: Some(kernel.profile()),
        values: GridField::new(1, u.shape(), u.lengths(), data)?,
    })
}

/// Trilinear increment form T[v1, v2, v3](x) =
/// sum_k v_k g_k . (delta_k v1 / (4 ell)) (delta_k v2 . delta_k v3).
pub fn trilinear_dr(
    v1: &GridField,
    v2: &GridField,
    v3: &GridField,
    kernel: &DiscreteKernel,
) -> Result<FluxField> {
    for v in [v1, v2, v3] {
        require_velocity(v)?;
        kernel.check_grid(v)?;
    }
    if !v1.same_grid(v2) || !v1.same_grid(v3) {
        return Err(Error::GridMismatch(
            "trilinear slots on different grids".into(),
        ));
    }
    let m = v1.components();
    let prefactor = kernel.cell_volume_z() / (4.0 * kernel.ell());
    let offsets = kernel.offsets();
    let grads = kernel.grads();
    let data: Vec<f64> = (0..v1.node_count())
        .into_par_iter()
        .map(|node| {
            let coords = v1.decode(node);
            let mut acc = KahanSum::new();
            for (i, k) in offsets.iter().enumerate() {
                let src = v1.shifted_index(&coords, k);
                let mut dot = 0.0;
                let mut inner = 0.0;
                for c in 0..m {
                    let d1 = v1.data()[src * m + c] - v1.data()[node * m + c];
                    let d2 = v2.data()[src * m + c] - v2.data()[node * m + c];
                    let d3 = v3.data()[src * m + c] - v3.data()[node * m + c];
                    dot += grads[i][c] * d1;
                    inner += d2 * d3;
                }
                acc.add(dot * inner);
            }
            acc.total() * prefactor
        })
        .collect();
    Ok(FluxField {
        variant: FluxVariant::Dr,
        ell: Some(kernel.ell()),
        kernel: Some(kernel.profile()),
        values: GridField::new(1, v1.shape(), v1.lengths(), data)?,
    })
}

/// Resolved-stress flux R : grad(u_ell) with R = u_ell (x) u_ell - (u (x) u)_ell.
/// Mollification runs through the Fourier path; the two mollification routes
/// agree to spectral accuracy (kernels-module invariant).
pub fn flux_cet(u: &GridField, kernel: &DiscreteKernel) -> Result<FluxField> {
    trilinear_cet(u, u, u, kernel)
}

/// Trilinear resolved-stress form
/// T[v1, v2, v3] = ((v1)_ell (x) (v2)_ell - (v1 (x) v2)_ell) : grad (v3)_ell.
pub fn trilinear_cet(
    v1: &GridField,
    v2: &GridField,
    v3: &GridField,
    kernel: &DiscreteKernel,
) -> Result<FluxField> {
    for v in [v1, v2, v3] {
        require_velocity(v)?;
        kernel.check_grid(v)?;
    }
    if !v1.same_grid(v2) || !v1.same_grid(v3) {
        return Err(Error::GridMismatch(
            "trilinear slots on different grids".into(),
        ));
    }
    let d = v1.dim();
    let v1l = mollify_spectral(v1, kernel)?;
    let v2l = if std::ptr::eq(v1, v2) {
        v1l.clone()
    } else {
        mollify_spectral(v2, kernel)?
    };
    let v3l = if std::ptr::eq(v1, v3) {
        v1l.clone()
    } else if std::ptr::eq(v2, v3) {
        v2l.clone()
    } else {
        mollify_spectral(v3, kernel)?
    };
    // mollified tensor (v1_i v2_j)_ell
    let mut tensor_l = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let prod = v1.zip_map(v2, 1, |a, b, out| out[0] = a[i] * b[j])?;
            tensor_l.push(mollify_spectral(&prod, kernel)?);
        }
    }
    let grad = spectral_gradient(&v3l); // component c * d + a = d_a (v3l)_c
    let mut data = vec![0.0; v1.node_count()];
    for (node, slot) in data.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                let stress = v1l.data()[node * d + i] * v2l.data()[node * d + j]
                    - tensor_l[i * d + j].data()[node];
                // contract with d_i (v3l)_j
                acc += stress * grad.data()[node * d * d + j * d + i];
            }
        }
        *slot = acc;
    }
    Ok(FluxField {
        variant: FluxVariant::Cet,
        ell: Some(kernel.ell()),
        kernel: Some(kernel.profile()),
        values: GridField::new(1, v1.shape(), v1.lengths(), data)?,
    })
}

/// Resolved-stress flux contracted against the symmetric gradient instead of
/// the full gradient; agrees with [`flux_cet`] because the stress is symmetric.
pub fn flux_cet_sym(u: &GridField, kernel: &DiscreteKernel) -> Result<FluxField> {
    require_velocity(u)?;
    kernel.check_grid(u)?;
    let d = u.dim();
    let ul = mollify_spectral(u, kernel)?;
    let mut tensor_l = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let prod = u.map(1, |a, out| out[0] = a[i] * a[j]);
            tensor_l.push(mollify_spectral(&prod, kernel)?);
        }
    }
    let sym = sym_gradient(&ul)?; // component i * d + j
    let mut data = vec![0.0; u.node_count()];
    for (node, slot) in data.iter_mut().enumerate() {
        let mut acc = 0.0;
        for i in 0..d {
            for j in 0..d {
                let stress = ul.data()[node * d + i] * ul.data()[node * d + j]
                    - tensor_l[i * d + j].data()[node];
                acc += stress * sym.data()[node * d * d + i * d + j];
            }
        }
        *slot = acc;
    }
    Ok(FluxField {
        variant: FluxVariant::Cet,
        ell: Some(kernel.ell()),
        kernel: Some(kernel.profile()),
        values: GridField::new(1, u.shape(), u.lengths(), data)?,
    })
}

/// Bernoulli balance flux div((|u|^2/2 + p) u), computed spectrally.
/// For an exact steady solution this vanishes to spectral accuracy.
pub fn balance_flux(u: &GridField, p: &GridField) -> Result<FluxField> {
    require_velocity(u)?;
    if p.components() != 1 || !p.same_grid(u) {
        return Err(Error::GridMismatch(
            "pressure must be a scalar field on the velocity grid".into(),
        ));
    }
    let d = u.dim();
    let transport = u.zip_map(p, d, |uv, pv, out| {
        let q = 0.5 * uv.iter().map(|v| v * v).sum::<f64>() + pv[0];
        for a in 0..d {
            out[a] = q * uv[a];
        }
    })?;
    let div = divergence(&transport)?;
    Ok(FluxField {
        variant: FluxVariant::Balance,
        ell: None,
        kernel: None,
        values: div,
    })
}

/// Which scales of a sweep enter the power-law fit.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct FitWindow {
    pub skip_largest: usize,
    pub skip_smallest: usize,
}

impl Default for FitWindow {
    /// The largest scales see domain effects and the smallest sees grid noise.
    fn default() -> Self {
        FitWindow {
            skip_largest: 2,
            skip_smallest: 1,
        }
    }
}

impl FitWindow {
    pub fn all() -> Self {
        FitWindow {
            skip_largest: 0,
            skip_smallest: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub ell: f64,
    pub l1_dr: f64,
    pub l1_cet: f64,
}

/// Scale sweep of both flux variants with log-log fits.
#[derive(Clone, Debug, Serialize)]
pub struct SweepResult {
    pub kernel: KernelProfile,
    /// rows with strictly decreasing scale
    pub rows: Vec<SweepRow>,
    /// L1 of the balance flux when a pressure was supplied (scale-free)
    pub l1_balance: Option<f64>,
    pub fit_dr: Option<FitLine>,
    pub fit_cet: Option<FitLine>,
    pub fit_window: FitWindow,
    pub nonsolution: bool,
    pub residuals: SolutionCheck,
}

fn fit_rows(
    rows: &[SweepRow],
    window: FitWindow,
    pick: impl Fn(&SweepRow) -> f64,
) -> Result<Option<FitLine>> {
    let lo = window.skip_largest;
    let hi = rows.len().saturating_sub(window.skip_smallest);
    if lo >= hi || hi - lo < 3 {
        return Err(Error::InvalidParameter(format!(
            "fit window keeps {} of {} scales; need at least 3",
            hi.saturating_sub(lo),
            rows.len()
        )));
    }
    let scales: Vec<f64> = rows[lo..hi].iter().map(|r| r.ell).collect();
    let values: Vec<f64> = rows[lo..hi].iter().map(&pick).collect();
    Ok(fit_loglog(&scales, &values))
}

/// Sweep one snapshot over a list of grid-aligned scales.
pub fn sweep(
    u: &GridField,
    p: Option<&GridField>,
    profile: KernelProfile,
    scales: &[f64],
    window: FitWindow,
) -> Result<SweepResult> {
    require_velocity(u)?;
    if scales.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 scales for a sweep, got {}",
            scales.len()
        )));
    }
    let mut sorted = scales.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sorted.dedup();
    let mut rows = Vec::with_capacity(sorted.len());
    for &ell in &sorted {
        let kernel = DiscreteKernel::build(profile, ell, u)?;
        let dr = flux_dr(u, &kernel)?;
        let cet = flux_cet(u, &kernel)?;
        rows.push(SweepRow {
            ell,
            l1_dr: dr.l1(),
            l1_cet: cet.l1(),
        });
    }
    let l1_balance = match p {
        Some(p) => Some(balance_flux(u, p)?.l1()),
        None => None,
    };
    let fit_dr = fit_rows(&rows, window, |r| r.l1_dr)?;
    let fit_cet = fit_rows(&rows, window, |r| r.l1_cet)?;
    let residuals = solution_check(u, p)?;
    Ok(SweepResult {
        kernel: profile,
        rows,
        l1_balance,
        fit_dr,
        fit_cet,
        fit_window: window,
        nonsolution: residuals.nonsolution,
        residuals,
    })
}

/// Sweep a time series: per-snapshot flux norms combined by trapezoid
/// quadrature in time. Mollification acts in space only.
pub fn sweep_series(
    series: &TimeSeriesField,
    pressures: Option<&TimeSeriesField>,
    profile: KernelProfile,
    scales: &[f64],
    window: FitWindow,
) -> Result<SweepResult> {
    let first = &series.snapshots()[0];
    require_velocity(first)?;
    if let Some(ps) = pressures {
        if ps.len() != series.len() {
            return Err(Error::DimensionMismatch(
                "pressure series length differs from velocity series".into(),
            ));
        }
    }
    if scales.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 scales for a sweep, got {}",
            scales.len()
        )));
    }
    let mut sorted = scales.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sorted.dedup();
    let mut rows = Vec::with_capacity(sorted.len());
    for &ell in &sorted {
        let kernel = DiscreteKernel::build(profile, ell, first)?;
        let mut dr_per = Vec::with_capacity(series.len());
        let mut cet_per = Vec::with_capacity(series.len());
        for snap in series.snapshots() {
            dr_per.push(flux_dr(snap, &kernel)?.l1());
            cet_per.push(flux_cet(snap, &kernel)?.l1());
        }
        rows.push(SweepRow {
            ell,
            l1_dr: series.time_l1(&dr_per),
            l1_cet: series.time_l1(&cet_per),
        });
    }
    let l1_balance = match pressures {
        Some(ps) => {
            let mut per = Vec::with_capacity(series.len());
            for (snap, p) in series.snapshots().iter().zip(ps.snapshots()) {
                per.push(balance_flux(snap, p)?.l1());
            }
            Some(series.time_l1(&per))
        }
        None => None,
    };
    let fit_dr = fit_rows(&rows, window, |r| r.l1_dr)?;
    let fit_cet = fit_rows(&rows, window, |r| r.l1_cet)?;
    // stamp with the worst snapshot
    let mut residuals = solution_check(
        &series.snapshots()[0],
        pressures.map(|ps| &ps.snapshots()[0]),
    )?;
    for (i, snap) in series.snapshots().iter().enumerate().skip(1) {
        let check = solution_check(snap, pressures.map(|ps| &ps.snapshots()[i]))?;
        residuals.divergence_linf = residuals.divergence_linf.max(check.divergence_linf);
        residuals.momentum_linf = residuals.momentum_linf.max(check.momentum_linf);
        residuals.nonsolution |= check.nonsolution;
        residuals.exact_solution &= check.exact_solution;
    }
    Ok(SweepResult {
        kernel: profile,
        rows,
        l1_balance,
        fit_dr,
        fit_cet,
        fit_window: window,
        nonsolution: residuals.nonsolution,
        residuals,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityRow {
    pub delta: f64,
    pub ell: f64,
    /// L1 of T[u, u, u]
    pub t_full: f64,
    /// L1 of T[u_delta, u, u]: the leg that vanishes for a smooth first slot
    pub t_smooth_leg: f64,
    /// L1 of T[u - u_delta, u, u]: controlled by the distance to smoothness
    pub t_remainder: f64,
}

/// Smooth/rough splitting diagnostic: u = u_delta + (u - u_delta) telescopes
/// the trilinear form, separating the leg that dies with the flux scale from
/// the remainder controlled by the smoothing scale.
#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    pub variant: FluxVariant,
    pub kernel: KernelProfile,
    pub rows: Vec<DensityRow>,
    /// max-norm defect of T[u,u,u] - T[u_delta,u,u] - T[u-u_delta,u,u]
    pub telescoping_linf: f64,
}

pub fn density_mechanism(
    u: &GridField,
    profile: KernelProfile,
    deltas: &[f64],
    ells: &[f64],
    variant: FluxVariant,
) -> Result<DensityReport> {
    require_velocity(u)?;
    if deltas.is_empty() || ells.is_empty() {
        return Err(Error::InvalidParameter(
            "need at least one smoothing scale and one flux scale".into(),
        ));
    }
    let trilinear =
        |a: &GridField, b: &GridField, c: &GridField, k: &DiscreteKernel| match variant {
            FluxVariant::Dr => trilinear_dr(a, b, c, k),
            FluxVariant::Cet => trilinear_cet(a, b, c, k),
            FluxVariant::Balance => Err(Error::InvalidParameter(
                "the balance form is not a trilinear operator".into(),
            )),
        };
    let mut full_per_ell = Vec::with_capacity(ells.len());
    for &ell in ells {
        let kernel = DiscreteKernel::build(profile, ell, u)?;
        full_per_ell.push(trilinear(u, u, u, &kernel)?);
    }
    let mut rows = Vec::new();
    let mut defect: f64 = 0.0;
    for &delta in deltas {
        let smoother = DiscreteKernel::build(profile, delta, u)?;
        let u_smooth = mollify_spectral(u, &smoother)?;
        let u_rough = u.sub(&u_smooth)?;
        for (ei, &ell) in ells.iter().enumerate() {
            let kernel = DiscreteKernel::build(profile, ell, u)?;
            let smooth_leg = trilinear(&u_smooth, u, u, &kernel)?;
            let remainder = trilinear(&u_rough, u, u, &kernel)?;
            let full = &full_per_ell[ei];
            for node in 0..u.node_count() {
                let gap = full.values.data()[node]
                    - smooth_leg.values.data()[node]
                    - remainder.values.data()[node];
                defect = defect.max(gap.abs());
            }
            rows.push(DensityRow {
                delta,
                ell,
                t_full: full.l1(),
                t_smooth_leg: smooth_leg.l1(),
                t_remainder: remainder.l1(),
            });
        }
    }
    Ok(DensityReport {
        variant,
        kernel: profile,
        rows,
        telescoping_linf: defect,
    })
}

/// Flux mass captured within `width` of an interface: the localization
/// diagnostic for dissipation concentrating on a surface.
pub fn tube_mass(flux: &FluxField, interface: &Interface, width: f64) -> Result<f64> {
    tube_mass_field(&flux.values, interface, width)
}
