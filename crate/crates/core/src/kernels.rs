//! Discretized mollification kernels and the mollification operator.
//!
//! A [`DiscreteKernel`] samples a smooth, even, compactly supported radial
//! profile on the lattice points inside the physical ball of radius `ell`.
//! Weights are renormalized to unit sum and gradient samples are
//! antisymmetrized bitwise, so the parity cancellations that the flux
//! diagnostics rely on hold exactly, not just to rounding.

use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::spectral::SpectralField;
use crate::util::simpson;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;

/// Built-in radial profiles on [0, 1], zero outside.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum KernelProfile {
    /// exp(-1 / (1 - r^2)): smooth with all derivatives vanishing at r = 1.
    Bump,
    /// (1 - r^2)^2: C^1 at the support boundary, cheap to evaluate.
    Quartic,
}

impl KernelProfile {
    pub fn name(self) -> &'static str {
        match self {
            KernelProfile::Bump => "bump",
            KernelProfile::Quartic => "quartic",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "bump" => Ok(KernelProfile::Bump),
            "quartic" => Ok(KernelProfile::Quartic),
            other => Err(Error::InvalidParameter(format!(
                "unknown kernel profile '{other}' (expected bump or quartic)"
            ))),
        }
    }

    /// Unnormalized radial value.
    pub fn radial(self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        match self {
            KernelProfile::Bump => (-1.0 / (1.0 - r * r)).exp(),
            KernelProfile::Quartic => {
                let t = 1.0 - r * r;
                t * t
            }
        }
    }

    /// Unnormalized radial derivative d/dr.
    pub fn radial_derivative(self, r: f64) -> f64 {
        if r >= 1.0 {
            return 0.0;
        }
        match self {
            KernelProfile::Bump => {
                let t = 1.0 - r * r;
                self.radial(r) * (-2.0 * r / (t * t))
            }
            KernelProfile::Quartic => -4.0 * r * (1.0 - r * r),
        }
    }

    /// Normalization constant c so that the integral of c * radial over the
    /// unit ball in dimension `d` equals one. Computed by fine quadrature.
    pub fn normalization(self, d: usize) -> f64 {
        let surface = sphere_surface(d);
        let integral = simpson(|r| self.radial(r) * r.powi(d as i32 - 1), 0.0, 1.0, 20_000);
        1.0 / (surface * integral)
    }

    /// Continuum second moment int_{B1} rho(z) z_1^2 dz, by fine quadrature
    /// of the radial integral (exact reference for the discrete moment).
    pub fn continuum_second_moment(self, d: usize) -> f64 {
        let c = self.normalization(d);
        let surface = sphere_surface(d);
        let integral = simpson(|r| self.radial(r) * r.powi(d as i32 + 1), 0.0, 1.0, 20_000);
        c * surface * integral / d as f64
    }
}

fn sphere_surface(d: usize) -> f64 {
    match d {
        2 => 2.0 * PI,
        3 => 4.0 * PI,
        _ => panic!("unsupported dimension {d}"),
    }
}

/// Check that `scale` is a positive integer multiple of spacing `h`;
/// returns the multiplier.
pub fn aligned_cells(scale: f64, h: f64) -> Result<i64> {
    let ratio = scale / h;
    let k = ratio.round();
    if k < 1.0 || (ratio - k).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::ScaleMisaligned { scale, spacing: h });
    }
    Ok(k as i64)
}

/// Grid-aligned discretization of a mollifier at scale `ell`.
#[derive(Clone, Debug)]
pub struct DiscreteKernel {
    profile: KernelProfile,
    ell: f64,
    n: Vec<usize>,
    l: Vec<f64>,
    h: Vec<f64>,
    offsets: Vec<Vec<i64>>,
    weights: Vec<f64>,
    grads: Vec<Vec<f64>>,
    /// index of -k for each offset k
    mirror: Vec<usize>,
    /// unordered (i, mirror(i)) pairs, self-paired center listed once
    pairs: Vec<(usize, usize)>,
    /// quadrature cell volume prod(h_a / ell) in z-space
    cell_volume_z: f64,
}

impl DiscreteKernel {
    /// Discretize `profile` at scale `ell` for the grid of `like`.
    ///
    /// `ell` must be an integer multiple of every axis spacing, at least two
    /// spacings wide, and small enough that 2 * ell fits inside the box.
    pub fn build(profile: KernelProfile, ell: f64, like: &GridField) -> Result<Self> {
        let d = like.dim();
        let h = like.spacings();
        let max_h = h.iter().cloned().fold(0.0, f64::max);
        let min_l = like.lengths().iter().cloned().fold(f64::INFINITY, f64::min);
        if ell < 2.0 * max_h {
            return Err(Error::KernelTooSmall { scale: ell });
        }
        if 2.0 * ell >= min_l {
            return Err(Error::KernelTooLarge {
                scale: ell,
                limit: min_l,
            });
        }
        let mut reach = Vec::with_capacity(d);
        for a in 0..d {
            reach.push(aligned_cells(ell, h[a])?);
        }

        let c_norm = profile.normalization(d);
        let cell_volume_z: f64 = h.iter().map(|&ha| ha / ell).product();

        let mut offsets = Vec::new();
        let mut weights = Vec::new();
        let mut grads = Vec::new();
        let mut cursor = vec![-reach[0]; 1];
        cursor.clear();
        let mut k = vec![0i64; d];
        // lexicographic enumeration of the lattice ball
        fn walk(
            a: usize,
            d: usize,
            reach: &[i64],
            k: &mut Vec<i64>,
            f: &mut impl FnMut(&[i64]),
        ) {
            if a == d {
                f(k);
                return;
            }
            for v in -reach[a]..=reach[a] {
                k[a] = v;
                walk(a + 1, d, reach, k, f);
            }
        }
        walk(0, d, &reach, &mut k, &mut |k: &[i64]| {
            let mut r2 = 0.0;
            for a in 0..d {
                let z = k[a] as f64 * h[a] / ell;
                r2 += z * z;
            }
            if r2 > 1.0 {
                return;
            }
            let r = r2.sqrt();
            let w = c_norm * profile.radial(r);
            let slope = c_norm * profile.radial_derivative(r);
            let mut g = vec![0.0; d];
            if r > 0.0 {
                for a in 0..d {
                    g[a] = slope * (k[a] as f64 * h[a] / ell) / r;
                }
            }
            if w == 0.0 && g.iter().all(|&v| v == 0.0) && r2 == 1.0 {
                return; // support boundary carries nothing
            }
            offsets.push(k.to_vec());
            weights.push(w * cell_volume_z);
            grads.push(g);
        });
        let _ = cursor;

        if offsets.len() < 3 {
            return Err(Error::KernelTooSmall { scale: ell });
        }

        // mirror map k -> -k; the lattice ball is reflection-symmetric
        let index: HashMap<Vec<i64>, usize> = offsets
            .iter()
            .enumerate()
            .map(|(i, o)| (o.clone(), i))
            .collect();
        let mut mirror = vec![0usize; offsets.len()];
        for (i, o) in offsets.iter().enumerate() {
            let neg: Vec<i64> = o.iter().map(|v| -v).collect();
            mirror[i] = *index
                .get(&neg)
                .expect("lattice ball must be reflection-symmetric");
        }
        let mut pairs = Vec::new();
        for i in 0..offsets.len() {
            if i <= mirror[i] {
                pairs.push((i, mirror[i]));
            }
        }

        // renormalize to unit mass, then pin the sum to exactly 1.0
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::KernelTooSmall { scale: ell });
        }
        for w in &mut weights {
            *w /= total;
        }
        let center = index[&vec![0i64; d]];
        for _ in 0..64 {
            let s: f64 = weights.iter().sum();
            if s == 1.0 {
                break;
            }
            weights[center] += 1.0 - s;
        }

        // antisymmetrize gradient samples bitwise: g_{-k} = -g_k exactly
        let raw = grads.clone();
        for i in 0..grads.len() {
            let j = mirror[i];
            for a in 0..d {
                grads[i][a] = 0.5 * (raw[i][a] - raw[j][a]);
            }
        }

        Ok(Self {
            profile,
            ell,
            n: like.shape().to_vec(),
            l: like.lengths().to_vec(),
            h,
            offsets,
            weights,
            grads,
            mirror,
            pairs,
            cell_volume_z,
        })
    }

    pub fn profile(&self) -> KernelProfile {
        self.profile
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn offsets(&self) -> &[Vec<i64>] {
        &self.offsets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn grads(&self) -> &[Vec<f64>] {
        &self.grads
    }

    pub fn mirror(&self) -> &[usize] {
        &self.mirror
    }

    pub fn cell_volume_z(&self) -> f64 {
        self.cell_volume_z
    }

    pub fn check_grid(&self, u: &GridField) -> Result<()> {
        if u.shape() != self.n.as_slice() || u.lengths() != self.l.as_slice() {
            return Err(Error::GridMismatch(format!(
                "kernel built for grid {:?}/{:?}, field has {:?}/{:?}",
                self.n,
                self.l,
                u.shape(),
                u.lengths()
            )));
        }
        Ok(())
    }

    /// z-space quadrature point k * h / ell of one offset.
    pub fn z_point(&self, i: usize) -> Vec<f64> {
        (0..self.h.len())
            .map(|a| self.offsets[i][a] as f64 * self.h[a] / self.ell)
            .collect()
    }

    /// First moment sum_k w_k (k h / ell), accumulated over mirror pairs so
    /// the parity cancellation is exact.
    pub fn first_moment(&self) -> Vec<f64> {
        let d = self.h.len();
        let mut out = vec![0.0; d];
        for &(i, j) in &self.pairs {
            let zi = self.z_point(i);
            for a in 0..d {
                let mut s = self.weights[i] * zi[a];
                if j != i {
                    let zj = self.z_point(j);
                    s += self.weights[j] * zj[a];
                }
                out[a] += s;
            }
        }
        out
    }

    /// Weighted gradient sum sum_k w_k g_k, accumulated over mirror pairs.
    pub fn weighted_grad_sum(&self) -> Vec<f64> {
        let d = self.h.len();
        let mut out = vec![0.0; d];
        for &(i, j) in &self.pairs {
            for a in 0..d {
                let mut s = self.weights[i] * self.grads[i][a];
                if j != i {
                    s += self.weights[j] * self.grads[j][a];
                }
                out[a] += s;
            }
        }
        out
    }

    /// Discrete second moment sum_k w_k (k_1 h_1 / ell)^2.
    pub fn second_moment(&self) -> f64 {
        self.offsets
            .iter()
            .zip(&self.weights)
            .map(|(k, w)| {
                let z = k[0] as f64 * self.h[0] / self.ell;
                w * z * z
            })
            .sum()
    }

    /// Exact damping factor the kernel applies to the Fourier mode with
    /// integer frequency vector `q`: sum_k w_k cos(2 pi sum_a q_a k_a / n_a).
    pub fn transfer_factor(&self, q: &[i64]) -> f64 {
        self.offsets
            .iter()
            .zip(&self.weights)
            .map(|(k, w)| {
                let phase: f64 = (0..self.n.len())
                    .map(|a| 2.0 * PI * q[a] as f64 * k[a] as f64 / self.n[a] as f64)
                    .sum();
                w * phase.cos()
            })
            .sum()
    }
}

/// Mollification by direct summation over the kernel offsets.
///
/// Evaluated in increment form u(x) + sum_k w_k (u(x + k h) - u(x)), which
/// reproduces constants exactly because increments of constants vanish.
pub fn mollify(u: &GridField, kernel: &DiscreteKernel) -> Result<GridField> {
    kernel.check_grid(u)?;
    let m = u.components();
    let data: Vec<f64> = (0..u.node_count())
        .into_par_iter()
        .flat_map_iter(|node| {
            let coords = u.decode(node);
            let mut acc: Vec<f64> = u.node(node).to_vec();
            for (i, k) in kernel.offsets().iter().enumerate() {
                if k.iter().all(|&v| v == 0) {
                    continue;
                }
                let w = kernel.weights()[i];
                let src = u.shifted_index(&coords, k);
                for c in 0..m {
                    acc[c] += w * (u.data()[src * m + c] - u.data()[node * m + c]);
                }
            }
            acc
        })
        .collect();
    GridField::new(m, u.shape(), u.lengths(), data)
}

/// Mollification by Fourier multiplication with the kernel transform; agrees
/// with [`mollify`] to spectral accuracy.
pub fn mollify_spectral(u: &GridField, kernel: &DiscreteKernel) -> Result<GridField> {
    kernel.check_grid(u)?;
    let multiplier = kernel_multiplier(u, kernel)?;
    let mut hat = SpectralField::forward(u);
    let m = u.components();
    let nodes = u.node_count();
    for node in 0..nodes {
        let f = multiplier[node];
        for c in 0..m {
            hat.coeffs_mut()[node * m + c] *= f;
        }
    }
    Ok(hat.inverse())
}

/// DFT of the kernel weights placed on the grid; real by evenness.
pub(crate) fn kernel_multiplier(like: &GridField, kernel: &DiscreteKernel) -> Result<Vec<f64>> {
    let mut image = GridField::zeros(1, like.shape(), like.lengths())?;
    let zero = vec![0usize; like.dim()];
    for (i, k) in kernel.offsets().iter().enumerate() {
        let idx = like.shifted_index(&zero, k);
        image.data_mut()[idx] += kernel.weights()[i];
    }
    // correlation with even weights equals convolution: transform is real
    let hat = SpectralField::forward(&image);
    Ok(hat.coeffs().iter().map(|c| c.re).collect())
}
