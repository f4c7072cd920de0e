//! Discrete Fourier calculus on periodic grids: forward/inverse transforms,
//! spectral differentiation, symmetric gradients and divergence.
//!
//! Differentiation multiplies mode q by i * 2 pi q / L with the signed
//! frequency convention q in (-n/2, n/2]; the Nyquist-mode derivative is set
//! to zero, which keeps the derivative operator real and antisymmetric.

use crate::error::{Error, Result};
use crate::grid::GridField;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Fourier coefficients of a field, same node-major layout as `GridField`
/// (axis 0 slowest, components fastest). Unnormalized forward transform;
/// the inverse divides by the node count.
#[derive(Clone, Debug)]
pub struct SpectralField {
    m: usize,
    n: Vec<usize>,
    l: Vec<f64>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn forward(u: &GridField) -> SpectralField {
        let mut coeffs: Vec<Complex64> = u
            .data()
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        let n = u.shape().to_vec();
        let m = u.components();
        for axis in 0..n.len() {
            fft_axis(&mut coeffs, &n, m, axis, false);
        }
        SpectralField {
            m,
            n,
            l: u.lengths().to_vec(),
            coeffs,
        }
    }

    pub fn inverse(&self) -> GridField {
        let mut coeffs = self.coeffs.clone();
        for axis in 0..self.n.len() {
            fft_axis(&mut coeffs, &self.n, self.m, axis, true);
        }
        let scale = 1.0 / self.n.iter().product::<usize>() as f64;
        let data = coeffs.iter().map(|c| c.re * scale).collect();
        GridField::new(self.m, &self.n, &self.l, data)
            .expect("inverse transform produced an invalid field")
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn shape(&self) -> &[usize] {
        &self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Signed integer frequency of mode index `idx` along `axis`.
    #[inline]
    pub fn freq(&self, axis: usize, idx: usize) -> i64 {
        let n = self.n[axis];
        if idx <= n / 2 {
            idx as i64
        } else {
            idx as i64 - n as i64
        }
    }

    /// Physical wavenumber 2 pi q / L along `axis`.
    #[inline]
    pub fn wavenumber(&self, axis: usize, idx: usize) -> f64 {
        2.0 * PI * self.freq(axis, idx) as f64 / self.l[axis]
    }

    /// True when `idx` is the (unpaired) Nyquist mode of an even axis.
    #[inline]
    pub fn is_nyquist(&self, axis: usize, idx: usize) -> bool {
        self.n[axis] % 2 == 0 && idx == self.n[axis] / 2
    }

    /// Visit every mode with its lattice index vector.
    pub fn for_each_mode(&mut self, mut f: impl FnMut(&[usize], &mut [Complex64])) {
        let dims = self.n.clone();
        let m = self.m;
        let nodes: usize = dims.iter().product();
        let mut idx = vec![0usize; dims.len()];
        for node in 0..nodes {
            let mut rem = node;
            for a in (0..dims.len()).rev() {
                idx[a] = rem % dims[a];
                rem /= dims[a];
            }
            f(&idx, &mut self.coeffs[node * m..(node + 1) * m]);
        }
    }
}

/// In-place 1D FFTs along one axis of a node-major multi-component array.
fn fft_axis(data: &mut [Complex64], n: &[usize], m: usize, axis: usize, inverse: bool) {
    let len = n[axis];
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(len)
    } else {
        planner.plan_fft_forward(len)
    };
    let stride: usize = n[axis + 1..].iter().product::<usize>() * m;
    let outer: usize = n[..axis].iter().product();
    let block = len * stride;
    let mut line = vec![Complex64::default(); len];
    for o in 0..outer {
        for inner in 0..stride {
            let base = o * block + inner;
            for t in 0..len {
                line[t] = data[base + t * stride];
            }
            fft.process(&mut line);
            for t in 0..len {
                data[base + t * stride] = line[t];
            }
        }
    }
}

/// All first-order partial derivatives by Fourier differentiation.
/// Output component `c * d + a` holds du_c/dx_a.
pub fn spectral_gradient(u: &GridField) -> GridField {
    let d = u.dim();
    let m = u.components();
    let hat = SpectralField::forward(u);
    let mut parts: Vec<GridField> = Vec::with_capacity(d);
    for a in 0..d {
        let mut diff = hat.clone();
        let dims = diff.n.clone();
        let nodes: usize = dims.iter().product();
        for node in 0..nodes {
            let mut rem = node;
            let mut idx_a = 0usize;
            for ax in (0..dims.len()).rev() {
                let i = rem % dims[ax];
                rem /= dims[ax];
                if ax == a {
                    idx_a = i;
                }
            }
            let mult = if diff.is_nyquist(a, idx_a) {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, diff.wavenumber(a, idx_a))
            };
            for c in 0..m {
                diff.coeffs[node * m + c] *= mult;
            }
        }
        parts.push(diff.inverse());
    }
    // interleave so that du_c/dx_a sits at c * d + a
    let mut out = GridField::zeros(m * d, u.shape(), u.lengths()).expect("gradient grid");
    for node in 0..u.node_count() {
        for c in 0..m {
            for a in 0..d {
                out.data_mut()[node * m * d + c * d + a] = parts[a].data()[node * m + c];
            }
        }
    }
    out
}

/// Symmetric gradient E_ij = (d_i u_j + d_j u_i) / 2 for a velocity field
/// with m = d. Output component `i * d + j`.
pub fn sym_gradient(u: &GridField) -> Result<GridField> {
    let d = u.dim();
    if u.components() != d {
        return Err(Error::DimensionMismatch(format!(
            "symmetric gradient needs m = d, got m = {} with d = {}",
            u.components(),
            d
        )));
    }
    let grad = spectral_gradient(u); // component c * d + a = d_a u_c
    let mut out = GridField::zeros(d * d, u.shape(), u.lengths())?;
    for node in 0..u.node_count() {
        for i in 0..d {
            for j in 0..d {
                let didj = grad.data()[node * d * d + j * d + i]; // d_i u_j
                let djdi = grad.data()[node * d * d + i * d + j]; // d_j u_i
                out.data_mut()[node * d * d + i * d + j] = 0.5 * (didj + djdi);
            }
        }
    }
    Ok(out)
}

/// Spectral divergence sum_a d_a u_a of a velocity field with m = d.
pub fn divergence(u: &GridField) -> Result<GridField> {
    let d = u.dim();
    if u.components() != d {
        return Err(Error::DimensionMismatch(format!(
            "divergence needs m = d, got m = {} with d = {}",
            u.components(),
            d
        )));
    }
    let grad = spectral_gradient(u);
    let mut out = GridField::zeros(1, u.shape(), u.lengths())?;
    for node in 0..u.node_count() {
        let mut s = 0.0;
        for a in 0..d {
            s += grad.data()[node * d * d + a * d + a];
        }
        out.data_mut()[node] = s;
    }
    Ok(out)
}
