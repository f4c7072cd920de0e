//! Periodic gridded fields: construction, arithmetic, increments and norms.
//!
//! A [`GridField`] stores `m` real components per node of a uniform periodic
//! lattice in `d` ∈ {2, 3} dimensions. Nodes are laid out row-major with
//! axis 0 slowest and the component index fastest-varying. Every access with
//! an out-of-range lattice index wraps modulo the axis size.

use crate::error::{Error, Result};
use crate::util::KahanSum;

#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    d: usize,
    m: usize,
    n: Vec<usize>,
    l: Vec<f64>,
    data: Vec<f64>,
}

impl GridField {
    /// Build a field from raw samples, validating shape and finiteness.
    pub fn new(m: usize, n: &[usize], l: &[f64], data: Vec<f64>) -> Result<Self> {
        let d = n.len();
        if !(d == 2 || d == 3) {
            return Err(Error::InvalidParameter(format!(
                "spatial dimension must be 2 or 3, got {d}"
            )));
        }
        if l.len() != d {
            return Err(Error::DimensionMismatch(format!(
                "{} axis lengths for {} axes",
                l.len(),
                d
            )));
        }
        if m == 0 {
            return Err(Error::InvalidParameter("component count must be >= 1".into()));
        }
        for (axis, &ni) in n.iter().enumerate() {
            if ni < 4 {
                return Err(Error::InvalidParameter(format!(
                    "axis {axis} has {ni} samples, need at least 4"
                )));
            }
        }
        for (axis, &li) in l.iter().enumerate() {
            if !(li > 0.0) || !li.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "axis {axis} length {li} must be positive and finite"
                )));
            }
        }
        let nodes: usize = n.iter().product();
        if data.len() != nodes * m {
            return Err(Error::DimensionMismatch(format!(
                "data length {} does not match m * prod(n) = {}",
                data.len(),
                nodes * m
            )));
        }
        let field = Self {
            d,
            m,
            n: n.to_vec(),
            l: l.to_vec(),
            data,
        };
        if let Some(flat) = field.data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                node: field.decode(flat / m),
                component: flat % m,
            });
        }
        Ok(field)
    }

    pub fn zeros(m: usize, n: &[usize], l: &[f64]) -> Result<Self> {
        let nodes: usize = n.iter().product();
        Self::new(m, n, l, vec![0.0; nodes * m])
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn components(&self) -> usize {
        self.m
    }

    pub fn shape(&self) -> &[usize] {
        &self.n
    }

    pub fn lengths(&self) -> &[f64] {
        &self.l
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.l[axis] / self.n[axis] as f64
    }

    pub fn spacings(&self) -> Vec<f64> {
        (0..self.d).map(|a| self.spacing(a)).collect()
    }

    pub fn node_count(&self) -> usize {
        self.n.iter().product()
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.d).map(|a| self.spacing(a)).product()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// True when both fields live on the identical grid (shape and lengths).
    pub fn same_grid(&self, other: &GridField) -> bool {
        self.n == other.n && self.l == other.l
    }

    /// Flat node index of lattice coordinates (no wrapping).
    #[inline]
    pub fn encode(&self, coords: &[usize]) -> usize {
        let mut idx = 0;
        for a in 0..self.d {
            idx = idx * self.n[a] + coords[a];
        }
        idx
    }

    /// Lattice coordinates of a flat node index.
    #[inline]
    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut coords = vec![0usize; self.d];
        for a in (0..self.d).rev() {
            coords[a] = idx % self.n[a];
            idx /= self.n[a];
        }
        coords
    }

    /// Samples of one node as a slice of `m` components.
    #[inline]
    pub fn node(&self, idx: usize) -> &[f64] {
        &self.data[idx * self.m..(idx + 1) * self.m]
    }

    /// Value at lattice coordinates with periodic wrapping of each index.
    pub fn value_wrapped(&self, coords: &[i64], component: usize) -> f64 {
        let mut idx = 0usize;
        for a in 0..self.d {
            let n = self.n[a] as i64;
            let k = coords[a].rem_euclid(n) as usize;
            idx = idx * self.n[a] + k;
        }
        self.data[idx * self.m + component]
    }

    /// Physical position of a node.
    pub fn position(&self, coords: &[usize]) -> Vec<f64> {
        (0..self.d)
            .map(|a| coords[a] as f64 * self.spacing(a))
            .collect()
    }

    /// Flat index of the node shifted by lattice offset `k`, with wrap.
    #[inline]
    pub fn shifted_index(&self, coords: &[usize], k: &[i64]) -> usize {
        let mut idx = 0usize;
        for a in 0..self.d {
            let n = self.n[a] as i64;
            let mut c = coords[a] as i64 + k[a];
            if c >= n {
                c -= n;
                if c >= n {
                    c = c.rem_euclid(n);
                }
            } else if c < 0 {
                c += n;
                if c < 0 {
                    c = c.rem_euclid(n);
                }
            }
            idx = idx * self.n[a] + c as usize;
        }
        idx
    }

    /// Euclidean magnitude over components at one node.
    #[inline]
    pub fn magnitude(&self, idx: usize) -> f64 {
        self.node(idx).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Per-component mean over all nodes.
    pub fn mean(&self) -> Vec<f64> {
        let mut sums = vec![KahanSum::new(); self.m];
        for node in 0..self.node_count() {
            for c in 0..self.m {
                sums[c].add(self.data[node * self.m + c]);
            }
        }
        let inv = 1.0 / self.node_count() as f64;
        sums.iter().map(|s| s.total() * inv).collect()
    }

    /// Extract one component as a scalar field.
    pub fn component(&self, c: usize) -> GridField {
        let data = (0..self.node_count())
            .map(|node| self.data[node * self.m + c])
            .collect();
        GridField {
            d: self.d,
            m: 1,
            n: self.n.clone(),
            l: self.l.clone(),
            data,
        }
    }

    /// Stack scalar/vector fields on one grid into a single multi-component field.
    pub fn from_components(parts: &[&GridField]) -> Result<GridField> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidParameter("no components given".into()))?;
        let m: usize = parts.iter().map(|p| p.m).sum();
        let mut data = Vec::with_capacity(first.node_count() * m);
        for p in parts {
            if !p.same_grid(first) {
                return Err(Error::GridMismatch("component grids differ".into()));
            }
        }
        for node in 0..first.node_count() {
            for p in parts {
                data.extend_from_slice(p.node(node));
            }
        }
        Ok(GridField {
            d: first.d,
            m,
            n: first.n.clone(),
            l: first.l.clone(),
            data,
        })
    }

    /// Pointwise map over (node samples) -> new samples of width `m_out`.
    pub fn map(&self, m_out: usize, f: impl Fn(&[f64], &mut [f64])) -> GridField {
        let mut data = vec![0.0; self.node_count() * m_out];
        for node in 0..self.node_count() {
            f(self.node(node), &mut data[node * m_out..(node + 1) * m_out]);
        }
        GridField {
            d: self.d,
            m: m_out,
            n: self.n.clone(),
            l: self.l.clone(),
            data,
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_map(
        &self,
        other: &GridField,
        m_out: usize,
        f: impl Fn(&[f64], &[f64], &mut [f64]),
    ) -> Result<GridField> {
        if !self.same_grid(other) {
            return Err(Error::GridMismatch("zip_map on different grids".into()));
        }
        let mut data = vec![0.0; self.node_count() * m_out];
        for node in 0..self.node_count() {
            f(
                self.node(node),
                other.node(node),
                &mut data[node * m_out..(node + 1) * m_out],
            );
        }
        Ok(GridField {
            d: self.d,
            m: m_out,
            n: self.n.clone(),
            l: self.l.clone(),
            data,
        })
    }

    pub fn add(&self, other: &GridField) -> Result<GridField> {
        self.zip_map(other, self.m, |a, b, out| {
            for c in 0..a.len() {
                out[c] = a[c] + b[c];
            }
        })
    }

    pub fn sub(&self, other: &GridField) -> Result<GridField> {
        self.zip_map(other, self.m, |a, b, out| {
            for c in 0..a.len() {
                out[c] = a[c] - b[c];
            }
        })
    }

    pub fn scale(&self, factor: f64) -> GridField {
        self.map(self.m, |a, out| {
            for c in 0..a.len() {
                out[c] = factor * a[c];
            }
        })
    }

    /// Add a constant vector (length `m`) to every node.
    pub fn shift_by_constant(&self, c: &[f64]) -> GridField {
        self.map(self.m, |a, out| {
            for i in 0..a.len() {
                out[i] = a[i] + c[i];
            }
        })
    }

    /// Max over nodes of the Euclidean component magnitude.
    pub fn max_magnitude(&self) -> f64 {
        (0..self.node_count())
            .map(|i| self.magnitude(i))
            .fold(0.0, f64::max)
    }
}

/// Sample a pointwise function onto the lattice. `f` receives the physical
/// node position and writes `m` components.
pub fn sample_function(
    m: usize,
    n: &[usize],
    l: &[f64],
    f: impl Fn(&[f64], &mut [f64]),
) -> Result<GridField> {
    let mut field = GridField::zeros(m, n, l)?;
    let d = field.dim();
    let nodes = field.node_count();
    let mut pos = vec![0.0; d];
    for node in 0..nodes {
        let coords = field.decode(node);
        for a in 0..d {
            pos[a] = coords[a] as f64 * field.spacing(a);
        }
        let out = &mut field.data_mut()[node * m..(node + 1) * m];
        f(&pos, out);
        for (c, v) in out.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    node: coords,
                    component: c,
                });
            }
        }
    }
    Ok(field)
}

/// Increment field delta_k u with node x holding u(x + k*h) - u(x).
pub fn increment(u: &GridField, k: &[i64]) -> Result<GridField> {
    if k.len() != u.dim() {
        return Err(Error::DimensionMismatch(format!(
            "offset has {} entries for {} axes",
            k.len(),
            u.dim()
        )));
    }
    for (a, &ka) in k.iter().enumerate() {
        if ka.unsigned_abs() as usize >= u.shape()[a] {
            return Err(Error::InvalidParameter(format!(
                "offset component {ka} exceeds the grid extent {} on axis {a}",
                u.shape()[a]
            )));
        }
    }
    let m = u.components();
    let mut out = GridField::zeros(m, u.shape(), u.lengths())?;
    for node in 0..u.node_count() {
        let coords = u.decode(node);
        let src = u.shifted_index(&coords, k);
        for c in 0..m {
            out.data_mut()[node * m + c] = u.data()[src * m + c] - u.data()[node * m + c];
        }
    }
    Ok(out)
}

/// Discrete L^p norm with cell-volume weights; `p = f64::INFINITY` gives the
/// max norm. The pointwise magnitude is Euclidean over components.
pub fn lp_norm(u: &GridField, p: f64) -> Result<f64> {
    if p.is_infinite() && p > 0.0 {
        return Ok(u.max_magnitude());
    }
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "L^p exponent must satisfy p >= 1 or be infinite, got {p}"
        )));
    }
    let mut acc = KahanSum::new();
    for node in 0..u.node_count() {
        acc.add(u.magnitude(node).powf(p));
    }
    Ok((acc.total() * u.cell_volume()).powf(1.0 / p))
}

/// A time-ordered sequence of snapshots on one common grid.
#[derive(Clone, Debug)]
pub struct TimeSeriesField {
    times: Vec<f64>,
    snapshots: Vec<GridField>,
}

impl TimeSeriesField {
    pub fn new(times: Vec<f64>, snapshots: Vec<GridField>) -> Result<Self> {
        if times.len() != snapshots.len() || times.is_empty() {
            return Err(Error::InvalidParameter(
                "need equally many times and snapshots, at least one".into(),
            ));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter(
                "times must be strictly increasing".into(),
            ));
        }
        let first = &snapshots[0];
        for s in &snapshots[1..] {
            if !s.same_grid(first) || s.components() != first.components() {
                return Err(Error::GridMismatch(
                    "snapshots must share shape, lengths and component count".into(),
                ));
            }
        }
        Ok(Self { times, snapshots })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[GridField] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest gap between consecutive snapshot times.
    pub fn max_spacing(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Trapezoid quadrature weight of snapshot `i` over the covered interval.
    pub fn time_weight(&self, i: usize) -> f64 {
        let t = &self.times;
        if t.len() == 1 {
            return 1.0;
        }
        let lo = if i == 0 { t[0] } else { (t[i - 1] + t[i]) / 2.0 };
        let hi = if i + 1 == t.len() {
            t[t.len() - 1]
        } else {
            (t[i] + t[i + 1]) / 2.0
        };
        hi - lo
    }

    /// Trapezoid-in-time L^1 of per-snapshot scalar values.
    pub fn time_l1(&self, per_snapshot: &[f64]) -> f64 {
        per_snapshot
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.time_weight(i))
            .sum()
    }
}
