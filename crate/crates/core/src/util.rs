//! Small numeric helpers shared across modules: compensated summation,
//! composite-Simpson quadrature and least-squares power-law fits.

use serde::Serialize;

/// Neumaier-compensated accumulator. Keeps the rounding error of long sums
/// with heavy cancellation at the level of a single ulp of the term budget.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Composite Simpson rule on [a, b] with `intervals` subdivisions
/// (rounded up to an even count).
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals.max(2).next_multiple_of(2);
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Ordinary least-squares line fit together with its coefficient of
/// determination.
#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct FitLine {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// OLS fit of y against x. Returns `None` for fewer than two points or a
/// degenerate abscissa.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<FitLine> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| x * y).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return None;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let y_mean = sy / n;
    let ss_tot: f64 = ys.iter().map(|y| (y - y_mean).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - (slope * x + intercept)).powi(2))
        .sum();
    let r2 = if ss_tot < 1e-300 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Some(FitLine {
        slope,
        intercept,
        r2,
    })
}

/// Log-log power-law fit. All values must be strictly positive;
/// returns `None` otherwise.
pub fn fit_loglog(scales: &[f64], values: &[f64]) -> Option<FitLine> {
    if scales.iter().any(|&s| s <= 0.0) || values.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let xs: Vec<f64> = scales.iter().map(|s| s.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    fit_line(&xs, &ys)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_cancels_pairs() {
        let mut s = KahanSum::new();
        let xs = [1e16, 1.0, -1e16, 3.0, 0.25, -0.25, -3.0, -1.0];
        for x in xs {
            s.add(x);
        }
        assert_eq!(s.total(), 0.0);
    }

    #[test]
    fn simpson_integrates_cubic_exactly() {
        let v = simpson(|x| x * x * x, 0.0, 2.0, 8);
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn fit_recovers_power_law() {
        let scales = [1.0, 2.0, 4.0, 8.0];
        let values: Vec<f64> = scales.iter().map(|&s: &f64| 3.0 * s.powf(1.7)).collect();
        let fit = fit_loglog(&scales, &values).unwrap();
        assert!((fit.slope - 1.7).abs() < 1e-10);
        assert!((fit.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_nonpositive_values() {
        assert!(fit_loglog(&[1.0, 2.0, 4.0], &[1.0, 0.0, 2.0]).is_none());
    }
}
