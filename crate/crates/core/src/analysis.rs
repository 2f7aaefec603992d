//! Complexity model of the nested search over random constraint problems:
//! satisfaction probability of a prefix, the optimal partition fraction
//! and predicted running times, plus log-log scaling fits.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::brent_min;

/// Default critical constrainedness for random 3-SAT ensembles.
pub const DEFAULT_BETA_C: f64 = 4.25;

/// Best known classical exponent for 3-SAT, `O(2^{0.45 n})`.
pub const CLASSICAL_3SAT_EXPONENT: f64 = 0.45;

/// Parameters of an ensemble of structured problems.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityModel {
    pub d: usize,
    pub n_ab: usize,
    pub k: usize,
    pub beta: f64,
    pub beta_c: f64,
}

impl ComplexityModel {
    pub fn new(d: usize, n_ab: usize, k: usize, beta: f64, beta_c: f64) -> Result<Self> {
        if d < 2 || n_ab == 0 || k == 0 {
            return Err(Error::input(format!(
                "need d >= 2, n_ab >= 1, k >= 1; got d={d}, n_ab={n_ab}, k={k}"
            )));
        }
        if !(beta >= 0.0) || !(beta_c > 0.0) {
            return Err(Error::input(format!(
                "need beta >= 0 and beta_c > 0; got {beta}, {beta_c}"
            )));
        }
        Ok(Self {
            d,
            n_ab,
            k,
            beta,
            beta_c,
        })
    }

    pub fn beta_ratio(&self) -> f64 {
        self.beta / self.beta_c
    }

    /// `a = sqrt(d^{n_ab})`.
    pub fn a(&self) -> f64 {
        self.ln_a().exp()
    }

    pub fn ln_a(&self) -> f64 {
        0.5 * self.n_ab as f64 * (self.d as f64).ln()
    }

    /// Root of the large-`a` optimality equation.
    pub fn alpha(&self) -> f64 {
        solve_alpha(self.k, self.beta_ratio())
    }

    /// `ln T(x)` with `T(x) = (a^x + a^{1 - b x^k}) / a^{1 - b}`.
    pub fn ln_predicted_time(&self, x: f64) -> f64 {
        let b = self.beta_ratio();
        let la = self.ln_a();
        let (u, v) = (x * la, (1.0 - b * x.powi(self.k as i32)) * la);
        let hi = u.max(v);
        hi + ((u - hi).exp() + (v - hi).exp()).ln() - (1.0 - b) * la
    }
}

/// `p(n) = d^{-n_ab (beta/beta_c) (n/n_ab)^k}`: probability that a random
/// assignment of the first `n` variables satisfies the constraints among them.
pub fn p_model(n: usize, model: &ComplexityModel) -> f64 {
    let frac = n as f64 / model.n_ab as f64;
    let exponent = model.n_ab as f64 * model.beta_ratio() * frac.powi(model.k as i32);
    (model.d as f64).powf(-exponent)
}

/// Root in `[0, 1]` of `(beta/beta_c) x^k + x - 1 = 0`, by bisection.
///
/// # Panics
/// If `k == 0` or `beta_ratio` is negative or not finite.
pub fn solve_alpha(k: usize, beta_ratio: f64) -> f64 {
    assert!(k >= 1, "k must be at least 1");
    assert!(
        beta_ratio >= 0.0 && beta_ratio.is_finite(),
        "beta ratio must be finite and non-negative"
    );
    if beta_ratio == 0.0 {
        return 1.0;
    }
    let f = |x: f64| beta_ratio * x.powi(k as i32) + x - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Minimizer of the predicted time over `x in [0, 1]` without the large-`a`
/// reduction. At an interior minimum this is the root of
/// `(beta/beta_c) k x^{k-1} = a^{(beta/beta_c) x^k + x - 1}`.
pub fn solve_alpha_exact(model: &ComplexityModel) -> f64 {
    const SCAN: usize = 4096;
    let f = |x: f64| model.ln_predicted_time(x);
    let (mut best_j, mut best) = (0, f(0.0));
    for j in 1..=SCAN {
        let v = f(j as f64 / SCAN as f64);
        if v < best {
            best = v;
            best_j = j;
        }
    }
    let lo = best_j.saturating_sub(1) as f64 / SCAN as f64;
    let hi = (best_j + 1).min(SCAN) as f64 / SCAN as f64;
    let (x, fx) = brent_min(f, lo, hi, 1e-12, 200);
    if fx <= best {
        x
    } else {
        best_j as f64 / SCAN as f64
    }
}

/// `(a^x + a^{1 - b x^k}) / a^{1 - b}` with `b = beta/beta_c`.
pub fn predicted_time(model: &ComplexityModel, x: f64) -> f64 {
    model.ln_predicted_time(x).exp()
}

/// Growth exponent of `T = O(2^{c n_ab})` at `beta = beta_c`:
/// `c = alpha log2(d) / 2`.
pub fn critical_exponent_log2(d: usize, k: usize) -> f64 {
    0.5 * solve_alpha(k, 1.0) * (d as f64).log2()
}

/// `round(alpha n_ab)` clamped to `[1, n_ab - 1]`.
pub fn optimal_partition(n_ab: usize, k: usize, beta_ratio: f64) -> Result<usize> {
    if n_ab < 2 {
        return Err(Error::input(format!("need at least two variables, got {n_ab}")));
    }
    let n_a = (solve_alpha(k, beta_ratio) * n_ab as f64).round() as usize;
    Ok(n_a.clamp(1, n_ab - 1))
}

/// Least-squares line through `(ln size, ln time)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub sizes: Vec<f64>,
    pub times: Vec<f64>,
    pub exponent: f64,
    pub log_prefactor: f64,
    /// Root-mean-square residual in `ln time`.
    pub residual: f64,
}

pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 4 {
        return Err(Error::input(format!(
            "scaling fit needs at least 4 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(s, t)| !(s > 0.0) || !(t > 0.0)) {
        return Err(Error::input("scaling fit needs positive sizes and times"));
    }
    if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::input("scaling fit needs strictly increasing sizes"));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(ScalingFit {
        sizes: points.iter().map(|p| p.0).collect(),
        times: points.iter().map(|p| p.1).collect(),
        exponent: slope,
        log_prefactor: intercept,
        residual: (rss / n).sqrt(),
    })
}

/// Writes `x,predicted_time,log2_time` on `points` equispaced values of `x`.
pub fn write_model_csv<W: Write>(model: &ComplexityModel, points: usize, mut w: W) -> Result<()> {
    writeln!(w, "x,predicted_time,log2_time")?;
    let last = points.max(2) - 1;
    for j in 0..=last {
        let x = j as f64 / last as f64;
        let lt = model.ln_predicted_time(x);
        writeln!(w, "{x},{},{}", lt.exp(), lt / std::f64::consts::LN_2)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_reference_values() {
        assert!((solve_alpha(2, 1.0) - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-11);
        assert!((solve_alpha(1, 1.0) - 0.5).abs() < 1e-11);
        assert_eq!(solve_alpha(3, 0.0), 1.0);
    }

    #[test]
    fn p_model_edges() {
        let m = ComplexityModel::new(2, 10, 3, 4.25, 4.25).unwrap();
        assert_eq!(p_model(0, &m), 1.0);
        let free = ComplexityModel::new(2, 10, 3, 0.0, 4.25).unwrap();
        assert_eq!(p_model(7, &free), 1.0);
        assert!((p_model(10, &m) - 2f64.powi(-10)).abs() < 1e-15);
    }

    #[test]
    fn partition_clamps() {
        assert_eq!(optimal_partition(12, 3, 1.0).unwrap(), 8);
        assert_eq!(optimal_partition(12, 3, 0.0).unwrap(), 11);
        assert_eq!(optimal_partition(2, 3, 1.0).unwrap(), 1);
        assert!(optimal_partition(1, 3, 1.0).is_err());
    }

    #[test]
    fn exact_fit_recovers_exponent() {
        let pts: Vec<(f64, f64)> = (4..10)
            .map(|j| {
                let s = (1u64 << j) as f64;
                (s, 3.0 * s.sqrt())
            })
            .collect();
        let fit = fit_scaling(&pts).unwrap();
        assert!((fit.exponent - 0.5).abs() < 1e-12);
        assert!(fit_scaling(&pts[..3]).is_err());
    }

    #[test]
    fn unstructured_limit() {
        let m = ComplexityModel::new(2, 20, 3, 4.25, 4.25).unwrap();
        // x = 1 at beta = beta_c: (a + a^0) / a^0
        assert!((predicted_time(&m, 1.0) - (m.a() + 1.0)).abs() < 1e-6);
    }
}
