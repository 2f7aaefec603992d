//! Linear and locally adiabatic interpolation schedules.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{grover_profile, uniform_grid, GapProfile, DEFAULT_GRID_POINTS};
use crate::num::Real;

pub const DEFAULT_EPSILON: f64 = 0.1;

/// Total time used when the coupling vanishes and nothing needs to be
/// followed adiabatically.
pub const MIN_TOTAL_TIME: f64 = 1.0;

/// `epsilon`, `g_min` and `D_max` of the global adiabatic condition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticParams<R> {
    pub epsilon: R,
    pub g_min: R,
    pub d_max: R,
}

impl<R: Real> AdiabaticParams<R> {
    pub fn new(epsilon: R, g_min: R, d_max: R) -> Result<Self> {
        check_epsilon(epsilon)?;
        if !(g_min > R::zero()) {
            return Err(Error::Schedule(format!("g_min must be positive, got {g_min}")));
        }
        Ok(Self {
            epsilon,
            g_min,
            d_max,
        })
    }

    pub fn from_profile(profile: &GapProfile<R>, epsilon: R) -> Result<Self> {
        Self::new(epsilon, profile.g_min().1, profile.d_max())
    }

    /// Time demanded by the global condition `D_max / (epsilon g_min^2)`.
    pub fn global_time(&self) -> R {
        self.d_max / (self.epsilon * self.g_min * self.g_min)
    }
}

fn check_epsilon<R: Real>(epsilon: R) -> Result<()> {
    if !(epsilon > R::zero() && epsilon < R::one()) {
        return Err(Error::Schedule(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Linear,
    Local,
}

/// Coupling used in the local rate `ds/dt = epsilon g(s)^2 / D`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingRule {
    /// `D` is the profile maximum of the coupling. The schedule slows down
    /// only because of the gap, which keeps endpoint leakage at `O(epsilon^2)`.
    #[default]
    MaxCoupling,
    /// `D = dmat(s)` pointwise. Faster, but loses about `epsilon` of
    /// amplitude at each end of the sweep where the coupling is largest
    /// relative to the rate.
    PointwiseCoupling,
}

/// Monotone map `t -> s(t)` stored as a knot table.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Schedule<R> {
    pub kind: ScheduleKind,
    pub total_time: R,
    /// `(t_j, s_j)` with `s(0) = 0` and `s(T) = 1`.
    pub knots: Vec<(R, R)>,
}

impl<R: Real> Schedule<R> {
    /// `s(t)`, clamped to `[0, 1]` outside `[0, T]`.
    pub fn s_at(&self, t: R) -> R {
        if !(t > R::zero()) {
            return R::zero();
        }
        if t >= self.total_time {
            return R::one();
        }
        let j = self.knots.partition_point(|k| k.0 <= t);
        let (t0, s0) = self.knots[j - 1];
        let (t1, s1) = self.knots[j];
        if t1 > t0 {
            s0 + (s1 - s0) * (t - t0) / (t1 - t0)
        } else {
            s1
        }
    }

    /// Inverse map `t(s)`.
    pub fn t_at(&self, s: R) -> R {
        if !(s > R::zero()) {
            return R::zero();
        }
        if s >= R::one() {
            return self.total_time;
        }
        let j = self.knots.partition_point(|k| k.1 <= s);
        let (t0, s0) = self.knots[j - 1];
        let (t1, s1) = self.knots[j];
        t0 + (t1 - t0) * (s - s0) / (s1 - s0)
    }

    /// Values `s(jT/r)` for `j = 1..=r`.
    pub fn step_values(&self, r: usize) -> Vec<R> {
        let rr = R::from_usize_lossy(r);
        (1..=r)
            .map(|j| {
                if j == r {
                    R::one()
                } else {
                    self.s_at(self.total_time * R::from_usize_lossy(j) / rr)
                }
            })
            .collect()
    }

    /// Writes `t,s` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,s")?;
        for (t, s) in &self.knots {
            writeln!(w, "{t},{s}")?;
        }
        Ok(())
    }
}

/// `s(t) = t / T`.
pub fn linear_schedule<R: Real>(total_time: R) -> Result<Schedule<R>> {
    if !(total_time > R::zero()) || !total_time.is_finite() {
        return Err(Error::Schedule(format!(
            "total time must be positive, got {total_time}"
        )));
    }
    Ok(Schedule {
        kind: ScheduleKind::Linear,
        total_time,
        knots: vec![(R::zero(), R::zero()), (total_time, R::one())],
    })
}

/// Locally adiabatic schedule with the default coupling rule.
pub fn local_schedule<R: Real>(profile: &GapProfile<R>, epsilon: R) -> Result<Schedule<R>> {
    local_schedule_with(profile, epsilon, CouplingRule::default())
}

/// Integrates `dt/ds = D / (epsilon g(s)^2)` over the profile grid by the
/// trapezoid rule.
///
/// A profile with no coupling anywhere has nothing to follow; it yields a
/// linear schedule of length [`MIN_TOTAL_TIME`].
pub fn local_schedule_with<R: Real>(
    profile: &GapProfile<R>,
    epsilon: R,
    rule: CouplingRule,
) -> Result<Schedule<R>> {
    check_epsilon(epsilon)?;
    let n = profile.len();
    if n < 2 || profile.s[0] != R::zero() || profile.s[n - 1] != R::one() {
        return Err(Error::Schedule("profile grid must cover [0, 1]".into()));
    }
    if let Some(j) = profile.flagged.iter().position(|&f| f) {
        return Err(Error::Schedule(format!(
            "degenerate ground level at s = {}",
            profile.s[j]
        )));
    }
    if let Some(j) = profile.g.iter().position(|&g| !(g > R::zero())) {
        return Err(Error::Schedule(format!("gap closes at s = {}", profile.s[j])));
    }
    let d_max = profile.d_max();
    if !(d_max > R::tolerance(1e-12)) {
        return linear_schedule(R::lit(MIN_TOTAL_TIME));
    }
    let density: Vec<R> = (0..n)
        .map(|j| {
            let d = match rule {
                CouplingRule::MaxCoupling => d_max,
                CouplingRule::PointwiseCoupling => profile.dmat[j],
            };
            let g = profile.g[j];
            if g.is_finite() {
                d / (epsilon * g * g)
            } else {
                R::zero()
            }
        })
        .collect();
    let half = R::lit(0.5);
    let mut knots = Vec::with_capacity(n);
    let mut t = R::zero();
    knots.push((t, R::zero()));
    for j in 1..n {
        let ds = profile.s[j] - profile.s[j - 1];
        if !(ds > R::zero()) {
            return Err(Error::Schedule("profile grid must be strictly increasing".into()));
        }
        t += half * ds * (density[j] + density[j - 1]);
        knots.push((t, profile.s[j]));
    }
    if !(t > R::zero()) {
        return linear_schedule(R::lit(MIN_TOTAL_TIME));
    }
    knots[n - 1].1 = R::one();
    Ok(Schedule {
        kind: ScheduleKind::Local,
        total_time: t,
        knots,
    })
}

/// Grid size that resolves the gap minimum of width `~sqrt(M/N)` with at
/// least a few dozen points.
pub fn grover_grid_points(n: usize, m: usize) -> usize {
    let f = m.max(1) as f64 / n.max(1) as f64;
    let wanted = (32.0 / f.sqrt()).ceil() as usize;
    let pow = wanted.next_power_of_two().clamp(DEFAULT_GRID_POINTS - 1, 1 << 20);
    pow + 1
}

/// Local schedule for the unstructured search of `M` marked among `N`.
pub fn grover_schedule<R: Real>(n: usize, m: usize, epsilon: R) -> Result<Schedule<R>> {
    let grid = uniform_grid(grover_grid_points(n, m));
    local_schedule(&grover_profile(n, m, &grid)?, epsilon)
}

/// Total time of [`grover_schedule`].
pub fn time_for_unstructured<R: Real>(n: usize, m: usize, epsilon: R) -> Result<R> {
    if m > n {
        return Err(Error::input(format!("M = {m} exceeds N = {n}")));
    }
    Ok(grover_schedule(n, m, epsilon)?.total_time)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_midpoint() {
        let s = linear_schedule(10.0).unwrap();
        assert_eq!(s.s_at(5.0), 0.5);
        assert_eq!(s.s_at(0.0), 0.0);
        assert_eq!(s.s_at(10.0), 1.0);
        assert!(linear_schedule(0.0).is_err());
    }

    #[test]
    fn flat_profile_reduces_to_linear() {
        let grid = uniform_grid::<f64>(11);
        let p = GapProfile {
            s: grid.clone(),
            e0: vec![0.0; 11],
            e1: vec![1.0; 11],
            g: vec![1.0; 11],
            dmat: vec![1.0; 11],
            flagged: vec![false; 11],
            dh_norm: None,
            route: crate::hilbert::GapRoute::Analytic,
        };
        let s = local_schedule(&p, 0.1).unwrap();
        assert!((s.total_time - 10.0).abs() < 1e-12);
        assert!((s.s_at(2.5) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn step_values_end_at_one() {
        let s = grover_schedule::<f64>(64, 1, 0.1).unwrap();
        let v = s.step_values(7);
        assert_eq!(v.len(), 7);
        assert_eq!(v[6], 1.0);
        assert!(v.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn inverse_map_round_trips() {
        let s = grover_schedule::<f64>(256, 1, 0.1).unwrap();
        for &x in &[0.1, 0.37, 0.5, 0.93] {
            assert!((s.s_at(s.t_at(x)) - x).abs() < 1e-9);
        }
    }

    #[test]
    fn all_marked_needs_no_search() {
        let s = grover_schedule::<f64>(8, 8, 0.1).unwrap();
        assert_eq!(s.kind, ScheduleKind::Linear);
        assert_eq!(s.total_time, MIN_TOTAL_TIME);
    }
}
