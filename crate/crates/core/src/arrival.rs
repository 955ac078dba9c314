//! Arrival-time distributions built from detector records.
//!
//! The density-based distribution is `P_X(T) = ρ_X(T) / ∫ ρ_X dT` and the
//! current-based one replaces `ρ` by the probability current `J`. Integrals
//! are trapezoidal over the recorded samples inside the window.

use crate::error::{Error, Result};
use crate::propagator::ProbeRecord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub start: f64,
    pub end: f64,
}

impl TimeWindow {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn up_to(end: f64) -> Self {
        Self { start: 0.0, end }
    }

    fn contains(&self, t: f64) -> bool {
        const SLACK: f64 = 1e-9;
        t >= self.start - SLACK && t <= self.end + SLACK
    }
}

impl Default for TimeWindow {
    fn default() -> Self {
        Self::up_to(100.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionKind {
    Density,
    Current,
    /// Occupation counting over a path ensemble.
    MultipleCounting,
    FirstPassage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalDistribution {
    pub x: f64,
    pub times: Vec<f64>,
    pub p: Vec<f64>,
    pub window: TimeWindow,
    pub kind: DistributionKind,
    /// Set when a current-based distribution goes negative somewhere.
    pub non_probabilistic: bool,
}

/// Trapezoidal `∫ f dt` over possibly non-uniform samples.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    times.windows(2).zip(values.windows(2)).map(|(t, v)| 0.5 * (t[1] - t[0]) * (v[0] + v[1])).sum()
}

fn windowed(times: &[f64], values: &[f64], window: TimeWindow) -> (Vec<f64>, Vec<f64>) {
    times.iter().zip(values).filter(|(t, _)| window.contains(**t)).map(|(t, v)| (*t, *v)).unzip()
}

impl ArrivalDistribution {
    /// Normalizes arbitrary non-negative samples `weights(T)` into a distribution.
    pub fn from_samples(
        x: f64,
        times: &[f64],
        weights: &[f64],
        window: TimeWindow,
        kind: DistributionKind,
    ) -> Result<Self> {
        if times.is_empty() || times.len() != weights.len() {
            return Err(Error::EmptyRecord);
        }
        let (times, values) = windowed(times, weights, window);
        if times.len() < 2 {
            return Err(Error::EmptyRecord);
        }
        let total = trapezoid(&times, &values);
        if !(total.abs() > 0.0) || !total.is_finite() {
            return Err(match kind {
                DistributionKind::Current => Error::ZeroTotalCurrent,
                _ => Error::ZeroTotalDensity,
            });
        }
        let non_probabilistic = values.iter().any(|&v| v < 0.0);
        let p = values.iter().map(|v| v / total).collect();
        Ok(Self { x, times, p, window, kind, non_probabilistic })
    }

    pub fn mean(&self) -> f64 {
        mean_arrival_time(self)
    }

    pub fn peak(&self) -> Result<f64> {
        distribution_peak(self)
    }

    pub fn total(&self) -> f64 {
        trapezoid(&self.times, &self.p)
    }

    /// `∫ |P_a - P_b| dT`; both distributions must share the time samples.
    pub fn l1_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.times.len(), other.times.len(), "distributions sampled on different times");
        let diff: Vec<f64> = self.p.iter().zip(&other.p).map(|(a, b)| (a - b).abs()).collect();
        trapezoid(&self.times, &diff)
    }

    /// Time below which a fraction `q` of the distribution lies.
    pub fn quantile(&self, q: f64) -> f64 {
        let mut acc = 0.0;
        for i in 1..self.times.len() {
            let dt = self.times[i] - self.times[i - 1];
            let piece = 0.5 * dt * (self.p[i] + self.p[i - 1]);
            if acc + piece >= q && piece > 0.0 {
                return self.times[i - 1] + dt * (q - acc) / piece;
            }
            acc += piece;
        }
        *self.times.last().unwrap_or(&f64::NAN)
    }
}

/// `P_X(T) = ρ_X(T) / ∫ ρ_X dT` over `window`.
pub fn arrival_distribution(record: &ProbeRecord, window: TimeWindow) -> Result<ArrivalDistribution> {
    ArrivalDistribution::from_samples(record.x, &record.times, &record.density, window, DistributionKind::Density)
}

/// `P^c_X(T) = J_X(T) / ∫ J_X dT`; flagged non-probabilistic if `J < 0` anywhere.
pub fn current_arrival_distribution(record: &ProbeRecord, window: TimeWindow) -> Result<ArrivalDistribution> {
    ArrivalDistribution::from_samples(record.x, &record.times, &record.current, window, DistributionKind::Current)
}

/// `<T>_X = ∫ T P_X(T) dT`.
pub fn mean_arrival_time(dist: &ArrivalDistribution) -> f64 {
    let tp: Vec<f64> = dist.times.iter().zip(&dist.p).map(|(t, p)| t * p).collect();
    trapezoid(&dist.times, &tp)
}

/// Location of the maximum of `P`, refined by a parabola through the
/// discrete argmax and its neighbours. Ties go to the earlier sample.
pub fn distribution_peak(dist: &ArrivalDistribution) -> Result<f64> {
    let n = dist.p.len();
    let mut best = 0;
    for i in 1..n {
        if dist.p[i] > dist.p[best] {
            best = i;
        }
    }
    if best == 0 || best + 1 == n {
        return Err(Error::PeakAtWindowEdge { t: dist.times[best] });
    }
    let (t0, t1, t2) = (dist.times[best - 1], dist.times[best], dist.times[best + 1]);
    let (p0, p1, p2) = (dist.p[best - 1], dist.p[best], dist.p[best + 1]);
    // Vertex of the interpolating parabola (Newton form, non-uniform spacing).
    let d01 = (p1 - p0) / (t1 - t0);
    let d12 = (p2 - p1) / (t2 - t1);
    let curvature = (d12 - d01) / (t2 - t0);
    if curvature >= 0.0 {
        return Ok(t1);
    }
    Ok(0.5 * (t0 + t1) - d01 / (2.0 * curvature))
}

/// `ΔT = <T>^tunnel - <T>^free`, both measured at the same detector.
pub fn delta_t(tunnel: &ArrivalDistribution, free: &ArrivalDistribution) -> Result<f64> {
    if (tunnel.x - free.x).abs() > 1e-9 {
        return Err(Error::ProbeMismatch { a: tunnel.x, b: free.x });
    }
    Ok(mean_arrival_time(tunnel) - mean_arrival_time(free))
}
