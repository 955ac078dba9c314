//! Closed-form scattering off a square barrier.
//!
//! For a barrier of height `h` on `[a, a + d]` and incident `e^{ikx}`, the
//! transmitted wave beyond the barrier is written `T_k e^{ikx}`, so the
//! phase `θ = arg T_k` already contains the traversal of the barrier region.
//! With `q² = k² - 2h` and `D = cos(qd) - i (k² + q²)/(2kq) sin(qd)`:
//!
//! ```text
//! T_k = e^{-ikd} / D
//! R_k = e^{2ika} i (q² - k²)/(2kq) sin(qd) / D
//! ```
//!
//! Below the top (`q = iκ`) the trigonometric functions turn hyperbolic; both
//! branches are evaluated through `sin(z)/z` and `tanh(z)/z` so they meet
//! smoothly at `k² = 2h`, where the interior solution is linear.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{BarrierSpec, PacketSpec};
use crate::quadrature::{integrate_extending, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmissionResult {
    pub k: f64,
    /// Complex transmission amplitude `T_k`.
    pub amplitude: Complex64,
    /// Complex reflection amplitude `R_k`.
    pub reflection: Complex64,
    pub magnitude: f64,
    /// `arg T_k` on the branch continuous in `k` with `θ → 0` as `d → 0`.
    pub phase: f64,
    pub reflection_magnitude: f64,
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

fn tanhc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z * z / 3.0
    } else {
        z.tanh() / z
    }
}

/// Transmission and reflection amplitudes at wavenumber `k > 0`.
pub fn transmission(k: f64, barrier: &BarrierSpec) -> Result<TransmissionResult> {
    if !(k > 0.0) {
        return Err(Error::NonPositiveWavenumber(k));
    }
    if barrier.is_free() {
        let one = Complex64::new(1.0, 0.0);
        return Ok(TransmissionResult {
            k,
            amplitude: one,
            reflection: Complex64::new(0.0, 0.0),
            magnitude: 1.0,
            phase: 0.0,
            reflection_magnitude: 0.0,
        });
    }
    let d = barrier.width;
    let h = barrier.height;
    let q2 = k * k - 2.0 * h;
    let i = Complex64::i();

    // Everything below is D and the reflection numerator divided by a common
    // factor (cosh κd in the tunneling branch) so nothing overflows.
    let (scale, denominator, refl_num, arg_d) = if q2 >= 0.0 {
        let q = q2.sqrt();
        let z = q * d;
        // α sin(qd) and δ sin(qd) with α = (k²+q²)/2kq, δ = (q²-k²)/2kq.
        let alpha_sin = (k * k + q2) / (2.0 * k) * d * sinc(z);
        let delta_sin = (q2 - k * k) / (2.0 * k) * d * sinc(z);
        let den = Complex64::new(z.cos(), -alpha_sin);
        // arg(cos z - i α sin z) continued through every zero of cos z.
        let alpha_tan = alpha_sin / z.cos();
        let arg = -(alpha_tan.atan() + PI * (z / PI).round());
        (1.0, den, i * delta_sin, arg)
    } else {
        let kappa = (-q2).sqrt();
        let z = kappa * d;
        let sech = 1.0 / z.cosh();
        // β tanh(κd), γ tanh(κd) with β = (κ²-k²)/2kκ, γ = (κ²+k²)/2kκ.
        let beta_th = (kappa * kappa - k * k) / (2.0 * k) * d * tanhc(z);
        let gamma_th = (kappa * kappa + k * k) / (2.0 * k) * d * tanhc(z);
        let den = Complex64::new(1.0, beta_th);
        (sech, den, -i * gamma_th, beta_th.atan())
    };

    let amplitude = Complex64::from_polar(scale, -k * d) / denominator;
    let reflection = Complex64::from_polar(1.0, 2.0 * k * barrier.left_edge) * refl_num / denominator;
    Ok(TransmissionResult {
        k,
        amplitude,
        reflection,
        magnitude: amplitude.norm(),
        phase: -k * d - arg_d,
        reflection_magnitude: reflection.norm(),
    })
}

/// Unwraps `arg T_k` along a uniform mesh starting at `k_start`, adding
/// `2π` whenever successive principal values jump by more than `π`.
pub fn unwrapped_phase_mesh(barrier: &BarrierSpec, k_start: f64, k_end: f64, dk: f64) -> Result<Vec<(f64, f64)>> {
    let n = ((k_end - k_start) / dk).ceil() as usize;
    let mut out = Vec::with_capacity(n + 1);
    let mut offset = 0.0;
    let mut last_raw: Option<f64> = None;
    for j in 0..=n {
        let k = k_start + j as f64 * dk;
        let raw = transmission(k, barrier)?.amplitude.arg();
        if let Some(prev) = last_raw {
            let jump = raw - prev;
            if jump > PI {
                offset -= 2.0 * PI;
            } else if jump < -PI {
                offset += 2.0 * PI;
            }
        }
        last_raw = Some(raw);
        out.push((k, raw + offset));
    }
    Ok(out)
}

/// Which power of `e^{-σ²(k-k0)²/2}|T_k|` weights the transmitted momenta.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomentumWeight {
    /// `[e^{-σ²(k-k0)²/2}|T_k|]²`, a modulus squared.
    #[default]
    Squared,
    /// `e^{-σ²(k-k0)²/2}|T_k|` taken literally.
    Amplitude,
}

const MOMENTUM_TOL: Tolerance = Tolerance { abs: 0.0, rel: 1e-10, max_segments: 20_000 };

fn momentum_weight(spec: &PacketSpec, barrier: &BarrierSpec, weight: MomentumWeight, k: f64) -> f64 {
    if k <= 0.0 {
        return 0.0;
    }
    let t = transmission(k, barrier).map(|r| r.magnitude).unwrap_or(0.0);
    let g = (-0.5 * spec.sigma * spec.sigma * (k - spec.k0).powi(2)).exp() * t;
    match weight {
        MomentumWeight::Squared => g * g,
        MomentumWeight::Amplitude => g,
    }
}

fn integrate_over_k<F: Fn(f64) -> f64>(spec: &PacketSpec, f: F) -> f64 {
    let reach = 8.0 / spec.sigma;
    integrate_extending(f, spec.k0 - reach, spec.k0 + reach, 0.0, reach, 1e-12, MOMENTUM_TOL).value
}

/// Mean momentum `k_m` of the transmitted packet.
pub fn transmitted_momentum(spec: &PacketSpec, barrier: &BarrierSpec) -> Result<f64> {
    transmitted_momentum_with(spec, barrier, MomentumWeight::default())
}

pub fn transmitted_momentum_with(spec: &PacketSpec, barrier: &BarrierSpec, weight: MomentumWeight) -> Result<f64> {
    spec.validate()?;
    let mass = integrate_over_k(spec, |k| momentum_weight(spec, barrier, weight, k));
    if !(mass > 0.0) || !mass.is_finite() {
        return Err(Error::VanishingTransmission);
    }
    let first = integrate_over_k(spec, |k| k * momentum_weight(spec, barrier, weight, k));
    Ok(first / mass)
}

/// Total transmitted probability `∫ (σ/√π) e^{-σ²(k-k0)²} |T_k|² dk`.
pub fn transmitted_probability(spec: &PacketSpec, barrier: &BarrierSpec) -> f64 {
    let norm = spec.sigma / PI.sqrt();
    norm * integrate_over_k(spec, |k| momentum_weight(spec, barrier, MomentumWeight::Squared, k))
}

/// Finite-difference step for `dθ/dk`.
pub const PHASE_STEP: f64 = 1e-4;

/// `τ_φ = dθ/dω` at the transmitted mean energy, as `(dθ/dk) / k` at `k_m`.
pub fn phase_time(spec: &PacketSpec, barrier: &BarrierSpec) -> Result<f64> {
    let k_m = transmitted_momentum(spec, barrier)?;
    phase_time_at(barrier, k_m, PHASE_STEP)
}

/// Central-difference `(dθ/dk)/k` at `k` with step `dk`.
pub fn phase_time_at(barrier: &BarrierSpec, k: f64, dk: f64) -> Result<f64> {
    let lo = transmission(k - dk, barrier)?.phase;
    let hi = transmission(k + dk, barrier)?.phase;
    if (hi - lo).abs() > 0.5 * PI {
        return Err(Error::PhaseDiscontinuity { k });
    }
    Ok((hi - lo) / (2.0 * dk) / k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransmittedStats {
    pub k_m: f64,
    pub omega_m: f64,
    pub tau_phi: f64,
    pub delta_t_phi: f64,
}

/// `k_m`, `ω_m`, `τ_φ` and the stationary-phase arrival difference in one pass.
pub fn transmitted_stats(spec: &PacketSpec, barrier: &BarrierSpec) -> Result<TransmittedStats> {
    transmitted_stats_with(spec, barrier, MomentumWeight::Squared)
}

pub fn transmitted_stats_with(
    spec: &PacketSpec,
    barrier: &BarrierSpec,
    weight: MomentumWeight,
) -> Result<TransmittedStats> {
    let k_m = transmitted_momentum_with(spec, barrier, weight)?;
    let tau_phi = phase_time_at(barrier, k_m, PHASE_STEP)?;
    let delta_t_phi = (1.0 / k_m - 1.0 / spec.k0) * (barrier.right_edge() - spec.x0) + tau_phi;
    Ok(TransmittedStats { k_m, omega_m: 0.5 * k_m * k_m, tau_phi, delta_t_phi })
}

/// `ΔT_φ = (1/v_g(k_m) - 1/v_g(k0))(d - x0) + τ_φ` with `v_g(k) = k`.
pub fn stationary_phase_delta(spec: &PacketSpec, barrier: &BarrierSpec) -> Result<f64> {
    Ok(transmitted_stats(spec, barrier)?.delta_t_phi)
}

const PACKET_TOL: Tolerance = Tolerance { abs: 1e-13, rel: 1e-10, max_segments: 20_000 };

/// Transmitted packet at `(x, t)` from its momentum representation:
/// `(4πσ²)^{1/4} ∫ dk/2π e^{-σ²(k-k0)²/2} T_k e^{i[k(x-x0) - k²t/2]}`.
pub fn transmitted_packet(spec: &PacketSpec, barrier: &BarrierSpec, x: f64, t: f64) -> Result<Complex64> {
    spec.validate()?;
    let exit = barrier.right_edge();
    if !(x > exit) {
        return Err(Error::NotBeyondBarrier { x, exit });
    }
    let prefactor = (4.0 * PI * spec.sigma * spec.sigma).powf(0.25) / (2.0 * PI);
    let s2 = spec.sigma * spec.sigma;
    let integrand = |k: f64| {
        if k <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let tk = transmission(k, barrier).map(|r| r.amplitude).unwrap_or_default();
        let envelope = (-0.5 * s2 * (k - spec.k0).powi(2)).exp();
        tk * Complex64::from_polar(envelope, k * (x - spec.x0) - 0.5 * k * k * t)
    };
    let reach = 8.0 / spec.sigma;
    let est = integrate_extending(integrand, spec.k0 - reach, spec.k0 + reach, 0.0, reach, 1e-8, PACKET_TOL);
    Ok(est.value * prefactor)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::mean_energy;
    use crate::propagator::free_gaussian_reference;
    use proptest::prelude::*;

    /// RK4 integration of ψ'' = 2(V - k²/2)ψ from the exit, where ψ = e^{ikx},
    /// back to the entrance; then split into incident and reflected waves.
    fn shooting_oracle(k: f64, barrier: &BarrierSpec) -> (Complex64, Complex64) {
        let a = barrier.left_edge;
        let b = barrier.right_edge();
        let n = 20_000;
        let step = -(b - a) / n as f64;
        let i = Complex64::i();
        // The whole integration runs inside the barrier.
        let rhs = |_x: f64, y: [Complex64; 2]| [y[1], y[0] * (2.0 * barrier.height - k * k)];
        let mut y = [Complex64::from_polar(1.0, k * b), i * k * Complex64::from_polar(1.0, k * b)];
        let mut x = b;
        for _ in 0..n {
            let k1 = rhs(x, y);
            let k2 = rhs(x + 0.5 * step, [y[0] + k1[0] * (0.5 * step), y[1] + k1[1] * (0.5 * step)]);
            let k3 = rhs(x + 0.5 * step, [y[0] + k2[0] * (0.5 * step), y[1] + k2[1] * (0.5 * step)]);
            let k4 = rhs(x + step, [y[0] + k3[0] * step, y[1] + k3[1] * step]);
            for j in 0..2 {
                y[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (step / 6.0);
            }
            x += step;
        }
        // ψ = A e^{ikx} + B e^{-ikx} at x = a.
        let fwd = (y[0] + y[1] / (i * k)) * 0.5;
        let bwd = (y[0] - y[1] / (i * k)) * 0.5;
        let incident = fwd * Complex64::from_polar(1.0, -k * a);
        let reflected = bwd * Complex64::from_polar(1.0, k * a);
        (incident.inv(), reflected / incident)
    }

    #[test]
    fn no_barrier() {
        let r = transmission(1.7, &BarrierSpec::free()).unwrap();
        assert_eq!(r.magnitude, 1.0);
        assert_eq!(r.phase, 0.0);
        assert!(transmission(0.0, &BarrierSpec::free()).is_err());
    }

    #[test]
    fn threshold_value() {
        let barrier = BarrierSpec::new(2.0, 1.0).unwrap();
        let r = transmission(2.0, &barrier).unwrap();
        assert!((r.magnitude.powi(2) - 0.5).abs() < 1e-14);
        let (t, _) = shooting_oracle(2.0, &barrier);
        assert!((t.norm_sqr() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn amplitudes_match_shooting() {
        for &(k, h, d, a) in &[
            (2.0, 4.005, 1.0, 0.0),
            (2.0, 4.005, 4.0, 0.0),
            (2.5, 1.0, 3.0, 0.0),
            (1.2, 0.5, 7.3, -2.0),
            (2.1, 2.2, 0.5, 1.5),
        ] {
            let barrier = BarrierSpec { height: h, width: d, left_edge: a };
            let r = transmission(k, &barrier).unwrap();
            let (t, refl) = shooting_oracle(k, &barrier);
            assert!((r.amplitude - t).norm() < 1e-9 * t.norm().max(1e-3), "T at {k},{h},{d}: {} vs {t}", r.amplitude);
            assert!((r.reflection - refl).norm() < 1e-9, "R at {k},{h},{d}: {} vs {refl}", r.reflection);
        }
    }

    #[test]
    fn phase_is_continuous_across_threshold() {
        let barrier = BarrierSpec::new(2.0, 3.0).unwrap();
        let kc = 2.0;
        let below = transmission(kc - 1e-10, &barrier).unwrap();
        let above = transmission(kc + 1e-10, &barrier).unwrap();
        assert!((below.magnitude - above.magnitude).abs() < 1e-8);
        assert!((below.phase - above.phase).abs() < 1e-8);
    }

    #[test]
    fn analytic_branch_matches_mesh_unwrapping() {
        for &(h, d) in &[(4.005, 4.0), (2.2, 10.0), (1.0, 8.0), (0.5, 10.0)] {
            let barrier = BarrierSpec::new(h, d).unwrap();
            let mesh = unwrapped_phase_mesh(&barrier, 1.2, 2.8, 1e-3).unwrap();
            let shift = transmission(mesh[0].0, &barrier).unwrap().phase - mesh[0].1;
            for (k, theta) in mesh {
                let r = transmission(k, &barrier).unwrap();
                assert!((r.phase - (theta + shift)).abs() < 1e-9, "h={h} d={d} k={k}");
            }
            assert!((shift / (2.0 * PI)).fract().abs() < 1e-9 || (1.0 - (shift / (2.0 * PI)).fract().abs()) < 1e-9);
        }
    }

    #[test]
    fn tunneling_suppression_with_width() {
        let k = 2.0;
        let mut last = 1.0;
        for j in 1..40 {
            let barrier = BarrierSpec::new(4.005, 0.25 * j as f64).unwrap();
            let m = transmission(k, &barrier).unwrap().magnitude;
            assert!(m < last);
            last = m;
        }
    }

    #[test]
    fn momentum_without_barrier_is_k0() {
        let spec = PacketSpec::default();
        let km = transmitted_momentum(&spec, &BarrierSpec::free()).unwrap();
        assert!((km - spec.k0).abs() < 1e-4);
        assert!((transmitted_probability(&spec, &BarrierSpec::free()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn high_barrier_filters_toward_higher_momenta() {
        let spec = PacketSpec::default();
        let h = 2.0 * mean_energy(&spec);
        let mut last = spec.k0;
        for j in 1..=16 {
            let barrier = BarrierSpec::new(h, 0.25 * j as f64).unwrap();
            let km = transmitted_momentum(&spec, &barrier).unwrap();
            assert!(km > last, "d = {}: {km} <= {last}", 0.25 * j as f64);
            last = km;
        }
        assert!(last > spec.k0);
    }

    #[test]
    fn amplitude_weighting_is_available() {
        let spec = PacketSpec::default();
        let barrier = BarrierSpec::relative_to(&spec, 2.0, 4.0).unwrap();
        let sq = transmitted_momentum_with(&spec, &barrier, MomentumWeight::Squared).unwrap();
        let amp = transmitted_momentum_with(&spec, &barrier, MomentumWeight::Amplitude).unwrap();
        assert!(sq > spec.k0 && amp > spec.k0);
        // Narrow momentum spread: the two choices differ only slightly.
        assert!((sq - amp).abs() > 1e-5);
    }

    #[test]
    fn phase_time_zero_without_barrier() {
        let spec = PacketSpec::default();
        assert_eq!(phase_time(&spec, &BarrierSpec::free()).unwrap(), 0.0);
        assert!(stationary_phase_delta(&spec, &BarrierSpec::free()).unwrap().abs() < 1e-3);
    }

    #[test]
    fn phase_time_step_convergence() {
        let spec = PacketSpec::default();
        for &(ratio, d) in &[(2.0, 1.0), (1.1, 4.0), (0.5, 6.0)] {
            let barrier = BarrierSpec::relative_to(&spec, ratio, d).unwrap();
            let km = transmitted_momentum(&spec, &barrier).unwrap();
            let a = phase_time_at(&barrier, km, 1e-4).unwrap();
            let b = phase_time_at(&barrier, km, 1e-5).unwrap();
            assert!((a - b).abs() < 1e-4);
        }
    }

    #[test]
    fn phase_time_saturates_for_opaque_barriers() {
        let spec = PacketSpec::default();
        let h = 2.0 * mean_energy(&spec);
        let taus: Vec<f64> = [4.0, 6.0, 8.0, 10.0]
            .iter()
            .map(|&d| {
                let barrier = BarrierSpec::new(h, d).unwrap();
                phase_time_at(&barrier, spec.k0, PHASE_STEP).unwrap()
            })
            .collect();
        // Opaque limit at fixed k: dθ/dk → -d + 2/κ, so τ + d/k → 2/(κk)
        // independent of d.
        let kappa = (2.0 * h - spec.k0 * spec.k0).sqrt();
        for (tau, d) in taus.iter().zip([4.0, 6.0, 8.0, 10.0]) {
            let excess = tau + d / spec.k0;
            assert!((excess - 2.0 / (kappa * spec.k0)).abs() < 1e-3, "d = {d}: {excess}");
        }
    }

    #[test]
    fn free_packet_reconstruction() {
        let spec = PacketSpec::default();
        for &(x, t) in &[(10.0, 30.0), (50.0, 48.0), (0.5, 25.0)] {
            let a = transmitted_packet(&spec, &BarrierSpec::free(), x, t).unwrap();
            let b = free_gaussian_reference(&spec, x, t);
            assert!((a - b).norm() < 1e-8, "{a} vs {b}");
        }
        let barrier = BarrierSpec::new(1.0, 2.0).unwrap();
        assert!(transmitted_packet(&spec, &barrier, 1.0, 10.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn flux_is_conserved(k in 0.05f64..6.0, h in 0.0f64..20.0, d in 0.0f64..15.0) {
            let r = transmission(k, &BarrierSpec::new(h, d).unwrap()).unwrap();
            prop_assert!((r.magnitude.powi(2) + r.reflection_magnitude.powi(2) - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn transmission_is_bounded(k in 0.05f64..6.0, h in 0.0f64..20.0, d in 0.0f64..15.0) {
            let r = transmission(k, &BarrierSpec::new(h, d).unwrap()).unwrap();
            prop_assert!(r.magnitude <= 1.0 + 1e-15 && r.phase.is_finite());
        }
    }
}
