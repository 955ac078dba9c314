//! Crank-Nicolson propagation of `i ∂ψ/∂t = [-½ ∂²/∂x² + V(x)] ψ`.
//!
//! Each step solves `(1 + i dt H/2) ψ' = (1 - i dt H/2) ψ` with the
//! three-point Laplacian and hard walls just outside the grid. The left-hand
//! matrix never changes, so it is factored once per propagator.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{BarrierSpec, Grid, PacketSpec, WaveField};
use crate::tridiag::ThomasFactor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Dirichlet walls: `ψ = 0` one cell beyond each grid end.
    #[default]
    HardWall,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    pub dt: f64,
    pub t_max: f64,
    pub boundary: Boundary,
    pub snapshot_times: Vec<f64>,
    pub probes: Vec<f64>,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self { dt: 0.01, t_max: 100.0, boundary: Boundary::HardWall, snapshot_times: Vec::new(), probes: Vec::new() }
    }
}

impl EvolutionConfig {
    pub fn with_probes(probes: Vec<f64>) -> Self {
        Self { probes, ..Self::default() }
    }

    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    /// Step index closest to time `t`.
    pub fn step_of(&self, t: f64) -> usize {
        (t / self.dt).round() as usize
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt = {} must be positive", self.dt)));
        }
        if !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(Error::InvalidConfig(format!("t_max = {} must be >= 0", self.t_max)));
        }
        for &t in &self.snapshot_times {
            if !(t >= 0.0) || self.step_of(t) > self.n_steps() {
                return Err(Error::InvalidConfig(format!("snapshot time {t} outside [0, {}]", self.t_max)));
            }
        }
        for &x in &self.probes {
            probe_index(grid, x)?;
        }
        Ok(())
    }
}

/// Nearest interior grid index for a detector at `x`.
pub fn probe_index(grid: &Grid, x: f64) -> Result<usize> {
    match grid.nearest_index(x) {
        Some(i) if i >= 1 && i + 1 < grid.len() => Ok(i),
        _ => Err(Error::ProbeOffGrid { x }),
    }
}

/// Density and current sampled at one detector over the run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRecord {
    /// Grid position actually sampled.
    pub x: f64,
    pub index: usize,
    pub times: Vec<f64>,
    pub density: Vec<f64>,
    pub current: Vec<f64>,
}

impl ProbeRecord {
    pub fn new(grid: &Grid, x: f64) -> Result<Self> {
        let index = probe_index(grid, x)?;
        Ok(Self { x: grid.x(index), index, times: Vec::new(), density: Vec::new(), current: Vec::new() })
    }

    pub fn record(&mut self, field: &WaveField) {
        self.times.push(field.t);
        self.density.push(field.amplitudes[self.index].norm_sqr());
        self.current.push(field.current_at(self.index));
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Crank-Nicolson stepper for a fixed grid, potential and time step.
#[derive(Debug, Clone)]
pub struct CrankNicolson {
    grid: Grid,
    dt: f64,
    // Diagonal of (1 - i dt H/2); its off-diagonal is the constant `rhs_off`.
    rhs_diag: Vec<Complex64>,
    rhs_off: Complex64,
    factor: ThomasFactor,
    steps: u64,
}

impl CrankNicolson {
    pub fn new(grid: &Grid, barrier: &BarrierSpec, dt: f64) -> Result<Self> {
        barrier.validate()?;
        Self::with_potential(grid, &barrier.sample(grid), dt)
    }

    pub fn with_potential(grid: &Grid, potential: &[f64], dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("dt = {dt} must be positive")));
        }
        assert_eq!(potential.len(), grid.len());
        let n = grid.len();
        let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
        let half = Complex64::new(0.0, 0.5 * dt);

        // H_ii = 1/dx² + V_i, H_i,i±1 = -1/(2dx²)
        let lhs_off = half * (-0.5 * inv_dx2);
        let lhs_diag: Vec<Complex64> =
            potential.iter().map(|&v| Complex64::new(1.0, 0.0) + half * (inv_dx2 + v)).collect();
        let rhs_diag = potential.iter().map(|&v| Complex64::new(1.0, 0.0) - half * (inv_dx2 + v)).collect();

        let band = vec![lhs_off; n];
        let factor = ThomasFactor::new(&band, &lhs_diag, &band)?;
        Ok(Self { grid: *grid, dt, rhs_diag, rhs_off: -lhs_off, factor, steps: 0 })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn steps_taken(&self) -> u64 {
        self.steps
    }

    /// Advances `field` by one time step in place.
    pub fn step(&mut self, field: &mut WaveField) {
        assert_eq!(field.amplitudes.len(), self.grid.len(), "field does not live on this grid");
        let psi = &mut field.amplitudes;
        let n = psi.len();

        // rhs = (1 - i dt H/2) ψ, built in place with a one-element carry.
        let mut prev = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let cur = psi[i];
            let next = if i + 1 < n { psi[i + 1] } else { Complex64::new(0.0, 0.0) };
            psi[i] = self.rhs_diag[i] * cur + self.rhs_off * (prev + next);
            prev = cur;
        }
        self.factor.solve_in_place(psi);

        self.steps += 1;
        field.t += self.dt;
    }
}

/// One Crank-Nicolson step of `field` under `barrier`.
pub fn step(field: &WaveField, barrier: &BarrierSpec, dt: f64) -> Result<WaveField> {
    let mut cn = CrankNicolson::new(&field.grid, barrier, dt)?;
    let mut next = field.clone();
    cn.step(&mut next);
    Ok(next)
}

/// Result of [`evolve`].
#[derive(Debug, Clone)]
pub struct Evolution {
    pub final_field: WaveField,
    pub snapshots: Vec<WaveField>,
    pub probes: Vec<ProbeRecord>,
}

/// Steps `field` to `config.t_max`, recording every probe at every step
/// (including `t = 0`) and the snapshots at the requested times.
pub fn evolve(field: &WaveField, barrier: &BarrierSpec, config: &EvolutionConfig) -> Result<Evolution> {
    evolve_with(field, barrier, config, |_| {})
}

/// Like [`evolve`], calling `observe` on the field after every step.
pub fn evolve_with<F>(
    field: &WaveField,
    barrier: &BarrierSpec,
    config: &EvolutionConfig,
    mut observe: F,
) -> Result<Evolution>
where
    F: FnMut(&WaveField),
{
    let grid = field.grid;
    config.validate(&grid)?;
    let mut cn = CrankNicolson::new(&grid, barrier, config.dt)?;
    let n_steps = config.n_steps();

    let mut probes = config.probes.iter().map(|&x| ProbeRecord::new(&grid, x)).collect::<Result<Vec<_>>>()?;
    let snapshot_steps: Vec<usize> = config.snapshot_times.iter().map(|&t| config.step_of(t)).collect();
    let mut snapshots: Vec<Option<WaveField>> = vec![None; snapshot_steps.len()];

    let mut psi = field.clone();
    let t0 = field.t;
    let take = |step: usize, psi: &WaveField, probes: &mut [ProbeRecord], snaps: &mut [Option<WaveField>]| {
        for p in probes.iter_mut() {
            p.record(psi);
        }
        for (slot, &s) in snaps.iter_mut().zip(&snapshot_steps) {
            if s == step {
                *slot = Some(psi.clone());
            }
        }
    };

    take(0, &psi, &mut probes, &mut snapshots);
    for s in 1..=n_steps {
        cn.step(&mut psi);
        psi.t = t0 + s as f64 * config.dt;
        take(s, &psi, &mut probes, &mut snapshots);
        observe(&psi);
    }

    Ok(Evolution {
        final_field: psi,
        snapshots: snapshots.into_iter().map(|s| s.expect("snapshot step within run")).collect(),
        probes,
    })
}

/// Closed-form free evolution of the Gaussian packet: `σ² → σ² + i t`.
pub fn free_gaussian_reference(spec: &PacketSpec, x: f64, t: f64) -> Complex64 {
    let s2 = spec.sigma * spec.sigma;
    let width = Complex64::new(s2, t);
    let prefactor = (s2 / std::f64::consts::PI).powf(0.25) / width.sqrt();
    let u = x - spec.x0 - spec.k0 * t;
    let phase = Complex64::new(0.0, spec.k0 * (x - spec.x0) - 0.5 * spec.k0 * spec.k0 * t);
    prefactor * (-(u * u) / (2.0 * width) + phase).exp()
}
