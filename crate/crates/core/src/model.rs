//! Grids, packets, barriers and the sampled wave function.
//!
//! Everything is in natural units with `m = ħ = 1`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform spatial grid `x_i = x_min + i·dx`, `i = 0..n_points`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 3 {
            return Err(Error::InvalidGrid(format!("n_points = {n_points} < 3")));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_min >= x_max {
            return Err(Error::InvalidGrid(format!("x_min = {x_min} must be below x_max = {x_max}")));
        }
        Ok(Self { x_min, x_max, n_points })
    }

    /// Grid on `[x_min, x_max]` with spacing as close as possible to `dx`.
    pub fn with_spacing(x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::InvalidGrid(format!("dx = {dx} must be positive")));
        }
        let cells = ((x_max - x_min) / dx).round() as usize;
        Self::new(x_min, x_max, cells + 1)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        let dx = self.dx();
        (0..self.n_points).map(move |i| self.x_min + i as f64 * dx)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Index of the grid point nearest to `x`, or `None` off the grid.
    pub fn nearest_index(&self, x: f64) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let i = ((x - self.x_min) / self.dx()).round() as usize;
        Some(i.min(self.n_points - 1))
    }
}

impl Default for Grid {
    /// `[-300, 200]` at `dx = 0.025`.
    fn default() -> Self {
        Self { x_min: -300.0, x_max: 200.0, n_points: 20_001 }
    }
}

/// Gaussian packet parameters: width `sigma`, central wavenumber `k0`, center `x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketSpec {
    pub sigma: f64,
    pub k0: f64,
    pub x0: f64,
}

impl PacketSpec {
    pub fn new(sigma: f64, k0: f64, x0: f64) -> Result<Self> {
        let spec = Self { sigma, k0, x0 };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidPacket(format!("sigma = {} must be positive", self.sigma)));
        }
        if !(self.k0.is_finite() && self.x0.is_finite()) {
            return Err(Error::InvalidPacket("k0 and x0 must be finite".into()));
        }
        Ok(())
    }

    pub fn mean_energy(&self) -> f64 {
        mean_energy(self)
    }
}

impl Default for PacketSpec {
    fn default() -> Self {
        Self { sigma: 10.0, k0: 2.0, x0: -50.0 }
    }
}

/// `<E> = k0²/2 + 1/(4σ²)` for the Gaussian packet.
pub fn mean_energy(spec: &PacketSpec) -> f64 {
    0.5 * spec.k0 * spec.k0 + 0.25 / (spec.sigma * spec.sigma)
}

/// Square barrier of `height` on `[left_edge, left_edge + width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec {
    pub height: f64,
    pub width: f64,
    pub left_edge: f64,
}

impl BarrierSpec {
    pub fn new(height: f64, width: f64) -> Result<Self> {
        let barrier = Self { height, width, left_edge: 0.0 };
        barrier.validate()?;
        Ok(barrier)
    }

    pub fn free() -> Self {
        Self { height: 0.0, width: 0.0, left_edge: 0.0 }
    }

    /// Barrier whose height is `ratio · <E>` of the given packet.
    pub fn relative_to(spec: &PacketSpec, ratio: f64, width: f64) -> Result<Self> {
        Self::new(ratio * mean_energy(spec), width)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.height >= 0.0 && self.height.is_finite()) {
            return Err(Error::InvalidBarrier(format!("height = {} must be >= 0", self.height)));
        }
        if !(self.width >= 0.0 && self.width.is_finite()) {
            return Err(Error::InvalidBarrier(format!("width = {} must be >= 0", self.width)));
        }
        if !self.left_edge.is_finite() {
            return Err(Error::InvalidBarrier("left edge must be finite".into()));
        }
        Ok(())
    }

    pub fn right_edge(&self) -> f64 {
        self.left_edge + self.width
    }

    pub fn is_free(&self) -> bool {
        self.height == 0.0 || self.width == 0.0
    }

    pub fn potential_at(&self, x: f64) -> f64 {
        potential_at(self, x)
    }

    /// Mean of `V` over the cell `[x - dx/2, x + dx/2]`.
    ///
    /// This is the value the propagator puts on the grid: an edge landing on
    /// a grid point gets half the height, so the discrete barrier has the
    /// exact width instead of `width + dx`.
    pub fn cell_average(&self, x: f64, dx: f64) -> f64 {
        if self.is_free() {
            return 0.0;
        }
        let lo = (x - 0.5 * dx).max(self.left_edge);
        let hi = (x + 0.5 * dx).min(self.right_edge());
        if hi <= lo {
            0.0
        } else {
            self.height * (hi - lo) / dx
        }
    }

    /// Cell-averaged potential on every grid point.
    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        let dx = grid.dx();
        grid.points().map(|x| self.cell_average(x, dx)).collect()
    }
}

impl Default for BarrierSpec {
    fn default() -> Self {
        Self::free()
    }
}

/// `h` on the closed interval `[left_edge, left_edge + width]`, zero elsewhere.
pub fn potential_at(barrier: &BarrierSpec, x: f64) -> f64 {
    if barrier.is_free() {
        return 0.0;
    }
    if x >= barrier.left_edge && x <= barrier.right_edge() {
        barrier.height
    } else {
        0.0
    }
}

/// The wave function sampled on a grid at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: Grid,
    pub t: f64,
    pub amplitudes: Vec<Complex64>,
}

impl WaveField {
    pub fn new(grid: Grid, t: f64, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::InvalidGrid(format!("{} amplitudes for {} grid points", amplitudes.len(), grid.len())));
        }
        Ok(Self { grid, t, amplitudes })
    }

    /// Discrete `Σ |ψ_i|² dx`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn renormalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            let inv = 1.0 / n;
            self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        }
    }

    /// Discrete probability on grid points with `a <= x <= b`.
    pub fn probability_between(&self, a: f64, b: f64) -> f64 {
        let dx = self.grid.dx();
        self.grid
            .points()
            .zip(&self.amplitudes)
            .filter(|(x, _)| *x >= a && *x <= b)
            .map(|(_, psi)| psi.norm_sqr())
            .sum::<f64>()
            * dx
    }

    /// Probability current `Im(ψ* ∂ψ/∂x)` at interior point `i` (central difference).
    pub fn current_at(&self, i: usize) -> f64 {
        let dpsi = (self.amplitudes[i + 1] - self.amplitudes[i - 1]) / (2.0 * self.grid.dx());
        (self.amplitudes[i].conj() * dpsi).im
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes.iter().all(|a| a.re.is_finite() && a.im.is_finite())
    }
}

/// Edge amplitude, relative to the peak, that a packet may leave on the grid.
pub const EDGE_AMPLITUDE_LIMIT: f64 = 1e-12;

/// Samples the Gaussian packet on `grid` and renormalizes it to unit discrete norm.
pub fn gaussian_packet(spec: &PacketSpec, grid: &Grid) -> Result<WaveField> {
    spec.validate()?;
    let norm = (std::f64::consts::PI * spec.sigma * spec.sigma).powf(-0.25);
    let two_s2 = 2.0 * spec.sigma * spec.sigma;
    let amplitudes: Vec<Complex64> = grid
        .points()
        .map(|x| {
            let u = x - spec.x0;
            Complex64::from_polar(norm * (-u * u / two_s2).exp(), spec.k0 * u)
        })
        .collect();

    let peak = amplitudes.iter().map(|a| a.norm()).fold(0.0, f64::max);
    let edge = amplitudes[0].norm().max(amplitudes[grid.len() - 1].norm());
    let ratio = if peak > 0.0 { edge / peak } else { f64::INFINITY };
    if !(ratio < EDGE_AMPLITUDE_LIMIT) {
        return Err(Error::GridTooNarrow { ratio, threshold: EDGE_AMPLITUDE_LIMIT });
    }

    let mut field = WaveField::new(*grid, 0.0, amplitudes)?;
    field.renormalize();
    Ok(field)
}
