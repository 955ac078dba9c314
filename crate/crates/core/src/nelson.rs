//! Nelson stochastic mechanics: paths obeying the Ito equation
//! `dx = b(x, t) dt + dw` with `<dw²> = dt` and drift
//! `b = ∂x (Im + Re) ln ψ`, advanced in lockstep with the grid solver.
//!
//! Every path owns a ChaCha8 stream selected by `(seed, path index)`, so the
//! ensemble is reproducible and independent of how paths are split across
//! threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::arrival::{ArrivalDistribution, DistributionKind, TimeWindow};
use crate::error::{Error, Result};
use crate::model::{gaussian_packet, BarrierSpec, Grid, PacketSpec, WaveField};
use crate::propagator::{CrankNicolson, ProbeRecord};

/// Densities below this are treated as nodes of ψ.
pub const NODE_DENSITY: f64 = 1e-30;

/// Default drift clamp (speed).
pub const DEFAULT_CLAMP: f64 = 10.0;

/// Default counting-detector width. Narrower bins leave the occupation
/// distribution dominated by Monte Carlo noise at `N = 10⁵`.
pub const DEFAULT_BIN_WIDTH: f64 = 2.0;

/// Drift sampled on the grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct DriftField {
    pub grid: Grid,
    pub t: f64,
    pub b: Vec<f64>,
    pub clamp: f64,
}

impl DriftField {
    /// Wraps precomputed drift values, clamping them to `±clamp`.
    pub fn from_values(grid: Grid, t: f64, mut b: Vec<f64>, clamp: f64) -> Self {
        assert_eq!(b.len(), grid.len());
        for v in &mut b {
            *v = clamp_drift(*v, clamp);
        }
        Self { grid, t, b, clamp }
    }

    pub fn uniform(grid: Grid, t: f64, value: f64, clamp: f64) -> Self {
        Self::from_values(grid, t, vec![value; grid.len()], clamp)
    }

    /// Linear interpolation between grid points; constant beyond the ends.
    pub fn at(&self, x: f64) -> f64 {
        let n = self.b.len();
        let s = (x - self.grid.x_min()) / self.grid.dx();
        if s <= 0.0 {
            return self.b[0];
        }
        let i = s.floor() as usize;
        if i >= n - 1 {
            return self.b[n - 1];
        }
        let f = s - i as f64;
        self.b[i] + f * (self.b[i + 1] - self.b[i])
    }
}

fn clamp_drift(b: f64, clamp: f64) -> f64 {
    if b.is_nan() {
        0.0
    } else if b.abs() > clamp {
        clamp.copysign(b)
    } else {
        b
    }
}

/// `b = ∂x ln|ψ| + ∂x arg ψ` by central differences.
///
/// The phase derivative uses `arg(ψ_{i+1} ψ*_{i-1})`, which is the unwrapped
/// phase difference as long as it stays below π per two cells. At nodes
/// (`|ψ|² < 1e-30`) and wherever `|b|` exceeds the clamp, `b` is replaced by
/// `sign(b)·clamp`.
pub fn drift_field(field: &WaveField, clamp: f64) -> DriftField {
    let psi = &field.amplitudes;
    let n = psi.len();
    let inv_2dx = 0.5 / field.grid.dx();
    let log_mod: Vec<f64> = psi.iter().map(|a| a.norm().ln()).collect();
    let mut b = vec![0.0; n];
    for i in 1..n - 1 {
        let osmotic = (log_mod[i + 1] - log_mod[i - 1]) * inv_2dx;
        let current = (psi[i + 1] * psi[i - 1].conj()).arg() * inv_2dx;
        let raw = osmotic + current;
        b[i] = if psi[i].norm_sqr() < NODE_DENSITY {
            if raw.is_finite() && raw != 0.0 {
                clamp.copysign(raw)
            } else {
                0.0
            }
        } else {
            clamp_drift(raw, clamp)
        };
    }
    b[0] = b[1];
    b[n - 1] = b[n - 2];
    DriftField { grid: field.grid, t: field.t, b, clamp }
}

/// One Euler-Maruyama step `x' = x + b(x) dt + √dt · z` with `z ~ N(0, 1)`,
/// reflected back into the grid at either end.
pub fn sde_step(x: f64, drift: &DriftField, dt: f64, z: f64) -> f64 {
    reflect(x + drift.at(x) * dt + dt.sqrt() * z, &drift.grid)
}

fn reflect(mut x: f64, grid: &Grid) -> f64 {
    let (lo, hi) = (grid.x_min(), grid.x_max());
    // A single step never travels a full grid length.
    if x < lo {
        x = 2.0 * lo - x;
    }
    if x > hi {
        x = 2.0 * hi - x;
    }
    x.clamp(lo, hi)
}

/// Occupation detector counting paths in `[x - w/2, x + w/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detector {
    pub x: f64,
    pub bin_width: f64,
}

impl Detector {
    pub fn new(x: f64, bin_width: f64) -> Self {
        Self { x, bin_width }
    }

    fn lower(&self) -> f64 {
        self.x - 0.5 * self.bin_width
    }

    fn upper(&self) -> f64 {
        self.x + 0.5 * self.bin_width
    }

    fn contains(&self, x: f64) -> bool {
        x >= self.lower() && x < self.upper()
    }
}

/// Region and cadence for recording the drift field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftWindow {
    pub x_min: f64,
    pub x_max: f64,
    pub every: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub grid: Grid,
    pub dt: f64,
    pub t_max: f64,
    pub clamp: f64,
    pub detectors: Vec<Detector>,
    /// Points whose first upward crossing time is recorded per path.
    pub crossings: Vec<f64>,
    pub snapshot_times: Vec<f64>,
    /// Number of leading paths whose full trajectory is kept.
    pub traced_paths: usize,
    pub trace_every: usize,
    pub drift_window: Option<DriftWindow>,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            grid: Grid::default(),
            dt: 0.01,
            t_max: 100.0,
            clamp: DEFAULT_CLAMP,
            detectors: Vec::new(),
            crossings: Vec::new(),
            snapshot_times: Vec::new(),
            traced_paths: 0,
            trace_every: 10,
            drift_window: None,
        }
    }
}

impl EnsembleConfig {
    pub fn n_steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_max >= 0.0) {
            return Err(Error::InvalidConfig(format!("dt = {}, t_max = {}", self.dt, self.t_max)));
        }
        if !(self.clamp > 0.0) {
            return Err(Error::InvalidConfig(format!("clamp = {} must be positive", self.clamp)));
        }
        for d in &self.detectors {
            if !(d.bin_width > 0.0) || !self.grid.contains(d.lower()) || !self.grid.contains(d.upper()) {
                return Err(Error::ProbeOffGrid { x: d.x });
            }
        }
        for &x in &self.crossings {
            if !self.grid.contains(x) {
                return Err(Error::ProbeOffGrid { x });
            }
        }
        if self.trace_every == 0 {
            return Err(Error::InvalidConfig("trace_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// Per-step path counts inside one detector bin.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyRecord {
    pub detector: Detector,
    pub times: Vec<f64>,
    pub counts: Vec<u32>,
}

/// First upward crossing time of `x` per path (`None` if it never crosses).
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingRecord {
    pub x: f64,
    pub first_times: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSnapshot {
    pub t: f64,
    pub positions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DriftSample {
    pub t: f64,
    pub x: Vec<f64>,
    pub b: Vec<f64>,
}

/// Running moments of every noise increment drawn.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseStats {
    pub count: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl NoiseStats {
    pub fn mean(&self) -> f64 {
        self.sum / self.count as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.sum_sq / self.count as f64 - m * m
    }
}

/// Grid-solver data gathered during the same run as the paths.
#[derive(Debug, Clone, PartialEq)]
pub struct GridReference {
    /// Point density/current at each detector center.
    pub probes: Vec<ProbeRecord>,
    /// Field at each ensemble snapshot time.
    pub snapshots: Vec<WaveField>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub barrier: BarrierSpec,
    pub initial_positions: Vec<f64>,
    pub final_positions: Vec<f64>,
    /// `x(t_max)` beyond the barrier exit.
    pub transmitted_flags: Vec<bool>,
    pub trace_times: Vec<f64>,
    /// `traces[p][j]` is path `p` at `trace_times[j]`.
    pub traces: Vec<Vec<f64>>,
    pub snapshots: Vec<PathSnapshot>,
    pub occupancy: Vec<OccupancyRecord>,
    pub crossings: Vec<CrossingRecord>,
    pub drift_samples: Vec<DriftSample>,
    pub noise: NoiseStats,
    pub reference: Option<GridReference>,
}

impl PathEnsemble {
    pub fn transmitted_fraction(&self) -> f64 {
        self.transmitted_flags.iter().filter(|&&f| f).count() as f64 / self.n_paths as f64
    }

    pub fn occupancy_at(&self, x: f64) -> Option<&OccupancyRecord> {
        self.occupancy.iter().find(|o| (o.detector.x - x).abs() < 1e-9)
    }

    pub fn crossing_at(&self, x: f64) -> Option<&CrossingRecord> {
        self.crossings.iter().find(|c| (c.x - x).abs() < 1e-9)
    }
}

struct Walker {
    x: f64,
    rng: ChaCha8Rng,
    first_cross: Vec<f64>,
    noise_sum: f64,
    noise_sq: f64,
}

/// Seeds path `index`'s private stream.
pub fn path_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws `n` positions from the grid density: pick a cell `[x_i - dx/2, x_i + dx/2]`
/// by inverse CDF, then a uniform point inside it.
fn sample_initial(field: &WaveField, rngs: &mut [ChaCha8Rng]) -> Vec<f64> {
    let grid = field.grid;
    let dx = grid.dx();
    let mut cdf = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    for a in &field.amplitudes {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let total = acc;
    rngs.iter_mut()
        .map(|rng| {
            let u: f64 = rng.random::<f64>() * total;
            let i = cdf.partition_point(|&c| c < u).min(grid.len() - 1);
            let x = grid.x(i) - 0.5 * dx + dx * rng.random::<f64>();
            x.clamp(grid.x_min(), grid.x_max())
        })
        .collect()
}

const CHUNK: usize = 2048;

/// Steps a set of walkers under caller-provided drift fields and collects the
/// configured observations.
struct PathEngine<'a> {
    config: &'a EnsembleConfig,
    walkers: Vec<Walker>,
    step: usize,
    occupancy: Vec<OccupancyRecord>,
    snapshot_steps: Vec<usize>,
    snapshots: Vec<PathSnapshot>,
    trace_times: Vec<f64>,
    traces: Vec<Vec<f64>>,
    drift_samples: Vec<DriftSample>,
}

impl<'a> PathEngine<'a> {
    fn new(config: &'a EnsembleConfig, positions: Vec<f64>, rngs: Vec<ChaCha8Rng>) -> Self {
        let walkers: Vec<Walker> = positions
            .into_iter()
            .zip(rngs)
            .map(|(x, rng)| Walker {
                x,
                rng,
                first_cross: vec![f64::NAN; config.crossings.len()],
                noise_sum: 0.0,
                noise_sq: 0.0,
            })
            .collect();
        let traced = config.traced_paths.min(walkers.len());
        let mut engine = Self {
            config,
            occupancy: config
                .detectors
                .iter()
                .map(|&detector| OccupancyRecord { detector, times: Vec::new(), counts: Vec::new() })
                .collect(),
            snapshot_steps: config.snapshot_times.iter().map(|&t| (t / config.dt).round() as usize).collect(),
            snapshots: Vec::new(),
            trace_times: Vec::new(),
            traces: vec![Vec::new(); traced],
            drift_samples: Vec::new(),
            walkers,
            step: 0,
        };
        engine.observe(None);
        engine
    }

    fn time(&self) -> f64 {
        self.step as f64 * self.config.dt
    }

    fn observe(&mut self, counts: Option<Vec<u32>>) {
        let t = self.time();
        let counts = counts.unwrap_or_else(|| {
            self.config
                .detectors
                .iter()
                .map(|d| self.walkers.iter().filter(|w| d.contains(w.x)).count() as u32)
                .collect()
        });
        for (rec, c) in self.occupancy.iter_mut().zip(counts) {
            rec.times.push(t);
            rec.counts.push(c);
        }
        for (k, &s) in self.snapshot_steps.iter().enumerate() {
            if s == self.step {
                let positions = self.walkers.iter().map(|w| w.x).collect();
                self.snapshots.push(PathSnapshot { t: self.config.snapshot_times[k], positions });
            }
        }
        if !self.traces.is_empty() && self.step.is_multiple_of(self.config.trace_every) {
            self.trace_times.push(t);
            for (trace, w) in self.traces.iter_mut().zip(&self.walkers) {
                trace.push(w.x);
            }
        }
    }

    fn record_drift(&mut self, drift: &DriftField) {
        if let Some(win) = self.config.drift_window {
            if self.step.is_multiple_of(win.every) {
                let grid = drift.grid;
                let (x, b): (Vec<f64>, Vec<f64>) = grid
                    .points()
                    .zip(&drift.b)
                    .filter(|(x, _)| *x >= win.x_min && *x <= win.x_max)
                    .map(|(x, b)| (x, *b))
                    .unzip();
                self.drift_samples.push(DriftSample { t: drift.t, x, b });
            }
        }
    }

    /// Advances every walker by one step under `drift`.
    fn advance(&mut self, drift: &DriftField) {
        self.advance_with(drift, true)
    }

    fn advance_with(&mut self, drift: &DriftField, noisy: bool) {
        self.record_drift(drift);
        let dt = self.config.dt;
        let sqrt_dt = dt.sqrt();
        let t0 = self.time();
        let detectors = &self.config.detectors;
        let crossings = &self.config.crossings;
        let grid = drift.grid;

        let partial: Vec<Vec<u32>> = self
            .walkers
            .par_chunks_mut(CHUNK)
            .map(|chunk| {
                let mut counts = vec![0u32; detectors.len()];
                for w in chunk.iter_mut() {
                    let z: f64 = if noisy { w.rng.sample(StandardNormal) } else { 0.0 };
                    let dw = sqrt_dt * z;
                    w.noise_sum += dw;
                    w.noise_sq += dw * dw;
                    let old = w.x;
                    let new = reflect(old + drift.at(old) * dt + dw, &grid);
                    for (c, &xc) in crossings.iter().enumerate() {
                        if w.first_cross[c].is_nan() && old < xc && new >= xc {
                            w.first_cross[c] = t0 + dt * (xc - old) / (new - old);
                        }
                    }
                    w.x = new;
                    for (j, d) in detectors.iter().enumerate() {
                        if d.contains(new) {
                            counts[j] += 1;
                        }
                    }
                }
                counts
            })
            .collect();

        let mut counts = vec![0u32; detectors.len()];
        for p in partial {
            for (c, v) in counts.iter_mut().zip(p) {
                *c += v;
            }
        }
        self.step += 1;
        self.observe(Some(counts));
    }

    fn finish(
        self,
        seed: u64,
        barrier: BarrierSpec,
        initial: Vec<f64>,
        reference: Option<GridReference>,
    ) -> PathEnsemble {
        let exit = barrier.right_edge();
        let final_positions: Vec<f64> = self.walkers.iter().map(|w| w.x).collect();
        let mut noise = NoiseStats::default();
        for w in &self.walkers {
            noise.sum += w.noise_sum;
            noise.sum_sq += w.noise_sq;
        }
        noise.count = (self.walkers.len() * self.step) as u64;
        let crossings = self
            .config
            .crossings
            .iter()
            .enumerate()
            .map(|(c, &x)| CrossingRecord {
                x,
                first_times: self
                    .walkers
                    .iter()
                    .map(|w| if w.first_cross[c].is_nan() { None } else { Some(w.first_cross[c]) })
                    .collect(),
            })
            .collect();
        PathEnsemble {
            n_paths: self.walkers.len(),
            dt: self.config.dt,
            seed,
            barrier,
            initial_positions: initial,
            transmitted_flags: final_positions.iter().map(|&x| x > exit).collect(),
            final_positions,
            trace_times: self.trace_times,
            traces: self.traces,
            snapshots: self.snapshots,
            occupancy: self.occupancy,
            crossings,
            drift_samples: self.drift_samples,
            noise,
            reference,
        }
    }
}

/// Runs `n_paths` Nelson paths for the Gaussian packet and barrier, with the
/// drift recomputed from the Crank-Nicolson field before every step.
pub fn simulate_ensemble(
    spec: &PacketSpec,
    barrier: &BarrierSpec,
    n_paths: usize,
    seed: u64,
    config: &EnsembleConfig,
) -> Result<PathEnsemble> {
    if n_paths == 0 {
        return Err(Error::InvalidConfig("n_paths must be >= 1".into()));
    }
    config.validate()?;
    let grid = config.grid;
    let mut field = gaussian_packet(spec, &grid)?;
    let mut cn = CrankNicolson::new(&grid, barrier, config.dt)?;

    let mut rngs: Vec<ChaCha8Rng> = (0..n_paths as u64).map(|i| path_rng(seed, i)).collect();
    let initial = sample_initial(&field, &mut rngs);

    let mut probes = config.detectors.iter().map(|d| ProbeRecord::new(&grid, d.x)).collect::<Result<Vec<_>>>()?;
    let snapshot_steps: Vec<usize> = config.snapshot_times.iter().map(|&t| (t / config.dt).round() as usize).collect();
    let mut grid_snapshots = Vec::new();
    let mut record_grid = |step: usize, field: &WaveField, probes: &mut [ProbeRecord]| {
        for p in probes.iter_mut() {
            p.record(field);
        }
        for &s in &snapshot_steps {
            if s == step {
                grid_snapshots.push(field.clone());
            }
        }
    };

    let mut engine = PathEngine::new(config, initial.clone(), rngs);
    record_grid(0, &field, &mut probes);
    for s in 1..=config.n_steps() {
        let drift = drift_field(&field, config.clamp);
        engine.advance(&drift);
        cn.step(&mut field);
        field.t = s as f64 * config.dt;
        record_grid(s, &field, &mut probes);
    }
    let reference = GridReference { probes, snapshots: grid_snapshots };
    Ok(engine.finish(seed, *barrier, initial, Some(reference)))
}

/// Runs paths from given initial positions under a fixed drift field.
/// Used for diffusion checks where the drift is known in closed form.
pub fn simulate_fixed_drift(
    initial: Vec<f64>,
    drift: &DriftField,
    seed: u64,
    config: &EnsembleConfig,
) -> Result<PathEnsemble> {
    simulate_fixed_drift_with(initial, drift, seed, config, true)
}

/// As [`simulate_fixed_drift`], optionally with the noise switched off.
pub fn simulate_fixed_drift_with(
    initial: Vec<f64>,
    drift: &DriftField,
    seed: u64,
    config: &EnsembleConfig,
    noisy: bool,
) -> Result<PathEnsemble> {
    if initial.is_empty() {
        return Err(Error::InvalidConfig("n_paths must be >= 1".into()));
    }
    config.validate()?;
    let rngs = (0..initial.len() as u64).map(|i| path_rng(seed, i)).collect();
    let mut engine = PathEngine::new(config, initial.clone(), rngs);
    for _ in 0..config.n_steps() {
        engine.advance_with(drift, noisy);
    }
    Ok(engine.finish(seed, BarrierSpec::free(), initial, None))
}

/// Multiple-counting statistics at one detector.
#[derive(Debug, Clone, PartialEq)]
pub struct CountingResult {
    pub x: f64,
    pub bin_width: f64,
    pub times: Vec<f64>,
    /// `n(X, T) / (N · bin_width)`.
    pub rho_n: Vec<f64>,
    pub scheme: DistributionKind,
}

/// Occupation-based arrival distribution: `ρ^N_X(T) = n(X,T)/(N·w)`, its
/// normalization over the window, and the resulting mean arrival time.
pub fn occupation_distribution(
    ensemble: &PathEnsemble,
    x: f64,
    window: TimeWindow,
) -> Result<(CountingResult, ArrivalDistribution, f64)> {
    let occ = ensemble.occupancy_at(x).ok_or(Error::ProbeOffGrid { x })?;
    let scale = 1.0 / (ensemble.n_paths as f64 * occ.detector.bin_width);
    let rho_n: Vec<f64> = occ.counts.iter().map(|&c| c as f64 * scale).collect();
    if rho_n.iter().all(|&r| r == 0.0) {
        return Err(Error::EmptyDetectorBin);
    }
    let dist = ArrivalDistribution::from_samples(x, &occ.times, &rho_n, window, DistributionKind::MultipleCounting)
        .map_err(|e| if e == Error::ZeroTotalDensity { Error::EmptyDetectorBin } else { e })?;
    let mean = dist.mean();
    let counting = CountingResult {
        x,
        bin_width: occ.detector.bin_width,
        times: occ.times.clone(),
        rho_n,
        scheme: DistributionKind::MultipleCounting,
    };
    Ok((counting, dist, mean))
}

/// Histogram width for first-passage times.
pub const FIRST_PASSAGE_BIN: f64 = 0.1;

/// Distribution of each path's first crossing time of `x`, binned at
/// [`FIRST_PASSAGE_BIN`] and normalized over the window.
pub fn first_passage_distribution(ensemble: &PathEnsemble, x: f64, window: TimeWindow) -> Result<ArrivalDistribution> {
    first_passage_distribution_binned(ensemble, x, window, FIRST_PASSAGE_BIN)
}

pub fn first_passage_distribution_binned(
    ensemble: &PathEnsemble,
    x: f64,
    window: TimeWindow,
    bin: f64,
) -> Result<ArrivalDistribution> {
    let rec = ensemble.crossing_at(x).ok_or(Error::ProbeOffGrid { x })?;
    let n_bins = ((window.end - window.start) / bin).round().max(1.0) as usize;
    let width = (window.end - window.start) / n_bins as f64;
    let mut hist = vec![0.0; n_bins];
    let mut any = false;
    for t in rec.first_times.iter().flatten() {
        if *t >= window.start && *t <= window.end {
            let j = (((t - window.start) / width) as usize).min(n_bins - 1);
            hist[j] += 1.0;
            any = true;
        }
    }
    if !any {
        return Err(Error::NoCrossings { x });
    }
    let centers: Vec<f64> = (0..n_bins).map(|j| window.start + (j as f64 + 0.5) * width).collect();
    let span = TimeWindow::new(centers[0], centers[n_bins - 1]);
    ArrivalDistribution::from_samples(x, &centers, &hist, span, DistributionKind::FirstPassage)
}

/// Sample mean of the first crossing times of `x` inside the window.
pub fn mean_first_passage(ensemble: &PathEnsemble, x: f64, window: TimeWindow) -> Result<f64> {
    let rec = ensemble.crossing_at(x).ok_or(Error::ProbeOffGrid { x })?;
    let times: Vec<f64> =
        rec.first_times.iter().flatten().copied().filter(|t| *t >= window.start && *t <= window.end).collect();
    if times.is_empty() {
        return Err(Error::NoCrossings { x });
    }
    Ok(times.iter().sum::<f64>() / times.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntranceStats {
    /// Mean first crossing of the barrier entrance over transmitted paths.
    pub transmitted_mean: f64,
    pub transmitted_earliest: f64,
    pub transmitted_latest: f64,
    pub transmitted_count: usize,
    /// Mean first crossing of the same point by the free ensemble.
    pub free_mean: f64,
    pub free_count: usize,
}

/// Entrance timing of transmitted paths against the free ensemble's
/// crossing of the barrier's left edge.
pub fn entrance_statistics(ensemble: &PathEnsemble, free: &PathEnsemble) -> Result<EntranceStats> {
    let entrance = ensemble.barrier.left_edge;
    let rec = ensemble.crossing_at(entrance).ok_or(Error::ProbeOffGrid { x: entrance })?;
    let entered: Vec<f64> =
        rec.first_times.iter().zip(&ensemble.transmitted_flags).filter(|(_, &tr)| tr).filter_map(|(t, _)| *t).collect();
    if entered.is_empty() {
        return Err(Error::NoTransmittedPaths);
    }
    let free_rec = free.crossing_at(entrance).ok_or(Error::ProbeOffGrid { x: entrance })?;
    let free_times: Vec<f64> = free_rec.first_times.iter().flatten().copied().collect();
    if free_times.is_empty() {
        return Err(Error::NoCrossings { x: entrance });
    }
    Ok(EntranceStats {
        transmitted_mean: entered.iter().sum::<f64>() / entered.len() as f64,
        transmitted_earliest: entered.iter().copied().fold(f64::INFINITY, f64::min),
        transmitted_latest: entered.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        transmitted_count: entered.len(),
        free_mean: free_times.iter().sum::<f64>() / free_times.len() as f64,
        free_count: free_times.len(),
    })
}

/// `Σ |h_j - p_j|` between a position histogram and the grid probability of
/// the same bins of `width` tiling the grid.
pub fn histogram_l1(positions: &[f64], field: &WaveField, width: f64) -> f64 {
    let grid = field.grid;
    let n_bins = ((grid.x_max() - grid.x_min()) / width).ceil() as usize;
    let mut hist = vec![0.0; n_bins];
    let inv_n = 1.0 / positions.len() as f64;
    for &x in positions {
        let j = (((x - grid.x_min()) / width) as usize).min(n_bins - 1);
        hist[j] += inv_n;
    }
    // Grid probability per bin from the cumulative trapezoid of |ψ|².
    let rho = field.density();
    let dx = grid.dx();
    let mut cum = vec![0.0; rho.len()];
    for i in 1..rho.len() {
        cum[i] = cum[i - 1] + 0.5 * dx * (rho[i - 1] + rho[i]);
    }
    let cdf_at = |x: f64| {
        let s = ((x - grid.x_min()) / dx).clamp(0.0, (rho.len() - 1) as f64);
        let i = (s.floor() as usize).min(rho.len() - 2);
        let f = s - i as f64;
        cum[i] + f * (cum[i + 1] - cum[i])
    };
    let mut l1 = 0.0;
    for (j, h) in hist.iter().enumerate() {
        let lo = grid.x_min() + j as f64 * width;
        let hi = (lo + width).min(grid.x_max());
        l1 += (h - (cdf_at(hi) - cdf_at(lo))).abs();
    }
    l1
}
