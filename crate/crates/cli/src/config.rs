//! Experiment configuration: a TOML document with one table per section.
//! Every key is optional; missing keys take the defaults of the standard
//! packet (`σ = 10`, `k0 = 2`, `x0 = -50`).

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tunnel_core::nelson::{DEFAULT_BIN_WIDTH, DEFAULT_CLAMP};
use tunnel_core::{BarrierSpec, EvolutionConfig, Grid, MomentumWeight, PacketSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub output_dir: String,
    pub packet: PacketSection,
    pub barrier: BarrierSection,
    pub grid: GridSection,
    pub evolution: EvolutionSection,
    pub probes: ProbeSection,
    pub analysis1: Analysis1Section,
    pub analysis2: Analysis2Section,
    pub analysis3: Analysis3Section,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nelson: Option<NelsonSection>,
    pub sweep: SweepSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            output_dir: "out".into(),
            packet: PacketSection::default(),
            barrier: BarrierSection::default(),
            grid: GridSection::default(),
            evolution: EvolutionSection::default(),
            probes: ProbeSection::default(),
            analysis1: Analysis1Section::default(),
            analysis2: Analysis2Section::default(),
            analysis3: Analysis3Section::default(),
            nelson: None,
            sweep: SweepSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PacketSection {
    pub sigma: f64,
    pub k0: f64,
    pub x0: f64,
}

impl Default for PacketSection {
    fn default() -> Self {
        let p = PacketSpec::default();
        Self { sigma: p.sigma, k0: p.k0, x0: p.x0 }
    }
}

/// Barrier used by the snapshot runs. The height is given in units of the
/// packet's mean energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BarrierSection {
    pub height_ratio: f64,
    pub width: f64,
    pub left_edge: f64,
}

impl Default for BarrierSection {
    fn default() -> Self {
        Self { height_ratio: 1.1, width: 1.5, left_edge: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = Grid::default();
        Self { x_min: g.x_min(), x_max: g.x_max(), n_points: g.len() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionSection {
    pub dt: f64,
    pub t_max: f64,
    pub snapshot_times: Vec<f64>,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        Self { dt: 0.01, t_max: 100.0, snapshot_times: vec![0.0, 25.0, 50.0, 75.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeSection {
    pub positions: Vec<f64>,
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self { positions: vec![50.0] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analysis1Section {
    pub height_ratio: f64,
    pub width: f64,
}

impl Default for Analysis1Section {
    fn default() -> Self {
        Self { height_ratio: 2.0, width: 4.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WeightChoice {
    #[default]
    Squared,
    Amplitude,
}

impl From<WeightChoice> for MomentumWeight {
    fn from(w: WeightChoice) -> Self {
        match w {
            WeightChoice::Squared => MomentumWeight::Squared,
            WeightChoice::Amplitude => MomentumWeight::Amplitude,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analysis2Section {
    pub height_ratios: Vec<f64>,
    pub width: f64,
    /// Detectors beyond the barrier; the exit itself is always added.
    pub probes: Vec<f64>,
    /// Barrier widths for the transmitted-momentum table.
    pub momentum_widths: Vec<f64>,
    pub momentum_weight: WeightChoice,
}

impl Default for Analysis2Section {
    fn default() -> Self {
        Self {
            height_ratios: vec![0.5, 1.1, 2.0],
            width: 4.0,
            probes: vec![10.0, 20.0, 30.0, 40.0, 50.0],
            momentum_widths: (0..=40).map(|j| 0.25 * j as f64).collect(),
            momentum_weight: WeightChoice::Squared,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Analysis3Section {
    pub height_ratios: Vec<f64>,
    pub widths: Vec<f64>,
    pub momentum_weight: WeightChoice,
}

impl Default for Analysis3Section {
    fn default() -> Self {
        Self {
            height_ratios: vec![0.5, 1.1, 2.0],
            widths: (1..=40).map(|j| 0.25 * j as f64).collect(),
            momentum_weight: WeightChoice::Squared,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NelsonSection {
    pub n_paths: usize,
    pub seed: u64,
    pub bin_width: f64,
    pub clamp: f64,
    pub height_ratio: f64,
    /// One ensemble per width, plus a free ensemble.
    pub widths: Vec<f64>,
    pub probe: f64,
    pub histogram_times: Vec<f64>,
    pub histogram_bin: f64,
    pub traced_paths: usize,
    pub trace_every: usize,
    pub drift_x_min: f64,
    pub drift_x_max: f64,
    pub drift_every: usize,
}

impl Default for NelsonSection {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            seed: 1,
            bin_width: DEFAULT_BIN_WIDTH,
            clamp: DEFAULT_CLAMP,
            height_ratio: 2.0,
            widths: vec![1.0, 0.5],
            probe: 50.0,
            histogram_times: vec![25.0, 50.0, 75.0],
            histogram_bin: 1.0,
            traced_paths: 40,
            trace_every: 10,
            drift_x_min: -10.0,
            drift_x_max: 2.0,
            drift_every: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub height_ratios: Vec<f64>,
    pub widths: Vec<f64>,
    pub probes: Vec<f64>,
    pub momentum_weight: WeightChoice,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            height_ratios: vec![0.5, 1.1, 2.0],
            widths: vec![0.5, 1.0, 2.0, 4.0],
            probes: vec![50.0],
            momentum_weight: WeightChoice::Squared,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let config: Self = toml::from_str(text).context("malformed configuration")?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration always serializes")
    }

    /// SHA-256 of the canonical serialization, as lowercase hex. The output
    /// directory is left out: it does not affect any result.
    pub fn hash(&self) -> String {
        let content = Self { output_dir: String::new(), ..self.clone() };
        let digest = Sha256::digest(content.to_toml().as_bytes());
        digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn packet(&self) -> anyhow::Result<PacketSpec> {
        Ok(PacketSpec::new(self.packet.sigma, self.packet.k0, self.packet.x0)?)
    }

    pub fn grid(&self) -> anyhow::Result<Grid> {
        Ok(Grid::new(self.grid.x_min, self.grid.x_max, self.grid.n_points)?)
    }

    pub fn evolution(&self, probes: Vec<f64>) -> EvolutionConfig {
        EvolutionConfig { dt: self.evolution.dt, t_max: self.evolution.t_max, probes, ..EvolutionConfig::default() }
    }

    /// Barrier of height `ratio·<E>` and the given width at the configured left edge.
    pub fn barrier_for(&self, ratio: f64, width: f64) -> anyhow::Result<BarrierSpec> {
        let spec = self.packet()?;
        let mut barrier = BarrierSpec::relative_to(&spec, ratio, width)?;
        barrier.left_edge = self.barrier.left_edge;
        Ok(barrier)
    }

    pub fn snapshot_barrier(&self) -> anyhow::Result<BarrierSpec> {
        self.barrier_for(self.barrier.height_ratio, self.barrier.width)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let spec = self.packet()?;
        let grid = self.grid()?;
        self.evolution(Vec::new()).validate(&grid)?;
        tunnel_core::gaussian_packet(&spec, &grid)?;
        self.snapshot_barrier()?;
        for &t in &self.evolution.snapshot_times {
            if !(0.0..=self.evolution.t_max).contains(&t) {
                bail!("snapshot time {t} outside [0, {}]", self.evolution.t_max);
            }
        }
        let check_probe = |x: f64| -> anyhow::Result<()> {
            tunnel_core::propagator::probe_index(&grid, x)?;
            Ok(())
        };
        for &x in self.probes.positions.iter().chain(&self.analysis2.probes).chain(&self.sweep.probes) {
            check_probe(x)?;
        }
        let ratios = self
            .analysis2
            .height_ratios
            .iter()
            .chain(&self.analysis3.height_ratios)
            .chain(&self.sweep.height_ratios)
            .chain(std::iter::once(&self.analysis1.height_ratio));
        for &r in ratios {
            if !(r >= 0.0 && r.is_finite()) {
                bail!("height ratio {r} must be a finite non-negative number");
            }
        }
        let widths = self
            .analysis2
            .momentum_widths
            .iter()
            .chain(&self.analysis3.widths)
            .chain(&self.sweep.widths)
            .chain([&self.analysis1.width, &self.analysis2.width]);
        for &d in widths {
            if !(d >= 0.0 && d.is_finite()) {
                bail!("barrier width {d} must be a finite non-negative number");
            }
            check_probe(self.barrier.left_edge + d)?;
        }
        if let Some(n) = &self.nelson {
            if n.n_paths == 0 {
                bail!("nelson.n_paths must be at least 1");
            }
            if !(n.bin_width > 0.0) || !(n.clamp > 0.0) {
                bail!("nelson.bin_width and nelson.clamp must be positive");
            }
            if n.trace_every == 0 || n.drift_every == 0 {
                bail!("nelson.trace_every and nelson.drift_every must be at least 1");
            }
            check_probe(n.probe)?;
        }
        Ok(())
    }
}
