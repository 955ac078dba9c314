//! The analyses behind each subcommand. `compute_*` functions return plain
//! data; `run_*` functions also write the figure tables.

use std::path::{Path, PathBuf};

use anyhow::Context;
use rayon::prelude::*;
use tunnel_core::nelson::{self, histogram_l1, mean_first_passage, DriftWindow};
use tunnel_core::scattering::transmitted_probability;
use tunnel_core::{
    arrival_distribution, delta_t, evolve, gaussian_packet, occupation_distribution, simulate_ensemble,
    transmitted_momentum_with, transmitted_stats_with, ArrivalDistribution, BarrierSpec, Detector, EnsembleConfig,
    EntranceStats, Evolution, EvolutionConfig, PathEnsemble, TimeWindow, WaveField,
};

use crate::config::{ExperimentConfig, NelsonSection};
use crate::output::{num, Table, Writer};

fn window(cfg: &ExperimentConfig) -> TimeWindow {
    TimeWindow::up_to(cfg.evolution.t_max)
}

fn grid_run(
    cfg: &ExperimentConfig,
    barrier: &BarrierSpec,
    probes: Vec<f64>,
    snapshots: Vec<f64>,
) -> anyhow::Result<Evolution> {
    let grid = cfg.grid()?;
    let psi = gaussian_packet(&cfg.packet()?, &grid)?;
    let evolution = EvolutionConfig { snapshot_times: snapshots, ..cfg.evolution(probes) };
    Ok(evolve(&psi, barrier, &evolution)?)
}

fn distributions(cfg: &ExperimentConfig, run: &Evolution) -> anyhow::Result<Vec<ArrivalDistribution>> {
    run.probes
        .iter()
        .map(|p| arrival_distribution(p, window(cfg)).with_context(|| format!("arrival distribution at x = {}", p.x)))
        .collect()
}

/// Sorted, de-duplicated union of detector positions.
fn merge_positions(groups: &[&[f64]]) -> Vec<f64> {
    let mut xs: Vec<f64> = groups.iter().flat_map(|g| g.iter().copied()).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    xs
}

fn index_of(xs: &[f64], x: f64) -> usize {
    xs.iter().position(|&v| (v - x).abs() < 1e-12).expect("position was merged in")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshots {
    pub times: Vec<f64>,
    pub free: Vec<WaveField>,
    pub barrier: Vec<WaveField>,
    pub potential: Vec<f64>,
}

pub fn compute_snapshots(cfg: &ExperimentConfig) -> anyhow::Result<Snapshots> {
    let times = cfg.evolution.snapshot_times.clone();
    let barrier = cfg.snapshot_barrier()?;
    let (free, tunnel) = rayon::join(
        || grid_run(cfg, &BarrierSpec::free(), Vec::new(), times.clone()),
        || grid_run(cfg, &barrier, Vec::new(), times.clone()),
    );
    Ok(Snapshots { times, free: free?.snapshots, barrier: tunnel?.snapshots, potential: barrier.sample(&cfg.grid()?) })
}

pub fn run_snapshots(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<(Snapshots, Vec<PathBuf>)> {
    let snaps = compute_snapshots(cfg)?;
    let hash = cfg.hash();
    let mut w = Writer::new(out, "snapshots", &hash);
    for (k, &t) in snaps.times.iter().enumerate() {
        let mut free = Table::new(["x", "density"]);
        for (x, rho) in snaps.free[k].grid.points().zip(snaps.free[k].density()) {
            free.push_numbers(&[x, rho]);
        }
        w.table(&format!("snapshot_free_t{}.dat", num(t)), &free)?;

        let mut tunnel = Table::new(["x", "density", "potential"]);
        let field = &snaps.barrier[k];
        for ((x, rho), v) in field.grid.points().zip(field.density()).zip(&snaps.potential) {
            tunnel.push_numbers(&[x, rho, *v]);
        }
        w.table(&format!("snapshot_barrier_t{}.dat", num(t)), &tunnel)?;
    }
    Ok((snaps, w.written))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrivalStats {
    pub case: String,
    pub x: f64,
    pub mean: f64,
    pub peak: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis1 {
    pub probes: Vec<f64>,
    pub free: Vec<ArrivalDistribution>,
    pub tunnel: Vec<ArrivalDistribution>,
    pub stats: Vec<ArrivalStats>,
}

impl Analysis1 {
    pub fn stat(&self, case: &str, x: f64) -> Option<&ArrivalStats> {
        self.stats.iter().find(|s| s.case == case && (s.x - x).abs() < 1e-9)
    }
}

pub fn compute_analysis1(cfg: &ExperimentConfig) -> anyhow::Result<Analysis1> {
    let probes = cfg.probes.positions.clone();
    let barrier = cfg.barrier_for(cfg.analysis1.height_ratio, cfg.analysis1.width)?;
    let (free, tunnel) = rayon::join(
        || grid_run(cfg, &BarrierSpec::free(), probes.clone(), Vec::new()),
        || grid_run(cfg, &barrier, probes.clone(), Vec::new()),
    );
    let free = distributions(cfg, &free?)?;
    let tunnel = distributions(cfg, &tunnel?)?;
    let mut stats = Vec::new();
    for (case, dists) in [("free", &free), ("tunnel", &tunnel)] {
        for (x, d) in probes.iter().zip(dists.iter()) {
            stats.push(ArrivalStats { case: case.into(), x: *x, mean: d.mean(), peak: d.peak()? });
        }
    }
    Ok(Analysis1 { probes, free, tunnel, stats })
}

pub fn run_analysis1(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<(Analysis1, Vec<PathBuf>)> {
    let a = compute_analysis1(cfg)?;
    let hash = cfg.hash();
    let mut w = Writer::new(out, "analysis1", &hash);

    let mut columns = vec!["T".to_string()];
    for x in &a.probes {
        columns.push(format!("P_free_X{}", num(*x)));
        columns.push(format!("P_tunnel_X{}", num(*x)));
    }
    let mut dist = Table::new(columns);
    for (j, t) in a.free[0].times.iter().enumerate() {
        let mut row = vec![*t];
        for (f, b) in a.free.iter().zip(&a.tunnel) {
            row.push(f.p[j]);
            row.push(b.p[j]);
        }
        dist.push_numbers(&row);
    }
    w.table("analysis1_distributions.dat", &dist)?;

    let mut stats = Table::new(["case", "X", "mean_T", "peak_T"]);
    for s in &a.stats {
        stats.push(vec![s.case.clone(), num(s.x), num(s.mean), num(s.peak)]);
    }
    w.table("analysis1_stats.dat", &stats)?;
    Ok((a, w.written))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis2 {
    pub xs: Vec<f64>,
    pub free_means: Vec<f64>,
    pub height_ratios: Vec<f64>,
    /// `tunnel_means[h][j]` is `<T>` at `xs[j]` for barrier height `h`.
    pub tunnel_means: Vec<Vec<f64>>,
    pub momentum_widths: Vec<f64>,
    /// `k_m[h][j]` for `momentum_widths[j]`.
    pub k_m: Vec<Vec<f64>>,
}

impl Analysis2 {
    /// Detector position where the tunneling packet first overtakes the free
    /// one, by linear interpolation of `<T>_tunnel - <T>_free`.
    pub fn crossover(&self, h: usize) -> Option<f64> {
        first_sign_change(&self.xs, &self.tunnel_means[h], &self.free_means)
    }
}

pub fn first_sign_change(xs: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
    let diff: Vec<f64> = a.iter().zip(b).map(|(a, b)| a - b).collect();
    for j in 1..xs.len() {
        if diff[j - 1] > 0.0 && diff[j] <= 0.0 || diff[j - 1] < 0.0 && diff[j] >= 0.0 {
            let f = diff[j - 1] / (diff[j - 1] - diff[j]);
            return Some(xs[j - 1] + f * (xs[j] - xs[j - 1]));
        }
    }
    None
}

pub fn compute_analysis2(cfg: &ExperimentConfig) -> anyhow::Result<Analysis2> {
    let a2 = &cfg.analysis2;
    let exit = cfg.barrier.left_edge + a2.width;
    let xs = merge_positions(&[&[exit], &a2.probes]);
    let spec = cfg.packet()?;

    let free = grid_run(cfg, &BarrierSpec::free(), xs.clone(), Vec::new())?;
    let free_means = distributions(cfg, &free)?.iter().map(|d| d.mean()).collect();
    let tunnel_means = a2
        .height_ratios
        .par_iter()
        .map(|&r| {
            let run = grid_run(cfg, &cfg.barrier_for(r, a2.width)?, xs.clone(), Vec::new())?;
            Ok(distributions(cfg, &run)?.iter().map(|d| d.mean()).collect())
        })
        .collect::<anyhow::Result<Vec<Vec<f64>>>>()?;
    let k_m = a2
        .height_ratios
        .iter()
        .map(|&r| {
            a2.momentum_widths
                .par_iter()
                .map(|&d| Ok(transmitted_momentum_with(&spec, &cfg.barrier_for(r, d)?, a2.momentum_weight.into())?))
                .collect::<anyhow::Result<Vec<f64>>>()
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    Ok(Analysis2 {
        xs,
        free_means,
        height_ratios: a2.height_ratios.clone(),
        tunnel_means,
        momentum_widths: a2.momentum_widths.clone(),
        k_m,
    })
}

pub fn run_analysis2(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<(Analysis2, Vec<PathBuf>)> {
    let a = compute_analysis2(cfg)?;
    let hash = cfg.hash();
    let mut w = Writer::new(out, "analysis2", &hash);

    let mut columns = vec!["X".to_string(), "T_free".to_string()];
    columns.extend(a.height_ratios.iter().map(|r| format!("T_h{}E", num(*r))));
    let mut means = Table::new(columns);
    for (j, x) in a.xs.iter().enumerate() {
        let mut row = vec![*x, a.free_means[j]];
        row.extend(a.tunnel_means.iter().map(|m| m[j]));
        means.push_numbers(&row);
    }
    w.table("analysis2_mean_times.dat", &means)?;

    let mut columns = vec!["d".to_string()];
    columns.extend(a.height_ratios.iter().map(|r| format!("k_m_h{}E", num(*r))));
    let mut km = Table::new(columns);
    for (j, d) in a.momentum_widths.iter().enumerate() {
        let mut row = vec![*d];
        row.extend(a.k_m.iter().map(|k| k[j]));
        km.push_numbers(&row);
    }
    w.table("analysis2_momentum.dat", &km)?;
    Ok((a, w.written))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeltaPoint {
    pub height_ratio: f64,
    pub width: f64,
    /// `<T>_tunnel - <T>_free` at the barrier exit.
    pub delta_t: f64,
    pub delta_t_phi: f64,
    pub k_m: f64,
    pub tau_phi: f64,
    pub transmitted: f64,
    /// `(X, <T>_tunnel, <T>_free)` at each extra detector.
    pub means: Vec<(f64, f64, f64)>,
}

/// Runs every `(height, width)` point, sharing one free run whose detectors
/// cover all exits and extra probes.
fn delta_points(
    cfg: &ExperimentConfig,
    ratios: &[f64],
    widths: &[f64],
    extra: &[f64],
    weight: crate::config::WeightChoice,
    on_point: impl Fn(&DeltaPoint) -> anyhow::Result<()> + Sync,
) -> anyhow::Result<Vec<DeltaPoint>> {
    let spec = cfg.packet()?;
    let exits: Vec<f64> = widths.iter().map(|d| cfg.barrier.left_edge + d).collect();
    let all = merge_positions(&[&exits, extra]);
    let free = distributions(cfg, &grid_run(cfg, &BarrierSpec::free(), all.clone(), Vec::new())?)?;

    let pairs: Vec<(f64, f64)> = ratios.iter().flat_map(|&r| widths.iter().map(move |&d| (r, d))).collect();
    let points = pairs
        .par_iter()
        .map(|&(r, d)| {
            let barrier = cfg.barrier_for(r, d)?;
            let exit = barrier.right_edge();
            let xs = merge_positions(&[&[exit], extra]);
            let tunnel = distributions(cfg, &grid_run(cfg, &barrier, xs.clone(), Vec::new())?)?;
            let at_exit = index_of(&xs, exit);
            let dt = delta_t(&tunnel[at_exit], &free[index_of(&all, exit)])?;
            let stats = transmitted_stats_with(&spec, &barrier, weight.into())
                .with_context(|| format!("phase time at h = {r}<E>, d = {d}"))?;
            let means =
                extra.iter().map(|&x| (x, tunnel[index_of(&xs, x)].mean(), free[index_of(&all, x)].mean())).collect();
            let point = DeltaPoint {
                height_ratio: r,
                width: d,
                delta_t: dt,
                delta_t_phi: stats.delta_t_phi,
                k_m: stats.k_m,
                tau_phi: stats.tau_phi,
                transmitted: transmitted_probability(&spec, &barrier),
                means,
            };
            on_point(&point)?;
            Ok(point)
        })
        .collect::<anyhow::Result<Vec<DeltaPoint>>>()?;
    Ok(points)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Analysis3 {
    pub points: Vec<DeltaPoint>,
}

impl Analysis3 {
    pub fn series(&self, ratio: f64) -> Vec<&DeltaPoint> {
        self.points.iter().filter(|p| (p.height_ratio - ratio).abs() < 1e-12).collect()
    }

    pub fn point(&self, ratio: f64, width: f64) -> Option<&DeltaPoint> {
        self.series(ratio).into_iter().find(|p| (p.width - width).abs() < 1e-12)
    }
}

pub fn compute_analysis3(cfg: &ExperimentConfig) -> anyhow::Result<Analysis3> {
    let a3 = &cfg.analysis3;
    let points = delta_points(cfg, &a3.height_ratios, &a3.widths, &[], a3.momentum_weight, |_| Ok(()))?;
    Ok(Analysis3 { points })
}

fn delta_table(points: &[DeltaPoint]) -> Table {
    let mut t = Table::new(["h_over_E", "d", "delta_T", "delta_T_phi", "k_m", "tau_phi", "transmitted"]);
    for p in points {
        t.push_numbers(&[p.height_ratio, p.width, p.delta_t, p.delta_t_phi, p.k_m, p.tau_phi, p.transmitted]);
    }
    t
}

pub fn run_analysis3(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<(Analysis3, Vec<PathBuf>)> {
    let a = compute_analysis3(cfg)?;
    let hash = cfg.hash();
    let mut w = Writer::new(out, "analysis3", &hash);
    w.table("analysis3_delta.dat", &delta_table(&a.points))?;
    Ok((a, w.written))
}

/// Parameter sweep over heights × widths. Every point gets its own table,
/// written as soon as the point is done.
pub fn run_sweep(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<(Vec<DeltaPoint>, Vec<PathBuf>)> {
    let s = &cfg.sweep;
    let hash = cfg.hash();
    let written = std::sync::Mutex::new(Vec::new());
    let points = delta_points(cfg, &s.height_ratios, &s.widths, &s.probes, s.momentum_weight, |p| {
        let mut t = Table::new(["X", "mean_T_tunnel", "mean_T_free"]);
        for &(x, a, b) in &p.means {
            t.push_numbers(&[x, a, b]);
        }
        let mut w = Writer::new(out, "sweep", &hash);
        w.table(&format!("sweep_h{}E_d{}.dat", num(p.height_ratio), num(p.width)), &t)?;
        written.lock().expect("no panics while holding the lock").extend(w.written);
        Ok(())
    })?;
    let mut w = Writer::new(out, "sweep", &hash);
    w.table("sweep_summary.dat", &delta_table(&points))?;
    let mut files = written.into_inner().expect("lock is not poisoned");
    files.extend(w.written);
    Ok((points, files))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelsonCase {
    pub label: String,
    pub barrier: BarrierSpec,
    pub ensemble: PathEnsemble,
    pub counting: tunnel_core::CountingResult,
    pub p_n: ArrivalDistribution,
    pub p_grid: ArrivalDistribution,
    pub mean_n: f64,
    pub mean_grid: f64,
    pub l1: f64,
    pub first_passage: Option<ArrivalDistribution>,
    pub first_passage_mean: Option<f64>,
    /// `(t, L1)` between the position histogram and `|ψ|²`.
    pub histogram_l1: Vec<(f64, f64)>,
    pub transmitted_fraction: f64,
    pub grid_transmitted: f64,
    /// Whether the drift just left of the entrance takes both signs during `t ∈ [20, 35]`.
    pub hesitation: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelsonReport {
    pub cases: Vec<NelsonCase>,
    /// Entrance timing of each barrier case against the free ensemble.
    pub entrance: Vec<(String, EntranceStats)>,
}

impl NelsonReport {
    pub fn case(&self, label: &str) -> Option<&NelsonCase> {
        self.cases.iter().find(|c| c.label == label)
    }

    pub fn entrance(&self, label: &str) -> Option<&EntranceStats> {
        self.entrance.iter().find(|(l, _)| l == label).map(|(_, s)| s)
    }

    pub fn free_crossing_mean(&self) -> Option<f64> {
        self.entrance.first().map(|(_, s)| s.free_mean)
    }
}

fn case_label(width: f64) -> String {
    if width == 0.0 {
        "free".into()
    } else {
        format!("d{}", num(width))
    }
}

fn nelson_case(cfg: &ExperimentConfig, n: &NelsonSection, width: f64) -> anyhow::Result<NelsonCase> {
    let spec = cfg.packet()?;
    let grid = cfg.grid()?;
    let barrier = if width == 0.0 { BarrierSpec::free() } else { cfg.barrier_for(n.height_ratio, width)? };
    let entrance = cfg.barrier.left_edge;
    let t_max = cfg.evolution.t_max;
    let mut snapshot_times = n.histogram_times.clone();
    snapshot_times.push(t_max);
    let ens_cfg = EnsembleConfig {
        grid,
        dt: cfg.evolution.dt,
        t_max,
        clamp: n.clamp,
        detectors: vec![Detector::new(n.probe, n.bin_width)],
        crossings: merge_positions(&[&[entrance, n.probe]]),
        snapshot_times,
        traced_paths: n.traced_paths,
        trace_every: n.trace_every,
        drift_window: Some(DriftWindow { x_min: n.drift_x_min, x_max: n.drift_x_max, every: n.drift_every }),
    };
    let ensemble = simulate_ensemble(&spec, &barrier, n.n_paths, n.seed, &ens_cfg)?;
    let reference = ensemble.reference.as_ref().expect("grid reference is recorded");
    let w = window(cfg);
    let (counting, p_n, mean_n) = occupation_distribution(&ensemble, n.probe, w)?;
    let p_grid = arrival_distribution(&reference.probes[0], w)?;
    let first_passage = nelson::first_passage_distribution(&ensemble, n.probe, w).ok();
    let first_passage_mean = mean_first_passage(&ensemble, n.probe, w).ok();
    let histogram_l1 = ensemble
        .snapshots
        .iter()
        .zip(&reference.snapshots)
        .take(n.histogram_times.len())
        .map(|(s, g)| (s.t, histogram_l1(&s.positions, g, n.histogram_bin)))
        .collect();
    let last = reference.snapshots.last().expect("t_max snapshot is recorded");
    let grid_transmitted =
        if barrier.is_free() { 1.0 } else { last.probability_between(barrier.right_edge(), grid.x_max()) };
    let hesitation = {
        let (mut pos, mut neg) = (false, false);
        for s in ensemble.drift_samples.iter().filter(|s| (20.0..=35.0).contains(&s.t)) {
            for (x, b) in s.x.iter().zip(&s.b) {
                if *x >= entrance - 1.0 && *x < entrance {
                    pos |= *b > 0.0;
                    neg |= *b < 0.0;
                }
            }
        }
        pos && neg
    };
    Ok(NelsonCase {
        label: case_label(width),
        barrier,
        mean_grid: p_grid.mean(),
        l1: p_n.l1_distance(&p_grid),
        transmitted_fraction: if barrier.is_free() { 1.0 } else { ensemble.transmitted_fraction() },
        ensemble,
        counting,
        p_n,
        p_grid,
        mean_n,
        first_passage,
        first_passage_mean,
        histogram_l1,
        grid_transmitted,
        hesitation,
    })
}

pub fn compute_nelson(cfg: &ExperimentConfig) -> anyhow::Result<NelsonReport> {
    let n = cfg.nelson.clone().unwrap_or_default();
    let mut widths = vec![0.0];
    widths.extend(n.widths.iter().copied().filter(|&d| d > 0.0));
    // Ensembles parallelize internally over paths; run cases in sequence.
    let cases = widths.iter().map(|&d| nelson_case(cfg, &n, d)).collect::<anyhow::Result<Vec<_>>>()?;
    let free = &cases[0].ensemble;
    let mut entrance = Vec::new();
    for case in &cases[1..] {
        match tunnel_core::entrance_statistics(&case.ensemble, free) {
            Ok(s) => entrance.push((case.label.clone(), s)),
            Err(tunnel_core::Error::NoTransmittedPaths) => {}
            Err(e) => return Err(e.into()),
        }
    }
    if entrance.is_empty() {
        // Free ensemble against itself still reports the free crossing time.
        entrance.push(("free".into(), tunnel_core::entrance_statistics(free, free)?));
    }
    Ok(NelsonReport { cases, entrance })
}

pub fn run_nelson(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<(NelsonReport, Vec<PathBuf>)> {
    let report = compute_nelson(cfg)?;
    let hash = cfg.hash();
    let mut w = Writer::new(out, "nelson", &hash);

    let mut summary = Table::new([
        "case",
        "n_paths",
        "bin_width",
        "mean_T_counting",
        "mean_T_grid",
        "L1_counting_vs_grid",
        "mean_T_first_passage",
        "transmitted_fraction",
        "grid_transmitted",
        "hesitation",
    ]);
    let mut hist = Table::new(["case", "t", "L1_histogram"]);
    for c in &report.cases {
        let label = &c.label;
        summary.push(vec![
            label.clone(),
            c.ensemble.n_paths.to_string(),
            num(c.counting.bin_width),
            num(c.mean_n),
            num(c.mean_grid),
            num(c.l1),
            c.first_passage_mean.map_or("nan".into(), num),
            num(c.transmitted_fraction),
            num(c.grid_transmitted),
            c.hesitation.to_string(),
        ]);
        for &(t, l1) in &c.histogram_l1 {
            hist.push(vec![label.clone(), num(t), num(l1)]);
        }

        let mut counting = Table::new(["T", "rho_N", "P_N", "P_grid"]);
        for (j, t) in c.p_n.times.iter().enumerate() {
            counting.push_numbers(&[*t, c.counting.rho_n[j], c.p_n.p[j], c.p_grid.p[j]]);
        }
        w.table(&format!("nelson_{label}_counting.dat"), &counting)?;

        if let Some(fp) = &c.first_passage {
            let mut t = Table::new(["T", "P_first_passage"]);
            for (time, p) in fp.times.iter().zip(&fp.p) {
                t.push_numbers(&[*time, *p]);
            }
            w.table(&format!("nelson_{label}_first_passage.dat"), &t)?;
        }

        let ens = &c.ensemble;
        let mut columns = vec!["t".to_string()];
        columns.extend((0..ens.traces.len()).map(|p| format!("x{p}")));
        let mut paths = Table::new(columns);
        for (j, t) in ens.trace_times.iter().enumerate() {
            let mut row = vec![*t];
            row.extend(ens.traces.iter().map(|tr| tr[j]));
            paths.push_numbers(&row);
        }
        w.table(&format!("nelson_{label}_paths.dat"), &paths)?;

        let mut drift = Table::new(["x", "t", "b"]);
        for s in &ens.drift_samples {
            for (x, b) in s.x.iter().zip(&s.b) {
                drift.push_numbers(&[*x, s.t, *b]);
            }
        }
        w.table(&format!("nelson_{label}_drift.dat"), &drift)?;
    }
    w.table("nelson_summary.dat", &summary)?;
    w.table("nelson_histograms.dat", &hist)?;

    let mut entrance = Table::new([
        "case",
        "transmitted_paths",
        "mean_entrance",
        "earliest_entrance",
        "latest_entrance",
        "free_mean_crossing",
    ]);
    for (label, s) in &report.entrance {
        entrance.push(vec![
            label.clone(),
            s.transmitted_count.to_string(),
            num(s.transmitted_mean),
            num(s.transmitted_earliest),
            num(s.transmitted_latest),
            num(s.free_mean),
        ]);
    }
    w.table("nelson_entrance.dat", &entrance)?;
    Ok((report, w.written))
}
