//! End-to-end acceptance checks at their stated tolerances. Prints one line
//! per criterion and exits nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tunnel_cli::experiments::{self, first_sign_change};
use tunnel_cli::ExperimentConfig;
use tunnel_core::{
    evolve, evolve_with, free_gaussian_reference, gaussian_packet, transmission, transmitted_packet, BarrierSpec,
    EvolutionConfig, Grid, PacketSpec,
};

struct Report {
    lines: Vec<(String, bool, String)>,
}

impl Report {
    fn check(&mut self, id: &str, pass: bool, detail: String) {
        println!("criterion {id:<4} {}  {detail}", if pass { "PASS" } else { "FAIL" });
        self.lines.push((id.into(), pass, detail));
    }

    fn within(&mut self, id: &str, what: &str, value: f64, target: f64, tol: f64) {
        let pass = (value - target).abs() <= tol;
        self.check(id, pass, format!("{what} = {value:.4} (target {target} ± {tol})"));
    }

    fn error(&mut self, ids: &[&str], err: anyhow::Error) {
        for id in ids {
            self.check(id, false, format!("error: {err:#}"));
        }
    }
}

fn criteria_1_2(r: &mut Report, cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let start = Instant::now();
    let free_only = evolve(
        &gaussian_packet(&cfg.packet()?, &cfg.grid()?)?,
        &BarrierSpec::free(),
        &EvolutionConfig::with_probes(vec![50.0]),
    )?;
    let elapsed = start.elapsed().as_secs_f64();
    drop(free_only);

    let a = experiments::compute_analysis1(cfg)?;
    let free = a.stat("free", 50.0).expect("probe at 50");
    let tunnel = a.stat("tunnel", 50.0).expect("probe at 50");
    r.within("1a", "free <T>_50", free.mean, 50.13, 0.05);
    r.within("1b", "free peak_50", free.peak, 49.94, 0.05);
    r.check("1c", elapsed < 60.0, format!("free run took {elapsed:.1} s (limit 60 s)"));
    r.within("2", "tunnel <T>_50 (h=2<E>, d=4)", tunnel.mean, 47.65, 0.10);
    Ok(())
}

fn criteria_3_4_5(r: &mut Report, cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let a = experiments::compute_analysis3(cfg)?;
    let dt = |h: f64, d: f64| a.point(h, d).map(|p| p.delta_t).expect("point in sweep");
    r.within("3a", "dT(2<E>, 0.5)", dt(2.0, 0.5), 0.084, 0.01);
    r.within("3b", "dT(2<E>, 1)", dt(2.0, 1.0), -0.138, 0.01);

    let series = |h: f64| a.series(h).iter().map(|p| (p.width, p.delta_t, p.delta_t_phi)).collect::<Vec<_>>();
    let s11 = series(1.1);
    let changes = s11.windows(2).filter(|w| w[0].1.signum() != w[1].1.signum()).count();
    let last = s11.last().expect("non-empty sweep").1;
    r.check(
        "4a",
        changes >= 2 && last > 0.0,
        format!("h=1.1<E>: {changes} sign changes on (0, 10], dT(d=10) = {last:.4}"),
    );
    let min05 = series(0.5).iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    r.check("4b", min05 >= -0.02, format!("h=0.5<E>: min dT = {min05:.4} (>= -0.02)"));
    let max2 = series(2.0).iter().filter(|p| (1.0..=4.0).contains(&p.0)).map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    r.check("4c", max2 < 0.0, format!("h=2<E>: max dT on [1, 4] = {max2:.4} (< 0)"));

    let mut worst = 0.0f64;
    for h in [0.5, 1.1, 2.0] {
        for p in series(h).iter().filter(|p| p.0 <= 0.5) {
            worst = worst.max((p.2 - p.1).abs());
        }
    }
    r.check("5a", worst <= 0.03, format!("max |dT_phi - dT| for d <= 0.5 = {worst:.4} (<= 0.03)"));
    let gap = |d: f64| a.point(1.1, d).map(|p| (p.delta_t_phi - p.delta_t).abs()).expect("point in sweep");
    let (g8, g05) = (gap(8.0), gap(0.5));
    r.check("5b", g8 > g05, format!("h=1.1<E>: |dT_phi - dT| at d=8 = {g8:.4} vs d=0.5 = {g05:.4}"));
    Ok(())
}

/// Least-squares line through `(x, y)`; returns slope and max |residual|.
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let residual = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).abs()).fold(0.0, f64::max);
    (slope, residual)
}

fn criterion_6(r: &mut Report, cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let a = experiments::compute_analysis2(cfg)?;
    let pick = |series: &[f64]| -> (Vec<f64>, Vec<f64>) {
        a.xs.iter().zip(series).filter(|(x, _)| (10.0..=50.0).contains(*x)).map(|(x, t)| (*x, *t)).unzip()
    };
    let h2 = a.height_ratios.iter().position(|&h| h == 2.0).expect("h = 2<E> configured");
    let (x, t) = pick(&a.tunnel_means[h2]);
    let (slope, residual) = linear_fit(&x, &t);
    let (xf, tf) = pick(&a.free_means);
    let (free_slope, _) = linear_fit(&xf, &tf);
    r.check(
        "6a",
        residual < 0.1 && slope < free_slope,
        format!("h=2<E>, d=4: slope {slope:.5} vs free {free_slope:.5}, max residual {residual:.2e} (< 0.1)"),
    );
    let h05 = a.height_ratios.iter().position(|&h| h == 0.5).expect("h = 0.5<E> configured");
    let cross = a.crossover(h05);
    r.check(
        "6b",
        cross.is_some_and(|x| (10.0..=20.0).contains(&x)),
        format!(
            "h=0.5<E> crossover X = {} (target [10, 20]); <T>_tunnel - <T>_free at X=10: {:.4}, X=50: {:.4}",
            cross.map_or("none".into(), |x| format!("{x:.2}")),
            a.tunnel_means[h05][1] - a.free_means[1],
            a.tunnel_means[h05].last().unwrap() - a.free_means.last().unwrap(),
        ),
    );
    if let Some(h11) = a.height_ratios.iter().position(|&h| h == 1.1) {
        let c = first_sign_change(&a.xs, &a.tunnel_means[h11], &a.free_means);
        println!("          info  h=1.1<E> crossover X = {}", c.map_or("none".into(), |x| format!("{x:.2}")));
    }
    Ok(())
}

fn max_error_at(spec: &PacketSpec, dx: f64, dt: f64, t: f64) -> anyhow::Result<f64> {
    let grid = Grid::with_spacing(-300.0, 200.0, dx)?;
    let config = EvolutionConfig { dt, t_max: t, snapshot_times: vec![t], ..Default::default() };
    let run = evolve(&gaussian_packet(spec, &grid)?, &BarrierSpec::free(), &config)?;
    let field = &run.snapshots[0];
    Ok(grid
        .points()
        .zip(&field.amplitudes)
        .map(|(x, a)| (a - free_gaussian_reference(spec, x, t)).norm())
        .fold(0.0, f64::max))
}

fn criterion_7(r: &mut Report, cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let spec = cfg.packet()?;
    let grid = cfg.grid()?;
    let barrier = cfg.barrier_for(2.0, 4.0)?;
    let config = EvolutionConfig::default();
    let mut drift = 0.0f64;
    evolve_with(&gaussian_packet(&spec, &grid)?, &barrier, &config, |psi| {
        drift = drift.max((psi.norm_sqr() - 1.0).abs());
    })?;
    r.check("7a", drift <= 1e-10, format!("norm drift over {} steps = {drift:.2e} (<= 1e-10)", config.n_steps()));

    let coarse = max_error_at(&spec, 0.1, 0.01, 25.0)?;
    let fine = max_error_at(&spec, 0.05, 0.005, 25.0)?;
    r.check("7b", coarse <= 1e-3, format!("max |psi - exact| at t=25, dx=0.1, dt=0.01 = {coarse:.3e} (<= 1e-3)"));
    let ratio = coarse / fine;
    r.check("7c", (3.5..=4.5).contains(&ratio), format!("error ratio on halving dx and dt = {ratio:.3} (~4)"));
    Ok(())
}

fn criterion_8(r: &mut Report, cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let k = rng.random_range(0.05..6.0);
        let barrier = BarrierSpec::new(rng.random_range(0.0..20.0), rng.random_range(0.0..15.0))?;
        let t = transmission(k, &barrier)?;
        worst = worst.max((t.magnitude.powi(2) + t.reflection_magnitude.powi(2) - 1.0).abs());
    }
    r.check("8a", worst <= 1e-12, format!("max ||T|^2 + |R|^2 - 1| over 1000 draws = {worst:.2e} (<= 1e-12)"));

    let spec = cfg.packet()?;
    let grid = cfg.grid()?;
    let barrier = cfg.barrier_for(2.0, 4.0)?;
    let config = EvolutionConfig { t_max: 48.0, snapshot_times: vec![48.0], ..Default::default() };
    let run = evolve(&gaussian_packet(&spec, &grid)?, &barrier, &config)?;
    let field = &run.snapshots[0];
    let (peak_x, peak_rho) = grid
        .points()
        .zip(field.density())
        .filter(|(x, _)| *x > barrier.right_edge() + 5.0)
        .fold((0.0, 0.0), |best, (x, rho)| if rho > best.1 { (x, rho) } else { best });
    let reconstructed = transmitted_packet(&spec, &barrier, peak_x, 48.0)?.norm_sqr();
    let rel = (reconstructed - peak_rho).abs() / peak_rho;
    let at50 = grid.nearest_index(50.0).expect("x = 50 on grid");
    let rel50 = (transmitted_packet(&spec, &barrier, 50.0, 48.0)?.norm_sqr() - field.density()[at50]).abs()
        / field.density()[at50];
    r.check(
        "8b",
        rel <= 0.02,
        format!("packet reconstruction at grid peak x = {peak_x:.3}, t = 48: rel. error {rel:.2e} (<= 0.02); at x = 50: {rel50:.2e}"),
    );
    Ok(())
}

fn criteria_9_10(r: &mut Report, cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let report = experiments::compute_nelson(cfg)?;
    let d1 = report.case("d1").expect("d = 1 ensemble");
    r.check(
        "9a",
        d1.l1 <= 0.05,
        format!("h=2<E>, d=1, N={}: L1(P^N_50, P_50) = {:.4} (<= 0.05)", d1.ensemble.n_paths, d1.l1),
    );
    r.check(
        "9b",
        (d1.mean_n - d1.mean_grid).abs() <= 0.2,
        format!("<T>^N = {:.4} vs <T> = {:.4}, diff {:.4} (<= 0.2)", d1.mean_n, d1.mean_grid, d1.mean_n - d1.mean_grid),
    );
    let worst = d1.histogram_l1.iter().map(|p| p.1).fold(0.0, f64::max);
    let listed: Vec<String> = d1.histogram_l1.iter().map(|(t, l)| format!("t={t}: {l:.4}")).collect();
    r.check("9c", worst <= 0.05, format!("position histogram L1 {} (<= 0.05)", listed.join(", ")));

    let free_cross = report.free_crossing_mean().expect("free crossing recorded");
    r.within("10a", "free mean x=0 crossing", free_cross, 25.0, 0.5);
    let e1 = report.entrance("d1").expect("d = 1 transmits");
    r.check(
        "10b",
        e1.transmitted_mean < 25.0,
        format!("d=1: transmitted mean entrance {:.3} over {} paths (< 25)", e1.transmitted_mean, e1.transmitted_count),
    );
    let e05 = report.entrance("d0.5").expect("d = 0.5 transmits");
    r.check(
        "10c",
        e05.transmitted_latest > 25.0,
        format!("d=0.5: latest transmitted entrance {:.3} (> 25)", e05.transmitted_latest),
    );
    let fp = d1.first_passage_mean.unwrap_or(f64::NAN);
    r.check(
        "10d",
        fp <= d1.mean_n,
        format!("d=1, X=50: first-passage mean {fp:.4} <= multiple-counting mean {:.4}", d1.mean_n),
    );
    Ok(())
}

fn main() -> ExitCode {
    let cfg = ExperimentConfig { nelson: Some(Default::default()), ..Default::default() };
    let mut r = Report { lines: Vec::new() };

    if let Err(e) = criteria_1_2(&mut r, &cfg) {
        r.error(&["1", "2"], e);
    }
    if let Err(e) = criteria_3_4_5(&mut r, &cfg) {
        r.error(&["3", "4", "5"], e);
    }
    if let Err(e) = criterion_6(&mut r, &cfg) {
        r.error(&["6"], e);
    }
    if let Err(e) = criterion_7(&mut r, &cfg) {
        r.error(&["7"], e);
    }
    if let Err(e) = criterion_8(&mut r, &cfg) {
        r.error(&["8"], e);
    }
    if let Err(e) = criteria_9_10(&mut r, &cfg) {
        r.error(&["9", "10"], e);
    }

    let failed: Vec<&str> = r.lines.iter().filter(|l| !l.1).map(|l| l.0.as_str()).collect();
    println!("acceptance: {} passed, {} failed", r.lines.len() - failed.len(), failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
