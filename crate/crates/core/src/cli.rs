//! Configuration ingestion and experiment orchestration for the command-line
//! front end.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::ensemble::{run_ensemble, EnsembleOptions, EnsembleResult};
use crate::error::{Error, Result};
use crate::master_eq::integrate_populations;
use crate::model::{Order, SystemConfig};
use crate::output::OutputSet;
use crate::renorm::alpha_table;
use crate::stats::{histogram, FluctuationReport, WorkHistogram};

/// Histogram bin width in units of ħω₀.
pub const DEFAULT_BIN_WIDTH: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Master-equation populations for n = 0, 1, 2.
    Populations,
    /// Local adiabatic parameters over one drive cycle.
    Alphas,
    /// Work distributions and fluctuation reports of the consistent ensembles.
    WorkDistribution,
    /// Work of the n_order dynamics with heats from every frame order.
    MixedOrder,
    /// Integral fluctuation theorem for the n_order dynamics.
    IftCheck,
}

impl Mode {
    fn parse(s: &str) -> Result<Mode> {
        <Mode as ValueEnum>::from_str(s, true).map_err(|_| {
            Error::invalid(
                "mode",
                format!("`{s}` is not one of populations, alphas, work-distribution, mixed-order, ift-check"),
            )
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub config: SystemConfig,
    pub mode: Mode,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub bin_width: f64,
    pub trajectory_log: bool,
    pub config_hash: String,
}

/// Hex SHA-256 of the canonical JSON form of the configuration.
pub fn config_hash(config: &SystemConfig) -> String {
    let json = serde_json::to_vec(config).expect("configuration serializes");
    Sha256::digest(json)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

#[derive(Debug, Clone, Default, Parser)]
#[command(
    name = "adiabatic-qjump",
    version,
    about = "Quantum-jump simulation of a slowly driven dissipative qubit"
)]
pub struct CliArgs {
    /// Flat `key = value` configuration file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub n_order: Option<u32>,
    #[arg(long)]
    pub n_traj: Option<u64>,
    #[arg(long)]
    pub n_steps: Option<u64>,
    #[arg(long)]
    pub n_cycles: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub omega0: Option<f64>,
    #[arg(long)]
    pub lambda0: Option<f64>,
    #[arg(long)]
    pub omega_d: Option<f64>,
    #[arg(long)]
    pub g_re: Option<f64>,
    #[arg(long)]
    pub g_im: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub t0: Option<f64>,
    #[arg(long)]
    pub me_steps_per_cycle: Option<u64>,
    #[arg(long)]
    pub n_output: Option<u64>,
    #[arg(long)]
    pub bin_width: Option<f64>,
    /// Also write every jump and measurement to trajectories.log.
    #[arg(long)]
    pub trajectory_log: bool,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e: T::Err| Error::invalid(key, format!("cannot parse `{value}`: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::invalid(key, format!("expected a boolean, got `{value}`"))),
    }
}

/// Applies one `key = value` setting onto `args` unless a flag already set it.
fn apply_setting(args: &mut CliArgs, key: &str, value: &str) -> Result<()> {
    macro_rules! fill {
        ($field:ident) => {
            if args.$field.is_none() {
                args.$field = Some(parse_value(key, value)?);
            }
        };
    }
    match key {
        "mode" => {
            if args.mode.is_none() {
                args.mode = Some(Mode::parse(value)?);
            }
        }
        "n_order" => fill!(n_order),
        "n_traj" => fill!(n_traj),
        "n_steps" => fill!(n_steps),
        "n_cycles" => fill!(n_cycles),
        "seed" => fill!(seed),
        "out_dir" => fill!(out_dir),
        "workers" => fill!(workers),
        "omega0" => fill!(omega0),
        "lambda0" => fill!(lambda0),
        "omega_d" => fill!(omega_d),
        "g_re" => fill!(g_re),
        "g_im" => fill!(g_im),
        "mu" => fill!(mu),
        "beta" => fill!(beta),
        "t0" => fill!(t0),
        "me_steps_per_cycle" => fill!(me_steps_per_cycle),
        "n_output" => fill!(n_output),
        "bin_width" => fill!(bin_width),
        "trajectory_log" => args.trajectory_log |= parse_bool(key, value)?,
        _ => return Err(Error::UnknownKey(key.to_owned())),
    }
    Ok(())
}

/// Merges a flat `key = value` text into `args`; flags already set win.
pub fn merge_config_text(args: &mut CliArgs, text: &str) -> Result<()> {
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::invalid(line, "expected `key = value`"))?;
        let value = value.trim().trim_matches('"');
        apply_setting(args, key.trim(), value)?;
    }
    Ok(())
}

/// Resolves defaults, the optional config file and flags into a manifest.
pub fn parse_config(args: &CliArgs) -> Result<RunManifest> {
    let mut a = args.clone();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        merge_config_text(&mut a, &text)?;
    }
    let d = SystemConfig::default();
    let config = SystemConfig {
        omega0: a.omega0.unwrap_or(d.omega0),
        lambda0: a.lambda0.unwrap_or(d.lambda0),
        omega_d: a.omega_d.unwrap_or(d.omega_d),
        g_re: a.g_re.unwrap_or(d.g_re),
        g_im: a.g_im.unwrap_or(d.g_im),
        mu: a.mu.unwrap_or(d.mu),
        beta: a.beta.unwrap_or(d.beta),
        t0: a.t0.unwrap_or(d.t0),
        n_cycles: a.n_cycles.unwrap_or(d.n_cycles),
        n_order: a.n_order.map(Order::try_from).transpose()?.unwrap_or(d.n_order),
        n_steps: a.n_steps.unwrap_or(d.n_steps),
        n_traj: a.n_traj.unwrap_or(d.n_traj),
        seed: a.seed.unwrap_or(d.seed),
        me_steps_per_cycle: a.me_steps_per_cycle.unwrap_or(d.me_steps_per_cycle),
        n_output: a.n_output.unwrap_or(d.n_output),
    };
    config.validate()?;
    let bin_width = a.bin_width.unwrap_or(DEFAULT_BIN_WIDTH);
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::invalid("bin_width", format!("must be > 0, got {bin_width}")));
    }
    Ok(RunManifest {
        config_hash: config_hash(&config),
        config,
        mode: a.mode.unwrap_or(Mode::WorkDistribution),
        out_dir: a.out_dir.unwrap_or_else(|| PathBuf::from("out")),
        workers: a.workers.unwrap_or(0),
        bin_width,
        trajectory_log: a.trajectory_log,
    })
}

/// Worst |R − β(W − ΔF)| over an ensemble.
pub fn identity_residual(result: &EnsembleResult, beta: f64) -> f64 {
    let n = result.order.index();
    result
        .summaries
        .iter()
        .map(|s| (s.entropy - beta * (s.work[n] - result.delta_f)).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub mode: Mode,
    pub config_hash: String,
    pub reports: Vec<FluctuationReport>,
    /// Worst per-trajectory |R − β(W − ΔF)| over the ensembles with an IFT report.
    pub max_entropy_identity_residual: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
struct Metadata<'a> {
    config_hash: &'a str,
    seed: u64,
    mode: Mode,
    workers: usize,
    trajectory_count: u64,
    wall_time_s: f64,
    files: Vec<String>,
    warnings: Vec<String>,
    config: &'a SystemConfig,
}

/// Outcome of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub files: Vec<PathBuf>,
    pub summary: Option<Summary>,
    pub warnings: Vec<String>,
}

fn histogram_csv(hists: &[(Order, WorkHistogram)], width: f64) -> String {
    let lo = hists.iter().filter_map(|(_, h)| h.counts.keys().next().copied()).min();
    let hi = hists.iter().filter_map(|(_, h)| h.counts.keys().next_back().copied()).max();
    let mut csv = String::from("W_over_hw0,density_n0,density_n1,density_n2\n");
    if let (Some(lo), Some(hi)) = (lo, hi) {
        for bin in lo..=hi {
            let mut cols = [0.0; 3];
            for (order, h) in hists {
                cols[order.index()] = h.density(bin);
            }
            let _ = writeln!(csv, "{},{},{},{}", bin as f64 * width, cols[0], cols[1], cols[2]);
        }
    }
    csv
}

fn trajectory_log(results: &[&EnsembleResult]) -> String {
    let mut log = String::from(
        "# jump,traj_index,order,t_j,channel,omega01_n,gamma_fwd,gamma_rev\n\
         # traj,traj_index,order,k_init,l_final,E_init,E_final\n",
    );
    for r in results {
        for rec in r.records.iter().flatten() {
            for e in &rec.events {
                let _ = writeln!(
                    log,
                    "jump,{},{},{},{},{},{},{}",
                    rec.index, rec.order, e.t_j, e.channel, e.omega01_n, e.gamma_forward, e.gamma_reversed
                );
            }
            let _ = writeln!(
                log,
                "traj,{},{},{},{},{},{}",
                rec.index,
                rec.order,
                rec.k_init.symbol(),
                rec.l_final.symbol(),
                rec.e_init,
                rec.e_final
            );
        }
    }
    log
}

fn ensemble(m: &RunManifest, order: Order) -> Result<EnsembleResult> {
    run_ensemble(
        &m.config,
        order,
        m.config.n_traj,
        &EnsembleOptions {
            workers: m.workers,
            populations: false,
            keep_records: m.trajectory_log,
        },
    )
}

fn execute(m: &RunManifest, out: &mut OutputSet) -> Result<(Option<Summary>, Vec<String>, u64)> {
    let c = &m.config;
    let n = c.n_traj as usize;
    match m.mode {
        Mode::Alphas => {
            let mut csv = String::from("t_over_Tdrive,alpha1,alpha2\n");
            for s in alpha_table(c, c.n_output as usize) {
                let _ = writeln!(csv, "{},{},{}", s.t_over_tdrive, s.alpha1, s.alpha2);
            }
            out.write("alphas.csv", csv.as_bytes())?;
            Ok((None, Vec::new(), 0))
        }
        Mode::Populations => {
            let series: Vec<_> = Order::ALL.iter().map(|&o| integrate_populations(c, o)).collect();
            let mut csv = String::from("t_over_Tdrive,rho_ee_n0,rho_ee_n1,rho_ee_n2\n");
            for (j, &t) in series[0].times.iter().enumerate() {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    t / c.t_drive(),
                    series[0].rho_ee[j],
                    series[1].rho_ee[j],
                    series[2].rho_ee[j]
                );
            }
            out.write("populations.csv", csv.as_bytes())?;
            let mut warnings: Vec<String> = series.into_iter().flat_map(|s| s.warnings).collect();
            warnings.dedup();
            Ok((None, warnings, 0))
        }
        Mode::WorkDistribution => {
            let mut reports = Vec::new();
            let mut hists = Vec::new();
            let mut results = Vec::new();
            let mut residual: f64 = 0.0;
            for order in Order::ALL {
                let r = ensemble(m, order)?;
                let w = r.work(order, n)?;
                reports.push(FluctuationReport::new(&w, Some(&r.entropy(n)), c, r.delta_f)?);
                hists.push((order, histogram(&w, m.bin_width)?));
                residual = residual.max(identity_residual(&r, c.beta));
                results.push(r);
            }
            out.write("work_hist.csv", histogram_csv(&hists, m.bin_width).as_bytes())?;
            finish_ensembles(m, out, reports, Some(residual), &results)
        }
        Mode::MixedOrder | Mode::IftCheck => {
            let r = ensemble(m, c.n_order)?;
            let assigned: Vec<Order> = if m.mode == Mode::MixedOrder {
                Order::ALL.to_vec()
            } else {
                vec![c.n_order]
            };
            let mut reports = Vec::new();
            let mut hists = Vec::new();
            for n_prime in assigned {
                let w = r.work(n_prime, n)?;
                let entropy = (n_prime == c.n_order).then(|| r.entropy(n));
                reports.push(FluctuationReport::new(&w, entropy.as_deref(), c, r.delta_f)?);
                hists.push((n_prime, histogram(&w, m.bin_width)?));
            }
            if m.mode == Mode::MixedOrder {
                out.write("work_hist.csv", histogram_csv(&hists, m.bin_width).as_bytes())?;
            }
            let residual = identity_residual(&r, c.beta);
            finish_ensembles(m, out, reports, Some(residual), &[r])
        }
    }
}

fn finish_ensembles(
    m: &RunManifest,
    out: &mut OutputSet,
    reports: Vec<FluctuationReport>,
    residual: Option<f64>,
    results: &[EnsembleResult],
) -> Result<(Option<Summary>, Vec<String>, u64)> {
    let summary = Summary {
        mode: m.mode,
        config_hash: m.config_hash.clone(),
        reports,
        max_entropy_identity_residual: residual,
    };
    out.write("summary.json", &serde_json::to_vec_pretty(&summary)?)?;
    if m.trajectory_log {
        let refs: Vec<&EnsembleResult> = results.iter().collect();
        out.write("trajectories.log", trajectory_log(&refs).as_bytes())?;
    }
    let mut warnings: Vec<String> = results.iter().flat_map(|r| r.warnings.clone()).collect();
    warnings.dedup();
    let count = results.iter().map(|r| r.len() as u64).sum();
    Ok((Some(summary), warnings, count))
}

/// Executes the manifest, writing all artifacts into `out_dir`. On failure
/// every file written by this run is removed again.
pub fn run(manifest: &RunManifest) -> Result<RunOutcome> {
    let start = Instant::now();
    let mut out = OutputSet::create(&manifest.out_dir)?;
    let result = execute(manifest, &mut out).and_then(|(summary, warnings, count)| {
        let meta = Metadata {
            config_hash: &manifest.config_hash,
            seed: manifest.config.seed,
            mode: manifest.mode,
            workers: manifest.workers,
            trajectory_count: count,
            wall_time_s: start.elapsed().as_secs_f64(),
            files: out.file_names(),
            warnings: warnings.clone(),
            config: &manifest.config,
        };
        out.write("metadata.json", &serde_json::to_vec_pretty(&meta)?)?;
        Ok((summary, warnings))
    });
    match result {
        Ok((summary, warnings)) => Ok(RunOutcome {
            files: out.into_paths(),
            summary,
            warnings,
        }),
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}
