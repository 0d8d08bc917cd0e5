//! Command-line front end: config ingestion, experiment orchestration and
//! plot-data emission.
//!
//! Exit codes: 0 pass, 1 threshold fail, 2 config invalid, 3 numeric failure.
//! Every CSV body is deterministic for a fixed config and seed; wall-clock
//! metadata goes to a separate `run_meta.txt`.

mod config;

use besselab::equilibrium::{check_variational, solve_equilibrium_one_band, SupportBands};
use besselab::kernels;
use besselab::parametrix::check_matching;
use besselab::potential::{validate, EnsembleParams, Potential};
use besselab::sampler::{default_proposal_scale, run_chain, McmcConfig};
use besselab::szego::{check_szego, solve_xi};
use besselab::universality::universality_sweep;
use clap::{Parser, Subcommand};
use config::RunConfig;
use sha2::{Digest, Sha256};
use std::path::{Path, PathBuf};
use std::time::SystemTime;

#[derive(Parser)]
#[command(name = "besselab", about = "Numerical experiments for eigenvalue correlations at the origin of the spectrum")]
struct Cli {
    /// Path to the TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory override.
    #[arg(long)]
    out: Option<String>,
    /// Seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Matrix-size list override, comma separated.
    #[arg(long, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    /// Singularity exponent override.
    #[arg(long)]
    alpha: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the equilibrium measure and verify the variational conditions.
    Equilibrium,
    /// Rescaled-kernel sweep against the origin Bessel kernel.
    Universality,
    /// Multi-interval Szego function: solve and verify the jump conditions.
    Szego,
    /// Local/outer parametrix matching decay over the size list.
    Parametrix,
    /// Log-gas Metropolis chain against the equilibrium density.
    Mcmc,
    /// Tabulate the closed-form limit kernels on the grid.
    KernelTable,
}

const EXIT_THRESHOLD: i32 = 1;
const EXIT_CONFIG: i32 = 2;
const EXIT_NUMERIC: i32 = 3;

fn main() {
    let cli = Cli::parse();
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot read config {}: {e}", cli.config.display());
            return EXIT_CONFIG;
        }
    };
    let mut cfg = match RunConfig::parse(&text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("invalid config: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Some(out) = cli.out {
        cfg.out_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n_list) = cli.n_list {
        cfg.ensemble.n_list = n_list;
    }
    if let Some(alpha) = cli.alpha {
        cfg.ensemble.alpha = alpha;
    }

    let potential = Potential::new(cfg.potential.coefficients.clone());
    let max_n = cfg.ensemble.n_list.iter().copied().max().unwrap_or(0);
    let probe = EnsembleParams::new(cfg.ensemble.alpha, max_n.max(1));
    let violations = validate(&potential, &probe);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("config invalid: {v}");
        }
        return EXIT_CONFIG;
    }
    if cfg.ensemble.n_list.is_empty() {
        eprintln!("config invalid: n_list must not be empty");
        return EXIT_CONFIG;
    }
    if max_n > cfg.quadrature.max_degree {
        eprintln!(
            "config invalid: n = {max_n} exceeds quadrature.max_degree = {}",
            cfg.quadrature.max_degree
        );
        return EXIT_CONFIG;
    }

    let out_dir = PathBuf::from(&cfg.out_dir);
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        eprintln!("cannot create output directory: {e}");
        return EXIT_CONFIG;
    }
    let hash = config_hash(&cfg);
    write_meta(&out_dir, &hash);

    let result = match cli.command {
        Command::Equilibrium => cmd_equilibrium(&cfg, &potential, &out_dir, &hash),
        Command::Universality => cmd_universality(&cfg, &potential, &out_dir, &hash),
        Command::Szego => cmd_szego(&cfg, &potential, &out_dir, &hash),
        Command::Parametrix => cmd_parametrix(&cfg, &potential, &out_dir, &hash),
        Command::Mcmc => cmd_mcmc(&cfg, &potential, &out_dir, &hash),
        Command::KernelTable => cmd_kernel_table(&cfg, &out_dir, &hash),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("numeric failure: {msg}");
            EXIT_NUMERIC
        }
    }
}

// hash of the semantic configuration: the output location does not affect
// any computed value and is excluded
fn config_hash(cfg: &RunConfig) -> String {
    let mut semantic = cfg.clone();
    semantic.out_dir = String::new();
    let mut hasher = Sha256::new();
    hasher.update(semantic.canonical().as_bytes());
    let digest = hasher.finalize();
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn write_meta(out_dir: &Path, hash: &str) {
    let stamp = SystemTime::now()
        .duration_since(SystemTime::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let _ = std::fs::write(
        out_dir.join("run_meta.txt"),
        format!("config_hash = {hash}\nunix_time = {stamp}\n"),
    );
}

fn write_csv(path: &Path, hash: &str, header: &str, rows: &[String]) -> Result<(), String> {
    let mut body = format!("# config {hash}\n{header}\n");
    for row in rows {
        body.push_str(row);
        body.push('\n');
    }
    std::fs::write(path, body).map_err(|e| e.to_string())
}

fn fmt(x: f64) -> String {
    format!("{x:.15e}")
}

fn cmd_equilibrium(
    _cfg: &RunConfig,
    potential: &Potential,
    out: &Path,
    hash: &str,
) -> Result<i32, String> {
    let eq = solve_equilibrium_one_band(potential).map_err(|e| e.to_string())?;
    let (a, b) = eq.support.bands[0];

    let samples: Vec<String> = (0..=200)
        .map(|i| {
            let x = a + (b - a) * i as f64 / 200.0;
            format!("{},{}", fmt(x), fmt(eq.eval_density(x)))
        })
        .collect();
    write_csv(&out.join("psi_samples.csv"), hash, "x,psi", &samples)?;

    let inside: Vec<f64> = (0..50)
        .map(|i| a + (b - a) * (0.05 + 0.9 * i as f64 / 49.0))
        .collect();
    let width = b - a;
    let outside = vec![a - 0.5 * width, a - 0.2 * width, b + 0.2 * width, b + 0.5 * width];
    let report = check_variational(&eq, potential, &inside, &outside);
    let rows: Vec<String> = vec![
        format!("max_equality_residual,{}", fmt(report.max_equality_residual)),
        format!("min_outside_margin,{}", fmt(report.min_outside_margin)),
        format!("h_min_on_band,{}", fmt(report.h_min_on_band)),
        format!("singular,{}", report.singular),
    ];
    write_csv(&out.join("variational_report.csv"), hash, "metric,value", &rows)?;

    let summary = format!(
        "# config {hash}\n{}ell = {}\npsi0 = {}\nmax_equality_residual = {}\nmin_outside_margin = {}\n",
        eq.summary_record(),
        fmt(eq.ell),
        fmt(eq.psi0),
        fmt(report.max_equality_residual),
        fmt(report.min_outside_margin),
    );
    std::fs::write(out.join("equilibrium_summary.txt"), summary).map_err(|e| e.to_string())?;

    let pass = report.max_equality_residual <= 1e-8 && report.min_outside_margin > 0.0;
    println!(
        "equilibrium: endpoints [{:.8}, {:.8}], psi0 = {:.8}, residual = {:.3e} -> {}",
        a,
        b,
        eq.psi0,
        report.max_equality_residual,
        if pass { "pass" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { EXIT_THRESHOLD })
}

fn cmd_universality(
    cfg: &RunConfig,
    potential: &Potential,
    out: &Path,
    hash: &str,
) -> Result<i32, String> {
    if cfg.grid.min <= 0.0 {
        return Err("universality grid must be positive".to_string());
    }
    let eq = solve_equilibrium_one_band(potential).map_err(|e| e.to_string())?;
    let grid = cfg.grid.points();
    let alpha = cfg.ensemble.alpha;
    let sweep = universality_sweep(potential, &eq, alpha, &cfg.ensemble.n_list, &grid)
        .map_err(|e| e.to_string())?;

    let rows: Vec<String> = sweep
        .errors
        .iter()
        .zip(&sweep.errors_unweighted)
        .map(|((n, ew), (_, eu))| format!("{n},{},{}", fmt(*ew), fmt(*eu)))
        .collect();
    write_csv(
        &out.join("error_table.csv"),
        hash,
        "n,weighted_err,unweighted_err",
        &rows,
    )?;

    for table in &sweep.tables {
        let mut rows = Vec::new();
        for (i, &u) in table.grid.iter().enumerate() {
            for (j, &v) in table.grid.iter().enumerate() {
                let khat = table.values[i][j];
                let limit = kernels::eval_origin_bessel(alpha, u, v).map_err(|e| e.to_string())?;
                let abs_err = (khat - limit).abs();
                let weighted = abs_err / (u.powf(alpha) * v.powf(alpha));
                rows.push(format!(
                    "{},{},{},{},{},{}",
                    fmt(u),
                    fmt(v),
                    fmt(khat),
                    fmt(limit),
                    fmt(abs_err),
                    fmt(weighted)
                ));
            }
        }
        write_csv(
            &out.join(format!("kernel_table_n{}.csv", table.n)),
            hash,
            "u,v,khat,limit,abs_err,weighted_err",
            &rows,
        )?;
    }

    let decreasing = sweep.errors.windows(2).all(|w| w[1].1 < w[0].1);
    let slope_ok = (-1.3..=-0.7).contains(&sweep.slope);
    let pass = decreasing && slope_ok;
    let summary = format!(
        "{{\n  \"config\": \"{hash}\",\n  \"alpha\": {alpha},\n  \"slope\": {},\n  \"slope_unweighted\": {},\n  \"errors\": [{}],\n  \"strictly_decreasing\": {decreasing},\n  \"pass\": {pass}\n}}\n",
        sweep.slope,
        sweep.slope_unweighted,
        sweep
            .errors
            .iter()
            .map(|(n, e)| format!("[{n}, {e}]"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    std::fs::write(out.join("universality_summary.json"), summary).map_err(|e| e.to_string())?;
    println!(
        "universality: alpha = {alpha}, slope = {:.3} (window [-1.3, -0.7]), decreasing = {decreasing} -> {}",
        sweep.slope,
        if pass { "pass" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { EXIT_THRESHOLD })
}

fn szego_support(cfg: &RunConfig, potential: &Potential) -> Result<SupportBands, String> {
    match &cfg.szego.bands {
        Some(bands) => SupportBands::new(bands.iter().map(|b| (b[0], b[1])).collect())
            .map_err(|e| e.to_string()),
        None => {
            let eq = solve_equilibrium_one_band(potential).map_err(|e| e.to_string())?;
            Ok(eq.support)
        }
    }
}

fn cmd_szego(cfg: &RunConfig, potential: &Potential, out: &Path, hash: &str) -> Result<i32, String> {
    let support = szego_support(cfg, potential)?;
    let alpha = cfg.ensemble.alpha;
    let sd = solve_xi(&support, alpha).map_err(|e| e.to_string())?;
    let report = check_szego(&sd, 8).map_err(|e| e.to_string())?;

    let rows = vec![
        format!("xi_residual,{}", fmt(sd.xi_residual)),
        format!("cond_a,{}", fmt(sd.cond_a)),
        format!("max_band_jump_residual,{}", fmt(report.max_band_jump_residual)),
        format!("max_gap_jump_residual,{}", fmt(report.max_gap_jump_residual)),
        format!("max_pv_consistency,{}", fmt(report.max_pv_consistency)),
        format!("boundedness_ratio,{}", fmt(report.boundedness_ratio)),
        format!(
            "boundedness_ratio_inverse,{}",
            fmt(report.boundedness_ratio_inverse)
        ),
        format!("d_infinity,{}", fmt(sd.d_infinity.re)),
    ];
    write_csv(&out.join("szego_residuals.csv"), hash, "metric,value", &rows)?;
    std::fs::write(
        out.join("szego_summary.txt"),
        format!("# config {hash}\n{}", sd.summary_record()),
    )
    .map_err(|e| e.to_string())?;

    let pass = report.max_band_jump_residual <= 1e-8
        && report.max_gap_jump_residual <= 1e-8
        && sd.xi_residual <= 1e-10
        && report.boundedness_ratio <= 2.0;
    println!(
        "szego: band jump {:.2e}, gap jump {:.2e}, xi residual {:.2e}, boundedness x{:.3} -> {}",
        report.max_band_jump_residual,
        report.max_gap_jump_residual,
        sd.xi_residual,
        report.boundedness_ratio,
        if pass { "pass" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { EXIT_THRESHOLD })
}

fn cmd_parametrix(
    cfg: &RunConfig,
    potential: &Potential,
    out: &Path,
    hash: &str,
) -> Result<i32, String> {
    let eq = solve_equilibrium_one_band(potential).map_err(|e| e.to_string())?;
    let alpha = cfg.ensemble.alpha;
    let sd = solve_xi(&eq.support, alpha).map_err(|e| e.to_string())?;
    let delta = cfg.delta.unwrap_or_else(|| eq.default_delta());
    let report = check_matching(&eq, &sd, alpha, &cfg.ensemble.n_list, delta, 96)
        .map_err(|e| e.to_string())?;

    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|(n, r)| format!("{n},{}", fmt(*r)))
        .collect();
    write_csv(&out.join("matching_decay.csv"), hash, "n,max_residual", &rows)?;

    let mut point_rows = Vec::new();
    for ((n, _), residuals) in report.rows.iter().zip(&report.residuals) {
        for (theta, r) in report.thetas.iter().zip(residuals) {
            point_rows.push(format!("{n},{},{}", fmt(*theta), fmt(*r)));
        }
    }
    write_csv(
        &out.join("matching_residuals.csv"),
        hash,
        "n,theta,residual",
        &point_rows,
    )?;

    let ratio = if report.rows.len() >= 2 {
        let (_, last) = report.rows[report.rows.len() - 1];
        let (_, prev) = report.rows[report.rows.len() - 2];
        prev / last
    } else {
        f64::NAN
    };
    let pass = (1.5..=2.6).contains(&ratio);
    println!(
        "parametrix: slope = {:.3}, last halving ratio = {:.3} (window [1.5, 2.6]) -> {}",
        report.slope,
        ratio,
        if pass { "pass" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { EXIT_THRESHOLD })
}

fn cmd_mcmc(cfg: &RunConfig, potential: &Potential, out: &Path, hash: &str) -> Result<i32, String> {
    let eq = solve_equilibrium_one_band(potential).map_err(|e| e.to_string())?;
    let section = &cfg.mcmc;
    let chain_cfg = McmcConfig {
        n_particles: section.particles,
        sweeps: section.sweeps,
        burn_in: section.burn_in,
        proposal_scale: section
            .proposal_scale
            .unwrap_or_else(|| default_proposal_scale(&eq, section.particles)),
        seed: cfg.seed,
    };
    let ensemble = EnsembleParams::new(cfg.ensemble.alpha, section.particles);
    let summary = run_chain(potential, &ensemble, &eq, &chain_cfg).map_err(|e| e.to_string())?;

    let rows: Vec<String> = summary
        .bins
        .iter()
        .map(|b| format!("{},{},{}", fmt(b.left), fmt(b.right), fmt(b.density)))
        .collect();
    write_csv(
        &out.join("histogram.csv"),
        hash,
        "bin_left,bin_right,density",
        &rows,
    )?;
    std::fs::write(
        out.join("mcmc_summary.txt"),
        format!(
            "# config {hash}\nseed = {}\nks_distance = {}\nacceptance_rate = {}\nsamples = {}\nmis_tuned = {}\n",
            summary.seed,
            fmt(summary.ks_distance),
            fmt(summary.acceptance_rate),
            summary.samples,
            summary.mis_tuned
        ),
    )
    .map_err(|e| e.to_string())?;

    let pass = summary.ks_distance <= 0.05 && !summary.mis_tuned;
    println!(
        "mcmc: KS = {:.4}, acceptance = {:.3} -> {}",
        summary.ks_distance,
        summary.acceptance_rate,
        if pass { "pass" } else { "FAIL" }
    );
    Ok(if pass { 0 } else { EXIT_THRESHOLD })
}

fn cmd_kernel_table(cfg: &RunConfig, out: &Path, hash: &str) -> Result<i32, String> {
    let alpha = cfg.ensemble.alpha;
    let grid = cfg.grid.points();
    let mut rows = Vec::new();
    for &u in &grid {
        for &v in &grid {
            let origin = kernels::eval_origin_bessel(alpha, u, v).map_err(|e| e.to_string())?;
            let hard = kernels::eval_hard_edge(alpha.max(0.0), u, v).map_err(|e| e.to_string())?;
            let sine = kernels::eval_sine(u, v);
            rows.push(format!(
                "{},{},{},{},{}",
                fmt(u),
                fmt(v),
                fmt(origin),
                fmt(hard),
                fmt(sine)
            ));
        }
    }
    write_csv(
        &out.join("kernel_table.csv"),
        hash,
        "u,v,origin_bessel,hard_edge,sine",
        &rows,
    )?;
    println!("kernel-table: {} rows", rows.len());
    Ok(0)
}
