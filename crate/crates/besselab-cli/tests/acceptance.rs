//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! (run with `cargo test -p besselab-cli --test acceptance -- --nocapture`).
//!
//! Thresholds are pinned from the project contract. Three sub-cases are
//! expected to fail for documented reasons (see `notes/decisions.md` outside
//! the repo): the degenerate symmetric cases alpha in {0, -0.25} decay
//! FASTER than the stated log-log windows, so the corresponding window
//! assertions are kept faithful and stay red rather than being loosened.

use besselab::equilibrium::{check_variational, solve_equilibrium_one_band};
use besselab::kernels;
use besselab::orthopoly::build_table;
use besselab::parametrix::{check_cyclic, check_jumps, check_matching, psi_model};
use besselab::potential::{EnsembleParams, Potential};
use besselab::sampler::{default_proposal_scale, run_chain, McmcConfig};
use besselab::specialfn::{
    bessel_j_asymptotic, bessel_j_real, bessel_j_series, bessel_jy_steed, hankel_h1, hankel_h2,
};
use besselab::szego::{check_szego, solve_xi};
use besselab::universality::{default_grid, default_n_list, universality_sweep};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn report(criterion: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

const SLOPE_WINDOW: (f64, f64) = (-1.3, -0.7);
const RATIO_WINDOW: (f64, f64) = (1.5, 2.6);

#[test]
fn criterion_1_sine_reduction() {
    let start = Instant::now();
    let p = Potential::quadratic();
    let eq = solve_equilibrium_one_band(&p).unwrap();
    let grid = default_grid();
    let sweep = universality_sweep(&p, &eq, 0.0, &default_n_list(), &grid).unwrap();

    let decreasing = sweep.errors.windows(2).all(|w| w[1].1 < w[0].1);
    let slope_ok = (SLOPE_WINDOW.0..=SLOPE_WINDOW.1).contains(&sweep.slope);

    let mut sinc_dev = 0.0_f64;
    for &u in &grid {
        for &v in &grid {
            let bessel = kernels::eval_origin_bessel(0.0, u, v).unwrap();
            let sinc = kernels::eval_sine(u, v);
            sinc_dev = sinc_dev.max((bessel - sinc).abs());
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    let pass = decreasing && slope_ok && sinc_dev <= 1e-12 && elapsed < 30.0;
    report(
        "1 (sine reduction)",
        pass,
        &format!(
            "E decreasing = {decreasing}, slope = {:.3} (window [{}, {}]), sinc dev = {:.2e}, {:.1} s",
            sweep.slope, SLOPE_WINDOW.0, SLOPE_WINDOW.1, sinc_dev, elapsed
        ),
    );
    assert!(decreasing, "E(n) must decrease strictly");
    assert!(sinc_dev <= 1e-12, "J_0^o must reduce to the sine kernel");
    assert!(elapsed < 30.0, "runtime budget exceeded: {elapsed:.1} s");
    // Known red: the even-symmetric alpha = 0 point decays faster than 1/n
    // at desk scale (grid-edge pairs dominate E(8)); measured ~ -1.5.
    assert!(
        slope_ok,
        "fitted slope {:.3} outside [{}, {}] (see decisions ledger: window \
         miscalibrated for the degenerate alpha = 0 case; per-pair errors \
         decay at clean 1/n)",
        sweep.slope, SLOPE_WINDOW.0, SLOPE_WINDOW.1
    );
}

#[test]
fn criterion_2_general_alpha_sweeps() {
    let p = Potential::quadratic();
    let eq = solve_equilibrium_one_band(&p).unwrap();
    let grid = default_grid();
    let mut all_ok = true;
    let mut details = Vec::new();
    for &alpha in &[1.0, -0.25] {
        let start = Instant::now();
        let sweep = universality_sweep(&p, &eq, alpha, &default_n_list(), &grid).unwrap();
        let elapsed = start.elapsed().as_secs_f64();
        let ok = (SLOPE_WINDOW.0..=SLOPE_WINDOW.1).contains(&sweep.slope) && elapsed < 60.0;
        details.push(format!("alpha {alpha}: slope {:.3} in {:.1} s", sweep.slope, elapsed));
        all_ok &= ok;
        assert!(elapsed < 60.0, "runtime budget exceeded for alpha = {alpha}");
    }
    report("2 (general alpha)", all_ok, &details.join("; "));
    // Known red for alpha = -0.25 (measured ~ -1.49, same mechanism as
    // criterion 1); alpha = 1 sits at -0.99.
    assert!(
        all_ok,
        "weighted slope outside window: {} (see decisions ledger)",
        details.join("; ")
    );
}

#[test]
fn criterion_3_kernel_identity() {
    let p = Potential::quadratic();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    for &(alpha, n) in &[(0.0, 32usize), (1.0, 17), (-0.25, 32), (0.5, 9)] {
        let e = EnsembleParams::new(alpha, n);
        let t = build_table(&p, &e, n + 1).unwrap();
        for _ in 0..25 {
            let mut draw = || loop {
                let x: f64 = rng.gen_range(-1.25..1.25);
                if x.abs() > 1e-3 {
                    return x;
                }
            };
            let (x, y) = (draw(), draw());
            let quot = t.cd_kernel(&p, x, y).unwrap();
            let sum = t.cd_kernel_sum(&p, x, y).unwrap();
            let via_y = t.kernel_via_y(&p, x, y).unwrap();
            let scale = quot.abs().max(1e-12);
            worst = worst.max((quot - sum).abs() / scale);
            worst = worst.max((quot - via_y).abs() / scale);
            checked += 1;
        }
    }
    let pass = worst <= 1e-9 && checked == 100;
    report(
        "3 (kernel identity)",
        pass,
        &format!("{checked} random pairs, worst relative spread {worst:.2e}"),
    );
    assert!(pass, "kernel forms disagree: {worst:.2e}");
}

#[test]
fn criterion_4_equilibrium_correctness() {
    let p = Potential::quadratic();
    let eq = solve_equilibrium_one_band(&p).unwrap();
    let (a, b) = eq.support.bands[0];
    let sqrt2 = std::f64::consts::SQRT_2;
    let endpoints_ok = (a + sqrt2).abs() <= 1e-8 && (b - sqrt2).abs() <= 1e-8;
    let psi0_ok = (eq.psi0 - sqrt2 / std::f64::consts::PI).abs() <= 1e-8;

    let inside: Vec<f64> = (0..50).map(|i| -1.3 + 2.6 * i as f64 / 49.0).collect();
    let outside = vec![-2.5, -2.0, 2.0, 2.5];
    let rep = check_variational(&eq, &p, &inside, &outside);
    let residual_ok = rep.max_equality_residual <= 1e-8;
    let strict_ok = rep.min_outside_margin > 0.0;

    let pass = endpoints_ok && psi0_ok && residual_ok && strict_ok;
    report(
        "4 (equilibrium)",
        pass,
        &format!(
            "endpoints ({a:.10}, {b:.10}), psi0 = {:.10}, residual {:.2e}, outside margin {:.3e}",
            eq.psi0, rep.max_equality_residual, rep.min_outside_margin
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_szego_verification() {
    let start = Instant::now();
    let support =
        besselab::equilibrium::SupportBands::new(vec![(-1.5, -0.7), (-0.3, 1.0)]).unwrap();
    let mut pass = true;
    let mut details = Vec::new();
    for &alpha in &[0.5, 1.0] {
        let sd = solve_xi(&support, alpha).unwrap();
        let rep = check_szego(&sd, 6).unwrap();
        let ok = rep.max_band_jump_residual <= 1e-8
            && rep.max_gap_jump_residual <= 1e-8
            && sd.xi_residual <= 1e-10
            && rep.boundedness_ratio <= 2.0;
        details.push(format!(
            "alpha {alpha}: band {:.1e}, gap {:.1e}, xi resid {:.1e}, bounded x{:.3}",
            rep.max_band_jump_residual,
            rep.max_gap_jump_residual,
            sd.xi_residual,
            rep.boundedness_ratio
        ));
        pass &= ok;
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 10.0;
    report(
        "5 (Szego RH verification)",
        pass,
        &format!("{}; {:.1} s", details.join("; "), elapsed),
    );
    assert!(pass, "{}", details.join("; "));
}

#[test]
fn criterion_6_model_parametrix() {
    let mut pass = true;
    let mut worst_jump: f64 = 0.0;
    let mut worst_cyclic: f64 = 0.0;
    let mut worst_det: f64 = 0.0;
    for &alpha in &[0.0, 0.5, 1.0, -0.25] {
        for &r in &[0.5, 5.0] {
            worst_jump = worst_jump.max(check_jumps(alpha, r).unwrap());
            worst_cyclic = worst_cyclic.max(check_cyclic(alpha, r).unwrap());
        }
        for &r in &[0.5, 2.0, 10.0] {
            let zeta = Complex64::from_polar(r, 0.4);
            let det = psi_model(alpha, zeta).unwrap().det();
            worst_det = worst_det.max((det - 1.0).norm());
        }
    }
    pass &= worst_jump <= 1e-10 && worst_cyclic <= 1e-10 && worst_det <= 1e-10;
    report(
        "6 (model parametrix)",
        pass,
        &format!(
            "jump residual {worst_jump:.2e}, cyclic {worst_cyclic:.2e}, det dev {worst_det:.2e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_matching_decay() {
    let start = Instant::now();
    let p = Potential::quadratic();
    let eq = solve_equilibrium_one_band(&p).unwrap();
    let delta = eq.default_delta();
    let mut pass = true;
    let mut details = Vec::new();
    for &alpha in &[0.0, 1.0] {
        let sd = solve_xi(&eq.support, alpha).unwrap();
        let rep = check_matching(&eq, &sd, alpha, &[8, 16, 32, 64], delta, 96).unwrap();
        let r32 = rep.rows[2].1;
        let r64 = rep.rows[3].1;
        let ratio = r32 / r64;
        let ok = (RATIO_WINDOW.0..=RATIO_WINDOW.1).contains(&ratio);
        details.push(format!(
            "alpha {alpha}: resid(32) = {r32:.2e}, resid(64) = {r64:.2e}, ratio {ratio:.2}"
        ));
        pass &= ok;
    }
    let elapsed = start.elapsed().as_secs_f64();
    pass &= elapsed < 60.0;
    report(
        "7 (matching decay)",
        pass,
        &format!("{}; {:.1} s", details.join("; "), elapsed),
    );
    assert!(elapsed < 60.0);
    // Known red for alpha = 0: the half-integer Hankel expansions terminate,
    // the local parametrix is exact up to the exponentially small lens
    // jumps, and the residual decays like e^{-c n} instead of 1/n. The
    // alpha = 1 ratio sits at 2.00.
    assert!(
        pass,
        "{} (see decisions ledger for the alpha = 0 case)",
        details.join("; ")
    );
}

#[test]
fn criterion_8_mcmc_density() {
    let start = Instant::now();
    let p = Potential::quadratic();
    let eq = solve_equilibrium_one_band(&p).unwrap();
    let scale = default_proposal_scale(&eq, 50);

    let mut ks_values: Vec<f64> = (1..=5u64)
        .map(|seed| {
            let cfg = McmcConfig {
                n_particles: 50,
                sweeps: 4000,
                burn_in: 800,
                proposal_scale: scale,
                seed,
            };
            let e = EnsembleParams::new(0.0, 50);
            run_chain(&p, &e, &eq, &cfg).unwrap().ks_distance
        })
        .collect();
    ks_values.sort_by(f64::total_cmp);
    let median_ks = ks_values[2];

    // repulsion from the origin at alpha = 2: compare the density of the bin
    // containing zero between the alpha = 0 and alpha = 2 chains
    let zero_bin_density = |alpha: f64| -> f64 {
        let cfg = McmcConfig {
            n_particles: 50,
            sweeps: 4000,
            burn_in: 800,
            proposal_scale: scale,
            seed: 11,
        };
        let e = EnsembleParams::new(alpha, 50);
        let summary = run_chain(&p, &e, &eq, &cfg).unwrap();
        summary
            .bins
            .iter()
            .find(|b| b.left <= 0.0 && 0.0 < b.right)
            .map(|b| b.density)
            .unwrap_or(0.0)
    };
    let d0 = zero_bin_density(0.0);
    let d2 = zero_bin_density(2.0);
    let depletion_ok = d2 <= 0.8 * d0;

    let elapsed = start.elapsed().as_secs_f64();
    let pass = median_ks <= 0.05 && depletion_ok && elapsed < 120.0;
    report(
        "8 (MCMC density)",
        pass,
        &format!(
            "median KS = {median_ks:.4}, zero-bin density {d0:.3} -> {d2:.3} (depletion {:.0}%), {:.1} s",
            100.0 * (1.0 - d2 / d0),
            elapsed
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_9_special_functions() {
    // half-integer closed forms across the domain
    let mut worst_closed: f64 = 0.0;
    for &x in &[0.5, 2.0, 8.0, 20.0, 90.0, 200.0] {
        let scale = (2.0 / (std::f64::consts::PI * x)).sqrt();
        let j_half = scale * x.sin();
        let j_mhalf = scale * x.cos();
        let j_3half = scale * (x.sin() / x - x.cos());
        worst_closed = worst_closed
            .max((bessel_j_real(0.5, x).unwrap() - j_half).abs() / scale)
            .max((bessel_j_real(-0.5, x).unwrap() - j_mhalf).abs() / scale)
            .max((bessel_j_real(1.5, x).unwrap() - j_3half).abs() / scale);
    }

    // Hankel Wronskian H1 H2' - H2 H1' = -4i/(pi z), derivative by a
    // five-point finite-difference stencil
    let mut worst_wronskian: f64 = 0.0;
    let stencil = |f: &dyn Fn(f64) -> Complex64, x: f64| {
        let h = 1e-3;
        (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
    };
    for &nu in &[0.0, 0.25, 0.5, 1.0, 1.5] {
        for &x in &[1.0, 3.0, 9.0, 22.0, 60.0] {
            let z = Complex64::new(x, 0.0);
            let h1 = |t: f64| hankel_h1(nu, Complex64::new(t, 0.0)).unwrap();
            let h2 = |t: f64| hankel_h2(nu, Complex64::new(t, 0.0)).unwrap();
            let w = hankel_h1(nu, z).unwrap() * stencil(&h2, x)
                - hankel_h2(nu, z).unwrap() * stencil(&h1, x);
            let expect = Complex64::new(0.0, -4.0 / (std::f64::consts::PI * x));
            worst_wronskian = worst_wronskian.max((w - expect).norm());
        }
    }

    // series / large-argument overlap on |z| in [10, 14]
    let mut worst_overlap: f64 = 0.0;
    for &nu in &[-0.75, -0.5, 0.0, 0.25, 0.5, 1.0, 1.5, 2.5] {
        let mut x = 10.0;
        while x <= 14.0 {
            let series = bessel_j_series(nu, Complex64::new(x, 0.0)).re;
            let (steed, _, _, _) = bessel_jy_steed(nu.max(0.0), x).unwrap();
            let steed = if nu >= 0.0 {
                steed
            } else {
                // one downward step for negative orders
                let (j1, _, _, _) = bessel_jy_steed(nu + 1.0, x).unwrap();
                let (j2, _, _, _) = bessel_jy_steed(nu + 2.0, x).unwrap();
                2.0 * (nu + 1.0) / x * j1 - j2
            };
            let scale = (2.0 / (std::f64::consts::PI * x)).sqrt();
            worst_overlap = worst_overlap.max((series - steed).abs() / scale);
            x += 0.5;
        }
        // complex ring at the switch radius against the Hankel expansions
        for k in 0..6 {
            let th = std::f64::consts::PI * (0.1 + 0.15 * k as f64);
            let z = Complex64::from_polar(14.0, th);
            let a = bessel_j_series(nu, z);
            let b = bessel_j_asymptotic(nu, z);
            worst_overlap = worst_overlap.max((a - b).norm() / a.norm().max(1.0));
        }
    }

    let pass = worst_closed <= 1e-10 && worst_wronskian <= 1e-10 && worst_overlap <= 1e-10;
    report(
        "9 (special functions)",
        pass,
        &format!(
            "closed forms {worst_closed:.2e}, Wronskian {worst_wronskian:.2e}, overlap {worst_overlap:.2e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_10_cli_determinism() {
    let dir = std::env::temp_dir().join(format!("besselab-acceptance-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    let config_path = dir.join("run.toml");
    std::fs::write(
        &config_path,
        r#"
seed = 9001
out_dir = "unused"

[potential]
coefficients = [0.0, 0.0, 1.0]

[ensemble]
alpha = 0.5
n_list = [8, 16]

[mcmc]
particles = 20
sweeps = 600
burn_in = 100
"#,
    )
    .unwrap();

    let run = |out: &std::path::Path, command: &str| {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_besselab"))
            .arg("--config")
            .arg(&config_path)
            .arg("--out")
            .arg(out)
            .arg(command)
            .status()
            .unwrap();
        assert!(status.code().is_some(), "command crashed");
    };

    let mut all_identical = true;
    let mut compared = 0usize;
    for command in ["equilibrium", "mcmc", "universality", "kernel-table"] {
        let out_a = dir.join(format!("{command}-a"));
        let out_b = dir.join(format!("{command}-b"));
        run(&out_a, command);
        run(&out_b, command);
        for entry in std::fs::read_dir(&out_a).unwrap() {
            let name = entry.unwrap().file_name();
            let name = name.to_string_lossy().to_string();
            if !name.ends_with(".csv") && !name.ends_with(".json") && !name.ends_with(".txt") {
                continue;
            }
            if name == "run_meta.txt" {
                continue; // wall-clock metadata lives here by design
            }
            let a = std::fs::read(out_a.join(&name)).unwrap();
            let b = std::fs::read(out_b.join(&name)).unwrap();
            if a != b {
                all_identical = false;
                eprintln!("mismatch in {command}/{name}");
            }
            compared += 1;
        }
    }
    report(
        "10 (CLI determinism)",
        all_identical && compared > 0,
        &format!("{compared} output files byte-compared across reruns"),
    );
    assert!(all_identical && compared > 0);
    let _ = std::fs::remove_dir_all(&dir);
}
