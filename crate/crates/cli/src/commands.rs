//! The six subcommands. Each builds plain-data row types, writes the
//! requested formats and prints a short human summary to stdout.

use num_complex::Complex64;
use serde::Serialize;

use qdot_core::model;
use qdot_core::oracle::{self, GridSpec};
use qdot_core::solver::{self, StateSelector};

use crate::config::{OutputFormat, RunConfig, StateChoice};
use crate::output::{fmt_f64, to_json, Metadata, Table};
use crate::CliError;

fn write_outputs(cfg: &RunConfig, table: &Table, meta: &Metadata, json: String) -> Result<(), CliError> {
    if matches!(cfg.format, OutputFormat::Tsv | OutputFormat::Both) {
        let path = format!("{}.tsv", cfg.output);
        std::fs::write(&path, table.to_tsv(meta))
            .map_err(|e| CliError::Config(format!("cannot write {path}: {e}")))?;
    }
    if matches!(cfg.format, OutputFormat::Json | OutputFormat::Both) {
        let path = format!("{}.json", cfg.output);
        std::fs::write(&path, json)
            .map_err(|e| CliError::Config(format!("cannot write {path}: {e}")))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SpectrumRow {
    index: usize,
    re_epsilon: f64,
    im_epsilon: f64,
    gamma: f64,
    label: String,
    norm_ratio: f64,
}

#[derive(Serialize)]
struct SolveReport {
    beta: f64,
    l_perp: f64,
    threshold_e1: f64,
    re_epsilon: f64,
    im_epsilon: f64,
    gamma: f64,
    label: String,
    re_omega: f64,
    im_omega: f64,
    re_linear_c: f64,
    im_linear_c: f64,
    linear_r: f64,
    von_neumann: f64,
    renyi: Vec<(u32, f64)>,
    schmidt_number: usize,
    quasi1d_ratio: f64,
    warnings: Vec<String>,
    spectrum: Vec<SpectrumRow>,
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.params_at(cfg.beta, cfg.l_perp[0]).map_err(CliError::Config)?;
    let point = model::solve_point(&params, cfg.m_size, cfg.omega_policy())
        .map_err(|e| CliError::Numerical(e.to_string()))?;

    let report = SolveReport {
        beta: params.beta,
        l_perp: params.l_perp,
        threshold_e1: point.threshold_e1,
        re_epsilon: point.ground.epsilon.re,
        im_epsilon: point.ground.epsilon.im,
        gamma: point.ground.gamma(),
        label: point.ground.label.as_str().to_string(),
        re_omega: point.omega_two.re,
        im_omega: point.omega_two.im,
        re_linear_c: point.entropy.linear_c.re,
        im_linear_c: point.entropy.linear_c.im,
        linear_r: point.entropy.linear_r,
        von_neumann: point.entropy.von_neumann,
        renyi: point.entropy.renyi.clone(),
        schmidt_number: point.entropy.schmidt_number,
        quasi1d_ratio: params.quasi1d_ratio(),
        warnings: point.warnings.clone(),
        spectrum: point
            .spectrum
            .iter()
            .enumerate()
            .map(|(i, p)| SpectrumRow {
                index: i,
                re_epsilon: p.epsilon.re,
                im_epsilon: p.epsilon.im,
                gamma: p.gamma(),
                label: p.label.as_str().to_string(),
                norm_ratio: p.norm_ratio,
            })
            .collect(),
    };

    let meta = Metadata::new("solve", cfg);
    let mut table = Table::new(vec![
        "index",
        "re_epsilon",
        "im_epsilon",
        "gamma",
        "label",
        "norm_ratio",
    ]);
    for row in &report.spectrum {
        table.push(vec![
            row.index.to_string(),
            fmt_f64(row.re_epsilon),
            fmt_f64(row.im_epsilon),
            fmt_f64(row.gamma),
            row.label.clone(),
            fmt_f64(row.norm_ratio),
        ]);
    }
    write_outputs(cfg, &table, &meta, to_json(&meta, &report))?;

    println!(
        "state: {}  epsilon = ({}, {})  Gamma = {}",
        report.label,
        fmt_f64(report.re_epsilon),
        fmt_f64(report.im_epsilon),
        fmt_f64(report.gamma)
    );
    println!("one-particle threshold E1 = {}", fmt_f64(report.threshold_e1));
    println!(
        "entropies: L = ({}, {})  L_assoc = {}  S = {}  S2 = {}",
        fmt_f64(report.re_linear_c),
        fmt_f64(report.im_linear_c),
        fmt_f64(report.linear_r),
        fmt_f64(report.von_neumann),
        fmt_f64(report.renyi[0].1)
    );
    for w in &report.warnings {
        println!("warning: {w}");
    }
    Ok(())
}

#[derive(Serialize)]
struct ScanJsonRow {
    beta: f64,
    l_perp: f64,
    re_epsilon: f64,
    im_epsilon: f64,
    gamma: f64,
    re_linear_c: f64,
    im_linear_c: f64,
    linear_r: f64,
    label: String,
    m_size: usize,
    re_omega: f64,
    im_omega: f64,
    error: Option<String>,
}

pub fn cmd_scan(cfg: &RunConfig) -> Result<(), CliError> {
    let betas = cfg.beta_grid();
    let workers: usize = std::env::var("QDOT_WORKERS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);

    // one series per l_perp; series are independent, rows within a series
    // share the Ω chain, so parallelism lives at the series level only
    let mut series: Vec<Vec<qdot_core::ScanRow>> = Vec::new();
    if workers == 1 || cfg.l_perp.len() == 1 {
        for &l in &cfg.l_perp {
            let params = cfg.params_at(cfg.beta, l).map_err(CliError::Config)?;
            series.push(model::scan_beta(&params, &betas, cfg.m_size, cfg.omega_policy()));
        }
    } else {
        let results: Vec<Result<Vec<qdot_core::ScanRow>, String>> =
            std::thread::scope(|scope| {
                let handles: Vec<_> = cfg
                    .l_perp
                    .iter()
                    .map(|&l| {
                        let betas = &betas;
                        scope.spawn(move || {
                            let params = cfg.params_at(cfg.beta, l)?;
                            Ok(model::scan_beta(&params, betas, cfg.m_size, cfg.omega_policy()))
                        })
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("scan thread")).collect()
            });
        for r in results {
            series.push(r.map_err(CliError::Config)?);
        }
    }

    let mut failures = 0usize;
    let meta = Metadata::new("scan", cfg);
    let mut table = Table::new(vec![
        "beta",
        "l_perp",
        "re_epsilon",
        "gamma",
        "re_linear_c",
        "im_linear_c",
        "linear_r",
        "label",
        "m_size",
        "re_omega",
        "im_omega",
    ]);
    let mut json_rows: Vec<ScanJsonRow> = Vec::new();
    for rows in &series {
        for r in rows {
            if let Some(err) = &r.error {
                failures += 1;
                table.comments.push(format!("failed beta = {}: {err}", fmt_f64(r.beta)));
            }
            table.push(vec![
                fmt_f64(r.beta),
                fmt_f64(r.l_perp),
                fmt_f64(r.epsilon0.re),
                fmt_f64(r.gamma),
                fmt_f64(r.linear_c.re),
                fmt_f64(r.linear_c.im),
                fmt_f64(r.linear_r),
                r.label.as_str().to_string(),
                r.m_used.to_string(),
                fmt_f64(r.omega_used.re),
                fmt_f64(r.omega_used.im),
            ]);
            json_rows.push(ScanJsonRow {
                beta: r.beta,
                l_perp: r.l_perp,
                re_epsilon: r.epsilon0.re,
                im_epsilon: r.epsilon0.im,
                gamma: r.gamma,
                re_linear_c: r.linear_c.re,
                im_linear_c: r.linear_c.im,
                linear_r: r.linear_r,
                label: r.label.as_str().to_string(),
                m_size: r.m_used,
                re_omega: r.omega_used.re,
                im_omega: r.omega_used.im,
                error: r.error.clone(),
            });
        }
    }
    write_outputs(cfg, &table, &meta, to_json(&meta, &json_rows))?;
    println!(
        "scan: {} series x {} points -> {}.tsv / {}.json ({failures} failed rows)",
        cfg.l_perp.len(),
        betas.len(),
        cfg.output,
        cfg.output
    );
    if failures > 0 {
        return Err(CliError::Numerical(format!("{failures} scan rows failed")));
    }
    Ok(())
}

#[derive(Serialize)]
struct ThresholdReport {
    l_perp: f64,
    beta_lo: f64,
    beta_hi: f64,
    beta_th: f64,
}

pub fn cmd_threshold(cfg: &RunConfig) -> Result<(), CliError> {
    let meta = Metadata::new("threshold", cfg);
    let mut table = Table::new(vec!["l_perp", "beta_th"]);
    let mut reports = Vec::new();
    for &l in &cfg.l_perp {
        let params = cfg.params_at(cfg.beta, l).map_err(CliError::Config)?;
        let beta_th =
            model::find_threshold_with(&params, cfg.beta_lo, cfg.beta_hi, cfg.m_size, cfg.omega_policy())
                .map_err(|e| CliError::Numerical(e.to_string()))?;
        table.push(vec![fmt_f64(l), fmt_f64(beta_th)]);
        reports.push(ThresholdReport { l_perp: l, beta_lo: cfg.beta_lo, beta_hi: cfg.beta_hi, beta_th });
        println!("l_perp = {l}: beta_th = {}", fmt_f64(beta_th));
    }
    write_outputs(cfg, &table, &meta, to_json(&meta, &reports))
}

#[derive(Serialize)]
struct TrajectoryRow {
    branch: usize,
    re_omega: f64,
    im_omega: f64,
    re_epsilon: f64,
    im_epsilon: f64,
}

#[derive(Serialize)]
struct TrajectoryReport {
    rows: Vec<TrajectoryRow>,
    stagnation: Vec<(usize, f64, f64, f64)>,
}

pub fn cmd_trajectory(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.params_at(cfg.beta, cfg.l_perp[0]).map_err(CliError::Config)?;
    let n = cfg.omega_points;
    let path: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = k as f64 / (n as f64 - 1.0);
            cfg.omega_start + (cfg.omega_end - cfg.omega_start) * t
        })
        .collect();
    let select = match cfg.state {
        StateChoice::Ground => StateSelector::Ground,
        StateChoice::Index(k) => StateSelector::Index(k),
        StateChoice::Energy(e) => StateSelector::NearEnergy(e),
    };
    let particles = qdot_core::hamiltonian::Particles::Two(params.sector);
    let trajectories = solver::alpha_trajectory(&params, cfg.m_size, &path, select, particles)
        .map_err(|e| CliError::Numerical(e.to_string()))?;

    let meta = Metadata::new("trajectory", cfg);
    let mut table =
        Table::new(vec!["branch", "re_omega", "im_omega", "re_epsilon", "im_epsilon"]);
    let mut report = TrajectoryReport { rows: Vec::new(), stagnation: Vec::new() };
    for (b, trajectory) in trajectories.iter().enumerate() {
        for p in &trajectory.points {
            table.push(vec![
                b.to_string(),
                fmt_f64(p.omega.re),
                fmt_f64(p.omega.im),
                fmt_f64(p.epsilon.re),
                fmt_f64(p.epsilon.im),
            ]);
            report.rows.push(TrajectoryRow {
                branch: b,
                re_omega: p.omega.re,
                im_omega: p.omega.im,
                re_epsilon: p.epsilon.re,
                im_epsilon: p.epsilon.im,
            });
        }
        if let Some(s) = trajectory.stagnation {
            report.stagnation.push((b, s.epsilon.re, s.epsilon.im, s.speed));
            println!(
                "branch {b}: stagnation epsilon = ({}, {}) with |deps/dOmega| = {}",
                fmt_f64(s.epsilon.re),
                fmt_f64(s.epsilon.im),
                fmt_f64(s.speed)
            );
        }
    }
    write_outputs(cfg, &table, &meta, to_json(&meta, &report))
}

#[derive(Serialize)]
struct OracleRow {
    quantity: String,
    basis: f64,
    oracle: f64,
    delta: f64,
    tolerance: f64,
    pass: bool,
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.params_at(cfg.beta, cfg.l_perp[0]).map_err(CliError::Config)?;
    let numerical = |e: qdot_core::Error| CliError::Numerical(e.to_string());

    let point =
        model::solve_point(&params, cfg.m_size, cfg.omega_policy()).map_err(numerical)?;

    let mut rows: Vec<OracleRow> = Vec::new();
    // one-particle level against the Richardson-extrapolated grid
    let grid1 = GridSpec::new(cfg.grid_x_max.max(12.0), 1600, 0.0).map_err(numerical)?;
    let e1_grid = oracle::grid_bound_energy_extrapolated(&params, &grid1).map_err(numerical)?;
    rows.push(OracleRow {
        quantity: "one_particle_energy".into(),
        basis: point.threshold_e1,
        oracle: e1_grid,
        delta: (point.threshold_e1 - e1_grid).abs(),
        tolerance: 1e-5,
        pass: (point.threshold_e1 - e1_grid).abs() < 1e-5,
    });

    // two-particle ground energy and entropy (bound side only)
    if point.ground.gamma() == 0.0 {
        let grid2 = GridSpec::new(cfg.grid_x_max, cfg.grid_points, 0.0).map_err(numerical)?;
        let extrap = oracle::grid_two_particle_extrapolated(&params, &grid2).map_err(numerical)?;
        let de = (point.ground.epsilon.re - extrap.energy).abs();
        rows.push(OracleRow {
            quantity: "two_particle_energy".into(),
            basis: point.ground.epsilon.re,
            oracle: extrap.energy,
            delta: de,
            tolerance: 2e-4,
            pass: de < 2e-4,
        });
        let dl = (point.entropy.linear_r - extrap.entropy).abs();
        rows.push(OracleRow {
            quantity: "linear_entropy".into(),
            basis: point.entropy.linear_r,
            oracle: extrap.entropy,
            delta: dl,
            tolerance: 1e-3,
            pass: dl < 1e-3,
        });
    } else {
        println!("resonant point: two-particle grid comparison skipped (bound-regime oracle)");
    }

    let meta = Metadata::new("oracle", cfg);
    let mut table =
        Table::new(vec!["quantity", "basis", "oracle", "delta", "tolerance", "pass"]);
    for r in &rows {
        table.push(vec![
            r.quantity.clone(),
            fmt_f64(r.basis),
            fmt_f64(r.oracle),
            fmt_f64(r.delta),
            fmt_f64(r.tolerance),
            r.pass.to_string(),
        ]);
        println!(
            "{}: basis {} vs oracle {} (delta {}, tol {}) -> {}",
            r.quantity,
            fmt_f64(r.basis),
            fmt_f64(r.oracle),
            fmt_f64(r.delta),
            fmt_f64(r.tolerance),
            if r.pass { "ok" } else { "FAIL" }
        );
    }
    write_outputs(cfg, &table, &meta, to_json(&meta, &rows))?;
    if rows.iter().any(|r| !r.pass) {
        return Err(CliError::Numerical("oracle comparison out of tolerance".into()));
    }
    Ok(())
}

#[derive(Serialize)]
struct ConvergenceJsonRow {
    m_size: usize,
    re_epsilon: f64,
    im_epsilon: f64,
    linear_r: f64,
    re_linear_c: f64,
    im_linear_c: f64,
    cauchy_epsilon: Option<f64>,
    cauchy_linear_r: Option<f64>,
}

pub fn cmd_convergence(cfg: &RunConfig) -> Result<(), CliError> {
    let params = cfg.params_at(cfg.beta, cfg.l_perp[0]).map_err(CliError::Config)?;
    let rows = solver::convergence_study(&params, &cfg.m_list)
        .map_err(|e| CliError::Numerical(e.to_string()))?;

    let meta = Metadata::new("convergence", cfg);
    let mut table = Table::new(vec![
        "m_size",
        "re_epsilon",
        "im_epsilon",
        "linear_r",
        "re_linear_c",
        "im_linear_c",
        "cauchy_epsilon",
        "cauchy_linear_r",
    ]);
    let mut json_rows = Vec::new();
    for r in &rows {
        table.push(vec![
            r.m_size.to_string(),
            fmt_f64(r.epsilon0.re),
            fmt_f64(r.epsilon0.im),
            fmt_f64(r.linear_r),
            fmt_f64(r.linear_c.re),
            fmt_f64(r.linear_c.im),
            r.cauchy_epsilon.map_or("".to_string(), fmt_f64),
            r.cauchy_linear_r.map_or("".to_string(), fmt_f64),
        ]);
        json_rows.push(ConvergenceJsonRow {
            m_size: r.m_size,
            re_epsilon: r.epsilon0.re,
            im_epsilon: r.epsilon0.im,
            linear_r: r.linear_r,
            re_linear_c: r.linear_c.re,
            im_linear_c: r.linear_c.im,
            cauchy_epsilon: r.cauchy_epsilon,
            cauchy_linear_r: r.cauchy_linear_r,
        });
        println!(
            "M {:3}: epsilon = ({}, {})  L_assoc = {}  d_eps = {}",
            r.m_size,
            fmt_f64(r.epsilon0.re),
            fmt_f64(r.epsilon0.im),
            fmt_f64(r.linear_r),
            r.cauchy_epsilon.map_or("-".to_string(), fmt_f64)
        );
    }
    write_outputs(cfg, &table, &meta, to_json(&meta, &json_rows))
}

