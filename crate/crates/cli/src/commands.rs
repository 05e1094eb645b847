use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use graphnls::dynamics::{evolve, TrajectoryRecord};
use graphnls::functionals::{alpha_star, d0, evaluate};
use graphnls::graph::{fmt_f64, read_csv, read_csv_any, write_csv};
use graphnls::rearrangement::{read_pl_csv, rearrange, report, tent, write_pl_csv, PLGraphFunction};
use graphnls::stability::{assemble, morse_report, vk_check};
use graphnls::stationary::{
    build_state, escape_demo, residual, residual_parts, state_action, state_l2sq, vk_slope, StationarySpec,
};
use graphnls::{Error, GraphFunction, GridSpec, StarGraphParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{parse_evolve, parse_scan, parse_stability, Initial, Point, ScanConfig, Task};
use crate::{Cli, CliError, Command};

const STATIONARY_DX: f64 = 0.01;
const STABILITY_DX: f64 = 0.02;
const ESCAPE_DX: f64 = 0.005;

pub fn dispatch(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Stationary { j, omega, alpha, edges, mu } => stationary(cli, *j, *omega, *alpha, *edges, *mu),
        Command::Evolve { config } => evolve_cmd(cli, config),
        Command::Rearrange { input, tent } => rearrange_cmd(cli, input.as_deref(), *tent),
        Command::Stability { config } => stability(cli, config),
        Command::Scan { config } => scan(cli, config),
        Command::EscapeDemo { n, omega, mu, edges } => escape(cli, n, *omega, *mu, *edges),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::File { path: path.to_path_buf(), source })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::File { path: dir.to_path_buf(), source })?;
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).map_err(|source| CliError::File { path, source })
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> Result<(), CliError> {
    let mut w = create(dir, name)?;
    let text = serde_json::to_string_pretty(value).map_err(CliError::Json)?;
    writeln!(w, "{text}").map_err(|source| CliError::File { path: dir.join(name), source })?;
    w.flush().map_err(|source| CliError::File { path: dir.join(name), source })
}

fn emit(dir: &Path, name: &str, value: serde_json::Value) -> Result<(), CliError> {
    write_json(dir, name, &value)?;
    let text = serde_json::to_string_pretty(&value).map_err(CliError::Json)?;
    // a closed pipe on stdout is not an error; the files are already written
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    Ok(())
}

fn table<W: Write>(out: W, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| CliError::Lib(Error::Io(std::io::Error::other(e)));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Lib(Error::Io(e)))
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Grid from the flags layered over `base`; `None` when neither flag nor config sets one.
fn explicit_grid(cli: &Cli, base: Option<GridSpec>) -> Result<Option<GridSpec>, CliError> {
    if base.is_none() && cli.grid_l.is_none() && cli.grid_m.is_none() {
        return Ok(None);
    }
    let d = base.unwrap_or_else(GridSpec::functionals_default);
    Ok(Some(GridSpec::new(cli.grid_l.unwrap_or(d.length), cli.grid_m.unwrap_or(d.intervals))?))
}

fn stationary(cli: &Cli, j: usize, omega: f64, alpha: f64, edges: usize, mu: f64) -> Result<(), CliError> {
    let params = StarGraphParams::new(edges, alpha, mu)?;
    let spec = StationarySpec::new(params, j, omega)?;
    let grid = match explicit_grid(cli, None)? {
        Some(g) => g,
        None => spec.fitted_grid(STATIONARY_DX, GridSpec::functionals_default().length)?,
    };
    let f = build_state(&spec, &grid)?;
    let fr = evaluate(&f, omega)?;
    let res = residual_parts(&f, omega);
    write_csv(&f, create(&cli.out, "stationary.csv")?)?;
    emit(
        &cli.out,
        "stationary.json",
        json!({
            "j": j,
            "omega": omega,
            "a_j": spec.shift,
            "action": fr.action,
            "nehari_residual": fr.nehari.abs(),
            "mass": fr.mass,
            "vk_slope": if j == 0 { Some(vk_slope(omega, &params)?) } else { None },
            "params": params,
            "signs": spec.signs,
            "grid": grid,
            "functionals": fr,
            "residual": res,
            "action_closed_form": state_action(&spec),
            "l2sq_closed_form": state_l2sq(&spec),
        }),
    )
}

/// Smooth seeded perturbation `Σ c_j x e^{−x}`, zero at the vertex.
fn seeded_noise(base: &GraphFunction, size: f64, seed: u64) -> Result<GraphFunction, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coef: Vec<(f64, f64)> =
        (0..base.edges()).map(|_| (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let bump = GraphFunction::from_fn_with_vertex(*base.params(), *base.grid(), Complex64::new(0.0, 0.0), |j, x| {
        Complex64::new(coef[j].0, coef[j].1) * (size * x * (-x).exp())
    })?;
    Ok(base.add(&bump)?)
}

fn evolve_cmd(cli: &Cli, path: &Path) -> Result<(), CliError> {
    let cfg = parse_evolve(&read_text(path)?)?;
    let params = cfg.params;
    let (f0, reference) = match &cfg.initial {
        Initial::Csv { path } => {
            let f =
                read_csv(File::open(path).map_err(|source| CliError::File { path: path.clone(), source })?, params)?;
            (f.clone(), f)
        }
        Initial::Stationary { j, omega } | Initial::Perturbed { j, omega, .. } => {
            let spec = StationarySpec::new(params, *j, *omega)?;
            let grid = match explicit_grid(cli, cfg.grid)? {
                Some(g) => g,
                None => spec.fitted_grid(STATIONARY_DX, 0.0)?,
            };
            let base = build_state(&spec, &grid)?;
            let f = match &cfg.initial {
                Initial::Perturbed { scale, noise, .. } => {
                    let scaled = base.scale_real(*scale);
                    if *noise != 0.0 {
                        seeded_noise(&scaled, *noise, cli.seed)?
                    } else {
                        scaled
                    }
                }
                _ => base.clone(),
            };
            (f, base)
        }
    };
    let rec = evolve(&f0, &cfg.cfg, Some(&reference))?;
    let orb = rec.orbital_distance.clone().unwrap_or_default();
    let rows: Vec<Vec<String>> = (0..rec.times.len())
        .map(|i| {
            vec![
                fmt_f64(rec.times[i]),
                fmt_f64(rec.mass[i]),
                fmt_f64(rec.energy[i]),
                fmt_f64(rec.hinorm[i]),
                opt(orb.get(i).copied()),
            ]
        })
        .collect();
    table(create(&cli.out, "monitors.csv")?, &["t", "mass", "energy", "h1", "orb_dist"], &rows)?;
    if let Some(snaps) = &rec.snapshots {
        for (i, s) in snaps.iter().enumerate() {
            write_csv(s, create(&cli.out, &format!("snapshot_{i:05}.csv"))?)?;
        }
    }
    for w in &rec.warnings {
        eprintln!("warning: {w}");
    }
    write_json(
        &cli.out,
        "evolve.json",
        &json!({
            "seed": cli.seed,
            "config": cfg,
            "grid": f0.grid(),
            "records": rec.times.len(),
            "max_mass_drift": TrajectoryRecord::max_relative_drift(&rec.mass),
            "max_energy_drift": TrajectoryRecord::max_relative_drift(&rec.energy),
            "max_orbital_distance": orb.iter().copied().fold(0.0, f64::max),
            "warnings": rec.warnings,
        }),
    )
}

/// PL breakpoints (`edge,x,y`) or a sampled graph function (`edge,x,re,im`), chosen by header.
fn read_rearrange_input(path: &Path) -> Result<PLGraphFunction, CliError> {
    let text = read_text(path)?;
    let header: Vec<&str> = text.lines().next().unwrap_or("").split(',').map(str::trim).collect();
    if header == ["edge", "x", "re", "im"] {
        let f = read_csv_any(text.as_bytes(), 0.0, 1.0)?;
        Ok(PLGraphFunction::from_samples(&f))
    } else {
        Ok(read_pl_csv(text.as_bytes())?)
    }
}

fn rearrange_cmd(cli: &Cli, input: Option<&Path>, tent_edges: Option<usize>) -> Result<(), CliError> {
    let f = match (input, tent_edges) {
        (Some(p), _) => read_rearrange_input(p)?,
        (None, Some(n)) if n >= 2 => tent(n),
        (None, Some(n)) => return Err(CliError::Config(format!("tent needs N >= 2, got {n}"))),
        (None, None) => return Err(CliError::Config("either --input or --tent is required".into())),
    };
    let star = rearrange(&f)?;
    write_pl_csv(&star, create(&cli.out, "rearranged.csv")?)?;
    emit(&cli.out, "rearrange.json", serde_json::to_value(report(&f, &star)?).map_err(CliError::Json)?)
}

fn stability(cli: &Cli, path: &Path) -> Result<(), CliError> {
    let cfg = parse_stability(&read_text(path)?)?;
    let spec = StationarySpec::ground(cfg.params, cfg.omega)?;
    let grid = match explicit_grid(cli, cfg.grid)? {
        Some(g) => g,
        None => spec.fitted_grid(STABILITY_DX, GridSpec::eigen_default().length)?,
    };
    let mut pair = assemble(&spec, &grid, cfg.k)?;
    let m = morse_report(&mut pair)?;
    let vk = vk_check(&cfg.params, cfg.omega, cfg.d_omega)?;
    emit(
        &cli.out,
        "stability.json",
        json!({
            "params": cfg.params,
            "omega": cfg.omega,
            "grid": grid,
            "low_spectrum_plus": m.low_spectrum_plus,
            "low_spectrum_minus": m.low_spectrum_minus,
            "neg_counts": {"plus": m.neg_plus, "minus": m.neg_minus},
            "kernel_residual": m.kernel_residual_plus,
            "kernel_cosine": m.kernel_cosine,
            "minus_form": m.minus_form,
            "minus_form_expected": m.minus_form_expected,
            "eigenpairs_used": m.eigenpairs_used,
            "vk_analytic": vk.analytic,
            "vk_numeric": vk.numeric,
        }),
    )
}

#[derive(Debug, Clone, Default, Serialize)]
struct ScanRow {
    d0: Option<f64>,
    action_ground: Option<f64>,
    nehari_residual: Option<f64>,
    alpha_star: Option<f64>,
    status: &'static str,
    reason: String,
    grid_length: Option<f64>,
    dx: Option<f64>,
    action_closed: Option<f64>,
    stationary_residual: Option<f64>,
    vk_analytic: Option<f64>,
    vk_numeric: Option<f64>,
    neg_plus: Option<usize>,
    neg_minus: Option<usize>,
    kernel_residual: Option<f64>,
}

const SCAN_HEADER: [&str; 19] = [
    "omega",
    "mu",
    "alpha",
    "N",
    "d0",
    "action_ground",
    "nehari_residual",
    "alpha_star",
    "status",
    "reason",
    "grid_L",
    "dx",
    "action_closed",
    "stationary_residual",
    "vk_analytic",
    "vk_numeric",
    "neg_plus",
    "neg_minus",
    "kernel_residual",
];

fn scan_point(p: &Point, tasks: &[Task], base: &GridSpec) -> ScanRow {
    let run = || -> Result<ScanRow, Error> {
        let params = StarGraphParams::new(p.edges, p.alpha, p.mu)?;
        let spec = StationarySpec::ground(params, p.omega)?;
        let grid = spec.fitted_grid(base.dx(), base.length)?;
        let mut row =
            ScanRow { status: "ok", grid_length: Some(grid.length), dx: Some(grid.dx()), ..Default::default() };
        if tasks.contains(&Task::Functionals) || tasks.contains(&Task::Stationary) {
            let f = build_state(&spec, &grid)?;
            if tasks.contains(&Task::Functionals) {
                let fr = evaluate(&f, p.omega)?;
                row.action_ground = Some(fr.action);
                row.d0 = Some(d0(p.omega, p.mu)?);
                row.alpha_star = Some(alpha_star(p.omega, p.mu, p.edges)?.alpha);
                row.action_closed = Some(state_action(&spec));
                row.nehari_residual = Some(fr.nehari.abs());
            }
            if tasks.contains(&Task::Stationary) {
                row.stationary_residual = Some(residual(&f, p.omega));
            }
        }
        if tasks.contains(&Task::Vk) {
            let room = p.omega - params.omega_threshold();
            let vk = vk_check(&params, p.omega, 1e-4_f64.min(0.5 * room).min(0.5 * p.omega))?;
            row.vk_analytic = Some(vk.analytic);
            row.vk_numeric = Some(vk.numeric);
        }
        if tasks.contains(&Task::Stability) {
            let g = spec.fitted_grid(STABILITY_DX, GridSpec::eigen_default().length)?;
            let mut pair = assemble(&spec, &g, graphnls::stability::DEFAULT_EIGENPAIRS)?;
            let m = morse_report(&mut pair)?;
            row.neg_plus = Some(m.neg_plus);
            row.neg_minus = Some(m.neg_minus);
            row.kernel_residual = Some(m.kernel_residual_plus);
        }
        Ok(row)
    };
    match run() {
        Ok(r) => r,
        Err(e) => ScanRow {
            status: if e.is_numerical() { "failed" } else { "skipped" },
            reason: e.to_string(),
            ..Default::default()
        },
    }
}

fn scan(cli: &Cli, path: &Path) -> Result<(), CliError> {
    let cfg: ScanConfig = parse_scan(&read_text(path)?)?;
    let points = cfg.points()?;
    let base = explicit_grid(cli, cfg.grid)?.unwrap_or_else(GridSpec::functionals_default);
    let mut tasks = cfg.tasks.clone();
    tasks.sort();
    tasks.dedup();
    let rows: Vec<ScanRow> = points.par_iter().map(|p| scan_point(p, &tasks, &base)).collect();
    let cells: Vec<Vec<String>> = points
        .iter()
        .zip(&rows)
        .map(|(p, r)| {
            vec![
                fmt_f64(p.omega),
                fmt_f64(p.mu),
                fmt_f64(p.alpha),
                p.edges.to_string(),
                opt(r.d0),
                opt(r.action_ground),
                opt(r.nehari_residual),
                opt(r.alpha_star),
                r.status.to_string(),
                r.reason.clone(),
                opt(r.grid_length),
                opt(r.dx),
                opt(r.action_closed),
                opt(r.stationary_residual),
                opt(r.vk_analytic),
                opt(r.vk_numeric),
                r.neg_plus.map(|n| n.to_string()).unwrap_or_default(),
                r.neg_minus.map(|n| n.to_string()).unwrap_or_default(),
                opt(r.kernel_residual),
            ]
        })
        .collect();
    let dir: PathBuf = cfg.output_dir.clone().unwrap_or_else(|| cli.out.clone());
    table(create(&dir, "scan.csv")?, &SCAN_HEADER, &cells)?;
    let failed = rows.iter().filter(|r| r.status == "failed").count();
    write_json(
        &dir,
        "scan.json",
        &json!({
            "seed": cli.seed,
            "config": cfg,
            "grid": base,
            "points": rows.len(),
            "skipped": rows.iter().filter(|r| r.status == "skipped").count(),
            "failed": failed,
        }),
    )?;
    if failed > 0 {
        return Err(CliError::PartialFailure(failed));
    }
    Ok(())
}

fn escape(cli: &Cli, ns: &[usize], omega: f64, mu: f64, edges: usize) -> Result<(), CliError> {
    let far = ns.iter().copied().max().ok_or_else(|| CliError::Config("need at least one n".into()))?;
    if !(omega > 0.0) {
        return Err(CliError::Config(format!("omega must be positive, got {omega}")));
    }
    let need = far as f64 + 10.0 / omega.sqrt() + 15.0;
    let grid = match explicit_grid(cli, None)? {
        Some(g) => g,
        None => GridSpec::with_spacing(need.ceil(), ESCAPE_DX)?,
    };
    let target = d0(omega, mu)?;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let e = escape_demo(n, omega, mu, edges, &grid)?;
        rows.push(vec![
            n.to_string(),
            fmt_f64(e.reduced_action),
            fmt_f64(e.delta),
            fmt_f64(target),
            fmt_f64((e.reduced_action - target).abs()),
        ]);
    }
    let header = ["n", "reduced_action", "delta", "d0", "gap"];
    table(create(&cli.out, "escape.csv")?, &header, &rows)?;
    let _ = table(std::io::stdout().lock(), &header, &rows);
    Ok(())
}
