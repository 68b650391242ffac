//! The CLI subcommands: each runs one study and writes its output files.

use std::path::Path;

use lenssplit::gaussian::{classify, default_seeds, level_curves, stationary_kind};
use lenssplit::transforms::virial_blowup_check;
use lenssplit::{Observable, TimeGridKind};

use crate::config::LoadedConfig;
use crate::output::{fmt_f64, OutputDir};
use crate::studies::{convergence, error_growth, simulate};
use crate::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Converge,
    ErrorGrowth,
    PhasePortrait,
    Classify,
    BlowupCheck,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Converge => "converge",
            Command::ErrorGrowth => "error-growth",
            Command::PhasePortrait => "phase-portrait",
            Command::Classify => "classify",
            Command::BlowupCheck => "blowup-check",
        }
    }
}

/// Summary lines for the terminal and the process exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub lines: Vec<String>,
    pub exit_code: i32,
    pub files: Vec<String>,
}

pub fn execute(cmd: Command, c: &LoadedConfig, out: &Path, workers: usize) -> Result<Report, HarnessError> {
    let mut dir = OutputDir::create(out)?;
    let mut manifest: Vec<(String, String)> = vec![
        ("command".into(), cmd.name().into()),
        ("config".into(), c.origin.clone()),
        ("name".into(), c.config.meta.name.clone()),
        ("reproduces".into(), c.config.meta.reproduces.clone()),
    ];
    let mut lines = Vec::new();
    let mut exit_code = 0;
    match cmd {
        Command::Simulate => {
            let sim = simulate(c)?;
            let record = &sim.output.record;
            dir.write_series(record, &sim.cfg.observers)?;
            dir.write_snapshots(record, c.config.output.snapshot_stride)?;
            dir.write_events(sim.output.blowup.as_ref())?;
            let last = &sim.output.final_state;
            lines.push(format!(
                "{} {} on grid {}: {} of {} steps, t = {}",
                c.name(),
                sim.cfg.splitting.label(),
                sim.cfg.grids.kind.label(),
                last.n,
                sim.cfg.grids.steps,
                fmt_f64(last.t_n)
            ));
            for obs in [Observable::Mass, Observable::Error] {
                let series = record.series_of(obs);
                if let (Some(first), Some(end)) = (series.first(), series.last()) {
                    let text = match obs {
                        Observable::Mass => format!("mass drift {}", fmt_f64((end.1 - first.1).abs())),
                        _ => format!("final error {}", fmt_f64(end.1)),
                    };
                    manifest.push((obs.name().to_string() + "_summary", text.clone()));
                    lines.push(text);
                }
            }
            match &sim.output.blowup {
                Some(e) => {
                    let text = format!(
                        "blow-up detected in [{}, {}]: |grad| = {} > {}",
                        fmt_f64(e.t_lo),
                        fmt_f64(e.t_hi),
                        fmt_f64(e.grad_norm),
                        fmt_f64(e.threshold)
                    );
                    manifest.push(("status".into(), "blowup".into()));
                    manifest.push(("blowup_time".into(), fmt_f64(e.time())));
                    lines.push(text);
                    exit_code = 2;
                }
                None => manifest.push(("status".into(), "completed".into())),
            }
        }
        Command::Converge => {
            let conv = convergence(c, workers)?;
            let rows = conv.rows.iter().map(|r| {
                vec![
                    r.splitting.label().to_string(),
                    r.grid.label().to_string(),
                    r.steps.to_string(),
                    fmt_f64(r.tau),
                    fmt_f64(r.delta_max),
                    fmt_f64(r.error),
                    r.blowup.to_string(),
                ]
            });
            dir.write_csv(
                "convergence.csv",
                &["splitting", "grid", "steps", "tau", "delta_max", "error", "blowup"],
                rows,
            )?;
            for r in &conv.rows {
                lines.push(format!("N = {:>7}  tau = {:<12} error = {}", r.steps, fmt_f64(r.tau), fmt_f64(r.error)));
            }
            let (splitting, grid) =
                conv.rows.first().map(|r| (r.splitting.label(), r.grid.label())).unwrap_or(("", ""));
            let fit_row = match &conv.fit {
                Ok(f) => {
                    lines.push(format!("fitted order {:.4} over {} points", f.order, f.points));
                    manifest.push(("fitted_order".into(), fmt_f64(f.order)));
                    vec![
                        splitting.into(),
                        grid.into(),
                        f.points.to_string(),
                        fmt_f64(f.order),
                        fmt_f64(f.log_constant),
                        "ok".into(),
                    ]
                }
                Err(msg) => {
                    lines.push(format!("no order fit: {msg}"));
                    vec![
                        splitting.into(),
                        grid.into(),
                        conv.rows.len().to_string(),
                        String::new(),
                        String::new(),
                        msg.clone(),
                    ]
                }
            };
            dir.write_csv(
                "convergence_fit.csv",
                &["splitting", "grid", "points", "order", "log_constant", "status"],
                [fit_row],
            )?;
            manifest.push(("reference".into(), format!("{:?}", conv.reference).to_lowercase()));
            if let Some(n) = conv.reference_steps {
                manifest.push(("reference_steps".into(), n.to_string()));
            }
        }
        Command::ErrorGrowth => {
            let series = error_growth(c, workers)?;
            let rows = series.iter().flat_map(|s| {
                s.samples.iter().map(move |(n, t, e)| {
                    vec![
                        s.splitting.label().to_string(),
                        s.grid.label().to_string(),
                        n.to_string(),
                        fmt_f64(*t),
                        fmt_f64(*e),
                    ]
                })
            });
            dir.write_csv("error_growth.csv", &["splitting", "grid", "step", "t", "error"], rows)?;
            let mut fit_rows = Vec::new();
            for s in &series {
                for (model, fit) in [("linear", &s.linear), ("exponential", &s.exponential)] {
                    let mut row = vec![s.splitting.label().to_string(), s.grid.label().to_string(), model.to_string()];
                    match fit {
                        Some(f) => {
                            row.extend([
                                fmt_f64(f.slope),
                                fmt_f64(f.intercept),
                                fmt_f64(f.correlation),
                                f.points.to_string(),
                            ]);
                            lines.push(format!(
                                "{} {}: {model} fit correlation {:.5}",
                                s.splitting.label(),
                                s.grid.label(),
                                f.correlation
                            ));
                        }
                        None => row.extend([String::new(), String::new(), String::new(), "0".into()]),
                    }
                    fit_rows.push(row);
                }
                if let Some(last) = s.samples.last() {
                    lines.push(format!(
                        "{} {}: error at t = {} is {}",
                        s.splitting.label(),
                        s.grid.label(),
                        fmt_f64(last.1),
                        fmt_f64(last.2)
                    ));
                }
            }
            dir.write_csv(
                "error_growth_fit.csv",
                &["splitting", "grid", "model", "slope", "intercept", "correlation", "points"],
                fit_rows,
            )?;
        }
        Command::PhasePortrait => {
            let eq = &c.config.equation;
            let (bx, section) = c.portrait()?;
            let seeds: Vec<(f64, f64)> = if section.seeds.is_empty() {
                default_seeds(eq.lambda, eq.omega, &bx, section.trajectories)?
            } else {
                section.seeds.iter().map(|s| (s[0], s[1])).collect()
            };
            let portrait = level_curves(eq.lambda, eq.omega, &bx, &seeds, section.samples)?;
            let rows = portrait.curves.iter().enumerate().flat_map(|(k, curve)| {
                curve.points.iter().enumerate().map(move |(i, (mu, md))| {
                    vec![
                        k.to_string(),
                        fmt_f64(curve.seed.0),
                        fmt_f64(curve.seed.1),
                        fmt_f64(curve.level),
                        curve.closed.to_string(),
                        i.to_string(),
                        fmt_f64(*mu),
                        fmt_f64(*md),
                    ]
                })
            });
            dir.write_csv(
                "phase_portrait.csv",
                &["curve", "seed_mu", "seed_mudot", "level", "closed", "point", "mu", "mudot"],
                rows,
            )?;
            let stationary = portrait.stationary.iter().map(|&(mu, md)| {
                vec![fmt_f64(mu), fmt_f64(md), stationary_kind(mu, eq.lambda, eq.omega).label().to_string()]
            });
            dir.write_csv("stationary_points.csv", &["mu", "mudot", "kind"], stationary)?;
            let closed = portrait.curves.iter().filter(|c| c.closed && c.points.len() > 1).count();
            lines.push(format!(
                "{} curves ({closed} closed), {} stationary points",
                portrait.curves.len(),
                portrait.stationary.len()
            ));
        }
        Command::Classify => {
            let eq = &c.config.equation;
            let regime = classify(eq.lambda, eq.omega)?;
            lines.push(format!(
                "lambda = {}, omega = {}: {}",
                fmt_f64(eq.lambda),
                fmt_f64(eq.omega),
                regime.describe()
            ));
            let points = regime.stationary_points();
            let rows: Vec<Vec<String>> = if points.is_empty() {
                vec![vec![fmt_f64(eq.lambda), fmt_f64(eq.omega), regime.label().into(), String::new(), String::new()]]
            } else {
                points
                    .iter()
                    .map(|&mu| {
                        let kind = stationary_kind(mu, eq.lambda, eq.omega).label();
                        lines.push(format!("stationary width mu = {} ({kind})", fmt_f64(mu)));
                        vec![fmt_f64(eq.lambda), fmt_f64(eq.omega), regime.label().into(), fmt_f64(mu), kind.into()]
                    })
                    .collect()
            };
            dir.write_csv("classification.csv", &["lambda", "omega", "regime", "mu", "kind"], rows)?;
            manifest.push(("regime".into(), regime.label().into()));
        }
        Command::BlowupCheck => {
            let params = c.params()?;
            let grid = c.spatial_grid()?;
            let u0 = c.initial_field(&grid)?;
            let check = virial_blowup_check(&u0, &params)?;
            lines.push(format!(
                "virial condition {}: lhs = {} {} rhs = {}",
                if check.holds { "holds" } else { "fails" },
                fmt_f64(check.lhs),
                if check.holds { "<" } else { ">=" },
                fmt_f64(check.rhs)
            ));
            dir.write_csv(
                "virial.csv",
                &["lhs", "rhs", "holds"],
                [vec![fmt_f64(check.lhs), fmt_f64(check.rhs), check.holds.to_string()]],
            )?;
            manifest.push(("virial_holds".into(), check.holds.to_string()));
        }
    }
    if matches!(cmd, Command::Converge | Command::ErrorGrowth | Command::Simulate) {
        let grid = c.time_grid_kind().unwrap_or(TimeGridKind::UniformT);
        manifest.push(("time_grid".into(), grid.label().into()));
    }
    let resolved =
        toml::to_string(&c.config).map_err(|e| HarnessError::Io(format!("cannot serialize configuration: {e}")))?;
    dir.write_manifest(&manifest, Some(&resolved))?;
    Ok(Report { lines, exit_code, files: dir.written().to_vec() })
}
