mod args;

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::error::ErrorKind;
use clap::Parser;
use rayon::prelude::*;
use serde_json::Value;

use pinchflow_core::convergence::{appendix, maximize_g};
use pinchflow_core::curvature::{condition_report, SpaceKind};
use pinchflow_core::mcf::{self, FlowConfig, FlowRun, MapKind, Stencil, TorusMap};
use pinchflow_core::pinching::{constants_report, delta_big_lambda, PairingMode, SearchOptions, SymmetryMode};
use pinchflow_core::report::{emit_plot, fmt_num, write_csv, Command, Format, PlotSpec, RunConfig, RunRecord, Series};
use pinchflow_core::Error;

use args::*;

const VALUE_FLAGS: [&str; 3] = ["--config", "--out", "--format"];
const SUBCOMMANDS: [&str; 6] = ["constants", "curvature", "appendix", "simulate", "sweep", "help"];

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match merge_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(failed) => ExitCode::from(if failed { 2 } else { 0 }),
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e.downcast_ref::<Error>().is_some_and(Error::is_numerical);
            ExitCode::from(if numerical { 2 } else { 1 })
        }
    }
}

/// Splices the flags of a `--config` JSON file in right after the
/// subcommand, so that later command-line flags override them.
fn merge_config(argv: Vec<String>) -> anyhow::Result<Vec<String>> {
    let mut path = None;
    let mut sub = None;
    let mut i = 1;
    while i < argv.len() {
        let a = &argv[i];
        if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else if a == "--config" {
            path = argv.get(i + 1).cloned();
            i += 1;
        } else if VALUE_FLAGS.contains(&a.as_str()) {
            i += 1;
        } else if sub.is_none() && SUBCOMMANDS.contains(&a.as_str()) {
            sub = Some(i);
        }
        i += 1;
    }
    let Some(path) = path else { return Ok(argv) };
    let text = std::fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let obj: serde_json::Map<String, Value> =
        serde_json::from_str(&text).with_context(|| format!("config {path} is not a flat JSON object"))?;
    let mut tokens = Vec::new();
    let mut command = None;
    for (k, v) in obj {
        if k == "command" {
            command = v.as_str().map(str::to_string);
            continue;
        }
        let flag = format!("--{k}");
        match v {
            Value::String(s) => tokens.extend([flag, s]),
            Value::Number(n) => tokens.extend([flag, n.to_string()]),
            Value::Bool(true) => tokens.push(flag),
            Value::Bool(false) => {}
            _ => bail!("config field {k:?} must be a string, number or boolean"),
        }
    }
    let mut out = argv;
    let at = match sub {
        Some(s) => s + 1,
        None => {
            let c = command.ok_or_else(|| anyhow!("no subcommand given on the command line or in {path}"))?;
            // global flags are accepted after the subcommand too
            out.insert(1, c);
            2
        }
    };
    out.splice(at..at, tokens);
    Ok(out)
}

struct Output {
    text: String,
    warnings: Vec<String>,
    failed: bool,
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let start = Instant::now();
    let out = cli.out.as_ref().map(|p| p.display().to_string());
    let fmt = |default: Format| match cli.format {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        Some(FormatArg::Svg) => Format::Svg,
        None => default,
    };
    let result = match &cli.command {
        Cmd::Constants(a) => {
            constants(RunConfig { command: constants_command(a)?, out, format: fmt(Format::Csv) }, start)
        }
        Cmd::Curvature(a) => {
            curvature(RunConfig { command: curvature_command(a), out, format: fmt(Format::Json) }, start)
        }
        Cmd::Appendix => appendix_cmd(RunConfig { command: Command::Appendix, out, format: fmt(Format::Json) }, start),
        Cmd::Simulate(a) => {
            simulate(a, RunConfig { command: simulate_command(a)?, out, format: fmt(Format::Csv) }, start)
        }
        Cmd::Sweep(a) => sweep(RunConfig { command: sweep_command(a)?, out, format: fmt(Format::Csv) }, start),
    }?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    match &cli.out {
        Some(p) => write_out(p, &result.text)?,
        None => print!("{}", result.text),
    }
    Ok(result.failed)
}

fn write_out(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn unsupported(format: Format, command: &str) -> anyhow::Error {
    Error::InvalidConfig(format!("{command} does not support {format:?} output")).into()
}

fn json(
    config: RunConfig,
    payload: &impl serde::Serialize,
    start: Instant,
    warnings: &[String],
) -> anyhow::Result<String> {
    let r = RunRecord::new(config, payload, start.elapsed().as_secs_f64(), warnings.to_vec())?;
    Ok(r.to_json())
}

fn plot_meta(config: &RunConfig) -> Option<String> {
    serde_json::to_string(config).ok()
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> anyhow::Result<Vec<T>> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| Error::InvalidConfig(format!("bad {what} value {x:?}")).into()))
        .collect()
}

fn parse_grid(s: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 1 {
        return parse_list(s, "Lambda-grid");
    }
    let [a, b, step] = parts[..] else {
        return Err(Error::InvalidConfig(format!("Lambda-grid {s:?} is not start:stop:step")).into());
    };
    let num =
        |x: &str| x.trim().parse::<f64>().map_err(|_| Error::InvalidConfig(format!("bad Lambda-grid value {x:?}")));
    let (a, b, step) = (num(a)?, num(b)?, num(step)?);
    if !(step > 0.0 && b >= a) {
        return Err(Error::InvalidConfig(format!("Lambda-grid {s:?} needs step > 0 and stop >= start")).into());
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| a + k as f64 * step).collect())
}

fn search_options(a: &ConstantsArgs) -> SearchOptions {
    SearchOptions {
        pairing: match a.mode {
            ModeArg::Symplectic => PairingMode::Symplectic,
            ModeArg::Free => PairingMode::Free,
        },
        symmetry: match a.symmetry {
            SymmetryArg::FullSymmetric => SymmetryMode::FullSymmetric,
            SymmetryArg::Unconstrained => SymmetryMode::Unconstrained,
        },
        grid_per_axis: a.grid_per_axis,
        refine_iters: a.refine_iters,
    }
}

fn constants_command(a: &ConstantsArgs) -> anyhow::Result<Command> {
    Ok(Command::Constants {
        n_pairs: a.n_pairs,
        search: search_options(a),
        lambda_grid: parse_grid(&a.lambda_grid)?,
        n: a.n,
        probe: a.probe,
    })
}

fn constants(config: RunConfig, start: Instant) -> anyhow::Result<Output> {
    let Command::Constants { n_pairs, search, lambda_grid, n, probe } = &config.command else { unreachable!() };
    if *n == 0 {
        return Err(Error::DomainError("n must be at least 1".into()).into());
    }
    let report = constants_report(*n_pairs, search, lambda_grid, *n, *probe, 1e-4)?;
    let mut warnings = Vec::new();
    if let pinchflow_core::pinching::Lambda0::AtLeast { probe } = report.lambda0 {
        warnings.push(format!("delta stays positive up to Lambda = {probe}; Lambda0 reported as unbounded"));
    }
    let text = match config.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> =
                report.rows.iter().map(|r| vec![fmt_num(r.big_lambda), fmt_num(r.delta)]).collect();
            write_csv(&config, &["Lambda", "delta_Lambda"], &rows)
        }
        Format::Json => json(config, &report, start, &warnings)?,
        Format::Svg => {
            let pts = report.rows.iter().map(|r| (r.big_lambda, r.delta)).collect();
            let spec = PlotSpec {
                title: format!("delta_Lambda, N = {n_pairs}"),
                x_label: "Lambda".into(),
                y_label: "delta_Lambda".into(),
                metadata: plot_meta(&config),
                ..Default::default()
            };
            emit_plot(&[Series { label: "delta_Lambda".into(), points: pts }], &spec)?
        }
    };
    Ok(Output { text, warnings, failed: false })
}

fn curvature_command(a: &CurvatureArgs) -> Command {
    let space = match a.space {
        SpaceArg::Grassmann => SpaceKind::GrassmannI { n: a.n, m: a.m },
        SpaceArg::Skew => SpaceKind::SkewII { n: a.n },
        SpaceArg::Sym => SpaceKind::SymIII { n: a.n },
        SpaceArg::Quadric => SpaceKind::QuadricIV { n: a.n },
    };
    Command::Curvature { space, samples: a.samples, seed: a.seed }
}

fn curvature(config: RunConfig, start: Instant) -> anyhow::Result<Output> {
    let Command::Curvature { space, samples, seed } = &config.command else { unreachable!() };
    let report = condition_report(space, *samples, *seed)?;
    let mut warnings = Vec::new();
    for (ok, c) in [(report.a_ok, "A"), (report.b_ok, "B")] {
        if !ok {
            warnings.push(format!("condition ({c}) fails for {space}"));
        }
    }
    let text = match config.format {
        Format::Json => json(config, &report, start, &warnings)?,
        f => return Err(unsupported(f, "curvature")),
    };
    Ok(Output { text, warnings, failed: false })
}

fn appendix_cmd(config: RunConfig, start: Instant) -> anyhow::Result<Output> {
    let a = appendix();
    let text = match config.format {
        Format::Json => json(config, &a, start, &[])?,
        Format::Csv => write_csv(
            &config,
            &["alpha0", "g0", "x_star"],
            &[vec![fmt_num(a.alpha0), fmt_num(a.g0), fmt_num(a.x_star)]],
        ),
        f => return Err(unsupported(f, "appendix")),
    };
    Ok(Output { text, warnings: vec![], failed: false })
}

fn flow_config(f: &FlowArgs) -> anyhow::Result<FlowConfig> {
    let cfg = FlowConfig {
        dt_factor: f.dt_factor,
        t_end: f.t_end,
        stencil: Stencil::from_order(f.order)?,
        record_every: f.record_every,
        stop_ii2: f.stop_ii2,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn simulate_command(a: &SimulateArgs) -> anyhow::Result<Command> {
    let map = match a.kind {
        KindArg::Identity => MapKind::Identity,
        KindArg::Shears => MapKind::ComposedShears { eps: a.eps, harmonics: a.harmonics },
        KindArg::Linear => {
            let v: Vec<i64> = parse_list(&a.a, "A")?;
            let [p, q, r, s] = v[..] else {
                return Err(Error::InvalidConfig(format!("A needs four entries, got {}", v.len())).into());
            };
            MapKind::Linear { a: [[p, q], [r, s]] }
        }
    };
    Ok(Command::Simulate {
        map,
        initial_grid: a.grid.as_ref().map(|p| p.display().to_string()),
        grid_size: a.grid_size,
        flow: flow_config(&a.flow)?,
        riccati_lambda1: a.riccati_lambda1,
    })
}

fn flag_warnings(run: &FlowRun) -> Vec<String> {
    let f = &run.flags;
    let mut w = Vec::new();
    if f.monotonicity_violations > 0 {
        w.push(format!(
            "min star omega decreased by more than {} in {} record intervals (worst {:e})",
            mcf::MONOTONICITY_TOL,
            f.monotonicity_violations,
            f.worst_star_omega_drift
        ));
    }
    if f.pinching_violations > 0 {
        w.push(format!(
            "max lambda exceeded its initial value by {} in {} records",
            mcf::PINCHING_TOL,
            f.pinching_violations
        ));
    }
    if !f.det_drift_ok {
        w.push(format!("det drift {:e} exceeds {}", f.max_det_drift, mcf::DET_DRIFT_LIMIT));
    }
    w
}

#[derive(serde::Serialize)]
struct SimulateResult {
    records: Vec<mcf::FlowRecord>,
    flags: mcf::FlowFlags,
    #[serde(skip_serializing_if = "Option::is_none")]
    kl: Option<pinchflow_core::convergence::KLParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    riccati: Option<mcf::RiccatiComparison>,
}

fn simulate(a: &SimulateArgs, config: RunConfig, start: Instant) -> anyhow::Result<Output> {
    let Command::Simulate { map, initial_grid, grid_size, flow, riccati_lambda1 } = &config.command else {
        unreachable!()
    };
    let initial = match initial_grid {
        Some(p) => TorusMap::read_grid(Path::new(p))?,
        None => mcf::make_map(map, *grid_size)?,
    };
    let (run, kl, riccati) = match riccati_lambda1 {
        Some(l1) => {
            let delta = delta_big_lambda(*l1, 1, &SearchOptions::default())?.value;
            let (run, kl, cmp) = mcf::riccati_check(&initial, flow, delta, maximize_g().alpha0, 10_000)?;
            (run, Some(kl), Some(cmp))
        }
        None => (mcf::run_flow(&initial, flow)?, None, None),
    };
    let mut warnings = flag_warnings(&run);
    if let Some(c) = &riccati {
        if c.vacuous {
            warnings.push(format!("K1 = {} is not negative; the envelope does not decay", c.k1));
        }
        if !c.holds {
            warnings.push(format!("g exceeds the Riccati envelope by {:e}", -c.worst_margin));
        }
    }
    if let Some(p) = &a.final_grid {
        run.final_map.write_grid(p)?;
    }
    let text = match config.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = run
                .records
                .iter()
                .map(|r| {
                    [r.t, r.min_star_omega, r.max_star_omega, r.max_lambda, r.max_ii2, r.det_drift]
                        .into_iter()
                        .map(fmt_num)
                        .collect()
                })
                .collect();
            write_csv(&config, &["t", "min_star_omega", "max_star_omega", "max_lambda", "max_II2", "det_drift"], &rows)
        }
        Format::Json => {
            let res = SimulateResult { records: run.records, flags: run.flags, kl, riccati };
            json(config, &res, start, &warnings)?
        }
        Format::Svg => {
            let meta = plot_meta(&config);
            let points = |v: &[mcf::GSample]| v.iter().map(|s| (s.t, s.g)).collect();
            let (title, series) = match &riccati {
                Some(c) => (
                    "g(t) against the Riccati envelope",
                    vec![
                        Series { label: "measured g".into(), points: points(&c.measured) },
                        Series { label: "envelope y(t)".into(), points: points(&c.envelope) },
                    ],
                ),
                None => (
                    "max |II|^2",
                    vec![Series {
                        label: "max |II|^2".into(),
                        points: run.records.iter().map(|r| (r.t, r.max_ii2)).collect(),
                    }],
                ),
            };
            let spec = PlotSpec {
                title: title.into(),
                y_label: "value".into(),
                log_y: true,
                metadata: meta,
                ..Default::default()
            };
            emit_plot(&series, &spec)?
        }
    };
    Ok(Output { text, warnings, failed: false })
}

fn sweep_command(a: &SweepArgs) -> anyhow::Result<Command> {
    Ok(Command::Sweep {
        eps: parse_list(&a.eps, "eps")?,
        harmonics: a.harmonics,
        grid_sizes: parse_list(&a.grid_sizes, "L")?,
        flow: flow_config(&a.flow)?,
    })
}

#[derive(serde::Serialize)]
struct SweepCell {
    grid_size: usize,
    eps: f64,
    max_lambda0: f64,
    max_ii2_0: f64,
    max_ii2_end: f64,
    worst_star_omega_drift: f64,
    pinching_violations: usize,
    max_det_drift: f64,
    status: String,
}

#[derive(serde::Serialize)]
struct SweepResult {
    cells: Vec<SweepCell>,
}

fn thread_count() -> anyhow::Result<Option<usize>> {
    match std::env::var("PINCHFLOW_THREADS") {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidConfig(format!("PINCHFLOW_THREADS = {s:?} is not a positive integer")).into()),
        },
        Err(_) => Ok(None),
    }
}

fn sweep(config: RunConfig, start: Instant) -> anyhow::Result<Output> {
    let Command::Sweep { eps, harmonics, grid_sizes, flow } = &config.command else { unreachable!() };
    let mut jobs = Vec::new();
    for &l in grid_sizes {
        for &e in eps {
            // fail fast on invalid cells before spending time on the others
            mcf::make_map(&MapKind::ComposedShears { eps: e, harmonics: *harmonics }, l)?;
            jobs.push((l, e));
        }
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().context("building worker pool")?;
    let mut cells: Vec<SweepCell> = pool.install(|| {
        jobs.par_iter()
            .map(|&(l, e)| {
                let map = mcf::make_map(&MapKind::ComposedShears { eps: e, harmonics: *harmonics }, l)
                    .expect("checked above");
                let first = mcf::monitors(&map, flow.stencil);
                match mcf::run_flow(&map, flow) {
                    Ok(run) => SweepCell {
                        grid_size: l,
                        eps: e,
                        max_lambda0: first.max_lambda,
                        max_ii2_0: first.max_ii2,
                        max_ii2_end: run.records.last().map_or(f64::NAN, |r| r.max_ii2),
                        worst_star_omega_drift: run.flags.worst_star_omega_drift,
                        pinching_violations: run.flags.pinching_violations,
                        max_det_drift: run.flags.max_det_drift,
                        status: "ok".into(),
                    },
                    Err(err) => SweepCell {
                        grid_size: l,
                        eps: e,
                        max_lambda0: first.max_lambda,
                        max_ii2_0: first.max_ii2,
                        max_ii2_end: f64::NAN,
                        worst_star_omega_drift: f64::NAN,
                        pinching_violations: 0,
                        max_det_drift: f64::NAN,
                        status: err.to_string().replace(',', ";"),
                    },
                }
            })
            .collect()
    });
    cells.sort_by(|a, b| a.grid_size.cmp(&b.grid_size).then(a.eps.total_cmp(&b.eps)));
    let warnings: Vec<String> = cells
        .iter()
        .filter(|c| c.status != "ok")
        .map(|c| format!("L = {}, eps = {}: {}", c.grid_size, c.eps, c.status))
        .collect();
    let failed = !warnings.is_empty();
    let text = match config.format {
        Format::Csv => {
            let rows: Vec<Vec<String>> = cells
                .iter()
                .map(|c| {
                    vec![
                        c.grid_size.to_string(),
                        fmt_num(c.eps),
                        fmt_num(c.max_lambda0),
                        fmt_num(c.max_ii2_0),
                        fmt_num(c.max_ii2_end),
                        fmt_num(c.worst_star_omega_drift),
                        c.pinching_violations.to_string(),
                        fmt_num(c.max_det_drift),
                        c.status.clone(),
                    ]
                })
                .collect();
            write_csv(
                &config,
                &[
                    "L",
                    "eps",
                    "max_lambda0",
                    "max_II2_0",
                    "max_II2_end",
                    "worst_star_omega_drift",
                    "pinching_violations",
                    "det_drift",
                    "status",
                ],
                &rows,
            )
        }
        Format::Json => json(config, &SweepResult { cells }, start, &warnings)?,
        f => return Err(unsupported(f, "sweep")),
    };
    Ok(Output { text, warnings, failed })
}
