//! `relpos` command line: `simulate`, `run`, `sweep` and `eval`.
//!
//! Every configuration key can be given in a `--config` file and overridden
//! with a flag of the same name, e.g. `--sigma_r 0.5`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgAction, ArgMatches, Command};

use crate::config::{RunConfig, KEYS};
use crate::error::{HarnessError, Result};
use crate::formats::{meta_to_text, read_file, truth_from_csv, truth_to_csv, write_file, EstimateTimeline};
use crate::metrics::{error_timeline, mean, median};
use crate::replay::{run_replay, simulate};
use crate::sweep::{rows_to_csv, run_sweep, SweepAxis, SweepSpec};

fn with_overrides(cmd: Command) -> Command {
    let cmd = cmd.arg(
        Arg::new("config")
            .long("config")
            .value_name("FILE")
            .help("key=value configuration file"),
    );
    KEYS.iter().fold(cmd, |cmd, &key| {
        cmd.arg(
            Arg::new(key)
                .long(key)
                .value_name("VALUE")
                .hide(true)
                .help(format!("override configuration key {key}")),
        )
    })
}

fn path_arg(name: &'static str, help: &'static str) -> Arg {
    Arg::new(name)
        .long(name)
        .value_name("FILE")
        .value_parser(clap::value_parser!(PathBuf))
        .help(help)
}

pub fn command() -> Command {
    Command::new("relpos")
        .about("Cooperative relative positioning from inertial displacements and peer ranges")
        .subcommand_required(true)
        .subcommand(with_overrides(
            Command::new("simulate")
                .about("Generate a synthetic event log and its ground truth")
                .arg(path_arg("log", "event log to write").required(true))
                .arg(path_arg("truth", "ground-truth CSV to write").required(true)),
        ))
        .subcommand(with_overrides(
            Command::new("run")
                .about("Replay an event log and write the estimate timeline")
                .arg(path_arg("log", "event log to replay").required(true))
                .arg(path_arg("out", "timeline CSV to write").required(true))
                .arg(path_arg("truth", "ground truth for error metrics")),
        ))
        .subcommand(with_overrides(
            Command::new("sweep")
                .about("Sweep one parameter over simulated scenarios")
                .arg(
                    Arg::new("axis")
                        .long("axis")
                        .required(true)
                        .help("sigma_r | imu_noise_scale | m | alpha | init_shift"),
                )
                .arg(
                    Arg::new("values")
                        .long("values")
                        .required(true)
                        .help("comma-separated grid"),
                )
                .arg(
                    Arg::new("seeds")
                        .long("seeds")
                        .default_value("10")
                        .value_parser(clap::value_parser!(usize)),
                )
                .arg(
                    Arg::new("serial")
                        .long("serial")
                        .action(ArgAction::SetTrue)
                        .help("run single-threaded (for timing comparisons)"),
                )
                .arg(path_arg("out", "sweep table CSV to write").required(true)),
        ))
        .subcommand(
            Command::new("eval")
                .about("Score a timeline against ground truth")
                .arg(path_arg("timeline", "timeline CSV").required(true))
                .arg(path_arg("truth", "ground-truth CSV").required(true))
                .arg(path_arg("out", "error timeline CSV to write"))
                .arg(path_arg("gnuplot", "error timeline as whitespace-separated columns")),
        )
}

fn load_config(m: &ArgMatches) -> Result<RunConfig> {
    let mut cfg = match m.get_one::<String>("config") {
        Some(p) => RunConfig::load(Path::new(p))?,
        None => RunConfig::default(),
    };
    for &key in KEYS {
        if let Some(v) = m.get_one::<String>(key) {
            cfg.set(key, v)?;
        }
    }
    cfg.scenario()?;
    cfg.engine()?;
    Ok(cfg)
}

fn path<'a>(m: &'a ArgMatches, name: &str) -> &'a Path {
    m.get_one::<PathBuf>(name).expect("required argument")
}

fn meta_path(p: &Path) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

fn config_meta(cfg: &RunConfig) -> Vec<(String, String)> {
    let mut entries = vec![
        ("config_hash".to_string(), cfg.hash()),
        ("seed".to_string(), cfg.seed.to_string()),
    ];
    entries.extend(KEYS.iter().map(|k| (format!("config.{k}"), cfg.get(k).expect("known key"))));
    entries
}

fn cmd_simulate(m: &ArgMatches, out: &mut dyn std::io::Write) -> Result<()> {
    let cfg = load_config(m)?;
    let (truth, log) = simulate(&cfg)?;
    let log_path = path(m, "log");
    write_file(log_path, &log.to_text())?;
    write_file(path(m, "truth"), &truth_to_csv(&truth))?;
    write_file(&meta_path(log_path), &meta_to_text(&config_meta(&cfg)))?;
    let _ = writeln!(out, "events={} users={} config_hash={}", log.events.len(), log.priors.len(), cfg.hash());
    Ok(())
}

fn cmd_run(m: &ArgMatches, out: &mut dyn std::io::Write) -> Result<()> {
    let cfg = load_config(m)?;
    let result = run_replay(path(m, "log"), &cfg)?;
    let out_path = path(m, "out");
    write_file(out_path, &result.timeline.to_csv())?;
    let mut meta = config_meta(&cfg);
    meta.push(("ranging_batches".into(), result.batch_seconds.len().to_string()));
    meta.push(("failures".into(), result.failures.to_string()));
    meta.push(("dropped_ranges".into(), result.dropped_ranges.to_string()));
    let mut summary = format!("rows={} batches={}", result.timeline.rows.len(), result.batch_seconds.len());
    if let Some(truth_path) = m.get_one::<PathBuf>("truth") {
        let truth = truth_from_csv(&read_file(truth_path)?, &truth_path.display().to_string())?;
        let errors = error_timeline(&result.timeline, &truth)?;
        let values: Vec<f64> = errors.iter().map(|e| e.1).collect();
        let rmse = mean(&values);
        meta.push(("mean_rmse".into(), format!("{rmse:.6}")));
        let _ = write!(summary, " mean_rmse={rmse:.4}");
    }
    write_file(&meta_path(out_path), &meta_to_text(&meta))?;
    let _ = writeln!(out, "{summary} config_hash={}", cfg.hash());
    Ok(())
}

fn cmd_sweep(m: &ArgMatches, out: &mut dyn std::io::Write) -> Result<()> {
    let cfg = load_config(m)?;
    let axis: SweepAxis = m.get_one::<String>("axis").expect("required").parse()?;
    let values = m
        .get_one::<String>("values")
        .expect("required")
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| HarnessError::Usage(format!("bad grid value {v:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    let spec = SweepSpec {
        axis,
        values,
        seeds: *m.get_one::<usize>("seeds").expect("defaulted"),
    };
    let rows = run_sweep(&spec, &cfg, !m.get_flag("serial"))?;
    let out_path = path(m, "out");
    let table = rows_to_csv(axis, &rows);
    write_file(out_path, &table)?;
    let mut meta = config_meta(&cfg);
    meta.push(("sweep_axis".into(), axis.name().into()));
    meta.push(("sweep_seeds".into(), spec.seeds.to_string()));
    write_file(&meta_path(out_path), &meta_to_text(&meta))?;
    let _ = write!(out, "{table}");
    Ok(())
}

fn cmd_eval(m: &ArgMatches, out: &mut dyn std::io::Write) -> Result<()> {
    let tl_path = path(m, "timeline");
    let truth_path = path(m, "truth");
    let timeline = EstimateTimeline::from_csv(&read_file(tl_path)?, &tl_path.display().to_string())?;
    let truth = truth_from_csv(&read_file(truth_path)?, &truth_path.display().to_string())?;
    let errors = error_timeline(&timeline, &truth)?;
    if let Some(p) = m.get_one::<PathBuf>("out") {
        let mut csv = String::from("t,rmse\n");
        for (t, e) in &errors {
            let _ = writeln!(csv, "{t:.3},{e}");
        }
        write_file(p, &csv)?;
    }
    if let Some(p) = m.get_one::<PathBuf>("gnuplot") {
        let mut dat = String::from("# t rmse\n");
        for (t, e) in &errors {
            let _ = writeln!(dat, "{t:.3} {e}");
        }
        write_file(p, &dat)?;
    }
    let values: Vec<f64> = errors.iter().map(|e| e.1).collect();
    let _ = writeln!(
        out,
        "rows={} mean_rmse={:.4} median_rmse={:.4} final_rmse={:.4}",
        errors.len(),
        mean(&values),
        median(&values),
        values.last().copied().unwrap_or(f64::NAN)
    );
    Ok(())
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            if code == 0 {
                let _ = write!(out, "{}", e.render());
            } else {
                let _ = write!(err, "{}", e.render());
            }
            return code;
        }
    };
    let result = match matches.subcommand() {
        Some(("simulate", m)) => cmd_simulate(m, out),
        Some(("run", m)) => cmd_run(m, out),
        Some(("sweep", m)) => cmd_sweep(m, out),
        Some(("eval", m)) => cmd_eval(m, out),
        _ => Err(HarnessError::Usage("unknown command".into())),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}
