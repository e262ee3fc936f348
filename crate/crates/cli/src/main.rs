use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use magnon_core::MagnonError;
use magnon_experiments::bend::run_bend_study;
use magnon_experiments::config::{parse_range, SweepConfig};
use magnon_experiments::coupler::run_coupler;
use magnon_experiments::dmc::run_dmc;
use magnon_experiments::michelson::{run_michelson, run_michelson_single};
use magnon_experiments::spectra::{run_dispersion, run_modes, run_units};
use magnon_experiments::{
    parse_config, run_free_propagation, run_guided_propagation, write_run_dir, ExpError, ExperimentConfig, RunRecord,
    Table,
};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "magnon", version, about = "Single-magnon wavepacket simulations on patterned spin lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// TOML or JSON config; every key is optional.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Run directory to create.
    #[arg(long, value_name = "DIR", default_value = "run")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
    /// Sweep a config key, e.g. `eps_dmc=0:0.08:0.002`.
    #[arg(long, value_name = "KEY=START:STOP:STEP")]
    sweep: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Free band along Γ-X-M-Γ.
    Dispersion {
        #[command(flatten)]
        common: Common,
        /// Samples per path segment.
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Transverse modes of a single guide versus depth.
    Modes {
        #[command(flatten)]
        common: Common,
    },
    /// Packet on the bare lattice.
    Free {
        #[command(flatten)]
        common: Common,
    },
    /// Packet in a straight guide.
    Guide {
        #[command(flatten)]
        common: Common,
    },
    /// Bend loss versus radius.
    Bend {
        #[command(flatten)]
        common: Common,
    },
    /// Coupling grid and half-transfer lengths.
    Coupler {
        #[command(flatten)]
        common: Common,
    },
    /// Crystal phase shift, reflection and transmission.
    Dmc {
        #[command(flatten)]
        common: Common,
    },
    /// Interferometer output versus crystal depth.
    Michelson {
        #[command(flatten)]
        common: Common,
        /// Single run at this depth, with tracks and frames, instead of a sweep.
        #[arg(long, value_name = "EPS")]
        single: Option<f64>,
    },
    /// Lattice to SI conversion table.
    Units {
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Dispersion { common, .. }
            | Command::Modes { common }
            | Command::Free { common }
            | Command::Guide { common }
            | Command::Bend { common }
            | Command::Coupler { common }
            | Command::Dmc { common }
            | Command::Michelson { common, .. }
            | Command::Units { common } => common,
        }
    }

    fn run(&self, cfg: &ExperimentConfig) -> magnon_experiments::Result<RunRecord> {
        match self {
            Command::Dispersion { points, .. } => run_dispersion(cfg, *points),
            Command::Modes { .. } => run_modes(cfg),
            Command::Free { .. } => run_free_propagation(cfg),
            Command::Guide { .. } => run_guided_propagation(cfg),
            Command::Bend { .. } => run_bend_study(cfg),
            Command::Coupler { .. } => run_coupler(cfg),
            Command::Dmc { .. } => run_dmc(cfg),
            Command::Michelson { single: Some(e), .. } => run_michelson_single(cfg, *e),
            Command::Michelson { single: None, .. } => run_michelson(cfg),
            Command::Units { .. } => run_units(cfg).map(|r| r.0),
        }
    }
}

fn error_record(e: &ExpError) -> serde_json::Value {
    let field = match e {
        ExpError::Config { field, .. } | ExpError::Core(MagnonError::Config { field, .. }) => Some(field.clone()),
        _ => None,
    };
    let path = match e {
        ExpError::Io { path, .. } => Some(path.clone()),
        _ => None,
    };
    json!({ "error": { "kind": e.kind(), "message": e.to_string(), "field": field, "path": path } })
}

fn load(common: &Common) -> magnon_experiments::Result<(ExperimentConfig, Vec<u8>)> {
    let (mut cfg, mut bytes) = match &common.config {
        Some(p) => {
            let bytes = std::fs::read(p).map_err(|e| ExpError::Io {
                path: p.display().to_string(),
                message: e.to_string(),
            })?;
            (parse_config(p)?, bytes)
        }
        None => (ExperimentConfig::default(), Vec::new()),
    };
    if let Some(s) = &common.sweep {
        let (key, range) = s.split_once('=').ok_or_else(|| ExpError::Config {
            field: "sweep".into(),
            reason: format!("expected KEY=START:STOP:STEP, got `{s}`"),
        })?;
        cfg.sweep = Some(SweepConfig {
            key: key.trim().to_string(),
            values: parse_range(range)?,
        });
        bytes.extend_from_slice(format!("\n--sweep {s}\n").as_bytes());
    }
    Ok((cfg, bytes))
}

fn sweep_table(runs: &[(f64, RunRecord)]) -> Table {
    let keys: BTreeSet<&String> = runs
        .iter()
        .flat_map(|(_, r)| r.summary.iter().filter(|(_, v)| v.is_number()).map(|(k, _)| k))
        .collect();
    let mut header = vec!["value"];
    header.extend(keys.iter().map(|k| k.as_str()));
    let mut t = Table::new(&header);
    for (x, r) in runs {
        let mut row = vec![*x];
        row.extend(keys.iter().map(|k| r.get_f64(k).unwrap_or(f64::NAN)));
        t.push(row);
    }
    t
}

fn write_sweep_index(dir: &Path, key: &str, runs: &[(f64, RunRecord)], dirs: &[String]) -> magnon_experiments::Result<()> {
    let io = |p: &Path, e: std::io::Error| ExpError::Io {
        path: p.display().to_string(),
        message: e.to_string(),
    };
    let csv = dir.join("sweep.csv");
    std::fs::write(&csv, sweep_table(runs).to_csv()).map_err(|e| io(&csv, e))?;
    let idx = dir.join("sweep.json");
    let body = json!({ "key": key, "values": runs.iter().map(|r| r.0).collect::<Vec<_>>(), "runs": dirs });
    std::fs::write(&idx, serde_json::to_string_pretty(&body).expect("json") + "\n").map_err(|e| io(&idx, e))
}

fn dispatch(cmd: &Command) -> magnon_experiments::Result<()> {
    let common = cmd.common();
    let (cfg, bytes) = load(common)?;
    let runs = cfg.expand_sweep()?;
    if let [(None, one)] = runs.as_slice() {
        let started = chrono::Utc::now();
        let rec = cmd.run(one)?;
        write_run_dir(&rec, &common.out, &bytes, started)?;
        if let Command::Units { .. } = cmd {
            if let Some((_, text)) = rec.extra.iter().find(|(n, _)| n == "units.txt") {
                print!("{text}");
            }
        }
        for w in &rec.warnings {
            eprintln!("warning: {w}");
        }
        println!("{}", common.out.display());
        return Ok(());
    }
    let key = cfg.sweep.as_ref().map(|s| s.key.clone()).unwrap_or_default();
    let mut done = Vec::new();
    let mut dirs = Vec::new();
    for (k, (value, c)) in runs.iter().enumerate() {
        let value = value.expect("scalar sweep");
        let name = format!("{k:04}");
        let started = chrono::Utc::now();
        let rec = cmd.run(c)?;
        write_run_dir(&rec, &common.out.join(&name), &bytes, started)?;
        for w in &rec.warnings {
            eprintln!("warning: {key} = {value}: {w}");
        }
        dirs.push(name);
        done.push((value, rec));
    }
    write_sweep_index(&common.out, &key, &done, &dirs)?;
    println!("{}", common.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.command.common().threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", json!({ "error": { "kind": "config", "message": e.to_string(), "field": "threads" } }));
            return ExitCode::from(2);
        }
    }
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", error_record(&e));
            match e {
                ExpError::Config { .. } | ExpError::Parse(_) | ExpError::Core(MagnonError::Config { .. }) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::from(1),
            }
        }
    }
}
