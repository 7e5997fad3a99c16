//! Command-line front end: one subcommand per verification scan, each writing
//! CSV/JSON artifacts and a manifest into an output directory.
//!
//! Settings come from an optional `key = value` file (`--config`) and from
//! flags, which take precedence. See [`config`] for the grammar.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::{Arg, ArgMatches};

pub use config::{parse_config, Command, RunConfig};
pub use error::{CliError, Origin};
pub use output::Artifact;

use config::RawConfig;

/// Name of the replayable resolved configuration written next to the artifacts.
pub const RESOLVED_CONFIG: &str = "run.cfg";
pub const MANIFEST: &str = "manifest.json";

fn flag(key: &str) -> String {
    key.replace('_', "-")
}

pub fn cli() -> clap::Command {
    let mut app = clap::Command::new("repulsive")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Numerical verification scans for the repulsive Hamiltonian -Δ - τ²x² + V")
        .arg(
            Arg::new("config")
                .long("config")
                .value_name("PATH")
                .global(true)
                .help("read settings from a `key = value` file; flags override it"),
        )
        .arg(
            Arg::new("output")
                .long("output")
                .value_name("DIR")
                .global(true)
                .help(format!("artifact directory [default: {}]", config::DEFAULT_OUTPUT)),
        )
        .arg(
            Arg::new("jobs")
                .long("jobs")
                .value_name("K")
                .global(true)
                .help("worker threads for scans; 0 uses every core [default: 0]"),
        )
        .arg(
            Arg::new("seed")
                .long("seed")
                .value_name("INT")
                .global(true)
                .help(format!(
                    "seed of the power-iteration start vectors [default: {}]",
                    config::DEFAULT_SEED
                )),
        );
    for c in Command::ALL {
        let mut sub = clap::Command::new(c.name()).about(c.about());
        for d in c.params() {
            sub = sub.arg(
                Arg::new(d.key)
                    .long(flag(d.key))
                    .value_name(d.kind.metavar())
                    .allow_negative_numbers(true)
                    .help(format!("{} [default: {}]", d.help, d.default)),
            );
        }
        app = app.subcommand(sub);
    }
    app
}

fn global<'a>(m: &'a ArgMatches, key: &str) -> Option<&'a String> {
    m.subcommand()
        .and_then(|(_, sub)| sub.get_one::<String>(key))
        .or_else(|| m.get_one::<String>(key))
}

/// Merges the config file (if any) with the flags.
pub fn resolve_matches(m: &ArgMatches) -> Result<RunConfig, CliError> {
    let mut raw = match global(m, "config") {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.into(),
                source,
            })?;
            RawConfig::parse(&text)?
        }
        None => RawConfig::default(),
    };
    if let Some((name, sub)) = m.subcommand() {
        if let Some((previous, _)) = &raw.command {
            if previous != name {
                return Err(CliError::Usage(format!(
                    "subcommand `{name}` conflicts with `command = {previous}` in the config file"
                )));
            }
        }
        raw.command = Some((name.to_string(), Origin::Flag));
        let command = Command::from_name(name).expect("subcommands mirror the command table");
        for d in command.params() {
            if let Some(v) = sub.get_one::<String>(d.key) {
                raw.set(d.key, v, Origin::Flag)?;
            }
        }
    }
    for key in ["output", "jobs", "seed"] {
        if let Some(v) = global(m, key) {
            raw.set(key, v, Origin::Flag)?;
        }
    }
    raw.resolve()
}

/// Runs the command and returns every artifact, the resolved config and the
/// manifest included, without touching the file system.
pub fn run_config(config: &RunConfig) -> Result<Vec<Artifact>, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| CliError::invalid("jobs", e.to_string()))?;
    let mut artifacts = pool.install(|| commands::execute(config))?;
    artifacts.push(Artifact::new(RESOLVED_CONFIG, config.to_config_text().into_bytes()));
    let manifest = output::manifest(config, &artifacts);
    artifacts.push(Artifact::json(MANIFEST, &manifest));
    Ok(artifacts)
}

pub fn write_artifacts(dir: &Path, artifacts: &[Artifact]) -> Result<(), CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    for a in artifacts {
        let path = dir.join(&a.name);
        fs::write(&path, &a.bytes).map_err(io(&path))?;
    }
    Ok(())
}

/// Entry point; returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match cli().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = resolve_matches(&matches).and_then(|config| {
        let artifacts = run_config(&config)?;
        write_artifacts(&config.output_dir, &artifacts)?;
        for a in &artifacts {
            println!("{}", config.output_dir.join(&a.name).display());
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
