use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand};
use vlcsim::scenario::{presets, run_scenario, Scenario, ScenarioParams, OVERRIDE_KEYS};
use vlcsim::scene_config::{load_scene, scene_to_toml, validate_scene_file};
use vlcsim::{Error, Scene};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;

/// Link-level simulator for MIMO visible-light links.
#[derive(Debug, Parser)]
#[command(name = "vlcsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write `<scenario>.csv` and `summary.json`.
    Run(RunArgs),
    /// Check a scene file and list every violated rule.
    Validate {
        /// Scene file (TOML).
        scene: PathBuf,
    },
    /// Print a built-in scene as TOML.
    Preset {
        /// Preset name; omit to list them.
        name: Option<String>,
    },
    /// Print the MCS table as CSV.
    McsTable,
}

#[derive(Debug, clap::Args)]
struct RunArgs {
    /// One of: siso-sweep, blockage-timeline, mrc-fsr-point, handover-sweep,
    /// mimo-area-grid, csi-report, oracle-check.
    #[arg(long)]
    scenario: Scenario,

    /// Scene file, or `preset:<name>`. Defaults to the scenario's preset.
    #[arg(long)]
    scene: Option<String>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output directory.
    #[arg(long, env = "VLCSIM_OUT", default_value = "vlcsim-out")]
    out: PathBuf,

    /// Parameter override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_override)]
    overrides: Vec<(String, String)>,
}

fn parse_override(s: &str) -> Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    let k = k.trim();
    if !OVERRIDE_KEYS.contains(&k) {
        return Err(format!(
            "unknown key `{k}`; expected one of {}",
            OVERRIDE_KEYS.join(", ")
        ));
    }
    Ok((k.to_string(), v.to_string()))
}

fn resolve_scene(spec: Option<&str>, scenario: Scenario) -> Result<Scene, Error> {
    match spec {
        None => {
            Ok(presets::preset_scene(scenario.default_preset()).expect("default preset exists"))
        }
        Some(s) => match s.strip_prefix("preset:") {
            Some(name) => presets::preset_scene(name).ok_or_else(|| {
                Error::Parse(format!(
                    "unknown preset `{name}`; expected one of {}",
                    presets::PRESET_NAMES.join(", ")
                ))
            }),
            None => load_scene(Path::new(s)),
        },
    }
}

fn run(args: RunArgs) -> Result<ExitCode, anyhow::Error> {
    let mut params = ScenarioParams::with_seed(args.seed);
    for (k, v) in &args.overrides {
        if let Err(e) = params.set(k, v) {
            eprintln!("error: {e}");
            return Ok(ExitCode::from(EXIT_USAGE));
        }
    }
    let scene = resolve_scene(args.scene.as_deref(), args.scenario)?;
    let output = run_scenario(args.scenario, &scene, &params)?;
    let written = output
        .write_to(&args.out)
        .with_context(|| format!("writing results to {}", args.out.display()))?;

    println!("scenario     {}", args.scenario);
    println!("seed         {}", args.seed);
    println!(
        "config hash  {}",
        output.summary["config_hash"].as_str().unwrap_or("")
    );
    if let Some(agg) = output.summary["aggregates"].as_object() {
        for (k, v) in agg {
            println!("{k:<12} {v}");
        }
    }
    for p in written {
        println!("wrote        {}", p.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn validate(path: &Path) -> Result<ExitCode, anyhow::Error> {
    let diags = validate_scene_file(path)?;
    if diags.is_empty() {
        println!("{}: ok", path.display());
        return Ok(ExitCode::SUCCESS);
    }
    for d in &diags {
        println!("{d}");
    }
    Ok(ExitCode::from(EXIT_FAILURE))
}

fn preset(name: Option<&str>) -> Result<ExitCode, anyhow::Error> {
    match name {
        None => {
            for n in presets::PRESET_NAMES {
                println!("{n}");
            }
            Ok(ExitCode::SUCCESS)
        }
        Some(n) => {
            let scene = presets::preset_scene(n).ok_or_else(|| {
                anyhow!(
                    "unknown preset `{n}`; expected one of {}",
                    presets::PRESET_NAMES.join(", ")
                )
            })?;
            print!("{}", scene_to_toml(&scene));
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Usage of the named subcommand, or of the whole tool.
fn usage_for(subcommand: Option<&str>) -> String {
    let mut cmd = Cli::command().bin_name("vlcsim");
    cmd.build();
    let sub = subcommand.and_then(|name| cmd.find_subcommand_mut(name));
    match sub {
        Some(sub) => sub.render_usage().to_string(),
        None => cmd.render_usage().to_string(),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            e.exit()
        }
        Err(e) => {
            let _ = e.print();
            eprintln!("\n{}", usage_for(std::env::args().nth(1).as_deref()));
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Validate { scene } => validate(&scene),
        Command::Preset { name } => preset(name.as_deref()),
        Command::McsTable => vlcsim::mcs::write_mcs_table_csv(std::io::stdout().lock())
            .map(|()| ExitCode::SUCCESS)
            .map_err(Into::into),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
