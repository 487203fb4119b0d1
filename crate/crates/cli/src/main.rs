use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use uobs_core::toolkit::{
    parse_sweep_csv, preset, recoil_momentum, run, sweep, sweep_csv, yb_scenario, ConfigFile, RecoilInput, SweepParam,
    ToolkitError, PRESETS,
};

#[derive(Parser)]
#[command(name = "uobs", version, about = "Collapse-versus-unitary measurement campaigns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one campaign and report it.
    Run(Source),
    /// Run a campaign once per value of a parameter and emit a CSV table.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Parameter name, e.g. phi_f, d, t_meas.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "range")]
        values: Vec<f64>,
        /// Evenly spaced values as start:stop:count.
        #[arg(long)]
        range: Option<String>,
    },
    /// Momentum and velocity of the quantum dot after an ion passes it.
    Recoil(RecoilArgs),
    /// List the built-in scenarios, or print one as TOML.
    Presets {
        #[arg(long)]
        show: Option<String>,
    },
}

#[derive(Args)]
struct Source {
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Replicate campaigns for a power estimate.
    #[arg(long)]
    replicates: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Structured,
}

#[derive(Args)]
struct RecoilArgs {
    /// Ion mass in atomic mass units.
    #[arg(long, default_value_t = uobs_core::toolkit::YB171_AMU)]
    m_ion_amu: f64,
    /// Initial ion energy in eV.
    #[arg(long, default_value_t = 1e-4)]
    energy_ev: f64,
    /// Fraction of the energy the ion keeps.
    #[arg(long, default_value_t = 0.01)]
    f: f64,
    /// Quantum-dot mass in atomic mass units.
    #[arg(long, conflicts_with = "qd_atoms")]
    m_qd_amu: Option<f64>,
    /// Quantum-dot size in atoms of the ion's mass.
    #[arg(long, default_value_t = 1000.0)]
    qd_atoms: f64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

fn io_err(path: &Path, e: std::io::Error) -> ToolkitError {
    ToolkitError::Io { path: path.to_path_buf(), message: e.to_string() }
}

fn write_file(dir: &Path, name: &str, body: &str) -> Result<(), ToolkitError> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = dir.join(name);
    std::fs::write(&path, body).map_err(|e| io_err(&path, e))
}

fn load(source: &Source) -> Result<ConfigFile, ToolkitError> {
    let mut file = match (&source.config, &source.preset) {
        (Some(p), _) => ConfigFile::load(p)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => {
            return Err(ToolkitError::Config { path: "<args>".into(), message: "give --config or --preset".into() })
        }
    };
    if let Some(s) = source.seed {
        file.seed = s;
    }
    if let Some(r) = source.replicates {
        file.report.replicates = r;
    }
    Ok(file)
}

fn parse_range(s: &str) -> Result<Vec<f64>, ToolkitError> {
    let bad = || ToolkitError::Config { path: "--range".into(), message: format!("expected start:stop:count, got {s:?}") };
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else { return Err(bad()) };
    let (a, b): (f64, f64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
    let n: usize = n.parse().map_err(|_| bad())?;
    match n {
        0 => Err(bad()),
        1 => Ok(vec![a]),
        _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
    }
}

fn execute(cli: Cli) -> Result<(), ToolkitError> {
    match cli.command {
        Command::Run(source) => {
            let file = load(&source)?;
            let report = run(&file)?;
            let (json, text) = (report.to_json(), report.to_text());
            if let Some(dir) = &source.out_dir {
                write_file(dir, "report.json", &json)?;
                write_file(dir, "report.txt", &text)?;
            }
            match source.format {
                Format::Text => print!("{text}"),
                Format::Structured => println!("{json}"),
            }
        }
        Command::Sweep { source, param, values, range } => {
            let p: SweepParam = param.parse()?;
            let file = load(&source)?;
            let values = match range {
                Some(r) => parse_range(&r)?,
                None => values,
            };
            if values.is_empty() {
                return Err(ToolkitError::Config { path: "--values".into(), message: "no sweep values".into() });
            }
            let rows = sweep(&file, p, &values)?;
            let csv = sweep_csv(&rows)?;
            debug_assert_eq!(parse_sweep_csv(&csv).ok().as_deref(), Some(&rows[..]));
            if let Some(dir) = &source.out_dir {
                write_file(dir, &format!("sweep_{p}.csv"), &csv)?;
            }
            match source.format {
                Format::Text => print!("{csv}"),
                Format::Structured => println!("{}", serde_json::to_string_pretty(&rows).expect("rows serialize")),
            }
        }
        Command::Recoil(a) => {
            let scenario = yb_scenario(a.qd_atoms);
            let m_qd_amu = a.m_qd_amu.unwrap_or(a.qd_atoms * a.m_ion_amu);
            let input = RecoilInput::from_atomic_units(a.m_ion_amu, a.energy_ev, a.f, m_qd_amu);
            let r = recoil_momentum(&input)?;
            let reference = recoil_momentum(&scenario)?;
            match a.format {
                Format::Structured => {
                    let v = serde_json::json!({ "input": input, "result": r });
                    println!("{}", serde_json::to_string_pretty(&v).expect("recoil serializes"));
                }
                Format::Text => {
                    println!("momentum   {:.4e} kg·m/s", r.momentum);
                    println!("velocity   {:.4e} m/s ({:.4} mm/s)", r.velocity, r.velocity * 1e3);
                    println!(
                        "reference  f = 1%, E = 1e-4 eV, {} Yb-mass atoms: {:.3} mm/s; the quoted ~0.1 mm/s depends on the dot's atomic mass",
                        a.qd_atoms,
                        reference.velocity * 1e3
                    );
                }
            }
        }
        Command::Presets { show } => match show {
            Some(name) => print!("{}", preset(&name)?.to_toml()),
            None => {
                for (name, about) in PRESETS {
                    println!("{name:<24}{about}");
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
