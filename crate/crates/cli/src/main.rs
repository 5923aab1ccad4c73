use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use subgap_core::config::{
    builtin_example, parse_spec, AnalysisInput, SpectrumSpec, SweepSpec, BUILTIN_NAMES,
};
use subgap_core::report::{
    analyze, spectrum_for, spectrum_text, sweep_for, sweep_text, to_machine, to_text,
};
use subgap_core::verify::{bless, verify_all};

const EXIT_ERROR: u8 = 1;
const EXIT_MISMATCH: u8 = 2;

#[derive(Parser)]
#[command(
    name = "subgap",
    version,
    about = "Spectral gap certificates for left-invariant sub-Laplacians"
)]
struct Cli {
    /// Absolute tolerance for identity checks.
    #[arg(long, global = true, env = "SUBGAP_TOLERANCE")]
    tolerance: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full pipeline and print a certification report.
    Analyze {
        #[command(flatten)]
        source: Source,
        /// Family parameter, as `c=<value>`.
        #[arg(long)]
        param: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Exact sub-Laplacian spectrum by irreducible representations.
    Spectrum {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 6)]
        cutoff: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Bisect the parameter at which the certified bound stops being positive.
    Sweep {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long, default_value_t = subgap_core::bound::SWEEP_DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compare every built-in example with its stored report.
    Verify {
        /// Rewrite the stored reports into this directory instead.
        #[arg(long)]
        bless: Option<PathBuf>,
    },
    /// List the built-in examples.
    List,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    builtin: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Machine,
}

fn load(source: &Source, tolerance: Option<f64>) -> Result<AnalysisInput> {
    let mut input = match (&source.input, &source.builtin) {
        (Some(path), _) => parse_spec(path)?,
        (None, Some(name)) => builtin_example(name, None)?,
        (None, None) => bail!("one of --input or --builtin is required"),
    };
    if let Some(t) = tolerance {
        if !(t.is_finite() && t > 0.0) {
            bail!("tolerance must be positive, got {t}");
        }
        input.tolerance = t;
    }
    Ok(input)
}

fn parse_param(s: &str) -> Result<f64> {
    let (key, value) = s
        .split_once('=')
        .ok_or_else(|| anyhow!("expected c=<value>, got {s:?}"))?;
    if key.trim() != "c" {
        bail!("unknown parameter {key:?}; the built-in families are parameterized by c");
    }
    value
        .trim()
        .parse()
        .with_context(|| format!("parameter value {value:?}"))
}

fn emit(text: String, output: Option<&PathBuf>) -> Result<()> {
    match output {
        Some(path) => {
            std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Analyze {
            source,
            param,
            output,
            format,
        } => {
            let mut input = load(&source, cli.tolerance)?;
            if let Some(p) = param {
                input = input.with_parameter(parse_param(&p)?);
            }
            let report = analyze(&input);
            let text = match format {
                Format::Text => to_text(&report),
                Format::Machine => to_machine(&report),
            };
            emit(text, output.as_ref())?;
        }
        Command::Spectrum {
            source,
            cutoff,
            format,
        } => {
            let mut input = load(&source, cli.tolerance)?;
            let group = input.spectrum.as_ref().and_then(|s| s.group.clone());
            input.spectrum = Some(SpectrumSpec {
                enabled: true,
                cutoff,
                group,
            });
            let stage = spectrum_for(&input);
            emit(
                match format {
                    Format::Text => spectrum_text(&stage),
                    Format::Machine => to_machine(&stage),
                },
                None,
            )?;
        }
        Command::Sweep {
            source,
            lo,
            hi,
            tol,
            format,
        } => {
            let mut input = load(&source, cli.tolerance)?;
            input.sweep = Some(SweepSpec {
                parameter: "c".into(),
                lo,
                hi,
                tol,
            });
            let stage = sweep_for(&input).expect("sweep was requested");
            emit(
                match format {
                    Format::Text => sweep_text(&stage),
                    Format::Machine => to_machine(&stage),
                },
                None,
            )?;
        }
        Command::Verify { bless: Some(dir) } => {
            for path in bless(&dir).with_context(|| format!("writing {}", dir.display()))? {
                println!("wrote {path}");
            }
        }
        Command::Verify { bless: None } => {
            let mut ok = true;
            for v in verify_all() {
                println!(
                    "[{}] {}",
                    if v.passed() { "ok" } else { "MISMATCH" },
                    v.name
                );
                for m in &v.mismatches {
                    println!("    {}: expected {}, got {}", m.path, m.expected, m.actual);
                }
                ok &= v.passed();
            }
            if !ok {
                return Ok(EXIT_MISMATCH);
            }
        }
        Command::List => {
            for n in BUILTIN_NAMES {
                println!("{n}");
            }
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
