use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use curvature_lines_cli::commands::{self, write_outputs};
use curvature_lines_cli::export::{to_json, write_file};
use curvature_lines_cli::verify::{render_text, run_all, VerifyOptions};
use curvature_lines_cli::{CliError, CliResult, RunConfig};

#[derive(Parser)]
#[command(name = "curvature-lines", version, about = "Principal lines of deformed Clifford tori")]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Overrides {
    /// key = value file applied before the flags below
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    epsilon: Option<String>,
    #[arg(long, global = true)]
    branch: Option<String>,
    #[arg(long, global = true)]
    grid: Option<String>,
    #[arg(long, global = true)]
    tol: Option<String>,
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true)]
    iterations: Option<String>,
    /// four comma-separated reals
    #[arg(long, global = true, allow_hyphen_values = true)]
    pole: Option<String>,
    /// u,v
    #[arg(long, global = true, allow_hyphen_values = true)]
    start: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// First and second fundamental forms and (L, M, N) over the grid
    Forms,
    /// One principal line, lifted, until `iterations` section crossings
    Orbit,
    /// Iterates of the return map
    Poincare,
    /// Rotation number of the return map
    Rotation,
    /// Rotation numbers of both foliations over `eps_list`
    Scan,
    /// OBJ mesh of the projected torus and projected principal lines
    Figure,
    /// Run the verification suite
    Verify {
        /// Multiply every tolerance by this factor
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        tol_scale: f64,
    },
}

fn load(o: &Overrides) -> CliResult<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &o.config {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        cfg.apply_text(&text)?;
    }
    let flags = [
        ("epsilon", &o.epsilon),
        ("branch", &o.branch),
        ("grid", &o.grid),
        ("tol", &o.tol),
        ("out", &o.out),
        ("iterations", &o.iterations),
        ("pole", &o.pole),
        ("start", &o.start),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(command: Command, overrides: &Overrides) -> CliResult<()> {
    let cfg = load(overrides)?;
    let files = match command {
        Command::Forms => commands::forms_csv(&cfg)?,
        Command::Orbit => commands::orbit_csv(&cfg)?,
        Command::Poincare => commands::poincare_csv(&cfg)?,
        Command::Rotation => commands::rotation_json(&cfg)?,
        Command::Scan => commands::scan_json(&cfg)?,
        Command::Figure => commands::figure(&cfg)?,
        Command::Verify { tol_scale } => {
            if !(tol_scale >= 0.0) {
                return Err(CliError::Validation(format!("tol-scale must be >= 0, got {tol_scale}")));
            }
            let opts = VerifyOptions { tol_scale, out_dir: cfg.out.clone() };
            let report = run_all(&opts)?;
            let color = std::env::var_os("NO_COLOR").is_none_or(|v| v.is_empty());
            print!("{}", render_text(&report, color));
            let path = cfg.out.join("verify.json");
            write_file(&path, &to_json(&report))?;
            println!("report: {}", path.display());
            if !report.pass {
                let failed: Vec<String> =
                    report.checks.iter().filter(|c| c.hard && !c.pass).map(|c| c.id.to_string()).collect();
                return Err(CliError::Verification(format!("criteria {} failed", failed.join(", "))));
            }
            return Ok(());
        }
    };
    for path in write_outputs(&cfg.out, &files)? {
        println!("{}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = match Cli::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let overrides = args.overrides;
    let deterministic = load(&overrides).map(|c| c.deterministic).unwrap_or(true);
    if deterministic {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(1).build_global();
    }
    match run(args.command, &overrides) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
