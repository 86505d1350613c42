use std::fs;
use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use bbmkdv::reduce::DEFAULT_LADDER;
use bbmkdv_cli::commands::{self, Context, Outcome, Status};
use bbmkdv_cli::input::{Document, GeneratorSpec, SubstitutionSpec};
use bbmkdv_cli::report::{reproduce, Section};
use bbmkdv_cli::{parse_rung, CliError};
use clap::{Args, Parser, Subcommand};

/// Exact symbolic toolkit for the coupled BBM-KdV family.
#[derive(Parser)]
#[command(name = "bbmkdv", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Search ladder as `r,deg` pairs, tried in order.
    #[arg(long, global = true, num_args = 1.., value_parser = parse_rung)]
    ladder: Vec<(usize, usize)>,
    /// Highest jet order any derivative may reach.
    #[arg(long, global = true)]
    order_cap: Option<usize>,
    /// `boussinesq`, `kaup` or `bona-smith(lambda=<rational>)`.
    #[arg(long, global = true)]
    preset: Option<String>,
    /// Also write the result as JSON to this path.
    #[arg(long, global = true)]
    json: Option<PathBuf>,
    /// Print nothing on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Args)]
struct InputArgs {
    /// JSON input document, `-` for stdin. Defaults to the symbolic family.
    input: Option<PathBuf>,
    /// Generator as a combination of X1..X5, overriding the document.
    #[arg(long)]
    generator: Option<String>,
    #[arg(long, requires = "psi")]
    phi: Option<String>,
    #[arg(long, requires = "phi")]
    psi: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the adjoint system.
    Adjoint(InputArgs),
    /// Check that a generator is a point symmetry.
    CheckSymmetry(InputArgs),
    /// Solve the determining equations of a numeric system.
    SolveSymmetries {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 2)]
        degree: usize,
    },
    /// Compute the self-adjointness defect of a substitution.
    CheckSubstitution(InputArgs),
    /// Solve for substitutions with zero defect, splitting on parameters.
    SolveSubstitutions {
        #[command(flatten)]
        input: InputArgs,
        /// Allow t and x in the ansatz.
        #[arg(long)]
        non_autonomous: bool,
    },
    /// Strict, quasi or nonlinear self-adjointness.
    Classify(InputArgs),
    /// Build and certify the conserved vector of a generator and substitution.
    BuildConslaw {
        #[command(flatten)]
        input: InputArgs,
        /// Also compare with the known vectors.
        #[arg(long)]
        classify: bool,
    },
    /// Certify that a vector is conserved.
    VerifyConslaw(InputArgs),
    /// Run the whole reproduction pipeline.
    Reproduce {
        /// Restrict to these sections.
        #[arg(long, value_enum, value_delimiter = ',')]
        only: Vec<Section>,
    },
}

fn load(args: &InputArgs) -> Result<Document, CliError> {
    let mut doc = match &args.input {
        None => Document::default(),
        Some(p) if p.as_os_str() == "-" => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s)?;
            Document::from_json(&s)?
        }
        Some(p) => Document::from_json(&fs::read_to_string(p)?)?,
    };
    if let Some(g) = &args.generator {
        doc.generator = Some(GeneratorSpec::Named(g.clone()));
    }
    if let (Some(phi), Some(psi)) = (&args.phi, &args.psi) {
        doc.substitution = Some(SubstitutionSpec { phi: phi.clone(), psi: psi.clone() });
    }
    Ok(doc)
}

fn write_json(path: &Option<PathBuf>, value: &impl serde::Serialize) -> Result<(), CliError> {
    if let Some(p) = path {
        let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Input(e.to_string()))?;
        fs::write(p, text + "\n")?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<Status, CliError> {
    let ladder = if cli.ladder.is_empty() { DEFAULT_LADDER.to_vec() } else { cli.ladder.clone() };
    let ctx = Context { ladder: ladder.clone(), preset: cli.preset.clone(), order_cap: cli.order_cap };
    let outcome: Outcome = match &cli.command {
        Command::Reproduce { only } => {
            let report = reproduce(&ladder, only, cli.preset.as_deref())?;
            write_json(&cli.json, &report)?;
            if !cli.quiet {
                print!("{}", report.render());
            }
            return Ok(if report.passed() { Status::Pass } else { Status::Fail });
        }
        Command::Adjoint(a) => commands::adjoint(&ctx, &load(a)?)?,
        Command::CheckSymmetry(a) => commands::check_symmetry(&ctx, &load(a)?)?,
        Command::SolveSymmetries { input, degree } => commands::solve_symmetries_cmd(&ctx, &load(input)?, *degree)?,
        Command::CheckSubstitution(a) => commands::check_substitution(&ctx, &load(a)?)?,
        Command::SolveSubstitutions { input, non_autonomous } => {
            commands::solve_substitutions_cmd(&ctx, &load(input)?, !non_autonomous)?
        }
        Command::Classify(a) => commands::classify_cmd(&ctx, &load(a)?)?,
        Command::BuildConslaw { input, classify } => commands::build_conslaw(&ctx, &load(input)?, *classify)?,
        Command::VerifyConslaw(a) => commands::verify_conslaw(&ctx, &load(a)?)?,
    };
    write_json(&cli.json, &outcome.json)?;
    if !cli.quiet {
        println!("{}", outcome.text);
    }
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(Status::Pass) => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
