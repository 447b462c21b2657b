use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sheaf_wtypes::report::render;
use sheaf_wtypes::run::EXIT_INPUT;
use sheaf_wtypes::{cmd_compute, cmd_demo, cmd_validate, cmd_verify, Config, Fault, Outcome};

/// W-types in sheaves over finite Grothendieck sites.
#[derive(Parser, Debug)]
#[command(name = "sheaf-wtypes", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the site, presheaf and morphism laws.
    Validate(Opts),
    /// Build the tree quotient and the fixpoint chain and compare them.
    Compute(Opts),
    /// Run the separation, sheaf, algebra and initiality checks.
    Verify(Opts),
    /// The W-type of id: 1 -> 1 with and without the empty sieve covering.
    Demo(Opts),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FaultArg {
    MergeClasses,
    BlockSup,
}

#[derive(Args, Debug)]
struct Opts {
    #[arg(long)]
    site: Option<PathBuf>,
    #[arg(long)]
    x: Option<PathBuf>,
    #[arg(long)]
    y: Option<PathBuf>,
    #[arg(long)]
    f: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    max_depth: u32,
    #[arg(long, default_value_t = 16)]
    max_iter: usize,
    /// Seed for random instances; with no --x/--y/--f a random instance is used.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of consecutive seeds to verify.
    #[arg(long, default_value_t = 1)]
    count: usize,
    /// Skip random instances with more than a few hundred classes at depth 3.
    #[arg(long)]
    tractable: bool,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the JSON report instead of the summary.
    #[arg(long)]
    json: bool,
    /// Break the computed quotient on purpose to exercise the checks.
    #[arg(long, value_enum)]
    inject: Option<FaultArg>,
}

impl Opts {
    fn config(&self) -> Config {
        Config {
            site: self.site.clone(),
            x: self.x.clone(),
            y: self.y.clone(),
            f: self.f.clone(),
            max_depth: self.max_depth,
            max_iter: self.max_iter,
            seed: self.seed,
            count: self.count,
            tractable: self.tractable,
            inject: self.inject.map(|f| match f {
                FaultArg::MergeClasses => Fault::MergeClasses,
                FaultArg::BlockSup => Fault::BlockSup,
            }),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let (opts, outcome): (&Opts, Outcome) = match &cli.command {
        Command::Validate(o) => (o, cmd_validate(&o.config())),
        Command::Compute(o) => (o, cmd_compute(&o.config())),
        Command::Verify(o) => (o, cmd_verify(&o.config())),
        Command::Demo(o) => (o, cmd_demo(&o.config())),
    };
    let text = render(&outcome.report);
    if let Some(path) = &opts.out {
        if let Err(e) = std::fs::write(path, &text) {
            eprintln!("cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_INPUT as u8);
        }
    }
    if opts.json {
        print!("{text}");
    } else {
        print!("{}", outcome.summary);
    }
    ExitCode::from(outcome.code as u8)
}
