use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use elladic::cli::{self, FieldFile};
use elladic::padic::PrecisionContext;
use elladic::Result;

#[derive(Parser)]
#[command(
    name = "elladic",
    about = "ℓ-adic regulators for number fields in which ℓ splits completely",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ContextArgs {
    /// the prime ℓ
    #[arg(long)]
    ell: u64,
    /// absolute precision exponent N (work modulo ℓ^N)
    #[arg(long, default_value_t = 12)]
    precision: u32,
    /// guard digits consumed by series evaluation and verdicts
    #[arg(long, default_value_t = 2)]
    slack: u32,
}

impl ContextArgs {
    fn context(&self) -> Result<PrecisionContext> {
        PrecisionContext::new(self.ell, self.precision, self.slack)
    }
}

#[derive(Args, Clone)]
struct FieldArg {
    /// path to a field specification file
    #[arg(long)]
    field: PathBuf,
}

impl FieldArg {
    fn load(&self) -> Result<FieldFile> {
        let text = std::fs::read_to_string(&self.field).map_err(|e| {
            elladic::Error::Validation(format!("cannot read {}: {e}", self.field.display()))
        })?;
        FieldFile::parse(&text)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Hensel-lifted roots realising the embeddings K → Q_ℓ
    Embed {
        #[command(flatten)]
        field: FieldArg,
        #[command(flatten)]
        ctx: ContextArgs,
        #[arg(long)]
        json: bool,
    },
    /// Log vectors of every declared generator
    Logvec {
        #[command(flatten)]
        field: FieldArg,
        #[command(flatten)]
        ctx: ContextArgs,
        #[arg(long)]
        json: bool,
    },
    /// Divisors of every declared generator
    Divisor {
        #[command(flatten)]
        field: FieldArg,
        #[command(flatten)]
        ctx: ContextArgs,
        #[arg(long)]
        json: bool,
    },
    /// Regulator determinants with precision-aware verdicts
    Regulator {
        /// which regulator: classical, relative or new
        #[arg(value_parser = ["classical", "relative", "new"])]
        which: String,
        #[command(flatten)]
        field: FieldArg,
        #[command(flatten)]
        ctx: ContextArgs,
        #[arg(long)]
        json: bool,
    },
    /// The U_{S,2} surrogate basis with rank diagnostics
    Us2 {
        #[command(flatten)]
        field: FieldArg,
        #[command(flatten)]
        ctx: ContextArgs,
        #[arg(long)]
        json: bool,
    },
    /// Words with vanishing log vector built from the α-conjugates
    Eta {
        #[command(flatten)]
        field: FieldArg,
        #[command(flatten)]
        ctx: ContextArgs,
        #[arg(long)]
        json: bool,
    },
    /// The Artin-unit coefficient system and its pairing matrix
    ArtinMatrix {
        #[command(flatten)]
        field: FieldArg,
        #[command(flatten)]
        ctx: ContextArgs,
        #[arg(long)]
        json: bool,
    },
    /// Is ζ_m conjugate to ζ_m^{-1} over Q_ℓ?
    Criterion {
        #[arg(long)]
        ell: u64,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        json: bool,
    },
    /// Primes ℓ ≤ bound with ℓ ≡ -1 (mod m) splitting completely in f
    Survey {
        #[command(flatten)]
        field: FieldArg,
        #[arg(long)]
        m: u64,
        #[arg(long)]
        bound: u64,
        #[arg(long)]
        json: bool,
    },
    /// Run the full invariant suite on the bundled example fields
    Selfcheck {
        #[arg(long, default_value_t = 12)]
        precision: u32,
        #[arg(long, default_value_t = 2)]
        slack: u32,
        /// randomized trials per identity
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // usage problems exit 1; explicit --help/--version exit 0
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code_for(&e) as u8)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let print = |value: &serde_json::Value, json: bool| {
        if json {
            println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
        } else {
            print!("{}", cli::render_human(value));
        }
    };
    let code = match cli.command {
        Command::Embed { field, ctx, json } => {
            let value = cli::cmd_embed(&field.load()?, ctx.context()?)?;
            print(&value, json);
            ExitCode::SUCCESS
        }
        Command::Logvec { field, ctx, json } => {
            let value = cli::cmd_logvec(&field.load()?, ctx.context()?)?;
            print(&value, json);
            ExitCode::SUCCESS
        }
        Command::Divisor { field, ctx, json } => {
            let value = cli::cmd_divisor(&field.load()?, ctx.context()?)?;
            print(&value, json);
            ExitCode::SUCCESS
        }
        Command::Regulator { which, field, ctx, json } => {
            let value = cli::cmd_regulator(&field.load()?, ctx.context()?, &which)?;
            print(&value, json);
            ExitCode::SUCCESS
        }
        Command::Us2 { field, ctx, json } => {
            let value = cli::cmd_us2(&field.load()?, ctx.context()?)?;
            print(&value, json);
            ExitCode::SUCCESS
        }
        Command::Eta { field, ctx, json } => {
            let value = cli::cmd_eta(&field.load()?, ctx.context()?)?;
            print(&value, json);
            ExitCode::SUCCESS
        }
        Command::ArtinMatrix { field, ctx, json } => {
            let value = cli::cmd_artin_matrix(&field.load()?, ctx.context()?)?;
            print(&value, json);
            ExitCode::SUCCESS
        }
        Command::Criterion { ell, m, json } => {
            let value = cli::cmd_criterion(ell, m)?;
            print(&value, json);
            ExitCode::SUCCESS
        }
        Command::Survey { field, m, bound, json } => {
            let value = cli::cmd_survey(&field.load()?, m, bound)?;
            print(&value, json);
            ExitCode::SUCCESS
        }
        Command::Selfcheck { precision, slack, trials, json } => {
            let (value, ok) = cli::selfcheck(precision, slack, trials)?;
            print(&value, json);
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
    };
    Ok(code)
}
