use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use ips::commands::{
    cmd_compare, cmd_generate, cmd_heatmap, cmd_record, compare_json, compare_table,
    load_tokenizer,
};
use ips::{server, BackendSpec, CliError};
use ips_core::{Backend, BootstrapStrategy, PenaltyForm, Strategy, StrategyConfig};

/// Dialogue response decoding with isotropic and proximal search.
#[derive(Parser)]
#[command(name = "ips", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode one response per input record and write them as JSONL.
    Generate {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        decode: Decode,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare strategies on corpus diversity and representation metrics,
    /// averaged over seeds.
    Compare {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        decode: Decode,
        /// Comma-separated strategy names.
        #[arg(long, value_delimiter = ',', default_value = "greedy,beam,topk,nucleus,contrastive,ips")]
        strategies: Vec<Strategy>,
        /// Comma-separated seeds.
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        seeds: Vec<u64>,
    },
    /// Write the token similarity matrix of one record's context and response as CSV.
    Heatmap {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        decode: Decode,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        record_id: String,
    },
    /// Capture a backend's outputs on every record's context extended by all
    /// continuations up to --depth tokens, as a scripted-backend table.
    Record {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
    /// Serve a backend over HTTP.
    Serve {
        #[arg(long, env = "IPS_BACKEND")]
        backend: BackendSpec,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        #[arg(long, default_value_t = 4)]
        workers: usize,
        /// Seconds allowed for each remote backend request.
        #[arg(long, default_value_t = 30.0)]
        timeout: f64,
    },
}

#[derive(Args)]
struct Io {
    #[arg(long)]
    input: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, env = "IPS_BACKEND")]
    backend: BackendSpec,
    /// Whitespace vocabulary file, one word per line; enables text contexts.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Seconds allowed for each remote backend request.
    #[arg(long, default_value_t = 30.0)]
    timeout: f64,
}

#[derive(Args)]
struct Decode {
    /// JSON strategy configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    penalty_form: Option<PenaltyForm>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    first_n: Option<usize>,
    #[arg(long)]
    first_strategy: Option<BootstrapStrategy>,
    #[arg(long)]
    first_k: Option<usize>,
    #[arg(long)]
    first_p: Option<f64>,
    #[arg(long)]
    beam_width: Option<usize>,
    #[arg(long)]
    max_new_tokens: Option<usize>,
    #[arg(long)]
    contrastive_k: Option<usize>,
    #[arg(long)]
    contrastive_alpha: Option<f64>,
    #[arg(long)]
    strict_isotropy: bool,
}

impl Decode {
    fn resolve(&self, seed: Option<u64>) -> Result<StrategyConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("reading {}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
            }
            None => StrategyConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { cfg.$field = v; })*
            };
        }
        set!(
            strategy => strategy,
            alpha => alpha,
            beta => beta,
            penalty_form => penalty_form,
            m => m,
            first_n => bootstrap_n,
            first_strategy => bootstrap_strategy,
            first_k => bootstrap_k,
            first_p => bootstrap_p,
            beam_width => beam_width,
            max_new_tokens => max_new_tokens,
            contrastive_k => contrastive_k,
            contrastive_alpha => contrastive_alpha,
        );
        if self.strict_isotropy {
            cfg.strict_isotropy = true;
        }
        if let Some(seed) = seed {
            cfg.seed = seed;
        }
        Ok(cfg)
    }
}

fn timeout(secs: f64) -> Result<Duration, CliError> {
    Duration::try_from_secs_f64(secs).map_err(|e| CliError::Config(format!("--timeout: {e}")))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| {
            anyhow::anyhow!("creating {}: {e}", p.display())
        })?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn open_backend(io: &Io) -> Result<Box<dyn Backend>, CliError> {
    io.backend.open(timeout(io.timeout)?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { io, decode, seed } => {
            let cfg = decode.resolve(seed)?;
            let tokenizer = load_tokenizer(io.vocab.as_deref())?;
            let backend = open_backend(&io)?;
            let mut out = open_output(io.output.as_deref())?;
            cmd_generate(&io.input, backend.as_ref(), &tokenizer, &cfg, &mut out)
        }
        Command::Compare {
            io,
            decode,
            strategies,
            seeds,
        } => {
            let cfg = decode.resolve(None)?;
            let tokenizer = load_tokenizer(io.vocab.as_deref())?;
            let backend = open_backend(&io)?;
            let rows = cmd_compare(&io.input, backend.as_ref(), &tokenizer, &cfg, &strategies, &seeds)?;
            if let Some(path) = &io.output {
                let mut out = open_output(Some(path))?;
                writeln!(out, "{}", compare_json(&rows))
                    .and_then(|_| out.flush())
                    .map_err(anyhow::Error::from)?;
            }
            print!("{}", compare_table(&rows));
            Ok(())
        }
        Command::Heatmap {
            io,
            decode,
            seed,
            record_id,
        } => {
            let cfg = decode.resolve(seed)?;
            let tokenizer = load_tokenizer(io.vocab.as_deref())?;
            let backend = open_backend(&io)?;
            let mut out = open_output(io.output.as_deref())?;
            cmd_heatmap(&io.input, backend.as_ref(), &tokenizer, &cfg, &record_id, &mut out)
        }
        Command::Record { io, depth } => {
            let tokenizer = load_tokenizer(io.vocab.as_deref())?;
            let backend = open_backend(&io)?;
            let table = cmd_record(&io.input, backend.as_ref(), &tokenizer, depth)?;
            let mut out = open_output(io.output.as_deref())?;
            serde_json::to_writer(&mut out, &table).map_err(anyhow::Error::from)?;
            writeln!(out).and_then(|_| out.flush()).map_err(anyhow::Error::from)?;
            Ok(())
        }
        Command::Serve {
            backend,
            addr,
            workers,
            timeout: secs,
        } => {
            let backend: Arc<dyn Backend> = Arc::from(backend.open(timeout(secs)?)?);
            let handle = server::spawn(backend, &addr, workers)?;
            eprintln!("serving on {}", handle.url());
            handle.join();
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
