use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand};

use connmat::format::{to_json, ConnectionOutput, FormatError, MorseOutput, Problem, ProblemInput, SimplexRef};
use connmat::generate::Generator;
use connmat::oracle::{verify_connection_matrix, OracleError};
use connmat::par::Execution;
use connmat::pipeline::{compute_connection_matrix, decompose, PipelineError};
use connmat::sweep::{bench_generator, CSV_HEADER};
use connmat::TieBreak;

#[derive(Parser)]
#[command(name = "connmat", version, about = "Connection matrices of multivector fields over GF(2)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the complex, the field and any Morse partition
    Validate {
        /// Problem JSON ("-" for stdin)
        input: PathBuf,
    },
    /// Print the Morse decomposition and its order
    Morse { input: PathBuf },
    /// Compute the connection matrix
    Connect {
        input: PathBuf,
        /// JSON object mapping Morse set ids to simplex orders; overrides the input's
        #[arg(long)]
        intra_order: Option<PathBuf>,
        /// Seed for the linear extension of the Morse order
        #[arg(long)]
        linext_seed: Option<u64>,
        /// Include the full reduced matrix
        #[arg(long)]
        emit_matrix: bool,
        /// Include the column additions performed
        #[arg(long)]
        emit_trace: bool,
        /// Certify the result with the brute-force oracle
        #[arg(long)]
        verify: bool,
        /// Print timings and sizes to stderr
        #[arg(long)]
        report: bool,
    },
    /// Certify a connection matrix document against a problem
    Verify { input: PathBuf, connection: PathBuf },
    /// Time the pipeline on generated instances and print CSV
    Bench {
        /// triangulated-torus-grid, random-forman, random-multivector or singleton
        #[arg(long, default_value = "triangulated-torus-grid")]
        generator: Generator,
        /// Comma-separated target sizes in simplices
        #[arg(long, value_delimiter = ',', default_value = "200,400,800,1600,3200")]
        sizes: Vec<usize>,
        /// Instances per size
        #[arg(long, default_value_t = 1)]
        repeat: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Run instances one after another
        #[arg(long)]
        sequential: bool,
    },
}

enum Failure {
    Validation(anyhow::Error),
    Internal(anyhow::Error),
    Rejected(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Internal(_) => 2,
            Failure::Rejected(_) => 3,
        }
    }
}

impl From<FormatError> for Failure {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::Field(field) => Failure::Validation(anyhow!(
                "{}",
                field.violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("\n")
            )),
            other => Failure::Validation(other.into()),
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Morse(_) | PipelineError::Basis(_) => Failure::Validation(e.into()),
            PipelineError::Assembly(_) | PipelineError::Connection(_) => Failure::Internal(e.into()),
        }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        Failure::Internal(e.into())
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn read_text(path: &Path) -> Result<String> {
    let mut text = String::new();
    if path == Path::new("-") {
        io::stdin().read_to_string(&mut text).context("reading stdin").map_err(Failure::Validation)?;
    } else {
        text = fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(Failure::Validation)?;
    }
    Ok(text)
}

fn read_input(path: &Path) -> Result<ProblemInput> {
    let text = read_text(path)?;
    ProblemInput::parse(&text).map_err(|e| Failure::Validation(anyhow!("{}: {e}", path.display())))
}

fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes()).and_then(|_| out.flush()).context("writing output").map_err(Failure::Internal)
}

fn validate(input: &Path) -> Result<()> {
    let problem = read_input(input)?.load()?;
    let decomp = decompose(&problem.complex, &problem.field, problem.options.morse_sets.clone())
        .map_err(|e| Failure::Validation(e.into()))?;
    emit(&format!(
        "valid: {} simplices, {} multivectors, {} Morse sets\n",
        problem.complex.len(),
        problem.field.blocks().len(),
        decomp.len()
    ))
}

fn morse(input: &Path) -> Result<()> {
    let problem = read_input(input)?.load()?;
    let decomp = decompose(&problem.complex, &problem.field, problem.options.morse_sets.clone())
        .map_err(|e| Failure::Validation(e.into()))?;
    emit(&to_json(&MorseOutput::new(&problem.complex, &decomp)))
}

fn certify(doc: &mut ConnectionOutput, problem: &Problem) -> Result<()> {
    let decomp = decompose(&problem.complex, &problem.field, problem.options.morse_sets.clone())
        .map_err(|e| Failure::Validation(e.into()))?;
    let (basis, cm) = doc.rebuild(&problem.complex, &decomp)?;
    doc.certificate = Some(verify_connection_matrix(&cm, &problem.complex, &decomp, &basis)?);
    Ok(())
}

fn rejection(doc: &ConnectionOutput) -> Result<()> {
    match &doc.certificate {
        Some(cert) if !cert.passed() => {
            Err(Failure::Rejected(cert.witness.clone().unwrap_or_else(|| "certificate failed".into())))
        }
        _ => Ok(()),
    }
}

#[allow(clippy::too_many_arguments)]
fn connect(
    input: &Path,
    intra_order: Option<&Path>,
    linext_seed: Option<u64>,
    emit_matrix: bool,
    emit_trace: bool,
    verify: bool,
    report: bool,
) -> Result<()> {
    let mut raw = read_input(input)?;
    if let Some(path) = intra_order {
        let text = read_text(path)?;
        let map: BTreeMap<String, Vec<SimplexRef>> = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))
            .map_err(Failure::Validation)?;
        raw.intra_order = Some(map);
    }
    let mut problem = raw.load()?;
    if let Some(seed) = linext_seed {
        problem.options.tie_break = TieBreak::Seeded(seed);
    }
    let out = compute_connection_matrix(&problem.complex, &problem.field, &problem.options)?;
    let mut doc = ConnectionOutput::new(&problem.complex, &out, emit_trace, emit_matrix);
    if verify {
        certify(&mut doc, &problem)?;
    }
    if report {
        let text = serde_json::to_string(&out.report).expect("serializable");
        eprintln!("{text}");
    }
    emit(&to_json(&doc))?;
    rejection(&doc)
}

fn verify(input: &Path, connection: &Path) -> Result<()> {
    let problem = read_input(input)?.load()?;
    let text = read_text(connection)?;
    let mut doc = ConnectionOutput::parse(&text).map_err(|e| Failure::Validation(anyhow!("{}: {e}", connection.display())))?;
    certify(&mut doc, &problem)?;
    emit(&to_json(doc.certificate.as_ref().expect("just certified")))?;
    rejection(&doc)
}

fn bench(generator: Generator, sizes: &[usize], repeat: u64, seed: u64, sequential: bool) -> Result<()> {
    let jobs: Vec<(usize, u64)> =
        sizes.iter().flat_map(|&n| (0..repeat).map(move |r| (n, seed.wrapping_add(r)))).collect();
    let exec = if sequential { Execution::Sequential } else { Execution::Parallel };
    let mut text = format!("{CSV_HEADER}\n");
    for report in bench_generator(generator, &jobs, exec) {
        text.push_str(&report?.csv_row());
        text.push('\n');
    }
    emit(&text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate { input } => validate(input),
        Command::Morse { input } => morse(input),
        Command::Connect { input, intra_order, linext_seed, emit_matrix, emit_trace, verify, report } => connect(
            input,
            intra_order.as_deref(),
            *linext_seed,
            *emit_matrix,
            *emit_trace,
            *verify,
            *report,
        ),
        Command::Verify { input, connection } => verify(input, connection),
        Command::Bench { generator, sizes, repeat, seed, sequential } => {
            bench(*generator, sizes, *repeat, *seed, *sequential)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Validation(e) => eprintln!("invalid: {e:#}"),
                Failure::Internal(e) => eprintln!("internal error: {e:#}"),
                Failure::Rejected(witness) => eprintln!("rejected: {witness}"),
            }
            ExitCode::from(failure.code())
        }
    }
}
