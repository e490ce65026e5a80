//! Argument handling and subcommands.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use lzctx::extract::{decompress_full, extract_streaming, Stats, Strategy};
use lzctx::matcher::{find_approx, find_exact};
use lzctx::{greedy_parse, Lz77Parse, Symbol};

use crate::bench::{self, Family};
use crate::format;

/// Exit status for bad input or arguments.
pub const EXIT_INPUT: i32 = 1;
/// Exit status for a failed internal consistency check.
pub const EXIT_INVARIANT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "lzctx", version, about = "Small-space LZ77 decompression, extraction and matching")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Greedy LZ77 parse of a byte file.
    Compress {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        alphabet: AlphabetArgs,
    },
    /// Expand a parse file back to bytes.
    Decompress {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        alphabet: AlphabetArgs,
        #[command(flatten)]
        strategy: StrategyArgs,
    },
    /// Write the substrings listed in an interval file.
    Extract {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        alphabet: AlphabetArgs,
        #[command(flatten)]
        strategy: StrategyArgs,
        /// File of `i j` lines (1-based, inclusive).
        #[arg(long)]
        intervals: PathBuf,
    },
    /// Report occurrences of a pattern.
    Match {
        #[command(flatten)]
        io: Io,
        #[command(flatten)]
        alphabet: AlphabetArgs,
        /// Pattern bytes; one trailing newline is dropped.
        #[arg(long)]
        pattern: PathBuf,
        /// Edit-distance budget; 0 means exact matching.
        #[arg(long, default_value_t = 0)]
        k: u32,
        /// Tag each start with `p` (primary) or `s` (secondary).
        #[arg(long)]
        kind: bool,
    },
    /// Summary of a parse file.
    Stats {
        #[command(flatten)]
        io: Io,
    },
    /// Peak-space table over generated texts.
    Bench {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, default_value = "2^10..2^16")]
        sizes: String,
        /// Input for `--family file`; sizes are prefix lengths.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Alphabet size for `--family rand`.
        #[arg(long, default_value_t = 4)]
        sigma: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the built-in consistency checks.
    Selftest,
}

#[derive(Debug, Args)]
struct Io {
    /// Input file (standard input when omitted).
    #[arg(long, short)]
    input: Option<PathBuf>,
    /// Output file (standard output when omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AlphabetArgs {
    /// Bytes are codes 1..=N as they are (default: byte b is code b + 1).
    #[arg(long, conflicts_with = "alphabet")]
    sigma: Option<u32>,
    /// The i-th byte of this string is code i (from 1).
    #[arg(long)]
    alphabet: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StrategyName {
    Naive,
    Grammar,
    Packed,
    Slp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Fib,
    Tm,
    Rand,
    File,
}

#[derive(Debug, Args)]
struct StrategyArgs {
    #[arg(long, value_enum, default_value_t = StrategyName::Slp)]
    strategy: StrategyName,
    /// Exponent for `packed`, in [0, 1].
    #[arg(long, conflicts_with = "tau")]
    delta: Option<f64>,
    /// Context length for `slp`, in [1, ceil(log2(n/z))].
    #[arg(long)]
    tau: Option<usize>,
    /// Write counters as `key=value` lines to this file.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Invariant(String),
}

impl From<lzctx::Error> for Failure {
    fn from(e: lzctx::Error) -> Self {
        match e {
            lzctx::Error::Invariant(m) => Failure::Invariant(m),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn input(msg: impl Into<String>) -> Failure {
    Failure::Input(msg.into())
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return 0;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{first}");
            return EXIT_INPUT;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            EXIT_INPUT
        }
        Err(Failure::Invariant(m)) => {
            eprintln!("invariant violated: {m}");
            EXIT_INVARIANT
        }
    }
}

fn read_bytes(path: Option<&Path>) -> Result<Vec<u8>, Failure> {
    match path {
        Some(p) => fs::read(p).map_err(|e| input(format!("{}: {e}", p.display()))),
        None => {
            let mut buf = Vec::new();
            io::stdin().read_to_end(&mut buf)?;
            Ok(buf)
        }
    }
}

fn read_text(path: Option<&Path>) -> Result<String, Failure> {
    String::from_utf8(read_bytes(path)?).map_err(|_| input("input is not UTF-8 text"))
}

fn read_parse(path: Option<&Path>) -> Result<Lz77Parse, Failure> {
    let text = read_text(path)?;
    format::deserialize_parse(&text).map_err(|e| input(format!("parse file {e}")))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            fs::File::create(p).map_err(|e| input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Byte <-> symbol code translation selected on the command line.
enum Alphabet {
    Shifted,
    Raw(u32),
    Table(Vec<u8>),
}

impl Alphabet {
    fn from_args(args: &AlphabetArgs) -> Result<Self, Failure> {
        match (&args.sigma, &args.alphabet) {
            (Some(0), _) => Err(input("--sigma 0: alphabet must be non-empty")),
            (Some(s), _) if *s > 255 => Err(input(format!("--sigma {s}: raw bytes allow at most 255"))),
            (Some(s), _) => Ok(Alphabet::Raw(*s)),
            (None, Some(a)) => {
                let bytes = a.as_bytes().to_vec();
                let mut seen = [false; 256];
                for &b in &bytes {
                    if std::mem::replace(&mut seen[b as usize], true) {
                        return Err(input(format!("--alphabet {a:?}: byte {b:?} repeated")));
                    }
                }
                if bytes.is_empty() {
                    return Err(input("--alphabet: empty"));
                }
                Ok(Alphabet::Table(bytes))
            }
            (None, None) => Ok(Alphabet::Shifted),
        }
    }

    fn sigma(&self) -> u32 {
        match self {
            Alphabet::Shifted => 256,
            Alphabet::Raw(s) => *s,
            Alphabet::Table(t) => t.len() as u32,
        }
    }

    fn encode(&self, bytes: &[u8]) -> Result<Vec<Symbol>, Failure> {
        let mut index = [0u32; 256];
        if let Alphabet::Table(t) = self {
            for (i, &b) in t.iter().enumerate() {
                index[b as usize] = i as u32 + 1;
            }
        }
        bytes
            .iter()
            .enumerate()
            .map(|(pos, &b)| {
                let code = match self {
                    Alphabet::Shifted => u32::from(b) + 1,
                    Alphabet::Raw(s) if b != 0 && u32::from(b) <= *s => u32::from(b),
                    Alphabet::Table(_) if index[b as usize] != 0 => index[b as usize],
                    _ => return Err(input(format!("byte {b} at offset {pos} is outside the alphabet"))),
                };
                Ok(code)
            })
            .collect()
    }

    fn decode(&self, code: Symbol) -> Result<u8, Failure> {
        let byte = match self {
            Alphabet::Shifted if (1..=256).contains(&code) => Some((code - 1) as u8),
            Alphabet::Raw(_) if (1..=255).contains(&code) => Some(code as u8),
            Alphabet::Table(t) if code >= 1 => t.get(code as usize - 1).copied(),
            _ => None,
        };
        byte.ok_or_else(|| input(format!("symbol code {code} has no byte in this alphabet")))
    }
}

fn strategy_of(args: &StrategyArgs) -> Result<Strategy, Failure> {
    match (args.strategy, args.delta, args.tau) {
        (StrategyName::Packed, delta, None) => {
            let delta = delta.unwrap_or(0.0);
            if !(0.0..=1.0).contains(&delta) {
                return Err(input(format!("--delta {delta}: must lie in [0, 1]")));
            }
            Ok(Strategy::Packed { delta })
        }
        (StrategyName::Slp, None, tau) => Ok(Strategy::SlpContext { tau }),
        (StrategyName::Naive, None, None) => Ok(Strategy::Naive),
        (StrategyName::Grammar, None, None) => Ok(Strategy::Grammar),
        (name, Some(d), _) => Err(input(format!("--delta {d}: not accepted by {name:?} strategy"))),
        (name, _, Some(t)) => Err(input(format!("--tau {t}: not accepted by {name:?} strategy"))),
    }
}

/// Streams decoded symbols to `out`, remembering the first decoding error.
fn write_symbols(
    out: &mut dyn Write,
    alphabet: &Alphabet,
    produce: impl FnOnce(&mut dyn FnMut(Symbol)) -> lzctx::Result<Stats>,
) -> Result<Stats, Failure> {
    let mut failure: Option<Failure> = None;
    let mut buf = Vec::with_capacity(1 << 16);
    let stats = produce(&mut |c| {
        if failure.is_some() {
            return;
        }
        match alphabet.decode(c) {
            Ok(b) => {
                buf.push(b);
                if buf.len() == buf.capacity() {
                    if let Err(e) = out.write_all(&buf) {
                        failure = Some(e.into());
                    }
                    buf.clear();
                }
            }
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(f) = failure {
        return Err(f);
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(stats)
}

fn write_report(path: Option<&Path>, stats: &Stats) -> Outcome {
    if let Some(p) = path {
        fs::write(p, format::format_stats(stats)).map_err(|e| input(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Compress { io, alphabet } => {
            let alphabet = Alphabet::from_args(&alphabet)?;
            let text = alphabet.encode(&read_bytes(io.input.as_deref())?)?;
            let parse = greedy_parse(&text, alphabet.sigma())?;
            let mut out = open_output(io.output.as_deref())?;
            out.write_all(format::serialize_parse(&parse).as_bytes())?;
            out.flush()?;
            Ok(())
        }
        Command::Decompress { io, alphabet, strategy } => {
            let alphabet = Alphabet::from_args(&alphabet)?;
            let mode = strategy_of(&strategy)?;
            let parse = read_parse(io.input.as_deref())?;
            let mut out = open_output(io.output.as_deref())?;
            let stats = write_symbols(&mut *out, &alphabet, |sink| decompress_full(&parse, mode, sink))?;
            write_report(strategy.report.as_deref(), &stats)
        }
        Command::Extract { io, alphabet, strategy, intervals } => {
            let alphabet = Alphabet::from_args(&alphabet)?;
            let mode = strategy_of(&strategy)?;
            let parse = read_parse(io.input.as_deref())?;
            let list = format::parse_intervals(&read_text(Some(&intervals))?)
                .map_err(|e| input(format!("{}: {e}", intervals.display())))?;
            let mut out = open_output(io.output.as_deref())?;
            let stats = write_symbols(&mut *out, &alphabet, |sink| extract_streaming(&parse, &list, mode, sink))?;
            write_report(strategy.report.as_deref(), &stats)
        }
        Command::Match { io, alphabet, pattern, k, kind } => {
            let alphabet = Alphabet::from_args(&alphabet)?;
            let parse = read_parse(io.input.as_deref())?;
            let mut bytes = read_bytes(Some(&pattern))?;
            if bytes.last() == Some(&b'\n') {
                bytes.pop();
            }
            let p = alphabet.encode(&bytes)?;
            let occ = if k == 0 { find_exact(&parse, &p)? } else { find_approx(&parse, &p, k)? };
            let mut out = open_output(io.output.as_deref())?;
            out.write_all(format::format_occurrences(&occ, kind).as_bytes())?;
            out.flush()?;
            Ok(())
        }
        Command::Stats { io } => {
            let parse = read_parse(io.input.as_deref())?;
            let (n, z) = (parse.len(), parse.z());
            let longest = parse.members().iter().map(|m| m.len).max().unwrap_or(0);
            let mut out = open_output(io.output.as_deref())?;
            write!(
                out,
                "sigma={}\nn={n}\nz={z}\nlongest_phrase={longest}\ndefault_tau={}\n",
                parse.sigma(),
                lzctx::extract::choose_tau(n, z, parse.sigma(), Strategy::SlpContext { tau: None })
            )?;
            out.flush()?;
            Ok(())
        }
        Command::Bench { family, sizes, file, sigma, seed, output } => {
            let sizes = bench::parse_sizes(&sizes).map_err(|e| input(format!("--sizes: {e}")))?;
            let strategies = bench::DEFAULT_STRATEGIES;
            let rows = match family {
                FamilyArg::File => {
                    let path = file.ok_or_else(|| input("--family file needs --file"))?;
                    let text = Alphabet::Shifted.encode(&read_bytes(Some(&path))?)?;
                    let mut rows = Vec::new();
                    for n in sizes {
                        let prefix = &text[..n.min(text.len())];
                        let parse = greedy_parse(prefix, 256)?;
                        rows.extend(bench::measure(&parse, prefix, &strategies)?);
                    }
                    rows
                }
                FamilyArg::Rand if sigma == 0 => return Err(input("--sigma 0: alphabet must be non-empty")),
                other => {
                    let family = match other {
                        FamilyArg::Fib => Family::Fib,
                        FamilyArg::Tm => Family::ThueMorse,
                        _ => Family::Random { sigma, seed },
                    };
                    bench::run_family(family, &sizes, &strategies)?
                }
            };
            let mut out = open_output(output.as_deref())?;
            out.write_all(bench::to_tsv(&rows).as_bytes())?;
            out.flush()?;
            Ok(())
        }
        Command::Selftest => selftest(),
    }
}

/// Small fixed checks of every layer against the naive decoder.
fn selftest() -> Outcome {
    let sample = Lz77Parse::new(
        2,
        [(-1, 1), (-2, 2), (1, 3), (2, 2)].iter().map(|&(s, l)| lzctx::Member::new(s, l)).collect(),
    )?;
    let text: Vec<Symbol> = b"abaababa".iter().map(|&b| u32::from(b - b'a') + 1).collect();
    let fail = |what: &str| Err(Failure::Invariant(format!("selftest: {what}")));
    if lzctx::decompress_naive(&sample)? != text {
        return fail("naive decoding");
    }
    if lzctx::decompress_naive(&greedy_parse(&text, 2)?)? != text {
        return fail("greedy parse round trip");
    }
    for mode in bench::DEFAULT_STRATEGIES.into_iter().chain([Strategy::SlpContext { tau: Some(1) }]) {
        let (got, _) = lzctx::extract::extract_to_vec(&sample, &[(3, 6)], mode)?;
        if got != text[2..6] {
            return fail(&format!("{} extraction", bench::label(mode)));
        }
    }
    let starts: Vec<i64> = find_exact(&sample, &text[..3])?.iter().map(|o| o.start).collect();
    if starts != [1, 4, 6] {
        return fail("pattern matching");
    }
    println!("selftest ok");
    Ok(())
}
