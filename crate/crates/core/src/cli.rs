//! The `husp` command line: `mine`, `verify`, `gen`, `bench` and `convert`.
//!
//! Exit codes: 0 success, 1 verification mismatch, 2 usage error, 3 I/O or
//! data error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bounds::BoundKind;
use crate::datagen::{self, GenParams, SmallShape};
use crate::miner::{self, resolve_threshold, MineStats, MinerConfig, Threshold};
use crate::oracle::{self, OracleLimits};
use crate::pattern::Pattern;
use crate::qsdb::{self, ItemNames, Qsdb};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Mismatch(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::Mismatch(_) => EXIT_MISMATCH,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Mismatch(m) => f.write_str(m),
        }
    }
}

fn data_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Data(format!("{}: {e}", path.display()))
}

#[derive(Parser, Debug)]
#[command(
    name = "husp",
    version,
    about = "High-utility sequential pattern mining"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Mine every high-utility sequential pattern of a database.
    Mine(MineArgs),
    /// Compare the miner against the brute-force oracle.
    Verify(VerifyArgs),
    /// Generate a synthetic database.
    Gen(GenArgs),
    /// Time several configurations over several thresholds (CSV).
    Bench(BenchArgs),
    /// Import an SPMF inline-utility file.
    Convert(ConvertArgs),
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Sequence file.
    #[arg(long)]
    data: PathBuf,
    /// External utility file.
    #[arg(long)]
    utils: PathBuf,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct ThresholdArgs {
    /// Minimum utility ratio in (0, 1].
    #[arg(long)]
    ratio: Option<String>,
    /// Absolute minimum utility.
    #[arg(long)]
    minutil: Option<u64>,
}

impl ThresholdArgs {
    fn threshold(&self) -> Result<Threshold, CliError> {
        let t = match (&self.ratio, self.minutil) {
            (Some(r), None) => Threshold::ratio(r),
            (None, Some(m)) => Threshold::absolute(m),
            _ => unreachable!("clap enforces exactly one"),
        };
        t.map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum BoundArg {
    Trsu,
    Rsu,
}

impl From<BoundArg> for BoundKind {
    fn from(b: BoundArg) -> BoundKind {
        match b {
            BoundArg::Trsu => BoundKind::Trsu,
            BoundArg::Rsu => BoundKind::Rsu,
        }
    }
}

#[derive(Args, Debug)]
struct MineArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    threshold: ThresholdArgs,
    #[arg(long, value_enum, default_value = "trsu")]
    bound: BoundArg,
    #[arg(long)]
    no_iip: bool,
    #[arg(long)]
    no_ep: bool,
    #[arg(long)]
    no_peu: bool,
    #[arg(long)]
    no_swu: bool,
    /// Result file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stats document (JSON).
    #[arg(long)]
    stats: Option<PathBuf>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    threads: u16,
    /// `name:id` mapping; HUSPs are also printed by name on stderr.
    #[arg(long)]
    names: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, requires = "utils")]
    data: Option<PathBuf>,
    #[arg(long, requires = "data")]
    utils: Option<PathBuf>,
    /// Single ratio; defaults to 0.05, 0.10, ..., 0.50.
    #[arg(long)]
    ratio: Option<String>,
    /// Also check this many seeded random small databases.
    #[arg(long)]
    seeds: Option<u64>,
    /// First seed of the random databases.
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    c: f64,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    n: u32,
    #[arg(long, default_value_t = 5)]
    max_quantity: u32,
    #[arg(long, default_value_t = 1)]
    eu_min: u64,
    #[arg(long, default_value_t = 10)]
    eu_max: u64,
    #[arg(long, default_value_t = 1.0)]
    skew: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Writes `<prefix>.seq` and `<prefix>.util`.
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated ratios.
    #[arg(long, value_delimiter = ',', required = true)]
    ratios: Vec<String>,
    /// Comma-separated configs: `trsu` or `rsu`, optionally followed by
    /// `+noiip`, `+noep`, `+nopeu`, `+noswu`.
    #[arg(long, value_delimiter = ',', default_value = "trsu,rsu,trsu+noiip")]
    configs: Vec<String>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    threads: u16,
    /// CSV file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConvertArgs {
    /// SPMF file with `item[utility]` tokens.
    #[arg(long)]
    spmf: PathBuf,
    #[arg(long)]
    out_prefix: PathBuf,
}

/// Entry point shared by the binary and the tests.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Mine(a) => cmd_mine(a, stdout, stderr),
        Command::Verify(a) => cmd_verify(a, stdout),
        Command::Gen(a) => cmd_gen(a, stdout),
        Command::Bench(a) => cmd_bench(a, stdout),
        Command::Convert(a) => cmd_convert(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "husp: {e}");
            e.code()
        }
    }
}

fn load(data: &DataArgs) -> Result<Qsdb, CliError> {
    let open = |p: &Path| {
        File::open(p)
            .map(BufReader::new)
            .map_err(|e| data_err(p, e))
    };
    let seqs = open(&data.data)?;
    let utils = open(&data.utils)?;
    qsdb::parse_database(seqs, utils).map_err(|e| data_err(&data.data, e))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| data_err(path, e))
}

fn io_err(e: io::Error) -> CliError {
    CliError::Data(e.to_string())
}

/// How to reproduce a `mine` run, plus what it measured.
#[derive(Serialize)]
struct RunReport<'a> {
    data: &'a Path,
    utils: &'a Path,
    config: &'a MinerConfig,
    database_utility: u64,
    min_utility: f64,
    result: Option<&'a Path>,
    stats: &'a MineStats,
    wall_ms: f64,
    peak_memory_bytes: u64,
}

fn cmd_mine(a: MineArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let started = Instant::now();
    let config = MinerConfig {
        threshold: a.threshold.threshold()?,
        bound: a.bound.into(),
        iip: !a.no_iip,
        ep: !a.no_ep,
        peu_prune: !a.no_peu,
        swu_prefilter: !a.no_swu,
        max_pattern_length: None,
        threads: a.threads as usize,
    };
    let names = match &a.names {
        Some(p) => Some(
            File::open(p)
                .map_err(|e| data_err(p, e))
                .and_then(|f| ItemNames::parse(BufReader::new(f)).map_err(|e| data_err(p, e)))?,
        ),
        None => None,
    };
    let db = load(&a.data)?;
    let result = miner::mine(&db, &config).map_err(|e| CliError::Usage(e.to_string()))?;
    let text = result.to_result_text();
    match &a.out {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(text.as_bytes())
                .and_then(|_| w.flush())
                .map_err(|e| data_err(p, e))?;
        }
        None => stdout.write_all(text.as_bytes()).map_err(io_err)?,
    }
    if let Some(names) = &names {
        for (p, u) in &result.patterns {
            writeln!(stderr, "{} {u}", p.render(names)).map_err(io_err)?;
        }
    }
    if let Some(path) = &a.stats {
        let report = RunReport {
            data: &a.data.data,
            utils: &a.data.utils,
            config: &config,
            database_utility: db.total_utility(),
            min_utility: resolve_threshold(&config.threshold, &db).value(),
            result: a.out.as_deref(),
            stats: &result.stats,
            wall_ms: started.elapsed().as_secs_f64() * 1e3,
            peak_memory_bytes: result.stats.peak_memory_bytes,
        };
        let mut w = create(path)?;
        serde_json::to_writer_pretty(&mut w, &report)
            .map_err(|e| data_err(path, e))
            .and_then(|_| {
                writeln!(w)
                    .and_then(|_| w.flush())
                    .map_err(|e| data_err(path, e))
            })?;
    }
    Ok(())
}

/// The eight configurations checked against the oracle: bound × IIP × EP.
pub fn verify_configs(threshold: &Threshold) -> Vec<MinerConfig> {
    let mut out = Vec::new();
    for bound in [BoundKind::Trsu, BoundKind::Rsu] {
        for iip in [true, false] {
            for ep in [true, false] {
                out.push(MinerConfig {
                    bound,
                    iip,
                    ep,
                    ..MinerConfig::new(threshold.clone())
                });
            }
        }
    }
    out
}

/// First difference between a mined and an expected result set.
pub fn first_difference(mined: &[(Pattern, u64)], expected: &[(Pattern, u64)]) -> Option<String> {
    let (mut i, mut j) = (0, 0);
    loop {
        match (mined.get(i), expected.get(j)) {
            (None, None) => return None,
            (Some((p, u)), None) => return Some(format!("unexpected {p} #UTIL: {u}")),
            (None, Some((p, u))) => return Some(format!("missing {p} #UTIL: {u}")),
            (Some((p, u)), Some((q, v))) => match p.cmp(q) {
                std::cmp::Ordering::Less => return Some(format!("unexpected {p} #UTIL: {u}")),
                std::cmp::Ordering::Greater => return Some(format!("missing {q} #UTIL: {v}")),
                std::cmp::Ordering::Equal if u != v => {
                    return Some(format!("{p}: mined utility {u}, exact {v}"))
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            },
        }
    }
}

/// Runs every verify configuration at every ratio; returns the number of
/// comparisons or the first mismatch.
pub fn verify_database(db: &Qsdb, ratios: &[Threshold]) -> Result<usize, CliError> {
    let longest = db.sequences().iter().map(|s| s.len()).max().unwrap_or(0);
    let limits = OracleLimits {
        max_pattern_length: longest.max(1),
        ..OracleLimits::default()
    };
    let all = oracle::pattern_utilities(db, &limits).map_err(|e| CliError::Data(e.to_string()))?;
    let mut checked = 0;
    for t in ratios {
        let min = resolve_threshold(t, db);
        let expected: Vec<(Pattern, u64)> = all
            .iter()
            .filter(|(_, u)| min.passes(*u))
            .cloned()
            .collect();
        for cfg in verify_configs(t) {
            let mined = miner::mine(db, &cfg).map_err(|e| CliError::Usage(e.to_string()))?;
            if let Some(diff) = first_difference(&mined.patterns, &expected) {
                return Err(CliError::Mismatch(format!(
                    "FAIL at ratio {t}, config {}: {diff}",
                    cfg.label()
                )));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

pub fn default_verify_ratios() -> Vec<Threshold> {
    (1..=10)
        .map(|k| Threshold::Ratio {
            numer: 5 * k,
            scale: 2,
        })
        .collect()
}

fn cmd_verify(a: VerifyArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let ratios = match &a.ratio {
        Some(r) => vec![Threshold::ratio(r).map_err(|e| CliError::Usage(e.to_string()))?],
        None => default_verify_ratios(),
    };
    if a.data.is_none() && a.seeds.is_none() {
        return Err(CliError::Usage(
            "verify needs --data/--utils, --seeds, or both".into(),
        ));
    }
    if let (Some(data), Some(utils)) = (a.data, a.utils) {
        let db = load(&DataArgs { data, utils })?;
        let n = verify_database(&db, &ratios)?;
        writeln!(stdout, "PASS database: {n} comparisons").map_err(io_err)?;
    }
    if let Some(seeds) = a.seeds {
        let shape = SmallShape::default();
        let mut total = 0;
        for seed in a.seed_base..a.seed_base + seeds {
            let db = datagen::small_random(seed, &shape);
            total += verify_database(&db, &ratios).map_err(|e| match e {
                CliError::Mismatch(m) => CliError::Mismatch(format!("seed {seed}: {m}")),
                other => other,
            })?;
        }
        writeln!(stdout, "PASS {seeds} random databases: {total} comparisons").map_err(io_err)?;
    }
    Ok(())
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

fn write_database(db: &Qsdb, prefix: &Path, stdout: &mut dyn Write) -> Result<(), CliError> {
    let seq_path = with_ext(prefix, ".seq");
    let util_path = with_ext(prefix, ".util");
    let mut w = create(&seq_path)?;
    qsdb::write_sequences(db, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| data_err(&seq_path, e))?;
    let mut w = create(&util_path)?;
    qsdb::write_utilities(db.utilities(), &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| data_err(&util_path, e))?;
    writeln!(
        stdout,
        "wrote {} and {} ({} sequences)",
        seq_path.display(),
        util_path.display(),
        db.len()
    )
    .map_err(io_err)
}

fn cmd_gen(a: GenArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let params = GenParams {
        sequences: a.d,
        avg_elements: a.c,
        avg_items: a.t,
        items: a.n,
        max_quantity: a.max_quantity,
        utility_range: (a.eu_min, a.eu_max),
        skew: a.skew,
        seed: a.seed,
    };
    let db = datagen::generate(&params).map_err(|e| CliError::Usage(e.to_string()))?;
    write_database(&db, &a.out_prefix, stdout)
}

/// Parses a bench config such as `rsu+noiip`.
pub fn parse_bench_config(spec: &str, threshold: Threshold) -> Result<MinerConfig, CliError> {
    let bad = || CliError::Usage(format!("unknown bench config `{spec}`"));
    let mut parts = spec.split('+');
    let mut cfg = MinerConfig::new(threshold);
    cfg.bound = match parts.next() {
        Some("trsu") => BoundKind::Trsu,
        Some("rsu") => BoundKind::Rsu,
        _ => return Err(bad()),
    };
    for flag in parts {
        match flag {
            "noiip" => cfg.iip = false,
            "noep" => cfg.ep = false,
            "nopeu" => cfg.peu_prune = false,
            "noswu" => cfg.swu_prefilter = false,
            _ => return Err(bad()),
        }
    }
    Ok(cfg)
}

fn cmd_bench(a: BenchArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let ratios: Vec<&String> = a.ratios.iter().filter(|r| !r.is_empty()).collect();
    if ratios.is_empty() {
        return Err(CliError::Usage("bench needs at least one ratio".into()));
    }
    let thresholds = ratios
        .iter()
        .map(|r| Threshold::ratio(r).map_err(|e| CliError::Usage(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let configs = thresholds
        .iter()
        .map(|t| {
            a.configs
                .iter()
                .map(|c| parse_bench_config(c, t.clone()))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let db = load(&a.data)?;
    let mut csv = String::from("config,ratio,runtime_ms,candidates,husps,mem_bytes\n");
    for (t, row) in thresholds.iter().zip(configs) {
        for (name, mut cfg) in a.configs.iter().zip(row) {
            cfg.threads = a.threads as usize;
            let res = miner::mine(&db, &cfg).map_err(|e| CliError::Usage(e.to_string()))?;
            let s = &res.stats;
            csv.push_str(&format!(
                "{name},{t},{:.3},{},{},{}\n",
                s.elapsed_ms, s.candidates, s.husps, s.peak_memory_bytes
            ));
        }
    }
    match &a.out {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(csv.as_bytes())
                .and_then(|_| w.flush())
                .map_err(|e| data_err(p, e))
        }
        None => stdout.write_all(csv.as_bytes()).map_err(io_err),
    }
}

fn cmd_convert(a: ConvertArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let f = File::open(&a.spmf).map_err(|e| data_err(&a.spmf, e))?;
    let db = qsdb::import_spmf_inline(BufReader::new(f)).map_err(|e| data_err(&a.spmf, e))?;
    write_database(&db, &a.out_prefix, stdout)
}
