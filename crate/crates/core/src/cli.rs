//! Command-line front end. Every command writes fixed file names under
//! `--output-dir`; `run` returns the process exit code.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::baselines::{table2_run, write_examples_tsv, write_table2_tsv};
use crate::checks;
use crate::classifier::{classify, to_netlist, ClassifierRecord, Kind, PairClassifier};
use crate::error::{Error, Result};
use crate::search::{
    pairwise_sweep, search_best, winner_records, write_report_tsv, SearchConfig, SearchReport,
    WinnerRecord,
};
use crate::spectra::{load_dataset, select_pair, ColumnMap, Dataset, PairTask, Spectrum, Split};
use crate::stream::{read_pcm, scan, write_trace_tsv, FrameSpec, Window, DEFAULT_N_OUT};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "minmaxnet", version, about = "Quantile-pair spectral discriminants")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Directory for all output files.
    #[arg(long, global = true, default_value = "out")]
    pub output_dir: PathBuf,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Worker threads; 0 picks the core count.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exhaustive search for one class pair.
    Train(TrainArgs),
    /// Z and B searches over every class pair.
    Sweep(SweepArgs),
    /// Quantile classifier against its linear relaxations on dcl-iy.
    Table2(DatasetArgs),
    /// Discriminant trace of a classifier over a WAV file.
    Scan(ScanArgs),
    /// Min/max netlist of a classifier.
    Export(ClassifierArg),
    /// Oracle equivalence and invariant suites.
    Selftest,
}

#[derive(Debug, Args)]
pub struct DatasetArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Label column name (default `g`).
    #[arg(long)]
    pub label_col: Option<String>,
    /// Train/test column name (default `speaker`).
    #[arg(long)]
    pub split_col: Option<String>,
    #[arg(long)]
    pub id_col: Option<String>,
}

impl DatasetArgs {
    fn load(&self) -> Result<Dataset> {
        let map = ColumnMap {
            label: self.label_col.clone(),
            split: self.split_col.clone(),
            id: self.id_col.clone(),
        };
        load_dataset(&self.dataset, &map)
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    /// Class pair, positive first: `dcl,iy`.
    #[arg(long, value_parser = parse_pair)]
    pub pair: PairTask,
    #[arg(long, default_value = "Z", value_parser = parse_kind)]
    pub kind: Kind,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_width: u64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub data: DatasetArgs,
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_width: u64,
}

#[derive(Debug, Args)]
pub struct ClassifierArg {
    /// Classifier JSON as written by `train`.
    #[arg(long)]
    pub classifier: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub classifier: ClassifierArg,
    #[arg(long)]
    pub wav: PathBuf,
    #[arg(long, default_value_t = 512)]
    pub frame_len: usize,
    #[arg(long, default_value_t = 256)]
    pub hop: usize,
    #[arg(long, default_value = "hamming", value_parser = parse_window)]
    pub window: Window,
    #[arg(long, default_value_t = DEFAULT_N_OUT)]
    pub n_out: usize,
}

fn parse_pair(s: &str) -> std::result::Result<PairTask, String> {
    PairTask::parse(s).map_err(|e| e.to_string())
}

fn parse_kind(s: &str) -> std::result::Result<Kind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_window(s: &str) -> std::result::Result<Window, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

pub const TRAIN_REPORT: &str = "train_report.tsv";
pub const TRAIN_WINNERS: &str = "train_winners.json";
pub const CLASSIFIER: &str = "classifier.json";
pub const SWEEP_REPORT: &str = "sweep_report.tsv";
pub const SWEEP_WINNERS: &str = "sweep_winners.json";
pub const TABLE1: &str = "table1.tsv";
pub const TABLE2: &str = "table2.tsv";
pub const EXAMPLE: &str = "dcl_iy_example.tsv";
pub const TRACE: &str = "trace.tsv";
pub const NETLIST: &str = "netlist.json";

const EXPORT_CHECKS: usize = 100;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}

pub fn execute(cli: &Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Train(a) => cmd_train(cli, a),
        Command::Sweep(a) => cmd_sweep(cli, a),
        Command::Table2(a) => cmd_table2(cli, a),
        Command::Scan(a) => cmd_scan(cli, a),
        Command::Export(a) => cmd_export(cli, a),
        Command::Selftest => cmd_selftest(cli),
    })
}

fn output_file(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    Ok((path, BufWriter::new(file)))
}

fn write_with<F>(dir: &Path, name: &str, f: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
{
    let (path, mut w) = output_file(dir, name)?;
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(&path, e))
}

fn write_json<T: serde::Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_with(dir, name, |w| w.write_all(text.as_bytes()))
}

fn read_classifier(path: &Path) -> Result<(ClassifierRecord, PairClassifier)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let record: ClassifierRecord = serde_json::from_str(&text)?;
    let c = record.classifier()?;
    Ok((record, c))
}

fn width(w: u64) -> usize {
    usize::try_from(w).unwrap_or(usize::MAX)
}

fn cmd_train(cli: &Cli, a: &TrainArgs) -> Result<()> {
    let d = a.data.load()?;
    let train = select_pair(&d, &a.pair, Split::Train)?;
    let test = select_pair(&d, &a.pair, Split::Test)?;
    let cfg = SearchConfig::new(width(a.max_width), d.n_points(), a.kind)?;
    let report = search_best(&train, &test, &cfg)?;

    write_with(&cli.output_dir, TRAIN_REPORT, |w| {
        write_report_tsv(w, [(&a.pair, &report)])
    })?;
    write_json(&cli.output_dir, TRAIN_WINNERS, &winner_records(&a.pair, &report))?;
    write_json(&cli.output_dir, CLASSIFIER, &report.last().best.to_record(&a.pair))?;
    let last = report.last();
    eprintln!(
        "{} {}: width {} winner {} - {}, train {:.4}, test {:.4}",
        a.pair,
        a.kind,
        last.width,
        last.best.pos_neuron(),
        last.best.neg_neuron(),
        last.train_error,
        last.test_error
    );
    Ok(())
}

/// One row per pair: Z minus B error at the largest width.
pub fn write_table1_tsv<W: Write>(
    mut out: W,
    z: &BTreeMap<PairTask, SearchReport>,
    b: &BTreeMap<PairTask, SearchReport>,
) -> std::io::Result<()> {
    writeln!(
        out,
        "pair\tz_train_err\tb_train_err\ttrain_diff\tz_test_err\tb_test_err\ttest_diff"
    )?;
    for (task, zr) in z {
        let Some(br) = b.get(task) else { continue };
        let (zl, bl) = (zr.last(), br.last());
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            task.name(),
            zl.train_error,
            bl.train_error,
            zl.train_error - bl.train_error,
            zl.test_error,
            bl.test_error,
            zl.test_error - bl.test_error
        )?;
    }
    Ok(())
}

fn cmd_sweep(cli: &Cli, a: &SweepArgs) -> Result<()> {
    let d = a.data.load()?;
    let z = pairwise_sweep(&d, Kind::Z, width(a.max_width))?;
    let b = pairwise_sweep(&d, Kind::B, width(a.max_width))?;

    write_with(&cli.output_dir, SWEEP_REPORT, |w| {
        write_report_tsv(&mut *w, z.iter())?;
        // one header only
        let mut rest = Vec::new();
        write_report_tsv(&mut rest, b.iter())?;
        let body = rest.iter().position(|&c| c == b'\n').map_or(0, |i| i + 1);
        w.write_all(&rest[body..])
    })?;
    let mut winners: BTreeMap<String, BTreeMap<String, Vec<WinnerRecord>>> = BTreeMap::new();
    for (kind, reports) in [(Kind::Z, &z), (Kind::B, &b)] {
        for (task, r) in reports {
            winners
                .entry(task.name())
                .or_default()
                .insert(kind.to_string(), winner_records(task, r));
        }
    }
    write_json(&cli.output_dir, SWEEP_WINNERS, &winners)?;
    write_with(&cli.output_dir, TABLE1, |w| write_table1_tsv(w, &z, &b))?;
    Ok(())
}

fn cmd_table2(cli: &Cli, a: &DatasetArgs) -> Result<()> {
    let d = a.load()?;
    let report = table2_run(&d)?;
    write_with(&cli.output_dir, TABLE2, |w| write_table2_tsv(w, &report.rows))?;
    write_with(&cli.output_dir, EXAMPLE, |w| write_examples_tsv(w, &report.examples))?;
    Ok(())
}

fn cmd_scan(cli: &Cli, a: &ScanArgs) -> Result<()> {
    let (_, c) = read_classifier(&a.classifier.classifier)?;
    let spec = FrameSpec::new(a.frame_len, a.hop, a.window)?;
    let clip = read_pcm(&a.wav)?;
    let trace = scan(&clip, spec, a.n_out, &c)?;
    write_with(&cli.output_dir, TRACE, |w| write_trace_tsv(w, &trace))?;
    eprintln!("{} frames", trace.len());
    Ok(())
}

/// Compares netlist simulation with direct classification on `n` random
/// spectra, a tenth of them placed exactly on the threshold.
pub fn export_check(c: &PairClassifier, n: usize, seed: u64) -> Result<()> {
    let net = to_netlist(c);
    net.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = c.max_index();
    for t in 0..n {
        let values: Vec<f64> = (0..len).map(|_| rng.random_range(-5.0..5.0)).collect();
        let s = Spectrum::new(values, "?", Split::Test);
        let want = classify(c, &s)?;
        let got = net.simulate(&s.values)?;
        if want != got {
            return Err(Error::Netlist(format!(
                "simulation disagrees with classify on check spectrum {t}"
            )));
        }
    }
    Ok(())
}

fn cmd_export(cli: &Cli, a: &ClassifierArg) -> Result<()> {
    let (_, c) = read_classifier(&a.classifier)?;
    export_check(&c, EXPORT_CHECKS, cli.seed)?;
    write_json(&cli.output_dir, NETLIST, &to_netlist(&c))
}

fn cmd_selftest(cli: &Cli) -> Result<()> {
    let outcomes = checks::all_suites(cli.seed);
    let mut out = std::io::stdout().lock();
    let mut failed = 0;
    for o in &outcomes {
        let status = if o.passed() { "ok" } else { "FAIL" };
        // a closed pipe is not a test failure
        let _ = writeln!(out, "{status:4} {} ({} trials, {} mismatches)", o.name, o.trials, o.mismatches);
        if let Some(d) = &o.detail {
            let _ = writeln!(out, "     {d}");
        }
        failed += usize::from(!o.passed());
    }
    if failed > 0 {
        return Err(Error::Config(format!("{failed} self-test suites failed")));
    }
    Ok(())
}
