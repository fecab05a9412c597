//! The `urk` command-line driver. Every subcommand writes CSV: one
//! `#`-prefixed line recording the full configuration, a header row, then
//! data rows. Output depends only on the arguments and the seed.
//!
//! Exit codes: 0 on success, 1 for unusable flags, 2 when a parameter
//! constraint is violated (the message names it), 3 for I/O or malformed
//! input.

use crate::error::Error;
use crate::experiments::{failure_rate, message_size, promise_instance, uniformity, HandleKind};
use crate::lb::{
    adaptivity_experiment, dec, dec_k, enc, enc_k, encoding_bit_length, pochhammer_check, random_subset,
    read_encoding, savings_report, write_encoding, EncoderOutput, LbParams, LbParamsK,
};
use crate::protocol::{indicator, is_correct, ProtocolParams, UrProtocol, HEADER_BYTES};
use crate::stream::{parse_stream, StreamCommand, TurnstileSketch};
use clap::{Args, Parser, Subcommand};
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(name = "urk", version, about = "Universal-relation sketches, turnstile sampling and subset encoding experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct Common {
    /// Shared random seed.
    #[arg(long, env = "URK_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
struct Proto {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 3)]
    q: u32,
    /// Recovery sparsity per unit of k.
    #[arg(long, default_value_t = crate::protocol::DEFAULT_OVERSAMPLE)]
    oversample: usize,
    #[arg(long, default_value_t = crate::sparse_recovery::DEFAULT_SLACK)]
    slack: usize,
}

impl Proto {
    fn params(&self, seed: u64) -> ProtocolParams {
        ProtocolParams::new(self.n, self.k)
            .with_q(self.q)
            .with_oversample(self.oversample)
            .with_slack(self.slack)
            .with_seed(seed)
    }
}

#[derive(Debug, Clone, Args)]
struct Lb {
    #[arg(long)]
    n: usize,
    /// log₂(1/δ) for the single-index encoder.
    #[arg(long, conflicts_with = "k", required_unless_present = "k")]
    log2_inv_delta: Option<u64>,
    /// Use the k-index encoder with this k.
    #[arg(long)]
    k: Option<usize>,
    /// oracle, always-fail, iid:<p>, sketch:<c> or bucket:<c>.
    #[arg(long, default_value = "bucket:4")]
    handle: HandleKind,
}

enum LbVariant {
    Single(LbParams),
    Multi(LbParamsK),
}

impl Lb {
    fn resolve(&self, seed: u64) -> Result<(LbVariant, Box<dyn crate::protocol::ProtocolHandle>), Error> {
        match (self.log2_inv_delta, self.k) {
            (Some(d), _) => Ok((LbVariant::Single(LbParams::new(self.n, d, seed)?), self.handle.build(self.n, 1, seed)?)),
            (None, Some(k)) => Ok((LbVariant::Multi(LbParamsK::new(self.n, k, seed)?), self.handle.build(self.n, k, seed)?)),
            (None, None) => unreachable!("clap requires one of the two"),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ingest an "i Δ" stream and answer query / sample lines.
    SketchDemo {
        #[command(flatten)]
        proto: Proto,
        /// Stream file; stdin when absent.
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// One Alice/Bob round on an explicit or random instance.
    UrRun {
        #[command(flatten)]
        proto: Proto,
        /// Comma-separated support of x.
        #[arg(long, value_delimiter = ',')]
        x: Option<Vec<usize>>,
        /// Comma-separated support of y.
        #[arg(long, value_delimiter = ',')]
        y: Option<Vec<usize>>,
        #[command(flatten)]
        common: Common,
    },
    /// Encode a subset to a file.
    LbEncode {
        #[command(flatten)]
        lb: Lb,
        /// Whitespace-separated indices; a seeded random subset when absent.
        #[arg(long)]
        set: Option<PathBuf>,
        /// Encoding file to write.
        #[arg(long)]
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Decode a file written by lb-encode with the same flags.
    LbDecode {
        #[command(flatten)]
        lb: Lb,
        #[arg(long)]
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Experiments.
    #[command(subcommand)]
    Exp(Exp),
}

#[derive(Debug, Subcommand)]
enum Exp {
    /// Protocol failure rate on promise instances, paired across oversampling factors.
    FailureRate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        q: u32,
        #[arg(long, value_delimiter = ',', default_value = "4,8")]
        oversample: Vec<usize>,
        #[arg(long, default_value_t = crate::sparse_recovery::DEFAULT_SLACK)]
        slack: usize,
        #[arg(long, default_value_t = 300)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Serialized message size across dimensions.
    MessageSize {
        #[arg(long, value_delimiter = ',', default_value = "256,1024,4096,16384")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        q: u32,
        #[arg(long, default_value_t = crate::protocol::DEFAULT_OVERSAMPLE)]
        oversample: usize,
        #[arg(long, default_value_t = crate::sparse_recovery::DEFAULT_SLACK)]
        slack: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Chi-square test of ℓ0-sampling with k = 1.
    Uniformity {
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        weight: usize,
        #[arg(long, default_value_t = 3)]
        q: u32,
        #[arg(long, default_value_t = 4)]
        oversample: usize,
        #[arg(long, default_value_t = crate::sparse_recovery::DEFAULT_SLACK)]
        slack: usize,
        #[arg(long, default_value_t = 20_000)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Bits saved by the subset encoder, one row per trial.
    Savings {
        #[arg(long, default_value_t = 4096)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        log2_inv_delta: u64,
        #[arg(long, default_value = "sketch:2")]
        handle: HandleKind,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Hit rate of a correlated guess against the information bound.
    Adaptivity {
        #[arg(long, default_value_t = 4096)]
        n: u64,
        #[arg(long, value_delimiter = ',', default_value = "3")]
        t: Vec<f64>,
        #[arg(long, default_value_t = 1_000_000)]
        trials: u64,
        #[command(flatten)]
        common: Common,
    },
    /// ∏ 1/(1 − 2^{−j/K}) against 2^{5K} for K = 1..kmax.
    Pochhammer {
        #[arg(long, default_value_t = 64)]
        kmax: u32,
        /// Terms per unit of K.
        #[arg(long, default_value_t = 200)]
        terms_per_k: u64,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug)]
enum Failure {
    Constraint(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Format(m) => Failure::Io(format!("malformed input: {m}")),
            other => Failure::Constraint(other.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    fn row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    fn render(&self, config: &str) -> Vec<u8> {
        let mut out = format!("# urk {config}\n").into_bytes();
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.flush().expect("in-memory write");
        drop(w);
        out
    }
}

fn indices(out: &crate::protocol::BobOutput) -> String {
    match out.indices() {
        Some(v) => v.iter().map(usize::to_string).collect::<Vec<_>>().join(" "),
        None => "FAIL".into(),
    }
}

fn s<T: ToString>(v: T) -> String {
    v.to_string()
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return 1;
            }
            let _ = write!(stdout, "{}", e.render());
            return 0;
        }
    };
    let config = format!("{:?}", cli.command);
    let (common, result) = execute(cli.command, stdin);
    let outcome = result.and_then(|table| {
        let bytes = table.render(&config);
        match &common.output {
            Some(p) => std::fs::write(p, bytes).map_err(io_err(p)),
            None => stdout.write_all(&bytes).map_err(|e| Failure::Io(e.to_string())),
        }
    });
    match outcome {
        Ok(()) => 0,
        Err(Failure::Constraint(m)) => {
            let _ = writeln!(stderr, "urk: constraint violated: {m}");
            2
        }
        Err(Failure::Io(m)) => {
            let _ = writeln!(stderr, "urk: {m}");
            3
        }
    }
}

fn execute(cmd: Command, stdin: &mut dyn BufRead) -> (Common, Result<Table, Failure>) {
    match cmd {
        Command::SketchDemo { proto, input, common } => {
            let r = sketch_demo(&proto, input.as_deref(), common.seed, stdin);
            (common, r)
        }
        Command::UrRun { proto, x, y, common } => {
            let r = ur_run(&proto, x, y, common.seed);
            (common, r)
        }
        Command::LbEncode { lb, set, file, common } => {
            let r = lb_encode(&lb, set.as_deref(), &file, common.seed);
            (common, r)
        }
        Command::LbDecode { lb, file, common } => {
            let r = lb_decode(&lb, &file, common.seed);
            (common, r)
        }
        Command::Exp(e) => run_exp(e),
    }
}

fn sketch_demo(proto: &Proto, input: Option<&Path>, seed: u64, stdin: &mut dyn BufRead) -> Result<Table, Failure> {
    let params = proto.params(seed);
    params.validate()?;
    let commands = match input {
        Some(p) => parse_stream(std::io::BufReader::new(std::fs::File::open(p).map_err(io_err(p))?))?,
        None => parse_stream(stdin)?,
    };
    let mut sk = TurnstileSketch::new(params)?;
    let mut t = Table::new(&["command", "updates", "output"]);
    let mut queried = false;
    for c in commands {
        match c {
            StreamCommand::Update(u) => sk.apply(u)?,
            StreamCommand::Query => {
                t.row(vec![s("query"), s(sk.updates()), indices(&sk.support_find_k()?)]);
                queried = true;
            }
            StreamCommand::Sample(sample_seed) => {
                let out = sk.l0_sample_k(sample_seed.unwrap_or(seed))?;
                t.row(vec![s("sample"), s(sk.updates()), indices(&out)]);
                queried = true;
            }
        }
    }
    if !queried {
        t.row(vec![s("query"), s(sk.updates()), indices(&sk.support_find_k()?)]);
    }
    Ok(t)
}

fn ur_run(proto: &Proto, x: Option<Vec<usize>>, y: Option<Vec<usize>>, seed: u64) -> Result<Table, Failure> {
    let params = proto.params(seed);
    params.validate()?;
    let (x, y) = match (x, y) {
        (None, None) => promise_instance(params.n, seed),
        (x, y) => (indicator(params.n, x.unwrap_or_default())?, indicator(params.n, y.unwrap_or_default())?),
    };
    let p = UrProtocol::new(params)?;
    let msg = p.alice(&x)?;
    let out = p.bob(&msg, &y)?;
    let mut t = Table::new(&[
        "n", "k", "q", "oversample", "slack", "seed", "max_level", "rows", "header_bits", "payload_bits",
        "total_bits", "serialized_bytes", "x_weight", "y_weight", "output", "correct",
    ]);
    let weight = |v: &[bool]| v.iter().filter(|&&b| b).count();
    t.row(vec![
        s(params.n), s(params.k), s(params.q), s(params.oversample), s(params.slack), s(seed),
        s(msg.max_level()), s(msg.rows()), s(8 * HEADER_BYTES), s(msg.payload_bits()), s(msg.total_bits()),
        s(msg.serialize().len()), s(weight(&x)), s(weight(&y)), indices(&out),
        s(is_correct(&out, &x, &y, params.k)),
    ]);
    Ok(t)
}

fn read_set(path: &Path) -> Result<Vec<usize>, Failure> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    text.split_whitespace()
        .map(|w| w.parse().map_err(|_| Failure::Io(format!("{}: bad index {w:?}", path.display()))))
        .collect()
}

fn encoding_row(t: &mut Table, out: &EncoderOutput, file_bytes: usize) {
    t.row(vec![
        s(out.n), s(out.m), s(out.rounds()), s(out.successes()), s(out.rest.len()), s(out.message.len()),
        s(encoding_bit_length(out)), s(file_bytes),
    ]);
}

const ENCODING_HEADER: [&str; 8] =
    ["n", "m", "rounds", "successes", "rest_size", "message_bytes", "total_bits", "file_bytes"];

fn lb_encode(lb: &Lb, set: Option<&Path>, file: &Path, seed: u64) -> Result<Table, Failure> {
    let (variant, handle) = lb.resolve(seed)?;
    let m = match &variant {
        LbVariant::Single(p) => p.m(),
        LbVariant::Multi(p) => p.m(),
    };
    let set = match set {
        Some(p) => read_set(p)?,
        None => random_subset(lb.n, m, seed),
    };
    let out = match &variant {
        LbVariant::Single(p) => enc(&set, handle.as_ref(), p)?,
        LbVariant::Multi(p) => enc_k(&set, handle.as_ref(), p)?,
    };
    let bytes = write_encoding(&out)?;
    std::fs::write(file, &bytes).map_err(io_err(file))?;
    let mut t = Table::new(&ENCODING_HEADER);
    encoding_row(&mut t, &out, bytes.len());
    Ok(t)
}

fn lb_decode(lb: &Lb, file: &Path, seed: u64) -> Result<Table, Failure> {
    let (variant, handle) = lb.resolve(seed)?;
    let out = read_encoding(&std::fs::read(file).map_err(io_err(file))?)?;
    let set = match &variant {
        LbVariant::Single(p) => dec(&out, handle.as_ref(), p)?,
        LbVariant::Multi(p) => dec_k(&out, handle.as_ref(), p)?,
    };
    let mut t = Table::new(&["index"]);
    for i in set {
        t.row(vec![s(i)]);
    }
    Ok(t)
}

fn run_exp(e: Exp) -> (Common, Result<Table, Failure>) {
    match e {
        Exp::FailureRate { n, k, q, oversample, slack, trials, common } => {
            let r = (|| {
                let all: Vec<ProtocolParams> = oversample
                    .iter()
                    .map(|&c| ProtocolParams::new(n, k).with_q(q).with_oversample(c).with_slack(slack))
                    .collect();
                for p in &all {
                    p.validate()?;
                }
                let mut t = Table::new(&["n", "k", "q", "oversample", "slack", "trials", "declared_fail", "failures", "rate"]);
                for p in all {
                    let r = failure_rate(&p, trials, common.seed)?;
                    t.row(vec![
                        s(n), s(k), s(q), s(p.oversample), s(slack), s(trials), s(r.declared), s(r.failures),
                        s(r.rate()),
                    ]);
                }
                Ok(t)
            })();
            (common, r)
        }
        Exp::MessageSize { n, k, q, oversample, slack, common } => {
            let r = (|| {
                let mut t = Table::new(&[
                    "n", "k", "q", "oversample", "max_level", "rows", "payload_bits", "serialized_bytes", "normalized",
                ]);
                for n in n {
                    let p = ProtocolParams::new(n, k).with_q(q).with_oversample(oversample).with_slack(slack).with_seed(common.seed);
                    let r = message_size(&p)?;
                    t.row(vec![
                        s(n), s(k), s(q), s(oversample), s(r.max_level), s(r.rows), s(r.payload_bits),
                        s(r.serialized_bytes), s(r.normalized),
                    ]);
                }
                Ok(t)
            })();
            (common, r)
        }
        Exp::Uniformity { n, weight, q, oversample, slack, trials, common } => {
            let r = (|| {
                let p = ProtocolParams::new(n, 1).with_q(q).with_oversample(oversample).with_slack(slack);
                p.validate()?;
                let r = uniformity(&p, weight, trials, common.seed)?;
                let mut t = Table::new(&["index", "count", "expected", "trials", "fails", "chi_square", "p_value"]);
                let expected = (trials - r.fails) as f64 / weight as f64;
                for (i, c) in r.support.iter().zip(&r.counts) {
                    t.row(vec![s(i), s(c), s(expected), s(trials), s(r.fails), s(r.chi_square), s(r.p_value)]);
                }
                Ok(t)
            })();
            (common, r)
        }
        Exp::Savings { n, log2_inv_delta, handle, trials, common } => {
            let r = (|| {
                LbParams::new(n, log2_inv_delta, common.seed)?;
                let make = |seed| handle.build(n, 1, seed);
                let sum = savings_report(&make, n, log2_inv_delta, trials, common.seed)?;
                let mut t = Table::new(&[
                    "trial", "seed", "successes", "rest_size", "total_bits", "savings", "log2_binom",
                    "inequality_holds", "round_trip",
                ]);
                for tr in &sum.trials {
                    t.row(vec![
                        s(tr.trial), s(tr.seed), s(tr.successes), s(tr.rest_size), s(tr.total_bits), s(tr.savings),
                        s(sum.log2_binom), s(tr.inequality_holds), s(tr.round_trip),
                    ]);
                }
                Ok(t)
            })();
            (common, r)
        }
        Exp::Adaptivity { n, t: ts, trials, common } => {
            let r = (|| {
                let mut t = Table::new(&[
                    "n", "t", "trials", "measured_p", "exact_p", "mutual_information", "analytic_rhs", "event_entropy_rhs",
                ]);
                for x in ts {
                    let r = adaptivity_experiment(n, x, trials, common.seed)?;
                    t.row(vec![
                        s(n), s(x), s(trials), s(r.measured_p), s(r.exact_p), s(r.mutual_information),
                        s(r.analytic_rhs), s(r.event_entropy_rhs),
                    ]);
                }
                Ok(t)
            })();
            (common, r)
        }
        Exp::Pochhammer { kmax, terms_per_k, common } => {
            let r = (|| {
                if kmax == 0 {
                    return Err(Failure::Constraint("kmax must be at least 1".into()));
                }
                let mut t = Table::new(&["K", "product", "bound", "pass"]);
                for k in 1..=kmax {
                    let r = pochhammer_check(k, terms_per_k * u64::from(k))?;
                    t.row(vec![s(k), s(r.product), s(r.log2_bound.exp2()), s(r.pass)]);
                }
                Ok(t)
            })();
            (common, r)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str], stdin: &str) -> (i32, String, String) {
        let mut input = std::io::Cursor::new(stdin.as_bytes().to_vec());
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("urk").chain(args.iter().copied()), &mut input, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn pochhammer_rows() {
        let (code, out, _) = call(&["exp", "pochhammer", "--kmax", "3"], "");
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert!(lines[0].starts_with("# urk "));
        assert_eq!(lines[1], "K,product,bound,pass");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("1,3.46274661"));
        assert!(lines[4].ends_with(",32768,true"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(call(&["--bogus"], "").0, 1);
        assert_eq!(call(&["exp", "pochhammer", "--kmax", "x"], "").0, 1);
        assert_eq!(call(&["--help"], "").0, 0);
        assert_eq!(call(&["--version"], "").0, 0);
        let (code, _, err) = call(&["lb-encode", "--n", "2048", "--log2-inv-delta", "32", "--file", "/nonexistent/x"], "");
        assert_eq!(code, 2);
        assert!(err.contains("64 ≤ log 1/δ ≤ n/64"), "{err}");
        let (code, _, err) = call(&["ur-run", "--n", "8", "--k", "5"], "");
        assert_eq!(code, 2);
        assert!(err.contains("k ≤ n/2"), "{err}");
    }

    #[test]
    fn ur_run_reports_bits() {
        let (code, out, _) =
            call(&["ur-run", "--n", "256", "--k", "1", "--q", "3", "--oversample", "4", "--seed", "7"], "");
        assert_eq!(code, 0);
        let row: Vec<&str> = out.lines().nth(2).unwrap().split(',').collect();
        let (levels, rows): (u64, u64) = (row[6].parse::<u64>().unwrap() + 1, row[7].parse().unwrap());
        let per_level = (rows as f64 * 3f64.log2()).ceil() as u64;
        assert_eq!(row[8], "416");
        assert_eq!(row[9].parse::<u64>().unwrap(), levels * per_level);
        assert_eq!(row[15], "true");
    }

    #[test]
    fn sketch_demo_from_stdin() {
        let (code, out, _) = call(
            &["sketch-demo", "--n", "64", "--k", "2", "--oversample", "2"],
            "5\n9 2\n9 -1\n40\nquery\n40 -1\nsample 3\n",
        );
        assert_eq!(code, 0, "{out}");
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines[1], "command,updates,output");
        assert_eq!(lines[2], "query,4,5 9");
        assert_eq!(lines[3], "sample,5,5 9");
        let (code, _, err) = call(&["sketch-demo", "--n", "64", "--oversample", "2"], "oops\n");
        assert_eq!(code, 3, "{err}");
    }

    #[test]
    fn identical_args_identical_bytes() {
        let args = ["exp", "failure-rate", "--n", "32", "--trials", "10", "--seed", "4"];
        let (a, b) = (call(&args, ""), call(&args, ""));
        assert_eq!(a.0, 0);
        assert_eq!(a.1, b.1);
        assert!(a.1.lines().next().unwrap().contains("seed: 4"));
    }

    #[test]
    fn lb_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("enc.bin");
        let f = file.to_str().unwrap();
        let base = ["--n", "4096", "--log2-inv-delta", "64", "--handle", "iid:0.25", "--seed", "11"];
        let mut enc_args = vec!["lb-encode"];
        enc_args.extend(base);
        enc_args.extend(["--file", f]);
        let (code, _, err) = call(&enc_args, "");
        assert_eq!(code, 0, "{err}");
        let mut dec_args = vec!["lb-decode"];
        dec_args.extend(base);
        dec_args.extend(["--file", f]);
        let (code, out, _) = call(&dec_args, "");
        assert_eq!(code, 0);
        let got: Vec<usize> = out.lines().skip(2).map(|l| l.parse().unwrap()).collect();
        assert_eq!(got, random_subset(4096, 512, 11));
    }
}
