//! Command-line front end: discover schemes, enumerate and verify classes,
//! and run family censuses.
//!
//! Exit codes follow sysexits where applicable: 0 success, 1 bounded
//! discovery failure or verification mismatch, 2 time budget exceeded,
//! 64 usage error, 65 invalid scheme data, 66 missing input file,
//! 69 resource cap exceeded.

use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};

use flexscheme::class_sets::DEFAULT_NORM_CAP;
use flexscheme::discovery::{
    discover_with_cap, DiscoveryOutcome, FailureReport, Mode, SearchBounds,
};
use flexscheme::oracle::{self, DEFAULT_ORACLE_CAP};
use flexscheme::perm::{family_bases, family_representatives, Basis};
use flexscheme::{BigCount, Error, Scheme};

const EXIT_OK: i32 = 0;
const EXIT_FAILED: i32 = 1;
const EXIT_TIMEOUT: i32 = 2;
const EXIT_USAGE: i32 = 64;
const EXIT_DATA: i32 = 65;
const EXIT_NOINPUT: i32 = 66;
const EXIT_RESOURCE: i32 = 69;

/// Environment variable overriding the default gap-norm cap for brute-force
/// counting (flags still win).
const ENV_NORM_CAP: &str = "FLEXSCHEME_NORM_CAP";
/// Environment variable overriding the default oracle length cap.
const ENV_ORACLE_CAP: &str = "FLEXSCHEME_ORACLE_CAP";

#[derive(Parser)]
#[command(
    name = "flexscheme",
    version,
    about = "Discover flexible enumeration schemes for pattern-avoiding permutation classes and count with them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct BoundsArgs {
    /// Longest downfix to consider.
    #[arg(long, default_value_t = 8)]
    max_depth: usize,
    /// Largest l1 norm of candidate gap conditions.
    #[arg(long = "max-gap", default_value_t = 2)]
    max_gap_norm: usize,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    time_budget: Option<u64>,
}

impl BoundsArgs {
    fn build(&self) -> Result<SearchBounds, Error> {
        let mut bounds = SearchBounds::new(self.max_depth, self.max_gap_norm)?;
        if let Some(secs) = self.time_budget {
            bounds = bounds.with_time_budget(Duration::from_secs(secs));
        }
        Ok(bounds)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Search for a scheme for a basis of forbidden patterns.
    Discover {
        /// Patterns joined by ";" (digits for length <= 9, else commas);
        /// repeat the flag to add more.
        #[arg(long, required = true)]
        basis: Vec<String>,
        /// es = one fixed deletion outside nonviable regions; fs = the
        /// deletion may depend on the gap vector.
        #[arg(long, default_value = "fs")]
        mode: String,
        #[command(flatten)]
        bounds: BoundsArgs,
        /// Also try the symmetries of the basis and keep the first success.
        #[arg(long)]
        try_symmetries: bool,
        /// Brute-force gap-norm cap.
        #[arg(long)]
        cap: Option<usize>,
        /// Where to write the scheme (or failure report); stdout if omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the enumeration sequence of a stored scheme.
    Enumerate {
        #[arg(long)]
        scheme: PathBuf,
        /// Largest n to compute; terms run from n = 0.
        #[arg(short, default_value_t = 9)]
        n: usize,
        /// Emit a JSON document instead of one term per line.
        #[arg(long)]
        json: bool,
    },
    /// Check a stored scheme against the brute-force oracle.
    Verify {
        #[arg(long)]
        scheme: PathBuf,
        #[arg(long, default_value_t = 9)]
        n_max: usize,
        /// Oracle length cap.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Run discovery over a whole pattern family, one line of JSON per
    /// symmetry class.
    Census {
        /// Pattern lengths of the family: "3", "4", "3,3", "4,4", "4,5".
        #[arg(long)]
        family: String,
        #[command(flatten)]
        bounds: BoundsArgs,
        /// Per-class, per-mode time budget in seconds.
        #[arg(long, default_value_t = 60)]
        class_budget: u64,
        /// Try basis symmetries within each class.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        try_symmetries: bool,
        /// Verify each found scheme against the oracle up to this length.
        #[arg(long, default_value_t = 7)]
        oracle_check: usize,
        /// Parallel worker slots.
        #[arg(long, default_value_t = 4)]
        jobs: usize,
        /// Brute-force gap-norm cap.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Brute-force the enumeration sequence of a basis directly.
    Oracle {
        #[arg(long, required = true)]
        basis: Vec<String>,
        #[arg(short, default_value_t = 8)]
        n: usize,
        /// Use the all-permutations filter instead of tree extension.
        #[arg(long)]
        naive: bool,
        /// Oracle length cap.
        #[arg(long)]
        cap: Option<usize>,
    },
    /// Print the symmetry class of a basis and its canonical representative.
    Symmetries {
        #[arg(long, required = true)]
        basis: Vec<String>,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    EXIT_OK
                }
                _ => EXIT_USAGE,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };
    std::process::exit(run(cli));
}

fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Discover {
            basis,
            mode,
            bounds,
            try_symmetries,
            cap,
            output,
        } => cmd_discover(
            &basis,
            &mode,
            &bounds,
            try_symmetries,
            cap,
            output.as_deref(),
        ),
        Command::Enumerate { scheme, n, json } => cmd_enumerate(&scheme, n, json),
        Command::Verify { scheme, n_max, cap } => cmd_verify(&scheme, n_max, cap),
        Command::Census {
            family,
            bounds,
            class_budget,
            try_symmetries,
            oracle_check,
            jobs,
            cap,
        } => cmd_census(
            &family,
            &bounds,
            class_budget,
            try_symmetries,
            oracle_check,
            jobs,
            cap,
        ),
        Command::Oracle {
            basis,
            n,
            naive,
            cap,
        } => cmd_oracle(&basis, n, naive, cap),
        Command::Symmetries { basis } => cmd_symmetries(&basis),
    }
}

fn parse_basis(texts: &[String]) -> Result<Basis, Error> {
    Basis::from_str(&texts.join(";"))
}

fn norm_cap(flag: Option<usize>) -> usize {
    flag.or_else(|| env_usize(ENV_NORM_CAP))
        .unwrap_or(DEFAULT_NORM_CAP)
}

fn oracle_cap(flag: Option<usize>) -> usize {
    flag.or_else(|| env_usize(ENV_ORACLE_CAP))
        .unwrap_or(DEFAULT_ORACLE_CAP)
}

fn env_usize(name: &str) -> Option<usize> {
    std::env::var(name).ok()?.trim().parse().ok()
}

fn error_exit(err: &Error) -> i32 {
    match err {
        Error::InvalidInput(_) => EXIT_USAGE,
        Error::ResourceLimit(_) => EXIT_RESOURCE,
        Error::SchemeIntegrity(_) | Error::Format(_) | Error::Json(_) => EXIT_DATA,
        Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => EXIT_NOINPUT,
        Error::Io(_) => EXIT_DATA,
    }
}

fn fail(err: &Error) -> i32 {
    eprintln!("error: {err}");
    error_exit(err)
}

fn emit(output: Option<&std::path::Path>, text: &str) -> Result<(), Error> {
    match output {
        Some(path) => Ok(std::fs::write(path, text)?),
        None => {
            print!("{text}");
            Ok(std::io::stdout().flush()?)
        }
    }
}

// Keys come out sorted (serde_json maps are ordered), so reports are stable.
fn failure_json(report: &FailureReport, outcome: &str) -> String {
    let doc = serde_json::json!({
        "outcome": outcome,
        "basis": report.basis.to_string(),
        "mode": report.mode.to_string(),
        "max_depth": report.max_depth,
        "max_gap_norm": report.max_gap_norm,
        "frontier": report.frontier.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
        "wall_time_secs": report.elapsed.as_secs_f64(),
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("report serializes");
    text.push('\n');
    text
}

fn cmd_discover(
    basis_texts: &[String],
    mode_text: &str,
    bounds_args: &BoundsArgs,
    try_symmetries: bool,
    cap: Option<usize>,
    output: Option<&std::path::Path>,
) -> i32 {
    let basis = match parse_basis(basis_texts) {
        Ok(b) => b,
        Err(e) => return fail(&e),
    };
    let mode = match Mode::from_str(mode_text) {
        Ok(m) => m,
        Err(e) => return fail(&e),
    };
    let bounds = match bounds_args.build() {
        Ok(b) => b,
        Err(e) => return fail(&e),
    };
    let outcome = match discover_with_cap(&basis, &bounds, mode, try_symmetries, norm_cap(cap)) {
        Ok(o) => o,
        Err(e) => return fail(&e),
    };
    match outcome {
        DiscoveryOutcome::Found(scheme) => {
            eprintln!(
                "found a scheme for {} with depth {} and {} rules",
                scheme.basis(),
                scheme.depth(),
                scheme.rule_count()
            );
            match emit(output, &scheme.to_json()) {
                Ok(()) => EXIT_OK,
                Err(e) => fail(&e),
            }
        }
        DiscoveryOutcome::Irreducible(report) => {
            eprintln!(
                "no scheme within depth {} / gap norm {}; {} unresolved downfixes",
                report.max_depth,
                report.max_gap_norm,
                report.frontier.len()
            );
            match emit(output, &failure_json(&report, "irreducible")) {
                Ok(()) => EXIT_FAILED,
                Err(e) => fail(&e),
            }
        }
        DiscoveryOutcome::TimedOut(report) => {
            eprintln!("time budget exhausted after {:.1?}", report.elapsed);
            match emit(output, &failure_json(&report, "timeout")) {
                Ok(()) => EXIT_TIMEOUT,
                Err(e) => fail(&e),
            }
        }
    }
}

fn load_scheme(path: &std::path::Path) -> Result<Scheme, Error> {
    let scheme = Scheme::load(path)?;
    let violations = scheme.validate();
    if let Some(first) = violations.first() {
        return Err(Error::SchemeIntegrity(format!(
            "{first} ({} violations total)",
            violations.len()
        )));
    }
    Ok(scheme)
}

fn cmd_enumerate(path: &std::path::Path, n: usize, json: bool) -> i32 {
    let scheme = match load_scheme(path) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let seq = match scheme.enumerate::<BigCount>(n) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    if json {
        let doc = serde_json::json!({
            "basis": scheme.basis().to_string(),
            "terms": seq.terms().iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        });
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).expect("sequence serializes")
        );
    } else {
        for term in seq.terms() {
            println!("{term}");
        }
    }
    EXIT_OK
}

fn cmd_verify(path: &std::path::Path, n_max: usize, cap: Option<usize>) -> i32 {
    let scheme = match load_scheme(path) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    let want =
        match oracle::brute_sequence_capped::<BigCount>(scheme.basis(), n_max, oracle_cap(cap)) {
            Ok(s) => s,
            Err(e) => return fail(&e),
        };
    let got = match scheme.enumerate::<BigCount>(n_max) {
        Ok(s) => s,
        Err(e) => return fail(&e),
    };
    for n in 0..=n_max {
        if got.term(n) != want.term(n) {
            println!(
                "MISMATCH at n={n}: scheme={} oracle={}",
                got.term(n).expect("term computed"),
                want.term(n).expect("term computed")
            );
            return EXIT_FAILED;
        }
    }
    println!("OK 0..{n_max}");
    EXIT_OK
}

fn parse_family(text: &str) -> Result<Vec<usize>, Error> {
    let lengths: Vec<usize> = text
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("bad family length {part:?}")))
        })
        .collect::<Result<_, _>>()?;
    if lengths.is_empty() || lengths.len() > 2 || lengths.iter().any(|&l| l == 0 || l > 6) {
        return Err(Error::InvalidInput(
            "family must be one or two pattern lengths between 1 and 6".into(),
        ));
    }
    Ok(lengths)
}

struct ClassResult {
    status: &'static str,
    depth: Option<usize>,
    rules: Option<usize>,
    secs: f64,
    oracle_ok: Option<bool>,
}

fn run_class(
    rep: &Basis,
    mode: Mode,
    bounds: &SearchBounds,
    try_symmetries: bool,
    oracle_check: usize,
    cap: usize,
) -> Result<ClassResult, Error> {
    let start = Instant::now();
    let outcome = discover_with_cap(rep, bounds, mode, try_symmetries, cap)?;
    let secs = start.elapsed().as_secs_f64();
    Ok(match outcome {
        DiscoveryOutcome::Found(scheme) => {
            let oracle_ok = if oracle_check > 0 {
                let want = oracle::brute_sequence::<BigCount>(rep, oracle_check)?;
                let got = scheme.enumerate::<BigCount>(oracle_check)?;
                Some(want.terms() == got.terms())
            } else {
                None
            };
            ClassResult {
                status: "found",
                depth: Some(scheme.depth()),
                rules: Some(scheme.rule_count()),
                secs,
                oracle_ok,
            }
        }
        DiscoveryOutcome::Irreducible(_) => ClassResult {
            status: "irreducible",
            depth: None,
            rules: None,
            secs,
            oracle_ok: None,
        },
        DiscoveryOutcome::TimedOut(_) => ClassResult {
            status: "timeout",
            depth: None,
            rules: None,
            secs,
            oracle_ok: None,
        },
    })
}

fn class_json(r: &ClassResult) -> serde_json::Value {
    serde_json::json!({
        "status": r.status,
        "depth": r.depth,
        "rules": r.rules,
        "secs": (r.secs * 1000.0).round() / 1000.0,
        "oracle_ok": r.oracle_ok,
    })
}

fn cmd_census(
    family: &str,
    bounds_args: &BoundsArgs,
    class_budget: u64,
    try_symmetries: bool,
    oracle_check: usize,
    jobs: usize,
    cap: Option<usize>,
) -> i32 {
    let lengths = match parse_family(family) {
        Ok(l) => l,
        Err(e) => return fail(&e),
    };
    let reps = match family_representatives(&lengths) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    let total_bases = match family_bases(&lengths) {
        Ok(b) => b.len(),
        Err(e) => return fail(&e),
    };
    let base_bounds = match bounds_args.build() {
        Ok(b) => b,
        Err(e) => return fail(&e),
    };
    let bounds = if base_bounds.time_budget.is_some() {
        base_bounds
    } else {
        base_bounds.with_time_budget(Duration::from_secs(class_budget))
    };
    let cap = norm_cap(cap);
    eprintln!(
        "family [{family}]: {total_bases} bases in {} symmetry classes",
        reps.len()
    );

    let next = AtomicUsize::new(0);
    let stdout = Mutex::new(std::io::stdout());
    let tally: Mutex<(usize, usize, usize)> = Mutex::new((0, 0, 0)); // es, fs, errors
    let jobs = jobs.max(1);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                if idx >= reps.len() {
                    break;
                }
                let rep = &reps[idx];
                let es = run_class(rep, Mode::Es, &bounds, try_symmetries, oracle_check, cap);
                let fs = run_class(rep, Mode::Fs, &bounds, try_symmetries, oracle_check, cap);
                let mut line = serde_json::Map::new();
                line.insert("class".into(), serde_json::json!(idx + 1));
                line.insert("representative".into(), serde_json::json!(rep.to_string()));
                {
                    let mut tally = tally.lock().expect("tally lock");
                    match &es {
                        Ok(r) => {
                            if r.status == "found" {
                                tally.0 += 1;
                            }
                            line.insert("es".into(), class_json(r));
                        }
                        Err(e) => {
                            tally.2 += 1;
                            line.insert("es".into(), serde_json::json!({"error": e.to_string()}));
                        }
                    }
                    match &fs {
                        Ok(r) => {
                            if r.status == "found" {
                                tally.1 += 1;
                            }
                            line.insert("fs".into(), class_json(r));
                        }
                        Err(e) => {
                            tally.2 += 1;
                            line.insert("fs".into(), serde_json::json!({"error": e.to_string()}));
                        }
                    }
                }
                let text = serde_json::Value::Object(line).to_string();
                let mut out = stdout.lock().expect("stdout lock");
                writeln!(out, "{text}").expect("write census line");
                out.flush().expect("flush census line");
            });
        }
    });
    let (es, fs, errors) = *tally.lock().expect("tally lock");
    eprintln!(
        "census done: {} classes, es schemes {es}, fs schemes {fs}, errors {errors}",
        reps.len()
    );
    if errors > 0 {
        EXIT_DATA
    } else {
        EXIT_OK
    }
}

fn cmd_oracle(basis_texts: &[String], n: usize, naive: bool, cap: Option<usize>) -> i32 {
    let basis = match parse_basis(basis_texts) {
        Ok(b) => b,
        Err(e) => return fail(&e),
    };
    let seq = if naive {
        oracle::naive_sequence_capped::<BigCount>(&basis, n, oracle_cap(cap))
    } else {
        oracle::brute_sequence_capped::<BigCount>(&basis, n, oracle_cap(cap))
    };
    match seq {
        Ok(seq) => {
            for term in seq.terms() {
                println!("{term}");
            }
            EXIT_OK
        }
        Err(e) => fail(&e),
    }
}

fn cmd_symmetries(basis_texts: &[String]) -> i32 {
    let basis = match parse_basis(basis_texts) {
        Ok(b) => b,
        Err(e) => return fail(&e),
    };
    let class = basis.symmetry_class();
    let doc = serde_json::json!({
        "basis": basis.to_string(),
        "representative": class[0].to_string(),
        "members": class.iter().map(|b| b.to_string()).collect::<Vec<_>>(),
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).expect("symmetries serialize")
    );
    EXIT_OK
}
