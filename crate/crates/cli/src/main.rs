//! `scb`: seed community stores, serve the API, run and lint block programs.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use scb_core::api::{self, ApiService, RequestCounts};
use scb_core::canon;
use scb_core::client::{HttpTransport, InProcess, Session, Transport};
use scb_core::community::{fixture, load_seed, CommunityStore, SeedConfig};
use scb_core::interp::{self, Injection, RunError, RunOptions, DEFAULT_MAX_TICKS};
use scb_core::program::{code_metadata, lint, parse_program, serialize_program, Program, Severity};
use scb_core::samples;

#[derive(Parser)]
#[command(name = "scb", version, about = "Community blocks: seed, serve, run and lint block programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a community store and print its digest.
    Seed {
        /// Seed config (JSON). Defaults to seed 42 with 50 users.
        #[arg(long, conflicts_with = "fixture")]
        config: Option<PathBuf>,
        /// Emit a named hand-written fixture instead of generating.
        #[arg(long, value_parser = ["s0"])]
        fixture: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Serve the community API over plain HTTP until interrupted.
    Serve {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
    },
    /// Run a program and print its transcript.
    Run(RunArgs),
    /// Check a program for community-block misuse.
    Lint { program: PathBuf },
    /// Print a program's code metadata.
    Meta { program: PathBuf },
    /// Write the shipped example programs into a directory.
    Examples {
        dir: PathBuf,
        /// Also write the lint fixtures (these are expected to fail lint).
        #[arg(long)]
        lint_fixtures: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    program: PathBuf,
    #[arg(long)]
    viewer: Option<String>,
    /// Store file served in-process.
    #[arg(long, conflicts_with = "url", required_unless_present = "url")]
    store: Option<PathBuf>,
    /// Base URL of a running server, e.g. http://127.0.0.1:8080.
    #[arg(long)]
    url: Option<String>,
    /// `flag@T` or `key:K@T`; repeatable.
    #[arg(long = "event")]
    events: Vec<Injection>,
    /// Comma-separated answers for `ask`, consumed in order.
    #[arg(long, value_delimiter = ',')]
    answers: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_TICKS)]
    max_ticks: u64,
    #[arg(long, default_value_t = 1)]
    latency_ticks: u64,
    #[arg(long, default_value_t = api::DEFAULT_PAGE_LIMIT)]
    page_size: u64,
    /// Reuse a named query cache across invocations.
    #[arg(long)]
    session: Option<String>,
    #[arg(long, env = "SCB_SESSION_DIR", default_value = ".scb-sessions")]
    session_dir: PathBuf,
    /// Start the named session with an empty cache.
    #[arg(long)]
    fresh: bool,
    /// Print the server's request counters for this run to stderr.
    #[arg(long)]
    request_stats: bool,
}

/// Exit codes are part of the interface.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Exit {
    Ok = 0,
    LintErrors = 1,
    Input = 2,
    Identity = 3,
    Transport = 4,
}

struct Failure {
    exit: Exit,
    error: anyhow::Error,
}

trait OrExit<T> {
    fn or_exit(self, exit: Exit) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrExit<T> for Result<T, E> {
    fn or_exit(self, exit: Exit) -> Result<T, Failure> {
        self.map_err(|e| Failure { exit, error: e.into() })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Seed { config, fixture, out } => seed(config.as_deref(), fixture.as_deref(), &out),
        Command::Serve { store, addr } => serve(&store, &addr),
        Command::Run(args) => run(&args),
        Command::Lint { program } => lint_cmd(&program),
        Command::Meta { program } => meta(&program),
        Command::Examples { dir, lint_fixtures } => examples(&dir, lint_fixtures),
    };
    match result {
        Ok(exit) => ExitCode::from(exit as u8),
        Err(f) => {
            eprintln!("error: {}", describe(&f.error));
            ExitCode::from(f.exit as u8)
        }
    }
}

/// The cause chain joined by `: `, skipping causes already quoted by their parent.
fn describe(error: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in error.chain() {
        let text = cause.to_string();
        if out.contains(&text) {
            continue;
        }
        if !out.is_empty() {
            out.push_str(": ");
        }
        out.push_str(&text);
    }
    out
}

fn read_program(path: &Path) -> Result<Program, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .or_exit(Exit::Input)?;
    parse_program(&text).with_context(|| format!("{} is not a valid program", path.display())).or_exit(Exit::Input)
}

fn load_store(path: &Path) -> Result<CommunityStore, Failure> {
    CommunityStore::load(path).with_context(|| format!("cannot load store {}", path.display())).or_exit(Exit::Input)
}

fn seed(config: Option<&Path>, fixture_name: Option<&str>, out: &Path) -> Result<Exit, Failure> {
    let store = match (fixture_name, config) {
        (Some(_), _) => fixture::s0(),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))
                .or_exit(Exit::Input)?;
            let cfg = SeedConfig::from_json_str(&text).or_exit(Exit::Input)?;
            load_seed(&cfg).or_exit(Exit::Input)?
        }
        (None, None) => load_seed(&SeedConfig::default()).or_exit(Exit::Input)?,
    };
    store.save(out).with_context(|| format!("cannot write {}", out.display())).or_exit(Exit::Input)?;
    println!("{}", store.digest());
    Ok(Exit::Ok)
}

fn serve(store: &Path, addr: &str) -> Result<Exit, Failure> {
    let service = Arc::new(ApiService::new(load_store(store)?));
    api::serve(service, addr, |bound| eprintln!("listening on http://{bound}")).or_exit(Exit::Input)?;
    Ok(Exit::Ok)
}

const REQUEST_KINDS: [&str; 7] = ["list", "user", "project", "code_meta", "stats", "cloud", "other"];

/// `requests total=N list=N user=N …` for the difference `after - before`.
fn format_delta(after: &RequestCounts, before: &RequestCounts) -> String {
    let mut line = format!("requests total={}", after.total - before.total);
    for kind in REQUEST_KINDS {
        line.push_str(&format!(" {kind}={}", after.kind(kind) - before.kind(kind)));
    }
    line
}

/// The in-process service and its store file, when running with `--store`.
type LocalStore<'a> = Option<(Arc<ApiService>, &'a Path)>;

fn run(args: &RunArgs) -> Result<Exit, Failure> {
    let program = read_program(&args.program)?;

    let (transport, label, local): (Arc<dyn Transport>, String, LocalStore) = match (&args.store, &args.url) {
        (Some(path), _) => {
            let service = Arc::new(ApiService::new(load_store(path)?));
            let abs = std::fs::canonicalize(path).unwrap_or_else(|_| path.clone());
            let label = format!("store:{}", abs.display());
            (Arc::new(InProcess::new(service.clone())), label, Some((service, path.as_path())))
        }
        (None, Some(url)) => {
            let t = HttpTransport::new(url);
            let label = t.describe();
            (Arc::new(t), label, None)
        }
        (None, None) => unreachable!("clap requires --store or --url"),
    };

    let mut session = Session::new(transport).with_endpoint_label(label).with_page_limit(args.page_size);
    let session_file = args.session.as_ref().map(|name| args.session_dir.join(format!("{name}.json")));
    if let Some(file) = &session_file {
        if !args.fresh {
            session.restore(file).or_exit(Exit::Input)?;
        }
    }

    let before = if args.request_stats { Some(session.server_requests().or_exit(Exit::Transport)?) } else { None };

    let options = RunOptions {
        viewer: args.viewer.clone(),
        events: args.events.clone(),
        answers: args.answers.clone(),
        max_ticks: args.max_ticks,
        latency_ticks: args.latency_ticks,
    };
    let transcript = match interp::run(&program, &options, &mut session) {
        Ok(t) => t,
        Err(e) => {
            let exit = match e {
                RunError::UnknownViewer(_) => Exit::Identity,
                RunError::Fetch(_) => Exit::Transport,
                RunError::ZeroMaxTicks | RunError::InvalidProgram(_) => Exit::Input,
            };
            return Err(Failure { exit, error: e.into() });
        }
    };
    print!("{}", transcript.render());

    if let Some(before) = before {
        let after = session.server_requests().or_exit(Exit::Transport)?;
        eprintln!("{}", format_delta(&after, &before));
    }
    if let Some(file) = &session_file {
        session.save(file).with_context(|| format!("cannot save session {}", file.display())).or_exit(Exit::Input)?;
    }
    if let Some((service, path)) = local {
        // Cloud writes are the only mutations a run can make.
        if service.read(|s| s.revision()) > 0 {
            service
                .read(|s| s.save(path))
                .with_context(|| format!("cannot write back {}", path.display()))
                .or_exit(Exit::Input)?;
        }
    }
    Ok(Exit::Ok)
}

fn lint_cmd(path: &Path) -> Result<Exit, Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .or_exit(Exit::Input)?;
    let program = match parse_program(&text) {
        Ok(p) => p,
        Err(e) => {
            println!("error {e}");
            return Ok(Exit::Input);
        }
    };
    let diagnostics = lint(&program);
    for d in &diagnostics {
        println!("{d}");
    }
    Ok(if diagnostics.iter().any(|d| d.severity == Severity::Error) { Exit::LintErrors } else { Exit::Ok })
}

fn meta(path: &Path) -> Result<Exit, Failure> {
    let program = read_program(path)?;
    print!("{}", canon::render_pretty(&code_metadata(&program).to_json()));
    Ok(Exit::Ok)
}

fn examples(dir: &Path, lint_fixtures: bool) -> Result<Exit, Failure> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display())).or_exit(Exit::Input)?;
    let mut programs = samples::examples();
    if lint_fixtures {
        programs.extend(samples::lint_fixtures());
    }
    for (name, program) in programs {
        let file = dir.join(format!("{name}.json"));
        std::fs::write(&file, serialize_program(&program))
            .with_context(|| format!("cannot write {}", file.display()))
            .or_exit(Exit::Input)?;
        println!("{}", file.display());
    }
    Ok(Exit::Ok)
}
