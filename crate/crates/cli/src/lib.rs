//! Argument handling and output formatting for the `cyrus` command. Every
//! command goes through the tutor service API; without `--server` a
//! private instance is started on loopback.

mod grade;
mod output;
mod repl;

use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cyrus_api::CreateSession;
use cyrus_client::{Client, ClientError};
use cyrus_core::engine::Semantics;
use cyrus_core::matcher::MatchConfig;
use cyrus_service::{discover, Tutor, TutorConfig};
use serde::Deserialize;
use tokio::net::TcpListener;

pub use grade::{read_submissions, GradeRow, Submission};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "cyrus",
    version,
    about = "Translate English to SQL, run it, and grade SQL answers"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Database name under the data root, or a database directory.
    #[arg(long, global = true, default_value = "music")]
    pub db: String,
    /// Directory holding one subdirectory per database.
    #[arg(long, global = true, env = "CYRUS_DATA_DIR", default_value = "data")]
    pub data_dir: PathBuf,
    /// Synonym groups replacing the database's own vocabulary.
    #[arg(long, global = true)]
    pub vocab: Option<PathBuf>,
    /// JSON file with `delta` and/or `tau`; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Relative margin for keeping competing tables, in [0, 1).
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    /// Similarity floor, in (0, 1].
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Compare views as sets instead of bags when grading.
    #[arg(long, global = true)]
    pub set_semantics: bool,
    /// Use a running service instead of starting one.
    #[arg(long, global = true)]
    pub server: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Translate one English query, show its SQL and run it.
    Translate {
        text: String,
        /// Show terms, candidate tables and their scores.
        #[arg(long)]
        explain: bool,
    },
    /// Interactive loop: English by default, SQL after a leading ':'.
    Repl,
    /// Grade a batch of SQL submissions against an assignment pack.
    Grade {
        assignments: PathBuf,
        submissions: PathBuf,
    },
    /// Print the effective tuning parameters and databases.
    Config,
    /// Serve the HTTP API until interrupted.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Append-only session log.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Graded attempts per assignment.
        #[arg(long, default_value_t = 1)]
        attempts: u32,
    },
}

/// Exit statuses.
pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_TRANSLATION: u8 = 2;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: message.into(),
        }
    }
}

impl From<ClientError> for Failure {
    fn from(e: ClientError) -> Self {
        let code = if e.code() == Some("TranslationFailed") {
            EXIT_TRANSLATION
        } else {
            EXIT_CONFIG
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::config(e.to_string())
    }
}

impl Global {
    fn matching(&self) -> Result<MatchConfig, Failure> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Tuning {
            delta: Option<f64>,
            tau: Option<f64>,
        }
        let mut d = MatchConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            let t: Tuning = serde_json::from_str(&text)
                .map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            d.delta = t.delta.unwrap_or(d.delta);
            d.tau = t.tau.unwrap_or(d.tau);
        }
        let m = MatchConfig {
            delta: self.delta.unwrap_or(d.delta),
            tau: self.tau.unwrap_or(d.tau),
        };
        m.validate().map_err(|e| Failure::config(e.to_string()))?;
        Ok(m)
    }

    /// Database directories to load and the id of the one to use.
    fn databases(&self) -> Result<(Vec<PathBuf>, String), Failure> {
        let as_path = Path::new(&self.db);
        if as_path.join("schema.json").is_file() {
            let id = as_path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| self.db.clone());
            return Ok((vec![as_path.to_path_buf()], id));
        }
        if !self.data_dir.is_dir() {
            return Err(Failure::config(format!(
                "data directory {} does not exist (set --data-dir or CYRUS_DATA_DIR)",
                self.data_dir.display()
            )));
        }
        let dirs = discover(&self.data_dir).map_err(|e| Failure::config(e.to_string()))?;
        if !dirs
            .iter()
            .any(|d| d.file_name().is_some_and(|n| n == self.db.as_str()))
        {
            return Err(Failure::config(format!(
                "no database '{}' under {}",
                self.db,
                self.data_dir.display()
            )));
        }
        Ok((dirs, self.db.clone()))
    }

    pub fn tutor_config(&self) -> Result<(TutorConfig, String), Failure> {
        let (databases, id) = self.databases()?;
        if let Some(v) = &self.vocab {
            if !v.is_file() {
                return Err(Failure::config(format!(
                    "vocabulary file {} does not exist",
                    v.display()
                )));
            }
        }
        Ok((
            TutorConfig {
                databases,
                vocabulary: self.vocab.clone(),
                matching: self.matching()?,
                semantics: if self.set_semantics {
                    Semantics::Set
                } else {
                    Semantics::Bag
                },
                ..TutorConfig::default()
            },
            id,
        ))
    }

    fn tutor_session(&self, database: &str) -> Result<CreateSession, Failure> {
        let mut req = CreateSession::tutor(database);
        if self.server.is_some() {
            let m = self.matching()?;
            req.delta = Some(m.delta);
            req.tau = Some(m.tau);
        }
        Ok(req)
    }
}

/// A service to talk to: remote, or started here for the duration of the
/// command.
pub struct Backend {
    pub client: Client,
    pub database: String,
    _server: Option<tokio::task::JoinHandle<()>>,
}

pub async fn start_local(
    config: TutorConfig,
) -> Result<(Client, tokio::task::JoinHandle<()>), Failure> {
    let tutor = Tutor::open(config).map_err(|e| Failure::config(e.to_string()))?;
    let listener = TcpListener::bind(("127.0.0.1", 0)).await?;
    let addr: SocketAddr = listener.local_addr()?;
    let handle = tokio::spawn(async move {
        let _ = cyrus_service::serve(listener, Arc::new(tutor), std::future::pending()).await;
    });
    Ok((Client::new(format!("http://{addr}")), handle))
}

impl Backend {
    pub async fn connect(global: &Global) -> Result<Self, Failure> {
        if let Some(url) = &global.server {
            return Ok(Self {
                client: Client::new(url.clone()),
                database: global.db.clone(),
                _server: None,
            });
        }
        let (config, database) = global.tutor_config()?;
        let (client, handle) = start_local(config).await?;
        Ok(Self {
            client,
            database,
            _server: Some(handle),
        })
    }
}

pub async fn cmd_translate(
    global: &Global,
    text: &str,
    explain: bool,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let backend = Backend::connect(global).await?;
    let session = backend
        .client
        .start_session(&global.tutor_session(&backend.database)?)
        .await?;
    let resp = backend.client.translate(&session.id, text).await?;
    match global.format {
        Format::Json => {
            let v = serde_json::to_string_pretty(&resp).unwrap_or_default();
            writeln!(out, "{v}")?;
        }
        f => {
            writeln!(out, "{}", resp.sql)?;
            writeln!(out)?;
            write!(out, "{}", output::table(&resp.result, f))?;
            if explain {
                writeln!(out)?;
                write!(out, "{}", output::explain(&resp.diagnostics))?;
            }
        }
    }
    Ok(())
}

pub async fn cmd_repl(
    global: &Global,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let backend = Backend::connect(global).await?;
    let session = backend
        .client
        .start_session(&global.tutor_session(&backend.database)?)
        .await?;
    repl::run(&backend.client, &session.id, global.format, input, out).await
}

pub async fn cmd_grade(
    global: &Global,
    assignments: &Path,
    submissions: &Path,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let pack = grade::read_assignments(assignments)?;
    let subs = grade::read_submissions(submissions)?;
    grade::check_references(&pack, &subs)?;
    let backend = Backend::connect(global).await?;
    let rows = grade::grade(&backend.client, &backend.database, &pack, &subs).await?;
    write!(out, "{}", grade::report(&rows, global.format))?;
    Ok(())
}

pub fn cmd_config(global: &Global, out: &mut dyn Write) -> Result<(), Failure> {
    let m = global.matching()?;
    let databases: Vec<String> = match global.tutor_config() {
        Ok((c, _)) => c
            .databases
            .iter()
            .map(|d| d.display().to_string())
            .collect(),
        Err(_) => Vec::new(),
    };
    let semantics = if global.set_semantics { "set" } else { "bag" };
    if global.format == Format::Json {
        let doc = serde_json::json!({
            "delta": m.delta,
            "tau": m.tau,
            "semantics": semantics,
            "data_dir": global.data_dir,
            "databases": databases,
        });
        writeln!(
            out,
            "{}",
            serde_json::to_string_pretty(&doc).unwrap_or_default()
        )?;
        return Ok(());
    }
    let d = MatchConfig::default();
    writeln!(out, "delta      {} (default {})", m.delta, d.delta)?;
    writeln!(out, "tau        {} (default {})", m.tau, d.tau)?;
    writeln!(out, "semantics  {semantics}")?;
    writeln!(out, "data dir   {}", global.data_dir.display())?;
    for db in &databases {
        writeln!(out, "database   {db}")?;
    }
    Ok(())
}

pub async fn cmd_serve(
    global: &Global,
    host: &str,
    port: u16,
    log: Option<PathBuf>,
    attempts: u32,
) -> Result<(), Failure> {
    let (mut config, _) = global.tutor_config()?;
    config.log = log;
    config.attempts = attempts.max(1);
    let tutor = Tutor::open(config).map_err(|e| Failure::config(e.to_string()))?;
    let listener = TcpListener::bind((host, port))
        .await
        .map_err(|e| Failure::config(format!("cannot listen on {host}:{port}: {e}")))?;
    let addr = listener.local_addr()?;
    eprintln!("serving on http://{addr}");
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
        eprintln!("shutting down");
    };
    cyrus_service::serve(listener, Arc::new(tutor), shutdown).await?;
    Ok(())
}

/// Parses `args`, runs the command and returns the exit status. Output
/// goes to `out`; error messages to stderr.
pub fn run<I, T>(args: I, input: &mut dyn BufRead, out: &mut dyn Write) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK });
        }
    };
    let runtime = match tokio::runtime::Runtime::new() {
        Ok(r) => r,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let result = runtime.block_on(async {
        match &cli.command {
            Command::Translate { text, explain } => {
                cmd_translate(&cli.global, text, *explain, out).await
            }
            Command::Repl => cmd_repl(&cli.global, input, out).await,
            Command::Config => cmd_config(&cli.global, out),
            Command::Grade {
                assignments,
                submissions,
            } => cmd_grade(&cli.global, assignments, submissions, out).await,
            Command::Serve {
                port,
                host,
                log,
                attempts,
            } => {
                let filter =
                    tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| {
                        tracing_subscriber::EnvFilter::new("info,tower_http=debug")
                    });
                let _ = tracing_subscriber::fmt()
                    .with_env_filter(filter)
                    .with_writer(std::io::stderr)
                    .try_init();
                cmd_serve(&cli.global, host, *port, log.clone(), *attempts).await
            }
        }
    });
    let _ = out.flush();
    match result {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
