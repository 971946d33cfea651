//! `yao`: offline driver for the casting ritual and its artifacts.
//!
//! Exit codes: 0 success, 2 usage or validation error, 3 provider failure,
//! 4 I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use yao_core::corpus::load_corpus;
use yao_core::interpret::{
    interpret, remote_provider_stub, Inquiry, InterpretError, InterpretationProvider, MockProvider, MusicPlan,
    PromptOptions, RemoteConfig,
};
use yao_core::music::{cage_compose, render_ambient, ChanceCharts, EventStream, GenParams};
use yao_core::render::{write_midi, MidiRenderConfig};
use yao_core::Corpus;
use yao_service::{EventLog, ServiceConfig, Session, SessionError, SessionService, SystemClock};

#[derive(Parser)]
#[command(name = "yao", version, about = "I-Ching casting, interpretation and chance music")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ProviderKind {
    Mock,
    Remote,
}

#[derive(clap::Args)]
struct SeedArg {
    /// 64-bit seed; drawn from entropy and reported on stderr when omitted.
    #[arg(long)]
    seed: Option<u64>,
}

impl SeedArg {
    fn resolve(&self) -> u64 {
        self.seed.unwrap_or_else(|| {
            let seed = rand_seed();
            eprintln!("seed: {seed}");
            seed
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Cast a hexagram with six three-coin tosses.
    Cast {
        #[arg(long, short)]
        question: String,
        #[command(flatten)]
        seed: SeedArg,
        /// Print the canonical casting record JSON.
        #[arg(long)]
        json: bool,
    },
    /// Write the six accumulated casting layers as a MIDI file.
    RenderCasting {
        #[command(flatten)]
        seed: SeedArg,
        /// Loop repetitions.
        #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u32).range(1..))]
        cycles: u32,
        /// JSON file overriding generation parameters.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Cast, interpret and print the reading and music plan.
    Interpret {
        #[arg(long, short)]
        question: String,
        #[arg(long)]
        name: Option<String>,
        /// Keep the name out of the provider prompt.
        #[arg(long)]
        redact_name: bool,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, value_enum, default_value_t = ProviderKind::Mock)]
        provider: ProviderKind,
        /// JSON remote-provider config; otherwise read from YAO_REMOTE_* variables.
        #[arg(long)]
        remote_config: Option<PathBuf>,
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        params: Option<PathBuf>,
        /// Write the plan JSON here instead of stdout.
        #[arg(long, short)]
        out: Option<PathBuf>,
        /// Print one JSON object with record, reading and plan.
        #[arg(long)]
        json: bool,
    },
    /// Render a music plan as an ambient MIDI file.
    Ambient {
        #[arg(long)]
        plan: PathBuf,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Compose from 64-entry chance charts.
    Cage {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        events: u32,
        /// Chart JSON; the bundled demo charts when omitted.
        #[arg(long)]
        charts: Option<PathBuf>,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run the HTTP session service.
    Serve {
        #[arg(long, env = "YAO_HOST", default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "YAO_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "YAO_CORPUS")]
        corpus: Option<PathBuf>,
        /// Append-only session log; sessions in it are restored at startup.
        #[arg(long, env = "YAO_LOG")]
        log: Option<PathBuf>,
        #[arg(long, env = "YAO_PROVIDER", value_enum, default_value_t = ProviderKind::Mock)]
        provider: ProviderKind,
        #[arg(long)]
        remote_config: Option<PathBuf>,
        /// Idle seconds before a session is evicted.
        #[arg(long, env = "YAO_TTL_SECS", default_value_t = 3600)]
        ttl_secs: u64,
        #[arg(long)]
        redact_name: bool,
        #[arg(long)]
        params: Option<PathBuf>,
    },
    /// Rebuild a session from the event log and print it as JSON.
    Replay {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        session: String,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Provider(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Provider(_) => 3,
            CliError::Io(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Provider(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<InterpretError> for CliError {
    fn from(e: InterpretError) -> Self {
        match e {
            InterpretError::ProviderUnavailable(_) | InterpretError::MalformedProviderOutput { .. } => {
                CliError::Provider(e.to_string())
            }
            InterpretError::Corpus(yao_core::CorpusError::Io(_)) => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<SessionError> for CliError {
    fn from(e: SessionError) -> Self {
        match e {
            SessionError::ProviderUnavailable(_) | SessionError::MalformedProviderOutput { .. } => {
                CliError::Provider(e.to_string())
            }
            SessionError::Io(_) => CliError::Io(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn rand_seed() -> u64 {
    use std::hash::{BuildHasher, RandomState};
    RandomState::new().hash_one(std::time::SystemTime::now())
}

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display())))
}

fn params(path: Option<&Path>) -> Result<GenParams, CliError> {
    match path {
        Some(p) => GenParams::from_json_str(&read_text(p)?).map_err(|e| CliError::Usage(e.to_string())),
        None => Ok(GenParams::default()),
    }
}

fn corpus(path: Option<&Path>) -> Result<Corpus, CliError> {
    match path {
        Some(p) => load_corpus(p).map_err(|e| match e {
            yao_core::CorpusError::Io(_) => CliError::Io(format!("{}: {e}", p.display())),
            _ => CliError::Usage(format!("{}: {e}", p.display())),
        }),
        None => Ok(Corpus::bundled()),
    }
}

fn provider(kind: ProviderKind, config: Option<&Path>) -> Result<Arc<dyn InterpretationProvider>, CliError> {
    match kind {
        ProviderKind::Mock => Ok(Arc::new(MockProvider)),
        ProviderKind::Remote => {
            let cfg = match config {
                Some(p) => RemoteConfig::from_json_str(&read_text(p)?)?,
                None => RemoteConfig::from_env()?,
            };
            Ok(Arc::new(remote_provider_stub(cfg)?))
        }
    }
}

/// Performs intake and all six tosses exactly as a fresh service session would.
fn cast_session(seed: u64, params: GenParams, inquiry: Inquiry) -> Result<Session, CliError> {
    let mut session = Session::new("cli", seed, params, 0);
    session.submit_inquiry(inquiry, 0)?;
    for _ in 0..6 {
        session.perform_toss(0)?;
    }
    Ok(session)
}

/// Render-only commands never show the question, and it does not feed the RNG.
fn placeholder_inquiry() -> Inquiry {
    Inquiry::new("(offline cast)", None).expect("non-empty")
}

fn midi(stream: &EventStream) -> Result<Vec<u8>, CliError> {
    write_midi(stream, &MidiRenderConfig::default()).map_err(|e| CliError::Usage(e.to_string()))
}

fn describe(session: &Session, corpus: &Corpus) -> String {
    let record = &session.record;
    let mut out = String::new();
    for (i, (toss, line)) in record.tosses().iter().zip(record.lines()).enumerate().rev() {
        let coins: String = toss.coins().iter().map(|c| c.symbol()).collect();
        out.push_str(&format!("line {}: {coins} = {} {:?}\n", i + 1, toss.sum(), line.kind()));
    }
    let name = |n: u8| {
        corpus
            .entry(n)
            .map(|e| format!("{n} {} ({})", e.name_pinyin, e.name_translated))
            .unwrap_or_else(|_| n.to_string())
    };
    let (ben, zhi) = (record.ben_gua().expect("complete"), record.zhi_gua().expect("complete"));
    out.push_str(&format!("ben gua: {}\n", name(ben.king_wen())));
    let changing: Vec<String> = record.dong_yao().iter().map(|i| i.to_string()).collect();
    out.push_str(&format!(
        "dong yao: {}\n",
        if changing.is_empty() {
            "none".into()
        } else {
            changing.join(", ")
        }
    ));
    out.push_str(&format!("zhi gua: {}\n", name(zhi.king_wen())));
    out
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Cast { question, seed, json } => {
            let inquiry = Inquiry::new(question, None)?;
            let session = cast_session(seed.resolve(), GenParams::default(), inquiry)?;
            if json {
                println!("{}", String::from_utf8_lossy(&session.record.to_canonical_json()));
            } else {
                print!("{}", describe(&session, &Corpus::bundled()));
            }
        }
        Command::RenderCasting {
            seed,
            cycles,
            params: p,
            out,
        } => {
            let params = params(p.as_deref())?;
            let session = cast_session(seed.resolve(), params.clone(), placeholder_inquiry())?;
            let stream = yao_core::music::render_casting(&session.layers, cycles, &params)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            write_bytes(&out, &midi(&stream)?)?;
        }
        Command::Interpret {
            question,
            name,
            redact_name,
            seed,
            provider: kind,
            remote_config,
            corpus: corpus_path,
            params: p,
            out,
            json,
        } => {
            let inquiry = Inquiry::new(question, name)?;
            let corpus = corpus(corpus_path.as_deref())?;
            let provider = provider(kind, remote_config.as_deref())?;
            let mut session = cast_session(seed.resolve(), params(p.as_deref())?, inquiry)?;
            let doc = session.prompt_document(
                &corpus,
                PromptOptions {
                    include_name: !redact_name,
                },
            )?;
            let reading = interpret(&doc, provider.as_ref())?;
            session.apply_reading(reading, 0)?;
            let plan = session.plan()?;
            let plan_json = String::from_utf8(plan.to_canonical_json()).expect("JSON is UTF-8");
            if let Some(path) = &out {
                write_bytes(path, plan_json.as_bytes())?;
            }
            let reading = session.reading.as_ref().expect("set by apply_reading");
            if json {
                let doc = serde_json::json!({
                    "record": session.record,
                    "reading": reading,
                    "plan": plan,
                });
                println!("{}", yao_core::canonical::to_string(&doc));
            } else {
                print!("{}", describe(&session, &corpus));
                println!("\n{}\n", reading.body);
                if out.is_none() {
                    println!("{plan_json}");
                }
            }
        }
        Command::Ambient { plan, seed, out } => {
            let plan = MusicPlan::from_json_str(&read_text(&plan)?)?;
            let stream = render_ambient(&plan, seed.resolve()).map_err(|e| CliError::Usage(e.to_string()))?;
            write_bytes(&out, &midi(&stream)?)?;
        }
        Command::Cage {
            events,
            charts,
            seed,
            out,
        } => {
            let charts = match charts {
                Some(p) => ChanceCharts::from_json_str(&read_text(&p)?).map_err(|e| CliError::Usage(e.to_string()))?,
                None => ChanceCharts::demo(),
            };
            let stream = cage_compose(events, &charts, seed.resolve()).map_err(|e| CliError::Usage(e.to_string()))?;
            write_bytes(&out, &midi(&stream)?)?;
        }
        Command::Serve {
            host,
            port,
            corpus: corpus_path,
            log,
            provider: kind,
            remote_config,
            ttl_secs,
            redact_name,
            params: p,
        } => {
            let config = ServiceConfig {
                params: params(p.as_deref())?,
                ttl: Duration::from_secs(ttl_secs),
                include_name: !redact_name,
                ..ServiceConfig::default()
            };
            let log = log.map(EventLog::open).transpose()?;
            let service = Arc::new(SessionService::new(
                config,
                corpus(corpus_path.as_deref())?,
                provider(kind, remote_config.as_deref())?,
                log,
                Arc::new(SystemClock),
            ));
            let restored = service.recover()?;
            let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
            runtime.block_on(async {
                let listener = tokio::net::TcpListener::bind((host.as_str(), port))
                    .await
                    .map_err(|e| CliError::Io(format!("binding {host}:{port}: {e}")))?;
                let addr = listener.local_addr().map_err(|e| CliError::Io(e.to_string()))?;
                eprintln!("listening on http://{addr} ({restored} sessions restored)");
                yao_service::api::serve(listener, service)
                    .await
                    .map_err(|e| CliError::Io(e.to_string()))
            })?;
        }
        Command::Replay {
            log,
            session,
            corpus: corpus_path,
        } => {
            let corpus = corpus(corpus_path.as_deref())?;
            let s = yao_service::replay_session(&log, &session, &corpus)?;
            println!("{}", String::from_utf8_lossy(&s.to_canonical_json()));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
