//! Batch operator commands over a file store. Each command performs one
//! pipeline stage and ends its stdout with a single-line JSON summary.
//!
//! Exit codes: 0 success, 1 user or validation error (including lifecycle
//! conflicts and a store locked by another writer), 2 internal error
//! (I/O, corrupt store, LLM or embedding transport failures).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::NaiveDate;
use citilink_api::{ApiConfig, AppState};
use citilink_core::eval::{evaluate, load_dir, EmbeddingProvider, EvalError, NgramProvider, RemoteProvider};
use citilink_core::extraction::{
    ExtractionError, Extractor, ExtractorKind, HttpTransport, LlmClient, LlmClientConfig, RuleExtractor,
};
use citilink_core::service::{RegistryFile, Service, ServiceError};
use citilink_core::store::{FileStore, StoreError};
use citilink_core::MinuteStatus;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(
    name = "citilink",
    version,
    about = "Council minutes pipeline: ingest, extract, curate, publish, serve, evaluate"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct StoreArg {
    /// Store directory (created when missing)
    #[arg(long, value_name = "DIR")]
    pub store: PathBuf,
}

#[derive(Debug, Args)]
pub struct LlmArgs {
    #[arg(long, env = "CITILINK_LLM_ENDPOINT")]
    pub llm_endpoint: Option<String>,
    #[arg(long, env = "CITILINK_LLM_MODEL", default_value = "default")]
    pub llm_model: String,
    /// Name of the environment variable that holds the LLM API key
    #[arg(long, default_value = "CITILINK_LLM_API_KEY")]
    pub llm_key_env: String,
    #[arg(long, default_value_t = 60)]
    pub llm_timeout_secs: u64,
    #[arg(long, default_value_t = 2)]
    pub llm_max_retries: u32,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExtractorArg {
    Rule,
    Llm,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ProviderArg {
    Ngram,
    Remote,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load municipalities, participants and topics from a registry JSON file
    Registry {
        #[command(subcommand)]
        action: RegistryAction,
    },
    /// Upload minute text files for one municipality
    Ingest {
        #[command(flatten)]
        store: StoreArg,
        #[arg(long, value_name = "SLUG")]
        municipality: String,
        #[arg(required = true, value_name = "FILE")]
        files: Vec<PathBuf>,
    },
    /// Run an extractor over uploaded minutes
    Extract {
        #[command(flatten)]
        store: StoreArg,
        #[arg(long, value_enum, default_value = "rule")]
        extractor: ExtractorArg,
        #[arg(
            long,
            value_name = "ID",
            conflicts_with = "all_pending",
            required_unless_present = "all_pending"
        )]
        minute: Option<String>,
        /// Every minute still in status `uploaded`
        #[arg(long)]
        all_pending: bool,
        #[command(flatten)]
        llm: LlmArgs,
    },
    /// Resolve and commit an extraction draft
    Validate {
        #[command(flatten)]
        store: StoreArg,
        #[arg(long, value_name = "ID")]
        minute: String,
        /// Accept participants that matched nobody in the registry
        #[arg(long)]
        ack_unresolved: bool,
    },
    /// Make a validated minute public and rebuild the search index
    Publish {
        #[command(flatten)]
        store: StoreArg,
        #[arg(long, value_name = "ID")]
        minute: String,
    },
    /// Search index maintenance
    Index {
        #[command(subcommand)]
        action: IndexAction,
    },
    /// Serve the HTTP API until interrupted
    Serve {
        #[command(flatten)]
        store: StoreArg,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "CITILINK_SITE_PASSWORD")]
        site_password: Option<String>,
        #[arg(long, env = "CITILINK_ADMIN_TOKEN")]
        admin_token: String,
        #[arg(long, default_value_t = 10)]
        page_size: usize,
        /// Allowed browser origin; repeat for several
        #[arg(long = "cors-origin")]
        cors_origins: Vec<String>,
        #[command(flatten)]
        llm: LlmArgs,
    },
    /// Score predicted extractions against gold annotations
    Eval {
        #[arg(long, value_name = "DIR")]
        gold: PathBuf,
        #[arg(long, value_name = "DIR")]
        pred: PathBuf,
        #[arg(long, value_enum, default_value = "ngram")]
        provider: ProviderArg,
        /// Write the full JSON report here
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, env = "CITILINK_EMBED_ENDPOINT")]
        embed_endpoint: Option<String>,
        #[arg(long, env = "CITILINK_EMBED_MODEL", default_value = "default")]
        embed_model: String,
        #[arg(long, default_value = "CITILINK_EMBED_API_KEY")]
        embed_key_env: String,
        #[arg(long, default_value_t = 60)]
        embed_timeout_secs: u64,
    },
    /// Newsletter subscriptions and digests
    Newsletter {
        #[command(subcommand)]
        action: NewsletterAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum RegistryAction {
    Import {
        #[command(flatten)]
        store: StoreArg,
        #[arg(long, value_name = "FILE")]
        file: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum IndexAction {
    Rebuild {
        #[command(flatten)]
        store: StoreArg,
    },
}

#[derive(Debug, Subcommand)]
pub enum NewsletterAction {
    /// Plain-text digest of minutes published since a date
    Digest {
        #[command(flatten)]
        store: StoreArg,
        #[arg(long, value_name = "YYYY-MM-DD")]
        since: NaiveDate,
        /// Write the digest text here instead of stdout
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    Subscribe {
        #[command(flatten)]
        store: StoreArg,
        #[arg(long)]
        email: String,
        /// Municipality id to follow; omit to follow all
        #[arg(long = "municipality")]
        municipalities: Vec<String>,
    },
}

/// A failed command: exit code plus message.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
    pub detail: Value,
}

impl Failure {
    fn user(kind: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            kind,
            message: message.into(),
            detail: Value::Null,
        }
    }

    fn internal(kind: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            kind,
            message: message.into(),
            detail: Value::Null,
        }
    }
}

impl From<ServiceError> for Failure {
    fn from(e: ServiceError) -> Self {
        let message = e.to_string();
        match e {
            ServiceError::NotFound(_) => Failure::user("not_found", message),
            ServiceError::Conflict { status, .. } => Failure {
                detail: json!({ "status": status }),
                ..Failure::user("conflict", message)
            },
            ServiceError::Invalid(issues) => Failure {
                detail: serde_json::to_value(issues).unwrap_or_default(),
                ..Failure::user("invalid", message)
            },
            ServiceError::BadQuery(_) => Failure::user("bad_query", message),
            ServiceError::Extraction(ExtractionError::Parse(_) | ExtractionError::Config(_)) => {
                Failure::user("extraction", message)
            }
            ServiceError::Extraction(_) => Failure::internal("extraction", message),
            ServiceError::Store(StoreError::Locked) => Failure::user("locked", message),
            ServiceError::Store(_) => Failure::internal("store", message),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Input { .. } => Failure::user("eval_input", e.to_string()),
            EvalError::Provider(_) => Failure::internal("provider", e.to_string()),
        }
    }
}

type Outcome = Result<Value, Failure>;

fn open_store(arg: &StoreArg) -> Result<FileStore, Failure> {
    FileStore::open(&arg.store).map_err(|e| match e {
        StoreError::Io { .. } => Failure::user("store", format!("cannot use store directory: {e}")),
        other => Failure::internal("store", other.to_string()),
    })
}

/// Opens the store and takes the writer lock for the life of the service.
fn writer(arg: &StoreArg) -> Result<Service, Failure> {
    let store = open_store(arg)?;
    store.hold_writer_lock().map_err(ServiceError::from)?;
    Ok(Service::open(Arc::new(store))?)
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::user("input", format!("{}: {e}", path.display())))
}

fn llm_extractor(args: &LlmArgs) -> Result<Arc<dyn Extractor>, Failure> {
    let Some(endpoint_url) = args.llm_endpoint.clone() else {
        return Err(Failure::user(
            "config",
            "--llm-endpoint (or CITILINK_LLM_ENDPOINT) is required for the llm extractor",
        ));
    };
    let config = LlmClientConfig {
        endpoint_url,
        api_key_env_var_name: args.llm_key_env.clone(),
        model_id: args.llm_model.clone(),
        timeout_secs: args.llm_timeout_secs,
        max_retries: args.llm_max_retries,
    };
    config.check().map_err(|m| Failure::user("config", m))?;
    let transport = HttpTransport::from_config(&config).map_err(|e| Failure::user("config", e.to_string()))?;
    Ok(Arc::new(LlmClient::new(config, Box::new(transport))))
}

fn registry_import(store: &StoreArg, file: &Path) -> Outcome {
    let registry: RegistryFile = serde_json::from_str(&read_file(file)?)
        .map_err(|e| Failure::user("input", format!("{}: {e}", file.display())))?;
    let (m, p, t) = writer(store)?.import_registry(registry)?;
    Ok(json!({ "municipalities": m, "participants": p, "topics": t }))
}

fn ingest(store: &StoreArg, municipality: &str, files: &[PathBuf]) -> Outcome {
    let texts = files
        .iter()
        .map(|f| Ok((f, read_file(f)?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    let svc = writer(store)?;
    let mut minutes = Vec::new();
    for (path, text) in texts {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let m = svc.ingest(municipality, &name, &text)?;
        minutes.push(json!({ "id": m.id, "status": m.status, "source_filename": m.source_filename }));
    }
    Ok(json!({ "municipality": municipality, "minutes": minutes }))
}

fn extract(store: &StoreArg, kind: ExtractorArg, minute: Option<&str>, llm: &LlmArgs) -> Outcome {
    let extractor: Arc<dyn Extractor> = match kind {
        ExtractorArg::Rule => Arc::new(RuleExtractor),
        ExtractorArg::Llm => llm_extractor(llm)?,
    };
    let svc = writer(store)?;
    let ids: Vec<String> = match minute {
        Some(id) => vec![id.to_string()],
        None => svc
            .admin_minutes()
            .into_iter()
            .rev()
            .filter(|m| m.status == MinuteStatus::Uploaded)
            .map(|m| m.id)
            .collect(),
    };
    let mut done = Vec::new();
    let mut failed = Vec::new();
    let mut worst: Option<Failure> = None;
    for id in &ids {
        match svc.run_extraction(id, extractor.as_ref()) {
            Ok(view) => {
                let issues = view.draft.as_ref().map_or(0, |d| d.issues.len());
                let unresolved = view.draft.as_ref().map_or(0, |d| d.unresolved.len());
                done.push(json!({ "id": id, "status": view.status, "issues": issues, "unresolved": unresolved }));
            }
            Err(e) => {
                let f = Failure::from(e);
                failed.push(json!({ "id": id, "error": f.message }));
                if worst.as_ref().is_none_or(|w| f.code > w.code) {
                    worst = Some(f);
                }
            }
        }
    }
    let summary = json!({ "extractor": ExtractorKind::from(kind), "extracted": done, "failed": failed });
    match worst {
        // with a single minute the error itself is the outcome
        Some(f) if minute.is_some() => Err(f),
        Some(f) => Err(Failure { detail: summary, ..f }),
        None => Ok(summary),
    }
}

impl From<ExtractorArg> for ExtractorKind {
    fn from(a: ExtractorArg) -> Self {
        match a {
            ExtractorArg::Rule => ExtractorKind::Rule,
            ExtractorArg::Llm => ExtractorKind::Llm,
        }
    }
}

fn serve(store: &StoreArg, host: &str, port: u16, config: ApiConfig, out: &mut dyn Write) -> Outcome {
    config.check().map_err(|m| Failure::user("config", m))?;
    let svc = Arc::new(writer(store)?);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::internal("runtime", e.to_string()))?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| Failure::user("bind", format!("{host}:{port}: {e}")))?;
        let addr = listener
            .local_addr()
            .map_err(|e| Failure::internal("bind", e.to_string()))?;
        let _ = writeln!(
            out,
            "{}",
            json!({ "ok": true, "command": "serve", "listening": addr.to_string() })
        );
        let _ = out.flush();
        let shutdown = async {
            let _ = tokio::signal::ctrl_c().await;
        };
        citilink_api::serve(listener, AppState::new(svc, config), shutdown)
            .await
            .map_err(|e| Failure::internal("serve", e.to_string()))?;
        Ok(json!({ "stopped": addr.to_string() }))
    })
}

#[allow(clippy::too_many_arguments)]
fn eval(
    gold: &Path,
    pred: &Path,
    provider: ProviderArg,
    out_file: Option<&Path>,
    endpoint: Option<&str>,
    model: &str,
    key_env: &str,
    timeout_secs: u64,
    out: &mut dyn Write,
) -> Outcome {
    let provider: Box<dyn EmbeddingProvider> = match provider {
        ProviderArg::Ngram => Box::new(NgramProvider),
        ProviderArg::Remote => {
            let Some(endpoint) = endpoint else {
                return Err(Failure::user(
                    "config",
                    "--embed-endpoint (or CITILINK_EMBED_ENDPOINT) is required for the remote provider",
                ));
            };
            Box::new(RemoteProvider {
                endpoint_url: endpoint.to_string(),
                model_id: model.to_string(),
                api_key_env_var_name: key_env.to_string(),
                timeout_secs,
            })
        }
    };
    let report = evaluate(&load_dir(gold)?, &load_dir(pred)?, provider.as_ref())?;
    let _ = write!(out, "{}", report.table());
    if let Some(path) = out_file {
        let body = serde_json::to_vec_pretty(&report).map_err(|e| Failure::internal("report", e.to_string()))?;
        std::fs::write(path, body).map_err(|e| Failure::user("output", format!("{}: {e}", path.display())))?;
    }
    Ok(json!({
        "provider": report.header.provider,
        "documents": report.corpus.documents,
        "matched_subjects": report.corpus.matched_subjects,
        "metadata_macro_f1": report.metadata_f1.macro_f1,
        "voting_macro_f1": report.voting.macro_f1,
        "rouge_l_f1": report.subjects.rouge_l.f1,
        "bleu": report.subjects.bleu,
        "report": out_file.map(|p| p.display().to_string()),
    }))
}

fn digest(store: &StoreArg, since: NaiveDate, out_file: Option<&Path>, out: &mut dyn Write) -> Outcome {
    let svc = Service::open(Arc::new(open_store(store)?))?;
    let d = svc.digest(since);
    match out_file {
        Some(path) => {
            std::fs::write(path, &d.text).map_err(|e| Failure::user("output", format!("{}: {e}", path.display())))?
        }
        None => {
            let _ = write!(out, "{}", d.text);
        }
    }
    Ok(json!({
        "since": since,
        "sections": d.sections,
        "minutes": d.sections.iter().map(|s| s.minute_ids.len()).sum::<usize>(),
        "out": out_file.map(|p| p.display().to_string()),
    }))
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> (&'static str, Outcome) {
    match cli.command {
        Command::Registry {
            action: RegistryAction::Import { store, file },
        } => ("registry import", registry_import(&store, &file)),
        Command::Ingest {
            store,
            municipality,
            files,
        } => ("ingest", ingest(&store, &municipality, &files)),
        Command::Extract {
            store,
            extractor,
            minute,
            all_pending: _,
            llm,
        } => ("extract", extract(&store, extractor, minute.as_deref(), &llm)),
        Command::Validate {
            store,
            minute,
            ack_unresolved,
        } => (
            "validate",
            writer(&store).and_then(|svc| {
                let m = svc.validate(&minute, ack_unresolved)?;
                Ok(json!({ "id": m.id, "status": m.status, "subjects": m.subject_ids.len() }))
            }),
        ),
        Command::Publish { store, minute } => (
            "publish",
            writer(&store).and_then(|svc| {
                let m = svc.publish(&minute)?;
                Ok(json!({ "id": m.id, "status": m.status, "indexed_units": svc.snapshot().unit_count() }))
            }),
        ),
        Command::Index {
            action: IndexAction::Rebuild { store },
        } => (
            "index rebuild",
            writer(&store).and_then(|svc| Ok(json!({ "units": svc.rebuild_index()? }))),
        ),
        Command::Serve {
            store,
            port,
            host,
            site_password,
            admin_token,
            page_size,
            cors_origins,
            llm,
        } => {
            let outcome = (|| {
                let mut config = ApiConfig::new(admin_token);
                config.site_access_password = site_password;
                config.page_size_default = page_size;
                config.cors_origins = cors_origins;
                if llm.llm_endpoint.is_some() {
                    config.llm = Some(llm_extractor(&llm)?);
                }
                serve(&store, &host, port, config, out)
            })();
            ("serve", outcome)
        }
        Command::Eval {
            gold,
            pred,
            provider,
            out: out_file,
            embed_endpoint,
            embed_model,
            embed_key_env,
            embed_timeout_secs,
        } => (
            "eval",
            eval(
                &gold,
                &pred,
                provider,
                out_file.as_deref(),
                embed_endpoint.as_deref(),
                &embed_model,
                &embed_key_env,
                embed_timeout_secs,
                out,
            ),
        ),
        Command::Newsletter {
            action:
                NewsletterAction::Digest {
                    store,
                    since,
                    out: out_file,
                },
        } => ("newsletter digest", digest(&store, since, out_file.as_deref(), out)),
        Command::Newsletter {
            action:
                NewsletterAction::Subscribe {
                    store,
                    email,
                    municipalities,
                },
        } => (
            "newsletter subscribe",
            writer(&store).and_then(|svc| {
                let outcome = svc.subscribe(&email, municipalities)?;
                Ok(json!({ "email": email.trim(), "outcome": outcome }))
            }),
        ),
    }
}

/// Parses `args` (program name first), runs the command and writes its
/// output, summary line last, to `out`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = write!(err, "{e}");
            let _ = writeln!(
                out,
                "{}",
                json!({ "ok": false, "error": "usage", "message": e.kind().to_string() })
            );
            return 1;
        }
    };
    let (command, outcome) = dispatch(cli, out);
    match outcome {
        Ok(mut summary) => {
            if let Value::Object(map) = &mut summary {
                map.insert("ok".into(), Value::Bool(true));
                map.insert("command".into(), Value::String(command.into()));
            }
            let _ = writeln!(out, "{summary}");
            0
        }
        Err(f) => {
            let _ = writeln!(err, "citilink {command}: {}", f.message);
            let mut line = json!({ "ok": false, "command": command, "error": f.kind, "message": f.message });
            if !f.detail.is_null() {
                line["detail"] = f.detail;
            }
            let _ = writeln!(out, "{line}");
            f.code
        }
    }
}
