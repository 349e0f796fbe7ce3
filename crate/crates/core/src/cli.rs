//! Command-line interface. Exit codes: 0 success or SAT, 1 UNSAT, timeout
//! or violations, 2 usage or input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::analyzer::analyze;
use crate::config::{default_config, serialize_config_file, validate, ConfigFile, Configuration};
use crate::finder::{Backend, BacktrackingBackend, FinderProblem, SearchOutcome, Strategy};
use crate::model::Model;
use crate::parse::{parse_config_file, parse_model, parse_state_commands};
use crate::state::{export_dot, export_json, state_to_json, SystemState};
use crate::tasks::{check_consistency, check_independence, run_all_independence, Outcome, TaskOptions, TaskReport};

#[derive(Parser, Debug)]
#[command(name = "umlval", version, about = "Bounded validation of UML class models with OCL invariants")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and typecheck a model and report analysis warnings.
    Check {
        model: PathBuf,
        /// Configuration file for the bitwidth check; defaults to the
        /// `.properties` file next to the model.
        #[arg(long)]
        properties: Option<PathBuf>,
        #[arg(long = "config")]
        config_name: Option<String>,
        /// Print the warnings as JSON on standard output.
        #[arg(long)]
        json: bool,
    },
    /// Search for a valid system state.
    Validate(ValidateArgs),
    /// Run consistency or independence checks.
    Tasks(TasksArgs),
    /// Manage the named configurations in a configuration file.
    Config {
        #[command(subcommand)]
        action: ConfigAction,
        /// Print the resulting names as JSON.
        #[arg(long, global = true)]
        json: bool,
    },
    /// Start the HTTP service.
    Serve {
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Directory with the built web UI, served under `/`.
        #[arg(long = "static")]
        static_dir: Option<PathBuf>,
        /// Sessions are written here on shutdown.
        #[arg(long)]
        snapshot: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Problem {
    model: PathBuf,
    properties: PathBuf,
    /// Name of the configuration; optional when the file holds exactly one.
    #[arg(long = "config")]
    config_name: Option<String>,
    /// Search budget in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    /// Shuffle the search order with this seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    problem: Problem,
    /// Partial state (`!create`/`!set`/`!insert` commands) to extend.
    #[arg(long)]
    state: Option<PathBuf>,
    /// Overrides the configured bitwidth.
    #[arg(long)]
    bitwidth: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Dot)]
    out: Format,
    /// Where to write the state; with `--limit`, files get a `-<n>` suffix.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Enumerate up to this many states.
    #[arg(long)]
    limit: Option<usize>,
}

#[derive(Args, Debug)]
struct TasksArgs {
    #[command(flatten)]
    problem: Problem,
    /// `consistency`, `independence` (all invariants) or `independence:<Class::inv>`.
    #[arg(long, default_value = "consistency")]
    task: String,
    /// Write witnesses as JSON files into this directory.
    #[arg(long)]
    witness_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Subcommand, Debug)]
enum ConfigAction {
    List {
        file: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    Clone {
        file: PathBuf,
        name: String,
        new_name: Option<String>,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    Rename {
        file: PathBuf,
        name: String,
        new_name: String,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    Delete {
        file: PathBuf,
        name: String,
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

/// A failure that ends the command with the given exit code.
struct Exit(i32, String);

type CmdResult = Result<i32, Exit>;

fn input_error(msg: impl Into<String>) -> Exit {
    Exit(2, msg.into())
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

// Broken pipes on the console are not worth failing over.
macro_rules! say {
    ($w:expr, $($arg:tt)*) => {{
        let _ = writeln!($w, $($arg)*);
    }};
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    2
                }
            };
        }
    };
    let mut io = Io { out, err };
    let result = match cli.command {
        Command::Check {
            model,
            properties,
            config_name,
            json,
        } => cmd_check(&mut io, &model, properties.as_deref(), config_name.as_deref(), json),
        Command::Validate(args) => cmd_validate(&mut io, &args),
        Command::Tasks(args) => cmd_tasks(&mut io, &args),
        Command::Config { action, json } => cmd_config(&mut io, action, json),
        Command::Serve {
            host,
            port,
            static_dir,
            snapshot,
        } => cmd_serve(&mut io, host, port, static_dir, snapshot),
    };
    match result {
        Ok(code) => code,
        Err(Exit(code, msg)) => {
            say!(io.err, "error: {msg}");
            code
        }
    }
}

fn read(path: &Path) -> Result<String, Exit> {
    fs::read_to_string(path).map_err(|e| input_error(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> Result<(), Exit> {
    fs::write(path, text).map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))
}

fn load_model(io: &mut Io<'_>, path: &Path) -> Result<Model, Exit> {
    let text = read(path)?;
    parse_model(&text, &path.display().to_string()).map_err(|diags| {
        for d in &diags {
            say!(io.err, "{d}");
        }
        input_error(format!("{} could not be loaded", path.display()))
    })
}

fn load_config_file(io: &mut Io<'_>, path: &Path, model: &Model) -> Result<ConfigFile, Exit> {
    let text = read(path)?;
    parse_config_file(&text, &path.display().to_string(), model).map_err(|errors| {
        for e in &errors {
            match &e.config {
                Some(c) => say!(io.err, "{e} (in [{c}])"),
                None => say!(io.err, "{e}"),
            }
        }
        input_error(format!("{} could not be loaded", path.display()))
    })
}

fn select<'f>(file: &'f ConfigFile, name: Option<&str>) -> Result<(&'f str, &'f Configuration), Exit> {
    let names = file.names();
    let chosen = match name {
        Some(n) => n,
        None if names.len() == 1 => names[0],
        None => {
            return Err(input_error(format!(
                "the file holds {} configurations; choose one with --config: {}",
                names.len(),
                names.join(", ")
            )))
        }
    };
    match file.configs.get_key_value(chosen) {
        Some((k, c)) => Ok((k.as_str(), c)),
        None => Err(input_error(format!(
            "no configuration named `{chosen}`; available: {}",
            names.join(", ")
        ))),
    }
}

fn cmd_check(
    io: &mut Io<'_>,
    model_path: &Path,
    properties: Option<&Path>,
    name: Option<&str>,
    json: bool,
) -> CmdResult {
    let model = load_model(io, model_path)?;
    let sibling = model_path.with_extension("properties");
    let props = properties.map(Path::to_path_buf).or_else(|| sibling.exists().then_some(sibling));
    let configs: Vec<Configuration> = match props {
        Some(p) => {
            let file = load_config_file(io, &p, &model)?;
            match name {
                Some(_) => vec![select(&file, name)?.1.clone()],
                None => file.configs.values().cloned().collect(),
            }
        }
        None => vec![default_config(&model)],
    };
    let mut seen = Vec::new();
    let mut warnings = Vec::new();
    for w in analyze(&model, None)
        .into_iter()
        .chain(configs.iter().flat_map(|c| crate::analyzer::warn_bitwidth(&model, c)))
    {
        let text = w.to_string();
        if !seen.contains(&text) {
            if !json {
                say!(io.err, "{text}");
            }
            seen.push(text);
            warnings.push(w);
        }
    }
    if json {
        let j = json!({ "model": model.name, "warnings": warnings });
        say!(io.out, "{}", serde_json::to_string_pretty(&j).expect("json"));
    }
    Ok(0)
}

fn options(p: &Problem) -> Result<TaskOptions, Exit> {
    let deadline = match p.timeout {
        Some(t) if !(t >= 0.0 && t.is_finite()) => return Err(input_error("--timeout must be a non-negative number")),
        Some(t) => Some(Duration::from_secs_f64(t)),
        None => None,
    };
    Ok(TaskOptions {
        deadline,
        cancel: None,
        strategy: p.seed.map_or(Strategy::Minimal, |seed| Strategy::Random { seed }),
    })
}

fn export(state: &SystemState, format: Format) -> String {
    match format {
        Format::Dot => export_dot(state),
        Format::Json => export_json(state),
    }
}

fn numbered(path: &Path, k: usize) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{k}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{k}"),
    };
    path.with_file_name(name)
}

fn cmd_validate(io: &mut Io<'_>, args: &ValidateArgs) -> CmdResult {
    let p = &args.problem;
    let model = load_model(io, &p.model)?;
    let file = load_config_file(io, &p.properties, &model)?;
    let (_, config) = select(&file, p.config_name.as_deref())?;
    let mut config = config.clone();
    if let Some(k) = args.bitwidth {
        config.bitwidth = k;
        let errors = validate(&config, &model);
        if !errors.is_empty() {
            return Err(input_error(errors.iter().map(|e| e.message.clone()).collect::<Vec<_>>().join("; ")));
        }
    }
    let base = match &args.state {
        Some(path) => {
            let text = read(path)?;
            Some(parse_state_commands(&text, &path.display().to_string(), &model).map_err(|e| input_error(e.to_string()))?)
        }
        None => None,
    };
    for w in analyze(&model, Some(&config)) {
        say!(io.err, "{w}");
    }
    let opts = options(p)?;
    let mut problem = FinderProblem::new(&model, &config).with_strategy(opts.strategy);
    problem.deadline = opts.deadline;
    if let Some(b) = &base {
        problem = problem.with_base(b);
    }
    let limit = args.limit.unwrap_or(1).max(1);
    let SearchOutcome {
        states,
        timed_out,
        stats,
        log,
    } = BacktrackingBackend
        .run(&problem, limit)
        .map_err(|e| input_error(e.to_string()))?;
    for line in &log {
        say!(io.err, "note: {line}");
    }
    let verdict = if !states.is_empty() {
        "SAT"
    } else if timed_out {
        "TIMEOUT"
    } else {
        "UNSAT"
    };
    let code = if states.is_empty() { 1 } else { 0 };
    let mut written = Vec::new();
    if let Some(out) = &args.output {
        for (i, s) in states.iter().enumerate() {
            let path = if args.limit.is_some() { numbered(out, i + 1) } else { out.clone() };
            write_file(&path, &export(s, args.out))?;
            written.push(path.display().to_string());
        }
    }
    if p.json {
        let j = json!({
            "verdict": verdict,
            "stats": stats,
            "log": log,
            "states": states.iter().map(state_to_json).collect::<Vec<_>>(),
            "files": written,
        });
        say!(io.out, "{}", serde_json::to_string_pretty(&j).expect("json"));
        return Ok(code);
    }
    let count = if args.limit.is_some() {
        format!(", states: {}", states.len())
    } else {
        String::new()
    };
    say!(
        io.out,
        "{verdict} (decisions: {}, propagations: {}, elapsed: {} ms{count})",
        stats.decisions,
        stats.propagations,
        stats.elapsed.as_millis()
    );
    if args.output.is_none() {
        for s in &states {
            let _ = write!(io.out, "{}", export(s, args.out));
        }
    }
    for f in &written {
        say!(io.out, "wrote {f}");
    }
    Ok(code)
}

fn witness_name(report: &TaskReport) -> String {
    match &report.task {
        crate::tasks::Task::Consistency => "consistency.json".to_string(),
        crate::tasks::Task::Independence(name) => format!("independence-{}.json", name.replace("::", "-")),
    }
}

fn cmd_tasks(io: &mut Io<'_>, args: &TasksArgs) -> CmdResult {
    let p = &args.problem;
    let model = load_model(io, &p.model)?;
    let file = load_config_file(io, &p.properties, &model)?;
    let (_, config) = select(&file, p.config_name.as_deref())?;
    let opts = options(p)?;
    let to_exit = |e: crate::tasks::TaskError| input_error(e.to_string());
    let reports = match args.task.split_once(':') {
        None if args.task == "consistency" => vec![check_consistency(&model, config, &opts).map_err(to_exit)?],
        None if args.task == "independence" => run_all_independence(&model, config, &opts).map_err(to_exit)?,
        Some(("independence", inv)) => vec![check_independence(&model, config, inv, &opts).map_err(to_exit)?],
        _ => {
            return Err(input_error(format!(
                "unknown task `{}`; expected consistency, independence or independence:<Class::inv>",
                args.task
            )))
        }
    };
    let mut paths = Vec::new();
    for r in &reports {
        let path = match (&args.witness_dir, &r.witness) {
            (Some(dir), Some(w)) => {
                fs::create_dir_all(dir).map_err(|e| input_error(format!("cannot create {}: {e}", dir.display())))?;
                let path = dir.join(witness_name(r));
                write_file(&path, &export_json(w))?;
                Some(path.display().to_string())
            }
            _ => None,
        };
        paths.push(path);
    }
    if p.json {
        let items: Vec<_> = reports
            .iter()
            .zip(&paths)
            .map(|(r, path)| {
                let mut j = r.to_json();
                if let Some(path) = path {
                    j["witness_path"] = json!(path);
                }
                j
            })
            .collect();
        let j = if items.len() == 1 && args.task != "independence" {
            items.into_iter().next().expect("one")
        } else {
            json!(items)
        };
        say!(io.out, "{}", serde_json::to_string_pretty(&j).expect("json"));
    } else {
        for (r, path) in reports.iter().zip(&paths) {
            say!(io.out, "{r}");
            match (path, &r.witness) {
                (Some(path), _) => say!(io.out, "  witness: {path}"),
                (None, Some(w)) => say!(io.out, "  witness: {} objects, {} links", w.objects.len(), w.links.len()),
                _ => {}
            }
        }
    }
    let all_hold = reports.iter().all(|r| r.outcome == Outcome::Holds);
    Ok(if all_hold { 0 } else { 1 })
}

fn sibling_model(file: &Path, model: Option<PathBuf>) -> Result<PathBuf, Exit> {
    match model {
        Some(m) => Ok(m),
        None => {
            let m = file.with_extension("use");
            if m.exists() {
                Ok(m)
            } else {
                Err(input_error(format!(
                    "no model given and {} does not exist; pass --model",
                    m.display()
                )))
            }
        }
    }
}

fn cmd_config(io: &mut Io<'_>, action: ConfigAction, json: bool) -> CmdResult {
    let (file, model) = match &action {
        ConfigAction::List { file, model }
        | ConfigAction::Clone { file, model, .. }
        | ConfigAction::Rename { file, model, .. }
        | ConfigAction::Delete { file, model, .. } => (file.clone(), model.clone()),
    };
    let model_path = sibling_model(&file, model)?;
    let m = load_model(io, &model_path)?;
    let cf = load_config_file(io, &file, &m)?;
    let err = |e: crate::config::ConfigFileError| input_error(e.to_string());
    let updated = match &action {
        ConfigAction::List { .. } => cf,
        ConfigAction::Clone { name, new_name, .. } => cf.clone_config(name, new_name.as_deref()).map_err(err)?,
        ConfigAction::Rename { name, new_name, .. } => cf.rename_config(name, new_name).map_err(err)?,
        ConfigAction::Delete { name, .. } => cf.delete_config(name).map_err(err)?,
    };
    if !matches!(action, ConfigAction::List { .. }) {
        write_file(&file, &serialize_config_file(&updated))?;
    }
    if json {
        say!(io.out, "{}", json!({ "configs": updated.names() }));
    } else {
        for n in updated.names() {
            say!(io.out, "{n}");
        }
    }
    Ok(0)
}

fn cmd_serve(
    io: &mut Io<'_>,
    host: String,
    port: u16,
    static_dir: Option<PathBuf>,
    snapshot: Option<PathBuf>,
) -> CmdResult {
    let runtime = tokio::runtime::Runtime::new().map_err(|e| input_error(e.to_string()))?;
    let opts = crate::server::ServeOptions {
        host,
        port,
        static_dir,
        snapshot,
    };
    say!(io.err, "listening on http://{}:{}", opts.host, opts.port);
    runtime
        .block_on(crate::server::serve(opts))
        .map_err(|e| input_error(e.to_string()))?;
    Ok(0)
}
