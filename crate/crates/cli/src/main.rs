use std::net::{IpAddr, SocketAddr};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use cls_core::replay::{read_replay, validate_replay};
use cls_core::sim::ObservationMode;
use cls_match::{apply_param_overrides, run_match, BuiltinPlaymaker, MatchConfig, MatchError, MatchHooks, Recorder};
use cls_proxy::{start_team, PlaymakerEndpoint, TeamConfig};
use cls_server::{Server, TickMode};

const EXIT_FAILURE: u8 = 1;
const EXIT_LAUNCH: u8 = 2;
const EXIT_ERROR_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "cls", version, about = "Soccer simulation server, proxy agents and match runner")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a full match in one process and print the result as JSON.
    RunMatch(RunMatch),
    /// Run only the simulation server.
    RunServer(RunServer),
    /// Connect one team of proxy agents to a running server.
    RunTeam(RunTeam),
    /// Check a replay file and print its summary.
    ValidateReplay { path: PathBuf },
    /// Serve the built-in playmaker over gRPC.
    ServePlaymaker(ServePlaymaker),
    /// Print the protobuf schema of the playmaker service.
    PrintProto,
}

#[derive(Clone, Copy, ValueEnum)]
enum ObsMode {
    See,
    FullState,
}

impl From<ObsMode> for ObservationMode {
    fn from(m: ObsMode) -> Self {
        match m {
            ObsMode::See => ObservationMode::See,
            ObsMode::FullState => ObservationMode::FullState,
        }
    }
}

/// Settings shared by everything that runs a simulation.
#[derive(Args)]
struct SimArgs {
    /// TOML match configuration; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Close ticks as soon as every agent is done instead of on the wall clock.
    #[arg(long)]
    accelerated: bool,
    #[arg(long)]
    replay: Option<PathBuf>,
    #[arg(long, value_enum)]
    observation_mode: Option<ObsMode>,
    /// Simulation parameter override, e.g. `--param half_cycles=300`. Repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
}

impl SimArgs {
    fn load(&self) -> anyhow::Result<MatchConfig> {
        let mut cfg = match &self.config {
            Some(p) => MatchConfig::load(p)?,
            None => MatchConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        cfg.accelerated |= self.accelerated;
        if self.replay.is_some() {
            cfg.replay = self.replay.clone();
        }
        if let Some(m) = self.observation_mode {
            cfg.observation_mode = m.into();
        }
        cfg.params = apply_param_overrides(&cfg.params, &self.params)?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunMatch {
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long)]
    left_name: Option<String>,
    /// `builtin` or a gRPC endpoint.
    #[arg(long)]
    left_playmaker: Option<String>,
    #[arg(long)]
    right_name: Option<String>,
    #[arg(long)]
    right_playmaker: Option<String>,
    #[arg(long)]
    deadline_ms: Option<u64>,
    #[arg(long)]
    log_dir: Option<PathBuf>,
    /// Record a sample of built-in playmaker decisions to this file.
    #[arg(long)]
    record_states: Option<PathBuf>,
    #[arg(long)]
    record_stride: Option<u32>,
    #[arg(long)]
    record_limit: Option<usize>,
    /// Protocol errors tolerated before the run counts as failed.
    #[arg(long)]
    error_budget: Option<u32>,
    /// Also write the result JSON here.
    #[arg(long)]
    result: Option<PathBuf>,
}

#[derive(Args)]
struct RunServer {
    #[command(flatten)]
    sim: SimArgs,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    /// Player port; the trainer and coach ports follow it.
    #[arg(long, default_value_t = 6000)]
    port: u16,
    /// Hold the clock until this many agents have connected.
    #[arg(long, default_value_t = 0)]
    wait_for: usize,
}

#[derive(Args)]
struct RunTeam {
    /// Server player port address.
    #[arg(long, default_value = "127.0.0.1:6000")]
    server: SocketAddr,
    #[arg(long)]
    name: String,
    #[arg(long, default_value = cls_match::BUILTIN)]
    playmaker: String,
    #[arg(long, default_value_t = 11)]
    players: u8,
    /// Also connect a coach, on the port after the trainer port.
    #[arg(long)]
    coach: bool,
    #[arg(long, default_value_t = cls_rpc::DEFAULT_DEADLINE_MS)]
    deadline_ms: u64,
    #[arg(long)]
    log_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ServePlaymaker {
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    #[arg(long, default_value_t = cls_rpc::DEFAULT_PORT)]
    port: u16,
    /// Record a sample of decisions, written on shutdown.
    #[arg(long)]
    record_states: Option<PathBuf>,
    #[arg(long, default_value_t = 24)]
    record_stride: u32,
    #[arg(long, default_value_t = 500)]
    record_limit: usize,
}

fn print_json(value: &impl serde::Serialize) -> anyhow::Result<String> {
    let text = serde_json::to_string_pretty(value)?;
    println!("{text}");
    Ok(text)
}

async fn run_match_cmd(a: RunMatch) -> anyhow::Result<u8> {
    let mut cfg = match a.sim.load() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Ok(EXIT_LAUNCH);
        }
    };
    if let Some(n) = a.left_name {
        cfg.left.name = n;
    }
    if let Some(p) = a.left_playmaker {
        cfg.left.playmaker = p;
    }
    if let Some(n) = a.right_name {
        cfg.right.name = n;
    }
    if let Some(p) = a.right_playmaker {
        cfg.right.playmaker = p;
    }
    if let Some(d) = a.deadline_ms {
        cfg.deadline_ms = d;
    }
    if a.log_dir.is_some() {
        cfg.log_dir = a.log_dir;
    }
    if a.record_states.is_some() {
        cfg.record.path = a.record_states;
    }
    if let Some(s) = a.record_stride {
        cfg.record.stride = s;
    }
    if let Some(l) = a.record_limit {
        cfg.record.limit = l;
    }
    if let Some(b) = a.error_budget {
        cfg.protocol_error_budget = b;
    }

    let result = match run_match(&cfg, MatchHooks::default()).await {
        Ok(r) => r,
        Err(e @ (MatchError::Config(_) | MatchError::Launch { .. })) => {
            eprintln!("error: {e}");
            return Ok(EXIT_LAUNCH);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(EXIT_FAILURE);
        }
    };
    let text = print_json(&result)?;
    if let Some(p) = a.result {
        std::fs::write(&p, text).with_context(|| format!("writing {}", p.display()))?;
    }
    if !result.within_error_budget(cfg.protocol_error_budget) {
        eprintln!("{} protocol errors exceed the budget of {}", result.protocol_errors, cfg.protocol_error_budget);
        return Ok(EXIT_ERROR_BUDGET);
    }
    let failures: Vec<_> = result.left.failures.iter().chain(&result.right.failures).collect();
    if !failures.is_empty() {
        eprintln!("agents failed: {failures:?}");
        return Ok(EXIT_FAILURE);
    }
    Ok(0)
}

async fn run_server_cmd(a: RunServer) -> anyhow::Result<u8> {
    let cfg = match a.sim.load() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e:#}");
            return Ok(EXIT_LAUNCH);
        }
    };
    let mut server_cfg = cls_match::server_config(&cfg);
    server_cfg.host = a.host;
    server_cfg.player_port = a.port;
    server_cfg.trainer_port = a.port.wrapping_add(1);
    server_cfg.coach_port = a.port.wrapping_add(2);
    server_cfg.wait_for_agents = a.wait_for;
    server_cfg.tick = if cfg.accelerated { TickMode::Accelerated } else { TickMode::Realtime };
    let server = match Server::bind(server_cfg).await {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return Ok(EXIT_LAUNCH);
        }
    };
    let ports = server.ports();
    eprintln!("listening: player {} trainer {} coach {}", ports.player, ports.trainer, ports.coach);
    let outcome = server.run().await?;
    print_json(&outcome)?;
    if outcome.protocol_errors > cfg.protocol_error_budget {
        return Ok(EXIT_ERROR_BUDGET);
    }
    Ok(0)
}

async fn run_team_cmd(a: RunTeam) -> anyhow::Result<u8> {
    let playmaker = if a.playmaker == cls_match::BUILTIN {
        PlaymakerEndpoint::Local(Arc::new(BuiltinPlaymaker::new()))
    } else {
        PlaymakerEndpoint::Grpc(a.playmaker.clone())
    };
    let mut team = TeamConfig::new(a.name, a.server, playmaker);
    team.players = a.players;
    team.with_coach = a.coach;
    team.deadline = Duration::from_millis(a.deadline_ms);
    team.log_dir = a.log_dir;
    let report = start_team(&team).await.join().await;
    print_json(&report)?;
    Ok(if report.failures.iter().any(|f| f.at_launch) {
        EXIT_LAUNCH
    } else if report.failures.is_empty() {
        0
    } else {
        EXIT_FAILURE
    })
}

fn validate_replay_cmd(path: PathBuf) -> anyhow::Result<u8> {
    let file = std::fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    let summary = read_replay(std::io::BufReader::new(file)).and_then(|r| validate_replay(&r));
    match summary {
        Ok(s) => {
            print_json(&serde_json::json!({
                "valid": true,
                "records": s.records,
                "first_cycle": s.first_cycle,
                "last_cycle": s.last_cycle,
                "scores": s.scores,
                "goals": s.goals,
            }))?;
            Ok(0)
        }
        Err(e) => {
            print_json(&serde_json::json!({ "valid": false, "error": e.to_string() }))?;
            Ok(EXIT_FAILURE)
        }
    }
}

async fn serve_playmaker_cmd(a: ServePlaymaker) -> anyhow::Result<u8> {
    let handler = Arc::new(match &a.record_states {
        Some(_) => BuiltinPlaymaker::with_recorder(Recorder::new(a.record_stride, a.record_limit)),
        None => BuiltinPlaymaker::new(),
    });
    let listener = match tokio::net::TcpListener::bind((a.host, a.port)).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error: cannot bind {}:{}: {e}", a.host, a.port);
            return Ok(EXIT_LAUNCH);
        }
    };
    eprintln!("playmaker listening on {}", listener.local_addr()?);
    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    cls_rpc::serve(listener, handler.clone(), shutdown).await?;
    if let (Some(path), Some(r)) = (&a.record_states, handler.recorder()) {
        let n = r.write(path)?;
        eprintln!("recorded {n} decisions to {}", path.display());
    }
    Ok(0)
}

#[tokio::main]
async fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match cli.command {
        Cmd::RunMatch(a) => run_match_cmd(a).await,
        Cmd::RunServer(a) => run_server_cmd(a).await,
        Cmd::RunTeam(a) => run_team_cmd(a).await,
        Cmd::ValidateReplay { path } => validate_replay_cmd(path),
        Cmd::ServePlaymaker(a) => serve_playmaker_cmd(a).await,
        Cmd::PrintProto => {
            print!("{}", cls_rpc::PROTO_SOURCE);
            Ok(0)
        }
    };
    match code {
        Ok(c) => ExitCode::from(c),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_FAILURE)
        }
    }
}
