use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use cls_core::replay::{read_replay, validate_replay, Replay};
use cls_core::sim::{SimConfig, SimParams};
use cls_core::{AgentType, Side, Vec2};
use cls_proxy::{run_agent, start_team, AgentConfig, AgentError, PlaymakerEndpoint, TeamConfig};
use cls_rpc::actions::{marshal_player_actions, marshal_trainer_actions};
use cls_rpc::{pb, GameHandler, PlayerAction, TrainerAction};
use cls_server::{MatchOutcome, Ports, Server, ServerConfig, TickMode};
use tonic::Status;

fn server_config(half_cycles: u32, agents: usize, replay: Option<&Path>) -> ServerConfig {
    let params = SimParams { half_cycles, ..SimParams::default() };
    ServerConfig {
        sim: SimConfig { params, ..SimConfig::default() },
        player_port: 0,
        trainer_port: 0,
        coach_port: 0,
        tick: TickMode::Accelerated,
        lockstep_timeout_ms: 1000,
        wait_for_agents: agents,
        wait_timeout_ms: 10_000,
        replay: replay.map(Path::to_path_buf),
        ..ServerConfig::default()
    }
}

async fn start_server(cfg: ServerConfig) -> (Ports, tokio::task::JoinHandle<MatchOutcome>) {
    let server = Server::bind(cfg).await.unwrap();
    let ports = server.ports();
    (ports, tokio::spawn(async move { server.run().await.unwrap() }))
}

fn load_replay(path: &Path) -> Replay {
    read_replay(std::io::BufReader::new(std::fs::File::open(path).unwrap())).unwrap()
}

/// Always answers with the same action list.
struct Fixed(Vec<PlayerAction>);

#[tonic::async_trait]
impl GameHandler for Fixed {
    async fn get_player_actions(&self, _state: pb::State) -> Result<pb::PlayerActions, Status> {
        Ok(marshal_player_actions(&self.0))
    }
}

/// Answers after `delay`, always too late for the deadline.
struct Slow(Duration);

#[tonic::async_trait]
impl GameHandler for Slow {
    async fn get_player_actions(&self, _state: pb::State) -> Result<pb::PlayerActions, Status> {
        tokio::time::sleep(self.0).await;
        Ok(marshal_player_actions(&[PlayerAction::DoNothing]))
    }
}

fn local(h: impl GameHandler) -> PlaymakerEndpoint {
    PlaymakerEndpoint::Local(Arc::new(h))
}

/// An endpoint nobody listens on.
fn dead_endpoint() -> PlaymakerEndpoint {
    let port = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    PlaymakerEndpoint::Grpc(format!("http://127.0.0.1:{port}"))
}

fn player(server: SocketAddr, team: &str, playmaker: PlaymakerEndpoint) -> AgentConfig {
    let mut cfg = AgentConfig::new(team, AgentType::Player, server, playmaker);
    cfg.idle_timeout = Duration::from_secs(10);
    cfg
}

#[tokio::test]
async fn go_to_point_converges_in_closed_loop() {
    let dir = tempfile::tempdir().unwrap();
    let replay = dir.path().join("m.jsonl");
    let (ports, server) = start_server(server_config(60, 1, Some(&replay))).await;
    let target = Vec2::new(-10.0, 10.0);
    let pm = local(Fixed(vec![
        PlayerAction::BodyGoToPoint { target, dist_thr: 1.0, max_power: 100.0 },
        // once there, hold position instead of letting the fallback chase the ball
        PlayerAction::BodyTurnToPoint { target: Vec2::ZERO },
        PlayerAction::NeckTurnToBall,
    ]));
    let report = run_agent(player(ports.player, "Alpha", pm), None).await.unwrap();
    let outcome = server.await.unwrap();

    assert_eq!(outcome.cycles, 120);
    assert_eq!(report.cycles, 120);
    assert!(report.preprocess_cycles >= 1, "the bench start must be moved onto the pitch");
    assert_eq!(report.deadline_misses, 0);
    let log = load_replay(&replay);
    validate_replay(&log).unwrap();
    let last = &log.records.last().unwrap().world;
    let me = last.player(Side::Left, 1).unwrap();
    assert!(me.pos.dist(target) <= 1.0, "ended at {:?}", me.pos);
    // and it got there well before the end
    let arrived = log.records.iter().position(|r| r.world.player(Side::Left, 1).unwrap().pos.dist(target) <= 1.2);
    assert!(arrived.unwrap() < 90);
}

#[tokio::test]
async fn empty_replies_fall_back_every_cycle() {
    let (ports, server) = start_server(server_config(25, 1, None)).await;
    let report = run_agent(player(ports.player, "Alpha", local(Fixed(Vec::new()))), None).await.unwrap();
    server.await.unwrap();
    assert_eq!(report.cycles, 50);
    assert_eq!(report.playmaker_cycles, 0);
    assert_eq!(report.fallback_cycles + report.preprocess_cycles, 50);
    assert_eq!(report.command_cycles, 50);
}

#[tokio::test]
async fn late_replies_are_dropped_for_the_fallback() {
    let (ports, server) = start_server(server_config(10, 1, None)).await;
    let mut cfg = player(ports.player, "Alpha", local(Slow(Duration::from_millis(120))));
    cfg.register_timeout = Duration::from_millis(200);
    let report = run_agent(cfg, None).await.unwrap();
    let outcome = server.await.unwrap();
    assert_eq!(report.cycles, 20);
    assert_eq!(report.deadline_misses, 20);
    assert_eq!(report.playmaker_cycles, 0);
    assert_eq!(report.command_cycles, 20);
    assert!(report.max_decision_ms < 100.0, "{}", report.max_decision_ms);
    assert_eq!(outcome.late_ticks, 0);
}

#[tokio::test]
async fn a_severed_channel_only_affects_its_agent() {
    let (ports, server) = start_server(server_config(50, 2, None)).await;
    let good = tokio::spawn(run_agent(
        player(ports.player, "Alpha", local(Fixed(vec![PlayerAction::Turn { moment: 10.0 }]))),
        None,
    ));
    tokio::time::sleep(Duration::from_millis(20)).await;
    let cut = run_agent(player(ports.player, "Alpha", dead_endpoint()), None).await.unwrap();
    let good = good.await.unwrap().unwrap();
    let outcome = server.await.unwrap();

    assert_eq!(good.playmaker_cycles + good.preprocess_cycles, 100);
    assert_eq!(good.channel_down + good.deadline_misses, 0);
    assert_eq!(cut.playmaker_cycles, 0);
    assert!(cut.channel_down >= 1);
    assert_eq!(cut.command_cycles, 100);
    assert!(outcome.agents.iter().all(|a| a.body_command_cycles == 100), "{:?}", outcome.agents);
}

#[tokio::test]
async fn decision_log_has_one_line_per_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("agent.jsonl");
    let (ports, server) = start_server(server_config(5, 1, None)).await;
    let mut cfg = player(ports.player, "Alpha", local(Fixed(vec![PlayerAction::Dash { power: 30.0, dir: 0.0 }])));
    cfg.log_path = Some(path.clone());
    run_agent(cfg, None).await.unwrap();
    server.await.unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 10);
    for (i, l) in lines.iter().enumerate() {
        assert_eq!(l["cycle"], i as u64);
        assert!(l["rpc_latency_ms"].as_f64().unwrap() >= 0.0);
        assert!(["playmaker", "fallback", "preprocess"].contains(&l["action_source"].as_str().unwrap()));
        assert!(!l["command"].as_array().unwrap().is_empty());
    }
    assert_eq!(lines.last().unwrap()["command"][0], "(dash 30 0)");
}

/// Places the ball once, at cycle 3.
struct BallPlacer;

#[tonic::async_trait]
impl GameHandler for BallPlacer {
    async fn get_player_actions(&self, _state: pb::State) -> Result<pb::PlayerActions, Status> {
        Err(Status::unimplemented("trainer only"))
    }

    async fn get_trainer_actions(&self, state: pb::State) -> Result<pb::TrainerActions, Status> {
        let cycle = state.world_model.map(|w| w.cycle).unwrap_or_default();
        let actions = if cycle == 3 {
            vec![TrainerAction::MoveBall { pos: Vec2::new(10.0, 5.0), vel: Vec2::ZERO }]
        } else {
            Vec::new()
        };
        Ok(marshal_trainer_actions(&actions))
    }
}

#[tokio::test]
async fn trainer_actions_reach_the_simulation() {
    let dir = tempfile::tempdir().unwrap();
    let replay = dir.path().join("t.jsonl");
    let (ports, server) = start_server(server_config(5, 1, Some(&replay))).await;
    let mut cfg = AgentConfig::new("", AgentType::Trainer, ports.trainer, local(BallPlacer));
    cfg.idle_timeout = Duration::from_secs(10);
    let report = run_agent(cfg, None).await.unwrap();
    server.await.unwrap();
    assert_eq!(report.cycles, 10);
    assert_eq!(report.rpc_failures, 0);
    let log = load_replay(&replay);
    let after = log.records.iter().find(|r| r.cycle == 4).unwrap();
    assert_eq!(after.world.ball.pos, Vec2::new(10.0, 5.0));
    let before = log.records.iter().find(|r| r.cycle == 3).unwrap();
    assert_eq!(before.world.ball.pos, Vec2::ZERO);
}

#[tokio::test]
async fn team_launch_numbers_agents_in_order() {
    let (ports, server) = start_server(server_config(10, 4, None)).await;
    let mut cfg = TeamConfig::new("Alpha", ports.player, local(Fixed(vec![PlayerAction::DoNothing])));
    cfg.players = 3;
    cfg.with_coach = true;
    cfg.coach_server = ports.coach;
    let team = start_team(&cfg).await.join().await;
    let outcome = server.await.unwrap();
    assert!(team.failures.is_empty(), "{:?}", team.failures);
    let names: Vec<_> = team.agents.iter().map(|a| a.name.as_str()).collect();
    assert_eq!(names, ["l1", "l2", "l3", "coach_l"]);
    let ids: Vec<_> = team.agents.iter().map(|a| a.register_id).collect();
    assert_eq!(ids, [1, 2, 3, 12]);
    assert_eq!(team.cycles(), 80);
    assert_eq!(outcome.late_ticks, 0);
}

#[tokio::test]
async fn refused_and_unreachable_servers_are_errors() {
    // long enough that the match is still running when the third agent knocks
    let (ports, server) = start_server(server_config(300, 2, None)).await;
    let pm = local(Fixed(Vec::new()));
    let a = tokio::spawn(run_agent(player(ports.player, "Alpha", pm.clone()), None));
    tokio::time::sleep(Duration::from_millis(20)).await;
    let b = tokio::spawn(run_agent(player(ports.player, "Beta", pm.clone()), None));
    tokio::time::sleep(Duration::from_millis(20)).await;
    let third = run_agent(player(ports.player, "Gamma", pm.clone()), None).await;
    assert!(matches!(third, Err(AgentError::Rejected(ref e)) if e == "no_more_team_or_player"), "{third:?}");
    a.await.unwrap().unwrap();
    b.await.unwrap().unwrap();
    server.await.unwrap();

    let silent = tokio::net::UdpSocket::bind("127.0.0.1:0").await.unwrap();
    let mut cfg = player(silent.local_addr().unwrap(), "Alpha", pm);
    cfg.init_attempts = 2;
    cfg.init_timeout = Duration::from_millis(50);
    assert!(matches!(run_agent(cfg, None).await, Err(AgentError::ServerUnreachable(_))));
}

#[tokio::test]
async fn deadline_must_fit_in_a_cycle() {
    let (ports, server) = start_server(server_config(5, 1, None)).await;
    let mut cfg = player(ports.player, "Alpha", local(Fixed(Vec::new())));
    cfg.deadline = Duration::from_millis(100);
    assert!(matches!(run_agent(cfg, None).await, Err(AgentError::Config(_))));
    server.abort();
}
