mod support;

use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use cls_core::codec::{ParamMap, ParamValue, ServerMessage};
use cls_core::model::ModelConfig;
use cls_core::sim::SimParams;
use cls_core::{AgentType, Side, Vec2};
use cls_rpc::actions::{marshal_player_actions, unmarshal_player_actions};
use cls_rpc::{
    marshal_state, pb, registration_sequence, spawn_server, unmarshal_world, AgentMeta, Call, CallError, CallLog,
    CallOutcome, CapturedParams, GameHandler, GrpcTransport, LocalTransport, PlayerAction, Reply, RpcClient,
};
use prost::Message;
use tonic::Status;

fn captured(types: u32) -> CapturedParams {
    let mut c = CapturedParams::default();
    c.capture(&ServerMessage::ServerParam(SimParams { player_types: types, ..SimParams::default() }.to_param_map()));
    let mut player = ParamMap::new();
    player.insert("player_types".into(), ParamValue::Num(types as f64));
    c.capture(&ServerMessage::PlayerParam(player));
    for id in 0..types {
        c.capture(&ServerMessage::PlayerType { id, params: ParamMap::new() });
    }
    c
}

fn meta(unum: u8) -> AgentMeta {
    AgentMeta::new(AgentType::Player, "Alpha", Some(Side::Left), unum)
}

fn state(unum: u8) -> pb::State {
    let mut ws = support::random_world_state(unum as u64);
    ws.unum = unum;
    marshal_state(&ws, &meta(unum), false)
}

/// Replies after `delay` with a single dash, counting decision calls.
struct Stub {
    delay: Duration,
    calls: AtomicU32,
}

impl Stub {
    fn new(delay_ms: u64) -> Arc<Stub> {
        Arc::new(Stub { delay: Duration::from_millis(delay_ms), calls: AtomicU32::new(0) })
    }
}

#[tonic::async_trait]
impl GameHandler for Stub {
    async fn get_player_actions(&self, _state: pb::State) -> Result<pb::PlayerActions, Status> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        tokio::time::sleep(self.delay).await;
        Ok(marshal_player_actions(&[PlayerAction::Dash { power: 100.0, dir: 0.0 }]))
    }
}

async fn registered_client(endpoint: &str, unum: u8, deadline_ms: u64) -> RpcClient<GrpcTransport> {
    let mut c = RpcClient::new(GrpcTransport::connect_lazy(endpoint).unwrap(), Duration::from_millis(deadline_ms));
    c.set_registration(registration_sequence(&meta(unum), &captured(1)).unwrap());
    c.register(Duration::from_secs(2)).await.unwrap();
    c
}

#[test]
fn state_round_trips_through_the_wire() {
    for seed in 0..1000 {
        let ws = support::random_world_state(seed);
        let m = AgentMeta::new(
            if ws.unum == 0 { AgentType::Coach } else { AgentType::Player },
            "Alpha",
            ws.our_side,
            ws.unum,
        );
        let sent = marshal_state(&ws, &m, seed % 2 == 0);
        let received = pb::State::decode(sent.encode_to_vec().as_slice()).unwrap();
        assert_eq!(received, sent, "seed {seed}");
        assert_eq!(received.full_world_model.is_some(), ws.full_state);

        let mut back = unmarshal_world(received.world_model.as_ref().unwrap(), ModelConfig::default()).unwrap();
        back.full_state = received.full_world_model.is_some();
        // every carried field survives
        assert_eq!(back.cycle, ws.cycle);
        assert_eq!(back.our_side, ws.our_side);
        assert_eq!(back.unum, ws.unum);
        assert_eq!(back.team_names, ws.team_names);
        assert_eq!(back.self_pose.pos, ws.self_pose.pos);
        assert_eq!(back.self_pose.body_dir, ws.self_pose.body_dir);
        assert_eq!(back.self_pose.valid, ws.self_pose.valid);
        assert_eq!(back.ball.pos, ws.ball.pos);
        assert_eq!(back.ball.confidence, ws.ball.confidence);
        assert_eq!(back.teammates.keys().collect::<Vec<_>>(), ws.teammates.keys().collect::<Vec<_>>());
        for (u, o) in &ws.opponents {
            let b = &back.opponents[u];
            assert_eq!((b.pos, b.vel, b.body_dir, b.confidence, b.last_seen_cycle), (o.pos, o.vel, o.body_dir, o.confidence, o.last_seen_cycle));
        }
        assert_eq!(back.play_mode, ws.play_mode);
        assert_eq!(back.scores, ws.scores);
        assert_eq!(back.intercept.fastest_ours, ws.intercept.fastest_ours);
        assert_eq!(back.intercept.fastest_theirs, ws.intercept.fastest_theirs);
        assert_eq!(marshal_state(&back, &m, seed % 2 == 0), sent, "seed {seed}");
    }
}

#[test]
fn unseen_entries_carry_zero_confidence() {
    for seed in 0..200 {
        let st = state(1 + (seed % 11) as u8);
        let w = st.world_model.unwrap();
        assert_eq!(w.teammates.len(), 11);
        assert_eq!(w.opponents.len(), 11);
        for p in w.teammates.iter().chain(&w.opponents) {
            if !p.seen {
                assert_eq!(p.confidence, 0.0);
                assert_eq!(p.last_seen_cycle, -1);
            }
        }
    }
}

#[test]
fn reply_decoding_preserves_order() {
    let actions = vec![
        PlayerAction::BodyGoToPoint { target: Vec2::new(1.0, 2.0), dist_thr: 0.5, max_power: 90.0 },
        PlayerAction::Dash { power: 100.0, dir: 0.0 },
        PlayerAction::NeckTurnToBall,
    ];
    let wire = marshal_player_actions(&actions).encode_to_vec();
    let reply = pb::PlayerActions::decode(wire.as_slice()).unwrap();
    assert_eq!(unmarshal_player_actions(&reply).unwrap(), actions);
}

#[tokio::test]
async fn fast_playmaker_reply_is_delivered() {
    let stub = Stub::new(5);
    let (addr, server) = spawn_server("127.0.0.1:0".parse().unwrap(), stub.clone()).await.unwrap();
    let mut c = registered_client(&addr.to_string(), 2, 70).await;
    let reply = c.decide(Call::PlayerActions(state(2))).await.unwrap();
    let Reply::PlayerActions(a) = reply else { panic!("wrong reply kind") };
    assert_eq!(unmarshal_player_actions(&a).unwrap(), vec![PlayerAction::Dash { power: 100.0, dir: 0.0 }]);
    server.abort();
}

#[tokio::test]
async fn slow_playmaker_times_out_at_the_deadline() {
    let stub = Stub::new(200);
    let (addr, server) = spawn_server("127.0.0.1:0".parse().unwrap(), stub.clone()).await.unwrap();
    let mut c = registered_client(&addr.to_string(), 3, 70).await;
    // warm the connection so the measurement is of the call alone
    let _ = c.decide(Call::PlayerActions(state(3))).await;
    for _ in 0..5 {
        let start = Instant::now();
        let r = c.decide(Call::PlayerActions(state(3))).await;
        let took = start.elapsed();
        assert!(matches!(r, Err(CallError::Timeout(_))), "{r:?}");
        assert!(took >= Duration::from_millis(60) && took <= Duration::from_millis(80), "{took:?}");
    }
    server.abort();
}

#[tokio::test]
async fn absent_playmaker_is_channel_down_with_backoff() {
    // bind then drop to get a port nobody listens on
    let addr = std::net::TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap();
    let mut c = RpcClient::new(GrpcTransport::connect_lazy(&addr.to_string()).unwrap(), Duration::from_millis(70));
    c.set_registration(registration_sequence(&meta(4), &captured(1)).unwrap());
    let start = Instant::now();
    let r = c.decide(Call::PlayerActions(state(4))).await;
    assert!(matches!(r, Err(CallError::ChannelDown(_))), "{r:?}");
    assert!(start.elapsed() < Duration::from_millis(80));
    // within the backoff no call is attempted
    let r = c.decide(Call::PlayerActions(state(4))).await;
    assert!(matches!(r, Err(CallError::ChannelDown(_))));
    assert_eq!(c.stats().skipped, 1);
    assert_eq!(c.stats().channel_down, 1);

    // the playmaker comes up; after the backoff the agent re-registers and decides
    let stub = Stub::new(0);
    let listener = tokio::net::TcpListener::bind(addr).await.unwrap();
    let server = tokio::spawn(cls_rpc::serve(listener, stub.clone(), std::future::pending()));
    tokio::time::sleep(Duration::from_millis(550)).await;
    let r = c.decide(Call::PlayerActions(state(4))).await;
    assert!(matches!(r, Ok(Reply::PlayerActions(_))), "{r:?}");
    c.log().check_registration_order(1).unwrap();
    server.abort();
}

#[tokio::test]
async fn decisions_wait_for_registration() {
    let stub = Stub::new(0);
    let mut c = RpcClient::new(LocalTransport::new(stub.clone()), Duration::from_millis(70));
    let r = c.call_with_deadline(Call::PlayerActions(state(5)), Duration::from_millis(70)).await;
    assert!(matches!(r, Err(CallError::NotReady(_))), "{r:?}");
    assert_eq!(stub.calls.load(Ordering::SeqCst), 0);

    c.set_registration(registration_sequence(&meta(5), &captured(3)).unwrap());
    c.decide(Call::PlayerActions(state(5))).await.unwrap();
    let methods: Vec<_> = c.log().records().iter().map(|r| r.method).collect();
    assert_eq!(
        methods,
        [
            "SendInitMessage",
            "SendServerParams",
            "SendPlayerParams",
            "SendPlayerType",
            "SendPlayerType",
            "SendPlayerType",
            "GetPlayerActions"
        ]
    );
    c.log().check_registration_order(3).unwrap();
}

#[test]
fn order_checker_flags_early_decisions() {
    let log = CallLog::default();
    let rec = |method, outcome| cls_rpc::CallRecord { register_id: 7, method, latency: Duration::ZERO, outcome };
    log.push(rec("SendInitMessage", CallOutcome::Ok));
    log.push(rec("SendServerParams", CallOutcome::Ok));
    log.push(rec("SendPlayerParams", CallOutcome::Ok));
    log.push(rec("GetPlayerActions", CallOutcome::Ok));
    assert!(log.check_registration_order(1).is_err());

    let log = CallLog::default();
    for m in ["SendInitMessage", "SendServerParams", "SendPlayerParams", "SendPlayerType", "GetPlayerActions"] {
        log.push(rec(m, CallOutcome::Ok));
    }
    log.check_registration_order(1).unwrap();
    log.push(rec("GetPlayerActions", CallOutcome::ChannelDown));
    log.push(rec("GetPlayerActions", CallOutcome::Ok));
    assert!(log.check_registration_order(1).is_err());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn playmaker_serves_many_agents_at_once() {
    let stub = Stub::new(10);
    let (addr, server) = spawn_server("127.0.0.1:0".parse().unwrap(), stub.clone()).await.unwrap();
    let log = CallLog::default();
    let mut tasks = Vec::new();
    for i in 0..23u8 {
        let endpoint = addr.to_string();
        let log = log.clone();
        tasks.push(tokio::spawn(async move {
            let unum = i % 11 + 1;
            let m = AgentMeta::new(AgentType::Player, "Alpha", Some(if i < 11 { Side::Left } else { Side::Right }), unum);
            let mut c = RpcClient::new(GrpcTransport::connect_lazy(&endpoint).unwrap(), Duration::from_millis(70))
                .with_log(log);
            c.set_registration(registration_sequence(&m, &captured(1)).unwrap());
            c.register(Duration::from_secs(2)).await.unwrap();
            let mut st = state(unum);
            st.register_id = m.register_id;
            for _ in 0..20 {
                c.decide(Call::PlayerActions(st.clone())).await.unwrap();
            }
        }));
    }
    for t in tasks {
        t.await.unwrap();
    }
    assert_eq!(stub.calls.load(Ordering::SeqCst), 23 * 20);
    log.check_registration_order(1).unwrap();
    server.abort();
}
