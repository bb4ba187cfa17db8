//! Proxy side: transports and deadline-bounded calls.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use prost::Message;
use tokio::time::{timeout_at, Instant};
use tonic::transport::{Channel, Endpoint};
use tonic::{Code, Request, Status};

use crate::actions::SchemaViolation;
use crate::handler::GameHandler;
use crate::pb::game_client::GameClient;
use crate::session::{Call, MissingPrerequisite, Reply, RpcSession};

/// Wait this long after a channel failure before calling again.
pub const RECONNECT_BACKOFF: Duration = Duration::from_millis(500);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CallError {
    #[error("no reply within {0:?}")]
    Timeout(Duration),
    #[error("channel down: {0}")]
    ChannelDown(String),
    #[error("playmaker error: {0}")]
    Status(String),
    #[error(transparent)]
    Schema(#[from] SchemaViolation),
    #[error(transparent)]
    NotReady(#[from] MissingPrerequisite),
}

impl From<Status> for CallError {
    fn from(s: Status) -> Self {
        match s.code() {
            Code::Unavailable => CallError::ChannelDown(s.message().to_string()),
            // the playmaker gave up on our grpc-timeout before we did
            Code::DeadlineExceeded | Code::Cancelled => CallError::Timeout(Duration::ZERO),
            _ => CallError::Status(format!("{:?}: {}", s.code(), s.message())),
        }
    }
}

/// Carries one call to a playmaker and brings back its reply.
#[tonic::async_trait]
pub trait GameTransport: Send {
    async fn call(&mut self, call: Call, deadline: Duration) -> Result<Reply, CallError>;
}

#[tonic::async_trait]
impl GameTransport for Box<dyn GameTransport> {
    async fn call(&mut self, call: Call, deadline: Duration) -> Result<Reply, CallError> {
        (**self).call(call, deadline).await
    }
}

/// gRPC over TCP. The connection is opened on first use and re-established
/// transparently after failures.
#[derive(Clone)]
pub struct GrpcTransport {
    client: GameClient<Channel>,
}

impl GrpcTransport {
    /// `endpoint` is `host:port` or a full `http://` URI.
    pub fn connect_lazy(endpoint: &str) -> Result<Self, CallError> {
        let uri = if endpoint.contains("://") { endpoint.to_string() } else { format!("http://{endpoint}") };
        let ep = Endpoint::from_shared(uri)
            .map_err(|e| CallError::ChannelDown(e.to_string()))?
            .connect_timeout(Duration::from_millis(200))
            .tcp_nodelay(true);
        Ok(GrpcTransport { client: GameClient::new(ep.connect_lazy()) })
    }
}

fn with_timeout<T>(msg: T, deadline: Duration) -> Request<T> {
    let mut req = Request::new(msg);
    req.set_timeout(deadline);
    req
}

#[tonic::async_trait]
impl GameTransport for GrpcTransport {
    async fn call(&mut self, call: Call, deadline: Duration) -> Result<Reply, CallError> {
        let c = &mut self.client;
        Ok(match call {
            Call::Init(m) => c.send_init_message(with_timeout(m, deadline)).await.map(|_| Reply::Ack)?,
            Call::ServerParams(m) => c.send_server_params(with_timeout(m, deadline)).await.map(|_| Reply::Ack)?,
            Call::PlayerParams(m) => c.send_player_params(with_timeout(m, deadline)).await.map(|_| Reply::Ack)?,
            Call::PlayerType(m) => c.send_player_type(with_timeout(m, deadline)).await.map(|_| Reply::Ack)?,
            Call::PlayerActions(s) => {
                Reply::PlayerActions(c.get_player_actions(with_timeout(s, deadline)).await?.into_inner())
            }
            Call::CoachActions(s) => Reply::CoachActions(c.get_coach_actions(with_timeout(s, deadline)).await?.into_inner()),
            Call::TrainerActions(s) => {
                Reply::TrainerActions(c.get_trainer_actions(with_timeout(s, deadline)).await?.into_inner())
            }
        })
    }
}

/// Calls a handler in the same process. Every request and reply still goes
/// through the protobuf wire encoding, so behaviour matches a remote playmaker.
#[derive(Clone)]
pub struct LocalTransport {
    handler: Arc<dyn GameHandler>,
}

impl LocalTransport {
    pub fn new(handler: Arc<dyn GameHandler>) -> Self {
        LocalTransport { handler }
    }
}

fn through_wire<M: Message + Default>(m: &M) -> Result<M, SchemaViolation> {
    M::decode(m.encode_to_vec().as_slice()).map_err(|e| SchemaViolation::Decode(e.to_string()))
}

#[tonic::async_trait]
impl GameTransport for LocalTransport {
    async fn call(&mut self, call: Call, _deadline: Duration) -> Result<Reply, CallError> {
        let h = &self.handler;
        Ok(match call {
            Call::Init(m) => h.send_init_message(through_wire(&m)?).await.map(|_| Reply::Ack)?,
            Call::ServerParams(m) => h.send_server_params(through_wire(&m)?).await.map(|_| Reply::Ack)?,
            Call::PlayerParams(m) => h.send_player_params(through_wire(&m)?).await.map(|_| Reply::Ack)?,
            Call::PlayerType(m) => h.send_player_type(through_wire(&m)?).await.map(|_| Reply::Ack)?,
            Call::PlayerActions(s) => Reply::PlayerActions(through_wire(&h.get_player_actions(through_wire(&s)?).await?)?),
            Call::CoachActions(s) => Reply::CoachActions(through_wire(&h.get_coach_actions(through_wire(&s)?).await?)?),
            Call::TrainerActions(s) => {
                Reply::TrainerActions(through_wire(&h.get_trainer_actions(through_wire(&s)?).await?)?)
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CallOutcome {
    Ok,
    Timeout,
    ChannelDown,
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CallRecord {
    pub register_id: i32,
    pub method: &'static str,
    pub latency: Duration,
    pub outcome: CallOutcome,
}

/// Shared, append-only record of every call attempt, across agents.
#[derive(Debug, Clone, Default)]
pub struct CallLog(Arc<Mutex<Vec<CallRecord>>>);

impl CallLog {
    pub fn push(&self, r: CallRecord) {
        self.0.lock().expect("call log lock").push(r);
    }

    pub fn records(&self) -> Vec<CallRecord> {
        self.0.lock().expect("call log lock").clone()
    }

    /// Checks that every decision call of an agent comes after a complete,
    /// acknowledged registration that no channel failure has since voided.
    pub fn check_registration_order(&self, player_types: usize) -> Result<(), String> {
        let want = ["SendInitMessage", "SendServerParams", "SendPlayerParams"];
        // per agent: number of registration steps acknowledged in order
        let mut progress: HashMap<i32, usize> = HashMap::new();
        for (i, r) in self.records().iter().enumerate() {
            let step = progress.entry(r.register_id).or_default();
            if r.outcome == CallOutcome::ChannelDown {
                *step = 0;
                continue;
            }
            let done = *step >= want.len() + player_types;
            if r.method.starts_with("Get") {
                if !done {
                    return Err(format!("call {i}: {} for agent {} before registration", r.method, r.register_id));
                }
            } else if r.outcome == CallOutcome::Ok {
                let expected = want.get(*step).copied().unwrap_or("SendPlayerType");
                if r.method == "SendInitMessage" {
                    *step = 1;
                } else if r.method == expected && !done {
                    *step += 1;
                }
            }
        }
        Ok(())
    }
}

/// Outcome counters for one client.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ClientStats {
    pub ok: u32,
    pub timeouts: u32,
    pub channel_down: u32,
    pub failed: u32,
    /// Calls skipped while backing off after a channel failure.
    pub skipped: u32,
}

/// One agent's channel to its playmaker: registration, the decision-call
/// guard, per-call deadlines and reconnect backoff.
pub struct RpcClient<T: GameTransport> {
    transport: T,
    deadline: Duration,
    backoff: Duration,
    down_until: Option<Instant>,
    session: RpcSession,
    log: CallLog,
    stats: ClientStats,
}

impl<T: GameTransport> RpcClient<T> {
    pub fn new(transport: T, deadline: Duration) -> Self {
        RpcClient {
            transport,
            deadline,
            backoff: RECONNECT_BACKOFF,
            down_until: None,
            session: RpcSession::default(),
            log: CallLog::default(),
            stats: ClientStats::default(),
        }
    }

    pub fn with_log(mut self, log: CallLog) -> Self {
        self.log = log;
        self
    }

    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }

    pub fn deadline(&self) -> Duration {
        self.deadline
    }

    pub fn stats(&self) -> ClientStats {
        self.stats
    }

    pub fn log(&self) -> &CallLog {
        &self.log
    }

    pub fn set_registration(&mut self, calls: Vec<Call>) {
        self.session = RpcSession::new(calls);
    }

    pub fn is_registered(&self) -> bool {
        self.session.is_registered()
    }

    /// Sends one call and waits at most `deadline` for its reply. A call that
    /// times out is cancelled, so a late reply can never be mistaken for a
    /// later cycle's. Decision calls are refused until registration is done.
    pub async fn call_with_deadline(&mut self, call: Call, deadline: Duration) -> Result<Reply, CallError> {
        self.call_until(call, Instant::now() + deadline).await
    }

    async fn call_until(&mut self, call: Call, until: Instant) -> Result<Reply, CallError> {
        if !call.is_registration() {
            self.session.check_ready()?;
        }
        let method = call.method();
        let register_id = call.register_id();
        let start = Instant::now();
        let budget = until.saturating_duration_since(start);
        let result = match timeout_at(until, self.transport.call(call, budget)).await {
            Ok(r) => r,
            Err(_) => Err(CallError::Timeout(start.elapsed())),
        };
        let outcome = match &result {
            Ok(_) => CallOutcome::Ok,
            Err(CallError::Timeout(_)) => CallOutcome::Timeout,
            Err(CallError::ChannelDown(_)) => CallOutcome::ChannelDown,
            Err(_) => CallOutcome::Failed,
        };
        self.log.push(CallRecord { register_id, method, latency: start.elapsed(), outcome });
        match outcome {
            CallOutcome::Ok => self.stats.ok += 1,
            CallOutcome::Timeout => self.stats.timeouts += 1,
            CallOutcome::ChannelDown => {
                self.stats.channel_down += 1;
                self.down_until = Some(Instant::now() + self.backoff);
                // a restarted playmaker has forgotten us
                self.session.reset();
            }
            CallOutcome::Failed => self.stats.failed += 1,
        }
        result
    }

    fn backing_off(&mut self) -> bool {
        match self.down_until {
            Some(t) if Instant::now() < t => true,
            Some(_) => {
                self.down_until = None;
                false
            }
            None => false,
        }
    }

    /// Sends the outstanding registration calls, all within `budget`.
    pub async fn register(&mut self, budget: Duration) -> Result<(), CallError> {
        self.register_until(Instant::now() + budget).await
    }

    async fn register_until(&mut self, until: Instant) -> Result<(), CallError> {
        if self.backing_off() {
            self.stats.skipped += 1;
            return Err(CallError::ChannelDown("reconnect backoff".into()));
        }
        while let Some(call) = self.session.next_registration().cloned() {
            match self.call_until(call, until).await? {
                Reply::Ack => self.session.ack(),
                _ => return Err(SchemaViolation::Decode("unexpected reply to a registration call".into()).into()),
            }
        }
        Ok(())
    }

    /// One decision call under the per-cycle deadline, completing any
    /// outstanding registration first within the same budget.
    pub async fn decide(&mut self, call: Call) -> Result<Reply, CallError> {
        let until = Instant::now() + self.deadline;
        if !self.session.is_registered() {
            self.register_until(until).await?;
        } else if self.backing_off() {
            self.stats.skipped += 1;
            return Err(CallError::ChannelDown("reconnect backoff".into()));
        }
        self.call_until(call, until).await
    }
}
