//! Playmaker side: a trait to implement decisions and its gRPC adapter.

use std::future::Future;
use std::net::SocketAddr;
use std::sync::Arc;

use tokio::net::TcpListener;
use tokio::task::JoinHandle;
use tonic::transport::server::TcpIncoming;
use tonic::{Request, Response, Status};

use crate::pb;
use crate::pb::game_server::{Game, GameServer};

/// Decision logic of a playmaker. Only player decisions are mandatory; the
/// other methods acknowledge and return empty action lists by default.
///
/// Calls for different agents arrive concurrently, so implementations keep any
/// per-agent state keyed by `register_id`.
#[tonic::async_trait]
pub trait GameHandler: Send + Sync + 'static {
    async fn get_player_actions(&self, state: pb::State) -> Result<pb::PlayerActions, Status>;

    async fn get_coach_actions(&self, _state: pb::State) -> Result<pb::CoachActions, Status> {
        Ok(pb::CoachActions::default())
    }

    async fn get_trainer_actions(&self, _state: pb::State) -> Result<pb::TrainerActions, Status> {
        Ok(pb::TrainerActions::default())
    }

    async fn send_init_message(&self, _msg: pb::InitMessage) -> Result<(), Status> {
        Ok(())
    }

    async fn send_server_params(&self, _msg: pb::ServerParam) -> Result<(), Status> {
        Ok(())
    }

    async fn send_player_params(&self, _msg: pb::PlayerParam) -> Result<(), Status> {
        Ok(())
    }

    async fn send_player_type(&self, _msg: pb::PlayerType) -> Result<(), Status> {
        Ok(())
    }
}

/// Exposes a [`GameHandler`] as the generated `Game` service.
#[derive(Clone)]
pub struct GameService {
    handler: Arc<dyn GameHandler>,
}

impl GameService {
    pub fn new(handler: Arc<dyn GameHandler>) -> Self {
        GameService { handler }
    }

    pub fn into_server(self) -> GameServer<GameService> {
        GameServer::new(self)
    }
}

#[tonic::async_trait]
impl Game for GameService {
    async fn get_player_actions(&self, req: Request<pb::State>) -> Result<Response<pb::PlayerActions>, Status> {
        self.handler.get_player_actions(req.into_inner()).await.map(Response::new)
    }

    async fn get_coach_actions(&self, req: Request<pb::State>) -> Result<Response<pb::CoachActions>, Status> {
        self.handler.get_coach_actions(req.into_inner()).await.map(Response::new)
    }

    async fn get_trainer_actions(&self, req: Request<pb::State>) -> Result<Response<pb::TrainerActions>, Status> {
        self.handler.get_trainer_actions(req.into_inner()).await.map(Response::new)
    }

    async fn send_init_message(&self, req: Request<pb::InitMessage>) -> Result<Response<pb::Empty>, Status> {
        self.handler.send_init_message(req.into_inner()).await?;
        Ok(Response::new(pb::Empty {}))
    }

    async fn send_server_params(&self, req: Request<pb::ServerParam>) -> Result<Response<pb::Empty>, Status> {
        self.handler.send_server_params(req.into_inner()).await?;
        Ok(Response::new(pb::Empty {}))
    }

    async fn send_player_params(&self, req: Request<pb::PlayerParam>) -> Result<Response<pb::Empty>, Status> {
        self.handler.send_player_params(req.into_inner()).await?;
        Ok(Response::new(pb::Empty {}))
    }

    async fn send_player_type(&self, req: Request<pb::PlayerType>) -> Result<Response<pb::Empty>, Status> {
        self.handler.send_player_type(req.into_inner()).await?;
        Ok(Response::new(pb::Empty {}))
    }
}

/// Serves `handler` on an already bound listener until `shutdown` resolves.
pub async fn serve(
    listener: TcpListener,
    handler: Arc<dyn GameHandler>,
    shutdown: impl Future<Output = ()> + Send,
) -> Result<(), tonic::transport::Error> {
    let incoming = TcpIncoming::from_listener(listener, true, None).expect("listener is bound");
    tonic::transport::Server::builder()
        .add_service(GameService::new(handler).into_server())
        .serve_with_incoming_shutdown(incoming, shutdown)
        .await
}

/// Binds `addr` and serves in a background task. Returns the bound address;
/// abort the handle to stop serving.
pub async fn spawn_server(
    addr: SocketAddr,
    handler: Arc<dyn GameHandler>,
) -> std::io::Result<(SocketAddr, JoinHandle<Result<(), tonic::transport::Error>>)> {
    let listener = TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    Ok((local, tokio::spawn(serve(listener, handler, std::future::pending()))))
}
