//! The built-in playmaker: a small deterministic policy served through the
//! same `Game` contract as any external playmaker.

use std::collections::HashMap;
use std::sync::Mutex;

use cls_core::sim::SimParams;
use cls_core::Vec2;
use cls_rpc::actions::marshal_player_actions;
use cls_rpc::params::sim_params_from_msg;
use cls_rpc::{pb, GameHandler, PlayerAction};
use tonic::Status;

use crate::corpus::Recorder;

/// Home positions of the 4-3-3, in the team frame, indexed by unum - 1.
pub const FORMATION: [(f64, f64); 11] = [
    (-50.0, 0.0),
    (-35.0, -20.0),
    (-38.0, -7.0),
    (-38.0, 7.0),
    (-35.0, 20.0),
    (-20.0, -15.0),
    (-22.0, 0.0),
    (-20.0, 15.0),
    (-5.0, -22.0),
    (-2.0, 0.0),
    (-5.0, 22.0),
];
/// How far the formation follows the ball.
pub const BALL_SHIFT: f64 = 0.3;
pub const SHOT_TARGET: (f64, f64) = (52.5, 0.0);
pub const SHOT_SPEED: f64 = 2.5;
pub const HOME_DIST_THR: f64 = 1.0;
pub const HOME_DASH_POWER: f64 = 80.0;

fn vec(v: &Option<pb::Vector2>) -> Vec2 {
    v.as_ref().map(|v| Vec2::new(v.x, v.y)).unwrap_or(Vec2::ZERO)
}

/// Formation point for `unum`, shifted toward the ball when its position is known.
pub fn formation_point(unum: u32, ball: Option<Vec2>) -> Vec2 {
    let (x, y) = FORMATION[(unum.clamp(1, 11) - 1) as usize];
    let shift = ball.map(|b| b * BALL_SHIFT).unwrap_or(Vec2::ZERO);
    Vec2::new(x, y) + shift
}

/// The policy. `kickable_area` comes from the agent's server parameters.
pub fn decide(state: &pb::State, kickable_area: f64) -> Vec<PlayerAction> {
    let wm = state.world_model.clone().unwrap_or_default();
    let me = wm.self_.unwrap_or_default();
    let ball = wm.ball.unwrap_or_default();
    let my_pos = vec(&me.pos);
    let ball_pos = vec(&ball.pos);
    let ball_known = ball.seen && ball.confidence > 0.0;

    // only a ball seen this cycle counts as kickable
    let fresh = ball_known && ball.last_seen_cycle == wm.cycle as i64;
    if fresh && me.pos_valid && my_pos.dist(ball_pos) <= kickable_area {
        return vec![PlayerAction::BodySmartKick {
            target: Vec2::new(SHOT_TARGET.0, SHOT_TARGET.1),
            first_speed: SHOT_SPEED,
            speed_thr: 0.0,
            max_steps: 1,
        }];
    }
    let fastest = wm.intercept.map(|i| i.fastest_our_unum).unwrap_or(0);
    if fastest != 0 && fastest == me.unum {
        return vec![PlayerAction::BodyInterceptBall, PlayerAction::NeckTurnToBall];
    }
    let home = formation_point(me.unum, ball_known.then_some(ball_pos));
    vec![
        PlayerAction::BodyGoToPoint { target: home, dist_thr: HOME_DIST_THR, max_power: HOME_DASH_POWER },
        PlayerAction::NeckTurnToBall,
    ]
}

/// Serves [`decide`] for every registered agent. State is keyed by register id.
#[derive(Default)]
pub struct BuiltinPlaymaker {
    params: Mutex<HashMap<i32, SimParams>>,
    recorder: Option<Recorder>,
}

impl BuiltinPlaymaker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_recorder(recorder: Recorder) -> Self {
        BuiltinPlaymaker { recorder: Some(recorder), ..Self::default() }
    }

    pub fn recorder(&self) -> Option<&Recorder> {
        self.recorder.as_ref()
    }

    fn kickable_area(&self, register_id: i32) -> f64 {
        let params = self.params.lock().expect("params lock");
        params.get(&register_id).map(SimParams::kickable_area).unwrap_or_else(|| SimParams::default().kickable_area())
    }
}

#[tonic::async_trait]
impl GameHandler for BuiltinPlaymaker {
    async fn get_player_actions(&self, state: pb::State) -> Result<pb::PlayerActions, Status> {
        let actions = marshal_player_actions(&decide(&state, self.kickable_area(state.register_id)));
        if let Some(r) = &self.recorder {
            r.offer(&state, &actions);
        }
        Ok(actions)
    }

    async fn send_server_params(&self, msg: pb::ServerParam) -> Result<(), Status> {
        let (params, _) = sim_params_from_msg(&msg).map_err(|e| Status::invalid_argument(e.to_string()))?;
        self.params.lock().expect("params lock").insert(msg.register_id, params);
        Ok(())
    }
}
