use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::codec::{ObjectKind, ObservedObject, ServerMessage};
use crate::geom::{normalize_angle, Vec2};
use crate::landmarks::LandmarkMap;
use crate::sim::{PlayerState, SimParams, Snapshot};
use crate::types::{PlayMode, Side};

use super::{
    build_intercept_table, localize, InterceptTable, LocalizeError, ModelConfig, PoseEstimate, TrackedKind,
    TrackedObject,
};

/// Sender name the server uses for referee announcements.
pub const REFEREE: &str = "referee";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IntegrateError {
    #[error("message for cycle {got} arrived after cycle {current}")]
    StaleMessage { current: u32, got: u32 },
}

/// One agent's estimate of the game, in the team-normalized frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub config: ModelConfig,
    pub cycle: u32,
    /// `None` until the server assigns a side. Trainers stay `None` and see
    /// the left team's frame.
    pub our_side: Option<Side>,
    /// 0 for coaches and trainers.
    pub unum: u8,
    /// (ours, theirs)
    pub team_names: (Option<String>, Option<String>),
    pub self_pose: PoseEstimate,
    pub stamina: f64,
    pub effort: f64,
    pub ball: TrackedObject,
    /// Keyed by unum. Never contains the agent itself.
    pub teammates: BTreeMap<u8, TrackedObject>,
    pub opponents: BTreeMap<u8, TrackedObject>,
    /// As announced by the server, with absolute side letters.
    pub play_mode: PlayMode,
    /// (ours, theirs)
    pub scores: (u32, u32),
    pub intercept: InterceptTable,
    /// Non-referee messages heard this cycle: (sender, text).
    pub heard: Vec<(String, String)>,
    pub stale_messages: u64,
    /// The most recent observation was a full-state snapshot.
    pub full_state: bool,
    /// Last sensed speed as (magnitude, direction relative to face).
    sensed_speed: Option<(f64, f64)>,
}

impl WorldState {
    pub fn new(config: ModelConfig, team_name: Option<String>) -> Self {
        WorldState {
            stamina: config.sim.stamina_max,
            config,
            cycle: 0,
            our_side: None,
            unum: 0,
            team_names: (team_name, None),
            self_pose: PoseEstimate::default(),
            effort: 1.0,
            ball: TrackedObject::unseen(TrackedKind::Ball),
            teammates: BTreeMap::new(),
            opponents: BTreeMap::new(),
            play_mode: PlayMode::BeforeKickOff,
            scores: (0, 0),
            intercept: InterceptTable::default(),
            heard: Vec::new(),
            stale_messages: 0,
            full_state: false,
            sensed_speed: None,
        }
    }

    /// Side whose frame the estimates are expressed in.
    pub fn frame(&self) -> Side {
        self.our_side.unwrap_or(Side::Left)
    }

    pub fn is_player(&self) -> bool {
        self.unum > 0
    }

    fn to_frame(&self, v: Vec2) -> Vec2 {
        v * self.frame().sign()
    }

    fn angle_to_frame(&self, deg: f64) -> f64 {
        match self.frame() {
            Side::Left => deg,
            Side::Right => normalize_angle(deg + 180.0),
        }
    }

    /// The agent as a tracked player, for intercept computations.
    pub fn self_as_tracked(&self) -> Option<TrackedObject> {
        if !self.is_player() {
            return None;
        }
        Some(TrackedObject {
            kind: TrackedKind::Player { side: self.frame(), unum: self.unum },
            pos: self.self_pose.pos,
            vel: self.self_pose.vel,
            body_dir: Some(self.self_pose.body_dir),
            confidence: if self.self_pose.valid { 1.0 } else { 0.0 },
            last_seen_cycle: Some(self.cycle),
            last_seen_pos: self.self_pose.pos,
        })
    }

    /// Ball is within kickable distance of the agent.
    pub fn ball_kickable(&self) -> bool {
        self.ball.seen() && self.ball.pos.dist(self.self_pose.pos) <= self.config.sim.kickable_area()
    }

    pub fn refresh_intercept(&mut self) {
        self.intercept = build_intercept_table(self);
    }

    /// Folds one server message into the estimate.
    pub fn integrate(&mut self, msg: &ServerMessage) -> Result<(), IntegrateError> {
        if let Some(c) = msg.cycle() {
            if c < self.cycle {
                self.stale_messages += 1;
                return Err(IntegrateError::StaleMessage { current: self.cycle, got: c });
            }
            self.advance_to(c);
        }
        match msg {
            ServerMessage::Init { side, unum, play_mode } => {
                self.our_side = Some(*side);
                self.unum = *unum;
                self.play_mode = *play_mode;
            }
            ServerMessage::ServerParam(map) => {
                if let Ok(p) = SimParams::from_param_map(map) {
                    self.config.sim = p;
                }
            }
            ServerMessage::SenseBody { stamina, effort, speed_mag, speed_dir, neck_dir, .. } => {
                self.stamina = *stamina;
                self.effort = *effort;
                self.self_pose.neck_dir = *neck_dir;
                self.sensed_speed = Some((*speed_mag, *speed_dir));
                self.apply_sensed_speed();
            }
            ServerMessage::See { objects, .. } => self.integrate_see(objects),
            ServerMessage::FullState(snap) => self.integrate_full_state(snap),
            ServerMessage::Hear { sender, text, .. } => self.integrate_hear(sender, text),
            ServerMessage::PlayerParam(_)
            | ServerMessage::PlayerType { .. }
            | ServerMessage::Error(_)
            | ServerMessage::Ok(_) => {}
        }
        Ok(())
    }

    /// Moves the estimate forward to `cycle`, extrapolating every tracked
    /// object and decaying its confidence.
    pub fn advance_to(&mut self, cycle: u32) {
        if cycle <= self.cycle {
            return;
        }
        let elapsed = cycle - self.cycle;
        let conf = self.config.confidence_decay;
        let (ball_decay, player_decay) = (self.config.sim.ball_decay, self.config.sim.player_decay);
        let step = |o: &mut TrackedObject, decay: f64| {
            if !o.seen() {
                return;
            }
            for _ in 0..elapsed {
                o.confidence *= conf;
                o.pos = o.pos + o.vel;
                o.vel = o.vel * decay;
            }
        };
        step(&mut self.ball, ball_decay);
        for o in self.teammates.values_mut().chain(self.opponents.values_mut()) {
            step(o, player_decay);
        }
        self.cycle = cycle;
        self.heard.clear();
    }

    fn apply_sensed_speed(&mut self) {
        if let Some((mag, dir)) = self.sensed_speed {
            self.self_pose.vel = Vec2::polar(mag, self.self_pose.face_dir() + dir);
        }
    }

    fn integrate_see(&mut self, objects: &[ObservedObject]) {
        self.full_state = false;
        let decay = self.config.sim.player_decay;
        let mut prior = self.self_pose;
        // the sensed velocity is post-decay; the movement into this cycle was larger
        if decay > 0.0 {
            prior.vel = prior.vel * (1.0 / decay);
        }
        let map = LandmarkMap::standard();
        let pose = match localize(objects, map, self.frame(), &prior, self.config.dead_reckon_horizon) {
            Ok(p) => p,
            Err(LocalizeError::NoLandmarks { dead_reckoned }) => dead_reckoned,
        };
        self.self_pose = PoseEstimate { vel: self.self_pose.vel, ..pose };
        self.apply_sensed_speed();

        let face = self.self_pose.face_dir();
        let me = self.self_pose.pos;
        let cycle = self.cycle;
        let globalize = |o: &ObservedObject| me + Vec2::polar(o.distance, face + o.direction);
        let (ball_decay, player_decay) = (self.config.sim.ball_decay, self.config.sim.player_decay);

        for o in objects {
            match &o.kind {
                ObjectKind::Ball => sighting(&mut self.ball, globalize(o), cycle, ball_decay),
                ObjectKind::Player { team: Some(team), unum: Some(unum) } => {
                    let ours = match &self.team_names.0 {
                        Some(name) => name == team,
                        None => false,
                    };
                    if ours && *unum == self.unum {
                        continue;
                    }
                    if !ours && self.team_names.1.is_none() {
                        self.team_names.1 = Some(team.clone());
                    }
                    let side = if ours { self.frame() } else { self.frame().opposite() };
                    let kind = TrackedKind::Player { side, unum: *unum };
                    let table = if ours { &mut self.teammates } else { &mut self.opponents };
                    let tracked = table.entry(*unum).or_insert_with(|| TrackedObject::unseen(kind));
                    sighting(tracked, globalize(o), cycle, player_decay);
                }
                _ => {}
            }
        }
    }

    fn tracked_from_state(&self, p: &PlayerState) -> TrackedObject {
        let pos = self.to_frame(p.pos);
        TrackedObject {
            kind: TrackedKind::Player { side: p.side, unum: p.unum },
            pos,
            vel: self.to_frame(p.vel),
            body_dir: Some(self.angle_to_frame(p.body_dir)),
            confidence: 1.0,
            last_seen_cycle: Some(self.cycle),
            last_seen_pos: pos,
        }
    }

    fn integrate_full_state(&mut self, snap: &Snapshot) {
        self.full_state = true;
        let frame = self.frame();
        self.play_mode = snap.play_mode;
        self.scores = match frame {
            Side::Left => snap.scores,
            Side::Right => (snap.scores.1, snap.scores.0),
        };
        self.team_names = (
            snap.teams.name(frame).map(str::to_owned).or(self.team_names.0.take()),
            snap.teams.name(frame.opposite()).map(str::to_owned).or(self.team_names.1.take()),
        );

        let ball_pos = self.to_frame(snap.ball.pos);
        self.ball = TrackedObject {
            kind: TrackedKind::Ball,
            pos: ball_pos,
            vel: self.to_frame(snap.ball.vel),
            body_dir: None,
            confidence: 1.0,
            last_seen_cycle: Some(self.cycle),
            last_seen_pos: ball_pos,
        };

        self.teammates.clear();
        self.opponents.clear();
        for p in &snap.players {
            if p.side == frame && p.unum == self.unum && self.is_player() {
                self.self_pose = PoseEstimate {
                    pos: self.to_frame(p.pos),
                    vel: self.to_frame(p.vel),
                    body_dir: self.angle_to_frame(p.body_dir),
                    neck_dir: p.neck_dir,
                    pos_error: 0.0,
                    valid: true,
                    age: 0,
                };
                self.stamina = p.stamina;
                self.effort = p.effort;
                self.sensed_speed = None;
                continue;
            }
            let tracked = self.tracked_from_state(p);
            if p.side == frame {
                self.teammates.insert(p.unum, tracked);
            } else {
                self.opponents.insert(p.unum, tracked);
            }
        }
    }

    fn integrate_hear(&mut self, sender: &str, text: &str) {
        if sender != REFEREE {
            self.heard.push((sender.to_owned(), text.to_owned()));
            return;
        }
        // goals are announced as goal_<side>_<that side's new score>
        if let Some((mode, score)) = text.rsplit_once('_') {
            if let (Ok(PlayMode::Goal(side)), Ok(n)) = (mode.parse::<PlayMode>(), score.parse::<u32>()) {
                self.play_mode = PlayMode::Goal(side);
                self.ball_to_center_spot();
                if side == self.frame() {
                    self.scores.0 = n;
                } else {
                    self.scores.1 = n;
                }
                return;
            }
        }
        match text.parse::<PlayMode>() {
            Ok(mode) => {
                if matches!(mode, PlayMode::KickOff(_)) {
                    self.ball_to_center_spot();
                }
                self.play_mode = mode;
            }
            Err(_) => self.heard.push((sender.to_owned(), text.to_owned())),
        }
    }

    /// After a goal and at kick-off the rules put the ball on the centre spot,
    /// wherever it was last seen.
    fn ball_to_center_spot(&mut self) {
        if self.ball.seen() {
            self.ball.pos = Vec2::ZERO;
            self.ball.vel = Vec2::ZERO;
            self.ball.confidence = 1.0;
        }
    }
}

/// Records a direct observation. Velocity comes from differencing with the
/// previous cycle's sighting and follows the simulation's post-decay convention.
fn sighting(o: &mut TrackedObject, global: Vec2, cycle: u32, decay: f64) {
    match o.last_seen_cycle {
        Some(prev) if prev + 1 == cycle => o.vel = (global - o.last_seen_pos) * decay,
        Some(_) => {}
        None => o.vel = Vec2::ZERO,
    }
    o.pos = global;
    o.last_seen_pos = global;
    o.last_seen_cycle = Some(cycle);
    o.confidence = 1.0;
}
