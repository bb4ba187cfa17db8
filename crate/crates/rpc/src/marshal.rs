//! World model to `State` and back.

use std::collections::BTreeMap;

use cls_core::model::{InterceptTable, ModelConfig, PoseEstimate, Reach, TrackedKind, TrackedObject, WorldState};
use cls_core::{AgentType, Side, Vec2};

use crate::actions::SchemaViolation;
use crate::convert::{agent_type_to_pb, finite, play_mode_from_pb, play_mode_to_pb, side_from_pb, side_to_pb};
use crate::pb;

const TEAM_SIZE: u8 = 11;

/// Who is calling; echoed in every request.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentMeta {
    pub agent_type: AgentType,
    pub register_id: i32,
    pub team_name: String,
    /// 0 for coaches and trainers.
    pub unum: u8,
    pub side: Option<Side>,
}

impl AgentMeta {
    pub fn new(agent_type: AgentType, team_name: impl Into<String>, side: Option<Side>, unum: u8) -> Self {
        AgentMeta {
            agent_type,
            register_id: crate::register_id(agent_type, side, unum),
            team_name: team_name.into(),
            unum,
            side,
        }
    }
}

fn cycles_to_pb(r: Reach) -> i32 {
    r.cycles().map_or(-1, |c| c as i32)
}

fn last_seen(c: Option<u32>) -> i64 {
    c.map_or(-1, i64::from)
}

fn player_msg(unum: u8, obj: Option<&TrackedObject>) -> pb::PlayerMsg {
    match obj.filter(|o| o.seen()) {
        Some(o) => pb::PlayerMsg {
            unum: unum as u32,
            pos: Some(o.pos.into()),
            vel: Some(o.vel.into()),
            body_dir: o.body_dir.unwrap_or(0.0),
            body_known: o.body_dir.is_some(),
            confidence: o.confidence,
            seen: true,
            last_seen_cycle: last_seen(o.last_seen_cycle),
        },
        None => pb::PlayerMsg {
            unum: unum as u32,
            pos: Some(Vec2::ZERO.into()),
            vel: Some(Vec2::ZERO.into()),
            last_seen_cycle: -1,
            ..Default::default()
        },
    }
}

/// The fixed-shape world view carried in `State`.
pub fn marshal_world(ws: &WorldState) -> pb::WorldModelMsg {
    let me = ws.self_as_tracked();
    let teammates = (1..=TEAM_SIZE)
        .map(|u| {
            if u == ws.unum {
                let mut m = player_msg(u, me.as_ref());
                m.seen = ws.self_pose.valid;
                if !m.seen {
                    m.confidence = 0.0;
                }
                m
            } else {
                player_msg(u, ws.teammates.get(&u))
            }
        })
        .collect();
    let opponents = (1..=TEAM_SIZE).map(|u| player_msg(u, ws.opponents.get(&u))).collect();
    let it = &ws.intercept;
    pb::WorldModelMsg {
        cycle: ws.cycle,
        our_team_name: ws.team_names.0.clone().unwrap_or_default(),
        their_team_name: ws.team_names.1.clone().unwrap_or_default(),
        our_side: side_to_pb(ws.our_side) as i32,
        self_: Some(pb::SelfMsg {
            unum: ws.unum as u32,
            pos: Some(ws.self_pose.pos.into()),
            vel: Some(ws.self_pose.vel.into()),
            body_dir: ws.self_pose.body_dir,
            neck_dir: ws.self_pose.neck_dir,
            stamina: ws.stamina,
            effort: ws.effort,
            pos_error: ws.self_pose.pos_error,
            pos_valid: ws.self_pose.valid,
        }),
        ball: Some(pb::BallMsg {
            pos: Some(ws.ball.pos.into()),
            vel: Some(ws.ball.vel.into()),
            confidence: if ws.ball.seen() { ws.ball.confidence } else { 0.0 },
            seen: ws.ball.seen(),
            last_seen_cycle: last_seen(ws.ball.last_seen_cycle),
        }),
        teammates,
        opponents,
        play_mode: Some(play_mode_to_pb(ws.play_mode)),
        our_score: ws.scores.0,
        their_score: ws.scores.1,
        intercept: Some(pb::InterceptMsg {
            self_cycles: if ws.is_player() { cycles_to_pb(it.self_cycles(ws.unum)) } else { -1 },
            fastest_our_unum: it.fastest_ours.map_or(0, |f| f.0 as u32),
            fastest_our_cycles: it.fastest_ours.map_or(-1, |f| f.1 as i32),
            fastest_opp_unum: it.fastest_theirs.map_or(0, |f| f.0 as u32),
            fastest_opp_cycles: it.fastest_theirs.map_or(-1, |f| f.1 as i32),
        }),
    }
}

/// Builds the per-cycle request. `full_world_model` is present exactly when
/// the estimate came from full-state observations.
pub fn marshal_state(ws: &WorldState, meta: &AgentMeta, need_preprocess: bool) -> pb::State {
    let world = marshal_world(ws);
    pb::State {
        agent_type: agent_type_to_pb(meta.agent_type) as i32,
        register_id: meta.register_id,
        full_world_model: ws.full_state.then(|| world.clone()),
        world_model: Some(world),
        need_preprocess,
    }
}

fn vec_or_zero(v: &Option<pb::Vector2>, name: &'static str) -> Result<Vec2, SchemaViolation> {
    let v = v.map(Vec2::from).unwrap_or(Vec2::ZERO);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SchemaViolation::NonFinite(name))
    }
}

fn last_seen_from(c: i64) -> Option<u32> {
    u32::try_from(c).ok()
}

fn tracked_from(kind: TrackedKind, m: &pb::PlayerMsg) -> Result<TrackedObject, SchemaViolation> {
    let pos = vec_or_zero(&m.pos, "player.pos")?;
    Ok(TrackedObject {
        kind,
        pos,
        vel: vec_or_zero(&m.vel, "player.vel")?,
        body_dir: m.body_known.then_some(finite(m.body_dir, "player.body_dir")?),
        confidence: finite(m.confidence, "player.confidence")?,
        last_seen_cycle: last_seen_from(m.last_seen_cycle),
        last_seen_pos: pos,
    })
}

fn reach_from(c: i32) -> Reach {
    u32::try_from(c).map_or(Reach::Unreachable, Reach::Cycles)
}

/// Rebuilds a world estimate from its wire form. Only the carried fields are
/// restored; the rest keep their defaults.
pub fn unmarshal_world(m: &pb::WorldModelMsg, config: ModelConfig) -> Result<WorldState, SchemaViolation> {
    let nonempty = |s: &str| (!s.is_empty()).then(|| s.to_string());
    let mut ws = WorldState::new(config, nonempty(&m.our_team_name));
    ws.cycle = m.cycle;
    ws.team_names.1 = nonempty(&m.their_team_name);
    ws.our_side = side_from_pb(m.our_side)?;
    let me = m.self_.as_ref().ok_or(SchemaViolation::MissingField("self"))?;
    ws.unum = u8::try_from(me.unum).ok().filter(|u| *u <= TEAM_SIZE).ok_or(SchemaViolation::Unum(me.unum))?;
    ws.self_pose = PoseEstimate {
        pos: vec_or_zero(&me.pos, "self.pos")?,
        vel: vec_or_zero(&me.vel, "self.vel")?,
        body_dir: finite(me.body_dir, "self.body_dir")?,
        neck_dir: finite(me.neck_dir, "self.neck_dir")?,
        pos_error: finite(me.pos_error, "self.pos_error")?,
        valid: me.pos_valid,
        age: 0,
    };
    ws.stamina = finite(me.stamina, "self.stamina")?;
    ws.effort = finite(me.effort, "self.effort")?;

    let ball = m.ball.as_ref().ok_or(SchemaViolation::MissingField("ball"))?;
    if ball.seen {
        let pos = vec_or_zero(&ball.pos, "ball.pos")?;
        ws.ball = TrackedObject {
            kind: TrackedKind::Ball,
            pos,
            vel: vec_or_zero(&ball.vel, "ball.vel")?,
            body_dir: None,
            confidence: finite(ball.confidence, "ball.confidence")?,
            last_seen_cycle: last_seen_from(ball.last_seen_cycle),
            last_seen_pos: pos,
        };
    }

    let frame = ws.frame();
    let mut teammates = BTreeMap::new();
    for p in m.teammates.iter().filter(|p| p.seen && p.unum != me.unum) {
        let unum = u8::try_from(p.unum).ok().filter(|u| (1..=TEAM_SIZE).contains(u)).ok_or(SchemaViolation::Unum(p.unum))?;
        teammates.insert(unum, tracked_from(TrackedKind::Player { side: frame, unum }, p)?);
    }
    let mut opponents = BTreeMap::new();
    for p in m.opponents.iter().filter(|p| p.seen) {
        let unum = u8::try_from(p.unum).ok().filter(|u| (1..=TEAM_SIZE).contains(u)).ok_or(SchemaViolation::Unum(p.unum))?;
        opponents.insert(unum, tracked_from(TrackedKind::Player { side: frame.opposite(), unum }, p)?);
    }
    ws.teammates = teammates;
    ws.opponents = opponents;

    ws.play_mode = play_mode_from_pb(m.play_mode.as_ref().ok_or(SchemaViolation::MissingField("play_mode"))?)?;
    ws.scores = (m.our_score, m.their_score);

    let it = m.intercept.clone().unwrap_or_default();
    let mut table = InterceptTable { ball_known: ws.ball.seen(), ..InterceptTable::default() };
    if ws.unum > 0 {
        table.ours.insert(ws.unum, reach_from(it.self_cycles));
    }
    let fastest = |unum: u32, cycles: i32| -> Result<Option<(u8, u32)>, SchemaViolation> {
        if unum == 0 {
            return Ok(None);
        }
        let u = u8::try_from(unum).ok().filter(|u| *u <= TEAM_SIZE).ok_or(SchemaViolation::Unum(unum))?;
        Ok(u32::try_from(cycles).ok().map(|c| (u, c)))
    };
    table.fastest_ours = fastest(it.fastest_our_unum, it.fastest_our_cycles)?;
    table.fastest_theirs = fastest(it.fastest_opp_unum, it.fastest_opp_cycles)?;
    ws.intercept = table;
    ws.full_state = false;
    Ok(ws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use cls_core::PlayMode;

    #[test]
    fn fresh_world_marshals_to_the_empty_view() {
        let ws = WorldState::new(ModelConfig::default(), Some("Alpha".into()));
        let meta = AgentMeta::new(AgentType::Player, "Alpha", None, 0);
        let st = marshal_state(&ws, &meta, false);
        let w = st.world_model.as_ref().unwrap();
        assert_eq!(w.cycle, 0);
        assert_eq!(w.ball.as_ref().unwrap().confidence, 0.0);
        assert!(!w.ball.as_ref().unwrap().seen);
        assert_eq!(w.teammates.len(), 11);
        assert_eq!(w.opponents.len(), 11);
        assert!(w.teammates.iter().chain(&w.opponents).all(|p| !p.seen && p.confidence == 0.0));
        assert!(st.full_world_model.is_none());
        assert_eq!(w.intercept.as_ref().unwrap().fastest_our_unum, 0);
    }

    #[test]
    fn full_state_world_is_duplicated() {
        let mut ws = WorldState::new(ModelConfig::default(), Some("Alpha".into()));
        ws.full_state = true;
        ws.play_mode = PlayMode::PlayOn;
        let st = marshal_state(&ws, &AgentMeta::new(AgentType::Coach, "Alpha", Some(Side::Left), 0), true);
        assert_eq!(st.full_world_model, st.world_model);
        assert!(st.need_preprocess);
        assert_eq!(st.register_id, 12);
    }
}
