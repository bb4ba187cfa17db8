//! Parameter messages forwarded from the simulation server to the playmaker.

use cls_core::codec::{ParamMap, ParamValue};
use cls_core::sim::{ConfigError, SimParams};

use crate::pb;

/// `observation_mode` value announcing full-state observations.
pub const FULL_STATE_MODE: &str = "full_state";

pub fn server_param_msg(p: &SimParams, full_state: bool, register_id: i32) -> pb::ServerParam {
    pb::ServerParam {
        register_id,
        pitch_half_length: p.pitch_half_length,
        pitch_half_width: p.pitch_half_width,
        goal_half_width: p.goal_half_width,
        cycle_ms: p.cycle_ms,
        half_cycles: p.half_cycles,
        ball_decay: p.ball_decay,
        player_decay: p.player_decay,
        dash_power_rate: p.dash_power_rate,
        kick_power_rate: p.kick_power_rate,
        player_speed_max: p.player_speed_max,
        ball_speed_max: p.ball_speed_max,
        player_size: p.player_size,
        ball_size: p.ball_size,
        kickable_margin: p.kickable_margin,
        inertia_moment: p.inertia_moment,
        visible_angle: p.visible_angle,
        quantize_step: p.quantize_step,
        stamina_max: p.stamina_max,
        stamina_recovery: p.stamina_recovery,
        max_neck_angle: p.max_neck_angle,
        dead_ball_timeout: p.dead_ball_timeout,
        kickoff_delay: p.kickoff_delay,
        goal_pause: p.goal_pause,
        player_types: p.player_types,
        subs_max: p.subs_max,
        full_state,
    }
}

/// Inverse of [`server_param_msg`]; the result is validated.
pub fn sim_params_from_msg(m: &pb::ServerParam) -> Result<(SimParams, bool), ConfigError> {
    let p = SimParams {
        pitch_half_length: m.pitch_half_length,
        pitch_half_width: m.pitch_half_width,
        goal_half_width: m.goal_half_width,
        cycle_ms: m.cycle_ms,
        half_cycles: m.half_cycles,
        ball_decay: m.ball_decay,
        player_decay: m.player_decay,
        dash_power_rate: m.dash_power_rate,
        kick_power_rate: m.kick_power_rate,
        player_speed_max: m.player_speed_max,
        ball_speed_max: m.ball_speed_max,
        player_size: m.player_size,
        ball_size: m.ball_size,
        kickable_margin: m.kickable_margin,
        inertia_moment: m.inertia_moment,
        visible_angle: m.visible_angle,
        quantize_step: m.quantize_step,
        stamina_max: m.stamina_max,
        stamina_recovery: m.stamina_recovery,
        max_neck_angle: m.max_neck_angle,
        dead_ball_timeout: m.dead_ball_timeout,
        kickoff_delay: m.kickoff_delay,
        goal_pause: m.goal_pause,
        player_types: m.player_types,
        subs_max: m.subs_max,
    };
    p.validate()?;
    Ok((p, m.full_state))
}

/// Reads a captured `server_param` map.
pub fn sim_params_from_map(map: &ParamMap) -> Result<(SimParams, bool), ConfigError> {
    let full = matches!(map.get("observation_mode"), Some(ParamValue::Text(t)) if t == FULL_STATE_MODE);
    Ok((SimParams::from_param_map(map)?, full))
}

fn num(map: &ParamMap, key: &str, default: f64) -> f64 {
    map.get(key).and_then(ParamValue::as_f64).unwrap_or(default)
}

pub fn player_param_msg(map: &ParamMap, register_id: i32) -> pb::PlayerParam {
    pb::PlayerParam {
        register_id,
        player_types: num(map, "player_types", 1.0) as u32,
        subs_max: num(map, "subs_max", 0.0) as u32,
        pt_max: num(map, "pt_max", 1.0) as u32,
    }
}

pub fn player_type_msg(id: u32, map: &ParamMap, register_id: i32) -> pb::PlayerType {
    let d = SimParams::default();
    pb::PlayerType {
        register_id,
        id,
        player_speed_max: num(map, "player_speed_max", d.player_speed_max),
        stamina_inc_max: num(map, "stamina_inc_max", d.stamina_recovery),
        player_decay: num(map, "player_decay", d.player_decay),
        inertia_moment: num(map, "inertia_moment", d.inertia_moment),
        dash_power_rate: num(map, "dash_power_rate", d.dash_power_rate),
        player_size: num(map, "player_size", d.player_size),
        kickable_margin: num(map, "kickable_margin", d.kickable_margin),
        kick_rand: num(map, "kick_rand", 0.0),
        effort_max: num(map, "effort_max", 1.0),
        effort_min: num(map, "effort_min", 0.6),
    }
}
