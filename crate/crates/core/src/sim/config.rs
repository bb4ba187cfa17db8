use serde::{Deserialize, Serialize};

use crate::codec::{ParamMap, ParamValue};

/// Physical constants and rule timings of the simulation. Defaults follow the
/// standard server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimParams {
    pub pitch_half_length: f64,
    pub pitch_half_width: f64,
    pub goal_half_width: f64,
    pub cycle_ms: u32,
    pub half_cycles: u32,
    pub ball_decay: f64,
    pub player_decay: f64,
    pub dash_power_rate: f64,
    pub kick_power_rate: f64,
    pub player_speed_max: f64,
    pub ball_speed_max: f64,
    pub player_size: f64,
    pub ball_size: f64,
    pub kickable_margin: f64,
    pub inertia_moment: f64,
    pub visible_angle: f64,
    pub quantize_step: f64,
    pub stamina_max: f64,
    pub stamina_recovery: f64,
    pub max_neck_angle: f64,
    /// Cycles a dead ball stays frozen before play resumes on its own.
    pub dead_ball_timeout: u32,
    /// Cycles spent in before_kick_off before the left side kicks off.
    pub kickoff_delay: u32,
    /// Cycles the goal_* mode lasts before the restart kickoff.
    pub goal_pause: u32,
    pub player_types: u32,
    pub subs_max: u32,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams {
            pitch_half_length: 52.5,
            pitch_half_width: 34.0,
            goal_half_width: 7.01,
            cycle_ms: 100,
            half_cycles: 3000,
            ball_decay: 0.94,
            player_decay: 0.4,
            dash_power_rate: 0.006,
            kick_power_rate: 0.027,
            player_speed_max: 1.05,
            ball_speed_max: 3.0,
            player_size: 0.3,
            ball_size: 0.085,
            kickable_margin: 0.7,
            inertia_moment: 5.0,
            visible_angle: 90.0,
            quantize_step: 0.1,
            stamina_max: 8000.0,
            stamina_recovery: 45.0,
            max_neck_angle: 90.0,
            dead_ball_timeout: 100,
            kickoff_delay: 20,
            goal_pause: 20,
            player_types: 1,
            subs_max: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("parameter `{0}` is out of range")]
    OutOfRange(&'static str),
    #[error("parameter `{0}` is missing or not numeric")]
    Missing(String),
}

macro_rules! float_params {
    ($m:ident) => {
        $m!(pitch_half_length, pitch_half_width, goal_half_width, ball_decay, player_decay,
            dash_power_rate, kick_power_rate, player_speed_max, ball_speed_max, player_size,
            ball_size, kickable_margin, inertia_moment, visible_angle, quantize_step, stamina_max,
            stamina_recovery, max_neck_angle)
    };
}

macro_rules! int_params {
    ($m:ident) => {
        $m!(cycle_ms, half_cycles, dead_ball_timeout, kickoff_delay, goal_pause, player_types, subs_max)
    };
}

impl SimParams {
    /// Player size + ball size + kickable margin.
    pub fn kickable_area(&self) -> f64 {
        self.player_size + self.ball_size + self.kickable_margin
    }

    /// Maximum acceleration one full-power dash gives an agent with effort 1.
    pub fn dash_accel_gain(&self) -> f64 {
        100.0 * self.dash_power_rate
    }

    pub fn total_cycles(&self) -> u32 {
        2 * self.half_cycles
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let unit = |name, v: f64| if v > 0.0 && v < 1.0 { Ok(()) } else { Err(ConfigError::OutOfRange(name)) };
        let pos = |name, v: f64| if v > 0.0 && v.is_finite() { Ok(()) } else { Err(ConfigError::OutOfRange(name)) };
        unit("ball_decay", self.ball_decay)?;
        unit("player_decay", self.player_decay)?;
        unit("dash_power_rate", self.dash_power_rate)?;
        unit("kick_power_rate", self.kick_power_rate)?;
        pos("pitch_half_length", self.pitch_half_length)?;
        pos("pitch_half_width", self.pitch_half_width)?;
        pos("goal_half_width", self.goal_half_width)?;
        pos("player_speed_max", self.player_speed_max)?;
        pos("ball_speed_max", self.ball_speed_max)?;
        pos("player_size", self.player_size)?;
        pos("ball_size", self.ball_size)?;
        pos("kickable_margin", self.kickable_margin)?;
        pos("visible_angle", self.visible_angle)?;
        pos("quantize_step", self.quantize_step)?;
        pos("stamina_max", self.stamina_max)?;
        pos("max_neck_angle", self.max_neck_angle)?;
        if self.inertia_moment < 0.0 || !self.inertia_moment.is_finite() {
            return Err(ConfigError::OutOfRange("inertia_moment"));
        }
        if self.stamina_recovery < 0.0 || !self.stamina_recovery.is_finite() {
            return Err(ConfigError::OutOfRange("stamina_recovery"));
        }
        if self.visible_angle > 360.0 {
            return Err(ConfigError::OutOfRange("visible_angle"));
        }
        if self.cycle_ms == 0 {
            return Err(ConfigError::OutOfRange("cycle_ms"));
        }
        if self.half_cycles == 0 {
            return Err(ConfigError::OutOfRange("half_cycles"));
        }
        if self.player_types == 0 {
            return Err(ConfigError::OutOfRange("player_types"));
        }
        Ok(())
    }

    /// Key/value form sent to agents in `server_param`.
    pub fn to_param_map(&self) -> ParamMap {
        let mut map = ParamMap::new();
        macro_rules! put_f { ($($k:ident),*) => { $( map.insert(stringify!($k).into(), ParamValue::Num(self.$k)); )* } }
        macro_rules! put_i { ($($k:ident),*) => { $( map.insert(stringify!($k).into(), ParamValue::Num(self.$k as f64)); )* } }
        float_params!(put_f);
        int_params!(put_i);
        map.insert("kickable_area".into(), ParamValue::Num(self.kickable_area()));
        map
    }

    /// Inverse of [`SimParams::to_param_map`]. Keys the map does not carry keep
    /// their defaults; unknown keys are ignored.
    pub fn from_param_map(map: &ParamMap) -> Result<SimParams, ConfigError> {
        let mut p = SimParams::default();
        let num = |k: &str| -> Result<Option<f64>, ConfigError> {
            match map.get(k) {
                None => Ok(None),
                Some(ParamValue::Num(v)) => Ok(Some(*v)),
                Some(ParamValue::Text(_)) => Err(ConfigError::Missing(k.to_string())),
            }
        };
        macro_rules! get_f { ($($k:ident),*) => { $( if let Some(v) = num(stringify!($k))? { p.$k = v; } )* } }
        macro_rules! get_i { ($($k:ident),*) => { $(
            if let Some(v) = num(stringify!($k))? {
                if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
                    return Err(ConfigError::OutOfRange(stringify!($k)));
                }
                p.$k = v as u32;
            }
        )* } }
        float_params!(get_f);
        int_params!(get_i);
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservationMode {
    #[default]
    See,
    FullState,
}

/// Simulation inputs that determine a match: physics, observation fidelity and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub params: SimParams,
    pub observation_mode: ObservationMode,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { params: SimParams::default(), observation_mode: ObservationMode::See, seed: 1 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let p = SimParams::default();
        p.validate().unwrap();
        assert!((p.kickable_area() - 1.085).abs() < 1e-12);
        assert_eq!(p.total_cycles(), 6000);
    }

    #[test]
    fn param_map_round_trips() {
        let mut p = SimParams::default();
        p.ball_decay = 0.9;
        p.player_types = 7;
        assert_eq!(SimParams::from_param_map(&p.to_param_map()).unwrap(), p);
    }

    #[test]
    fn rejects_bad_rates() {
        let mut p = SimParams::default();
        p.ball_decay = 1.0;
        assert_eq!(p.validate(), Err(ConfigError::OutOfRange("ball_decay")));
        let mut map = SimParams::default().to_param_map();
        map.insert("half_cycles".into(), ParamValue::Num(1.5));
        assert!(SimParams::from_param_map(&map).is_err());
    }
}
