use std::fmt::Write;

use super::error::{DecodeError, EncodeError};
use super::fields::{atom, expect_len, in_range, list, number, unsigned};
use super::number::format_exact;
use super::sexpr::{is_bare_token, parse_sexpr, SExpr};
use crate::geom::Vec2;
use crate::landmarks::{PITCH_HALF_LENGTH, PITCH_HALF_WIDTH, PITCH_MARGIN};
use crate::types::{PlayMode, Side};

pub const MAX_SAY_LEN: usize = 512;
pub const MAX_TEAM_NAME_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MoveTarget {
    Ball,
    Player { side: Side, unum: u8 },
}

/// A client-to-server command.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    /// `team` is `None` for the trainer.
    Init { team: Option<String>, version: u32, goalie: bool },
    Move { x: f64, y: f64 },
    Dash { power: f64, dir: f64 },
    Turn { moment: f64 },
    Kick { power: f64, dir: f64 },
    TurnNeck { moment: f64 },
    Say { text: String },
    /// Trainer-only placement, in global coordinates.
    TrainerMove { target: MoveTarget, x: f64, y: f64, body_dir: Option<f64>, vel: Option<Vec2> },
    ChangeMode(PlayMode),
    /// Trainer-only: restore every player's stamina.
    Recover,
    /// The agent has sent everything it will send for `cycle` (or for the
    /// current cycle when absent). Lets an accelerated server close ticks early.
    Done { cycle: Option<u32> },
    Bye,
}

impl Command {
    /// Body commands are limited to one per agent per cycle.
    pub fn is_body(&self) -> bool {
        matches!(
            self,
            Command::Move { .. } | Command::Dash { .. } | Command::Turn { .. } | Command::Kick { .. }
        )
    }

    pub fn head(&self) -> &'static str {
        match self {
            Command::Init { .. } => "init",
            Command::Move { .. } | Command::TrainerMove { .. } => "move",
            Command::Dash { .. } => "dash",
            Command::Turn { .. } => "turn",
            Command::Kick { .. } => "kick",
            Command::TurnNeck { .. } => "turn_neck",
            Command::Say { .. } => "say",
            Command::ChangeMode(_) => "change_mode",
            Command::Recover => "recover",
            Command::Done { .. } => "done",
            Command::Bye => "bye",
        }
    }

    /// Checks the documented field ranges.
    pub fn validate(&self) -> Result<(), EncodeError> {
        let check = |name: &'static str, v: f64, lo: f64, hi: f64, incl: bool| {
            in_range(name, v, lo, hi, incl)
                .map(|_| ())
                .map_err(|_| EncodeError::OutOfRangeField { name, value: v })
        };
        let pos = |x: f64, y: f64| -> Result<(), EncodeError> {
            check("x", x, -(PITCH_HALF_LENGTH + PITCH_MARGIN), PITCH_HALF_LENGTH + PITCH_MARGIN, true)?;
            check("y", y, -(PITCH_HALF_WIDTH + PITCH_MARGIN), PITCH_HALF_WIDTH + PITCH_MARGIN, true)
        };
        match self {
            Command::Init { team, version, .. } => {
                if let Some(t) = team {
                    if !is_team_name(t) {
                        return Err(EncodeError::InvalidText("team"));
                    }
                }
                check("version", *version as f64, 1.0, 1000.0, true)
            }
            Command::Move { x, y } => pos(*x, *y),
            Command::Dash { power, dir } | Command::Kick { power, dir } => {
                check("power", *power, -100.0, 100.0, true)?;
                check("dir", *dir, -180.0, 180.0, false)
            }
            Command::Turn { moment } | Command::TurnNeck { moment } => {
                check("moment", *moment, -180.0, 180.0, false)
            }
            Command::Say { text } => {
                if text.len() <= MAX_SAY_LEN && text.bytes().all(|b| (0x20..0x7f).contains(&b)) {
                    Ok(())
                } else {
                    Err(EncodeError::InvalidText("text"))
                }
            }
            Command::TrainerMove { target, x, y, body_dir, vel } => {
                pos(*x, *y)?;
                if let MoveTarget::Player { unum, .. } = target {
                    check("unum", *unum as f64, 1.0, 11.0, true)?;
                } else if body_dir.is_some() {
                    return Err(EncodeError::InvalidText("body_dir"));
                }
                if let Some(d) = body_dir {
                    check("body_dir", *d, -180.0, 180.0, false)?;
                }
                // a player's velocity follows its direction on the wire
                if matches!(target, MoveTarget::Player { .. }) && vel.is_some() && body_dir.is_none() {
                    return Err(EncodeError::InvalidText("vel without body_dir"));
                }
                if let Some(v) = vel {
                    check("vx", v.x, -100.0, 100.0, true)?;
                    check("vy", v.y, -100.0, 100.0, true)?;
                }
                Ok(())
            }
            Command::ChangeMode(_) | Command::Recover | Command::Done { .. } | Command::Bye => Ok(()),
        }
    }
}

pub fn is_team_name(s: &str) -> bool {
    s.len() <= MAX_TEAM_NAME_LEN
        && is_bare_token(s)
        && s.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-')
}

/// Canonical text of a command; numbers are written at full precision.
pub fn encode_client_command(cmd: &Command) -> Result<String, EncodeError> {
    cmd.validate()?;
    let x = format_exact;
    let mut out = String::new();
    match cmd {
        Command::Init { team, version, goalie } => {
            out.push_str("(init");
            if let Some(t) = team {
                write!(out, " {t}").unwrap();
            }
            write!(out, " (version {version})").unwrap();
            if *goalie {
                out.push_str(" (goalie)");
            }
            out.push(')');
        }
        Command::Move { x: px, y: py } => write!(out, "(move {} {})", x(*px), x(*py)).unwrap(),
        Command::Dash { power, dir } => write!(out, "(dash {} {})", x(*power), x(*dir)).unwrap(),
        Command::Turn { moment } => write!(out, "(turn {})", x(*moment)).unwrap(),
        Command::Kick { power, dir } => write!(out, "(kick {} {})", x(*power), x(*dir)).unwrap(),
        Command::TurnNeck { moment } => write!(out, "(turn_neck {})", x(*moment)).unwrap(),
        Command::Say { text } => write!(out, "(say {})", SExpr::Quoted(text.clone())).unwrap(),
        Command::TrainerMove { target, x: px, y: py, body_dir, vel } => {
            match target {
                MoveTarget::Ball => out.push_str("(move (ball)"),
                MoveTarget::Player { side, unum } => write!(out, "(move (player {side} {unum})").unwrap(),
            }
            write!(out, " {} {}", x(*px), x(*py)).unwrap();
            if let Some(d) = body_dir {
                write!(out, " {}", x(*d)).unwrap();
            }
            if let Some(v) = vel {
                write!(out, " {} {}", x(v.x), x(v.y)).unwrap();
            }
            out.push(')');
        }
        Command::ChangeMode(m) => write!(out, "(change_mode {m})").unwrap(),
        Command::Recover => out.push_str("(recover)"),
        Command::Done { cycle: None } => out.push_str("(done)"),
        Command::Done { cycle: Some(c) } => write!(out, "(done {c})").unwrap(),
        Command::Bye => out.push_str("(bye)"),
    }
    Ok(out)
}

pub fn decode_client_command(text: &str) -> Result<Command, DecodeError> {
    let expr = parse_sexpr(text)?;
    let cmd = decode_command_expr(&expr)?;
    cmd.validate().map_err(|e| match e {
        EncodeError::OutOfRangeField { name, value } => DecodeError::OutOfRangeField { name, value },
        EncodeError::InvalidText(what) => DecodeError::Malformed(what.to_string()),
    })?;
    Ok(cmd)
}

fn decode_command_expr(expr: &SExpr) -> Result<Command, DecodeError> {
    let items = list(expr, "command")?;
    let head = items
        .first()
        .and_then(SExpr::as_atom)
        .ok_or_else(|| DecodeError::Malformed("command head".into()))?;
    let args = &items[1..];
    let two = |h: &str| -> Result<(f64, f64), DecodeError> {
        expect_len(args, 2, h)?;
        Ok((number(&args[0])?, number(&args[1])?))
    };
    let one = |h: &str| -> Result<f64, DecodeError> {
        expect_len(args, 1, h)?;
        number(&args[0])
    };
    Ok(match head {
        "init" => decode_init(args)?,
        "move" => match args.first() {
            Some(SExpr::List(_)) => decode_trainer_move(args)?,
            _ => {
                let (x, y) = two(head)?;
                Command::Move { x, y }
            }
        },
        "dash" => {
            let (power, dir) = two(head)?;
            Command::Dash { power, dir }
        }
        "kick" => {
            let (power, dir) = two(head)?;
            Command::Kick { power, dir }
        }
        "turn" => Command::Turn { moment: one(head)? },
        "turn_neck" => Command::TurnNeck { moment: one(head)? },
        "say" => {
            expect_len(args, 1, head)?;
            let text = args[0]
                .as_text()
                .ok_or_else(|| DecodeError::Malformed("say text".into()))?;
            Command::Say { text: text.to_string() }
        }
        "change_mode" => {
            expect_len(args, 1, head)?;
            let m = atom(&args[0], "play mode")?;
            Command::ChangeMode(m.parse().map_err(|_| DecodeError::Malformed(format!("play mode {m}")))?)
        }
        "recover" => {
            expect_len(args, 0, head)?;
            Command::Recover
        }
        "done" => match args {
            [] => Command::Done { cycle: None },
            [c] => Command::Done { cycle: Some(unsigned(c)?) },
            _ => return Err(DecodeError::FieldCountMismatch(head.to_string())),
        },
        "bye" => {
            expect_len(args, 0, head)?;
            Command::Bye
        }
        other => return Err(DecodeError::UnknownCommandHead(other.to_string())),
    })
}

fn decode_init(args: &[SExpr]) -> Result<Command, DecodeError> {
    let mut team = None;
    let mut version = None;
    let mut goalie = false;
    for (i, a) in args.iter().enumerate() {
        match a {
            SExpr::Atom(t) if i == 0 => team = Some(t.clone()),
            SExpr::List(opt) => match opt.first().and_then(SExpr::as_atom) {
                Some("version") if opt.len() == 2 && version.is_none() => {
                    version = Some(unsigned(&opt[1])?)
                }
                Some("goalie") if opt.len() == 1 && !goalie => goalie = true,
                _ => return Err(DecodeError::Malformed(format!("init option {a}"))),
            },
            _ => return Err(DecodeError::Malformed(format!("init argument {a}"))),
        }
    }
    let version = version.ok_or_else(|| DecodeError::Malformed("init without version".into()))?;
    Ok(Command::Init { team, version, goalie })
}

fn decode_trainer_move(args: &[SExpr]) -> Result<Command, DecodeError> {
    let target_parts = list(&args[0], "move target")?;
    let target = match target_parts.first().and_then(SExpr::as_atom) {
        Some("ball") if target_parts.len() == 1 => MoveTarget::Ball,
        Some("player") if target_parts.len() == 3 => {
            let side = Side::from_letter(atom(&target_parts[1], "side")?)
                .ok_or_else(|| DecodeError::Malformed("move side".into()))?;
            let unum = unsigned(&target_parts[2])?;
            if !(1..=11).contains(&unum) {
                return Err(DecodeError::OutOfRangeField { name: "unum", value: unum as f64 });
            }
            MoveTarget::Player { side, unum: unum as u8 }
        }
        _ => return Err(DecodeError::Malformed("move target".into())),
    };
    let nums = args[1..].iter().map(number).collect::<Result<Vec<_>, _>>()?;
    let (x, y, body_dir, vel) = match (target, nums.as_slice()) {
        (_, [x, y]) => (*x, *y, None, None),
        (MoveTarget::Ball, [x, y, vx, vy]) => (*x, *y, None, Some(Vec2::new(*vx, *vy))),
        (MoveTarget::Player { .. }, [x, y, d]) => (*x, *y, Some(*d), None),
        (MoveTarget::Player { .. }, [x, y, d, vx, vy]) => (*x, *y, Some(*d), Some(Vec2::new(*vx, *vy))),
        _ => return Err(DecodeError::FieldCountMismatch("move".into())),
    };
    Ok(Command::TrainerMove { target, x, y, body_dir, vel })
}
