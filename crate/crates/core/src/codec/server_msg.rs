use std::collections::BTreeMap;
use std::fmt::Write;

use super::error::DecodeError;
use super::fields::{atom, expect_len, in_range, list, number, unsigned};
use super::number::{format_coarse, format_exact};
use super::sexpr::{is_bare_token, parse_sexpr, SExpr};
use crate::geom::Vec2;
use crate::landmarks::{FlagId, LandmarkMap};
use crate::sim::world::{BallState, PlayerState, Snapshot, Teams};
use crate::types::{PlayMode, Side};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LineId {
    Left,
    Right,
    Top,
    Bottom,
}

impl LineId {
    fn letter(self) -> &'static str {
        match self {
            LineId::Left => "l",
            LineId::Right => "r",
            LineId::Top => "t",
            LineId::Bottom => "b",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectKind {
    Flag(FlagId),
    Ball,
    Player { team: Option<String>, unum: Option<u8> },
    Goal(Side),
    Line(LineId),
}

/// One entry of a `see` message, in polar coordinates relative to the
/// observer's face direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservedObject {
    pub kind: ObjectKind,
    pub distance: f64,
    pub direction: f64,
    pub dist_change: Option<f64>,
    pub dir_change: Option<f64>,
}

impl ObservedObject {
    pub fn new(kind: ObjectKind, distance: f64, direction: f64) -> Self {
        ObservedObject { kind, distance, direction, dist_change: None, dir_change: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamValue {
    Num(f64),
    Text(String),
}

impl ParamValue {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            ParamValue::Num(v) => Some(*v),
            ParamValue::Text(_) => None,
        }
    }
}

pub type ParamMap = BTreeMap<String, ParamValue>;

#[derive(Debug, Clone, PartialEq)]
pub enum ServerMessage {
    /// Registration reply. `unum` is 0 for a coach.
    Init { side: Side, unum: u8, play_mode: PlayMode },
    See { cycle: u32, objects: Vec<ObservedObject> },
    SenseBody {
        cycle: u32,
        stamina: f64,
        effort: f64,
        speed_mag: f64,
        /// Relative to the face direction.
        speed_dir: f64,
        /// Relative to the body.
        neck_dir: f64,
    },
    FullState(Snapshot),
    Hear { cycle: u32, sender: String, text: String },
    ServerParam(ParamMap),
    PlayerParam(ParamMap),
    PlayerType { id: u32, params: ParamMap },
    Error(String),
    Ok(String),
}

impl ServerMessage {
    pub fn cycle(&self) -> Option<u32> {
        match self {
            ServerMessage::See { cycle, .. }
            | ServerMessage::SenseBody { cycle, .. }
            | ServerMessage::Hear { cycle, .. } => Some(*cycle),
            ServerMessage::FullState(s) => Some(s.cycle),
            _ => None,
        }
    }
}

/// Parses and decodes one datagram from the server.
pub fn decode_server_text(text: &str) -> Result<ServerMessage, DecodeError> {
    decode_server_message(&parse_sexpr(text)?)
}

pub fn decode_server_message(expr: &SExpr) -> Result<ServerMessage, DecodeError> {
    let items = list(expr, "message")?;
    let head = items
        .first()
        .and_then(SExpr::as_atom)
        .ok_or_else(|| DecodeError::Malformed("message head".into()))?;
    let args = &items[1..];
    match head {
        "init" => decode_init(args),
        "see" => decode_see(args),
        "sense_body" => decode_sense_body(args),
        "fullstate" => decode_fullstate(args),
        "hear" => {
            expect_len(args, 3, head)?;
            Ok(ServerMessage::Hear {
                cycle: unsigned(&args[0])?,
                sender: args[1].to_string(),
                text: args[2]
                    .as_text()
                    .ok_or_else(|| DecodeError::Malformed("hear text".into()))?
                    .to_string(),
            })
        }
        "server_param" => Ok(ServerMessage::ServerParam(decode_params(args)?)),
        "player_param" => Ok(ServerMessage::PlayerParam(decode_params(args)?)),
        "player_type" => {
            let mut params = decode_params(args)?;
            let id = match params.remove("id") {
                Some(ParamValue::Num(v)) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => v as u32,
                _ => return Err(DecodeError::Malformed("player_type id".into())),
            };
            Ok(ServerMessage::PlayerType { id, params })
        }
        "error" => Ok(ServerMessage::Error(join_text(args))),
        "ok" => Ok(ServerMessage::Ok(join_text(args))),
        other => Err(DecodeError::UnknownMessageHead(other.to_string())),
    }
}

fn join_text(args: &[SExpr]) -> String {
    args.iter()
        .map(|a| a.as_text().map(str::to_string).unwrap_or_else(|| a.to_string()))
        .collect::<Vec<_>>()
        .join(" ")
}

fn side(e: &SExpr) -> Result<Side, DecodeError> {
    let s = atom(e, "side")?;
    Side::from_letter(s).ok_or_else(|| DecodeError::Malformed(format!("side {s}")))
}

fn play_mode(e: &SExpr) -> Result<PlayMode, DecodeError> {
    atom(e, "play mode")?
        .parse()
        .map_err(|err: crate::types::UnknownPlayMode| DecodeError::Malformed(err.to_string()))
}

fn unum(e: &SExpr, allow_zero: bool) -> Result<u8, DecodeError> {
    let v = unsigned(e)?;
    let lo = if allow_zero { 0 } else { 1 };
    if (lo..=11).contains(&v) {
        Ok(v as u8)
    } else {
        Err(DecodeError::OutOfRangeField { name: "unum", value: v as f64 })
    }
}

fn decode_init(args: &[SExpr]) -> Result<ServerMessage, DecodeError> {
    expect_len(args, 3, "init")?;
    Ok(ServerMessage::Init {
        side: side(&args[0])?,
        unum: unum(&args[1], true)?,
        play_mode: play_mode(&args[2])?,
    })
}

fn decode_object_kind(e: &SExpr) -> Result<ObjectKind, DecodeError> {
    let parts = list(e, "object name")?;
    let head = parts
        .first()
        .and_then(SExpr::as_atom)
        .ok_or_else(|| DecodeError::Malformed("object name".into()))?;
    let rest = &parts[1..];
    match head {
        "b" if rest.is_empty() => Ok(ObjectKind::Ball),
        "f" => {
            let id = rest
                .iter()
                .map(|p| atom(p, "flag").map(str::to_string))
                .collect::<Result<Vec<_>, _>>()?;
            if !LandmarkMap::standard().contains(&id) {
                return Err(DecodeError::UnknownFlag(id.join(" ")));
            }
            Ok(ObjectKind::Flag(FlagId(id)))
        }
        "g" if rest.len() == 1 => Ok(ObjectKind::Goal(side(&rest[0])?)),
        "l" if rest.len() == 1 => {
            let id = match atom(&rest[0], "line")? {
                "l" => LineId::Left,
                "r" => LineId::Right,
                "t" => LineId::Top,
                "b" => LineId::Bottom,
                other => return Err(DecodeError::Malformed(format!("line {other}"))),
            };
            Ok(ObjectKind::Line(id))
        }
        "p" if rest.len() <= 2 => {
            let team = match rest.first() {
                Some(t) => Some(
                    t.as_text()
                        .ok_or_else(|| DecodeError::Malformed("player team".into()))?
                        .to_string(),
                ),
                None => None,
            };
            let unum = rest.get(1).map(|u| unum(u, false)).transpose()?;
            Ok(ObjectKind::Player { team, unum })
        }
        _ => Err(DecodeError::Malformed(format!("object {e}"))),
    }
}

fn decode_see(args: &[SExpr]) -> Result<ServerMessage, DecodeError> {
    let (cycle, rest) = args
        .split_first()
        .ok_or_else(|| DecodeError::FieldCountMismatch("see".into()))?;
    let cycle = unsigned(cycle)?;
    let mut objects = Vec::with_capacity(rest.len());
    for obj in rest {
        let fields = list(obj, "seen object")?;
        if !(fields.len() == 3 || fields.len() == 5) {
            return Err(DecodeError::FieldCountMismatch("see object".into()));
        }
        let kind = decode_object_kind(&fields[0])?;
        let distance = number(&fields[1])?;
        if distance < 0.0 {
            return Err(DecodeError::OutOfRangeField { name: "distance", value: distance });
        }
        let direction = in_range("direction", number(&fields[2])?, -180.0, 180.0, false)?;
        let (dist_change, dir_change) = if fields.len() == 5 {
            (Some(number(&fields[3])?), Some(number(&fields[4])?))
        } else {
            (None, None)
        };
        objects.push(ObservedObject { kind, distance, direction, dist_change, dir_change });
    }
    Ok(ServerMessage::See { cycle, objects })
}

/// `(sense_body C (stamina S E) (speed M D) (head_angle N) ...)`; unknown
/// sections are skipped so richer server builds still decode.
fn decode_sense_body(args: &[SExpr]) -> Result<ServerMessage, DecodeError> {
    let (cycle, rest) = args
        .split_first()
        .ok_or_else(|| DecodeError::FieldCountMismatch("sense_body".into()))?;
    let cycle = unsigned(cycle)?;
    let mut stamina = None;
    let mut speed = None;
    let mut neck = None;
    for section in rest {
        let items = list(section, "sense_body section")?;
        let name = items.first().and_then(SExpr::as_atom).unwrap_or("");
        match name {
            "stamina" => {
                if items.len() < 3 {
                    return Err(DecodeError::FieldCountMismatch("stamina".into()));
                }
                stamina = Some((number(&items[1])?, number(&items[2])?));
            }
            "speed" => {
                expect_len(items, 3, "speed")?;
                speed = Some((number(&items[1])?, number(&items[2])?));
            }
            "head_angle" => {
                expect_len(items, 2, "head_angle")?;
                neck = Some(number(&items[1])?);
            }
            _ => {}
        }
    }
    let missing = |what: &str| DecodeError::Malformed(format!("sense_body without {what}"));
    let (stamina, effort) = stamina.ok_or_else(|| missing("stamina"))?;
    let (speed_mag, speed_dir) = speed.ok_or_else(|| missing("speed"))?;
    Ok(ServerMessage::SenseBody {
        cycle,
        stamina,
        effort,
        speed_mag,
        speed_dir,
        neck_dir: neck.ok_or_else(|| missing("head_angle"))?,
    })
}

fn decode_fullstate(args: &[SExpr]) -> Result<ServerMessage, DecodeError> {
    let (cycle, rest) = args
        .split_first()
        .ok_or_else(|| DecodeError::FieldCountMismatch("fullstate".into()))?;
    let cycle = unsigned(cycle)?;
    let mut mode = None;
    let mut scores = None;
    let mut teams = Teams::default();
    let mut ball = None;
    let mut players: Vec<PlayerState> = Vec::new();
    for section in rest {
        let items = list(section, "fullstate section")?;
        let Some(first) = items.first() else {
            return Err(DecodeError::Malformed("empty fullstate section".into()));
        };
        match first {
            SExpr::Atom(name) if name == "pmode" => {
                expect_len(items, 2, "pmode")?;
                mode = Some(play_mode(&items[1])?);
            }
            SExpr::Atom(name) if name == "score" => {
                expect_len(items, 3, "score")?;
                scores = Some((unsigned(&items[1])?, unsigned(&items[2])?));
            }
            SExpr::Atom(name) if name == "teams" => {
                for entry in &items[1..] {
                    let e = list(entry, "team entry")?;
                    expect_len(e, 2, "team entry")?;
                    let name = e[1]
                        .as_text()
                        .ok_or_else(|| DecodeError::Malformed("team name".into()))?
                        .to_string();
                    match side(&e[0])? {
                        Side::Left => teams.left = Some(name),
                        Side::Right => teams.right = Some(name),
                    }
                }
            }
            SExpr::List(id) if id.first().and_then(SExpr::as_atom) == Some("b") => {
                expect_len(items, 5, "fullstate ball")?;
                ball = Some(BallState {
                    pos: Vec2::new(number(&items[1])?, number(&items[2])?),
                    vel: Vec2::new(number(&items[3])?, number(&items[4])?),
                });
            }
            SExpr::List(id) if id.first().and_then(SExpr::as_atom) == Some("p") => {
                expect_len(id, 3, "fullstate player id")?;
                expect_len(items, 9, "fullstate player")?;
                let n = |i: usize| number(&items[i]);
                players.push(PlayerState {
                    side: side(&id[1])?,
                    unum: unum(&id[2], false)?,
                    pos: Vec2::new(n(1)?, n(2)?),
                    vel: Vec2::new(n(3)?, n(4)?),
                    body_dir: n(5)?,
                    neck_dir: n(6)?,
                    stamina: n(7)?,
                    effort: n(8)?,
                });
            }
            _ => return Err(DecodeError::Malformed(format!("fullstate section {section}"))),
        }
    }
    players.sort_by_key(|p| (p.side, p.unum));
    Ok(ServerMessage::FullState(Snapshot {
        cycle,
        play_mode: mode.ok_or_else(|| DecodeError::Malformed("fullstate without pmode".into()))?,
        scores: scores.ok_or_else(|| DecodeError::Malformed("fullstate without score".into()))?,
        teams,
        ball: ball.ok_or_else(|| DecodeError::Malformed("fullstate without ball".into()))?,
        players,
    }))
}

fn decode_params(args: &[SExpr]) -> Result<ParamMap, DecodeError> {
    let mut map = ParamMap::new();
    for entry in args {
        let kv = list(entry, "parameter")?;
        expect_len(kv, 2, "parameter")?;
        let key = atom(&kv[0], "parameter name")?.to_string();
        let value = match &kv[1] {
            SExpr::Atom(s) => match s.parse::<f64>() {
                Ok(v) if v.is_finite() => ParamValue::Num(v),
                _ => ParamValue::Text(s.clone()),
            },
            SExpr::Quoted(s) => ParamValue::Text(s.clone()),
            SExpr::List(_) => return Err(DecodeError::Malformed(format!("parameter {key}"))),
        };
        map.insert(key, value);
    }
    Ok(map)
}

fn text_atom(s: &str) -> String {
    if is_bare_token(s) {
        s.to_string()
    } else {
        SExpr::Quoted(s.to_string()).to_string()
    }
}

fn write_params(out: &mut String, params: &ParamMap) {
    for (k, v) in params {
        match v {
            ParamValue::Num(x) => write!(out, " ({k} {})", format_exact(*x)).unwrap(),
            ParamValue::Text(t) => write!(out, " ({k} {})", text_atom(t)).unwrap(),
        }
    }
}

/// Renders a message the way the server puts it on the wire. Observation
/// values (`see`, `sense_body`) are rounded to two decimals; full-state
/// snapshots and parameters are exact.
pub fn encode_server_message(msg: &ServerMessage) -> String {
    let mut out = String::new();
    match msg {
        ServerMessage::Init { side, unum, play_mode } => {
            write!(out, "(init {side} {unum} {play_mode})").unwrap();
        }
        ServerMessage::See { cycle, objects } => {
            write!(out, "(see {cycle}").unwrap();
            for o in objects {
                out.push_str(" (");
                out.push_str(&object_name(&o.kind));
                write!(out, " {} {}", format_coarse(o.distance), format_coarse(o.direction)).unwrap();
                if let (Some(a), Some(b)) = (o.dist_change, o.dir_change) {
                    write!(out, " {} {}", format_coarse(a), format_coarse(b)).unwrap();
                }
                out.push(')');
            }
            out.push(')');
        }
        ServerMessage::SenseBody { cycle, stamina, effort, speed_mag, speed_dir, neck_dir } => {
            write!(
                out,
                "(sense_body {cycle} (stamina {} {}) (speed {} {}) (head_angle {}))",
                format_coarse(*stamina),
                format_coarse(*effort),
                format_coarse(*speed_mag),
                format_coarse(*speed_dir),
                format_coarse(*neck_dir),
            )
            .unwrap();
        }
        ServerMessage::FullState(s) => {
            let x = |v: f64| format_exact(v);
            write!(
                out,
                "(fullstate {} (pmode {}) (score {} {}) (teams",
                s.cycle, s.play_mode, s.scores.0, s.scores.1
            )
            .unwrap();
            for side in [Side::Left, Side::Right] {
                if let Some(name) = s.teams.name(side) {
                    write!(out, " ({side} {})", SExpr::Quoted(name.to_string())).unwrap();
                }
            }
            write!(
                out,
                ") ((b) {} {} {} {})",
                x(s.ball.pos.x),
                x(s.ball.pos.y),
                x(s.ball.vel.x),
                x(s.ball.vel.y)
            )
            .unwrap();
            for p in &s.players {
                write!(
                    out,
                    " ((p {} {}) {} {} {} {} {} {} {} {})",
                    p.side,
                    p.unum,
                    x(p.pos.x),
                    x(p.pos.y),
                    x(p.vel.x),
                    x(p.vel.y),
                    x(p.body_dir),
                    x(p.neck_dir),
                    x(p.stamina),
                    x(p.effort)
                )
                .unwrap();
            }
            out.push(')');
        }
        ServerMessage::Hear { cycle, sender, text } => {
            write!(out, "(hear {cycle} {} {})", text_atom(sender), text_atom(text)).unwrap();
        }
        ServerMessage::ServerParam(p) => {
            out.push_str("(server_param");
            write_params(&mut out, p);
            out.push(')');
        }
        ServerMessage::PlayerParam(p) => {
            out.push_str("(player_param");
            write_params(&mut out, p);
            out.push(')');
        }
        ServerMessage::PlayerType { id, params } => {
            write!(out, "(player_type (id {id})").unwrap();
            write_params(&mut out, params);
            out.push(')');
        }
        ServerMessage::Error(t) => write!(out, "(error {})", text_atom(t)).unwrap(),
        ServerMessage::Ok(t) => write!(out, "(ok {})", text_atom(t)).unwrap(),
    }
    out
}

fn object_name(kind: &ObjectKind) -> String {
    match kind {
        ObjectKind::Ball => "(b)".into(),
        ObjectKind::Flag(id) => format!("(f {})", id.name()),
        ObjectKind::Goal(s) => format!("(g {s})"),
        ObjectKind::Line(l) => format!("(l {})", l.letter()),
        ObjectKind::Player { team, unum } => {
            let mut s = String::from("(p");
            if let Some(t) = team {
                write!(s, " {}", SExpr::Quoted(t.clone())).unwrap();
                if let Some(u) = unum {
                    write!(s, " {u}").unwrap();
                }
            }
            s.push(')');
            s
        }
    }
}
