//! Line-delimited JSON match record: one header line, then one line per cycle.

use std::io::{BufRead, BufWriter, Write};

use serde::{Deserialize, Serialize};

use crate::sim::{Event, SimConfig, SimWorld};
use crate::types::PlayMode;

pub const REPLAY_SCHEMA: &str = "cls-replay/1";
/// The writer flushes at least this often.
pub const FLUSH_EVERY: u32 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayHeader {
    pub schema: String,
    pub config: SimConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayRecord {
    pub cycle: u32,
    pub world: SimWorld,
    pub events: Vec<Event>,
}

#[derive(Debug, thiserror::Error)]
pub enum ReplayError {
    #[error("record for cycle {got} does not follow cycle {last}")]
    OutOfOrderCycle { last: u32, got: u32 },
    #[error("replay i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json { line: usize, source: serde_json::Error },
    #[error("unsupported replay schema `{0}`")]
    Schema(String),
    #[error("invalid replay: {0}")]
    Invalid(String),
}

/// Append-only replay sink.
pub struct ReplayLog<W: Write> {
    out: BufWriter<W>,
    last_cycle: Option<u32>,
    unflushed: u32,
    records: usize,
}

impl<W: Write> ReplayLog<W> {
    pub fn new(out: W, config: &SimConfig) -> Result<Self, ReplayError> {
        let mut out = BufWriter::new(out);
        let header = ReplayHeader { schema: REPLAY_SCHEMA.to_string(), config: config.clone() };
        serde_json::to_writer(&mut out, &header).map_err(|e| ReplayError::Json { line: 1, source: e })?;
        out.write_all(b"\n")?;
        Ok(ReplayLog { out, last_cycle: None, unflushed: 0, records: 0 })
    }

    pub fn records(&self) -> usize {
        self.records
    }

    /// Appends the record for `world.cycle`, which must directly follow the
    /// previous record.
    pub fn append(&mut self, world: &SimWorld, events: &[Event]) -> Result<(), ReplayError> {
        if let Some(last) = self.last_cycle {
            if world.cycle != last + 1 {
                return Err(ReplayError::OutOfOrderCycle { last, got: world.cycle });
            }
        }
        #[derive(Serialize)]
        struct Borrowed<'a> {
            cycle: u32,
            world: &'a SimWorld,
            events: &'a [Event],
        }
        let rec = Borrowed { cycle: world.cycle, world, events };
        serde_json::to_writer(&mut self.out, &rec)
            .map_err(|e| ReplayError::Json { line: self.records + 2, source: e })?;
        self.out.write_all(b"\n")?;
        self.last_cycle = Some(world.cycle);
        self.records += 1;
        self.unflushed += 1;
        if self.unflushed >= FLUSH_EVERY {
            self.out.flush()?;
            self.unflushed = 0;
        }
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), ReplayError> {
        self.out.flush()?;
        self.unflushed = 0;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, ReplayError> {
        self.out.flush()?;
        self.out.into_inner().map_err(|e| ReplayError::Io(e.into_error()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replay {
    pub header: ReplayHeader,
    pub records: Vec<ReplayRecord>,
}

pub fn read_replay(input: impl BufRead) -> Result<Replay, ReplayError> {
    let mut lines = input.lines();
    let first = lines.next().ok_or_else(|| ReplayError::Invalid("empty file".into()))??;
    let header: ReplayHeader =
        serde_json::from_str(&first).map_err(|e| ReplayError::Json { line: 1, source: e })?;
    if header.schema != REPLAY_SCHEMA {
        return Err(ReplayError::Schema(header.schema));
    }
    let mut records = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let rec: ReplayRecord =
            serde_json::from_str(&line).map_err(|e| ReplayError::Json { line: i + 2, source: e })?;
        records.push(rec);
    }
    Ok(Replay { header, records })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplaySummary {
    pub records: usize,
    pub first_cycle: u32,
    pub last_cycle: u32,
    pub scores: (u32, u32),
    pub goals: usize,
}

/// Checks ordering, completeness, score bookkeeping and the physical caps of
/// every recorded world.
pub fn validate_replay(replay: &Replay) -> Result<ReplaySummary, ReplayError> {
    let invalid = |msg: String| Err(ReplayError::Invalid(msg));
    let params = &replay.header.config.params;
    params.validate().map_err(|e| ReplayError::Invalid(e.to_string()))?;
    let Some(first) = replay.records.first() else {
        return invalid("no records".into());
    };
    let mut goals = (0u32, 0u32);
    let mut prev: Option<u32> = None;
    let eps = 1e-9;
    let mx = params.pitch_half_length + crate::landmarks::PITCH_MARGIN + eps;
    let my = params.pitch_half_width + crate::landmarks::PITCH_MARGIN + eps;
    for rec in &replay.records {
        if rec.world.cycle != rec.cycle {
            return invalid(format!("record {} carries world of cycle {}", rec.cycle, rec.world.cycle));
        }
        if let Some(p) = prev {
            if rec.cycle != p + 1 {
                return Err(ReplayError::OutOfOrderCycle { last: p, got: rec.cycle });
            }
        }
        prev = Some(rec.cycle);
        for e in &rec.events {
            if let Event::Goal { side, .. } = e {
                match side {
                    crate::types::Side::Left => goals.0 += 1,
                    crate::types::Side::Right => goals.1 += 1,
                }
            }
        }
        if goals != rec.world.scores {
            return invalid(format!("cycle {}: goal events {:?} vs score {:?}", rec.cycle, goals, rec.world.scores));
        }
        let w = &rec.world;
        // velocities are stored post-decay, so the caps apply scaled by the decay
        if w.ball.vel.length() > params.ball_speed_max * params.ball_decay + eps {
            return invalid(format!("cycle {}: ball too fast", rec.cycle));
        }
        if w.ball.pos.x.abs() > mx || w.ball.pos.y.abs() > my {
            return invalid(format!("cycle {}: ball outside the area", rec.cycle));
        }
        for p in &w.players {
            if p.vel.length() > params.player_speed_max * params.player_decay + eps {
                return invalid(format!("cycle {}: player {}{} too fast", rec.cycle, p.side, p.unum));
            }
            if !(0.0..=params.stamina_max).contains(&p.stamina) {
                return invalid(format!("cycle {}: stamina out of range", rec.cycle));
            }
            if p.pos.x.abs() > mx || p.pos.y.abs() > my {
                return invalid(format!("cycle {}: player outside the area", rec.cycle));
            }
        }
    }
    let last = replay.records.last().expect("non-empty");
    if last.world.play_mode != PlayMode::TimeOver {
        return invalid(format!("final record is {} rather than time_over", last.world.play_mode));
    }
    Ok(ReplaySummary {
        records: replay.records.len(),
        first_cycle: first.cycle,
        last_cycle: last.cycle,
        scores: last.world.scores,
        goals: (goals.0 + goals.1) as usize,
    })
}
