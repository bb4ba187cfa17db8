//! Recording player decisions for cross-implementation parity checks.
//!
//! A corpus file is a stream of length-delimited `DecisionRecord` messages,
//! sorted by (cycle, register id).

use std::io::{self, Read, Write};
use std::path::Path;
use std::sync::Mutex;

use cls_rpc::pb;
use prost::Message;

/// Keeps a deterministic sample of decisions: at every `stride`-th cycle,
/// the player whose unum comes up in rotation, on both sides.
#[derive(Debug)]
pub struct Recorder {
    stride: u32,
    limit: usize,
    records: Mutex<Vec<(u32, i32, pb::DecisionRecord)>>,
}

impl Recorder {
    pub fn new(stride: u32, limit: usize) -> Self {
        Recorder { stride: stride.max(1), limit, records: Mutex::new(Vec::new()) }
    }

    fn wanted(&self, cycle: u32, unum: u32) -> bool {
        cycle % self.stride == 0 && unum == (cycle / self.stride) % 11 + 1
    }

    pub fn offer(&self, state: &pb::State, actions: &pb::PlayerActions) {
        let Some(wm) = &state.world_model else { return };
        let unum = wm.self_.as_ref().map(|s| s.unum).unwrap_or(0);
        if !self.wanted(wm.cycle, unum) {
            return;
        }
        let rec = pb::DecisionRecord { state: Some(state.clone()), actions: Some(actions.clone()) };
        self.records.lock().expect("recorder lock").push((wm.cycle, state.register_id, rec));
    }

    /// The sample so far, in file order, capped at the limit.
    pub fn records(&self) -> Vec<pb::DecisionRecord> {
        let mut all = self.records.lock().expect("recorder lock").clone();
        all.sort_by_key(|(cycle, rid, _)| (*cycle, *rid));
        // a retried call can offer the same decision twice
        all.dedup_by_key(|(cycle, rid, _)| (*cycle, *rid));
        all.into_iter().take(self.limit).map(|(_, _, r)| r).collect()
    }

    pub fn write(&self, path: &Path) -> io::Result<usize> {
        let records = self.records();
        let mut out = io::BufWriter::new(std::fs::File::create(path)?);
        write_corpus(&mut out, &records)?;
        out.flush()?;
        Ok(records.len())
    }
}

pub fn write_corpus(out: &mut impl Write, records: &[pb::DecisionRecord]) -> io::Result<()> {
    for r in records {
        out.write_all(&r.encode_length_delimited_to_vec())?;
    }
    Ok(())
}

pub fn read_corpus(input: &mut impl Read) -> io::Result<Vec<pb::DecisionRecord>> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut buf = bytes.as_slice();
    let mut records = Vec::new();
    while !buf.is_empty() {
        let r = pb::DecisionRecord::decode_length_delimited(&mut buf)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        records.push(r);
    }
    Ok(records)
}
