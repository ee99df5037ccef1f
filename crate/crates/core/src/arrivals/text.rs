//! Line-oriented trace format: `time<TAB>type_id<TAB>origin<TAB>miner_id`.
//!
//! Optional leading `# key=value` lines carry `horizon` and `seed`. Without a
//! horizon header the last arrival time is used.

use std::io::{BufRead, Write};

use super::{Arrival, ArrivalTrace, Origin, ADVERSARY_MINER};
use crate::error::{Result, SimError};

pub fn write_trace<W: Write>(trace: &ArrivalTrace, mut out: W) -> Result<()> {
    writeln!(out, "# horizon={}", trace.horizon())?;
    writeln!(out, "# seed={}", trace.seed())?;
    for a in trace.arrivals() {
        writeln!(out, "{:.9}\t{}\t{}\t{}", a.time, a.type_id, a.origin.as_str(), a.miner_id)?;
    }
    Ok(())
}

pub fn read_trace<R: BufRead>(input: R) -> Result<ArrivalTrace> {
    let mut horizon: Option<f64> = None;
    let mut seed = 0u64;
    let mut arrivals = Vec::new();
    let mut last_time = f64::NEG_INFINITY;

    for (idx, line) in input.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let bad = |reason: String| SimError::TraceParse { line: line_no, reason };
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some((key, value)) = comment.trim().split_once('=') {
                match key.trim() {
                    "horizon" => horizon = Some(value.trim().parse().map_err(|e| bad(format!("horizon: {e}")))?),
                    "seed" => seed = value.trim().parse().map_err(|e| bad(format!("seed: {e}")))?,
                    _ => {}
                }
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split('\t').collect();
        if fields.len() != 4 {
            return Err(bad(format!("expected 4 tab-separated fields, found {}", fields.len())));
        }
        let time: f64 = fields[0].parse().map_err(|e| bad(format!("time: {e}")))?;
        if !(time.is_finite() && time >= 0.0) {
            return Err(bad(format!("time must be finite and >= 0, got {time}")));
        }
        if time < last_time {
            return Err(bad("times must be sorted ascending".into()));
        }
        last_time = time;
        let type_id = fields[1].parse().map_err(|e| bad(format!("type_id: {e}")))?;
        let origin: Origin = fields[2].parse().map_err(bad)?;
        let miner_id = match (origin, fields[3]) {
            (Origin::Adversary, "-") => ADVERSARY_MINER,
            (_, s) => s.parse().map_err(|e| bad(format!("miner_id: {e}")))?,
        };
        arrivals.push(Arrival {
            time,
            type_id,
            origin,
            miner_id,
        });
    }

    let horizon = match horizon {
        Some(h) => h,
        None => arrivals.last().map(|a| a.time).filter(|&t| t > 0.0).unwrap_or(1.0),
    };
    if let Some(a) = arrivals.iter().find(|a| a.time > horizon) {
        return Err(SimError::InvalidInput(format!("arrival at {} exceeds horizon {horizon}", a.time)));
    }
    ArrivalTrace::from_arrivals(arrivals, horizon, seed)
}
