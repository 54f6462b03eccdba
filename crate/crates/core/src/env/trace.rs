//! Streaming CSV trace of per-step reward terms for one logged robot.

use std::io::{self, Write};

use super::rewards::RewardTerms;

pub const TRACE_HEADER: &str = "t,task,penalties,bias,stall,air_time,total,distance,speed";

/// Writes one row per control step. The first line is an optional metadata
/// comment, then the header row.
pub struct RewardTraceWriter<W: Write> {
    out: W,
}

impl<W: Write> RewardTraceWriter<W> {
    pub fn new(mut out: W, metadata: Option<&str>) -> io::Result<Self> {
        if let Some(meta) = metadata {
            writeln!(out, "# {meta}")?;
        }
        writeln!(out, "{TRACE_HEADER}")?;
        Ok(RewardTraceWriter { out })
    }

    pub fn record(
        &mut self,
        t: f64,
        terms: &RewardTerms,
        distance: f64,
        speed: f64,
    ) -> io::Result<()> {
        writeln!(
            self.out,
            "{t},{},{},{},{},{},{},{distance},{speed}",
            terms.task, terms.penalties, terms.bias, terms.stall, terms.air_time, terms.total
        )
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}
