//! JSON-lines record of a run: one header line, then one event per line.
//!
//! ```text
//! {"type":"header","problem":"zdt1","algorithm":"nsga2","seed":42,"params":{...}}
//! {"type":"param","generation_index":0,"name":"gain_p1","value":0.2}
//! {"type":"front","generation_index":0,"source_id":"nsga2/zdt1","points":[[0.0,1.0],[1.0,0.0]]}
//! ```
//!
//! Floats are written in shortest round-trip form, so replaying a log
//! reproduces the original fronts bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EngineError, EngineParams};
use crate::front::{Point, RawFront};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub problem: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub params: EngineParams,
}

impl RunHeader {
    pub fn new(params: EngineParams) -> Self {
        Self {
            problem: None,
            algorithm: None,
            seed: None,
            params,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogEvent {
    Front {
        generation_index: u64,
        #[serde(default)]
        source_id: String,
        points: Vec<Point>,
    },
    Param {
        generation_index: u64,
        name: String,
        value: f64,
    },
}

impl LogEvent {
    pub fn front(front: RawFront) -> Self {
        LogEvent::Front {
            generation_index: front.generation_index,
            source_id: front.source_id,
            points: front.points,
        }
    }

    pub fn generation_index(&self) -> u64 {
        match self {
            LogEvent::Front {
                generation_index, ..
            }
            | LogEvent::Param {
                generation_index, ..
            } => *generation_index,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename = "header")]
struct HeaderLine {
    #[serde(flatten)]
    header: RunHeader,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEventLog {
    pub header: RunHeader,
    pub events: Vec<LogEvent>,
}

impl RunEventLog {
    pub fn new(header: RunHeader) -> Self {
        Self {
            header,
            events: Vec::new(),
        }
    }

    pub fn push_front(&mut self, front: RawFront) {
        self.events.push(LogEvent::front(front));
    }

    pub fn push_param(&mut self, generation_index: u64, name: impl Into<String>, value: f64) {
        self.events.push(LogEvent::Param {
            generation_index,
            name: name.into(),
            value,
        });
    }

    pub fn fronts(&self) -> impl Iterator<Item = RawFront> + '_ {
        self.events.iter().filter_map(|e| match e {
            LogEvent::Front {
                generation_index,
                source_id,
                points,
            } => Some(RawFront {
                generation_index: *generation_index,
                points: points.clone(),
                source_id: source_id.clone(),
            }),
            LogEvent::Param { .. } => None,
        })
    }

    /// Generation indices never decrease, each generation carries at most
    /// one front, and parameter changes precede that generation's front.
    pub fn check_order(&self) -> Result<(), EngineError> {
        let mut last: Option<(u64, bool)> = None;
        for (line, ev) in self.events.iter().enumerate() {
            let g = ev.generation_index();
            let is_front = matches!(ev, LogEvent::Front { .. });
            if let Some((lg, front_seen)) = last {
                if g < lg {
                    return Err(EngineError::MalformedLog(format!(
                        "event {line}: generation {g} after {lg}"
                    )));
                }
                if g == lg && front_seen {
                    return Err(EngineError::MalformedLog(format!(
                        "event {line}: generation {g} already has its front"
                    )));
                }
            }
            let seen = matches!(last, Some((lg, s)) if lg == g && s);
            last = Some((g, seen || is_front));
        }
        Ok(())
    }

    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<(), EngineError> {
        serde_json::to_writer(
            &mut w,
            &HeaderLine {
                header: self.header.clone(),
            },
        )?;
        w.write_all(b"\n")?;
        for ev in &self.events {
            serde_json::to_writer(&mut w, ev)?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self, EngineError> {
        let mut lines = r.lines().enumerate().filter(|(_, l)| match l {
            Ok(s) => !s.trim().is_empty(),
            Err(_) => true,
        });
        let (_, first) = lines
            .next()
            .ok_or_else(|| EngineError::MalformedLog("empty log".into()))?;
        let header: HeaderLine = serde_json::from_str(&first?)
            .map_err(|e| EngineError::MalformedLog(format!("line 1: {e}")))?;
        let mut log = RunEventLog::new(header.header);
        for (n, line) in lines {
            let ev: LogEvent = serde_json::from_str(&line?)
                .map_err(|e| EngineError::MalformedLog(format!("line {}: {e}", n + 1)))?;
            log.events.push(ev);
        }
        Ok(log)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), EngineError> {
        self.write_jsonl(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EngineError> {
        Self::read_jsonl(BufReader::new(File::open(path)?))
    }
}
