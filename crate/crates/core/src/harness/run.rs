//! Run orchestration and the sinks a run can feed.

use std::fmt;
use std::io::Write;
use std::net::{SocketAddr, UdpSocket};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{HarnessError, Moead, MoeadConfig, Nsga2, Nsga2Config, Problem};
use crate::engine::{EngineParams, EngineQueue, LogEvent, RunEventLog, RunHeader};
use crate::front::{Point, RawFront};
use crate::osc::{encode_front, OscFrontMessage};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Nsga2,
    Moead,
}

impl Algorithm {
    pub const ALL: [Algorithm; 2] = [Algorithm::Nsga2, Algorithm::Moead];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Nsga2 => "nsga2",
            Algorithm::Moead => "moead",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| HarnessError::UnknownAlgorithm(s.to_owned()))
    }
}

/// Receives one front per generation, in order.
pub trait FrontSink {
    fn emit(&mut self, front: &RawFront) -> Result<(), HarnessError>;
}

impl FrontSink for RunEventLog {
    fn emit(&mut self, front: &RawFront) -> Result<(), HarnessError> {
        self.push_front(front.clone());
        Ok(())
    }
}

#[derive(Debug, Default, Clone, Copy)]
pub struct NullSink;

impl FrontSink for NullSink {
    fn emit(&mut self, _: &RawFront) -> Result<(), HarnessError> {
        Ok(())
    }
}

/// Streams the run as JSON lines, header first.
pub struct JsonlSink<W: Write> {
    out: W,
}

impl<W: Write> JsonlSink<W> {
    pub fn new(mut out: W, header: &RunHeader) -> Result<Self, HarnessError> {
        let mut log = RunEventLog::new(header.clone());
        log.events.clear();
        log.write_jsonl(&mut out)
            .map_err(|e| HarnessError::Sink(e.to_string()))?;
        Ok(Self { out })
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> FrontSink for JsonlSink<W> {
    fn emit(&mut self, front: &RawFront) -> Result<(), HarnessError> {
        let line = serde_json::to_string(&LogEvent::front(front.clone()))
            .map_err(|e| HarnessError::Sink(e.to_string()))?;
        writeln!(self.out, "{line}")?;
        Ok(())
    }
}

/// Sends each front as an OSC datagram, as an external optimizer would.
pub struct OscSink {
    socket: UdpSocket,
    target: SocketAddr,
}

impl OscSink {
    pub fn new(target: SocketAddr) -> Result<Self, HarnessError> {
        let bind: SocketAddr = if target.is_ipv4() {
            ([0, 0, 0, 0], 0).into()
        } else {
            (std::net::Ipv6Addr::UNSPECIFIED, 0).into()
        };
        Ok(Self {
            socket: UdpSocket::bind(bind)?,
            target,
        })
    }
}

impl FrontSink for OscSink {
    fn emit(&mut self, front: &RawFront) -> Result<(), HarnessError> {
        let g = i32::try_from(front.generation_index)
            .map_err(|_| HarnessError::Sink("generation index exceeds i32".into()))?;
        let bytes = encode_front(&OscFrontMessage::from_points(g, &front.points));
        self.socket.send_to(&bytes, self.target)?;
        Ok(())
    }
}

/// Feeds a live engine in-process.
pub struct QueueSink(pub Arc<EngineQueue>);

impl FrontSink for QueueSink {
    fn emit(&mut self, front: &RawFront) -> Result<(), HarnessError> {
        self.0.push_front(front.clone());
        Ok(())
    }
}

impl<S: FrontSink + ?Sized> FrontSink for &mut S {
    fn emit(&mut self, front: &RawFront) -> Result<(), HarnessError> {
        (**self).emit(front)
    }
}

/// Runs `generations` generations, the first being the evaluated initial
/// population (index 0). Every front goes to `sink` and into the returned
/// log, whose header carries default engine parameters.
pub fn run_algorithm(
    problem: &Problem,
    algorithm: Algorithm,
    generations: u64,
    seed: u64,
    sink: &mut dyn FrontSink,
) -> Result<RunEventLog, HarnessError> {
    let mut header = RunHeader::new(EngineParams::default());
    header.problem = Some(problem.kind.name().to_owned());
    header.algorithm = Some(algorithm.name().to_owned());
    header.seed = Some(seed);
    let mut log = RunEventLog::new(header);
    let source = format!("{}/{}/{}", algorithm, problem.kind, seed);

    enum Runner {
        Nsga2(Nsga2),
        Moead(Moead),
    }
    let mut runner = match algorithm {
        Algorithm::Nsga2 => {
            Runner::Nsga2(Nsga2::new(problem.clone(), Nsga2Config::default(), seed)?)
        }
        Algorithm::Moead => {
            Runner::Moead(Moead::new(problem.clone(), MoeadConfig::default(), seed)?)
        }
    };
    for g in 0..generations {
        if g > 0 {
            match &mut runner {
                Runner::Nsga2(r) => r.step()?,
                Runner::Moead(r) => r.step()?,
            }
        }
        let points = match &runner {
            Runner::Nsga2(r) => r.front(),
            Runner::Moead(r) => r.front(),
        };
        let front = RawFront {
            generation_index: g,
            points,
            source_id: source.clone(),
        };
        sink.emit(&front)?;
        log.push_front(front);
    }
    Ok(log)
}

/// Inverted generational distance: mean distance from each reference point
/// to its nearest obtained point.
pub fn igd(reference: &[Point], front: &[Point]) -> f64 {
    if reference.is_empty() || front.is_empty() {
        return f64::INFINITY;
    }
    let total: f64 = reference
        .iter()
        .map(|r| {
            front
                .iter()
                .map(|p| (r.0 - p.0).hypot(r.1 - p.1))
                .fold(f64::INFINITY, f64::min)
        })
        .sum();
    total / reference.len() as f64
}

/// `n` points of the ZDT1 optimum `f2 = 1 - sqrt(f1)`, evenly spaced in f1.
pub fn zdt1_reference(n: usize) -> Vec<Point> {
    match n {
        0 => Vec::new(),
        1 => vec![(0.0, 1.0)],
        _ => (0..n)
            .map(|k| {
                let f1 = k as f64 / (n - 1) as f64;
                (f1, 1.0 - f1.sqrt())
            })
            .collect(),
    }
}
