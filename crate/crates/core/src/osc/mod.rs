//! Open Sound Control ingestion for external optimizers.

mod codec;
mod server;

pub use codec::{
    decode_packet, encode, encode_front, encode_param, OscError, OscFrontMessage, OscMessage,
    OscParamMessage, FRONT_ADDRESS, MAX_PACKET_BYTES, PARAM_ADDRESS,
};
pub use server::{OscServer, ServerStats};

use crate::front::RawFront;

impl OscFrontMessage {
    pub fn from_points(generation_index: i32, points: &[(f64, f64)]) -> Self {
        Self {
            generation_index,
            points: points.iter().map(|&(a, b)| (a as f32, b as f32)).collect(),
        }
    }

    pub fn to_raw(&self, source_id: &str) -> RawFront {
        RawFront {
            generation_index: self.generation_index.max(0) as u64,
            points: self
                .points
                .iter()
                .map(|&(a, b)| (a as f64, b as f64))
                .collect(),
            source_id: source_id.to_owned(),
        }
    }
}

/// What the sequencer did with a front datagram.
#[derive(Debug, Clone, PartialEq)]
pub enum Sequenced {
    Accepted(RawFront),
    /// Accepted after `missing` generations never arrived.
    AcceptedAfterGap {
        front: RawFront,
        missing: u64,
    },
    /// Late or duplicate datagram.
    Dropped {
        generation_index: i64,
        last: u64,
    },
}

/// Enforces strictly increasing generation indices on a datagram stream.
#[derive(Debug, Clone, Default)]
pub struct FrontSequencer {
    last: Option<u64>,
    source_id: String,
}

impl FrontSequencer {
    pub fn new(source_id: impl Into<String>) -> Self {
        Self {
            last: None,
            source_id: source_id.into(),
        }
    }

    pub fn last_accepted(&self) -> Option<u64> {
        self.last
    }

    pub fn accept(&mut self, msg: &OscFrontMessage) -> Sequenced {
        let g = msg.generation_index as i64;
        match self.last {
            Some(last) if g <= last as i64 => {
                log::debug!("dropping late front {g} (last accepted {last})");
                Sequenced::Dropped {
                    generation_index: g,
                    last,
                }
            }
            None if g < 0 => Sequenced::Dropped {
                generation_index: g,
                last: 0,
            },
            prev => {
                let front = msg.to_raw(&self.source_id);
                self.last = Some(g as u64);
                match prev {
                    Some(last) if g as u64 > last + 1 => {
                        let missing = g as u64 - last - 1;
                        log::warn!("{missing} generation(s) lost before {g}");
                        Sequenced::AcceptedAfterGap { front, missing }
                    }
                    _ => Sequenced::Accepted(front),
                }
            }
        }
    }

    /// Filters a stream down to the fronts that should reach the engine.
    pub fn sequence<'a, I>(&'a mut self, msgs: I) -> impl Iterator<Item = RawFront> + 'a
    where
        I: IntoIterator<Item = OscFrontMessage> + 'a,
    {
        msgs.into_iter().filter_map(move |m| match self.accept(&m) {
            Sequenced::Accepted(f) | Sequenced::AcceptedAfterGap { front: f, .. } => Some(f),
            Sequenced::Dropped { .. } => None,
        })
    }
}
