use std::io;
use std::net::{SocketAddr, ToSocketAddrs, UdpSocket};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

use super::codec::{decode_packet, OscMessage, MAX_PACKET_BYTES};
use super::{FrontSequencer, Sequenced};
use crate::engine::EngineQueue;
use crate::front::RawFront;

#[derive(Debug, Default)]
pub struct ServerStats {
    pub packets: AtomicU64,
    pub rejected: AtomicU64,
    pub fronts: AtomicU64,
    pub params: AtomicU64,
    pub late: AtomicU64,
    pub gaps: AtomicU64,
}

impl ServerStats {
    pub fn get(counter: &AtomicU64) -> u64 {
        counter.load(Ordering::Relaxed)
    }
}

/// UDP listener that decodes datagrams and enqueues them for the engine.
/// Malformed input is counted and logged, never fatal.
pub struct OscServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    stats: Arc<ServerStats>,
    handle: Option<JoinHandle<()>>,
}

impl OscServer {
    /// Binds and starts the receive thread. Every accepted front is also
    /// handed to `on_front`, e.g. to record a run log.
    pub fn spawn<A, F>(addr: A, queue: Arc<EngineQueue>, mut on_front: F) -> io::Result<Self>
    where
        A: ToSocketAddrs,
        F: FnMut(&RawFront) + Send + 'static,
    {
        let socket = UdpSocket::bind(addr)?;
        socket.set_read_timeout(Some(Duration::from_millis(50)))?;
        let addr = socket.local_addr()?;
        let stop = Arc::new(AtomicBool::new(false));
        let stats = Arc::new(ServerStats::default());
        let handle = {
            let stop = stop.clone();
            let stats = stats.clone();
            std::thread::Builder::new()
                .name("osc-ingest".into())
                .spawn(move || {
                    let mut seq = FrontSequencer::new(addr.to_string());
                    let mut buf = vec![0u8; MAX_PACKET_BYTES + 1];
                    while !stop.load(Ordering::Relaxed) {
                        let len = match socket.recv_from(&mut buf) {
                            Ok((len, _)) => len,
                            Err(e)
                                if matches!(
                                    e.kind(),
                                    io::ErrorKind::WouldBlock | io::ErrorKind::TimedOut
                                ) =>
                            {
                                continue
                            }
                            Err(e) => {
                                log::error!("osc socket error: {e}");
                                continue;
                            }
                        };
                        stats.packets.fetch_add(1, Ordering::Relaxed);
                        match decode_packet(&buf[..len]) {
                            Ok(OscMessage::Front(m)) => match seq.accept(&m) {
                                Sequenced::Accepted(f) => {
                                    stats.fronts.fetch_add(1, Ordering::Relaxed);
                                    on_front(&f);
                                    queue.push_front(f);
                                }
                                Sequenced::AcceptedAfterGap { front, .. } => {
                                    stats.fronts.fetch_add(1, Ordering::Relaxed);
                                    stats.gaps.fetch_add(1, Ordering::Relaxed);
                                    on_front(&front);
                                    queue.push_front(front);
                                }
                                Sequenced::Dropped { .. } => {
                                    stats.late.fetch_add(1, Ordering::Relaxed);
                                }
                            },
                            Ok(OscMessage::Param(p)) => {
                                stats.params.fetch_add(1, Ordering::Relaxed);
                                queue.push_param(p.param.name(), p.value as f64);
                            }
                            Err(e) => {
                                stats.rejected.fetch_add(1, Ordering::Relaxed);
                                log::debug!("rejected datagram: {e}");
                            }
                        }
                    }
                })?
        };
        Ok(Self {
            addr,
            stop,
            stats,
            handle: Some(handle),
        })
    }

    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn stats(&self) -> &ServerStats {
        &self.stats
    }

    pub fn shutdown(mut self) {
        self.stop_thread();
    }

    fn stop_thread(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

impl Drop for OscServer {
    fn drop(&mut self) {
        self.stop_thread();
    }
}
