//! Serve the WebSocket control endpoint next to a paced live engine. Point
//! a client at the printed address and send
//! `{"set":{"param":"gain_p1","value":0.1}}`.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use sonopt::control::ControlServer;
use sonopt::engine::{Engine, EngineParams, EngineQueue, LiveEngine, SharedState};
use sonopt::harness::{run_algorithm, Algorithm, Problem, ProblemKind, QueueSink};

fn main() {
    let seconds: f64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(3.0);
    let queue = EngineQueue::new(4);
    let state = SharedState::new();
    let control = ControlServer::spawn("127.0.0.1:0", queue.clone(), state.clone(), |p, v| {
        println!("set {p} = {v}")
    })
    .unwrap();
    println!("control on ws://{}", control.local_addr());

    let done = Arc::new(AtomicBool::new(false));
    let feeder = {
        let queue = queue.clone();
        let done = done.clone();
        std::thread::spawn(move || {
            let log = run_algorithm(
                &Problem::new(ProblemKind::Tanaka),
                Algorithm::Nsga2,
                200,
                8,
                &mut sonopt::harness::NullSink,
            )
            .unwrap();
            let mut sink = QueueSink(queue);
            for f in log.fronts() {
                if done.load(Ordering::Relaxed) {
                    break;
                }
                use sonopt::harness::FrontSink;
                sink.emit(&f).unwrap();
                std::thread::sleep(Duration::from_millis(100));
            }
        })
    };

    let mut live = LiveEngine::new(
        Engine::new(EngineParams::default()).unwrap(),
        queue,
        state.clone(),
    );
    let mut block = vec![0.0; 480];
    let start = Instant::now();
    while start.elapsed().as_secs_f64() < seconds {
        live.next_block(&mut block);
        std::thread::sleep(Duration::from_millis(10));
    }
    done.store(true, Ordering::Relaxed);
    feeder.join().unwrap();
    let s = state.latest();
    println!(
        "stopped at generation {:?} with {} clients",
        s.generation_index,
        control.client_count()
    );
}
