//! An optimizer talking to a listening engine over OSC, both in one
//! process: fronts go out through UDP, the server queues them and a live
//! engine renders blocks from the queue.

use std::time::Duration;

use sonopt::engine::{Engine, EngineParams, EngineQueue, LiveEngine, SharedState};
use sonopt::harness::{run_algorithm, Algorithm, OscSink, Problem, ProblemKind};
use sonopt::osc::{OscServer, ServerStats};

fn main() {
    let queue = EngineQueue::new(8);
    let server = OscServer::spawn("127.0.0.1:0", queue.clone(), |_| {}).unwrap();
    println!("engine listening on {}", server.local_addr());

    let state = SharedState::new();
    let mut live = LiveEngine::new(
        Engine::new(EngineParams::default()).unwrap(),
        queue.clone(),
        state.clone(),
    );

    let target = server.local_addr();
    let producer = std::thread::spawn(move || {
        let mut sink = OscSink::new(target).unwrap();
        run_algorithm(
            &Problem::new(ProblemKind::Zdt1),
            Algorithm::Nsga2,
            30,
            5,
            &mut sink,
        )
        .unwrap()
    });
    let mut block = vec![0.0; 512];
    for _ in 0..40 {
        live.next_block(&mut block);
        let s = state.latest();
        println!(
            "block {:2}: generation {:?}, rms p1 {:.3} p2 {:.3}",
            s.block, s.generation_index, s.rms.p1, s.rms.p2
        );
        std::thread::sleep(Duration::from_millis(10));
    }
    producer.join().unwrap();
    println!(
        "fronts {} dropped by queue {}",
        ServerStats::get(&server.stats().fronts),
        queue.dropped_fronts()
    );
}
