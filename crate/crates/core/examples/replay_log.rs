//! Re-render a recorded log with different live parameters injected
//! halfway through.

use std::path::PathBuf;

use sonopt::engine::{render_run, write_wav, RunEventLog, WavFormat};
use sonopt::harness::{run_algorithm, Algorithm, NullSink, Problem, ProblemKind};

fn main() {
    let dir = std::env::temp_dir();
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            let p = dir.join("kursawe.jsonl");
            run_algorithm(
                &Problem::new(ProblemKind::Kursawe),
                Algorithm::Moead,
                40,
                3,
                &mut NullSink,
            )
            .unwrap()
            .save(&p)
            .unwrap();
            p
        });
    let log = RunEventLog::load(&path).unwrap();
    let mut params = log.header.params.clone();
    params.seconds_per_generation = 0.1;

    let mut edited = RunEventLog::new(log.header.clone());
    let half = log.fronts().count() as u64 / 2;
    for f in log.fronts() {
        if f.generation_index == half {
            edited.push_param(half, "gain_p1", 0.05);
            edited.push_param(half, "fundamental_hz", 160.0);
        }
        edited.push_front(f);
    }
    let out = render_run(&edited, &params, false).unwrap();
    let wav = dir.join("kursawe-edited.wav");
    write_wav(&wav, &out.audio, 48_000, WavFormat::Float32).unwrap();
    println!(
        "{} generations -> {}",
        out.snapshots.generations.len(),
        wav.display()
    );
}
