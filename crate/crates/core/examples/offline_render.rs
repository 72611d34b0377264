//! The whole offline pipeline: optimizer run, JSONL log, WAV, per-generation
//! snapshots and a spectrogram CSV.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use sonopt::engine::{render_run, spectrogram_export, write_wav, EngineParams, WavFormat};
use sonopt::harness::{run_algorithm, Algorithm, NullSink, Problem, ProblemKind};

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let params = EngineParams {
        seconds_per_generation: 0.1,
        ..EngineParams::default()
    };
    let mut log = run_algorithm(
        &Problem::new(ProblemKind::Zdt1),
        Algorithm::Nsga2,
        100,
        42,
        &mut NullSink,
    )
    .unwrap();
    log.header.params = params.clone();
    log.save(dir.join("zdt1.jsonl")).unwrap();

    let out = render_run(&log, &params, false).unwrap();
    write_wav(dir.join("zdt1.wav"), &out.audio, 48_000, WavFormat::Pcm16).unwrap();
    out.snapshots.save(dir.join("zdt1.snapshots.json")).unwrap();
    let sg = spectrogram_export(&out.audio, 4096, 1024).unwrap();
    sg.write_csv(BufWriter::new(File::create(dir.join("zdt1.csv")).unwrap()))
        .unwrap();

    for s in out.snapshots.generations.iter().step_by(20) {
        println!(
            "gen {:3}: {:3} points, {:3} active partials, rms p1 {:.3} p2 {:.3}",
            s.generation_index, s.points, s.active_partials, s.rms_p1, s.rms_p2
        );
    }
    println!(
        "wrote {}",
        dir.join("zdt1.{jsonl,wav,snapshots.json,csv}").display()
    );
}
