//! Render one second of path 1 for a convex and a concave front and save
//! both as WAV files.

use std::path::PathBuf;

use sonopt::engine::{rms, write_wav, Engine, EngineParams, WavFormat};
use sonopt::front::RawFront;

fn front(curvature: f64) -> Vec<(f64, f64)> {
    (0..60)
        .map(|i| {
            let x = i as f64 / 59.0;
            (x, (1.0 - x.powf(curvature)).powf(1.0 / curvature))
        })
        .collect()
}

fn main() {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(std::env::temp_dir);
    let params = EngineParams {
        sample_value_scaling: 4.0,
        gain_p2: 0.0,
        ..EngineParams::default()
    };
    for (name, c) in [("convex", 0.5), ("concave", 2.0)] {
        let mut engine = Engine::new(params.clone()).unwrap();
        engine.ingest(RawFront::new(0, front(c))).unwrap();
        let mut audio = vec![0.0; 48_000];
        engine.render_block(&mut audio);
        let path = dir.join(format!("sonopt-{name}.wav"));
        write_wav(&path, &audio, 48_000, WavFormat::Pcm16).unwrap();
        println!("{name}: rms {:.4} -> {}", rms(&audio), path.display());
    }
}
