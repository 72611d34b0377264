//! Spectrogram and spectral flatness of a pure path-1 tone versus path-2
//! with all partials sounding.

use sonopt::engine::{spectral_flatness, spectrogram_export, Engine, EngineParams};
use sonopt::front::RawFront;

fn main() {
    let params = EngineParams::default();
    let pts: Vec<(f64, f64)> = (0..100)
        .map(|i| {
            let x = i as f64 / 99.0;
            (x, (1.0 - x).powi(3))
        })
        .collect();
    let mut engine = Engine::new(params.clone()).unwrap();
    engine.ingest(RawFront::new(0, pts.clone())).unwrap();
    engine.ingest(RawFront::new(1, pts)).unwrap();
    let mut p1 = vec![0.0; 16_384];
    let mut p2 = vec![0.0; 16_384];
    engine.render_paths(&mut p1, &mut p2);

    for (name, track) in [("path 1", &p1), ("path 2", &p2)] {
        let sg = spectrogram_export(track, 4096, 1024).unwrap();
        let row = &sg.rows[0];
        let peak = (1..row.len())
            .max_by(|&a, &b| row[a].total_cmp(&row[b]))
            .unwrap();
        println!(
            "{name}: {} rows, peak {:.1} Hz, flatness {:.4}",
            sg.rows.len(),
            sg.bin_hz(peak, params.sample_rate_hz),
            spectral_flatness(row)
        );
    }
}
