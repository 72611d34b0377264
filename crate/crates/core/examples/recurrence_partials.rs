//! Path 2 by hand: detect recurrence between consecutive fronts, thin it
//! out and watch the partial counters grow and reset.

use sonopt::front::GenerationFront;
use sonopt::recurrence::{detect_recurrence, throttle_recurrence, PartialBank};

fn main() {
    let base: Vec<(f64, f64)> = (0..20)
        .map(|i| {
            let x = i as f64 / 19.0;
            (x, 1.0 - x.sqrt())
        })
        .collect();
    let mut bank = PartialBank::new(20, 80.0, 0.05);
    let mut prev = GenerationFront::from_normalized(0, base.clone());
    for g in 1..8u64 {
        // points 5..10 drift from generation 4 on
        let pts: Vec<(f64, f64)> = base
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                if g >= 4 && (5..10).contains(&i) {
                    (a, b + 0.01 * g as f64)
                } else {
                    (a, b)
                }
            })
            .collect();
        let cur = GenerationFront::from_normalized(g, pts);
        let report = detect_recurrence(&prev, &cur, 1e-9).unwrap();
        let kept = throttle_recurrence(&report, 0.5, 7);
        bank.update(&kept).unwrap();
        println!(
            "gen {g}: {} recurrent, {} kept, counters {:?}",
            report.recurrent_indices.len(),
            kept.recurrent_indices.len(),
            bank.counters()
        );
        prev = cur;
    }
    let mut block = vec![0.0; 480];
    bank.render(48_000.0, 1.0, &mut block);
    println!(
        "active partials {}, first samples {:?}",
        bank.active_count(),
        &block[..4]
    );
}
