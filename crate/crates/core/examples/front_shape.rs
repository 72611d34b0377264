//! Normalize a raw front, measure each point's distance from the chord and
//! write the result into the path-1 wavetable.

use sonopt::front::{nondominated_filter, normalize, RawFront};
use sonopt::shape::{chord_distances, chord_of, Wavetable};

fn main() {
    let raw = RawFront::new(
        0,
        vec![
            (12.0, 3.0),
            (2.0, 9.0),
            (5.0, 4.0),
            (6.0, 6.5),
            (8.0, 3.5),
            (3.0, 6.0),
        ],
    );
    let kept = nondominated_filter(&raw.points);
    println!("non-dominated: {kept:?}");

    let front = normalize(&RawFront {
        points: kept,
        ..raw
    });
    let chord = chord_of(&front);
    let d = chord_distances(&front, &chord);
    for (p, d) in front.points().iter().zip(&d) {
        println!("({:.3}, {:.3})  distance {d:.4}", p.0, p.1);
    }

    let mut table = Wavetable::new(202, 500.0, 80.0);
    table.write(&d).unwrap();
    println!(
        "readable {} of {} samples: {:?}",
        table.readable_len(),
        table.capacity(),
        table.readable()
    );
}
