//! Run NSGA-II and MOEA/D on each built-in problem and report front sizes
//! and, for ZDT1, the distance to the true front.

use sonopt::harness::{
    igd, run_algorithm, zdt1_reference, Algorithm, NullSink, Problem, ProblemKind,
};

fn main() {
    let gens = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(100);
    for kind in ProblemKind::ALL {
        for algo in Algorithm::ALL {
            let log = run_algorithm(&Problem::new(kind), algo, gens, 1, &mut NullSink).unwrap();
            let last = log.fronts().last().unwrap();
            let quality = if kind == ProblemKind::Zdt1 {
                format!(", IGD {:.4}", igd(&zdt1_reference(1000), &last.points))
            } else {
                String::new()
            };
            println!(
                "{kind:8} {algo:6} gen {}: {} points{quality}",
                last.generation_index,
                last.points.len()
            );
        }
    }
}
