// Certificates for the standard four-point set on both sides of the
// N > rho sqrt(3) threshold.

use conewave::geometry::{construct_diverse, is_diverse, DiverseConstruction, DEFAULT_DIVERSE_THRESHOLD};

pub fn run_example() -> Vec<(f64, bool)> {
    let mut out = Vec::new();
    for n in [1.2, 1.8, 2.0, 3.0] {
        // construct_diverse refuses N <= sqrt(3); build those by hand
        let locs = construct_diverse(&DiverseConstruction::Standard { rho: 1.0, n })
            .unwrap_or([[n, 0.0, 0.0], [0.0, n, 0.0], [0.0, 0.0, n], [n / 3.0, n / 3.0, n / 3.0]]);
        match is_diverse(&locs, 1.0, 2048, DEFAULT_DIVERSE_THRESHOLD) {
            Ok(rep) => {
                println!("N = {n}: diverse = {}, min singular value {:.3e}", rep.diverse, rep.min_singular_value);
                out.push((n, rep.diverse));
            }
            Err(e) => {
                println!("N = {n}: {e}");
                out.push((n, false));
            }
        }
    }
    out
}

#[allow(dead_code)]
fn main() {
    run_example();
}
