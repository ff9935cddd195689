// Pointwise (a, b) from ray-attenuation profiles of four diverse sources.

use conewave::fields::{CoefficientSet, ScalarField};
use conewave::geometry::{construct_diverse, DiverseConstruction};
use conewave::inversion::{ab_data_from_alpha, recover_ab, relative_l2, DEFAULT_CONDITION_THRESHOLD};

pub fn run_example() -> f64 {
    let cs = CoefficientSet::new(
        ScalarField::bump(0.4, [0.1, 0.0, 0.0, 0.5], 0.6, 0.4),
        [ScalarField::zero(), ScalarField::bump(-0.3, [0.0, 0.1, 0.0, 0.5], 0.5, 0.4), ScalarField::bump(0.2, [0.0, 0.0, 0.1, 0.5], 0.5, 0.4)],
        ScalarField::zero(),
    );
    let locs = construct_diverse(&DiverseConstruction::Standard { rho: 1.0, n: 2.0 }).expect("standard set");
    let points: Vec<([f64; 3], f64)> = (0..6).map(|k| ([0.05 * k as f64 - 0.1, 0.1, -0.05], 0.4 + 0.04 * k as f64)).collect();
    let data = ab_data_from_alpha(&cs, &locs, &points, 400).expect("profiles");
    let rec = recover_ab(&locs, &points, &data, DEFAULT_CONDITION_THRESHOLD).expect("solve");
    let got: Vec<Vec<f64>> = (0..points.len()).map(|k| vec![rec.a[k], rec.b[k][0], rec.b[k][1], rec.b[k][2]]).collect();
    let want: Vec<Vec<f64>> = points.iter().map(|&(x, t)| cs.values(x, t)[..4].to_vec()).collect();
    let err = relative_l2(&got, &want);
    println!("relative L2 error of (a, b): {err:.3e}");
    err
}

#[allow(dead_code)]
fn main() {
    run_example();
}
