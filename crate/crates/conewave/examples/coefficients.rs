// Build a coefficient set, evaluate q and check that a gauge transform
// leaves c and curl(a, b) unchanged while q moves.

use conewave::fields::{gauge_transform, CoefficientSet, ScalarField};

pub fn run_example() -> f64 {
    let cs = CoefficientSet::new(
        ScalarField::bump(0.4, [0.1, 0.0, 0.0, 0.5], 0.6, 0.4),
        [ScalarField::bump(0.3, [0.0, 0.2, 0.0, 0.5], 0.5, 0.4), ScalarField::zero(), ScalarField::zero()],
        ScalarField::bump(-0.5, [0.0, 0.0, 0.1, 0.5], 0.5, 0.4),
    );
    let phi = ScalarField::bump(0.2, [0.0, 0.0, 0.0, 0.4], 0.7, 0.3);
    let gauged = gauge_transform(&cs, &phi).expect("gauge transform");
    let mut worst: f64 = 0.0;
    for (x, t) in [([0.1, 0.2, -0.1], 0.45), ([-0.2, 0.0, 0.3], 0.55), ([0.0, 0.0, 0.0], 0.5)] {
        worst = worst.max((cs.c.value(x, t) - gauged.c.value(x, t)).abs());
        let (c1, c2) = (cs.curl(x, t), gauged.curl(x, t));
        for i in 0..6 {
            worst = worst.max((c1[i] - c2[i]).abs());
        }
        println!("q({x:?}, {t}) = {:+.6e}, after the gauge {:+.6e}", cs.q_value(x, t), gauged.q_value(x, t));
    }
    println!("largest change of c and curl under the gauge: {worst:.2e}");
    worst
}

#[allow(dead_code)]
fn main() {
    run_example();
}
