// The attenuation amplitude alpha = exp(int (a + theta . b)) / r and the
// residual of T alpha = 0 at a few points.

use conewave::fields::{CoefficientSet, ScalarField};
use conewave::transport::{alpha, AttenuationField, apply_t};

pub fn run_example() -> f64 {
    let cs = CoefficientSet::new(
        ScalarField::bump(0.5, [0.0, 0.0, 0.0, 0.5], 0.6, 0.4),
        [ScalarField::zero(), ScalarField::bump(0.3, [0.1, 0.0, 0.0, 0.5], 0.5, 0.4), ScalarField::zero()],
        ScalarField::zero(),
    );
    let xi = [2.0, 0.0, 0.0];
    let field = AttenuationField::new(&cs, xi).expect("attenuation").field();
    let mut worst: f64 = 0.0;
    for (x, t) in [([0.0, 0.1, 0.0], 0.5), ([-0.3, 0.2, 0.1], 0.7), ([0.2, -0.2, 0.0], 0.4)] {
        let a = alpha(&cs, xi, x, t).expect("alpha");
        let res = apply_t(&cs, xi, &field, x, t).expect("T alpha");
        worst = worst.max(res.abs());
        println!("alpha = {a:.10}, T alpha = {res:+.2e}");
    }
    worst
}

#[allow(dead_code)]
fn main() {
    run_example();
}
