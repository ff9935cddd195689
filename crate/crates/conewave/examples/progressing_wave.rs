// Progressing-wave amplitudes of V: b_0 is the cone value of v, and the
// truncated expansion is evaluated behind the front.

use conewave::fields::{CoefficientSet, ScalarField};
use conewave::forward::expand_v;
use conewave::transport::delta_amplitudes;

pub fn run_example() -> f64 {
    let cs = CoefficientSet::new(
        ScalarField::bump(0.3, [0.0, 0.0, 0.0, 0.5], 0.6, 0.4),
        [ScalarField::zero(), ScalarField::zero(), ScalarField::zero()],
        ScalarField::bump(0.8, [0.1, 0.0, 0.0, 0.5], 0.5, 0.4),
    );
    let xi = [2.0, 0.0, 0.0];
    let tau = -1.2;
    let (_, amps) = delta_amplitudes(&cs, xi, 1).expect("amplitudes");
    let x = [0.1, 0.05, 0.0];
    let r = ((x[0] - xi[0]).powi(2) + x[1] * x[1] + x[2] * x[2]).sqrt();
    let b0 = amps.value(0, x, tau + r).expect("b0");
    let v_cone = expand_v(&cs, xi, tau, 1, x, tau + r).expect("v on the cone");
    println!("b_0 = {b0:+.10e}, v on the cone = {v_cone:+.10e}");
    for s in [0.05, 0.1, 0.2] {
        println!("v at cone distance {s}: {:+.6e}", expand_v(&cs, xi, tau, 1, x, tau + r + s).expect("v"));
    }
    (b0 - v_cone).abs()
}

#[allow(dead_code)]
fn main() {
    run_example();
}
