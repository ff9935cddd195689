// Integrating weighted cone norms over the activation time recovers
// sqrt(2) times the weighted space-time norm.

use conewave::carleman::{tau_integral_identity, Focus, IdentityQuad};
use conewave::fields::ScalarField;
use conewave::run::identity_window;

pub fn run_example() -> f64 {
    let f = ScalarField::bump(1.0, [0.1, 0.0, 0.0, 0.5], 0.5, 0.4);
    let focus = Focus::of(&f);
    let xi = [2.0, 0.0, 0.0];
    let mut worst: f64 = 0.0;
    for sigma in [0.0, 5.0] {
        let r = tau_integral_identity(&f, xi, sigma, identity_window(&focus, xi), &focus, &IdentityQuad::default()).expect("identity");
        println!("sigma {sigma}: cone side {:.8e}, volume side {:.8e}, gap {:.2e}", r.lhs, r.rhs, r.gap);
        worst = worst.max(r.gap);
    }
    worst
}

#[allow(dead_code)]
fn main() {
    run_example();
}
