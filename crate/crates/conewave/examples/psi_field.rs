// The auxiliary field psi with box psi = c - a_t + div b at the final time.

use conewave::fields::{CoefficientSet, ScalarField};
use conewave::forward::{solve_psi, GridSpec};

pub fn run_example() -> f64 {
    let cs = CoefficientSet::new(
        ScalarField::bump(0.3, [0.0, 0.0, 0.0, 0.4], 0.5, 0.3),
        [ScalarField::zero(), ScalarField::zero(), ScalarField::zero()],
        ScalarField::bump(1.0, [0.0, 0.0, 0.0, 0.4], 0.5, 0.3),
    );
    let grid = GridSpec::for_support(0.5, 1.0, 16);
    let r = solve_psi(&cs, &grid).expect("psi");
    let peak = r.w.iter().map(|v| v.abs()).fold(0.0, f64::max);
    println!("{} steps of {:.4}, max |psi(T)| = {peak:.4e}", r.steps, r.dt);
    peak
}

#[allow(dead_code)]
fn main() {
    run_example();
}
