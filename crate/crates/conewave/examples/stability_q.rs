// Empirical stability ratio for q with (a, b) fixed over three
// perturbation amplitudes.

use conewave::fields::{CoefficientSet, ScalarField};
use conewave::forward::GridSpec;
use conewave::inversion::{stability_report, StabilitySetup, Theorem};
use conewave::run::perturb;

pub fn run_example() -> f64 {
    let cs = CoefficientSet::new(
        ScalarField::bump(0.3, [0.1, 0.0, 0.0, 0.5], 0.6, 0.4),
        [ScalarField::zero(), ScalarField::zero(), ScalarField::zero()],
        ScalarField::bump(0.5, [0.0, 0.0, 0.1, 0.5], 0.5, 0.4),
    );
    let dir = CoefficientSet::new(
        ScalarField::zero(),
        [ScalarField::zero(), ScalarField::zero(), ScalarField::zero()],
        ScalarField::bump(1.0, [0.1, 0.1, 0.0, 0.5], 0.5, 0.4),
    );
    let perturbed: Vec<_> = [1e-3, 1e-2, 1e-1].iter().map(|&e| (e, perturb(&cs, &dir, e, Theorem::Q))).collect();
    let setup = StabilitySetup {
        theorem: Theorem::Q,
        sources: vec![[2.0, 0.0, 0.0]],
        taus: vec![-2.0, -1.5, -1.0, -0.5],
        grid: GridSpec::for_support(0.7, 1.0, 16),
        n: 0,
        include_psi: false,
    };
    let rep = stability_report(&cs, &perturbed, &setup).expect("report");
    for r in &rep.rows {
        println!("amplitude {:.0e}: LHS {:.4e}, RHS {:.4e}, ratio {:.4}", r.amplitude, r.lhs, r.rhs, r.ratio);
    }
    println!("spread {:.4}", rep.spread());
    rep.spread()
}

#[allow(dead_code)]
fn main() {
    run_example();
}
