// Weighted norms on Q, H and C and the two sides of the Carleman
// inequality for one bump over a sigma sweep.

use conewave::carleman::{carleman_check, weighted_norm, Focus, NormQuad, Region};
use conewave::fields::{CoefficientSet, ScalarField};
use conewave::geometry::{ConeRegion, SourceEvent};

pub fn run_example() -> Vec<f64> {
    let cone = ConeRegion::new(SourceEvent::new([2.0, 0.0, 0.0], -1.5), 1.0);
    let w = ScalarField::bump(1.0, [0.3, 0.0, 0.0, 0.6], 0.3, 0.25);
    for region in [Region::Q, Region::H, Region::C] {
        let n = weighted_norm(&w, &cone, region, 2.0, 1).expect("norm");
        println!("{region:?}: ||w||_1 at sigma 2 = {:.6e}", n.value);
    }
    let cs = CoefficientSet::new(ScalarField::bump(0.2, [0.0, 0.0, 0.0, 0.5], 0.5, 0.4), [ScalarField::zero(), ScalarField::zero(), ScalarField::zero()], ScalarField::zero());
    let focus = Focus::ball([0.3, 0.0, 0.0], 0.3, 0.35, 0.85);
    let rep = carleman_check(&cs, &cone, &w, &[4.0, 8.0, 16.0], &focus, &NormQuad::default()).expect("check");
    rep.rows
        .iter()
        .map(|r| {
            println!("sigma {:>4}: LHS/RHS = {:.4e}", r.sigma, r.ratio().unwrap_or(0.0));
            r.ratio().unwrap_or(0.0)
        })
        .collect()
}

#[allow(dead_code)]
fn main() {
    run_example();
}
