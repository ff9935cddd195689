// q on a characteristic cone from the cone trace of v with (a, b) known.

use conewave::fields::{CoefficientSet, ScalarField};
use conewave::forward::cone_trace_v;
use conewave::geometry::SourceEvent;
use conewave::inversion::{recover_q, relative_l2, ConeTrace, QMode};
use conewave::quad::SphereRule;
use conewave::transport::RayQuad;

pub fn run_example() -> f64 {
    let cs = CoefficientSet::new(
        ScalarField::bump(0.3, [0.1, 0.0, 0.0, 0.5], 0.6, 0.4),
        [ScalarField::bump(0.2, [0.0, 0.1, 0.0, 0.5], 0.5, 0.4), ScalarField::zero(), ScalarField::zero()],
        ScalarField::bump(0.6, [0.0, 0.0, 0.1, 0.5], 0.5, 0.4),
    );
    let src = SourceEvent::new([2.0, 0.0, 0.0], -1.2);
    let dirs = SphereRule::cap([-1.0, 0.0, 0.0], 0.4, 2, 4).dirs;
    let rs: Vec<f64> = (0..150).map(|k| 1.3 + 0.9 * k as f64 / 149.0).collect();
    let values = cone_trace_v(&cs, src, &dirs, &rs, &RayQuad::default()).expect("cone trace");
    let trace = ConeTrace { xi: src.xi, tau: src.tau, dirs, rs, values };
    let q = recover_q(&trace, &cs, QMode::Absolute).expect("q");
    let truth = trace.map_layout(|x, t| cs.q_value(x, t));
    let err = relative_l2(&q.values, &truth);
    println!("relative L2 error of q on the cone: {err:.3e}");
    err
}

#[allow(dead_code)]
fn main() {
    run_example();
}
