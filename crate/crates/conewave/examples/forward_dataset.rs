// The forward map on a small grid, written as a trace dataset and read
// back bit for bit.

use conewave::fields::{CoefficientSet, ScalarField};
use conewave::forward::{forward_map, GridSpec, TraceDataset};

pub fn run_example() -> bool {
    let cs = CoefficientSet::new(
        ScalarField::bump(0.3, [0.0, 0.0, 0.0, 0.5], 0.5, 0.4),
        [ScalarField::zero(), ScalarField::zero(), ScalarField::zero()],
        ScalarField::bump(0.5, [0.0, 0.1, 0.0, 0.5], 0.5, 0.4),
    );
    let grid = GridSpec::for_support(0.6, 1.0, 12);
    let ds = forward_map(&cs, &[[2.0, 0.0, 0.0]], &[-1.5, -1.0, 0.5], &grid, 0).expect("forward map");
    let dir = std::env::temp_dir().join(format!("conewave-forward-example-{}", std::process::id()));
    ds.write_dir(&dir).expect("write");
    let back = TraceDataset::read_dir(&dir).expect("read");
    let _ = std::fs::remove_dir_all(&dir);
    let peak = ds.sources[0].rows.iter().map(|r| r.v.abs()).fold(0.0, f64::max);
    println!("{} rows, largest |v| = {peak:.3e}", ds.sources[0].rows.len());
    back == ds
}

#[allow(dead_code)]
fn main() {
    println!("round trip exact: {}", run_example());
}
