//! Every example under examples/ runs and produces its expected outcome.

#[allow(dead_code)]
mod coefficients {
    include!("../examples/coefficients.rs");
}

#[test]
fn example_coefficients() {
    let v = coefficients::run_example();
    assert!(v < 1e-10, "{v}");
}

#[allow(dead_code)]
mod attenuation {
    include!("../examples/attenuation.rs");
}

#[test]
fn example_attenuation() {
    let v = attenuation::run_example();
    assert!(v < 1e-8, "{v}");
}

#[allow(dead_code)]
mod progressing_wave {
    include!("../examples/progressing_wave.rs");
}

#[test]
fn example_progressing_wave() {
    let v = progressing_wave::run_example();
    assert!(v < 1e-12, "{v}");
}

#[allow(dead_code)]
mod forward_dataset {
    include!("../examples/forward_dataset.rs");
}

#[test]
fn example_forward_dataset() {
    let v = forward_dataset::run_example();
    assert!(v);
}

#[allow(dead_code)]
mod diverse_sets {
    include!("../examples/diverse_sets.rs");
}

#[test]
fn example_diverse_sets() {
    let v = diverse_sets::run_example();
    assert_eq!(v.iter().map(|p| p.1).collect::<Vec<_>>(), vec![false, true, true, true]);
}

#[allow(dead_code)]
mod carleman_weights {
    include!("../examples/carleman_weights.rs");
}

#[test]
fn example_carleman_weights() {
    let v = carleman_weights::run_example();
    assert!(v.len() == 3 && v.iter().all(|r| r.is_finite() && *r > 0.0));
}

#[allow(dead_code)]
mod tau_identity {
    include!("../examples/tau_identity.rs");
}

#[test]
fn example_tau_identity() {
    let v = tau_identity::run_example();
    assert!(v < 1e-2, "{v}");
}

#[allow(dead_code)]
mod recover_ab {
    include!("../examples/recover_ab.rs");
}

#[test]
fn example_recover_ab() {
    let v = recover_ab::run_example();
    assert!(v < 1e-3, "{v}");
}

#[allow(dead_code)]
mod recover_q {
    include!("../examples/recover_q.rs");
}

#[test]
fn example_recover_q() {
    let v = recover_q::run_example();
    assert!(v < 5e-2, "{v}");
}

#[allow(dead_code)]
mod stability_q {
    include!("../examples/stability_q.rs");
}

#[test]
fn example_stability_q() {
    let v = stability_q::run_example();
    assert!(v < 2.0, "{v}");
}

#[allow(dead_code)]
mod psi_field {
    include!("../examples/psi_field.rs");
}

#[test]
fn example_psi_field() {
    let v = psi_field::run_example();
    assert!(v > 0.0 && v.is_finite());
}

#[allow(dead_code)]
mod experiment_config {
    include!("../examples/experiment_config.rs");
}

#[test]
fn example_experiment_config() {
    let v = experiment_config::run_example();
    assert!(v);
}
