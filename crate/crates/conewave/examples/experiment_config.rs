// An experiment configuration document run through the orchestrator.

use conewave::config::ExperimentConfig;
use conewave::run::{run, Command, RunOptions};

const CONFIG: &str = r#"{
  "schema": "conewave-config/1",
  "diverse": {"mode": "standard", "rho": 1.0, "n": 2.0},
  "seed": 7
}"#;

pub fn run_example() -> bool {
    let cfg = ExperimentConfig::parse(CONFIG).expect("valid config");
    let out = std::env::temp_dir().join(format!("conewave-config-example-{}", std::process::id()));
    let opts = RunOptions { out: Some(out.clone()), threads: Some(1), ..Default::default() };
    let mut ok = true;
    for cmd in [Command::Validate, Command::Diverse] {
        let o = run(cmd, &cfg, &opts).expect("run");
        o.lines.iter().for_each(|l| println!("{l}"));
        ok &= o.checks_passed;
    }
    let bad = ExperimentConfig::parse(r#"{"schema": "conewave-config/1", "sigma": [1]}"#);
    println!("misspelt key: {}", bad.as_ref().err().map(|e| e.to_string()).unwrap_or_default());
    let _ = std::fs::remove_dir_all(&out);
    ok && bad.is_err()
}

#[allow(dead_code)]
fn main() {
    run_example();
}
