//! Drive an experiment from a TOML config, as the `lqg` binary does.
use lqg::experiment::{run, ExperimentConfig};

const CONFIG: &str = r#"
kind = "gmc-mass"
seed = 11
samples = 2000
gamma = 0.8

[manifold]
type = "sphere"
n = 2
radius = 1.0
"#;

fn main() -> lqg::Result<()> {
    let config = ExperimentConfig::from_toml(CONFIG)?;
    let result = run(&config)?;
    for c in &result.checks {
        println!("{} {}", if c.pass { "PASS" } else { "FAIL" }, c.name);
    }
    println!("{}", serde_json::to_string_pretty(&result.summary)?);
    Ok(())
}
