//! Running a registered scenario from code.

use cgconf::scenario::{registry, run_scenario, ScenarioConfig};

fn main() {
    for info in registry() {
        println!("{:<26} {}", info.name, info.summary);
    }
    let config = ScenarioConfig::new("bundle-conformality").with_samples(10).with_param("pair", 1.0).with_param("alpha", 0.5);
    let report = run_scenario(&config).expect("valid configuration");
    for check in &report.checks {
        println!("{} {} (residual {:e})", if check.pass { "ok  " } else { "FAIL" }, check.name, check.residual);
    }
}
