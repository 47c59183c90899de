//! Driving an experiment from code instead of the binary.

use horolab::experiments::{execute, Experiment, ExperimentConfig};

fn main() -> horolab::Result<()> {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/cusped.conf");
    let overrides = ["letter=p".to_string(), "dilations=0.25 0.5 1 2 4".to_string()];
    let cfg = ExperimentConfig::load(&path, Experiment::Closure, &overrides, None, None, true)?;
    let report = execute(&cfg)?;
    for line in &report.summary {
        println!("{line}");
    }
    for (name, bytes) in &report.files {
        println!("--- {name}\n{}", String::from_utf8_lossy(bytes));
    }
    Ok(())
}
