// A reduced factor-recovery sweep. Pass `full` for the desk-scale
// protocol (16 dimensions, 200 instances, 10 replicates of 200 iterations).

use deep_ibp::experiment::{run_experiment, ExperimentConfig};
use deep_ibp::inference::InferenceConfig;
use deep_ibp::model::HyperParams;

fn config(full: bool) -> ExperimentConfig {
    if full {
        ExperimentConfig {
            k_true: vec![3, 5, 8],
            ..ExperimentConfig::default()
        }
    } else {
        ExperimentConfig {
            n_observed: 8,
            n_instances: 40,
            k_true: vec![2, 4],
            iterations: 10,
            replicates: 2,
            ..ExperimentConfig::default()
        }
    }
}

pub fn run_with(full: bool) -> deep_ibp::Result<()> {
    let cfg = config(full);
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let (_, stats) = run_experiment(&cfg, &HyperParams::default(), &InferenceConfig::default(), jobs)?;
    println!("{:>6}  {:<14} {:>7} {:>8}", "K_true", "init", "mean", "var");
    for c in &stats.cells {
        println!("{:>6}  {:<14} {:>7.2} {:>8.2}", c.k_true, c.init, c.mean, c.variance);
    }
    Ok(())
}

pub fn run_example() -> deep_ibp::Result<()> {
    run_with(false)
}

#[allow(dead_code)]
fn main() -> deep_ibp::Result<()> {
    run_with(std::env::args().any(|a| a == "full"))
}
