// Two hidden layers, inferred one layer at a time.

use deep_ibp::inference::{run_layerwise, InferenceConfig};
use deep_ibp::model::{generate_dataset, GenerativeModel, HyperParams};
use deep_ibp::rng::rng_from_seed;

pub fn run_example() -> deep_ibp::Result<()> {
    let hyper = HyperParams {
        num_layers: 2,
        layer_widths: vec![3, 2],
        ..HyperParams::default()
    };
    let mut rng = rng_from_seed(5);
    let truth = GenerativeModel::sample_linked(hyper.clone(), 8, &mut rng)?;
    let x = generate_dataset(&truth, 50, &mut rng)?.pop().expect("observed layer");

    let cfg = InferenceConfig {
        iterations: 15,
        layerwise_outer_loops: 2,
        seed: 9,
        ..InferenceConfig::default()
    };
    let run = run_layerwise(&x, 2, &cfg, &hyper)?;
    for (l, s) in run.states.iter().enumerate() {
        println!("layer {}: K = {} ({} linked), trace length {}", l + 1, s.num_factors(), s.num_active(), run.traces[l].len());
    }
    let lj: Vec<String> = run.outer_log_joint.iter().map(|v| format!("{v:.1}")).collect();
    println!("stack log-joint per outer loop: {}", lj.join(", "));
    Ok(())
}

#[allow(dead_code)]
fn main() -> deep_ibp::Result<()> {
    run_example()
}
