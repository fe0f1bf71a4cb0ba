// Infer the number of hidden factors behind a synthetic dataset.

use deep_ibp::inference::{run_mh_layer, InferenceConfig, InitStrategy, LayerModel};
use deep_ibp::model::{generate_dataset, GenerativeModel, HyperParams};
use deep_ibp::rng::rng_from_seed;

pub fn run_example() -> deep_ibp::Result<()> {
    let hyper = HyperParams::single_layer(3, 3.0, 2.0, 1.0);
    let mut rng = rng_from_seed(3);
    let truth = GenerativeModel::sample_linked(hyper.clone(), 10, &mut rng)?;
    let x = generate_dataset(&truth, 60, &mut rng)?.pop().expect("observed layer");

    let model = LayerModel::from_hyper(&hyper, 0);
    for init in [InitStrategy::Fixed(2), InitStrategy::Fixed(6)] {
        let cfg = InferenceConfig {
            iterations: 40,
            init_k: init,
            seed: 11,
            ..InferenceConfig::default()
        };
        let run = run_mh_layer(&x, &cfg, &model, None)?;
        let ks: Vec<String> = run.k_trace().iter().step_by(5).map(usize::to_string).collect();
        println!(
            "init {:<8} K every 5 its: {}  final log-joint {:.1}  adds {}/{} deletes {}/{}",
            init.label(),
            ks.join(" "),
            run.state.log_joint_cached(),
            run.stats.add_accepted,
            run.stats.add_proposed,
            run.stats.delete_accepted,
            run.stats.delete_proposed,
        );
    }
    println!("true K = 3");
    Ok(())
}

#[allow(dead_code)]
fn main() -> deep_ibp::Result<()> {
    run_example()
}
