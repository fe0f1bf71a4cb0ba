// Sample a two-layer model from its priors and push instances through it.

use deep_ibp::model::{generate_dataset, GenerativeModel, HyperParams};
use deep_ibp::rng::rng_from_seed;

pub fn run_example() -> deep_ibp::Result<()> {
    let hyper = HyperParams {
        num_layers: 2,
        layer_widths: vec![4, 2],
        ..HyperParams::default()
    };
    let mut rng = rng_from_seed(7);
    let model = GenerativeModel::sample(hyper, 16, &mut rng)?;
    let layers = generate_dataset(&model, 200, &mut rng)?;

    for (depth, (w, y)) in model.layers.iter().zip(&layers).enumerate() {
        println!(
            "layer {depth}: {} factors ({} linked), weights {}x{}",
            y.rows(),
            w.mask.active_columns(),
            w.n_rows(),
            w.n_cols()
        );
        for row in w.mask.to_row_strings() {
            println!("    {row}");
        }
    }
    let x = layers.last().expect("observed layer");
    let spread: Vec<String> = x
        .values()
        .rows()
        .into_iter()
        .take(4)
        .map(|r| format!("{:.3}", (r.iter().map(|v| v * v).sum::<f64>() / r.len() as f64).sqrt()))
        .collect();
    println!("observed {}x{}, rms of first rows: {}", x.rows(), x.cols(), spread.join(" "));
    Ok(())
}

#[allow(dead_code)]
fn main() -> deep_ibp::Result<()> {
    run_example()
}
