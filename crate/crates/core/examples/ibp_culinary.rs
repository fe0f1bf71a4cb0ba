// The culinary-process sampler against the closed-form class law.

use deep_ibp::ibp::{left_order_form, logprob_mask_ibp, sample_ibp_sequential};
use deep_ibp::oracle::mc_lof_histogram;
use deep_ibp::rng::rng_from_seed;

pub fn run_example() -> deep_ibp::Result<()> {
    let (n, alpha, draws) = (3, 1.0, 20_000);
    let mut rng = rng_from_seed(1);
    let hist = mc_lof_histogram(|r| sample_ibp_sequential(n, alpha, r), draws, &mut rng)?;

    let mut rows: Vec<_> = hist.classes.iter().collect();
    rows.sort_by_key(|r| std::cmp::Reverse(r.1.count));
    println!("{:<24} {:>9} {:>9} {:>7}", "class (rows)", "observed", "law", "z");
    for (class, freq) in rows.into_iter().take(10) {
        let z = class.canonical();
        let p = logprob_mask_ibp(&z, alpha)?.exp();
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        println!(
            "{:<24} {:>9.4} {:>9.4} {:>7.2}",
            z.to_row_strings().join("|"),
            freq.frequency,
            p,
            (freq.frequency - p) / se
        );
    }

    let one = sample_ibp_sequential(6, 2.0, &mut rng)?;
    println!("\none draw, N=6, alpha=2 ({} dishes):", one.n_cols());
    for row in left_order_form(&one).canonical().to_row_strings() {
        println!("    {row}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> deep_ibp::Result<()> {
    run_example()
}
