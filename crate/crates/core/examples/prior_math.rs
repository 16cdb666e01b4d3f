//! Prior over regulation indicators: how the binding and motif sources mix
//! at different weights, the per-TF normalizer, and the weight density.
//!
//!     cargo run --example prior_math

use regnet::model::{
    prior_probability, prior_probability_arithmetic, weight_log_density, weight_normalizing_constant_log,
};

fn main() -> regnet::Result<()> {
    println!("P(C=1) for binding b and motif m as the weight on binding grows");
    println!(
        "{:>5} {:>5} | {:>9} {:>9} {:>9} {:>9} {:>9}",
        "b", "m", "w=0", "w=0.25", "w=0.5", "w=0.75", "w=1"
    );
    for (b, m) in [(0.9, 0.1), (0.9, 0.5), (0.2, 0.8), (0.5, 0.5)] {
        let row: Vec<String> = [0.0, 0.25, 0.5, 0.75, 1.0]
            .iter()
            .map(|&w| prior_probability(b, m, w).map(|p| format!("{p:9.4}")))
            .collect::<regnet::Result<_>>()?;
        println!("{b:5.2} {m:5.2} | {}", row.join(" "));
    }

    println!("\ngeometric vs arithmetic mixing at w = 0.5");
    for (b, m) in [(0.9, 0.1), (0.99, 0.01), (0.6, 0.3)] {
        println!(
            "  b={b:<4} m={m:<4} geometric {:.4}  arithmetic {:.4}",
            prior_probability(b, m, 0.5)?,
            prior_probability_arithmetic(b, m, 0.5)?
        );
    }

    // one TF column: five genes with their source probabilities and indicators
    let b = [0.95, 0.9, 0.2, 0.1, 0.6];
    let m = [0.3, 0.8, 0.7, 0.1, 0.5];
    let c = [true, true, false, false, true];
    println!("\nlog normalizer and log density of w for one TF column");
    for w in [0.0, 0.25, 0.5, 0.75, 1.0] {
        println!(
            "  w={w:4.2}  log A(w) = {:+.5}  log p(C | w) = {:+.5}",
            weight_normalizing_constant_log(&b, &m, w)?,
            weight_log_density(&b, &m, &c, w)?
        );
    }
    Ok(())
}
