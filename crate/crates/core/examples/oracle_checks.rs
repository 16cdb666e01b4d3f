//! The brute-force references used to check the sampler: closed-form
//! conditionals and exhaustive enumeration of a gene's indicator row.
//!
//!     cargo run --release --example oracle_checks

use regnet::likelihood::GibbsWorkspace;
use regnet::model::Hyperparams;
use regnet::sampler::{alpha_conditional, sigma2_conditional, ChainState, SweepPlan, SweepSettings, Sweeper};
use regnet::synth::{
    conjugate_posterior_oracle, exhaustive_indicator_posterior, generate_synthetic, SufficientStats, SynthSpec,
};

fn main() -> regnet::Result<()> {
    let hyper = Hyperparams::default();
    println!(
        "intercept with T=2, sum 4, sigma2=1: {:?}",
        conjugate_posterior_oracle(
            SufficientStats::Intercept {
                n_obs: 2,
                sum_y: 4.0,
                sigma2: 1.0
            },
            &hyper
        )
    );
    println!(
        "residual variance with 2 cells, RSS 2: {:?}",
        conjugate_posterior_oracle(SufficientStats::Variance { n_cells: 2, rss: 2.0 }, &hyper)
    );

    let p = generate_synthetic(&SynthSpec {
        n_genes: 3,
        n_tfs: 2,
        n_experiments: 4,
        sparsity: 0.5,
        beta_scale: 0.4,
        sigma: 2.0,
        seed: 6,
        ..SynthSpec::default()
    })?;
    let ws = GibbsWorkspace::new(&p.dataset, &p.network, &p.params)?;
    let a = alpha_conditional(&ws, &p.params, &hyper, 0);
    let s = sigma2_conditional(&ws, &hyper);
    println!(
        "\nsampler conditionals at the true state: alpha[0] ~ N({:.4}, {:.4}), sigma2 ~ ScaledInvChi2({}, {:.4})",
        a.mean, a.variance, s.df, s.scale
    );

    // indicator-only Gibbs against enumeration of all four row configurations
    let settings = SweepSettings {
        plan: SweepPlan {
            theta: false,
            indicators: true,
            weights: false,
        },
        ..SweepSettings::default()
    };
    let sweeper = Sweeper::new(1, 0, settings);
    let mut state = ChainState::new(&p.dataset, p.network.clone(), p.params.clone())?;
    let sweeps = 50_000;
    let mut counts = [[0usize; 4]; 3];
    for _ in 0..sweeps {
        sweeper.sweep(&mut state, &p.dataset, &hyper)?;
        for (i, c) in counts.iter_mut().enumerate() {
            let row = state.network.row(i);
            c[row[0] as usize | (row[1] as usize) << 1] += 1;
        }
    }
    println!("\ngene  (C0,C1)  exact    gibbs");
    for (i, c) in counts.iter().enumerate() {
        let exact = exhaustive_indicator_posterior(&p.dataset, &p.params, &p.params.w, i)?;
        for k in 0..4 {
            println!(
                "{i:>4}  {:>7}  {:.4}  {:.4}",
                format!("({},{})", k & 1, k >> 1),
                exact[k],
                c[k] as f64 / sweeps as f64
            );
        }
    }
    Ok(())
}
