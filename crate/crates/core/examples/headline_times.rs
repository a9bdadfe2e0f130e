//! Mean identification time of all three protocols on 10,000 candidates.
//!
//! ```text
//! cargo run --release --example headline_times -- 100
//! ```

use rfid_mti::{run_experiment, ExperimentConfig, Protocol, RatePrior, Seed};

fn main() -> rfid_mti::Result<()> {
    let trials = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(50);
    for (protocol, q) in [
        (Protocol::Ssmti, 0.1),
        (Protocol::Ismti, 0.1),
        (Protocol::Ismti, 0.9),
        (Protocol::Edfsa, 0.1),
    ] {
        let cfg = ExperimentConfig {
            protocol,
            n: vec![10_000],
            missing_rate: vec![q],
            trials,
            master_seed: Seed(1),
            q_prior: RatePrior::Given,
            ..ExperimentConfig::default()
        };
        let r = run_experiment(&cfg)?;
        println!(
            "{protocol:>5} q={q}: {:>9.1} ms  (sd {:.1}, {:.1} rounds)",
            r.mean_ms, r.std_ms, r.mean_rounds
        );
    }
    Ok(())
}
