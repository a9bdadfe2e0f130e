//! Misidentification under detection errors and the capture effect.

use rfid_mti::{sweep, ExperimentConfig, Protocol, Seed};

fn main() -> rfid_mti::Result<()> {
    for protocol in [Protocol::Ssmti, Protocol::Ismti] {
        let cfg = ExperimentConfig {
            protocol,
            n: vec![2_000],
            missing_rate: vec![0.1, 0.5, 0.9],
            detection_error_prob: vec![0.0, 0.02],
            capture_prob: vec![0.0, 0.2],
            trials: 20,
            master_seed: Seed(3),
            ..ExperimentConfig::default()
        };
        for r in sweep(&cfg)? {
            let c = r.cell;
            println!(
                "{protocol} q={} detect={} capture={}: accuracy {:.4} ({} present tags reported missing)",
                c.q, c.detect_err, c.capture, r.accuracy, r.false_positives
            );
        }
    }
    Ok(())
}
