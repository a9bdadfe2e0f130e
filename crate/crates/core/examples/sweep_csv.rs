//! Writes a string-length sweep as CSV, from a key=value configuration.

use rfid_mti::{sweep, write_csv, ExperimentConfig};

const CONFIG: &str = "
protocol = ssmti
n = 2000
q = 0.1
w = 8..96:8
trials = 10
seed = 42
";

fn main() -> rfid_mti::Result<()> {
    let cfg = ExperimentConfig::from_text(CONFIG)?;
    let reports = sweep(&cfg)?;
    write_csv(std::io::stdout().lock(), &reports)
}
