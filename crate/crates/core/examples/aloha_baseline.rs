//! Collecting every ID with frame-slotted Aloha, round by round.

use rfid_mti::analysis::TimingModel;
use rfid_mti::{make_inventory, run_edfsa, EdfsaConfig, Seed};

fn main() -> rfid_mti::Result<()> {
    let inventory = make_inventory(10_000, 0.1, Seed(4))?;
    let timing = TimingModel::default();
    for (name, cfg) in [
        ("every slot t_tag", EdfsaConfig::from_timing(&timing)),
        ("empty slots t_s", EdfsaConfig::short_empty(&timing)),
    ] {
        let r = run_edfsa(&inventory, &cfg, Seed(4))?;
        println!(
            "{name}: {:.2} s over {} rounds",
            r.elapsed_ms / 1000.0,
            r.rounds
        );
        if name.starts_with("every") {
            for line in r.trace.iter().take(5) {
                println!("  {line}");
            }
        }
    }
    Ok(())
}
