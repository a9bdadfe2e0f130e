//! Saves an inventory, loads it back and checks it with the fastest protocol.

use std::io::{BufReader, Cursor};

use rfid_mti::{make_inventory, run_ssmti, ChannelConfig, Inventory, Seed, SsmtiConfig};

fn main() -> rfid_mti::Result<()> {
    let inventory = make_inventory(8, 0.25, Seed(12))?;
    let mut text = Vec::new();
    inventory.write_text(&mut text)?;
    print!("{}", String::from_utf8_lossy(&text));

    let loaded = Inventory::read_text(BufReader::new(Cursor::new(text)))?;
    let r = run_ssmti(
        &loaded,
        &SsmtiConfig::default(),
        &ChannelConfig::error_free(),
        Seed(1),
    )?;
    for id in &r.identified_missing {
        println!("missing {id}");
    }
    Ok(())
}
