//! One round of the interactive protocol on eleven tags, six bits, three bits
//! per string.

use rfid_mti::ismti::{
    build_indicator_v3, collect_actual_vector, resolve_round, ExpectedVector, IsmtiParams,
};
use rfid_mti::{ChannelConfig, Seed, TagId};

fn main() -> rfid_mti::Result<()> {
    let tags: Vec<TagId> = (1..=11).map(TagId::new).collect::<Result<_, _>>()?;
    let bits = vec![2, 2, 4, 5, 4, 3, 5, 3, 6, 6, 6];
    let present = [1, 2, 6, 8];

    let params = IsmtiParams::new(6, Seed(0), 3)?;
    let ev = ExpectedVector::from_globals(bits.clone(), params.f3)?;
    let responders: Vec<(TagId, usize)> = present
        .iter()
        .map(|&t| (tags[t - 1], bits[t - 1]))
        .collect();
    let actual = collect_actual_vector(&responders, &params, &ChannelConfig::error_free(), 0)?;
    let v3 = build_indicator_v3(&ev, &actual.av)?;

    println!("EV {ev}");
    for (i, rx) in actual.received.iter().enumerate() {
        println!("slot {} heard {rx}", i + 1);
    }
    println!("AV {}", actual.av);
    println!("V3 {v3}");

    let out = resolve_round(&ev, &actual.av, &tags)?;
    let names = |v: &[TagId]| {
        v.iter()
            .map(|t| format!("t{}", t.value()))
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!("missing   {}", names(&out.missing));
    println!("present   {}", names(&out.present));
    println!("next round {}", names(&out.carryover));
    Ok(())
}
