//! Walks through one round of serial-number assignment on eleven tags, then
//! decodes two verification strings.

use rfid_mti::channel::{ReceivedString, Verdict};
use rfid_mti::ssmti::{
    build_append_vector, build_indicator_v2, decode_verification, reconcile_with, tag_action_at,
    MainVector, TagAction,
};
use rfid_mti::TagId;

fn main() -> rfid_mti::Result<()> {
    let tags: Vec<TagId> = (1..=11).map(TagId::new).collect::<Result<_, _>>()?;
    // positions the tags hashed to in a main vector of length 6
    let positions = [2, 2, 2, 1, 4, 3, 6, 1, 6, 3, 3];
    let main = MainVector::from_positions(&tags, &positions, 6)?;
    println!("main vector      {main}");

    // the one-bit hash separates t4 (0) from t8 (1); t7 and t9 collide on it
    let bit = |id: TagId| u8::from(id == tags[7]);
    let reconciled = reconcile_with(&main, bit)?;
    let append = build_append_vector(&reconciled)?;
    let v2 = build_indicator_v2(&reconciled, &append)?;
    println!("after reconcile  {reconciled}");
    println!("append vector    {:?}", append.0);
    println!("indicator        {v2} ({} bits)", v2.bit_len());

    for (i, id) in tags.iter().enumerate() {
        match tag_action_at(positions[i], || bit(*id), &v2, 0) {
            TagAction::Arranged(chi) => println!("t{} gets serial number {chi}", i + 1),
            TagAction::Wait => {}
        }
    }

    let rx: Vec<ReceivedString> = ["XXX0X0", "X0X000"]
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    let verdicts = decode_verification(&rx, 11, 6)?;
    let missing: Vec<usize> = verdicts
        .iter()
        .enumerate()
        .filter(|(_, v)| **v == Verdict::Absent)
        .map(|(i, _)| i + 1)
        .collect();
    println!(
        "received {} {} -> missing serial numbers {missing:?}",
        rx[0], rx[1]
    );
    Ok(())
}
