//! Frame-slotted Aloha ID collection (EDFSA) and a brute-force bit decoder.

use std::collections::BTreeMap;

use rand::Rng;

use crate::analysis::{TimingModel, MESSAGE_BITS};
use crate::channel::{BitSymbol, Verdict};
use crate::error::{invalid, Result};
use crate::result::{IdentificationResult, RoundTrace};
use crate::tag::{slot_unchecked, Inventory, Seed, TagId};

/// Slot durations for the Aloha baseline.
///
/// The first frame has one slot per candidate. Later frames have one slot per
/// present tag not yet collected.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdfsaConfig {
    pub empty_slot_ms: f64,
    /// Singleton and collision slots alike.
    pub busy_slot_ms: f64,
}

impl Default for EdfsaConfig {
    fn default() -> Self {
        EdfsaConfig::from_timing(&TimingModel::default())
    }
}

impl EdfsaConfig {
    /// Every slot lasts one ID reply.
    pub fn from_timing(timing: &TimingModel) -> Self {
        EdfsaConfig {
            empty_slot_ms: timing.t_tag,
            busy_slot_ms: timing.t_tag,
        }
    }

    /// Empty slots are cut short to `t_s`.
    pub fn short_empty(timing: &TimingModel) -> Self {
        EdfsaConfig {
            empty_slot_ms: timing.t_s,
            busy_slot_ms: timing.t_tag,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("empty", self.empty_slot_ms), ("busy", self.busy_slot_ms)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!(
                    "{name} slot duration {v} must be non-negative"
                )));
            }
        }
        Ok(())
    }
}

/// Collects every present tag's ID; candidates never heard are missing.
///
/// Reader bits are not counted. Each reply attempt costs 96 tag bits.
pub fn run_edfsa(
    inventory: &Inventory,
    config: &EdfsaConfig,
    seed: Seed,
) -> Result<IdentificationResult> {
    config.validate()?;
    let mut rng = seed.rng();
    let mut backlog: Vec<TagId> = inventory.present_ids().collect();
    let mut collected: Vec<TagId> = Vec::with_capacity(backlog.len());
    let mut result = IdentificationResult {
        identified_missing: Vec::new(),
        identified_present: Vec::new(),
        elapsed_ms: 0.0,
        reader_bits: 0,
        tag_bits: 0,
        slots_used: 0,
        rounds: 0,
        false_positives: 0,
        false_negatives: 0,
        trace: Vec::new(),
    };
    let mut frame = inventory.len();

    while frame > 0 {
        result.rounds += 1;
        let r = Seed(rng.gen());
        let mut occupancy = vec![0u32; frame];
        let slots: Vec<usize> = backlog
            .iter()
            .map(|id| {
                let s = slot_unchecked(*id, r, frame);
                occupancy[s - 1] += 1;
                s
            })
            .collect();
        let empty = occupancy.iter().filter(|c| **c == 0).count();
        let singleton = occupancy.iter().filter(|c| **c == 1).count();
        let collision = frame - empty - singleton;
        let dt = empty as f64 * config.empty_slot_ms + (frame - empty) as f64 * config.busy_slot_ms;

        result.elapsed_ms += dt;
        result.slots_used += frame as u64;
        result.tag_bits += (backlog.len() * MESSAGE_BITS) as u64;
        result.trace.push(RoundTrace::Aloha {
            round: result.rounds,
            frame,
            empty,
            singleton,
            collision,
            elapsed_ms: dt,
        });

        let mut rest = Vec::with_capacity(backlog.len() - singleton);
        for (id, s) in backlog.into_iter().zip(slots) {
            if occupancy[s - 1] == 1 {
                collected.push(id);
            } else {
                rest.push(id);
            }
        }
        backlog = rest;
        frame = backlog.len();
    }

    let heard: std::collections::HashSet<TagId> = collected.iter().copied().collect();
    result.identified_missing = inventory
        .candidates()
        .iter()
        .filter(|id| !heard.contains(id))
        .copied()
        .collect();
    result.identified_present = collected;
    result.score(inventory);
    Ok(result)
}

/// What the reader hears on one bit and what it concludes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleBit {
    pub symbol: BitSymbol,
    pub verdict: Verdict,
}

/// Decodes every bit of every slot up to the highest assigned one by listing
/// the transmitters directly. Each present tag sends a one-hot string with its
/// `1` at its assigned bit.
pub fn oracle_decode(
    assignments: &[(usize, usize)],
    present: &[bool],
    w: usize,
) -> Result<BTreeMap<(usize, usize), OracleBit>> {
    if assignments.len() != present.len() {
        return Err(invalid("one presence flag per assignment"));
    }
    if w == 0 {
        return Err(invalid("string length must be positive"));
    }
    if let Some(&(s, b)) = assignments
        .iter()
        .find(|(s, b)| *s == 0 || *b == 0 || *b > w)
    {
        return Err(invalid(format!(
            "assignment (slot {s}, bit {b}) out of range"
        )));
    }
    let slots = assignments.iter().map(|(s, _)| *s).max().unwrap_or(0);
    let mut table = BTreeMap::new();
    for slot in 1..=slots {
        let senders: Vec<usize> = assignments
            .iter()
            .zip(present)
            .filter(|((s, _), p)| *s == slot && **p)
            .map(|((_, b), _)| *b)
            .collect();
        for bit in 1..=w {
            let ones = senders.iter().filter(|b| **b == bit).count();
            let symbol = if senders.is_empty() {
                BitSymbol::Silence
            } else if ones == 0 {
                BitSymbol::Zero
            } else if ones == senders.len() {
                BitSymbol::One
            } else {
                BitSymbol::Collision
            };
            let verdict = if ones > 0 {
                Verdict::Present
            } else {
                Verdict::Absent
            };
            table.insert((slot, bit), OracleBit { symbol, verdict });
        }
    }
    Ok(table)
}
