//! Bit-level superposition of synchronized tag replies.
//!
//! Tags in the same slot transmit Manchester-coded strings simultaneously.
//! The reader sees, per bit position, either a clean `0`/`1`, a collided bit
//! `X` (transmitters disagree) or nothing at all.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::tag::{Seed, TagId};

/// Longest string the channel model accepts.
pub const MAX_STRING_BITS: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BitSymbol {
    Zero,
    One,
    Collision,
    Silence,
}

impl BitSymbol {
    pub fn as_char(self) -> char {
        match self {
            BitSymbol::Zero => '0',
            BitSymbol::One => '1',
            BitSymbol::Collision => 'X',
            BitSymbol::Silence => '-',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '0' => Some(BitSymbol::Zero),
            '1' => Some(BitSymbol::One),
            'X' | 'x' => Some(BitSymbol::Collision),
            '-' => Some(BitSymbol::Silence),
            _ => None,
        }
    }
}

/// Reader's decision for the tag(s) arranged to one bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Present,
    Absent,
}

/// A `1` or a collided bit proves some tag answered there.
pub fn verdict(symbol: BitSymbol) -> Verdict {
    match symbol {
        BitSymbol::One | BitSymbol::Collision => Verdict::Present,
        BitSymbol::Zero | BitSymbol::Silence => Verdict::Absent,
    }
}

/// A `w`-bit reply. Bit 1 is the first transmitted bit and maps to mask bit 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TagString {
    owner: TagId,
    bits: u128,
    len: usize,
}

impl TagString {
    /// String with only bit `bit` (1-based) set.
    pub fn one_hot(owner: TagId, w: usize, bit: usize) -> Result<Self> {
        check_len(w)?;
        if bit == 0 || bit > w {
            return Err(invalid(format!("bit {bit} outside 1..={w}")));
        }
        Ok(TagString {
            owner,
            bits: 1u128 << (bit - 1),
            len: w,
        })
    }

    pub fn from_bits(owner: TagId, bits: &[u8]) -> Result<Self> {
        check_len(bits.len())?;
        let mut mask = 0u128;
        for (i, b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => mask |= 1u128 << i,
                other => return Err(invalid(format!("bit value {other} is not 0 or 1"))),
            }
        }
        Ok(TagString {
            owner,
            bits: mask,
            len: bits.len(),
        })
    }

    pub fn owner(&self) -> TagId {
        self.owner
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Value of 1-based bit `bit`.
    pub fn bit(&self, bit: usize) -> u8 {
        ((self.bits >> (bit - 1)) & 1) as u8
    }

    pub fn is_one_hot(&self) -> bool {
        self.bits.count_ones() == 1
    }

    pub(crate) fn mask(&self) -> u128 {
        self.bits
    }
}

fn check_len(w: usize) -> Result<()> {
    if w == 0 || w > MAX_STRING_BITS {
        return Err(invalid(format!(
            "string length {w} outside 1..={MAX_STRING_BITS}"
        )));
    }
    Ok(())
}

/// What the reader decodes from one slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ReceivedString {
    symbols: Vec<BitSymbol>,
}

impl ReceivedString {
    pub fn new(symbols: Vec<BitSymbol>) -> Self {
        ReceivedString { symbols }
    }

    pub fn silence(w: usize) -> Self {
        ReceivedString {
            symbols: vec![BitSymbol::Silence; w],
        }
    }

    pub fn symbols(&self) -> &[BitSymbol] {
        &self.symbols
    }

    /// Symbol at 1-based `bit`.
    pub fn symbol(&self, bit: usize) -> BitSymbol {
        self.symbols[bit - 1]
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

impl fmt::Display for ReceivedString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.symbols {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for ReceivedString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| BitSymbol::from_char(c).ok_or_else(|| invalid(format!("bad symbol '{c}'"))))
            .collect::<Result<Vec<_>>>()
            .map(ReceivedString::new)
    }
}

/// Impairments applied to every slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelConfig {
    /// Probability that one tag's reply in a slot is not sensed at all.
    pub detection_error_prob: f64,
    /// Probability that a slot with two or more repliers is captured by one of them.
    pub capture_prob: f64,
    pub rng_seed: Seed,
}

impl ChannelConfig {
    pub fn new(detection_error_prob: f64, capture_prob: f64, rng_seed: Seed) -> Result<Self> {
        for (name, p) in [
            ("detection error probability", detection_error_prob),
            ("capture probability", capture_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(invalid(format!("{name} {p} outside [0, 1]")));
            }
        }
        Ok(ChannelConfig {
            detection_error_prob,
            capture_prob,
            rng_seed,
        })
    }

    pub fn error_free() -> Self {
        ChannelConfig {
            detection_error_prob: 0.0,
            capture_prob: 0.0,
            rng_seed: Seed(0),
        }
    }

    pub fn is_error_free(&self) -> bool {
        self.detection_error_prob == 0.0 && self.capture_prob == 0.0
    }

    /// Same impairments, different random stream.
    pub fn with_seed(mut self, seed: Seed) -> Self {
        self.rng_seed = seed;
        self
    }
}

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig::error_free()
    }
}

/// Ideal bit-tracking combination of simultaneous replies.
pub fn superpose(strings: &[TagString], w: usize) -> Result<ReceivedString> {
    validate(strings, w)?;
    Ok(combine(strings.iter().map(TagString::mask), w))
}

fn validate(strings: &[TagString], w: usize) -> Result<()> {
    check_len(w)?;
    match strings.iter().find(|s| s.len != w) {
        Some(bad) => Err(invalid(format!(
            "string of tag {} has {} bits, slot expects {w}",
            bad.owner, bad.len
        ))),
        None => Ok(()),
    }
}

fn combine(masks: impl Iterator<Item = u128>, w: usize) -> ReceivedString {
    let mut any = false;
    let mut or = 0u128;
    let mut and = u128::MAX;
    for m in masks {
        any = true;
        or |= m;
        and &= m;
    }
    if !any {
        return ReceivedString::silence(w);
    }
    let symbols = (0..w)
        .map(|i| {
            let bit = 1u128 << i;
            if or & bit == 0 {
                BitSymbol::Zero
            } else if and & bit != 0 {
                BitSymbol::One
            } else {
                BitSymbol::Collision
            }
        })
        .collect();
    ReceivedString { symbols }
}

/// One slot through the impaired channel.
///
/// Each reply is dropped independently with `detection_error_prob`; if two or
/// more survive, with `capture_prob` a uniformly chosen survivor is decoded
/// alone. Randomness comes from `config.rng_seed` and `slot_key` only, so a
/// slot replays identically.
pub fn transmit_slot(
    strings: &[TagString],
    w: usize,
    config: &ChannelConfig,
    slot_key: u64,
) -> Result<ReceivedString> {
    if config.is_error_free() || strings.is_empty() {
        return superpose(strings, w);
    }
    validate(strings, w)?;
    let mut rng = config.rng_seed.derive(slot_key).rng();
    let survivors: Vec<u128> = strings
        .iter()
        .filter(|_| !rng.gen_bool(config.detection_error_prob))
        .map(TagString::mask)
        .collect();
    if survivors.len() >= 2 && rng.gen_bool(config.capture_prob) {
        let winner = survivors[rng.gen_range(0..survivors.len())];
        return Ok(combine(std::iter::once(winner), w));
    }
    Ok(combine(survivors.into_iter(), w))
}
