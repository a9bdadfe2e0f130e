//! Tag identities, inventories and the shared hash.
//!
//! Reader and tags must agree on every hash output, so the construction is
//! pinned down exactly:
//!
//! ```text
//! mix64(z):  z ^= z >> 30; z *= 0xBF58_476D_1CE4_E5B9;
//!            z ^= z >> 27; z *= 0x94D0_49BB_1331_11EB;
//!            z ^= z >> 31                      (wrapping u64 arithmetic)
//!
//! hash64(id, seed):
//!     lo = low 64 bits of id, hi = high 32 bits of id (zero-extended)
//!     h  = mix64(seed ^ 0x9E37_79B9_7F4A_7C15)
//!     h  = mix64(h ^ lo)
//!     h  = mix64(h ^ hi)
//!
//! hash_slot(id, seed, f) = hash64(id, seed) mod f + 1
//! hash_binary(id, seed)  = hash64(id, seed) mod 2
//! ```

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const ID_MASK: u128 = (1u128 << 96) - 1;

/// Finalizer of SplitMix64. A bijection on `u64`.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A 96-bit tag identifier.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TagId(u128);

impl TagId {
    pub const BITS: u32 = 96;

    pub fn new(value: u128) -> Result<Self> {
        if value > ID_MASK {
            return Err(invalid(format!("tag id {value:#x} exceeds 96 bits")));
        }
        Ok(TagId(value))
    }

    pub fn value(self) -> u128 {
        self.0
    }

    fn low(self) -> u64 {
        self.0 as u64
    }

    fn high(self) -> u64 {
        (self.0 >> 64) as u64
    }
}

impl fmt::Display for TagId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:024x}", self.0)
    }
}

impl FromStr for TagId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s.len() > 24 {
            return Err(invalid(format!("tag id '{s}' is not 1-24 hex digits")));
        }
        let value =
            u128::from_str_radix(s, 16).map_err(|e| invalid(format!("tag id '{s}': {e}")))?;
        TagId::new(value)
    }
}

/// A random seed broadcast by the reader.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Seed(pub u64);

impl Seed {
    /// Counter-based child seed: `mix64(self ^ mix64(stream + GOLDEN_GAMMA))`.
    ///
    /// Used for per-trial and per-slot streams so results never depend on
    /// execution order.
    pub fn derive(self, stream: u64) -> Seed {
        Seed(mix64(self.0 ^ mix64(stream.wrapping_add(GOLDEN_GAMMA))))
    }

    pub fn rng(self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}

pub fn hash64(id: TagId, seed: Seed) -> u64 {
    let h = mix64(seed.0 ^ GOLDEN_GAMMA);
    let h = mix64(h ^ id.low());
    mix64(h ^ id.high())
}

/// Slot (or vector position) chosen by `id` in a frame of `f` slots, in `1..=f`.
pub fn hash_slot(id: TagId, seed: Seed, f: usize) -> Result<usize> {
    if f == 0 {
        return Err(invalid("frame size must be at least 1"));
    }
    Ok(slot_unchecked(id, seed, f))
}

#[inline]
pub(crate) fn slot_unchecked(id: TagId, seed: Seed, f: usize) -> usize {
    (hash64(id, seed) % f as u64) as usize + 1
}

pub fn hash_binary(id: TagId, seed: Seed) -> u8 {
    (hash64(id, seed) & 1) as u8
}

/// The reader's candidate list with ground-truth presence labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inventory {
    candidates: Vec<TagId>,
    present: Vec<bool>,
}

impl Inventory {
    /// Builds an inventory from ids and aligned presence flags.
    pub fn from_parts(candidates: Vec<TagId>, present: Vec<bool>) -> Result<Self> {
        if candidates.len() != present.len() {
            return Err(invalid(format!(
                "{} candidates but {} presence flags",
                candidates.len(),
                present.len()
            )));
        }
        let mut seen = HashSet::with_capacity(candidates.len());
        for id in &candidates {
            if !seen.insert(*id) {
                return Err(invalid(format!("duplicate tag id {id}")));
            }
        }
        Ok(Inventory {
            candidates,
            present,
        })
    }

    pub fn candidates(&self) -> &[TagId] {
        &self.candidates
    }

    pub fn presence(&self) -> &[bool] {
        &self.present
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn present_count(&self) -> usize {
        self.present.iter().filter(|p| **p).count()
    }

    pub fn missing_count(&self) -> usize {
        self.len() - self.present_count()
    }

    pub fn missing_rate(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.missing_count() as f64 / self.len() as f64
        }
    }

    pub fn present_ids(&self) -> impl Iterator<Item = TagId> + '_ {
        self.iter().filter(|(_, p)| *p).map(|(id, _)| id)
    }

    pub fn missing_ids(&self) -> impl Iterator<Item = TagId> + '_ {
        self.iter().filter(|(_, p)| !*p).map(|(id, _)| id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (TagId, bool)> + '_ {
        self.candidates
            .iter()
            .copied()
            .zip(self.present.iter().copied())
    }

    pub fn present_set(&self) -> HashSet<TagId> {
        self.present_ids().collect()
    }

    /// Same candidates, different ground truth.
    pub fn with_presence(&self, present: Vec<bool>) -> Result<Self> {
        Inventory::from_parts(self.candidates.clone(), present)
    }

    /// Writes one `<24 hex digits> <0|1>` line per candidate.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# rfid-mti inventory: <id hex> <present 0|1>")?;
        for (id, present) in self.iter() {
            writeln!(out, "{id} {}", u8::from(present))?;
        }
        Ok(())
    }

    /// Reads the format produced by [`Inventory::write_text`]. Blank lines and
    /// `#` comments are skipped.
    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut candidates = Vec::new();
        let mut present = Vec::new();
        for (i, line) in input.lines().enumerate() {
            let line = line?;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let mut fields = body.split_whitespace();
            let (Some(id), Some(flag), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(parse_err(format!("expected '<id> <flag>', got '{body}'")));
            };
            let id: TagId = id.parse().map_err(|e: Error| parse_err(e.to_string()))?;
            let flag = match flag {
                "1" => true,
                "0" => false,
                other => return Err(parse_err(format!("presence flag '{other}' is not 0 or 1"))),
            };
            candidates.push(id);
            present.push(flag);
        }
        Inventory::from_parts(candidates, present)
    }
}

/// Generates `n` distinct ids and marks `round(n * missing_rate)` of them missing.
///
/// Ids are sequential counters pushed through a salted scramble: the low 64
/// bits are `mix64(k ^ salt)` (a bijection, so ids are distinct) and the high
/// 32 bits are taken from a second mixing round.
pub fn make_inventory(n: usize, missing_rate: f64, rng_seed: Seed) -> Result<Inventory> {
    if n == 0 {
        return Err(invalid("inventory needs at least one tag"));
    }
    if !(0.0..=1.0).contains(&missing_rate) {
        return Err(invalid(format!(
            "missing rate {missing_rate} outside [0, 1]"
        )));
    }
    let salt = rng_seed.derive(0).0;
    let candidates: Vec<TagId> = (0..n as u64)
        .map(|k| {
            let lo = mix64(k ^ salt);
            let hi = mix64(lo ^ GOLDEN_GAMMA) >> 32;
            TagId(((hi as u128) << 64) | lo as u128)
        })
        .collect();

    let missing = ((n as f64) * missing_rate).round() as usize;
    let mut present = vec![true; n];
    let mut rng = rng_seed.derive(1).rng();
    for i in index::sample(&mut rng, n, missing) {
        present[i] = false;
    }
    Ok(Inventory {
        candidates,
        present,
    })
}
