//! Interactive string based missing tag identification.
//!
//! Each round hashes every unresolved tag to one of `f3` bits, packed `w` bits
//! per slot. Several tags may share a bit: if none of them answers, all are
//! missing at once. The reader compares the expected vector `EV` (predicted
//! from stored ids) with the actual vector `AV` (observed), broadcasts `V3`,
//! and carries tags on collided-but-answered bits into the next round.
//!
//! The frame length follows the load factor maximizing expected resolutions
//! per bit at the current missing-rate estimate, which is refreshed from
//! every round's observations.

use std::fmt;

use rand::Rng;

use crate::analysis::{ismti_p_opt, TimingModel, MESSAGE_BITS};
use crate::channel::{transmit_slot, verdict, ChannelConfig, ReceivedString, TagString, Verdict};
use crate::error::{invalid, Error, Result};
use crate::result::{IdentificationResult, RoundTrace};
use crate::ssmti::MAX_W;
use crate::tag::{slot_unchecked, Inventory, Seed, TagId};

/// Parameters broadcast at the start of a round.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IsmtiParams {
    pub f3: usize,
    pub r: Seed,
    pub w: usize,
}

impl IsmtiParams {
    pub fn new(f3: usize, r: Seed, w: usize) -> Result<Self> {
        if f3 == 0 {
            return Err(invalid("vector length must be at least 1"));
        }
        if w == 0 || w > MAX_W {
            return Err(invalid(format!("string length {w} outside 1..={MAX_W}")));
        }
        Ok(IsmtiParams { f3, r, w })
    }

    pub fn slots(&self) -> usize {
        self.f3.div_ceil(self.w)
    }
}

/// Where a tag answers: 1-based slot, bit within the slot, and global bit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TagMapping {
    pub slot: usize,
    pub bit: usize,
    pub global: usize,
}

impl TagMapping {
    pub fn from_global(global: usize, w: usize) -> Self {
        TagMapping {
            slot: global.div_ceil(w),
            bit: (global - 1) % w + 1,
            global,
        }
    }
}

pub fn tag_map(id: TagId, r: Seed, f3: usize, w: usize) -> Result<TagMapping> {
    if f3 == 0 || w == 0 {
        return Err(invalid("vector and string lengths must be positive"));
    }
    Ok(TagMapping::from_global(slot_unchecked(id, r, f3), w))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EvCode {
    Empty = 0,
    Single = 1,
    Multi = 2,
}

/// Expected occupancy of each global bit, plus the bit each tag maps to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExpectedVector {
    codes: Vec<EvCode>,
    loads: Vec<u32>,
    /// Global bit (1-based) of the i-th unresolved tag.
    globals: Vec<usize>,
}

impl ExpectedVector {
    pub fn from_globals(globals: Vec<usize>, f3: usize) -> Result<Self> {
        if f3 == 0 {
            return Err(invalid("vector length must be at least 1"));
        }
        let mut loads = vec![0u32; f3];
        for &g in &globals {
            if g == 0 || g > f3 {
                return Err(invalid(format!("bit {g} outside 1..={f3}")));
            }
            loads[g - 1] += 1;
        }
        let codes = loads
            .iter()
            .map(|l| match l {
                0 => EvCode::Empty,
                1 => EvCode::Single,
                _ => EvCode::Multi,
            })
            .collect();
        Ok(ExpectedVector {
            codes,
            loads,
            globals,
        })
    }

    pub fn codes(&self) -> &[EvCode] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn globals(&self) -> &[usize] {
        &self.globals
    }

    pub fn load(&self, global: usize) -> u32 {
        self.loads[global - 1]
    }

    /// `N1`: bits expected to hold exactly one tag.
    pub fn singletons(&self) -> usize {
        self.codes.iter().filter(|c| **c == EvCode::Single).count()
    }
}

impl fmt::Display for ExpectedVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.codes {
            write!(f, "{}", *c as u8)?;
        }
        Ok(())
    }
}

pub fn build_expected_vector(unresolved: &[TagId], params: &IsmtiParams) -> Result<ExpectedVector> {
    let globals = unresolved
        .iter()
        .map(|id| slot_unchecked(*id, params.r, params.f3))
        .collect();
    ExpectedVector::from_globals(globals, params.f3)
}

/// Observed activity per global bit: 1 on `1` or `X`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActualVector(pub Vec<u8>);

impl fmt::Display for ActualVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActualCollection {
    pub av: ActualVector,
    pub received: Vec<ReceivedString>,
    pub tag_bits: u64,
}

/// Present unresolved tags reply; the reader reads `AV` off the slots.
///
/// `responders` holds `(id, global bit)` for each present unresolved tag.
/// Slot `s` of the round draws channel randomness with key `slot_key_base + s`.
pub fn collect_actual_vector(
    responders: &[(TagId, usize)],
    params: &IsmtiParams,
    channel: &ChannelConfig,
    slot_key_base: u64,
) -> Result<ActualCollection> {
    let slots = params.slots();
    let mut per_slot: Vec<Vec<TagString>> = vec![Vec::new(); slots];
    for &(id, global) in responders {
        if global == 0 || global > params.f3 {
            return Err(invalid(format!("bit {global} outside 1..={}", params.f3)));
        }
        let m = TagMapping::from_global(global, params.w);
        per_slot[m.slot - 1].push(TagString::one_hot(id, params.w, m.bit)?);
    }
    let mut av = Vec::with_capacity(params.f3);
    let mut received = Vec::with_capacity(slots);
    for (s, strings) in per_slot.iter().enumerate() {
        let rx = transmit_slot(strings, params.w, channel, slot_key_base + s as u64)?;
        for sym in rx.symbols() {
            if av.len() < params.f3 {
                av.push(u8::from(verdict(*sym) == Verdict::Present));
            }
        }
        received.push(rx);
    }
    Ok(ActualCollection {
        av: ActualVector(av),
        received,
        tag_bits: (responders.len() * params.w) as u64,
    })
}

/// `V3[i] = 1` tells the tags on bit `i` to stop; `0` keeps them for the next round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndicatorV3(pub Vec<u8>);

impl fmt::Display for IndicatorV3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

pub fn build_indicator_v3(ev: &ExpectedVector, av: &ActualVector) -> Result<IndicatorV3> {
    if ev.len() != av.0.len() {
        return Err(Error::Inconsistent(format!(
            "expected vector has {} bits, actual vector {}",
            ev.len(),
            av.0.len()
        )));
    }
    Ok(IndicatorV3(
        ev.codes
            .iter()
            .zip(&av.0)
            .map(|(e, a)| match (e, a) {
                (EvCode::Empty, _) => 0,
                (_, 0) => 1,
                (EvCode::Single, _) => 1,
                (EvCode::Multi, _) => 0,
            })
            .collect(),
    ))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RoundOutcome {
    pub missing: Vec<TagId>,
    pub present: Vec<TagId>,
    pub carryover: Vec<TagId>,
}

/// Splits this round's tags (aligned with `ev.globals()`) by comparing `EV` and `AV`.
pub fn resolve_round(
    ev: &ExpectedVector,
    av: &ActualVector,
    tags: &[TagId],
) -> Result<RoundOutcome> {
    if tags.len() != ev.globals.len() {
        return Err(Error::Inconsistent(format!(
            "{} tags but {} mapped bits",
            tags.len(),
            ev.globals.len()
        )));
    }
    if ev.len() != av.0.len() {
        return Err(Error::Inconsistent("EV and AV lengths differ".into()));
    }
    let mut out = RoundOutcome::default();
    for (&id, &g) in tags.iter().zip(&ev.globals) {
        let answered = av.0[g - 1] == 1;
        match (ev.codes[g - 1], answered) {
            (_, false) => out.missing.push(id),
            (EvCode::Single, true) => out.present.push(id),
            (EvCode::Multi, true) => out.carryover.push(id),
            (EvCode::Empty, true) => unreachable!("a mapped bit is never empty"),
        }
    }
    Ok(out)
}

/// Missing-count estimate for one round's unresolved set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MissingRateEstimate {
    pub n1: usize,
    pub n11: usize,
    pub m_hat: f64,
    pub q_hat: f64,
}

/// `M* = N* (1 - N11 / N1)`, clamped to `[0, N*]`. With no singleton bits the
/// previous rate `fallback_q` is kept.
pub fn estimate_missing(
    n_star: usize,
    n1: usize,
    n11: usize,
    fallback_q: f64,
) -> Result<MissingRateEstimate> {
    if n_star == 0 {
        return Err(invalid("estimation needs at least one unresolved tag"));
    }
    if n11 > n1 {
        return Err(invalid(format!("N11 = {n11} exceeds N1 = {n1}")));
    }
    let n = n_star as f64;
    let m_hat = if n1 == 0 {
        fallback_q.clamp(0.0, 1.0) * n
    } else {
        (n * (1.0 - n11 as f64 / n1 as f64)).clamp(0.0, n)
    };
    Ok(MissingRateEstimate {
        n1,
        n11,
        m_hat,
        q_hat: m_hat / n,
    })
}

/// Zero-bit estimate: a bit stays silent with probability `exp(-P*/f3)`, so
/// `P* = -f3 ln(zero_bits / f3)`. `None` when every bit was active.
pub fn estimate_from_zero_bits(n_star: usize, f3: usize, zero_bits: usize) -> Option<f64> {
    if n_star == 0 || f3 == 0 || zero_bits == 0 {
        return None;
    }
    let z = zero_bits.min(f3) as f64 / f3 as f64;
    let present = -(f3 as f64) * z.ln();
    Some((n_star as f64 - present).clamp(0.0, n_star as f64))
}

/// Counts the reader has after comparing `EV` and `AV`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RoundObservation {
    pub n_star: usize,
    pub f3: usize,
    /// Bits with `EV = 1`.
    pub n1: usize,
    /// Bits with `EV = 1` and `AV = 1`.
    pub n11: usize,
    /// Bits with `AV = 0`.
    pub zero_bits: usize,
}

impl RoundObservation {
    pub fn from_vectors(ev: &ExpectedVector, av: &ActualVector) -> Result<Self> {
        if ev.len() != av.0.len() {
            return Err(Error::Inconsistent("EV and AV lengths differ".into()));
        }
        let pairs = || ev.codes.iter().zip(&av.0);
        Ok(RoundObservation {
            n_star: ev.globals.len(),
            f3: ev.len(),
            n1: ev.singletons(),
            n11: pairs()
                .filter(|(e, a)| **e == EvCode::Single && **a == 1)
                .count(),
            zero_bits: av.0.iter().filter(|a| **a == 0).count(),
        })
    }

    /// Missing tags among the round's `N*`: the singleton estimate when at
    /// least `min_singletons` singleton bits exist, else the zero-bit
    /// estimate, else the singleton estimate on whatever singletons there are.
    pub fn missing_estimate(&self, min_singletons: usize) -> Option<f64> {
        if self.n_star == 0 {
            return None;
        }
        let singleton =
            || (self.n1 > 0).then(|| self.n_star as f64 * (1.0 - self.n11 as f64 / self.n1 as f64));
        if self.n1 >= min_singletons.max(1) {
            return singleton();
        }
        estimate_from_zero_bits(self.n_star, self.f3, self.zero_bits).or_else(singleton)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsmtiConfig {
    pub w: usize,
    /// Missing rate assumed for the first round.
    pub q_prior: f64,
    /// Fixed load factor; `None` re-optimizes every round.
    pub load_factor: Option<f64>,
    /// Below this many singleton bits the zero-bit estimator is used.
    pub min_singletons: usize,
    pub timing: TimingModel,
}

impl Default for IsmtiConfig {
    fn default() -> Self {
        IsmtiConfig {
            w: MAX_W,
            q_prior: 0.5,
            load_factor: None,
            min_singletons: 16,
            timing: TimingModel::default(),
        }
    }
}

impl IsmtiConfig {
    pub fn validate(&self) -> Result<()> {
        if self.w == 0 || self.w > MAX_W {
            return Err(invalid(format!(
                "string length {} outside 1..={MAX_W}",
                self.w
            )));
        }
        if !(0.0..=1.0).contains(&self.q_prior) {
            return Err(invalid(format!(
                "prior missing rate {} outside [0, 1]",
                self.q_prior
            )));
        }
        if let Some(p) = self.load_factor {
            if !(p.is_finite() && p > 0.0) {
                return Err(invalid(format!("load factor {p} must be positive")));
            }
        }
        Ok(())
    }

    /// `max(w, round(N*/p))` rounded up to a whole number of strings.
    pub fn vector_len(&self, n_star: usize, p: f64) -> usize {
        let raw = (n_star as f64 / p).round() as usize;
        raw.div_ceil(self.w).max(1) * self.w
    }

    /// String replies plus the `V3` broadcast.
    pub fn round_time(&self, f3: usize) -> f64 {
        f3.div_ceil(self.w) as f64 * self.timing.t_w(self.w)
            + f3.div_ceil(MESSAGE_BITS) as f64 * self.timing.t_tag
    }
}

/// Missing rate of the carried-over tags, from this round's estimate.
///
/// Every answered multi bit holds at least one present tag, which caps the
/// rate at `1 - answered_multi / carryover`.
fn carryover_rate(
    round_missing: f64,
    newly_missing: usize,
    carryover: usize,
    answered_multi: usize,
) -> f64 {
    let c = carryover as f64;
    let cap = 1.0 - answered_multi as f64 / c;
    ((round_missing - newly_missing as f64) / c).clamp(0.0, cap.max(0.0))
}

/// Runs rounds until no tag is carried over.
pub fn run_ismti(
    inventory: &Inventory,
    config: &IsmtiConfig,
    channel: &ChannelConfig,
    seed: Seed,
) -> Result<IdentificationResult> {
    config.validate()?;
    let mut rng = seed.rng();
    let mut unresolved: Vec<(TagId, bool)> = inventory.iter().collect();
    let mut q_hat = config.q_prior;
    let mut slot_key = 0u64;
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

    while !unresolved.is_empty() {
        result.rounds += 1;
        let n_star = unresolved.len();
        let p = match config.load_factor {
            Some(p) => p,
            None => ismti_p_opt(q_hat)?,
        };
        let params = IsmtiParams::new(config.vector_len(n_star, p), Seed(rng.gen()), config.w)?;
        let tags: Vec<TagId> = unresolved.iter().map(|(id, _)| *id).collect();
        let ev = build_expected_vector(&tags, &params)?;
        let responders: Vec<(TagId, usize)> = unresolved
            .iter()
            .zip(ev.globals())
            .filter(|((_, present), _)| *present)
            .map(|((id, _), g)| (*id, *g))
            .collect();
        let actual = collect_actual_vector(&responders, &params, channel, slot_key)?;
        slot_key += params.slots() as u64;

        let v3 = build_indicator_v3(&ev, &actual.av)?;
        debug_assert_eq!(v3.0.len(), params.f3);
        let outcome = resolve_round(&ev, &actual.av, &tags)?;

        let observed = RoundObservation::from_vectors(&ev, &actual.av)?;
        debug_assert_eq!(observed.n_star, n_star);
        let answered_multi = ev
            .codes()
            .iter()
            .zip(&actual.av.0)
            .filter(|(e, a)| **e == EvCode::Multi && **a == 1)
            .count();

        let dt = config.round_time(params.f3);
        result.elapsed_ms += dt;
        result.reader_bits += params.f3 as u64;
        result.tag_bits += actual.tag_bits;
        result.slots_used += params.slots() as u64;
        result.trace.push(RoundTrace::Interactive {
            round: result.rounds,
            f3: params.f3,
            p,
            q_hat,
            n1: observed.n1,
            n11: observed.n11,
            new_missing: outcome.missing.len(),
            new_present: outcome.present.len(),
            carryover: outcome.carryover.len(),
            elapsed_ms: dt,
        });

        if !outcome.carryover.is_empty() {
            if let Some(m) = observed.missing_estimate(config.min_singletons) {
                q_hat = carryover_rate(
                    m,
                    outcome.missing.len(),
                    outcome.carryover.len(),
                    answered_multi,
                );
            }
        }

        result.identified_missing.extend(outcome.missing);
        result.identified_present.extend(outcome.present);
        let keep: std::collections::HashSet<TagId> = outcome.carryover.into_iter().collect();
        unresolved.retain(|(id, _)| keep.contains(id));
    }

    result.score(inventory);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tag::make_inventory;

    fn t(i: u128) -> TagId {
        TagId::new(i).unwrap()
    }

    /// Eleven tags on six bits, three bits per slot: bit 2 <- {t1, t2},
    /// bit 3 <- {t6, t8}, bit 4 <- {t3, t5}, bit 5 <- {t4, t7},
    /// bit 6 <- {t9, t10, t11}. Present: t1, t2, t6, t8.
    fn fixture() -> (Vec<TagId>, Vec<usize>, Vec<bool>) {
        let tags: Vec<TagId> = (1..=11).map(t).collect();
        let globals = vec![2, 2, 4, 5, 4, 3, 5, 3, 6, 6, 6];
        let present = (1..=11).map(|i| matches!(i, 1 | 2 | 6 | 8)).collect();
        (tags, globals, present)
    }

    fn fixture_round() -> (Vec<TagId>, ExpectedVector, ActualVector) {
        let (tags, globals, present) = fixture();
        let ev = ExpectedVector::from_globals(globals.clone(), 6).unwrap();
        let params = IsmtiParams::new(6, Seed(0), 3).unwrap();
        let responders: Vec<(TagId, usize)> = tags
            .iter()
            .zip(&globals)
            .zip(&present)
            .filter(|(_, p)| **p)
            .map(|((id, g), _)| (*id, *g))
            .collect();
        let av = collect_actual_vector(&responders, &params, &ChannelConfig::error_free(), 0)
            .unwrap()
            .av;
        (tags, ev, av)
    }

    #[test]
    fn tag_mapping() {
        let m = TagMapping::from_global(3, 3);
        assert_eq!((m.slot, m.bit), (1, 3));
        let s = TagString::one_hot(t(8), 3, m.bit).unwrap();
        assert_eq!(
            (1..=3).map(|b| s.bit(b).to_string()).collect::<String>(),
            "001"
        );
        assert_eq!(
            TagMapping::from_global(1, 7),
            TagMapping {
                slot: 1,
                bit: 1,
                global: 1
            }
        );
        assert_eq!(
            TagMapping::from_global(5, 5),
            TagMapping {
                slot: 1,
                bit: 5,
                global: 5
            }
        );
        assert_eq!(
            TagMapping::from_global(6, 5),
            TagMapping {
                slot: 2,
                bit: 1,
                global: 6
            }
        );
        let m = tag_map(t(77), Seed(3), 6, 3).unwrap();
        assert!((1..=6).contains(&m.global));
        assert!(tag_map(t(77), Seed(3), 0, 3).is_err());
    }

    #[test]
    fn expected_vector_fixture() {
        let (_, ev, _) = fixture_round();
        assert_eq!(ev.to_string(), "022222");
        let params = IsmtiParams::new(5, Seed(1), 5).unwrap();
        assert_eq!(
            build_expected_vector(&[], &params).unwrap().to_string(),
            "00000"
        );
        let one = build_expected_vector(&[t(4)], &params).unwrap();
        assert_eq!(one.singletons(), 1);
        assert_eq!(
            one.codes().iter().filter(|c| **c != EvCode::Empty).count(),
            1
        );
    }

    #[test]
    fn actual_vector_fixture() {
        let (_, _, av) = fixture_round();
        assert_eq!(av.to_string(), "011000");
        let params = IsmtiParams::new(6, Seed(0), 3).unwrap();
        let none = collect_actual_vector(&[], &params, &ChannelConfig::error_free(), 0).unwrap();
        assert_eq!(none.av.to_string(), "000000");
        let alone =
            collect_actual_vector(&[(t(1), 5)], &params, &ChannelConfig::error_free(), 0).unwrap();
        assert_eq!(alone.received[1].to_string(), "010");
        assert_eq!(alone.av.to_string(), "000010");
    }

    #[test]
    fn indicator_fixture_and_rules() {
        let (_, ev, av) = fixture_round();
        assert_eq!(build_indicator_v3(&ev, &av).unwrap().to_string(), "000111");

        let ev = ExpectedVector::from_globals(vec![1, 2, 2, 3], 4).unwrap(); // 1,2,1,0
        let av = ActualVector(vec![1, 1, 0, 0]);
        assert_eq!(build_indicator_v3(&ev, &av).unwrap().to_string(), "1010");
        assert!(build_indicator_v3(&ev, &ActualVector(vec![1])).is_err());
    }

    #[test]
    fn resolve_fixture() {
        let (tags, ev, av) = fixture_round();
        let out = resolve_round(&ev, &av, &tags).unwrap();
        let names = |v: &[TagId]| {
            let mut n: Vec<u128> = v.iter().map(|id| id.value()).collect();
            n.sort();
            n
        };
        assert_eq!(names(&out.missing), vec![3, 4, 5, 7, 9, 10, 11]);
        assert_eq!(names(&out.carryover), vec![1, 2, 6, 8]);
        assert!(out.present.is_empty());
    }

    #[test]
    fn resolve_singleton_and_all_multi() {
        let ev = ExpectedVector::from_globals(vec![2], 3).unwrap();
        let out = resolve_round(&ev, &ActualVector(vec![0, 1, 0]), &[t(1)]).unwrap();
        assert_eq!(out.present, vec![t(1)]);
        assert!(out.carryover.is_empty());

        let ev = ExpectedVector::from_globals(vec![1, 1, 2, 2], 2).unwrap();
        let tags: Vec<TagId> = (1..=4).map(t).collect();
        let out = resolve_round(&ev, &ActualVector(vec![1, 1]), &tags).unwrap();
        assert_eq!(out.carryover.len(), 4);
        assert!(out.missing.is_empty() && out.present.is_empty());
    }

    #[test]
    fn estimator_edges() {
        let e = estimate_missing(100, 20, 20, 0.5).unwrap();
        assert_eq!((e.m_hat, e.q_hat), (0.0, 0.0));
        let e = estimate_missing(100, 20, 0, 0.5).unwrap();
        assert_eq!(e.q_hat, 1.0);
        let e = estimate_missing(100, 0, 0, 0.3).unwrap();
        assert!((e.q_hat - 0.3).abs() < 1e-12);
        assert!(estimate_missing(0, 1, 1, 0.5).is_err());
        assert!(estimate_missing(10, 1, 2, 0.5).is_err());

        assert_eq!(estimate_from_zero_bits(100, 96, 0), None);
        let all_missing = estimate_from_zero_bits(100, 96, 96).unwrap();
        assert_eq!(all_missing, 100.0);
    }

    #[test]
    fn carryover_rate_is_capped() {
        // 10 carried tags on 4 answered bits: at most 6 can be missing
        assert!((carryover_rate(50.0, 0, 10, 4) - 0.6).abs() < 1e-12);
        assert_eq!(carryover_rate(5.0, 9, 10, 4), 0.0);
        assert!((carryover_rate(12.0, 10, 10, 4) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn vector_length_rounding() {
        let cfg = IsmtiConfig::default();
        assert_eq!(cfg.vector_len(10, 1.0), 96);
        assert_eq!(cfg.vector_len(0, 1.0), 96);
        assert_eq!(cfg.vector_len(10_000, 1.0), 10_080);
        assert!((cfg.round_time(192) - 2.0 * (2.775 + 2.4)).abs() < 1e-12);
    }

    #[test]
    fn all_missing_resolves_in_one_round() {
        let inv = make_inventory(500, 1.0, Seed(2)).unwrap();
        let r = run_ismti(
            &inv,
            &IsmtiConfig::default(),
            &ChannelConfig::error_free(),
            Seed(2),
        )
        .unwrap();
        assert_eq!(r.rounds, 1);
        assert_eq!(r.identified_missing.len(), 500);
        assert_eq!(r.tag_bits, 0);
    }

    #[test]
    fn rounds_partition_unresolved_tags() {
        let inv = make_inventory(1500, 0.4, Seed(9)).unwrap();
        let r = run_ismti(
            &inv,
            &IsmtiConfig::default(),
            &ChannelConfig::error_free(),
            Seed(9),
        )
        .unwrap();
        let mut unresolved = inv.len();
        for tr in &r.trace {
            let RoundTrace::Interactive {
                new_missing,
                new_present,
                carryover,
                ..
            } = tr
            else {
                panic!("unexpected trace {tr}");
            };
            assert_eq!(new_missing + new_present + carryover, unresolved);
            unresolved = *carryover;
        }
        assert_eq!(unresolved, 0);
        assert!(r.partitions(&inv));
        assert_eq!(r.misidentified(), 0);
    }

    #[test]
    fn config_validation() {
        let mut cfg = IsmtiConfig {
            q_prior: 1.2,
            ..IsmtiConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg.q_prior = 0.5;
        cfg.load_factor = Some(-1.0);
        assert!(cfg.validate().is_err());
        cfg.load_factor = None;
        cfg.w = 200;
        assert!(cfg.validate().is_err());
    }
}
