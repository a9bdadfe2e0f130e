use std::collections::HashSet;
use std::fmt;

use crate::tag::{Inventory, TagId};

/// Outcome of one protocol run.
#[derive(Clone, Debug, PartialEq)]
pub struct IdentificationResult {
    pub identified_missing: Vec<TagId>,
    pub identified_present: Vec<TagId>,
    pub elapsed_ms: f64,
    pub reader_bits: u64,
    pub tag_bits: u64,
    /// Tag response slots.
    pub slots_used: u64,
    pub rounds: u64,
    /// Present tags reported missing.
    pub false_positives: usize,
    /// Missing tags reported present.
    pub false_negatives: usize,
    pub trace: Vec<RoundTrace>,
}

impl IdentificationResult {
    /// Fills in the error counts against the inventory's ground truth.
    pub(crate) fn score(&mut self, inventory: &Inventory) {
        let present = inventory.present_set();
        self.false_positives = self
            .identified_missing
            .iter()
            .filter(|id| present.contains(id))
            .count();
        self.false_negatives = self
            .identified_present
            .iter()
            .filter(|id| !present.contains(id))
            .count();
    }

    pub fn misidentified(&self) -> usize {
        self.false_positives + self.false_negatives
    }

    pub fn accuracy(&self, n: usize) -> f64 {
        if n == 0 {
            1.0
        } else {
            1.0 - self.misidentified() as f64 / n as f64
        }
    }

    /// True when the two identified sets partition `inventory`'s candidates.
    pub fn partitions(&self, inventory: &Inventory) -> bool {
        let missing: HashSet<TagId> = self.identified_missing.iter().copied().collect();
        let present: HashSet<TagId> = self.identified_present.iter().copied().collect();
        missing.len() == self.identified_missing.len()
            && present.len() == self.identified_present.len()
            && missing.is_disjoint(&present)
            && missing.len() + present.len() == inventory.len()
            && inventory
                .candidates()
                .iter()
                .all(|id| missing.contains(id) || present.contains(id))
    }
}

/// Per-round log line. `Display` renders machine-readable `key=value` pairs.
#[derive(Clone, Debug, PartialEq)]
pub enum RoundTrace {
    Arrangement {
        round: u64,
        f2: usize,
        append_len: usize,
        arranged: usize,
        broadcast_bits: usize,
        elapsed_ms: f64,
    },
    Verification {
        slots: usize,
        w: usize,
        missing: usize,
        present: usize,
        elapsed_ms: f64,
    },
    Interactive {
        round: u64,
        f3: usize,
        p: f64,
        q_hat: f64,
        n1: usize,
        n11: usize,
        new_missing: usize,
        new_present: usize,
        carryover: usize,
        elapsed_ms: f64,
    },
    Aloha {
        round: u64,
        frame: usize,
        empty: usize,
        singleton: usize,
        collision: usize,
        elapsed_ms: f64,
    },
}

impl fmt::Display for RoundTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RoundTrace::Arrangement {
                round,
                f2,
                append_len,
                arranged,
                broadcast_bits,
                elapsed_ms,
            } => write!(
                f,
                "stage=arrange round={round} f2={f2} a={append_len} arranged={arranged} \
                 broadcast_bits={broadcast_bits} elapsed_ms={elapsed_ms:.4}"
            ),
            RoundTrace::Verification {
                slots,
                w,
                missing,
                present,
                elapsed_ms,
            } => write!(
                f,
                "stage=verify slots={slots} w={w} missing={missing} present={present} \
                 elapsed_ms={elapsed_ms:.4}"
            ),
            RoundTrace::Interactive {
                round,
                f3,
                p,
                q_hat,
                n1,
                n11,
                new_missing,
                new_present,
                carryover,
                elapsed_ms,
            } => write!(
                f,
                "stage=interactive round={round} f3={f3} p={p:.4} q_hat={q_hat:.4} n1={n1} \
                 n11={n11} missing={new_missing} present={new_present} carryover={carryover} \
                 elapsed_ms={elapsed_ms:.4}"
            ),
            RoundTrace::Aloha {
                round,
                frame,
                empty,
                singleton,
                collision,
                elapsed_ms,
            } => write!(
                f,
                "stage=aloha round={round} frame={frame} empty={empty} singleton={singleton} \
                 collision={collision} elapsed_ms={elapsed_ms:.4}"
            ),
        }
    }
}
