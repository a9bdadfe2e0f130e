//! Simulation and analysis of bit-tracking missing tag identification for RFID.
//!
//! A reader holds the IDs of `N` candidate tags and must tell which of them
//! are missing from its field. Two protocols are provided:
//!
//! * [`ssmti`] first gives every candidate a unique serial number through a
//!   few broadcast rounds, then verifies all of them with one bit each inside
//!   `w`-bit strings.
//! * [`ismti`] hashes tags straight onto bits of the strings and settles
//!   whole groups of missing tags per bit, re-hashing the leftovers.
//!
//! [`baseline`] has a frame-slotted Aloha collector for comparison and a
//! brute-force bit decoder used to check the protocols. [`analysis`] holds the
//! timing model and the load-factor optimizers, and [`experiment`] runs
//! seeded, repeated trials and parameter sweeps.
//!
//! ```
//! use rfid_mti::{make_inventory, run_ssmti, ChannelConfig, Seed, SsmtiConfig};
//!
//! let inventory = make_inventory(1000, 0.1, Seed(7)).unwrap();
//! let result = run_ssmti(&inventory, &SsmtiConfig::default(), &ChannelConfig::error_free(), Seed(7)).unwrap();
//! assert_eq!(result.identified_missing.len(), 100);
//! assert_eq!(result.misidentified(), 0);
//! ```

pub mod analysis;
pub mod baseline;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod ismti;
pub mod result;
pub mod ssmti;
pub mod tag;

pub use analysis::{ismti_p_opt, ssmti_p_opt, TimingModel};
pub use baseline::{oracle_decode, run_edfsa, EdfsaConfig};
pub use channel::{
    superpose, transmit_slot, BitSymbol, ChannelConfig, ReceivedString, TagString, Verdict,
};
pub use error::{Error, Result};
pub use experiment::{
    run_experiment, sweep, write_csv, ExperimentConfig, Protocol, RatePrior, TrialReport,
};
pub use ismti::{run_ismti, IsmtiConfig};
pub use result::{IdentificationResult, RoundTrace};
pub use ssmti::{run_ssmti, BroadcastCost, SsmtiConfig};
pub use tag::{hash_binary, hash_slot, make_inventory, Inventory, Seed, TagId};
