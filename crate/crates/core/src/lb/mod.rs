//! Subset compression driven by a UR protocol: an encoder that spends the
//! protocol's message plus an explicit remainder set, a decoder that always
//! inverts it, and exact accounting of the bits spent.

mod codec;
mod file;
mod numeric;
mod params;
mod savings;
mod subset;

pub use codec::{
    dec, dec_k, enc, enc_k, encoding_bit_length, lockstep, lockstep_k, EncoderOutput, Lockstep,
};
pub use file::{read_encoding, write_encoding};
pub use numeric::{
    adaptivity_experiment, binary_entropy, mixture_mutual_information, pochhammer_check,
    AdaptivityRecord, PochhammerRecord,
};
pub use params::{LbParams, LbParamsK};
pub use savings::{
    random_subset, savings_inequality_holds, savings_report, SavingsSummary, SavingsTrial,
};
pub use subset::{subset_rank, subset_unrank, SubsetCode};
