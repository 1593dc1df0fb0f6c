pub mod downstream;
pub mod error;
pub mod metrics;
pub mod msa_spliced;
pub mod ortho_pair;
pub mod pairwise;
pub mod scoring;
pub mod seqmodel;
pub mod simulate;
pub mod spliced;

pub use error::{Error, Result};
