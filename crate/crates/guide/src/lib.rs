//! The guide chapters under `book/src`, compiled so their snippets run as doc-tests.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/data.md")]
pub mod data {}
#[doc = include_str!("../../../book/src/spliced_alignment.md")]
pub mod spliced_alignment {}
#[doc = include_str!("../../../book/src/orthology.md")]
pub mod orthology {}
#[doc = include_str!("../../../book/src/multiple.md")]
pub mod multiple {}
#[doc = include_str!("../../../book/src/column_alignment.md")]
pub mod column_alignment {}
#[doc = include_str!("../../../book/src/metrics.md")]
pub mod metrics {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
