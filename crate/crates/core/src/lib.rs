//! Transfer learning for univariate time series classification from a synthetic
//! pretraining corpus.
//!
//! The crate covers the whole workflow: parametric series generation ([`synthgen`]),
//! the 55 regression pretext targets ([`labeler`]), a residual 1D CNN with exact
//! gradients ([`tensornet`]), pretraining and fine-tuning loops ([`pipeline`]), the
//! evaluation statistics ([`analysis`]), and file formats ([`io`]).

pub mod analysis;
pub mod error;
pub mod io;
pub mod labeler;
pub mod pipeline;
pub mod rng;
pub mod series;
pub mod synthgen;
pub mod tensornet;

pub use error::{Error, FormatError, Result};
pub use series::TimeSeries;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub struct Introduction;
    #[doc = include_str!("../../../book/src/synthetic-data.md")]
    pub struct SyntheticData;
    #[doc = include_str!("../../../book/src/pretext-labels.md")]
    pub struct PretextLabels;
    #[doc = include_str!("../../../book/src/network.md")]
    pub struct Network;
    #[doc = include_str!("../../../book/src/training.md")]
    pub struct Training;
    #[doc = include_str!("../../../book/src/analysis.md")]
    pub struct Analysis;
    #[doc = include_str!("../../../book/src/file-formats.md")]
    pub struct FileFormats;
    #[doc = include_str!("../../../book/src/cli.md")]
    pub struct Cli;
}
