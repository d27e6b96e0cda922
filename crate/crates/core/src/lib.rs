//! Design and evaluation of sparse code multiple access (SCMA) codebooks.
//!
//! The pipeline mirrors the modules:
//!
//! 1. [`factor_graph`] builds the `K x L` sparsity pattern.
//! 2. [`group_optimizer`] designs `d_f` sub-constellations that minimize an
//!    MGF-based union bound for the chosen fading channel ([`channels`]).
//! 3. [`progressive_builder`] distributes and relabels them RE by RE into `L`
//!    codebooks.
//! 4. [`error_analysis`] evaluates the union bound of the result, and
//!    [`simulation`] measures its SER with the receivers of [`detection`].
//!
//! [`io`] and [`cli`] handle files and the `scma-forge` command.
//!
//! ```
//! use scma_forge::channels::{db_to_linear, ChannelSpec};
//! use scma_forge::error_analysis::{ser_union_bound, SuperimposedCodewordSet};
//! use scma_forge::factor_graph::IndicatorMatrix;
//! use scma_forge::group_optimizer::{baseline_group, default_baseline_angles, qpsk};
//! use scma_forge::progressive_builder::{build_codebooks, SearchMode};
//!
//! let f = IndicatorMatrix::four_by_six();
//! let spec = ChannelSpec::rayleigh(0.5)?;
//! let group = baseline_group(&qpsk(), &default_baseline_angles(f.df()))?;
//! let design = build_codebooks(&f, &group, &spec, db_to_linear(16.0), SearchMode::Exhaustive)?;
//! let set = SuperimposedCodewordSet::from_codebooks(&design.codebooks)?;
//! assert!(ser_union_bound(&set, &spec, db_to_linear(20.0))? < 1.0);
//! # Ok::<(), scma_forge::Error>(())
//! ```

pub mod channels;
pub mod cli;
pub mod detection;
pub mod error;
pub mod error_analysis;
pub mod factor_graph;
pub mod group_optimizer;
pub mod io;
pub mod progressive_builder;
pub mod simulation;

pub use error::{Error, Result};
