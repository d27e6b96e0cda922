//! Doc-test harness for the guide in `book/`. Each chapter is included as
//! the documentation of an empty module, so `cargo test` runs its snippets.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/factor-graphs.md")]
pub mod factor_graphs {}
#[doc = include_str!("../../../book/src/bounds.md")]
pub mod bounds {}
#[doc = include_str!("../../../book/src/constellation-groups.md")]
pub mod constellation_groups {}
#[doc = include_str!("../../../book/src/progressive-construction.md")]
pub mod progressive_construction {}
#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}
#[doc = include_str!("../../../book/src/command-line.md")]
pub mod command_line {}
