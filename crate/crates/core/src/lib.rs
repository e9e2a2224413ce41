pub mod error;
pub mod graph;
pub mod matching;
pub mod weighted;
pub mod hstate;
pub mod exact;
pub mod phase1;
pub mod factor;
pub mod structure;
pub mod local_ops;
pub mod pipeline;
pub mod gen;
pub mod harness;

pub use error::{Error, Result};
pub use graph::{parse_graph, validate_solution, Graph, Solution};
pub use pipeline::solve;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/exact.md")]
    mod exact {}
    #[doc = include_str!("../../../book/src/phase1.md")]
    mod phase1 {}
    #[doc = include_str!("../../../book/src/rescue.md")]
    mod rescue {}
    #[doc = include_str!("../../../book/src/structure.md")]
    mod structure {}
    #[doc = include_str!("../../../book/src/operations.md")]
    mod operations {}
    #[doc = include_str!("../../../book/src/recursion.md")]
    mod recursion {}
    #[doc = include_str!("../../../book/src/verification.md")]
    mod verification {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
