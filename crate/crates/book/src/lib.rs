//! Compiles every code listing of the guide in `book/` as a doc-test.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/morphisms.md")]
pub mod morphisms {}
#[doc = include_str!("../../../book/src/resultants.md")]
pub mod resultants {}
#[doc = include_str!("../../../book/src/local-densities.md")]
pub mod local_densities {}
#[doc = include_str!("../../../book/src/archimedean.md")]
pub mod archimedean {}
#[doc = include_str!("../../../book/src/constants.md")]
pub mod constants {}
#[doc = include_str!("../../../book/src/dynamics.md")]
pub mod dynamics {}
#[doc = include_str!("../../../book/src/counting.md")]
pub mod counting {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
