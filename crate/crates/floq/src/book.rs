//! Doctest harness for the guide in `book/`: every fenced Rust block in the
//! chapters runs under `cargo test --doc`, so the narrative cannot drift
//! from the library.

#[doc = include_str!("../../../book/src/introduction.md")]
pub struct IntroductionChapter;

#[doc = include_str!("../../../book/src/commuting-systems.md")]
pub struct CommutingSystemsChapter;

#[doc = include_str!("../../../book/src/fundamental-matrix.md")]
pub struct FundamentalMatrixChapter;

#[doc = include_str!("../../../book/src/floquet.md")]
pub struct FloquetChapter;

#[doc = include_str!("../../../book/src/second-order.md")]
pub struct SecondOrderChapter;

#[doc = include_str!("../../../book/src/expressions.md")]
pub struct ExpressionsChapter;

#[doc = include_str!("../../../book/src/cli.md")]
pub struct CliChapter;
