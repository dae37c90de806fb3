//! Exact characteristic solutions and energy analysis for the wave equation on
//! the expanding interval `0 < x < 1 + k t`.
//!
//! See the guide under `book/` for a walk-through.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod app;
pub mod data;
pub mod delay;
pub mod error;
pub mod fdm;
pub mod geometry;
pub mod profile;
pub mod quad;
pub mod scenario;

macro_rules! book_chapters {
    ($($name:ident => $file:literal),* $(,)?) => {
        $(
            #[cfg(doctest)]
            #[doc = include_str!(concat!("../../../book/src/", $file))]
            pub struct $name;
        )*
    };
}

book_chapters! {
    BookIntroduction => "introduction.md",
    BookGeometry => "geometry.md",
    BookNeumann => "neumann.md",
    BookRegimes => "regimes.md",
    BookDelay => "delay.md",
    BookOracle => "oracle.md",
    BookCli => "cli.md",
}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
pub struct Readme;
