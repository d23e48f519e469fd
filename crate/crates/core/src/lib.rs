//! Hilbert functions of point sets coming from set families over prime
//! fields, and executable checks of the polynomial-method statements built
//! on them.
//!
//! A family `F` of subsets of `[n]` gives the point set of characteristic
//! vectors `V(F) ⊆ {0,1}^n ⊆ F_p^n`. Its Hilbert function `h_F(m)` is the
//! dimension of the space of functions on `V(F)` given by polynomials of
//! degree at most `m`, and the kernel of the same evaluation matrix is the
//! degree-`<= m` part of the vanishing ideal.
//!
//! ```
//! use hilbfam::hilbert::{hilbert_value, wilson_value};
//! use hilbfam::setfam::make_uniform_family;
//!
//! let points = make_uniform_family(6, 3).unwrap().points();
//! let h = hilbert_value(&points, 2, 3, 1).unwrap();
//! assert_eq!(h, 15);
//! assert_eq!(wilson_value(6, 3, 2).unwrap(), 15u32.into());
//! ```
//!
//! The guide in `book/` walks through every module with runnable snippets;
//! those snippets are compiled and run as doc-tests of this crate.

pub mod balancing;
pub mod cli;
pub mod error;
pub mod gflinalg;
pub mod hilbert;
pub mod poly;
pub mod setfam;
pub mod theorems;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/families.md")]
    mod families {}
    #[doc = include_str!("../../../book/src/linalg.md")]
    mod linalg {}
    #[doc = include_str!("../../../book/src/polynomials.md")]
    mod polynomials {}
    #[doc = include_str!("../../../book/src/hilbert.md")]
    mod hilbert {}
    #[doc = include_str!("../../../book/src/theorems.md")]
    mod theorems {}
    #[doc = include_str!("../../../book/src/balancing.md")]
    mod balancing {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
