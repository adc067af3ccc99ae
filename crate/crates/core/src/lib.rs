pub mod category;
pub mod cli;
pub mod corpus;
pub mod coverage;
pub mod finite;
pub mod functor;
pub mod lattice;
pub mod phi;
pub mod report;
pub mod sheaf;
pub mod sieve;
pub mod spectrum;
pub mod text;
pub mod transport;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/lattices.md")]
    mod lattices {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/coverage.md")]
    mod coverage {}
    #[doc = include_str!("../../../book/src/sheaves.md")]
    mod sheaves {}
    #[doc = include_str!("../../../book/src/transport.md")]
    mod transport {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
