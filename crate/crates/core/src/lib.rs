//! Exact arithmetic for quadratic twists over `K = Q(sqrt(-q))`, `q = 7 mod 8`.
//!
//! The crate computes, for a twisting element `R`, the number `s_inf(R)` of
//! primes of the `Z_2`-extension `K_inf/K` unramified outside the prime `p`
//! above 2 (fixed by `sqrt(-q) = 1 mod 4` in `Q_2`) that divide
//! `sqrt(-q) * R`, and derives from it the `lambda`-invariants of the
//! fields
//!
//! ```text
//! F  = K(sqrt(-sqrt(-q) R)),   F' = K(sqrt(sqrt(-q) R)),   D = K(i),   J = F F'
//! ```
//!
//! along with the matching Selmer coranks, the rank-one classification and
//! explicit Kummer generators.
//!
//! Module map:
//!
//! * [`arith`] rational integers: primality, factoring, Kronecker symbol.
//! * [`qfield`] elements and prime ideals of the maximal order of `K`.
//! * [`dyadic`] 2-adic integers at finite precision and the embedding `iota_p`.
//! * [`iwasawa`] splitting counts, `s_inf(R)`, lambda and Selmer reports.
//! * [`twistlab`] twist validation, scans, rank-one cases, witnesses.
//! * [`cli`] command adapters and the JSON/CSV output envelope.

pub mod arith;
pub mod cli;
pub mod dyadic;
mod error;
pub mod iwasawa;
pub mod qfield;
mod serde_num;
pub mod twistlab;

pub use error::{Error, Result};

/// Effort and precision knobs shared by every computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    /// Largest 2-adic precision (bits) the adaptive protocol may reach.
    pub precision_cap: u32,
    /// Starting 2-adic precision (bits); doubled on exhaustion.
    pub initial_precision: u32,
    pub factor: arith::FactorConfig,
    /// Iteration budget of the brute-force norm-equation search.
    pub search_bound: u64,
    /// Largest `|R|` accepted by twist scans.
    pub scan_cap: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            precision_cap: 4096,
            initial_precision: 16,
            factor: arith::FactorConfig::default(),
            search_bound: 20_000_000,
            scan_cap: 10_000_000,
        }
    }
}
