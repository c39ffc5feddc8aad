//! A laboratory for expansion phenomena of multivariate polynomials over
//! finite fields.
//!
//! The crate provides:
//!
//! * [`gf`]: arithmetic in F_q (q = p^k up to 2^20) with canonical packed
//!   representatives and deterministic enumeration;
//! * [`mvpoly`]: sparse multivariate polynomials, a text parser, partial
//!   derivatives and single-variable decomposition;
//! * [`linalg`]: dense row reduction and kernel bases over F_q;
//! * [`structure`]: Jacobian and annihilator machinery deciding whether a
//!   polynomial's coefficient decomposition is algebraically independent,
//!   plus a closed-form classifier for ternary quadratics;
//! * [`incidence`]: point/curve incidence counting and the exact-arithmetic
//!   deviation check against the q^{n/2} sqrt(|P||Q|) bound;
//! * [`expansion`]: image-set scans, deficiency statistics, structured
//!   counterexample sets and concentration-family experiments;
//! * [`report`]: versioned JSON/CSV report documents shared with the CLI.
//!
//! All randomness flows through [`rng::seeded_rng`]; a (config, seed) pair
//! determines every byte of a report except its wall-time field.

pub mod error;
pub mod expansion;
pub mod gf;
pub mod incidence;
pub mod linalg;
pub mod mvpoly;
pub mod report;
pub mod rng;
pub mod structure;

pub use error::{Error, Result};
pub use gf::{FieldCtx, FieldElement, Subset};
pub use mvpoly::MvPoly;
