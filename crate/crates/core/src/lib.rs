//! Exact verification engine for a spectral torsion functional.
//!
//! Given a conformal factor, a perturbing one- or three-form and three frame
//! vectors at a point, the engine computes the noncommutative-residue
//! density of the rescaled perturbed operator in exact Gaussian-rational
//! arithmetic: symbols are composed order by order, the Clifford fibre
//! trace is taken in closed form, and covector averages over the unit
//! sphere are exact rationals. Floating point appears only in the matrix
//! cross-check and in numeric convenience fields of reports.
//!
//! Module map:
//!
//! * [`scalar`] — arbitrary-precision rationals and Gaussian rationals,
//!   with the canonical string grammar used by the file formats;
//! * [`clifford`] — exact Clifford algebra, traces, the grading element,
//!   vector/3-form actions;
//! * [`oracle`] — an independent floating-point matrix model of the same
//!   algebra (Pauli/Kronecker construction) used for cross-checks;
//! * [`sphere`] — exact monomial averages over `S^{n-1}` plus a
//!   quasi–Monte Carlo estimator as a third opinion;
//! * [`jet`] — first-order jets of scalar functions at the working point;
//! * [`symbol`] — graded symbols and their composition calculus;
//! * [`functional`] — the operator symbols, the density term ledger and
//!   the closed-form predictions it is compared against;
//! * [`verify`] — randomized self-check suites;
//! * [`report`] — input/output file formats.

pub mod clifford;
pub mod functional;
pub mod jet;
pub mod oracle;
pub mod report;
pub mod scalar;
pub mod sphere;
pub mod symbol;
pub mod verify;
