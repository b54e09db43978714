//! Band structure, integrated density of states (IDS) and density of states
//! (DOS) of the one-dimensional Schrödinger operator with a sawtooth
//! (zigzag) periodic potential.
//!
//! The potential is the 2L0-periodic even function equal to
//! `-V0 + V0|x|/L0` on `[-L0, L0]`. After rescaling, the whole spectral
//! problem depends on the single dimensionless constant
//! `kappa = (2 m L0^2 V0 / hbar^2)^(1/3)`; energies are expressed as
//! `e = E / V0` throughout (so the wells span `e` from -1 at the bottom to 0
//! at the cusps).
//!
//! Everything is built from closed-form Airy propagators:
//!
//! * [`airy`] — accurate `Ai`, `Bi`, `Ai'`, `Bi'` on the real line.
//! * [`lattice`] — transfer matrices, monodromy discriminant, band edges.
//! * [`spectral`] — Bloch phase, IDS, DOS, band-edge coefficients.
//! * [`finite`] — eigenvalues of the truncated (2N+1)-well operator.
//! * [`disorder`] — Monte-Carlo probe of the IDS tail under depth disorder.
//! * [`oracle`] — slow, independent ground truth (arbitrary-precision Airy
//!   series and a finite-difference eigensolver) used by the test suite.

pub mod airy;
pub mod dd;
pub mod disorder;
pub mod finite;
pub mod fit;
pub mod lattice;
pub mod oracle;
pub mod solve;
pub mod spectral;

mod error;
pub use error::CoreError;
