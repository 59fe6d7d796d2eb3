//! Diophantine approximation toolkit.
//!
//! All scans are finite-range: certificates and witness lists always carry the
//! bound they exhausted.

mod approx;
mod cf;
mod delta;
mod psi;
mod witness;

pub use approx::{ba_certificate, growth_constant, i_eps_set, ApproxElement, ApproxSet, BaCertificate, Separation};
pub use cf::{cf_convergents, cf_convergents_upto};
pub use delta::{delta_q, dirichlet_best, half_lattice_ball, Approximant, DeltaEngine, DirichletResult};
pub use psi::RegularPsi;
pub use witness::{liouville_guarantee, liouville_number, swa_star_tensorize, wa_witnesses, WaReport, Witness};
