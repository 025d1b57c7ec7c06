//! ARMA systems, their characteristic roots and impulse responses.
//!
//! The system is `y_t = Σ a_i y_{t-i} + u_t` with `u_t = Σ b_j w_{t-j}`. Its
//! impulse response `G` (from `u` to `y`) depends only on the AR part and is
//! available in two independent forms: the direct recursion and the modal
//! (partial-fraction) expansion over the characteristic roots.

mod arma;
mod envelope;
mod impulse;
mod roots;

pub use arma::{char_poly, ArmaSpec};
pub use envelope::{dominant_envelope, DominantKind, Envelope, ImpulseResponse};
pub use impulse::{impulse_modal, impulse_recursive, modal_form, Mode, ModalForm, StabilityPolicy};
pub use roots::{aberth_ehrlich, find_roots, Pole, PoleSet, CLUSTER_TOL, MAX_ITERATIONS, STEP_TOL};
