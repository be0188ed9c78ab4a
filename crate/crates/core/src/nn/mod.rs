//! Dense tanh networks and their training machinery.
//!
//! Parameters live in one flat vector so that optimizers and finite-difference
//! checks can treat them uniformly. Per layer the layout is the row-major
//! weight matrix (`out × in`) followed by the bias.

mod adam;
mod grad;
mod lr;
mod mlp;

pub use adam::Adam;
pub use grad::{jacobian_param_grad, loss_param_grad};
pub use lr::LrController;
pub use mlp::{Architecture, Mlp, TangentWorkspace, Workspace};
