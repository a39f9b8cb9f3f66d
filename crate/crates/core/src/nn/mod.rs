//! Small neural-network toolkit: dense MLP with hand-written reverse mode,
//! Adam, losses and the affine maps between integer boxes and the
//! normalized frame `[-0.5, 0.5]^n`.

mod adam;
mod frame;
mod loss;
mod mlp;

pub use adam::Adam;
pub use frame::{normalize_cost, normalize_cost_backward, BoxFrame};
pub use loss::{loss_and_gradient, LossKind, HUBER_BETA};
pub use mlp::{Mlp, MlpCache, OutputScale};
