//! Gaussian-process surrogate: kernels, exact posterior, likelihood fitting.

mod fit;
mod kernel;
mod posterior;

pub use fit::{fit_hyperparameters, log_marginal_likelihood, FitConfig, FittedModel};
pub use kernel::{KernelFamily, KernelSpec};
pub use posterior::{posterior, Dataset, ExpansionQuantities, GpPosterior, Standardization};
