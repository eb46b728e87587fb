//! Hybrid quantum-classical generative-adversarial training engine.
//!
//! The generator is a variational quantum Kolmogorov-Arnold network: a
//! layered Ry/CZ ansatz whose rotation angles are learnable univariate
//! functions (B-spline or Gaussian RBF expansions) of the layer input.
//! Images are read out Born-machine style from measurement probabilities,
//! one patch per sub-generator, and the whole thing trains adversarially
//! against a small classical MLP discriminator.
//!
//! Modules:
//! - [`statevector`]: exact dense simulation of the Ry/CZ gate set
//! - [`activations`]: learnable angle functions (B-spline / RBF bases)
//! - [`generator`]: the quantum KAN generator and the plain layered baseline
//! - [`discriminator`]: 3-layer MLP with manual backprop, SGD and Adam
//! - [`training`]: the adversarial loop, losses, circuit gradients
//! - [`metrics`]: MSE, sliced Wasserstein, kernel MMD, Welch-t / Bonferroni
//! - [`data`]: MNIST-family IDX and CIFAR-10 binary ingestion

pub mod activations;
pub mod data;
pub mod discriminator;
pub mod generator;
pub mod metrics;
pub mod statevector;
pub mod training;

pub use activations::{fermi_activation, BasisConfig, BasisFamily, KanActivationParams};
pub use data::Dataset;
pub use discriminator::DiscriminatorMlp;
pub use generator::{GeneratorConfig, GeneratorModel, LatentVector, VqkanGenerator};
pub use metrics::ImageSet;
pub use statevector::{ProbVector, StateVector};
pub use training::{GradientMode, Optimizer, TrainConfig, TrainingLog};
