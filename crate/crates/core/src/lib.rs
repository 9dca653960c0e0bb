//! Ground-truth benchmark for saliency-map fidelity metrics.
//!
//! A CART regression tree is trained on flattened synthetic shape images. Because
//! the tree is transparent, the decision path of each instance yields an
//! explanation whose fidelity is known to be perfect. Any fidelity metric that
//! scores these explanations as imperfect is therefore measuring something other
//! than fidelity.
//!
//! The crate is organised as a pipeline:
//!
//! * [`imagecore`]: grayscale images, saliency maps, PGM/PFM I/O.
//! * [`datagen`]: synthetic circle/square/cross scenes and their labels.
//! * [`cart`]: exact-fit regression tree, prediction and serialization.
//! * [`explain`]: path/impurity-decrease saliency for a single instance.
//! * [`fidelity`]: Region Perturbation, Faithfulness Correlation,
//!   Faithfulness Estimate and Infidelity.
//! * [`bench`]: configuration, the `datagen → train → explain → evaluate → report`
//!   stages and their file formats.
//!
//! See the `examples/` directory of this crate for one runnable program per
//! capability.

pub mod bench;
pub mod cart;
pub mod datagen;
pub mod error;
pub mod explain;
pub mod fidelity;
pub mod imagecore;
pub mod kv;
pub mod seed;

pub use cart::{BlackBoxModel, RegressionTree, TreeParams};
pub use error::{Error, Result};
pub use imagecore::{Image, SaliencyMap};
