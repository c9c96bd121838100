//! Classic machine learning from scratch.
//!
//! Nearest neighbors with exact tree search, penalized linear and logistic
//! regression, kernel SVMs, multiclass strategies, Gaussian generative
//! classifiers, decision trees and forests, k-means and Gaussian mixtures,
//! PCA/LDA projections, kernel ridge regression and kernel PCA.
//!
//! All arithmetic is `f64` and every randomized procedure takes an explicit
//! seed, so fits are reproducible bit for bit.

pub mod clustering;
pub mod data;
pub mod decomposition;
pub mod error;
pub mod gaussian_models;
pub mod kernel_methods;
pub mod linalg;
pub mod linear_models;
pub mod metric;
pub mod multiclass;
pub mod neighbors;
pub mod parallel;
pub mod rng;
pub mod svm;
pub mod trees;

pub use data::{argmax, Labels, Matrix};
pub use error::{Error, ErrorClass, Result};
pub use metric::{euclidean_distance, Metric};
pub use rng::{rng_split, SeededRng};
