//! Hybrid recommendation of scientific articles from implicit feedback.
//!
//! Two attentive autoencoders compress an article's text and its
//! tag/citation profile into low-dimensional vectors. Those vectors become
//! the Gaussian prior means of the article factors in a confidence-weighted
//! matrix factorization trained with alternating least squares.
//!
//! The crate is organised bottom-up:
//!
//! * [`corpus`]: ingestion of CiteULike-style files, vocabulary selection,
//!   bag-of-words and tag matrices.
//! * [`nn`]: the small dense network toolkit the autoencoders are built from.
//! * [`autoencoder`]: the attentive autoencoder and its pre-training loop.
//! * [`cf`]: weighted matrix factorization with content priors, and the
//!   popularity baseline.
//! * [`eval`]: train/test splits and recall/nDCG at K.
//! * [`pipeline`]: the preprocess / train / evaluate / recommend commands.
//! * [`synth`]: a planted-cluster dataset generator.

pub mod autoencoder;
pub mod cf;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod nn;
pub mod pipeline;
pub mod synth;
pub mod tensorfile;

pub use error::{Error, Result};
